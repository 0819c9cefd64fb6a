use serde::Serialize;

use crate::domain::Domain;

use super::{Nonlinearity, SystemParams};

/// Margin `ε` fixed for the radius diagnostics.
pub const RADIUS_EPSILON: f64 = 0.1;

/// Finite-radius envelopes of `F = (f₁ + f₂)/(L₁u₁ + L₂u₂)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitRatioReport {
    pub f0_lower: f64,
    pub f0_upper: f64,
    pub finf_lower: f64,
    pub finf_upper: f64,
    pub r_small: f64,
    pub r_large: f64,
    pub n_directions: usize,
    pub n_points: usize,
}

/// `x` nodes per axis including the boundary.
fn sample_axes(domain: &Domain, n_points: usize) -> Vec<Vec<f64>> {
    domain
        .lengths()
        .iter()
        .map(|&a| {
            if n_points <= 1 {
                vec![0.5 * a]
            } else {
                (0..n_points).map(|i| a * i as f64 / (n_points - 1) as f64).collect()
            }
        })
        .collect()
}

fn sample_points(domain: &Domain, n_points: usize) -> Vec<Vec<f64>> {
    let axes = sample_axes(domain, n_points);
    let mut points = vec![Vec::new()];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

/// `(min F, max F)` over the sampled points and the rays
/// `(u₁, u₂) = r(cos²θ, sin²θ)`, `θ ∈ [0, π/2]`.
fn envelope(
    f1: &Nonlinearity,
    f2: &Nonlinearity,
    sys: &SystemParams,
    points: &[Vec<f64>],
    r: f64,
    n_directions: usize,
) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let n = n_directions.max(1);
    for i in 0..n {
        let theta = if n == 1 {
            std::f64::consts::FRAC_PI_4
        } else {
            std::f64::consts::FRAC_PI_2 * i as f64 / (n - 1) as f64
        };
        let u1 = r * theta.cos().powi(2);
        let u2 = r * theta.sin().powi(2);
        let denom = sys.l1 * u1 + sys.l2 * u2;
        for x in points {
            let ratio = (f1.eval(x, u1, u2) + f2.eval(x, u1, u2)) / denom;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    (lo, hi)
}

/// Samples `F` at radius `r_small` for `f₀`, `f⁰` and at `r_large` for `f_∞`, `f^∞`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_limit_ratios(
    f1: &Nonlinearity,
    f2: &Nonlinearity,
    sys: &SystemParams,
    domain: &Domain,
    r_small: f64,
    r_large: f64,
    n_directions: usize,
    n_points: usize,
) -> LimitRatioReport {
    let points = sample_points(domain, n_points);
    let (f0_lower, f0_upper) = envelope(f1, f2, sys, &points, r_small, n_directions);
    let (finf_lower, finf_upper) = envelope(f1, f2, sys, &points, r_large, n_directions);
    LimitRatioReport { f0_lower, f0_upper, finf_lower, finf_upper, r_small, r_large, n_directions, n_points }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Theorem {
    /// `f⁰ < 1 < f_∞`.
    Thm41,
    /// `f^∞ < 1 < f₀`.
    Thm42,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisVerdict {
    pub classification: Theorem,
    pub ratios: LimitRatioReport,
    pub diagnostic: Option<String>,
}

/// Default radii and sampling of the hypothesis check.
pub const DEFAULT_R_SMALL: f64 = 1e-3;
pub const DEFAULT_R_LARGE: f64 = 1e3;
const DEFAULT_DIRECTIONS: usize = 17;
const DEFAULT_POINTS: usize = 9;

pub fn theorem_hypothesis_check(
    f1: &Nonlinearity,
    f2: &Nonlinearity,
    sys: &SystemParams,
    domain: &Domain,
) -> HypothesisVerdict {
    let r = estimate_limit_ratios(
        f1,
        f2,
        sys,
        domain,
        DEFAULT_R_SMALL,
        DEFAULT_R_LARGE,
        DEFAULT_DIRECTIONS,
        DEFAULT_POINTS,
    );
    classify(r)
}

pub(crate) fn classify(r: LimitRatioReport) -> HypothesisVerdict {
    let superlinear = r.f0_upper < 1.0 && 1.0 < r.finf_lower;
    let sublinear = r.finf_upper < 1.0 && 1.0 < r.f0_lower;
    let (classification, diagnostic) = match (superlinear, sublinear) {
        (true, false) => (Theorem::Thm41, None),
        (false, true) => (Theorem::Thm42, None),
        (true, true) => (
            Theorem::Neither,
            Some(format!(
                "both chains hold at radii {} and {}; the envelopes are inconsistent",
                r.r_small, r.r_large
            )),
        ),
        (false, false) => (Theorem::Neither, None),
    };
    HypothesisVerdict { classification, ratios: r, diagnostic }
}

/// Radii that localize a positive solution in the existence arguments, for a
/// fixed margin `ε`. Diagnostic only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusReport {
    pub epsilon: f64,
    pub classification: Theorem,
    /// Largest scanned radius below which the small-amplitude inequality holds.
    pub r0: Option<f64>,
    /// Smallest scanned radius above which the large-amplitude inequality holds.
    pub k: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
}

/// Scans radii `10^-6 … 10^6` for where `F ≤ 1−ε` or `F ≥ 1+ε` holds, then
/// forms `C = k(1+ε)(L₁+L₂)`, `R₁ = C/(σε min L)` and `R₂ = k/σ`.
pub fn radius_report(
    f1: &Nonlinearity,
    f2: &Nonlinearity,
    sys: &SystemParams,
    domain: &Domain,
    sigma: f64,
) -> RadiusReport {
    let eps = RADIUS_EPSILON;
    let verdict = theorem_hypothesis_check(f1, f2, sys, domain);
    let points = sample_points(domain, DEFAULT_POINTS);
    let radii: Vec<f64> = (0..=48).map(|i| 10f64.powf(-6.0 + 0.25 * i as f64)).collect();
    let envs: Vec<(f64, f64)> =
        radii.iter().map(|&r| envelope(f1, f2, sys, &points, r, DEFAULT_DIRECTIONS)).collect();

    type Test = fn(&(f64, f64)) -> bool;
    let (small_ok, large_ok): (Test, Test) = match verdict.classification {
        Theorem::Thm41 => (|e| e.1 <= 1.0 - RADIUS_EPSILON, |e| e.0 >= 1.0 + RADIUS_EPSILON),
        Theorem::Thm42 => (|e| e.0 >= 1.0 + RADIUS_EPSILON, |e| e.1 <= 1.0 - RADIUS_EPSILON),
        Theorem::Neither => {
            return RadiusReport {
                epsilon: eps,
                classification: Theorem::Neither,
                r0: None,
                k: None,
                c: None,
                r1: None,
                r2: None,
            }
        }
    };
    let r0 = radii.iter().zip(&envs).take_while(|(_, e)| small_ok(e)).map(|(r, _)| *r).last();
    let k = radii.iter().zip(&envs).rev().take_while(|(_, e)| large_ok(e)).map(|(r, _)| *r).last();
    let c = k.map(|k| k * (1.0 + eps) * (sys.l1 + sys.l2));
    let r1 = c.map(|c| c / (sigma * eps * sys.l_min()));
    let r2 = match verdict.classification {
        Theorem::Thm41 => k.map(|k| k / sigma),
        _ => None,
    };
    RadiusReport { epsilon: eps, classification: verdict.classification, r0, k, c, r1, r2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::ParamPair;

    fn sys() -> (Domain, SystemParams) {
        let d = Domain::unit(1).unwrap();
        let p = ParamPair::new(0.0, 0.0);
        let s = SystemParams::new(&d, p, p).unwrap();
        (d, s)
    }

    #[test]
    fn linear_resonant_ratio_is_one() {
        let (d, s) = sys();
        let f1 = Nonlinearity::linear_resonant(s.l1, 1);
        let f2 = Nonlinearity::linear_resonant(s.l2, 2);
        let r = estimate_limit_ratios(&f1, &f2, &s, &d, 1e-3, 1e3, 9, 5);
        for v in [r.f0_lower, r.f0_upper, r.finf_lower, r.finf_upper] {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert_eq!(theorem_hypothesis_check(&f1, &f2, &s, &d).classification, Theorem::Neither);
        assert_eq!(radius_report(&f1, &f2, &s, &d, 0.01).r1, None);
    }

    #[test]
    fn quadratic_is_superlinear() {
        let (d, s) = sys();
        let f = Nonlinearity::power(1.0, 2.0);
        let v = theorem_hypothesis_check(&f, &f, &s, &d);
        assert_eq!(v.classification, Theorem::Thm41);
        assert!(v.ratios.f0_upper <= 0.01);
        let r1 = estimate_limit_ratios(&f, &f, &s, &d, 1e-3, 1e3, 9, 5);
        let r2 = estimate_limit_ratios(&f, &f, &s, &d, 1e-3, 2e3, 9, 5);
        let growth = r2.finf_lower / r1.finf_lower;
        assert!((growth - 2.0).abs() < 0.2);
        let rr = radius_report(&f, &f, &s, &d, 0.01);
        assert!(rr.r0.is_some() && rr.k.is_some() && rr.r2.is_some());
    }

    #[test]
    fn saturating_is_sublinear() {
        let (d, s) = sys();
        let f = Nonlinearity::saturating(2.0 * s.l1);
        let v = theorem_hypothesis_check(&f, &f, &s, &d);
        assert_eq!(v.classification, Theorem::Thm42);
        assert!((v.ratios.f0_lower - 4.0).abs() < 0.01);
        assert!(v.ratios.finf_upper < 0.01);
    }

    #[test]
    fn contradictory_envelopes_report_neither() {
        let r = LimitRatioReport {
            f0_lower: 2.0,
            f0_upper: 0.5,
            finf_lower: 2.0,
            finf_upper: 0.5,
            r_small: 1e-3,
            r_large: 1e3,
            n_directions: 1,
            n_points: 1,
        };
        let v = classify(r);
        assert_eq!(v.classification, Theorem::Neither);
        assert!(v.diagnostic.is_some());
    }
}
