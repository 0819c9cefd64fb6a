//! Splitting `Δ² + βΔ − α` into two Helmholtz factors and the parameter checks
//! that go with it.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Mode};
use crate::error::{Error, Result};

/// Relative margin below which a symbol value counts as zero.
const RESONANCE_RTOL: f64 = 1e-12;

/// Coefficients of `Δ²u + βΔu − αu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamPair {
    pub alpha: f64,
    pub beta: f64,
}

impl ParamPair {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    /// `P(λ) = λ² − βλ − α`, the action of the operator on an eigenmode with eigenvalue `λ`.
    pub fn symbol(&self, lambda: f64) -> f64 {
        lambda * lambda - self.beta * lambda - self.alpha
    }

    pub fn discriminant(&self) -> f64 {
        self.beta * self.beta + 4.0 * self.alpha
    }

    /// Scale used to judge whether `symbol(λ)` is zero.
    pub(crate) fn symbol_scale(&self, lambda: f64) -> f64 {
        lambda * lambda + self.beta.abs() * lambda + self.alpha.abs()
    }

    /// `λ₁² − λ₁β − α` for the domain.
    pub fn l_constant(&self, domain: &Domain) -> f64 {
        self.symbol(domain.first_eigenvalue())
    }
}

/// Shifts with `(−Δ−μ₁)(−Δ−μ₂) = Δ² + βΔ − α`, `μ₁ ≥ μ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    pub mu1: f64,
    pub mu2: f64,
}

impl Factorization {
    /// `(λ−μ₁)(λ−μ₂)`.
    pub fn symbol(&self, lambda: f64) -> f64 {
        (lambda - self.mu1) * (lambda - self.mu2)
    }
}

/// Roots of `μ² − βμ − α`, computed without cancellation.
pub fn factor_params(p: ParamPair) -> Result<Factorization> {
    let disc = p.discriminant();
    if disc < 0.0 || !disc.is_finite() {
        return Err(Error::ComplexRoots { discriminant: disc });
    }
    let root = disc.sqrt();
    let big = if p.beta >= 0.0 { 0.5 * (p.beta + root) } else { 0.5 * (p.beta - root) };
    let other = if big == 0.0 { p.beta - big } else { -p.alpha / big };
    let (mu1, mu2) = if big >= other { (big, other) } else { (other, big) };
    Ok(Factorization { mu1, mu2 })
}

/// Verdicts on a parameter pair for a given domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    /// `β < 2λ₁`.
    pub beta_bound_ok: bool,
    /// `β² + 4α ≥ 0`.
    pub discriminant_ok: bool,
    /// `α/λ_k² + β/λ_k < 1` for every mode.
    pub nonresonant_strict: bool,
    /// `α/λ_k² + β/λ_k ≠ 1` for every mode; enough for unique linear solvability.
    pub solvable: bool,
    /// First mode, in eigenvalue order, where the strict condition fails.
    pub first_violation: Option<String>,
    #[serde(skip)]
    pub first_violation_mode: Option<Mode>,
    #[serde(rename = "L")]
    pub l: f64,
    /// Eigenvalue above which the condition holds analytically.
    pub tail_threshold: f64,
    /// Number of modes tested explicitly.
    pub modes_checked: usize,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.beta_bound_ok && self.discriminant_ok && self.nonresonant_strict
    }
}

/// Checks all modes with `k_i ≤ order` and every further mode below the tail
/// threshold `max(2|β|, √(2|α|))`, beyond which each term of
/// `α/λ² + β/λ` is below one half.
pub fn check_admissible(p: ParamPair, domain: &Domain, order: usize) -> AdmissibilityReport {
    let lambda1 = domain.first_eigenvalue();
    let threshold = (2.0 * p.beta.abs()).max((2.0 * p.alpha.abs()).sqrt());

    let mut modes = domain.enumerate_modes(order.max(1));
    let first_unlisted = (0..domain.dim())
        .map(|axis| {
            let mut index = vec![1; domain.dim()];
            index[axis] = order.max(1) + 1;
            domain.eigenvalue(&Mode::new(index).expect("positive indices"))
        })
        .fold(f64::INFINITY, f64::min);
    if first_unlisted <= 1.01 * threshold {
        modes = domain.modes_below(1.01 * threshold);
        let more = domain.enumerate_modes(order.max(1));
        for m in more {
            if !modes.contains(&m) {
                modes.push(m);
            }
        }
        modes.sort_by(|a, b| {
            domain.eigenvalue(a).total_cmp(&domain.eigenvalue(b)).then_with(|| a.index().cmp(b.index()))
        });
    }

    let mut first_violation = None;
    let mut solvable = true;
    for m in &modes {
        let lambda = domain.eigenvalue(m);
        let symbol = p.symbol(lambda);
        let margin = RESONANCE_RTOL * p.symbol_scale(lambda);
        if symbol <= margin && first_violation.is_none() {
            first_violation = Some(m.clone());
        }
        if symbol.abs() <= margin {
            solvable = false;
        }
    }

    AdmissibilityReport {
        beta_bound_ok: p.beta < 2.0 * lambda1,
        discriminant_ok: p.discriminant() >= 0.0,
        nonresonant_strict: first_violation.is_none(),
        solvable,
        first_violation: first_violation.as_ref().map(ToString::to_string),
        first_violation_mode: first_violation,
        l: p.l_constant(domain),
        tail_threshold: threshold,
        modes_checked: modes.len(),
    }
}

/// `α = λ_k² − βλ_k` for each `β`: the pairs resonant at mode `k`.
pub fn resonance_curve(k: &Mode, domain: &Domain, beta_samples: &[f64]) -> Vec<(f64, f64)> {
    let lambda = domain.eigenvalue(k);
    beta_samples.iter().map(|&beta| (beta, lambda * lambda - beta * lambda)).collect()
}

/// One row of a resonance atlas; `k` counts distinct eigenvalues from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonancePoint {
    pub k: usize,
    pub beta: f64,
    pub alpha: f64,
}

/// Resonance curves for the first `k_max` distinct eigenvalues.
pub fn resonance_atlas(domain: &Domain, k_max: usize, beta_samples: &[f64]) -> Vec<ResonancePoint> {
    let mut lambdas: Vec<(Mode, f64)> = Vec::new();
    for m in domain.enumerate_modes(k_max.max(1)) {
        let lambda = domain.eigenvalue(&m);
        let repeated = lambdas.last().is_some_and(|(_, prev)| (lambda - prev).abs() <= 1e-12 * lambda);
        if !repeated {
            lambdas.push((m, lambda));
        }
    }
    lambdas.truncate(k_max);
    let mut rows = Vec::new();
    for (i, (mode, _)) in lambdas.iter().enumerate() {
        for (beta, alpha) in resonance_curve(mode, domain, beta_samples) {
            rows.push(ResonancePoint { k: i + 1, beta, alpha });
        }
    }
    rows
}

/// CSV with columns `k,beta,alpha`.
pub fn write_resonance_csv<W: Write>(w: W, rows: &[ResonancePoint]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(["k", "beta", "alpha"])?;
    for r in rows {
        writer.write_record([r.k.to_string(), r.beta.to_string(), r.alpha.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}
