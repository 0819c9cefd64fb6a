use crate::domain::{Domain, SubBox};
use crate::error::Result;
use crate::greens::{build_kernel, estimate_constants, ConstantsReport};

use super::{ConeSpec, StatePair, SystemParams};

/// Slack allowed in the cone inequality.
const CONE_SLACK: f64 = 1e-8;

/// `min over Ω₀ nodes of (u₁ + u₂) − σ‖(u₁,u₂)‖`; `+∞` when no node lies in `Ω₀`.
pub fn cone_margin(s: &StatePair, sigma: f64, omega0: &SubBox) -> f64 {
    let bound = sigma * s.norm();
    s.u1.points()
        .zip(s.u2.values())
        .filter(|((x, _), _)| omega0.contains(x))
        .map(|((_, a), b)| a + b - bound)
        .fold(f64::INFINITY, f64::min)
}

/// `u₁ + u₂ ≥ σ‖(u₁,u₂)‖ − 1e−8` at every grid node of `Ω₀`.
pub fn verify_cone(s: &StatePair, sigma: f64, omega0: &SubBox) -> bool {
    cone_margin(s, sigma, omega0) >= -CONE_SLACK
}

/// Kernel constants of both equations and the cone with `σ = min{σ₁, σ₂}`.
pub fn system_constants(
    sys: &SystemParams,
    domain: &Domain,
    omega0: &SubBox,
    order: usize,
    grid: &[usize],
) -> Result<(ConeSpec, [ConstantsReport; 2])> {
    let report = |j: usize| -> Result<ConstantsReport> {
        let f = sys.factorization(j);
        let k1 = build_kernel(domain, f.mu1, order)?;
        let k2 = build_kernel(domain, f.mu2, order)?;
        estimate_constants(&k1, &k2, omega0, grid)
    };
    let reports = [report(1)?, report(2)?];
    let cone = ConeSpec { sigma: reports[0].sigma.min(reports[1].sigma), omega0: omega0.clone() };
    Ok((cone, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;

    #[test]
    fn zero_pair_is_in_every_cone() {
        let d = Domain::unit(1).unwrap();
        let omega0 = SubBox::centered(&d, 0.5).unwrap();
        let z = StatePair::zeros(&d, &[31]).unwrap();
        assert!(verify_cone(&z, 0.9, &omega0));
    }

    #[test]
    fn oversized_sigma_fails() {
        let d = Domain::unit(1).unwrap();
        let omega0 = SubBox::centered(&d, 0.5).unwrap();
        let s = StatePair::ground_state(&d, &[31], 1.0, 1.0).unwrap();
        // min over Ω₀ of 2φ₁ divided by 2‖φ₁‖.
        let edge = (0.25 * std::f64::consts::PI).sin();
        let top = s.u1.max_abs();
        let critical = 2f64.sqrt() * edge / top;
        assert!(verify_cone(&s, 0.99 * critical, &omega0));
        assert!(!verify_cone(&s, 1.1 * critical, &omega0));
    }
}
