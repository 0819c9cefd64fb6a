//! The linear problem `Δ²u + βΔu − αu = h` with Navier conditions, by spectral
//! division and by nested Green's-kernel quadrature.

use crate::domain::{Domain, ModeIter};
use crate::error::{Error, Result};
use crate::factorization::{factor_params, ParamPair};
use crate::field::{forward_transform_orders, inverse_transform, GridField};
use crate::greens::GreenKernel;

/// Relative size of `P(λ_k)` below which a mode counts as resonant.
pub const NEAR_RESONANCE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LinearProblem {
    pub domain: Domain,
    pub params: ParamPair,
    pub h: GridField,
}

impl LinearProblem {
    pub fn new(params: ParamPair, h: GridField) -> Self {
        Self { domain: h.domain().clone(), params, h }
    }
}

fn truncation_orders(h: &GridField, order: usize) -> Result<Vec<usize>> {
    h.resolution()
        .iter()
        .map(|&n| if order > n { Err(Error::Truncation { order, resolution: n }) } else { Ok(order) })
        .collect()
}

/// Divides each sine coefficient of `h` by `λ_k² − βλ_k − α`.
pub fn solve_spectral(p: &LinearProblem, order: usize) -> Result<GridField> {
    if p.h.domain() != &p.domain {
        return Err(Error::Mismatch("forcing lives on a different domain".into()));
    }
    let orders = truncation_orders(&p.h, order)?;
    let mut c = forward_transform_orders(&p.h, &orders)?;
    for (coef, mode) in c.coeffs_mut().iter_mut().zip(ModeIter::new(&orders)) {
        let lambda = p.domain.eigenvalue(&mode);
        let symbol = p.params.symbol(lambda);
        if symbol.abs() < NEAR_RESONANCE_RTOL * lambda * lambda {
            return Err(Error::NearResonance { mode, symbol });
        }
        *coef /= symbol;
    }
    inverse_transform(&c, p.h.resolution())
}

/// Solves `(−Δ − μ)u = h` with Dirichlet conditions.
pub fn solve_single_helmholtz(domain: &Domain, mu: f64, h: &GridField, order: usize) -> Result<GridField> {
    let lambda1 = domain.first_eigenvalue();
    if !(mu < lambda1) {
        return Err(Error::ShiftTooLarge { mu, lambda1 });
    }
    if h.domain() != domain {
        return Err(Error::Mismatch("forcing lives on a different domain".into()));
    }
    let orders = truncation_orders(h, order)?;
    let mut c = forward_transform_orders(h, &orders)?;
    for (coef, mode) in c.coeffs_mut().iter_mut().zip(ModeIter::new(&orders)) {
        *coef /= domain.eigenvalue(&mode) - mu;
    }
    inverse_transform(&c, h.resolution())
}

/// `u(x) = ∫∫ G₁(x,τ) G₂(τ,s) h(s) ds dτ` by the nodal quadrature rule of the
/// forcing grid, which must have resolution `grid`.
pub fn solve_green_quadrature(
    p: &LinearProblem,
    k1: &GreenKernel,
    k2: &GreenKernel,
    grid: &[usize],
) -> Result<GridField> {
    if k1.domain() != &p.domain || k2.domain() != &p.domain || p.h.domain() != &p.domain {
        return Err(Error::Mismatch("kernels, forcing and problem must share one domain".into()));
    }
    if p.h.resolution() != grid {
        return Err(Error::Mismatch(format!(
            "forcing has resolution {:?}, quadrature grid is {grid:?}",
            p.h.resolution()
        )));
    }
    let f = factor_params(p.params)?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
    let matches =
        (close(k1.mu(), f.mu1) && close(k2.mu(), f.mu2)) || (close(k1.mu(), f.mu2) && close(k2.mu(), f.mu1));
    if !matches {
        return Err(Error::Mismatch(format!(
            "kernel shifts ({}, {}) do not factor the operator (shifts {}, {})",
            k1.mu(),
            k2.mu(),
            f.mu1,
            f.mu2
        )));
    }
    let inner = k2.apply_by_quadrature(&p.h)?;
    k1.apply_by_quadrature(&inner)
}
