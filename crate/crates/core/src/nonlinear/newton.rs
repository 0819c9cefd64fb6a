use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::field::SineTransform;
use crate::krylov::gmres;
use crate::linear::NEAR_RESONANCE_RTOL;

use super::{ConeSpec, Nonlinearity, SolveReport, StatePair, Strategy, SystemParams};

/// Largest coupled system solved with a dense LU; beyond this GMRES is used.
const DENSE_LIMIT: usize = 1024;
/// Pivot ratio below which the Newton matrix counts as singular.
const PIVOT_RTOL: f64 = 1e-13;

/// Whether Newton steps are deflated away from the trivial solution `(0, 0)`.
///
/// Deflation multiplies the residual by `1/‖c‖²` (coefficient norm); the
/// deflated step is the plain step scaled by `1/(1 + 2 c·δ/‖c‖²)`. Without it,
/// from moderate initial guesses the iteration is drawn to `(0, 0)` for
/// superlinear right-hand sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Deflation {
    /// Deflate when `f₁(x,0,0) = f₂(x,0,0) = 0` on the grid.
    #[default]
    Auto,
    On,
    Off,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub deflation: Deflation,
    pub cone: Option<ConeSpec>,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 50, deflation: Deflation::Auto, cone: None }
    }
}

/// Newton's method for the collocated residual with one sine mode per grid node.
///
/// Unknowns are the sine coefficients `c_j` of both components. The residual is
/// `R_j = P_j ⊙ c_j − S f_j(x, u₁, u₂)` with `S` the forward transform, and each
/// step solves `(I − P⁻¹Ĵ) δ = −P⁻¹R`. Convergence is judged on the nodal
/// residual `‖S⁻¹R‖∞`, which equals the strong-form residual at the nodes.
pub fn newton_solve(
    init: &StatePair,
    sys: &SystemParams,
    f1: &Nonlinearity,
    f2: &Nonlinearity,
    opts: &NewtonOptions,
) -> Result<SolveReport> {
    newton_solve_with(init, sys, f1, f2, opts, DENSE_LIMIT)
}

fn newton_solve_with(
    init: &StatePair,
    sys: &SystemParams,
    f1: &Nonlinearity,
    f2: &Nonlinearity,
    opts: &NewtonOptions,
    dense_limit: usize,
) -> Result<SolveReport> {
    if !(opts.tol > 0.0) {
        return Err(Error::Mismatch(format!("tolerance {} must be positive", opts.tol)));
    }
    let domain = init.domain().clone();
    let res = init.resolution().to_vec();
    let transform = SineTransform::new(&domain, &res, &res)?;
    let n = transform.modes();
    let lambdas = transform.eigenvalues();
    let mut symbols = Vec::with_capacity(2 * n);
    for j in 1..=2 {
        let p = sys.params(j);
        for (&lambda, mode) in lambdas.iter().zip(crate::domain::ModeIter::new(transform.orders())) {
            let s = p.symbol(lambda);
            if s.abs() < NEAR_RESONANCE_RTOL * lambda * lambda {
                return Err(Error::NearResonance { mode, symbol: s });
            }
            symbols.push(s);
        }
    }

    let points: Vec<Vec<f64>> = init.u1.points().map(|(x, _)| x).collect();
    let deflate = match opts.deflation {
        Deflation::On => true,
        Deflation::Off => false,
        Deflation::Auto => {
            f1.vanishes_at_zero(points.iter().map(Vec::as_slice))
                && f2.vanishes_at_zero(points.iter().map(Vec::as_slice))
        }
    };

    let mut c = transform.forward(init.u1.values());
    c.extend(transform.forward(init.u2.values()));
    let mut history = Vec::new();
    let mut steps = 0;

    loop {
        let u1 = transform.inverse(&c[..n]);
        let u2 = transform.inverse(&c[n..]);
        let mut fv = [vec![0.0; n], vec![0.0; n]];
        for (i, x) in points.iter().enumerate() {
            fv[0][i] = f1.eval(x, u1[i], u2[i]);
            fv[1][i] = f2.eval(x, u1[i], u2[i]);
        }
        let mut r = Vec::with_capacity(2 * n);
        for (j, f) in fv.iter().enumerate() {
            let sf = transform.forward(f);
            for k in 0..n {
                r.push(symbols[j * n + k] * c[j * n + k] - sf[k]);
            }
        }
        let nodal = transform
            .inverse(&r[..n])
            .into_iter()
            .chain(transform.inverse(&r[n..]))
            .fold(0.0f64, |m, v| m.max(v.abs()));
        history.push(nodal);
        log::debug!("newton iteration {steps}: |R| = {nodal:e}");
        if !nodal.is_finite() {
            return Err(Error::SingularJacobian { iteration: steps });
        }
        if nodal <= opts.tol || steps >= opts.max_iter {
            let solution = StatePair::new(transform.grid(u1), transform.grid(u2))?;
            return Ok(SolveReport::finish(
                solution,
                steps,
                history,
                Strategy::Newton,
                opts.tol,
                opts.cone.as_ref(),
            ));
        }

        // Partial derivatives ∂f_j/∂u_i at the nodes.
        let mut d = [[vec![0.0; n], vec![0.0; n]], [vec![0.0; n], vec![0.0; n]]];
        for (i, x) in points.iter().enumerate() {
            let a = f1.partials(x, u1[i], u2[i]);
            let b = f2.partials(x, u1[i], u2[i]);
            d[0][0][i] = a[0];
            d[0][1][i] = a[1];
            d[1][0][i] = b[0];
            d[1][1][i] = b[1];
        }
        let apply = |v: &[f64]| -> Vec<f64> {
            let w = [transform.inverse(&v[..n]), transform.inverse(&v[n..])];
            let mut out = v.to_vec();
            for j in 0..2 {
                let g: Vec<f64> = (0..n).map(|i| d[j][0][i] * w[0][i] + d[j][1][i] * w[1][i]).collect();
                let sg = transform.forward(&g);
                for k in 0..n {
                    out[j * n + k] -= sg[k] / symbols[j * n + k];
                }
            }
            out
        };
        let rhs: Vec<f64> = r.iter().zip(&symbols).map(|(ri, s)| -ri / s).collect();

        let mut delta = if 2 * n <= dense_limit {
            let mut a = DMatrix::<f64>::zeros(2 * n, 2 * n);
            let mut e = vec![0.0; 2 * n];
            for col in 0..2 * n {
                e[col] = 1.0;
                let column = apply(&e);
                e[col] = 0.0;
                for (row, v) in column.into_iter().enumerate() {
                    a[(row, col)] = v;
                }
            }
            let lu = a.lu();
            let u = lu.u();
            let (lo, hi) = u
                .diagonal()
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v.abs()), hi.max(v.abs())));
            if !(lo > PIVOT_RTOL * hi) {
                return Err(Error::SingularJacobian { iteration: steps });
            }
            let b = nalgebra::DVector::from_vec(rhs);
            lu.solve(&b).ok_or(Error::SingularJacobian { iteration: steps })?.as_slice().to_vec()
        } else {
            let out = gmres(apply, &rhs, 1e-12, 60, 40);
            if !out.converged {
                return Err(Error::SingularJacobian { iteration: steps });
            }
            out.x
        };

        if deflate {
            let cc: f64 = c.iter().map(|v| v * v).sum();
            if cc > 0.0 {
                let cd: f64 = c.iter().zip(&delta).map(|(a, b)| a * b).sum();
                let denom = 1.0 + 2.0 * cd / cc;
                if denom.abs() > 1e-12 {
                    for v in delta.iter_mut() {
                        *v /= denom;
                    }
                }
            }
        }
        for (ci, di) in c.iter_mut().zip(&delta) {
            *ci += di;
        }
        steps += 1;
    }
}
