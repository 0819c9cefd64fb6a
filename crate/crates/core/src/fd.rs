//! Second-order finite differences for the fourth-order operator with Navier
//! conditions: `M = A² − βA − αI` with `A` the Dirichlet matrix of `−Δ`.
//!
//! Grid nodes coincide with the collocation nodes `a·m/(n+1)`, so results are
//! directly comparable with the spectral solvers.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::banded::{Banded, BandedLu};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::factorization::ParamPair;
use crate::field::GridField;
use crate::nonlinear::{Deflation, Nonlinearity, SolveReport, StatePair, Strategy, SystemParams};

/// Pivot ratio below which the composite matrix counts as singular.
const PIVOT_RTOL: f64 = 1e-13;

/// Sparse rows of the Dirichlet `−Δ` on the tensor grid, row-major nodes.
fn laplacian_rows(domain: &Domain, n: &[usize]) -> Vec<Vec<(usize, f64)>> {
    let total: usize = n.iter().product();
    let strides: Vec<usize> = (0..n.len()).map(|d| n[d + 1..].iter().product()).collect();
    let inv_h2: Vec<f64> =
        domain.lengths().iter().zip(n).map(|(&a, &m)| ((m + 1) as f64 / a).powi(2)).collect();
    (0..total)
        .map(|i| {
            let mut row = vec![(i, inv_h2.iter().map(|w| 2.0 * w).sum())];
            for d in 0..n.len() {
                let pos = (i / strides[d]) % n[d];
                if pos > 0 {
                    row.push((i - strides[d], -inv_h2[d]));
                }
                if pos + 1 < n[d] {
                    row.push((i + strides[d], -inv_h2[d]));
                }
            }
            row.sort_by_key(|e| e.0);
            row
        })
        .collect()
}

/// Composite operator on one grid.
#[derive(Debug, Clone)]
pub struct FdOperator {
    domain: Domain,
    n: Vec<usize>,
    rows: Vec<Vec<(usize, f64)>>,
    bandwidth: usize,
}

impl FdOperator {
    pub fn new(domain: &Domain, p: ParamPair, n: &[usize]) -> Result<Self> {
        if n.len() != domain.dim() || n.contains(&0) {
            return Err(Error::Mismatch(format!(
                "grid {n:?} does not fit a {}-dimensional domain",
                domain.dim()
            )));
        }
        let a = laplacian_rows(domain, n);
        let total = a.len();
        let mut rows = Vec::with_capacity(total);
        let mut acc = std::collections::BTreeMap::new();
        for (i, ai) in a.iter().enumerate() {
            acc.clear();
            for &(k, aik) in ai {
                for &(j, akj) in &a[k] {
                    *acc.entry(j).or_insert(0.0) += aik * akj;
                }
                *acc.entry(k).or_insert(0.0) -= p.beta * aik;
            }
            *acc.entry(i).or_insert(0.0) -= p.alpha;
            rows.push(acc.iter().map(|(&j, &v)| (j, v)).collect::<Vec<_>>());
        }
        let bandwidth = 2 * n[1..].iter().product::<usize>();
        Ok(Self { domain: domain.clone(), n: n.to_vec(), rows, bandwidth })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn grid(&self) -> &[usize] {
        &self.n
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|row| row.iter().map(|&(j, v)| v * u[j]).sum()).collect()
    }

    fn banded(&self) -> Banded {
        let mut m = Banded::zeros(self.len(), self.bandwidth, self.bandwidth);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m.add(i, j, v);
            }
        }
        m
    }

    /// `M` is symmetric up to roundoff in the assembled entries.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.banded();
        let mut worst: f64 = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                worst = worst.max((v - m.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn factor(&self) -> FdFactor {
        let lu = self.banded().factor();
        let (min_pivot, max_pivot) = lu.pivot_range();
        FdFactor { lu, pivots: PivotStats { min_pivot, max_pivot } }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PivotStats {
    pub min_pivot: f64,
    pub max_pivot: f64,
}

impl PivotStats {
    pub fn ratio(&self) -> f64 {
        self.min_pivot / self.max_pivot
    }
}

#[derive(Debug, Clone)]
pub struct FdFactor {
    lu: BandedLu,
    pub pivots: PivotStats,
}

impl FdFactor {
    pub fn is_singular(&self) -> bool {
        !(self.pivots.min_pivot > PIVOT_RTOL * self.pivots.max_pivot)
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.lu.solve(b)
    }
}

/// Pivot magnitudes of the LU factorization of `M` on an `n`-per-axis grid.
pub fn fd_pivot_stats(domain: &Domain, p: ParamPair, n: usize) -> Result<PivotStats> {
    Ok(FdOperator::new(domain, p, &vec![n; domain.dim()])?.factor().pivots)
}

/// Solves `(A² − βA − αI)u = h` on the grid of `h`, which must have `n`
/// interior nodes per axis.
pub fn fd_solve(domain: &Domain, p: ParamPair, h: &GridField, n: usize) -> Result<GridField> {
    let grid = vec![n; domain.dim()];
    if h.domain() != domain || h.resolution() != grid.as_slice() {
        return Err(Error::Mismatch(format!(
            "forcing grid {:?} differs from the oracle grid {grid:?}",
            h.resolution()
        )));
    }
    let factor = FdOperator::new(domain, p, &grid)?.factor();
    if factor.is_singular() {
        return Err(Error::DiscreteResonance {
            min_pivot: factor.pivots.min_pivot,
            max_pivot: factor.pivots.max_pivot,
        });
    }
    GridField::new(domain.clone(), grid, factor.solve(h.values()))
}

/// The `count` smallest eigenvalues of the Dirichlet `−Δ` on `n` nodes per axis.
pub fn fd_eigenvalues(domain: &Domain, n: usize, count: usize) -> Result<Vec<f64>> {
    let total = n.checked_pow(domain.dim() as u32).unwrap_or(usize::MAX);
    if count > total {
        return Err(Error::Mismatch(format!("{count} eigenvalues requested from {total} nodes")));
    }
    let axes: Vec<Vec<f64>> = domain
        .lengths()
        .iter()
        .map(|&a| {
            let w = ((n + 1) as f64 / a).powi(2);
            let t = DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    2.0 * w
                } else if i.abs_diff(j) == 1 {
                    -w
                } else {
                    0.0
                }
            });
            let mut ev: Vec<f64> = SymmetricEigen::new(t).eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            ev.truncate(count.max(1));
            ev
        })
        .collect();
    let mut sums = vec![0.0];
    for ev in &axes {
        let mut next: Vec<f64> = sums.iter().flat_map(|s| ev.iter().map(move |e| s + e)).collect();
        next.sort_by(f64::total_cmp);
        next.truncate(count.max(1));
        sums = next;
    }
    sums.truncate(count);
    Ok(sums)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdNewtonOptions {
    /// Bound on `‖R‖∞ / (‖M‖∞ max(1, ‖u‖∞))`.
    pub tol: f64,
    pub max_iter: usize,
    pub deflation: Deflation,
}

impl Default for FdNewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-13, max_iter: 50, deflation: Deflation::Auto }
    }
}

/// Newton on the finite-difference system `M_j u_j = f_j(x, u₁, u₂)`.
///
/// Unknowns are interleaved node by node so the coupled Jacobian stays banded.
/// The reported residual is scaled by `‖M‖∞ max(1, ‖u‖∞)`, since the entries of
/// `M` grow like `h⁻⁴` and an absolute residual stalls at roundoff.
pub fn fd_newton(
    domain: &Domain,
    sys: &SystemParams,
    f1: &Nonlinearity,
    f2: &Nonlinearity,
    init: &StatePair,
    n: usize,
    opts: &FdNewtonOptions,
) -> Result<SolveReport> {
    let grid = vec![n; domain.dim()];
    if init.domain() != domain || init.resolution() != grid.as_slice() {
        return Err(Error::Mismatch("initial state is not on the oracle grid".into()));
    }
    let ops = [FdOperator::new(domain, sys.p1, &grid)?, FdOperator::new(domain, sys.p2, &grid)?];
    let scale = ops[0].banded().norm_inf().max(ops[1].banded().norm_inf());
    let nodes = ops[0].len();
    let points: Vec<Vec<f64>> = init.u1.points().map(|(x, _)| x).collect();
    let deflate = match opts.deflation {
        Deflation::On => true,
        Deflation::Off => false,
        Deflation::Auto => {
            f1.vanishes_at_zero(points.iter().map(Vec::as_slice))
                && f2.vanishes_at_zero(points.iter().map(Vec::as_slice))
        }
    };
    let mut u = [init.u1.values().to_vec(), init.u2.values().to_vec()];
    let mut history = Vec::new();
    let mut steps = 0;
    let bw = 2 * ops[0].bandwidth + 1;
    loop {
        let mu = [ops[0].apply(&u[0]), ops[1].apply(&u[1])];
        let mut r = vec![0.0; 2 * nodes];
        for (i, x) in points.iter().enumerate() {
            r[2 * i] = mu[0][i] - f1.eval(x, u[0][i], u[1][i]);
            r[2 * i + 1] = mu[1][i] - f2.eval(x, u[0][i], u[1][i]);
        }
        let size = u[0].iter().chain(&u[1]).fold(1.0f64, |m, v| m.max(v.abs()));
        let res = r.iter().fold(0.0f64, |m, v| m.max(v.abs())) / (scale * size);
        history.push(res);
        log::debug!("fd newton iteration {steps}: scaled |R| = {res:e}");
        if !res.is_finite() {
            return Err(Error::SingularJacobian { iteration: steps });
        }
        if res <= opts.tol || steps >= opts.max_iter {
            let solution = StatePair::new(
                GridField::new(domain.clone(), grid.clone(), u[0].clone())?,
                GridField::new(domain.clone(), grid.clone(), u[1].clone())?,
            )?;
            return Ok(SolveReport::finish(solution, steps, history, Strategy::Newton, opts.tol, None));
        }

        let mut jac = Banded::zeros(2 * nodes, bw, bw);
        for (j, op) in ops.iter().enumerate() {
            for (i, row) in op.rows.iter().enumerate() {
                for &(k, v) in row {
                    jac.add(2 * i + j, 2 * k + j, v);
                }
            }
        }
        for (i, x) in points.iter().enumerate() {
            let a = f1.partials(x, u[0][i], u[1][i]);
            let b = f2.partials(x, u[0][i], u[1][i]);
            jac.add(2 * i, 2 * i, -a[0]);
            jac.add(2 * i, 2 * i + 1, -a[1]);
            jac.add(2 * i + 1, 2 * i, -b[0]);
            jac.add(2 * i + 1, 2 * i + 1, -b[1]);
        }
        let lu = jac.factor();
        let (lo, hi) = lu.pivot_range();
        if !(lo > PIVOT_RTOL * hi) {
            return Err(Error::SingularJacobian { iteration: steps });
        }
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let mut delta = lu.solve(&neg);
        if deflate {
            let uu: f64 = u[0].iter().chain(&u[1]).map(|v| v * v).sum();
            if uu > 0.0 {
                let ud: f64 = (0..nodes).map(|i| u[0][i] * delta[2 * i] + u[1][i] * delta[2 * i + 1]).sum();
                let denom = 1.0 + 2.0 * ud / uu;
                if denom.abs() > 1e-12 {
                    for v in delta.iter_mut() {
                        *v /= denom;
                    }
                }
            }
        }
        for i in 0..nodes {
            u[0][i] += delta[2 * i];
            u[1][i] += delta[2 * i + 1];
        }
        steps += 1;
    }
}
