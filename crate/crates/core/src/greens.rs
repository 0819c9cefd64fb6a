//! Truncated eigenfunction expansions of the Dirichlet Green's function of
//! `−Δ − μ`, and estimation of the kernel constants used by the cone argument.
//!
//! `G(x,τ) = Σ_{k_i ≤ K} φ_k(x) φ_k(τ) / (λ_k − μ)`, defined for `μ < λ₁`.

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{Domain, ModeIter, SubBox};
use crate::error::{Error, Result};
use crate::field::GridField;
use crate::quadrature;
use crate::tensor;

/// Default per-axis sizes of the constant estimation grid.
pub fn default_estimation_grid(dim: usize) -> usize {
    match dim {
        1 => 129,
        2 => 65,
        _ => 17,
    }
}

/// Default truncation of the kernels behind the constants. In dim ≥ 2 the
/// order equals the estimation grid, so the pair matrix is the Green's matrix
/// of the collocation operator; mismatched orders ring below zero near the
/// boundary and spoil `δ`.
pub fn default_constants_order(dim: usize) -> usize {
    match dim {
        1 => 1024,
        d => default_estimation_grid(d),
    }
}

/// Orders at which the diagonal growth of multi-dimensional kernels is tabulated.
pub const DIVERGENCE_ORDERS: [usize; 3] = [16, 32, 64];

#[derive(Debug, Clone)]
pub struct GreenKernel {
    domain: Domain,
    mu: f64,
    order: usize,
    /// `1/(λ_k − μ)` over the mode box, row-major.
    weights: Vec<f64>,
    diagonal: GridField,
}

/// Alias of [`GreenKernel::new`].
pub fn build_kernel(domain: &Domain, mu: f64, order: usize) -> Result<GreenKernel> {
    GreenKernel::new(domain, mu, order)
}

impl GreenKernel {
    /// Kernel with `order` modes per axis; the diagonal is cached on the default
    /// estimation grid.
    pub fn new(domain: &Domain, mu: f64, order: usize) -> Result<Self> {
        let n = default_estimation_grid(domain.dim());
        Self::with_cache_grid(domain, mu, order, &vec![n; domain.dim()])
    }

    pub fn with_cache_grid(domain: &Domain, mu: f64, order: usize, grid: &[usize]) -> Result<Self> {
        let lambda1 = domain.first_eigenvalue();
        if !(mu < lambda1) {
            return Err(Error::ShiftTooLarge { mu, lambda1 });
        }
        if order == 0 {
            return Err(Error::Truncation { order, resolution: 0 });
        }
        let orders = vec![order; domain.dim()];
        let weights = ModeIter::new(&orders).map(|m| 1.0 / (domain.eigenvalue(&m) - mu)).collect();
        let mut kernel =
            Self { domain: domain.clone(), mu, order, weights, diagonal: GridField::zeros(domain, grid)? };
        kernel.diagonal = kernel.diagonal_on(grid)?;
        Ok(kernel)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn orders(&self) -> Vec<usize> {
        vec![self.order; self.domain.dim()]
    }

    /// `G(x, τ)`. Symmetric in its arguments bit for bit.
    pub fn eval(&self, x: &[f64], tau: &[f64]) -> Result<f64> {
        for p in [x, tau] {
            if !self.domain.contains_closure(p) {
                return Err(Error::OutsideDomain { point: p.to_vec() });
            }
        }
        let mats: Vec<Vec<f64>> = (0..self.domain.dim())
            .map(|d| {
                let a = self.domain.lengths()[d];
                let px = tensor::sine_table_points(a, &x[d..=d], self.order);
                let pt = tensor::sine_table_points(a, &tau[d..=d], self.order);
                px.iter().zip(&pt).map(|(u, v)| u * v).collect()
            })
            .collect();
        Ok(self.contract(&mats, &vec![1; self.domain.dim()])[0])
    }

    /// `G(τ, τ)`.
    pub fn diagonal_at(&self, tau: &[f64]) -> Result<f64> {
        self.eval(tau, tau)
    }

    /// Cached diagonal on the grid chosen at construction.
    pub fn diagonal(&self) -> &GridField {
        &self.diagonal
    }

    /// Diagonal at the collocation nodes of `resolution`.
    pub fn diagonal_on(&self, resolution: &[usize]) -> Result<GridField> {
        let axes = self.domain.axis_nodes(resolution);
        let tables = self.tables(&axes);
        let values = self.diagonal_from_tables(&tables, resolution);
        GridField::new(self.domain.clone(), resolution.to_vec(), values)
    }

    fn contract(&self, mats: &[Vec<f64>], out_lens: &[usize]) -> Vec<f64> {
        let refs: Vec<&[f64]> = mats.iter().map(Vec::as_slice).collect();
        tensor::contract_all(&self.weights, &self.orders(), &refs, out_lens)
    }

    /// Per-axis `(K × n_d)` tables of `φ_k` at the given points.
    fn tables(&self, axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
        axes.iter()
            .zip(self.domain.lengths())
            .map(|(pts, &a)| tensor::sine_table_points(a, pts, self.order))
            .collect()
    }

    fn diagonal_from_tables(&self, tables: &[Vec<f64>], shape: &[usize]) -> Vec<f64> {
        let squared: Vec<Vec<f64>> = tables.iter().map(|t| t.iter().map(|v| v * v).collect()).collect();
        // Contract one point at a time so values coincide with `row` on the diagonal.
        let total: usize = shape.iter().product();
        (0..total)
            .into_par_iter()
            .map(|flat| {
                let idx = tensor::unravel(flat, shape);
                let mats: Vec<Vec<f64>> = (0..shape.len())
                    .map(|d| (0..self.order).map(|k| squared[d][k * shape[d] + idx[d]]).collect())
                    .collect();
                self.contract(&mats, &vec![1; shape.len()])[0]
            })
            .collect()
    }

    /// `G(x_i, ·)` over the tensor grid, where `x_i` is the node with multi-index
    /// `idx` of the same grid.
    fn row(&self, tables: &[Vec<f64>], shape: &[usize], idx: &[usize]) -> Vec<f64> {
        let mats: Vec<Vec<f64>> = (0..shape.len())
            .map(|d| {
                let n = shape[d];
                let t = &tables[d];
                let mut a = vec![0.0; self.order * n];
                for k in 0..self.order {
                    let f = t[k * n + idx[d]];
                    for j in 0..n {
                        a[k * n + j] = f * t[k * n + j];
                    }
                }
                a
            })
            .collect();
        self.contract(&mats, shape)
    }

    /// `Σ_τ G(x, τ) v(τ) w` over the collocation grid of `v`: the kernel applied
    /// to `v` by the uniform quadrature rule of the grid.
    pub fn apply_by_quadrature(&self, v: &GridField) -> Result<GridField> {
        if v.domain() != &self.domain {
            return Err(Error::Mismatch("kernel and field live on different domains".into()));
        }
        let shape = v.resolution().to_vec();
        let axes = v.axis_nodes();
        let tables = self.tables(&axes);
        let w = v.cell_volume();
        let total: usize = shape.iter().product();
        let values: Vec<f64> = (0..total)
            .into_par_iter()
            .map(|flat| {
                let idx = tensor::unravel(flat, &shape);
                let row = self.row(&tables, &shape, &idx);
                w * row.iter().zip(v.values()).map(|(g, h)| g * h).sum::<f64>()
            })
            .collect();
        GridField::new(self.domain.clone(), shape, values)
    }

    /// Rows `G(x_i, ·)` over the tensor grid of the given per-axis points, in
    /// row-major node order. Agrees with [`GreenKernel::eval`] to roundoff.
    pub fn pair_rows(&self, axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
        let tables = self.tables(axes);
        let total: usize = shape.iter().product();
        (0..total)
            .into_par_iter()
            .map(|flat| self.row(&tables, &shape, &tensor::unravel(flat, &shape)))
            .collect()
    }

    /// Sweeps every pair of grid points; `per_row` sees the row index, the row
    /// `G(x_i, ·)`, the diagonal over the grid and `ψ(x_i)²`.
    fn sweep<R: Send>(
        &self,
        axes: &[Vec<f64>],
        per_row: impl Fn(usize, &[f64], &[f64], f64) -> R + Sync,
    ) -> Vec<R> {
        let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
        let tables = self.tables(axes);
        let diag = self.diagonal_from_tables(&tables, &shape);
        let total: usize = shape.iter().product();
        (0..total)
            .into_par_iter()
            .map(|flat| {
                let idx = tensor::unravel(flat, &shape);
                let row = self.row(&tables, &shape, &idx);
                let psi = self.domain.ground_state(&point(axes, &idx));
                per_row(flat, &row, &diag, psi * psi)
            })
            .collect()
    }

    /// `max G(x,τ)/√G(τ,τ)` and `min G(x,τ)/(ψ(x)²√G(τ,τ))` over all pairs of
    /// the given per-axis points, with `ψ = φ₁`.
    pub fn bound_constants(&self, axes: &[Vec<f64>]) -> (f64, f64) {
        let rows = self.sweep(axes, |_, row, diag, psi_sq| {
            let mut c: f64 = f64::NEG_INFINITY;
            let mut delta: f64 = f64::INFINITY;
            for (g, d) in row.iter().zip(diag) {
                let s = d.sqrt();
                c = c.max(g / s);
                delta = delta.min(g / (psi_sq * s));
            }
            (c, delta)
        });
        rows.into_iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(c, d), (rc, rd)| (c.max(rc), d.min(rd)))
    }

    /// Checks the kernel bounds `δψ²(x)√G(τ,τ) ≤ G(x,τ) ≤ C√G(τ,τ)` with a
    /// relative slack; returns the number of violating pairs.
    pub fn count_bound_violations(&self, axes: &[Vec<f64>], c: f64, delta: f64, slack: f64) -> usize {
        self.sweep(axes, |_, row, diag, psi_sq| {
            row.iter()
                .zip(diag)
                .filter(|(&g, &d)| {
                    let s = d.sqrt();
                    g > (1.0 + slack) * c * s || g < (1.0 - slack) * delta * psi_sq * s
                })
                .count()
        })
        .into_iter()
        .sum()
    }

    /// `max |(λ₁−μ)∫G(x,y)ψ(y)dy − ψ(x)|` on a collocation grid.
    pub fn psi_representation_defect(&self, resolution: &[usize]) -> Result<f64> {
        let psi = GridField::from_fn(&self.domain, resolution, |x| self.domain.ground_state(x))?;
        let image = self.apply_by_quadrature(&psi)?;
        let factor = self.domain.first_eigenvalue() - self.mu;
        image.scaled(factor).max_abs_diff(&psi)
    }
}

fn point(axes: &[Vec<f64>], idx: &[usize]) -> Vec<f64> {
    idx.iter().zip(axes).map(|(&i, a)| a[i]).collect()
}

/// Exact Green's function of `−d²/dx² − μ` on `(0, 1)` with Dirichlet conditions.
pub fn closed_form_1d(mu: f64, x: f64, tau: f64) -> Result<f64> {
    let pi2 = std::f64::consts::PI.powi(2);
    if !(mu < pi2) {
        return Err(Error::ShiftTooLarge { mu, lambda1: pi2 });
    }
    for p in [x, tau] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutsideDomain { point: vec![p] });
        }
    }
    let lo = x.min(tau);
    let hi = x.max(tau);
    Ok(if mu < 0.0 {
        let m = (-mu).sqrt();
        (m * lo).sinh() * (m * (1.0 - hi)).sinh() / (m * m.sinh())
    } else if mu > 0.0 {
        let w = mu.sqrt();
        (w * lo).sin() * (w * (1.0 - hi)).sin() / (w * w.sin())
    } else {
        lo * (1.0 - hi)
    })
}

/// Closed form on `(0, a)` by rescaling: `G_a(x,τ;μ) = a·G_1(x/a, τ/a; μa²)`.
pub fn closed_form_interval(length: f64, mu: f64, x: f64, tau: f64) -> Result<f64> {
    Ok(length * closed_form_1d(mu * length * length, x / length, tau / length)?)
}

/// Growth of `max diag G` with the truncation order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceAnnotation {
    pub orders: Vec<usize>,
    pub max_diagonal: Vec<f64>,
    pub strictly_increasing: bool,
}

pub fn diagonal_divergence(
    domain: &Domain,
    mu: f64,
    grid: &[usize],
    orders: &[usize],
) -> Result<DivergenceAnnotation> {
    let max_diagonal = orders
        .iter()
        .map(|&k| {
            let kernel = GreenKernel::with_cache_grid(domain, mu, k, grid)?;
            Ok(kernel.diagonal().max_value())
        })
        .collect::<Result<Vec<f64>>>()?;
    let strictly_increasing = max_diagonal.windows(2).all(|w| w[1] > w[0]);
    Ok(DivergenceAnnotation { orders: orders.to_vec(), max_diagonal, strictly_increasing })
}

/// Kernel constants for one equation: `C` and `delta` per kernel, the rest shared.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsReport {
    #[serde(rename = "C")]
    pub c: [f64; 2],
    pub delta: [f64; 2],
    #[serde(rename = "M1")]
    pub m1_max_diag: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    pub m1: f64,
    pub m2: f64,
    pub sigma: f64,
    #[serde(rename = "K")]
    pub order: usize,
    pub mu: [f64; 2],
    pub grid: Vec<usize>,
    pub omega0: SubBox,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergence: Option<DivergenceAnnotation>,
}

impl ConstantsReport {
    /// `δ₁δ₂C₀/(C₁C₂|Ω|√M₁)`, the lower-bound factor for solutions with nonnegative forcing.
    pub fn positivity_factor(&self, domain: &Domain) -> f64 {
        self.delta[0] * self.delta[1] * self.c0
            / (self.c[0] * self.c[1] * domain.measure() * self.m1_max_diag.sqrt())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Gauss–Legendre points per axis for `C₀`.
const C0_POINTS: [usize; 3] = [128, 48, 16];

/// Estimates every kernel constant on the tensor grid of `grid` collocation
/// nodes per axis.
pub fn estimate_constants(
    k1: &GreenKernel,
    k2: &GreenKernel,
    omega0: &SubBox,
    grid: &[usize],
) -> Result<ConstantsReport> {
    let domain = k1.domain();
    if k2.domain() != domain {
        return Err(Error::Mismatch("kernels on different domains".into()));
    }
    if k1.order() != k2.order() {
        return Err(Error::Mismatch("kernels have different truncation orders".into()));
    }
    if !omega0.is_interior_to(domain) {
        return Err(Error::Mismatch("the sub-box must lie strictly inside the domain".into()));
    }
    let axes = domain.axis_nodes(grid);
    let (c1, d1) = k1.bound_constants(&axes);
    let (c2, d2) = k2.bound_constants(&axes);
    let m1_max = k1.diagonal_on(grid)?.max_value();

    let lo = vec![0.0; domain.dim()];
    let points = C0_POINTS[domain.dim() - 1];
    let mut failure = None;
    let c0 = quadrature::integrate_box(&lo, domain.lengths(), points, |x| {
        let psi = domain.ground_state(x);
        match k1.diagonal_at(x) {
            Ok(g) => g.max(0.0).sqrt() * psi * psi,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }

    let m1 = omega0.ground_state_sq_min(domain);
    let mut m2 = f64::INFINITY;
    let samples = omega0.sample_axes(&axes);
    let mut idx = vec![0usize; samples.len()];
    'outer: loop {
        let x = point(&samples, &idx);
        m2 = m2.min(k2.diagonal_at(&x)?);
        let mut axis = samples.len();
        loop {
            if axis == 0 {
                break 'outer;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < samples[axis].len() {
                break;
            }
            idx[axis] = 0;
        }
    }

    let sigma = d1 * d2 * m1 * c0 / (c1 * c2 * m1_max.sqrt() * domain.measure());
    for (name, value) in [
        ("C1", c1),
        ("C2", c2),
        ("delta1", d1),
        ("delta2", d2),
        ("M1", m1_max),
        ("C0", c0),
        ("m1", m1),
        ("m2", m2),
        ("sigma", sigma),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::ConstantDegenerate { name, value });
        }
    }

    let divergence = if domain.dim() >= 2 {
        Some(diagonal_divergence(domain, k1.mu(), grid, &DIVERGENCE_ORDERS)?)
    } else {
        None
    };

    Ok(ConstantsReport {
        c: [c1, c2],
        delta: [d1, d2],
        m1_max_diag: m1_max,
        c0,
        m1,
        m2,
        sigma,
        order: k1.order(),
        mu: [k1.mu(), k2.mu()],
        grid: grid.to_vec(),
        omega0: omega0.clone(),
        divergence,
    })
}

/// Verification grid strictly inside the hull of the estimation nodes, with
/// `2n − 1` points per axis.
pub fn refined_axes(domain: &Domain, grid: &[usize]) -> Vec<Vec<f64>> {
    domain
        .axis_nodes(grid)
        .into_iter()
        .map(|nodes| {
            let first = nodes[0];
            let last = nodes[nodes.len() - 1];
            let m = 2 * nodes.len() - 1;
            if m == 1 {
                return vec![first];
            }
            (0..m).map(|i| first + (last - first) * i as f64 / (m - 1) as f64).collect()
        })
        .collect()
}

/// Kernel properties on a pair grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma21Report {
    pub min_value: f64,
    pub symmetry_defect: f64,
    pub inf_ratio: f64,
    pub sup_ratio: f64,
    pub positive: bool,
    pub symmetric: bool,
    pub ratio_positive: bool,
}

impl Lemma21Report {
    pub fn passed(&self) -> bool {
        self.positive && self.symmetric && self.ratio_positive
    }
}

/// Minimum kernel value (tolerating `−1e−8`), symmetry defect (at most `1e−14`)
/// and the infimum of `G(x,τ)/(ψ²(x)√G(τ,τ))` over pairs of collocation nodes.
pub fn verify_lemma21(kernel: &GreenKernel, grid: &[usize]) -> Lemma21Report {
    let axes = kernel.domain().axis_nodes(grid);
    let shape: Vec<usize> = grid.to_vec();
    let total: usize = shape.iter().product();
    // Transposed entries are compared on a strided subset of rows and columns
    // so memory stays bounded on large grids.
    let stride = (total / 512).max(1);
    let rows = kernel.sweep(&axes, |flat, row, diag, psi_sq| {
        let mut min_v = f64::INFINITY;
        let mut c = f64::NEG_INFINITY;
        let mut delta = f64::INFINITY;
        for (g, d) in row.iter().zip(diag) {
            min_v = min_v.min(*g);
            let s = d.sqrt();
            c = c.max(g / s);
            delta = delta.min(g / (psi_sq * s));
        }
        let sampled: Vec<f64> =
            if flat % stride == 0 { row.iter().step_by(stride).copied().collect() } else { Vec::new() };
        (min_v, c, delta, sampled)
    });
    let mut defect: f64 = 0.0;
    for i in (0..total).step_by(stride) {
        for j in (0..total).step_by(stride) {
            defect = defect.max((rows[i].3[j / stride] - rows[j].3[i / stride]).abs());
        }
    }
    let probe = (total / 64).max(1);
    for i in (0..total).step_by(probe) {
        let x = point(&axes, &tensor::unravel(i, &shape));
        for j in (0..total).step_by(probe) {
            let t = point(&axes, &tensor::unravel(j, &shape));
            let a = kernel.eval(&x, &t).expect("grid nodes lie in the domain");
            let b = kernel.eval(&t, &x).expect("grid nodes lie in the domain");
            defect = defect.max((a - b).abs());
        }
    }
    let (min_value, sup_ratio, inf_ratio) =
        rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY), |(m, c, d), r| {
            (m.min(r.0), c.max(r.1), d.min(r.2))
        });
    Lemma21Report {
        min_value,
        symmetry_defect: defect,
        inf_ratio,
        sup_ratio,
        positive: min_value > -1e-8,
        symmetric: defect <= 1e-14,
        ratio_positive: inf_ratio > 0.0 && sup_ratio.is_finite(),
    }
}
