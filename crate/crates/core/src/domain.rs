//! Box domains and the analytic Dirichlet-Laplacian spectrum on them.
//!
//! On `Ω = (0,a_1) × … × (0,a_N)` the eigenpairs of `-Δ` with homogeneous
//! Dirichlet data separate:
//!
//! ```text
//! λ_k = π² Σ_i (k_i / a_i)²,     φ_k(x) = Π_i √(2/a_i) sin(k_i π x_i / a_i)
//! ```
//!
//! and `{φ_k}` is orthonormal in `L²(Ω)`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// An axis-aligned open box `(0,a_1) × … × (0,a_N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    lengths: Vec<f64>,
}

impl Domain {
    pub fn new(lengths: Vec<f64>) -> Result<Self> {
        if lengths.is_empty() || lengths.len() > MAX_DIM {
            return Err(Error::InvalidDomain(format!(
                "dimension must be 1..={MAX_DIM}, got {}",
                lengths.len()
            )));
        }
        if let Some(a) = lengths.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::InvalidDomain(format!("side lengths must be positive and finite, got {a}")));
        }
        Ok(Self { lengths })
    }

    /// The unit cube `(0,1)^dim`.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// `|Ω| = Π a_i`.
    pub fn measure(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// `λ_k = π² Σ (k_i/a_i)²`.
    ///
    /// Terms are summed in ascending order so that permuted indices on a
    /// cube give bitwise-identical eigenvalues.
    pub fn eigenvalue(&self, mode: &Mode) -> f64 {
        debug_assert_eq!(mode.dim(), self.dim());
        let mut terms: Vec<f64> = mode
            .index()
            .iter()
            .zip(&self.lengths)
            .map(|(&k, &a)| {
                let r = k as f64 / a;
                r * r
            })
            .collect();
        terms.sort_by(f64::total_cmp);
        PI * PI * terms.iter().sum::<f64>()
    }

    pub fn first_eigenvalue(&self) -> f64 {
        self.eigenvalue(&Mode::first(self.dim()))
    }

    /// Eigenvalue of the one-dimensional factor along `axis`: `(k π / a_axis)²`.
    pub fn axis_eigenvalue(&self, axis: usize, k: usize) -> f64 {
        let r = k as f64 * PI / self.lengths[axis];
        r * r
    }

    /// `φ_k(x)`, the L²-normalized product of sines.
    pub fn eigenfunction(&self, mode: &Mode, x: &[f64]) -> Result<f64> {
        self.check_closure(x)?;
        Ok(mode
            .index()
            .iter()
            .zip(x)
            .zip(&self.lengths)
            .map(|((&k, &xi), &a)| (2.0 / a).sqrt() * (k as f64 * PI * xi / a).sin())
            .product())
    }

    /// `ψ = φ_1`, the positive ground state shared by every shifted operator `-Δ - μ`.
    pub fn ground_state(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.lengths).map(|(&xi, &a)| (2.0 / a).sqrt() * (PI * xi / a).sin()).product()
    }

    pub fn contains_closure(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.lengths).all(|(&xi, &a)| (0.0..=a).contains(&xi))
    }

    fn check_closure(&self, x: &[f64]) -> Result<()> {
        if self.contains_closure(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain { point: x.to_vec() })
        }
    }

    /// All modes with every `k_i ≤ order`, sorted by ascending eigenvalue,
    /// ties broken lexicographically on the index.
    pub fn enumerate_modes(&self, order: usize) -> Vec<Mode> {
        let orders = vec![order; self.dim()];
        let mut modes: Vec<Mode> = ModeIter::new(&orders).collect();
        self.sort_modes(&mut modes);
        modes
    }

    /// All modes with `λ_k ≤ lambda_max`, in the same order as [`Self::enumerate_modes`].
    pub fn modes_below(&self, lambda_max: f64) -> Vec<Mode> {
        let dim = self.dim();
        let floor: Vec<f64> = (0..dim).map(|d| self.axis_eigenvalue(d, 1)).collect();
        let mut out = Vec::new();
        let mut index = vec![1usize; dim];
        self.collect_below(0, &floor, 0.0, lambda_max, &mut index, &mut out);
        self.sort_modes(&mut out);
        out
    }

    fn collect_below(
        &self,
        axis: usize,
        floor: &[f64],
        partial: f64,
        lambda_max: f64,
        index: &mut Vec<usize>,
        out: &mut Vec<Mode>,
    ) {
        if axis == self.dim() {
            let mode = Mode(index.clone());
            if self.eigenvalue(&mode) <= lambda_max {
                out.push(mode);
            }
            return;
        }
        let rest: f64 = floor[axis + 1..].iter().sum();
        let mut k = 1;
        loop {
            let term = self.axis_eigenvalue(axis, k);
            if partial + term + rest > lambda_max * (1.0 + 1e-12) {
                break;
            }
            index[axis] = k;
            self.collect_below(axis + 1, floor, partial + term, lambda_max, index, out);
            k += 1;
        }
        index[axis] = 1;
    }

    fn sort_modes(&self, modes: &mut [Mode]) {
        modes.sort_by(|a, b| self.eigenvalue(a).total_cmp(&self.eigenvalue(b)).then_with(|| a.cmp(b)));
    }

    /// Interior collocation nodes `a_i m / (n_i + 1)`, `m = 1..=n_i`, per axis.
    pub fn axis_nodes(&self, resolution: &[usize]) -> Vec<Vec<f64>> {
        resolution
            .iter()
            .zip(&self.lengths)
            .map(|(&n, &a)| (1..=n).map(|m| a * m as f64 / (n + 1) as f64).collect())
            .collect()
    }
}

/// Multi-index `k = (k_1, …, k_N)` with every `k_i ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mode(Vec<usize>);

impl Mode {
    pub fn new(index: Vec<usize>) -> Result<Self> {
        if index.is_empty() || index.contains(&0) {
            return Err(Error::Parse(format!("mode indices must be non-empty and >= 1, got {index:?}")));
        }
        Ok(Self(index))
    }

    /// The ground mode `(1, …, 1)`.
    pub fn first(dim: usize) -> Self {
        Self(vec![1; dim])
    }

    pub fn index(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// Row-major iteration over the tensor of modes `1..=orders[i]`.
pub(crate) struct ModeIter {
    orders: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl ModeIter {
    pub(crate) fn new(orders: &[usize]) -> Self {
        let next = if orders.iter().all(|&k| k >= 1) { Some(vec![1; orders.len()]) } else { None };
        Self { orders: orders.to_vec(), next }
    }
}

impl Iterator for ModeIter {
    type Item = Mode;

    fn next(&mut self) -> Option<Mode> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for axis in (0..succ.len()).rev() {
            if succ[axis] < self.orders[axis] {
                succ[axis] += 1;
                self.next = Some(succ);
                break;
            }
            succ[axis] = 1;
        }
        Some(Mode(current))
    }
}

/// Closed sub-box `Ω_0 = [lo_1,hi_1] × … ⊂ Ω` used for cone constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SubBox {
    /// Centered sub-box whose sides are the fraction `theta` of the domain's sides.
    pub fn centered(domain: &Domain, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidDomain(format!("sub-box fraction must lie in (0,1), got {theta}")));
        }
        let lo = domain.lengths().iter().map(|a| 0.5 * a * (1.0 - theta)).collect();
        let hi = domain.lengths().iter().map(|a| 0.5 * a * (1.0 + theta)).collect();
        Ok(Self { lo, hi })
    }

    /// Whether the sub-box sits strictly inside the open domain.
    pub fn is_interior_to(&self, domain: &Domain) -> bool {
        self.lo.len() == domain.dim()
            && self.hi.len() == domain.dim()
            && self
                .lo
                .iter()
                .zip(&self.hi)
                .zip(domain.lengths())
                .all(|((&lo, &hi), &a)| 0.0 < lo && lo <= hi && hi < a)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        const SLACK: f64 = 1e-12;
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&xi, (&lo, &hi))| xi >= lo - SLACK && xi <= hi + SLACK)
    }

    pub fn measure(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(lo, hi)| hi - lo).product()
    }

    /// Exact `min_{Ω_0} φ_1²`: along each axis `sin²` is minimized at the
    /// endpoint farther from the domain's midline.
    pub fn ground_state_sq_min(&self, domain: &Domain) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(domain.lengths())
            .map(|((&lo, &hi), &a)| {
                let s = (PI * lo / a).sin().min((PI * hi / a).sin());
                2.0 / a * s * s
            })
            .product()
    }

    /// Sample points of the closed sub-box: its faces plus the given axis
    /// nodes that fall inside, as a tensor grid.
    pub fn sample_axes(&self, axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
        axes.iter()
            .enumerate()
            .map(|(d, nodes)| {
                let (lo, hi) = (self.lo[d], self.hi[d]);
                let mut pts = vec![lo];
                pts.extend(nodes.iter().copied().filter(|&x| x > lo && x < hi));
                if hi > lo {
                    pts.push(hi);
                }
                pts
            })
            .collect()
    }
}
