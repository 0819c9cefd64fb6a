//! The coupled system `Δ²u_j + β_jΔu_j − α_ju_j = f_j(x, u₁, u₂)`: the solution
//! map `T`, Picard and Newton iterations, cone checks and limit-ratio diagnostics.

mod cone;
mod limits;
mod newton;
mod nonlinearity;

pub use cone::{cone_margin, system_constants, verify_cone};
pub use limits::{
    estimate_limit_ratios, radius_report, theorem_hypothesis_check, HypothesisVerdict, LimitRatioReport,
    RadiusReport, Theorem, RADIUS_EPSILON,
};
pub use newton::{newton_solve, Deflation, NewtonOptions};
pub use nonlinearity::{Nonlinearity, Table};

use serde::Serialize;

use crate::domain::{Domain, SubBox};
use crate::error::{Error, Result};
use crate::factorization::{check_admissible, factor_params, Factorization, ParamPair};
use crate::field::GridField;
use crate::linear::{solve_spectral, LinearProblem};

/// Modes per axis used when checking admissibility of system parameters; the
/// check certifies the tail beyond this analytically.
const ADMISSIBILITY_ORDER: usize = 16;

/// Parameters of both equations together with `L_j = λ₁² − λ₁β_j − α_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemParams {
    pub p1: ParamPair,
    pub p2: ParamPair,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    #[serde(skip)]
    factors: [Factorization; 2],
}

impl SystemParams {
    /// Fails with [`Error::Inadmissible`] unless both pairs are admissible on `domain`.
    pub fn new(domain: &Domain, p1: ParamPair, p2: ParamPair) -> Result<Self> {
        for (j, p) in [(1, p1), (2, p2)] {
            let report = check_admissible(p, domain, ADMISSIBILITY_ORDER);
            if !report.admissible() {
                return Err(Error::Inadmissible(format!(
                    "equation {j} (alpha={}, beta={}): beta bound {}, discriminant {}, strict nonresonance {}{}",
                    p.alpha,
                    p.beta,
                    report.beta_bound_ok,
                    report.discriminant_ok,
                    report.nonresonant_strict,
                    report
                        .first_violation
                        .map(|m| format!(" (first violation at mode {m})"))
                        .unwrap_or_default()
                )));
            }
        }
        Ok(Self {
            p1,
            p2,
            l1: p1.l_constant(domain),
            l2: p2.l_constant(domain),
            factors: [factor_params(p1)?, factor_params(p2)?],
        })
    }

    /// Parameters of equation `j` (1 or 2).
    pub fn params(&self, j: usize) -> ParamPair {
        if j == 2 {
            self.p2
        } else {
            self.p1
        }
    }

    pub fn l(&self, j: usize) -> f64 {
        if j == 2 {
            self.l2
        } else {
            self.l1
        }
    }

    pub fn l_min(&self) -> f64 {
        self.l1.min(self.l2)
    }

    pub fn factorization(&self, j: usize) -> Factorization {
        self.factors[if j == 2 { 1 } else { 0 }]
    }
}

/// A pair of fields on a common grid, normed by `‖u₁‖∞ + ‖u₂‖∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePair {
    pub u1: GridField,
    pub u2: GridField,
}

impl StatePair {
    pub fn new(u1: GridField, u2: GridField) -> Result<Self> {
        if !u1.same_grid(&u2) {
            return Err(Error::Mismatch("state components live on different grids".into()));
        }
        Ok(Self { u1, u2 })
    }

    pub fn zeros(domain: &Domain, resolution: &[usize]) -> Result<Self> {
        let z = GridField::zeros(domain, resolution)?;
        Ok(Self { u1: z.clone(), u2: z })
    }

    /// `(c₁ψ, c₂ψ)` with `ψ = φ₁`.
    pub fn ground_state(domain: &Domain, resolution: &[usize], c1: f64, c2: f64) -> Result<Self> {
        let psi = GridField::from_fn(domain, resolution, |x| domain.ground_state(x))?;
        Ok(Self { u1: psi.scaled(c1), u2: psi.scaled(c2) })
    }

    pub fn domain(&self) -> &Domain {
        self.u1.domain()
    }

    pub fn resolution(&self) -> &[usize] {
        self.u1.resolution()
    }

    pub fn component(&self, j: usize) -> &GridField {
        if j == 2 {
            &self.u2
        } else {
            &self.u1
        }
    }

    pub fn norm(&self) -> f64 {
        self.u1.max_abs() + self.u2.max_abs()
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &StatePair) -> Result<f64> {
        Ok(self.u1.max_abs_diff(&other.u1)? + self.u2.max_abs_diff(&other.u2)?)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &StatePair, b: f64) -> Result<StatePair> {
        Ok(StatePair { u1: self.u1.combine(a, &other.u1, b)?, u2: self.u2.combine(a, &other.u2, b)? })
    }

    pub fn min_value(&self) -> f64 {
        self.u1.min_value().min(self.u2.min_value())
    }

    /// Every node value of both components is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.min_value() > 0.0
    }

    /// Values at the node nearest the domain center.
    pub fn center_values(&self) -> (f64, f64) {
        let center: Vec<f64> = self.domain().lengths().iter().map(|a| 0.5 * a).collect();
        let mut best = (f64::INFINITY, 0);
        for (i, (x, _)) in self.u1.points().enumerate() {
            let d: f64 = x.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum();
            if d < best.0 {
                best = (d, i);
            }
        }
        (self.u1.values()[best.1], self.u2.values()[best.1])
    }
}

/// Sub-box and cone constant for cone-membership verdicts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeSpec {
    pub sigma: f64,
    pub omega0: SubBox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Picard,
    Newton,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "picard" => Ok(Self::Picard),
            "newton" => Ok(Self::Newton),
            other => Err(Error::Parse(format!("unknown strategy {other:?}; use picard or newton"))),
        }
    }
}

/// Outcome of an iterative solve. Non-convergence is reported, not raised.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub solution: StatePair,
    pub iterations: usize,
    pub residual_inf: f64,
    pub residual_history: Vec<f64>,
    pub positive: bool,
    pub cone_ok: Option<bool>,
    pub sigma: Option<f64>,
    pub strategy: Strategy,
    pub converged: bool,
    pub tol: f64,
}

impl SolveReport {
    pub(crate) fn finish(
        solution: StatePair,
        iterations: usize,
        residual_history: Vec<f64>,
        strategy: Strategy,
        tol: f64,
        cone: Option<&ConeSpec>,
    ) -> Self {
        let residual_inf = residual_history.last().copied().unwrap_or(f64::INFINITY);
        let cone_ok = cone.map(|c| verify_cone(&solution, c.sigma, &c.omega0));
        Self {
            positive: solution.is_positive(),
            cone_ok,
            sigma: cone.map(|c| c.sigma),
            iterations,
            residual_inf,
            residual_history,
            strategy,
            converged: residual_inf <= tol,
            tol,
            solution,
        }
    }
}

/// Samples `f(x, u₁(x), u₂(x))` on the grid of `s`, rejecting negative values.
pub(crate) fn forcing(s: &StatePair, f: &Nonlinearity, check: bool) -> Result<GridField> {
    let values =
        s.u1.points()
            .zip(s.u2.values())
            .map(|((x, a), &b)| {
                let value = f.eval(&x, a, b);
                if check && !(value >= 0.0) {
                    Err(Error::NonlinearityContract { value, u1: a, u2: b })
                } else {
                    Ok(value)
                }
            })
            .collect::<Result<Vec<f64>>>()?;
    GridField::new(s.domain().clone(), s.resolution().to_vec(), values)
}

/// `T(s)_j`: the solution of equation `j` with forcing `f_j(·, u₁, u₂)`,
/// computed spectrally with `order` modes per axis.
pub fn apply_t(
    s: &StatePair,
    sys: &SystemParams,
    f1: &Nonlinearity,
    f2: &Nonlinearity,
    order: usize,
) -> Result<StatePair> {
    let h1 = forcing(s, f1, true)?;
    let h2 = forcing(s, f2, true)?;
    Ok(StatePair {
        u1: solve_spectral(&LinearProblem::new(sys.p1, h1), order)?,
        u2: solve_spectral(&LinearProblem::new(sys.p2, h2), order)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardOptions {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Modes per axis for `T`; the full grid resolution when `None`.
    pub order: Option<usize>,
    pub cone: Option<ConeSpec>,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self { damping: 0.5, tol: 1e-8, max_iter: 500, order: None, cone: None }
    }
}

/// Damped successive substitution `s ← (1−d)s + d·T(s)`; the iteration count is
/// the number of evaluations of `T`, and convergence means `‖s − T(s)‖ ≤ tol`.
pub fn picard_solve(
    init: &StatePair,
    sys: &SystemParams,
    f1: &Nonlinearity,
    f2: &Nonlinearity,
    opts: &PicardOptions,
) -> Result<SolveReport> {
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::Mismatch(format!("damping {} is outside (0, 1]", opts.damping)));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Mismatch(format!("tolerance {} must be positive", opts.tol)));
    }
    if init.min_value() < 0.0 {
        return Err(Error::Mismatch("initial state must be nonnegative".into()));
    }
    let order = opts.order.unwrap_or_else(|| init.resolution().iter().copied().min().unwrap_or(1));
    let mut s = init.clone();
    let mut history = Vec::new();
    for it in 1..=opts.max_iter {
        let t = apply_t(&s, sys, f1, f2, order)?;
        let res = s.distance(&t)?;
        history.push(res);
        log::debug!("picard iteration {it}: |s - T(s)| = {res:e}");
        if res <= opts.tol {
            return Ok(SolveReport::finish(s, it, history, Strategy::Picard, opts.tol, opts.cone.as_ref()));
        }
        if !res.is_finite() {
            break;
        }
        s = s.combine(1.0 - opts.damping, &t, opts.damping)?;
        // Roundoff in the transforms can leave values of order 1e-17 below zero.
        for u in [&mut s.u1, &mut s.u2] {
            for v in u.values_mut() {
                *v = v.max(0.0);
            }
        }
    }
    let iterations = history.len();
    Ok(SolveReport::finish(s, iterations, history, Strategy::Picard, opts.tol, opts.cone.as_ref()))
}
