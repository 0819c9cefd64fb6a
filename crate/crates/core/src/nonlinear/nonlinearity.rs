use std::fmt;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::parse_f64;

type PointFn = dyn Fn(&[f64], f64, f64) -> f64 + Send + Sync;

/// Right-hand side `f(x, u₁, u₂)` of one equation.
///
/// Built-in families are nonnegative for `u₁, u₂ ≥ 0`. Negative arguments, which
/// Newton iterates can visit, are handled by clamping `u₁ + u₂` at zero where
/// the formula needs it.
#[derive(Clone)]
pub enum Nonlinearity {
    /// `coeff · (u₁ + u₂)^exponent`.
    Power { coeff: f64, exponent: f64 },
    /// `scale · u_component`, with `component` 1 or 2.
    LinearResonant { scale: f64, component: usize },
    /// `value`.
    Constant { value: f64 },
    /// `c (u₁ + u₂)/(1 + u₁ + u₂)`.
    Saturating { c: f64 },
    /// Bilinear interpolation of a table on a `(u₁, u₂)` grid.
    Tabulated(Table),
    /// Arbitrary closure; derivatives by central differences.
    Custom { name: String, f: Arc<PointFn> },
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl Nonlinearity {
    pub fn power(coeff: f64, exponent: f64) -> Self {
        Self::Power { coeff, exponent }
    }

    pub fn linear_resonant(scale: f64, component: usize) -> Self {
        Self::LinearResonant { scale, component }
    }

    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub fn saturating(c: f64) -> Self {
        Self::Saturating { c }
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(&[f64], f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::Custom { name: name.into(), f: Arc::new(f) }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Power { coeff, exponent } => format!("power(coeff={coeff}, exponent={exponent})"),
            Self::LinearResonant { scale, component } => {
                format!("linear_resonant(scale={scale}, component={component})")
            }
            Self::Constant { value } => format!("constant({value})"),
            Self::Saturating { c } => format!("saturating(c={c})"),
            Self::Tabulated(t) => format!("tabulated({}x{})", t.u1.len(), t.u2.len()),
            Self::Custom { name, .. } => format!("custom({name})"),
        }
    }

    pub fn eval(&self, x: &[f64], u1: f64, u2: f64) -> f64 {
        match self {
            Self::Power { coeff, exponent } => coeff * (u1 + u2).max(0.0).powf(*exponent),
            Self::LinearResonant { scale, component } => scale * if *component == 2 { u2 } else { u1 },
            Self::Constant { value } => *value,
            Self::Saturating { c } => {
                let s = (u1 + u2).max(0.0);
                c * s / (1.0 + s)
            }
            Self::Tabulated(t) => t.eval(u1, u2),
            Self::Custom { f, .. } => f(x, u1, u2),
        }
    }

    /// `(∂f/∂u₁, ∂f/∂u₂)`.
    pub fn partials(&self, x: &[f64], u1: f64, u2: f64) -> [f64; 2] {
        match self {
            Self::Power { coeff, exponent } => {
                let s = u1 + u2;
                let d = if s > 0.0 {
                    coeff * exponent * s.powf(exponent - 1.0)
                } else if *exponent == 1.0 {
                    *coeff
                } else {
                    0.0
                };
                [d, d]
            }
            Self::LinearResonant { scale, component } => {
                if *component == 2 {
                    [0.0, *scale]
                } else {
                    [*scale, 0.0]
                }
            }
            Self::Constant { .. } => [0.0, 0.0],
            Self::Saturating { c } => {
                let s = u1 + u2;
                let d = if s >= 0.0 { c / ((1.0 + s) * (1.0 + s)) } else { 0.0 };
                [d, d]
            }
            Self::Tabulated(_) | Self::Custom { .. } => {
                let h1 = 1e-6 * u1.abs().max(1.0);
                let h2 = 1e-6 * u2.abs().max(1.0);
                [
                    (self.eval(x, u1 + h1, u2) - self.eval(x, u1 - h1, u2)) / (2.0 * h1),
                    (self.eval(x, u1, u2 + h2) - self.eval(x, u1, u2 - h2)) / (2.0 * h2),
                ]
            }
        }
    }

    /// True when `f(x, 0, 0) = 0` at every given point, so `(0, 0)` solves the system.
    pub fn vanishes_at_zero<'a>(&self, points: impl IntoIterator<Item = &'a [f64]>) -> bool {
        points.into_iter().all(|x| self.eval(x, 0.0, 0.0) == 0.0)
    }
}

/// Values on the tensor grid `u1 × u2`, extended by the nearest edge value.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    u1: Vec<f64>,
    u2: Vec<f64>,
    /// Row-major, `u2` fastest.
    values: Vec<f64>,
}

impl Table {
    pub fn new(u1: Vec<f64>, u2: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let increasing = |v: &[f64]| !v.is_empty() && v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&u1) || !increasing(&u2) {
            return Err(Error::Parse("table axes must be nonempty and strictly increasing".into()));
        }
        if values.len() != u1.len() * u2.len() {
            return Err(Error::Parse(format!(
                "table needs {} values, got {}",
                u1.len() * u2.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::Parse(format!("table value {v} is negative")));
        }
        Ok(Self { u1, u2, values })
    }

    /// CSV with header `u1,u2,value`; rows may come in any order but must
    /// cover the full grid.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let headers = reader.headers()?.clone();
        let names: Vec<&str> = headers.iter().collect();
        if names != ["u1", "u2", "value"] {
            return Err(Error::Parse(format!("expected header u1,u2,value, got {names:?}")));
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            if record.len() != 3 {
                return Err(Error::Parse(format!("expected 3 columns, found {}", record.len())));
            }
            rows.push((parse_f64(&record[0])?, parse_f64(&record[1])?, parse_f64(&record[2])?));
        }
        let axis = |pick: fn(&(f64, f64, f64)) -> f64| {
            let mut v: Vec<f64> = rows.iter().map(pick).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let u1 = axis(|r| r.0);
        let u2 = axis(|r| r.1);
        if rows.len() != u1.len() * u2.len() {
            return Err(Error::Parse(format!(
                "{} rows do not form a full {}x{} grid",
                rows.len(),
                u1.len(),
                u2.len()
            )));
        }
        let mut values = vec![f64::NAN; u1.len() * u2.len()];
        for (a, b, v) in rows {
            let i = u1.partition_point(|&t| t < a);
            let j = u2.partition_point(|&t| t < b);
            let slot = &mut values[i * u2.len() + j];
            if !slot.is_nan() {
                return Err(Error::Parse(format!("duplicate table entry at ({a}, {b})")));
            }
            *slot = v;
        }
        Table::new(u1, u2, values)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn eval(&self, a: f64, b: f64) -> f64 {
        let (i, s) = locate(&self.u1, a);
        let (j, t) = locate(&self.u2, b);
        let n2 = self.u2.len();
        let at = |i: usize, j: usize| self.values[i * n2 + j];
        let i1 = (i + 1).min(self.u1.len() - 1);
        let j1 = (j + 1).min(n2 - 1);
        (1.0 - s) * ((1.0 - t) * at(i, j) + t * at(i, j1)) + s * ((1.0 - t) * at(i1, j) + t * at(i1, j1))
    }
}

/// Cell index and local coordinate in `[0, 1]`, clamped to the axis range.
fn locate(axis: &[f64], v: f64) -> (usize, f64) {
    if axis.len() == 1 || v <= axis[0] {
        return (0, 0.0);
    }
    let last = axis.len() - 1;
    if v >= axis[last] {
        return (last - 1, 1.0);
    }
    let i = axis.partition_point(|&t| t <= v) - 1;
    (i, (v - axis[i]) / (axis[i + 1] - axis[i]))
}
