//! Experiment files: one TOML document whose every key has a default.

use std::path::{Path, PathBuf};

use navier4_core::greens::{default_constants_order, default_estimation_grid};
use navier4_core::{Deflation, Domain, Nonlinearity, ParamPair, Strategy, SubBox, Table};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainSection,
    pub equation1: EquationSection,
    pub equation2: EquationSection,
    pub nonlinearity1: NonlinearitySpec,
    pub nonlinearity2: NonlinearitySpec,
    pub solver: SolverSection,
    pub forcing: ForcingSpec,
    pub kernel: KernelSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainSection {
    pub lengths: Vec<f64>,
    /// Side fraction θ of the centered sub-box Ω₀.
    pub omega0_frac: f64,
}

impl Default for DomainSection {
    fn default() -> Self {
        Self { lengths: vec![1.0], omega0_frac: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquationSection {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearitySpec {
    Power {
        #[serde(default = "one")]
        coeff: f64,
        #[serde(default = "two")]
        exponent: f64,
    },
    Saturating {
        c: f64,
    },
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    /// `scale · u_component`; defaults to `L_j u_j` for equation `j`.
    LinearResonant {
        scale: Option<f64>,
        component: Option<usize>,
    },
    Tabulated {
        path: PathBuf,
    },
}

impl Default for NonlinearitySpec {
    fn default() -> Self {
        Self::Power { coeff: 1.0, exponent: 2.0 }
    }
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    /// Picked from the hypothesis check when absent.
    pub strategy: Option<Strategy>,
    pub tol: f64,
    pub max_iter: Option<usize>,
    pub truncation: Option<usize>,
    pub grid: Option<usize>,
    pub damping: f64,
    /// Initial guess `c (φ₁, φ₁)`; `10 / min(L₁, L₂)` when absent.
    pub init_scale: Option<f64>,
    pub deflation: DeflationSetting,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            strategy: None,
            tol: 1e-8,
            max_iter: None,
            truncation: None,
            grid: None,
            damping: 0.5,
            init_scale: None,
            deflation: DeflationSetting::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeflationSetting {
    #[default]
    Auto,
    On,
    Off,
}

impl From<DeflationSetting> for Deflation {
    fn from(d: DeflationSetting) -> Self {
        match d {
            DeflationSetting::Auto => Deflation::Auto,
            DeflationSetting::On => Deflation::On,
            DeflationSetting::Off => Deflation::Off,
        }
    }
}

/// Right-hand side of `solve-linear`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingSpec {
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    Mode {
        mode: Vec<usize>,
        #[serde(default = "one")]
        amplitude: f64,
    },
    File {
        path: PathBuf,
    },
}

impl Default for ForcingSpec {
    fn default() -> Self {
        Self::Constant { value: 1.0 }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    /// Shift μ of the kernel reported by `greens`; the larger factor shift of
    /// equation 1 when absent.
    pub shift: Option<f64>,
    pub truncation: Option<usize>,
    pub estimation_grid: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("navier4-out") }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub truncation: Option<usize>,
    pub grid: Option<usize>,
    pub omega0_frac: Option<f64>,
    pub strategy: Option<Strategy>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    /// Reads `path` and resolves relative file references against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for spec in [&mut cfg.nonlinearity1, &mut cfg.nonlinearity2] {
            if let NonlinearitySpec::Tabulated { path } = spec {
                rebase(path);
            }
        }
        if let ForcingSpec::File { path } = &mut cfg.forcing {
            rebase(path);
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
        if o.truncation.is_some() {
            self.solver.truncation = o.truncation;
        }
        if o.grid.is_some() {
            self.solver.grid = o.grid;
        }
        if let Some(t) = o.omega0_frac {
            self.domain.omega0_frac = t;
        }
        if o.strategy.is_some() {
            self.solver.strategy = o.strategy;
        }
        if let Some(t) = o.tol {
            self.solver.tol = t;
        }
        if o.max_iter.is_some() {
            self.solver.max_iter = o.max_iter;
        }
    }

    /// Checks every invariant and builds the library objects.
    pub fn resolve(&self) -> Result<Settings, CliError> {
        let domain = Domain::new(self.domain.lengths.clone()).map_err(|e| CliError::Config(e.to_string()))?;
        let dim = domain.dim();
        let theta = self.domain.omega0_frac;
        if !(theta > 0.0 && theta < 1.0) {
            return Err(CliError::Config(format!("omega0_frac must lie in (0, 1), got {theta}")));
        }
        let omega0 = SubBox::centered(&domain, theta).map_err(|e| CliError::Config(e.to_string()))?;
        let s = &self.solver;
        if !(s.tol > 0.0) {
            return Err(CliError::Config(format!("tol must be positive, got {}", s.tol)));
        }
        if !(s.damping > 0.0 && s.damping <= 1.0) {
            return Err(CliError::Config(format!("damping must lie in (0, 1], got {}", s.damping)));
        }
        if s.max_iter == Some(0) {
            return Err(CliError::Config("max_iter must be at least 1".into()));
        }
        let grid = s.grid.unwrap_or(default_solver_grid(dim));
        let truncation = s.truncation.unwrap_or(default_truncation(dim));
        if grid == 0 || truncation == 0 {
            return Err(CliError::Config("grid and truncation must be positive".into()));
        }
        if truncation > grid {
            return Err(CliError::Config(format!(
                "truncation {truncation} exceeds the grid of {grid} nodes per axis"
            )));
        }
        let params = [
            ParamPair::new(self.equation1.alpha, self.equation1.beta),
            ParamPair::new(self.equation2.alpha, self.equation2.beta),
        ];
        for p in params {
            if !(p.alpha.is_finite() && p.beta.is_finite()) {
                return Err(CliError::Config("alpha and beta must be finite".into()));
            }
        }
        let f1 = build_nonlinearity(&self.nonlinearity1, 1, params[0], &domain)?;
        let f2 = build_nonlinearity(&self.nonlinearity2, 2, params[1], &domain)?;
        if let ForcingSpec::File { path } = &self.forcing {
            if !path.exists() {
                return Err(CliError::Config(format!("forcing file {} does not exist", path.display())));
            }
        }
        if let ForcingSpec::Mode { mode, .. } = &self.forcing {
            if mode.len() != dim || mode.contains(&0) {
                return Err(CliError::Config(format!("forcing mode {mode:?} needs {dim} positive indices")));
            }
        }
        let kernel_order = self.kernel.truncation.unwrap_or(default_constants_order(dim));
        let estimation = self.kernel.estimation_grid.unwrap_or(default_estimation_grid(dim));
        if kernel_order == 0 || estimation == 0 {
            return Err(CliError::Config("kernel truncation and estimation grid must be positive".into()));
        }
        Ok(Settings {
            domain,
            omega0,
            params,
            nonlinearities: [f1, f2],
            grid: vec![grid; dim],
            truncation,
            strategy: s.strategy,
            tol: s.tol,
            max_iter: s.max_iter,
            damping: s.damping,
            init_scale: s.init_scale,
            deflation: s.deflation.into(),
            forcing: self.forcing.clone(),
            kernel_shift: self.kernel.shift,
            kernel_order,
            estimation_grid: vec![estimation; dim],
            out: self.output.dir.clone(),
        })
    }
}

pub fn default_solver_grid(dim: usize) -> usize {
    match dim {
        1 => 127,
        2 => 63,
        _ => 31,
    }
}

pub fn default_truncation(dim: usize) -> usize {
    match dim {
        1 => 64,
        2 => 32,
        _ => 16,
    }
}

fn build_nonlinearity(
    spec: &NonlinearitySpec,
    j: usize,
    p: ParamPair,
    domain: &Domain,
) -> Result<Nonlinearity, CliError> {
    Ok(match spec {
        NonlinearitySpec::Power { coeff, exponent } => {
            if !(*coeff >= 0.0 && *exponent > 0.0) {
                return Err(CliError::Config(format!(
                    "power nonlinearity {j} needs coeff >= 0 and exponent > 0"
                )));
            }
            Nonlinearity::power(*coeff, *exponent)
        }
        NonlinearitySpec::Saturating { c } => {
            if !(*c >= 0.0) {
                return Err(CliError::Config(format!("saturating nonlinearity {j} needs c >= 0")));
            }
            Nonlinearity::saturating(*c)
        }
        NonlinearitySpec::Constant { value } => {
            if !(*value >= 0.0) {
                return Err(CliError::Config(format!("constant nonlinearity {j} must be nonnegative")));
            }
            Nonlinearity::constant(*value)
        }
        NonlinearitySpec::LinearResonant { scale, component } => {
            let component = component.unwrap_or(j);
            if component != 1 && component != 2 {
                return Err(CliError::Config(format!("component must be 1 or 2, got {component}")));
            }
            Nonlinearity::linear_resonant(scale.unwrap_or_else(|| p.l_constant(domain)), component)
        }
        NonlinearitySpec::Tabulated { path } => {
            if !path.exists() {
                return Err(CliError::Config(format!("table {} does not exist", path.display())));
            }
            Nonlinearity::Tabulated(Table::load(path).map_err(|e| CliError::Config(e.to_string()))?)
        }
    })
}

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct Settings {
    pub domain: Domain,
    pub omega0: SubBox,
    pub params: [ParamPair; 2],
    pub nonlinearities: [Nonlinearity; 2],
    pub grid: Vec<usize>,
    pub truncation: usize,
    pub strategy: Option<Strategy>,
    pub tol: f64,
    pub max_iter: Option<usize>,
    pub damping: f64,
    pub init_scale: Option<f64>,
    pub deflation: Deflation,
    pub forcing: ForcingSpec,
    pub kernel_shift: Option<f64>,
    pub kernel_order: usize,
    pub estimation_grid: Vec<usize>,
    pub out: PathBuf,
}

/// Shown under `--help`.
pub const CONFIG_HELP: &str = "\
Config file (TOML); every key is optional:
  [domain]        lengths = [1.0]              box side lengths, 1 to 3 axes
                  omega0_frac = 0.5            side fraction of the centered sub-box
  [equation1]     alpha = 0.0, beta = 0.0      Δ²u + βΔu − αu = f
  [equation2]     alpha = 0.0, beta = 0.0
  [nonlinearity1] kind = \"power\"               power (coeff = 1, exponent = 2),
                                               saturating (c), constant (value = 1),
                                               linear_resonant (scale = L_j, component = j),
                                               tabulated (path to u1,u2,value CSV)
  [nonlinearity2] kind = \"power\"
  [solver]        strategy                     picard | newton; chosen from the
                                               hypothesis check when absent
                  tol = 1e-8, damping = 0.5
                  max_iter                     50 (newton) / 500 (picard)
                  grid                         127 / 63 / 31 nodes per axis (1D/2D/3D)
                  truncation                   64 / 32 / 16 modes per axis
                  init_scale                   10 / min(L1, L2)
                  deflation = \"auto\"           auto | on | off
  [forcing]       kind = \"constant\"            constant (value = 1), mode (mode, amplitude = 1),
                                               file (path to a grid CSV)
  [kernel]        shift                        larger factor shift of equation 1
                  truncation                   1024 in 1D, otherwise the estimation grid
                  estimation_grid              129 / 65 / 17 nodes per axis
  [output]        dir = \"navier4-out\"

Exit codes: 0 ok, 1 failed verdict, 2 config error, 3 not converged.
Log level: NAVIER4_LOG (error, warn, info, debug, trace).";
