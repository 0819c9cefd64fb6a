use navier4_core::greens::diagonal_divergence;
use navier4_core::{
    check_admissible, factor_params, fd_newton, newton_solve, picard_solve, radius_report, resonance_atlas,
    solve_spectral, system_constants, theorem_hypothesis_check, write_resonance_csv, AdmissibilityReport,
    ConeSpec, ConstantsReport, DivergenceAnnotation, Domain, FdNewtonOptions, GreenKernel, GridField,
    HypothesisVerdict, Lemma21Report, LinearProblem, NewtonOptions, ParamPair, PicardOptions, RadiusReport,
    SolveReport, StatePair, Strategy, SubBox, SystemParams, Theorem,
};
use serde::Serialize;

use crate::config::{ForcingSpec, Settings};
use crate::error::CliError;
use crate::output::Output;

/// Nodes per axis of the finite-difference cross-check after a 1D solve.
const FD_CHECK_GRID: usize = 256;

#[derive(Serialize)]
struct ParamsOutput {
    admissible: bool,
    equation1: AdmissibilityReport,
    equation2: AdmissibilityReport,
}

pub fn check_params(s: &Settings) -> Result<(), CliError> {
    let reports = s.params.map(|p| check_admissible(p, &s.domain, s.truncation));
    let out = ParamsOutput {
        admissible: reports.iter().all(AdmissibilityReport::admissible),
        equation1: reports[0].clone(),
        equation2: reports[1].clone(),
    };
    Output::create(&s.out)?.json("check_params.json", &out)?;
    println!("{}", serde_json::to_string_pretty(&out).expect("reports serialize"));
    for (j, r) in reports.iter().enumerate() {
        if !r.admissible() {
            return Err(CliError::Verdict(format!(
                "equation {} is not admissible{}",
                j + 1,
                r.first_violation
                    .as_ref()
                    .map(|m| format!(" (first violation at mode {m})"))
                    .unwrap_or_default()
            )));
        }
    }
    Ok(())
}

pub fn resonance_map(
    s: &Settings,
    k_max: usize,
    beta_min: Option<f64>,
    beta_max: Option<f64>,
    samples: usize,
) -> Result<(), CliError> {
    if k_max == 0 {
        return Err(CliError::Config("k-max must be at least 1".into()));
    }
    let l1 = s.domain.first_eigenvalue();
    let lo = beta_min.unwrap_or(-2.0 * l1);
    let hi = beta_max.unwrap_or(2.0 * l1);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(CliError::Config("beta range must be finite".into()));
    }
    let betas: Vec<f64> = if samples == 0 || lo > hi {
        Vec::new()
    } else if samples == 1 {
        vec![lo]
    } else {
        (0..samples).map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64).collect()
    };
    let rows = resonance_atlas(&s.domain, k_max, &betas);
    let mut csv = Vec::new();
    write_resonance_csv(&mut csv, &rows)?;
    Output::create(&s.out)?.write("resonance_map.csv", &csv)?;
    print!("{}", String::from_utf8_lossy(&csv));
    Ok(())
}

#[derive(Serialize)]
struct GreensOutput {
    mu: f64,
    lambda1: f64,
    #[serde(rename = "K")]
    order: usize,
    grid: Vec<usize>,
    max_diagonal: f64,
    lemma21: Lemma21Report,
    #[serde(skip_serializing_if = "Option::is_none")]
    divergence: Option<DivergenceAnnotation>,
}

/// Larger factor shift of equation 1, the kernel closest to resonance.
fn default_shift(s: &Settings) -> Result<f64, CliError> {
    Ok(factor_params(s.params[0])?.mu1)
}

pub fn greens(s: &Settings) -> Result<(), CliError> {
    let mu = match s.kernel_shift {
        Some(mu) => mu,
        None => default_shift(s)?,
    };
    let kernel = GreenKernel::with_cache_grid(&s.domain, mu, s.kernel_order, &s.estimation_grid)?;
    let lemma21 = navier4_core::verify_lemma21(&kernel, &s.estimation_grid);
    let divergence = if s.domain.dim() >= 2 {
        Some(diagonal_divergence(
            &s.domain,
            mu,
            &s.estimation_grid,
            &navier4_core::greens::DIVERGENCE_ORDERS,
        )?)
    } else {
        None
    };
    let report = GreensOutput {
        mu,
        lambda1: s.domain.first_eigenvalue(),
        order: s.kernel_order,
        grid: s.estimation_grid.clone(),
        max_diagonal: kernel.diagonal().max_value(),
        lemma21: lemma21.clone(),
        divergence,
    };
    let out = Output::create(&s.out)?;
    out.field("greens_diagonal.csv", kernel.diagonal())?;
    out.json("greens.json", &report)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
    if !lemma21.passed() {
        return Err(CliError::Verdict(format!(
            "kernel at mu = {mu} fails positivity or symmetry (min {:e}, defect {:e})",
            lemma21.min_value, lemma21.symmetry_defect
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct ConstantsOutput {
    sigma: f64,
    omega0: SubBox,
    equation1: ConstantsReport,
    equation2: ConstantsReport,
}

fn system(s: &Settings) -> Result<SystemParams, CliError> {
    Ok(SystemParams::new(&s.domain, s.params[0], s.params[1])?)
}

pub fn constants(s: &Settings) -> Result<(), CliError> {
    let sys = system(s)?;
    let (cone, [r1, r2]) = system_constants(&sys, &s.domain, &s.omega0, s.kernel_order, &s.estimation_grid)?;
    let out = ConstantsOutput { sigma: cone.sigma, omega0: cone.omega0, equation1: r1, equation2: r2 };
    Output::create(&s.out)?.json("constants.json", &out)?;
    println!("{}", serde_json::to_string_pretty(&out).expect("reports serialize"));
    Ok(())
}

pub(crate) fn forcing(s: &Settings) -> Result<GridField, CliError> {
    let field = match &s.forcing {
        ForcingSpec::Constant { value } => GridField::from_fn(&s.domain, &s.grid, |_| *value)?,
        ForcingSpec::Mode { mode, amplitude } => {
            let d = &s.domain;
            GridField::from_fn(d, &s.grid, |x| {
                amplitude
                    * mode
                        .iter()
                        .zip(x)
                        .enumerate()
                        .map(|(i, (&k, &xi))| (k as f64 * std::f64::consts::PI * xi / d.lengths()[i]).sin())
                        .product::<f64>()
            })?
        }
        ForcingSpec::File { path } => {
            let f = GridField::load(path)?;
            if f.domain() != &s.domain {
                return Err(CliError::Config(format!(
                    "forcing file {} is on a different domain",
                    path.display()
                )));
            }
            f
        }
    };
    Ok(field)
}

#[derive(Serialize)]
struct LinearOutput {
    params: [ParamPair; 2],
    resolution: Vec<usize>,
    truncation: usize,
    max: [f64; 2],
    min: [f64; 2],
    solution: [String; 2],
}

pub fn solve_linear(s: &Settings) -> Result<(), CliError> {
    let h = forcing(s)?;
    let order = s.truncation.min(h.resolution().iter().copied().min().unwrap_or(1));
    let u: Vec<GridField> = s
        .params
        .iter()
        .map(|&p| solve_spectral(&LinearProblem::new(p, h.clone()), order))
        .collect::<Result<_, _>>()?;
    let out = Output::create(&s.out)?;
    let names = ["linear_u1.csv".to_string(), "linear_u2.csv".to_string()];
    out.field(&names[0], &u[0])?;
    out.field(&names[1], &u[1])?;
    let report = LinearOutput {
        params: s.params,
        resolution: h.resolution().to_vec(),
        truncation: order,
        max: [u[0].max_value(), u[1].max_value()],
        min: [u[0].min_value(), u[1].min_value()],
        solution: names,
    };
    out.json("linear_report.json", &report)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
    Ok(())
}

#[derive(Serialize)]
struct FdCheck {
    grid: usize,
    converged: bool,
    center_spectral: [f64; 2],
    center_fd: [f64; 2],
    relative_difference: f64,
}

#[derive(Serialize)]
struct SolveOutput {
    params: [ParamPair; 2],
    nonlinearities: [String; 2],
    classification: Theorem,
    hypothesis: HypothesisVerdict,
    strategy: Strategy,
    init_scale: f64,
    report: SolveReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    cone: Option<ConeSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cone_note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<RadiusReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fd_check: Option<FdCheck>,
    solution: [String; 2],
}

pub fn solve(s: &Settings) -> Result<(), CliError> {
    let sys = system(s)?;
    let [f1, f2] = &s.nonlinearities;
    let hypothesis = theorem_hypothesis_check(f1, f2, &sys, &s.domain);
    let strategy = s.strategy.unwrap_or(match hypothesis.classification {
        Theorem::Thm42 => Strategy::Picard,
        Theorem::Thm41 | Theorem::Neither => Strategy::Newton,
    });
    log::info!("classification {:?}, strategy {strategy:?}", hypothesis.classification);

    let (cone, cone_note) =
        match system_constants(&sys, &s.domain, &s.omega0, s.kernel_order, &s.estimation_grid) {
            Ok((cone, _)) => (Some(cone), None),
            Err(e) => {
                log::warn!("no cone verdict: {e}");
                (None, Some(e.to_string()))
            }
        };

    let init_scale = s.init_scale.unwrap_or(10.0 / sys.l_min());
    let init = StatePair::ground_state(&s.domain, &s.grid, init_scale, init_scale)?;
    let report = match strategy {
        Strategy::Newton => newton_solve(
            &init,
            &sys,
            f1,
            f2,
            &NewtonOptions {
                tol: s.tol,
                max_iter: s.max_iter.unwrap_or(50),
                deflation: s.deflation,
                cone: cone.clone(),
            },
        )?,
        Strategy::Picard => picard_solve(
            &init,
            &sys,
            f1,
            f2,
            &PicardOptions {
                damping: s.damping,
                tol: s.tol,
                max_iter: s.max_iter.unwrap_or(500),
                order: Some(s.truncation),
                cone: cone.clone(),
            },
        )?,
    };

    let radius = cone.as_ref().map(|c| radius_report(f1, f2, &sys, &s.domain, c.sigma));
    let fd_check = if s.domain.dim() == 1 && report.converged {
        Some(fd_cross_check(&s.domain, &sys, s, &report.solution)?)
    } else {
        None
    };

    let out = Output::create(&s.out)?;
    let names = ["solution_u1.csv".to_string(), "solution_u2.csv".to_string()];
    out.field(&names[0], &report.solution.u1)?;
    out.field(&names[1], &report.solution.u2)?;
    let converged = report.converged;
    let residual = report.residual_inf;
    let iterations = report.iterations;
    let summary = SolveOutput {
        params: s.params,
        nonlinearities: [f1.describe(), f2.describe()],
        classification: hypothesis.classification,
        hypothesis,
        strategy,
        init_scale,
        report,
        cone,
        cone_note,
        radius,
        fd_check,
        solution: names,
    };
    out.json("solve_report.json", &summary)?;
    println!(
        "{:?} via {strategy:?}: converged {converged}, {iterations} iterations, residual {residual:e}, positive {}, cone {:?}",
        summary.classification, summary.report.positive, summary.report.cone_ok
    );
    if !converged {
        return Err(CliError::NotConverged(format!(
            "residual {residual:e} after {iterations} iterations (tol {:e})",
            s.tol
        )));
    }
    Ok(())
}

fn fd_cross_check(
    domain: &Domain,
    sys: &SystemParams,
    s: &Settings,
    sol: &StatePair,
) -> Result<FdCheck, CliError> {
    let n = FD_CHECK_GRID;
    let sample = |u: &GridField| GridField::from_fn(domain, &[n], |x| u.interpolate(x).unwrap_or(0.0));
    let init = StatePair::new(sample(&sol.u1)?, sample(&sol.u2)?)?;
    let [f1, f2] = &s.nonlinearities;
    let fd = fd_newton(
        domain,
        sys,
        f1,
        f2,
        &init,
        n,
        &FdNewtonOptions { deflation: s.deflation, ..FdNewtonOptions::default() },
    )?;
    let center_fd = fd_center(&fd.solution);
    let x = fd.solution.u1.node(center_fd.0);
    let center_spectral = [sol.u1.interpolate(&x)?, sol.u2.interpolate(&x)?];
    let center_fd = [center_fd.1, center_fd.2];
    let scale = center_fd[0].abs().max(center_fd[1].abs()).max(f64::MIN_POSITIVE);
    let relative_difference =
        (center_spectral[0] - center_fd[0]).abs().max((center_spectral[1] - center_fd[1]).abs()) / scale;
    log::info!("finite-difference cross-check on {n} nodes: relative difference {relative_difference:e}");
    Ok(FdCheck { grid: n, converged: fd.converged, center_spectral, center_fd, relative_difference })
}

/// Index and values of the node nearest the center.
fn fd_center(s: &StatePair) -> (usize, f64, f64) {
    let center: Vec<f64> = s.domain().lengths().iter().map(|a| 0.5 * a).collect();
    let i =
        s.u1.points()
            .enumerate()
            .min_by(|(_, (x, _)), (_, (y, _))| {
                let dx: f64 = x.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum();
                let dy: f64 = y.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum();
                dx.total_cmp(&dy)
            })
            .map(|(i, _)| i)
            .unwrap_or(0);
    (i, s.u1.values()[i], s.u2.values()[i])
}
