//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use navier4_core::greens::refined_axes;
use navier4_core::{
    apply_t, build_kernel, check_admissible, closed_form_1d, default_constants_order, estimate_constants,
    estimate_limit_ratios, factor_params, fd_newton, fd_pivot_stats, fd_solve, newton_solve, picard_solve,
    resonance_curve, solve_green_quadrature, solve_spectral, system_constants, theorem_hypothesis_check,
    verify_cone, verify_lemma21, Domain, FdNewtonOptions, GridField, LinearProblem, Mode, NewtonOptions,
    Nonlinearity, ParamPair, PicardOptions, StatePair, SubBox, SystemParams, Theorem,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { failures: Vec::new(), notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }
}

fn criterion(n: usize, name: &str, limit: Option<Duration>, body: impl FnOnce(&mut Outcome)) -> bool {
    let start = Instant::now();
    let mut out = Outcome::new();
    body(&mut out);
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        out.check(elapsed < limit, format!("runtime {:.1}s < {}s", elapsed.as_secs_f64(), limit.as_secs()));
    }
    let ok = out.failures.is_empty();
    let detail = if ok { out.notes.join("; ") } else { out.failures.join("; ") };
    println!(
        "criterion {n:>2}: {} {name} ({:.2}s) {detail}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    ok
}

/// Green's function of `−y'' − μy` on `[0, 1]` from the two one-sided solutions.
fn elementary_green(mu: f64, x: f64, t: f64) -> f64 {
    let (lo, hi) = if x <= t { (x, t) } else { (t, x) };
    if mu > 0.0 {
        let w = mu.sqrt();
        (w * lo).sin() * (w * (1.0 - hi)).sin() / (w * w.sin())
    } else if mu < 0.0 {
        let w = (-mu).sqrt();
        (w * lo).sinh() * (w * (1.0 - hi)).sinh() / (w * w.sinh())
    } else {
        lo * (1.0 - hi)
    }
}

fn admissible_pair(d: &Domain, rng: &mut StdRng) -> ParamPair {
    let l1 = d.first_eigenvalue();
    let a = rng.random_range(-5.0 * l1..0.9 * l1);
    let b = rng.random_range(-5.0 * l1..0.9 * l1);
    ParamPair::new(-a * b, a + b)
}

fn positive_forcing(d: &Domain, res: &[usize], rng: &mut StdRng) -> GridField {
    let base: f64 = rng.random_range(0.1..1.0);
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| (rng.random_range(0.1..0.9), rng.random_range(0.0..5.0), rng.random_range(0.05..0.3)))
        .collect();
    GridField::from_fn(d, res, |x| {
        base + bumps.iter().map(|(c, h, w)| h * (-((x[0] - c) / w).powi(2)).exp()).sum::<f64>()
    })
    .unwrap()
}

fn rel_diff(a: &GridField, b: &GridField) -> f64 {
    a.max_abs_diff(b).unwrap() / b.max_abs()
}

fn kernel_oracle(out: &mut Outcome) {
    let d = Domain::unit(1).unwrap();
    let k = 10_000;
    let nodes = d.axis_nodes(&[129]).remove(0);
    let tail = 2.0 / (PI * PI * k as f64);
    for mu in [-5.0, 0.0, 0.5 * PI * PI] {
        let rows = build_kernel(&d, mu, k).unwrap().pair_rows(std::slice::from_ref(&nodes));
        let (mut worst, mut formula): (f64, f64) = (0.0, 0.0);
        for (&x, row) in nodes.iter().zip(&rows) {
            for (&t, g) in nodes.iter().zip(row) {
                if (x - t).abs() < 0.1 {
                    continue;
                }
                let exact = closed_form_1d(mu, x, t).unwrap();
                formula = formula.max((exact - elementary_green(mu, x, t)).abs());
                worst = worst.max((g - exact).abs());
            }
        }
        out.check(
            worst <= 1e-4 && worst <= tail + 1e-10,
            format!("μ={mu:.3}: err {worst:.2e} (tail bound {tail:.1e})"),
        );
        out.check(formula <= 1e-12, format!("μ={mu:.3}: closed form vs elementary {formula:.1e}"));
    }
}

fn kernel_properties(out: &mut Outcome) {
    let d = Domain::unit(1).unwrap();
    let l1 = d.first_eigenvalue();
    let grid = [129];
    for frac in [-3.0, -0.5, 0.0, 0.5, 0.9] {
        let mu = frac * l1;
        let g = build_kernel(&d, mu, default_constants_order(1)).unwrap();
        let r = verify_lemma21(&g, &grid);
        let (c, delta) = g.bound_constants(&d.axis_nodes(&grid));
        let fine = g.count_bound_violations(&refined_axes(&d, &grid), c, delta, 0.05);
        out.check(
            r.symmetry_defect <= 1e-14 && r.min_value > -1e-8 && delta > 0.0 && c.is_finite() && fine == 0,
            format!(
                "μ={frac}λ₁: sym {:.0e} min {:.2e} δ {delta:.3e} C {c:.3} refined violations {fine}",
                r.symmetry_defect, r.min_value
            ),
        );
    }
}

fn factorization(out: &mut Outcome) {
    let d = Domain::unit(1).unwrap();
    let l1 = d.first_eigenvalue();
    let mut rng = StdRng::seed_from_u64(42);
    let (mut vieta, mut symbol, mut drawn) = (0.0f64, 0.0f64, 0);
    while drawn < 10_000 {
        let a: f64 = rng.random_range(-50.0 * l1..0.999 * l1);
        let b: f64 = rng.random_range(-50.0 * l1..0.999 * l1);
        let p = ParamPair::new(-a * b, a + b);
        if !check_admissible(p, &d, 16).admissible() {
            continue;
        }
        drawn += 1;
        let f = factor_params(p).unwrap();
        let s = f.mu1.abs() + f.mu2.abs();
        vieta = vieta.max((f.mu1 + f.mu2 - p.beta).abs() / s).max((f.mu1 * f.mu2 + p.alpha).abs() / (s * s));
        for k in 1..=64 {
            let l = (k as f64 * PI).powi(2);
            let poly = l * l - p.beta * l - p.alpha;
            symbol = symbol.max(((l - f.mu1) * (l - f.mu2) - poly).abs() / poly.abs());
        }
    }
    out.check(vieta <= 1e-12, format!("Vieta {vieta:.1e}"));
    out.check(symbol <= 1e-10, format!("symbol {symbol:.1e}"));
    let mut counter = 0;
    let mut admissible = 0;
    for _ in 0..10_000 {
        let p = ParamPair::new(
            rng.random_range(-40.0 * l1 * l1..2.0 * l1 * l1),
            rng.random_range(-20.0 * l1..4.0 * l1),
        );
        if check_admissible(p, &d, 16).admissible() {
            admissible += 1;
            if factor_params(p).unwrap().mu1 >= l1 {
                counter += 1;
            }
        }
    }
    out.check(counter == 0, format!("{counter} counterexamples among {admissible} admissible raw draws"));
}

fn linear_solver(out: &mut Outcome) {
    let d = Domain::unit(1).unwrap();
    for (p, k) in
        [(ParamPair::new(0.0, 0.0), 1), (ParamPair::new(5.0, -3.0), 2), (ParamPair::new(-3.0, 4.0), 3)]
    {
        let mode = |n: usize| {
            let l = (k as f64 * PI).powi(2);
            let h = GridField::from_fn(&d, &[n], |x| (k as f64 * PI * x[0]).sin()).unwrap();
            let u = h.scaled(1.0 / (l * l - p.beta * l - p.alpha));
            (h, u)
        };
        let (h, want) = mode(128);
        let spectral = solve_spectral(&LinearProblem::new(p, h.clone()), 128).unwrap();
        let e1 = spectral.max_abs_diff(&want).unwrap();
        let f = factor_params(p).unwrap();
        let k1 = build_kernel(&d, f.mu1, 512).unwrap();
        let k2 = build_kernel(&d, f.mu2, 512).unwrap();
        let e2 =
            rel_diff(&solve_green_quadrature(&LinearProblem::new(p, h), &k1, &k2, &[128]).unwrap(), &want);
        let (h, want) = mode(256);
        let e3 = rel_diff(&fd_solve(&d, p, &h, 256).unwrap(), &want);
        out.check(
            e1 <= 1e-10 && e2 <= 1e-3 && e3 <= 1e-3,
            format!("k={k}: spectral {e1:.1e} quadrature {e2:.1e} fd {e3:.1e}"),
        );
    }
    let mut rng = StdRng::seed_from_u64(42);
    let p = ParamPair::new(3.0, -2.0);
    let f = factor_params(p).unwrap();
    let k1 = build_kernel(&d, f.mu1, 512).unwrap();
    let k2 = build_kernel(&d, f.mu2, 512).unwrap();
    let prob = LinearProblem::new(p, positive_forcing(&d, &[128], &mut rng));
    let e = rel_diff(
        &solve_green_quadrature(&prob, &k1, &k2, &[128]).unwrap(),
        &solve_spectral(&prob, 128).unwrap(),
    );
    out.check(e <= 1e-3, format!("Green representation vs spectral {e:.1e}"));
}

fn positivity_bound(out: &mut Outcome) {
    let d = Domain::unit(1).unwrap();
    let p = ParamPair::new(5.0, -3.0);
    let f = factor_params(p).unwrap();
    let order = default_constants_order(1);
    let k1 = build_kernel(&d, f.mu1, order).unwrap();
    let k2 = build_kernel(&d, f.mu2, order).unwrap();
    let omega0 = SubBox::centered(&d, 0.5).unwrap();
    let factor = estimate_constants(&k1, &k2, &omega0, &[129]).unwrap().positivity_factor(&d);
    let mut rng = StdRng::seed_from_u64(42);
    let mut violations = 0;
    for _ in 0..20 {
        let u = solve_spectral(&LinearProblem::new(p, positive_forcing(&d, &[129], &mut rng)), 129).unwrap();
        let norm = u.max_abs();
        violations +=
            u.points().filter(|(x, v)| *v < factor * d.ground_state(x).powi(2) * norm - 1e-6).count();
    }
    out.check(violations == 0, format!("{violations} violations, factor {factor:.3e}"));
}

fn random_state(d: &Domain, n: usize, rng: &mut StdRng) -> StatePair {
    let field = |rng: &mut StdRng| {
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));
        let v = (0..n).map(|_| scale * rng.random::<f64>().powi(3)).collect();
        GridField::new(d.clone(), vec![n], v).unwrap()
    };
    let u1 = field(rng);
    let u2 = field(rng);
    StatePair::new(u1, u2).unwrap()
}

fn cone_stability(out: &mut Outcome) {
    let d = Domain::unit(1).unwrap();
    let omega0 = SubBox::centered(&d, 0.5).unwrap();
    let mut rng = StdRng::seed_from_u64(42);
    let fs = [
        (Nonlinearity::power(1.0, 2.0), Nonlinearity::saturating(50.0)),
        (Nonlinearity::power(3.0, 0.5), Nonlinearity::constant(1.0)),
    ];
    let systems: Vec<_> = (0..4)
        .map(|_| {
            let sys =
                SystemParams::new(&d, admissible_pair(&d, &mut rng), admissible_pair(&d, &mut rng)).unwrap();
            let (cone, _) = system_constants(&sys, &d, &omega0, default_constants_order(1), &[129]).unwrap();
            (sys, cone)
        })
        .collect();
    let mut violations = 0;
    for i in 0..100 {
        let (sys, cone) = &systems[i % systems.len()];
        let (f1, f2) = &fs[i % fs.len()];
        let t = apply_t(&random_state(&d, 63, &mut rng), sys, f1, f2, 63).unwrap();
        if !verify_cone(&t, cone.sigma, &cone.omega0) {
            violations += 1;
        }
    }
    out.check(violations == 0, format!("{violations} of 100 draws leave the cone"));
}

fn eigenfunction_fixed_point(out: &mut Outcome) {
    let d = Domain::unit(1).unwrap();
    let mut rng = StdRng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let sys =
            SystemParams::new(&d, admissible_pair(&d, &mut rng), admissible_pair(&d, &mut rng)).unwrap();
        let f1 = Nonlinearity::linear_resonant(sys.l1, 1);
        let f2 = Nonlinearity::linear_resonant(sys.l2, 2);
        for c in [0.1, 1.0, 10.0] {
            let s = StatePair::ground_state(&d, &[63], c, c).unwrap();
            worst = worst.max(apply_t(&s, &sys, &f1, &f2, 63).unwrap().distance(&s).unwrap());
        }
    }
    out.check(worst <= 1e-6, format!("max ‖T(cφ₁) − cφ₁‖ {worst:.1e}"));
}

fn superlinear(out: &mut Outcome) {
    let d = Domain::unit(1).unwrap();
    let p = ParamPair::new(0.0, 0.0);
    let sys = SystemParams::new(&d, p, p).unwrap();
    let f = Nonlinearity::power(1.0, 2.0);
    let verdict = theorem_hypothesis_check(&f, &f, &sys, &d);
    out.check(
        verdict.classification == Theorem::Thm41,
        format!("classification {:?}", verdict.classification),
    );
    let r = estimate_limit_ratios(&f, &f, &sys, &d, 1e-3, 1e3, 17, 9);
    out.check(r.f0_upper <= 0.01, format!("f⁰ est {:.2e} at r=1e-3", r.f0_upper));
    out.check(r.finf_lower >= 100.0, format!("f_∞ est {:.2} at r=1e3 (want ≥ 100)", r.finf_lower));

    let init = StatePair::ground_state(&d, &[127], 10.0, 10.0).unwrap();
    let sol = newton_solve(&init, &sys, &f, &f, &NewtonOptions::default()).unwrap();
    out.check(
        sol.converged && sol.positive && sol.residual_inf <= 1e-6,
        format!("newton {} steps, ‖R‖∞ {:.1e}, positive {}", sol.iterations, sol.residual_inf, sol.positive),
    );
    let init = StatePair::ground_state(&d, &[256], 10.0, 10.0).unwrap();
    let fd = fd_newton(&d, &sys, &f, &f, &init, 256, &FdNewtonOptions::default()).unwrap();
    let (i, x) = fd
        .solution
        .u1
        .points()
        .enumerate()
        .map(|(i, (x, _))| (i, x))
        .min_by(|a, b| (a.1[0] - 0.5).abs().total_cmp(&(b.1[0] - 0.5).abs()))
        .unwrap();
    let fd_center = [fd.solution.u1.values()[i], fd.solution.u2.values()[i]];
    let spectral = [sol.solution.u1.interpolate(&x).unwrap(), sol.solution.u2.interpolate(&x).unwrap()];
    let rel = fd_center.iter().zip(&spectral).map(|(a, b)| (a - b).abs() / a.abs()).fold(0.0f64, f64::max);
    out.check(fd.converged && rel <= 1e-3, format!("center vs fd_newton(256) {rel:.1e}"));
}

fn sublinear(out: &mut Outcome) {
    let d = Domain::unit(1).unwrap();
    let p = ParamPair::new(0.0, 0.0);
    let sys = SystemParams::new(&d, p, p).unwrap();
    // F → 2c/L as u₁ + u₂ → 0.
    let c = 2.0 * sys.l1;
    let f = Nonlinearity::saturating(c);
    let verdict = theorem_hypothesis_check(&f, &f, &sys, &d);
    out.check(
        verdict.classification == Theorem::Thm42,
        format!("classification {:?}, 2c/L = {}", verdict.classification, 2.0 * c / sys.l1),
    );
    let omega0 = SubBox::centered(&d, 0.5).unwrap();
    let (cone, _) = system_constants(&sys, &d, &omega0, default_constants_order(1), &[129]).unwrap();
    let opts = PicardOptions { tol: 1e-6, damping: 0.5, cone: Some(cone), ..PicardOptions::default() };
    let init = StatePair::ground_state(&d, &[127], 1.0, 1.0).unwrap();
    let r = picard_solve(&init, &sys, &f, &f, &opts).unwrap();
    out.check(
        r.converged && r.residual_inf <= 1e-6 && r.positive && r.cone_ok == Some(true),
        format!(
            "picard {} steps, residual {:.1e}, positive {}, cone {:?}",
            r.iterations, r.residual_inf, r.positive, r.cone_ok
        ),
    );
}

fn cmd_solve_exit(alpha: f64, beta: f64) -> i32 {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("experiment.toml");
    fs::write(&cfg, format!("[equation1]\nalpha = {alpha:e}\nbeta = {beta:e}\n")).unwrap();
    let out = dir.path().join("out");
    navier4_cli::run([
        "navier4".to_string(),
        "--config".into(),
        cfg.display().to_string(),
        "--out".into(),
        out.display().to_string(),
        "solve".into(),
    ])
}

fn resonance(out: &mut Outcome) {
    let d = Domain::unit(1).unwrap();
    let l1 = d.first_eigenvalue();
    let k1 = Mode::new(vec![1]).unwrap();
    for (beta, alpha) in resonance_curve(&k1, &d, &[-l1, 0.0, 0.5 * l1]) {
        let code = cmd_solve_exit(alpha, beta);
        out.check(code == 1, format!("solve on (α,β)=({alpha:.2},{beta:.2}) exits {code}"));
    }
    let (beta, alpha) = resonance_curve(&k1, &d, &[0.0])[0];
    let near = ParamPair::new(alpha - 0.01 * l1 * l1, beta);
    // Largest collapse: coarser grids are limited by the O(h²) shift of the
    // discrete first eigenvalue, finer ones by roundoff in the last pivot.
    let n = 1024;
    let at = fd_pivot_stats(&d, ParamPair::new(alpha, beta), n).unwrap().ratio();
    let away = fd_pivot_stats(&d, near, n).unwrap().ratio();
    let orders = (away / at).log10();
    out.check(
        orders >= 6.0,
        format!("FD pivot ratio {at:.2e} on resonance vs {away:.2e} nearby at n={n}: {orders:.2} orders (want ≥ 6)"),
    );
}

fn two_dimensional(out: &mut Outcome) {
    let d = Domain::unit(2).unwrap();
    let p = ParamPair::new(0.0, 0.0);
    let lambda = 2.0 * PI * PI;
    let exact =
        |n: usize| GridField::from_fn(&d, &[n, n], |x| (PI * x[0]).sin() * (PI * x[1]).sin()).unwrap();
    let u = exact(63);
    let spectral = solve_spectral(&LinearProblem::new(p, u.scaled(lambda * lambda)), 63).unwrap();
    let e1 = spectral.max_abs_diff(&u).unwrap();
    out.check(e1 <= 1e-10, format!("spectral {e1:.1e}"));
    let u = exact(64);
    let e2 = fd_solve(&d, p, &u.scaled(lambda * lambda), 64).unwrap().max_abs_diff(&u).unwrap();
    out.check(e2 <= 1e-2, format!("fd(64) {e2:.1e}"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("experiment.toml");
    fs::write(&cfg, "[domain]\nlengths = [1.0, 1.0]\n").unwrap();
    let out_dir = dir.path().join("out");
    let code = navier4_cli::run([
        "navier4".to_string(),
        "--config".into(),
        cfg.display().to_string(),
        "--out".into(),
        out_dir.display().to_string(),
        "greens".into(),
    ]);
    let report: serde_json::Value = fs::read_to_string(out_dir.join("greens.json"))
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok())
        .unwrap_or_default();
    let div = &report["divergence"];
    let m1: Vec<f64> = div["max_diagonal"]
        .as_array()
        .map(|a| a.iter().filter_map(|v| v.as_f64()).collect())
        .unwrap_or_default();
    let increasing = m1.len() == 3 && m1.windows(2).all(|w| w[1] > w[0]);
    out.check(
        code == 0 && div["orders"] == serde_json::json!([16, 32, 64]) && increasing,
        format!("kernel report M₁ over K=16,32,64: {m1:.3?}"),
    );
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let results = [
        criterion(1, "Green-kernel oracle agreement (1D)", secs(10), kernel_oracle),
        criterion(2, "kernel positivity, symmetry and two-sided bounds", secs(30), kernel_properties),
        criterion(3, "factorization identities", None, factorization),
        criterion(4, "linear solver paths", secs(60), linear_solver),
        criterion(5, "positivity lower bound", None, positivity_bound),
        criterion(6, "cone stability of the solution map", None, cone_stability),
        criterion(7, "eigenfunction fixed point", None, eigenfunction_fixed_point),
        criterion(8, "superlinear regime end-to-end", secs(60), superlinear),
        criterion(9, "sublinear regime end-to-end", secs(60), sublinear),
        criterion(10, "resonance sensitivity", None, resonance),
        criterion(11, "two-dimensional sanity", None, two_dimensional),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
