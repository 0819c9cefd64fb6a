use navier4_core::{fd_solve, Domain, FdOperator, GridField, ParamPair};
use std::f64::consts::PI;

fn mode_error(p: ParamPair, k: usize, n: usize) -> f64 {
    let d = Domain::unit(1).unwrap();
    let lambda = (k as f64 * PI).powi(2);
    let h = GridField::from_fn(&d, &[n], |x| (k as f64 * PI * x[0]).sin()).unwrap();
    let want = h.scaled(1.0 / p.symbol(lambda));
    fd_solve(&d, p, &h, n).unwrap().max_abs_diff(&want).unwrap() / want.max_abs()
}

#[test]
fn single_mode_error_is_second_order() {
    for (p, k) in [(ParamPair::new(0.0, 0.0), 1), (ParamPair::new(8.0, -5.0), 2)] {
        let errs: Vec<f64> = [64, 128, 256].iter().map(|&n| mode_error(p, k, n)).collect();
        for w in errs.windows(2) {
            // Node spacing 1/(n+1) halves only approximately.
            let rate = (w[0] / w[1]).log2();
            assert!((1.0..=3.0).contains(&rate), "{errs:?}");
            assert!(w[0] / w[1] > 2.0 && w[0] / w[1] < 8.0, "{errs:?}");
        }
    }
}

#[test]
fn squared_laplacian_approximates_squared_eigenvalues() {
    let d = Domain::unit(1).unwrap();
    let bih = ParamPair::new(0.0, 0.0);
    for k in 1..=3 {
        let lambda = (k as f64 * PI).powi(2);
        let mut prev = f64::INFINITY;
        for n in [64, 128, 256] {
            let op = FdOperator::new(&d, bih, &[n]).unwrap();
            let u = GridField::from_fn(&d, &[n], |x| (k as f64 * PI * x[0]).sin()).unwrap();
            let au = op.apply(u.values());
            let err = au
                .iter()
                .zip(u.values())
                .map(|(a, v)| (a - lambda * lambda * v).abs())
                .fold(0.0f64, f64::max)
                / (lambda * lambda);
            let h = 1.0 / (n as f64 + 1.0);
            assert!(err < lambda * h * h, "k={k} n={n}: {err}");
            assert!(err < prev / 3.0);
            prev = err;
        }
    }
}

#[test]
fn two_dimensional_manufactured_solution() {
    let d = Domain::unit(2).unwrap();
    let n = 64;
    let lambda = 2.0 * PI * PI;
    let exact = GridField::from_fn(&d, &[n, n], |x| (PI * x[0]).sin() * (PI * x[1]).sin()).unwrap();
    let h = exact.scaled(lambda * lambda);
    let u = fd_solve(&d, ParamPair::new(0.0, 0.0), &h, n).unwrap();
    assert!(u.max_abs_diff(&exact).unwrap() < 1e-2);
}
