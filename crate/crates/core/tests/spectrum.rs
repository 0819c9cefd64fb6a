use navier4_core::{forward_transform_orders, inverse_transform, Domain, Mode, SpectralField};
use proptest::prelude::*;
use std::f64::consts::PI;

fn boxes() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.3f64..3.0, 1..=3)
}

proptest! {
    #[test]
    fn band_limited_roundtrip(lengths in boxes(), seed in prop::collection::vec(-1.0f64..1.0, 64)) {
        let d = Domain::new(lengths.clone()).unwrap();
        let orders: Vec<usize> = (0..d.dim()).map(|i| [4, 3, 2][i]).collect();
        let res: Vec<usize> = orders.iter().map(|k| k + 3).collect();
        let len: usize = orders.iter().product();
        let coeffs: Vec<f64> = (0..len).map(|i| seed[i % seed.len()] * (1.0 + i as f64)).collect();
        let c = SpectralField::from_coeffs(d, orders.clone(), coeffs.clone()).unwrap();
        let u = inverse_transform(&c, &res).unwrap();
        let back = forward_transform_orders(&u, &orders).unwrap();
        for (a, b) in back.coeffs().iter().zip(&coeffs) {
            prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn modes_come_sorted(lengths in boxes(), order in 1usize..6) {
        let d = Domain::new(lengths).unwrap();
        let modes = d.enumerate_modes(order);
        prop_assert_eq!(modes.len(), order.pow(d.dim() as u32));
        for w in modes.windows(2) {
            prop_assert!(d.eigenvalue(&w[0]) <= d.eigenvalue(&w[1]));
        }
    }

    #[test]
    fn eigenpairs_match_the_product_formula(
        lengths in boxes(),
        k in prop::collection::vec(1usize..5, 3),
        t in prop::collection::vec(0.0f64..1.0, 3),
    ) {
        let d = Domain::new(lengths.clone()).unwrap();
        let idx = k[..d.dim()].to_vec();
        let x: Vec<f64> = t[..d.dim()].iter().zip(&lengths).map(|(s, a)| s * a).collect();
        let mode = Mode::new(idx.clone()).unwrap();
        let mut want = 1.0;
        let mut lambda = 0.0;
        for ((&ki, &a), &xi) in idx.iter().zip(&lengths).zip(&x) {
            want *= (2.0 / a).sqrt() * (ki as f64 * PI * xi / a).sin();
            lambda += (ki as f64 * PI / a).powi(2);
        }
        prop_assert!((d.eigenfunction(&mode, &x).unwrap() - want).abs() < 1e-12);
        prop_assert!((d.eigenvalue(&mode) - lambda).abs() < 1e-10 * lambda);
    }
}

#[test]
fn sampled_eigenfunctions_are_orthonormal_under_midpoint_rule() {
    let d = Domain::new(vec![1.0, 2.0]).unwrap();
    let k = 4;
    let res = [4 * k, 4 * k];
    let modes = d.enumerate_modes(k);
    let axes = d.axis_nodes(&res);
    let w: f64 = d.lengths().iter().zip(&res).map(|(a, n)| a / (*n as f64 + 1.0)).product();
    for a in &modes {
        for b in &modes {
            let mut s = 0.0;
            for x in &axes[0] {
                for y in &axes[1] {
                    let p = [*x, *y];
                    s += d.eigenfunction(a, &p).unwrap() * d.eigenfunction(b, &p).unwrap();
                }
            }
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((s * w - want).abs() < 1e-8, "{a} {b}");
        }
    }
}
