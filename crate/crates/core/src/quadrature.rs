//! Tensor-product Gauss–Legendre rules on boxes.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

/// Nodes and weights of an `points`-point Gauss–Legendre rule on `[lo, hi]`.
pub fn gauss_legendre(lo: f64, hi: f64, points: usize) -> (Vec<f64>, Vec<f64>) {
    let points = NonZeroUsize::new(points.max(1)).expect("positive by construction");
    let rule = GaussLegendre::new(points);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    rule.as_node_weight_pairs().iter().map(|(t, w)| (mid + half * t, half * w)).unzip()
}

/// `∫ f` over `Π [lo_i, hi_i]` with `points` nodes per axis.
pub fn integrate_box(lo: &[f64], hi: &[f64], points: usize, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let rules: Vec<(Vec<f64>, Vec<f64>)> =
        lo.iter().zip(hi).map(|(&a, &b)| gauss_legendre(a, b, points)).collect();
    let dim = rules.len();
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for d in 0..dim {
            x[d] = rules[d].0[idx[d]];
            w *= rules[d].1[idx[d]];
        }
        total += w * f(&x);
        let mut axis = dim;
        loop {
            if axis == 0 {
                return total;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < points {
                break;
            }
            idx[axis] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate_box(&[0.0], &[2.0], 4, |x| x[0].powi(7));
        assert!((v - 2f64.powi(8) / 8.0).abs() < 1e-10);
        let v = integrate_box(&[0.0, -1.0], &[1.0, 1.0], 3, |x| x[0] * x[0] * x[1] * x[1]);
        assert!((v - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_length() {
        let (_, w) = gauss_legendre(0.5, 3.0, 17);
        assert!((w.iter().sum::<f64>() - 2.5).abs() < 1e-13);
    }
}
