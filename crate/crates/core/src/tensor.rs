//! Dense row-major tensor helpers shared by the transforms and the kernels.

use std::f64::consts::PI;

/// Contracts `axis` of a row-major tensor with a `(shape[axis] × out_len)`
/// row-major matrix: `out[.., j, ..] = Σ_k data[.., k, ..] · mat[k, j]`.
pub(crate) fn contract_axis(
    data: &[f64],
    shape: &[usize],
    axis: usize,
    mat: &[f64],
    out_len: usize,
) -> Vec<f64> {
    let len_in = shape[axis];
    debug_assert_eq!(mat.len(), len_in * out_len);
    debug_assert_eq!(data.len(), shape.iter().product::<usize>());
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let mut out = vec![0.0; outer * out_len * inner];
    for o in 0..outer {
        let src = &data[o * len_in * inner..(o + 1) * len_in * inner];
        let dst = &mut out[o * out_len * inner..(o + 1) * out_len * inner];
        if inner == 1 {
            for (j, d) in dst.iter_mut().enumerate() {
                let mut acc = 0.0;
                for k in 0..len_in {
                    acc += src[k] * mat[k * out_len + j];
                }
                *d = acc;
            }
        } else {
            for k in 0..len_in {
                let row = &src[k * inner..(k + 1) * inner];
                for j in 0..out_len {
                    let w = mat[k * out_len + j];
                    if w == 0.0 {
                        continue;
                    }
                    let d = &mut dst[j * inner..(j + 1) * inner];
                    for (di, &ri) in d.iter_mut().zip(row) {
                        *di += w * ri;
                    }
                }
            }
        }
    }
    out
}

/// Applies one matrix per axis, contracting the last axis first.
pub(crate) fn contract_all(data: &[f64], shape: &[usize], mats: &[&[f64]], out_lens: &[usize]) -> Vec<f64> {
    let mut cur = data.to_vec();
    let mut cur_shape = shape.to_vec();
    for axis in (0..shape.len()).rev() {
        cur = contract_axis(&cur, &cur_shape, axis, mats[axis], out_lens[axis]);
        cur_shape[axis] = out_lens[axis];
    }
    cur
}

/// `√(2/a) sin(k π m / (n+1))` for `k = 1..=order` (rows) and `m = 1..=n`
/// (columns). Arguments are reduced modulo `2(n+1)` in integers so large
/// mode numbers keep full accuracy.
pub(crate) fn sine_table_nodes(length: f64, n: usize, order: usize) -> Vec<f64> {
    let scale = (2.0 / length).sqrt();
    let period = 2 * (n + 1);
    let step = PI / (n + 1) as f64;
    let mut table = vec![0.0; order * n];
    for k in 1..=order {
        for m in 1..=n {
            let p = (k * m) % period;
            table[(k - 1) * n + (m - 1)] = scale * (step * p as f64).sin();
        }
    }
    table
}

/// `√(2/a) sin(k π x / a)` for `k = 1..=order` (rows) and arbitrary points (columns).
pub(crate) fn sine_table_points(length: f64, points: &[f64], order: usize) -> Vec<f64> {
    let scale = (2.0 / length).sqrt();
    let n = points.len();
    let mut table = vec![0.0; order * n];
    for k in 1..=order {
        let w = k as f64 * PI / length;
        for (m, &x) in points.iter().enumerate() {
            table[(k - 1) * n + m] = scale * (w * x).sin();
        }
    }
    table
}

pub(crate) fn transpose(mat: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = mat[r * cols + c];
        }
    }
    out
}

/// Row-major multi-index of a flat offset.
pub(crate) fn unravel(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for axis in (0..shape.len()).rev() {
        idx[axis] = flat % shape[axis];
        flat /= shape[axis];
    }
    idx
}
