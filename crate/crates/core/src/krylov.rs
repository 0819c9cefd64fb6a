//! Restarted GMRES for matrix-free Newton systems.

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GmresOutcome {
    pub x: Vec<f64>,
    pub converged: bool,
    pub relative_residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` from `x = 0` with restart length `restart`.
pub(crate) fn gmres(
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
    b: &[f64],
    rtol: f64,
    restart: usize,
    max_restarts: usize,
) -> GmresOutcome {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return GmresOutcome { x, converged: true, relative_residual: 0.0 };
    }
    let m = restart.max(1).min(n.max(1));
    let mut rel: f64;
    for _ in 0..max_restarts.max(1) {
        let ax = apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        rel = beta / bnorm;
        if !rel.is_finite() {
            break;
        }
        if rel <= rtol {
            return GmresOutcome { x, converged: true, relative_residual: rel };
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut used = 0;
        for j in 0..m {
            let mut w = apply(&basis[j]);
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                h[i][j] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            let wn = norm(&w);
            h[j + 1][j] = wn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = h[j][j].hypot(h[j + 1][j]);
            if denom == 0.0 {
                break;
            }
            cs[j] = h[j][j] / denom;
            sn[j] = h[j + 1][j] / denom;
            h[j][j] = denom;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            used = j + 1;
            rel = g[j + 1].abs() / bnorm;
            if rel <= rtol || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let s: f64 = (i + 1..used).map(|k| h[i][k] * y[k]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            for (xk, vk) in x.iter_mut().zip(&basis[i]) {
                *xk += yi * vk;
            }
        }
    }
    let ax = apply(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    rel = norm(&r) / bnorm;
    GmresOutcome { converged: rel <= rtol, x, relative_residual: rel }
}
