//! Banded LU with partial pivoting.

/// Square matrix with `kl` sub- and `ku` super-diagonals. Each row keeps room
/// for the `kl` extra super-diagonals that row interchanges can create.
#[derive(Debug, Clone)]
pub(crate) struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl Banded {
    pub(crate) fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if j + self.kl < i || j > i + self.kl + self.ku {
            None
        } else {
            Some(i * self.width + (j + self.kl - i))
        }
    }

    pub(crate) fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Panics when `(i, j)` lies outside the declared band.
    pub(crate) fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band ({}, {})",
            self.kl,
            self.ku
        );
        let s = self.slot(i, j).expect("checked above");
        self.data[s] += v;
    }

    /// `max_i Σ_j |a_ij|`.
    pub(crate) fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    #[cfg(test)]
    pub(crate) fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    pub(crate) fn factor(mut self) -> BandedLu {
        let n = self.n;
        let kl = self.kl;
        let reach = kl + self.ku;
        let mut pivots = vec![0usize; n];
        let mut lower = vec![0.0; n * kl.max(1)];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            pivots[k] = p;
            let right = (k + reach).min(n - 1);
            if p != k {
                for j in k..=right {
                    let a = self.slot(k, j).expect("within fill band");
                    let b = self.slot(p, j).expect("within fill band");
                    self.data.swap(a, b);
                }
            }
            let pivot = self.get(k, k);
            if pivot == 0.0 {
                continue;
            }
            for i in k + 1..=last {
                let m = self.get(i, k) / pivot;
                lower[k * kl.max(1) + (i - k - 1)] = m;
                if m == 0.0 {
                    continue;
                }
                for j in k..=right {
                    let u = self.get(k, j);
                    if u != 0.0 {
                        let s = self.slot(i, j).expect("within fill band");
                        self.data[s] -= m * u;
                    }
                }
            }
        }
        BandedLu { upper: self, lower, pivots }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BandedLu {
    upper: Banded,
    lower: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    /// `(min |u_kk|, max |u_kk|)`.
    pub(crate) fn pivot_range(&self) -> (f64, f64) {
        (0..self.upper.n)
            .map(|k| self.upper.get(k, k).abs())
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.upper.n;
        let kl = self.upper.kl;
        let reach = kl + self.upper.ku;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.pivots[k]);
            let last = (k + kl).min(n - 1);
            for i in k + 1..=last {
                x[i] -= self.lower[k * kl.max(1) + (i - k - 1)] * x[k];
            }
        }
        for k in (0..n).rev() {
            let right = (k + reach).min(n - 1);
            let s: f64 = (k + 1..=right).map(|j| self.upper.get(k, j) * x[j]).sum();
            x[k] = (x[k] - s) / self.upper.get(k, k);
        }
        x
    }
}
