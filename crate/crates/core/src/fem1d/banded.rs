use crate::error::{Error, Result};

/// Square matrix stored by diagonals.
///
/// Row `i` keeps the `kl + ku + 1` entries of columns `i - kl ..= i + ku`;
/// everything outside the band is structurally zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, 0, 0);
        m.data.fill(1.0);
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.slot(i, j)]
        } else {
            0.0
        }
    }

    /// Panics if `(i, j)` is outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    /// Panics if `(i, j)` is outside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    /// Column range of the band in row `i`.
    pub fn row_columns(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.n)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let w = self.width();
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &self.data[i * w..(i + 1) * w];
            let cols = self.row_columns(i);
            let off = cols.start + self.kl - i;
            *yi = row[off..off + cols.len()]
                .iter()
                .zip(&x[cols])
                .map(|(a, b)| a * b)
                .sum();
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n, self.ku, self.kl);
        for i in 0..self.n {
            for j in self.row_columns(i) {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    /// `alpha * self + beta * other`, with the union of both bands.
    pub fn combine(&self, alpha: f64, other: &BandedMatrix, beta: f64) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zeros(self.n, self.kl.max(other.kl), self.ku.max(other.ku));
        for i in 0..self.n {
            for j in self.row_columns(i) {
                out.add(i, j, alpha * self.get(i, j));
            }
            for j in other.row_columns(i) {
                out.add(i, j, beta * other.get(i, j));
            }
        }
        out
    }

    /// Copy with each listed row replaced by the matching identity row.
    pub fn with_identity_rows(&self, rows: &[usize]) -> Self {
        let mut out = self.clone();
        for &r in rows {
            for j in out.row_columns(r) {
                out.set(r, j, 0.0);
            }
            out.set(r, r, 1.0);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn factor(&self) -> Result<BandedLu> {
        BandedLu::new(self)
    }
}

/// LU factorization with partial pivoting in LAPACK `gbtrf` layout.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    pub fn new(mat: &BandedMatrix) -> Result<Self> {
        let (n, kl, ku) = (mat.n, mat.kl, mat.ku);
        let kv = kl + ku;
        let ld = 2 * kl + ku + 1;
        let mut ab = vec![0.0; ld * n];
        for i in 0..n {
            for j in mat.row_columns(i) {
                ab[kv + i - j + j * ld] = mat.get(i, j);
            }
        }
        let scale = mat.max_abs().max(f64::MIN_POSITIVE);
        let tiny = 1e-14 * scale;
        let idx = |i: usize, j: usize| kv + i - j + j * ld;
        let mut ipiv = vec![0; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = 0;
            let mut best = ab[idx(j, j)].abs();
            for r in 1..=km {
                let v = ab[idx(j + r, j)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            ipiv[j] = j + p;
            if !(best > tiny) {
                return Err(Error::SingularPivot { row: j });
            }
            ju = ju.max((j + ku + p).min(n - 1));
            if p != 0 {
                for c in j..=ju {
                    ab.swap(idx(j, c), idx(j + p, c));
                }
            }
            let piv = ab[idx(j, j)];
            for r in 1..=km {
                ab[idx(j + r, j)] /= piv;
            }
            for c in j + 1..=ju {
                let ujc = ab[idx(j, c)];
                if ujc != 0.0 {
                    for r in 1..=km {
                        let l = ab[idx(j + r, j)];
                        ab[idx(j + r, c)] -= l * ujc;
                    }
                }
            }
        }
        Ok(Self {
            n,
            kl,
            ku,
            ld,
            ab,
            ipiv,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let (n, kl, kv, ld) = (self.n, self.kl, self.kl + self.ku, self.ld);
        let idx = |i: usize, j: usize| kv + i - j + j * ld;
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj != 0.0 {
                for r in 1..=kl.min(n - 1 - j) {
                    b[j + r] -= self.ab[idx(j + r, j)] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.ab[idx(j, j)];
            let bj = b[j];
            if bj != 0.0 {
                for i in j.saturating_sub(kv)..j {
                    b[i] -= self.ab[idx(i, j)] * bj;
                }
            }
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut b = rhs.to_vec();
        self.solve_in_place(&mut b);
        b
    }
}

/// Solve `mat · x = rhs` after replacing each Dirichlet row `i` by `x_i = value`.
pub fn solve_banded(mat: &BandedMatrix, rhs: &[f64], dirichlet: &[(usize, f64)]) -> Result<Vec<f64>> {
    if rhs.len() != mat.dim() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side of length {} for a {}x{} matrix",
            rhs.len(),
            mat.dim(),
            mat.dim()
        )));
    }
    if let Some(&(i, _)) = dirichlet.iter().find(|(i, _)| *i >= mat.dim()) {
        return Err(Error::DimensionMismatch(format!("Dirichlet index {i} out of range")));
    }
    let rows: Vec<usize> = dirichlet.iter().map(|&(i, _)| i).collect();
    let constrained = if rows.is_empty() {
        mat.clone()
    } else {
        mat.with_identity_rows(&rows)
    };
    let mut b = rhs.to_vec();
    for &(i, v) in dirichlet {
        b[i] = v;
    }
    let lu = constrained.factor()?;
    lu.solve_in_place(&mut b);
    Ok(b)
}
