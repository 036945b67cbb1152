//! Banded matrices with LU factorization (partial pivoting).
//!
//! Every linear system in this crate is banded with a small bandwidth: the
//! finite-difference operators are tridiagonal after the interface ordering,
//! and the coupled Newton systems stay within a few diagonals once unknowns
//! are interleaved by coordinate. Storage follows the classical band layout
//! with `kl` extra superdiagonals reserved for pivoting fill.

/// Band matrix of dimension `n` with `kl` sub- and `ku` superdiagonals.
///
/// Entry `(i, j)` is stored iff `j - (ku + kl) <= i <= j + kl`; the extra
/// `kl` superdiagonals hold fill created by row interchanges.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row-major: `data[r * n + j]` holds `A(i, j)` with `r = kl + ku + i - j`.
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        assert!(n > 0);
        let rows = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            data: vec![0.0; rows * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(i + self.ku + self.kl >= j && j + self.kl >= i, "(i,j) outside band");
        (self.kl + self.ku + i - j) * self.n + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + self.ku + self.kl < j || j + self.kl < i {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// LU factorization with partial pivoting, in place.
    pub fn factor(mut self) -> Result<BandLu, crate::error::Error> {
        let n = self.n;
        let kl = self.kl;
        let kb = self.ku + self.kl; // superdiagonal reach after fill
        let mut piv = vec![0usize; n];
        for j in 0..n {
            // pivot search in column j, rows j..=j+kl
            let imax = (j + kl).min(n - 1);
            let mut p = j;
            let mut pmax = self.get(j, j).abs();
            for i in (j + 1)..=imax {
                let a = self.get(i, j).abs();
                if a > pmax {
                    pmax = a;
                    p = i;
                }
            }
            piv[j] = p;
            if pmax == 0.0 {
                return Err(crate::error::Error::SingularSystem("band LU"));
            }
            let jend = (j + kb).min(n - 1);
            if p != j {
                for k in j..=jend {
                    let a = self.get(j, k);
                    let b = self.get(p, k);
                    self.set(j, k, b);
                    self.set(p, k, a);
                }
            }
            let pivot = self.get(j, j);
            for i in (j + 1)..=imax {
                let m = self.get(i, j) / pivot;
                self.set(i, j, m); // store multiplier
                if m != 0.0 {
                    for k in (j + 1)..=jend {
                        let v = self.get(j, k);
                        if v != 0.0 {
                            self.add(i, k, -m * v);
                        }
                    }
                }
            }
        }
        Ok(BandLu { mat: self, piv })
    }
}

/// Factored form; solves by forward elimination + back substitution.
pub struct BandLu {
    mat: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn n(&self) -> usize {
        self.mat.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.mat.n;
        assert_eq!(b.len(), n, "rhs length");
        let kl = self.mat.kl;
        let kb = self.mat.ku + self.mat.kl;
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                b.swap(j, p);
            }
            let imax = (j + kl).min(n - 1);
            for i in (j + 1)..=imax {
                b[i] -= self.mat.get(i, j) * b[j];
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.mat.get(j, j);
            let ilo = j.saturating_sub(kb);
            for i in ilo..j {
                b[i] -= self.mat.get(i, j) * b[j];
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.iter().map(|r| {
            let mut row = r.clone();
            row.push(0.0);
            row
        }).collect();
        for (i, row) in m.iter_mut().enumerate() {
            row[n] = b[i];
        }
        for j in 0..n {
            let p = (j..n).max_by(|&x, &y| m[x][j].abs().partial_cmp(&m[y][j].abs()).unwrap()).unwrap();
            m.swap(j, p);
            let d = m[j][j];
            for k in j..=n {
                m[j][k] /= d;
            }
            for i in 0..n {
                if i != j && m[i][j] != 0.0 {
                    let f = m[i][j];
                    for k in j..=n {
                        m[i][k] -= f * m[j][k];
                    }
                }
            }
        }
        (0..n).map(|i| m[i][n]).collect()
    }

    #[test]
    fn band_lu_matches_dense_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(n, kl, ku) in &[(12usize, 1usize, 1usize), (30, 2, 3), (57, 3, 3), (5, 1, 2)] {
            let mut band = BandMatrix::zeros(n, kl, ku);
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    if i <= j + kl && j <= i + ku {
                        let v: f64 = rng.gen_range(-1.0..1.0);
                        let v = if i == j { v + 4.0 } else { v };
                        band.set(i, j, v);
                        dense[i][j] = v;
                    }
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lu = band.factor().unwrap();
            let x = lu.solve(&b);
            let xd = dense_solve(&dense, &b);
            for i in 0..n {
                assert!((x[i] - xd[i]).abs() < 1e-10, "n={n} i={i}: {} vs {}", x[i], xd[i]);
            }
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut m = BandMatrix::zeros(3, 1, 1);
        m.set(0, 0, 1.0);
        m.set(1, 1, 0.0);
        m.set(2, 2, 1.0);
        assert!(m.factor().is_err());
    }
}
