//! Minimal sparse linear algebra: triplet assembly into compressed rows
//! and a Jacobi-preconditioned conjugate gradient solver for the SPD
//! systems produced by the assemblers.

use crate::error::{Error, Result};

/// Accumulates (row, col, value) triplets during assembly.
#[derive(Debug, Clone)]
pub struct Triplets {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n && col < self.n);
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    pub fn into_csr(mut self) -> CsrMatrix {
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                last = Some((r, c));
            }
            row_ptr[r + 1] = cols.len();
        }
        // rows with no entries inherit the previous offset
        for r in 1..=self.n {
            if row_ptr[r] < row_ptr[r - 1] {
                row_ptr[r] = row_ptr[r - 1];
            }
        }
        CsrMatrix { n: self.n, row_ptr, cols, vals }
    }
}

/// Square sparse matrix in compressed-row storage.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[r] = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.cols[k] == r {
                    d[r] += self.vals[k];
                }
            }
        }
        d
    }

    /// Largest relative asymmetry |a_ij - a_ji| / max|a|.
    pub fn asymmetry(&self) -> f64 {
        let mut map = std::collections::HashMap::new();
        let mut amax = 0.0f64;
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                map.insert((r, self.cols[k]), self.vals[k]);
                amax = amax.max(self.vals[k].abs());
            }
        }
        if amax == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for ((r, c), v) in &map {
            let vt = map.get(&(*c, *r)).copied().unwrap_or(0.0);
            worst = worst.max((v - vt).abs());
        }
        worst / amax
    }

    /// Jacobi-preconditioned conjugate gradient. `x` carries the initial
    /// guess on entry (warm start) and the solution on success; relative
    /// residual is driven to 1e-10.
    pub fn solve_spd(&self, b: &[f64], x: &mut [f64]) -> Result<usize> {
        let n = self.n;
        if n == 0 {
            return Ok(0);
        }
        let norm_b = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm_b == 0.0 {
            x.fill(0.0);
            return Ok(0);
        }
        let inv_diag: Vec<f64> = self
            .diagonal()
            .iter()
            .map(|d| {
                if d.abs() > 0.0 {
                    1.0 / d
                } else {
                    1.0
                }
            })
            .collect();
        let mut r = vec![0.0; n];
        self.matvec(x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let mut z: Vec<f64> = (0..n).map(|i| inv_diag[i] * r[i]).collect();
        let mut p = z.clone();
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let mut ap = vec![0.0; n];
        let tol = 1e-10 * norm_b;
        let max_iters = 20 * n + 100;
        for it in 0..max_iters {
            let norm_r = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm_r <= tol {
                return Ok(it);
            }
            self.matvec(&p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if !(pap > 0.0) {
                return Err(Error::LinearSolver {
                    msg: format!("matrix not positive definite (pAp = {pap:.3e})"),
                    iters: it,
                    residual: norm_r / norm_b,
                });
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            for i in 0..n {
                z[i] = inv_diag[i] * r[i];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        let norm_r = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        Err(Error::LinearSolver {
            msg: "conjugate gradient did not converge".into(),
            iters: max_iters,
            residual: norm_r / norm_b,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_to_triplets(a: &[Vec<f64>]) -> Triplets {
        let n = a.len();
        let mut t = Triplets::new(n);
        for i in 0..n {
            for j in 0..n {
                t.push(i, j, a[i][j]);
            }
        }
        t
    }

    #[test]
    fn identity_solve() {
        let mut t = Triplets::new(3);
        for i in 0..3 {
            t.push(i, i, 1.0);
        }
        let m = t.into_csr();
        let b = [1.0, -2.0, 3.0];
        let mut x = [0.0; 3];
        m.solve_spd(&b, &mut x).unwrap();
        for i in 0..3 {
            assert!((x[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn small_spd_solve() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let m = dense_to_triplets(&a).into_csr();
        let mut x = [0.0; 2];
        m.solve_spd(&[3.0, 3.0], &mut x).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-10);
        assert!((x[1] - 1.0).abs() < 1e-10);
        assert!(m.asymmetry() < 1e-15);
    }

    #[test]
    fn duplicate_triplets_accumulate() {
        let mut t = Triplets::new(2);
        t.push(0, 0, 1.0);
        t.push(0, 0, 1.0);
        t.push(1, 1, 2.0);
        let m = t.into_csr();
        let mut y = [0.0; 2];
        m.matvec(&[1.0, 1.0], &mut y);
        assert_eq!(y, [2.0, 2.0]);
    }

    #[test]
    fn random_spd_100() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100;
        // A^T A + I is SPD
        let a: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let mut spd = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = if i == j { 1.0 } else { 0.0 };
                for k in 0..n {
                    acc += a[k][i] * a[k][j];
                }
                spd[i][j] = acc;
            }
        }
        let m = dense_to_triplets(&spd).into_csr();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut x = vec![0.0; n];
        m.solve_spd(&b, &mut x).unwrap();
        let mut ax = vec![0.0; n];
        m.matvec(&x, &mut ax);
        let res: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(res / nb <= 1e-10 * 10.0, "relative residual {:.3e}", res / nb);
    }

    #[test]
    fn indefinite_rejected() {
        let a = vec![vec![1.0, 0.0], vec![0.0, -1.0]];
        let m = dense_to_triplets(&a).into_csr();
        let mut x = [0.0; 2];
        assert!(m.solve_spd(&[0.0, 1.0], &mut x).is_err());
    }

    #[test]
    fn warm_start_zero_iterations() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let m = dense_to_triplets(&a).into_csr();
        let mut x = [1.0, 1.0];
        let iters = m.solve_spd(&[3.0, 3.0], &mut x).unwrap();
        assert_eq!(iters, 0);
    }
}
