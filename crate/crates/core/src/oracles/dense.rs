//! Small dense complex linear algebra used only by the brute-force oracle.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let (src, dst) = (&other.data[k * n..(k + 1) * n], &mut out.data[i * n..(i + 1) * n]);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// All eigenvalues, by Householder reduction to Hessenberg form followed
    /// by shifted complex QR iterations.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        let mut h = self.clone();
        h.reduce_to_hessenberg();
        h.hessenberg_qr()
    }

    fn reduce_to_hessenberg(&mut self) {
        let n = self.n;
        if n < 3 {
            return;
        }
        let mut v = vec![ZERO; n];
        for k in 0..n - 2 {
            let norm: f64 = (k + 1..n).map(|i| self[(i, k)].norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let x0 = self[(k + 1, k)];
            let phase = if x0 == ZERO { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
            let alpha = -phase * norm;
            for i in k + 1..n {
                v[i] = self[(i, k)];
            }
            v[k + 1] -= alpha;
            let vnorm: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
            if vnorm == 0.0 {
                continue;
            }
            for vi in v.iter_mut().skip(k + 1) {
                *vi /= vnorm;
            }
            // H ← (I − 2vv†) H
            for j in k..n {
                let s: C64 = (k + 1..n).map(|i| v[i].conj() * self[(i, j)]).sum();
                for i in k + 1..n {
                    let vi = v[i];
                    self[(i, j)] -= 2.0 * vi * s;
                }
            }
            // H ← H (I − 2vv†)
            for i in 0..n {
                let s: C64 = (k + 1..n).map(|j| self[(i, j)] * v[j]).sum();
                for j in k + 1..n {
                    let vj = v[j];
                    self[(i, j)] -= 2.0 * s * vj.conj();
                }
            }
            for i in k + 2..n {
                self[(i, k)] = ZERO;
            }
        }
    }

    fn hessenberg_qr(mut self) -> Result<Vec<C64>> {
        let n = self.n;
        let mut eigs = Vec::with_capacity(n);
        if n == 0 {
            return Ok(eigs);
        }
        let eps = f64::EPSILON;
        let max_iter = 60 * n.max(10);
        let mut total = 0usize;
        let mut hi = n - 1;
        let mut iter = 0usize;
        let mut rot: Vec<(f64, C64)> = vec![(0.0, ZERO); n];
        loop {
            if hi == 0 {
                eigs.push(self[(0, 0)]);
                break;
            }
            let mut l = hi;
            while l > 0 {
                let s = self[(l - 1, l - 1)].norm() + self[(l, l)].norm();
                if self[(l, l - 1)].norm() <= eps * s.max(f64::MIN_POSITIVE) {
                    self[(l, l - 1)] = ZERO;
                    break;
                }
                l -= 1;
            }
            if l == hi {
                eigs.push(self[(hi, hi)]);
                hi -= 1;
                iter = 0;
                continue;
            }
            total += 1;
            iter += 1;
            if total > max_iter {
                return Err(Error::NonConvergence { terms: total });
            }
            let mu = if iter % 11 == 10 {
                // exceptional shift to break cycles
                self[(hi, hi)] + C64::new(self[(hi, hi - 1)].norm() * 1.5, 0.0)
            } else {
                wilkinson_shift(
                    self[(hi - 1, hi - 1)],
                    self[(hi - 1, hi)],
                    self[(hi, hi - 1)],
                    self[(hi, hi)],
                )
            };
            for i in l..=hi {
                self[(i, i)] -= mu;
            }
            for k in l..hi {
                let (c, s) = givens(self[(k, k)], self[(k + 1, k)]);
                rot[k] = (c, s);
                for j in k..=hi {
                    let (t1, t2) = (self[(k, j)], self[(k + 1, j)]);
                    self[(k, j)] = c * t1 + s * t2;
                    self[(k + 1, j)] = -s.conj() * t1 + c * t2;
                }
                self[(k + 1, k)] = ZERO;
            }
            for k in l..hi {
                let (c, s) = rot[k];
                for i in l..=(k + 1).min(hi) {
                    let (t1, t2) = (self[(i, k)], self[(i, k + 1)]);
                    self[(i, k)] = t1 * c + t2 * s.conj();
                    self[(i, k + 1)] = -t1 * s + t2 * c;
                }
            }
            for i in l..=hi {
                self[(i, i)] += mu;
            }
        }
        Ok(eigs)
    }

    /// Solves A x = b by LU with partial pivoting. Exactly zero pivots are
    /// replaced by `tiny` so nearly singular shifted systems stay solvable.
    pub fn solve(&self, b: &[C64], tiny: f64) -> Vec<C64> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm()))
                .unwrap();
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                x.swap(k, p);
            }
            if a[k * n + k].norm() < tiny {
                a[k * n + k] = C64::new(tiny, 0.0);
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / pivot;
                if f == ZERO {
                    continue;
                }
                a[i * n + k] = ZERO;
                for j in k + 1..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= f * akj;
                }
                let xk = x[k];
                x[i] -= f * xk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = x[k];
            for j in k + 1..n {
                acc -= a[k * n + j] * x[j];
            }
            x[k] = acc / a[k * n + k];
        }
        x
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let n = self.n;
        (0..n)
            .map(|i| self.data[i * n..(i + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn norm_inf(&self) -> f64 {
        let n = self.n;
        (0..n)
            .map(|i| self.data[i * n..(i + 1) * n].iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

/// Rotation (c, s) with c real such that [c s; −s̄ c]·[x; y] = [r; 0].
fn givens(x: C64, y: C64) -> (f64, C64) {
    let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, ZERO);
    }
    if x == ZERO {
        return (0.0, y.conj() / y.norm());
    }
    let c = x.norm() / r;
    let s = (x / x.norm()) * y.conj() / r;
    (c, s)
}

/// Eigenvalue of [[a, b], [c, d]] closer to d.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}
