//! Dense complex LU factorisation with partial pivoting.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major square matrix factorised in place as `P A = L U`.
#[derive(Debug, Clone)]
pub struct ComplexLu<T> {
    n: usize,
    lu: Vec<Complex<T>>,
    perm: Vec<usize>,
    norm1: T,
}

impl<T: Scalar> ComplexLu<T> {
    /// Factorises `a` (row-major, `n × n`).
    pub fn new(n: usize, mut a: Vec<Complex<T>>) -> Result<Self> {
        assert_eq!(a.len(), n * n, "matrix storage does not match n*n");
        let norm1 = (0..n)
            .map(|c| (0..n).map(|r| a[r * n + c].norm()).sum::<T>())
            .fold(T::zero(), T::max);
        if !norm1.is_finite() {
            return Err(Error::Numeric("non-finite entries in system matrix".into()));
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (mut p, mut best) = (col, T::zero());
            for r in col..n {
                let v = a[r * n + col].re.abs() + a[r * n + col].im.abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == T::zero() {
                return Err(Error::Numeric(format!("singular system matrix (zero pivot in column {col})")));
            }
            if p != col {
                for c in 0..n {
                    a.swap(col * n + c, p * n + c);
                }
                perm.swap(col, p);
            }
            let inv = a[col * n + col].inv();
            let (head, tail) = a.split_at_mut((col + 1) * n);
            let pivot_row = &head[col * n..];
            for row in tail.chunks_exact_mut(n) {
                let f = row[col] * inv;
                row[col] = f;
                if f.re == T::zero() && f.im == T::zero() {
                    continue;
                }
                for c in col + 1..n {
                    row[c] = row[c] - f * pivot_row[c];
                }
            }
        }
        Ok(Self { n, lu: a, perm, norm1 })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.n;
        let mut x: Vec<Complex<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let row = &self.lu[r * n..r * n + r];
            let s = row.iter().zip(&x[..r]).fold(Complex::new(T::zero(), T::zero()), |acc, (l, v)| acc + *l * *v);
            x[r] = x[r] - s;
        }
        for r in (0..n).rev() {
            let row = &self.lu[r * n..(r + 1) * n];
            let s = row[r + 1..]
                .iter()
                .zip(&x[r + 1..])
                .fold(Complex::new(T::zero(), T::zero()), |acc, (u, v)| acc + *u * *v);
            x[r] = (x[r] - s) / row[r];
        }
        x
    }

    /// Solves `Aᴴ x = b`.
    pub fn solve_adjoint(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.n;
        // Aᴴ = Uᴴ Lᴴ P, so solve Uᴴ y = b, Lᴴ z = y, x = Pᵀ z.
        let mut y = b.to_vec();
        for r in 0..n {
            let mut s = y[r];
            for c in 0..r {
                s = s - self.lu[c * n + r].conj() * y[c];
            }
            y[r] = s / self.lu[r * n + r].conj();
        }
        for r in (0..n).rev() {
            let mut s = y[r];
            for c in r + 1..n {
                s = s - self.lu[c * n + r].conj() * y[c];
            }
            y[r] = s;
        }
        let mut x = vec![Complex::new(T::zero(), T::zero()); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }

    /// Hager–Higham estimate of the 1-norm condition number.
    pub fn condition_estimate(&self) -> T {
        let n = self.n;
        let nf = T::from_usize_lossy(n);
        let mut x = vec![Complex::new(T::one() / nf, T::zero()); n];
        let mut est = T::zero();
        for _ in 0..5 {
            let y = self.solve(&x);
            est = y.iter().map(|v| v.norm()).sum();
            let xi: Vec<Complex<T>> = y
                .iter()
                .map(|v| {
                    let m = v.norm();
                    if m > T::zero() { *v / m } else { Complex::new(T::one(), T::zero()) }
                })
                .collect();
            let z = self.solve_adjoint(&xi);
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.norm()))
                .fold((0, T::zero()), |a, b| if b.1 > a.1 { b } else { a });
            let ztx = z.iter().zip(&x).fold(T::zero(), |acc, (a, b)| acc + (a.conj() * *b).re);
            if zmax <= ztx {
                break;
            }
            x = vec![Complex::new(T::zero(), T::zero()); n];
            x[jmax] = Complex::new(T::one(), T::zero());
        }
        est * self.norm1
    }
}
