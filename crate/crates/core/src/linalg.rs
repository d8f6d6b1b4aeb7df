//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted ascending.
pub fn sym_eigen<T: Real>(m: &DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    let n = m.nrows();
    let sym = (m + m.transpose()) * T::lit(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        // deterministic sign: largest-magnitude component positive
        let mut pivot = 0;
        for k in 0..n {
            if col[k].abs() > col[pivot].abs() + T::lit(1e-12) {
                pivot = k;
            }
        }
        if col[pivot] < T::zero() {
            col = -col;
        }
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

/// `S^{-1/2}` for a symmetric positive definite matrix.
pub fn inv_sqrt_spd<T: Real>(s: &DMatrix<T>, min_eigenvalue: T) -> Result<DMatrix<T>> {
    let (w, v) = sym_eigen(s);
    if s.nrows() > 0 && w[0] < min_eigenvalue {
        return Err(Error::LinearDependence {
            min_eigenvalue: w[0].to_f64_lossy(),
        });
    }
    let d = DMatrix::from_diagonal(&w.map(|x| T::one() / x.sqrt()));
    Ok(&v * d * v.transpose())
}

pub fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

pub fn is_symmetric<T: Real>(m: &DMatrix<T>, tol: T) -> bool {
    m.is_square() && max_abs(&(m - m.transpose())) <= tol
}

/// Two-electron integrals `(pq|rs)` in chemist notation, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct EriTensor<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> EriTensor<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n * n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        let mut t = Self::zeros(n);
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = f(p, q, r, s);
                        t.data[((p * n + q) * n + r) * n + s] = v;
                    }
                }
            }
        }
        t
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n + q) * self.n + r) * self.n + s
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> T {
        self.data[self.idx(p, q, r, s)]
    }

    #[inline]
    pub fn set(&mut self, p: usize, q: usize, r: usize, s: usize, v: T) {
        let i = self.idx(p, q, r, s);
        self.data[i] = v;
    }

    /// Sets `(pq|rs)` and all of its 8-fold permutation images.
    pub fn set_sym(&mut self, p: usize, q: usize, r: usize, s: usize, v: T) {
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            self.set(a, b, c, d, v);
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// Largest deviation from 8-fold permutational symmetry.
    pub fn symmetry_defect(&self) -> T {
        let n = self.n;
        let mut worst = T::zero();
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.get(p, q, r, s);
                        for w in [
                            self.get(q, p, r, s),
                            self.get(p, q, s, r),
                            self.get(r, s, p, q),
                        ] {
                            worst = worst.max((v - w).abs());
                        }
                    }
                }
            }
        }
        worst
    }

    /// `(pq|rs)' = sum C_ap C_bq C_cr C_ds (ab|cd)` for a rectangular `C` (n x m).
    pub fn transform(&self, c: &DMatrix<T>) -> Self {
        let n = self.n;
        assert_eq!(c.nrows(), n, "coefficient rows must match tensor dimension");
        let m = c.ncols();
        // quarter transformations, one index at a time
        let mut t1 = vec![T::zero(); m * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for cc in 0..n {
                    for d in 0..n {
                        let v = self.get(a, b, cc, d);
                        if v == T::zero() {
                            continue;
                        }
                        for p in 0..m {
                            t1[((p * n + b) * n + cc) * n + d] += c[(a, p)] * v;
                        }
                    }
                }
            }
        }
        let mut t2 = vec![T::zero(); m * m * n * n];
        for p in 0..m {
            for b in 0..n {
                for cc in 0..n {
                    for d in 0..n {
                        let v = t1[((p * n + b) * n + cc) * n + d];
                        if v == T::zero() {
                            continue;
                        }
                        for q in 0..m {
                            t2[((p * m + q) * n + cc) * n + d] += c[(b, q)] * v;
                        }
                    }
                }
            }
        }
        let mut t3 = vec![T::zero(); m * m * m * n];
        for p in 0..m {
            for q in 0..m {
                for cc in 0..n {
                    for d in 0..n {
                        let v = t2[((p * m + q) * n + cc) * n + d];
                        if v == T::zero() {
                            continue;
                        }
                        for r in 0..m {
                            t3[((p * m + q) * m + r) * n + d] += c[(cc, r)] * v;
                        }
                    }
                }
            }
        }
        let mut out = Self::zeros(m);
        for p in 0..m {
            for q in 0..m {
                for r in 0..m {
                    for d in 0..n {
                        let v = t3[((p * m + q) * m + r) * n + d];
                        if v == T::zero() {
                            continue;
                        }
                        for s in 0..m {
                            let i = out.idx(p, q, r, s);
                            out.data[i] += c[(d, s)] * v;
                        }
                    }
                }
            }
        }
        out
    }

    /// Restriction to a subset of orbital indices.
    pub fn subset(&self, idx: &[usize]) -> Self {
        let m = idx.len();
        Self::from_fn(m, |p, q, r, s| self.get(idx[p], idx[q], idx[r], idx[s]))
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |a, x| a.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |a, (x, y)| a.max((*x - *y).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Coulomb and exchange matrices for a (spin-summed) density:
/// `J_pq = sum_rs D_rs (pq|rs)`, `K_pq = sum_rs D_rs (pr|qs)`.
pub fn coulomb_exchange<T: Real>(d: &DMatrix<T>, eri: &EriTensor<T>) -> (DMatrix<T>, DMatrix<T>) {
    let n = eri.dim();
    let mut j = DMatrix::zeros(n, n);
    let mut k = DMatrix::zeros(n, n);
    for p in 0..n {
        for q in 0..n {
            let mut jv = T::zero();
            let mut kv = T::zero();
            for r in 0..n {
                for s in 0..n {
                    let drs = d[(r, s)];
                    jv += drs * eri.get(p, q, r, s);
                    kv += drs * eri.get(p, r, q, s);
                }
            }
            j[(p, q)] = jv;
            k[(p, q)] = kv;
        }
    }
    (j, k)
}
