//! Dense complex matrices and vectors for small spin Hilbert spaces, plus a
//! Hermitian eigensolver (Householder reduction to real tridiagonal form
//! followed by implicit QL).
//!
//! Matrices are stored row-major. Dimensions stay below ~100, so nothing here
//! is blocked or vectorized beyond what the compiler does on its own.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: data.len() });
        }
        Ok(Self { dim, data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * c).collect() }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * c).collect() }
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, c: C64, other: &Self) {
        assert_eq!(self.dim, other.dim);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.dim() });
        }
        let n = self.dim;
        let amps = (0..n)
            .map(|i| self.data[i * n..(i + 1) * n].iter().zip(v.amplitudes()).map(|(&a, &b)| a * b).sum())
            .collect();
        Ok(StateVector::from_amplitudes(amps))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from Hermiticity, `max |h_ij - conj(h_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// True when every entry outside the three central diagonals is exactly zero.
    pub fn is_tridiagonal(&self) -> bool {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) > 1 && self.data[i * n + j] != C64::new(0.0, 0.0) {
                    return false;
                }
            }
        }
        true
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Pure-state amplitudes in the `S_z` eigenbasis, index 0 <-> m = S.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    pub fn from_amplitudes(amps: Vec<C64>) -> Self {
        Self { amps }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for z in &mut self.amps {
                *z /= n;
            }
        }
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Spectral decomposition `h = V diag(values) V^dagger`; eigenvectors are the
/// columns of `vectors`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    acc += v[(i, k)] * self.values[k] * v[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// Applies `exp(-i * dt * h)` to `psi`.
    pub fn propagate(&self, psi: &StateVector, dt: f64) -> StateVector {
        let n = self.values.len();
        let v = &self.vectors;
        let a = psi.amplitudes();
        // c = diag(exp(-i lambda dt)) V^dagger psi
        let coeffs: Vec<C64> = (0..n)
            .map(|k| {
                let proj: C64 = (0..n).map(|i| v[(i, k)].conj() * a[i]).sum();
                proj * (-I * self.values[k] * dt).exp()
            })
            .collect();
        let out = (0..n)
            .map(|i| {
                let row = &v.as_slice()[i * n..(i + 1) * n];
                row.iter().zip(&coeffs).map(|(&x, &c)| x * c).sum()
            })
            .collect();
        StateVector::from_amplitudes(out)
    }
}

/// Hermiticity tolerance for eigendecomposition inputs, relative to the
/// largest entry.
const HERMITIAN_TOL: f64 = 1e-12;

pub fn hermitian_eigendecomposition(h: &ComplexMatrix) -> Result<Eigen> {
    let n = h.dim();
    let scale = h.max_abs().max(1.0);
    let dev = h.hermitian_deviation();
    if dev > HERMITIAN_TOL * scale {
        return Err(Error::NonHermitian(dev));
    }
    if n == 0 {
        return Ok(Eigen { values: vec![], vectors: ComplexMatrix::zeros(0) });
    }

    // Unitary q with q^dagger h q = T, T Hermitian tridiagonal.
    let (diag, offdiag, q) = if h.is_tridiagonal() {
        let diag: Vec<f64> = (0..n).map(|i| h[(i, i)].re).collect();
        let off: Vec<C64> = (0..n.saturating_sub(1)).map(|i| h[(i + 1, i)]).collect();
        (diag, off, None)
    } else {
        let (d, e, q) = householder_tridiagonalize(h);
        (d, e, Some(q))
    };

    // Diagonal phases p with p^dagger T p real symmetric, off-diagonal |e_k|.
    let mut phases = vec![C64::new(1.0, 0.0); n];
    let mut e = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let mag = offdiag[k].norm();
        e[k] = mag;
        phases[k + 1] = if mag > 0.0 { phases[k] * (offdiag[k] / mag) } else { phases[k] };
    }

    let mut d = diag;
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql2(&mut d, &mut e, &mut z)?;

    // vectors = q * diag(phases) * z; z is stored column-major.
    let mut vectors = ComplexMatrix::zeros(n);
    match q {
        None => {
            for i in 0..n {
                for k in 0..n {
                    vectors[(i, k)] = phases[i] * z[k * n + i];
                }
            }
        }
        Some(q) => {
            let mut pz = ComplexMatrix::zeros(n);
            for i in 0..n {
                for k in 0..n {
                    pz[(i, k)] = phases[i] * z[k * n + i];
                }
            }
            vectors = q.matmul(&pz);
        }
    }
    Ok(Eigen { values: d, vectors })
}

/// Householder reduction of a Hermitian matrix: returns (diagonal,
/// complex subdiagonal, q) with `a = q T q^dagger`.
fn householder_tridiagonalize(h: &ComplexMatrix) -> (Vec<f64>, Vec<C64>, ComplexMatrix) {
    let n = h.dim();
    let zero = C64::new(0.0, 0.0);
    let mut a = h.clone();
    // Symmetrize against rounding in the input.
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
        for j in 0..i {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
    let mut q = ComplexMatrix::identity(n);

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let alpha = (x[0].norm_sqr() + tail).sqrt();
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { C64::new(1.0, 0.0) };
        let mut v = x;
        v[0] += phase * alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;

        // p = tau * A_sub v ; w = p - (tau/2)(v^dagger p) v ; A_sub -= v w^dagger + w v^dagger
        let mut p = vec![zero; m];
        for (r, pr) in p.iter_mut().enumerate() {
            let mut acc = zero;
            for (c, vc) in v.iter().enumerate() {
                acc += a[(k + 1 + r, k + 1 + c)] * vc;
            }
            *pr = acc * tau;
        }
        let vp: C64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        let kcoef = 0.5 * tau * vp.re;
        let w: Vec<C64> = p.iter().zip(&v).map(|(pi, vi)| pi - vi * kcoef).collect();
        for r in 0..m {
            for c in 0..m {
                a[(k + 1 + r, k + 1 + c)] -= v[r] * w[c].conj() + w[r] * v[c].conj();
            }
        }
        // Column k below the diagonal becomes (-phase*alpha, 0, ..., 0).
        a[(k + 1, k)] = -phase * alpha;
        a[(k, k + 1)] = (-phase * alpha).conj();
        for i in k + 2..n {
            a[(i, k)] = zero;
            a[(k, i)] = zero;
        }

        // q <- q (I - tau v v^dagger) on columns k+1..n
        for r in 0..n {
            let mut s = zero;
            for (c, vc) in v.iter().enumerate() {
                s += q[(r, k + 1 + c)] * vc;
            }
            s *= tau;
            for (c, vc) in v.iter().enumerate() {
                q[(r, k + 1 + c)] -= s * vc.conj();
            }
        }
    }

    let diag = (0..n).map(|i| a[(i, i)].re).collect();
    let off = (0..n.saturating_sub(1)).map(|i| a[(i + 1, i)]).collect();
    (diag, off, q)
}

/// Implicit QL on a real symmetric tridiagonal matrix (EISPACK tql2).
///
/// `d` holds the diagonal, `e[i]` the (i, i+1) element with `e[n-1]` ignored.
/// `z` is column-major and accumulates the rotations. On return `d` holds the
/// eigenvalues in ascending order and `z` the matching eigenvectors.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::NoConvergence);
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (left, right) = z.split_at_mut((i + 1) * n);
                    let col_i = &mut left[i * n..];
                    let col_i1 = &mut right[..n];
                    for (zi, zi1) in col_i.iter_mut().zip(col_i1.iter_mut()) {
                        let hh = *zi1;
                        *zi1 = s * *zi + c * hh;
                        *zi = c * *zi - s * hh;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Selection sort keeps eigenvector columns paired with their values.
    for i in 0..n - 1 {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d.swap(i, k);
            for r in 0..n {
                z.swap(i * n + r, k * n + r);
            }
        }
    }
    Ok(())
}


#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    fn hermitian(dim: usize, seed: &[f64]) -> ComplexMatrix {
        let mut h = ComplexMatrix::zeros(dim);
        let mut k = 0;
        let mut next = || {
            k += 1;
            seed[k % seed.len()] * (1.0 + (k as f64 * 0.618_033_988_7).fract())
        };
        for i in 0..dim {
            h[(i, i)] = C64::new(next(), 0.0);
            for j in i + 1..dim {
                let z = C64::new(next(), next());
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        h
    }

    fn orthonormality_error(e: &Eigen) -> f64 {
        e.vectors.adjoint().matmul(&e.vectors).max_abs_diff(&ComplexMatrix::identity(e.values.len()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn dense_round_trip(dim in 1usize..=101, seed in prop::collection::vec(-1.0f64..1.0, 7..23)) {
            let h = hermitian(dim, &seed);
            let e = hermitian_eigendecomposition(&h).unwrap();
            prop_assert!(e.reconstruct().max_abs_diff(&h) <= 1e-11);
            prop_assert!(orthonormality_error(&e) <= 1e-11);
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn tridiagonal_round_trip(dim in 1usize..=101, seed in prop::collection::vec(-3.0f64..3.0, 5..17)) {
            let full = hermitian(dim, &seed);
            let mut h = ComplexMatrix::zeros(dim);
            for i in 0..dim {
                h[(i, i)] = full[(i, i)];
                if i + 1 < dim {
                    h[(i, i + 1)] = full[(i, i + 1)];
                    h[(i + 1, i)] = full[(i + 1, i)];
                }
            }
            let e = hermitian_eigendecomposition(&h).unwrap();
            prop_assert!(e.reconstruct().max_abs_diff(&h) <= 1e-11);
            prop_assert!(orthonormality_error(&e) <= 1e-11);
        }

        #[test]
        fn eigenvalues_match_nalgebra(dim in 1usize..=40, seed in prop::collection::vec(-1.0f64..1.0, 7..23)) {
            let h = hermitian(dim, &seed);
            let mine = hermitian_eigendecomposition(&h).unwrap().values;
            let m = nalgebra::DMatrix::from_fn(dim, dim, |i, j| h[(i, j)]);
            let mut theirs: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            theirs.sort_by(f64::total_cmp);
            for (a, b) in mine.iter().zip(&theirs) {
                prop_assert!((a - b).abs() <= 1e-11, "{} vs {}", a, b);
            }
        }
    }

    #[test]
    fn propagation_is_unitary_and_composes() {
        let h = hermitian(9, &[0.3, -0.7, 0.2, 0.9, -0.4]);
        let e = hermitian_eigendecomposition(&h).unwrap();
        let mut psi = StateVector::from_amplitudes((0..9).map(|k| C64::new(1.0, k as f64 * 0.1)).collect());
        psi.normalize();
        let once = e.propagate(&psi, 0.2);
        let twice = e.propagate(&e.propagate(&psi, 0.1), 0.1);
        assert!((once.norm_sqr() - 1.0).abs() < 1e-13);
        let d: f64 = once.amplitudes().iter().zip(twice.amplitudes()).map(|(a, b)| (a - b).norm()).sum();
        assert!(d < 1e-13);
    }
}
