//! Spin quantum numbers and the spin-S operator algebra.
//!
//! The basis is the `S_z` eigenbasis in descending order: index 0 holds
//! m = S, index 2S holds m = -S. This is the only ordering used anywhere in
//! the crate.

use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector};

/// An integer or half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(n: i32) -> Self {
        HalfInt(2 * n)
    }

    /// Accepts exactly representable multiples of 1/2.
    pub fn from_f64(x: f64) -> Result<Self> {
        let twice = 2.0 * x;
        if !twice.is_finite() || twice.fract() != 0.0 || twice.abs() > i32::MAX as f64 {
            return Err(Error::NotHalfInteger(x));
        }
        Ok(HalfInt(twice as i32))
    }

    #[inline]
    pub const fn twice(self) -> i32 {
        self.0
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// Column-name friendly rendering: `10`, `9_5`, `-10`, `-0_5`.
    pub fn column_label(self) -> String {
        self.to_string().replace('.', "_")
    }
}

impl std::ops::Add<i32> for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: i32) -> HalfInt {
        HalfInt(self.0 + 2 * rhs)
    }
}

impl std::ops::Sub<i32> for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: i32) -> HalfInt {
        HalfInt(self.0 - 2 * rhs)
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            let sign = if self.0 < 0 { "-" } else { "" };
            write!(f, "{}{}.5", sign, self.0.abs() / 2)
        }
    }
}

/// Spin quantum number S, kept exact as 2S.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpinQuantumNumber {
    twice_s: u32,
}

impl SpinQuantumNumber {
    pub fn new(twice_s: u32) -> Result<Self> {
        if twice_s == 0 {
            return Err(Error::InvalidSpin(0));
        }
        Ok(Self { twice_s })
    }

    pub fn from_f64(s: f64) -> Result<Self> {
        let h = HalfInt::from_f64(s)?;
        if h.twice() < 1 {
            return Err(Error::InvalidSpin(0));
        }
        Self::new(h.twice() as u32)
    }

    #[inline]
    pub fn twice_s(self) -> u32 {
        self.twice_s
    }

    #[inline]
    pub fn s(self) -> f64 {
        self.twice_s as f64 / 2.0
    }

    #[inline]
    pub fn as_half_int(self) -> HalfInt {
        HalfInt::from_twice(self.twice_s as i32)
    }

    #[inline]
    pub fn dim(self) -> usize {
        self.twice_s as usize + 1
    }

    pub fn is_integer(self) -> bool {
        self.twice_s.is_multiple_of(2)
    }

    /// S(S+1)
    pub fn casimir(self) -> f64 {
        let ts = self.twice_s as f64;
        ts * (ts + 2.0) / 4.0
    }

    /// Ladder values m = S, S-1, ..., -S in basis order.
    pub fn ladder(self) -> impl DoubleEndedIterator<Item = HalfInt> + ExactSizeIterator {
        let ts = self.twice_s as i32;
        (0..self.dim()).map(move |i| HalfInt::from_twice(ts - 2 * i as i32))
    }

    pub fn contains(self, m: HalfInt) -> bool {
        let ts = self.twice_s as i32;
        m.twice().abs() <= ts && (ts - m.twice()) % 2 == 0
    }

    pub fn index_of(self, m: HalfInt) -> Result<usize> {
        if !self.contains(m) {
            return Err(self.off_ladder(m));
        }
        Ok(((self.twice_s as i32 - m.twice()) / 2) as usize)
    }

    pub fn m_at(self, index: usize) -> HalfInt {
        HalfInt::from_twice(self.twice_s as i32 - 2 * index as i32)
    }

    pub(crate) fn off_ladder(self, m: HalfInt) -> Error {
        Error::OffLadder { m: m.to_string(), s: self.as_half_int().to_string() }
    }
}

impl fmt::Display for SpinQuantumNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice_s.is_multiple_of(2) {
            write!(f, "{}", self.twice_s / 2)
        } else {
            write!(f, "{}/2", self.twice_s)
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpinOperatorSet {
    pub s: SpinQuantumNumber,
    pub sx: ComplexMatrix,
    pub sy: ComplexMatrix,
    pub sz: ComplexMatrix,
    pub s_plus: ComplexMatrix,
    pub s_minus: ComplexMatrix,
    /// `Sx^2 + Sy^2 + Sz^2`, formed by explicit products.
    pub casimir: ComplexMatrix,
}

impl SpinOperatorSet {
    pub fn dim(&self) -> usize {
        self.s.dim()
    }

    /// `Sz^2`, diagonal.
    pub fn sz_squared(&self) -> ComplexMatrix {
        self.sz.matmul(&self.sz)
    }
}

/// Builds Sx, Sy, Sz, S+, S- and the Casimir for spin `s`.
///
/// `<m+1|S+|m> = sqrt((S-m)(S+m+1))`, evaluated from integer arithmetic on
/// 2S and 2m so that every element is the correctly rounded square root.
pub fn make_operators(s: SpinQuantumNumber) -> Result<SpinOperatorSet> {
    if s.twice_s() == 0 {
        return Err(Error::InvalidSpin(0));
    }
    let n = s.dim();
    let ts = s.twice_s() as i64;

    let sz = ComplexMatrix::from_real_diagonal(&s.ladder().map(HalfInt::value).collect::<Vec<_>>());

    let mut s_plus = ComplexMatrix::zeros(n);
    for i in 1..n {
        // column i holds m = S - i; S+ maps it to row i-1 (m+1)
        let tm = ts - 2 * i as i64;
        let four_x = (ts - tm) * (ts + tm + 2);
        s_plus[(i - 1, i)] = C64::new((four_x as f64).sqrt() / 2.0, 0.0);
    }
    let s_minus = s_plus.adjoint();

    let half = C64::new(0.5, 0.0);
    let sx = (&s_plus + &s_minus).scale(half);
    // (S+ - S-) / (2i) = -i/2 (S+ - S-)
    let sy = (&s_plus - &s_minus).scale(C64::new(0.0, -0.5));

    let casimir = &(&sx.matmul(&sx) + &sy.matmul(&sy)) + &sz.matmul(&sz);

    Ok(SpinOperatorSet { s, sx, sy, sz, s_plus, s_minus, casimir })
}

/// The `S_z` eigenstate |m>.
pub fn basis_state(s: SpinQuantumNumber, m: HalfInt) -> Result<StateVector> {
    let idx = s.index_of(m)?;
    let mut amps = vec![C64::new(0.0, 0.0); s.dim()];
    amps[idx] = C64::new(1.0, 0.0);
    Ok(StateVector::from_amplitudes(amps))
}

/// `<psi|op|psi>` for Hermitian `op`.
///
/// Fails if the imaginary part exceeds rounding level, which means `op`
/// was not Hermitian.
pub fn expectation(op: &ComplexMatrix, psi: &StateVector) -> Result<f64> {
    let n = op.dim();
    if psi.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: psi.dim() });
    }
    let a = psi.amplitudes();
    let m = op.as_slice();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        let row = &m[i * n..(i + 1) * n];
        let mut r = C64::new(0.0, 0.0);
        for (x, y) in row.iter().zip(a) {
            r += x * y;
        }
        acc += a[i].conj() * r;
    }
    let tol = 1e-12 * op.max_abs().max(1.0) * psi.norm_sqr().max(1.0);
    if acc.im.abs() > tol {
        return Err(Error::NonHermitian(acc.im.abs()));
    }
    Ok(acc.re)
}


#[cfg(test)]
mod properties {
    use super::*;
    use num_complex::Complex64 as C64;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn commutators_and_casimir(twice in 1u32..=101) {
            let s = SpinQuantumNumber::new(twice).unwrap();
            let ops = make_operators(s).unwrap();
            let i = C64::new(0.0, 1.0);
            let scale = s.casimir();
            let tol = 1e-12 * scale;
            prop_assert!(ops.sx.commutator(&ops.sy).max_abs_diff(&ops.sz.scale(i)) <= tol);
            prop_assert!(ops.sy.commutator(&ops.sz).max_abs_diff(&ops.sx.scale(i)) <= tol);
            prop_assert!(ops.sz.commutator(&ops.sx).max_abs_diff(&ops.sy.scale(i)) <= tol);
            let id = ComplexMatrix::identity(s.dim()).scale_real(s.casimir());
            prop_assert!(ops.casimir.max_abs_diff(&id) <= tol);
            prop_assert!(ops.s_plus.adjoint().max_abs_diff(&ops.s_minus) == 0.0);
            prop_assert!(ops.sx.is_hermitian(0.0) && ops.sy.is_hermitian(0.0) && ops.sz.is_hermitian(0.0));
        }

        #[test]
        fn ladder_indexing_round_trips(twice in 1u32..=101) {
            let s = SpinQuantumNumber::new(twice).unwrap();
            prop_assert_eq!(s.ladder().len(), s.dim());
            for (k, m) in s.ladder().enumerate() {
                prop_assert_eq!(s.index_of(m).unwrap(), k);
                prop_assert_eq!(s.m_at(k), m);
            }
            prop_assert!(s.index_of(s.as_half_int() + 1).is_err());
        }
    }
}
