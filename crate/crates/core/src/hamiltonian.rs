//! Static anisotropy Hamiltonian, ladder transition frequencies, and the
//! circularly polarized drive terms in the lab and rotating frames.
//!
//! Units: hbar = 1; energies, fields and frequencies share one unit and time
//! is measured in its inverse. The drive enters as
//! `-h_ac * (a(t) Sx + b(t) Sy)` where each ladder component contributes
//! `(sin(w t), cos(w t))` to `(a, b)`. This sign and phase convention is
//! fixed.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::spin::{HalfInt, SpinOperatorSet, SpinQuantumNumber};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StaticModel {
    pub s: SpinQuantumNumber,
    /// Anisotropy constant D >= 0.
    pub d: f64,
    /// Longitudinal field H_z.
    pub hz: f64,
}

impl StaticModel {
    pub fn new(s: SpinQuantumNumber, d: f64, hz: f64) -> Result<Self> {
        if !d.is_finite() || d < 0.0 {
            return Err(Error::InvalidParameter(format!("anisotropy d must be finite and >= 0, got {d}")));
        }
        if !hz.is_finite() {
            return Err(Error::InvalidParameter(format!("hz must be finite, got {hz}")));
        }
        Ok(Self { s, d, hz })
    }

    /// Lowest m with a transition below it, i.e. -S + 1.
    pub fn lowest_upper_level(&self) -> HalfInt {
        -self.s.as_half_int() + 1
    }

    /// Diagonal of `-D Sz^2 - Hz Sz` in basis order.
    pub fn static_diagonal(&self) -> Vec<f64> {
        self.s.ladder().map(|m| level_energy_unchecked(self, m)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Frame {
    Lab,
    Rotating,
}

impl Frame {
    pub fn as_str(self) -> &'static str {
        match self {
            Frame::Lab => "lab",
            Frame::Rotating => "rotating",
        }
    }
}

impl std::str::FromStr for Frame {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lab" => Ok(Frame::Lab),
            "rotating" => Ok(Frame::Rotating),
            other => Err(Error::InvalidParameter(format!("unknown frame '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DriveForm {
    /// Components w_{m->m-1} for m = S down to `s_prime`, summed term by term.
    ExplicitSum { s_prime: HalfInt },
    /// All 2S components through the closed form f(t); needs D > 0.
    CompactKernel,
    /// One component at w_{m->m-1}.
    SingleFrequency { m: HalfInt },
    /// D = 0: all 2S components coincide at frequency Hz, amplitude 2S h_ac.
    RabiFlat,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveSpec {
    pub form: DriveForm,
    pub h_ac: f64,
    pub frame: Frame,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BarrierProfile {
    /// (m, E_m - E_min) in basis order.
    pub levels: Vec<(HalfInt, f64)>,
    pub e_min: f64,
}

impl BarrierProfile {
    pub fn height(&self) -> f64 {
        self.levels.iter().map(|&(_, e)| e).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn level_energy_unchecked(model: &StaticModel, m: HalfInt) -> f64 {
    let m = m.value();
    -model.d * m * m - model.hz * m
}

/// `E_m = -D m^2 - Hz m`
pub fn level_energy(model: &StaticModel, m: HalfInt) -> Result<f64> {
    if !model.s.contains(m) {
        return Err(model.s.off_ladder(m));
    }
    Ok(level_energy_unchecked(model, m))
}

/// `w_{m->m-1} = E_{m-1} - E_m = Hz + D (2m - 1)`, for m = S, ..., -S+1.
pub fn transition_frequency(model: &StaticModel, m: HalfInt) -> Result<f64> {
    if !model.s.contains(m) || m == -model.s.as_half_int() {
        return Err(model.s.off_ladder(m));
    }
    Ok(model.hz + model.d * (m.twice() - 1) as f64)
}

pub fn barrier_profile(model: &StaticModel) -> BarrierProfile {
    let s = model.s.s();
    let e_min = -model.d * s * s - model.hz * s;
    let levels = model.s.ladder().map(|m| (m, level_energy_unchecked(model, m) - e_min)).collect();
    BarrierProfile { levels, e_min }
}

const PI_LO: f64 = 1.224_646_799_147_353_2e-16;

/// Below this |sin(D t)| the kernel is summed term by term.
const KERNEL_RATIO_CUTOFF: f64 = 1e-8;

/// `f(t) = sin(2 D S t) / sin(D t)`, the sum of `exp(i (2m - 1) D t)` over
/// m = S, ..., -S+1.
///
/// The argument is reduced to `D t = k pi + r` with |r| <= pi/2 before
/// evaluation; `f(kpi + r) = (-1)^(k (2S - 1)) f(r)` holds exactly since 2S is
/// an integer. Without the reduction the ratio loses about seven digits a
/// distance 1e-6 from a singular point.
pub fn eval_f(s: SpinQuantumNumber, d: f64, t: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InconsistentDrive(format!("f(t) needs D > 0 (got {d}); use the flat Rabi drive at D = 0")));
    }
    let x = d * t;
    let k = (x / PI).round();
    let r = (-k).mul_add(PI, x) - k * PI_LO;
    let twice_s = s.twice_s();
    let odd = (k.rem_euclid(2.0) == 1.0) && (twice_s - 1) % 2 == 1;
    let sign = if odd { -1.0 } else { 1.0 };

    let sr = r.sin();
    let core =
        if sr.abs() > KERNEL_RATIO_CUTOFF { (twice_s as f64 * r).sin() / sr } else { kernel_cosine_sum(twice_s, r) };
    Ok(sign * core)
}

/// `sum_{m=S}^{-S+1} cos((2m - 1) x)`
fn kernel_cosine_sum(twice_s: u32, x: f64) -> f64 {
    let ts = twice_s as i32;
    (0..twice_s as i32)
        .map(|i| {
            let twice_m = ts - 2 * i;
            ((twice_m - 1) as f64 * x).cos()
        })
        .sum()
}

fn ladder_components(model: &StaticModel, from: HalfInt, to: HalfInt) -> impl Iterator<Item = f64> + '_ {
    let n = (from.twice() - to.twice()) / 2 + 1;
    (0..n).map(move |i| model.hz + model.d * (from.twice() - 2 * i - 1) as f64)
}

/// Checks that `drive` is meaningful for `model`, independent of frame.
pub fn validate_drive(model: &StaticModel, drive: &DriveSpec) -> Result<()> {
    if !(drive.h_ac > 0.0) || !drive.h_ac.is_finite() {
        return Err(Error::InvalidParameter(format!("h_ac must be > 0, got {}", drive.h_ac)));
    }
    let top = model.s.as_half_int();
    let bottom = model.lowest_upper_level();
    match drive.form {
        DriveForm::ExplicitSum { s_prime } => {
            if !model.s.contains(s_prime) || s_prime < bottom {
                return Err(Error::InconsistentDrive(format!("s' = {s_prime} outside [{bottom}, {top}]")));
            }
        }
        DriveForm::SingleFrequency { m } => {
            if !model.s.contains(m) || m < bottom {
                return Err(Error::InconsistentDrive(format!("m = {m} outside [{bottom}, {top}]")));
            }
        }
        DriveForm::CompactKernel => {
            if !(model.d > 0.0) {
                return Err(Error::InconsistentDrive("compact kernel needs D > 0".into()));
            }
        }
        DriveForm::RabiFlat => {
            if model.d != 0.0 {
                return Err(Error::InconsistentDrive(format!("flat Rabi drive needs D = 0, got {}", model.d)));
            }
        }
    }
    Ok(())
}

/// Lab-frame drive coefficients `(a(t), b(t))` multiplying Sx and Sy.
pub fn drive_coefficients(model: &StaticModel, drive: &DriveSpec, t: f64) -> Result<(f64, f64)> {
    validate_drive(model, drive)?;
    drive_coefficients_unchecked(model, drive, t)
}

fn drive_coefficients_unchecked(model: &StaticModel, drive: &DriveSpec, t: f64) -> Result<(f64, f64)> {
    let top = model.s.as_half_int();
    Ok(match drive.form {
        DriveForm::ExplicitSum { s_prime } => ladder_components(model, top, s_prime)
            .map(|w| (w * t).sin_cos())
            .fold((0.0, 0.0), |(a, b), (s, c)| (a + s, b + c)),
        DriveForm::SingleFrequency { m } => {
            let w = model.hz + model.d * (m.twice() - 1) as f64;
            (w * t).sin_cos()
        }
        DriveForm::CompactKernel => {
            let f = eval_f(model.s, model.d, t)?;
            let (s, c) = (model.hz * t).sin_cos();
            (f * s, f * c)
        }
        DriveForm::RabiFlat => {
            let amp = model.s.twice_s() as f64;
            let (s, c) = (model.hz * t).sin_cos();
            (amp * s, amp * c)
        }
    })
}

/// Rotating-frame drive coefficient g(t) in `-h_ac g(t) Sy`.
fn rotating_coefficient(model: &StaticModel, drive: &DriveSpec, t: f64) -> Result<f64> {
    let full_ladder = match drive.form {
        DriveForm::CompactKernel | DriveForm::RabiFlat => true,
        DriveForm::ExplicitSum { s_prime } => s_prime == model.lowest_upper_level(),
        DriveForm::SingleFrequency { .. } => false,
    };
    if !full_ladder {
        return Err(Error::InconsistentDrive("rotating frame is defined only for the full ladder".into()));
    }
    if model.d == 0.0 {
        Ok(model.s.twice_s() as f64)
    } else {
        eval_f(model.s, model.d, t)
    }
}

/// Time-dependent Hamiltonian for a validated (model, drive) pair.
///
/// Built once per run; `at(t)` assembles the dense matrix directly from the
/// tridiagonal structure.
#[derive(Clone, Debug)]
pub struct DrivenHamiltonian<'a> {
    model: StaticModel,
    drive: DriveSpec,
    ops: &'a SpinOperatorSet,
    diagonal: Vec<f64>,
}

impl<'a> DrivenHamiltonian<'a> {
    pub fn new(model: StaticModel, drive: DriveSpec, ops: &'a SpinOperatorSet) -> Result<Self> {
        if ops.dim() != model.s.dim() {
            return Err(Error::DimensionMismatch { expected: model.s.dim(), got: ops.dim() });
        }
        validate_drive(&model, &drive)?;
        let diagonal = match drive.frame {
            Frame::Lab => model.static_diagonal(),
            Frame::Rotating => {
                rotating_coefficient(&model, &drive, 0.0)?;
                model.s.ladder().map(|m| -model.d * m.value() * m.value()).collect()
            }
        };
        Ok(Self { model, drive, ops, diagonal })
    }

    pub fn frame(&self) -> Frame {
        self.drive.frame
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn h_ac(&self) -> f64 {
        self.drive.h_ac
    }

    /// Diagonal (time-independent) part in basis order.
    pub fn static_diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// `(a, b)` with drive term `-h_ac (a Sx + b Sy)` in this frame.
    pub fn drive_at(&self, t: f64) -> Result<(f64, f64)> {
        match self.drive.frame {
            Frame::Lab => drive_coefficients_unchecked(&self.model, &self.drive, t),
            Frame::Rotating => Ok((0.0, rotating_coefficient(&self.model, &self.drive, t)?)),
        }
    }

    pub fn at(&self, t: f64) -> Result<ComplexMatrix> {
        let (a, b) = self.drive_at(t)?;
        let mut h = ComplexMatrix::from_real_diagonal(&self.diagonal);
        let h_ac = self.drive.h_ac;
        let n = self.dim();
        for i in 0..n.saturating_sub(1) {
            for (r, c) in [(i, i + 1), (i + 1, i)] {
                h[(r, c)] = -h_ac * (a * self.ops.sx[(r, c)] + b * self.ops.sy[(r, c)]);
            }
        }
        Ok(h)
    }
}

/// `-D Sz^2 - Hz Sz - h_ac (a(t) Sx + b(t) Sy)`.
pub fn lab_hamiltonian(model: &StaticModel, drive: &DriveSpec, ops: &SpinOperatorSet, t: f64) -> Result<ComplexMatrix> {
    if drive.frame != Frame::Lab {
        return Err(Error::InconsistentDrive("lab_hamiltonian needs frame = lab".into()));
    }
    DrivenHamiltonian::new(*model, *drive, ops)?.at(t)
}

/// `-D Sz^2 - h_ac f(t) Sy`, the full-ladder Hamiltonian after removing
/// `exp(i Hz Sz t)`. Hz does not enter.
pub fn rotating_hamiltonian(
    model: &StaticModel,
    drive: &DriveSpec,
    ops: &SpinOperatorSet,
    t: f64,
) -> Result<ComplexMatrix> {
    if drive.frame != Frame::Rotating {
        return Err(Error::InconsistentDrive("rotating_hamiltonian needs frame = rotating".into()));
    }
    DrivenHamiltonian::new(*model, *drive, ops)?.at(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::make_operators;
    use num_complex::Complex64 as C64;

    fn s10() -> SpinQuantumNumber {
        SpinQuantumNumber::new(20).unwrap()
    }

    fn model(d: f64, hz: f64) -> StaticModel {
        StaticModel::new(s10(), d, hz).unwrap()
    }

    #[test]
    fn level_energies() {
        let m = model(0.1, 0.0);
        assert_eq!(level_energy(&m, HalfInt::from_int(10)).unwrap(), -10.0);
        assert_eq!(level_energy(&m, HalfInt::from_int(0)).unwrap(), 0.0);
        let m = model(0.1, 0.2);
        let low = level_energy(&m, HalfInt::from_int(-10)).unwrap();
        let high = level_energy(&m, HalfInt::from_int(10)).unwrap();
        assert!((low - -8.0).abs() < 1e-12);
        assert!((low - high - 4.0).abs() < 1e-12);
        assert!(level_energy(&m, HalfInt::from_twice(3)).is_err());
    }

    #[test]
    fn transition_frequencies() {
        let m = model(0.1, 0.0);
        assert!((transition_frequency(&m, HalfInt::from_int(10)).unwrap() - 1.9).abs() < 1e-15);
        assert!(transition_frequency(&m, HalfInt::from_int(-10)).is_err());
        for k in -9..=10 {
            let a = transition_frequency(&m, HalfInt::from_int(k)).unwrap();
            let b = transition_frequency(&m, HalfInt::from_int(-k + 1)).unwrap();
            assert!((a + b).abs() < 1e-15, "k = {k}");
        }
        let flat = model(0.0, 0.3);
        for k in -9..=10 {
            assert_eq!(transition_frequency(&flat, HalfInt::from_int(k)).unwrap(), 0.3);
        }
    }

    #[test]
    fn barrier_profiles() {
        let p = barrier_profile(&model(0.1, 0.0));
        assert_eq!(p.levels[0], (HalfInt::from_int(10), 0.0));
        assert_eq!(p.levels[20], (HalfInt::from_int(-10), 0.0));
        assert!((p.levels[10].1 - 10.0).abs() < 1e-12);
        assert!((p.height() - 10.0).abs() < 1e-12);

        let p = barrier_profile(&model(0.1, 0.2));
        assert_eq!(p.levels[0].1, 0.0);
        assert!(p.levels[1..].iter().all(|&(_, e)| e > 0.0));
        assert!((p.levels[20].1 - 4.0).abs() < 1e-12);

        let p = barrier_profile(&model(0.0, 0.0));
        assert!(p.levels.iter().all(|&(_, e)| e == 0.0));
    }

    #[test]
    fn half_integer_barrier_peaks_at_plus_minus_half() {
        let m = StaticModel::new(SpinQuantumNumber::new(19).unwrap(), 0.1, 0.0).unwrap();
        let p = barrier_profile(&m);
        let h = p.height();
        let tops: Vec<_> = p.levels.iter().filter(|&&(_, e)| e == h).map(|&(m, _)| m).collect();
        assert_eq!(tops, vec![HalfInt::from_twice(1), HalfInt::from_twice(-1)]);
    }

    #[test]
    fn kernel_special_values() {
        assert_eq!(eval_f(s10(), 0.1, 0.0).unwrap(), 20.0);
        let at_pi = eval_f(s10(), 0.1, PI / 0.1).unwrap();
        assert!((at_pi + 20.0).abs() < 1e-9, "{at_pi}");
        let s19 = SpinQuantumNumber::new(19).unwrap();
        assert!((eval_f(s19, 0.1, PI / 0.1).unwrap() - 19.0).abs() < 1e-9);
        assert!(eval_f(s10(), 0.0, 1.0).is_err());
    }

    #[test]
    fn kernel_matches_explicit_sum_near_singular_points() {
        // brute-force oracle: direct sum over the ladder
        let oracle = |twice_s: i32, d: f64, t: f64| -> f64 {
            (0..twice_s).map(|i| (((twice_s - 2 * i - 1) as f64) * d * t).cos()).sum()
        };
        for twice in [2u32, 19, 20] {
            let s = SpinQuantumNumber::new(twice).unwrap();
            for k in 0..6 {
                for off in [0.0, 1e-12, -1e-9, 1e-6, -1e-6, 1e-3] {
                    let t = k as f64 * PI / 0.1 + off;
                    let f = eval_f(s, 0.1, t).unwrap();
                    let g = oracle(twice as i32, 0.1, t);
                    assert!((f - g).abs() < 1e-10, "2S={twice} k={k} off={off}: {f} vs {g}");
                }
            }
        }
    }

    #[test]
    fn single_frequency_drive_at_zero_is_minus_h_sy() {
        let ops = make_operators(s10()).unwrap();
        let m = model(0.1, 0.0);
        let drive =
            DriveSpec { form: DriveForm::SingleFrequency { m: HalfInt::from_int(10) }, h_ac: 0.005, frame: Frame::Lab };
        let h = lab_hamiltonian(&m, &drive, &ops, 0.0).unwrap();
        let mut expect = ComplexMatrix::from_real_diagonal(&m.static_diagonal());
        expect.add_scaled(C64::new(-0.005, 0.0), &ops.sy);
        assert!(h.max_abs_diff(&expect) < 1e-16);
    }

    #[test]
    fn flat_drive_coefficients() {
        let m = model(0.0, 0.1);
        let drive = DriveSpec { form: DriveForm::RabiFlat, h_ac: 0.005, frame: Frame::Lab };
        let (a, b) = drive_coefficients(&m, &drive, 3.0).unwrap();
        assert!((a - 20.0 * (0.3f64).sin()).abs() < 1e-14);
        assert!((b - 20.0 * (0.3f64).cos()).abs() < 1e-14);
    }

    #[test]
    fn inconsistent_drives_are_rejected() {
        let ops = make_operators(s10()).unwrap();
        let compact = DriveSpec { form: DriveForm::CompactKernel, h_ac: 0.005, frame: Frame::Lab };
        assert!(lab_hamiltonian(&model(0.0, 0.1), &compact, &ops, 0.0).is_err());
        let flat = DriveSpec { form: DriveForm::RabiFlat, h_ac: 0.005, frame: Frame::Lab };
        assert!(lab_hamiltonian(&model(0.1, 0.1), &flat, &ops, 0.0).is_err());
        let partial = DriveSpec {
            form: DriveForm::ExplicitSum { s_prime: HalfInt::from_int(3) },
            h_ac: 0.005,
            frame: Frame::Rotating,
        };
        assert!(rotating_hamiltonian(&model(0.1, 0.0), &partial, &ops, 0.0).is_err());
        let low = DriveSpec {
            form: DriveForm::ExplicitSum { s_prime: HalfInt::from_int(-10) },
            h_ac: 0.005,
            frame: Frame::Lab,
        };
        assert!(lab_hamiltonian(&model(0.1, 0.0), &low, &ops, 0.0).is_err());
        let wrong_frame = DriveSpec { frame: Frame::Rotating, ..compact };
        assert!(lab_hamiltonian(&model(0.1, 0.0), &wrong_frame, &ops, 0.0).is_err());
    }

    #[test]
    fn rotating_hamiltonian_at_zero() {
        let ops = make_operators(s10()).unwrap();
        let drive = DriveSpec { form: DriveForm::CompactKernel, h_ac: 0.005, frame: Frame::Rotating };
        let h = rotating_hamiltonian(&model(0.1, 0.3), &drive, &ops, 0.0).unwrap();
        let mut expect = ops.sz_squared().scale_real(-0.1);
        expect.add_scaled(C64::new(-0.1, 0.0), &ops.sy);
        assert!(h.max_abs_diff(&expect) < 1e-15);
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use crate::spin::make_operators;
    use proptest::prelude::*;

    fn spin(twice: u32) -> SpinQuantumNumber {
        SpinQuantumNumber::new(twice).unwrap()
    }

    fn forms(model: &StaticModel) -> Vec<DriveForm> {
        vec![
            DriveForm::ExplicitSum { s_prime: model.lowest_upper_level() },
            DriveForm::ExplicitSum { s_prime: model.s.as_half_int() },
            DriveForm::CompactKernel,
            DriveForm::SingleFrequency { m: model.s.as_half_int() },
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn hamiltonians_are_hermitian(twice in 1u32..=21, d in 0.01f64..1.0, hz in -1.0f64..1.0, t in 0.0f64..5000.0) {
            let model = StaticModel::new(spin(twice), d, hz).unwrap();
            let ops = make_operators(model.s).unwrap();
            for form in forms(&model) {
                let drive = DriveSpec { form, h_ac: 0.005, frame: Frame::Lab };
                let h = DrivenHamiltonian::new(model, drive, &ops).unwrap().at(t).unwrap();
                prop_assert!(h.is_hermitian(0.0));
            }
            let drive = DriveSpec { form: DriveForm::CompactKernel, h_ac: 0.005, frame: Frame::Rotating };
            prop_assert!(DrivenHamiltonian::new(model, drive, &ops).unwrap().at(t).unwrap().is_hermitian(0.0));
        }

        #[test]
        fn rotating_frame_ignores_hz(twice in 1u32..=21, d in 0.01f64..1.0, t in 0.0f64..5000.0) {
            let ops = make_operators(spin(twice)).unwrap();
            let drive = DriveSpec { form: DriveForm::CompactKernel, h_ac: 0.005, frame: Frame::Rotating };
            let a = StaticModel::new(spin(twice), d, 0.0).unwrap();
            let b = StaticModel::new(spin(twice), d, 0.7).unwrap();
            let ha = DrivenHamiltonian::new(a, drive, &ops).unwrap().at(t).unwrap();
            let hb = DrivenHamiltonian::new(b, drive, &ops).unwrap().at(t).unwrap();
            prop_assert_eq!(ha, hb);
        }

        #[test]
        fn kernel_is_continuous_through_singular_points(twice in 1u32..=41, d in 0.01f64..1.0, k in 0i32..200) {
            let s = spin(twice);
            let t0 = k as f64 * std::f64::consts::PI / d;
            let f0 = eval_f(s, d, t0).unwrap();
            // |f'| <= sum |(2m - 1) D| <= (2S)^2 D
            let slope = (twice as f64).powi(2) * d;
            for eps in [1e-12, 1e-9, 1e-6] {
                for t in [t0 - eps, t0 + eps] {
                    if t >= 0.0 {
                        let f = eval_f(s, d, t).unwrap();
                        prop_assert!((f - f0).abs() <= slope * eps + 1e-9 * twice as f64, "{} {} {}", t, f, f0);
                    }
                }
            }
        }

        #[test]
        fn ladder_frequencies_telescope(twice in 2u32..=41, d in 0.0f64..1.0, hz in -1.0f64..1.0, depth in 0usize..40) {
            let model = StaticModel::new(spin(twice), d, hz).unwrap();
            let top = model.s.as_half_int();
            let depth = depth.min(twice as usize - 1) as i32;
            let sum: f64 = (0..=depth).map(|i| transition_frequency(&model, top - i).unwrap()).sum();
            let s_prime = top - depth;
            let expected = level_energy(&model, s_prime - 1).unwrap() - level_energy(&model, top).unwrap();
            prop_assert!((sum - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
        }
    }
}
