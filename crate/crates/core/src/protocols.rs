//! Named drive protocols and pulse timing.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hamiltonian::{transition_frequency, validate_drive, DriveForm, DriveSpec, Frame, StaticModel};
use crate::spin::{HalfInt, SpinQuantumNumber};

#[derive(Clone, Debug, PartialEq)]
pub struct DriveProtocol {
    pub model: StaticModel,
    pub drive: DriveSpec,
    pub label: String,
    /// Every ladder frequency the drive contains, listed from m = S downwards.
    pub frequency_list: Vec<f64>,
}

impl DriveProtocol {
    pub fn s(&self) -> SpinQuantumNumber {
        self.model.s
    }

    /// Largest |w| among the drive components.
    pub fn max_abs_frequency(&self) -> f64 {
        self.frequency_list.iter().fold(0.0, |acc, w| acc.max(w.abs()))
    }

    /// Amplitude of the effective two-level coupling that sets the reversal
    /// time scale: 2S h_ac for the flat Rabi drive, h_ac otherwise.
    pub fn effective_amplitude(&self) -> f64 {
        match self.drive.form {
            DriveForm::RabiFlat => self.model.s.twice_s() as f64 * self.drive.h_ac,
            _ => self.drive.h_ac,
        }
    }

    /// Same protocol with the drive expressed in another frame. Only full
    /// ladders have a rotating-frame form.
    pub fn in_frame(&self, frame: Frame) -> Result<Self> {
        let mut p = self.clone();
        p.drive.frame = frame;
        if frame == Frame::Rotating {
            let full = match p.drive.form {
                DriveForm::CompactKernel | DriveForm::RabiFlat => true,
                DriveForm::ExplicitSum { s_prime } => s_prime == p.model.lowest_upper_level(),
                DriveForm::SingleFrequency { .. } => false,
            };
            if !full {
                return Err(Error::InconsistentDrive(format!("{} has no rotating-frame form", p.label)));
            }
        }
        Ok(p)
    }
}

fn ladder_frequencies(model: &StaticModel, s_prime: HalfInt) -> Result<Vec<f64>> {
    let top = model.s.as_half_int();
    let n = (top.twice() - s_prime.twice()) / 2 + 1;
    (0..n).map(|i| transition_frequency(model, top - i)).collect()
}

pub fn single_resonance_protocol(model: StaticModel, m: HalfInt, h_ac: f64) -> Result<DriveProtocol> {
    let w = transition_frequency(&model, m)?;
    let drive = DriveSpec { form: DriveForm::SingleFrequency { m }, h_ac, frame: Frame::Lab };
    validate_drive(&model, &drive)?;
    Ok(DriveProtocol { model, drive, label: format!("single({}->{})", m, m - 1), frequency_list: vec![w] })
}

/// Components w_{m->m-1} for m = S down to `s_prime`, summed explicitly in
/// the lab frame.
pub fn ladder_protocol(model: StaticModel, s_prime: HalfInt, h_ac: f64) -> Result<DriveProtocol> {
    let drive = DriveSpec { form: DriveForm::ExplicitSum { s_prime }, h_ac, frame: Frame::Lab };
    validate_drive(&model, &drive)?;
    let frequency_list = ladder_frequencies(&model, s_prime)?;
    Ok(DriveProtocol { model, drive, label: format!("ladder(s'={s_prime})"), frequency_list })
}

/// All 2S ladder components through the compact kernel.
pub fn full_gqoab_protocol(model: StaticModel, h_ac: f64, frame: Frame) -> Result<DriveProtocol> {
    if !(model.d > 0.0) {
        return Err(Error::InconsistentDrive("full ladder protocol needs D > 0".into()));
    }
    let drive = DriveSpec { form: DriveForm::CompactKernel, h_ac, frame };
    validate_drive(&model, &drive)?;
    let frequency_list = ladder_frequencies(&model, model.lowest_upper_level())?;
    Ok(DriveProtocol { model, drive, label: "full-gqoab".into(), frequency_list })
}

/// D = 0 resonant drive at w = Hz with effective amplitude 2S h_ac.
pub fn rabi_protocol(s: SpinQuantumNumber, hz: f64, h_ac: f64) -> Result<DriveProtocol> {
    let model = StaticModel::new(s, 0.0, hz)?;
    let drive = DriveSpec { form: DriveForm::RabiFlat, h_ac, frame: Frame::Lab };
    validate_drive(&model, &drive)?;
    if hz == 0.0 {
        log::warn!("flat Rabi drive with Hz = 0 has no rotation frequency");
    }
    Ok(DriveProtocol { model, drive, label: "rabi-d0".into(), frequency_list: vec![hz; s.twice_s() as usize] })
}

/// Half a Rabi period, `pi / h_ac`.
pub fn pi_pulse_duration(h_ac: f64) -> Result<f64> {
    if !(h_ac > 0.0) || !h_ac.is_finite() {
        return Err(Error::InvalidParameter(format!("h_ac must be > 0, got {h_ac}")));
    }
    Ok(PI / h_ac)
}
