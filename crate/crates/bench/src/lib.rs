//! Shared fixtures for the benchmarks.

use spinladder_core::hamiltonian::StaticModel;
use spinladder_core::protocols::full_gqoab_protocol;
use spinladder_core::{DriveProtocol, Frame, SpinQuantumNumber};

/// Full-ladder drive for spin `twice_s / 2` at D = 0.1, Hz = 0.2, h_ac = 0.005.
pub fn full_ladder(twice_s: u32, frame: Frame) -> DriveProtocol {
    let s = SpinQuantumNumber::new(twice_s).expect("2S >= 1");
    let model = StaticModel::new(s, 0.1, 0.2).expect("valid model");
    full_gqoab_protocol(model, 0.005, frame).expect("valid drive")
}
