//! Observables along a trajectory, reversal periods, and parameter sweeps.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{Frame, StaticModel};
use crate::integrator::{evolve_with_convergence, evolve_with_ops, IntegratorConfig, Trajectory};
use crate::linalg::StateVector;
use crate::protocols::{full_gqoab_protocol, ladder_protocol, rabi_protocol, single_resonance_protocol, DriveProtocol};
use crate::spin::{basis_state, expectation, make_operators, HalfInt, SpinOperatorSet, SpinQuantumNumber};

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSeries {
    pub s: SpinQuantumNumber,
    pub times: Vec<f64>,
    pub sx: Vec<f64>,
    pub sy: Vec<f64>,
    pub sz: Vec<f64>,
    /// `<Sx>^2 + <Sy>^2 + <Sz>^2`
    pub s_fidelity: Vec<f64>,
    /// `<Sx^2 + Sy^2 + Sz^2>`
    pub s_total: Vec<f64>,
    pub norm: Vec<f64>,
    /// Ladder levels in basis order (m = S first).
    pub levels: Vec<HalfInt>,
    /// `populations[i][k]` is `|<m_i|psi(t_k)>|^2`.
    pub populations: Vec<Vec<f64>>,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `min <Sz> / S` over the whole series.
    pub fn min_reduced_sz(&self) -> f64 {
        self.sz.iter().copied().fold(f64::INFINITY, f64::min) / self.s.s()
    }

    /// Largest `|s_total - S(S+1)|`.
    pub fn casimir_deviation(&self) -> f64 {
        let c = self.s.casimir();
        self.s_total.iter().fold(0.0, |acc, v| acc.max((v - c).abs()))
    }

    /// `max - min` of the spin fidelity.
    pub fn fidelity_range(&self) -> f64 {
        let (lo, hi) =
            self.s_fidelity.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if lo > hi {
            0.0
        } else {
            hi - lo
        }
    }
}

pub fn observables(traj: &Trajectory, ops: &SpinOperatorSet) -> Result<ObservableSeries> {
    let n = traj.states.len();
    let dim = ops.dim();
    let mut out = ObservableSeries {
        s: ops.s,
        times: traj.times.clone(),
        sx: Vec::with_capacity(n),
        sy: Vec::with_capacity(n),
        sz: Vec::with_capacity(n),
        s_fidelity: Vec::with_capacity(n),
        s_total: Vec::with_capacity(n),
        norm: Vec::with_capacity(n),
        levels: ops.s.ladder().collect(),
        populations: vec![Vec::with_capacity(n); dim],
    };
    for psi in &traj.states {
        if psi.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: psi.dim() });
        }
        let (x, y, z) = (expectation(&ops.sx, psi)?, expectation(&ops.sy, psi)?, expectation(&ops.sz, psi)?);
        out.sx.push(x);
        out.sy.push(y);
        out.sz.push(z);
        out.s_fidelity.push(x * x + y * y + z * z);
        out.s_total.push(expectation(&ops.casimir, psi)?);
        out.norm.push(psi.norm());
        for (col, p) in out.populations.iter_mut().zip(psi.populations()) {
            col.push(p);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodEstimate {
    pub period: f64,
    pub method: String,
    pub first_minimum_time: f64,
    pub min_value: f64,
}

/// Search window `[0, 1.5 * 2 pi / h_ac]` for the first reversal minimum.
pub fn search_window(h_ac: f64) -> f64 {
    1.5 * 2.0 * PI / h_ac
}

/// Samples within this fraction of the window's range of the global minimum
/// count as reaching it; the earliest such dip is then followed down to its
/// local minimum. Keeps near-equal later minima (sampling jitter) from
/// displacing the first one.
const MINIMUM_BAND: f64 = 1e-3;

/// Twice the time of the first global minimum of `sz` within `[0, window]`.
pub fn first_minimum_period(times: &[f64], sz: &[f64], window: f64) -> Result<PeriodEstimate> {
    if times.len() != sz.len() {
        return Err(Error::GridMismatch(times.len(), sz.len()));
    }
    if !(window > 0.0) {
        return Err(Error::InvalidParameter(format!("search window must be > 0, got {window}")));
    }
    let last = *times.last().ok_or_else(|| Error::PeriodNotFound("empty series".into()))?;
    if last < window * (1.0 - 1e-12) {
        return Err(Error::PeriodNotFound(format!("series ends at t = {last}, before the search window {window}")));
    }
    let end = times.partition_point(|&t| t <= window);
    let win = &sz[..end];
    let (lo, hi) = win.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let band = MINIMUM_BAND * (hi - lo);
    let mut i = win.iter().position(|&v| v <= lo + band).expect("window is non-empty");
    while i + 1 < end && win[i + 1] < win[i] {
        i += 1;
    }
    if i == 0 {
        return Err(Error::PeriodNotFound("sz never decreases within the window".into()));
    }
    if !sz[i..].iter().any(|&v| v > 0.0) {
        return Err(Error::PeriodNotFound(format!("no recovery above 0 after the minimum at t = {}", times[i])));
    }
    Ok(PeriodEstimate {
        period: 2.0 * times[i],
        method: "first-global-minimum".into(),
        first_minimum_time: times[i],
        min_value: sz[i],
    })
}

pub fn reversal_period(series: &ObservableSeries, window: f64) -> Result<PeriodEstimate> {
    first_minimum_period(&series.times, &series.sz, window)
}

/// `max |a_i - b_i|` for series on the same grid.
pub fn compare_series(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs())))
}

/// Largest total population outside `target` at any stored time. Levels in
/// `target` that are not on the ladder are ignored.
pub fn leakage(series: &ObservableSeries, target: &[HalfInt]) -> f64 {
    let outside: Vec<usize> = (0..series.levels.len()).filter(|&i| !target.contains(&series.levels[i])).collect();
    if outside.is_empty() {
        return 0.0;
    }
    (0..series.len()).map(|k| outside.iter().map(|&i| series.populations[i][k]).sum::<f64>()).fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProtocolKind {
    /// One resonance `m -> m-1`; `None` means the top transition.
    Single {
        m: Option<HalfInt>,
    },
    Ladder {
        s_prime: HalfInt,
    },
    FullGqoab,
    RabiD0,
}

impl ProtocolKind {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Single { .. } => "single",
            ProtocolKind::Ladder { .. } => "ladder",
            ProtocolKind::FullGqoab => "full-gqoab",
            ProtocolKind::RabiD0 => "rabi-d0",
        }
    }
}

/// Everything needed to reproduce one run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunSpec {
    pub s: SpinQuantumNumber,
    pub d: f64,
    pub hz: f64,
    pub h_ac: f64,
    pub kind: ProtocolKind,
    pub frame: Frame,
    /// Starting level; `None` means m = S.
    pub initial_m: Option<HalfInt>,
    pub integrator: IntegratorConfig,
}

impl RunSpec {
    pub fn protocol(&self) -> Result<DriveProtocol> {
        let p = match self.kind {
            ProtocolKind::RabiD0 => {
                if self.d != 0.0 {
                    return Err(Error::InconsistentDrive(format!("rabi-d0 needs d = 0, got {}", self.d)));
                }
                rabi_protocol(self.s, self.hz, self.h_ac)?
            }
            ProtocolKind::FullGqoab => full_gqoab_protocol(self.model()?, self.h_ac, self.frame)?,
            ProtocolKind::Ladder { s_prime } => ladder_protocol(self.model()?, s_prime, self.h_ac)?,
            ProtocolKind::Single { m } => {
                single_resonance_protocol(self.model()?, m.unwrap_or(self.s.as_half_int()), self.h_ac)?
            }
        };
        if p.drive.frame == self.frame {
            Ok(p)
        } else {
            p.in_frame(self.frame)
        }
    }

    pub fn model(&self) -> Result<StaticModel> {
        StaticModel::new(self.s, self.d, self.hz)
    }

    pub fn initial_state(&self) -> Result<StateVector> {
        basis_state(self.s, self.initial_m.unwrap_or(self.s.as_half_int()))
    }

    /// Evolves the run; with `check_convergence` also reruns at dt/2 and
    /// reports the largest `<Sz>` deviation.
    pub fn run(&self, check_convergence: bool) -> Result<RunResult> {
        let protocol = self.protocol()?;
        let ops = make_operators(self.s)?;
        let psi0 = self.initial_state()?;
        let (trajectory, convergence) = if check_convergence {
            let (t, c) = evolve_with_convergence(&protocol, &ops, &psi0, &self.integrator)?;
            (t, Some(c))
        } else {
            (evolve_with_ops(&protocol, &ops, &psi0, &self.integrator)?, None)
        };
        let series = observables(&trajectory, &ops)?;
        Ok(RunResult { protocol, trajectory, series, convergence })
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub protocol: DriveProtocol,
    pub trajectory: Trajectory,
    pub series: ObservableSeries,
    pub convergence: Option<f64>,
}

impl RunResult {
    pub fn period(&self) -> Result<PeriodEstimate> {
        reversal_period(&self.series, search_window(self.protocol.drive.h_ac))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    HAc,
    D,
    Hz,
    S,
    SPrime,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::HAc => "h_ac",
            SweepAxis::D => "d",
            SweepAxis::Hz => "hz",
            SweepAxis::S => "s",
            SweepAxis::SPrime => "s_prime",
        }
    }

    /// Copy of `base` with this axis set to `value`.
    pub fn apply(self, base: &RunSpec, value: f64) -> Result<RunSpec> {
        let mut spec = *base;
        match self {
            SweepAxis::HAc => spec.h_ac = value,
            SweepAxis::D => spec.d = value,
            SweepAxis::Hz => spec.hz = value,
            SweepAxis::S => {
                spec.s = SpinQuantumNumber::from_f64(value)?;
                spec.initial_m = None;
                if let ProtocolKind::Single { .. } = spec.kind {
                    spec.kind = ProtocolKind::Single { m: None };
                }
            }
            SweepAxis::SPrime => match spec.kind {
                ProtocolKind::Ladder { .. } => spec.kind = ProtocolKind::Ladder { s_prime: HalfInt::from_f64(value)? },
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "s_prime sweep needs the ladder protocol, not {}",
                        other.name()
                    )))
                }
            },
        }
        Ok(spec)
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h_ac" => Ok(SweepAxis::HAc),
            "d" | "D" => Ok(SweepAxis::D),
            "hz" | "Hz" => Ok(SweepAxis::Hz),
            "s" | "S" => Ok(SweepAxis::S),
            "s_prime" | "S'" => Ok(SweepAxis::SPrime),
            other => Err(Error::InvalidParameter(format!("unknown sweep axis '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowSummary {
    pub period: std::result::Result<PeriodEstimate, Error>,
    pub min_reduced_sz: f64,
    pub max_norm_drift: f64,
    pub casimir_deviation: f64,
    pub convergence: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: std::result::Result<RowSummary, Error>,
}

pub fn sweep_row(base: &RunSpec, axis: SweepAxis, value: f64, check_convergence: bool) -> SweepRow {
    let outcome = axis.apply(base, value).and_then(|spec| spec.run(check_convergence)).map(|r| RowSummary {
        period: r.period(),
        min_reduced_sz: r.series.min_reduced_sz(),
        max_norm_drift: r.trajectory.max_norm_drift,
        casimir_deviation: r.series.casimir_deviation(),
        convergence: r.convergence,
    });
    SweepRow { value, outcome }
}

/// One row per value, computed independently (in parallel where possible)
/// and returned in input order. Failures stay in their row.
pub fn sweep(base: &RunSpec, axis: SweepAxis, values: &[f64], check_convergence: bool) -> Vec<SweepRow> {
    values.par_iter().map(|&v| sweep_row(base, axis, v, check_convergence)).collect()
}
