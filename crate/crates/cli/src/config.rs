//! Flat `key=value` run configuration.
//!
//! ```text
//! # full-ladder reversal of S = 10
//! twice_s=20
//! d=0.1
//! hz=0
//! h_ac=0.005
//! protocol=full-gqoab
//! frame=lab
//! t_max=3000
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use spinladder_core::analysis::{ProtocolKind, RunSpec};
use spinladder_core::integrator::{DtPolicy, IntegratorConfig, Method, DEFAULT_DT};
use spinladder_core::{Frame, HalfInt, SpinQuantumNumber};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    AtLine { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProtocolName {
    Single,
    Ladder,
    FullGqoab,
    RabiD0,
}

impl ProtocolName {
    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolName::Single => "single",
            ProtocolName::Ladder => "ladder",
            ProtocolName::FullGqoab => "full-gqoab",
            ProtocolName::RabiD0 => "rabi-d0",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "single" => Some(ProtocolName::Single),
            "ladder" => Some(ProtocolName::Ladder),
            "full-gqoab" => Some(ProtocolName::FullGqoab),
            "rabi-d0" => Some(ProtocolName::RabiD0),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    pub twice_s: u32,
    pub d: f64,
    pub hz: f64,
    pub h_ac: f64,
    pub protocol: ProtocolName,
    pub s_prime: Option<HalfInt>,
    pub m_single: Option<HalfInt>,
    pub frame: Frame,
    pub method: Method,
    pub dt: f64,
    /// Whether `dt` came from the file; an explicit dt is never tightened.
    pub dt_pinned: bool,
    pub t_max: f64,
    pub record_stride: Option<usize>,
    pub initial_m: Option<HalfInt>,
    pub output_dir: Option<PathBuf>,
}

const KEYS: [&str; 14] = [
    "twice_s",
    "d",
    "hz",
    "h_ac",
    "protocol",
    "s_prime",
    "m_single",
    "frame",
    "method",
    "dt",
    "t_max",
    "record_stride",
    "initial_m",
    "output_dir",
];

fn at(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::AtLine { line, message: message.into() }
}

fn real(key: &str, value: &str, line: usize) -> Result<f64, ConfigError> {
    let v: f64 = value.parse().map_err(|_| at(line, format!("{key}: malformed number '{value}'")))?;
    if !v.is_finite() {
        return Err(at(line, format!("{key}: value must be finite, got {value}")));
    }
    Ok(v)
}

fn half_int(key: &str, value: &str, line: usize) -> Result<HalfInt, ConfigError> {
    let v = real(key, value, line)?;
    HalfInt::from_f64(v).map_err(|_| at(line, format!("{key}: {value} is not a multiple of 1/2")))
}

pub fn parse_config(text: &str) -> Result<SimulationConfig, ConfigError> {
    let mut seen: HashMap<&str, (usize, &str)> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) =
            content.split_once('=').ok_or_else(|| at(line, format!("expected key=value, got '{content}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(at(line, format!("unknown key '{key}'")));
        }
        if let Some((first, _)) = seen.insert(key, (line, value)) {
            return Err(at(line, format!("duplicate key '{key}' (first set on line {first})")));
        }
    }
    let get = |k: &str| seen.get(k).copied();
    let require = |k: &str| get(k).ok_or_else(|| ConfigError::Invalid(format!("missing required key '{k}'")));

    let (line, v) = require("twice_s")?;
    let twice_s: u32 = v.parse().map_err(|_| at(line, format!("twice_s: expected a positive integer, got '{v}'")))?;
    let s = SpinQuantumNumber::new(twice_s).map_err(|e| at(line, e.to_string()))?;

    let nonneg = |k: &str, default: f64| -> Result<f64, ConfigError> {
        match get(k) {
            None => Ok(default),
            Some((line, v)) => {
                let x = real(k, v, line)?;
                if x < 0.0 {
                    return Err(at(line, format!("{k} must be >= 0, got {v}")));
                }
                Ok(x)
            }
        }
    };
    let positive = |k: &str| -> Result<f64, ConfigError> {
        let (line, v) = require(k)?;
        let x = real(k, v, line)?;
        if x <= 0.0 {
            return Err(at(line, format!("{k} must be > 0, got {v}")));
        }
        Ok(x)
    };
    let d = nonneg("d", 0.0)?;
    let hz = match get("hz") {
        Some((line, v)) => real("hz", v, line)?,
        None => 0.0,
    };
    let h_ac = positive("h_ac")?;
    let t_max = positive("t_max")?;
    let (dt, dt_pinned) = match get("dt") {
        Some(_) => (positive("dt")?, true),
        None => (DEFAULT_DT, false),
    };

    let (line, v) = require("protocol")?;
    let protocol = ProtocolName::parse(v)
        .ok_or_else(|| at(line, format!("unknown protocol '{v}' (expected single, ladder, full-gqoab or rabi-d0)")))?;

    let on_ladder = |k: &str| -> Result<Option<HalfInt>, ConfigError> {
        match get(k) {
            None => Ok(None),
            Some((line, v)) => {
                let m = half_int(k, v, line)?;
                if !s.contains(m) {
                    return Err(at(line, format!("{k} = {v} is not on the ladder of S = {s}")));
                }
                Ok(Some(m))
            }
        }
    };
    let s_prime = on_ladder("s_prime")?;
    let m_single = on_ladder("m_single")?;
    let initial_m = on_ladder("initial_m")?;
    let lowest = -s.as_half_int() + 1;
    for (k, value) in [("s_prime", s_prime), ("m_single", m_single)] {
        if let Some(m) = value {
            if m < lowest {
                return Err(at(get(k).unwrap().0, format!("{k} must be >= {lowest}")));
            }
        }
    }
    match protocol {
        ProtocolName::Ladder if s_prime.is_none() => {
            return Err(ConfigError::Invalid("protocol=ladder needs s_prime".into()));
        }
        ProtocolName::RabiD0 if d != 0.0 => {
            return Err(at(get("d").unwrap().0, "protocol=rabi-d0 needs d = 0"));
        }
        ProtocolName::FullGqoab if d == 0.0 => {
            return Err(ConfigError::Invalid("protocol=full-gqoab needs d > 0".into()));
        }
        _ => {}
    }
    for (k, used) in [("s_prime", ProtocolName::Ladder), ("m_single", ProtocolName::Single)] {
        if let Some((line, _)) = get(k) {
            if protocol != used {
                return Err(at(line, format!("{k} only applies to protocol={}", used.as_str())));
            }
        }
    }

    let frame = match get("frame") {
        None => Frame::Lab,
        Some((line, v)) => {
            v.parse().map_err(|_| at(line, format!("unknown frame '{v}' (expected lab or rotating)")))?
        }
    };
    if frame == Frame::Rotating {
        let full = match protocol {
            ProtocolName::FullGqoab | ProtocolName::RabiD0 => true,
            ProtocolName::Ladder => s_prime == Some(lowest),
            ProtocolName::Single => false,
        };
        if !full {
            return Err(at(get("frame").unwrap().0, "frame=rotating needs the full ladder"));
        }
    }
    let method = match get("method") {
        None => Method::InteractionMidpoint4,
        Some((line, v)) => v.parse().map_err(|_| at(line, format!("unknown method '{v}'")))?,
    };
    let record_stride = match get("record_stride") {
        None => None,
        Some((line, v)) => match v.parse::<usize>() {
            Ok(k) if k >= 1 => Some(k),
            _ => return Err(at(line, format!("record_stride: expected a positive integer, got '{v}'"))),
        },
    };
    let output_dir = get("output_dir").map(|(_, v)| PathBuf::from(v));

    Ok(SimulationConfig {
        twice_s,
        d,
        hz,
        h_ac,
        protocol,
        s_prime,
        m_single,
        frame,
        method,
        dt,
        dt_pinned,
        t_max,
        record_stride,
        initial_m,
        output_dir,
    })
}

impl SimulationConfig {
    /// Canonical text form; `parse_config(&c.serialize()) == c`.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(out, "{k}={v}");
        };
        kv("twice_s", &self.twice_s);
        kv("d", &self.d);
        kv("hz", &self.hz);
        kv("h_ac", &self.h_ac);
        kv("protocol", &self.protocol.as_str());
        if let Some(m) = self.s_prime {
            kv("s_prime", &m);
        }
        if let Some(m) = self.m_single {
            kv("m_single", &m);
        }
        kv("frame", &self.frame.as_str());
        kv("method", &self.method.as_str());
        if self.dt_pinned {
            kv("dt", &self.dt);
        }
        kv("t_max", &self.t_max);
        if let Some(k) = self.record_stride {
            kv("record_stride", &k);
        }
        if let Some(m) = self.initial_m {
            kv("initial_m", &m);
        }
        if let Some(p) = &self.output_dir {
            kv("output_dir", &p.display());
        }
        out
    }

    /// Key/value pairs as written by [`serialize`](Self::serialize).
    pub fn pairs(&self) -> Vec<(String, String)> {
        self.serialize()
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    pub fn spin(&self) -> SpinQuantumNumber {
        SpinQuantumNumber::new(self.twice_s).expect("validated on parse")
    }

    pub fn run_spec(&self) -> RunSpec {
        let kind = match self.protocol {
            ProtocolName::Single => ProtocolKind::Single { m: self.m_single },
            ProtocolName::Ladder => ProtocolKind::Ladder { s_prime: self.s_prime.expect("validated on parse") },
            ProtocolName::FullGqoab => ProtocolKind::FullGqoab,
            ProtocolName::RabiD0 => ProtocolKind::RabiD0,
        };
        let integrator = IntegratorConfig {
            method: self.method,
            dt: self.dt,
            t_max: self.t_max,
            record_stride: self.record_stride,
            dt_policy: if self.dt_pinned { DtPolicy::Pinned } else { DtPolicy::Auto },
        };
        RunSpec {
            s: self.spin(),
            d: self.d,
            hz: self.hz,
            h_ac: self.h_ac,
            kind,
            frame: self.frame,
            initial_m: self.initial_m,
            integrator,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FULL_LADDER: &str = "twice_s=20\nd=0.1\nhz=0\nh_ac=0.005\nprotocol=full-gqoab\nframe=lab\nt_max=3000";

    #[test]
    fn full_ladder_example() {
        let c = parse_config(FULL_LADDER).unwrap();
        assert_eq!(c.twice_s, 20);
        assert_eq!(c.protocol, ProtocolName::FullGqoab);
        assert_eq!(c.frame, Frame::Lab);
        assert_eq!(c.dt, DEFAULT_DT);
        assert!(!c.dt_pinned);
        let spec = c.run_spec();
        assert_eq!(spec.kind, ProtocolKind::FullGqoab);
        assert_eq!(spec.integrator.dt_policy, DtPolicy::Auto);
    }

    #[test]
    fn rabi_and_half_integer_examples() {
        let c = parse_config("twice_s=20\nd=0\nh_ac=0.005\nprotocol=rabi-d0\nt_max=2000\nhz=0.1").unwrap();
        assert_eq!((c.protocol, c.hz), (ProtocolName::RabiD0, 0.1));
        let c = parse_config("twice_s=19\nd=0.1\nh_ac=0.005\nprotocol=full-gqoab\nt_max=3000\ninitial_m=9.5").unwrap();
        assert_eq!(c.initial_m, Some(HalfInt::from_twice(19)));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# header\n\ntwice_s = 1   # spin one half\nh_ac=0.005\nprotocol=rabi-d0\nhz=0.1\nt_max=10\n";
        assert_eq!(parse_config(text).unwrap().twice_s, 1);
    }

    fn line_of(text: &str) -> Option<usize> {
        match parse_config(text) {
            Err(ConfigError::AtLine { line, .. }) => Some(line),
            _ => None,
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of("twice_s=20\nbogus=1\n"), Some(2));
        assert_eq!(line_of("twice_s=20\nd=abc\nh_ac=0.005\nprotocol=single\nt_max=1"), Some(2));
        assert_eq!(line_of("twice_s=20\nd=-1\nh_ac=0.005\nprotocol=single\nt_max=1"), Some(2));
        assert_eq!(line_of("twice_s=20\nd=0.1\nh_ac=0\nprotocol=single\nt_max=1"), Some(3));
        assert_eq!(line_of("twice_s=0\nd=0.1\nh_ac=0.1\nprotocol=single\nt_max=1"), Some(1));
        assert_eq!(line_of("twice_s=20\nd=0.1\nh_ac=0.1\nprotocol=single\nt_max=1\ninitial_m=10.5"), Some(6));
        assert_eq!(line_of("twice_s=20\nd=0.1\nh_ac=0.1\nprotocol=ladder\ns_prime=-10\nt_max=1"), Some(5));
        assert_eq!(line_of("twice_s=20\nd=0.1\nh_ac=0.1\nprotocol=magic\nt_max=1"), Some(4));
        assert_eq!(line_of("twice_s=20\nd=0.1\nh_ac=0.1\nprotocol=single\nframe=rotating\nt_max=1"), Some(5));
        assert_eq!(line_of("twice_s=20\nd=0.1\nd=0.2"), Some(3));
        assert_eq!(line_of("twice_s=20\njust text"), Some(2));
        assert_eq!(line_of("twice_s=20\nd=inf\nh_ac=0.1\nprotocol=single\nt_max=1"), Some(2));
        assert!(matches!(
            parse_config("twice_s=20\nd=0.1\nh_ac=0.1\nprotocol=ladder\nt_max=1"),
            Err(ConfigError::Invalid(_))
        ));
        assert!(matches!(parse_config("d=0.1"), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn explicit_dt_is_pinned() {
        let c = parse_config(&format!("{FULL_LADDER}\ndt=0.005")).unwrap();
        assert!(c.dt_pinned);
        assert_eq!(c.run_spec().integrator.dt_policy, DtPolicy::Pinned);
    }

    proptest! {
        #[test]
        fn serialize_round_trips(
            twice_s in 1u32..41,
            d in 0.001f64..2.0,
            hz in -1.0f64..1.0,
            h_ac in 1e-4f64..0.1,
            t_max in 1.0f64..5000.0,
            dt in proptest::option::of(1e-4f64..0.05),
            stride in proptest::option::of(1usize..100),
            which in 0usize..4,
            pick in 0u32..1000,
        ) {
            let s = SpinQuantumNumber::new(twice_s).unwrap();
            let levels: Vec<HalfInt> = s.ladder().collect();
            let m = levels[(pick as usize) % (levels.len() - 1)];
            let mut c = SimulationConfig {
                twice_s, d, hz, h_ac,
                protocol: ProtocolName::FullGqoab,
                s_prime: None,
                m_single: None,
                frame: Frame::Lab,
                method: Method::InteractionMidpoint4,
                dt: dt.unwrap_or(DEFAULT_DT),
                dt_pinned: dt.is_some(),
                t_max,
                record_stride: stride,
                initial_m: Some(levels[(pick as usize) % levels.len()]),
                output_dir: Some(PathBuf::from("runs/x y")),
            };
            match which {
                0 => { c.protocol = ProtocolName::Single; c.m_single = Some(m); }
                1 => { c.protocol = ProtocolName::Ladder; c.s_prime = Some(m); }
                2 => { c.frame = Frame::Rotating; c.method = Method::Rk4; }
                _ => { c.protocol = ProtocolName::RabiD0; c.d = 0.0; }
            }
            prop_assert_eq!(parse_config(&c.serialize()).unwrap(), c);
        }
    }
}
