//! Capture and flow parameters of three reference preparations.
//!
//! The thresholds are in the original camera's raw intensity units and do
//! not transfer to other rigs; treat them as starting points for a sweep.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetName {
    Rmc1,
    Astrocyte,
    Neuron,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: PresetName,
    pub frame_rate_hz: f64,
    pub window_width: usize,
    pub eigenvalue_threshold: f64,
}

pub const RMC1: Preset = Preset {
    name: PresetName::Rmc1,
    frame_rate_hz: 16.4,
    window_width: 11,
    eigenvalue_threshold: 11.0,
};

pub const ASTROCYTE: Preset = Preset {
    name: PresetName::Astrocyte,
    frame_rate_hz: 8.0,
    window_width: 9,
    eigenvalue_threshold: 1.4,
};

pub const NEURON: Preset = Preset {
    name: PresetName::Neuron,
    frame_rate_hz: 4.0,
    window_width: 11,
    eigenvalue_threshold: 0.3,
};

pub const ALL: [Preset; 3] = [RMC1, ASTROCYTE, NEURON];

impl PresetName {
    pub fn preset(self) -> Preset {
        match self {
            PresetName::Rmc1 => RMC1,
            PresetName::Astrocyte => ASTROCYTE,
            PresetName::Neuron => NEURON,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Rmc1 => "rmc1",
            PresetName::Astrocyte => "astrocyte",
            PresetName::Neuron => "neuron",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rmc1" | "rmc-1" => Ok(PresetName::Rmc1),
            "astrocyte" | "astrocytes" => Ok(PresetName::Astrocyte),
            "neuron" | "neurons" => Ok(PresetName::Neuron),
            other => Err(Error::Parameter(format!("unknown preset {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_values() {
        assert_eq!(
            (RMC1.frame_rate_hz, RMC1.window_width, RMC1.eigenvalue_threshold),
            (16.4, 11, 11.0)
        );
        assert_eq!(
            (ASTROCYTE.frame_rate_hz, ASTROCYTE.window_width, ASTROCYTE.eigenvalue_threshold),
            (8.0, 9, 1.4)
        );
        assert_eq!(
            (NEURON.frame_rate_hz, NEURON.window_width, NEURON.eigenvalue_threshold),
            (4.0, 11, 0.3)
        );
    }

    #[test]
    fn parse_names() {
        assert_eq!("astrocyte".parse::<PresetName>().unwrap(), PresetName::Astrocyte);
        assert_eq!("RMC1".parse::<PresetName>().unwrap().preset(), RMC1);
        assert!("glia".parse::<PresetName>().is_err());
    }
}
