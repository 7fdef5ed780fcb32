//! Initial data used by the studies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error};
use crate::spectral::{Field, SpectralGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialDatum {
    /// `3 sin(2x) / (2 - cos x)`, analytic with exponentially decaying spectrum.
    #[default]
    Bump,
    /// `sin x`
    Sine,
}

impl InitialDatum {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            InitialDatum::Bump => 3.0 * (2.0 * x).sin() / (2.0 - x.cos()),
            InitialDatum::Sine => x.sin(),
        }
    }

    pub fn field(self, grid: &SpectralGrid) -> Field {
        grid.sample(|x| self.eval(x))
    }
}

impl fmt::Display for InitialDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitialDatum::Bump => "bump",
            InitialDatum::Sine => "sine",
        })
    }
}

impl FromStr for InitialDatum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bump" => Ok(InitialDatum::Bump),
            "sine" | "sin" => Ok(InitialDatum::Sine),
            other => Err(invalid(format!("unknown initial datum '{other}'"))),
        }
    }
}
