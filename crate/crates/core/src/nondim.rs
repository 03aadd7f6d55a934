//! Dimensionless constants from SI plate and fluid data.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::ModelParams;

/// Which definition of the bending number to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum BetaConvention {
    /// `β = B / (ρ_f g L³)`.
    #[default]
    #[serde(rename = "length")]
    Length,
    /// `β = H B / (ρ_f g L⁴)`.
    #[serde(rename = "amplitude")]
    Amplitude,
}

impl BetaConvention {
    pub fn formula(self) -> &'static str {
        match self {
            Self::Length => "beta = B/(rho_f g L^3)",
            Self::Amplitude => "beta = H B/(rho_f g L^4)",
        }
    }
}

impl fmt::Display for BetaConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Length => "length",
            Self::Amplitude => "amplitude",
        })
    }
}

impl FromStr for BetaConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "length" => Ok(Self::Length),
            "amplitude" => Ok(Self::Amplitude),
            _ => Err(Error::InvalidParameter(format!("unknown beta convention {s:?} (length | amplitude)"))),
        }
    }
}

/// Physical inputs in SI units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dimensional {
    /// Plate density (kg/m³).
    pub rho_s: f64,
    /// Plate thickness (m).
    pub h: f64,
    /// Fluid density (kg/m³).
    pub rho_f: f64,
    /// Horizontal length scale (m).
    pub length: f64,
    /// Flexural rigidity (N·m).
    pub rigidity: f64,
    /// Gravity (m/s²).
    pub g: f64,
    /// Viscoelastic damping (kg/s).
    pub gamma: f64,
    /// Wave amplitude (m).
    pub amplitude: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nondimensional {
    pub params: ModelParams,
    pub convention: BetaConvention,
}

impl fmt::Display for Nondimensional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(f, "upsilon = {:e}", p.upsilon)?;
        writeln!(f, "delta = {:e}", p.delta)?;
        writeln!(f, "beta = {:e}", p.beta)?;
        writeln!(f, "eps = {:e}", p.eps)?;
        write!(f, "# {}", self.convention.formula())
    }
}

/// `Υ = ρ_s h/(ρ_f L)`, `δ = γ/(ρ_f √(g L³))`, `ε = H/L` and `β` per `convention`.
pub fn nondimensionalize(d: &Dimensional, convention: BetaConvention) -> Result<Nondimensional> {
    let inputs = [
        ("rho_s", d.rho_s),
        ("h", d.h),
        ("rho_f", d.rho_f),
        ("length", d.length),
        ("rigidity", d.rigidity),
        ("g", d.g),
        ("gamma", d.gamma),
        ("amplitude", d.amplitude),
    ];
    for (name, v) in inputs {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be a positive number, got {v}")));
        }
    }
    let l = d.length;
    let beta = match convention {
        BetaConvention::Length => d.rigidity / (d.rho_f * d.g * l.powi(3)),
        BetaConvention::Amplitude => d.amplitude * d.rigidity / (d.rho_f * d.g * l.powi(4)),
    };
    let params = ModelParams::new(
        d.rho_s * d.h / (d.rho_f * l),
        d.gamma / (d.rho_f * (d.g * l.powi(3)).sqrt()),
        beta,
        d.amplitude / l,
    )?;
    Ok(Nondimensional { params, convention })
}
