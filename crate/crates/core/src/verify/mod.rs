//! Numerical checks of the kernel envelopes, convolution estimates,
//! maximal regularity, scaling and the time-weighted a priori bound.

pub mod besov;
pub mod envelopes;
pub mod gronwall;
pub mod maxreg;
pub mod report;
pub mod scaling;

use std::fmt;
use std::str::FromStr;

use serde_json::Value;

pub use crate::params::{derived_exponents, DerivedExponents};
pub use besov::{verify_besov_convolution, BesovConfig, ConvolutionKind, LevelRatio, MeshLevel, RatioStudy};
pub use envelopes::{verify_band_envelopes, EnvelopeConfig, EnvelopeKind, EnvelopeReport};
pub use gronwall::{verify_gronwall, GronwallCase, GronwallConfig, GronwallReport};
pub use maxreg::{verify_max_regularity, MaxRegConfig, Terms};
pub use report::{Report, Verdict};
pub use scaling::{verify_scaling_criticality, ScalingConfig, ScalingReport};

use crate::config::from_value;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    BandEnvelope,
    BesovConv,
    MaxReg,
    Scaling,
    Gronwall,
}

impl Claim {
    pub const ALL: [Claim; 5] = [Claim::BandEnvelope, Claim::BesovConv, Claim::MaxReg, Claim::Scaling, Claim::Gronwall];

    pub fn name(self) -> &'static str {
        match self {
            Claim::BandEnvelope => "band-envelope",
            Claim::BesovConv => "besov-conv",
            Claim::MaxReg => "max-reg",
            Claim::Scaling => "scaling",
            Claim::Gronwall => "gronwall",
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Claim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Claim::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Format(format!("unknown claim '{s}'")))
    }
}

/// Parses `config` for `claim`, runs the study and returns its report.
pub fn run_claim(claim: Claim, config: &Value) -> Result<Report> {
    match claim {
        Claim::BandEnvelope => {
            let cfg: EnvelopeConfig = from_value(config)?;
            Ok(verify_band_envelopes(&cfg)?.to_report(&cfg))
        }
        Claim::BesovConv => {
            let cfg: BesovConfig = from_value(config)?;
            Ok(verify_besov_convolution(&cfg)?.to_report(report::to_value(&cfg)))
        }
        Claim::MaxReg => {
            let cfg: MaxRegConfig = from_value(config)?;
            cfg.params.validated()?;
            let params = maxreg::max_regularity_params(&cfg)?;
            Ok(verify_max_regularity(&cfg)?.to_report(params))
        }
        Claim::Scaling => {
            let cfg: ScalingConfig = from_value(config)?;
            Ok(verify_scaling_criticality(&cfg)?.to_report(&cfg))
        }
        Claim::Gronwall => {
            let cfg: GronwallConfig = from_value(config)?;
            Ok(verify_gronwall(&cfg)?.to_report(&cfg))
        }
    }
}
