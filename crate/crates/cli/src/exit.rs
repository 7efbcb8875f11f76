//! Exit codes and the error markers that select them.

use std::fmt;
use ttw::classical::ClassicalError;
use ttw::coherent::CoherentError;
use ttw::conventions::UnknownStrategy;
use ttw::oracle::OracleError;
use ttw::params::ParamError;

pub const OK: u8 = 0;
pub const CONFIG: u8 = 2;
pub const NUMERIC: u8 = 3;
pub const INFEASIBLE: u8 = 4;
pub const INTEGRATOR: u8 = 5;
pub const INCONCLUSIVE: u8 = 6;

/// A bad flag, config file or parameter value.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// Validation finished but some arbitration could not pick a variant.
#[derive(Debug)]
pub struct Inconclusive(pub Vec<&'static str>);

impl fmt::Display for Inconclusive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "inconclusive arbitration: {}", self.0.join(", "))
    }
}

impl std::error::Error for Inconclusive {}

/// Maps an error chain to the documented exit code; anything unrecognized
/// counts as a numerical failure.
pub fn code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Usage>() || cause.is::<ParamError>() || cause.is::<UnknownStrategy>() {
            return CONFIG;
        }
        if cause.is::<Inconclusive>() {
            return INCONCLUSIVE;
        }
        if let Some(e) = cause.downcast_ref::<CoherentError>() {
            return match e {
                CoherentError::Infeasible { .. } => INFEASIBLE,
                CoherentError::Domain(_) => CONFIG,
                _ => NUMERIC,
            };
        }
        if let Some(OracleError::Grid(_)) = cause.downcast_ref::<OracleError>() {
            return CONFIG;
        }
        if let Some(e) = cause.downcast_ref::<ClassicalError>() {
            return match e {
                ClassicalError::Integrator(_) => INTEGRATOR,
                ClassicalError::Domain(_) | ClassicalError::Tolerance(_) => CONFIG,
                ClassicalError::Radicand(_) => NUMERIC,
            };
        }
    }
    NUMERIC
}
