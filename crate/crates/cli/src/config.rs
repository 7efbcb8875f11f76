//! The JSON run configuration and its command-line overrides.

use serde::{Deserialize, Serialize};
use std::path::Path;
use ttw::coherent::{MomentGrid, SeriesTruncation};
use ttw::conventions::ConventionNames;
use ttw::oracle::{OracleGrids, ValidationConfig};
use ttw::params::{PotentialParams, Rational};

use crate::exit::Usage;

/// Everything a run needs. Every section has defaults, so `{}` is a valid
/// config file; flags given on the command line win over file values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: PotentialParams,
    pub conventions: ConventionNames,
    pub spectrum: SpectrumOptions,
    pub eigenstate: EigenstateOptions,
    pub coherent: CoherentOptions,
    pub classical: ClassicalOptions,
    pub validate: ValidateOptions,
}

fn default_params() -> PotentialParams {
    PotentialParams::new(1.0, 0.0, 0.0, Rational::integer(1).expect("1 is a valid k")).expect("valid defaults")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: default_params(),
            conventions: ConventionNames::default(),
            spectrum: SpectrumOptions::default(),
            eigenstate: EigenstateOptions::default(),
            coherent: CoherentOptions::default(),
            classical: ClassicalOptions::default(),
            validate: ValidateOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumOptions {
    pub emax: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { emax: 40.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenstateOptions {
    pub n_r: usize,
    pub l1: usize,
    /// Outer radius of the sampling grid; chosen from the state when absent.
    pub r_max: Option<f64>,
    pub r_points: usize,
    pub theta_points: usize,
    pub quadrature_order: usize,
}

impl Default for EigenstateOptions {
    fn default() -> Self {
        Self {
            n_r: 0,
            l1: 0,
            r_max: None,
            r_points: 200,
            theta_points: 100,
            quadrature_order: ttw::spectrum::DEFAULT_QUADRATURE_ORDER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoherentOptions {
    /// Target energy E; the amplitudes get E/ω = energy/ω.
    pub energy: f64,
    pub phase_u: f64,
    pub phase_v: f64,
    /// Share of E/ω carried by the (κ₁, κ₂) pair.
    pub split: f64,
    /// Replace energy and split by the circular-orbit values, where ⟨r²⟩
    /// does not oscillate.
    pub circular: bool,
    /// End of the time series; one radial period π/(2ω) when absent.
    pub t_end: Option<f64>,
    pub n_times: usize,
    pub truncation: SeriesTruncation,
    pub grid: MomentGrid,
    /// Number of |Ψ|² frames spread over [0, t_end]; 0 disables them.
    pub snapshots: usize,
    pub snapshot_r_points: usize,
    pub snapshot_theta_points: usize,
}

impl Default for CoherentOptions {
    fn default() -> Self {
        Self {
            energy: 20.0,
            phase_u: 0.0,
            phase_v: 0.0,
            split: 0.5,
            circular: false,
            t_end: None,
            n_times: 65,
            truncation: SeriesTruncation::default(),
            grid: MomentGrid::default(),
            snapshots: 0,
            snapshot_r_points: 80,
            snapshot_theta_points: 40,
        }
    }
}

/// Explicit phase-space starting point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub r: f64,
    pub theta: f64,
    pub p_r: f64,
    pub p_theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalOptions {
    /// Used as given when present; otherwise the state is built from
    /// `energy` and `charge`.
    pub initial: Option<InitialState>,
    /// Defaults to 2.6√A.
    pub energy: Option<f64>,
    /// Angular charge A; defaults to 20k²ω.
    pub charge: Option<f64>,
    /// Defaults to 0.8 of the angular-potential minimum.
    pub theta0: Option<f64>,
    /// Defaults to the circular radius (A/ω²)^{1/4}.
    pub r0: Option<f64>,
    pub periods: f64,
    pub samples_per_period: usize,
    pub tol: f64,
    pub closure_periods: usize,
    pub closure_tol: f64,
}

impl Default for ClassicalOptions {
    fn default() -> Self {
        Self {
            initial: None,
            energy: None,
            charge: None,
            theta0: None,
            r0: None,
            periods: 2.0,
            samples_per_period: 64,
            tol: 1e-10,
            closure_periods: 40,
            closure_tol: 1e-6,
        }
    }
}

/// [`ValidationConfig`] without the potential, which comes from `params`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateOptions {
    pub barriers: Vec<(f64, f64)>,
    pub ks: Vec<Rational>,
    pub l1_max: usize,
    pub n_radial: usize,
    pub grids: OracleGrids,
    pub argument_probes: Vec<(f64, f64)>,
    pub identity_probe: (f64, f64),
    pub identity_pairs: Vec<(f64, f64)>,
    pub identity_l1_max: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        let base = ValidationConfig::for_params(default_params());
        Self {
            barriers: base.barriers,
            ks: base.ks,
            l1_max: base.l1_max,
            n_radial: base.n_radial,
            grids: base.grids,
            argument_probes: base.argument_probes,
            identity_probe: base.identity_probe,
            identity_pairs: base.identity_pairs,
            identity_l1_max: base.identity_l1_max,
        }
    }
}

impl ValidateOptions {
    pub fn with_params(&self, params: PotentialParams) -> ValidationConfig {
        ValidationConfig {
            params,
            barriers: self.barriers.clone(),
            ks: self.ks.clone(),
            l1_max: self.l1_max,
            n_radial: self.n_radial,
            grids: self.grids,
            argument_probes: self.argument_probes.clone(),
            identity_probe: self.identity_probe,
            identity_pairs: self.identity_pairs.clone(),
            identity_l1_max: self.identity_l1_max,
        }
    }
}

/// The potential-level flags shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct ParamOverrides {
    pub omega: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub k: Option<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Usage> {
        let text = std::fs::read_to_string(path).map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))
    }

    /// Applies the flags; a decimal k is converted to an exact fraction and
    /// reported through the log.
    pub fn apply(&mut self, o: &ParamOverrides) -> Result<(), Usage> {
        let k = match &o.k {
            Some(text) => {
                let (k, converted) = Rational::parse_reporting(text).map_err(|e| Usage(e.to_string()))?;
                if converted {
                    log::warn!("k = {text} is a decimal; using the exact fraction {k}");
                }
                k
            }
            None => self.params.k(),
        };
        self.params = PotentialParams::new(
            o.omega.unwrap_or(self.params.omega()),
            o.alpha.unwrap_or(self.params.alpha()),
            o.beta.unwrap_or(self.params.beta()),
            k,
        )
        .map_err(|e| Usage(e.to_string()))?;
        Ok(())
    }
}
