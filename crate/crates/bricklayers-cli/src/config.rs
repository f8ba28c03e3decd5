//! Experiment configuration: one TOML file with a section per subcommand,
//! plus shared `[rate]` and `[profile]` sections. Every field has a default,
//! so commands run without a file; flags override the seed, replica count,
//! and output directory. The resolved configuration is recorded in the run
//! manifest, and serializing it back to TOML round-trips exactly.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use bricklayers::hydro::PiecewiseProfile;
use bricklayers::kernel::{ParameterProfile, ProfileStep, RateFunction};
use bricklayers::mcsim::{Boundary, SimParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub rate: RateConfig,
    pub profile: ProfileConfig,
    pub verify: VerifyConfig,
    pub simulate: SimulateConfig,
    pub walkers: WalkersConfig,
    pub hydro: HydroConfig,
    pub compare: CompareConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("parsing experiment config")
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).context("serializing experiment config")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateConfig {
    /// "exponential" or "custom".
    pub kind: String,
    pub beta: f64,
    /// `table[k] = r(k + 1)` for the custom kind.
    pub table: Option<Vec<f64>>,
}

impl Default for RateConfig {
    fn default() -> Self {
        RateConfig {
            kind: "exponential".into(),
            beta: 1.0,
            table: None,
        }
    }
}

impl RateConfig {
    pub fn build(&self) -> Result<RateFunction> {
        match self.kind.as_str() {
            "exponential" => Ok(RateFunction::exponential(self.beta)?),
            "custom" => {
                let table = self
                    .table
                    .clone()
                    .context("custom rate needs a `table` of values r(1), r(2), ...")?;
                Ok(RateFunction::custom(table)?)
            }
            other => bail!("unknown rate kind {other:?} (use \"exponential\" or \"custom\")"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileConfig {
    pub theta_left: f64,
    pub steps: Vec<StepConfig>,
    /// Step quantum attached to the profile (defaults to the rate's β for
    /// exponential rates).
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConfig {
    pub site: i64,
    pub theta: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            theta_left: 0.5,
            steps: vec![StepConfig {
                site: 0,
                theta: -0.5,
            }],
            beta: Some(1.0),
        }
    }
}

impl ProfileConfig {
    pub fn build(&self, rf: &RateFunction) -> Result<ParameterProfile> {
        let steps = self
            .steps
            .iter()
            .map(|s| ProfileStep {
                site: s.site,
                theta: s.theta,
            })
            .collect();
        let beta = self.beta.or_else(|| rf.beta());
        Ok(ParameterProfile::from_steps(self.theta_left, steps, beta)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub betas: Vec<f64>,
    /// Randomized profiles per β; must be positive.
    pub profiles: usize,
    pub seed: u64,
    pub tail_tol: f64,
    /// Identity batteries must stay below this residual.
    pub identity_tol: f64,
    /// The closure battery on counterexample rates must exceed this.
    pub counterexample_min: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            betas: vec![0.5, 1.0, 2.0],
            profiles: 20,
            seed: 7,
            tail_tol: 1e-12,
            identity_tol: 1e-8,
            counterexample_min: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub half_width: i64,
    pub t_end: f64,
    pub replicas: usize,
    pub seed: u64,
    pub window: (i64, i64),
    /// "frozen" or "reservoir".
    pub boundary: String,
    pub omega_cap: Option<i64>,
    pub tail_tol: f64,
    /// Also write the event log of one extra replica.
    pub log_events: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            half_width: 60,
            t_end: 2.0,
            replicas: 400,
            seed: 42,
            window: (-20, 20),
            boundary: "frozen".into(),
            omega_cap: None,
            tail_tol: 1e-12,
            log_events: false,
        }
    }
}

impl SimulateConfig {
    pub fn boundary(&self) -> Result<Boundary> {
        match self.boundary.as_str() {
            "frozen" => Ok(Boundary::Frozen),
            "reservoir" => Ok(Boundary::Reservoir),
            other => bail!("unknown boundary {other:?} (use \"frozen\" or \"reservoir\")"),
        }
    }

    pub fn sim_params(&self) -> Result<SimParams> {
        let p = SimParams {
            half_width: self.half_width,
            boundary: self.boundary()?,
            t_end: self.t_end,
            seed: self.seed,
            replicas: self.replicas,
            window: self.window,
            omega_cap: self.omega_cap,
            tail_tol: self.tail_tol,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkersConfig {
    /// Parameter-step sites; the walker at `q` sits at position `q - 1/2`.
    pub positions: Vec<i64>,
    pub theta_left: f64,
    pub beta: f64,
    pub t_end: f64,
    pub seed: u64,
    /// Also solve the exact master equation at `t_end` (auto window).
    pub master: bool,
}

impl Default for WalkersConfig {
    fn default() -> Self {
        WalkersConfig {
            positions: vec![0, 0, 1],
            theta_left: 1.5,
            beta: 1.0,
            t_end: 10.0,
            seed: 3,
            master: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HydroConfig {
    pub u_left: f64,
    /// `(x, u right of x)` pairs, decreasing in u.
    pub breaks: Vec<(f64, f64)>,
    pub t_end: f64,
    /// Convexity scan grid `(lo, hi, step)`.
    pub grid: (f64, f64, f64),
}

impl Default for HydroConfig {
    fn default() -> Self {
        HydroConfig {
            u_left: 2.0,
            breaks: vec![(0.0, 1.0), (1.0, 0.0)],
            t_end: 1.0,
            grid: (-3.0, 3.0, 0.25),
        }
    }
}

impl HydroConfig {
    pub fn piecewise(&self) -> Result<PiecewiseProfile> {
        Ok(PiecewiseProfile::new(self.u_left, self.breaks.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareConfig {
    pub t_end: f64,
    pub half_width: i64,
    pub replicas: usize,
    pub seed: u64,
    pub window: (i64, i64),
    pub z_base: f64,
    pub tail_tol: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            t_end: 2.0,
            half_width: 40,
            replicas: 800,
            seed: 9,
            window: (-12, 12),
            z_base: 4.0,
            tail_tol: 1e-12,
        }
    }
}
