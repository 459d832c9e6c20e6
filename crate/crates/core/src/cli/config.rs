//! Run configuration and result envelope.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::dissipative::{DampingPhaseParams, NoiseScales, DEFAULT_FIRST_ORDER_LIMIT};
use crate::error::{invalid, Result};
use crate::grover::{self, GameConfig, Strategy};
use crate::iid::{EvolutionPlan, KickDistribution};
use crate::memory::{KernelVariant, MemoryKernel};
use crate::parrondo::CombinedGame;
use crate::qubit::DensityMatrix2;
use crate::C64;

pub const DEFAULT_TRIALS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Everything that determines a run's results. Thread count is deliberately
/// absent: it does not change the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: Params,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

impl RunConfig {
    pub fn new(params: Params) -> Self {
        Self { params, seed: 0, trials: DEFAULT_TRIALS, format: OutputFormat::Json, out: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        self.params.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Params {
    Iid(IidParams),
    Memory(MemoryParams),
    Dissipative(DissipativeParams),
    Parrondo(ParrondoParams),
    Grover(GroverParams),
}

impl Params {
    pub fn command(&self) -> &'static str {
        match self {
            Params::Iid(_) => "iid",
            Params::Memory(_) => "memory",
            Params::Dissipative(_) => "dissipative",
            Params::Parrondo(_) => "parrondo",
            Params::Grover(_) => "grover",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Params::Iid(p) => {
                p.initial.state()?;
                p.dist.validate()?;
                EvolutionPlan::new(p.steps, p.tau0).map(|_| ())
            }
            Params::Memory(p) => {
                p.initial.state()?;
                MemoryKernel::new(p.variant, p.epsilon).map(|_| ())
            }
            Params::Dissipative(p) => {
                p.initial.state()?;
                p.scales()?;
                DampingPhaseParams::new(p.p, 0.0, 0.0)?;
                if !(p.tau0.is_finite() && p.tau0 > 0.0) {
                    return Err(invalid("tau0 must be positive"));
                }
                Ok(())
            }
            Params::Parrondo(p) => CombinedGame::from_moduli(&p.moduli).map(|_| ()),
            Params::Grover(p) => {
                let cfg = p.game()?;
                p.strategy(&cfg).map(|_| ())
            }
        }
    }
}

/// Initial density matrix `(a, b; b*, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub a: f64,
    pub b_re: f64,
    pub b_im: f64,
    pub c: f64,
}

impl Default for InitialState {
    fn default() -> Self {
        Self { a: 0.5, b_re: 0.5, b_im: 0.0, c: 0.5 }
    }
}

impl InitialState {
    pub fn state(&self) -> Result<DensityMatrix2> {
        DensityMatrix2::new(self.a, C64::new(self.b_re, self.b_im), self.c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IidParams {
    pub dist: KickDistribution,
    pub steps: u64,
    pub tau0: f64,
    pub initial: InitialState,
    /// Skip Monte Carlo.
    pub exact: bool,
}

impl Default for IidParams {
    fn default() -> Self {
        Self {
            dist: KickDistribution::Gaussian { mu: 0.0, sigma2: 0.1 },
            steps: 10,
            tau0: 1.0,
            initial: InitialState::default(),
            exact: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemoryParams {
    pub variant: KernelVariant,
    pub epsilon: f64,
    pub steps: u64,
    pub initial: InitialState,
    pub exact: bool,
}

impl Default for MemoryParams {
    fn default() -> Self {
        Self { variant: KernelVariant::Combined, epsilon: 0.0, steps: 20, initial: InitialState::default(), exact: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DissipativeParams {
    pub p: f64,
    pub lambda_ad: f64,
    pub lambda_pd: f64,
    pub first_order_limit: f64,
    pub tau0: f64,
    pub initial: InitialState,
    pub exact: bool,
}

impl Default for DissipativeParams {
    fn default() -> Self {
        Self {
            p: 0.5,
            lambda_ad: 1e-3,
            lambda_pd: 1e-2,
            first_order_limit: DEFAULT_FIRST_ORDER_LIMIT,
            tau0: 1.0,
            initial: InitialState::default(),
            exact: false,
        }
    }
}

impl DissipativeParams {
    pub fn scales(&self) -> Result<NoiseScales> {
        let s = NoiseScales { lambda_ad: self.lambda_ad, lambda_pd: self.lambda_pd, first_order_limit: self.first_order_limit };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParrondoParams {
    pub moduli: Vec<u64>,
    /// Skip the simulation (which plays `trials` rounds).
    pub exact: bool,
    /// Also propagate the exact position law for this many rounds.
    pub transient: Option<usize>,
}

impl Default for ParrondoParams {
    fn default() -> Self {
        Self { moduli: vec![3, 7], exact: false, transient: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Fixed,
    Sqrt,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroverParams {
    pub n_qubits: u32,
    pub target: u64,
    pub strategy: StrategyKind,
    /// Horizon for the fixed strategy.
    pub m: Option<u64>,
    /// Stopping target for the adaptive strategy; defaults to the optimal k.
    pub k_star: Option<u64>,
    /// Last k of the success curve; defaults to `ceil(pi sqrt(N)/2)`, capped.
    pub max_k: Option<u64>,
}

impl Default for GroverParams {
    fn default() -> Self {
        Self { n_qubits: 4, target: 0, strategy: StrategyKind::Adaptive, m: None, k_star: None, max_k: None }
    }
}

impl GroverParams {
    pub fn game(&self) -> Result<GameConfig> {
        GameConfig::new(self.n_qubits, self.target)
    }

    pub fn strategy(&self, cfg: &GameConfig) -> Result<Strategy> {
        Ok(match self.strategy {
            StrategyKind::Fixed => Strategy::FixedHorizon {
                m: self.m.ok_or_else(|| invalid("the fixed strategy needs a horizon m"))?,
            },
            StrategyKind::Sqrt => Strategy::SqrtHorizon,
            StrategyKind::Adaptive => Strategy::AdaptiveTracking { k_star: self.k_star.unwrap_or_else(|| grover::optimal_k(cfg)) },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub trials: u64,
    pub version: &'static str,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Standard errors of the Monte Carlo estimates, by name.
    pub stderr: std::collections::BTreeMap<String, f64>,
    pub clamped: Option<u64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultEnvelope {
    pub inputs: RunConfig,
    pub results: serde_json::Value,
    pub diagnostics: Diagnostics,
    pub provenance: Provenance,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_uses_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"params":{"parrondo":{"exact":true}}}"#).unwrap();
        assert_eq!(c.trials, DEFAULT_TRIALS);
        assert_eq!(c.params, Params::Parrondo(ParrondoParams { exact: true, ..Default::default() }));
        assert!(serde_json::from_str::<RunConfig>(r#"{"params":{"parrondo":{"moduly":[3]}}}"#).is_err());
    }

    #[test]
    fn config_round_trip() {
        let mut c = RunConfig::new(Params::Iid(IidParams { dist: KickDistribution::exponential(0.5, 2.0).unwrap(), ..Default::default() }));
        c.seed = 42;
        c.format = OutputFormat::Csv;
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&s).unwrap(), c);
    }

    #[test]
    fn validation_catches_bad_parameters() {
        let bad = RunConfig::new(Params::Memory(MemoryParams { epsilon: 1.0, ..Default::default() }));
        assert!(bad.validate().unwrap_err().is_validation());
        let bad = RunConfig::new(Params::Grover(GroverParams { strategy: StrategyKind::Fixed, ..Default::default() }));
        assert!(bad.validate().is_err());
        let bad = RunConfig::new(Params::Iid(IidParams { dist: KickDistribution::Gaussian { mu: 0.0, sigma2: -1.0 }, ..Default::default() }));
        assert!(bad.validate().is_err());
    }
}
