//! Dispatch from a validated [`RunConfig`] to the simulation modules.

use serde::Serialize;
use std::f64::consts::PI;

use super::config::*;
use crate::dissipative::{self, AveragedChannelEstimate, RelaxationTimes};
use crate::error::{Error, Result};
use crate::grover::{self, StrategyResult};
use crate::iid::{self, DecayFactor, EvolutionPlan};
use crate::mc::StateEstimate;
use crate::memory::{self, KernelVariant, MemoryKernel};
use crate::parrondo::{self, CombinedGame, EmpiricalStats, GameStats, GeneralRates};
use crate::qubit::{coherence, DensityMatrix2, Mat2};
use crate::C64;

/// Default cap on the length of the Grover success curve.
pub const MAX_CURVE_K: u64 = 4096;

/// CSV table: a fixed header and stringified rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Capacity(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Capacity(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub envelope: ResultEnvelope,
    pub table: Table,
}

impl RunOutput {
    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(&self.envelope).expect("envelope serializes");
                s.push('\n');
                Ok(s)
            }
            OutputFormat::Csv => self.table.to_csv(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct CurvePoint {
    n: u64,
    coherence: Option<f64>,
    analytic_coherence: f64,
}

fn curve_table(points: &[CurvePoint]) -> Table {
    Table {
        header: vec!["n", "coherence", "analytic_coherence"],
        rows: points
            .iter()
            .map(|p| vec![p.n.to_string(), p.coherence.map(|c| c.to_string()).unwrap_or_default(), p.analytic_coherence.to_string()])
            .collect(),
    }
}

fn curve(analytic: impl Fn(u64) -> f64, mc: Option<&[StateEstimate]>, steps: u64) -> Vec<CurvePoint> {
    (0..=steps)
        .map(|n| CurvePoint { n, coherence: mc.map(|c| coherence(&c[n as usize].rho)), analytic_coherence: analytic(n) })
        .collect()
}

/// Runs `config` on the current rayon pool.
pub fn execute(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let mut diag = Diagnostics::default();
    let (results, table) = match &config.params {
        Params::Iid(p) => run_iid(p, config, &mut diag)?,
        Params::Memory(p) => run_memory(p, config, &mut diag)?,
        Params::Dissipative(p) => run_dissipative(p, config, &mut diag)?,
        Params::Parrondo(p) => run_parrondo(p, config, &mut diag)?,
        Params::Grover(p) => run_grover(p, config, &mut diag)?,
    };
    Ok(RunOutput {
        envelope: ResultEnvelope {
            inputs: config.clone(),
            results,
            diagnostics: diag,
            provenance: Provenance { seed: config.seed, trials: config.trials, version: crate::VERSION },
        },
        table,
    })
}

fn to_value<T: Serialize>(t: &T) -> serde_json::Value {
    serde_json::to_value(t).expect("results serialize")
}

#[derive(Serialize)]
struct IidResults {
    #[serde(flatten)]
    char_function: DecayFactor,
    quadrature: Option<C64>,
    decoherence_free: Option<bool>,
    duration: f64,
    analytic: DensityMatrix2,
    monte_carlo: Option<StateEstimate>,
    curve: Vec<CurvePoint>,
}

fn run_iid(p: &IidParams, cfg: &RunConfig, diag: &mut Diagnostics) -> Result<(serde_json::Value, Table)> {
    let rho0 = p.initial.state()?;
    let plan = EvolutionPlan::new(p.steps, p.tau0)?;
    let mc = if p.exact { None } else { Some(iid::evolve_iid_mc_curve(&rho0, &p.dist, &plan, cfg.trials, cfg.seed)?) };
    if let Some(c) = &mc {
        diag.stderr.insert("coherence".into(), c[p.steps as usize].stderr);
    }
    let at = |n: u64| coherence(&iid::evolve_iid(&rho0, &p.dist, &EvolutionPlan { steps: n, tau0: p.tau0 }));
    let points = curve(at, mc.as_deref(), p.steps);
    let table = curve_table(&points);
    let quadrature = match p.dist {
        iid::KickDistribution::DeltaMixture { .. } => None,
        _ => Some(iid::char_function_quadrature(&p.dist)),
    };
    let r = IidResults {
        char_function: iid::char_function(&p.dist),
        quadrature,
        decoherence_free: iid::is_decoherence_free(&p.dist, 1e-12).ok(),
        duration: plan.duration(),
        analytic: iid::evolve_iid(&rho0, &p.dist, &plan),
        monte_carlo: mc.map(|c| c[p.steps as usize]),
        curve: points,
    };
    Ok((to_value(&r), table))
}

#[derive(Serialize)]
struct MemoryResults {
    variant: KernelVariant,
    epsilon: f64,
    steps: u64,
    /// `|f_n|^{1/n}`, defined for `n >= 2`.
    decay_per_step: Option<f64>,
    f_n: C64,
    analytic: DensityMatrix2,
    monte_carlo: Option<StateEstimate>,
    curve: Vec<CurvePoint>,
}

fn run_memory(p: &MemoryParams, cfg: &RunConfig, diag: &mut Diagnostics) -> Result<(serde_json::Value, Table)> {
    let rho0 = p.initial.state()?;
    let kernel = MemoryKernel::new(p.variant, p.epsilon)?;
    let n = p.steps as usize;
    let trace = memory::f_recursion(&kernel, n);
    let mc = if p.exact { None } else { Some(memory::evolve_memory_mc_curve(&rho0, &kernel, n, cfg.trials, cfg.seed)?) };
    if let Some(c) = &mc {
        diag.stderr.insert("coherence".into(), c[n].stderr);
    }
    let b0 = rho0.b().norm();
    let points = curve(|k| b0 * trace.at(k as usize, kernel.initial_class()).norm(), mc.as_deref(), p.steps);
    let table = curve_table(&points);
    let r = MemoryResults {
        variant: p.variant,
        epsilon: p.epsilon,
        steps: p.steps,
        decay_per_step: if n >= 2 { Some(memory::effective_decay(&kernel, n)?) } else { None },
        f_n: trace.at(n, kernel.initial_class()),
        analytic: memory::expected_state(&rho0, &kernel, n)?,
        monte_carlo: mc.map(|c| c[n]),
        curve: points,
    };
    Ok((to_value(&r), table))
}

/// Keeps out-of-regime and undefined results as warnings.
fn soft<T>(r: Result<T>, diag: &mut Diagnostics) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ (Error::OutOfRegime(_) | Error::UndefinedBound)) => {
            diag.warnings.push(e.to_string());
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

#[derive(Serialize)]
struct DissipativeResults {
    p: f64,
    lambda_ad: f64,
    lambda_pd: f64,
    coherence_factor: f64,
    population_factor: f64,
    first_order: Option<Mat2>,
    monte_carlo: Option<AveragedChannelEstimate>,
    max_mixing_probability: Option<f64>,
    relaxation_times: Option<RelaxationTimes>,
}

fn run_dissipative(p: &DissipativeParams, cfg: &RunConfig, diag: &mut Diagnostics) -> Result<(serde_json::Value, Table)> {
    let rho0 = p.initial.state()?;
    let scales = p.scales()?;
    let first_order = soft(dissipative::averaged_channel_first_order(&rho0, p.p, &scales), diag)?;
    let max_mix = soft(dissipative::max_mixing_probability(&scales), diag)?;
    let times = soft(dissipative::effective_t1_t2(p.p, &scales, p.tau0), diag)?;
    let mc = if p.exact { None } else { Some(dissipative::averaged_channel_mc(&rho0, p.p, &scales, cfg.trials, cfg.seed)?) };
    if let Some(m) = &mc {
        diag.stderr.insert("coherence".into(), m.estimate.stderr);
        diag.stderr.insert("population".into(), m.estimate.stderr_population);
        diag.clamped = Some(m.clamped);
    }
    let mc_m = mc.map(|m| m.estimate.rho.matrix());
    let cell = |m: Option<Mat2>, i: usize, j: usize, im: bool| {
        m.map(|m| if im { m[i][j].im } else { m[i][j].re }.to_string()).unwrap_or_default()
    };
    let mut rows = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            rows.push(vec![
                i.to_string(),
                j.to_string(),
                cell(first_order, i, j, false),
                cell(first_order, i, j, true),
                cell(mc_m, i, j, false),
                cell(mc_m, i, j, true),
            ]);
        }
    }
    let table = Table { header: vec!["row", "col", "first_order_re", "first_order_im", "monte_carlo_re", "monte_carlo_im"], rows };
    let r = DissipativeResults {
        p: p.p,
        lambda_ad: p.lambda_ad,
        lambda_pd: p.lambda_pd,
        coherence_factor: dissipative::coherence_factor(p.p, &scales),
        population_factor: dissipative::population_factor(p.p, &scales),
        first_order,
        monte_carlo: mc,
        max_mixing_probability: max_mix,
        relaxation_times: times,
    };
    Ok((to_value(&r), table))
}

#[derive(Serialize)]
struct StationarySummary {
    support_size: u64,
    doubly_stochastic: bool,
    non_coprime_moduli: bool,
    reducible: bool,
    power_iteration_residual: f64,
    power_iterations: u32,
}

#[derive(Serialize)]
struct ParrondoResults {
    moduli: Vec<u64>,
    modulus: u64,
    #[serde(flatten)]
    combined: GameStats,
    single_games: Vec<(u64, GameStats)>,
    stationary: StationarySummary,
    general_rates: Option<GeneralRates>,
    simulation: Option<EmpiricalStats>,
    transient_win_prob: Option<Vec<f64>>,
}

fn run_parrondo(p: &ParrondoParams, cfg: &RunConfig, diag: &mut Diagnostics) -> Result<(serde_json::Value, Table)> {
    let game = CombinedGame::from_moduli(&p.moduli)?;
    let st = parrondo::stationary_distribution(&game)?;
    if st.non_coprime_moduli {
        diag.warnings.push("moduli are not pairwise coprime".into());
    }
    if st.reducible {
        diag.warnings.push(format!("chain from 0 reaches only {} of {} positions", st.support_size, st.modulus));
    }
    let combined = parrondo::exact_rate(&game)?;
    let mut single_games = Vec::new();
    for &m in &p.moduli {
        single_games.push((m, parrondo::exact_rate(&CombinedGame::from_moduli(&[m])?)?));
    }
    let general_rates = match p.moduli[..] {
        [m, n] => parrondo::general_rates(m, n).ok(),
        _ => None,
    };
    let simulation = if p.exact { None } else { Some(parrondo::simulate(&game, cfg.trials, cfg.seed)?) };
    if let Some(s) = &simulation {
        diag.stderr.insert("win_prob".into(), s.binomial_stderr);
    }
    let rows = st
        .probabilities
        .iter()
        .enumerate()
        .map(|(k, pr)| {
            let win = parrondo::is_winning(&parrondo::WheelPosition::new(k as u64, st.modulus).expect("k < L"));
            vec![k.to_string(), format!("{}/{}", pr.numer(), pr.denom()), win.to_string()]
        })
        .collect();
    let table = Table { header: vec!["position", "probability", "winning"], rows };
    let r = ParrondoResults {
        moduli: p.moduli.clone(),
        modulus: st.modulus,
        combined,
        single_games,
        stationary: StationarySummary {
            support_size: st.support_size,
            doubly_stochastic: st.doubly_stochastic,
            non_coprime_moduli: st.non_coprime_moduli,
            reducible: st.reducible,
            power_iteration_residual: st.power_iteration_residual,
            power_iterations: st.power_iterations,
        },
        general_rates,
        simulation,
        transient_win_prob: p.transient.map(|t| parrondo::transient_win_probabilities(&game, t)),
    };
    Ok((to_value(&r), table))
}

#[derive(Serialize)]
struct GroverResults {
    n_qubits: u32,
    dimension: u64,
    target: u64,
    optimal_k: u64,
    optimal_success: f64,
    ceil_quarter_k: u64,
    ceil_quarter_success: f64,
    pure_a_payoff: f64,
    pure_b_payoff: f64,
    evaluation: StrategyResult,
    curve: Vec<(u64, f64)>,
}

fn run_grover(p: &GroverParams, cfg: &RunConfig, diag: &mut Diagnostics) -> Result<(serde_json::Value, Table)> {
    let game = p.game()?;
    let strategy = p.strategy(&game)?;
    let upper = (PI * (game.dimension() as f64).sqrt() / 2.0).ceil() as u64;
    let max_k = p.max_k.unwrap_or(upper.min(MAX_CURVE_K));
    let eval = grover::evaluate_strategy(&strategy, &game, cfg.trials, cfg.seed)?;
    diag.stderr.insert("win_prob".into(), eval.stderr);
    if eval.win_prob <= 0.5 {
        diag.warnings.push(format!("strategy does not win: payoff {} <= 1/2", eval.win_prob));
    }
    let curve: Vec<(u64, f64)> = (0..=max_k).map(|k| (k, grover::success_closed_form(k, &game))).collect();
    let table = Table {
        header: vec!["k", "success_prob"],
        rows: curve.iter().map(|(k, s)| vec![k.to_string(), s.to_string()]).collect(),
    };
    let (a, b) = grover::pure_game_payoffs(&game);
    let ok = grover::optimal_k(&game);
    let pk = grover::ceil_quarter_k(&game);
    let r = GroverResults {
        n_qubits: game.n_qubits(),
        dimension: game.dimension(),
        target: game.target(),
        optimal_k: ok,
        optimal_success: grover::success_closed_form(ok, &game),
        ceil_quarter_k: pk,
        ceil_quarter_success: grover::success_closed_form(pk, &game),
        pure_a_payoff: a,
        pure_b_payoff: b,
        evaluation: eval,
        curve,
    };
    Ok((to_value(&r), table))
}
