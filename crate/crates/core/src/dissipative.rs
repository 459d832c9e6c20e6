//! Amplitude damping mixed with dephasing, and its average over Gaussian
//! noise in the damping strength and dephasing angle.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::mc::{par_trials, StateEstimate, StateMoments};
use crate::qubit::{apply_channel, rz_unchecked, DensityMatrix2, KrausChannel, KrausTerm, Mat2};
use crate::rng::derive_stream;
use crate::C64;

/// Default upper bound on `lambda_ad` for the first-order formulas.
pub const DEFAULT_FIRST_ORDER_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampingPhaseParams {
    pub p: f64,
    pub alpha: f64,
    pub theta: f64,
}

impl DampingPhaseParams {
    pub fn new(p: f64, alpha: f64, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid("mixing probability p must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(invalid("damping strength alpha must lie in [0, 1]"));
        }
        if !theta.is_finite() {
            return Err(invalid("dephasing angle must be finite"));
        }
        Ok(Self { p, alpha, theta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseScales {
    pub lambda_ad: f64,
    pub lambda_pd: f64,
    /// Largest `lambda_ad` accepted by the first-order formulas.
    #[serde(default = "default_limit")]
    pub first_order_limit: f64,
}

fn default_limit() -> f64 {
    DEFAULT_FIRST_ORDER_LIMIT
}

impl NoiseScales {
    pub fn new(lambda_ad: f64, lambda_pd: f64) -> Result<Self> {
        let s = Self { lambda_ad, lambda_pd, first_order_limit: DEFAULT_FIRST_ORDER_LIMIT };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_ad.is_finite() && self.lambda_ad >= 0.0) {
            return Err(invalid("lambda_ad must be finite and non-negative"));
        }
        if !(self.lambda_pd.is_finite() && self.lambda_pd >= 0.0) {
            return Err(invalid("lambda_pd must be finite and non-negative"));
        }
        if !(self.first_order_limit.is_finite() && self.first_order_limit > 0.0) {
            return Err(invalid("first-order limit must be positive"));
        }
        Ok(())
    }

    fn check_regime(&self) -> Result<()> {
        if self.lambda_ad > self.first_order_limit {
            return Err(Error::OutOfRegime(format!(
                "lambda_ad = {} exceeds the first-order limit {}",
                self.lambda_ad, self.first_order_limit
            )));
        }
        Ok(())
    }

    /// `E[alpha] = sqrt(4 lambda_ad / pi)`
    pub fn mean_damping(&self) -> f64 {
        (4.0 * self.lambda_ad / PI).sqrt()
    }

    /// First-order `E[sqrt(1 - alpha)] = 1 - sqrt(lambda_ad / pi)`
    pub fn mean_amplitude_factor(&self) -> f64 {
        1.0 - (self.lambda_ad / PI).sqrt()
    }
}

/// `p E0 . E0† + p E1 . E1† + (1-p) Rz . Rz†` with
/// `E0 = diag(1, sqrt(1-alpha))`, `E1 = sqrt(alpha) |0><1|`.
pub fn build_damping_phase_channel(params: &DampingPhaseParams) -> Result<KrausChannel> {
    let DampingPhaseParams { p, alpha, theta } = DampingPhaseParams::new(params.p, params.alpha, params.theta)?;
    let z = C64::new(0.0, 0.0);
    let e0: Mat2 = [[C64::new(1.0, 0.0), z], [z, C64::new((1.0 - alpha).sqrt(), 0.0)]];
    let e1: Mat2 = [[z, C64::new(alpha.sqrt(), 0.0)], [z, z]];
    KrausChannel::new(vec![
        KrausTerm { weight: p, op: e0 },
        KrausTerm { weight: p, op: e1 },
        KrausTerm { weight: 1.0 - p, op: *rz_unchecked(theta).matrix() },
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AveragedChannelEstimate {
    #[serde(flatten)]
    pub estimate: StateEstimate,
    /// Trials whose sampled `alpha` exceeded 1 and was clamped.
    pub clamped: u64,
}

#[derive(Default)]
struct Acc {
    moments: StateMoments,
    clamped: u64,
}

/// Monte Carlo average of the channel over `alpha = min(|X|, 1)`,
/// `X ~ N(0, 2 lambda_ad)`, and `theta ~ N(0, 2 lambda_pd)`.
pub fn averaged_channel_mc(
    rho0: &DensityMatrix2,
    p: f64,
    scales: &NoiseScales,
    trials: u64,
    seed: u64,
) -> Result<AveragedChannelEstimate> {
    scales.validate()?;
    DampingPhaseParams::new(p, 0.0, 0.0)?;
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let (sd_ad, sd_pd) = ((2.0 * scales.lambda_ad).sqrt(), (2.0 * scales.lambda_pd).sqrt());
    let acc = par_trials(
        trials,
        Acc::default,
        |t, acc| {
            let mut rng = derive_stream(seed, t);
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            let mut alpha = (sd_ad * x).abs();
            if alpha > 1.0 {
                alpha = 1.0;
                acc.clamped += 1;
            }
            let ch = build_damping_phase_channel(&DampingPhaseParams { p, alpha, theta: sd_pd * y })
                .expect("sampled parameters are in range");
            acc.moments.push(&apply_channel(&ch, rho0));
        },
        |a, b| {
            a.moments.merge(b.moments);
            a.clamped += b.clamped;
        },
    );
    Ok(AveragedChannelEstimate { estimate: acc.moments.into_estimate(), clamped: acc.clamped })
}

/// Per-step off-diagonal factor `p (1 - sqrt(lambda_ad/pi)) + (1-p) e^{-lambda_pd}`.
pub fn coherence_factor(p: f64, scales: &NoiseScales) -> f64 {
    p * scales.mean_amplitude_factor() + (1.0 - p) * (-scales.lambda_pd).exp()
}

/// Per-step excited-population factor `1 - p sqrt(4 lambda_ad / pi)`.
pub fn population_factor(p: f64, scales: &NoiseScales) -> f64 {
    1.0 - p * scales.mean_damping()
}

/// First-order averaged matrix, with populations and coherence read as
/// density-matrix entries.
pub fn averaged_channel_first_order(rho0: &DensityMatrix2, p: f64, scales: &NoiseScales) -> Result<Mat2> {
    scales.validate()?;
    scales.check_regime()?;
    DampingPhaseParams::new(p, 0.0, 0.0)?;
    let relax = population_factor(p, scales);
    let off = rho0.b() * coherence_factor(p, scales);
    Ok([
        [C64::new(1.0 - relax * (1.0 - rho0.a()), 0.0), off],
        [off.conj(), C64::new(rho0.c() * relax, 0.0)],
    ])
}

/// Largest mixing probability consistent with the relaxation-time premise:
/// `(1 - e^{-lambda_pd}) / (1 - e^{-lambda_pd} + sqrt(lambda_ad / pi))`.
pub fn max_mixing_probability(scales: &NoiseScales) -> Result<f64> {
    scales.validate()?;
    if scales.lambda_ad == 0.0 && scales.lambda_pd == 0.0 {
        return Err(Error::UndefinedBound);
    }
    let dephase = -(-scales.lambda_pd).exp_m1();
    Ok(dephase / (dephase + (scales.lambda_ad / PI).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaxationTimes {
    #[serde(rename = "T1")]
    pub t1: f64,
    #[serde(rename = "T2")]
    pub t2: f64,
}

/// `T1 = -tau0 / ln(population factor)`, `T2 = -tau0 / ln(coherence factor)`.
/// A factor of exactly 1 gives an infinite time.
pub fn effective_t1_t2(p: f64, scales: &NoiseScales, tau0: f64) -> Result<RelaxationTimes> {
    scales.validate()?;
    DampingPhaseParams::new(p, 0.0, 0.0)?;
    if !(tau0.is_finite() && tau0 > 0.0) {
        return Err(invalid("tau0 must be positive"));
    }
    let time = |factor: f64, name: &str| {
        if !(factor > 0.0 && factor <= 1.0) {
            return Err(Error::OutOfRegime(format!("{name} factor {factor} outside (0, 1]")));
        }
        let l = factor.ln();
        Ok(if l == 0.0 { f64::INFINITY } else { -tau0 / l })
    };
    Ok(RelaxationTimes {
        t1: time(population_factor(p, scales), "population")?,
        t2: time(coherence_factor(p, scales), "coherence")?,
    })
}
