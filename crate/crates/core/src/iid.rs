//! Independent, identically distributed phase kicks.
//!
//! A kick `rz(theta)` multiplies the coherence by `e^{-i theta}`, so after `n`
//! independent kicks the expected coherence is `b (gamma e^{-i phi})^n` where
//! `gamma e^{i phi} = E[e^{i theta}]` is the characteristic function of the
//! kick law at one.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::mc::{par_trials, state_curve, StateEstimate, StateMoments};
use crate::quadrature;
use crate::qubit::{apply_unitary, canonical_angle, rz_unchecked, DensityMatrix2};
use crate::rng::{derive_stream, Stream};
use crate::C64;

/// Weights below this are dropped from delta mixtures.
const WEIGHT_FLOOR: f64 = 1e-15;
/// Absolute tolerance for the quadrature reference.
pub const QUADRATURE_TOL: f64 = 1e-11;

/// Finite mixture of point masses `sum_k w_k delta(theta - theta_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct DeltaMixture {
    atoms: Vec<(f64, f64)>,
}

impl DeltaMixture {
    /// `pairs` are `(weight, angle)`.
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.iter().any(|&(w, t)| !w.is_finite() || !t.is_finite()) {
            return Err(invalid("mixture weights and angles must be finite"));
        }
        if pairs.iter().any(|&(w, _)| w < 0.0) {
            return Err(invalid("mixture weights must be non-negative"));
        }
        let total: f64 = pairs.iter().map(|p| p.0).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("mixture weights sum to {total}, not 1")));
        }
        let atoms: Vec<_> = pairs.into_iter().filter(|&(w, _)| w >= WEIGHT_FLOOR).collect();
        Ok(Self { atoms })
    }

    /// Equal weights on `angles`.
    pub fn uniform(angles: &[f64]) -> Result<Self> {
        if angles.is_empty() {
            return Err(invalid("uniform mixture needs at least one angle"));
        }
        let w = 1.0 / angles.len() as f64;
        Self::new(angles.iter().map(|&t| (w, t)).collect())
    }

    pub fn point(angle: f64) -> Result<Self> {
        Self::new(vec![(1.0, angle)])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// `sum_k w_k e^{i theta_k}`
    pub fn char_value(&self) -> C64 {
        self.atoms.iter().map(|&(w, t)| C64::from_polar(w, t)).sum()
    }

    pub(crate) fn sample(&self, rng: &mut Stream) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for &(w, t) in &self.atoms {
            acc += w;
            if u < acc {
                return t;
            }
        }
        self.atoms.last().map(|a| a.1).unwrap_or(0.0)
    }
}

impl TryFrom<Vec<(f64, f64)>> for DeltaMixture {
    type Error = Error;
    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<DeltaMixture> for Vec<(f64, f64)> {
    fn from(d: DeltaMixture) -> Self {
        d.atoms
    }
}

/// Law of a single phase kick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KickDistribution {
    DeltaMixture { atoms: DeltaMixture },
    /// Density `e^{-theta/(omega tau1)} / (omega tau1)` on `theta >= 0`.
    Exponential { omega: f64, tau1: f64 },
    /// Normal with mean `mu` and variance `sigma2`.
    Gaussian { mu: f64, sigma2: f64 },
}

impl KickDistribution {
    pub fn delta_mixture(pairs: Vec<(f64, f64)>) -> Result<Self> {
        Ok(Self::DeltaMixture { atoms: DeltaMixture::new(pairs)? })
    }

    pub fn exponential(omega: f64, tau1: f64) -> Result<Self> {
        let d = Self::Exponential { omega, tau1 };
        d.validate()?;
        Ok(d)
    }

    pub fn gaussian(mu: f64, sigma2: f64) -> Result<Self> {
        let d = Self::Gaussian { mu, sigma2 };
        d.validate()?;
        Ok(d)
    }

    /// Re-checks invariants, for values built by deserialization.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::DeltaMixture { .. } => Ok(()),
            Self::Exponential { omega, tau1 } => {
                let s = omega * tau1;
                if s.is_finite() && s > 0.0 {
                    Ok(())
                } else {
                    Err(invalid("exponential kicks need omega * tau1 > 0"))
                }
            }
            Self::Gaussian { mu, sigma2 } => {
                if mu.is_finite() && sigma2.is_finite() && sigma2 >= 0.0 {
                    Ok(())
                } else {
                    Err(invalid("gaussian kicks need finite mu and sigma2 >= 0"))
                }
            }
        }
    }

    pub(crate) fn sample(&self, rng: &mut Stream) -> f64 {
        match self {
            Self::DeltaMixture { atoms } => atoms.sample(rng),
            Self::Exponential { omega, tau1 } => {
                let e: f64 = rng.sample(Exp1);
                omega * tau1 * e
            }
            Self::Gaussian { mu, sigma2 } => {
                if *sigma2 == 0.0 {
                    *mu
                } else {
                    let z: f64 = rng.sample(StandardNormal);
                    mu + sigma2.sqrt() * z
                }
            }
        }
    }
}

/// Polar form of the characteristic function, `gamma e^{i phi}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFactor {
    pub gamma: f64,
    /// In `(-pi, pi]`.
    pub phi: f64,
}

impl DecayFactor {
    fn from_value(z: C64) -> Self {
        let gamma = z.norm();
        let phi = if gamma == 0.0 { 0.0 } else { canonical_angle(z.arg()) };
        Self { gamma, phi }
    }

    pub fn value(&self) -> C64 {
        C64::from_polar(self.gamma, self.phi)
    }
}

/// Closed-form characteristic function.
pub fn char_function(dist: &KickDistribution) -> DecayFactor {
    match *dist {
        KickDistribution::DeltaMixture { ref atoms } => DecayFactor::from_value(atoms.char_value()),
        KickDistribution::Gaussian { mu, sigma2 } => DecayFactor { gamma: (-0.5 * sigma2).exp(), phi: canonical_angle(mu) },
        KickDistribution::Exponential { omega, tau1 } => {
            let s = omega * tau1;
            DecayFactor { gamma: 1.0 / (1.0 + s * s).sqrt(), phi: s.atan() }
        }
    }
}

/// `E[e^{i theta}]` by adaptive quadrature of the density (delta mixtures
/// are summed directly). Reference for [`char_function`].
pub fn char_function_quadrature(dist: &KickDistribution) -> C64 {
    match *dist {
        KickDistribution::DeltaMixture { ref atoms } => atoms.char_value(),
        KickDistribution::Gaussian { mu, sigma2 } => {
            if sigma2 == 0.0 {
                return C64::from_polar(1.0, mu);
            }
            let sigma = sigma2.sqrt();
            let norm = 1.0 / (sigma * (2.0 * PI).sqrt());
            quadrature::integrate(
                |t| C64::from_polar(norm * (-(t - mu).powi(2) / (2.0 * sigma2)).exp(), t),
                mu - 10.0 * sigma,
                mu + 10.0 * sigma,
                QUADRATURE_TOL,
            )
        }
        KickDistribution::Exponential { omega, tau1 } => {
            let s = omega * tau1;
            quadrature::integrate(|t| C64::from_polar((-t / s).exp() / s, t), 0.0, 40.0 * s, QUADRATURE_TOL)
        }
    }
}

/// `n` kicks of duration `tau0` each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionPlan {
    pub steps: u64,
    pub tau0: f64,
}

impl EvolutionPlan {
    pub fn new(steps: u64, tau0: f64) -> Result<Self> {
        if !(tau0.is_finite() && tau0 > 0.0) {
            return Err(invalid("interaction time tau0 must be positive"));
        }
        Ok(Self { steps, tau0 })
    }

    /// Plan covering total time `t`, rounded to the nearest whole step.
    pub fn for_duration(t: f64, tau0: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(invalid("duration must be non-negative"));
        }
        Self::new((t / tau0).round() as u64, tau0)
    }

    pub fn duration(&self) -> f64 {
        self.steps as f64 * self.tau0
    }
}

/// Expected state after the plan: `b -> b gamma^n e^{-i n phi}`.
pub fn evolve_iid(rho0: &DensityMatrix2, dist: &KickDistribution, plan: &EvolutionPlan) -> DensityMatrix2 {
    let f = char_function(dist);
    let n = plan.steps as f64;
    rho0.with_coherence(rho0.b() * C64::from_polar(f.gamma.powf(n), -n * f.phi))
}

/// Trajectory average of explicit `rz` kicks. Trial `t` draws from
/// `derive_stream(seed, t)`.
pub fn evolve_iid_mc(
    rho0: &DensityMatrix2,
    dist: &KickDistribution,
    plan: &EvolutionPlan,
    trials: u64,
    seed: u64,
) -> Result<StateEstimate> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let moments = par_trials(
        trials,
        StateMoments::default,
        |t, acc| {
            let mut rng = derive_stream(seed, t);
            let mut rho = *rho0;
            for _ in 0..plan.steps {
                rho = apply_unitary(&rz_unchecked(dist.sample(&mut rng)), &rho);
            }
            acc.push(&rho);
        },
        |a, b| a.merge(b),
    );
    Ok(moments.into_estimate())
}

/// Like [`evolve_iid_mc`] but returns the estimate after every step
/// `0..=steps`; the last entry equals the [`evolve_iid_mc`] result.
pub fn evolve_iid_mc_curve(
    rho0: &DensityMatrix2,
    dist: &KickDistribution,
    plan: &EvolutionPlan,
    trials: u64,
    seed: u64,
) -> Result<Vec<StateEstimate>> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    Ok(state_curve(trials, plan.steps as usize, |t, record| {
        let mut rng = derive_stream(seed, t);
        let mut rho = *rho0;
        record(&rho);
        for _ in 0..plan.steps {
            rho = apply_unitary(&rz_unchecked(dist.sample(&mut rng)), &rho);
            record(&rho);
        }
    }))
}

/// Gaussian kick law with `mu = sin(omega/lambda)`,
/// `sigma2 = 2 (1 - cos(omega/lambda))`.
pub fn milburn_params(omega: f64, lambda: f64) -> Result<KickDistribution> {
    if !(lambda.is_finite() && lambda > 0.0) || !omega.is_finite() {
        return Err(invalid("milburn parameters need finite omega and lambda > 0"));
    }
    let x = omega / lambda;
    KickDistribution::gaussian(x.sin(), 2.0 * (1.0 - x.cos()))
}

/// Gaussian kick law whose characteristic function is `gamma e^{i phi}`.
pub fn gaussian_for_target(gamma: f64, phi: f64) -> Result<KickDistribution> {
    if !(gamma > 0.0 && gamma <= 1.0) || !phi.is_finite() {
        return Err(invalid("target gamma must lie in (0, 1]"));
    }
    KickDistribution::gaussian(canonical_angle(phi), (-2.0 * gamma.ln()).max(0.0))
}

/// True iff the kicks leave coherence intact, i.e. all mass sits on angles
/// congruent modulo `2 pi`.
pub fn is_decoherence_free(dist: &KickDistribution, tol: f64) -> Result<bool> {
    match dist {
        KickDistribution::DeltaMixture { atoms } => Ok((atoms.char_value().norm() - 1.0).abs() <= tol),
        _ => Err(Error::UnsupportedVariant("decoherence-free test needs a delta mixture")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::coherence;
    use std::f64::consts::FRAC_PI_2;

    fn three_point() -> KickDistribution {
        KickDistribution::DeltaMixture { atoms: DeltaMixture::uniform(&[-FRAC_PI_2, 0.0, FRAC_PI_2]).unwrap() }
    }

    #[test]
    fn three_point_mixture_decays_by_a_third() {
        let f = char_function(&three_point());
        assert!((f.gamma - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(f.phi, 0.0);
    }

    #[test]
    fn degenerate_gaussian_is_identity() {
        let f = char_function(&KickDistribution::gaussian(0.0, 0.0).unwrap());
        assert_eq!((f.gamma, f.phi), (1.0, 0.0));
    }

    #[test]
    fn exponential_unit_product() {
        let d = KickDistribution::exponential(2.0, 0.5).unwrap();
        let f = char_function(&d);
        assert!((f.gamma - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((f.phi - PI / 4.0).abs() < 1e-15);
        let q = char_function_quadrature(&d);
        assert!((q - f.value()).norm() < 1e-9);
        assert!((q.norm() - 0.707_106_781_186_547_5).abs() < 1e-9);
    }

    #[test]
    fn invalid_distributions() {
        assert!(KickDistribution::exponential(-1.0, 1.0).is_err());
        assert!(KickDistribution::gaussian(0.0, -0.1).is_err());
        assert!(KickDistribution::delta_mixture(vec![(0.5, 0.0)]).is_err());
        assert!(KickDistribution::delta_mixture(vec![(1.1, 0.0), (-0.1, 1.0)]).is_err());
    }

    #[test]
    fn tiny_weights_are_dropped() {
        let d = DeltaMixture::new(vec![(1.0 - 1e-16, 0.2), (1e-16, 3.0)]).unwrap();
        assert_eq!(d.atoms().len(), 1);
    }

    #[test]
    fn evolve_examples() {
        let rho = DensityMatrix2::plus();
        let zero = EvolutionPlan::new(0, 1.0).unwrap();
        assert_eq!(evolve_iid(&rho, &three_point(), &zero), rho);

        let two = EvolutionPlan::new(2, 1.0).unwrap();
        let out = evolve_iid(&rho, &three_point(), &two);
        assert!((out.b() - C64::new(1.0 / 18.0, 0.0)).norm() < 1e-15);

        let g = gaussian_for_target(0.9, 0.1).unwrap();
        let one = EvolutionPlan::new(1, 1.0).unwrap();
        let out = evolve_iid(&rho, &g, &one);
        assert!((out.b() - 0.5 * C64::from_polar(0.9, -0.1)).norm() < 1e-15);
    }

    #[test]
    fn semigroup_and_diagonals() {
        let rho = DensityMatrix2::new(0.8, C64::new(0.1, 0.3), 0.2).unwrap();
        let d = KickDistribution::exponential(1.3, 0.7).unwrap();
        let p = |n| EvolutionPlan::new(n, 1.0).unwrap();
        let whole = evolve_iid(&rho, &d, &p(7));
        let split = evolve_iid(&evolve_iid(&rho, &d, &p(3)), &d, &p(4));
        assert!((whole.b() - split.b()).norm() < 1e-15);
        assert_eq!((whole.a(), whole.c()), (0.8, 0.2));
    }

    #[test]
    fn plan_validation() {
        assert!(EvolutionPlan::new(3, 0.0).is_err());
        assert_eq!(EvolutionPlan::for_duration(10.0, 2.5).unwrap().steps, 4);
    }

    #[test]
    fn milburn_examples() {
        let KickDistribution::Gaussian { mu, sigma2 } = milburn_params(0.0, 2.0).unwrap() else { panic!() };
        assert_eq!((mu, sigma2), (0.0, 0.0));
        let KickDistribution::Gaussian { mu, sigma2 } = milburn_params(FRAC_PI_2, 1.0).unwrap() else { panic!() };
        assert!((mu - 1.0).abs() < 1e-15 && (sigma2 - 2.0).abs() < 1e-15);
        let d = milburn_params(3.0, 3.0).unwrap();
        let q = char_function_quadrature(&d);
        assert!((q.norm() - (-(1.0 - 1.0f64.cos())).exp()).abs() < 1e-9);
        assert!((q.norm() - 0.631_4).abs() < 1e-4);
        assert!(milburn_params(1.0, 0.0).is_err());
    }

    #[test]
    fn target_inversion() {
        let KickDistribution::Gaussian { sigma2, .. } = gaussian_for_target(1.0, 0.0).unwrap() else { panic!() };
        assert_eq!(sigma2, 0.0);
        let KickDistribution::Gaussian { mu, sigma2 } = gaussian_for_target(0.5, 0.2).unwrap() else { panic!() };
        assert_eq!(mu, 0.2);
        assert!((sigma2 - 1.386_294_361_119_890_6).abs() < 1e-15);
        let d = gaussian_for_target(0.9, -0.3).unwrap();
        assert!((char_function_quadrature(&d) - C64::from_polar(0.9, -0.3)).norm() < 1e-9);
        assert!(gaussian_for_target(0.0, 0.0).is_err());
        assert!(gaussian_for_target(1.2, 0.0).is_err());
    }

    #[test]
    fn lattice_criterion() {
        let single = KickDistribution::delta_mixture(vec![(1.0, 1.3)]).unwrap();
        assert!(is_decoherence_free(&single, 1e-12).unwrap());
        let wrapped = KickDistribution::delta_mixture(vec![(0.5, 0.7), (0.5, 0.7 + 2.0 * PI)]).unwrap();
        assert!(is_decoherence_free(&wrapped, 1e-12).unwrap());
        assert!(!is_decoherence_free(&three_point(), 1e-12).unwrap());
        let unit_spaced = KickDistribution::delta_mixture(vec![(0.5, 0.7), (0.5, 1.7)]).unwrap();
        assert!(!is_decoherence_free(&unit_spaced, 1e-12).unwrap());
        assert!(matches!(
            is_decoherence_free(&KickDistribution::gaussian(0.0, 1.0).unwrap(), 1e-12),
            Err(Error::UnsupportedVariant(_))
        ));
    }

    #[test]
    fn point_mass_mc_is_exact() {
        let d = KickDistribution::delta_mixture(vec![(1.0, 0.4)]).unwrap();
        let plan = EvolutionPlan::new(3, 1.0).unwrap();
        let rho = DensityMatrix2::plus();
        let est = evolve_iid_mc(&rho, &d, &plan, 1000, 9).unwrap();
        assert_eq!(est.stderr, 0.0);
        let exact = apply_unitary(&rz_unchecked(0.4), &apply_unitary(&rz_unchecked(0.4), &apply_unitary(&rz_unchecked(0.4), &rho)));
        assert_eq!(est.rho.b(), exact.b());
    }

    #[test]
    fn mc_matches_closed_form() {
        let rho = DensityMatrix2::plus();
        let one = EvolutionPlan::new(1, 1.0).unwrap();
        let est = evolve_iid_mc(&rho, &three_point(), &one, 100_000, 1).unwrap();
        assert!((est.rho.b() - C64::new(1.0 / 6.0, 0.0)).norm() < 3.0 * est.stderr);

        let g = KickDistribution::gaussian(0.0, 0.5).unwrap();
        let ten = EvolutionPlan::new(10, 1.0).unwrap();
        let est = evolve_iid_mc(&rho, &g, &ten, 100_000, 2).unwrap();
        assert!((coherence(&est.rho) - 0.5 * (-2.5f64).exp()).abs() < 3.0 * est.stderr);
        assert!(evolve_iid_mc(&rho, &g, &ten, 0, 2).is_err());

        let curve = evolve_iid_mc_curve(&rho, &g, &ten, 100_000, 2).unwrap();
        assert_eq!(curve[10], est);
        for (n, e) in curve.iter().enumerate() {
            let expect = evolve_iid(&rho, &g, &EvolutionPlan::new(n as u64, 1.0).unwrap());
            assert!((e.rho.b() - expect.b()).norm() < 4.0 * e.stderr.max(1e-15), "step {n}");
        }
    }

    #[test]
    fn distribution_json_round_trip() {
        let d = three_point();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<KickDistribution>(&s).unwrap(), d);
        let bad = r#"{"kind":"delta_mixture","atoms":[[0.3,0.0]]}"#;
        assert!(serde_json::from_str::<KickDistribution>(bad).is_err());
    }
}
