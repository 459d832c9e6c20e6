//! Phase kicks with one step of memory.
//!
//! The next kick angle depends on which of two angle classes the previous one
//! fell in. Every kernel here maps each class to a mixture supported on the
//! union of the two classes, so the coherence recursion closes over two
//! values and is exact.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};

use crate::error::{invalid, Result};
use crate::mc::{par_trials, state_curve, StateEstimate, StateMoments};
use crate::qubit::{apply_unitary, canonical_angle, rz_unchecked, DensityMatrix2};
use crate::rng::derive_stream;
use crate::C64;

/// Tolerance for matching an angle to a class member.
pub const ANGLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AngleClass {
    /// `{-pi/2, 0, pi/2}`
    SetA,
    /// `{-3pi/4, epsilon, pi/4}`
    SetB,
}

impl AngleClass {
    pub fn support(self, epsilon: f64) -> [f64; 3] {
        match self {
            AngleClass::SetA => [-FRAC_PI_2, 0.0, FRAC_PI_2],
            AngleClass::SetB => [-3.0 * FRAC_PI_4, epsilon, FRAC_PI_4],
        }
    }

    fn index(self) -> usize {
        match self {
            AngleClass::SetA => 0,
            AngleClass::SetB => 1,
        }
    }

    fn other(self) -> Self {
        match self {
            AngleClass::SetA => AngleClass::SetB,
            AngleClass::SetB => AngleClass::SetA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelVariant {
    PureA,
    PureB,
    Combined,
}

/// One point mass of a conditional law. `class` records which branch of the
/// kernel produced the angle, which resolves membership when `epsilon = 0`
/// puts the angle 0 in both classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub weight: f64,
    pub angle: f64,
    pub class: AngleClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemoryKernel {
    epsilon: f64,
    variant: KernelVariant,
    rules: [Vec<Atom>; 2],
}

fn uniform_over(class: AngleClass, epsilon: f64, weight: f64) -> impl Iterator<Item = Atom> {
    class.support(epsilon).into_iter().map(move |angle| Atom { weight: weight / 3.0, angle, class })
}

impl MemoryKernel {
    pub fn new(variant: KernelVariant, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon.abs() < FRAC_PI_8) {
            return Err(invalid("epsilon must satisfy |epsilon| < pi/8"));
        }
        use AngleClass::*;
        let a = |angle| Atom { weight: 1.0, angle, class: SetA };
        let b = |angle| Atom { weight: 1.0, angle, class: SetB };
        let rules = match variant {
            KernelVariant::PureA => [uniform_over(SetA, epsilon, 1.0).collect(), vec![a(0.0)]],
            KernelVariant::PureB => [vec![b(epsilon)], uniform_over(SetB, epsilon, 1.0).collect()],
            KernelVariant::Combined => [
                std::iter::once(Atom { weight: 0.5, ..b(epsilon) }).chain(uniform_over(SetA, epsilon, 0.5)).collect(),
                std::iter::once(Atom { weight: 0.5, ..a(0.0) }).chain(uniform_over(SetB, epsilon, 0.5)).collect(),
            ],
        };
        Ok(Self { epsilon, variant, rules })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn variant(&self) -> KernelVariant {
        self.variant
    }

    /// Conditional law of the next angle given the class of the previous one.
    pub fn rule(&self, class: AngleClass) -> &[Atom] {
        &self.rules[class.index()]
    }

    /// Class whose membership the kernel tests explicitly; every other
    /// angle takes the "otherwise" branch.
    fn primary_class(&self) -> AngleClass {
        match self.variant {
            KernelVariant::PureB => AngleClass::SetB,
            KernelVariant::PureA | KernelVariant::Combined => AngleClass::SetA,
        }
    }

    /// Class the chain starts in: angle 0 for the A and combined kernels,
    /// angle `epsilon` for the pure B kernel.
    pub fn initial_class(&self) -> AngleClass {
        self.primary_class()
    }

    pub fn initial_angle(&self) -> f64 {
        match self.initial_class() {
            AngleClass::SetA => 0.0,
            AngleClass::SetB => self.epsilon,
        }
    }

    /// Conditional law given an arbitrary previous angle.
    pub fn conditional(&self, previous: f64) -> &[Atom] {
        let primary = self.primary_class();
        let hit = primary
            .support(self.epsilon)
            .iter()
            .any(|&s| canonical_angle(previous - s).abs() <= ANGLE_TOL);
        if hit {
            self.rule(primary)
        } else {
            self.rule(primary.other())
        }
    }
}

/// `(f_k(SetA), f_k(SetB))` for `k = 1..=n`; `f_0 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecursionTrace {
    pub values: Vec<(C64, C64)>,
}

impl RecursionTrace {
    pub fn at(&self, k: usize, class: AngleClass) -> C64 {
        if k == 0 {
            return C64::new(1.0, 0.0);
        }
        let v = self.values[k - 1];
        match class {
            AngleClass::SetA => v.0,
            AngleClass::SetB => v.1,
        }
    }
}

/// Exact evaluation of `f_1(c) = E[e^{i phi} | c]`,
/// `f_{k+1}(c) = E[e^{i phi} f_k(class(phi)) | c]` over the two classes.
pub fn f_recursion(kernel: &MemoryKernel, n: usize) -> RecursionTrace {
    let step = |prev: [C64; 2]| -> [C64; 2] {
        let eval = |class: AngleClass| {
            kernel
                .rule(class)
                .iter()
                .map(|at| C64::from_polar(at.weight, at.angle) * prev[at.class.index()])
                .sum::<C64>()
        };
        [eval(AngleClass::SetA), eval(AngleClass::SetB)]
    };
    let mut values = Vec::with_capacity(n);
    let mut f = [C64::new(1.0, 0.0); 2];
    for _ in 0..n {
        f = step(f);
        values.push((f[0], f[1]));
    }
    RecursionTrace { values }
}

/// Geometric-mean decay per step, `|f_n(start)|^{1/n}` from the kernel's
/// initial class.
pub fn effective_decay(kernel: &MemoryKernel, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(invalid("effective decay needs n >= 2"));
    }
    let trace = f_recursion(kernel, n);
    Ok(trace.at(n, kernel.initial_class()).norm().powf(1.0 / n as f64))
}

/// Expected state after `n` correlated kicks: `b -> b conj(f_n(start))`
/// (a kick `rz(theta)` multiplies `b` by `e^{-i theta}`).
pub fn expected_state(rho0: &DensityMatrix2, kernel: &MemoryKernel, n: usize) -> Result<DensityMatrix2> {
    if n == 0 {
        return Ok(*rho0);
    }
    let f = f_recursion(kernel, n).at(n, kernel.initial_class());
    Ok(rho0.with_coherence(rho0.b() * f.conj()))
}

/// Samples angle chains from the kernel's initial class and averages the
/// rotated states.
pub fn evolve_memory_mc(
    rho0: &DensityMatrix2,
    kernel: &MemoryKernel,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<StateEstimate> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let moments = par_trials(
        trials,
        StateMoments::default,
        |t, acc| acc.push(&run_chain(rho0, kernel, n, seed, t, |_| {})),
        |a, b| a.merge(b),
    );
    Ok(moments.into_estimate())
}

/// Estimates after every step `0..=n`; the last entry equals the
/// [`evolve_memory_mc`] result.
pub fn evolve_memory_mc_curve(
    rho0: &DensityMatrix2,
    kernel: &MemoryKernel,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<StateEstimate>> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    Ok(state_curve(trials, n, |t, record| {
        record(rho0);
        run_chain(rho0, kernel, n, seed, t, |rho| record(rho));
    }))
}

fn run_chain(
    rho0: &DensityMatrix2,
    kernel: &MemoryKernel,
    n: usize,
    seed: u64,
    t: u64,
    mut each: impl FnMut(&DensityMatrix2),
) -> DensityMatrix2 {
    let mut rng = derive_stream(seed, t);
    let mut class = kernel.initial_class();
    let mut rho = *rho0;
    for _ in 0..n {
        let rule = kernel.rule(class);
        let u: f64 = rng.random();
        let mut cum = 0.0;
        let mut pick = rule[rule.len() - 1];
        for at in rule {
            cum += at.weight;
            if u < cum {
                pick = *at;
                break;
            }
        }
        class = pick.class;
        rho = apply_unitary(&rz_unchecked(pick.angle), &rho);
        each(&rho);
    }
    rho
}
