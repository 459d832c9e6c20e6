//! Search game built from a target-phase flip `A` and a reflection `B`
//! about the uniform superposition.
//!
//! Words are written left to right and act right to left, so `"BA"` applies
//! `A` first. States can be tracked either as full statevectors or in the
//! two-dimensional span of the target and the uniform non-target vector.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::mc::{par_trials, RunningMoments};
use crate::rng::derive_stream;
use crate::C64;

pub const MAX_FULL_QUBITS: u32 = 24;
pub const MAX_QUBITS: u32 = 60;
pub const NORM_TOL: f64 = 1e-10;
const TIE_TOL: f64 = 1e-12;
const SCAN_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    n_qubits: u32,
    target: u64,
}

impl GameConfig {
    pub fn new(n_qubits: u32, target: u64) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(invalid(format!("n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}")));
        }
        if target >= 1u64 << n_qubits {
            return Err(invalid(format!("target {target} out of range for {n_qubits} qubits")));
        }
        Ok(Self { n_qubits, target })
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    pub fn target(&self) -> u64 {
        self.target
    }

    pub fn dimension(&self) -> u64 {
        1u64 << self.n_qubits
    }

    /// `asin(1/sqrt(N))`, half the rotation angle of one iterate.
    pub fn theta(&self) -> f64 {
        (1.0 / (self.dimension() as f64).sqrt()).asin()
    }

    fn check_full(&self) -> Result<()> {
        if self.n_qubits > MAX_FULL_QUBITS {
            return Err(Error::Capacity(format!(
                "full statevector mode is limited to {MAX_FULL_QUBITS} qubits, got {}",
                self.n_qubits
            )));
        }
        Ok(())
    }
}

/// Operations shared by the two state representations.
pub trait GameState: Sized {
    fn apply_a(&mut self);
    fn apply_b(&mut self);
    /// `|<alpha|state>|^2`.
    fn success_probability(&self) -> f64;
    fn norm_sqr(&self) -> f64;

    fn grover_iterate(&mut self) {
        self.apply_a();
        self.apply_b();
    }

    fn apply_letter(&mut self, l: Letter) {
        match l {
            Letter::A => self.apply_a(),
            Letter::B => self.apply_b(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    target: usize,
}

impl StateVector {
    pub fn uniform(config: &GameConfig) -> Result<Self> {
        config.check_full()?;
        let n = config.dimension() as usize;
        let amp = C64::new(1.0 / (n as f64).sqrt(), 0.0);
        Ok(Self { amplitudes: vec![amp; n], target: config.target as usize })
    }

    pub fn basis(config: &GameConfig, x: u64) -> Result<Self> {
        config.check_full()?;
        if x >= config.dimension() {
            return Err(invalid("basis index out of range"));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); config.dimension() as usize];
        amplitudes[x as usize] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes, target: config.target as usize })
    }

    pub fn from_amplitudes(config: &GameConfig, amplitudes: Vec<C64>) -> Result<Self> {
        config.check_full()?;
        if amplitudes.len() as u64 != config.dimension() {
            return Err(invalid("amplitude vector has the wrong length"));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(invalid(format!("state is not normalised (norm^2 = {norm})")));
        }
        Ok(Self { amplitudes, target: config.target as usize })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl GameState for StateVector {
    fn apply_a(&mut self) {
        self.amplitudes[self.target] = -self.amplitudes[self.target];
    }

    fn apply_b(&mut self) {
        let n = self.amplitudes.len() as f64;
        let mean = self.amplitudes.iter().sum::<C64>() / n;
        for a in &mut self.amplitudes {
            *a = 2.0 * mean - *a;
        }
    }

    fn success_probability(&self) -> f64 {
        self.amplitudes[self.target].norm_sqr()
    }

    fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Coordinates along `|alpha>` and along the normalised sum of the other
/// `N - 1` basis vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoDState {
    pub c_target: C64,
    pub c_rest: C64,
    n_qubits: u32,
}

impl TwoDState {
    pub fn uniform(config: &GameConfig) -> Self {
        let n = config.dimension() as f64;
        Self {
            c_target: C64::new((1.0 / n).sqrt(), 0.0),
            c_rest: C64::new(((n - 1.0) / n).sqrt(), 0.0),
            n_qubits: config.n_qubits,
        }
    }

    pub fn new(config: &GameConfig, c_target: C64, c_rest: C64) -> Result<Self> {
        let norm = c_target.norm_sqr() + c_rest.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("two-dimensional state is not normalised (norm^2 = {norm})")));
        }
        Ok(Self { c_target, c_rest, n_qubits: config.n_qubits })
    }

    /// Full statevector with equal non-target amplitudes.
    pub fn embed(&self, config: &GameConfig) -> Result<StateVector> {
        config.check_full()?;
        let n = config.dimension() as usize;
        let rest = if n > 1 { self.c_rest / ((n - 1) as f64).sqrt() } else { C64::new(0.0, 0.0) };
        let mut amplitudes = vec![rest; n];
        amplitudes[config.target as usize] = self.c_target;
        Ok(StateVector { amplitudes, target: config.target as usize })
    }

    fn uniform_coords(&self) -> (f64, f64) {
        let n = (self.n_qubits as f64).exp2();
        ((1.0 / n).sqrt(), ((n - 1.0) / n).sqrt())
    }
}

impl GameState for TwoDState {
    fn apply_a(&mut self) {
        self.c_target = -self.c_target;
    }

    fn apply_b(&mut self) {
        let (s, c) = self.uniform_coords();
        let overlap = self.c_target * s + self.c_rest * c;
        self.c_target = 2.0 * overlap * s - self.c_target;
        self.c_rest = 2.0 * overlap * c - self.c_rest;
    }

    fn success_probability(&self) -> f64 {
        self.c_target.norm_sqr()
    }

    fn norm_sqr(&self) -> f64 {
        self.c_target.norm_sqr() + self.c_rest.norm_sqr()
    }
}

pub fn grover_iterate<S: GameState>(mut state: S) -> S {
    state.grover_iterate();
    state
}

/// `sin^2((2k+1) theta)`; `k = 0` returns `1/N` exactly.
pub fn success_closed_form(k: u64, config: &GameConfig) -> f64 {
    if k == 0 {
        return 1.0 / config.dimension() as f64;
    }
    ((2 * k + 1) as f64 * config.theta()).sin().powi(2)
}

/// `ceil(pi sqrt(N) / 4)`.
pub fn ceil_quarter_k(config: &GameConfig) -> u64 {
    (PI * (config.dimension() as f64).sqrt() / 4.0).ceil() as u64
}

/// Maximiser of [`success_closed_form`] over `0..=ceil(pi sqrt(N)/2)`,
/// smallest `k` on ties.
pub fn optimal_k(config: &GameConfig) -> u64 {
    let upper = (PI * (config.dimension() as f64).sqrt() / 2.0).ceil() as u64;
    let candidates: Vec<u64> = if upper <= SCAN_LIMIT {
        (0..=upper).collect()
    } else {
        // only the first peak lies inside the range
        let k0 = PI / (4.0 * config.theta()) - 0.5;
        let mut c = vec![0, upper, k0.floor().max(0.0) as u64, k0.ceil() as u64];
        c.retain(|&k| k <= upper);
        c.sort_unstable();
        c.dedup();
        c
    };
    let mut best = (candidates[0], success_closed_form(candidates[0], config));
    for &k in &candidates[1..] {
        let s = success_closed_form(k, config);
        if s > best.1 + TIE_TOL {
            best = (k, s);
        }
    }
    best.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Letter {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct OpWord {
    letters: Vec<Letter>,
}

impl OpWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        Self { letters }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// `(BA)^k`.
    pub fn grover_power(k: usize) -> Self {
        Self { letters: [Letter::B, Letter::A].repeat(k) }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Uniform random word of length `m`, one random bit per letter.
    pub fn random<R: Rng>(m: usize, rng: &mut R) -> Self {
        Self { letters: (0..m).map(|_| if rng.random::<bool>() { Letter::A } else { Letter::B }).collect() }
    }
}

impl fmt::Display for OpWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            f.write_str(match l {
                Letter::A => "A",
                Letter::B => "B",
            })?;
        }
        Ok(())
    }
}

impl FromStr for OpWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'A' | 'a' => Ok(Letter::A),
                'B' | 'b' => Ok(Letter::B),
                other => Err(invalid(format!("unknown letter {other:?} in word"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(OpWord::new)
    }
}

/// Cancels `AA` and `BB` until none remain, then drops the trailing `B`
/// (it acts first and fixes the uniform state).
pub fn reduce_word(word: &OpWord) -> OpWord {
    let mut stack: Vec<Letter> = Vec::with_capacity(word.len());
    for &l in &word.letters {
        if stack.last() == Some(&l) {
            stack.pop();
        } else {
            stack.push(l);
        }
    }
    while stack.last() == Some(&Letter::B) {
        stack.pop();
    }
    OpWord::new(stack)
}

/// Reduced length after prepending `letter` to a reduced word of length
/// `len`. Reduced words alternate and end in `A`, so the leftmost letter is
/// `A` exactly when `len` is odd.
pub fn reduced_length_step(len: u64, letter: Letter) -> u64 {
    if len == 0 {
        return match letter {
            Letter::A => 1,
            Letter::B => 0,
        };
    }
    let leftmost = if len % 2 == 1 { Letter::A } else { Letter::B };
    if letter == leftmost {
        len - 1
    } else {
        len + 1
    }
}

/// Payoff of the reduced word of length `len`: `A(BA)^j` and `(BA)^j` both
/// give `success_closed_form(j)`.
pub fn payoff_for_reduced_length(len: u64, config: &GameConfig) -> f64 {
    success_closed_form(len / 2, config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Full,
    TwoD,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FinalState {
    Full(StateVector),
    TwoD(TwoDState),
}

impl FinalState {
    pub fn success_probability(&self) -> f64 {
        match self {
            FinalState::Full(s) => s.success_probability(),
            FinalState::TwoD(s) => s.success_probability(),
        }
    }

    pub fn to_full(&self, config: &GameConfig) -> Result<StateVector> {
        match self {
            FinalState::Full(s) => Ok(s.clone()),
            FinalState::TwoD(s) => s.embed(config),
        }
    }
}

fn run_word<S: GameState>(mut state: S, word: &OpWord) -> S {
    for &l in word.letters.iter().rev() {
        state.apply_letter(l);
    }
    state
}

/// Applies `word` right to left to the uniform state.
pub fn apply_word(word: &OpWord, config: &GameConfig, mode: Mode) -> Result<FinalState> {
    Ok(match mode {
        Mode::Full => FinalState::Full(run_word(StateVector::uniform(config)?, word)),
        Mode::TwoD => FinalState::TwoD(run_word(TwoDState::uniform(config), word)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    FixedHorizon { m: u64 },
    /// Fixed horizon `m = 4 ceil(pi sqrt(N)/4)`.
    SqrtHorizon,
    /// Stop as soon as the reduced word equals `(BA)^k_star`.
    AdaptiveTracking { k_star: u64 },
}

impl Strategy {
    pub fn horizon(&self, config: &GameConfig) -> Option<u64> {
        match *self {
            Strategy::FixedHorizon { m } => Some(m),
            Strategy::SqrtHorizon => Some(4 * ceil_quarter_k(config)),
            Strategy::AdaptiveTracking { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyResult {
    pub strategy: Strategy,
    pub trials: u64,
    /// Mean measurement payoff over trials.
    pub win_prob: f64,
    pub stderr: f64,
    pub horizon: Option<u64>,
    /// Trial counts indexed by final reduced length.
    pub reduced_length_histogram: Vec<u64>,
    /// `(stopping time, count)` pairs, adaptive tracking only.
    pub stopping_times: Option<Vec<(u64, u64)>>,
    pub mean_stopping_time: Option<f64>,
    /// Exact expectation for fixed horizons.
    pub exact_win_prob: Option<f64>,
}

#[derive(Default)]
struct StrategyAcc {
    payoff: RunningMoments,
    lengths: Vec<u64>,
    stops: BTreeMap<u64, u64>,
    stop_moments: RunningMoments,
}

impl StrategyAcc {
    fn merge(&mut self, other: StrategyAcc) {
        self.payoff.merge(other.payoff);
        if self.lengths.len() < other.lengths.len() {
            self.lengths.resize(other.lengths.len(), 0);
        }
        for (i, c) in other.lengths.into_iter().enumerate() {
            self.lengths[i] += c;
        }
        for (t, c) in other.stops {
            *self.stops.entry(t).or_default() += c;
        }
        self.stop_moments.merge(other.stop_moments);
    }

    fn record_length(&mut self, len: u64) {
        let i = len as usize;
        if self.lengths.len() <= i {
            self.lengths.resize(i + 1, 0);
        }
        self.lengths[i] += 1;
    }
}

fn random_letter<R: Rng>(rng: &mut R) -> Letter {
    if rng.random::<bool>() {
        Letter::A
    } else {
        Letter::B
    }
}

/// Evaluates `strategy` over `trials` random letter sequences; trial `t`
/// draws its letters from `derive_stream(seed, t)`.
pub fn evaluate_strategy(strategy: &Strategy, config: &GameConfig, trials: u64, seed: u64) -> Result<StrategyResult> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let horizon = strategy.horizon(config);
    let payoffs: Vec<f64> = match (strategy, horizon) {
        (_, Some(m)) => payoff_table(m, config),
        (Strategy::AdaptiveTracking { k_star }, None) => payoff_table(2 * k_star, config),
        _ => unreachable!(),
    };
    let acc = par_trials(
        trials,
        StrategyAcc::default,
        |t, acc| {
            let mut rng = derive_stream(seed, t);
            let mut len = 0u64;
            match *strategy {
                Strategy::AdaptiveTracking { k_star } => {
                    let goal = 2 * k_star;
                    let mut steps = 0u64;
                    while len != goal {
                        len = reduced_length_step(len, random_letter(&mut rng));
                        steps += 1;
                    }
                    *acc.stops.entry(steps).or_default() += 1;
                    acc.stop_moments.push(steps as f64);
                }
                _ => {
                    for _ in 0..horizon.unwrap_or(0) {
                        len = reduced_length_step(len, random_letter(&mut rng));
                    }
                }
            }
            acc.record_length(len);
            acc.payoff.push(payoffs[len as usize]);
        },
        StrategyAcc::merge,
    );
    let adaptive = matches!(strategy, Strategy::AdaptiveTracking { .. });
    Ok(StrategyResult {
        strategy: *strategy,
        trials,
        win_prob: acc.payoff.mean(),
        stderr: acc.payoff.stderr(),
        horizon,
        reduced_length_histogram: acc.lengths,
        stopping_times: adaptive.then(|| acc.stops.into_iter().collect()),
        mean_stopping_time: adaptive.then(|| acc.stop_moments.mean()),
        exact_win_prob: horizon.map(|m| horizon_payoff_exact(m, config)),
    })
}

/// Payoff of each reduced length `0..=max_len`, from the two-dimensional
/// state of the reduced word itself (so a leftmost `B` is applied, not
/// assumed away).
pub fn payoff_table(max_len: u64, config: &GameConfig) -> Vec<f64> {
    let mut state = TwoDState::uniform(config);
    let mut out = Vec::with_capacity(max_len as usize + 1);
    out.push(success_closed_form(0, config));
    for len in 1..=max_len {
        state.apply_letter(if len % 2 == 1 { Letter::A } else { Letter::B });
        out.push(if len < 2 { success_closed_form(0, config) } else { state.success_probability() });
    }
    out
}

/// Law of the reduced length after `m` uniform random letters.
pub fn reduced_length_distribution(m: u64) -> Vec<f64> {
    let size = m as usize + 2;
    let mut p = vec![0.0; size];
    p[0] = 1.0;
    for _ in 0..m {
        let mut q = vec![0.0; size];
        q[0] += 0.5 * p[0];
        q[1] += 0.5 * p[0];
        for l in 1..size - 1 {
            q[l - 1] += 0.5 * p[l];
            q[l + 1] += 0.5 * p[l];
        }
        p = q;
    }
    p.truncate(m as usize + 1);
    p
}

/// Expected payoff after `m` uniform random letters, by dynamic
/// programming over the reduced length.
pub fn horizon_payoff_exact(m: u64, config: &GameConfig) -> f64 {
    reduced_length_distribution(m)
        .iter()
        .enumerate()
        .map(|(l, p)| p * payoff_for_reduced_length(l as u64, config))
        .sum()
}

/// Best payoff reachable with only `A` (reduced words `""` and `"A"`) and
/// the payoff with only `B`.
pub fn pure_game_payoffs(config: &GameConfig) -> (f64, f64) {
    let only_a = [OpWord::empty(), "A".parse().unwrap()]
        .iter()
        .map(|w| payoff_for_reduced_length(reduce_word(w).len() as u64, config))
        .fold(0.0, f64::max);
    let only_b = payoff_for_reduced_length(reduce_word(&"B".parse().unwrap()).len() as u64, config);
    (only_a, only_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop, prop_assert, prop_assert_eq, proptest};

    fn cfg(n: u32, t: u64) -> GameConfig {
        GameConfig::new(n, t).unwrap()
    }

    fn w(s: &str) -> OpWord {
        s.parse().unwrap()
    }

    /// Textbook step from scratch: oracle as a diagonal sign matrix, then
    /// the Hadamard-conjugated zero-state reflection `H (2|0><0| - I) H`.
    fn textbook_step(amps: &[C64], n: u32, target: usize) -> Vec<C64> {
        let dim = 1usize << n;
        let oracle: Vec<C64> = (0..dim).map(|x| if x == target { -amps[x] } else { amps[x] }).collect();
        let hadamard = |v: &[C64]| -> Vec<C64> {
            let scale = 1.0 / (dim as f64).sqrt();
            (0..dim)
                .map(|x| {
                    (0..dim)
                        .map(|y| if (x & y).count_ones() % 2 == 0 { v[y] } else { -v[y] })
                        .sum::<C64>()
                        * scale
                })
                .collect()
        };
        let mut h = hadamard(&oracle);
        for (x, a) in h.iter_mut().enumerate() {
            if x != 0 {
                *a = -*a;
            }
        }
        hadamard(&h)
    }

    fn random_state(n: u32, target: u64, seed: u64) -> StateVector {
        let mut rng = derive_stream(seed, 99);
        let mut amps: Vec<C64> = (0..1usize << n).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        StateVector::from_amplitudes(&cfg(n, target), amps).unwrap()
    }

    #[test]
    fn config_bounds() {
        assert!(GameConfig::new(0, 0).is_err());
        assert!(GameConfig::new(2, 4).is_err());
        assert!(GameConfig::new(60, 0).is_ok());
        assert!(matches!(StateVector::uniform(&cfg(25, 0)), Err(Error::Capacity(_))));
        assert!(matches!(apply_word(&w("BA"), &cfg(30, 0), Mode::Full), Err(Error::Capacity(_))));
        assert!(apply_word(&w("BA"), &cfg(30, 0), Mode::TwoD).is_ok());
    }

    #[test]
    fn operator_examples() {
        let c = cfg(2, 3);
        let mut s = StateVector::uniform(&c).unwrap();
        s.apply_a();
        let re: Vec<f64> = s.amplitudes().iter().map(|a| a.re).collect();
        assert_eq!(re, vec![0.5, 0.5, 0.5, -0.5]);

        let mut e0 = StateVector::basis(&c, 0).unwrap();
        e0.apply_b();
        let re: Vec<f64> = e0.amplitudes().iter().map(|a| a.re).collect();
        assert_eq!(re, vec![-0.5, 0.5, 0.5, 0.5]);

        let mut u = StateVector::uniform(&c).unwrap();
        u.apply_b();
        assert!(u.max_abs_diff(&StateVector::uniform(&c).unwrap()) < 1e-12);

        for seed in 0..5 {
            let s = random_state(4, 5, seed);
            let mut a2 = s.clone();
            a2.apply_a();
            a2.apply_a();
            let mut b2 = s.clone();
            b2.apply_b();
            b2.apply_b();
            assert!(a2.max_abs_diff(&s) < 1e-12 && b2.max_abs_diff(&s) < 1e-12);
        }
    }

    #[test]
    fn iterate_matches_textbook() {
        for n in 2..=8 {
            let target = (1u64 << n) - 2;
            let s = random_state(n, target, n as u64);
            let ours = grover_iterate(s.clone());
            let theirs = textbook_step(s.amplitudes(), n, target as usize);
            let d = ours.amplitudes().iter().zip(&theirs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(d < 1e-12, "n = {n}: {d}");
        }
    }

    #[test]
    fn iterate_examples() {
        let s = grover_iterate(StateVector::uniform(&cfg(2, 1)).unwrap());
        assert!((s.success_probability() - 1.0).abs() < 1e-12);
        let c = cfg(4, 9);
        let mut s = StateVector::uniform(&c).unwrap();
        for _ in 0..3 {
            s.grover_iterate();
        }
        assert!((s.success_probability() - 0.9613).abs() < 1e-4);
        assert!((s.success_probability() - success_closed_form(3, &c)).abs() < 1e-10);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(success_closed_form(0, &cfg(5, 0)), 1.0 / 32.0);
        assert!((success_closed_form(1, &cfg(2, 0)) - 1.0).abs() < 1e-12);
        assert!((success_closed_form(4, &cfg(4, 0)) - 0.581704).abs() < 1e-6);
        for n in 1..=12 {
            let c = cfg(n, 0);
            let mut s = TwoDState::uniform(&c);
            for k in 0..40 {
                assert!((s.success_probability() - success_closed_form(k, &c)).abs() < 1e-10);
                s.grover_iterate();
            }
        }
    }

    #[test]
    fn optimal_k_examples() {
        assert_eq!(optimal_k(&cfg(2, 0)), 1);
        assert_eq!(optimal_k(&cfg(4, 0)), 3);
        assert_eq!(ceil_quarter_k(&cfg(4, 0)), 4);
        let c = cfg(10, 0);
        assert_eq!(optimal_k(&c), 25);
        assert!(success_closed_form(25, &c) > 0.999);
        assert_eq!(ceil_quarter_k(&c), 26);
        assert!(success_closed_form(ceil_quarter_k(&cfg(3, 0)), &cfg(3, 0)) < 0.5);
        let big = cfg(50, 0);
        let k = optimal_k(&big);
        assert!(success_closed_form(k, &big) > 1.0 - 1e-9);
    }

    #[test]
    fn reduction_examples() {
        assert_eq!(reduce_word(&w("AABBA")), w("A"));
        assert_eq!(reduce_word(&w("BA")), w("BA"));
        assert_eq!(reduce_word(&w("BBBB")), OpWord::empty());
        assert_eq!(reduce_word(&w("BAB")), w("BA"));
        assert_eq!(w("ABBA").to_string(), "ABBA");
        assert!("ABC".parse::<OpWord>().is_err());
    }

    #[test]
    fn grover_power_word_matches_iterates() {
        let c = cfg(5, 17);
        for k in 0..8 {
            let via_word = apply_word(&OpWord::grover_power(k), &c, Mode::Full).unwrap().to_full(&c).unwrap();
            let mut s = StateVector::uniform(&c).unwrap();
            for _ in 0..k {
                s.grover_iterate();
            }
            assert!(via_word.max_abs_diff(&s) < 1e-12);
        }
        assert_eq!(apply_word(&OpWord::empty(), &c, Mode::Full).unwrap().to_full(&c).unwrap(), StateVector::uniform(&c).unwrap());
    }

    #[test]
    fn payoff_table_matches_closed_form() {
        let c = cfg(7, 3);
        for (l, p) in payoff_table(60, &c).iter().enumerate() {
            assert!((p - payoff_for_reduced_length(l as u64, &c)).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_games_lose() {
        for n in 2..=10 {
            let c = cfg(n, 1);
            let (a, b) = pure_game_payoffs(&c);
            assert_eq!(a, 1.0 / c.dimension() as f64);
            assert_eq!(b, 1.0 / c.dimension() as f64);
        }
    }

    #[test]
    fn zero_horizon_gives_uniform_payoff() {
        let c = cfg(6, 0);
        let r = evaluate_strategy(&Strategy::FixedHorizon { m: 0 }, &c, 100, 1).unwrap();
        assert_eq!(r.win_prob, 1.0 / 64.0);
        assert_eq!(r.stderr, 0.0);
    }

    #[test]
    fn adaptive_stops_exactly() {
        let c = cfg(6, 0);
        let k = optimal_k(&c);
        let r = evaluate_strategy(&Strategy::AdaptiveTracking { k_star: k }, &c, 2000, 3).unwrap();
        assert!(r.win_prob >= success_closed_form(k, &c) - 1e-10);
        assert_eq!(r.reduced_length_histogram[2 * k as usize], 2000);
        let stops: u64 = r.stopping_times.unwrap().iter().map(|s| s.1).sum();
        assert_eq!(stops, 2000);
    }

    #[test]
    fn fixed_horizon_matches_dp() {
        let c = cfg(6, 0);
        let r = evaluate_strategy(&Strategy::FixedHorizon { m: 20 }, &c, 50_000, 11).unwrap();
        let exact = r.exact_win_prob.unwrap();
        assert!((r.win_prob - exact).abs() < 4.0 * r.stderr, "{} vs {exact}", r.win_prob);
        let law = reduced_length_distribution(20);
        assert!((law.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn reduction_is_sound(bits in prop::collection::vec(any::<bool>(), 0..120), n in 2u32..8) {
            let word = OpWord::new(bits.iter().map(|&b| if b { Letter::A } else { Letter::B }).collect());
            let c = GameConfig::new(n, 1).unwrap();
            let red = reduce_word(&word);
            prop_assert_eq!(reduce_word(&red), red.clone());
            let full = apply_word(&word, &c, Mode::Full).unwrap().to_full(&c).unwrap();
            let reduced = apply_word(&red, &c, Mode::Full).unwrap().to_full(&c).unwrap();
            prop_assert!(full.max_abs_diff(&reduced) < 1e-10);
            // incremental walk agrees with the batch reduction
            let len = word.letters().iter().rev().fold(0, |l, &x| reduced_length_step(l, x));
            prop_assert_eq!(len as usize, red.len());
            // non-target amplitudes stay equal
            let amps = full.amplitudes();
            let other = amps[0];
            prop_assert!(amps.iter().enumerate().all(|(i, a)| i == 1 || (a - other).norm() < 1e-10));
            prop_assert!((full.norm_sqr() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn two_d_matches_full(bits in prop::collection::vec(any::<bool>(), 0..200), n in 1u32..9, t in 0u64..256) {
            let c = GameConfig::new(n, t % (1 << n)).unwrap();
            let word = OpWord::new(bits.iter().map(|&b| if b { Letter::A } else { Letter::B }).collect());
            let full = apply_word(&word, &c, Mode::Full).unwrap().to_full(&c).unwrap();
            let two = apply_word(&word, &c, Mode::TwoD).unwrap().to_full(&c).unwrap();
            prop_assert!(full.max_abs_diff(&two) < 1e-10);
        }
    }
}
