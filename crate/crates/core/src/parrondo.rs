//! Vector-rotating wheel games.
//!
//! A robot rotates the wheel by a uniformly chosen multiple of `2 pi / m`; the
//! player wins a round when the vector ends in the upper half-plane. Positions
//! of a combined game live on `Z_L` with `L = lcm` of the moduli. All exact
//! results use integer or rational arithmetic.

use num_integer::Integer;
use num_rational::Rational64;
use rand::Rng;
use serde::{Serialize, Serializer};
use std::collections::VecDeque;

use crate::error::{invalid, Error, Result};
use crate::rng::{derive_stream, Stream};

/// Largest modulus for which `transition_matrix` materialises the full
/// matrix.
pub const DENSE_LIMIT: u64 = 1024;

/// Angle `2 pi k / L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct WheelPosition {
    k: u64,
    modulus: u64,
}

impl WheelPosition {
    pub fn new(k: u64, modulus: u64) -> Result<Self> {
        if modulus == 0 || k >= modulus {
            return Err(invalid(format!("position {k} is not on the {modulus}-cycle")));
        }
        Ok(Self { k, modulus })
    }

    pub fn origin(modulus: u64) -> Result<Self> {
        Self::new(0, modulus)
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn angle(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.k as f64 / self.modulus as f64
    }
}

/// Winning region is the closed upper half `[-pi/2, pi/2]`, i.e.
/// `k/L <= 1/4` or `k/L >= 3/4`.
pub fn is_winning(pos: &WheelPosition) -> bool {
    let (k, l) = (pos.k as u128, pos.modulus as u128);
    4 * k <= l || 4 * k >= 3 * l
}

/// Number of winning positions on the `modulus`-cycle, by enumeration.
pub fn winning_count(modulus: u64) -> u64 {
    (0..modulus).filter(|&k| is_winning(&WheelPosition { k, modulus })).count() as u64
}

/// Rotation by `2 pi j / m`, `j` uniform on `0..m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RotationGame {
    modulus: u64,
}

impl RotationGame {
    /// Odd `m >= 1`; `m = 1` is the do-nothing game.
    pub fn new(modulus: u64) -> Result<Self> {
        if modulus == 0 || modulus % 2 == 0 {
            return Err(invalid(format!("game modulus must be odd and positive, got {modulus}")));
        }
        Ok(Self { modulus })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

pub fn play_round(pos: &WheelPosition, game: &RotationGame, rng: &mut Stream) -> Result<WheelPosition> {
    let (l, m) = (pos.modulus, game.modulus);
    if l % m != 0 {
        return Err(Error::IncompatibleModulus { modulus: l, game: m });
    }
    let j = rng.random_range(0..m);
    Ok(WheelPosition { k: (pos.k + j * (l / m)) % l, modulus: l })
}

/// Uniformly random choice among `games` at every round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CombinedGame {
    games: Vec<RotationGame>,
}

impl CombinedGame {
    pub fn new(games: Vec<RotationGame>) -> Result<Self> {
        if games.is_empty() {
            return Err(invalid("a combined game needs at least one game"));
        }
        let l = games.iter().fold(1u64, |acc, g| acc.lcm(&g.modulus));
        if l > u32::MAX as u64 {
            return Err(invalid("lcm of moduli is too large"));
        }
        Ok(Self { games })
    }

    pub fn from_moduli(moduli: &[u64]) -> Result<Self> {
        Self::new(moduli.iter().map(|&m| RotationGame::new(m)).collect::<Result<_>>()?)
    }

    pub fn single(game: RotationGame) -> Self {
        Self { games: vec![game] }
    }

    pub fn games(&self) -> &[RotationGame] {
        &self.games
    }

    pub fn moduli(&self) -> Vec<u64> {
        self.games.iter().map(|g| g.modulus).collect()
    }

    /// `L`, the lcm of the moduli.
    pub fn modulus(&self) -> u64 {
        self.games.iter().fold(1u64, |acc, g| acc.lcm(&g.modulus))
    }

    pub fn pairwise_coprime(&self) -> bool {
        let m = self.moduli();
        (0..m.len()).all(|i| (i + 1..m.len()).all(|j| m[i].gcd(&m[j]) == 1))
    }

    /// Step law over `Z_L` as integer weights with common denominator
    /// `r L` (`r` games): `sum_i sum_j [offset = j L/m_i] L/m_i`.
    fn step_weights(&self) -> (Vec<u64>, u64) {
        let l = self.modulus();
        let r = self.games.len() as u64;
        let mut w = vec![0u64; l as usize];
        for g in &self.games {
            let stride = l / g.modulus;
            for j in 0..g.modulus {
                w[(j * stride % l) as usize] += stride;
            }
        }
        (w, r * l)
    }

    /// Transition probabilities out of any position as `(offset, prob)`.
    pub fn step_distribution(&self) -> Vec<(u64, Rational64)> {
        let (w, den) = self.step_weights();
        w.iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(o, &c)| (o as u64, Rational64::new(c as i64, den as i64)))
            .collect()
    }

    /// Dense `L × L` transition matrix (average of the per-game circulants).
    pub fn transition_matrix(&self) -> Result<Vec<Vec<Rational64>>> {
        let l = self.modulus();
        if l > DENSE_LIMIT {
            return Err(Error::Capacity(format!("dense transition matrix limited to L <= {DENSE_LIMIT}")));
        }
        let steps = self.step_distribution();
        let mut p = vec![vec![Rational64::from_integer(0); l as usize]; l as usize];
        for (i, row) in p.iter_mut().enumerate() {
            for &(o, pr) in &steps {
                row[((i as u64 + o) % l) as usize] += pr;
            }
        }
        Ok(p)
    }

    /// Row and column sums of the transition matrix all equal one, checked in
    /// integer arithmetic over the sparse step law.
    pub fn is_doubly_stochastic(&self) -> bool {
        let l = self.modulus() as usize;
        let (w, den) = self.step_weights();
        let support: Vec<(usize, u64)> = w.iter().enumerate().filter(|(_, &c)| c > 0).map(|(o, &c)| (o, c)).collect();
        let mut cols = vec![0u64; l];
        for i in 0..l {
            let mut row = 0u64;
            for &(o, c) in &support {
                row += c;
                cols[(i + o) % l] += c;
            }
            if row != den {
                return false;
            }
        }
        cols.iter().all(|&c| c == den)
    }

    /// Positions reachable from 0, ascending.
    pub fn reachable_from_origin(&self) -> Vec<u64> {
        let l = self.modulus();
        let offsets: Vec<u64> = self.step_distribution().into_iter().map(|(o, _)| o).collect();
        let mut seen = vec![false; l as usize];
        let mut queue = VecDeque::from([0u64]);
        seen[0] = true;
        while let Some(k) = queue.pop_front() {
            for &o in &offsets {
                let next = (k + o) % l;
                if !seen[next as usize] {
                    seen[next as usize] = true;
                    queue.push_back(next);
                }
            }
        }
        (0..l).filter(|&k| seen[k as usize]).collect()
    }
}

fn ratio_str<S: Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

fn ratio_vec_str<S: Serializer>(v: &[Rational64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| format!("{}/{}", r.numer(), r.denom())))
}

pub fn to_f64(r: &Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryDistribution {
    pub modulus: u64,
    /// Probability of each position of `Z_L`; zero off the reachable class.
    #[serde(serialize_with = "ratio_vec_str")]
    pub probabilities: Vec<Rational64>,
    pub support_size: u64,
    pub doubly_stochastic: bool,
    /// Set when the moduli are not pairwise coprime, so the exact-rate
    /// theorems do not apply.
    pub non_coprime_moduli: bool,
    /// Set when the chain from 0 does not reach all of `Z_L`.
    pub reducible: bool,
    /// `max_k |pi_power(k) - pi_exact(k)|` at the end of power iteration.
    pub power_iteration_residual: f64,
    pub power_iterations: u32,
}

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITERS: u32 = 100_000;

/// Uniform law on the class reachable from 0, with the double-stochasticity
/// check and a floating-point power-iteration cross-check.
pub fn stationary_distribution(combined: &CombinedGame) -> Result<StationaryDistribution> {
    let l = combined.modulus();
    let doubly_stochastic = combined.is_doubly_stochastic();
    if !doubly_stochastic {
        return Err(Error::InvalidChannel("transition matrix is not doubly stochastic".into()));
    }
    let reach = combined.reachable_from_origin();
    let size = reach.len() as u64;
    let mut probabilities = vec![Rational64::from_integer(0); l as usize];
    for &k in &reach {
        probabilities[k as usize] = Rational64::new(1, size as i64);
    }

    let steps: Vec<(usize, f64)> = combined.step_distribution().iter().map(|(o, p)| (*o as usize, to_f64(p))).collect();
    let exact: Vec<f64> = probabilities.iter().map(to_f64).collect();
    let mut pi = vec![0.0; l as usize];
    pi[0] = 1.0;
    let mut next = vec![0.0; l as usize];
    let mut iters = 0;
    let mut residual = f64::INFINITY;
    while iters < POWER_MAX_ITERS {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (k, &mass) in pi.iter().enumerate() {
            if mass != 0.0 {
                for &(o, p) in &steps {
                    next[(k + o) % l as usize] += mass * p;
                }
            }
        }
        std::mem::swap(&mut pi, &mut next);
        iters += 1;
        residual = pi.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if residual < POWER_TOL {
            break;
        }
    }
    Ok(StationaryDistribution {
        modulus: l,
        probabilities,
        support_size: size,
        doubly_stochastic,
        non_coprime_moduli: !combined.pairwise_coprime(),
        reducible: size != l,
        power_iteration_residual: residual,
        power_iterations: iters,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameStats {
    #[serde(serialize_with = "ratio_str")]
    pub win_prob: Rational64,
    /// `P(win) - P(lose)`.
    #[serde(serialize_with = "ratio_str")]
    pub net_rate: Rational64,
    pub win_prob_decimal: f64,
    pub net_rate_decimal: f64,
    pub support_size: u64,
}

impl GameStats {
    fn from_counts(wins: u64, support: u64) -> Self {
        let win_prob = Rational64::new(wins as i64, support as i64);
        let net_rate = win_prob * 2 - 1;
        Self {
            win_prob,
            net_rate,
            win_prob_decimal: to_f64(&win_prob),
            net_rate_decimal: to_f64(&net_rate),
            support_size: support,
        }
    }
}

/// Stationary win probability, counted over the stationary support.
pub fn exact_rate(combined: &CombinedGame) -> Result<GameStats> {
    let st = stationary_distribution(combined)?;
    let wins = st
        .probabilities
        .iter()
        .enumerate()
        .filter(|(k, p)| **p != Rational64::from_integer(0) && is_winning(&WheelPosition { k: *k as u64, modulus: st.modulus }))
        .count() as u64;
    Ok(GameStats::from_counts(wins, st.support_size))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralRates {
    #[serde(serialize_with = "ratio_str")]
    pub rate_m: Rational64,
    #[serde(serialize_with = "ratio_str")]
    pub rate_n: Rational64,
    #[serde(serialize_with = "ratio_str")]
    pub rate_combined: Rational64,
    /// Counted rates equal `(-1/m, -1/n, 1/(mn))`.
    pub closed_form_agrees: bool,
}

fn check_pair_preconditions(moduli: &[u64]) -> Result<()> {
    for &m in moduli {
        if m < 3 || m % 4 != 3 {
            return Err(invalid(format!("modulus {m} must be >= 3 and congruent to 3 mod 4")));
        }
    }
    for i in 0..moduli.len() {
        for j in i + 1..moduli.len() {
            if moduli[i].gcd(&moduli[j]) != 1 {
                return Err(invalid(format!("moduli {} and {} are not coprime", moduli[i], moduli[j])));
            }
        }
    }
    Ok(())
}

/// Net rates of the two games and of their random mix, each by residue
/// counting.
pub fn general_rates(m: u64, n: u64) -> Result<GeneralRates> {
    check_pair_preconditions(&[m, n])?;
    let rate = |g: &CombinedGame| exact_rate(g).map(|s| s.net_rate);
    let rate_m = rate(&CombinedGame::from_moduli(&[m])?)?;
    let rate_n = rate(&CombinedGame::from_moduli(&[n])?)?;
    let rate_combined = rate(&CombinedGame::from_moduli(&[m, n])?)?;
    let closed_form_agrees = rate_m == Rational64::new(-1, m as i64)
        && rate_n == Rational64::new(-1, n as i64)
        && rate_combined == Rational64::new(1, (m * n) as i64);
    Ok(GeneralRates { rate_m, rate_n, rate_combined, closed_form_agrees })
}

/// Random mix of an even number of pairwise coprime games, each modulus
/// congruent to 3 mod 4.
pub fn combine_even(moduli: &[u64]) -> Result<CombinedGame> {
    if moduli.is_empty() || moduli.len() % 2 != 0 {
        return Err(invalid("combine_even needs a non-empty, even number of games"));
    }
    check_pair_preconditions(moduli)?;
    CombinedGame::from_moduli(moduli)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalStats {
    pub rounds: u64,
    pub wins: u64,
    pub win_prob: f64,
    pub net_rate: f64,
    /// `sqrt(p (1 - p) / rounds)` at the empirical `p`.
    pub binomial_stderr: f64,
}

/// Plays `rounds` rounds from position 0 on `derive_stream(seed, 0)`,
/// counting a win after every round.
pub fn simulate(combined: &CombinedGame, rounds: u64, seed: u64) -> Result<EmpiricalStats> {
    if rounds == 0 {
        return Err(invalid("rounds must be at least 1"));
    }
    let mut rng = derive_stream(seed, 0);
    let mut pos = WheelPosition::origin(combined.modulus())?;
    let games = combined.games();
    let mut wins = 0u64;
    for _ in 0..rounds {
        let g = if games.len() == 1 { &games[0] } else { &games[rng.random_range(0..games.len())] };
        pos = play_round(&pos, g, &mut rng)?;
        wins += is_winning(&pos) as u64;
    }
    let p = wins as f64 / rounds as f64;
    Ok(EmpiricalStats {
        rounds,
        wins,
        win_prob: p,
        net_rate: 2.0 * p - 1.0,
        binomial_stderr: (p * (1.0 - p) / rounds as f64).sqrt(),
    })
}

/// Win probability at each of the first `rounds` rounds from position 0,
/// by exact propagation of the position law (in floating point).
pub fn transient_win_probabilities(combined: &CombinedGame, rounds: usize) -> Vec<f64> {
    let l = combined.modulus() as usize;
    let steps: Vec<(usize, f64)> = combined.step_distribution().iter().map(|(o, p)| (*o as usize, to_f64(p))).collect();
    let winning: Vec<bool> = (0..l).map(|k| is_winning(&WheelPosition { k: k as u64, modulus: l as u64 })).collect();
    let mut pi = vec![0.0; l];
    pi[0] = 1.0;
    let mut out = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let mut next = vec![0.0; l];
        for (k, &mass) in pi.iter().enumerate() {
            if mass != 0.0 {
                for &(o, p) in &steps {
                    next[(k + o) % l] += mass * p;
                }
            }
        }
        pi = next;
        out.push(pi.iter().zip(&winning).filter(|(_, &w)| w).map(|(p, _)| p).sum());
    }
    out
}
