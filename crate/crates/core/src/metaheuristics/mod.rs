//! Binary feature-selection metaheuristics sharing one agent model.
//!
//! Continuous algorithms keep a real position per agent and sample the mask
//! through the logistic transfer. Randomness for agent `i` at iteration `t`
//! comes from the stream `(seed, [t + 1, i])`; initialization uses
//! `(seed, [0, i])`. Every step first draws all of an agent's random inputs
//! into a `*Draws` struct (in the order documented on that struct), so the
//! draws are independent of evaluation order.

pub mod bba;
pub mod cs;
pub mod ga;
pub mod gsa;
pub mod gwo;
pub mod pso;
pub mod woa;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use cs::{levy_step, mantegna_sigma};

use crate::error::{Error, Result};
use crate::mask::FeatureMask;
use crate::par;
use crate::rng::{self, StreamRng};

/// Position magnitude encoding a leading-mask bit (sigmoid(4) ~ 0.982).
pub const LEAD_MAGNITUDE: f64 = 4.0;
/// Non-seeded agents start uniform in `[-INIT_RANGE, INIT_RANGE]`.
pub const INIT_RANGE: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bba,
    Cs,
    Ga,
    Gsa,
    Gwo,
    Pso,
    Woa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Bba,
        Algorithm::Cs,
        Algorithm::Ga,
        Algorithm::Gsa,
        Algorithm::Gwo,
        Algorithm::Pso,
        Algorithm::Woa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Bba => "bba",
            Algorithm::Cs => "cs",
            Algorithm::Ga => "ga",
            Algorithm::Gsa => "gsa",
            Algorithm::Gwo => "gwo",
            Algorithm::Pso => "pso",
            Algorithm::Woa => "woa",
        }
    }

    pub fn table_label(self) -> &'static str {
        match self {
            Algorithm::Bba => "BBA",
            Algorithm::Cs => "CS",
            Algorithm::Ga => "GA",
            Algorithm::Gsa => "GSA",
            Algorithm::Gwo => "GWO",
            Algorithm::Pso => "PSO",
            Algorithm::Woa => "WOA",
        }
    }

    /// Fitness requests beyond `num_agents * (max_iterations + 1)`.
    pub fn extra_evaluations(self, cfg: &SelectorConfig) -> u64 {
        match self {
            Algorithm::Cs => cfg.max_iterations as u64 * cs::abandon_count(cfg.num_agents, cfg.cs.abandon_fraction) as u64,
            _ => 0,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown selector `{s}`")))
    }
}

/// Orientation of the stochastic threshold in the position-to-bit rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransferRule {
    /// Bit is 1 with probability `S(v)`.
    #[default]
    Standard,
    /// Bit is 0 when `rand < S(v)`, as the bat-algorithm position rule is
    /// printed.
    Literal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GsaParams {
    pub g0: f64,
    pub decay: f64,
    pub epsilon: f64,
    /// Force is `G M_i M_j (x_j - x_i) / (R + eps)^distance_power`.
    pub distance_power: f64,
}

impl Default for GsaParams {
    fn default() -> Self {
        Self { g0: 100.0, decay: 20.0, epsilon: 1e-12, distance_power: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BbaParams {
    pub f_min: f64,
    pub f_max: f64,
    pub loudness0: f64,
    pub pulse_rate0: f64,
    pub loudness_decay: f64,
    pub pulse_gamma: f64,
}

impl Default for BbaParams {
    fn default() -> Self {
        Self {
            f_min: 0.0,
            f_max: 2.0,
            loudness0: 1.0,
            pulse_rate0: 0.5,
            loudness_decay: 0.9,
            pulse_gamma: 0.9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsParams {
    pub step_scale: f64,
    pub levy_lambda: f64,
    pub abandon_fraction: f64,
}

impl Default for CsParams {
    fn default() -> Self {
        Self { step_scale: 0.01, levy_lambda: 1.5, abandon_fraction: 0.25 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaParams {
    pub crossover_rate: f64,
    /// Per-bit flip probability; `None` means `1 / n_features`.
    pub mutation_rate: Option<f64>,
    pub stagnation_window: usize,
    pub stagnation_boost: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            crossover_rate: 0.9,
            mutation_rate: None,
            stagnation_window: 15,
            stagnation_boost: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoParams {
    pub global_pull: f64,
    pub personal_pull: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self { global_pull: 2.0, personal_pull: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WoaParams {
    pub spiral_shape: f64,
    pub spiral_probability: f64,
}

impl Default for WoaParams {
    fn default() -> Self {
        Self { spiral_shape: 1.0, spiral_probability: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectorConfig {
    pub algorithm: Algorithm,
    pub num_agents: usize,
    pub max_iterations: usize,
    pub seed: u64,
    pub leading_mask: Option<FeatureMask>,
    pub v_max: f64,
    pub transfer: TransferRule,
    pub gsa: GsaParams,
    pub bba: BbaParams,
    pub cs: CsParams,
    pub ga: GaParams,
    pub pso: PsoParams,
    pub woa: WoaParams,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Gsa,
            num_agents: 30,
            max_iterations: 100,
            seed: 42,
            leading_mask: None,
            v_max: 6.0,
            transfer: TransferRule::Standard,
            gsa: GsaParams::default(),
            bba: BbaParams::default(),
            cs: CsParams::default(),
            ga: GaParams::default(),
            pso: PsoParams::default(),
            woa: WoaParams::default(),
        }
    }
}

impl SelectorConfig {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        Self { algorithm, seed, ..Self::default() }
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if n_features == 0 {
            return bad("no features to select from".into());
        }
        if self.num_agents < 2 {
            return bad(format!("num_agents={} must be at least 2", self.num_agents));
        }
        if self.algorithm == Algorithm::Gwo && self.num_agents < 3 {
            return bad("gwo needs at least 3 agents".into());
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        if !(self.v_max > 0.0) {
            return bad("v_max must be positive".into());
        }
        if let Some(m) = &self.leading_mask {
            if m.len() != n_features {
                return bad(format!("leading mask has {} bits, expected {n_features}", m.len()));
            }
            if m.count_ones() == 0 {
                return Err(Error::EmptyMask);
            }
        }
        if !(1.0 < self.cs.levy_lambda && self.cs.levy_lambda <= 3.0) {
            return bad("levy lambda must lie in (1, 3]".into());
        }
        if !(0.0..=1.0).contains(&self.cs.abandon_fraction) || !(0.0..=1.0).contains(&self.ga.crossover_rate) {
            return bad("probabilities must lie in [0, 1]".into());
        }
        Ok(())
    }
}

/// Logistic transfer `1 / (1 + e^-v)`.
pub fn transfer_sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Random inputs of one binarization: one threshold per bit, then the bit
/// index used if every bit came out clear.
#[derive(Clone, Debug, PartialEq)]
pub struct BinarizeDraws {
    pub thresholds: Vec<f64>,
    pub repair_bit: usize,
}

impl BinarizeDraws {
    pub fn draw(rng: &mut impl Rng, n: usize) -> Self {
        let thresholds = (0..n).map(|_| rng.random::<f64>()).collect();
        let repair_bit = rng.random_range(0..n);
        Self { thresholds, repair_bit }
    }
}

/// Threshold `values` through the transfer and repair an all-zero result by
/// setting `draws.repair_bit`.
pub fn binarize_with(values: &[f64], draws: &BinarizeDraws, rule: TransferRule) -> FeatureMask {
    let bits: Vec<bool> = values
        .iter()
        .zip(&draws.thresholds)
        .map(|(&v, &u)| {
            let s = transfer_sigmoid(v);
            match rule {
                TransferRule::Standard => u < s,
                TransferRule::Literal => u >= s,
            }
        })
        .collect();
    let mut mask = FeatureMask::from_bits(bits);
    if mask.count_ones() == 0 {
        mask.set(draws.repair_bit, true);
    }
    mask
}

/// Sample a mask from continuous values: bit `k` is set with probability
/// `S(position[k])`; an empty outcome gets one uniformly random bit.
pub fn binarize(position: &[f64], rng: &mut impl Rng) -> FeatureMask {
    let draws = BinarizeDraws::draw(rng, position.len());
    binarize_with(position, &draws, TransferRule::Standard)
}

/// `+LEAD_MAGNITUDE` for set bits, `-LEAD_MAGNITUDE` for clear ones.
pub fn encode_mask(mask: &FeatureMask) -> Vec<f64> {
    mask.bits().iter().map(|&b| if b { LEAD_MAGNITUDE } else { -LEAD_MAGNITUDE }).collect()
}

pub fn clamp_velocity(v: &mut [f64], v_max: f64) {
    for x in v {
        *x = x.clamp(-v_max, v_max);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub position: Vec<f64>,
    pub mask: FeatureMask,
    pub fitness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub position: Vec<f64>,
    /// Zero for algorithms without a velocity.
    pub velocity: Vec<f64>,
    pub mask: FeatureMask,
    pub fitness: f64,
    /// PSO memory.
    pub personal_best: Option<Solution>,
    /// Bat loudness and pulse rate.
    pub loudness: f64,
    pub pulse_rate: f64,
}

impl AgentState {
    pub fn new(position: Vec<f64>, mask: FeatureMask) -> Self {
        let n = position.len();
        Self {
            position,
            velocity: vec![0.0; n],
            mask,
            fitness: f64::NEG_INFINITY,
            personal_best: None,
            loudness: 0.0,
            pulse_rate: 0.0,
        }
    }

    pub fn solution(&self) -> Solution {
        Solution {
            position: self.position.clone(),
            mask: self.mask.clone(),
            fitness: self.fitness,
        }
    }
}

/// Memoized fitness with request accounting and a best-so-far trace.
pub struct Evaluator<F> {
    fitness_fn: F,
    cache: HashMap<FeatureMask, f64>,
    requests: u64,
    calls: u64,
    best: Option<(FeatureMask, f64)>,
    trace: Vec<(u64, f64)>,
}

impl<F> Evaluator<F>
where
    F: Fn(&FeatureMask) -> Result<f64> + Sync + Send,
{
    pub fn new(fitness_fn: F) -> Self {
        Self {
            fitness_fn,
            cache: HashMap::new(),
            requests: 0,
            calls: 0,
            best: None,
            trace: Vec::new(),
        }
    }

    /// Fitness of every mask, in order. Uncached masks are computed
    /// concurrently; bookkeeping runs in input order.
    pub fn evaluate(&mut self, masks: &[FeatureMask]) -> Result<Vec<f64>> {
        if masks.iter().any(|m| m.count_ones() == 0) {
            return Err(Error::EmptyMask);
        }
        let mut fresh: Vec<FeatureMask> = Vec::new();
        for m in masks {
            if !self.cache.contains_key(m) && !fresh.contains(m) {
                fresh.push(m.clone());
            }
        }
        let f = &self.fitness_fn;
        let values = par::map(&fresh, |m| f(m));
        for (m, v) in fresh.into_iter().zip(values) {
            let v = v?;
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("fitness returned {v}")));
            }
            self.calls += 1;
            self.cache.insert(m, v);
        }
        let out: Vec<f64> = masks.iter().map(|m| self.cache[m]).collect();
        for (m, &v) in masks.iter().zip(&out) {
            self.requests += 1;
            if self.best.as_ref().is_none_or(|(_, b)| v > *b) {
                self.best = Some((m.clone(), v));
                self.trace.push((self.requests, v));
            }
        }
        Ok(out)
    }

    pub fn requests(&self) -> u64 {
        self.requests
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn best(&self) -> Option<&(FeatureMask, f64)> {
        self.best.as_ref()
    }

    pub fn trace(&self) -> &[(u64, f64)] {
        &self.trace
    }
}

/// Population plus the global best and per-algorithm memory.
#[derive(Clone, Debug, PartialEq)]
pub struct Swarm {
    pub agents: Vec<AgentState>,
    pub best: Solution,
    /// GWO alpha, beta, delta (best first).
    pub leaders: Vec<Solution>,
    /// GA generations since the best fitness last improved.
    pub stagnant_generations: usize,
}

impl Swarm {
    pub fn from_agents(agents: Vec<AgentState>) -> Self {
        let mut s = Self {
            best: agents[0].solution(),
            agents,
            leaders: Vec::new(),
            stagnant_generations: 0,
        };
        s.refresh_best();
        s
    }

    /// Adopt any agent strictly better than the global best, scanning in
    /// index order. Returns whether the best changed.
    pub fn refresh_best(&mut self) -> bool {
        let mut improved = false;
        for a in &self.agents {
            if a.fitness > self.best.fitness {
                self.best = a.solution();
                improved = true;
            }
        }
        improved
    }

    pub fn offer(&mut self, position: &[f64], mask: &FeatureMask, fitness: f64) {
        if fitness > self.best.fitness {
            self.best = Solution {
                position: position.to_vec(),
                mask: mask.clone(),
                fitness,
            };
        }
    }

    pub fn n_features(&self) -> usize {
        self.best.mask.len()
    }
}

/// Random stream of `agent` at 0-based `iteration`.
pub fn agent_stream(cfg: &SelectorConfig, iteration: usize, agent: usize) -> StreamRng {
    rng::stream(cfg.seed, &[iteration as u64 + 1, agent as u64])
}

/// Initial population: agent 0 carries the leading mask when one is given
/// (its exact mask, position `±LEAD_MAGNITUDE`), the rest are uniform in
/// `[-INIT_RANGE, INIT_RANGE]` (GA: fair coin bits). Nothing is evaluated.
pub fn initial_agents(cfg: &SelectorConfig, n_features: usize) -> Vec<AgentState> {
    (0..cfg.num_agents)
        .map(|i| {
            let mut rng = rng::stream(cfg.seed, &[0, i as u64]);
            let mut agent = match (&cfg.leading_mask, i) {
                (Some(lead), 0) => AgentState::new(encode_mask(lead), lead.clone()),
                _ if cfg.algorithm == Algorithm::Ga => {
                    let mut mask = FeatureMask::from_bits((0..n_features).map(|_| rng.random::<bool>()).collect());
                    if mask.count_ones() == 0 {
                        mask.set(rng.random_range(0..n_features), true);
                    }
                    AgentState::new(encode_mask(&mask), mask)
                }
                _ => {
                    let position: Vec<f64> = (0..n_features).map(|_| rng.random_range(-INIT_RANGE..=INIT_RANGE)).collect();
                    let draws = BinarizeDraws::draw(&mut rng, n_features);
                    let mask = binarize_with(&position, &draws, cfg.transfer);
                    AgentState::new(position, mask)
                }
            };
            if cfg.algorithm == Algorithm::Cs {
                agent.position = encode_mask(&agent.mask);
            }
            if cfg.algorithm == Algorithm::Bba {
                agent.position = bba::bits_as_position(&agent.mask);
                agent.loudness = cfg.bba.loudness0;
                agent.pulse_rate = cfg.bba.pulse_rate0;
            }
            agent
        })
        .collect()
}

/// Evaluate the initial population and set personal bests.
pub fn initialize<F>(cfg: &SelectorConfig, n_features: usize, eval: &mut Evaluator<F>) -> Result<Swarm>
where
    F: Fn(&FeatureMask) -> Result<f64> + Sync + Send,
{
    let mut agents = initial_agents(cfg, n_features);
    let masks: Vec<FeatureMask> = agents.iter().map(|a| a.mask.clone()).collect();
    let fits = eval.evaluate(&masks)?;
    for (a, f) in agents.iter_mut().zip(fits) {
        a.fitness = f;
        a.personal_best = Some(a.solution());
    }
    let mut swarm = Swarm::from_agents(agents);
    if cfg.algorithm == Algorithm::Gwo {
        gwo::update_leaders(&mut swarm);
    }
    Ok(swarm)
}

pub fn step<F>(swarm: &mut Swarm, iteration: usize, cfg: &SelectorConfig, eval: &mut Evaluator<F>) -> Result<()>
where
    F: Fn(&FeatureMask) -> Result<f64> + Sync + Send,
{
    match cfg.algorithm {
        Algorithm::Gsa => gsa::step(swarm, iteration, cfg, eval),
        Algorithm::Bba => bba::step(swarm, iteration, cfg, eval),
        Algorithm::Cs => cs::step(swarm, iteration, cfg, eval),
        Algorithm::Ga => ga::step(swarm, iteration, cfg, eval),
        Algorithm::Gwo => gwo::step(swarm, iteration, cfg, eval),
        Algorithm::Pso => pso::step(swarm, iteration, cfg, eval),
        Algorithm::Woa => woa::step(swarm, iteration, cfg, eval),
    }
}

/// Evaluate `masks` and write fitness back into the agents.
pub(crate) fn evaluate_agents<F>(agents: &mut [AgentState], eval: &mut Evaluator<F>) -> Result<()>
where
    F: Fn(&FeatureMask) -> Result<f64> + Sync + Send,
{
    let masks: Vec<FeatureMask> = agents.iter().map(|a| a.mask.clone()).collect();
    let fits = eval.evaluate(&masks)?;
    for (a, f) in agents.iter_mut().zip(fits) {
        a.fitness = f;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub best_mask: FeatureMask,
    pub best_fitness: f64,
    /// Global best after initialization and after every iteration.
    pub fitness_history: Vec<f64>,
    /// Fitness requests, cache hits included.
    pub evaluations: u64,
    /// Distinct masks actually scored.
    pub unique_evaluations: u64,
    /// `(requests so far, best fitness)` at every improvement.
    pub improvements: Vec<(u64, f64)>,
}

impl SelectionResult {
    /// Requests spent before the best fitness first reached `target`.
    pub fn evaluations_to_reach(&self, target: f64) -> Option<u64> {
        self.improvements.iter().find(|(_, f)| *f >= target).map(|(e, _)| *e)
    }
}

/// Run the configured algorithm for `max_iterations` steps against a
/// fitness to maximize. Results of `fitness_fn` are memoized per mask.
pub fn run_selector<F>(cfg: &SelectorConfig, n_features: usize, fitness_fn: F) -> Result<SelectionResult>
where
    F: Fn(&FeatureMask) -> Result<f64> + Sync + Send,
{
    run_selector_observed(cfg, n_features, fitness_fn, |_, _| {})
}

/// [`run_selector`] with a callback after initialization (iteration 0) and
/// after every step.
pub fn run_selector_observed<F, O>(cfg: &SelectorConfig, n_features: usize, fitness_fn: F, mut observe: O) -> Result<SelectionResult>
where
    F: Fn(&FeatureMask) -> Result<f64> + Sync + Send,
    O: FnMut(usize, &Swarm),
{
    cfg.validate(n_features)?;
    let mut eval = Evaluator::new(fitness_fn);
    let mut swarm = initialize(cfg, n_features, &mut eval)?;
    let mut history = Vec::with_capacity(cfg.max_iterations + 1);
    history.push(swarm.best.fitness);
    observe(0, &swarm);
    for t in 0..cfg.max_iterations {
        step(&mut swarm, t, cfg, &mut eval)?;
        history.push(swarm.best.fitness);
        observe(t + 1, &swarm);
    }
    let (best_mask, best_fitness) = eval.best().cloned().expect("initial population evaluated");
    debug_assert!(best_fitness == swarm.best.fitness);
    Ok(SelectionResult {
        algorithm: cfg.algorithm,
        seed: cfg.seed,
        best_mask,
        best_fitness,
        fitness_history: history,
        evaluations: eval.requests(),
        unique_evaluations: eval.calls(),
        improvements: eval.trace().to_vec(),
    })
}


#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sigmoid_values() {
        assert_eq!(transfer_sigmoid(0.0), 0.5);
        assert_abs_diff_eq!(transfer_sigmoid(6.0), 0.99753, epsilon = 5e-6);
        for v in [-7.5, -1.0, 0.3, 2.0, 11.0] {
            assert_abs_diff_eq!(transfer_sigmoid(-v), 1.0 - transfer_sigmoid(v), epsilon = 1e-15);
        }
    }

    #[test]
    fn binarize_saturated() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = binarize(&[20.0; 50], &mut rng);
        assert_eq!(m.count_ones(), 50);
        let m = binarize(&[-20.0; 50], &mut rng);
        assert_eq!(m.count_ones(), 1);
    }

    #[test]
    fn binarize_midpoint_popcount() {
        let n = 40;
        let trials = 1000;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let total: usize = (0..trials).map(|_| binarize(&vec![0.0; n], &mut rng).count_ones()).sum();
        let mean = total as f64 / trials as f64;
        // repair adds at most 1 with probability 2^-40
        let sd_of_mean = (n as f64 * 0.25).sqrt() / (trials as f64).sqrt();
        assert!((mean - n as f64 / 2.0).abs() < 3.0 * sd_of_mean, "{mean}");
    }

    #[test]
    fn literal_rule_inverts_orientation() {
        let d = BinarizeDraws { thresholds: vec![0.3, 0.3], repair_bit: 0 };
        assert_eq!(binarize_with(&[5.0, -5.0], &d, TransferRule::Standard).indices(), vec![0]);
        assert_eq!(binarize_with(&[5.0, -5.0], &d, TransferRule::Literal).indices(), vec![1]);
    }

    #[test]
    fn evaluator_memoizes_and_tracks_best() {
        let calls = std::sync::atomic::AtomicUsize::new(0);
        let mut e = Evaluator::new(|m: &FeatureMask| {
            calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            onemax(m)
        });
        let a = FeatureMask::from_indices(4, &[0]).unwrap();
        let b = FeatureMask::full(4);
        let v = e.evaluate(&[a.clone(), b.clone(), a.clone()]).unwrap();
        assert_eq!(v, vec![0.25, 1.0, 0.25]);
        assert_eq!(e.requests(), 3);
        assert_eq!(e.calls(), 2);
        assert_eq!(calls.load(std::sync::atomic::Ordering::SeqCst), 2);
        assert_eq!(e.trace(), &[(1, 0.25), (2, 1.0)]);
        assert!(matches!(e.evaluate(&[FeatureMask::empty(4)]), Err(Error::EmptyMask)));
    }

    #[test]
    fn config_validation() {
        let cfg = SelectorConfig { num_agents: 1, ..SelectorConfig::default() };
        assert!(cfg.validate(5).is_err());
        let cfg = SelectorConfig { num_agents: 2, ..SelectorConfig::new(Algorithm::Gwo, 0) };
        assert!(cfg.validate(5).is_err());
        let cfg = SelectorConfig { leading_mask: Some(FeatureMask::full(4)), ..SelectorConfig::default() };
        assert!(cfg.validate(5).is_err());
        let cfg = SelectorConfig { leading_mask: Some(FeatureMask::empty(5)), ..SelectorConfig::default() };
        assert!(matches!(cfg.validate(5), Err(Error::EmptyMask)));
    }

    #[test]
    fn seeded_optimum_is_kept_after_one_iteration() {
        for alg in Algorithm::ALL {
            let cfg = SelectorConfig {
                max_iterations: 1,
                leading_mask: Some(FeatureMask::full(16)),
                ..SelectorConfig::new(alg, 3)
            };
            let r = run_selector(&cfg, 16, onemax).unwrap();
            assert_eq!(r.best_fitness, 1.0, "{alg}");
        }
    }

    #[test]
    fn lead_agent_starts_on_exact_mask() {
        let lead = FeatureMask::from_indices(10, &[1, 4]).unwrap();
        for alg in Algorithm::ALL {
            let cfg = SelectorConfig { leading_mask: Some(lead.clone()), ..SelectorConfig::new(alg, 9) };
            let agents = initial_agents(&cfg, 10);
            assert_eq!(agents[0].mask, lead, "{alg}");
        }
    }

    #[test]
    fn history_is_monotone_and_budget_holds() {
        let target = FeatureMask::from_indices(16, &[0, 3, 5, 6, 9, 12, 15]).unwrap();
        for alg in Algorithm::ALL {
            let cfg = SelectorConfig { max_iterations: 30, num_agents: 12, ..SelectorConfig::new(alg, 5) };
            let r = run_selector(&cfg, 16, planted(&target)).unwrap();
            assert!(r.fitness_history.windows(2).all(|w| w[1] >= w[0]), "{alg}");
            assert_eq!(r.fitness_history.len(), 31);
            let budget = 12 * 31 + alg.extra_evaluations(&cfg);
            assert!(r.evaluations <= budget, "{alg}: {} > {budget}", r.evaluations);
            assert!(r.unique_evaluations <= r.evaluations);
            assert_eq!(*r.fitness_history.last().unwrap(), r.best_fitness);
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let target = FeatureMask::from_indices(12, &[1, 2, 8]).unwrap();
        for alg in Algorithm::ALL {
            let cfg = SelectorConfig { max_iterations: 10, num_agents: 8, ..SelectorConfig::new(alg, 77) };
            let a = run_selector(&cfg, 12, planted(&target)).unwrap();
            let b = run_selector(&cfg, 12, planted(&target)).unwrap();
            assert_eq!(a, b, "{alg}");
        }
    }

    #[test]
    fn seeding_never_loses_to_the_seed() {
        let target = FeatureMask::from_indices(16, &[0, 1, 2, 3]).unwrap();
        let lead = FeatureMask::from_indices(16, &[0, 1, 2, 9]).unwrap();
        let lead_fit = planted(&target)(&lead).unwrap();
        for alg in Algorithm::ALL {
            let cfg = SelectorConfig { max_iterations: 5, leading_mask: Some(lead.clone()), ..SelectorConfig::new(alg, 1) };
            let r = run_selector(&cfg, 16, planted(&target)).unwrap();
            assert!(r.best_fitness >= lead_fit, "{alg}");
        }
    }
}
