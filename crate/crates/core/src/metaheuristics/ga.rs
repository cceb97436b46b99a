//! Generational GA on bit strings: binary tournaments, uniform crossover,
//! per-bit mutation, one elite. Mutation is boosted after a stagnation
//! window without improvement.

use rand::Rng;

use super::{agent_stream, encode_mask, AgentState, Evaluator, SelectorConfig, Swarm};
use crate::error::Result;
use crate::mask::FeatureMask;

/// Per child: two tournaments of two contestants each, the crossover gate,
/// per-bit parent choice (true = second parent), per-bit mutation draws,
/// and the repair bit.
#[derive(Clone, Debug, PartialEq)]
pub struct GaDraws {
    pub contestants: [usize; 4],
    pub crossover_gate: f64,
    pub from_second: Vec<bool>,
    pub mutate: Vec<f64>,
    pub repair_bit: usize,
}

impl GaDraws {
    pub fn draw(rng: &mut impl Rng, pop: usize, n: usize) -> Self {
        let contestants = [0; 4].map(|_| rng.random_range(0..pop));
        let crossover_gate = rng.random();
        let from_second = (0..n).map(|_| rng.random()).collect();
        let mutate = (0..n).map(|_| rng.random()).collect();
        let repair_bit = rng.random_range(0..n);
        Self { contestants, crossover_gate, from_second, mutate, repair_bit }
    }
}

/// Fitter of two; the lower index wins ties.
pub fn tournament(fitness: &[f64], a: usize, b: usize) -> usize {
    let (lo, hi) = (a.min(b), a.max(b));
    if fitness[hi] > fitness[lo] { hi } else { lo }
}

/// Index of the fittest individual, lowest index among equals.
pub fn elite(fitness: &[f64]) -> usize {
    (0..fitness.len()).fold(0, |b, i| if fitness[i] > fitness[b] { i } else { b })
}

pub fn mutation_rate(cfg: &SelectorConfig, n: usize, stagnant: usize) -> f64 {
    let base = cfg.ga.mutation_rate.unwrap_or(1.0 / n as f64);
    if cfg.ga.stagnation_window > 0 && stagnant >= cfg.ga.stagnation_window {
        (base * cfg.ga.stagnation_boost).min(1.0)
    } else {
        base
    }
}

pub fn offspring(parents: &[FeatureMask], fitness: &[f64], d: &GaDraws, crossover_rate: f64, mutation_rate: f64) -> FeatureMask {
    let a = &parents[tournament(fitness, d.contestants[0], d.contestants[1])];
    let b = &parents[tournament(fitness, d.contestants[2], d.contestants[3])];
    let cross = d.crossover_gate < crossover_rate;
    let bits: Vec<bool> = (0..a.len())
        .map(|k| {
            let bit = if cross && d.from_second[k] { b.get(k) } else { a.get(k) };
            bit ^ (d.mutate[k] < mutation_rate)
        })
        .collect();
    let mut child = FeatureMask::from_bits(bits);
    if child.count_ones() == 0 {
        child.set(d.repair_bit, true);
    }
    child
}

pub fn step<F>(swarm: &mut Swarm, t: usize, cfg: &SelectorConfig, eval: &mut Evaluator<F>) -> Result<()>
where
    F: Fn(&FeatureMask) -> Result<f64> + Sync + Send,
{
    let n = swarm.n_features();
    let pop = swarm.agents.len();
    let parents: Vec<FeatureMask> = swarm.agents.iter().map(|a| a.mask.clone()).collect();
    let fitness: Vec<f64> = swarm.agents.iter().map(|a| a.fitness).collect();
    let rate = mutation_rate(cfg, n, swarm.stagnant_generations);
    let children: Vec<FeatureMask> = (0..pop - 1)
        .map(|c| {
            let d = GaDraws::draw(&mut agent_stream(cfg, t, c), pop, n);
            offspring(&parents, &fitness, &d, cfg.ga.crossover_rate, rate)
        })
        .collect();
    let fits = eval.evaluate(&children)?;

    let keep = swarm.agents[elite(&fitness)].clone();
    let mut next = Vec::with_capacity(pop);
    next.push(keep);
    for (mask, f) in children.into_iter().zip(fits) {
        let mut a = AgentState::new(encode_mask(&mask), mask);
        a.fitness = f;
        next.push(a);
    }
    swarm.agents = next;
    if swarm.refresh_best() {
        swarm.stagnant_generations = 0;
    } else {
        swarm.stagnant_generations += 1;
    }
    Ok(())
}
