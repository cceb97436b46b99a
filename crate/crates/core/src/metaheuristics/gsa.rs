//! Gravitational search: agents attract each other with force proportional
//! to fitness-derived mass.

use rand::Rng;

use super::{agent_stream, binarize_with, clamp_velocity, evaluate_agents, BinarizeDraws, Evaluator, SelectorConfig, Swarm};
use crate::error::Result;
use crate::mask::FeatureMask;

/// `G0 * exp(-decay * t / T)`.
pub fn gravity(g0: f64, decay: f64, t: usize, max_iterations: usize) -> f64 {
    g0 * (-decay * t as f64 / max_iterations as f64).exp()
}

/// Size of the attracting set: `N` at the first iteration, shrinking
/// linearly to 1 at the last.
pub fn kbest_size(n_agents: usize, t: usize, max_iterations: usize) -> usize {
    if max_iterations <= 1 {
        return n_agents;
    }
    let frac = t as f64 / (max_iterations - 1) as f64;
    let k = n_agents as f64 - (n_agents as f64 - 1.0) * frac;
    (k.round() as usize).clamp(1, n_agents)
}

/// Normalized masses `M_i = m_i / sum m` with
/// `m_i = (fit_i - worst) / (best - worst)`; all equal when fitness is flat.
pub fn masses(fitness: &[f64]) -> Vec<f64> {
    let best = fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let worst = fitness.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = if best > worst {
        fitness.iter().map(|f| (f - worst) / (best - worst)).collect()
    } else {
        vec![1.0; fitness.len()]
    };
    let total: f64 = raw.iter().sum();
    raw.iter().map(|m| m / total).collect()
}

/// Indices of the `k` heaviest agents, heaviest first, ties to lower index.
pub fn kbest(masses: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..masses.len()).collect();
    idx.sort_by(|&a, &b| masses[b].total_cmp(&masses[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// Force on agent `i` from agent `j` along each coordinate:
/// `G M_i M_j (x_j - x_i) / (R + eps)^power`. `power = 1` is the usual
/// GSA force (magnitude independent of distance); `power = 3` gives an
/// inverse-square magnitude.
pub fn pair_force(g: f64, m_i: f64, m_j: f64, x_i: &[f64], x_j: &[f64], eps: f64, power: f64) -> Vec<f64> {
    let r = x_i.iter().zip(x_j).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let scale = g * m_i * m_j / (r + eps).powf(power);
    x_i.iter().zip(x_j).map(|(a, b)| scale * (b - a)).collect()
}

/// Per agent: `k * n` force scales (row per Kbest member, heaviest first;
/// drawn even for the agent itself), `n` velocity retention factors, then
/// the binarization draws.
#[derive(Clone, Debug, PartialEq)]
pub struct GsaDraws {
    pub force_scale: Vec<Vec<f64>>,
    pub retain: Vec<f64>,
    pub binarize: BinarizeDraws,
}

impl GsaDraws {
    pub fn draw(rng: &mut impl Rng, k: usize, n: usize) -> Self {
        let force_scale = (0..k).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
        let retain = (0..n).map(|_| rng.random::<f64>()).collect();
        let binarize = BinarizeDraws::draw(rng, n);
        Self { force_scale, retain, binarize }
    }
}

pub fn step<F>(swarm: &mut Swarm, t: usize, cfg: &SelectorConfig, eval: &mut Evaluator<F>) -> Result<()>
where
    F: Fn(&FeatureMask) -> Result<f64> + Sync + Send,
{
    let n = swarm.n_features();
    let fit: Vec<f64> = swarm.agents.iter().map(|a| a.fitness).collect();
    let m = masses(&fit);
    let k = kbest_size(swarm.agents.len(), t, cfg.max_iterations);
    let heavy = kbest(&m, k);
    let g = gravity(cfg.gsa.g0, cfg.gsa.decay, t, cfg.max_iterations);
    let positions: Vec<Vec<f64>> = swarm.agents.iter().map(|a| a.position.clone()).collect();

    for (i, agent) in swarm.agents.iter_mut().enumerate() {
        let draws = GsaDraws::draw(&mut agent_stream(cfg, t, i), k, n);
        let mut accel = vec![0.0; n];
        for (row, &j) in heavy.iter().enumerate() {
            if j == i {
                continue;
            }
            // acceleration = force / M_i, so use unit inertial mass directly
            let f = pair_force(g, 1.0, m[j], &positions[i], &positions[j], cfg.gsa.epsilon, cfg.gsa.distance_power);
            for d in 0..n {
                accel[d] += draws.force_scale[row][d] * f[d];
            }
        }
        for d in 0..n {
            agent.velocity[d] = draws.retain[d] * agent.velocity[d] + accel[d];
        }
        clamp_velocity(&mut agent.velocity, cfg.v_max);
        for d in 0..n {
            agent.position[d] += agent.velocity[d];
        }
        agent.mask = binarize_with(&agent.position, &draws.binarize, cfg.transfer);
    }
    evaluate_agents(&mut swarm.agents, eval)?;
    swarm.refresh_best();
    Ok(())
}
