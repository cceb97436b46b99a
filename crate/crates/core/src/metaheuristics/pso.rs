//! Particle swarm without inertia: velocity accumulates random pulls toward
//! the global and personal bests.

use rand::Rng;

use super::{agent_stream, binarize_with, clamp_velocity, evaluate_agents, BinarizeDraws, Evaluator, SelectorConfig, Swarm};
use crate::error::Result;
use crate::mask::FeatureMask;

/// Per particle: global-pull factors, personal-pull factors, binarization.
#[derive(Clone, Debug, PartialEq)]
pub struct PsoDraws {
    pub global: Vec<f64>,
    pub personal: Vec<f64>,
    pub binarize: BinarizeDraws,
}

impl PsoDraws {
    pub fn draw(rng: &mut impl Rng, n: usize) -> Self {
        let global = (0..n).map(|_| rng.random()).collect();
        let personal = (0..n).map(|_| rng.random()).collect();
        let binarize = BinarizeDraws::draw(rng, n);
        Self { global, personal, binarize }
    }
}

/// `v + c1 e1 (g - x) + c2 e2 (p - x)` per coordinate, unclamped.
pub fn velocity_update(v: &[f64], x: &[f64], g: &[f64], p: &[f64], c1: f64, c2: f64, e1: &[f64], e2: &[f64]) -> Vec<f64> {
    (0..v.len())
        .map(|d| v[d] + c1 * e1[d] * (g[d] - x[d]) + c2 * e2[d] * (p[d] - x[d]))
        .collect()
}

pub fn step<F>(swarm: &mut Swarm, t: usize, cfg: &SelectorConfig, eval: &mut Evaluator<F>) -> Result<()>
where
    F: Fn(&FeatureMask) -> Result<f64> + Sync + Send,
{
    let n = swarm.n_features();
    let g = swarm.best.position.clone();
    for (i, particle) in swarm.agents.iter_mut().enumerate() {
        let d = PsoDraws::draw(&mut agent_stream(cfg, t, i), n);
        let p = particle.personal_best.as_ref().map_or(&particle.position, |s| &s.position).clone();
        particle.velocity = velocity_update(
            &particle.velocity,
            &particle.position,
            &g,
            &p,
            cfg.pso.global_pull,
            cfg.pso.personal_pull,
            &d.global,
            &d.personal,
        );
        clamp_velocity(&mut particle.velocity, cfg.v_max);
        for k in 0..n {
            particle.position[k] += particle.velocity[k];
        }
        particle.mask = binarize_with(&particle.position, &d.binarize, cfg.transfer);
    }
    evaluate_agents(&mut swarm.agents, eval)?;
    for particle in &mut swarm.agents {
        if particle.personal_best.as_ref().is_none_or(|s| particle.fitness > s.fitness) {
            particle.personal_best = Some(particle.solution());
        }
    }
    swarm.refresh_best();
    Ok(())
}
