//! Grey wolf optimizer: every wolf moves to the mean of three targets set by
//! the best-ever alpha, beta and delta.

use rand::Rng;

use super::{agent_stream, binarize_with, evaluate_agents, BinarizeDraws, Evaluator, SelectorConfig, Solution, Swarm};
use crate::error::Result;
use crate::mask::FeatureMask;

/// `a = 2 - 2t/T`.
pub fn control(t: usize, max_iterations: usize) -> f64 {
    2.0 - 2.0 * t as f64 / max_iterations as f64
}

/// Per wolf: for alpha, beta, delta in turn, `r1` then `r2` vectors; then
/// the binarization draws.
#[derive(Clone, Debug, PartialEq)]
pub struct GwoDraws {
    pub r1: [Vec<f64>; 3],
    pub r2: [Vec<f64>; 3],
    pub binarize: BinarizeDraws,
}

impl GwoDraws {
    pub fn draw(rng: &mut impl Rng, n: usize) -> Self {
        let mut r1: [Vec<f64>; 3] = Default::default();
        let mut r2: [Vec<f64>; 3] = Default::default();
        for l in 0..3 {
            r1[l] = (0..n).map(|_| rng.random()).collect();
            r2[l] = (0..n).map(|_| rng.random()).collect();
        }
        let binarize = BinarizeDraws::draw(rng, n);
        Self { r1, r2, binarize }
    }
}

/// Target set by one leader: `X_L - A |C X_L - X|` with `A = 2a r1 - a`,
/// `C = 2 r2`.
pub fn pursue(leader: &[f64], x: &[f64], a: f64, r1: &[f64], r2: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|d| {
            let big_a = 2.0 * a * r1[d] - a;
            let c = 2.0 * r2[d];
            leader[d] - big_a * (c * leader[d] - x[d]).abs()
        })
        .collect()
}

/// Fold the current pack into alpha/beta/delta: a strictly better wolf
/// pushes the lower ranks down.
pub fn update_leaders(swarm: &mut Swarm) {
    if swarm.leaders.is_empty() {
        let placeholder = Solution {
            position: swarm.agents[0].position.clone(),
            mask: swarm.agents[0].mask.clone(),
            fitness: f64::NEG_INFINITY,
        };
        swarm.leaders = vec![placeholder; 3];
    }
    for a in &swarm.agents {
        let l = &mut swarm.leaders;
        if a.fitness > l[0].fitness {
            l[2] = l[1].clone();
            l[1] = l[0].clone();
            l[0] = a.solution();
        } else if a.fitness > l[1].fitness {
            l[2] = l[1].clone();
            l[1] = a.solution();
        } else if a.fitness > l[2].fitness {
            l[2] = a.solution();
        }
    }
}

pub fn step<F>(swarm: &mut Swarm, t: usize, cfg: &SelectorConfig, eval: &mut Evaluator<F>) -> Result<()>
where
    F: Fn(&FeatureMask) -> Result<f64> + Sync + Send,
{
    let n = swarm.n_features();
    let a = control(t, cfg.max_iterations);
    let leaders: Vec<Vec<f64>> = swarm.leaders.iter().map(|l| l.position.clone()).collect();
    for (i, wolf) in swarm.agents.iter_mut().enumerate() {
        let d = GwoDraws::draw(&mut agent_stream(cfg, t, i), n);
        let targets: Vec<Vec<f64>> = (0..3).map(|l| pursue(&leaders[l], &wolf.position, a, &d.r1[l], &d.r2[l])).collect();
        wolf.position = (0..n).map(|k| (targets[0][k] + targets[1][k] + targets[2][k]) / 3.0).collect();
        wolf.mask = binarize_with(&wolf.position, &d.binarize, cfg.transfer);
    }
    evaluate_agents(&mut swarm.agents, eval)?;
    update_leaders(swarm);
    swarm.refresh_best();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn control_endpoints() {
        assert_eq!(control(0, 100), 2.0);
        assert_eq!(control(100, 100), 0.0);
        assert_eq!(control(50, 100), 1.0);
    }

    #[test]
    fn wolf_on_leaders_with_zero_a_stays() {
        let x = vec![0.7, -1.2, 3.0];
        let half = vec![0.5; 3];
        for r2 in [0.0, 0.3, 1.0] {
            let target = pursue(&x, &x, 1.3, &half, &[r2; 3]);
            assert_eq!(target, x);
        }
    }
}
