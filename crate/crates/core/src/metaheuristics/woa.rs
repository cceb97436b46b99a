//! Whale optimization: encircle the best whale, search around a random
//! one, or spiral toward the best. The best whale's position is the
//! `±LEAD_MAGNITUDE` encoding of the best mask.

use rand::Rng;

use super::{agent_stream, binarize_with, encode_mask, evaluate_agents, BinarizeDraws, Evaluator, SelectorConfig, Swarm};
use crate::error::Result;
use crate::mask::FeatureMask;

/// Per whale: `r1`, `r2`, the branch draw `p`, the spiral parameter
/// `l in [-1, 1]`, the random whale index, then binarization.
#[derive(Clone, Debug, PartialEq)]
pub struct WoaDraws {
    pub r1: f64,
    pub r2: f64,
    pub p: f64,
    pub l: f64,
    pub partner: usize,
    pub binarize: BinarizeDraws,
}

impl WoaDraws {
    pub fn draw(rng: &mut impl Rng, pod: usize, n: usize) -> Self {
        let r1 = rng.random();
        let r2 = rng.random();
        let p = rng.random();
        let l = rng.random_range(-1.0..=1.0);
        let partner = rng.random_range(0..pod);
        let binarize = BinarizeDraws::draw(rng, n);
        Self { r1, r2, p, l, partner, binarize }
    }
}

/// `X_ref - A |C X_ref - X|`.
pub fn encircle(reference: &[f64], x: &[f64], big_a: f64, c: f64) -> Vec<f64> {
    reference.iter().zip(x).map(|(r, x)| r - big_a * (c * r - x).abs()).collect()
}

/// `|X* - X| e^(b l) cos(2 pi l) + X*`.
pub fn spiral(best: &[f64], x: &[f64], b: f64, l: f64) -> Vec<f64> {
    let k = (b * l).exp() * (2.0 * std::f64::consts::PI * l).cos();
    best.iter().zip(x).map(|(s, x)| (s - x).abs() * k + s).collect()
}

pub fn step<F>(swarm: &mut Swarm, t: usize, cfg: &SelectorConfig, eval: &mut Evaluator<F>) -> Result<()>
where
    F: Fn(&FeatureMask) -> Result<f64> + Sync + Send,
{
    let n = swarm.n_features();
    let pod = swarm.agents.len();
    let a = super::gwo::control(t, cfg.max_iterations);
    // the prey is the best mask itself, not whichever position sampled it
    let best = encode_mask(&swarm.best.mask);
    let before: Vec<Vec<f64>> = swarm.agents.iter().map(|w| w.position.clone()).collect();
    for (i, whale) in swarm.agents.iter_mut().enumerate() {
        let d = WoaDraws::draw(&mut agent_stream(cfg, t, i), pod, n);
        let big_a = 2.0 * a * d.r1 - a;
        let c = 2.0 * d.r2;
        whale.position = if d.p < cfg.woa.spiral_probability {
            if big_a.abs() < 1.0 {
                encircle(&best, &before[i], big_a, c)
            } else {
                encircle(&before[d.partner], &before[i], big_a, c)
            }
        } else {
            spiral(&best, &before[i], cfg.woa.spiral_shape, d.l)
        };
        whale.mask = binarize_with(&whale.position, &d.binarize, cfg.transfer);
    }
    evaluate_agents(&mut swarm.agents, eval)?;
    swarm.refresh_best();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spiral_at_zero_l_adds_distance() {
        let best = [1.0, -1.0];
        let x = [3.0, -4.0];
        assert_eq!(spiral(&best, &x, 1.0, 0.0), vec![3.0, 2.0]);
    }

    #[test]
    fn zero_a_collapses_onto_best() {
        let best = [0.2, 0.8];
        assert_eq!(encircle(&best, &[5.0, -5.0], 0.0, 1.4), best.to_vec());
    }
}
