//! Binary bat algorithm: bit-vector positions, frequency-scaled velocity
//! pulled toward the best bat, loudness-gated greedy acceptance and a local
//! walk around the best.

use rand::Rng;

use super::{
    agent_stream, binarize_with, clamp_velocity, encode_mask, BinarizeDraws, Evaluator, SelectorConfig, Swarm, TransferRule,
};
use crate::error::Result;
use crate::mask::FeatureMask;

pub fn bits_as_position(mask: &FeatureMask) -> Vec<f64> {
    mask.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
}

/// Per bat: frequency fraction, velocity binarization, walk gate, walk
/// offsets in `[-1, 1]`, walk binarization, acceptance draw.
#[derive(Clone, Debug, PartialEq)]
pub struct BbaDraws {
    pub beta: f64,
    pub binarize: BinarizeDraws,
    pub walk_gate: f64,
    pub walk: Vec<f64>,
    pub walk_binarize: BinarizeDraws,
    pub accept: f64,
}

impl BbaDraws {
    pub fn draw(rng: &mut impl Rng, n: usize) -> Self {
        let beta = rng.random();
        let binarize = BinarizeDraws::draw(rng, n);
        let walk_gate = rng.random();
        let walk = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let walk_binarize = BinarizeDraws::draw(rng, n);
        let accept = rng.random();
        Self { beta, binarize, walk_gate, walk, walk_binarize, accept }
    }
}

/// `v + (x* - x) f` under the standard transfer orientation, `v + (x - x*) f`
/// under the literal one; both move bits toward the best bat.
pub fn velocity_update(v: &[f64], x: &[f64], best: &[f64], f: f64, rule: TransferRule) -> Vec<f64> {
    let sign = match rule {
        TransferRule::Standard => 1.0,
        TransferRule::Literal => -1.0,
    };
    v.iter().zip(x).zip(best).map(|((v, x), b)| v + sign * (b - x) * f).collect()
}

pub fn step<F>(swarm: &mut Swarm, t: usize, cfg: &SelectorConfig, eval: &mut Evaluator<F>) -> Result<()>
where
    F: Fn(&FeatureMask) -> Result<f64> + Sync + Send,
{
    let n = swarm.n_features();
    let p = &cfg.bba;
    let best_bits = bits_as_position(&swarm.best.mask);
    let best_code = encode_mask(&swarm.best.mask);
    let mean_loudness = swarm.agents.iter().map(|a| a.loudness).sum::<f64>() / swarm.agents.len() as f64;

    let mut draws = Vec::with_capacity(swarm.agents.len());
    let mut candidates = Vec::with_capacity(swarm.agents.len());
    for (i, bat) in swarm.agents.iter_mut().enumerate() {
        let d = BbaDraws::draw(&mut agent_stream(cfg, t, i), n);
        let f = p.f_min + (p.f_max - p.f_min) * d.beta;
        bat.velocity = velocity_update(&bat.velocity, &bat.position, &best_bits, f, cfg.transfer);
        clamp_velocity(&mut bat.velocity, cfg.v_max);
        let cand = if d.walk_gate > bat.pulse_rate {
            let around: Vec<f64> = best_code.iter().zip(&d.walk).map(|(c, e)| c + e * mean_loudness).collect();
            binarize_with(&around, &d.walk_binarize, TransferRule::Standard)
        } else {
            binarize_with(&bat.velocity, &d.binarize, cfg.transfer)
        };
        candidates.push(cand);
        draws.push(d);
    }
    let fits = eval.evaluate(&candidates)?;
    let pulse = p.pulse_rate0 * (1.0 - (-p.pulse_gamma * (t + 1) as f64).exp());
    for i in 0..swarm.agents.len() {
        let pos = bits_as_position(&candidates[i]);
        swarm.offer(&pos, &candidates[i], fits[i]);
        let bat = &mut swarm.agents[i];
        if fits[i] >= bat.fitness && draws[i].accept < bat.loudness {
            bat.position = pos;
            bat.mask = candidates[i].clone();
            bat.fitness = fits[i];
            bat.loudness *= p.loudness_decay;
            bat.pulse_rate = pulse;
        }
    }
    Ok(())
}
