//! Cuckoo search: Lévy-flight moves with greedy replacement of a random
//! other nest, then the worst nests are abandoned and redrawn. Nests hold
//! binary solutions: a nest's position is always the `±LEAD_MAGNITUDE`
//! encoding of its mask, so a flight perturbs the current solution.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{agent_stream, binarize_with, encode_mask, BinarizeDraws, Evaluator, SelectorConfig, Swarm, INIT_RANGE};
use crate::error::Result;
use crate::mask::FeatureMask;

/// Mantegna's scale for the numerator normal:
/// `[G(1+l) sin(pi l/2) / (G((1+l)/2) l 2^((l-1)/2))]^(1/l)`.
pub fn mantegna_sigma(lambda: f64) -> f64 {
    let num = libm::tgamma(1.0 + lambda) * (std::f64::consts::PI * lambda / 2.0).sin();
    let den = libm::tgamma((1.0 + lambda) / 2.0) * lambda * 2f64.powf((lambda - 1.0) / 2.0);
    (num / den).powf(1.0 / lambda)
}

/// One Lévy-stable step via Mantegna: `u / |v|^(1/l)`, `u ~ N(0, s^2)`,
/// `v ~ N(0, 1)`.
pub fn levy_step(rng: &mut impl Rng, lambda: f64) -> f64 {
    let u: f64 = StandardNormal.sample(rng);
    let v: f64 = StandardNormal.sample(rng);
    u * mantegna_sigma(lambda) / v.abs().powf(1.0 / lambda)
}

/// Nests abandoned per iteration; the best nest always survives.
pub fn abandon_count(n_agents: usize, fraction: f64) -> usize {
    ((fraction * n_agents as f64).floor() as usize).min(n_agents.saturating_sub(1))
}

/// Per nest: one Lévy step per coordinate, binarization, the rival nest
/// index (uniform over the others), then a fresh uniform position and its
/// binarization used only if the nest is abandoned.
#[derive(Clone, Debug, PartialEq)]
pub struct CsDraws {
    pub levy: Vec<f64>,
    pub binarize: BinarizeDraws,
    pub rival: usize,
    pub fresh: Vec<f64>,
    pub fresh_binarize: BinarizeDraws,
}

impl CsDraws {
    pub fn draw(rng: &mut impl Rng, nest: usize, n_nests: usize, n: usize, lambda: f64) -> Self {
        let levy = (0..n).map(|_| levy_step(rng, lambda)).collect();
        let binarize = BinarizeDraws::draw(rng, n);
        let r = rng.random_range(0..n_nests - 1);
        let rival = if r >= nest { r + 1 } else { r };
        let fresh = (0..n).map(|_| rng.random_range(-INIT_RANGE..=INIT_RANGE)).collect();
        let fresh_binarize = BinarizeDraws::draw(rng, n);
        Self { levy, binarize, rival, fresh, fresh_binarize }
    }
}

/// Nest indices to abandon: the `count` lowest-fitness nests, later index
/// first among equals.
pub fn worst_nests(fitness: &[f64], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..fitness.len()).collect();
    idx.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]).then(b.cmp(&a)));
    idx.truncate(count);
    idx.sort_unstable();
    idx
}

pub fn step<F>(swarm: &mut Swarm, t: usize, cfg: &SelectorConfig, eval: &mut Evaluator<F>) -> Result<()>
where
    F: Fn(&FeatureMask) -> Result<f64> + Sync + Send,
{
    let n = swarm.n_features();
    let n_nests = swarm.agents.len();
    let p = &cfg.cs;
    let draws: Vec<CsDraws> = (0..n_nests)
        .map(|i| CsDraws::draw(&mut agent_stream(cfg, t, i), i, n_nests, n, p.levy_lambda))
        .collect();

    let mut cand_pos = Vec::with_capacity(n_nests);
    let mut cand_mask = Vec::with_capacity(n_nests);
    for (nest, d) in swarm.agents.iter().zip(&draws) {
        let pos: Vec<f64> = nest.position.iter().zip(&d.levy).map(|(x, l)| x + p.step_scale * l).collect();
        // an unmoved nest carries no new information; keep its mask
        let mask = if pos == nest.position { nest.mask.clone() } else { binarize_with(&pos, &d.binarize, cfg.transfer) };
        let pos = encode_mask(&mask);
        cand_pos.push(pos);
        cand_mask.push(mask);
    }
    let fits = eval.evaluate(&cand_mask)?;
    for i in 0..n_nests {
        swarm.offer(&cand_pos[i], &cand_mask[i], fits[i]);
        let j = draws[i].rival;
        if fits[i] > swarm.agents[j].fitness {
            let rival = &mut swarm.agents[j];
            rival.position = cand_pos[i].clone();
            rival.mask = cand_mask[i].clone();
            rival.fitness = fits[i];
        }
    }

    let fit: Vec<f64> = swarm.agents.iter().map(|a| a.fitness).collect();
    let abandoned = worst_nests(&fit, abandon_count(n_nests, p.abandon_fraction));
    if abandoned.is_empty() {
        return Ok(());
    }
    let masks: Vec<FeatureMask> = abandoned
        .iter()
        .map(|&i| binarize_with(&draws[i].fresh, &draws[i].fresh_binarize, cfg.transfer))
        .collect();
    let fits = eval.evaluate(&masks)?;
    for ((&i, mask), f) in abandoned.iter().zip(masks).zip(fits) {
        let nest = &mut swarm.agents[i];
        nest.position = encode_mask(&mask);
        nest.mask = mask;
        nest.fitness = f;
    }
    swarm.refresh_best();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sigma_at_one_and_a_half() {
        assert_abs_diff_eq!(mantegna_sigma(1.5), 0.69657, epsilon = 1e-5);
    }

    #[test]
    fn levy_tail_is_heavy_and_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let s: Vec<f64> = (0..n).map(|_| levy_step(&mut rng, 1.5)).collect();
        let mut abs: Vec<f64> = s.iter().map(|v| v.abs()).collect();
        abs.sort_by(f64::total_cmp);
        let median = abs[n / 2];
        assert!(median < 2.0);
        assert!(abs[n - 1] / median > 50.0, "{}", abs[n - 1] / median);
        let positive = s.iter().filter(|v| **v > 0.0).count() as f64 / n as f64;
        assert!((positive - 0.5).abs() < 0.02);
    }

    #[test]
    fn abandonment_counts() {
        assert_eq!(abandon_count(30, 0.25), 7);
        assert_eq!(abandon_count(30, 1.0), 29);
        assert_eq!(abandon_count(30, 0.0), 0);
        assert_eq!(worst_nests(&[0.5, 0.1, 0.9, 0.1], 2), vec![1, 3]);
    }
}
