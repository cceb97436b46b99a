//! Browser bindings: each export takes plain numbers, returns a JSON string
//! and is a thin wrapper over a native function tested without a browser.

use serde::Serialize;
use swarmselect::dataset::{synthesize, SynthSpec};
use swarmselect::metaheuristics::cs::levy_step;
use swarmselect::metaheuristics::transfer_sigmoid;
use swarmselect::ranking::rank_features;
use swarmselect::{rng, run_selector, Algorithm, FeatureMask, RankMethod, SelectorConfig};
use wasm_bindgen::prelude::*;

fn json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
pub struct RankingView {
    pub names: Vec<String>,
    pub informative: Vec<usize>,
    pub methods: Vec<(RankMethod, Vec<f64>)>,
}

/// Scores of all three rankers on a fresh synthetic dataset.
pub fn rank_synthetic(rows: usize, cols: usize, informative: usize, separation: f64, seed: u64) -> Result<RankingView, String> {
    let (d, mask) = synthesize(&SynthSpec::new(rows, cols, informative, separation, seed)).map_err(|e| e.to_string())?;
    let mut methods = Vec::new();
    for m in RankMethod::ALL {
        methods.push((m, rank_features(&d, m).map_err(|e| e.to_string())?.scores));
    }
    Ok(RankingView { names: d.column_names().to_vec(), informative: mask.indices(), methods })
}

#[derive(Serialize)]
pub struct ConvergenceView {
    pub target: String,
    pub seeded: Vec<f64>,
    pub unseeded: Vec<f64>,
    pub seeded_evaluations_to_best: Option<u64>,
    pub unseeded_evaluations_to_best: Option<u64>,
}

/// Best-fitness curves of one selector on a planted-mask objective, with
/// and without a leading agent that starts from a noisy copy of the target.
pub fn convergence(algorithm: &str, bits: usize, agents: usize, iterations: usize, lead_noise: f64, seed: u64) -> Result<ConvergenceView, String> {
    use rand::Rng;
    let alg: Algorithm = algorithm.parse().map_err(|e: swarmselect::Error| e.to_string())?;
    if bits == 0 || bits > 256 {
        return Err("bits must lie in 1..=256".into());
    }
    let mut r = rng::stream(seed, &[0xD3]);
    let mut target = FeatureMask::from_bits((0..bits).map(|_| r.random::<bool>()).collect());
    if target.count_ones() == 0 {
        target.set(0, true);
    }
    let mut lead = target.clone();
    for i in 0..bits {
        if r.random::<f64>() < lead_noise {
            lead.flip(i);
        }
    }
    if lead.count_ones() == 0 {
        lead.set(0, true);
    }
    let score = |m: &FeatureMask| {
        let same = m.bits().iter().zip(target.bits()).filter(|(a, b)| a == b).count();
        Ok(same as f64 / bits as f64)
    };
    let base = SelectorConfig { num_agents: agents, max_iterations: iterations, ..SelectorConfig::new(alg, seed) };
    let seeded_cfg = SelectorConfig { leading_mask: Some(lead), ..base.clone() };
    let plain = run_selector(&base, bits, score).map_err(|e| e.to_string())?;
    let seeded = run_selector(&seeded_cfg, bits, score).map_err(|e| e.to_string())?;
    Ok(ConvergenceView {
        target: target.to_hex(),
        seeded_evaluations_to_best: seeded.evaluations_to_reach(seeded.best_fitness),
        unseeded_evaluations_to_best: plain.evaluations_to_reach(plain.best_fitness),
        seeded: seeded.fitness_history,
        unseeded: plain.fitness_history,
    })
}

#[derive(Serialize)]
pub struct StepView {
    /// Lower edges of log10|step| bins.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub sigmoid: Vec<(f64, f64)>,
}

/// Histogram of log10 |Lévy step| for exponent `lambda`, plus the sigmoid
/// transfer curve on [-6, 6].
pub fn step_distribution(lambda: f64, samples: usize, seed: u64) -> Result<StepView, String> {
    if !(lambda > 0.0 && lambda <= 2.0) {
        return Err("lambda must lie in (0, 2]".into());
    }
    let samples = samples.clamp(1, 200_000);
    let (lo, width, bins) = (-4.0, 0.25, 32);
    let mut counts = vec![0; bins];
    let mut r = rng::stream(seed, &[0x1E5]);
    for _ in 0..samples {
        let x = levy_step(&mut r, lambda).abs().max(1e-300).log10();
        let b = ((x - lo) / width).floor().clamp(0.0, (bins - 1) as f64) as usize;
        counts[b] += 1;
    }
    Ok(StepView {
        bin_edges: (0..bins).map(|b| lo + width * b as f64).collect(),
        counts,
        sigmoid: (0..=48).map(|k| {
            let v = -6.0 + 0.25 * f64::from(k);
            (v, transfer_sigmoid(v))
        }).collect(),
    })
}

#[wasm_bindgen(js_name = rankSynthetic)]
pub fn rank_synthetic_js(rows: usize, cols: usize, informative: usize, separation: f64, seed: u32) -> Result<String, JsValue> {
    rank_synthetic(rows, cols, informative, separation, u64::from(seed)).and_then(|v| json(&v)).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = convergence)]
pub fn convergence_js(algorithm: &str, bits: usize, agents: usize, iterations: usize, lead_noise: f64, seed: u32) -> Result<String, JsValue> {
    convergence(algorithm, bits, agents, iterations, lead_noise, u64::from(seed)).and_then(|v| json(&v)).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = stepDistribution)]
pub fn step_distribution_js(lambda: f64, samples: usize, seed: u32) -> Result<String, JsValue> {
    step_distribution(lambda, samples, u64::from(seed)).and_then(|v| json(&v)).map_err(|e| JsValue::from_str(&e))
}
