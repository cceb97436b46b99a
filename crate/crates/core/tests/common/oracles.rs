//! Brute-force re-implementations of one step of every selector, written
//! straight from the update equations with plain loops. They share only
//! the random draws with the library (replayed from the documented
//! per-agent streams) and compare whole swarms after a step.

use swarmselect::metaheuristics::bba::BbaDraws;
use swarmselect::metaheuristics::cs::CsDraws;
use swarmselect::metaheuristics::ga::GaDraws;
use swarmselect::metaheuristics::gsa::GsaDraws;
use swarmselect::metaheuristics::gwo::GwoDraws;
use swarmselect::metaheuristics::pso::PsoDraws;
use swarmselect::metaheuristics::woa::WoaDraws;
use swarmselect::metaheuristics::{agent_stream, initialize, step, Algorithm, BinarizeDraws, Evaluator, SelectorConfig, Swarm};
use swarmselect::FeatureMask;

pub const TOL: f64 = 1e-9;

fn sig(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

fn sample_bits(x: &[f64], d: &BinarizeDraws) -> FeatureMask {
    let mut bits: Vec<bool> = x.iter().zip(&d.thresholds).map(|(&v, &u)| u < sig(v)).collect();
    if bits.iter().all(|b| !b) {
        bits[d.repair_bit] = true;
    }
    FeatureMask::from_bits(bits)
}

fn enc(m: &FeatureMask) -> Vec<f64> {
    m.bits().iter().map(|&b| if b { 4.0 } else { -4.0 }).collect()
}

fn bits01(m: &FeatureMask) -> Vec<f64> {
    m.bits().iter().map(|&b| f64::from(u8::from(b))).collect()
}

fn clamp(v: f64, vmax: f64) -> f64 {
    v.max(-vmax).min(vmax)
}

fn score(target: &FeatureMask, m: &FeatureMask) -> f64 {
    m.bits().iter().zip(target.bits()).filter(|(a, b)| a == b).count() as f64 / m.len() as f64
}

/// Largest coordinate gap between two swarms, or `None` if any mask or
/// fitness differs.
pub fn swarm_gap(a: &Swarm, b: &Swarm) -> Option<f64> {
    if a.agents.len() != b.agents.len() {
        return None;
    }
    let mut gap: f64 = 0.0;
    for (x, y) in a.agents.iter().zip(&b.agents) {
        if x.mask != y.mask || (x.fitness - y.fitness).abs() > TOL {
            return None;
        }
        for (p, q) in x.position.iter().zip(&y.position).chain(x.velocity.iter().zip(&y.velocity)) {
            gap = gap.max((p - q).abs());
        }
        gap = gap.max((x.loudness - y.loudness).abs()).max((x.pulse_rate - y.pulse_rate).abs());
    }
    if a.best.mask != b.best.mask || (a.best.fitness - b.best.fitness).abs() > TOL {
        return None;
    }
    Some(gap)
}

pub struct Fixture {
    pub cfg: SelectorConfig,
    pub target: FeatureMask,
    pub n: usize,
}

impl Fixture {
    pub fn new(algorithm: Algorithm, agents: usize) -> Self {
        let n = 6;
        Self {
            cfg: SelectorConfig {
                num_agents: agents,
                max_iterations: 10,
                leading_mask: Some(FeatureMask::from_indices(n, &[0, 2]).unwrap()),
                ..SelectorConfig::new(algorithm, 2024)
            },
            target: FeatureMask::from_indices(n, &[0, 1, 4]).unwrap(),
            n,
        }
    }

    /// Initial swarm advanced by `warmup` library steps, so the oracle
    /// starts from non-trivial velocities and memories.
    pub fn swarm(&self, warmup: usize) -> Swarm {
        let target = self.target.clone();
        let mut eval = Evaluator::new(move |m: &FeatureMask| Ok(score(&target, m)));
        let mut s = initialize(&self.cfg, self.n, &mut eval).unwrap();
        for t in 0..warmup {
            step(&mut s, t, &self.cfg, &mut eval).unwrap();
        }
        s
    }

    pub fn library_step(&self, swarm: &Swarm, t: usize) -> Swarm {
        let target = self.target.clone();
        let mut eval = Evaluator::new(move |m: &FeatureMask| Ok(score(&target, m)));
        let mut s = swarm.clone();
        step(&mut s, t, &self.cfg, &mut eval).unwrap();
        s
    }

    fn refresh(&self, s: &mut Swarm) {
        for a in &s.agents {
            if a.fitness > s.best.fitness {
                s.best = a.solution();
            }
        }
    }

    pub fn oracle_step(&self, swarm: &Swarm, t: usize) -> Swarm {
        match self.cfg.algorithm {
            Algorithm::Gsa => self.gsa(swarm, t),
            Algorithm::Bba => self.bba(swarm, t),
            Algorithm::Cs => self.cs(swarm, t),
            Algorithm::Ga => self.ga(swarm, t),
            Algorithm::Gwo => self.gwo(swarm, t),
            Algorithm::Pso => self.pso(swarm, t),
            Algorithm::Woa => self.woa(swarm, t),
        }
    }

    fn gsa(&self, s0: &Swarm, t: usize) -> Swarm {
        let c = &self.cfg;
        let nag = s0.agents.len();
        let n = self.n;
        let fit: Vec<f64> = s0.agents.iter().map(|a| a.fitness).collect();
        let best = fit.iter().cloned().fold(f64::MIN, f64::max);
        let worst = fit.iter().cloned().fold(f64::MAX, f64::min);
        let mut mass = vec![0.0; nag];
        for i in 0..nag {
            mass[i] = if best == worst { 1.0 } else { (fit[i] - worst) / (best - worst) };
        }
        let total: f64 = mass.iter().sum();
        for m in mass.iter_mut() {
            *m /= total;
        }
        let k = ((nag as f64 - (nag as f64 - 1.0) * t as f64 / (c.max_iterations as f64 - 1.0)).round() as usize).clamp(1, nag);
        let mut order: Vec<usize> = (0..nag).collect();
        // selection sort: heaviest first, lower index on ties
        for a in 0..nag {
            let mut pick = a;
            for b in a + 1..nag {
                if mass[order[b]] > mass[order[pick]] {
                    pick = b;
                }
            }
            let v = order.remove(pick);
            order.insert(a, v);
        }
        let heavy = &order[..k];
        let g = c.gsa.g0 * (-c.gsa.decay * t as f64 / c.max_iterations as f64).exp();
        let mut s = s0.clone();
        for i in 0..nag {
            let d = GsaDraws::draw(&mut agent_stream(c, t, i), k, n);
            let xi = &s0.agents[i].position;
            let mut acc = vec![0.0; n];
            for (row, &j) in heavy.iter().enumerate() {
                if j == i {
                    continue;
                }
                let xj = &s0.agents[j].position;
                let mut r2 = 0.0;
                for q in 0..n {
                    r2 += (xi[q] - xj[q]).powi(2);
                }
                let r = r2.sqrt() + c.gsa.epsilon;
                for q in 0..n {
                    // F_ij / M_i with F_ij = G M_i M_j (x_j - x_i) / R
                    acc[q] += d.force_scale[row][q] * g * mass[j] * (xj[q] - xi[q]) / r;
                }
            }
            let a = &mut s.agents[i];
            for q in 0..n {
                a.velocity[q] = clamp(d.retain[q] * a.velocity[q] + acc[q], c.v_max);
                a.position[q] += a.velocity[q];
            }
            a.mask = sample_bits(&a.position, &d.binarize);
            a.fitness = score(&self.target, &a.mask);
        }
        self.refresh(&mut s);
        s
    }

    fn bba(&self, s0: &Swarm, t: usize) -> Swarm {
        let c = &self.cfg;
        let p = &c.bba;
        let n = self.n;
        let mut s = s0.clone();
        let xs = bits01(&s0.best.mask);
        let mean_a = s0.agents.iter().map(|a| a.loudness).sum::<f64>() / s0.agents.len() as f64;
        let mut results = Vec::new();
        for i in 0..s.agents.len() {
            let d = BbaDraws::draw(&mut agent_stream(c, t, i), n);
            let a = &mut s.agents[i];
            let f = p.f_min + (p.f_max - p.f_min) * d.beta;
            for q in 0..n {
                a.velocity[q] = clamp(a.velocity[q] + (xs[q] - a.position[q]) * f, c.v_max);
            }
            let cand = if d.walk_gate > a.pulse_rate {
                let pos: Vec<f64> = (0..n).map(|q| (if s0.best.mask.get(q) { 4.0 } else { -4.0 }) + d.walk[q] * mean_a).collect();
                sample_bits(&pos, &d.walk_binarize)
            } else {
                sample_bits(&a.velocity, &d.binarize)
            };
            results.push((cand, d.accept));
        }
        for (i, (cand, accept)) in results.into_iter().enumerate() {
            let fnew = score(&self.target, &cand);
            if fnew > s.best.fitness {
                s.best.mask = cand.clone();
                s.best.fitness = fnew;
                s.best.position = bits01(&cand);
            }
            let a = &mut s.agents[i];
            if fnew >= a.fitness && accept < a.loudness {
                a.position = bits01(&cand);
                a.mask = cand;
                a.fitness = fnew;
                a.loudness *= p.loudness_decay;
                a.pulse_rate = p.pulse_rate0 * (1.0 - (-p.pulse_gamma * (t as f64 + 1.0)).exp());
            }
        }
        s
    }

    fn cs(&self, s0: &Swarm, t: usize) -> Swarm {
        let c = &self.cfg;
        let n = self.n;
        let nn = s0.agents.len();
        let mut s = s0.clone();
        let draws: Vec<CsDraws> = (0..nn).map(|i| CsDraws::draw(&mut agent_stream(c, t, i), i, nn, n, c.cs.levy_lambda)).collect();
        let mut cands = Vec::new();
        for i in 0..nn {
            let x: Vec<f64> = (0..n).map(|q| s0.agents[i].position[q] + c.cs.step_scale * draws[i].levy[q]).collect();
            let m = if x == s0.agents[i].position { s0.agents[i].mask.clone() } else { sample_bits(&x, &draws[i].binarize) };
            cands.push(m);
        }
        for i in 0..nn {
            let f = score(&self.target, &cands[i]);
            if f > s.best.fitness {
                s.best.mask = cands[i].clone();
                s.best.fitness = f;
                s.best.position = enc(&cands[i]);
            }
            let j = draws[i].rival;
            if f > s.agents[j].fitness {
                s.agents[j].mask = cands[i].clone();
                s.agents[j].position = enc(&cands[i]);
                s.agents[j].fitness = f;
            }
        }
        let count = ((c.cs.abandon_fraction * nn as f64).floor() as usize).min(nn - 1);
        let mut worst = Vec::new();
        for _ in 0..count {
            // lowest fitness not yet taken, later index on ties
            let mut pick: Option<usize> = None;
            for i in (0..nn).rev() {
                if worst.contains(&i) {
                    continue;
                }
                if pick.is_none_or(|p: usize| s.agents[i].fitness < s.agents[p].fitness) {
                    pick = Some(i);
                }
            }
            worst.push(pick.unwrap());
        }
        worst.sort();
        for &i in &worst {
            let m = sample_bits(&draws[i].fresh, &draws[i].fresh_binarize);
            s.agents[i].fitness = score(&self.target, &m);
            s.agents[i].position = enc(&m);
            s.agents[i].mask = m;
        }
        self.refresh(&mut s);
        s
    }

    fn ga(&self, s0: &Swarm, t: usize) -> Swarm {
        let c = &self.cfg;
        let n = self.n;
        let pop = s0.agents.len();
        let fit: Vec<f64> = s0.agents.iter().map(|a| a.fitness).collect();
        let base = c.ga.mutation_rate.unwrap_or(1.0 / n as f64);
        let rate = if s0.stagnant_generations >= c.ga.stagnation_window { (base * c.ga.stagnation_boost).min(1.0) } else { base };
        let pick = |a: usize, b: usize| {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            if fit[hi] > fit[lo] { hi } else { lo }
        };
        let mut elite = 0;
        for i in 1..pop {
            if fit[i] > fit[elite] {
                elite = i;
            }
        }
        let mut s = s0.clone();
        s.agents = vec![s0.agents[elite].clone()];
        for ch in 0..pop - 1 {
            let d = GaDraws::draw(&mut agent_stream(c, t, ch), pop, n);
            let pa = &s0.agents[pick(d.contestants[0], d.contestants[1])].mask;
            let pb = &s0.agents[pick(d.contestants[2], d.contestants[3])].mask;
            let cross = d.crossover_gate < c.ga.crossover_rate;
            let mut bits = Vec::new();
            for q in 0..n {
                let mut b = if cross && d.from_second[q] { pb.get(q) } else { pa.get(q) };
                if d.mutate[q] < rate {
                    b = !b;
                }
                bits.push(b);
            }
            if bits.iter().all(|b| !b) {
                bits[d.repair_bit] = true;
            }
            let m = FeatureMask::from_bits(bits);
            let mut a = s0.agents[0].clone();
            a.fitness = score(&self.target, &m);
            a.position = enc(&m);
            a.velocity = vec![0.0; n];
            a.personal_best = None;
            a.loudness = 0.0;
            a.pulse_rate = 0.0;
            a.mask = m;
            s.agents.push(a);
        }
        let before = s.best.fitness;
        self.refresh(&mut s);
        s.stagnant_generations = if s.best.fitness > before { 0 } else { s0.stagnant_generations + 1 };
        s
    }

    fn gwo(&self, s0: &Swarm, t: usize) -> Swarm {
        let c = &self.cfg;
        let n = self.n;
        let a = 2.0 - 2.0 * t as f64 / c.max_iterations as f64;
        let mut s = s0.clone();
        for i in 0..s.agents.len() {
            let d = GwoDraws::draw(&mut agent_stream(c, t, i), n);
            let x = s0.agents[i].position.clone();
            let mut next = vec![0.0; n];
            for l in 0..3 {
                let xl = &s0.leaders[l].position;
                for q in 0..n {
                    let big_a = 2.0 * a * d.r1[l][q] - a;
                    let cc = 2.0 * d.r2[l][q];
                    let dist = (cc * xl[q] - x[q]).abs();
                    next[q] += (xl[q] - big_a * dist) / 3.0;
                }
            }
            s.agents[i].mask = sample_bits(&next, &d.binarize);
            s.agents[i].position = next;
            s.agents[i].fitness = score(&self.target, &s.agents[i].mask);
        }
        for i in 0..s.agents.len() {
            let f = s.agents[i].fitness;
            let sol = s.agents[i].solution();
            if f > s.leaders[0].fitness {
                s.leaders.insert(0, sol);
            } else if f > s.leaders[1].fitness {
                s.leaders.insert(1, sol);
            } else if f > s.leaders[2].fitness {
                s.leaders.insert(2, sol);
            }
            s.leaders.truncate(3);
        }
        self.refresh(&mut s);
        s
    }

    fn pso(&self, s0: &Swarm, t: usize) -> Swarm {
        let c = &self.cfg;
        let n = self.n;
        let g = s0.best.position.clone();
        let mut s = s0.clone();
        for i in 0..s.agents.len() {
            let d = PsoDraws::draw(&mut agent_stream(c, t, i), n);
            let a = &mut s.agents[i];
            let pb = a.personal_best.as_ref().unwrap().position.clone();
            for q in 0..n {
                let v = a.velocity[q]
                    + c.pso.global_pull * d.global[q] * (g[q] - a.position[q])
                    + c.pso.personal_pull * d.personal[q] * (pb[q] - a.position[q]);
                a.velocity[q] = clamp(v, c.v_max);
                a.position[q] += a.velocity[q];
            }
            a.mask = sample_bits(&a.position, &d.binarize);
            a.fitness = score(&self.target, &a.mask);
            if a.fitness > a.personal_best.as_ref().unwrap().fitness {
                a.personal_best = Some(a.solution());
            }
        }
        self.refresh(&mut s);
        s
    }

    fn woa(&self, s0: &Swarm, t: usize) -> Swarm {
        let c = &self.cfg;
        let n = self.n;
        let a = 2.0 - 2.0 * t as f64 / c.max_iterations as f64;
        let xs = enc(&s0.best.mask);
        let mut s = s0.clone();
        for i in 0..s.agents.len() {
            let d = WoaDraws::draw(&mut agent_stream(c, t, i), s0.agents.len(), n);
            let x = &s0.agents[i].position;
            let big_a = 2.0 * a * d.r1 - a;
            let cc = 2.0 * d.r2;
            let mut next = vec![0.0; n];
            for q in 0..n {
                next[q] = if d.p < c.woa.spiral_probability {
                    let r = if big_a.abs() < 1.0 { xs[q] } else { s0.agents[d.partner].position[q] };
                    r - big_a * (cc * r - x[q]).abs()
                } else {
                    (xs[q] - x[q]).abs() * (c.woa.spiral_shape * d.l).exp() * (2.0 * std::f64::consts::PI * d.l).cos() + xs[q]
                };
            }
            s.agents[i].mask = sample_bits(&next, &d.binarize);
            s.agents[i].position = next;
            s.agents[i].fitness = score(&self.target, &s.agents[i].mask);
        }
        self.refresh(&mut s);
        s
    }
}

/// Library vs oracle gap for one step at iteration `t` after `warmup`
/// steps; `None` when masks or fitness disagree.
pub fn compare(algorithm: Algorithm, agents: usize, warmup: usize, steps: usize) -> Option<f64> {
    let fx = Fixture::new(algorithm, agents);
    let mut lib = fx.swarm(warmup);
    let mut ora = lib.clone();
    let mut gap: f64 = 0.0;
    for t in warmup..warmup + steps {
        lib = fx.library_step(&lib, t);
        ora = fx.oracle_step(&ora, t);
        gap = gap.max(swarm_gap(&lib, &ora)?);
    }
    Some(gap)
}

/// Fixture shape per algorithm: (agents, steps compared).
pub fn fixture_shape(algorithm: Algorithm) -> (usize, usize) {
    match algorithm {
        Algorithm::Gsa | Algorithm::Gwo => (4, 1),
        Algorithm::Ga => (4, 2),
        _ => (3, 1),
    }
}
