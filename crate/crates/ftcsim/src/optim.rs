//! Derivative-free pulse-parameter optimization: bounded Nelder-Mead over
//! closed-system gate infidelity, with deterministic seeded multi-start.

use crate::propagate::{simulate_gate, DressedFrame, PropagateError, PropagateOptions};
use crate::pulse::{PulseSpec, ToneSpec};
use crate::spectrum::DressedSpectrum;

#[derive(Debug, thiserror::Error)]
pub enum OptimError {
    #[error("bounds and parameter vectors disagree in length")]
    BadBounds,
    #[error("seed pulse violates the problem bounds")]
    SeedOutOfBounds,
    #[error(transparent)]
    Propagate(#[from] PropagateError),
}

/// Per-parameter box bounds.
#[derive(Debug, Clone)]
pub struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bounds {
    pub fn clip(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lo[i], self.hi[i]);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .enumerate()
            .all(|(i, v)| *v >= self.lo[i] - 1e-12 && *v <= self.hi[i] + 1e-12)
    }
}

// deterministic splitmix64 stream for multistart jitter
struct Rng(u64);

impl Rng {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z = z ^ (z >> 31);
        (z >> 11) as f64 / (1u64 << 53) as f64
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadReport {
    pub best: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
    /// (parameters, value) of every evaluation, in order.
    pub trace: Vec<(Vec<f64>, f64)>,
    pub hit_target: bool,
}

/// Bounded Nelder-Mead with one restart from the incumbent, an evaluation
/// budget, and an optional early-stop target.
pub fn nelder_mead<F>(
    mut f: F,
    x0: &[f64],
    bounds: &Bounds,
    scale: &[f64],
    budget: usize,
    target: Option<f64>,
) -> Result<NelderMeadReport, OptimError>
where
    F: FnMut(&[f64]) -> Result<f64, PropagateError>,
{
    let n = x0.len();
    if bounds.lo.len() != n || bounds.hi.len() != n || scale.len() != n {
        return Err(OptimError::BadBounds);
    }
    let mut trace: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut evals = 0usize;
    let mut hit_target = false;

    let mut eval = |x: &[f64],
                    trace: &mut Vec<(Vec<f64>, f64)>,
                    evals: &mut usize|
     -> Result<f64, PropagateError> {
        let v = f(x)?;
        trace.push((x.to_vec(), v));
        *evals += 1;
        Ok(v)
    };

    let mut best = x0.to_vec();
    bounds.clip(&mut best);
    let mut best_val = eval(&best, &mut trace, &mut evals)?;
    if let Some(t) = target {
        if best_val <= t {
            return Ok(NelderMeadReport { best, best_value: best_val, evaluations: evals, trace, hit_target: true });
        }
    }

    for round in 0..2 {
        let shrink = if round == 0 { 1.0 } else { 0.25 };
        // simplex around the incumbent
        let mut simplex: Vec<Vec<f64>> = vec![best.clone()];
        for i in 0..n {
            let mut v = best.clone();
            let step = scale[i] * shrink;
            v[i] = if v[i] + step <= bounds.hi[i] { v[i] + step } else { v[i] - step };
            bounds.clip(&mut v);
            simplex.push(v);
        }
        let mut values = Vec::with_capacity(n + 1);
        values.push(best_val);
        for v in simplex.iter().skip(1) {
            if evals >= budget {
                break;
            }
            values.push(eval(v, &mut trace, &mut evals)?);
        }
        while values.len() < simplex.len() {
            simplex.pop();
        }
        if simplex.len() < 2 {
            break;
        }

        'iterations: while evals < budget {
            let mut order: Vec<usize> = (0..simplex.len()).collect();
            order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
            let (ibest, iworst) = (order[0], *order.last().unwrap());
            let isecond = order[order.len() - 2];
            if values[ibest] < best_val {
                best_val = values[ibest];
                best = simplex[ibest].clone();
                if let Some(t) = target {
                    if best_val <= t {
                        hit_target = true;
                        break 'iterations;
                    }
                }
            }
            if (values[iworst] - values[ibest]).abs()
                < 1e-12 * values[ibest].abs().max(1e-15)
            {
                break;
            }
            // centroid of all but worst
            let mut centroid = vec![0.0; n];
            for (i, v) in simplex.iter().enumerate() {
                if i == iworst {
                    continue;
                }
                for j in 0..n {
                    centroid[j] += v[j] / (simplex.len() - 1) as f64;
                }
            }
            let make = |coef: f64| -> Vec<f64> {
                let mut p: Vec<f64> = (0..n)
                    .map(|j| centroid[j] + coef * (centroid[j] - simplex[iworst][j]))
                    .collect();
                bounds.clip(&mut p);
                p
            };
            let refl = make(1.0);
            let v_refl = eval(&refl, &mut trace, &mut evals)?;
            if v_refl < values[ibest] {
                if evals >= budget {
                    simplex[iworst] = refl;
                    values[iworst] = v_refl;
                    continue;
                }
                let exp = make(2.0);
                let v_exp = eval(&exp, &mut trace, &mut evals)?;
                if v_exp < v_refl {
                    simplex[iworst] = exp;
                    values[iworst] = v_exp;
                } else {
                    simplex[iworst] = refl;
                    values[iworst] = v_refl;
                }
            } else if v_refl < values[isecond] {
                simplex[iworst] = refl;
                values[iworst] = v_refl;
            } else {
                let con = make(-0.5);
                if evals >= budget {
                    break;
                }
                let v_con = eval(&con, &mut trace, &mut evals)?;
                if v_con < values[iworst] {
                    simplex[iworst] = con;
                    values[iworst] = v_con;
                } else {
                    // shrink toward best
                    for i in 0..simplex.len() {
                        if i == ibest {
                            continue;
                        }
                        for j in 0..n {
                            simplex[i][j] =
                                simplex[ibest][j] + 0.5 * (simplex[i][j] - simplex[ibest][j]);
                        }
                        if evals >= budget {
                            break;
                        }
                        values[i] = eval(&simplex[i], &mut trace, &mut evals)?;
                    }
                }
            }
        }
        // refresh incumbent from the final simplex
        for (i, v) in values.iter().enumerate() {
            if *v < best_val {
                best_val = *v;
                best = simplex[i].clone();
            }
        }
        if hit_target || evals >= budget {
            break;
        }
    }
    Ok(NelderMeadReport { best, best_value: best_val, evaluations: evals, trace, hit_target })
}

/// A pulse optimization task against closed-system CZ infidelity.
pub struct OptimizationProblem<'a> {
    pub ds: &'a DressedSpectrum,
    pub frame: &'a DressedFrame,
    pub coupler: String,
    pub dc_offset: f64,
    pub gate_time: f64,
    /// Seed tone (frequency, amplitude, ramp).
    pub seed: ToneSpec,
    /// Objective evaluations allowed.
    pub budget: usize,
    /// Integrator tolerance during the search.
    pub rtol_search: f64,
    /// Tolerance of the final re-evaluation.
    pub rtol_final: f64,
    /// Early-stop threshold on the search-tolerance objective.
    pub target: Option<f64>,
    pub rng_seed: u64,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub best_pulse: PulseSpec,
    /// Infidelity of the best pulse at the final tolerance.
    pub best_infidelity: f64,
    /// Infidelity of the seed pulse at the search tolerance.
    pub seed_infidelity: f64,
    pub evaluations: usize,
    pub trace: Vec<(Vec<f64>, f64)>,
    pub rng_seed: u64,
    pub hit_target: bool,
}

fn one_tone_pulse(p: &OptimizationProblem, x: &[f64]) -> PulseSpec {
    PulseSpec {
        coupler: p.coupler.clone(),
        dc_offset: p.dc_offset,
        tones: vec![ToneSpec { frequency: x[0], amplitude: x[1], ramp_time: x[2], phase: 0.0 }],
        gate_time: p.gate_time,
    }
}

fn two_tone_pulse(p: &OptimizationProblem, x: &[f64]) -> PulseSpec {
    PulseSpec {
        coupler: p.coupler.clone(),
        dc_offset: p.dc_offset,
        tones: vec![
            ToneSpec { frequency: x[0], amplitude: x[1], ramp_time: x[2], phase: 0.0 },
            ToneSpec { frequency: x[3], amplitude: x[4], ramp_time: x[5], phase: 0.0 },
        ],
        gate_time: p.gate_time,
    }
}

/// Closed-system objective: propagate, correct, score.
pub fn objective(
    ds: &DressedSpectrum,
    frame: &DressedFrame,
    pulse: &PulseSpec,
    rtol: f64,
) -> Result<f64, PropagateError> {
    let res = simulate_gate(ds, frame, pulse, &PropagateOptions { rtol, record_populations: false })?;
    Ok(res.infidelity)
}

/// Spec bounds for a single tone: frequency within 5% of the seed, amplitude
/// up to 0.6 rad, ramp within [1, gate_time/2].
pub fn single_tone_bounds(seed: &ToneSpec, gate_time: f64) -> Bounds {
    Bounds {
        lo: vec![seed.frequency * 0.95, 0.0, 1.0],
        hi: vec![seed.frequency * 1.05, 0.6, gate_time / 2.0],
    }
}

/// Nelder-Mead over (frequency, amplitude, ramp) of a single tone.
pub fn optimize_single_tone(p: &OptimizationProblem) -> Result<OptimizationResult, OptimError> {
    let bounds = single_tone_bounds(&p.seed, p.gate_time);
    let x0 = vec![p.seed.frequency, p.seed.amplitude, p.seed.ramp_time];
    if !bounds.contains(&x0) {
        return Err(OptimError::SeedOutOfBounds);
    }
    let seed_infidelity =
        objective(p.ds, p.frame, &one_tone_pulse(p, &x0), p.rtol_search)?;
    // stage one: frequency and amplitude with the ramp frozen (the narrow
    // resonance valley is two-dimensional), then a full restart over all
    // three parameters from the incumbent
    let ramp0 = p.seed.ramp_time;
    let b2 = Bounds { lo: vec![bounds.lo[0], bounds.lo[1]], hi: vec![bounds.hi[0], bounds.hi[1]] };
    let stage1 = nelder_mead(
        |x| {
            objective(
                p.ds,
                p.frame,
                &one_tone_pulse(p, &[x[0], x[1], ramp0]),
                p.rtol_search,
            )
        },
        &x0[..2],
        &b2,
        &[p.seed.frequency * 0.01, 0.05f64.min(p.seed.amplitude.max(0.02))],
        p.budget * 11 / 20,
        p.target,
    )?;
    let mut trace: Vec<(Vec<f64>, f64)> = stage1
        .trace
        .iter()
        .map(|(x, v)| (vec![x[0], x[1], ramp0], *v))
        .collect();
    let mut evaluations = stage1.evaluations;
    let mut best_x = vec![stage1.best[0], stage1.best[1], ramp0];
    let mut best_v = stage1.best_value;
    let mut hit = stage1.hit_target;
    if !hit && evaluations < p.budget {
        let stage2 = nelder_mead(
            |x| objective(p.ds, p.frame, &one_tone_pulse(p, x), p.rtol_search),
            &best_x,
            &bounds,
            &[p.seed.frequency * 0.003, 0.015, p.gate_time * 0.06],
            p.budget - evaluations,
            p.target,
        )?;
        evaluations += stage2.evaluations;
        trace.extend(stage2.trace);
        if stage2.best_value < best_v {
            best_v = stage2.best_value;
            best_x = stage2.best;
        }
        hit = stage2.hit_target;
    }
    let best_pulse = one_tone_pulse(p, &best_x);
    let best_infidelity = objective(p.ds, p.frame, &best_pulse, p.rtol_final)?;
    Ok(OptimizationResult {
        best_pulse,
        best_infidelity: best_infidelity.min(best_v),
        seed_infidelity,
        evaluations,
        trace,
        rng_seed: p.rng_seed,
        hit_target: hit,
    })
}

/// Two-tone optimization: six parameters, multi-start over candidate
/// second-tone frequencies, seeded from a single-tone optimum.
pub fn optimize_two_tone(
    p: &OptimizationProblem,
    single_best: &ToneSpec,
    second_freq_candidates: &[f64],
    starts: usize,
) -> Result<OptimizationResult, OptimError> {
    let b1 = single_tone_bounds(single_best, p.gate_time);
    let amp2_max = (0.1 * single_best.amplitude).max(1e-4);
    let mut rng = Rng(p.rng_seed);
    let mut best: Option<OptimizationResult> = None;
    let budget_per = p.budget / starts.max(1).min(second_freq_candidates.len().max(1));
    let mut seed_inf = f64::NAN;

    for (s, &f2) in second_freq_candidates.iter().take(starts.max(1)).enumerate() {
        let jitter = if s == 0 { 0.0 } else { (rng.next_f64() - 0.5) * 0.02 * f2 };
        let f2j = (f2 + jitter).max(1e-3);
        let bounds = Bounds {
            lo: vec![b1.lo[0], b1.lo[1], b1.lo[2], f2j * 0.90, 0.0, 1.0],
            hi: vec![b1.hi[0], b1.hi[1], b1.hi[2], f2j * 1.10, amp2_max, p.gate_time / 2.0],
        };
        let x0 = vec![
            single_best.frequency,
            single_best.amplitude,
            single_best.ramp_time,
            f2j,
            0.2 * amp2_max,
            single_best.ramp_time,
        ];
        let mut x0c = x0.clone();
        bounds.clip(&mut x0c);
        if seed_inf.is_nan() {
            seed_inf = objective(p.ds, p.frame, &two_tone_pulse(p, &x0c), p.rtol_search)?;
        }
        let scale = vec![
            single_best.frequency * 0.005,
            0.02,
            p.gate_time * 0.05,
            f2j * 0.02,
            0.25 * amp2_max,
            p.gate_time * 0.08,
        ];
        let report = nelder_mead(
            |x| objective(p.ds, p.frame, &two_tone_pulse(p, x), p.rtol_search),
            &x0c,
            &bounds,
            &scale,
            budget_per.max(20),
            p.target,
        )?;
        let cand = report.best_value;
        let replace = best.as_ref().map(|b| cand < b.best_infidelity).unwrap_or(true);
        if replace {
            let pulse = two_tone_pulse(p, &report.best);
            let final_inf = objective(p.ds, p.frame, &pulse, p.rtol_final)?;
            best = Some(OptimizationResult {
                best_pulse: pulse,
                best_infidelity: final_inf.min(cand),
                seed_infidelity: seed_inf,
                evaluations: report.evaluations,
                trace: report.trace,
                rng_seed: p.rng_seed,
                hit_target: report.hit_target,
            });
        }
        if best.as_ref().map(|b| b.hit_target).unwrap_or(false) {
            break;
        }
    }
    Ok(best.expect("at least one start"))
}
