use std::time::Instant;

use ftcsim::circuit::table_i_circuit;
use ftcsim::drive;
use ftcsim::optim::{self, OptimizationProblem};
use ftcsim::propagate::DressedFrame;
use ftcsim::pulse::{PulseSpec, ToneSpec};
use ftcsim::runner::{build_pipeline, seed_drive_frequency};

fn main() {
    let spec = table_i_circuit();
    let (model, ds) = build_pipeline(&spec, 5).unwrap();
    let frame = DressedFrame::new(&model, &ds, "c1", None).unwrap();
    let f0 = seed_drive_frequency(&spec, &ds).unwrap();
    let gate_time = 40.0;
    let ramp = 8.0;

    let mut t_eff = 0.0;
    let n = 400;
    for i in 0..n {
        let t = gate_time * (i as f64 + 0.5) / n as f64;
        t_eff += ftcsim::pulse::flattop_gaussian(t, gate_time, ramp).unwrap() * gate_time / n as f64;
    }
    let m = drive::numerical_a_matrix(&model, &ds).unwrap();
    let mut amp: f64 = 0.25;
    for _ in 0..40 {
        let dc = drive::jacobi_anger_coefficients(20.322, 5.322, amp).unwrap();
        let w = drive::analytic_drive_frequency(&m, &dc).unwrap();
        let t = drive::analytic_gate_time(&m, &dc, w).unwrap();
        if (t - t_eff).abs() < 0.2 { break; }
        amp = (amp * (t / t_eff).powf(0.25)).clamp(0.05, 0.58);
    }
    // resonance at this amplitude from the closed form (Stark shifts included)
    let dc = drive::jacobi_anger_coefficients(20.322, 5.322, amp).unwrap();
    let f_res = drive::analytic_drive_frequency(&m, &dc).unwrap();
    println!("t_eff = {t_eff:.2} ns -> seed amp = {amp:.4}, f0 = {f0:.5}, f_res = {f_res:.5}");
    let f0 = f_res;

    let eval = |f: f64, a: f64, r: f64, tol: f64| -> f64 {
        let pulse = PulseSpec {
            coupler: "c1".into(),
            dc_offset: std::f64::consts::FRAC_PI_2,
            tones: vec![ToneSpec { frequency: f, amplitude: a, ramp_time: r, phase: 0.0 }],
            gate_time,
        };
        optim::objective(&ds, &frame, &pulse, tol).unwrap()
    };

    let t0 = Instant::now();
    let mut best = (f0, amp, f64::INFINITY);
    for i in 0..7 {
        let f = f0 * (0.97 + 0.06 * i as f64 / 6.0);
        for j in 0..5 {
            let a = amp * (0.8 + 0.4 * j as f64 / 4.0);
            let v = eval(f, a, ramp, 1e-6);
            if v < best.2 { best = (f, a, v); }
        }
    }
    println!("grid best: f = {:.5}, amp = {:.4}, obj = {:.3e} in {:.0?}", best.0, best.1, best.2, t0.elapsed());

    let problem = OptimizationProblem {
        ds: &ds,
        frame: &frame,
        coupler: "c1".into(),
        dc_offset: std::f64::consts::FRAC_PI_2,
        gate_time,
        seed: ToneSpec { frequency: best.0, amplitude: best.1, ramp_time: ramp, phase: 0.0 },
        budget: 280,
        rtol_search: 1e-7,
        rtol_final: 1e-9,
        target: Some(6e-4),
        rng_seed: 7,
    };
    let t0 = Instant::now();
    let res = optim::optimize_single_tone(&problem).unwrap();
    println!("optimized: {:.3e} after {} evals in {:.0?} (hit target {})",
        res.best_infidelity, res.evaluations, t0.elapsed(), res.hit_target);
    let t = &res.best_pulse.tones[0];
    println!("pulse: f = {:.6}, amp = {:.4}, ramp = {:.2}", t.frequency, t.amplitude, t.ramp_time);
}
