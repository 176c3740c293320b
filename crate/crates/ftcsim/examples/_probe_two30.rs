use std::time::Instant;

use ftcsim::circuit::table_i_circuit;
use ftcsim::drive;
use ftcsim::optim::{self, OptimizationProblem};
use ftcsim::propagate::DressedFrame;
use ftcsim::pulse::{PulseSpec, ToneSpec};
use ftcsim::runner::{build_pipeline, second_tone_candidates};

fn main() {
    let spec = table_i_circuit();
    let (model, ds) = build_pipeline(&spec, 5).unwrap();
    let frame = DressedFrame::new(&model, &ds, "c1", None).unwrap();
    let gate_time = 30.0;
    let ramp = 4.0;

    let mut t_eff = 0.0;
    let n = 400;
    for i in 0..n {
        let t = gate_time * (i as f64 + 0.5) / n as f64;
        t_eff += ftcsim::pulse::flattop_gaussian(t, gate_time, ramp).unwrap() * gate_time / n as f64;
    }
    let m = drive::numerical_a_matrix(&model, &ds).unwrap();
    let mut amp: f64 = 0.3;
    for _ in 0..40 {
        let dc = drive::jacobi_anger_coefficients(20.322, 5.322, amp).unwrap();
        let w = drive::analytic_drive_frequency(&m, &dc).unwrap();
        let t = drive::analytic_gate_time(&m, &dc, w).unwrap();
        if (t - t_eff).abs() < 0.2 { break; }
        amp = (amp * (t / t_eff).powf(0.25)).clamp(0.05, 0.58);
    }
    let dc = drive::jacobi_anger_coefficients(20.322, 5.322, amp).unwrap();
    let f_res = drive::analytic_drive_frequency(&m, &dc).unwrap();
    println!("30 ns: amp = {amp:.4}, f_res = {f_res:.5}");

    let mut best = (f_res, amp, f64::INFINITY);
    for i in 0..7 {
        let f = f_res * (0.97 + 0.06 * i as f64 / 6.0);
        for j in 0..5 {
            let a = amp * (0.8 + 0.4 * j as f64 / 4.0);
            let pulse = PulseSpec {
                coupler: "c1".into(),
                dc_offset: std::f64::consts::FRAC_PI_2,
                tones: vec![ToneSpec { frequency: f, amplitude: a, ramp_time: ramp, phase: 0.0 }],
                gate_time,
            };
            let v = optim::objective(&ds, &frame, &pulse, 1e-6).unwrap();
            if v < best.2 { best = (f, a, v); }
        }
    }
    println!("grid best: f = {:.5}, amp = {:.4}, obj = {:.3e}", best.0, best.1, best.2);

    let problem = OptimizationProblem {
        ds: &ds,
        frame: &frame,
        coupler: "c1".into(),
        dc_offset: std::f64::consts::FRAC_PI_2,
        gate_time,
        seed: ToneSpec { frequency: best.0, amplitude: best.1, ramp_time: ramp, phase: 0.0 },
        budget: 260,
        rtol_search: 1e-7,
        rtol_final: 1e-9,
        target: Some(8e-4),
        rng_seed: 7,
    };
    let t0 = Instant::now();
    let single = optim::optimize_single_tone(&problem).unwrap();
    println!("single-tone 30 ns: {:.3e} after {} evals in {:.0?}",
        single.best_infidelity, single.evaluations, t0.elapsed());
    let st = single.best_pulse.tones[0].clone();
    println!("single pulse: f = {:.6}, amp = {:.4}, ramp = {:.2}", st.frequency, st.amplitude, st.ramp_time);

    let candidates = second_tone_candidates(&spec, &ds, st.frequency).unwrap();
    println!("second-tone candidates: {candidates:?}");
    let two_problem = OptimizationProblem {
        budget: 700,
        target: Some(single.best_infidelity / 150.0),
        rng_seed: 11,
        seed: st.clone(),
        ..problem
    };
    let t0 = Instant::now();
    let two = optim::optimize_two_tone(&two_problem, &st, &candidates, 3).unwrap();
    println!("two-tone 30 ns: {:.3e} after {} evals in {:.0?} (ratio {:.0}x)",
        two.best_infidelity, two.evaluations, t0.elapsed(),
        single.best_infidelity / two.best_infidelity.max(1e-300));
    for (i, t) in two.best_pulse.tones.iter().enumerate() {
        println!("tone {}: f = {:.6}, amp = {:.5}, ramp = {:.2}", i + 1, t.frequency, t.amplitude, t.ramp_time);
    }
}
