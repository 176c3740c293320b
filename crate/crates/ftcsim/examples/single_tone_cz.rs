//! Optimize a single-tone 40 ns CZ pulse from the analytic seed.

use ftcsim::optim::{self, OptimizationProblem};
use ftcsim::propagate::DressedFrame;
use ftcsim::pulse::ToneSpec;
use ftcsim::runner::{build_pipeline, seed_drive_frequency};

fn main() {
    let spec = ftcsim::circuit::table_i_circuit();
    let (model, ds) = build_pipeline(&spec, 5).unwrap();
    let frame = DressedFrame::new(&model, &ds, "c1", None).unwrap();
    let f_seed = seed_drive_frequency(&spec, &ds).unwrap();
    println!("analytic seed frequency: {f_seed:.5} GHz");
    let problem = OptimizationProblem {
        ds: &ds,
        frame: &frame,
        coupler: "c1".into(),
        dc_offset: std::f64::consts::FRAC_PI_2,
        gate_time: 40.0,
        seed: ToneSpec { frequency: f_seed, amplitude: 0.235, ramp_time: 8.0, phase: 0.0 },
        budget: 100,
        rtol_search: 1e-7,
        rtol_final: 1e-9,
        target: Some(5e-4),
        rng_seed: 7,
    };
    let res = optim::optimize_single_tone(&problem).unwrap();
    println!(
        "seed infidelity {:.3e} -> optimized {:.3e} after {} evaluations",
        res.seed_infidelity, res.best_infidelity, res.evaluations
    );
    let t = &res.best_pulse.tones[0];
    println!(
        "pulse: f = {:.5} GHz, amplitude = {:.4} rad, ramp = {:.2} ns",
        t.frequency, t.amplitude, t.ramp_time
    );
}
