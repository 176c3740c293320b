//! Analytic drive-frequency and gate-time predictions of the three-level
//! model against its own numerical optimum, at a weak drive amplitude.

use ftcsim::circuit::{self, table_i_circuit};
use ftcsim::drive::{self, jacobi_anger_coefficients};
use ftcsim::quantize;
use ftcsim::spectrum::dressed_spectrum;

fn main() {
    let spec = table_i_circuit();
    let ec = circuit::reduced_charging_energy(&spec).unwrap();
    let model = quantize::assemble_hamiltonian(&spec, &ec, &[5, 5, 5]).unwrap();
    let ds = dressed_spectrum(&model, &spec, &[]).unwrap();
    let m = drive::numerical_a_matrix(&model, &ds).unwrap();
    let (ejs, ejd) = (12.822 + 7.5, 12.822 - 7.5);

    // pick the amplitude that lands near a 200 ns analytic gate
    let mut phi_ac = 0.10f64;
    for _ in 0..40 {
        let dc = jacobi_anger_coefficients(ejs, ejd, phi_ac).unwrap();
        let w = drive::analytic_drive_frequency(&m, &dc).unwrap();
        let t = drive::analytic_gate_time(&m, &dc, w).unwrap();
        if (t - 200.0).abs() < 0.5 {
            break;
        }
        phi_ac *= (t / 200.0).sqrt().sqrt();
    }
    let dc = jacobi_anger_coefficients(ejs, ejd, phi_ac).unwrap();
    println!("phi_AC = {phi_ac:.4} rad  alpha = {:.5}  beta = {:.5}", dc.alpha, dc.beta);

    let w1 = drive::analytic_drive_frequency(&m, &dc).unwrap();
    let w2 = drive::analytic_drive_frequency_order2(&m, &dc).unwrap();
    let t1 = drive::analytic_gate_time(&m, &dc, w1).unwrap();
    let t2 = drive::analytic_gate_time_order2(&m, &dc).unwrap();
    println!("omega_D order1 = {w1:.6} GHz, order2 = {w2:.6} GHz");
    println!("t_gate order1 = {t1:.2} ns, order2 = {t2:.2} ns");

    let w_opt =
        drive::optimize_three_level_frequency(&m, &dc, (w1 * 0.97, w1 * 1.03)).unwrap();
    let window = 1.4 * t1.max(t2);
    let t_num = drive::full_oscillation_time(&m, &dc, w_opt, window).unwrap();
    println!("omega_opt = {w_opt:.6} GHz, numeric full oscillation = {t_num:.2} ns");
    println!(
        "freq deviation: order1 {:.3}%  order2 {:.3}%",
        (w1 - w_opt).abs() / w_opt * 100.0,
        (w2 - w_opt).abs() / w_opt * 100.0
    );
    println!(
        "time deviation: order1 {:.2}%  order2 {:.2}%",
        (t1 - t_num).abs() / t_num * 100.0,
        (t2 - t_num).abs() / t_num * 100.0
    );
    let peak = drive::peak_transfer(&m, &dc, w_opt, window).unwrap();
    println!("peak transfer at optimum = {peak:.6}");
}
