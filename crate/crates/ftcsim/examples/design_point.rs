//! Static design-point summary for the shipped unit cell.

use ftcsim::circuit::{self, table_i_circuit};
use ftcsim::drive;
use ftcsim::quantize;
use ftcsim::spectrum::{self, dressed_spectrum};

fn main() {
    let spec = table_i_circuit();
    let ec = circuit::reduced_charging_energy(&spec).unwrap();
    println!("E_C matrix (GHz):");
    for i in 0..3 {
        println!(
            "  {:+.8} {:+.8} {:+.8}",
            ec.matrix[[i, 0]],
            ec.matrix[[i, 1]],
            ec.matrix[[i, 2]]
        );
    }
    let model = quantize::assemble_hamiltonian(&spec, &ec, &[5, 5, 5]).unwrap();
    let ds = dressed_spectrum(&model, &spec, &[]).unwrap();
    let f_f = ds.energy(&ds.computational_label(&[1, 0])).unwrap();
    let f_t = ds.energy(&ds.computational_label(&[0, 1])).unwrap();
    println!("dressed f_fluxonium = {f_f:.6} GHz");
    println!("dressed f_transmon  = {f_t:.6} GHz");
    let m = drive::numerical_a_matrix(&model, &ds).unwrap();
    println!("E101 = {:.6}  E110 = {:.6}  E200 = {:.6}", m.energies[0], m.energies[1], m.energies[2]);
    println!("E101-E200 = {:.6}", m.energies[0] - m.energies[2]);
    println!("zpf = {:.6}  cos_ref = {:.6}", m.zpf_phase, m.cos_reference);
    println!("A = ");
    for i in 0..3 {
        println!(
            "  {:+.8} {:+.8} {:+.8}",
            m.a_matrix[[i, 0]],
            m.a_matrix[[i, 1]],
            m.a_matrix[[i, 2]]
        );
    }
    let zeta = spectrum::zz_crosstalk(&ds).unwrap();
    println!("zeta(pi/2) = {zeta:+.4} kHz");
    let eps = spectrum::delocalization(&ds).unwrap();
    let mut worst: f64 = 0.0;
    for (label, e) in &eps {
        println!("  eps{label:?} = {e:.6}");
        worst = worst.max(*e);
    }
    println!("eps_max = {worst:.6}");
    let dc = drive::jacobi_anger_coefficients(20.322, 5.322, 0.1).unwrap();
    println!("alpha(0.1) = {:.6}  beta(0.1) = {:.6}  d = {:.6}", dc.alpha, dc.beta, dc.d);
    let w1 = drive::analytic_drive_frequency(&m, &dc).unwrap();
    let t1 = drive::analytic_gate_time(&m, &dc, w1).unwrap();
    println!("omega_D(order1) = {w1:.6} GHz  t_gate(order1) = {t1:.2} ns");
}
