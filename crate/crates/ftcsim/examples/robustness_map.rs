//! Coupler fabrication-error maps: ZZ at the idle flux and after flux
//! readjustment, on a small grid.

use ftcsim::circuit::table_i_circuit;
use ftcsim::spectrum;

fn main() {
    let spec = table_i_circuit();
    let deltas = [-0.02, 0.0, 0.02];
    let maps =
        spectrum::robustness_scan(&spec, &[5, 5, 5], "c1", &deltas, &deltas, 0.3).unwrap();
    println!("zeta at the idle flux (kHz):");
    for i in 0..3 {
        let row: Vec<String> =
            (0..3).map(|j| format!("{:+9.2}", maps.at_sweet_spot[[i, j]])).collect();
        println!("  dEJ={:+.2}: {}", deltas[i], row.join(" "));
    }
    println!("minimum |zeta| after readjusting the flux (kHz):");
    for i in 0..3 {
        let row: Vec<String> =
            (0..3).map(|j| format!("{:+9.2}", maps.readjusted[[i, j]])).collect();
        println!("  dEJ={:+.2}: {}", deltas[i], row.join(" "));
    }
}
