//! ZZ-crosstalk of the unit cell versus coupler flux around the idle point.

use ftcsim::circuit::{self, table_i_circuit};
use ftcsim::quantize;
use ftcsim::spectrum::{self, dressed_spectrum};

fn main() {
    let spec = table_i_circuit();
    let ec = circuit::reduced_charging_energy(&spec).unwrap();
    let model = quantize::assemble_hamiltonian(&spec, &ec, &[5, 5, 5]).unwrap();
    let idle = std::f64::consts::FRAC_PI_2;
    println!("{:>10} {:>14}", "flux(rad)", "zeta(kHz)");
    for i in 0..21 {
        let f = idle - 0.15 + 0.015 * i as f64;
        let ds = dressed_spectrum(&model, &spec, &[("c1", f)]).unwrap();
        let z = spectrum::zz_crosstalk(&ds).unwrap();
        println!("{f:10.4} {z:14.4}");
    }
    let (fmin, zmin) =
        spectrum::min_abs_zz_over_flux(&model, &spec, "c1", (idle - 0.3, idle + 0.3), 13).unwrap();
    println!("minimum |zeta| = {zmin:.4} kHz at flux = {fmin:.4} rad");
}
