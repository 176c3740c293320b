//! Static crosstalk of the fluxonium - transmon - fluxonium chain.

use ftcsim::circuit::ftf_chain_circuit;
use ftcsim::runner::build_pipeline;
use ftcsim::spectrum;

fn main() {
    // four levels per node keep this demo quick; the shipped configs use five
    let spec = ftf_chain_circuit();
    let (_model, ds) = build_pipeline(&spec, 4).unwrap();
    for (qa, qb) in [(0usize, 1usize), (1, 2), (0, 2)] {
        let z = spectrum::zz_crosstalk_pair(&ds, qa, qb).unwrap();
        println!("zeta_{}{} = {z:+.4} kHz", qa + 1, qb + 1);
    }
    let zzz = spectrum::zzz_interaction(&ds).unwrap();
    println!("zeta_zzz = {zzz:+.4} Hz");
    let eps = spectrum::delocalization(&ds).unwrap();
    let worst = eps.values().fold(0.0f64, |s, &e| s.max(e));
    println!("worst computational delocalization = {worst:.5}");
}
