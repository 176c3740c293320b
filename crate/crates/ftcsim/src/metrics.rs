//! Spectator bookkeeping and Pauli error decomposition of two-qubit gates.

use ndarray::Array2;
use num_complex::Complex64;

use std::collections::HashMap;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("spectator index {0} out of range for {1} qubits")]
    BadIndex(usize, usize),
    #[error("expected an {0}x{0} matrix, got {1}x{2}")]
    BadShape(usize, usize, usize),
}

/// Partial trace of the spectator qubit from an 8x8 process matrix,
/// normalized by 1/2.
pub fn trace_out_spectator(
    u8m: &Array2<Complex64>,
    spectator: usize,
) -> Result<Array2<Complex64>, MetricsError> {
    if u8m.dim() != (8, 8) {
        return Err(MetricsError::BadShape(8, u8m.nrows(), u8m.ncols()));
    }
    if spectator > 2 {
        return Err(MetricsError::BadIndex(spectator, 3));
    }
    // bit position of the spectator in a 3-bit label (qubit 0 = MSB)
    let shift = 2 - spectator;
    let keep_bits = |b: usize| -> usize {
        let hi = b >> (shift + 1);
        let lo = b & ((1 << shift) - 1);
        (hi << shift) | lo
    };
    let mut out = Array2::from_elem((4, 4), Complex64::new(0.0, 0.0));
    for a in 0..8usize {
        for b in 0..8usize {
            let sa = (a >> shift) & 1;
            let sb = (b >> shift) & 1;
            if sa != sb {
                continue;
            }
            out[[keep_bits(a), keep_bits(b)]] += u8m[[a, b]];
        }
    }
    Ok(out.mapv(|v| v * 0.5))
}

/// Probabilities of three-qubit Pauli strings in the error unitary
/// U_err = U^dag (U_CZ (x) 1): p_P = |Tr(U_err^dag P) / 8|^2.
#[derive(Debug, Clone)]
pub struct PauliWeights {
    pub weights: HashMap<String, f64>,
}

impl PauliWeights {
    pub fn total(&self) -> f64 {
        self.weights.values().sum()
    }

    /// Weights ranked for reporting: Z-only strings first (phase errors),
    /// then everything else, each block by descending probability.
    pub fn ranked(&self) -> Vec<(String, f64)> {
        let mut z_only: Vec<(String, f64)> = Vec::new();
        let mut rest: Vec<(String, f64)> = Vec::new();
        for (k, &v) in &self.weights {
            if k.chars().all(|c| c == 'I' || c == 'Z') {
                z_only.push((k.clone(), v));
            } else {
                rest.push((k.clone(), v));
            }
        }
        z_only.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        rest.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        z_only.extend(rest);
        z_only
    }
}

fn pauli_1q(c: char) -> [[Complex64; 2]; 2] {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match c {
        'I' => [[one, z], [z, one]],
        'X' => [[z, one], [one, z]],
        'Y' => [[z, -i], [i, z]],
        'Z' => [[one, z], [z, -one]],
        _ => unreachable!(),
    }
}

fn pauli_string(s: &str) -> Array2<Complex64> {
    let mut out = Array2::from_elem((1, 1), Complex64::new(1.0, 0.0));
    for c in s.chars() {
        let p = pauli_1q(c);
        let (r, q) = out.dim();
        let mut next = Array2::from_elem((r * 2, q * 2), Complex64::new(0.0, 0.0));
        for a in 0..r {
            for b in 0..q {
                for x in 0..2 {
                    for y in 0..2 {
                        next[[a * 2 + x, b * 2 + y]] = out[[a, b]] * p[x][y];
                    }
                }
            }
        }
        out = next;
    }
    out
}

/// All 64 three-qubit Pauli weights of the residual error unitary.
pub fn pauli_error_weights(
    u8m: &Array2<Complex64>,
    target: &Array2<Complex64>,
) -> Result<PauliWeights, MetricsError> {
    if u8m.dim() != (8, 8) || target.dim() != (8, 8) {
        return Err(MetricsError::BadShape(8, u8m.nrows(), u8m.ncols()));
    }
    // U_err = U^dag target
    let mut u_err = Array2::from_elem((8, 8), Complex64::new(0.0, 0.0));
    for i in 0..8 {
        for j in 0..8 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..8 {
                acc += u8m[[k, i]].conj() * target[[k, j]];
            }
            u_err[[i, j]] = acc;
        }
    }
    let letters = ['I', 'X', 'Y', 'Z'];
    let mut weights = HashMap::new();
    for a in letters {
        for b in letters {
            for c in letters {
                let name: String = [a, b, c].iter().collect();
                let p = pauli_string(&name);
                let mut tr = Complex64::new(0.0, 0.0);
                for i in 0..8 {
                    for j in 0..8 {
                        tr += u_err[[j, i]].conj() * p[[j, i]];
                    }
                }
                weights.insert(name, (tr / 8.0).norm_sqr());
            }
        }
    }
    Ok(PauliWeights { weights })
}
