//! Time evolution of the full model under flux drives, and process-matrix
//! extraction with virtual-Z corrections.
//!
//! Propagation runs in the interaction picture of the static dressed basis:
//! the only time-dependent terms are the driven coupler's cos/sin operators
//! multiplied by scalar flux coefficients, so each right-hand side is two
//! real matrix products plus diagonal phases.

use std::collections::HashMap;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::cmat::CBlock;
use crate::ode::{self, OdeOptions};
use crate::pulse::{PulseError, PulseSpec};
use crate::quantize::HamiltonianModel;
use crate::spectrum::{DressedSpectrum, SpectrumError};

#[derive(Debug, thiserror::Error)]
pub enum PropagateError {
    #[error("pulse drives unknown coupler `{0}`")]
    UnknownCoupler(String),
    #[error("norm defect {0:.3e} exceeds the unitarity tolerance")]
    UnitarityLoss(f64),
    #[error("decay rate missing for populated label {0:?} (population {1:.3e})")]
    MissingRate(Vec<usize>, f64),
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Ode(#[from] ode::OdeError),
}

/// Static dressed frame with the driven coupler's operators rotated in.
pub struct DressedFrame {
    /// Dressed energies relative to the ground state (retained states).
    pub energies: Array1<f64>,
    /// Retained eigenstate indices (ascending energy).
    pub retained: Vec<usize>,
    /// Map eigenstate index -> retained row.
    pub row_of_eigen: HashMap<usize, usize>,
    pub cos_tilde: Array2<f64>,
    pub sin_tilde: Array2<f64>,
    /// SQUID drive parameters of the driven coupler.
    pub e_upper: f64,
    pub e_lower: f64,
    pub m_upper: f64,
    pub m_lower: f64,
    pub theta0: f64,
    pub idle_flux: f64,
}

impl DressedFrame {
    /// Build the frame for one driven coupler, optionally truncating to the
    /// lowest `retain` dressed states.
    pub fn new(
        model: &HamiltonianModel,
        ds: &DressedSpectrum,
        coupler: &str,
        retain: Option<usize>,
    ) -> Result<Self, PropagateError> {
        let drive = model
            .drive(coupler)
            .ok_or_else(|| PropagateError::UnknownCoupler(coupler.to_string()))?;
        let dim = model.dim();
        let r = retain.unwrap_or(dim).min(dim);
        // lowest r eigenstates (energies are ascending already)
        let retained: Vec<usize> = (0..r).collect();
        let mut row_of_eigen = HashMap::new();
        for (row, &k) in retained.iter().enumerate() {
            row_of_eigen.insert(k, row);
        }
        let e0 = ds.ground_energy();
        let energies = Array1::from_iter(retained.iter().map(|&k| ds.energies[k] - e0));
        let v = ds.vectors.select(ndarray::Axis(1), &retained);
        let cos_tilde = v.t().dot(&drive.cos_op).dot(&v);
        let sin_tilde = v.t().dot(&drive.sin_op).dot(&v);
        Ok(DressedFrame {
            energies,
            retained,
            row_of_eigen,
            cos_tilde,
            sin_tilde,
            e_upper: drive.e_upper,
            e_lower: drive.e_lower,
            m_upper: drive.m_upper,
            m_lower: drive.m_lower,
            theta0: drive.theta0,
            idle_flux: drive.idle_flux,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Drive coefficients (relative to idle) at external flux `flux`.
    pub fn delta_coefficients(&self, flux: f64) -> (f64, f64) {
        let coeff = |f: f64| {
            crate::quantize::squid_coefficients(
                self.e_upper,
                self.e_lower,
                self.m_upper,
                self.m_lower,
                self.theta0,
                f,
            )
        };
        let (c, s) = coeff(flux);
        let (c0, s0) = coeff(self.idle_flux);
        (c - c0, s - s0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PropagateOptions {
    pub rtol: f64,
    /// Record time-averaged populations during the evolution.
    pub record_populations: bool,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions { rtol: 1e-9, record_populations: false }
    }
}

/// Result of propagating a set of initial basis columns.
pub struct Propagation {
    /// Interaction-picture propagator columns at the end of the window
    /// (free evolution already removed).
    pub u_int: CBlock,
    /// Initial columns (retained-basis row indices).
    pub columns: Vec<usize>,
    /// Time-averaged populations (retained-state row x input column).
    pub avg_populations: Option<Array2<f64>>,
    pub gate_time: f64,
    pub stats: ode::OdeStats,
    /// Worst column-norm defect |1 - |psi||.
    pub norm_defect: f64,
}

/// Propagate the columns `initial_rows` of the identity through the pulse.
pub fn propagate_columns(
    frame: &DressedFrame,
    pulse: &PulseSpec,
    initial_rows: &[usize],
    opts: &PropagateOptions,
) -> Result<Propagation, PropagateError> {
    pulse.validate()?;
    let dim = frame.dim();
    let k = initial_rows.len();
    let y0 = CBlock::basis_columns(dim, initial_rows);
    let two_pi = std::f64::consts::TAU;

    let energies = frame.energies.clone();
    let cos_t = &frame.cos_tilde;
    let sin_t = &frame.sin_tilde;
    let pulse_cl = pulse.clone();
    let frame_ref = frame;

    let mut cos_p = Array1::<f64>::zeros(dim);
    let mut sin_p = Array1::<f64>::zeros(dim);
    let mut m = Array2::<f64>::zeros((dim, dim));
    let rhs = move |t: f64, y: &CBlock| -> CBlock {
        let flux = crate::pulse::flux_waveform(&pulse_cl, t);
        let (dc, dsn) = frame_ref.delta_coefficients(flux);
        // M(t) = dc * cos_tilde + ds * sin_tilde (real symmetric)
        m.assign(cos_t);
        m.mapv_inplace(|v| v * dc);
        m.scaled_add(dsn, sin_t);
        // interaction picture: psi' = -2 pi i e^{+iDt} M e^{-iDt} psi
        for r in 0..dim {
            let ph = two_pi * energies[r] * t;
            cos_p[r] = ph.cos();
            sin_p[r] = ph.sin();
        }
        let mut u = y.clone();
        let neg_sin: Array1<f64> = sin_p.mapv(|v| -v);
        u.phase_rows(&cos_p, &neg_sin); // e^{-iDt} psi
        let mut w = u.apply_real(&m);
        w.phase_rows(&cos_p, &sin_p); // e^{+iDt} (...)
        // multiply by -2 pi i
        let re = w.im.mapv(|v| two_pi * v);
        let im = w.re.mapv(|v| -two_pi * v);
        CBlock { re, im }
    };

    let h_max = {
        // resolve the fastest drive tone comfortably
        let fmax = pulse.tones.iter().map(|t| t.frequency).fold(0.1, f64::max);
        0.02 / fmax
    };
    let ode_opts = OdeOptions {
        rtol: opts.rtol,
        atol: opts.rtol * 1e-2,
        h_init: 1e-3,
        h_max,
        ..Default::default()
    };

    let mut avg = if opts.record_populations { Some(Array2::zeros((dim, k))) } else { None };
    let mut prev: Option<(f64, Array2<f64>)> = None;
    let mut observer = |t: f64, _h: f64, y: &CBlock| {
        if let Some(acc) = avg.as_mut() {
            let mut p = Array2::zeros((dim, k));
            y.accumulate_populations(1.0, &mut p);
            if let Some((tp, pp)) = prev.take() {
                let w = 0.5 * (t - tp);
                acc.scaled_add(w, &pp);
                acc.scaled_add(w, &p);
            }
            prev = Some((t, p));
        }
    };

    let (mut u_int, stats) = ode::integrate(
        &y0,
        0.0,
        pulse.gate_time,
        rhs,
        &ode_opts,
        if opts.record_populations { Some(&mut observer) } else { None },
    )?;

    // truncation error shows up as a slow column-norm drift; record it,
    // reject genuine integrator breakdown, then project back onto the
    // closed-system manifold
    let norm_defect = u_int.max_norm_defect();
    let bound = 1e-6f64.max(opts.rtol * 5e3);
    if norm_defect > bound {
        return Err(PropagateError::UnitarityLoss(norm_defect));
    }
    u_int.renormalize_columns();
    let avg_populations = avg.map(|a| a / pulse.gate_time);
    Ok(Propagation {
        u_int,
        columns: initial_rows.to_vec(),
        avg_populations,
        gate_time: pulse.gate_time,
        stats,
        norm_defect,
    })
}

/// Full propagator in the lab frame of the dressed basis (the interaction
/// picture result re-dressed with free-evolution phases).
pub fn propagate_full(
    frame: &DressedFrame,
    pulse: &PulseSpec,
    opts: &PropagateOptions,
) -> Result<CBlock, PropagateError> {
    let dim = frame.dim();
    let all: Vec<usize> = (0..dim).collect();
    let prop = propagate_columns(frame, pulse, &all, opts)?;
    let mut u = prop.u_int;
    let t = pulse.gate_time;
    let ph: Array1<f64> = frame.energies.mapv(|e| -std::f64::consts::TAU * e * t);
    u.phase_rows(&ph.mapv(f64::cos), &ph.mapv(f64::sin));
    Ok(u)
}

/// Computational-subspace process data extracted from a propagation.
pub struct ProcessResult {
    /// Virtual-Z-corrected computational process matrix (row-major order of
    /// qubit bitstrings 00, 01, 10, 11, ...).
    pub process_matrix: Array2<Complex64>,
    /// 1 - |Tr(U^dag U_target)| / 2^nq against the CZ target on the first two
    /// qubits.
    pub infidelity: f64,
    /// Applied Z angles per qubit.
    pub phase_corrections: Vec<f64>,
    /// Per input state: total population left outside the computational set.
    pub leakage_totals: Vec<f64>,
    /// Per input state: dominant leakage contributions (label, population).
    pub leakage: Vec<Vec<(Vec<usize>, f64)>>,
    /// Time-averaged population per dressed label, averaged over inputs.
    pub avg_population: Option<HashMap<Vec<usize>, f64>>,
}

/// Row indices (within the retained frame) of the computational states.
pub fn computational_rows(
    ds: &DressedSpectrum,
    frame: &DressedFrame,
) -> Result<Vec<usize>, PropagateError> {
    let mut rows = Vec::new();
    for label in ds.computational_labels() {
        let k = ds.eigen_index(&label)?;
        let row = frame
            .row_of_eigen
            .get(&k)
            .copied()
            .ok_or(PropagateError::UnitarityLoss(1.0))?;
        rows.push(row);
    }
    Ok(rows)
}

/// CZ on the first two qubits, identity on any spectator.
pub fn cz_target(nq: usize) -> Array2<Complex64> {
    let dim = 1 << nq;
    let mut t = Array2::from_elem((dim, dim), Complex64::new(0.0, 0.0));
    for b in 0..dim {
        let q1 = (b >> (nq - 1)) & 1;
        let q2 = (b >> (nq - 2)) & 1;
        let sign = if q1 == 1 && q2 == 1 { -1.0 } else { 1.0 };
        t[[b, b]] = Complex64::new(sign, 0.0);
    }
    t
}

/// Gate infidelity 1 - |Tr(U^dag T)| / dim.
pub fn gate_infidelity(u: &Array2<Complex64>, target: &Array2<Complex64>) -> f64 {
    let dim = u.nrows();
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        for j in 0..dim {
            tr += u[[j, i]].conj() * target[[j, i]];
        }
    }
    1.0 - tr.norm() / dim as f64
}

/// Closed-form virtual-Z correction: zero the phases of the |0..0> diagonal
/// and of each single-excitation diagonal entry.
pub fn virtual_z_correct(u: &Array2<Complex64>, nq: usize) -> (Array2<Complex64>, Vec<f64>) {
    let dim = 1usize << nq;
    assert_eq!(u.nrows(), dim);
    let g = u[[0, 0]].arg();
    let mut thetas = Vec::with_capacity(nq);
    for q in 0..nq {
        let b = 1usize << (nq - 1 - q);
        thetas.push(u[[b, b]].arg() - g);
    }
    let mut out = u.clone();
    for row in 0..dim {
        let mut ph = g;
        for (q, th) in thetas.iter().enumerate() {
            if (row >> (nq - 1 - q)) & 1 == 1 {
                ph += *th;
            }
        }
        let f = Complex64::from_polar(1.0, -ph);
        for col in 0..dim {
            out[[row, col]] *= f;
        }
    }
    (out, thetas)
}

/// Extract the computational process matrix from a lab-frame propagator,
/// removing free evolution at the dressed energies and applying the
/// virtual-Z correction.
pub fn process_matrix(
    u_lab: &CBlock,
    ds: &DressedSpectrum,
    frame: &DressedFrame,
    gate_time: f64,
) -> Result<(Array2<Complex64>, Vec<f64>), PropagateError> {
    let rows = computational_rows(ds, frame)?;
    let nq = ds.qubit_count();
    let dim = 1usize << nq;
    assert_eq!(u_lab.cols(), frame.dim(), "full propagator required");
    let mut p = Array2::from_elem((dim, dim), Complex64::new(0.0, 0.0));
    for (a, &ra) in rows.iter().enumerate() {
        let ph = std::f64::consts::TAU * frame.energies[ra] * gate_time;
        let undo = Complex64::from_polar(1.0, ph);
        for (b, &rb) in rows.iter().enumerate() {
            p[[a, b]] = undo * u_lab.get(ra, rb);
        }
    }
    let (corrected, thetas) = virtual_z_correct(&p, nq);
    Ok((corrected, thetas))
}

/// Run the full closed-system pipeline for one pulse: propagate the
/// computational columns, correct, and score against the CZ target.
pub fn simulate_gate(
    ds: &DressedSpectrum,
    frame: &DressedFrame,
    pulse: &PulseSpec,
    opts: &PropagateOptions,
) -> Result<ProcessResult, PropagateError> {
    let rows = computational_rows(ds, frame)?;
    let prop = propagate_columns(frame, pulse, &rows, opts)?;
    let nq = ds.qubit_count();
    let dim = 1usize << nq;

    let mut p = Array2::from_elem((dim, dim), Complex64::new(0.0, 0.0));
    for (a, &ra) in rows.iter().enumerate() {
        for b in 0..dim {
            p[[a, b]] = prop.u_int.get(ra, b);
        }
    }
    let (corrected, thetas) = virtual_z_correct(&p, nq);
    let target = cz_target(nq);
    let infidelity = gate_infidelity(&corrected, &target);

    // leakage per input column
    let comp_rows: std::collections::HashSet<usize> = rows.iter().copied().collect();
    let mut leakage_totals = Vec::with_capacity(dim);
    let mut leakage = Vec::with_capacity(dim);
    for col in 0..dim {
        let mut total = 0.0;
        let mut items: Vec<(Vec<usize>, f64)> = Vec::new();
        for r in 0..frame.dim() {
            if comp_rows.contains(&r) {
                continue;
            }
            let pop = prop.u_int.get(r, col).norm_sqr();
            total += pop;
            if pop > 1e-10 {
                let eigen = frame.retained[r];
                let label = ds
                    .labels
                    .iter()
                    .find(|(_, &k)| k == eigen)
                    .map(|(l, _)| l.clone())
                    .unwrap_or_default();
                items.push((label, pop));
            }
        }
        items.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        items.truncate(8);
        leakage_totals.push(total);
        leakage.push(items);
    }

    let avg_population = prop.avg_populations.as_ref().map(|a| {
        let mut map: HashMap<Vec<usize>, f64> = HashMap::new();
        for r in 0..frame.dim() {
            let eigen = frame.retained[r];
            let label = ds
                .labels
                .iter()
                .find(|(_, &k)| k == eigen)
                .map(|(l, _)| l.clone())
                .unwrap_or_default();
            let mean_over_inputs: f64 =
                (0..dim).map(|c| a[[r, c]]).sum::<f64>() / dim as f64;
            if mean_over_inputs > 1e-12 {
                map.insert(label, mean_over_inputs);
            }
        }
        map
    });

    Ok(ProcessResult {
        process_matrix: corrected,
        infidelity,
        phase_corrections: thetas,
        leakage_totals,
        leakage,
        avg_population,
    })
}

/// First-order decoherence estimate: sum of rate x mean population x time.
///
/// `rates` maps dressed labels to decay rates in kHz; `avg_population` is the
/// input-averaged time-averaged population per label; the result is the
/// dimensionless error accumulated over `gate_time` ns.
pub fn decoherence_error(
    avg_population: &HashMap<Vec<usize>, f64>,
    rates: &HashMap<Vec<usize>, f64>,
    gate_time: f64,
) -> Result<f64, PropagateError> {
    let mut err = 0.0;
    for (label, &pop) in avg_population {
        if let Some(&rate) = rates.get(label) {
            // kHz * ns = 1e-6
            err += rate * pop * gate_time * 1e-6;
        } else {
            // labels with negligible exposure may be omitted from the table
            let max_rate = rates.values().cloned().fold(0.0, f64::max);
            if pop * max_rate * gate_time * 1e-6 > 1e-9 {
                return Err(PropagateError::MissingRate(label.clone(), pop));
            }
        }
    }
    Ok(err)
}

/// Additive per-mode decay-rate table built from the shipped reference rates:
/// fluxonium 4 kHz (1 -> 0) and 22 kHz (2 -> 1), coupler 40 kHz, transmon
/// 25 kHz, scaled harmonically for higher levels; composite labels sum their
/// constituents.
pub fn default_decay_rates(
    ds: &DressedSpectrum,
    mode_kinds: &[crate::circuit::NodeKind],
) -> HashMap<Vec<usize>, f64> {
    let per_level = |kind: &crate::circuit::NodeKind, level: usize| -> f64 {
        use crate::circuit::NodeKind::*;
        match kind {
            Fluxonium { .. } => match level {
                0 => 0.0,
                1 => 4.0,
                2 => 22.0,
                n => 22.0 * (n as f64 - 1.0),
            },
            Coupler { .. } => 40.0 * level as f64,
            Transmon { .. } => 25.0 * level as f64,
        }
    };
    let mut map = HashMap::new();
    let dims = &ds.node_dims;
    let total: usize = dims.iter().product();
    for flat in 0..total {
        let mut rem = flat;
        let mut label = vec![0usize; dims.len()];
        for pos in (0..dims.len()).rev() {
            label[pos] = rem % dims[pos];
            rem /= dims[pos];
        }
        let rate: f64 =
            label.iter().zip(mode_kinds).map(|(&l, k)| per_level(k, l)).sum();
        map.insert(label, rate);
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{self, table_i_circuit};
    use crate::pulse::ToneSpec;
    use crate::quantize;
    use crate::spectrum::dressed_spectrum;

    fn setup() -> (DressedSpectrum, DressedFrame) {
        let spec = table_i_circuit();
        let ec = circuit::reduced_charging_energy(&spec).unwrap();
        let model = quantize::assemble_hamiltonian(&spec, &ec, &[5, 5, 5]).unwrap();
        let ds = dressed_spectrum(&model, &spec, &[]).unwrap();
        let frame = DressedFrame::new(&model, &ds, "c1", None).unwrap();
        (ds, frame)
    }

    fn zero_pulse(gate_time: f64) -> PulseSpec {
        PulseSpec {
            coupler: "c1".into(),
            dc_offset: std::f64::consts::FRAC_PI_2,
            tones: vec![ToneSpec { amplitude: 0.0, frequency: 0.18, ramp_time: 2.0, phase: 0.0 }],
            gate_time,
        }
    }

    #[test]
    fn zero_drive_is_stationary() {
        let (ds, frame) = setup();
        let rows = computational_rows(&ds, &frame).unwrap();
        let prop = propagate_columns(
            &frame,
            &zero_pulse(12.0),
            &rows,
            &PropagateOptions::default(),
        )
        .unwrap();
        // interaction picture: identity on the propagated columns
        for (c, &r) in rows.iter().enumerate() {
            let diag = prop.u_int.get(r, c);
            assert!((diag - Complex64::new(1.0, 0.0)).norm() < 1e-7);
            for rr in 0..frame.dim() {
                if rr != r {
                    assert!(prop.u_int.get(rr, c).norm() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn zero_drive_lab_frame_phases() {
        let (_ds, frame) = setup();
        let u = propagate_full(&frame, &zero_pulse(5.0), &PropagateOptions::default()).unwrap();
        for r in [0usize, 3, 17] {
            let want = Complex64::from_polar(
                1.0,
                -std::f64::consts::TAU * frame.energies[r] * 5.0,
            );
            assert!((u.get(r, r) - want).norm() < 1e-6, "row {r}");
        }
    }

    #[test]
    fn zero_drive_process_is_identity() {
        let (ds, frame) = setup();
        let res = simulate_gate(&ds, &frame, &zero_pulse(10.0), &PropagateOptions::default())
            .unwrap();
        // identity against CZ scores the textbook 0.5
        assert!((res.infidelity - 0.5).abs() < 1e-6);
        for (i, t) in res.leakage_totals.iter().enumerate() {
            assert!(*t < 1e-10, "leakage from input {i}");
        }
        let id: Array2<Complex64> = Array2::eye(4);
        let d = gate_infidelity(&res.process_matrix, &id);
        assert!(d < 1e-7);
    }

    #[test]
    fn infidelity_formula_trivia() {
        let cz = cz_target(2);
        assert_eq!(gate_infidelity(&cz, &cz), 0.0);
        let id: Array2<Complex64> = Array2::eye(4);
        assert!((gate_infidelity(&id, &cz) - 0.5).abs() < 1e-15);
        // global phase invariance
        let ph = Complex64::from_polar(1.0, 1.234);
        let rotated = cz.mapv(|v| v * ph);
        assert!(gate_infidelity(&rotated, &cz) < 1e-15);
    }

    #[test]
    fn virtual_z_idempotent() {
        let mut u = cz_target(2);
        // dress the diagonal with single-qubit phases and a global phase
        let (g, t1, t2) = (0.3, 0.7, -0.4);
        for row in 0..4 {
            let q1 = (row >> 1) & 1;
            let q2 = row & 1;
            let ph = g + q1 as f64 * t1 + q2 as f64 * t2;
            u[[row, row]] *= Complex64::from_polar(1.0, ph);
        }
        let (once, th) = virtual_z_correct(&u, 2);
        assert!((th[0] - t1).abs() < 1e-12 && (th[1] - t2).abs() < 1e-12);
        let (twice, th2) = virtual_z_correct(&once, 2);
        assert!(th2.iter().all(|t| t.abs() < 1e-12));
        for i in 0..4 {
            for j in 0..4 {
                assert!((once[[i, j]] - twice[[i, j]]).norm() < 1e-12);
            }
        }
        assert!(gate_infidelity(&once, &cz_target(2)) < 1e-12);
    }

    #[test]
    fn populations_preserved_under_drive() {
        let (ds, frame) = setup();
        let pulse = PulseSpec {
            coupler: "c1".into(),
            dc_offset: std::f64::consts::FRAC_PI_2,
            tones: vec![ToneSpec {
                amplitude: 0.15,
                frequency: 0.183,
                ramp_time: 3.0,
                phase: 0.0,
            }],
            gate_time: 20.0,
        };
        let rows = computational_rows(&ds, &frame).unwrap();
        let prop = propagate_columns(
            &frame,
            &pulse,
            &rows,
            &PropagateOptions { rtol: 1e-9, record_populations: true },
        )
        .unwrap();
        assert!(prop.norm_defect < 1e-6, "norm defect {}", prop.norm_defect);
        // column sums of |psi|^2 equal 1 (captured by norm defect) and the
        // averaged populations are a valid distribution
        let avg = prop.avg_populations.unwrap();
        for c in 0..rows.len() {
            let s: f64 = (0..frame.dim()).map(|r| avg[[r, c]]).sum();
            assert!((s - 1.0).abs() < 1e-6, "column {c} sums to {s}");
        }
    }

    #[test]
    fn decoherence_arithmetic() {
        let mut pops = HashMap::new();
        pops.insert(vec![2usize, 0, 0], 0.5);
        let mut rates = HashMap::new();
        rates.insert(vec![2usize, 0, 0], 22.0);
        let e = decoherence_error(&pops, &rates, 40.0).unwrap();
        assert!((e - 4.4e-4).abs() < 1e-12);
        // empty population map costs nothing
        let e0 = decoherence_error(&HashMap::new(), &rates, 40.0).unwrap();
        assert_eq!(e0, 0.0);
        // populated label without a rate errors
        pops.insert(vec![1usize, 1, 0], 0.2);
        assert!(matches!(
            decoherence_error(&pops, &rates, 40.0),
            Err(PropagateError::MissingRate(..))
        ));
    }

    #[test]
    fn truncated_frame_matches_full_for_low_states() {
        let (ds, frame) = setup();
        let spec = table_i_circuit();
        let ec = circuit::reduced_charging_energy(&spec).unwrap();
        let model = quantize::assemble_hamiltonian(&spec, &ec, &[5, 5, 5]).unwrap();
        let frame_trunc = DressedFrame::new(&model, &ds, "c1", Some(110)).unwrap();
        let pulse = PulseSpec {
            coupler: "c1".into(),
            dc_offset: std::f64::consts::FRAC_PI_2,
            tones: vec![ToneSpec {
                amplitude: 0.12,
                frequency: 0.184,
                ramp_time: 3.0,
                phase: 0.0,
            }],
            gate_time: 25.0,
        };
        let ra = computational_rows(&ds, &frame).unwrap();
        let rb = computational_rows(&ds, &frame_trunc).unwrap();
        let opts = PropagateOptions::default();
        let pa = propagate_columns(&frame, &pulse, &ra, &opts).unwrap();
        let pb = propagate_columns(&frame_trunc, &pulse, &rb, &opts).unwrap();
        for (c, (&r_full, &r_tr)) in ra.iter().zip(&rb).enumerate() {
            let d = (pa.u_int.get(r_full, c) - pb.u_int.get(r_tr, c)).norm();
            assert!(d < 1e-5, "column {c} differs by {d}");
        }
    }
}

/// Populations of every retained state along one input column, decimated to
/// at most `max_samples` time points. Returns (time, populations) pairs.
pub fn trajectory(
    frame: &DressedFrame,
    pulse: &PulseSpec,
    initial_row: usize,
    opts: &PropagateOptions,
    max_samples: usize,
) -> Result<Vec<(f64, Vec<f64>)>, PropagateError> {
    let mut samples: Vec<(f64, Vec<f64>)> = Vec::new();
    let stride = (pulse.gate_time / max_samples.max(2) as f64).max(1e-6);
    let mut next_t = 0.0f64;
    {
        let dim = frame.dim();
        let y0 = CBlock::basis_columns(dim, &[initial_row]);
        let two_pi = std::f64::consts::TAU;
        let energies = frame.energies.clone();
        let pulse_cl = pulse.clone();
        let mut m = Array2::<f64>::zeros((dim, dim));
        let mut cos_p = Array1::<f64>::zeros(dim);
        let mut sin_p = Array1::<f64>::zeros(dim);
        let cos_t = &frame.cos_tilde;
        let sin_t = &frame.sin_tilde;
        let frame_ref = frame;
        let rhs = move |t: f64, y: &CBlock| -> CBlock {
            let flux = crate::pulse::flux_waveform(&pulse_cl, t);
            let (dc, dsn) = frame_ref.delta_coefficients(flux);
            m.assign(cos_t);
            m.mapv_inplace(|v| v * dc);
            m.scaled_add(dsn, sin_t);
            for r in 0..dim {
                let ph = two_pi * energies[r] * t;
                cos_p[r] = ph.cos();
                sin_p[r] = ph.sin();
            }
            let mut u = y.clone();
            let neg_sin: Array1<f64> = sin_p.mapv(|v| -v);
            u.phase_rows(&cos_p, &neg_sin);
            let mut w = u.apply_real(&m);
            w.phase_rows(&cos_p, &sin_p);
            let re = w.im.mapv(|v| two_pi * v);
            let im = w.re.mapv(|v| -two_pi * v);
            CBlock { re, im }
        };
        let fmax = pulse.tones.iter().map(|t| t.frequency).fold(0.1, f64::max);
        let ode_opts = OdeOptions {
            rtol: opts.rtol,
            atol: opts.rtol * 1e-2,
            h_init: 1e-3,
            h_max: 0.02 / fmax,
            ..Default::default()
        };
        let mut obs = |t: f64, _h: f64, y: &CBlock| {
            if t >= next_t || t >= pulse.gate_time {
                let pops: Vec<f64> =
                    (0..dim).map(|r| y.get(r, 0).norm_sqr()).collect();
                samples.push((t, pops));
                next_t = t + stride;
            }
        };
        ode::integrate(&y0, 0.0, pulse.gate_time, rhs, &ode_opts, Some(&mut obs))?;
    }
    Ok(samples)
}
