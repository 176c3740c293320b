//! Analytic parametric-gate theory: Jacobi-Anger drive coefficients, the
//! three-level {|101>, |110>, |200>} model, rotated-frame effective
//! Hamiltonians, and closed-form drive frequency and gate time.

use ndarray::Array2;
use num_complex::Complex64;

use crate::cmat::CBlock;
use crate::ode::{self, OdeOptions};
use crate::quantize::HamiltonianModel;
use crate::special::{bessel_j0, bessel_j2};
use crate::spectrum::DressedSpectrum;

/// Rotation integers of the resonant frame for (|101>, |110>, |200>).
pub const ROTATION_INDICES: [i32; 3] = [2, -1, 0];

#[derive(Debug, thiserror::Error)]
pub enum DriveError {
    #[error("modulation amplitude {0} rad outside the expansion domain [0, 1.5]")]
    ExpansionDomain(f64),
    #[error("junction energies must satisfy E_J_sum >= E_J_diff > 0")]
    BadJunctions,
    #[error("discriminant negative: parameters outside the gate regime")]
    NegativeDiscriminant,
    #[error("effective exchange coupling vanishes")]
    ZeroCoupling,
    #[error("perturbative denominator below 1e-3 GHz")]
    DegenerateDenominator,
    #[error("no population resonance found in the bracket")]
    NoResonanceInBracket,
    #[error("circuit does not contain the expected fluxonium-coupler-transmon chain")]
    WrongTopology,
    #[error(transparent)]
    Spectrum(#[from] crate::spectrum::SpectrumError),
    #[error(transparent)]
    Ode(#[from] ode::OdeError),
}

/// Fourier coefficients of the modulated SQUID envelope: the drive term of the
/// three-level model is A (alpha + beta cos(2 w_D t)).
#[derive(Debug, Clone, Copy)]
pub struct DriveCoefficients {
    pub alpha: f64,
    pub beta: f64,
    /// Junction asymmetry d = E_J_diff / E_J_sum.
    pub d: f64,
    pub phi_ac: f64,
}

/// Closed-form alpha and beta from the Jacobi-Anger expansion of
/// E_Jsum sqrt(cos^2 + d^2 sin^2) about the lower sweet spot.
pub fn jacobi_anger_coefficients(
    e_j_sum: f64,
    e_j_diff: f64,
    phi_ac: f64,
) -> Result<DriveCoefficients, DriveError> {
    if !(e_j_sum >= e_j_diff && e_j_diff > 0.0) {
        return Err(DriveError::BadJunctions);
    }
    if !(0.0..=1.5).contains(&phi_ac) {
        return Err(DriveError::ExpansionDomain(phi_ac));
    }
    let d = e_j_diff / e_j_sum;
    let j0 = bessel_j0(phi_ac);
    let j2 = bessel_j2(phi_ac);
    let root = (1.0 + (d * d - 1.0) * j0 * j0).sqrt();
    let alpha = e_j_sum * root - e_j_diff;
    let beta = e_j_sum * 2.0 * (1.0 - d * d) * j0 * j2 / root;
    Ok(DriveCoefficients { alpha, beta, d, phi_ac })
}

/// The {|101>, |110>, |200>} reduction of the full model.
#[derive(Debug, Clone)]
pub struct ThreeLevelModel {
    /// Dressed drive-off energies (E_101, E_110, E_200), GHz rel. to ground.
    pub energies: [f64; 3],
    /// Drive-coupling matrix in the ordered basis, referenced to the dressed
    /// ground state's cosine expectation (paper sign convention: the bare
    /// mediating state carries +zpf^2(1 - zpf^2/2) on the diagonal).
    pub a_matrix: Array2<f64>,
    pub zpf_phase: f64,
    /// Cosine expectation of the dressed ground state (the reference scalar).
    pub cos_reference: f64,
    /// Bare product-state energies (E0_101, E0_110, E0_200).
    pub bare_energies: [f64; 3],
    /// Static couplings g_101-110, g_110-200, g_101-200 between bare states.
    pub couplings: [f64; 3],
}

/// Drive-coupling matrix from the dressed eigenvectors of the full model:
/// A_ij = <ground|cos phi_c|ground> delta_ij - <i|cos phi_c|j>.
pub fn numerical_a_matrix(
    model: &HamiltonianModel,
    ds: &DressedSpectrum,
) -> Result<ThreeLevelModel, DriveError> {
    let (fpos, cpos, tpos) = chain_positions(model)?;
    let coupler = model.basis_order[cpos].clone();
    let drive = model.drive(&coupler).ok_or(DriveError::WrongTopology)?;

    let mut label = vec![0usize; model.node_dims.len()];
    let mk = |f: usize, c: usize, t: usize, label: &mut Vec<usize>| {
        label.iter_mut().for_each(|x| *x = 0);
        label[fpos] = f;
        label[cpos] = c;
        label[tpos] = t;
        label.clone()
    };
    let l101 = mk(1, 0, 1, &mut label);
    let l110 = mk(1, 1, 0, &mut label);
    let l200 = mk(2, 0, 0, &mut label);
    let ground = vec![0usize; model.node_dims.len()];

    let k101 = ds.eigen_index(&l101)?;
    let k110 = ds.eigen_index(&l110)?;
    let k200 = ds.eigen_index(&l200)?;
    let kg = ds.eigen_index(&ground)?;

    let dim = model.dim();
    let elem = |ka: usize, kb: usize| -> f64 {
        let mut acc = 0.0;
        for i in 0..dim {
            let vi = ds.vectors[[i, ka]];
            if vi == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for j in 0..dim {
                row += drive.cos_op[[i, j]] * ds.vectors[[j, kb]];
            }
            acc += vi * row;
        }
        acc
    };
    let c0 = elem(kg, kg);
    let ks = [k101, k110, k200];
    let mut a = Array2::<f64>::zeros((3, 3));
    for i in 0..3 {
        for j in i..3 {
            let raw = elem(ks[i], ks[j]);
            let v = if i == j { c0 - raw } else { -raw };
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }

    let energies =
        [ds.energy(&l101)?, ds.energy(&l110)?, ds.energy(&l200)?];
    let (i101, i110, i200) =
        (model.bare_index(&l101), model.bare_index(&l110), model.bare_index(&l200));
    let ig = model.bare_index(&ground);
    let h = &model.static_matrix;
    let bare = [
        h[[i101, i101]] - h[[ig, ig]],
        h[[i110, i110]] - h[[ig, ig]],
        h[[i200, i200]] - h[[ig, ig]],
    ];
    let couplings = [h[[i101, i110]], h[[i110, i200]], h[[i101, i200]]];

    let zpf = model.locals[cpos].zpf_phase;
    Ok(ThreeLevelModel {
        energies,
        a_matrix: a,
        zpf_phase: zpf,
        cos_reference: c0,
        bare_energies: bare,
        couplings,
    })
}

fn chain_positions(model: &HamiltonianModel) -> Result<(usize, usize, usize), DriveError> {
    // fluxonium - coupler - transmon chain in basis order
    if model.basis_order.len() != 3 || model.drives.len() != 1 {
        return Err(DriveError::WrongTopology);
    }
    let cpos = model
        .basis_order
        .iter()
        .position(|n| model.drive(n).is_some())
        .ok_or(DriveError::WrongTopology)?;
    if cpos != 1 {
        return Err(DriveError::WrongTopology);
    }
    Ok((0, 1, 2))
}

/// The six closed-form perturbative entries of the drive-coupling matrix.
///
/// `bare` are the unperturbed energies (E0_101, E0_110, E0_200) and
/// `couplings` the static matrix elements (g_101-110, g_110-200, g_101-200).
pub fn perturbative_a_matrix(
    bare: [f64; 3],
    couplings: [f64; 3],
    zpf_phase: f64,
) -> Result<Array2<f64>, DriveError> {
    let (e101, e110, e200) = (bare[0], bare[1], bare[2]);
    let (g_ab, g_bc, g_ac) = (couplings[0], couplings[1], couplings[2]);
    let d1 = e101 - e110;
    let d2 = e101 - e200;
    let d3 = e200 - e110;
    for d in [d1, d2, d3] {
        if d.abs() < 1e-3 {
            return Err(DriveError::DegenerateDenominator);
        }
    }
    let r1sq = (g_ab / d1).powi(2);
    let r2sq = (g_ac / d2).powi(2);
    let r3sq = (g_bc / d3).powi(2);
    let n101 = 1.0 + r1sq + r2sq;
    let n110 = 1.0 + r1sq + (g_bc / (e110 - e200)).powi(2);
    let n200 = 1.0 + r3sq + r2sq;
    let pref = zpf_phase.powi(2) * (1.0 - zpf_phase.powi(2) / 2.0);
    let mut a = Array2::<f64>::zeros((3, 3));
    a[[0, 0]] = pref * r1sq / n101;
    a[[1, 1]] = pref / n110;
    a[[2, 2]] = pref * r3sq / n200;
    a[[0, 1]] = pref * r1sq / (n101.sqrt() * n110.sqrt());
    a[[1, 2]] = pref * r3sq / (n200.sqrt() * n110.sqrt());
    // final widetext entry, structurally the 101-200 element
    a[[0, 2]] = pref * (g_ab / d1) * (g_bc / d3) / (n101.sqrt() * n200.sqrt());
    a[[1, 0]] = a[[0, 1]];
    a[[2, 1]] = a[[1, 2]];
    a[[2, 0]] = a[[0, 2]];
    Ok(a)
}

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn commutator(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    a.dot(b) - b.dot(a)
}

fn dagger(a: &Array2<Complex64>) -> Array2<Complex64> {
    let (n, m) = a.dim();
    Array2::from_shape_fn((m, n), |(i, j)| a[[j, i]].conj())
}

/// Fourier components H^(j) of the rotated three-level Hamiltonian, j >= 0.
/// Negative components follow from H^(-j) = (H^(j))^dagger.
fn fourier_components(
    m: &ThreeLevelModel,
    dc: &DriveCoefficients,
    omega_d: f64,
    jmax: usize,
) -> Vec<Array2<Complex64>> {
    let k = ROTATION_INDICES;
    let mut comps = vec![Array2::from_elem((3, 3), czero()); jmax + 1];
    for l in 0..3 {
        for mm in 0..3 {
            let dk = k[l] - k[mm];
            let a_lm = m.a_matrix[[l, mm]];
            // static diagonal and Stark term at harmonic dk (0 on diagonal)
            let statics = if l == mm {
                m.energies[l] + dc.alpha * a_lm - k[l] as f64 * omega_d
            } else {
                dc.alpha * a_lm
            };
            for (j, val) in [
                (dk, statics),
                (dk + 2, dc.beta * a_lm / 2.0),
                (dk - 2, dc.beta * a_lm / 2.0),
            ] {
                if val == 0.0 {
                    continue;
                }
                if j >= 0 && (j as usize) <= jmax {
                    comps[j as usize][[l, mm]] += Complex64::new(val, 0.0);
                }
                // negative harmonics are recovered via the dagger relation,
                // so only store j >= 0 here
            }
        }
    }
    comps
}

/// Effective Hamiltonian of the rotated frame to the requested order in
/// 1/omega_D (all quantities in GHz; the 2 pi factors cancel order by order).
pub fn effective_hamiltonian(
    m: &ThreeLevelModel,
    dc: &DriveCoefficients,
    omega_d: f64,
    order: u8,
) -> Array2<Complex64> {
    let jmax = 5;
    let comps = fourier_components(m, dc, omega_d, jmax);
    let mut h_eff = comps[0].clone();
    for j in 1..=jmax {
        let hj = &comps[j];
        let hmj = dagger(hj);
        let c = commutator(hj, &hmj);
        h_eff = h_eff + c.mapv(|v| v / (omega_d * j as f64));
    }
    if order >= 2 {
        for j in 1..=jmax {
            let hj = &comps[j];
            let hmj = dagger(hj);
            let inner = commutator(hj, &comps[0]);
            let outer = commutator(&inner, &hmj);
            let outer_hc = dagger(&outer);
            // one half on the symmetrized double commutator (the standard
            // high-frequency-expansion normalization)
            let w = 0.5 / (omega_d * omega_d * (j * j) as f64);
            h_eff = h_eff + (outer + outer_hc).mapv(|v| v * w);
        }
    }
    h_eff
}

/// First-order kick-operator amplitude, stored for diagnostics.
pub fn kick_amplitude(m: &ThreeLevelModel, dc: &DriveCoefficients, omega_d: f64) -> f64 {
    let comps = fourier_components(m, dc, omega_d, 5);
    let mut worst = 0.0f64;
    for (j, hj) in comps.iter().enumerate().skip(1) {
        for v in hj.iter() {
            worst = worst.max(v.norm() / (omega_d * j as f64));
        }
    }
    worst
}

/// Bundled analytic gate prediction.
#[derive(Debug, Clone)]
pub struct EffectiveGate {
    /// Drive frequency satisfying the resonance condition, GHz.
    pub omega_d: f64,
    /// Effective 101-200 exchange element, GHz.
    pub g_eff: f64,
    /// Full-oscillation gate time, ns (pi over the angular exchange).
    pub t_gate: f64,
    /// Effective Hamiltonian at the resonance, GHz.
    pub h_eff: ndarray::Array2<Complex64>,
    /// First-order kick-operator amplitude (diagnostic).
    pub kick_amplitude: f64,
    /// Rotation integers of the resonant frame.
    pub rotation_indices: [i32; 3],
}

/// Analytic gate summary at the requested expansion order.
pub fn effective_gate(
    m: &ThreeLevelModel,
    dc: &DriveCoefficients,
    order: u8,
) -> Result<EffectiveGate, DriveError> {
    let omega_d = if order >= 2 {
        analytic_drive_frequency_order2(m, dc)?
    } else {
        analytic_drive_frequency(m, dc)?
    };
    let h_eff = effective_hamiltonian(m, dc, omega_d, order);
    let g_eff =
        if order >= 2 { h_eff[[0, 2]].norm() } else { analytic_exchange(m, dc, omega_d).abs() };
    if g_eff == 0.0 {
        return Err(DriveError::ZeroCoupling);
    }
    Ok(EffectiveGate {
        omega_d,
        g_eff,
        t_gate: 1.0 / (2.0 * g_eff),
        h_eff,
        kick_amplitude: kick_amplitude(m, dc, omega_d),
        rotation_indices: ROTATION_INDICES,
    })
}

/// Closed-form first-order resonance frequency (GHz).
pub fn analytic_drive_frequency(
    m: &ThreeLevelModel,
    dc: &DriveCoefficients,
) -> Result<f64, DriveError> {
    let a = &m.a_matrix;
    let (al, be) = (dc.alpha, dc.beta);
    if al == 0.0 {
        return Err(DriveError::ZeroCoupling);
    }
    let x = (m.energies[2] - m.energies[0]) / al + a[[2, 2]] - a[[0, 0]];
    let s = (9.0 * be * be + 10.0 * al * al) / (30.0 * al * al) * a[[0, 1]].powi(2)
        + (be * be + 8.0 * al * al) / (8.0 * al * al) * a[[0, 2]].powi(2)
        + (be * be - 6.0 * al * al) / (6.0 * al * al) * a[[1, 2]].powi(2);
    let disc = x * x + 8.0 * s;
    if disc < 0.0 {
        return Err(DriveError::NegativeDiscriminant);
    }
    Ok(-al / 4.0 * (x - disc.sqrt()))
}

/// Second-order resonance: solve H_eff[0,0] = H_eff[2,2] with the order-2
/// effective Hamiltonian, seeded by the first-order closed form.
pub fn analytic_drive_frequency_order2(
    m: &ThreeLevelModel,
    dc: &DriveCoefficients,
) -> Result<f64, DriveError> {
    let w1 = analytic_drive_frequency(m, dc)?;
    let f = |w: f64| {
        let h = effective_hamiltonian(m, dc, w, 2);
        h[[0, 0]].re - h[[2, 2]].re
    };
    // the resonance condition is monotone in omega near the first-order root
    let (mut lo, mut hi) = (w1 * 0.9, w1 * 1.1);
    let (mut flo, mut fhi) = (f(lo), f(hi));
    let mut grow = 0;
    while flo.signum() == fhi.signum() && grow < 8 {
        lo *= 0.95;
        hi *= 1.05;
        flo = f(lo);
        fhi = f(hi);
        grow += 1;
    }
    if flo.signum() == fhi.signum() {
        return Err(DriveError::NoResonanceInBracket);
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() < 1e-12 || (hi - lo) < 1e-12 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The printed closed-form effective exchange element (GHz).
pub fn analytic_exchange(m: &ThreeLevelModel, dc: &DriveCoefficients, omega_d: f64) -> f64 {
    let a = &m.a_matrix;
    let (al, be) = (dc.alpha, dc.beta);
    2.0 * al * be / (3.0 * omega_d) * a[[0, 1]] * a[[1, 2]]
        + (0.5 + al * (a[[2, 2]] - a[[0, 0]]) / (4.0 * omega_d)) * be * a[[0, 2]]
}

/// Analytic full-oscillation gate time t = pi/|g_eff| (angular), i.e.
/// 1/(2 |g_eff|) ns with g_eff in GHz.
pub fn analytic_gate_time(
    m: &ThreeLevelModel,
    dc: &DriveCoefficients,
    omega_d: f64,
) -> Result<f64, DriveError> {
    if dc.beta == 0.0 {
        return Err(DriveError::ZeroCoupling);
    }
    let g = analytic_exchange(m, dc, omega_d);
    if g == 0.0 {
        return Err(DriveError::ZeroCoupling);
    }
    Ok(1.0 / (2.0 * g.abs()))
}

/// Gate time from the order-2 effective Hamiltonian's 101-200 element at the
/// order-2 resonance.
pub fn analytic_gate_time_order2(
    m: &ThreeLevelModel,
    dc: &DriveCoefficients,
) -> Result<f64, DriveError> {
    let w2 = analytic_drive_frequency_order2(m, dc)?;
    let h = effective_hamiltonian(m, dc, w2, 2);
    let g = h[[0, 2]].norm();
    if g == 0.0 {
        return Err(DriveError::ZeroCoupling);
    }
    Ok(1.0 / (2.0 * g))
}

/// Propagate the driven three-level model from |101> and record the |200>
/// population at dense times. Returns (times, p200).
pub fn three_level_population(
    m: &ThreeLevelModel,
    dc: &DriveCoefficients,
    omega_d: f64,
    t_final: f64,
    rtol: f64,
) -> Result<(Vec<f64>, Vec<f64>), DriveError> {
    let diag = m.energies;
    let a = m.a_matrix.clone();
    let (al, be) = (dc.alpha, dc.beta);
    let two_pi = std::f64::consts::TAU;
    let rhs = move |t: f64, y: &CBlock| -> CBlock {
        let lam = al + be * (2.0 * two_pi * omega_d * t).cos();
        let mut out = CBlock::zeros(3, 1);
        for i in 0..3 {
            let mut re = diag[i] * y.re[[i, 0]];
            let mut im = diag[i] * y.im[[i, 0]];
            for j in 0..3 {
                re += lam * a[[i, j]] * y.re[[j, 0]];
                im += lam * a[[i, j]] * y.im[[j, 0]];
            }
            // i dpsi/dt = 2pi H psi  ->  dpsi/dt = -2pi i H psi
            out.re[[i, 0]] = two_pi * im;
            out.im[[i, 0]] = -two_pi * re;
        }
        out
    };
    let y0 = CBlock::basis_columns(3, &[0]);
    let opts = OdeOptions {
        rtol,
        atol: rtol * 1e-2,
        h_init: 1e-3,
        h_max: (0.05 / omega_d).min(t_final / 50.0),
        ..Default::default()
    };
    let mut times = Vec::new();
    let mut pops = Vec::new();
    let mut obs = |t: f64, _h: f64, y: &CBlock| {
        times.push(t);
        pops.push(y.re[[2, 0]].powi(2) + y.im[[2, 0]].powi(2));
    };
    ode::integrate(&y0, 0.0, t_final, rhs, &opts, Some(&mut obs))?;
    Ok((times, pops))
}

/// Peak |<200|U(t)|101>|^2 over a window of roughly one full oscillation.
pub fn peak_transfer(
    m: &ThreeLevelModel,
    dc: &DriveCoefficients,
    omega_d: f64,
    t_window: f64,
) -> Result<f64, DriveError> {
    let (_, pops) = three_level_population(m, dc, omega_d, t_window, 1e-10)?;
    Ok(pops.iter().cloned().fold(0.0, f64::max))
}

/// Numerically optimal drive frequency: golden-section maximization of the
/// peak 101 -> 200 transfer under direct propagation of the three-level model.
pub fn optimize_three_level_frequency(
    m: &ThreeLevelModel,
    dc: &DriveCoefficients,
    bracket: (f64, f64),
) -> Result<f64, DriveError> {
    let w_guess = 0.5 * (bracket.0 + bracket.1);
    let t_est = analytic_gate_time(m, dc, w_guess)?;
    let window = 1.25 * t_est;
    let f = |w: f64| peak_transfer(m, dc, w, window);
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = bracket;
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d)?;
        }
        if (b - a).abs() < 1e-6 {
            break;
        }
    }
    let w_opt = 0.5 * (a + b);
    if f(w_opt)? < 0.5 {
        return Err(DriveError::NoResonanceInBracket);
    }
    Ok(w_opt)
}

/// Time of a full 101 -> 200 -> 101 oscillation at drive frequency `omega_d`:
/// twice the first population-transfer peak.
pub fn full_oscillation_time(
    m: &ThreeLevelModel,
    dc: &DriveCoefficients,
    omega_d: f64,
    t_window: f64,
) -> Result<f64, DriveError> {
    let (times, pops) = three_level_population(m, dc, omega_d, t_window, 1e-10)?;
    // locate the first envelope maximum: global peak height, then the first
    // time the population enters its neighborhood (micromotion ripples on the
    // rising slope must not trigger the detector)
    let p_max = pops.iter().cloned().fold(0.0, f64::max);
    if p_max < 0.5 {
        return Err(DriveError::NoResonanceInBracket);
    }
    let thresh = 0.995 * p_max;
    let mut enter = None;
    for (i, &p) in pops.iter().enumerate() {
        if p >= thresh {
            enter = Some(i);
            break;
        }
    }
    let i0 = enter.ok_or(DriveError::NoResonanceInBracket)?;
    // first local max at or after the entry point
    let mut i = i0;
    while i + 1 < pops.len() && pops[i + 1] >= pops[i] {
        i += 1;
    }
    let t_peak = if i > 0 && i + 1 < pops.len() {
        let (t0, t1, t2) = (times[i - 1], times[i], times[i + 1]);
        let (p0, p1, p2) = (pops[i - 1], pops[i], pops[i + 1]);
        let denom = (t1 - t0) * (p1 - p2) - (t1 - t2) * (p1 - p0);
        if denom.abs() > 1e-300 {
            t1 - 0.5 * ((t1 - t0).powi(2) * (p1 - p2) - (t1 - t2).powi(2) * (p1 - p0)) / denom
        } else {
            t1
        }
    } else {
        times[i]
    };
    Ok(2.0 * t_peak)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{self, table_i_circuit};
    use crate::quantize;
    use crate::spectrum::dressed_spectrum;

    fn table_i_three_level() -> (ThreeLevelModel, f64, f64) {
        let spec = table_i_circuit();
        let ec = circuit::reduced_charging_energy(&spec).unwrap();
        let model = quantize::assemble_hamiltonian(&spec, &ec, &[5, 5, 5]).unwrap();
        let ds = dressed_spectrum(&model, &spec, &[]).unwrap();
        let m = numerical_a_matrix(&model, &ds).unwrap();
        (m, 12.822 + 7.5, 12.822 - 7.5)
    }

    #[test]
    fn jacobi_anger_trivial_limits() {
        // no modulation -> no drive
        let dc = jacobi_anger_coefficients(20.322, 5.322, 0.0).unwrap();
        assert!(dc.alpha.abs() < 1e-14);
        assert!(dc.beta.abs() < 1e-14);
        // d = 1: alpha = E_sum - E_diff, beta = 0 for any amplitude
        let dc = jacobi_anger_coefficients(7.0, 7.0, 0.8).unwrap();
        assert!((dc.alpha - 0.0).abs() < 1e-12);
        assert!(dc.beta.abs() < 1e-14);
        assert!(matches!(
            jacobi_anger_coefficients(20.0, 5.0, 1.7),
            Err(DriveError::ExpansionDomain(_))
        ));
    }

    #[test]
    fn jacobi_anger_even_in_amplitude() {
        // closed forms depend on phi_AC only through even Bessel functions
        let a = jacobi_anger_coefficients(20.322, 5.322, 0.25).unwrap();
        let j0 = bessel_j0(-0.25);
        let j2 = bessel_j2(-0.25);
        let d = a.d;
        let root = (1.0 + (d * d - 1.0) * j0 * j0).sqrt();
        assert!((20.322 * root - 5.322 - a.alpha).abs() < 1e-14);
        assert!((20.322 * 2.0 * (1.0 - d * d) * j0 * j2 / root - a.beta).abs() < 1e-14);
    }

    #[test]
    fn jacobi_anger_matches_fourier_oracle_weak_drive() {
        // dense numerical Fourier decomposition of the exact envelope
        let (ejs, ejd) = (20.322f64, 5.322f64);
        let d = ejd / ejs;
        for (phi_ac, tol_a, tol_b) in [(0.05, 3e-4, 1e-4), (0.3, 8e-2, 2e-2)] {
            let n = 20000;
            let mut a_num = 0.0;
            let mut b_num = 0.0;
            for i in 0..n {
                let th = std::f64::consts::TAU * i as f64 / n as f64;
                let phi = std::f64::consts::FRAC_PI_2 + phi_ac * th.cos();
                let env = ejs * (phi.cos().powi(2) + d * d * phi.sin().powi(2)).sqrt();
                a_num += env;
                b_num += env * (2.0 * th).cos();
            }
            a_num = a_num / n as f64 - ejd;
            b_num = 2.0 * b_num / n as f64;
            let dc = jacobi_anger_coefficients(ejs, ejd, phi_ac).unwrap();
            assert!(
                (dc.alpha - a_num).abs() < tol_a,
                "phi_ac={phi_ac}: alpha {} vs {}",
                dc.alpha,
                a_num
            );
            assert!(
                (dc.beta - b_num).abs() < tol_b,
                "phi_ac={phi_ac}: beta {} vs {}",
                dc.beta,
                b_num
            );
        }
    }

    #[test]
    fn numerical_a_symmetric_and_referenced() {
        let (m, _, _) = table_i_three_level();
        for i in 0..3 {
            for j in 0..3 {
                assert!((m.a_matrix[[i, j]] - m.a_matrix[[j, i]]).abs() < 1e-10);
            }
        }
        // mediating-state diagonal dominates and is positive in this gauge
        assert!(m.a_matrix[[1, 1]] > 0.0);
        assert!(m.a_matrix[[1, 1]] > m.a_matrix[[0, 0]].abs());
        assert!(m.a_matrix[[1, 1]] > m.a_matrix[[2, 2]].abs());
        // all matrix elements bounded by 1
        for v in m.a_matrix.iter() {
            assert!(v.abs() <= 1.0);
        }
    }

    #[test]
    fn zero_coupling_a_matrix_limits() {
        let mut spec = table_i_circuit();
        for c in &mut spec.couplings {
            c.capacitance = 1e-9;
        }
        let ec = circuit::reduced_charging_energy(&spec).unwrap();
        let model = quantize::assemble_hamiltonian(&spec, &ec, &[5, 5, 5]).unwrap();
        let ds = dressed_spectrum(&model, &spec, &[]).unwrap();
        let m = numerical_a_matrix(&model, &ds).unwrap();
        // product states: off-diagonals vanish, diagonals reduce to the bare
        // coupler cosine differences (0 for coupler-ground states)
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!(m.a_matrix[[i, j]].abs() < 1e-8);
        }
        assert!(m.a_matrix[[0, 0]].abs() < 1e-8);
        assert!(m.a_matrix[[2, 2]].abs() < 1e-8);
        let z = m.zpf_phase;
        let expect = z * z * (1.0 - z * z / 2.0);
        assert!(
            (m.a_matrix[[1, 1]] - expect).abs() < 0.35 * expect,
            "A11 = {}, zpf model {}",
            m.a_matrix[[1, 1]],
            expect
        );
    }

    #[test]
    fn perturbative_a_trivial_cases() {
        // all couplings zero: only the mediating state carries weight
        let z: f64 = 0.4;
        let a = perturbative_a_matrix([4.7, 2.3, 4.3], [0.0, 0.0, 0.0], z).unwrap();
        let pref = z * z * (1.0 - z * z / 2.0);
        assert!((a[[1, 1]] - pref).abs() < 1e-14);
        for (i, j) in [(0, 0), (2, 2), (0, 1), (0, 2), (1, 2)] {
            assert!(a[[i, j]].abs() < 1e-14);
        }
        // zpf -> 0 kills everything
        let a = perturbative_a_matrix([4.7, 2.3, 4.3], [0.1, 0.1, 0.01], 0.0).unwrap();
        for v in a.iter() {
            assert!(v.abs() < 1e-14);
        }
        assert!(matches!(
            perturbative_a_matrix([4.7, 4.7, 4.3], [0.1, 0.1, 0.01], 0.4),
            Err(DriveError::DegenerateDenominator)
        ));
    }

    #[test]
    fn perturbative_matches_numerical_cross_element() {
        // the 101-200 entry of both routes agrees at leading order in g
        let (m, _, _) = table_i_three_level();
        let pert = perturbative_a_matrix(m.bare_energies, m.couplings, m.zpf_phase).unwrap();
        let num = &m.a_matrix;
        let rel = (pert[[0, 2]] - num[[0, 2]]).abs() / num[[0, 2]].abs();
        assert!(rel < 0.35, "A02 pert {} vs num {}", pert[[0, 2]], num[[0, 2]]);
        assert!(pert[[0, 2]].signum() == num[[0, 2]].signum());
        // diagonal structure agrees: mediating state dominates
        assert!(pert[[1, 1]] > pert[[0, 0]] && pert[[1, 1]] > pert[[2, 2]]);
    }

    #[test]
    fn effective_hamiltonian_hermitian() {
        let (m, ejs, ejd) = table_i_three_level();
        let dc = jacobi_anger_coefficients(ejs, ejd, 0.2).unwrap();
        for order in [1u8, 2] {
            let h = effective_hamiltonian(&m, &dc, 0.16, order);
            for i in 0..3 {
                for j in 0..3 {
                    let diff = (h[[i, j]] - h[[j, i]].conj()).norm();
                    assert!(diff < 1e-12, "order {order} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn beta_zero_keeps_first_order_diagonal_exchange_free() {
        let (m, _, _) = table_i_three_level();
        let dc = DriveCoefficients { alpha: 0.8, beta: 0.0, d: 0.3, phi_ac: 0.2 };
        let h = effective_hamiltonian(&m, &dc, 0.16, 1);
        // no photon-assisted exchange without the 2-omega drive component
        assert!(h[[0, 2]].norm() < 1e-12);
        assert!(h[[0, 1]].norm() < 1e-12);
        // diagonals = rotated static + alpha Stark shift, up to the 1/omega
        // corrections generated by the off-diagonal alpha terms
        let bound = 3.0 * (dc.alpha * 0.07f64).powi(2) / 0.16;
        for l in 0..3 {
            let want = m.energies[l] + dc.alpha * m.a_matrix[[l, l]]
                - ROTATION_INDICES[l] as f64 * 0.16;
            assert!((h[[l, l]].re - want).abs() < bound, "wrong diagonal {l}");
        }
    }

    #[test]
    fn resonance_condition_self_consistent() {
        let (m, ejs, ejd) = table_i_three_level();
        let dc = jacobi_anger_coefficients(ejs, ejd, 0.1).unwrap();
        let w = analytic_drive_frequency(&m, &dc).unwrap();
        let h = effective_hamiltonian(&m, &dc, w, 1);
        assert!(
            (h[[0, 0]].re - h[[2, 2]].re).abs() < 1e-6,
            "diagonal mismatch {}",
            h[[0, 0]].re - h[[2, 2]].re
        );
    }

    #[test]
    fn printed_exchange_matches_first_order_offdiagonal() {
        let (m, ejs, ejd) = table_i_three_level();
        let dc = jacobi_anger_coefficients(ejs, ejd, 0.1).unwrap();
        let w = analytic_drive_frequency(&m, &dc).unwrap();
        let h = effective_hamiltonian(&m, &dc, w, 1);
        let g = analytic_exchange(&m, &dc, w);
        assert!((h[[0, 2]].re - g).abs() < 1e-10);
        assert!(h[[0, 2]].im.abs() < 1e-12);
    }

    #[test]
    fn gate_time_errors() {
        let (m, _, _) = table_i_three_level();
        let dc = DriveCoefficients { alpha: 0.5, beta: 0.0, d: 0.26, phi_ac: 0.0 };
        assert!(matches!(analytic_gate_time(&m, &dc, 0.16), Err(DriveError::ZeroCoupling)));
    }

    #[test]
    fn synthetic_rabi_resonance_recovered() {
        // two active levels embedded in three: exact resonance known
        let m = ThreeLevelModel {
            energies: [4.0, 2.0, 3.6],
            a_matrix: ndarray::array![[0.0, 0.0, 0.05], [0.0, 0.1, 0.0], [0.05, 0.0, 0.0]],
            zpf_phase: 0.4,
            cos_reference: 1.0,
            bare_energies: [4.0, 2.0, 3.6],
            couplings: [0.0, 0.0, 0.0],
        };
        // resonance: E101 - 2w = E200 -> w = 0.2; drive beta A02 couples them
        let dc = DriveCoefficients { alpha: 0.02, beta: 0.4, d: 0.3, phi_ac: 0.3 };
        let w1 = analytic_drive_frequency(&m, &dc).unwrap();
        let w_opt = optimize_three_level_frequency(&m, &dc, (w1 - 0.01, w1 + 0.01)).unwrap();
        let peak = peak_transfer(&m, &dc, w_opt, 1.3 * analytic_gate_time(&m, &dc, w_opt).unwrap())
            .unwrap();
        assert!(peak > 0.999, "peak {peak}");
        assert!((w_opt - w1).abs() / w1 < 0.02);
    }

    #[test]
    fn doubling_beta_halves_gate_time() {
        let (m, _, _) = table_i_three_level();
        let d1 = DriveCoefficients { alpha: 0.05, beta: 0.02, d: 0.26, phi_ac: 0.1 };
        let d2 = DriveCoefficients { alpha: 0.05, beta: 0.04, d: 0.26, phi_ac: 0.1 };
        let w = analytic_drive_frequency(&m, &d1).unwrap();
        let t1 = analytic_gate_time(&m, &d1, w).unwrap();
        let t2 = analytic_gate_time(&m, &d2, w).unwrap();
        assert!((t1 / t2 - 2.0).abs() < 0.05 * 2.0);
    }

    #[test]
    fn three_level_propagator_unitary() {
        let (m, ejs, ejd) = table_i_three_level();
        let dc = jacobi_anger_coefficients(ejs, ejd, 0.1).unwrap();
        let w = analytic_drive_frequency(&m, &dc).unwrap();
        let (_, pops) = three_level_population(&m, &dc, w, 200.0, 1e-10).unwrap();
        // norm preserved implies populations bounded
        for p in pops {
            assert!((-1e-9..=1.0 + 1e-9).contains(&p));
        }
    }
}
