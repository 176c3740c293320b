//! Node quantization and Hamiltonian assembly.
//!
//! Each node is quantized in a truncated harmonic-oscillator basis matched to
//! its on-site charging energy and potential stiffness, converged locally at
//! high truncation, then projected onto its lowest eigenstates before tensor
//! assembly. Cosine potentials are evaluated exactly by spectral decomposition
//! of the phase operator, never by Taylor expansion.

use ndarray::{Array1, Array2};

use crate::circuit::{ChargingEnergyMatrix, CircuitSpec, NodeKind, NodeSpec};
use crate::linalg;

/// Charge and phase operators of one mode in the oscillator basis.
///
/// The charge operator is purely imaginary antisymmetric, n = i * charge_im;
/// only its real antisymmetric factor is stored.
#[derive(Debug, Clone)]
pub struct ModeOperators {
    pub charge_im: Array2<f64>,
    pub phase: Array2<f64>,
    pub levels: usize,
    pub zpf_phase: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum QuantizeError {
    #[error("truncation must be at least 2 levels, got {0}")]
    InvalidTruncation(usize),
    #[error("node `{0}` is not a coupler or lacks gauge data")]
    GaugeMismatch(String),
    #[error("joint dimension {0} exceeds the configured cap {1}")]
    DimensionOverflow(usize, usize),
    #[error("local spectrum not converged by {0} levels")]
    NoConvergence(usize),
    #[error("mode `{0}` missing from charging-energy matrix")]
    MissingMode(String),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

/// Oscillator-basis charge and flux operators.
///
/// n = (i/sqrt2) (stiffness/8E_C)^{1/4} (a^dag - a),
/// phi = (1/sqrt2) (8E_C/stiffness)^{1/4} (a^dag + a).
pub fn mode_operators(
    charging_energy: f64,
    stiffness: f64,
    levels: usize,
) -> Result<ModeOperators, QuantizeError> {
    if levels < 2 {
        return Err(QuantizeError::InvalidTruncation(levels));
    }
    let zpf_phase = (8.0 * charging_energy / stiffness).powf(0.25) / 2f64.sqrt();
    let zpf_charge = (stiffness / (8.0 * charging_energy)).powf(0.25) / 2f64.sqrt();
    let mut phase = Array2::<f64>::zeros((levels, levels));
    let mut charge_im = Array2::<f64>::zeros((levels, levels));
    for k in 0..levels - 1 {
        let root = ((k + 1) as f64).sqrt();
        phase[[k, k + 1]] = zpf_phase * root;
        phase[[k + 1, k]] = zpf_phase * root;
        // n = i/sqrt2 (...)^{1/4} (a^dag - a): antisymmetric real factor
        charge_im[[k + 1, k]] = zpf_charge * root;
        charge_im[[k, k + 1]] = -zpf_charge * root;
    }
    Ok(ModeOperators { charge_im, phase, levels, zpf_phase })
}

/// cos(phi - offset) evaluated exactly through the spectral decomposition of
/// the (real symmetric) truncated phase operator.
pub fn cosine_operator(phase: &Array2<f64>, offset: f64) -> Result<Array2<f64>, QuantizeError> {
    trig_operator(phase, offset, f64::cos)
}

/// sin(phi - offset), same construction as [`cosine_operator`].
pub fn sine_operator(phase: &Array2<f64>, offset: f64) -> Result<Array2<f64>, QuantizeError> {
    trig_operator(phase, offset, f64::sin)
}

fn trig_operator(
    phase: &Array2<f64>,
    offset: f64,
    f: impl Fn(f64) -> f64,
) -> Result<Array2<f64>, QuantizeError> {
    let eig = linalg::eigh(phase)?;
    let n = phase.nrows();
    let mut out = Array2::<f64>::zeros((n, n));
    // V f(w - offset) V^T
    for k in 0..n {
        let fk = f(eig.values[k] - offset);
        if fk == 0.0 {
            continue;
        }
        for i in 0..n {
            let vik = eig.vectors[[i, k]] * fk;
            if vik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[[i, j]] += vik * eig.vectors[[j, k]];
            }
        }
    }
    Ok(out)
}

/// Static SQUID amplitude and angle for the coupler potential
/// -E_u cos(phi - 2 m_u f) - E_l cos(phi - 2 m_l f).
pub fn squid_envelope(e_upper: f64, e_lower: f64, m_upper: f64, m_lower: f64, flux: f64) -> (f64, f64) {
    let re = e_upper * (2.0 * m_upper * flux).cos() + e_lower * (2.0 * m_lower * flux).cos();
    let im = e_upper * (2.0 * m_upper * flux).sin() + e_lower * (2.0 * m_lower * flux).sin();
    ((re * re + im * im).sqrt(), im.atan2(re))
}

/// Scalar coefficients (c, s) of cos(x) and sin(x) in the SQUID potential at
/// external flux `flux`, in the frame displaced by `theta0`.
pub fn squid_coefficients(
    e_upper: f64,
    e_lower: f64,
    m_upper: f64,
    m_lower: f64,
    theta0: f64,
    flux: f64,
) -> (f64, f64) {
    let o_u = 2.0 * m_upper * flux - theta0;
    let o_l = 2.0 * m_lower * flux - theta0;
    let c = -(e_upper * o_u.cos() + e_lower * o_l.cos());
    let s = -(e_upper * o_u.sin() + e_lower * o_l.sin());
    (c, s)
}

/// Node potential plus on-site charging term in the oscillator basis.
///
/// The local coordinate is displaced so the static potential minimum sits at
/// the origin: fluxonium x = phi - phi_ext, coupler x = phi - theta0.
pub fn node_hamiltonian(
    node: &NodeSpec,
    ec_onsite: f64,
    ops: &ModeOperators,
) -> Result<Array2<f64>, QuantizeError> {
    let n2 = ops.charge_im.dot(&ops.charge_im);
    let mut h = n2.mapv(|v| -4.0 * ec_onsite * v); // n^2 = -(A A)
    match node.kind {
        NodeKind::Fluxonium { josephson_energy, inductive_energy, external_flux } => {
            let x2 = ops.phase.dot(&ops.phase);
            h = h + x2.mapv(|v| 0.5 * inductive_energy * v);
            // -E_J cos(x + phi_ext)
            let cos = cosine_operator(&ops.phase, -external_flux)?;
            h = h - cos.mapv(|v| josephson_energy * v);
        }
        NodeKind::Transmon { josephson_energy } => {
            let cos = cosine_operator(&ops.phase, 0.0)?;
            h = h - cos.mapv(|v| josephson_energy * v);
        }
        NodeKind::Coupler {
            josephson_upper,
            josephson_lower,
            external_flux,
            gauge_upper,
            gauge_lower,
            ..
        } => {
            let (_, theta0) =
                squid_envelope(josephson_upper, josephson_lower, gauge_upper, gauge_lower, external_flux);
            let o_u = 2.0 * gauge_upper * external_flux - theta0;
            let o_l = 2.0 * gauge_lower * external_flux - theta0;
            let cos_u = cosine_operator(&ops.phase, o_u)?;
            let cos_l = cosine_operator(&ops.phase, o_l)?;
            h = h - cos_u.mapv(|v| josephson_upper * v) - cos_l.mapv(|v| josephson_lower * v);
        }
    }
    Ok(h)
}

/// Oscillator stiffness used to build a node's basis.
pub fn node_stiffness(node: &NodeSpec) -> f64 {
    match node.kind {
        NodeKind::Fluxonium { inductive_energy, .. } => inductive_energy,
        NodeKind::Transmon { josephson_energy } => josephson_energy,
        NodeKind::Coupler {
            josephson_upper,
            josephson_lower,
            external_flux,
            gauge_upper,
            gauge_lower,
            ..
        } => squid_envelope(josephson_upper, josephson_lower, gauge_upper, gauge_lower, external_flux).0,
    }
}

/// High-truncation basis size per node kind. Fluxonium follows the 50-level
/// convergence rule; transmon-like cosine modes sit on the stability plateau
/// before the truncated phase operator starts resolving neighboring wells.
pub fn default_local_truncation(node: &NodeSpec) -> usize {
    match node.kind {
        NodeKind::Fluxonium { .. } => 50,
        NodeKind::Transmon { .. } => 25,
        NodeKind::Coupler { .. } => 16,
    }
}

/// One node solved locally and projected onto its lowest eigenstates.
#[derive(Debug, Clone)]
pub struct LocalMode {
    pub name: String,
    /// Lowest `levels` local eigenenergies relative to the local ground state.
    pub energies: Array1<f64>,
    /// Antisymmetric factor of the charge operator in the kept eigenbasis.
    pub charge_im: Array2<f64>,
    /// cos/sin of the displaced coupler phase in the kept eigenbasis.
    pub cos_op: Option<Array2<f64>>,
    pub sin_op: Option<Array2<f64>>,
    pub zpf_phase: f64,
    pub truncation_used: usize,
}

/// Solve a node at high truncation and project to `keep` local eigenstates.
pub fn local_mode(
    node: &NodeSpec,
    ec_onsite: f64,
    keep: usize,
    truncation: usize,
) -> Result<LocalMode, QuantizeError> {
    if keep < 2 {
        return Err(QuantizeError::InvalidTruncation(keep));
    }
    let n_high = truncation.max(keep);
    let ops = mode_operators(ec_onsite, node_stiffness(node), n_high)?;
    let h = node_hamiltonian(node, ec_onsite, &ops)?;
    let eig = linalg::eigh(&h)?;
    // deterministic gauge: dominant component of each kept vector positive
    let mut basis = Array2::<f64>::zeros((n_high, keep));
    for k in 0..keep {
        let mut imax = 0;
        for i in 1..n_high {
            if eig.vectors[[i, k]].abs() > eig.vectors[[imax, k]].abs() {
                imax = i;
            }
        }
        let sign = if eig.vectors[[imax, k]] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n_high {
            basis[[i, k]] = sign * eig.vectors[[i, k]];
        }
    }
    let energies =
        Array1::from_iter((0..keep).map(|k| eig.values[k] - eig.values[0]));
    let charge_im = linalg::conjugate(&ops.charge_im, &basis);
    let (cos_op, sin_op) = if node.is_coupler() {
        let cos = cosine_operator(&ops.phase, 0.0)?;
        let sin = sine_operator(&ops.phase, 0.0)?;
        (Some(linalg::conjugate(&cos, &basis)), Some(linalg::conjugate(&sin, &basis)))
    } else {
        (None, None)
    };
    Ok(LocalMode {
        name: node.name.clone(),
        energies,
        charge_im,
        cos_op,
        sin_op,
        zpf_phase: ops.zpf_phase,
        truncation_used: n_high,
    })
}

/// Flux-tunable SQUID terms of one coupler embedded in the full basis.
#[derive(Debug, Clone)]
pub struct CouplerDrive {
    pub node: String,
    pub cos_op: Array2<f64>,
    pub sin_op: Array2<f64>,
    pub e_upper: f64,
    pub e_lower: f64,
    pub m_upper: f64,
    pub m_lower: f64,
    /// Displacement angle of the coupler phase origin (set at the idle flux).
    pub theta0: f64,
    pub idle_flux: f64,
}

impl CouplerDrive {
    /// (c, s) coefficients of cos(x), sin(x) at external flux `flux`.
    pub fn coefficients(&self, flux: f64) -> (f64, f64) {
        squid_coefficients(self.e_upper, self.e_lower, self.m_upper, self.m_lower, self.theta0, flux)
    }

    /// Coefficients relative to the idle working point.
    pub fn delta_coefficients(&self, flux: f64) -> (f64, f64) {
        let (c, s) = self.coefficients(flux);
        let (c0, s0) = self.coefficients(self.idle_flux);
        (c - c0, s - s0)
    }
}

/// Assembled many-mode Hamiltonian: static part at the idle fluxes plus
/// flux-parameterized coupler SQUID terms.
#[derive(Debug, Clone)]
pub struct HamiltonianModel {
    pub basis_order: Vec<String>,
    pub node_dims: Vec<usize>,
    pub static_matrix: Array2<f64>,
    pub drives: Vec<CouplerDrive>,
    pub locals: Vec<LocalMode>,
    /// Off-diagonal charging energies (i < j), GHz.
    pub cross_charging: Vec<(usize, usize, f64)>,
    pub charging: ChargingEnergyMatrix,
}

/// Hard cap on the joint Hilbert-space dimension.
pub const DIMENSION_CAP: usize = 200_000;

/// Embed a local operator at mode position `pos` in the tensor basis.
pub fn embed(op: &Array2<f64>, dims: &[usize], pos: usize) -> Array2<f64> {
    let left: usize = dims[..pos].iter().product();
    let right: usize = dims[pos + 1..].iter().product();
    let eye_l = Array2::eye(left);
    let eye_r = Array2::eye(right);
    linalg::kron(&linalg::kron(&eye_l, op), &eye_r)
}

fn embed_pair(
    a: &Array2<f64>,
    b: &Array2<f64>,
    dims: &[usize],
    pa: usize,
    pb: usize,
) -> Array2<f64> {
    assert!(pa < pb);
    let left: usize = dims[..pa].iter().product();
    let mid: usize = dims[pa + 1..pb].iter().product();
    let right: usize = dims[pb + 1..].iter().product();
    let mut out = linalg::kron(&Array2::eye(left), a);
    out = linalg::kron(&out, &Array2::eye(mid));
    out = linalg::kron(&out, b);
    linalg::kron(&out, &Array2::eye(right))
}

/// Tensor-product assembly of Eq-style Hamiltonian: local diagonal blocks,
/// cross charging terms 8 E_C,ij n_i n_j for i < j, and per-coupler drive
/// operators cos(x_c), sin(x_c) in the full basis.
pub fn assemble_hamiltonian(
    spec: &CircuitSpec,
    charging: &ChargingEnergyMatrix,
    levels: &[usize],
) -> Result<HamiltonianModel, QuantizeError> {
    let mode_names = charging.mode_order.clone();
    assert_eq!(levels.len(), mode_names.len(), "one truncation per retained mode");
    let dim: usize = levels.iter().product();
    if dim > DIMENSION_CAP {
        return Err(QuantizeError::DimensionOverflow(dim, DIMENSION_CAP));
    }

    let mut locals = Vec::new();
    for (name, &keep) in mode_names.iter().zip(levels) {
        let node = spec
            .node(name)
            .ok_or_else(|| QuantizeError::MissingMode(name.clone()))?;
        let ec = charging
            .onsite(name)
            .ok_or_else(|| QuantizeError::MissingMode(name.clone()))?;
        locals.push(local_mode(node, ec, keep, default_local_truncation(node))?);
    }

    let dims: Vec<usize> = levels.to_vec();
    let mut h = Array2::<f64>::zeros((dim, dim));
    for (pos, lm) in locals.iter().enumerate() {
        let diag = Array2::from_diag(&lm.energies);
        h = h + embed(&diag, &dims, pos);
    }
    let mut cross = Vec::new();
    for i in 0..mode_names.len() {
        for j in (i + 1)..mode_names.len() {
            let ec_ij = charging.matrix[[i, j]];
            if ec_ij == 0.0 {
                continue;
            }
            cross.push((i, j, ec_ij));
            // 8 E_C,ij n_i n_j with n = iA gives -8 E_C,ij A_i A_j
            let term = embed_pair(&locals[i].charge_im, &locals[j].charge_im, &dims, i, j);
            h = h + term.mapv(|v| -8.0 * ec_ij * v);
        }
    }

    let mut drives = Vec::new();
    for (pos, lm) in locals.iter().enumerate() {
        let node = spec.node(&lm.name).unwrap();
        if let NodeKind::Coupler {
            josephson_upper,
            josephson_lower,
            external_flux,
            gauge_upper,
            gauge_lower,
            ..
        } = node.kind
        {
            let (_, theta0) = squid_envelope(
                josephson_upper,
                josephson_lower,
                gauge_upper,
                gauge_lower,
                external_flux,
            );
            drives.push(CouplerDrive {
                node: lm.name.clone(),
                cos_op: embed(lm.cos_op.as_ref().unwrap(), &dims, pos),
                sin_op: embed(lm.sin_op.as_ref().unwrap(), &dims, pos),
                e_upper: josephson_upper,
                e_lower: josephson_lower,
                m_upper: gauge_upper,
                m_lower: gauge_lower,
                theta0,
                idle_flux: external_flux,
            });
        }
    }

    // hermiticity guard on the assembled matrix
    let mut asym = 0.0f64;
    for i in 0..dim {
        for j in (i + 1)..dim {
            asym = asym.max((h[[i, j]] - h[[j, i]]).abs());
        }
    }
    debug_assert!(asym < 1e-12 * h.iter().fold(1.0f64, |s, x| s.max(x.abs())));

    Ok(HamiltonianModel {
        basis_order: mode_names,
        node_dims: dims,
        static_matrix: h,
        drives,
        locals,
        cross_charging: cross,
        charging: charging.clone(),
    })
}

impl HamiltonianModel {
    pub fn dim(&self) -> usize {
        self.static_matrix.nrows()
    }

    pub fn mode_index(&self, name: &str) -> Option<usize> {
        self.basis_order.iter().position(|m| m == name)
    }

    pub fn drive(&self, coupler: &str) -> Option<&CouplerDrive> {
        self.drives.iter().find(|d| d.node == coupler)
    }

    /// Static Hamiltonian with coupler fluxes overridden; only the SQUID
    /// terms are rebuilt, through the precomputed cos/sin operators.
    pub fn static_part(&self, flux_overrides: &[(&str, f64)]) -> Array2<f64> {
        let mut h = self.static_matrix.clone();
        for (name, flux) in flux_overrides {
            if let Some(d) = self.drive(name) {
                let (dc, ds) = d.delta_coefficients(*flux);
                if dc != 0.0 {
                    h.scaled_add(dc, &d.cos_op);
                }
                if ds != 0.0 {
                    h.scaled_add(ds, &d.sin_op);
                }
            }
        }
        h
    }

    /// Index of a bare product state in the tensor basis.
    pub fn bare_index(&self, label: &[usize]) -> usize {
        assert_eq!(label.len(), self.node_dims.len());
        let mut idx = 0;
        for (pos, &l) in label.iter().enumerate() {
            idx = idx * self.node_dims[pos] + l;
        }
        idx
    }

    /// Inverse of [`Self::bare_index`].
    pub fn bare_label(&self, mut idx: usize) -> Vec<usize> {
        let mut label = vec![0usize; self.node_dims.len()];
        for pos in (0..self.node_dims.len()).rev() {
            label[pos] = idx % self.node_dims[pos];
            idx /= self.node_dims[pos];
        }
        label
    }
}

/// Smallest truncation at which the lowest `target_levels` eigenvalues and the
/// |<0|n|1>| element move by less than `tol` when the basis grows by 10.
pub fn converge_levels(
    node: &NodeSpec,
    ec_onsite: f64,
    target_levels: usize,
    tol: f64,
) -> Result<usize, QuantizeError> {
    if target_levels < 2 {
        return Err(QuantizeError::InvalidTruncation(target_levels));
    }
    let span = |n: usize| -> Result<(Vec<f64>, f64), QuantizeError> {
        let ops = mode_operators(ec_onsite, node_stiffness(node), n)?;
        let h = node_hamiltonian(node, ec_onsite, &ops)?;
        let eig = linalg::eigh(&h)?;
        let evs: Vec<f64> =
            (0..target_levels).map(|k| eig.values[k] - eig.values[0]).collect();
        let mut n01 = 0.0;
        for i in 0..n {
            for j in 0..n {
                n01 += eig.vectors[[i, 0]] * ops.charge_im[[i, j]] * eig.vectors[[j, 1]];
            }
        }
        Ok((evs, n01.abs()))
    };
    let mut n = target_levels.max(4);
    let (mut evs, mut n01) = span(n)?;
    while n <= 200 {
        let (evs_next, n01_next) = span(n + 10)?;
        let mut change = (n01 - n01_next).abs();
        for (a, b) in evs.iter().zip(&evs_next) {
            change = change.max((a - b).abs());
        }
        if change < tol {
            return Ok(n);
        }
        n += 10;
        evs = evs_next;
        n01 = n01_next;
    }
    Err(QuantizeError::NoConvergence(200))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit;
    use crate::circuit::{CircuitSpec, CouplingSpec};

    fn fluxonium_node() -> NodeSpec {
        NodeSpec {
            name: "f".into(),
            shunt_capacitance: 18.0,
            kind: NodeKind::Fluxonium {
                josephson_energy: 6.1,
                inductive_energy: 1.6,
                external_flux: std::f64::consts::PI,
            },
        }
    }

    #[test]
    fn zpf_unit_ratio() {
        // E_C = stiffness/8 -> zpf = 1/sqrt(2)
        let ops = mode_operators(1.0, 8.0, 6).unwrap();
        assert!((ops.zpf_phase - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((ops.phase[[0, 1]] - ops.zpf_phase).abs() < 1e-15);
    }

    #[test]
    fn ground_state_phase_fluctuation() {
        let ops = mode_operators(0.7, 3.1, 30).unwrap();
        let x2 = ops.phase.dot(&ops.phase);
        assert!((x2[[0, 0]] - ops.zpf_phase.powi(2)).abs() < 1e-14);
    }

    #[test]
    fn commutator_identity_off_truncation_corner() {
        let ops = mode_operators(1.0, 1.6, 50).unwrap();
        // [n, phi] = i(A phi - phi A) = -i I  =>  A phi - phi A = -I
        let comm = ops.charge_im.dot(&ops.phase) - ops.phase.dot(&ops.charge_im);
        for i in 0..49 {
            for j in 0..49 {
                let want = if i == j { -1.0 } else { 0.0 };
                assert!((comm[[i, j]] - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cosine_trivial_cases() {
        let zero = Array2::<f64>::zeros((4, 4));
        let c = cosine_operator(&zero, 0.0).unwrap();
        for i in 0..4 {
            assert!((c[[i, i]] - 1.0).abs() < 1e-14);
        }
        let ops = mode_operators(0.8, 1.6, 20).unwrap();
        let c0 = cosine_operator(&ops.phase, 0.0).unwrap();
        let cpi = cosine_operator(&ops.phase, std::f64::consts::PI).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                assert!((cpi[[i, j]] + c0[[i, j]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cosine_spectral_range() {
        let ops = mode_operators(0.828, 1.6, 50).unwrap();
        let c = cosine_operator(&ops.phase, 0.3).unwrap();
        let evals = linalg::eigvalsh(&c).unwrap();
        assert!(evals[0] > -1.0 - 1e-9);
        assert!(evals[evals.len() - 1] < 1.0 + 1e-9);
    }

    #[test]
    fn fluxonium_design_frequencies() {
        // on-site E_C from the reduced Table I matrix
        let node = fluxonium_node();
        let ops = mode_operators(0.82800721, 1.6, 50).unwrap();
        let h = node_hamiltonian(&node, 0.82800721, &ops).unwrap();
        let w = linalg::eigvalsh(&h).unwrap();
        let f01 = w[1] - w[0];
        let f12 = w[2] - w[1];
        assert!((f01 - 0.300233).abs() < 1e-5, "f01 = {f01}");
        assert!((f12 - f01 - 3.708568).abs() < 1e-5, "anharm = {}", f12 - f01);
    }

    #[test]
    fn fluxonium_flux_parity() {
        let ec = 0.828;
        for delta in [0.05, 0.2] {
            let mut up = fluxonium_node();
            let mut dn = fluxonium_node();
            if let NodeKind::Fluxonium { external_flux, .. } = &mut up.kind {
                *external_flux = std::f64::consts::PI + delta;
            }
            if let NodeKind::Fluxonium { external_flux, .. } = &mut dn.kind {
                *external_flux = std::f64::consts::PI - delta;
            }
            let ops = mode_operators(ec, 1.6, 50).unwrap();
            let wu = linalg::eigvalsh(&node_hamiltonian(&up, ec, &ops).unwrap()).unwrap();
            let wd = linalg::eigvalsh(&node_hamiltonian(&dn, ec, &ops).unwrap()).unwrap();
            for k in 0..4 {
                assert!(((wu[k] - wu[0]) - (wd[k] - wd[0])).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn fluxonium_matches_phase_grid_oracle() {
        // independent discretized-phase diagonalization of the same potential
        let ec = 0.82800721;
        let (el, ej) = (1.6, 6.1);
        let npts = 2048;
        let span = 8.0 * std::f64::consts::PI;
        let dx = span / (npts - 1) as f64;
        let mut grid = Array2::<f64>::zeros((npts, npts));
        // fourth-order five-point Laplacian for -4 E_C d^2/dx^2
        let k = 4.0 * ec / (dx * dx);
        for i in 0..npts {
            let x = -span / 2.0 + i as f64 * dx;
            // displaced frame: V = EL x^2/2 - EJ cos(x + pi)
            let v = 0.5 * el * x * x - ej * (x + std::f64::consts::PI).cos();
            grid[[i, i]] = 2.5 * k + v;
            if i + 1 < npts {
                grid[[i, i + 1]] = -4.0 / 3.0 * k;
                grid[[i + 1, i]] = -4.0 / 3.0 * k;
            }
            if i + 2 < npts {
                grid[[i, i + 2]] = k / 12.0;
                grid[[i + 2, i]] = k / 12.0;
            }
        }
        let wg = linalg::eigvalsh(&grid).unwrap();
        let node = fluxonium_node();
        let ops = mode_operators(ec, el, 50).unwrap();
        let w = linalg::eigvalsh(&node_hamiltonian(&node, ec, &ops).unwrap()).unwrap();
        for k in 1..4 {
            assert!(
                ((w[k] - w[0]) - (wg[k] - wg[0])).abs() < 1e-4,
                "level {k}: osc {} vs grid {}",
                w[k] - w[0],
                wg[k] - wg[0]
            );
        }
    }

    #[test]
    fn transmon_asymptotic_frequency() {
        let ec = 0.194155;
        let node = NodeSpec {
            name: "t".into(),
            shunt_capacitance: 87.8,
            kind: NodeKind::Transmon { josephson_energy: 13.6 },
        };
        let ops = mode_operators(ec, 13.6, 25).unwrap();
        let w = linalg::eigvalsh(&node_hamiltonian(&node, ec, &ops).unwrap()).unwrap();
        let f01 = w[1] - w[0];
        let asymptotic = (8.0 * 13.6 * ec).sqrt() - ec;
        assert!((f01 - asymptotic).abs() / asymptotic < 0.02);
        assert!((f01 - 4.392657).abs() < 1e-5);
    }

    #[test]
    fn coupler_sweet_spot_envelope() {
        // lower sweet spot at pi/2: envelope is the junction-energy difference
        let (e, th) = squid_envelope(12.822, 7.5, 0.5, -0.5, std::f64::consts::FRAC_PI_2);
        assert!((e - 5.322).abs() < 1e-12);
        assert!((th - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let (e0, _) = squid_envelope(12.822, 7.5, 0.5, -0.5, 0.0);
        assert!((e0 - 20.322).abs() < 1e-12);
        // coefficients at the sweet spot: pure -E_delta cos(x)
        let (c, s) = squid_coefficients(12.822, 7.5, 0.5, -0.5, th, std::f64::consts::FRAC_PI_2);
        assert!((c + 5.322).abs() < 1e-12);
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn assembled_model_dimensions() {
        let spec = circuit::table_i_circuit();
        let ec = circuit::reduced_charging_energy(&spec).unwrap();
        let model = assemble_hamiltonian(&spec, &ec, &[5, 5, 5]).unwrap();
        assert_eq!(model.dim(), 125);
        assert_eq!(model.basis_order, vec!["q1", "c1", "q2"]);
        assert_eq!(model.drives.len(), 1);
    }

    #[test]
    fn decoupled_assembly_is_tensor_sum() {
        let mut spec = circuit::table_i_circuit();
        for c in &mut spec.couplings {
            c.capacitance = 1e-9;
        }
        let ec = circuit::reduced_charging_energy(&spec).unwrap();
        let model = assemble_hamiltonian(&spec, &ec, &[3, 3, 3]).unwrap();
        let w = linalg::eigvalsh(&model.static_matrix).unwrap();
        // brute-force tensor sums of local energies
        let mut sums = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    sums.push(
                        model.locals[0].energies[a]
                            + model.locals[1].energies[b]
                            + model.locals[2].energies[c],
                    );
                }
            }
        }
        sums.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (k, s) in sums.iter().enumerate() {
            assert!((w[k] - s).abs() < 1e-6, "level {k}");
        }
    }

    #[test]
    fn two_transmon_charge_basis_oracle() {
        // small two-node system against dense assembly in the joint bare basis
        let spec = CircuitSpec {
            nodes: vec![
                NodeSpec {
                    name: "a".into(),
                    shunt_capacitance: 60.0,
                    kind: NodeKind::Transmon { josephson_energy: 12.0 },
                },
                NodeSpec {
                    name: "b".into(),
                    shunt_capacitance: 70.0,
                    kind: NodeKind::Transmon { josephson_energy: 14.0 },
                },
            ],
            couplings: vec![CouplingSpec {
                node_a: "a".into(),
                node_b: "b".into(),
                capacitance: 4.0,
            }],
            mode_scale: 1.0,
        };
        let ec = circuit::reduced_charging_energy(&spec).unwrap();
        let model = assemble_hamiltonian(&spec, &ec, &[6, 6]).unwrap();
        let w = linalg::eigvalsh(&model.static_matrix).unwrap();

        // oracle: direct product-basis assembly without local projection
        let na = 18;
        let opsa = mode_operators(ec.matrix[[0, 0]], 12.0, na).unwrap();
        let opsb = mode_operators(ec.matrix[[1, 1]], 14.0, na).unwrap();
        let ha = node_hamiltonian(&spec.nodes[0], ec.matrix[[0, 0]], &opsa).unwrap();
        let hb = node_hamiltonian(&spec.nodes[1], ec.matrix[[1, 1]], &opsb).unwrap();
        let eye = Array2::<f64>::eye(na);
        let mut big = linalg::kron(&ha, &eye) + linalg::kron(&eye, &hb);
        let cross = linalg::kron(&opsa.charge_im, &opsb.charge_im);
        big.scaled_add(-8.0 * ec.matrix[[0, 1]], &cross);
        let wb = linalg::eigvalsh(&big).unwrap();
        for k in 1..6 {
            assert!(
                ((w[k] - w[0]) - (wb[k] - wb[0])).abs() < 2e-4,
                "level {k}: {} vs {}",
                w[k] - w[0],
                wb[k] - wb[0]
            );
        }
    }

    #[test]
    fn converge_levels_behaviour() {
        let node = fluxonium_node();
        let n = converge_levels(&node, 0.828, 4, 1e-5).unwrap();
        assert!(n <= 50, "fluxonium converged at {n}");
        // transmon converges quickly on its plateau
        let t = NodeSpec {
            name: "t".into(),
            shunt_capacitance: 87.8,
            kind: NodeKind::Transmon { josephson_energy: 13.6 },
        };
        let nt = converge_levels(&t, 0.194, 3, 1e-5).unwrap();
        assert!(nt <= 30);
    }

    #[test]
    fn spectrum_invariant_under_node_reordering() {
        let spec = circuit::table_i_circuit();
        let ec = circuit::reduced_charging_energy(&spec).unwrap();
        let model = assemble_hamiltonian(&spec, &ec, &[4, 4, 4]).unwrap();
        let mut rev = spec.clone();
        rev.nodes.reverse();
        let ec2 = circuit::reduced_charging_energy(&rev).unwrap();
        let model2 = assemble_hamiltonian(&rev, &ec2, &[4, 4, 4]).unwrap();
        let w1 = linalg::eigvalsh(&model.static_matrix).unwrap();
        let w2 = linalg::eigvalsh(&model2.static_matrix).unwrap();
        for k in 0..20 {
            assert!((w1[k] - w2[k]).abs() < 1e-8, "level {k}");
        }
    }
}
