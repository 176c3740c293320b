//! Circuit description and capacitance algebra.
//!
//! A circuit is an ordered chain of nodes (fluxonium / transmon / tunable
//! coupler) joined by coupling capacitors. Each coupler is a pair of
//! superconducting islands connected by an asymmetric SQUID; the capacitance
//! matrix is built over all islands and then reduced to one mode per coupler
//! by eliminating the free (total-charge) combination exactly.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::linalg;

/// e^2 / (2h) in GHz * fF (2019 SI exact constants).
pub const E2_OVER_2H: f64 = 19.370229324659125;

/// Default coupler-mode normalization, see [`CircuitSpec::mode_scale`].
pub const DEFAULT_MODE_SCALE: f64 = 1.30;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NodeKind {
    Fluxonium {
        /// E_J in GHz.
        josephson_energy: f64,
        /// E_L in GHz.
        inductive_energy: f64,
        /// Reduced external flux in radians (pi at the half-flux sweet spot).
        external_flux: f64,
    },
    Transmon {
        /// E_J in GHz.
        josephson_energy: f64,
    },
    Coupler {
        /// Larger SQUID junction energy in GHz.
        josephson_upper: f64,
        /// Smaller SQUID junction energy in GHz.
        josephson_lower: f64,
        /// Capacitance of each island to ground, fF.
        ground_capacitance: f64,
        /// Reduced external flux in radians (pi/2 at the lower sweet spot).
        external_flux: f64,
        /// Irrotational-gauge weight m_u = C_l / (C_u + C_l).
        #[serde(default = "default_gauge_upper")]
        gauge_upper: f64,
        /// Irrotational-gauge weight m_l = -C_u / (C_u + C_l).
        #[serde(default = "default_gauge_lower")]
        gauge_lower: f64,
    },
}

fn default_gauge_upper() -> f64 {
    0.5
}

fn default_gauge_lower() -> f64 {
    -0.5
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NodeSpec {
    pub name: String,
    /// Shunt capacitance in fF (for a coupler: the capacitance bridging the
    /// two islands in parallel with the SQUID).
    pub shunt_capacitance: f64,
    #[serde(flatten)]
    pub kind: NodeKind,
}

impl NodeSpec {
    pub fn is_coupler(&self) -> bool {
        matches!(self.kind, NodeKind::Coupler { .. })
    }

    pub fn is_qubit(&self) -> bool {
        !self.is_coupler()
    }

    pub fn external_flux(&self) -> f64 {
        match self.kind {
            NodeKind::Fluxonium { external_flux, .. } => external_flux,
            NodeKind::Coupler { external_flux, .. } => external_flux,
            NodeKind::Transmon { .. } => 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CouplingSpec {
    pub node_a: String,
    pub node_b: String,
    /// Coupling capacitance in fF.
    pub capacitance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CircuitSpec {
    pub nodes: Vec<NodeSpec>,
    pub couplings: Vec<CouplingSpec>,
    /// Normalization of the retained coupler mode: the kept coordinate is
    /// (phi_island1 - phi_island2) / mode_scale, with the SQUID potential
    /// written in that coordinate. mode_scale = 1 is the bare branch-phase
    /// convention; the shipped configs use the calibrated default.
    #[serde(default = "default_mode_scale")]
    pub mode_scale: f64,
}

fn default_mode_scale() -> f64 {
    DEFAULT_MODE_SCALE
}

#[derive(Debug, thiserror::Error)]
pub enum CircuitError {
    #[error("unknown node `{0}` referenced by a coupling")]
    UnknownNode(String),
    #[error("coupling references the same node `{0}` twice")]
    SelfCoupling(String),
    #[error("capacitance must be strictly positive, got {0} fF")]
    NonPositiveCapacitance(f64),
    #[error("energy must be strictly positive, got {0} GHz")]
    NonPositiveEnergy(f64),
    #[error("coupler gauge must satisfy m_u - m_l = 1 with m_u in (0,1): got ({0}, {1})")]
    BadGauge(f64, f64),
    #[error("coupling graph is not connected")]
    Disconnected,
    #[error("capacitance matrix is not positive definite (min eigenvalue {0:.3e} fF)")]
    NonPositiveDefinite(f64),
    #[error("capacitance matrix is singular")]
    SingularMatrix,
    #[error("free coupler mode retains coupling ({0:.3e} fF) after elimination")]
    FreeModeCoupled(f64),
    #[error("mode `{0}` not present in capacitance matrix")]
    UnknownMode(String),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

impl CircuitSpec {
    pub fn node(&self, name: &str) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    /// Qubit node names in chain order.
    pub fn qubit_names(&self) -> Vec<&str> {
        self.nodes.iter().filter(|n| n.is_qubit()).map(|n| n.name.as_str()).collect()
    }

    /// Coupler node names in chain order.
    pub fn coupler_names(&self) -> Vec<&str> {
        self.nodes.iter().filter(|n| n.is_coupler()).map(|n| n.name.as_str()).collect()
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        for node in &self.nodes {
            if node.shunt_capacitance <= 0.0 {
                return Err(CircuitError::NonPositiveCapacitance(node.shunt_capacitance));
            }
            match node.kind {
                NodeKind::Fluxonium { josephson_energy, inductive_energy, .. } => {
                    for e in [josephson_energy, inductive_energy] {
                        if e <= 0.0 {
                            return Err(CircuitError::NonPositiveEnergy(e));
                        }
                    }
                }
                NodeKind::Transmon { josephson_energy } => {
                    if josephson_energy <= 0.0 {
                        return Err(CircuitError::NonPositiveEnergy(josephson_energy));
                    }
                }
                NodeKind::Coupler {
                    josephson_upper,
                    josephson_lower,
                    ground_capacitance,
                    gauge_upper,
                    gauge_lower,
                    ..
                } => {
                    for e in [josephson_upper, josephson_lower] {
                        if e <= 0.0 {
                            return Err(CircuitError::NonPositiveEnergy(e));
                        }
                    }
                    if ground_capacitance <= 0.0 {
                        return Err(CircuitError::NonPositiveCapacitance(ground_capacitance));
                    }
                    let diff = gauge_upper - gauge_lower;
                    if (diff - 1.0).abs() > 1e-12 || gauge_upper <= 0.0 || gauge_upper >= 1.0 {
                        return Err(CircuitError::BadGauge(gauge_upper, gauge_lower));
                    }
                }
            }
        }
        for c in &self.couplings {
            if c.capacitance <= 0.0 {
                return Err(CircuitError::NonPositiveCapacitance(c.capacitance));
            }
            if c.node_a == c.node_b {
                return Err(CircuitError::SelfCoupling(c.node_a.clone()));
            }
            for name in [&c.node_a, &c.node_b] {
                if self.node(name).is_none() {
                    return Err(CircuitError::UnknownNode(name.clone()));
                }
            }
        }
        // connectivity over the coupling graph
        if self.nodes.len() > 1 {
            let n = self.nodes.len();
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for c in &self.couplings {
                    let (a, b) =
                        (self.node_index(&c.node_a).unwrap(), self.node_index(&c.node_b).unwrap());
                    for (x, y) in [(a, b), (b, a)] {
                        if x == i && !seen[y] {
                            seen[y] = true;
                            stack.push(y);
                        }
                    }
                }
            }
            if !seen.iter().all(|&s| s) {
                return Err(CircuitError::Disconnected);
            }
        }
        Ok(())
    }
}

/// Symmetric capacitance matrix over explicit circuit modes.
///
/// Before reduction there is one row per island (`name.a` / `name.b` for a
/// coupler); after [`reduce_coupler_modes`] one row per retained mode.
#[derive(Debug, Clone)]
pub struct CapacitanceMatrix {
    pub matrix: Array2<f64>,
    pub mode_order: Vec<String>,
}

impl CapacitanceMatrix {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.mode_order.iter().position(|m| m == name)
    }
}

/// Charging-energy matrix E_C = C^{-1} e^2/(2h), GHz, same mode order.
#[derive(Debug, Clone)]
pub struct ChargingEnergyMatrix {
    pub matrix: Array2<f64>,
    pub mode_order: Vec<String>,
}

impl ChargingEnergyMatrix {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.mode_order.iter().position(|m| m == name)
    }

    pub fn onsite(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.matrix[[i, i]])
    }
}

// For couplings that reference a coupler, the attachment island is the one
// facing the partner in chain order: partners earlier in the chain attach to
// island `a`, later ones to island `b`.
fn attachment_mode(spec: &CircuitSpec, coupling_target: &str, partner: &str) -> String {
    let t = spec.node(coupling_target).unwrap();
    if !t.is_coupler() {
        return t.name.clone();
    }
    let ti = spec.node_index(coupling_target).unwrap();
    let pi = spec.node_index(partner).unwrap();
    if pi < ti {
        format!("{}.a", t.name)
    } else {
        format!("{}.b", t.name)
    }
}

/// Assemble the island-level capacitance matrix from the circuit graph.
///
/// Diagonal entries are the node self-capacitance plus every attached
/// coupling; off-diagonals are minus the coupling capacitance. Couplers
/// contribute two islands each, bridged by the shunt capacitance and each
/// grounded through `ground_capacitance`.
pub fn build_capacitance_matrix(spec: &CircuitSpec) -> Result<CapacitanceMatrix, CircuitError> {
    spec.validate()?;
    let mut modes: Vec<String> = Vec::new();
    for node in &spec.nodes {
        if node.is_coupler() {
            modes.push(format!("{}.a", node.name));
            modes.push(format!("{}.b", node.name));
        } else {
            modes.push(node.name.clone());
        }
    }
    let n = modes.len();
    let mut c = Array2::<f64>::zeros((n, n));
    let idx = |m: &str| modes.iter().position(|x| x == m).unwrap();

    for node in &spec.nodes {
        match node.kind {
            NodeKind::Coupler { ground_capacitance, .. } => {
                let ia = idx(&format!("{}.a", node.name));
                let ib = idx(&format!("{}.b", node.name));
                // shunt bridges the islands, ground capacitance on each
                c[[ia, ia]] += node.shunt_capacitance + ground_capacitance;
                c[[ib, ib]] += node.shunt_capacitance + ground_capacitance;
                c[[ia, ib]] -= node.shunt_capacitance;
                c[[ib, ia]] -= node.shunt_capacitance;
            }
            _ => {
                let i = idx(&node.name);
                c[[i, i]] += node.shunt_capacitance;
            }
        }
    }
    for cp in &spec.couplings {
        let ma = attachment_mode(spec, &cp.node_a, &cp.node_b);
        let mb = attachment_mode(spec, &cp.node_b, &cp.node_a);
        let (ia, ib) = (idx(&ma), idx(&mb));
        c[[ia, ia]] += cp.capacitance;
        c[[ib, ib]] += cp.capacitance;
        c[[ia, ib]] -= cp.capacitance;
        c[[ib, ia]] -= cp.capacitance;
    }

    let evals = linalg::eigvalsh(&c)?;
    if evals[0] <= 0.0 {
        return Err(CircuitError::NonPositiveDefinite(evals[0]));
    }
    Ok(CapacitanceMatrix { matrix: c, mode_order: modes })
}

/// Reduce each coupler island pair to a single mode.
///
/// The two islands are rotated to difference/sum combinations; the SQUID
/// potential depends only on the difference, and the sum carries the
/// conserved total island charge, so it is eliminated exactly (its charge set
/// to the neutral sector) via the Schur complement of the transformed matrix.
/// The retained difference coordinate is scaled by `spec.mode_scale`.
pub fn reduce_coupler_modes(
    c: &CapacitanceMatrix,
    spec: &CircuitSpec,
) -> Result<CapacitanceMatrix, CircuitError> {
    let couplers = spec.coupler_names();
    if couplers.is_empty() {
        return Ok(c.clone());
    }
    let n = c.matrix.nrows();
    let mu = spec.mode_scale;

    // Jacobian columns: old island coordinates in terms of new modes.
    // kept coupler mode x = (phi_a - phi_b)/mu; dropped mode s = phi_a + phi_b.
    let mut new_modes: Vec<String> = Vec::new();
    let mut dropped: Vec<usize> = Vec::new();
    let mut jac = Array2::<f64>::zeros((n, n));
    let mut col = 0usize;
    let mut old_row = 0usize;
    for node in &spec.nodes {
        if node.is_coupler() {
            let (ra, rb) = (old_row, old_row + 1);
            // phi_a = s/2 + mu x/2 ; phi_b = s/2 - mu x/2
            jac[[ra, col]] = mu / 2.0;
            jac[[rb, col]] = -mu / 2.0;
            jac[[ra, col + 1]] = 0.5;
            jac[[rb, col + 1]] = 0.5;
            new_modes.push(node.name.clone());
            dropped.push(col + 1);
            new_modes.push(format!("{}.free", node.name));
            col += 2;
            old_row += 2;
        } else {
            jac[[old_row, col]] = 1.0;
            new_modes.push(node.name.clone());
            col += 1;
            old_row += 1;
        }
    }

    let cp = jac.t().dot(&c.matrix).dot(&jac);
    let keep: Vec<usize> = (0..n).filter(|i| !dropped.contains(i)).collect();

    // Schur complement: eliminate the free modes at the charge level.
    let a = cp.select(ndarray::Axis(0), &keep).select(ndarray::Axis(1), &keep);
    let b = cp.select(ndarray::Axis(0), &keep).select(ndarray::Axis(1), &dropped);
    let d = cp.select(ndarray::Axis(0), &dropped).select(ndarray::Axis(1), &dropped);
    let dinv_bt = linalg::solve(&d, &b.t().to_owned()).map_err(|_| CircuitError::SingularMatrix)?;
    let reduced = &a - &b.dot(&dinv_bt);

    // Consistency check: the reduced inverse must match the kept block of the
    // full transformed inverse (the eliminated mode carries no residual
    // kinetic coupling into the retained sector).
    let full_inv = linalg::inverse(&cp).map_err(|_| CircuitError::SingularMatrix)?;
    let red_inv = linalg::inverse(&reduced).map_err(|_| CircuitError::SingularMatrix)?;
    let mut defect = 0.0f64;
    for (i, &ki) in keep.iter().enumerate() {
        for (j, &kj) in keep.iter().enumerate() {
            defect = defect.max((full_inv[[ki, kj]] - red_inv[[i, j]]).abs());
        }
    }
    let cmax = c.matrix.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    if defect * cmax * cmax > 1e-12 * cmax {
        return Err(CircuitError::FreeModeCoupled(defect * cmax * cmax));
    }

    let order: Vec<String> = keep.iter().map(|&i| new_modes[i].clone()).collect();
    Ok(CapacitanceMatrix { matrix: reduced, mode_order: order })
}

/// E_C = C^{-1} e^2/(2h) in GHz with C in fF.
pub fn charging_energy_matrix(
    c: &CapacitanceMatrix,
) -> Result<ChargingEnergyMatrix, CircuitError> {
    let evals = linalg::eigvalsh(&c.matrix)?;
    if evals[0] <= 0.0 {
        return Err(CircuitError::SingularMatrix);
    }
    let inv = linalg::inverse(&c.matrix).map_err(|_| CircuitError::SingularMatrix)?;
    Ok(ChargingEnergyMatrix { matrix: inv * E2_OVER_2H, mode_order: c.mode_order.clone() })
}

/// Convenience: full reduction pipeline from a circuit spec.
pub fn reduced_charging_energy(
    spec: &CircuitSpec,
) -> Result<ChargingEnergyMatrix, CircuitError> {
    let c = build_capacitance_matrix(spec)?;
    let r = reduce_coupler_modes(&c, spec)?;
    charging_energy_matrix(&r)
}

/// The Table I unit cell: fluxonium - tunable coupler - transmon.
pub fn table_i_circuit() -> CircuitSpec {
    CircuitSpec {
        nodes: vec![
            NodeSpec {
                name: "q1".into(),
                shunt_capacitance: 18.0,
                kind: NodeKind::Fluxonium {
                    josephson_energy: 6.1,
                    inductive_energy: 1.6,
                    external_flux: std::f64::consts::PI,
                },
            },
            NodeSpec {
                name: "c1".into(),
                shunt_capacitance: 22.0,
                kind: NodeKind::Coupler {
                    josephson_upper: 12.822,
                    josephson_lower: 7.5,
                    ground_capacitance: 38.0,
                    external_flux: std::f64::consts::FRAC_PI_2,
                    gauge_upper: 0.5,
                    gauge_lower: -0.5,
                },
            },
            NodeSpec {
                name: "q2".into(),
                shunt_capacitance: 87.8,
                kind: NodeKind::Transmon { josephson_energy: 13.6 },
            },
        ],
        couplings: vec![
            CouplingSpec { node_a: "q1".into(), node_b: "c1".into(), capacitance: 6.0 },
            CouplingSpec { node_a: "c1".into(), node_b: "q2".into(), capacitance: 15.5 },
        ],
        mode_scale: DEFAULT_MODE_SCALE,
    }
}


/// The three-qubit fluxonium - transmon - fluxonium chain of the shipped
/// spectator configs.
pub fn ftf_chain_circuit() -> CircuitSpec {
    let mut spec = table_i_circuit();
    spec.nodes.push(NodeSpec {
        name: "c2".into(),
        shunt_capacitance: 25.0,
        kind: NodeKind::Coupler {
            josephson_upper: 13.11,
            josephson_lower: 7.5,
            ground_capacitance: 32.5,
            external_flux: std::f64::consts::FRAC_PI_2,
            gauge_upper: 0.5,
            gauge_lower: -0.5,
        },
    });
    spec.nodes.push(NodeSpec {
        name: "q3".into(),
        shunt_capacitance: 21.0,
        kind: NodeKind::Fluxonium {
            josephson_energy: 6.2,
            inductive_energy: 1.96,
            external_flux: std::f64::consts::PI,
        },
    });
    spec.couplings.push(CouplingSpec { node_a: "q2".into(), node_b: "c2".into(), capacitance: 15.0 });
    spec.couplings.push(CouplingSpec { node_a: "c2".into(), node_b: "q3".into(), capacitance: 6.5 });
    spec
}
