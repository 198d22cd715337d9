//! Built-in library of the worked example states: the factorized two-link
//! chain, its CNOT-corrupted variant, classical-quantum states, and maximally
//! entangled pairs.

use crate::densemat::CMatrix;
use crate::qstate::{cnot, MultiState, QStateError, Register, Result, RoleMap};
use num_complex::Complex64;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// |psi>^{AC1} = 1/2 |00> + sqrt(3/4) |11>.
pub fn link_ac1() -> MultiState {
    let mut amps = vec![Complex64::new(0.0, 0.0); 4];
    amps[0] = c(0.5);
    amps[3] = c(0.75f64.sqrt());
    MultiState::pure(Register::qubits(&["A", "C1"]), &amps).unwrap()
}

/// |psi>^{BC2R} = 1/sqrt(2) |000> + 1/2 |110> + 1/2 |111>.
pub fn repeater_link_bc2r() -> MultiState {
    let mut amps = vec![Complex64::new(0.0, 0.0); 8];
    amps[0] = c(0.5f64.sqrt()); // |000>
    amps[6] = c(0.5); // |110>
    amps[7] = c(0.5); // |111>
    MultiState::pure(Register::qubits(&["B", "C2", "R"]), &amps).unwrap()
}

/// The factorized chain state psi^{AC1} (x) psi^{BC2R} on register
/// A, C1, B, C2, R, with Charlie holding both C1 and C2.
pub fn factorized_chain() -> (MultiState, RoleMap) {
    let psi = link_ac1().tensor(&repeater_link_bc2r()).unwrap();
    let roles = RoleMap::new("A", "B", &["C1", "C2"], Some("R"));
    (psi, roles)
}

/// The factorized chain after a CNOT between Charlie's systems
/// (control C1, target C2).
pub fn cnot_corrupted() -> (MultiState, RoleMap) {
    let (psi, roles) = factorized_chain();
    let phi = psi.apply_local_unitary(&["C1", "C2"], &cnot()).unwrap();
    (phi, roles)
}

/// Maximally entangled state of Schmidt rank m between A and B.
pub fn maximally_entangled(m: usize) -> (MultiState, RoleMap) {
    assert!(m >= 1);
    let register = Register::new(vec![("A".into(), m), ("B".into(), m)]).unwrap();
    let mut amps = vec![Complex64::new(0.0, 0.0); m * m];
    let w = c(1.0 / (m as f64).sqrt());
    for k in 0..m {
        amps[k * m + k] = w;
    }
    let psi = MultiState::pure(register, &amps).unwrap();
    (psi, RoleMap::new("A", "B", &[], None))
}

/// Classical-quantum state sum_i p_i psi_i^{AB} (x) |i><i|^C with pure
/// components on A,B and a classical helper C of dimension p.len().
pub fn cq_state(probs: &[f64], components: &[MultiState]) -> Result<(MultiState, RoleMap)> {
    if probs.len() != components.len() || probs.is_empty() {
        return Err(QStateError::InvalidState(
            "cq state needs matching, nonempty probability and component lists".into(),
        ));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-8 || probs.iter().any(|&p| p < 0.0) {
        return Err(QStateError::InvalidState(format!(
            "cq probabilities sum to {total}"
        )));
    }
    let d_ab = components[0].dim();
    let register_ab = components[0].register().clone();
    for comp in components {
        if comp.register() != &register_ab {
            return Err(QStateError::InvalidState(
                "cq components must share one register".into(),
            ));
        }
    }
    let d_c = probs.len();
    let mut rho = CMatrix::zeros(d_ab * d_c, d_ab * d_c);
    for (i, (p, comp)) in probs.iter().zip(components).enumerate() {
        for r in 0..d_ab {
            for s in 0..d_ab {
                rho[(r * d_c + i, s * d_c + i)] += comp.rho()[(r, s)] * c(*p);
            }
        }
    }
    let mut subsystems = register_ab.subsystems().to_vec();
    subsystems.push(("C".into(), d_c));
    let state = MultiState::from_density(Register::new(subsystems)?, rho)?;
    let roles = RoleMap::new("A", "B", &["C"], None);
    Ok((state, roles))
}

/// Bell pair on A,B.
pub fn bell_ab() -> MultiState {
    maximally_entangled(2).0
}

/// |00> product state on A,B.
pub fn product_ab() -> MultiState {
    let mut amps = vec![Complex64::new(0.0, 0.0); 4];
    amps[0] = c(1.0);
    MultiState::pure(Register::qubits(&["A", "B"]), &amps).unwrap()
}

/// Names accepted by the CLI `example` command.
pub const EXAMPLE_NAMES: &[&str] = &[
    "factorized-chain",
    "cnot-corrupted",
    "bc2r-link",
    "maximally-entangled",
    "cq",
];
