//! Multipartite registers and states: tensor products, partial traces,
//! purification and local unitaries.
//!
//! Subsystem ordering is row-major: the first label in a register is the most
//! significant index, so for qubits A,B the basis state |10> has A=1, B=0.

use crate::densemat::{self, herm_eig, CMatrix, MatError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QStateError {
    #[error("label clash: {0}")]
    LabelClash(String),
    #[error("unknown label: {0}")]
    UnknownLabel(String),
    #[error("operator is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("unknown example: {0}")]
    UnknownExample(String),
    #[error(transparent)]
    Mat(#[from] MatError),
}

pub type Result<T> = std::result::Result<T, QStateError>;

/// Ordered list of labeled subsystems; the coordinate system for all states.
#[derive(Debug, Clone, PartialEq)]
pub struct Register {
    subsystems: Vec<(String, usize)>,
}

impl Register {
    pub fn new(subsystems: Vec<(String, usize)>) -> Result<Self> {
        for (i, (label, dim)) in subsystems.iter().enumerate() {
            if *dim < 1 {
                return Err(QStateError::InvalidState(format!(
                    "subsystem {label} has dimension {dim}"
                )));
            }
            if subsystems[..i].iter().any(|(l, _)| l == label) {
                return Err(QStateError::LabelClash(label.clone()));
            }
        }
        Ok(Register { subsystems })
    }

    pub fn qubits(labels: &[&str]) -> Self {
        Register::new(labels.iter().map(|l| (l.to_string(), 2)).collect()).unwrap()
    }

    pub fn subsystems(&self) -> &[(String, usize)] {
        &self.subsystems
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.subsystems.iter().map(|(l, _)| l.as_str())
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|(_, d)| d).product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| QStateError::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.subsystems[self.position(label)?].1)
    }

    /// Strides of each subsystem in the row-major linear index.
    pub fn strides(&self) -> Vec<usize> {
        let n = self.subsystems.len();
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.subsystems[i + 1].1;
        }
        strides
    }

    fn positions_in_order(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut pos: Vec<usize> = labels
            .iter()
            .map(|l| self.position(l))
            .collect::<Result<_>>()?;
        pos.sort_unstable();
        pos.dedup();
        if pos.len() != labels.len() {
            return Err(QStateError::LabelClash(format!("{labels:?}")));
        }
        Ok(pos)
    }
}

/// Roles of the subsystems in an assisted-distillation problem: the two
/// recipients, the helper(s), and an optional purifying reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleMap {
    pub recipient_a: String,
    pub recipient_b: String,
    pub helpers: Vec<String>,
    pub reference: Option<String>,
}

impl RoleMap {
    pub fn new(a: &str, b: &str, helpers: &[&str], reference: Option<&str>) -> Self {
        RoleMap {
            recipient_a: a.to_string(),
            recipient_b: b.to_string(),
            helpers: helpers.iter().map(|s| s.to_string()).collect(),
            reference: reference.map(|s| s.to_string()),
        }
    }

    pub fn validate(&self, register: &Register) -> Result<()> {
        let mut all: Vec<&str> = vec![&self.recipient_a, &self.recipient_b];
        all.extend(self.helpers.iter().map(String::as_str));
        if let Some(r) = &self.reference {
            all.push(r);
        }
        for (i, label) in all.iter().enumerate() {
            register.position(label)?;
            if all[..i].contains(label) {
                return Err(QStateError::LabelClash(label.to_string()));
            }
        }
        Ok(())
    }
}

/// Density operator on a register. Pure states are rank-one.
#[derive(Debug, Clone)]
pub struct MultiState {
    register: Register,
    rho: CMatrix,
}

impl MultiState {
    /// Build from a density matrix, checking Hermiticity, unit trace and
    /// positivity within the global tolerance.
    pub fn from_density(register: Register, rho: CMatrix) -> Result<Self> {
        let d = register.total_dim();
        if rho.rows() != d || rho.cols() != d {
            return Err(QStateError::InvalidState(format!(
                "density matrix is {}x{}, register dimension is {d}",
                rho.rows(),
                rho.cols()
            )));
        }
        let tol = densemat::tolerance();
        let defect = rho.hermiticity_defect();
        if defect > tol {
            return Err(QStateError::InvalidState(format!(
                "density matrix is not Hermitian (defect {defect:.3e})"
            )));
        }
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > tol {
            return Err(QStateError::InvalidState(format!("trace is {tr}, not 1")));
        }
        densemat::psd_eigenvalues(&rho)
            .map_err(|e| QStateError::InvalidState(e.to_string()))?;
        Ok(MultiState { register, rho })
    }

    /// Pure state from an amplitude vector (normalized on construction).
    pub fn pure(register: Register, amplitudes: &[Complex64]) -> Result<Self> {
        let d = register.total_dim();
        if amplitudes.len() != d {
            return Err(QStateError::InvalidState(format!(
                "{} amplitudes for register dimension {d}",
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(QStateError::InvalidState("zero amplitude vector".into()));
        }
        let normalized: Vec<Complex64> = amplitudes.iter().map(|a| a / norm).collect();
        Ok(MultiState {
            register,
            rho: CMatrix::outer(&normalized),
        })
    }

    /// Internal constructor for operators already known to be valid states.
    pub(crate) fn trusted(register: Register, rho: CMatrix) -> Self {
        MultiState { register, rho }
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.register.total_dim()
    }

    /// Recover the amplitude vector of a pure state (top eigenvector, global
    /// phase fixed by the largest-magnitude entry made real positive).
    pub fn pure_amplitudes(&self) -> Result<Vec<Complex64>> {
        let eig = herm_eig(&self.rho)?;
        if eig.eigenvalues[0] < 1.0 - 1e-8
            || eig.eigenvalues.get(1).map_or(false, |&l| l.abs() > 1e-8)
        {
            return Err(QStateError::InvalidState("state is not pure".into()));
        }
        let mut v = eig.eigenvectors.column(0);
        let pivot = v
            .iter()
            .cloned()
            .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
            .unwrap();
        let phase = pivot / pivot.norm();
        for a in &mut v {
            *a /= phase;
        }
        Ok(v)
    }

    /// Kronecker/tensor product of two states on disjoint label sets.
    pub fn tensor(&self, other: &MultiState) -> Result<MultiState> {
        for label in other.register.labels() {
            if self.register.position(label).is_ok() {
                return Err(QStateError::LabelClash(label.to_string()));
            }
        }
        let mut subsystems = self.register.subsystems.clone();
        subsystems.extend(other.register.subsystems.iter().cloned());
        Ok(MultiState {
            register: Register::new(subsystems)?,
            rho: self.rho.kron(&other.rho),
        })
    }

    /// Reduced density operator on the kept subsystems, in their original
    /// register order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<MultiState> {
        if keep.is_empty() {
            return Err(QStateError::InvalidState("nothing kept".into()));
        }
        let keep_pos = self.register.positions_in_order(keep)?;
        let n = self.register.len();
        let trace_pos: Vec<usize> = (0..n).filter(|p| !keep_pos.contains(p)).collect();
        let strides = self.register.strides();
        let dims: Vec<usize> = self.register.subsystems.iter().map(|(_, d)| *d).collect();

        let keep_dim: usize = keep_pos.iter().map(|&p| dims[p]).product();
        let trace_dim: usize = trace_pos.iter().map(|&p| dims[p]).product();

        // linear offsets of every kept / traced multi-index
        let offsets = |positions: &[usize]| -> Vec<usize> {
            let total: usize = positions.iter().map(|&p| dims[p]).product();
            let mut out = Vec::with_capacity(total);
            for mut idx in 0..total {
                let mut off = 0;
                for &p in positions.iter().rev() {
                    off += (idx % dims[p]) * strides[p];
                    idx /= dims[p];
                }
                out.push(off);
            }
            out
        };
        let keep_off = offsets(&keep_pos);
        let trace_off = offsets(&trace_pos);

        let mut reduced = CMatrix::zeros(keep_dim, keep_dim);
        for i in 0..keep_dim {
            for j in 0..keep_dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for &t in &trace_off {
                    acc += self.rho[(keep_off[i] + t, keep_off[j] + t)];
                }
                reduced[(i, j)] = acc;
            }
        }
        if trace_dim == 0 {
            unreachable!();
        }
        let register = Register::new(
            keep_pos
                .iter()
                .map(|&p| self.register.subsystems[p].clone())
                .collect(),
        )?;
        Ok(MultiState {
            register,
            rho: reduced,
        })
    }

    /// Eigen-purification: appends a reference of dimension equal to the
    /// numerical rank, with amplitudes sqrt(lambda_k) |v_k>|k>.
    pub fn purify(&self, ref_label: &str) -> Result<MultiState> {
        if self.register.position(ref_label).is_ok() {
            return Err(QStateError::LabelClash(ref_label.to_string()));
        }
        let eig = herm_eig(&self.rho)?;
        let rank_eigs: Vec<(usize, f64)> = eig
            .eigenvalues
            .iter()
            .cloned()
            .enumerate()
            .filter(|&(_, l)| l > 1e-12)
            .collect();
        let rank = rank_eigs.len().max(1);
        let d = self.dim();
        let mut amps = vec![Complex64::new(0.0, 0.0); d * rank];
        if rank_eigs.is_empty() {
            return Err(QStateError::InvalidState("zero-rank state".into()));
        }
        for (k, &(col, lam)) in rank_eigs.iter().enumerate() {
            let v = eig.eigenvectors.column(col);
            let w = lam.max(0.0).sqrt();
            for i in 0..d {
                amps[i * rank + k] = v[i] * w;
            }
        }
        let mut subsystems = self.register.subsystems.clone();
        subsystems.push((ref_label.to_string(), rank));
        MultiState::pure(Register::new(subsystems)?, &amps)
    }

    /// Conjugate by a unitary acting on the named subsystems; the operator's
    /// index order follows the `on` list.
    pub fn apply_local_unitary(&self, on: &[&str], u: &CMatrix) -> Result<MultiState> {
        let full = self.embed_operator(on, u)?;
        let udag_u = u.adjoint().matmul(u);
        let defect = udag_u.max_abs_diff(&CMatrix::identity(u.rows()));
        if defect > densemat::tolerance() {
            return Err(QStateError::NotUnitary(defect));
        }
        let rho = full.matmul(&self.rho).matmul(&full.adjoint());
        Ok(MultiState {
            register: self.register.clone(),
            rho,
        })
    }

    /// Embed an operator on the named subsystems (identity elsewhere) into the
    /// full register dimension. The operator's index order follows `on`.
    pub fn embed_operator(&self, on: &[&str], op: &CMatrix) -> Result<CMatrix> {
        let on_pos: Vec<usize> = on
            .iter()
            .map(|l| self.register.position(l))
            .collect::<Result<_>>()?;
        {
            let mut sorted = on_pos.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != on_pos.len() {
                return Err(QStateError::LabelClash(format!("{on:?}")));
            }
        }
        let dims: Vec<usize> = self.register.subsystems.iter().map(|(_, d)| *d).collect();
        let strides = self.register.strides();
        let sub_dim: usize = on_pos.iter().map(|&p| dims[p]).product();
        if op.rows() != sub_dim || op.cols() != sub_dim {
            return Err(QStateError::Mat(MatError::DimensionMismatch(format!(
                "operator is {}x{}, subsystem block dimension is {sub_dim}",
                op.rows(),
                op.cols()
            ))));
        }
        let d = self.dim();
        // decompose a sub-block index into per-label offsets
        let sub_offsets: Vec<usize> = {
            let mut out = Vec::with_capacity(sub_dim);
            for mut idx in 0..sub_dim {
                let mut off = 0;
                for &p in on_pos.iter().rev() {
                    off += (idx % dims[p]) * strides[p];
                    idx /= dims[p];
                }
                out.push(off);
            }
            out
        };
        let mut full = CMatrix::zeros(d, d);
        for i in 0..d {
            // sub-index and rest-offset of row i
            let mut sub_i = 0;
            let mut rest = i;
            for &p in &on_pos {
                let digit = (i / strides[p]) % dims[p];
                sub_i = sub_i * dims[p] + digit;
                rest -= digit * strides[p];
            }
            for (sub_j, &off_j) in sub_offsets.iter().enumerate() {
                let v = op[(sub_i, sub_j)];
                if v.norm_sqr() != 0.0 {
                    full[(i, rest + off_j)] = v;
                }
            }
        }
        Ok(full)
    }
}

/// 4x4 CNOT with the control on the first listed subsystem.
pub fn cnot() -> CMatrix {
    let mut m = CMatrix::identity(4);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    m[(2, 2)] = zero;
    m[(3, 3)] = zero;
    m[(2, 3)] = one;
    m[(3, 2)] = one;
    m
}

// ---------------------------------------------------------------------------
// State-description JSON (the CLI file format)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemDesc {
    pub label: String,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RolesDesc {
    pub a: String,
    pub b: String,
    #[serde(default)]
    pub helpers: Vec<String>,
    #[serde(default)]
    pub reference: Option<String>,
}

/// On-disk description of a state: systems, pure amplitudes or a full density
/// matrix, and the role assignment. Index order is row-major over `systems`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateDescription {
    pub systems: Vec<SystemDesc>,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
    pub roles: RolesDesc,
}

impl StateDescription {
    pub fn to_state(&self) -> Result<(MultiState, RoleMap)> {
        let register = Register::new(
            self.systems
                .iter()
                .map(|s| (s.label.clone(), s.dim))
                .collect(),
        )?;
        let state = match self.kind.as_str() {
            "pure" => {
                let amps = self.amplitudes.as_ref().ok_or_else(|| {
                    QStateError::InvalidState("kind \"pure\" requires amplitudes".into())
                })?;
                let v: Vec<Complex64> =
                    amps.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
                MultiState::pure(register, &v)?
            }
            "mixed" => {
                let rows = self.matrix.as_ref().ok_or_else(|| {
                    QStateError::InvalidState("kind \"mixed\" requires matrix".into())
                })?;
                let rho = CMatrix::from_rows(
                    rows.iter()
                        .map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
                        .collect(),
                );
                MultiState::from_density(register, rho)?
            }
            other => {
                return Err(QStateError::InvalidState(format!(
                    "unknown state kind {other:?}"
                )))
            }
        };
        let roles = RoleMap {
            recipient_a: self.roles.a.clone(),
            recipient_b: self.roles.b.clone(),
            helpers: self.roles.helpers.clone(),
            reference: self.roles.reference.clone(),
        };
        roles.validate(state.register())?;
        Ok((state, roles))
    }

    pub fn from_pure(state: &MultiState, roles: &RoleMap) -> Result<Self> {
        let amps = state.pure_amplitudes()?;
        Ok(StateDescription {
            systems: state
                .register()
                .subsystems()
                .iter()
                .map(|(l, d)| SystemDesc {
                    label: l.clone(),
                    dim: *d,
                })
                .collect(),
            kind: "pure".into(),
            amplitudes: Some(amps.iter().map(|a| [a.re, a.im]).collect()),
            matrix: None,
            roles: RolesDesc {
                a: roles.recipient_a.clone(),
                b: roles.recipient_b.clone(),
                helpers: roles.helpers.clone(),
                reference: roles.reference.clone(),
            },
        })
    }

    pub fn from_mixed(state: &MultiState, roles: &RoleMap) -> Self {
        let d = state.dim();
        StateDescription {
            systems: state
                .register()
                .subsystems()
                .iter()
                .map(|(l, dd)| SystemDesc {
                    label: l.clone(),
                    dim: *dd,
                })
                .collect(),
            kind: "mixed".into(),
            amplitudes: None,
            matrix: Some(
                (0..d)
                    .map(|i| {
                        (0..d)
                            .map(|j| {
                                let z = state.rho()[(i, j)];
                                [z.re, z.im]
                            })
                            .collect()
                    })
                    .collect(),
            ),
            roles: RolesDesc {
                a: roles.recipient_a.clone(),
                b: roles.recipient_b.clone(),
                helpers: roles.helpers.clone(),
                reference: roles.reference.clone(),
            },
        }
    }
}
