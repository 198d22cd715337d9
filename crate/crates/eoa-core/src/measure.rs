//! POVMs on helper subsystems, rank-one refinement, post-measurement
//! ensembles, and ensemble-averaged rate bounds.

use crate::densemat::{self, herm_eig, CMatrix, MatError};
use crate::qstate::{MultiState, QStateError, RoleMap};
use crate::rates::{self, RatesError};
use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("state is not classical-quantum: off-block Frobenius mass {0:.3e}")]
    NotClassicalQuantum(f64),
    #[error("decomposition does not mix to the state (max deviation {0:.3e})")]
    DecompositionMismatch(f64),
    #[error(transparent)]
    Q(#[from] QStateError),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Rates(#[from] RatesError),
}

pub type Result<T> = std::result::Result<T, MeasureError>;

/// Outcomes with probability below this are dropped and the remaining mass
/// renormalized.
const OUTCOME_FLOOR: f64 = 1e-12;

/// Positive operators on one subsystem block, summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        if elements.is_empty() {
            return Err(MeasureError::InvalidPovm("no elements".into()));
        }
        let d = elements[0].rows();
        let mut sum = CMatrix::zeros(d, d);
        for (i, e) in elements.iter().enumerate() {
            if e.rows() != d || e.cols() != d {
                return Err(MeasureError::InvalidPovm(format!(
                    "element {i} is {}x{}, expected {d}x{d}",
                    e.rows(),
                    e.cols()
                )));
            }
            let spectrum = densemat::psd_eigenvalues(e)
                .map_err(|err| MeasureError::InvalidPovm(format!("element {i}: {err}")))?;
            let _ = spectrum;
            sum = sum.add(e);
        }
        let defect = sum.max_abs_diff(&CMatrix::identity(d));
        if defect > densemat::tolerance() {
            return Err(MeasureError::InvalidPovm(format!(
                "elements sum to identity with defect {defect:.3e}"
            )));
        }
        Ok(Povm { elements })
    }

    /// Projective measurement in the computational basis.
    pub fn computational_basis(dim: usize) -> Self {
        let elements = (0..dim)
            .map(|i| {
                let mut v = vec![Complex64::new(0.0, 0.0); dim];
                v[i] = Complex64::new(1.0, 0.0);
                CMatrix::outer(&v)
            })
            .collect();
        Povm { elements }
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn from_basis(u: &CMatrix) -> Result<Self> {
        let d = u.rows();
        let udag_u = u.adjoint().matmul(u);
        let defect = udag_u.max_abs_diff(&CMatrix::identity(d));
        if defect > densemat::tolerance() {
            return Err(MeasureError::InvalidPovm(format!(
                "basis matrix is not unitary (defect {defect:.3e})"
            )));
        }
        Ok(Povm {
            elements: (0..d).map(|j| CMatrix::outer(&u.column(j))).collect(),
        })
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// True if every element is rank one within tolerance.
    pub fn is_rank_one(&self) -> bool {
        self.elements.iter().all(|e| {
            herm_eig(e)
                .map(|eig| eig.eigenvalues.iter().skip(1).all(|l| l.abs() < 1e-9))
                .unwrap_or(false)
        })
    }

    /// Split every element into its rank-one spectral pieces. Returns the
    /// refined POVM and, per refined element, the index of the original
    /// element it came from.
    pub fn rank_one_refine(&self) -> Result<(Povm, Vec<usize>)> {
        let mut refined = Vec::new();
        let mut grouping = Vec::new();
        for (x, e) in self.elements.iter().enumerate() {
            let eig = herm_eig(e)?;
            for (k, &lam) in eig.eigenvalues.iter().enumerate() {
                if lam <= 1e-12 {
                    continue;
                }
                let v = eig.eigenvectors.column(k);
                refined.push(CMatrix::outer(&v).scale(Complex64::new(lam, 0.0)));
                grouping.push(x);
            }
        }
        let povm = Povm::new(refined)?;
        Ok((povm, grouping))
    }
}

/// POVM JSON: `{"system":"C","elements":[[[re,im],...],...]}` with each
/// element a flattened row-major square matrix.
#[derive(Debug, Deserialize)]
pub struct PovmDescription {
    pub system: String,
    pub elements: Vec<Vec<[f64; 2]>>,
}

impl PovmDescription {
    pub fn to_povm(&self) -> Result<Povm> {
        let elements = self
            .elements
            .iter()
            .map(|flat| {
                let d = (flat.len() as f64).sqrt().round() as usize;
                if d * d != flat.len() {
                    return Err(MeasureError::InvalidPovm(format!(
                        "element length {} is not a perfect square",
                        flat.len()
                    )));
                }
                Ok(CMatrix::from_fn(d, d, |i, j| {
                    let [re, im] = flat[i * d + j];
                    Complex64::new(re, im)
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        Povm::new(elements)
    }
}

/// One measurement outcome: its probability and the post-measurement state on
/// the unmeasured subsystems.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub prob: f64,
    pub state: MultiState,
}

/// Post-measurement ensemble in POVM element order (zero-probability outcomes
/// dropped).
#[derive(Debug, Clone)]
pub struct MeasurementEnsemble {
    pub outcomes: Vec<Outcome>,
}

impl MeasurementEnsemble {
    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.prob).sum()
    }

    /// Average state sum_x p_x psi_x.
    pub fn mixture(&self) -> Option<MultiState> {
        let first = self.outcomes.first()?;
        let mut rho = CMatrix::zeros(first.state.dim(), first.state.dim());
        for o in &self.outcomes {
            rho = rho.add(&o.state.rho().scale(Complex64::new(o.prob, 0.0)));
        }
        Some(MultiState::trusted(first.state.register().clone(), rho))
    }
}

/// Measure a POVM on the named helper block: p_x = Tr[(E_x (x) I) rho], with
/// post-measurement states obtained by tracing out the measured block.
pub fn measure_helper(
    s: &MultiState,
    helper_block: &[&str],
    povm: &Povm,
) -> Result<MeasurementEnsemble> {
    let block_dim: usize = helper_block
        .iter()
        .map(|l| s.register().dim_of(l))
        .collect::<crate::qstate::Result<Vec<_>>>()?
        .iter()
        .product();
    if block_dim != povm.dim() {
        return Err(MeasureError::DimensionMismatch(format!(
            "POVM dimension {} does not match helper block dimension {block_dim}",
            povm.dim()
        )));
    }
    let keep: Vec<&str> = s
        .register()
        .labels()
        .filter(|l| !helper_block.contains(l))
        .collect();
    if keep.is_empty() {
        return Err(MeasureError::DimensionMismatch(
            "measurement would consume the whole register".into(),
        ));
    }
    let mut outcomes = Vec::new();
    for e in povm.elements() {
        let embedded = s.embed_operator(helper_block, e)?;
        let weighted = embedded.matmul(s.rho());
        let prob = weighted.trace().re;
        if prob < OUTCOME_FLOOR {
            continue;
        }
        let sub = MultiState::trusted(s.register().clone(), weighted)
            .partial_trace(&keep)?;
        let rho = sub.rho().scale(Complex64::new(1.0 / prob, 0.0));
        // symmetrize round-off: Tr_C[(E (x) I) rho] is Hermitian exactly
        let rho = rho.add(&rho.adjoint()).scale(Complex64::new(0.5, 0.0));
        outcomes.push(Outcome {
            prob,
            state: MultiState::trusted(sub.register().clone(), rho),
        });
    }
    // renormalize away the dropped mass
    let total: f64 = outcomes.iter().map(|o| o.prob).sum();
    if (total - 1.0).abs() > 1e-8 {
        for o in &mut outcomes {
            o.prob /= total;
        }
    }
    Ok(MeasurementEnsemble { outcomes })
}

/// Average hashing rate over the ensemble: sum_x p_x max(0, I(A>B)_x).
pub fn avg_hashing_rate(
    ensemble: &MeasurementEnsemble,
    a: &[&str],
    b: &[&str],
) -> Result<f64> {
    let mut total = 0.0;
    for o in &ensemble.outcomes {
        total += o.prob * rates::hashing_bound(&o.state, a, b)?;
    }
    Ok(total)
}

/// Exact assistance value for classical-quantum states: sum_i p_i S(A)_i.
///
/// The state must be block-diagonal in the computational basis of the helper
/// named by the roles (off-block Frobenius mass below 1e-9); the blocks are
/// the classical branches.
pub fn cq_assistance(s: &MultiState, roles: &RoleMap) -> Result<f64> {
    roles.validate(s.register())?;
    if roles.helpers.len() != 1 {
        return Err(MeasureError::DimensionMismatch(
            "cq assistance needs exactly one classical helper".into(),
        ));
    }
    let c_label = roles.helpers[0].as_str();
    let d_c = s.register().dim_of(c_label)?;
    // off-block mass: ||rho - sum_i P_i rho P_i||_F
    let mut block_sum = CMatrix::zeros(s.dim(), s.dim());
    let basis = Povm::computational_basis(d_c);
    for e in basis.elements() {
        let p = s.embed_operator(&[c_label], e)?;
        block_sum = block_sum.add(&p.matmul(s.rho()).matmul(&p));
    }
    let off_mass = s.rho().sub(&block_sum).frobenius_norm();
    if off_mass > 1e-9 {
        return Err(MeasureError::NotClassicalQuantum(off_mass));
    }
    let ensemble = measure_helper(s, &[c_label], &basis)?;
    let a = [roles.recipient_a.as_str()];
    let mut total = 0.0;
    for o in &ensemble.outcomes {
        total += o.prob * rates::von_neumann(&o.state, &a)?;
    }
    Ok(total)
}

/// Both sides of the pure-ensemble convexity inequality, evaluated with the
/// distillable entanglement replaced by computable bounds: the left side is
/// the ensemble-averaged hashing rate after measuring the mixture, the right
/// side the decomposition-resolved average entanglement entropy of the pure
/// refined outcomes. lhs <= rhs always.
pub fn convexity_witness(
    s: &MultiState,
    roles: &RoleMap,
    decomposition: &[(f64, MultiState)],
    povm: &Povm,
) -> Result<(f64, f64)> {
    roles.validate(s.register())?;
    if roles.helpers.len() != 1 {
        return Err(MeasureError::DimensionMismatch(
            "convexity witness needs exactly one helper".into(),
        ));
    }
    if !povm.is_rank_one() {
        return Err(MeasureError::InvalidPovm(
            "convexity witness needs rank-one POVM elements".into(),
        ));
    }
    // the decomposition must mix back to the state
    let mut mix = CMatrix::zeros(s.dim(), s.dim());
    for (p, comp) in decomposition {
        if comp.register() != s.register() {
            return Err(MeasureError::DimensionMismatch(
                "decomposition component register differs from the state".into(),
            ));
        }
        mix = mix.add(&comp.rho().scale(Complex64::new(*p, 0.0)));
    }
    let deviation = mix.max_abs_diff(s.rho());
    if deviation > 1e-8 {
        return Err(MeasureError::DecompositionMismatch(deviation));
    }

    let c_label = roles.helpers[0].as_str();
    let a = [roles.recipient_a.as_str()];
    let b = [roles.recipient_b.as_str()];

    let lhs = avg_hashing_rate(&measure_helper(s, &[c_label], povm)?, &a, &b)?;

    let mut rhs = 0.0;
    for (p_i, comp) in decomposition {
        if *p_i < OUTCOME_FLOOR {
            continue;
        }
        for e in povm.elements() {
            let embedded = comp.embed_operator(&[c_label], e)?;
            let weighted = embedded.matmul(comp.rho());
            let q = weighted.trace().re;
            if q < OUTCOME_FLOOR {
                continue;
            }
            let keep: Vec<&str> = comp
                .register()
                .labels()
                .filter(|l| *l != c_label)
                .collect();
            let sub = MultiState::trusted(comp.register().clone(), weighted)
                .partial_trace(&keep)?;
            let rho = sub.rho().scale(Complex64::new(1.0 / q, 0.0));
            let rho = rho.add(&rho.adjoint()).scale(Complex64::new(0.5, 0.0));
            let outcome = MultiState::trusted(sub.register().clone(), rho);
            rhs += p_i * q * rates::von_neumann(&outcome, &a)?;
        }
    }
    Ok((lhs, rhs))
}
