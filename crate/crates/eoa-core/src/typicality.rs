//! Typical subspaces of product states, Haar-random basis sampling, and the
//! Monte-Carlo decoupling experiment: measuring a helper's typical subspace in
//! a random basis and watching the reference marginal approach product form.
//!
//! Many-copy pure states are held as amplitude vectors, never as density
//! matrices, so the experiment stays within the dense-representation guard.

use crate::densemat::{herm_eig, trace_norm, CMatrix, MatError};
use crate::measure::{MeasurementEnsemble, Outcome};
use crate::qstate::{MultiState, QStateError, Register};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Entry cap for any dense state representation (vector length or matrix
/// entry count).
const SIZE_GUARD: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum TypError {
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("projection onto the typical subspace leaves norm below 1e-9")]
    DegenerateProjection,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Q(#[from] QStateError),
    #[error(transparent)]
    Mat(#[from] MatError),
}

pub type Result<T> = std::result::Result<T, TypError>;

/// Index set of the delta-typical sequences of p^{(x) n}, together with the
/// eigenbasis the letter indices refer to.
#[derive(Debug, Clone)]
pub struct TypicalSubspace {
    pub n: usize,
    pub delta: f64,
    pub base_dist: Vec<f64>,
    /// Sorted sequence indices (row-major, first letter most significant).
    pub indices: Vec<usize>,
    eigenbasis: CMatrix,
}

impl TypicalSubspace {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// Probability mass of the typical set under p^{(x) n}.
    pub fn mass(&self) -> f64 {
        let d = self.base_dist.len();
        self.indices
            .iter()
            .map(|&seq| {
                let mut idx = seq;
                let mut prod = 1.0;
                for _ in 0..self.n {
                    prod *= self.base_dist[idx % d];
                    idx /= d;
                }
                prod
            })
            .sum()
    }

    /// d^n x dim matrix whose columns are the typical sequence vectors
    /// (tensor products of eigenbasis columns) in the computational basis.
    pub fn basis_matrix(&self) -> CMatrix {
        let d = self.base_dist.len();
        let full = d.pow(self.n as u32);
        let mut out = CMatrix::zeros(full, self.dim());
        for (col, &seq) in self.indices.iter().enumerate() {
            // letters of the sequence, most significant first
            let mut letters = vec![0usize; self.n];
            let mut idx = seq;
            for k in (0..self.n).rev() {
                letters[k] = idx % d;
                idx /= d;
            }
            let mut vec = vec![Complex64::new(1.0, 0.0)];
            for &x in &letters {
                let col_x = self.eigenbasis.column(x);
                let mut next = Vec::with_capacity(vec.len() * d);
                for &a in &vec {
                    for &b in &col_x {
                        next.push(a * b);
                    }
                }
                vec = next;
            }
            for (row, &a) in vec.iter().enumerate() {
                out[(row, col)] = a;
            }
        }
        out
    }

    /// Projector onto the typical subspace in the computational basis.
    pub fn projector(&self) -> CMatrix {
        let w = self.basis_matrix();
        w.matmul(&w.adjoint())
    }
}

/// Enumerate the delta-typical sequence set of p^{(x) n} in the supplied
/// eigenbasis (typicality is defined on the spectral basis).
pub fn typical_projector(
    p: &[f64],
    eigenbasis: &CMatrix,
    n: usize,
    delta: f64,
) -> Result<TypicalSubspace> {
    let d = p.len();
    if d == 0 || n == 0 {
        return Err(TypError::InvalidInput("empty distribution or n = 0".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 || p.iter().any(|&x| x < -1e-12) {
        return Err(TypError::InvalidInput(format!(
            "distribution sums to {total}"
        )));
    }
    if eigenbasis.rows() != d || eigenbasis.cols() != d {
        return Err(TypError::InvalidInput(
            "eigenbasis dimension does not match distribution".into(),
        ));
    }
    let full = d
        .checked_pow(n as u32)
        .filter(|&f| f <= SIZE_GUARD)
        .ok_or_else(|| TypError::TooLarge(format!("{d}^{n} sequences")))?;
    let mut indices = Vec::new();
    let mut counts = vec![0usize; d];
    for seq in 0..full {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut idx = seq;
        for _ in 0..n {
            counts[idx % d] += 1;
            idx /= d;
        }
        let typical = (0..d)
            .all(|x| (counts[x] as f64 / n as f64 - p[x]).abs() <= delta + 1e-12);
        if typical {
            indices.push(seq);
        }
    }
    Ok(TypicalSubspace {
        n,
        delta,
        base_dist: p.to_vec(),
        indices,
        eigenbasis: eigenbasis.clone(),
    })
}

/// Haar-random unitary: QR of a complex Gaussian matrix via modified
/// Gram-Schmidt (the positive-diagonal R makes Q exactly Haar-distributed).
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    assert!(d >= 1);
    let mut cols: Vec<Vec<Complex64>> = (0..d)
        .map(|_| {
            (0..d)
                .map(|_| {
                    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                })
                .collect()
        })
        .collect();
    for j in 0..d {
        for k in 0..j {
            let proj: Complex64 = (0..d).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            for i in 0..d {
                let sub = proj * cols[k][i];
                cols[j][i] -= sub;
            }
        }
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut cols[j] {
            *z /= norm;
        }
    }
    CMatrix::from_fn(d, d, |i, j| cols[j][i])
}

// ---------------------------------------------------------------------------
// Many-copy pure-state plumbing
// ---------------------------------------------------------------------------

/// Amplitude vector over a list of subsystem dimensions (row-major).
struct VecState {
    dims: Vec<usize>,
    amps: Vec<Complex64>,
}

impl VecState {
    /// n-fold tensor power, copy-major subsystem order.
    fn tensor_power(single: &[Complex64], dims: &[usize], n: usize) -> Result<VecState> {
        let total = single
            .len()
            .checked_pow(n as u32)
            .filter(|&t| t <= SIZE_GUARD)
            .ok_or_else(|| {
                TypError::TooLarge(format!("{}^{n} amplitudes", single.len()))
            })?;
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        for _ in 0..n {
            let mut next = Vec::with_capacity(amps.len() * single.len());
            for &a in &amps {
                for &b in single {
                    next.push(a * b);
                }
            }
            amps = next;
        }
        debug_assert_eq!(amps.len(), total);
        let mut all_dims = Vec::with_capacity(dims.len() * n);
        for _ in 0..n {
            all_dims.extend_from_slice(dims);
        }
        Ok(VecState {
            dims: all_dims,
            amps,
        })
    }

    /// Reshape into (front block x rest) with the front index running over the
    /// given positions in order and the rest index over the remaining
    /// positions in original order.
    fn split(&self, front: &[usize]) -> CMatrix {
        let rest: Vec<usize> = (0..self.dims.len()).filter(|p| !front.contains(p)).collect();
        let front_dim: usize = front.iter().map(|&p| self.dims[p]).product();
        let rest_dim: usize = rest.iter().map(|&p| self.dims[p]).product();
        let n = self.dims.len();
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        let mut out = CMatrix::zeros(front_dim, rest_dim);
        for (idx, &a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let mut fi = 0;
            for &p in front {
                fi = fi * self.dims[p] + (idx / strides[p]) % self.dims[p];
            }
            let mut ri = 0;
            for &p in &rest {
                ri = ri * self.dims[p] + (idx / strides[p]) % self.dims[p];
            }
            out[(fi, ri)] = a;
        }
        out
    }
}

/// rho = X X' for a pure bipartite amplitude matrix X (marginal on the row
/// index).
fn gram_rows(x: &CMatrix) -> CMatrix {
    let mut rho = CMatrix::zeros(x.rows(), x.rows());
    for i in 0..x.rows() {
        for j in 0..x.rows() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..x.cols() {
                acc += x[(i, k)] * x[(j, k)].conj();
            }
            rho[(i, j)] = acc;
        }
    }
    rho
}

fn kron_power(m: &CMatrix, n: usize) -> CMatrix {
    let mut out = CMatrix::identity(1);
    for _ in 0..n {
        out = out.kron(m);
    }
    out
}

struct HelperSplit {
    /// positions of the helper subsystems across all copies
    helper_positions: Vec<usize>,
    /// typical subspace of the helper spectrum
    typical: TypicalSubspace,
    /// rest-register labels, copy-major with #k suffixes
    rest_labels: Vec<(String, usize)>,
    /// rest subsystem dims per copy position (copy-major)
    rest_dims: Vec<usize>,
}

/// Shared setup for the typical-measurement routines: locate the helper block
/// across copies, diagonalize the single-copy helper marginal, and enumerate
/// its typical subspace.
fn prepare_helper(
    s: &MultiState,
    helper: &[&str],
    n: usize,
    delta: f64,
) -> Result<(VecState, HelperSplit)> {
    let amps = s.pure_amplitudes().map_err(|_| {
        TypError::InvalidInput("typical measurement needs a pure input state".into())
    })?;
    let subsystems = s.register().subsystems();
    let dims: Vec<usize> = subsystems.iter().map(|(_, d)| *d).collect();
    let copies = VecState::tensor_power(&amps, &dims, n)?;

    let helper_marg = s.partial_trace(helper)?;
    let eig = herm_eig(helper_marg.rho())?;
    let p: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let typical = typical_projector(&p, &eig.eigenvectors, n, delta)?;

    let per_copy = subsystems.len();
    let helper_local: Vec<usize> = helper
        .iter()
        .map(|l| s.register().position(l))
        .collect::<crate::qstate::Result<_>>()?;
    if helper_local.len() != 1 {
        // one helper block treated jointly: the eigenbasis above lives on the
        // joint helper dimension, so positions must be contiguous per copy
        return Err(TypError::InvalidInput(
            "typical measurement supports a single helper label".into(),
        ));
    }
    let mut helper_positions = Vec::new();
    for k in 0..n {
        for &hp in &helper_local {
            helper_positions.push(k * per_copy + hp);
        }
    }
    let mut rest_labels = Vec::new();
    let mut rest_dims = Vec::new();
    for k in 0..n {
        for (label, dim) in subsystems {
            if helper.contains(&label.as_str()) {
                continue;
            }
            rest_labels.push((format!("{label}#{}", k + 1), *dim));
            rest_dims.push(*dim);
        }
    }
    Ok((
        copies,
        HelperSplit {
            helper_positions,
            typical,
            rest_labels,
            rest_dims,
        },
    ))
}

/// Project the helper block of psi^{(x) n} onto its typical subspace and
/// return the normalized amplitude matrix (typical index x rest index), along
/// with the discarded atypical mass.
fn project_typical(copies: &VecState, split: &HelperSplit) -> Result<(CMatrix, f64)> {
    let psi = copies.split(&split.helper_positions);
    let w = split.typical.basis_matrix();
    let projected = w.adjoint().matmul(&psi);
    let norm2: f64 = projected.data().iter().map(|z| z.norm_sqr()).sum();
    if norm2 < 1e-9 {
        return Err(TypError::DegenerateProjection);
    }
    let scale = Complex64::new(1.0 / norm2.sqrt(), 0.0);
    Ok((projected.scale(scale), 1.0 - norm2))
}

/// Build psi^{(x) n}, project the helper onto its typical subspace, measure in
/// a Haar-random basis of that subspace, and return the outcome ensemble on
/// the remaining systems (labels suffixed per copy). Also returns the
/// discarded atypical mass.
pub fn random_typical_measurement(
    s: &MultiState,
    helper: &[&str],
    n: usize,
    delta: f64,
    rng: &mut impl Rng,
) -> Result<(MeasurementEnsemble, f64)> {
    let (copies, split) = prepare_helper(s, helper, n, delta)?;
    let rest_dim: usize = split.rest_dims.iter().product();
    if rest_dim * rest_dim > SIZE_GUARD {
        return Err(TypError::TooLarge(format!(
            "outcome density matrices would have {rest_dim}^2 entries"
        )));
    }
    let (projected, atypical) = project_typical(&copies, &split)?;
    let t = split.typical.dim();
    let u = haar_unitary(t, rng);
    let outcome_amps = u.adjoint().matmul(&projected);

    let register = Register::new(split.rest_labels.clone())?;
    let mut outcomes = Vec::new();
    for j in 0..t {
        let prob: f64 = (0..rest_dim)
            .map(|k| outcome_amps[(j, k)].norm_sqr())
            .sum();
        if prob < 1e-12 {
            continue;
        }
        let v: Vec<Complex64> = (0..rest_dim)
            .map(|k| outcome_amps[(j, k)] / prob.sqrt())
            .collect();
        outcomes.push(Outcome {
            prob,
            state: MultiState::trusted(register.clone(), CMatrix::outer(&v)),
        });
    }
    let total: f64 = outcomes.iter().map(|o| o.prob).sum();
    for o in &mut outcomes {
        o.prob /= total;
    }
    Ok((MeasurementEnsemble { outcomes }, atypical))
}

/// Per-trial decoupling measurements.
#[derive(Debug, Clone, Serialize)]
pub struct TrialStats {
    pub trial: usize,
    /// sum_j p_j || psi_j^{R^n} - (psi^R)^{(x) n} ||_1
    pub avg_trace_dist_r: f64,
    /// the B-side analogue
    pub avg_trace_dist_b: f64,
    /// outcome mass where both distances beat xi1 and xi2
    pub joint_success_fraction: f64,
}

/// Decoupling experiment results for one value of n.
#[derive(Debug, Clone, Serialize)]
pub struct DecouplingStats {
    pub n: usize,
    pub trials: usize,
    pub delta: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub seed: u64,
    pub typical_dim: usize,
    pub atypical_mass: f64,
    pub per_trial: Vec<TrialStats>,
    pub mean_dist_r: f64,
    pub mean_dist_b: f64,
    pub std_dist_r: f64,
    pub std_dist_b: f64,
    pub mean_joint_success: f64,
    pub notes: Vec<String>,
}

impl DecouplingStats {
    pub fn csv_header() -> &'static str {
        "n,trial,avgTraceDistR,avgTraceDistB,jointSuccessFraction"
    }

    pub fn to_csv_rows(&self) -> String {
        let mut out = String::new();
        for t in &self.per_trial {
            out.push_str(&format!(
                "{},{},{:.9},{:.9},{:.9}\n",
                self.n, t.trial, t.avg_trace_dist_r, t.avg_trace_dist_b, t.joint_success_fraction
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct DecouplingConfig {
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub delta: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub seed: u64,
    /// Also project the B and R blocks onto their typical subspaces before
    /// measuring (the stronger projection variant); off by default.
    pub project_all: bool,
}

/// Run the decoupling experiment: for each n, repeatedly measure the helper's
/// typical subspace in a fresh Haar-random basis and record how far the
/// outcome marginals on R^n and B^n sit from product form.
pub fn decoupling_experiment(
    s: &MultiState,
    helper: &[&str],
    b_group: &[&str],
    r_group: &[&str],
    cfg: &DecouplingConfig,
) -> Result<Vec<DecouplingStats>> {
    if cfg.trials == 0 {
        return Err(TypError::InvalidInput("trials must be positive".into()));
    }
    let mut hypothesis_notes = Vec::new();
    {
        let s_r = crate::rates::von_neumann(s, r_group)
            .map_err(|e| TypError::InvalidInput(e.to_string()))?;
        let s_b = crate::rates::von_neumann(s, b_group)
            .map_err(|e| TypError::InvalidInput(e.to_string()))?;
        if s_r >= s_b - 1e-9 {
            hypothesis_notes.push(format!(
                "hypothesis S(R) < S(B) violated: S(R) = {s_r:.9}, S(B) = {s_b:.9}; proceeding"
            ));
        }
    }
    let rho_r = s.partial_trace(r_group)?;
    let rho_b = s.partial_trace(b_group)?;

    let mut results = Vec::new();
    for &n in &cfg.n_list {
        let (copies, split) = prepare_helper(s, helper, n, cfg.delta)?;
        let (mut projected, atypical) = project_typical(&copies, &split)?;
        let mut notes = hypothesis_notes.clone();

        if cfg.project_all {
            let (proj, kept) = rest_typical_filter(s, b_group, r_group, n, cfg.delta)?;
            projected = apply_rest_filter(&projected, &proj)?;
            let norm2: f64 = projected.data().iter().map(|z| z.norm_sqr()).sum();
            if norm2 < 1e-9 {
                return Err(TypError::DegenerateProjection);
            }
            projected = projected.scale(Complex64::new(1.0 / norm2.sqrt(), 0.0));
            notes.push(format!(
                "projected B and R onto their typical subspaces ({kept} rest components kept)"
            ));
        }

        // positions of the R (resp. B) subsystems inside the rest block
        let rest_positions = |group: &[&str]| -> Vec<usize> {
            split
                .rest_labels
                .iter()
                .enumerate()
                .filter(|(_, (label, _))| {
                    let base = label.rsplit_once('#').map(|(b, _)| b).unwrap_or(label);
                    group.contains(&base)
                })
                .map(|(i, _)| i)
                .collect()
        };
        let r_positions = rest_positions(r_group);
        let b_positions = rest_positions(b_group);

        let r_target = kron_power(rho_r.rho(), n);
        let b_target = kron_power(rho_b.rho(), n);
        let t = split.typical.dim();

        let per_trial: Vec<TrialStats> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| -> Result<TrialStats> {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(((n as u64) << 32) | trial as u64);
                let u = haar_unitary(t, &mut rng);
                let outcome_amps = u.adjoint().matmul(&projected);
                let rest_dim = projected.cols();
                let mut avg_r = 0.0;
                let mut avg_b = 0.0;
                let mut joint = 0.0;
                for j in 0..t {
                    let prob: f64 = (0..rest_dim)
                        .map(|k| outcome_amps[(j, k)].norm_sqr())
                        .sum();
                    if prob < 1e-12 {
                        continue;
                    }
                    let v: Vec<Complex64> = (0..rest_dim)
                        .map(|k| outcome_amps[(j, k)] / prob.sqrt())
                        .collect();
                    let vs = VecState {
                        dims: split.rest_dims.clone(),
                        amps: v,
                    };
                    let r_marg = gram_rows(&vs.split(&r_positions));
                    let b_marg = gram_rows(&vs.split(&b_positions));
                    let dist_r = trace_norm(&r_marg.sub(&r_target))?;
                    let dist_b = trace_norm(&b_marg.sub(&b_target))?;
                    avg_r += prob * dist_r;
                    avg_b += prob * dist_b;
                    if dist_r < cfg.xi1 && dist_b < cfg.xi2 {
                        joint += prob;
                    }
                }
                Ok(TrialStats {
                    trial,
                    avg_trace_dist_r: avg_r,
                    avg_trace_dist_b: avg_b,
                    joint_success_fraction: joint,
                })
            })
            .collect::<Result<_>>()?;

        let mean = |f: fn(&TrialStats) -> f64| -> f64 {
            per_trial.iter().map(f).sum::<f64>() / per_trial.len() as f64
        };
        let std = |f: fn(&TrialStats) -> f64, m: f64| -> f64 {
            (per_trial.iter().map(|t| (f(t) - m).powi(2)).sum::<f64>()
                / per_trial.len() as f64)
                .sqrt()
        };
        let mean_r = mean(|t| t.avg_trace_dist_r);
        let mean_b = mean(|t| t.avg_trace_dist_b);
        results.push(DecouplingStats {
            n,
            trials: cfg.trials,
            delta: cfg.delta,
            xi1: cfg.xi1,
            xi2: cfg.xi2,
            seed: cfg.seed,
            typical_dim: t,
            atypical_mass: atypical,
            mean_dist_r: mean_r,
            mean_dist_b: mean_b,
            std_dist_r: std(|t| t.avg_trace_dist_r, mean_r),
            std_dist_b: std(|t| t.avg_trace_dist_b, mean_b),
            mean_joint_success: mean(|t| t.joint_success_fraction),
            per_trial,
            notes,
        });
    }
    Ok(results)
}

/// Component filter for the stronger projection variant: a 0/1 weight per rest
/// index keeping only components whose B and R letter sequences are typical in
/// their own eigenbases. Only single-label B and R groups are supported.
fn rest_typical_filter(
    s: &MultiState,
    b_group: &[&str],
    r_group: &[&str],
    n: usize,
    delta: f64,
) -> Result<(Vec<CMatrix>, usize)> {
    if b_group.len() != 1 || r_group.len() != 1 {
        return Err(TypError::InvalidInput(
            "project_all supports single-label B and R groups".into(),
        ));
    }
    // per rest subsystem: projector onto its typical letters is built per
    // group below; here we build per-group rank filters
    let mut projectors = Vec::new();
    let mut kept = 1usize;
    for group in [b_group, r_group] {
        let marg = s.partial_trace(group)?;
        let eig = herm_eig(marg.rho())?;
        let p: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        let typ = typical_projector(&p, &eig.eigenvectors, n, delta)?;
        kept *= typ.dim();
        projectors.push(typ.projector());
    }
    Ok((projectors, kept))
}

/// Apply the B and R typical projectors to the rest index of the projected
/// amplitude matrix. Rest layout is copy-major (B then R per copy, for
/// single-label groups), so the projector over B^n (x) R^n must be permuted
/// into that layout; this is done by routing each column through VecState.
fn apply_rest_filter(projected: &CMatrix, projectors: &[CMatrix]) -> Result<CMatrix> {
    // projectors[0] acts on B^n (copy-major), projectors[1] on R^n.
    // Rest columns are (B_1 R_1 B_2 R_2 ...); split by the B positions to get
    // a (B^n x R^n) matrix per typical row, project both sides, and fold back.
    let t = projected.rows();
    let rest_dim = projected.cols();
    let db_n = projectors[0].rows();
    let dr_n = projectors[1].rows();
    if db_n * dr_n != rest_dim {
        return Err(TypError::InvalidInput(
            "rest dimension does not factor into B^n x R^n".into(),
        ));
    }
    let ((db, ncop), (dr, _)) = integer_root(db_n, dr_n, rest_dim)?;
    let dims: Vec<usize> = (0..ncop).flat_map(|_| [db, dr]).collect();
    let b_positions: Vec<usize> = (0..ncop).map(|k| 2 * k).collect();
    let mut out = CMatrix::zeros(t, rest_dim);
    for row in 0..t {
        let amps: Vec<Complex64> = (0..rest_dim).map(|k| projected[(row, k)]).collect();
        let vs = VecState {
            dims: dims.clone(),
            amps,
        };
        let x = vs.split(&b_positions); // (B^n x R^n)
        let y = projectors[0].matmul(&x).matmul(&projectors[1].adjoint());
        // fold back into the interleaved (B_1 R_1 ... B_n R_n) layout
        for bi in 0..db_n {
            let mut b_digits = vec![0usize; ncop];
            let mut bb = bi;
            for k in (0..ncop).rev() {
                b_digits[k] = bb % db;
                bb /= db;
            }
            for ri in 0..dr_n {
                let mut r_digits = vec![0usize; ncop];
                let mut rr = ri;
                for k in (0..ncop).rev() {
                    r_digits[k] = rr % dr;
                    rr /= dr;
                }
                let mut idx = 0usize;
                for k in 0..ncop {
                    idx = idx * db + b_digits[k];
                    idx = idx * dr + r_digits[k];
                }
                out[(row, idx)] = y[(bi, ri)];
            }
        }
    }
    Ok(out)
}

/// Recover per-copy dimensions (d_b, n) and (d_r, n) from the n-fold block
/// sizes. Only needed for the project_all variant with single-label groups.
fn integer_root(
    db_n: usize,
    dr_n: usize,
    rest_dim: usize,
) -> Result<((usize, usize), (usize, usize))> {
    for n in 1..=24usize {
        for db in 2..=16usize {
            if db.checked_pow(n as u32) != Some(db_n) {
                continue;
            }
            for dr in 2..=16usize {
                if dr.checked_pow(n as u32) == Some(dr_n) && db_n * dr_n == rest_dim {
                    return Ok(((db, n), (dr, n)));
                }
            }
        }
    }
    Err(TypError::InvalidInput(
        "could not factor rest dimensions into per-copy blocks".into(),
    ))
}
