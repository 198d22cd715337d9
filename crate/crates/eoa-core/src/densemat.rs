//! Dense complex matrix kernel: Hermitian eigendecomposition, trace norm,
//! fidelity and distance measures.
//!
//! Everything above this module (states, entropies, measurements) reduces to
//! the eigensolver here. Matrices are small (dimension up to a few hundred),
//! so a cyclic Jacobi iteration on the complex Hermitian form is used rather
//! than an external LAPACK binding.

use num_complex::Complex64;
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

/// Default numerical tolerance, overridable process-wide via [`set_tolerance`].
static TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0);

const DEFAULT_TOL: f64 = 1e-9;

/// Current global tolerance used for Hermiticity/PSD checks.
pub fn tolerance() -> f64 {
    let bits = TOLERANCE_BITS.load(Ordering::Relaxed);
    if bits == 0 {
        DEFAULT_TOL
    } else {
        f64::from_bits(bits)
    }
}

/// Override the global tolerance (applies to subsequent checks).
pub fn set_tolerance(tol: f64) {
    TOLERANCE_BITS.store(tol.to_bits(), Ordering::Relaxed);
}

/// Eigenvalues in (-CLAMP_TOL, 0) are clamped to zero before any sqrt or log;
/// anything more negative is a genuine PSD violation.
pub(crate) const PSD_CLAMP: f64 = 1e-9;

const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Error)]
pub enum MatError {
    #[error("matrix is not Hermitian (max |M - M'| = {0:.3e})")]
    NotHermitian(f64),
    #[error("Jacobi iteration failed to converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("operator is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, MatError>;

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        CMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// Rank-one |v><v|.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> CMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, a: Complex64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * a).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }

    /// Kronecker product, row-major convention (self is the more significant
    /// factor).
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise absolute value of self - other.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Deviation from Hermitian symmetry, max-norm.
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_defect() <= tol
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Apply the matrix to a vector.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigResult {
    /// Eigenvalues sorted in descending order.
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose k-th column is the eigenvector of eigenvalues[k].
    pub eigenvectors: CMatrix,
}

impl EigResult {
    /// Rebuild V diag(f(lambda)) V'.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let v = &self.eigenvectors;
        let n = self.eigenvalues.len();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let flam = f(lam);
            if flam == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += v[(i, k)] * v[(j, k)].conj() * flam;
                }
            }
        }
        out
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
pub fn herm_eig(m: &CMatrix) -> Result<EigResult> {
    if !m.is_square() {
        return Err(MatError::DimensionMismatch(format!(
            "herm_eig needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let defect = m.hermiticity_defect();
    if defect > tolerance() {
        return Err(MatError::NotHermitian(defect));
    }
    let n = m.rows;
    let mut a = m.clone();
    // symmetrize round-off away so the iteration sees an exactly Hermitian input
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
    let mut v = CMatrix::identity(n);
    let scale = a.max_abs().max(1.0);
    let stop = 1e-14 * scale;
    let mut converged = n < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let r = a[(p, q)].norm();
                off = off.max(r);
                if r < stop {
                    continue;
                }
                let phase = a[(p, q)] / r;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = I except G[p,p]=c, G[p,q]=s*phase, G[q,p]=-s*conj(phase), G[q,q]=c
                // columns: A <- A G
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * s * phase.conj();
                    a[(k, q)] = akp * s * phase + akq * c;
                }
                // rows: A <- G' A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * s * phase;
                    a[(q, k)] = apk * s * phase.conj() + aqk * c;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * s * phase.conj();
                    v[(k, q)] = vkp * s * phase + vkq * c;
                }
            }
        }
        if off < stop {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(MatError::NoConvergence(JACOBI_MAX_SWEEPS));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(EigResult {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues of a nominal density operator, clamped to the PSD cone.
///
/// Values in (-PSD_CLAMP, 0) are round-off from partial traces and are set to
/// zero; anything more negative is rejected.
pub fn psd_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    let eig = herm_eig(m)?;
    eig.eigenvalues
        .into_iter()
        .map(|lam| {
            if lam < -PSD_CLAMP {
                Err(MatError::NotPsd(lam))
            } else {
                Ok(lam.max(0.0))
            }
        })
        .collect()
}

/// Trace norm: sum of singular values.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    assert!(m.is_square(), "trace norm of a non-square operator");
    if m.is_hermitian(tolerance()) {
        let eig = herm_eig(m)?;
        return Ok(eig.eigenvalues.iter().map(|l| l.abs()).sum());
    }
    // general case via the spectrum of M'M
    let gram = m.adjoint().matmul(m);
    let eig = herm_eig(&gram)?;
    Ok(eig
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .sum())
}

/// Trace distance D(rho, sigma) = ||rho - sigma||_1 / 2.
pub fn trace_distance(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    Ok(0.5 * trace_norm(&rho.sub(sigma))?)
}

/// Principal square root of a PSD operator, via its clamped spectrum.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let eig = herm_eig(m)?;
    if let Some(&bad) = eig.eigenvalues.iter().find(|&&l| l < -PSD_CLAMP) {
        return Err(MatError::NotPsd(bad));
    }
    Ok(eig.map_spectrum(|l| l.max(0.0).sqrt()))
}

fn check_subnormalized(m: &CMatrix) -> Result<f64> {
    let tr = m.trace().re;
    if tr > 1.0 + tolerance() {
        return Err(MatError::DimensionMismatch(format!(
            "trace {tr} exceeds 1"
        )));
    }
    Ok(tr)
}

/// Uhlmann fidelity F = Tr sqrt(sqrt(rho) sigma sqrt(rho)) = ||sqrt(rho) sqrt(sigma)||_1.
pub fn fidelity(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    check_subnormalized(rho)?;
    check_subnormalized(sigma)?;
    let sr = psd_sqrt(rho)?;
    let ss = psd_sqrt(sigma)?;
    let f = trace_norm(&sr.matmul(&ss))?;
    Ok(f.min(1.0))
}

/// Purified distance between subnormalized states, via the generalized
/// fidelity F + sqrt((1 - Tr rho)(1 - Tr sigma)).
pub fn purified_distance(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    let tr_r = check_subnormalized(rho)?;
    let tr_s = check_subnormalized(sigma)?;
    let f = fidelity(rho, sigma)?;
    let gap_r = (1.0 - tr_r).max(0.0);
    let gap_s = (1.0 - tr_s).max(0.0);
    let fbar = (f + (gap_r * gap_s).sqrt()).min(1.0);
    Ok((1.0 - fbar * fbar).max(0.0).sqrt())
}
