//! Entropic quantities and rate bounds: von Neumann entropy, coherent
//! information, the hashing bound, the random-measurement lower bound L,
//! min-cut coherent information and the hierarchical chain rate.

use crate::densemat::{self, psd_eigenvalues, MatError};
use crate::qstate::{MultiState, QStateError, RoleMap};
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RatesError {
    #[error("subsystem groups overlap: {0}")]
    OverlappingSystems(String),
    #[error("too many helpers for exact cut enumeration: {0} > 20")]
    TooManyHelpers(usize),
    #[error("empty chain")]
    EmptyChain,
    #[error(transparent)]
    Q(#[from] QStateError),
    #[error(transparent)]
    Mat(#[from] MatError),
}

pub type Result<T> = std::result::Result<T, RatesError>;

const MAX_HELPERS: usize = 20;
const DEGENERACY_TOL: f64 = 1e-6;

/// Logarithm base for all entropies. Rates are in ebits (base 2) by default;
/// the base can be switched to e for cross-checks.
static LOG_BASE_BITS: AtomicU64 = AtomicU64::new(0);

pub fn log_base() -> f64 {
    let bits = LOG_BASE_BITS.load(Ordering::Relaxed);
    if bits == 0 {
        2.0
    } else {
        f64::from_bits(bits)
    }
}

pub fn set_log_base(base: f64) {
    assert!(base > 1.0);
    LOG_BASE_BITS.store(base.to_bits(), Ordering::Relaxed);
}

/// Named entropic quantities and bounds computed for a state.
#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub quantities: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimizing_cut: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RateReport {
    fn new() -> Self {
        RateReport {
            quantities: BTreeMap::new(),
            minimizing_cut: None,
            notes: Vec::new(),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.quantities.get(name).copied()
    }

    /// One quantity per row: name,value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value\n");
        for (name, value) in &self.quantities {
            out.push_str(&format!("{name},{value:.9}\n"));
        }
        out
    }
}

fn entropy_of_spectrum(spectrum: &[f64]) -> f64 {
    let ln_base = log_base().ln();
    -spectrum
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
        / ln_base
}

/// Von Neumann entropy of the reduced state on the named subsystems.
pub fn von_neumann(s: &MultiState, subsystems: &[&str]) -> Result<f64> {
    let reduced;
    let rho = if subsystems.len() == s.register().len()
        && subsystems
            .iter()
            .all(|l| s.register().position(l).is_ok())
    {
        s.rho()
    } else {
        reduced = s.partial_trace(subsystems)?;
        reduced.rho()
    };
    let spectrum = psd_eigenvalues(rho)?;
    Ok(entropy_of_spectrum(&spectrum))
}

fn check_disjoint(x: &[&str], y: &[&str]) -> Result<()> {
    for l in x {
        if y.contains(l) {
            return Err(RatesError::OverlappingSystems(l.to_string()));
        }
    }
    if x.is_empty() || y.is_empty() {
        return Err(RatesError::OverlappingSystems(
            "empty subsystem group".into(),
        ));
    }
    Ok(())
}

/// Coherent information I(X>Y) = S(Y) - S(XY). May be negative.
pub fn coherent_info(s: &MultiState, x: &[&str], y: &[&str]) -> Result<f64> {
    check_disjoint(x, y)?;
    let joint: Vec<&str> = x.iter().chain(y.iter()).cloned().collect();
    Ok(von_neumann(s, y)? - von_neumann(s, &joint)?)
}

/// Conditional entropy S(X|Y) = S(XY) - S(Y).
pub fn conditional_entropy(s: &MultiState, x: &[&str], y: &[&str]) -> Result<f64> {
    check_disjoint(x, y)?;
    let joint: Vec<&str> = x.iter().chain(y.iter()).cloned().collect();
    Ok(von_neumann(s, &joint)? - von_neumann(s, y)?)
}

/// Hashing lower bound on distillable entanglement, clipped at zero.
pub fn hashing_bound(s: &MultiState, a: &[&str], b: &[&str]) -> Result<f64> {
    Ok(coherent_info(s, a, b)?.max(0.0))
}

fn role_refs<'a>(roles: &'a RoleMap) -> (Vec<&'a str>, Vec<&'a str>, Vec<&'a str>) {
    (
        vec![roles.recipient_a.as_str()],
        vec![roles.recipient_b.as_str()],
        roles.helpers.iter().map(String::as_str).collect(),
    )
}

/// Restrict to the role subsystems (dropping the reference and anything
/// unnamed), so rate quantities refer to the tripartite problem state.
fn problem_state(s: &MultiState, roles: &RoleMap) -> Result<MultiState> {
    roles.validate(s.register())?;
    let wanted: Vec<&str> = s
        .register()
        .labels()
        .filter(|l| {
            *l == roles.recipient_a
                || *l == roles.recipient_b
                || roles.helpers.iter().any(|h| h == l)
        })
        .collect();
    if wanted.len() == s.register().len() {
        Ok(s.clone())
    } else {
        Ok(s.partial_trace(&wanted)?)
    }
}

/// Flag near-degenerate entropy pairs that the random-measurement analysis
/// assumes distinct: S(AB) vs S(R) and S(AR) vs S(B), with the purifying
/// entropies obtained from complements.
fn degeneracy_notes(s: &MultiState, a: &[&str], b: &[&str], c: &[&str]) -> Result<Vec<String>> {
    let abc: Vec<&str> = a.iter().chain(b).chain(c).cloned().collect();
    let ab: Vec<&str> = a.iter().chain(b).cloned().collect();
    let bc: Vec<&str> = b.iter().chain(c).cloned().collect();
    let s_ab = von_neumann(s, &ab)?;
    let s_r = von_neumann(s, &abc)?; // = S(R) on the purification
    let s_ar = von_neumann(s, &bc)?; // = S(AR) on the purification
    let s_b = von_neumann(s, b)?;
    let mut notes = Vec::new();
    if (s_ab - s_r).abs() < DEGENERACY_TOL {
        notes.push(format!(
            "degenerate entropies: S(AB) = {s_ab:.9} ~ S(R) = {s_r:.9}"
        ));
    }
    if (s_ar - s_b).abs() < DEGENERACY_TOL {
        notes.push(format!(
            "degenerate entropies: S(AR) = {s_ar:.9} ~ S(B) = {s_b:.9}"
        ));
    }
    Ok(notes)
}

/// Random-measurement lower bound: reports I(A>B), I(AC>B), I(A>BC),
/// L = min of the latter two, and bound = max{I(A>B), L} clipped at zero.
pub fn assisted_lower_bound_l(s: &MultiState, roles: &RoleMap) -> Result<RateReport> {
    let (a, b, c) = role_refs(roles);
    let s = problem_state(s, roles)?;
    // no helpers: both L terms coincide with I(A>B)
    let ac: Vec<&str> = a.iter().chain(c.iter()).cloned().collect();
    let bc: Vec<&str> = b.iter().chain(c.iter()).cloned().collect();
    let i_ab = coherent_info(&s, &a, &b)?;
    let i_ac_b = coherent_info(&s, &ac, &b)?;
    let i_a_bc = coherent_info(&s, &a, &bc)?;
    let l = i_ac_b.min(i_a_bc);
    let mut report = RateReport::new();
    report.quantities.insert("I(A>B)".into(), i_ab);
    report.quantities.insert("I(AC>B)".into(), i_ac_b);
    report.quantities.insert("I(A>BC)".into(), i_a_bc);
    report.quantities.insert("L".into(), l);
    report
        .quantities
        .insert("bound".into(), i_ab.max(l).max(0.0));
    if !c.is_empty() {
        report.notes = degeneracy_notes(&s, &a, &b, &c)?;
    }
    Ok(report)
}

/// Witness quantities for beating the hashing bound: I(C>AB) and the strong
/// subadditivity gap S(A|B) - S(A|BC).
#[derive(Debug, Clone, Serialize)]
pub struct HashingWitness {
    pub beats: bool,
    pub i_c_ab: f64,
    pub ssa_gap: f64,
}

pub fn beats_hashing(s: &MultiState, roles: &RoleMap) -> Result<HashingWitness> {
    let (a, b, c) = role_refs(roles);
    if c.is_empty() {
        return Ok(HashingWitness {
            beats: false,
            i_c_ab: 0.0,
            ssa_gap: 0.0,
        });
    }
    let s = problem_state(s, roles)?;
    let ab: Vec<&str> = a.iter().chain(b.iter()).cloned().collect();
    let bc: Vec<&str> = b.iter().chain(c.iter()).cloned().collect();
    let i_c_ab = coherent_info(&s, &c, &ab)?;
    let ssa_gap = conditional_entropy(&s, &a, &b)? - conditional_entropy(&s, &a, &bc)?;
    let tol = 1e-9;
    Ok(HashingWitness {
        beats: i_c_ab > tol && ssa_gap > tol,
        i_c_ab,
        ssa_gap,
    })
}

/// Exact minimum over all 2^m helper bipartitions of I(AT > B Tbar), plus the
/// bound max{I(A>B), Icmin}. Cuts are enumerated by increasing size, then
/// lexicographically in helper order; ties in the minimum are listed in notes.
pub fn min_cut_coherent_info(s: &MultiState, roles: &RoleMap) -> Result<RateReport> {
    let (a, b, helpers) = role_refs(roles);
    let m = helpers.len();
    if m > MAX_HELPERS {
        return Err(RatesError::TooManyHelpers(m));
    }
    let s = problem_state(s, roles)?;
    let i_ab = coherent_info(&s, &a, &b)?;

    // subsets ordered by popcount then by bitmask (bit i = helpers[i])
    let mut masks: Vec<u32> = (0..(1u32 << m)).collect();
    masks.sort_by_key(|&mask| (mask.count_ones(), mask));

    let mut best: Option<(f64, u32)> = None;
    let mut ties: Vec<u32> = Vec::new();
    for &mask in &masks {
        let in_t: Vec<&str> = (0..m).filter(|&i| mask >> i & 1 == 1).map(|i| helpers[i]).collect();
        let out_t: Vec<&str> = (0..m).filter(|&i| mask >> i & 1 == 0).map(|i| helpers[i]).collect();
        let at: Vec<&str> = a.iter().cloned().chain(in_t).collect();
        let bt: Vec<&str> = b.iter().cloned().chain(out_t).collect();
        let value = coherent_info(&s, &at, &bt)?;
        match best {
            None => {
                best = Some((value, mask));
                ties = vec![mask];
            }
            Some((cur, _)) => {
                if value < cur - 1e-12 {
                    best = Some((value, mask));
                    ties = vec![mask];
                } else if (value - cur).abs() <= 1e-12 {
                    ties.push(mask);
                }
            }
        }
    }
    let (icmin, best_mask) = best.expect("at least the empty cut");
    let cut_labels = |mask: u32| -> Vec<String> {
        (0..m)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| helpers[i].to_string())
            .collect()
    };
    let mut report = RateReport::new();
    report.quantities.insert("I(A>B)".into(), i_ab);
    report.quantities.insert("Icmin".into(), icmin);
    report
        .quantities
        .insert("bound".into(), i_ab.max(icmin).max(0.0));
    report.minimizing_cut = Some(cut_labels(best_mask));
    if ties.len() > 1 {
        for &mask in &ties {
            report
                .notes
                .push(format!("minimizing cut tie: {:?}", cut_labels(mask)));
        }
    }
    Ok(report)
}

/// One link of a repeater chain: a state together with its two end labels.
pub struct ChainLink<'a> {
    pub state: &'a MultiState,
    pub from: &'a str,
    pub to: &'a str,
}

/// Hierarchical repeater-chain rate: minimum over links of the link coherent
/// information I(from > to), clipped at zero at the end.
pub fn chain_hierarchical_rate(links: &[ChainLink]) -> Result<f64> {
    if links.is_empty() {
        return Err(RatesError::EmptyChain);
    }
    let mut worst = f64::INFINITY;
    for link in links {
        let i = coherent_info(link.state, &[link.from], &[link.to])?;
        worst = worst.min(i);
    }
    Ok(worst.max(0.0))
}

/// Fannes continuity bound eta(eps) * log(dim) with
/// eta(x) = x - x log x for x <= 1/e, else x + log(e)/e.
pub fn fannes_bound(eps: f64, dim: usize) -> f64 {
    assert!(eps >= 0.0);
    let ln_base = log_base().ln();
    let log = |x: f64| x.ln() / ln_base;
    let eta = if eps == 0.0 {
        0.0
    } else if eps <= 1.0 / std::f64::consts::E {
        eps - eps * log(eps)
    } else {
        eps + log(std::f64::consts::E) / std::f64::consts::E
    };
    eta * log(dim as f64)
}

/// Per-cut entanglement-entropy relaxation of the (uncomputable) cut
/// distillable entanglement: min over cuts of S(AT). Exact for pure problem
/// states; labeled a relaxation otherwise.
pub fn cut_upper_bound_report(s: &MultiState, roles: &RoleMap) -> Result<RateReport> {
    let (a, _b, helpers) = role_refs(roles);
    let m = helpers.len();
    if m > MAX_HELPERS {
        return Err(RatesError::TooManyHelpers(m));
    }
    let s = problem_state(s, roles)?;
    let purity_defect = {
        let spectrum = psd_eigenvalues(s.rho())?;
        1.0 - spectrum.first().copied().unwrap_or(0.0)
    };
    let is_pure = purity_defect < 1e-9;

    let mut masks: Vec<u32> = (0..(1u32 << m)).collect();
    masks.sort_by_key(|&mask| (mask.count_ones(), mask));
    let mut best = f64::INFINITY;
    let mut best_mask = 0u32;
    for &mask in &masks {
        let at: Vec<&str> = a
            .iter()
            .cloned()
            .chain((0..m).filter(|&i| mask >> i & 1 == 1).map(|i| helpers[i]))
            .collect();
        let value = von_neumann(&s, &at)?;
        if value < best - 1e-12 {
            best = value;
            best_mask = mask;
        }
    }
    let mut report = RateReport::new();
    report.quantities.insert("upper".into(), best);
    report.minimizing_cut = Some(
        (0..m)
            .filter(|&i| best_mask >> i & 1 == 1)
            .map(|i| helpers[i].to_string())
            .collect(),
    );
    if !is_pure {
        report
            .notes
            .push("relaxation: problem state is mixed, cut value is an entanglement-entropy relaxation".into());
    }
    Ok(report)
}

/// Trace distance convenience re-export for report consumers.
pub fn trace_distance(rho: &MultiState, sigma: &MultiState) -> Result<f64> {
    Ok(densemat::trace_distance(rho.rho(), sigma.rho())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::qstate::{MultiState, Register};
    use num_complex::Complex64;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn h2(p: f64) -> f64 {
        if p <= 0.0 || p >= 1.0 {
            0.0
        } else {
            -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
        }
    }

    fn random_pure(rng: &mut impl Rng, register: Register) -> MultiState {
        let d = register.total_dim();
        let amps: Vec<Complex64> = (0..d)
            .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        MultiState::pure(register, &amps).unwrap()
    }

    fn random_density(rng: &mut impl Rng, register: Register) -> MultiState {
        let d = register.total_dim();
        let g = crate::densemat::CMatrix::from_fn(d, d, |_, _| {
            c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let psd = g.matmul(&g.adjoint());
        let tr = psd.trace().re;
        MultiState::from_density(register, psd.scale(c(1.0 / tr, 0.0))).unwrap()
    }

    #[test]
    fn entropy_basics() {
        let (bell, _) = examples::maximally_entangled(2);
        assert!(von_neumann(&bell, &["A", "B"]).unwrap().abs() < 1e-10);
        assert!((von_neumann(&bell, &["A"]).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn entropy_of_paper_links() {
        let ac1 = examples::link_ac1();
        assert!((von_neumann(&ac1, &["A"]).unwrap() - h2(0.25)).abs() < 1e-10);
        let bc2r = examples::repeater_link_bc2r();
        let lam = (1.0 - 0.5f64.sqrt()) / 2.0;
        assert!((von_neumann(&bc2r, &["R"]).unwrap() - h2(lam)).abs() < 1e-10);
    }

    #[test]
    fn natural_log_toggle() {
        let (bell, _) = examples::maximally_entangled(2);
        set_log_base(std::f64::consts::E);
        let nats = von_neumann(&bell, &["A"]).unwrap();
        set_log_base(2.0);
        assert!((nats - std::f64::consts::LN_2).abs() < 1e-10);
    }

    #[test]
    fn coherent_info_on_factorized_chain() {
        let (psi, _) = examples::factorized_chain();
        let lam = (1.0 - 0.5f64.sqrt()) / 2.0;
        let i_a_bc = coherent_info(&psi, &["A"], &["B", "C1", "C2"]).unwrap();
        assert!((i_a_bc - h2(0.25)).abs() < 1e-9);
        assert!((i_a_bc * 100.0).round() / 100.0 == 0.81);
        let i_ac_b = coherent_info(&psi, &["A", "C1", "C2"], &["B"]).unwrap();
        assert!((i_ac_b - (1.0 - h2(lam))).abs() < 1e-9);
        assert!((i_ac_b * 100.0).round() / 100.0 == 0.40);
        let i_ab = coherent_info(&psi, &["A"], &["B"]).unwrap();
        assert!((i_ab + h2(0.25)).abs() < 1e-9);
        assert!(coherent_info(&psi, &["A"], &["A"]).is_err());
    }

    #[test]
    fn coherent_info_product_additivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let a = random_density(&mut rng, Register::qubits(&["A"]));
            let b = random_density(&mut rng, Register::qubits(&["B"]));
            let t = a.tensor(&b).unwrap();
            let i = coherent_info(&t, &["A"], &["B"]).unwrap();
            let sa = von_neumann(&a, &["A"]).unwrap();
            assert!((i + sa).abs() < 1e-9);
            assert!(hashing_bound(&t, &["A"], &["B"]).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn hashing_bound_bell() {
        let (bell, _) = examples::maximally_entangled(2);
        assert!((hashing_bound(&bell, &["A"], &["B"]).unwrap() - 1.0).abs() < 1e-10);
        let (psi, _) = examples::factorized_chain();
        assert_eq!(hashing_bound(&psi, &["A"], &["B"]).unwrap(), 0.0);
    }

    #[test]
    fn assisted_bound_on_paper_states() {
        let (psi, roles) = examples::factorized_chain();
        let report = assisted_lower_bound_l(&psi, &roles).unwrap();
        let lam = (1.0 - 0.5f64.sqrt()) / 2.0;
        let expect_l = 1.0 - h2(lam);
        assert!((report.get("L").unwrap() - expect_l).abs() < 1e-9);
        assert!((report.get("bound").unwrap() - expect_l).abs() < 1e-9);
        // L attained at I(AC>B)
        assert!((report.get("I(AC>B)").unwrap() - expect_l).abs() < 1e-9);

        let (phi, roles) = examples::cnot_corrupted();
        let report_phi = assisted_lower_bound_l(&phi, &roles).unwrap();
        assert!((report_phi.get("L").unwrap() - report.get("L").unwrap()).abs() < 1e-9);
        assert!(
            (report_phi.get("I(AC>B)").unwrap() - report.get("I(AC>B)").unwrap()).abs() < 1e-9
        );
        assert!(
            (report_phi.get("I(A>BC)").unwrap() - report.get("I(A>BC)").unwrap()).abs() < 1e-9
        );
    }

    #[test]
    fn assisted_bound_collapses_on_pure_tripartite() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let s = random_pure(&mut rng, Register::qubits(&["A", "B", "C"]));
            let roles = crate::qstate::RoleMap::new("A", "B", &["C"], None);
            let report = assisted_lower_bound_l(&s, &roles).unwrap();
            let expect = von_neumann(&s, &["A"])
                .unwrap()
                .min(von_neumann(&s, &["B"]).unwrap());
            assert!((report.get("bound").unwrap() - expect).abs() < 1e-8);
        }
    }

    #[test]
    fn beats_hashing_product_state_is_false() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let c_state = random_density(&mut rng, Register::qubits(&["C"]));
        let ab = random_density(&mut rng, Register::qubits(&["A", "B"]));
        let s = ab.tensor(&c_state).unwrap();
        let roles = crate::qstate::RoleMap::new("A", "B", &["C"], None);
        let w = beats_hashing(&s, &roles).unwrap();
        assert!(!w.beats);
        assert!(w.i_c_ab <= 1e-9);
    }

    #[test]
    fn beats_hashing_witness_and_implication() {
        // GHZ-like pure state: I(C>AB) = S(AB) > 0, strict SSA gap
        let mut amps = vec![c(0.0, 0.0); 8];
        amps[0] = c(0.5f64.sqrt(), 0.0);
        amps[7] = c(0.5f64.sqrt(), 0.0);
        let ghz = MultiState::pure(Register::qubits(&["A", "B", "C"]), &amps).unwrap();
        let roles = crate::qstate::RoleMap::new("A", "B", &["C"], None);
        let w = beats_hashing(&ghz, &roles).unwrap();
        assert!(w.beats, "witness: {w:?}");
        // implication: beats => L > I(A>B)
        let report = assisted_lower_bound_l(&ghz, &roles).unwrap();
        assert!(report.get("L").unwrap() > report.get("I(A>B)").unwrap() + 1e-9);
    }

    #[test]
    fn min_cut_no_helpers_is_coherent_info() {
        let (bell, roles) = examples::maximally_entangled(2);
        let report = min_cut_coherent_info(&bell, &roles).unwrap();
        assert!((report.get("Icmin").unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(report.minimizing_cut.as_deref(), Some(&[][..]));
    }

    #[test]
    fn min_cut_one_helper_matches_l() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let s = random_density(&mut rng, Register::qubits(&["A", "B", "C"]));
            let roles = crate::qstate::RoleMap::new("A", "B", &["C"], None);
            let mc = min_cut_coherent_info(&s, &roles).unwrap();
            let l = assisted_lower_bound_l(&s, &roles).unwrap();
            assert!((mc.get("Icmin").unwrap() - l.get("L").unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn min_cut_pure_state_collapse() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let s = random_pure(&mut rng, Register::qubits(&["A", "B", "C1", "C2"]));
            let roles = crate::qstate::RoleMap::new("A", "B", &["C1", "C2"], None);
            let mc = min_cut_coherent_info(&s, &roles).unwrap();
            // on pure states I(AT > B Tbar) = S(AT), so Icmin = min_T S(AT)
            let mut expect = f64::INFINITY;
            for cut in [vec!["A"], vec!["A", "C1"], vec!["A", "C2"], vec!["A", "C1", "C2"]] {
                expect = expect.min(von_neumann(&s, &cut).unwrap());
            }
            assert!((mc.get("Icmin").unwrap() - expect).abs() < 1e-8);
            // Theorem-3 bound never exceeds the pure-state formula
            assert!(mc.get("bound").unwrap() <= expect + 1e-9);
            let upper = cut_upper_bound_report(&s, &roles).unwrap();
            assert!((upper.get("upper").unwrap() - expect).abs() < 1e-9);
            assert!(upper.notes.is_empty());
        }
    }

    #[test]
    fn min_cut_guard() {
        let labels: Vec<String> = (0..21).map(|i| format!("C{i}")).collect();
        let mut roles = crate::qstate::RoleMap::new("A", "B", &[], None);
        roles.helpers = labels;
        let (bell, _) = examples::maximally_entangled(2);
        assert!(matches!(
            min_cut_coherent_info(&bell, &roles),
            Err(RatesError::TooManyHelpers(21))
        ));
    }

    #[test]
    fn chain_rate_bell_pairs() {
        let (bell, _) = examples::maximally_entangled(2);
        let links = [
            ChainLink { state: &bell, from: "A", to: "B" },
            ChainLink { state: &bell, from: "A", to: "B" },
        ];
        assert!((chain_hierarchical_rate(&links).unwrap() - 1.0).abs() < 1e-10);
        assert!(matches!(
            chain_hierarchical_rate(&[]),
            Err(RatesError::EmptyChain)
        ));
    }

    #[test]
    fn chain_rate_on_paper_example() {
        let lam = (1.0 - 0.5f64.sqrt()) / 2.0;
        let ac1 = examples::link_ac1();
        let bc2r = examples::repeater_link_bc2r();
        let links = [
            ChainLink { state: &ac1, from: "A", to: "C1" },
            ChainLink { state: &bc2r, from: "C2", to: "B" },
        ];
        let rate = chain_hierarchical_rate(&links).unwrap();
        assert!((rate - (1.0 - h2(lam))).abs() < 1e-9);

        // CNOT corruption: I(A>C1) on phi is zero, so the chain rate collapses
        let (phi, _) = examples::cnot_corrupted();
        let phi_ac1 = phi.partial_trace(&["A", "C1"]).unwrap();
        let phi_bc2 = phi.partial_trace(&["B", "C2", "R"]).unwrap();
        let links = [
            ChainLink { state: &phi_ac1, from: "A", to: "C1" },
            ChainLink { state: &phi_bc2, from: "C2", to: "B" },
        ];
        assert!(chain_hierarchical_rate(&links).unwrap().abs() < 1e-9);
    }

    #[test]
    fn fannes_values() {
        assert_eq!(fannes_bound(0.0, 2), 0.0);
        let expect = 0.1 + 0.1 * 10f64.log2();
        assert!((fannes_bound(0.1, 2) - expect).abs() < 1e-12);
        // continuity at x = 1/e
        let x = 1.0 / std::f64::consts::E;
        let left = x - x * x.log2();
        let right = x + std::f64::consts::E.log2() / std::f64::consts::E;
        assert!((left - right).abs() < 1e-12);
    }

    #[test]
    fn strong_subadditivity_corpus() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for trial in 0..1000 {
            let s = random_density(&mut rng, Register::qubits(&["A", "B", "C"]));
            let i_a_bc = coherent_info(&s, &["A"], &["B", "C"]).unwrap();
            let i_ab = coherent_info(&s, &["A"], &["B"]).unwrap();
            assert!(i_a_bc >= i_ab - 1e-9, "SSA violated at trial {trial}");
        }
    }

    #[test]
    fn l_bounded_by_i_a_bc() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let s = random_density(&mut rng, Register::qubits(&["A", "B", "C"]));
            let roles = crate::qstate::RoleMap::new("A", "B", &["C"], None);
            let report = assisted_lower_bound_l(&s, &roles).unwrap();
            assert!(report.get("L").unwrap() <= report.get("I(A>BC)").unwrap() + 1e-9);
        }
    }

    #[test]
    fn cnot_robustness_of_link_coherent_info() {
        let (psi, _) = examples::factorized_chain();
        let i_a_c1_psi = coherent_info(&psi, &["A"], &["C1"]).unwrap();
        assert!((i_a_c1_psi - h2(0.25)).abs() < 1e-9);
        let (phi, _) = examples::cnot_corrupted();
        let i_a_c1_phi = coherent_info(&phi, &["A"], &["C1"]).unwrap();
        assert!(i_a_c1_phi.abs() < 1e-9);
    }

    #[test]
    fn degeneracy_note_emitted() {
        // pure tripartite: S(AB) = S(C) = S(R)? For a pure state on role
        // labels the purification is trivial, S(R) = 0; pick a product state
        // where S(AB) = 0 = S(R) to trigger the note.
        let zero = MultiState::pure(
            Register::qubits(&["A", "B", "C"]),
            &{
                let mut amps = vec![c(0.0, 0.0); 8];
                amps[0] = c(1.0, 0.0);
                amps
            },
        )
        .unwrap();
        let roles = crate::qstate::RoleMap::new("A", "B", &["C"], None);
        let report = assisted_lower_bound_l(&zero, &roles).unwrap();
        assert!(!report.notes.is_empty());
    }

    #[test]
    fn report_csv_format() {
        let (psi, roles) = examples::factorized_chain();
        let report = assisted_lower_bound_l(&psi, &roles).unwrap();
        let csv = report.to_csv();
        assert!(csv.starts_with("name,value\n"));
        assert!(csv.contains("L,0.399123963\n"));
    }
}
