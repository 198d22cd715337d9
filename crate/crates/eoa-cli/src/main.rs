//! `eoa`: rate bounds and measurement experiments for small multipartite
//! states described by JSON files.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 state-invariant
//! violation, 4 resource guard tripped.

use clap::{Parser, Subcommand};
use eoa_core::densemat::MatError;
use eoa_core::measure::{
    avg_hashing_rate, measure_helper, MeasureError, PovmDescription,
};
use eoa_core::qstate::{MultiState, QStateError, RoleMap, StateDescription};
use eoa_core::rates::{
    assisted_lower_bound_l, beats_hashing, chain_hierarchical_rate, coherent_info,
    hashing_bound, min_cut_coherent_info, ChainLink, RateReport, RatesError,
};
use eoa_core::typicality::{decoupling_experiment, DecouplingConfig, DecouplingStats, TypError};
use eoa_core::{examples, herm_eig};
use num_complex::Complex64;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "eoa", version, about = "Entanglement-rate bounds and decoupling experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Assisted rate bounds for a state file: coherent informations, L, and
    /// whether a helper measurement can beat the hashing bound
    Rates {
        state: PathBuf,
        /// override the a-recipient label
        #[arg(long)]
        a: Option<String>,
        /// override the b-recipient label
        #[arg(long)]
        b: Option<String>,
        /// override the helper labels (comma-separated)
        #[arg(long, value_delimiter = ',')]
        helpers: Option<Vec<String>>,
        #[arg(long)]
        csv: bool,
    },
    /// Minimum-cut coherent information over all helper bipartitions
    Mincut {
        state: PathBuf,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
        #[arg(long, value_delimiter = ',')]
        helpers: Option<Vec<String>>,
        #[arg(long)]
        csv: bool,
    },
    /// Apply a POVM (from a JSON file) to one helper system and report the
    /// outcome ensemble and its average hashing rate
    Measure {
        state: PathBuf,
        #[arg(long)]
        povm: PathBuf,
        #[arg(long)]
        csv: bool,
    },
    /// Built-in example states: emit their JSON and/or their rate report
    Example {
        /// one of: factorized-chain, cnot-corrupted, bc2r-link,
        /// maximally-entangled, cq
        name: String,
        /// print the state as JSON
        #[arg(long)]
        emit_state: bool,
        /// print the rate report
        #[arg(long)]
        rates: bool,
        /// probabilities for the cq example (comma-separated)
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        /// Schmidt rank for the maximally-entangled example
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long)]
        csv: bool,
    },
    /// Haar-random typical-subspace measurements of the helper on n copies,
    /// tracking how far outcome marginals sit from product form
    Decouple {
        state: PathBuf,
        /// copy counts (comma-separated)
        #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0.2)]
        delta: f64,
        #[arg(long, default_value_t = 0.6)]
        xi1: f64,
        #[arg(long, default_value_t = 2.0)]
        xi2: f64,
        /// RNG seed; defaults to $EOA_SEED, then 42
        #[arg(long)]
        seed: Option<u64>,
        /// helper label; defaults to the first helper role
        #[arg(long)]
        helper: Option<String>,
        /// B-side label; defaults to the b role
        #[arg(long)]
        b: Option<String>,
        /// reference label; defaults to the reference role, then the a role
        #[arg(long)]
        r: Option<String>,
        /// also project the B and R blocks onto their typical subspaces
        #[arg(long)]
        project_all: bool,
        #[arg(long)]
        csv: bool,
    },
    /// Run the embedded golden-value and property suite
    Selftest,
}

enum CliError {
    Usage(String),
    Invariant(String),
    Guard(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Guard(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Invariant(m) | CliError::Guard(m) => m,
        }
    }
}

impl From<QStateError> for CliError {
    fn from(e: QStateError) -> Self {
        match e {
            QStateError::UnknownLabel(_)
            | QStateError::LabelClash(_)
            | QStateError::UnknownExample(_) => CliError::Usage(e.to_string()),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<MatError> for CliError {
    fn from(e: MatError) -> Self {
        CliError::Invariant(e.to_string())
    }
}

impl From<RatesError> for CliError {
    fn from(e: RatesError) -> Self {
        match e {
            RatesError::TooManyHelpers(_) => CliError::Guard(e.to_string()),
            RatesError::OverlappingSystems(_) | RatesError::EmptyChain => {
                CliError::Usage(e.to_string())
            }
            RatesError::Q(q) => q.into(),
            RatesError::Mat(m) => m.into(),
        }
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        match e {
            MeasureError::DimensionMismatch(_) => CliError::Usage(e.to_string()),
            MeasureError::Q(q) => q.into(),
            MeasureError::Mat(m) => m.into(),
            MeasureError::Rates(r) => r.into(),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<TypError> for CliError {
    fn from(e: TypError) -> Self {
        match e {
            TypError::TooLarge(_) => CliError::Guard(e.to_string()),
            TypError::InvalidInput(_) => CliError::Usage(e.to_string()),
            TypError::DegenerateProjection => CliError::Invariant(e.to_string()),
            TypError::Q(q) => q.into(),
            TypError::Mat(m) => m.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(format!("JSON parse error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

/// Round to 9 significant digits for diff-stable output.
fn sig9(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let mag = v.abs().log10().floor();
    let f = 10f64.powf(8.0 - mag);
    (v * f).round() / f
}

fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64() {
                if n.is_f64() {
                    *v = json!(sig9(x));
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

fn emit_json(mut v: Value) {
    round_numbers(&mut v);
    println!("{}", serde_json::to_string_pretty(&v).unwrap());
}

fn load_state(
    path: &PathBuf,
    a: Option<String>,
    b: Option<String>,
    helpers: Option<Vec<String>>,
) -> Result<(MultiState, RoleMap), CliError> {
    let text = std::fs::read_to_string(path)?;
    let desc: StateDescription = serde_json::from_str(&text)?;
    let (state, mut roles) = desc.to_state()?;
    if let Some(a) = a {
        roles.recipient_a = a;
    }
    if let Some(b) = b {
        roles.recipient_b = b;
    }
    if let Some(h) = helpers {
        roles.helpers = h;
    }
    roles.validate(state.register()).map_err(|e| match e {
        QStateError::UnknownLabel(_) | QStateError::LabelClash(_) => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Invariant(other.to_string()),
    })?;
    Ok((state, roles))
}

fn default_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("EOA_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(42)
}

fn report_with_witness(state: &MultiState, roles: &RoleMap) -> Result<(RateReport, bool), CliError> {
    let report = assisted_lower_bound_l(state, roles)?;
    let witness = beats_hashing(state, roles)?;
    Ok((report, witness.beats))
}

fn print_report(report: &RateReport, extra: &[(&str, Value)], csv: bool) {
    if csv {
        let mut out = report.to_csv();
        for (name, value) in extra {
            out.push_str(&format!("{name},{value}\n"));
        }
        print!("{out}");
    } else {
        let mut v = serde_json::to_value(report).unwrap();
        for (name, value) in extra {
            v[name] = value.clone();
        }
        emit_json(v);
    }
}

fn run(cmd: Cmd) -> Result<ExitCode, CliError> {
    match cmd {
        Cmd::Rates { state, a, b, helpers, csv } => {
            let (state, roles) = load_state(&state, a, b, helpers)?;
            let (report, beats) = report_with_witness(&state, &roles)?;
            print_report(&report, &[("beatsHashing", json!(beats))], csv);
        }
        Cmd::Mincut { state, a, b, helpers, csv } => {
            let (state, roles) = load_state(&state, a, b, helpers)?;
            let report = min_cut_coherent_info(&state, &roles)?;
            print_report(&report, &[], csv);
        }
        Cmd::Measure { state, povm, csv } => {
            let (state, roles) = load_state(&state, None, None, None)?;
            let text = std::fs::read_to_string(&povm)?;
            let desc: PovmDescription = serde_json::from_str(&text)?;
            let povm = desc.to_povm()?;
            let ensemble = measure_helper(&state, &[desc.system.as_str()], &povm)?;
            let a = [roles.recipient_a.as_str()];
            let b = [roles.recipient_b.as_str()];
            let mut outcomes = Vec::new();
            for o in &ensemble.outcomes {
                outcomes.push(json!({
                    "prob": o.prob,
                    "hashing": hashing_bound(&o.state, &a, &b)?,
                }));
            }
            let avg = avg_hashing_rate(&ensemble, &a, &b)?;
            if csv {
                let mut out = String::from("outcome,prob,hashing\n");
                for (i, o) in outcomes.iter().enumerate() {
                    out.push_str(&format!(
                        "{i},{:.9},{:.9}\n",
                        o["prob"].as_f64().unwrap(),
                        o["hashing"].as_f64().unwrap()
                    ));
                }
                out.push_str(&format!("avgHashingRate,{avg:.9},\n"));
                print!("{out}");
            } else {
                emit_json(json!({
                    "system": desc.system,
                    "outcomes": outcomes,
                    "avgHashingRate": avg,
                }));
            }
        }
        Cmd::Example { name, emit_state, rates, p, m, csv } => {
            run_example(&name, emit_state, rates, p, m, csv)?;
        }
        Cmd::Decouple {
            state, n, trials, delta, xi1, xi2, seed, helper, b, r, project_all, csv,
        } => {
            if trials == 0 {
                return Err(CliError::Usage("trials must be positive".into()));
            }
            if n.is_empty() {
                return Err(CliError::Usage("need at least one copy count".into()));
            }
            let (state, roles) = load_state(&state, None, None, None)?;
            let helper = helper
                .or_else(|| roles.helpers.first().cloned())
                .ok_or_else(|| CliError::Usage("no helper label available".into()))?;
            let b = b.unwrap_or_else(|| roles.recipient_b.clone());
            let r = r
                .or_else(|| roles.reference.clone())
                .unwrap_or_else(|| roles.recipient_a.clone());
            let cfg = DecouplingConfig {
                n_list: n,
                trials,
                delta,
                xi1,
                xi2,
                seed: default_seed(seed),
                project_all,
            };
            let stats = decoupling_experiment(
                &state,
                &[helper.as_str()],
                &[b.as_str()],
                &[r.as_str()],
                &cfg,
            )?;
            if csv {
                let mut out = format!("{}\n", DecouplingStats::csv_header());
                for s in &stats {
                    out.push_str(&s.to_csv_rows());
                }
                print!("{out}");
            } else {
                emit_json(serde_json::to_value(&stats).unwrap());
            }
        }
        Cmd::Selftest => {
            return Ok(if selftest() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            });
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Deterministic pure components for the cq example: cos t |00> + sin t |11>
/// with angles spread over (0, pi/4].
fn cq_components(k: usize) -> Vec<MultiState> {
    use eoa_core::qstate::Register;
    (0..k)
        .map(|i| {
            let t = std::f64::consts::FRAC_PI_4 * (i + 1) as f64 / k as f64;
            let mut amps = vec![Complex64::new(0.0, 0.0); 4];
            amps[0] = Complex64::new(t.cos(), 0.0);
            amps[3] = Complex64::new(t.sin(), 0.0);
            MultiState::pure(Register::qubits(&["A", "B"]), &amps).unwrap()
        })
        .collect()
}

fn chain_report(state: &MultiState, roles: &RoleMap) -> Result<RateReport, CliError> {
    let (mut report, beats) = report_with_witness(state, roles)?;
    // two-stage quantities for the repeater-chain layout A,C1 | B,C2,R
    let ac1 = state.partial_trace(&["A", "C1"])?;
    let bc2 = state.partial_trace(&["B", "C2", "R"])?;
    let i_a_c1 = coherent_info(&ac1, &["A"], &["C1"])?;
    let i_c2_b = coherent_info(&bc2, &["C2"], &["B"])?;
    let links = [
        ChainLink { state: &ac1, from: "A", to: "C1" },
        ChainLink { state: &bc2, from: "C2", to: "B" },
    ];
    let chain = chain_hierarchical_rate(&links)?;
    report.quantities.insert("I(A>C1)".into(), i_a_c1);
    report.quantities.insert("I(C2>B)".into(), i_c2_b);
    report.quantities.insert("chain".into(), chain);
    report
        .quantities
        .insert("beatsHashing".into(), if beats { 1.0 } else { 0.0 });
    Ok(report)
}

fn run_example(
    name: &str,
    emit_state: bool,
    rates: bool,
    p: Option<Vec<f64>>,
    m: usize,
    csv: bool,
) -> Result<(), CliError> {
    let (state, roles, report) = match name {
        "factorized-chain" => {
            let (state, roles) = examples::factorized_chain();
            let report = chain_report(&state, &roles)?;
            (state, roles, report)
        }
        "cnot-corrupted" => {
            let (state, roles) = examples::cnot_corrupted();
            let report = chain_report(&state, &roles)?;
            (state, roles, report)
        }
        "bc2r-link" => {
            let state = examples::repeater_link_bc2r();
            // R purifies the B,C2 pair; a = R marks it as the decoupling
            // reference when this file feeds the decouple command
            let roles = RoleMap::new("R", "B", &["C2"], None);
            let (report, beats) = report_with_witness(&state, &roles)?;
            let mut report = report;
            report
                .quantities
                .insert("beatsHashing".into(), if beats { 1.0 } else { 0.0 });
            (state, roles, report)
        }
        "maximally-entangled" => {
            if m < 1 {
                return Err(CliError::Usage("m must be at least 1".into()));
            }
            let (state, roles) = examples::maximally_entangled(m);
            let (report, beats) = report_with_witness(&state, &roles)?;
            let mut report = report;
            report
                .quantities
                .insert("beatsHashing".into(), if beats { 1.0 } else { 0.0 });
            (state, roles, report)
        }
        "cq" => {
            let probs = p.unwrap_or_else(|| vec![0.5, 0.5]);
            let comps = cq_components(probs.len());
            let (state, roles) = examples::cq_state(&probs, &comps)?;
            let mut report = assisted_lower_bound_l(&state, &roles)?;
            let cq = eoa_core::measure::cq_assistance(&state, &roles)?;
            report.quantities.insert("cqAssistance".into(), cq);
            let basis = eoa_core::measure::Povm::computational_basis(probs.len());
            let ens = measure_helper(&state, &["C"], &basis)?;
            let avg = avg_hashing_rate(
                &ens,
                &[roles.recipient_a.as_str()],
                &[roles.recipient_b.as_str()],
            )?;
            report.quantities.insert("avgHashingRate".into(), avg);
            (state, roles, report)
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown example {other:?}; known: {}",
                examples::EXAMPLE_NAMES.join(", ")
            )))
        }
    };
    if emit_state {
        let desc = match StateDescription::from_pure(&state, &roles) {
            Ok(d) => d,
            Err(_) => StateDescription::from_mixed(&state, &roles),
        };
        // full precision: the state must round-trip bit-exactly
        println!("{}", serde_json::to_string_pretty(&desc).unwrap());
    }
    if rates || !emit_state {
        print_report(&report, &[], csv);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// selftest
// ---------------------------------------------------------------------------

fn check(name: &str, ok: bool, failures: &mut usize) {
    if ok {
        println!("ok   {name}");
    } else {
        println!("FAIL {name}");
        *failures += 1;
    }
}

fn selftest() -> bool {
    use eoa_core::qstate::Register;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    let mut failures = 0;

    let (psi, roles) = examples::factorized_chain();
    let i_ac_b = coherent_info(&psi, &["A", "C1", "C2"], &["B"]).unwrap();
    check(
        "chain I(AC>B) = 0.399124",
        (i_ac_b - 0.399124).abs() < 5e-6,
        &mut failures,
    );
    let i_a_bc = coherent_info(&psi, &["A"], &["B", "C1", "C2"]).unwrap();
    check(
        "chain I(A>BC) = 0.811278",
        (i_a_bc - 0.811278).abs() < 5e-6,
        &mut failures,
    );
    let report = assisted_lower_bound_l(&psi, &roles).unwrap();
    check(
        "chain L matches I(AC>B)",
        (report.get("L").unwrap() - i_ac_b).abs() < 1e-9,
        &mut failures,
    );

    let (phi, _) = examples::cnot_corrupted();
    let phi_ac1 = phi.partial_trace(&["A", "C1"]).unwrap();
    check(
        "corrupted I(A>C1) = 0",
        coherent_info(&phi_ac1, &["A"], &["C1"]).unwrap().abs() < 1e-9,
        &mut failures,
    );
    let spectrum = herm_eig(phi.partial_trace(&["C1"]).unwrap().rho())
        .unwrap()
        .eigenvalues;
    check(
        "corrupted C1 spectrum {3/4, 1/4}",
        (spectrum[0] - 0.75).abs() < 1e-9 && (spectrum[1] - 0.25).abs() < 1e-9,
        &mut failures,
    );

    let mut rng = ChaCha8Rng::seed_from_u64(1717);
    let mut ssa_ok = true;
    for _ in 0..200 {
        let d = 8;
        let g = eoa_core::CMatrix::from_fn(d, d, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let psd = g.matmul(&g.adjoint());
        let tr = psd.trace().re;
        let s = MultiState::from_density(
            Register::qubits(&["A", "B", "C"]),
            psd.scale(Complex64::new(1.0 / tr, 0.0)),
        )
        .unwrap();
        let wide = coherent_info(&s, &["A"], &["B", "C"]).unwrap();
        let narrow = coherent_info(&s, &["A"], &["B"]).unwrap();
        if wide < narrow - 1e-9 {
            ssa_ok = false;
        }
    }
    check("I(A>BC) >= I(A>B) on 200 random states", ssa_ok, &mut failures);

    let mut collapse_ok = true;
    for _ in 0..50 {
        let amps: Vec<Complex64> = (0..8)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let s = MultiState::pure(Register::qubits(&["A", "B", "C"]), &amps).unwrap();
        let roles = RoleMap::new("A", "B", &["C"], None);
        let bound = assisted_lower_bound_l(&s, &roles)
            .unwrap()
            .get("bound")
            .unwrap();
        let expect = eoa_core::rates::von_neumann(&s, &["A"])
            .unwrap()
            .min(eoa_core::rates::von_neumann(&s, &["B"]).unwrap());
        if (bound - expect).abs() > 1e-8 {
            collapse_ok = false;
        }
    }
    check(
        "pure tripartite bound = min{S(A), S(B)} on 50 states",
        collapse_ok,
        &mut failures,
    );

    if failures > 0 {
        println!("{failures} check(s) failed");
    }
    failures == 0
}
