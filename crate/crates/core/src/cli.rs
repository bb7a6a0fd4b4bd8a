//! Batch front end behind the `gl1n` binary.
//!
//! Exit codes: 0 success, 1 internal failure, 2 invalid input, 3 failed
//! verification.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::chain::{
    chain_operator, fock_probabilities, mode_data, overlap_probabilities, stationary_energies,
    triple_relation_defect, ChainConfig, FockRep, FockState, LadderRep, LadderState, Observable,
    Outcome,
};
use crate::error::{Error, Result};
use crate::gz::{
    classify_unitary, count_patterns, dimension_cap, enumerate_basis, require_unitary,
    HighestWeight, UnitarityClass,
};
use crate::odd::{
    branch, eigenvectors, momentum_variant, spectrum, EigenvectorExpansion, SpectrumReport,
};
use crate::rep::{GeneratorSet, OddElement};
use crate::scalars::{format_rational, ComplexF};
use crate::verify::{module_suite, CheckReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

/// Coefficients below this modulus are left out of eigenvector listings.
const COEFF_CUTOFF: f64 = 1e-14;

#[derive(Parser, Debug)]
#[command(
    name = "gl1n",
    version,
    about = "Unitary gl(1|n) modules and spectra of odd elements"
)]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Subcommand, Debug)]
pub enum Verb {
    /// Eigenvalues and multiplicities from the branching rule
    Spectrum(Args),
    /// Orthonormal eigenvectors in the stationary basis
    Eigvecs(Args),
    /// Measurement probabilities in stationary states
    Probs(Args),
    /// Dimension of the module
    Dims(Args),
    /// Restriction to gl(1|1) + gl(n-1)
    Branch(Args),
    /// Structural checks and branching-vs-oracle comparison
    Verify(Args),
    /// Stationary energies hbar E_m
    Energy(Args),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Table,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ObservableArg {
    Position,
    Momentum,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Args {
    /// Highest weight labels m_{0,n+1},...,m_{n,n+1}, e.g. 4,2,1,0 or 1/2,3,0
    #[arg(long, value_name = "LABELS", allow_hyphen_values = true)]
    pub hw: Option<String>,
    /// Fock module W(p) = [p,0,...,0]
    #[arg(long, value_name = "P")]
    pub fock: Option<i64>,
    /// Ladder module V(p) = [1,p-1,0,...,0]
    #[arg(long, value_name = "P")]
    pub ladder: Option<i64>,
    /// Number of oscillators
    #[arg(long)]
    pub n: Option<usize>,
    /// Oscillator index
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub r: i64,
    #[arg(long, value_enum, default_value = "position")]
    pub observable: ObservableArg,
    /// Custom odd element coefficients alpha_1..alpha_n, e.g. 1,0.5-2i,3i
    #[arg(long, value_name = "COEFFS", allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Stationary state: Fock bits, ladder theta,s_1..s_n, or a basis index
    #[arg(long, value_name = "STATE")]
    pub state: Option<String>,
    #[arg(long, value_enum, default_value = "table")]
    pub output: OutputFormat,
    /// Seed for the randomized parts of `verify`
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub hbar: Option<f64>,
    /// TOML file with n, mu, omega, c, hbar, rep, p, m_top
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

/// Contents of a `--config` file; command-line flags take precedence.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub mu: Option<f64>,
    pub omega: Option<f64>,
    pub c: Option<f64>,
    pub hbar: Option<f64>,
    /// `fock`, `ladder` or `general`
    pub rep: Option<String>,
    pub p: Option<i64>,
    pub m_top: Option<Vec<toml::Value>>,
}

impl FileConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum RepKind {
    General,
    Fock(i64),
    Ladder(i64),
}

/// Everything a verb needs after flags and config are merged.
struct Request {
    hw: HighestWeight,
    kind: RepKind,
    physics: PhysicsInput,
    r: i64,
    observable: Observable,
    alpha: Option<Vec<ComplexF>>,
    state: Option<String>,
    output: OutputFormat,
    seed: u64,
}

#[derive(Clone, Debug)]
struct PhysicsInput {
    mu: f64,
    omega: f64,
    c: f64,
    hbar: f64,
}

impl Request {
    fn chain(&self) -> Result<ChainConfig> {
        let p = &self.physics;
        ChainConfig::new(self.hw.n(), p.mu, p.omega, p.c, p.hbar)
    }
}

fn resolve(args: &Args) -> Result<Request> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let given = [
        args.hw.is_some(),
        args.fock.is_some(),
        args.ladder.is_some(),
    ]
    .iter()
    .filter(|b| **b)
    .count();
    if given > 1 {
        return Err(Error::InvalidConfig(
            "give only one of --hw, --fock, --ladder".into(),
        ));
    }
    let n_flag = args.n.or(file.n);
    let need_n = || {
        n_flag.ok_or_else(|| {
            Error::InvalidConfig("--n is required for Fock and ladder modules".into())
        })
    };
    let (hw, kind) = if let Some(labels) = &args.hw {
        (HighestWeight::parse(labels)?, RepKind::General)
    } else if let Some(p) = args.fock {
        (HighestWeight::fock(need_n()?, p)?, RepKind::Fock(p))
    } else if let Some(p) = args.ladder {
        (HighestWeight::ladder(need_n()?, p)?, RepKind::Ladder(p))
    } else {
        match file.rep.as_deref() {
            Some("fock") => {
                let p = file
                    .p
                    .ok_or_else(|| Error::InvalidConfig("rep = \"fock\" needs p".into()))?;
                (HighestWeight::fock(need_n()?, p)?, RepKind::Fock(p))
            }
            Some("ladder") => {
                let p = file
                    .p
                    .ok_or_else(|| Error::InvalidConfig("rep = \"ladder\" needs p".into()))?;
                (HighestWeight::ladder(need_n()?, p)?, RepKind::Ladder(p))
            }
            Some("general") | None if file.m_top.is_some() => {
                let labels: Vec<String> = file
                    .m_top
                    .as_ref()
                    .expect("checked")
                    .iter()
                    .map(|v| match v {
                        toml::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                (HighestWeight::parse(&labels.join(","))?, RepKind::General)
            }
            Some("general") => {
                return Err(Error::InvalidConfig("rep = \"general\" needs m_top".into()))
            }
            Some(other) => return Err(Error::InvalidConfig(format!("unknown rep {other:?}"))),
            None => {
                return Err(Error::InvalidConfig(
                    "no module given: use --hw, --fock or --ladder".into(),
                ))
            }
        }
    };
    if let Some(n) = n_flag {
        if n != hw.n() {
            return Err(Error::InvalidConfig(format!(
                "--n {n} does not match the {} labels given",
                hw.n() + 1
            )));
        }
    }
    let alpha = args.alpha.as_deref().map(parse_alpha).transpose()?;
    if let Some(a) = &alpha {
        if a.len() != hw.n() {
            return Err(Error::InvalidConfig(format!(
                "--alpha has {} entries, module has n={}",
                a.len(),
                hw.n()
            )));
        }
    }
    Ok(Request {
        kind,
        physics: PhysicsInput {
            mu: args.mu.or(file.mu).unwrap_or(1.0),
            omega: args.omega.or(file.omega).unwrap_or(1.0),
            c: args.c.or(file.c).unwrap_or(0.0),
            hbar: args.hbar.or(file.hbar).unwrap_or(1.0),
        },
        hw,
        r: args.r,
        observable: match args.observable {
            ObservableArg::Position => Observable::Position,
            ObservableArg::Momentum => Observable::Momentum,
        },
        alpha,
        state: args.state.clone(),
        output: args.output,
        seed: args.seed,
    })
}

fn parse_alpha(s: &str) -> Result<Vec<ComplexF>> {
    s.split(',')
        .map(|part| {
            ComplexF::from_str(part.trim())
                .map_err(|_| Error::Parse(format!("bad complex coefficient {part:?}")))
        })
        .collect()
}

/// Parses `argv` (including the program name) and runs the verb, writing
/// the artifact to `out` and diagnostics to `err`.
pub fn run_from<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => run(cli, out, err),
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            if code == 0 {
                EXIT_OK
            } else {
                EXIT_INVALID
            }
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = dispatch(cli.verb, out, err);
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Internal(_) | Error::NotHermitian(_) => EXIT_INTERNAL,
                _ => EXIT_INVALID,
            }
        }
    }
}

fn dispatch(verb: Verb, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let (name, args) = match &verb {
        Verb::Spectrum(a) => ("spectrum", a),
        Verb::Eigvecs(a) => ("eigvecs", a),
        Verb::Probs(a) => ("probs", a),
        Verb::Dims(a) => ("dims", a),
        Verb::Branch(a) => ("branch", a),
        Verb::Verify(a) => ("verify", a),
        Verb::Energy(a) => ("energy", a),
    };
    let req = resolve(args)?;
    require_unitary(&req.hw)?;
    let dim = count_patterns(&req.hw, dimension_cap()?)?;
    match name {
        "dims" => cmd_dims(&req, dim, out).map(|_| EXIT_OK),
        "branch" => cmd_branch(&req, out).map(|_| EXIT_OK),
        "spectrum" => cmd_spectrum(&req, out).map(|_| EXIT_OK),
        "eigvecs" => cmd_eigvecs(&req, out).map(|_| EXIT_OK),
        "probs" => cmd_probs(&req, out).map(|_| EXIT_OK),
        "energy" => cmd_energy(&req, out).map(|_| EXIT_OK),
        "verify" => cmd_verify(&req, out, err),
        _ => unreachable!("every verb is listed"),
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

fn labels_json(hw: &HighestWeight) -> Value {
    Value::Array(
        hw.labels()
            .iter()
            .map(|r| Value::String(format_rational(r)))
            .collect(),
    )
}

fn class_name(class: UnitarityClass) -> String {
    match class {
        UnitarityClass::Typical => "typical".into(),
        UnitarityClass::AtypicalOfType(k) => format!("atypical-{k}"),
        UnitarityClass::NotUnitary => unreachable!("rejected before dispatch"),
    }
}

fn write_json(out: &mut dyn Write, v: &Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

fn write_csv(out: &mut dyn Write, rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.write_record(&row)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_dims(req: &Request, dim: usize, out: &mut dyn Write) -> Result<()> {
    let class = classify_unitary(&req.hw);
    match req.output {
        OutputFormat::Json => write_json(
            out,
            &json!({"highest_weight": labels_json(&req.hw), "n": req.hw.n(), "class": class_name(class), "dim": dim}),
        ),
        OutputFormat::Csv => write_csv(out, vec![vec!["dim".into()], vec![dim.to_string()]]),
        OutputFormat::Table => Ok(writeln!(out, "{dim}")?),
    }
}

fn cmd_branch(req: &Request, out: &mut dyn Write) -> Result<()> {
    let hw = &req.hw;
    let comps = branch(hw)?;
    let abs = |label: &[i64]| -> Vec<String> {
        label
            .iter()
            .map(|&z| format_rational(&hw.offset_value(z)))
            .collect()
    };
    match req.output {
        OutputFormat::Json => {
            let list: Vec<Value> = comps
                .iter()
                .map(|c| {
                    json!({
                        "a": format_rational(&c.gl1_weight.0),
                        "b": format_rational(&c.gl1_weight.1),
                        "a_plus_b": format_rational(&c.a_plus_b()),
                        "label": abs(&c.gln1_label),
                        "n_free": c.n_free,
                        "binom_split": c.binom_split.iter().map(|(i, k)| json!([i, k])).collect::<Vec<_>>(),
                        "dim_v": c.dim_v,
                        "dim": c.dim(),
                        "singlet": c.singlet,
                    })
                })
                .collect();
            let total: u64 = comps.iter().map(|c| c.dim()).sum();
            write_json(
                out,
                &json!({"highest_weight": labels_json(hw), "total_dim": total, "components": list}),
            )
        }
        OutputFormat::Csv => {
            let mut rows = vec![["a", "b", "label", "n_free", "dim_v", "dim", "singlet"]
                .map(String::from)
                .to_vec()];
            for c in &comps {
                rows.push(vec![
                    format_rational(&c.gl1_weight.0),
                    format_rational(&c.gl1_weight.1),
                    abs(&c.gln1_label).join(" "),
                    c.n_free.to_string(),
                    c.dim_v.to_string(),
                    c.dim().to_string(),
                    c.singlet.to_string(),
                ]);
            }
            write_csv(out, rows)
        }
        OutputFormat::Table => {
            writeln!(
                out,
                "{:<16} {:<8} {:<8} {:>3} {:>8} {:>8}",
                "label", "a", "b", "N", "dim V", "dim"
            )?;
            for c in &comps {
                let tag = if c.singlet { " singlet" } else { "" };
                writeln!(
                    out,
                    "{:<16} {:<8} {:<8} {:>3} {:>8} {:>8}{tag}",
                    format!("[{}]", abs(&c.gln1_label).join(",")),
                    format_rational(&c.gl1_weight.0),
                    format_rational(&c.gl1_weight.1),
                    c.n_free,
                    c.dim_v,
                    c.dim()
                )?;
            }
            Ok(())
        }
    }
}

/// The odd element a verb acts on: `--alpha`, or `q_r` / `p_r` of the chain.
struct Operator {
    alpha: Vec<ComplexF>,
    observable: Option<Observable>,
}

fn operator(req: &Request) -> Result<Operator> {
    if let Some(alpha) = &req.alpha {
        return Ok(Operator {
            alpha: alpha.clone(),
            observable: None,
        });
    }
    if req.hw.n() < 2 {
        return Err(Error::InvalidConfig(
            "a chain needs n >= 2; pass --alpha for n = 1".into(),
        ));
    }
    let op = chain_operator(&req.chain()?, req.r, &req.hw, req.observable)?;
    Ok(Operator {
        alpha: op.element.alpha,
        observable: Some(op.observable),
    })
}

fn spectrum_json(report: &SpectrumReport) -> Value {
    serde_json::to_value(report).expect("plain data serializes")
}

fn cmd_spectrum(req: &Request, out: &mut dyn Write) -> Result<()> {
    let op = operator(req)?;
    let report = spectrum(&req.hw, &op.alpha)?;
    match req.output {
        OutputFormat::Json => write_json(out, &spectrum_json(&report)),
        OutputFormat::Csv => {
            let mut rows = vec![vec!["value".to_string(), "multiplicity".to_string()]];
            rows.extend(
                report
                    .levels
                    .iter()
                    .map(|l| vec![f17(l.value), l.multiplicity.to_string()]),
            );
            write_csv(out, rows)
        }
        OutputFormat::Table => {
            writeln!(out, "scale {}", f17(report.scale))?;
            writeln!(out, "{:>25}  multiplicity", "value")?;
            for l in &report.levels {
                writeln!(out, "{:>25}  {}", f17(l.value), l.multiplicity)?;
            }
            Ok(())
        }
    }
}

enum Module {
    General(GeneratorSet),
    Fock(FockRep),
    Ladder(LadderRep),
}

impl Module {
    fn build(req: &Request) -> Result<Module> {
        let n = req.hw.n();
        Ok(match req.kind {
            RepKind::General => Module::General(GeneratorSet::new(enumerate_basis(&req.hw)?)?),
            RepKind::Fock(p) => Module::Fock(FockRep::new(n, p)?),
            RepKind::Ladder(p) => Module::Ladder(LadderRep::new(n, p)?),
        })
    }

    fn set(&self) -> &GeneratorSet {
        match self {
            Module::General(s) => s,
            Module::Fock(f) => f.set(),
            Module::Ladder(l) => l.set(),
        }
    }

    /// Physical label of a basis vector where one exists.
    fn label(&self, idx: usize) -> Value {
        match self {
            Module::General(_) => Value::Null,
            Module::Fock(f) => json!({"phi": f.states()[idx].phi}),
            Module::Ladder(l) => json!({"theta": l.states()[idx].theta, "s": l.states()[idx].s}),
        }
    }

    fn state_index(&self, spec: &str) -> Result<usize> {
        let nums = || -> Result<Vec<u64>> {
            spec.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u64>()
                        .map_err(|_| Error::Parse(format!("bad state {spec:?}")))
                })
                .collect()
        };
        let missing = || Error::InvalidState(format!("state {spec:?} is not a basis vector"));
        match self {
            Module::Fock(f) => {
                let phi: Vec<u8> = nums()?.into_iter().map(|b| b.min(2) as u8).collect();
                if phi.len() != f.n() {
                    return Err(Error::InvalidState(format!(
                        "Fock state needs {} bits",
                        f.n()
                    )));
                }
                f.index_of(&FockState::new(phi, f.p())?).ok_or_else(missing)
            }
            Module::Ladder(l) => {
                let v = nums()?;
                if v.len() != l.n() + 1 {
                    return Err(Error::InvalidState(format!(
                        "ladder state needs theta and {} entries",
                        l.n()
                    )));
                }
                let state = LadderState::new(v[0].min(2) as u8, v[1..].to_vec(), l.p())?;
                l.index_of(&state).ok_or_else(missing)
            }
            Module::General(s) => {
                let idx: usize = spec
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad basis index {spec:?}")))?;
                if idx >= s.dim() {
                    return Err(Error::InvalidState(format!(
                        "basis index {idx} is out of range 0..{}",
                        s.dim()
                    )));
                }
                Ok(idx)
            }
        }
    }
}

/// One emitted eigenvector with its physical label, if any.
struct Emitted {
    expansion: EigenvectorExpansion,
    label: Value,
}

struct Solved {
    report: SpectrumReport,
    vectors: Vec<Emitted>,
    method: &'static str,
}

fn solve(module: &Module, req: &Request, op: &Operator) -> Result<Solved> {
    let set = module.set();
    let report = spectrum(&req.hw, &op.alpha)?;
    let position = op.observable == Some(Observable::Position);
    if position {
        match module {
            Module::Fock(f) => {
                let vectors = f
                    .eigenvectors(&req.chain()?, req.r)?
                    .into_iter()
                    .map(|e| Emitted {
                        label: json!({"sign": e.sign, "phi": e.label}),
                        expansion: e.expansion,
                    })
                    .collect();
                return Ok(Solved {
                    report,
                    vectors,
                    method: "fock",
                });
            }
            Module::Ladder(l) => {
                let (_, vs) = l.eigenvectors(&req.chain()?, req.r)?;
                let vectors = vs
                    .into_iter()
                    .map(|e| Emitted {
                        label: json!({"sign": e.sign, "t": e.label}),
                        expansion: e.expansion,
                    })
                    .collect();
                return Ok(Solved {
                    report,
                    vectors,
                    method: "ladder",
                });
            }
            Module::General(_) => {}
        }
    }
    let system = match op.observable {
        Some(Observable::Momentum) => momentum_variant(set, &op.alpha)?.1,
        _ => eigenvectors(set, &op.alpha)?,
    };
    let method = if system.oracle_fallback {
        "oracle"
    } else {
        "branching"
    };
    Ok(Solved {
        report,
        vectors: system
            .vectors
            .into_iter()
            .map(|expansion| Emitted {
                expansion,
                label: Value::Null,
            })
            .collect(),
        method,
    })
}

fn cmd_eigvecs(req: &Request, out: &mut dyn Write) -> Result<()> {
    let module = Module::build(req)?;
    let op = operator(req)?;
    let solved = solve(&module, req, &op)?;
    let set = module.set();
    let basis = set.basis();
    let hw = basis.highest_weight();
    let m = set.odd_element(&OddElement::new(op.alpha.clone()));
    let mut residual: f64 = 0.0;
    for v in &solved.vectors {
        let mut r = m.matvec(&v.expansion.coefficients);
        crate::linalg::axpy(
            &mut r,
            ComplexF::new(-v.expansion.eigenvalue, 0.0),
            &v.expansion.coefficients,
        );
        residual = residual.max(crate::linalg::norm(&r));
    }
    match req.output {
        OutputFormat::Json => {
            let vectors: Vec<Value> = solved
                .vectors
                .iter()
                .map(|v| {
                    let mut j = v.expansion.to_json(basis, COEFF_CUTOFF);
                    if !v.label.is_null() {
                        j["label"] = v.label.clone();
                    }
                    j
                })
                .collect();
            write_json(
                out,
                &json!({
                    "highest_weight": labels_json(hw),
                    "scale": solved.report.scale,
                    "method": solved.method,
                    "dim": set.dim(),
                    "max_residual": residual,
                    "vectors": vectors,
                }),
            )
        }
        OutputFormat::Csv => {
            let mut rows = vec![["vector", "eigenvalue", "pattern", "re", "im"]
                .map(String::from)
                .to_vec()];
            for (i, v) in solved.vectors.iter().enumerate() {
                for (p, c) in v.expansion.to_map(basis, COEFF_CUTOFF) {
                    rows.push(vec![
                        i.to_string(),
                        f17(v.expansion.eigenvalue),
                        p.display(hw),
                        f17(c.re),
                        f17(c.im),
                    ]);
                }
            }
            write_csv(out, rows)
        }
        OutputFormat::Table => {
            writeln!(
                out,
                "method {}  dim {}  max residual {residual:.3e}",
                solved.method,
                set.dim()
            )?;
            for (i, v) in solved.vectors.iter().enumerate() {
                let label = if v.label.is_null() {
                    String::new()
                } else {
                    format!("  {}", v.label)
                };
                writeln!(
                    out,
                    "#{i}  eigenvalue {}{label}",
                    f17(v.expansion.eigenvalue)
                )?;
                for (p, c) in v.expansion.to_map(basis, COEFF_CUTOFF) {
                    writeln!(
                        out,
                        "    {:>24} {:>24}i  {}",
                        f17(c.re),
                        f17(c.im),
                        p.display(hw)
                    )?;
                }
            }
            Ok(())
        }
    }
}

fn cmd_probs(req: &Request, out: &mut dyn Write) -> Result<()> {
    let module = Module::build(req)?;
    let op = operator(req)?;
    let solved = solve(&module, req, &op)?;
    let set = module.set();
    let basis = set.basis();
    let hw = basis.highest_weight();
    let expansions: Vec<EigenvectorExpansion> =
        solved.vectors.iter().map(|v| v.expansion.clone()).collect();
    let indices: Vec<usize> = match &req.state {
        Some(spec) => vec![module.state_index(spec)?],
        None => (0..set.dim()).collect(),
    };
    let with_law = matches!(module, Module::Fock(_)) && op.observable == Some(Observable::Position);
    let mut records = Vec::new();
    for idx in indices {
        let outcomes = overlap_probabilities(&solved.report, &expansions, idx)?;
        let law: Option<Vec<Outcome>> = match (&module, with_law) {
            (Module::Fock(f), true) => {
                Some(fock_probabilities(f.p(), &req.chain()?, &f.states()[idx])?)
            }
            _ => None,
        };
        records.push((idx, outcomes, law));
    }
    match req.output {
        OutputFormat::Json => {
            let states: Vec<Value> = records
                .iter()
                .map(|(idx, outcomes, law)| {
                    let list: Vec<Value> = outcomes
                        .iter()
                        .enumerate()
                        .map(|(k, o)| {
                            let mut j = json!({"value": o.value, "probability": o.probability});
                            if let Some(law) = law {
                                j["law"] = json!(law[k].probability);
                            }
                            j
                        })
                        .collect();
                    let mut j = json!({
                        "index": idx,
                        "pattern": basis.pattern(*idx).display(hw),
                        "total": outcomes.iter().map(|o| o.probability).sum::<f64>(),
                        "outcomes": list,
                    });
                    let label = module.label(*idx);
                    if !label.is_null() {
                        j["label"] = label;
                    }
                    j
                })
                .collect();
            write_json(
                out,
                &json!({"highest_weight": labels_json(hw), "scale": solved.report.scale, "method": solved.method, "states": states}),
            )
        }
        OutputFormat::Csv => {
            let mut rows = vec![["index", "pattern", "value", "probability", "law"]
                .map(String::from)
                .to_vec()];
            for (idx, outcomes, law) in &records {
                for (k, o) in outcomes.iter().enumerate() {
                    rows.push(vec![
                        idx.to_string(),
                        basis.pattern(*idx).display(hw),
                        f17(o.value),
                        f17(o.probability),
                        law.as_ref()
                            .map(|l| f17(l[k].probability))
                            .unwrap_or_default(),
                    ]);
                }
            }
            write_csv(out, rows)
        }
        OutputFormat::Table => {
            for (idx, outcomes, law) in &records {
                let label = module.label(*idx);
                let label = if label.is_null() {
                    String::new()
                } else {
                    format!("  {label}")
                };
                writeln!(
                    out,
                    "state #{idx}  {}{label}",
                    basis.pattern(*idx).display(hw)
                )?;
                for (k, o) in outcomes.iter().enumerate() {
                    if o.probability.abs() < 1e-15
                        && law.as_ref().is_none_or(|l| l[k].probability == 0.0)
                    {
                        continue;
                    }
                    let extra = law
                        .as_ref()
                        .map(|l| format!("  law {}", f17(l[k].probability)))
                        .unwrap_or_default();
                    writeln!(
                        out,
                        "    {:>25}  {}{extra}",
                        f17(o.value),
                        f17(o.probability)
                    )?;
                }
            }
            Ok(())
        }
    }
}

fn cmd_energy(req: &Request, out: &mut dyn Write) -> Result<()> {
    if req.hw.n() < 2 {
        return Err(Error::InvalidConfig(
            "energies need a chain with n >= 2".into(),
        ));
    }
    let cfg = req.chain()?;
    let modes = mode_data(&cfg)?;
    let module = Module::build(req)?;
    let set = module.set();
    let basis = set.basis();
    let hw = basis.highest_weight();
    let energies = stationary_energies(&cfg, set)?;
    match req.output {
        OutputFormat::Json => {
            let states: Vec<Value> = energies
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let mut j =
                        json!({"index": i, "pattern": basis.pattern(i).display(hw), "energy": e});
                    let label = module.label(i);
                    if !label.is_null() {
                        j["label"] = label;
                    }
                    j
                })
                .collect();
            write_json(
                out,
                &json!({"highest_weight": labels_json(hw), "modes": serde_json::to_value(&modes)?, "states": states}),
            )
        }
        OutputFormat::Csv => {
            let mut rows = vec![["index", "pattern", "energy"].map(String::from).to_vec()];
            for (i, e) in energies.iter().enumerate() {
                rows.push(vec![i.to_string(), basis.pattern(i).display(hw), f17(*e)]);
            }
            write_csv(out, rows)
        }
        OutputFormat::Table => {
            for (i, e) in energies.iter().enumerate() {
                writeln!(
                    out,
                    "{:>5}  {:>25}  {}",
                    i,
                    f17(*e),
                    basis.pattern(i).display(hw)
                )?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SuiteLine<'a> {
    name: &'a str,
    passed: bool,
    checked: usize,
    max_residual: f64,
    failures: &'a [String],
}

/// Random odd elements per module for the oracle comparison.
const VERIFY_ALPHAS: usize = 5;

fn chain_checks(module: &Module, cfg: &ChainConfig) -> Result<Vec<CheckReport>> {
    let set = module.set();
    let mut out = Vec::new();
    let mut triple = CheckReport::new("triple relations");
    triple.record(triple_relation_defect(cfg, set)?, 1e-10, || {
        "commutator identity".into()
    });
    out.push(triple);
    let mut ham = CheckReport::new("Hamiltonian diagonal");
    let h = crate::chain::hamiltonian_matrix(cfg, set)?;
    let e = stationary_energies(cfg, set)?;
    for (r, c, v) in h.entries() {
        let target = if r == c { e[c] } else { 0.0 };
        ham.record(
            (v - ComplexF::new(target, 0.0)).norm(),
            1e-12 * target.abs().max(1.0),
            || format!("H[{r},{c}]"),
        );
    }
    out.push(ham);
    match module {
        Module::Fock(f) => {
            out.push(f.closed_form_check());
            let mut law = CheckReport::new("Fock probability law");
            for r in 1..=cfg.n as i64 {
                let vectors: Vec<EigenvectorExpansion> = f
                    .eigenvectors(cfg, r)?
                    .into_iter()
                    .map(|e| e.expansion)
                    .collect();
                let q = chain_operator(cfg, r, set.basis().highest_weight(), Observable::Position)?;
                let report = spectrum(set.basis().highest_weight(), &q.element.alpha)?;
                for (idx, s) in f.states().iter().enumerate() {
                    let a = overlap_probabilities(&report, &vectors, idx)?;
                    let b = fock_probabilities(f.p(), cfg, s)?;
                    let worst = a
                        .iter()
                        .zip(&b)
                        .map(|(x, y)| (x.probability - y.probability).abs())
                        .fold(0.0, f64::max);
                    law.record(worst, 1e-10, || format!("r={r} phi={:?}", s.phi));
                }
            }
            out.push(law);
        }
        Module::Ladder(l) => out.push(l.closed_form_check()),
        Module::General(_) => {}
    }
    Ok(out)
}

/// On failure the JSON report also goes to `err` unless it is already on
/// `out`.
fn cmd_verify(req: &Request, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let module = Module::build(req)?;
    let set = module.set();
    let mut reports = module_suite(set, req.seed, VERIFY_ALPHAS)?;
    if req.hw.n() >= 2 {
        reports.extend(chain_checks(&module, &req.chain()?)?);
    }
    let passed = reports.iter().all(CheckReport::passed);
    let suites: Vec<SuiteLine> = reports
        .iter()
        .map(|r| SuiteLine {
            name: &r.name,
            passed: r.passed(),
            checked: r.checked,
            max_residual: r.max_residual,
            failures: &r.failures,
        })
        .collect();
    let report = json!({
        "highest_weight": labels_json(&req.hw),
        "dim": set.dim(),
        "seed": req.seed,
        "passed": passed,
        "suites": serde_json::to_value(&suites)?,
    });
    if !passed && req.output != OutputFormat::Json {
        write_json(err, &report)?;
    }
    match req.output {
        OutputFormat::Json => write_json(out, &report)?,
        OutputFormat::Csv => {
            let mut rows = vec![["suite", "passed", "checked", "max_residual", "failures"]
                .map(String::from)
                .to_vec()];
            for r in &reports {
                rows.push(vec![
                    r.name.clone(),
                    r.passed().to_string(),
                    r.checked.to_string(),
                    f17(r.max_residual),
                    r.failures.join("; "),
                ]);
            }
            write_csv(out, rows)?;
        }
        OutputFormat::Table => {
            for r in &reports {
                let tag = if r.passed() { "PASS" } else { "FAIL" };
                writeln!(
                    out,
                    "{tag}  {:<42} checked {:>6}  max residual {:.3e}",
                    r.name, r.checked, r.max_residual
                )?;
                for f in r.failures.iter().take(10) {
                    writeln!(out, "      {f}")?;
                }
            }
            writeln!(
                out,
                "{}",
                if passed {
                    "all suites passed"
                } else {
                    "verification FAILED"
                }
            )?;
        }
    }
    Ok(if passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("gl1n").chain(args.iter().copied());
        let code = run_from(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn ladder_dims() {
        assert_eq!(
            run_args(&["dims", "--ladder", "2", "--n", "2"]),
            (0, "5\n".into(), String::new())
        );
    }

    #[test]
    fn fock_spectrum_levels() {
        let (code, out, _) = run_args(&[
            "spectrum", "--fock", "5", "--n", "3", "--r", "1", "--output", "json",
        ]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        let mult: Vec<u64> = v["levels"]
            .as_array()
            .unwrap()
            .iter()
            .map(|l| l["multiplicity"].as_u64().unwrap())
            .collect();
        assert_eq!(mult, vec![1, 2, 1, 1, 2, 1]);
    }

    #[test]
    fn validation_errors_exit_two() {
        assert_eq!(run_args(&["spectrum", "--hw", "1/4,1,0"]).0, EXIT_INVALID);
        assert_eq!(run_args(&["dims", "--fock", "3"]).0, EXIT_INVALID);
        assert_eq!(
            run_args(&["dims", "--fock", "3", "--ladder", "2", "--n", "3"]).0,
            EXIT_INVALID
        );
        assert_eq!(run_args(&["bogus"]).0, EXIT_INVALID);
        assert_eq!(
            run_args(&["spectrum", "--hw", "4,2,1,0", "--c", "1e9", "--n", "3"]).0,
            EXIT_OK
        );
        assert_eq!(
            run_args(&["spectrum", "--fock", "5", "--n", "4", "--c", "1e6"]).0,
            EXIT_INVALID
        );
    }

    #[test]
    fn alpha_parsing() {
        let a = parse_alpha("1,0.5-2i,3i").unwrap();
        assert_eq!(
            a,
            vec![
                ComplexF::new(1.0, 0.0),
                ComplexF::new(0.5, -2.0),
                ComplexF::new(0.0, 3.0)
            ]
        );
        assert!(parse_alpha("1,x").is_err());
    }
}
