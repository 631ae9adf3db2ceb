//! Command-line front end: `combine`, `inspect` and `validate`.
//!
//! [`run`] does all the work and returns what should go to stdout, stderr and
//! the exit status, so the binary is a thin wrapper and tests can drive the
//! CLI in-process.

use std::fmt::{self, Write as _};
use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bpa::Bpa;
use crate::constraints::{Certificate, Conditional};
use crate::error::Error;
use crate::evidence::{abstract_evidence, EvidenceBody, JointCompatibility};
use crate::frame::{Frame, Proposition};
use crate::fusion::{combine_pair, CombinedResult, MinGainOptions, Rule};
use crate::infomeasures::{entropy, information, InformationReport};
use crate::maxent::{SolverMethod, SolverOptions, SolverReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CONFLICT: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

/// Rows of the bel/pl table before it is cut off.
pub const BELIEF_TABLE_CAP: usize = 64;

#[derive(Parser, Debug)]
#[command(name = "mingain", version, about = "Combine belief-function evidence")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fold the evidence of a document with a combination rule.
    Combine(CombineArgs),
    /// Show each body of evidence, its abstract elements and Bel/Pl.
    Inspect(InspectArgs),
    /// Check that a document parses and every bpa is valid.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
pub struct CombineArgs {
    /// Evidence document, or `-` for stdin.
    pub input: String,
    #[arg(long, value_enum, default_value_t = RuleArg::Mingain)]
    pub rule: RuleArg,
    /// Marginal residual at which iterative scaling stops.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value_t = Base::Nats)]
    pub base: Base,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub output: Format,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Decimal places in the output, or `full`.
    #[arg(long, default_value = "6", value_parser = parse_precision)]
    pub precision: Precision,
}

#[derive(Args, Debug)]
pub struct InspectArgs {
    pub input: String,
    #[arg(long, value_enum, default_value_t = Base::Nats)]
    pub base: Base,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub output: Format,
    #[arg(long, default_value = "6", value_parser = parse_precision)]
    pub precision: Precision,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    pub input: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Dempster,
    Bayes,
    Mingain,
}

impl From<RuleArg> for Rule {
    fn from(r: RuleArg) -> Rule {
        match r {
            RuleArg::Dempster => Rule::Dempster,
            RuleArg::Bayes => Rule::Bayes,
            RuleArg::Mingain => Rule::MinGain,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Base {
    Nats,
    Bits,
}

impl Base {
    fn as_str(self) -> &'static str {
        match self {
            Base::Nats => "nats",
            Base::Bits => "bits",
        }
    }

    fn scale(self, nats: f64) -> f64 {
        match self {
            Base::Nats => nats,
            Base::Bits => nats / std::f64::consts::LN_2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    Digits(u32),
    Full,
}

impl Precision {
    pub fn apply(self, x: f64) -> f64 {
        let x = match self {
            Precision::Full => x,
            Precision::Digits(d) => {
                let k = 10f64.powi(d as i32);
                (x * k).round() / k
            }
        };
        // no "-0.0" in the output
        x + 0.0
    }

    /// Rounds values that sum to 1 so that the rounded values still do,
    /// by handing the leftover units to the largest remainders.
    pub fn apply_to_masses(self, xs: &[f64]) -> Vec<f64> {
        let Precision::Digits(d) = self else {
            return xs.to_vec();
        };
        let k = 10f64.powi(d as i32);
        let scaled: Vec<f64> = xs.iter().map(|x| x * k).collect();
        let mut units: Vec<i64> = scaled.iter().map(|x| x.floor() as i64).collect();
        let short = k.round() as i64 - units.iter().sum::<i64>();
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = scaled[a] - scaled[a].floor();
            let rb = scaled[b] - scaled[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &i in order.iter().take(short.clamp(0, xs.len() as i64) as usize) {
            units[i] += 1;
        }
        units.into_iter().map(|u| u as f64 / k + 0.0).collect()
    }
}

fn parse_precision(s: &str) -> std::result::Result<Precision, String> {
    if s == "full" {
        return Ok(Precision::Full);
    }
    match s.parse::<u32>() {
        Ok(d) if d <= 15 => Ok(Precision::Digits(d)),
        _ => Err(format!("expected 0..=15 or `full`, got `{s}`")),
    }
}

// ---------------------------------------------------------------------------
// input document

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceDocument {
    pub frame: Vec<String>,
    pub evidence: Vec<EvidenceEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conditionals: Vec<ConditionalEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint_compatibility: Option<Vec<TripleEntry>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceEntry {
    pub name: String,
    pub masses: Vec<MassEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassEntry {
    pub set: Vec<String>,
    pub mass: f64,
}

/// `P(then | given)`. `given` names an abstract element of the first body,
/// `then` one of the second.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionalEntry {
    pub given: String,
    pub then: String,
    pub prob: f64,
}

/// Abstract element `left` of the first body and `right` of the second are
/// jointly compatible with frame element `target`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleEntry {
    pub left: String,
    pub right: String,
    pub target: String,
}

/// A document turned into library types.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub frame: Frame,
    pub bodies: Vec<(String, Bpa)>,
    pub conditionals: Vec<Conditional>,
    pub joint_relation: Option<JointCompatibility>,
}

impl EvidenceDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn load(&self) -> Result<Loaded, CliError> {
        let frame = Frame::new(&self.frame).map_err(|e| CliError::invalid("frame", e))?;
        if self.evidence.is_empty() {
            return Err(CliError::invalid("evidence", Error::NoEvidence));
        }
        let mut bodies = Vec::with_capacity(self.evidence.len());
        for (k, entry) in self.evidence.iter().enumerate() {
            let ctx = format!("evidence[{k}] `{}`", entry.name);
            let bpa = entry
                .masses
                .iter()
                .map(|m| Ok((frame.proposition(&m.set)?, m.mass)))
                .collect::<crate::Result<Vec<_>>>()
                .and_then(|pairs| Bpa::new(&frame, pairs))
                .map_err(|e| CliError::invalid(&ctx, e))?;
            bodies.push((entry.name.clone(), bpa));
        }

        let needs_pair = !self.conditionals.is_empty() || self.joint_compatibility.is_some();
        if needs_pair && bodies.len() < 2 {
            return Err(CliError::invalid(
                "conditionals",
                Error::DimensionMismatch(
                    "conditionals and joint_compatibility need two bodies of evidence".into(),
                ),
            ));
        }
        let mut conditionals = Vec::with_capacity(self.conditionals.len());
        let mut joint_relation = None;
        if needs_pair {
            let left = abstract_evidence(&bodies[0].1);
            let right = abstract_evidence(&bodies[1].1);
            for (k, c) in self.conditionals.iter().enumerate() {
                let ctx = format!("conditionals[{k}]");
                let given =
                    element_index(&left, &c.given).map_err(|e| CliError::invalid(&ctx, e))?;
                let then =
                    element_index(&right, &c.then).map_err(|e| CliError::invalid(&ctx, e))?;
                if !c.prob.is_finite() || !(0.0..=1.0).contains(&c.prob) {
                    return Err(CliError::invalid(
                        &ctx,
                        Error::InconsistentConditional(format!(
                            "probability {} outside [0, 1]",
                            c.prob
                        )),
                    ));
                }
                conditionals.push(Conditional {
                    given,
                    then,
                    prob: c.prob,
                });
            }
            if let Some(triples) = &self.joint_compatibility {
                let rel = JointCompatibility::from_triples(
                    left.frame(),
                    right.frame(),
                    &frame,
                    triples
                        .iter()
                        .map(|t| (t.left.as_str(), t.right.as_str(), t.target.as_str())),
                )
                .map_err(|e| CliError::invalid("joint_compatibility", e))?;
                joint_relation = Some(rel);
            }
        }
        Ok(Loaded {
            frame,
            bodies,
            conditionals,
            joint_relation,
        })
    }
}

fn element_index(body: &EvidenceBody, name: &str) -> crate::Result<usize> {
    body.frame()
        .index_of(name)
        .ok_or_else(|| Error::UnknownElement(name.to_string()))
}

// ---------------------------------------------------------------------------
// output documents

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDocument {
    pub rule: String,
    /// `combined` or `conflict`.
    pub status: String,
    pub units: String,
    pub frame: Vec<String>,
    /// Absent when a conflict stopped the fold.
    pub combined: Option<Vec<MassEntry>>,
    pub beliefs: Vec<BeliefEntry>,
    pub steps: Vec<StepReport>,
    pub conflict: Option<ConflictReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeliefEntry {
    pub set: Vec<String>,
    pub bel: f64,
    pub pl: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementEntry {
    pub name: String,
    pub set: Vec<String>,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepReport {
    pub step: usize,
    pub left: String,
    pub right: String,
    pub left_elements: Vec<ElementEntry>,
    pub right_elements: Vec<ElementEntry>,
    /// Row-major over left × right elements.
    pub joint: Vec<Vec<f64>>,
    pub normalization: f64,
    pub conflict_mass: f64,
    pub information: InformationEntry,
    pub solver: Option<SolverEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InformationEntry {
    pub entropy_left: f64,
    pub entropy_right: f64,
    pub entropy_joint: f64,
    pub information_left: f64,
    pub information_right: f64,
    pub information_joint: f64,
    pub gain: f64,
    pub mutual_information: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverEntry {
    pub method: String,
    pub iterations: usize,
    pub residual: f64,
    pub entropy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConflictReport {
    pub step: usize,
    pub left: String,
    pub right: String,
    pub message: String,
    /// Absent for Dempster's total conflict.
    pub certificate: Option<CertificateEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateEntry {
    /// Elements of the left body whose mass cannot be placed.
    pub elements: Vec<ElementEntry>,
    /// Every right element those may share mass with.
    pub compatible: Vec<ElementEntry>,
    pub mass: f64,
    pub compatible_mass: f64,
    pub shortfall: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InspectReport {
    pub units: String,
    pub frame: Vec<String>,
    pub evidence: Vec<InspectEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InspectEntry {
    pub name: String,
    pub focal: Vec<FocalEntry>,
    pub elements: Vec<ElementEntry>,
    pub entropy: f64,
    pub information: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FocalEntry {
    pub set: Vec<String>,
    pub mass: f64,
    pub bel: f64,
    pub pl: f64,
}

// ---------------------------------------------------------------------------
// errors and exit codes

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Parse(String),
    Invalid { context: String, source: Error },
    Combine { step: usize, source: Error },
}

impl CliError {
    fn invalid(context: &str, source: Error) -> Self {
        CliError::Invalid {
            context: context.to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Combine {
                source: Error::NoConvergence { .. },
                ..
            } => EXIT_NO_CONVERGENCE,
            CliError::Combine {
                source: Error::ConflictDetected(_) | Error::TotalConflict,
                ..
            } => EXIT_CONFLICT,
            _ => EXIT_INPUT,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(msg) => f.write_str(msg),
            CliError::Parse(msg) => write!(f, "parse error: {msg}"),
            CliError::Invalid { context, source } => write!(f, "{context}: {source}"),
            CliError::Combine { step, source } => write!(f, "step {step}: {source}"),
        }
    }
}

/// What one invocation produced.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdin: &mut dyn Read) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_INPUT,
                    stderr: text,
                    ..Outcome::default()
                }
            } else {
                Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    ..Outcome::default()
                }
            };
        }
    };
    let mut out = Outcome::default();
    let result = match cli.command {
        Command::Combine(a) => cmd_combine(&a, stdin, &mut out),
        Command::Inspect(a) => cmd_inspect(&a, stdin, &mut out),
        Command::Validate(a) => cmd_validate(&a, stdin, &mut out),
    };
    match result {
        Ok(code) => out.code = code,
        Err(e) => {
            out.code = e.exit_code();
            let _ = writeln!(out.stderr, "error: {e}");
        }
    }
    out
}

fn read_input(path: &str, stdin: &mut dyn Read) -> Result<String, CliError> {
    if path == "-" {
        let mut s = String::new();
        stdin
            .read_to_string(&mut s)
            .map_err(|e| CliError::Io(format!("reading stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("reading {path}: {e}")))
    }
}

fn load(path: &str, stdin: &mut dyn Read) -> Result<Loaded, CliError> {
    EvidenceDocument::parse(&read_input(path, stdin)?)?.load()
}

fn cmd_validate(
    args: &ValidateArgs,
    stdin: &mut dyn Read,
    out: &mut Outcome,
) -> Result<i32, CliError> {
    let loaded = load(&args.input, stdin)?;
    let n = loaded.bodies.len();
    let _ = writeln!(
        out.stdout,
        "ok: {n} {} of evidence over {} elements",
        if n == 1 { "body" } else { "bodies" },
        loaded.frame.len()
    );
    Ok(EXIT_OK)
}

fn cmd_inspect(
    args: &InspectArgs,
    stdin: &mut dyn Read,
    out: &mut Outcome,
) -> Result<i32, CliError> {
    let loaded = load(&args.input, stdin)?;
    let report = inspect_report(&loaded, args.base, args.precision);
    out.stdout = match args.output {
        Format::Json => to_json(&report),
        Format::Table => render_inspect(&report),
    };
    Ok(EXIT_OK)
}

fn cmd_combine(
    args: &CombineArgs,
    stdin: &mut dyn Read,
    out: &mut Outcome,
) -> Result<i32, CliError> {
    let loaded = load(&args.input, stdin)?;
    let rule = Rule::from(args.rule);
    if rule == Rule::Dempster && !loaded.conditionals.is_empty() {
        let _ = writeln!(out.stderr, "note: the dempster rule ignores conditionals");
    }
    if rule != Rule::MinGain && loaded.joint_relation.is_some() {
        let _ = writeln!(
            out.stderr,
            "note: the {rule} rule ignores joint_compatibility"
        );
    }
    let opts = MinGainOptions {
        conditionals: loaded.conditionals.clone(),
        joint_relation: loaded.joint_relation.clone(),
        solver: SolverOptions {
            tol: args.tol,
            max_iter: args.max_iter,
        },
        ..MinGainOptions::default()
    };
    let doc = combine_document(&loaded, rule, &opts, args.base, args.precision)?;
    let text = match args.output {
        Format::Json => to_json(&doc),
        Format::Table => render_result(&doc),
    };
    if let Some(conflict) = &doc.conflict {
        let _ = writeln!(
            out.stderr,
            "conflict at step {}: {}",
            conflict.step, conflict.message
        );
    }
    match &args.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?,
        None => out.stdout = text,
    }
    Ok(if doc.conflict.is_some() {
        EXIT_CONFLICT
    } else {
        EXIT_OK
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// building documents

/// Folds the evidence in document order. A conflict ends the fold and is
/// reported in the document; other failures are errors.
pub fn combine_document(
    loaded: &Loaded,
    rule: Rule,
    opts: &MinGainOptions,
    base: Base,
    precision: Precision,
) -> Result<ResultDocument, CliError> {
    let r = |x: f64| precision.apply(x);
    let later = MinGainOptions {
        conditionals: Vec::new(),
        joint_relation: None,
        ..opts.clone()
    };
    let (first_name, first) = &loaded.bodies[0];
    let mut acc = first.clone();
    let mut acc_name = first_name.clone();
    let mut steps = Vec::new();
    let mut conflict = None;

    for (k, (name, next)) in loaded.bodies[1..].iter().enumerate() {
        let step = k + 1;
        let step_opts = if k == 0 { opts } else { &later };
        match combine_pair(&acc, next, rule, step_opts) {
            Ok(res) => {
                steps.push(step_report(step, &acc_name, name, &res, base, precision));
                acc = res.bpa;
                acc_name = format!("{acc_name} + {name}");
            }
            Err(Error::ConflictDetected(cert)) => {
                let left = abstract_evidence(&acc);
                let right = abstract_evidence(next);
                conflict = Some(ConflictReport {
                    step,
                    left: acc_name.clone(),
                    right: name.clone(),
                    message: cert.to_string(),
                    certificate: Some(certificate_entry(&cert, &left, &right, precision)),
                });
                break;
            }
            Err(Error::TotalConflict) => {
                conflict = Some(ConflictReport {
                    step,
                    left: acc_name.clone(),
                    right: name.clone(),
                    message: Error::TotalConflict.to_string(),
                    certificate: None,
                });
                break;
            }
            Err(source) => return Err(CliError::Combine { step, source }),
        }
    }

    let (combined, beliefs) = if conflict.is_some() {
        (None, Vec::new())
    } else {
        let canonical = acc.canonical();
        let masses: Vec<f64> = canonical.focal().iter().map(|(_, m)| *m).collect();
        let combined = canonical
            .focal()
            .iter()
            .zip(precision.apply_to_masses(&masses))
            .map(|((set, _), mass)| MassEntry {
                set: set_labels(set),
                mass,
            })
            .collect();
        let beliefs = belief_rows(&acc)
            .into_iter()
            .map(|(set, bel, pl)| BeliefEntry {
                set: set_labels(&set),
                bel: r(bel),
                pl: r(pl),
            })
            .collect();
        (Some(combined), beliefs)
    };

    Ok(ResultDocument {
        rule: rule.to_string(),
        status: if conflict.is_some() {
            "conflict"
        } else {
            "combined"
        }
        .to_string(),
        units: base.as_str().to_string(),
        frame: loaded.frame.labels().to_vec(),
        combined,
        beliefs,
        steps,
        conflict,
    })
}

fn set_labels(p: &Proposition) -> Vec<String> {
    p.labels().into_iter().map(str::to_string).collect()
}

fn elements(body: &EvidenceBody, precision: Precision) -> Vec<ElementEntry> {
    (0..body.len())
        .map(|i| ElementEntry {
            name: body.frame().label(i).to_string(),
            set: set_labels(body.relation().row(i)),
            prob: precision.apply(body.prob().get(i)),
        })
        .collect()
}

fn step_report(
    step: usize,
    left: &str,
    right: &str,
    res: &CombinedResult,
    base: Base,
    precision: Precision,
) -> StepReport {
    let r = |x: f64| precision.apply(x);
    StepReport {
        step,
        left: left.to_string(),
        right: right.to_string(),
        left_elements: elements(&res.left, precision),
        right_elements: elements(&res.right, precision),
        joint: (0..res.joint.n_rows())
            .map(|i| res.joint.row(i).iter().map(|&p| r(p)).collect())
            .collect(),
        normalization: r(res.normalization),
        conflict_mass: r(res.conflict_mass),
        information: information_entry(&res.measures, base, precision),
        solver: res
            .solver
            .as_ref()
            .map(|s| solver_entry(s, base, precision)),
    }
}

fn information_entry(m: &InformationReport, base: Base, precision: Precision) -> InformationEntry {
    let r = |x: f64| precision.apply(base.scale(x));
    InformationEntry {
        entropy_left: r(m.h_left),
        entropy_right: r(m.h_right),
        entropy_joint: r(m.h_joint),
        information_left: r(m.info_left),
        information_right: r(m.info_right),
        information_joint: r(m.info_joint),
        gain: r(m.gain),
        mutual_information: r(m.mutual),
    }
}

fn solver_entry(s: &SolverReport, base: Base, precision: Precision) -> SolverEntry {
    SolverEntry {
        method: match s.method {
            SolverMethod::IterativeScaling => "iterative_scaling",
            SolverMethod::DualAscentFallback => "dual_ascent",
        }
        .to_string(),
        iterations: s.iterations,
        residual: precision.apply(s.residual),
        entropy: precision.apply(base.scale(s.entropy)),
    }
}

fn certificate_entry(
    cert: &Certificate,
    left: &EvidenceBody,
    right: &EvidenceBody,
    precision: Precision,
) -> CertificateEntry {
    let all_left = elements(left, precision);
    let all_right = elements(right, precision);
    CertificateEntry {
        elements: cert.rows.iter().map(|&i| all_left[i].clone()).collect(),
        compatible: cert
            .reachable_cols
            .iter()
            .map(|&j| all_right[j].clone())
            .collect(),
        mass: precision.apply(cert.row_mass),
        compatible_mass: precision.apply(cert.reachable_mass),
        shortfall: precision.apply(cert.shortfall()),
    }
}

/// Focal elements and their unions, ordered by size then bit pattern,
/// capped at [`BELIEF_TABLE_CAP`] rows.
pub fn belief_rows(bpa: &Bpa) -> Vec<(Proposition, f64, f64)> {
    let mut sets: Vec<Proposition> = Vec::new();
    for (f, _) in bpa.focal() {
        if sets.contains(f) {
            continue;
        }
        let unions: Vec<Proposition> = sets.iter().map(|s| s | f).collect();
        sets.push(f.clone());
        for u in unions {
            if !sets.contains(&u) {
                sets.push(u);
            }
        }
    }
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets.truncate(BELIEF_TABLE_CAP);
    sets.into_iter()
        .map(|s| {
            let bel = bpa.bel(&s).expect("same frame");
            let pl = bpa.pl(&s).expect("same frame");
            (s, bel, pl)
        })
        .collect()
}

pub fn inspect_report(loaded: &Loaded, base: Base, precision: Precision) -> InspectReport {
    let r = |x: f64| precision.apply(x);
    let evidence = loaded
        .bodies
        .iter()
        .map(|(name, bpa)| {
            let body = abstract_evidence(bpa);
            InspectEntry {
                name: name.clone(),
                focal: bpa
                    .focal()
                    .iter()
                    .map(|(set, m)| FocalEntry {
                        set: set_labels(set),
                        mass: r(*m),
                        bel: r(bpa.bel(set).expect("same frame")),
                        pl: r(bpa.pl(set).expect("same frame")),
                    })
                    .collect(),
                elements: elements(&body, precision),
                entropy: r(base.scale(entropy(body.prob()))),
                information: r(base.scale(information(body.prob()))),
            }
        })
        .collect();
    InspectReport {
        units: base.as_str().to_string(),
        frame: loaded.frame.labels().to_vec(),
        evidence,
    }
}

// ---------------------------------------------------------------------------
// plain-text rendering

fn braces(set: &[String]) -> String {
    format!("{{{}}}", set.join(","))
}

pub fn render_result(doc: &ResultDocument) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "rule: {}", doc.rule);
    let _ = writeln!(s, "frame: {}", braces(&doc.frame));
    for st in &doc.steps {
        let _ = writeln!(s, "\nstep {}: {} with {}", st.step, st.left, st.right);
        for (side, els) in [("left", &st.left_elements), ("right", &st.right_elements)] {
            for e in els.iter() {
                let _ = writeln!(
                    s,
                    "  {side} {:<4} {:<16} {}",
                    e.name,
                    braces(&e.set),
                    e.prob
                );
            }
        }
        let _ = writeln!(s, "  joint:");
        for row in &st.joint {
            let cells: Vec<String> = row.iter().map(|p| format!("{p:>10}")).collect();
            let _ = writeln!(s, "   {}", cells.join(""));
        }
        let _ = writeln!(s, "  normalization K: {}", st.normalization);
        let _ = writeln!(s, "  conflict mass:   {}", st.conflict_mass);
        let i = &st.information;
        let _ = writeln!(
            s,
            "  entropy ({}): left {}, right {}, joint {}",
            doc.units, i.entropy_left, i.entropy_right, i.entropy_joint
        );
        let _ = writeln!(
            s,
            "  information: left {}, right {}, joint {}",
            i.information_left, i.information_right, i.information_joint
        );
        let _ = writeln!(
            s,
            "  gain: {}  mutual information: {}",
            i.gain, i.mutual_information
        );
        if let Some(sv) = &st.solver {
            let _ = writeln!(
                s,
                "  solver: {} ({} iterations, residual {})",
                sv.method, sv.iterations, sv.residual
            );
        }
    }
    if let Some(c) = &doc.conflict {
        let _ = writeln!(
            s,
            "\nCONFLICT at step {} ({} with {})",
            c.step, c.left, c.right
        );
        let _ = writeln!(s, "  {}", c.message);
        if let Some(cert) = &c.certificate {
            for e in &cert.elements {
                let _ = writeln!(
                    s,
                    "  unplaceable {} {} with probability {}",
                    e.name,
                    braces(&e.set),
                    e.prob
                );
            }
            let _ = writeln!(s, "  shortfall: {}", cert.shortfall);
        }
    }
    if let Some(combined) = &doc.combined {
        let _ = writeln!(s, "\ncombined:");
        for m in combined {
            let _ = writeln!(s, "  {:<16} {}", braces(&m.set), m.mass);
        }
        let _ = writeln!(s, "\n  {:<16} {:>10} {:>10}", "set", "bel", "pl");
        for b in &doc.beliefs {
            let _ = writeln!(s, "  {:<16} {:>10} {:>10}", braces(&b.set), b.bel, b.pl);
        }
    }
    s
}

pub fn render_inspect(report: &InspectReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "frame: {}", braces(&report.frame));
    for e in &report.evidence {
        let _ = writeln!(s, "\n{}:", e.name);
        let _ = writeln!(
            s,
            "  {:<16} {:>10} {:>10} {:>10}",
            "set", "mass", "bel", "pl"
        );
        for f in &e.focal {
            let _ = writeln!(
                s,
                "  {:<16} {:>10} {:>10} {:>10}",
                braces(&f.set),
                f.mass,
                f.bel,
                f.pl
            );
        }
        let _ = writeln!(s, "  abstract elements:");
        for el in &e.elements {
            let _ = writeln!(
                s,
                "    {} <=> {}  P = {}",
                el.name,
                braces(&el.set),
                el.prob
            );
        }
        let _ = writeln!(
            s,
            "  entropy {} {}, information {} {}",
            e.entropy, report.units, e.information, report.units
        );
    }
    s
}
