//! The `meanlogic` command line.
//!
//! Exit codes: 0 when the command succeeds or the checked property holds,
//! 1 when a property fails (the report carries the counterexample), 2 on
//! invalid input or usage.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::approx::{build_theory_points, chebyshev_fit, check_preserved};
use crate::charge::Charge;
use crate::error::{domain, Error, Result};
use crate::formula::{enumerate_fragment, parse, Assignment, Formula, FragmentSpec};
use crate::gen::Generator;
use crate::mean::{
    cap_from_env, compose_check, diagonal_check, los_pointmass_check, raw_assignments, ultramean,
    verify_mean_theorem, MeanOptions, MeanStructure,
};
use crate::rational::{self, Rational};
use crate::signature::Signature;
use crate::structure::{validate_structure, FiniteStructure, PNorm};
use crate::types::{
    back_and_forth, equiv_check_sentences, extreme_types, realize_convex_type, realized_types,
    Fragment, GameOutcome, TypeVector,
};

#[derive(Parser, Debug)]
#[command(
    name = "meanlogic",
    version,
    about = "Exact continuous logic on finite metric structures"
)]
pub struct Cli {
    /// Emit machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Exponent of the p-norm (metric atoms, linearity, mean metric).
    #[arg(long, global = true, default_value_t = 1)]
    p: u32,
    /// Seed for randomized modes.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Raw-tuple cap for mean constructions (defaults to MEANLOGIC_CAP or 4096).
    #[arg(long, global = true)]
    cap: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check metric axioms, bounds and moduli of a structure.
    Validate {
        #[arg(long)]
        structure: PathBuf,
    },
    /// Evaluate a formula.
    Eval {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        formula: String,
        /// Variable assignment `x=elem`, repeatable.
        #[arg(long = "assign", value_name = "VAR=ELEM")]
        assign: Vec<String>,
    },
    /// Build the ultramean of several structures.
    Mean {
        #[arg(long, num_args = 1.., required = true)]
        structures: Vec<PathBuf>,
        #[arg(long)]
        charge: PathBuf,
        #[command(flatten)]
        out: MeanOutput,
    },
    /// Build the powermean of one structure.
    Powermean {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        charge: PathBuf,
        #[command(flatten)]
        out: MeanOutput,
    },
    /// Property checks.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Fragment types.
    #[command(subcommand)]
    Types(TypesCommand),
    /// Compare two structures on the sentences of a fragment.
    Equiv {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        fragment: PathBuf,
    },
    /// Play the back-and-forth game.
    Game {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        fragment: PathBuf,
        #[arg(long)]
        depth: usize,
    },
    /// Affine approximation.
    #[command(subcommand)]
    Approx(ApproxCommand),
}

#[derive(Args, Debug)]
struct MeanOutput {
    /// Write the base structure here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the class sidecar here.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum CheckCommand {
    /// Point-mass collapse of an ultramean onto one factor.
    Los {
        #[arg(long, num_args = 1.., required = true)]
        structures: Vec<PathBuf>,
        /// 0-based factor index.
        #[arg(long)]
        pointmass: usize,
        #[arg(long)]
        fragment: PathBuf,
    },
    /// The diagonal embedding into a powermean.
    Diagonal {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        charge: PathBuf,
        #[arg(long)]
        fragment: PathBuf,
    },
    /// `M^{μ⊗ν}` against `(M^μ)^ν`.
    Compose {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
        #[arg(long)]
        fragment: PathBuf,
    },
    /// Preservation of a sentence under convex combinations.
    Preserved {
        #[arg(long, allow_hyphen_values = true)]
        formula: String,
        #[arg(long)]
        pairs: PathBuf,
    },
    /// The integral identity for a linear formula on an ultramean.
    Mean {
        #[arg(long, num_args = 1.., required = true)]
        structures: Vec<PathBuf>,
        #[arg(long)]
        charge: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        formula: String,
        /// Maximum number of raw-tuple assignments checked.
        #[arg(long, default_value_t = 50)]
        limit: usize,
    },
    /// The integral identity on seeded random ultrameans.
    Random {
        #[arg(long, default_value_t = 20)]
        instances: usize,
    },
}

#[derive(Subcommand, Debug)]
enum TypesCommand {
    /// Type vectors of every tuple.
    Realized {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        fragment: PathBuf,
    },
    /// Extreme points among vectors (a JSON list of rational-string lists), or among realized types.
    Extremes {
        #[arg(long, conflicts_with_all = ["structure", "fragment"])]
        vectors: Option<PathBuf>,
        #[arg(long, requires = "fragment")]
        structure: Option<PathBuf>,
        #[arg(long, requires = "structure")]
        fragment: Option<PathBuf>,
    },
    /// Realize a weighted combination of realized types in a powermean.
    Realize {
        #[arg(long)]
        structure: PathBuf,
        /// Charge file, or a JSON list of weights over tuples in lexicographic order.
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        fragment: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum ApproxCommand {
    /// Best sup-norm fit of a target sentence by a basis over a corpus.
    Fit {
        #[arg(long, num_args = 1.., required = true)]
        corpus: Vec<PathBuf>,
        /// Basis sentences; must include `1`.
        #[arg(long, num_args = 1.., required = true)]
        basis: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        /// JSON list of `{"epsilon": "p/q", "left": i, "right": j}` corpus combinations.
        #[arg(long)]
        closure: Option<PathBuf>,
    },
}

enum Outcome {
    Holds,
    Fails,
}

struct Ctx<'w> {
    json: bool,
    opts: MeanOptions,
    seed: Option<u64>,
    out: &'w mut dyn Write,
}

impl Ctx<'_> {
    fn emit(&mut self, value: &Value, table: &str) -> Result<()> {
        if self.json {
            writeln!(self.out, "{}", serde_json::to_string_pretty(value)?)?;
        } else {
            write!(self.out, "{table}")?;
            if !table.ends_with('\n') {
                writeln!(self.out)?;
            }
        }
        Ok(())
    }
}

/// Runs the CLI on `args` (including the program name), writing reports to
/// `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return 0;
                }
                _ => 2,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    let p = match PNorm::new(cli.p) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let mut ctx = Ctx {
        json: cli.json,
        opts: MeanOptions {
            p,
            cap: cli.cap.unwrap_or_else(cap_from_env),
        },
        seed: cli.seed,
        out,
    };
    match dispatch(cli.command, &mut ctx) {
        Ok(Outcome::Holds) => 0,
        Ok(Outcome::Fails) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Domain(format!("cannot read {}: {e}", path.display())))
}

fn load_structure(path: &Path) -> Result<FiniteStructure> {
    FiniteStructure::from_json_str(&read(path)?).map_err(|e| with_path(e, path))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Structural(m) => Error::Structural(format!("{}: {m}", path.display())),
        Error::Json(j) => Error::Domain(format!("{}: {j}", path.display())),
        other => other,
    }
}

fn load_charge(path: &Path) -> Result<Charge> {
    Charge::from_json_str(&read(path)?).map_err(|e| with_path(e, path))
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<FiniteStructure>> {
    paths.iter().map(|p| load_structure(p)).collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FragmentFile {
    Explicit {
        formulas: Vec<String>,
        #[serde(default)]
        free_vars: Option<Vec<String>>,
    },
    Spec(FragmentSpec),
}

/// Reads a fragment file: either a `FragmentSpec` or `{"formulas": [...]}`.
fn load_formulas(
    path: &Path,
    sig: &Signature,
    p: PNorm,
) -> Result<(Vec<Formula>, Option<Vec<String>>, bool)> {
    let file: FragmentFile =
        serde_json::from_str(&read(path)?).map_err(|e| with_path(Error::Json(e), path))?;
    match file {
        FragmentFile::Explicit {
            formulas,
            free_vars,
        } => {
            let fs = formulas
                .iter()
                .map(|t| parse(t, sig))
                .collect::<Result<Vec<_>>>()?;
            let continuous = fs.iter().any(|f| !f.is_linear(p));
            Ok((fs, free_vars, continuous))
        }
        FragmentFile::Spec(spec) => {
            let fs = enumerate_fragment(&spec, sig, p)?;
            Ok((fs, Some(spec.free_vars.clone()), spec.lattice))
        }
    }
}

fn load_fragment(path: &Path, sig: &Signature, p: PNorm) -> Result<Fragment> {
    let (fs, vars, continuous) = load_formulas(path, sig, p)?;
    match vars {
        Some(v) if !v.is_empty() => Fragment::with_vars(fs, v, p, continuous),
        _ if continuous => Fragment::continuous(fs, p),
        _ => Fragment::new(fs, p),
    }
}

fn q(r: &Rational) -> String {
    rational::format(r)
}

fn verdict(holds: bool) -> &'static str {
    if holds {
        "holds"
    } else {
        "FAILS"
    }
}

fn outcome(holds: bool) -> Outcome {
    if holds {
        Outcome::Holds
    } else {
        Outcome::Fails
    }
}

fn dispatch(command: Command, ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let p = ctx.opts.p;
    match command {
        Command::Validate { structure } => {
            let s = load_structure(&structure)?;
            let report = validate_structure(&s, p);
            let mut table = String::new();
            if report.is_valid() {
                table.push_str("valid\n");
            }
            for v in &report.violations {
                table.push_str(&format!(
                    "{:?}: {} violation(s), first at {:?}: {}\n",
                    v.constraint, v.count, v.witness, v.detail
                ));
            }
            let value = json!({"valid": report.is_valid(), "violations": report.violations});
            ctx.emit(&value, &table)?;
            Ok(outcome(report.is_valid()))
        }
        Command::Eval {
            structure,
            formula,
            assign,
        } => {
            let s = load_structure(&structure)?;
            let f = parse(&formula, s.signature())?;
            let mut asg = Assignment::new();
            for a in &assign {
                let Some((var, elem)) = a.split_once('=') else {
                    return domain(format!("assignment `{a}` is not of the form VAR=ELEM"));
                };
                let e = s
                    .element_index(elem.trim())
                    .ok_or_else(|| Error::Domain(format!("unknown element `{}`", elem.trim())))?;
                asg.insert(var.trim().to_string(), e);
            }
            let v = crate::formula::eval(&f, &s, &asg)?;
            ctx.emit(&json!({"formula": f.to_string(), "value": q(&v)}), &q(&v))?;
            Ok(Outcome::Holds)
        }
        Command::Mean {
            structures,
            charge,
            out,
        } => {
            let m = ultramean(load_all(&structures)?, load_charge(&charge)?, ctx.opts)?;
            emit_mean(ctx, &m, &out)
        }
        Command::Powermean {
            structure,
            charge,
            out,
        } => {
            let s = load_structure(&structure)?;
            let m = crate::mean::powermean(&s, load_charge(&charge)?, ctx.opts)?;
            emit_mean(ctx, &m, &out)
        }
        Command::Check(c) => check(c, ctx),
        Command::Types(t) => types(t, ctx),
        Command::Equiv {
            left,
            right,
            fragment,
        } => {
            let (m, n) = (load_structure(&left)?, load_structure(&right)?);
            let (sentences, _, _) = load_formulas(&fragment, m.signature(), p)?;
            let report = equiv_check_sentences(&m, &n, &sentences)?;
            let table = match &report.counterexample {
                Some(c) => format!(
                    "distinguished by {} : {} vs {} (after {} sentences)\n",
                    c.sentence,
                    q(&c.left),
                    q(&c.right),
                    report.sentences_checked
                ),
                None => format!(
                    "{} ({} sentences)\n",
                    report.verdict, report.sentences_checked
                ),
            };
            ctx.emit(&serde_json::to_value(&report)?, &table)?;
            Ok(outcome(report.indistinguishable()))
        }
        Command::Game {
            left,
            right,
            fragment,
            depth,
        } => {
            let (m, n) = (load_structure(&left)?, load_structure(&right)?);
            let f = load_fragment(&fragment, m.signature(), p)?;
            let report = back_and_forth(&m, &n, &f, depth)?;
            let table = match &report.outcome {
                GameOutcome::Success { .. } => {
                    format!("duplicator wins {depth} rounds ({})\n", report.note)
                }
                GameOutcome::Failure { witness } => format!(
                    "fails at round {}: challenge {} in {:?} has no partner; history {:?}\n",
                    witness.round, witness.challenge, witness.side, witness.history
                ),
            };
            ctx.emit(&serde_json::to_value(&report)?, &table)?;
            Ok(outcome(report.success()))
        }
        Command::Approx(ApproxCommand::Fit {
            corpus,
            basis,
            target,
            closure,
        }) => {
            let structures = load_all(&corpus)?;
            let sig = structures
                .first()
                .map(|s| s.signature().clone())
                .ok_or_else(|| Error::Domain("empty corpus".into()))?;
            let basis = basis
                .iter()
                .map(|t| parse(t, &sig))
                .collect::<Result<Vec<_>>>()?;
            for b in &basis {
                b.require_linear(p)?;
            }
            let target = parse(&target, &sig)?;
            let closure = match closure {
                None => Vec::new(),
                Some(path) => {
                    #[derive(Deserialize)]
                    struct Entry {
                        #[serde(with = "crate::rational::serde_str")]
                        epsilon: Rational,
                        left: usize,
                        right: usize,
                    }
                    let entries: Vec<Entry> = serde_json::from_str(&read(&path)?)?;
                    entries
                        .into_iter()
                        .map(|e| (e.epsilon, e.left, e.right))
                        .collect()
                }
            };
            let points = build_theory_points(&structures, &basis, &closure, ctx.opts)?;
            let fit = chebyshev_fit(&target, &basis, &points)?;
            let mut table = format!("epsilon* = {}\n", q(&fit.epsilon));
            for (b, c) in &fit.coefficients {
                table.push_str(&format!("  {b}: {}\n", q(c)));
            }
            for (pt, r) in &fit.residuals {
                table.push_str(&format!("  residual {pt}: {}\n", q(r)));
            }
            ctx.emit(&serde_json::to_value(&fit)?, &table)?;
            Ok(Outcome::Holds)
        }
    }
}

fn emit_mean(ctx: &mut Ctx<'_>, m: &MeanStructure, out: &MeanOutput) -> Result<Outcome> {
    let base = m.base().to_json();
    let sidecar = m.sidecar_json();
    if let Some(path) = &out.out {
        std::fs::write(path, serde_json::to_string_pretty(&base)?)?;
    }
    if let Some(path) = &out.sidecar {
        std::fs::write(path, serde_json::to_string_pretty(&sidecar)?)?;
    }
    let mut table = format!(
        "{} classes from {} raw tuples\n",
        m.class_count(),
        m.raw_count()
    );
    for (c, members) in m.members().iter().enumerate() {
        let shown: Vec<String> = members
            .iter()
            .map(|raw| crate::mean::format_tuple(m, raw))
            .collect();
        table.push_str(&format!(
            "  {}: {}\n",
            m.base().element_name(c),
            shown.join(" ")
        ));
    }
    ctx.emit(&json!({"structure": base, "sidecar": sidecar}), &table)?;
    Ok(Outcome::Holds)
}

fn rows_table(rows: &[crate::mean::SentenceRow]) -> String {
    let mut t = String::new();
    for r in rows.iter().filter(|r| !r.equal).take(10) {
        t.push_str(&format!(
            "  mismatch {} at {:?}: {} vs {}\n",
            r.formula,
            r.at,
            q(&r.left),
            q(&r.right)
        ));
    }
    t
}

fn check(c: CheckCommand, ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let p = ctx.opts.p;
    match c {
        CheckCommand::Los {
            structures,
            pointmass,
            fragment,
        } => {
            let factors = load_all(&structures)?;
            let sig = factors[0].signature().clone();
            let (fs, _, _) = load_formulas(&fragment, &sig, p)?;
            let r = los_pointmass_check(factors, pointmass, &fs, ctx.opts)?;
            let mut table = format!(
                "point mass at {}: {} sentences, {}\n",
                r.point,
                r.rows.len(),
                verdict(r.holds)
            );
            for d in &r.isomorphism_defects {
                table.push_str(&format!("  {d}\n"));
            }
            table.push_str(&rows_table(&r.rows));
            ctx.emit(&serde_json::to_value(&r)?, &table)?;
            Ok(outcome(r.holds))
        }
        CheckCommand::Diagonal {
            structure,
            charge,
            fragment,
        } => {
            let s = load_structure(&structure)?;
            let (fs, _, _) = load_formulas(&fragment, s.signature(), p)?;
            let r = diagonal_check(&s, load_charge(&charge)?, &fs, ctx.opts)?;
            let mut table = format!(
                "diagonal embedding: {} checks, {}\n",
                r.rows.len(),
                verdict(r.holds)
            );
            table.push_str(&rows_table(&r.rows));
            ctx.emit(&serde_json::to_value(&r)?, &table)?;
            Ok(outcome(r.holds))
        }
        CheckCommand::Compose {
            structure,
            mu,
            nu,
            fragment,
        } => {
            let s = load_structure(&structure)?;
            let (fs, _, _) = load_formulas(&fragment, s.signature(), p)?;
            let r = compose_check(&s, &load_charge(&mu)?, &load_charge(&nu)?, &fs, ctx.opts)?;
            let mut table = format!(
                "{} vs {} classes, well defined: {}, {}\n",
                r.left_classes,
                r.right_classes,
                r.well_defined,
                verdict(r.holds)
            );
            for d in &r.isomorphism_defects {
                table.push_str(&format!("  {d}\n"));
            }
            table.push_str(&rows_table(&r.rows));
            ctx.emit(&serde_json::to_value(&r)?, &table)?;
            Ok(outcome(r.holds))
        }
        CheckCommand::Preserved { formula, pairs } => {
            let base_dir = pairs.parent().map(Path::to_path_buf).unwrap_or_default();
            let triples = load_pairs(&pairs, &base_dir)?;
            let sig = triples
                .first()
                .map(|t| t.1.signature().clone())
                .ok_or_else(|| Error::Domain("no pairs given".into()))?;
            let phi = parse(&formula, &sig)?;
            let r = check_preserved(&phi, &triples, ctx.opts)?;
            let mut table = format!(
                "{}: {}\n",
                r.formula,
                if r.passes {
                    "preserved"
                } else {
                    "NOT preserved"
                }
            );
            for row in r.rows.iter().filter(|r| !r.equal) {
                table.push_str(&format!(
                    "  epsilon={}: mean {} vs integral {}\n",
                    q(&row.epsilon),
                    q(&row.mean),
                    q(&row.integral)
                ));
            }
            ctx.emit(&serde_json::to_value(&r)?, &table)?;
            Ok(outcome(r.passes))
        }
        CheckCommand::Mean {
            structures,
            charge,
            formula,
            limit,
        } => {
            let m = ultramean(load_all(&structures)?, load_charge(&charge)?, ctx.opts)?;
            let phi = parse(&formula, m.base().signature())?;
            let tuples = raw_assignments(&m, phi.free_vars().len(), limit);
            let r = verify_mean_theorem(&m, &phi, &tuples)?;
            let mut table = format!(
                "{}: {} assignments, {}\n",
                r.formula,
                r.rows.len(),
                verdict(r.holds)
            );
            for row in r.rows.iter().filter(|r| !r.equal).take(10) {
                table.push_str(&format!(
                    "  {:?}: {} vs {}\n",
                    row.tuples,
                    q(&row.lhs),
                    q(&row.rhs)
                ));
            }
            ctx.emit(&serde_json::to_value(&r)?, &table)?;
            Ok(outcome(r.holds))
        }
        CheckCommand::Random { instances } => {
            let seed = ctx.seed.unwrap_or(0);
            let mut g = Generator::new(seed);
            let mut failures = Vec::new();
            let mut checked = 0usize;
            for k in 0..instances {
                let inst = g.mean_instance(p)?;
                let r = verify_mean_theorem(&inst.mean, &inst.formula, &inst.tuples)?;
                checked += r.rows.len();
                if !r.holds {
                    failures.push(json!({"instance": k, "formula": r.formula}));
                }
            }
            let holds = failures.is_empty();
            let table = format!(
                "seed {seed}: {instances} instances, {checked} assignments, {}\n",
                verdict(holds)
            );
            let value = json!({"seed": seed, "instances": instances, "assignments": checked, "holds": holds, "failures": failures});
            ctx.emit(&value, &table)?;
            Ok(outcome(holds))
        }
    }
}

fn load_pairs(
    path: &Path,
    base_dir: &Path,
) -> Result<Vec<(Rational, FiniteStructure, FiniteStructure)>> {
    let value: Value = serde_json::from_str(&read(path)?)?;
    let entries = value
        .as_array()
        .ok_or_else(|| Error::Domain("pairs file must be a JSON list".into()))?;
    let load = |v: &Value| -> Result<FiniteStructure> {
        match v {
            Value::String(p) => load_structure(&base_dir.join(p)),
            Value::Object(_) => FiniteStructure::from_json(v),
            _ => domain("a pair member must be a file path or a structure object"),
        }
    };
    entries
        .iter()
        .map(|e| {
            let eps = e
                .get("epsilon")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Domain("pair entry needs an `epsilon` string".into()))?;
            let (Some(l), Some(r)) = (e.get("left"), e.get("right")) else {
                return domain("pair entry needs `left` and `right`");
            };
            Ok((rational::parse(eps)?, load(l)?, load(r)?))
        })
        .collect()
}

fn vector_strings(v: &TypeVector) -> Vec<String> {
    v.values.iter().map(q).collect()
}

fn types(t: TypesCommand, ctx: &mut Ctx<'_>) -> Result<Outcome> {
    let p = ctx.opts.p;
    match t {
        TypesCommand::Realized {
            structure,
            fragment,
        } => {
            let s = load_structure(&structure)?;
            let f = load_fragment(&fragment, s.signature(), p)?;
            let rows = realized_types(&s, &f, f.arity())?;
            let mut table = String::new();
            let mut entries = Vec::new();
            for (tuple, v) in &rows {
                let names: Vec<&str> = tuple.iter().map(|&a| s.element_name(a)).collect();
                table.push_str(&format!(
                    "({}) -> ({})\n",
                    names.join(","),
                    vector_strings(v).join(", ")
                ));
                entries.push(json!({"tuple": names, "values": v}));
            }
            let formulas: Vec<String> = f.formulas().iter().map(|x| x.to_string()).collect();
            ctx.emit(&json!({"formulas": formulas, "types": entries}), &table)?;
            Ok(Outcome::Holds)
        }
        TypesCommand::Extremes {
            vectors,
            structure,
            fragment,
        } => {
            let vs: Vec<TypeVector> = match (vectors, structure, fragment) {
                (Some(path), _, _) => {
                    let raw: Vec<Vec<String>> = serde_json::from_str(&read(&path)?)?;
                    raw.iter()
                        .map(|row| {
                            Ok(TypeVector::new(
                                row.iter()
                                    .map(|x| rational::parse(x))
                                    .collect::<Result<_>>()?,
                            ))
                        })
                        .collect::<Result<_>>()?
                }
                (None, Some(s), Some(f)) => {
                    let s = load_structure(&s)?;
                    let f = load_fragment(&f, s.signature(), p)?;
                    realized_types(&s, &f, f.arity())?
                        .into_iter()
                        .map(|(_, v)| v)
                        .collect()
                }
                _ => return domain("give --vectors, or --structure with --fragment"),
            };
            let flags = extreme_types(&vs)?;
            let mut table = String::new();
            let mut entries = Vec::new();
            for (v, e) in vs.iter().zip(&flags) {
                table.push_str(&format!(
                    "({}) {}\n",
                    vector_strings(v).join(", "),
                    if e.is_extreme() {
                        "extreme"
                    } else {
                        "not extreme"
                    }
                ));
                entries.push(json!({"vector": v, "certificate": e}));
            }
            ctx.emit(&Value::from(entries), &table)?;
            Ok(Outcome::Holds)
        }
        TypesCommand::Realize {
            structure,
            weights,
            fragment,
        } => {
            let s = load_structure(&structure)?;
            let f = load_fragment(&fragment, s.signature(), p)?;
            let text = read(&weights)?;
            let charge = match serde_json::from_str::<Vec<String>>(&text) {
                Ok(ws) => Charge::from_weights(
                    ws.iter()
                        .map(|w| rational::parse(w))
                        .collect::<Result<_>>()?,
                )?,
                Err(_) => Charge::from_json_str(&text)?,
            };
            let r = realize_convex_type(&s, &charge, &f, ctx.opts)?;
            let holds = r.vector == r.expected;
            let elements: Vec<&str> = r
                .elements
                .iter()
                .map(|&e| r.mean.base().element_name(e))
                .collect();
            let table = format!(
                "realized by ({}) in a {}-class powermean: ({}), weighted combination ({}), {}\n",
                elements.join(","),
                r.mean.class_count(),
                vector_strings(&r.vector).join(", "),
                vector_strings(&r.expected).join(", "),
                verdict(holds)
            );
            let value = json!({
                "elements": elements,
                "vector": r.vector,
                "expected": r.expected,
                "equal": holds,
                "classes": r.mean.class_count(),
            });
            ctx.emit(&value, &table)?;
            Ok(outcome(holds))
        }
    }
}

/// Entry point for the binary.
pub fn main_with_env() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
