//! `rescube`: the library's operations over an inline expression or a file.
//!
//! Exit codes: 0 for a positive verdict, 1 for a negative one (ill-formed,
//! untypeable, divergent, invalid, undecided within the fuel), 2 for usage
//! and parse errors.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rescube::bridge::{measures, translate_context, translate_term};
use rescube::rewrite::{canonical, class_key, normalize, redexes, step, Outcome, Strategy};
use rescube::sn::{is_sn, successors, synthesize, Divergence, SnVerdict, SynthError};
use rescube::typing::{check_derivation, infer_simple, Derivation};
use rescube::wellformed::check;
use rescube::{alpha_eq, parse, print, Base, Expr, Res, Sort, Supply};

#[derive(Parser)]
#[command(
    name = "rescube",
    version,
    about = "Lambda calculi with explicit weakening and contraction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the formation rules.
    Check(Common),
    /// Contract one redex, or list every one-step reduct.
    Reduce {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = StrategyArg::Leftmost)]
        strategy: StrategyArg,
    },
    /// Reduce to normal form.
    Normalize {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = StrategyArg::Leftmost)]
        strategy: StrategyArg,
        /// Print one line per step: rule, path and result.
        #[arg(long)]
        trace: bool,
    },
    /// Infer the principal simple typing.
    Type(Common),
    /// Check or synthesize an intersection type derivation.
    Itype {
        #[command(flatten)]
        common: Common,
        /// Derivation JSON to check.
        #[arg(
            long,
            value_name = "FILE",
            conflicts_with = "synthesize",
            required_unless_present = "synthesize"
        )]
        check: Option<PathBuf>,
        /// Synthesize a derivation for a strongly normalising expression.
        #[arg(long)]
        synthesize: bool,
    },
    /// Translate a sequent expression into natural deduction.
    Translate(Common),
    /// Print the size, contraction norm and weakening norm.
    Measure(Common),
    /// Decide strong normalisation by exhaustive search.
    Sn(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value_t = BaseArg::Nd)]
    base: BaseArg,
    #[arg(long, value_enum, default_value_t = ResArg::None)]
    res: ResArg,
    /// Steps for reduction, classes for the search, nodes for synthesis.
    #[arg(long, default_value_t = 1000)]
    fuel: usize,
    /// Inline expression.
    #[arg(short = 'e', long = "expr", conflicts_with = "file")]
    expr: Option<String>,
    /// File holding one expression; lines starting with `#` are comments.
    file: Option<PathBuf>,
    /// Print one JSON document instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaseArg {
    Nd,
    Lj,
}

#[derive(Clone, Copy, ValueEnum)]
enum ResArg {
    None,
    C,
    W,
    Cw,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Leftmost,
    Innermost,
    Exhaustive,
}

impl Common {
    fn base(&self) -> Base {
        match self.base {
            BaseArg::Nd => Base::Nd,
            BaseArg::Lj => Base::Lj,
        }
    }

    fn res(&self) -> Res {
        match self.res {
            ResArg::None => Res::NONE,
            ResArg::C => Res::C,
            ResArg::W => Res::W,
            ResArg::Cw => Res::CW,
        }
    }

    fn source(&self) -> Result<Option<String>, String> {
        match (&self.expr, &self.file) {
            (Some(e), _) => Ok(Some(e.clone())),
            (None, Some(p)) => {
                let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
                let body: Vec<&str> = text
                    .lines()
                    .filter(|l| !l.trim_start().starts_with('#'))
                    .collect();
                Ok(Some(body.join("\n")))
            }
            (None, None) => Ok(None),
        }
    }

    fn input(&self) -> Result<Expr, String> {
        let src = self
            .source()?
            .ok_or("no expression given: use -e EXPR or a file")?;
        parse(&src, self.base()).map_err(|e| e.to_string())
    }
}

/// What a command produced: exit code, text lines and the JSON document.
struct Report {
    code: u8,
    text: Vec<String>,
    json: Value,
}

impl Report {
    fn new(code: u8, text: Vec<String>, json: Value) -> Report {
        Report { code, text, json }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = match &cli.command {
        Command::Check(c)
        | Command::Type(c)
        | Command::Translate(c)
        | Command::Measure(c)
        | Command::Sn(c) => c.json,
        Command::Reduce { common, .. }
        | Command::Normalize { common, .. }
        | Command::Itype { common, .. } => common.json,
    };
    match run(&cli.command) {
        Ok(r) => {
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&r.json).expect("values serialize")
                );
            } else {
                for line in &r.text {
                    println!("{line}");
                }
            }
            ExitCode::from(r.code)
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: &Command) -> Result<Report, String> {
    match cmd {
        Command::Check(c) => {
            let e = c.input()?;
            Ok(well_formed(&e, c).unwrap_or_else(|| {
                Report::new(
                    0,
                    vec![format!("well-formed under {}", c.res().name())],
                    header(
                        "check",
                        &e,
                        c,
                        json!({ "well_formed": true, "violation": null }),
                    ),
                )
            }))
        }
        Command::Reduce { common, strategy } => {
            with_input(common, |e| reduce(e, common, *strategy))
        }
        Command::Normalize {
            common,
            strategy,
            trace,
        } => with_input(common, |e| normal(e, common, *strategy, *trace)),
        Command::Type(c) => with_input(c, |e| simple(e, c)),
        Command::Itype {
            common,
            check,
            synthesize,
        } => itype(common, check.as_ref(), *synthesize),
        Command::Translate(c) => {
            if c.base() != Base::Lj {
                return Err("translate takes a sequent expression: use --base lj".into());
            }
            with_input(c, |e| translate(e, c))
        }
        Command::Measure(c) => with_input(c, |e| {
            let m = measures(e);
            let j = json!({ "size": m.size, "cnorm": m.cnorm, "wnorm": m.wnorm });
            Report::new(0, vec![m.to_string()], header("measure", e, c, j))
        }),
        Command::Sn(c) => with_input(c, |e| sn(e, c)),
    }
}

/// Parse, then run `f` on a well-formed expression.
fn with_input(c: &Common, f: impl FnOnce(&Expr) -> Report) -> Result<Report, String> {
    let e = c.input()?;
    Ok(well_formed(&e, c).unwrap_or_else(|| f(&e)))
}

/// The failure report for an ill-formed expression, if it is one.
fn well_formed(e: &Expr, c: &Common) -> Option<Report> {
    let v = check(e, c.res()).err()?;
    let j = json!({
        "well_formed": false,
        "violation": { "path": rescube::path_string(&v.path), "clause": v.clause.to_string() },
    });
    Some(Report::new(
        1,
        vec![format!("ill-formed under {}: {v}", c.res().name())],
        header("check", e, c, j),
    ))
}

/// The common fields of every JSON document, followed by `rest`.
fn header(command: &str, e: &Expr, c: &Common, rest: Value) -> Value {
    let mut out = json!({
        "command": command,
        "base": match c.base() { Base::Nd => "nd", Base::Lj => "lj" },
        "res": c.res().name(),
        "expr": print(e),
    });
    if let (Value::Object(o), Value::Object(r)) = (&mut out, rest) {
        o.extend(r);
    }
    out
}

fn pick(s: StrategyArg) -> Strategy {
    match s {
        StrategyArg::Innermost => Strategy::Innermost,
        _ => Strategy::Leftmost,
    }
}

fn reduce(e: &Expr, c: &Common, strategy: StrategyArg) -> Report {
    let (base, res) = (c.base(), c.res());
    let cur = canonical(e);
    let mut rs = redexes(&cur, base, res);
    if strategy != StrategyArg::Exhaustive {
        rs = pick(strategy).pick(&rs).into_iter().collect();
    }
    let mut text = Vec::new();
    let mut steps = Vec::new();
    for r in &rs {
        let mut supply = Supply::above(&cur);
        let next =
            canonical(&step(&cur, r, base, res, &mut supply).expect("enumerated redex applies"));
        text.push(format!("{r}: {next}"));
        steps.push(json!({ "rule": r.rule.name(), "path": rescube::path_string(&r.path), "result": print(&next) }));
    }
    if rs.is_empty() {
        text.push(format!("normal form: {cur}"));
    }
    Report::new(0, text, header("reduce", e, c, json!({ "steps": steps })))
}

fn normal(e: &Expr, c: &Common, strategy: StrategyArg, trace: bool) -> Report {
    if strategy == StrategyArg::Exhaustive {
        return normal_forms(e, c);
    }
    let out = normalize(e, c.base(), c.res(), pick(strategy), c.fuel);
    let t = out.trace();
    let mut text = Vec::new();
    if trace {
        text.push(print(&t.start));
        for s in &t.steps {
            text.push(format!(
                "{} {} {}",
                s.redex.rule.name(),
                rescube::path_string(&s.redex.path),
                s.result
            ));
        }
    }
    let steps: Vec<Value> = t
        .steps
        .iter()
        .map(|s| json!({ "rule": s.redex.rule.name(), "path": rescube::path_string(&s.redex.path), "result": print(&s.result) }))
        .collect();
    let (code, verdict) = match out {
        Outcome::NormalForm(_) => (0, "normal form"),
        Outcome::FuelExhausted(_) => (1, "fuel exhausted"),
    };
    match code {
        0 => text.push(print(t.last())),
        _ => text.push(format!(
            "no normal form within {} steps; reached {}",
            c.fuel,
            t.last()
        )),
    }
    let j = json!({ "verdict": verdict, "result": print(t.last()), "steps": steps });
    Report::new(code, text, header("normalize", e, c, j))
}

/// Every normal form reachable from `e`, by breadth-first search over
/// classes with at most `fuel` classes.
fn normal_forms(e: &Expr, c: &Common) -> Report {
    let (base, res) = (c.base(), c.res());
    let root = class_key(e);
    let mut seen: HashSet<Expr> = HashSet::from([root.clone()]);
    let mut queue = VecDeque::from([root]);
    let mut found = BTreeSet::new();
    while let Some(k) = queue.pop_front() {
        let next = successors(&k, base, res);
        if next.is_empty() {
            found.insert(print(&k));
        }
        for s in next {
            if seen.len() >= c.fuel && !seen.contains(&s) {
                let j = json!({ "verdict": "fuel exhausted", "classes": seen.len(), "normal_forms": Vec::from_iter(found) });
                let text = vec![format!("inconclusive: more than {} classes", c.fuel)];
                return Report::new(1, text, header("normalize", e, c, j));
            }
            if seen.insert(s.clone()) {
                queue.push_back(s);
            }
        }
    }
    let text = found.iter().cloned().collect();
    let j = json!({ "verdict": "explored", "classes": seen.len(), "normal_forms": Vec::from_iter(found) });
    Report::new(0, text, header("normalize", e, c, j))
}

fn simple(e: &Expr, c: &Common) -> Report {
    match infer_simple(e, c.base(), c.res()) {
        Ok(t) => {
            let line = t.derivation.concl.to_string().trim_start().to_string();
            let j =
                json!({ "typeable": true, "judgment": line, "derivation": t.derivation.to_json() });
            Report::new(0, vec![line], header("type", e, c, j))
        }
        Err(u) => {
            let j = json!({ "typeable": false, "reason": u.constraint });
            Report::new(1, vec![u.to_string()], header("type", e, c, j))
        }
    }
}

fn itype(c: &Common, file: Option<&PathBuf>, synth: bool) -> Result<Report, String> {
    let (base, res) = (c.base(), c.res());
    if synth {
        return with_input(c, |e| match synthesize(e, base, res, c.fuel) {
            Ok(d) => {
                let j = json!({ "typeable": true, "derivation": d.to_json() });
                Report::new(0, vec![d.to_json_string()], header("itype", e, c, j))
            }
            Err(err) => {
                let verdict = match err {
                    SynthError::NotSn(_) => "not strongly normalising",
                    SynthError::Fuel => "fuel exhausted",
                    _ => "failed",
                };
                let j = json!({ "typeable": false, "verdict": verdict, "reason": err.to_string() });
                Report::new(1, vec![err.to_string()], header("itype", e, c, j))
            }
        });
    }
    let path = file.expect("clap requires --check or --synthesize");
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let d = Derivation::from_json_str(&text, base).map_err(|e| e.to_string())?;
    let subject = d.subject().clone();
    if let Some(src) = c.source()? {
        let e = parse(&src, base).map_err(|e| e.to_string())?;
        if !alpha_eq(&e, &subject) {
            let j =
                json!({ "valid": false, "reason": format!("the derivation is about {subject}") });
            return Ok(Report::new(
                1,
                vec![format!(
                    "invalid: the derivation is about {subject}, not {e}"
                )],
                header("itype", &e, c, j),
            ));
        }
    }
    Ok(match check_derivation(&d, base, res) {
        Ok(()) => {
            let line = format!("valid: {}", d.concl.to_string().trim_start());
            Report::new(
                0,
                vec![line],
                header(
                    "itype",
                    &subject,
                    c,
                    json!({ "valid": true, "judgment": d.concl.to_string() }),
                ),
            )
        }
        Err(inv) => {
            let j = json!({ "valid": false, "reason": inv.to_string() });
            Report::new(
                1,
                vec![format!("invalid: {inv}")],
                header("itype", &subject, c, j),
            )
        }
    })
}

fn translate(e: &Expr, c: &Common) -> Report {
    let out = match e.root_sort() {
        Sort::Context => translate_context(e).to_string(),
        _ => print(&translate_term(e)),
    };
    Report::new(
        0,
        vec![out.clone()],
        header("translate", e, c, json!({ "translation": out })),
    )
}

fn sn(e: &Expr, c: &Common) -> Report {
    let v = is_sn(e, c.base(), c.res(), c.fuel);
    let j = match &v {
        SnVerdict::StronglyNormalising {
            max_path_len,
            graph_size,
        } => {
            json!({ "verdict": "strongly normalising", "longest_path": max_path_len, "graph_size": graph_size })
        }
        SnVerdict::Diverges(Divergence::Cycle(cyc)) => {
            json!({ "verdict": "diverges", "cycle": cyc.iter().map(print).collect::<Vec<_>>() })
        }
        SnVerdict::Diverges(Divergence::Fuel { explored }) => {
            json!({ "verdict": "inconclusive", "explored": explored })
        }
    };
    let code = if v.is_sn() { 0 } else { 1 };
    Report::new(code, vec![v.to_string()], header("sn", e, c, j))
}
