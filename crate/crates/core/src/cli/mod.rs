//! The `workbench` command line.
//!
//! Output is JSON on stdout (family text for `build`, a decimal integer for
//! `count`). Exit codes: 0 success, 1 input error, 2 budget-truncated result,
//! 64 usage error.

pub mod cache;
pub mod repro;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::{json, Map, Value};

use crate::construct::{build_basic, build_fs, build_theorem13, count_fs};
use crate::error::{Error, Result};
use crate::lowdim::{solve_sstar_with_phi, LayeredCandidate, SStarSolution};
use crate::search::{self, Budget, ResultJson, SearchResult, WitnessMode};
use crate::setcore::Family;
use crate::spectral::{johnson, kk_check, lambda2};
use crate::sunflower::{find_sunflower, verify_cert, CertJson, CoreConstraint};
use cache::{Cache, Params, RunRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_TRUNCATED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "workbench", version, about = "Search and verification toolkit for sunflower-free set families")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Node limit for searches.
    #[arg(long, global = true, default_value_t = 100_000_000)]
    pub budget_nodes: u64,
    /// Wall-clock limit for searches, in seconds.
    #[arg(long, global = true, default_value_t = 600.0)]
    pub budget_secs: f64,
    /// Worker threads; accepted for compatibility, searches run on one thread.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Plain-text tables instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Neither read nor write the result cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
}

impl GlobalOpts {
    fn budget(&self) -> Budget {
        Budget::new(self.budget_nodes, self.budget_secs)
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Witnesses {
    /// Settle the value only.
    Value,
    /// List every optimal class.
    All,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Largest t-uniform family with no s-petal sunflower.
    Phi {
        #[arg(short)]
        s: usize,
        #[arg(short)]
        t: usize,
        #[arg(long, value_enum, default_value_t = Witnesses::Value)]
        witnesses: Witnesses,
    },
    /// Graph case t = 2 with every extremal graph and its degree sequence.
    Graphcase {
        #[arg(short)]
        s: usize,
    },
    /// Exact maximum of a k-uniform family on [n] with no s-sunflower whose core has t-1 elements.
    Oracle {
        #[arg(short)]
        n: usize,
        #[arg(short)]
        k: usize,
        #[arg(short)]
        s: usize,
        #[arg(short)]
        t: usize,
    },
    /// Lexicographic optimum S_* of the layered problem.
    Sstar {
        #[arg(short)]
        s: usize,
        #[arg(short)]
        t: usize,
    },
    /// Build an explicit family.
    #[command(subcommand)]
    Build(BuildCmd),
    /// Count an explicit family without building it.
    #[command(subcommand)]
    Count(CountCmd),
    /// Search a family for a sunflower.
    Find {
        #[arg(long)]
        family: PathBuf,
        #[arg(short)]
        s: usize,
        #[arg(long, default_value = "any")]
        core: CoreConstraint,
    },
    /// Check a sunflower certificate against a family.
    Verify {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Johnson graph J(n, m).
    Johnson {
        #[arg(short)]
        n: usize,
        #[arg(short)]
        m: usize,
        #[arg(long)]
        lambda2: bool,
    },
    /// Kruskal-Katona shadow bound for a uniform family.
    #[command(disable_help_flag = true)]
    Kk {
        #[arg(long)]
        family: PathBuf,
        /// Shadow level.
        #[arg(short)]
        h: usize,
        #[arg(long, action = ArgAction::Help)]
        help: Option<bool>,
    },
    /// Run a named acceptance scenario, or `acceptance` for all of them.
    Repro { scenario: String },
}

#[derive(Args, Debug, Clone)]
pub struct LayeredArgs {
    /// Layered family file.
    #[arg(long)]
    pub s_file: PathBuf,
    #[arg(short)]
    pub n: usize,
    #[arg(short)]
    pub k: usize,
    /// Base layer size; defaults to the smallest member size.
    #[arg(short)]
    pub t: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum BuildCmd {
    /// {F : F ∩ support(T) ∈ T}.
    Basic {
        #[arg(long)]
        family: PathBuf,
        #[arg(short)]
        n: usize,
        #[arg(short)]
        k: usize,
    },
    /// {F : F ∩ support(S^(t)) ∈ S}.
    Fs(LayeredArgs),
    /// Two-clique family for odd s.
    Thm13 {
        #[arg(short)]
        s: usize,
        #[arg(short)]
        n: usize,
        #[arg(short)]
        k: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum CountCmd {
    /// |{F : F ∩ support(S^(t)) ∈ S}|.
    Fs(LayeredArgs),
}

/// Exit code plus the text destined for stdout and stderr.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String, truncated: bool) -> Self {
        Outcome { code: if truncated { EXIT_TRUNCATED } else { EXIT_OK }, stdout, stderr: String::new() }
    }

    fn error(e: &Error) -> Self {
        let code = if matches!(e, Error::Budget(_)) { EXIT_TRUNCATED } else { EXIT_INPUT };
        Outcome { code, stdout: String::new(), stderr: format!("error: {e}\n") }
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn dispatch<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome { code: EXIT_OK, stdout: text, stderr: String::new() },
                _ => Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: text },
            };
        }
    };
    let cache = if cli.global.no_cache { None } else { Some(Cache::from_env()) };
    match execute(&cli, cache.as_ref()) {
        Ok((payload, truncated)) => {
            let stdout = match payload {
                Payload::Json(v) if cli.global.pretty => pretty(&v),
                Payload::Json(v) => format!("{}\n", serde_json::to_string(&v).expect("values serialise")),
                Payload::Text(t) => t,
            };
            Outcome::ok(stdout, truncated)
        }
        Err(e) => Outcome::error(&e),
    }
}

enum Payload {
    Json(Value),
    Text(String),
}

fn read_family(path: &Path) -> Result<Family> {
    Family::parse(&fs::read_to_string(path)?)
}

fn layered(args: &LayeredArgs) -> Result<LayeredCandidate> {
    let fam = read_family(&args.s_file)?;
    let t = match args.t {
        Some(t) => t,
        None => fam.min_member_size().ok_or_else(|| Error::InvalidInput("layered family is empty".into()))?,
    };
    if t == 0 {
        return Err(Error::InvalidInput("t must be at least 1".into()));
    }
    // T only needs to cover the base support for building and counting
    let phi_st = fam.layer(t).support().len().div_ceil(t).max(1);
    Ok(LayeredCandidate::new(fam, 0, t, phi_st))
}

fn params(pairs: &[(&str, Value)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Returns a cached result or computes, stores (when `keep` holds) and
/// returns a fresh one.
fn cached<F>(cache: Option<&Cache>, sub: &str, p: Params, compute: F) -> Result<Value>
where
    F: FnOnce() -> Result<(Value, u64, bool)>,
{
    if let Some(rec) = cache.and_then(|c| c.lookup(sub, &p)) {
        log::info!("cache hit for {sub}");
        return Ok(rec.result);
    }
    let start = Instant::now();
    let (value, nodes, keep) = compute()?;
    if let (Some(c), true) = (cache, keep) {
        let rec = RunRecord::new(sub, p, value.clone(), start.elapsed().as_secs_f64(), nodes);
        if let Err(e) = c.store(&rec) {
            log::warn!("could not write cache entry in {}: {e}", c.dir().display());
        }
    }
    Ok(value)
}

fn is_lower_bound(v: &Value) -> bool {
    v.get("status").and_then(Value::as_str) == Some("lower_bound_only")
}

fn search_json(r: &SearchResult) -> Value {
    serde_json::to_value(ResultJson::from(r)).expect("result serialises")
}

/// `φ(s, t)` with every optimal class, through the cache.
fn phi_all(s: usize, t: usize, budget: Budget, cache: Option<&Cache>) -> Result<SearchResult> {
    let p = params(&[("s", json!(s)), ("t", json!(t)), ("witnesses", json!("all"))]);
    let v = cached(cache, "phi", p, || {
        let r = search::phi(s, t, budget, WitnessMode::All)?;
        Ok((search_json(&r), r.nodes, r.is_proved()))
    })?;
    serde_json::from_value::<ResultJson>(v)?.to_result()
}

fn big_json(x: &BigUint) -> Value {
    u64::try_from(x).map_or_else(|_| Value::String(x.to_string()), |v| json!(v))
}

fn sstar_json(sol: &SStarSolution) -> Value {
    json!({
        "phitilde": sol.phitilde.components().iter().map(big_json).collect::<Vec<_>>(),
        "optima": sol.optima.iter().map(|c| json!({
            "family": c.family.to_text(),
            "support_size": c.t_support().len(),
        })).collect::<Vec<_>>(),
        "count_truncated": sol.count_truncated,
        "optimal": sol.optimal,
    })
}

fn execute(cli: &Cli, cache: Option<&Cache>) -> Result<(Payload, bool)> {
    let budget = cli.global.budget();
    if cli.global.threads.is_some_and(|n| n > 1) {
        log::info!("--threads ignored; searches run on one thread");
    }
    match &cli.command {
        Command::Phi { s, t, witnesses } => {
            let v = match witnesses {
                Witnesses::All => search_json(&phi_all(*s, *t, budget, cache)?),
                Witnesses::Value => {
                    let p = params(&[("s", json!(s)), ("t", json!(t)), ("witnesses", json!("value"))]);
                    cached(cache, "phi", p, || {
                        let r = search::phi(*s, *t, budget, WitnessMode::Value)?;
                        Ok((search_json(&r), r.nodes, r.is_proved()))
                    })?
                }
            };
            let truncated = is_lower_bound(&v);
            Ok((Payload::Json(v), truncated))
        }
        Command::Graphcase { s } => {
            let r = phi_all(*s, 2, budget, cache)?;
            let mut v = search_json(&r);
            let degrees: Vec<Vec<usize>> = r.witnesses.iter().map(search::degree_sequence).collect();
            v["degree_sequences"] = json!(degrees);
            let truncated = is_lower_bound(&v);
            Ok((Payload::Json(v), truncated))
        }
        Command::Oracle { n, k, s, t } => {
            let p = params(&[("n", json!(n)), ("k", json!(k)), ("s", json!(s)), ("t", json!(t))]);
            let v = cached(cache, "oracle", p, || {
                let r = search::duke_erdos_oracle(*n, *k, *s, *t, budget)?;
                Ok((search_json(&r), r.nodes, r.is_proved()))
            })?;
            let truncated = is_lower_bound(&v);
            Ok((Payload::Json(v), truncated))
        }
        Command::Sstar { s, t } => {
            let p = params(&[("s", json!(s)), ("t", json!(t))]);
            let v = cached(cache, "sstar", p, || {
                let phi = phi_all(*s, *t, budget, cache)?;
                let sol = solve_sstar_with_phi(*s, *t, phi, budget)?;
                Ok((sstar_json(&sol), 0, sol.optimal))
            })?;
            let truncated = v.get("optimal") == Some(&Value::Bool(false));
            Ok((Payload::Json(v), truncated))
        }
        Command::Build(b) => {
            let fam = match b {
                BuildCmd::Basic { family, n, k } => build_basic(&read_family(family)?, *n, *k)?,
                BuildCmd::Fs(args) => build_fs(&layered(args)?, args.n, args.k)?,
                BuildCmd::Thm13 { s, n, k } => build_theorem13(*s, *n, *k)?,
            };
            Ok((Payload::Text(fam.to_text()), false))
        }
        Command::Count(CountCmd::Fs(args)) => {
            let count = count_fs(&layered(args)?, args.n, args.k)?;
            Ok((Payload::Text(format!("{count}\n")), false))
        }
        Command::Find { family, s, core } => {
            let fam = read_family(family)?;
            let v = match find_sunflower(&fam, *s, *core)? {
                Some(cert) => serde_json::to_value(CertJson::new(&fam, &cert, *s, *core))?,
                None => json!({"found": false}),
            };
            Ok((Payload::Json(v), false))
        }
        Command::Verify { family, cert } => {
            let fam = read_family(family)?;
            let cj: CertJson = serde_json::from_str(&fs::read_to_string(cert)?)?;
            let cc = cj.constraint.to_constraint()?;
            let check = verify_cert(&fam, &cj.to_cert(&fam)?, cj.s, cc);
            Ok((Payload::Json(json!({"valid": check.valid, "diagnostic": check.diagnostic})), false))
        }
        Command::Johnson { n, m, lambda2: want } => {
            let g = johnson(*n, *m)?;
            let mut v = json!({
                "n": n,
                "m": m,
                "vertices": g.order(),
                "edges": g.edge_count(),
                "degree": g.regular_degree(),
            });
            if *want {
                let l = lambda2(&g);
                v["lambda2"] = json!(l.value);
                v["connected"] = json!(l.connected);
            }
            Ok((Payload::Json(v), false))
        }
        Command::Kk { family, h, .. } => {
            let fam = read_family(family)?;
            let out = kk_check(&fam, *h)?;
            let v = json!({"holds": out.holds, "size": fam.len(), "h": h, "x": out.x, "shadow": out.shadow, "bound": out.bound});
            Ok((Payload::Json(v), false))
        }
        Command::Repro { scenario } => {
            let outcomes = repro::run(scenario)?;
            let table = repro::render(&outcomes);
            if outcomes.iter().all(|o| o.passed) {
                Ok((Payload::Text(table), false))
            } else {
                Err(Error::Precondition(format!("scenario failed\n{table}")))
            }
        }
    }
}

/// Renders a JSON value as an indented `key: value` listing.
pub fn pretty(v: &Value) -> String {
    let mut out = String::new();
    write_pretty(v, 0, &mut out);
    out
}

fn write_pretty(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => write_object(map, depth, out),
        Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()) => {
            for x in items {
                write_scalar(x, &pad, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                out.push_str(&format!("{pad}[{i}]\n"));
                write_pretty(x, depth + 1, out);
            }
        }
        scalar => write_scalar(scalar, &pad, out),
    }
}

fn write_object(map: &Map<String, Value>, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    let width = map.keys().map(String::len).max().unwrap_or(0);
    for (k, x) in map {
        match x {
            Value::Object(_) | Value::Array(_) => {
                out.push_str(&format!("{pad}{k}:\n"));
                write_pretty(x, depth + 1, out);
            }
            Value::String(s) if s.contains('\n') => {
                out.push_str(&format!("{pad}{k}:\n"));
                write_scalar(x, &"  ".repeat(depth + 1), out);
            }
            _ => out.push_str(&format!("{pad}{k:<width$}  {}\n", scalar_text(x))),
        }
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn write_scalar(v: &Value, pad: &str, out: &mut String) {
    for line in scalar_text(v).lines() {
        out.push_str(&format!("{pad}{line}\n"));
    }
}

