use std::io::{self, Read, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

use shiftopt::experiments::{
    run_gurvits, run_nomather, run_tech_strictly_all, GurvitsConfig, NomatherConfig,
};
use shiftopt::perturb::{check_growth, check_upper_inequality, plan_invariants};
use shiftopt::{
    build_plan, dbar_lp_lower, dbar_periodic_exact, dbar_upper_product, jsr_lower, jsr_upper,
    log_norm, lyapunov_mc, lyapunov_periodic_exact, lyapunov_upper, matching_distance, BiSequence,
    MatchKind, MeasureSpec, Scalar, SubshiftSpec, WeightFunction, Word,
};

mod selftest;

const SCHEMA: &str = "shiftopt/1";

#[derive(Parser)]
#[command(name = "shiftopt", version, about = "Growth rates of weighted shift pairs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON object of parameters (path, `-` for stdin, or inline JSON); flags override it.
    #[arg(long, global = true)]
    input: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Precision::Rational)]
    precision: Precision,
    /// Worker threads (default: the THREADS variable, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print the report's main table as CSV instead of JSON.
    #[arg(long, global = true, conflicts_with = "text")]
    csv: bool,
    /// Print the report's main table as aligned columns.
    #[arg(long, global = true)]
    text: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Precision {
    Rational,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    Upper,
    Mc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Exact,
    Dp,
}

#[derive(Subcommand)]
enum Command {
    /// log‖L_x‖ for a word x.
    Norm {
        #[arg(long)]
        weights: Option<String>,
        #[arg(long)]
        word: Option<String>,
        #[arg(long)]
        k_window: Option<i64>,
    },
    /// Bounds on the log joint spectral radius.
    Jsr {
        #[arg(long)]
        weights: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k_window: Option<i64>,
        /// Longest candidate word for the lower bound.
        #[arg(long)]
        candidate_len: Option<usize>,
        #[arg(long)]
        m: Option<u64>,
    },
    /// The Lyapunov exponent of a measure.
    Lyapunov {
        #[arg(long)]
        weights: Option<String>,
        #[arg(long)]
        measure: Option<String>,
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        k_window: Option<i64>,
    },
    /// d̄ between two measures.
    Dbar {
        #[arg(long)]
        mu: Option<String>,
        #[arg(long)]
        nu: Option<String>,
        /// Coupling order of the LP lower bound.
        #[arg(long)]
        l: Option<usize>,
    },
    /// Normalised Hamming distance from a word to a subshift.
    Match {
        #[arg(long)]
        word: Option<String>,
        #[arg(long)]
        subshift: Option<String>,
        #[arg(long, value_enum)]
        kind: Option<Kind>,
    },
    /// Build a perturbation plan and check its inequalities.
    Perturb {
        #[arg(long)]
        weights: Option<String>,
        #[arg(long)]
        omega: Option<String>,
        #[arg(long)]
        z: Option<String>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        k_search: Option<i64>,
        #[arg(long)]
        lambda: Option<String>,
        /// Word x at which to check the pointwise bound.
        #[arg(long)]
        word: Option<String>,
        #[arg(long)]
        k: Option<i64>,
    },
    #[command(subcommand)]
    Experiment(Experiment),
    /// Run the exact-oracle suite.
    Selftest,
}

#[derive(Subcommand)]
enum Experiment {
    Gurvits {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        max_word_len: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k_window: Option<i64>,
    },
    TechStrictly {
        #[arg(long)]
        max_z_period: Option<usize>,
        #[arg(long)]
        test_periods: Option<usize>,
    },
    Nomather {
        #[arg(long)]
        j: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        mc_len: Option<usize>,
        #[arg(long)]
        k_window: Option<i64>,
    },
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Invariant(String),
    /// The reader hung up on stdout.
    Closed,
}

impl From<shiftopt::Error> for Failure {
    fn from(e: shiftopt::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Input(format!("malformed JSON: {e}"))
    }
}

type Outcome<T> = Result<T, Failure>;

/// A report plus the key of its main table for `--csv`/`--text`.
struct Report {
    body: Value,
    table: Option<&'static str>,
}

fn read_source(s: &str) -> Outcome<String> {
    let t = s.trim_start();
    if t.starts_with('{') || t.starts_with('[') || t.starts_with('"') {
        return Ok(s.to_string());
    }
    if s == "-" {
        let mut buf = String::new();
        io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Failure::Input(format!("stdin: {e}")))?;
        return Ok(buf);
    }
    std::fs::read_to_string(s).map_err(|e| Failure::Input(format!("{s}: {e}")))
}

/// Parameters merged from `--input` and per-command flags.
struct Params {
    input: Map<String, Value>,
}

impl Params {
    fn load(input: Option<&str>) -> Outcome<Self> {
        let input = match input {
            None => Map::new(),
            Some(src) => match serde_json::from_str(&read_source(src)?)? {
                Value::Object(m) => m,
                _ => return Err(Failure::Input("--input must hold a JSON object".into())),
            },
        };
        Ok(Params { input })
    }

    fn get<T: DeserializeOwned>(&self, key: &str, flag: Option<T>) -> Outcome<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.input.get(key) {
            Some(v) => Ok(Some(T::deserialize(v).map_err(|e| Failure::Input(format!("{key}: {e}")))?)),
            None => Ok(None),
        }
    }

    fn or<T: DeserializeOwned>(&self, key: &str, flag: Option<T>, default: T) -> Outcome<T> {
        Ok(self.get(key, flag)?.unwrap_or(default))
    }

    fn need<T: DeserializeOwned>(&self, key: &str, flag: Option<T>) -> Outcome<T> {
        self.get(key, flag)?
            .ok_or_else(|| Failure::Input(format!("missing --{}", key.replace('_', "-"))))
    }

    /// A JSON-valued parameter: the flag holds a path or inline JSON.
    fn json<T: DeserializeOwned>(&self, key: &str, flag: Option<String>) -> Outcome<Option<T>> {
        match flag {
            Some(src) => Ok(Some(serde_json::from_str(&read_source(&src)?)?)),
            None => self.get(key, None),
        }
    }

    fn need_json<T: DeserializeOwned>(&self, key: &str, flag: Option<String>) -> Outcome<T> {
        self.json(key, flag)?
            .ok_or_else(|| Failure::Input(format!("missing --{}", key.replace('_', "-"))))
    }

    fn word(&self, key: &str, flag: Option<String>) -> Outcome<Word> {
        let s: String = self.need(key, flag)?;
        Ok(s.parse()?)
    }
}

fn to_value<T: Serialize>(v: &T) -> Outcome<Value> {
    Ok(serde_json::to_value(v)?)
}

fn weights(p: &Params, flag: Option<String>, precision: Precision) -> Outcome<WeightFunction> {
    let phi: WeightFunction = p.need_json("weights", flag)?;
    Ok(match precision {
        Precision::Rational => phi,
        Precision::Float => phi.to_float(),
    })
}

fn numeric(v: Scalar, precision: Precision) -> Scalar {
    match precision {
        Precision::Rational => v,
        Precision::Float => v.to_float(),
    }
}

fn run(cli: Cli) -> Outcome<Report> {
    let g = &cli.global;
    let p = Params::load(g.input.as_deref())?;
    let seed = p.or("seed", g.seed, 0u64)?;
    let prec = g.precision;
    match cli.command {
        Command::Norm { weights: wf, word, k_window } => {
            let phi = weights(&p, wf, prec)?;
            let x = p.word("word", word)?;
            let k = p.or("k_window", k_window, 64)?;
            let b = log_norm(&phi, &x, k)?;
            Ok(Report {
                body: to_value(&b)?,
                table: None,
            })
        }
        Command::Jsr {
            weights: wf,
            n,
            k_window,
            candidate_len,
            m,
        } => {
            let phi = weights(&p, wf, prec)?;
            let n = p.need("n", n)?;
            let k = p.or("k_window", k_window, 64)?;
            let up = jsr_upper(&phi, n, k)?;
            let clen = p.or("candidate_len", candidate_len, n.min(8))?;
            let m = p.or("m", m, 16)?;
            let lo = jsr_lower(&phi, &Word::lyndon_up_to(clen), m, k)?;
            Ok(Report {
                body: json!({
                    "n": n,
                    "k_window": k,
                    "upper": up.value,
                    "upper_certified": up.certified,
                    "upper_word": up.word,
                    "lower": lo.value,
                    "lower_certified": lo.certified,
                    "lower_word": lo.word,
                }),
                table: None,
            })
        }
        Command::Lyapunov {
            weights: wf,
            measure,
            method,
            n,
            samples,
            k_window,
        } => {
            let phi = weights(&p, wf, prec)?;
            let mu: MeasureSpec = p.need_json("measure", measure)?;
            mu.validate()?;
            let k = p.or("k_window", k_window, 64)?;
            let method = match p.get::<String>("method", None)? {
                _ if method.is_some() => method.unwrap(),
                Some(s) => Method::from_str(&s, true).map_err(Failure::Input)?,
                None if matches!(mu, MeasureSpec::PeriodicOrbit { .. }) => Method::Exact,
                None => Method::Upper,
            };
            let body = match method {
                Method::Exact => {
                    let MeasureSpec::PeriodicOrbit { word } = &mu else {
                        return Err(Failure::Input("the exact method needs a PeriodicOrbit measure".into()));
                    };
                    json!({ "method": "exact", "value": numeric(lyapunov_periodic_exact(&phi, word)?, prec) })
                }
                Method::Upper => {
                    let b = lyapunov_upper(&phi, &mu, p.or("n", n, 12)?, k)?;
                    json!({ "method": "upper", "bound": b })
                }
                Method::Mc => {
                    let e = lyapunov_mc(&phi, &mu, p.or("n", n, 1000)?, p.or("samples", samples, 64)?, k, seed)?;
                    json!({ "method": "mc", "estimate": e })
                }
            };
            Ok(Report { body, table: None })
        }
        Command::Dbar { mu, nu, l } => {
            let mu: MeasureSpec = p.need_json("mu", mu)?;
            let nu: MeasureSpec = p.need_json("nu", nu)?;
            mu.validate()?;
            nu.validate()?;
            let mut body = Map::new();
            if let (MeasureSpec::PeriodicOrbit { word: u }, MeasureSpec::PeriodicOrbit { word: v }) = (&mu, &nu) {
                body.insert("exact".into(), to_value(&numeric(Scalar::Exact(dbar_periodic_exact(u, v)), prec))?);
            }
            let l = p.or("l", l, 4)?;
            let lp = dbar_lp_lower(&mu, &nu, l)?;
            body.insert("lower".into(), to_value(&numeric(lp.value, prec))?);
            body.insert("lp".into(), to_value(&lp)?);
            body.insert("upper".into(), to_value(&numeric(dbar_upper_product(&mu, &nu)?, prec))?);
            Ok(Report {
                body: Value::Object(body),
                table: None,
            })
        }
        Command::Match { word, subshift, kind } => {
            let x = p.word("word", word)?;
            let z: SubshiftSpec = p.need_json("subshift", subshift)?;
            let kind = match (kind, p.get::<MatchKind>("kind", None)?) {
                (Some(Kind::Exact), _) => MatchKind::Exact,
                (Some(Kind::Dp), _) => MatchKind::Dp,
                (None, Some(k)) => k,
                (None, None) => MatchKind::Dp,
            };
            let d = matching_distance(&x, &z, kind)?;
            Ok(Report {
                body: json!({ "n": x.len(), "kind": kind, "distance": numeric(Scalar::Exact(d), prec) }),
                table: None,
            })
        }
        Command::Perturb {
            weights: wf,
            omega,
            z,
            depth,
            k_search,
            lambda,
            word,
            k,
        } => {
            let omega = p.word("omega", omega)?;
            let z: BiSequence = p.need_json("z", z)?;
            let phi = match p.json::<WeightFunction>("weights", wf)? {
                Some(phi) => phi,
                None => WeightFunction::greedy_indicator(z.clone()),
            };
            let depth = p.or("depth", depth, 4)?;
            let plan = build_plan(&phi, &omega, &z, depth, p.or("k_search", k_search, 64)?)?;
            let lambda = match lambda {
                Some(s) => s.parse::<Scalar>().map_err(|e| Failure::Input(format!("lambda: {e}")))?,
                None => p.or("lambda", None, Scalar::ONE)?,
            };
            let inv = plan_invariants(&plan);
            let growth = (1..=depth)
                .map(|j| check_growth(&plan, &phi, lambda, j, None))
                .collect::<Result<Vec<_>, _>>()?;
            let mut body = json!({
                "omega": omega,
                "depth": depth,
                "levels": plan.levels().iter().map(|lv| json!({
                    "n": lv.n, "k": lv.k, "a_count": lv.a_count, "c_count": lv.c_count,
                    "b": lv.b,
                })).collect::<Vec<_>>(),
                "invariants": inv,
                "growth": growth,
            });
            if let Some(x) = p.get::<String>("word", word)? {
                let x: Word = x.parse()?;
                let r = check_upper_inequality(&plan, &x, p.or("k", k, 0)?)?;
                if !r.holds {
                    return Err(Failure::Invariant(format!("pointwise bound fails: {r:?}")));
                }
                body["upper"] = to_value(&r)?;
            }
            if !inv.all() {
                return Err(Failure::Invariant(format!("plan invariants fail: {inv:?}")));
            }
            Ok(Report {
                body,
                table: Some("growth"),
            })
        }
        Command::Experiment(e) => experiment(&p, e, seed),
        Command::Selftest => {
            let checks = selftest::run(seed);
            let passed = checks.iter().all(|c| c.passed);
            let body = json!({ "passed": passed, "checks": checks });
            if !passed {
                let mut out = io::stdout().lock();
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&with_schema(body))?);
                return Err(Failure::Invariant("selftest failed".into()));
            }
            Ok(Report {
                body,
                table: Some("checks"),
            })
        }
    }
}

fn experiment(p: &Params, e: Experiment, seed: u64) -> Outcome<Report> {
    match e {
        Experiment::Gurvits {
            alpha,
            max_word_len,
            n,
            k_window,
        } => {
            let mut cfg: GurvitsConfig = serde_json::from_value(Value::Object(p.input.clone()))?;
            cfg.alpha = alpha.unwrap_or(cfg.alpha);
            cfg.max_word_len = max_word_len.unwrap_or(cfg.max_word_len);
            cfg.n = n.unwrap_or(cfg.n);
            cfg.k_window = k_window.unwrap_or(cfg.k_window);
            if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
                return Err(Failure::Input("alpha must lie in (0, 1)".into()));
            }
            Ok(Report {
                body: to_value(&run_gurvits(&cfg)?)?,
                table: Some("per_length"),
            })
        }
        Experiment::TechStrictly {
            max_z_period,
            test_periods,
        } => {
            let zmax = p.or("max_z_period", max_z_period, 7)?;
            let tp = p.or("test_periods", test_periods, 7)?;
            let reports = run_tech_strictly_all(zmax, tp)?;
            let mut rows = Vec::new();
            for r in &reports {
                for row in &r.rows {
                    rows.push(json!({
                        "z": r.z, "mu": row.mu, "lyapunov": row.lyapunov,
                        "one_minus_dbar": row.one_minus_dbar, "difference": row.difference,
                    }));
                }
            }
            let failures = reports.iter().filter(|r| !r.identity_holds).count();
            if failures > 0 {
                return Err(Failure::Invariant(format!("exact formula fails for {failures} sequences")));
            }
            Ok(Report {
                body: json!({
                    "max_z_period": zmax,
                    "test_periods": tp,
                    "pairs": rows.len(),
                    "identity_holds": true,
                    "rows": rows,
                }),
                table: Some("rows"),
            })
        }
        Experiment::Nomather {
            j,
            n,
            samples,
            mc_len,
            k_window,
        } => {
            let mut cfg: NomatherConfig = serde_json::from_value(Value::Object(p.input.clone()))?;
            cfg.j = j.unwrap_or(cfg.j);
            cfg.n = n.unwrap_or(cfg.n);
            cfg.samples = samples.unwrap_or(cfg.samples);
            cfg.mc_len = mc_len.unwrap_or(cfg.mc_len);
            cfg.k_window = k_window.unwrap_or(cfg.k_window);
            cfg.seed = seed;
            Ok(Report {
                body: to_value(&run_nomather(&cfg)?)?,
                table: None,
            })
        }
    }
}

fn with_schema(body: Value) -> Value {
    let mut out = Map::new();
    out.insert("schema".into(), Value::String(SCHEMA.into()));
    match body {
        Value::Object(m) => out.extend(m),
        other => {
            out.insert("report".into(), other);
        }
    }
    Value::Object(out)
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Rows of the main table, or the report's scalar fields as one row.
fn table(body: &Value, key: Option<&str>) -> (Vec<String>, Vec<Vec<String>>) {
    let rows: Vec<&Map<String, Value>> = match key.and_then(|k| body.get(k)).and_then(Value::as_array) {
        Some(items) => items.iter().filter_map(Value::as_object).collect(),
        None => body.as_object().into_iter().collect(),
    };
    let mut header: Vec<String> = Vec::new();
    for r in &rows {
        for (k, v) in r.iter() {
            if !v.is_object() && !v.is_array() && !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let cells = rows
        .iter()
        .map(|r| header.iter().map(|h| r.get(h).map(cell).unwrap_or_default()).collect())
        .collect();
    (header, cells)
}

fn emit(report: &Report, csv: bool, text: bool) -> Outcome<()> {
    let mut out = io::stdout().lock();
    let io_err = |e: io::Error| match e.kind() {
        io::ErrorKind::BrokenPipe => Failure::Closed,
        _ => Failure::Input(format!("stdout: {e}")),
    };
    if csv || text {
        let (header, rows) = table(&report.body, report.table);
        if csv {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&header).map_err(|e| Failure::Input(e.to_string()))?;
            for r in &rows {
                w.write_record(r).map_err(|e| Failure::Input(e.to_string()))?;
            }
            w.flush().map_err(io_err)?;
            return Ok(());
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|c| rows.iter().map(|r| r[c].chars().count()).chain([header[c].chars().count()]).max().unwrap())
            .collect();
        for line in std::iter::once(&header).chain(&rows) {
            let cols: Vec<String> = line.iter().zip(&widths).map(|(s, &w)| format!("{s:<w$}")).collect();
            writeln!(out, "{}", cols.join("  ").trim_end()).map_err(io_err)?;
        }
        return Ok(());
    }
    let text = serde_json::to_string_pretty(&with_schema(report.body.clone()))?;
    writeln!(out, "{text}").map_err(io_err)
}

fn threads(flag: Option<usize>) -> Outcome<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("THREADS") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Input(format!("THREADS={s} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = threads(cli.global.threads).and_then(|t| {
        if let Some(t) = t {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build_global()
                .map_err(|e| Failure::Input(e.to_string()))?;
        }
        let (csv, text) = (cli.global.csv, cli.global.text);
        emit(&run(cli)?, csv, text)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Closed) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant violated: {msg}");
            ExitCode::from(3)
        }
    }
}
