//! `egfrac`: batch front end over the core crate.
//!
//! Every subcommand prints one JSON document (or CSV with `--csv`) on
//! standard output. Exit codes: 0 success, 1 infeasible or no solution,
//! 2 usage or precondition error, 3 budget exceeded.

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use egyptian_core::analytics::{self, BestPossCertificate};
use egyptian_core::construct::{dense_representation, represent_small, ConstructionParams};
use egyptian_core::report::CountReport;
use egyptian_core::search::{self, LjStatus, SearchBounds, SearchOutcome, SearchStatus};
use egyptian_core::{Error, Rational};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "egfrac",
    version,
    about = "Egyptian fraction constructions, search oracles and counts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Emit CSV instead of JSON.
    #[arg(long, global = true)]
    csv: bool,
    /// Worker threads for the parallel scans (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 10_000_000)]
    budget_nodes: u64,
    #[arg(long, global = true, default_value_t = 60.0)]
    budget_seconds: f64,
    /// Largest denominator any search may use.
    #[arg(long, global = true, default_value_t = 10_000)]
    max_den: u64,
}

impl Global {
    fn bounds(&self) -> SearchBounds {
        SearchBounds {
            max_denominator: self.max_den,
            node_budget: self.budget_nodes,
            time_budget: self.budget_seconds,
            ..SearchBounds::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Dense representation of r with denominators at most x (one run per x).
    Represent {
        #[arg(long)]
        r: Rational,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        /// Exponent in the smoothness bound x log^{-exp} x.
        #[arg(long)]
        smooth_exp: Option<f64>,
        /// Fix the ambient lower endpoint instead of scanning.
        #[arg(long)]
        alpha: Option<f64>,
        /// Include the denominators in the output.
        #[arg(long)]
        full: bool,
    },
    /// Representation with exactly 2 pi*(y) terms built from the prime powers up to y.
    Small {
        #[arg(long)]
        r: Rational,
        #[arg(long)]
        y: f64,
    },
    /// Least largest denominator over t-term representations.
    Mt {
        #[arg(long)]
        r: Rational,
        #[arg(long)]
        t: usize,
        /// Sweep t up to this value.
        #[arg(long)]
        t_to: Option<usize>,
    },
    /// Least stable term count.
    T0 {
        #[arg(long)]
        r: Rational,
    },
    /// Least spread x_max - x_min over t-term representations.
    Spread {
        #[arg(long)]
        r: Rational,
        #[arg(long)]
        t: usize,
    },
    /// Whether x can never be the j-th largest denominator.
    Lj {
        #[arg(long)]
        r: Rational,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        x: u64,
    },
    /// L_j decisions over [lo, hi] with the nesting check.
    LjSlice {
        #[arg(long)]
        r: Rational,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        lo: u64,
        #[arg(long)]
        hi: u64,
    },
    /// Proxy count for L_1(r; x).
    L1Count {
        #[arg(long)]
        r: Rational,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Exact L_1 membership.
    L1Member {
        #[arg(long)]
        r: Rational,
        #[arg(long)]
        x: u64,
    },
    /// Largest integer representable with denominators up to x.
    Maxint {
        #[arg(long)]
        x: u64,
    },
    /// Coprime pairs with mn = -1 (mod k), m, n < x (x defaults to k).
    Kloosterman {
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<u64>,
        #[arg(long)]
        x: Option<f64>,
    },
    /// Count and reciprocal sum of n in [alpha x, x] with P(n) > y.
    Primesums {
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        /// Defaults to sqrt(x).
        #[arg(long)]
        y: Option<f64>,
        /// Use P*(n) instead of P(n).
        #[arg(long)]
        star: bool,
    },
    /// Count of n in [alpha x/2, alpha x] with P*(n) <= x^eps.
    Smooth {
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        #[arg(long)]
        eps: f64,
        /// Use P(n) instead of P*(n).
        #[arg(long)]
        plain: bool,
    },
    /// The Dickman function.
    Rho {
        #[arg(long, value_delimiter = ',', required = true)]
        u: Vec<f64>,
    },
    /// Reciprocal sum over primes (or prime powers) in (y, x].
    Mertens {
        #[arg(long)]
        y: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        #[arg(long)]
        prime_powers: bool,
    },
    /// Divisibility certificates for a representation, plus the size bound.
    Certify {
        #[arg(long)]
        r: Rational,
        #[arg(long)]
        x: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        den: Vec<u64>,
    },
    /// Smallest K = -1 (mod k) with P*(K) <= bound.
    Findk {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        bound: f64,
        #[arg(long, default_value_t = 100_000_000)]
        ceiling: u64,
    },
    /// Every representation of r (with exactly t terms when given).
    Enumerate {
        #[arg(long)]
        r: Rational,
        #[arg(long)]
        t: Option<usize>,
        /// Stop after this many representations.
        #[arg(long, default_value_t = 1000)]
        limit: usize,
    },
}

/// What a subcommand produced.
struct Output {
    json: Value,
    /// Count reports, printed in the fixed CSV layout under `--csv`.
    reports: Vec<CountReport>,
    code: u8,
}

impl Output {
    fn ok(json: Value) -> Self {
        Output {
            json,
            reports: Vec::new(),
            code: 0,
        }
    }

    fn with_code(json: Value, code: u8) -> Self {
        Output {
            json,
            reports: Vec::new(),
            code,
        }
    }

    fn reports(reports: Vec<CountReport>) -> Self {
        Output {
            json: json!(reports),
            reports,
            code: 0,
        }
    }
}

const EXIT_INFEASIBLE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

fn error_code(e: &Error) -> u8 {
    match e {
        Error::NoSubsetFound { .. } | Error::InfeasibleAtScale { .. } | Error::ResidualNonzero(_) => EXIT_INFEASIBLE,
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_USAGE,
    }
}

fn status_code(s: SearchStatus) -> u8 {
    match s {
        SearchStatus::Found => 0,
        SearchStatus::ExhaustedNoSolution => EXIT_INFEASIBLE,
        SearchStatus::BudgetExceeded => EXIT_BUDGET,
    }
}

fn denominators(out: &SearchOutcome) -> Value {
    out.witness.as_ref().map_or(Value::Null, |w| json!(w.denominators))
}

fn run(cmd: Command, g: &Global) -> Result<Output, Error> {
    let bounds = g.bounds();
    Ok(match cmd {
        Command::Represent {
            r,
            x,
            smooth_exp,
            alpha,
            full,
        } => {
            let mut params = ConstructionParams::default();
            if let Some(e) = smooth_exp {
                params.smooth_exp = e;
            }
            params.alpha = alpha;
            let mut runs = Vec::new();
            for x in x {
                let (rep, report) = dense_representation(&r, x, &params)?;
                let valid = rep.is_valid();
                let certs = analytics::bestposs_check(&rep.denominators, x, &r)?;
                let bound = analytics::bestposs_bound(&r, x).ok();
                let mut v = json!({
                    "report": report,
                    "valid": valid,
                    "certificates_pass": certs.iter().all(|c| c.verdict),
                    "size_bound": bound,
                });
                if full {
                    v["denominators"] = json!(rep.denominators);
                }
                runs.push(v);
            }
            Output::ok(if runs.len() == 1 {
                runs.pop().unwrap()
            } else {
                json!(runs)
            })
        }
        Command::Small { r, y } => Output::ok(json!(represent_small(&r, y)?)),
        Command::Mt { r, t, t_to } => {
            let mut rows = Vec::new();
            let mut code = 0;
            for t in t..=t_to.unwrap_or(t) {
                let out = search::m_t(&r, t, &bounds)?;
                code = code.max(status_code(out.status));
                rows.push(json!({
                    "t": t,
                    "status": out.status,
                    "m_t": out.value,
                    "witness": denominators(&out),
                    "nodes": out.nodes,
                    "log": out.log,
                }));
            }
            Output::with_code(
                if rows.len() == 1 {
                    rows.pop().unwrap()
                } else {
                    json!(rows)
                },
                code,
            )
        }
        Command::T0 { r } => {
            let t0 = search::t_zero(&r, &bounds)?;
            Output::ok(json!({"t0": t0.t, "witness": t0.witness.denominators, "nodes": t0.nodes}))
        }
        Command::Spread { r, t } => {
            let out = search::m_prime_t(&r, t, &bounds)?;
            let code = status_code(out.status);
            Output::with_code(
                json!({
                    "t": t,
                    "status": out.status,
                    "spread": out.value,
                    "witness": denominators(&out),
                    "nodes": out.nodes,
                    "log": out.log,
                }),
                code,
            )
        }
        Command::Lj { r, j, x } => {
            let d = search::lj_member(&r, j, x, &bounds)?;
            let code = if d.status == LjStatus::Unknown { EXIT_BUDGET } else { 0 };
            Output::with_code(lj_json(&d), code)
        }
        Command::LjSlice { r, j, lo, hi } => {
            let s = search::lj_slice(&r, j, lo, hi, &bounds)?;
            let code = if s.all_decided() { 0 } else { EXIT_BUDGET };
            Output::with_code(
                json!({
                    "r": s.r,
                    "j": j,
                    "lo": lo,
                    "hi": hi,
                    "members": s.members(),
                    "unknown": s.unknown(),
                    "nesting": s.nesting,
                    "decisions": s.decisions.iter().map(lj_json).collect::<Vec<_>>(),
                }),
                code,
            )
        }
        Command::L1Count { r, x, c } => Output::reports(
            x.iter()
                .map(|&x| analytics::l1_proxy_count(&r, x, c))
                .collect::<Result<_, _>>()?,
        ),
        Command::L1Member { r, x } => {
            let d = analytics::l1_member_exact(&r, x, &bounds)?;
            let code = if d.status == LjStatus::Unknown { EXIT_BUDGET } else { 0 };
            Output::with_code(lj_json(&d), code)
        }
        Command::Maxint { x } => {
            let m = search::max_int_rep(x, &bounds)?;
            let code = status_code(m.outcome.status);
            Output::with_code(
                json!({
                    "x": x,
                    "status": m.outcome.status,
                    "max_integer": m.outcome.value,
                    "witness": denominators(&m.outcome),
                    "harmonic": m.harmonic,
                    "comparison": m.comparison,
                    "nodes": m.outcome.nodes,
                }),
                code,
            )
        }
        Command::Kloosterman { k, x } => Output::reports(
            k.iter()
                .map(|&k| analytics::kloosterman_pairs(k, x.unwrap_or(k as f64)))
                .collect::<Result<_, _>>()?,
        ),
        Command::Primesums { alpha, x, y, star } => {
            let mut reports = Vec::new();
            for x in x {
                let (count, sum) = analytics::primesums_report(alpha, x, y.unwrap_or_else(|| x.sqrt()), star)?;
                reports.push(count);
                reports.push(sum);
            }
            Output::reports(reports)
        }
        Command::Smooth { alpha, x, eps, plain } => Output::reports(
            x.iter()
                .map(|&x| analytics::smooth_count(alpha, x, eps, !plain))
                .collect::<Result<_, _>>()?,
        ),
        Command::Rho { u } => {
            let rows: Vec<Value> = u
                .iter()
                .map(|&u| json!({"u": u, "rho": analytics::dickman_rho(u)}))
                .collect();
            Output::ok(if rows.len() == 1 { rows[0].clone() } else { json!(rows) })
        }
        Command::Mertens { y, x, prime_powers } => Output::reports(
            x.iter()
                .map(|&x| analytics::mertens_sum(y, x, prime_powers))
                .collect::<Result<_, _>>()?,
        ),
        Command::Certify { r, x, den } => {
            let certs: Vec<BestPossCertificate> = analytics::bestposs_check(&den, x, &r)?;
            let pass = certs.iter().all(|c| c.verdict);
            let bound = analytics::bestposs_bound_detail(&r, x).ok();
            Output::with_code(
                json!({
                    "pass": pass,
                    "size": den.len(),
                    "bound": bound,
                    "certificates": certs,
                }),
                if pass { 0 } else { EXIT_INFEASIBLE },
            )
        }
        Command::Findk { k, bound, ceiling } => {
            let w = analytics::find_k_witness(k, bound, ceiling)?;
            let code = if w.witness.is_some() { 0 } else { EXIT_INFEASIBLE };
            Output::with_code(json!(w), code)
        }
        Command::Enumerate { r, t, limit } => {
            let mut reps = Vec::new();
            let (complete, nodes) = search::enumerate_reps_with(&r, t, &bounds, |rep| {
                reps.push(rep.denominators);
                reps.len() < limit
            })?;
            let truncated = reps.len() >= limit;
            let code = if !complete && !truncated { EXIT_BUDGET } else { 0 };
            Output::with_code(
                json!({
                    "r": r,
                    "t": t,
                    "count": reps.len(),
                    "complete": complete,
                    "nodes": nodes,
                    "representations": reps,
                }),
                code,
            )
        }
    })
}

fn lj_json(d: &search::LjDecision) -> Value {
    json!({
        "x": d.x,
        "status": d.status,
        "witness": d.witness.as_ref().map(|w| &w.denominators),
        "nodes": d.nodes,
    })
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Field/value rows for documents without a fixed CSV layout.
fn generic_csv(v: &Value) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let rows: Vec<&Value> = match v {
        Value::Array(items) => items.iter().collect(),
        other => vec![other],
    };
    let mut header: Vec<String> = Vec::new();
    for row in &rows {
        if let Value::Object(map) = row {
            for k in map.keys() {
                if !header.contains(k) {
                    header.push(k.clone());
                }
            }
        }
    }
    w.write_record(&header).expect("in-memory write");
    for row in rows {
        let rec: Vec<String> = header
            .iter()
            .map(|k| row.get(k).map(scalar).unwrap_or_default())
            .collect();
        w.write_record(rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match run(cli.command, &cli.global) {
        Ok(out) => {
            let text = if cli.global.csv {
                if out.reports.is_empty() {
                    generic_csv(&out.json)
                } else {
                    CountReport::to_csv(&out.reports)
                }
            } else {
                serde_json::to_string_pretty(&out.json).expect("output serializes") + "\n"
            };
            // A closed pipe downstream is not an error of ours.
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("{}", json!({"error": e.to_string()}));
            ExitCode::from(error_code(&e))
        }
    }
}
