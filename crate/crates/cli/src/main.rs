//! coverwreath: decide whether `Z_r.PSL_n(q)` embeds in `Z_r ≀ PSL_n(q)`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use coverwreath::cert::{CertKind, CertificateFile};
use coverwreath::embed::{
    arithmetic_decide, cohomology_report, construct_embedding, cross_validate_routes,
    obstruction_witness, CheckStatus, EmbeddingOutcome, ProblemInstance, RouteOutcome, Routes,
    Verdict, DEFAULT_ROUTE_BUDGET, HIGH_ROUTE_BUDGET,
};
use coverwreath::ff::prime_power;
use coverwreath::Error;

const EXIT_EMBED: u8 = 0;
const EXIT_INCONSISTENT: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_NO_EMBED: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(
    name = "coverwreath",
    version,
    about = "Decide whether the nonsplit cover Z_r.PSL_n(q) embeds in Z_r wr PSL_n(q)",
    after_help = "EXIT CODES:\n  0 embeds / verified\n  1 routes disagree\n  2 invalid input\n  3 does not embed\n  4 budget exceeded\n\n\
                  The enumeration budget defaults to 100000 elements; COVERWREATH_BUDGET overrides it."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the arithmetic criterion r ∤ (q-1)/gcd(n,q-1)
    Decide {
        #[command(flatten)]
        inst: InstanceArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Produce an embedding or obstruction certificate as JSON
    Certify {
        #[command(flatten)]
        inst: InstanceArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Re-check a certificate file
    Verify {
        path: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Also check this many random pairs psi(g)psi(h) = psi(gh)
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Cohomology dimensions of PSL_n(q) on the permutation modules
    Report {
        #[command(flatten)]
        inst: InstanceArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Cross-validate all routes over a list or range of instances
    Sweep {
        /// Instances as n,q,r (repeatable)
        #[arg(long = "instance", value_name = "N,Q,R", value_parser = parse_triple)]
        instances: Vec<(usize, u64, u64)>,
        /// Range of n, e.g. 2..4 (inclusive); used with --q-range
        #[arg(long, value_parser = parse_range)]
        n_range: Option<(u64, u64)>,
        /// Range of q (inclusive); non prime powers are skipped
        #[arg(long, value_parser = parse_range)]
        q_range: Option<(u64, u64)>,
        /// Restrict range sweeps to this r
        #[arg(long)]
        r: Option<u64>,
        /// Enumeration routes to run besides arithmetic and witness
        #[arg(
            long,
            value_enum,
            value_delimiter = ',',
            default_value = "construct,cohomology"
        )]
        routes: Vec<RouteArg>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: u64,
    #[arg(long)]
    r: u64,
}

#[derive(Args)]
struct BudgetArgs {
    /// Maximum number of group elements to enumerate
    #[arg(long)]
    budget: Option<usize>,
    /// Use the high budget of 2000000 elements
    #[arg(long, conflicts_with = "budget")]
    high_budget: bool,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write the main output here instead of stdout
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RouteArg {
    Construct,
    Cohomology,
    None,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            Error::InvalidInstance(_) | Error::MalformedCertificate(_) | Error::InvalidR { .. } => {
                EXIT_INVALID
            }
            _ => EXIT_INCONSISTENT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn parse_triple(s: &str) -> Result<(usize, u64, u64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [n, q, r] = parts.as_slice() else {
        return Err(format!("expected N,Q,R, got {s:?}"));
    };
    let num = |x: &str| x.parse::<u64>().map_err(|e| format!("{x:?}: {e}"));
    Ok((num(n)? as usize, num(q)?, num(r)?))
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if a > b {
        return Err(format!("empty range {s:?}"));
    }
    Ok((a, b))
}

fn budget(args: &BudgetArgs) -> Result<usize, Failure> {
    if let Some(b) = args.budget {
        return Ok(b);
    }
    if args.high_budget {
        return Ok(HIGH_ROUTE_BUDGET);
    }
    match std::env::var("COVERWREATH_BUDGET") {
        Ok(v) => v.trim().parse().map_err(|_| Failure {
            code: EXIT_INVALID,
            message: format!("COVERWREATH_BUDGET={v:?} is not a nonnegative integer"),
        }),
        Err(_) => Ok(DEFAULT_ROUTE_BUDGET),
    }
}

fn instance(args: &InstanceArgs) -> Result<ProblemInstance, Failure> {
    Ok(ProblemInstance::new(args.n, args.q, args.r)?)
}

fn emit(out: &OutputArgs, text: &str) -> Result<(), Failure> {
    match &out.output {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure {
        code: EXIT_INVALID,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn verdict_code(embeds: bool) -> u8 {
    if embeds {
        EXIT_EMBED
    } else {
        EXIT_NO_EMBED
    }
}

#[derive(Serialize)]
struct DecideOutput {
    instance: ProblemInstance,
    d: u64,
    index: u64,
    embeds: bool,
    simple_regime: bool,
}

fn cmd_decide(inst: &InstanceArgs, out: &OutputArgs) -> CmdResult {
    let inst = instance(inst)?;
    let embeds = arithmetic_decide(&inst);
    let res = DecideOutput {
        instance: inst,
        d: inst.d(),
        index: inst.index(),
        embeds,
        simple_regime: inst.simple_regime(),
    };
    let text = match out.format {
        Format::Json => json(&res),
        Format::Text => {
            let mut s = format!(
                "n = {}, q = {}, r = {}\nd = gcd(n, q-1) = {}\n(q-1)/d = {}\n{} {} {}\n",
                inst.n,
                inst.q,
                inst.r,
                res.d,
                res.index,
                inst.r,
                if embeds { "does not divide" } else { "divides" },
                res.index
            );
            s += &format!(
                "Z_{}.PSL_{}({}) {}\n",
                inst.r,
                inst.n,
                inst.q,
                if embeds { "embeds" } else { "does not embed" }
            );
            if !inst.simple_regime() {
                s += "warning: PSL_n(q) is not simple for this (n, q)\n";
            }
            s
        }
    };
    emit(out, &text)?;
    Ok(verdict_code(embeds))
}

fn cmd_certify(inst: &InstanceArgs, budget_args: &BudgetArgs, out: &OutputArgs) -> CmdResult {
    let inst = instance(inst)?;
    let budget = budget(budget_args)?;
    let file = match obstruction_witness(&inst)? {
        Some(w) => CertificateFile::from_obstruction(&w)?,
        None => match construct_embedding(&inst, budget)? {
            EmbeddingOutcome::Embedding(c) => CertificateFile::from_embedding(&c)?,
            EmbeddingOutcome::NotFound => {
                return Err(Failure {
                    code: EXIT_INCONSISTENT,
                    message: "no obstruction witness and no embedding cocycle".into(),
                })
            }
        },
    };
    let embeds = file.kind == CertKind::Embedding;
    match &out.output {
        Some(path) => {
            write_file(path, &file.to_json())?;
            let summary = CertifySummary {
                instance: inst,
                kind: file.kind,
                path: path.display().to_string(),
                transcript: file.transcript,
            };
            match out.format {
                Format::Json => print!("{}", json(&summary)),
                Format::Text => {
                    println!(
                        "wrote {} certificate to {}",
                        kind_name(file.kind),
                        summary.path
                    );
                    if let Some(t) = file.transcript {
                        println!(
                            "{} closure identities checked over {} elements",
                            t.closure_identities, t.elements
                        );
                    }
                }
            }
        }
        None => print!("{}", file.to_json()),
    }
    Ok(verdict_code(embeds))
}

#[derive(Serialize)]
struct CertifySummary {
    instance: ProblemInstance,
    kind: CertKind,
    path: String,
    transcript: Option<coverwreath::embed::Transcript>,
}

fn kind_name(kind: CertKind) -> &'static str {
    match kind {
        CertKind::Embedding => "embedding",
        CertKind::Obstruction => "obstruction",
    }
}

fn cmd_verify(
    path: &Path,
    budget_args: &BudgetArgs,
    samples: usize,
    seed: u64,
    out: &OutputArgs,
) -> CmdResult {
    let text = fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_INVALID,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let file = CertificateFile::from_json(&text)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let pairs: Vec<(usize, usize)> = (0..samples).map(|_| (rng.gen(), rng.gen())).collect();
    let report = file.verify(budget(budget_args)?, &pairs)?;
    let text = match out.format {
        Format::Json => json(&report),
        Format::Text => match report.transcript {
            Some(t) => format!(
                "verified {} certificate: {} closure identities over {} elements, {} sampled pairs\n",
                kind_name(report.kind),
                t.closure_identities,
                t.elements,
                t.sampled_pairs
            ),
            None => format!("verified {} certificate: |s| = r^2, |g| = r, fixed point checked\n", kind_name(report.kind)),
        },
    };
    emit(out, &text)?;
    Ok(EXIT_EMBED)
}

fn cmd_report(inst: &InstanceArgs, budget_args: &BudgetArgs, out: &OutputArgs) -> CmdResult {
    let inst = instance(inst)?;
    let rep = cohomology_report(&inst, budget(budget_args)?)?;
    let text = match out.format {
        Format::Json => json(&rep),
        Format::Text => {
            let mut s = format!(
                "PSL_{}({}), |G| = {}, r = {}\n",
                inst.n, inst.q, rep.group_order, inst.r
            );
            s += &format!(
                "h0: V {}  V/I {}  U {}  I {}\n",
                rep.h0_v, rep.h0_v_mod_i, rep.h0_u, rep.h0_i
            );
            s += &format!(
                "h1: V {}  V/I {}  U {}  I {}\n",
                rep.h1_v, rep.h1_v_mod_i, rep.h1_u, rep.h1_i
            );
            s += &format!(
                "ker phi dim = {}, predicted: {}\n",
                rep.ker_phi_dim,
                embeds_word(rep.predicted_embedding)
            );
            for c in &rep.checks {
                let tag = match c.status {
                    CheckStatus::Held => "ok",
                    CheckStatus::Violated => "VIOLATED",
                    CheckStatus::Skipped => "skipped",
                };
                s += &format!("  [{tag}] {}\n", c.name);
            }
            s
        }
    };
    emit(out, &text)?;
    if !rep.is_consistent() {
        return Ok(EXIT_INCONSISTENT);
    }
    Ok(verdict_code(rep.predicted_embedding))
}

fn embeds_word(b: bool) -> &'static str {
    if b {
        "embeds"
    } else {
        "does not embed"
    }
}

#[derive(Serialize)]
struct SweepRow {
    instance: (usize, u64, u64),
    error: Option<String>,
    verdict: Option<Verdict>,
    routes_run: Vec<&'static str>,
    millis: f64,
}

fn sweep_instances(
    explicit: &[(usize, u64, u64)],
    n_range: Option<(u64, u64)>,
    q_range: Option<(u64, u64)>,
    r: Option<u64>,
) -> Result<Vec<(usize, u64, u64)>, Failure> {
    let mut list = explicit.to_vec();
    match (n_range, q_range) {
        (None, None) => {}
        (Some((n0, n1)), Some((q0, q1))) => {
            for n in n0.max(2)..=n1 {
                for q in q0..=q1 {
                    if prime_power(q).is_none() {
                        continue;
                    }
                    let d = coverwreath::ff::gcd(n, q - 1);
                    for p in coverwreath::ff::prime_factors(d) {
                        if r.map_or(true, |r| r == p) {
                            list.push((n as usize, q, p));
                        }
                    }
                }
            }
        }
        _ => {
            return Err(Failure {
                code: EXIT_INVALID,
                message: "--n-range and --q-range must be given together".into(),
            })
        }
    }
    Ok(list)
}

fn run_row(inst: (usize, u64, u64), budget: usize, routes: Routes) -> SweepRow {
    let start = Instant::now();
    let (error, verdict) = match ProblemInstance::new(inst.0, inst.1, inst.2) {
        Ok(p) => (None, Some(cross_validate_routes(&p, budget, routes))),
        Err(e) => (Some(e.to_string()), None),
    };
    let routes_run = verdict
        .as_ref()
        .map(Verdict::routes_run)
        .unwrap_or_default();
    SweepRow {
        instance: inst,
        error,
        verdict,
        routes_run,
        millis: start.elapsed().as_secs_f64() * 1e3,
    }
}

fn outcome_word(o: &RouteOutcome) -> &'static str {
    match o {
        RouteOutcome::Embeds => "yes",
        RouteOutcome::DoesNotEmbed => "no",
        RouteOutcome::Skipped { .. } => "-",
    }
}

fn sweep_table(rows: &[SweepRow]) -> String {
    let mut s = format!(
        "{:<12} {:<9} {:<9} {:<10} {:<7} {:<12} {:>10}\n",
        "instance", "criterion", "construct", "cohomology", "witness", "verdict", "ms"
    );
    for row in rows {
        let (n, q, r) = row.instance;
        let name = format!("({n},{q},{r})");
        match (&row.verdict, &row.error) {
            (Some(v), _) => {
                s += &format!(
                    "{:<12} {:<9} {:<9} {:<10} {:<7} {:<12} {:>10.1}\n",
                    name,
                    if v.arithmetic_embeds { "yes" } else { "no" },
                    outcome_word(&v.construct),
                    outcome_word(&v.cohomology),
                    if v.witness_produced { "yes" } else { "no" },
                    if v.consistent {
                        "CONSISTENT"
                    } else {
                        "INCONSISTENT"
                    },
                    row.millis
                );
                for d in &v.diagnostics {
                    s += &format!("    {d}\n");
                }
            }
            (None, Some(e)) => s += &format!("{name:<12} error: {e}\n"),
            (None, None) => unreachable!("row has a verdict or an error"),
        }
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    explicit: &[(usize, u64, u64)],
    n_range: Option<(u64, u64)>,
    q_range: Option<(u64, u64)>,
    r: Option<u64>,
    route_args: &[RouteArg],
    jobs: usize,
    budget_args: &BudgetArgs,
    out: &OutputArgs,
) -> CmdResult {
    let list = sweep_instances(explicit, n_range, q_range, r)?;
    let budget = budget(budget_args)?;
    let routes = Routes {
        construct: route_args.contains(&RouteArg::Construct),
        cohomology: route_args.contains(&RouteArg::Cohomology),
    };
    let slots: Vec<Mutex<Option<SweepRow>>> = list.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, list.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= list.len() {
                    break;
                }
                let row = run_row(list[i], budget, routes);
                *slots[i].lock().expect("row slot") = Some(row);
            });
        }
    });
    let rows: Vec<SweepRow> = slots
        .into_iter()
        .map(|m| m.into_inner().expect("row slot").expect("row computed"))
        .collect();
    let text = match out.format {
        Format::Json => json(&rows),
        Format::Text => sweep_table(&rows),
    };
    emit(out, &text)?;
    let inconsistent = rows
        .iter()
        .any(|r| r.verdict.as_ref().is_some_and(|v| !v.consistent));
    Ok(if inconsistent {
        EXIT_INCONSISTENT
    } else {
        EXIT_EMBED
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Decide { inst, out } => cmd_decide(inst, out),
        Command::Certify { inst, budget, out } => cmd_certify(inst, budget, out),
        Command::Verify {
            path,
            budget,
            samples,
            seed,
            out,
        } => cmd_verify(path, budget, *samples, *seed, out),
        Command::Report { inst, budget, out } => cmd_report(inst, budget, out),
        Command::Sweep {
            instances,
            n_range,
            q_range,
            r,
            routes,
            jobs,
            budget,
            out,
        } => cmd_sweep(
            instances, *n_range, *q_range, *r, routes, *jobs, budget, out,
        ),
    };
    let _ = std::io::stdout().flush();
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
