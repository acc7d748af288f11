//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on a domain error, 2 on a usage error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fricshare_core::axioms::{comparison_matrix, AxiomId, CheckConfig, InfoMode};
use fricshare_core::empirical::{report, summarize, SummaryStats};
use fricshare_core::gaussian::{
    correlation_sweep, crra_epsilon0, equicorrelated_pool, es_closed_form, lambda_star, participants_sweep,
    pool_stats, tradeoff, CorrelationScheme, GaussianPool, Sampler, SweepRow,
};
use fricshare_core::mechanisms::{apply, frictional_costs, MechanismSpec};
use serde::Serialize;

use crate::error::{io_err, CliError, CliResult};
use crate::ingest::ingest;
use crate::io::{parse_rule, read_json, split_rules, to_json, PoolFile, SpaceFile};
use crate::output::{self, full, sig4, Format};

/// Default seed when neither `--seed` nor `FRICSHARE_SEED` is given.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "fricshare", version, about = "Risk sharing with frictional costs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply an allocation rule to a space and endowment profile.
    Allocate(AllocateArgs),
    /// Randomized axiom checks and the rule comparison matrix.
    Axioms(AxiomsArgs),
    /// Closed-form left-ES allocation of a Gaussian pool.
    Gaussian(GaussianArgs),
    /// Cost and trade-off sweeps (CSV).
    Sweep(SweepArgs),
    /// Level at which participation stops paying off.
    LambdaStar(LambdaStarArgs),
    /// Monte Carlo platform-fee example with CRRA agents.
    Crra(CrraArgs),
    /// Pivot a `period,entity,amount` loss file into summary statistics.
    Ingest(IngestArgs),
    /// Gaussian left-ES report from summary statistics.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct AllocateArgs {
    /// JSON file `{"probs": [...], "agents": [[...]], "partition": [[...]]}`.
    #[arg(long)]
    pub space: PathBuf,
    /// Inline JSON (`{"kind":"left_es","lambda":0.9}`) or shorthand (`left_es:0.9`).
    #[arg(long)]
    pub rule: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InfoArg {
    Trivial,
    Random,
}

#[derive(Debug, Args)]
pub struct AxiomsArgs {
    /// Comma-separated rules; JSON objects may contain commas.
    #[arg(long, default_value = "cmrs,qbrs,left_es:0.9")]
    pub rules: String,
    /// Comma-separated axiom codes, or `all`. Defaults to the comparison table columns.
    #[arg(long)]
    pub axioms: Option<String>,
    /// Print the pass/fail grid instead of one line per check.
    #[arg(long)]
    pub matrix: bool,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, env = "FRICSHARE_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub outcomes: usize,
    #[arg(long, default_value_t = 3)]
    pub agents: usize,
    #[arg(long, value_enum, default_value_t = InfoArg::Trivial)]
    pub info: InfoArg,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub report: Format,
    /// Directory receiving one JSON file per counterexample.
    #[arg(long)]
    pub counterexamples: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GaussianArgs {
    /// JSON file `{"mu": [...], "sigma": [...], "rho": [[...]]}` or `{"mu": [...], "cov": [[...]]}`.
    #[arg(long)]
    pub pool: PathBuf,
    #[arg(long, default_value_t = 0.99)]
    pub lambda: f64,
    /// Risk-aversion per agent; a single value applies to everyone.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub theta: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(subcommand)]
    pub kind: SweepKind,
}

#[derive(Debug, Args)]
pub struct SweepCommon {
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.99)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SweepKind {
    /// Equicorrelated pools over a grid of correlations.
    Rho {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = -0.95, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, default_value_t = 0.95, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[command(flatten)]
        common: SweepCommon,
    },
    /// Pools of growing size under `constant:RHO` or `decay:BASE`.
    Participants {
        #[arg(long, default_value = "constant:0.2")]
        scheme: String,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        #[command(flatten)]
        common: SweepCommon,
    },
}

#[derive(Debug, Args)]
pub struct LambdaStarArgs {
    /// Risk-aversion levels.
    #[arg(long, value_delimiter = ',', required = true)]
    pub theta: Vec<f64>,
    /// Pool file; without it an equicorrelated pool is built from `--n`, `--sigma`, `--rho`.
    #[arg(long)]
    pub pool: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub agent: usize,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    pub rho: f64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrraArgs {
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 200_000)]
    pub samples: usize,
    /// Log-mean of the lognormal endowments.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu: f64,
    /// Log-volatility of the lognormal endowments.
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    #[arg(long, env = "FRICSHARE_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// CSV with header `period,entity,amount` (amounts are losses, >= 0).
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the statistics JSON; stdout by default.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// JSON `{"means": [...], "variances": [...], "correlation": [[...]]}`.
    #[arg(long)]
    pub stats: PathBuf,
    #[arg(long, default_value_t = 0.99)]
    pub lambda: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub theta: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `argv` and runs the command, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

enum Failure {
    Usage(String),
    Domain(CliError),
}

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        Self::Domain(e)
    }
}

impl From<fricshare_core::Error> for Failure {
    fn from(e: fricshare_core::Error) -> Self {
        Self::Domain(e.into())
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Allocate(a) => allocate_cmd(a),
        Command::Axioms(a) => axioms_cmd(a),
        Command::Gaussian(a) => gaussian_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::LambdaStar(a) => lambda_star_cmd(a),
        Command::Crra(a) => crra_cmd(a),
        Command::Ingest(a) => ingest_cmd(a),
        Command::Report(a) => report_cmd(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(io_err(path)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// One output cell: numbers are printed at full or 4-digit precision
/// depending on the format.
enum Val {
    Num(f64),
    Text(String),
}

fn render_rows(format: Format, headers: &[&str], rows: &[Vec<Val>]) -> String {
    let cells = |precise: bool| -> Vec<Vec<String>> {
        rows.iter()
            .map(|r| {
                r.iter()
                    .map(|v| match v {
                        Val::Num(x) if precise => full(*x),
                        Val::Num(x) => sig4(*x),
                        Val::Text(s) => s.clone(),
                    })
                    .collect()
            })
            .collect()
    };
    match format {
        Format::Table => output::table(headers, &cells(false)),
        _ => output::csv(headers, &cells(true)),
    }
}

fn broadcast(theta: &[f64], n: usize) -> Result<Vec<f64>, Failure> {
    match theta.len() {
        1 => Ok(vec![theta[0]; n]),
        k if k == n => Ok(theta.to_vec()),
        k => Err(Failure::Usage(format!("--theta has {k} values for {n} agents"))),
    }
}

#[derive(Serialize)]
struct PairCost {
    i: usize,
    j: usize,
    cost: Vec<f64>,
}

#[derive(Serialize)]
struct AllocationOut {
    rule: String,
    info_used: Vec<Vec<usize>>,
    allocations: Vec<Vec<f64>>,
    global_cost: Vec<f64>,
    pairwise_cost: Vec<PairCost>,
}

fn allocate_cmd(a: AllocateArgs) -> Result<(), Failure> {
    let spec = parse_rule(&a.rule).map_err(usage)?;
    let file: SpaceFile = read_json(&a.space)?;
    let problem = file.into_problem()?;
    let alloc = apply(&spec, &problem.profile, &problem.info, &problem.space)?;
    let costs = frictional_costs(&problem.profile, &alloc)?;
    let n = problem.profile.n();
    let text = match a.format {
        Format::Json => to_json(&AllocationOut {
            rule: spec.label(),
            info_used: alloc.info_used.blocks().to_vec(),
            allocations: alloc.parts.iter().map(|h| h.values().to_vec()).collect(),
            global_cost: costs.global.values().to_vec(),
            pairwise_cost: costs
                .pairwise
                .iter()
                .map(|(&(i, j), c)| PairCost {
                    i,
                    j,
                    cost: c.values().to_vec(),
                })
                .collect(),
        }),
        f => {
            let names: Vec<String> = (1..=n).map(|i| format!("H_{i}")).collect();
            let mut headers = vec!["outcome"];
            headers.extend(names.iter().map(String::as_str));
            headers.push("cost");
            let rows: Vec<Vec<Val>> = (0..problem.space.len())
                .map(|w| {
                    let mut r = vec![Val::Text(w.to_string())];
                    r.extend(alloc.parts.iter().map(|h| Val::Num(h[w])));
                    r.push(Val::Num(costs.global[w]));
                    r
                })
                .collect();
            render_rows(f, &headers, &rows)
        }
    };
    Ok(emit(a.out.as_deref(), &text)?)
}

fn parse_axioms(text: Option<&str>) -> Result<Vec<AxiomId>, Failure> {
    match text.map(str::trim) {
        None => Ok(AxiomId::TABLE.to_vec()),
        Some(t) if t.eq_ignore_ascii_case("all") => Ok(AxiomId::ALL.to_vec()),
        Some(t) => t.split(',').map(|s| s.parse().map_err(usage)).collect(),
    }
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
        .collect()
}

fn axioms_cmd(a: AxiomsArgs) -> Result<(), Failure> {
    let rules: Vec<MechanismSpec> = split_rules(&a.rules)
        .iter()
        .map(|r| parse_rule(r).map_err(usage))
        .collect::<Result<_, _>>()?;
    if rules.is_empty() {
        return Err(Failure::Usage("--rules is empty".into()));
    }
    let axioms = parse_axioms(a.axioms.as_deref())?;
    let cfg = CheckConfig {
        trials: a.trials,
        seed: a.seed,
        space_size: a.outcomes,
        n_agents: a.agents,
        tol: a.tol,
        info: match a.info {
            InfoArg::Trivial => InfoMode::Trivial,
            InfoArg::Random => InfoMode::Random,
        },
        ..CheckConfig::default()
    };
    cfg.validate().map_err(usage)?;
    let matrix = comparison_matrix(&rules, &axioms, &cfg)?;

    // counterexample files, keyed by (rule, axiom)
    let mut paths: Vec<Vec<Option<PathBuf>>> = vec![vec![None; axioms.len()]; rules.len()];
    if let Some(dir) = &a.counterexamples {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        for (r, row) in matrix.cells.iter().enumerate() {
            for (k, cell) in row.iter().enumerate() {
                if let Some(ce) = cell.result().and_then(|res| res.counterexample.as_ref()) {
                    let path = dir.join(format!("{}_{}.json", file_stem(&matrix.rules[r]), file_stem(axioms[k].code())));
                    fs::write(&path, to_json(ce)).map_err(io_err(&path))?;
                    paths[r][k] = Some(path);
                }
            }
        }
    }

    let codes: Vec<&str> = axioms.iter().map(|x| x.code()).collect();
    let text = match (a.report, a.matrix) {
        (Format::Json, _) => to_json(&matrix),
        (Format::Csv, true) => {
            let mut headers = vec!["rule"];
            headers.extend(&codes);
            headers.push("counterexamples");
            let rows: Vec<Vec<String>> = matrix
                .cells
                .iter()
                .enumerate()
                .map(|(r, row)| {
                    let mut out = vec![matrix.rules[r].clone()];
                    out.extend(row.iter().map(|c| c.status().to_string()));
                    let files: Vec<String> = paths[r].iter().flatten().map(|p| p.display().to_string()).collect();
                    out.push(files.join(";"));
                    out
                })
                .collect();
            output::csv(&headers, &rows)
        }
        (Format::Table, true) => {
            let mut headers = vec!["rule"];
            headers.extend(&codes);
            let rows: Vec<Vec<String>> = matrix
                .cells
                .iter()
                .enumerate()
                .map(|(r, row)| {
                    let mut out = vec![matrix.rules[r].clone()];
                    out.extend(row.iter().map(|c| c.symbol().to_string()));
                    out
                })
                .collect();
            let mut s = output::table(&headers, &rows);
            s.push_str(&format!("{} trials per cell, seed {}\n", matrix.trials, matrix.seed));
            s
        }
        (f, false) => {
            let headers = ["rule", "axiom", "status", "trials", "trial", "violation", "witness", "file"];
            let mut rows = Vec::new();
            for (r, row) in matrix.cells.iter().enumerate() {
                for (k, cell) in row.iter().enumerate() {
                    let res = cell.result();
                    let ce = res.and_then(|x| x.counterexample.as_ref());
                    rows.push(vec![
                        Val::Text(matrix.rules[r].clone()),
                        Val::Text(codes[k].to_string()),
                        Val::Text(cell.status().to_string()),
                        Val::Text(res.map_or(String::new(), |x| x.trials_run.to_string())),
                        Val::Text(ce.map_or(String::new(), |c| c.trial.to_string())),
                        ce.map_or(Val::Text(String::new()), |c| Val::Num(c.witness.violation())),
                        Val::Text(ce.map_or(String::new(), |c| c.witness.what.clone())),
                        Val::Text(paths[r][k].as_ref().map_or(String::new(), |p| p.display().to_string())),
                    ]);
                }
            }
            render_rows(f, &headers, &rows)
        }
    };
    Ok(emit(a.out.as_deref(), &text)?)
}

#[derive(Serialize)]
struct GaussianAgentOut {
    mu: f64,
    sigma: f64,
    rho_bar: f64,
    idio: f64,
    intercept: f64,
    slope: f64,
    expected_cost: f64,
    expected_alloc: f64,
    t: f64,
}

#[derive(Serialize)]
struct GaussianOut {
    lambda: f64,
    kappa: f64,
    sigma_total: f64,
    global_cost: f64,
    agents: Vec<GaussianAgentOut>,
}

fn gaussian_out(pool: &GaussianPool, lambda: f64, theta: &[f64]) -> fricshare_core::Result<GaussianOut> {
    let stats = pool_stats(pool)?;
    let form = es_closed_form(pool, lambda)?;
    let tr = tradeoff(pool, lambda, theta)?;
    Ok(GaussianOut {
        lambda,
        kappa: form.kappa,
        sigma_total: stats.sigma_total,
        global_cost: form.global_cost(),
        agents: (0..pool.n())
            .map(|i| GaussianAgentOut {
                mu: pool.mu()[i],
                sigma: stats.sigma[i],
                rho_bar: stats.rho_bar[i],
                idio: stats.idio[i],
                intercept: form.intercept[i],
                slope: form.slope[i],
                expected_cost: tr.expected_cost[i],
                expected_alloc: tr.expected_alloc[i],
                t: tr.t[i],
            })
            .collect(),
    })
}

fn gaussian_cmd(a: GaussianArgs) -> Result<(), Failure> {
    let pool = read_json::<PoolFile>(&a.pool)?.into_pool()?;
    let theta = broadcast(&a.theta, pool.n())?;
    let g = gaussian_out(&pool, a.lambda, &theta)?;
    let text = match a.format {
        Format::Json => to_json(&g),
        f => {
            let headers = ["agent", "mu", "sigma", "rho_bar", "s", "a", "b", "C", "E[H]", "T"];
            let rows: Vec<Vec<Val>> = g
                .agents
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    vec![
                        Val::Text((i + 1).to_string()),
                        Val::Num(r.mu),
                        Val::Num(r.sigma),
                        Val::Num(r.rho_bar),
                        Val::Num(r.idio),
                        Val::Num(r.intercept),
                        Val::Num(r.slope),
                        Val::Num(r.expected_cost),
                        Val::Num(r.expected_alloc),
                        Val::Num(r.t),
                    ]
                })
                .collect();
            let mut s = render_rows(f, &headers, &rows);
            if f == Format::Table {
                s.push_str(&format!(
                    "lambda {}  kappa {}  global cost {}\n",
                    g.lambda,
                    sig4(g.kappa),
                    sig4(g.global_cost)
                ));
            }
            s
        }
    };
    Ok(emit(a.out.as_deref(), &text)?)
}

fn grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>, Failure> {
    if !(step > 0.0 && from.is_finite() && to.is_finite() && from <= to) {
        return Err(Failure::Usage(format!("invalid grid {from}..{to} step {step}")));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    // snap to 12 decimals so that e.g. -0.95 + 3 * 0.05 prints as -0.8
    Ok((0..count)
        .map(|k| ((from + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

fn parse_scheme(text: &str) -> Result<CorrelationScheme, Failure> {
    let (kind, value) = text
        .split_once(':')
        .ok_or_else(|| Failure::Usage(format!("scheme `{text}`: expected constant:RHO or decay:BASE")))?;
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("scheme `{text}`: `{value}` is not a number")))?;
    match kind.trim() {
        "constant" => Ok(CorrelationScheme::Constant(v)),
        "decay" => Ok(CorrelationScheme::Decay(v)),
        other => Err(Failure::Usage(format!("unknown correlation scheme `{other}`"))),
    }
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![full(r.param), full(r.global_cost), full(r.avg_t), full(r.avg_cost_per_agent)])
        .collect();
    output::csv(&["param", "global_cost", "avg_T", "avg_cost_per_agent"], &body)
}

fn sweep_cmd(a: SweepArgs) -> Result<(), Failure> {
    let (rows, out) = match a.kind {
        SweepKind::Rho { n, from, to, step, common } => {
            let g = grid(from, to, step)?;
            (correlation_sweep(&g, n, common.sigma, common.lambda, common.theta)?, common.out)
        }
        SweepKind::Participants {
            scheme,
            n_min,
            n_max,
            common,
        } => {
            if n_min > n_max {
                return Err(Failure::Usage(format!("--n-min {n_min} exceeds --n-max {n_max}")));
            }
            let sizes: Vec<usize> = (n_min..=n_max).collect();
            let scheme = parse_scheme(&scheme)?;
            (participants_sweep(&sizes, scheme, common.sigma, common.lambda, common.theta)?, common.out)
        }
    };
    Ok(emit(out.as_deref(), &sweep_csv(&rows))?)
}

#[derive(Serialize)]
struct LambdaStarOut {
    theta: f64,
    lambda_star: Option<f64>,
}

fn lambda_star_cmd(a: LambdaStarArgs) -> Result<(), Failure> {
    let pool = match &a.pool {
        Some(path) => read_json::<PoolFile>(path)?.into_pool()?,
        None => equicorrelated_pool(a.n, a.sigma, a.rho)?,
    };
    let rows: Vec<LambdaStarOut> = a
        .theta
        .iter()
        .map(|&theta| {
            Ok(LambdaStarOut {
                theta,
                lambda_star: lambda_star(&pool, theta, a.agent)?,
            })
        })
        .collect::<fricshare_core::Result<_>>()?;
    let text = match a.format {
        Format::Json => to_json(&rows),
        f => {
            let cells: Vec<Vec<Val>> = rows
                .iter()
                .map(|r| {
                    vec![
                        Val::Num(r.theta),
                        r.lambda_star.map_or(Val::Text("none".into()), Val::Num),
                    ]
                })
                .collect();
            render_rows(f, &["theta", "lambda_star"], &cells)
        }
    };
    Ok(emit(a.out.as_deref(), &text)?)
}

fn crra_cmd(a: CrraArgs) -> Result<(), Failure> {
    let sampler = Sampler::LogNormal { mu: a.mu, sigma: a.sigma };
    let r = crra_epsilon0(&sampler, a.gamma, a.n, a.samples, a.seed)?;
    let text = match a.format {
        Format::Json => to_json(&r),
        f => render_rows(
            f,
            &["gamma", "n", "samples", "epsilon0", "merged_epsilon", "difference_se", "margin_ok"],
            &[vec![
                Val::Num(r.gamma),
                Val::Text(r.n.to_string()),
                Val::Text(r.samples.to_string()),
                Val::Num(r.epsilon0),
                Val::Num(r.merged_epsilon),
                Val::Num(r.difference_se),
                Val::Text(r.margin_ok.to_string()),
            ]],
        ),
    };
    Ok(emit(a.out.as_deref(), &text)?)
}

fn ingest_cmd(a: IngestArgs) -> Result<(), Failure> {
    let (table, rep) = ingest(&a.input)?;
    for d in &rep.dropped {
        eprintln!(
            "warning: dropped entity `{}` (missing periods: {})",
            d.entity,
            d.missing_periods.join(", ")
        );
    }
    if rep.duplicates_summed > 0 {
        eprintln!("note: summed {} duplicate (period, entity) rows", rep.duplicates_summed);
    }
    let stats = summarize(&table)?;
    for &i in &stats.zero_variance {
        eprintln!("warning: entity `{}` has zero variance; its correlations are set to 0", stats.names[i]);
    }
    Ok(emit(a.out.as_deref(), &to_json(&stats))?)
}

fn report_cmd(a: ReportArgs) -> Result<(), Failure> {
    let stats: SummaryStats = read_json(&a.stats)?;
    let theta = broadcast(&a.theta, stats.means.len())?;
    let r = report(&stats, a.lambda, &theta)?;
    if r.projected {
        eprintln!(
            "note: correlation matrix projected onto the PSD cone (min eigenvalue {})",
            r.min_eigenvalue
        );
    }
    let text = match a.format {
        Format::Json => to_json(&r),
        f => {
            let rows: Vec<Vec<Val>> = r
                .rows
                .iter()
                .map(|row| {
                    vec![
                        Val::Text(row.name.clone()),
                        Val::Num(row.expected_alloc),
                        Val::Num(row.expected_cost),
                        Val::Num(row.t),
                    ]
                })
                .collect();
            render_rows(f, &["entity", "E[H]", "C", "T"], &rows)
        }
    };
    Ok(emit(a.out.as_deref(), &text)?)
}
