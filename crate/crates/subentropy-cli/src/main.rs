//! Command-line front end: parse JSON inputs, dispatch computations, emit
//! JSON/CSV reports.
//!
//! Exit codes: 0 on success, 2 on validation errors (with a machine-readable
//! error JSON on stderr), 3 when a solver budget is exhausted. `-` as a path
//! means standard input/output. Outputs are deterministic for a fixed
//! command line and seed.

// negated comparisons deliberately reject NaN inputs
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use subentropy::algebra::Density;
use subentropy::divergence::{sandwiched_renyi, RenyiOrder};
use subentropy::fixtures;
use subentropy::index::index_report;
use subentropy::markov::{
    decay_experiment, default_grid, discrete_decay_experiment, spectral_gap,
};
use subentropy::projection::divergence_to_subalgebra;
use subentropy::schema::{
    decay_csv, sweep_csv, DecayReportJson, EntropyReportJson, GeneratorJson, InclusionJson,
    IndexReportJson, SolverReportJson, StateJson,
};
use subentropy::solver::SolverBudget;
use subentropy::Error;

#[derive(Parser)]
#[command(
    name = "subentropy",
    version,
    about = "Relative entropy to subalgebras, inclusion indices, and decoherence bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// Base seed for all randomized solvers.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of solver starts.
    #[arg(long, global = true)]
    starts: Option<usize>,
    /// Objective-evaluation budget per solver start.
    #[arg(long, global = true)]
    max_evals: Option<usize>,
    /// Output path (`-` for stdout).
    #[arg(long, global = true, default_value = "-")]
    output: String,
    /// Rescale entropy-valued outputs to bits (divide by log 2).
    #[arg(long, global = true)]
    bits: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form index report for an inclusion.
    Index {
        /// Inclusion JSON path (`-` for stdin).
        #[arg(long)]
        inclusion: String,
    },
    /// Divergence of a state: to the subalgebra, or to a second state.
    Entropy {
        #[arg(long)]
        inclusion: String,
        /// State JSON path.
        #[arg(long)]
        state: String,
        /// Optional second state; when given, computes D_p(state||sigma).
        #[arg(long)]
        sigma: Option<String>,
        /// Renyi order (number or `inf`).
        #[arg(long, default_value = "1")]
        p: String,
    },
    /// CSV sweep of D_p(state||N) over a list of orders.
    SweepP {
        #[arg(long)]
        inclusion: String,
        #[arg(long)]
        state: String,
        /// Comma-separated orders, e.g. `0.5,1,2,inf`.
        #[arg(long = "p-list")]
        p_list: String,
    },
    /// Continuous decay experiment for a semigroup generator.
    Semigroup {
        /// Generator JSON path (`schur` or `superop`).
        #[arg(long)]
        generator: String,
        #[arg(long)]
        state: String,
        /// Time grid `start:stop:count`; default `0:5/gap:51`.
        #[arg(long = "t-grid")]
        t_grid: Option<String>,
        /// Tensor the semigroup with `id` on M_n.
        #[arg(long, default_value_t = 1)]
        amplify: usize,
        /// `csv` or `json`.
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Discrete decay experiment for a Schur Markov map.
    Discrete {
        /// Generator JSON path (`schur_map`).
        #[arg(long)]
        generator: String,
        #[arg(long)]
        state: String,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        amplify: usize,
        /// Trace-distance target for the threshold check.
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Print a named fixture as JSON.
    Fixtures {
        #[arg(long)]
        name: Option<String>,
        /// List available fixture names.
        #[arg(long)]
        list: bool,
    },
    /// Run the built-in oracle checks.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, kind) = classify(&err);
            let payload = serde_json::json!({
                "error": err.to_string(),
                "kind": kind,
            });
            eprintln!("{payload}");
            ExitCode::from(code)
        }
    }
}

fn classify(err: &CliError) -> (u8, &'static str) {
    match err {
        CliError::Lib(Error::SolverBudgetExceeded { .. }) => (3, "SolverBudgetExceeded"),
        CliError::Lib(e) => (2, lib_kind(e)),
        CliError::Io(_) => (2, "Io"),
        CliError::Json(_) => (2, "Json"),
        CliError::Selftest(_) => (1, "Selftest"),
    }
}

fn lib_kind(e: &Error) -> &'static str {
    match e {
        Error::NonHermitian { .. } => "NonHermitian",
        Error::DomainError { .. } => "DomainError",
        Error::DimensionMismatch { .. } => "DimensionMismatch",
        Error::TraceMismatch { .. } => "TraceMismatch",
        Error::NonUnital { .. } => "NonUnital",
        Error::AlgebraMismatch => "AlgebraMismatch",
        Error::NotDensity { .. } => "NotDensity",
        Error::BadOrder { .. } => "BadOrder",
        Error::SolverBudgetExceeded { .. } => "SolverBudgetExceeded",
        Error::UnsupportedGroup { .. } => "UnsupportedGroup",
        Error::NotCnd { .. } => "NotCND",
        Error::BadDiagonal { .. } => "BadDiagonal",
        Error::Asymmetric { .. } => "Asymmetric",
        Error::NotEquivalence { .. } => "NotEquivalence",
        Error::MuNotContractive { .. } => "MuNotContractive",
        Error::InvalidSchurMap { .. } => "InvalidSchurMap",
        Error::NegativeTime { .. } => "NegativeTime",
        Error::NoGap => "NoGap",
        Error::NotPartition { .. } => "NotPartition",
        Error::BadInput(_) => "BadInput",
    }
}

enum CliError {
    Lib(Error),
    Io(std::io::Error),
    Json(serde_json::Error),
    Selftest(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}
impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Json(e) => write!(f, "{e}"),
            CliError::Selftest(s) => write!(f, "{s}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read_input(path: &str) -> CliResult<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

fn write_output(path: &str, content: &str) -> CliResult<()> {
    if path == "-" {
        print!("{content}");
        Ok(())
    } else {
        std::fs::write(path, content)?;
        Ok(())
    }
}

fn budget(common: &Common) -> SolverBudget {
    let mut b = SolverBudget::default().with_seed(common.seed);
    if let Some(s) = common.starts {
        b.starts = s;
    }
    if let Some(m) = common.max_evals {
        b.max_evals = m;
    }
    b
}

fn parse_inclusion(path: &str) -> CliResult<subentropy::algebra::Inclusion> {
    let text = read_input(path)?;
    let json: InclusionJson = serde_json::from_str(&text)?;
    Ok(json.to_inclusion()?)
}

fn bits_scale(bits: bool) -> f64 {
    if bits {
        1.0 / 2.0f64.ln()
    } else {
        1.0
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let common = cli.common.clone();
    match cli.command {
        Command::Index { inclusion } => {
            let inc = parse_inclusion(&inclusion)?;
            let report = IndexReportJson::from_report(&index_report(&inc), common.bits);
            write_output(
                &common.output,
                &format!("{}\n", serde_json::to_string_pretty(&report)?),
            )
        }
        Command::Entropy { inclusion, state, sigma, p } => {
            let inc = parse_inclusion(&inclusion)?;
            let state_json: StateJson = serde_json::from_str(&read_input(&state)?)?;
            let rho = state_json.to_density(&inc)?;
            let order = RenyiOrder::parse(&p)?;
            let scale = bits_scale(common.bits);
            let report = if let Some(sigma_path) = sigma {
                let sigma_json: StateJson = serde_json::from_str(&read_input(&sigma_path)?)?;
                let sigma = sigma_json.to_density(&inc)?;
                let value = sandwiched_renyi(&rho, &sigma, order)?;
                EntropyReportJson {
                    p,
                    value: value.is_finite().then(|| value.as_f64() * scale),
                    minimizer: None,
                    solver: None,
                }
            } else {
                let out = divergence_to_subalgebra(&rho, &inc, order, &budget(&common))?;
                EntropyReportJson {
                    p,
                    value: out.value.is_finite().then(|| out.value.as_f64() * scale),
                    minimizer: Some(StateJson::from_element("sub", out.minimizer.element())),
                    solver: Some(SolverReportJson {
                        evals: out.report.evals,
                        residual: out.report.residual,
                        starts: out.report.starts_used,
                    }),
                }
            };
            write_output(
                &common.output,
                &format!("{}\n", serde_json::to_string_pretty(&report)?),
            )
        }
        Command::SweepP { inclusion, state, p_list } => {
            let inc = parse_inclusion(&inclusion)?;
            let state_json: StateJson = serde_json::from_str(&read_input(&state)?)?;
            let rho = state_json.to_density(&inc)?;
            let scale = bits_scale(common.bits);
            let mut orders: Vec<RenyiOrder> = Vec::new();
            for raw in p_list.split(',') {
                let order = RenyiOrder::parse(raw)?;
                if orders.contains(&order) {
                    eprintln!("warning: duplicate order {raw} dropped");
                } else {
                    orders.push(order);
                }
            }
            orders.sort_by(|a, b| a.p().partial_cmp(&b.p()).unwrap());
            let b = budget(&common);
            let mut rows = Vec::new();
            let mut values = Vec::new();
            for order in &orders {
                let v = divergence_to_subalgebra(&rho, &inc, *order, &b)?
                    .value
                    .as_f64();
                values.push(v);
                let label = if order.is_infinite() {
                    "inf".to_string()
                } else {
                    format!("{}", order.p())
                };
                rows.push((label, v * scale));
            }
            for w in values.windows(2) {
                if w[0] > w[1] + 1e-5 {
                    return Err(CliError::Lib(Error::BadInput(format!(
                        "internal monotonicity check failed: {} > {}",
                        w[0], w[1]
                    ))));
                }
            }
            write_output(&common.output, &sweep_csv(&rows))
        }
        Command::Semigroup { generator, state, t_grid, amplify, format } => {
            let gen_json: GeneratorJson = serde_json::from_str(&read_input(&generator)?)?;
            let gen = gen_json.to_semigroup()?;
            let (_, inc) = subentropy::markov::lifted_setup(&gen, amplify)?;
            let state_json: StateJson = serde_json::from_str(&read_input(&state)?)?;
            let rho = state_json.to_density(&inc)?;
            let gap = spectral_gap(&gen)?;
            let grid = match t_grid {
                Some(spec) => parse_grid(&spec)?,
                None => default_grid(gap, 51),
            };
            let report = decay_experiment(&gen, &rho, &grid, amplify, &budget(&common))?;
            emit_decay(&common.output, &format, &report)
        }
        Command::Discrete { generator, state, steps, amplify, epsilon, format } => {
            let gen_json: GeneratorJson = serde_json::from_str(&read_input(&generator)?)?;
            let map = gen_json.to_schur_map()?;
            let base = fixtures::diagonal_in_matrix(map.dim());
            let inc = if amplify > 1 { base.amplify(amplify) } else { base };
            let state_json: StateJson = serde_json::from_str(&read_input(&state)?)?;
            let rho = state_json.to_density(&inc)?;
            let out =
                discrete_decay_experiment(&map, &rho, steps, amplify, epsilon, &budget(&common))?;
            if !out.targets_met {
                eprintln!(
                    "warning: trace-distance target missed beyond step {}",
                    out.threshold
                );
            }
            emit_decay(&common.output, &format, &out.report)
        }
        Command::Fixtures { name, list } => {
            if list || name.is_none() {
                let mut text = String::new();
                for n in fixtures::inclusion_names() {
                    text.push_str(n);
                    text.push('\n');
                }
                for n in generator_fixture_names() {
                    text.push_str(n);
                    text.push('\n');
                }
                return write_output(&common.output, &text);
            }
            let name = name.unwrap();
            let text = if let Ok(inc) = fixtures::inclusion_by_name(&name) {
                format!(
                    "{}\n",
                    serde_json::to_string_pretty(&InclusionJson::from_inclusion(&inc))?
                )
            } else if let Some(gen) = generator_fixture(&name)? {
                format!("{}\n", serde_json::to_string_pretty(&gen)?)
            } else {
                return Err(CliError::Lib(Error::BadInput(format!(
                    "unknown fixture {name:?}; try --list"
                ))));
            };
            write_output(&common.output, &text)
        }
        Command::Selftest => selftest(&common),
    }
}

fn generator_fixture_names() -> &'static [&'static str] {
    &[
        "deph2", "deph3", "deph4", "deph5", "deph6", "twoclass4", "map_mu03", "map_mu07",
    ]
}

fn generator_fixture(name: &str) -> CliResult<Option<GeneratorJson>> {
    let gen = match name {
        "deph2" => Some(GeneratorJson::from_schur(&fixtures::dephasing(2))),
        "deph3" => Some(GeneratorJson::from_schur(&fixtures::dephasing(3))),
        "deph4" => Some(GeneratorJson::from_schur(&fixtures::dephasing(4))),
        "deph5" => Some(GeneratorJson::from_schur(&fixtures::dephasing(5))),
        "deph6" => Some(GeneratorJson::from_schur(&fixtures::dephasing(6))),
        "twoclass4" => Some(GeneratorJson::from_schur(&fixtures::two_class_schur())),
        "map_mu03" => Some(GeneratorJson::from_schur_map(
            &fixtures::flat_schur_map(2, 0.3).map_err(CliError::Lib)?,
        )),
        "map_mu07" => Some(GeneratorJson::from_schur_map(
            &fixtures::flat_schur_map(2, 0.7).map_err(CliError::Lib)?,
        )),
        _ => None,
    };
    Ok(gen)
}

fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Lib(Error::BadInput(format!(
            "t-grid must be start:stop:count, got {spec:?}"
        ))));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Lib(Error::BadInput("bad grid start".into())))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Lib(Error::BadInput("bad grid stop".into())))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| CliError::Lib(Error::BadInput("bad grid count".into())))?;
    if count < 2 || !(stop > start) || start < 0.0 {
        return Err(CliError::Lib(Error::BadInput(
            "grid needs 0 <= start < stop and count >= 2".into(),
        )));
    }
    Ok((0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect())
}

fn emit_decay(
    output: &str,
    format: &str,
    report: &subentropy::markov::DecayReport,
) -> CliResult<()> {
    match format {
        "csv" => write_output(output, &decay_csv(report)),
        "json" => write_output(
            output,
            &format!(
                "{}\n",
                serde_json::to_string_pretty(&DecayReportJson::from_report(report))?
            ),
        ),
        other => Err(CliError::Lib(Error::BadInput(format!(
            "unknown format {other:?} (use csv or json)"
        )))),
    }
}

/// A fast battery of oracle checks covering the closed forms and the decay
/// bounds; prints one line per check.
fn selftest(common: &Common) -> CliResult<()> {
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool| {
        println!("{} - {name}", if ok { "ok  " } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    for (name, inc, ratio) in fixtures::index_fixtures() {
        let got = subentropy::index::pimsner_popa_index(&inc);
        check(
            &format!("index {name} = log {ratio}"),
            (got - ratio.ln()).abs() < 1e-12,
        );
    }
    let m12 = fixtures::m12();
    check(
        "cb index m12 = log 13",
        (subentropy::index::dcb_index(&m12) - 13.0f64.ln()).abs() < 1e-12,
    );
    check(
        "tensor-square m12 index = log 124",
        (subentropy::index::pimsner_popa_index(&m12.tensor(&m12)) - 124.0f64.ln()).abs() < 1e-12,
    );

    let b = budget(common);
    let inc = fixtures::diagonal_in_matrix(2);
    for &a in &[0.1f64, 0.3, 0.5] {
        let alg = inc.amb();
        let rho = Density::block_pure(
            alg,
            0,
            &[
                subentropy::linalg::C64::new(a.sqrt(), 0.0),
                subentropy::linalg::C64::new((1.0 - a).sqrt(), 0.0),
            ],
        )
        .map_err(CliError::Lib)?;
        for order in [RenyiOrder::new(2.0).unwrap(), RenyiOrder::Infinity] {
            let q = order.q();
            let want = (order.p_prime() / q) * (a.powf(q) + (1.0 - a).powf(q)).ln();
            let got = divergence_to_subalgebra(&rho, &inc, order, &b)?.value.as_f64();
            check(
                &format!("pure-state divergence a={a} p={}", order.p()),
                (got - want).abs() < 1e-5,
            );
        }
    }

    let gen = subentropy::markov::Semigroup::Schur(fixtures::dephasing(2));
    let alg = fixtures::matrix_algebra(2);
    let plus = Density::block_pure(
        &alg,
        0,
        &[
            subentropy::linalg::C64::new(1.0, 0.0),
            subentropy::linalg::C64::new(1.0, 0.0),
        ],
    )
    .map_err(CliError::Lib)?;
    let grid = default_grid(1.0, 11);
    let report = decay_experiment(&gen, &plus, &grid, 1, &b)?;
    check(
        "dephasing decay has no violations",
        report.violations.is_empty(),
    );
    check(
        "dephasing refined inequality",
        report.refined_slack.iter().all(|s| *s >= -1e-6),
    );

    let map = fixtures::flat_schur_map(2, 0.7).map_err(CliError::Lib)?;
    let out = discrete_decay_experiment(&map, &plus, 12, 1, 0.05, &b)?;
    check(
        "discrete decay has no violations",
        out.report.violations.is_empty(),
    );

    let t_star = subentropy::markov::decoherence_time_bound(&inc, 1.0, 0.05, true)
        .map_err(CliError::Lib)?;
    let evolved = gen.evolve(&plus, t_star)?;
    let e = inc.embed_density(&inc.expect_density(&plus)?)?;
    check(
        "decoherence time reaches the target",
        subentropy::divergence::trace_distance(&evolved, &e)? <= 0.05,
    );

    if failures == 0 {
        Ok(())
    } else {
        Err(CliError::Selftest(format!(
            "{failures} selftest checks failed"
        )))
    }
}
