//! Command-line front end: `simulate`, `indicators`, `nowcast`, `evaluate`.
//!
//! Exit codes: 0 success, 2 invalid input, 3 convergence warning (outputs
//! are still written), 4 numerical failure.

pub mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

pub use config::Settings;

use crate::data::{
    build_triangle, build_triangle_from_aggregates, load_graph, read_aggregates, read_line_list,
    write_graph, write_line_list, AnalysisWindow, CountyGraph, ReportingTriangle,
};
use crate::error::{Error, Result};
use crate::evaluation::{interval_coverage, CoverageCount, CoverageScore, EvaluationReport, MethodScore, Region, TruthTable};
use crate::indicators::{rolling_indicator, spline_indicator, IndicatorConfig, IndicatorResult, Method};
use crate::model::{HyperPriorSpec, ModelData};
use crate::posterior::{
    classify, nowcast_intervals, read_nowcast_csv, read_trend_csv, trend_summaries, trend_sums,
    write_nowcast_csv, write_trend_csv, CUTPOINTS, QUANTILE_RULE,
};
use crate::sampler::diagnostics::{diagnostics, QuantityDiagnostics, MIN_DRAWS};
use crate::sampler::{run_chains_with_threads, timed, MonitorSpec, SamplerConfig};
use crate::simulate::{read_truth_counts, simulate, FixedParameters, ParameterSource, SimulationConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_CONVERGENCE: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "nowcast", version, about = "Nowcasts and trend alerts for delay-censored case counts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate a line list with known true counts.
    Simulate(CommandArgs),
    /// Run the rolling-average and spline indicators.
    Indicators(CommandArgs),
    /// Fit the Bayesian model and summarise nowcasts and trends.
    Nowcast(CommandArgs),
    /// Score indicator runs against true counts.
    Evaluate(CommandArgs),
}

#[derive(clap::Args, Debug)]
pub struct CommandArgs {
    /// TOML file with any of the settings below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: Settings,
}

impl CommandArgs {
    fn resolve(&self) -> Result<Settings> {
        let base = match &self.config {
            Some(p) => Settings::from_file(p)?,
            None => Settings::default(),
        };
        Ok(base.overlay(&self.settings))
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numerical(_) | Error::InvalidState(_) => EXIT_NUMERIC,
        _ => EXIT_INPUT,
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    let result = match &cli.command {
        Command::Simulate(a) => a.resolve().and_then(|s| cmd_simulate(&s)),
        Command::Indicators(a) => a.resolve().and_then(|s| cmd_indicators(&s)),
        Command::Nowcast(a) => a.resolve().and_then(|s| cmd_nowcast(&s)),
        Command::Evaluate(a) => a.resolve().and_then(|s| cmd_evaluate(&s)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Metadata written next to every command's outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub settings: Settings,
    pub as_of: Option<NaiveDate>,
    pub max_delay: Option<usize>,
    #[serde(default)]
    pub details: serde_json::Value,
}

impl Sidecar {
    fn new(command: &str, settings: &Settings) -> Self {
        Self {
            command: command.into(),
            version: VERSION.into(),
            config_hash: settings.hash(),
            settings: settings.clone(),
            as_of: None,
            max_delay: None,
            details: serde_json::Value::Null,
        }
    }

    fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn prepare_out(settings: &Settings) -> Result<PathBuf> {
    let out = settings.out_dir()?.to_path_buf();
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    Ok(out)
}

/// Graph, window and triangle described by the input settings.
pub struct Inputs {
    pub graph: CountyGraph,
    pub window: AnalysisWindow,
    pub triangle: ReportingTriangle,
}

pub fn load_inputs(s: &Settings) -> Result<Inputs> {
    let graph = load_graph(
        Settings::require(&s.population, "population")?,
        Settings::require(&s.edges, "edges")?,
    )?;
    let as_of = *Settings::require(&s.as_of, "as_of")?;
    let window = AnalysisWindow::new(as_of, s.window_len.unwrap_or(90), s.max_delay.unwrap_or(30))?;
    let triangle = match (&s.line_list, &s.aggregates) {
        (Some(p), None) => build_triangle(&read_line_list(p)?, &window, &graph)?,
        (None, Some(p)) => build_triangle_from_aggregates(&read_aggregates(p)?, &window, &graph)?,
        _ => return Err(Error::Input("give exactly one of `line_list` and `aggregates`".into())),
    };
    Ok(Inputs { graph, window, triangle })
}

fn input_details(inputs: &Inputs) -> serde_json::Value {
    serde_json::json!({
        "dropped_late": inputs.triangle.dropped_late,
        "reported_after_as_of": inputs.triangle.reported_after_as_of,
        "cases_in_triangle": inputs.triangle.total(),
    })
}

pub fn cmd_simulate(s: &Settings) -> Result<u8> {
    let out = prepare_out(s)?;
    let graph = match (&s.population, &s.edges) {
        (Some(p), Some(e)) => load_graph(p, e)?,
        (None, None) => {
            let (rows, cols) = (s.grid_rows.unwrap_or(3), s.grid_cols.unwrap_or(3));
            let (lo, hi) = (s.population_min.unwrap_or(20_000), s.population_max.unwrap_or(200_000));
            if lo == 0 || hi < lo {
                return Err(Error::Input("need 0 < population_min <= population_max".into()));
            }
            let n = rows * cols;
            CountyGraph::rook_grid(rows, cols, |k| {
                if n == 1 {
                    lo
                } else {
                    lo + (hi - lo) * k as u64 / (n as u64 - 1)
                }
            })?
        }
        _ => return Err(Error::Input("give both `population` and `edges`, or neither".into())),
    };
    let as_of = *Settings::require(&s.as_of, "as_of")?;
    let max_delay = s.max_delay.unwrap_or(30);
    let mut cfg = SimulationConfig::new(s.days.unwrap_or(90), max_delay, as_of, s.seed.unwrap_or(1));
    if let Some(b) = s.log_rate_bound {
        cfg.priors.log_rate_bound = b;
    }
    cfg.parameters = match s.parameters.as_deref().unwrap_or("typical") {
        "typical" => {
            let mut p = FixedParameters::typical(max_delay);
            if let Some(v) = s.delta_bar {
                p.delta_bar = v;
            }
            if let Some(r) = s.initial_rate {
                if !(r > 0.0) {
                    return Err(Error::Input("initial_rate must be positive".into()));
                }
                p.initial_level = Some(r.ln());
            }
            ParameterSource::Fixed(p)
        }
        "prior" => ParameterSource::Prior,
        other => return Err(Error::Input(format!("unknown parameters `{other}`"))),
    };
    let sim = simulate(&cfg, &graph)?;
    write_line_list(&out.join("line_list.csv"), &sim.line_list()?)?;
    write_graph(&graph, &out.join("population.csv"), &out.join("edges.csv"))?;
    sim.write_truth_counts(&out.join("truth_counts.csv"))?;
    write_json(
        &out.join("truth.json"),
        &serde_json::json!({ "config": cfg, "rejected_draws": sim.rejected, "truth": sim.truth }),
    )?;
    let mut side = Sidecar::new("simulate", s);
    side.as_of = Some(as_of);
    side.max_delay = Some(max_delay);
    side.write(&out.join("simulate.json"))?;
    Ok(EXIT_OK)
}

fn write_indicators_csv(path: &Path, rows: &[IndicatorResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["county_id", "method", "flagged"]).map_err(|e| Error::csv(path, e))?;
    for r in rows {
        w.write_record([r.county_id.as_str(), r.method.as_str(), if r.flagged { "true" } else { "false" }])
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_indicators_csv(path: &Path) -> Result<Vec<(String, Method, bool)>> {
    #[derive(Deserialize)]
    struct Row {
        county_id: String,
        method: String,
        flagged: bool,
    }
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    rdr.deserialize::<Row>()
        .map(|r| {
            let r = r.map_err(|e| Error::csv(path, e))?;
            Ok((r.county_id, r.method.parse()?, r.flagged))
        })
        .collect()
}

pub fn cmd_indicators(s: &Settings) -> Result<u8> {
    let inputs = load_inputs(s)?;
    let out = prepare_out(s)?;
    let cfg = IndicatorConfig {
        interior_knots: s.interior_knots.unwrap_or(4),
        ..IndicatorConfig::default()
    };
    let as_of = inputs.window.as_of();
    let mut rows = Vec::with_capacity(2 * inputs.graph.len());
    for (i, id) in inputs.graph.ids().iter().enumerate() {
        let series = inputs.triangle.onset_series(i);
        rows.push(rolling_indicator(id, as_of, &series, &cfg)?);
        rows.push(spline_indicator(id, as_of, &series, &cfg)?);
    }
    rows.sort_by(|a, b| a.method.cmp(&b.method));
    write_indicators_csv(&out.join("indicators.csv"), &rows)?;
    let mut side = Sidecar::new("indicators", s);
    side.as_of = Some(as_of);
    side.max_delay = Some(inputs.window.max_delay());
    side.details = input_details(&inputs);
    side.write(&out.join("indicators.json"))?;
    Ok(EXIT_OK)
}

pub fn sampler_config(s: &Settings) -> SamplerConfig {
    let d = SamplerConfig::default();
    SamplerConfig {
        iterations: s.iterations.unwrap_or(d.iterations),
        burn_in: s.burn_in.unwrap_or(d.burn_in),
        thin: s.thin.unwrap_or(d.thin),
        chains: s.chains.unwrap_or(d.chains),
        seed: s.seed.unwrap_or(d.seed),
        adapt_interval: s.adapt_interval.unwrap_or(d.adapt_interval),
        target_acceptance: s.target_acceptance.unwrap_or(d.target_acceptance),
        monitors: MonitorSpec {
            trend_window: s.trend_window.unwrap_or(21),
            full_state: s.full_state.unwrap_or(false),
        },
    }
}

pub fn cmd_nowcast(s: &Settings) -> Result<u8> {
    let inputs = load_inputs(s)?;
    let out = prepare_out(s)?;
    let cfg = sampler_config(s);
    cfg.validate()?;
    let mut priors = HyperPriorSpec::default();
    if let Some(b) = s.log_rate_bound {
        priors.log_rate_bound = b;
    }
    let data = ModelData::new(&inputs.triangle, &inputs.graph)?;
    let (draws, seconds) = timed(|| run_chains_with_threads(&data, &priors, &cfg, s.threads.unwrap_or(1)));
    let draws = draws?;
    let window = cfg.monitors.trend_window;
    let ids = inputs.graph.ids();

    draws.write_csv(&out.join("draws.csv"))?;
    let nowcasts = nowcast_intervals(&draws, &data, &inputs.window, ids, 0.90)?;
    write_nowcast_csv(&out.join("nowcast.csv"), &nowcasts)?;
    let trends = trend_summaries(&draws, ids, data.dims.t, window)?;
    write_trend_csv(&out.join("trend.csv"), &trends)?;
    if s.trend_sums.unwrap_or(false) {
        let sums: BTreeMap<&str, Vec<f64>> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| Ok((id.as_str(), trend_sums(&draws, i, data.dims.t, window)?)))
            .collect::<Result<_>>()?;
        write_json(&out.join("trend_sums.json"), &sums)?;
    }

    let min_draws = draws.chains.iter().map(|c| c.n_draws()).min().unwrap_or(0);
    let table: Option<Vec<QuantityDiagnostics>> = if min_draws >= MIN_DRAWS {
        Some(diagnostics(&draws)?)
    } else {
        None
    };
    let unconverged: Vec<&str> = table
        .iter()
        .flatten()
        .filter(|q| q.rhat.is_some_and(|r| r > crate::sampler::diagnostics::RHAT_THRESHOLD))
        .map(|q| q.name.as_str())
        .collect();
    let acceptance: Vec<_> = draws
        .chains
        .iter()
        .map(|c| serde_json::json!({ "chain": c.chain + 1, "families": c.acceptance, "latent_totals": c.latent_acceptance }))
        .collect();
    let diag = serde_json::json!({
        "version": VERSION,
        "config_hash": s.hash(),
        "seed": cfg.seed,
        "sampler": cfg,
        "priors": priors,
        "quantile_rule": QUANTILE_RULE,
        "draws_per_chain": min_draws,
        "diagnostics": table,
        "rhat_available": draws.chains.len() > 1 && table.is_some(),
        "unconverged": unconverged,
        "convergence_warning": trends.iter().any(|t| t.convergence_warning),
        "acceptance": acceptance,
        "wall_clock_seconds": seconds,
    });
    write_json(&out.join("diagnostics.json"), &diag)?;
    let mut side = Sidecar::new("nowcast", s);
    side.as_of = Some(inputs.window.as_of());
    side.max_delay = Some(inputs.window.max_delay());
    side.details = input_details(&inputs);
    side.write(&out.join("nowcast.json"))?;

    if unconverged.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "warning: {} monitored quantities have R-hat above {}",
            unconverged.len(),
            crate::sampler::diagnostics::RHAT_THRESHOLD
        );
        Ok(EXIT_CONVERGENCE)
    }
}

fn run_metadata(dir: &Path) -> Result<(NaiveDate, Option<usize>)> {
    for name in ["nowcast.json", "indicators.json"] {
        let p = dir.join(name);
        if p.exists() {
            let side = Sidecar::read(&p)?;
            let as_of = side
                .as_of
                .ok_or_else(|| Error::Input(format!("{}: no as-of date", p.display())))?;
            return Ok((as_of, side.max_delay));
        }
    }
    Err(Error::Input(format!("{}: no run metadata found", dir.display())))
}

pub fn cmd_evaluate(s: &Settings) -> Result<u8> {
    let truth_path = Settings::require(&s.truth, "truth")?;
    let truth: TruthTable = read_truth_counts(truth_path)?
        .into_iter()
        .map(|r| (r.county_id, r.date, r.count))
        .collect();
    let runs = Settings::require(&s.runs, "runs")?;
    let out = prepare_out(s)?;

    let mut methods: BTreeMap<(u8, String), MethodScore> = BTreeMap::new();
    let mut score = |rank: u8, label: &str, cutpoint: Option<f64>, flagged: bool, truth: bool| {
        methods
            .entry((rank, label.to_string()))
            .or_insert_with(|| MethodScore {
                method: label.to_string(),
                cutpoint,
                confusion: Default::default(),
            })
            .confusion
            .add(flagged, truth);
    };
    let regions = [Region::Last30, Region::Last7, Region::Incomplete];
    let mut coverage = [CoverageCount::default(); 3];
    let mut any_nowcast = false;

    for dir in runs {
        let (as_of, max_delay) = run_metadata(dir)?;
        let ind = dir.join("indicators.csv");
        if ind.exists() {
            for (county, method, flagged) in read_indicators_csv(&ind)? {
                let t = truth.true_increase(&county, as_of)?;
                score(method as u8, method.as_str(), None, flagged, t);
            }
        }
        let trend = dir.join("trend.csv");
        if trend.exists() {
            for (county, p) in read_trend_csv(&trend)? {
                let t = truth.true_increase(&county, as_of)?;
                for (k, &cut) in CUTPOINTS.iter().enumerate() {
                    let summary = crate::posterior::TrendSummary {
                        county_id: county.clone(),
                        probability_increase: p,
                        flag50: p > CUTPOINTS[0],
                        flag70: p > CUTPOINTS[1],
                        flag90: p > CUTPOINTS[2],
                        convergence_warning: false,
                    };
                    let flagged = classify(&summary, cut, as_of).flagged;
                    score(Method::Model as u8 + k as u8, "model", Some(cut), flagged, t);
                }
            }
        }
        let nc = dir.join("nowcast.csv");
        if nc.exists() {
            any_nowcast = true;
            let rows = read_nowcast_csv(&nc)?;
            let d = max_delay.unwrap_or(30);
            for (k, r) in regions.iter().enumerate() {
                coverage[k].merge(interval_coverage(&rows, &truth, as_of, r.days(d))?);
            }
        }
    }

    let report = EvaluationReport {
        methods: methods.into_values().collect(),
        coverage: if any_nowcast {
            regions
                .iter()
                .zip(coverage)
                .map(|(&region, count)| CoverageScore { region, count })
                .collect()
        } else {
            Vec::new()
        },
    };
    report.write_evaluation_csv(&out.join("evaluation.csv"))?;
    report.write_coverage_csv(&out.join("coverage.csv"))?;
    Sidecar::new("evaluate", s).write(&out.join("evaluate.json"))?;
    Ok(EXIT_OK)
}
