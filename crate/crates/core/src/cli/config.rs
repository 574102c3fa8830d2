//! Flat key-value settings shared by every subcommand.
//!
//! A TOML file supplies any subset of the keys; command-line flags with the
//! same names override it; anything still unset takes its default.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// Line list CSV (`county_id,onset_date,report_date`).
    #[arg(long)]
    pub line_list: Option<PathBuf>,
    /// Aggregate CSV (`county_id,onset_date,delay,count`), instead of a line list.
    #[arg(long)]
    pub aggregates: Option<PathBuf>,
    /// Population CSV (`county_id,population`).
    #[arg(long)]
    pub population: Option<PathBuf>,
    /// Adjacency CSV (`county_a,county_b`).
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Last onset day of the analysis window.
    #[arg(long)]
    pub as_of: Option<NaiveDate>,
    /// Days in the analysis window [90].
    #[arg(long)]
    pub window_len: Option<usize>,
    /// Maximum reporting delay in days [30].
    #[arg(long)]
    pub max_delay: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel chains [1].
    #[arg(long)]
    pub threads: Option<usize>,

    /// Interior knots of the spline indicator [4].
    #[arg(long)]
    pub interior_knots: Option<usize>,

    /// Sampler iterations per chain [30000].
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Discarded iterations [15000].
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Keep every n-th post-burn-in iteration [10].
    #[arg(long)]
    pub thin: Option<usize>,
    /// Number of chains [2].
    #[arg(long)]
    pub chains: Option<usize>,
    /// Random seed [1].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Iterations between proposal-scale adaptations [200].
    #[arg(long)]
    pub adapt_interval: Option<usize>,
    /// Target acceptance rate of random-walk updates [0.44].
    #[arg(long)]
    pub target_acceptance: Option<f64>,
    /// Trailing days summed for the trend probability [21].
    #[arg(long)]
    pub trend_window: Option<usize>,
    /// Record the whole latent state in the draws file [false].
    #[arg(long)]
    pub full_state: Option<bool>,
    /// Write the per-draw trend sums as JSON [false].
    #[arg(long)]
    pub trend_sums: Option<bool>,
    /// Bound on |ln lambda| beyond which states have zero density [50].
    #[arg(long)]
    pub log_rate_bound: Option<f64>,

    /// Simulated grid rows [3].
    #[arg(long)]
    pub grid_rows: Option<usize>,
    /// Simulated grid columns [3].
    #[arg(long)]
    pub grid_cols: Option<usize>,
    /// Smallest simulated county population [20000].
    #[arg(long)]
    pub population_min: Option<u64>,
    /// Largest simulated county population [200000].
    #[arg(long)]
    pub population_max: Option<u64>,
    /// Simulated onset days [90].
    #[arg(long)]
    pub days: Option<usize>,
    /// `typical` or `prior` [typical].
    #[arg(long)]
    pub parameters: Option<String>,
    /// Overrides the state-level trend of the typical parameters.
    #[arg(long, allow_hyphen_values = true)]
    pub delta_bar: Option<f64>,
    /// Initial daily cases per person under the typical parameters [0.0005].
    #[arg(long)]
    pub initial_rate: Option<f64>,

    /// True totals CSV written by `simulate`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Output directories of `indicators` / `nowcast` runs to score.
    #[arg(long, num_args = 1..)]
    pub runs: Option<Vec<PathBuf>>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),* $(,)?) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
    }

    /// Values set in `top` replace those in `self`.
    pub fn overlay(mut self, top: &Settings) -> Self {
        overlay!(
            self, top, line_list, aggregates, population, edges, as_of, window_len, max_delay, out,
            threads, interior_knots, iterations, burn_in, thin, chains, seed, adapt_interval,
            target_acceptance, trend_window, full_state, trend_sums, log_rate_bound, grid_rows,
            grid_cols, population_min, population_max, days, parameters, delta_bar, initial_rate,
            truth, runs,
        );
        self
    }

    /// SHA-256 of the canonical JSON form, as lowercase hex.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("settings serialize");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn require<'a, T>(value: &'a Option<T>, key: &str) -> Result<&'a T> {
        value
            .as_ref()
            .ok_or_else(|| Error::Input(format!("missing required setting `{key}`")))
    }

    pub fn out_dir(&self) -> Result<&Path> {
        Self::require(&self.out, "out").map(PathBuf::as_path)
    }
}
