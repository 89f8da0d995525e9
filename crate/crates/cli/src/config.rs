//! Optional TOML defaults for `riot schedule`. Command-line flags win.
//!
//! ```toml
//! algo = "riot"
//! seed = 7
//! catalog = "types.json"
//! eta_grid = [0.25, 0.5, 0.75, 1.0]
//! n_random = 500
//! n_anchor = 30
//! keep_anchors = false
//! budget = 760
//! format = "csv"
//! ```

use std::path::PathBuf;

use serde::Deserialize;

use crate::{Algo, Format, ScheduleArgs};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub algo: Option<Algo>,
    pub seed: Option<u64>,
    pub catalog: Option<PathBuf>,
    pub eta_grid: Option<Vec<f64>>,
    pub n_random: Option<usize>,
    pub n_anchor: Option<usize>,
    pub keep_anchors: Option<bool>,
    pub budget: Option<usize>,
    pub format: Option<Format>,
}

pub fn parse(text: &str) -> Result<FileConfig, toml::de::Error> {
    toml::from_str(text)
}

/// Fills every flag left unset from the file.
pub fn merge(mut args: ScheduleArgs, file: FileConfig) -> ScheduleArgs {
    args.algo = args.algo.or(file.algo);
    args.seed = args.seed.or(file.seed);
    args.catalog = args.catalog.or(file.catalog);
    args.eta_grid = args.eta_grid.or(file.eta_grid);
    args.n_random = args.n_random.or(file.n_random);
    args.n_anchor = args.n_anchor.or(file.n_anchor);
    args.keep_anchors |= file.keep_anchors.unwrap_or(false);
    args.budget = args.budget.or(file.budget);
    args.format = args.format.or(file.format);
    args
}
