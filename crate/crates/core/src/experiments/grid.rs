use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::Instant;

use super::config::ExperimentConfig;
use super::report::{cell_text, pct};
use super::run::{CellKey, CellMetrics, Prepared};
use crate::dictionary::SourceKind;
use crate::error::Result;

/// One report row: a cell as it appears in one factor block.
#[derive(Clone, Debug, PartialEq)]
pub struct GridRow {
    /// `source`, `frequency`, `size`, or `cartesian`.
    pub block: String,
    pub key: CellKey,
    pub seed: u64,
    pub outcome: std::result::Result<CellMetrics, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridReport {
    pub rows: Vec<GridRow>,
    /// Wall-clock seconds per distinct cell, in execution order.
    pub timings: Vec<(CellKey, f64)>,
}

pub const GRID_COLUMNS: [&str; 12] = [
    "Factor combinations",
    "Joint training",
    "Zero shot",
    "P@1",
    "Block",
    "Cell",
    "Seed",
    "Dictionary pairs",
    "Threshold",
    "Map pairs",
    "P@1 skipped OOV",
    "Status",
];

impl GridReport {
    pub fn get(&self, block: &str, key: &CellKey) -> Option<&GridRow> {
        self.rows.iter().find(|r| r.block == block && &r.key == key)
    }

    /// The report body; identical inputs give identical bytes.
    pub fn to_tsv(&self) -> String {
        let mut out = GRID_COLUMNS.join("\t");
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{}\t", r.key.label());
            match &r.outcome {
                Ok(m) => {
                    let _ = writeln!(
                        out,
                        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\tok",
                        pct(m.joint_f1),
                        pct(m.zero_shot_f1),
                        m.p_at_1.map_or("-".to_string(), pct),
                        r.block,
                        r.key,
                        r.seed,
                        m.dict_pairs,
                        m.threshold.map_or("-".to_string(), |t| t.to_string()),
                        m.map_pairs,
                        m.p1_skipped_oov,
                    );
                }
                Err(e) => {
                    let _ = writeln!(
                        out,
                        "-\t-\t-\t{}\t{}\t{}\t-\t-\t-\t-\tfailed: {}",
                        r.block,
                        r.key,
                        r.seed,
                        cell_text(e)
                    );
                }
            }
        }
        out
    }

    pub fn timings_tsv(&self) -> String {
        let mut out = String::from("cell\tseconds\n");
        for (key, secs) in &self.timings {
            let _ = writeln!(out, "{key}\t{secs:.3}");
        }
        out
    }
}

struct Runner<'a> {
    prepared: &'a Prepared,
    cache: HashMap<CellKey, std::result::Result<CellMetrics, String>>,
    timings: Vec<(CellKey, f64)>,
    rows: Vec<GridRow>,
}

impl Runner<'_> {
    fn run(&mut self, block: &str, key: CellKey) -> Option<f64> {
        let outcome = match self.cache.get(&key) {
            Some(o) => o.clone(),
            None => {
                let start = Instant::now();
                let o = self.prepared.run_cell(&key).map_err(|e| e.to_string());
                self.timings.push((key, start.elapsed().as_secs_f64()));
                match &o {
                    Ok(m) => log::info!("{key}: zero-shot {} joint {}", m.zero_shot_f1, m.joint_f1),
                    Err(e) => log::warn!("{key}: failed: {e}"),
                }
                self.cache.insert(key, o.clone());
                o
            }
        };
        let score = outcome.as_ref().ok().map(|m| m.zero_shot_f1);
        self.rows.push(GridRow {
            block: block.to_string(),
            key,
            seed: key.seed(self.prepared.config.master_seed),
            outcome,
        });
        score
    }

    /// Runs one block and returns the option with the best zero-shot F1;
    /// ties and an all-failed block go to the first option.
    fn block<T: Copy>(&mut self, name: &str, options: &[T], key: impl Fn(T) -> CellKey) -> T {
        let mut best: Option<(T, f64)> = None;
        for &o in options {
            if let Some(score) = self.run(name, key(o)) {
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((o, score));
                }
            }
        }
        best.map_or_else(
            || {
                log::warn!("every cell of block {name} failed; continuing with its first option");
                options[0]
            },
            |(o, _)| o,
        )
    }
}

/// Runs the factor grid over already prepared inputs.
pub fn run_grid(prepared: &Prepared) -> GridReport {
    let c = &prepared.config;
    let g = &c.grid;
    let method = c.alignment.method;
    let mut runner = Runner {
        prepared,
        cache: HashMap::new(),
        timings: Vec::new(),
        rows: Vec::new(),
    };
    if g.sequential {
        let source = runner.block("source", &g.sources, |source| CellKey {
            source,
            size: g.base_size,
            band: (source == SourceKind::Domain).then_some(g.base_band),
            method,
        });
        let band = runner.block("frequency", &g.bands, |band| CellKey {
            source,
            size: g.base_size,
            band: Some(band),
            method,
        });
        runner.block("size", &g.sizes, |size| CellKey {
            source,
            size,
            band: Some(band),
            method,
        });
    } else {
        for &source in &g.sources {
            for &size in &g.sizes {
                for &band in &g.bands {
                    runner.run(
                        "cartesian",
                        CellKey {
                            source,
                            size,
                            band: Some(band),
                            method,
                        },
                    );
                }
            }
        }
    }
    GridReport {
        rows: runner.rows,
        timings: runner.timings,
    }
}

/// Loads the inputs of `config` and runs its factor grid. Config and input
/// errors abort; cell errors are recorded in their rows.
pub fn run_factor_grid(config: &ExperimentConfig) -> Result<GridReport> {
    let prepared = Prepared::new(config)?;
    Ok(run_grid(&prepared))
}

/// Number of report rows `config` produces.
pub fn row_count(config: &ExperimentConfig) -> usize {
    let g = &config.grid;
    if g.sequential {
        g.sources.len() + g.bands.len() + g.sizes.len()
    } else {
        g.sources.len() * g.sizes.len() * g.bands.len()
    }
}
