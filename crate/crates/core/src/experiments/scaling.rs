use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::Instant;

use super::config::{DocCount, ExperimentConfig};
use super::report::{cell_text, pct};
use super::run::{derive_seed, CellKey, Prepared};
use crate::error::Result;
use crate::tagger::{evaluate_f1, train_tagger};

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingMetrics {
    /// Trained on the low-resource documents alone, in their own space.
    /// Absent without documents.
    pub monolingual: Option<f64>,
    /// Pivot data plus the low-resource documents in the projected space.
    pub cross_lingual: f64,
    /// `cross_lingual − monolingual`, or `cross_lingual` without documents.
    pub gain: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRow {
    pub docs: DocCount,
    pub resolved_docs: usize,
    pub seed: u64,
    pub outcome: std::result::Result<ScalingMetrics, String>,
}

impl ScalingRow {
    pub fn label(&self) -> String {
        match (self.docs, self.resolved_docs) {
            (_, 0) => "None (zero-shot)".to_string(),
            (DocCount::Full, n) => format!("Full set ({n} docs)"),
            (DocCount::Count(n), _) => format!("{n} docs"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    pub cell: CellKey,
    pub dict_pairs: usize,
    pub rows: Vec<ScalingRow>,
    pub timings: Vec<(String, f64)>,
}

pub const SCALING_COLUMNS: [&str; 7] = [
    "Low resource data",
    "Monolingual",
    "Cross-lingual gain",
    "Cross-lingual",
    "Documents",
    "Seed",
    "Status",
];

impl ScalingReport {
    pub fn to_tsv(&self) -> String {
        let mut out = SCALING_COLUMNS.join("\t");
        out.push('\n');
        for r in &self.rows {
            match &r.outcome {
                Ok(m) => {
                    let _ = writeln!(
                        out,
                        "{}\t{}\t{:+.2}\t{}\t{}\t{}\tok",
                        r.label(),
                        m.monolingual.map_or("-".to_string(), pct),
                        100.0 * m.gain,
                        pct(m.cross_lingual),
                        r.resolved_docs,
                        r.seed
                    );
                }
                Err(e) => {
                    let _ = writeln!(
                        out,
                        "{}\t-\t-\t-\t{}\t{}\tfailed: {}",
                        r.label(),
                        r.resolved_docs,
                        r.seed,
                        cell_text(e)
                    );
                }
            }
        }
        let _ = writeln!(out, "# dictionary {} ({} pairs)", self.cell, self.dict_pairs);
        out
    }

    pub fn timings_tsv(&self) -> String {
        let mut out = String::from("step\tseconds\n");
        for (step, secs) in &self.timings {
            let _ = writeln!(out, "{step}\t{secs:.3}");
        }
        out
    }
}

/// Data-scaling run over prepared inputs with the dictionary fixed by
/// `scaling`. Low-resource subsets are nested prefixes of one seeded order.
pub fn run_scaling(prepared: &Prepared) -> Result<ScalingReport> {
    let c = &prepared.config;
    let s = &c.scaling;
    let cell = CellKey {
        source: s.source,
        size: s.size,
        band: Some(s.band),
        method: c.alignment.method,
    };
    let mut timings = Vec::new();
    let start = Instant::now();
    let dict = prepared.dictionary(&cell)?;
    let dict_pairs = dict.len();
    let (dict, _) = prepared.validated(dict, cell.seed(c.master_seed))?;
    let (projected, _) = prepared.project(&dict)?;
    timings.push(("projection".to_string(), start.elapsed().as_secs_f64()));

    let available = prepared.low.train.len();
    let src_lang = prepared.source.language().to_string();
    let tgt_lang = prepared.target.language().to_string();
    let mut rows = Vec::new();
    for &docs in &s.doc_counts {
        let n = docs.resolve(available);
        let seed = derive_seed(c.master_seed, &format!("scaling {n}"));
        let start = Instant::now();
        let outcome = (|| -> Result<ScalingMetrics> {
            if n == 0 {
                let f1 = prepared.zero_shot(&projected, &prepared.low.test)?;
                return Ok(ScalingMetrics {
                    monolingual: None,
                    cross_lingual: f1,
                    gain: f1,
                });
            }
            let subset = prepared.low_subset(n);
            let config = c.tagger.train_config(seed);
            let raw = HashMap::from([(src_lang.clone(), &prepared.source)]);
            let mono_model = train_tagger(&[&subset], &raw, &config)?;
            let mono = evaluate_f1(&mono_model, &prepared.low.test, &prepared.source)?.macro_f1;
            let shared = HashMap::from([(tgt_lang.clone(), &prepared.target), (src_lang.clone(), &projected)]);
            let cross_model = train_tagger(&[&prepared.pivot.train, &subset], &shared, &config)?;
            let cross = evaluate_f1(&cross_model, &prepared.low.test, &projected)?.macro_f1;
            Ok(ScalingMetrics {
                monolingual: Some(mono),
                cross_lingual: cross,
                gain: cross - mono,
            })
        })()
        .map_err(|e| e.to_string());
        timings.push((format!("docs {n}"), start.elapsed().as_secs_f64()));
        rows.push(ScalingRow {
            docs,
            resolved_docs: n,
            seed,
            outcome,
        });
    }
    Ok(ScalingReport {
        cell,
        dict_pairs,
        rows,
        timings,
    })
}

/// Loads the inputs of `config` and runs its data-scaling experiment.
pub fn run_data_scaling(config: &ExperimentConfig) -> Result<ScalingReport> {
    let prepared = Prepared::new(config)?;
    run_scaling(&prepared)
}
