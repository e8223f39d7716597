//! Batch explanation runs summarised per (threshold, target size).

use std::time::Instant;

use paxp_core::count::to_f64;
use paxp_core::paxp::{audit, explain, ExplainConfig, ExplanationKind, Traversal};
use paxp_core::xlc::quantize;
use paxp_core::{compute_axp, Dataset, Instance, NbcModel, Threshold, Xlc};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub deltas: Vec<Threshold>,
    pub targets: Vec<usize>,
    pub max_instances: usize,
    pub seed: u64,
    pub decimals: u32,
    pub traversal: Traversal,
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            deltas: ["0.90", "0.93", "0.95", "0.98"]
                .iter()
                .map(|d| d.parse().expect("valid threshold"))
                .collect(),
            targets: vec![9, 7, 4],
            max_instances: 200,
            seed: 0,
            decimals: paxp_core::paxp::DEFAULT_DECIMALS,
            traversal: Traversal::Delta,
            jobs: None,
        }
    }
}

/// Summary of one (threshold, target size) configuration. Lengths are
/// feature counts, precisions and rates are percentages, times are seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub delta: Threshold,
    pub target: usize,
    pub instances: usize,
    pub axp_len_mean: f64,
    pub axp_len_std: f64,
    pub len_mean: f64,
    pub len_std: f64,
    pub precision_mean: f64,
    pub precision_std: f64,
    pub win_rate: f64,
    /// Instances whose AXp exceeded the target and went through trimming.
    pub trimmed: usize,
    pub reseeded: usize,
    /// Mean over trimmed instances only; `None` when nothing was trimmed.
    pub trim_time_mean: Option<f64>,
    pub trim_time_max: f64,
    pub total_time_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub dataset: String,
    pub features: usize,
    pub test_rows: usize,
    pub test_accuracy: f64,
    pub seed: u64,
    pub decimals: u32,
    /// Selected instances on which the quantized classifier disagrees with
    /// the real-valued one.
    pub quantized_mismatches: usize,
    pub rows: Vec<BenchRow>,
    pub elapsed: f64,
}

struct Outcome {
    len: usize,
    precision: f64,
    trimmed: bool,
    reseeded: bool,
    trim_time: f64,
    total_time: f64,
}

/// Row indices picked by a ChaCha8 generator seeded with `seed`: the rows
/// are shuffled and the first `max` kept.
pub fn select_instances(rows: usize, max: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..rows).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx.truncate(max);
    idx
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.clone().sum::<f64>() / n as f64;
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    (mean, var.sqrt())
}

fn explain_one(model: &NbcModel, v: &Instance, cfg: &ExplainConfig) -> Result<Outcome, CliError> {
    let e = explain(model, v, cfg)?;
    if !audit(model, v, &e)? {
        return Err(CliError::Audit(format!(
            "explanation {} of instance {:?} failed the audit",
            e.features,
            v.labels(model.features())
        )));
    }
    Ok(Outcome {
        len: e.features.len(),
        precision: to_f64(&e.precision) * 100.0,
        trimmed: e.kind == ExplanationKind::ApproxPaxp,
        reseeded: e.reseeded,
        trim_time: e.trim_time.as_secs_f64(),
        total_time: e.total_time.as_secs_f64(),
    })
}

pub fn run_bench(
    dataset: &str,
    model: &NbcModel,
    test: &Dataset,
    cfg: &BenchConfig,
) -> Result<BenchReport, CliError> {
    let start = Instant::now();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = pool.build().map_err(|e| CliError::Usage(e.to_string()))?;

    let picked: Vec<&Instance> = select_instances(test.len(), cfg.max_instances, cfg.seed)
        .into_iter()
        .map(|i| &test.rows[i].0)
        .collect();
    let reduced = Xlc::reduce(model);

    let mut axp_lens = Vec::with_capacity(picked.len());
    let mut mismatches = 0;
    for v in &picked {
        let class = model.predict(v)?.0;
        let xlc = reduced.toward(class);
        axp_lens.push(compute_axp(&xlc.slack(v)?)?.len() as f64);
        if !quantize(&xlc, cfg.decimals)?.accepts(v)? {
            mismatches += 1;
        }
    }
    let (axp_len_mean, axp_len_std) = mean_std(axp_lens.iter().copied());

    let mut rows = Vec::new();
    for delta in &cfg.deltas {
        for &target in &cfg.targets {
            let ecfg = ExplainConfig {
                delta: delta.clone(),
                target_size: target,
                decimals: cfg.decimals,
                traversal: cfg.traversal,
            };
            let outcomes: Vec<Outcome> = pool.install(|| {
                picked
                    .par_iter()
                    .map(|v| explain_one(model, v, &ecfg))
                    .collect::<Result<_, _>>()
            })?;
            let (len_mean, len_std) = mean_std(outcomes.iter().map(|o| o.len as f64));
            let (precision_mean, precision_std) = mean_std(outcomes.iter().map(|o| o.precision));
            let wins = outcomes.iter().filter(|o| o.len <= target).count();
            let trimmed: Vec<&Outcome> = outcomes.iter().filter(|o| o.trimmed).collect();
            let trim_time_mean = (!trimmed.is_empty())
                .then(|| trimmed.iter().map(|o| o.trim_time).sum::<f64>() / trimmed.len() as f64);
            rows.push(BenchRow {
                delta: delta.clone(),
                target,
                instances: outcomes.len(),
                axp_len_mean,
                axp_len_std,
                len_mean,
                len_std,
                precision_mean,
                precision_std,
                win_rate: if outcomes.is_empty() {
                    0.0
                } else {
                    wins as f64 * 100.0 / outcomes.len() as f64
                },
                trimmed: trimmed.len(),
                reseeded: outcomes.iter().filter(|o| o.reseeded).count(),
                trim_time_mean,
                trim_time_max: outcomes.iter().map(|o| o.trim_time).fold(0.0, f64::max),
                total_time_max: outcomes.iter().map(|o| o.total_time).fold(0.0, f64::max),
            });
        }
    }

    let acc = model.accuracy(test)?;
    Ok(BenchReport {
        dataset: dataset.to_string(),
        features: model.num_features(),
        test_rows: test.len(),
        test_accuracy: *acc.numer() as f64 / *acc.denom() as f64,
        seed: cfg.seed,
        decimals: cfg.decimals,
        quantized_mismatches: mismatches,
        rows,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Machine-readable summary. Timing columns are left out so that reruns with
/// the same seed produce identical bytes.
pub fn to_csv(report: &BenchReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "dataset",
        "delta",
        "target",
        "instances",
        "axp_len_mean",
        "axp_len_std",
        "len_mean",
        "len_std",
        "precision_mean",
        "precision_std",
        "win_rate",
        "trimmed",
        "reseeded",
    ])
    .expect("in-memory write");
    for r in &report.rows {
        w.write_record([
            report.dataset.clone(),
            r.delta.to_string(),
            r.target.to_string(),
            r.instances.to_string(),
            format!("{:.4}", r.axp_len_mean),
            format!("{:.4}", r.axp_len_std),
            format!("{:.4}", r.len_mean),
            format!("{:.4}", r.len_std),
            format!("{:.4}", r.precision_mean),
            format!("{:.4}", r.precision_std),
            format!("{:.2}", r.win_rate),
            r.trimmed.to_string(),
            r.reseeded.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Human-readable table, one line per configuration.
pub fn to_table(report: &BenchReport) -> String {
    let mut out = format!(
        "dataset {} | {} features | {} test rows | accuracy {:.2}% | decimals {} | seed {}\n",
        report.dataset,
        report.features,
        report.test_rows,
        report.test_accuracy * 100.0,
        report.decimals,
        report.seed
    );
    out.push_str(&format!(
        "{:>8} {:>6} {:>5} {:>14} {:>14} {:>16} {:>7} {:>10}\n",
        "delta", "target", "n", "AXp len", "length", "precision %", "W%", "time s"
    ));
    for r in &report.rows {
        let time = r
            .trim_time_mean
            .map_or_else(|| "-".to_string(), |t| format!("{t:.4}"));
        out.push_str(&format!(
            "{:>8.2} {:>6} {:>5} {:>14} {:>14} {:>16} {:>7.2} {:>10}\n",
            r.delta.as_f64(),
            r.target,
            r.instances,
            format!("{:.2} ± {:.2}", r.axp_len_mean, r.axp_len_std),
            format!("{:.2} ± {:.2}", r.len_mean, r.len_std),
            format!("{:.2} ± {:.2}", r.precision_mean, r.precision_std),
            r.win_rate,
            time
        ));
    }
    if report.quantized_mismatches > 0 {
        out.push_str(&format!(
            "note: {} instance(s) fall on the other side of the boundary after rounding\n",
            report.quantized_mismatches
        ));
    }
    out
}
