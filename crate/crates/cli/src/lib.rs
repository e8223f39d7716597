//! Command-line front end: train a naive Bayes model from CSV, explain or
//! count on single instances, and benchmark explanations over a test set.

pub mod bench;
pub mod error;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use paxp_core::count::{count_complement, count_models, FixStatus};
use paxp_core::io::{dataset_from_table, dataset_to_csv, dataset_with_features, read_csv_file};
use paxp_core::paxp::{audit, explain, DEFAULT_DECIMALS};
use paxp_core::threshold::{format_fraction, format_percent};
use paxp_core::xlc::quantize;
use paxp_core::{
    train, Dataset, ExplainConfig, Explanation, FeatureSet, Instance, NbcModel, Threshold,
    Traversal, Xlc,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use bench::{run_bench, BenchConfig, BenchReport, BenchRow};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "paxp",
    version,
    about = "Explanations for binary naive Bayes classifiers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Order {
    Delta,
    Lex,
}

impl From<Order> for Traversal {
    fn from(o: Order) -> Traversal {
        match o {
            Order::Delta => Traversal::Delta,
            Order::Lex => Traversal::Lexicographic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Table,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model from a CSV file (class in the last column).
    Train {
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Laplace smoothing constant.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Fraction of rows used for training; the rest is the test split.
        #[arg(long, default_value_t = 0.8)]
        split: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the test split.
        #[arg(long)]
        test_out: Option<PathBuf>,
        /// Label of the positive class.
        #[arg(long)]
        positive: Option<String>,
    },
    /// Explain the model's prediction on one instance.
    Explain {
        model: PathBuf,
        /// Comma-separated feature values, in model order.
        #[arg(long)]
        instance: String,
        #[arg(long, default_value = "0.95")]
        delta: String,
        #[arg(long, default_value_t = DEFAULT_DECIMALS)]
        decimals: u32,
        #[arg(long, default_value_t = 7)]
        target_size: usize,
        #[arg(long, value_enum, default_value_t = Order::Delta)]
        order: Order,
        /// Print the explanation as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Count completions of an instance that keep its prediction.
    Count {
        model: PathBuf,
        #[arg(long)]
        instance: String,
        /// Comma-separated 1-based feature indices to fix; the rest are free.
        #[arg(long, default_value = "")]
        fix: String,
        #[arg(long, default_value_t = DEFAULT_DECIMALS)]
        decimals: u32,
    },
    /// Explain a seeded sample of test instances and summarise the results.
    Bench {
        model: PathBuf,
        test: PathBuf,
        #[arg(long, default_value = "0.90,0.93,0.95,0.98")]
        deltas: String,
        #[arg(long, default_value = "9,7,4")]
        targets: String,
        #[arg(long, default_value_t = 200)]
        max_instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_DECIMALS)]
        decimals: u32,
        #[arg(long, value_enum, default_value_t = Order::Delta)]
        order: Order,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Write the summary CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the full JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Print a saved JSON bench report as a table or CSV.
    ExportReport {
        report: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn load_model(path: &Path) -> Result<NbcModel, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(NbcModel::from_json(&text)?)
}

pub fn load_test_set(model: &NbcModel, path: &Path) -> Result<Dataset, CliError> {
    let table = read_csv_file(path)?;
    Ok(dataset_with_features(
        &table,
        model.features(),
        model.classes(),
    )?)
}

pub fn parse_instance(model: &NbcModel, s: &str) -> Result<Instance, CliError> {
    let labels: Vec<&str> = s.split(',').collect();
    Ok(Instance::from_labels(model.features(), &labels)?)
}

/// Parses `"1,5"` (1-based) into a feature set.
pub fn parse_fix(s: &str, m: usize) -> Result<FeatureSet, CliError> {
    let idx = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<usize>() {
            Ok(i) if (1..=m).contains(&i) => Ok(i - 1),
            _ => Err(CliError::Usage(format!(
                "feature index '{t}' is not in 1..={m}"
            ))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FeatureSet::from_indices(idx))
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    let out = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| CliError::Usage(format!("bad {what} '{t}'")))
        })
        .collect::<Result<Vec<T>, _>>()?;
    if out.is_empty() {
        return Err(CliError::Usage(format!("no {what} given")));
    }
    Ok(out)
}

fn parse_threshold(s: &str) -> Result<Threshold, CliError> {
    s.parse()
        .map_err(|e: paxp_core::Error| CliError::Usage(e.to_string()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Text rendering of an explanation, with feature names and values.
pub fn render_explanation(model: &NbcModel, v: &Instance, e: &Explanation) -> String {
    let names: Vec<String> = e
        .features
        .iter()
        .map(|i| {
            let f = &model.features()[i];
            format!("{}={}", f.name, f.domain[v.get(i)])
        })
        .collect();
    let mut s = String::new();
    s += &format!("prediction: {}\n", model.class_label(e.class));
    s += &format!("kind: {}\n", e.kind);
    s += &format!("features: {} [{}]\n", e.features, names.join(", "));
    s += &format!("size: {} (AXp {})\n", e.features.len(), e.seed.len());
    s += &format!(
        "precision: {} ({}%)\n",
        e.precision_fraction(),
        format_percent(&e.precision)
    );
    s += &format!("delta: {}\n", e.delta);
    if e.reseeded {
        s += "note: seed recomputed on the rounded weights\n";
    }
    s += &format!(
        "time: trim {:.6} s, total {:.6} s\n",
        e.trim_time.as_secs_f64(),
        e.total_time.as_secs_f64()
    );
    s
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Train {
            data,
            out: model_out,
            alpha,
            split,
            seed,
            test_out,
            positive,
        } => {
            if !(0.0 < split && split <= 1.0) {
                return Err(CliError::Usage(format!(
                    "--split must be in (0, 1], got {split}"
                )));
            }
            let table = read_csv_file(&data)?;
            let full = dataset_from_table(&table, positive.as_deref())?;
            let mut idx: Vec<usize> = (0..full.len()).collect();
            idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let cut = ((full.len() as f64 * split).round() as usize).clamp(1, full.len());
            let pick =
                |ix: &[usize]| full.with_rows(ix.iter().map(|&i| full.rows[i].clone()).collect());
            let train_set = pick(&idx[..cut]);
            let test_set = pick(&idx[cut..]);
            let model = train(&train_set, alpha)?;
            write_file(&model_out, &model.to_json())?;
            let acc = |d: &Dataset| -> Result<String, CliError> {
                let r = model.accuracy(d)?;
                Ok(format!(
                    "{:.2}%",
                    *r.numer() as f64 * 100.0 / *r.denom() as f64
                ))
            };
            writeln!(out, "features: {}", model.num_features())?;
            writeln!(
                out,
                "classes: {} / {} (positive)",
                model.classes()[0],
                model.classes()[1]
            )?;
            writeln!(
                out,
                "train rows: {}, accuracy {}",
                train_set.len(),
                acc(&train_set)?
            )?;
            if test_set.is_empty() {
                writeln!(out, "test rows: 0")?;
            } else {
                writeln!(
                    out,
                    "test rows: {}, accuracy {}",
                    test_set.len(),
                    acc(&test_set)?
                )?;
            }
            if let Some(p) = test_out {
                let class_column = table.header.last().expect("header has a class column");
                write_file(&p, &dataset_to_csv(&test_set, class_column))?;
            }
            writeln!(out, "model written to {}", model_out.display())?;
        }
        Command::Explain {
            model,
            instance,
            delta,
            decimals,
            target_size,
            order,
            json,
        } => {
            let model = load_model(&model)?;
            let v = parse_instance(&model, &instance)?;
            let cfg = ExplainConfig {
                delta: parse_threshold(&delta)?,
                target_size,
                decimals,
                traversal: order.into(),
            };
            let e = explain(&model, &v, &cfg)?;
            if !audit(&model, &v, &e)? {
                return Err(CliError::Audit(format!(
                    "explanation {} failed the audit",
                    e.features
                )));
            }
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&e)?)?;
            } else {
                write!(out, "{}", render_explanation(&model, &v, &e))?;
            }
        }
        Command::Count {
            model,
            instance,
            fix,
            decimals,
        } => {
            let model = load_model(&model)?;
            let v = parse_instance(&model, &instance)?;
            let fixed = parse_fix(&fix, model.num_features())?;
            let class = model.predict(&v)?.0;
            let qk = quantize(&Xlc::reduce(&model).toward(class), decimals)?;
            let status = FixStatus::from_set(&v, &fixed);
            let pos = count_models(&qk, &status)?;
            let neg = count_complement(&qk, &status)?;
            let total = &pos + &neg;
            let p = num_rational::BigRational::new(pos.clone().into(), total.clone().into());
            writeln!(out, "prediction: {}", model.class_label(class))?;
            writeln!(out, "fixed: {fixed}")?;
            writeln!(out, "n_plus: {pos}")?;
            writeln!(out, "n_minus: {neg}")?;
            writeln!(out, "total: {total}")?;
            writeln!(
                out,
                "precision: {} ({}%)",
                format_fraction(&p),
                format_percent(&p)
            )?;
        }
        Command::Bench {
            model,
            test,
            deltas,
            targets,
            max_instances,
            seed,
            decimals,
            order,
            jobs,
            csv,
            json,
        } => {
            let deltas = deltas
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(parse_threshold)
                .collect::<Result<Vec<_>, _>>()?;
            if deltas.is_empty() {
                return Err(CliError::Usage("no thresholds given".into()));
            }
            let cfg = BenchConfig {
                deltas,
                targets: parse_list(&targets, "target size")?,
                max_instances,
                seed,
                decimals,
                traversal: order.into(),
                jobs,
            };
            let name = test
                .file_stem()
                .map_or_else(|| "data".to_string(), |s| s.to_string_lossy().into_owned());
            let nbc = load_model(&model)?;
            let data = load_test_set(&nbc, &test)?;
            let report = run_bench(&name, &nbc, &data, &cfg)?;
            write!(out, "{}", bench::to_table(&report))?;
            if let Some(p) = csv {
                write_file(&p, &bench::to_csv(&report))?;
            }
            if let Some(p) = json {
                write_file(&p, &serde_json::to_string_pretty(&report)?)?;
            }
        }
        Command::ExportReport {
            report,
            format,
            out: dest,
        } => {
            let text = fs::read_to_string(&report)
                .map_err(|e| CliError::Data(format!("{}: {e}", report.display())))?;
            let report: BenchReport = serde_json::from_str(&text)?;
            let rendered = match format {
                ReportFormat::Table => bench::to_table(&report),
                ReportFormat::Csv => bench::to_csv(&report),
            };
            match dest {
                Some(p) => write_file(&p, &rendered)?,
                None => write!(out, "{rendered}")?,
            }
        }
    }
    Ok(())
}
