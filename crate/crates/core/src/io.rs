//! CSV datasets: a header row of feature names with the class last, then one
//! row of categorical tokens per example.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nbc::{Class, Dataset, FeatureSpec, Instance};

/// Header and raw string cells of a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    /// (1-based line number, cells)
    pub rows: Vec<(usize, Vec<String>)>,
}

pub fn parse_csv(text: &str) -> Result<CsvTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(Error::EmptyDataset),
        Some(r) => r.map_err(|e| csv_error(1, e))?,
    };
    let header: Vec<String> = header.iter().map(str::to_string).collect();
    if header.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            msg: "header needs at least one feature column and the class column".into(),
        });
    }
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_error(0, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != header.len() {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        if let Some(col) = rec.iter().position(str::is_empty) {
            return Err(Error::Parse {
                line,
                msg: format!("empty value in column '{}'", header[col]),
            });
        }
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(CsvTable { header, rows })
}

fn csv_error(fallback_line: usize, e: csv::Error) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line() as usize);
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}

pub fn read_csv_file(path: &Path) -> Result<CsvTable> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_csv(&text)
}

/// Builds a dataset whose domains are the sorted distinct tokens of each
/// column. Class labels are sorted too, the second one being positive unless
/// `positive` names it.
pub fn dataset_from_table(table: &CsvTable, positive: Option<&str>) -> Result<Dataset> {
    if table.rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let m = table.header.len() - 1;
    let mut domains: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); m];
    let mut labels = BTreeSet::new();
    for (_, row) in &table.rows {
        for (d, v) in domains.iter_mut().zip(row) {
            d.insert(v.as_str());
        }
        labels.insert(row[m].as_str());
    }
    let mut labels: Vec<&str> = labels.into_iter().collect();
    match labels.len() {
        1 => return Err(Error::SingleClassDataset),
        2 => {}
        n => {
            return Err(Error::InvalidModel(format!(
                "exactly two classes are supported, found {n}"
            )))
        }
    }
    if let Some(p) = positive {
        match labels.iter().position(|l| *l == p) {
            Some(0) => labels.swap(0, 1),
            Some(_) => {}
            None => {
                return Err(Error::DomainMismatch(format!(
                    "positive class '{p}' does not occur in the data"
                )))
            }
        }
    }
    let features = table.header[..m]
        .iter()
        .zip(domains)
        .map(|(name, d)| {
            FeatureSpec::new(name.clone(), d.into_iter().map(str::to_string).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let classes = [labels[0].to_string(), labels[1].to_string()];
    dataset_with_features(table, &features, &classes)
}

/// Maps a table onto existing feature domains and class labels.
pub fn dataset_with_features(
    table: &CsvTable,
    features: &[FeatureSpec],
    classes: &[String; 2],
) -> Result<Dataset> {
    let m = features.len();
    if table.header.len() != m + 1 {
        return Err(Error::DomainMismatch(format!(
            "CSV has {} feature columns, the model has {m}",
            table.header.len() - 1
        )));
    }
    for (h, f) in table.header.iter().zip(features) {
        if *h != f.name {
            return Err(Error::DomainMismatch(format!(
                "CSV column '{h}' does not match model feature '{}'",
                f.name
            )));
        }
    }
    let rows = table
        .rows
        .iter()
        .map(|(line, row)| {
            let x = Instance::from_labels(features, &row[..m]).map_err(|e| Error::Parse {
                line: *line,
                msg: e.to_string(),
            })?;
            let c = match classes.iter().position(|c| *c == row[m]) {
                Some(i) => Class::from_index(i).expect("two classes"),
                None => {
                    return Err(Error::Parse {
                        line: *line,
                        msg: format!("unknown class label '{}'", row[m]),
                    })
                }
            };
            Ok((x, c))
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(features.to_vec(), classes.clone(), rows)
}

/// Serialises a dataset in the same CSV layout.
pub fn dataset_to_csv(data: &Dataset, class_column: &str) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = data.features.iter().map(|f| f.name.as_str()).collect();
    header.push(class_column);
    w.write_record(&header).expect("in-memory write");
    for (x, c) in &data.rows {
        let mut rec = x.labels(&data.features);
        rec.push(&data.classes[c.index()]);
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}
