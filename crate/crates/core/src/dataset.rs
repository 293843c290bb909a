//! Tabular data: CSV ingestion, binarization, sanitization and folds.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Distinct-value limit for one-hot encoding a non-numeric column.
pub const DEFAULT_MAX_CATEGORIES: usize = 32;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("empty header")]
    EmptyHeader,
    #[error("row {row}: expected {expected} cells, found {got}")]
    Ragged {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("row {row}, column {column} ('{name}'): missing value")]
    MissingValue {
        row: usize,
        column: usize,
        name: String,
    },
    #[error("bin count must be 2, 3 or 4 (got {0})")]
    InvalidBins(usize),
    #[error("column '{column}' has {distinct} distinct non-numeric values (limit {limit})")]
    TooManyCategories {
        column: String,
        distinct: usize,
        limit: usize,
    },
    #[error("column '{column}': '{value}' is not numeric")]
    NotNumeric { column: String, value: String },
    #[error("unknown class label '{0}'")]
    UnknownClass(String),
    #[error("expected {expected} feature columns, found {got}")]
    ColumnMismatch { expected: usize, got: usize },
    #[error("fold count must be at least 2 (got {0})")]
    InvalidFolds(usize),
    #[error("{examples} examples cannot be split into {folds} folds")]
    TooFewExamples { examples: usize, folds: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRow {
    pub values: Vec<String>,
    pub class: String,
}

/// A table as read from disk; the last column is the class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDataset {
    pub feature_names: Vec<String>,
    pub class_name: String,
    pub rows: Vec<RawRow>,
}

impl RawDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn column(&self, c: usize) -> impl Iterator<Item = &str> + '_ {
        self.rows.iter().map(move |r| r.values[c].as_str())
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<RawDataset, DatasetError> {
    let file = std::fs::File::open(path)?;
    read_csv(file)
}

pub fn parse_csv_str(text: &str) -> Result<RawDataset, DatasetError> {
    read_csv(text.as_bytes())
}

fn read_csv<R: Read>(input: R) -> Result<RawDataset, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(DatasetError::EmptyHeader);
    }
    let width = header.len();
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        if rec.len() != width {
            return Err(DatasetError::Ragged {
                row,
                expected: width,
                got: rec.len(),
            });
        }
        if let Some(column) = rec.iter().position(str::is_empty) {
            return Err(DatasetError::MissingValue {
                row,
                column: column + 1,
                name: header[column].clone(),
            });
        }
        let mut values: Vec<String> = rec.iter().map(str::to_string).collect();
        let class = values.pop().expect("width >= 1");
        rows.push(RawRow { values, class });
    }
    let mut feature_names = header;
    let class_name = feature_names.pop().expect("non-empty header");
    Ok(RawDataset {
        feature_names,
        class_name,
        rows,
    })
}

/// One training example after binarization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Example {
    pub bits: Vec<bool>,
    pub class: usize,
    pub weight: u64,
}

/// Binary features, class indices into `classes`, and multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinDataset {
    pub feature_names: Vec<String>,
    pub class_name: String,
    pub classes: Vec<String>,
    pub examples: Vec<Example>,
}

/// Feature and class labels shared by a dataset and the models learnt on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub features: Vec<String>,
    pub class_name: String,
    pub classes: Vec<String>,
}

impl BinDataset {
    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn total_weight(&self) -> u64 {
        self.examples.iter().map(|e| e.weight).sum()
    }

    pub fn schema(&self) -> Schema {
        Schema {
            features: self.feature_names.clone(),
            class_name: self.class_name.clone(),
            classes: self.classes.clone(),
        }
    }

    /// Same schema, examples chosen by index.
    pub fn subset(&self, indices: &[usize]) -> BinDataset {
        BinDataset {
            examples: indices.iter().map(|&i| self.examples[i].clone()).collect(),
            ..self.without_examples()
        }
    }

    fn without_examples(&self) -> BinDataset {
        BinDataset {
            feature_names: self.feature_names.clone(),
            class_name: self.class_name.clone(),
            classes: self.classes.clone(),
            examples: Vec::new(),
        }
    }

    /// Whether two examples share a feature vector but not a class.
    pub fn has_contradictions(&self) -> bool {
        let mut seen: HashMap<&[bool], usize> = HashMap::new();
        self.examples
            .iter()
            .any(|e| *seen.entry(&e.bits).or_insert(e.class) != e.class)
    }

    /// Rebuilds a 0/1 table from the bits (the inverse of binarizing 0/1 data).
    pub fn to_raw(&self) -> RawDataset {
        let mut rows = Vec::new();
        for e in &self.examples {
            for _ in 0..e.weight {
                rows.push(RawRow {
                    values: e.bits.iter().map(|&b| (b as u8).to_string()).collect(),
                    class: self.classes[e.class].clone(),
                });
            }
        }
        RawDataset {
            feature_names: self.feature_names.clone(),
            class_name: self.class_name.clone(),
            rows,
        }
    }
}

/// How one input column maps to binary features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnEncoding {
    /// A single distinct value: one feature, always 0.
    Constant { name: String },
    /// Numeric 0/1 column: one feature named after the column.
    Boolean { name: String },
    /// Two non-numeric values: one feature, set when the cell equals `one`.
    Binary { name: String, one: String },
    /// Numeric: cut points splitting the range into `cuts.len() + 1` bins.
    /// One cut gives a single "at least" feature; more cuts are one-hot.
    Thresholds { name: String, cuts: Vec<f64> },
    /// Non-numeric with more than two values: one feature per value.
    OneHot { name: String, values: Vec<String> },
}

impl ColumnEncoding {
    fn feature_names(&self) -> Vec<String> {
        match self {
            ColumnEncoding::Constant { name } | ColumnEncoding::Boolean { name } => {
                vec![name.clone()]
            }
            ColumnEncoding::Binary { name, one } => vec![format!("{name}={one}")],
            ColumnEncoding::Thresholds { name, cuts } if cuts.len() == 1 => {
                vec![format!("{name}>={}", cuts[0])]
            }
            ColumnEncoding::Thresholds { name, cuts } => {
                let mut out = vec![format!("{name}<{}", cuts[0])];
                for w in cuts.windows(2) {
                    out.push(format!("{}<={name}<{}", w[0], w[1]));
                }
                out.push(format!("{name}>={}", cuts[cuts.len() - 1]));
                out
            }
            ColumnEncoding::OneHot { name, values } => {
                values.iter().map(|v| format!("{name}={v}")).collect()
            }
        }
    }

    fn encode(&self, cell: &str, out: &mut Vec<bool>) -> Result<(), DatasetError> {
        match self {
            ColumnEncoding::Constant { .. } => out.push(false),
            ColumnEncoding::Binary { one, .. } => out.push(cell == one),
            ColumnEncoding::Boolean { name } => {
                let x = parse_number(cell).ok_or_else(|| DatasetError::NotNumeric {
                    column: name.clone(),
                    value: cell.to_string(),
                })?;
                out.push(x >= 1.0);
            }
            ColumnEncoding::Thresholds { name, cuts } => {
                let x = parse_number(cell).ok_or_else(|| DatasetError::NotNumeric {
                    column: name.clone(),
                    value: cell.to_string(),
                })?;
                let bin = cuts.iter().filter(|&&c| x >= c).count();
                if cuts.len() == 1 {
                    out.push(bin == 1);
                } else {
                    out.extend((0..=cuts.len()).map(|b| b == bin));
                }
            }
            ColumnEncoding::OneHot { values, .. } => {
                out.extend(values.iter().map(|v| v == cell));
            }
        }
        Ok(())
    }
}

fn parse_number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Sorts labels numerically when they all parse as numbers, else lexically.
fn sorted_distinct<'a>(values: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut v: Vec<String> = values.map(str::to_string).collect();
    v.sort();
    v.dedup();
    if v.iter().all(|s| parse_number(s).is_some()) {
        v.sort_by(|a, b| parse_number(a).unwrap().total_cmp(&parse_number(b).unwrap()));
    }
    v
}

/// Equal-frequency cut points for `q` bins. A cut falling on the minimum is
/// moved to the next distinct value so the lowest bin is never empty.
pub fn equal_frequency_cuts(values: &[f64], q: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    if m == 0 {
        return Vec::new();
    }
    let min = sorted[0];
    let above_min = sorted.iter().copied().find(|&x| x > min);
    let mut cuts: Vec<f64> = Vec::new();
    for k in 1..q {
        let pos = (m * k).div_ceil(q);
        if pos >= m {
            continue;
        }
        let cut = if sorted[pos] > min {
            Some(sorted[pos])
        } else {
            above_min
        };
        if let Some(c) = cut {
            if cuts.last() != Some(&c) {
                cuts.push(c);
            }
        }
    }
    cuts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinarizeOptions {
    pub bins: usize,
    pub max_categories: usize,
}

impl Default for BinarizeOptions {
    fn default() -> Self {
        BinarizeOptions {
            bins: 2,
            max_categories: DEFAULT_MAX_CATEGORIES,
        }
    }
}

/// Column encodings fitted on one table, reusable on another with the same
/// columns (e.g. held-out data).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binarizer {
    pub columns: Vec<ColumnEncoding>,
    pub class_name: String,
    pub classes: Vec<String>,
}

impl Binarizer {
    pub fn fit(raw: &RawDataset, opts: BinarizeOptions) -> Result<Binarizer, DatasetError> {
        if !(2..=4).contains(&opts.bins) {
            return Err(DatasetError::InvalidBins(opts.bins));
        }
        let mut columns = Vec::with_capacity(raw.feature_names.len());
        for (c, name) in raw.feature_names.iter().enumerate() {
            let distinct = sorted_distinct(raw.column(c));
            let numeric = distinct.iter().all(|s| parse_number(s).is_some());
            let name = name.clone();
            let enc = match distinct.len() {
                0 | 1 => ColumnEncoding::Constant { name },
                2 if numeric
                    && parse_number(&distinct[0]) == Some(0.0)
                    && parse_number(&distinct[1]) == Some(1.0) =>
                {
                    ColumnEncoding::Boolean { name }
                }
                2 if numeric => ColumnEncoding::Thresholds {
                    name,
                    cuts: vec![parse_number(&distinct[1]).unwrap()],
                },
                2 => ColumnEncoding::Binary {
                    name,
                    one: distinct[1].clone(),
                },
                _ if numeric => {
                    let xs: Vec<f64> = raw.column(c).map(|s| parse_number(s).unwrap()).collect();
                    ColumnEncoding::Thresholds {
                        name,
                        cuts: equal_frequency_cuts(&xs, opts.bins),
                    }
                }
                d if d > opts.max_categories => {
                    return Err(DatasetError::TooManyCategories {
                        column: name,
                        distinct: d,
                        limit: opts.max_categories,
                    })
                }
                _ => ColumnEncoding::OneHot {
                    name,
                    values: distinct,
                },
            };
            columns.push(enc);
        }
        Ok(Binarizer {
            columns,
            class_name: raw.class_name.clone(),
            classes: sorted_distinct(raw.rows.iter().map(|r| r.class.as_str())),
        })
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.columns.iter().flat_map(|c| c.feature_names()).collect()
    }

    pub fn transform(&self, raw: &RawDataset) -> Result<BinDataset, DatasetError> {
        if raw.feature_names.len() != self.columns.len() {
            return Err(DatasetError::ColumnMismatch {
                expected: self.columns.len(),
                got: raw.feature_names.len(),
            });
        }
        let class_index: HashMap<&str, usize> = self
            .classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i))
            .collect();
        let feature_names = self.feature_names();
        let mut examples = Vec::with_capacity(raw.rows.len());
        for row in &raw.rows {
            let mut bits = Vec::with_capacity(feature_names.len());
            for (enc, cell) in self.columns.iter().zip(&row.values) {
                enc.encode(cell, &mut bits)?;
            }
            let class = *class_index
                .get(row.class.as_str())
                .ok_or_else(|| DatasetError::UnknownClass(row.class.clone()))?;
            examples.push(Example {
                bits,
                class,
                weight: 1,
            });
        }
        Ok(BinDataset {
            feature_names,
            class_name: self.class_name.clone(),
            classes: self.classes.clone(),
            examples,
        })
    }
}

/// Quantizes numeric columns into at most `bins` equal-frequency bins and
/// one-hot encodes the rest.
pub fn binarize(raw: &RawDataset, bins: usize) -> Result<BinDataset, DatasetError> {
    binarize_with(
        raw,
        BinarizeOptions {
            bins,
            ..Default::default()
        },
    )
}

pub fn binarize_with(raw: &RawDataset, opts: BinarizeOptions) -> Result<BinDataset, DatasetError> {
    Binarizer::fit(raw, opts)?.transform(raw)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SanitizeMode {
    /// Drop every group of examples sharing features but not the class.
    Perfect,
    /// Keep contradictions; they only cost misclassifications.
    Sparse,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SanitizeReport {
    /// Examples absorbed into an identical earlier example.
    pub merged: u64,
    /// Total weight removed with contradictory groups.
    pub removed: u64,
    pub contradictory_groups: usize,
}

impl SanitizeReport {
    pub fn is_clean(&self) -> bool {
        *self == SanitizeReport::default()
    }
}

/// Merges duplicate examples into weights and, in perfect mode, removes
/// contradictory groups. First-appearance order is kept.
pub fn sanitize(ds: &BinDataset, mode: SanitizeMode) -> (BinDataset, SanitizeReport) {
    let mut report = SanitizeReport::default();
    let mut index: HashMap<(&[bool], usize), usize> = HashMap::new();
    let mut merged: Vec<Example> = Vec::new();
    for e in &ds.examples {
        match index.get(&(e.bits.as_slice(), e.class)) {
            Some(&i) => {
                merged[i].weight += e.weight;
                report.merged += 1;
            }
            None => {
                index.insert((&e.bits, e.class), merged.len());
                merged.push(e.clone());
            }
        }
    }
    if mode == SanitizeMode::Perfect {
        let mut classes_of: HashMap<&[bool], (usize, u64)> = HashMap::new();
        for e in &merged {
            let entry = classes_of.entry(&e.bits).or_insert((0, 0));
            entry.0 += 1;
            entry.1 += e.weight;
        }
        let bad: HashMap<Vec<bool>, u64> = classes_of
            .into_iter()
            .filter(|(_, (n, _))| *n > 1)
            .map(|(b, (_, w))| (b.to_vec(), w))
            .collect();
        report.contradictory_groups = bad.len();
        report.removed = bad.values().sum();
        merged.retain(|e| !bad.contains_key(&e.bits));
    }
    (
        BinDataset {
            examples: merged,
            ..ds.without_examples()
        },
        report,
    )
}

/// Assignment of examples to cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }

    /// (training, held-out) datasets for `fold`.
    pub fn split(&self, ds: &BinDataset, fold: usize) -> (BinDataset, BinDataset) {
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..self.assignments.len()).partition(|&i| self.assignments[i] == fold);
        (ds.subset(&train), ds.subset(&test))
    }
}

/// Stratified k-fold split: each class is shuffled with a seeded generator
/// and dealt round-robin, the fold counter continuing across classes.
pub fn kfold_split(ds: &BinDataset, k: usize, seed: u64) -> Result<FoldPlan, DatasetError> {
    if k < 2 {
        return Err(DatasetError::InvalidFolds(k));
    }
    if ds.len() < k {
        return Err(DatasetError::TooFewExamples {
            examples: ds.len(),
            folds: k,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0; ds.len()];
    let mut next = 0usize;
    for class in 0..ds.classes.len().max(1) {
        let mut members: Vec<usize> = (0..ds.len())
            .filter(|&i| ds.examples[i].class == class)
            .collect();
        members.shuffle(&mut rng);
        for i in members {
            assignments[i] = next % k;
            next += 1;
        }
    }
    Ok(FoldPlan {
        k,
        seed,
        assignments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    use crate::fixtures::EXAMPLE1_CSV;

    #[test]
    fn loads_example_table() {
        let raw = parse_csv_str(EXAMPLE1_CSV).unwrap();
        assert_eq!(raw.feature_names, vec!["L", "C", "E", "S"]);
        assert_eq!(raw.class_name, "H");
        assert_eq!(raw.len(), 8);
        assert_eq!(raw.rows[2].values, vec!["0", "0", "1", "0"]);
        assert_eq!(raw.rows[2].class, "1");
    }

    #[test]
    fn header_only_is_empty() {
        let raw = parse_csv_str("a,b,class\n").unwrap();
        assert!(raw.is_empty());
        assert_eq!(raw.feature_names.len(), 2);
    }

    #[test]
    fn missing_cell_reports_position() {
        match parse_csv_str("a,b,class\n1,0,x\n1,,y\n") {
            Err(DatasetError::MissingValue { row, column, name }) => {
                assert_eq!((row, column, name.as_str()), (2, 2, "b"));
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn ragged_row_is_rejected() {
        assert!(matches!(
            parse_csv_str("a,b,class\n1,0\n"),
            Err(DatasetError::Ragged {
                row: 1,
                expected: 3,
                got: 2
            })
        ));
    }

    #[test]
    fn binary_table_binarizes_to_itself() {
        let raw = parse_csv_str(EXAMPLE1_CSV).unwrap();
        let ds = binarize(&raw, 2).unwrap();
        assert_eq!(ds.num_features(), 4);
        assert_eq!(ds.len(), 8);
        assert_eq!(ds.classes, vec!["0", "1"]);
        for (row, e) in raw.rows.iter().zip(&ds.examples) {
            let expect: Vec<bool> = row.values.iter().map(|v| v == "1").collect();
            assert_eq!(e.bits, expect);
            assert_eq!(e.class, (row.class == "1") as usize);
        }
    }

    #[test]
    fn constant_column_is_all_zero() {
        let raw = parse_csv_str("k,x,c\n7,1,a\n7,0,b\n7,1,a\n").unwrap();
        let ds = binarize(&raw, 3).unwrap();
        assert_eq!(ds.num_features(), 2);
        assert!(ds.examples.iter().all(|e| !e.bits[0]));
    }

    #[test]
    fn median_split_for_two_bins() {
        let mut text = String::from("x,c\n");
        for v in 1..=8 {
            text.push_str(&format!("{v},{}\n", v % 2));
        }
        let ds = binarize(&parse_csv_str(&text).unwrap(), 2).unwrap();
        // Oracle: sort and cut at position ceil(M/2).
        let mut sorted: Vec<i32> = (1..=8).collect();
        sorted.sort();
        let cut = sorted[8usize.div_ceil(2)];
        let expect: Vec<bool> = (1..=8).map(|v| v >= cut).collect();
        let got: Vec<bool> = ds.examples.iter().map(|e| e.bits[0]).collect();
        assert_eq!(got, expect);
        assert_eq!(got, vec![false, false, false, false, true, true, true, true]);
    }

    #[test]
    fn numeric_column_one_hot_for_more_bins() {
        let mut text = String::from("x,c\n");
        for v in 1..=12 {
            text.push_str(&format!("{v},a\n"));
        }
        let ds = binarize(&parse_csv_str(&text).unwrap(), 3).unwrap();
        assert_eq!(ds.num_features(), 3);
        let bins: Vec<usize> = ds
            .examples
            .iter()
            .map(|e| e.bits.iter().position(|&b| b).unwrap())
            .collect();
        assert_eq!(bins, vec![0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2]);
    }

    #[test]
    fn ties_at_the_minimum_keep_two_bins() {
        let cuts = equal_frequency_cuts(&[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 3.0], 2);
        assert_eq!(cuts, vec![2.0]);
    }

    #[test]
    fn categorical_one_hot_and_guard() {
        let raw = parse_csv_str("color,c\nred,0\ngreen,1\nblue,0\n").unwrap();
        let ds = binarize(&raw, 2).unwrap();
        assert_eq!(ds.feature_names, vec!["color=blue", "color=green", "color=red"]);
        assert_eq!(ds.examples[0].bits, vec![false, false, true]);
        let opts = BinarizeOptions {
            bins: 2,
            max_categories: 2,
        };
        assert!(matches!(
            binarize_with(&raw, opts),
            Err(DatasetError::TooManyCategories { distinct: 3, .. })
        ));
        assert!(matches!(binarize(&raw, 5), Err(DatasetError::InvalidBins(5))));
    }

    #[test]
    fn binarizer_applies_to_new_rows() {
        let train = parse_csv_str("x,color,c\n1,red,0\n2,blue,1\n3,green,0\n4,red,1\n").unwrap();
        let b = Binarizer::fit(&train, BinarizeOptions::default()).unwrap();
        let test = parse_csv_str("x,color,c\n10,purple,1\n").unwrap();
        let ds = b.transform(&test).unwrap();
        assert_eq!(ds.examples[0].bits, vec![true, false, false, false]);
        let bad = parse_csv_str("x,color,c\n1,red,9\n").unwrap();
        assert!(matches!(b.transform(&bad), Err(DatasetError::UnknownClass(_))));
    }

    fn example1() -> BinDataset {
        binarize(&parse_csv_str(EXAMPLE1_CSV).unwrap(), 2).unwrap()
    }

    #[test]
    fn sanitize_consistent_data_is_identity() {
        let ds = example1();
        let (out, report) = sanitize(&ds, SanitizeMode::Perfect);
        assert_eq!(out, ds);
        assert!(report.is_clean());
    }

    #[test]
    fn sanitize_merges_duplicates() {
        let mut ds = example1();
        ds.examples.push(ds.examples[2].clone());
        let (out, report) = sanitize(&ds, SanitizeMode::Perfect);
        assert_eq!(out.len(), 8);
        assert_eq!(out.examples[2].weight, 2);
        assert_eq!(report.merged, 1);
        assert_eq!(report.removed, 0);
    }

    #[test]
    fn sanitize_contradictions_by_mode() {
        let raw = parse_csv_str("a,b,c,d,y\n0,1,0,1,0\n0,1,0,1,1\n1,1,1,1,0\n").unwrap();
        let ds = binarize(&raw, 2).unwrap();
        let (perfect, report) = sanitize(&ds, SanitizeMode::Perfect);
        assert_eq!(perfect.len(), 1);
        assert_eq!(report.removed, 2);
        assert_eq!(report.contradictory_groups, 1);
        assert!(!perfect.has_contradictions());
        let (sparse, report) = sanitize(&ds, SanitizeMode::Sparse);
        assert_eq!(sparse.len(), 3);
        assert_eq!(report.removed, 0);
        assert!(sparse.has_contradictions());
    }

    #[test]
    fn folds_for_eight_examples() {
        let ds = example1();
        let plan = kfold_split(&ds, 5, 7).unwrap();
        let mut sizes = plan.fold_sizes();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sizes, vec![2, 2, 2, 1, 1]);
        assert_eq!(kfold_split(&ds, 5, 7).unwrap(), plan);
        assert!(matches!(
            kfold_split(&ds, 9, 7),
            Err(DatasetError::TooFewExamples { .. })
        ));
        assert!(matches!(kfold_split(&ds, 1, 7), Err(DatasetError::InvalidFolds(1))));
    }

    #[test]
    fn folds_are_stratified() {
        let mut text = String::from("a,y\n");
        for i in 0..10 {
            text.push_str(&format!("{},{}\n", i, i % 2));
        }
        let ds = binarize(&parse_csv_str(&text).unwrap(), 2).unwrap();
        for seed in 0..20 {
            let plan = kfold_split(&ds, 5, seed).unwrap();
            // Enumerate per (fold, class) counts.
            let mut counts = [[0usize; 2]; 5];
            for (i, &f) in plan.assignments.iter().enumerate() {
                counts[f][ds.examples[i].class] += 1;
            }
            assert_eq!(counts, [[1, 1]; 5], "seed {seed}");
        }
    }

    fn arb_binary_table() -> impl Strategy<Value = RawDataset> {
        (1usize..5, 0usize..12).prop_flat_map(|(k, m)| {
            prop::collection::vec((prop::collection::vec(any::<bool>(), k), 0u8..3), m).prop_map(
                move |rows| RawDataset {
                    feature_names: (0..k).map(|i| format!("f{i}")).collect(),
                    class_name: "y".into(),
                    rows: rows
                        .into_iter()
                        .map(|(bits, c)| RawRow {
                            values: bits.iter().map(|&b| (b as u8).to_string()).collect(),
                            class: c.to_string(),
                        })
                        .collect(),
                },
            )
        })
    }

    proptest! {
        #[test]
        fn binarize_is_idempotent_on_binary_data(raw in arb_binary_table()) {
            let once = binarize(&raw, 2).unwrap();
            let twice = binarize(&once.to_raw(), 2).unwrap();
            prop_assert_eq!(once.num_features(), raw.feature_names.len());
            prop_assert_eq!(&once.examples, &twice.examples);
            // Columns holding both values keep their bits exactly.
            for c in 0..raw.feature_names.len() {
                let col: Vec<&str> = raw.rows.iter().map(|r| r.values[c].as_str()).collect();
                if col.contains(&"0") && col.contains(&"1") {
                    for (r, e) in raw.rows.iter().zip(&once.examples) {
                        prop_assert_eq!(e.bits[c], r.values[c] == "1");
                    }
                }
            }
        }

        #[test]
        fn sanitize_weight_accounting(raw in arb_binary_table()) {
            let ds = binarize(&raw, 2).unwrap();
            let before = ds.total_weight();
            let (perfect, report) = sanitize(&ds, SanitizeMode::Perfect);
            prop_assert!(!perfect.has_contradictions());
            prop_assert_eq!(perfect.total_weight(), before - report.removed);
            let (sparse, report) = sanitize(&ds, SanitizeMode::Sparse);
            prop_assert_eq!(sparse.total_weight(), before);
            prop_assert_eq!(sparse.len() as u64 + report.merged, ds.len() as u64);
        }

        #[test]
        fn folds_partition_examples(raw in arb_binary_table(), k in 2usize..6, seed in any::<u64>()) {
            let ds = binarize(&raw, 2).unwrap();
            prop_assume!(ds.len() >= k);
            let plan = kfold_split(&ds, k, seed).unwrap();
            prop_assert_eq!(plan.assignments.len(), ds.len());
            let sizes = plan.fold_sizes();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            prop_assert_eq!(sizes.iter().sum::<usize>(), ds.len());
            prop_assert_eq!(kfold_split(&ds, k, seed).unwrap(), plan.clone());
            for f in 0..k {
                let (train, test) = plan.split(&ds, f);
                prop_assert_eq!(train.len() + test.len(), ds.len());
            }
        }
    }
}
