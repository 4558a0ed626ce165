//! Dataset loading, scaling, and splitting.
//!
//! Three sources feed the experiments: two UCI-style delimited text files
//! (a voice-measurement set and a breast-tumor set, both binary) and the
//! handwritten-digit images in IDX format, binarized by digit parity. All
//! of them end up as a [`LabeledDataset`]: feature vectors scaled to [0, 1]
//! with train-only statistics, binary labels, and a frozen train/test index
//! split.

use std::path::Path;

use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};

/// Features and binary labels as loaded, before scaling and splitting.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub features: Vec<DVector<f64>>,
    pub labels: Vec<u8>,
}

/// Picks a column either by header name or by zero-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Name(String),
    Index(usize),
}

/// How to read one delimited dataset file.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub label: ColumnSelector,
    /// Label cell value mapped to class 1; everything else maps to 0.
    pub positive_label: String,
    pub drop: Vec<ColumnSelector>,
    pub has_header: bool,
}

/// Built-in schemas for the two delimited datasets.
///
/// `parkinsons`: header row, `name` column dropped, `status` is the label
/// with positive value "1", leaving 22 numeric features.
/// `wbcd`: no header, column 0 (sample ID) dropped, column 1 is the
/// diagnosis with positive value "M", leaving 30 numeric features.
pub fn dataset_schema(name: &str) -> Option<CsvSchema> {
    match name {
        "parkinsons" => Some(CsvSchema {
            label: ColumnSelector::Name("status".into()),
            positive_label: "1".into(),
            drop: vec![ColumnSelector::Name("name".into())],
            has_header: true,
        }),
        "wbcd" => Some(CsvSchema {
            label: ColumnSelector::Index(1),
            positive_label: "M".into(),
            drop: vec![ColumnSelector::Index(0)],
            has_header: false,
        }),
        _ => None,
    }
}

fn resolve_column(
    selector: &ColumnSelector,
    headers: Option<&csv::StringRecord>,
    width: usize,
) -> Result<usize> {
    match selector {
        ColumnSelector::Index(i) => {
            if *i < width {
                Ok(*i)
            } else {
                Err(Error::Schema(format!(
                    "column index {i} out of range for a {width}-column file"
                )))
            }
        }
        ColumnSelector::Name(name) => {
            let headers = headers.ok_or_else(|| {
                Error::Schema(format!("column '{name}' requested but the file has no header"))
            })?;
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Schema(format!("no column named '{name}'")))
        }
    }
}

/// Loads a delimited text file into features plus binary labels.
///
/// Every column that is neither the label nor dropped must parse as a
/// number; a cell that does not yields a parse error naming its 1-based row
/// (physical line, header included) and column.
pub fn load_csv(
    path: &Path,
    label: &ColumnSelector,
    positive_label: &str,
    drop: &[ColumnSelector],
    has_header: bool,
) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::io(path.display().to_string(), into_io(e)))?;

    let headers = if has_header {
        Some(
            reader
                .headers()
                .map_err(|e| Error::Schema(format!("unreadable header row: {e}")))?
                .clone(),
        )
    } else {
        None
    };

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut label_idx = None;
    let mut keep: Vec<usize> = Vec::new();

    for record in reader.records() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(path.display().to_string(), into_io(e)),
            _ => Error::Schema(format!("malformed delimited row: {e}")),
        })?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(features.len() + 1);

        if label_idx.is_none() {
            let width = record.len();
            let li = resolve_column(label, headers.as_ref(), width)?;
            let mut dropped = vec![false; width];
            dropped[li] = true;
            for d in drop {
                dropped[resolve_column(d, headers.as_ref(), width)?] = true;
            }
            label_idx = Some(li);
            keep = (0..width).filter(|&c| !dropped[c]).collect();
        }
        let li = label_idx.expect("resolved on first record");
        let cell = record.get(li).ok_or_else(|| {
            Error::Schema(format!("row at line {line} is missing the label column"))
        })?;
        labels.push(u8::from(cell == positive_label));

        let mut row = DVector::zeros(keep.len());
        for (out, &c) in keep.iter().enumerate() {
            let cell = record.get(c).ok_or_else(|| {
                Error::Schema(format!("row at line {line} has too few columns"))
            })?;
            row[out] = cell.trim().parse::<f64>().map_err(|_| Error::Parse {
                row: line,
                col: c + 1,
                message: format!("'{cell}' is not a number"),
            })?;
        }
        features.push(row);
    }
    if features.is_empty() {
        return Err(Error::Schema(format!(
            "{} contains no data rows",
            path.display()
        )));
    }
    Ok(RawTable { features, labels })
}

/// Loads a registry dataset (see [`dataset_schema`]) from a file.
pub fn load_named_csv(name: &str, path: &Path) -> Result<RawTable> {
    let schema = dataset_schema(name)
        .ok_or_else(|| Error::InvalidArgument(format!("no built-in schema for '{name}'")))?;
    load_csv(
        path,
        &schema.label,
        &schema.positive_label,
        &schema.drop,
        schema.has_header,
    )
}

fn into_io(e: csv::Error) -> std::io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{other:?}")),
    }
}

fn read_be_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format(format!("{} is truncated", path.display())))
}

/// Loads the IDX image/label pair, binarizes digit labels by parity
/// (odd = 1), and keeps a single random subset of `n_pixels` pixel
/// positions, shared by every image. Pixel values are scaled by 1/255.
///
/// `limit` caps how many images are taken, from the front of the file.
pub fn load_mnist_binary(
    images_path: &Path,
    labels_path: &Path,
    n_pixels: usize,
    limit: Option<usize>,
    rng: &mut impl Rng,
) -> Result<RawTable> {
    let images = std::fs::read(images_path)
        .map_err(|e| Error::io(images_path.display().to_string(), e))?;
    let labels = std::fs::read(labels_path)
        .map_err(|e| Error::io(labels_path.display().to_string(), e))?;

    let image_magic = read_be_u32(&images, 0, images_path)?;
    if image_magic != 0x0000_0803 {
        return Err(Error::Format(format!(
            "{}: expected image magic 0x00000803, found {image_magic:#010x}",
            images_path.display()
        )));
    }
    let label_magic = read_be_u32(&labels, 0, labels_path)?;
    if label_magic != 0x0000_0801 {
        return Err(Error::Format(format!(
            "{}: expected label magic 0x00000801, found {label_magic:#010x}",
            labels_path.display()
        )));
    }
    let count = read_be_u32(&images, 4, images_path)? as usize;
    let rows = read_be_u32(&images, 8, images_path)? as usize;
    let cols = read_be_u32(&images, 12, images_path)? as usize;
    let label_count = read_be_u32(&labels, 4, labels_path)? as usize;
    if label_count != count {
        return Err(Error::Format(format!(
            "{count} images but {label_count} labels"
        )));
    }
    let pixels_per_image = rows * cols;
    if images.len() < 16 + count * pixels_per_image {
        return Err(Error::Format(format!(
            "{} is truncated: {} bytes for {count} {rows}x{cols} images",
            images_path.display(),
            images.len()
        )));
    }
    if labels.len() < 8 + count {
        return Err(Error::Format(format!(
            "{} is truncated",
            labels_path.display()
        )));
    }
    if n_pixels == 0 || n_pixels > pixels_per_image {
        return Err(Error::InvalidArgument(format!(
            "cannot select {n_pixels} pixels from {pixels_per_image}"
        )));
    }

    let positions = rand::seq::index::sample(rng, pixels_per_image, n_pixels).into_vec();
    let take = limit.map_or(count, |l| l.min(count));
    let mut features = Vec::with_capacity(take);
    let mut out_labels = Vec::with_capacity(take);
    for i in 0..take {
        let base = 16 + i * pixels_per_image;
        let image = &images[base..base + pixels_per_image];
        features.push(DVector::from_fn(n_pixels, |k, _| {
            f64::from(image[positions[k]]) / 255.0
        }));
        out_labels.push(labels[8 + i] % 2);
    }
    Ok(RawTable {
        features,
        labels: out_labels,
    })
}

/// Per-feature min/max gathered from training rows only.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingParams {
    pub min: DVector<f64>,
    pub max: DVector<f64>,
}

/// Computes per-feature extrema over the given rows.
pub fn fit_scale(features: &[DVector<f64>]) -> Result<ScalingParams> {
    let first = features
        .first()
        .ok_or_else(|| Error::InvalidArgument("cannot fit scaling on an empty set".into()))?;
    let mut min = first.clone();
    let mut max = first.clone();
    for row in &features[1..] {
        for k in 0..row.len() {
            min[k] = min[k].min(row[k]);
            max[k] = max[k].max(row[k]);
        }
    }
    Ok(ScalingParams { min, max })
}

/// Maps each feature to (x - min) / (max - min), clamped to [0, 1].
/// Features that were constant on the fitting rows map to 0.
pub fn apply_scale(features: &[DVector<f64>], params: &ScalingParams) -> Vec<DVector<f64>> {
    features
        .iter()
        .map(|row| {
            DVector::from_fn(row.len(), |k, _| {
                let span = params.max[k] - params.min[k];
                if span > 0.0 {
                    ((row[k] - params.min[k]) / span).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
        })
        .collect()
}

/// Uniformly random train/test split: a permutation of `0..n` whose first
/// `ceil((1 - test_fraction) * n)` entries are the training rows.
pub fn split(
    n: usize,
    test_fraction: f64,
    rng: &mut impl Rng,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "cannot split {n} samples into two non-empty parts"
        )));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction must lie strictly between 0 and 1, got {test_fraction}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    use rand::seq::SliceRandom;
    order.shuffle(rng);
    // The small epsilon keeps binary rounding of (1 - f) * n from bumping an
    // exact product like 0.7 * 10 over the next integer.
    let raw = ((1.0 - test_fraction) * n as f64 - 1e-9).ceil() as usize;
    let train_count = raw.clamp(1, n - 1);
    let test = order.split_off(train_count);
    Ok((order, test))
}

/// A dataset ready for the pipeline: scaled features, binary labels, and a
/// frozen split.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub name: String,
    pub features: Vec<DVector<f64>>,
    pub labels: Vec<u8>,
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    /// The train-only statistics the features were scaled with.
    pub scaling: ScalingParams,
}

impl LabeledDataset {
    pub fn new(
        name: impl Into<String>,
        features: Vec<DVector<f64>>,
        labels: Vec<u8>,
        train_idx: Vec<usize>,
        test_idx: Vec<usize>,
        scaling: ScalingParams,
    ) -> Result<Self> {
        let n = features.len();
        if n == 0 || labels.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{} feature rows but {} labels",
                n,
                labels.len()
            )));
        }
        let width = features[0].len();
        if width == 0 {
            return Err(Error::InvalidArgument("features are empty".into()));
        }
        for (i, row) in features.iter().enumerate() {
            if row.len() != width {
                return Err(Error::InvalidArgument(format!(
                    "row {i} has {} features, expected {width}",
                    row.len()
                )));
            }
            if row.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(Error::InvalidArgument(format!(
                    "row {i} has features outside [0, 1]; scale before assembling"
                )));
            }
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
        }
        if train_idx.len() + test_idx.len() != n {
            return Err(Error::InvalidArgument(format!(
                "split covers {} rows, dataset has {n}",
                train_idx.len() + test_idx.len()
            )));
        }
        let mut seen = vec![false; n];
        for &i in train_idx.iter().chain(&test_idx) {
            if i >= n || seen[i] {
                return Err(Error::InvalidArgument(
                    "split indices must be a disjoint cover of the dataset".into(),
                ));
            }
            seen[i] = true;
        }
        Ok(LabeledDataset {
            name: name.into(),
            features,
            labels,
            train_idx,
            test_idx,
            scaling,
        })
    }

    /// Splits, fits scaling on the training rows only, scales everything,
    /// and assembles the dataset. This is the one path from raw data to a
    /// pipeline-ready set, so leakage hygiene is structural.
    pub fn prepare(
        name: impl Into<String>,
        raw: RawTable,
        test_fraction: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let (train_idx, test_idx) = split(raw.features.len(), test_fraction, rng)?;
        let train_rows: Vec<DVector<f64>> =
            train_idx.iter().map(|&i| raw.features[i].clone()).collect();
        let scaling = fit_scale(&train_rows)?;
        let features = apply_scale(&raw.features, &scaling);
        LabeledDataset::new(name, features, raw.labels, train_idx, test_idx, scaling)
    }

    pub fn n_samples(&self) -> usize {
        self.features.len()
    }

    pub fn n_features(&self) -> usize {
        self.features[0].len()
    }

    /// Clones out the rows and labels at the given indices.
    pub fn subset(&self, indices: &[usize]) -> (Vec<DVector<f64>>, Vec<u8>) {
        (
            indices.iter().map(|&i| self.features[i].clone()).collect(),
            indices.iter().map(|&i| self.labels[i]).collect(),
        )
    }

    pub fn train_subset(&self) -> (Vec<DVector<f64>>, Vec<u8>) {
        self.subset(&self.train_idx)
    }

    pub fn test_subset(&self) -> (Vec<DVector<f64>>, Vec<u8>) {
        self.subset(&self.test_idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::StreamKey;
    use std::io::Write;

    fn rng(tag: u64) -> rand_chacha::ChaCha12Rng {
        StreamKey::new(tag).with_str("data-tests").rng()
    }

    fn temp_file(content: &[u8]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn scale_maps_extremes_to_unit_interval() {
        let rows = vec![
            DVector::from_vec(vec![2.0, 5.0]),
            DVector::from_vec(vec![4.0, 5.0]),
        ];
        let params = fit_scale(&rows).unwrap();
        let scaled = apply_scale(&rows, &params);
        assert_eq!(scaled[0][0], 0.0);
        assert_eq!(scaled[1][0], 1.0);
        // Constant column maps to zero.
        assert_eq!(scaled[0][1], 0.0);
        assert_eq!(scaled[1][1], 0.0);
    }

    #[test]
    fn scale_clamps_out_of_range_test_values() {
        let train = vec![
            DVector::from_vec(vec![1.0]),
            DVector::from_vec(vec![3.0]),
        ];
        let params = fit_scale(&train).unwrap();
        let test = vec![
            DVector::from_vec(vec![0.0]),
            DVector::from_vec(vec![10.0]),
        ];
        let scaled = apply_scale(&test, &params);
        assert_eq!(scaled[0][0], 0.0);
        assert_eq!(scaled[1][0], 1.0);
    }

    #[test]
    fn split_seventy_thirty() {
        let (train, test) = split(10, 0.3, &mut rng(1)).unwrap();
        assert_eq!(train.len(), 7);
        assert_eq!(test.len(), 3);
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn split_is_deterministic() {
        let a = split(100, 0.3, &mut rng(2)).unwrap();
        let b = split(100, 0.3, &mut rng(2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn split_rejects_degenerate_inputs() {
        assert!(split(1, 0.3, &mut rng(3)).is_err());
        assert!(split(10, 0.0, &mut rng(3)).is_err());
        assert!(split(10, 1.0, &mut rng(3)).is_err());
    }

    #[test]
    fn csv_indexed_schema_reads_features_and_labels() {
        let f = temp_file(b"id1,M,1.5,2.5\nid2,B,3.5,4.5\nid3,M,5.5,6.5\n");
        let table = load_csv(
            f.path(),
            &ColumnSelector::Index(1),
            "M",
            &[ColumnSelector::Index(0)],
            false,
        )
        .unwrap();
        assert_eq!(table.features.len(), 3);
        assert_eq!(table.features[0].len(), 2);
        assert_eq!(table.labels, vec![1, 0, 1]);
        assert_eq!(table.features[1][1], 4.5);
    }

    #[test]
    fn csv_named_schema_drops_and_labels_by_header() {
        let f = temp_file(b"name,f1,status,f2\ns1,0.1,1,7.0\ns2,0.2,0,8.0\n");
        let table = load_csv(
            f.path(),
            &ColumnSelector::Name("status".into()),
            "1",
            &[ColumnSelector::Name("name".into())],
            true,
        )
        .unwrap();
        assert_eq!(table.features.len(), 2);
        assert_eq!(table.features[0].len(), 2);
        assert_eq!(table.labels, vec![1, 0]);
        assert_eq!(table.features[0][1], 7.0);
    }

    #[test]
    fn csv_parse_error_names_the_cell() {
        let f = temp_file(b"id1,M,1.5,2.5\nid2,B,oops,4.5\n");
        let err = load_csv(
            f.path(),
            &ColumnSelector::Index(1),
            "M",
            &[ColumnSelector::Index(0)],
            false,
        )
        .unwrap_err();
        match err {
            Error::Parse { row, col, .. } => {
                assert_eq!(row, 2);
                assert_eq!(col, 3);
            }
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn csv_missing_column_is_schema_error() {
        let f = temp_file(b"a,b\n1,2\n");
        let err = load_csv(
            f.path(),
            &ColumnSelector::Name("status".into()),
            "1",
            &[],
            true,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "got {err}");
    }

    #[test]
    fn wbcd_file_shape_when_present() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/wbcd/wdbc.data");
        if !path.exists() {
            eprintln!("skipping: {} not present", path.display());
            return;
        }
        let table = load_named_csv("wbcd", &path).unwrap();
        assert_eq!(table.features.len(), 569);
        assert_eq!(table.features[0].len(), 30);
        let positives = table.labels.iter().filter(|&&l| l == 1).count();
        assert_eq!(positives, 212);
    }

    #[test]
    fn parkinsons_file_shape_when_present() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/parkinsons/parkinsons.data");
        if !path.exists() {
            eprintln!("skipping: {} not present", path.display());
            return;
        }
        let table = load_named_csv("parkinsons", &path).unwrap();
        assert_eq!(table.features.len(), 195);
        assert_eq!(table.features[0].len(), 22);
    }

    fn tiny_idx_pair(labels: &[u8]) -> (Vec<u8>, Vec<u8>) {
        let count = labels.len();
        let mut images = Vec::new();
        images.extend_from_slice(&0x0000_0803u32.to_be_bytes());
        images.extend_from_slice(&(count as u32).to_be_bytes());
        images.extend_from_slice(&28u32.to_be_bytes());
        images.extend_from_slice(&28u32.to_be_bytes());
        for i in 0..count {
            // Image i is constant at value 51 * i (0 stays all black).
            images.extend(std::iter::repeat(51 * i as u8).take(784));
        }
        let mut lab = Vec::new();
        lab.extend_from_slice(&0x0000_0801u32.to_be_bytes());
        lab.extend_from_slice(&(count as u32).to_be_bytes());
        lab.extend_from_slice(labels);
        (images, lab)
    }

    #[test]
    fn mnist_loader_parses_parity_and_scales() {
        let (images, labels) = tiny_idx_pair(&[7, 4, 1]);
        let fi = temp_file(&images);
        let fl = temp_file(&labels);
        let table =
            load_mnist_binary(fi.path(), fl.path(), 100, None, &mut rng(4)).unwrap();
        assert_eq!(table.features.len(), 3);
        assert_eq!(table.features[0].len(), 100);
        assert_eq!(table.labels, vec![1, 0, 1]);
        assert!(table.features[0].iter().all(|&v| v == 0.0));
        assert!(table.features[1].iter().all(|&v| (v - 51.0 / 255.0).abs() < 1e-15));
    }

    #[test]
    fn mnist_pixel_selection_is_shared_and_seeded() {
        let (images, labels) = tiny_idx_pair(&[0, 1]);
        let fi = temp_file(&images);
        let fl = temp_file(&labels);
        let a = load_mnist_binary(fi.path(), fl.path(), 50, None, &mut rng(5)).unwrap();
        let b = load_mnist_binary(fi.path(), fl.path(), 50, None, &mut rng(5)).unwrap();
        for (ra, rb) in a.features.iter().zip(&b.features) {
            assert_eq!(ra, rb);
        }
    }

    #[test]
    fn mnist_loader_honors_limit() {
        let (images, labels) = tiny_idx_pair(&[1, 2, 3, 4]);
        let fi = temp_file(&images);
        let fl = temp_file(&labels);
        let table =
            load_mnist_binary(fi.path(), fl.path(), 10, Some(2), &mut rng(6)).unwrap();
        assert_eq!(table.features.len(), 2);
        assert_eq!(table.labels, vec![1, 0]);
    }

    #[test]
    fn mnist_loader_rejects_bad_magic_and_truncation() {
        let (mut images, labels) = tiny_idx_pair(&[1]);
        let fl = temp_file(&labels);
        images[3] = 0x99;
        let fi = temp_file(&images);
        assert!(matches!(
            load_mnist_binary(fi.path(), fl.path(), 10, None, &mut rng(7)),
            Err(Error::Format(_))
        ));

        let (images, labels) = tiny_idx_pair(&[1]);
        let truncated = &images[..images.len() - 100];
        let fi = temp_file(truncated);
        let fl = temp_file(&labels);
        assert!(matches!(
            load_mnist_binary(fi.path(), fl.path(), 10, None, &mut rng(8)),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn prepare_fits_scaling_on_train_rows_only() {
        let raw = RawTable {
            features: (0..20)
                .map(|i| DVector::from_vec(vec![i as f64, (i * i) as f64]))
                .collect(),
            labels: (0..20).map(|i| (i % 2) as u8).collect(),
        };
        let ds = LabeledDataset::prepare("toy", raw.clone(), 0.3, &mut rng(9)).unwrap();
        assert_eq!(ds.train_idx.len(), 14);
        assert_eq!(ds.test_idx.len(), 6);
        assert!(ds
            .features
            .iter()
            .all(|r| r.iter().all(|&v| (0.0..=1.0).contains(&v))));
        // Refitting on the train rows alone reproduces the stored params.
        let train_rows: Vec<_> = ds.train_idx.iter().map(|&i| raw.features[i].clone()).collect();
        let refit = fit_scale(&train_rows).unwrap();
        assert_eq!(refit, ds.scaling);
    }

    #[test]
    fn dataset_construction_rejects_invariant_violations() {
        let scaling = ScalingParams {
            min: DVector::zeros(1),
            max: DVector::from_element(1, 1.0),
        };
        let rows = vec![
            DVector::from_vec(vec![0.5]),
            DVector::from_vec(vec![0.7]),
        ];
        // Overlapping split.
        assert!(LabeledDataset::new(
            "x",
            rows.clone(),
            vec![0, 1],
            vec![0, 1],
            vec![1],
            scaling.clone()
        )
        .is_err());
        // Label outside {0, 1}.
        assert!(LabeledDataset::new(
            "x",
            rows.clone(),
            vec![0, 2],
            vec![0],
            vec![1],
            scaling.clone()
        )
        .is_err());
        // Unscaled feature.
        assert!(LabeledDataset::new(
            "x",
            vec![DVector::from_vec(vec![1.5]), rows[1].clone()],
            vec![0, 1],
            vec![0],
            vec![1],
            scaling
        )
        .is_err());
    }
}
