//! Sweep execution: expand config axes into records and compute each one.
//!
//! Every random quantity in a record is drawn from a substream keyed by
//! (seed, purpose, dataset, n_r), so any record is a pure function of its
//! own sweep coordinates: running a one-point config produces the identical
//! row that a full sweep produces at that point. The variant and the Ricean
//! factor are deliberately left out of the keys; paired records then share
//! channel, bias, initialization, and noise draws, and differ only through
//! the quantity under study.
//!
//! Dataset preparation happens up front for every (dataset, seed) pair:
//! missing files abort the run before any computation, and the prepared
//! sets are shared read-only by the workers. Per-record failures after that
//! point land in the record's error column without stopping the sweep.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;

use airelm_core::channel::{
    sample_cascade_channels, sample_rayleigh, sample_ricean, ChannelRealization, RiceanParams,
};
use airelm_core::data::{load_mnist_binary, load_named_csv, LabeledDataset, RawTable};
use airelm_core::frontend::sample_bias;
use airelm_core::pipeline::{empirical_input_rms, evaluate, train, SystemConfig, Variant};
use airelm_core::seed::StreamKey;
use airelm_core::{Error, Result};

use crate::config::{DatasetSpec, ExperimentConfig};

/// One output row. Fields are declared in column order; `error` is empty on
/// success and holds the failure message otherwise, with the numeric fields
/// zeroed.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub dataset: String,
    pub variant: String,
    pub n_r: usize,
    pub ricean_k: Option<f64>,
    pub snr_db: f64,
    pub seed: u64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub train_ls_error: f64,
    pub pgd_final_objective: f64,
    pub pgd_iters: usize,
    pub wallclock_ms: u64,
    pub error: String,
}

/// One point of the sweep cross product.
struct RecordSpec {
    dataset_idx: usize,
    variant: Variant,
    n_r: usize,
    ricean_k: Option<f64>,
    seed: u64,
}

fn resolve(root: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        root.join(path)
    }
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::io(
            path.display().to_string(),
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset file not found"),
        ))
    }
}

/// Loads and prepares one dataset for one seed. The pixel subsampling and
/// the split are keyed only by (seed, dataset), so every sweep point at
/// this coordinate sees the same prepared data.
fn prepare_dataset(
    ds: &DatasetSpec,
    root: &Path,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<LabeledDataset> {
    let raw: RawTable = if ds.name == "mnist" {
        let images = resolve(root, ds.images.as_ref().expect("validated"));
        let labels = resolve(root, ds.labels.as_ref().expect("validated"));
        let limit = (config.mnist_limit > 0).then_some(config.mnist_limit);
        let mut pixel_rng = StreamKey::new(seed)
            .with_str("pixels")
            .with_str(&ds.name)
            .rng();
        load_mnist_binary(&images, &labels, config.mnist_pixels, limit, &mut pixel_rng)?
    } else {
        let path = resolve(root, ds.path.as_ref().expect("validated"));
        load_named_csv(&ds.name, &path)?
    };
    let mut split_rng = StreamKey::new(seed)
        .with_str("split")
        .with_str(&ds.name)
        .rng();
    LabeledDataset::prepare(&*ds.name, raw, config.test_fraction, &mut split_rng)
}

/// LoS angles for one record: configured values win, otherwise both are
/// drawn (always in the same order, so pinning one angle does not move the
/// other).
fn resolve_angles(config: &ExperimentConfig, key: StreamKey) -> (f64, f64) {
    let mut rng = key.rng();
    let tau = std::f64::consts::TAU;
    let drawn_aod = rng.gen::<f64>() * tau;
    let drawn_aoa = rng.gen::<f64>() * tau;
    (
        config.aod.unwrap_or(drawn_aod),
        config.aoa.unwrap_or(drawn_aoa),
    )
}

struct PointMetrics {
    train_accuracy: f64,
    test_accuracy: f64,
    train_ls_error: f64,
    pgd_final_objective: f64,
    pgd_iters: usize,
}

fn run_point(
    spec: &RecordSpec,
    config: &ExperimentConfig,
    data: &LabeledDataset,
) -> Result<PointMetrics> {
    let name = &config.datasets[spec.dataset_idx].name;
    let n_r = spec.n_r;
    let n_t = data.n_features();
    let key = |purpose: &str| {
        StreamKey::new(spec.seed)
            .with_str(purpose)
            .with_str(name)
            .with_u64(n_r as u64)
    };

    let h = match spec.ricean_k {
        Some(k) if k > 0.0 => {
            let (aod, aoa) = resolve_angles(config, key("angles"));
            let params = RiceanParams {
                k_factor: k,
                aod,
                aoa,
            };
            sample_ricean(n_r, n_t, config.pathloss_db, params, &mut key("channels").rng())?
        }
        // K = 0 and the Rayleigh axis are the same channel law; both take
        // the same draws from the same substream, so their rows agree.
        _ => sample_rayleigh(n_r, n_t, config.pathloss_db, &mut key("channels").rng())?,
    };

    let (layers, terminal) = if spec.variant == Variant::OtaWeights {
        let sizes = vec![config.layer_size; config.layers];
        sample_cascade_channels(
            &sizes,
            n_r,
            config.intra_pathloss_db,
            &mut key("cascade").rng(),
        )?
    } else {
        (Vec::new(), DVector::zeros(0))
    };
    let channels = ChannelRealization::new(
        h,
        layers,
        terminal,
        config.pathloss_db,
        config.intra_pathloss_db,
    )?;

    // The threshold draw is anchored to the realized input scale so the
    // dead zone stays commensurate with the envelopes it gates, at any
    // pathloss or array size.
    let (train_inputs, _) = data.train_subset();
    let rms = empirical_input_rms(&train_inputs, &channels.h, &DVector::zeros(n_t))?;
    let bias = sample_bias(
        n_r,
        rms * 2.0 * (n_r * n_t) as f64,
        n_t,
        &mut key("bias").rng(),
    )?;

    let system = SystemConfig {
        variant: spec.variant,
        ridge: config.ridge,
        encoding: config.encoding.to_core(),
        activation: config.activation.to_core(),
        snr_db: Some(config.snr_db),
        pgd: config.pgd.to_options(),
        tx_phases: None,
    };
    let model = train(data, channels, bias, &system, &mut key("pgd").rng())?;
    let report = evaluate(data, &model, key("noise"))?;

    Ok(PointMetrics {
        train_accuracy: report.train_accuracy,
        test_accuracy: report.test_accuracy,
        train_ls_error: model.train_ls_error,
        pgd_final_objective: model
            .pgd_trace
            .as_ref()
            .map_or(0.0, |t| t.final_objective),
        pgd_iters: model.pgd_trace.as_ref().map_or(0, |t| t.iters_run),
    })
}

fn compute_record(
    spec: &RecordSpec,
    config: &ExperimentConfig,
    data: &LabeledDataset,
) -> ExperimentRecord {
    let started = Instant::now();
    let outcome = run_point(spec, config, data);
    let wallclock_ms = if config.record_timing {
        started.elapsed().as_millis() as u64
    } else {
        0
    };
    let mut record = ExperimentRecord {
        dataset: config.datasets[spec.dataset_idx].name.clone(),
        variant: match spec.variant {
            Variant::IdealWeights => "ideal".to_string(),
            Variant::OtaWeights => "ota".to_string(),
        },
        n_r: spec.n_r,
        ricean_k: spec.ricean_k,
        snr_db: config.snr_db,
        seed: spec.seed,
        train_accuracy: 0.0,
        test_accuracy: 0.0,
        train_ls_error: 0.0,
        pgd_final_objective: 0.0,
        pgd_iters: 0,
        wallclock_ms,
        error: String::new(),
    };
    match outcome {
        Ok(m) => {
            record.train_accuracy = m.train_accuracy;
            record.test_accuracy = m.test_accuracy;
            record.train_ls_error = m.train_ls_error;
            record.pgd_final_objective = m.pgd_final_objective;
            record.pgd_iters = m.pgd_iters;
        }
        Err(e) => record.error = e.to_string(),
    }
    record
}

/// Runs the full sweep. Relative dataset paths resolve against `data_root`.
///
/// Records come back in sweep order: datasets, then variants, then n_r,
/// then Ricean factors, then seeds, with the innermost axis fastest.
pub fn run(config: &ExperimentConfig, data_root: &Path) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;

    for ds in &config.datasets {
        for path in [&ds.path, &ds.images, &ds.labels].into_iter().flatten() {
            require_file(&resolve(data_root, path))?;
        }
    }

    let mut prepared: HashMap<(usize, u64), Arc<LabeledDataset>> = HashMap::new();
    for (idx, ds) in config.datasets.iter().enumerate() {
        for &seed in &config.seeds {
            let data = prepare_dataset(ds, data_root, config, seed)?;
            prepared.insert((idx, seed), Arc::new(data));
        }
    }

    let k_axis: Vec<Option<f64>> = match &config.ricean_k {
        None => vec![None],
        Some(ks) => ks.iter().copied().map(Some).collect(),
    };
    let mut specs = Vec::with_capacity(config.record_count());
    for dataset_idx in 0..config.datasets.len() {
        for variant in &config.variants {
            for &n_r in &config.n_r {
                for &ricean_k in &k_axis {
                    for &seed in &config.seeds {
                        specs.push(RecordSpec {
                            dataset_idx,
                            variant: variant.to_core(),
                            n_r,
                            ricean_k,
                            seed,
                        });
                    }
                }
            }
        }
    }

    let total = specs.len();
    let compute = |(i, spec): (usize, &RecordSpec)| {
        let data = &prepared[&(spec.dataset_idx, spec.seed)];
        let record = compute_record(spec, config, data);
        let status = if record.error.is_empty() {
            format!("test_acc={:.4}", record.test_accuracy)
        } else {
            format!("error: {}", record.error)
        };
        eprintln!(
            "[{}/{total}] {} {} n_r={} k={} seed={}: {status}",
            i + 1,
            record.dataset,
            record.variant,
            record.n_r,
            record
                .ricean_k
                .map_or_else(|| "rayleigh".to_string(), |k| k.to_string()),
            record.seed,
        );
        record
    };

    let records = if config.workers == 1 {
        specs.iter().enumerate().map(compute).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
        pool.install(|| specs.par_iter().enumerate().map(compute).collect())
    };
    Ok(records)
}
