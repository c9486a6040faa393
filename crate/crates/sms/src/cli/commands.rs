use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::{Result, SmsError};
use crate::marching::{
    build_dataset, build_dataset_with_ranges, cascade_predict, export_series, one_step_eval,
    write_dataset_cache, ErrorSeries, Mode, Regime,
};
use crate::reference_solvers::Trajectory;
use crate::snn_core::{load_checkpoint, save_checkpoint, train, Network, NetworkShape};
use crate::spike_codec::{encoding_error, EncoderKind, NormRange, RangeSet};

use super::config::ExperimentConfig;
use super::manifest::RunManifest;
use super::presets::all_presets;

/// Spike-train length used for the lower-triangular row of the encoding
/// benchmark. At 50 steps the round-trip error of the reference signal is
/// 2.19e-5.
pub const BENCH_LT_STEPS: usize = 50;
/// Spike-train length for the rate rows; 16 steps puts the stochastic error
/// around 4.5e-3 for every seed.
pub const BENCH_RATE_STEPS: usize = 16;
pub const BENCH_RATE_SEEDS: u64 = 10;

/// Benchmark reference signal: a Gaussian bump exp(-((x-1/2)/0.1)^2/2)
/// sampled at dx = 0.01 on [0,1].
pub fn bench_reference_signal() -> Vec<f64> {
    (0..=100)
        .map(|i| {
            let x = i as f64 * 0.01;
            (-0.5 * ((x - 0.5) / 0.1).powi(2)).exp()
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub encoder: &'static str,
    pub steps: usize,
    pub seed: Option<u64>,
    pub l2: f64,
    pub rel_l2: f64,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn rate_l2s(&self) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.encoder == "rate")
            .map(|r| r.l2)
            .collect()
    }

    pub fn l2_of(&self, encoder: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.encoder == encoder).map(|r| r.l2)
    }
}

/// Round-trip encoding error of the reference signal for all three codecs,
/// the rate codec over several seeds. Writes `encoding_errors.csv`.
pub fn cmd_bench_encoding(out_dir: &Path) -> Result<BenchReport> {
    let t0 = Instant::now();
    std::fs::create_dir_all(out_dir)?;
    let signal = bench_reference_signal();
    let unit = RangeSet::Shared(NormRange::new(0.0, 1.0).unwrap());
    let mut rows = Vec::new();
    let e = encoding_error(&signal, EncoderKind::LowerTriangular, BENCH_LT_STEPS, &unit);
    rows.push(BenchRow {
        encoder: "lower_triangular",
        steps: BENCH_LT_STEPS,
        seed: None,
        l2: e.l2,
        rel_l2: e.rel_l2,
    });
    for seed in 0..BENCH_RATE_SEEDS {
        let e = encoding_error(&signal, EncoderKind::Rate { seed }, BENCH_RATE_STEPS, &unit);
        rows.push(BenchRow {
            encoder: "rate",
            steps: BENCH_RATE_STEPS,
            seed: Some(seed),
            l2: e.l2,
            rel_l2: e.rel_l2,
        });
    }
    let e = encoding_error(&signal, EncoderKind::Float32, 32, &unit);
    rows.push(BenchRow { encoder: "float32", steps: 32, seed: None, l2: e.l2, rel_l2: e.rel_l2 });

    let mut csv = String::from("encoder,steps,seed,l2,rel_l2\n");
    for r in &rows {
        let seed = r.seed.map_or(String::new(), |s| s.to_string());
        writeln!(csv, "{},{},{},{},{}", r.encoder, r.steps, seed, r.l2, r.rel_l2).unwrap();
    }
    let csv_path = out_dir.join("encoding_errors.csv");
    std::fs::write(&csv_path, csv)?;

    println!("encoder          steps  L2           relative L2");
    for r in &rows {
        println!("{:16} {:5}  {:.4e}   {:.4e}", r.encoder, r.steps, r.l2, r.rel_l2);
    }

    let mut manifest = RunManifest::new("bench-encoding".into(), 0);
    manifest.files.push(csv_path);
    manifest.wall_clock_secs = t0.elapsed().as_secs_f64();
    manifest.write(&out_dir.join("manifest_bench_encoding.txt"))?;
    Ok(BenchReport { rows })
}

pub fn reference_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir.join("reference.traj")
}

pub fn subsampled_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir.join("subsampled.traj")
}

pub fn checkpoint_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir.join(format!("{}.ckpt", cfg.name))
}

/// Generate and write the reference and subsampled trajectories.
pub fn cmd_gen_data(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let t0 = Instant::now();
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let reference = cfg.solve_reference()?;
    if !reference.is_finite() {
        return Err(SmsError::NonFinite("reference trajectory".into()));
    }
    let sub = crate::reference_solvers::subsample(&reference, cfg.march.subsample)?;
    let ref_path = reference_path(cfg);
    let sub_path = subsampled_path(cfg);
    reference.write(&ref_path)?;
    sub.write(&sub_path)?;
    let mut manifest = RunManifest::new(cfg.hash_hex(), cfg.train.seed);
    manifest.files = vec![ref_path.clone(), sub_path.clone()];
    manifest.wall_clock_secs = t0.elapsed().as_secs_f64();
    manifest.write(&cfg.out_dir.join("manifest_gen_data.txt"))?;
    Ok(vec![ref_path, sub_path])
}

pub struct TrainOutcome {
    pub checkpoint: PathBuf,
    pub history: Vec<f64>,
}

/// Build the window dataset from the generated reference trajectory, train
/// the network, and write checkpoint, loss history and dataset cache.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<TrainOutcome> {
    let t0 = Instant::now();
    cfg.validate()?;
    let ref_path = reference_path(cfg);
    if !ref_path.exists() {
        return Err(SmsError::InvalidConfig(format!(
            "missing {}; run gen-data first",
            ref_path.display()
        )));
    }
    let reference = Trajectory::read(&ref_path)?;
    let built = build_dataset(&reference, &cfg.march)?;
    let d = built.state_dim();
    let steps = cfg.march.effective_steps();
    let shape = NetworkShape { steps, n_in: cfg.march.window * d, n_out: cfg.march.window * d };
    let mut net = Network::init(shape, cfg.n_hidden, cfg.lif, cfg.train.seed);
    net.final_relu = cfg.final_relu;
    let history = train(&mut net, &built.train.inputs, &built.train.targets, &cfg.train)?;

    let ckpt_path = checkpoint_path(cfg);
    save_checkpoint(&ckpt_path, &net, &built.window_ranges)?;
    let mut csv = String::from("epoch,loss\n");
    for (i, loss) in history.iter().enumerate() {
        writeln!(csv, "{i},{loss}").unwrap();
    }
    let loss_path = cfg.out_dir.join("loss_history.csv");
    std::fs::write(&loss_path, csv)?;
    let cache_traj = cfg.out_dir.join("dataset.traj");
    let cache_sidecar = cfg.out_dir.join("dataset.json");
    write_dataset_cache(&cache_traj, &cache_sidecar, &built, &cfg.march)?;

    let mut manifest = RunManifest::new(cfg.hash_hex(), cfg.train.seed);
    manifest.files = vec![ckpt_path.clone(), loss_path, cache_traj, cache_sidecar];
    manifest.wall_clock_secs = t0.elapsed().as_secs_f64();
    manifest.write(&cfg.out_dir.join("manifest_train.txt"))?;
    Ok(TrainOutcome { checkpoint: ckpt_path, history })
}

pub struct EvalOutcome {
    pub one_step: ErrorSeries,
    pub cascade: ErrorSeries,
    pub files: Vec<PathBuf>,
}

/// Load a checkpoint, rebuild the dataset with the checkpoint's ranges, and
/// write one-step and cascade error series plus the decoded rollout.
pub fn cmd_evaluate(cfg: &ExperimentConfig, ckpt: &Path) -> Result<EvalOutcome> {
    let t0 = Instant::now();
    cfg.validate()?;
    let (net, window_ranges) = load_checkpoint(ckpt)?;
    let reference = Trajectory::read(&reference_path(cfg))?;
    let d = reference.n_cols();
    let p = cfg.march.window;
    let steps = cfg.march.effective_steps();
    if net.shape.steps != steps || net.shape.n_in != p * d || net.shape.n_out != p * d {
        return Err(SmsError::ShapeMismatch(format!(
            "checkpoint {}x{}->{} vs config steps={} channels={}",
            net.shape.steps,
            net.shape.n_in,
            net.shape.n_out,
            steps,
            p * d
        )));
    }
    // Per-state-component ranges are the window table folded back to one
    // window block.
    let base_ranges = match &window_ranges {
        RangeSet::Shared(r) => RangeSet::Shared(*r),
        RangeSet::PerChannel(rs) => {
            if rs.len() != p * d {
                return Err(SmsError::ShapeMismatch(format!(
                    "checkpoint range table has {} entries, expected {}",
                    rs.len(),
                    p * d
                )));
            }
            RangeSet::PerChannel(rs[..d].to_vec())
        }
    };
    let built = build_dataset_with_ranges(&reference, &cfg.march, base_ranges)?;

    let one_step = one_step_eval(&net, &built, &cfg.march)?;
    let initial = built.train.inputs[0].clone();
    let n_steps = built.sub.n_rows() - p;
    let (rollout, cascade) = cascade_predict(&net, &initial, n_steps, &built, &cfg.march)?;

    let one_step_path = cfg.out_dir.join("one_step.csv");
    let cascade_path = cfg.out_dir.join("cascade.csv");
    let rollout_path = cfg.out_dir.join("cascade_trajectory.traj");
    export_series(&one_step, &one_step_path)?;
    export_series(&cascade, &cascade_path)?;
    rollout.write(&rollout_path)?;

    let mut summary = String::new();
    for (name, series) in [("one_step", &one_step), ("cascade", &cascade)] {
        for regime in [Regime::Interpolation, Regime::Extrapolation] {
            let mode = if name == "one_step" { Mode::OneStep } else { Mode::Cascade };
            let mean = series.mean_error(mode, regime);
            let max = series.max_error(mode, regime);
            writeln!(
                summary,
                "{} {}: mean={:?} max={:?}",
                name,
                regime.name(),
                mean,
                max
            )
            .unwrap();
        }
        if let Some(step) = series.diverged_from {
            writeln!(summary, "{name} diverged from step {step}").unwrap();
        }
    }
    let summary_path = cfg.out_dir.join("summary.txt");
    std::fs::write(&summary_path, summary)?;

    let files = vec![one_step_path, cascade_path, rollout_path, summary_path];
    let mut manifest = RunManifest::new(cfg.hash_hex(), cfg.train.seed);
    manifest.files = files.clone();
    manifest.wall_clock_secs = t0.elapsed().as_secs_f64();
    manifest.write(&cfg.out_dir.join("manifest_evaluate.txt"))?;
    Ok(EvalOutcome { one_step, cascade, files })
}

/// Print the built-in presets with their parameter values.
pub fn cmd_presets() -> String {
    let mut s = String::new();
    for cfg in all_presets() {
        writeln!(s, "preset {}", cfg.name).unwrap();
        for line in cfg.to_text().lines() {
            if line.is_empty() {
                continue;
            }
            writeln!(s, "  {line}").unwrap();
        }
        writeln!(s).unwrap();
    }
    s
}
