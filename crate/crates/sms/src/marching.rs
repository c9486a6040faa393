//! Window dataset construction and evaluation of the trained network as an
//! explicit marching scheme.
//!
//! The network maps the encoded window [u^{n-p+1} .. u^n] to the shifted
//! window [u^{n-p+2} .. u^{n+1}]; the prediction for the next step is the
//! last block of the output window. Consecutive samples therefore satisfy
//! target(n) = input(n+1) bit-exactly, and the cascade rollout is a pure
//! feedback loop in the spike domain.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SmsError};
use crate::reference_solvers::{subsample, Trajectory};
use crate::snn_core::{binarize, Network};
use crate::spike_codec::{self, EncoderKind, NormRange, RangeSet, SpikeTrain, FLOAT32_STEPS};

/// Decoded values with magnitude beyond this many range spans mark the
/// cascade as diverged.
const DIVERGENCE_SPANS: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarchConfig {
    /// Number of past steps fed as input (p), 1 or 2.
    pub window: usize,
    /// Temporal subsampling factor (m).
    pub subsample: usize,
    /// Subsampled step index separating interpolation from extrapolation.
    pub train_split: usize,
    pub encoder: EncoderKind,
    /// Spike train length (#T); forced to 32 for the float32 codec.
    pub steps: usize,
    /// One range per state component instead of one shared range.
    pub per_channel_ranges: bool,
    /// Fraction of the span added to each side of the training range.
    pub range_margin: f64,
}

impl MarchConfig {
    pub fn effective_steps(&self) -> usize {
        match self.encoder {
            EncoderKind::Float32 => FLOAT32_STEPS,
            _ => self.steps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window == 1 || self.window == 2) {
            return Err(SmsError::InvalidConfig(format!(
                "window must be 1 or 2, got {}",
                self.window
            )));
        }
        if self.subsample < 1 {
            return Err(SmsError::InvalidConfig("subsample must be >= 1".into()));
        }
        if self.steps < 1 {
            return Err(SmsError::InvalidConfig("steps must be >= 1".into()));
        }
        if self.range_margin < 0.0 {
            return Err(SmsError::InvalidConfig("range_margin must be >= 0".into()));
        }
        Ok(())
    }
}

/// Paired (input window, target window) spike trains, plus the subsampled
/// step index each sample predicts.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowDataset {
    pub inputs: Vec<SpikeTrain>,
    pub targets: Vec<SpikeTrain>,
    pub predicted_step: Vec<usize>,
}

impl WindowDataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Everything produced by `build_dataset`.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltDataset {
    pub train: WindowDataset,
    pub test: WindowDataset,
    /// One range per state component, or one shared range.
    pub base_ranges: RangeSet,
    /// Ranges for a full window (base repeated `window` times).
    pub window_ranges: RangeSet,
    /// The subsampled trajectory the windows were cut from.
    pub sub: Trajectory,
    /// Normalized values outside [0,1] across all rows (test rows may clamp).
    pub clamp_count: usize,
    /// Channels whose training range was degenerate and widened artificially.
    pub degenerate_channels: usize,
}

impl BuiltDataset {
    pub fn state_dim(&self) -> usize {
        self.sub.n_cols()
    }

    /// Mean squared quantization error floor of the encoder,
    /// mean over components of ((hi-lo)/(2 #T))^2.
    pub fn quantization_floor(&self, steps: usize) -> f64 {
        match &self.base_ranges {
            RangeSet::Shared(r) => (r.span() / (2.0 * steps as f64)).powi(2),
            RangeSet::PerChannel(rs) => {
                rs.iter()
                    .map(|r| (r.span() / (2.0 * steps as f64)).powi(2))
                    .sum::<f64>()
                    / rs.len() as f64
            }
        }
    }
}

fn row_encoder(kind: EncoderKind, row: usize) -> EncoderKind {
    match kind {
        // Each trajectory row gets its own deterministic stream so that
        // re-encoding the same row always yields identical bits.
        EncoderKind::Rate { seed } => EncoderKind::Rate { seed: seed.wrapping_add(row as u64) },
        other => other,
    }
}

/// Subsample the trajectory, derive normalization ranges from the training
/// portion (widened by the margin), encode every step once, and assemble
/// shifted-window samples split at `train_split`.
pub fn build_dataset(traj: &Trajectory, cfg: &MarchConfig) -> Result<BuiltDataset> {
    build_dataset_impl(traj, cfg, None)
}

/// Same as `build_dataset` but encoding with previously computed ranges
/// (e.g. the ones stored in a checkpoint) instead of re-deriving them.
pub fn build_dataset_with_ranges(
    traj: &Trajectory,
    cfg: &MarchConfig,
    ranges: RangeSet,
) -> Result<BuiltDataset> {
    build_dataset_impl(traj, cfg, Some(ranges))
}

fn build_dataset_impl(
    traj: &Trajectory,
    cfg: &MarchConfig,
    fixed_ranges: Option<RangeSet>,
) -> Result<BuiltDataset> {
    cfg.validate()?;
    let sub = subsample(traj, cfg.subsample)?;
    let p = cfg.window;
    let n_rows = sub.n_rows();
    let d = sub.n_cols();
    if n_rows < p + 1 {
        return Err(SmsError::TrajectoryTooShort(format!(
            "{n_rows} subsampled rows, need at least {}",
            p + 1
        )));
    }
    if cfg.train_split == 0 || cfg.train_split >= n_rows {
        return Err(SmsError::InvalidConfig(format!(
            "train_split {} out of range (1..{})",
            cfg.train_split,
            n_rows - 1
        )));
    }

    // Ranges from the training rows only.
    let train_rows = &sub.rows[..=cfg.train_split];
    let mut degenerate = 0;
    let mut widen = |lo: f64, hi: f64| -> Result<NormRange> {
        if hi - lo < 1e-12 {
            degenerate += 1;
            eprintln!("warning: degenerate range [{lo},{hi}], widening artificially");
            return NormRange::new(lo - 0.5, hi + 0.5);
        }
        let margin = cfg.range_margin * (hi - lo);
        NormRange::new(lo - margin, hi + margin)
    };
    let base_ranges = match fixed_ranges {
        Some(r) => r,
        None if cfg.per_channel_ranges => {
            let mut rs = Vec::with_capacity(d);
            for c in 0..d {
                let lo = train_rows.iter().map(|r| r[c]).fold(f64::INFINITY, f64::min);
                let hi = train_rows.iter().map(|r| r[c]).fold(f64::NEG_INFINITY, f64::max);
                rs.push(widen(lo, hi)?);
            }
            RangeSet::PerChannel(rs)
        }
        None => {
            let lo = train_rows.iter().flatten().fold(f64::INFINITY, |a, &v| a.min(v));
            let hi = train_rows.iter().flatten().fold(f64::NEG_INFINITY, |a, &v| a.max(v));
            RangeSet::Shared(widen(lo, hi)?)
        }
    };
    let window_ranges = match &base_ranges {
        RangeSet::Shared(r) => RangeSet::Shared(*r),
        RangeSet::PerChannel(rs) => {
            let mut out = Vec::with_capacity(p * d);
            for _ in 0..p {
                out.extend_from_slice(rs);
            }
            RangeSet::PerChannel(out)
        }
    };

    let steps = cfg.effective_steps();
    let mut clamp_count = 0;
    let row_trains: Vec<SpikeTrain> = sub
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            clamp_count += spike_codec::normalize(row, &base_ranges).1;
            spike_codec::encode(row, row_encoder(cfg.encoder, i), &base_ranges, steps)
        })
        .collect();

    let window_at = |start: usize| -> SpikeTrain {
        let mut w = row_trains[start].clone();
        for b in 1..p {
            w = SpikeTrain::hcat(&w, &row_trains[start + b]);
        }
        w
    };

    let mut train = WindowDataset { inputs: vec![], targets: vec![], predicted_step: vec![] };
    let mut test = WindowDataset { inputs: vec![], targets: vec![], predicted_step: vec![] };
    for i in 0..n_rows - p {
        let predicted = i + p;
        let set = if predicted <= cfg.train_split { &mut train } else { &mut test };
        set.inputs.push(window_at(i));
        set.targets.push(window_at(i + 1));
        set.predicted_step.push(predicted);
    }
    Ok(BuiltDataset {
        train,
        test,
        base_ranges,
        window_ranges,
        sub,
        clamp_count,
        degenerate_channels: degenerate,
    })
}

/// Mean of componentwise squared differences.
pub fn error_metric(pred: &[f64], reference: &[f64]) -> Result<f64> {
    if pred.len() != reference.len() {
        return Err(SmsError::ShapeMismatch(format!(
            "error_metric: {} vs {}",
            pred.len(),
            reference.len()
        )));
    }
    let sum: f64 = pred
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / pred.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    OneStep,
    Cascade,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::OneStep => "one_step",
            Mode::Cascade => "cascade",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Interpolation,
    Extrapolation,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Interpolation => "interpolation",
            Regime::Extrapolation => "extrapolation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEntry {
    /// Subsampled step index.
    pub step: usize,
    pub phys_time: f64,
    pub error: f64,
    pub mode: Mode,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    pub entries: Vec<ErrorEntry>,
    /// First step at which the decoded state left the training range by the
    /// divergence factor, if any.
    pub diverged_from: Option<usize>,
}

impl ErrorSeries {
    pub fn mean_error(&self, mode: Mode, regime: Regime) -> Option<f64> {
        let vals: Vec<f64> = self
            .entries
            .iter()
            .filter(|e| e.mode == mode && e.regime == regime)
            .map(|e| e.error)
            .collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }

    pub fn max_error(&self, mode: Mode, regime: Regime) -> Option<f64> {
        self.entries
            .iter()
            .filter(|e| e.mode == mode && e.regime == regime)
            .map(|e| e.error)
            .fold(None, |a, v| Some(a.map_or(v, |m: f64| m.max(v))))
    }

    pub fn all_finite(&self) -> bool {
        self.entries.iter().all(|e| e.error.is_finite())
    }
}

fn regime_of(step: usize, train_split: usize) -> Regime {
    if step <= train_split {
        Regime::Interpolation
    } else {
        Regime::Extrapolation
    }
}

fn decode_block(window: &SpikeTrain, block: usize, d: usize, cfg: &MarchConfig, ranges: &RangeSet) -> Vec<f64> {
    let slice = window.channel_slice(block * d, (block + 1) * d);
    spike_codec::decode(&slice, cfg.encoder, ranges)
}

/// Teacher-forced evaluation: feed each reference input window, binarize the
/// output, decode the last block and compare with the reference next step.
pub fn one_step_eval(net: &Network, built: &BuiltDataset, cfg: &MarchConfig) -> Result<ErrorSeries> {
    let d = built.state_dim();
    let p = cfg.window;
    let steps = cfg.effective_steps();
    let mut entries = Vec::new();
    for set in [&built.train, &built.test] {
        for (sample, &predicted) in set.inputs.iter().zip(&set.predicted_step) {
            let logits = net.forward(sample)?;
            let out = binarize(&logits, steps, p * d);
            let pred = decode_block(&out, p - 1, d, cfg, &built.base_ranges);
            let err = error_metric(&pred, built.sub.row(predicted))?;
            entries.push(ErrorEntry {
                step: predicted,
                phys_time: predicted as f64 * built.sub.dt,
                error: err,
                mode: Mode::OneStep,
                regime: regime_of(predicted, cfg.train_split),
            });
        }
    }
    Ok(ErrorSeries { entries, diverged_from: None })
}

/// Autoregressive rollout entirely in the spike domain: the binarized output
/// window becomes the next input window. Decoding happens only for the
/// returned trajectory and error reporting; divergence is flagged, never
/// raised.
pub fn cascade_predict(
    net: &Network,
    initial_window: &SpikeTrain,
    n_steps: usize,
    built: &BuiltDataset,
    cfg: &MarchConfig,
) -> Result<(Trajectory, ErrorSeries)> {
    let d = built.state_dim();
    let p = cfg.window;
    let steps = cfg.effective_steps();
    if initial_window.steps != steps || initial_window.channels != p * d {
        return Err(SmsError::ShapeMismatch(format!(
            "initial window {}x{} vs expected {}x{}",
            initial_window.steps,
            initial_window.channels,
            steps,
            p * d
        )));
    }
    let divergence_limit = DIVERGENCE_SPANS * built.base_ranges.max_span();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(p + n_steps);
    let mut entries = Vec::new();
    let mut diverged_from = None;
    let mut record = |step: usize, values: &[f64], entries: &mut Vec<ErrorEntry>| {
        if diverged_from.is_none() && values.iter().any(|v| v.abs() > divergence_limit) {
            diverged_from = Some(step);
        }
        if step >= 1 && step < built.sub.n_rows() {
            // error_metric cannot fail here: both sides have d components
            let err = error_metric(values, built.sub.row(step)).unwrap();
            entries.push(ErrorEntry {
                step,
                phys_time: step as f64 * built.sub.dt,
                error: err,
                mode: Mode::Cascade,
                regime: regime_of(step, cfg.train_split),
            });
        }
    };
    for b in 0..p {
        let vals = decode_block(initial_window, b, d, cfg, &built.base_ranges);
        record(b, &vals, &mut entries);
        rows.push(vals);
    }
    let mut window = initial_window.clone();
    for n in 0..n_steps {
        let logits = net.forward(&window)?;
        window = binarize(&logits, steps, p * d);
        let step = p + n;
        let vals = decode_block(&window, p - 1, d, cfg, &built.base_ranges);
        record(step, &vals, &mut entries);
        rows.push(vals);
    }
    let traj = Trajectory { kind: built.sub.kind, dt: built.sub.dt, rows };
    Ok((traj, ErrorSeries { entries, diverged_from }))
}

/// CSV export: header `step,phys_time,error,mode,regime`, one entry per line
/// in series order.
pub fn export_series(series: &ErrorSeries, path: &Path) -> Result<()> {
    let mut s = String::from("step,phys_time,error,mode,regime\n");
    for e in &series.entries {
        writeln!(
            s,
            "{},{},{},{},{}",
            e.step,
            e.phys_time,
            e.error,
            e.mode.name(),
            e.regime.name()
        )
        .unwrap();
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Inverse of `export_series` for the entry list (the divergence flag is not
/// part of the CSV schema).
pub fn parse_series(text: &str) -> Result<ErrorSeries> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| SmsError::Parse("empty CSV".into()))?;
    if header != "step,phys_time,error,mode,regime" {
        return Err(SmsError::Parse(format!("bad CSV header: {header}")));
    }
    let mut entries = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(SmsError::Parse(format!("bad CSV row: {line}")));
        }
        let step = fields[0].parse().map_err(|_| SmsError::Parse("bad step".into()))?;
        let phys_time = fields[1].parse().map_err(|_| SmsError::Parse("bad phys_time".into()))?;
        let error = fields[2].parse().map_err(|_| SmsError::Parse("bad error".into()))?;
        let mode = match fields[3] {
            "one_step" => Mode::OneStep,
            "cascade" => Mode::Cascade,
            other => return Err(SmsError::Parse(format!("bad mode {other}"))),
        };
        let regime = match fields[4] {
            "interpolation" => Regime::Interpolation,
            "extrapolation" => Regime::Extrapolation,
            other => return Err(SmsError::Parse(format!("bad regime {other}"))),
        };
        entries.push(ErrorEntry { step, phys_time, error, mode, regime });
    }
    Ok(ErrorSeries { entries, diverged_from: None })
}

/// Sidecar document for the dataset cache, stored as JSON next to the
/// subsampled trajectory file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub window: usize,
    pub subsample: usize,
    pub train_split: usize,
    pub encoder: EncoderKind,
    pub steps: usize,
    pub ranges: RangeSet,
}

pub fn write_dataset_cache(
    traj_path: &Path,
    sidecar_path: &Path,
    built: &BuiltDataset,
    cfg: &MarchConfig,
) -> Result<()> {
    built.sub.write(traj_path)?;
    let doc = DatasetSidecar {
        window: cfg.window,
        subsample: cfg.subsample,
        train_split: cfg.train_split,
        encoder: cfg.encoder,
        steps: cfg.effective_steps(),
        ranges: built.base_ranges.clone(),
    };
    let json = serde_json::to_string_pretty(&doc)
        .map_err(|e| SmsError::Parse(e.to_string()))?;
    std::fs::write(sidecar_path, json)?;
    Ok(())
}

pub fn read_dataset_cache(traj_path: &Path, sidecar_path: &Path) -> Result<(Trajectory, DatasetSidecar)> {
    let traj = Trajectory::read(traj_path)?;
    let doc: DatasetSidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path)?)
        .map_err(|e| SmsError::Parse(e.to_string()))?;
    Ok((traj, doc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference_solvers::{rk4_integrate, OdeSystem, TrajectoryKind};
    use crate::snn_core::{DenseLayer, LifConfig, NetworkShape, ResetKind};

    fn vdp_traj() -> Trajectory {
        rk4_integrate(&OdeSystem::VanDerPol { mu: 2.0 }, &[1.0, 0.0], 0.004, 2500).unwrap()
    }

    fn lt_cfg(steps: usize, window: usize, subsample: usize, train_split: usize) -> MarchConfig {
        MarchConfig {
            window,
            subsample,
            train_split,
            encoder: EncoderKind::LowerTriangular,
            steps,
            per_channel_ranges: true,
            range_margin: 0.1,
        }
    }

    #[test]
    fn vdp_dataset_shape() {
        let cfg = lt_cfg(20, 2, 10, 200);
        let built = build_dataset(&vdp_traj(), &cfg).unwrap();
        assert_eq!(built.sub.n_rows(), 251);
        assert_eq!(built.train.inputs[0].channels, 4);
        assert_eq!(built.train.len(), 199); // predicted steps 2..=200
        assert_eq!(built.test.len(), 50); // predicted steps 201..=250
        assert_eq!(built.clamp_count, 0); // margin keeps even test rows inside here
    }

    #[test]
    fn lorenz_dataset_channels() {
        let sys = OdeSystem::Lorenz { sigma: 10.0, rho: 28.0, beta: 8.0 / 3.0 };
        let traj = rk4_integrate(&sys, &[1.0, 1.0, 1.0], 0.01, 4000).unwrap();
        let cfg = lt_cfg(20, 2, 10, 320);
        let built = build_dataset(&traj, &cfg).unwrap();
        assert_eq!(built.sub.n_rows(), 401);
        assert_eq!(built.train.inputs[0].channels, 6);
    }

    #[test]
    fn single_window_on_three_step_trajectory() {
        let traj = Trajectory {
            kind: TrajectoryKind::Ode,
            dt: 1.0,
            rows: vec![vec![0.0], vec![1.0], vec![2.0]],
        };
        let cfg = lt_cfg(10, 1, 1, 1);
        let built = build_dataset(&traj, &cfg).unwrap();
        assert_eq!(built.train.len() + built.test.len(), 2);
    }

    #[test]
    fn window_shift_consistency() {
        let cfg = lt_cfg(20, 2, 10, 200);
        let built = build_dataset(&vdp_traj(), &cfg).unwrap();
        let all_inputs: Vec<&SpikeTrain> = built.train.inputs.iter().chain(&built.test.inputs).collect();
        let all_targets: Vec<&SpikeTrain> = built.train.targets.iter().chain(&built.test.targets).collect();
        for n in 0..all_inputs.len() - 1 {
            assert_eq!(all_targets[n], all_inputs[n + 1], "sample {n}");
        }
    }

    #[test]
    fn range_hygiene_on_train_rows() {
        let cfg = lt_cfg(20, 2, 10, 200);
        let built = build_dataset(&vdp_traj(), &cfg).unwrap();
        for row in &built.sub.rows[..=200] {
            let (_, clamped) = spike_codec::normalize(row, &built.base_ranges);
            assert_eq!(clamped, 0);
        }
    }

    #[test]
    fn degenerate_channel_widened() {
        let traj = Trajectory {
            kind: TrajectoryKind::Ode,
            dt: 1.0,
            rows: vec![vec![1.0, 0.0], vec![1.0, 0.5], vec![1.0, 1.0]],
        };
        let cfg = lt_cfg(10, 1, 1, 1);
        let built = build_dataset(&traj, &cfg).unwrap();
        assert_eq!(built.degenerate_channels, 1);
    }

    #[test]
    fn too_short_trajectory_rejected() {
        let traj = Trajectory {
            kind: TrajectoryKind::Ode,
            dt: 1.0,
            rows: vec![vec![0.0], vec![1.0]],
        };
        let cfg = lt_cfg(10, 2, 1, 1);
        assert!(build_dataset(&traj, &cfg).is_err());
    }

    #[test]
    fn error_metric_values() {
        assert_eq!(error_metric(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(error_metric(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.5);
        let pred = vec![1.1; 101];
        let reference = vec![1.0; 101];
        let e = error_metric(&pred, &reference).unwrap();
        assert!((e - 0.01).abs() < 1e-12);
        assert!(error_metric(&[1.0], &[1.0, 2.0]).is_err());
    }

    /// Network that reproduces its input window, with logits at +-0.5 so
    /// binarization is exact (pass-through LIF, identity dense layers,
    /// bias -0.5).
    fn identity_net(steps: usize, channels: usize) -> Network {
        let shape = NetworkShape { steps, n_in: channels, n_out: channels };
        let f = shape.flat_in();
        let mut d1 = DenseLayer::zeros(f, f);
        for i in 0..f {
            d1.weights[i * f + i] = 1.0;
        }
        let mut d2 = DenseLayer::zeros(f, f);
        for i in 0..f {
            d2.weights[i * f + i] = 1.0;
            d2.bias[i] = -0.5;
        }
        Network {
            lif: LifConfig { decay: 0.0, threshold: 1.0, reset: ResetKind::Subtract },
            dense1: d1,
            dense2: d2,
            shape,
            final_relu: false,
        }
    }

    #[test]
    fn cascade_of_identity_net_is_constant() {
        let traj = Trajectory {
            kind: TrajectoryKind::Ode,
            dt: 1.0,
            rows: (0..10).map(|i| vec![i as f64 / 10.0]).collect(),
        };
        let cfg = lt_cfg(8, 1, 1, 5);
        let built = build_dataset(&traj, &cfg).unwrap();
        let net = identity_net(8, 1);
        let init = built.train.inputs[0].clone();
        let (rollout, series) = cascade_predict(&net, &init, 6, &built, &cfg).unwrap();
        let first = rollout.rows[0][0];
        for row in &rollout.rows {
            assert_eq!(row[0], first);
        }
        assert!(series.all_finite());
        assert!(series.diverged_from.is_none());
    }

    #[test]
    fn zero_step_cascade_returns_decoded_window() {
        let traj = Trajectory {
            kind: TrajectoryKind::Ode,
            dt: 1.0,
            rows: (0..10).map(|i| vec![i as f64 / 10.0]).collect(),
        };
        let cfg = lt_cfg(8, 2, 1, 5);
        let built = build_dataset(&traj, &cfg).unwrap();
        let net = identity_net(8, 2);
        let init = built.train.inputs[0].clone();
        let (rollout, _) = cascade_predict(&net, &init, 0, &built, &cfg).unwrap();
        assert_eq!(rollout.n_rows(), 2);
    }

    #[test]
    fn one_step_eval_zero_net_is_finite() {
        let cfg = lt_cfg(10, 2, 10, 200);
        let built = build_dataset(&vdp_traj(), &cfg).unwrap();
        let shape = NetworkShape { steps: 10, n_in: 4, n_out: 4 };
        let net = Network {
            lif: LifConfig::default(),
            dense1: DenseLayer::zeros(shape.flat_in(), 8),
            dense2: DenseLayer::zeros(8, shape.flat_out()),
            shape,
            final_relu: false,
        };
        let series = one_step_eval(&net, &built, &cfg).unwrap();
        assert_eq!(series.entries.len(), 249);
        assert!(series.all_finite());
        // Zero logits binarize to all ones, so errors are large but finite.
        assert!(series.mean_error(Mode::OneStep, Regime::Interpolation).unwrap() > 0.0);
    }

    #[test]
    fn memorized_sample_hits_quantization_floor() {
        // A network with bit-exact output reduces the one-step error to pure
        // encoding quantization.
        let cfg = lt_cfg(16, 1, 1, 5);
        let traj = Trajectory {
            kind: TrajectoryKind::Ode,
            dt: 1.0,
            rows: (0..10).map(|i| vec![(i as f64 * 0.377).sin()]).collect(),
        };
        let built = build_dataset(&traj, &cfg).unwrap();
        let net = identity_net(16, 1);
        // The identity net reproduces whatever window it is fed. Feeding the
        // target window emulates a perfectly memorized sample, so the decoded
        // prediction differs from the reference only by quantization.
        let floor = built.quantization_floor(16);
        for (i, &predicted) in built.train.predicted_step.iter().enumerate() {
            let target_window = &built.train.targets[i];
            let logits = net.forward(target_window).unwrap();
            let out = binarize(&logits, 16, 1);
            let pred = spike_codec::decode(&out, cfg.encoder, &built.base_ranges);
            let err = error_metric(&pred, built.sub.row(predicted)).unwrap();
            assert!(err <= floor * (1.0 + 1e-9), "err={err} floor={floor}");
        }
    }

    #[test]
    fn export_parse_round_trip() {
        let series = ErrorSeries {
            entries: vec![
                ErrorEntry { step: 1, phys_time: 0.04, error: 1.5e-4, mode: Mode::Cascade, regime: Regime::Interpolation },
                ErrorEntry { step: 2, phys_time: 0.08, error: 2.5e-4, mode: Mode::Cascade, regime: Regime::Interpolation },
                ErrorEntry { step: 3, phys_time: 0.12, error: 3.5e-4, mode: Mode::OneStep, regime: Regime::Extrapolation },
            ],
            diverged_from: None,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("series.csv");
        export_series(&series, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        let parsed = parse_series(&text).unwrap();
        assert_eq!(parsed, series);
    }

    #[test]
    fn export_empty_series_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        export_series(&ErrorSeries { entries: vec![], diverged_from: None }, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "step,phys_time,error,mode,regime\n");
    }

    #[test]
    fn dataset_cache_round_trip() {
        let cfg = lt_cfg(20, 2, 10, 200);
        let built = build_dataset(&vdp_traj(), &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let tp = dir.path().join("sub.traj");
        let sp = dir.path().join("sub.json");
        write_dataset_cache(&tp, &sp, &built, &cfg).unwrap();
        let (traj, doc) = read_dataset_cache(&tp, &sp).unwrap();
        assert_eq!(traj, built.sub);
        assert_eq!(doc.ranges, built.base_ranges);
        assert_eq!(doc.window, 2);
        assert_eq!(doc.steps, 20);
    }

    #[test]
    fn spike_domain_closure_on_grid_values() {
        // Decode then re-encode is the identity when decoded values sit on
        // the k/#T grid and bits are prefix shaped.
        let cfg = lt_cfg(10, 1, 1, 5);
        let traj = Trajectory {
            kind: TrajectoryKind::Ode,
            dt: 1.0,
            rows: (0..10).map(|i| vec![i as f64 / 10.0]).collect(),
        };
        let mut cfg2 = cfg;
        cfg2.range_margin = 0.0;
        let built = build_dataset(&traj, &cfg2).unwrap();
        for w in built.train.inputs.iter().chain(&built.test.inputs) {
            let decoded = spike_codec::decode(w, cfg2.encoder, &built.base_ranges);
            let re = spike_codec::encode(&decoded, cfg2.encoder, &built.base_ranges, 10);
            assert_eq!(&re, w);
        }
    }
}
