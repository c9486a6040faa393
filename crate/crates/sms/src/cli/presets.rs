//! Built-in experiment configurations: the four full-scale experiments and
//! their desk-scale variants (smaller spike trains and fewer epochs so a
//! train-and-evaluate cycle finishes in minutes).

use std::path::PathBuf;

use crate::marching::MarchConfig;
use crate::snn_core::{AdamConfig, LifConfig, TrainConfig};
use crate::spike_codec::EncoderKind;

use super::config::{ExperimentConfig, ProblemSpec};

fn train_cfg(epochs: usize, learning_rate: f64, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs,
        learning_rate,
        batch_size: 0,
        seed,
        adam: AdamConfig { lr: learning_rate, ..AdamConfig::default() },
    }
}

fn march(window: usize, subsample: usize, train_split: usize, steps: usize, per_channel: bool) -> MarchConfig {
    MarchConfig {
        window,
        subsample,
        train_split,
        encoder: EncoderKind::LowerTriangular,
        steps,
        per_channel_ranges: per_channel,
        range_margin: 0.1,
    }
}

pub fn vdp() -> ExperimentConfig {
    ExperimentConfig {
        name: "vdp".into(),
        problem: ProblemSpec::Vdp { mu: 2.0, state0: [1.0, 0.0] },
        dt: 0.004, // interval [0, 10] over 2500 steps
        n_steps: 2500,
        march: march(2, 10, 200, 100, true),
        n_hidden: 500,
        lif: LifConfig::default(),
        final_relu: false,
        train: train_cfg(5000, 1e-3, 0),
        out_dir: PathBuf::from("runs/vdp"),
    }
}

pub fn lorenz() -> ExperimentConfig {
    ExperimentConfig {
        name: "lorenz".into(),
        problem: ProblemSpec::Lorenz {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
            state0: [1.0, 1.0, 1.0],
        },
        dt: 0.01, // interval [0, 40] over 4000 steps
        n_steps: 4000,
        march: march(2, 10, 320, 1000, true),
        n_hidden: 500,
        lif: LifConfig::default(),
        final_relu: false,
        train: train_cfg(5000, 1e-3, 0),
        out_dir: PathBuf::from("runs/lorenz"),
    }
}

pub fn wave() -> ExperimentConfig {
    ExperimentConfig {
        name: "wave".into(),
        problem: ProblemSpec::Wave {
            c: 1.0,
            x_min: 0.0,
            x_max: 1.0,
            n_x: 101,
            ic_center: 0.5,
            ic_width: 0.05,
        },
        dt: 0.01, // dx / c, unit wave number on the grid
        n_steps: 1000,
        march: march(2, 1, 800, 100, false),
        n_hidden: 500,
        lif: LifConfig::default(),
        final_relu: false,
        train: train_cfg(5000, 1e-3, 0),
        out_dir: PathBuf::from("runs/wave"),
    }
}

pub fn heat() -> ExperimentConfig {
    ExperimentConfig {
        name: "heat".into(),
        problem: ProblemSpec::Heat { alpha: 1.0, x_min: 0.0, x_max: 1.0, n_x: 101 },
        dt: 0.00004, // 0.4 dx^2 / alpha
        n_steps: 1000,
        march: march(2, 10, 80, 100, false),
        n_hidden: 500,
        lif: LifConfig::default(),
        final_relu: false,
        train: train_cfg(5000, 1e-3, 0),
        out_dir: PathBuf::from("runs/heat"),
    }
}

pub fn vdp_desk() -> ExperimentConfig {
    let mut cfg = vdp();
    cfg.name = "vdp_desk".into();
    cfg.march.steps = 20;
    cfg.n_hidden = 100;
    cfg.train = train_cfg(500, 2e-3, 0);
    cfg.out_dir = PathBuf::from("runs/vdp_desk");
    cfg
}

pub fn lorenz_desk() -> ExperimentConfig {
    let mut cfg = lorenz();
    cfg.name = "lorenz_desk".into();
    cfg.march.steps = 20;
    cfg.n_hidden = 100;
    cfg.train = train_cfg(500, 2e-3, 0);
    cfg.out_dir = PathBuf::from("runs/lorenz_desk");
    cfg
}

pub fn wave_desk() -> ExperimentConfig {
    let mut cfg = wave();
    cfg.name = "wave_desk".into();
    cfg.problem = ProblemSpec::Wave {
        c: 1.0,
        x_min: 0.0,
        x_max: 1.0,
        n_x: 51,
        ic_center: 0.5,
        ic_width: 0.05,
    };
    cfg.dt = 0.02;
    cfg.n_steps = 300;
    cfg.march = march(2, 1, 240, 20, false);
    cfg.n_hidden = 100;
    cfg.train = train_cfg(300, 2e-3, 0);
    cfg.out_dir = PathBuf::from("runs/wave_desk");
    cfg
}

pub fn heat_desk() -> ExperimentConfig {
    let mut cfg = heat();
    cfg.name = "heat_desk".into();
    cfg.march.steps = 20;
    cfg.n_hidden = 100;
    cfg.train = train_cfg(500, 2e-3, 0);
    cfg.out_dir = PathBuf::from("runs/heat_desk");
    cfg
}

pub fn all_presets() -> Vec<ExperimentConfig> {
    vec![
        vdp(),
        lorenz(),
        wave(),
        heat(),
        vdp_desk(),
        lorenz_desk(),
        wave_desk(),
        heat_desk(),
    ]
}

pub fn by_name(name: &str) -> Option<ExperimentConfig> {
    all_presets().into_iter().find(|c| c.name == name)
}
