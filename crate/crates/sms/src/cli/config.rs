//! Flat `key = value` experiment configs with one section per module.
//! Parsing is strict: unknown sections or keys are rejected, and
//! `parse(serialize(c)) == c`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::error::{Result, SmsError};
use crate::marching::MarchConfig;
use crate::reference_solvers::{
    make_ic, rk4_integrate, solve_heat_ftcs, solve_wave_leapfrog, Grid1D, IcKind, OdeSystem,
    PdeKind, PdeProblem, Trajectory,
};
use crate::snn_core::{AdamConfig, LifConfig, ResetKind, TrainConfig};
use crate::spike_codec::EncoderKind;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Vdp { mu: f64, state0: [f64; 2] },
    Lorenz { sigma: f64, rho: f64, beta: f64, state0: [f64; 3] },
    Wave { c: f64, x_min: f64, x_max: f64, n_x: usize, ic_center: f64, ic_width: f64 },
    Heat { alpha: f64, x_min: f64, x_max: f64, n_x: usize },
}

impl ProblemSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ProblemSpec::Vdp { .. } => "vdp",
            ProblemSpec::Lorenz { .. } => "lorenz",
            ProblemSpec::Wave { .. } => "wave",
            ProblemSpec::Heat { .. } => "heat",
        }
    }

    pub fn state_dim(&self) -> usize {
        match self {
            ProblemSpec::Vdp { .. } => 2,
            ProblemSpec::Lorenz { .. } => 3,
            ProblemSpec::Wave { n_x, .. } | ProblemSpec::Heat { n_x, .. } => *n_x,
        }
    }

    pub fn is_pde(&self) -> bool {
        matches!(self, ProblemSpec::Wave { .. } | ProblemSpec::Heat { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub problem: ProblemSpec,
    /// Physical timestep of the reference solver.
    pub dt: f64,
    /// Number of reference timesteps (N_t).
    pub n_steps: usize,
    pub march: MarchConfig,
    pub n_hidden: usize,
    pub lif: LifConfig,
    pub final_relu: bool,
    pub train: TrainConfig,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    /// Generate the reference trajectory for this problem.
    pub fn solve_reference(&self) -> Result<Trajectory> {
        match &self.problem {
            ProblemSpec::Vdp { mu, state0 } => {
                rk4_integrate(&OdeSystem::VanDerPol { mu: *mu }, state0, self.dt, self.n_steps)
            }
            ProblemSpec::Lorenz { sigma, rho, beta, state0 } => rk4_integrate(
                &OdeSystem::Lorenz { sigma: *sigma, rho: *rho, beta: *beta },
                state0,
                self.dt,
                self.n_steps,
            ),
            ProblemSpec::Wave { c, x_min, x_max, n_x, ic_center, ic_width } => {
                let grid = Grid1D::new(*x_min, *x_max, *n_x)?;
                let ic_u = make_ic(IcKind::Gaussian { center: *ic_center, width: *ic_width }, &grid);
                let problem = PdeProblem { kind: PdeKind::Wave { c: *c }, grid, ic_u, ic_v: None };
                solve_wave_leapfrog(&problem, self.dt, self.n_steps)
            }
            ProblemSpec::Heat { alpha, x_min, x_max, n_x } => {
                let grid = Grid1D::new(*x_min, *x_max, *n_x)?;
                let ic_u = make_ic(IcKind::Hat, &grid);
                let problem = PdeProblem { kind: PdeKind::Heat { alpha: *alpha }, grid, ic_u, ic_v: None };
                solve_heat_ftcs(&problem, self.dt, self.n_steps)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.march.validate()?;
        self.lif.validate().map_err(SmsError::InvalidConfig)?;
        self.train.validate()?;
        if self.n_hidden == 0 {
            return Err(SmsError::InvalidConfig("n_hidden must be >= 1".into()));
        }
        if !(self.dt > 0.0) || self.n_steps == 0 {
            return Err(SmsError::InvalidConfig(format!(
                "dt={} n_steps={}",
                self.dt, self.n_steps
            )));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "[meta]").unwrap();
        writeln!(s, "name = {}", self.name).unwrap();
        writeln!(s).unwrap();
        writeln!(s, "[problem]").unwrap();
        writeln!(s, "kind = {}", self.problem.kind_name()).unwrap();
        match &self.problem {
            ProblemSpec::Vdp { mu, state0 } => {
                writeln!(s, "mu = {mu}").unwrap();
                writeln!(s, "x0 = {}", state0[0]).unwrap();
                writeln!(s, "y0 = {}", state0[1]).unwrap();
            }
            ProblemSpec::Lorenz { sigma, rho, beta, state0 } => {
                writeln!(s, "sigma = {sigma}").unwrap();
                writeln!(s, "rho = {rho}").unwrap();
                writeln!(s, "beta = {beta}").unwrap();
                writeln!(s, "x0 = {}", state0[0]).unwrap();
                writeln!(s, "y0 = {}", state0[1]).unwrap();
                writeln!(s, "z0 = {}", state0[2]).unwrap();
            }
            ProblemSpec::Wave { c, x_min, x_max, n_x, ic_center, ic_width } => {
                writeln!(s, "c = {c}").unwrap();
                writeln!(s, "x_min = {x_min}").unwrap();
                writeln!(s, "x_max = {x_max}").unwrap();
                writeln!(s, "n_x = {n_x}").unwrap();
                writeln!(s, "ic_center = {ic_center}").unwrap();
                writeln!(s, "ic_width = {ic_width}").unwrap();
            }
            ProblemSpec::Heat { alpha, x_min, x_max, n_x } => {
                writeln!(s, "alpha = {alpha}").unwrap();
                writeln!(s, "x_min = {x_min}").unwrap();
                writeln!(s, "x_max = {x_max}").unwrap();
                writeln!(s, "n_x = {n_x}").unwrap();
            }
        }
        writeln!(s).unwrap();
        writeln!(s, "[integration]").unwrap();
        writeln!(s, "dt = {}", self.dt).unwrap();
        writeln!(s, "n_steps = {}", self.n_steps).unwrap();
        writeln!(s).unwrap();
        writeln!(s, "[marching]").unwrap();
        writeln!(s, "window = {}", self.march.window).unwrap();
        writeln!(s, "subsample = {}", self.march.subsample).unwrap();
        writeln!(s, "train_split = {}", self.march.train_split).unwrap();
        writeln!(s, "encoder = {}", self.march.encoder.name()).unwrap();
        if let EncoderKind::Rate { seed } = self.march.encoder {
            writeln!(s, "rate_seed = {seed}").unwrap();
        }
        writeln!(s, "steps = {}", self.march.steps).unwrap();
        writeln!(s, "per_channel_ranges = {}", self.march.per_channel_ranges).unwrap();
        writeln!(s, "range_margin = {}", self.march.range_margin).unwrap();
        writeln!(s).unwrap();
        writeln!(s, "[network]").unwrap();
        writeln!(s, "n_hidden = {}", self.n_hidden).unwrap();
        writeln!(s, "lif_decay = {}", self.lif.decay).unwrap();
        writeln!(s, "lif_threshold = {}", self.lif.threshold).unwrap();
        let reset = match self.lif.reset {
            ResetKind::Subtract => "subtract",
            ResetKind::Zero => "zero",
        };
        writeln!(s, "lif_reset = {reset}").unwrap();
        writeln!(s, "final_relu = {}", self.final_relu).unwrap();
        writeln!(s).unwrap();
        writeln!(s, "[training]").unwrap();
        writeln!(s, "epochs = {}", self.train.epochs).unwrap();
        writeln!(s, "learning_rate = {}", self.train.learning_rate).unwrap();
        writeln!(s, "batch_size = {}", self.train.batch_size).unwrap();
        writeln!(s, "seed = {}", self.train.seed).unwrap();
        writeln!(s, "adam_beta1 = {}", self.train.adam.beta1).unwrap();
        writeln!(s, "adam_beta2 = {}", self.train.adam.beta2).unwrap();
        writeln!(s, "adam_epsilon = {}", self.train.adam.eps).unwrap();
        writeln!(s).unwrap();
        writeln!(s, "[output]").unwrap();
        writeln!(s, "out_dir = {}", self.out_dir.display()).unwrap();
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                current = name.to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                SmsError::InvalidConfig(format!("line {}: expected key = value", lineno + 1))
            })?;
            if current.is_empty() {
                return Err(SmsError::InvalidConfig(format!(
                    "line {}: key outside any section",
                    lineno + 1
                )));
            }
            let prev = sections
                .get_mut(&current)
                .unwrap()
                .insert(key.trim().to_string(), value.trim().to_string());
            if prev.is_some() {
                return Err(SmsError::InvalidConfig(format!(
                    "duplicate key {} in [{}]",
                    key.trim(),
                    current
                )));
            }
        }

        let mut take = |section: &str, key: &str| -> Result<String> {
            sections
                .get_mut(section)
                .and_then(|m| m.remove(key))
                .ok_or_else(|| SmsError::InvalidConfig(format!("missing [{section}] {key}")))
        };
        fn num<T: std::str::FromStr>(section: &str, key: &str, v: String) -> Result<T> {
            v.parse().map_err(|_| {
                SmsError::InvalidConfig(format!("bad value for [{section}] {key}: {v}"))
            })
        }

        let name = take("meta", "name")?;
        let kind = take("problem", "kind")?;
        let problem = match kind.as_str() {
            "vdp" => ProblemSpec::Vdp {
                mu: num("problem", "mu", take("problem", "mu")?)?,
                state0: [
                    num("problem", "x0", take("problem", "x0")?)?,
                    num("problem", "y0", take("problem", "y0")?)?,
                ],
            },
            "lorenz" => ProblemSpec::Lorenz {
                sigma: num("problem", "sigma", take("problem", "sigma")?)?,
                rho: num("problem", "rho", take("problem", "rho")?)?,
                beta: num("problem", "beta", take("problem", "beta")?)?,
                state0: [
                    num("problem", "x0", take("problem", "x0")?)?,
                    num("problem", "y0", take("problem", "y0")?)?,
                    num("problem", "z0", take("problem", "z0")?)?,
                ],
            },
            "wave" => ProblemSpec::Wave {
                c: num("problem", "c", take("problem", "c")?)?,
                x_min: num("problem", "x_min", take("problem", "x_min")?)?,
                x_max: num("problem", "x_max", take("problem", "x_max")?)?,
                n_x: num("problem", "n_x", take("problem", "n_x")?)?,
                ic_center: num("problem", "ic_center", take("problem", "ic_center")?)?,
                ic_width: num("problem", "ic_width", take("problem", "ic_width")?)?,
            },
            "heat" => ProblemSpec::Heat {
                alpha: num("problem", "alpha", take("problem", "alpha")?)?,
                x_min: num("problem", "x_min", take("problem", "x_min")?)?,
                x_max: num("problem", "x_max", take("problem", "x_max")?)?,
                n_x: num("problem", "n_x", take("problem", "n_x")?)?,
            },
            other => {
                return Err(SmsError::InvalidConfig(format!("unknown problem kind {other}")))
            }
        };

        let dt = num("integration", "dt", take("integration", "dt")?)?;
        let n_steps = num("integration", "n_steps", take("integration", "n_steps")?)?;

        let encoder_name = take("marching", "encoder")?;
        let encoder = match encoder_name.as_str() {
            "lower_triangular" => EncoderKind::LowerTriangular,
            "rate" => EncoderKind::Rate {
                seed: num("marching", "rate_seed", take("marching", "rate_seed")?)?,
            },
            "float32" => EncoderKind::Float32,
            other => return Err(SmsError::InvalidConfig(format!("unknown encoder {other}"))),
        };
        let march = MarchConfig {
            window: num("marching", "window", take("marching", "window")?)?,
            subsample: num("marching", "subsample", take("marching", "subsample")?)?,
            train_split: num("marching", "train_split", take("marching", "train_split")?)?,
            encoder,
            steps: num("marching", "steps", take("marching", "steps")?)?,
            per_channel_ranges: num(
                "marching",
                "per_channel_ranges",
                take("marching", "per_channel_ranges")?,
            )?,
            range_margin: num("marching", "range_margin", take("marching", "range_margin")?)?,
        };

        let n_hidden = num("network", "n_hidden", take("network", "n_hidden")?)?;
        let reset_name = take("network", "lif_reset")?;
        let lif = LifConfig {
            decay: num("network", "lif_decay", take("network", "lif_decay")?)?,
            threshold: num("network", "lif_threshold", take("network", "lif_threshold")?)?,
            reset: match reset_name.as_str() {
                "subtract" => ResetKind::Subtract,
                "zero" => ResetKind::Zero,
                other => {
                    return Err(SmsError::InvalidConfig(format!("unknown lif_reset {other}")))
                }
            },
        };
        let final_relu = num("network", "final_relu", take("network", "final_relu")?)?;

        let learning_rate = num("training", "learning_rate", take("training", "learning_rate")?)?;
        let train = TrainConfig {
            epochs: num("training", "epochs", take("training", "epochs")?)?,
            learning_rate,
            batch_size: num("training", "batch_size", take("training", "batch_size")?)?,
            seed: num("training", "seed", take("training", "seed")?)?,
            adam: AdamConfig {
                lr: learning_rate,
                beta1: num("training", "adam_beta1", take("training", "adam_beta1")?)?,
                beta2: num("training", "adam_beta2", take("training", "adam_beta2")?)?,
                eps: num("training", "adam_epsilon", take("training", "adam_epsilon")?)?,
            },
        };

        let out_dir = PathBuf::from(take("output", "out_dir")?);

        for (section, keys) in &sections {
            if let Some(key) = keys.keys().next() {
                return Err(SmsError::InvalidConfig(format!(
                    "unknown key {key} in [{section}]"
                )));
            }
            match section.as_str() {
                "meta" | "problem" | "integration" | "marching" | "network" | "training"
                | "output" => {}
                other => {
                    return Err(SmsError::InvalidConfig(format!("unknown section [{other}]")))
                }
            }
        }

        let cfg = ExperimentConfig {
            name,
            problem,
            dt,
            n_steps,
            march,
            n_hidden,
            lif,
            final_relu,
            train,
            out_dir,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// SHA-256 of the serialized config, hex encoded.
    pub fn hash_hex(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
