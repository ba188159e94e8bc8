//! Experiment configuration: a flat key=value text format with CLI override
//! support, resolved into the typed specs used by the pipeline.
//!
//! Recognized keys (defaults in parentheses):
//!
//! ```text
//! dataset.path            load a saved dataset instead of generating one
//! dataset.count           (50)   number of examples when generating
//! dataset.train_frac      (0.9)
//! phantom.nx              (64)
//! phantom.ny              (64)
//! phantom.nt              (6)
//! phantom.objects         (6)
//! phantom.motion_amp      (2.0)
//! phantom.period          (6.0)
//! phantom.contrast_lo     (0.3)
//! phantom.contrast_hi     (1.0)
//! phantom.phase_smoothness (0.5)
//! phantom.noise_std       (0.0)
//! phantom.seed            (0)
//! sampling.accel          (4.0)
//! sampling.acs            (4)
//! sampling.sigma          (ny/6 when unset)
//! sampling.fresh_mask     (true)  fresh mask per example
//! model.preset            (dimension)
//! model.m                 override FDN block count
//! model.n                 override SDN block count
//! model.layers            override conv layers per block
//! model.filters           override filter count
//! model.kernel            (3x3x3)
//! model.dc_lambda         ("inf" or a positive number)
//! model.temporal_pad      (zero) or "circular": frame-axis conv padding
//! loss.alpha              comma list, length M
//! loss.beta               comma list, length N-1
//! train.epochs            (10)
//! train.batch             (4)
//! train.lr0               (1e-4)
//! train.decay             (0.95)
//! train.seed              (0)
//! train.checkpoint_every  (unset: final epoch only)
//! eval.error_map_max      (0.07)
//! eval.yt_x               (nx/2 when unset)
//! sweep.alpha1            comma list of alpha_1 values for sweep mode
//! output.dir              (out)
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::conv::TemporalPad;
use crate::dataset::DatasetSpec;
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::phantom::PhantomSpec;
use crate::presets::preset;
use crate::tape::DcWeight;
use crate::train::TrainOptions;

/// Raw key=value pairs, insertion-order independent.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    /// Parse key=value lines; '#' starts a comment, blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got '{line}'", lineno + 1))
            })?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Apply `key=value` override strings (CLI `--set`), last one wins.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for o in overrides {
            let (key, value) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override '{o}' is not key=value")))?;
            self.values
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    fn parse_as<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("key '{key}': cannot parse '{v}'"))),
        }
    }

    fn parse_opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("key '{key}': cannot parse '{v}'"))),
        }
    }

    fn parse_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) if v.trim().is_empty() => Ok(Some(Vec::new())),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("key '{key}': bad number '{s}'")))
                })
                .collect::<Result<Vec<f64>>>()
                .map(Some),
        }
    }

    /// Reject keys outside the documented schema; typos fail loudly.
    fn check_known_keys(&self) -> Result<()> {
        const KNOWN: &[&str] = &[
            "dataset.path",
            "dataset.count",
            "dataset.train_frac",
            "phantom.nx",
            "phantom.ny",
            "phantom.nt",
            "phantom.objects",
            "phantom.motion_amp",
            "phantom.period",
            "phantom.contrast_lo",
            "phantom.contrast_hi",
            "phantom.phase_smoothness",
            "phantom.noise_std",
            "phantom.seed",
            "sampling.accel",
            "sampling.acs",
            "sampling.sigma",
            "sampling.fresh_mask",
            "model.preset",
            "model.m",
            "model.n",
            "model.layers",
            "model.filters",
            "model.kernel",
            "model.dc_lambda",
            "model.temporal_pad",
            "loss.alpha",
            "loss.beta",
            "train.epochs",
            "train.batch",
            "train.lr0",
            "train.decay",
            "train.seed",
            "train.checkpoint_every",
            "eval.error_map_max",
            "eval.yt_x",
            "sweep.alpha1",
            "output.dir",
        ];
        for key in self.values.keys() {
            if !KNOWN.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown config key '{key}'")));
            }
        }
        Ok(())
    }
}

/// Fully resolved experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Load this dataset file instead of generating one.
    pub dataset_path: Option<PathBuf>,
    pub dataset: DatasetSpec,
    pub model: ModelConfig,
    pub preset_name: String,
    pub train: TrainOptions,
    pub error_map_max: f64,
    pub yt_x: Option<usize>,
    pub sweep_alpha1: Vec<f64>,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        raw.check_known_keys()?;

        let pdefault = PhantomSpec::default();
        let phantom = PhantomSpec {
            nx: raw.parse_as("phantom.nx", pdefault.nx)?,
            ny: raw.parse_as("phantom.ny", pdefault.ny)?,
            nt: raw.parse_as("phantom.nt", pdefault.nt)?,
            n_objects: raw.parse_as("phantom.objects", pdefault.n_objects)?,
            motion_amp: raw.parse_as("phantom.motion_amp", pdefault.motion_amp)?,
            period: raw.parse_as("phantom.period", pdefault.period)?,
            contrast: (
                raw.parse_as("phantom.contrast_lo", pdefault.contrast.0)?,
                raw.parse_as("phantom.contrast_hi", pdefault.contrast.1)?,
            ),
            phase_smoothness: raw.parse_as("phantom.phase_smoothness", pdefault.phase_smoothness)?,
            noise_std: raw.parse_as("phantom.noise_std", pdefault.noise_std)?,
            seed: raw.parse_as("phantom.seed", pdefault.seed)?,
        };

        let ddefault = DatasetSpec::default();
        let dataset = DatasetSpec {
            phantom,
            count: raw.parse_as("dataset.count", ddefault.count)?,
            train_frac: raw.parse_as("dataset.train_frac", ddefault.train_frac)?,
            accel: raw.parse_as("sampling.accel", ddefault.accel)?,
            acs: raw.parse_as("sampling.acs", ddefault.acs)?,
            mask_sigma: raw.parse_opt("sampling.sigma")?,
            fresh_mask_per_example: raw.parse_as("sampling.fresh_mask", ddefault.fresh_mask_per_example)?,
        };

        let preset_name = raw.get("model.preset").unwrap_or("dimension").to_string();
        let mut model = preset(&preset_name)?;
        if let Some(m) = raw.parse_opt::<usize>("model.m")? {
            model.m_blocks = m;
            model.loss_alpha.resize(m, 0.0);
        }
        if let Some(n) = raw.parse_opt::<usize>("model.n")? {
            model.n_blocks = n;
            model.loss_beta.resize(n.saturating_sub(1), 0.0);
        }
        if let Some(l) = raw.parse_opt("model.layers")? {
            model.layers_per_block = l;
        }
        if let Some(f) = raw.parse_opt("model.filters")? {
            model.filters = f;
        }
        if let Some(k) = raw.get("model.kernel") {
            model.kernel = parse_kernel(k)?;
        }
        if let Some(l) = raw.get("model.dc_lambda") {
            model.dc_lambda = parse_dc_lambda(l)?;
        }
        if let Some(p) = raw.get("model.temporal_pad") {
            model.temporal_pad = match p {
                "zero" => TemporalPad::Zero,
                "circular" => TemporalPad::Circular,
                other => {
                    return Err(Error::Config(format!(
                        "model.temporal_pad must be zero or circular, got '{other}'"
                    )))
                }
            };
        }
        if let Some(alpha) = raw.parse_list("loss.alpha")? {
            model.loss_alpha = alpha;
        }
        if let Some(beta) = raw.parse_list("loss.beta")? {
            model.loss_beta = beta;
        }
        model.validate()?;

        let tdefault = TrainOptions::default();
        let train = TrainOptions {
            epochs: raw.parse_as("train.epochs", tdefault.epochs)?,
            batch_size: raw.parse_as("train.batch", tdefault.batch_size)?,
            lr0: raw.parse_as("train.lr0", tdefault.lr0)?,
            decay: raw.parse_as("train.decay", tdefault.decay)?,
            seed: raw.parse_as("train.seed", tdefault.seed)?,
            checkpoint_every: raw.parse_opt("train.checkpoint_every")?,
            checkpoint_dir: None,
        };

        let config = Self {
            dataset_path: raw.get("dataset.path").map(PathBuf::from),
            dataset,
            model,
            preset_name,
            train,
            error_map_max: raw.parse_as("eval.error_map_max", 0.07)?,
            yt_x: raw.parse_opt("eval.yt_x")?,
            sweep_alpha1: raw.parse_list("sweep.alpha1")?.unwrap_or_default(),
            output_dir: PathBuf::from(raw.get("output.dir").unwrap_or("out")),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(path) = &self.dataset_path {
            if !path.exists() {
                return Err(Error::Config(format!(
                    "dataset.path '{}' does not exist",
                    path.display()
                )));
            }
        }
        if !(self.error_map_max > 0.0) {
            return Err(Error::Config("eval.error_map_max must be > 0".into()));
        }
        self.model.validate()
    }

    /// The config echoed back in the documented key=value schema, with every
    /// default made explicit; written next to run artifacts for provenance.
    pub fn resolved_text(&self) -> String {
        let mut s = String::new();
        if let Some(p) = &self.dataset_path {
            writeln!(s, "dataset.path = {}", p.display()).unwrap();
        }
        let d = &self.dataset;
        let p = &d.phantom;
        writeln!(s, "dataset.count = {}", d.count).unwrap();
        writeln!(s, "dataset.train_frac = {}", d.train_frac).unwrap();
        writeln!(s, "phantom.nx = {}", p.nx).unwrap();
        writeln!(s, "phantom.ny = {}", p.ny).unwrap();
        writeln!(s, "phantom.nt = {}", p.nt).unwrap();
        writeln!(s, "phantom.objects = {}", p.n_objects).unwrap();
        writeln!(s, "phantom.motion_amp = {}", p.motion_amp).unwrap();
        writeln!(s, "phantom.period = {}", p.period).unwrap();
        writeln!(s, "phantom.contrast_lo = {}", p.contrast.0).unwrap();
        writeln!(s, "phantom.contrast_hi = {}", p.contrast.1).unwrap();
        writeln!(s, "phantom.phase_smoothness = {}", p.phase_smoothness).unwrap();
        writeln!(s, "phantom.noise_std = {}", p.noise_std).unwrap();
        writeln!(s, "phantom.seed = {}", p.seed).unwrap();
        writeln!(s, "sampling.accel = {}", d.accel).unwrap();
        writeln!(s, "sampling.acs = {}", d.acs).unwrap();
        if let Some(sigma) = d.mask_sigma {
            writeln!(s, "sampling.sigma = {sigma}").unwrap();
        }
        writeln!(s, "sampling.fresh_mask = {}", d.fresh_mask_per_example).unwrap();
        let m = &self.model;
        writeln!(s, "model.preset = {}", self.preset_name).unwrap();
        writeln!(s, "model.m = {}", m.m_blocks).unwrap();
        writeln!(s, "model.n = {}", m.n_blocks).unwrap();
        writeln!(s, "model.layers = {}", m.layers_per_block).unwrap();
        writeln!(s, "model.filters = {}", m.filters).unwrap();
        writeln!(s, "model.kernel = {}x{}x{}", m.kernel.0, m.kernel.1, m.kernel.2).unwrap();
        match m.dc_lambda {
            DcWeight::Infinite => writeln!(s, "model.dc_lambda = inf").unwrap(),
            DcWeight::Finite(v) => writeln!(s, "model.dc_lambda = {v}").unwrap(),
        }
        let pad = match m.temporal_pad {
            TemporalPad::Zero => "zero",
            TemporalPad::Circular => "circular",
        };
        writeln!(s, "model.temporal_pad = {pad}").unwrap();
        writeln!(s, "loss.alpha = {}", join_list(&m.loss_alpha)).unwrap();
        writeln!(s, "loss.beta = {}", join_list(&m.loss_beta)).unwrap();
        let t = &self.train;
        writeln!(s, "train.epochs = {}", t.epochs).unwrap();
        writeln!(s, "train.batch = {}", t.batch_size).unwrap();
        writeln!(s, "train.lr0 = {}", t.lr0).unwrap();
        writeln!(s, "train.decay = {}", t.decay).unwrap();
        writeln!(s, "train.seed = {}", t.seed).unwrap();
        if let Some(every) = t.checkpoint_every {
            writeln!(s, "train.checkpoint_every = {every}").unwrap();
        }
        writeln!(s, "eval.error_map_max = {}", self.error_map_max).unwrap();
        if let Some(x) = self.yt_x {
            writeln!(s, "eval.yt_x = {x}").unwrap();
        }
        if !self.sweep_alpha1.is_empty() {
            writeln!(s, "sweep.alpha1 = {}", join_list(&self.sweep_alpha1)).unwrap();
        }
        writeln!(s, "output.dir = {}", self.output_dir.display()).unwrap();
        s
    }
}

fn join_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_kernel(text: &str) -> Result<(usize, usize, usize)> {
    let parts: Vec<&str> = text.split('x').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!(
            "model.kernel must look like 3x3x3, got '{text}'"
        )));
    }
    let parse = |s: &str| {
        s.trim()
            .parse()
            .map_err(|_| Error::Config(format!("model.kernel: bad size '{s}'")))
    };
    Ok((parse(parts[0])?, parse(parts[1])?, parse(parts[2])?))
}

fn parse_dc_lambda(text: &str) -> Result<DcWeight> {
    if text.eq_ignore_ascii_case("inf") || text.eq_ignore_ascii_case("infinite") {
        return Ok(DcWeight::Infinite);
    }
    let v: f64 = text
        .parse()
        .map_err(|_| Error::Config(format!("model.dc_lambda: cannot parse '{text}'")))?;
    let w = DcWeight::Finite(v);
    w.validate()?;
    Ok(w)
}
