//! Experiment configuration: a JSON file overlaid by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use qlse_core::driver::{Method, Mode};
use qlse_core::problem::SpectrumShape;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Qef,
    Qrt,
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<Method> {
        match self {
            Self::Qef => vec![Method::Qef],
            Self::Qrt => vec![Method::Qrt],
            Self::Both => vec![Method::Qef, Method::Qrt],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeChoice {
    Exact,
    Sampled,
}

impl From<ModeChoice> for Mode {
    fn from(m: ModeChoice) -> Self {
        match m {
            ModeChoice::Exact => Mode::Exact,
            ModeChoice::Sampled => Mode::Sampled,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeChoice {
    Geometric,
    #[value(name = "two_cluster")]
    TwoCluster,
    Linear,
}

impl From<ShapeChoice> for SpectrumShape {
    fn from(s: ShapeChoice) -> Self {
        match s {
            ShapeChoice::Geometric => SpectrumShape::Geometric,
            ShapeChoice::TwoCluster => SpectrumShape::TwoCluster,
            ShapeChoice::Linear => SpectrumShape::Linear,
        }
    }
}

/// Flags shared by every subcommand. Each one overrides the config file.
#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// JSON config file; flags given on the command line take precedence
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// System sizes, comma separated
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Condition numbers, comma separated
    #[arg(long, value_delimiter = ',')]
    pub kappa: Option<Vec<f64>>,
    /// Target accuracies, comma separated
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Row sparsity of the augmented matrix (default: dense, N + 1)
    #[arg(long)]
    pub sparsity: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    /// Measurement shots in sampled mode
    #[arg(long)]
    pub shots: Option<usize>,
    /// Seeds, comma separated
    #[arg(long, value_delimiter = ',')]
    pub seed: Option<Vec<u64>>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeChoice>,
    #[arg(long, value_enum)]
    pub spectrum: Option<ShapeChoice>,
    /// Output file (solve, sweep, verify) or directory (gen)
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all hardware threads)
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Instance files or directories of them
    pub inputs: Vec<PathBuf>,
}

/// Contents of a `--config` file; every field is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<String>,
    #[serde(alias = "N")]
    pub n: Option<Vec<usize>>,
    pub kappa: Option<Vec<f64>>,
    pub epsilon: Option<Vec<f64>>,
    pub s: Option<usize>,
    pub shots: Option<usize>,
    pub method: Option<MethodChoice>,
    pub seeds: Option<Vec<u64>>,
    pub spectrum_shape: Option<ShapeChoice>,
    pub out: Option<PathBuf>,
    pub mode: Option<ModeChoice>,
    pub jobs: Option<usize>,
    pub inputs: Option<Vec<PathBuf>>,
}

/// Fully resolved configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub n: Vec<usize>,
    pub kappa: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub sparsity: Option<usize>,
    pub method: MethodChoice,
    pub shots: usize,
    pub seeds: Vec<u64>,
    pub spectrum: SpectrumShape,
    pub mode: Mode,
    pub out: Option<PathBuf>,
    pub jobs: usize,
    pub inputs: Vec<PathBuf>,
}

impl ExperimentConfig {
    pub fn resolve(command: &str, flags: Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let cfg: FileConfig = serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                if let Some(c) = &cfg.command {
                    if c != command {
                        return Err(CliError::Usage(format!(
                            "{} is a config for `{c}`, not `{command}`",
                            path.display()
                        )));
                    }
                }
                cfg
            }
            None => FileConfig::default(),
        };
        let cfg = Self {
            n: flags.n.or(file.n).unwrap_or_else(|| vec![8]),
            kappa: flags.kappa.or(file.kappa).unwrap_or_else(|| vec![10.0]),
            epsilon: flags.eps.or(file.epsilon).unwrap_or_else(|| vec![1e-6]),
            sparsity: flags.sparsity.or(file.s),
            method: flags.method.or(file.method).unwrap_or(MethodChoice::Qef),
            shots: flags.shots.or(file.shots).unwrap_or(10_000),
            seeds: flags.seed.or(file.seeds).unwrap_or_else(|| vec![1]),
            spectrum: flags
                .spectrum
                .or(file.spectrum_shape)
                .unwrap_or(ShapeChoice::Geometric)
                .into(),
            mode: flags.mode.or(file.mode).unwrap_or(ModeChoice::Exact).into(),
            out: flags.out.or(file.out),
            jobs: flags
                .jobs
                .or(file.jobs)
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            inputs: if flags.inputs.is_empty() {
                file.inputs.unwrap_or_default()
            } else {
                flags.inputs
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        if self.n.is_empty()
            || self.kappa.is_empty()
            || self.epsilon.is_empty()
            || self.seeds.is_empty()
        {
            return usage("the N, kappa, epsilon and seed lists must be non-empty".into());
        }
        if let Some(&n) = self.n.iter().find(|&&n| n < 2) {
            return usage(format!("N = {n}; need N >= 2"));
        }
        if let Some(&k) = self.kappa.iter().find(|&&k| !(k >= 1.0 && k.is_finite())) {
            return usage(format!("kappa = {k}; need a finite kappa >= 1"));
        }
        if let Some(&e) = self.epsilon.iter().find(|&&e| !(e > 0.0 && e <= 0.1)) {
            return usage(format!("epsilon = {e}; need 0 < epsilon <= 0.1"));
        }
        if let Some(s) = self.sparsity {
            let smallest = self.n.iter().min().copied().unwrap_or(2);
            if s < 2 || s > smallest + 1 {
                return usage(format!(
                    "sparsity {s} must lie in [2, N + 1] for every N (smallest N is {smallest})"
                ));
            }
        }
        if self.shots == 0 {
            return usage("shots must be at least 1".into());
        }
        if self.jobs == 0 {
            return usage("jobs must be at least 1".into());
        }
        Ok(())
    }

    /// Sparsity used for an `n`-dimensional instance.
    pub fn sparsity_for(&self, n: usize) -> usize {
        self.sparsity.unwrap_or(n + 1)
    }

    pub fn methods(&self) -> Vec<Method> {
        self.method.methods()
    }

    /// Instance files named on the command line, with directories expanded
    /// to their `*.json` entries in sorted order.
    pub fn input_files(&self) -> Result<Vec<PathBuf>, CliError> {
        let mut files = Vec::new();
        for path in &self.inputs {
            if path.is_dir() {
                let mut entries: Vec<PathBuf> = fs::read_dir(path)
                    .map_err(|e| CliError::io(path, e))?
                    .filter_map(|entry| entry.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
                    .collect();
                entries.sort();
                files.extend(entries);
            } else if path.exists() {
                files.push(path.clone());
            } else {
                return Err(CliError::io(
                    path,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
                ));
            }
        }
        Ok(files)
    }

    /// Checks that the parent of `--out` exists before any work starts.
    pub fn check_out_file(&self) -> Result<(), CliError> {
        if let Some(out) = &self.out {
            let parent = out
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            if !parent.is_dir() {
                return Err(CliError::io(
                    out,
                    std::io::Error::new(
                        std::io::ErrorKind::NotFound,
                        "parent directory does not exist",
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn thread_pool(&self) -> Result<rayon::ThreadPool, CliError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {} worker threads: {e}", self.jobs)))
    }
}
