use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exec::Execution;

use super::models::{ModelKind, ModelSpec};

/// Upper limit for the projection bond cap when it is given explicitly.
pub const MAX_CHI_P: usize = 4096;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum OverlapMethod {
    Sampling,
    Projection,
    Both,
}

impl FromStr for OverlapMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sampling" => Ok(OverlapMethod::Sampling),
            "projection" => Ok(OverlapMethod::Projection),
            "both" => Ok(OverlapMethod::Both),
            _ => Err(Error::InvalidArgument(format!("unknown method {s:?}"))),
        }
    }
}

impl fmt::Display for OverlapMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OverlapMethod::Sampling => "sampling",
            OverlapMethod::Projection => "projection",
            OverlapMethod::Both => "both",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub dt: f64,
    pub t_max: f64,
    /// TDVP bond dimension; `usize::MAX` for unbounded.
    pub chi: usize,
    /// Projection bond cap; `usize::MAX` for unbounded.
    pub chi_p: usize,
    pub method: OverlapMethod,
    pub n_samples: usize,
    pub seed: u64,
    pub disentangle: bool,
    /// Largest bond dimension allowed for the dressed Hamiltonian MPO.
    pub mpo_cap: usize,
    /// Pauli-sum text file replacing the model's Hamiltonian.
    pub hamiltonian: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub execution: Execution,
}

impl RunConfig {
    pub fn new(model: ModelSpec) -> Self {
        RunConfig {
            model,
            dt: 0.1,
            t_max: 1.0,
            chi: 32,
            chi_p: 32,
            method: OverlapMethod::Projection,
            n_samples: 10_000,
            seed: 0,
            disentangle: true,
            mpo_cap: 512,
            hamiltonian: None,
            out: None,
            checkpoint: None,
            execution: Execution::default(),
        }
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt + 1e-9).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return bad("t_max must be non-negative");
        }
        if self.t_max > 0.0 && self.t_max + 1e-12 < self.dt {
            return bad("t_max must be 0 or at least dt");
        }
        if self.chi == 0 || self.chi_p == 0 || self.mpo_cap == 0 {
            return bad("chi, chi_p and mpo_cap must be at least 1");
        }
        if self.chi_p != usize::MAX && self.chi_p > MAX_CHI_P {
            return bad("chi_p above the supported maximum; use `inf` for unbounded");
        }
        if self.method != OverlapMethod::Projection && self.n_samples == 0 {
            return bad("samples must be at least 1 when sampling");
        }
        Ok(())
    }

    /// Parses flat `key = value` text. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut size = None;
        let mut field = 1.0;
        let mut cfg = RunConfig::new(ModelSpec { kind: ModelKind::Tfim1d, size: 2, field: 1.0 });
        let mut chi_p_set = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: i + 1, msg };
            let (key, value) = line.split_once('=').ok_or_else(|| perr("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| v.parse::<f64>().map_err(|_| perr(format!("{key}: not a number: {v:?}")));
            let int = |v: &str| v.parse::<u64>().map_err(|_| perr(format!("{key}: not an integer: {v:?}")));
            let bond = |v: &str| -> Result<usize> {
                if v == "inf" {
                    Ok(usize::MAX)
                } else {
                    Ok(int(v)? as usize)
                }
            };
            match key {
                "model" => kind = Some(value.parse::<ModelKind>().map_err(|e| perr(e.to_string()))?),
                "n" | "l" => size = Some(int(value)? as usize),
                "h" => field = num(value)?,
                "dt" => cfg.dt = num(value)?,
                "t_max" => cfg.t_max = num(value)?,
                "chi" => cfg.chi = bond(value)?,
                "chi_p" => {
                    cfg.chi_p = bond(value)?;
                    chi_p_set = true;
                }
                "method" => cfg.method = value.parse().map_err(|e: Error| perr(e.to_string()))?,
                "samples" => cfg.n_samples = int(value)? as usize,
                "seed" => cfg.seed = int(value)?,
                "disentangle" => {
                    cfg.disentangle = match value {
                        "on" | "true" | "yes" | "1" => true,
                        "off" | "false" | "no" | "0" => false,
                        _ => return Err(perr(format!("disentangle: expected on/off, got {value:?}"))),
                    }
                }
                "mpo_cap" => cfg.mpo_cap = int(value)? as usize,
                "hamiltonian" => cfg.hamiltonian = Some(PathBuf::from(value)),
                "out" => cfg.out = Some(PathBuf::from(value)),
                "checkpoint" => cfg.checkpoint = Some(PathBuf::from(value)),
                _ => return Err(perr(format!("unknown key {key:?}"))),
            }
        }
        let kind = kind.ok_or_else(|| Error::Parse { line: 0, msg: "missing `model`".into() })?;
        let size = size.ok_or_else(|| Error::Parse { line: 0, msg: "missing `n` (or `l` for ising2d)".into() })?;
        cfg.model = ModelSpec { kind, size, field };
        if !chi_p_set {
            cfg.chi_p = cfg.chi;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}
