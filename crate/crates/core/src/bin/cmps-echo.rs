use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::Parser;

use cmps_echo::harness::{run_echo_with, write_csv, CSV_HEADER, EchoRow, OverlapMethod, RunConfig};
use cmps_echo::mps::checkpoint;

/// Loschmidt echo runs with Clifford-dressed TDVP.
#[derive(Parser, Debug)]
#[command(version)]
struct Args {
    /// Run configuration (`key = value` lines). Repeat to run several in parallel.
    #[arg(long = "config", required = true)]
    configs: Vec<PathBuf>,
    /// TDVP bond dimension, or `inf`.
    #[arg(long)]
    chi: Option<String>,
    /// Projection bond cap, or `inf`.
    #[arg(long = "chi-p")]
    chi_p: Option<String>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    /// sampling, projection or both.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "no-disentangle")]
    no_disentangle: bool,
    /// Output CSV; only valid with a single config. Defaults to the config's
    /// `out`, or standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_bond(s: &str) -> anyhow::Result<usize> {
    if s == "inf" {
        return Ok(usize::MAX);
    }
    s.parse().with_context(|| format!("bad bond dimension {s:?}"))
}

fn build_config(path: &Path, args: &Args) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::load(path).with_context(|| format!("reading {}", path.display()))?;
    if let Some(c) = &args.chi {
        cfg.chi = parse_bond(c)?;
    }
    if let Some(c) = &args.chi_p {
        cfg.chi_p = parse_bond(c)?;
    }
    if let Some(dt) = args.dt {
        cfg.dt = dt;
    }
    if let Some(t) = args.t_max {
        cfg.t_max = t;
    }
    if let Some(m) = &args.method {
        cfg.method = m.parse::<OverlapMethod>()?;
    }
    if let Some(s) = args.samples {
        cfg.n_samples = s;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.no_disentangle {
        cfg.disentangle = false;
    }
    if let Some(o) = &args.out {
        cfg.out = Some(o.clone());
    }
    cfg.validate().with_context(|| format!("invalid config {}", path.display()))?;
    Ok(cfg)
}

fn sampling_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".sampling.csv");
    PathBuf::from(s)
}

fn open_out(path: Option<&Path>) -> anyhow::Result<Box<dyn Write + Send>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout()),
    })
}

enum Outcome {
    Done,
    Failed(String),
}

fn run_one(name: &str, cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let mut out = open_out(cfg.out.as_deref())?;
    writeln!(out, "{CSV_HEADER}")?;
    let total = cfg.steps();
    let mut write_err = None;
    let trace = run_echo_with(cfg, |rec| {
        if write_err.is_none() {
            if let Err(e) = writeln!(out, "{}", rec.row.csv_line()) {
                write_err = Some(e);
            }
        }
        if rec.step % 10 == 0 {
            let r: &EchoRow = &rec.row;
            eprintln!(
                "[{name}] step {}/{total} t={:.4} L={:.6e} rate={:.6} chi={} S={:.4} gates={}",
                rec.step, r.t, r.echo, r.rate, r.max_chi, r.max_entropy, r.n_clifford_gates
            );
        }
    })?;
    out.flush()?;
    if let Some(e) = write_err {
        return Err(e.into());
    }
    if cfg.method == OverlapMethod::Both {
        if let Some(p) = &cfg.out {
            let path = sampling_path(p);
            let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(BufWriter::new(f), &trace.sampling_rows)?;
        }
    }
    if let Some(p) = &cfg.checkpoint {
        checkpoint::save(&trace.state, p)?;
        let mut c = p.as_os_str().to_owned();
        c.push(".circuit");
        std::fs::write(PathBuf::from(c), trace.circuit.to_text())?;
    }
    Ok(match trace.failure {
        Some(reason) => Outcome::Failed(reason),
        None => Outcome::Done,
    })
}

fn main() -> ExitCode {
    let args = Args::parse();
    let configs: anyhow::Result<Vec<RunConfig>> = (|| {
        if args.configs.len() > 1 && args.out.is_some() {
            bail!("--out applies to a single config");
        }
        let cfgs = args.configs.iter().map(|p| build_config(p, &args)).collect::<anyhow::Result<Vec<_>>>()?;
        if cfgs.len() > 1 {
            let mut outs: Vec<_> = cfgs.iter().map(|c| c.out.clone()).collect();
            if outs.iter().any(Option::is_none) {
                bail!("every config needs its own `out` when running several");
            }
            outs.sort();
            outs.dedup();
            if outs.len() != cfgs.len() {
                bail!("configs share an output file");
            }
        }
        Ok(cfgs)
    })();
    let configs = match configs {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };

    let results: Vec<anyhow::Result<Outcome>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .zip(&args.configs)
            .map(|(cfg, path)| {
                let name = path.file_stem().map(|x| x.to_string_lossy().into_owned()).unwrap_or_default();
                s.spawn(move || run_one(&name, cfg))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| bail!("worker panicked"))).collect()
    });

    let mut code = 0;
    for (res, path) in results.into_iter().zip(&args.configs) {
        match res {
            Ok(Outcome::Done) => {}
            Ok(Outcome::Failed(reason)) => {
                eprintln!("{}: run stopped early at {reason}", path.display());
                code = 2;
            }
            Err(e) => {
                eprintln!("{}: {e:#}", path.display());
                code = 2;
            }
        }
    }
    ExitCode::from(code)
}
