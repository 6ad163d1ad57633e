//! `hops`: parameter sweeps, the verification report and the hidden-vs-Stokes demo.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use hops_core::ensembles::{hidden_vs_stokes_demo, write_demo_csv};
use hops_core::sweep::{self, OutputKind, Preset, Range, SweepConfig};
use hops_core::{run_verification, Grid};

#[derive(Parser)]
#[command(name = "hops", version, about = "Hidden optical-polarization simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the squeezing function, moments and variances over a (kt, delta_h) grid.
    Sweep(SweepArgs),
    /// Compare every closed form with the truncated Fock-space oracle.
    Verify(VerifyArgs),
    /// Stokes and hidden parameters of phase-averaged hidden and polarized ensembles.
    DemoHidden(DemoArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Fig1a,
    Fig1b,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputArg {
    Sq,
    Moments,
    Variances,
    Degree,
    Margins,
}

impl From<OutputArg> for OutputKind {
    fn from(o: OutputArg) -> Self {
        match o {
            OutputArg::Sq => OutputKind::Sq,
            OutputArg::Moments => OutputKind::Moments,
            OutputArg::Variances => OutputKind::Variances,
            OutputArg::Degree => OutputKind::Degree,
            OutputArg::Margins => OutputKind::Margins,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// Start from a figure preset; other flags override it.
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    /// JSON file with any subset of the sweep configuration fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    ax_sq: Option<f64>,
    #[arg(long)]
    ph_mag: Option<f64>,
    #[arg(long)]
    kt_min: Option<f64>,
    #[arg(long)]
    kt_max: Option<f64>,
    /// Number of kt values, both ends included.
    #[arg(long)]
    steps: Option<usize>,
    /// Angles accept plain radians or forms such as `pi`, `-pi/2`, `3pi/4`.
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    delta_min: Option<f64>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    delta_max: Option<f64>,
    /// Number of delta_h values in (delta_min, delta_max].
    #[arg(long)]
    delta_steps: Option<usize>,
    /// Column groups to emit, comma separated.
    #[arg(long, value_enum, value_delimiter = ',')]
    outputs: Option<Vec<OutputArg>>,
    /// Add truncated Fock-space oracle columns.
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    n_max: Option<usize>,
    /// CSV destination; a `.meta.json` sidecar is written next to it. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 24)]
    n_max: usize,
    /// Grid fixture; defaults to the pinned grid built into the binary.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Directory for `verify_report.txt` and `verify_report.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value_t = 2.0)]
    a0: f64,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "pi/2")]
    chi_h: f64,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "0")]
    delta_h: f64,
    #[arg(long, default_value_t = 64)]
    n_phases: usize,
    #[arg(long, default_value_t = 30)]
    n_max: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Partial sweep configuration as read from `--config`.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    preset: Option<Preset>,
    ax_sq: Option<f64>,
    ph_mag: Option<f64>,
    kt_range: Option<Range>,
    delta_range: Option<Range>,
    outputs: Option<Vec<OutputKind>>,
    oracle: Option<bool>,
    n_max: Option<usize>,
}

enum Failure {
    Usage(anyhow::Error),
    Verification(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.into())
    }
}

fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let (sign, rest) = match t.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, t.trim_start_matches('+')),
    };
    let (num, den) = match rest.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().map_err(|_| format!("bad angle `{s}`"))?),
        None => (rest, 1.0),
    };
    let coeff = match num.strip_suffix("pi") {
        Some("") => 1.0,
        Some(c) => c.trim_end_matches('*').parse::<f64>().map_err(|_| format!("bad angle `{s}`"))?,
        None => return Err(format!("bad angle `{s}`")),
    };
    Ok(sign * coeff * std::f64::consts::PI / den)
}

fn build_config(args: &SweepArgs) -> anyhow::Result<SweepConfig> {
    let file: ConfigFile = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ConfigFile::default(),
    };
    let preset = match args.preset {
        Some(PresetArg::Fig1a) => Preset::Fig1a,
        Some(PresetArg::Fig1b) => Preset::Fig1b,
        None => file.preset.unwrap_or(Preset::Fig1a),
    };
    let mut cfg = SweepConfig::preset(preset);
    cfg.ax_sq = args.ax_sq.or(file.ax_sq).unwrap_or(cfg.ax_sq);
    cfg.ph_mag = args.ph_mag.or(file.ph_mag).unwrap_or(cfg.ph_mag);
    if let Some(r) = file.kt_range {
        cfg.kt_range = r;
    }
    if let Some(r) = file.delta_range {
        cfg.delta_range = r;
    }
    if let Some(o) = file.outputs {
        cfg.outputs = o;
    }
    cfg.oracle = args.oracle || file.oracle.unwrap_or(cfg.oracle);
    cfg.n_max = args.n_max.or(file.n_max).unwrap_or(cfg.n_max);
    cfg.kt_range.min = args.kt_min.unwrap_or(cfg.kt_range.min);
    cfg.kt_range.max = args.kt_max.unwrap_or(cfg.kt_range.max);
    cfg.kt_range.steps = args.steps.unwrap_or(cfg.kt_range.steps);
    cfg.delta_range.min = args.delta_min.unwrap_or(cfg.delta_range.min);
    cfg.delta_range.max = args.delta_max.unwrap_or(cfg.delta_range.max);
    cfg.delta_range.steps = args.delta_steps.unwrap_or(cfg.delta_range.steps);
    if let Some(o) = &args.outputs {
        cfg.outputs = o.iter().map(|&k| k.into()).collect();
    }
    cfg.validate().map_err(|e| anyhow!("invalid sweep configuration: {e}"))?;
    Ok(cfg)
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    out.with_file_name(name)
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let cfg = build_config(args)?;
    let rows = sweep::run_sweep(&cfg).map_err(|e| anyhow!("sweep failed: {e}"))?;
    match &args.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
            sweep::write_csv(&cfg, &rows, &mut w)?;
            w.flush()?;
            let meta = serde_json::to_string_pretty(&sweep::metadata(&cfg, &rows))?;
            fs::write(sidecar_path(path), meta + "\n")?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            sweep::write_csv(&cfg, &rows, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let grid = match &args.grid {
        Some(path) => Grid::load(path).map_err(|e| anyhow!("{e}"))?,
        None => Grid::pinned(),
    };
    let report = run_verification(args.n_max, &grid).map_err(|e| anyhow!("{e}"))?;
    let text = report.to_text();
    print!("{text}");
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("verify_report.txt"), &text)?;
        let mut w = BufWriter::new(File::create(dir.join("verify_report.csv"))?);
        report.write_csv(&mut w)?;
        w.flush()?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{} check(s) failed", report.failures().count())))
    }
}

fn cmd_demo(args: &DemoArgs) -> Result<(), Failure> {
    let rows = hidden_vs_stokes_demo(args.a0, args.chi_h, args.delta_h, args.n_phases, args.n_max)
        .map_err(|e| anyhow!("{e}"))?;
    let mut summary = String::new();
    for r in &rows {
        let p = &r.params;
        summary.push_str(&format!(
            "{:<10} {:<9} s = ({:>8.4}, {:>8.4}, {:>8.4}, {:>8.4})  h = ({:>8.4}, {:>8.4}, {:>8.4}, {:>8.4})\n",
            r.ensemble, r.path, p.s[0], p.s[1], p.s[2], p.s[3], p.h[0], p.h[1], p.h[2], p.h[3]
        ));
    }
    match &args.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
            write_demo_csv(&rows, &mut w)?;
            w.flush()?;
            print!("{summary}");
        }
        None => {
            let stdout = io::stdout();
            write_demo_csv(&rows, stdout.lock())?;
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
        Command::DemoHidden(a) => cmd_demo(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("-pi/2").unwrap(), -PI / 2.0);
        assert_eq!(parse_angle("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_angle("2*pi/3").unwrap(), 2.0 * PI / 3.0);
        assert!(parse_angle("tau").is_err());
        assert!(parse_angle("pi/x").is_err());
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("/tmp/a.csv")), PathBuf::from("/tmp/a.csv.meta.json"));
    }
}
