//! Parameter sweeps over `(kt, Delta_h)` producing deterministic CSV surfaces.

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::MAX_KT;
use crate::error::{HopsError, Result};
use crate::fock::MAX_CUTOFF;
use crate::moments::{
    closed_form_variances, critical_time, degree_hidden, hidden_moments, squeezing_report, HiddenMoments,
    HiddenVariances, HopsInput, MomentOracle, OracleEvaluation,
};

/// Largest `kt` the oracle propagator accepts (`g t = 2 kt <= 2`).
pub const ORACLE_KT_MAX: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Range {
    fn check(&self, name: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(HopsError::InvalidInput(format!("{name} range needs finite min <= max")));
        }
        if self.steps < 2 && !(self.steps == 1 && self.min == self.max) {
            return Err(HopsError::InvalidInput(format!(
                "{name} range needs steps >= 2 (steps = 1 only when min == max)"
            )));
        }
        Ok(())
    }

    /// `steps` evenly spaced values from `min` to `max` inclusive.
    pub fn closed(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| if i + 1 == self.steps { self.max } else { self.min + h * i as f64 }).collect()
    }

    /// `steps` evenly spaced values in `(min, max]`, ending exactly at `max`.
    pub fn half_open(&self) -> Vec<f64> {
        let h = (self.max - self.min) / self.steps as f64;
        (1..=self.steps).map(|i| if i == self.steps { self.max } else { self.min + h * i as f64 }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Sq,
    Moments,
    Variances,
    Degree,
    Margins,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig1a,
    Fig1b,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub ax_sq: f64,
    pub ph_mag: f64,
    /// Interaction times, inclusive of both ends.
    pub kt_range: Range,
    /// Phase sums in `(min, max]`.
    pub delta_range: Range,
    pub outputs: Vec<OutputKind>,
    pub oracle: bool,
    pub n_max: usize,
}

impl SweepConfig {
    pub fn preset(p: Preset) -> Self {
        let (ax_sq, ph_mag) = match p {
            Preset::Fig1a => (1.0, 1.0),
            Preset::Fig1b => (0.5, 5.0),
        };
        Self {
            ax_sq,
            ph_mag,
            kt_range: Range { min: 0.0, max: 1.0, steps: 50 },
            delta_range: Range { min: -PI, max: PI, steps: 72 },
            outputs: vec![OutputKind::Sq, OutputKind::Moments, OutputKind::Variances, OutputKind::Degree],
            oracle: false,
            n_max: 24,
        }
    }

    pub fn wants(&self, kind: OutputKind) -> bool {
        self.outputs.contains(&kind)
    }

    pub fn validate(&self) -> Result<()> {
        HopsInput::new(self.ax_sq, self.ph_mag, 0.0)?;
        self.kt_range.check("kt")?;
        self.delta_range.check("delta")?;
        if self.kt_range.min < 0.0 || self.kt_range.max > MAX_KT {
            return Err(HopsError::InvalidInput(format!("kt range must lie within [0, {MAX_KT}]")));
        }
        if self.delta_range.min < -PI || self.delta_range.max > PI {
            return Err(HopsError::InvalidInput("delta range must lie within [-pi, pi]".into()));
        }
        if self.delta_grid().iter().any(|d| *d <= -PI) {
            return Err(HopsError::InvalidInput("delta grid would contain -pi; use (min, max] with max > -pi".into()));
        }
        if self.oracle {
            if self.n_max == 0 || self.n_max > MAX_CUTOFF {
                return Err(HopsError::CutoffOutOfRange(self.n_max));
            }
            if self.kt_range.max > ORACLE_KT_MAX {
                return Err(HopsError::InvalidInput(format!("oracle columns need kt <= {ORACLE_KT_MAX}")));
            }
        }
        Ok(())
    }

    pub fn kt_grid(&self) -> Vec<f64> {
        self.kt_range.closed()
    }

    pub fn delta_grid(&self) -> Vec<f64> {
        if self.delta_range.steps == 1 {
            return vec![self.delta_range.max];
        }
        self.delta_range.half_open()
    }

    /// CSV header, in output order.
    pub fn columns(&self) -> Vec<&'static str> {
        let mut cols = vec!["kt", "delta_h"];
        if self.wants(OutputKind::Sq) {
            cols.push("sq");
        }
        if self.wants(OutputKind::Moments) {
            cols.extend(["h0", "h1", "h2", "h3"]);
        }
        if self.wants(OutputKind::Variances) {
            cols.extend(["v0", "v1", "v2", "v3"]);
        }
        if self.wants(OutputKind::Degree) {
            cols.push("degree");
        }
        if self.wants(OutputKind::Sq) {
            cols.push("squeezed");
        }
        if self.wants(OutputKind::Degree) {
            cols.push("t0");
        }
        if self.wants(OutputKind::Margins) {
            cols.extend(["m_v0_h3", "m_v2_h3", "m_v2_h0", "m_v3_h0", "m_v3_h2", "m_v0_h2"]);
        }
        if self.oracle {
            cols.extend([
                "oracle_h0",
                "oracle_h1",
                "oracle_h2",
                "oracle_h3",
                "oracle_v0",
                "oracle_v1",
                "oracle_v2",
                "oracle_v3",
                "oracle_squeezed",
                "oracle_status",
            ]);
        }
        cols
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub kt: f64,
    pub delta_h: f64,
    pub sq: f64,
    pub moments: HiddenMoments,
    pub variances: HiddenVariances,
    /// `None` when the total intensity vanishes.
    pub degree: Option<f64>,
    pub squeezed: bool,
    /// Onset `k t0` of degree > 1, when defined.
    pub t0: Option<f64>,
    pub margins: [f64; 6],
    pub oracle: Option<std::result::Result<OracleEvaluation, String>>,
}

fn status_label(e: &HopsError) -> String {
    match e {
        HopsError::TruncationOverflow { .. } => "truncation_overflow".into(),
        HopsError::InsufficientCutoff { .. } => "insufficient_cutoff".into(),
        HopsError::StepControl { .. } => "step_control".into(),
        other => format!("error: {other}").replace(',', ";"),
    }
}

fn evaluate_row(inp: HopsInput, kt: f64, oracle: Option<&MomentOracle>) -> Result<SweepRow> {
    let report = squeezing_report(&inp, kt, None)?;
    let t0 = if inp.ax_sq > 0.0 && inp.ph_mag > 0.0 { critical_time(&inp, 1.0)? } else { None };
    Ok(SweepRow {
        kt,
        delta_h: inp.delta_h,
        sq: report.sq,
        moments: hidden_moments(&inp, kt)?,
        variances: closed_form_variances(&inp, kt)?,
        degree: degree_hidden(&inp, kt).ok(),
        squeezed: report.squeezed_h2,
        t0,
        margins: report.inequality_margins,
        oracle: oracle.map(|o| o.evaluate(&inp, kt, 0.0).map_err(|e| status_label(&e))),
    })
}

/// Evaluates every grid point in parallel; rows come back ordered by `(kt, delta_h)`.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let oracle = if config.oracle { Some(MomentOracle::new(config.n_max)?) } else { None };
    let deltas = config.delta_grid();
    let cases: Vec<(f64, f64)> =
        config.kt_grid().into_iter().flat_map(|kt| deltas.iter().map(move |d| (kt, *d))).collect();
    cases
        .par_iter()
        .map(|&(kt, delta)| {
            let inp = HopsInput::new(config.ax_sq, config.ph_mag, delta)?;
            evaluate_row(inp, kt, oracle.as_ref())
        })
        .collect()
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(config: &SweepConfig, rows: &[SweepRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{}", config.columns().join(","))?;
    for r in rows {
        let mut cells = vec![num(r.kt), num(r.delta_h)];
        if config.wants(OutputKind::Sq) {
            cells.push(num(r.sq));
        }
        if config.wants(OutputKind::Moments) {
            cells.extend(r.moments.as_array().map(num));
        }
        if config.wants(OutputKind::Variances) {
            cells.extend(r.variances.as_array().map(num));
        }
        if config.wants(OutputKind::Degree) {
            cells.push(r.degree.map(num).unwrap_or_default());
        }
        if config.wants(OutputKind::Sq) {
            cells.push(r.squeezed.to_string());
        }
        if config.wants(OutputKind::Degree) {
            cells.push(r.t0.map(num).unwrap_or_default());
        }
        if config.wants(OutputKind::Margins) {
            cells.extend(r.margins.map(num));
        }
        match &r.oracle {
            None => {}
            Some(Ok(ev)) => {
                cells.extend(ev.moments.as_array().map(num));
                cells.extend(ev.variances.as_array().map(num));
                cells.push((ev.variances.v2 < (1.0 + ev.moments.h0).abs()).to_string());
                cells.push("ok".into());
            }
            Some(Err(status)) => {
                cells.extend(std::iter::repeat_n(String::new(), 9));
                cells.push(status.clone());
            }
        }
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMetadata<'a> {
    pub format_version: u32,
    pub config: &'a SweepConfig,
    pub columns: Vec<&'static str>,
    pub rows: usize,
    pub row_order: &'static str,
    pub t0_units: &'static str,
    pub oracle_failures: usize,
}

pub fn metadata<'a>(config: &'a SweepConfig, rows: &[SweepRow]) -> SweepMetadata<'a> {
    SweepMetadata {
        format_version: 1,
        config,
        columns: config.columns(),
        rows: rows.len(),
        row_order: "kt ascending, then delta_h ascending",
        t0_units: "k t0 (dimensionless interaction time)",
        oracle_failures: rows.iter().filter(|r| matches!(r.oracle, Some(Err(_)))).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(kt: f64, delta: f64) -> SweepConfig {
        SweepConfig {
            ax_sq: 1.0,
            ph_mag: 1.0,
            kt_range: Range { min: kt, max: kt, steps: 1 },
            delta_range: Range { min: delta, max: delta, steps: 1 },
            outputs: vec![OutputKind::Sq, OutputKind::Moments, OutputKind::Variances, OutputKind::Degree],
            oracle: false,
            n_max: 24,
        }
    }

    #[test]
    fn ranges() {
        assert_eq!(Range { min: 0.0, max: 1.0, steps: 3 }.closed(), vec![0.0, 0.5, 1.0]);
        let d = Range { min: -PI, max: PI, steps: 4 }.half_open();
        assert_eq!(d.len(), 4);
        assert_eq!(*d.last().unwrap(), PI);
        assert!((d[0] + PI / 2.0).abs() < 1e-15);
        assert!(Range { min: 0.0, max: 1.0, steps: 1 }.check("kt").is_err());
        assert!(Range { min: 0.5, max: 0.5, steps: 1 }.check("kt").is_ok());
        assert!(Range { min: 1.0, max: 0.0, steps: 4 }.check("kt").is_err());
    }

    #[test]
    fn presets_and_validation() {
        let a = SweepConfig::preset(Preset::Fig1a);
        assert_eq!((a.ax_sq, a.ph_mag), (1.0, 1.0));
        assert_eq!(a.kt_grid().len(), 50);
        assert_eq!(a.delta_grid().len(), 72);
        assert!(a.delta_grid().iter().all(|d| *d > -PI && *d <= PI));
        assert!(a.validate().is_ok());
        let b = SweepConfig::preset(Preset::Fig1b);
        assert_eq!((b.ax_sq, b.ph_mag), (0.5, 5.0));

        let mut bad = a.clone();
        bad.kt_range.max = 6.0;
        assert!(bad.validate().is_err());
        let mut bad = a.clone();
        bad.oracle = true;
        assert!(bad.validate().is_ok());
        bad.kt_range.max = 1.5;
        assert!(bad.validate().is_err());
        let mut bad = a.clone();
        bad.oracle = true;
        bad.n_max = 0;
        assert!(matches!(bad.validate(), Err(HopsError::CutoffOutOfRange(0))));
        let mut bad = single(0.1, -PI);
        assert!(bad.validate().is_err());
        bad.delta_range = Range { min: -PI, max: -PI, steps: 3 };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn single_point_row() {
        let cfg = single(0.25, 0.0);
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].moments.h0 - 3.62924).abs() < 1e-5);
        assert_eq!(rows[0].t0, None);
        let mut buf = Vec::new();
        write_csv(&cfg, &rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "kt,delta_h,sq,h0,h1,h2,h3,v0,v1,v2,v3,degree,squeezed,t0");
        let cells: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(cells.len(), 14);
        assert!((cells[3].parse::<f64>().unwrap() - 3.62924).abs() < 1e-5);
        assert_eq!(cells[12], "true");
        assert_eq!(cells[13], "");
    }

    #[test]
    fn rows_are_sorted_and_deterministic() {
        let mut cfg = SweepConfig::preset(Preset::Fig1a);
        cfg.kt_range.steps = 5;
        cfg.delta_range.steps = 8;
        let render = |cfg: &SweepConfig| {
            let mut buf = Vec::new();
            write_csv(cfg, &run_sweep(cfg).unwrap(), &mut buf).unwrap();
            buf
        };
        assert_eq!(render(&cfg), render(&cfg));
        let rows = run_sweep(&cfg).unwrap();
        for pair in rows.windows(2) {
            assert!((pair[0].kt, pair[0].delta_h) < (pair[1].kt, pair[1].delta_h));
        }
        assert!(rows.iter().filter(|r| r.kt == 0.0).all(|r| r.sq == 1.0));
    }

    #[test]
    fn oracle_columns_and_flags() {
        let mut cfg = single(0.1, 0.5);
        cfg.oracle = true;
        cfg.kt_range = Range { min: 0.1, max: 1.0, steps: 2 };
        cfg.outputs.push(OutputKind::Margins);
        let rows = run_sweep(&cfg).unwrap();
        assert!(matches!(rows[0].oracle, Some(Ok(_))));
        assert_eq!(rows[1].oracle, Some(Err("truncation_overflow".to_string())));
        let mut buf = Vec::new();
        write_csv(&cfg, &rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let widths: Vec<usize> = text.lines().map(|l| l.split(',').count()).collect();
        assert!(widths.iter().all(|w| *w == cfg.columns().len()));
        assert!(text.lines().nth(2).unwrap().ends_with(",,,,,,,,,truncation_overflow"));
        let meta = metadata(&cfg, &rows);
        assert_eq!(meta.oracle_failures, 1);

        cfg.n_max = 4;
        cfg.ax_sq = 4.0;
        let rows = run_sweep(&cfg).unwrap();
        assert!(rows.iter().all(|r| r.oracle == Some(Err("insufficient_cutoff".to_string()))));
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = SweepConfig::preset(Preset::Fig1b);
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"outputs\":[\"sq\",\"moments\",\"variances\",\"degree\"]"));
        let back: SweepConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }
}
