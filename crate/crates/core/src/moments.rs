//! Closed-form hidden moments, variances, squeezing function, degree of hidden
//! polarization and onset time, each paired with a truncated-Fock oracle.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dynamics::bogoliubov;
use crate::error::{HopsError, Result};
use crate::fock::{coherent_state, FockSpace, PairPropagator, StateVector, C64};
use crate::polarization::{hidden_operators, OperatorQuad};

/// Below this, `sin(delta_h)` is treated as exactly zero so that `delta_h = pi`
/// behaves like `delta_h = 0`.
pub const SIN_SNAP: f64 = 1e-12;
const CONSISTENCY_TOLERANCE: f64 = 1e-9;
const BISECTION_TOLERANCE: f64 = 1e-10;
const ONSET_KT_MAX: f64 = 2.0;
const ONSET_KT_MIN: f64 = 1e-8;
const ONSET_SAMPLES: usize = 400;

/// Coherent pump parameterised by `|alpha_x|^2`, `|p_h|` and `Delta_h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopsInput {
    pub ax_sq: f64,
    pub ph_mag: f64,
    pub delta_h: f64,
}

impl HopsInput {
    pub fn new(ax_sq: f64, ph_mag: f64, delta_h: f64) -> Result<Self> {
        let inp = Self { ax_sq, ph_mag, delta_h };
        inp.validate()?;
        Ok(inp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ax_sq.is_finite() && self.ax_sq >= 0.0) {
            return Err(HopsError::InvalidInput(format!("ax_sq must be finite and >= 0, got {}", self.ax_sq)));
        }
        if !(self.ph_mag.is_finite() && self.ph_mag >= 0.0) {
            return Err(HopsError::InvalidInput(format!("ph_mag must be finite and >= 0, got {}", self.ph_mag)));
        }
        if !(self.delta_h > -PI && self.delta_h <= PI) {
            return Err(HopsError::InvalidInput(format!("delta_h must lie in (-pi, pi], got {}", self.delta_h)));
        }
        Ok(())
    }

    pub fn sin_delta(&self) -> f64 {
        let s = self.delta_h.sin();
        if s.abs() < SIN_SNAP {
            0.0
        } else {
            s
        }
    }

    pub fn cos_delta(&self) -> f64 {
        let c = self.delta_h.cos();
        if c.abs() < SIN_SNAP {
            0.0
        } else {
            c
        }
    }

    /// `|alpha_x|^2 (1 + |p_h|^2)`, the mean total photon number of the pump.
    pub fn total_photons(&self) -> f64 {
        self.ax_sq * (1.0 + self.ph_mag * self.ph_mag)
    }

    /// Complex amplitudes with `phi_x = zeta + Delta_h/2` and `alpha_y = p_h alpha_x^*`.
    pub fn amplitudes(&self, zeta: f64) -> (C64, C64) {
        let ax = C64::from_polar(self.ax_sq.sqrt(), zeta + self.delta_h / 2.0);
        let ph = C64::from_polar(self.ph_mag, self.delta_h);
        (ax, ph * ax.conj())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HiddenMoments {
    pub h0: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

impl HiddenMoments {
    pub fn as_array(&self) -> [f64; 4] {
        [self.h0, self.h1, self.h2, self.h3]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarianceKind {
    ClosedForm,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HiddenVariances {
    pub v0: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub source: VarianceKind,
    /// Set when a closed-form value came out negative.
    pub negative: bool,
}

impl HiddenVariances {
    pub fn as_array(&self) -> [f64; 4] {
        [self.v0, self.v1, self.v2, self.v3]
    }
}

pub fn hidden_moments(inp: &HopsInput, kt: f64) -> Result<HiddenMoments> {
    let b = bogoliubov(kt)?;
    let n = inp.total_photons();
    let q = inp.ax_sq * inp.ph_mag;
    let s = inp.sin_delta();
    Ok(HiddenMoments {
        h0: n * b.c4 - 2.0 * q * b.s4 * s + 2.0 * b.s2 * b.s2,
        h1: inp.ax_sq * (inp.ph_mag * inp.ph_mag - 1.0),
        h2: 2.0 * q * inp.cos_delta(),
        h3: 2.0 * q * b.c4 * s - (1.0 + n) * b.s4,
    })
}

fn shared_variance_term(inp: &HopsInput, kt: f64) -> Result<f64> {
    let b = bogoliubov(kt)?;
    let q = inp.ax_sq * inp.ph_mag;
    Ok(inp.total_photons() * b.c8() - 2.0 * q * b.s8() * inp.sin_delta() + b.s4 * b.s4)
}

/// Closed-form variances, with `var(H3)` carrying the printed constant `-1`.
pub fn closed_form_variances(inp: &HopsInput, kt: f64) -> Result<HiddenVariances> {
    let shared = shared_variance_term(inp, kt)?;
    let n = inp.total_photons();
    let v = [shared, n, 1.0 + n, shared - 1.0];
    Ok(HiddenVariances {
        v0: v[0],
        v1: v[1],
        v2: v[2],
        v3: v[3],
        source: VarianceKind::ClosedForm,
        negative: v.iter().any(|x| *x < 0.0),
    })
}

/// `var(H3)` obtained from `H3(t) = C4 H3 - S4 (1 + H0)` on a coherent input;
/// it exceeds the printed closed form by exactly 2.
pub fn var_h3_derived(inp: &HopsInput, kt: f64) -> Result<f64> {
    Ok(shared_variance_term(inp, kt)? + 1.0)
}

pub enum VarianceSource<'a> {
    ClosedForm,
    Oracle(&'a MomentOracle),
}

pub fn hidden_variances(inp: &HopsInput, kt: f64, source: VarianceSource<'_>) -> Result<HiddenVariances> {
    match source {
        VarianceSource::ClosedForm => closed_form_variances(inp, kt),
        VarianceSource::Oracle(oracle) => Ok(oracle.evaluate(inp, kt, 0.0)?.variances),
    }
}

/// Truncated-Fock evaluation of the same quantities on the evolved coherent state.
#[derive(Debug, Clone)]
pub struct MomentOracle {
    space: FockSpace,
    hidden: OperatorQuad,
    propagator: PairPropagator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleEvaluation {
    pub moments: HiddenMoments,
    pub variances: HiddenVariances,
    /// Probability in the two outermost number shells after evolution.
    pub shell_mass: f64,
}

impl MomentOracle {
    pub fn new(n_max: usize) -> Result<Self> {
        let space = FockSpace::new(n_max)?;
        Ok(Self { hidden: hidden_operators(&space, 0.0), propagator: PairPropagator::new(&space), space })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn hidden(&self) -> &OperatorQuad {
        &self.hidden
    }

    /// Coherent input evolved for `kt` under `2k (a_x a_y + h.c.)`.
    pub fn evolved_state(&self, inp: &HopsInput, kt: f64, zeta: f64) -> Result<StateVector> {
        bogoliubov(kt)?;
        let (ax, ay) = inp.amplitudes(zeta);
        let psi = coherent_state(&self.space, ax, ay)?;
        self.propagator.evolve(&psi, 2.0, kt)
    }

    pub fn evaluate(&self, inp: &HopsInput, kt: f64, zeta: f64) -> Result<OracleEvaluation> {
        let state = self.evolved_state(inp, kt, zeta)?;
        let h = self.hidden.expectations(&state)?;
        let v = self.hidden.variances(&state)?;
        Ok(OracleEvaluation {
            moments: HiddenMoments { h0: h[0], h1: h[1], h2: h[2], h3: h[3] },
            variances: HiddenVariances {
                v0: v[0],
                v1: v[1],
                v2: v[2],
                v3: v[3],
                source: VarianceKind::Oracle,
                negative: false,
            },
            shell_mass: crate::fock::shell_mass(&state, 2),
        })
    }
}

/// The squeezing function `|C4 - 2 S4 sin(Delta_h) / (|p_h| + |p_h|^-1 (1 + |alpha_x|^-2))|`.
pub fn squeezing_function(inp: &HopsInput, kt: f64) -> Result<f64> {
    inp.validate()?;
    let b = bogoliubov(kt)?;
    if inp.ax_sq == 0.0 || inp.ph_mag == 0.0 {
        return Ok(b.c4);
    }
    let den = inp.ph_mag + (1.0 + 1.0 / inp.ax_sq) / inp.ph_mag;
    Ok((b.c4 - 2.0 * b.s4 * inp.sin_delta() / den).abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqueezingReport {
    pub sq: f64,
    pub squeezed_h2: bool,
    /// Left minus right of the six variance inequalities, in the order
    /// `v0-|h3|, v2-|h3|, v2-|1+h0|, v3-|1+h0|, v3-|h2|, v0-|h2|`.
    pub inequality_margins: [f64; 6],
    pub margin_source: VarianceKind,
}

impl SqueezingReport {
    /// Margin of the `H2` inequality against `|1 + h0|`.
    pub fn h2_margin(&self) -> f64 {
        self.inequality_margins[2]
    }
}

fn inequality_margins(h: &HiddenMoments, v: &HiddenVariances) -> [f64; 6] {
    let (b3, b0, b2) = (h.h3.abs(), (1.0 + h.h0).abs(), h.h2.abs());
    [v.v0 - b3, v.v2 - b3, v.v2 - b0, v.v3 - b0, v.v3 - b2, v.v0 - b2]
}

/// Squeezing verdict plus all six inequality margins. With an oracle the margins
/// use measured moments and variances; otherwise the closed forms.
///
/// Fails with [`HopsError::Consistency`] if `Sq > 1` disagrees with
/// `var(H2) < |1 + h0|` by more than 1e-9.
pub fn squeezing_report(inp: &HopsInput, kt: f64, oracle: Option<&MomentOracle>) -> Result<SqueezingReport> {
    let sq = squeezing_function(inp, kt)?;
    let (moments, variances) = match oracle {
        Some(o) => {
            let ev = o.evaluate(inp, kt, 0.0)?;
            (ev.moments, ev.variances)
        }
        None => (hidden_moments(inp, kt)?, closed_form_variances(inp, kt)?),
    };
    let margins = inequality_margins(&moments, &variances);
    let squeezed_h2 = sq > 1.0;
    let h2_margin = margins[2];
    let scale = (1.0 + moments.h0).abs().max(1.0);
    if squeezed_h2 != (h2_margin < 0.0) && h2_margin.abs() > CONSISTENCY_TOLERANCE * scale {
        return Err(HopsError::Consistency(format!(
            "Sq = {sq} but var(H2) - |1 + h0| = {h2_margin} at kt = {kt}, input {inp:?}"
        )));
    }
    Ok(SqueezingReport { sq, squeezed_h2, inequality_margins: margins, margin_source: variances.source })
}

/// Degree of hidden polarization `sqrt(h1^2 + h2^2 + h3^2) / h0`.
pub fn degree_hidden(inp: &HopsInput, kt: f64) -> Result<f64> {
    let h = hidden_moments(inp, kt)?;
    if h.h0 <= 0.0 {
        return Err(HopsError::ZeroIntensity);
    }
    Ok((h.h1 * h.h1 + h.h2 * h.h2 + h.h3 * h.h3).sqrt() / h.h0)
}

fn check_onset_inputs(inp: &HopsInput, k: f64) -> Result<()> {
    inp.validate()?;
    if !(k.is_finite() && k > 0.0) {
        return Err(HopsError::InvalidInput(format!("coupling k must be positive, got {k}")));
    }
    if inp.ax_sq <= 0.0 || inp.ph_mag <= 0.0 {
        return Err(HopsError::InvalidInput("critical time needs ax_sq > 0 and ph_mag > 0".into()));
    }
    Ok(())
}

/// Time after which the degree of hidden polarization exceeds 1:
/// `t0 = atanh[2 |p_h| sin(Delta_h) / (|alpha_x|^-2 + 1 + |p_h|^2)] / (2k)`.
///
/// Returns `None` when `sin(Delta_h) <= 0`, where the degree exceeds 1 for every `t > 0`.
pub fn critical_time(inp: &HopsInput, k: f64) -> Result<Option<f64>> {
    check_onset_inputs(inp, k)?;
    let s = inp.sin_delta();
    if s <= 0.0 {
        return Ok(None);
    }
    let arg = 2.0 * inp.ph_mag * s / (1.0 / inp.ax_sq + 1.0 + inp.ph_mag * inp.ph_mag);
    Ok(Some(arg.atanh() / (2.0 * k)))
}

/// The threshold with argument `|p_h| sin(Delta_h) / (2 (|alpha_x|^-2 + 1 + |p_h|^2))`,
/// four times smaller than the exact crossing condition. Kept for comparison reports.
pub fn critical_time_printed(inp: &HopsInput, k: f64) -> Result<Option<f64>> {
    check_onset_inputs(inp, k)?;
    let s = inp.sin_delta();
    if s <= 0.0 {
        return Ok(None);
    }
    let arg = inp.ph_mag * s / (2.0 * (1.0 / inp.ax_sq + 1.0 + inp.ph_mag * inp.ph_mag));
    Ok(Some(arg.atanh() / (2.0 * k)))
}

/// Bisection root of `degree_hidden(kt) = 1` on `kt in (0, 2]`, returned as a time `kt / k`.
///
/// The degree is sampled on a log-spaced grid from `kt = 1e-8`; if it already exceeds 1
/// at every sample the result is 0.
pub fn onset_time_numeric(inp: &HopsInput, k: f64) -> Result<f64> {
    check_onset_inputs(inp, k)?;
    let f = |kt: f64| degree_hidden(inp, kt).map(|d| d - 1.0);
    let ratio = (ONSET_KT_MAX / ONSET_KT_MIN).powf(1.0 / (ONSET_SAMPLES - 1) as f64);
    let mut prev = ONSET_KT_MIN;
    if f(prev)? > 0.0 {
        let all_above = (1..ONSET_SAMPLES)
            .map(|i| f(ONSET_KT_MIN * ratio.powi(i as i32)))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .all(|v| *v > 0.0);
        if all_above {
            return Ok(0.0);
        }
    }
    for i in 1..ONSET_SAMPLES {
        let kt = if i == ONSET_SAMPLES - 1 { ONSET_KT_MAX } else { ONSET_KT_MIN * ratio.powi(i as i32) };
        if f(prev)? <= 0.0 && f(kt)? > 0.0 {
            let (mut lo, mut hi) = (prev, kt);
            while hi - lo > BISECTION_TOLERANCE {
                let mid = 0.5 * (lo + hi);
                if f(mid)? > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(0.5 * (lo + hi) / k);
        }
        prev = kt;
    }
    Err(HopsError::NoCrossing)
}
