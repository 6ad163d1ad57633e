//! Degenerate parametric amplifier: Bogoliubov coefficients, mean-amplitude
//! evolution, the evolved hidden-polarization index and Heisenberg-picture modes.
//!
//! Everything is in the rotating frame with the interaction `H_I = 2k (a_x a_y + h.c.)`,
//! so `kt` is the only time parameter.

use crate::error::{HopsError, Result};
use crate::fock::{mode_operator, FockSpace, Ladder, Mode, OperatorMatrix, C64};
use crate::polarization::ihop_of;

pub const MAX_KT: f64 = 5.0;
const POLE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovCoeffs {
    pub kt: f64,
    pub c2: f64,
    pub s2: f64,
    pub c4: f64,
    pub s4: f64,
    pub t2: f64,
}

impl BogoliubovCoeffs {
    pub fn c8(&self) -> f64 {
        (8.0 * self.kt).cosh()
    }

    pub fn s8(&self) -> f64 {
        (8.0 * self.kt).sinh()
    }
}

pub fn bogoliubov(kt: f64) -> Result<BogoliubovCoeffs> {
    if !kt.is_finite() || kt.abs() > MAX_KT {
        return Err(HopsError::KtOutOfRange(kt));
    }
    let x = 2.0 * kt;
    Ok(BogoliubovCoeffs { kt, c2: x.cosh(), s2: x.sinh(), c4: (2.0 * x).cosh(), s4: (2.0 * x).sinh(), t2: x.tanh() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolvedAmplitudes {
    pub alpha_x: C64,
    pub alpha_y: C64,
}

pub fn evolve_amplitudes(alpha_x: C64, alpha_y: C64, kt: f64) -> Result<EvolvedAmplitudes> {
    let b = bogoliubov(kt)?;
    let mis = C64::new(0.0, -b.s2);
    Ok(EvolvedAmplitudes {
        alpha_x: alpha_x * b.c2 + mis * alpha_y.conj(),
        alpha_y: alpha_y * b.c2 + mis * alpha_x.conj(),
    })
}

/// Hidden-polarization index after interaction time `kt`:
/// `(p_h - i T) / (1 + i p_h T)` with `T = tanh(2kt)`.
pub fn ihop_evolve(p_h: C64, kt: f64) -> Result<C64> {
    let t = bogoliubov(kt)?.t2;
    let i = C64::new(0.0, 1.0);
    let den = 1.0 + i * p_h * t;
    if den.norm() <= POLE_THRESHOLD {
        return Err(HopsError::MobiusPole);
    }
    Ok((p_h - i * t) / den)
}

/// The same index obtained by evolving the mean amplitudes and taking their ratio.
pub fn ihop_from_amplitudes(alpha_x: C64, alpha_y: C64, kt: f64) -> Result<C64> {
    let ev = evolve_amplitudes(alpha_x, alpha_y, kt)?;
    if ev.alpha_x.norm() <= POLE_THRESHOLD * alpha_x.norm().max(1.0) {
        return Err(HopsError::MobiusPole);
    }
    Ok(ihop_of(ev.alpha_x, ev.alpha_y)?.value)
}

/// Heisenberg-picture annihilators `A_x(t) = C2 a_x - i S2 a_y^dagger`,
/// `A_y(t) = C2 a_y - i S2 a_x^dagger`.
pub fn heisenberg_pair(space: &FockSpace, kt: f64) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let b = bogoliubov(kt)?;
    let c2 = C64::new(b.c2, 0.0);
    let mis = C64::new(0.0, -b.s2);
    let ax = mode_operator(space, Mode::X, Ladder::Annihilate);
    let ay = mode_operator(space, Mode::Y, Ladder::Annihilate);
    let ax_dag = mode_operator(space, Mode::X, Ladder::Create);
    let ay_dag = mode_operator(space, Mode::Y, Ladder::Create);
    Ok((&ax.scale(c2) + &ay_dag.scale(mis), &ay.scale(c2) + &ax_dag.scale(mis)))
}
