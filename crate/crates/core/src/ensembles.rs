//! Phase-randomised classical fields and their quantum counterparts: Stokes
//! parameters vanish on a hidden-polarized ensemble while the hidden parameters
//! survive, and the reverse holds for an ordinarily polarized ensemble.

use std::f64::consts::PI;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HopsError, Result};
use crate::fock::{coherent_state, FockSpace, StateVector, C64};
use crate::polarization::{hidden_operators, stokes_operators, BasisVector, OperatorQuad};

pub const MIN_PHASES: usize = 4;
const SINGULARITY_TOLERANCE: f64 = 1e-12;

/// Hidden-polarized field with fixed amplitude ratio and phase sum and a random
/// phase difference `zeta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopsEnsembleSpec {
    pub a0: f64,
    pub chi_h: f64,
    pub delta_h: f64,
    pub n_phases: usize,
}

impl HopsEnsembleSpec {
    pub fn amplitudes(&self, a0: f64, zeta: f64) -> (C64, C64) {
        let half = self.delta_h / 2.0;
        (
            C64::from_polar(a0 * (self.chi_h / 2.0).cos(), zeta + half),
            C64::from_polar(a0 * (self.chi_h / 2.0).sin(), -zeta + half),
        )
    }
}

/// Ordinarily polarized field along `cos(chi0/2) x + sin(chi0/2) e^{i delta0} y`
/// with a random common phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizedFieldSpec {
    pub a0: f64,
    pub chi0: f64,
    pub delta0: f64,
    pub n_phases: usize,
}

impl PolarizedFieldSpec {
    pub fn amplitudes(&self, a0: f64, phi: f64) -> (C64, C64) {
        (
            C64::from_polar(a0 * (self.chi0 / 2.0).cos(), phi),
            C64::from_polar(a0 * (self.chi0 / 2.0).sin(), self.delta0 + phi),
        )
    }

    pub fn direction(&self) -> BasisVector {
        BasisVector::from_angles(self.chi0, self.delta0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EnsembleSpec {
    Hops(HopsEnsembleSpec),
    Polarized(PolarizedFieldSpec),
}

impl EnsembleSpec {
    pub fn n_phases(&self) -> usize {
        match self {
            Self::Hops(s) => s.n_phases,
            Self::Polarized(s) => s.n_phases,
        }
    }

    pub fn a0(&self) -> f64 {
        match self {
            Self::Hops(s) => s.a0,
            Self::Polarized(s) => s.a0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Hops(_) => "hops",
            Self::Polarized(_) => "polarized",
        }
    }

    /// Field amplitudes at random phase `theta` (`zeta` or `phi`) and amplitude `a0`.
    pub fn amplitudes(&self, a0: f64, theta: f64) -> (C64, C64) {
        match self {
            Self::Hops(s) => s.amplitudes(a0, theta),
            Self::Polarized(s) => s.amplitudes(a0, theta),
        }
    }

    fn validate(&self) -> Result<()> {
        let a0 = self.a0();
        if !(a0.is_finite() && a0 >= 0.0) {
            return Err(HopsError::InvalidInput(format!("amplitude a0 must be finite and >= 0, got {a0}")));
        }
        if self.n_phases() < MIN_PHASES {
            return Err(HopsError::TooFewPhases(self.n_phases()));
        }
        Ok(())
    }
}

/// Optional amplitude randomisation for Monte-Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AmplitudeModel {
    Fixed,
    /// `a0 * (1 + u)` with `u` uniform in `[-relative, relative]`.
    UniformJitter {
        relative: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Estimator {
    /// Equally spaced phases; exact for the second-order trigonometric moments involved.
    ExactPhaseAverage,
    MonteCarlo {
        samples: usize,
        seed: u64,
        amplitude: AmplitudeModel,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorKind {
    ExactPhaseAverage,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParameters {
    pub s: [f64; 4],
    pub h: [f64; 4],
    pub estimator: EstimatorKind,
    pub n_samples: usize,
}

impl EnsembleParameters {
    /// `max(|s1|, |s2|, |s3|)`.
    pub fn stokes_vector_max(&self) -> f64 {
        self.s[1..].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `sqrt(h2^2 + h3^2)`.
    pub fn hidden_pair_magnitude(&self) -> f64 {
        self.h[2].hypot(self.h[3])
    }

    /// `sqrt(s2^2 + s3^2)`.
    pub fn stokes_pair_magnitude(&self) -> f64 {
        self.s[2].hypot(self.s[3])
    }
}

fn classical_sample(ax: C64, ay: C64) -> ([f64; 4], [f64; 4]) {
    let (ix, iy) = (ax.norm_sqr(), ay.norm_sqr());
    let stokes = 2.0 * ay.conj() * ax;
    let hidden = 2.0 * ay * ax;
    ([iy + ix, iy - ix, stokes.re, stokes.im], [iy + ix, iy - ix, hidden.re, hidden.im])
}

fn phase_grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |m| 2.0 * PI * m as f64 / n as f64)
}

/// Ensemble-averaged Stokes and hidden parameters of a classical field.
pub fn classical_parameters(spec: &EnsembleSpec, estimator: Estimator) -> Result<EnsembleParameters> {
    spec.validate()?;
    let mut s = [0.0; 4];
    let mut h = [0.0; 4];
    let mut accumulate = |ax: C64, ay: C64| {
        let (ds, dh) = classical_sample(ax, ay);
        for i in 0..4 {
            s[i] += ds[i];
            h[i] += dh[i];
        }
    };
    let (kind, n) = match estimator {
        Estimator::ExactPhaseAverage => {
            let n = spec.n_phases();
            for theta in phase_grid(n) {
                let (ax, ay) = spec.amplitudes(spec.a0(), theta);
                accumulate(ax, ay);
            }
            (EstimatorKind::ExactPhaseAverage, n)
        }
        Estimator::MonteCarlo { samples, seed, amplitude } => {
            if samples == 0 {
                return Err(HopsError::InvalidInput("Monte-Carlo estimator needs at least one sample".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let theta = rng.random_range(0.0..2.0 * PI);
                let a0 = match amplitude {
                    AmplitudeModel::Fixed => spec.a0(),
                    AmplitudeModel::UniformJitter { relative } => {
                        spec.a0() * (1.0 + rng.random_range(-relative..=relative))
                    }
                };
                let (ax, ay) = spec.amplitudes(a0, theta);
                accumulate(ax, ay);
            }
            (EstimatorKind::MonteCarlo, samples)
        }
    };
    let inv = 1.0 / n as f64;
    Ok(EnsembleParameters { s: s.map(|v| v * inv), h: h.map(|v| v * inv), estimator: kind, n_samples: n })
}

/// Equally weighted coherent states representing the phase-averaged mixture.
pub fn phase_averaged_state(space: &FockSpace, spec: &EnsembleSpec) -> Result<Vec<(f64, StateVector)>> {
    spec.validate()?;
    let n = spec.n_phases();
    let w = 1.0 / n as f64;
    phase_grid(n)
        .map(|theta| {
            let (ax, ay) = spec.amplitudes(spec.a0(), theta);
            Ok((w, coherent_state(space, ax, ay)?))
        })
        .collect()
}

/// Phase-averaged mixture for a hidden-polarized ensemble.
pub fn quantum_phase_averaged_state(space: &FockSpace, spec: &HopsEnsembleSpec) -> Result<Vec<(f64, StateVector)>> {
    phase_averaged_state(space, &EnsembleSpec::Hops(*spec))
}

/// Weighted expectations of the four members of `quad` over a mixture.
pub fn ensemble_expectations(members: &[(f64, StateVector)], quad: &OperatorQuad) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for (w, state) in members {
        let e = quad.expectations(state)?;
        for i in 0..4 {
            out[i] += w * e[i];
        }
    }
    Ok(out)
}

/// Stokes and hidden parameters of the quantum phase-averaged mixture.
pub fn quantum_parameters(space: &FockSpace, spec: &EnsembleSpec) -> Result<EnsembleParameters> {
    let members = phase_averaged_state(space, spec)?;
    Ok(EnsembleParameters {
        s: ensemble_expectations(&members, &stokes_operators(space))?,
        h: ensemble_expectations(&members, &hidden_operators(space, 0.0))?,
        estimator: EstimatorKind::ExactPhaseAverage,
        n_samples: members.len(),
    })
}

/// Polarization index of the field in the basis `(e, e_perp)`:
/// `(e_perp^* . e0) / (e^* . e0)`.
pub fn iop_ihop_in_basis(spec: &PolarizedFieldSpec, e: &BasisVector) -> Result<C64> {
    let e0 = spec.direction();
    let den = e.dot_conj(&e0);
    if den.norm() < SINGULARITY_TOLERANCE {
        return Err(HopsError::BasisSingularity);
    }
    Ok(e.perp().dot_conj(&e0) / den)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoRow {
    pub ensemble: &'static str,
    pub path: &'static str,
    pub params: EnsembleParameters,
}

/// Classical and quantum parameters for a hidden-polarized ensemble and the
/// polarized ensemble with the same angles.
pub fn hidden_vs_stokes_demo(a0: f64, chi_h: f64, delta_h: f64, n_phases: usize, n_max: usize) -> Result<Vec<DemoRow>> {
    let space = FockSpace::new(n_max)?;
    let specs = [
        EnsembleSpec::Hops(HopsEnsembleSpec { a0, chi_h, delta_h, n_phases }),
        EnsembleSpec::Polarized(PolarizedFieldSpec { a0, chi0: chi_h, delta0: delta_h, n_phases }),
    ];
    let mut rows = Vec::with_capacity(4);
    for spec in &specs {
        rows.push(DemoRow {
            ensemble: spec.label(),
            path: "classical",
            params: classical_parameters(spec, Estimator::ExactPhaseAverage)?,
        });
        rows.push(DemoRow { ensemble: spec.label(), path: "quantum", params: quantum_parameters(&space, spec)? });
    }
    Ok(rows)
}

pub fn write_demo_csv<W: Write>(rows: &[DemoRow], mut w: W) -> io::Result<()> {
    writeln!(w, "ensemble,path,s0,s1,s2,s3,h0,h1,h2,h3")?;
    for row in rows {
        write!(w, "{},{}", row.ensemble, row.path)?;
        for v in row.params.s.iter().chain(row.params.h.iter()) {
            write!(w, ",{v:.16e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
