//! Truncated two-mode Fock space.
//!
//! Basis states `|n_x, n_y>` with `0 <= n_x, n_y <= n_max` are stored row-major in
//! `(n_x, n_y)`: `index(n_x, n_y) = n_x * (n_max + 1) + n_y`. Operators are dense
//! complex matrices in that basis; everything here is the brute-force reference
//! that the closed forms elsewhere in the crate are checked against.

use std::io::{self, Write};
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{HopsError, Result};

pub type C64 = Complex64;

pub const MAX_CUTOFF: usize = 128;
const COHERENT_TAIL_LIMIT: f64 = 1e-12;
const EVOLVED_SHELL_LIMIT: f64 = 1e-8;
const NORM_TOLERANCE: f64 = 1e-10;
const HERMITIAN_TOLERANCE: f64 = 1e-12;
const VARIANCE_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    Annihilate,
    Create,
    Number,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockSpace {
    n_max: usize,
}

pub fn make_fock_space(n_max: usize) -> Result<FockSpace> {
    FockSpace::new(n_max)
}

impl FockSpace {
    pub fn new(n_max: usize) -> Result<Self> {
        if !(1..=MAX_CUTOFF).contains(&n_max) {
            return Err(HopsError::CutoffOutOfRange(n_max));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Number of levels per mode, `n_max + 1`.
    pub fn levels(&self) -> usize {
        self.n_max + 1
    }

    pub fn dim(&self) -> usize {
        self.levels() * self.levels()
    }

    #[inline]
    pub fn index(&self, n_x: usize, n_y: usize) -> usize {
        debug_assert!(n_x <= self.n_max && n_y <= self.n_max);
        n_x * self.levels() + n_y
    }

    #[inline]
    pub fn occupation(&self, index: usize) -> (usize, usize) {
        (index / self.levels(), index % self.levels())
    }

    /// Basis states untouched by the ladder truncation: `n_x, n_y < n_max`.
    pub fn is_interior(&self, index: usize) -> bool {
        let (n_x, n_y) = self.occupation(index);
        n_x < self.n_max && n_y < self.n_max
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.is_interior(i)).collect()
    }

    pub fn identity(&self) -> OperatorMatrix {
        OperatorMatrix { space: *self, entries: DMatrix::identity(self.dim(), self.dim()), hermitian: true }
    }

    pub fn zero_operator(&self) -> OperatorMatrix {
        OperatorMatrix { space: *self, entries: DMatrix::zeros(self.dim(), self.dim()), hermitian: true }
    }

    pub fn basis_state(&self, n_x: usize, n_y: usize) -> Result<StateVector> {
        if n_x > self.n_max || n_y > self.n_max {
            return Err(HopsError::InvalidInput(format!("basis state |{n_x},{n_y}> outside cutoff {}", self.n_max)));
        }
        let mut amps = DVector::zeros(self.dim());
        amps[self.index(n_x, n_y)] = C64::new(1.0, 0.0);
        Ok(StateVector { space: *self, amps })
    }

    pub fn vacuum(&self) -> StateVector {
        let mut amps = DVector::zeros(self.dim());
        amps[0] = C64::new(1.0, 0.0);
        StateVector { space: *self, amps }
    }

    fn check_same(&self, other: &FockSpace) -> Result<()> {
        if self != other {
            return Err(HopsError::SpaceMismatch { left: self.n_max, right: other.n_max });
        }
        Ok(())
    }
}

/// Ladder operator of one mode, acting as identity on the other.
pub fn mode_operator(space: &FockSpace, mode: Mode, kind: Ladder) -> OperatorMatrix {
    let dim = space.dim();
    let mut entries = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let (n_x, n_y) = space.occupation(col);
        let n = match mode {
            Mode::X => n_x,
            Mode::Y => n_y,
        };
        let target = |m: usize| match mode {
            Mode::X => space.index(m, n_y),
            Mode::Y => space.index(n_x, m),
        };
        match kind {
            Ladder::Annihilate if n > 0 => {
                entries[(target(n - 1), col)] = C64::new((n as f64).sqrt(), 0.0);
            }
            Ladder::Create if n < space.n_max => {
                entries[(target(n + 1), col)] = C64::new(((n + 1) as f64).sqrt(), 0.0);
            }
            Ladder::Number => entries[(col, col)] = C64::new(n as f64, 0.0),
            _ => {}
        }
    }
    OperatorMatrix { space: *space, entries, hermitian: kind == Ladder::Number }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: FockSpace,
    amps: DVector<C64>,
}

impl StateVector {
    /// Wraps raw amplitudes and normalizes them.
    pub fn from_amplitudes(space: FockSpace, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != space.dim() {
            return Err(HopsError::InvalidInput(format!(
                "amplitude vector length {} does not match dim {}",
                amps.len(),
                space.dim()
            )));
        }
        let norm = amps.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(HopsError::InvalidInput("state has zero or non-finite norm".into()));
        }
        Ok(Self { space, amps: amps / C64::new(norm, 0.0) })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn probability(&self, n_x: usize, n_y: usize) -> f64 {
        self.amps[self.space.index(n_x, n_y)].norm_sqr()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.space.check_same(&other.space)?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// Unnormalized image `op |self>`.
    pub fn apply(&self, op: &OperatorMatrix) -> Result<DVector<C64>> {
        self.space.check_same(&op.space)?;
        Ok(&op.entries * &self.amps)
    }

    /// Writes `row,col,re,im` lines for nonzero amplitudes (column is always 0).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "row,col,re,im")?;
        for (i, a) in self.amps.iter().enumerate() {
            if *a != C64::new(0.0, 0.0) {
                writeln!(w, "{i},0,{},{}", a.re, a.im)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    space: FockSpace,
    entries: DMatrix<C64>,
    hermitian: bool,
}

impl OperatorMatrix {
    pub fn from_entries(space: FockSpace, entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != space.dim() || entries.ncols() != space.dim() {
            return Err(HopsError::InvalidInput("operator shape does not match space".into()));
        }
        Ok(Self { space, entries, hermitian: false })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Sets the Hermitian hint after checking `max|M - M^dagger| < 1e-12`.
    pub fn into_hermitian(mut self) -> Result<Self> {
        if self.hermitian_deviation() >= HERMITIAN_TOLERANCE {
            return Err(HopsError::NotHermitian);
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        max_abs(&(&self.entries - self.entries.adjoint()))
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        Self { space: self.space, entries: self.entries.adjoint(), hermitian: self.hermitian }
    }

    /// Matrix product `self * rhs`, skipping structural zeros of `rhs`.
    ///
    /// Ladder-built operators have a handful of nonzeros per column, which keeps
    /// products at `O(dim^2)` instead of `O(dim^3)`.
    pub fn compose(&self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.space, rhs.space, "compose across different Fock spaces");
        let dim = self.space.dim();
        let lhs = self.entries.as_slice();
        let mut out = DMatrix::<C64>::zeros(dim, dim);
        let out_slice = out.as_mut_slice();
        for j in 0..dim {
            let dst = &mut out_slice[j * dim..(j + 1) * dim];
            for k in 0..dim {
                let b = rhs.entries[(k, j)];
                if b.re == 0.0 && b.im == 0.0 {
                    continue;
                }
                let src = &lhs[k * dim..(k + 1) * dim];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += s * b;
                }
            }
        }
        OperatorMatrix { space: self.space, entries: out, hermitian: false }
    }

    pub fn scale(&self, factor: C64) -> OperatorMatrix {
        OperatorMatrix {
            space: self.space,
            entries: &self.entries * factor,
            hermitian: self.hermitian && factor.im == 0.0,
        }
    }

    /// Entries restricted to interior rows and columns (`n_x, n_y < n_max`).
    pub fn interior(&self) -> DMatrix<C64> {
        let idx = self.space.interior_indices();
        DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.entries[(idx[r], idx[c])])
    }

    pub fn max_abs_deviation(&self, other: &OperatorMatrix) -> f64 {
        assert_eq!(self.space, other.space);
        max_abs(&(&self.entries - &other.entries))
    }

    pub fn interior_deviation(&self, other: &OperatorMatrix) -> f64 {
        assert_eq!(self.space, other.space);
        max_abs(&(self.interior() - other.interior()))
    }

    /// Writes `row,col,re,im` lines for nonzero entries in basis order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "row,col,re,im")?;
        let dim = self.space.dim();
        for r in 0..dim {
            for c in 0..dim {
                let v = self.entries[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    writeln!(w, "{r},{c},{},{}", v.re, v.im)?;
                }
            }
        }
        Ok(())
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.space, rhs.space, "add across different Fock spaces");
        OperatorMatrix {
            space: self.space,
            entries: &self.entries + &rhs.entries,
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.space, rhs.space, "sub across different Fock spaces");
        OperatorMatrix {
            space: self.space,
            entries: &self.entries - &rhs.entries,
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.compose(rhs)
    }
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Probability that a Poisson variable of the given mean exceeds `n_max`.
pub fn poisson_tail(mean: f64, n_max: usize) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    // log-space recursion keeps large means from underflowing e^{-mean}
    let ln_mean = mean.ln();
    let mut ln_p = -mean;
    for n in 1..=n_max + 1 {
        ln_p += ln_mean - (n as f64).ln();
    }
    let mut tail = 0.0;
    let mut n = n_max + 1;
    loop {
        let p = ln_p.exp();
        tail += p;
        if (n as f64) > mean && p < tail * 1e-17 || n > n_max + 10_000 {
            break;
        }
        n += 1;
        ln_p += ln_mean - (n as f64).ln();
    }
    tail
}

fn coherent_mode(levels: usize, alpha: C64) -> DVector<C64> {
    let mut v = DVector::zeros(levels);
    v[0] = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 1..levels {
        v[n] = v[n - 1] * alpha / (n as f64).sqrt();
    }
    v
}

/// Truncated, renormalized two-mode coherent state `|alpha_x, alpha_y>`.
pub fn coherent_state(space: &FockSpace, alpha_x: C64, alpha_y: C64) -> Result<StateVector> {
    for alpha in [alpha_x, alpha_y] {
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(HopsError::InvalidInput("non-finite coherent amplitude".into()));
        }
        let mean = alpha.norm_sqr();
        let tail = poisson_tail(mean, space.n_max);
        if tail >= COHERENT_TAIL_LIMIT {
            return Err(HopsError::InsufficientCutoff { n_max: space.n_max, mean, tail });
        }
    }
    let vx = coherent_mode(space.levels(), alpha_x);
    let vy = coherent_mode(space.levels(), alpha_y);
    let amps = vx.kronecker(&vy);
    StateVector::from_amplitudes(*space, amps)
}

pub fn expectation(state: &StateVector, op: &OperatorMatrix) -> Result<C64> {
    let image = state.apply(op)?;
    let value = state.amps.dotc(&image);
    if op.hermitian && value.im.abs() > HERMITIAN_TOLERANCE * value.re.abs().max(1.0) {
        return Err(HopsError::Consistency(format!("Hermitian expectation has imaginary part {:.3e}", value.im)));
    }
    Ok(value)
}

/// `<M^2> - <M>^2` for a Hermitian operator, clamping tiny negative roundoff to zero.
pub fn variance(state: &StateVector, op: &OperatorMatrix) -> Result<f64> {
    if !op.hermitian {
        return Err(HopsError::NotHermitian);
    }
    let image = state.apply(op)?;
    let mean = state.amps.dotc(&image).re;
    let second = image.norm_squared();
    let var = second - mean * mean;
    if var >= 0.0 {
        Ok(var)
    } else if var >= -VARIANCE_CLAMP * second.max(1.0) {
        Ok(0.0)
    } else {
        Err(HopsError::NegativeVariance(var))
    }
}

pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    a.space.check_same(&b.space)?;
    Ok(&a.compose(b) - &b.compose(a))
}

/// Probability in basis states with `n_x = n_max` or `n_y = n_max`.
pub fn tail_mass(state: &StateVector) -> f64 {
    shell_mass(state, 1)
}

/// Probability in the outermost `shells` number shells of either mode.
pub fn shell_mass(state: &StateVector, shells: usize) -> f64 {
    let edge = (state.space.n_max + 1).saturating_sub(shells);
    state
        .amps
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let (n_x, n_y) = state.space.occupation(*i);
            n_x >= edge || n_y >= edge
        })
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// The pair-creation generator `a_x a_y + a_x^dagger a_y^dagger` (unit coupling).
pub fn pair_hamiltonian(space: &FockSpace) -> OperatorMatrix {
    let ax = mode_operator(space, Mode::X, Ladder::Annihilate);
    let ay = mode_operator(space, Mode::Y, Ladder::Annihilate);
    let pair = ax.compose(&ay);
    let mut h = &pair + &pair.adjoint();
    h.hermitian = true;
    h
}

#[derive(Debug, Clone)]
struct SpectralBlock {
    indices: Vec<usize>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

/// Exact propagator for `H_I = g (a_x a_y + a_x^dagger a_y^dagger)`.
///
/// `H_I` conserves `n_x - n_y`, so it splits into real symmetric tridiagonal
/// blocks that are diagonalized once and reused for any `g t`.
#[derive(Debug, Clone)]
pub struct PairPropagator {
    space: FockSpace,
    blocks: Vec<SpectralBlock>,
}

impl PairPropagator {
    pub fn new(space: &FockSpace) -> Self {
        let n = space.n_max as isize;
        let blocks = (-n..=n)
            .map(|diff| {
                // states with n_x - n_y = diff, ordered by increasing n_x
                let lo = diff.max(0) as usize;
                let hi = (n + diff.min(0)) as usize;
                let pairs: Vec<(usize, usize)> = (lo..=hi).map(|nx| (nx, (nx as isize - diff) as usize)).collect();
                let size = pairs.len();
                let mut sub = DMatrix::<f64>::zeros(size, size);
                for r in 1..size {
                    let (nx, ny) = pairs[r];
                    let el = ((nx * ny) as f64).sqrt();
                    sub[(r - 1, r)] = el;
                    sub[(r, r - 1)] = el;
                }
                let eig = SymmetricEigen::new(sub);
                SpectralBlock {
                    indices: pairs.iter().map(|&(nx, ny)| space.index(nx, ny)).collect(),
                    eigenvalues: eig.eigenvalues,
                    eigenvectors: eig.eigenvectors,
                }
            })
            .collect();
        Self { space: *space, blocks }
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    /// `exp(-i H_I t) |state>` with coupling `g`; fails if the result populates
    /// the two outermost number shells beyond 1e-8.
    pub fn evolve(&self, state: &StateVector, g: f64, t: f64) -> Result<StateVector> {
        self.space.check_same(&state.space)?;
        let gt = g * t;
        if !gt.is_finite() || gt.abs() > 2.0 {
            return Err(HopsError::EvolutionTooLong(gt));
        }
        if gt == 0.0 {
            return Ok(state.clone());
        }
        let mut out = DVector::<C64>::zeros(self.space.dim());
        for block in &self.blocks {
            let size = block.indices.len();
            let local = DVector::from_fn(size, |r, _| state.amps[block.indices[r]]);
            let mut coeffs = DVector::<C64>::zeros(size);
            for k in 0..size {
                let mut c = C64::new(0.0, 0.0);
                for r in 0..size {
                    c += local[r] * block.eigenvectors[(r, k)];
                }
                coeffs[k] = c * C64::from_polar(1.0, -block.eigenvalues[k] * gt);
            }
            for r in 0..size {
                let mut v = C64::new(0.0, 0.0);
                for k in 0..size {
                    v += coeffs[k] * block.eigenvectors[(r, k)];
                }
                out[block.indices[r]] = v;
            }
        }
        let evolved = StateVector { space: self.space, amps: out };
        let drift = (evolved.norm() - 1.0).abs();
        if drift > NORM_TOLERANCE {
            return Err(HopsError::StepControl { drift });
        }
        let mass = shell_mass(&evolved, 2);
        if mass >= EVOLVED_SHELL_LIMIT {
            return Err(HopsError::TruncationOverflow { mass, limit: EVOLVED_SHELL_LIMIT });
        }
        Ok(evolved)
    }
}

/// Evolves under `g (a_x a_y + h.c.)` for time `t` in the rotating frame.
pub fn evolve_oracle(state: &StateVector, g: f64, t: f64) -> Result<StateVector> {
    PairPropagator::new(&state.space).evolve(state, g, t)
}

/// `exp(-i G t) |state>` by a stepped Taylor series using matrix-vector products only.
///
/// Independent of [`PairPropagator`]; the step is chosen so that
/// `||G||_inf * dt <= 1/2` and the series is summed until terms fall below 1e-18.
pub fn evolve_taylor(state: &StateVector, generator: &OperatorMatrix, t: f64) -> Result<StateVector> {
    state.space.check_same(&generator.space)?;
    if !generator.hermitian {
        return Err(HopsError::NotHermitian);
    }
    let bound = generator.entries.row_iter().map(|row| row.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let steps = ((bound * t.abs()) / 0.5).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let mut psi = state.amps.clone();
    for _ in 0..steps {
        let mut term = psi.clone();
        let mut acc = psi.clone();
        for k in 1..200 {
            term = (&generator.entries * &term) * C64::new(0.0, -dt / k as f64);
            acc += &term;
            if term.norm() < 1e-18 {
                break;
            }
        }
        psi = acc;
        let drift = (psi.norm() - 1.0).abs();
        if drift > NORM_TOLERANCE {
            return Err(HopsError::StepControl { drift });
        }
    }
    Ok(StateVector { space: state.space, amps: psi })
}
