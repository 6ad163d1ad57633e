//! Stokes and hidden-polarization operators, polarization indices, elliptic basis
//! transforms and normal-ordered correlation functions.
//!
//! Conventions: `S0,1 = n_y +- n_x`, `S2 + i S3 = 2 a_y^dagger a_x`;
//! `H0,1 = n_y +- n_x`, `H2 + i H3 = 2 e^{2i phi} a_y a_x`. In the rotating frame
//! the free-field phase `phi` is zero.

use std::f64::consts::PI;

use crate::error::{HopsError, Result};
use crate::fock::{
    commutator, expectation, mode_operator, variance, FockSpace, Ladder, Mode, OperatorMatrix, StateVector, C64,
};

const UNCERTAINTY_TOLERANCE: f64 = 1e-9;
const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadFamily {
    Stokes,
    Hidden,
}

/// Four Hermitian operators `O0..O3` of one family.
#[derive(Debug, Clone)]
pub struct OperatorQuad {
    pub o0: OperatorMatrix,
    pub o1: OperatorMatrix,
    pub o2: OperatorMatrix,
    pub o3: OperatorMatrix,
    pub family: QuadFamily,
    /// Free-field phase; only meaningful for the hidden family.
    pub phase_phi: f64,
}

impl OperatorQuad {
    pub fn get(&self, i: usize) -> &OperatorMatrix {
        match i {
            0 => &self.o0,
            1 => &self.o1,
            2 => &self.o2,
            3 => &self.o3,
            _ => panic!("operator quad index {i} out of range"),
        }
    }

    pub fn space(&self) -> &FockSpace {
        self.o0.space()
    }

    pub fn expectations(&self, state: &StateVector) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = expectation(state, self.get(i))?.re;
        }
        Ok(out)
    }

    pub fn variances(&self, state: &StateVector) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = variance(state, self.get(i))?;
        }
        Ok(out)
    }
}

fn split_hermitian(pair: &OperatorMatrix) -> Result<(OperatorMatrix, OperatorMatrix)> {
    // pair = (A + iB)/2 with A, B Hermitian
    let adj = pair.adjoint();
    let re = (pair + &adj).into_hermitian()?;
    let im = (pair - &adj).scale(C64::new(0.0, -1.0)).into_hermitian()?;
    Ok((re, im))
}

fn number_pair(space: &FockSpace) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let nx = mode_operator(space, Mode::X, Ladder::Number);
    let ny = mode_operator(space, Mode::Y, Ladder::Number);
    Ok(((&ny + &nx).into_hermitian()?, (&ny - &nx).into_hermitian()?))
}

pub fn stokes_operators(space: &FockSpace) -> OperatorQuad {
    let (s0, s1) = number_pair(space).expect("number operators are Hermitian");
    let ay_dag = mode_operator(space, Mode::Y, Ladder::Create);
    let ax = mode_operator(space, Mode::X, Ladder::Annihilate);
    let (s2, s3) = split_hermitian(&ay_dag.compose(&ax)).expect("split is Hermitian by construction");
    OperatorQuad { o0: s0, o1: s1, o2: s2, o3: s3, family: QuadFamily::Stokes, phase_phi: 0.0 }
}

pub fn hidden_operators(space: &FockSpace, phi: f64) -> OperatorQuad {
    let (h0, h1) = number_pair(space).expect("number operators are Hermitian");
    let ay = mode_operator(space, Mode::Y, Ladder::Annihilate);
    let ax = mode_operator(space, Mode::X, Ladder::Annihilate);
    let pair = ay.compose(&ax).scale(C64::from_polar(1.0, 2.0 * phi));
    let (h2, h3) = split_hermitian(&pair).expect("split is Hermitian by construction");
    OperatorQuad { o0: h0, o1: h1, o2: h2, o3: h3, family: QuadFamily::Hidden, phase_phi: phi }
}

/// Right-hand sides of the three hidden-operator uncertainty relations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyBounds {
    /// `|<H3>|`, bounds `var(H0) var(H2)`.
    pub b_02: f64,
    /// `|<1 + H0>|`, bounds `var(H2) var(H3)`.
    pub b_23: f64,
    /// `|<H2>|`, bounds `var(H3) var(H0)`.
    pub b_30: f64,
}

pub fn uncertainty_bounds(state: &StateVector, quad: &OperatorQuad) -> Result<UncertaintyBounds> {
    if quad.family != QuadFamily::Hidden {
        return Err(HopsError::WrongFamily("hidden"));
    }
    let h = quad.expectations(state)?;
    Ok(UncertaintyBounds { b_02: h[3].abs(), b_23: (1.0 + h[0]).abs(), b_30: h[2].abs() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyReport {
    pub variances: [f64; 4],
    pub bounds: UncertaintyBounds,
    /// `var(H0)var(H2)`, `var(H2)var(H3)`, `var(H3)var(H0)`.
    pub products: [f64; 3],
    /// Product minus squared bound, in the same order.
    pub margins: [f64; 3],
    pub holds: bool,
}

pub fn uncertainty_products_hold(state: &StateVector, quad: &OperatorQuad) -> Result<UncertaintyReport> {
    let bounds = uncertainty_bounds(state, quad)?;
    let v = quad.variances(state)?;
    let products = [v[0] * v[2], v[2] * v[3], v[3] * v[0]];
    let squared = [bounds.b_02.powi(2), bounds.b_23.powi(2), bounds.b_30.powi(2)];
    let mut margins = [0.0; 3];
    let mut holds = true;
    for i in 0..3 {
        margins[i] = products[i] - squared[i];
        if margins[i] < -UNCERTAINTY_TOLERANCE * squared[i].max(1.0) {
            holds = false;
        }
    }
    Ok(UncertaintyReport { variances: v, bounds, products, margins, holds })
}

/// Argument in `(-pi, pi]`.
pub fn principal_arg(z: C64) -> f64 {
    let a = z.arg();
    if a <= -PI {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Index of polarization `alpha_y / alpha_x`.
pub fn iop_of(alpha_x: C64, alpha_y: C64) -> Result<C64> {
    if alpha_x.norm() == 0.0 {
        return Err(HopsError::ZeroAmplitude);
    }
    Ok(alpha_y / alpha_x)
}

/// Index of hidden polarization `p_h = alpha_y / alpha_x^*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiddenIndex {
    pub value: C64,
}

impl HiddenIndex {
    pub fn magnitude(&self) -> f64 {
        self.value.norm()
    }

    /// Sum-of-phases angle, in `(-pi, pi]`.
    pub fn delta(&self) -> f64 {
        principal_arg(self.value)
    }

    /// Polar angle with `|p_h| = tan(chi_h / 2)`.
    pub fn chi(&self) -> f64 {
        2.0 * self.magnitude().atan()
    }
}

pub fn ihop_of(alpha_x: C64, alpha_y: C64) -> Result<HiddenIndex> {
    if alpha_x.norm() == 0.0 {
        return Err(HopsError::ZeroAmplitude);
    }
    Ok(HiddenIndex { value: alpha_y / alpha_x.conj() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationIndices {
    pub iop: C64,
    pub ihop: HiddenIndex,
}

impl PolarizationIndices {
    pub fn from_amplitudes(alpha_x: C64, alpha_y: C64) -> Result<Self> {
        Ok(Self { iop: iop_of(alpha_x, alpha_y)?, ihop: ihop_of(alpha_x, alpha_y)? })
    }
}

/// Unit polarization vector `e = eps_x x + eps_y y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisVector {
    eps_x: C64,
    eps_y: C64,
}

impl BasisVector {
    pub fn new(eps_x: C64, eps_y: C64) -> Result<Self> {
        let n = eps_x.norm_sqr() + eps_y.norm_sqr();
        if (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(HopsError::NonUnitBasis(n));
        }
        Ok(Self { eps_x, eps_y })
    }

    pub fn linear_x() -> Self {
        Self { eps_x: C64::new(1.0, 0.0), eps_y: C64::new(0.0, 0.0) }
    }

    /// Direction on the Poincare sphere: `cos(chi/2) x + sin(chi/2) e^{i delta} y`.
    pub fn from_angles(chi: f64, delta: f64) -> Self {
        Self { eps_x: C64::new((chi / 2.0).cos(), 0.0), eps_y: C64::from_polar((chi / 2.0).sin(), delta) }
    }

    pub fn components(&self) -> (C64, C64) {
        (self.eps_x, self.eps_y)
    }

    /// Orthogonal complement `(-eps_y^*, eps_x^*)`.
    pub fn perp(&self) -> BasisVector {
        Self { eps_x: -self.eps_y.conj(), eps_y: self.eps_x.conj() }
    }

    /// Hermitian product `self^* . other`.
    pub fn dot_conj(&self, other: &BasisVector) -> C64 {
        self.eps_x.conj() * other.eps_x + self.eps_y.conj() * other.eps_y
    }
}

/// Annihilation operators `(a_e, a_e_perp)` of the elliptic basis.
pub fn transform_basis(space: &FockSpace, e: &BasisVector) -> (OperatorMatrix, OperatorMatrix) {
    let ax = mode_operator(space, Mode::X, Ladder::Annihilate);
    let ay = mode_operator(space, Mode::Y, Ladder::Annihilate);
    let combine = |v: &BasisVector| &ax.scale(v.eps_x.conj()) + &ay.scale(v.eps_y.conj());
    (combine(e), combine(&e.perp()))
}

fn lower_n(state_amps: nalgebra::DVector<C64>, op: &OperatorMatrix, times: usize) -> nalgebra::DVector<C64> {
    (0..times).fold(state_amps, |v, _| op.entries() * v)
}

/// Normal-ordered moment `<a_x^dagger^mx a_y^dagger^my a_x^nx a_y^ny>` in photon-number units.
pub fn glauber_gamma(state: &StateVector, m_x: usize, m_y: usize, n_x: usize, n_y: usize) -> Result<C64> {
    let space = state.space();
    let n_max = space.n_max();
    if m_x + n_x > n_max || m_y + n_y > n_max {
        let need = (m_x + n_x).max(m_y + n_y);
        return Err(HopsError::OrderingHeadroom { m: m_x + m_y, n: n_x + n_y, need, have: n_max });
    }
    let ax = mode_operator(space, Mode::X, Ladder::Annihilate);
    let ay = mode_operator(space, Mode::Y, Ladder::Annihilate);
    let psi = state.amplitudes().clone();
    // <psi| (a_y^my a_x^mx)^dagger  a_x^nx a_y^ny |psi>
    let left = lower_n(lower_n(psi.clone(), &ax, m_x), &ay, m_y);
    let right = lower_n(lower_n(psi, &ay, n_y), &ax, n_x);
    Ok(left.dotc(&right))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorizationKind {
    /// `alpha_y = p alpha_x`.
    Polarized,
    /// `alpha_y = p_h alpha_x^*`.
    Hops,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationRow {
    /// `(m_x, m_y, n_x, n_y)`.
    pub orders: [usize; 4],
    pub gamma: C64,
    /// `Gamma^(M,0,N,0)`.
    pub reference: C64,
    pub derived_factor: C64,
    pub printed_factor: C64,
    /// `|Gamma - derived_factor * reference| / max(1, |Gamma|)`.
    pub derived_deviation: f64,
    pub printed_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationReport {
    pub kind: FactorizationKind,
    pub index: C64,
    pub rows: Vec<FactorizationRow>,
}

impl FactorizationReport {
    pub fn max_derived_deviation(&self) -> f64 {
        self.rows.iter().map(|r| r.derived_deviation).fold(0.0, f64::max)
    }

    pub fn max_printed_deviation(&self) -> f64 {
        self.rows.iter().map(|r| r.printed_deviation).fold(0.0, f64::max)
    }

    /// Tuples where the printed exponent pattern disagrees with the measured moment.
    pub fn printed_mismatches(&self, tolerance: f64) -> impl Iterator<Item = &FactorizationRow> {
        self.rows.iter().filter(move |r| r.printed_deviation > tolerance)
    }
}

/// Compares every `Gamma^(mx,my,nx,ny)` with `M, N <= max_order` against the
/// factorized form `factor * Gamma^(M,0,N,0)`.
///
/// The derived factor for polarized inputs is `p^*^my p^ny`; for HOPS inputs it is
/// `p_h^*^my p_h^ny u^{2(my - ny)}` where `u` is the phase of `<a_x>`. The printed
/// factors are `p^*^my p^mx` (polarized) and `p_h^*^my p_h^nx` (HOPS).
pub fn factorization_check(
    state: &StateVector,
    index: C64,
    kind: FactorizationKind,
    max_order: usize,
) -> Result<FactorizationReport> {
    let ax_mean = glauber_gamma(state, 0, 0, 1, 0)?;
    let phase = if ax_mean.norm() > 0.0 { ax_mean / ax_mean.norm() } else { C64::new(1.0, 0.0) };
    let mut rows = Vec::new();
    for big_m in 0..=max_order {
        for big_n in 0..=max_order {
            let reference = glauber_gamma(state, big_m, 0, big_n, 0)?;
            for m_y in 0..=big_m {
                for n_y in 0..=big_n {
                    let (m_x, n_x) = (big_m - m_y, big_n - n_y);
                    let gamma = glauber_gamma(state, m_x, m_y, n_x, n_y)?;
                    let (derived_factor, printed_factor) = match kind {
                        FactorizationKind::Polarized => (
                            index.conj().powu(m_y as u32) * index.powu(n_y as u32),
                            index.conj().powu(m_y as u32) * index.powu(m_x as u32),
                        ),
                        FactorizationKind::Hops => (
                            index.conj().powu(m_y as u32)
                                * index.powu(n_y as u32)
                                * phase.powi(2 * (m_y as i32 - n_y as i32)),
                            index.conj().powu(m_y as u32) * index.powu(n_x as u32),
                        ),
                    };
                    let scale = gamma.norm().max(1.0);
                    rows.push(FactorizationRow {
                        orders: [m_x, m_y, n_x, n_y],
                        gamma,
                        reference,
                        derived_factor,
                        printed_factor,
                        derived_deviation: (gamma - derived_factor * reference).norm() / scale,
                        printed_deviation: (gamma - printed_factor * reference).norm() / scale,
                    });
                }
            }
        }
    }
    Ok(FactorizationReport { kind, index, rows })
}

/// One commutation relation: the matrix-measured form and the conventionally printed form.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutationCheck {
    pub relation: &'static str,
    pub measured_form: &'static str,
    pub printed_form: &'static str,
    /// Interior max-abs deviation from the measured form.
    pub measured_deviation: f64,
    /// Interior max-abs deviation from the printed form.
    pub printed_deviation: f64,
}

/// Hidden-operator algebra, the vector identity, and the Stokes SU(2) algebra,
/// each evaluated as interior-projected matrices.
pub fn commutation_suite(space: &FockSpace) -> Vec<CommutationCheck> {
    let h = hidden_operators(space, 0.0);
    let s = stokes_operators(space);
    let id = space.identity();
    let zero = space.zero_operator();
    let i2 = C64::new(0.0, 2.0);
    let comm = |a: &OperatorMatrix, b: &OperatorMatrix| commutator(a, b).expect("same space");
    let one_plus_h0 = &id + &h.o0;

    let mut checks = Vec::new();
    let mut push = |relation,
                    measured_form,
                    printed_form,
                    lhs: OperatorMatrix,
                    measured: &OperatorMatrix,
                    printed: &OperatorMatrix| {
        checks.push(CommutationCheck {
            relation,
            measured_form,
            printed_form,
            measured_deviation: lhs.interior_deviation(measured),
            printed_deviation: lhs.interior_deviation(printed),
        });
    };

    push("[H1,H0]", "0", "0", comm(&h.o1, &h.o0), &zero, &zero);
    push("[H1,H2]", "0", "0", comm(&h.o1, &h.o2), &zero, &zero);
    push("[H1,H3]", "0", "0", comm(&h.o1, &h.o3), &zero, &zero);
    push("[H0,H2]", "-2i H3", "2i H3", comm(&h.o0, &h.o2), &h.o3.scale(-i2), &h.o3.scale(i2));
    push("[H0,H3]", "2i H2", "2i H2", comm(&h.o0, &h.o3), &h.o2.scale(i2), &h.o2.scale(i2));
    let rhs = one_plus_h0.scale(i2);
    push("[H2,H3]", "2i (1 + H0)", "2i (1 + H0)", comm(&h.o2, &h.o3), &rhs, &rhs);

    let vector_sq = &(&h.o1.compose(&h.o1) + &h.o2.compose(&h.o2)) + &h.o3.compose(&h.o3);
    let lhs = &vector_sq - &h.o0.compose(&h.o0);
    let rhs = one_plus_h0.scale(C64::new(2.0, 0.0));
    push("H^2 - H0^2", "2 (1 + H0)", "2 (1 + H0)", lhs, &rhs, &rhs);

    push("[S0,S1]", "0", "0", comm(&s.o0, &s.o1), &zero, &zero);
    push("[S0,S2]", "0", "0", comm(&s.o0, &s.o2), &zero, &zero);
    push("[S0,S3]", "0", "0", comm(&s.o0, &s.o3), &zero, &zero);
    push("[S1,S2]", "2i S3", "2i S3", comm(&s.o1, &s.o2), &s.o3.scale(i2), &s.o3.scale(i2));
    push("[S2,S3]", "2i S1", "2i S1", comm(&s.o2, &s.o3), &s.o1.scale(i2), &s.o1.scale(i2));
    push("[S3,S1]", "2i S2", "2i S2", comm(&s.o3, &s.o1), &s.o2.scale(i2), &s.o2.scale(i2));
    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, make_fock_space, PairPropagator};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn stokes_expectations() {
        let s = make_fock_space(20).unwrap();
        let quad = stokes_operators(&s);
        assert_eq!(quad.expectations(&s.vacuum()).unwrap(), [0.0; 4]);

        let psi = coherent_state(&s, c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        let v = quad.expectations(&psi).unwrap();
        assert_abs_diff_eq!(v[2], 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(v[3], 0.0, epsilon = 1e-10);

        // <S2 + i S3> = 2 alpha_y^* alpha_x = 2 (-i)(1) for alpha_y = i
        let psi = coherent_state(&s, c(1.0, 0.0), c(0.0, 1.0)).unwrap();
        let v = quad.expectations(&psi).unwrap();
        assert_abs_diff_eq!(v[2], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(v[3], -2.0, epsilon = 1e-10);
    }

    #[test]
    fn hidden_expectations_and_vacuum_variance() {
        let s = make_fock_space(20).unwrap();
        let quad = hidden_operators(&s, 0.0);
        let psi = coherent_state(&s, c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        let v = quad.expectations(&psi).unwrap();
        assert_abs_diff_eq!(v[2], 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(v[3], 0.0, epsilon = 1e-10);
        // var(H2) = 1 + |alpha_x|^2 (1 + |p_h|^2)
        assert_abs_diff_eq!(variance(&psi, &quad.o2).unwrap(), 3.0, epsilon = 1e-9);

        let vac = s.vacuum();
        assert_eq!(quad.expectations(&vac).unwrap()[2], 0.0);
        assert_eq!(quad.expectations(&vac).unwrap()[3], 0.0);
        assert_abs_diff_eq!(variance(&vac, &quad.o2).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn all_quad_members_are_hermitian() {
        let s = make_fock_space(5).unwrap();
        for quad in [stokes_operators(&s), hidden_operators(&s, 0.3)] {
            for i in 0..4 {
                assert!(quad.get(i).is_hermitian());
                assert!(quad.get(i).hermitian_deviation() < 1e-12);
            }
        }
    }

    #[test]
    fn hidden_operators_have_pi_periodicity_in_phi() {
        let s = make_fock_space(6).unwrap();
        for phi in [0.0, 0.4, -1.3] {
            let a = hidden_operators(&s, phi);
            let b = hidden_operators(&s, phi + PI);
            assert!(a.o2.max_abs_deviation(&b.o2) < 1e-12);
            assert!(a.o3.max_abs_deviation(&b.o3) < 1e-12);
        }
    }

    #[test]
    fn commutation_suite_at_cutoff_eight() {
        let s = make_fock_space(8).unwrap();
        for check in commutation_suite(&s) {
            assert!(
                check.measured_deviation < 1e-12,
                "{} = {} deviates by {}",
                check.relation,
                check.measured_form,
                check.measured_deviation
            );
        }
    }

    #[test]
    fn printed_sign_of_h0_h2_commutator_disagrees() {
        let s = make_fock_space(6).unwrap();
        let checks = commutation_suite(&s);
        let c02 = checks.iter().find(|c| c.relation == "[H0,H2]").unwrap();
        assert!(c02.printed_deviation > 1.0);
        let c03 = checks.iter().find(|c| c.relation == "[H0,H3]").unwrap();
        assert!(c03.printed_deviation < 1e-12);
    }

    #[test]
    fn h1_commutes_exactly_on_full_space() {
        let s = make_fock_space(5).unwrap();
        let h = hidden_operators(&s, 0.0);
        for other in [&h.o0, &h.o2, &h.o3] {
            let m = commutator(&h.o1, other).unwrap();
            assert_eq!(crate::fock::max_abs(m.entries()), 0.0);
        }
        let st = stokes_operators(&s);
        for other in [&st.o1, &st.o2, &st.o3] {
            let m = commutator(&st.o0, other).unwrap();
            assert_eq!(crate::fock::max_abs(m.entries()), 0.0);
        }
    }

    #[test]
    fn uncertainty_bounds_examples() {
        let s = make_fock_space(20).unwrap();
        let quad = hidden_operators(&s, 0.0);
        let b = uncertainty_bounds(&s.vacuum(), &quad).unwrap();
        assert_eq!(b.b_23, 1.0);
        let psi = coherent_state(&s, c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        let b = uncertainty_bounds(&psi, &quad).unwrap();
        assert_abs_diff_eq!(b.b_23, 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(b.b_30, 2.0, epsilon = 1e-10);
        assert_eq!(uncertainty_bounds(&psi, &stokes_operators(&s)), Err(HopsError::WrongFamily("hidden")));
    }

    #[test]
    fn uncertainty_products_hold_on_vacuum_and_evolved_states() {
        let s = make_fock_space(24).unwrap();
        let quad = hidden_operators(&s, 0.0);
        let report = uncertainty_products_hold(&s.vacuum(), &quad).unwrap();
        assert!(report.holds);
        assert_abs_diff_eq!(report.products[1], 1.0, epsilon = 1e-12);

        let prop = PairPropagator::new(&s);
        let psi = coherent_state(&s, c(0.8, 0.3), c(-0.4, 0.6)).unwrap();
        for gt in [0.0, 0.2, 0.5] {
            let out = prop.evolve(&psi, 1.0, gt).unwrap();
            assert!(uncertainty_products_hold(&out, &quad).unwrap().holds);
        }
    }

    #[test]
    fn polarization_index_examples() {
        assert_eq!(iop_of(c(1.0, 0.0), c(1.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(iop_of(c(1.0, 0.0), c(0.0, 1.0)).unwrap(), c(0.0, 1.0));
        assert_eq!(iop_of(c(2.0, 0.0), c(1.0, 1.0)).unwrap(), c(0.5, 0.5));
        assert_eq!(iop_of(c(0.0, 0.0), c(1.0, 0.0)), Err(HopsError::ZeroAmplitude));

        let p = ihop_of(c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(p.value, c(1.0, 0.0));
        assert_eq!(p.delta(), 0.0);
        let p = ihop_of(c(0.0, 1.0), c(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(p.value.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.value.im, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.delta(), FRAC_PI_2, epsilon = 1e-15);
        let p = ihop_of(c(1.0, 1.0), c(2.0, 0.0)).unwrap();
        assert_abs_diff_eq!((p.value - c(1.0, 1.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.chi(), 2.0 * 2f64.sqrt().atan(), epsilon = 1e-15);
        assert_eq!(ihop_of(c(0.0, 0.0), c(1.0, 0.0)), Err(HopsError::ZeroAmplitude));
    }

    #[test]
    fn principal_arg_range() {
        assert_eq!(principal_arg(c(-1.0, -0.0)), PI);
        assert_eq!(principal_arg(c(-1.0, 0.0)), PI);
        assert_abs_diff_eq!(principal_arg(c(0.0, -1.0)), -FRAC_PI_2);
    }

    #[test]
    fn basis_vector_invariants() {
        assert!(matches!(BasisVector::new(c(1.0, 0.0), c(1.0, 0.0)), Err(HopsError::NonUnitBasis(_))));
        let e = BasisVector::new(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        assert_abs_diff_eq!(e.perp().dot_conj(&e).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.perp().dot_conj(&e.perp()).re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn transform_basis_examples() {
        let s = make_fock_space(16).unwrap();
        let (ae, aperp) = transform_basis(&s, &BasisVector::linear_x());
        assert_eq!(ae, mode_operator(&s, Mode::X, Ladder::Annihilate));
        assert_eq!(aperp, mode_operator(&s, Mode::Y, Ladder::Annihilate));

        let diag = BasisVector::new(c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)).unwrap();
        let (ae, aperp) = transform_basis(&s, &diag);
        let psi = coherent_state(&s, c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(expectation(&psi, &ae).unwrap().re, 2f64.sqrt(), epsilon = 1e-10);

        let e = BasisVector::new(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let (ae, aperp2) = transform_basis(&s, &e);
        let id = s.identity();
        assert!(commutator(&ae, &ae.adjoint()).unwrap().interior_deviation(&id) < 1e-12);
        assert!(commutator(&aperp2, &aperp2.adjoint()).unwrap().interior_deviation(&id) < 1e-12);
        assert!(commutator(&aperp2, &ae.adjoint()).unwrap().interior_deviation(&s.zero_operator()) < 1e-12);
        let _ = aperp;
    }

    #[test]
    fn glauber_gamma_examples() {
        let s = make_fock_space(24).unwrap();
        let vac = s.vacuum();
        assert_eq!(glauber_gamma(&vac, 1, 2, 0, 1).unwrap(), c(0.0, 0.0));
        let fock = s.basis_state(1, 0).unwrap();
        assert_abs_diff_eq!(glauber_gamma(&fock, 1, 0, 1, 0).unwrap().re, 1.0, epsilon = 1e-15);

        let (ax, ay) = (c(0.7, -0.4), c(0.3, 0.9));
        let psi = coherent_state(&s, ax, ay).unwrap();
        for (mx, my, nx, ny) in [(1, 0, 0, 0), (0, 2, 1, 0), (2, 1, 1, 2), (0, 0, 3, 0)] {
            let expected = ax.conj().powu(mx) * ay.conj().powu(my) * ax.powu(nx) * ay.powu(ny);
            let got = glauber_gamma(&psi, mx as usize, my as usize, nx as usize, ny as usize).unwrap();
            assert!((got - expected).norm() < 1e-9, "{:?}", (mx, my, nx, ny));
        }

        let h0 = hidden_operators(&s, 0.0).o0;
        let sum = glauber_gamma(&psi, 1, 0, 1, 0).unwrap() + glauber_gamma(&psi, 0, 1, 0, 1).unwrap();
        assert_abs_diff_eq!(sum.re, expectation(&psi, &h0).unwrap().re, epsilon = 1e-10);

        let small = make_fock_space(2).unwrap();
        assert!(matches!(glauber_gamma(&small.vacuum(), 2, 0, 1, 0), Err(HopsError::OrderingHeadroom { .. })));
    }

    #[test]
    fn factorization_for_polarized_inputs() {
        let s = make_fock_space(24).unwrap();
        let p = c(0.6, -0.5);
        let ax = c(0.9, 0.4);
        let psi = coherent_state(&s, ax, p * ax).unwrap();
        let report = factorization_check(&psi, p, FactorizationKind::Polarized, 3).unwrap();
        assert!(report.max_derived_deviation() < 1e-9);
        // printed exponents p^{m_x} only coincide when m_x = n_y
        assert!(report.printed_mismatches(1e-6).count() > 0);

        let psi0 = coherent_state(&s, ax, c(0.0, 0.0)).unwrap();
        let report = factorization_check(&psi0, c(0.0, 0.0), FactorizationKind::Polarized, 3).unwrap();
        for row in &report.rows {
            if row.orders[1] + row.orders[3] > 0 {
                assert!(row.gamma.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn factorization_for_hops_inputs_matches_derived_form() {
        let s = make_fock_space(24).unwrap();
        let ph = c(0.5, 0.7);
        let ax = c(0.6, 0.8);
        let psi = coherent_state(&s, ax, ph * ax.conj()).unwrap();
        let report = factorization_check(&psi, ph, FactorizationKind::Hops, 2).unwrap();
        assert!(report.max_derived_deviation() < 1e-9);
        assert!(report.max_printed_deviation() > 1e-3);
    }
}
