//! Single-qubit states, unitaries and channels.
//!
//! [`KrausChannel`] is the representation for physical maps and
//! [`QubitMapSpec`] the one for arbitrary linear maps, which need not be
//! positive. The coherence-booster check lives here because it is a
//! statement about which `QubitMapSpec`s can be physical.

use nalgebra::Matrix4;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::C64;

/// Row-major 2×2 complex matrix.
pub type Mat2 = [[C64; 2]; 2];
/// Row-major 4×4 complex matrix.
pub type Mat4 = [[C64; 4]; 4];

/// Tolerance for constructor invariants.
pub const STATE_TOL: f64 = 1e-12;
/// Tolerance for channel completeness and channel outputs.
pub const CHANNEL_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub const IDENTITY: Mat2 = [[ONE, ZERO], [ZERO, ONE]];

/// `e_ij`: the matrix unit with a one at `(i, j)`.
pub fn matrix_unit(i: usize, j: usize) -> Mat2 {
    let mut m = [[ZERO; 2]; 2];
    m[i][j] = ONE;
    m
}

pub fn mat_mul(x: &Mat2, y: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

pub fn adjoint(x: &Mat2) -> Mat2 {
    [[x[0][0].conj(), x[1][0].conj()], [x[0][1].conj(), x[1][1].conj()]]
}

fn add_scaled(acc: &mut Mat2, w: C64, x: &Mat2) {
    for i in 0..2 {
        for j in 0..2 {
            acc[i][j] += w * x[i][j];
        }
    }
}

/// `k x k†`
fn conjugate(k: &Mat2, x: &Mat2) -> Mat2 {
    mat_mul(&mat_mul(k, x), &adjoint(k))
}

/// Largest entrywise modulus of `x - y`.
pub fn max_abs_diff(x: &Mat2, y: &Mat2) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            d = d.max((x[i][j] - y[i][j]).norm());
        }
    }
    d
}

fn all_finite(m: &Mat2) -> bool {
    m.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn is_hermitian(m: &Mat2, tol: f64) -> bool {
    m[0][0].im.abs() <= tol && m[1][1].im.abs() <= tol && (m[0][1] - m[1][0].conj()).norm() <= tol
}

/// Smallest eigenvalue of a Hermitian 2×2 matrix, by the closed form
/// `(tr - sqrt((m00 - m11)^2 + 4|m01|^2)) / 2`.
pub fn min_eigenvalue(m: &Mat2) -> Result<f64> {
    if !all_finite(m) {
        return Err(invalid("matrix has non-finite entries"));
    }
    if !is_hermitian(m, STATE_TOL) {
        return Err(invalid("matrix is not Hermitian"));
    }
    Ok(hermitian_eigenvalues(m).0)
}

/// Both eigenvalues of a Hermitian 2×2 matrix, ascending.
fn hermitian_eigenvalues(m: &Mat2) -> (f64, f64) {
    let (p, q) = (m[0][0].re, m[1][1].re);
    let off = 0.5 * (m[0][1] + m[1][0].conj());
    let disc = ((p - q).powi(2) + 4.0 * off.norm_sqr()).sqrt();
    (0.5 * (p + q - disc), 0.5 * (p + q + disc))
}

/// Single-qubit density matrix `(a b; b* c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityMatrix2 {
    a: f64,
    b: C64,
    c: f64,
}

impl DensityMatrix2 {
    pub fn new(a: f64, b: C64, c: f64) -> Result<Self> {
        Self::validated(a, b, c, STATE_TOL)
    }

    fn validated(a: f64, b: C64, c: f64, tol: f64) -> Result<Self> {
        if !(a.is_finite() && c.is_finite() && b.re.is_finite() && b.im.is_finite()) {
            return Err(invalid("density matrix entries must be finite"));
        }
        if (a + c - 1.0).abs() > tol {
            return Err(invalid(format!("trace {} differs from 1", a + c)));
        }
        if a < -tol || c < -tol {
            return Err(invalid("populations must be non-negative"));
        }
        if b.norm_sqr() > a * c + tol {
            return Err(invalid(format!("|b|^2 = {} exceeds a*c = {}", b.norm_sqr(), a * c)));
        }
        Ok(Self { a, b, c })
    }

    pub(crate) fn from_parts_unchecked(a: f64, b: C64, c: f64) -> Self {
        Self { a, b, c }
    }

    /// State with Bloch vector `(x, y, z)`, `|r| <= 1`.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new(0.5 * (1.0 + z), C64::new(0.5 * x, -0.5 * y), 0.5 * (1.0 - z))
    }

    pub fn maximally_mixed() -> Self {
        Self { a: 0.5, b: ZERO, c: 0.5 }
    }

    /// `|+><+|`
    pub fn plus() -> Self {
        Self { a: 0.5, b: C64::new(0.5, 0.0), c: 0.5 }
    }

    pub fn ground() -> Self {
        Self { a: 1.0, b: ZERO, c: 0.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> C64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.c
    }

    pub fn matrix(&self) -> Mat2 {
        [[C64::new(self.a, 0.0), self.b], [self.b.conj(), C64::new(self.c, 0.0)]]
    }

    /// Hermitian part of `m` read as a state, checked at `tol`.
    pub fn from_matrix(m: &Mat2, tol: f64) -> Result<Self> {
        if !is_hermitian(m, tol) {
            return Err(invalid("matrix is not Hermitian"));
        }
        Self::validated(m[0][0].re, 0.5 * (m[0][1] + m[1][0].conj()), m[1][1].re, tol)
    }

    /// Same populations, new coherence. Callers guarantee `|b| <= |self.b|`
    /// or otherwise keep positivity.
    pub(crate) fn with_coherence(&self, b: C64) -> Self {
        Self { b, ..*self }
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        hermitian_eigenvalues(&self.matrix())
    }
}

/// Off-diagonal magnitude `|b|`.
pub fn coherence(rho: &DensityMatrix2) -> f64 {
    rho.b.norm()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2(Mat2);

impl Unitary2 {
    pub fn new(m: Mat2) -> Result<Self> {
        if !all_finite(&m) {
            return Err(invalid("unitary entries must be finite"));
        }
        let prod = mat_mul(&adjoint(&m), &m);
        if max_abs_diff(&prod, &IDENTITY) > STATE_TOL {
            return Err(invalid("matrix is not unitary"));
        }
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(IDENTITY)
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn compose(&self, then: &Unitary2) -> Unitary2 {
        Unitary2(mat_mul(&then.0, &self.0))
    }
}

/// `diag(e^{-i theta/2}, e^{i theta/2})`
pub fn rz(theta: f64) -> Result<Unitary2> {
    if !theta.is_finite() {
        return Err(invalid("rotation angle must be finite"));
    }
    Ok(rz_unchecked(theta))
}

pub(crate) fn rz_unchecked(theta: f64) -> Unitary2 {
    let h = 0.5 * theta;
    Unitary2([[C64::from_polar(1.0, -h), ZERO], [ZERO, C64::from_polar(1.0, h)]])
}

/// `u rho u†`
pub fn apply_unitary(u: &Unitary2, rho: &DensityMatrix2) -> DensityMatrix2 {
    let m = conjugate(&u.0, &rho.matrix());
    DensityMatrix2 { a: m[0][0].re, b: m[0][1], c: m[1][1].re }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausTerm {
    pub weight: f64,
    pub op: Mat2,
}

/// `rho -> sum_i w_i K_i rho K_i†` with `sum_i w_i K_i† K_i = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    terms: Vec<KrausTerm>,
}

impl KrausChannel {
    pub fn new(terms: Vec<KrausTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidChannel("no Kraus terms".into()));
        }
        let mut completeness = [[ZERO; 2]; 2];
        for t in &terms {
            if !(0.0..=1.0).contains(&t.weight) {
                return Err(Error::InvalidChannel(format!("weight {} outside [0, 1]", t.weight)));
            }
            if !all_finite(&t.op) {
                return Err(Error::InvalidChannel("non-finite Kraus operator".into()));
            }
            add_scaled(&mut completeness, C64::new(t.weight, 0.0), &mat_mul(&adjoint(&t.op), &t.op));
        }
        let err = max_abs_diff(&completeness, &IDENTITY);
        if err > CHANNEL_TOL {
            return Err(Error::InvalidChannel(format!("not trace preserving (deviation {err:.3e})")));
        }
        Ok(Self { terms })
    }

    pub fn identity() -> Self {
        Self { terms: vec![KrausTerm { weight: 1.0, op: IDENTITY }] }
    }

    pub fn from_unitary(u: &Unitary2) -> Self {
        Self { terms: vec![KrausTerm { weight: 1.0, op: u.0 }] }
    }

    pub fn terms(&self) -> &[KrausTerm] {
        &self.terms
    }

    /// Action on an arbitrary matrix.
    pub fn apply_matrix(&self, x: &Mat2) -> Mat2 {
        let mut out = [[ZERO; 2]; 2];
        for t in &self.terms {
            add_scaled(&mut out, C64::new(t.weight, 0.0), &conjugate(&t.op, x));
        }
        out
    }
}

pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix2) -> DensityMatrix2 {
    let m = ch.apply_matrix(&rho.matrix());
    DensityMatrix2 { a: m[0][0].re, b: 0.5 * (m[0][1] + m[1][0].conj()), c: m[1][1].re }
}

/// Linear map on 2×2 matrices given by the images of the four matrix units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitMapSpec {
    pub img00: Mat2,
    pub img01: Mat2,
    pub img10: Mat2,
    pub img11: Mat2,
}

impl QubitMapSpec {
    pub fn new(img00: Mat2, img01: Mat2, img10: Mat2, img11: Mat2) -> Result<Self> {
        if ![img00, img01, img10, img11].iter().all(all_finite) {
            return Err(invalid("map images must be finite"));
        }
        Ok(Self { img00, img01, img10, img11 })
    }

    pub fn identity() -> Self {
        Self { img00: matrix_unit(0, 0), img01: matrix_unit(0, 1), img10: matrix_unit(1, 0), img11: matrix_unit(1, 1) }
    }

    /// `X -> tr(X) I/2`
    pub fn completely_depolarizing() -> Self {
        let half = [[C64::new(0.5, 0.0), ZERO], [ZERO, C64::new(0.5, 0.0)]];
        let zero = [[ZERO; 2]; 2];
        Self { img00: half, img01: zero, img10: zero, img11: half }
    }

    /// Diagonal-fixing map sending `e01 -> beta e01 + ...` with
    /// `img10 = img01†`, i.e. Hermiticity preserving. `beta_prime` is the
    /// (0,1) entry of `img10`.
    pub fn diagonal_fixing(beta: C64, beta_prime: C64) -> Self {
        let img01 = [[ZERO, beta], [beta_prime.conj(), ZERO]];
        Self { img00: matrix_unit(0, 0), img01, img10: adjoint(&img01), img11: matrix_unit(1, 1) }
    }

    fn image(&self, i: usize, j: usize) -> &Mat2 {
        match (i, j) {
            (0, 0) => &self.img00,
            (0, 1) => &self.img01,
            (1, 0) => &self.img10,
            _ => &self.img11,
        }
    }

    pub fn apply(&self, x: &Mat2) -> Mat2 {
        let mut out = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                add_scaled(&mut out, x[i][j], self.image(i, j));
            }
        }
        out
    }

    pub fn is_hermiticity_preserving(&self, tol: f64) -> bool {
        max_abs_diff(&self.img10, &adjoint(&self.img01)) <= tol
            && is_hermitian(&self.img00, tol)
            && is_hermitian(&self.img11, tol)
    }

    pub fn fixes_diagonal(&self, tol: f64) -> bool {
        max_abs_diff(&self.img00, &matrix_unit(0, 0)) <= tol && max_abs_diff(&self.img11, &matrix_unit(1, 1)) <= tol
    }
}

impl From<&KrausChannel> for QubitMapSpec {
    fn from(ch: &KrausChannel) -> Self {
        Self {
            img00: ch.apply_matrix(&matrix_unit(0, 0)),
            img01: ch.apply_matrix(&matrix_unit(0, 1)),
            img10: ch.apply_matrix(&matrix_unit(1, 0)),
            img11: ch.apply_matrix(&matrix_unit(1, 1)),
        }
    }
}

/// Choi matrix `sum_ij e_ij ⊗ F(e_ij)`; block `(i, j)` is `F(e_ij)`.
pub fn choi_matrix(spec: &QubitMapSpec) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            let img = spec.image(i, j);
            for r in 0..2 {
                for s in 0..2 {
                    out[2 * i + r][2 * j + s] = img[r][s];
                }
            }
        }
    }
    out
}

/// Eigenvalues of the Hermitian part of a 4×4 matrix, ascending.
pub fn hermitian_eigenvalues4(m: &Mat4) -> [f64; 4] {
    let mat = Matrix4::from_fn(|r, s| 0.5 * (m[r][s] + m[s][r].conj()));
    let mut ev: Vec<f64> = mat.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    [ev[0], ev[1], ev[2], ev[3]]
}

/// Complete positivity (Choi matrix Hermitian and PSD) plus trace
/// preservation, both within `tol`.
pub fn is_cptp(spec: &QubitMapSpec, tol: f64) -> bool {
    let choi = choi_matrix(spec);
    for r in 0..4 {
        for s in 0..4 {
            if (choi[r][s] - choi[s][r].conj()).norm() > tol {
                return false;
            }
        }
    }
    if hermitian_eigenvalues4(&choi)[0] < -tol {
        return false;
    }
    (0..2).all(|i| {
        (0..2).all(|j| {
            let img = spec.image(i, j);
            let expect = if i == j { ONE } else { ZERO };
            (img[0][0] + img[1][1] - expect).norm() <= tol
        })
    })
}

/// Input state and output that show a coherence-increasing map is not
/// positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoosterWitness {
    /// Maximiser of `|beta + e^{i theta} beta'|`, in `(-pi, pi]`.
    pub theta: f64,
    /// `(1/2)(1, e^{-i theta/2}; e^{i theta/2}, 1)`, so that `b*/b = e^{i theta}`.
    pub rho0: DensityMatrix2,
    pub output: Mat2,
    pub min_eig: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoosterOutcome {
    Violation(BoosterWitness),
    /// `max_theta |beta + e^{i theta} beta'| <= 1`: no pure equatorial state
    /// is pushed outside the Bloch ball.
    NoViolation { max_modulus: f64 },
}

/// Searches for a state that a diagonal-fixing map sends to a non-positive
/// matrix.
pub fn booster_counterexample(spec: &QubitMapSpec) -> Result<BoosterOutcome> {
    if !spec.fixes_diagonal(STATE_TOL) {
        return Err(Error::PreconditionViolation("map must fix both diagonal matrix units".into()));
    }
    let beta = spec.img01[0][1];
    let beta_prime = spec.img10[0][1];
    let theta = if beta_prime.norm() == 0.0 || beta.norm() == 0.0 {
        0.0
    } else {
        canonical_angle(beta.arg() - beta_prime.arg())
    };
    let max_modulus = (beta + C64::from_polar(1.0, theta) * beta_prime).norm();
    if max_modulus <= 1.0 {
        return Ok(BoosterOutcome::NoViolation { max_modulus });
    }
    let rho0 = DensityMatrix2::new(0.5, 0.5 * C64::from_polar(1.0, -0.5 * theta), 0.5)?;
    let output = spec.apply(&rho0.matrix());
    if !is_hermitian(&output, STATE_TOL) {
        return Err(Error::PreconditionViolation("map is not Hermiticity preserving".into()));
    }
    let min_eig = hermitian_eigenvalues(&output).0;
    Ok(BoosterOutcome::Violation(BoosterWitness { theta, rho0, output, min_eig }))
}

/// Maps an angle to `(-pi, pi]`.
pub fn canonical_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut t = theta.rem_euclid(two_pi);
    if t > PI {
        t -= two_pi;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Cyclic Jacobi on the real 8×8 embedding `[[A, -B], [B, A]]` of
    /// `H = A + iB`. Each eigenvalue of `H` appears twice.
    fn jacobi_eigen_oracle(h: &Mat4) -> [f64; 4] {
        let mut m = [[0.0f64; 8]; 8];
        for r in 0..4 {
            for s in 0..4 {
                m[r][s] = h[r][s].re;
                m[r + 4][s + 4] = h[r][s].re;
                m[r + 4][s] = h[r][s].im;
                m[r][s + 4] = -h[r][s].im;
            }
        }
        for _sweep in 0..100 {
            let off: f64 = (0..8).flat_map(|p| (0..8).map(move |q| (p, q))).filter(|(p, q)| p != q).map(|(p, q)| m[p][q] * m[p][q]).sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..8 {
                for q in p + 1..8 {
                    if m[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let tau = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let t = if tau == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..8 {
                        let (mkp, mkq) = (m[k][p], m[k][q]);
                        m[k][p] = c * mkp - s * mkq;
                        m[k][q] = s * mkp + c * mkq;
                    }
                    for k in 0..8 {
                        let (mpk, mqk) = (m[p][k], m[q][k]);
                        m[p][k] = c * mpk - s * mqk;
                        m[q][k] = s * mpk + c * mqk;
                    }
                }
            }
        }
        let mut d: Vec<f64> = (0..8).map(|i| m[i][i]).collect();
        d.sort_by(f64::total_cmp);
        [d[0], d[2], d[4], d[6]]
    }

    fn close4(x: [f64; 4], y: [f64; 4], tol: f64) -> bool {
        x.iter().zip(y.iter()).all(|(a, b)| (a - b).abs() < tol)
    }

    #[test]
    fn rz_zero_is_identity() {
        assert_eq!(*rz(0.0).unwrap().matrix(), IDENTITY);
    }

    #[test]
    fn rz_rejects_non_finite() {
        assert!(matches!(rz(f64::NAN), Err(Error::InvalidArgument(_))));
        assert!(rz(f64::INFINITY).is_err());
    }

    #[test]
    fn rz_pi_flips_coherence() {
        let out = apply_unitary(&rz(PI).unwrap(), &DensityMatrix2::plus());
        assert!((out.b() - C64::new(-0.5, 0.0)).norm() < 1e-15);
        assert_eq!((out.a(), out.c()), (0.5, 0.5));
    }

    #[test]
    fn rz_phases_add() {
        let prod = rz(0.3).unwrap().compose(&rz(0.4).unwrap());
        assert!(max_abs_diff(prod.matrix(), rz(0.7).unwrap().matrix()) < 1e-15);
    }

    #[test]
    fn rz_conjugation_rotates_b() {
        let rho = DensityMatrix2::new(0.7, C64::new(0.2, 0.1), 0.3).unwrap();
        let out = apply_unitary(&rz(1.1).unwrap(), &rho);
        assert!((out.b() - rho.b() * C64::from_polar(1.0, -1.1)).norm() < 1e-15);
        assert!((out.a() - 0.7).abs() < 1e-15 && (out.c() - 0.3).abs() < 1e-15);
        let twice = apply_unitary(&rz(0.5).unwrap(), &apply_unitary(&rz(0.6).unwrap(), &rho));
        assert!((twice.b() - out.b()).norm() < 1e-15);
    }

    #[test]
    fn identity_unitary_and_channel_are_no_ops() {
        let rho = DensityMatrix2::new(0.6, C64::new(0.1, -0.2), 0.4).unwrap();
        assert_eq!(apply_unitary(&Unitary2::identity(), &rho), rho);
        assert_eq!(apply_channel(&KrausChannel::identity(), &rho), rho);
    }

    #[test]
    fn state_constructor_invariants() {
        assert!(DensityMatrix2::new(0.5, C64::new(0.0, 0.0), 0.6).is_err());
        assert!(DensityMatrix2::new(1.1, C64::new(0.0, 0.0), -0.1).is_err());
        assert!(DensityMatrix2::new(0.5, C64::new(0.6, 0.0), 0.5).is_err());
        assert!(DensityMatrix2::new(0.5, C64::new(f64::NAN, 0.0), 0.5).is_err());
        assert!(DensityMatrix2::new(0.5, C64::new(0.5, 0.0), 0.5).is_ok());
    }

    #[test]
    fn unitary_constructor_rejects_non_unitary() {
        let m = [[C64::new(2.0, 0.0), ZERO], [ZERO, ONE]];
        assert!(Unitary2::new(m).is_err());
    }

    #[test]
    fn coherence_values() {
        assert_eq!(coherence(&DensityMatrix2::maximally_mixed()), 0.0);
        assert_eq!(coherence(&DensityMatrix2::plus()), 0.5);
        let rho = DensityMatrix2::new(0.5, C64::new(1.0 / 6.0, 0.0), 0.5).unwrap();
        assert_eq!(coherence(&rho), 1.0 / 6.0);
    }

    #[test]
    fn min_eigenvalue_examples() {
        let half = [[C64::new(0.5, 0.0), ZERO], [ZERO, C64::new(0.5, 0.0)]];
        assert_eq!(min_eigenvalue(&half).unwrap(), 0.5);
        let x = C64::from_polar(1.2, 0.7);
        let m = [[C64::new(0.5, 0.0), 0.5 * x], [0.5 * x.conj(), C64::new(0.5, 0.0)]];
        assert!((min_eigenvalue(&m).unwrap() + 0.1).abs() < 1e-14);
        let bad = [[ONE, ONE], [ZERO, ONE]];
        assert!(matches!(min_eigenvalue(&bad), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn kraus_channel_rejects_non_trace_preserving() {
        let half = KrausTerm { weight: 0.5, op: IDENTITY };
        assert!(matches!(KrausChannel::new(vec![half]), Err(Error::InvalidChannel(_))));
        assert!(KrausChannel::new(vec![]).is_err());
        assert!(KrausChannel::new(vec![KrausTerm { weight: 1.5, op: IDENTITY }]).is_err());
    }

    #[test]
    fn choi_identity_is_twice_bell_projector() {
        let choi = choi_matrix(&QubitMapSpec::identity());
        let expected = [0.0, 0.0, 0.0, 2.0];
        assert!(close4(jacobi_eigen_oracle(&choi), expected, 1e-12));
        assert!(close4(hermitian_eigenvalues4(&choi), expected, 1e-10));
        assert_eq!(choi[0][3], ONE);
        assert_eq!(choi[3][0], ONE);
    }

    #[test]
    fn choi_of_depolarizing_is_half_identity() {
        let choi = choi_matrix(&QubitMapSpec::completely_depolarizing());
        for r in 0..4 {
            for s in 0..4 {
                let expect = if r == s { 0.5 } else { 0.0 };
                assert_eq!(choi[r][s], C64::new(expect, 0.0));
            }
        }
        assert!(close4(hermitian_eigenvalues4(&choi), [0.5; 4], 1e-10));
        assert!(close4(jacobi_eigen_oracle(&choi), [0.5; 4], 1e-12));
    }

    #[test]
    fn choi_of_rz_conjugation_has_rank_one() {
        let spec = QubitMapSpec::from(&KrausChannel::from_unitary(&rz(0.9).unwrap()));
        let oracle = jacobi_eigen_oracle(&choi_matrix(&spec));
        assert!(close4(oracle, [0.0, 0.0, 0.0, 2.0], 1e-12));
        assert!(close4(hermitian_eigenvalues4(&choi_matrix(&spec)), oracle, 1e-10));
    }

    #[test]
    fn cptp_classification() {
        assert!(is_cptp(&QubitMapSpec::identity(), 1e-10));
        assert!(is_cptp(&QubitMapSpec::completely_depolarizing(), 1e-10));
        assert!(!is_cptp(&QubitMapSpec::diagonal_fixing(C64::new(1.2, 0.0), ZERO), 1e-10));
        // transpose: positive but not completely positive
        let t = QubitMapSpec::new(matrix_unit(0, 0), matrix_unit(1, 0), matrix_unit(0, 1), matrix_unit(1, 1)).unwrap();
        assert!(!is_cptp(&t, 1e-10));
    }

    #[test]
    fn booster_beta_1_2() {
        let spec = QubitMapSpec::diagonal_fixing(C64::new(1.2, 0.0), ZERO);
        match booster_counterexample(&spec).unwrap() {
            BoosterOutcome::Violation(w) => {
                assert!((w.min_eig + 0.1).abs() < 1e-14);
                assert_eq!(w.rho0.trace(), 1.0);
                assert!(w.rho0.eigenvalues().0.abs() < 1e-15);
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn booster_identity_has_no_violation() {
        assert_eq!(
            booster_counterexample(&QubitMapSpec::identity()).unwrap(),
            BoosterOutcome::NoViolation { max_modulus: 1.0 }
        );
    }

    #[test]
    fn booster_split_weight() {
        let spec = QubitMapSpec::diagonal_fixing(C64::new(0.7, 0.0), C64::new(0.7, 0.0));
        let BoosterOutcome::Violation(w) = booster_counterexample(&spec).unwrap() else { panic!() };
        assert_eq!(w.theta, 0.0);
        assert!((w.min_eig + 0.2).abs() < 1e-14);
    }

    #[test]
    fn booster_phase_alignment() {
        let spec = QubitMapSpec::diagonal_fixing(C64::from_polar(0.8, 1.0), C64::from_polar(0.5, -0.4));
        let BoosterOutcome::Violation(w) = booster_counterexample(&spec).unwrap() else { panic!() };
        assert!((w.theta - 1.4).abs() < 1e-14);
        assert!((w.min_eig - (0.5 - 0.5 * 1.3)).abs() < 1e-14);
    }

    #[test]
    fn booster_requires_diagonal_fixing() {
        assert!(matches!(
            booster_counterexample(&QubitMapSpec::completely_depolarizing()),
            Err(Error::PreconditionViolation(_))
        ));
    }

    fn arb_state() -> impl Strategy<Value = DensityMatrix2> {
        (0.0..1.0f64, 0.0..PI, 0.0..2.0 * PI).prop_map(|(r, pol, az)| {
            DensityMatrix2::from_bloch(r * pol.sin() * az.cos(), r * pol.sin() * az.sin(), r * pol.cos()).unwrap()
        })
    }

    fn arb_unitary() -> impl Strategy<Value = Unitary2> {
        (0.0..2.0 * PI, 0.0..PI, 0.0..2.0 * PI, 0.0..2.0 * PI).prop_map(|(g, t, p, l)| {
            let (c, s) = ((0.5 * t).cos(), (0.5 * t).sin());
            let ph = C64::from_polar(1.0, g);
            Unitary2::new([
                [ph * c, -ph * C64::from_polar(s, l)],
                [ph * C64::from_polar(s, p), ph * C64::from_polar(c, p + l)],
            ])
            .unwrap()
        })
    }

    /// Random Kraus set: unitary dilation columns give `sum K†K = I`.
    fn arb_channel() -> impl Strategy<Value = KrausChannel> {
        (arb_unitary(), arb_unitary(), 0.0..1.0f64).prop_map(|(u, v, w)| {
            let (um, vm) = (u.matrix(), v.matrix());
            // K0 = sqrt(w) U, K1 = sqrt(1-w) V with weights folded in
            KrausChannel::new(vec![KrausTerm { weight: w, op: *um }, KrausTerm { weight: 1.0 - w, op: *vm }]).unwrap()
        })
    }

    proptest! {
        #[test]
        fn unitary_preserves_spectrum(u in arb_unitary(), rho in arb_state()) {
            let (l0, l1) = rho.eigenvalues();
            let (m0, m1) = apply_unitary(&u, &rho).eigenvalues();
            prop_assert!((l0 - m0).abs() < 1e-12 && (l1 - m1).abs() < 1e-12);
        }

        #[test]
        fn channel_output_is_a_state(ch in arb_channel(), rho in arb_state()) {
            let out = apply_channel(&ch, &rho);
            prop_assert!((out.trace() - 1.0).abs() < CHANNEL_TOL);
            prop_assert!(min_eigenvalue(&out.matrix()).unwrap() >= -CHANNEL_TOL);
            prop_assert!(DensityMatrix2::from_matrix(&out.matrix(), CHANNEL_TOL).is_ok());
        }

        #[test]
        fn kraus_choi_is_psd(ch in arb_channel()) {
            let spec = QubitMapSpec::from(&ch);
            prop_assert!(jacobi_eigen_oracle(&choi_matrix(&spec))[0] >= -1e-10);
            prop_assert!(is_cptp(&spec, 1e-10));
        }
    }
}
