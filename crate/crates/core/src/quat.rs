//! Quaternions, vectors of ℍⁿ, the quaternionic structure 𝔍 and the
//! action of Sp(1)Sp(n).
//!
//! ℍⁿ is a right quaternionic vector space stored as 4n real coordinates,
//! slot `r` holding `(w, x, y, z)` of the r-th quaternionic coordinate.
//! Elements of 𝔍 are right multiplications `R_u(v) = v·u` by imaginary
//! quaternions. The standard canonical basis is
//! `J₁ = R_i, J₂ = R_j, J₃ = -R_k`; since `R_a R_b = R_{ba}`, this sign makes
//! `J₁J₂ = J₃` hold literally.
//!
//! Coordinates `a ∈ ℝ³` of `a₁J₁ + a₂J₂ + a₃J₃` are called *structure
//! coordinates*; they differ from imaginary-quaternion coordinates by the
//! reflection `diag(1, 1, -1)`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{QkaError, Result};

/// Tolerance on `|q| - 1` for unit quaternions.
pub const UNIT_TOL: f64 = 1e-12;
/// Tolerance on `max |A*A - I|` for quaternionic unitary matrices.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn imaginary(v: Vector3<f64>) -> Self {
        Self::new(0.0, v.x, v.y, v.z)
    }

    /// `exp(u·θ/2)` for a unit imaginary axis `u`: conjugation by it rotates
    /// Im ℍ by `θ` about `u`.
    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64) -> Self {
        let axis = axis.normalize();
        let (s, c) = (0.5 * angle).sin_cos();
        Self::new(c, s * axis.x, s * axis.y, s * axis.z)
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_squared(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn normalize(self) -> Self {
        self.scale(1.0 / self.norm())
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(s * self.w, s * self.x, s * self.y, s * self.z)
    }

    pub fn vector_part(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn dot(self, o: Self) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn is_unit(self) -> bool {
        (self.norm() - 1.0).abs() <= UNIT_TOL
    }

    /// Matrix of `u ↦ q u q̄` on Im ℍ in the `(i, j, k)` coordinates.
    pub fn rotation_matrix(self) -> Matrix3<f64> {
        let q = self.normalize();
        let (w, x, y, z) = (q.w, q.x, q.y, q.z);
        Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        )
    }

    pub fn random_unit<R: rand::Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let q = Self::new(
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
            );
            if q.norm() > 1e-6 {
                return q.normalize();
            }
        }
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

/// Imaginary quaternion `u` with `R_u = a₁J₁ + a₂J₂ + a₃J₃` in the standard
/// canonical basis.
pub fn structure_quaternion(a: &Vector3<f64>) -> Quaternion {
    Quaternion::new(0.0, a.x, a.y, -a.z)
}

/// Inverse of [`structure_quaternion`] on imaginary quaternions.
pub fn structure_coords(u: Quaternion) -> Vector3<f64> {
    Vector3::new(u.x, u.y, -u.z)
}

/// Writes `src·u` (slot-wise right multiplication) into `dst`.
pub fn right_mul_slice(src: &[f64], u: Quaternion, dst: &mut [f64]) {
    debug_assert_eq!(src.len(), dst.len());
    for (s, d) in src.chunks_exact(4).zip(dst.chunks_exact_mut(4)) {
        let p = Quaternion::new(s[0], s[1], s[2], s[3]) * u;
        d.copy_from_slice(&[p.w, p.x, p.y, p.z]);
    }
}

/// A vector of ℍⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct HVector {
    coords: Vec<f64>,
}

impl HVector {
    pub fn zeros(n: usize) -> Self {
        Self { coords: vec![0.0; 4 * n] }
    }

    pub fn from_coords(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.len() % 4 != 0 {
            return Err(QkaError::InvalidInput(format!(
                "coordinate length {} is not a positive multiple of 4",
                coords.len()
            )));
        }
        Ok(Self { coords })
    }

    pub fn from_quaternions(slots: &[Quaternion]) -> Self {
        let coords = slots.iter().flat_map(|q| [q.w, q.x, q.y, q.z]).collect();
        Self { coords }
    }

    /// The r-th quaternionic axis `e_r` (real unit in slot r).
    pub fn axis(n: usize, r: usize) -> Self {
        let mut v = Self::zeros(n);
        v.coords[4 * r] = 1.0;
        v
    }

    pub fn random<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self { coords: (0..4 * n).map(|_| StandardNormal.sample(rng)).collect() }
    }

    pub fn n(&self) -> usize {
        self.coords.len() / 4
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn slot(&self, r: usize) -> Quaternion {
        let c = &self.coords[4 * r..4 * r + 4];
        Quaternion::new(c[0], c[1], c[2], c[3])
    }

    pub fn set_slot(&mut self, r: usize, q: Quaternion) {
        self.coords[4 * r..4 * r + 4].copy_from_slice(&[q.w, q.x, q.y, q.z]);
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { coords: self.coords.iter().map(|c| c * s).collect() }
    }

    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a + s * b).collect();
        Self { coords }
    }

    /// `v·q`, the right scalar action.
    pub fn right_mul(&self, q: Quaternion) -> Self {
        let mut out = Self::zeros(self.n());
        right_mul_slice(&self.coords, q, &mut out.coords);
        out
    }

    pub fn to_dvector(&self) -> nalgebra::DVector<f64> {
        nalgebra::DVector::from_column_slice(&self.coords)
    }
}

/// An ordered triple `(J₁, J₂, J₃)` of 𝔍 with `JᵢJᵢ₊₁ = Jᵢ₊₂`.
///
/// Column `i` of `rotation` holds the structure coordinates of `Jᵢ` with
/// respect to the standard triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalBasis {
    rotation: Matrix3<f64>,
}

impl Default for CanonicalBasis {
    fn default() -> Self {
        Self::standard()
    }
}

impl CanonicalBasis {
    pub fn standard() -> Self {
        Self { rotation: Matrix3::identity() }
    }

    pub fn from_rotation(rotation: Matrix3<f64>) -> Result<Self> {
        let residual = (rotation.transpose() * rotation - Matrix3::identity()).amax();
        let det = rotation.determinant();
        if residual > 1e-10 || (det - 1.0).abs() > 1e-10 {
            return Err(QkaError::NotRotation { residual, det });
        }
        Ok(Self { rotation })
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    /// The imaginary quaternion `u` with `Jᵢ = R_u` (`i ∈ {0, 1, 2}`).
    pub fn element(&self, i: usize) -> Quaternion {
        structure_quaternion(&self.rotation.column(i).into_owned())
    }

    pub fn apply(&self, i: usize, v: &HVector) -> HVector {
        v.right_mul(self.element(i))
    }

    /// The basis `T Jᵢ T⁻¹`.
    pub fn conjugated_by(&self, t: &GroupElement) -> Self {
        let flip = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        let r = flip * t.induced_rotation() * flip;
        Self { rotation: r * self.rotation }
    }
}

/// Right multiplication by a unit imaginary quaternion.
pub fn right_mult(u: Quaternion, v: &HVector) -> Result<HVector> {
    if u.w.abs() > UNIT_TOL || !u.is_unit() {
        return Err(QkaError::InvalidInput("complex structure must be a unit imaginary quaternion".into()));
    }
    Ok(v.right_mul(u))
}

/// An n×n quaternionic matrix acting on the left of ℍⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    n: usize,
    entries: Vec<Quaternion>,
}

impl QMatrix {
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![Quaternion::ZERO; n * n];
        for i in 0..n {
            entries[i * n + i] = Quaternion::ONE;
        }
        Self { n, entries }
    }

    pub fn from_entries(n: usize, entries: Vec<Quaternion>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(QkaError::DimensionMismatch { expected: n * n, found: entries.len() });
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Quaternion {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.entries
    }

    pub fn conj_transpose(&self) -> Self {
        let n = self.n;
        let mut entries = vec![Quaternion::ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.get(i, j).conj();
            }
        }
        Self { n, entries }
    }

    pub fn mul_mat(&self, o: &Self) -> Self {
        let n = self.n;
        let mut entries = vec![Quaternion::ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = Quaternion::ZERO;
                for l in 0..n {
                    acc += self.get(i, l) * o.get(l, j);
                }
                entries[i * n + j] = acc;
            }
        }
        Self { n, entries }
    }

    pub fn mul_vec(&self, v: &HVector) -> HVector {
        let mut out = HVector::zeros(self.n);
        for i in 0..self.n {
            let mut acc = Quaternion::ZERO;
            for j in 0..self.n {
                acc += self.get(i, j) * v.slot(j);
            }
            out.set_slot(i, acc);
        }
        out
    }

    /// `max |A*A - I|` over quaternion components.
    pub fn unitarity_residual(&self) -> f64 {
        let prod = self.conj_transpose().mul_mat(self);
        let id = Self::identity(self.n);
        prod.entries
            .iter()
            .zip(&id.entries)
            .map(|(a, b)| {
                let d = *a - *b;
                d.w.abs().max(d.x.abs()).max(d.y.abs()).max(d.z.abs())
            })
            .fold(0.0, f64::max)
    }

    /// The 4n×4n real matrix of `v ↦ Av`.
    pub fn to_real(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(4 * n, 4 * n);
        for c in 0..4 * n {
            let mut e = vec![0.0; 4 * n];
            e[c] = 1.0;
            let img = self.mul_vec(&HVector { coords: e });
            m.set_column(c, &img.to_dvector());
        }
        m
    }
}

/// Haar-adjacent random element of Sp(n): quaternionic Gram–Schmidt on a
/// matrix of independent standard-normal quaternions.
pub fn random_unitary(n: usize, seed: u64) -> QMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_unitary_with(n, &mut rng)
}

fn random_unitary_with<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> QMatrix {
    assert!(n >= 1, "random_unitary requires n >= 1");
    let mut cols: Vec<Vec<Quaternion>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut c: Vec<Quaternion> = (0..n).map(|_| Quaternion::random_unit(rng)).collect();
        // two passes of classical Gram-Schmidt keep A*A = I near round-off
        for _ in 0..2 {
            for u in &cols {
                // component along the quaternionic line u·ℍ is u·(u* c)
                let mut h = Quaternion::ZERO;
                for (ui, ci) in u.iter().zip(&c) {
                    h += ui.conj() * *ci;
                }
                for (ci, ui) in c.iter_mut().zip(u) {
                    *ci = *ci - *ui * h;
                }
            }
        }
        let norm = c.iter().map(|q| q.norm_squared()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        cols.push(c.into_iter().map(|q| q.scale(1.0 / norm)).collect());
    }
    let mut entries = vec![Quaternion::ZERO; n * n];
    for (j, col) in cols.iter().enumerate() {
        for (i, q) in col.iter().enumerate() {
            entries[i * n + j] = *q;
        }
    }
    QMatrix { n, entries }
}

/// An element `(q, A)` of Sp(1)Sp(n) acting by `v ↦ A v q̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    q: Quaternion,
    a: QMatrix,
}

impl GroupElement {
    pub fn new(q: Quaternion, a: QMatrix) -> Result<Self> {
        if !q.is_unit() {
            return Err(QkaError::NotUnitQuaternion { deviation: q.norm() - 1.0 });
        }
        let residual = a.unitarity_residual();
        if residual > UNITARY_TOL {
            return Err(QkaError::NotUnitary { residual });
        }
        Ok(Self { q, a })
    }

    pub fn identity(n: usize) -> Self {
        Self { q: Quaternion::ONE, a: QMatrix::identity(n) }
    }

    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = Quaternion::random_unit(&mut rng);
        let a = random_unitary_with(n, &mut rng);
        Self { q, a }
    }

    pub fn q(&self) -> Quaternion {
        self.q
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.a
    }

    pub fn n(&self) -> usize {
        self.a.n
    }

    /// `(q₁, A₁)·(q₂, A₂) = (q₁q₂, A₁A₂)`.
    pub fn compose(&self, other: &Self) -> Self {
        Self { q: self.q * other.q, a: self.a.mul_mat(&other.a) }
    }

    pub fn apply(&self, v: &HVector) -> Result<HVector> {
        if v.n() != self.n() {
            return Err(QkaError::DimensionMismatch { expected: self.n(), found: v.n() });
        }
        Ok(self.a.mul_vec(v).right_mul(self.q.conj()))
    }

    /// The rotation `R` of Im ℍ with `T R_u T⁻¹ = R_{Ru}`; it is `u ↦ q u q̄`
    /// and depends only on `q`.
    pub fn induced_rotation(&self) -> Matrix3<f64> {
        self.q.rotation_matrix()
    }

    /// The 4n×4n real orthogonal matrix of the action.
    pub fn to_real(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(4 * n, 4 * n);
        for c in 0..4 * n {
            let mut e = HVector::zeros(n);
            e.coords[c] = 1.0;
            let img = self.a.mul_vec(&e).right_mul(self.q.conj());
            m.set_column(c, &img.to_dvector());
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn hamilton_products() {
        use Quaternion as Q;
        assert_eq!(Q::I * Q::J, Q::K);
        assert_eq!(Q::J * Q::K, Q::I);
        assert_eq!(Q::K * Q::I, Q::J);
        assert_eq!(Q::I * Q::I, -Q::ONE);
    }

    #[test]
    fn norm_is_multiplicative() {
        let mut r = rng();
        for _ in 0..100 {
            let p = Quaternion::random_unit(&mut r).scale(1.7);
            let q = Quaternion::random_unit(&mut r).scale(0.3);
            assert!(((p * q).norm() - p.norm() * q.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn j1_on_unit_real_vector_is_i() {
        let v = HVector::axis(1, 0);
        let out = CanonicalBasis::standard().apply(0, &v);
        assert_eq!(out.coords(), &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn canonical_identities_hold() {
        let b = CanonicalBasis::standard();
        let mut r = rng();
        for _ in 0..100 {
            let v = HVector::random(3, &mut r);
            for i in 0..3 {
                let jj = b.apply(i, &b.apply(i, &v));
                assert!(jj.axpy(1.0, &v).norm() < 1e-12);
                let a = b.apply(i, &b.apply((i + 1) % 3, &v));
                let c = b.apply((i + 2) % 3, &v);
                assert!(a.axpy(-1.0, &c).norm() < 1e-12, "J_i J_i+1 != J_i+2");
                let rev = b.apply((i + 1) % 3, &b.apply(i, &v));
                assert!(rev.axpy(1.0, &c).norm() < 1e-12, "J_i+1 J_i != -J_i+2");
            }
        }
    }

    #[test]
    fn right_mult_rejects_non_imaginary() {
        let v = HVector::axis(2, 1);
        assert!(right_mult(Quaternion::ONE, &v).is_err());
        assert!(right_mult(Quaternion::J, &v).is_ok());
    }

    #[test]
    fn random_unitary_is_unitary_and_deterministic() {
        let a = random_unitary(8, 11);
        assert!(a.unitarity_residual() < 1e-10);
        assert_eq!(a, random_unitary(8, 11));
        let one = random_unitary(1, 3);
        assert!(one.get(0, 0).is_unit());
    }

    #[test]
    fn identity_element_fixes_vectors() {
        let mut r = rng();
        let v = HVector::random(4, &mut r);
        assert_eq!(GroupElement::identity(4).apply(&v).unwrap(), v);
    }

    #[test]
    fn group_action_is_isometric() {
        let mut r = rng();
        for s in 0..100 {
            let t = GroupElement::random(5, s);
            let v = HVector::random(5, &mut r);
            let w = HVector::random(5, &mut r);
            let lhs = t.apply(&v).unwrap().dot(&t.apply(&w).unwrap());
            assert!((lhs - v.dot(&w)).abs() < 1e-10);
        }
    }

    #[test]
    fn action_composes() {
        let mut r = rng();
        for s in 0..20 {
            let t1 = GroupElement::random(3, 2 * s);
            let t2 = GroupElement::random(3, 2 * s + 1);
            let v = HVector::random(3, &mut r);
            let lhs = t1.apply(&t2.apply(&v).unwrap()).unwrap();
            let rhs = t1.compose(&t2).apply(&v).unwrap();
            assert!(lhs.axpy(-1.0, &rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn induced_rotation_intertwines() {
        let mut r = rng();
        for s in 0..50 {
            let t = GroupElement::random(3, s);
            let rot = t.induced_rotation();
            assert!((rot.transpose() * rot - Matrix3::identity()).amax() < 1e-12);
            assert!((rot.determinant() - 1.0).abs() < 1e-12);
            let v = HVector::random(3, &mut r);
            for u in [Quaternion::I, Quaternion::J, Quaternion::K] {
                // T R_u T^-1 v  vs  R_{Ru} v
                let tinv_v = GroupElement::new(t.q.conj(), t.a.conj_transpose()).unwrap().apply(&v).unwrap();
                let lhs = t.apply(&tinv_v.right_mul(u)).unwrap();
                let ru = Quaternion::imaginary(rot * u.vector_part());
                let rhs = v.right_mul(ru);
                assert!(lhs.axpy(-1.0, &rhs).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn rotation_about_i_axis() {
        let theta = 0.7;
        let q = Quaternion::from_axis_angle(Vector3::x(), theta);
        let t = GroupElement::new(q, QMatrix::identity(1)).unwrap();
        let r = t.induced_rotation();
        let (s, c) = theta.sin_cos();
        let expected = Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c);
        assert!((r - expected).amax() < 1e-12);
        // check on u ∈ {i, j, k} through the action itself
        let v = HVector::from_quaternions(&[Quaternion::new(0.3, -0.2, 0.5, 0.1)]);
        let tinv = GroupElement::new(q.conj(), QMatrix::identity(1)).unwrap();
        for (col, u) in [Quaternion::I, Quaternion::J, Quaternion::K].into_iter().enumerate() {
            let lhs = t.apply(&tinv.apply(&v).unwrap().right_mul(u)).unwrap();
            let rhs = v.right_mul(Quaternion::imaginary(expected.column(col).into_owned()));
            assert!(lhs.axpy(-1.0, &rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn induced_rotation_is_homomorphism() {
        for s in 0..50 {
            let t1 = GroupElement::random(2, 100 + s);
            let t2 = GroupElement::random(2, 200 + s);
            let lhs = t1.compose(&t2).induced_rotation();
            let rhs = t1.induced_rotation() * t2.induced_rotation();
            assert!((lhs - rhs).amax() < 1e-10);
        }
    }

    #[test]
    fn rejects_invalid_group_elements() {
        assert!(matches!(
            GroupElement::new(Quaternion::new(1.1, 0.0, 0.0, 0.0), QMatrix::identity(2)),
            Err(QkaError::NotUnitQuaternion { .. })
        ));
        let mut bad = QMatrix::identity(2);
        bad.entries[1] = Quaternion::new(0.1, 0.0, 0.0, 0.0);
        assert!(matches!(GroupElement::new(Quaternion::ONE, bad), Err(QkaError::NotUnitary { .. })));
    }

    #[test]
    fn conjugated_basis_matches_action() {
        let b = CanonicalBasis::standard();
        let t = GroupElement::random(2, 5);
        let tb = b.conjugated_by(&t);
        let tinv = GroupElement::new(t.q.conj(), t.a.conj_transpose()).unwrap();
        let v = HVector::random(2, &mut rng());
        for i in 0..3 {
            let lhs = t.apply(&b.apply(i, &tinv.apply(&v).unwrap())).unwrap();
            assert!(lhs.axpy(-1.0, &tb.apply(i, &v)).norm() < 1e-10);
        }
    }

    #[test]
    fn real_matrix_is_orthogonal() {
        let m = GroupElement::random(3, 9).to_real();
        let id = DMatrix::<f64>::identity(12, 12);
        assert!((m.transpose() * &m - id).amax() < 1e-10);
    }
}
