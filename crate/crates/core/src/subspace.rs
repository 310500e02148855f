//! Real subspaces of ℍⁿ, the Kähler angle map Ω and everything computed
//! from it.
//!
//! A subspace carries an orthonormal basis `B` (4n×k). For the standard
//! canonical basis the *structure matrices* `Mᵢ = Bᵀ Jᵢ B` (k×k, skew) hold
//! all the information used here: for `v = Bx`, `Pᵢv = B Mᵢ x` and
//! `Ω(v)ᵢⱼ = (Mᵢx)·(Mⱼx)`.

use std::fmt;

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{QkaError, Result};
use crate::quat::{right_mul_slice, CanonicalBasis, GroupElement, HVector};

/// `max |BᵀB - I|` accepted for an orthonormal basis.
pub const ORTHO_TOL: f64 = 1e-10;
/// Default spread tolerance of [`constancy_check`].
pub const SPREAD_TOL: f64 = 1e-8;
/// Singular values at or below this (relative) threshold count as zero.
pub const RANK_TOL: f64 = 1e-8;
/// Relative membership tolerance `‖v - π_V v‖ ≤ tol·‖v‖`.
pub const MEMBER_TOL: f64 = 1e-9;
/// Tolerance on `|‖v‖ - 1|` for unit input vectors.
pub const UNIT_TOL: f64 = 1e-12;
/// Cosines within this of 0 (resp. 1) are right (resp. zero) angles.
pub const ANGLE_TOL: f64 = 1e-12;
/// Tolerance of the ℍ-orthogonality test.
pub const H_ORTHO_TOL: f64 = 1e-10;

const JAD_MAX_SWEEPS: usize = 200;
const JAD_REL_DECREASE: f64 = 1e-14;

/// A sorted quaternionic Kähler angle `0 ≤ φ₁ ≤ φ₂ ≤ φ₃ ≤ π/2`.
///
/// Stored by cosines (descending); every region predicate is linear in them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleTriple {
    cosines: [f64; 3],
}

impl AngleTriple {
    pub fn from_angles(phi1: f64, phi2: f64, phi3: f64) -> Result<Self> {
        let phis = [phi1, phi2, phi3];
        if phis.iter().any(|p| !p.is_finite() || *p < -ANGLE_TOL || *p > std::f64::consts::FRAC_PI_2 + ANGLE_TOL) {
            return Err(QkaError::InvalidAngles(format!("angles {phis:?} must lie in [0, pi/2]")));
        }
        if phi1 > phi2 + ANGLE_TOL || phi2 > phi3 + ANGLE_TOL {
            return Err(QkaError::InvalidAngles(format!("angles {phis:?} must be non-decreasing")));
        }
        Self::from_cosines(phi1.cos(), phi2.cos(), phi3.cos())
    }

    pub fn from_cosines(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        let cs = [c1, c2, c3];
        if cs.iter().any(|c| !c.is_finite() || *c < -ANGLE_TOL || *c > 1.0 + ANGLE_TOL) {
            return Err(QkaError::InvalidAngles(format!("cosines {cs:?} must lie in [0, 1]")));
        }
        if c1 < c2 - ANGLE_TOL || c2 < c3 - ANGLE_TOL {
            return Err(QkaError::InvalidAngles(format!("cosines {cs:?} must be non-increasing")));
        }
        let mut cosines = cs.map(snap_cos);
        cosines[1] = cosines[1].min(cosines[0]);
        cosines[2] = cosines[2].min(cosines[1]);
        Ok(Self { cosines })
    }

    /// The triple whose squared cosines are the given eigenvalues, in any
    /// order. Values are clamped to `[0, 1]`.
    pub fn from_cos2(mut lambda: [f64; 3]) -> Self {
        lambda.sort_by(|a, b| b.total_cmp(a));
        let cosines = lambda.map(|l| {
            let l = l.clamp(0.0, 1.0);
            if l < ANGLE_TOL {
                0.0
            } else if l > 1.0 - ANGLE_TOL {
                1.0
            } else {
                l.sqrt()
            }
        });
        Self { cosines }
    }

    pub fn uniform(phi: f64) -> Result<Self> {
        Self::from_angles(phi, phi, phi)
    }

    pub fn totally_real() -> Self {
        Self { cosines: [0.0; 3] }
    }

    pub fn cosines(&self) -> [f64; 3] {
        self.cosines
    }

    pub fn cos(&self, i: usize) -> f64 {
        self.cosines[i]
    }

    pub fn cos2(&self) -> [f64; 3] {
        self.cosines.map(|c| c * c)
    }

    pub fn angles(&self) -> [f64; 3] {
        self.cosines.map(f64::acos)
    }

    pub fn phi(&self, i: usize) -> f64 {
        self.cosines[i].acos()
    }

    pub fn is_right(&self, i: usize) -> bool {
        self.cosines[i] <= ANGLE_TOL
    }

    pub fn is_zero(&self, i: usize) -> bool {
        self.cosines[i] >= 1.0 - ANGLE_TOL
    }

    /// Number of angles different from π/2.
    pub fn non_right_count(&self) -> usize {
        (0..3).filter(|&i| !self.is_right(i)).count()
    }

    /// Largest difference of squared cosines.
    pub fn cos2_deviation(&self, other: &Self) -> f64 {
        let (a, b) = (self.cos2(), other.cos2());
        (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
    }

    /// Largest difference of cosines.
    pub fn cos_deviation(&self, other: &Self) -> f64 {
        (0..3).map(|i| (self.cosines[i] - other.cosines[i]).abs()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.cos2_deviation(other) <= tol
    }
}

fn snap_cos(c: f64) -> f64 {
    if c <= ANGLE_TOL {
        0.0
    } else if c >= 1.0 - ANGLE_TOL {
        1.0
    } else {
        c
    }
}

impl fmt::Display for AngleTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.angles();
        write!(f, "({:.10}, {:.10}, {:.10})", a[0], a[1], a[2])
    }
}

/// `Ω(v)ᵢⱼ = ⟨Pᵢv, Pⱼv⟩` for a fixed canonical basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaMatrix {
    pub entries: Matrix3<f64>,
}

impl OmegaMatrix {
    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let e = SymmetricEigen::new(self.entries).eigenvalues;
        let mut l = [e[0], e[1], e[2]];
        l.sort_by(|a, b| b.total_cmp(a));
        l
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn triple(&self) -> AngleTriple {
        AngleTriple::from_cos2(self.eigenvalues())
    }

    /// Ω in the basis whose structure coordinates are the columns of `r`.
    pub fn in_basis(&self, r: &Matrix3<f64>) -> Self {
        Self { entries: r.transpose() * self.entries * r }
    }
}

/// Outcome of [`constancy_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstancyReport {
    pub triple: AngleTriple,
    pub max_spread: f64,
    pub samples: usize,
    pub constant: bool,
}

/// A real subspace of ℍⁿ with an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    n: usize,
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn from_basis(n: usize, basis: DMatrix<f64>) -> Result<Self> {
        if n == 0 || basis.nrows() != 4 * n {
            return Err(QkaError::DimensionMismatch { expected: 4 * n, found: basis.nrows() });
        }
        if basis.ncols() == 0 {
            return Err(QkaError::InvalidInput("subspace must be non-zero".into()));
        }
        let residual = orthonormality_residual(&basis);
        if residual > ORTHO_TOL {
            return Err(QkaError::NotOrthonormal { residual });
        }
        Ok(Self { n, basis })
    }

    /// Orthonormalizes a spanning set (QR, diagonal of R made positive).
    pub fn from_spanning(vectors: &[HVector]) -> Result<Self> {
        let first = vectors.first().ok_or_else(|| QkaError::InvalidInput("empty spanning set".into()))?;
        let n = first.n();
        if let Some(v) = vectors.iter().find(|v| v.n() != n) {
            return Err(QkaError::DimensionMismatch { expected: n, found: v.n() });
        }
        let m = vectors.len();
        if m > 4 * n {
            return Err(QkaError::RankDeficient { smallest: 0.0 });
        }
        let a = DMatrix::from_fn(4 * n, m, |r, c| vectors[c].coords()[r]);
        let sv = a.clone().singular_values();
        let largest = sv.max();
        let smallest = sv.min();
        if smallest <= 1e-10 * largest.max(1.0) {
            return Err(QkaError::RankDeficient { smallest });
        }
        let qr = a.clone().qr();
        let r = qr.r();
        let mut q = qr.q();
        for j in 0..m {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        // one reorthogonalization pass tightens BᵀB = I
        let q = reorthonormalize(q);
        let residual = (&q * (q.transpose() * &a) - &a).amax();
        if residual > 1e-10 * a.amax().max(1.0) {
            return Err(QkaError::RankDeficient { smallest });
        }
        Self::from_basis(n, q)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn vector(&self, j: usize) -> HVector {
        HVector::from_coords(self.basis.column(j).iter().copied().collect()).expect("basis rows are 4n")
    }

    pub fn vectors(&self) -> Vec<HVector> {
        (0..self.dim()).map(|j| self.vector(j)).collect()
    }

    /// `Bᵀv`.
    pub fn coords_of(&self, v: &HVector) -> DVector<f64> {
        self.basis.tr_mul(&v.to_dvector())
    }

    /// `Bx`.
    pub fn vector_from_coords(&self, x: &DVector<f64>) -> HVector {
        HVector::from_coords((&self.basis * x).iter().copied().collect()).expect("basis rows are 4n")
    }

    /// `‖v - π_V v‖ / ‖v‖`.
    pub fn membership_residual(&self, v: &HVector) -> f64 {
        let dv = v.to_dvector();
        let norm = dv.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let proj = &self.basis * self.basis.tr_mul(&dv);
        (dv - proj).norm() / norm
    }

    pub fn contains(&self, v: &HVector) -> bool {
        self.membership_residual(v) <= MEMBER_TOL
    }

    /// Largest `‖w - π_V w‖` over the basis vectors `w` of `other`.
    pub fn containment_residual(&self, other: &Subspace) -> f64 {
        let proj = &self.basis * self.basis.tr_mul(&other.basis);
        (0..other.dim()).map(|j| (other.basis.column(j) - proj.column(j)).norm()).fold(0.0, f64::max)
    }

    /// `T·V`.
    pub fn transformed(&self, t: &GroupElement) -> Result<Self> {
        let vs = self.vectors().iter().map(|v| t.apply(v)).collect::<Result<Vec<_>>>()?;
        let basis = DMatrix::from_fn(4 * self.n, self.dim(), |r, c| vs[c].coords()[r]);
        Self::from_basis(self.n, reorthonormalize(basis))
    }

    /// `Jᵢ B` for the given canonical basis.
    pub fn structure_image(&self, basis: &CanonicalBasis, i: usize) -> DMatrix<f64> {
        let u = basis.element(i);
        let mut out = DMatrix::zeros(self.basis.nrows(), self.dim());
        for j in 0..self.dim() {
            let src: Vec<f64> = self.basis.column(j).iter().copied().collect();
            let mut dst = vec![0.0; src.len()];
            right_mul_slice(&src, u, &mut dst);
            out.column_mut(j).copy_from_slice(&dst);
        }
        out
    }

    /// The three k×k matrices `Bᵀ Jᵢ B` of the standard canonical basis.
    pub fn structure_matrices(&self) -> [DMatrix<f64>; 3] {
        let std = CanonicalBasis::standard();
        [0, 1, 2].map(|i| self.basis.tr_mul(&self.structure_image(&std, i)))
    }

    /// A uniformly distributed unit coordinate vector.
    pub fn sample_coords<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        loop {
            let x: DVector<f64> = DVector::from_fn(self.dim(), |_, _| StandardNormal.sample(rng));
            let norm = x.norm();
            if norm > 1e-8 {
                return x / norm;
            }
        }
    }
}

/// `max |BᵀB - I|`.
pub fn orthonormality_residual(basis: &DMatrix<f64>) -> f64 {
    let k = basis.ncols();
    (basis.tr_mul(basis) - DMatrix::identity(k, k)).amax()
}

/// Two passes of modified Gram–Schmidt on the columns.
pub fn reorthonormalize(mut b: DMatrix<f64>) -> DMatrix<f64> {
    for _ in 0..2 {
        for j in 0..b.ncols() {
            for i in 0..j {
                let d = b.column(i).dot(&b.column(j));
                let ci = b.column(i).clone_owned();
                b.column_mut(j).axpy(-d, &ci, 1.0);
            }
            let norm = b.column(j).norm();
            b.column_mut(j).unscale_mut(norm);
        }
    }
    b
}

/// Ω at coordinates `x` from precomputed structure matrices.
pub fn omega_at(mats: &[DMatrix<f64>; 3], x: &DVector<f64>) -> Matrix3<f64> {
    let y = [&mats[0] * x, &mats[1] * x, &mats[2] * x];
    Matrix3::from_fn(|i, j| y[i].dot(&y[j]))
}

/// `π_V ∘ Jᵢ` as a 4n×4n matrix.
pub fn p_operator(v: &Subspace, basis: &CanonicalBasis, i: usize) -> DMatrix<f64> {
    let n4 = 4 * v.n();
    let mut j = DMatrix::zeros(n4, n4);
    let u = basis.element(i);
    for c in 0..n4 {
        let mut e = vec![0.0; n4];
        e[c] = 1.0;
        let mut out = vec![0.0; n4];
        right_mul_slice(&e, u, &mut out);
        j.column_mut(c).copy_from_slice(&out);
    }
    v.basis() * v.basis().transpose() * j
}

/// `π_V ∘ Jᵢ` restricted to V, in the basis of V.
pub fn p_restricted(v: &Subspace, basis: &CanonicalBasis, i: usize) -> DMatrix<f64> {
    v.basis().tr_mul(&v.structure_image(basis, i))
}

pub fn omega(v_space: &Subspace, v: &HVector, basis: &CanonicalBasis) -> Result<OmegaMatrix> {
    check_unit_member(v_space, v)?;
    let pv: Vec<DVector<f64>> = (0..3)
        .map(|i| {
            let mut jv = vec![0.0; v.coords().len()];
            right_mul_slice(v.coords(), basis.element(i), &mut jv);
            let jv = DVector::from_vec(jv);
            v_space.basis() * v_space.basis().tr_mul(&jv)
        })
        .collect();
    Ok(OmegaMatrix { entries: Matrix3::from_fn(|i, j| pv[i].dot(&pv[j])) })
}

fn check_unit_member(v_space: &Subspace, v: &HVector) -> Result<()> {
    if v.n() != v_space.n() {
        return Err(QkaError::DimensionMismatch { expected: v_space.n(), found: v.n() });
    }
    let norm = v.norm();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(QkaError::NotUnit { norm });
    }
    let residual = v_space.membership_residual(v);
    if residual > MEMBER_TOL {
        return Err(QkaError::NotInSubspace { residual });
    }
    Ok(())
}

/// Sorted eigen decomposition of a symmetric 3×3 matrix: eigenvalues
/// descending, eigenvectors as columns of a rotation.
pub fn sorted_eigen(m: &Matrix3<f64>) -> ([f64; 3], Matrix3<f64>) {
    let eig = SymmetricEigen::new(*m);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = idx.map(|i| eig.eigenvalues[i]);
    let mut r = Matrix3::from_columns(&idx.map(|i| eig.eigenvectors.column(i).into_owned()));
    if r.determinant() < 0.0 {
        r.column_mut(2).neg_mut();
    }
    (vals, r)
}

/// The angle of V at `v` and a canonical basis diagonalizing `L_v`.
///
/// When eigenvalues repeat the basis is not unique; any diagonalizing one
/// is returned.
pub fn vector_qka(v_space: &Subspace, v: &HVector) -> Result<(AngleTriple, CanonicalBasis)> {
    let om = omega(v_space, v, &CanonicalBasis::standard())?;
    let (vals, r) = sorted_eigen(&om.entries);
    Ok((AngleTriple::from_cos2(vals), CanonicalBasis::from_rotation(r)?))
}

pub fn constancy_check(v: &Subspace, samples: usize, seed: u64, tol: f64) -> ConstancyReport {
    let samples = samples.max(2);
    let mats = v.structure_matrices();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut first: Option<[f64; 3]> = None;
    let mut spread: f64 = 0.0;
    for _ in 0..samples {
        let x = v.sample_coords(&mut rng);
        let l = OmegaMatrix { entries: omega_at(&mats, &x) }.eigenvalues();
        match first {
            None => first = Some(l),
            Some(f) => {
                for i in 0..3 {
                    spread = spread.max((l[i] - f[i]).abs());
                }
            }
        }
    }
    let triple = AngleTriple::from_cos2(first.expect("at least two samples"));
    ConstancyReport { triple, max_spread: spread, samples, constant: spread <= tol }
}

/// Sampled Ω matrices of V in the standard basis.
pub fn sample_omegas(v: &Subspace, samples: usize, seed: u64) -> Vec<Matrix3<f64>> {
    let mats = v.structure_matrices();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples).map(|_| omega_at(&mats, &v.sample_coords(&mut rng))).collect()
}

/// Cyclic Jacobi joint diagonalization of symmetric 3×3 matrices.
///
/// Returns the rotation `R` (columns ordered by decreasing mean diagonal,
/// det +1) and `sqrt(mean Σ_{i≠j} (RᵀAR)ᵢⱼ²)`.
pub fn joint_diagonalize(mats: &[Matrix3<f64>]) -> (Matrix3<f64>, f64) {
    let mut work: Vec<Matrix3<f64>> = mats.to_vec();
    let mut rot = Matrix3::identity();
    let mut off = off_mass(&work);
    for _ in 0..JAD_MAX_SWEEPS {
        if off == 0.0 {
            break;
        }
        let mut moved = false;
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
            for m in &work {
                let w0 = m[(p, q)];
                let w1 = -0.5 * (m[(p, p)] - m[(q, q)]);
                a += w0 * w0;
                b += w0 * w1;
                c += w1 * w1;
            }
            // minimize Σ (w·(cos 2θ, sin 2θ))²
            let half_diff = 0.5 * (a - c);
            if half_diff.hypot(b) <= 1e-300 {
                continue;
            }
            let mut psi = 0.5 * (b.atan2(half_diff) + std::f64::consts::PI);
            if psi > std::f64::consts::FRAC_PI_2 {
                psi -= std::f64::consts::PI;
            }
            let theta = 0.5 * psi;
            if theta.abs() < 1e-16 {
                continue;
            }
            moved = true;
            let (s, cth) = theta.sin_cos();
            let mut g = Matrix3::identity();
            g[(p, p)] = cth;
            g[(p, q)] = -s;
            g[(q, p)] = s;
            g[(q, q)] = cth;
            for m in work.iter_mut() {
                *m = g.transpose() * *m * g;
            }
            rot *= g;
        }
        let next = off_mass(&work);
        let decrease = off - next;
        off = next;
        if !moved || decrease <= JAD_REL_DECREASE * (off + decrease) {
            break;
        }
    }
    let count = work.len().max(1) as f64;
    let mut means = [0.0; 3];
    for m in &work {
        for (i, mean) in means.iter_mut().enumerate() {
            *mean += m[(i, i)] / count;
        }
    }
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| means[b].total_cmp(&means[a]));
    let mut r = Matrix3::from_columns(&idx.map(|i| rot.column(i).into_owned()));
    if r.determinant() < 0.0 {
        r.column_mut(2).neg_mut();
    }
    let residual = (off_mass(&mats.iter().map(|m| r.transpose() * m * r).collect::<Vec<_>>()) / count).sqrt();
    (r, residual)
}

fn off_mass(mats: &[Matrix3<f64>]) -> f64 {
    mats.iter()
        .map(|m| {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        s += m[(i, j)] * m[(i, j)];
                    }
                }
            }
            s
        })
        .sum()
}

/// A canonical basis diagonalizing `L_v` simultaneously for sampled `v`,
/// and the attained residual.
pub fn joint_canonical_basis(v: &Subspace, samples: usize, seed: u64) -> (CanonicalBasis, f64) {
    let oms = sample_omegas(v, samples.max(1), seed);
    let (r, residual) = joint_diagonalize(&oms);
    let basis = CanonicalBasis::from_rotation(r).expect("product of Givens rotations");
    (basis, residual)
}

/// `P̄ᵢ = Pᵢ / cos φᵢ` restricted to V, as a k×k matrix.
pub fn pbar_operator(v: &Subspace, basis: &CanonicalBasis, i: usize, phi: f64) -> Result<DMatrix<f64>> {
    let c = phi.cos();
    if c <= ANGLE_TOL {
        return Err(QkaError::RightAngle);
    }
    let p = p_restricted(v, basis, i) / c;
    let k = v.dim();
    let residual = (p.tr_mul(&p) - DMatrix::identity(k, k)).amax();
    if residual > 1e-9 {
        return Err(QkaError::NotInvariant { residual });
    }
    Ok(p)
}

/// Common rank of `[P₁v P₂v P₃v]` over sampled unit `v`.
pub fn distribution_rank(v: &Subspace, samples: usize, seed: u64) -> Result<usize> {
    let mats = v.structure_matrices();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ranks = Vec::new();
    for _ in 0..samples.max(1) {
        let x = v.sample_coords(&mut rng);
        let cols: Vec<DVector<f64>> = mats.iter().map(|m| m * &x).collect();
        let a = DMatrix::from_columns(&cols);
        let sv = a.singular_values();
        let thresh = RANK_TOL * sv.max().max(1.0);
        let r = sv.iter().filter(|&&s| s > thresh).count();
        if !ranks.contains(&r) {
            ranks.push(r);
        }
    }
    if ranks.len() == 1 {
        Ok(ranks[0])
    } else {
        ranks.sort_unstable();
        Err(QkaError::RankVaries(ranks))
    }
}

/// Largest `|⟨v, w⟩|`, `|⟨Jᵢv, w⟩|` over basis vectors.
pub fn h_overlap(v: &Subspace, w: &Subspace) -> f64 {
    let std = CanonicalBasis::standard();
    let mut worst = v.basis().tr_mul(w.basis()).amax();
    for i in 0..3 {
        worst = worst.max(v.structure_image(&std, i).tr_mul(w.basis()).amax());
    }
    worst
}

pub fn is_h_orthogonal(v: &Subspace, w: &Subspace) -> bool {
    v.n() == w.n() && h_overlap(v, w) <= H_ORTHO_TOL
}

/// Rotation taking structure coordinates to a basis; convenience for tests
/// and callers that carry raw vectors.
pub fn basis_from_columns(c1: Vector3<f64>, c2: Vector3<f64>, c3: Vector3<f64>) -> Result<CanonicalBasis> {
    CanonicalBasis::from_rotation(Matrix3::from_columns(&[c1, c2, c3]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::Quaternion;
    use proptest::prelude::*;
    use rand::Rng;

    fn quaternionic_line(n: usize, r: usize) -> Subspace {
        let e = HVector::axis(n, r);
        let vs = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K].map(|q| e.right_mul(q));
        Subspace::from_spanning(&vs).unwrap()
    }

    fn totally_real(n: usize, k: usize) -> Subspace {
        Subspace::from_spanning(&(0..k).map(|r| HVector::axis(n, r)).collect::<Vec<_>>()).unwrap()
    }

    fn im_h_line(n: usize) -> Subspace {
        let e = HVector::axis(n, 0);
        Subspace::from_spanning(&[Quaternion::I, Quaternion::J, Quaternion::K].map(|q| e.right_mul(q))).unwrap()
    }

    fn random_span(n: usize, k: usize, seed: u64) -> Subspace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Subspace::from_spanning(&(0..k).map(|_| HVector::random(n, &mut rng)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn single_vector_span() {
        let v = HVector::axis(1, 0);
        let s = Subspace::from_spanning(std::slice::from_ref(&v)).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.vector(0), v);
    }

    #[test]
    fn dependent_span_is_rejected() {
        let v = HVector::axis(2, 1);
        assert!(matches!(Subspace::from_spanning(&[v.clone(), v.scale(2.0)]), Err(QkaError::RankDeficient { .. })));
    }

    #[test]
    fn random_span_is_orthonormal_and_spans() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let vs: Vec<HVector> = (0..4).map(|_| HVector::random(3, &mut rng)).collect();
        let s = Subspace::from_spanning(&vs).unwrap();
        assert_eq!(s.dim(), 4);
        assert!(orthonormality_residual(s.basis()) < 1e-12);
        for v in &vs {
            assert!(s.membership_residual(v) < 1e-12);
        }
    }

    #[test]
    fn p_operator_on_totally_real_vanishes() {
        let v = totally_real(3, 3);
        for i in 0..3 {
            let p = p_operator(&v, &CanonicalBasis::standard(), i);
            assert!((&p * v.basis()).amax() < 1e-15);
        }
    }

    #[test]
    fn p_operator_on_quaternionic_is_isometry() {
        let v = quaternionic_line(2, 1);
        let m = p_restricted(&v, &CanonicalBasis::standard(), 0);
        assert!((m.tr_mul(&m) - DMatrix::identity(4, 4)).amax() < 1e-14);
    }

    #[test]
    fn p_is_skew_on_v() {
        let v = random_span(4, 5, 3);
        for i in 0..3 {
            let m = p_restricted(&v, &CanonicalBasis::standard(), i);
            assert!((&m + m.transpose()).amax() < 1e-12);
        }
    }

    #[test]
    fn omega_of_im_h_line() {
        let v = im_h_line(2);
        let e = HVector::axis(2, 0);
        // 𝔍e is spanned by Jᵢe; a unit vector of it plays the role of v₀ for
        // the subspace 𝔍v₀ with v₀ = J₁e
        let v0 = e.right_mul(Quaternion::I);
        let (t, _) = vector_qka(&v, &v0).unwrap();
        let expected = AngleTriple::from_angles(0.0, 0.0, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(t.approx_eq(&expected, 1e-14));
        let om = omega(&v, &v0, &CanonicalBasis::standard()).unwrap();
        let l = om.eigenvalues();
        assert!((l[0] - 1.0).abs() < 1e-14 && (l[1] - 1.0).abs() < 1e-14 && l[2].abs() < 1e-14);
    }

    #[test]
    fn omega_rejects_bad_vectors() {
        let v = totally_real(2, 1);
        let b = CanonicalBasis::standard();
        assert!(matches!(omega(&v, &HVector::axis(2, 0).scale(2.0), &b), Err(QkaError::NotUnit { .. })));
        assert!(matches!(omega(&v, &HVector::axis(2, 1), &b), Err(QkaError::NotInSubspace { .. })));
    }

    #[test]
    fn omega_of_totally_real_is_zero() {
        let v = totally_real(3, 2);
        let om = omega(&v, &HVector::axis(3, 1), &CanonicalBasis::standard()).unwrap();
        assert_eq!(om.entries, Matrix3::zeros());
    }

    #[test]
    fn vector_qka_classical() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = quaternionic_line(3, 2);
        let x = q.sample_coords(&mut rng);
        let (t, _) = vector_qka(&q, &q.vector_from_coords(&x)).unwrap();
        assert_eq!(t.cosines(), [1.0; 3]);
        let r = totally_real(3, 3);
        let x = r.sample_coords(&mut rng);
        let (t, _) = vector_qka(&r, &r.vector_from_coords(&x)).unwrap();
        assert_eq!(t, AngleTriple::totally_real());
    }

    #[test]
    fn vector_qka_basis_diagonalizes() {
        let v = random_span(3, 5, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = v.sample_coords(&mut rng);
        let u = v.vector_from_coords(&x);
        let (t, basis) = vector_qka(&v, &u).unwrap();
        let om = omega(&v, &u, &basis).unwrap();
        let c2 = t.cos2();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { c2[i] } else { 0.0 };
                assert!((om.entries[(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quaternionic_is_constant() {
        let rep = constancy_check(&quaternionic_line(3, 0), 200, 1, SPREAD_TOL);
        assert!(rep.constant && rep.max_spread < 1e-12);
        assert_eq!(rep.triple.cosines(), [1.0; 3]);
    }

    #[test]
    fn random_three_space_is_not_constant() {
        let rep = constancy_check(&random_span(4, 3, 5), 200, 2, SPREAD_TOL);
        assert!(!rep.constant, "spread {}", rep.max_spread);
    }

    #[test]
    fn every_plane_is_constant() {
        // each Mᵢ is a multiple of the 2×2 rotation, so Ω does not move
        for seed in 0..10 {
            let rep = constancy_check(&random_span(4, 2, seed), 200, 2, SPREAD_TOL);
            assert!(rep.constant, "spread {}", rep.max_spread);
            assert!(rep.triple.is_right(1) && rep.triple.is_right(2));
        }
    }

    #[test]
    fn jad_on_quaternionic() {
        let (_, res) = joint_canonical_basis(&quaternionic_line(2, 0), 32, 3);
        assert!(res < 1e-12);
    }

    #[test]
    fn jad_fails_on_im_h_line() {
        let (_, res) = joint_canonical_basis(&im_h_line(1), 64, 3);
        assert!(res > 1e-2, "residual {res}");
    }

    #[test]
    fn jad_recovers_a_hidden_rotation() {
        let r = Quaternion::new(0.3, -0.5, 0.2, 0.7).rotation_matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mats: Vec<Matrix3<f64>> = (0..20)
            .map(|_| {
                let d: f64 = rng.random();
                let e: f64 = rng.random();
                r * Matrix3::from_diagonal(&Vector3::new(1.0 + d, 0.5 * e, 0.1)) * r.transpose()
            })
            .collect();
        let (found, res) = joint_diagonalize(&mats);
        assert!(res < 1e-12, "residual {res}");
        assert!((found.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pbar_errors() {
        let v = totally_real(2, 2);
        let b = CanonicalBasis::standard();
        assert_eq!(pbar_operator(&v, &b, 0, std::f64::consts::FRAC_PI_2), Err(QkaError::RightAngle));
        let w = random_span(3, 4, 1);
        assert!(matches!(pbar_operator(&w, &b, 0, 0.5), Err(QkaError::NotInvariant { .. })));
    }

    #[test]
    fn pbar_on_quaternionic() {
        let v = quaternionic_line(2, 1);
        let b = CanonicalBasis::standard();
        let p: Vec<DMatrix<f64>> = (0..3).map(|i| pbar_operator(&v, &b, i, 0.0).unwrap()).collect();
        assert!((&p[0] * &p[1] - &p[2]).amax() < 1e-14);
    }

    #[test]
    fn distribution_ranks() {
        assert_eq!(distribution_rank(&totally_real(3, 3), 50, 1).unwrap(), 0);
        assert_eq!(distribution_rank(&im_h_line(2), 50, 1).unwrap(), 2);
        assert_eq!(distribution_rank(&quaternionic_line(2, 0), 50, 1).unwrap(), 3);
    }

    #[test]
    fn h_orthogonality() {
        assert!(is_h_orthogonal(&quaternionic_line(3, 0), &quaternionic_line(3, 1)));
        let e = HVector::axis(2, 0);
        let v = Subspace::from_spanning(&[e.clone(), e.right_mul(Quaternion::I)]).unwrap();
        let w = Subspace::from_spanning(&[e.right_mul(Quaternion::I), e.right_mul(-Quaternion::ONE)]).unwrap();
        assert!(!is_h_orthogonal(&v, &w));
    }

    #[test]
    fn transformed_keeps_triple() {
        let v = im_h_line(3);
        let base = constancy_check(&v, 50, 1, SPREAD_TOL);
        for s in 0..20 {
            let w = v.transformed(&GroupElement::random(3, s)).unwrap();
            let rep = constancy_check(&w, 50, 1, SPREAD_TOL);
            assert!(rep.constant);
            assert!(rep.triple.approx_eq(&base.triple, 1e-9));
        }
    }

    #[test]
    fn angle_triple_validation() {
        assert!(AngleTriple::from_angles(0.3, 0.2, 0.5).is_err());
        assert!(AngleTriple::from_angles(-0.1, 0.2, 0.5).is_err());
        assert!(AngleTriple::from_cosines(0.2, 0.3, 0.0).is_err());
        let t = AngleTriple::from_angles(0.0, 1.0, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(t.is_zero(0) && t.is_right(2) && !t.is_right(1));
        assert_eq!(t.non_right_count(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn omega_is_psd_with_bounded_spectrum(seed in 0u64..10_000, n in 1usize..5, kk in 1usize..8) {
            let k = kk.min(4 * n);
            let v = random_span(n, k, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
            let x = v.sample_coords(&mut rng);
            let u = v.vector_from_coords(&x);
            let om = omega(&v, &u, &CanonicalBasis::standard()).unwrap();
            prop_assert!((om.entries - om.entries.transpose()).amax() < 1e-14);
            for l in om.eigenvalues() {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&l));
            }
            let mats = v.structure_matrices();
            let fast = omega_at(&mats, &x);
            prop_assert!((fast - om.entries).amax() < 1e-12);
        }

        #[test]
        fn sampled_angles_are_group_invariant(seed in 0u64..10_000, k in 1usize..9) {
            let v = random_span(3, k, seed);
            let t = GroupElement::random(3, seed + 1);
            let w = v.transformed(&t).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = v.sample_coords(&mut rng);
            let (a, _) = vector_qka(&v, &v.vector_from_coords(&x)).unwrap();
            let tv = t.apply(&v.vector_from_coords(&x)).unwrap();
            let (b, _) = vector_qka(&w, &tv).unwrap();
            prop_assert!(a.approx_eq(&b, 1e-9));
        }
    }
}
