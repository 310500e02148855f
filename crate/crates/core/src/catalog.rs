//! Constructors for the subspaces of constant quaternionic Kähler angle.
//!
//! Every constructor works in fresh quaternionic coordinates starting at a
//! slot offset, so blocks can be stacked ℍ-orthogonally. `e_r` below is
//! the real unit vector of slot `r`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{QkaError, Result};
use crate::quat::{CanonicalBasis, HVector, Quaternion};
use crate::subspace::{AngleTriple, Subspace, ANGLE_TOL};

/// Slack in the admissibility inequality and its boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// Pivots below this are treated as zero in the PSD Cholesky factor.
pub const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl FromStr for Sign {
    type Err = QkaError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "+1" | "1" | "plus" => Ok(Sign::Plus),
            "-" | "-1" | "minus" => Ok(Sign::Minus),
            _ => Err(QkaError::InvalidInput(format!("sign must be + or -, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    TotallyReal,
    TotallyComplex,
    Quaternionic,
    ImHLine,
    CkaPlaneSum,
    ComplexifiedCka,
    V3,
    V4,
    SumType,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::TotallyReal,
        Family::TotallyComplex,
        Family::Quaternionic,
        Family::ImHLine,
        Family::CkaPlaneSum,
        Family::ComplexifiedCka,
        Family::V3,
        Family::V4,
        Family::SumType,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Family::TotallyReal => "totally_real",
            Family::TotallyComplex => "totally_complex",
            Family::Quaternionic => "quaternionic",
            Family::ImHLine => "im_h_line",
            Family::CkaPlaneSum => "cka_plane_sum",
            Family::ComplexifiedCka => "complexified_cka",
            Family::V3 => "v3",
            Family::V4 => "v4",
            Family::SumType => "sum_type",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Family {
    type Err = QkaError;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.tag() == s)
            .ok_or_else(|| QkaError::InvalidInput(format!("unknown family {s:?}")))
    }
}

/// A family together with its parameters. Dimensions `l` count blocks
/// (complex planes for the totally complex family, quaternionic lines for
/// the quaternionic one, and so on).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilySpec {
    TotallyReal { k: usize, n: usize },
    TotallyComplex { l: usize, n: usize },
    Quaternionic { l: usize, n: usize },
    ImHLine { n: usize },
    CkaPlaneSum { phi: f64, l: usize, n: usize },
    ComplexifiedCka { phi: f64, l: usize, n: usize },
    V3 { phi: f64, sign: Sign, n: usize },
    V4 { angles: AngleTriple, sign: Sign, n: usize },
    Sum { angles: AngleTriple, l_plus: usize, l_minus: usize, n: usize },
}

impl FamilySpec {
    pub fn family(&self) -> Family {
        match self {
            FamilySpec::TotallyReal { .. } => Family::TotallyReal,
            FamilySpec::TotallyComplex { .. } => Family::TotallyComplex,
            FamilySpec::Quaternionic { .. } => Family::Quaternionic,
            FamilySpec::ImHLine { .. } => Family::ImHLine,
            FamilySpec::CkaPlaneSum { .. } => Family::CkaPlaneSum,
            FamilySpec::ComplexifiedCka { .. } => Family::ComplexifiedCka,
            FamilySpec::V3 { .. } => Family::V3,
            FamilySpec::V4 { .. } => Family::V4,
            FamilySpec::Sum { .. } => Family::SumType,
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            FamilySpec::TotallyReal { n, .. }
            | FamilySpec::TotallyComplex { n, .. }
            | FamilySpec::Quaternionic { n, .. }
            | FamilySpec::ImHLine { n }
            | FamilySpec::CkaPlaneSum { n, .. }
            | FamilySpec::ComplexifiedCka { n, .. }
            | FamilySpec::V3 { n, .. }
            | FamilySpec::V4 { n, .. }
            | FamilySpec::Sum { n, .. } => n,
        }
    }

    /// Real dimension of the constructed subspace.
    pub fn dim(&self) -> usize {
        match *self {
            FamilySpec::TotallyReal { k, .. } => k,
            FamilySpec::TotallyComplex { l, .. } | FamilySpec::CkaPlaneSum { l, .. } => 2 * l,
            FamilySpec::Quaternionic { l, .. } | FamilySpec::ComplexifiedCka { l, .. } => 4 * l,
            FamilySpec::ImHLine { .. } | FamilySpec::V3 { .. } => 3,
            FamilySpec::V4 { .. } => 4,
            FamilySpec::Sum { l_plus, l_minus, .. } => 4 * (l_plus + l_minus),
        }
    }

    /// The angle the construction is meant to realize.
    pub fn declared_triple(&self) -> Result<AngleTriple> {
        let half_pi = std::f64::consts::FRAC_PI_2;
        match *self {
            FamilySpec::TotallyReal { .. } => Ok(AngleTriple::totally_real()),
            FamilySpec::TotallyComplex { .. } => AngleTriple::from_cosines(1.0, 0.0, 0.0),
            FamilySpec::Quaternionic { .. } => AngleTriple::from_cosines(1.0, 1.0, 1.0),
            FamilySpec::ImHLine { .. } => AngleTriple::from_cosines(1.0, 1.0, 0.0),
            FamilySpec::CkaPlaneSum { phi, .. } => AngleTriple::from_angles(phi, half_pi, half_pi),
            FamilySpec::ComplexifiedCka { phi, .. } => AngleTriple::from_angles(0.0, phi, phi),
            FamilySpec::V3 { phi, .. } => AngleTriple::from_angles(phi, phi, half_pi),
            FamilySpec::V4 { angles, .. } | FamilySpec::Sum { angles, .. } => Ok(angles),
        }
    }
}

/// Real unit quaternion placed in a slot, right-multiplied by `q`.
fn slot_vector(n: usize, slot: usize, q: Quaternion) -> HVector {
    let mut v = HVector::zeros(n);
    v.set_slot(slot, q);
    v
}

fn need(n: usize, needed: usize) -> Result<()> {
    if needed > n {
        Err(QkaError::AmbientTooSmall { needed, got: n })
    } else {
        Ok(())
    }
}

fn check_open_angle(phi: f64) -> Result<()> {
    if !(phi > 0.0 && phi < std::f64::consts::FRAC_PI_2) || phi.cos() <= ANGLE_TOL || phi.cos() >= 1.0 - ANGLE_TOL {
        return Err(QkaError::InvalidAngles(format!("angle {phi} must lie in (0, pi/2)")));
    }
    Ok(())
}

fn check_positive(what: &str, l: usize) -> Result<()> {
    if l == 0 {
        return Err(QkaError::Inadmissible(format!("{what} must be positive")));
    }
    Ok(())
}

/// A symmetric 3×3 matrix with unit diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramMatrix {
    pub entries: Matrix3<f64>,
}

/// `Gᵢ,ᵢ₊₁ = (ε cos φᵢ₊₂ - cos φᵢ cos φᵢ₊₁) / (sin φᵢ sin φᵢ₊₁)`.
pub fn gram_matrix(angles: &AngleTriple, sign: Sign) -> Result<GramMatrix> {
    if angles.is_zero(0) {
        return Err(QkaError::SingularAtZero);
    }
    let c = angles.cosines();
    let s = c.map(|x| (1.0 - x * x).sqrt());
    let eps = sign.value();
    let mut g = Matrix3::identity();
    for i in 0..3 {
        let (j, l) = ((i + 1) % 3, (i + 2) % 3);
        let v = (eps * c[l] - c[i] * c[j]) / (s[i] * s[j]);
        g[(i, j)] = v;
        g[(j, i)] = v;
    }
    Ok(GramMatrix { entries: g })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    pub exists: bool,
    /// Rank of the Gram matrix; `None` when no configuration exists.
    pub gram_rank: Option<usize>,
}

/// `cos φ₁ + cos φ₂ - ε cos φ₃`.
pub fn boundary_sum(angles: &AngleTriple, sign: Sign) -> f64 {
    let c = angles.cosines();
    c[0] + c[1] - sign.value() * c[2]
}

/// Existence of the unit vectors with Gram matrix [`gram_matrix`], and the
/// dimension of their span.
pub fn admissible(angles: &AngleTriple, sign: Sign) -> Result<Admissibility> {
    if angles.is_zero(0) {
        return Err(QkaError::SingularAtZero);
    }
    let s = boundary_sum(angles, sign);
    if s > 1.0 + BOUNDARY_TOL {
        return Ok(Admissibility { exists: false, gram_rank: None });
    }
    let rank = if (s - 1.0).abs() <= BOUNDARY_TOL { 2 } else { 3 };
    Ok(Admissibility { exists: true, gram_rank: Some(rank) })
}

/// Pivoted outer-product Cholesky of a PSD matrix: `G ≈ L Lᵀ` with `L`
/// of size 3×r. At most `max_rank` columns are produced.
pub fn psd_cholesky(g: &Matrix3<f64>, max_rank: usize) -> DMatrix<f64> {
    let mut s = *g;
    let mut cols = Vec::new();
    let mut used = [false; 3];
    while cols.len() < max_rank.min(3) {
        let p = (0..3).filter(|&i| !used[i]).max_by(|&a, &b| s[(a, a)].total_cmp(&s[(b, b)]));
        let Some(p) = p else { break };
        let pivot = s[(p, p)];
        if pivot < PIVOT_TOL {
            break;
        }
        used[p] = true;
        let col = s.column(p) / pivot.sqrt();
        s -= col * col.transpose();
        cols.push(col);
    }
    if cols.is_empty() {
        return DMatrix::zeros(3, 0);
    }
    DMatrix::from_fn(3, cols.len(), |i, j| cols[j][i])
}

/// Number of quaternionic coordinates one 4-dimensional block needs.
pub fn block_slots(angles: &AngleTriple, sign: Sign) -> Result<usize> {
    if angles.is_zero(0) {
        zero_block_kind(angles)?;
        return Ok(if angles.is_zero(1) { 1 } else { 2 });
    }
    let adm = admissible(angles, sign)?;
    match adm.gram_rank {
        Some(r) => Ok(1 + r),
        None => Err(inadmissible(angles, sign)),
    }
}

fn inadmissible(angles: &AngleTriple, sign: Sign) -> QkaError {
    let c = angles.cosines();
    let op = if sign == Sign::Plus { '-' } else { '+' };
    QkaError::Inadmissible(format!(
        "cos(phi1) + cos(phi2) {op} cos(phi3) = {:.12} exceeds 1 (cosines {:.6}, {:.6}, {:.6})",
        boundary_sum(angles, sign),
        c[0],
        c[1],
        c[2]
    ))
}

enum ZeroBlock {
    Quaternionic,
    TotallyComplex,
    Complexified(f64),
}

fn zero_block_kind(angles: &AngleTriple) -> Result<ZeroBlock> {
    if angles.cos_deviation(&AngleTriple::from_cosines(1.0, angles.cos(1), angles.cos(1))?) > ANGLE_TOL {
        return Err(QkaError::InvalidAngles(format!("with phi1 = 0 the other two angles must agree, got {angles}")));
    }
    Ok(if angles.is_zero(1) {
        ZeroBlock::Quaternionic
    } else if angles.is_right(1) {
        ZeroBlock::TotallyComplex
    } else {
        ZeroBlock::Complexified(angles.phi(1))
    })
}

fn complexified_block(n: usize, a: usize, b: usize, phi: f64) -> [HVector; 4] {
    let (s, c) = phi.sin_cos();
    let ea = slot_vector(n, a, Quaternion::ONE);
    let eb = slot_vector(n, b, Quaternion::ONE);
    let w = ea.right_mul(Quaternion::J).scale(c).axpy(s, &eb);
    let std = CanonicalBasis::standard();
    let jea = std.apply(0, &ea);
    let jw = std.apply(0, &w);
    [ea, w, jea, jw]
}

fn cka_plane(n: usize, a: usize, b: usize, phi: f64) -> [HVector; 2] {
    let (s, c) = phi.sin_cos();
    let ea = slot_vector(n, a, Quaternion::ONE);
    let eb = slot_vector(n, b, Quaternion::ONE);
    [ea.clone(), ea.right_mul(Quaternion::I).scale(c).axpy(s, &eb)]
}

/// Vectors of one 4-dimensional block with angle `angles` and sign, placed
/// in slots `offset..`.
fn block_vectors(angles: &AngleTriple, sign: Sign, n: usize, offset: usize) -> Result<Vec<HVector>> {
    if sign == Sign::Minus && angles.is_right(2) {
        return Err(QkaError::Inadmissible("a block with phi3 = pi/2 only exists with sign +".into()));
    }
    gram_block(angles, sign, n, offset)
}

fn gram_block(angles: &AngleTriple, sign: Sign, n: usize, offset: usize) -> Result<Vec<HVector>> {
    let slots = block_slots(angles, sign)?;
    need(n, offset + slots)?;
    if angles.is_zero(0) {
        if sign == Sign::Minus {
            return Err(inadmissible(angles, sign));
        }
        return Ok(match zero_block_kind(angles)? {
            ZeroBlock::Quaternionic => [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K]
                .map(|q| slot_vector(n, offset, q))
                .to_vec(),
            ZeroBlock::TotallyComplex => vec![
                slot_vector(n, offset, Quaternion::ONE),
                slot_vector(n, offset, Quaternion::I),
                slot_vector(n, offset + 1, Quaternion::ONE),
                slot_vector(n, offset + 1, Quaternion::I),
            ],
            ZeroBlock::Complexified(phi) => complexified_block(n, offset, offset + 1, phi).to_vec(),
        });
    }
    let rank = slots - 1;
    let g = gram_matrix(angles, sign)?;
    let l = psd_cholesky(&g.entries, rank);
    if l.ncols() != rank {
        return Err(QkaError::Inadmissible(format!("Gram matrix has numerical rank {} instead of {rank}", l.ncols())));
    }
    let e0 = slot_vector(n, offset, Quaternion::ONE);
    let std = CanonicalBasis::standard();
    let c = angles.cosines();
    let mut out = vec![e0.clone()];
    for i in 0..3 {
        let mut ei = HVector::zeros(n);
        for j in 0..rank {
            ei = ei.axpy(l[(i, j)], &slot_vector(n, offset + 1 + j, Quaternion::ONE));
        }
        let ei = ei.scale(1.0 / ei.norm());
        let s = (1.0 - c[i] * c[i]).sqrt();
        out.push(std.apply(i, &e0).scale(c[i]).axpy(s, &std.apply(i, &ei)));
    }
    Ok(out)
}

pub fn construct(spec: &FamilySpec) -> Result<Subspace> {
    match *spec {
        FamilySpec::V3 { phi, sign, n } => construct_v3(phi, sign, n),
        FamilySpec::V4 { angles, sign, n } => construct_v4(&angles, sign, n),
        FamilySpec::Sum { angles, l_plus, l_minus, n } => construct_sum(&angles, l_plus, l_minus, n),
        _ => construct_classical(spec),
    }
}

/// The six classical families.
pub fn construct_classical(spec: &FamilySpec) -> Result<Subspace> {
    let n = spec.n();
    if n == 0 {
        return Err(QkaError::AmbientTooSmall { needed: 1, got: 0 });
    }
    let vectors: Vec<HVector> = match *spec {
        FamilySpec::TotallyReal { k, n } => {
            check_positive("k", k)?;
            need(n, k)?;
            (0..k).map(|r| slot_vector(n, r, Quaternion::ONE)).collect()
        }
        FamilySpec::TotallyComplex { l, n } => {
            check_positive("l", l)?;
            need(n, l)?;
            (0..l).flat_map(|r| [slot_vector(n, r, Quaternion::ONE), slot_vector(n, r, Quaternion::I)]).collect()
        }
        FamilySpec::Quaternionic { l, n } => {
            check_positive("l", l)?;
            need(n, l)?;
            (0..l)
                .flat_map(|r| [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K].map(|q| slot_vector(n, r, q)))
                .collect()
        }
        FamilySpec::ImHLine { n } => [Quaternion::I, Quaternion::J, Quaternion::K].map(|q| slot_vector(n, 0, q)).to_vec(),
        FamilySpec::CkaPlaneSum { phi, l, n } => {
            check_open_angle(phi)?;
            check_positive("l", l)?;
            need(n, 2 * l)?;
            (0..l).flat_map(|r| cka_plane(n, 2 * r, 2 * r + 1, phi)).collect()
        }
        FamilySpec::ComplexifiedCka { phi, l, n } => {
            check_open_angle(phi)?;
            check_positive("l", l)?;
            need(n, 2 * l)?;
            (0..l).flat_map(|r| complexified_block(n, 2 * r, 2 * r + 1, phi)).collect()
        }
        _ => return Err(QkaError::InvalidInput(format!("{} is not a classical family", spec.family()))),
    };
    Subspace::from_spanning(&vectors)
}

/// `⟨e₁, e₂⟩ = cos φ / (cos φ + ε)` for the 3-dimensional family.
pub fn v3_inner_product(phi: f64, sign: Sign) -> f64 {
    let c = phi.cos();
    c / (c + sign.value())
}

fn v3_fits_plane(phi: f64, sign: Sign) -> bool {
    sign == Sign::Minus && (phi.cos() - 0.5).abs() <= BOUNDARY_TOL
}

fn check_v3(phi: f64, sign: Sign) -> Result<()> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    if !phi.is_finite() || phi < -ANGLE_TOL || phi > half_pi + ANGLE_TOL {
        return Err(QkaError::InvalidAngles(format!("angle {phi} must lie in [0, pi/2]")));
    }
    if sign == Sign::Minus && phi.cos() > 0.5 + BOUNDARY_TOL {
        return Err(QkaError::InvalidAngles(format!("sign - requires phi in [pi/3, pi/2], got {phi}")));
    }
    Ok(())
}

pub fn construct_v3(phi: f64, sign: Sign, n: usize) -> Result<Subspace> {
    check_v3(phi, sign)?;
    if phi.cos() >= 1.0 - ANGLE_TOL {
        return construct_classical(&FamilySpec::ImHLine { n });
    }
    let two_slots = v3_fits_plane(phi, sign);
    need(n, if two_slots { 2 } else { 3 })?;
    let (s, c) = phi.sin_cos();
    let cc = if two_slots { -1.0 } else { v3_inner_product(phi, sign) };
    let e0 = slot_vector(n, 0, Quaternion::ONE);
    let f1 = slot_vector(n, 1, Quaternion::ONE);
    let e2 = if two_slots {
        f1.scale(-1.0)
    } else {
        f1.scale(cc).axpy((1.0 - cc * cc).sqrt(), &slot_vector(n, 2, Quaternion::ONE))
    };
    let std = CanonicalBasis::standard();
    let xi1 = std.apply(0, &e0).scale(c).axpy(s, &std.apply(0, &f1));
    let xi2 = std.apply(1, &e0).scale(c).axpy(s, &std.apply(1, &e2));
    Subspace::from_spanning(&[e0, xi1, xi2])
}

pub fn construct_v4(angles: &AngleTriple, sign: Sign, n: usize) -> Result<Subspace> {
    Subspace::from_spanning(&block_vectors(angles, sign, n, 0)?)
}

/// The Gram construction with ε = -1 also at φ₃ = π/2, where the result is
/// congruent to the one with ε = +1.
pub fn construct_v4_any_sign(angles: &AngleTriple, sign: Sign, n: usize) -> Result<Subspace> {
    Subspace::from_spanning(&gram_block(angles, sign, n, 0)?)
}

/// `l₊` blocks of sign + followed by `l₋` blocks of sign -, each on fresh
/// coordinates and all sharing the standard canonical basis.
pub fn construct_sum(angles: &AngleTriple, l_plus: usize, l_minus: usize, n: usize) -> Result<Subspace> {
    Subspace::from_spanning(&sum_blocks(angles, l_plus, l_minus, n)?.concat())
}

/// The spanning vectors of each block of [`construct_sum`].
pub fn sum_blocks(angles: &AngleTriple, l_plus: usize, l_minus: usize, n: usize) -> Result<Vec<Vec<HVector>>> {
    if l_plus + l_minus == 0 {
        return Err(QkaError::Inadmissible("at least one block is required".into()));
    }
    let needed = sum_slots(angles, l_plus, l_minus)?;
    need(n, needed)?;
    let mut offset = 0;
    let mut blocks = Vec::with_capacity(l_plus + l_minus);
    for sign in std::iter::repeat_n(Sign::Plus, l_plus).chain(std::iter::repeat_n(Sign::Minus, l_minus)) {
        blocks.push(block_vectors(angles, sign, n, offset)?);
        offset += block_slots(angles, sign)?;
    }
    Ok(blocks)
}

fn sum_slots(angles: &AngleTriple, l_plus: usize, l_minus: usize) -> Result<usize> {
    let mut total = 0;
    if l_plus > 0 {
        total += l_plus * block_slots(angles, Sign::Plus)?;
    }
    if l_minus > 0 {
        if angles.is_right(2) {
            return Err(QkaError::Inadmissible("blocks of sign - need phi3 != pi/2".into()));
        }
        if angles.is_zero(0) {
            return Err(inadmissible(angles, Sign::Minus));
        }
        total += l_minus * block_slots(angles, Sign::Minus)?;
    }
    Ok(total)
}

/// Smallest `n` for which the construction fits in ℍⁿ.
pub fn min_quaternionic_dim(spec: &FamilySpec) -> Result<usize> {
    Ok(match *spec {
        FamilySpec::TotallyReal { k, .. } => k,
        FamilySpec::TotallyComplex { l, .. } | FamilySpec::Quaternionic { l, .. } => l,
        FamilySpec::ImHLine { .. } => 1,
        FamilySpec::CkaPlaneSum { l, .. } | FamilySpec::ComplexifiedCka { l, .. } => 2 * l,
        FamilySpec::V3 { phi, sign, .. } => {
            check_v3(phi, sign)?;
            if phi.cos() >= 1.0 - ANGLE_TOL {
                1
            } else if v3_fits_plane(phi, sign) {
                2
            } else {
                3
            }
        }
        FamilySpec::V4 { angles, sign, .. } => match sign {
            Sign::Plus => sum_slots(&angles, 1, 0)?,
            Sign::Minus => sum_slots(&angles, 0, 1)?,
        },
        FamilySpec::Sum { angles, l_plus, l_minus, .. } => sum_slots(&angles, l_plus, l_minus)?,
    })
}
