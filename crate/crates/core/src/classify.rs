//! Block factorization, type detection, protohomogeneity and equivalence
//! verdicts, and the moduli table with its action labels.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{self, FamilySpec, Sign};
use crate::error::{QkaError, Result};
use crate::subspace::{
    constancy_check, distribution_rank, is_h_orthogonal, joint_canonical_basis, pbar_operator, vector_qka,
    AngleTriple, ConstancyReport, Subspace, SPREAD_TOL,
};

/// Joint-diagonalization residual below which a common canonical basis is
/// accepted.
pub const JOINT_TOL: f64 = 1e-8;
/// Relative singular-value threshold for kernel dimensions.
pub const KERNEL_TOL: f64 = 1e-8;
/// Tolerance on cosine sums at region boundaries.
pub const REGION_TOL: f64 = 1e-10;
/// Tolerance on cosines when comparing two triples.
pub const MATCH_TOL: f64 = 1e-8;
/// Tolerance when matching ⟨e₁, e₂⟩ to a branch value.
pub const BRANCH_TOL: f64 = 1e-8;

const SAMPLES: usize = 200;
const JAD_SAMPLES: usize = 64;
const SEED: u64 = 0x5eed_0001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "[usize; 2]", from = "[usize; 2]")]
pub struct TypeSignature {
    pub l_plus: usize,
    pub l_minus: usize,
}

impl TypeSignature {
    pub fn new(l_plus: usize, l_minus: usize) -> Self {
        Self { l_plus, l_minus }
    }

    pub fn is_pure(&self) -> bool {
        self.l_plus == 0 || self.l_minus == 0
    }
}

impl From<TypeSignature> for [usize; 2] {
    fn from(t: TypeSignature) -> Self {
        [t.l_plus, t.l_minus]
    }
}

impl From<[usize; 2]> for TypeSignature {
    fn from([l_plus, l_minus]: [usize; 2]) -> Self {
        Self { l_plus, l_minus }
    }
}

impl fmt::Display for TypeSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.l_plus, self.l_minus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictValue {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub value: VerdictValue,
    pub reason: String,
}

impl Verdict {
    fn yes(reason: impl Into<String>) -> Self {
        Self { value: VerdictValue::Yes, reason: reason.into() }
    }

    fn no(reason: impl Into<String>) -> Self {
        Self { value: VerdictValue::No, reason: reason.into() }
    }

    fn unknown(reason: impl Into<String>) -> Self {
        Self { value: VerdictValue::Unknown, reason: reason.into() }
    }

    pub fn is_yes(&self) -> bool {
        self.value == VerdictValue::Yes
    }
}

fn analyze(v: &Subspace) -> ConstancyReport {
    constancy_check(v, SAMPLES, SEED, SPREAD_TOL)
}

fn require_constant(v: &Subspace) -> Result<AngleTriple> {
    let rep = analyze(v);
    if !rep.constant {
        return Err(QkaError::NotConstant { spread: rep.max_spread });
    }
    Ok(rep.triple)
}

/// The operators `P̄ᵢ` (k×k) available for a constant-angle V: one per
/// angle below π/2, with `P̄₃ := P̄₁P̄₂` when only φ₃ is a right angle.
fn structures(v: &Subspace, t: &AngleTriple) -> Result<Vec<DMatrix<f64>>> {
    if t.non_right_count() == 0 {
        return Ok(Vec::new());
    }
    let (basis, residual) = joint_canonical_basis(v, JAD_SAMPLES, SEED);
    if residual > JOINT_TOL {
        return Err(QkaError::NoCommonBasis { residual });
    }
    let mut ops = Vec::new();
    for i in 0..3 {
        if !t.is_right(i) {
            ops.push(pbar_operator(v, &basis, i, t.phi(i))?);
        }
    }
    if ops.len() == 2 {
        let p3 = &ops[0] * &ops[1];
        ops.push(p3);
    }
    Ok(ops)
}

/// Orthonormal columns spanning the complement of `used` inside `space`.
fn complement(space: &DMatrix<f64>, used: &DMatrix<f64>) -> DMatrix<f64> {
    let k = space.nrows();
    let target = space.ncols().saturating_sub(used.ncols());
    if target == 0 {
        return DMatrix::zeros(k, 0);
    }
    let resid = space - used * used.tr_mul(space);
    let svd = resid.svd(true, false);
    let u = svd.u.expect("requested U");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    DMatrix::from_columns(&order[..target].iter().map(|&j| u.column(j).into_owned()).collect::<Vec<_>>())
}

fn add_orthonormal(span: &mut Vec<DVector<f64>>, w: DVector<f64>) -> bool {
    let mut w = w;
    for _ in 0..2 {
        for s in span.iter() {
            let d = s.dot(&w);
            w.axpy(-d, s, 1.0);
        }
    }
    let norm = w.norm();
    if norm > 1e-6 {
        span.push(w / norm);
        true
    } else {
        false
    }
}

fn kernel_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let thresh = KERNEL_TOL * svd.singular_values.max().max(1.0);
    let rows: Vec<DVector<f64>> = (0..svd.singular_values.len())
        .filter(|&j| svd.singular_values[j] <= thresh)
        .map(|j| vt.row(j).transpose())
        .collect();
    if rows.is_empty() {
        DMatrix::zeros(m.nrows(), 0)
    } else {
        DMatrix::from_columns(&rows)
    }
}

/// Invariant 4-dimensional pieces of a subspace (given by orthonormal
/// columns) on which the structures act by one sign.
fn split_part(part: &DMatrix<f64>, ops: &[DMatrix<f64>]) -> Result<Vec<DMatrix<f64>>> {
    let k = part.nrows();
    let mut blocks = Vec::new();
    let mut used = DMatrix::<f64>::zeros(k, 0);
    while used.ncols() < part.ncols() {
        let rest = complement(part, &used);
        let mut span: Vec<DVector<f64>> = Vec::new();
        let mut next = 0;
        loop {
            // close the current span under the structures
            let mut i = 0;
            while i < span.len() {
                for op in ops {
                    let w = op * &span[i];
                    add_orthonormal(&mut span, w);
                }
                i += 1;
            }
            if span.len() > 4 {
                return Err(QkaError::Factorization(format!("invariant closure has dimension {}", span.len())));
            }
            if span.len() == 4 {
                break;
            }
            // extend by a fresh direction of the remaining complement
            loop {
                if next >= rest.ncols() {
                    return Err(QkaError::Factorization("ran out of directions".into()));
                }
                let cand = rest.column(next).into_owned();
                next += 1;
                if add_orthonormal(&mut span, cand) {
                    break;
                }
            }
        }
        let mut cols: Vec<DVector<f64>> = used.column_iter().map(|c| c.into_owned()).collect();
        cols.extend(span.iter().cloned());
        used = DMatrix::from_columns(&cols);
        blocks.push(DMatrix::from_columns(&span));
    }
    Ok(blocks)
}

/// Splits a constant-angle V of dimension 4l into l pairwise ℍ-orthogonal
/// 4-dimensional blocks with the same angle.
pub fn factorize(v: &Subspace) -> Result<Vec<Subspace>> {
    let k = v.dim();
    if k % 4 != 0 {
        return Err(QkaError::NotMultipleOfFour(k));
    }
    let t = require_constant(v)?;
    let ops = structures(v, &t)?;
    let parts = if ops.len() == 3 && !t.is_right(2) {
        let prod = &ops[0] * &ops[1];
        let parts = [kernel_basis(&(&prod - &ops[2])), kernel_basis(&(&prod + &ops[2]))];
        if parts[0].ncols() + parts[1].ncols() != k {
            return Err(QkaError::InconsistentType { plus: parts[0].ncols(), minus: parts[1].ncols(), dim: k });
        }
        parts.into_iter().filter(|p| p.ncols() > 0).collect()
    } else {
        vec![DMatrix::<f64>::identity(k, k)]
    };
    let mut blocks: Vec<DMatrix<f64>> = Vec::new();
    for part in &parts {
        blocks.extend(split_part(part, &ops)?);
    }
    let subspaces = blocks
        .iter()
        .map(|x| {
            let b = crate::subspace::reorthonormalize(v.basis() * x);
            Subspace::from_basis(v.n(), b)
        })
        .collect::<Result<Vec<_>>>()?;
    for (a, sa) in subspaces.iter().enumerate() {
        let rep = analyze(sa);
        if !rep.constant || !rep.triple.approx_eq(&t, MATCH_TOL) {
            return Err(QkaError::Factorization(format!("block {a} has angle {} instead of {t}", rep.triple)));
        }
        for sb in &subspaces[a + 1..] {
            if !is_h_orthogonal(sa, sb) {
                return Err(QkaError::Factorization("blocks are not H-orthogonal".into()));
            }
        }
    }
    Ok(subspaces)
}

/// Kernel dimensions of `P̄₁P̄₂ - P̄₃` and `P̄₁P̄₂ + P̄₃`.
fn kernel_dim(m: &DMatrix<f64>) -> usize {
    let sv = m.singular_values();
    let thresh = KERNEL_TOL * sv.max().max(1.0);
    sv.iter().filter(|&&s| s <= thresh).count()
}

/// `(l₊, l₋)` of a constant-angle V of dimension 4l.
///
/// When φ₃ = π/2 or φ₁ = 0 the two signs are not distinguished and the
/// type is `(l, 0)` by convention.
pub fn type_of(v: &Subspace) -> Result<TypeSignature> {
    let k = v.dim();
    if k % 4 != 0 || k == 0 {
        return Err(QkaError::NotMultipleOfFour(k));
    }
    let l = k / 4;
    let t = require_constant(v)?;
    let ops = structures(v, &t)?;
    if t.is_right(2) || t.is_zero(0) {
        return Ok(TypeSignature::new(l, 0));
    }
    let prod = &ops[0] * &ops[1];
    let plus = kernel_dim(&(&prod - &ops[2]));
    let minus = kernel_dim(&(&prod + &ops[2]));
    if plus % 4 != 0 || minus % 4 != 0 || plus + minus != k {
        return Err(QkaError::InconsistentType { plus, minus, dim: k });
    }
    Ok(TypeSignature::new(plus / 4, minus / 4))
}

pub fn is_protohomogeneous(v: &Subspace) -> Verdict {
    let rep = analyze(v);
    if !rep.constant {
        return Verdict::no(format!("quaternionic Kahler angle is not constant (spread {:.3e})", rep.max_spread));
    }
    let k = v.dim();
    if k % 4 != 0 {
        return Verdict::yes(format!("constant angle {} in dimension {k}", rep.triple));
    }
    if k == 4 {
        return Verdict::yes(format!("constant angle {} in dimension 4", rep.triple));
    }
    match type_of(v) {
        Ok(t) if t.is_pure() => Verdict::yes(format!("type {t}")),
        Ok(t) => Verdict::no(format!("type {t} has blocks of both signs")),
        Err(QkaError::NoCommonBasis { residual }) => {
            Verdict::unknown(format!("no common canonical basis (joint residual {residual:.3e})"))
        }
        Err(e) => Verdict::unknown(e.to_string()),
    }
}

fn v3_angle(v: &Subspace) -> Result<AngleTriple> {
    if v.dim() != 3 {
        return Err(QkaError::InvalidInput(format!("expected a 3-dimensional subspace, got dimension {}", v.dim())));
    }
    let t = require_constant(v)?;
    let c = t.cos2();
    if !t.is_right(2) || (c[0] - c[1]).abs() > MATCH_TOL {
        return Err(QkaError::InvalidAngles(format!("angle {t} is not of the form (phi, phi, pi/2)")));
    }
    Ok(t)
}

/// `⟨e₁, e₂⟩` reconstructed at the unit vector `e0 ∈ V` of a
/// 3-dimensional V with angle (φ, φ, π/2), φ ∈ (0, π/2).
pub fn theta_v3(v: &Subspace, e0: &crate::quat::HVector) -> Result<f64> {
    let (t, basis) = vector_qka(v, e0)?;
    let c = (0.5 * (t.cos2()[0] + t.cos2()[1])).sqrt();
    if c <= crate::subspace::ANGLE_TOL || c >= 1.0 - crate::subspace::ANGLE_TOL {
        return Err(QkaError::BranchesMerge);
    }
    let s = (1.0 - c * c).sqrt();
    let e: Vec<DVector<f64>> = (0..2)
        .map(|i| {
            let je0 = basis.apply(i, e0).to_dvector();
            let pbar = v.basis() * v.basis().tr_mul(&je0) / c;
            let pbar_h = crate::quat::HVector::from_coords(pbar.iter().copied().collect()).expect("4n coordinates");
            let jp = basis.apply(i, &pbar_h).to_dvector();
            -(jp + e0.to_dvector() * c) / s
        })
        .collect();
    Ok(e[0].dot(&e[1]))
}

/// Which of the two 3-dimensional families V belongs to.
pub fn branch_of_v3(v: &Subspace) -> Result<Sign> {
    let t = v3_angle(v)?;
    if t.is_zero(0) || t.is_right(0) {
        return Err(QkaError::BranchesMerge);
    }
    let theta = theta_v3(v, &v.vector(0))?;
    let c = t.cos(0);
    let plus = (theta - c / (c + 1.0)).abs();
    let minus = (theta - c / (c - 1.0)).abs();
    if plus <= BRANCH_TOL && plus <= minus {
        Ok(Sign::Plus)
    } else if minus <= BRANCH_TOL {
        Ok(Sign::Minus)
    } else {
        Err(QkaError::InvalidInput(format!("<e1, e2> = {theta} matches neither branch")))
    }
}

pub fn are_equivalent(v: &Subspace, w: &Subspace) -> Verdict {
    if v.n() != w.n() {
        return Verdict::no(format!("ambient dimensions differ ({} vs {})", v.n(), w.n()));
    }
    if v.dim() != w.dim() {
        return Verdict::no(format!("dimensions differ ({} vs {})", v.dim(), w.dim()));
    }
    let (rv, rw) = (analyze(v), analyze(w));
    match (rv.constant, rw.constant) {
        (true, true) => {}
        (false, false) => return Verdict::unknown("neither subspace has constant angle"),
        _ => return Verdict::no("only one of the subspaces has constant angle"),
    }
    let (tv, tw) = (rv.triple, rw.triple);
    if tv.cos_deviation(&tw) > MATCH_TOL {
        return Verdict::no(format!("angles differ: {tv} vs {tw}"));
    }
    let k = v.dim();
    if k == 3 {
        if tv.is_zero(0) || tv.is_right(0) {
            return Verdict::yes("same angle and the two branches merge");
        }
        return match (branch_of_v3(v), branch_of_v3(w)) {
            (Ok(a), Ok(b)) if a == b => Verdict::yes(format!("same angle, branch {a}")),
            (Ok(a), Ok(b)) => Verdict::no(format!("branches differ ({a} vs {b})")),
            (Err(e), _) | (_, Err(e)) => Verdict::unknown(e.to_string()),
        };
    }
    if k % 4 == 0 {
        return match (type_of(v), type_of(w)) {
            (Ok(a), Ok(b)) if a == b => Verdict::yes(format!("same angle and type {a}")),
            (Ok(a), Ok(b)) => Verdict::no(format!("types differ ({a} vs {b})")),
            (Err(e), _) | (_, Err(e)) => Verdict::unknown(e.to_string()),
        };
    }
    Verdict::yes(format!("same angle {tv}; the angle determines the orbit in dimension {k}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StratumKind {
    Point,
    Curve,
    Region,
    RegionWithZ2,
    Surface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StratumId {
    /// Triples with `cos φ₁ + cos φ₂ - cos φ₃ ≤ 1` outside the next stratum.
    R4PlusOnly,
    /// `cos φ₁ + cos φ₂ + cos φ₃ ≤ 1`, φ₃ ≠ π/2, two orbits each.
    R4MinusZ2,
    /// `cos φ₁ + cos φ₂ ± cos φ₃ = 1`.
    Boundary,
    /// `(0, φ, φ)`.
    ComplexifiedCurve,
    /// `(0, 0, 0)`.
    QuaternionicPoint,
    /// `(φ, π/2, π/2)`.
    KaehlerCurve,
    /// `(0, π/2, π/2)`.
    TotallyComplexPoint,
    /// `(π/2, π/2, π/2)`.
    TotallyRealPoint,
    /// `(φ, φ, π/2)` with φ ∈ [0, π/3) ∪ {π/2}.
    R3PlusOnly,
    /// `(φ, φ, π/2)` with φ ∈ [π/3, π/2), two orbits each.
    R3MinusZ2,
    /// `(0, 0, π/2)`.
    ImHPoint,
    /// `(π/3, π/3, π/2)`.
    R3PiThirdPoint,
}

impl StratumId {
    pub fn kind(self) -> StratumKind {
        match self {
            StratumId::R4PlusOnly => StratumKind::Region,
            StratumId::R4MinusZ2 | StratumId::R3MinusZ2 => StratumKind::RegionWithZ2,
            StratumId::Boundary => StratumKind::Surface,
            StratumId::ComplexifiedCurve | StratumId::KaehlerCurve | StratumId::R3PlusOnly => StratumKind::Curve,
            StratumId::QuaternionicPoint
            | StratumId::TotallyComplexPoint
            | StratumId::TotallyRealPoint
            | StratumId::ImHPoint
            | StratumId::R3PiThirdPoint => StratumKind::Point,
        }
    }

    pub fn multiplicity(self) -> u8 {
        match self {
            StratumId::R4MinusZ2 | StratumId::R3MinusZ2 => 2,
            _ => 1,
        }
    }

    pub fn parametrization(self) -> &'static str {
        match self {
            StratumId::R4PlusOnly => {
                "phi1<=phi2<=phi3 with cos phi1 + cos phi2 - cos phi3 <= 1, excluding the (R4-) region"
            }
            StratumId::R4MinusZ2 => "phi1<=phi2<=phi3, phi3 != pi/2, cos phi1 + cos phi2 + cos phi3 <= 1; two orbits (+, -)",
            StratumId::Boundary => "phi1<=phi2<=phi3 with cos phi1 + cos phi2 + e cos phi3 = 1 for e = 1 or e = -1",
            StratumId::ComplexifiedCurve => "(0, phi, phi), phi in [0, pi/2]",
            StratumId::QuaternionicPoint => "(0, 0, 0)",
            StratumId::KaehlerCurve => "(phi, pi/2, pi/2), phi in [0, pi/2]",
            StratumId::TotallyComplexPoint => "(0, pi/2, pi/2)",
            StratumId::TotallyRealPoint => "(pi/2, pi/2, pi/2)",
            StratumId::R3PlusOnly => "(phi, phi, pi/2), phi in [0, pi/3) or phi = pi/2",
            StratumId::R3MinusZ2 => "(phi, phi, pi/2), phi in [pi/3, pi/2); two orbits (+, -)",
            StratumId::ImHPoint => "(0, 0, pi/2)",
            StratumId::R3PiThirdPoint => "(pi/3, pi/3, pi/2)",
        }
    }

    /// Region predicate, with [`REGION_TOL`] on cosine sums.
    pub fn contains(self, t: &AngleTriple) -> bool {
        let [c1, c2, c3] = t.cosines();
        let tol = REGION_TOL;
        let r4_plus = c1 + c2 - c3 <= 1.0 + tol;
        let r4_minus = c1 + c2 + c3 <= 1.0 + tol && c3 > tol;
        let r3 = c3 <= tol && (c1 - c2).abs() <= tol;
        let r3_minus = r3 && c1 <= 0.5 + tol && c1 > tol;
        match self {
            StratumId::R4PlusOnly => r4_plus && !r4_minus,
            StratumId::R4MinusZ2 => r4_minus,
            StratumId::Boundary => (c1 + c2 + c3 - 1.0).abs() <= tol || (c1 + c2 - c3 - 1.0).abs() <= tol,
            StratumId::ComplexifiedCurve => c1 >= 1.0 - tol && (c2 - c3).abs() <= tol,
            StratumId::QuaternionicPoint => c3 >= 1.0 - tol,
            StratumId::KaehlerCurve => c2 <= tol,
            StratumId::TotallyComplexPoint => c1 >= 1.0 - tol && c2 <= tol,
            StratumId::TotallyRealPoint => c1 <= tol,
            StratumId::R3PlusOnly => r3 && !r3_minus,
            StratumId::R3MinusZ2 => r3_minus,
            StratumId::ImHPoint => c2 >= 1.0 - tol && c3 <= tol,
            StratumId::R3PiThirdPoint => (c1 - 0.5).abs() <= tol && (c2 - 0.5).abs() <= tol && c3 <= tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionLabel {
    N,
    K,
    #[serde(rename = "SU(1,n+1)")]
    SU1n1,
    #[serde(rename = "subspace-induced")]
    SubspaceInduced,
    #[serde(rename = "solvable-foliation")]
    SolvableFoliation,
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActionLabel::N => "N",
            ActionLabel::K => "K",
            ActionLabel::SU1n1 => "SU(1,n+1)",
            ActionLabel::SubspaceInduced => "subspace-induced",
            ActionLabel::SolvableFoliation => "solvable-foliation",
        })
    }
}

/// One stratum of the moduli space, or (with `branch` set) one of the two
/// sheets of a `×ℤ₂` stratum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuliStratum {
    pub id: StratumId,
    pub kind: StratumKind,
    pub parametrization: String,
    pub multiplicity: u8,
    pub label: ActionLabel,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub branch: Option<Sign>,
}

impl ModuliStratum {
    fn new(id: StratumId, k: usize, branch: Option<Sign>) -> Self {
        Self {
            id,
            kind: id.kind(),
            parametrization: id.parametrization().to_string(),
            multiplicity: id.multiplicity(),
            label: if k == 1 { ActionLabel::SolvableFoliation } else { ActionLabel::SubspaceInduced },
            branch,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableRow {
    ZeroMod4,
    TwoMod4,
    OddNotThree,
    Three,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableColumn {
    /// `k ≤ n`
    Small,
    /// `n < k ≤ 4n/3`
    Lower,
    /// `4n/3 < k ≤ 2n`
    Upper,
    /// `k > 2n`
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TableCell {
    pub row: TableRow,
    pub column: TableColumn,
}

pub fn table_cell(k: usize, n: usize) -> TableCell {
    let row = if k == 3 {
        TableRow::Three
    } else if k % 4 == 0 {
        TableRow::ZeroMod4
    } else if k % 4 == 2 {
        TableRow::TwoMod4
    } else {
        TableRow::OddNotThree
    };
    let column = if k <= n {
        TableColumn::Small
    } else if 3 * k <= 4 * n {
        TableColumn::Lower
    } else if k <= 2 * n {
        TableColumn::Upper
    } else {
        TableColumn::Large
    };
    TableCell { row, column }
}

/// Strata of a table cell.
pub fn cell_strata(cell: TableCell) -> Vec<StratumId> {
    use StratumId::*;
    use TableColumn::*;
    match (cell.row, cell.column) {
        (TableRow::ZeroMod4, Small) => vec![R4PlusOnly, R4MinusZ2],
        (TableRow::ZeroMod4, Lower) => vec![Boundary],
        (TableRow::ZeroMod4, Upper) => vec![ComplexifiedCurve],
        (TableRow::ZeroMod4, Large) => vec![QuaternionicPoint],
        (TableRow::TwoMod4, Small) => vec![KaehlerCurve],
        (TableRow::TwoMod4, Lower | Upper) => vec![TotallyComplexPoint],
        (TableRow::TwoMod4, Large) => vec![],
        (TableRow::OddNotThree, Small) => vec![TotallyRealPoint],
        (TableRow::OddNotThree, _) => vec![],
        (TableRow::Three, Small) => vec![R3PlusOnly, R3MinusZ2],
        (TableRow::Three, Lower) => vec![],
        (TableRow::Three, Upper) => vec![ImHPoint, R3PiThirdPoint],
        (TableRow::Three, Large) => vec![ImHPoint],
    }
}

fn check_range(k: usize, n: usize, allow_zero: bool) -> Result<()> {
    if n == 0 || k > 4 * n || (k == 0 && !allow_zero) {
        return Err(QkaError::InvalidInput(format!("need {} <= k <= 4n with n >= 1, got k = {k}, n = {n}", u8::from(!allow_zero))));
    }
    Ok(())
}

/// Strata of the moduli space containing the triple; `×ℤ₂` strata give one
/// entry per sheet.
pub fn moduli_membership(k: usize, n: usize, t: &AngleTriple) -> Result<Vec<ModuliStratum>> {
    check_range(k, n, false)?;
    let mut out = Vec::new();
    for id in cell_strata(table_cell(k, n)) {
        if !id.contains(t) {
            continue;
        }
        if id.multiplicity() == 2 {
            out.push(ModuliStratum::new(id, k, Some(Sign::Plus)));
            out.push(ModuliStratum::new(id, k, Some(Sign::Minus)));
        } else {
            out.push(ModuliStratum::new(id, k, None));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuliDescription {
    pub k: usize,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cell: Option<TableCell>,
    pub strata: Vec<ModuliStratum>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub special_actions: Vec<ActionLabel>,
}

pub fn moduli_describe(k: usize, n: usize) -> Result<ModuliDescription> {
    check_range(k, n, true)?;
    if k == 0 {
        return Ok(ModuliDescription {
            k,
            n,
            cell: None,
            strata: Vec::new(),
            special_actions: vec![ActionLabel::N, ActionLabel::K, ActionLabel::SU1n1],
        });
    }
    let cell = table_cell(k, n);
    let strata = cell_strata(cell).into_iter().map(|id| ModuliStratum::new(id, k, None)).collect();
    Ok(ModuliDescription { k, n, cell: Some(cell), strata, special_actions: Vec::new() })
}

/// A subspace realizing the given point of the moduli space.
pub fn representative(k: usize, n: usize, t: &AngleTriple, branch: Option<Sign>) -> Result<Subspace> {
    check_range(k, n, false)?;
    if k == 1 {
        return catalog::construct(&FamilySpec::TotallyReal { k: 1, n });
    }
    let entries = moduli_membership(k, n, t)?;
    if entries.is_empty() {
        return Err(QkaError::InvalidInput(format!("angle {t} is not in the moduli space for k = {k}, n = {n}")));
    }
    let doubled = entries.iter().any(|e| e.multiplicity == 2);
    if branch.is_some() && !doubled {
        return Err(QkaError::InvalidInput("a branch was requested on a stratum of multiplicity 1".into()));
    }
    let sign = branch.unwrap_or(Sign::Plus);
    let cell = table_cell(k, n);
    let spec = match cell.row {
        TableRow::ZeroMod4 => {
            let l = k / 4;
            match cell.column {
                TableColumn::Small => {
                    if doubled && sign == Sign::Minus {
                        FamilySpec::Sum { angles: *t, l_plus: 0, l_minus: l, n }
                    } else {
                        FamilySpec::Sum { angles: *t, l_plus: l, l_minus: 0, n }
                    }
                }
                TableColumn::Lower => {
                    let plus_boundary = (catalog::boundary_sum(t, Sign::Plus) - 1.0).abs() <= REGION_TOL;
                    if plus_boundary {
                        FamilySpec::Sum { angles: *t, l_plus: l, l_minus: 0, n }
                    } else {
                        FamilySpec::Sum { angles: *t, l_plus: 0, l_minus: l, n }
                    }
                }
                TableColumn::Upper => {
                    if t.is_zero(1) {
                        FamilySpec::Quaternionic { l, n }
                    } else if t.is_right(1) {
                        FamilySpec::TotallyComplex { l: 2 * l, n }
                    } else {
                        FamilySpec::ComplexifiedCka { phi: t.phi(1), l, n }
                    }
                }
                TableColumn::Large => FamilySpec::Quaternionic { l, n },
            }
        }
        TableRow::TwoMod4 => match cell.column {
            TableColumn::Small if t.is_right(0) => FamilySpec::TotallyReal { k, n },
            TableColumn::Small if !t.is_zero(0) => FamilySpec::CkaPlaneSum { phi: t.phi(0), l: k / 2, n },
            _ => FamilySpec::TotallyComplex { l: k / 2, n },
        },
        TableRow::OddNotThree => FamilySpec::TotallyReal { k, n },
        TableRow::Three => {
            if t.is_zero(0) {
                FamilySpec::ImHLine { n }
            } else if cell.column == TableColumn::Upper {
                FamilySpec::V3 { phi: t.phi(0), sign: Sign::Minus, n }
            } else {
                FamilySpec::V3 { phi: t.phi(0), sign, n }
            }
        }
    };
    catalog::construct(&spec)
}

/// Deterministic sample of triples in a stratum (endpoints first).
pub fn stratum_samples(id: StratumId, count: usize, seed: u64) -> Vec<AngleTriple> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (id as u64).wrapping_mul(0x9e37_79b9));
    let cos3 = |a: f64, b: f64, c: f64| AngleTriple::from_cosines(a, b, c).expect("valid cosines");
    let curve = |f: &dyn Fn(f64) -> AngleTriple, lo: f64, hi: f64, ends: &[f64], rng: &mut ChaCha8Rng| {
        let mut v: Vec<AngleTriple> = ends.iter().map(|&p| f(p)).collect();
        while v.len() < count {
            v.push(f(rng.random_range(lo..hi)));
        }
        v.truncate(count);
        v
    };
    let mut out = match id {
        StratumId::QuaternionicPoint => vec![cos3(1.0, 1.0, 1.0)],
        StratumId::TotallyComplexPoint => vec![cos3(1.0, 0.0, 0.0)],
        StratumId::TotallyRealPoint => vec![AngleTriple::totally_real()],
        StratumId::ImHPoint => vec![cos3(1.0, 1.0, 0.0)],
        StratumId::R3PiThirdPoint => vec![cos3(0.5, 0.5, 0.0)],
        StratumId::ComplexifiedCurve => curve(
            &|p| AngleTriple::from_angles(0.0, p, p).expect("valid"),
            0.0,
            FRAC_PI_2,
            &[0.0, FRAC_PI_2],
            &mut rng,
        ),
        StratumId::KaehlerCurve => curve(
            &|p| AngleTriple::from_angles(p, FRAC_PI_2, FRAC_PI_2).expect("valid"),
            0.0,
            FRAC_PI_2,
            &[0.0, FRAC_PI_2],
            &mut rng,
        ),
        StratumId::R3PlusOnly => curve(
            &|p| AngleTriple::from_angles(p, p, FRAC_PI_2).expect("valid"),
            0.0,
            FRAC_PI_3 - 1e-3,
            &[0.0, FRAC_PI_2],
            &mut rng,
        ),
        StratumId::R3MinusZ2 => curve(
            &|p| AngleTriple::from_angles(p, p, FRAC_PI_2).expect("valid"),
            FRAC_PI_3,
            FRAC_PI_2 - 1e-3,
            &[FRAC_PI_3],
            &mut rng,
        ),
        StratumId::R4PlusOnly | StratumId::R4MinusZ2 => {
            let mut v = if id == StratumId::R4PlusOnly {
                vec![AngleTriple::totally_real(), cos3(1.0, 1.0, 1.0), cos3(1.0, 0.4, 0.4), cos3(0.5, 0.3, 0.0)]
            } else {
                vec![cos3(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0), cos3(0.3, 0.3, 0.3)]
            };
            while v.len() < count {
                let mut c = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
                c.sort_by(|a, b| b.total_cmp(a));
                let t = cos3(c[0], c[1], c[2]);
                if id.contains(&t) {
                    v.push(t);
                }
            }
            v
        }
        StratumId::Boundary => {
            let mut v = vec![cos3(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0), cos3(1.0, 1.0, 1.0), cos3(0.6, 0.4, 0.0)];
            while v.len() < count {
                let t = if v.len() % 2 == 0 {
                    let c3 = rng.random_range(0.0..1.0);
                    let c2 = rng.random_range(c3..(1.0 + c3) / 2.0);
                    cos3(1.0 - c2 + c3, c2, c3)
                } else {
                    let c3 = rng.random_range(0.0..1.0 / 3.0);
                    let c2 = rng.random_range(c3..(1.0 - c3) / 2.0);
                    cos3(1.0 - c2 - c3, c2, c3)
                };
                v.push(t);
            }
            v
        }
    };
    out.truncate(count.max(1));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleRecord {
    pub angles: [f64; 3],
    pub cosines: [f64; 3],
}

impl From<&AngleTriple> for TripleRecord {
    fn from(t: &AngleTriple) -> Self {
        Self { angles: t.angles(), cosines: t.cosines() }
    }
}

/// Everything the classifier can say about one subspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub n: usize,
    pub k: usize,
    pub triple: TripleRecord,
    pub constant: bool,
    pub spread: f64,
    pub joint_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub distribution_rank: Option<usize>,
    #[serde(rename = "type", skip_serializing_if = "Option::is_none", default)]
    pub type_signature: Option<TypeSignature>,
    pub protohomogeneous: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub branch: Option<Sign>,
    pub strata: Vec<ModuliStratum>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stratum: Option<ModuliStratum>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub diagnostics: Vec<String>,
}

pub fn classify_subspace(v: &Subspace) -> ClassificationRecord {
    let rep = analyze(v);
    let (_, joint_residual) = joint_canonical_basis(v, JAD_SAMPLES, SEED);
    let k = v.dim();
    let mut diagnostics = Vec::new();
    let mut distribution = None;
    let mut type_signature = None;
    let mut branch = None;
    let mut strata = Vec::new();
    let mut stratum = None;
    let protohomogeneous = is_protohomogeneous(v);
    if rep.constant {
        match distribution_rank(v, 50, SEED) {
            Ok(r) => distribution = Some(r),
            Err(e) => diagnostics.push(format!("distribution rank: {e}")),
        }
        if k % 4 == 0 {
            match type_of(v) {
                Ok(t) => {
                    type_signature = Some(t);
                    if t.is_pure() && !rep.triple.is_right(2) && !rep.triple.is_zero(0) {
                        branch = Some(if t.l_minus == 0 { Sign::Plus } else { Sign::Minus });
                    }
                }
                Err(e) => diagnostics.push(format!("type: {e}")),
            }
        } else if k == 3 {
            match branch_of_v3(v) {
                Ok(s) => branch = Some(s),
                Err(QkaError::BranchesMerge) => {}
                Err(e) => diagnostics.push(format!("branch: {e}")),
            }
        }
        match moduli_membership(k, v.n(), &rep.triple) {
            Ok(s) => strata = s,
            Err(e) => diagnostics.push(format!("moduli: {e}")),
        }
        if protohomogeneous.is_yes() {
            let mut hits = strata.iter().filter(|s| s.branch.is_none() || s.branch == branch);
            stratum = hits.next().cloned();
            if stratum.is_none() {
                diagnostics.push("protohomogeneous but no stratum of the moduli space matches".into());
            }
            if hits.next().is_some() {
                diagnostics.push("several strata match".into());
            }
        }
    }
    if !protohomogeneous.is_yes() {
        diagnostics.push(protohomogeneous.reason.clone());
    }
    ClassificationRecord {
        n: v.n(),
        k,
        triple: TripleRecord::from(&rep.triple),
        constant: rep.constant,
        spread: rep.max_spread,
        joint_residual,
        distribution_rank: distribution,
        type_signature,
        protohomogeneous,
        branch,
        strata,
        stratum,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{construct, construct_sum, construct_v3, construct_v4};
    use crate::quat::GroupElement;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    fn cos3(a: f64, b: f64, c: f64) -> AngleTriple {
        AngleTriple::from_cosines(a, b, c).unwrap()
    }

    fn third() -> AngleTriple {
        cos3(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    }

    #[test]
    fn factorize_quaternionic() {
        let v = construct(&FamilySpec::Quaternionic { l: 2, n: 3 }).unwrap();
        let blocks = factorize(&v).unwrap();
        assert_eq!(blocks.len(), 2);
        for b in &blocks {
            assert_eq!(constancy_check(b, 50, 1, SPREAD_TOL).triple.cosines(), [1.0; 3]);
        }
    }

    #[test]
    fn factorize_sums() {
        for (t, p, q, n) in [(cos3(0.3, 0.3, 0.3), 2, 0, 8), (third(), 1, 1, 7), (cos3(0.4, 0.3, 0.2), 1, 2, 12)] {
            let v = construct_sum(&t, p, q, n).unwrap();
            let blocks = factorize(&v).unwrap();
            assert_eq!(blocks.len(), p + q);
            let all: Vec<_> = blocks.iter().flat_map(|b| b.vectors()).collect();
            let sum = Subspace::from_spanning(&all).unwrap();
            assert!(sum.containment_residual(&v) < 1e-8);
            let signs: Vec<TypeSignature> = blocks.iter().map(|b| type_of(b).unwrap()).collect();
            let plus = signs.iter().filter(|s| s.l_plus == 1).count();
            assert_eq!((plus, signs.len() - plus), (p, q));
        }
    }

    #[test]
    fn factorize_rejects_wrong_dimension() {
        let v = construct_v3(1.0, Sign::Plus, 3).unwrap();
        assert_eq!(factorize(&v), Err(QkaError::NotMultipleOfFour(3)));
    }

    #[test]
    fn factorize_classical_without_full_structure() {
        for spec in [
            FamilySpec::TotallyReal { k: 8, n: 8 },
            FamilySpec::TotallyComplex { l: 4, n: 4 },
            FamilySpec::CkaPlaneSum { phi: 0.7, l: 4, n: 8 },
            FamilySpec::ComplexifiedCka { phi: 0.7, l: 2, n: 4 },
        ] {
            let v = construct(&spec).unwrap();
            assert_eq!(factorize(&v).unwrap().len(), 2, "{spec:?}");
        }
    }

    #[test]
    fn types() {
        let t = cos3(0.3, 0.3, 0.3);
        assert_eq!(type_of(&construct_v4(&t, Sign::Plus, 4).unwrap()).unwrap(), TypeSignature::new(1, 0));
        assert_eq!(type_of(&construct_v4(&t, Sign::Minus, 4).unwrap()).unwrap(), TypeSignature::new(0, 1));
        let q = construct(&FamilySpec::Quaternionic { l: 1, n: 2 }).unwrap();
        assert_eq!(type_of(&q).unwrap(), TypeSignature::new(1, 0));
        assert_eq!(type_of(&construct_sum(&third(), 1, 1, 7).unwrap()).unwrap(), TypeSignature::new(1, 1));
    }

    #[test]
    fn complexified_blocks_are_plus() {
        // the convention for phi1 = 0 agrees with the honest sign
        let v = construct(&FamilySpec::ComplexifiedCka { phi: 0.8, l: 1, n: 2 }).unwrap();
        let t = constancy_check(&v, 50, 1, SPREAD_TOL).triple;
        let ops = structures(&v, &t).unwrap();
        assert!((&ops[0] * &ops[1] - &ops[2]).amax() < 1e-9);
    }

    #[test]
    fn protohomogeneity() {
        let v3 = construct_v3(1.0, Sign::Plus, 3).unwrap();
        assert!(is_protohomogeneous(&v3).is_yes());
        let t = cos3(0.3, 0.3, 0.3);
        assert_eq!(is_protohomogeneous(&construct_sum(&t, 1, 1, 8).unwrap()).value, VerdictValue::No);
        assert!(is_protohomogeneous(&construct_sum(&t, 2, 0, 8).unwrap()).is_yes());
        assert!(is_protohomogeneous(&construct_sum(&t, 0, 2, 8).unwrap()).is_yes());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let vs: Vec<_> = (0..3).map(|_| crate::quat::HVector::random(3, &mut rng)).collect();
        assert_eq!(is_protohomogeneous(&Subspace::from_spanning(&vs).unwrap()).value, VerdictValue::No);
    }

    #[test]
    fn branches() {
        assert_eq!(branch_of_v3(&construct_v3(FRAC_PI_3, Sign::Plus, 3).unwrap()).unwrap(), Sign::Plus);
        assert_eq!(branch_of_v3(&construct_v3(FRAC_PI_3, Sign::Minus, 2).unwrap()).unwrap(), Sign::Minus);
        assert_eq!(branch_of_v3(&construct_v3(FRAC_PI_2, Sign::Minus, 3).unwrap()), Err(QkaError::BranchesMerge));
        assert_eq!(branch_of_v3(&construct_v3(0.0, Sign::Plus, 3).unwrap()), Err(QkaError::BranchesMerge));
    }

    #[test]
    fn theta_is_constant_over_base_points() {
        for sign in [Sign::Plus, Sign::Minus] {
            let v = construct_v3(1.2, sign, 3).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let vals: Vec<f64> =
                (0..200).map(|_| theta_v3(&v, &v.vector_from_coords(&v.sample_coords(&mut rng))).unwrap()).collect();
            let (lo, hi) = vals.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
            assert!(hi - lo < 1e-9);
            assert!((vals[0] - catalog::v3_inner_product(1.2, sign)).abs() < 1e-9);
        }
    }

    #[test]
    fn equivalences() {
        let t = cos3(0.3, 0.3, 0.3);
        let p = construct_v4(&t, Sign::Plus, 4).unwrap();
        let m = construct_v4(&t, Sign::Minus, 4).unwrap();
        assert_eq!(are_equivalent(&p, &m).value, VerdictValue::No);
        assert!(are_equivalent(&p, &p.transformed(&GroupElement::random(4, 3)).unwrap()).is_yes());
        let r = cos3(0.5, 0.2, 0.0);
        let a = construct_v4(&r, Sign::Plus, 4).unwrap();
        let b = a.transformed(&GroupElement::random(4, 9)).unwrap();
        assert!(are_equivalent(&a, &b).is_yes());
        let x = construct(&FamilySpec::TotallyReal { k: 3, n: 4 }).unwrap();
        let y = x.transformed(&GroupElement::random(4, 1)).unwrap();
        assert!(are_equivalent(&x, &y).is_yes());
        let v3p = construct_v3(1.2, Sign::Plus, 3).unwrap();
        let v3m = construct_v3(1.2, Sign::Minus, 3).unwrap();
        assert_eq!(are_equivalent(&v3p, &v3m).value, VerdictValue::No);
        assert_eq!(are_equivalent(&p, &x).value, VerdictValue::No);
    }

    #[test]
    fn moduli_examples() {
        let s = moduli_membership(5, 5, &AngleTriple::totally_real()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].id, StratumId::TotallyRealPoint);
        let s = moduli_membership(8, 2, &cos3(1.0, 1.0, 1.0)).unwrap();
        assert_eq!(s.len(), 1);
        let s = moduli_membership(4, 4, &cos3(0.3, 0.3, 0.3)).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|e| e.id == StratumId::R4MinusZ2 && e.multiplicity == 2));
        assert!(moduli_membership(0, 2, &AngleTriple::totally_real()).is_err());
        assert!(moduli_membership(9, 2, &AngleTriple::totally_real()).is_err());
    }

    #[test]
    fn describe_examples() {
        let d = moduli_describe(6, 4).unwrap();
        assert_eq!(d.strata.len(), 1);
        assert_eq!(d.strata[0].id, StratumId::TotallyComplexPoint);
        let d = moduli_describe(3, 1).unwrap();
        assert_eq!(d.strata.iter().map(|s| s.id).collect::<Vec<_>>(), vec![StratumId::ImHPoint]);
        let d = moduli_describe(4, 4).unwrap();
        assert_eq!(d.strata.iter().map(|s| s.id).collect::<Vec<_>>(), vec![StratumId::R4PlusOnly, StratumId::R4MinusZ2]);
        let d = moduli_describe(0, 3).unwrap();
        assert!(d.strata.is_empty());
        assert_eq!(d.special_actions, vec![ActionLabel::N, ActionLabel::K, ActionLabel::SU1n1]);
        assert_eq!(moduli_describe(1, 3).unwrap().strata[0].label, ActionLabel::SolvableFoliation);
    }

    #[test]
    fn representative_examples() {
        let t = AngleTriple::from_angles(FRAC_PI_3, FRAC_PI_3, FRAC_PI_2).unwrap();
        let v = representative(3, 3, &t, Some(Sign::Minus)).unwrap();
        assert_eq!(branch_of_v3(&v).unwrap(), Sign::Minus);
        let t = cos3(0.3, 0.3, 0.3);
        let v = representative(8, 8, &t, Some(Sign::Plus)).unwrap();
        assert_eq!(type_of(&v).unwrap(), TypeSignature::new(2, 0));
        let v = representative(1, 5, &cos3(0.9, 0.2, 0.1), None).unwrap();
        assert_eq!(v.dim(), 1);
        assert!(representative(5, 5, &cos3(0.9, 0.2, 0.1), None).is_err());
        assert!(representative(5, 5, &AngleTriple::totally_real(), Some(Sign::Plus)).is_err());
    }

    #[test]
    fn classification_record_of_sum() {
        let rec = classify_subspace(&construct_sum(&third(), 1, 1, 7).unwrap());
        assert_eq!(rec.protohomogeneous.value, VerdictValue::No);
        assert_eq!(rec.type_signature, Some(TypeSignature::new(1, 1)));
        let rec = classify_subspace(&construct_v4(&cos3(0.3, 0.3, 0.3), Sign::Minus, 4).unwrap());
        assert_eq!(rec.stratum.as_ref().map(|s| (s.id, s.branch)), Some((StratumId::R4MinusZ2, Some(Sign::Minus))));
    }

    #[test]
    fn every_cell_is_reachable() {
        let mut seen = std::collections::HashSet::new();
        for n in 1..=8 {
            for k in 1..=4 * n {
                seen.insert(table_cell(k, n));
            }
        }
        // k = 3 never falls in the second column
        assert_eq!(seen.len(), 15);
        assert!(cell_strata(TableCell { row: TableRow::Three, column: TableColumn::Lower }).is_empty());
    }

    #[test]
    fn samples_stay_in_their_stratum() {
        use StratumId::*;
        for id in [
            R4PlusOnly, R4MinusZ2, Boundary, ComplexifiedCurve, QuaternionicPoint, KaehlerCurve,
            TotallyComplexPoint, TotallyRealPoint, R3PlusOnly, R3MinusZ2, ImHPoint, R3PiThirdPoint,
        ] {
            for t in stratum_samples(id, 20, 7) {
                assert!(id.contains(&t), "{id:?} {t}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn membership_is_monotone_in_n(k in 1usize..=16, n in 1usize..=8, a in 0.0f64..=1.0, b in 0.0f64..=1.0, c in 0.0f64..=1.0) {
            prop_assume!(k <= n);
            let mut cs = [a, b, c];
            cs.sort_by(|x, y| y.total_cmp(x));
            let t = cos3(cs[0], cs[1], cs[2]);
            if !moduli_membership(k, n, &t).unwrap().is_empty() {
                prop_assert!(!moduli_membership(k, n + 1, &t).unwrap().is_empty());
            }
        }
    }
}
