//! The acceptance battery: eleven numbered criteria, each producing one
//! pass/fail line.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};
use std::fmt;

use nalgebra::Matrix3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{self, FamilySpec, Sign};
use crate::classify::{
    self, are_equivalent, branch_of_v3, classify_subspace, factorize, is_protohomogeneous, moduli_describe,
    representative, stratum_samples, type_of, StratumId, TypeSignature, VerdictValue,
};
use crate::error::QkaError;
use crate::oracle::{self, GridSpec};
use crate::quat::GroupElement;
use crate::subspace::{
    constancy_check, distribution_rank, is_h_orthogonal, joint_canonical_basis, pbar_operator, AngleTriple, Subspace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub checks: usize,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<28} {:>7} checks  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.checks,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub mode: Mode,
    pub seed: u64,
    pub results: Vec<CriterionResult>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        for r in &self.results {
            s.push_str(&r.to_string());
            s.push('\n');
        }
        let ok = self.results.iter().filter(|r| r.passed).count();
        s.push_str(&format!("{ok}/{} criteria passed\n", self.results.len()));
        s
    }
}

pub const NAMES: [&str; 11] = [
    "constancy of constructors",
    "gram semidefiniteness",
    "dimension-3 omega",
    "sign relation",
    "type and protohomogeneity",
    "inequivalence",
    "moduli table",
    "steenrod consistency",
    "group invariance",
    "joint diagonalization",
    "factorization round-trip",
];

/// Collects checks and failures for one criterion.
#[derive(Default)]
struct Tally {
    checks: usize,
    failures: Vec<String>,
    worst: f64,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn value(&mut self, x: f64, bound: f64, what: impl FnOnce() -> String) {
        self.worst = self.worst.max(x);
        self.check(x < bound, || format!("{} = {x:.3e} (bound {bound:.0e})", what()));
    }

    fn finish(self, id: u8, summary: String) -> CriterionResult {
        let passed = self.failures.is_empty() && self.checks > 0;
        let detail = if passed {
            summary
        } else if self.checks == 0 {
            "no checks ran".into()
        } else {
            format!("{} failures; first: {}", self.failures.len(), self.failures[0])
        };
        CriterionResult { id, name: NAMES[id as usize - 1].to_string(), passed, checks: self.checks, detail }
    }
}

fn cos3(a: f64, b: f64, c: f64) -> AngleTriple {
    AngleTriple::from_cosines(a, b, c).expect("ordered cosines in [0, 1]")
}

fn ordered_cosines(values: &[f64]) -> Vec<AngleTriple> {
    let mut out = Vec::new();
    for (a, &x) in values.iter().enumerate() {
        for (b, &y) in values.iter().enumerate().skip(a) {
            for &z in values.iter().skip(b) {
                out.push(cos3(x, y, z));
            }
        }
    }
    out
}

/// The family/parameter grid shared by the constructor criteria.
pub fn construction_grid(mode: Mode) -> Vec<FamilySpec> {
    let mut specs = Vec::new();
    let phis: Vec<f64> = (1..=9).map(|j| j as f64 * FRAC_PI_2 / 10.0).collect();
    for k in 1..=12 {
        specs.push(FamilySpec::TotallyReal { k, n: k });
        specs.push(FamilySpec::TotallyReal { k, n: k + 2 });
    }
    for l in 1..=6 {
        specs.push(FamilySpec::TotallyComplex { l, n: l });
        specs.push(FamilySpec::TotallyComplex { l, n: l + 1 });
    }
    for l in 1..=4 {
        specs.push(FamilySpec::Quaternionic { l, n: l });
        specs.push(FamilySpec::Quaternionic { l, n: l + 2 });
    }
    for n in 1..=4 {
        specs.push(FamilySpec::ImHLine { n });
    }
    for &phi in &phis {
        for l in 1..=3 {
            specs.push(FamilySpec::CkaPlaneSum { phi, l, n: 2 * l });
            specs.push(FamilySpec::ComplexifiedCka { phi, l, n: 2 * l });
        }
    }
    for j in 0..=20 {
        let phi = j as f64 * FRAC_PI_2 / 20.0;
        specs.push(FamilySpec::V3 { phi, sign: Sign::Plus, n: 3 });
        if phi >= FRAC_PI_3 - 1e-12 {
            specs.push(FamilySpec::V3 { phi, sign: Sign::Minus, n: 3 });
        }
    }
    specs.push(FamilySpec::V3 { phi: FRAC_PI_3, sign: Sign::Minus, n: 2 });
    let grid = ordered_cosines(&[1.0, 0.8, 0.6, 0.45, 1.0 / 3.0, 0.2, 0.1, 0.0]);
    for t in &grid {
        for sign in [Sign::Plus, Sign::Minus] {
            let probe = FamilySpec::V4 { angles: *t, sign, n: 1 };
            if let Ok(n) = catalog::min_quaternionic_dim(&probe) {
                specs.push(FamilySpec::V4 { angles: *t, sign, n });
                specs.push(FamilySpec::V4 { angles: *t, sign, n: 5 });
            }
        }
    }
    for t in &grid {
        for (p, q) in [(2, 0), (1, 1), (0, 2)] {
            let probe = FamilySpec::Sum { angles: *t, l_plus: p, l_minus: q, n: 1 };
            if let Ok(n) = catalog::min_quaternionic_dim(&probe) {
                specs.push(FamilySpec::Sum { angles: *t, l_plus: p, l_minus: q, n });
            }
        }
    }
    if mode == Mode::Quick {
        specs = specs.into_iter().step_by(6).collect();
    }
    specs
}

fn built(mode: Mode) -> Vec<(FamilySpec, Subspace)> {
    construction_grid(mode)
        .into_iter()
        .map(|s| {
            let v = catalog::construct(&s).unwrap_or_else(|e| panic!("grid point {s:?} failed: {e}"));
            (s, v)
        })
        .collect()
}

fn criterion_1(mode: Mode, seed: u64) -> CriterionResult {
    let mut t = Tally::default();
    let specs = construction_grid(mode);
    let mut constructed = 0;
    for (i, spec) in specs.iter().enumerate() {
        let v = match catalog::construct(spec) {
            Ok(v) => v,
            Err(e) => {
                t.check(false, || format!("{spec:?}: {e}"));
                continue;
            }
        };
        constructed += 1;
        let rep = constancy_check(&v, 500, seed.wrapping_add(i as u64), 1e-9);
        t.value(rep.max_spread, 1e-9, || format!("spread of {spec:?}"));
        let declared = spec.declared_triple().expect("declared triple");
        t.value(rep.triple.cos_deviation(&declared), 1e-8, || format!("triple deviation of {spec:?}"));
    }
    if mode == Mode::Full {
        t.check(constructed >= 300, || format!("only {constructed} constructions"));
    }
    let worst = t.worst;
    t.finish(1, format!("{constructed} constructions, worst deviation {worst:.1e}"))
}

fn criterion_2(mode: Mode) -> CriterionResult {
    let mut t = Tally::default();
    let resolution = if mode == Mode::Full { 50 } else { 20 };
    let grid = GridSpec::new(resolution, 1e-10, 0).expect("resolution >= 2");
    let mut rank_two = 0;
    for c in grid.ordered_cosines() {
        let angles = cos3(c[0], c[1], c[2]);
        for sign in [Sign::Plus, Sign::Minus] {
            let eps = sign.value();
            let g = catalog::gram_matrix(&angles, sign).expect("phi1 > 0 on the grid");
            let (psd, rank) = match oracle::psd_oracle(&g.entries) {
                Ok(r) => r,
                Err(e) => {
                    t.check(false, || format!("{c:?} {sign}: {e}"));
                    continue;
                }
            };
            let ineq = oracle::admissible_oracle(c, eps);
            t.check(psd == ineq, || format!("{c:?} {sign}: psd {psd} but inequality {ineq}"));
            let adm = catalog::admissible(&angles, sign).expect("valid");
            t.check(adm.exists == psd, || format!("{c:?} {sign}: admissible {} but psd {psd}", adm.exists));
            if psd {
                let on_boundary = (c[0] + c[1] - eps * c[2] - 1.0).abs() <= 1e-10;
                rank_two += usize::from(on_boundary);
                t.check((rank == 2) == on_boundary, || format!("{c:?} {sign}: rank {rank}, boundary {on_boundary}"));
                t.check(adm.gram_rank == Some(rank), || format!("{c:?} {sign}: gram rank {:?} vs {rank}", adm.gram_rank));
            }
            if c.iter().all(|&x| x > 0.0) {
                let dev = oracle::det_formula_check(&angles, sign).expect("valid");
                t.value(dev, 1e-10, || format!("determinant deviation at {c:?} {sign}"));
            }
        }
    }
    let worst = t.worst;
    t.finish(2, format!("{resolution}^3 grid, {rank_two} rank-2 points, det deviation {worst:.1e}"))
}

fn criterion_3(mode: Mode, seed: u64) -> CriterionResult {
    use rand::Rng;
    let mut t = Tally::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = if mode == Mode::Full { 100 } else { 10 };
    for sign in [Sign::Plus, Sign::Minus] {
        for j in 0..20 {
            let phi = match sign {
                Sign::Plus => (j + 1) as f64 * FRAC_PI_2 / 20.0,
                Sign::Minus => FRAC_PI_3 + j as f64 * (FRAC_PI_2 - FRAC_PI_3) / 19.0,
            };
            let v = catalog::construct_v3(phi, sign, 3).expect("valid");
            for _ in 0..points {
                let mut x: [f64; 3] = [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
                let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
                x.iter_mut().for_each(|a| *a /= norm);
                let omega = oracle::omega_direct(&v, &x);
                let want = oracle::v3_omega_closed_form(phi, sign, x);
                t.value((omega - want).amax(), 1e-10, || format!("omega at phi {phi:.4} {sign}"));
                let ev = oracle::eigenvalues_sym3(&omega);
                let c2 = phi.cos().powi(2);
                let dev = (ev[0] - c2).abs().max((ev[1] - c2).abs()).max(ev[2].abs());
                t.value(dev, 1e-10, || format!("spectrum at phi {phi:.4} {sign}"));
            }
        }
    }
    let worst = t.worst;
    t.finish(3, format!("40 angles x {points} vectors, worst {worst:.1e}"))
}

fn sign_defect(v: &Subspace, t: &AngleTriple, sign: Sign) -> Result<f64, QkaError> {
    let (basis, _) = joint_canonical_basis(v, 64, 1);
    let p: Vec<_> = (0..3).map(|i| pbar_operator(v, &basis, i, t.phi(i))).collect::<Result<_, _>>()?;
    Ok((&p[0] * &p[1] - &p[2] * sign.value()).amax())
}

fn criterion_4(mode: Mode) -> CriterionResult {
    let mut t = Tally::default();
    let step = if mode == Mode::Full { 10 } else { 5 };
    let values: Vec<f64> = (1..step).rev().map(|m| m as f64 / step as f64).collect();
    for angles in ordered_cosines(&values) {
        for sign in [Sign::Plus, Sign::Minus] {
            let Ok(v) = catalog::construct_v4(&angles, sign, 4) else { continue };
            match sign_defect(&v, &angles, sign) {
                Ok(d) => t.value(d, 1e-8, || format!("P1P2 - ({sign})P3 at {angles}")),
                Err(e) => t.check(false, || format!("{angles} {sign}: {e}")),
            }
        }
    }
    let worst = t.worst;
    t.finish(4, format!("max |P1P2 -+ P3| = {worst:.1e}"))
}

fn type_triples() -> Vec<AngleTriple> {
    vec![
        cos3(0.3, 0.3, 0.3),
        cos3(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
        cos3(0.5, 0.3, 0.1),
        cos3(0.4, 0.2, 0.1),
        cos3(0.6, 0.5, 0.3),
        cos3(0.8, 0.5, 0.4),
        cos3(0.2, 0.2, 0.05),
    ]
}

fn sum_cases(mode: Mode) -> Vec<(AngleTriple, usize, usize, usize)> {
    let mut out = Vec::new();
    let max = if mode == Mode::Full { 4 } else { 2 };
    for angles in type_triples() {
        for total in 1..=max {
            for p in 0..=total {
                let q = total - p;
                let probe = FamilySpec::Sum { angles, l_plus: p, l_minus: q, n: 1 };
                if let Ok(n) = catalog::min_quaternionic_dim(&probe) {
                    out.push((angles, p, q, n));
                }
            }
        }
    }
    out
}

fn criterion_5(mode: Mode) -> CriterionResult {
    let mut t = Tally::default();
    for (angles, p, q, n) in sum_cases(mode) {
        let v = match catalog::construct_sum(&angles, p, q, n) {
            Ok(v) => v,
            Err(e) => {
                t.check(false, || format!("({p},{q}) at {angles}: {e}"));
                continue;
            }
        };
        match type_of(&v) {
            Ok(ty) => t.check(ty == TypeSignature::new(p, q), || format!("type {ty} for ({p},{q}) at {angles}")),
            Err(e) => t.check(false, || format!("type of ({p},{q}) at {angles}: {e}")),
        }
        let verdict = is_protohomogeneous(&v);
        let want = if p == 0 || q == 0 { VerdictValue::Yes } else { VerdictValue::No };
        t.check(verdict.value == want, || format!("({p},{q}) at {angles}: {:?} ({})", verdict.value, verdict.reason));
    }
    let third = cos3(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
    let witness = catalog::construct_sum(&third, 1, 1, 7);
    t.check(witness.is_ok(), || "the (1,1) witness does not fit in H^7".into());
    if let Ok(w) = witness {
        let rep = constancy_check(&w, 500, 5, 1e-9);
        t.check(rep.constant && rep.triple.approx_eq(&third, 1e-8), || format!("witness angle {}", rep.triple));
        t.check(is_protohomogeneous(&w).value == VerdictValue::No, || "witness is protohomogeneous".into());
    }
    t.check(
        matches!(catalog::construct_sum(&third, 1, 1, 6), Err(QkaError::AmbientTooSmall { .. })),
        || "the (1,1) witness was accepted in H^6".into(),
    );
    let checks = t.checks;
    let max = if mode == Mode::Full { 4 } else { 2 };
    t.finish(5, format!("{checks} checks over sums with p+q <= {max}, witness at n = 7"))
}

fn interior_minus_triples() -> Vec<AngleTriple> {
    let mut out = Vec::new();
    for c1 in [0.6f64, 0.5, 0.4, 0.3, 0.2] {
        for c2 in [0.3, 0.2, 0.1, 0.05] {
            if c2 > c1 {
                continue;
            }
            let c3 = (0.5 * (0.95 - c1 - c2)).min(c2).max(0.01);
            if c1 + c2 + c3 < 1.0 && out.len() < 20 {
                out.push(cos3(c1, c2, c3));
            }
        }
    }
    while out.len() < 20 {
        let x = 0.02 * out.len() as f64;
        out.push(cos3(0.31 - x / 4.0, 0.3 - x / 4.0, 0.05));
    }
    out
}

fn criterion_6(mode: Mode, seed: u64) -> CriterionResult {
    let mut t = Tally::default();
    let triples = interior_minus_triples();
    let take = if mode == Mode::Full { 20 } else { 4 };
    for (i, angles) in triples.iter().take(take).enumerate() {
        let p = catalog::construct_v4(angles, Sign::Plus, 4).expect("admissible");
        let m = catalog::construct_v4(angles, Sign::Minus, 4).expect("admissible");
        let m = m.transformed(&GroupElement::random(4, seed.wrapping_add(i as u64))).expect("same n");
        let verdict = are_equivalent(&p, &m);
        t.check(verdict.value == VerdictValue::No, || format!("V+ vs V- at {angles}: {:?}", verdict.value));
    }
    for (c1, c2) in [(0.5, 0.3), (0.7, 0.2), (0.45, 0.45), (0.9, 0.1)] {
        let angles = cos3(c1, c2, 0.0);
        let p = catalog::construct_v4(&angles, Sign::Plus, 4).expect("admissible");
        let m = catalog::construct_v4_any_sign(&angles, Sign::Minus, 4).expect("admissible");
        let verdict = are_equivalent(&p, &m);
        t.check(verdict.value == VerdictValue::Yes, || format!("V+ vs V- at {angles}: {:?}", verdict.value));
    }
    let count = if mode == Mode::Full { 10 } else { 3 };
    for j in 0..count {
        let phi = FRAC_PI_3 + j as f64 * (FRAC_PI_2 - FRAC_PI_3) / count as f64;
        for sign in [Sign::Plus, Sign::Minus] {
            let v = catalog::construct_v3(phi, sign, 3).expect("valid");
            let got = branch_of_v3(&v);
            t.check(got == Ok(sign), || format!("branch at phi {phi:.4}: {got:?} instead of {sign}"));
        }
        let p = catalog::construct_v3(phi, Sign::Plus, 3).expect("valid");
        let m = catalog::construct_v3(phi, Sign::Minus, 3).expect("valid");
        t.check(are_equivalent(&p, &m).value == VerdictValue::No, || format!("V3 branches equivalent at {phi:.4}"));
    }
    let p = catalog::construct_v3(FRAC_PI_2, Sign::Plus, 3).expect("valid");
    let m = catalog::construct_v3(FRAC_PI_2, Sign::Minus, 3).expect("valid");
    t.check(branch_of_v3(&p) == Err(QkaError::BranchesMerge), || "no merge at pi/2".into());
    t.check(are_equivalent(&p, &m).is_yes(), || "branches at pi/2 not equivalent".into());
    let checks = t.checks;
    t.finish(6, format!("{checks} equivalence and branch checks"))
}

/// Strata of each spot-checked table cell, read off the classification table.
fn expected_cells() -> Vec<((usize, usize), Vec<StratumId>)> {
    use StratumId::*;
    vec![
        ((5, 5), vec![TotallyRealPoint]),
        ((6, 4), vec![TotallyComplexPoint]),
        ((6, 8), vec![KaehlerCurve]),
        ((3, 1), vec![ImHPoint]),
        ((3, 2), vec![ImHPoint, R3PiThirdPoint]),
        ((3, 8), vec![R3PlusOnly, R3MinusZ2]),
        ((4, 4), vec![R4PlusOnly, R4MinusZ2]),
        ((8, 2), vec![QuaternionicPoint]),
        ((8, 4), vec![ComplexifiedCurve]),
        ((8, 6), vec![Boundary]),
        ((8, 8), vec![R4PlusOnly, R4MinusZ2]),
        ((12, 8), vec![ComplexifiedCurve]),
        ((7, 4), vec![]),
        ((7, 6), vec![]),
        ((7, 3), vec![]),
        ((10, 3), vec![]),
        ((10, 8), vec![TotallyComplexPoint]),
        ((9, 3), vec![]),
    ]
}

/// Round-trips one stratum through representative and classification.
fn round_trip(k: usize, n: usize, id: StratumId, angles: &AngleTriple, branch: Option<Sign>) -> Result<(), String> {
    let v = representative(k, n, angles, branch).map_err(|e| format!("representative: {e}"))?;
    if v.n() != n || v.dim() != k {
        return Err(format!("representative has (k, n) = ({}, {})", v.dim(), v.n()));
    }
    let rec = classify_subspace(&v);
    let measured = AngleTriple::from_cosines(rec.triple.cosines[0], rec.triple.cosines[1], rec.triple.cosines[2])
        .map_err(|e| e.to_string())?;
    if measured.cos_deviation(angles) > 1e-8 {
        return Err(format!("angle {measured} instead of {angles}"));
    }
    if !rec.protohomogeneous.is_yes() {
        return Err(format!("verdict {:?}: {}", rec.protohomogeneous.value, rec.protohomogeneous.reason));
    }
    match &rec.stratum {
        Some(s) if s.id == id && s.branch == branch => Ok(()),
        other => Err(format!("classified as {:?}", other.as_ref().map(|s| (s.id, s.branch)))),
    }
}

fn criterion_7(mode: Mode, seed: u64) -> CriterionResult {
    let mut t = Tally::default();
    let samples = if mode == Mode::Full { 20 } else { 3 };
    let mut cells = std::collections::HashSet::new();
    for ((k, n), want) in expected_cells() {
        let d = match moduli_describe(k, n) {
            Ok(d) => d,
            Err(e) => {
                t.check(false, || format!("({k},{n}): {e}"));
                continue;
            }
        };
        cells.extend(d.cell);
        let got: Vec<StratumId> = d.strata.iter().map(|s| s.id).collect();
        t.check(got == want, || format!("({k},{n}): {got:?} instead of {want:?}"));
        for s in &d.strata {
            t.check(s.multiplicity == if s.kind == classify::StratumKind::RegionWithZ2 { 2 } else { 1 }, || {
                format!("({k},{n}) {:?}: multiplicity {}", s.id, s.multiplicity)
            });
            let branches: Vec<Option<Sign>> =
                if s.multiplicity == 2 { vec![Some(Sign::Plus), Some(Sign::Minus)] } else { vec![None] };
            for angles in stratum_samples(s.id, samples, seed) {
                for &b in &branches {
                    let r = round_trip(k, n, s.id, &angles, b);
                    t.check(r.is_ok(), || format!("({k},{n}) {:?} {b:?} at {angles}: {}", s.id, r.unwrap_err()));
                }
            }
        }
    }
    // the k = 3 row never meets the n < k <= 4n/3 column, whose entry is empty
    t.check(cells.len() == 15, || format!("{} distinct cells visited", cells.len()));
    let k3_lower = classify::TableCell { row: classify::TableRow::Three, column: classify::TableColumn::Lower };
    t.check(classify::cell_strata(k3_lower).is_empty(), || "k = 3 lower cell is not empty".into());
    match moduli_describe(0, 3) {
        Ok(d) => t.check(
            d.strata.is_empty()
                && d.special_actions == vec![classify::ActionLabel::N, classify::ActionLabel::K, classify::ActionLabel::SU1n1],
            || "k = 0 does not list exactly N, K, SU(1,n+1)".into(),
        ),
        Err(e) => t.check(false, || format!("(0,3): {e}")),
    }
    match moduli_describe(1, 3) {
        Ok(d) => t.check(
            d.strata.iter().all(|s| s.label == classify::ActionLabel::SolvableFoliation),
            || "k = 1 not labelled as the solvable foliation".into(),
        ),
        Err(e) => t.check(false, || format!("(1,3): {e}")),
    }
    let checks = t.checks;
    t.finish(7, format!("16 table cells, {checks} checks including round-trips"))
}

fn criterion_8(mode: Mode, seed: u64) -> CriterionResult {
    let mut t = Tally::default();
    for (spec, v) in built(mode) {
        let want = spec.declared_triple().expect("declared").non_right_count();
        match distribution_rank(&v, 50, seed) {
            Ok(r) => t.check(r == want, || format!("{spec:?}: rank {r}, expected {want}")),
            Err(e) => t.check(false, || format!("{spec:?}: {e}")),
        }
        t.check(oracle::steenrod_oracle(&v), || format!("{spec:?} fails the steenrod oracle"));
    }
    let bad = AngleTriple::from_angles(std::f64::consts::FRAC_PI_4, FRAC_PI_3, FRAC_PI_2).expect("valid");
    t.check(!oracle::steenrod_admissible(3, &bad), || "(pi/4, pi/3, pi/2) accepted in dimension 3".into());
    let checks = t.checks;
    t.finish(8, format!("{checks} checks"))
}

fn criterion_9(mode: Mode, seed: u64) -> CriterionResult {
    let mut t = Tally::default();
    let trials = if mode == Mode::Full { 100 } else { 20 };
    let specs = [
        FamilySpec::Quaternionic { l: 1, n: 3 },
        FamilySpec::TotallyComplex { l: 2, n: 3 },
        FamilySpec::TotallyReal { k: 5, n: 5 },
        FamilySpec::ImHLine { n: 3 },
        FamilySpec::CkaPlaneSum { phi: 0.7, l: 2, n: 4 },
        FamilySpec::ComplexifiedCka { phi: 0.9, l: 1, n: 3 },
        FamilySpec::V3 { phi: 1.2, sign: Sign::Plus, n: 3 },
        FamilySpec::V3 { phi: 1.2, sign: Sign::Minus, n: 3 },
        FamilySpec::V4 { angles: cos3(0.3, 0.3, 0.3), sign: Sign::Minus, n: 4 },
        FamilySpec::V4 { angles: cos3(0.6, 0.5, 0.3), sign: Sign::Plus, n: 4 },
        FamilySpec::Sum { angles: cos3(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0), l_plus: 1, l_minus: 1, n: 7 },
    ];
    for (i, spec) in specs.iter().enumerate() {
        let v = catalog::construct(spec).expect("valid");
        let dev = oracle::invariance_oracle(&v, trials, seed.wrapping_add(i as u64));
        t.value(dev, 1e-9, || format!("invariance of {spec:?}"));
    }
    let mut worst_rot: f64 = 0.0;
    for s in 0..trials as u64 {
        let g = GroupElement::random(3, seed.wrapping_add(1000 + s));
        let r = g.induced_rotation();
        let err = (r.transpose() * r - Matrix3::identity()).amax();
        worst_rot = worst_rot.max(err);
        t.check(err < 1e-12 && (r.determinant() - 1.0).abs() < 1e-12, || format!("rotation defect {err:.3e}"));
    }
    let worst = t.worst;
    t.finish(9, format!("triple deviation {worst:.1e}, rotation defect {worst_rot:.1e}"))
}

fn criterion_10(mode: Mode, seed: u64) -> CriterionResult {
    let mut t = Tally::default();
    let mut tested = 0;
    for (spec, v) in built(mode) {
        if v.dim() < 4 || !is_protohomogeneous(&v).is_yes() {
            continue;
        }
        tested += 1;
        let (_, residual) = joint_canonical_basis(&v, 64, seed);
        t.value(residual, 1e-9, || format!("joint residual of {spec:?}"));
    }
    let line = catalog::construct(&FamilySpec::ImHLine { n: 2 }).expect("valid");
    let (_, residual) = joint_canonical_basis(&line, 64, seed);
    t.check(residual > 1e-2, || format!("line residual {residual:.3e} is not bounded away from 0"));
    let defect = oracle::commutator_defect(&line, 50, seed);
    t.check(defect > 1e-2, || format!("line commutator defect {defect:.3e}"));
    let worst = t.worst;
    t.finish(10, format!("{tested} subspaces, worst residual {worst:.1e}; line residual {residual:.2}"))
}

fn criterion_11(mode: Mode) -> CriterionResult {
    let mut t = Tally::default();
    for (angles, p, q, n) in sum_cases(mode) {
        let Ok(v) = catalog::construct_sum(&angles, p, q, n) else {
            t.check(false, || format!("({p},{q}) at {angles} not constructed"));
            continue;
        };
        let blocks = match factorize(&v) {
            Ok(b) => b,
            Err(e) => {
                t.check(false, || format!("({p},{q}) at {angles}: {e}"));
                continue;
            }
        };
        t.check(blocks.len() == p + q, || format!("({p},{q}) at {angles}: {} blocks", blocks.len()));
        for (i, a) in blocks.iter().enumerate() {
            t.check(a.dim() == 4, || format!("block of dimension {}", a.dim()));
            for b in &blocks[i + 1..] {
                t.check(is_h_orthogonal(a, b), || format!("({p},{q}) at {angles}: blocks not H-orthogonal"));
            }
        }
        let all: Vec<_> = blocks.iter().flat_map(|b| b.vectors()).collect();
        match Subspace::from_spanning(&all) {
            Ok(sum) => {
                let r = sum.containment_residual(&v).max(v.containment_residual(&sum));
                t.value(r, 1e-8, || format!("reconstruction of ({p},{q}) at {angles}"));
            }
            Err(e) => t.check(false, || format!("({p},{q}) at {angles}: {e}")),
        }
    }
    let worst = t.worst;
    t.finish(11, format!("reconstruction residual {worst:.1e}"))
}

pub fn run_criterion(id: u8, mode: Mode, seed: u64) -> CriterionResult {
    match id {
        1 => criterion_1(mode, seed),
        2 => criterion_2(mode),
        3 => criterion_3(mode, seed),
        4 => criterion_4(mode),
        5 => criterion_5(mode),
        6 => criterion_6(mode, seed),
        7 => criterion_7(mode, seed),
        8 => criterion_8(mode, seed),
        9 => criterion_9(mode, seed),
        10 => criterion_10(mode, seed),
        11 => criterion_11(mode),
        _ => panic!("criteria are numbered 1 to 11"),
    }
}

pub fn run(mode: Mode, seed: u64) -> Report {
    Report { mode, seed, results: (1..=11).map(|id| run_criterion(id, mode, seed)).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_large_enough() {
        let n = construction_grid(Mode::Full).len();
        assert!(n >= 300, "{n}");
    }

    #[test]
    fn quick_run_is_deterministic() {
        let a = run_criterion(6, Mode::Quick, 11);
        let b = run_criterion(6, Mode::Quick, 11);
        assert_eq!(a, b);
    }

    #[test]
    fn interior_triples_are_interior() {
        let ts = interior_minus_triples();
        assert_eq!(ts.len(), 20);
        for t in ts {
            let c = t.cosines();
            assert!(c[0] + c[1] + c[2] < 1.0 && c[2] > 0.0);
        }
    }
}
