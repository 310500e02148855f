//! Brute-force validators that avoid the code paths they check: a
//! trigonometric 3×3 eigen solver, principal minors, direct quaternion
//! arithmetic for Ω.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::catalog::{self, Sign};
use crate::error::{QkaError, Result};
use crate::quat::GroupElement;
use crate::subspace::{AngleTriple, Subspace};

/// Eigenvalue threshold for semidefiniteness and rank.
pub const PSD_TOL: f64 = 1e-10;
const SYM_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub resolution: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl GridSpec {
    pub fn new(resolution: usize, tolerance: f64, seed: u64) -> Result<Self> {
        if resolution < 2 {
            return Err(QkaError::InvalidInput(format!("grid resolution must be at least 2, got {resolution}")));
        }
        Ok(Self { resolution, tolerance, seed })
    }

    /// Ordered cosine triples `c₁ ≥ c₂ ≥ c₃` with `cᵢ = m/resolution`, `m < resolution`.
    pub fn ordered_cosines(&self) -> Vec<[f64; 3]> {
        let r = self.resolution;
        let mut out = Vec::new();
        for a in 0..r {
            for b in 0..=a {
                for c in 0..=b {
                    out.push([a as f64 / r as f64, b as f64 / r as f64, c as f64 / r as f64]);
                }
            }
        }
        out
    }

    /// `count` random ordered triples with cosines in (0, 1).
    pub fn random_cosines(&self, count: usize) -> Vec<[f64; 3]> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..count)
            .map(|_| {
                let mut c: [f64; 3] = [0.0; 3];
                for x in c.iter_mut() {
                    *x = rng.random_range(1e-6..1.0 - 1e-6);
                }
                c.sort_by(|a, b| b.total_cmp(a));
                c
            })
            .collect()
    }
}

/// Eigenvalues of a symmetric 3×3 matrix, descending, by the
/// trigonometric formula.
pub fn eigenvalues_sym3(m: &Matrix3<f64>) -> [f64; 3] {
    let p1 = m[(0, 1)].powi(2) + m[(0, 2)].powi(2) + m[(1, 2)].powi(2);
    let q = (m[(0, 0)] + m[(1, 1)] + m[(2, 2)]) / 3.0;
    if p1 == 0.0 {
        let mut d = [m[(0, 0)], m[(1, 1)], m[(2, 2)]];
        d.sort_by(|a, b| b.total_cmp(a));
        return d;
    }
    let p2 = (m[(0, 0)] - q).powi(2) + (m[(1, 1)] - q).powi(2) + (m[(2, 2)] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = (m - Matrix3::identity() * q) / p;
    let r = (det3(&b) / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    // the root farthest from the mean is well conditioned; deflate onto the other two
    let isolated = if r >= 0.0 { q + 2.0 * p * phi.cos() } else { q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos() };
    let shifted = m - Matrix3::identity() * isolated;
    let rows = [shifted.row(0).transpose(), shifted.row(1).transpose(), shifted.row(2).transpose()];
    let axis = [rows[0].cross(&rows[1]), rows[0].cross(&rows[2]), rows[1].cross(&rows[2])]
        .into_iter()
        .max_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared()))
        .expect("three candidates");
    if axis.norm() == 0.0 {
        return [q, q, q];
    }
    let axis = axis.normalize();
    let helper = if axis.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let u = axis.cross(&helper).normalize();
    let w = axis.cross(&u);
    let (a, b, d) = ((m * u).dot(&u), (m * u).dot(&w), (m * w).dot(&w));
    let mean = 0.5 * (a + d);
    let rad = (0.5 * (a - d)).hypot(b);
    let mut e = [isolated, mean + rad, mean - rad];
    e.sort_by(|x, y| y.total_cmp(x));
    e
}

fn det3(m: &Matrix3<f64>) -> f64 {
    m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
        - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
}

/// Semidefiniteness and rank, decided by eigenvalues and confirmed by
/// principal minors.
pub fn psd_oracle(m: &Matrix3<f64>) -> Result<(bool, usize)> {
    if (m - m.transpose()).amax() > SYM_TOL {
        return Err(QkaError::InvalidInput("matrix is not symmetric".into()));
    }
    let ev = eigenvalues_sym3(m);
    let psd = ev[2] >= -PSD_TOL;
    let rank = ev.iter().filter(|x| x.abs() > PSD_TOL).count();
    let scale = m.amax().max(1.0);
    let ones = (0..3).all(|i| m[(i, i)] >= -PSD_TOL);
    let twos = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .all(|&(i, j)| m[(i, i)] * m[(j, j)] - m[(i, j)] * m[(j, i)] >= -PSD_TOL * scale);
    let full = det3(m) >= -PSD_TOL * scale * scale;
    let by_minors = ones && twos && full;
    if by_minors != psd {
        return Err(QkaError::OracleDisagreement(format!(
            "eigenvalues {ev:?} say psd = {psd}, principal minors say {by_minors}"
        )));
    }
    Ok((psd, rank))
}

/// The closed form of the Gram determinant in terms of `xᵢ = cos φᵢ`.
pub fn det_closed_form(x: [f64; 3], eps: f64) -> f64 {
    let [x1, x2, x3] = x;
    (eps + x1 - x2 - x3) * (-eps + x1 + x2 - x3) * (-eps + x1 - x2 + x3) * (eps + x1 + x2 + x3)
        / ((1.0 - x1 * x1) * (1.0 - x2 * x2) * (1.0 - x3 * x3))
}

/// Deviation between `det(gram_matrix)` and the closed form, relative to
/// `max(1, |closed form|)`.
pub fn det_formula_check(angles: &AngleTriple, sign: Sign) -> Result<f64> {
    let g = catalog::gram_matrix(angles, sign)?;
    let closed = det_closed_form(angles.cosines(), sign.value());
    Ok((det3(&g.entries) - closed).abs() / closed.abs().max(1.0))
}

/// `c₁ + c₂ - ε c₃ ≤ 1`, the inequality the Gram matrix is checked against.
pub fn admissible_oracle(x: [f64; 3], eps: f64) -> bool {
    x[0] + x[1] - eps * x[2] <= 1.0 + PSD_TOL
}

/// `Ω(v)` in the standard canonical basis, computed by direct quaternion
/// multiplication and projection onto the basis of V.
pub fn omega_direct(v: &Subspace, x: &[f64]) -> Matrix3<f64> {
    let b = v.basis();
    let dim = b.nrows();
    let k = b.ncols();
    let mut w = vec![0.0; dim];
    for (j, xj) in x.iter().enumerate() {
        for r in 0..dim {
            w[r] += xj * b[(r, j)];
        }
    }
    // v·u for u = i, j, -k, slot by slot
    let units = [[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, -1.0]];
    let mut proj = [vec![0.0; k], vec![0.0; k], vec![0.0; k]];
    for (a, u) in units.iter().enumerate() {
        let mut jw = vec![0.0; dim];
        for s in 0..dim / 4 {
            let p = &w[4 * s..4 * s + 4];
            jw[4 * s] = p[0] * u[0] - p[1] * u[1] - p[2] * u[2] - p[3] * u[3];
            jw[4 * s + 1] = p[0] * u[1] + p[1] * u[0] + p[2] * u[3] - p[3] * u[2];
            jw[4 * s + 2] = p[0] * u[2] - p[1] * u[3] + p[2] * u[0] + p[3] * u[1];
            jw[4 * s + 3] = p[0] * u[3] + p[1] * u[2] - p[2] * u[1] + p[3] * u[0];
        }
        for c in 0..k {
            proj[a][c] = (0..dim).map(|r| b[(r, c)] * jw[r]).sum();
        }
    }
    Matrix3::from_fn(|i, j| proj[i].iter().zip(&proj[j]).map(|(p, q)| p * q).sum())
}

fn random_unit_coords(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return x.into_iter().map(|a| a / norm).collect();
        }
    }
}

/// Sorted cos² values at a random unit vector of V.
pub fn triple_direct(v: &Subspace, rng: &mut ChaCha8Rng) -> [f64; 3] {
    let x = random_unit_coords(v.dim(), rng);
    eigenvalues_sym3(&omega_direct(v, &x))
}

/// Largest spread of the sorted cos² values over `samples` random unit vectors.
pub fn spread_direct(v: &Subspace, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = triple_direct(v, &mut rng);
    (1..samples)
        .map(|_| {
            let t = triple_direct(v, &mut rng);
            (0..3).map(|i| (t[i] - first[i]).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Largest deviation of the sorted cos² values of T·V from those of V over
/// random group elements T.
pub fn invariance_oracle(v: &Subspace, trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = triple_direct(v, &mut rng);
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let g = GroupElement::random(v.n(), seed.wrapping_add(1 + t as u64));
        let tv = v.transformed(&g).expect("same ambient dimension");
        let tt = triple_direct(&tv, &mut rng);
        worst = worst.max((0..3).map(|i| (tt[i] - base[i]).abs()).fold(0.0, f64::max));
    }
    worst
}

/// Rank of the distribution `v ↦ span{P_J v}`, read off Ω at random unit vectors.
pub fn distribution_rank_direct(v: &Subspace, samples: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| triple_direct(v, &mut rng).iter().filter(|&&l| l > RANK_TOL).count())
        .max()
        .unwrap_or(0)
}

/// The triple constraints forced in dimension k by the absence of
/// distributions on odd spheres.
pub fn steenrod_admissible(k: usize, t: &AngleTriple) -> bool {
    if k >= 5 && k % 2 == 1 {
        (0..3).all(|i| t.is_right(i))
    } else if k % 4 == 2 {
        t.is_right(1) && t.is_right(2)
    } else if k == 3 {
        t.is_right(2) && (t.cos(0) - t.cos(1)).abs() <= 1e-8
    } else {
        true
    }
}

/// Dimension constraints plus agreement of the distribution rank with the
/// number of non-right angles.
pub fn steenrod_oracle(v: &Subspace) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0x57ee);
    let t = AngleTriple::from_cos2(triple_direct(v, &mut rng));
    steenrod_admissible(v.dim(), &t) && distribution_rank_direct(v, 20, 0x57ee) == t.non_right_count()
}

/// Largest commutator `‖[Ω(v), Ω(w)]‖` over random pairs; jointly
/// diagonalizable families commute, so this bounds non-diagonalizability
/// from below.
pub fn commutator_defect(v: &Subspace, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let a = omega_direct(v, &random_unit_coords(v.dim(), &mut rng));
        let b = omega_direct(v, &random_unit_coords(v.dim(), &mut rng));
        worst = worst.max((a * b - b * a).norm());
    }
    worst
}

/// `Ω(v)` for the 3-dimensional family in coordinates `(x₀, x₁, x₂)`
/// with respect to `{e₀, ξ₁, ξ₂}`.
pub fn v3_omega_closed_form(phi: f64, sign: Sign, x: [f64; 3]) -> Matrix3<f64> {
    let eps = sign.value();
    let [x0, x1, x2] = x;
    #[rustfmt::skip]
    let m = Matrix3::new(
        x0 * x0 + x1 * x1, x1 * x2, -eps * x0 * x2,
        x1 * x2, x0 * x0 + x2 * x2, eps * x0 * x1,
        -eps * x0 * x2, eps * x0 * x1, x1 * x1 + x2 * x2,
    );
    m * phi.cos().powi(2)
}
