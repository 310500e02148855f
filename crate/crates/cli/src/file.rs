//! The JSON subspace file.

use std::fs;
use std::path::Path;

use qka_core::subspace::{orthonormality_residual, reorthonormalize};
use qka_core::{Sign, Subspace};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;
/// Basis rows farther than this from orthonormal are rejected.
pub const LOAD_TOL: f64 = 1e-8;
/// Above this the basis is re-orthonormalized with a warning.
pub const WARN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cosines: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<Sign>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceFile {
    pub format_version: u32,
    pub n: usize,
    pub k: usize,
    /// k rows of 4n coordinates.
    pub basis: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl SubspaceFile {
    pub fn from_subspace(v: &Subspace, meta: Option<Meta>) -> Self {
        let basis = v.basis().column_iter().map(|c| c.iter().copied().collect()).collect();
        Self { format_version: FORMAT_VERSION, n: v.n(), k: v.dim(), basis, meta }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(e.to_string()))?;
        fs::write(path, text + "\n").map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("malformed subspace file {}: {e}", path.display())))
    }

    /// Validates the header and basis and builds the subspace.
    pub fn to_subspace(&self) -> Result<Subspace, CliError> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::Usage(format!("unsupported format_version {}", self.format_version)));
        }
        if self.n == 0 || self.k == 0 || self.basis.len() != self.k {
            return Err(CliError::Usage(format!("expected {} basis rows with n >= 1, got {}", self.k, self.basis.len())));
        }
        if let Some(row) = self.basis.iter().position(|r| r.len() != 4 * self.n) {
            return Err(CliError::Usage(format!("basis row {row} does not have 4n = {} entries", 4 * self.n)));
        }
        if self.basis.iter().flatten().any(|x| !x.is_finite()) {
            return Err(CliError::Usage("basis contains non-finite entries".into()));
        }
        let mut b = nalgebra::DMatrix::from_fn(4 * self.n, self.k, |r, c| self.basis[c][r]);
        let residual = orthonormality_residual(&b);
        if residual > LOAD_TOL {
            return Err(CliError::Usage(format!("basis rows are not orthonormal (residual {residual:.3e})")));
        }
        if residual > WARN_TOL {
            eprintln!("warning: basis re-orthonormalized (residual {residual:.3e})");
            b = reorthonormalize(b);
        }
        Subspace::from_basis(self.n, b).map_err(CliError::from)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qka_core::catalog::construct;
    use qka_core::{FamilySpec, GroupElement};

    #[test]
    fn round_trip_is_bit_exact() {
        let v = construct(&FamilySpec::V3 { phi: 1.1, sign: Sign::Minus, n: 3 })
            .unwrap()
            .transformed(&GroupElement::random(3, 42))
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.json");
        SubspaceFile::from_subspace(&v, None).write(&path).unwrap();
        let back = SubspaceFile::read(&path).unwrap().to_subspace().unwrap();
        let bits = |m: &nalgebra::DMatrix<f64>| m.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(back.basis()), bits(v.basis()));
    }

    #[test]
    fn rejects_bad_rows() {
        let f = SubspaceFile { format_version: 1, n: 1, k: 1, basis: vec![vec![1.0, 0.0, 0.0]], meta: None };
        assert!(matches!(f.to_subspace(), Err(CliError::Usage(_))));
        let f = SubspaceFile { format_version: 1, n: 1, k: 1, basis: vec![vec![2.0, 0.0, 0.0, 0.0]], meta: None };
        assert!(matches!(f.to_subspace(), Err(CliError::Usage(_))));
        let f = SubspaceFile { format_version: 2, n: 1, k: 1, basis: vec![vec![1.0, 0.0, 0.0, 0.0]], meta: None };
        assert!(matches!(f.to_subspace(), Err(CliError::Usage(_))));
    }

    #[test]
    fn small_drift_is_repaired() {
        let f = SubspaceFile { format_version: 1, n: 1, k: 1, basis: vec![vec![1.0 + 2e-9, 0.0, 0.0, 0.0]], meta: None };
        let v = f.to_subspace().unwrap();
        assert!((v.basis()[(0, 0)] - 1.0).abs() < 1e-15);
    }
}
