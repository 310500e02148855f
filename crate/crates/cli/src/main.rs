//! `qka`: construct, analyze and classify real subspaces of ℍⁿ.

mod file;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qka_core::catalog::{self, Family};
use qka_core::classify::{classify_subspace, moduli_describe, moduli_membership, TripleRecord};
use qka_core::selftest::{self, Mode};
use qka_core::subspace::{constancy_check, joint_canonical_basis, SPREAD_TOL};
use qka_core::{AngleTriple, FamilySpec, GroupElement, QkaError, Sign};
use serde::Serialize;
use serde_json::json;

use file::{Meta, SubspaceFile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<QkaError> for CliError {
    fn from(e: QkaError) -> Self {
        match e {
            QkaError::NoCommonBasis { .. }
            | QkaError::Factorization(_)
            | QkaError::OracleDisagreement(_)
            | QkaError::InconsistentType { .. }
            | QkaError::RankVaries(_)
            | QkaError::NotInvariant { .. } => CliError::Internal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "qka", version, about = "Quaternionic Kahler angles of real subspaces of H^n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a subspace from one of the catalog families and write it to a file.
    Construct(ConstructArgs),
    /// Sample the quaternionic Kahler angle of a subspace file.
    Angles {
        path: PathBuf,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, env = "QKA_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Full classification record of a subspace file.
    Classify { path: PathBuf },
    /// Strata of the moduli space for (k, n), or membership of one triple.
    Moduli {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        triple: TripleArgs,
    },
    /// Run the acceptance battery.
    Selftest {
        #[arg(long, conflicts_with = "full")]
        quick: bool,
        #[arg(long)]
        full: bool,
        #[arg(long, env = "QKA_SEED", default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Default)]
struct TripleArgs {
    /// Angles in radians (one value for single-angle families, else three).
    #[arg(long, num_args = 1..=3, conflicts_with = "cos", allow_negative_numbers = true)]
    angles: Option<Vec<f64>>,
    /// Cosines of the angles.
    #[arg(long, num_args = 1..=3, allow_negative_numbers = true)]
    cos: Option<Vec<f64>>,
}

impl TripleArgs {
    fn is_set(&self) -> bool {
        self.angles.is_some() || self.cos.is_some()
    }

    /// Raw values as cosines.
    fn cosines(&self) -> Option<Vec<f64>> {
        match (&self.angles, &self.cos) {
            (Some(a), _) => Some(a.iter().map(|x| x.cos()).collect()),
            (_, Some(c)) => Some(c.clone()),
            _ => None,
        }
    }

    fn single(&self) -> Result<f64, CliError> {
        match (&self.angles, &self.cos) {
            (Some(a), _) if a.len() == 1 => Ok(a[0]),
            (_, Some(c)) if c.len() == 1 => {
                if !(0.0..=1.0).contains(&c[0]) {
                    return Err(CliError::Usage(format!("cosine {} outside [0, 1]", c[0])));
                }
                Ok(c[0].acos())
            }
            _ => Err(CliError::Usage("expected a single angle (--angles phi or --cos c)".into())),
        }
    }

    fn triple(&self) -> Result<AngleTriple, CliError> {
        let c = self.cosines().ok_or_else(|| CliError::Usage("an angle triple is required (--angles or --cos)".into()))?;
        if c.len() != 3 {
            return Err(CliError::Usage(format!("expected three values, got {}", c.len())));
        }
        let t = match &self.angles {
            Some(a) => AngleTriple::from_angles(a[0], a[1], a[2]),
            None => AngleTriple::from_cosines(c[0], c[1], c[2]),
        };
        Ok(t?)
    }
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long)]
    family: String,
    #[command(flatten)]
    triple: TripleArgs,
    #[arg(long, allow_hyphen_values = true)]
    sign: Option<String>,
    #[arg(long, default_value_t = 0)]
    lplus: usize,
    #[arg(long, default_value_t = 0)]
    lminus: usize,
    /// Real dimension, for families without angle parameters.
    #[arg(long)]
    k: Option<usize>,
    /// Number of blocks (complex planes, quaternionic lines, 4-dimensional blocks).
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
    /// Move the result by a random element of Sp(1)Sp(n).
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_sign(s: &Option<String>) -> Result<Sign, CliError> {
    match s.as_deref() {
        None => Ok(Sign::Plus),
        Some(x) => x.parse().map_err(|e: QkaError| CliError::Usage(e.to_string())),
    }
}

fn blocks(args: &ConstructArgs, per_block: usize) -> Result<usize, CliError> {
    match (args.l, args.k) {
        (Some(l), _) => Ok(l),
        (None, Some(k)) if k % per_block == 0 => Ok(k / per_block),
        (None, Some(k)) => Err(CliError::Usage(format!("k = {k} is not a multiple of {per_block}"))),
        (None, None) => Err(CliError::Usage("--l or --k is required".into())),
    }
}

fn spec_of(args: &ConstructArgs) -> Result<FamilySpec, CliError> {
    let family: Family = args.family.parse().map_err(|e: QkaError| CliError::Usage(e.to_string()))?;
    let n = args.n;
    let sign = parse_sign(&args.sign)?;
    let t = &args.triple;
    // single-angle families also accept the full triple
    let angle = |index: usize| -> Result<f64, CliError> {
        match t.cosines().map(|c| c.len()) {
            Some(3) => Ok(t.triple()?.phi(index)),
            _ => t.single(),
        }
    };
    Ok(match family {
        Family::TotallyReal => FamilySpec::TotallyReal { k: blocks(args, 1)?, n },
        Family::TotallyComplex => FamilySpec::TotallyComplex { l: blocks(args, 2)?, n },
        Family::Quaternionic => FamilySpec::Quaternionic { l: blocks(args, 4)?, n },
        Family::ImHLine => FamilySpec::ImHLine { n },
        Family::CkaPlaneSum => FamilySpec::CkaPlaneSum { phi: angle(0)?, l: blocks(args, 2)?, n },
        Family::ComplexifiedCka => FamilySpec::ComplexifiedCka { phi: angle(1)?, l: blocks(args, 4)?, n },
        Family::V3 => FamilySpec::V3 { phi: angle(0)?, sign, n },
        Family::V4 => FamilySpec::V4 { angles: t.triple()?, sign, n },
        Family::SumType => FamilySpec::Sum { angles: t.triple()?, l_plus: args.lplus, l_minus: args.lminus, n },
    })
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    match writeln!(std::io::stdout(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Internal(e.to_string())),
        _ => Ok(()),
    }
}

fn cmd_construct(args: &ConstructArgs) -> Result<(), CliError> {
    let spec = spec_of(args)?;
    let mut v = catalog::construct(&spec)?;
    if let Some(seed) = args.seed {
        v = v.transformed(&GroupElement::random(v.n(), seed))?;
    }
    let declared = spec.declared_triple()?;
    let rep = constancy_check(&v, 500, args.seed.unwrap_or(0), SPREAD_TOL);
    if !rep.constant || rep.triple.cos_deviation(&declared) > 1e-8 {
        return Err(CliError::Internal(format!(
            "constructed subspace has angle {} (spread {:.3e}), declared {declared}",
            rep.triple, rep.max_spread
        )));
    }
    let branch = match spec {
        FamilySpec::V3 { sign, .. } | FamilySpec::V4 { sign, .. } => Some(sign),
        _ => None,
    };
    let meta = Meta {
        family: Some(spec.family().tag().to_string()),
        cosines: Some(declared.cosines()),
        angles: Some(declared.angles()),
        branch,
        seed: args.seed,
    };
    SubspaceFile::from_subspace(&v, Some(meta.clone())).write(&args.out)?;
    print_json(&json!({
        "path": args.out,
        "n": v.n(),
        "k": v.dim(),
        "triple": TripleRecord::from(&rep.triple),
        "spread": rep.max_spread,
        "meta": meta,
    }))
}

fn cmd_angles(path: &PathBuf, samples: usize, seed: u64) -> Result<(), CliError> {
    let v = SubspaceFile::read(path)?.to_subspace()?;
    if samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let rep = constancy_check(&v, samples, seed, SPREAD_TOL);
    let (_, residual) = joint_canonical_basis(&v, samples.min(64), seed);
    print_json(&json!({
        "n": v.n(),
        "k": v.dim(),
        "triple": TripleRecord::from(&rep.triple),
        "spread": rep.max_spread,
        "constant": rep.constant,
        "samples": rep.samples,
        "joint_residual": residual,
    }))
}

fn cmd_classify(path: &PathBuf) -> Result<(), CliError> {
    let v = SubspaceFile::read(path)?.to_subspace()?;
    print_json(&classify_subspace(&v))
}

fn cmd_moduli(k: usize, n: usize, triple: &TripleArgs) -> Result<(), CliError> {
    if triple.is_set() {
        let t = triple.triple()?;
        let strata = moduli_membership(k, n, &t)?;
        print_json(&json!({ "k": k, "n": n, "triple": TripleRecord::from(&t), "strata": strata }))
    } else {
        print_json(&moduli_describe(k, n)?)
    }
}

fn cmd_selftest(full: bool, seed: u64) -> Result<(), CliError> {
    let mode = if full { Mode::Full } else { Mode::Quick };
    let report = selftest::run(mode, seed);
    print!("{}", report.table());
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Internal("self-test failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Construct(args) => cmd_construct(args),
        Command::Angles { path, samples, seed } => cmd_angles(path, *samples, *seed),
        Command::Classify { path } => cmd_classify(path),
        Command::Moduli { k, n, triple } => cmd_moduli(*k, *n, triple),
        Command::Selftest { quick: _, full, seed } => cmd_selftest(*full, *seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
