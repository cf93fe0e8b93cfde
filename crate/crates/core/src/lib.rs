//! Spectral quantities, compactness certificates and verdicts for bilateral
//! weighted shifts `W e_n = w_n e_{n+1}` on `ℓ²(ℤ)`.
//!
//! All numerics are generic over [`scalar::Real`]; the aliases below fix the
//! scalar to `f64` or `f32`.

pub mod certify;
pub mod lattice;
pub mod scalar;
pub mod spectral;
pub mod verdict;
pub mod weights;

use thiserror::Error;

pub use certify::{CertifyError, CompactnessCertificate, CoveringReport, WitnessOutcome};
pub use lattice::{LatticeError, LatticeVector, ShiftPolynomial};
pub use scalar::Real;
pub use spectral::{Quantity, SpectralError, SpectralProfile};
pub use verdict::{analyze, decide, AnalysisOptions, AnalysisReport, Conclusion, Rule, Subject, Verdict, VerdictError};
pub use weights::{WeightError, WeightRule, WeightSequence};

pub type WeightRuleF64 = WeightRule<f64>;
pub type WeightSequenceF64 = WeightSequence<f64>;
pub type SpectralProfileF64 = SpectralProfile<f64>;
pub type LatticeVectorF64 = LatticeVector<f64>;
pub type ShiftPolynomialF64 = ShiftPolynomial<f64>;
pub type AnalysisReportF64 = AnalysisReport<f64>;
pub type AnalysisOptionsF64 = AnalysisOptions<f64>;

pub type WeightRuleF32 = WeightRule<f32>;
pub type WeightSequenceF32 = WeightSequence<f32>;
pub type SpectralProfileF32 = SpectralProfile<f32>;
pub type LatticeVectorF32 = LatticeVector<f32>;
pub type ShiftPolynomialF32 = ShiftPolynomial<f32>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Verdict(#[from] VerdictError),
}

impl Error {
    /// Whether the caller broke a documented precondition, as opposed to a
    /// component failing on valid input.
    pub fn is_contract_violation(&self) -> bool {
        fn lattice(e: &LatticeError) -> bool {
            matches!(
                e,
                LatticeError::NotInvertible | LatticeError::InvalidTruncation { .. } | LatticeError::InvalidPolynomial(_)
            )
        }
        fn spectral(e: &SpectralError) -> bool {
            matches!(e, SpectralError::InvalidHorizon(_))
        }
        match self {
            Error::Config(_) | Error::Weight(_) => true,
            Error::Spectral(e) => spectral(e),
            Error::Lattice(e) => lattice(e),
            Error::Certify(e) => match e {
                CertifyError::Contract(_) | CertifyError::NotInvertible => true,
                CertifyError::Lattice(e) => lattice(e),
                CertifyError::Spectral(e) => spectral(e),
                _ => false,
            },
            Error::Verdict(_) => false,
        }
    }

    /// `2` for contract violations, `3` for component errors.
    pub fn exit_code(&self) -> i32 {
        if self.is_contract_violation() {
            2
        } else {
            3
        }
    }
}
