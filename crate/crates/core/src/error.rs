use crate::exact::Rational;

/// Structured witness for a failed coefficient-level periodicity identity.
///
/// Records the first index at which the two sides of the identity differ,
/// together with the translation data that exposed it.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicityWitness {
    /// Exponent `m` of the offending coefficient.
    pub m: Rational,
    /// Dual-vector coordinates of the offending term.
    pub lam: Vec<Rational>,
    /// Flat index of the component in the target group algebra.
    pub beta: usize,
    /// Coordinates of the translation vector (`sigma` or `nu`) used.
    pub shift: Vec<Rational>,
}

/// Error kinds shared by the whole crate.
///
/// The names double as the machine-readable `kind` field of the CLI's
/// error JSON, so they stay stable.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not symmetric/Hermitian")]
    NotHermitian,
    #[error("complex structure invalid: J^2 != -d or the order does not act integrally")]
    BadComplexStructure,
    #[error("bilinear form incompatible with the complex structure")]
    PairingNotCompatible,
    #[error("Gram matrix is degenerate")]
    DegenerateGram,
    #[error("lattice is not even")]
    NotEven,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("{0} elements exceed the enumeration budget")]
    BudgetExceeded(u64),
    #[error("finite quadratic module data is inconsistent: {0}")]
    InvalidFqm(String),
    #[error("map is not injective")]
    NotInjective,
    #[error("subgroup is not isotropic")]
    NotIsotropic,
    #[error("set is not a valid system of coset representatives")]
    BadRepresentatives,
    #[error("class does not lie in the perpendicular group of H_M")]
    NotInHMperp,
    #[error("quadratic form is degenerate (Gauss sum has wrong modulus)")]
    DegenerateForm,
    #[error("element is not a root of unity of the order")]
    NotRootOfUnity,
    #[error("scalar does not act on the discriminant group")]
    ActionUndefined,
    #[error("matrix does not have determinant 1")]
    BadDeterminant,
    #[error("matrix does not satisfy the unitary relation")]
    NotUnitary,
    #[error("matrix entries are not integral over the maximal order")]
    NotIntegral,
    #[error("word letter requires a Hermitian lattice context")]
    MissingHermitianContext,
    #[error("matrix input refused for odd-signature modules; pass a word instead")]
    OddSignatureMatrixInput,
    #[error("finite quadratic modules do not match")]
    FqmMismatch,
    #[error("coefficients are inconsistent with a theta decomposition at m={m}, lam={lam:?}")]
    InconsistentCoefficients { m: Rational, lam: Vec<Rational> },
    #[error("expansion is not periodic for the requested translations")]
    NotPeriodic(PeriodicityWitness),
    #[error("lift data violates the extension hypotheses")]
    BadLift,
    #[error("matrix is not positive semidefinite")]
    NotSemidefinite,
    #[error("quadratic values of psi do not match the index matrix")]
    QuadraticMismatch,
    #[error("psi does not vanish on the integral kernel of S")]
    KernelNotKilled,
    #[error("target finite quadratic module is degenerate or invalid")]
    DegenerateDelta,
    #[error("quotient lattice of the setting is not even")]
    NotEvenQuotient,
    #[error("kernel module is not provably projective over the order")]
    NotProvablyProjective,
    #[error("no discriminant-form completion matching the hypotheses was verified")]
    HypothesisUnverified,
    #[error("operands live over different orders (d mismatch)")]
    MixedContext,
}

impl Error {
    /// Stable machine-readable kind string (used by the CLI error JSON).
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotHermitian => "NotHermitian",
            Error::BadComplexStructure => "BadComplexStructure",
            Error::PairingNotCompatible => "PairingNotCompatible",
            Error::DegenerateGram => "DegenerateGram",
            Error::NotEven => "NotEven",
            Error::NotPositiveDefinite => "NotPositiveDefinite",
            Error::BudgetExceeded(_) => "BudgetExceeded",
            Error::InvalidFqm(_) => "InvalidFqm",
            Error::NotInjective => "NotInjective",
            Error::NotIsotropic => "NotIsotropic",
            Error::BadRepresentatives => "BadRepresentatives",
            Error::NotInHMperp => "NotInHMperp",
            Error::DegenerateForm => "DegenerateForm",
            Error::NotRootOfUnity => "NotRootOfUnity",
            Error::ActionUndefined => "ActionUndefined",
            Error::BadDeterminant => "BadDeterminant",
            Error::NotUnitary => "NotUnitary",
            Error::NotIntegral => "NotIntegral",
            Error::MissingHermitianContext => "MissingHermitianContext",
            Error::OddSignatureMatrixInput => "OddSignatureMatrixInput",
            Error::FqmMismatch => "FqmMismatch",
            Error::InconsistentCoefficients { .. } => "InconsistentCoefficients",
            Error::NotPeriodic(_) => "NotPeriodic",
            Error::BadLift => "BadLift",
            Error::NotSemidefinite => "NotSemidefinite",
            Error::QuadraticMismatch => "QuadraticMismatch",
            Error::KernelNotKilled => "KernelNotKilled",
            Error::DegenerateDelta => "DegenerateDelta",
            Error::NotEvenQuotient => "NotEvenQuotient",
            Error::NotProvablyProjective => "NotProvablyProjective",
            Error::HypothesisUnverified => "HypothesisUnverified",
            Error::MixedContext => "MixedContext",
        }
    }
}
