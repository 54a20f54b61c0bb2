use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("valuation of zero")]
    ValuationOfZero,
    #[error("zero input to {0}")]
    ZeroInput(&'static str),
    #[error("{0} is not prime")]
    NotPrime(String),
    #[error("Hensel criterion not met")]
    HenselCriterion,
    #[error("modulus not irreducible")]
    ModulusReducible,
    #[error("rank deficient")]
    RankDeficient,
    #[error("clear denominators first")]
    NonIntegral,
    #[error("bad reduction at {0}")]
    BadReduction(String),
    #[error("no tangent generator; use local analysis only")]
    NoTangentGenerator,
    #[error("evaluation point on branch locus; perturb within U(F_v)")]
    BranchLocus,
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("search bound {0} exceeded")]
    SearchBound(u64),
    #[error("theorem hypothesis unmet: {0}")]
    HypothesisUnmet(String),
    #[error("incomplete adelic data: {0}")]
    IncompleteAdelicData(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Whether the error reflects unmet mathematical hypotheses rather than
    /// malformed input.
    pub fn is_hypothesis_error(&self) -> bool {
        !matches!(self, Error::Parse(_) | Error::NotPrime(_) | Error::InvalidInput(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
