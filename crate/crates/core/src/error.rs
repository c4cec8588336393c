use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("insufficient resolution: tail {tail:.3e} exceeds {tol:.1e} at degree {degree}")]
    InsufficientResolution { degree: usize, tail: f64, tol: f64 },
    #[error("domain escape at {at:?}")]
    DomainEscape { at: Vec<f64> },
    #[error("derivative vanishes at x = {0}")]
    CriticalPoint(f64),
    #[error("interval touches the boundary of its container")]
    DegenerateGap,
    #[error("singular derivative at {0:?}")]
    SingularDerivative([f64; 2]),
    #[error("invalid unimodal map: {0}")]
    InvalidMap(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("ambiguous renormalisation cycle, candidates {0:?}")]
    AmbiguousCycle(Vec<f64>),
    #[error("map is not renormalisable with the given combinatorics")]
    NotRenormalisable,
    #[error("no orientation of the rescaling lands in U")]
    NotRenormalisableInU,
    #[error("branch inversion failed on {0}")]
    BranchSingular(String),
    #[error("iteration did not converge; residuals {0:?}")]
    NoConvergence(Vec<f64>),
    #[error("renormalisation failed at depth {0}")]
    DepthUnreachable(usize),
    #[error("Newton failed after {iterations} steps, residual {residual:.3e}")]
    NewtonFailed { iterations: usize, residual: f64, last: Vec<f64> },
    #[error("power iteration stagnated")]
    SpectrumFailed,
    #[error("need at least 3 usable stages, got {0}")]
    InsufficientData(usize),
    #[error("invalid thickening: {0}")]
    InvalidThickening(String),
    #[error("horizontal inverse near the critical locus at y = {0}")]
    NearCriticalLocus(f64),
    #[error("no diagonal fixed point")]
    NoDiagonalFixedPoint,
    #[error("central box not invariant, excursion {0:.3e}")]
    NotInvariant(f64),
    #[error("critical locus within {0:.3e} of the central box")]
    CriticalLocusProximity(f64),
    #[error("no sign pattern of the rescaling gives a Henon-like map")]
    OrientationFailure,
    #[error("parametrisation failure: eps(x,0) = {0:.3e}")]
    ParametrisationFailure(f64),
    #[error("tower stage {stage}: {source}")]
    Stage { stage: usize, source: Box<Error> },
    #[error("pieces {0} and {1} overlap")]
    PiecesOverlap(String, String),
    #[error("tip iteration diverged")]
    TipDiverged,
    #[error("derivative of the scope map is not triangular: {0:.3e}")]
    StructureViolation(f64),
    #[error("kappa fit unresolved")]
    KappaUnresolved,
    #[error("projective singularity at {0:?}")]
    ProjectiveSingularity([f64; 2]),
    #[error("average Jacobians too close: bound {0:.4}")]
    InsufficientContrast(f64),
    #[error("degenerate map (b = 0)")]
    Degenerate,
    #[error("cylinder structure violated: {0}")]
    CylinderViolation(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable tag, used in result documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InsufficientResolution { .. } => "insufficient-resolution",
            Error::DomainEscape { .. } => "domain-escape",
            Error::CriticalPoint(_) => "critical-point",
            Error::DegenerateGap => "degenerate-gap",
            Error::SingularDerivative(_) => "singular-derivative",
            Error::InvalidMap(_) => "invalid-map",
            Error::InvalidPermutation(_) => "bad-input",
            Error::AmbiguousCycle(_) => "ambiguous-cycle",
            Error::NotRenormalisable => "not-renormalisable",
            Error::NotRenormalisableInU => "not-renormalisable-in-U",
            Error::BranchSingular(_) => "branch-singular",
            Error::NoConvergence(_) => "no-convergence",
            Error::DepthUnreachable(_) => "depth-unreachable",
            Error::NewtonFailed { .. } => "newton-failed",
            Error::SpectrumFailed => "spectrum-failed",
            Error::InsufficientData(_) => "insufficient-data",
            Error::InvalidThickening(_) => "invalid-thickening",
            Error::NearCriticalLocus(_) => "near-critical-locus",
            Error::NoDiagonalFixedPoint => "no-diagonal-fixed-point",
            Error::NotInvariant(_) => "not-invariant",
            Error::CriticalLocusProximity(_) => "critical-locus-proximity",
            Error::OrientationFailure => "orientation-failure",
            Error::ParametrisationFailure(_) => "parametrisation-failure",
            Error::Stage { source, .. } => source.kind(),
            Error::PiecesOverlap(..) => "pieces-overlap",
            Error::TipDiverged => "tip-diverged",
            Error::StructureViolation(_) => "structure-violation",
            Error::KappaUnresolved => "kappa-unresolved",
            Error::ProjectiveSingularity(_) => "projective-singularity",
            Error::InsufficientContrast(_) => "insufficient-contrast",
            Error::Degenerate => "degenerate",
            Error::BadInput(_) => "bad-input",
            Error::CylinderViolation(_) => "cylinder-violation",
            Error::Io(_) => "io",
        }
    }

    pub fn at_stage(self, stage: usize) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }
}
