use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeomError {
    #[error("Gauss-Newton did not converge: residual {residual:.3e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("constraint Jacobian is rank deficient (smallest/largest singular value {ratio:.3e})")]
    RankDeficient { ratio: f64 },

    #[error("contact Pfaffian requires odd dimension, got {dim}")]
    EvenDimension { dim: usize },

    #[error("form is not contact at the point (|Pf| = {abs_pfaffian:.3e})")]
    DegenerateContact { abs_pfaffian: f64 },

    #[error("not contact at witness {point:?}: |Pf| = {abs_pfaffian:.3e}")]
    NotContact { point: Vec<f64>, abs_pfaffian: f64 },

    #[error("flow left the retraction basin (constraint drift {drift:.3e})")]
    FlowEscape { drift: f64 },

    #[error("form is not invariant: residual {residual:.3e} at {point:?}")]
    NotInvariant {
        group_element: Vec<f64>,
        point: Vec<f64>,
        residual: f64,
    },

    #[error("vectors are not horizontal (|A(u)| = {residual:.3e})")]
    NotHorizontal { residual: f64 },

    #[error("could not extend base vectors to horizontal fields")]
    FrameExtensionFailure,

    #[error("horizontal dimension {dim} is odd; no nondegenerate skew form exists")]
    OddHorizontalDimension { dim: usize },

    #[error("fiber form is not invariant under the structure group action (residual {residual:.3e})")]
    NotInvariantFiberForm { residual: f64 },

    #[error("diagonal action is not free at the point (orbit rank {rank} < {expected})")]
    NonFreePoint { rank: usize, expected: usize },

    #[error("dα is degenerate on the fiber contact hyperplane (min singular value {min_singular:.3e})")]
    DegenerateFiberRestriction { min_singular: f64 },

    #[error("background metric is degenerate on the contact hyperplane")]
    PolarBreakdown,

    #[error("covector lies outside the slice")]
    EtaOutsideSlice,

    #[error("no cross-section points found after {attempts} attempts")]
    NoSolutions { attempts: usize },

    #[error("splitting condition ({condition}) failed: residual {residual:.3e}")]
    SplittingFailure { condition: char, residual: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
