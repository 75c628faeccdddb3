use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("duplicate interpolation node {value} at positions {first} and {second}")]
    DuplicateNode {
        value: f64,
        first: usize,
        second: usize,
    },

    #[error("index {index:?} out of range for orders {orders:?}")]
    IndexOutOfRange {
        index: Vec<usize>,
        orders: Vec<usize>,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("kernel value {value} at node pair ({i}, {j}) is not finite")]
    NonFiniteKernel { i: usize, j: usize, value: f64 },

    #[error("non-finite {what} at spatial node {node}")]
    NonFinite { what: &'static str, node: usize },

    #[error("point {x} lies outside the domain [{a}, {b}]")]
    OutsideDomain { x: f64, a: f64, b: f64 },

    #[error("fields live on different spatial discretizations")]
    DiscretizationMismatch,

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("maximum number of steps ({max_steps}) exceeded at t = {t}")]
    MaxSteps { max_steps: usize, t: f64 },

    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("collocation node {node} (y = {y:?}): {source}")]
    NodeSolve {
        node: usize,
        y: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("Monte Carlo sample {sample} (y = {y:?}): {source}")]
    SampleSolve {
        sample: usize,
        y: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("eigenvalue iteration did not converge: {0}")]
    EigenNonConvergence(String),
}
