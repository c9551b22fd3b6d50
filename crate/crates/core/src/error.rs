use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right} qubits")]
    Dimension { left: usize, right: usize },
    #[error("invalid Pauli string character {0:?}")]
    PauliParse(char),
    #[error("invalid code distance {0}: must be at least 2")]
    InvalidDistance(usize),
    #[error("invalid fault rate {0}: must lie in [0, 1)")]
    InvalidRate(f64),
    #[error("fault rate {p} makes edge probability {coefficient}·p reach 1 (p_max = {p_max})")]
    RateTooLarge { p: f64, coefficient: String, p_max: f64 },
    #[error("fault rate p = 0 gives infinite edge weights")]
    DegenerateWeight,
    #[error("invalid fault location: {0}")]
    InvalidFault(String),
    #[error("single fault {fault} produced {count} detection events on one lattice")]
    TooManyEvents { fault: String, count: usize },
    #[error("edge ({0}, {1}) matches no matching type")]
    Classification(usize, usize),
    #[error("node {0} cannot reach {1}")]
    Unreachable(usize, usize),
    #[error("brute-force matching supports at most {max} events, got {got}")]
    TooManyForBruteForce { max: usize, got: usize },
    #[error("correction weight increased from {from} to {to} at step {step}")]
    Monotonicity { step: String, from: usize, to: usize },
    #[error("rank-deficient fit: rank {rank} < {params} (singular values {singular_values:?})")]
    RankDeficient { rank: usize, params: usize, singular_values: Vec<f64> },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
