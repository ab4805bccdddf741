use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("field order {p}^{k} exceeds the size bound {bound}")]
    SizeExceeded { p: u64, k: u32, bound: u64 },
    #[error("zero has no multiplicative order")]
    ZeroElement,
    #[error("no element of order {order} in a field of order {q}")]
    NoSuchOrder { order: u64, q: u64 },
    #[error("group of order {order} exceeds the enumeration budget {budget}")]
    BudgetExceeded { order: u128, budget: usize },
    #[error("r = {r} does not divide gcd(n, q - 1) = {d}")]
    InvalidR { r: u64, d: u64 },
    #[error("operation requires a module labelled {expected}, got {actual}")]
    WrongLabel {
        expected: &'static str,
        actual: &'static str,
    },
    #[error("subspace is not invariant under generator {generator}")]
    NotInvariant { generator: usize },
    #[error("element is not a nontrivial central kernel element: {0}")]
    NotCentralKernel(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("witness check failed: {0}")]
    WitnessCheckFailed(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
