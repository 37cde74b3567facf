use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid code parameters: d = {d}, L = {l} (need d >= 2, L >= 2)")]
    InvalidCode { d: u32, l: usize },
    #[error("error probability {p} outside [0, {max})")]
    Probability { p: f64, max: f64 },
    #[error("chain has a non-empty syndrome ({0} defects); logical class undefined")]
    NonEmptySyndrome(usize),
    #[error("bundle of length {len} does not fit on L = {l}")]
    BundleTooLarge { len: usize, l: usize },
    #[error("odd vertex count {0}: no perfect matching")]
    OddVertexCount(usize),
    #[error("graph has no perfect matching")]
    NoPerfectMatching,
    #[error("decoder made no progress with {0} active clusters")]
    NoProgress(usize),
    #[error("odd number of Lambda clusters ({0}) after Phi stage")]
    OddLambda(usize),
    #[error("threshold curves for L = {a} and L = {b} do not cross")]
    NoCrossing { a: usize, b: usize },
    #[error("{0}")]
    Config(String),
    #[error("trial {trial} (seed {seed}): {msg}")]
    Trial { trial: u64, seed: u64, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
