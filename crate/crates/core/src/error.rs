use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error("invalid genome: {0}")]
    Genome(String),
    #[error("invalid spike train: {0}")]
    SpikeTrain(String),
    #[error("spike arriving at step {arrival} falls outside the {window}-step window")]
    WindowOverflow { arrival: u32, window: u32 },
    #[error("spike trains have different windows ({left} vs {right})")]
    WindowMismatch { left: u32, right: u32 },
    #[error("expected {expected} input trains, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("invalid task: {0}")]
    Task(String),
    #[error("invalid evolution config: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("empty population")]
    EmptyPopulation,
}
