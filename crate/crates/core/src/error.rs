use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("lateral evasion has no real solution (py0={py0}, vy0={vy0})")]
    NoLateralSolution { py0: f64, vy0: f64 },

    #[error("model shape mismatch: {0}")]
    Shape(&'static str),

    #[error("training diverged: loss is {loss} at epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize, loss: f64 },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("episode state became non-finite at t={t}")]
    EpisodeDiverged { t: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
