use thiserror::Error;

/// Errors raised by the game engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("productivities ({p1}, {p2}) are inconsistent with first-stage profile {profile}")]
    InconsistentProductivities { profile: String, p1: f64, p2: f64 },

    #[error("contested subgame requires distinct productivities, got p1 = p2 = {0}")]
    ProductivityTie(f64),

    #[error("bimatrix has no pure or mixed equilibrium: {0}")]
    Unsolvable(String),

    #[error("unknown policy {name:?}; available: {available}")]
    UnknownPolicy { name: String, available: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, GameError>;

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(GameError::OutOfRange { name, value })
    }
}
