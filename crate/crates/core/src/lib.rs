//! Analytic equilibria, a brute-force oracle and a seeded Monte Carlo
//! simulator for a two-firm crowdsourcing competition in which either firm
//! may attack the other's crowdsourced solution.

pub mod bimatrix;
pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod oracle;

pub use error::{GameError, Result};
