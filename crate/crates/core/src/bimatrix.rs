//! Two-player 2×2 bimatrix games and mixed strategy profiles.

use serde::Serialize;

use crate::error::{GameError, Result};

/// Payoffs for a 2×2 game. `row[i][j]` and `col[i][j]` are the row and column
/// players' utilities when row plays action `i` and column plays action `j`.
/// Action 0 is "attack" when the matrix describes a second-stage subgame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bimatrix {
    pub row: [[f64; 2]; 2],
    pub col: [[f64; 2]; 2],
}

/// Probability that each player chooses action 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MixedAttackStrategy {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl MixedAttackStrategy {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        for (name, v) in [("lambda1", lambda1), ("lambda2", lambda2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(GameError::OutOfRange { name, value: v });
            }
        }
        Ok(Self { lambda1, lambda2 })
    }

    pub const fn pure(row: usize, col: usize) -> Self {
        Self {
            lambda1: if row == 0 { 1.0 } else { 0.0 },
            lambda2: if col == 0 { 1.0 } else { 0.0 },
        }
    }

    pub fn is_pure(&self) -> bool {
        [self.lambda1, self.lambda2]
            .iter()
            .all(|&l| l == 0.0 || l == 1.0)
    }
}

impl Bimatrix {
    pub fn new(row: [[f64; 2]; 2], col: [[f64; 2]; 2]) -> Self {
        Self { row, col }
    }

    /// Builds the matrix from `(row, col)` payoff pairs laid out row-major.
    pub fn from_pairs(cells: [[(f64, f64); 2]; 2]) -> Self {
        let mut row = [[0.0; 2]; 2];
        let mut col = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                row[i][j] = cells[i][j].0;
                col[i][j] = cells[i][j].1;
            }
        }
        Self { row, col }
    }

    pub fn entry(&self, i: usize, j: usize) -> (f64, f64) {
        (self.row[i][j], self.col[i][j])
    }

    /// Row player's expected payoff for each pure action against column mixing `lambda2`.
    pub fn row_action_values(&self, lambda2: f64) -> [f64; 2] {
        [0, 1].map(|i| lambda2 * self.row[i][0] + (1.0 - lambda2) * self.row[i][1])
    }

    /// Column player's expected payoff for each pure action against row mixing `lambda1`.
    pub fn col_action_values(&self, lambda1: f64) -> [f64; 2] {
        [0, 1].map(|j| lambda1 * self.col[0][j] + (1.0 - lambda1) * self.col[1][j])
    }

    /// Expected `(row, col)` payoffs under a product mixture.
    pub fn expected(&self, s: &MixedAttackStrategy) -> (f64, f64) {
        let r = self.row_action_values(s.lambda2);
        let c = self.col_action_values(s.lambda1);
        (
            s.lambda1 * r[0] + (1.0 - s.lambda1) * r[1],
            s.lambda2 * c[0] + (1.0 - s.lambda2) * c[1],
        )
    }
}
