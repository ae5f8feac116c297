//! Support-enumeration solver for 2×2 bimatrix games.

use crate::bimatrix::{Bimatrix, MixedAttackStrategy};
use crate::error::{GameError, Result};

fn is_pure_equilibrium(game: &Bimatrix, i: usize, j: usize) -> bool {
    game.row[i][j] >= game.row[1 - i][j] && game.col[i][j] >= game.col[i][1 - j]
}

/// Row mixing that leaves the column player indifferent, if one exists in [0, 1].
fn indifference_for_col(game: &Bimatrix) -> Option<f64> {
    let c = &game.col;
    let denom = c[0][0] - c[0][1] - c[1][0] + c[1][1];
    interior_root(c[1][1] - c[1][0], denom)
}

/// Column mixing that leaves the row player indifferent, if one exists in [0, 1].
fn indifference_for_row(game: &Bimatrix) -> Option<f64> {
    let r = &game.row;
    let denom = r[0][0] - r[0][1] - r[1][0] + r[1][1];
    interior_root(r[1][1] - r[0][1], denom)
}

fn interior_root(num: f64, denom: f64) -> Option<f64> {
    if denom == 0.0 {
        return None;
    }
    let x = num / denom;
    (0.0..=1.0).contains(&x).then_some(x)
}

/// For a fixed opponent mixture `x` the advantage of one pure action over the
/// other is `b + (a - b) x` with `a` its value at `x = 1` and `b` at `x = 0`.
/// Returns a mixture in (0, 1) where that advantage is non-negative.
fn supporting_mixture(a: f64, b: f64) -> Option<f64> {
    match (a >= 0.0, b >= 0.0) {
        (true, true) => Some(0.5),
        (false, false) => None,
        _ => {
            let root = b / (b - a);
            let x = if a > 0.0 {
                (root + 1.0) / 2.0
            } else {
                root / 2.0
            };
            (x > 0.0 && x < 1.0).then_some(x)
        }
    }
}

/// Finds a Nash equilibrium of a 2×2 bimatrix game by support enumeration.
///
/// Supports are tried in the order mixed×mixed, pure×pure, pure×mixed. The
/// first hit is returned, so a game with a completely mixed equilibrium always
/// reports it, including the limiting case where the indifference solution
/// sits on the simplex boundary.
pub fn solve_2x2_mixed(game: &Bimatrix) -> Result<MixedAttackStrategy> {
    if game
        .row
        .iter()
        .chain(game.col.iter())
        .flatten()
        .any(|v| !v.is_finite())
    {
        return Err(GameError::Unsolvable("non-finite payoff".into()));
    }

    if let (Some(lambda1), Some(lambda2)) = (indifference_for_col(game), indifference_for_row(game))
    {
        return Ok(MixedAttackStrategy { lambda1, lambda2 });
    }

    for i in 0..2 {
        for j in 0..2 {
            if is_pure_equilibrium(game, i, j) {
                return Ok(MixedAttackStrategy::pure(i, j));
            }
        }
    }

    // Row pure, column mixing: column must be indifferent along row i, and
    // row i must stay a best response to the column mixture.
    for i in 0..2 {
        if game.col[i][0] == game.col[i][1] {
            let a = game.row[i][0] - game.row[1 - i][0];
            let b = game.row[i][1] - game.row[1 - i][1];
            if let Some(lambda2) = supporting_mixture(a, b) {
                return Ok(MixedAttackStrategy {
                    lambda1: if i == 0 { 1.0 } else { 0.0 },
                    lambda2,
                });
            }
        }
    }
    for j in 0..2 {
        if game.row[0][j] == game.row[1][j] {
            let a = game.col[0][j] - game.col[0][1 - j];
            let b = game.col[1][j] - game.col[1][1 - j];
            if let Some(lambda1) = supporting_mixture(a, b) {
                return Ok(MixedAttackStrategy {
                    lambda1,
                    lambda2: if j == 0 { 1.0 } else { 0.0 },
                });
            }
        }
    }

    Err(GameError::Unsolvable(format!("{game:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_nash(game: &Bimatrix, s: &MixedAttackStrategy) {
        let (u_row, u_col) = game.expected(s);
        let r = game.row_action_values(s.lambda2);
        let c = game.col_action_values(s.lambda1);
        assert!(r.iter().all(|&v| v <= u_row + 1e-12), "{game:?} {s:?}");
        assert!(c.iter().all(|&v| v <= u_col + 1e-12), "{game:?} {s:?}");
    }

    #[test]
    fn matching_pennies() {
        let g = Bimatrix::from_pairs([[(1.0, -1.0), (-1.0, 1.0)], [(-1.0, 1.0), (1.0, -1.0)]]);
        let s = solve_2x2_mixed(&g).unwrap();
        assert_eq!((s.lambda1, s.lambda2), (0.5, 0.5));
    }

    #[test]
    fn prisoners_dilemma_is_pure() {
        // Action 0 = cooperate.
        let g = Bimatrix::from_pairs([[(2.0, 2.0), (0.0, 3.0)], [(3.0, 0.0), (1.0, 1.0)]]);
        let s = solve_2x2_mixed(&g).unwrap();
        assert_eq!(s, MixedAttackStrategy::pure(1, 1));
    }

    #[test]
    fn battle_of_sexes_prefers_mixed() {
        let g = Bimatrix::from_pairs([[(2.0, 1.0), (0.0, 0.0)], [(0.0, 0.0), (1.0, 2.0)]]);
        let s = solve_2x2_mixed(&g).unwrap();
        assert!((s.lambda1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.lambda2 - 1.0 / 3.0).abs() < 1e-15);
        assert_nash(&g, &s);
    }

    #[test]
    fn pure_by_mixed_support() {
        // Column is indifferent along row 1; row 1 is a best response only
        // while column plays action 0 with probability at most 1/2.
        let g = Bimatrix::from_pairs([[(0.0, 5.0), (2.0, 0.0)], [(1.0, 3.0), (1.0, 3.0)]]);
        let s = solve_2x2_mixed(&g).unwrap();
        assert_nash(&g, &s);
    }

    #[test]
    fn constant_game_has_equilibrium() {
        let g = Bimatrix::from_pairs([[(1.0, 1.0); 2]; 2]);
        assert_nash(&g, &solve_2x2_mixed(&g).unwrap());
    }

    #[test]
    fn non_finite_rejected() {
        let g = Bimatrix::from_pairs([[(f64::NAN, 0.0), (0.0, 0.0)], [(0.0, 0.0), (0.0, 0.0)]]);
        assert!(matches!(solve_2x2_mixed(&g), Err(GameError::Unsolvable(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn solver_output_is_an_equilibrium(cells in proptest::array::uniform4(
                (-4i32..=4, -4i32..=4))) {
                let c = cells.map(|(a, b)| (a as f64, b as f64));
                let g = Bimatrix::from_pairs([[c[0], c[1]], [c[2], c[3]]]);
                let s = solve_2x2_mixed(&g).unwrap();
                prop_assert!((0.0..=1.0).contains(&s.lambda1));
                prop_assert!((0.0..=1.0).contains(&s.lambda2));
                assert_nash(&g, &s);
            }
        }
    }
}
