//! Brute-force and numerical reference computations.
//!
//! Nothing here calls into [`crate::equilibrium`]: probabilities come from
//! grid quadrature or exact polygon areas, and every utility is obtained by
//! playing the game through [`resolve_outcome`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bimatrix::{Bimatrix, MixedAttackStrategy};
use crate::model::{
    resolve_outcome, AttackAction, AttackProfile, FirstStageAction, FirstStageProfile, GameParams,
    Player, ProductivityPair,
};

/// Deviation tolerance for exact-arithmetic best-response checks.
pub const BEST_RESPONSE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub quantity_name: String,
    pub closed_form: f64,
    pub oracle_value: f64,
    pub abs_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl VerificationReport {
    pub fn compare(
        quantity_name: impl Into<String>,
        closed_form: f64,
        oracle_value: f64,
        tolerance: f64,
    ) -> Self {
        let abs_error = (closed_form - oracle_value).abs();
        Self {
            quantity_name: quantity_name.into(),
            closed_form,
            oracle_value,
            abs_error,
            tolerance,
            // NaN never passes.
            passed: abs_error <= tolerance,
        }
    }
}

/// Midpoint-rule integral of `indicator` over [0,1]² on a `resolution²` grid.
/// Hits are counted as integers, so the result is independent of thread scheduling.
fn midpoint_indicator(resolution: usize, indicator: impl Fn(f64, f64) -> bool + Sync) -> f64 {
    assert!(
        resolution >= 100,
        "quadrature resolution must be at least 100, got {resolution}"
    );
    let h = 1.0 / resolution as f64;
    let hits: u64 = (0..resolution)
        .into_par_iter()
        .map(|i| {
            let p1 = (i as f64 + 0.5) * h;
            (0..resolution)
                .filter(|&j| indicator(p1, (j as f64 + 0.5) * h))
                .count() as u64
        })
        .sum();
    hits as f64 / (resolution * resolution) as f64
}

/// Pr(P2 < P1 < P2 + d) by midpoint quadrature. The indicator is
/// discontinuous along two lines, so the error is O(1/resolution).
pub fn quadrature_overlap(d: f64, resolution: usize) -> f64 {
    midpoint_indicator(resolution, |p1, p2| p2 < p1 && p1 < p2 + d)
}

/// Pr(P2 + d < P1) by midpoint quadrature.
pub fn quadrature_lead(d: f64, resolution: usize) -> f64 {
    midpoint_indicator(resolution, |p1, p2| p2 + d < p1)
}

/// Checks a candidate strategy profile against every pure action and
/// `grid`-many evenly spaced mixtures for each player.
///
/// `closed_form` is the deviating player's candidate utility, `oracle_value`
/// the best deviation found and `abs_error` the largest improvement (zero
/// when no deviation helps).
pub fn best_response_check_2x2(
    game: &Bimatrix,
    strategy: &MixedAttackStrategy,
    grid: usize,
) -> VerificationReport {
    let (u_row, u_col) = game.expected(strategy);
    let mut mixtures: Vec<f64> = vec![0.0, 1.0];
    if grid >= 2 {
        mixtures.extend((0..grid).map(|k| k as f64 / (grid - 1) as f64));
    }

    let mut worst = (0.0_f64, u_row, u_row);
    for &x in &mixtures {
        let row_dev = game
            .expected(&MixedAttackStrategy {
                lambda1: x,
                lambda2: strategy.lambda2,
            })
            .0;
        if row_dev - u_row > worst.0 {
            worst = (row_dev - u_row, u_row, row_dev);
        }
        let col_dev = game
            .expected(&MixedAttackStrategy {
                lambda1: strategy.lambda1,
                lambda2: x,
            })
            .1;
        if col_dev - u_col > worst.0 {
            worst = (col_dev - u_col, u_col, col_dev);
        }
    }
    let (gain, current, best) = worst;
    VerificationReport {
        quantity_name: format!(
            "best_response({:.6}, {:.6})",
            strategy.lambda1, strategy.lambda2
        ),
        closed_form: current,
        oracle_value: best,
        abs_error: gain,
        tolerance: BEST_RESPONSE_TOLERANCE,
        passed: gain <= BEST_RESPONSE_TOLERANCE,
    }
}

type Point = (f64, f64);

/// Clips a convex polygon to the half-plane `a*x + b*y <= c`.
fn clip(poly: &[Point], (a, b, c): (f64, f64, f64)) -> Vec<Point> {
    let inside = |p: Point| a * p.0 + b * p.1 <= c;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for (k, &cur) in poly.iter().enumerate() {
        let prev = poly[(k + poly.len() - 1) % poly.len()];
        let (ci, pi) = (inside(cur), inside(prev));
        if ci != pi {
            let fp = a * prev.0 + b * prev.1 - c;
            let fc = a * cur.0 + b * cur.1 - c;
            let t = fp / (fp - fc);
            out.push((prev.0 + t * (cur.0 - prev.0), prev.1 + t * (cur.1 - prev.1)));
        }
        if ci {
            out.push(cur);
        }
    }
    out
}

fn shoelace(poly: &[Point]) -> f64 {
    let n = poly.len();
    let twice: f64 = (0..n)
        .map(|k| {
            let (x0, y0) = poly[k];
            let (x1, y1) = poly[(k + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum();
    twice.abs() / 2.0
}

/// Exact area of `{(p1, p2) in [0,1]^2 : lo <= p1 - p2 <= hi}`.
fn gap_band_area(lo: f64, hi: f64) -> f64 {
    let square = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
    let poly = clip(&square, (-1.0, 1.0, -lo)); // p1 - p2 >= lo
    let poly = clip(&poly, (1.0, -1.0, hi)); // p1 - p2 <= hi
    if poly.len() < 3 {
        0.0
    } else {
        shoelace(&poly)
    }
}

/// Pr(P2 < P1 < P2 + d) as an exact polygon area.
pub fn geometric_overlap(d: f64) -> f64 {
    gap_band_area(0.0, d)
}

/// Pr(P2 + d < P1) as an exact polygon area.
pub fn geometric_lead(d: f64) -> f64 {
    gap_band_area(d, 1.0)
}

fn play(
    profile: FirstStageProfile,
    p1: f64,
    p2: f64,
    b1: AttackAction,
    b2: AttackAction,
    params: &GameParams,
) -> (f64, f64) {
    // Representative points never tie when their region has positive measure;
    // when they do tie the region's weight is zero.
    let mut coin = ChaCha8Rng::seed_from_u64(0);
    let o = resolve_outcome(
        profile,
        ProductivityPair::new(p1, p2),
        AttackProfile::new(b1, b2),
        params,
        &mut coin,
    )
    .expect("representative productivities are consistent with their profile");
    (o.u1, o.u2)
}

/// Ex-ante payoffs `[(u1, u2); 4]` in CC, CS, SC, SS order, assembled from
/// region probabilities and simulated plays of representative states.
///
/// The contested region uses the strong player's attack payoff and the weak
/// player's no-attack payoff: in a completely mixed equilibrium each player
/// earns the value of any action in its support.
pub fn brute_force_payoffs(params: &GameParams) -> [(f64, f64); 4] {
    use AttackAction::{Attack as A, NoAttack as N};
    let d = params.d();
    let cc_profile = FirstStageProfile::CC;

    // CC, from player 1's side; player 2 is symmetric.
    let (lo, hi) = (0.5 - d / 4.0, 0.5 + d / 4.0);
    let strong_contested = play(cc_profile, hi, lo, A, N, params).0;
    let weak_contested = play(cc_profile, hi, lo, A, N, params).1;
    let leader = play(cc_profile, 1.0, 0.0, N, N, params).0;
    let trailer = play(cc_profile, 1.0, 0.0, N, N, params).1;
    let overlap = geometric_overlap(d);
    let lead = geometric_lead(d);
    let cc = overlap * strong_contested + lead * leader + overlap * weak_contested + lead * trailer;

    // CS: the in-house firm attacks whenever that does not lower its payoff.
    let cs_profile = FirstStageProfile::CS;
    let reachable = |p: f64| {
        let (_, attack) = play(cs_profile, p, 0.0, N, A, params);
        let (_, quiet) = play(cs_profile, p, 0.0, N, N, params);
        if attack >= quiet {
            play(cs_profile, p, 0.0, N, A, params)
        } else {
            play(cs_profile, p, 0.0, N, N, params)
        }
    };
    let below = reachable(d / 2.0);
    let above = reachable((1.0 + d) / 2.0);
    let cs = (
        d * below.0 + (1.0 - d) * above.0,
        d * below.1 + (1.0 - d) * above.1,
    );

    [(cc, cc), cs, (cs.1, cs.0), (0.5, 0.5)]
}

/// Enumerates all four profiles and both unilateral deviations of each on the
/// brute-force payoff table; returns the profiles no deviation strictly improves.
pub fn exhaustive_first_stage_check(params: &GameParams) -> Vec<FirstStageProfile> {
    let table = brute_force_payoffs(params);
    let index = |p: FirstStageProfile| FirstStageProfile::ALL.iter().position(|&x| x == p).unwrap();
    let utility = |p: FirstStageProfile, player: Player| {
        let (u1, u2) = table[index(p)];
        if player == Player::One {
            u1
        } else {
            u2
        }
    };
    let mut stable = Vec::new();
    for profile in FirstStageProfile::ALL {
        let mut holds = true;
        for player in [Player::One, Player::Two] {
            for alt in [FirstStageAction::Crowdsource, FirstStageAction::InHouse] {
                let deviation = profile.with_action(player, alt);
                if deviation != profile && utility(deviation, player) > utility(profile, player) {
                    holds = false;
                }
            }
        }
        if holds {
            stable.push(profile);
        }
    }
    stable
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContestedStatistics {
    pub expected_attacks: f64,
    pub weak_win_probability: f64,
    pub total_utility: f64,
}

/// Exact expectations for a contested subgame in which the strong player
/// attacks with probability `strategy.lambda1` and the weak one with
/// `strategy.lambda2`, by summing over the four attack profiles.
pub fn enumerate_contested_statistics(
    q: f64,
    strategy: &MixedAttackStrategy,
) -> ContestedStatistics {
    let params = GameParams::new(q, 0.5).expect("q in [0, 1]");
    let prods = ProductivityPair::new(0.6, 0.4);
    let mut coin = ChaCha8Rng::seed_from_u64(0);
    let weight = |p: f64, a: AttackAction| if a.is_attack() { p } else { 1.0 - p };

    let mut stats = ContestedStatistics {
        expected_attacks: 0.0,
        weak_win_probability: 0.0,
        total_utility: 0.0,
    };
    for attacks in AttackProfile::ALL {
        let w = weight(strategy.lambda1, attacks.b1) * weight(strategy.lambda2, attacks.b2);
        let o = resolve_outcome(FirstStageProfile::CC, prods, attacks, &params, &mut coin)
            .expect("fixed contested state is valid");
        stats.expected_attacks += w * o.attackers as f64;
        if o.winner == Player::Two {
            stats.weak_win_probability += w;
        }
        stats.total_utility += w * (o.u1 + o.u2);
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contested(q: f64) -> Bimatrix {
        Bimatrix::from_pairs([
            [(1.0 - q, -q), (1.0 - q, 0.0)],
            [(0.0, 1.0 - q), (1.0, 0.0)],
        ])
    }

    #[test]
    fn quadrature_values() {
        assert!((quadrature_overlap(1.0, 2000) - 0.5).abs() < 1e-3);
        assert!((quadrature_overlap(0.4, 2000) - 0.32).abs() < 1e-3);
        assert_eq!(quadrature_overlap(0.0, 100), 0.0);
        assert_eq!(quadrature_overlap(0.0, 317), 0.0);
        assert!((quadrature_lead(0.0, 2000) - 0.5).abs() < 1e-3);
        assert_eq!(quadrature_lead(1.0, 500), 0.0);
        assert!((quadrature_lead(0.4, 2000) - 0.18).abs() < 1e-3);
    }

    #[test]
    #[should_panic(expected = "at least 100")]
    fn coarse_quadrature_rejected() {
        quadrature_lead(0.5, 10);
    }

    #[test]
    fn geometric_areas() {
        assert_eq!(geometric_overlap(0.0), 0.0);
        assert_eq!(geometric_overlap(1.0), 0.5);
        assert_eq!(geometric_lead(1.0), 0.0);
        assert_eq!(geometric_lead(0.0), 0.5);
        // Triangle of legs 0.6: 0.18.
        assert!((geometric_lead(0.4) - 0.18).abs() < 1e-15);
        assert!((geometric_overlap(0.4) - 0.32).abs() < 1e-15);
    }

    #[test]
    fn geometric_matches_quadrature() {
        for k in 0..=20 {
            let d = k as f64 / 20.0;
            assert!((geometric_overlap(d) - quadrature_overlap(d, 1000)).abs() < 2e-3);
            assert!((geometric_lead(d) - quadrature_lead(d, 1000)).abs() < 2e-3);
        }
    }

    #[test]
    fn best_response_on_equilibrium() {
        let r = best_response_check_2x2(
            &contested(0.25),
            &MixedAttackStrategy {
                lambda1: 0.75,
                lambda2: 0.25,
            },
            1001,
        );
        assert!(r.passed, "{r:?}");
        assert!(r.abs_error < 1e-12);
    }

    #[test]
    fn best_response_rejects_wrong_mixture() {
        let r = best_response_check_2x2(
            &contested(0.25),
            &MixedAttackStrategy {
                lambda1: 0.5,
                lambda2: 0.5,
            },
            1001,
        );
        assert!(!r.passed);
        // At lambda = (1/2, 1/2) both players gain 0.125 by switching to attack.
        assert!((r.abs_error - 0.125).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn best_response_on_pure_equilibrium() {
        let pd = Bimatrix::from_pairs([[(2.0, 2.0), (0.0, 3.0)], [(3.0, 0.0), (1.0, 1.0)]]);
        assert!(best_response_check_2x2(&pd, &MixedAttackStrategy::pure(1, 1), 101).passed);
        assert!(!best_response_check_2x2(&pd, &MixedAttackStrategy::pure(0, 0), 101).passed);
    }

    #[test]
    fn first_stage_samples() {
        let check = |q, d| exhaustive_first_stage_check(&GameParams::new(q, d).unwrap());
        assert_eq!(check(0.5, 0.4), vec![FirstStageProfile::CC]);
        assert_eq!(
            check(0.95, 0.8),
            vec![FirstStageProfile::CC, FirstStageProfile::SS]
        );
        assert_eq!(check(0.0, 1.0), vec![FirstStageProfile::SS]);
        assert_eq!(check(0.5, 0.8), vec![FirstStageProfile::SS]);
    }

    #[test]
    fn brute_force_payoffs_sample() {
        let t = brute_force_payoffs(&GameParams::new(0.5, 0.5).unwrap());
        assert!((t[0].0 - 0.3125).abs() < 1e-15);
        assert_eq!(t[1], (0.5, 0.25));
        assert_eq!(t[2], (0.25, 0.5));
    }

    #[test]
    fn contested_statistics_samples() {
        let s = enumerate_contested_statistics(
            0.3,
            &MixedAttackStrategy {
                lambda1: 0.7,
                lambda2: 0.3,
            },
        );
        assert!((s.expected_attacks - 1.0).abs() < 1e-15);
        assert!((s.weak_win_probability - 0.09).abs() < 1e-15);
        assert!((s.total_utility - 0.7).abs() < 1e-15);

        let s = enumerate_contested_statistics(
            0.0,
            &MixedAttackStrategy {
                lambda1: 1.0,
                lambda2: 0.0,
            },
        );
        assert_eq!(
            (s.expected_attacks, s.weak_win_probability, s.total_utility),
            (1.0, 0.0, 1.0)
        );

        let s = enumerate_contested_statistics(
            1.0,
            &MixedAttackStrategy {
                lambda1: 0.0,
                lambda2: 1.0,
            },
        );
        assert_eq!(
            (s.expected_attacks, s.weak_win_probability, s.total_utility),
            (1.0, 1.0, 0.0)
        );
    }

    #[test]
    fn weak_win_increases_with_cost() {
        let rates: Vec<f64> = (1..=100)
            .map(|k| {
                let q = k as f64 / 100.0;
                enumerate_contested_statistics(
                    q,
                    &MixedAttackStrategy {
                        lambda1: 1.0 - q,
                        lambda2: q,
                    },
                )
                .weak_win_probability
            })
            .collect();
        assert!(rates.windows(2).all(|w| w[1] > w[0]));
    }
}
