//! Closed-form equilibrium analysis of the crowdsourcing game.
//!
//! Backward induction: every first-stage profile leads to a second-stage
//! attack subgame whose equilibrium is known in closed form; the ex-ante
//! expectations of those subgames form the first-stage payoff table, whose
//! pure equilibria are then classified over the (q, d) square.
//!
//! Note on the CS/SC profiles: comparing the in-house firm's payoff `d(1-q)`
//! with the CC payoff does not by itself rule CS out near `d -> 1, q -> 0`,
//! because there the in-house firm prefers to stay in-house. CS is still never
//! an equilibrium off the single point `(q, d) = (0, 1/2)`, since for
//! `d > 1/2` the crowdsourcing firm gains by switching to in-house
//! (`1/2 > 1 - d`). [`pure_first_stage_equilibria`] checks deviations of both
//! players rather than relying on either argument alone.

mod solver;

use serde::Serialize;

pub use crate::bimatrix::{Bimatrix, MixedAttackStrategy};
pub use solver::solve_2x2_mixed;

use crate::error::{check_unit, GameError, Result};
use crate::model::{FirstStageAction, FirstStageProfile, GameParams, Player, ProductivityPair};

/// Payoffs of the contested subgame, strong player as row, weak player as
/// column, action 0 = attack.
///
/// | strong \ weak | A           | N        |
/// |---------------|-------------|----------|
/// | A             | 1-q, -q     | 1-q, 0   |
/// | N             | 0, 1-q      | 1, 0     |
pub fn contested_payoff_matrix(q: f64) -> Result<Bimatrix> {
    let q = check_unit("q", q)?;
    Ok(Bimatrix::from_pairs([
        [(1.0 - q, -q), (1.0 - q, 0.0)],
        [(0.0, 1.0 - q), (1.0, 0.0)],
    ]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SubgameCase {
    /// Both in-house: nobody attacks, each wins with probability 1/2.
    BothInHouse,
    /// No attack can change the winner.
    NoContest,
    /// Exactly one in-house firm can overtake the crowdsourcer by attacking.
    UnilateralReach,
    /// Both crowdsource and the trailing firm is within reach of the leader.
    Contested,
}

/// Equilibrium of one second-stage subgame. `strategy` is expressed
/// strong-first: `lambda1` is the attack probability of `strong`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecondStageEquilibrium {
    pub case: SubgameCase,
    pub strong: Player,
    pub strategy: MixedAttackStrategy,
    pub u_strong: f64,
    pub u_weak: f64,
}

impl SecondStageEquilibrium {
    pub fn attack_probability(&self, player: Player) -> f64 {
        if player == self.strong {
            self.strategy.lambda1
        } else {
            self.strategy.lambda2
        }
    }

    pub fn utility(&self, player: Player) -> f64 {
        if player == self.strong {
            self.u_strong
        } else {
            self.u_weak
        }
    }
}

/// Equilibrium of the attack subgame reached from `profile` with realized
/// productivities `prods`. Utilities are expected values over any mixing and
/// over the tie coin.
pub fn second_stage_equilibrium(
    profile: FirstStageProfile,
    prods: ProductivityPair,
    params: &GameParams,
) -> Result<SecondStageEquilibrium> {
    prods.validate(profile)?;
    let (q, d) = (params.q(), params.d());
    let none = MixedAttackStrategy::pure(1, 1);

    let (c1, c2) = (
        profile.crowdsources(Player::One),
        profile.crowdsources(Player::Two),
    );
    let eq = match (c1, c2) {
        (false, false) => SecondStageEquilibrium {
            case: SubgameCase::BothInHouse,
            strong: Player::One,
            strategy: none,
            u_strong: 0.5,
            u_weak: 0.5,
        },
        (true, false) | (false, true) => {
            let crowd = if c1 { Player::One } else { Player::Two };
            let p = prods.get(crowd);
            if p < d {
                SecondStageEquilibrium {
                    case: SubgameCase::UnilateralReach,
                    strong: crowd,
                    strategy: MixedAttackStrategy::pure(1, 0),
                    u_strong: 0.0,
                    u_weak: 1.0 - q,
                }
            } else {
                let (u_strong, u_weak) = if p > 0.0 { (1.0, 0.0) } else { (0.5, 0.5) };
                SecondStageEquilibrium {
                    case: SubgameCase::NoContest,
                    strong: crowd,
                    strategy: none,
                    u_strong,
                    u_weak,
                }
            }
        }
        (true, true) => {
            let gap = (prods.p1 - prods.p2).abs();
            let strong = if prods.p1 >= prods.p2 {
                Player::One
            } else {
                Player::Two
            };
            if gap < d {
                if prods.p1 == prods.p2 {
                    return Err(GameError::ProductivityTie(prods.p1));
                }
                SecondStageEquilibrium {
                    case: SubgameCase::Contested,
                    strong,
                    strategy: MixedAttackStrategy {
                        lambda1: 1.0 - q,
                        lambda2: q,
                    },
                    u_strong: 1.0 - q,
                    u_weak: 0.0,
                }
            } else {
                let (u_strong, u_weak) = if gap > 0.0 { (1.0, 0.0) } else { (0.5, 0.5) };
                SecondStageEquilibrium {
                    case: SubgameCase::NoContest,
                    strong,
                    strategy: none,
                    u_strong,
                    u_weak,
                }
            }
        }
    };
    Ok(eq)
}

/// Pr(P2 < P1 < P2 + d) for independent uniforms: `d - d^2/2`.
pub fn overlap_probability(d: f64) -> Result<f64> {
    let d = check_unit("d", d)?;
    Ok(d - d * d / 2.0)
}

/// Pr(P2 + d < P1) for independent uniforms: `d^2/2 - d + 1/2`.
pub fn lead_probability(d: f64) -> Result<f64> {
    let d = check_unit("d", d)?;
    Ok(d * d / 2.0 - d + 0.5)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PayoffPair {
    pub u1: f64,
    pub u2: f64,
}

impl PayoffPair {
    pub fn get(&self, player: Player) -> f64 {
        match player {
            Player::One => self.u1,
            Player::Two => self.u2,
        }
    }
}

/// Ex-ante first-stage payoff matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub struct PayoffTable {
    pub cc: PayoffPair,
    pub cs: PayoffPair,
    pub sc: PayoffPair,
    pub ss: PayoffPair,
}

impl PayoffTable {
    pub fn get(&self, profile: FirstStageProfile) -> PayoffPair {
        use FirstStageAction::{Crowdsource as C, InHouse as S};
        match (profile.a1, profile.a2) {
            (C, C) => self.cc,
            (C, S) => self.cs,
            (S, C) => self.sc,
            (S, S) => self.ss,
        }
    }
}

/// The expected-payoff table of the first stage.
///
/// CC: `1/2 - (d - d^2/2) q` each. CS: `(1 - d, d (1 - q))`. SS: `(1/2, 1/2)`.
pub fn ex_ante_payoffs(params: &GameParams) -> PayoffTable {
    let (q, d) = (params.q(), params.d());
    let cc = 0.5 - (d - d * d / 2.0) * q;
    let crowd = 1.0 - d;
    let closed = d * (1.0 - q);
    PayoffTable {
        cc: PayoffPair { u1: cc, u2: cc },
        cs: PayoffPair {
            u1: crowd,
            u2: closed,
        },
        sc: PayoffPair {
            u1: closed,
            u2: crowd,
        },
        ss: PayoffPair { u1: 0.5, u2: 0.5 },
    }
}

/// Profiles of `table` from which no player gains strictly by a unilateral
/// switch. Returned in CC, CS, SC, SS order.
pub fn stable_profiles(table: &PayoffTable) -> Vec<FirstStageProfile> {
    FirstStageProfile::ALL
        .into_iter()
        .filter(|&profile| {
            [Player::One, Player::Two].into_iter().all(|player| {
                let current = table.get(profile).get(player);
                let flipped = match profile.action(player) {
                    FirstStageAction::Crowdsource => FirstStageAction::InHouse,
                    FirstStageAction::InHouse => FirstStageAction::Crowdsource,
                };
                table.get(profile.with_action(player, flipped)).get(player) <= current
            })
        })
        .collect()
}

/// Pure first-stage equilibria, found by best-response checks on the payoff table.
pub fn pure_first_stage_equilibria(params: &GameParams) -> Vec<FirstStageProfile> {
    stable_profiles(&ex_ante_payoffs(params))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RegionLabel {
    CCUnique,
    SSUnique,
    Both,
}

impl RegionLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::CCUnique => "CCUnique",
            RegionLabel::SSUnique => "SSUnique",
            RegionLabel::Both => "Both",
        }
    }

    pub fn profiles(self) -> Vec<FirstStageProfile> {
        match self {
            RegionLabel::CCUnique => vec![FirstStageProfile::CC],
            RegionLabel::SSUnique => vec![FirstStageProfile::SS],
            RegionLabel::Both => vec![FirstStageProfile::CC, FirstStageProfile::SS],
        }
    }
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Smallest cost at which CC survives when `d >= 1/2`: `(2d - 1) / d^2`.
pub fn cc_cost_threshold(d: f64) -> f64 {
    (2.0 * d - 1.0) / (d * d)
}

/// Region of the (q, d) square from the closed-form thresholds.
///
/// `d < 1/2` is CC-only. Otherwise both CC and SS are equilibria once
/// `q >= (2d - 1)/d^2`, and SS alone below that. At `d = 1/2` the threshold is
/// 0, so the boundary line belongs to `Both`.
pub fn classify_region(params: &GameParams) -> RegionLabel {
    let (q, d) = (params.q(), params.d());
    if d < 0.5 {
        RegionLabel::CCUnique
    } else if q >= cc_cost_threshold(d) {
        RegionLabel::Both
    } else {
        RegionLabel::SSUnique
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(q: f64, d: f64) -> GameParams {
        GameParams::new(q, d).unwrap()
    }

    fn grid(n: usize) -> impl Iterator<Item = f64> + Clone {
        (0..n).map(move |i| i as f64 / (n - 1) as f64)
    }

    #[test]
    fn contested_matrix_entries() {
        let g = contested_payoff_matrix(0.0).unwrap();
        assert_eq!(g.entry(0, 0), (1.0, 0.0));
        let g = contested_payoff_matrix(0.3).unwrap();
        assert_eq!(g.entry(1, 0), (0.0, 0.7));
        assert!(contested_payoff_matrix(1.5).is_err());
    }

    #[test]
    fn contested_mixed_equilibrium() {
        let s = solve_2x2_mixed(&contested_payoff_matrix(0.25).unwrap()).unwrap();
        assert_eq!((s.lambda1, s.lambda2), (0.75, 0.25));
        for q in grid(101) {
            let g = contested_payoff_matrix(q).unwrap();
            let s = solve_2x2_mixed(&g).unwrap();
            assert!((s.lambda1 - (1.0 - q)).abs() <= 1e-12 && (s.lambda2 - q).abs() <= 1e-12);
            // Each player indifferent between attacking and not.
            let r = g.row_action_values(s.lambda2);
            let c = g.col_action_values(s.lambda1);
            assert!((r[0] - r[1]).abs() < 1e-12, "q={q}");
            assert!((c[0] - c[1]).abs() < 1e-12, "q={q}");
        }
    }

    #[test]
    fn mixing_monotone_and_attack_mass_constant() {
        let solved: Vec<_> = grid(101)
            .map(|q| solve_2x2_mixed(&contested_payoff_matrix(q).unwrap()).unwrap())
            .collect();
        for w in solved.windows(2) {
            assert!(w[1].lambda2 >= w[0].lambda2);
            assert!(w[1].lambda1 <= w[0].lambda1);
        }
        for s in &solved {
            assert!((s.lambda1 + s.lambda2 - 1.0).abs() <= f64::EPSILON);
        }
    }

    #[test]
    fn contested_welfare_falls_with_cost() {
        let totals: Vec<f64> = grid(101)
            .map(|q| {
                let eq = second_stage_equilibrium(
                    FirstStageProfile::CC,
                    ProductivityPair::new(0.6, 0.5),
                    &params(q, 0.3),
                )
                .unwrap();
                eq.u_strong + eq.u_weak
            })
            .collect();
        assert_eq!(totals[0], 1.0);
        assert!(totals.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(totals.iter().cloned().fold(f64::MIN, f64::max), 1.0);
    }

    #[test]
    fn second_stage_cases() {
        let eq = second_stage_equilibrium(
            FirstStageProfile::CC,
            ProductivityPair::new(0.9, 0.2),
            &params(0.5, 0.3),
        )
        .unwrap();
        assert_eq!(eq.case, SubgameCase::NoContest);
        assert_eq!((eq.u_strong, eq.u_weak), (1.0, 0.0));
        assert!(eq.strategy.is_pure());

        let eq = second_stage_equilibrium(
            FirstStageProfile::CC,
            ProductivityPair::new(0.6, 0.5),
            &params(0.4, 0.3),
        )
        .unwrap();
        assert_eq!(eq.case, SubgameCase::Contested);
        assert_eq!(eq.strong, Player::One);
        assert_eq!((eq.strategy.lambda1, eq.strategy.lambda2), (0.6, 0.4));
        assert_eq!((eq.u_strong, eq.u_weak), (0.6, 0.0));

        let eq = second_stage_equilibrium(
            FirstStageProfile::CC,
            ProductivityPair::new(0.5, 0.6),
            &params(0.4, 0.3),
        )
        .unwrap();
        assert_eq!(eq.strong, Player::Two);
        assert_eq!(eq.attack_probability(Player::Two), 0.6);
        assert_eq!(eq.attack_probability(Player::One), 0.4);

        let eq = second_stage_equilibrium(
            FirstStageProfile::CS,
            ProductivityPair::new(0.4, 0.0),
            &params(0.2, 0.6),
        )
        .unwrap();
        assert_eq!(eq.case, SubgameCase::UnilateralReach);
        assert_eq!(eq.attack_probability(Player::Two), 1.0);
        assert_eq!(eq.attack_probability(Player::One), 0.0);

        let eq = second_stage_equilibrium(
            FirstStageProfile::SC,
            ProductivityPair::new(0.0, 0.7),
            &params(0.2, 0.6),
        )
        .unwrap();
        assert_eq!(eq.case, SubgameCase::NoContest);
        assert_eq!(eq.utility(Player::Two), 1.0);

        let eq = second_stage_equilibrium(
            FirstStageProfile::SS,
            ProductivityPair::new(0.0, 0.0),
            &params(0.2, 0.6),
        )
        .unwrap();
        assert_eq!(eq.case, SubgameCase::BothInHouse);
        assert_eq!((eq.u_strong, eq.u_weak), (0.5, 0.5));
    }

    #[test]
    fn contested_boundary_is_strict() {
        let eq = second_stage_equilibrium(
            FirstStageProfile::CC,
            ProductivityPair::new(0.5, 0.5 - 1e-9),
            &params(0.3, 1e-8),
        )
        .unwrap();
        assert_eq!(eq.case, SubgameCase::Contested);
        let eq = second_stage_equilibrium(
            FirstStageProfile::CC,
            ProductivityPair::new(0.75, 0.5),
            &params(0.3, 0.25),
        )
        .unwrap();
        assert_eq!(eq.case, SubgameCase::NoContest);
    }

    #[test]
    fn contested_tie_is_domain_error() {
        let r = second_stage_equilibrium(
            FirstStageProfile::CC,
            ProductivityPair::new(0.4, 0.4),
            &params(0.3, 0.2),
        );
        assert_eq!(r, Err(GameError::ProductivityTie(0.4)));
        let r = second_stage_equilibrium(
            FirstStageProfile::CS,
            ProductivityPair::new(0.4, 0.1),
            &params(0.3, 0.2),
        );
        assert!(matches!(
            r,
            Err(GameError::InconsistentProductivities { .. })
        ));
    }

    #[test]
    fn probability_integrals() {
        assert_eq!(overlap_probability(0.0).unwrap(), 0.0);
        assert_eq!(overlap_probability(1.0).unwrap(), 0.5);
        assert!((overlap_probability(0.4).unwrap() - 0.32).abs() < 1e-15);
        assert_eq!(lead_probability(0.0).unwrap(), 0.5);
        assert_eq!(lead_probability(1.0).unwrap(), 0.0);
        assert!((lead_probability(0.4).unwrap() - 0.18).abs() < 1e-15);
        assert!(overlap_probability(-0.1).is_err());
        assert!(lead_probability(1.1).is_err());
        for d in grid(101) {
            let sum = overlap_probability(d).unwrap() + lead_probability(d).unwrap();
            assert!((sum - 0.5).abs() <= f64::EPSILON, "d={d}");
        }
    }

    #[test]
    fn payoff_table_values() {
        let t = ex_ante_payoffs(&params(1.0, 1.0));
        assert_eq!((t.cc.u1, t.cc.u2), (0.0, 0.0));
        for d in grid(11) {
            assert_eq!(ex_ante_payoffs(&params(0.0, d)).cc.u1, 0.5);
        }
        let t = ex_ante_payoffs(&params(0.5, 0.5));
        assert_eq!(t.cc.u1, 0.3125);
        assert_eq!((t.cs.u1, t.cs.u2), (0.5, 0.25));
        assert_eq!((t.sc.u1, t.sc.u2), (0.25, 0.5));
        assert_eq!((t.ss.u1, t.ss.u2), (0.5, 0.5));
    }

    #[test]
    fn cc_payoff_is_total_expectation_of_subgames() {
        for q in grid(21) {
            for d in grid(21) {
                let composed =
                    overlap_probability(d).unwrap() * (1.0 - q) + lead_probability(d).unwrap();
                assert!((ex_ante_payoffs(&params(q, d)).cc.u1 - composed).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cc_payoff_nonincreasing_in_cost_and_damage() {
        let n = 51;
        let v = |i: usize, j: usize| {
            ex_ante_payoffs(&params(
                i as f64 / (n - 1) as f64,
                j as f64 / (n - 1) as f64,
            ))
            .cc
            .u1
        };
        for i in 0..n {
            for j in 0..n {
                if i + 1 < n {
                    assert!(v(i + 1, j) <= v(i, j));
                }
                if j + 1 < n {
                    assert!(v(i, j + 1) <= v(i, j));
                }
            }
        }
    }

    #[test]
    fn first_stage_equilibria_samples() {
        assert_eq!(
            pure_first_stage_equilibria(&params(0.5, 0.4)),
            vec![FirstStageProfile::CC]
        );
        assert_eq!(
            pure_first_stage_equilibria(&params(0.5, 0.8)),
            vec![FirstStageProfile::SS]
        );
        assert_eq!(
            pure_first_stage_equilibria(&params(0.95, 0.8)),
            vec![FirstStageProfile::CC, FirstStageProfile::SS]
        );
        assert_eq!(
            pure_first_stage_equilibria(&params(0.0, 1.0)),
            vec![FirstStageProfile::SS]
        );
    }

    #[test]
    fn asymmetric_profiles_never_stable() {
        // (q, d) = (0, 1/2) is the one point where every payoff in the table
        // equals 1/2, so all four profiles are weak equilibria there.
        let degenerate = pure_first_stage_equilibria(&params(0.0, 0.5));
        assert_eq!(degenerate, FirstStageProfile::ALL.to_vec());
        for q in grid(101) {
            for d in grid(101) {
                if q == 0.0 && d == 0.5 {
                    continue;
                }
                let eqs = pure_first_stage_equilibria(&params(q, d));
                assert!(!eqs.contains(&FirstStageProfile::CS), "q={q} d={d}");
                assert!(!eqs.contains(&FirstStageProfile::SC), "q={q} d={d}");
            }
        }
    }

    #[test]
    fn region_samples() {
        assert_eq!(classify_region(&params(0.5, 0.3)), RegionLabel::CCUnique);
        assert_eq!(classify_region(&params(0.2, 0.9)), RegionLabel::SSUnique);
        assert_eq!(classify_region(&params(1.0, 1.0)), RegionLabel::Both);
        assert_eq!(classify_region(&params(0.0, 0.0)), RegionLabel::CCUnique);
        assert_eq!(classify_region(&params(0.0, 0.5)), RegionLabel::Both);
    }

    #[test]
    fn region_agrees_with_deviation_checks() {
        for q in grid(101) {
            for d in grid(101) {
                if d == 0.5 || (d >= 0.5 && (q - cc_cost_threshold(d)).abs() < 1e-9) {
                    continue;
                }
                let p = params(q, d);
                assert_eq!(
                    classify_region(&p).profiles(),
                    pure_first_stage_equilibria(&p),
                    "q={q} d={d}"
                );
            }
        }
    }
}
