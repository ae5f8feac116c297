//! Domain types for the two-stage game and the outcome-resolution rule.
//!
//! Two firms first choose to crowdsource (`C`) or work in-house (`S`). A
//! crowdsourcing firm draws its productivity from U[0,1]; an in-house firm has
//! productivity 0. Both productivities are then public and each firm may attack
//! the other: an attack costs the attacker `q` and lowers the opponent's
//! productivity by `d`. The firm with the strictly higher post-attack
//! productivity takes the reward `r = 1`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit, GameError, Result};

/// Player index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn other(self) -> Self {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    /// 1-based index, as used in reports.
    pub fn number(self) -> u8 {
        match self {
            Player::One => 1,
            Player::Two => 2,
        }
    }
}

/// Public parameters of one game instance. The reward is fixed at 1.
///
/// Both `q` and `d` are admitted on the closed interval [0, 1]; at the
/// endpoints the contested mixed equilibrium degenerates to a pure one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GameParams {
    q: f64,
    d: f64,
    r: f64,
}

impl GameParams {
    pub const REWARD: f64 = 1.0;

    pub fn new(q: f64, d: f64) -> Result<Self> {
        Ok(Self {
            q: check_unit("q", q)?,
            d: check_unit("d", d)?,
            r: Self::REWARD,
        })
    }

    /// Attack cost as a fraction of the reward.
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Productivity removed from the attacked firm.
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn reward(&self) -> f64 {
        self.r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FirstStageAction {
    Crowdsource,
    InHouse,
}

impl FirstStageAction {
    pub fn letter(self) -> char {
        match self {
            FirstStageAction::Crowdsource => 'C',
            FirstStageAction::InHouse => 'S',
        }
    }
}

/// First-stage choices of both players.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FirstStageProfile {
    pub a1: FirstStageAction,
    pub a2: FirstStageAction,
}

// Ordering CC < CS < SC < SS, matching the layout of the payoff table.
impl PartialOrd for FirstStageAction {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FirstStageAction {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (*self as u8).cmp(&(*other as u8))
    }
}

impl FirstStageProfile {
    pub const CC: Self = Self::new(FirstStageAction::Crowdsource, FirstStageAction::Crowdsource);
    pub const CS: Self = Self::new(FirstStageAction::Crowdsource, FirstStageAction::InHouse);
    pub const SC: Self = Self::new(FirstStageAction::InHouse, FirstStageAction::Crowdsource);
    pub const SS: Self = Self::new(FirstStageAction::InHouse, FirstStageAction::InHouse);
    pub const ALL: [Self; 4] = [Self::CC, Self::CS, Self::SC, Self::SS];

    pub const fn new(a1: FirstStageAction, a2: FirstStageAction) -> Self {
        Self { a1, a2 }
    }

    pub fn action(&self, player: Player) -> FirstStageAction {
        match player {
            Player::One => self.a1,
            Player::Two => self.a2,
        }
    }

    /// The profile reached when `player` switches to `action`.
    pub fn with_action(&self, player: Player, action: FirstStageAction) -> Self {
        match player {
            Player::One => Self::new(action, self.a2),
            Player::Two => Self::new(self.a1, action),
        }
    }

    pub fn crowdsources(&self, player: Player) -> bool {
        self.action(player) == FirstStageAction::Crowdsource
    }
}

impl fmt::Display for FirstStageProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.a1.letter(), self.a2.letter())
    }
}

impl std::str::FromStr for FirstStageProfile {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "CC" => Ok(Self::CC),
            "CS" => Ok(Self::CS),
            "SC" => Ok(Self::SC),
            "SS" => Ok(Self::SS),
            _ => Err(GameError::InvalidArgument(format!(
                "first-stage profile must be one of CC, CS, SC, SS; got {s:?}"
            ))),
        }
    }
}

impl Serialize for FirstStageProfile {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Realized productivities before attacks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProductivityPair {
    pub p1: f64,
    pub p2: f64,
}

impl ProductivityPair {
    pub fn new(p1: f64, p2: f64) -> Self {
        Self { p1, p2 }
    }

    pub fn get(&self, player: Player) -> f64 {
        match player {
            Player::One => self.p1,
            Player::Two => self.p2,
        }
    }

    /// Checks that in-house entries are exactly 0 and crowdsourced entries lie in [0, 1].
    pub fn validate(&self, profile: FirstStageProfile) -> Result<()> {
        let ok = |player: Player| {
            let p = self.get(player);
            if profile.crowdsources(player) {
                (0.0..=1.0).contains(&p)
            } else {
                p == 0.0
            }
        };
        if ok(Player::One) && ok(Player::Two) {
            Ok(())
        } else {
            Err(GameError::InconsistentProductivities {
                profile: profile.to_string(),
                p1: self.p1,
                p2: self.p2,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttackAction {
    Attack,
    NoAttack,
}

impl AttackAction {
    pub fn from_bool(attack: bool) -> Self {
        if attack {
            AttackAction::Attack
        } else {
            AttackAction::NoAttack
        }
    }

    pub fn is_attack(self) -> bool {
        self == AttackAction::Attack
    }
}

/// Second-stage choices of both players.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AttackProfile {
    pub b1: AttackAction,
    pub b2: AttackAction,
}

impl AttackProfile {
    pub const ALL: [Self; 4] = [
        Self::new(AttackAction::Attack, AttackAction::Attack),
        Self::new(AttackAction::Attack, AttackAction::NoAttack),
        Self::new(AttackAction::NoAttack, AttackAction::Attack),
        Self::new(AttackAction::NoAttack, AttackAction::NoAttack),
    ];

    pub const fn new(b1: AttackAction, b2: AttackAction) -> Self {
        Self { b1, b2 }
    }

    pub fn get(&self, player: Player) -> AttackAction {
        match player {
            Player::One => self.b1,
            Player::Two => self.b2,
        }
    }

    pub fn attackers(&self) -> u32 {
        self.b1.is_attack() as u32 + self.b2.is_attack() as u32
    }
}

/// Result of one fully played game.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub winner: Player,
    pub u1: f64,
    pub u2: f64,
    pub effective_p1: f64,
    pub effective_p2: f64,
    pub attackers: u32,
}

impl Outcome {
    pub fn utility(&self, player: Player) -> f64 {
        match player {
            Player::One => self.u1,
            Player::Two => self.u2,
        }
    }

    pub fn effective(&self, player: Player) -> f64 {
        match player {
            Player::One => self.effective_p1,
            Player::Two => self.effective_p2,
        }
    }
}

/// Draws productivities for `profile`: U[0,1] for each crowdsourcing player,
/// exactly 0 for in-house players. Player 1 draws first.
pub fn sample_productivities<R: Rng + ?Sized>(
    profile: FirstStageProfile,
    rng: &mut R,
) -> ProductivityPair {
    let mut draw = |player: Player| {
        if profile.crowdsources(player) {
            rng.random::<f64>()
        } else {
            0.0
        }
    };
    let p1 = draw(Player::One);
    let p2 = draw(Player::Two);
    ProductivityPair { p1, p2 }
}

/// Plays out the second stage.
///
/// Each attack subtracts `d` from the opponent's productivity (no clamping at
/// zero). The strictly higher effective productivity wins; an exact tie is
/// settled by a fair coin from `tie_rng`, which is consumed only on ties.
pub fn resolve_outcome<R: Rng + ?Sized>(
    profile: FirstStageProfile,
    prods: ProductivityPair,
    attacks: AttackProfile,
    params: &GameParams,
    tie_rng: &mut R,
) -> Result<Outcome> {
    prods.validate(profile)?;
    let d = params.d();
    let hit = |victim: Player| {
        if attacks.get(victim.other()).is_attack() {
            d
        } else {
            0.0
        }
    };
    let effective_p1 = prods.p1 - hit(Player::One);
    let effective_p2 = prods.p2 - hit(Player::Two);

    let winner = if effective_p1 > effective_p2 {
        Player::One
    } else if effective_p2 > effective_p1 {
        Player::Two
    } else if tie_rng.random_bool(0.5) {
        Player::One
    } else {
        Player::Two
    };

    let utility = |player: Player| {
        let prize = if player == winner {
            params.reward()
        } else {
            0.0
        };
        let cost = if attacks.get(player).is_attack() {
            params.q()
        } else {
            0.0
        };
        prize - cost
    };

    Ok(Outcome {
        winner,
        u1: utility(Player::One),
        u2: utility(Player::Two),
        effective_p1,
        effective_p2,
        attackers: attacks.attackers(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use AttackAction::{Attack as A, NoAttack as N};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn resolve(
        profile: FirstStageProfile,
        p: (f64, f64),
        b: (AttackAction, AttackAction),
        q: f64,
        d: f64,
    ) -> Outcome {
        let params = GameParams::new(q, d).unwrap();
        resolve_outcome(
            profile,
            ProductivityPair::new(p.0, p.1),
            AttackProfile::new(b.0, b.1),
            &params,
            &mut rng(0),
        )
        .unwrap()
    }

    #[test]
    fn params_reject_out_of_range() {
        assert!(GameParams::new(0.0, 1.0).is_ok());
        assert!(matches!(
            GameParams::new(1.1, 0.5),
            Err(GameError::OutOfRange { name: "q", .. })
        ));
        assert!(matches!(
            GameParams::new(0.5, -0.1),
            Err(GameError::OutOfRange { name: "d", .. })
        ));
        assert!(GameParams::new(f64::NAN, 0.5).is_err());
        assert_eq!(GameParams::new(0.2, 0.3).unwrap().reward(), 1.0);
    }

    #[test]
    fn in_house_players_get_zero() {
        for seed in 0..20 {
            assert_eq!(
                sample_productivities(FirstStageProfile::SS, &mut rng(seed)),
                ProductivityPair::new(0.0, 0.0)
            );
            let cs = sample_productivities(FirstStageProfile::CS, &mut rng(seed));
            assert_eq!(cs.p2, 0.0);
            assert!((0.0..1.0).contains(&cs.p1));
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let a = sample_productivities(FirstStageProfile::CC, &mut rng(42));
        let b = sample_productivities(FirstStageProfile::CC, &mut rng(42));
        assert_eq!(a, b);
        assert_ne!(a.p1, a.p2);
    }

    #[test]
    fn uniform_sample_mean() {
        // SE of a U[0,1] mean over 1e6 draws is 1/sqrt(12e6) ~ 2.9e-4.
        let mut r = rng(9);
        let n = 1_000_000;
        let sum: f64 = (0..n)
            .map(|_| sample_productivities(FirstStageProfile::CC, &mut r).p1)
            .sum();
        assert!((sum / n as f64 - 0.5).abs() < 0.002);
    }

    #[test]
    fn no_attacks_higher_productivity_wins() {
        let o = resolve(FirstStageProfile::CC, (0.9, 0.3), (N, N), 0.2, 0.3);
        assert_eq!(o.winner, Player::One);
        assert_eq!((o.u1, o.u2), (1.0, 0.0));
    }

    #[test]
    fn mutual_attack_keeps_leader() {
        let o = resolve(FirstStageProfile::CC, (0.5, 0.45), (A, A), 0.2, 0.3);
        assert_eq!(o.winner, Player::One);
        assert_eq!((o.u1, o.u2), (0.8, -0.2));
    }

    #[test]
    fn in_house_attacker_overtakes_weak_crowdsourcer() {
        let o = resolve(FirstStageProfile::CS, (0.4, 0.0), (N, A), 0.2, 0.6);
        assert_eq!(o.winner, Player::Two);
        assert_eq!((o.u1, o.u2), (0.0, 0.8));
        assert!(o.effective_p1 < 0.0, "no clamping at zero");
    }

    #[test]
    fn weak_unilateral_attack_overtakes() {
        let o = resolve(FirstStageProfile::CC, (0.5, 0.45), (N, A), 0.2, 0.3);
        assert_eq!(o.winner, Player::Two);
        assert_eq!((o.u1, o.u2), (0.0, 0.8));
        assert_eq!(o.effective_p1, 0.5 - 0.3);
        assert_eq!(o.effective_p2, 0.45);
    }

    #[test]
    fn contested_cells_match_payoff_matrix() {
        let q = 0.25;
        let expected = [(1.0 - q, -q), (1.0 - q, 0.0), (0.0, 1.0 - q), (1.0, 0.0)];
        for (b, want) in AttackProfile::ALL.iter().zip(expected) {
            let o = resolve(FirstStageProfile::CC, (0.6, 0.5), (b.b1, b.b2), q, 0.3);
            assert_eq!((o.u1, o.u2), want, "{b:?}");
        }
    }

    #[test]
    fn inconsistent_productivities_rejected() {
        let params = GameParams::new(0.1, 0.1).unwrap();
        let bad = [
            (FirstStageProfile::SS, (0.1, 0.0)),
            (FirstStageProfile::CS, (0.5, 0.2)),
            (FirstStageProfile::CC, (1.5, 0.2)),
        ];
        for (profile, (p1, p2)) in bad {
            let r = resolve_outcome(
                profile,
                ProductivityPair::new(p1, p2),
                AttackProfile::new(N, N),
                &params,
                &mut rng(0),
            );
            assert!(matches!(
                r,
                Err(GameError::InconsistentProductivities { .. })
            ));
        }
    }

    #[test]
    fn ties_are_reproducible_coin_flips() {
        let params = GameParams::new(0.0, 0.0).unwrap();
        let flips = |seed| {
            let mut r = rng(seed);
            (0..64)
                .map(|_| {
                    resolve_outcome(
                        FirstStageProfile::SS,
                        ProductivityPair::new(0.0, 0.0),
                        AttackProfile::new(N, N),
                        &params,
                        &mut r,
                    )
                    .unwrap()
                    .winner
                })
                .collect::<Vec<_>>()
        };
        let a = flips(3);
        assert_eq!(a, flips(3));
        assert!(a.contains(&Player::One) && a.contains(&Player::Two));
    }

    #[test]
    fn profile_parse_and_display() {
        for p in FirstStageProfile::ALL {
            assert_eq!(p.to_string().parse::<FirstStageProfile>().unwrap(), p);
        }
        assert!("XX".parse::<FirstStageProfile>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn attack() -> impl Strategy<Value = AttackAction> {
            prop_oneof![Just(A), Just(N)]
        }

        proptest! {
            #[test]
            fn one_winner_takes_reward_minus_costs(
                p1 in 0.0..=1.0f64, p2 in 0.0..=1.0f64,
                b1 in attack(), b2 in attack(),
                k in 0u32..=1024, d in 0.0..=1.0f64, seed in any::<u64>(),
            ) {
                // Dyadic q keeps every utility sum exact in binary floating point.
                let q = k as f64 / 1024.0;
                let params = GameParams::new(q, d).unwrap();
                let o = resolve_outcome(
                    FirstStageProfile::CC, ProductivityPair::new(p1, p2),
                    AttackProfile::new(b1, b2), &params, &mut rng(seed),
                ).unwrap();
                prop_assert_eq!(o.u1 + o.u2 + q * o.attackers as f64, 1.0);
                let loser = o.winner.other();
                prop_assert!(o.utility(o.winner) >= o.utility(loser));
                prop_assert!(o.effective(o.winner) >= o.effective(loser));
            }

            #[test]
            fn damage_is_affine_in_opponent_attack(
                p1 in 0.0..=1.0f64, p2 in 0.0..=1.0f64, d in 0.0..=1.0f64,
                b1 in attack(),
            ) {
                let params = GameParams::new(0.5, d).unwrap();
                let run = |b2| resolve_outcome(
                    FirstStageProfile::CC, ProductivityPair::new(p1, p2),
                    AttackProfile::new(b1, b2), &params, &mut rng(0),
                ).unwrap();
                let (hit, spared) = (run(A), run(N));
                prop_assert_eq!(spared.effective_p1, p1);
                prop_assert_eq!(hit.effective_p1, p1 - d);
                prop_assert_eq!(hit.effective_p2, spared.effective_p2);
            }
        }
    }
}
