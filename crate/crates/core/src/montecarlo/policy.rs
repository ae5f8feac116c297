//! Player policies for both stages of the game.

use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::equilibrium::{classify_region, second_stage_equilibrium, RegionLabel};
use crate::error::{GameError, Result};
use crate::model::{
    AttackAction, FirstStageAction, FirstStageProfile, GameParams, Player, ProductivityPair,
};

/// A player's behaviour. Attack decisions see the full public state: the
/// first-stage profile and both realized productivities.
pub trait Policy: Send + Sync {
    fn name(&self) -> &str;

    fn first_stage(
        &self,
        me: Player,
        params: &GameParams,
        rng: &mut dyn RngCore,
    ) -> FirstStageAction;

    fn attack(
        &self,
        me: Player,
        profile: FirstStageProfile,
        prods: ProductivityPair,
        params: &GameParams,
        rng: &mut dyn RngCore,
    ) -> AttackAction;
}

/// Which first-stage equilibrium to play where both CC and SS are equilibria.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EquilibriumSelection {
    #[default]
    PreferCC,
    PreferSS,
}

/// Subgame-perfect play: a pure first-stage equilibrium, then the
/// second-stage equilibrium of whatever subgame is reached.
#[derive(Clone, Copy, Debug, Default)]
pub struct EquilibriumPolicy {
    pub select: EquilibriumSelection,
}

pub fn equilibrium_policy(select: EquilibriumSelection) -> EquilibriumPolicy {
    EquilibriumPolicy { select }
}

fn draw(rng: &mut dyn RngCore, p: f64) -> bool {
    // Pure decisions do not consume randomness.
    if p <= 0.0 {
        false
    } else if p >= 1.0 {
        true
    } else {
        rng.random_bool(p)
    }
}

impl Policy for EquilibriumPolicy {
    fn name(&self) -> &str {
        match self.select {
            EquilibriumSelection::PreferCC => "equilibrium",
            EquilibriumSelection::PreferSS => "equilibrium_prefer_ss",
        }
    }

    fn first_stage(
        &self,
        _me: Player,
        params: &GameParams,
        _rng: &mut dyn RngCore,
    ) -> FirstStageAction {
        match (classify_region(params), self.select) {
            (RegionLabel::CCUnique, _) | (RegionLabel::Both, EquilibriumSelection::PreferCC) => {
                FirstStageAction::Crowdsource
            }
            (RegionLabel::SSUnique, _) | (RegionLabel::Both, EquilibriumSelection::PreferSS) => {
                FirstStageAction::InHouse
            }
        }
    }

    fn attack(
        &self,
        me: Player,
        profile: FirstStageProfile,
        prods: ProductivityPair,
        params: &GameParams,
        rng: &mut dyn RngCore,
    ) -> AttackAction {
        let p = match second_stage_equilibrium(profile, prods, params) {
            Ok(eq) => eq.attack_probability(me),
            // Exact tie inside the damage band: treat player 1 as the leader.
            Err(GameError::ProductivityTie(_)) => match me {
                Player::One => 1.0 - params.q(),
                Player::Two => params.q(),
            },
            Err(e) => panic!("equilibrium policy reached an invalid state: {e}"),
        };
        AttackAction::from_bool(draw(rng, p))
    }
}

/// Crowdsources and always attacks.
#[derive(Clone, Copy, Debug, Default)]
pub struct AlwaysAttack;

impl Policy for AlwaysAttack {
    fn name(&self) -> &str {
        "always_attack"
    }

    fn first_stage(&self, _: Player, _: &GameParams, _: &mut dyn RngCore) -> FirstStageAction {
        FirstStageAction::Crowdsource
    }

    fn attack(
        &self,
        _: Player,
        _: FirstStageProfile,
        _: ProductivityPair,
        _: &GameParams,
        _: &mut dyn RngCore,
    ) -> AttackAction {
        AttackAction::Attack
    }
}

/// Crowdsources and never attacks.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeverAttack;

impl Policy for NeverAttack {
    fn name(&self) -> &str {
        "never_attack"
    }

    fn first_stage(&self, _: Player, _: &GameParams, _: &mut dyn RngCore) -> FirstStageAction {
        FirstStageAction::Crowdsource
    }

    fn attack(
        &self,
        _: Player,
        _: FirstStageProfile,
        _: ProductivityPair,
        _: &GameParams,
        _: &mut dyn RngCore,
    ) -> AttackAction {
        AttackAction::NoAttack
    }
}

/// Crowdsources, then attacks exactly when trailing by less than `d`, i.e.
/// when an unanswered attack would take the lead.
#[derive(Clone, Copy, Debug, Default)]
pub struct AttackIfBehind;

impl Policy for AttackIfBehind {
    fn name(&self) -> &str {
        "attack_if_behind"
    }

    fn first_stage(&self, _: Player, _: &GameParams, _: &mut dyn RngCore) -> FirstStageAction {
        FirstStageAction::Crowdsource
    }

    fn attack(
        &self,
        me: Player,
        _: FirstStageProfile,
        prods: ProductivityPair,
        params: &GameParams,
        _: &mut dyn RngCore,
    ) -> AttackAction {
        let (mine, theirs) = (prods.get(me), prods.get(me.other()));
        AttackAction::from_bool(mine < theirs && theirs - mine < params.d())
    }
}

/// Crowdsources and attacks independently at fixed rates, ignoring the state.
#[derive(Clone, Debug)]
pub struct RandomPolicy {
    pub crowdsource_prob: f64,
    pub attack_prob: f64,
}

impl RandomPolicy {
    pub fn new(crowdsource_prob: f64, attack_prob: f64) -> Result<Self> {
        crate::error::check_unit("crowdsource_prob", crowdsource_prob)?;
        crate::error::check_unit("attack_prob", attack_prob)?;
        Ok(Self {
            crowdsource_prob,
            attack_prob,
        })
    }
}

impl Policy for RandomPolicy {
    fn name(&self) -> &str {
        "random"
    }

    fn first_stage(&self, _: Player, _: &GameParams, rng: &mut dyn RngCore) -> FirstStageAction {
        if rng.random_bool(self.crowdsource_prob) {
            FirstStageAction::Crowdsource
        } else {
            FirstStageAction::InHouse
        }
    }

    fn attack(
        &self,
        _: Player,
        _: FirstStageProfile,
        _: ProductivityPair,
        _: &GameParams,
        rng: &mut dyn RngCore,
    ) -> AttackAction {
        AttackAction::from_bool(rng.random_bool(self.attack_prob))
    }
}

pub const BUILTIN_POLICY_NAMES: [&str; 4] = [
    "equilibrium",
    "always_attack",
    "never_attack",
    "attack_if_behind",
];

/// The named policy catalog. `equilibrium` prefers CC where both first-stage
/// equilibria exist.
pub fn builtin_policies() -> Vec<Arc<dyn Policy>> {
    vec![
        Arc::new(EquilibriumPolicy::default()),
        Arc::new(AlwaysAttack),
        Arc::new(NeverAttack),
        Arc::new(AttackIfBehind),
    ]
}

pub fn policy_by_name(name: &str) -> Result<Arc<dyn Policy>> {
    builtin_policies()
        .into_iter()
        .find(|p| p.name() == name)
        .ok_or_else(|| GameError::UnknownPolicy {
            name: name.to_string(),
            available: BUILTIN_POLICY_NAMES.join(", "),
        })
}
