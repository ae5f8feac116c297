//! Seeded Monte Carlo simulation of the full two-stage game.
//!
//! # Random streams
//!
//! A batch of `trials` games is cut into `partitions` contiguous blocks; block
//! `k` holds `trials / partitions` games plus one more when
//! `k < trials % partitions`. Each block owns four ChaCha8 streams, all keyed
//! by `seed` (via `seed_from_u64`) and told apart by stream id
//! `4k + role`, with role 0 for productivities, 1 for tie-breaking coins, 2
//! for player 1's decisions and 3 for player 2's. Blocks run in parallel and
//! are merged in block order, so a report depends only on
//! `(seed, trials, partitions)` and not on thread count.

mod policy;
mod stats;

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use policy::{
    builtin_policies, equilibrium_policy, policy_by_name, AlwaysAttack, AttackIfBehind,
    EquilibriumPolicy, EquilibriumSelection, NeverAttack, Policy, RandomPolicy,
    BUILTIN_POLICY_NAMES,
};
pub use stats::{Estimate, RunningStat};

use crate::error::{GameError, Result};
use crate::model::{
    resolve_outcome, sample_productivities, AttackProfile, FirstStageProfile, GameParams, Outcome,
    Player, ProductivityPair,
};

pub const DEFAULT_PARTITIONS: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    #[default]
    All,
    /// Only CC games whose productivities differ by less than `d`.
    ContestedOnly,
}

#[derive(Clone)]
pub struct SimConfig {
    pub params: GameParams,
    pub trials: u64,
    pub seed: u64,
    pub partitions: u32,
    pub policy1: Arc<dyn Policy>,
    pub policy2: Arc<dyn Policy>,
    pub conditioning: Conditioning,
    /// Skips the first stage and plays this profile instead.
    pub forced_profile: Option<FirstStageProfile>,
}

impl SimConfig {
    pub fn new(
        params: GameParams,
        trials: u64,
        seed: u64,
        policy1: Arc<dyn Policy>,
        policy2: Arc<dyn Policy>,
    ) -> Self {
        Self {
            params,
            trials,
            seed,
            partitions: DEFAULT_PARTITIONS,
            policy1,
            policy2,
            conditioning: Conditioning::All,
            forced_profile: None,
        }
    }

    pub fn with_conditioning(mut self, conditioning: Conditioning) -> Self {
        self.conditioning = conditioning;
        self
    }

    pub fn with_profile(mut self, profile: FirstStageProfile) -> Self {
        self.forced_profile = Some(profile);
        self
    }

    pub fn with_partitions(mut self, partitions: u32) -> Self {
        self.partitions = partitions;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(GameError::InvalidArgument(
                "trials must be at least 1".into(),
            ));
        }
        if self.partitions == 0 {
            return Err(GameError::InvalidArgument(
                "partitions must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// The four random streams owned by one partition.
pub struct TrialStreams {
    pub productivity: ChaCha8Rng,
    pub tie: ChaCha8Rng,
    pub player1: ChaCha8Rng,
    pub player2: ChaCha8Rng,
}

impl TrialStreams {
    pub fn new(seed: u64, partition: u32) -> Self {
        let stream = |role: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(4 * partition as u64 + role);
            rng
        };
        Self {
            productivity: stream(0),
            tie: stream(1),
            player1: stream(2),
            player2: stream(3),
        }
    }

    fn player(&mut self, player: Player) -> &mut ChaCha8Rng {
        match player {
            Player::One => &mut self.player1,
            Player::Two => &mut self.player2,
        }
    }
}

/// Everything that happened in one game.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub profile: FirstStageProfile,
    pub prods: ProductivityPair,
    pub attacks: AttackProfile,
    pub outcome: Outcome,
}

impl TrialRecord {
    pub fn is_contested(&self, params: &GameParams) -> bool {
        self.profile == FirstStageProfile::CC && (self.prods.p1 - self.prods.p2).abs() < params.d()
    }

    /// The player with strictly lower pre-attack productivity, if any.
    pub fn weaker(&self) -> Option<Player> {
        let (p1, p2) = (self.prods.p1, self.prods.p2);
        if p1 < p2 {
            Some(Player::One)
        } else if p2 < p1 {
            Some(Player::Two)
        } else {
            None
        }
    }
}

/// Plays one complete game: first-stage choices (or `forced_profile`),
/// productivity draws, attack decisions, resolution.
pub fn simulate_trial(
    params: &GameParams,
    policy1: &dyn Policy,
    policy2: &dyn Policy,
    forced_profile: Option<FirstStageProfile>,
    streams: &mut TrialStreams,
) -> TrialRecord {
    let profile = forced_profile.unwrap_or_else(|| {
        FirstStageProfile::new(
            policy1.first_stage(Player::One, params, streams.player(Player::One)),
            policy2.first_stage(Player::Two, params, streams.player(Player::Two)),
        )
    });
    let prods = sample_productivities(profile, &mut streams.productivity);
    let attacks = AttackProfile::new(
        policy1.attack(
            Player::One,
            profile,
            prods,
            params,
            streams.player(Player::One),
        ),
        policy2.attack(
            Player::Two,
            profile,
            prods,
            params,
            streams.player(Player::Two),
        ),
    );
    let outcome = resolve_outcome(profile, prods, attacks, params, &mut streams.tie)
        .expect("sampled productivities always match their profile");
    TrialRecord {
        profile,
        prods,
        attacks,
        outcome,
    }
}

#[derive(Clone, Default)]
struct Accumulator {
    seen: u64,
    contested: RunningStat,
    u1: RunningStat,
    u2: RunningStat,
    attacks: RunningStat,
    weak_win: RunningStat,
    total_cost: RunningStat,
    total_utility: RunningStat,
    winner_effective: RunningStat,
    profiles: [u64; 4],
}

impl Accumulator {
    fn record(&mut self, t: &TrialRecord, config: &SimConfig) {
        let params = &config.params;
        self.seen += 1;
        let contested = t.is_contested(params);
        self.contested.push(contested as u8 as f64);
        if config.conditioning == Conditioning::ContestedOnly && !contested {
            return;
        }
        let o = &t.outcome;
        let cost = params.q() * o.attackers as f64;
        self.u1.push(o.u1);
        self.u2.push(o.u2);
        self.attacks.push(o.attackers as f64);
        self.total_cost.push(cost);
        self.total_utility.push(o.u1 + o.u2);
        self.winner_effective.push(o.effective(o.winner));
        if let Some(weak) = t.weaker() {
            self.weak_win.push((o.winner == weak) as u8 as f64);
        }
        let idx = FirstStageProfile::ALL
            .iter()
            .position(|&p| p == t.profile)
            .unwrap();
        self.profiles[idx] += 1;
    }

    fn merge(&mut self, other: &Accumulator) {
        self.seen += other.seen;
        self.contested.merge(&other.contested);
        self.u1.merge(&other.u1);
        self.u2.merge(&other.u2);
        self.attacks.merge(&other.attacks);
        self.weak_win.merge(&other.weak_win);
        self.total_cost.merge(&other.total_cost);
        self.total_utility.merge(&other.total_utility);
        self.winner_effective.merge(&other.winner_effective);
        for (a, b) in self.profiles.iter_mut().zip(other.profiles) {
            *a += b;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub q: f64,
    pub d: f64,
    pub r: f64,
    pub trials: u64,
    pub seed: u64,
    pub partitions: u32,
    pub policy1: String,
    pub policy2: String,
    pub conditioning: Conditioning,
    pub profile: Option<FirstStageProfile>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfileFrequencies {
    #[serde(rename = "CC")]
    pub cc: f64,
    #[serde(rename = "CS")]
    pub cs: f64,
    #[serde(rename = "SC")]
    pub sc: f64,
    #[serde(rename = "SS")]
    pub ss: f64,
}

/// Aggregated batch statistics. Every estimate except `contested_fraction`
/// is taken over the trials kept by the conditioning filter;
/// `weak_win_rate` further skips trials with equal pre-attack productivities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub config: ConfigEcho,
    pub trials_counted: u64,
    pub mean_u1: Estimate,
    pub mean_u2: Estimate,
    pub attack_rate: Estimate,
    pub weak_win_rate: Estimate,
    pub total_cost: Estimate,
    pub total_utility: Estimate,
    pub winner_effective_productivity: Estimate,
    /// Share of all trials (before filtering) that were contested.
    pub contested_fraction: Estimate,
    pub profile_frequencies: ProfileFrequencies,
}

fn partition_sizes(trials: u64, partitions: u32) -> impl Iterator<Item = (u32, u64)> {
    let (base, extra) = (trials / partitions as u64, trials % partitions as u64);
    (0..partitions).map(move |k| (k, base + ((k as u64) < extra) as u64))
}

/// Runs `config.trials` independent games and aggregates them.
pub fn run_batch(config: &SimConfig) -> Result<SimReport> {
    config.validate()?;
    let parts: Vec<(u32, u64)> = partition_sizes(config.trials, config.partitions).collect();
    let accs: Vec<Accumulator> = parts
        .par_iter()
        .map(|&(k, n)| {
            let mut streams = TrialStreams::new(config.seed, k);
            let mut acc = Accumulator::default();
            for _ in 0..n {
                let t = simulate_trial(
                    &config.params,
                    config.policy1.as_ref(),
                    config.policy2.as_ref(),
                    config.forced_profile,
                    &mut streams,
                );
                acc.record(&t, config);
            }
            acc
        })
        .collect();
    let mut total = Accumulator::default();
    for acc in &accs {
        total.merge(acc);
    }

    let counted = total.u1.count();
    let freq = |i: usize| {
        if counted == 0 {
            0.0
        } else {
            total.profiles[i] as f64 / counted as f64
        }
    };
    Ok(SimReport {
        config: ConfigEcho {
            q: config.params.q(),
            d: config.params.d(),
            r: config.params.reward(),
            trials: config.trials,
            seed: config.seed,
            partitions: config.partitions,
            policy1: config.policy1.name().to_string(),
            policy2: config.policy2.name().to_string(),
            conditioning: config.conditioning,
            profile: config.forced_profile,
        },
        trials_counted: counted,
        mean_u1: total.u1.estimate(),
        mean_u2: total.u2.estimate(),
        attack_rate: total.attacks.estimate(),
        weak_win_rate: total.weak_win.estimate(),
        total_cost: total.total_cost.estimate(),
        total_utility: total.total_utility.estimate(),
        winner_effective_productivity: total.winner_effective.estimate(),
        contested_fraction: total.contested.estimate(),
        profile_frequencies: ProfileFrequencies {
            cc: freq(0),
            cs: freq(1),
            sc: freq(2),
            ss: freq(3),
        },
    })
}
