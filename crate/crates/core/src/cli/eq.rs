use serde::Serialize;

use super::format::sig12;
use crate::equilibrium::{
    classify_region, ex_ante_payoffs, pure_first_stage_equilibria, second_stage_equilibrium,
    PayoffTable, RegionLabel, SecondStageEquilibrium,
};
use crate::error::{GameError, Result};
use crate::model::{FirstStageProfile, GameParams, Player, ProductivityPair};

#[derive(Clone, Debug, Default)]
pub struct EqQuery {
    pub q: f64,
    pub d: f64,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub profile: Option<FirstStageProfile>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SecondStageReport {
    pub profile: FirstStageProfile,
    pub p1: f64,
    pub p2: f64,
    #[serde(flatten)]
    pub equilibrium: SecondStageEquilibrium,
    pub attack_prob_1: f64,
    pub attack_prob_2: f64,
    pub u1: f64,
    pub u2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EqReport {
    pub params: GameParams,
    pub payoffs: PayoffTable,
    pub pure_equilibria: Vec<FirstStageProfile>,
    pub region: RegionLabel,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second_stage: Option<SecondStageReport>,
}

/// Resolves the productivities of a second-stage query. In-house players
/// default to 0; crowdsourcing players must be given explicitly.
fn query_state(query: &EqQuery) -> Result<Option<(FirstStageProfile, ProductivityPair)>> {
    if query.profile.is_none() && query.p1.is_none() && query.p2.is_none() {
        return Ok(None);
    }
    let profile = query.profile.unwrap_or(FirstStageProfile::CC);
    let value = |player: Player, given: Option<f64>| match (profile.crowdsources(player), given) {
        (_, Some(p)) => Ok(p),
        (false, None) => Ok(0.0),
        (true, None) => Err(GameError::InvalidArgument(format!(
            "profile {profile} needs --p{} for the crowdsourcing player",
            player.number()
        ))),
    };
    let prods = ProductivityPair::new(value(Player::One, query.p1)?, value(Player::Two, query.p2)?);
    Ok(Some((profile, prods)))
}

pub fn eq_report(query: &EqQuery) -> Result<EqReport> {
    let params = GameParams::new(query.q, query.d)?;
    let second_stage = match query_state(query)? {
        None => None,
        Some((profile, prods)) => {
            let equilibrium = second_stage_equilibrium(profile, prods, &params)?;
            Some(SecondStageReport {
                profile,
                p1: prods.p1,
                p2: prods.p2,
                attack_prob_1: equilibrium.attack_probability(Player::One),
                attack_prob_2: equilibrium.attack_probability(Player::Two),
                u1: equilibrium.utility(Player::One),
                u2: equilibrium.utility(Player::Two),
                equilibrium,
            })
        }
    };
    Ok(EqReport {
        params,
        payoffs: ex_ante_payoffs(&params),
        pure_equilibria: pure_first_stage_equilibria(&params),
        region: classify_region(&params),
        second_stage,
    })
}

pub fn render_text(report: &EqReport) -> String {
    let mut out = String::new();
    let p = &report.params;
    out += &format!(
        "params           q={} d={} r={}\n",
        sig12(p.q()),
        sig12(p.d()),
        sig12(p.reward())
    );
    out += "payoffs          (u1, u2)\n";
    for profile in FirstStageProfile::ALL {
        let pair = report.payoffs.get(profile);
        out += &format!(
            "  {profile}             {}, {}\n",
            sig12(pair.u1),
            sig12(pair.u2)
        );
    }
    let eqs: Vec<String> = report
        .pure_equilibria
        .iter()
        .map(|p| p.to_string())
        .collect();
    out += &format!("pure_equilibria  {}\n", eqs.join(" "));
    out += &format!("region           {}\n", report.region);
    if let Some(s) = &report.second_stage {
        let e = &s.equilibrium;
        out += &format!(
            "second_stage     profile={} p1={} p2={}\n",
            s.profile,
            sig12(s.p1),
            sig12(s.p2)
        );
        out += &format!("  case           {:?}\n", e.case);
        out += &format!("  strong         player {}\n", e.strong.number());
        out += &format!(
            "  lambda         {}, {}  (strong, weak)\n",
            sig12(e.strategy.lambda1),
            sig12(e.strategy.lambda2)
        );
        out += &format!(
            "  attack_prob    {}, {}  (p1, p2)\n",
            sig12(s.attack_prob_1),
            sig12(s.attack_prob_2)
        );
        out += &format!(
            "  utility        {}, {}  (p1, p2)\n",
            sig12(s.u1),
            sig12(s.u2)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::SubgameCase;

    #[test]
    fn table_only_query() {
        let r = eq_report(&EqQuery {
            q: 0.5,
            d: 0.4,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(r.region, RegionLabel::CCUnique);
        assert!((r.payoffs.cc.u1 - 0.34).abs() < 1e-15);
        assert!(r.second_stage.is_none());
        let text = render_text(&r);
        assert!(text.contains("  CC             0.34, 0.34"), "{text}");
        assert!(text.contains("region           CCUnique"));
    }

    #[test]
    fn contested_query() {
        let r = eq_report(&EqQuery {
            q: 0.4,
            d: 0.3,
            p1: Some(0.6),
            p2: Some(0.5),
            profile: None,
        })
        .unwrap();
        let s = r.second_stage.unwrap();
        assert_eq!(s.equilibrium.case, SubgameCase::Contested);
        assert_eq!((s.attack_prob_1, s.attack_prob_2), (0.6, 0.4));
    }

    #[test]
    fn in_house_productivity_defaults_to_zero() {
        let r = eq_report(&EqQuery {
            q: 0.2,
            d: 0.6,
            p1: Some(0.4),
            p2: None,
            profile: Some(FirstStageProfile::CS),
        })
        .unwrap();
        assert_eq!(r.second_stage.unwrap().attack_prob_2, 1.0);
        let missing = eq_report(&EqQuery {
            q: 0.2,
            d: 0.6,
            p1: None,
            p2: None,
            profile: Some(FirstStageProfile::CS),
        });
        assert!(matches!(missing, Err(GameError::InvalidArgument(_))));
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(matches!(
            eq_report(&EqQuery {
                q: 1.5,
                d: 0.4,
                ..Default::default()
            }),
            Err(GameError::OutOfRange { .. })
        ));
    }
}
