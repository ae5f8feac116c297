//! Cross-checks every closed form against the oracle.

use rayon::prelude::*;

use crate::equilibrium::{self, Bimatrix, MixedAttackStrategy, PayoffTable, RegionLabel};
use crate::model::{FirstStageProfile, GameParams};
use crate::oracle::{self, VerificationReport};

/// The closed forms under test. Every method defaults to the real
/// implementation; test fixtures override one to check that faults surface.
pub trait AnalyticEngine: Sync {
    fn overlap_probability(&self, d: f64) -> f64 {
        equilibrium::overlap_probability(d).expect("d in range")
    }

    fn lead_probability(&self, d: f64) -> f64 {
        equilibrium::lead_probability(d).expect("d in range")
    }

    fn contested_payoff_matrix(&self, q: f64) -> Bimatrix {
        equilibrium::contested_payoff_matrix(q).expect("q in range")
    }

    fn solve_2x2_mixed(&self, game: &Bimatrix) -> MixedAttackStrategy {
        equilibrium::solve_2x2_mixed(game).expect("contested game is solvable")
    }

    fn ex_ante_payoffs(&self, params: &GameParams) -> PayoffTable {
        equilibrium::ex_ante_payoffs(params)
    }

    fn pure_first_stage_equilibria(&self, params: &GameParams) -> Vec<FirstStageProfile> {
        equilibrium::pure_first_stage_equilibria(params)
    }

    fn classify_region(&self, params: &GameParams) -> RegionLabel {
        equilibrium::classify_region(params)
    }
}

/// The shipped closed forms.
pub struct Analytic;

impl AnalyticEngine for Analytic {}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Quadrature grid size per axis.
    pub resolution: usize,
    /// Points per axis of the interior (q, d) scan for first-stage equilibria.
    pub grid: usize,
    /// Points on the [0, 1] grids for q and d in the one-dimensional checks.
    pub points: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            resolution: 2000,
            grid: 51,
            points: 101,
        }
    }
}

pub const QUADRATURE_TOLERANCE: f64 = 2e-3;
pub const EXACT_TOLERANCE: f64 = 1e-12;

fn unit_points(n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.5];
    }
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Keeps the report with the largest error, labelled with its grid point.
fn worst(
    name: &str,
    reports: impl IntoIterator<Item = (String, VerificationReport)>,
) -> VerificationReport {
    reports
        .into_iter()
        .map(|(at, mut r)| {
            r.quantity_name = format!("{name} [worst at {at}]");
            r
        })
        .max_by(|a, b| {
            // Failing (including NaN) reports sort last.
            (!a.passed, a.abs_error)
                .partial_cmp(&(!b.passed, b.abs_error))
                .unwrap_or(std::cmp::Ordering::Less)
        })
        .expect("non-empty grid")
}

fn agreement(name: &str, total: usize, mismatches: &[String]) -> VerificationReport {
    let mut r = VerificationReport::compare(
        format!(
            "{name} [{} grid points{}]",
            total,
            mismatches
                .first()
                .map(|m| format!(", first mismatch at {m}"))
                .unwrap_or_default()
        ),
        total as f64,
        (total - mismatches.len()) as f64,
        0.0,
    );
    r.abs_error = mismatches.len() as f64;
    r
}

/// Runs the whole oracle suite, one report per checked quantity.
pub fn run_verification(
    engine: &dyn AnalyticEngine,
    opts: &VerifyOptions,
) -> Vec<VerificationReport> {
    let ds = unit_points(opts.points);
    let qs = unit_points(opts.points);
    let mut reports = Vec::new();

    // Probability integrals against midpoint quadrature and exact polygon areas.
    let quad: Vec<(f64, f64, f64)> = ds
        .par_iter()
        .map(|&d| {
            (
                d,
                oracle::quadrature_overlap(d, opts.resolution),
                oracle::quadrature_lead(d, opts.resolution),
            )
        })
        .collect();
    reports.push(worst(
        "overlap_probability vs quadrature",
        quad.iter().map(|&(d, o, _)| {
            (
                format!("d={d}"),
                VerificationReport::compare(
                    "",
                    engine.overlap_probability(d),
                    o,
                    QUADRATURE_TOLERANCE,
                ),
            )
        }),
    ));
    reports.push(worst(
        "lead_probability vs quadrature",
        quad.iter().map(|&(d, _, l)| {
            (
                format!("d={d}"),
                VerificationReport::compare(
                    "",
                    engine.lead_probability(d),
                    l,
                    QUADRATURE_TOLERANCE,
                ),
            )
        }),
    ));
    reports.push(worst(
        "overlap_probability vs polygon area",
        ds.iter().map(|&d| {
            let r = VerificationReport::compare(
                "",
                engine.overlap_probability(d),
                oracle::geometric_overlap(d),
                EXACT_TOLERANCE,
            );
            (format!("d={d}"), r)
        }),
    ));
    reports.push(worst(
        "lead_probability vs polygon area",
        ds.iter().map(|&d| {
            let r = VerificationReport::compare(
                "",
                engine.lead_probability(d),
                oracle::geometric_lead(d),
                EXACT_TOLERANCE,
            );
            (format!("d={d}"), r)
        }),
    ));
    reports.push(worst(
        "overlap_probability + lead_probability = 1/2",
        ds.iter().map(|&d| {
            let sum = engine.overlap_probability(d) + engine.lead_probability(d);
            (
                format!("d={d}"),
                VerificationReport::compare("", sum, 0.5, EXACT_TOLERANCE),
            )
        }),
    ));

    // Contested subgame: solver output must be an equilibrium and match (1-q, q).
    let solved: Vec<(f64, Bimatrix, MixedAttackStrategy)> = qs
        .iter()
        .map(|&q| {
            let game = engine.contested_payoff_matrix(q);
            (q, game, engine.solve_2x2_mixed(&game))
        })
        .collect();
    reports.push(worst(
        "solve_2x2_mixed best response",
        solved.iter().map(|(q, game, s)| {
            (
                format!("q={q}"),
                oracle::best_response_check_2x2(game, s, 1001),
            )
        }),
    ));
    reports.push(worst(
        "solve_2x2_mixed lambda1 = 1 - q",
        solved.iter().map(|(q, _, s)| {
            (
                format!("q={q}"),
                VerificationReport::compare("", s.lambda1, 1.0 - q, EXACT_TOLERANCE),
            )
        }),
    ));
    reports.push(worst(
        "solve_2x2_mixed lambda2 = q",
        solved.iter().map(|(q, _, s)| {
            (
                format!("q={q}"),
                VerificationReport::compare("", s.lambda2, *q, EXACT_TOLERANCE),
            )
        }),
    ));

    let stats: Vec<(f64, oracle::ContestedStatistics)> = solved
        .iter()
        .map(|(q, _, s)| (*q, oracle::enumerate_contested_statistics(*q, s)))
        .collect();
    reports.push(worst(
        "expected attacks = 1",
        stats.iter().map(|(q, s)| {
            (
                format!("q={q}"),
                VerificationReport::compare("", 1.0, s.expected_attacks, EXACT_TOLERANCE),
            )
        }),
    ));
    reports.push(worst(
        "weak-win probability = q^2",
        stats.iter().map(|(q, s)| {
            (
                format!("q={q}"),
                VerificationReport::compare("", q * q, s.weak_win_probability, EXACT_TOLERANCE),
            )
        }),
    ));
    reports.push(worst(
        "contested total utility = 1 - q",
        stats.iter().map(|(q, s)| {
            (
                format!("q={q}"),
                VerificationReport::compare("", 1.0 - q, s.total_utility, EXACT_TOLERANCE),
            )
        }),
    ));

    // First stage: payoff table and equilibrium sets on the full square.
    let square: Vec<GameParams> = qs
        .iter()
        .flat_map(|&q| {
            ds.iter()
                .map(move |&d| GameParams::new(q, d).expect("unit grid"))
        })
        .collect();
    reports.push(worst(
        "ex_ante_payoffs vs brute force",
        square.iter().map(|p| {
            let table = engine.ex_ante_payoffs(p);
            let brute = oracle::brute_force_payoffs(p);
            let err = FirstStageProfile::ALL
                .iter()
                .zip(brute)
                .map(|(&profile, (b1, b2))| {
                    let pair = table.get(profile);
                    (pair.u1 - b1).abs().max((pair.u2 - b2).abs())
                })
                .fold(0.0, f64::max);
            let r = VerificationReport::compare("", err, 0.0, EXACT_TOLERANCE);
            (format!("q={} d={}", p.q(), p.d()), r)
        }),
    ));

    // Interior scan, skipping points on the CC threshold curve.
    let interior: Vec<GameParams> = (1..=opts.grid)
        .flat_map(|i| (1..=opts.grid).map(move |j| (i, j)))
        .map(|(i, j)| {
            let step = 1.0 / (opts.grid + 1) as f64;
            GameParams::new(i as f64 * step, j as f64 * step).expect("interior grid")
        })
        .filter(|p| p.d() < 0.5 || (p.q() - equilibrium::cc_cost_threshold(p.d())).abs() > 1e-9)
        .collect();
    let brute_sets: Vec<Vec<FirstStageProfile>> = interior
        .par_iter()
        .map(oracle::exhaustive_first_stage_check)
        .collect();
    let label = |p: &GameParams| format!("q={} d={}", p.q(), p.d());
    let region_misses: Vec<String> = interior
        .iter()
        .zip(&brute_sets)
        .filter(|(p, b)| engine.classify_region(p).profiles() != **b)
        .map(|(p, _)| label(p))
        .collect();
    reports.push(agreement(
        "classify_region vs exhaustive_first_stage_check",
        interior.len(),
        &region_misses,
    ));
    let eq_misses: Vec<String> = interior
        .iter()
        .zip(&brute_sets)
        .filter(|(p, b)| engine.pure_first_stage_equilibria(p) != **b)
        .map(|(p, _)| label(p))
        .collect();
    reports.push(agreement(
        "pure_first_stage_equilibria vs exhaustive_first_stage_check",
        interior.len(),
        &eq_misses,
    ));

    reports
}

pub fn render_report(r: &VerificationReport) -> String {
    format!(
        "{} {}: closed_form={:e} oracle={:e} abs_error={:e} tolerance={:e}",
        if r.passed { "PASS" } else { "FAIL" },
        r.quantity_name,
        r.closed_form,
        r.oracle_value,
        r.abs_error,
        r.tolerance
    )
}
