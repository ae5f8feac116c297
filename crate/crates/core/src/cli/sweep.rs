//! (q, d) parameter sweeps written as CSV phase-diagram data.

use std::io::Write;

use rayon::prelude::*;

use super::format::sig12;
use crate::equilibrium::{
    classify_region, contested_payoff_matrix, ex_ante_payoffs, lead_probability,
    overlap_probability, solve_2x2_mixed,
};
use crate::error::{GameError, Result};
use crate::model::GameParams;

/// Column order of the sweep CSV.
pub const SWEEP_COLUMNS: [&str; 11] = [
    "q",
    "d",
    "region",
    "u_cc",
    "u_ss",
    "u_c_vs_s_crowd",
    "u_c_vs_s_closed",
    "overlap_prob",
    "lead_prob",
    "contested_total_utility",
    "weak_win_prob",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub q_grid: Vec<f64>,
    pub d_grid: Vec<f64>,
    /// Indices into [`SWEEP_COLUMNS`], ascending.
    pub outputs: Vec<usize>,
}

/// `n` evenly spaced points covering [0, 1].
pub fn unit_grid(n: usize) -> Result<Vec<f64>> {
    match n {
        0 => Err(GameError::InvalidArgument(
            "grid needs at least one point".into(),
        )),
        1 => Ok(vec![0.0]),
        _ => Ok((0..n).map(|i| i as f64 / (n - 1) as f64).collect()),
    }
}

impl SweepSpec {
    pub fn new(q_grid: Vec<f64>, d_grid: Vec<f64>, columns: Option<&[String]>) -> Result<Self> {
        for (name, grid) in [("q", &q_grid), ("d", &d_grid)] {
            if grid.is_empty() {
                return Err(GameError::InvalidArgument(format!("{name} grid is empty")));
            }
            if let Some(bad) = grid.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(GameError::OutOfRange {
                    name: if name == "q" { "q" } else { "d" },
                    value: *bad,
                });
            }
            if grid.windows(2).any(|w| w[1] < w[0]) {
                return Err(GameError::InvalidArgument(format!(
                    "{name} grid must be sorted ascending"
                )));
            }
        }
        let outputs = match columns {
            None => (0..SWEEP_COLUMNS.len()).collect(),
            Some(cols) => {
                let mut idx = Vec::new();
                for c in cols {
                    let i = SWEEP_COLUMNS.iter().position(|k| k == c).ok_or_else(|| {
                        GameError::InvalidArgument(format!(
                            "unknown column {c:?}; available: {}",
                            SWEEP_COLUMNS.join(",")
                        ))
                    })?;
                    idx.push(i);
                }
                idx.sort_unstable();
                idx.dedup();
                idx
            }
        };
        if outputs.is_empty() {
            return Err(GameError::InvalidArgument("no columns selected".into()));
        }
        Ok(Self {
            q_grid,
            d_grid,
            outputs,
        })
    }

    pub fn header(&self) -> String {
        self.outputs
            .iter()
            .map(|&i| SWEEP_COLUMNS[i])
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// One CSV row, all columns in [`SWEEP_COLUMNS`] order.
pub fn sweep_row(q: f64, d: f64) -> Result<[String; 11]> {
    let params = GameParams::new(q, d)?;
    let table = ex_ante_payoffs(&params);
    let game = contested_payoff_matrix(q)?;
    let mix = solve_2x2_mixed(&game)?;
    let (u_strong, u_weak) = game.expected(&mix);
    // Weak wins only when it attacks and the strong player does not.
    let weak_win = mix.lambda2 * (1.0 - mix.lambda1);
    Ok([
        sig12(q),
        sig12(d),
        classify_region(&params).to_string(),
        sig12(table.cc.u1),
        sig12(table.ss.u1),
        sig12(table.cs.u1),
        sig12(table.cs.u2),
        sig12(overlap_probability(d)?),
        sig12(lead_probability(d)?),
        sig12(u_strong + u_weak),
        sig12(weak_win),
    ])
}

/// Writes the header and one row per (q, d), q-major.
pub fn write_sweep(spec: &SweepSpec, out: &mut dyn Write) -> std::io::Result<()> {
    let points: Vec<(f64, f64)> = spec
        .q_grid
        .iter()
        .flat_map(|&q| spec.d_grid.iter().map(move |&d| (q, d)))
        .collect();
    let rows: Vec<String> = points
        .par_iter()
        .map(|&(q, d)| {
            let row = sweep_row(q, d).expect("grid validated");
            spec.outputs
                .iter()
                .map(|&i| row[i].as_str())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    writeln!(out, "{}", spec.header())?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(q: f64, d: f64) -> [String; 11] {
        sweep_row(q, d).unwrap()
    }

    #[test]
    fn sample_regions() {
        assert_eq!(row(0.95, 0.8)[2], "Both");
        assert_eq!(row(0.5, 0.8)[2], "SSUnique");
        assert_eq!(row(0.5, 0.3)[2], "CCUnique");
    }

    #[test]
    fn zero_damage_cc_half() {
        for q in unit_grid(11).unwrap() {
            assert_eq!(row(q, 0.0)[3], "0.5");
        }
    }

    #[test]
    fn contested_columns() {
        let r = row(0.3, 0.5);
        assert_eq!(r[9], "0.7");
        assert_eq!(r[10], "0.09");
    }

    #[test]
    fn sweep_spec_validation() {
        assert!(SweepSpec::new(vec![], vec![0.5], None).is_err());
        assert!(SweepSpec::new(vec![0.5, 0.2], vec![0.5], None).is_err());
        assert!(SweepSpec::new(vec![0.5], vec![1.5], None).is_err());
        let cols = vec!["region".to_string(), "q".to_string()];
        let s = SweepSpec::new(vec![0.5], vec![0.5], Some(&cols)).unwrap();
        assert_eq!(s.header(), "q,region");
        assert!(SweepSpec::new(vec![0.5], vec![0.5], Some(&["nope".to_string()])).is_err());
    }

    #[test]
    fn writes_rows_in_grid_order() {
        let spec = SweepSpec::new(vec![0.0, 1.0], vec![0.0, 0.5, 1.0], None).unwrap();
        let mut buf = Vec::new();
        write_sweep(&spec, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[0], SWEEP_COLUMNS.join(","));
        assert!(lines[1].starts_with("0,0,CCUnique,0.5,0.5,1,0,0,0.5,1,0"));
        assert!(lines[6].starts_with("1,1,Both,0,"));
    }
}
