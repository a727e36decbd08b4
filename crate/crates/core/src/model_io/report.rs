use std::fmt;

use thiserror::Error;

use crate::ceg::Ceg;
use crate::solve::{PropagationState, Strategy};

/// Text form of a solved graph:
///
/// ```text
/// max_expected_utility=10
/// decide root -> a
/// ```
///
/// Decision lines follow the topological order of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub value: f64,
    /// `(position name, chosen label)` pairs.
    pub decisions: Vec<(String, String)>,
}

impl SolveReport {
    pub fn new(ceg: &Ceg, state: &PropagationState, strategy: &Strategy) -> SolveReport {
        let decisions = state
            .order()
            .iter()
            .filter_map(|p| {
                strategy
                    .choices
                    .get(p)
                    .map(|&e| (ceg.position(*p).name.clone(), ceg.edge(e).label.clone()))
            })
            .collect();
        SolveReport {
            value: strategy.value,
            decisions,
        }
    }
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "max_expected_utility={}", self.value)?;
        for (position, label) in &self.decisions {
            writeln!(f, "decide {position} -> {label}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("line {0}: expected `max_expected_utility=<decimal>`")]
    MissingValue(usize),
    #[error("line {0}: expected `decide <position> -> <label>`")]
    BadDecision(usize),
}

pub fn parse_solve_report(text: &str) -> Result<SolveReport, ReportError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let value = match lines.next() {
        Some((n, line)) => line
            .strip_prefix("max_expected_utility=")
            .and_then(|v| v.trim().parse::<f64>().ok())
            .ok_or(ReportError::MissingValue(n))?,
        None => return Err(ReportError::MissingValue(1)),
    };
    let mut decisions = Vec::new();
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (position, label) = line
            .strip_prefix("decide ")
            .and_then(|rest| rest.split_once(" -> "))
            .ok_or(ReportError::BadDecision(n))?;
        decisions.push((position.to_string(), label.to_string()));
    }
    Ok(SolveReport { value, decisions })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let r = SolveReport {
            value: 4.56,
            decisions: vec![
                ("d1".into(), "1".into()),
                ("d2_1_2_1".into(), "1".into()),
            ],
        };
        let text = r.to_string();
        assert_eq!(text, "max_expected_utility=4.56\ndecide d1 -> 1\ndecide d2_1_2_1 -> 1\n");
        assert_eq!(parse_solve_report(&text).unwrap(), r);
    }

    #[test]
    fn errors_name_the_line() {
        assert_eq!(parse_solve_report(""), Err(ReportError::MissingValue(1)));
        assert_eq!(
            parse_solve_report("max_expected_utility=1\ndecide x\n"),
            Err(ReportError::BadDecision(2))
        );
    }
}
