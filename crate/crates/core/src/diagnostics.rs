//! Median-target selection and acceptance diagnostics for draw sets.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::identify::DrawSet;
use crate::stats::{self, ZERO_VARIANCE_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("draw set has no accepted draws")]
    EmptyDrawSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MedianTargetResult {
    pub chosen_index: usize,
    pub criterion_value: f64,
    pub median_irf: DMatrix<f64>,
    /// Per-cell standard deviation across draws; zero cells are skipped.
    pub standardizers: DMatrix<f64>,
}

/// Score of one response array against the target.
pub fn median_target_score(irf: &DMatrix<f64>, median: &DMatrix<f64>, scale: &DMatrix<f64>) -> f64 {
    let mut s = 0.0;
    for ((x, m), sd) in irf.iter().zip(median.iter()).zip(scale.iter()) {
        if *sd >= ZERO_VARIANCE_TOL {
            let z = (x - m) / sd;
            s += z * z;
        }
    }
    s
}

/// Picks the accepted draw closest to the cellwise median.
pub fn median_target(draws: &DrawSet) -> Result<MedianTargetResult, DiagnosticsError> {
    let irfs: Vec<&DMatrix<f64>> = draws.accepted.iter().map(|d| &d.irf).collect();
    median_target_of(&irfs)
}

/// As [`median_target`] on bare response arrays.
pub fn median_target_of(irfs: &[&DMatrix<f64>]) -> Result<MedianTargetResult, DiagnosticsError> {
    let first = irfs.first().ok_or(DiagnosticsError::EmptyDrawSet)?;
    let (n, c) = first.shape();
    let mut median = DMatrix::zeros(n, c);
    let mut scale = DMatrix::zeros(n, c);
    let mut cell = Vec::with_capacity(irfs.len());
    for v in 0..n {
        for h in 0..c {
            cell.clear();
            cell.extend(irfs.iter().map(|m| m[(v, h)]));
            median[(v, h)] = stats::median(&cell);
            scale[(v, h)] = stats::std_population(&cell);
        }
    }
    let scores: Vec<f64> = irfs
        .par_iter()
        .map(|m| median_target_score(m, &median, &scale))
        .collect();
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s < scores[best] {
            best = i;
        }
    }
    Ok(MedianTargetResult {
        chosen_index: best,
        criterion_value: scores[best],
        median_irf: median,
        standardizers: scale,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintViolation {
    pub variable_id: String,
    pub count: usize,
    /// Share of rejected draws violating this constraint.
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptanceReport {
    pub n_attempted: usize,
    pub n_accepted: usize,
    pub acceptance_rate: f64,
    pub violations: Vec<ConstraintViolation>,
    /// Penalty quantiles at 0, 0.25, 0.5, 0.75 and 1.
    pub penalty_quantiles: Vec<f64>,
    pub n_satisfying: usize,
}

pub fn acceptance_report(draws: &DrawSet) -> AcceptanceReport {
    let rejected = draws.n_rejected;
    let violations = draws
        .spec
        .constraints()
        .iter()
        .zip(&draws.violation_counts)
        .map(|(c, &count)| ConstraintViolation {
            variable_id: c.variable_id.clone(),
            count,
            frequency: if rejected == 0 {
                0.0
            } else {
                count as f64 / rejected as f64
            },
        })
        .collect();
    let pens: Vec<f64> = draws.accepted.iter().map(|d| d.penalty).collect();
    let penalty_quantiles = if pens.is_empty() {
        Vec::new()
    } else {
        [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|q| stats::quantile(&pens, *q))
            .collect()
    };
    AcceptanceReport {
        n_attempted: draws.n_attempted,
        n_accepted: draws.accepted.len(),
        acceptance_rate: draws.acceptance_rate(),
        violations,
        penalty_quantiles,
        n_satisfying: draws.accepted.iter().filter(|d| d.satisfies).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identify::{identify_shock, IdentifyConfig, Sign, SignConstraint, SignRestrictionSpec};
    use crate::var::VarModel;
    use nalgebra::DVector;

    fn v() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 3, &[1.0, 0.5, 0.25, -0.3, 0.2, 0.1])
    }

    #[test]
    fn middle_of_three() {
        let a = v();
        let b = v() * 2.0;
        let c = v() * 3.0;
        let r = median_target_of(&[&a, &b, &c]).unwrap();
        assert_eq!(r.chosen_index, 1);
        assert_eq!(r.criterion_value, 0.0);
        let r = median_target_of(&[&c, &a, &b]).unwrap();
        assert_eq!(r.chosen_index, 2);
    }

    #[test]
    fn singleton_scores_zero() {
        let a = v();
        let r = median_target_of(&[&a]).unwrap();
        assert_eq!((r.chosen_index, r.criterion_value), (0, 0.0));
        assert!(median_target_of(&[]).is_err());
    }

    #[test]
    fn tie_goes_to_lowest_index() {
        let a = v();
        let b = v() * 3.0;
        let r = median_target_of(&[&a, &b]).unwrap();
        assert_eq!(r.chosen_index, 0);
    }

    #[test]
    fn rescaling_cells_keeps_choice() {
        let draws: Vec<DMatrix<f64>> = (0..7)
            .map(|i| DMatrix::from_fn(2, 3, |r, c| ((i * 5 + r * 3 + c * 7) % 11) as f64 - 4.0))
            .collect();
        let refs: Vec<&DMatrix<f64>> = draws.iter().collect();
        let base = median_target_of(&refs).unwrap().chosen_index;
        let w = DMatrix::from_row_slice(2, 3, &[2.0, 0.1, 7.0, 1.5, 3.0, 0.01]);
        let scaled: Vec<DMatrix<f64>> = draws.iter().map(|d| d.component_mul(&w)).collect();
        let refs: Vec<&DMatrix<f64>> = scaled.iter().collect();
        assert_eq!(median_target_of(&refs).unwrap().chosen_index, base);
    }

    #[test]
    fn report_attributes_violations() {
        // "a" responds to the shock with the opposite sign of "b" on impact
        // only through α; with + on a and no constraint that can bind on b
        let model = VarModel::from_parts(
            &["a", "b"],
            DVector::zeros(2),
            vec![DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.5]))],
            DMatrix::identity(2, 2),
        );
        let spec = SignRestrictionSpec::new(vec![
            SignConstraint {
                variable_id: "a".into(),
                sign: Sign::Positive,
                horizon_lo: 0,
                horizon_hi: 2,
            },
            SignConstraint {
                variable_id: "b".into(),
                sign: Sign::Unrestricted,
                horizon_lo: 0,
                horizon_hi: 2,
            },
        ])
        .unwrap();
        let d = identify_shock(&model, &spec, &IdentifyConfig::rejection(400, 2, 3)).unwrap();
        let r = acceptance_report(&d);
        assert_eq!(r.violations[0].frequency, 1.0);
        assert_eq!(r.violations[1].count, 0);
        assert_eq!(r.n_accepted + d.n_rejected, 400);
        assert_eq!(r.penalty_quantiles.len(), 5);
    }
}
