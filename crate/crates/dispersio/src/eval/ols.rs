//! Least-squares fitting for one or two predictors.
//!
//! Solves the normal equations on a centered, column-scaled system; with at
//! most two predictors the conditioning is manageable and the solution is
//! closed-form. R² comes from the residual sum of squares of that fit.

use super::matrix::PredictorMatrix;
use super::EvalError;

/// Correlation magnitude beyond which two predictors count as collinear.
const COLLINEARITY_LIMIT: f64 = 1.0 - 1e-12;

/// Fitted coefficients and fit quality for one model.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionReport {
    /// Intercept first, then one slope per predictor column (raw scale).
    pub coefficients: Vec<f64>,
    pub r2: f64,
    pub adj_r2: f64,
    /// Rows.
    pub n: usize,
    /// Predictor count (1 or 2).
    pub p: usize,
    /// Set when a predictor column was constant; the model then reports
    /// R² = 0 with zero slopes.
    pub degenerate: bool,
}

/// Adjusted R²: `1 - (1 - r2) * (n - 1) / (n - p - 1)`.
///
/// Penalizes extra predictors; equals `r2` when `r2` is 1. Requires
/// `n > p + 1`.
pub fn adjusted_r2(r2: f64, n: usize, p: usize) -> f64 {
    assert!(n > p + 1, "adjusted R² needs n > p + 1 (n = {n}, p = {p})");
    1.0 - (1.0 - r2) * (n as f64 - 1.0) / (n as f64 - p as f64 - 1.0)
}

pub fn fit_ols(matrix: &PredictorMatrix) -> Result<RegressionReport, EvalError> {
    let n = matrix.gold.len();
    let p = matrix.columns.len();
    if n <= p + 1 {
        return Err(EvalError::TooFewRows { n, p });
    }

    let y_mean = mean(&matrix.gold);
    let yc: Vec<f64> = matrix.gold.iter().map(|y| y - y_mean).collect();
    let syy: f64 = yc.iter().map(|y| y * y).sum();
    if syy == 0.0 {
        return Err(EvalError::ZeroVarianceGold);
    }

    let mut means = Vec::with_capacity(p);
    let mut centered: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut norms = Vec::with_capacity(p);
    for column in &matrix.columns {
        let m = mean(&column.values);
        let c: Vec<f64> = column.values.iter().map(|x| x - m).collect();
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        means.push(m);
        centered.push(c);
        norms.push(norm);
    }

    if norms.iter().any(|&norm| norm == 0.0) {
        // constant predictor: degenerate fit, zero slopes, intercept at the
        // gold mean
        let mut coefficients = vec![y_mean];
        coefficients.extend(std::iter::repeat(0.0).take(p));
        return Ok(RegressionReport {
            coefficients,
            r2: 0.0,
            adj_r2: adjusted_r2(0.0, n, p),
            n,
            p,
            degenerate: true,
        });
    }

    let units: Vec<Vec<f64>> = centered
        .iter()
        .zip(&norms)
        .map(|(c, &norm)| c.iter().map(|x| x / norm).collect())
        .collect();

    let (explained, scaled_slopes) = match p {
        1 => {
            let c1 = dot(&units[0], &yc);
            (c1 * c1, vec![c1])
        }
        2 => {
            let r12 = dot(&units[0], &units[1]);
            if r12.abs() > COLLINEARITY_LIMIT {
                return Err(EvalError::Collinear(
                    matrix.columns[0].tag.clone(),
                    matrix.columns[1].tag.clone(),
                ));
            }
            let c1 = dot(&units[0], &yc);
            let c2 = dot(&units[1], &yc);
            let det = 1.0 - r12 * r12;
            let a1 = (c1 - r12 * c2) / det;
            let a2 = (c2 - r12 * c1) / det;
            (a1 * c1 + a2 * c2, vec![a1, a2])
        }
        other => {
            return Err(EvalError::BadPredictorSpec(format!(
                "{other} predictors; 1 or 2 supported"
            )))
        }
    };

    let r2 = (explained / syy).clamp(0.0, 1.0);
    let slopes: Vec<f64> = scaled_slopes
        .iter()
        .zip(&norms)
        .map(|(a, &norm)| a / norm)
        .collect();
    let intercept = y_mean
        - slopes
            .iter()
            .zip(&means)
            .map(|(b, m)| b * m)
            .sum::<f64>();
    let mut coefficients = vec![intercept];
    coefficients.extend(slopes);
    Ok(RegressionReport {
        coefficients,
        r2,
        adj_r2: adjusted_r2(r2, n, p),
        n,
        p,
        degenerate: false,
    })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::super::matrix::{PredictorColumn, PredictorMatrix};
    use super::*;
    use approx::assert_abs_diff_eq;

    fn matrix(columns: Vec<(&str, Vec<f64>)>, gold: Vec<f64>) -> PredictorMatrix {
        PredictorMatrix {
            dataset: "test".to_string(),
            columns: columns
                .into_iter()
                .map(|(tag, values)| PredictorColumn {
                    tag: tag.to_string(),
                    values,
                })
                .collect(),
            gold,
        }
    }

    #[test]
    fn exact_line_gives_r2_one() {
        let m = matrix(vec![("x", vec![0.0, 1.0, 2.0])], vec![1.0, 3.0, 5.0]);
        let report = fit_ols(&m).unwrap();
        assert_abs_diff_eq!(report.r2, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(report.adj_r2, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(report.coefficients[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.coefficients[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn hand_computed_simple_regression() {
        let m = matrix(vec![("x", vec![0.0, 1.0, 2.0])], vec![0.0, 0.0, 3.0]);
        let report = fit_ols(&m).unwrap();
        assert_abs_diff_eq!(report.coefficients[1], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(report.r2, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(report.adj_r2, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn useless_second_predictor_keeps_r2_and_lowers_adj() {
        // y depends only on x1; x2 is orthogonal noise
        let x1 = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let x2 = vec![0.3, -0.1, 0.2, -0.3, 0.1, -0.2];
        let y: Vec<f64> = x1.iter().map(|x| 2.0 * x + 1.0).collect();
        let single = fit_ols(&matrix(vec![("x1", x1.clone())], y.clone())).unwrap();
        let joint = fit_ols(&matrix(vec![("x1", x1), ("x2", x2)], y)).unwrap();
        assert!(joint.r2 >= single.r2 - 1e-12);
        assert!(joint.adj_r2 <= single.adj_r2 + 1e-12);
    }

    #[test]
    fn constant_predictor_is_degenerate() {
        let m = matrix(vec![("x", vec![2.0, 2.0, 2.0, 2.0])], vec![1.0, 2.0, 3.0, 4.0]);
        let report = fit_ols(&m).unwrap();
        assert!(report.degenerate);
        assert_eq!(report.r2, 0.0);
        assert_eq!(report.coefficients[1], 0.0);
        assert_abs_diff_eq!(report.coefficients[0], 2.5, epsilon = 1e-12);
    }

    #[test]
    fn collinear_predictors_rejected_by_name() {
        let x: Vec<f64> = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let x2: Vec<f64> = x.iter().map(|v| 3.0 * v - 7.0).collect();
        let y = vec![1.0, 2.0, 2.5, 4.0, 5.5];
        match fit_ols(&matrix(vec![("a", x), ("b", x2)], y)).unwrap_err() {
            EvalError::Collinear(a, b) => {
                assert_eq!(a, "a");
                assert_eq!(b, "b");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn zero_variance_gold_rejected() {
        let m = matrix(vec![("x", vec![0.0, 1.0, 2.0])], vec![5.0, 5.0, 5.0]);
        assert!(matches!(
            fit_ols(&m).unwrap_err(),
            EvalError::ZeroVarianceGold
        ));
    }

    #[test]
    fn too_few_rows_rejected() {
        let m = matrix(vec![("x", vec![0.0, 1.0])], vec![1.0, 2.0]);
        assert!(matches!(
            fit_ols(&m).unwrap_err(),
            EvalError::TooFewRows { n: 2, p: 1 }
        ));
    }

    #[test]
    fn adjusted_r2_fixtures() {
        assert_eq!(adjusted_r2(1.0, 10, 1), 1.0);
        assert_abs_diff_eq!(adjusted_r2(0.5, 101, 1), 49.0 / 99.0, epsilon = 1e-12);
        assert_abs_diff_eq!(adjusted_r2(0.5, 101, 2), 1.0 - 0.5 * 100.0 / 98.0, epsilon = 1e-12);
    }

    #[test]
    fn adjusted_r2_decreases_with_more_predictors() {
        for &r2 in &[0.0, 0.3, 0.77, 0.999] {
            assert!(adjusted_r2(r2, 50, 2) < adjusted_r2(r2, 50, 1));
        }
    }

    #[test]
    fn residuals_orthogonal_to_predictors() {
        let x1 = vec![0.4, 1.9, 2.7, 3.1, 4.8, 6.2, 7.0];
        let x2 = vec![1.0, -0.5, 0.7, 2.2, -1.0, 0.3, 1.4];
        let y = vec![2.0, 3.5, 4.1, 6.3, 5.2, 8.8, 9.9];
        let m = matrix(vec![("x1", x1.clone()), ("x2", x2.clone())], y.clone());
        let report = fit_ols(&m).unwrap();
        let fitted: Vec<f64> = (0..y.len())
            .map(|i| {
                report.coefficients[0]
                    + report.coefficients[1] * x1[i]
                    + report.coefficients[2] * x2[i]
            })
            .collect();
        let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(y, f)| y - f).collect();
        let res_sum: f64 = residuals.iter().sum();
        assert_abs_diff_eq!(res_sum, 0.0, epsilon = 1e-9);
        for xs in [&x1, &x2] {
            let norm = xs.iter().map(|v| v * v).sum::<f64>().sqrt();
            let dot: f64 = xs.iter().zip(&residuals).map(|(x, r)| x * r).sum();
            assert_abs_diff_eq!(dot / norm, 0.0, epsilon = 1e-9);
        }
    }
}
