use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TTestOutcome {
    AGreater,
    BGreater,
    NoDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub outcome: TTestOutcome,
    pub t: f64,
    pub p_value: f64,
    pub df: usize,
    pub mean_difference: f64,
}

/// Two-sided paired t-test on `a - b`. A direction is reported only when
/// `p <= alpha`.
///
/// All-zero differences are reported as no difference with `p = 1`; any
/// other zero-variance difference vector is an error.
pub fn paired_ttest(a: &[f64], b: &[f64], alpha: f64) -> Result<TTestResult> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::LengthMismatch(format!("{} vs {}", a.len(), b.len())));
    }
    let n = a.len();
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let df = n - 1;
    if var == 0.0 {
        if diffs.iter().all(|&d| d == 0.0) {
            return Ok(TTestResult {
                outcome: TTestOutcome::NoDifference,
                t: 0.0,
                p_value: 1.0,
                df,
                mean_difference: 0.0,
            });
        }
        return Err(Error::DegenerateVariance);
    }
    let t = mean / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    let p_value = (2.0 * dist.sf(t.abs())).min(1.0);
    let outcome = if p_value <= alpha {
        if t > 0.0 {
            TTestOutcome::AGreater
        } else {
            TTestOutcome::BGreater
        }
    } else {
        TTestOutcome::NoDifference
    };
    Ok(TTestResult {
        outcome,
        t,
        p_value,
        df,
        mean_difference: mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_vectors() {
        let a = [1.0, 2.0, 3.0];
        let r = paired_ttest(&a, &a, 0.05).unwrap();
        assert_eq!(r.outcome, TTestOutcome::NoDifference);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn constant_shift_is_degenerate() {
        let b = [1.0, 2.0, 3.0, 4.0];
        let a: Vec<f64> = b.iter().map(|v| v + 1.0).collect();
        assert!(matches!(paired_ttest(&a, &b, 0.05), Err(Error::DegenerateVariance)));
    }

    #[test]
    fn textbook_statistic() {
        let a = [5.1, 4.9, 6.2, 5.8, 6.0];
        let b = [4.8, 4.7, 5.6, 5.9, 5.1];
        // d = [0.3, 0.2, 0.6, -0.1, 0.9]
        let d = [0.3f64, 0.2, 0.6, -0.1, 0.9];
        let mean = d.iter().sum::<f64>() / 5.0;
        let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0).sqrt();
        let t = mean / (sd / 5f64.sqrt());
        let r = paired_ttest(&a, &b, 0.05).unwrap();
        assert!((r.t - t).abs() < 1e-9);
        assert_eq!(r.df, 4);
        // t ~ 2.22 with 4 df: not significant at 5%
        assert_eq!(r.outcome, TTestOutcome::NoDifference);
        assert!(r.p_value > 0.05 && r.p_value < 0.2);
    }

    #[test]
    fn clear_difference_has_direction() {
        let a = [3.0, 3.1, 2.9, 3.2, 3.05, 2.95];
        let b = [1.0, 1.2, 0.9, 1.1, 1.0, 1.05];
        assert_eq!(paired_ttest(&a, &b, 0.05).unwrap().outcome, TTestOutcome::AGreater);
        assert_eq!(paired_ttest(&b, &a, 0.05).unwrap().outcome, TTestOutcome::BGreater);
    }

    #[test]
    fn length_mismatch() {
        assert!(paired_ttest(&[1.0, 2.0], &[1.0], 0.05).is_err());
        assert!(paired_ttest(&[1.0], &[1.0], 0.05).is_err());
    }
}
