//! Descriptive summaries: quartiles and within-subjects confidence intervals.

use serde::{Deserialize, Serialize};

use crate::special::t_quantile;
use crate::{Result, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(xs: &[f64], q: f64) -> f64 {
    let h = (xs.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    xs[lo] + (h - lo as f64) * (xs[hi] - xs[lo])
}

/// Five-number summary plus mean. Empty input yields NaNs.
pub fn quartiles(xs: &[f64]) -> Quartiles {
    if xs.is_empty() {
        let nan = f64::NAN;
        return Quartiles {
            min: nan,
            q1: nan,
            median: nan,
            q3: nan,
            max: nan,
            mean: nan,
        };
    }
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    Quartiles {
        min: s[0],
        q1: quantile_sorted(&s, 0.25),
        median: quantile_sorted(&s, 0.5),
        q3: quantile_sorted(&s, 0.75),
        max: s[s.len() - 1],
        mean: s.iter().sum::<f64>() / s.len() as f64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    pub sd: f64,
    pub ci_half_width: f64,
}

/// Means and within-subjects CIs for a subjects × conditions matrix:
/// each subject's mean is swapped for the grand mean (Cousineau), and the
/// normalized variance is scaled by C/(C−1) (Morey).
pub fn within_subject_ci(rows: &[Vec<f64>], level: f64) -> Result<Vec<MeanCi>> {
    let n = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if n < 2 || c < 2 || rows.iter().any(|r| r.len() != c) {
        return Err(StatsError::Invalid(format!(
            "within-subject CI needs a complete matrix of at least 2 x 2, got {n} x {c}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::Domain(format!("confidence level {level}")));
    }
    let nf = n as f64;
    let grand = rows.iter().flatten().sum::<f64>() / (nf * c as f64);
    let norm: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let m = r.iter().sum::<f64>() / c as f64;
            r.iter().map(|v| v - m + grand).collect()
        })
        .collect();
    let t = t_quantile(0.5 + level / 2.0, nf - 1.0)?;
    let morey = (c as f64 / (c as f64 - 1.0)).sqrt();
    Ok((0..c)
        .map(|j| {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / nf;
            let sd = (rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
            let nm = norm.iter().map(|r| r[j]).sum::<f64>() / nf;
            let nvar = norm.iter().map(|r| (r[j] - nm).powi(2)).sum::<f64>() / (nf - 1.0);
            MeanCi {
                mean,
                sd,
                ci_half_width: t * (nvar / nf).sqrt() * morey,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles_interpolate() {
        let q = quartiles(&[4.0, 1.0, 3.0, 2.0, 5.0]);
        assert_eq!((q.min, q.q1, q.median, q.q3, q.max, q.mean), (1.0, 2.0, 3.0, 4.0, 5.0, 3.0));
        let q = quartiles(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!((q.q1, q.median, q.q3), (1.75, 2.5, 3.25));
    }

    #[test]
    fn subject_offsets_vanish_from_ci() {
        let rows: Vec<Vec<f64>> = (0..5).map(|s| vec![1.0 + s as f64, 2.0 + s as f64, 4.0 + s as f64]).collect();
        let ci = within_subject_ci(&rows, 0.95).unwrap();
        assert!(ci.iter().all(|c| c.ci_half_width.abs() < 1e-12));
        assert_eq!(ci[1].mean, 4.0);
        assert!(ci[1].sd > 1.0);
    }

    #[test]
    fn ci_matches_hand_computation() {
        let rows = vec![vec![1.0, 3.0], vec![2.0, 2.0], vec![3.0, 5.0]];
        // subject means 2, 2, 4; grand 8/3
        let g = 8.0 / 3.0;
        let col0 = [1.0 - 2.0 + g, 2.0 - 2.0 + g, 3.0 - 4.0 + g];
        let m = col0.iter().sum::<f64>() / 3.0;
        let var = col0.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 2.0;
        let want = 4.302652729696142 * (var / 3.0).sqrt() * 2f64.sqrt();
        let ci = within_subject_ci(&rows, 0.95).unwrap();
        assert!((ci[0].ci_half_width - want).abs() < 1e-9);
    }
}
