//! Internal consistency of a multi-item scale.

use crate::{Result, StatsError};

fn sample_variance(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Cronbach's alpha of a participants × items matrix (n−1 variances).
pub fn cronbach_alpha(rows: &[Vec<f64>]) -> Result<f64> {
    let n = rows.len();
    let k = rows.first().map_or(0, Vec::len);
    if n < 2 || k < 2 {
        return Err(StatsError::Invalid(format!(
            "need at least 2 participants and 2 items, got {n} x {k}"
        )));
    }
    if rows.iter().any(|r| r.len() != k) {
        return Err(StatsError::Invalid("ragged item matrix".into()));
    }
    let item_var: f64 = (0..k).map(|j| sample_variance(rows.iter().map(move |r| r[j]))).sum();
    let total_var = sample_variance(rows.iter().map(|r| r.iter().sum::<f64>()));
    if total_var == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    let k = k as f64;
    Ok(k / (k - 1.0) * (1.0 - item_var / total_var))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_items_give_one() {
        let m: Vec<Vec<f64>> = [1.0, 3.0, 2.0, 5.0].iter().map(|&x| vec![x, x, x]).collect();
        assert!((cronbach_alpha(&m).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_items_give_zero() {
        let m = vec![vec![1.0, 1.0], vec![5.0, 1.0], vec![1.0, 5.0], vec![5.0, 5.0]];
        assert!(cronbach_alpha(&m).unwrap().abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        let m = vec![vec![3.0, 3.0], vec![3.0, 3.0]];
        assert!(matches!(cronbach_alpha(&m), Err(StatsError::DegenerateVariance)));
        assert!(cronbach_alpha(&[vec![1.0, 2.0]]).is_err());
        assert!(cronbach_alpha(&[vec![1.0], vec![2.0]]).is_err());
    }
}
