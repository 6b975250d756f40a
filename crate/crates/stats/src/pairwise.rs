//! Planned comparisons: paired or pooled two-sample t tests with Bonferroni
//! adjustment and effect size r.

use serde::{Deserialize, Serialize};

use crate::special::t_two_tailed;
use crate::{Result, StatsError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub mean_diff: f64,
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sum_sq_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum()
}

/// t = mean(d) / (sd(d)/√n) over d = a − b.
pub fn paired_t(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(StatsError::Invalid(format!(
            "paired samples need equal lengths >= 2, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let md = mean(&d);
    let var = sum_sq_dev(&d) / (n - 1.0);
    if var <= 1e-24 * (1.0 + md * md) {
        return Err(StatsError::ZeroVariance);
    }
    let t = md / (var / n).sqrt();
    let df = n - 1.0;
    Ok(TTest {
        mean_diff: md,
        t,
        df,
        p: t_two_tailed(t, df)?,
    })
}

/// Student t with pooled variance.
pub fn independent_t(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::Invalid("each group needs at least 2 values".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let df = na + nb - 2.0;
    let pooled = (sum_sq_dev(a) + sum_sq_dev(b)) / df;
    let md = mean(a) - mean(b);
    if pooled <= 1e-24 * (1.0 + md * md) {
        return Err(StatsError::ZeroVariance);
    }
    let t = md / (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    Ok(TTest {
        mean_diff: md,
        t,
        df,
        p: t_two_tailed(t, df)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    Paired,
    Independent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSpec {
    pub label_a: String,
    pub label_b: String,
    pub kind: PairKind,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseResult {
    pub label_a: String,
    pub label_b: String,
    pub kind: PairKind,
    /// Mean difference a − b.
    pub m: f64,
    pub t: Option<f64>,
    pub df: f64,
    pub p_raw: Option<f64>,
    pub p_adjusted: Option<f64>,
    pub r: Option<f64>,
    /// Set when the differences have no variance, so no t exists.
    pub zero_variance: bool,
}

/// Runs every comparison and applies Bonferroni over `family_size`.
pub fn pairwise(pairs: &[PairSpec], family_size: usize) -> Result<Vec<PairwiseResult>> {
    if family_size < pairs.len().max(1) {
        return Err(StatsError::Invalid(format!(
            "family size {family_size} smaller than the {} comparisons run",
            pairs.len()
        )));
    }
    pairs
        .iter()
        .map(|pair| {
            let test = match pair.kind {
                PairKind::Paired => paired_t(&pair.a, &pair.b),
                PairKind::Independent => independent_t(&pair.a, &pair.b),
            };
            let base = PairwiseResult {
                label_a: pair.label_a.clone(),
                label_b: pair.label_b.clone(),
                kind: pair.kind,
                m: mean(&pair.a) - mean(&pair.b),
                t: None,
                df: match pair.kind {
                    PairKind::Paired => pair.a.len() as f64 - 1.0,
                    PairKind::Independent => (pair.a.len() + pair.b.len()) as f64 - 2.0,
                },
                p_raw: None,
                p_adjusted: None,
                r: None,
                zero_variance: false,
            };
            match test {
                Ok(tt) => Ok(PairwiseResult {
                    m: tt.mean_diff,
                    t: Some(tt.t),
                    df: tt.df,
                    p_raw: Some(tt.p),
                    p_adjusted: Some((tt.p * family_size as f64).min(1.0)),
                    r: Some((tt.t * tt.t / (tt.t * tt.t + tt.df)).sqrt()),
                    ..base
                }),
                Err(StatsError::ZeroVariance) => Ok(PairwiseResult {
                    zero_variance: true,
                    ..base
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}
