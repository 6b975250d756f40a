//! Aligned rank transform ANOVA for mixed designs.
//!
//! For each effect the responses are aligned (residual from the full cell
//! mean plus that effect's estimate), ranked with midranks, and the whole
//! mixed ANOVA is run on the ranks; only the row of the aligned effect is kept.

use serde::{Deserialize, Serialize};

use crate::anova::{AnovaRow, Layout, Observation};
use crate::{Result, StatsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtTable {
    pub within: Vec<String>,
    pub between: String,
    pub rows: Vec<AnovaRow>,
}

impl ArtTable {
    pub fn row(&self, effect: &str) -> Option<&AnovaRow> {
        self.rows.iter().find(|r| r.effect == effect)
    }
}

/// Ranks 1..=n, tied values sharing the mean of their positions. Values
/// within `tol` of the first of a run count as tied.
pub fn midranks(values: &[f64], tol: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] - values[order[i]] <= tol {
            j += 1;
        }
        let r = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = r;
        }
        i = j;
    }
    ranks
}

fn effect_mask(layout: &Layout, effect: &[&str]) -> Result<u32> {
    let mut mask = 0;
    for name in effect {
        let i = layout.names.iter().position(|n| n == name).ok_or_else(|| {
            StatsError::Invalid(format!("unknown factor '{name}' (factors: {})", layout.names.join(", ")))
        })?;
        mask |= 1 << i;
    }
    if mask == 0 {
        return Err(StatsError::Invalid("empty effect".into()));
    }
    Ok(mask)
}

fn aligned(layout: &Layout, y: &[f64], mask: u32) -> Vec<f64> {
    let cell = layout.marginal_means(y, (1 << (layout.k + 1)) - 1);
    let est = layout.effect_estimate(y, mask);
    y.iter().zip(cell).zip(est).map(|((v, c), e)| v - c + e).collect()
}

fn tie_tolerance(values: &[f64]) -> f64 {
    1e-9 * values.iter().fold(1.0_f64, |m, v| m.max(v.abs()))
}

/// Responses aligned for one effect, named by its factors.
pub fn align(obs: &[Observation], within: &[&str], between: &str, effect: &[&str]) -> Result<Vec<f64>> {
    let layout = Layout::build(obs, within, between)?;
    let mask = effect_mask(&layout, effect)?;
    let y: Vec<f64> = obs.iter().map(|o| o.y).collect();
    Ok(aligned(&layout, &y, mask))
}

/// Per-observation estimate of an effect (alternating sum of marginal
/// means) for arbitrary responses laid out like `obs`.
pub fn effect_estimate(
    obs: &[Observation],
    within: &[&str],
    between: &str,
    effect: &[&str],
    y: &[f64],
) -> Result<Vec<f64>> {
    let layout = Layout::build(obs, within, between)?;
    let mask = effect_mask(&layout, effect)?;
    if y.len() != obs.len() {
        return Err(StatsError::Invalid("response vector length mismatch".into()));
    }
    Ok(layout.effect_estimate(y, mask))
}

pub fn art_anova(obs: &[Observation], within: &[&str], between: &str) -> Result<ArtTable> {
    let layout = Layout::build(obs, within, between)?;
    let y: Vec<f64> = obs.iter().map(|o| o.y).collect();
    let rows = layout
        .effects()
        .into_iter()
        .map(|mask| {
            let a = aligned(&layout, &y, mask);
            let ranks = midranks(&a, tie_tolerance(&a));
            let name = layout.effect_name(mask);
            layout
                .analyze(&ranks)
                .rows
                .into_iter()
                .find(|r| r.effect == name)
                .expect("every effect has a row")
        })
        .collect();
    Ok(ArtTable {
        within: layout.names[..layout.k].to_vec(),
        between: layout.names[layout.k].clone(),
        rows,
    })
}
