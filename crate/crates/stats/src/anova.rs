//! Split-plot ANOVA: one between-subjects factor, any number of crossed
//! within-subjects factors, each subject observed once in every within cell.
//!
//! Every sum of squares comes from marginal means. With `M(F)` the sum over
//! observations of (mean of the observations sharing F's levels − grand)²,
//! a within effect E gets Σ_{G⊆E} (−1)^{|E|−|G|} M(G), its interaction with
//! the between factor B gets the same alternating sum of M(G∪B) − M(G), and
//! its error stratum the sum of M(G∪S) − M(G∪B), S being subjects.
//! Group sizes may differ; the strata then follow a sequential (B first)
//! decomposition and still add up to the total.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::special::f_upper_tail;
use crate::{Result, StatsError};

/// One response of one subject in one within-subjects cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub subject: String,
    /// Level of the between-subjects factor.
    pub group: String,
    /// Levels of the within-subjects factors, in factor order.
    pub within: Vec<String>,
    pub y: f64,
}

mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaRow {
    pub effect: String,
    pub ss: f64,
    pub df: u64,
    pub ms: f64,
    /// Infinite (written as null) when the effect is nonzero and its error
    /// stratum is exactly zero.
    #[serde(with = "finite_or_null")]
    pub f: f64,
    pub p: f64,
    pub partial_eta_sq: f64,
    pub error_term: String,
    pub error_df: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStratum {
    pub name: String,
    pub ss: f64,
    pub df: u64,
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable {
    pub within: Vec<String>,
    pub between: String,
    pub subjects: usize,
    pub rows: Vec<AnovaRow>,
    pub errors: Vec<ErrorStratum>,
    pub ss_total: f64,
}

impl AnovaTable {
    pub fn row(&self, effect: &str) -> Option<&AnovaRow> {
        self.rows.iter().find(|r| r.effect == effect)
    }

    pub fn error(&self, name: &str) -> Option<&ErrorStratum> {
        self.errors.iter().find(|e| e.name == name)
    }
}

/// Factor coding shared by the plain and the rank-transformed analyses.
/// Bits `0..k` of an effect mask are the within factors, bit `k` the
/// between factor and bit `k + 1` subjects.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub names: Vec<String>,
    pub k: usize,
    /// Level count per column (within factors, groups, subjects).
    radix: Vec<usize>,
    /// Per observation: one code per column.
    codes: Vec<Vec<usize>>,
}

pub(crate) fn bits(mask: u32) -> u32 {
    mask.count_ones()
}

/// All submasks of `mask`, empty set included.
pub(crate) fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

fn sign(outer: u32, inner: u32) -> f64 {
    if (bits(outer) - bits(inner)) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn intern(levels: &mut Vec<String>, s: &str) -> usize {
    match levels.iter().position(|l| l == s) {
        Some(i) => i,
        None => {
            levels.push(s.to_string());
            levels.len() - 1
        }
    }
}

impl Layout {
    pub fn build(obs: &[Observation], within: &[&str], between: &str) -> Result<Layout> {
        let k = within.len();
        if k == 0 || k > 8 {
            return Err(StatsError::Invalid(format!("need 1 to 8 within factors, got {k}")));
        }
        if obs.is_empty() {
            return Err(StatsError::Invalid("no observations".into()));
        }
        let mut levels: Vec<Vec<String>> = vec![Vec::new(); k + 2];
        let mut group_of: Vec<usize> = Vec::new();
        let mut codes = Vec::with_capacity(obs.len());
        for o in obs {
            if o.within.len() != k {
                return Err(StatsError::Invalid(format!(
                    "subject {} has {} within levels, expected {k}",
                    o.subject,
                    o.within.len()
                )));
            }
            if !o.y.is_finite() {
                return Err(StatsError::Invalid(format!("subject {}: non-finite response", o.subject)));
            }
            let mut c: Vec<usize> = o.within.iter().enumerate().map(|(i, l)| intern(&mut levels[i], l)).collect();
            let g = intern(&mut levels[k], &o.group);
            let s = intern(&mut levels[k + 1], &o.subject);
            if s == group_of.len() {
                group_of.push(g);
            } else if group_of[s] != g {
                return Err(StatsError::Unbalanced(format!(
                    "subject {} appears in {between} levels {} and {}",
                    o.subject, levels[k][group_of[s]], o.group
                )));
            }
            c.push(g);
            c.push(s);
            codes.push(c);
        }
        for (i, name) in within.iter().chain(std::iter::once(&between)).enumerate() {
            if levels[i].len() < 2 {
                return Err(StatsError::InsufficientReplication(format!(
                    "factor {name} has {} level(s), need at least 2",
                    levels[i].len()
                )));
            }
        }
        let radix: Vec<usize> = levels.iter().map(Vec::len).collect();
        let cells: usize = radix[..k].iter().product();
        let n_subj = radix[k + 1];
        let mut seen = vec![false; cells * n_subj];
        for (o, c) in obs.iter().zip(&codes) {
            let cell = c[..k].iter().zip(&radix).fold(0, |acc, (&ci, &r)| acc * r + ci);
            let slot = &mut seen[c[k + 1] * cells + cell];
            if *slot {
                return Err(StatsError::Unbalanced(format!(
                    "subject {} has more than one response in cell {}",
                    o.subject,
                    o.within.join("/")
                )));
            }
            *slot = true;
        }
        for (s, row) in seen.chunks(cells).enumerate() {
            if let Some(cell) = row.iter().position(|&b| !b) {
                let mut rest = cell;
                let mut lv = vec![String::new(); k];
                for i in (0..k).rev() {
                    lv[i] = levels[i][rest % radix[i]].clone();
                    rest /= radix[i];
                }
                return Err(StatsError::Unbalanced(format!(
                    "subject {} has no response in cell {}",
                    levels[k + 1][s],
                    lv.join("/")
                )));
            }
        }
        let mut group_sizes = vec![0usize; radix[k]];
        for &g in &group_of {
            group_sizes[g] += 1;
        }
        for (g, &n) in group_sizes.iter().enumerate() {
            if n < 2 {
                return Err(StatsError::InsufficientReplication(format!(
                    "{between} level {} has {n} subject(s), need at least 2",
                    levels[k][g]
                )));
            }
        }
        let names = within.iter().map(|s| s.to_string()).chain([between.to_string()]).collect();
        Ok(Layout {
            names,
            k,
            radix,
            codes,
        })
    }

    pub fn n_subjects(&self) -> usize {
        self.radix[self.k + 1]
    }

    pub fn groups(&self) -> usize {
        self.radix[self.k]
    }

    fn key(&self, c: &[usize], mask: u32) -> usize {
        (0..self.k + 2)
            .filter(|i| mask & (1 << i) != 0)
            .fold(0, |acc, i| acc * self.radix[i] + c[i])
    }

    /// For each observation, the mean of `y` over its marginal cell of `mask`.
    pub fn marginal_means(&self, y: &[f64], mask: u32) -> Vec<f64> {
        let size: usize = (0..self.k + 2)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| self.radix[i])
            .product();
        let mut acc = vec![(0.0, 0usize); size];
        for (c, &v) in self.codes.iter().zip(y) {
            let e = &mut acc[self.key(c, mask)];
            e.0 += v;
            e.1 += 1;
        }
        self.codes
            .iter()
            .map(|c| {
                let (s, n) = acc[self.key(c, mask)];
                s / n as f64
            })
            .collect()
    }

    fn ss_marginal(&self, y: &[f64], grand: f64, mask: u32, cache: &mut BTreeMap<u32, f64>) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        *cache
            .entry(mask)
            .or_insert_with(|| self.marginal_means(y, mask).iter().map(|m| (m - grand).powi(2)).sum())
    }

    /// Per-observation estimate of an effect: the alternating sum of its
    /// marginal means, the grand mean standing in for the empty set.
    pub fn effect_estimate(&self, y: &[f64], effect: u32) -> Vec<f64> {
        let grand = y.iter().sum::<f64>() / y.len() as f64;
        let mut est = vec![0.0; y.len()];
        for g in submasks(effect) {
            let s = sign(effect, g);
            if g == 0 {
                est.iter_mut().for_each(|e| *e += s * grand);
            } else {
                for (e, m) in est.iter_mut().zip(self.marginal_means(y, g)) {
                    *e += s * m;
                }
            }
        }
        est
    }

    pub fn effect_name(&self, mask: u32) -> String {
        (0..=self.k)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| self.names[i].as_str())
            .collect::<Vec<_>>()
            .join(" × ")
    }

    /// Testable effects as bit masks over within factors and the between
    /// factor, in table order.
    pub fn effects(&self) -> Vec<u32> {
        let b = 1u32 << self.k;
        let mut within: Vec<u32> = (1..(1u32 << self.k)).collect();
        within.sort_by_key(|&m| (bits(m), m));
        let mut out = vec![b];
        for e in within {
            out.push(e);
            out.push(e | b);
        }
        out
    }

    pub fn analyze(&self, y: &[f64]) -> AnovaTable {
        let n = y.len() as f64;
        let grand = y.iter().sum::<f64>() / n;
        let ss_total: f64 = y.iter().map(|v| (v - grand).powi(2)).sum();
        let b = 1u32 << self.k;
        let s = 1u32 << (self.k + 1);
        let mut cache = BTreeMap::new();
        let mut m = |mask: u32| self.ss_marginal(y, grand, mask, &mut cache);

        let g = self.groups() as u64;
        let n_subj = self.n_subjects() as u64;
        let within_df = |e: u32| -> u64 {
            (0..self.k)
                .filter(|i| e & (1 << i) != 0)
                .map(|i| self.radix[i] as u64 - 1)
                .product()
        };

        let between_err_name = format!("subjects/{}", self.names[self.k]);
        let mut errors = vec![ErrorStratum {
            name: between_err_name.clone(),
            ss: (m(s) - m(b)).max(0.0),
            df: n_subj - g,
            ms: 0.0,
        }];
        let mut rows = vec![(b, m(b).max(0.0), g - 1, 0usize)];

        let mut within: Vec<u32> = (1..(1u32 << self.k)).collect();
        within.sort_by_key(|&m| (bits(m), m));
        for e in within {
            let (mut ss_e, mut ss_eb, mut ss_err) = (0.0, 0.0, 0.0);
            for gm in submasks(e) {
                let sg = sign(e, gm);
                let (mg, mgb, mgs) = (m(gm), m(gm | b), m(gm | s));
                ss_e += sg * mg;
                ss_eb += sg * (mgb - mg);
                ss_err += sg * (mgs - mgb);
            }
            let df_e = within_df(e);
            errors.push(ErrorStratum {
                name: format!("{} × {}", self.effect_name(e), between_err_name),
                ss: ss_err.max(0.0),
                df: df_e * (n_subj - g),
                ms: 0.0,
            });
            let err_idx = errors.len() - 1;
            rows.push((e, ss_e.max(0.0), df_e, err_idx));
            rows.push((e | b, ss_eb.max(0.0), df_e * (g - 1), err_idx));
        }
        for e in &mut errors {
            e.ms = e.ss / e.df as f64;
        }
        let tiny = 1e-12 * ss_total;
        let rows = rows
            .into_iter()
            .map(|(mask, ss, df, ei)| {
                let err = &errors[ei];
                let ms = ss / df as f64;
                let (f, p) = if err.ss <= tiny {
                    if ss <= tiny {
                        (0.0, 1.0)
                    } else {
                        (f64::INFINITY, 0.0)
                    }
                } else {
                    let f = ms / err.ms;
                    (f, f_upper_tail(f, df as f64, err.df as f64).unwrap_or(f64::NAN))
                };
                let denom = ss + err.ss;
                AnovaRow {
                    effect: self.effect_name(mask),
                    ss,
                    df,
                    ms,
                    f,
                    p,
                    partial_eta_sq: if denom > 0.0 { ss / denom } else { 0.0 },
                    error_term: err.name.clone(),
                    error_df: err.df,
                }
            })
            .collect();
        AnovaTable {
            within: self.names[..self.k].to_vec(),
            between: self.names[self.k].clone(),
            subjects: self.n_subjects(),
            rows,
            errors,
            ss_total,
        }
    }
}

/// Mixed-design ANOVA with F tests against each effect's own error stratum.
pub fn mixed_anova(obs: &[Observation], within: &[&str], between: &str) -> Result<AnovaTable> {
    let layout = Layout::build(obs, within, between)?;
    let y: Vec<f64> = obs.iter().map(|o| o.y).collect();
    Ok(layout.analyze(&y))
}
