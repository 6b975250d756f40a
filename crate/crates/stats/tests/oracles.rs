use legibility_stats::anova::{mixed_anova, Observation};
use legibility_stats::pairwise::{pairwise, PairKind, PairSpec};
use legibility_stats::reliability::cronbach_alpha;
use legibility_stats::special::{f_upper_tail, ln_gamma};
use proptest::prelude::*;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// Classical split-plot sums of squares, written out cell by cell.
struct BruteForce {
    ss: [f64; 5], // B, S/B, A, AB, A×S/B
    df: [f64; 5],
}

fn brute_force(y: &[[f64; 2]], group: &[usize]) -> BruteForce {
    let n = y.len();
    let a = 2;
    let grand = y.iter().flatten().sum::<f64>() / (2 * n) as f64;
    let subj: Vec<f64> = y.iter().map(|r| (r[0] + r[1]) / 2.0).collect();
    let n_j = [0, 1].map(|j| group.iter().filter(|&&g| g == j).count() as f64);
    let grp_mean = [0, 1].map(|j| {
        (0..n).filter(|&i| group[i] == j).map(|i| subj[i]).sum::<f64>() / n_j[j]
    });
    let a_mean = [0, 1].map(|k| y.iter().map(|r| r[k]).sum::<f64>() / n as f64);
    let cell = [0, 1].map(|j| {
        [0, 1].map(|k| (0..n).filter(|&i| group[i] == j).map(|i| y[i][k]).sum::<f64>() / n_j[j])
    });
    let ss_b: f64 = (0..2).map(|j| n_j[j] * a as f64 * (grp_mean[j] - grand).powi(2)).sum();
    let ss_sb: f64 = (0..n).map(|i| a as f64 * (subj[i] - grp_mean[group[i]]).powi(2)).sum();
    let ss_a: f64 = (0..2).map(|k| n as f64 * (a_mean[k] - grand).powi(2)).sum();
    let ss_ab: f64 = (0..2)
        .flat_map(|j| (0..2).map(move |k| (j, k)))
        .map(|(j, k)| n_j[j] * (cell[j][k] - grp_mean[j] - a_mean[k] + grand).powi(2))
        .sum();
    let ss_asb: f64 = (0..n)
        .flat_map(|i| (0..2).map(move |k| (i, k)))
        .map(|(i, k)| (y[i][k] - subj[i] - cell[group[i]][k] + grp_mean[group[i]]).powi(2))
        .sum();
    let nf = n as f64;
    BruteForce {
        ss: [ss_b, ss_sb, ss_a, ss_ab, ss_asb],
        df: [1.0, nf - 2.0, 1.0, 1.0, nf - 2.0],
    }
}

fn observations(y: &[[f64; 2]], group: &[usize]) -> Vec<Observation> {
    y.iter()
        .enumerate()
        .flat_map(|(i, r)| {
            r.iter().enumerate().map(move |(k, &v)| Observation {
                subject: format!("s{i}"),
                group: format!("g{}", group[i]),
                within: vec![format!("a{k}")],
                y: v,
            })
        })
        .collect()
}

fn check_against_brute_force(y: &[[f64; 2]], group: &[usize]) {
    let bf = brute_force(y, group);
    let t = mixed_anova(&observations(y, group), &["A"], "B").unwrap();
    let rows = [t.row("B").unwrap(), t.row("A").unwrap(), t.row("A × B").unwrap()];
    let errs = [&t.errors[0], &t.errors[1]];
    for (got, want) in [
        (rows[0].ss, bf.ss[0]),
        (errs[0].ss, bf.ss[1]),
        (rows[1].ss, bf.ss[2]),
        (rows[2].ss, bf.ss[3]),
        (errs[1].ss, bf.ss[4]),
    ] {
        assert!(rel_close(got, want, 1e-8), "{got} vs {want}");
    }
    assert_eq!(
        [rows[0].df, errs[0].df, rows[1].df, rows[2].df, errs[1].df].map(|d| d as f64),
        bf.df
    );
    let f_b = (bf.ss[0] / bf.df[0]) / (bf.ss[1] / bf.df[1]);
    let f_a = (bf.ss[2] / bf.df[2]) / (bf.ss[4] / bf.df[4]);
    let f_ab = (bf.ss[3] / bf.df[3]) / (bf.ss[4] / bf.df[4]);
    assert!(rel_close(rows[0].f, f_b, 1e-8));
    assert!(rel_close(rows[1].f, f_a, 1e-8));
    assert!(rel_close(rows[2].f, f_ab, 1e-8));
}

#[test]
fn two_by_two_eight_subjects_matches_brute_force() {
    let y = [
        [3.2, 4.1],
        [2.8, 3.9],
        [3.5, 3.6],
        [2.1, 3.3],
        [4.0, 3.1],
        [3.7, 2.9],
        [4.4, 3.8],
        [3.9, 2.2],
    ];
    check_against_brute_force(&y, &[0, 0, 0, 0, 1, 1, 1, 1]);
}

fn split_plot() -> impl Strategy<Value = (Vec<[f64; 2]>, Vec<usize>)> {
    (2usize..6, 2usize..6).prop_flat_map(|(n0, n1)| {
        let n = n0 + n1;
        (
            prop::collection::vec(prop::array::uniform2(-10.0..10.0f64), n),
            Just((0..n).map(|i| usize::from(i >= n0)).collect::<Vec<_>>()),
        )
    })
}

fn three_factor_obs(y: &[f64], groups: &[usize], levels: (usize, usize)) -> Vec<Observation> {
    let cells = levels.0 * levels.1;
    groups
        .iter()
        .enumerate()
        .flat_map(|(s, &g)| {
            (0..cells).map(move |c| Observation {
                subject: format!("s{s}"),
                group: format!("g{g}"),
                within: vec![format!("x{}", c / levels.1), format!("z{}", c % levels.1)],
                y: y[s * cells + c],
            })
        })
        .collect()
}

proptest! {
    #[test]
    fn brute_force_agreement_with_unequal_groups((y, g) in split_plot()) {
        check_against_brute_force(&y, &g);
    }

    #[test]
    fn strata_sum_to_total(
        seedvals in prop::collection::vec(-5.0..5.0f64, 4 * 6 * 3),
        groups in prop::collection::vec(0usize..3, 12),
    ) {
        let mut groups = groups;
        groups[..6].copy_from_slice(&[0, 0, 1, 1, 2, 2]);
        let obs = three_factor_obs(&seedvals[..12 * 6], &groups, (3, 2));
        let t = mixed_anova(&obs, &["X", "Z"], "G").unwrap();
        let sum: f64 = t.rows.iter().map(|r| r.ss).sum::<f64>() + t.errors.iter().map(|e| e.ss).sum::<f64>();
        prop_assert!(rel_close(sum, t.ss_total, 1e-8));
        for r in &t.rows {
            prop_assert!(r.ss >= 0.0 && (0.0..=1.0).contains(&r.partial_eta_sq));
            prop_assert!(r.df >= 1);
        }
    }

    #[test]
    fn between_shift_only_moves_between_effect(
        y in prop::collection::vec(-5.0..5.0f64, 8 * 6),
        shift in 0.5..3.0f64,
    ) {
        let groups = [0, 1, 0, 1, 0, 1, 0, 1];
        let base = three_factor_obs(&y, &groups, (3, 2));
        let mut shifted = base.clone();
        for o in shifted.iter_mut().filter(|o| o.group == "g1") {
            o.y += shift;
        }
        let (a, b) = (
            mixed_anova(&base, &["X", "Z"], "G").unwrap(),
            mixed_anova(&shifted, &["X", "Z"], "G").unwrap(),
        );
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            if ra.effect == "G" {
                prop_assert!(rb.ss != ra.ss);
            } else {
                prop_assert!((ra.ss - rb.ss).abs() <= 1e-9 * (1.0 + ra.ss), "{}", ra.effect);
            }
        }
        for (ea, eb) in a.errors.iter().zip(&b.errors) {
            prop_assert!((ea.ss - eb.ss).abs() <= 1e-9 * (1.0 + ea.ss));
        }
    }

    #[test]
    fn f_tail_decreases_in_f(f in 0.0..50.0f64, df in 0.01..5.0f64, d1 in 1u32..30, d2 in 1u32..300) {
        let (d1, d2) = (d1 as f64, d2 as f64);
        let p0 = f_upper_tail(f, d1, d2).unwrap();
        let p1 = f_upper_tail(f + df, d1, d2).unwrap();
        prop_assert!(p1 <= p0 + 1e-15);
        prop_assert!((0.0..=1.0).contains(&p0));
    }

    #[test]
    fn alpha_invariances(
        m in prop::collection::vec(prop::collection::vec(1.0..5.0f64, 4), 3..12),
        c in -3.0..3.0f64,
    ) {
        if let Ok(alpha) = cronbach_alpha(&m) {
            let shifted: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|v| v + c).collect()).collect();
            let relabeled: Vec<Vec<f64>> = m.iter().map(|r| vec![r[2], r[0], r[3], r[1]]).collect();
            prop_assert!((cronbach_alpha(&shifted).unwrap() - alpha).abs() < 1e-9);
            prop_assert!((cronbach_alpha(&relabeled).unwrap() - alpha).abs() < 1e-9);
        }
    }

    #[test]
    fn bonferroni_never_lowers_p(
        a in prop::collection::vec(1.0..5.0f64, 3..15),
        noise in prop::collection::vec(-1.0..1.0f64, 15),
        m in 1usize..20,
    ) {
        let b: Vec<f64> = a.iter().zip(&noise).map(|(x, e)| x + e).collect();
        let spec = PairSpec { label_a: "a".into(), label_b: "b".into(), kind: PairKind::Paired, a, b };
        for r in pairwise(&[spec], m).unwrap() {
            if let (Some(raw), Some(adj)) = (r.p_raw, r.p_adjusted) {
                prop_assert!(adj >= raw && adj <= 1.0);
                prop_assert!((0.0..=1.0).contains(&r.r.unwrap()));
            }
        }
    }
}

/// 1 − ∫₀^F of the F(1, 10) density by Simpson's rule, after x = u².
#[test]
fn f_tail_against_numeric_integration() {
    for (f, d1, d2) in [(4.96f64, 1.0f64, 10.0f64), (2.5, 3.0, 17.0), (0.8, 2.0, 6.0)] {
        let ln_b = ln_gamma(d1 / 2.0) + ln_gamma(d2 / 2.0) - ln_gamma((d1 + d2) / 2.0);
        let dens = |u: f64| -> f64 {
            let x = u * u;
            if u == 0.0 {
                return if d1 == 1.0 { 2.0 * ((d1 / d2).powf(0.5) / ln_b.exp()) } else { 0.0 };
            }
            let ln_pdf =
                (d1 / 2.0) * (d1 / d2).ln() + (d1 / 2.0 - 1.0) * x.ln() - ((d1 + d2) / 2.0) * (1.0 + d1 * x / d2).ln() - ln_b;
            2.0 * u * ln_pdf.exp()
        };
        let n = 200_000;
        let h = f.sqrt() / n as f64;
        let mut s = dens(0.0) + dens(f.sqrt());
        for i in 1..n {
            s += dens(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let oracle = 1.0 - s * h / 3.0;
        let got = f_upper_tail(f, d1, d2).unwrap();
        assert!((got - oracle).abs() < 1e-8, "F={f}: {got} vs {oracle}");
    }
    assert!((f_upper_tail(4.96, 1.0, 10.0).unwrap() - 0.050).abs() <= 0.001);
}

#[test]
fn alpha_hand_computed_four_by_two() {
    // items (2,4,3,5) and (1,3,4,4): var 5/3 and 2; totals (3,7,7,9) var 6.333…
    let m = vec![vec![2.0, 1.0], vec![4.0, 3.0], vec![3.0, 4.0], vec![5.0, 4.0]];
    let want = 2.0 * (1.0 - (5.0 / 3.0 + 2.0) / (19.0 / 3.0));
    assert!((cronbach_alpha(&m).unwrap() - want).abs() < 1e-12);
}
