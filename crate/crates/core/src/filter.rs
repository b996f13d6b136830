//! Knockoff statistics, data-dependent thresholds and selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Threshold rule. `KnockoffPlus` adds one to the estimated false count and
/// controls the FDR itself; `Knockoff` controls a modified FDR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Knockoff,
    #[default]
    KnockoffPlus,
}

impl Rule {
    fn offset(self) -> usize {
        match self {
            Rule::Knockoff => 0,
            Rule::KnockoffPlus => 1,
        }
    }

    /// The estimated false discovery proportion at a candidate threshold
    /// with `negatives = #{W ≤ −t}` and `positives = #{W ≥ t}`.
    pub fn ratio(self, negatives: usize, positives: usize) -> f64 {
        let num = (negatives + self.offset()) as f64;
        match self {
            Rule::Knockoff if positives == 0 => {
                if num == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            _ => num / positives.max(1) as f64,
        }
    }
}

/// `W_j = Z_j² − Z̃_j²`.
pub fn knockoff_statistic(z: &[f64], z_tilde: &[f64]) -> Result<Vec<f64>> {
    if z.len() != z_tilde.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} importances vs {} knockoff importances",
            z.len(),
            z_tilde.len()
        )));
    }
    Ok(z.iter().zip(z_tilde).map(|(a, b)| a * a - b * b).collect())
}

pub fn check_level(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("target FDR level {q} must lie in (0, 1)")))
    }
}

/// Smallest candidate `t` among the distinct nonzero `|W_j|` whose estimated
/// FDP is at most `q`, or `+∞` if none qualifies.
pub fn threshold(w: &[f64], q: f64, rule: Rule) -> f64 {
    let mut candidates: Vec<f64> = w.iter().map(|v| v.abs()).filter(|v| *v > 0.0).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let mut positives: Vec<f64> = w.iter().copied().filter(|v| *v > 0.0).collect();
    let mut negatives: Vec<f64> = w.iter().filter(|v| **v < 0.0).map(|v| -v).collect();
    positives.sort_by(f64::total_cmp);
    negatives.sort_by(f64::total_cmp);

    // Candidates ascend, so the counts of entries at or beyond t only shrink;
    // two cursors walk the sorted magnitudes.
    let (mut pi, mut ni) = (0, 0);
    for &t in &candidates {
        while pi < positives.len() && positives[pi] < t {
            pi += 1;
        }
        while ni < negatives.len() && negatives[ni] < t {
            ni += 1;
        }
        if rule.ratio(negatives.len() - ni, positives.len() - pi) <= q {
            return t;
        }
    }
    f64::INFINITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    /// `None` encodes an infinite threshold (nothing selected).
    #[serde(with = "threshold_serde")]
    pub threshold: f64,
    /// Zero-based indices with `W_j ≥ threshold`, ascending.
    pub selected: Vec<usize>,
    pub q: f64,
    pub rule: Rule,
}

impl SelectionReport {
    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}

/// Applies [`threshold`] and keeps every feature with `W_j ≥ T`.
pub fn select(w: &[f64], q: f64, rule: Rule) -> Result<SelectionReport> {
    check_level(q)?;
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("knockoff statistics must be finite".into()));
    }
    let t = threshold(w, q, rule);
    let selected = if t.is_finite() {
        w.iter().enumerate().filter(|(_, v)| **v >= t).map(|(j, _)| j).collect()
    } else {
        Vec::new()
    };
    Ok(SelectionReport {
        threshold: t,
        selected,
        q,
        rule,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub fdp: f64,
    pub power: f64,
    pub n_selected: usize,
    pub n_true: usize,
    pub n_false: usize,
    /// Set when the true support is empty; `power` is then reported as 0.
    pub power_undefined: bool,
}

/// False discovery proportion `|Ŝ \ S₀| / max(|Ŝ|, 1)` and power `|Ŝ ∩ S₀| / |S₀|`.
pub fn evaluate(selected: &[usize], true_support: &[usize]) -> EvalMetrics {
    let truth: std::collections::BTreeSet<usize> = true_support.iter().copied().collect();
    let chosen: std::collections::BTreeSet<usize> = selected.iter().copied().collect();
    let hits = chosen.intersection(&truth).count();
    let false_hits = chosen.len() - hits;
    let power_undefined = truth.is_empty();
    EvalMetrics {
        fdp: false_hits as f64 / chosen.len().max(1) as f64,
        power: if power_undefined {
            0.0
        } else {
            hits as f64 / truth.len() as f64
        },
        n_selected: chosen.len(),
        n_true: truth.len(),
        n_false: false_hits,
        power_undefined,
    }
}

mod threshold_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &f64, s: S) -> Result<S::Ok, S::Error> {
        if t.is_finite() {
            s.serialize_some(t)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct evaluation of the threshold definition over every candidate.
    fn brute_force(w: &[f64], q: f64, rule: Rule) -> f64 {
        let mut best = f64::INFINITY;
        for t in w.iter().map(|v| v.abs()).filter(|v| *v > 0.0) {
            let neg = w.iter().filter(|v| **v <= -t).count();
            let pos = w.iter().filter(|v| **v >= t).count();
            if rule.ratio(neg, pos) <= q && t < best {
                best = t;
            }
        }
        best
    }

    #[test]
    fn statistic_examples() {
        assert_eq!(knockoff_statistic(&[1.0, -2.0], &[1.0, -2.0]).unwrap(), vec![0.0, 0.0]);
        let w = knockoff_statistic(&[1.0, 0.4], &[0.2, 0.4]).unwrap();
        assert!((w[0] - 0.96).abs() < 1e-15 && w[1] == 0.0);
        let back = knockoff_statistic(&[0.2, 0.4], &[1.0, 0.4]).unwrap();
        assert_eq!(back, w.iter().map(|v| -v).collect::<Vec<_>>());
        assert!(knockoff_statistic(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ten_positives_pass_knockoff_plus() {
        let w = [5.0, 4.0, 3.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, -0.5];
        assert_eq!(threshold(&w, 0.2, Rule::KnockoffPlus), 0.5);
        assert_eq!(brute_force(&w, 0.2, Rule::KnockoffPlus), 0.5);
        let report = select(&w, 0.2, Rule::KnockoffPlus).unwrap();
        assert_eq!(report.selected, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn all_negative_selects_nothing() {
        let w = [-1.0, -2.0, -0.1];
        for rule in [Rule::Knockoff, Rule::KnockoffPlus] {
            assert_eq!(threshold(&w, 0.2, rule), f64::INFINITY);
            assert!(select(&w, 0.2, rule).unwrap().is_empty());
        }
    }

    #[test]
    fn no_candidate_qualifies() {
        let w = [3.0, -1.0, 2.0, -2.0, 5.0];
        assert_eq!(threshold(&w, 0.2, Rule::KnockoffPlus), f64::INFINITY);
        assert_eq!(brute_force(&w, 0.2, Rule::KnockoffPlus), f64::INFINITY);
    }

    #[test]
    fn single_discovery_fails_knockoff_plus() {
        let mut w = vec![0.0; 20];
        w[7] = 1e6;
        assert!(select(&w, 0.2, Rule::KnockoffPlus).unwrap().is_empty());
        // The plain rule accepts it: 0 / 1 ≤ q.
        assert_eq!(select(&w, 0.2, Rule::Knockoff).unwrap().selected, vec![7]);
    }

    #[test]
    fn ties_at_threshold_are_selected() {
        let w = [2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, -1.0];
        let r = select(&w, 0.2, Rule::KnockoffPlus).unwrap();
        assert_eq!(r.threshold, 1.0);
        assert_eq!(r.selected.len(), 10);
    }

    #[test]
    fn level_must_be_open_unit_interval() {
        for q in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(select(&[1.0], q, Rule::KnockoffPlus).is_err());
        }
    }

    #[test]
    fn report_json_encodes_infinite_threshold_as_null() {
        let r = select(&[-1.0], 0.1, Rule::KnockoffPlus).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"threshold\":null"));
        assert!(json.contains("\"rule\":\"knockoff_plus\""));
        let back: SelectionReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn evaluation_examples() {
        let exact = evaluate(&[1, 2], &[1, 2]);
        assert_eq!((exact.fdp, exact.power), (0.0, 1.0));
        let empty = evaluate(&[], &[1, 2]);
        assert_eq!((empty.fdp, empty.power), (0.0, 0.0));
        let mixed = evaluate(&[1, 2, 3, 4], &[1, 2, 5, 6, 7]);
        assert_eq!((mixed.fdp, mixed.power), (0.5, 0.4));
        let null = evaluate(&[3], &[]);
        assert_eq!(null.fdp, 1.0);
        assert!(null.power_undefined);
    }

    #[test]
    fn negation_can_leave_a_nonempty_selection() {
        // 100 positives at 1 and 6 negatives at −10: T₊ = 1 selects the
        // positives; after negation t = 10 gives (1 + 0) / 6 ≤ 0.2.
        let mut w = vec![1.0; 100];
        w.extend([-10.0; 6]);
        let r = select(&w, 0.2, Rule::KnockoffPlus).unwrap();
        assert_eq!(r.selected, (0..100).collect::<Vec<_>>());
        let flipped: Vec<f64> = w.iter().map(|v| -v).collect();
        let f = select(&flipped, 0.2, Rule::KnockoffPlus).unwrap();
        assert_eq!(f.selected, (100..106).collect::<Vec<_>>());
    }

    fn w_strategy() -> impl Strategy<Value = Vec<f64>> {
        // Small integer grid so ties and exact zeros are common.
        prop::collection::vec((-8i32..=8).prop_map(|v| v as f64 * 0.5), 1..50)
    }

    proptest! {
        #[test]
        fn scan_matches_brute_force(w in w_strategy(), q in 0.01f64..0.99) {
            for rule in [Rule::Knockoff, Rule::KnockoffPlus] {
                prop_assert_eq!(threshold(&w, q, rule), brute_force(&w, q, rule));
            }
        }

        #[test]
        fn plus_rule_is_more_conservative(w in w_strategy(), q in 0.01f64..0.99) {
            let t = threshold(&w, q, Rule::Knockoff);
            let t_plus = threshold(&w, q, Rule::KnockoffPlus);
            prop_assert!(t_plus >= t);
            let s = select(&w, q, Rule::Knockoff).unwrap().selected;
            let s_plus = select(&w, q, Rule::KnockoffPlus).unwrap().selected;
            prop_assert!(s_plus.iter().all(|j| s.contains(j)));
        }

        #[test]
        fn threshold_monotone_in_level(w in w_strategy(), q1 in 0.01f64..0.99, q2 in 0.01f64..0.99) {
            let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
            for rule in [Rule::Knockoff, Rule::KnockoffPlus] {
                prop_assert!(threshold(&w, hi, rule) <= threshold(&w, lo, rule));
                let small = select(&w, lo, rule).unwrap().selected;
                let large = select(&w, hi, rule).unwrap().selected;
                prop_assert!(small.iter().all(|j| large.contains(j)));
            }
        }

        #[test]
        fn negated_selection_is_disjoint_from_original(w in w_strategy(), q in 0.01f64..0.99) {
            for rule in [Rule::Knockoff, Rule::KnockoffPlus] {
                let r = select(&w, q, rule).unwrap();
                let flipped: Vec<f64> = w.iter().map(|v| -v).collect();
                let f = select(&flipped, q, rule).unwrap();
                prop_assert!(f.selected.iter().all(|&j| w[j] < 0.0));
                prop_assert!(f.selected.iter().all(|j| !r.selected.contains(j)));
            }
        }

        #[test]
        fn selection_matches_threshold(w in w_strategy(), q in 0.01f64..0.99) {
            let r = select(&w, q, Rule::KnockoffPlus).unwrap();
            prop_assert_eq!(r.is_empty(), r.threshold.is_infinite());
            for (j, v) in w.iter().enumerate() {
                prop_assert_eq!(r.selected.contains(&j), *v >= r.threshold);
            }
        }
    }
}
