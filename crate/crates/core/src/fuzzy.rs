//! Generic fuzzy machinery: trapezoidal fuzzy numbers, linguistic scales
//! built from piecewise-linear membership functions, Mamdani min/max
//! inference and centroid defuzzification.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sampling step for inference and defuzzification.
pub const SAMPLE_STEP: f64 = 0.01;

#[derive(Debug, Error, PartialEq)]
pub enum FuzzyError {
    #[error("trapezoid corners must be ordered a <= b <= c <= d, got ({0}, {1}, {2}, {3})")]
    InvalidTrapezoid(f64, f64, f64, f64),
    #[error("UNKNOWN_TERM: `{0}`")]
    UnknownTerm(String),
    #[error("OUT_OF_UNIVERSE: {value} outside [{lo}, {hi}]")]
    OutOfUniverse { value: f64, lo: f64, hi: f64 },
    #[error("EMPTY_SET: membership is zero everywhere")]
    EmptySet,
    #[error("invalid scale: {0}")]
    InvalidScale(String),
    #[error("invalid rule base: {0}")]
    InvalidRuleBase(String),
}

/// Trapezoidal fuzzy number with support [a, d] and core [b, c].
/// Serializes as the quadruple `[a, b, c, d]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 4]", try_from = "[f64; 4]")]
pub struct TrapezoidalFuzzyNumber {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl TrapezoidalFuzzyNumber {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, FuzzyError> {
        if !(a <= b && b <= c && c <= d) {
            return Err(FuzzyError::InvalidTrapezoid(a, b, c, d));
        }
        Ok(Self { a, b, c, d })
    }

    /// Degenerate trapezoid representing a crisp value.
    pub fn crisp(x: f64) -> Self {
        Self { a: x, b: x, c: x, d: x }
    }
}

impl From<TrapezoidalFuzzyNumber> for [f64; 4] {
    fn from(t: TrapezoidalFuzzyNumber) -> Self {
        [t.a, t.b, t.c, t.d]
    }
}

impl TryFrom<[f64; 4]> for TrapezoidalFuzzyNumber {
    type Error = FuzzyError;
    fn try_from(q: [f64; 4]) -> Result<Self, Self::Error> {
        TrapezoidalFuzzyNumber::new(q[0], q[1], q[2], q[3])
    }
}

/// Graded-mean defuzzification: (a + 2(b + c) + d) / 6.
pub fn graded_mean(tfn: TrapezoidalFuzzyNumber) -> f64 {
    (tfn.a + 2.0 * (tfn.b + tfn.c) + tfn.d) / 6.0
}

/// One linguistic term as a piecewise-linear membership curve. The curve is
/// extended as a constant beyond its first and last breakpoints, which is how
/// shoulders at the universe ends are expressed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticTerm {
    pub label: String,
    /// (x, membership) breakpoints with nondecreasing x.
    pub points: Vec<(f64, f64)>,
}

impl LinguisticTerm {
    pub fn membership(&self, x: f64) -> f64 {
        let pts = &self.points;
        if x <= pts[0].0 {
            return pts[0].1;
        }
        if x >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        for w in pts.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x <= x1 {
                if x1 == x0 {
                    return y1;
                }
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            }
        }
        pts[pts.len() - 1].1
    }
}

/// Five-term linguistic scale over a closed universe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticScale {
    pub universe: (f64, f64),
    pub terms: Vec<LinguisticTerm>,
}

pub const TERM_LABELS: [&str; 5] = ["Very Low", "Low", "Medium", "High", "Very High"];

impl LinguisticScale {
    pub fn new(universe: (f64, f64), terms: Vec<LinguisticTerm>) -> Result<Self, FuzzyError> {
        let (lo, hi) = universe;
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(FuzzyError::InvalidScale(format!(
                "universe [{lo}, {hi}] is empty"
            )));
        }
        if terms.len() != 5 {
            return Err(FuzzyError::InvalidScale(format!(
                "expected exactly 5 terms, got {}",
                terms.len()
            )));
        }
        let mut labels = std::collections::BTreeSet::new();
        for term in &terms {
            if term.points.is_empty() {
                return Err(FuzzyError::InvalidScale(format!(
                    "term `{}` has no breakpoints",
                    term.label
                )));
            }
            if !labels.insert(term.label.clone()) {
                return Err(FuzzyError::InvalidScale(format!(
                    "duplicate term label `{}`",
                    term.label
                )));
            }
            for w in term.points.windows(2) {
                if w[1].0 < w[0].0 {
                    return Err(FuzzyError::InvalidScale(format!(
                        "term `{}` breakpoints must have nondecreasing x",
                        term.label
                    )));
                }
            }
            for &(_, y) in &term.points {
                if !(0.0..=1.0).contains(&y) {
                    return Err(FuzzyError::InvalidScale(format!(
                        "term `{}` has membership {y} outside [0,1]",
                        term.label
                    )));
                }
            }
        }
        let scale = Self { universe, terms };
        // Coverage: somewhere on the sampling grid every x must hit a term.
        for x in scale.sample_points() {
            if !scale.terms.iter().any(|t| t.membership(x) > 0.0) {
                return Err(FuzzyError::InvalidScale(format!(
                    "no term covers x = {x}"
                )));
            }
        }
        Ok(scale)
    }

    /// The default layout: five triangles with centers evenly spaced over
    /// [1, 10], each reaching zero at the neighboring centers, shouldered at
    /// the universe ends.
    pub fn default_five_term() -> Self {
        let centers = [1.0, 3.25, 5.5, 7.75, 10.0];
        let mut terms = Vec::with_capacity(5);
        for (i, label) in TERM_LABELS.iter().enumerate() {
            let c = centers[i];
            let mut points = Vec::new();
            if i > 0 {
                points.push((centers[i - 1], 0.0));
            }
            points.push((c, 1.0));
            if i + 1 < centers.len() {
                points.push((centers[i + 1], 0.0));
            }
            terms.push(LinguisticTerm {
                label: (*label).to_string(),
                points,
            });
        }
        Self::new((1.0, 10.0), terms).expect("default layout is valid")
    }

    pub fn term_index(&self, label: &str) -> Option<usize> {
        self.terms.iter().position(|t| t.label == label)
    }

    fn sample_count(&self) -> usize {
        let (lo, hi) = self.universe;
        ((hi - lo) / SAMPLE_STEP).round() as usize + 1
    }

    pub fn sample_points(&self) -> impl Iterator<Item = f64> + '_ {
        let lo = self.universe.0;
        (0..self.sample_count()).map(move |i| lo + i as f64 * SAMPLE_STEP)
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.universe.0, self.universe.1)
    }
}

/// Membership of `x` in the named term.
pub fn membership(scale: &LinguisticScale, term: &str, x: f64) -> Result<f64, FuzzyError> {
    let (lo, hi) = scale.universe;
    if x < lo || x > hi {
        return Err(FuzzyError::OutOfUniverse { value: x, lo, hi });
    }
    let t = scale
        .terms
        .iter()
        .find(|t| t.label == term)
        .ok_or_else(|| FuzzyError::UnknownTerm(term.to_string()))?;
    Ok(t.membership(x))
}

/// One Mamdani rule: term indices for the three inputs and the output term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    #[serde(rename = "if")]
    pub antecedent: [usize; 3],
    #[serde(rename = "then")]
    pub consequent: usize,
}

/// Complete three-input rule base: one rule per input-term combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleBase {
    pub input_scales: [LinguisticScale; 3],
    pub output_scale: LinguisticScale,
    pub rules: Vec<Rule>,
}

impl RuleBase {
    pub fn new(
        input_scales: [LinguisticScale; 3],
        output_scale: LinguisticScale,
        rules: Vec<Rule>,
    ) -> Result<Self, FuzzyError> {
        let counts: Vec<usize> = input_scales.iter().map(|s| s.terms.len()).collect();
        let expected = counts_product(&counts);
        if rules.len() != expected {
            return Err(FuzzyError::InvalidRuleBase(format!(
                "expected {expected} rules, got {}",
                rules.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for rule in &rules {
            for (k, &idx) in rule.antecedent.iter().enumerate() {
                if idx >= counts[k] {
                    return Err(FuzzyError::InvalidRuleBase(format!(
                        "antecedent index {idx} out of range for input {k}"
                    )));
                }
            }
            if rule.consequent >= output_scale.terms.len() {
                return Err(FuzzyError::InvalidRuleBase(format!(
                    "consequent index {} out of range",
                    rule.consequent
                )));
            }
            if !seen.insert(rule.antecedent) {
                return Err(FuzzyError::InvalidRuleBase(format!(
                    "duplicate rule for antecedent {:?}",
                    rule.antecedent
                )));
            }
        }
        Ok(Self {
            input_scales,
            output_scale,
            rules,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, FuzzyError> {
        let raw: RuleBase = serde_json::from_str(text)
            .map_err(|e| FuzzyError::InvalidRuleBase(e.to_string()))?;
        Self::new(raw.input_scales, raw.output_scale, raw.rules)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule base serializes")
    }
}

/// A fuzzy set sampled over the output universe at `SAMPLE_STEP`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzySet {
    pub lo: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl FuzzySet {
    pub fn x_at(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }
}

/// Mamdani inference: min firing strength, min clipping, max aggregation.
/// Inputs are clamped into their scales' universes.
pub fn mamdani_infer(rb: &RuleBase, p: f64, ai: f64, d: f64) -> FuzzySet {
    let inputs = [
        rb.input_scales[0].clamp(p),
        rb.input_scales[1].clamp(ai),
        rb.input_scales[2].clamp(d),
    ];
    // Per-input memberships, computed once.
    let degrees: Vec<Vec<f64>> = rb
        .input_scales
        .iter()
        .zip(inputs)
        .map(|(scale, x)| scale.terms.iter().map(|t| t.membership(x)).collect())
        .collect();

    let out_scale = &rb.output_scale;
    let n = out_scale.sample_count();
    let mut values = vec![0.0; n];
    for rule in &rb.rules {
        let strength = rule
            .antecedent
            .iter()
            .enumerate()
            .map(|(k, &idx)| degrees[k][idx])
            .fold(1.0_f64, f64::min);
        if strength <= 0.0 {
            continue;
        }
        let term = &out_scale.terms[rule.consequent];
        for (i, slot) in values.iter_mut().enumerate() {
            let x = out_scale.universe.0 + i as f64 * SAMPLE_STEP;
            let clipped = strength.min(term.membership(x));
            if clipped > *slot {
                *slot = clipped;
            }
        }
    }
    FuzzySet {
        lo: out_scale.universe.0,
        step: SAMPLE_STEP,
        values,
    }
}

/// Product-strength blend of per-term centroids: each rule weighs its output
/// term's centroid by the product of its input memberships. Over
/// partition-of-unity scales this interpolates the rule table multilinearly,
/// so a monotone table yields a response monotone in every input -- a
/// guarantee max-aggregated clipping cannot give near term crossovers, where
/// a rising input can strengthen a low-output rule faster than any
/// higher-output rule.
pub fn rule_centroid_blend(rb: &RuleBase, p: f64, ai: f64, d: f64) -> Result<f64, FuzzyError> {
    let inputs = [
        rb.input_scales[0].clamp(p),
        rb.input_scales[1].clamp(ai),
        rb.input_scales[2].clamp(d),
    ];
    let degrees: Vec<Vec<f64>> = rb
        .input_scales
        .iter()
        .zip(inputs)
        .map(|(scale, x)| scale.terms.iter().map(|t| t.membership(x)).collect())
        .collect();

    let out = &rb.output_scale;
    let term_centroids: Vec<f64> = out
        .terms
        .iter()
        .map(|term| {
            let values: Vec<f64> = out.sample_points().map(|x| term.membership(x)).collect();
            centroid(&FuzzySet {
                lo: out.universe.0,
                step: SAMPLE_STEP,
                values,
            })
        })
        .collect::<Result<_, _>>()?;

    let mut num = 0.0;
    let mut den = 0.0;
    for rule in &rb.rules {
        let weight: f64 = rule
            .antecedent
            .iter()
            .enumerate()
            .map(|(k, &idx)| degrees[k][idx])
            .product();
        num += weight * term_centroids[rule.consequent];
        den += weight;
    }
    if den == 0.0 {
        return Err(FuzzyError::EmptySet);
    }
    Ok(num / den)
}

/// Centroid of the sampled set. Fails on an all-zero set.
pub fn centroid(fs: &FuzzySet) -> Result<f64, FuzzyError> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &mu) in fs.values.iter().enumerate() {
        num += fs.x_at(i) * mu;
        den += mu;
    }
    if den == 0.0 {
        return Err(FuzzyError::EmptySet);
    }
    Ok(num / den)
}

fn counts_product(counts: &[usize]) -> usize {
    counts.iter().product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assess::default_rule_base;
    use approx::assert_abs_diff_eq;

    fn tfn(a: f64, b: f64, c: f64, d: f64) -> TrapezoidalFuzzyNumber {
        TrapezoidalFuzzyNumber::new(a, b, c, d).unwrap()
    }

    #[test]
    fn graded_mean_examples() {
        assert_eq!(graded_mean(tfn(1.0, 1.0, 1.0, 1.0)), 1.0);
        assert_eq!(graded_mean(tfn(2.0, 4.0, 6.0, 8.0)), 5.0);
        // Symmetric about 3: (1, 2, 4, 5)
        assert_eq!(graded_mean(tfn(1.0, 2.0, 4.0, 5.0)), 3.0);
    }

    #[test]
    fn invalid_trapezoid_rejected() {
        assert!(TrapezoidalFuzzyNumber::new(3.0, 2.0, 4.0, 5.0).is_err());
    }

    #[test]
    fn default_scale_membership_examples() {
        let scale = LinguisticScale::default_five_term();
        assert_eq!(membership(&scale, "Very High", 10.0).unwrap(), 1.0);
        assert_eq!(membership(&scale, "Very Low", 10.0).unwrap(), 0.0);
        // Midway between Medium's center (5.5) and High's center (7.75).
        let mid = (5.5 + 7.75) / 2.0;
        assert_abs_diff_eq!(
            membership(&scale, "Medium", mid).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert!(matches!(
            membership(&scale, "Nope", 5.0),
            Err(FuzzyError::UnknownTerm(_))
        ));
        assert!(matches!(
            membership(&scale, "Low", 11.0),
            Err(FuzzyError::OutOfUniverse { .. })
        ));
    }

    #[test]
    fn default_scale_is_a_partition() {
        // Adjacent triangles cross at 0.5, so memberships sum to 1 everywhere.
        let scale = LinguisticScale::default_five_term();
        for x in scale.sample_points() {
            let total: f64 = scale.terms.iter().map(|t| t.membership(x)).sum();
            assert!(total > 0.0 && total <= 2.0 + 1e-12, "sum {total} at {x}");
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn single_rule_fires_fully_at_core() {
        let rb = default_rule_base();
        let out = mamdani_infer(&rb, 1.0, 1.0, 1.0);
        // Only the all-Very-Low rule fires, at strength 1: the output set is
        // the Very Low output term itself.
        let term = &rb.output_scale.terms[0];
        for (i, &mu) in out.values.iter().enumerate() {
            assert_abs_diff_eq!(mu, term.membership(out.x_at(i)), epsilon = 1e-12);
        }
    }

    #[test]
    fn half_strength_clipping() {
        let rb = default_rule_base();
        // p halfway down Very Low's slope; both firing rules map to Very Low.
        let p = (1.0 + 3.25) / 2.0;
        let out = mamdani_infer(&rb, p, 1.0, 1.0);
        let term = &rb.output_scale.terms[0];
        for (i, &mu) in out.values.iter().enumerate() {
            let expected = 0.5_f64.min(term.membership(out.x_at(i)));
            assert_abs_diff_eq!(mu, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn aggregation_bounds() {
        let rb = default_rule_base();
        for &(p, ai, d) in &[(2.0, 7.3, 9.1), (5.5, 5.5, 5.5), (1.0, 10.0, 4.2)] {
            let out = mamdani_infer(&rb, p, ai, d);
            assert!(out.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
            let c = centroid(&out).unwrap();
            assert!((1.0..=10.0).contains(&c));
        }
    }

    #[test]
    fn centroid_symmetric_set() {
        let rb = default_rule_base();
        let out = mamdani_infer(&rb, 5.5, 5.5, 5.5);
        assert_abs_diff_eq!(centroid(&out).unwrap(), 5.5, epsilon = 1e-9);
    }

    #[test]
    fn blend_agrees_with_mamdani_when_one_rule_fires() {
        // At pure term cores exactly one rule fires at full strength, so both
        // defuzzification routes see the same single output term.
        let rb = default_rule_base();
        for &(p, ai, d) in &[
            (1.0, 1.0, 1.0),
            (5.5, 5.5, 5.5),
            (10.0, 10.0, 10.0),
            (3.25, 7.75, 5.5),
        ] {
            let blend = rule_centroid_blend(&rb, p, ai, d).unwrap();
            let aggregate = centroid(&mamdani_infer(&rb, p, ai, d)).unwrap();
            assert_abs_diff_eq!(blend, aggregate, epsilon = 1e-9);
        }
    }

    #[test]
    fn blend_stays_inside_universe() {
        let rb = default_rule_base();
        for &(p, ai, d) in &[(2.2, 9.1, 4.4), (1.0, 10.0, 5.5), (6.75, 3.5, 8.25)] {
            let v = rule_centroid_blend(&rb, p, ai, d).unwrap();
            assert!((1.0..=10.0).contains(&v));
        }
    }

    #[test]
    fn centroid_of_empty_set_fails() {
        let fs = FuzzySet {
            lo: 1.0,
            step: SAMPLE_STEP,
            values: vec![0.0; 901],
        };
        assert_eq!(centroid(&fs), Err(FuzzyError::EmptySet));
    }

    #[test]
    fn rule_base_json_round_trip() {
        let rb = default_rule_base();
        let text = rb.to_json();
        let back = RuleBase::from_json(&text).unwrap();
        assert_eq!(rb, back);
    }

    #[test]
    fn incomplete_rule_base_rejected() {
        let rb = default_rule_base();
        let mut rules = rb.rules.clone();
        rules.pop();
        assert!(RuleBase::new(
            rb.input_scales.clone(),
            rb.output_scale.clone(),
            rules
        )
        .is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn corners() -> impl Strategy<Value = (f64, f64, f64, f64)> {
            (0.0..10.0f64, 0.0..10.0f64, 0.0..10.0f64, 0.0..10.0f64).prop_map(|(w, x, y, z)| {
                let mut v = [w, x, y, z];
                v.sort_by(f64::total_cmp);
                (v[0], v[1], v[2], v[3])
            })
        }

        proptest! {
            #[test]
            fn graded_mean_within_support((a, b, c, d) in corners()) {
                let g = graded_mean(tfn(a, b, c, d));
                prop_assert!(g >= a - 1e-12 && g <= d + 1e-12);
            }

            #[test]
            fn graded_mean_monotone_in_each_corner((a, b, c, d) in corners(), bump in 0.0..5.0f64) {
                let base = graded_mean(tfn(a, b, c, d));
                // Raise one corner at a time, clamped so ordering still holds.
                prop_assert!(graded_mean(tfn(a, b, c, d + bump)) >= base);
                prop_assert!(graded_mean(tfn(a, b, (c + bump).min(d), d)) >= base);
                prop_assert!(graded_mean(tfn(a, (b + bump).min(c), c, d)) >= base);
                prop_assert!(graded_mean(tfn((a + bump).min(b), b, c, d)) >= base);
            }
        }
    }
}
