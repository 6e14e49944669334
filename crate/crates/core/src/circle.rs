//! Exact geometry of closed subsets of the unit circle.
//!
//! Angles are stored as arclength in `[0, 2π)`; a point is a zero-length arc,
//! so one representation covers point sets and arc unions. All `CircleSet`
//! values are canonical: arcs sorted by start, pairwise disjoint.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::step::{PiecewiseLinear, StepFunction};
use crate::{Error, Result};

const TAU: f64 = 2.0 * PI;

/// Normalizes an angle to `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Arclength distance between two angles, in `[0, π]`.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// A closed arc on the circle. `length == 0` denotes a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    start: f64,
    length: f64,
}

impl Arc {
    pub fn new(start: f64, length: f64) -> Result<Self> {
        if !start.is_finite() || !length.is_finite() || !(0.0..=TAU).contains(&length) {
            return Err(Error::InvalidArc {
                start,
                length,
                reason: "length must lie in [0, 2pi]".into(),
            });
        }
        Ok(Self { start: wrap_angle(start), length })
    }

    pub fn point(angle: f64) -> Self {
        Self { start: wrap_angle(angle), length: 0.0 }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn end(&self) -> f64 {
        wrap_angle(self.start + self.length)
    }

    /// Whether the angle lies in the closed arc.
    pub fn contains(&self, theta: f64) -> bool {
        let offset = (wrap_angle(theta) - self.start).rem_euclid(TAU);
        offset <= self.length
    }

    /// Arclength distance from an angle to the closed arc.
    pub fn distance(&self, theta: f64) -> f64 {
        if self.contains(theta) {
            0.0
        } else {
            circle_distance(theta, self.start).min(circle_distance(theta, self.end()))
        }
    }
}

/// Length rule for a generalized Cantor construction: produces the common
/// arc length `l_n` at every generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum LengthRule {
    /// `l_n = l0 · λ^n`.
    Geometric { l0: f64, lambda: f64 },
    /// `l_n = l0 · exp(−c (2^n − 1) / max(n,1)^p)`: super-exponentially
    /// shrinking arcs; `p = 0, c = 1` gives `l_n = l0 e^{1 − 2^n}`.
    DoubleExp { l0: f64, c: f64, p: f64 },
    /// Explicit list `l_0, …, l_N`.
    Explicit { lengths: Vec<f64> },
}

impl LengthRule {
    /// `ln l_n`, computed without underflow.
    pub fn ln_length(&self, n: u32) -> f64 {
        match self {
            LengthRule::Geometric { l0, lambda } => l0.ln() + n as f64 * lambda.ln(),
            LengthRule::DoubleExp { l0, c, p } => {
                let k = n as f64;
                let denom = k.max(1.0).powf(*p);
                l0.ln() - c * ((2f64).powf(k) - 1.0) / denom
            }
            LengthRule::Explicit { lengths } => lengths[n as usize].ln(),
        }
    }

    pub fn length(&self, n: u32) -> f64 {
        self.ln_length(n).exp()
    }

    /// Largest generation the rule defines (explicit lists are finite).
    pub fn max_generation(&self) -> Option<u32> {
        match self {
            LengthRule::Explicit { lengths } => Some(lengths.len() as u32 - 1),
            _ => None,
        }
    }
}

/// Specification of a generalized Cantor set: a base arc of length `l_0`
/// anchored at `base_start`, recursively split by the length rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorSpec {
    pub rule: LengthRule,
    /// Start angle of the base arc.
    pub base_start: f64,
    /// Horizon (number of ratios) over which parametric rules are validated.
    pub horizon: u32,
}

impl CantorSpec {
    pub fn new(rule: LengthRule, base_start: f64) -> Self {
        let horizon = rule.max_generation().unwrap_or(64);
        Self { rule, base_start: wrap_angle(base_start), horizon }
    }

    /// Gap opened at generation `k ≥ 1`: `g_k = l_{k−1} − 2 l_k`.
    pub fn gap(&self, k: u32) -> f64 {
        let lk1 = self.rule.ln_length(k - 1);
        let lk = self.rule.ln_length(k);
        // l_{k-1} (1 - 2 exp(ln l_k - ln l_{k-1})), stable when l_k underflows.
        lk1.exp() * (1.0 - 2.0 * (lk - lk1).exp())
    }

    /// Supremum of the ratios `l_{n+1}/l_n` over the declared horizon.
    pub fn sup_ratio(&self) -> f64 {
        let last = self.horizon.min(self.rule.max_generation().unwrap_or(u32::MAX));
        (0..last)
            .map(|n| (self.rule.ln_length(n + 1) - self.rule.ln_length(n)).exp())
            .fold(0.0, f64::max)
    }

    /// Validates the rule through generation `upto` (and the declared
    /// horizon for ratio checks). Reports the first violating index.
    pub fn validate(&self, upto: u32) -> Result<()> {
        let l0 = self.rule.length(0);
        if !(l0 > 0.0 && l0 < TAU) {
            return Err(Error::InvalidCantorSpec {
                index: 0,
                reason: format!("base length l0 = {l0} must lie in (0, 2pi)"),
            });
        }
        if let Some(maxg) = self.rule.max_generation() {
            if upto > maxg {
                return Err(Error::GenerationTooDeep { requested: upto, cap: maxg });
            }
        }
        let check_to = upto.max(self.horizon.min(self.rule.max_generation().unwrap_or(self.horizon)));
        let half_ln = 0.5f64.ln();
        for k in 1..=check_to {
            // Ratio and gap positivity coincide (g_k > 0 ⟺ l_k/l_{k−1} < 1/2);
            // compare in log space so underflowing lengths stay checkable.
            let ln_ratio = self.rule.ln_length(k) - self.rule.ln_length(k - 1);
            if !ln_ratio.is_finite() || ln_ratio >= half_ln {
                return Err(Error::InvalidCantorSpec {
                    index: k,
                    reason: format!(
                        "ratio l_{k}/l_{} = {} must be < 1/2",
                        k - 1,
                        ln_ratio.exp()
                    ),
                });
            }
            // Representable scales also get the explicit gap check.
            if self.rule.ln_length(k - 1) > -700.0 && self.gap(k) <= 0.0 {
                return Err(Error::InvalidCantorSpec {
                    index: k,
                    reason: format!("gap g_{k} = {} must be positive", self.gap(k)),
                });
            }
        }
        Ok(())
    }

    /// Deepest generation at which `l_n` and the 2^n arc starts stay
    /// representable (no underflow of `2^n · l_n`).
    pub fn max_safe_generation(&self) -> u32 {
        let mut n = 0u32;
        loop {
            if let Some(maxg) = self.rule.max_generation() {
                if n >= maxg {
                    return maxg;
                }
            }
            let ln_next = self.rule.ln_length(n + 1);
            let ln_mass = (n + 1) as f64 * std::f64::consts::LN_2 + ln_next;
            if ln_next < -700.0 || ln_mass < -700.0 || n >= 60 {
                return n;
            }
            n += 1;
        }
    }

    /// Counting function of the *limit* set, exact for `t ≥ t_min`.
    ///
    /// Gaps are enumerated generation by generation until every remaining gap
    /// is shorter than `2 t_min`; below that the function undercounts (the
    /// companion measure profile carries the unresolved mass in its base).
    pub fn limit_counting_function(&self, t_min: f64) -> StepFunction {
        let (gaps, _) = self.resolved_gaps(t_min);
        StepFunction::from_gap_lengths(&gaps)
    }

    /// Neighborhood measure `|E_t|` of the *limit* set, exact for
    /// `t ≥ t_min`. The unresolved tail mass `2^K l_K` enters as the base
    /// value, which makes the profile exact at every `t ≥ l_K / 2` and an
    /// overestimate below.
    pub fn limit_neighborhood_measure(&self, t_min: f64) -> PiecewiseLinear {
        let (gaps, tail_mass) = self.resolved_gaps(t_min);
        let step = StepFunction::from_gap_lengths(&gaps);
        PiecewiseLinear::from_step(&step, tail_mass)
    }

    /// All gaps with half-length above `t_min`, with multiplicity, plus the
    /// exact unresolved mass `2^K l_K = Σ_{k>K} 2^{k−1} g_k`.
    fn resolved_gaps(&self, t_min: f64) -> (Vec<f64>, f64) {
        let outer = TAU - self.rule.length(0);
        let mut gaps = vec![outer];
        let mut k = 1u32;
        loop {
            if let Some(maxg) = self.rule.max_generation() {
                if k > maxg {
                    // Explicit list exhausted: treat it as a truncation at
                    // its last generation (tail mass 2^maxg * l_maxg).
                    let lnk = self.rule.ln_length(maxg);
                    let mass = (maxg as f64 * std::f64::consts::LN_2 + lnk).exp();
                    return (gaps, mass);
                }
            }
            // Stop once l_{k-1} <= 2 t_min: all deeper gaps are shorter.
            let ln_prev = self.rule.ln_length(k - 1);
            if ln_prev.exp() <= 2.0 * t_min || k > 2000 {
                let kk = k - 1;
                let mass = (kk as f64 * std::f64::consts::LN_2 + ln_prev).exp();
                return (gaps, mass);
            }
            let g = self.gap(k);
            let count = 1u64 << (k - 1).min(62);
            for _ in 0..count.min(1 << 22) {
                gaps.push(g);
            }
            k += 1;
        }
    }
}

/// Metadata attached to a Cantor-generated set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CantorTag {
    pub spec: CantorSpec,
    pub generation: u32,
    /// Hausdorff distance bound between the truncation and the limit set.
    pub hausdorff_bound: f64,
    /// Measure of the truncation (the limit set has measure zero).
    pub measure_overestimate: f64,
    /// Set when the arcs were replaced by their endpoints.
    pub endpoint_surrogate: bool,
}

/// A finite disjoint union of closed arcs (points are zero-length arcs).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircleSet {
    arcs: Vec<Arc>,
    cantor: Option<CantorTag>,
    total_measure: f64,
}

impl CircleSet {
    /// Builds a set from arcs, sorting and checking disjointness.
    pub fn from_arcs(mut arcs: Vec<Arc>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::EmptySet);
        }
        arcs.sort_by(|a, b| a.start.partial_cmp(&b.start).unwrap());
        let n = arcs.len();
        let total: f64 = arcs.iter().map(|a| a.length).sum();
        if total > TAU + 1e-12 {
            return Err(Error::Precondition("arcs cover more than the circle".into()));
        }
        for i in 0..n {
            let cur = &arcs[i];
            let next = &arcs[(i + 1) % n];
            if n > 1 {
                let gap = (next.start - cur.start - cur.length).rem_euclid(TAU);
                // A zero gap between distinct arcs means they touch or overlap.
                if gap <= 0.0 || !gap.is_finite() {
                    return Err(Error::OverlappingArcs { angle: next.start });
                }
            }
        }
        Ok(Self { arcs, cantor: None, total_measure: total })
    }

    pub fn from_points(points: &[f64]) -> Result<Self> {
        let mut pts: Vec<f64> = points.iter().map(|&p| wrap_angle(p)).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        Self::from_arcs(pts.into_iter().map(Arc::point).collect())
    }

    /// Points placed so that the complementary gaps have the given lengths
    /// (normalized to sum to 2π), first point at angle 0.
    pub fn from_gap_lengths(gaps: &[f64]) -> Result<Self> {
        if gaps.is_empty() || gaps.iter().any(|&g| g <= 0.0) {
            return Err(Error::Precondition("gap lengths must be positive".into()));
        }
        let total: f64 = gaps.iter().sum();
        let scale = TAU / total;
        let mut pos = 0.0;
        let mut pts = Vec::with_capacity(gaps.len());
        pts.push(0.0);
        for &g in &gaps[..gaps.len() - 1] {
            pos += g * scale;
            pts.push(pos);
        }
        Self::from_points(&pts)
    }

    /// Generates the 2^n closed arcs of a Cantor construction at generation
    /// `n`, with truncation metadata.
    pub fn cantor(spec: &CantorSpec, generation: u32) -> Result<Self> {
        spec.validate(generation)?;
        let cap = spec.max_safe_generation();
        if generation > cap {
            return Err(Error::GenerationTooDeep { requested: generation, cap });
        }
        let mut starts = vec![spec.base_start];
        for k in 1..=generation {
            let prev_len = spec.rule.length(k - 1);
            let len = spec.rule.length(k);
            let mut next = Vec::with_capacity(starts.len() * 2);
            for &s in &starts {
                next.push(s);
                next.push(s + prev_len - len);
            }
            starts = next;
        }
        let len_n = spec.rule.length(generation);
        let arcs: Vec<Arc> = starts
            .into_iter()
            .map(|s| Arc { start: wrap_angle(s), length: len_n })
            .collect();
        let mut set = Self::from_arcs(arcs)?;
        set.total_measure = 2f64.powi(generation as i32) * len_n;
        set.cantor = Some(CantorTag {
            spec: spec.clone(),
            generation,
            hausdorff_bound: len_n / 2.0,
            measure_overestimate: 2f64.powi(generation as i32) * len_n,
            endpoint_surrogate: false,
        });
        Ok(set)
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn cantor_tag(&self) -> Option<&CantorTag> {
        self.cantor.as_ref()
    }

    pub fn total_measure(&self) -> f64 {
        self.total_measure
    }

    pub fn is_measure_zero(&self) -> bool {
        self.total_measure == 0.0
    }

    /// Arclength distance from an angle to the set.
    pub fn distance(&self, theta: f64) -> f64 {
        let theta = wrap_angle(theta);
        let n = self.arcs.len();
        // Binary search for the arc with the largest start <= theta; the
        // nearest arc is that one or its cyclic successor.
        let idx = self.arcs.partition_point(|a| a.start <= theta);
        let mut best = f64::INFINITY;
        for off in [n.wrapping_sub(1), 0, 1] {
            let j = (idx + off) % n;
            best = best.min(self.arcs[j].distance(theta));
        }
        best
    }

    /// Distance by brute force over all arcs (test oracle).
    pub fn distance_brute_force(&self, theta: f64) -> f64 {
        self.arcs.iter().map(|a| a.distance(theta)).fold(f64::INFINITY, f64::min)
    }

    /// Lengths of the complementary arcs, in cyclic order.
    pub fn gap_lengths(&self) -> Vec<f64> {
        let n = self.arcs.len();
        if n == 1 {
            return vec![TAU - self.arcs[0].length];
        }
        (0..n)
            .map(|i| {
                let cur = &self.arcs[i];
                let next = &self.arcs[(i + 1) % n];
                (next.start - cur.start - cur.length).rem_euclid(TAU)
            })
            .collect()
    }

    /// The gap (complementary arc) containing the angle, if any: returns the
    /// index into `gap_lengths()` order.
    pub fn gap_index(&self, theta: f64) -> Option<usize> {
        let theta = wrap_angle(theta);
        let n = self.arcs.len();
        if n == 1 {
            return if self.arcs[0].contains(theta) { None } else { Some(0) };
        }
        let idx = self.arcs.partition_point(|a| a.start <= theta);
        // Candidate: the arc before theta (cyclically).
        let i = (idx + n - 1) % n;
        if self.arcs[i].contains(theta) || self.arcs[(idx) % n].contains(theta) {
            return None;
        }
        Some(i)
    }

    /// Counting function `N_E(t) = 2 Σ_j 1{|I_j| > 2t}` from the gap lengths
    /// of this (possibly truncated) set.
    pub fn counting_function(&self) -> StepFunction {
        StepFunction::from_gap_lengths(&self.gap_lengths())
    }

    /// Neighborhood measure `|E_t| = |E| + Σ_j min(2t, g_j)` as an exact
    /// piecewise-linear function; saturates at `2π`.
    pub fn neighborhood_measure(&self) -> PiecewiseLinear {
        PiecewiseLinear::from_step(&self.counting_function(), self.total_measure)
    }

    /// Replaces every positive-length arc by its two endpoints, producing a
    /// measure-zero surrogate lying inside the limit set (for Cantor
    /// truncations) at Hausdorff distance at most half the arc length.
    pub fn endpoint_surrogate(&self) -> CircleSet {
        if self.is_measure_zero() {
            return self.clone();
        }
        let mut pts = Vec::with_capacity(self.arcs.len() * 2);
        for a in &self.arcs {
            pts.push(a.start);
            if a.length > 0.0 {
                pts.push(a.end());
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        let arcs: Vec<Arc> = pts.into_iter().map(Arc::point).collect();
        let mut set = CircleSet { arcs, cantor: self.cantor.clone(), total_measure: 0.0 };
        if let Some(tag) = set.cantor.as_mut() {
            tag.endpoint_surrogate = true;
        }
        set
    }

    /// Whether every arc of `self` is contained in some arc of `other`.
    pub fn is_subset_of(&self, other: &CircleSet) -> bool {
        self.arcs.iter().all(|a| {
            other.arcs.iter().any(|b| {
                let off = (a.start - b.start).rem_euclid(TAU);
                off <= b.length + 1e-12 && off + a.length <= b.length + 1e-12
            })
        })
    }

    /// Measure profile preferred for analysis: the exact limit-set profile
    /// when a Cantor rule is attached (resolved down to `t_min`), otherwise
    /// the profile of the set itself.
    pub fn analysis_measure(&self, t_min: f64) -> PiecewiseLinear {
        match &self.cantor {
            Some(tag) => tag.spec.limit_neighborhood_measure(t_min),
            None => self.neighborhood_measure(),
        }
    }

    /// Counting function preferred for analysis (see `analysis_measure`).
    pub fn analysis_counting(&self, t_min: f64) -> StepFunction {
        match &self.cantor {
            Some(tag) => tag.spec.limit_counting_function(t_min),
            None => self.counting_function(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn middle_thirds() -> CantorSpec {
        CantorSpec::new(LengthRule::Geometric { l0: PI / 2.0, lambda: 1.0 / 3.0 }, 0.0)
    }

    #[test]
    fn generation_zero_is_base_arc() {
        let set = CircleSet::cantor(&middle_thirds(), 0).unwrap();
        assert_eq!(set.arcs().len(), 1);
        assert!((set.arcs()[0].length() - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn generation_one_middle_thirds() {
        // Two arcs of length pi/6 at the ends of [0, pi/2].
        let set = CircleSet::cantor(&middle_thirds(), 1).unwrap();
        let arcs = set.arcs();
        assert_eq!(arcs.len(), 2);
        assert!((arcs[0].start() - 0.0).abs() < 1e-15);
        assert!((arcs[0].length() - PI / 6.0).abs() < 1e-15);
        assert!((arcs[1].start() - PI / 3.0).abs() < 1e-14);
        assert!((arcs[1].length() - PI / 6.0).abs() < 1e-15);
    }

    #[test]
    fn double_exp_generation_three() {
        let spec = CantorSpec::new(LengthRule::DoubleExp { l0: PI / 2.0, c: 1.0, p: 0.0 }, 0.0);
        let set = CircleSet::cantor(&spec, 3).unwrap();
        assert_eq!(set.arcs().len(), 8);
        for k in 1..=3u32 {
            let expect = spec.rule.length(k - 1) - 2.0 * spec.rule.length(k);
            assert!(expect > 0.0);
            assert!((spec.gap(k) - expect).abs() < 1e-15 * expect.max(1.0));
        }
    }

    #[test]
    fn invalid_spec_reports_index() {
        let spec = CantorSpec::new(
            LengthRule::Explicit { lengths: vec![1.0, 0.4, 0.21] },
            0.0,
        );
        // ratio l2/l1 = 0.525 >= 1/2 -> index 2.
        match spec.validate(2) {
            Err(Error::InvalidCantorSpec { index, .. }) => assert_eq!(index, 2),
            other => panic!("expected invalid spec, got {other:?}"),
        }
    }

    #[test]
    fn distance_to_point_set() {
        let set = CircleSet::from_points(&[0.0]).unwrap();
        assert!((set.distance(PI / 2.0) - PI / 2.0).abs() < 1e-15);
        assert_eq!(set.distance(0.0), 0.0);
    }

    #[test]
    fn distance_inside_arc_is_zero() {
        let set =
            CircleSet::from_arcs(vec![Arc::new(1.0, 0.5).unwrap()]).unwrap();
        assert_eq!(set.distance(1.2), 0.0);
        assert!(set.distance(0.9) > 0.0);
    }

    #[test]
    fn distance_to_gap_center_is_half_gap() {
        // Generation-2 middle thirds; center of the generation-1 middle gap.
        let set = CircleSet::cantor(&middle_thirds(), 2).unwrap();
        let g1 = middle_thirds().gap(1);
        let center = PI / 4.0; // middle of the base arc [0, pi/2]
        let d = set.distance(center);
        assert!((d - g1 / 2.0).abs() < 1e-14, "d = {d}, g1/2 = {}", g1 / 2.0);
        assert!((d - set.distance_brute_force(center)).abs() < 1e-15);
    }

    #[test]
    fn distance_binary_search_agrees_with_brute_force() {
        let set = CircleSet::cantor(&middle_thirds(), 6).unwrap();
        let mut rng = crate::util::SplitMix64::new(7);
        for _ in 0..2000 {
            let theta = rng.range(0.0, TAU);
            assert_eq!(set.distance(theta), set.distance_brute_force(theta));
        }
    }

    #[test]
    fn nested_generations() {
        let g5 = CircleSet::cantor(&middle_thirds(), 5).unwrap();
        let g6 = CircleSet::cantor(&middle_thirds(), 6).unwrap();
        assert!(g6.is_subset_of(&g5));
        assert!(!g5.is_subset_of(&g6));
    }

    #[test]
    fn middle_thirds_measure_at_truncation_scale() {
        // At t = l_n / 2 the neighborhood measure equals 2^n * 2 l_n.
        for n in [3u32, 6, 9] {
            let spec = middle_thirds();
            let set = CircleSet::cantor(&spec, n).unwrap();
            let m = set.neighborhood_measure();
            let ln = spec.rule.length(n);
            let expect = 2f64.powi(n as i32) * 2.0 * ln;
            let got = m.value(ln / 2.0);
            assert!(
                (got - expect).abs() < 1e-12 * expect,
                "n={n}: got {got}, expect {expect}"
            );
        }
    }

    #[test]
    fn limit_profile_matches_truncation_above_floor() {
        let spec = middle_thirds();
        let set = CircleSet::cantor(&spec, 10).unwrap();
        let l10 = spec.rule.length(10);
        let truncated = set.neighborhood_measure();
        let limit = spec.limit_neighborhood_measure(l10 / 4.0);
        for &t in &[l10, 3.0 * l10, 0.001, 0.01, 0.1, 1.0, PI] {
            if t >= l10 / 2.0 {
                let a = truncated.value(t);
                let b = limit.value(t);
                assert!(
                    (a - b).abs() <= 1e-9 * a.max(1e-300),
                    "t={t}: truncated {a} vs limit {b}"
                );
            }
        }
    }

    #[test]
    fn counting_function_of_two_points() {
        let set = CircleSet::from_points(&[0.0, PI]).unwrap();
        let n = set.counting_function();
        assert_eq!(n.value(0.1), 4);
        assert_eq!(n.value(PI / 2.0), 0);
    }

    #[test]
    fn endpoint_surrogate_is_measure_zero() {
        let set = CircleSet::cantor(&middle_thirds(), 4).unwrap();
        assert!(set.total_measure() > 0.0);
        let pts = set.endpoint_surrogate();
        assert!(pts.is_measure_zero());
        assert_eq!(pts.arcs().len(), 32);
        assert!(pts.is_subset_of(&set));
    }

    #[test]
    fn gap_index_lookup() {
        let set = CircleSet::from_points(&[0.0, PI]).unwrap();
        assert_eq!(set.gap_index(1.0), Some(0));
        assert_eq!(set.gap_index(4.0), Some(1));
        assert_eq!(set.gap_index(0.0), None);
    }
}
