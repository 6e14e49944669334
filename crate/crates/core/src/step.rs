//! Exact right-continuous step functions on `(0, π]` and their running
//! integrals.
//!
//! `StepFunction` holds the gap-counting function `N_E` (twice the number of
//! complementary arcs longer than `2t`); `PiecewiseLinear` holds the
//! neighborhood measure `t ↦ |E_t|`. Both are exact objects: integrals
//! against powers and logarithms use closed-form antiderivatives, never
//! quadrature.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::{Error, Result};

/// Right-continuous, weakly decreasing step function on `(0, π]` with
/// nonnegative integer values.
///
/// `values[i]` is the value on `[breakpoints[i-1], breakpoints[i])`, with the
/// first piece starting at `0` (exclusive) and the last piece closing at `π`.
/// Breakpoints lie strictly inside `(0, π)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<u64>,
}

impl StepFunction {
    /// Builds a step function, validating the representation.
    pub fn new(breakpoints: Vec<f64>, values: Vec<u64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::Precondition(format!(
                "step function needs {} values for {} breakpoints",
                breakpoints.len() + 1,
                breakpoints.len()
            )));
        }
        for w in breakpoints.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Precondition("breakpoints must increase".into()));
            }
        }
        if let (Some(&first), Some(&last)) = (breakpoints.first(), breakpoints.last()) {
            if first <= 0.0 || last >= PI {
                return Err(Error::Precondition(
                    "breakpoints must lie strictly inside (0, pi)".into(),
                ));
            }
        }
        Ok(Self { breakpoints, values })
    }

    /// Constant function on `(0, π]`.
    pub fn constant(value: u64) -> Self {
        Self { breakpoints: Vec::new(), values: vec![value] }
    }

    /// Builds `N_E` from complementary-arc (gap) lengths: each gap `g`
    /// contributes 2 on `(0, g/2)`. Gap half-lengths at or above `π` never
    /// expire inside the domain.
    pub fn from_gap_lengths(gaps: &[f64]) -> Self {
        let mut cuts: Vec<f64> = gaps
            .iter()
            .map(|g| 0.5 * g)
            .filter(|&h| h > 0.0 && h < PI)
            .collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut values = Vec::with_capacity(cuts.len() + 1);
        // Value on (0, first cut): every positive gap is still open.
        let open_total = gaps.iter().filter(|&&g| g > 0.0).count() as u64;
        values.push(2 * open_total);
        for &c in &cuts {
            let still_open = gaps.iter().filter(|&&g| 0.5 * g > c).count() as u64;
            values.push(2 * still_open);
        }
        Self { breakpoints: cuts, values }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn piece_values(&self) -> &[u64] {
        &self.values
    }

    /// Value at `t` (right-continuous).
    pub fn value(&self, t: f64) -> u64 {
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        self.values[idx]
    }

    /// `∫_0^t  self(s) ds`, exact.
    pub fn integral_to(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        let mut lo = 0.0;
        for (i, &b) in self.breakpoints.iter().enumerate() {
            if t <= b {
                return acc + self.values[i] as f64 * (t - lo);
            }
            acc += self.values[i] as f64 * (b - lo);
            lo = b;
        }
        acc + *self.values.last().unwrap() as f64 * (t - lo)
    }

    /// `∫_0^π self(t) dt`.
    pub fn total_integral(&self) -> f64 {
        self.integral_to(PI)
    }

    /// `∫_lo^hi t^p · self(t) dt`, exact per piece. Requires `p > -1` when
    /// `lo == 0`.
    pub fn integral_power(&self, p: f64, lo: f64, hi: f64) -> f64 {
        self.integral_with(lo, hi, |a, b| antiderivative_power(p, a, b))
    }

    /// `∫_lo^hi log(π/t) · self(t) dt`, exact per piece.
    pub fn integral_log_pi_over_t(&self, lo: f64, hi: f64) -> f64 {
        self.integral_with(lo, hi, |a, b| {
            primitive_log_pi_over_t(b) - primitive_log_pi_over_t(a)
        })
    }

    /// `∫_lo^hi t^s · log^m(π/t) · self(t) dt` for `m ∈ {0, 1, 2}`, exact.
    pub fn integral_power_logm(&self, s: f64, m: u32, lo: f64, hi: f64) -> f64 {
        self.integral_with(lo, hi, |a, b| {
            primitive_power_logm(s, m, b) - primitive_power_logm(s, m, a)
        })
    }

    /// `∫_lo^hi (c0 + c1·ln t) · self(t) dt`, exact per piece.
    pub fn integral_affine_log(&self, c0: f64, c1: f64, lo: f64, hi: f64) -> f64 {
        self.integral_with(lo, hi, |a, b| {
            let prim = |x: f64| {
                if x == 0.0 {
                    0.0
                } else {
                    c0 * x + c1 * (x * x.ln() - x)
                }
            };
            prim(b) - prim(a)
        })
    }

    fn integral_with<F: Fn(f64, f64) -> f64>(&self, lo: f64, hi: f64, piece: F) -> f64 {
        assert!(lo >= 0.0 && hi <= PI + 1e-12 && lo <= hi);
        let mut acc = 0.0;
        let mut a: f64 = 0.0;
        for i in 0..self.values.len() {
            let b = if i < self.breakpoints.len() { self.breakpoints[i] } else { PI };
            let seg_lo = a.max(lo);
            let seg_hi = b.min(hi);
            if seg_hi > seg_lo && self.values[i] > 0 {
                acc += self.values[i] as f64 * piece(seg_lo, seg_hi);
            }
            a = b;
            if a >= hi {
                break;
            }
        }
        acc
    }

    /// Checks that the function is weakly decreasing with even values.
    pub fn is_valid_counting_function(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0]) && self.values.iter().all(|v| v % 2 == 0)
    }
}

fn antiderivative_power(p: f64, a: f64, b: f64) -> f64 {
    if (p + 1.0).abs() < 1e-14 {
        (b / a.max(f64::MIN_POSITIVE)).ln()
    } else {
        let q = p + 1.0;
        let pa = if a == 0.0 { 0.0 } else { a.powf(q) };
        (b.powf(q) - pa) / q
    }
}

fn primitive_log_pi_over_t(t: f64) -> f64 {
    // d/dt [ t (log(pi/t) + 1) ] = log(pi/t); vanishes at t = 0.
    if t == 0.0 {
        0.0
    } else {
        t * ((PI / t).ln() + 1.0)
    }
}

/// Antiderivative of `t^s log^m(π/t)` for `m ∈ {0,1,2}`; vanishing at 0 when
/// `s > -1`.
fn primitive_power_logm(s: f64, m: u32, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let l = (PI / t).ln();
    if (s + 1.0).abs() < 1e-14 {
        return match m {
            0 => t.ln(),
            1 => -l * l / 2.0,
            _ => -l * l * l / 3.0,
        };
    }
    let q = s + 1.0;
    let tq = t.powf(q);
    match m {
        0 => tq / q,
        1 => tq * (l / q + 1.0 / (q * q)),
        _ => tq * (l * l / q + 2.0 * l / (q * q) + 2.0 / (q * q * q)),
    }
}

/// Weakly increasing piecewise-linear function on `[0, π]`: the neighborhood
/// measure `t ↦ |E_t| = |E| + Σ_j min(2t, g_j)`.
///
/// `base` is `|E|` (zero for measure-zero sets); the slope on each piece is
/// the counting-function value there.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    base: f64,
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    /// Cached values at `0` and at each breakpoint.
    knot_values: Vec<f64>,
}

impl PiecewiseLinear {
    /// Running integral of a step function plus a base offset.
    pub fn from_step(step: &StepFunction, base: f64) -> Self {
        let breakpoints = step.breakpoints().to_vec();
        let slopes: Vec<f64> = step.piece_values().iter().map(|&v| v as f64).collect();
        let mut knot_values = Vec::with_capacity(breakpoints.len() + 1);
        knot_values.push(base);
        let mut acc = base;
        let mut lo = 0.0;
        for (i, &b) in breakpoints.iter().enumerate() {
            acc += slopes[i] * (b - lo);
            knot_values.push(acc);
            lo = b;
        }
        Self { base, breakpoints, slopes, knot_values }
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// Exact value at `t ∈ [0, π]`.
    pub fn value(&self, t: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        let lo = if idx == 0 { 0.0 } else { self.breakpoints[idx - 1] };
        self.knot_values[idx] + self.slopes[idx] * (t - lo)
    }

    /// Slope at `t` (right-continuous), i.e. the counting-function value.
    pub fn slope(&self, t: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        self.slopes[idx]
    }

    /// `∫_lo^hi dt / self(t)`, exact: each piece is `1/(a + b t)`.
    pub fn integral_reciprocal(&self, lo: f64, hi: f64) -> f64 {
        assert!(lo > 0.0 && hi <= PI + 1e-12 && lo <= hi);
        let mut acc = 0.0;
        let mut a: f64 = 0.0;
        for i in 0..self.slopes.len() {
            let b = if i < self.breakpoints.len() { self.breakpoints[i] } else { PI };
            let seg_lo = a.max(lo);
            let seg_hi = b.min(hi);
            if seg_hi > seg_lo {
                // On this piece, value(t) = v0 + m (t - a).
                let v0 = self.knot_values[i];
                let m = self.slopes[i];
                let val_lo = v0 + m * (seg_lo - a);
                let val_hi = v0 + m * (seg_hi - a);
                if m.abs() > 0.0 {
                    acc += (val_hi / val_lo).ln() / m;
                } else {
                    acc += (seg_hi - seg_lo) / val_lo;
                }
            }
            a = b;
            if a >= hi {
                break;
            }
        }
        acc
    }

    /// The knots where the slope changes, plus the domain ends.
    pub fn knots(&self) -> Vec<f64> {
        let mut k = Vec::with_capacity(self.breakpoints.len() + 2);
        k.push(0.0);
        k.extend_from_slice(&self.breakpoints);
        k.push(PI);
        k
    }

    /// `∫_lo^hi t^p · self(t) dt`, exact per piece. For `p ≤ -1` the lower
    /// bound must stay positive unless the touching piece vanishes at 0.
    pub fn integral_power_weighted(&self, p: f64, lo: f64, hi: f64) -> f64 {
        assert!(lo >= 0.0 && lo <= hi);
        let mono = |q: f64, t: f64| -> f64 {
            // antiderivative of t^q, vanishing at 0 for q > -1
            if (q + 1.0).abs() < 1e-14 {
                t.max(f64::MIN_POSITIVE).ln()
            } else if t == 0.0 {
                0.0
            } else {
                t.powf(q + 1.0) / (q + 1.0)
            }
        };
        let mut acc = 0.0;
        let mut a: f64 = 0.0;
        for i in 0..self.slopes.len() {
            let b = if i < self.breakpoints.len() { self.breakpoints[i] } else { PI };
            let seg_lo = a.max(lo);
            let seg_hi = b.min(hi);
            if seg_hi > seg_lo {
                // value(t) = c + m t with c = knot_values[i] - m*a.
                let m = self.slopes[i];
                let c = self.knot_values[i] - m * a;
                if c.abs() > 0.0 {
                    assert!(
                        p > -1.0 || seg_lo > 0.0,
                        "divergent weighted integral at 0"
                    );
                    acc += c * (mono(p, seg_hi) - mono(p, seg_lo));
                }
                if m.abs() > 0.0 {
                    acc += m * (mono(p + 1.0, seg_hi) - mono(p + 1.0, seg_lo));
                }
            }
            a = b;
            if a >= hi {
                break;
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_gap_counting_function() {
        // One complementary arc of length 2*pi: N = 2 on all of (0, pi].
        let n = StepFunction::from_gap_lengths(&[2.0 * PI]);
        assert_eq!(n.value(0.001), 2);
        assert_eq!(n.value(PI), 2);
        assert!(n.breakpoints().is_empty());
        assert!(n.is_valid_counting_function());
    }

    #[test]
    fn two_gaps_of_length_pi() {
        let n = StepFunction::from_gap_lengths(&[PI, PI]);
        assert_eq!(n.value(0.3), 4);
        // Right-continuity: at the breakpoint pi/2 the value has dropped.
        assert_eq!(n.value(PI / 2.0), 0);
        assert_eq!(n.value(PI), 0);
    }

    #[test]
    fn integral_matches_measure() {
        let n = StepFunction::from_gap_lengths(&[PI, PI]);
        let m = PiecewiseLinear::from_step(&n, 0.0);
        assert!((m.value(0.25) - 1.0).abs() < 1e-15);
        assert!((m.value(PI) - 2.0 * PI).abs() < 1e-12);
        // Saturation at 2 pi.
        assert!((m.value(2.0) - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn carleson_closed_form_single_point() {
        // E = {1}: integral of 2 log(pi/t) over (0, pi] equals 2 pi.
        let n = StepFunction::from_gap_lengths(&[2.0 * PI]);
        let v = n.integral_log_pi_over_t(0.0, PI);
        assert!((v - 2.0 * PI).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn reciprocal_integral_single_point() {
        // |E_t| = 2t: I(eps) = (1/2) ln(pi/eps).
        let n = StepFunction::from_gap_lengths(&[2.0 * PI]);
        let m = PiecewiseLinear::from_step(&n, 0.0);
        let eps = 1e-4;
        let v = m.integral_reciprocal(eps, PI);
        assert!((v - 0.5 * (PI / eps).ln()).abs() < 1e-10);
    }

    #[test]
    fn power_integral_closed_form() {
        // E = {1}, alpha = 1/4: int_0^pi t^(-1/2) * 2 dt = 4 sqrt(pi).
        let n = StepFunction::from_gap_lengths(&[2.0 * PI]);
        let v = n.integral_power(-0.5, 0.0, PI);
        assert!((v - 4.0 * PI.sqrt()).abs() < 1e-12);
    }
}
