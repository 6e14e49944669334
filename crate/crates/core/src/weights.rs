//! Weight profiles `w : (0, π] → ℝ⁺` and the certificate family `w_δ`.
//!
//! Profiles are piecewise closed forms (affine, power, `c·t/log(eπ/t)`,
//! `exp(−c/t)`, and the certificate's `A − log ∫_t^π ds/ψ`), with exact
//! derivatives and, where possible, exact antiderivatives of `1/w`. The
//! reciprocal integral `I(t) = ∫_t^π ds/ψ(s)` is a first-class cached object
//! because it appears inside `w_δ`, its derivative, and the `η_δ` equation.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc as Shared;

use crate::quad::adaptive_simpson;
use crate::step::{PiecewiseLinear, StepFunction};
use crate::{Error, Result};

/// Closed-form families a profile piece can take.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `intercept + slope · t`
    Affine { intercept: f64, slope: f64 },
    /// `coeff · t^exponent`
    Power { coeff: f64, exponent: f64 },
    /// `coeff · t / log(eπ/t)`
    TOverLogPi { coeff: f64 },
    /// `exp(−coeff / t)` (not log-integrable near 0; used as a negative test)
    ExpNegInv { coeff: f64 },
    /// `offset − log ∫_t^π ds/ψ(s)`
    LogIntegral { offset: f64, psi: Shared<ReciprocalIntegral> },
}

impl Family {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Family::Affine { intercept, slope } => intercept + slope * t,
            Family::Power { coeff, exponent } => coeff * t.powf(*exponent),
            Family::TOverLogPi { coeff } => coeff * t / (1.0 + (PI / t).ln()),
            Family::ExpNegInv { coeff } => (-coeff / t).exp(),
            Family::LogIntegral { offset, psi } => offset - psi.integral_from(t).ln(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Family::Affine { slope, .. } => *slope,
            Family::Power { coeff, exponent } => coeff * exponent * t.powf(exponent - 1.0),
            Family::TOverLogPi { coeff } => {
                let l = 1.0 + (PI / t).ln();
                coeff * (1.0 / l + 1.0 / (l * l))
            }
            Family::ExpNegInv { coeff } => (coeff / (t * t)) * (-coeff / t).exp(),
            Family::LogIntegral { psi, .. } => {
                1.0 / (psi.profile().value(t) * psi.integral_from(t))
            }
        }
    }

    /// `ln value(t)` without over/underflow where a closed form exists.
    pub fn ln_value(&self, t: f64) -> f64 {
        match self {
            Family::Power { coeff, exponent } => coeff.ln() + exponent * t.ln(),
            Family::ExpNegInv { coeff } => -coeff / t,
            _ => self.value(t).ln(),
        }
    }
}

/// One piece of a profile on the half-open interval `(lo, hi]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub family: Family,
}

/// Piecewise-closed-form weight profile on `(0, domain_end]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightProfile {
    pieces: Vec<Piece>,
}

impl WeightProfile {
    /// Builds a profile, checking coverage, continuity (1e-12 relative) and
    /// positivity at the knots.
    pub fn from_pieces(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidProfile { t: 0.0, reason: "no pieces".into() });
        }
        if pieces[0].lo != 0.0 {
            return Err(Error::InvalidProfile {
                t: pieces[0].lo,
                reason: "domain must start at 0".into(),
            });
        }
        for w in pieces.windows(2) {
            if (w[0].hi - w[1].lo).abs() > 1e-15 * (1.0 + w[0].hi.abs()) {
                return Err(Error::InvalidProfile {
                    t: w[0].hi,
                    reason: "pieces must be contiguous".into(),
                });
            }
            let knot = w[0].hi;
            let left = w[0].family.value(knot);
            let right = w[1].family.value(knot);
            if (left - right).abs() > 1e-12 * left.abs().max(right.abs()).max(1e-300) {
                return Err(Error::InvalidProfile {
                    t: knot,
                    reason: format!("discontinuity: {left} vs {right}"),
                });
            }
        }
        for p in &pieces {
            if p.hi <= p.lo {
                return Err(Error::InvalidProfile { t: p.lo, reason: "empty piece".into() });
            }
            let probe = 0.5 * (p.lo.max(p.hi * 1e-9) + p.hi);
            let positive = p.family.value(probe) > 0.0;
            if !positive && !matches!(p.family, Family::ExpNegInv { .. }) {
                return Err(Error::InvalidProfile {
                    t: probe,
                    reason: "profile must be positive".into(),
                });
            }
        }
        Ok(Self { pieces })
    }

    /// Single power piece `coeff · t^exponent` on `(0, hi]`.
    pub fn power(coeff: f64, exponent: f64, hi: f64) -> Self {
        Self {
            pieces: vec![Piece { lo: 0.0, hi, family: Family::Power { coeff, exponent } }],
        }
    }

    pub fn constant(value: f64, hi: f64) -> Self {
        Self::power(value, 0.0, hi)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn domain_end(&self) -> f64 {
        self.pieces.last().unwrap().hi
    }

    /// Interior knots (piece boundaries).
    pub fn knots(&self) -> Vec<f64> {
        self.pieces[..self.pieces.len() - 1].iter().map(|p| p.hi).collect()
    }

    fn piece_at(&self, t: f64) -> &Piece {
        // Pieces are (lo, hi]; find the first piece with hi >= t.
        let idx = self.pieces.partition_point(|p| p.hi < t);
        &self.pieces[idx.min(self.pieces.len() - 1)]
    }

    pub fn value(&self, t: f64) -> f64 {
        self.piece_at(t).family.value(t)
    }

    pub fn ln_value(&self, t: f64) -> f64 {
        self.piece_at(t).family.ln_value(t)
    }

    /// Derivative at `t`; at a knot this is the right derivative.
    pub fn derivative(&self, t: f64) -> f64 {
        self.piece_at(t).family.derivative(t)
    }

    /// Left and right derivatives at an interior knot.
    pub fn one_sided_derivatives(&self, knot: f64) -> (f64, f64) {
        let left_idx = self.pieces.partition_point(|p| p.hi < knot);
        let left = self.pieces[left_idx.min(self.pieces.len() - 1)].family.derivative(knot);
        let right_idx = self.pieces.partition_point(|p| p.hi <= knot);
        let right = self.pieces[right_idx.min(self.pieces.len() - 1)].family.derivative(knot);
        (left, right)
    }

    /// Rescales a unit-domain profile made of power pieces to `(0, a]` with
    /// amplitude `a^beta`: `t ↦ a^β · self(t/a)`.
    pub fn scale_from_unit(&self, a: f64, beta: f64) -> Result<Self> {
        let amp = a.powf(beta);
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let family = match &p.family {
                    Family::Power { coeff, exponent } => Family::Power {
                        coeff: amp * coeff * a.powf(-exponent),
                        exponent: *exponent,
                    },
                    Family::Affine { intercept, slope } => Family::Affine {
                        intercept: amp * intercept,
                        slope: amp * slope / a,
                    },
                    other => {
                        return Err(Error::InvalidProfile {
                            t: p.lo,
                            reason: format!("cannot rescale family {other:?}"),
                        })
                    }
                };
                Ok(Piece { lo: p.lo * a, hi: p.hi * a, family })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_pieces(pieces)
    }

    /// Checks `w > 0` and `w(t)` weakly increasing on a log grid (plus knots).
    pub fn check_increasing(&self, samples: usize) -> Result<()> {
        let grid = self.sample_grid(samples);
        let mut prev = -f64::INFINITY;
        for &t in &grid {
            let v = self.value(t);
            if v < prev * (1.0 - 1e-12) - 1e-300 {
                return Err(Error::MonotonicityViolation {
                    quantity: "w".into(),
                    expected: "weakly increasing".into(),
                    t,
                    value: v,
                });
            }
            prev = prev.max(v);
        }
        Ok(())
    }

    /// Log-spaced sample grid including all knots.
    pub fn sample_grid(&self, samples: usize) -> Vec<f64> {
        let hi = self.domain_end();
        let lo = hi * 1e-12;
        let mut grid: Vec<f64> = (0..samples)
            .map(|i| lo * (hi / lo).powf(i as f64 / (samples - 1) as f64))
            .collect();
        for p in &self.pieces {
            if p.lo > 0.0 {
                grid.push(p.lo * (1.0 + 1e-12));
                grid.push(p.lo * (1.0 - 1e-12));
            }
        }
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup();
        grid
    }
}

/// Cached antiderivative object `I(t) = ∫_t^end ds / ψ(s)`.
///
/// Exact on affine, power and `t/log` pieces; adaptive elsewhere. Knot
/// values are precomputed so point evaluations cost one closed form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReciprocalIntegral {
    profile: Shared<WeightProfile>,
    /// `I(piece.lo)` for every piece, plus trailing 0 at the domain end.
    cumulative: Vec<f64>,
}

impl ReciprocalIntegral {
    pub fn new(profile: Shared<WeightProfile>) -> Self {
        let n = profile.pieces().len();
        // cumulative[i] = I(pieces[i].lo); cumulative[n] = 0 at the domain
        // end. I(0) may diverge, so the first entry is never used directly.
        let mut cumulative = vec![0.0; n + 1];
        for i in (1..n).rev() {
            let p = &profile.pieces()[i];
            cumulative[i] = cumulative[i + 1] + Self::piece_integral(&p.family, p.lo, p.hi);
        }
        cumulative[0] = f64::INFINITY;
        Self { profile, cumulative }
    }

    pub fn profile(&self) -> &WeightProfile {
        &self.profile
    }

    /// `∫_t^end ds/ψ(s)`, exact piecewise. Requires `t > 0`.
    pub fn integral_from(&self, t: f64) -> f64 {
        let pieces = self.profile.pieces();
        if t >= self.profile.domain_end() {
            return 0.0;
        }
        let idx = pieces.partition_point(|p| p.hi < t).min(pieces.len() - 1);
        let p = &pieces[idx];
        self.cumulative[idx + 1] + Self::piece_integral(&p.family, t, p.hi)
    }

    /// `∫_a^b ds / family(s)` with closed forms where available.
    fn piece_integral(family: &Family, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match family {
            Family::Affine { intercept, slope } => {
                if slope.abs() > 0.0 {
                    ((intercept + slope * b) / (intercept + slope * a)).ln() / slope
                } else {
                    (b - a) / intercept
                }
            }
            Family::Power { coeff, exponent } => {
                // a^q·expm1(q·ln(b/a)) / (c·q) stays exact as q → 0, where
                // the naive b^q − a^q cancels catastrophically (psi pieces
                // reconstructed from envelopes carry exponents within a few
                // ulps of 1).
                let q = 1.0 - exponent;
                let l = (b / a).ln();
                let ratio_term = if q == 0.0 { l } else { (q * l).exp_m1() / q };
                a.powf(q) * ratio_term / coeff
            }
            Family::TOverLogPi { coeff } => {
                // ∫ (1 + ln π − ln s) / (c s) ds
                let prim = |s: f64| {
                    let ls = s.ln();
                    ((1.0 + PI.ln()) * ls - 0.5 * ls * ls) / coeff
                };
                prim(b) - prim(a)
            }
            other => {
                adaptive_simpson(|s| 1.0 / other.value(s), a, b, 1e-13 * (b - a).max(1.0), &[])
                    .value
            }
        }
    }
}

/// Parameters of the certificate construction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CertificateParams {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl CertificateParams {
    /// Validates `1/2 < α < β < (1+μ)/2`, `γ > 2`, `1 − 1/γ < α`.
    pub fn new(mu: f64, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let upper = (1.0 + mu) / 2.0;
        if !mu.is_finite() || mu <= 0.0 {
            return Err(Error::Precondition(format!("mu = {mu} must be positive")));
        }
        if !(0.5 < alpha && alpha < beta && beta < upper) {
            return Err(Error::Precondition(format!(
                "need 1/2 < alpha < beta < (1+mu)/2: alpha={alpha}, beta={beta}, bound={upper}"
            )));
        }
        if !gamma.is_finite() || gamma <= 2.0 {
            return Err(Error::Precondition(format!("gamma = {gamma} must exceed 2")));
        }
        if 1.0 - 1.0 / gamma >= alpha {
            return Err(Error::Precondition(format!(
                "need 1 - 1/gamma < alpha: gamma={gamma}, alpha={alpha}"
            )));
        }
        Ok(Self { mu, alpha, beta, gamma })
    }

    /// Midpoint defaults: `α` and `β` split the allowed intervals; `γ` sits
    /// just above 2, which maximizes the exponent `ν = α + 1/γ − 1` that
    /// controls how early the certificate's concavity threshold is reached.
    pub fn defaults(mu: f64) -> Result<Self> {
        let upper = (1.0 + mu) / 2.0;
        let alpha = 0.5 * (0.5 + upper);
        let beta = 0.5 * (alpha + upper);
        let gamma = 2.01_f64.min(0.5 * (2.0 + 1.0 / (1.0 - alpha)));
        Self::new(mu, alpha, beta, gamma)
    }
}

/// The cut-off profile `φ(t) = min{|E_t|, t^β}` with exact crossover knots.
///
/// Verifies (not assumes) that `φ(t)/t` is weakly decreasing; both branches
/// have that property whenever `|E_t|/t` decreases.
pub fn build_phi(measure: &PiecewiseLinear, beta: f64) -> Result<WeightProfile> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Precondition(format!("beta = {beta} must lie in (0, 1]")));
    }
    let knots = measure.knots();
    let mut pieces: Vec<Piece> = Vec::new();
    for w in knots.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let v_lo = measure.value(lo);
        let slope = measure.slope(0.5 * (lo + hi));
        let intercept = v_lo - slope * lo;
        let crossings = affine_power_crossings(intercept, slope, beta, lo, hi);
        let mut a = lo;
        for c in crossings.into_iter().chain(std::iter::once(hi)) {
            if c <= a {
                continue;
            }
            let mid = 0.5 * (a + c);
            let affine_val = intercept + slope * mid;
            let family = if affine_val <= mid.powf(beta) {
                Family::Affine { intercept, slope }
            } else {
                Family::Power { coeff: 1.0, exponent: beta }
            };
            push_merged(&mut pieces, Piece { lo: a, hi: c, family });
            a = c;
        }
    }
    let phi = WeightProfile::from_pieces(pieces)?;
    // φ(t)/t must decrease weakly; report the first violation if not.
    let grid = phi.sample_grid(512);
    let mut prev = f64::INFINITY;
    for &t in &grid {
        let ratio = phi.value(t) / t;
        if ratio > prev * (1.0 + 1e-10) {
            return Err(Error::MonotonicityViolation {
                quantity: "phi(t)/t".into(),
                expected: "weakly decreasing".into(),
                t,
                value: ratio,
            });
        }
        prev = prev.min(ratio);
    }
    Ok(phi)
}

fn push_merged(pieces: &mut Vec<Piece>, piece: Piece) {
    if let Some(last) = pieces.last_mut() {
        let same = match (&last.family, &piece.family) {
            (
                Family::Affine { intercept: a1, slope: b1 },
                Family::Affine { intercept: a2, slope: b2 },
            ) => (a1 - a2).abs() <= 1e-14 * (1.0 + a1.abs()) && (b1 - b2).abs() <= 1e-14 * (1.0 + b1.abs()),
            (
                Family::Power { coeff: c1, exponent: p1 },
                Family::Power { coeff: c2, exponent: p2 },
            ) => (c1 - c2).abs() <= 1e-14 * (1.0 + c1.abs()) && (p1 - p2).abs() <= 1e-14,
            _ => false,
        };
        if same {
            last.hi = piece.hi;
            return;
        }
    }
    pieces.push(piece);
}

/// Roots of `intercept + slope·t = t^β` inside `(lo, hi)`, in order.
///
/// The difference is convex (affine minus concave), so there are at most two
/// roots; they are isolated by splitting at the stationary point.
fn affine_power_crossings(intercept: f64, slope: f64, beta: f64, lo: f64, hi: f64) -> Vec<f64> {
    let h = |t: f64| intercept + slope * t - t.powf(beta);
    let mut seams = vec![lo, hi];
    if slope > 0.0 && (beta - 1.0).abs() > 1e-14 {
        // h'(t) = slope − β t^{β−1} = 0  ⇒  t = (β/slope)^{1/(1−β)}
        let t_star = (beta / slope).powf(1.0 / (1.0 - beta));
        if t_star > lo && t_star < hi {
            seams.insert(1, t_star);
        }
    }
    let mut roots = Vec::new();
    for w in seams.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (mut fa, fb) = (h(a.max(1e-300)), h(b));
        if fa == 0.0 {
            fa = h(a + 1e-15 * (b - a));
        }
        if fa * fb < 0.0 {
            // Geometric bisection: crossovers can sit scores of decades
            // below the bracket top, and only relative-in-t precision keeps the
            // crossover continuous to machine precision.
            let (mut x0, mut x1) = (a.max(1e-300), b);
            for _ in 0..200 {
                let m = (x0 * x1).sqrt();
                let fm = h(m);
                if fm == 0.0 || (x1 - x0) < 1e-15 * m {
                    x0 = m;
                    x1 = m;
                    break;
                }
                if fa * fm < 0.0 {
                    x1 = m;
                } else {
                    x0 = m;
                    fa = fm;
                }
            }
            roots.push((x0 * x1).sqrt());
        }
        let _ = fb;
    }
    roots
}

/// Outcome of the concavity check `t ↦ t^{1−1/γ} w'(t)` weakly decreasing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub holds: bool,
    pub gamma: f64,
    /// First violation: `(t, value_before, value_after)`.
    pub first_violation: Option<(f64, f64, f64)>,
}

/// Checks that `t^{1−1/γ} w'(t)` is weakly decreasing across a refinement
/// grid and across knots (left derivative ≥ right derivative).
///
/// Power and affine pieces are decided analytically (`w = c t^p` passes iff
/// `γ·p ≤ 1`); other families are sampled on a log grid.
pub fn concavity_check(w: &WeightProfile, gamma: f64) -> ConcavityReport {
    let exp_factor = 1.0 - 1.0 / gamma;
    let g = |t: f64| t.powf(exp_factor) * w.derivative(t);
    // Interior of each piece.
    for p in w.pieces() {
        match &p.family {
            Family::Power { coeff, exponent } => {
                let cp = coeff * exponent;
                let expo = exponent - 1.0 / gamma;
                let increasing = (cp > 0.0 && expo > 1e-14) || (cp < 0.0 && expo < -1e-14);
                if increasing {
                    let t0 = p.lo.max(p.hi * 1e-6);
                    return ConcavityReport {
                        holds: false,
                        gamma,
                        first_violation: Some((p.hi, g(t0), g(p.hi))),
                    };
                }
            }
            Family::Affine { slope, .. } => {
                if *slope > 0.0 && exp_factor > 0.0 {
                    let t0 = p.lo.max(p.hi * 1e-6);
                    return ConcavityReport {
                        holds: false,
                        gamma,
                        first_violation: Some((p.hi, g(t0), g(p.hi))),
                    };
                }
            }
            _ => {
                let lo = p.lo.max(p.hi * 1e-9);
                let n = 192;
                let mut prev_t = lo;
                let mut prev = g(lo);
                for i in 1..=n {
                    let t = lo * (p.hi / lo).powf(i as f64 / n as f64);
                    let cur = g(t);
                    if cur > prev + 1e-10 * (1.0 + prev.abs()) {
                        return ConcavityReport {
                            holds: false,
                            gamma,
                            first_violation: Some((prev_t, prev, cur)),
                        };
                    }
                    prev = cur;
                    prev_t = t;
                }
            }
        }
    }
    // Knots: the t-factor is continuous, so compare one-sided derivatives.
    for knot in w.knots() {
        let (left, right) = w.one_sided_derivatives(knot);
        if right > left + 1e-10 * (1.0 + left.abs()) {
            return ConcavityReport {
                holds: false,
                gamma,
                first_violation: Some((knot, left, right)),
            };
        }
    }
    ConcavityReport { holds: true, gamma, first_violation: None }
}

/// `∫_0^π |log w(t)| N(t) dt` with closed forms on affine/power pieces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogIntegrability {
    pub value: f64,
    pub finite: crate::diagnostics::Finiteness,
}

pub fn log_integrability(w: &WeightProfile, counting: &StepFunction) -> LogIntegrability {
    integrate_log_weight(w, counting, true)
}

/// Signed version `∫_0^π log w(t) N(t) dt` (finite flag shared).
pub fn log_integral_signed(w: &WeightProfile, counting: &StepFunction) -> LogIntegrability {
    integrate_log_weight(w, counting, false)
}

fn integrate_log_weight(
    w: &WeightProfile,
    counting: &StepFunction,
    absolute: bool,
) -> LogIntegrability {
    use crate::diagnostics::Finiteness;
    // Leading-piece tail analysis: |log w| ~ c/t near 0 is not integrable.
    if let Family::ExpNegInv { .. } = w.pieces()[0].family {
        return LogIntegrability { value: f64::INFINITY, finite: Finiteness::Infinite };
    }
    let mut acc = 0.0;
    let end = w.domain_end().min(PI);
    for p in w.pieces() {
        let hi = p.hi.min(end);
        if hi <= p.lo {
            continue;
        }
        acc += match &p.family {
            Family::Power { coeff, exponent } => {
                // log w = ln c + p ln t: sign change at t0 = exp(−ln c / p).
                integrate_affine_log_against(counting, coeff.ln(), *exponent, p.lo, hi, absolute)
            }
            Family::Affine { intercept, slope } => {
                integrate_log_affine_against(counting, *intercept, *slope, p.lo, hi, absolute)
            }
            other => {
                // Bounded on (lo, hi]: adaptive against each counting piece.
                let mut sum = 0.0;
                let mut seams: Vec<f64> = vec![p.lo.max(hi * 1e-12)];
                for &b in counting.breakpoints() {
                    if b > seams[0] && b < hi {
                        seams.push(b);
                    }
                }
                seams.push(hi);
                for sw in seams.windows(2) {
                    let n_val = counting.value(0.5 * (sw[0] + sw[1])) as f64;
                    if n_val == 0.0 {
                        continue;
                    }
                    let integrand = |t: f64| {
                        let l = other.ln_value(t);
                        if absolute {
                            l.abs()
                        } else {
                            l
                        }
                    };
                    sum += n_val
                        * adaptive_simpson(integrand, sw[0], sw[1], 1e-11, &[]).value;
                }
                sum
            }
        };
    }
    LogIntegrability { value: acc, finite: Finiteness::Finite }
}

/// `∫ (c0 + c1 ln t) N(t) dt` over `[lo, hi]`, split at the sign change when
/// taking absolute values.
fn integrate_affine_log_against(
    counting: &StepFunction,
    c0: f64,
    c1: f64,
    lo: f64,
    hi: f64,
    absolute: bool,
) -> f64 {
    if !absolute {
        return counting.integral_affine_log(c0, c1, lo, hi);
    }
    let mut seams = vec![lo, hi];
    if c1.abs() > 0.0 {
        let t0 = (-c0 / c1).exp();
        if t0 > lo && t0 < hi {
            seams.insert(1, t0);
        }
    }
    let mut acc = 0.0;
    for w in seams.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let sign = if c0 + c1 * mid.ln() >= 0.0 { 1.0 } else { -1.0 };
        acc += sign * counting.integral_affine_log(c0, c1, w[0], w[1]);
    }
    acc
}

/// `∫ |ln(a + b t)| N(t) dt` over `[lo, hi]` via per-piece closed forms.
fn integrate_log_affine_against(
    counting: &StepFunction,
    a: f64,
    b: f64,
    lo: f64,
    hi: f64,
    absolute: bool,
) -> f64 {
    if a == 0.0 {
        // ln(b t) = ln b + ln t.
        return integrate_affine_log_against(counting, b.ln(), 1.0, lo, hi, absolute);
    }
    let prim = |t: f64| {
        // ∫ ln(a + b t) dt
        if b.abs() > 0.0 {
            ((a + b * t) * (a + b * t).ln() - b * t) / b
        } else {
            t * a.ln()
        }
    };
    let mut seams = vec![lo, hi];
    if absolute && b.abs() > 0.0 {
        let t1 = (1.0 - a) / b;
        if t1 > lo && t1 < hi {
            seams.insert(1, t1);
        }
    }
    // Multiply by the counting value piecewise.
    let mut acc = 0.0;
    for w in seams.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let sign = if !absolute || (a + b * mid).ln() >= 0.0 { 1.0 } else { -1.0 };
        let mut cuts = vec![w[0]];
        for &bp in counting.breakpoints() {
            if bp > w[0] && bp < w[1] {
                cuts.push(bp);
            }
        }
        cuts.push(w[1]);
        for c in cuts.windows(2) {
            let v = counting.value(0.5 * (c[0] + c[1])) as f64;
            acc += sign * v * (prim(c[1]) - prim(c[0]));
        }
    }
    acc
}

/// The certificate weight `w_δ` plus its continuity constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WDelta {
    pub profile: WeightProfile,
    pub delta: f64,
    pub a_delta: f64,
    pub eta_delta: f64,
    /// `∫_δ^π ds/ψ`, cached for the knot inequality.
    pub integral_at_delta: f64,
}

/// Builds the three-piece certificate weight
///
/// ```text
/// w_δ(t) = (δ^α/ψ(δ)) t^{1−α}   on (0, δ],
///          A_δ − log ∫_t^π ds/ψ on (δ, η_δ],
///          1                    on (η_δ, π],
/// ```
///
/// with `A_δ` fixed by continuity at `δ` and `η_δ` solving
/// `∫_{η_δ}^π ds/ψ = exp(A_δ − 1)` by monotone bisection. A degenerate
/// middle piece (`η_δ = δ`) is allowed.
pub fn w_delta_family(
    psi: &Shared<ReciprocalIntegral>,
    params: &CertificateParams,
    delta: f64,
) -> Result<WDelta> {
    let alpha = params.alpha;
    let end = psi.profile().domain_end();
    if !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::Precondition(format!("delta = {delta} must lie in (0, 1)")));
    }
    let psi_delta = psi.profile().value(delta);
    if psi_delta < delta * (1.0 - 1e-12) {
        return Err(Error::Precondition(format!(
            "psi(delta) = {psi_delta} < delta = {delta}: psi must dominate t on (0, 1)"
        )));
    }
    let i_delta = psi.integral_from(delta);
    let a_delta = delta / psi_delta + i_delta.ln();
    let target = (a_delta - 1.0).exp();
    if target > i_delta * (1.0 + 1e-12) {
        return Err(Error::EtaOutOfRange { delta });
    }
    // Middle-piece value at eta: g(eta) = a_delta − ln I(eta) − 1, increasing.
    let g = |eta: f64| a_delta - psi.integral_from(eta).ln() - 1.0;
    let eta = if g(delta) >= -1e-13 {
        delta
    } else {
        let (mut lo, mut hi) = (delta, end);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            let gm = g(mid);
            if gm.abs() <= 1e-13 {
                lo = mid;
                hi = mid;
                break;
            }
            if gm < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    if eta.is_nan() || eta > end {
        return Err(Error::EtaOutOfRange { delta });
    }

    let coeff = delta.powf(alpha) / psi_delta;
    let mut pieces = vec![Piece {
        lo: 0.0,
        hi: delta,
        family: Family::Power { coeff, exponent: 1.0 - alpha },
    }];
    if eta > delta * (1.0 + 1e-14) {
        pieces.push(Piece {
            lo: delta,
            hi: eta,
            family: Family::LogIntegral { offset: a_delta, psi: Shared::clone(psi) },
        });
    }
    if end > eta * (1.0 + 1e-14) {
        pieces.push(Piece {
            lo: eta,
            hi: end,
            family: Family::Affine { intercept: 1.0, slope: 0.0 },
        });
    }
    let profile = WeightProfile::from_pieces(pieces)?;
    // Range sanity on a grid: 0 <= w_delta <= 1.
    for &t in profile.sample_grid(512).iter() {
        let v = profile.value(t);
        if !(-1e-12..=1.0 + 1e-10).contains(&v) {
            return Err(Error::InvalidProfile {
                t,
                reason: format!("w_delta out of [0,1]: {v}"),
            });
        }
    }
    Ok(WDelta { profile, delta, a_delta, eta_delta: eta, integral_at_delta: i_delta })
}

/// The knot inequality at `t = δ`: left derivative ≥ right derivative of
/// `w_δ`, which reduces to `∫_δ^π ds/ψ ≥ 1/(1−α)`.
pub fn knot_inequality_holds(
    psi: &ReciprocalIntegral,
    delta: f64,
    alpha: f64,
) -> bool {
    psi.integral_from(delta) >= 1.0 / (1.0 - alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::CircleSet;
    use crate::diagnostics::Finiteness;

    fn single_point_measure() -> PiecewiseLinear {
        CircleSet::from_points(&[0.0]).unwrap().neighborhood_measure()
    }

    #[test]
    fn phi_single_point_beta_one() {
        // min{2t, t} = t on all of (0, pi].
        let phi = build_phi(&single_point_measure(), 1.0).unwrap();
        for &t in &[1e-6, 0.01, 0.5, 3.0] {
            assert!((phi.value(t) - t).abs() < 1e-13 * t.max(1.0));
        }
    }

    #[test]
    fn phi_single_point_beta_half() {
        // Crossover where 2t = sqrt(t), i.e. t = 1/4.
        let phi = build_phi(&single_point_measure(), 0.5).unwrap();
        assert!((phi.value(0.1) - 0.2).abs() < 1e-13);
        assert!((phi.value(0.5) - 0.5f64.sqrt()).abs() < 1e-13);
        let knots = phi.knots();
        assert!(
            knots.iter().any(|&k| (k - 0.25).abs() < 1e-9),
            "crossover knot missing: {knots:?}"
        );
        // phi <= t^beta and phi <= |E_t| pointwise.
        let m = single_point_measure();
        for &t in &phi.sample_grid(200) {
            let v = phi.value(t);
            assert!(v <= t.powf(0.5) * (1.0 + 1e-12));
            assert!(v <= m.value(t) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn phi_saturated_measure_is_power_near_pi() {
        // Two points: |E_t| = 2 pi for t >= pi/2; t^beta < 2 pi there.
        let m = CircleSet::from_points(&[0.0, PI]).unwrap().neighborhood_measure();
        let phi = build_phi(&m, 0.5).unwrap();
        assert!((phi.value(3.0) - 3.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn concavity_power_criterion_exact() {
        let w03 = WeightProfile::power(1.0, 0.3, PI);
        assert!(concavity_check(&w03, 3.0).holds); // 0.9 <= 1
        let w04 = WeightProfile::power(1.0, 0.4, PI);
        let rep = concavity_check(&w04, 3.0);
        assert!(!rep.holds); // 1.2 > 1
        assert!(rep.first_violation.is_some());
    }

    #[test]
    fn log_integrability_linear_weight() {
        // w = t, E = {1}: finite; value = int_0^1 2 ln(1/t) dt + int_1^pi 2 ln t dt.
        let set = CircleSet::from_points(&[0.0]).unwrap();
        let w = WeightProfile::power(1.0, 1.0, PI);
        let li = log_integrability(&w, &set.counting_function());
        assert_eq!(li.finite, Finiteness::Finite);
        let expect = 2.0 * 1.0 + 2.0 * (PI * PI.ln() - PI + 1.0);
        assert!((li.value - expect).abs() < 1e-10, "got {} want {expect}", li.value);
    }

    #[test]
    fn log_integrability_exp_dip_is_infinite() {
        let set = CircleSet::from_points(&[0.0]).unwrap();
        let w = WeightProfile::from_pieces(vec![Piece {
            lo: 0.0,
            hi: PI,
            family: Family::ExpNegInv { coeff: 1.0 },
        }])
        .unwrap();
        let li = log_integrability(&w, &set.counting_function());
        assert_eq!(li.finite, Finiteness::Infinite);
    }

    #[test]
    fn log_integrability_scales_with_power() {
        // w = t^{1-alpha}: value is (1-alpha) times the w = t value.
        let set = CircleSet::cantor(
            &crate::circle::CantorSpec::new(
                crate::circle::LengthRule::Geometric { l0: PI / 2.0, lambda: 1.0 / 3.0 },
                0.0,
            ),
            8,
        )
        .unwrap()
        .endpoint_surrogate();
        let n = set.counting_function();
        let base = log_integrability(&WeightProfile::power(1.0, 1.0, PI), &n);
        let scaled = log_integrability(&WeightProfile::power(1.0, 0.4, PI), &n);
        assert_eq!(scaled.finite, Finiteness::Finite);
        assert!((scaled.value - 0.4 * base.value).abs() < 1e-9 * base.value);
    }

    #[test]
    fn w_delta_linear_psi_closed_form() {
        // psi = t, delta = pi e^{-3}: A = 1 + ln 3, eta = delta.
        let psi = Shared::new(WeightProfile::power(1.0, 1.0, PI));
        let integral = Shared::new(ReciprocalIntegral::new(psi));
        let mu = 1.0;
        let params = CertificateParams::new(mu, 0.75, 0.875, 2.01).unwrap();
        let delta = PI * (-3.0f64).exp();
        let wd = w_delta_family(&integral, &params, delta).unwrap();
        assert!((wd.a_delta - (1.0 + 3.0f64.ln())).abs() < 1e-12);
        assert!((wd.eta_delta - delta).abs() < 1e-12 * delta.max(1.0));
        // Continuity and bounds.
        assert!((wd.profile.value(delta) - delta / delta).abs() < 1e-12);
        assert!((wd.profile.value(PI) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eta_delta_bisection_vs_dyadic_quadrature_oracle() {
        // Independent oracle: dyadic refinement with I evaluated by
        // adaptive quadrature instead of the closed-form antiderivative.
        let psi_profile =
            Shared::new(build_phi(&single_point_measure(), 0.875).unwrap());
        let integral = Shared::new(ReciprocalIntegral::new(Shared::clone(&psi_profile)));
        let params = CertificateParams::new(1.0, 0.75, 0.875, 2.01).unwrap();
        let delta = PI * 2.0f64.powi(-14);
        let wd = w_delta_family(&integral, &params, delta).unwrap();

        let i_quad = |t: f64| {
            adaptive_simpson(|s| 1.0 / psi_profile.value(s), t, PI, 1e-14, &psi_profile.knots())
                .value
        };
        let a_delta = delta / psi_profile.value(delta) + i_quad(delta).ln();
        let target = (a_delta - 1.0).exp();
        let (mut lo, mut hi) = (delta, PI);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if i_quad(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let eta_oracle = 0.5 * (lo + hi);
        assert!(
            (wd.eta_delta - eta_oracle).abs() < 1e-10,
            "bisection {} vs oracle {eta_oracle}",
            wd.eta_delta
        );
    }

    #[test]
    fn eta_tends_to_zero_along_delta_grid() {
        let psi_profile =
            Shared::new(build_phi(&single_point_measure(), 0.875).unwrap());
        let integral = Shared::new(ReciprocalIntegral::new(psi_profile));
        let params = CertificateParams::new(1.0, 0.75, 0.875, 2.01).unwrap();
        let mut last = f64::INFINITY;
        for k in 4..=20 {
            let delta = PI * 2.0f64.powi(-k);
            let wd = w_delta_family(&integral, &params, delta).unwrap();
            assert!(wd.eta_delta <= last * (1.0 + 1e-12), "eta not decreasing at k={k}");
            last = wd.eta_delta;
        }
        assert!(last < 1e-2, "eta did not shrink: {last}");
    }

    #[test]
    fn w_delta_range_on_dense_grid() {
        let psi_profile =
            Shared::new(build_phi(&single_point_measure(), 0.875).unwrap());
        let integral = Shared::new(ReciprocalIntegral::new(psi_profile));
        let params = CertificateParams::new(1.0, 0.75, 0.875, 2.01).unwrap();
        for k in [4, 8, 12, 16] {
            let wd = w_delta_family(&integral, &params, PI * 2.0f64.powi(-k)).unwrap();
            for i in 1..=10_000 {
                let t = PI * i as f64 / 10_000.0;
                let v = wd.profile.value(t);
                assert!((-1e-12..=1.0 + 1e-10).contains(&v), "w({t}) = {v}");
            }
        }
    }

    #[test]
    fn knot_inequality_for_t_over_log_psi() {
        // psi(t) = t / log(e pi / t): I(delta) = X + X^2/2 with X = ln(pi/delta).
        let psi = Shared::new(
            WeightProfile::from_pieces(vec![Piece {
                lo: 0.0,
                hi: PI,
                family: Family::TOverLogPi { coeff: 1.0 },
            }])
            .unwrap(),
        );
        let integral = ReciprocalIntegral::new(psi);
        let alpha = 0.75;
        // Small delta: I huge, inequality holds.
        assert!(knot_inequality_holds(&integral, 1e-6, alpha));
        // Delta near pi: I(delta) -> 0, inequality fails.
        assert!(!knot_inequality_holds(&integral, PI * 0.95, alpha));
        // Closed form sanity.
        let x = (PI / 1e-3).ln();
        assert!(
            (integral.integral_from(1e-3) - (x + x * x / 2.0)).abs() < 1e-9,
            "I = {}",
            integral.integral_from(1e-3)
        );
    }

    #[test]
    fn reciprocal_integral_matches_quadrature_on_mixed_profile() {
        let phi = build_phi(&single_point_measure(), 0.7).unwrap();
        let shared = Shared::new(phi.clone());
        let integral = ReciprocalIntegral::new(shared);
        for &t in &[1e-4, 0.01, 0.3, 2.0] {
            let q = adaptive_simpson(|s| 1.0 / phi.value(s), t, PI, 1e-13, &phi.knots()).value;
            let c = integral.integral_from(t);
            assert!((q - c).abs() < 1e-9 * (1.0 + q.abs()), "t={t}: {c} vs {q}");
        }
    }
}
