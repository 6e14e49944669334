//! Rising-sun machinery: increasing regularization of sampled functions,
//! shade components, contact-set density, and the construction of `ψ` from
//! `φ`.
//!
//! The increasing regularization `ũ(x) = inf{u(y) : y ≥ x}` is computed as an
//! exact suffix minimum by one backward scan. In the log coordinates
//! `x = log(1/t)` the construction of `ψ` becomes exactly this suffix
//! minimum, and the piecewise-linear envelope maps back to a piecewise-power
//! profile, so the `ψ` conclusions hold at grid nodes by construction, not
//! by tolerance.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{classify_increments, Divergence};
use crate::weights::{Family, Piece, ReciprocalIntegral, WeightProfile};
use crate::{Error, Result};
use std::sync::Arc as Shared;

/// A function sampled on a strictly increasing grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledFunction {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || xs.len() != values.len() {
            return Err(Error::Precondition("grid and values must match and be nonempty".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition("grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("values must be finite".into()));
        }
        Ok(Self { xs, values })
    }
}

/// Result of increasing regularization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularizationResult {
    pub input: SampledFunction,
    /// Suffix minimum `ũ` (weakly increasing, `ũ ≤ u`, `ũ = u` on the sun).
    pub envelope: Vec<f64>,
    /// `contact[i]` iff `ũ(x_i) == u(x_i)` (exact float equality: the scan
    /// copies values).
    pub contact: Vec<bool>,
}

/// Exact suffix minimum via one backward scan, `O(n)`.
pub fn increasing_regularization(u: &SampledFunction) -> RegularizationResult {
    let n = u.values.len();
    let mut envelope = vec![0.0; n];
    let mut running = f64::INFINITY;
    for i in (0..n).rev() {
        running = running.min(u.values[i]);
        envelope[i] = running;
    }
    let contact = envelope.iter().zip(&u.values).map(|(e, v)| e == v).collect();
    RegularizationResult { input: u.clone(), envelope, contact }
}

/// Brute-force suffix minimum (`O(n²)` oracle: independent per index).
pub fn suffix_min_brute_force(values: &[f64]) -> Vec<f64> {
    (0..values.len())
        .map(|i| values[i..].iter().copied().fold(f64::INFINITY, f64::min))
        .collect()
}

/// A maximal shade run (indices where `ũ < u`) with its endpoint samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShadeComponent {
    /// First and last index of the run.
    pub first: usize,
    pub last: usize,
    /// Index of the first contact point after the run (`None` when the run
    /// touches the end of the grid, where the truncated suffix makes the
    /// envelope an upper bound for the true one).
    pub exit: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShadeReport {
    pub components: Vec<ShadeComponent>,
    /// Whether `u(first) ≥ u(exit) − tol` held for every interior component.
    pub endpoints_ok: bool,
    /// Worst signed violation `u(exit) − u(first)` observed (positive = bad).
    pub worst_violation: f64,
}

/// Extracts maximal shade intervals and checks the endpoint comparison
/// `u(a) ≥ u(b)` (with `a` the entry sample of the run and `b` the contact
/// sample just after it, matching the right-continuous step reading of the
/// samples). On exact grids this holds strictly; for samples of a continuum
/// function a tolerance covers unresolved crossings.
pub fn shade_components(r: &RegularizationResult, tol: f64) -> ShadeReport {
    let n = r.contact.len();
    let mut components = Vec::new();
    let mut i = 0;
    while i < n {
        if !r.contact[i] {
            let first = i;
            while i < n && !r.contact[i] {
                i += 1;
            }
            let last = i - 1;
            let exit = if i < n { Some(i) } else { None };
            components.push(ShadeComponent { first, last, exit });
        } else {
            i += 1;
        }
    }
    let mut endpoints_ok = true;
    let mut worst = f64::NEG_INFINITY;
    for c in &components {
        if let Some(b) = c.exit {
            let gap = r.input.values[b] - r.input.values[c.first];
            worst = worst.max(gap);
            if gap > tol {
                endpoints_ok = false;
            }
        }
    }
    ShadeReport { components, endpoints_ok, worst_violation: worst }
}

/// Density of the contact (sun) set over a window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityReport {
    /// Measured `|S ∩ [x_0, x_end]| / (x_end − x_0)`.
    pub measured: f64,
    /// `min u(x)/x` over the window tail (the liminf surrogate).
    pub bound: f64,
    pub holds: bool,
}

/// Measures the contact-set density and compares it against the lower bound
/// `liminf u(x)/x`. Requires `u(x) − x` weakly decreasing on the window.
pub fn contact_density(
    r: &RegularizationResult,
    window: (f64, f64),
    slack: f64,
) -> Result<DensityReport> {
    let xs = &r.input.xs;
    let vals = &r.input.values;
    let (w_lo, w_hi) = window;
    // Verify the precondition on the window, reporting the first violation.
    let mut prev: Option<(f64, f64)> = None;
    for (x, v) in xs.iter().zip(vals) {
        if *x < w_lo || *x > w_hi {
            continue;
        }
        if let Some((_, pd)) = prev {
            let d = v - x;
            if d > pd + 1e-9 * (1.0 + pd.abs()) {
                return Err(Error::MonotonicityViolation {
                    quantity: "u(x) - x".into(),
                    expected: "weakly decreasing".into(),
                    t: *x,
                    value: d,
                });
            }
        }
        prev = Some((*x, v - x));
    }
    // Contact measure with each sample owning the cell [x_i, x_{i+1}).
    let x0 = xs[0];
    let mut measure = 0.0;
    let mut bound = f64::INFINITY;
    for i in 0..xs.len() {
        let x = xs[i];
        if x > w_hi {
            break;
        }
        let cell = if i + 1 < xs.len() { xs[i + 1] - x } else { 0.0 };
        if r.contact[i] {
            measure += cell.min((w_hi - x).max(0.0));
        }
        if x >= w_lo && x > 0.0 {
            bound = bound.min(vals[i] / x);
        }
    }
    let denom = w_hi - x0;
    let measured = measure / denom;
    Ok(DensityReport { measured, bound, holds: measured >= bound - slack })
}

/// Divergence evidence for `∫_0^a dt/ψ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivergenceEvidence {
    /// `(ε, ∫_ε^a dt/ψ)` along a decade schedule.
    pub partial_integrals: Vec<(f64, f64)>,
    /// Growth classification of the per-decade increments.
    pub growth: Divergence,
    /// Closed-form verdict inherited from the input profile, when known.
    pub inherited: Option<Divergence>,
}

/// Output of the `ψ` construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsiResult {
    pub psi: WeightProfile,
    pub regularization: RegularizationResult,
    pub divergence: DivergenceEvidence,
    /// Grid bounds in `t`.
    pub t_min: f64,
    pub t_max: f64,
}

/// Builds `ψ` from `φ` on `(0, a]` for exponents `0 < α < β ≤ 1`:
/// rescale to a unit domain, transform to `u(x) = −log φ̂(e^{−x})/(1−α)
/// − αx/(1−α)` on a log grid, regularize, and map the envelope back. The
/// envelope is piecewise linear in `x`, so `ψ` is exactly piecewise power
/// in `t`, and the three conclusions are checked as hard assertions at the
/// grid nodes: `ψ/t^α` weakly increasing, `φ ≤ ψ ≤ t^β`, and growth of the
/// partial integrals `∫_ε^a dt/ψ`.
pub fn build_psi(
    phi: &WeightProfile,
    alpha: f64,
    beta: f64,
    grid_size: usize,
    t_min_factor: f64,
    inherited_divergence: Option<Divergence>,
) -> Result<PsiResult> {
    if !(0.0 < alpha && alpha < beta && beta <= 1.0) {
        return Err(Error::Precondition(format!(
            "need 0 < alpha < beta <= 1: alpha={alpha}, beta={beta}"
        )));
    }
    let a = phi.domain_end();
    // Preconditions on phi: 0 < phi <= t^beta, phi(t)/t weakly decreasing.
    let probe = phi.sample_grid(1024);
    let mut prev_ratio = f64::INFINITY;
    for &t in &probe {
        let v = phi.value(t);
        let lnv = phi.ln_value(t);
        let positive = v > 0.0;
        if !positive && lnv.is_nan() {
            return Err(Error::InvalidProfile { t, reason: "phi must be positive".into() });
        }
        if lnv > beta * (t / a).ln() + beta * a.ln() + 1e-10 {
            return Err(Error::MonotonicityViolation {
                quantity: "phi".into(),
                expected: format!("<= t^beta (beta={beta})"),
                t,
                value: v,
            });
        }
        let ratio = lnv - t.ln();
        if ratio > prev_ratio + 1e-9 {
            return Err(Error::MonotonicityViolation {
                quantity: "phi(t)/t".into(),
                expected: "weakly decreasing".into(),
                t,
                value: ratio.exp(),
            });
        }
        prev_ratio = prev_ratio.min(ratio);
    }

    // Unit rescale: phi_hat(s) = phi(a s)/a^beta on (0, 1]; x = log(1/s).
    let n = grid_size.max(16);
    let x_max = (1.0 / t_min_factor).ln();
    let xs: Vec<f64> = (0..n).map(|i| x_max * i as f64 / (n - 1) as f64).collect();
    let one_minus_alpha = 1.0 - alpha;
    let ln_amp = beta * a.ln();
    let u_vals: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let t = a * (-x).exp();
            let ln_phi_hat = phi.ln_value(t) - ln_amp;
            -ln_phi_hat / one_minus_alpha - alpha * x / one_minus_alpha
        })
        .collect();
    let sampled = SampledFunction::new(xs.clone(), u_vals)?;
    let reg = increasing_regularization(&sampled);

    // Map the envelope back: between nodes, linear-in-x envelope segments
    // become power pieces; grid order in t is reversed.
    let mut pieces: Vec<Piece> = Vec::with_capacity(n);
    for i in (1..n).rev() {
        // Segment x in [xs[i-1], xs[i]] covers t in [a e^{-xs[i]}, a e^{-xs[i-1]}].
        let (x0, x1) = (xs[i - 1], xs[i]);
        let (e0, e1) = (reg.envelope[i - 1], reg.envelope[i]);
        let slope = (e1 - e0) / (x1 - x0);
        // ln psi_hat(s) = -(1-alpha) u~(x) - alpha x with x = ln(1/s):
        // on the segment, ln psi = [(1-alpha) m + alpha] ln s + const.
        let exponent = one_minus_alpha * slope + alpha;
        // Match the value at the segment's lower x end (larger t).
        let t_hi = a * (-x0).exp();
        let t_lo = a * (-x1).exp();
        let ln_val_hi = ln_amp - one_minus_alpha * e0 - alpha * x0;
        let ln_t_hi = a.ln() - x0;
        let coeff = (ln_val_hi - exponent * ln_t_hi).exp();
        pieces.push(Piece { lo: t_lo, hi: t_hi, family: Family::Power { coeff, exponent } });
    }
    // Extend the deepest segment down to 0 so the profile covers (0, a].
    if let Some(first) = pieces.first_mut() {
        first.lo = 0.0;
    }
    // Merge consecutive segments with equal exponents to keep the piece
    // count proportional to the envelope's slope changes.
    let mut merged: Vec<Piece> = Vec::new();
    for p in pieces {
        if let Some(last) = merged.last_mut() {
            if let (Family::Power { coeff: c1, exponent: e1 }, Family::Power { coeff: c2, exponent: e2 }) =
                (&last.family, &p.family)
            {
                if (e1 - e2).abs() < 1e-13 && (c1 - c2).abs() <= 1e-10 * c1.abs().max(*c2) {
                    last.hi = p.hi;
                    continue;
                }
            }
        }
        merged.push(p);
    }
    let psi = WeightProfile::from_pieces(merged)?;

    // Hard assertions at grid nodes: phi <= psi <= t^beta, psi/t^alpha
    // weakly increasing (the envelope is increasing by construction, but
    // assert on the reconstructed profile).
    let mut prev_ratio = -f64::INFINITY;
    for i in (0..n).rev() {
        let t = a * (-xs[i]).exp();
        let ln_psi = psi.ln_value(t);
        let ln_phi = phi.ln_value(t);
        if ln_psi < ln_phi - 1e-9 {
            return Err(Error::MonotonicityViolation {
                quantity: "psi".into(),
                expected: "phi <= psi".into(),
                t,
                value: (ln_psi - ln_phi).exp(),
            });
        }
        if ln_psi > beta * t.ln() + 1e-9 {
            return Err(Error::MonotonicityViolation {
                quantity: "psi".into(),
                expected: "psi <= t^beta".into(),
                t,
                value: (ln_psi - beta * t.ln()).exp(),
            });
        }
        let ratio = ln_psi - alpha * t.ln();
        if ratio < prev_ratio - 1e-9 {
            return Err(Error::MonotonicityViolation {
                quantity: "psi(t)/t^alpha".into(),
                expected: "weakly increasing".into(),
                t,
                value: ratio.exp(),
            });
        }
        prev_ratio = prev_ratio.max(ratio);
    }

    // Partial integrals of 1/psi over a decade schedule in epsilon.
    let integral = ReciprocalIntegral::new(Shared::new(psi.clone()));
    let mut partials = Vec::new();
    let mut eps = a / 10.0;
    let t_min = a * t_min_factor;
    while eps >= t_min {
        partials.push((eps, integral.integral_from(eps)));
        eps /= 10.0;
    }
    let increments: Vec<f64> = partials.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let growth = classify_increments(&increments);
    Ok(PsiResult {
        psi,
        regularization: reg,
        divergence: DivergenceEvidence {
            partial_integrals: partials,
            growth,
            inherited: inherited_divergence,
        },
        t_min,
        t_max: a,
    })
}
