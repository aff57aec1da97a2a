//! The surface defect function `R` and the renewal integral
//! `Ŝ = (1/η) ∫_0^1 r^{D−d} R(r) dr`.

use serde::Serialize;

use super::{classify_lattice, renewal_eta, similarity_dimension, Lattice, DEFAULT_MAX_DENOMINATOR};
use crate::contents::{kappa, log_trapezoid};
use crate::error::{Error, Result};
use crate::profile::{RadialProfile, Source};

/// Samples of `R` on `(0, 1]`. At each ratio `r_i` inside the range the
/// indicator jumps, so the radius appears twice: left limit, then right limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RFunction {
    pub dim: usize,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// `S(r) + Σ_i 1{r ≤ r_i} r_i^{d−1} S(r/r_i)`, the size of the terms
    /// whose difference is `R`; zero when the values were given directly.
    pub scale: Vec<f64>,
    /// Whether the samples are exact up to rounding (analytic source).
    pub exact: bool,
}

impl RFunction {
    /// `R` given directly, treated as exact.
    pub fn from_values(dim: usize, radii: Vec<f64>, values: Vec<f64>) -> Self {
        let scale = vec![0.0; radii.len()];
        RFunction { dim, radii, values, scale, exact: true }
    }
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// `S` at `x`, piecewise linear in `log r` between samples.
fn interp_surface(p: &RadialProfile, x: f64) -> Result<f64> {
    let r = &p.radii;
    let n = r.len();
    if x < r[0] * (1.0 - 1e-12) || x > r[n - 1] * (1.0 + 1e-12) {
        return Err(Error::Coverage(format!("S({x}) needed outside the profile [{}, {}]", r[0], r[n - 1])));
    }
    let k = r.partition_point(|&t| t < x);
    if k < n && same(r[k], x) {
        return Ok(p.surface[k]);
    }
    if k == 0 {
        return Ok(p.surface[0]);
    }
    if k == n {
        return Ok(p.surface[n - 1]);
    }
    let w = (x.ln() - r[k - 1].ln()) / (r[k].ln() - r[k - 1].ln());
    Ok(p.surface[k - 1] + w * (p.surface[k] - p.surface[k - 1]))
}

/// `R(r) = S(r) − Σ_i 1{r ≤ r_i} r_i^{d−1} S(r/r_i)` on the profile radii up
/// to 1, with both one-sided values at each `r_i`.
pub fn r_function(p: &RadialProfile, ratios: &[f64]) -> Result<RFunction> {
    p.validate()?;
    let n = p.len();
    if p.radii[n - 1] < 1.0 * (1.0 - 1e-12) {
        return Err(Error::Coverage(format!(
            "the profile must reach r = 1 (largest radius {})",
            p.radii[n - 1]
        )));
    }
    let r_min = p.radii[0];
    let mut xs: Vec<f64> = p.radii.iter().copied().filter(|&r| r <= 1.0 * (1.0 + 1e-12)).collect();
    for &ri in ratios {
        if ri >= r_min && !xs.iter().any(|&x| same(x, ri)) {
            xs.push(ri);
        }
    }
    if !xs.iter().any(|&x| same(x, 1.0)) {
        xs.push(1.0);
    }
    xs.sort_by(f64::total_cmp);
    let e = p.dim as i32 - 1;
    let mut radii = Vec::with_capacity(xs.len() + ratios.len());
    let mut values = Vec::with_capacity(xs.len() + ratios.len());
    let mut scale = Vec::with_capacity(xs.len() + ratios.len());
    for &x in &xs {
        let s = interp_surface(p, x)?;
        let (mut left, mut right) = (s, s);
        let (mut left_scale, mut right_scale) = (s.abs(), s.abs());
        let mut jump = false;
        for &ri in ratios {
            if x <= ri * (1.0 + 1e-12) {
                let term = ri.powi(e) * interp_surface(p, (x / ri).min(1.0))?;
                left -= term;
                left_scale += term.abs();
                if same(x, ri) {
                    jump = true;
                } else {
                    right -= term;
                    right_scale += term.abs();
                }
            }
        }
        radii.push(x);
        values.push(left);
        scale.push(left_scale);
        if jump {
            radii.push(x);
            values.push(right);
            scale.push(right_scale);
        }
    }
    Ok(RFunction { dim: p.dim, radii, values, scale, exact: p.source == Source::Analytic })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailFit {
    /// Fitted exponent in `r^{D−d+1} R(r) ≈ a r^γ` on the smallest octave.
    pub gamma_hat: f64,
    pub amplitude: f64,
    /// `∫_0^{r_min} a r^γ d log r = a r_min^γ / γ`.
    pub tail: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub n_samples: usize,
}

/// Treatment of `∫_0^{r_min} r^{D−d} R(r) dr`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Tail {
    /// `R` vanishes on the smallest octave.
    Zero,
    Fitted(TailFit),
    /// Sampled `R` on the smallest octave shows no power law above the
    /// estimator noise; the tail is taken as 0. `relative_defect` is the
    /// largest `|R| / scale` there.
    Unresolved { relative_defect: f64, r_squared: f64 },
}

impl Tail {
    pub fn value(&self) -> f64 {
        match self {
            Tail::Fitted(f) => f.tail,
            _ => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RenewalResult {
    #[serde(rename = "D")]
    pub dimension: f64,
    pub eta: f64,
    pub lattice: Lattice,
    pub r_samples: Vec<f64>,
    #[serde(rename = "R_values")]
    pub r_values: Vec<f64>,
    /// Trapezoid part over the sampled range.
    pub body: f64,
    pub tail: Tail,
    /// `Ŝ`.
    pub integral: f64,
    /// `Ŝ / ((d−D) κ_{d−D})`.
    pub normalized: f64,
}

/// Smallest decay exponent accepted for the tail extrapolation.
const MIN_GAMMA: f64 = 0.05;
/// For sampled (non-analytic) `R`: relative defects below this level, or
/// log-log fits explaining less than this share of variance, are noise.
const NOISE_DEFECT: f64 = 1e-3;
const NOISE_R2: f64 = 0.5;
/// For analytic `R`: relative defects below this level are rounding left
/// over from cancelling terms.
const ROUNDING_DEFECT: f64 = 1e-12;

/// Renewal integral from sampled `R`. Samples must reach down to `r_min`
/// (the first sample) and up to 1; the part below `r_min` comes from a power
/// fit on the smallest octave.
pub fn renewal_s_content(rf: &RFunction, ratios: &[f64]) -> Result<RenewalResult> {
    let dimension = similarity_dimension(ratios)?;
    let d = rf.dim as f64;
    if dimension >= d {
        return Err(Error::InvalidIfs(format!("renewal integral needs D < d, got D = {dimension}")));
    }
    if rf.radii.len() < 3 {
        return Err(Error::InsufficientSamples("R needs at least 3 samples".into()));
    }
    let eta = renewal_eta(ratios, dimension);
    let lattice = classify_lattice(ratios, DEFAULT_MAX_DENOMINATOR)?;
    let e = dimension - d + 1.0;
    let m: Vec<f64> = rf.radii.iter().zip(&rf.values).map(|(r, v)| r.powf(e) * v).collect();
    let logs: Vec<f64> = rf.radii.iter().map(|r| r.ln()).collect();
    let body = log_trapezoid(&logs, &m);
    let tail = fit_tail(rf, &m)?;
    let integral = (body + tail.value()) / eta;
    let normalized = integral / ((d - dimension) * kappa(d - dimension)?);
    Ok(RenewalResult {
        dimension,
        eta,
        lattice,
        r_samples: rf.radii.clone(),
        r_values: rf.values.clone(),
        body,
        tail,
        integral,
        normalized,
    })
}

fn fit_tail(rf: &RFunction, m: &[f64]) -> Result<Tail> {
    let r_min = rf.radii[0];
    // (r, m, |R| / scale) at distinct radii of the smallest octave.
    let mut pts: Vec<(f64, f64, f64)> = Vec::new();
    for k in 0..rf.radii.len() {
        let r = rf.radii[k];
        if r > 2.0 * r_min * (1.0 + 1e-12) {
            break;
        }
        if pts.last().is_some_and(|p| same(p.0, r)) {
            continue;
        }
        let rel = if rf.scale[k] > 0.0 { rf.values[k].abs() / rf.scale[k] } else { f64::INFINITY };
        pts.push((r, m[k], rel));
    }
    if pts.iter().all(|p| p.1 == 0.0) {
        return Ok(Tail::Zero);
    }
    if pts.len() < 3 {
        return Err(Error::InsufficientSamples("tail fit needs 3 distinct radii in the smallest octave".into()));
    }
    let relative_defect = pts.iter().map(|p| p.2).fold(0.0, f64::max);
    let floor = if rf.exact { ROUNDING_DEFECT } else { NOISE_DEFECT };
    if relative_defect < floor {
        return Ok(Tail::Unresolved { relative_defect, r_squared: 0.0 });
    }
    let sign = pts[0].1.signum();
    if pts.iter().any(|p| p.1 * sign <= 0.0) {
        if !rf.exact {
            return Ok(Tail::Unresolved { relative_defect, r_squared: 0.0 });
        }
        return Err(Error::DivergentTail(
            "r^(D-d+1) R(r) changes sign on the smallest octave; no power decay is visible".into(),
        ));
    }
    let xy: Vec<(f64, f64)> = pts.iter().map(|p| (p.0.ln(), (p.1 * sign).ln())).collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    let gamma = sxy / sxx;
    let c = my - gamma * mx;
    let sse: f64 = xy.iter().map(|p| (p.1 - c - gamma * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    if !rf.exact && r_squared < NOISE_R2 {
        return Ok(Tail::Unresolved { relative_defect, r_squared });
    }
    if !(gamma > MIN_GAMMA) {
        return Err(Error::DivergentTail(format!(
            "fitted exponent γ = {gamma:.4} near r = {r_min}: r^(D-d) R(r) must behave like r^(γ-1) with γ > 0"
        )));
    }
    let amplitude = sign * c.exp();
    Ok(Tail::Fitted(TailFit {
        gamma_hat: gamma,
        amplitude,
        tail: amplitude * r_min.powf(gamma) / gamma,
        r_squared,
        window: (pts[0].0, pts[pts.len() - 1].0),
        n_samples: xy.len(),
    }))
}

/// `r_function` followed by `renewal_s_content`.
pub fn renewal_from_profile(p: &RadialProfile, ratios: &[f64]) -> Result<RenewalResult> {
    renewal_s_content(&r_function(p, ratios)?, ratios)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gasket::{gasket_profile, gasket_u};
    use crate::profile::geometric_radii;
    use std::f64::consts::PI;

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    /// Radii `2^(-k/32)`, so that `r / (1/2)` is again a sample.
    fn exact_gasket() -> RadialProfile {
        let radii: Vec<f64> = (0..=420).rev().map(|k| (-(k as f64) / 32.0).exp2()).collect();
        gasket_profile(&radii).unwrap()
    }

    #[test]
    fn gasket_r_pieces() {
        let rf = r_function(&exact_gasket(), &[0.5; 3]).unwrap();
        let u = gasket_u();
        let mut jumps = 0;
        for (k, (&r, &v)) in rf.radii.iter().zip(&rf.values).enumerate() {
            let next_same = rf.radii.get(k + 1).is_some_and(|&x| x == r);
            let prev_same = k > 0 && rf.radii[k - 1] == r;
            let want = if prev_same || r > 0.5 {
                3.0 + 2.0 * PI * r
            } else if r > u * (1.0 + 1e-9) || next_same {
                -1.5 - 4.0 * PI * r
            } else {
                -(4.0 * PI + 6.0 * SQRT3) * r
            };
            if next_same {
                jumps += 1;
            }
            // On (0, u] the pieces are small differences of large numbers.
            assert!((v - want).abs() < 1e-9 * (1.0 + 3.0 * (u / r).powf(0.585)), "r={r} v={v} want={want}");
        }
        assert_eq!(jumps, 1);
    }

    #[test]
    fn indicator_empty_above_largest_ratio() {
        let rf = r_function(&exact_gasket(), &[0.5; 3]).unwrap();
        let p = exact_gasket();
        for (&r, &v) in rf.radii.iter().zip(&rf.values).rev().take(10) {
            let k = p.radii.iter().position(|&x| x == r).unwrap();
            assert_eq!(v, p.surface[k]);
        }
    }

    #[test]
    fn linear_in_surface() {
        let p = exact_gasket();
        let mut q = p.clone();
        q.surface.iter_mut().for_each(|s| *s *= 2.5);
        let a = r_function(&p, &[0.5; 3]).unwrap();
        let b = r_function(&q, &[0.5; 3]).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((2.5 * x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn zero_r_gives_zero() {
        let radii = geometric_radii(1e-3, 1.0, 8).unwrap();
        let rf = RFunction::from_values(2, radii.clone(), vec![0.0; radii.len()]);
        let res = renewal_s_content(&rf, &[0.5; 3]).unwrap();
        assert_eq!(res.integral, 0.0);
        assert_eq!(res.tail, Tail::Zero);
    }

    #[test]
    fn growing_tail_is_rejected() {
        let radii = geometric_radii(1e-3, 1.0, 8).unwrap();
        // r^{D-1} R(r) = r^{-0.5}: the integral diverges at 0.
        let d = similarity_dimension(&[0.5; 3]).unwrap();
        let values = radii.iter().map(|r| r.powf(-0.5 - (d - 1.0))).collect();
        let rf = RFunction::from_values(2, radii, values);
        assert!(matches!(renewal_s_content(&rf, &[0.5; 3]), Err(Error::DivergentTail(_))));
    }

    #[test]
    fn coverage_required() {
        let p = gasket_profile(&geometric_radii(1e-3, 0.5, 8).unwrap()).unwrap();
        assert!(matches!(r_function(&p, &[0.5; 3]), Err(Error::Coverage(_))));
    }
}
