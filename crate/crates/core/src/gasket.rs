//! Exact parallel-set formulas for the Sierpinski gasket with unit side.
//!
//! For `r` in `[2^-n u, 2^(-n+1) u)` (n ≥ 1), with `u` the inradius of the
//! middle removed triangle, the parallel area and boundary length are
//!
//! ```text
//! V = (π − (3/2)√3(3^n − 1)) r² + 3 (3/2)^n r + √3 (3/2)^n 2^(−n−2)
//! S = (2π − 3√3(3^n − 1)) r + 3 (3/2)^n
//! ```
//!
//! and for `r ≥ u` the filled triangle's Steiner formula (n = 0) applies.
//! Substituting `x = 2^n r / u ∈ [1, 2)` gives an equivalent form with no
//! cancellation between huge `3^n` terms, which is what is evaluated here.

use serde::Serialize;

use crate::contents::kappa;
use crate::error::{Error, Result};
use crate::profile::{RadialProfile, Source};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Inradius of the middle triangle removed at the first step.
pub fn gasket_u() -> f64 {
    1.0 / (4.0 * SQRT3)
}

pub fn gasket_dimension() -> f64 {
    3f64.ln() / 2f64.ln()
}

/// Branch index `n` with `r ∈ [2^-n u, 2^(-n+1) u)`, or 0 for `r ≥ u`.
pub fn gasket_branch(r: f64) -> u32 {
    let u = gasket_u();
    if r >= u {
        return 0;
    }
    let mut n = (u / r).log2().ceil().max(1.0) as i32;
    while n > 1 && r >= u * 2f64.powi(1 - n) {
        n -= 1;
    }
    while u * 2f64.powi(-n) > r {
        n += 1;
    }
    n as u32
}

/// `(V(r), S(r))`, exact up to rounding.
pub fn gasket_exact(r: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::NegativeRadius(r));
    }
    Ok(gasket_on_branch(r, gasket_branch(r)))
}

/// The branch-`n` formulas at `r`, also outside that branch's interval; used
/// to compare left and right limits at branch boundaries.
pub fn gasket_on_branch(r: f64, n: u32) -> (f64, f64) {
    let u = gasket_u();
    let pi = std::f64::consts::PI;
    let n = n as i32;
    let x = 2f64.powi(n) * r / u;
    let q34 = 0.75f64.powi(n);
    let q32 = 1.5f64.powi(n);
    let v = (pi + 1.5 * SQRT3) * r * r + q34 * (-1.5 * SQRT3 * x * x * u * u + 3.0 * x * u + SQRT3 / 4.0);
    let s = (2.0 * pi + 3.0 * SQRT3) * r + q32 * (3.0 - 3.0 * SQRT3 * x * u);
    (v, s)
}

/// Analytic profile sampled at `radii`.
pub fn gasket_profile(radii: &[f64]) -> Result<RadialProfile> {
    let mut volume = Vec::with_capacity(radii.len());
    let mut surface = Vec::with_capacity(radii.len());
    for &r in radii {
        let (v, s) = gasket_exact(r)?;
        volume.push(v);
        surface.push(s);
    }
    RadialProfile::new(2, radii.to_vec(), volume, surface, 0.0, Source::Analytic)
}

/// Constants of the worked gasket example, recomputed on every call.
#[derive(Clone, Debug, Serialize)]
pub struct GasketOracle {
    pub u: f64,
    pub dimension: f64,
    /// `4(1 − 1/D)`, where the normalized surface series peaks.
    pub alpha_max: f64,
    pub b: f64,
    pub c: f64,
    pub kappa: f64,
    /// `κ_{2−D}` times the upper S-content.
    pub s_upper: f64,
    pub s_lower: f64,
    pub m_upper: f64,
    pub m_lower: f64,
    pub argmax_s: f64,
    pub argmax_m: f64,
    pub argmin_m: f64,
}

/// Minimizer of `f` on `[a, b]` to `tol` in the argument, after a coarse scan
/// that picks the bracket. Endpoints compete with the interior optimum.
fn minimize(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let steps = 400;
    let xs: Vec<f64> = (0..=steps).map(|k| a + (b - a) * k as f64 / steps as f64).collect();
    let (kbest, _) = xs
        .iter()
        .enumerate()
        .map(|(k, &x)| (k, f(x)))
        .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    let mut lo = xs[kbest.saturating_sub(1)];
    let mut hi = xs[(kbest + 1).min(steps)];
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    [(mid, f(mid)), (a, f(a)), (b, f(b))]
        .into_iter()
        .fold((mid, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc })
}

pub fn gasket_constants() -> GasketOracle {
    let u = gasket_u();
    let d = gasket_dimension();
    let b = 3.0 * u.powf(d - 1.0);
    let c = -3.0 * SQRT3 * u.powf(d);
    let g = |x: f64| x.powf(d) * c + x.powf(d - 1.0) * b;
    let h = |x: f64| x.powf(d) * c / 2.0 + x.powf(d - 1.0) * b + x.powf(d - 2.0) * b;
    let tol = 1e-10;
    let (xs_max, gs_max) = minimize(|x| -g(x), 1.0, 2.0, tol);
    let (_, gs_min) = minimize(g, 1.0, 2.0, tol);
    let (xm_max, hm_max) = minimize(|x| -h(x), 1.0, 2.0, tol);
    let (xm_min, hm_min) = minimize(h, 1.0, 2.0, tol);
    GasketOracle {
        u,
        dimension: d,
        alpha_max: 4.0 * (1.0 - 1.0 / d),
        b,
        c,
        kappa: kappa(2.0 - d).expect("2 - D is positive"),
        s_upper: -gs_max / (2.0 - d),
        s_lower: gs_min / (2.0 - d),
        m_upper: -hm_max,
        m_lower: hm_min,
        argmax_s: xs_max,
        argmax_m: xm_max,
        argmin_m: xm_min,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn branch_indices() {
        let u = gasket_u();
        assert_eq!(gasket_branch(u), 0);
        assert_eq!(gasket_branch(3.0 * u), 0);
        assert_eq!(gasket_branch(0.999 * u), 1);
        assert_eq!(gasket_branch(u / 2.0), 1);
        assert_eq!(gasket_branch(u / 2.0 * 0.999), 2);
        assert_eq!(gasket_branch(u / 1024.0), 10);
        assert_eq!(gasket_branch(u * 2f64.powi(-1000)), 1000);
    }

    #[test]
    fn values_at_u() {
        let u = gasket_u();
        let (v, s) = gasket_exact(u).unwrap();
        assert!((s - (3.0 + 2.0 * PI * u)).abs() < 1e-14);
        assert!((v - (PI * u * u + 3.0 * u + SQRT3 / 4.0)).abs() < 1e-14);
        assert!((s - 3.906_90).abs() < 1e-5);
        assert!((v - 0.931_475).abs() < 1e-5);
    }

    #[test]
    fn first_branch() {
        let u = gasket_u();
        let (_, s) = gasket_exact(u / 2.0).unwrap();
        assert!((s - ((2.0 * PI - 6.0 * SQRT3) * u / 2.0 + 4.5)).abs() < 1e-14);
        assert!((s - 4.203_45).abs() < 1e-5);
    }

    #[test]
    fn matches_paper_form_for_moderate_n() {
        for n in 1..12 {
            let r = gasket_u() * 2f64.powi(-n) * 1.3;
            let (v, s) = gasket_exact(r).unwrap();
            let nf = n as f64;
            let p = 3f64.powf(nf);
            let q = 1.5f64.powf(nf);
            let vp = (PI - 1.5 * SQRT3 * (p - 1.0)) * r * r + 3.0 * q * r + SQRT3 * q * 2f64.powf(-nf - 2.0);
            let sp = (2.0 * PI - 3.0 * SQRT3 * (p - 1.0)) * r + 3.0 * q;
            assert!((v / vp - 1.0).abs() < 1e-9, "n={n}");
            assert!((s / sp - 1.0).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn continuous_at_branch_boundaries() {
        for n in 1..40u32 {
            let r = gasket_u() * 2f64.powi(-(n as i32));
            let (vl, sl) = gasket_on_branch(r, n + 1);
            let (vr, sr) = gasket_on_branch(r, n);
            assert!((vl / vr - 1.0).abs() < 1e-12);
            assert!((sl / sr - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constants() {
        let o = gasket_constants();
        assert!((o.u - 0.144_337_567_297_406_44).abs() < 1e-16);
        assert!((o.s_upper - 1.846_039_216_849_024_7).abs() < 1e-9);
        assert!((o.s_lower - 1.747_284_567_760_041_3).abs() < 1e-9);
        assert!((o.m_upper - 1.814_488_323_377_735).abs() < 1e-9);
        assert!((o.m_lower - 1.810_822_010_465_756_5).abs() < 1e-9);
        assert!((o.argmax_s - o.alpha_max).abs() < 1e-6);
        assert!((o.alpha_max - 1.476_280_985_714_170_3).abs() < 1e-12);
        assert!((o.s_lower - SQRT3.powf(1.0 - o.dimension) / (2.0 - o.dimension)).abs() < 1e-12);
        assert!(o.s_lower < o.m_lower && o.m_lower < o.m_upper && o.m_upper < o.s_upper);
        assert!((o.kappa - 1.384_119_924_449_722_5).abs() < 1e-12);
    }
}
