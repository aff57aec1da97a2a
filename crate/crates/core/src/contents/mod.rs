//! Finite-scale content and dimension estimators on radial profiles.
//!
//! Limits as `r -> 0` cannot be computed from samples; lower and upper
//! contents are replaced by the infimum and supremum of the normalized series
//! over an explicit window of the smallest resolved radii, and the window is
//! always reported with the estimate.

mod checks;

pub use checks::{
    check_isoperimetric, check_kneser, check_lm34, check_sandwich, check_stacho, check_vw_identity,
    grid_tolerance, CheckReport, CheckRow, Gauge,
};

use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::profile::RadialProfile;

/// Volume of the unit ball in R^t, `π^(t/2) / Γ(1 + t/2)`, for real `t ≥ 0`.
pub fn kappa(t: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!("kappa needs t >= 0, got {t}")));
    }
    Ok(std::f64::consts::PI.powf(t / 2.0) / gamma(1.0 + t / 2.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContentKind {
    /// `(V(r) − v0) / (κ_{d−s} r^{d−s})`.
    Volume,
    /// `V(r) / (κ_{d−s} r^{d−s})`, without subtracting the set's own volume.
    RawVolume,
    /// `S(r) / ((d−s) κ_{d−s} r^{d−1−s})`.
    Surface,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedSeries {
    pub values: Vec<f64>,
    /// Set for the surface kind at `s = d`, where the content is zero by
    /// convention and the series is identically zero.
    pub zero_by_convention: bool,
}

pub fn normalized_series(profile: &RadialProfile, s: f64, kind: ContentKind) -> Result<NormalizedSeries> {
    let d = profile.dim as f64;
    if !(s.is_finite() && s >= 0.0) || s > d {
        return Err(Error::InvalidParameter(format!("exponent s = {s} must lie in [0, {d}]")));
    }
    let k = kappa(d - s)?;
    let values = match kind {
        ContentKind::Volume | ContentKind::RawVolume => {
            let shift = if kind == ContentKind::Volume { profile.v0 } else { 0.0 };
            profile
                .radii
                .iter()
                .zip(&profile.volume)
                .map(|(r, v)| (v - shift) / (k * r.powf(d - s)))
                .collect()
        }
        ContentKind::Surface => {
            if s == d {
                return Ok(NormalizedSeries { values: vec![0.0; profile.len()], zero_by_convention: true });
            }
            profile
                .radii
                .iter()
                .zip(&profile.surface)
                .map(|(r, a)| a / ((d - s) * k * r.powf(d - 1.0 - s)))
                .collect()
        }
    };
    Ok(NormalizedSeries { values, zero_by_convention: false })
}

/// Fit window over the profile radii.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// Radii in `[lo, hi]`.
    Range(f64, f64),
    /// `[r_min, 10 r_min]`.
    SmallestDecade,
    /// `[r_min, 2^k r_min]`.
    SmallestOctaves(u32),
    Full,
}

impl Window {
    pub fn bounds(&self, profile: &RadialProfile) -> (f64, f64) {
        let r0 = profile.radii[0];
        let slack = 1.0 + 1e-9;
        match *self {
            Window::Range(lo, hi) => (lo, hi),
            Window::SmallestDecade => (r0, 10.0 * r0 * slack),
            Window::SmallestOctaves(k) => (r0, r0 * 2f64.powi(k as i32) * slack),
            Window::Full => (r0, *profile.radii.last().unwrap()),
        }
    }

    fn indices(&self, profile: &RadialProfile, min_samples: usize) -> Result<std::ops::Range<usize>> {
        if profile.is_empty() {
            return Err(Error::InsufficientSamples("empty profile".into()));
        }
        let (lo, hi) = self.bounds(profile);
        let idx = profile.window_indices(lo, hi);
        if idx.len() < min_samples {
            return Err(Error::InsufficientSamples(format!(
                "window [{lo}, {hi}] holds {} samples, need {min_samples}",
                idx.len()
            )));
        }
        Ok(idx)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionFit {
    pub dimension: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    pub n_samples: usize,
    pub window: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContentEstimate {
    pub s: f64,
    pub kind: ContentKind,
    pub lower: f64,
    pub upper: f64,
    pub average: Option<f64>,
    pub window: (f64, f64),
    pub n_samples: usize,
    pub dim_fit: Option<DimensionFit>,
}

/// Infimum and supremum of the normalized series over `window` (at least 8
/// samples).
pub fn content_bounds(profile: &RadialProfile, s: f64, kind: ContentKind, window: Window) -> Result<ContentEstimate> {
    let idx = window.indices(profile, 8)?;
    let series = normalized_series(profile, s, kind)?;
    let vals = &series.values[idx.clone()];
    let lower = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ContentEstimate {
        s,
        kind,
        lower,
        upper,
        average: None,
        window: (profile.radii[idx.start], profile.radii[idx.end - 1]),
        n_samples: idx.len(),
        dim_fit: None,
    })
}

/// Logarithmic average `(1/ln(r_max/t)) ∫_t^{r_max} f(r) d log r` of the
/// normalized series with `t = r_min`, by the trapezoid rule in `log r`.
/// With `r_max = 1` this is the usual Cesàro average at `t`.
pub fn average_content(profile: &RadialProfile, s: f64, kind: ContentKind) -> Result<f64> {
    let n = profile.len();
    if n < 2 || profile.radii[n - 1] < 8.0 * profile.radii[0] * (1.0 - 1e-12) {
        return Err(Error::InsufficientSamples("average content needs a profile spanning 3 octaves".into()));
    }
    let series = normalized_series(profile, s, kind)?;
    let logs: Vec<f64> = profile.radii.iter().map(|r| r.ln()).collect();
    Ok(log_trapezoid(&logs, &series.values) / (logs[n - 1] - logs[0]))
}

/// `∫ f d x` over the samples by the trapezoid rule.
pub(crate) fn log_trapezoid(x: &[f64], f: &[f64]) -> f64 {
    x.windows(2).zip(f.windows(2)).map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1])).sum()
}

/// Least-squares slope of `log(V − v0)` (volume kinds) or `log S` (surface)
/// against `log r` over the whole profile.
pub fn estimate_dimension(profile: &RadialProfile, kind: ContentKind) -> Result<DimensionFit> {
    estimate_dimension_in(profile, kind, Window::Full)
}

pub fn estimate_dimension_in(profile: &RadialProfile, kind: ContentKind, window: Window) -> Result<DimensionFit> {
    let idx = window.indices(profile, 8)?;
    let (r_lo, r_hi) = (profile.radii[idx.start], profile.radii[idx.end - 1]);
    if r_hi < 4.0 * r_lo * (1.0 - 1e-12) {
        return Err(Error::InsufficientSamples("dimension fit needs 2 octaves".into()));
    }
    let d = profile.dim as f64;
    let mut xs = Vec::with_capacity(idx.len());
    let mut ys = Vec::with_capacity(idx.len());
    for k in idx.clone() {
        let y = match kind {
            ContentKind::Volume => profile.volume[k] - profile.v0,
            ContentKind::RawVolume => profile.volume[k],
            ContentKind::Surface => profile.surface[k],
        };
        if !(y > 0.0) {
            return Err(Error::DegenerateFit(format!("nonpositive value {y} at r = {}", profile.radii[k])));
        }
        xs.push(profile.radii[k].ln());
        ys.push(y.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("radii do not vary".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let dimension = match kind {
        ContentKind::Surface => d - 1.0 - slope,
        _ => d - slope,
    };
    Ok(DimensionFit {
        dimension,
        slope,
        intercept,
        r_squared,
        residual: (sse / n).sqrt(),
        n_samples: xs.len(),
        window: (r_lo, r_hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{geometric_radii, Source};
    use crate::shapes::{shape_profile, Shape};
    use std::f64::consts::PI;

    #[test]
    fn kappa_values() {
        assert!((kappa(0.0).unwrap() - 1.0).abs() < 1e-13);
        assert!((kappa(1.0).unwrap() - 2.0).abs() < 1e-13);
        assert!((kappa(2.0).unwrap() - PI).abs() < 1e-13);
        assert!((kappa(3.0).unwrap() - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!(kappa(-0.5).is_err());
    }

    #[test]
    fn segment_volume_series() {
        let radii = geometric_radii(1e-4, 1e-3, 4).unwrap();
        let p = shape_profile(&Shape::Segment { length: 1.0 }, &radii).unwrap();
        let s = normalized_series(&p, 1.0, ContentKind::Volume).unwrap();
        for (r, v) in radii.iter().zip(&s.values) {
            assert!((v - (1.0 + PI * r / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn surface_at_full_dimension_is_flagged_zero() {
        let p = shape_profile(&Shape::Disk { radius: 1.0 }, &[0.1, 0.2]).unwrap();
        let s = normalized_series(&p, 2.0, ContentKind::Surface).unwrap();
        assert!(s.zero_by_convention);
        assert!(s.values.iter().all(|&v| v == 0.0));
        assert!(normalized_series(&p, 2.5, ContentKind::Volume).is_err());
    }

    #[test]
    fn raw_volume_diverges_for_disk() {
        let radii = geometric_radii(1e-3, 1e-1, 2).unwrap();
        let p = shape_profile(&Shape::Disk { radius: 0.25 }, &radii).unwrap();
        let s = normalized_series(&p, 0.0, ContentKind::RawVolume).unwrap();
        // V/(κ_2 r^2) = (ρ + r)^2 / r^2 grows as r -> 0.
        assert!(s.values[0] > s.values[s.values.len() - 1]);
        assert!((s.values[0] - (0.251f64 / 0.001).powi(2)).abs() < 1e-6);
    }

    #[test]
    fn point_zero_dimensional_content() {
        let radii = geometric_radii(1e-3, 1e-2, 4).unwrap();
        let p = shape_profile(&Shape::Point { dim: 2 }, &radii).unwrap();
        let e = content_bounds(&p, 0.0, ContentKind::Volume, Window::SmallestDecade).unwrap();
        assert!((e.lower - 1.0).abs() < 1e-12 && (e.upper - 1.0).abs() < 1e-12);
        let f = estimate_dimension(&p, ContentKind::Volume).unwrap();
        assert!(f.dimension.abs() < 1e-12);
    }

    #[test]
    fn constant_series_averages_to_constant() {
        // V = 3 κ_1 r with d = 2, s = 1: the normalized series is constant 3.
        let radii = geometric_radii(1e-3, 1.0, 3).unwrap();
        let v: Vec<f64> = radii.iter().map(|r| 6.0 * r).collect();
        let p = RadialProfile::new(2, radii.clone(), v, vec![6.0; radii.len()], 0.0, Source::Analytic).unwrap();
        assert!((average_content(&p, 1.0, ContentKind::Volume).unwrap() - 3.0).abs() < 1e-14);
        assert!((average_content(&p, 1.0, ContentKind::Surface).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn short_windows_are_errors() {
        let p = shape_profile(&Shape::Point { dim: 2 }, &[0.1, 0.2, 0.3]).unwrap();
        assert!(matches!(
            content_bounds(&p, 0.0, ContentKind::Volume, Window::Full),
            Err(Error::InsufficientSamples(_))
        ));
        assert!(average_content(&p, 0.0, ContentKind::Volume).is_err());
    }
}
