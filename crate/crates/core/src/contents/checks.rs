//! Checkers for the inequalities and identities satisfied by every parallel
//! volume function, evaluated on sampled profiles.
//!
//! Each checker produces one row per tested configuration with a signed
//! violation (positive means the inequality is broken) and the allowance for
//! that row. A report passes when no row exceeds its allowance.

use std::sync::OnceLock;

use serde::Serialize;

use super::{kappa, log_trapezoid};
use crate::edt::exact_edt;
use crate::error::{Error, Result};
use crate::estimate::sample_profile;
use crate::grid::{make_grid, BinaryMask, BoundingBox};
use crate::profile::{geometric_radii, RadialProfile, Source};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub r: f64,
    pub residual: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Residual of the row closest to (or furthest past) its allowance.
    pub worst_residual: f64,
    pub location: Option<f64>,
    pub n_samples: usize,
    #[serde(skip)]
    pub tolerance: f64,
    #[serde(skip)]
    pub rows: Vec<CheckRow>,
}

impl CheckReport {
    fn from_rows(name: &str, n_samples: usize, rows: Vec<CheckRow>) -> Self {
        let worst = rows
            .iter()
            .max_by(|a, b| (a.residual - a.tolerance).total_cmp(&(b.residual - b.tolerance)));
        let (worst_residual, location, tolerance) = match worst {
            Some(w) => (w.residual, Some(w.r), w.tolerance),
            None => (0.0, None, 0.0),
        };
        let passed = rows.iter().all(|w| w.residual <= w.tolerance);
        CheckReport { name: name.into(), passed, worst_residual, location, n_samples, tolerance, rows }
    }
}

/// Relative tolerance for grid and simulation sources: three times the worst
/// relative error of the grid estimators on a disk of radius 32 cells,
/// measured once per process.
pub fn grid_tolerance() -> f64 {
    static TOL: OnceLock<f64> = OnceLock::new();
    *TOL.get_or_init(|| 3.0 * calibrate_on_disk())
}

fn calibrate_on_disk() -> f64 {
    let (n, rho) = (160, 32.0);
    let grid = make_grid(&BoundingBox::cube(2, -80.0, 80.0), n, 2).expect("calibration grid");
    let mask = BinaryMask::from_predicate(grid, |c| c[0].hypot(c[1]) <= rho);
    let field = exact_edt(&mask).expect("calibration mask is nonempty");
    let radii = geometric_radii(4.0, 40.0, 8).expect("calibration radii");
    let p = sample_profile(&field, &radii).expect("calibration profile");
    let pi = std::f64::consts::PI;
    p.radii
        .iter()
        .zip(p.volume.iter().zip(&p.surface))
        .map(|(&r, (&v, &s))| {
            let ev = (v / (pi * (rho + r).powi(2)) - 1.0).abs();
            let es = (s / (2.0 * pi * (rho + r)) - 1.0).abs();
            ev.max(es)
        })
        .fold(0.0, f64::max)
}

fn relative_tolerance(p: &RadialProfile) -> f64 {
    match p.source {
        Source::Analytic => 1e-9,
        Source::Grid | Source::Simulation => grid_tolerance(),
    }
}

/// Absolute uncertainty of `V(r_k)` for grid-derived profiles. Cell centers
/// lie within `√d h / 2` of the set they represent, and counting cells of a
/// region misplaces at most a `√d h / 2` shell of its boundary, so the grid
/// volume lies between the true volumes at `r ∓ √d h`. Analytic profiles
/// get zero.
fn volume_uncertainty(p: &RadialProfile, k: usize) -> f64 {
    match (p.source, p.cell_size) {
        (Source::Analytic, _) | (_, None) => 0.0,
        (_, Some(h)) => {
            let cell = h.powi(p.dim as i32);
            (p.dim as f64).sqrt() * h * p.surface[k] + cell
        }
    }
}

fn need(p: &RadialProfile, k: usize, what: &str) -> Result<()> {
    if p.len() < k {
        return Err(Error::InsufficientSamples(format!("{what} needs at least {k} radii, got {}", p.len())));
    }
    Ok(())
}

/// Index of the largest sample `<= x`, or of the smallest sample `>= x`.
fn floor_index(radii: &[f64], x: f64) -> Option<usize> {
    let k = radii.partition_point(|&r| r <= x * (1.0 + 1e-12));
    k.checked_sub(1)
}

fn ceil_index(radii: &[f64], x: f64) -> Option<usize> {
    let k = radii.partition_point(|&r| r < x * (1.0 - 1e-12));
    (k < radii.len()).then_some(k)
}

/// Pairs are limited to this row distance on long profiles.
const KNESER_SPAN: usize = 512;

/// `f(λb) − f(λa) ≤ λ^d (f(b) − f(a))` for sampled `a < b` and λ ∈ {1.25,
/// 1.5, 2}. Off-sample values of `f(λ·)` are replaced by the monotone lower
/// bound `f(floor λb) − f(ceil λa)`, so interpolation never creates a
/// violation. Grid rows are allowed the volume uncertainty of the four
/// samples involved.
pub fn check_kneser(p: &RadialProfile) -> Result<CheckReport> {
    need(p, 3, "check_kneser")?;
    let d = p.dim as i32;
    let scale = p.volume.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let r_max = *p.radii.last().unwrap();
    let mut rows = Vec::new();
    for i in 0..p.len() {
        for j in i + 1..p.len().min(i + 1 + KNESER_SPAN) {
            let (a, b) = (p.radii[i], p.radii[j]);
            let rhs_base = p.volume[j] - p.volume[i];
            // Worst λ for this pair.
            let mut worst: Option<(f64, f64)> = None;
            for lambda in [1.25, 1.5, 2.0] {
                if lambda * b > r_max * (1.0 + 1e-12) {
                    continue;
                }
                let (Some(hi), Some(lo)) = (floor_index(&p.radii, lambda * b), ceil_index(&p.radii, lambda * a))
                else {
                    continue;
                };
                let lhs = p.volume[hi] - p.volume[lo];
                let v = (lhs - lambda.powi(d) * rhs_base) / scale;
                let slack = volume_uncertainty(p, hi)
                    + volume_uncertainty(p, lo)
                    + lambda.powi(d) * (volume_uncertainty(p, i) + volume_uncertainty(p, j));
                let tol = 1e-9 + slack / scale;
                if worst.is_none_or(|(w, t)| v - tol > w - t) {
                    worst = Some((v, tol));
                }
            }
            if let Some((v, tol)) = worst {
                rows.push(CheckRow { r: b, residual: v, tolerance: tol });
            }
        }
    }
    Ok(CheckReport::from_rows("kneser", p.len(), rows))
}

/// Comparison function for `check_sandwich`.
pub enum Gauge {
    /// `h(t) = κ_{d−s} t^{d−s}`.
    Power(f64),
    Custom {
        h: Box<dyn Fn(f64) -> f64 + Sync>,
        dh: Box<dyn Fn(f64) -> f64 + Sync>,
    },
}

type GaugeFn<'a> = Box<dyn Fn(f64) -> f64 + 'a>;

impl Gauge {
    fn resolve(&self, d: usize) -> Result<(GaugeFn<'_>, GaugeFn<'_>)> {
        match self {
            Gauge::Power(s) => {
                let e = d as f64 - s;
                if !(s.is_finite() && *s >= 0.0 && e > 0.0) {
                    return Err(Error::InvalidGauge(format!("power gauge needs 0 <= s < d, got s = {s}")));
                }
                let k = kappa(e)?;
                Ok((Box::new(move |t: f64| k * t.powf(e)), Box::new(move |t: f64| e * k * t.powf(e - 1.0))))
            }
            Gauge::Custom { h, dh } => {
                if h(0.0).abs() > 1e-12 {
                    return Err(Error::InvalidGauge(format!("h(0) = {} must vanish", h(0.0))));
                }
                Ok((Box::new(h), Box::new(dh)))
            }
        }
    }
}

/// Finite-scale form of `min S/h' <= (V(r) − V(r_0))/(h(r) − h(r_0)) <=
/// max S/h'`, with the extremes taken over samples in `[r_0, r]`.
///
/// The profile starts at `r_0 > 0`, so the quotient is anchored at the first
/// sample rather than at 0. Extremes between samples are allowed for by the
/// largest second difference of `S/h'` seen so far. Grid rows add the
/// volume uncertainty of both samples, propagated through the quotient.
pub fn check_sandwich(p: &RadialProfile, gauge: &Gauge) -> Result<CheckReport> {
    need(p, 2, "check_sandwich")?;
    let (h, dh) = gauge.resolve(p.dim)?;
    let g: Vec<f64> = p
        .radii
        .iter()
        .zip(&p.surface)
        .map(|(&r, &s)| {
            let d = dh(r);
            if d > 0.0 {
                Ok(s / d)
            } else {
                Err(Error::InvalidGauge(format!("h'({r}) = {d} is not positive")))
            }
        })
        .collect::<Result<_>>()?;
    let tol = relative_tolerance(p);
    let h0 = h(p.radii[0]);
    let mut rows = Vec::new();
    let (mut lo, mut hi, mut curv) = (g[0], g[0], 0.0_f64);
    for k in 1..p.len() {
        lo = lo.min(g[k]);
        hi = hi.max(g[k]);
        if k >= 2 {
            curv = curv.max((g[k] - 2.0 * g[k - 1] + g[k - 2]).abs());
        }
        let dhk = h(p.radii[k]) - h0;
        if !(dhk > 0.0) {
            return Err(Error::InvalidGauge(format!("h is not increasing at r = {}", p.radii[k])));
        }
        let q = (p.volume[k] - p.volume[0]) / dhk;
        // Relative to the surface bounds, which stay away from zero.
        let base = lo.abs().max(f64::MIN_POSITIVE);
        let v = ((lo - curv) - q).max(q - (hi + curv)) / base;
        let slack = (volume_uncertainty(p, k) + volume_uncertainty(p, 0)) / dhk / base;
        rows.push(CheckRow { r: p.radii[k], residual: v, tolerance: tol + slack });
    }
    Ok(CheckReport::from_rows("sandwich", p.len(), rows))
}

/// Checks `v(t) = w(t) + (1/(d−s))[(V(t)−v0)/(κ t^{d−s}) − (V(R)−v0)/(κ R^{d−s})]`
/// with `v = ∫_t^R (V−v0)/(κ r^{d−s}) dlog r`, `w = ∫_t^R S/((d−s)κ r^{d−s−1}) dlog r`
/// and `R` the largest radius. Both integrals use the trapezoid rule in `log r`,
/// so the residual is the quadrature error. Tolerance: `1e-3` for analytic
/// profiles, the grid tolerance otherwise.
pub fn check_vw_identity(p: &RadialProfile, s: f64, t: f64) -> Result<CheckReport> {
    let d = p.dim as f64;
    if !(s >= 0.0 && s < d) {
        return Err(Error::InvalidParameter(format!("vw identity needs 0 <= s < d, got {s}")));
    }
    let k0 = p
        .radii
        .iter()
        .position(|&r| (r - t).abs() <= 1e-12 * t.abs())
        .ok_or_else(|| Error::InvalidParameter(format!("t = {t} is not one of the profile radii")))?;
    if p.len() - k0 < 2 {
        return Err(Error::InsufficientSamples("t is the largest radius".into()));
    }
    let e = d - s;
    let ka = kappa(e)?;
    let r = &p.radii[k0..];
    let logs: Vec<f64> = r.iter().map(|x| x.ln()).collect();
    let fv: Vec<f64> = r.iter().zip(&p.volume[k0..]).map(|(x, v)| (v - p.v0) / (ka * x.powf(e))).collect();
    let fw: Vec<f64> = r.iter().zip(&p.surface[k0..]).map(|(x, a)| a / (e * ka * x.powf(e - 1.0))).collect();
    let v = log_trapezoid(&logs, &fv);
    let w = log_trapezoid(&logs, &fw);
    let last = fv.len() - 1;
    let rhs = w + (fv[0] - fv[last]) / e;
    let residual = (v - rhs).abs() / v.abs().max(f64::MIN_POSITIVE);
    let tol = match p.source {
        Source::Analytic => 1e-3,
        _ => grid_tolerance(),
    };
    Ok(CheckReport::from_rows(
        "vw_identity",
        r.len(),
        vec![CheckRow { r: t, residual, tolerance: tol }],
    ))
}

/// `d κ_d^{1/d} V(r)^{(d−1)/d} <= S(r)` on the full parallel volume.
pub fn check_isoperimetric(p: &RadialProfile) -> Result<CheckReport> {
    let d = p.dim as f64;
    let c = d * kappa(d)?.powf(1.0 / d);
    let tol = match p.source {
        Source::Analytic => 1e-12,
        _ => 0.02,
    };
    let rows = p
        .radii
        .iter()
        .zip(p.volume.iter().zip(&p.surface))
        .map(|(&r, (&v, &s))| {
            let lhs = c * v.max(0.0).powf((d - 1.0) / d);
            CheckRow { r, residual: (lhs - s) / s.abs().max(f64::MIN_POSITIVE), tolerance: tol }
        })
        .collect();
    Ok(CheckReport::from_rows("isoperimetric", p.len(), rows))
}

/// `sup (V−v0)/(κ_{d−s} r^{d−s}) >= ((d−s)/d) sup S/((d−s)κ_{d−s} r^{d−s−1})`
/// with both suprema over the same window of one decade. Every window that
/// fits in the profile is checked; a profile shorter than a decade is one
/// window.
pub fn check_lm34(p: &RadialProfile, s: f64) -> Result<CheckReport> {
    let d = p.dim as f64;
    if !(s >= 0.0 && s < d) {
        return Err(Error::InvalidParameter(format!("check_lm34 needs 0 <= s < d, got {s}")));
    }
    let e = d - s;
    let ka = kappa(e)?;
    let vn: Vec<f64> = p.radii.iter().zip(&p.volume).map(|(r, v)| (v - p.v0) / (ka * r.powf(e))).collect();
    let sn: Vec<f64> = p.radii.iter().zip(&p.surface).map(|(r, a)| a / (e * ka * r.powf(e - 1.0))).collect();
    let tol = relative_tolerance(p);
    let r_max = *p.radii.last().unwrap();
    let mut windows: Vec<(usize, usize)> = (0..p.len())
        .filter(|&i| 10.0 * p.radii[i] <= r_max * (1.0 + 1e-9))
        .map(|i| (i, p.radii.partition_point(|&r| r <= 10.0 * p.radii[i] * (1.0 + 1e-9))))
        .collect();
    if windows.is_empty() {
        windows.push((0, p.len()));
    }
    let rows = windows
        .into_iter()
        .map(|(a, b)| {
            let sup_v = vn[a..b].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sup_s = sn[a..b].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let residual = (e / d * sup_s - sup_v) / sup_v.abs().max(f64::MIN_POSITIVE);
            CheckRow { r: p.radii[a], residual, tolerance: tol }
        })
        .collect();
    Ok(CheckReport::from_rows("lm34", p.len(), rows))
}

/// `S(r)/r^{d−1}` is nonincreasing. Consecutive grid surfaces each carry the
/// relative grid error, so grid rows are allowed the grid tolerance.
pub fn check_stacho(p: &RadialProfile) -> Result<CheckReport> {
    need(p, 2, "check_stacho")?;
    let e = p.dim as i32 - 1;
    let q: Vec<f64> = p.radii.iter().zip(&p.surface).map(|(r, s)| s / r.powi(e)).collect();
    let tol = relative_tolerance(p);
    let rows = (1..p.len())
        .map(|k| {
            let base = q[k - 1].abs().max(f64::MIN_POSITIVE);
            CheckRow { r: p.radii[k], residual: (q[k] - q[k - 1]) / base, tolerance: tol }
        })
        .collect();
    Ok(CheckReport::from_rows("stacho", p.len(), rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{shape_profile, Shape};

    fn disk() -> RadialProfile {
        let radii = geometric_radii(0.01, 1.0, 16).unwrap();
        shape_profile(&Shape::Disk { radius: 0.25 }, &radii).unwrap()
    }

    #[test]
    fn disk_passes_everything() {
        let p = disk();
        let k = check_kneser(&p).unwrap();
        assert!(k.passed && k.worst_residual <= 1e-12, "{k:?}");
        assert!(check_sandwich(&p, &Gauge::Power(1.0)).unwrap().passed);
        assert!(check_vw_identity(&p, 1.0, p.radii[0]).unwrap().passed);
        assert!(check_isoperimetric(&p).unwrap().passed);
        assert!(check_lm34(&p, 1.0).unwrap().passed);
        assert!(check_stacho(&p).unwrap().passed);
    }

    #[test]
    fn ball_is_isoperimetric_equality() {
        let radii = geometric_radii(0.01, 1.0, 4).unwrap();
        let p = shape_profile(&Shape::Ball { radius: 0.5 }, &radii).unwrap();
        let rep = check_isoperimetric(&p).unwrap();
        assert!(rep.passed);
        assert!(rep.worst_residual.abs() < 1e-13);
    }

    #[test]
    fn corrupted_volume_fails_kneser() {
        let mut p = disk();
        let k = p.len() / 2;
        p.volume[k] *= 0.9;
        let rep = check_kneser(&p).unwrap();
        assert!(!rep.passed);
        assert!(rep.location.is_some());
    }

    #[test]
    fn scaled_surface_fails_sandwich() {
        let mut p = disk();
        p.surface.iter_mut().for_each(|s| *s *= 1.2);
        assert!(!check_sandwich(&p, &Gauge::Power(1.0)).unwrap().passed);
    }

    #[test]
    fn segment_sandwich_with_linear_gauge() {
        let radii = geometric_radii(1e-3, 0.1, 8).unwrap();
        let p = shape_profile(&Shape::Segment { length: 1.0 }, &radii).unwrap();
        let g = Gauge::Custom { h: Box::new(|t| 2.0 * t), dh: Box::new(|_| 2.0) };
        let rep = check_sandwich(&p, &g).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(matches!(
            check_sandwich(&p, &Gauge::Custom { h: Box::new(|t| t + 1.0), dh: Box::new(|_| 1.0) }),
            Err(Error::InvalidGauge(_))
        ));
        assert!(matches!(check_sandwich(&p, &Gauge::Power(2.0)), Err(Error::InvalidGauge(_))));
    }

    #[test]
    fn vw_constant_toy_profile_is_exact() {
        let radii = geometric_radii(1e-3, 1.0, 2).unwrap();
        let v: Vec<f64> = radii.iter().map(|r| 6.0 * r).collect();
        let p = RadialProfile::new(2, radii.clone(), v, vec![6.0; radii.len()], 0.0, Source::Analytic).unwrap();
        let rep = check_vw_identity(&p, 1.0, radii[0]).unwrap();
        assert!(rep.worst_residual < 1e-14, "{rep:?}");
        assert!(check_vw_identity(&p, 1.0, 0.5).is_err());
    }

    #[test]
    fn increasing_ratio_fails_stacho() {
        let radii = geometric_radii(0.1, 1.0, 4).unwrap();
        let s: Vec<f64> = radii.iter().map(|r| r * r).collect();
        let v: Vec<f64> = radii.iter().map(|r| r * r * r / 3.0).collect();
        let p = RadialProfile::new(2, radii, v, s, 0.0, Source::Analytic).unwrap();
        assert!(!check_stacho(&p).unwrap().passed);
    }

    #[test]
    fn calibration_is_small() {
        let t = grid_tolerance();
        assert!(t > 0.0 && t < 0.1, "{t}");
    }

    #[test]
    fn report_serializes_contract_fields() {
        let rep = check_isoperimetric(&disk()).unwrap();
        let js = serde_json::to_value(&rep).unwrap();
        let mut keys: Vec<&str> = js.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort();
        assert_eq!(keys, ["location", "n_samples", "name", "passed", "worst_residual"]);
    }
}
