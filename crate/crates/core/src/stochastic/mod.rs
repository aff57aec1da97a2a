//! Brownian paths, Wiener-sausage profiles and the mean surface and volume
//! formulas with their small-radius normalizations.

mod bessel;
mod formulas;
mod quadrature;

pub use bessel::{bessel_jy, bessel_modulus_sq};
pub use formulas::{
    bessel_integral, formula_terms, mean_surface_closed_form_3d, mean_sausage_surface, mean_sausage_volume,
    mean_volume_closed_form_3d, phi, SausageFormulaTerms,
};
pub use quadrature::{integrate, Quad};

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::contents::kappa;
use crate::edt::exact_edt;
use crate::error::{Error, Result};
use crate::estimate::sample_profile;
use crate::grid::{make_grid, mask_from_points, BoundingBox};
use crate::profile::{RadialProfile, Source};

#[derive(Clone, Debug, PartialEq)]
pub struct BrownianPath {
    pub dim: usize,
    pub t: f64,
    /// `n_steps + 1` points starting at the origin; unused coordinates are 0.
    pub points: Vec<[f64; 3]>,
    pub n_steps: usize,
    pub seed: u64,
    pub stream: u64,
}

impl BrownianPath {
    /// Largest distance between consecutive points.
    pub fn max_spacing(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (0..3).map(|a| (w[1][a] - w[0][a]).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn bbox(&self) -> BoundingBox {
        let mut min = vec![f64::INFINITY; self.dim];
        let mut max = vec![f64::NEG_INFINITY; self.dim];
        for p in &self.points {
            for a in 0..self.dim {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
        BoundingBox::new(min, max)
    }
}

/// Path on stream 0 of `seed`.
pub fn brownian_path(dim: usize, t: f64, n_steps: usize, seed: u64) -> Result<BrownianPath> {
    brownian_path_stream(dim, t, n_steps, seed, 0)
}

/// Gaussian random walk with per-coordinate increment variance `t/n_steps`,
/// drawn from ChaCha8 stream `stream` of `seed`.
pub fn brownian_path_stream(dim: usize, t: f64, n_steps: usize, seed: u64, stream: u64) -> Result<BrownianPath> {
    if !(dim == 2 || dim == 3) {
        return Err(Error::InvalidParameter(format!("paths live in dimension 2 or 3, got {dim}")));
    }
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time horizon must be positive, got {t}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let sd = (t / n_steps as f64).sqrt();
    let mut points = Vec::with_capacity(n_steps + 1);
    let mut x = [0.0f64; 3];
    points.push(x);
    for _ in 0..n_steps {
        for c in x.iter_mut().take(dim) {
            let z: f64 = rng.sample(StandardNormal);
            *c += sd * z;
        }
        points.push(x);
    }
    Ok(BrownianPath { dim, t, points, n_steps, seed, stream })
}

/// Profile of the sampled points on an `n_grid`-cubed grid covering the path
/// box padded by the largest radius. The path has zero volume, so `v0 = 0`.
pub fn sausage_profile(path: &BrownianPath, radii: &[f64], n_grid: usize) -> Result<RadialProfile> {
    let (Some(&r_min), Some(&r_max)) = (radii.first(), radii.last()) else {
        return Err(Error::InvalidRadii("empty radii".into()));
    };
    let limit = r_min / 4.0;
    let spacing = path.max_spacing();
    if spacing > limit {
        return Err(Error::Undersampled { spacing, limit });
    }
    let b = path.bbox();
    let extent = (0..path.dim).map(|a| b.max[a] - b.min[a]).fold(0.0, f64::max);
    let pad = r_max + 2.0 * (extent + 2.0 * r_max) / n_grid as f64;
    let grid = make_grid(&b.cubical_hull(pad), n_grid, path.dim)?;
    let pts: Vec<&[f64]> = path.points.iter().map(|p| &p[..path.dim]).collect();
    let field = exact_edt(&mask_from_points(&pts, &grid)?)?;
    let mut p = sample_profile(&field, radii)?;
    p.v0 = 0.0;
    p.source = Source::Simulation;
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleOptions {
    pub dim: usize,
    pub t: f64,
    pub n_steps: usize,
    pub n_grid: usize,
    pub radii: Vec<f64>,
    pub replicas: usize,
    pub seed: u64,
}

/// Per-radius replica means and sample standard deviations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ensemble {
    pub dim: usize,
    pub t: f64,
    pub radii: Vec<f64>,
    pub mean_v: Vec<f64>,
    pub sd_v: Vec<f64>,
    pub mean_s: Vec<f64>,
    pub sd_s: Vec<f64>,
    /// Volume-derivative surface estimates.
    pub mean_aux: Vec<f64>,
    pub sd_aux: Vec<f64>,
    pub n_replicas: usize,
    /// Largest cell edge over the replicas.
    pub max_cell: f64,
}

impl Ensemble {
    /// Mean profile, with the volume-derivative column as auxiliary.
    pub fn mean_profile(&self) -> Result<RadialProfile> {
        Ok(RadialProfile::new(self.dim, self.radii.clone(), self.mean_v.clone(), self.mean_s.clone(), 0.0, Source::Simulation)?
            .with_aux(self.mean_aux.clone()))
    }
}

fn mean_sd(rows: &[Vec<f64>], k: usize) -> (f64, f64) {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r[k]).sum::<f64>() / n;
    let var = if rows.len() > 1 { rows.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// Replica `i` uses stream `i` of the seed; reductions run in replica order.
pub fn sausage_ensemble(opts: &EnsembleOptions) -> Result<Ensemble> {
    if opts.replicas == 0 {
        return Err(Error::InvalidParameter("need at least one replica".into()));
    }
    let profiles: Vec<RadialProfile> = (0..opts.replicas as u64)
        .into_par_iter()
        .map(|i| {
            let path = brownian_path_stream(opts.dim, opts.t, opts.n_steps, opts.seed, i)?;
            sausage_profile(&path, &opts.radii, opts.n_grid)
        })
        .collect::<Result<_>>()?;
    let vols: Vec<Vec<f64>> = profiles.iter().map(|p| p.volume.clone()).collect();
    let surfs: Vec<Vec<f64>> = profiles.iter().map(|p| p.surface.clone()).collect();
    let auxs: Vec<Vec<f64>> = profiles.iter().map(|p| p.surface_aux.clone().unwrap_or_default()).collect();
    let n = opts.radii.len();
    let split = |rows: &[Vec<f64>]| -> (Vec<f64>, Vec<f64>) { (0..n).map(|k| mean_sd(rows, k)).unzip() };
    let (mean_v, sd_v) = split(&vols);
    let (mean_s, sd_s) = split(&surfs);
    let (mean_aux, sd_aux) = split(&auxs);
    Ok(Ensemble {
        dim: opts.dim,
        t: opts.t,
        radii: opts.radii.clone(),
        mean_v,
        sd_v,
        mean_s,
        sd_s,
        mean_aux,
        sd_aux,
        n_replicas: opts.replicas,
        max_cell: profiles.iter().filter_map(|p| p.cell_size).fold(0.0, f64::max),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticRow {
    pub r: f64,
    pub es: f64,
    pub ev: f64,
    /// `|log r| EV` for d = 2, `EV / (κ_{d−2} r^{d−2})` otherwise.
    pub volume_norm: f64,
    /// `r |log r|² ES` for d = 2, `ES / ((d−2) κ_{d−2} r^{d−3})` otherwise.
    pub surface_norm: f64,
    /// Simulated `r|log r| S` (d = 2) or `S / ((d−2) κ_{d−2} r^{d−3})`.
    pub sim_upper: Option<f64>,
    /// Simulated `√|log r| S` (d = 2) or `S / ((d−2) κ_{d−2} r^{d−3−2/d})`.
    pub sim_lower: Option<f64>,
}

/// Small-radius normalizations of the mean formulas, with the almost-sure
/// bounds for a simulated profile as diagnostics. Limits and bounds are
/// scaled by `t` (they are stated for `t = 1`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticTable {
    pub d: usize,
    pub t: f64,
    pub volume_limit: f64,
    pub surface_limit: f64,
    /// `limsup` bound for `sim_upper`: `2πt` (d = 2), `((d−2)²/d) π t`.
    pub upper_bound: f64,
    /// `liminf` bound for `sim_lower`: `2πt` (d = 2), strictly positive.
    pub lower_bound: f64,
    pub rows: Vec<AsymptoticRow>,
    /// Whether `|norm − limit|` decreases along the rows.
    pub volume_monotone: bool,
    pub surface_monotone: bool,
}

pub fn asymptotic_table(d: usize, radii: &[f64], t: f64, simulated: Option<&RadialProfile>) -> Result<AsymptoticTable> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidRadii("asymptotic table needs strictly decreasing radii".into()));
    }
    if let Some(p) = simulated {
        if p.dim != d {
            return Err(Error::InvalidProfile(format!("profile is {}-dimensional, table is {d}-dimensional", p.dim)));
        }
    }
    let df = d as f64;
    let (volume_limit, surface_limit, upper_bound, lower_bound) = if d == 2 {
        (PI * t, PI * t, 2.0 * PI * t, 2.0 * PI * t)
    } else {
        ((df - 2.0) * PI * t, (df - 2.0) * PI * t, (df - 2.0).powi(2) / df * PI * t, 0.0)
    };
    let kd2 = kappa(df - 2.0)?;
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let es = mean_sausage_surface(d, r, t)?;
        let ev = mean_sausage_volume(d, r, t)?;
        let l = r.ln().abs();
        let (volume_norm, surface_norm) = if d == 2 {
            (l * ev, r * l * l * es)
        } else {
            (ev / (kd2 * r.powf(df - 2.0)), es / ((df - 2.0) * kd2 * r.powf(df - 3.0)))
        };
        let sim = simulated.and_then(|p| {
            let k = p.radii.iter().position(|&x| (x - r).abs() <= 1e-9 * r)?;
            Some(p.surface[k])
        });
        let (sim_upper, sim_lower) = match sim {
            None => (None, None),
            Some(s) if d == 2 => (Some(r * l * s), Some(l.sqrt() * s)),
            Some(s) => {
                let base = (df - 2.0) * kd2;
                (Some(s / (base * r.powf(df - 3.0))), Some(s / (base * r.powf(df - 3.0 - 2.0 / df))))
            }
        };
        rows.push(AsymptoticRow { r, es, ev, volume_norm, surface_norm, sim_upper, sim_lower });
    }
    let monotone = |f: &dyn Fn(&AsymptoticRow) -> f64, lim: f64| rows.windows(2).all(|w| (f(&w[1]) - lim).abs() < (f(&w[0]) - lim).abs());
    let volume_monotone = monotone(&|r| r.volume_norm, volume_limit);
    let surface_monotone = monotone(&|r| r.surface_norm, surface_limit);
    Ok(AsymptoticTable { d, t, volume_limit, surface_limit, upper_bound, lower_bound, rows, volume_monotone, surface_monotone })
}
