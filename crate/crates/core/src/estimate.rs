//! Volume and surface estimators on a distance field.

use rayon::prelude::*;

use crate::edt::DistanceField;
use crate::error::{Error, Result};
use crate::isosurface::level_set_measures;
use crate::profile::{RadialProfile, Source};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurfaceMethod {
    /// Measure of the isocontour `{d_A = r}` (marching squares / tetrahedra).
    LevelSet,
    /// Central difference of the counted volume around `r`.
    Derivative,
}

/// Level perturbation in cell units, so ties `d = r` fall inside.
const LEVEL_EPS: f64 = 1e-12;

fn threshold(field: &DistanceField, r: f64) -> u32 {
    let t = (r / field.grid().h()).powi(2) * (1.0 + 1e-12);
    if t >= (u32::MAX - 1) as f64 {
        u32::MAX - 1
    } else {
        t.floor() as u32
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::NegativeRadius(r));
    }
    Ok(())
}

fn check_resolvable(field: &DistanceField, r: f64) -> Result<()> {
    check_radius(r)?;
    let floor = field.grid().resolvable_floor();
    if r < floor * (1.0 - 1e-12) {
        return Err(Error::Unresolvable { radius: r, floor });
    }
    Ok(())
}

/// `h^d × #{cells with d_A <= r}`.
pub fn volume_at(field: &DistanceField, r: f64) -> Result<f64> {
    Ok(volumes_at(field, &[r])?[0])
}

/// `volume_at` for many radii in one pass over the field.
pub fn volumes_at(field: &DistanceField, radii: &[f64]) -> Result<Vec<f64>> {
    for &r in radii {
        check_radius(r)?;
    }
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
    let thresholds: Vec<u32> = order.iter().map(|&k| threshold(field, radii[k])).collect();
    let nb = thresholds.len() + 1;
    let hist = field
        .squared_cells()
        .par_chunks(1 << 16)
        .map(|chunk| {
            let mut h = vec![0u64; nb];
            for &s in chunk {
                h[thresholds.partition_point(|&t| t < s)] += 1;
            }
            h
        })
        .reduce(
            || vec![0u64; nb],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let cell = field.grid().cell_volume();
    let mut out = vec![0.0; radii.len()];
    let mut running = 0u64;
    for (pos, &k) in order.iter().enumerate() {
        running += hist[pos];
        out[k] = running as f64 * cell;
    }
    Ok(out)
}

/// Surface estimate at one radius. Refuses radii below two cell widths.
pub fn surface_at(field: &DistanceField, r: f64, method: SurfaceMethod) -> Result<f64> {
    check_resolvable(field, r)?;
    match method {
        SurfaceMethod::LevelSet => Ok(level_set_surfaces(field, &[r])?[0]),
        SurfaceMethod::Derivative => {
            let h = field.grid().h();
            let delta = (4.0 * h).max(r / 16.0).min(r / 2.0);
            let v = volumes_at(field, &[r - delta, r + delta])?;
            Ok((v[1] - v[0]) / (2.0 * delta))
        }
    }
}

/// Level-set surface for many radii in one sweep.
pub fn level_set_surfaces(field: &DistanceField, radii: &[f64]) -> Result<Vec<f64>> {
    for &r in radii {
        check_resolvable(field, r)?;
    }
    let g = field.grid();
    let h = g.h();
    let levels: Vec<f64> = radii.iter().map(|r| r / h + LEVEL_EPS).collect();
    let sq = field.squared_cells();
    let m = level_set_measures(g.n(), g.dim(), |lin| (sq[lin] as f64).sqrt(), &levels);
    let scale = h.powi(g.dim() as i32 - 1);
    Ok(m.into_iter().map(|x| x * scale).collect())
}

/// Derivative of `f` sampled on an increasing, possibly non-uniform schedule:
/// second-order three-point formulas, one-sided at the ends.
pub fn schedule_derivative(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        2 => {
            let d = (f[1] - f[0]) / (x[1] - x[0]);
            vec![d, d]
        }
        _ => (0..n)
            .map(|k| {
                let c = k.clamp(1, n - 2);
                let (x0, x1, x2) = (x[c - 1], x[c], x[c + 1]);
                let (f0, f1, f2) = (f[c - 1], f[c], f[c + 1]);
                let (h1, h2) = (x1 - x0, x2 - x1);
                if k == 0 {
                    -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f0 + (h1 + h2) / (h1 * h2) * f1
                        - h1 / (h2 * (h1 + h2)) * f2
                } else if k == n - 1 {
                    h2 / (h1 * (h1 + h2)) * f0 - (h1 + h2) / (h1 * h2) * f1
                        + (2.0 * h2 + h1) / (h2 * (h1 + h2)) * f2
                } else {
                    -h2 / (h1 * (h1 + h2)) * f0 + (h2 - h1) / (h1 * h2) * f1 + h1 / (h2 * (h1 + h2)) * f2
                }
            })
            .collect(),
    }
}

/// Profile with level-set surface and the schedule derivative as auxiliary.
pub fn sample_profile(field: &DistanceField, radii: &[f64]) -> Result<RadialProfile> {
    if radii.is_empty() {
        return Err(Error::InvalidRadii("empty radii".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidRadii("radii must be strictly increasing".into()));
    }
    let volume = volumes_at(field, radii)?;
    let surface = level_set_surfaces(field, radii)?;
    let aux = if radii.len() >= 2 {
        schedule_derivative(radii, &volume)
    } else {
        vec![surface_at(field, radii[0], SurfaceMethod::Derivative)?]
    };
    let v0 = volume_at(field, 0.0)?;
    let h = field.grid().h();
    let p = RadialProfile::new(field.grid().dim(), radii.to_vec(), volume, surface, v0, Source::Grid)?
        .with_aux(aux)
        .with_cell_size(h);
    p.validate()?;
    Ok(p)
}
