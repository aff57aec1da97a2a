//! Grid pipeline for a declared-OSC function system: rasterize, profile,
//! renewal integral and content estimates.

use serde::Serialize;

use super::{attractor_bbox, classify_lattice, rasterize_attractor, renewal_from_profile, similarity_dimension};
use super::{IFSystem, Lattice, RenewalResult};
use crate::contents::{average_content, content_bounds, estimate_dimension_in, ContentEstimate, ContentKind, Window};
use crate::edt::exact_edt;
use crate::error::{Error, Result};
use crate::estimate::sample_profile;
use crate::grid::{make_grid, GridSpec};
use crate::profile::{geometric_radii, RadialProfile};

/// Default smallest radius in fine cells. Level-set surface estimates of a
/// rasterized fractal are biased low by roughly `0.4 h / r`, and the renewal
/// integral inherits the surface error on its smallest octave.
pub const RESOLVED_CELLS: f64 = 40.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyzeOptions {
    /// Cells per axis of each of the two grids.
    pub n: usize,
    /// Smallest radius, in units of the attractor's bounding-box extent.
    /// `None` picks `RESOLVED_CELLS` fine cells.
    pub r_min: Option<f64>,
    pub per_octave: usize,
    /// Padding of the fine grid around the attractor, relative to its extent.
    pub fine_pad: f64,
    pub max_denominator: u64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { n: 4096, r_min: None, per_octave: 8, fine_pad: 0.3, max_denominator: super::DEFAULT_MAX_DENOMINATOR }
    }
}

/// Spread `sup − inf` of the normalized surface series over the two smallest
/// octaves, relative to its mean. For non-arithmetic systems the plain limit
/// exists, so the spread should shrink as resolution grows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpreadDiagnostic {
    pub window: (f64, f64),
    pub lower: f64,
    pub upper: f64,
    pub relative_spread: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IfsAnalysis {
    pub dimension: f64,
    pub lattice: Lattice,
    pub osc_declared: bool,
    pub renewal: RenewalResult,
    pub volume: ContentEstimate,
    pub surface: ContentEstimate,
    pub spread: Option<SpreadDiagnostic>,
    /// Radius at which the profile switches from the fine to the coarse grid.
    pub switch_radius: f64,
    pub fine_cell: f64,
    pub coarse_cell: f64,
    #[serde(skip)]
    pub profile: RadialProfile,
}

fn field_profile(ifs: &IFSystem, grid: &GridSpec, radii: &[f64]) -> Result<RadialProfile> {
    let mask = rasterize_attractor(ifs, grid)?;
    let field = exact_edt(&mask)?;
    sample_profile(&field, radii)
}

/// Profile of the attractor on geometric radii `[r_min, 1]` (in absolute
/// units, `r_min` scaled by the extent). Small radii come from a grid
/// hugging the attractor, large radii from a grid padded by more than 1.
/// The attractor has zero volume when `D < d`, so `v0 = 0`.
pub fn ifs_profile(ifs: &IFSystem, opts: &AnalyzeOptions) -> Result<(RadialProfile, f64, GridSpec, GridSpec)> {
    let bbox = attractor_bbox(ifs);
    let d = ifs.dim;
    let extent = (0..d).map(|a| bbox.max[a] - bbox.min[a]).fold(0.0, f64::max);
    let fine_pad = opts.fine_pad * extent;
    let fine = make_grid(&bbox.cubical_hull(fine_pad), opts.n, d)?;
    let coarse_pad = 1.0 + 4.0 * (extent + 2.5) / opts.n as f64;
    let coarse = make_grid(&bbox.cubical_hull(coarse_pad), opts.n, d)?;
    let switch = fine_pad - 4.0 * fine.h();
    let r_min = opts.r_min.map_or(RESOLVED_CELLS * fine.h(), |r| r * extent);
    if r_min < fine.resolvable_floor() {
        return Err(Error::Unresolvable { radius: r_min, floor: fine.resolvable_floor() });
    }
    let radii = geometric_radii(r_min, 1.0, opts.per_octave)?;
    let split = radii.partition_point(|&r| r <= switch);
    let (small, large) = radii.split_at(split);
    if small.len() < 3 || large.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "radius range [{r_min}, 1] splits badly at {switch}: {} fine and {} coarse samples",
            small.len(),
            large.len()
        )));
    }
    let a = field_profile(ifs, &fine, small)?;
    let b = field_profile(ifs, &coarse, large)?;
    let cat = |x: &[f64], y: &[f64]| x.iter().chain(y).copied().collect::<Vec<f64>>();
    let aux = cat(a.surface_aux.as_deref().unwrap_or(&[]), b.surface_aux.as_deref().unwrap_or(&[]));
    let p = RadialProfile::new(d, radii.clone(), cat(&a.volume, &b.volume), cat(&a.surface, &b.surface), 0.0, a.source)?
        .with_aux(aux)
        .with_cell_size(fine.h());
    Ok((p, switch, fine, coarse))
}

pub fn analyze_ifs(ifs: &IFSystem, opts: &AnalyzeOptions) -> Result<IfsAnalysis> {
    if !ifs.osc_declared {
        return Err(Error::OscNotDeclared);
    }
    let ratios = ifs.ratios();
    let dimension = similarity_dimension(&ratios)?;
    if dimension >= ifs.dim as f64 {
        return Err(Error::InvalidIfs(format!(
            "similarity dimension {dimension} is not below the ambient dimension {}",
            ifs.dim
        )));
    }
    let lattice = classify_lattice(&ratios, opts.max_denominator)?;
    let (profile, switch_radius, fine, coarse) = ifs_profile(ifs, opts)?;
    let renewal = renewal_from_profile(&profile, &ratios)?;
    let contents = |kind| -> Result<ContentEstimate> {
        let mut est = content_bounds(&profile, dimension, kind, Window::SmallestDecade)?;
        est.average = Some(average_content(&profile, dimension, kind)?);
        est.dim_fit = Some(estimate_dimension_in(&profile, kind, Window::Range(profile.radii[0], switch_radius))?);
        Ok(est)
    };
    let volume = contents(ContentKind::Volume)?;
    let surface = contents(ContentKind::Surface)?;
    let spread = if lattice.is_arithmetic() {
        None
    } else {
        Some(spread_diagnostic(&profile, dimension)?)
    };
    Ok(IfsAnalysis {
        dimension,
        lattice,
        osc_declared: true,
        renewal,
        volume,
        surface,
        spread,
        switch_radius,
        fine_cell: fine.h(),
        coarse_cell: coarse.h(),
        profile,
    })
}

pub fn spread_diagnostic(profile: &RadialProfile, s: f64) -> Result<SpreadDiagnostic> {
    let est = content_bounds(profile, s, ContentKind::Surface, Window::SmallestOctaves(2))?;
    let mean = 0.5 * (est.lower + est.upper);
    Ok(SpreadDiagnostic {
        window: est.window,
        lower: est.lower,
        upper: est.upper,
        relative_spread: (est.upper - est.lower) / mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selfsimilar::{cantor_dust_ifs, gasket_ifs, Similarity};

    #[test]
    fn osc_must_be_declared() {
        let mut ifs = gasket_ifs();
        ifs.osc_declared = false;
        assert!(matches!(analyze_ifs(&ifs, &AnalyzeOptions::default()), Err(Error::OscNotDeclared)));
    }

    #[test]
    fn full_dimensional_is_rejected() {
        let maps = (0..4)
            .map(|k| Similarity::homothety(0.5, &[0.5 * (k % 2) as f64, 0.5 * (k / 2) as f64]).unwrap())
            .collect();
        let ifs = IFSystem::new(2, maps, true).unwrap();
        assert!(matches!(analyze_ifs(&ifs, &AnalyzeOptions::default()), Err(Error::InvalidIfs(_))));
    }

    #[test]
    fn coarse_cantor_dust() {
        let opts = AnalyzeOptions { n: 512, r_min: Some(1e-2), per_octave: 6, ..Default::default() };
        let a = analyze_ifs(&cantor_dust_ifs(), &opts).unwrap();
        assert!((a.dimension - 1.0).abs() < 1e-12);
        assert!(a.lattice.is_arithmetic());
        assert!(a.spread.is_none());
        assert!(a.renewal.integral.is_finite());
        assert_eq!(a.profile.v0, 0.0);
    }

    #[test]
    fn unresolvable_r_min() {
        let opts = AnalyzeOptions { n: 256, r_min: Some(1e-3), ..Default::default() };
        assert!(matches!(analyze_ifs(&gasket_ifs(), &opts), Err(Error::Unresolvable { .. })));
    }
}
