//! Closed-form parallel-set oracles for simple sets, and their rasterization.
//!
//! Canonical placements: points and disks/balls sit at the origin, the square
//! is `[0, L]^2`, a segment runs from `(0, 0)` to `(L, 0)`, the two segments
//! run along `y = ±a`, and the gasket has vertices `(0,0), (1,0), (1/2, √3/2)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::edt::exact_edt;
use crate::error::{Error, Result};
use crate::estimate::sample_profile;
use crate::gasket::gasket_profile;
use crate::grid::{make_grid, mask_from_points, BinaryMask, BoundingBox, GridSpec};
use crate::profile::{RadialProfile, Source};
use crate::selfsimilar::{gasket_ifs, rasterize_attractor};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Point { dim: usize },
    Segment { length: f64 },
    TwoSegments { length: f64, half_gap: f64 },
    Disk { radius: f64 },
    Ball { radius: f64 },
    Square { side: f64 },
    Gasket,
}

/// Boundary lengths of two parallel segments at the touching radius `r = a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TouchingValues {
    /// `H^1(∂A_a)` of the closed parallel set: the seam is interior.
    pub closed: f64,
    /// Boundary of the open parallel set `{d_A < a}`, which keeps the seam.
    pub open: f64,
    /// Left limit from the disjoint regime.
    pub pre_merge: f64,
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Point { dim } => *dim,
            Shape::Ball { .. } => 3,
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")))
            }
        };
        match *self {
            Shape::Point { dim } if !(2..=3).contains(&dim) => {
                Err(Error::InvalidParameter(format!("point dimension must be 2 or 3, got {dim}")))
            }
            Shape::Point { .. } | Shape::Gasket => Ok(()),
            Shape::Segment { length } => pos("length", length),
            Shape::TwoSegments { length, half_gap } => {
                pos("length", length)?;
                pos("half gap", half_gap)
            }
            Shape::Disk { radius } | Shape::Ball { radius } => pos("radius", radius),
            Shape::Square { side } => pos("side", side),
        }
    }

    /// Lebesgue measure of the set itself.
    pub fn v0(&self) -> f64 {
        match *self {
            Shape::Disk { radius } => PI * radius * radius,
            Shape::Ball { radius } => 4.0 / 3.0 * PI * radius.powi(3),
            Shape::Square { side } => side * side,
            _ => 0.0,
        }
    }

    /// Axis-aligned bounding box of the set in its canonical placement.
    pub fn bbox(&self) -> BoundingBox {
        match *self {
            Shape::Point { dim } => BoundingBox::cube(dim, 0.0, 0.0),
            Shape::Segment { length } => BoundingBox::new(vec![0.0, 0.0], vec![length, 0.0]),
            Shape::TwoSegments { length, half_gap } => {
                BoundingBox::new(vec![0.0, -half_gap], vec![length, half_gap])
            }
            Shape::Disk { radius } => BoundingBox::cube(2, -radius, radius),
            Shape::Ball { radius } => BoundingBox::cube(3, -radius, radius),
            Shape::Square { side } => BoundingBox::cube(2, 0.0, side),
            Shape::Gasket => BoundingBox::new(vec![0.0, 0.0], vec![1.0, 0.75f64.sqrt()]),
        }
    }

    /// Exact `(V(r), S(r))`.
    pub fn exact(&self, r: f64) -> Result<(f64, f64)> {
        self.validate()?;
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::NegativeRadius(r));
        }
        Ok(match *self {
            Shape::Point { dim: 2 } => (PI * r * r, 2.0 * PI * r),
            Shape::Point { .. } => (4.0 / 3.0 * PI * r.powi(3), 4.0 * PI * r * r),
            Shape::Segment { length } => (2.0 * length * r + PI * r * r, 2.0 * length + 2.0 * PI * r),
            Shape::TwoSegments { length, half_gap } => {
                if r > half_gap {
                    return Err(Error::OracleRange(format!(
                        "two-segment formulas hold for r <= a = {half_gap}, got r = {r}"
                    )));
                }
                (2.0 * (2.0 * length * r + PI * r * r), 2.0 * (2.0 * length + 2.0 * PI * r))
            }
            Shape::Disk { radius } => (PI * (radius + r).powi(2), 2.0 * PI * (radius + r)),
            Shape::Ball { radius } => {
                (4.0 / 3.0 * PI * (radius + r).powi(3), 4.0 * PI * (radius + r).powi(2))
            }
            Shape::Square { side } => (side * side + 4.0 * side * r + PI * r * r, 4.0 * side + 2.0 * PI * r),
            Shape::Gasket => crate::gasket::gasket_exact(r)?,
        })
    }

    /// The three boundary values of the two-segment set at `r = a`.
    pub fn touching_values(&self) -> Option<TouchingValues> {
        match *self {
            Shape::TwoSegments { length, half_gap: a } => Some(TouchingValues {
                closed: 2.0 * length + 4.0 * PI * a,
                open: 3.0 * length + 4.0 * PI * a,
                pre_merge: 4.0 * length + 4.0 * PI * a,
            }),
            _ => None,
        }
    }

    /// Smallest cube around the set with margin `pad`.
    pub fn grid_box(&self, pad: f64) -> BoundingBox {
        self.bbox().cubical_hull(pad)
    }

    /// Occupancy of the set on `grid`: filled sets mark cells whose center
    /// lies inside; lower-dimensional sets mark every cell they pass through.
    pub fn rasterize(&self, grid: &GridSpec) -> Result<BinaryMask> {
        self.validate()?;
        if grid.dim() != self.dim() {
            return Err(Error::InvalidGrid(format!(
                "shape is {}-dimensional, grid is {}-dimensional",
                self.dim(),
                grid.dim()
            )));
        }
        let h = grid.h();
        let segment = |y: f64, length: f64| -> Vec<[f64; 2]> {
            let k = (4.0 * length / h).ceil() as usize;
            (0..=k).map(|i| [length * i as f64 / k as f64, y]).collect()
        };
        let mask = match *self {
            Shape::Point { dim } => mask_from_points(&[vec![0.0; dim]], grid)?,
            Shape::Segment { length } => mask_from_points(&segment(0.0, length), grid)?,
            Shape::TwoSegments { length, half_gap } => {
                let mut pts = segment(half_gap, length);
                pts.extend(segment(-half_gap, length));
                mask_from_points(&pts, grid)?
            }
            Shape::Disk { radius } => {
                BinaryMask::from_predicate(grid.clone(), |c| c[0].hypot(c[1]) <= radius)
            }
            Shape::Ball { radius } => BinaryMask::from_predicate(grid.clone(), |c| {
                (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt() <= radius
            }),
            Shape::Square { side } => BinaryMask::from_predicate(grid.clone(), |c| {
                (0.0..=side).contains(&c[0]) && (0.0..=side).contains(&c[1])
            }),
            Shape::Gasket => rasterize_attractor(&gasket_ifs(), grid)?,
        };
        if mask.is_empty() {
            return Err(Error::EmptyMask);
        }
        Ok(mask)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Point { dim: 2 } => write!(f, "point"),
            Shape::Point { dim } => write!(f, "point:{dim}"),
            Shape::Segment { length } => write!(f, "segment:{length}"),
            Shape::TwoSegments { length, half_gap } => write!(f, "twoseg:{length}:{half_gap}"),
            Shape::Disk { radius } => write!(f, "disk:{radius}"),
            Shape::Ball { radius } => write!(f, "ball:{radius}"),
            Shape::Square { side } => write!(f, "square:{side}"),
            Shape::Gasket => write!(f, "gasket"),
        }
    }
}

impl FromStr for Shape {
    type Err = Error;

    /// `disk:0.25`, `ball:0.3`, `square:1`, `segment:1`, `twoseg:1:0.1`,
    /// `point`, `point:3`, `gasket`.
    fn from_str(spec: &str) -> Result<Self> {
        let mut parts = spec.split(':');
        let kind = parts.next().unwrap_or_default();
        let args: Vec<&str> = parts.collect();
        let num = |i: usize| -> Result<f64> {
            let s = args
                .get(i)
                .ok_or_else(|| Error::Parse(format!("shape `{spec}` is missing parameter {}", i + 1)))?;
            s.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{s}` in shape `{spec}`")))
        };
        let arity = |k: usize| -> Result<()> {
            if args.len() == k {
                Ok(())
            } else {
                Err(Error::Parse(format!("shape `{spec}` takes {k} parameter(s)")))
            }
        };
        let shape = match kind {
            "point" if args.is_empty() => Shape::Point { dim: 2 },
            "point" => {
                arity(1)?;
                let dim = args[0]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad dimension in `{spec}`")))?;
                Shape::Point { dim }
            }
            "segment" => {
                arity(1)?;
                Shape::Segment { length: num(0)? }
            }
            "twoseg" => {
                arity(2)?;
                Shape::TwoSegments { length: num(0)?, half_gap: num(1)? }
            }
            "disk" => {
                arity(1)?;
                Shape::Disk { radius: num(0)? }
            }
            "ball" => {
                arity(1)?;
                Shape::Ball { radius: num(0)? }
            }
            "square" => {
                arity(1)?;
                Shape::Square { side: num(0)? }
            }
            "gasket" => {
                arity(0)?;
                Shape::Gasket
            }
            _ => return Err(Error::Parse(format!("unknown shape `{spec}`"))),
        };
        shape.validate()?;
        Ok(shape)
    }
}

/// Exact profile of `shape` on `radii`. For two segments the radii must not
/// exceed the half gap; the value at `r = a` is the left limit.
pub fn shape_profile(shape: &Shape, radii: &[f64]) -> Result<RadialProfile> {
    if let Shape::Gasket = shape {
        return gasket_profile(radii);
    }
    let mut volume = Vec::with_capacity(radii.len());
    let mut surface = Vec::with_capacity(radii.len());
    for &r in radii {
        let (v, s) = shape.exact(r)?;
        volume.push(v);
        surface.push(s);
    }
    RadialProfile::new(shape.dim(), radii.to_vec(), volume, surface, shape.v0(), Source::Analytic)
}

/// Grid with `n` cells per axis on a box around `shape` padded by `r_max`
/// plus a few cells.
pub fn shape_grid(shape: &Shape, n: usize, r_max: f64) -> Result<GridSpec> {
    let b = shape.bbox();
    let extent = (0..b.dim()).map(|a| b.max[a] - b.min[a]).fold(0.0, f64::max);
    let pad = r_max + 4.0 * (extent + 2.0 * r_max) / n as f64;
    make_grid(&shape.grid_box(pad), n, shape.dim())
}

/// Grid profile of `shape` on `shape_grid(shape, n, max radius)`. Sets of
/// zero volume get `v0 = 0`.
pub fn grid_shape_profile(shape: &Shape, n: usize, radii: &[f64]) -> Result<(RadialProfile, GridSpec)> {
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    let grid = shape_grid(shape, n, r_max)?;
    let field = exact_edt(&shape.rasterize(&grid)?)?;
    let mut p = sample_profile(&field, radii)?;
    if shape.v0() == 0.0 {
        p.v0 = 0.0;
    }
    Ok((p, grid))
}
