//! Attractor rasterization by word-space recursion.

use rayon::prelude::*;

use super::{IFSystem, Similarity};
use crate::error::{Error, Result};
use crate::grid::{BinaryMask, BoundingBox, GridSpec};

/// Ball `B(c, R)` mapped into itself by every map, hence containing the
/// attractor: `c` is the centroid of the fixed points and
/// `R = max_i |S_i c − c| / (1 − r_i)`.
pub fn enclosing_ball(ifs: &IFSystem) -> ([f64; 3], f64) {
    let n = ifs.maps.len() as f64;
    let mut c = [0.0; 3];
    for m in &ifs.maps {
        let p = m.fixed_point();
        for a in 0..3 {
            c[a] += p[a] / n;
        }
    }
    let radius = ifs
        .maps
        .iter()
        .map(|m| dist(&m.apply(&c), &c) / (1.0 - m.ratio))
        .fold(0.0, f64::max);
    (c, radius)
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Composite map `x ↦ scale · Q x + t` of a word.
#[derive(Clone)]
struct Word {
    scale: f64,
    q: [[f64; 3]; 3],
    t: [f64; 3],
}

impl Word {
    fn identity() -> Self {
        Word { scale: 1.0, q: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], t: [0.0; 3] }
    }

    fn apply(&self, x: &[f64; 3]) -> [f64; 3] {
        let mut y = [0.0; 3];
        for i in 0..3 {
            y[i] = self.scale * (self.q[i][0] * x[0] + self.q[i][1] * x[1] + self.q[i][2] * x[2]) + self.t[i];
        }
        y
    }

    /// `self ∘ m`.
    fn then(&self, m: &Similarity) -> Self {
        let mut q = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                q[i][j] = (0..3).map(|k| self.q[i][k] * m.orthogonal[k][j]).sum();
            }
        }
        Word { scale: self.scale * m.ratio, q, t: self.apply(&m.translation) }
    }
}

/// Points `S_w(p)` for every word `w` whose scale first drops below
/// `stop_scale`, in depth-first word order.
fn leaf_points(ifs: &IFSystem, root: Word, p: &[f64; 3], stop_scale: f64, out: &mut Vec<[f64; 3]>) {
    let mut stack = vec![root];
    while let Some(w) = stack.pop() {
        if w.scale < stop_scale {
            out.push(w.apply(p));
            continue;
        }
        for m in ifs.maps.iter().rev() {
            stack.push(w.then(m));
        }
    }
}

/// Words below this many leaves are expanded serially.
fn roots(ifs: &IFSystem, stop_scale: f64) -> Vec<Word> {
    let mut level = vec![Word::identity()];
    for _ in 0..2 {
        if level.iter().any(|w| w.scale < stop_scale) {
            break;
        }
        level = level.iter().flat_map(|w| ifs.maps.iter().map(|m| w.then(m))).collect();
    }
    level
}

/// Bounding box of the attractor, enlarged by the approximation error so it
/// contains the attractor.
pub fn attractor_bbox(ifs: &IFSystem) -> BoundingBox {
    let (_, radius) = enclosing_ball(ifs);
    let diam = 2.0 * radius;
    let stop = 1e-3;
    let p = ifs.maps[0].fixed_point();
    let mut pts = Vec::new();
    leaf_points(ifs, Word::identity(), &p, stop, &mut pts);
    let d = ifs.dim;
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    for q in &pts {
        for a in 0..d {
            min[a] = min[a].min(q[a]);
            max[a] = max[a].max(q[a]);
        }
    }
    let margin = stop * diam;
    BoundingBox::new(min.iter().map(|x| x - margin).collect(), max.iter().map(|x| x + margin).collect())
}

/// Marks the cells containing `S_w(p)` for all words with `r_w · diam < h/4`,
/// `p` the fixed point of the first map. Every stamped point lies on the
/// attractor, and every attractor point is within `h/4` of a stamped point.
pub fn rasterize_attractor(ifs: &IFSystem, grid: &GridSpec) -> Result<BinaryMask> {
    if grid.dim() != ifs.dim {
        return Err(Error::InvalidGrid(format!(
            "function system is {}-dimensional, grid is {}-dimensional",
            ifs.dim,
            grid.dim()
        )));
    }
    let (_, radius) = enclosing_ball(ifs);
    let stop = grid.h() / (4.0 * 2.0 * radius);
    let p = ifs.maps[0].fixed_point();
    let cells: Vec<Result<Vec<usize>>> = roots(ifs, stop)
        .into_par_iter()
        .map(|w| {
            let mut pts = Vec::new();
            leaf_points(ifs, w, &p, stop, &mut pts);
            pts.iter()
                .map(|q| {
                    grid.locate(&q[..ifs.dim]).map(|idx| grid.linear(idx)).ok_or_else(|| {
                        Error::BboxOverflow(format!("attractor point {:?} lies outside the grid box", &q[..ifs.dim]))
                    })
                })
                .collect()
        })
        .collect();
    let mut mask = BinaryMask::empty(grid.clone());
    for part in cells {
        for lin in part? {
            mask.set_linear(lin);
        }
    }
    Ok(mask)
}
