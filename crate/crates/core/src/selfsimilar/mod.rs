//! Self-similar sets: function systems of contracting similarities, their
//! similarity dimension and lattice type, rasterized attractors and the
//! renewal integral for the average S-content.

mod analyze;
mod raster;
mod renewal;

pub use analyze::{analyze_ifs, ifs_profile, spread_diagnostic, AnalyzeOptions, IfsAnalysis, SpreadDiagnostic};
pub use raster::{attractor_bbox, enclosing_ball, rasterize_attractor};
pub use renewal::{r_function, renewal_from_profile, renewal_s_content, RFunction, RenewalResult, Tail, TailFit};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `x ↦ ratio · Q x + translation` with `Q` orthogonal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Similarity {
    pub ratio: f64,
    /// Row-major orthogonal part; only the leading `dim × dim` block is used.
    pub orthogonal: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

const IDENTITY: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

fn planar_orthogonal(angle_deg: f64, reflect: bool) -> [[f64; 3]; 3] {
    let (s, c) = angle_deg.to_radians().sin_cos();
    let f = if reflect { -1.0 } else { 1.0 };
    [[c, -s * f, 0.0], [s, c * f, 0.0], [0.0, 0.0, 1.0]]
}

impl Similarity {
    pub fn new(ratio: f64, orthogonal: [[f64; 3]; 3], translation: [f64; 3]) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidIfs(format!("ratio {ratio} must lie in (0, 1)")));
        }
        Ok(Self { ratio, orthogonal, translation })
    }

    /// Plane similarity; `reflect` composes the rotation with `y ↦ −y`.
    pub fn planar(ratio: f64, angle_deg: f64, reflect: bool, translation: [f64; 2]) -> Result<Self> {
        Self::new(ratio, planar_orthogonal(angle_deg, reflect), [translation[0], translation[1], 0.0])
    }

    /// Pure scaling plus translation.
    pub fn homothety(ratio: f64, translation: &[f64]) -> Result<Self> {
        let mut t = [0.0; 3];
        t[..translation.len()].copy_from_slice(translation);
        Self::new(ratio, IDENTITY, t)
    }

    pub fn apply(&self, x: &[f64; 3]) -> [f64; 3] {
        let q = &self.orthogonal;
        let mut y = [0.0; 3];
        for i in 0..3 {
            y[i] = self.ratio * (q[i][0] * x[0] + q[i][1] * x[1] + q[i][2] * x[2]) + self.translation[i];
        }
        y
    }

    /// Unique fixed point, solving `(I − ratio·Q) x = translation`.
    pub fn fixed_point(&self) -> [f64; 3] {
        let mut a = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] = if i == j { 1.0 } else { 0.0 } - self.ratio * self.orthogonal[i][j];
            }
        }
        solve3(a, self.translation)
    }
}

/// Gaussian elimination with partial pivoting; the systems here are
/// diagonally dominant-ish (`|ratio·Q| < 1`) and never singular.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IFSystem {
    pub dim: usize,
    pub maps: Vec<Similarity>,
    /// The user asserts the open set condition; it is not verified.
    pub osc_declared: bool,
}

impl IFSystem {
    pub fn new(dim: usize, maps: Vec<Similarity>, osc_declared: bool) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidIfs(format!("ambient dimension must be 2 or 3, got {dim}")));
        }
        if maps.len() < 2 {
            return Err(Error::InvalidIfs(format!("need at least 2 maps, got {}", maps.len())));
        }
        for m in &maps {
            Similarity::new(m.ratio, m.orthogonal, m.translation)?;
            check_orthogonal(&m.orthogonal, dim)?;
        }
        Ok(Self { dim, maps, osc_declared })
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.maps.iter().map(|m| m.ratio).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: IfsJson = serde_json::from_str(text)?;
        raw.into_system()
    }
}

fn check_orthogonal(q: &[[f64; 3]; 3], dim: usize) -> Result<()> {
    for i in 0..dim {
        for j in 0..dim {
            let dot: f64 = (0..dim).map(|k| q[i][k] * q[j][k]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            if (dot - want).abs() > 1e-9 {
                return Err(Error::InvalidIfs("map matrix is not orthogonal".into()));
            }
        }
    }
    Ok(())
}

#[derive(Deserialize)]
struct MapJson {
    ratio: f64,
    #[serde(default)]
    angle_deg: Option<f64>,
    #[serde(default)]
    reflect: bool,
    #[serde(default)]
    matrix: Option<Vec<Vec<f64>>>,
    translate: Vec<f64>,
}

#[derive(Deserialize)]
struct IfsJson {
    dim: usize,
    maps: Vec<MapJson>,
    #[serde(default)]
    osc: bool,
}

impl IfsJson {
    fn into_system(self) -> Result<IFSystem> {
        let dim = self.dim;
        let maps = self
            .maps
            .into_iter()
            .map(|m| {
                if m.translate.len() != dim {
                    return Err(Error::InvalidIfs(format!(
                        "translate has {} entries, dim is {dim}",
                        m.translate.len()
                    )));
                }
                let mut t = [0.0; 3];
                t[..dim].copy_from_slice(&m.translate);
                let q = match (&m.matrix, m.angle_deg) {
                    (Some(_), Some(_)) => {
                        return Err(Error::InvalidIfs("give either angle_deg or matrix, not both".into()))
                    }
                    (Some(rows), None) => {
                        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                            return Err(Error::InvalidIfs(format!("matrix must be {dim}×{dim}")));
                        }
                        let mut q = IDENTITY;
                        for i in 0..dim {
                            q[i][..dim].copy_from_slice(&rows[i]);
                        }
                        q
                    }
                    (None, angle) => {
                        let a = angle.unwrap_or(0.0);
                        if dim == 3 && a != 0.0 {
                            return Err(Error::InvalidIfs("angle_deg is 2D only; use matrix in 3D".into()));
                        }
                        planar_orthogonal(a, m.reflect)
                    }
                };
                Similarity::new(m.ratio, q, t)
            })
            .collect::<Result<Vec<_>>>()?;
        IFSystem::new(dim, maps, self.osc)
    }
}

/// The three half-scale maps of the Sierpinski gasket with unit side.
pub fn gasket_ifs() -> IFSystem {
    let t = [[0.0, 0.0], [0.5, 0.0], [0.25, 0.75f64.sqrt() / 2.0]];
    let maps = t.iter().map(|t| Similarity::homothety(0.5, t).expect("valid ratio")).collect();
    IFSystem::new(2, maps, true).expect("valid system")
}

/// Four quarter-scale copies in the corners of the unit square.
pub fn cantor_dust_ifs() -> IFSystem {
    let t = [[0.0, 0.0], [0.75, 0.0], [0.0, 0.75], [0.75, 0.75]];
    let maps = t.iter().map(|t| Similarity::homothety(0.25, t).expect("valid ratio")).collect();
    IFSystem::new(2, maps, true).expect("valid system")
}

/// Unique `D` with `Σ r_i^D = 1`.
pub fn similarity_dimension(ratios: &[f64]) -> Result<f64> {
    validate_ratios(ratios)?;
    let f = |s: f64| ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
    let df = |s: f64| ratios.iter().map(|r| r.powf(s) * r.ln()).sum::<f64>();
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..3 {
        let step = f(s) / df(s);
        if step.is_finite() {
            s -= step;
        }
    }
    Ok(s)
}

/// `η = −Σ r_i^D ln r_i`.
pub fn renewal_eta(ratios: &[f64], d: f64) -> f64 {
    -ratios.iter().map(|r| r.powf(d) * r.ln()).sum::<f64>()
}

fn validate_ratios(ratios: &[f64]) -> Result<()> {
    if ratios.len() < 2 {
        return Err(Error::InvalidIfs(format!("need at least 2 ratios, got {}", ratios.len())));
    }
    if let Some(r) = ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(Error::InvalidIfs(format!("ratio {r} must lie in (0, 1)")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Lattice {
    /// All `−ln r_i` lie in `hZ`; `h` is the largest such number.
    Arithmetic { h: f64 },
    /// No common lattice with denominators up to the bound. This is a
    /// verdict at finite resolution, not a proof of irrationality.
    NonArithmeticAtResolution { max_denominator: u64 },
}

impl Lattice {
    pub fn is_arithmetic(&self) -> bool {
        matches!(self, Lattice::Arithmetic { .. })
    }
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Best rational `p/q` (q ≤ qmax) found among the continued-fraction
/// convergents of `x > 0` that matches to relative `tol`.
fn rational_approx(x: f64, qmax: u64, tol: f64) -> Option<(u128, u128)> {
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        if a > 1e18 {
            break;
        }
        let a = a as u128;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > qmax as u128 {
            break;
        }
        if ((p2 as f64 / q2 as f64) - x).abs() <= tol * x.max(1.0) {
            return Some((p2, q2));
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = y - a as f64;
        if frac <= 0.0 {
            break;
        }
        y = 1.0 / frac;
    }
    None
}

/// Lattice type of `−ln r_i` via continued fractions of `ln r_i / ln r_1`.
///
/// The match tolerance is `min(1e−12, 1/(100 q_max²))`: distinct fractions
/// with denominators up to `q_max` are at least `1/q_max²` apart, and with a
/// looser tolerance near-misses such as `301994/190537 ≈ log2 3` (relative gap
/// 3e−13) would pass as rational.
pub fn classify_lattice(ratios: &[f64], max_denominator: u64) -> Result<Lattice> {
    validate_ratios(ratios)?;
    let q = max_denominator.max(1);
    let tol = 1e-12_f64.min(0.01 / (q as f64 * q as f64));
    let logs: Vec<f64> = ratios.iter().map(|r| -r.ln()).collect();
    let base = logs[0];
    let mut fracs = Vec::with_capacity(logs.len());
    for &l in &logs {
        match rational_approx(l / base, q, tol) {
            Some(pq) => fracs.push(pq),
            None => return Ok(Lattice::NonArithmeticAtResolution { max_denominator: q }),
        }
    }
    let mut lcm: u128 = 1;
    for &(_, qi) in &fracs {
        lcm = lcm / gcd(lcm, qi) * qi;
        if lcm > 1u128 << 100 {
            return Ok(Lattice::NonArithmeticAtResolution { max_denominator: q });
        }
    }
    let g = fracs.iter().fold(0u128, |g, &(p, qi)| gcd(g, p * (lcm / qi)));
    Ok(Lattice::Arithmetic { h: base * g as f64 / lcm as f64 })
}

pub const DEFAULT_MAX_DENOMINATOR: u64 = 1_000_000;
