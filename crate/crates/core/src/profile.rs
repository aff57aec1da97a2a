//! Sampled radial profiles `r -> (V(r), S(r))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a profile came from. Checker tolerances depend on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Grid,
    Analytic,
    Simulation,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Grid => "grid",
            Source::Analytic => "analytic",
            Source::Simulation => "simulation",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Source::Grid),
            "analytic" => Ok(Source::Analytic),
            "simulation" => Ok(Source::Simulation),
            other => Err(Error::Parse(format!("unknown profile source `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub dim: usize,
    pub radii: Vec<f64>,
    pub volume: Vec<f64>,
    /// Surface estimate used by the checkers (level-set for grid sources).
    pub surface: Vec<f64>,
    /// Derivative-of-volume estimate, when one was computed.
    pub surface_aux: Option<Vec<f64>>,
    pub v0: f64,
    pub source: Source,
    /// Cell edge for grid sources.
    pub cell_size: Option<f64>,
}

impl RadialProfile {
    /// Validated constructor.
    pub fn new(
        dim: usize,
        radii: Vec<f64>,
        volume: Vec<f64>,
        surface: Vec<f64>,
        v0: f64,
        source: Source,
    ) -> Result<Self> {
        let p = Self::raw(dim, radii, volume, surface, v0, source);
        p.validate()?;
        Ok(p)
    }

    /// Unvalidated constructor; lets a checker judge a corrupted table.
    pub fn raw(
        dim: usize,
        radii: Vec<f64>,
        volume: Vec<f64>,
        surface: Vec<f64>,
        v0: f64,
        source: Source,
    ) -> Self {
        Self { dim, radii, volume, surface, surface_aux: None, v0, source, cell_size: None }
    }

    pub fn with_aux(mut self, aux: Vec<f64>) -> Self {
        self.surface_aux = Some(aux);
        self
    }

    pub fn with_cell_size(mut self, h: f64) -> Self {
        self.cell_size = Some(h);
        self
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidProfile(m));
        if !(1..=3).contains(&self.dim) {
            return bad(format!("dimension {} not supported", self.dim));
        }
        let n = self.radii.len();
        if self.volume.len() != n || self.surface.len() != n {
            return bad("column lengths differ".into());
        }
        if let Some(aux) = &self.surface_aux {
            if aux.len() != n {
                return bad("auxiliary column length differs".into());
            }
        }
        if n == 0 {
            return bad("no samples".into());
        }
        if !(self.v0.is_finite() && self.v0 >= 0.0) {
            return bad(format!("v0 = {} must be finite and nonnegative", self.v0));
        }
        for (k, &r) in self.radii.iter().enumerate() {
            if !(r.is_finite() && r > 0.0) {
                return bad(format!("radius {r} at row {k} is not positive"));
            }
            if k > 0 && r <= self.radii[k - 1] {
                return bad(format!("radii not strictly increasing at row {k}"));
            }
        }
        for (k, (&v, &s)) in self.volume.iter().zip(&self.surface).enumerate() {
            if !v.is_finite() || !s.is_finite() {
                return bad(format!("non-finite value at row {k}"));
            }
            if s < 0.0 {
                return bad(format!("negative surface {s} at r = {}", self.radii[k]));
            }
            if k > 0 && v < self.volume[k - 1] * (1.0 - 1e-12) {
                return bad(format!("volume decreases at r = {}", self.radii[k]));
            }
        }
        if let (Source::Grid, Some(h)) = (self.source, self.cell_size) {
            if self.radii[0] < 2.0 * h * (1.0 - 1e-12) {
                return Err(Error::Unresolvable { radius: self.radii[0], floor: 2.0 * h });
            }
        }
        Ok(())
    }

    /// The profile of `λA`: radii scale by λ, V by λ^d, S by λ^(d-1).
    pub fn rescaled(&self, lambda: f64) -> Self {
        let vd = lambda.powi(self.dim as i32);
        let sd = lambda.powi(self.dim as i32 - 1);
        Self {
            dim: self.dim,
            radii: self.radii.iter().map(|r| r * lambda).collect(),
            volume: self.volume.iter().map(|v| v * vd).collect(),
            surface: self.surface.iter().map(|s| s * sd).collect(),
            surface_aux: self.surface_aux.as_ref().map(|a| a.iter().map(|s| s * sd).collect()),
            v0: self.v0 * vd,
            source: self.source,
            cell_size: self.cell_size.map(|h| h * lambda),
        }
    }

    /// Rows with `lo <= r <= hi`.
    pub fn window_indices(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let a = self.radii.partition_point(|&r| r < lo);
        let b = self.radii.partition_point(|&r| r <= hi);
        a..b.max(a)
    }
}

/// `r_min·2^(k/per_octave)` for k = 0, 1, ... up to `r_max`, which is always
/// the last entry.
pub fn geometric_radii(r_min: f64, r_max: f64, per_octave: usize) -> Result<Vec<f64>> {
    if !(r_min.is_finite() && r_max.is_finite() && r_min > 0.0 && r_min < r_max) {
        return Err(Error::InvalidRadii(format!("need 0 < r_min < r_max, got {r_min}, {r_max}")));
    }
    if per_octave == 0 {
        return Err(Error::InvalidRadii("per_octave must be at least 1".into()));
    }
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let r = r_min * (k as f64 / per_octave as f64).exp2();
        if r >= r_max * (1.0 - 1e-9) {
            break;
        }
        out.push(r);
        k += 1;
    }
    out.push(r_max);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radii_endpoints() {
        assert_eq!(geometric_radii(0.1, 0.4, 1).unwrap(), vec![0.1, 0.2, 0.4]);
        let r = geometric_radii(0.1, 0.2, 2).unwrap();
        assert_eq!(r.len(), 3);
        assert!((r[1] - 0.1 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(r[2], 0.2);
        assert!(geometric_radii(0.4, 0.1, 1).is_err());
        assert!(geometric_radii(0.1, 0.4, 0).is_err());
    }

    #[test]
    fn validation() {
        let ok = RadialProfile::new(2, vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 1.0], 0.0, Source::Analytic);
        assert!(ok.is_ok());
        let dec = RadialProfile::new(2, vec![1.0, 2.0], vec![2.0, 1.0], vec![1.0, 1.0], 0.0, Source::Analytic);
        assert!(dec.is_err());
        let neg = RadialProfile::new(2, vec![1.0, 2.0], vec![1.0, 2.0], vec![-1.0, 1.0], 0.0, Source::Analytic);
        assert!(neg.is_err());
        let fine = RadialProfile::raw(2, vec![0.1], vec![1.0], vec![1.0], 0.0, Source::Grid).with_cell_size(0.1);
        assert!(matches!(fine.validate(), Err(Error::Unresolvable { .. })));
    }

    #[test]
    fn window() {
        let p = RadialProfile::raw(2, vec![1.0, 2.0, 3.0, 4.0], vec![0.0; 4], vec![0.0; 4], 0.0, Source::Analytic);
        assert_eq!(p.window_indices(2.0, 3.5), 1..3);
        assert_eq!(p.window_indices(5.0, 6.0), 4..4);
    }
}
