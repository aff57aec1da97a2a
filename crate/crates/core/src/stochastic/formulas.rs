//! Mean surface area and volume of the Wiener sausage.

use std::f64::consts::PI;

use serde::Serialize;

use super::bessel::{bessel_jy, bessel_modulus_sq};
use super::quadrature::integrate;
use crate::contents::kappa;
use crate::error::{Error, Result};

/// `φ_d(z) = 1 − e^{−z} − 2z e^{−z}/d`.
pub fn phi(d: usize, z: f64) -> f64 {
    let d = d as f64;
    if z < 1.0 {
        // Σ_{k≥1} (−1)^{k+1} (1 − 2k/d) z^k / k!
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..40 {
            term *= z / k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sum += sign * (1.0 - 2.0 * k as f64 / d) * term;
            if term < 1e-18 {
                break;
            }
        }
        sum
    } else {
        -(-z).exp_m1() - 2.0 * z * (-z).exp() / d
    }
}

/// Values entering the surface formula at one Bessel argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SausageFormulaTerms {
    pub d: usize,
    pub nu: f64,
    pub phi: f64,
    pub j: f64,
    pub y: f64,
}

/// Terms of the integrand at Bessel argument `y` for `c = t/(2r²)`.
pub fn formula_terms(d: usize, y: f64, c: f64) -> Result<SausageFormulaTerms> {
    check_dim(d)?;
    let nu = order(d);
    let (j, yy) = bessel_jy(nu, y)?;
    Ok(SausageFormulaTerms { d, nu, phi: phi(d, c * y * y), j, y: yy })
}

fn check_dim(d: usize) -> Result<()> {
    if d == 2 || d == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder((d as f64 - 2.0) / 2.0))
    }
}

fn order(d: usize) -> f64 {
    (d as f64 - 2.0) / 2.0
}

fn check_rt(r: f64, t: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite() && t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("need r > 0 and t > 0, got r = {r}, t = {t}")));
    }
    Ok(())
}

const W_LO: f64 = -80.0;
const W_HI: f64 = 80.0;
const REL_TOL: f64 = 1e-11;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `e^{−w} / M²(y)` with `M² = J_ν² + Y_ν²` and `ln y` given, so that
/// neither tiny nor huge `y` overflows.
fn weight(nu: f64, w: f64, ln_y: f64) -> f64 {
    if nu == 0.5 {
        return 0.5 * PI * (ln_y - w).exp();
    }
    if ln_y < -30.0 {
        // J_0 = 1 and Y_0 = (2/π)(ln(y/2) + γ) up to O(y² ln y).
        let y0 = 2.0 / PI * (ln_y - std::f64::consts::LN_2 + EULER_GAMMA);
        return (-w).exp() / (1.0 + y0 * y0);
    }
    if ln_y > 700.0 {
        return 0.5 * PI * (ln_y - w).exp();
    }
    let y = ln_y.exp();
    if y >= 25.0 {
        // M² = 2(P² + Q²)/(πy).
        let m2y = bessel_modulus_sq(nu, y).expect("positive argument") * y;
        return (ln_y - w).exp() / m2y;
    }
    (-w).exp() / bessel_modulus_sq(nu, y).expect("positive argument")
}

/// `∫_0^∞ φ_d(c y²) / (y³ M²(y)) dy / (c/2)`, as `∫ φ_d(e^w) e^{−w} / M²(y) dw`
/// in `w = ln(c y²)`, for `ln c` given. The range `[−80, 80]` is split at
/// `w = 0` and at `y = 1`; beyond its ends the integrand decays like
/// `e^{w/2}` or faster below and like `e^{−w/2}` above, and both tails are
/// added in that form.
fn scaled_integral(d: usize, lnc: f64) -> f64 {
    let nu = order(d);
    let g = |w: f64| phi(d, w.exp()) * weight(nu, w, 0.5 * (w - lnc));
    let mut cuts = vec![W_LO, 0.0, lnc.clamp(W_LO, W_HI), W_HI];
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            total += integrate(g, w[0], w[1], 0.0, REL_TOL, 400).value;
        }
    }
    total + 2.0 * g(W_HI) + 2.0 * g(W_LO)
}

/// `∫_0^∞ φ_d(c y²) / (y³ (J_ν² + Y_ν²)(y)) dy`, `ν = (d−2)/2`.
pub fn bessel_integral(d: usize, c: f64) -> Result<f64> {
    check_dim(d)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("need c > 0, got {c}")));
    }
    Ok(0.5 * c * scaled_integral(d, c.ln()))
}

/// `r · E H^{d−1}(∂S_{r,t})` from `ln r`:
/// `dκ_d [r^d + (d−2)² t r^{d−2}/2 + (d/π²) t r^{d−2} J]`.
fn surface_times_r(d: usize, ln_r: f64, t: f64) -> f64 {
    let df = d as f64;
    let lnc = t.ln() - std::f64::consts::LN_2 - 2.0 * ln_r;
    let rd2 = ((df - 2.0) * ln_r).exp();
    let kd = df * kappa(df).expect("d is 2 or 3");
    kd * ((df * ln_r).exp() + (df - 2.0).powi(2) * t * rd2 / 2.0 + df / (PI * PI) * t * rd2 * scaled_integral(d, lnc))
}

/// `E H^{d−1}(∂S_{r,t}) = dκ_d r^{d−1}(1 + (d−2)² c + (4d/π²) ∫ …)` with
/// `c = t/(2r²)`, for `d ∈ {2, 3}`.
pub fn mean_sausage_surface(d: usize, r: f64, t: f64) -> Result<f64> {
    check_dim(d)?;
    check_rt(r, t)?;
    Ok(surface_times_r(d, r.ln(), t) / r)
}

/// `E H^d(S_{r,t}) = ∫_0^r E H^{d−1}(∂S_{ρ,t}) dρ`; the path itself has zero
/// volume. For `d = 2` the rate `1/(ρ log²ρ)` at 0 is removed by
/// `ρ = r e^{1 − 1/x}`, under which the integrand tends to `πt`.
pub fn mean_sausage_volume(d: usize, r: f64, t: f64) -> Result<f64> {
    check_dim(d)?;
    check_rt(r, t)?;
    let q = if d == 3 {
        integrate(|rho: f64| if rho > 0.0 { surface_times_r(3, rho.ln(), t) / rho } else { 2.0 * PI * t }, 0.0, r, 0.0, 1e-11, 200)
    } else {
        let lr = r.ln() + 1.0;
        let f = |x: f64| {
            let ln_rho = lr - 1.0 / x;
            if !(ln_rho > -1e100) {
                return PI * t;
            }
            surface_times_r(2, ln_rho, t) / (x * x)
        };
        integrate(f, 0.0, 1.0, 0.0, 1e-11, 200)
    };
    Ok(q.value)
}

/// `4πr² + 2πt + 8r√(2πt)`: the `d = 3` surface formula in closed form.
pub fn mean_surface_closed_form_3d(r: f64, t: f64) -> f64 {
    4.0 * PI * r * r + 2.0 * PI * t + 8.0 * r * (2.0 * PI * t).sqrt()
}

/// `2πtr + 4r²√(2πt) + (4π/3)r³`.
pub fn mean_volume_closed_form_3d(r: f64, t: f64) -> f64 {
    2.0 * PI * t * r + 4.0 * r * r * (2.0 * PI * t).sqrt() + 4.0 * PI / 3.0 * r.powi(3)
}
