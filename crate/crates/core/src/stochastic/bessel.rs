//! Bessel functions `J_ν, Y_ν` for `ν ∈ {0, 1/2}`.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this argument the power series is used for `ν = 0`; above
/// `HANKEL_FROM` the asymptotic expansion; Miller's recurrence in between.
const SERIES_UP_TO: f64 = 2.0;
const HANKEL_FROM: f64 = 25.0;

fn order(nu: f64) -> Result<bool> {
    if nu == 0.0 {
        Ok(false)
    } else if nu == 0.5 {
        Ok(true)
    } else {
        Err(Error::UnsupportedOrder(nu))
    }
}

/// `(J_ν(y), Y_ν(y))` for `y > 0`.
pub fn bessel_jy(nu: f64, y: f64) -> Result<(f64, f64)> {
    let half = order(nu)?;
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::InvalidParameter(format!("Bessel argument must be positive, got {y}")));
    }
    if half {
        let a = (2.0 / (PI * y)).sqrt();
        return Ok((a * y.sin(), -a * y.cos()));
    }
    Ok(if y <= SERIES_UP_TO {
        series0(y)
    } else if y < HANKEL_FROM {
        miller0(y)
    } else {
        let (p, q) = hankel_pq(y);
        let (s, c) = (y - FRAC_PI_4).sin_cos();
        let a = (2.0 / (PI * y)).sqrt();
        (a * (p * c - q * s), a * (p * s + q * c))
    })
}

/// `J_ν(y)² + Y_ν(y)²`, without cancellation for large `y`.
pub fn bessel_modulus_sq(nu: f64, y: f64) -> Result<f64> {
    let half = order(nu)?;
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::InvalidParameter(format!("Bessel argument must be positive, got {y}")));
    }
    if half {
        return Ok(2.0 / (PI * y));
    }
    if y >= HANKEL_FROM {
        let (p, q) = hankel_pq(y);
        return Ok(2.0 / (PI * y) * (p * p + q * q));
    }
    let (j, yy) = bessel_jy(0.0, y)?;
    Ok(j * j + yy * yy)
}

/// `J_0 = Σ (−1)^k (y²/4)^k / (k!)²`,
/// `Y_0 = (2/π)[(ln(y/2) + γ) J_0 + Σ_{k≥1} (−1)^{k+1} H_k (y²/4)^k / (k!)²]`.
fn series0(y: f64) -> (f64, f64) {
    let q = 0.25 * y * y;
    let mut term = 1.0;
    let mut j = 1.0;
    let mut tail = 0.0;
    let mut harmonic = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        harmonic += 1.0 / kf;
        j += term;
        tail -= harmonic * term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    (j, 2.0 / PI * (((0.5 * y).ln() + EULER_GAMMA) * j + tail))
}

/// Backward recurrence `J_{k−1} = (2k/y) J_k − J_{k+1}` from an even start,
/// normalized by `J_0 + 2 Σ J_{2k} = 1`; Neumann's series then gives
/// `Y_0 = (2/π)[(ln(y/2) + γ) J_0 − 2 Σ_{k≥1} (−1)^k J_{2k} / k]`.
fn miller0(y: f64) -> (f64, f64) {
    let mut top = (y + 12.0 * y.cbrt() + 30.0) as usize;
    top += top % 2;
    let (mut next, mut cur) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    let mut neumann = 0.0;
    let mut k = top;
    while k > 0 {
        let prev = 2.0 * k as f64 / y * cur - next;
        next = cur;
        cur = prev;
        k -= 1;
        // `cur` now holds J_k (unnormalized).
        if k.is_multiple_of(2) && k > 0 {
            norm += 2.0 * cur;
            let m = (k / 2) as f64;
            let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
            neumann += sign * cur / m;
        }
        if cur.abs() > 1e250 {
            let s = 1e-250;
            cur *= s;
            next *= s;
            norm *= s;
            neumann *= s;
        }
    }
    norm += cur;
    let j0 = cur / norm;
    let sum = neumann / norm;
    (j0, 2.0 / PI * (((0.5 * y).ln() + EULER_GAMMA) * j0 - 2.0 * sum))
}

/// Hankel's `P_0, Q_0`, summed until the terms stop decreasing.
fn hankel_pq(y: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        a *= -(odd * odd) / (k as f64 * 8.0 * y);
        if a.abs() >= last || a.abs() < 1e-18 {
            break;
        }
        last = a.abs();
        // a_k / y^k with alternating signs folded in: P takes even k with
        // sign (−1)^(k/2), Q odd k with sign (−1)^((k−1)/2).
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
    }
    (p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference values to 18 digits from an independent arbitrary-precision
    /// evaluation.
    const TABLE: [(f64, f64, f64); 9] = [
        (0.1, 0.997_501_562_066_04, -1.534_238_651_350_366_7),
        (0.5, 0.938_469_807_240_812_9, -0.444_518_733_506_706_56),
        (1.0, 0.765_197_686_557_966_6, 0.088_256_964_215_676_96),
        (2.0, 0.223_890_779_141_235_67, 0.510_375_672_649_745_1),
        (5.0, -0.177_596_771_314_338_3, -0.308_517_625_249_033_76),
        (10.0, -0.245_935_764_451_348_35, 0.055_671_167_283_599_395),
        (20.0, 0.167_024_664_340_583_16, 0.062_640_596_809_383_83),
        (30.0, -0.086_367_983_581_040_21, -0.117_295_731_686_664_03),
        (50.0, 0.055_812_327_669_251_816, -0.098_064_995_470_077_08),
    ];

    #[test]
    fn order_zero_table() {
        for (y, j, yy) in TABLE {
            let (a, b) = bessel_jy(0.0, y).unwrap();
            let m = (j * j + yy * yy).sqrt();
            assert!((a - j).abs() <= 1e-10 * m, "J0({y}) = {a}, want {j}");
            assert!((b - yy).abs() <= 1e-10 * m, "Y0({y}) = {b}, want {yy}");
        }
    }

    #[test]
    fn regimes_agree_at_switch_points() {
        for y in [SERIES_UP_TO, HANKEL_FROM] {
            let lo = if y == SERIES_UP_TO { series0(y) } else { miller0(y) };
            let (p, q) = hankel_pq(y);
            let hi = if y == SERIES_UP_TO {
                miller0(y)
            } else {
                let (s, c) = (y - FRAC_PI_4).sin_cos();
                let a = (2.0 / (PI * y)).sqrt();
                (a * (p * c - q * s), a * (p * s + q * c))
            };
            assert!((lo.0 - hi.0).abs() < 1e-13, "{y}: {lo:?} {hi:?}");
            assert!((lo.1 - hi.1).abs() < 1e-13, "{y}: {lo:?} {hi:?}");
        }
    }

    #[test]
    fn small_argument_limits() {
        let (j, y) = bessel_jy(0.0, 1e-12).unwrap();
        assert!((j - 1.0).abs() < 1e-15);
        let want = 2.0 / PI * ((0.5e-12f64).ln() + EULER_GAMMA);
        assert!((y - want).abs() < 1e-13 * want.abs());
    }

    #[test]
    fn half_order_modulus() {
        for y in [1e-3, 0.7, 3.0, 40.0] {
            let (j, yy) = bessel_jy(0.5, y).unwrap();
            assert!(((j * j + yy * yy) / (2.0 / (PI * y)) - 1.0).abs() < 1e-14);
            assert_eq!(bessel_modulus_sq(0.5, y).unwrap(), 2.0 / (PI * y));
        }
    }

    #[test]
    fn modulus_matches_components() {
        for y in [0.3, 3.0, 24.0, 26.0, 45.0] {
            let (j, yy) = bessel_jy(0.0, y).unwrap();
            let m = bessel_modulus_sq(0.0, y).unwrap();
            assert!((m - (j * j + yy * yy)).abs() < 1e-13 * m);
        }
    }

    #[test]
    fn unsupported_order() {
        assert!(matches!(bessel_jy(1.0, 1.0), Err(Error::UnsupportedOrder(_))));
        assert!(bessel_jy(0.0, 0.0).is_err());
    }
}
