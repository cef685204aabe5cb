//! Special functions and fundamental solutions for the Helmholtz operator.
//!
//! The outgoing Green function of `-Δ - k²` is
//!
//! ```text
//! Φ(x,y) = (i/4)·H₀⁽¹⁾(k|x-y|)        (d = 2)
//! Φ(x,y) = e^{ik|x-y|} / (4π|x-y|)    (d = 3)
//! ```
//!
//! so the 2-D case needs `J₀` and `Y₀`. Both are evaluated from scratch:
//! the ascending power series up to `x = 12` and the Hankel asymptotic
//! expansion beyond, which keeps the relative error near 1e-11 over the
//! whole working range without minimax tables.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Crossover between the ascending series and the asymptotic expansion.
const SERIES_CUTOFF: f64 = 12.0;

/// Spatial dimension; closed-form kernels exist only for 2 and 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn value(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    /// Surface measure of the unit sphere S^{d-1}.
    pub fn sphere_measure(self) -> f64 {
        match self {
            Dim::Two => 2.0 * std::f64::consts::PI,
            Dim::Three => 4.0 * std::f64::consts::PI,
        }
    }

    /// Volume of the unit ball B_1.
    pub fn ball_volume(self) -> f64 {
        match self {
            Dim::Two => std::f64::consts::PI,
            Dim::Three => 4.0 * std::f64::consts::PI / 3.0,
        }
    }
}

impl TryFrom<u8> for Dim {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            other => Err(format!("dimension must be 2 or 3, got {other}")),
        }
    }
}

impl From<Dim> for u8 {
    fn from(d: Dim) -> u8 {
        d.value() as u8
    }
}

/// Wavenumber and dimension shared by every operator in the pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveContext {
    pub k: f64,
    pub dim: Dim,
}

impl WaveContext {
    pub fn new(k: f64, dim: Dim) -> Result<Self> {
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::Domain(format!("wavenumber must be positive and finite, got {k}")));
        }
        Ok(WaveContext { k, dim })
    }
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("bessel_j0 needs finite x >= 0, got {x}")));
    }
    if x <= SERIES_CUTOFF {
        Ok(j0_series(x))
    } else {
        Ok(hankel0_asymptotic(x).re)
    }
}

/// Bessel function of the second kind, order zero.
pub fn bessel_y0(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("bessel_y0 needs finite x > 0, got {x}")));
    }
    if x <= SERIES_CUTOFF {
        Ok(y0_series(x))
    } else {
        Ok(hankel0_asymptotic(x).im)
    }
}

/// Hankel function of the first kind, order zero: `H₀⁽¹⁾(x) = J₀(x) + i·Y₀(x)`.
pub fn hankel0(x: f64) -> Result<Complex64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("hankel0 needs finite x > 0, got {x}")));
    }
    if x <= SERIES_CUTOFF {
        Ok(Complex64::new(j0_series(x), y0_series(x)))
    } else {
        Ok(hankel0_asymptotic(x))
    }
}

/// Ascending series Σ (-1)^m (x/2)^{2m} / (m!)², compensated summation.
fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut comp = 0.0f64;
    for m in 1..200 {
        term *= -q / ((m * m) as f64);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    sum
}

/// Y₀ by its ascending series: (2/π)[(ln(x/2)+γ)J₀(x) + Σ (-1)^{m+1} H_m (x²/4)^m/(m!)²].
fn y0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0f64; // (x²/4)^m / (m!)², sign folded below
    let mut harmonic = 0.0f64;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut sign = 1.0f64;
    for m in 1..200 {
        term *= q / ((m * m) as f64);
        harmonic += 1.0 / m as f64;
        let contrib = sign * harmonic * term;
        let y = contrib - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if (harmonic * term).abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
        sign = -sign;
    }
    let log_part = ((0.5 * x).ln() + EULER_GAMMA) * j0_series(x);
    std::f64::consts::FRAC_2_PI * (log_part + sum)
}

/// Hankel asymptotic expansion, valid for large argument:
/// `H₀⁽¹⁾(x) ~ sqrt(2/(πx)) e^{i(x-π/4)} Σ_j i^j A_j x^{-j}`,
/// `A_0 = 1`, `A_j = A_{j-1} (μ - (2j-1)²) / (8j)` with `μ = 0`.
/// Truncated at the smallest term; at the crossover the series still
/// carries more than the 6 correction terms needed for 1e-9.
fn hankel0_asymptotic(x: f64) -> Complex64 {
    let mut a = 1.0f64;
    let mut sum = Complex64::new(1.0, 0.0);
    let mut prev = f64::INFINITY;
    for j in 1..=24 {
        let tj = (2 * j - 1) as f64;
        a *= -(tj * tj) / (8.0 * j as f64);
        let mag = (a / x.powi(j as i32)).abs();
        if mag >= prev {
            break;
        }
        prev = mag;
        let ipow = match j % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        sum += ipow * (a / x.powi(j as i32));
        if mag < 1e-18 {
            break;
        }
    }
    let amp = (2.0 / (std::f64::consts::PI * x)).sqrt();
    let phase = Complex64::from_polar(1.0, x - std::f64::consts::FRAC_PI_4);
    amp * phase * sum
}

pub(crate) fn dist(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Outgoing fundamental solution Φ(x,y) of -Δ - k².
pub fn fundamental_solution(x: &[f64], y: &[f64], ctx: &WaveContext) -> Result<Complex64> {
    let r = dist(x, y);
    if r == 0.0 {
        return Err(Error::Singularity);
    }
    kernel_at_distance(r, ctx)
}

/// Φ as a function of the source-target distance.
pub fn kernel_at_distance(r: f64, ctx: &WaveContext) -> Result<Complex64> {
    if r <= 0.0 || !r.is_finite() {
        return Err(Error::Singularity);
    }
    match ctx.dim {
        Dim::Two => Ok(Complex64::new(0.0, 0.25) * hankel0(ctx.k * r)?),
        Dim::Three => {
            let phase = Complex64::from_polar(1.0, ctx.k * r);
            Ok(phase / (4.0 * std::f64::consts::PI * r))
        }
    }
}

/// Far-field normalization constant
/// `C_d = k^{(d-3)/2} e^{-iπ(d-3)/4} / (2^{(d+1)/2} π^{(d-1)/2})`.
pub fn farfield_constant(ctx: &WaveContext) -> Complex64 {
    let d = ctx.dim.value() as f64;
    let kpow = ctx.k.powf(0.5 * (d - 3.0));
    let phase = Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4 * (d - 3.0));
    let denom = 2f64.powf(0.5 * (d + 1.0)) * std::f64::consts::PI.powf(0.5 * (d - 1.0));
    kpow * phase / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn j0_at_zero_is_one() {
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
    }

    #[test]
    fn j0_reference_values() {
        // frozen from the ascending-series oracle summed in double-double
        assert!((bessel_j0(1.0).unwrap() - 0.7651976865579666).abs() < 1e-12);
        assert!((bessel_j0(10.0).unwrap() - (-0.2459357644513483)).abs() < 1e-11);
    }

    #[test]
    fn y0_reference_values() {
        assert!((bessel_y0(1.0).unwrap() - 0.08825696421567696).abs() < 1e-12);
        assert!((bessel_y0(10.0).unwrap() - 0.05567116728359939).abs() < 1e-11);
    }

    #[test]
    fn y0_small_argument_log_behavior() {
        // Y₀(x) - (2/π)(ln(x/2)+γ)J₀(x) -> 0 as x -> 0
        for &x in &[1e-2, 1e-3, 1e-4] {
            let lead = std::f64::consts::FRAC_2_PI
                * ((0.5 * x).ln() + EULER_GAMMA)
                * bessel_j0(x).unwrap();
            let resid = (bessel_y0(x).unwrap() - lead).abs();
            assert!(resid < x * x, "x={x}: resid={resid}");
        }
    }

    #[test]
    fn hankel_large_argument_leading_asymptotic() {
        let x = 50.0;
        let h = hankel0(x).unwrap();
        let lead = (2.0 / (PI * x)).sqrt() * Complex64::from_polar(1.0, x - PI / 4.0);
        assert!((h - lead).norm() / lead.norm() < 0.01);
    }

    #[test]
    fn hankel_imag_is_y0() {
        for &x in &[0.3, 1.0, 7.0, 12.0, 13.0, 40.0] {
            assert_eq!(hankel0(x).unwrap().im, bessel_y0(x).unwrap());
            assert_eq!(hankel0(x).unwrap().re, bessel_j0(x).unwrap());
        }
    }

    #[test]
    fn series_asymptotic_crossover_is_smooth() {
        // both branches agree near the cutoff to ~1e-11
        for &x in &[11.9, 12.0, 12.1] {
            let s = Complex64::new(j0_series(x), y0_series(x));
            let a = hankel0_asymptotic(x);
            assert!((s - a).norm() < 2e-11, "x={x}: {:?} vs {:?}", s, a);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_j0(-1.0).is_err());
        assert!(bessel_j0(f64::NAN).is_err());
        assert!(bessel_y0(0.0).is_err());
        assert!(bessel_y0(-2.0).is_err());
        assert!(hankel0(0.0).is_err());
    }

    #[test]
    fn fundamental_solution_d3() {
        let ctx = WaveContext::new(1.0, Dim::Three).unwrap();
        let phi = fundamental_solution(&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &ctx).unwrap();
        let expect = Complex64::new(1f64.cos(), 1f64.sin()) / (4.0 * PI);
        assert!((phi - expect).norm() < 1e-15);
        // |Φ| = 1/(4π|x-y|) independent of k
        for &k in &[0.5, 2.0, 7.0] {
            let c = WaveContext::new(k, Dim::Three).unwrap();
            let p = fundamental_solution(&[0.0; 3], &[0.0, 2.0, 0.0], &c).unwrap();
            assert!((p.norm() - 1.0 / (8.0 * PI)).abs() < 1e-15);
        }
    }

    #[test]
    fn fundamental_solution_d2() {
        let ctx = WaveContext::new(1.0, Dim::Two).unwrap();
        let phi = fundamental_solution(&[0.0, 0.0], &[1.0, 0.0], &ctx).unwrap();
        let expect = Complex64::new(0.0, 0.25) * hankel0(1.0).unwrap();
        assert_eq!(phi, expect);
        assert!((phi.re - (-0.25 * 0.08825696421567696)).abs() < 1e-12);
        assert!((phi.im - 0.25 * 0.7651976865579666).abs() < 1e-12);
    }

    #[test]
    fn singularity_is_an_error() {
        let ctx = WaveContext::new(1.0, Dim::Two).unwrap();
        assert!(matches!(
            fundamental_solution(&[0.5, 0.5], &[0.5, 0.5], &ctx),
            Err(Error::Singularity)
        ));
    }

    #[test]
    fn farfield_constant_d3() {
        for &k in &[0.5, 1.0, 4.0] {
            let ctx = WaveContext::new(k, Dim::Three).unwrap();
            let c = farfield_constant(&ctx);
            assert!((c - Complex64::new(1.0 / (4.0 * PI), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn farfield_constant_d2() {
        let ctx = WaveContext::new(1.0, Dim::Two).unwrap();
        let c = farfield_constant(&ctx);
        let expect = Complex64::from_polar(1.0 / (8.0 * PI).sqrt(), PI / 4.0);
        assert!((c - expect).norm() < 1e-15);
        assert!((c.re - 0.141047).abs() < 1e-6);
        assert!((c.im - 0.141047).abs() < 1e-6);
        // |C_2| ~ k^{-1/2}
        let c4 = farfield_constant(&WaveContext::new(4.0, Dim::Two).unwrap());
        assert!((c4.norm() / c.norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn wave_context_rejects_bad_k() {
        assert!(WaveContext::new(0.0, Dim::Two).is_err());
        assert!(WaveContext::new(-1.0, Dim::Three).is_err());
        assert!(WaveContext::new(f64::INFINITY, Dim::Two).is_err());
    }
}
