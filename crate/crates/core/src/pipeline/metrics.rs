//! PSNR and Bjøntegaard delta rate.

use nalgebra::{DMatrix, DVector};

use super::image::Image;
use crate::error::{Error, Result};

/// Returned for identical images.
pub const PSNR_CAP_DB: f64 = 100.0;

pub fn psnr(a: &Image<u8>, b: &Image<u8>) -> Result<f64> {
    a.same_dims(b)?;
    if a.data().is_empty() {
        return Err(Error::DimensionMismatch("empty images".into()));
    }
    let sse: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum();
    if sse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    let mse = sse / a.data().len() as f64;
    Ok((10.0 * (255.0 * 255.0 / mse).log10()).min(PSNR_CAP_DB))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RdPoint {
    /// Total bits.
    pub rate: f64,
    /// PSNR in dB.
    pub quality: f64,
}

fn check_curve(curve: &[RdPoint]) -> Result<()> {
    if curve.len() < 2 {
        return Err(Error::InvalidCurve(format!("need at least 2 points, got {}", curve.len())));
    }
    for p in curve {
        if !(p.rate > 0.0 && p.rate.is_finite() && p.quality.is_finite()) {
            return Err(Error::InvalidCurve(format!("bad point rate={} quality={}", p.rate, p.quality)));
        }
    }
    Ok(())
}

/// Least-squares coefficients of `log10(rate)` as a polynomial in quality,
/// lowest order first. Quality is centred at `q0` for conditioning.
fn fit(curve: &[RdPoint], degree: usize, q0: f64) -> Result<DVector<f64>> {
    let a = DMatrix::from_fn(curve.len(), degree + 1, |i, j| (curve[i].quality - q0).powi(j as i32));
    let b = DVector::from_iterator(curve.len(), curve.iter().map(|p| p.rate.log10()));
    a.svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| Error::InvalidCurve(e.to_string()))
}

fn integral(coef: &DVector<f64>, lo: f64, hi: f64) -> f64 {
    coef.iter()
        .enumerate()
        .map(|(j, c)| {
            let k = (j + 1) as i32;
            c * (hi.powi(k) - lo.powi(k)) / f64::from(k)
        })
        .sum()
}

/// Average rate difference of `test` against `anchor` at equal quality, in
/// percent. Negative means `test` needs fewer bits.
pub fn bd_rate(anchor: &[RdPoint], test: &[RdPoint]) -> Result<f64> {
    check_curve(anchor)?;
    check_curve(test)?;
    let range = |c: &[RdPoint]| {
        c.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.quality), hi.max(p.quality)))
    };
    let (alo, ahi) = range(anchor);
    let (tlo, thi) = range(test);
    let lo = alo.max(tlo);
    let hi = ahi.min(thi);
    if hi <= lo {
        return Err(Error::NoQualityOverlap);
    }
    let q0 = 0.5 * (lo + hi);
    let fa = fit(anchor, 3.min(anchor.len() - 1), q0)?;
    let ft = fit(test, 3.min(test.len() - 1), q0)?;
    let diff = (integral(&ft, lo - q0, hi - q0) - integral(&fa, lo - q0, hi - q0)) / (hi - lo);
    Ok((10f64.powf(diff) - 1.0) * 100.0)
}
