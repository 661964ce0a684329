//! Key/value camera configuration files.
//!
//! ```text
//! # comments start with '#'
//! focal_length = 1
//! baseline = 1
//! z_near = 1/26
//! z_far = 2
//! precision_n = 2
//! rounding_offset = 0.25   # optional, defaults to 1/(2 * precision_n)
//! ```
//!
//! Numbers are read exactly: decimals (with optional exponent) and `a/b`
//! fractions both become rationals without passing through `f64`.

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use crate::error::{Error, Result};
use crate::geometry::{CameraConfig, CameraParams};

const KEYS: [&str; 6] = [
    "focal_length",
    "baseline",
    "z_near",
    "z_far",
    "precision_n",
    "rounding_offset",
];

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().ok()? };
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(numer);
    if scale >= 0 {
        value *= BigRational::from_integer(Pow::pow(&ten, scale as u32));
    } else {
        value /= BigRational::from_integer(Pow::pow(&ten, (-scale) as u32));
    }
    Some(if negative { -value } else { value })
}

/// Parses `"0.25"`, `"-1.5e-3"`, `"3"` or `"1/26"` into an exact rational.
pub fn parse_exact(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a number: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = parse_decimal(n.trim()).ok_or_else(bad)?;
            let d = parse_decimal(d.trim()).ok_or_else(bad)?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(n / d)
        }
        None => parse_decimal(s).ok_or_else(bad),
    }
}

fn format_exact(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses a configuration file body.
pub fn parse_config(text: &str) -> Result<CameraConfig> {
    let mut values: BTreeMap<&str, &str> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .or_else(|| line.split_once(':'))
            .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Parse(format!("line {}: unknown key {key:?}", lineno + 1)));
        }
        if values.insert(key, value.trim()).is_some() {
            return Err(Error::Parse(format!("line {}: duplicate key {key:?}", lineno + 1)));
        }
    }
    let required = |key: &str| {
        values
            .get(key)
            .ok_or_else(|| Error::Parse(format!("missing key {key:?}")))
            .and_then(|v| parse_exact(v))
    };
    let precision = values
        .get("precision_n")
        .ok_or_else(|| Error::Parse("missing key \"precision_n\"".into()))?
        .parse::<u32>()
        .map_err(|e| Error::Parse(format!("precision_n: {e}")))?;
    CameraConfig::from_params(CameraParams {
        focal_length: required("focal_length")?,
        baseline: required("baseline")?,
        z_near: required("z_near")?,
        z_far: required("z_far")?,
        precision,
        rounding_offset: values.get("rounding_offset").map(|v| parse_exact(v)).transpose()?,
    })
}

pub fn read_config(path: &Path) -> Result<CameraConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Serializes the parameters of `cfg`; [`parse_config`] reads it back exactly.
pub fn format_config(cfg: &CameraConfig) -> String {
    let p = cfg.params();
    let mut out = String::new();
    out.push_str(&format!("focal_length = {}\n", format_exact(&p.focal_length)));
    out.push_str(&format!("baseline = {}\n", format_exact(&p.baseline)));
    out.push_str(&format!("z_near = {}\n", format_exact(&p.z_near)));
    out.push_str(&format!("z_far = {}\n", format_exact(&p.z_far)));
    out.push_str(&format!("precision_n = {}\n", p.precision));
    out.push_str(&format!("rounding_offset = {}\n", format_exact(cfg.offset())));
    out
}
