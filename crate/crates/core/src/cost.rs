//! Probability, distortion and rate tables of a pixel, and the group cost
//! functionals built from them.
//!
//! Group functions take the pixel tables in group order (increasing coded
//! depth, winner last) and a depth change per pixel. A change outside a
//! pixel's candidate set is a caller bug and panics.

use crate::allowable::AllowableInterval;
use crate::error::{Error, Result};
use crate::geometry::CameraConfig;
use crate::occlusion::{OcclusionGroup, PixelCandidate};

/// Probability mass over a candidate interval.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityTable {
    lo: i32,
    masses: Vec<f64>,
}

impl ProbabilityTable {
    pub fn from_masses(lo: i32, masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        Ok(ProbabilityTable { lo, masses })
    }

    pub fn uniform(candidates: AllowableInterval) -> Self {
        let n = candidates.len();
        ProbabilityTable {
            lo: candidates.lo(),
            masses: vec![1.0 / n as f64; n],
        }
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, dv: i32) -> f64 {
        usize::try_from(dv - self.lo)
            .ok()
            .and_then(|i| self.masses.get(i).copied())
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.masses.iter().enumerate().map(|(i, &m)| (self.lo + i as i32, m))
    }
}

/// Discretized Gaussian centred at `mu`, normalized over `candidates`.
/// `sigma = inf` gives the uniform table.
pub fn probability_table(
    candidates: AllowableInterval,
    sigma: f64,
    mu: i32,
) -> Result<ProbabilityTable> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidSigma(sigma));
    }
    if sigma.is_infinite() {
        return Ok(ProbabilityTable::uniform(candidates));
    }
    let exponent = |dv: i32| {
        let d = f64::from(dv - mu);
        -d * d / (2.0 * sigma * sigma)
    };
    // Exponents are shifted by their maximum.
    let peak = candidates.iter().map(exponent).fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = candidates.iter().map(|dv| (exponent(dv) - peak).exp()).collect();
    let total: f64 = weights.iter().sum();
    Ok(ProbabilityTable {
        lo: candidates.lo(),
        masses: weights.into_iter().map(|w| w / total).collect(),
    })
}

/// Geometry distortion `weight * p^2`, with `p` the rendering position
/// error in pel. Constant over the candidate set by construction.
pub fn distortion_table(pixel: &PixelCandidate, cfg: &CameraConfig) -> Vec<f64> {
    pixel
        .candidates
        .iter()
        .map(|dv| {
            let p = cfg
                .disparity_error(pixel.v, dv)
                .expect("candidate sets stay inside the level range")
                .to_f64()
                .abs();
            pixel.weight * p * p
        })
        .collect()
}

/// Bits spent on a coded level given a predictor.
pub trait RateModel: Sync {
    fn bits(&self, level: i32, predictor: i32) -> f64;
}

/// `log2(1 + |level - predictor|)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct LogResidualRate;

impl RateModel for LogResidualRate {
    fn bits(&self, level: i32, predictor: i32) -> f64 {
        f64::from((level - predictor).unsigned_abs() + 1).log2()
    }
}

pub fn rate_table_with(
    pixel: &PixelCandidate,
    predictor: i32,
    model: &dyn RateModel,
) -> Vec<f64> {
    let v = pixel.v.value();
    pixel.candidates.iter().map(|dv| model.bits(v + dv, predictor)).collect()
}

/// Rate table under [`LogResidualRate`].
pub fn rate_table(pixel: &PixelCandidate, predictor: i32) -> Vec<f64> {
    rate_table_with(pixel, predictor, &LogResidualRate)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LagrangianParams {
    pub lambda: f64,
    /// Spread of the depth-error distribution; `inf` means uniform.
    pub sigma: f64,
}

/// Everything the optimizer needs about one pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelTables {
    /// Uncompressed level, used for the depth-order constraints.
    pub v: i32,
    pub dv_k: i32,
    pub candidates: AllowableInterval,
    pub prob: ProbabilityTable,
    pub distortion: Vec<f64>,
    pub rate: Vec<f64>,
}

impl PixelTables {
    pub fn new(
        v: i32,
        dv_k: i32,
        candidates: AllowableInterval,
        prob: ProbabilityTable,
        distortion: Vec<f64>,
        rate: Vec<f64>,
    ) -> Result<Self> {
        let n = candidates.len();
        if prob.lo() != candidates.lo() || prob.masses().len() != n {
            return Err(Error::InvalidVector("probability table does not match candidates".into()));
        }
        if distortion.len() != n || rate.len() != n {
            return Err(Error::InvalidVector("table lengths do not match candidates".into()));
        }
        if !candidates.contains(dv_k) {
            return Err(Error::InvalidVector(format!(
                "initial error {dv_k} lies outside {candidates}"
            )));
        }
        Ok(PixelTables {
            v,
            dv_k,
            candidates,
            prob,
            distortion,
            rate,
        })
    }

    /// Tables of a pixel under the Gaussian model centred at its initial
    /// error and the default rate model.
    pub fn build(
        pixel: &PixelCandidate,
        cfg: &CameraConfig,
        sigma: f64,
        predictor: i32,
    ) -> Result<Self> {
        Self::build_with(pixel, cfg, sigma, predictor, &LogResidualRate)
    }

    pub fn build_with(
        pixel: &PixelCandidate,
        cfg: &CameraConfig,
        sigma: f64,
        predictor: i32,
        model: &dyn RateModel,
    ) -> Result<Self> {
        Ok(PixelTables {
            v: pixel.v.value(),
            dv_k: pixel.dv_k,
            candidates: pixel.candidates,
            prob: probability_table(pixel.candidates, sigma, pixel.dv_k)?,
            distortion: distortion_table(pixel, cfg),
            rate: rate_table_with(pixel, predictor, model),
        })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, dv: i32) -> usize {
        assert!(
            self.candidates.contains(dv),
            "depth change {dv} lies outside {}",
            self.candidates
        );
        (dv - self.candidates.lo()) as usize
    }

    pub fn p(&self, dv: i32) -> f64 {
        self.prob.masses()[self.index(dv)]
    }

    pub fn d(&self, dv: i32) -> f64 {
        self.distortion[self.index(dv)]
    }

    pub fn r(&self, dv: i32) -> f64 {
        self.rate[self.index(dv)]
    }

    pub fn states(&self) -> impl Iterator<Item = i32> {
        self.candidates.iter()
    }
}

/// Tables of every pixel of `group`; `predictor(pixel)` supplies the rate
/// predictor.
pub fn group_tables(
    group: &OcclusionGroup,
    cfg: &CameraConfig,
    sigma: f64,
    mut predictor: impl FnMut(&PixelCandidate) -> i32,
) -> Result<Vec<PixelTables>> {
    group
        .pixels()
        .iter()
        .map(|p| PixelTables::build(p, cfg, sigma, predictor(p)))
        .collect()
}

/// Mass of the event `v + dv < bound` (strict) or `v + dv <= bound`.
pub fn constrained_mass(table: &PixelTables, bound: i32, strict: bool) -> f64 {
    table
        .prob
        .iter()
        .filter(|&(dv, _)| {
            let level = table.v + dv;
            if strict {
                level < bound
            } else {
                level <= bound
            }
        })
        .map(|(_, m)| m)
        .sum()
}

/// Expected synthesis distortion of pixel `j` choosing `dv_j`: its own mass,
/// times the probability that every earlier pixel stays strictly below and
/// every later pixel stays at or below its level, times its distortion.
pub fn expected_pixel_distortion(tables: &[PixelTables], j: usize, dv_j: i32) -> f64 {
    let own = &tables[j];
    let level = own.v + dv_j;
    let before: f64 = tables[..j].iter().map(|t| constrained_mass(t, level, true)).product();
    let after: f64 = tables[j + 1..].iter().map(|t| constrained_mass(t, level, false)).product();
    own.p(dv_j) * before * after * own.d(dv_j)
}

fn check_len(tables: &[PixelTables], dv: &[i32]) {
    assert_eq!(tables.len(), dv.len(), "one depth change per group pixel");
}

/// `sum_z (prod_{j<=z} P(dv_j)) * d_z(dv_z)`.
pub fn group_distortion(tables: &[PixelTables], dv: &[i32]) -> f64 {
    check_len(tables, dv);
    let mut prefix = 1.0;
    let mut total = 0.0;
    for (t, &d) in tables.iter().zip(dv) {
        prefix *= t.p(d);
        total += prefix * t.d(d);
    }
    total
}

pub fn group_rate(tables: &[PixelTables], dv: &[i32]) -> f64 {
    check_len(tables, dv);
    tables.iter().zip(dv).map(|(t, &d)| t.r(d)).sum()
}

/// Order-free group cost: prefix-product distortion plus `lambda` times
/// the total rate.
pub fn group_cost(tables: &[PixelTables], dv: &[i32], lambda: f64) -> f64 {
    group_distortion(tables, dv) + lambda * group_rate(tables, dv)
}

/// Group cost with the depth-order constraints kept: each mass after the
/// first counts only when its pixel stays above its predecessor (at or
/// above for the pixels in between, strictly above for the pixel being
/// charged), and is zero otherwise.
pub fn group_cost_constrained(tables: &[PixelTables], dv: &[i32], lambda: f64) -> f64 {
    check_len(tables, dv);
    let level = |z: usize| tables[z].v + dv[z];
    let gated = |z: usize, strict: bool| {
        let ok = if strict {
            level(z - 1) < level(z)
        } else {
            level(z - 1) <= level(z)
        };
        if ok {
            tables[z].p(dv[z])
        } else {
            0.0
        }
    };
    let mut distortion = 0.0;
    // Running product of P(dv_1) and the non-strict factors of 2..z-1.
    let mut chain = 1.0;
    for z in 0..tables.len() {
        let charged = if z == 0 {
            tables[0].p(dv[0])
        } else {
            chain * gated(z, true)
        };
        distortion += charged * tables[z].d(dv[z]);
        chain *= if z == 0 { tables[0].p(dv[0]) } else { gated(z, false) };
    }
    distortion + lambda * group_rate(tables, dv)
}


#[cfg(test)]
mod tests {
    use super::fixtures::dp_fix;
    use super::*;
    use crate::geometry::DepthLevel;
    use crate::pipeline::presets;

    fn iv(lo: i32, hi: i32) -> AllowableInterval {
        AllowableInterval::new(lo, hi).unwrap()
    }

    #[test]
    fn uniform_table() {
        let t = probability_table(iv(-2, 2), f64::INFINITY, 0).unwrap();
        assert!(t.masses().iter().all(|&m| (m - 0.2).abs() < 1e-15));
    }

    #[test]
    fn gaussian_table() {
        let t = probability_table(iv(-1, 1), 1.0, 0).unwrap();
        let expected = 1.0 / (1.0 + 2.0 * (-0.5f64).exp());
        assert!((t.mass(0) - expected).abs() < 1e-12);
        assert!((t.mass(0) - 0.45186).abs() < 1e-5);
        assert!((t.masses().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singleton_and_bad_sigma() {
        let t = probability_table(iv(5, 5), 0.7, 0).unwrap();
        assert_eq!(t.mass(5), 1.0);
        assert!(probability_table(iv(0, 1), 0.0, 0).is_err());
        assert!(probability_table(iv(0, 1), -1.0, 0).is_err());
        assert!(probability_table(iv(0, 1), f64::NAN, 0).is_err());
        assert!(ProbabilityTable::from_masses(0, vec![]).is_err());
    }

    #[test]
    fn far_centre_does_not_underflow() {
        let t = probability_table(iv(0, 3), 0.01, 200).unwrap();
        assert!((t.masses().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(t.mass(3), 1.0);
    }

    #[test]
    fn distortion_examples() {
        let cfg = presets::canonical_half_pel();
        let v = DepthLevel::new(10).unwrap();
        let zero = PixelCandidate::new(0, 0, v, 0, 3.0, &cfg).unwrap();
        assert!(distortion_table(&zero, &cfg).iter().all(|&d| d == 0.0));

        let p = PixelCandidate::new(0, 0, v, 5, 1.0, &cfg).unwrap();
        assert_eq!(p.candidates, iv(3, 7));
        assert_eq!(distortion_table(&p, &cfg), vec![0.25; 5]);
        let p4 = PixelCandidate { weight: 4.0, ..p };
        assert_eq!(distortion_table(&p4, &cfg), vec![1.0; 5]);
    }

    #[test]
    fn rate_examples() {
        let m = LogResidualRate;
        assert_eq!(m.bits(40, 40), 0.0);
        assert_eq!(m.bits(41, 40), 1.0);
        assert_eq!(m.bits(33, 40), 3.0);
        let cfg = presets::canonical_half_pel();
        let p = PixelCandidate::new(0, 0, DepthLevel::new(10).unwrap(), 0, 1.0, &cfg).unwrap();
        assert_eq!(rate_table(&p, 9), vec![1.0, 0.0, 1.0, 3f64.log2(), 2.0]);
    }

    #[test]
    fn constrained_mass_examples() {
        let c = iv(-2, 2);
        let t = PixelTables::new(10, 0, c, ProbabilityTable::uniform(c), vec![0.0; 5], vec![0.0; 5])
            .unwrap();
        assert_eq!(constrained_mass(&t, 100, true), 1.0);
        assert_eq!(constrained_mass(&t, 0, false), 0.0);
        assert!((constrained_mass(&t, 10, true) - 0.4).abs() < 1e-15);
        assert!((constrained_mass(&t, 10, false) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn expected_distortion_matches_enumeration() {
        let a = iv(-2, 2);
        let b = iv(-1, 1);
        let tables = vec![
            PixelTables::new(10, 0, a, ProbabilityTable::uniform(a), vec![2.0; 5], vec![0.0; 5])
                .unwrap(),
            PixelTables::new(11, 0, b, ProbabilityTable::uniform(b), vec![3.0; 3], vec![0.0; 3])
                .unwrap(),
        ];
        for dv_b in b.iter() {
            let mut brute = 0.0;
            for dv_a in a.iter() {
                if 10 + dv_a < 11 + dv_b {
                    brute += tables[0].p(dv_a) * tables[1].p(dv_b) * 3.0;
                }
            }
            assert!((expected_pixel_distortion(&tables, 1, dv_b) - brute).abs() < 1e-15);
        }
        for dv_a in a.iter() {
            let mut brute = 0.0;
            for dv_b in b.iter() {
                if 11 + dv_b <= 10 + dv_a {
                    brute += tables[0].p(dv_a) * tables[1].p(dv_b) * 2.0;
                }
            }
            assert!((expected_pixel_distortion(&tables, 0, dv_a) - brute).abs() < 1e-15);
        }
    }

    #[test]
    fn expected_distortion_degenerate_cases() {
        let mut tables = dp_fix();
        tables[0].distortion = vec![0.0; 2];
        assert_eq!(expected_pixel_distortion(&tables, 0, -1), 0.0);
        let s = |v: i32, dv: i32, d: f64| {
            let c = AllowableInterval::singleton(dv);
            PixelTables::new(v, dv, c, ProbabilityTable::uniform(c), vec![d], vec![0.0]).unwrap()
        };
        let tables = vec![s(10, 1, 2.0), s(20, 0, 5.0)];
        assert_eq!(expected_pixel_distortion(&tables, 1, 0), 5.0);
    }

    #[test]
    fn dp_fix_costs() {
        let t = dp_fix();
        assert_eq!(group_cost(&t, &[-1, 0], 1.0), 6.0);
        assert_eq!(group_cost(&t, &[-1, 1], 1.0), 8.0);
        assert_eq!(group_cost(&t, &[0, 0], 1.0), 7.0);
        assert_eq!(group_cost(&t, &[0, 1], 1.0), 9.0);
        assert_eq!(group_cost(&t, &[-1, 0], 0.0), 4.0);
        let mut zero = t.clone();
        for p in &mut zero {
            p.distortion.iter_mut().for_each(|d| *d = 0.0);
        }
        assert_eq!(group_cost(&zero, &[0, 1], 2.5), 2.5 * 5.0);
    }

    #[test]
    fn constrained_equals_free_when_ordered() {
        let t = dp_fix();
        for a in -1..=0 {
            for b in 0..=1 {
                assert_eq!(group_cost_constrained(&t, &[a, b], 1.0), group_cost(&t, &[a, b], 1.0));
            }
        }
    }

    #[test]
    fn constrained_drops_violating_terms() {
        // Pixel 2 can dip below pixel 1.
        let a = iv(0, 2);
        let b = iv(-2, 0);
        let t = vec![
            PixelTables::new(10, 0, a, ProbabilityTable::uniform(a), vec![1.0; 3], vec![1.0; 3])
                .unwrap(),
            PixelTables::new(11, 0, b, ProbabilityTable::uniform(b), vec![9.0; 3], vec![1.0; 3])
                .unwrap(),
        ];
        assert!(group_cost_constrained(&t, &[2, -2], 1.0) < group_cost(&t, &[2, -2], 1.0));
        assert_eq!(group_cost_constrained(&t, &[0, 0], 1.0), group_cost(&t, &[0, 0], 1.0));
    }

    #[test]
    fn singleton_constrained_vs_expected_distortion() {
        let s = |v: i32, dv: i32, d: f64, r: f64| {
            let c = AllowableInterval::singleton(dv);
            PixelTables::new(v, dv, c, ProbabilityTable::uniform(c), vec![d], vec![r]).unwrap()
        };
        let t = vec![s(5, 0, 2.0, 1.0), s(9, 1, 3.0, 2.0), s(20, 0, 4.0, 0.5)];
        let dv = [0, 1, 0];
        let expected: f64 = (0..3).map(|j| expected_pixel_distortion(&t, j, dv[j])).sum();
        // With singleton sets only the winner survives the order events.
        assert_eq!(expected, 4.0);
        assert_eq!(group_cost_constrained(&t, &dv, 2.0), 2.0 + 3.0 + 4.0 + 2.0 * 3.5);
    }

    #[test]
    fn additive_in_lambda() {
        let t = dp_fix();
        for lambda in [0.0, 0.3, 1.0, 7.25] {
            let dv = [0, 1];
            assert_eq!(
                group_cost(&t, &dv, lambda),
                group_cost(&t, &dv, 0.0) + lambda * group_rate(&t, &dv)
            );
        }
    }

    #[test]
    #[should_panic]
    fn outside_candidates_panics() {
        group_cost(&dp_fix(), &[5, 0], 1.0);
    }
}
