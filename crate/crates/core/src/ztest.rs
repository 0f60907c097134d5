//! Pooled two-sample z-test on gender shares of two cohorts.

use alloc::string::String;
use alloc::vec::Vec;

use crate::gender::Gender;
use crate::normal::phi;

/// Classified gender counts for one follower cohort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenderComposition {
    pub label: String,
    pub male_count: u64,
    pub female_count: u64,
}

impl GenderComposition {
    pub fn new(label: impl Into<String>, male_count: u64, female_count: u64) -> Self {
        GenderComposition { label: label.into(), male_count, female_count }
    }

    pub fn total(&self) -> u64 {
        self.male_count + self.female_count
    }

    pub fn count(&self, gender: Gender) -> u64 {
        match gender {
            Gender::Male => self.male_count,
            Gender::Female => self.female_count,
        }
    }

    /// Share of `gender`; `None` for an empty cohort.
    pub fn share(&self, gender: Gender) -> Option<f64> {
        let n = self.total();
        (n > 0).then(|| self.count(gender) as f64 / n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZTestResult {
    pub z: f64,
    /// Two-sided.
    pub p_value: f64,
    pub p1: f64,
    pub p2: f64,
    pub pooled_p: f64,
    pub n1: u64,
    pub n2: u64,
    pub tested_class: Gender,
}

impl ZTestResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ZTestError {
    #[error("cohort {0:?} is empty")]
    EmptyCohort(String),
    #[error("degenerate test: pooled proportion is {pooled_p}, so every member has the same class")]
    Degenerate { pooled_p: f64 },
    #[error("z must be non-zero to invert the pooled variance")]
    ZeroZ,
    #[error("sample sizes must be positive")]
    EmptySample,
    #[error("no pooled proportion is consistent with these figures (p(1-p) would be {required})")]
    Infeasible { required: f64 },
}

/// Two-sided p-value for a standard normal statistic.
pub fn two_sided_p(z: f64) -> f64 {
    (2.0 * phi(-z.abs())).min(1.0)
}

/// Tests `H0: p_before = p_after` for the share of `tested_class`, with
/// `z = (p2 - p1) / sqrt(p(1 - p)(1/n2 + 1/n1))` and `p` the pooled share.
pub fn two_sample_z(
    before: &GenderComposition,
    after: &GenderComposition,
    tested_class: Gender,
) -> Result<ZTestResult, ZTestError> {
    let (n1, n2) = (before.total(), after.total());
    if n1 == 0 {
        return Err(ZTestError::EmptyCohort(before.label.clone()));
    }
    if n2 == 0 {
        return Err(ZTestError::EmptyCohort(after.label.clone()));
    }
    let (c1, c2) = (before.count(tested_class), after.count(tested_class));
    let p1 = c1 as f64 / n1 as f64;
    let p2 = c2 as f64 / n2 as f64;
    let pooled_p = (c1 + c2) as f64 / (n1 + n2) as f64;
    if c1 + c2 == 0 || c1 + c2 == n1 + n2 {
        return Err(ZTestError::Degenerate { pooled_p });
    }
    let se = libm::sqrt(pooled_p * (1.0 - pooled_p) * (1.0 / n2 as f64 + 1.0 / n1 as f64));
    let z = (p2 - p1) / se;
    Ok(ZTestResult { z, p_value: two_sided_p(z), p1, p2, pooled_p, n1, n2, tested_class })
}

/// Recovers the pooled proportions consistent with a reported share change
/// `delta_p`, statistic `z` and sample sizes: the roots in `(0, 1)` of
/// `p(1 - p) = (delta_p / z)^2 / (1/n1 + 1/n2)`, ascending.
pub fn invert_pooled_variance(delta_p: f64, z: f64, n1: u64, n2: u64) -> Result<Vec<f64>, ZTestError> {
    if z == 0.0 {
        return Err(ZTestError::ZeroZ);
    }
    if n1 == 0 || n2 == 0 {
        return Err(ZTestError::EmptySample);
    }
    let ratio = delta_p / z;
    let required = ratio * ratio / (1.0 / n1 as f64 + 1.0 / n2 as f64);
    let discriminant = 1.0 - 4.0 * required;
    if discriminant < 0.0 {
        return Err(ZTestError::Infeasible { required });
    }
    let root = libm::sqrt(discriminant);
    let mut roots = Vec::with_capacity(2);
    for p in [0.5 * (1.0 - root), 0.5 * (1.0 + root)] {
        if p > 0.0 && p < 1.0 && roots.last() != Some(&p) {
            roots.push(p);
        }
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comp(male: u64, total: u64) -> GenderComposition {
        GenderComposition::new("c", male, total - male)
    }

    #[test]
    fn sanders_trump_statistic() {
        let r = two_sample_z(&comp(20_012, 40_088), &comp(22_388, 34_921), Gender::Male).unwrap();
        assert!((r.z - 39.10).abs() <= 0.10, "z = {}", r.z);
        assert!(r.p_value < 1e-10);
        assert_eq!((r.n1, r.n2), (40_088, 34_921));
    }

    #[test]
    fn identical_compositions() {
        let r = two_sample_z(&comp(30, 100), &comp(30, 100), Gender::Male).unwrap();
        assert_eq!(r.z, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn hand_evaluated_example() {
        // pooled 0.4: z = 0.2 / sqrt(0.24 * 0.02)
        let r = two_sample_z(&comp(30, 100), &comp(50, 100), Gender::Male).unwrap();
        assert!((r.pooled_p - 0.4).abs() < 1e-15);
        assert!((r.z - 2.886_751_345_948_129).abs() < 1e-12);
        assert!((r.p_value - 0.0039).abs() < 5e-5);
    }

    #[test]
    fn degenerate_and_empty() {
        assert!(matches!(
            two_sample_z(&comp(10, 10), &comp(5, 5), Gender::Male),
            Err(ZTestError::Degenerate { .. })
        ));
        assert!(matches!(
            two_sample_z(&comp(0, 10), &comp(0, 5), Gender::Male),
            Err(ZTestError::Degenerate { .. })
        ));
        assert!(matches!(
            two_sample_z(&comp(0, 0), &comp(1, 5), Gender::Male),
            Err(ZTestError::EmptyCohort(_))
        ));
    }

    #[test]
    fn invert_reported_clinton_figures() {
        // (0.016 / 2.597)^2 / (1/14504 + 1/11147) = 0.239242...; roots of
        // p^2 - p + 0.239242 = 0, worked out independently.
        let roots = invert_pooled_variance(0.016, 2.597, 14_504, 11_147).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - 0.396_279_574_831_331).abs() < 1e-9, "{roots:?}");
        assert!((roots[1] - 0.603_720_425_168_669).abs() < 1e-9);
    }

    #[test]
    fn invert_roundtrip() {
        let (n1, n2) = (1_000u64, 3_000u64);
        let pooled = 0.3;
        let z = 2.5;
        let delta = z * libm::sqrt(pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64));
        let roots = invert_pooled_variance(delta, z, n1, n2).unwrap();
        assert!((roots[0] - pooled).abs() < 1e-9);
        assert!((roots[1] - (1.0 - pooled)).abs() < 1e-9);
    }

    #[test]
    fn invert_infeasible_and_invalid() {
        assert!(matches!(invert_pooled_variance(0.5, 1e-3, 100, 100), Err(ZTestError::Infeasible { .. })));
        assert_eq!(invert_pooled_variance(0.1, 0.0, 100, 100), Err(ZTestError::ZeroZ));
    }
}
