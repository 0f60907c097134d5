//! Probit gender-affinity model of following behaviour.
//!
//! An individual of gender `g` follows iff
//! `baseline_g + lambda_g * E + eps > 0` with `eps ~ Normal(0, 1)` and `E`
//! the binary event flag, so `P(follow) = phi(baseline_g + lambda_g * E)`.
//! The baseline is the composite covariate index for that gender.

use crate::gender::Gender;
use crate::normal::{inverse_phi, phi};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinityParams {
    pub baseline_m: f64,
    pub baseline_w: f64,
    /// Event effect on men.
    pub lambda_m: f64,
    /// Event effect on women.
    pub lambda_w: f64,
    /// Prospective male followers before the event.
    pub n_prime_m: u64,
    /// Prospective female followers before the event.
    pub n_prime_w: u64,
    /// Prospective male followers after the event.
    pub n_dprime_m: u64,
    /// Prospective female followers after the event.
    pub n_dprime_w: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AffinityError {
    #[error("parameter {0} must be finite")]
    NonFinite(&'static str),
    #[error("population {0} must be at least 1")]
    EmptyPopulation(&'static str),
    #[error("female follow mass underflows to zero; the gender ratio diverges")]
    DivergentRatio,
}

impl AffinityParams {
    /// Zero baselines, no event effect and equal populations of `n`.
    pub fn neutral(n: u64) -> Self {
        AffinityParams {
            baseline_m: 0.0,
            baseline_w: 0.0,
            lambda_m: 0.0,
            lambda_w: 0.0,
            n_prime_m: n,
            n_prime_w: n,
            n_dprime_m: n,
            n_dprime_w: n,
        }
    }

    pub fn validate(&self) -> Result<(), AffinityError> {
        for (name, v) in [
            ("baseline_m", self.baseline_m),
            ("baseline_w", self.baseline_w),
            ("lambda_m", self.lambda_m),
            ("lambda_w", self.lambda_w),
        ] {
            if !v.is_finite() {
                return Err(AffinityError::NonFinite(name));
            }
        }
        for (name, n) in [
            ("n_prime_m", self.n_prime_m),
            ("n_prime_w", self.n_prime_w),
            ("n_dprime_m", self.n_dprime_m),
            ("n_dprime_w", self.n_dprime_w),
        ] {
            if n == 0 {
                return Err(AffinityError::EmptyPopulation(name));
            }
        }
        Ok(())
    }

    /// Latent utility index `baseline_g + lambda_g * [event]`.
    pub fn index(&self, gender: Gender, event: bool) -> f64 {
        let (baseline, lambda) = match gender {
            Gender::Male => (self.baseline_m, self.lambda_m),
            Gender::Female => (self.baseline_w, self.lambda_w),
        };
        if event {
            baseline + lambda
        } else {
            baseline
        }
    }

    /// Prospective population of `gender` in the period before (`event =
    /// false`) or after (`event = true`) the event.
    pub fn population(&self, gender: Gender, event: bool) -> u64 {
        match (gender, event) {
            (Gender::Male, false) => self.n_prime_m,
            (Gender::Female, false) => self.n_prime_w,
            (Gender::Male, true) => self.n_dprime_m,
            (Gender::Female, true) => self.n_dprime_w,
        }
    }
}

pub fn follow_probability(params: &AffinityParams, gender: Gender, event: bool) -> f64 {
    phi(params.index(gender, event))
}

/// Expected male-to-female ratio of new followers in the period before or
/// after the event.
pub fn gender_ratio(params: &AffinityParams, event: bool) -> Result<f64, AffinityError> {
    params.validate()?;
    let mass = |g| params.population(g, event) as f64 * follow_probability(params, g, event);
    let female = mass(Gender::Female);
    if female == 0.0 {
        return Err(AffinityError::DivergentRatio);
    }
    Ok(mass(Gender::Male) / female)
}

/// `D(event)`: change in the expected new-follower gender ratio.
pub fn disturbance(params: &AffinityParams) -> Result<f64, AffinityError> {
    Ok(gender_ratio(params, true)? - gender_ratio(params, false)?)
}

/// Simulated follow counts for one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOutcome {
    pub followed_m: u64,
    pub followed_w: u64,
    pub draws_m: u64,
    pub draws_w: u64,
}

impl SimOutcome {
    pub fn followed(&self, gender: Gender) -> u64 {
        match gender {
            Gender::Male => self.followed_m,
            Gender::Female => self.followed_w,
        }
    }

    pub fn draws(&self, gender: Gender) -> u64 {
        match gender {
            Gender::Male => self.draws_m,
            Gender::Female => self.draws_w,
        }
    }
}

/// Individuals per independently seeded partition.
pub const PARTITION_SIZE: u64 = 1 << 16;

/// Counts individuals in one partition whose utility is positive. Each
/// partition has its own stream derived from `(seed, event, gender,
/// partition)`, so the total does not depend on how partitions are spread
/// over workers.
pub fn simulate_partition(index: f64, event: bool, gender: Gender, partition: u64, len: u64, seed: u64) -> u64 {
    let mut stream = rng::stream(seed, &[event as u64, gender.index() as u64, partition]);
    let mut followed = 0;
    for _ in 0..len {
        let eps = inverse_phi(rng::open_unit(&mut stream));
        if index + eps > 0.0 {
            followed += 1;
        }
    }
    followed
}

fn simulate_gender(params: &AffinityParams, gender: Gender, event: bool, seed: u64) -> u64 {
    let n = params.population(gender, event);
    let index = params.index(gender, event);
    (0..n.div_ceil(PARTITION_SIZE))
        .map(|p| {
            let len = PARTITION_SIZE.min(n - p * PARTITION_SIZE);
            simulate_partition(index, event, gender, p, len, seed)
        })
        .sum()
}

/// Draws one period of follow decisions for the prospective populations.
pub fn simulate(params: &AffinityParams, event: bool, seed: u64) -> Result<SimOutcome, AffinityError> {
    params.validate()?;
    Ok(SimOutcome {
        followed_m: simulate_gender(params, Gender::Male, event, seed),
        followed_w: simulate_gender(params, Gender::Female, event, seed),
        draws_m: params.population(Gender::Male, event),
        draws_w: params.population(Gender::Female, event),
    })
}

/// Unfollow counts for current followers, where `params` describes the
/// utility of remaining: an individual unfollows iff that utility is
/// negative. Returned `followed_*` fields hold the unfollow counts.
pub fn simulate_unfollows(params: &AffinityParams, event: bool, seed: u64) -> Result<SimOutcome, AffinityError> {
    let stay = simulate(params, event, seed)?;
    Ok(SimOutcome {
        followed_m: stay.draws_m - stay.followed_m,
        followed_w: stay.draws_w - stay.followed_w,
        ..stay
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PHI_HALF: f64 = 0.691_462_461_274_013_1;

    #[test]
    fn follow_probability_examples() {
        let p = AffinityParams::neutral(1000);
        assert_eq!(follow_probability(&p, Gender::Male, false), 0.5);
        let p = AffinityParams { lambda_w: 0.5, ..p };
        assert!((follow_probability(&p, Gender::Female, true) - 0.691_462_461_3).abs() < 1e-10);
        assert_eq!(
            follow_probability(&p, Gender::Male, true),
            follow_probability(&p, Gender::Male, false)
        );
    }

    #[test]
    fn gender_ratio_examples() {
        let p = AffinityParams::neutral(1000);
        assert_eq!(gender_ratio(&p, false).unwrap(), 1.0);
        let p2 = AffinityParams { n_dprime_m: 2000, ..p };
        assert_eq!(gender_ratio(&p2, true).unwrap(), 2.0);
        let p3 = AffinityParams { lambda_w: 0.5, ..p };
        let r = gender_ratio(&p3, true).unwrap();
        assert!((r - 0.5 / PHI_HALF).abs() < 1e-12);
        assert!((r - 0.7231).abs() < 1e-4);
    }

    #[test]
    fn divergent_ratio_is_reported() {
        let p = AffinityParams { baseline_w: -60.0, ..AffinityParams::neutral(10) };
        assert_eq!(gender_ratio(&p, false), Err(AffinityError::DivergentRatio));
    }

    #[test]
    fn disturbance_examples() {
        let p = AffinityParams {
            n_prime_m: 300,
            n_prime_w: 200,
            n_dprime_m: 600,
            n_dprime_w: 400,
            ..AffinityParams::neutral(1)
        };
        assert!(disturbance(&p).unwrap().abs() < 1e-15);
        let p = AffinityParams { lambda_w: 0.5, ..AffinityParams::neutral(1000) };
        let d = disturbance(&p).unwrap();
        assert!((d - (0.5 / PHI_HALF - 1.0)).abs() < 1e-12);
        assert!((d + 0.2769).abs() < 1e-4);
        let mut last = d;
        for step in 1..20 {
            let q = AffinityParams { lambda_m: step as f64 * 0.1, ..p };
            let next = disturbance(&q).unwrap();
            assert!(next > last);
            last = next;
        }
    }

    #[test]
    fn validation() {
        let p = AffinityParams { n_prime_w: 0, ..AffinityParams::neutral(1) };
        assert_eq!(p.validate(), Err(AffinityError::EmptyPopulation("n_prime_w")));
        let p = AffinityParams { lambda_m: f64::NAN, ..AffinityParams::neutral(1) };
        assert_eq!(p.validate(), Err(AffinityError::NonFinite("lambda_m")));
    }

    #[test]
    fn simulate_neutral_is_half() {
        let p = AffinityParams::neutral(100_000);
        let out = simulate(&p, false, 42).unwrap();
        for g in Gender::ALL {
            let f = out.followed(g) as f64 / out.draws(g) as f64;
            assert!((f - 0.5).abs() <= 0.005, "{g}: {f}");
        }
    }

    #[test]
    fn saturated_probit_always_follows() {
        let p = AffinityParams { baseline_w: 50.0, ..AffinityParams::neutral(10_000) };
        let out = simulate(&p, false, 1).unwrap();
        assert_eq!(out.followed_w, out.draws_w);
        let gone = simulate_unfollows(&p, false, 1).unwrap();
        assert_eq!(gone.followed_w, 0);
    }

    #[test]
    fn simulate_is_seeded() {
        let p = AffinityParams::neutral(50_000);
        assert_eq!(simulate(&p, true, 9).unwrap(), simulate(&p, true, 9).unwrap());
        assert_ne!(simulate(&p, true, 9).unwrap(), simulate(&p, true, 10).unwrap());
        assert_ne!(simulate(&p, true, 9).unwrap(), simulate(&p, false, 9).unwrap());
    }

    #[test]
    fn partitions_sum_to_whole() {
        // A population spanning several partitions equals the sum of
        // independently computed partitions.
        let n = 3 * PARTITION_SIZE + 123;
        let p = AffinityParams::neutral(n);
        let whole = simulate(&p, false, 5).unwrap().followed_m;
        let parts: u64 = (0..4)
            .map(|i| simulate_partition(0.0, false, Gender::Male, i, PARTITION_SIZE.min(n - i * PARTITION_SIZE), 5))
            .sum();
        assert_eq!(whole, parts);
    }
}
