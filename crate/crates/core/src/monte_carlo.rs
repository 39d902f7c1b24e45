//! Seeded Monte Carlo outage estimation.
//!
//! Trials are split into fixed chunks of [`CHUNK_SIZE`]; chunk `k` draws from
//! its own generator seeded with [`substream_seed`]`(seed, k)`. Counts are
//! summed as integers, so the estimate depends only on the inputs and the
//! seed, never on the number of worker threads or their scheduling.

use rayon::prelude::*;

use crate::allocation::{AllocationRequest, PowerAllocation};
use crate::error::{invalid, Error, Result};
use crate::geometry::{sample_fading_into, FadingRealization, LinkMeans, NormalizedLinks};
use crate::outage::mutual_information;
use crate::rng::{substream_seed, SplitMix64};
use crate::scheme::{Scheme, SchemeAllocation};
use crate::table::LambdaTable;

pub const CHUNK_SIZE: u64 = 65_536;
/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;
pub const DEFAULT_TRIALS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub p_hat: f64,
    pub n_trials: u64,
    pub n_outages: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl OutageEstimate {
    fn from_counts(n_outages: u64, n_trials: u64, seed: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(n_outages, n_trials, Z_95);
        let p_hat = n_outages as f64 / n_trials as f64;
        Self {
            p_hat,
            n_trials,
            n_outages,
            ci_low: ci_low.min(p_hat),
            ci_high: ci_high.max(p_hat),
            seed,
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

fn count_chunk(means: &LinkMeans, rate: f64, seed: u64, chunk: u64, trials: u64) -> u64 {
    let mut rng = SplitMix64::new(substream_seed(seed, chunk));
    let mut f = FadingRealization::zeroed(means.m());
    let mut outages = 0;
    for _ in 0..trials {
        sample_fading_into(means, &mut rng, &mut f);
        if mutual_information(&f) < rate {
            outages += 1;
        }
    }
    outages
}

fn count_outages(means: &LinkMeans, rate: f64, n_trials: u64, seed: u64) -> u64 {
    let chunks = n_trials.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|k| {
            let trials = CHUNK_SIZE.min(n_trials - k * CHUNK_SIZE);
            count_chunk(means, rate, seed, k, trials)
        })
        .sum()
}

fn check_inputs(n_trials: u64, rate: f64) -> Result<()> {
    if n_trials == 0 {
        return Err(invalid("n_trials must be at least 1"));
    }
    if !(rate > 0.0) {
        return Err(invalid(format!("rate must be positive, got {rate}")));
    }
    Ok(())
}

/// Fraction of fading draws whose AF mutual information falls below `rate`.
pub fn estimate_outage(
    alloc: &PowerAllocation,
    links: &NormalizedLinks,
    n0: f64,
    rate: f64,
    n_trials: u64,
    seed: u64,
) -> Result<OutageEstimate> {
    check_inputs(n_trials, rate)?;
    let means = LinkMeans::from_allocation(alloc, links, n0)?;
    Ok(OutageEstimate::from_counts(
        count_outages(&means, rate, n_trials, seed),
        n_trials,
        seed,
    ))
}

/// [`estimate_outage`] on a dedicated pool of `workers` threads.
pub fn estimate_outage_with_workers(
    alloc: &PowerAllocation,
    links: &NormalizedLinks,
    n0: f64,
    rate: f64,
    n_trials: u64,
    seed: u64,
    workers: usize,
) -> Result<OutageEstimate> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| estimate_outage(alloc, links, n0, rate, n_trials, seed))
}

/// Estimate for a scheme's output, over its transmitting partners only.
pub fn estimate_scheme_outage(sa: &SchemeAllocation, n0: f64, rate: f64, n_trials: u64, seed: u64) -> Result<OutageEstimate> {
    let (links, alloc) = sa.active()?;
    estimate_outage(&alloc, &links, n0, rate, n_trials, seed)
}

/// One side of a power-gap comparison.
#[derive(Debug, Clone, Copy)]
pub struct GapArm<'a> {
    pub scheme: Scheme,
    pub links: &'a NormalizedLinks,
    pub table: Option<&'a LambdaTable>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapOptions {
    /// Power bracket in dB relative to 1 W.
    pub lo_db: f64,
    pub hi_db: f64,
    /// Bisection stops once the bracket is this narrow.
    pub tol_db: f64,
}

impl Default for GapOptions {
    fn default() -> Self {
        Self {
            lo_db: -40.0,
            hi_db: 80.0,
            tol_db: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapResult {
    pub p_total_db_a: f64,
    pub p_total_db_b: f64,
    /// `p_total_db_a - p_total_db_b`.
    pub gap_db: f64,
}

/// Total power (dB re 1 W) at which the simulated outage of `arm` reaches
/// `target_p`. Every probe reuses `seed`, which makes the empirical curve
/// monotone in power.
#[allow(clippy::too_many_arguments)]
pub fn required_power_db(
    arm: GapArm<'_>,
    n0: f64,
    rate: f64,
    target_p: f64,
    n_trials: u64,
    seed: u64,
    opts: GapOptions,
) -> Result<f64> {
    if !(target_p > 0.0 && target_p < 1.0) {
        return Err(invalid(format!("target outage {target_p} outside (0, 1)")));
    }
    if !(opts.hi_db > opts.lo_db && opts.tol_db > 0.0) {
        return Err(invalid("power bracket must be ordered with positive tolerance"));
    }
    let outage_at = |db: f64| -> Result<f64> {
        let req = AllocationRequest::new(arm.links.clone(), 10f64.powf(db / 10.0), n0, rate, None)?;
        let sa = arm.scheme.allocate(&req, arm.table)?;
        Ok(estimate_scheme_outage(&sa, n0, rate, n_trials, seed)?.p_hat)
    };
    let (mut lo, mut hi) = (opts.lo_db, opts.hi_db);
    if outage_at(lo)? <= target_p || outage_at(hi)? > target_p {
        return Err(Error::Bracket { lo, hi });
    }
    while hi - lo > opts.tol_db {
        let mid = 0.5 * (lo + hi);
        if outage_at(mid)? > target_p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Extra power, in dB, that `a` needs over `b` to reach `target_p`.
#[allow(clippy::too_many_arguments)]
pub fn power_gap_db(
    a: GapArm<'_>,
    b: GapArm<'_>,
    n0: f64,
    rate: f64,
    target_p: f64,
    n_trials: u64,
    seed: u64,
    opts: GapOptions,
) -> Result<GapResult> {
    let p_a = required_power_db(a, n0, rate, target_p, n_trials, seed, opts)?;
    let p_b = required_power_db(b, n0, rate, target_p, n_trials, seed, opts)?;
    Ok(GapResult {
        p_total_db_a: p_a,
        p_total_db_b: p_b,
        gap_db: p_a - p_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LinkPair;
    use crate::outage::direct_outage_exact;

    fn direct(d_sd: f64) -> NormalizedLinks {
        NormalizedLinks::from_pairs(d_sd, 2.0, vec![]).unwrap()
    }

    #[test]
    fn wilson_bounds_are_ordered() {
        for &(k, n) in &[(0, 10), (3, 10), (10, 10), (5, 1_000_000)] {
            let (lo, hi) = wilson_interval(k, n, Z_95);
            let p = k as f64 / n as f64;
            assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
        }
        let (lo, hi) = wilson_interval(0, 100, Z_95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
    }

    #[test]
    fn direct_link_matches_exponential_tail() {
        // lambda_0 = 100 with unit distances and noise
        let alloc = PowerAllocation::new(100.0, vec![]).unwrap();
        let est = estimate_outage(&alloc, &direct(1.0), 1.0, 1.0, 1_000_000, 11).unwrap();
        let exact = direct_outage_exact(100.0, 1.0);
        assert!((exact - 0.0099502).abs() < 1e-7);
        assert!(est.contains(exact), "{est:?} vs {exact}");
        assert_eq!(est.p_hat, est.n_outages as f64 / est.n_trials as f64);
    }

    #[test]
    fn vanishing_rate_means_no_outage() {
        let alloc = PowerAllocation::new(100.0, vec![]).unwrap();
        let est = estimate_outage(&alloc, &direct(1.0), 1.0, 1e-9, 1_000_000, 5).unwrap();
        assert!(est.p_hat <= 1e-5);
    }

    #[test]
    fn worker_count_does_not_change_result() {
        let links = NormalizedLinks::from_pairs(100.0, 2.0, vec![LinkPair::new(0.5, 0.5)]).unwrap();
        let alloc = PowerAllocation::new(20.0, vec![10.0]).unwrap();
        let n = 3 * CHUNK_SIZE + 123;
        let one = estimate_outage_with_workers(&alloc, &links, 1e-4, 1.0, n, 77, 1).unwrap();
        let eight = estimate_outage_with_workers(&alloc, &links, 1e-4, 1.0, n, 77, 8).unwrap();
        assert_eq!(one, eight);
    }

    #[test]
    fn outage_falls_with_power_under_shared_seed() {
        let links = NormalizedLinks::from_pairs(100.0, 2.0, vec![LinkPair::new(0.5, 0.5)]).unwrap();
        let mut last = 1.0;
        for db in [5.0, 10.0, 15.0, 20.0, 25.0] {
            let p = 10f64.powf(db / 10.0);
            let alloc = PowerAllocation::new(2.0 * p / 3.0, vec![p / 3.0]).unwrap();
            let est = estimate_outage(&alloc, &links, 1e-4, 1.0, 200_000, 3).unwrap();
            assert!(est.p_hat <= last);
            last = est.p_hat;
        }
    }

    #[test]
    fn rejects_zero_trials() {
        let alloc = PowerAllocation::new(1.0, vec![]).unwrap();
        assert!(estimate_outage(&alloc, &direct(1.0), 1.0, 1.0, 0, 0).is_err());
    }

    #[test]
    fn identical_arms_have_zero_gap() {
        let links = NormalizedLinks::from_pairs(100.0, 2.0, vec![LinkPair::new(0.5, 0.5)]).unwrap();
        let arm = GapArm {
            scheme: Scheme::ClosedForm,
            links: &links,
            table: None,
        };
        let g = power_gap_db(arm, arm, 1e-4, 1.0, 0.05, 50_000, 9, GapOptions::default()).unwrap();
        assert_eq!(g.gap_db, 0.0);
    }

    #[test]
    fn doubling_distance_costs_path_loss() {
        let near = direct(100.0);
        let far = direct(200.0);
        let arm = |links| GapArm {
            scheme: Scheme::None,
            links,
            table: None,
        };
        let g = power_gap_db(arm(&far), arm(&near), 1e-4, 1.0, 0.05, 100_000, 4, GapOptions::default()).unwrap();
        assert!((g.gap_db - 10.0 * 4f64.log10()).abs() <= 0.1, "{g:?}");
    }

    #[test]
    fn unreachable_target_reports_bracket() {
        let links = direct(100.0);
        let arm = GapArm {
            scheme: Scheme::None,
            links: &links,
            table: None,
        };
        let opts = GapOptions {
            lo_db: -10.0,
            hi_db: -5.0,
            tol_db: 0.05,
        };
        assert!(matches!(
            required_power_db(arm, 1e-4, 1.0, 0.05, 10_000, 1, opts),
            Err(Error::Bracket { .. })
        ));
    }
}
