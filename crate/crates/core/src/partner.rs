//! Greedy single-partner ranking and the optimal partner-count sweep.
//!
//! With one relay and an optimal power split, the outage approximation
//! factors into a network constant times a purely geometric score
//!
//! ```text
//!     r = (1 + lambda' D_rd^alpha / (1 - lambda' D_sr^alpha))^2 / lambda'
//! ```
//!
//! so candidates can be ranked by `r` alone. Lower is better.

use crate::allocation::{allocate_iterative, AllocationRequest, IterativeOptions};
use crate::error::{invalid, Error, Result};
use crate::geometry::{LinkPair, NormalizedLinks, Point};
use crate::outage::{allocation_outage, outage_approx};
use crate::allocation::lambda_prime;

pub fn rank_score(d_sr: f64, d_rd: f64, alpha: f64) -> Result<f64> {
    let lp = lambda_prime(d_sr, d_rd, alpha, 1.0)?;
    let inner = 1.0 + lp * d_rd.powf(alpha) / (1.0 - lp * d_sr.powf(alpha));
    Ok(inner * inner / lp)
}

/// Candidates sorted by ascending score.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRanking {
    /// `(candidate index, score)`, ascending by score, ties by index.
    pub scores: Vec<(usize, f64)>,
    pub chosen: usize,
}

pub fn greedy_select(candidates: &[LinkPair], alpha: f64) -> Result<CandidateRanking> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let mut scores = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| Ok((i, rank_score(c.d_sr, c.d_rd, alpha)?)))
        .collect::<Result<Vec<_>>>()?;
    // stable sort keeps the lower index first on ties
    scores.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(CandidateRanking {
        chosen: scores[0].0,
        scores,
    })
}

/// Inclusive, evenly spaced axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if n == 0 || !(max >= min) || (n > 1 && max == min) {
            return Err(invalid(format!("bad axis [{min}, {max}] with {n} points")));
        }
        Ok(Self { min, max, n })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.n - 1) as f64;
        (0..self.n).map(|k| self.min + k as f64 * step).collect()
    }
}

/// Rank score over a grid of candidate positions. `None` marks points on
/// the source or destination, where the score is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct RankGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major: `values[iy * xs.len() + ix]`.
    pub values: Vec<Option<f64>>,
}

impl RankGrid {
    pub fn get(&self, ix: usize, iy: usize) -> Option<f64> {
        self.values[iy * self.xs.len() + ix]
    }

    /// Position and value of the smallest defined score.
    pub fn argmin(&self) -> Option<(f64, f64, f64)> {
        let mut best: Option<(f64, f64, f64)> = None;
        for (iy, &y) in self.ys.iter().enumerate() {
            for (ix, &x) in self.xs.iter().enumerate() {
                if let Some(v) = self.get(ix, iy) {
                    if best.is_none_or(|b| v < b.2) {
                        best = Some((x, y, v));
                    }
                }
            }
        }
        best
    }
}

pub fn rank_map(xs: Axis, ys: Axis, source: Point, destination: Point, alpha: f64) -> Result<RankGrid> {
    let d_sd = source.distance(&destination);
    if !(d_sd > 0.0) {
        return Err(invalid("source and destination must be distinct"));
    }
    let (xs, ys) = (xs.points(), ys.points());
    let eps = 1e-12 * d_sd;
    let mut values = Vec::with_capacity(xs.len() * ys.len());
    for &y in &ys {
        for &x in &xs {
            let p = Point::new(x, y);
            let (d_sr, d_rd) = (source.distance(&p), p.distance(&destination));
            values.push(if d_sr <= eps || d_rd <= eps {
                None
            } else {
                Some(rank_score(d_sr / d_sd, d_rd / d_sd, alpha)?)
            });
        }
    }
    Ok(RankGrid { xs, ys, values })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartnerCountResult {
    pub m_star: usize,
    /// `(m, approximate outage)` for `m = 0..=m_max`.
    pub outage_by_m: Vec<(usize, f64)>,
}

impl PartnerCountResult {
    /// True when the curve never decreases again once it has increased.
    pub fn is_unimodal(&self) -> bool {
        let mut rising = false;
        for w in self.outage_by_m.windows(2) {
            if w[1].1 > w[0].1 {
                rising = true;
            } else if rising && w[1].1 < w[0].1 {
                return false;
            }
        }
        true
    }
}

/// Best number of identical partners at `candidate` for a given rate and
/// total normalized SNR `P_T / (N0 d_sd^alpha)`.
pub fn optimal_partner_count(
    rate: f64,
    snr_norm: f64,
    candidate: LinkPair,
    alpha: f64,
    m_max: usize,
) -> Result<PartnerCountResult> {
    if !(snr_norm > 0.0) {
        return Err(invalid(format!("normalized SNR must be positive, got {snr_norm}")));
    }
    let mut outage_by_m = Vec::with_capacity(m_max + 1);
    outage_by_m.push((0, outage_approx(snr_norm, &[], rate)));
    for m in 1..=m_max {
        // unit d_sd and N0 make P_T equal to the normalized SNR
        let links = NormalizedLinks::from_pairs(1.0, alpha, vec![candidate; m])?;
        let req = AllocationRequest::new(links, snr_norm, 1.0, rate, None)?;
        let it = allocate_iterative(&req, IterativeOptions::default())?;
        outage_by_m.push((m, allocation_outage(&it.allocation, &req.links, 1.0, rate)?));
    }
    let m_star = outage_by_m
        .iter()
        .fold((0, f64::INFINITY), |best, &(m, p)| if p < best.1 { (m, p) } else { best })
        .0;
    Ok(PartnerCountResult { m_star, outage_by_m })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_score_examples() {
        assert!((rank_score(0.5, 0.5, 2.0).unwrap() - 1.6875).abs() < 1e-12);
        assert!((rank_score(0.6, 0.6, 2.0).unwrap() - 2.43).abs() < 1e-12);
        let lp: f64 = 0.542_572_892_243_661_9;
        let by_hand = (1.0 + lp * 0.25 / (1.0 - lp)).powi(2) / lp;
        let r = rank_score(1.0, 0.5, 2.0).unwrap();
        assert!((r - by_hand).abs() < 1e-8, "{r} vs {by_hand}");
        assert!((r - 3.098_207_557).abs() < 1e-8, "{r}");
    }

    #[test]
    fn diagonal_family() {
        for k in 0..50 {
            let d = 0.1 + 0.03 * k as f64;
            for &alpha in &[2.0, 3.0, 4.5] {
                let r = rank_score(d, d, alpha).unwrap();
                assert!((r - 6.75 * d.powf(alpha)).abs() <= 1e-9 * r.max(1.0));
            }
        }
    }

    #[test]
    fn greedy_examples() {
        let one = greedy_select(&[LinkPair::new(0.9, 0.9)], 2.0).unwrap();
        assert_eq!(one.chosen, 0);
        let two = greedy_select(&[LinkPair::new(0.5, 0.5), LinkPair::new(0.6, 0.6)], 2.0).unwrap();
        assert_eq!(two.chosen, 0);
        let flipped = greedy_select(&[LinkPair::new(0.6, 0.6), LinkPair::new(0.5, 0.5)], 2.0).unwrap();
        assert_eq!(flipped.chosen, 1);
        assert_eq!(flipped.scores[1].0, 0);
        let dup = greedy_select(&[LinkPair::new(0.7, 0.4); 3], 2.0).unwrap();
        assert_eq!(dup.chosen, 0);
        assert_eq!(dup.scores.iter().map(|s| s.0).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(greedy_select(&[], 2.0), Err(Error::EmptyCandidates));
    }

    fn fig5_grid() -> RankGrid {
        rank_map(
            Axis::new(-0.5, 1.5, 41).unwrap(),
            Axis::new(-1.0, 1.0, 41).unwrap(),
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn rank_map_is_mirror_symmetric() {
        let g = fig5_grid();
        let ny = g.ys.len();
        for iy in 0..ny {
            for ix in 0..g.xs.len() {
                match (g.get(ix, iy), g.get(ix, ny - 1 - iy)) {
                    (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-12 * a.max(1.0)),
                    (a, b) => assert_eq!(a.is_none(), b.is_none()),
                }
            }
        }
    }

    #[test]
    fn rank_map_marks_endpoints_missing() {
        let g = fig5_grid();
        let ix = g.xs.iter().position(|&x| (x - 1.0).abs() < 1e-12).unwrap();
        let iy = g.ys.iter().position(|&y| y.abs() < 1e-12).unwrap();
        assert_eq!(g.get(ix, iy), None);
        let ix0 = g.xs.iter().position(|&x| x.abs() < 1e-12).unwrap();
        assert_eq!(g.get(ix0, iy), None);
        assert_eq!(g.values.iter().filter(|v| v.is_none()).count(), 2);
    }

    #[test]
    fn rank_map_minimum_lies_on_segment() {
        let (x, y, _) = fig5_grid().argmin().unwrap();
        assert!(y.abs() < 1e-12);
        assert!(x > 0.0 && x < 1.0, "argmin at x = {x}");
    }

    #[test]
    fn high_rate_prefers_direct_transmission() {
        let res = optimal_partner_count(8.0, 100.0, LinkPair::new(0.5, 0.5), 2.0, 5).unwrap();
        assert_eq!(res.m_star, 0);
        assert_eq!(res.outage_by_m.len(), 6);
    }

    #[test]
    fn unimodality_detector() {
        let r = |v: &[f64]| PartnerCountResult {
            m_star: 0,
            outage_by_m: v.iter().copied().enumerate().collect(),
        };
        assert!(r(&[0.5, 0.2, 0.1, 0.3, 0.4]).is_unimodal());
        assert!(r(&[1.0, 1.0, 1.0]).is_unimodal());
        assert!(!r(&[0.5, 0.2, 0.3, 0.1]).is_unimodal());
    }
}
