//! Scenario geometry, path loss and Rayleigh-fading SNR draws.
//!
//! Mean received SNR over a link of length `d` is `P / (N0 * d^alpha)`.
//! Instantaneous SNRs are exponential around that mean (Rayleigh amplitude).

use crate::allocation::PowerAllocation;
use crate::error::{invalid, Error, Result};
use crate::rng::SplitMix64;

/// Admissible path-loss exponents.
pub const ALPHA_RANGE: (f64, f64) = (2.0, 6.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(ALPHA_RANGE.0..=ALPHA_RANGE.1).contains(&alpha) {
        return Err(invalid(format!(
            "path-loss exponent {alpha} outside [{}, {}]",
            ALPHA_RANGE.0, ALPHA_RANGE.1
        )));
    }
    Ok(())
}

/// Physical placement of source, destination and partners.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGeometry {
    source: Point,
    destination: Point,
    partners: Vec<Point>,
    alpha: f64,
}

impl NetworkGeometry {
    pub fn new(source: Point, destination: Point, partners: Vec<Point>, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let d_sd = source.distance(&destination);
        if !(d_sd > 0.0 && d_sd.is_finite()) {
            return Err(invalid("source and destination must be distinct finite points"));
        }
        if partners.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(invalid("partner coordinates must be finite"));
        }
        Ok(Self {
            source,
            destination,
            partners,
            alpha,
        })
    }

    pub fn source(&self) -> Point {
        self.source
    }

    pub fn destination(&self) -> Point {
        self.destination
    }

    pub fn partners(&self) -> &[Point] {
        &self.partners
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn d_sd(&self) -> f64 {
        self.source.distance(&self.destination)
    }

    /// Distances divided by `d_sd`, partner order preserved.
    ///
    /// Fails if a partner sits exactly on the source or the destination.
    pub fn normalize(&self) -> Result<NormalizedLinks> {
        let d_sd = self.d_sd();
        let pairs = self
            .partners
            .iter()
            .map(|p| LinkPair {
                d_sr: self.source.distance(p) / d_sd,
                d_rd: p.distance(&self.destination) / d_sd,
            })
            .collect();
        NormalizedLinks::from_pairs(d_sd, self.alpha, pairs)
    }
}

/// Normalized distances `(D_sr, D_rd)` of one partner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkPair {
    pub d_sr: f64,
    pub d_rd: f64,
}

impl LinkPair {
    pub const fn new(d_sr: f64, d_rd: f64) -> Self {
        Self { d_sr, d_rd }
    }
}

impl From<(f64, f64)> for LinkPair {
    fn from((d_sr, d_rd): (f64, f64)) -> Self {
        Self { d_sr, d_rd }
    }
}

/// Per-partner normalized distances plus the absolute source-destination
/// distance. Every allocator consumes this.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedLinks {
    d_sd: f64,
    alpha: f64,
    pairs: Vec<LinkPair>,
}

impl NormalizedLinks {
    pub fn from_pairs(d_sd: f64, alpha: f64, pairs: Vec<LinkPair>) -> Result<Self> {
        check_alpha(alpha)?;
        if !(d_sd > 0.0 && d_sd.is_finite()) {
            return Err(invalid(format!("d_sd must be positive, got {d_sd}")));
        }
        for (i, p) in pairs.iter().enumerate() {
            if !(p.d_sr > 0.0 && p.d_rd > 0.0 && p.d_sr.is_finite() && p.d_rd.is_finite()) {
                return Err(invalid(format!(
                    "partner {i}: normalized distances must be positive, got ({}, {})",
                    p.d_sr, p.d_rd
                )));
            }
        }
        Ok(Self { d_sd, alpha, pairs })
    }

    /// Non-cooperative link set with the same `d_sd` and `alpha`.
    pub fn direct_only(&self) -> Self {
        Self {
            d_sd: self.d_sd,
            alpha: self.alpha,
            pairs: Vec::new(),
        }
    }

    /// Same normalized pairs over a different source-destination distance.
    pub fn with_d_sd(&self, d_sd: f64) -> Result<Self> {
        Self::from_pairs(d_sd, self.alpha, self.pairs.clone())
    }

    /// Keeps the partners whose index satisfies `keep`.
    pub fn filter(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        Self {
            d_sd: self.d_sd,
            alpha: self.alpha,
            pairs: self
                .pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| keep(*i))
                .map(|(_, p)| *p)
                .collect(),
        }
    }

    pub fn d_sd(&self) -> f64 {
        self.d_sd
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn pairs(&self) -> &[LinkPair] {
        &self.pairs
    }

    pub fn m(&self) -> usize {
        self.pairs.len()
    }

    /// `d_sd^alpha`.
    pub fn direct_loss(&self) -> f64 {
        self.d_sd.powf(self.alpha)
    }

    /// Absolute source-partner distance in meters.
    pub fn d_sr(&self, i: usize) -> f64 {
        self.pairs[i].d_sr * self.d_sd
    }

    /// Absolute partner-destination distance in meters.
    pub fn d_rd(&self, i: usize) -> f64 {
        self.pairs[i].d_rd * self.d_sd
    }
}

/// Mean SNR `power / (n0 * distance^alpha)`.
pub fn mean_snr(power: f64, distance: f64, alpha: f64, n0: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::Domain(format!("distance must be positive, got {distance}")));
    }
    if !(n0 > 0.0) {
        return Err(Error::Domain(format!("noise power must be positive, got {n0}")));
    }
    if !(power >= 0.0) {
        return Err(Error::Domain(format!("power must be non-negative, got {power}")));
    }
    Ok(power / (n0 * distance.powf(alpha)))
}

/// Mean SNR of every link in a scenario: direct link `b0`, source to
/// partner `a[i]`, partner to destination `b[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkMeans {
    pub b0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl LinkMeans {
    pub fn from_allocation(alloc: &PowerAllocation, links: &NormalizedLinks, n0: f64) -> Result<Self> {
        if alloc.m() != links.m() {
            return Err(invalid(format!(
                "allocation has {} partners but link set has {}",
                alloc.m(),
                links.m()
            )));
        }
        let alpha = links.alpha();
        let b0 = mean_snr(alloc.p_s(), links.d_sd(), alpha, n0)?;
        let mut a = Vec::with_capacity(links.m());
        let mut b = Vec::with_capacity(links.m());
        for (i, &p_r) in alloc.p_r().iter().enumerate() {
            a.push(mean_snr(alloc.p_s(), links.d_sr(i), alpha, n0)?);
            b.push(mean_snr(p_r, links.d_rd(i), alpha, n0)?);
        }
        Ok(Self { b0, a, b })
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }
}

/// One draw of instantaneous link SNRs (linear scale).
#[derive(Debug, Clone, PartialEq)]
pub struct FadingRealization {
    pub b0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl FadingRealization {
    pub fn zeroed(m: usize) -> Self {
        Self {
            b0: 0.0,
            a: vec![0.0; m],
            b: vec![0.0; m],
        }
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }
}

/// Inverse CDF of the exponential law: `-mean * ln(u)` for `u` in (0, 1].
#[inline]
pub fn exponential_from_uniform(mean: f64, u: f64) -> f64 {
    // -0.0 at u = 1 would leak a negative zero
    if u >= 1.0 {
        0.0
    } else {
        -mean * u.ln()
    }
}

pub fn sample_fading(means: &LinkMeans, rng: &mut SplitMix64) -> FadingRealization {
    let mut f = FadingRealization::zeroed(means.m());
    sample_fading_into(means, rng, &mut f);
    f
}

/// Draws into an existing buffer. Draw order is `b0`, then `a[i]`, `b[i]`
/// for each partner in turn.
pub fn sample_fading_into(means: &LinkMeans, rng: &mut SplitMix64, out: &mut FadingRealization) {
    out.a.resize(means.m(), 0.0);
    out.b.resize(means.m(), 0.0);
    out.b0 = exponential_from_uniform(means.b0, rng.next_open01());
    for i in 0..means.m() {
        out.a[i] = exponential_from_uniform(means.a[i], rng.next_open01());
        out.b[i] = exponential_from_uniform(means.b[i], rng.next_open01());
    }
}
