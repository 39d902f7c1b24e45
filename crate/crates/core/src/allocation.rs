//! Power allocation between a source and a fixed set of AF partners.
//!
//! Allocators work on the normalized relay terms `lambda'_i = lambda_i / lambda_0`.
//! At the optimum each `lambda'_i` is the small root of
//!
//! ```text
//!     A' x^2 - B x + 1 = 0,   A' = s^2 - s r,   B = 2 s + zeta_i r
//! ```
//!
//! with `s = D_sr^alpha`, `r = D_rd^alpha` and the coupling
//! `zeta_i = 1 + sum_{j != i} lambda'_j s_j`. Given the `lambda'_i`, the
//! budget fixes `lambda_0` and every power follows in closed form.
//!
//! Provided allocators:
//! - [`allocate_closed_form`]: one-shot estimate of `zeta` from `zeta = 1` terms;
//! - [`allocate_iterative`]: fixed point of the `zeta` coupling;
//! - [`allocate_reference_kkt`] / [`allocate_reference_optimum`]: the
//!   per-partner KKT water-level form for a fixed source power, plus a
//!   golden-section search over the source power;
//! - [`allocate_epa`]: equal-power baselines;
//! - [`allocate_grid_oracle`]: exhaustive simplex search, for testing.

use crate::error::{invalid, Error, Result};
use crate::geometry::{LinkPair, NormalizedLinks};
use crate::outage::{allocation_outage_raw, LambdaProfile};

/// Relative tolerance of the budget identity `p_s + sum p_r = p_total`.
pub const BUDGET_RTOL: f64 = 1e-9;

/// Everything an allocator needs to know about one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationRequest {
    pub links: NormalizedLinks,
    pub p_total: f64,
    pub n0: f64,
    pub rate: f64,
    pub p_max: Option<f64>,
}

impl AllocationRequest {
    pub fn new(links: NormalizedLinks, p_total: f64, n0: f64, rate: f64, p_max: Option<f64>) -> Result<Self> {
        if !(p_total > 0.0 && p_total.is_finite()) {
            return Err(invalid(format!("p_total must be positive, got {p_total}")));
        }
        if !(n0 > 0.0 && n0.is_finite()) {
            return Err(invalid(format!("n0 must be positive, got {n0}")));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(invalid(format!("rate must be positive, got {rate}")));
        }
        if let Some(p) = p_max {
            if !(p > 0.0) {
                return Err(invalid(format!("p_max must be positive, got {p}")));
            }
        }
        Ok(Self {
            links,
            p_total,
            n0,
            rate,
            p_max,
        })
    }

    /// Same request with a different total power.
    pub fn with_p_total(&self, p_total: f64) -> Result<Self> {
        Self::new(self.links.clone(), p_total, self.n0, self.rate, self.p_max)
    }

    pub fn m(&self) -> usize {
        self.links.m()
    }

    /// Total normalized SNR `P_T / (N0 d_sd^alpha)`.
    pub fn snr_norm(&self) -> f64 {
        self.p_total / (self.n0 * self.links.direct_loss())
    }
}

/// Source power and per-partner powers in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    p_s: f64,
    p_r: Vec<f64>,
    infeasible: bool,
}

impl PowerAllocation {
    pub fn new(p_s: f64, p_r: Vec<f64>) -> Result<Self> {
        if !(p_s >= 0.0 && p_s.is_finite()) || p_r.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(invalid("powers must be finite and non-negative"));
        }
        Ok(Self {
            p_s,
            p_r,
            infeasible: false,
        })
    }

    pub fn p_s(&self) -> f64 {
        self.p_s
    }

    pub fn p_r(&self) -> &[f64] {
        &self.p_r
    }

    pub fn m(&self) -> usize {
        self.p_r.len()
    }

    pub fn total(&self) -> f64 {
        self.p_s + self.p_r.iter().sum::<f64>()
    }

    /// Set when some node exceeds the request's `p_max`. The allocation is
    /// still returned unchanged.
    pub fn infeasible(&self) -> bool {
        self.infeasible
    }

    /// Source fraction followed by partner fractions of the total.
    pub fn fractions(&self) -> Vec<f64> {
        let total = self.total();
        std::iter::once(self.p_s)
            .chain(self.p_r.iter().copied())
            .map(|p| p / total)
            .collect()
    }

    pub fn conserves_budget(&self, p_total: f64) -> bool {
        (self.total() - p_total).abs() <= BUDGET_RTOL * p_total
    }

    fn flag_p_max(mut self, p_max: Option<f64>) -> Self {
        if let Some(cap) = p_max {
            self.infeasible = self.p_s > cap || self.p_r.iter().any(|&p| p > cap);
        }
        self
    }
}

/// Coefficients `(A', B)` of the quadratic `A' x^2 - B x + 1 = 0`.
pub fn lambda_prime_coefficients(d_sr: f64, d_rd: f64, alpha: f64, zeta: f64) -> (f64, f64) {
    let s = d_sr.powf(alpha);
    let r = d_rd.powf(alpha);
    (s * s - s * r, 2.0 * s + zeta * r)
}

/// Optimal normalized relay term for coupling `zeta`.
///
/// Evaluated as `2 / (B + sqrt(B^2 - 4 A'))`, the small root of the quadratic
/// after rationalization. The form stays finite and continuous through
/// `D_sr = D_rd`, where it reduces to the linear root `1 / B`.
pub fn lambda_prime(d_sr: f64, d_rd: f64, alpha: f64, zeta: f64) -> Result<f64> {
    if !(d_sr > 0.0 && d_rd > 0.0) {
        return Err(invalid(format!("distances must be positive, got ({d_sr}, {d_rd})")));
    }
    if !(zeta >= 1.0) {
        return Err(invalid(format!("zeta must be at least 1, got {zeta}")));
    }
    let (a, b) = lambda_prime_coefficients(d_sr, d_rd, alpha, zeta);
    let disc = b * b - 4.0 * a;
    // disc = zeta^2 r^2 + 4 (1 + zeta) s r > 0
    debug_assert!(disc > 0.0);
    Ok(2.0 / (b + disc.sqrt()))
}

fn lambda_prime_pair(pair: &LinkPair, alpha: f64, zeta: f64) -> Result<f64> {
    lambda_prime(pair.d_sr, pair.d_rd, alpha, zeta)
}

/// One-shot coupling estimate for partner `i`: the `zeta = 1` terms of the
/// other partners, weighted by their `D_sr^alpha`.
pub fn zeta_estimate(links: &NormalizedLinks, i: usize) -> Result<f64> {
    if i >= links.m() {
        return Err(invalid(format!("partner index {i} out of range for m = {}", links.m())));
    }
    let alpha = links.alpha();
    let mut zeta = 1.0;
    for (j, pair) in links.pairs().iter().enumerate() {
        if j != i {
            zeta += lambda_prime_pair(pair, alpha, 1.0)? * pair.d_sr.powf(alpha);
        }
    }
    Ok(zeta)
}

/// Turns normalized relay terms into powers. `None` excludes a partner
/// (zero power); the budget is spread over the source and included partners.
pub fn allocate_with_lambda_prime(req: &AllocationRequest, lambda_prime: &[Option<f64>]) -> Result<PowerAllocation> {
    let links = &req.links;
    if lambda_prime.len() != links.m() {
        return Err(invalid("lambda' list length does not match partner count"));
    }
    let alpha = links.alpha();
    let d_sd_loss = links.direct_loss();
    // Per-partner power per unit of lambda_0 * N0.
    let mut unit_powers = Vec::with_capacity(links.m());
    for (i, (lp, pair)) in lambda_prime.iter().zip(links.pairs()).enumerate() {
        let unit = match *lp {
            None => 0.0,
            Some(lp) => {
                let denom = 1.0 - lp * pair.d_sr.powf(alpha);
                if !(lp >= 0.0 && denom > 0.0) {
                    return Err(invalid(format!(
                        "partner {i}: lambda' = {lp} outside [0, 1/D_sr^alpha)"
                    )));
                }
                lp / denom * links.d_rd(i).powf(alpha)
            }
        };
        unit_powers.push(unit);
    }
    let lambda0_n0 = req.p_total / (d_sd_loss + unit_powers.iter().sum::<f64>());
    let p_s = lambda0_n0 * d_sd_loss;
    let p_r = unit_powers.iter().map(|u| u * lambda0_n0).collect();
    Ok(PowerAllocation::new(p_s, p_r)?.flag_p_max(req.p_max))
}

/// `lambda'` and `zeta` used by the closed-form allocator.
pub fn closed_form_terms(links: &NormalizedLinks) -> Result<(Vec<f64>, Vec<f64>)> {
    let alpha = links.alpha();
    let mut lps = Vec::with_capacity(links.m());
    let mut zetas = Vec::with_capacity(links.m());
    for (i, pair) in links.pairs().iter().enumerate() {
        let zeta = zeta_estimate(links, i)?;
        lps.push(lambda_prime_pair(pair, alpha, zeta)?);
        zetas.push(zeta);
    }
    Ok((lps, zetas))
}

/// No-iteration allocator: estimate every `zeta_i`, solve each partner's
/// quadratic, then split the budget.
pub fn allocate_closed_form(req: &AllocationRequest) -> Result<PowerAllocation> {
    let (lps, _) = closed_form_terms(&req.links)?;
    let opt: Vec<_> = lps.into_iter().map(Some).collect();
    allocate_with_lambda_prime(req, &opt)
}

/// The closed-form allocation's transformed variables.
pub fn closed_form_profile(req: &AllocationRequest) -> Result<LambdaProfile> {
    let (lps, zetas) = closed_form_terms(&req.links)?;
    let alloc = allocate_with_lambda_prime(req, &lps.iter().copied().map(Some).collect::<Vec<_>>())?;
    let lambda0 = alloc.p_s() / (req.n0 * req.links.direct_loss());
    LambdaProfile::new(lambda0, lps, zetas, &req.links)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterativeOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterativeAllocation {
    pub allocation: PowerAllocation,
    pub lambda_prime: Vec<f64>,
    pub zeta: Vec<f64>,
    pub iterations: usize,
    /// Largest change of any `lambda'_i` in the final sweep.
    pub residual: f64,
}

/// Solves the `zeta` coupling by plain fixed-point sweeps starting at `zeta = 1`.
pub fn allocate_iterative(req: &AllocationRequest, opts: IterativeOptions) -> Result<IterativeAllocation> {
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(invalid("iteration needs tol > 0 and max_iter >= 1"));
    }
    let links = &req.links;
    let alpha = links.alpha();
    let weights: Vec<f64> = links.pairs().iter().map(|p| p.d_sr.powf(alpha)).collect();
    let mut lps = links
        .pairs()
        .iter()
        .map(|p| lambda_prime_pair(p, alpha, 1.0))
        .collect::<Result<Vec<_>>>()?;
    let mut zetas = vec![1.0; links.m()];
    let mut residual = 0.0;
    for iteration in 1..=opts.max_iter {
        let weighted: f64 = lps.iter().zip(&weights).map(|(l, w)| l * w).sum();
        residual = 0.0f64;
        let mut next = Vec::with_capacity(lps.len());
        for (i, pair) in links.pairs().iter().enumerate() {
            zetas[i] = 1.0 + (weighted - lps[i] * weights[i]).max(0.0);
            let lp = lambda_prime_pair(pair, alpha, zetas[i])?;
            residual = residual.max((lp - lps[i]).abs());
            next.push(lp);
        }
        lps = next;
        if residual < opts.tol {
            let opt: Vec<_> = lps.iter().copied().map(Some).collect();
            return Ok(IterativeAllocation {
                allocation: allocate_with_lambda_prime(req, &opt)?,
                lambda_prime: lps,
                zeta: zetas,
                iterations: iteration,
                residual,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual,
        last: lps,
    })
}

/// Partner power from the KKT water-level form at multiplier `mult`:
/// `(-P_s c + sqrt(P_s^2 c^2 + 4 P_s c mult)) / 2`, `c = (D_rd / D_sr)^alpha`.
pub fn reference_partner_power(p_s: f64, c: f64, mult: f64) -> f64 {
    let k = p_s * c;
    // rationalized to avoid cancellation when mult << k
    2.0 * k * mult / (k + (k * k + 4.0 * k * mult).sqrt()).max(f64::MIN_POSITIVE)
}

/// For a fixed source power, bisects the multiplier until the partner
/// powers exhaust the rest of the budget.
pub fn allocate_reference_kkt(req: &AllocationRequest, p_s: f64) -> Result<PowerAllocation> {
    let links = &req.links;
    if links.m() == 0 {
        return Err(invalid("reference allocator needs at least one partner"));
    }
    if !(p_s > 0.0 && p_s < req.p_total) {
        return Err(invalid(format!("source power {p_s} outside (0, {})", req.p_total)));
    }
    let alpha = links.alpha();
    let cs: Vec<f64> = links.pairs().iter().map(|p| (p.d_rd / p.d_sr).powf(alpha)).collect();
    let target = req.p_total - p_s;
    let sum_at = |mult: f64| cs.iter().map(|&c| reference_partner_power(p_s, c, mult)).sum::<f64>();

    let mut lo = 0.0;
    let mut hi = target.max(f64::MIN_POSITIVE);
    let mut expansions = 0;
    while sum_at(hi) < target {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 2000 || !hi.is_finite() {
            return Err(Error::Bracket { lo: 0.0, hi });
        }
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sum_at(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mult = 0.5 * (lo + hi);
    let p_r: Vec<f64> = cs.iter().map(|&c| reference_partner_power(p_s, c, mult)).collect();
    let got: f64 = p_r.iter().sum();
    if (got - target).abs() > BUDGET_RTOL * req.p_total {
        return Err(Error::Bracket { lo, hi });
    }
    Ok(PowerAllocation::new(p_s, p_r)?.flag_p_max(req.p_max))
}

/// Golden-section search of the source share that minimizes the outage
/// approximation under [`allocate_reference_kkt`].
pub fn allocate_reference_optimum(req: &AllocationRequest) -> Result<PowerAllocation> {
    if req.m() == 0 {
        return Ok(PowerAllocation::new(req.p_total, vec![])?.flag_p_max(req.p_max));
    }
    let objective = |frac: f64| -> Result<f64> {
        let alloc = allocate_reference_kkt(req, frac * req.p_total)?;
        Ok(allocation_outage_raw(&alloc, &req.links, req.n0, req.rate)?.ln())
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (1e-9, 1.0 - 1e-9);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    while b - a > 1e-12 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2)?;
        }
    }
    allocate_reference_kkt(req, 0.5 * (a + b) * req.p_total)
}

/// Equal-power baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpaVariant {
    /// Every node, source included, gets `P_T / (m + 1)`.
    AllEqual,
    /// Source gets half; partners share the other half equally.
    HalfSource,
}

pub fn allocate_epa(req: &AllocationRequest, variant: EpaVariant) -> Result<PowerAllocation> {
    let m = req.m();
    let p_t = req.p_total;
    let alloc = if m == 0 {
        PowerAllocation::new(p_t, vec![])?
    } else {
        match variant {
            EpaVariant::AllEqual => {
                let share = p_t / (m + 1) as f64;
                PowerAllocation::new(share, vec![share; m])?
            }
            EpaVariant::HalfSource => PowerAllocation::new(p_t / 2.0, vec![p_t / (2 * m) as f64; m])?,
        }
    };
    Ok(alloc.flag_p_max(req.p_max))
}

/// Largest partner count the grid oracle accepts.
pub const GRID_ORACLE_MAX_PARTNERS: usize = 3;

/// Exhaustive search over the budget simplex at resolution `step * P_T`.
///
/// Minimizes the outage approximation; ties go to the larger source power,
/// then to more power on lower-index partners.
pub fn allocate_grid_oracle(req: &AllocationRequest, step: f64) -> Result<PowerAllocation> {
    let m = req.m();
    if m > GRID_ORACLE_MAX_PARTNERS {
        return Err(Error::TooManyPartners(m));
    }
    if !(step > 0.0 && step <= 0.5) {
        return Err(invalid(format!("grid step {step} outside (0, 0.5]")));
    }
    let units = (1.0 / step).round() as usize;
    if ((units as f64) * step - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("grid step {step} does not divide the budget")));
    }
    if m == 0 {
        return Ok(PowerAllocation::new(req.p_total, vec![])?.flag_p_max(req.p_max));
    }

    // In budget fractions the objective is lambda_0 * prod lambda_i up to a
    // constant factor: lambda_0 ~ f_s, lambda_i ~ f_s f_i / (f_s r_i + f_i s_i).
    let alpha = req.links.alpha();
    let s: Vec<f64> = req.links.pairs().iter().map(|p| p.d_sr.powf(alpha)).collect();
    let r: Vec<f64> = req.links.pairs().iter().map(|p| p.d_rd.powf(alpha)).collect();
    let unit = 1.0 / units as f64;

    struct Search<'a> {
        s: &'a [f64],
        r: &'a [f64],
        unit: f64,
        best: f64,
        best_units: Vec<usize>,
        current: Vec<usize>,
    }

    impl Search<'_> {
        fn visit(&mut self, depth: usize, remaining: usize) {
            let m = self.s.len();
            if depth == m + 1 {
                if remaining != 0 {
                    return;
                }
                let f_s = self.current[0] as f64 * self.unit;
                let mut value = f_s;
                for i in 0..m {
                    let f_r = self.current[i + 1] as f64 * self.unit;
                    let denom = f_s * self.r[i] + f_r * self.s[i];
                    value *= if denom > 0.0 { f_s * f_r / denom } else { 0.0 };
                }
                if value > self.best {
                    self.best = value;
                    self.best_units.clone_from(&self.current);
                }
                return;
            }
            if depth == m {
                self.current[depth] = remaining;
                self.visit(depth + 1, 0);
                return;
            }
            for k in (0..=remaining).rev() {
                self.current[depth] = k;
                self.visit(depth + 1, remaining - k);
            }
        }
    }

    let mut search = Search {
        s: &s,
        r: &r,
        unit,
        best: f64::NEG_INFINITY,
        best_units: vec![0; m + 1],
        current: vec![0; m + 1],
    };
    search.best_units[0] = units;
    search.visit(0, units);

    let p_t = req.p_total;
    let p_r: Vec<f64> = search.best_units[1..].iter().map(|&k| k as f64 * unit * p_t).collect();
    let p_s = p_t - p_r.iter().sum::<f64>();
    Ok(PowerAllocation::new(p_s.max(0.0), p_r)?.flag_p_max(req.p_max))
}
