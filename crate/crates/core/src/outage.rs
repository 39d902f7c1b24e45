//! AF mutual information, transmission terms and the high-SNR outage
//! approximation.
//!
//! With `m` orthogonal partners the destination sees
//! `I = log2(1 + b0 + sum a_i b_i / (a_i + b_i + 1)) / (m + 1)` and an outage
//! occurs when `I < R`, i.e. when the bracket falls below `2^((m+1)R)`.
//! At high SNR the outage probability behaves like
//!
//! ```text
//!     (2^((m+1)R) - 1)^(m+1) / ((m+1)! * lambda_0 * prod lambda_i)
//! ```
//!
//! where `lambda_0` is the mean direct SNR and `lambda_i` the harmonic-type
//! mean SNR of the i-th relayed path.

use crate::allocation::PowerAllocation;
use crate::error::{invalid, Error, Result};
use crate::geometry::{FadingRealization, NormalizedLinks};
use crate::partner::rank_score;

/// Transformed optimization variables of one allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaProfile {
    lambda0: f64,
    lambda_prime: Vec<f64>,
    zeta: Vec<f64>,
}

impl LambdaProfile {
    /// Checks `0 <= lambda'_i < 1 / D_sr_i^alpha` for every partner.
    pub fn new(lambda0: f64, lambda_prime: Vec<f64>, zeta: Vec<f64>, links: &NormalizedLinks) -> Result<Self> {
        if !(lambda0 >= 0.0) {
            return Err(invalid(format!("lambda0 must be non-negative, got {lambda0}")));
        }
        if lambda_prime.len() != links.m() || zeta.len() != links.m() {
            return Err(invalid("profile length does not match partner count"));
        }
        for (i, (&lp, pair)) in lambda_prime.iter().zip(links.pairs()).enumerate() {
            let bound = pair.d_sr.powf(links.alpha()).recip();
            if !(lp >= 0.0 && lp < bound) {
                return Err(invalid(format!(
                    "partner {i}: lambda' = {lp} outside [0, {bound})"
                )));
            }
        }
        Ok(Self {
            lambda0,
            lambda_prime,
            zeta,
        })
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn lambda_prime(&self) -> &[f64] {
        &self.lambda_prime
    }

    pub fn zeta(&self) -> &[f64] {
        &self.zeta
    }

    /// Un-normalized relay terms `lambda_i = lambda_0 * lambda'_i`.
    pub fn lambdas(&self) -> Vec<f64> {
        self.lambda_prime.iter().map(|lp| lp * self.lambda0).collect()
    }
}

/// Rate and noise settings of an outage evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageParams {
    pub rate: f64,
    pub n0: f64,
    pub m: usize,
}

impl OutageParams {
    pub fn new(rate: f64, n0: f64, m: usize) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(invalid(format!("rate must be positive, got {rate}")));
        }
        if !(n0 > 0.0) {
            return Err(invalid(format!("n0 must be positive, got {n0}")));
        }
        Ok(Self { rate, n0, m })
    }

    pub fn threshold(&self) -> f64 {
        outage_threshold(self.m, self.rate)
    }
}

/// Instantaneous AF mutual information in bits per channel use.
pub fn mutual_information(f: &FadingRealization) -> f64 {
    let m = f.m();
    let snr = f.b0 + relayed_snr(f);
    (1.0 + snr).log2() / (m + 1) as f64
}

/// `sum a_i b_i / (a_i + b_i + 1)`.
#[inline]
pub(crate) fn relayed_snr(f: &FadingRealization) -> f64 {
    f.a.iter()
        .zip(&f.b)
        .map(|(&a, &b)| a * b / (a + b + 1.0))
        .sum()
}

/// `2^((m+1)R) - 1`: SNR threshold below which `m` partners are in outage.
pub fn outage_threshold(m: usize, rate: f64) -> f64 {
    ((m + 1) as f64 * rate).exp2() - 1.0
}

/// Mean SNR terms `lambda_0` and `lambda_i` of an allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionTerms {
    pub lambda0: f64,
    pub lambdas: Vec<f64>,
}

impl TransmissionTerms {
    /// `lambda'_i = lambda_i / lambda_0`.
    pub fn normalized(&self) -> Result<Vec<f64>> {
        if self.lambda0 > 0.0 {
            Ok(self.lambdas.iter().map(|l| l / self.lambda0).collect())
        } else if self.lambdas.iter().all(|&l| l == 0.0) {
            Ok(vec![0.0; self.lambdas.len()])
        } else {
            Err(Error::UndefinedNormalization)
        }
    }
}

pub fn transmission_terms(alloc: &PowerAllocation, links: &NormalizedLinks, n0: f64) -> Result<TransmissionTerms> {
    if alloc.m() != links.m() {
        return Err(invalid(format!(
            "allocation has {} partners but link set has {}",
            alloc.m(),
            links.m()
        )));
    }
    if !(n0 > 0.0) {
        return Err(invalid(format!("n0 must be positive, got {n0}")));
    }
    let alpha = links.alpha();
    let p_s = alloc.p_s();
    let lambda0 = p_s / (n0 * links.direct_loss());
    let lambdas = alloc
        .p_r()
        .iter()
        .enumerate()
        .map(|(i, &p_r)| {
            let x = p_s / links.d_sr(i).powf(alpha);
            let y = p_r / links.d_rd(i).powf(alpha);
            if x + y > 0.0 {
                x * y / (x + y) / n0
            } else {
                0.0
            }
        })
        .collect();
    Ok(TransmissionTerms { lambda0, lambdas })
}

/// Unclamped high-SNR outage approximation; `+inf` if any term is zero.
pub fn outage_approx_raw(lambda0: f64, lambdas: &[f64], rate: f64) -> f64 {
    if lambda0 <= 0.0 || lambdas.iter().any(|&l| l <= 0.0) {
        return f64::INFINITY;
    }
    let m = lambdas.len();
    let t = outage_threshold(m, rate);
    // (m+1)! * lambda_0 * prod lambda_i, accumulated as a ratio to stay in range
    let mut value = t / lambda0;
    for (k, &l) in lambdas.iter().enumerate() {
        value *= t / (l * (k + 2) as f64);
    }
    value
}

/// High-SNR outage approximation clamped to `[0, 1]`.
pub fn outage_approx(lambda0: f64, lambdas: &[f64], rate: f64) -> f64 {
    outage_approx_raw(lambda0, lambdas, rate).min(1.0)
}

/// Convenience: approximate outage of an allocation over a link set.
pub fn allocation_outage(alloc: &PowerAllocation, links: &NormalizedLinks, n0: f64, rate: f64) -> Result<f64> {
    let t = transmission_terms(alloc, links, n0)?;
    Ok(outage_approx(t.lambda0, &t.lambdas, rate))
}

pub(crate) fn allocation_outage_raw(alloc: &PowerAllocation, links: &NormalizedLinks, n0: f64, rate: f64) -> Result<f64> {
    let t = transmission_terms(alloc, links, n0)?;
    Ok(outage_approx_raw(t.lambda0, &t.lambdas, rate))
}

/// Exact non-cooperative outage `1 - exp(-(2^R - 1) / lambda_0)`.
pub fn direct_outage_exact(lambda0: f64, rate: f64) -> f64 {
    if lambda0 <= 0.0 {
        return 1.0;
    }
    -(-outage_threshold(0, rate) / lambda0).exp_m1()
}

/// Outage of a single optimally powered relay, `(2^2R - 1)^2 / 2 * r / snr_norm^2`,
/// where `snr_norm = P_T / (N0 d_sd^alpha)` and `r` is the rank score.
pub fn two_node_outage(d_sr: f64, d_rd: f64, alpha: f64, snr_norm: f64, rate: f64) -> Result<f64> {
    if !(snr_norm > 0.0) {
        return Err(invalid(format!("normalized SNR must be positive, got {snr_norm}")));
    }
    let t = outage_threshold(1, rate);
    let r = rank_score(d_sr, d_rd, alpha)?;
    Ok((t * t / 2.0 * r / (snr_norm * snr_norm)).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::{allocate_closed_form, AllocationRequest};
    use crate::geometry::LinkPair;

    fn real(b0: f64, a: &[f64], b: &[f64]) -> FadingRealization {
        FadingRealization {
            b0,
            a: a.to_vec(),
            b: b.to_vec(),
        }
    }

    #[test]
    fn mutual_information_examples() {
        assert_eq!(mutual_information(&real(1.0, &[], &[])), 1.0);
        let v = mutual_information(&real(0.0, &[1.0], &[1.0]));
        assert!((v - 0.5 * (4.0f64 / 3.0).log2()).abs() < 1e-15);
        assert!((v - 0.20752).abs() < 1e-5);
        let lim = mutual_information(&real(3.0, &[1e9], &[4.0]));
        assert!((lim - 1.5).abs() < 1e-8);
    }

    #[test]
    fn outage_approx_examples() {
        assert!((outage_approx(100.0, &[], 1.0) - 0.01).abs() < 1e-15);
        assert!((outage_approx(100.0, &[100.0], 1.0) - 4.5e-4).abs() < 1e-15);
        let a = outage_approx(50.0, &[70.0], 1.0);
        let b = outage_approx(100.0, &[140.0], 1.0);
        assert!((a / b - 4.0).abs() < 1e-12);
        assert_eq!(outage_approx(100.0, &[0.0], 1.0), 1.0);
        assert_eq!(outage_approx(0.1, &[], 1.0), 1.0);
    }

    #[test]
    fn direct_exact_is_below_first_order_term() {
        for &l0 in &[1.5, 10.0, 100.0, 1e4] {
            let exact = direct_outage_exact(l0, 1.0);
            let approx = outage_approx(l0, &[], 1.0);
            assert!(exact <= approx);
        }
        assert!((direct_outage_exact(100.0, 1.0) - 0.0099502).abs() < 1e-7);
    }

    #[test]
    fn transmission_terms_examples() {
        let links = NormalizedLinks::from_pairs(1.0, 2.0, vec![LinkPair::new(1.0, 1.0)]).unwrap();
        let zero = PowerAllocation::new(1.0, vec![0.0]).unwrap();
        let t = transmission_terms(&zero, &links, 1.0).unwrap();
        assert_eq!(t.lambdas, vec![0.0]);

        let equal = PowerAllocation::new(1.0, vec![1.0]).unwrap();
        let t = transmission_terms(&equal, &links, 1.0).unwrap();
        assert!((t.lambdas[0] - t.lambda0 / 2.0).abs() < 1e-15);

        let links = NormalizedLinks::from_pairs(1.0, 2.0, vec![LinkPair::new(0.5, 0.5)]).unwrap();
        let opt = PowerAllocation::new(2.0 / 3.0, vec![1.0 / 3.0]).unwrap();
        let lp = transmission_terms(&opt, &links, 1.0).unwrap().normalized().unwrap();
        assert!((lp[0] - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn normalization_undefined_without_direct_term() {
        let t = TransmissionTerms {
            lambda0: 0.0,
            lambdas: vec![1.0],
        };
        assert_eq!(t.normalized(), Err(Error::UndefinedNormalization));
    }

    #[test]
    fn two_node_outage_examples() {
        let v = two_node_outage(0.5, 0.5, 2.0, 100.0, 1.0).unwrap();
        assert!((v - 7.59375e-4).abs() < 1e-15);
        let h = two_node_outage(0.5, 0.5, 2.0, 200.0, 1.0).unwrap();
        assert!((v / h - 4.0).abs() < 1e-12);
    }

    #[test]
    fn two_node_outage_equals_closed_form_outage() {
        for &(d_sr, d_rd) in &[(0.5, 0.5), (1.0, 0.5), (0.3, 1.2), (0.97, 0.31)] {
            for &alpha in &[2.0, 3.5] {
                let links = NormalizedLinks::from_pairs(100.0, alpha, vec![LinkPair::new(d_sr, d_rd)]).unwrap();
                let n0 = 1e-4;
                let snr_norm = 1e3;
                let p_total = snr_norm * n0 * links.direct_loss();
                let req = AllocationRequest::new(links.clone(), p_total, n0, 1.0, None).unwrap();
                let alloc = allocate_closed_form(&req).unwrap();
                let via_alloc = allocation_outage(&alloc, &links, n0, 1.0).unwrap();
                let direct = two_node_outage(d_sr, d_rd, alpha, snr_norm, 1.0).unwrap();
                assert!((via_alloc / direct - 1.0).abs() < 1e-12, "{via_alloc} vs {direct}");
            }
        }
    }

    #[test]
    fn profile_rejects_out_of_region_values() {
        let links = NormalizedLinks::from_pairs(1.0, 2.0, vec![LinkPair::new(0.5, 0.5)]).unwrap();
        assert!(LambdaProfile::new(1.0, vec![4.0], vec![1.0], &links).is_err());
        assert!(LambdaProfile::new(1.0, vec![3.9], vec![1.0], &links).is_ok());
        assert!(LambdaProfile::new(-1.0, vec![1.0], vec![1.0], &links).is_err());
    }
}
