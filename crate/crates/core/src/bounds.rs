//! Joint-decoding (noisy network coding) region, cut-set upper bound for the
//! Wyner model, Wyner-model SIC sum rates and constant-gap certificates.

use std::f64::consts::LN_2;
use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{NetworkInstance, WynerInstance};
use crate::schemes::{rate_wz_closed_form, QuantizationProfile, Scheme};

/// Subset enumeration is `4^L` determinant evaluations.
pub const NNC_MAX_USERS: usize = 16;

/// Slack used when checking a certificate against its constant.
pub const CERTIFICATE_SLACK: f64 = 1e-9;

fn half_log2_1p(x: f64) -> f64 {
    0.5 * x.ln_1p() / LN_2
}

/// Sum-rate bounds `R(S) <= bound(S)` for every nonempty user subset `S`, stored
/// by bit mask. No redundancy removal is done.
#[derive(Debug, Clone, PartialEq)]
pub struct NncRegion {
    users: usize,
    bounds: Vec<f64>,
    pub q: QuantizationProfile,
}

impl NncRegion {
    pub fn users(&self) -> usize {
        self.users
    }

    /// Bound for the subset with bit mask `mask` (bit `i` = user `i`).
    pub fn bound(&self, mask: usize) -> f64 {
        assert!(mask > 0 && mask < self.bounds.len(), "nonempty subset mask required");
        self.bounds[mask]
    }

    /// `(mask, bound)` for every nonempty subset.
    pub fn constraints(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.bounds.iter().copied().enumerate().skip(1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("subset,bound_bits\n");
        for (mask, b) in self.constraints() {
            let members: Vec<String> =
                (0..self.users).filter(|i| mask >> i & 1 == 1).map(|i| (i + 1).to_string()).collect();
            out.push_str(&format!("{},{}\n", members.join(" "), b));
        }
        out
    }
}

/// `½ log2 det(I + D^{-1} H_{S,T^c} Λ_S(P) H_{S,T^c}^T)` with `D = diag(N0 + q_j)`, `j ∈ T^c`.
fn access_term(net: &NetworkInstance, q: &[f64], s_mask: usize, tc: &[usize]) -> f64 {
    let senders: Vec<usize> = (0..net.users()).filter(|i| s_mask >> i & 1 == 1).collect();
    if tc.is_empty() || senders.is_empty() {
        return 0.0;
    }
    let n = tc.len();
    let scale: Vec<f64> = tc.iter().map(|&j| (net.noise() + q[j]).recip().sqrt()).collect();
    let m = DMatrix::from_fn(n, n, |r, c| {
        let (jr, jc) = (tc[r], tc[c]);
        let g: f64 = senders.iter().map(|&i| net.gain(i, jr) * net.gain(i, jc) * net.powers()[i]).sum();
        let v = scale[r] * scale[c] * g;
        if r == c {
            1.0 + v
        } else {
            v
        }
    });
    let ch = m.cholesky().expect("identity plus PSD is positive definite");
    ch.l().diagonal().iter().map(|d| d.ln()).sum::<f64>() / LN_2
}

pub fn nnc_region(net: &NetworkInstance, q: &QuantizationProfile) -> Result<NncRegion> {
    let l = net.users();
    if l > NNC_MAX_USERS {
        return Err(Error::TooManyUsers { what: "NNC region enumeration", limit: NNC_MAX_USERS, got: l });
    }
    if q.q.len() != l {
        return Err(Error::LengthMismatch { what: "quantization levels", expected: l, got: q.q.len() });
    }
    if q.q.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument("quantization levels must be positive".into()));
    }
    let full = (1usize << l) - 1;
    // unclipped per-link terms C_i - ½ log2(1 + N0/q_i)
    let link: Vec<f64> = (0..l)
        .map(|i| net.backhaul()[i] - half_log2_1p(net.noise() / q.q[i]))
        .collect();
    let backhaul_term: Vec<f64> = (0..=full)
        .map(|t| (0..l).filter(|i| t >> i & 1 == 1).map(|i| link[i]).sum())
        .collect();
    let complements: Vec<Vec<usize>> =
        (0..=full).map(|t| (0..l).filter(|i| t >> i & 1 == 0).collect()).collect();

    let mut bounds = vec![0.0];
    bounds.par_extend((1..=full).into_par_iter().map(|s| {
        (0..=full)
            .map(|t| {
                let b = backhaul_term[t];
                if b == f64::INFINITY {
                    return b;
                }
                access_term(net, &q.q, s, &complements[t]) + b
            })
            .fold(f64::INFINITY, f64::min)
    }));
    Ok(NncRegion { users: l, bounds, q: q.clone() })
}

/// The full-set constraint `R_1 + .. + R_L <= bound`.
pub fn nnc_sum_rate(region: &NncRegion) -> f64 {
    region.bound((1 << region.users) - 1)
}

/// `Σ_i min(C_i, ½ log2(1 + SNR_i + INR_{i+1,i}))`: each cut goes through the
/// access link or the backhaul link, whichever is smaller.
pub fn cutset_upper_bound_wyner(w: &WynerInstance) -> f64 {
    let net = w.network();
    (0..w.users())
        .map(|i| net.backhaul()[i].min(half_log2_1p(w.snr(i) + w.inr_from_next(i))))
        .sum()
}

/// Last user decodes and forwards: `min(½ log2(1 + SNR_L), C_L)`.
fn last_user_rate(w: &WynerInstance) -> f64 {
    let last = w.users() - 1;
    half_log2_1p(w.snr(last)).min(w.network().backhaul()[last])
}

/// Per-base-station SIC with Wyner-Ziv, decoding from user `L` down to user 1.
pub fn wyner_sum_rate_wz(w: &WynerInstance) -> f64 {
    let c = w.network().backhaul();
    let head: f64 = (0..w.users() - 1).map(|i| rate_wz_closed_form(w.snr(i), c[i])).sum();
    head + last_user_rate(w)
}

/// Same decoding order without Wyner-Ziv: the decoded neighbour leaks through
/// the quantizer of each base-station.
pub fn wyner_sum_rate_nowz(w: &WynerInstance) -> f64 {
    let c = w.network().backhaul();
    let head: f64 = (0..w.users() - 1)
        .map(|i| {
            let a = (-2.0 * c[i]).exp2();
            let leak = a * w.inr_from_next(i);
            let snr = w.snr(i);
            0.5 * ((leak + snr).ln_1p() - (leak + a * snr).ln_1p()) / LN_2
        })
        .sum();
    head + last_user_rate(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapCertificate {
    pub scheme: Scheme,
    pub users: usize,
    pub achievable_sum: f64,
    pub upper_bound: f64,
    pub gap: f64,
    /// `L - ½` with Wyner-Ziv, `½(1 + log2 3) L - ½` without.
    pub bound_limit: f64,
    pub weak_interference: bool,
}

impl GapCertificate {
    /// True when the instance is in the weak-interference regime and the gap is
    /// within the constant. Outside that regime there is nothing to certify.
    pub fn ok(&self) -> bool {
        self.weak_interference && self.gap <= self.bound_limit + CERTIFICATE_SLACK
    }
}

impl fmt::Display for GapCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "scheme={}, L={}, achievable={}, upper={}, gap={}, limit={}, ok={}",
            self.scheme,
            self.users,
            self.achievable_sum,
            self.upper_bound,
            self.gap,
            self.bound_limit,
            self.ok()
        )
    }
}

pub fn gap_limit(scheme: Scheme, users: usize) -> Result<f64> {
    let l = users as f64;
    match scheme {
        Scheme::PerBsWz => Ok(l - 0.5),
        Scheme::PerBsNoWz => Ok(0.5 * (1.0 + 3f64.log2()) * l - 0.5),
        Scheme::Baseline => Err(Error::UnsupportedScheme("baseline")),
        Scheme::ImprovedPerBs => Err(Error::UnsupportedScheme("improved")),
        Scheme::JointBs => Err(Error::UnsupportedScheme("joint")),
    }
}

pub fn gap_certificate(w: &WynerInstance, scheme: Scheme) -> Result<GapCertificate> {
    let bound_limit = gap_limit(scheme, w.users())?;
    let achievable_sum = match scheme {
        Scheme::PerBsWz => wyner_sum_rate_wz(w),
        _ => wyner_sum_rate_nowz(w),
    };
    let upper_bound = cutset_upper_bound_wyner(w);
    Ok(GapCertificate {
        scheme,
        users: w.users(),
        achievable_sum,
        upper_bound,
        gap: upper_bound - achievable_sum,
        bound_limit,
        weak_interference: w.weak_interference(),
    })
}
