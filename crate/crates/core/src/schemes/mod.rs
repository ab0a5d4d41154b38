//! Achievable rates of successive-interference-cancellation schemes at the
//! central processor, their two-user regions and decoding-order search.

mod joint;
mod order;
mod per_bs;
mod region;

pub use joint::{
    joint_backhaul_usage, rates_improved_per_bs_sic, improved_quantization, rates_joint_bs_sic,
    two_user_symmetric_joint_q,
};
pub(crate) use joint::filling_noise;
pub use order::{best_decoding_order, sinr_descending_order};
pub use per_bs::{
    effective_sinr_nowz, effective_sinr_wz, half_bit_point, rate_wz_closed_form, rates_baseline,
    rates_per_bs_sic_nowz, rates_per_bs_sic_wz, sic_limit, sinr_bars, wz_quantization,
};
pub use region::{two_user_region, TwoUserRegion};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::network::NetworkInstance;

/// SIC order at the central processor: `perm[k]` is the user decoded at stage `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecodingOrder {
    perm: Vec<usize>,
    stage_of: Vec<usize>,
}

impl DecodingOrder {
    /// Zero-based permutation of `0..L`.
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let l = perm.len();
        let mut stage_of = vec![usize::MAX; l];
        for (stage, &user) in perm.iter().enumerate() {
            if user >= l || stage_of[user] != usize::MAX {
                return Err(Error::InvalidOrder(l));
            }
            stage_of[user] = stage;
        }
        Ok(Self { perm, stage_of })
    }

    pub fn identity(l: usize) -> Self {
        Self::new((0..l).collect()).expect("identity is a permutation")
    }

    /// Decode the last user first: `L, L-1, .., 1`.
    pub fn reversed(l: usize) -> Self {
        Self::new((0..l).rev().collect()).expect("reversal is a permutation")
    }

    /// Parses `"3,2,1"` style one-based orders.
    pub fn parse_one_based(s: &str) -> Result<Self> {
        let perm = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .ok()
                    .and_then(|v| v.checked_sub(1))
                    .ok_or_else(|| Error::InvalidArgument(format!("bad order entry `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(perm)
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn user_at(&self, stage: usize) -> usize {
        self.perm[stage]
    }

    pub fn stage_of(&self, user: usize) -> usize {
        self.stage_of[user]
    }

    /// Users decoded before `user`.
    pub fn decoded_before(&self, user: usize) -> &[usize] {
        &self.perm[..self.stage_of[user]]
    }

    /// Users decoded after `user`.
    pub fn decoded_after(&self, user: usize) -> &[usize] {
        &self.perm[self.stage_of[user] + 1..]
    }

    pub(crate) fn check(&self, net: &NetworkInstance) -> Result<()> {
        if self.len() != net.users() {
            return Err(Error::InvalidOrder(net.users()));
        }
        Ok(())
    }
}

impl fmt::Display for DecodingOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, u) in self.perm.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", u + 1)?;
        }
        Ok(())
    }
}

/// Per-base-station quantization noise variances; `+inf` means the description
/// carries nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationProfile {
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Each base-station decodes its own user, treating interference as noise.
    Baseline,
    /// Per-base-station SIC with Wyner-Ziv compression.
    PerBsWz,
    /// Per-base-station SIC with plain vector quantization.
    PerBsNoWz,
    /// Per-base-station SIC that also uses earlier quantized descriptions.
    ImprovedPerBs,
    /// All descriptions first, then SIC over the messages.
    JointBs,
}

impl Scheme {
    pub const ALL: [Scheme; 5] =
        [Scheme::Baseline, Scheme::PerBsWz, Scheme::PerBsNoWz, Scheme::ImprovedPerBs, Scheme::JointBs];

    pub fn tag(self) -> &'static str {
        match self {
            Scheme::Baseline => "baseline",
            Scheme::PerBsWz => "wz",
            Scheme::PerBsNoWz => "nowz",
            Scheme::ImprovedPerBs => "improved",
            Scheme::JointBs => "joint",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(Scheme::Baseline),
            "wz" | "per-bs-wz" | "per-bs-sic-wz" => Ok(Scheme::PerBsWz),
            "nowz" | "per-bs-nowz" | "per-bs-sic-nowz" => Ok(Scheme::PerBsNoWz),
            "improved" | "improved-per-bs" => Ok(Scheme::ImprovedPerBs),
            "joint" | "joint-bs" => Ok(Scheme::JointBs),
            _ => Err(Error::UnknownScheme(s.to_string())),
        }
    }
}

/// Per-user rates in bits per real channel use, indexed by user (not by stage).
#[derive(Debug, Clone, PartialEq)]
pub struct RateVector {
    pub rates: Vec<f64>,
    /// `None` for order-independent schemes.
    pub order: Option<DecodingOrder>,
    pub scheme: Scheme,
}

impl RateVector {
    pub fn sum(&self) -> f64 {
        self.rates.iter().sum()
    }

    /// `user,rate_bits` with one-based user indices.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("user,rate_bits\n");
        for (i, r) in self.rates.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, r));
        }
        out
    }
}

/// Rates of an order-dependent scheme; the joint-BS scheme needs an explicit
/// quantization profile and is served by [`rates_joint_bs_sic`] instead.
pub fn rates_for(net: &NetworkInstance, order: &DecodingOrder, scheme: Scheme) -> Result<RateVector> {
    match scheme {
        Scheme::Baseline => Ok(rates_baseline(net)),
        Scheme::PerBsWz => rates_per_bs_sic_wz(net, order),
        Scheme::PerBsNoWz => rates_per_bs_sic_nowz(net, order),
        Scheme::ImprovedPerBs => rates_improved_per_bs_sic(net, order),
        Scheme::JointBs => Err(Error::UnsupportedScheme("joint")),
    }
}
