//! Closed-form rates of per-base-station SIC, its infinite-backhaul limit and
//! the interference-as-noise baseline.

use std::f64::consts::LN_2;

use super::{DecodingOrder, QuantizationProfile, RateVector, Scheme};
use crate::error::{Error, Result};
use crate::network::NetworkInstance;

/// `2^{-2c}`, zero for infinite capacity.
fn backhaul_attenuation(c: f64) -> f64 {
    (-2.0 * c).exp2()
}

/// `½ log2((1 + s) / (1 + 2^{-2c} s))`.
pub fn rate_wz_closed_form(sinr: f64, c: f64) -> f64 {
    let r = 0.5 * (sinr.ln_1p() - (backhaul_attenuation(c) * sinr).ln_1p()) / LN_2;
    r.max(0.0)
}

fn interference(net: &NetworkInstance, users: &[usize], bs: usize) -> f64 {
    users.iter().map(|&j| net.received_power(j, bs)).sum::<f64>() / net.noise()
}

/// `SNR_k / (1 + Σ_{j decoded after k} INR_{j,k})` for the user decoded at `stage`.
pub fn effective_sinr_wz(net: &NetworkInstance, order: &DecodingOrder, stage: usize) -> Result<f64> {
    order.check(net)?;
    if stage >= order.len() {
        return Err(Error::InvalidArgument(format!("stage {stage} out of range")));
    }
    let k = order.user_at(stage);
    Ok(sinr_wz_unchecked(net, order, k))
}

fn sinr_wz_unchecked(net: &NetworkInstance, order: &DecodingOrder, k: usize) -> f64 {
    let snr = net.received_power(k, k) / net.noise();
    snr / (1.0 + interference(net, order.decoded_after(k), k))
}

/// Effective SINR of every user, indexed by user.
pub fn sinr_bars(net: &NetworkInstance, order: &DecodingOrder) -> Result<Vec<f64>> {
    order.check(net)?;
    Ok((0..net.users()).map(|k| sinr_wz_unchecked(net, order, k)).collect())
}

/// Effective SINR without Wyner-Ziv coding: already-decoded interferers leak
/// through the quantizer with weight `2^{-2C_k}`.
pub fn effective_sinr_nowz(net: &NetworkInstance, order: &DecodingOrder, stage: usize) -> Result<f64> {
    order.check(net)?;
    if stage >= order.len() {
        return Err(Error::InvalidArgument(format!("stage {stage} out of range")));
    }
    Ok(sinr_nowz_unchecked(net, order, order.user_at(stage)))
}

fn sinr_nowz_unchecked(net: &NetworkInstance, order: &DecodingOrder, k: usize) -> f64 {
    let snr = net.received_power(k, k) / net.noise();
    let after = interference(net, order.decoded_after(k), k);
    let before = interference(net, order.decoded_before(k), k);
    snr / (1.0 + after + backhaul_attenuation(net.backhaul()[k]) * before)
}

/// Quantization noise that exactly fills each backhaul link when the decoded
/// users act as side information.
pub fn wz_quantization(net: &NetworkInstance, order: &DecodingOrder) -> Result<QuantizationProfile> {
    order.check(net)?;
    let q = (0..net.users())
        .map(|k| {
            let c = net.backhaul()[k];
            if c == 0.0 {
                return f64::INFINITY;
            }
            let undecoded: f64 = order.perm()[order.stage_of(k)..]
                .iter()
                .map(|&j| net.received_power(j, k))
                .sum();
            (net.noise() + undecoded) / (2.0 * c * LN_2).exp_m1()
        })
        .collect();
    Ok(QuantizationProfile { q })
}

pub fn rates_per_bs_sic_wz(net: &NetworkInstance, order: &DecodingOrder) -> Result<RateVector> {
    let sinr = sinr_bars(net, order)?;
    let rates = sinr
        .iter()
        .zip(net.backhaul())
        .map(|(&s, &c)| rate_wz_closed_form(s, c))
        .collect();
    Ok(RateVector { rates, order: Some(order.clone()), scheme: Scheme::PerBsWz })
}

/// Infinite-backhaul SIC rates `½ log2(1 + SINR̄_k)`.
pub fn sic_limit(net: &NetworkInstance, order: &DecodingOrder) -> Result<RateVector> {
    let sinr = sinr_bars(net, order)?;
    let rates = sinr.iter().map(|&s| rate_wz_closed_form(s, f64::INFINITY)).collect();
    Ok(RateVector { rates, order: Some(order.clone()), scheme: Scheme::PerBsWz })
}

/// Backhaul `c = ½ log2(1 + s)` and the rate loss against the SIC limit there.
pub fn half_bit_point(sinr_bar: f64) -> Result<(f64, f64)> {
    if !(sinr_bar >= 0.0) {
        return Err(Error::InvalidArgument(format!("SINR must be non-negative, got {sinr_bar}")));
    }
    let c = 0.5 * sinr_bar.ln_1p() / LN_2;
    let gap = if sinr_bar.is_infinite() {
        0.5
    } else {
        0.5 * (sinr_bar / (1.0 + sinr_bar)).ln_1p() / LN_2
    };
    Ok((c, gap))
}

pub fn rates_per_bs_sic_nowz(net: &NetworkInstance, order: &DecodingOrder) -> Result<RateVector> {
    order.check(net)?;
    let rates = (0..net.users())
        .map(|k| rate_wz_closed_form(sinr_nowz_unchecked(net, order, k), net.backhaul()[k]))
        .collect();
    Ok(RateVector { rates, order: Some(order.clone()), scheme: Scheme::PerBsNoWz })
}

/// Single-user decoding at each base-station, capped by its backhaul.
pub fn rates_baseline(net: &NetworkInstance) -> RateVector {
    let l = net.users();
    let rates = (0..l)
        .map(|i| {
            let others: Vec<usize> = (0..l).filter(|&j| j != i).collect();
            let snr = net.received_power(i, i) / net.noise();
            let sinr = snr / (1.0 + interference(net, &others, i));
            (0.5 * sinr.ln_1p() / LN_2).min(net.backhaul()[i])
        })
        .collect();
    RateVector { rates, order: None, scheme: Scheme::Baseline }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GaussianModel;
    use crate::network::{linear_to_db, make_symmetric_two_user};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // Frozen from an independent numpy evaluation of I(X_k; Ŷ_k | decoded) on
    // the joint Gaussian covariance with q_k from the backhaul-filling identity.
    const WZ_FIRST: f64 = 1.7162524756513415;
    const WZ_SECOND: f64 = 4.492116342070793;
    const NOWZ_SECOND: f64 = 4.457399474303466;
    const BASELINE: f64 = 1.7231936354062871;

    fn strong_interference() -> NetworkInstance {
        make_symmetric_two_user(1000.0, 100.0, 5.0).unwrap()
    }

    #[test]
    fn effective_sinr_examples() {
        let net = strong_interference();
        let order = DecodingOrder::identity(2);
        assert_relative_eq!(effective_sinr_wz(&net, &order, 1).unwrap(), 1000.0, max_relative = 1e-12);
        assert_relative_eq!(effective_sinr_wz(&net, &order, 0).unwrap(), 1000.0 / 101.0, max_relative = 1e-12);
        let zero = make_symmetric_two_user(0.0, 100.0, 5.0).unwrap();
        assert_eq!(effective_sinr_wz(&zero, &order, 0).unwrap(), 0.0);
        assert!(effective_sinr_wz(&net, &DecodingOrder::identity(3), 0).is_err());
    }

    #[test]
    fn quantization_examples() {
        let net = NetworkInstance::new(
            nalgebra::DMatrix::from_element(1, 1, 1000f64.sqrt()),
            vec![1.0],
            1.0,
            vec![5.0],
        )
        .unwrap();
        let order = DecodingOrder::identity(1);
        assert_relative_eq!(wz_quantization(&net, &order).unwrap().q[0], 1001.0 / 1023.0, max_relative = 1e-12);
        let inf = net.with_uniform_backhaul(f64::INFINITY).unwrap();
        assert_eq!(wz_quantization(&inf, &order).unwrap().q[0], 0.0);
        let zero = net.with_uniform_backhaul(0.0).unwrap();
        assert!(wz_quantization(&zero, &order).unwrap().q[0].is_infinite());
    }

    #[test]
    fn quantization_fills_the_backhaul() {
        let net = strong_interference();
        for order in [DecodingOrder::identity(2), DecodingOrder::reversed(2)] {
            let q = wz_quantization(&net, &order).unwrap().q;
            let model = GaussianModel::new(&net, &q);
            for k in 0..2 {
                let used = model.mi(
                    &[model.y(k)],
                    &model.yhats(&[k]),
                    &model.xs(order.decoded_before(k)),
                );
                assert!((used - 5.0).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn two_user_wz_rates() {
        let r = rates_per_bs_sic_wz(&strong_interference(), &DecodingOrder::identity(2)).unwrap();
        assert!((r.rates[0] - WZ_FIRST).abs() <= 1e-12);
        assert!((r.rates[1] - WZ_SECOND).abs() <= 1e-12);
        let r = rates_per_bs_sic_wz(&strong_interference(), &DecodingOrder::reversed(2)).unwrap();
        assert!((r.rates[1] - WZ_FIRST).abs() <= 1e-12);
        assert!((r.rates[0] - WZ_SECOND).abs() <= 1e-12);
    }

    #[test]
    fn zero_and_infinite_backhaul() {
        let order = DecodingOrder::identity(2);
        let zero = strong_interference().with_uniform_backhaul(0.0).unwrap();
        assert!(rates_per_bs_sic_wz(&zero, &order).unwrap().rates.iter().all(|&r| r == 0.0));
        let inf = strong_interference().with_uniform_backhaul(f64::INFINITY).unwrap();
        let r = rates_per_bs_sic_wz(&inf, &order).unwrap();
        assert_relative_eq!(r.rates[0], 0.5 * (1.0 + 1000.0 / 101.0f64).log2(), max_relative = 1e-14);
        assert_eq!(r.rates, sic_limit(&strong_interference(), &order).unwrap().rates);
    }

    #[test]
    fn sic_limit_scalar() {
        let net = NetworkInstance::new(nalgebra::DMatrix::from_element(1, 1, 10.0), vec![1.0], 1.0, vec![1.0]).unwrap();
        let r = sic_limit(&net, &DecodingOrder::identity(1)).unwrap();
        assert_relative_eq!(r.rates[0], 3.3291057413758973, epsilon = 1e-12);
    }

    #[test]
    fn half_bit_examples() {
        let (c, gap) = half_bit_point(100.0).unwrap();
        assert_relative_eq!(c, 3.3291057413758973, epsilon = 1e-12);
        assert_relative_eq!(gap, 0.4964201042135669, epsilon = 1e-12);
        assert_eq!(half_bit_point(0.0).unwrap().1, 0.0);
        let (_, big) = half_bit_point(1e12).unwrap();
        assert!(big < 0.5 && big > 0.4999999);
        assert!(half_bit_point(-1.0).is_err());
    }

    #[test]
    fn nowz_examples() {
        let net = strong_interference();
        let order = DecodingOrder::identity(2);
        let r = rates_per_bs_sic_nowz(&net, &order).unwrap();
        assert!((r.rates[0] - WZ_FIRST).abs() <= 1e-12);
        assert!((r.rates[1] - NOWZ_SECOND).abs() <= 1e-12);
        assert_relative_eq!(
            effective_sinr_nowz(&net, &order, 1).unwrap(),
            1000.0 / (1.0 + 100.0 / 1024.0),
            max_relative = 1e-12
        );
        let inf = net.with_uniform_backhaul(f64::INFINITY).unwrap();
        assert_eq!(
            rates_per_bs_sic_nowz(&inf, &order).unwrap().rates,
            rates_per_bs_sic_wz(&inf, &order).unwrap().rates
        );
    }

    #[test]
    fn baseline_examples() {
        let r = rates_baseline(&strong_interference());
        assert!((r.rates[0] - BASELINE).abs() <= 1e-12 && (r.rates[1] - BASELINE).abs() <= 1e-12);
        let r = rates_baseline(&strong_interference().with_uniform_backhaul(2.0).unwrap());
        assert!((r.rates[0] - BASELINE).abs() <= 1e-12);
        let r = rates_baseline(&strong_interference().with_uniform_backhaul(1.0).unwrap());
        assert_eq!(r.rates, vec![1.0, 1.0]);
        let r = rates_baseline(&make_symmetric_two_user(0.0, 10.0, 5.0).unwrap());
        assert_eq!(r.rates, vec![0.0, 0.0]);
    }

    #[test]
    fn operating_points_db() {
        assert_relative_eq!(linear_to_db(1000.0), 30.0);
    }

    proptest! {
        #[test]
        fn rate_monotone_in_backhaul_and_sinr(s_db in -10.0f64..50.0, c in 0.01f64..12.0, dc in 0.01f64..2.0) {
            let s = 10f64.powf(s_db / 10.0);
            prop_assert!(rate_wz_closed_form(s, c + dc) > rate_wz_closed_form(s, c));
            prop_assert!(rate_wz_closed_form(s * 1.5, c) > rate_wz_closed_form(s, c));
            prop_assert!(rate_wz_closed_form(s, c) <= rate_wz_closed_form(s, f64::INFINITY));
        }

        #[test]
        fn half_bit_gap_bounded(s_db in -10.0f64..50.0) {
            let s = 10f64.powf(s_db / 10.0);
            let (c, gap) = half_bit_point(s).unwrap();
            let direct = rate_wz_closed_form(s, f64::INFINITY) - rate_wz_closed_form(s, c);
            prop_assert!((direct - gap).abs() <= 1e-9);
            prop_assert!(gap > 0.0 && gap <= 0.5);
        }
    }
}
