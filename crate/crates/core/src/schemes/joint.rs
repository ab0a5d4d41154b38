//! Schemes that decode each message from several quantized descriptions. Rates
//! are mutual informations of the joint Gaussian model, evaluated with the
//! log-det kernel.

use std::f64::consts::LN_2;

use super::{DecodingOrder, QuantizationProfile, RateVector, Scheme};
use crate::error::{Error, Result};
use crate::gaussian::GaussianModel;
use crate::network::NetworkInstance;

/// Slack on the backhaul feasibility test.
const FEASIBILITY_TOL: f64 = 1e-9;

/// `var / (2^{2c} - 1)`: the quantization noise giving `½ log2(1 + var/q) = c`.
pub(crate) fn filling_noise(var: f64, c: f64) -> f64 {
    if c == 0.0 {
        f64::INFINITY
    } else {
        var / (2.0 * c * LN_2).exp_m1()
    }
}

/// Quantization levels for the improved per-base-station scheme, solved stage by
/// stage so that `I(Y_k; Ŷ_k | decoded messages, earlier descriptions) = C_k`.
pub fn improved_quantization(net: &NetworkInstance, order: &DecodingOrder) -> Result<QuantizationProfile> {
    order.check(net)?;
    let l = net.users();
    let mut q = vec![f64::INFINITY; l];
    for stage in 0..l {
        let k = order.user_at(stage);
        let model = GaussianModel::new(net, &q);
        let before = order.decoded_before(k);
        let mut cond = model.xs(before);
        cond.extend(model.yhats(before));
        let var = model.conditional_variance(model.y(k), &cond);
        q[k] = filling_noise(var, net.backhaul()[k]);
    }
    Ok(QuantizationProfile { q })
}

/// `R_k = I(X_k; Ŷ of stations decoded so far including k | decoded messages)`.
pub fn rates_improved_per_bs_sic(net: &NetworkInstance, order: &DecodingOrder) -> Result<RateVector> {
    let q = improved_quantization(net, order)?.q;
    let model = GaussianModel::new(net, &q);
    let rates = (0..net.users())
        .map(|k| {
            let seen = &order.perm()[..=order.stage_of(k)];
            model.mi(&model.yhats(seen), &[model.x(k)], &model.xs(order.decoded_before(k)))
        })
        .collect();
    Ok(RateVector { rates, order: Some(order.clone()), scheme: Scheme::ImprovedPerBs })
}

fn check_profile(net: &NetworkInstance, q: &QuantizationProfile) -> Result<()> {
    if q.q.len() != net.users() {
        return Err(Error::LengthMismatch {
            what: "quantization levels",
            expected: net.users(),
            got: q.q.len(),
        });
    }
    if q.q.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument("quantization levels must be positive".into()));
    }
    Ok(())
}

/// Backhaul each description needs when descriptions are recovered in `order`
/// before any message: `I(Y_k; Ŷ_k | earlier descriptions)`.
pub fn joint_backhaul_usage(
    net: &NetworkInstance,
    order: &DecodingOrder,
    q: &QuantizationProfile,
) -> Result<Vec<f64>> {
    order.check(net)?;
    check_profile(net, q)?;
    let model = GaussianModel::new(net, &q.q);
    Ok((0..net.users())
        .map(|k| match model.yhat(k) {
            None => 0.0,
            Some(own) => model.mi(&[model.y(k)], &[own], &model.yhats(order.decoded_before(k))),
        })
        .collect())
}

/// Joint-base-station SIC: all descriptions first, then messages in `order`.
/// Returns the rates and, per user, whether its link carries the description.
pub fn rates_joint_bs_sic(
    net: &NetworkInstance,
    order: &DecodingOrder,
    q: &QuantizationProfile,
) -> Result<(RateVector, Vec<bool>)> {
    let usage = joint_backhaul_usage(net, order, q)?;
    let model = GaussianModel::new(net, &q.q);
    let all: Vec<usize> = (0..net.users()).collect();
    let observed = model.yhats(&all);
    let rates = (0..net.users())
        .map(|k| model.mi(&observed, &[model.x(k)], &model.xs(order.decoded_before(k))))
        .collect();
    let feasible = usage
        .iter()
        .zip(net.backhaul())
        .map(|(&u, &c)| u <= c + FEASIBILITY_TOL)
        .collect();
    Ok((RateVector { rates, order: Some(order.clone()), scheme: Scheme::JointBs }, feasible))
}

/// Common quantization level for the symmetric two-user joint scheme such that
/// the two descriptions use `2c` bits in total.
pub fn two_user_symmetric_joint_q(snr: f64, inr: f64, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("backhaul must be positive, got {c}")));
    }
    if !(snr >= 0.0 && inr >= 0.0) {
        return Err(Error::InvalidArgument("SNR and INR must be non-negative".into()));
    }
    let a = 1.0 + snr + inr;
    let b = snr * inr;
    // (a + sqrt(4b + t(a²-4b))) / (t - 1), t = 2^{4c}, scaled by 1/t to stay finite
    let inv_t = (-4.0 * c).exp2();
    let root = (4.0 * b * inv_t * inv_t + (a * a - 4.0 * b) * inv_t).sqrt();
    Ok((a * inv_t + root) / (1.0 - inv_t))
}
