use itertools::Itertools;

use super::{rates_for, DecodingOrder, RateVector, Scheme};
use crate::error::{Error, Result};
use crate::network::NetworkInstance;

/// Orders users by decreasing pre-SIC SINR (all interferers present); ties go to
/// the lower user index.
pub fn sinr_descending_order(net: &NetworkInstance) -> DecodingOrder {
    let l = net.users();
    let r = net.derive_ratios();
    let sinr: Vec<f64> = (0..l)
        .map(|i| r.snr[i] / (1.0 + (0..l).filter(|&j| j != i).map(|j| r.inr[(j, i)]).sum::<f64>()))
        .collect();
    let mut users: Vec<usize> = (0..l).collect();
    users.sort_by(|&a, &b| sinr[b].total_cmp(&sinr[a]).then(a.cmp(&b)));
    DecodingOrder::new(users).expect("sorted indices form a permutation")
}

fn factorial_at_most(n: usize, limit: u64) -> bool {
    let mut acc: u64 = 1;
    for k in 2..=n as u64 {
        acc = match acc.checked_mul(k) {
            Some(v) if v <= limit => v,
            _ => return false,
        };
    }
    acc <= limit
}

/// Sum-rate maximizing order by exhaustive search when `L! <= exhaustive_limit`
/// (first in lexicographic order among ties), otherwise the SINR-descending order.
pub fn best_decoding_order(
    net: &NetworkInstance,
    scheme: Scheme,
    exhaustive_limit: u64,
) -> Result<(DecodingOrder, RateVector)> {
    if exhaustive_limit == 0 {
        return Err(Error::InvalidArgument("exhaustive limit must be at least 1".into()));
    }
    if scheme == Scheme::JointBs {
        return Err(Error::UnsupportedScheme("joint"));
    }
    let l = net.users();
    if !factorial_at_most(l, exhaustive_limit) {
        let order = sinr_descending_order(net);
        let rates = rates_for(net, &order, scheme)?;
        return Ok((order, rates));
    }
    let mut best: Option<(DecodingOrder, RateVector)> = None;
    for perm in (0..l).permutations(l) {
        let order = DecodingOrder::new(perm)?;
        let rates = rates_for(net, &order, scheme)?;
        let better = match &best {
            None => true,
            Some((_, b)) => rates.sum() > b.sum() + 1e-12 * b.sum().abs().max(1.0),
        };
        if better {
            best = Some((order, rates));
        }
    }
    Ok(best.expect("at least one permutation"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{make_symmetric_two_user, make_wyner, random_instance, RandomInstanceSpec};

    #[test]
    fn wyner_prefers_reverse_order() {
        let w = make_wyner(&[100.0, 200.0, 300.0], &[50.0, 80.0], &[3.0, 3.0, 3.0]).unwrap();
        let (order, _) = best_decoding_order(w.network(), Scheme::PerBsWz, 720).unwrap();
        assert_eq!(order.perm(), &[2, 1, 0]);
    }

    #[test]
    fn symmetric_tie_goes_to_lexicographic_first() {
        let net = make_symmetric_two_user(1000.0, 100.0, 5.0).unwrap();
        let (order, r) = best_decoding_order(&net, Scheme::PerBsWz, 2).unwrap();
        assert_eq!(order.perm(), &[0, 1]);
        let other = rates_for(&net, &DecodingOrder::reversed(2), Scheme::PerBsWz).unwrap();
        assert!((r.sum() - other.sum()).abs() < 1e-12);
    }

    #[test]
    fn falls_back_to_heuristic_for_large_networks() {
        let spec = RandomInstanceSpec { users: 8, ..Default::default() };
        let net = random_instance(3, &spec);
        let (order, _) = best_decoding_order(&net, Scheme::PerBsWz, 5040).unwrap();
        assert_eq!(order, sinr_descending_order(&net));
    }

    #[test]
    fn exhaustive_beats_every_order() {
        let spec = RandomInstanceSpec { users: 4, ..Default::default() };
        for seed in 0..10 {
            let net = random_instance(seed, &spec);
            for scheme in [Scheme::PerBsWz, Scheme::PerBsNoWz] {
                let (_, best) = best_decoding_order(&net, scheme, 24).unwrap();
                for perm in (0..4).permutations(4) {
                    let r = rates_for(&net, &DecodingOrder::new(perm).unwrap(), scheme).unwrap();
                    assert!(r.sum() <= best.sum() + 1e-9);
                }
            }
        }
    }

    #[test]
    fn heuristic_ties_by_index() {
        let net = make_symmetric_two_user(10.0, 1.0, 1.0).unwrap();
        assert_eq!(sinr_descending_order(&net).perm(), &[0, 1]);
    }

    #[test]
    fn rejects_bad_arguments() {
        let net = make_symmetric_two_user(10.0, 1.0, 1.0).unwrap();
        assert!(best_decoding_order(&net, Scheme::PerBsWz, 0).is_err());
        assert!(best_decoding_order(&net, Scheme::JointBs, 10).is_err());
    }
}
