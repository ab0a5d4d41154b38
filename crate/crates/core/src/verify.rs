//! Fixed-seed property suites used as a release gate, plus the covariance-based
//! reference evaluations they compare against.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alloc::{allocation_oracle_grid, allocation_sum_rate, kkt_residual, optimal_allocation, water_fill};
use crate::bounds::{
    cutset_upper_bound_wyner, gap_certificate, nnc_region, nnc_sum_rate, wyner_sum_rate_nowz, wyner_sum_rate_wz,
};
use crate::error::Result;
use crate::gaussian::GaussianModel;
use crate::schemes::filling_noise;
use crate::network::{random_instance, NetworkInstance, RandomInstanceSpec, WynerInstance};
use crate::schemes::{
    best_decoding_order, half_bit_point, rate_wz_closed_form, rates_improved_per_bs_sic, rates_per_bs_sic_nowz,
    rates_per_bs_sic_wz, two_user_region, wz_quantization, DecodingOrder, QuantizationProfile, Scheme,
};
use crate::sim::{run_campaign, AllocationMode, Campaign, SimConfig};

/// `I(X_k; Ŷ_k | decoded)` with `q_k` spending exactly `C_k` given decoded messages.
pub fn wz_rates_via_kernel(net: &NetworkInstance, order: &DecodingOrder) -> Vec<f64> {
    let l = net.users();
    let bare = GaussianModel::new(net, &vec![f64::INFINITY; l]);
    let q: Vec<f64> = (0..l)
        .map(|k| {
            let var = bare.conditional_variance(bare.y(k), &bare.xs(order.decoded_before(k)));
            filling_noise(var, net.backhaul()[k])
        })
        .collect();
    let model = GaussianModel::new(net, &q);
    (0..l)
        .map(|k| model.mi(&model.yhats(&[k]), &[model.x(k)], &model.xs(order.decoded_before(k))))
        .collect()
}

/// Same, with `q_k` spending `C_k` on the unconditioned observation.
pub fn nowz_rates_via_kernel(net: &NetworkInstance, order: &DecodingOrder) -> Vec<f64> {
    let l = net.users();
    let bare = GaussianModel::new(net, &vec![f64::INFINITY; l]);
    let q: Vec<f64> = (0..l)
        .map(|k| filling_noise(bare.conditional_variance(bare.y(k), &[]), net.backhaul()[k]))
        .collect();
    let model = GaussianModel::new(net, &q);
    (0..l)
        .map(|k| model.mi(&model.yhats(&[k]), &[model.x(k)], &model.xs(order.decoded_before(k))))
        .collect()
}

pub fn random_order<R: Rng>(rng: &mut R, l: usize) -> DecodingOrder {
    let mut perm: Vec<usize> = (0..l).collect();
    perm.shuffle(rng);
    DecodingOrder::new(perm).expect("shuffle is a permutation")
}

/// Trial `i` of the weak-interference Wyner ensemble: SNR in [0, 60] dB,
/// C in [0, 12] bits.
pub fn wyner_trial(seed: u64, i: u64, users: usize) -> WynerInstance {
    let spec = RandomInstanceSpec {
        users,
        snr_range_db: (0.0, 60.0),
        backhaul_range: (0.0, 12.0),
        wyner: true,
        ..Default::default()
    };
    let s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i);
    WynerInstance::from_network(random_instance(s, &spec)).expect("generator emits the Wyner pattern")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.name, self.detail)
    }
}

struct Tally {
    trials: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn new() -> Self {
        Self { trials: 0, failures: 0, worst: f64::NEG_INFINITY }
    }

    fn record(&mut self, ok: bool, value: f64) {
        self.trials += 1;
        self.failures += usize::from(!ok);
        if value.is_finite() {
            self.worst = self.worst.max(value);
        }
    }

    fn outcome(self, name: &'static str, what: &str) -> CheckOutcome {
        CheckOutcome {
            name,
            passed: self.failures == 0,
            detail: if self.worst.is_finite() {
                format!("{} trials, {} failures, worst {what} {:.3e}", self.trials, self.failures, self.worst)
            } else {
                format!("{} trials, {} failures", self.trials, self.failures)
            },
        }
    }
}

fn rng(seed: u64, suite: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(suite);
    r
}

fn instance(rng: &mut ChaCha8Rng, max_users: usize) -> NetworkInstance {
    let spec = RandomInstanceSpec { users: rng.random_range(1..=max_users), ..Default::default() };
    random_instance(rng.random(), &spec)
}

fn check_ratio_scaling(seed: u64) -> CheckOutcome {
    let mut r = rng(seed, 1);
    let mut t = Tally::new();
    for _ in 0..500 {
        let net = instance(&mut r, 5);
        let k: f64 = r.random_range(0.01..100.0);
        let scaled = NetworkInstance::new(
            net.gains().clone(),
            net.powers().iter().map(|p| p * k).collect(),
            net.noise() * k,
            net.backhaul().to_vec(),
        )
        .expect("scaling keeps validity");
        let (a, b) = (net.derive_ratios(), scaled.derive_ratios());
        let err = a.snr.iter().zip(&b.snr).chain(a.inr.iter().zip(b.inr.iter()))
            .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
            .fold(0.0, f64::max);
        t.record(err <= 1e-12, err);
    }
    t.outcome("ratio scale invariance", "relative error")
}

fn check_half_bit(seed: u64) -> CheckOutcome {
    let mut r = rng(seed, 2);
    let mut t = Tally::new();
    for _ in 0..10_000 {
        let s = 10f64.powf(r.random_range(-10.0..=50.0) / 10.0);
        let (c, gap) = half_bit_point(s).expect("nonnegative");
        let direct = rate_wz_closed_form(s, f64::INFINITY) - rate_wz_closed_form(s, c);
        let ok = gap > 0.0 && gap <= 0.5 + 1e-9 && (direct - gap).abs() <= 1e-9;
        t.record(ok, gap);
    }
    t.outcome("half-bit gap", "gap")
}

fn check_monotonicity(seed: u64) -> CheckOutcome {
    let mut r = rng(seed, 3);
    let mut t = Tally::new();
    for _ in 0..5_000 {
        let s = 10f64.powf(r.random_range(-10.0..=50.0) / 10.0);
        let c = r.random_range(0.01..12.0);
        let base = rate_wz_closed_form(s, c);
        let ok = rate_wz_closed_form(s, c + 0.05) > base
            && rate_wz_closed_form(s * 1.1, c) > base
            && base <= rate_wz_closed_form(s, f64::INFINITY);
        t.record(ok, f64::NAN);
    }
    t.outcome("rate monotonicity", "")
}

fn check_wz_dominates_nowz(seed: u64) -> CheckOutcome {
    let mut r = rng(seed, 4);
    let mut t = Tally::new();
    for _ in 0..1_000 {
        let net = instance(&mut r, 5);
        let order = random_order(&mut r, net.users());
        let wz = rates_per_bs_sic_wz(&net, &order).expect("valid");
        let nowz = rates_per_bs_sic_nowz(&net, &order).expect("valid");
        let deficit = nowz.rates.iter().zip(&wz.rates).map(|(a, b)| a - b).fold(0.0, f64::max);
        t.record(deficit <= 1e-12, deficit);
    }
    t.outcome("wz >= nowz", "excess")
}

fn check_improved_dominates_wz(seed: u64) -> CheckOutcome {
    let mut r = rng(seed, 5);
    let mut t = Tally::new();
    for _ in 0..1_000 {
        let net = instance(&mut r, 4);
        let order = random_order(&mut r, net.users());
        let wz = rates_per_bs_sic_wz(&net, &order).expect("valid");
        let imp = rates_improved_per_bs_sic(&net, &order).expect("valid");
        let deficit = wz.rates.iter().zip(&imp.rates).map(|(a, b)| a - b).fold(0.0, f64::max);
        t.record(deficit <= 1e-9, deficit);
    }
    t.outcome("improved >= wz", "deficit")
}

fn check_kernel_consistency(seed: u64) -> CheckOutcome {
    let mut r = rng(seed, 6);
    let mut t = Tally::new();
    for _ in 0..1_000 {
        let net = instance(&mut r, 5);
        let order = random_order(&mut r, net.users());
        let wz = rates_per_bs_sic_wz(&net, &order).expect("valid");
        let nowz = rates_per_bs_sic_nowz(&net, &order).expect("valid");
        let err = wz_rates_via_kernel(&net, &order)
            .iter()
            .zip(&wz.rates)
            .chain(nowz_rates_via_kernel(&net, &order).iter().zip(&nowz.rates))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        t.record(err <= 1e-9, err);
    }
    t.outcome("closed form = covariance kernel", "abs error")
}

fn check_region_symmetry(seed: u64) -> CheckOutcome {
    let mut r = rng(seed, 7);
    let mut t = Tally::new();
    for _ in 0..200 {
        let snr = 10f64.powf(r.random_range(0.0..40.0) / 10.0);
        let inr = 10f64.powf(r.random_range(-10.0..30.0) / 10.0);
        let c = r.random_range(0.1..10.0);
        for scheme in [Scheme::Baseline, Scheme::PerBsWz, Scheme::PerBsNoWz, Scheme::JointBs] {
            let reg = two_user_region(scheme, snr, inr, c).expect("valid");
            let ok = reg.hull.iter().all(|&(a, b)| reg.contains((b, a), 1e-9));
            t.record(ok, f64::NAN);
        }
    }
    t.outcome("region swap symmetry", "")
}

fn check_wyner(seed: u64) -> Vec<CheckOutcome> {
    let mut sandwich = Tally::new();
    let mut wz = Tally::new();
    let mut nowz = Tally::new();
    for i in 0..10_000u64 {
        let w = wyner_trial(seed, i, 1 + (i % 8) as usize);
        let (a, b, c) = (wyner_sum_rate_nowz(&w), wyner_sum_rate_wz(&w), cutset_upper_bound_wyner(&w));
        sandwich.record(a <= b + 1e-9 && b <= c + 1e-9, (a - b).max(b - c));
        let cw = gap_certificate(&w, Scheme::PerBsWz).expect("wz");
        let cn = gap_certificate(&w, Scheme::PerBsNoWz).expect("nowz");
        wz.record(cw.ok(), cw.gap - cw.bound_limit);
        nowz.record(cn.ok(), cn.gap - cn.bound_limit);
    }
    vec![
        sandwich.outcome("nowz <= wz <= cut-set", "violation"),
        wz.outcome("wz gap certificate", "gap minus limit"),
        nowz.outcome("nowz gap certificate", "gap minus limit"),
    ]
}

fn check_nnc(seed: u64) -> Vec<CheckOutcome> {
    let mut r = rng(seed, 8);
    let mut mono = Tally::new();
    for _ in 0..100 {
        let net = instance(&mut r, 3);
        let l = net.users();
        let q = QuantizationProfile { q: (0..l).map(|_| r.random_range(0.1..10.0)).collect() };
        let base = nnc_region(&net, &q).expect("valid");
        let k = r.random_range(0..l);
        let mut c = net.backhaul().to_vec();
        c[k] += r.random_range(0.01..2.0);
        let richer = nnc_region(&net.with_backhaul(c).expect("valid"), &q).expect("valid");
        let drop = base.constraints().map(|(m, b)| b - richer.bound(m)).fold(0.0, f64::max);
        mono.record(drop <= 1e-12, drop);
    }
    // quantizers of the best per-BS SIC order; see q = N0 in the acceptance suite
    let mut dom = Tally::new();
    let spec = RandomInstanceSpec { users: 2, ..Default::default() };
    for _ in 0..200 {
        let net = random_instance(r.random(), &spec);
        let (order, best) = best_decoding_order(&net, Scheme::PerBsWz, 2).expect("valid");
        let q = wz_quantization(&net, &order).expect("valid");
        let bound = nnc_sum_rate(&nnc_region(&net, &q).expect("finite backhaul"));
        dom.record(bound >= best.sum() - 1e-9, best.sum() - bound);
    }
    vec![
        mono.outcome("nnc bounds monotone in backhaul", "decrease"),
        dom.outcome("nnc sum bound at SIC quantizers >= best per-BS SIC", "excess"),
    ]
}

fn check_allocation(seed: u64) -> Vec<CheckOutcome> {
    let mut r = rng(seed, 9);
    let mut props = Tally::new();
    for _ in 0..1_000 {
        let l = r.random_range(1..=8);
        let s: Vec<f64> = (0..l).map(|_| 10f64.powf(r.random_range(-10.0..50.0) / 10.0)).collect();
        let c = r.random_range(0.0..40.0);
        let a = water_fill(&s, c).expect("valid");
        let b = water_fill(&s, c + r.random_range(0.0..5.0)).expect("valid");
        let budget = (a.total - c).abs();
        let threshold = s.iter().zip(&a.c).all(|(sk, ck)| (*ck > 0.0) == (0.5 * sk.log2() > a.alpha));
        let monotone = b.alpha <= a.alpha + 1e-12 && a.c.iter().zip(&b.c).all(|(x, y)| y + 1e-9 >= *x);
        props.record(budget <= 1e-9 * c.max(1.0) && threshold && monotone, budget);
    }
    let mut oracle = Tally::new();
    let spec = RandomInstanceSpec { users: 3, ..Default::default() };
    for _ in 0..20 {
        let net = random_instance(r.random(), &spec);
        let order = random_order(&mut r, 3);
        let c = r.random_range(0.0..6.0);
        let wf = optimal_allocation(&net, &order, c).expect("valid");
        let grid = allocation_oracle_grid(&net, &order, c, 0.01).expect("valid");
        let s = crate::schemes::sinr_bars(&net, &order).expect("valid");
        let diff = allocation_sum_rate(&s, &wf.c) - allocation_sum_rate(&s, &grid.c);
        let kkt = kkt_residual(&net, &order, &wf).expect("valid");
        oracle.record(diff >= -1e-9 && diff <= 1e-3 && kkt <= 1e-8, diff.abs().max(kkt));
    }
    vec![
        props.outcome("water-filling budget/threshold/monotone", "budget error"),
        oracle.outcome("water-filling vs grid oracle", "deviation"),
    ]
}

fn check_simulation(seed: u64) -> Result<Vec<CheckOutcome>> {
    let cfg = SimConfig { cells: 7, drops: 1, tones: 16, users_per_sector: 4, seed, ..SimConfig::default() };
    let same = run_campaign(&cfg)? == run_campaign(&cfg)?;
    let campaign = Campaign::prepare(&cfg)?;
    let mut order = Tally::new();
    let mut cdf = Tally::new();
    for b in [0.0, 60.0, 180.0, 360.0] {
        let drop = &campaign.drops()[0];
        let c = campaign.tone_backhaul(drop, b, AllocationMode::Uniform)?;
        for (t, net) in drop.networks.iter().enumerate() {
            let net = net.with_backhaul(c[t].clone())?;
            let wz = rates_per_bs_sic_wz(&net, &drop.orders[t])?.sum();
            let nowz = rates_per_bs_sic_nowz(&net, &drop.orders[t])?.sum();
            order.record(wz >= nowz - 1e-12, nowz - wz);
        }
        let res = campaign.evaluate(Scheme::PerBsWz, b, AllocationMode::Optimized)?;
        let points = res.cdf();
        let ok = points.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1)
            && points.first().is_some_and(|p| p.1 > 0.0)
            && points.last().is_some_and(|p| p.1 == 1.0)
            && res.user_rates_mbps.iter().all(|&x| x >= 0.0);
        cdf.record(ok, f64::NAN);
    }
    Ok(vec![
        CheckOutcome {
            name: "campaign determinism",
            passed: same,
            detail: format!("identical results: {same}"),
        },
        order.outcome("per-tone wz >= nowz", "excess"),
        cdf.outcome("cdf validity", ""),
    ])
}

/// Runs every suite; the outcome list is in a fixed order.
pub fn run_all(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = vec![
        check_ratio_scaling(seed),
        check_half_bit(seed),
        check_monotonicity(seed),
        check_wz_dominates_nowz(seed),
        check_improved_dominates_wz(seed),
        check_kernel_consistency(seed),
        check_region_symmetry(seed),
    ];
    out.extend(check_wyner(seed));
    out.extend(check_nnc(seed));
    out.extend(check_allocation(seed));
    out.extend(check_simulation(seed)?);
    Ok(out)
}
