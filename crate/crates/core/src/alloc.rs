//! Sum-backhaul-constrained allocation by water-filling, a grid oracle and a
//! stationarity check.

use crate::error::{Error, Result};
use crate::network::NetworkInstance;
use crate::schemes::{rate_wz_closed_form, sinr_bars, DecodingOrder};

pub const GRID_MAX_USERS: usize = 4;
const BISECTION_STEPS: usize = 200;
const BUDGET_TOL: f64 = 1e-12;

/// Per-link capacities `c` with water level `alpha`:
/// `c_k = max(½ log2 SINR̄_k - alpha, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub c: Vec<f64>,
    /// NaN for grid-oracle points, which carry no water level.
    pub alpha: f64,
    pub total: f64,
}

impl Allocation {
    /// `β = 2^{2α}`, the SINR̄ threshold below which a link gets nothing.
    pub fn beta(&self) -> f64 {
        (2.0 * self.alpha).exp2()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("user,C_bits\n");
        for (k, c) in self.c.iter().enumerate() {
            out.push_str(&format!("{},{}\n", k + 1, c));
        }
        out.push_str(&format!("alpha,{}\n", self.alpha));
        out
    }
}

fn check_budget(c_total: f64) -> Result<()> {
    if !(c_total >= 0.0) || !c_total.is_finite() {
        return Err(Error::InvalidArgument(format!("total backhaul must be finite and nonnegative, got {c_total}")));
    }
    Ok(())
}

fn spent(levels: &[f64], alpha: f64) -> f64 {
    levels.iter().map(|&l| (l - alpha).max(0.0)).sum()
}

/// Water-filling on raw effective SINRs. Users with zero SINR̄ never receive
/// capacity.
pub fn water_fill(sinr_bars: &[f64], c_total: f64) -> Result<Allocation> {
    check_budget(c_total)?;
    if sinr_bars.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::InvalidArgument("effective SINRs must be nonnegative".into()));
    }
    let levels: Vec<f64> = sinr_bars.iter().map(|s| 0.5 * s.log2()).collect();
    let finite = levels.iter().copied().filter(|l| l.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), l| (a.min(l), b.max(l)));
    if c_total == 0.0 {
        return Ok(Allocation { c: vec![0.0; levels.len()], alpha: hi, total: 0.0 });
    }
    if !hi.is_finite() {
        return Err(Error::InvalidArgument("no link with positive SINR can absorb backhaul".into()));
    }

    let (mut lo, mut hi) = (lo - c_total, hi);
    let mut alpha = 0.5 * (lo + hi);
    for _ in 0..BISECTION_STEPS {
        alpha = 0.5 * (lo + hi);
        let excess = spent(&levels, alpha) - c_total;
        if excess.abs() <= BUDGET_TOL {
            break;
        }
        if excess > 0.0 {
            lo = alpha;
        } else {
            hi = alpha;
        }
    }
    // exact level on the active set
    let (sum, m) = levels
        .iter()
        .filter(|&&l| l > alpha)
        .fold((0.0, 0usize), |(s, m), &l| (s + l, m + 1));
    if m > 0 {
        let exact = (sum - c_total) / m as f64;
        let same_set = levels.iter().all(|&l| (l > alpha) == (l > exact));
        if same_set {
            alpha = exact;
        }
    }
    let c: Vec<f64> = levels.iter().map(|&l| (l - alpha).max(0.0)).collect();
    let total = c.iter().sum();
    Ok(Allocation { c, alpha, total })
}

pub fn optimal_allocation(net: &NetworkInstance, order: &DecodingOrder, c_total: f64) -> Result<Allocation> {
    water_fill(&sinr_bars(net, order)?, c_total)
}

/// `Σ_k ½ log2((1 + SINR̄_k)/(1 + 2^{-2c_k} SINR̄_k))`.
pub fn allocation_sum_rate(sinr_bars: &[f64], c: &[f64]) -> f64 {
    sinr_bars.iter().zip(c).map(|(&s, &ck)| rate_wz_closed_form(s, ck)).sum()
}

/// Best point of `{c : Σ c_k = c_total, c_k ∈ step·ℕ}` by enumeration. When
/// `c_total` is not a multiple of `step` the remainder is added to one
/// coordinate, each choice being enumerated.
pub fn allocation_oracle_grid(
    net: &NetworkInstance,
    order: &DecodingOrder,
    c_total: f64,
    step: f64,
) -> Result<Allocation> {
    let l = net.users();
    if l > GRID_MAX_USERS {
        return Err(Error::TooManyUsers { what: "grid allocation oracle", limit: GRID_MAX_USERS, got: l });
    }
    check_budget(c_total)?;
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("grid step must be positive, got {step}")));
    }
    let s = sinr_bars(net, order)?;
    let n = (c_total / step + 1e-9).floor() as usize;
    let remainder = (c_total - n as f64 * step).max(0.0);
    let absorbers = if remainder > 0.0 { l } else { 1 };

    let mut best = (f64::NEG_INFINITY, vec![0.0; l]);
    let mut idx = vec![0usize; l - 1];
    let mut c = vec![0.0; l];
    loop {
        let used: usize = idx.iter().sum();
        for (ck, &m) in c.iter_mut().zip(&idx) {
            *ck = m as f64 * step;
        }
        c[l - 1] = (n - used) as f64 * step;
        for j in 0..absorbers {
            let mut point = c.clone();
            point[j] += remainder;
            let value = allocation_sum_rate(&s, &point);
            if value > best.0 {
                best = (value, point);
            }
        }
        // odometer over the first L-1 coordinates, keeping their sum <= n
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                let c = best.1;
                let total = c.iter().sum();
                return Ok(Allocation { c, alpha: f64::NAN, total });
            }
            idx[pos] += 1;
            if idx.iter().sum::<usize>() <= n {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Largest violation of `g_k - ν_k + λ = 0` with `g_k = u/(1+u)`,
/// `u = 2^{-2C_k} SINR̄_k`: `|g_k - λ|` on links with capacity, `max(g_k - λ, 0)`
/// on links without. `λ` is read off the first link with capacity.
pub fn kkt_residual(net: &NetworkInstance, order: &DecodingOrder, alloc: &Allocation) -> Result<f64> {
    let s = sinr_bars(net, order)?;
    if alloc.c.len() != s.len() {
        return Err(Error::LengthMismatch { what: "allocation", expected: s.len(), got: alloc.c.len() });
    }
    let marginal: Vec<f64> = s
        .iter()
        .zip(&alloc.c)
        .map(|(&sk, &ck)| {
            let u = (-2.0 * ck).exp2() * sk;
            u / (1.0 + u)
        })
        .collect();
    let Some(first) = alloc.c.iter().position(|&ck| ck > 0.0) else {
        return Ok(0.0);
    };
    let lambda = marginal[first];
    Ok(alloc
        .c
        .iter()
        .zip(&marginal)
        .map(|(&ck, &g)| if ck > 0.0 { (g - lambda).abs() } else { (g - lambda).max(0.0) })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{random_instance, RandomInstanceSpec};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    /// Interference-free network with the given SNRs, so SINR̄ = SNR.
    fn diagonal(snr: &[f64]) -> NetworkInstance {
        let l = snr.len();
        let gains = DMatrix::from_fn(l, l, |i, j| if i == j { snr[i].sqrt() } else { 0.0 });
        NetworkInstance::new(gains, vec![1.0; l], 1.0, vec![0.0; l]).unwrap()
    }

    #[test]
    fn single_user() {
        let a = water_fill(&[1000.0], 3.0).unwrap();
        assert_relative_eq!(a.c[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(a.alpha, 0.5 * 1000f64.log2() - 3.0, epsilon = 1e-12);
    }

    #[test]
    fn nominal_split() {
        let total = 0.5 * 1000f64.log2() + 0.5 * 10f64.log2();
        let a = water_fill(&[1000.0, 10.0], total).unwrap();
        assert!(a.alpha.abs() < 1e-12);
        assert_relative_eq!(a.c[0], 4.982892142331044, epsilon = 1e-9);
        assert_relative_eq!(a.c[1], 1.660964047443681, epsilon = 1e-9);
    }

    #[test]
    fn weak_link_waits_for_waterline() {
        let a = water_fill(&[1000.0, 1.0], 2.0).unwrap();
        assert_eq!(a.c[1], 0.0);
        assert_relative_eq!(a.c[0], 2.0, epsilon = 1e-12);
        let net = diagonal(&[1000.0, 1.0]);
        let order = DecodingOrder::identity(2);
        let grid = allocation_oracle_grid(&net, &order, 2.0, 0.01).unwrap();
        assert_relative_eq!(grid.c[0], 2.0, epsilon = 1e-9);
        // beyond ½ log2 1000 the weak link shares the surplus equally
        let a = water_fill(&[1000.0, 1.0], 7.0).unwrap();
        assert!(a.alpha < 0.0);
        assert_relative_eq!(a.c[0] - a.c[1], 0.5 * 1000f64.log2(), epsilon = 1e-9);
    }

    #[test]
    fn zero_budget() {
        let a = water_fill(&[1000.0, 10.0], 0.0).unwrap();
        assert_eq!(a.c, vec![0.0, 0.0]);
        assert_relative_eq!(a.alpha, 0.5 * 1000f64.log2());
        let net = diagonal(&[1000.0, 10.0]);
        let order = DecodingOrder::identity(2);
        assert_eq!(kkt_residual(&net, &order, &a).unwrap(), 0.0);
        assert_eq!(allocation_oracle_grid(&net, &order, 0.0, 0.1).unwrap().c, vec![0.0, 0.0]);
    }

    #[test]
    fn zero_sinr_links_get_nothing() {
        let a = water_fill(&[0.0, 100.0], 4.0).unwrap();
        assert_eq!(a.c[0], 0.0);
        assert_relative_eq!(a.c[1], 4.0, epsilon = 1e-12);
        assert!(water_fill(&[0.0, 0.0], 1.0).is_err());
        assert!(water_fill(&[1.0], -1.0).is_err());
        assert!(water_fill(&[f64::NAN], 1.0).is_err());
    }

    #[test]
    fn kkt_at_optimum_and_off_it() {
        let net = diagonal(&[1000.0, 300.0, 2.0]);
        let order = DecodingOrder::identity(3);
        let a = optimal_allocation(&net, &order, 6.0).unwrap();
        assert!(a.c[0] > 0.0 && a.c[1] > 0.0);
        assert!(kkt_residual(&net, &order, &a).unwrap() <= 1e-8);
        let mut off = a.clone();
        off.c[1] += 0.1;
        assert!(kkt_residual(&net, &order, &off).unwrap() > 1e-3);
    }

    #[test]
    fn grid_guard() {
        let spec = RandomInstanceSpec { users: 5, ..Default::default() };
        let net = random_instance(3, &spec);
        let order = DecodingOrder::identity(5);
        assert!(matches!(
            allocation_oracle_grid(&net, &order, 1.0, 0.1),
            Err(Error::TooManyUsers { .. })
        ));
        let net = diagonal(&[10.0]);
        assert!(allocation_oracle_grid(&net, &DecodingOrder::identity(1), 1.0, 0.0).is_err());
    }

    #[test]
    fn grid_agrees_with_water_filling() {
        let spec = RandomInstanceSpec { users: 3, ..Default::default() };
        for seed in 0..10 {
            let net = random_instance(seed, &spec);
            let order = DecodingOrder::identity(3);
            let s = sinr_bars(&net, &order).unwrap();
            let wf = optimal_allocation(&net, &order, 5.0).unwrap();
            let grid = allocation_oracle_grid(&net, &order, 5.0, 0.01).unwrap();
            let (a, b) = (allocation_sum_rate(&s, &wf.c), allocation_sum_rate(&s, &grid.c));
            assert!(a >= b - 1e-9);
            assert!(a - b <= 1e-3);
        }
    }

    #[test]
    fn csv_layout() {
        let a = water_fill(&[1000.0, 10.0], 1.0).unwrap();
        let csv = a.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "user,C_bits");
        assert!(lines[1].starts_with("1,"));
        assert!(lines[3].starts_with("alpha,"));
    }

    proptest! {
        #[test]
        fn budget_threshold_and_monotonicity(
            db in prop::collection::vec(-10.0f64..50.0, 1..8),
            c in 0.0f64..40.0,
            extra in 0.0f64..5.0,
        ) {
            let s: Vec<f64> = db.iter().map(|d| 10f64.powf(d / 10.0)).collect();
            let a = water_fill(&s, c).unwrap();
            prop_assert!((a.total - c).abs() <= 1e-9 * c.max(1.0));
            for (sk, ck) in s.iter().zip(&a.c) {
                prop_assert_eq!(*ck > 0.0, 0.5 * sk.log2() > a.alpha);
            }
            let b = water_fill(&s, c + extra).unwrap();
            prop_assert!(b.alpha <= a.alpha + 1e-12);
            for (x, y) in a.c.iter().zip(&b.c) {
                prop_assert!(y + 1e-9 >= *x);
            }
        }
    }
}
