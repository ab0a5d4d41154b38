use rayon::prelude::*;

use super::{
    draw_channels, drop_users, generate_topology, per_tone_network, round_robin_schedule, stream_rng,
    AllocationMode, SimConfig, Topology,
};
use crate::alloc::water_fill;
use crate::error::{Error, Result};
use crate::network::NetworkInstance;
use crate::schemes::{rates_for, sinr_bars, sinr_descending_order, DecodingOrder, Scheme};

/// Everything about one drop that does not depend on backhaul.
#[derive(Debug, Clone)]
pub struct DropRealization {
    pub index: usize,
    pub schedules: Vec<Vec<usize>>,
    pub networks: Vec<NetworkInstance>,
    pub orders: Vec<DecodingOrder>,
    /// `[tone][sector]` effective SINR under the tone's decoding order.
    pub sinr_bars: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub scheme: Scheme,
    pub allocation: AllocationMode,
    pub backhaul_mbps: f64,
    /// Per-user rates in drop order.
    pub user_rates_mbps: Vec<f64>,
    pub mean_percell_mbps: f64,
}

impl SimResult {
    /// Empirical CDF points `(rate, i/n)`.
    pub fn cdf(&self) -> Vec<(f64, f64)> {
        let mut r = self.user_rates_mbps.clone();
        r.sort_by(f64::total_cmp);
        let n = r.len() as f64;
        r.into_iter().enumerate().map(|(i, x)| (x, (i + 1) as f64 / n)).collect()
    }

    /// Lower empirical quantile.
    pub fn percentile(&self, p: f64) -> f64 {
        let cdf = self.cdf();
        cdf.iter().find(|(_, f)| *f >= p).or(cdf.last()).map_or(0.0, |(x, _)| *x)
    }
}

pub struct Campaign {
    cfg: SimConfig,
    topo: Topology,
    drops: Vec<DropRealization>,
}

impl Campaign {
    pub fn prepare(cfg: &SimConfig) -> Result<Self> {
        let topo = generate_topology(cfg)?;
        let drops = (0..cfg.drops)
            .into_par_iter()
            .map(|d| realize(cfg, &topo, d))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { cfg: cfg.clone(), topo, drops })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn drops(&self) -> &[DropRealization] {
        &self.drops
    }

    /// `[tone][sector]` backhaul in bits per real dimension.
    pub fn tone_backhaul(&self, drop: &DropRealization, backhaul_mbps: f64, mode: AllocationMode) -> Result<Vec<Vec<f64>>> {
        if !(backhaul_mbps >= 0.0) || !backhaul_mbps.is_finite() {
            return Err(Error::InvalidArgument(format!("backhaul must be finite and nonnegative, got {backhaul_mbps}")));
        }
        let (tones, sectors) = (self.cfg.tones, self.cfg.sectors());
        let share = 0.5 * self.cfg.uniform_tone_backhaul_bits(backhaul_mbps);
        match mode {
            AllocationMode::Uniform => Ok(vec![vec![share; sectors]; tones]),
            AllocationMode::Optimized => {
                let mut c = vec![vec![0.0; sectors]; tones];
                for g in 0..sectors {
                    let s: Vec<f64> = (0..tones).map(|t| drop.sinr_bars[t][g]).collect();
                    let a = water_fill(&s, share * tones as f64)?;
                    for (t, ck) in a.c.into_iter().enumerate() {
                        c[t][g] = ck;
                    }
                }
                Ok(c)
            }
        }
    }

    /// Per-user rates of one drop in Mbps.
    pub fn drop_rates(&self, drop: &DropRealization, scheme: Scheme, backhaul_mbps: f64, mode: AllocationMode) -> Result<Vec<f64>> {
        let c = self.tone_backhaul(drop, backhaul_mbps, mode)?;
        let mbps = 2.0 * self.cfg.tone_bandwidth_hz() / 1e6;
        let mut rates = vec![0.0; self.cfg.users()];
        for t in 0..self.cfg.tones {
            let net = drop.networks[t].with_backhaul(c[t].clone())?;
            let r = rates_for(&net, &drop.orders[t], scheme)?;
            for (g, &user) in drop.schedules[t].iter().enumerate() {
                rates[user] += mbps * r.rates[g];
            }
        }
        Ok(rates)
    }

    pub fn evaluate(&self, scheme: Scheme, backhaul_mbps: f64, mode: AllocationMode) -> Result<SimResult> {
        if !matches!(scheme, Scheme::Baseline | Scheme::PerBsWz | Scheme::PerBsNoWz) {
            return Err(Error::UnsupportedScheme(scheme.tag()));
        }
        let per_drop = self
            .drops
            .par_iter()
            .map(|d| self.drop_rates(d, scheme, backhaul_mbps, mode))
            .collect::<Result<Vec<_>>>()?;
        let user_rates_mbps: Vec<f64> = per_drop.into_iter().flatten().collect();
        let cells = (self.cfg.cells * self.drops.len()) as f64;
        let mean_percell_mbps = user_rates_mbps.iter().sum::<f64>() / cells;
        Ok(SimResult { scheme, allocation: mode, backhaul_mbps, user_rates_mbps, mean_percell_mbps })
    }
}

fn realize(cfg: &SimConfig, topo: &Topology, d: usize) -> Result<DropRealization> {
    let drop = drop_users(cfg, topo, &mut stream_rng(cfg.seed, 2 * d as u64));
    let ch = draw_channels(cfg, topo, &drop, &mut stream_rng(cfg.seed, 2 * d as u64 + 1));
    let mut schedules = Vec::with_capacity(cfg.tones);
    let mut networks = Vec::with_capacity(cfg.tones);
    let mut orders = Vec::with_capacity(cfg.tones);
    let mut sinrs = Vec::with_capacity(cfg.tones);
    for t in 0..cfg.tones {
        let schedule = round_robin_schedule(cfg, t);
        let net = per_tone_network(cfg, &ch, t, &schedule)?;
        let order = sinr_descending_order(&net);
        sinrs.push(sinr_bars(&net, &order)?);
        schedules.push(schedule);
        networks.push(net);
        orders.push(order);
    }
    Ok(DropRealization { index: d, schedules, networks, orders, sinr_bars: sinrs })
}

pub fn run_campaign(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    Campaign::prepare(cfg)?.evaluate(cfg.scheme, cfg.backhaul_per_bs_mbps, cfg.allocation)
}

/// `cfg.scheme` at every backhaul point under both allocation modes, on one
/// shared set of drops.
pub fn sweep_backhaul(cfg: &SimConfig, backhaul_list: &[f64]) -> Result<Vec<SimResult>> {
    cfg.validate()?;
    let campaign = Campaign::prepare(cfg)?;
    let mut out = Vec::new();
    for &b in backhaul_list {
        for mode in [AllocationMode::Uniform, AllocationMode::Optimized] {
            out.push(campaign.evaluate(cfg.scheme, b, mode)?);
        }
    }
    Ok(out)
}

pub fn cdf_csv(results: &[SimResult]) -> String {
    let mut out = String::from("rate_mbps,cdf,scheme,backhaul\n");
    for r in results {
        for (x, f) in r.cdf() {
            out.push_str(&format!("{x},{f},{},{}\n", r.scheme, r.backhaul_mbps));
        }
    }
    out
}

/// Improvement is relative to the baseline row with the same backhaul and
/// allocation, left empty when there is none.
pub fn summary_csv(results: &[SimResult]) -> String {
    let mut out = String::from("scheme,backhaul,allocation,mean_percell_mbps,improvement_pct_vs_baseline\n");
    for r in results {
        let base = results.iter().find(|b| {
            b.scheme == Scheme::Baseline && b.backhaul_mbps == r.backhaul_mbps && b.allocation == r.allocation
        });
        let improvement = match base {
            Some(b) if b.mean_percell_mbps > 0.0 => {
                format!("{}", 100.0 * (r.mean_percell_mbps / b.mean_percell_mbps - 1.0))
            }
            _ => String::new(),
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.scheme, r.backhaul_mbps, r.allocation, r.mean_percell_mbps, improvement
        ));
    }
    out
}
