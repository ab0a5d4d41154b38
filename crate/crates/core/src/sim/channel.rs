use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Drop, Multipath, SimConfig, Topology};
use crate::error::{Error, Result};
use crate::network::NetworkInstance;

/// Tapped delay line with delays in samples and powers summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TapProfile {
    pub delays: Vec<usize>,
    pub powers: Vec<f64>,
}

const PED_A_DELAYS_NS: [f64; 4] = [0.0, 110.0, 190.0, 410.0];
const PED_A_POWERS_DB: [f64; 4] = [0.0, -9.7, -19.2, -22.8];

impl TapProfile {
    /// Taps rounded to the nearest sample at `sample_rate_hz`.
    pub fn ped_a(sample_rate_hz: f64) -> Self {
        let mut delays = Vec::new();
        let mut powers: Vec<f64> = Vec::new();
        for (d, p) in PED_A_DELAYS_NS.iter().zip(PED_A_POWERS_DB) {
            let n = (d * 1e-9 * sample_rate_hz).round() as usize;
            let lin = 10f64.powf(p / 10.0);
            match delays.iter().position(|&m| m == n) {
                Some(i) => powers[i] += lin,
                None => {
                    delays.push(n);
                    powers.push(lin);
                }
            }
        }
        let total: f64 = powers.iter().sum();
        powers.iter_mut().for_each(|p| *p /= total);
        Self { delays, powers }
    }

    pub fn flat() -> Self {
        Self { delays: vec![0], powers: vec![1.0] }
    }

    pub fn for_config(cfg: &SimConfig) -> Self {
        match cfg.multipath {
            Multipath::PedA => Self::ped_a(cfg.bandwidth_hz),
            Multipath::Flat => Self::flat(),
        }
    }
}

/// `intercept + slope log10(d_km)` in dB.
pub fn pathloss_db(cfg: &SimConfig, distance_m: f64) -> f64 {
    cfg.pathloss_intercept_db + cfg.pathloss_slope_db * (distance_m / 1000.0).log10()
}

/// Parabolic azimuth pattern `G - min(12 (θ/θ3)^2, A_m)`.
pub fn antenna_gain_db(cfg: &SimConfig, off_boresight_deg: f64) -> f64 {
    let x = off_boresight_deg / cfg.beamwidth_deg;
    cfg.antenna_gain_dbi - (12.0 * x * x).min(cfg.front_to_back_db)
}

/// Independent `CN(0, mean_gain * p_n)` taps.
pub fn draw_link_taps<R: Rng>(rng: &mut R, profile: &TapProfile, mean_gain: f64) -> Vec<Complex64> {
    profile
        .powers
        .iter()
        .map(|p| {
            let s = (0.5 * mean_gain * p).sqrt();
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(s * re, s * im)
        })
        .collect()
}

/// Fading taps of every user-to-sector link; tone responses are evaluated
/// from them on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    users: usize,
    sectors: usize,
    tones: usize,
    delays: Vec<usize>,
    /// `[user][sector][tap]`, flattened.
    taps: Vec<Complex64>,
    /// `[tone][tap]`, `exp(-2πi n t / N)`.
    twiddle: Vec<Complex64>,
    serving: Vec<usize>,
}

impl ChannelRealization {
    pub fn users(&self) -> usize {
        self.users
    }

    pub fn sectors(&self) -> usize {
        self.sectors
    }

    pub fn tones(&self) -> usize {
        self.tones
    }

    pub fn serving_sector(&self, user: usize) -> usize {
        self.serving[user]
    }

    pub fn taps(&self, user: usize, sector: usize) -> &[Complex64] {
        let k = self.delays.len();
        let at = (user * self.sectors + sector) * k;
        &self.taps[at..at + k]
    }

    /// Discrete Fourier transform of the tapped delay line at `tone`.
    pub fn tone_gain(&self, user: usize, sector: usize, tone: usize) -> Complex64 {
        let k = self.delays.len();
        let w = &self.twiddle[tone * k..(tone + 1) * k];
        self.taps(user, sector).iter().zip(w).map(|(a, b)| a * b).sum()
    }

    pub fn power_gain(&self, user: usize, sector: usize, tone: usize) -> f64 {
        self.tone_gain(user, sector, tone).norm_sqr()
    }
}

/// Large-scale gain of a link: pathloss and sector pattern, linear.
pub fn mean_link_gain(cfg: &SimConfig, topo: &Topology, pos: [f64; 2], sector: usize) -> f64 {
    let s = topo.sectors_per_cell();
    let (site, local) = (sector / s, sector % s);
    let d = topo.distance(site, pos).max(cfg.min_distance_m);
    let theta = topo.off_boresight_deg(site, local, pos);
    10f64.powf((antenna_gain_db(cfg, theta) - pathloss_db(cfg, d)) / 10.0)
}

pub fn draw_channels<R: Rng>(cfg: &SimConfig, topo: &Topology, drop: &Drop, rng: &mut R) -> ChannelRealization {
    let profile = TapProfile::for_config(cfg);
    let sectors = topo.sites.len() * topo.sectors_per_cell();
    let mut taps = Vec::with_capacity(drop.users.len() * sectors * profile.delays.len());
    for u in &drop.users {
        for sector in 0..sectors {
            taps.extend(draw_link_taps(rng, &profile, mean_link_gain(cfg, topo, u.pos, sector)));
        }
    }
    let n = cfg.tones;
    let twiddle = (0..n)
        .flat_map(|t| {
            profile
                .delays
                .iter()
                .map(move |&d| Complex64::from_polar(1.0, -2.0 * PI * ((d * t) % n) as f64 / n as f64))
        })
        .collect();
    ChannelRealization {
        users: drop.users.len(),
        sectors,
        tones: n,
        delays: profile.delays,
        taps,
        twiddle,
        serving: drop.users.iter().map(|u| u.sector).collect(),
    }
}

/// Round-robin: on tone `t` sector `g` serves its `(t mod U)`-th user.
pub fn round_robin_schedule(cfg: &SimConfig, tone: usize) -> Vec<usize> {
    let u = cfg.users_per_sector;
    (0..cfg.sectors()).map(|g| g * u + tone % u).collect()
}

/// One tone as a network of `sectors` user/base-station pairs, in mW, with
/// every sector's backhaul set to its uniform per-tone share in bits per real
/// dimension.
pub fn per_tone_network(
    cfg: &SimConfig,
    realization: &ChannelRealization,
    tone: usize,
    schedule: &[usize],
) -> Result<NetworkInstance> {
    let sectors = realization.sectors();
    if tone >= realization.tones() {
        return Err(Error::InvalidArgument(format!("tone {tone} out of range")));
    }
    if schedule.len() != sectors {
        return Err(Error::InvalidSchedule(format!("expected one user for each of {sectors} sectors, got {}", schedule.len())));
    }
    for (g, &u) in schedule.iter().enumerate() {
        if u >= realization.users() || realization.serving_sector(u) != g {
            return Err(Error::InvalidSchedule(format!("user {u} is not served by sector {g}")));
        }
    }
    let gains = DMatrix::from_fn(sectors, sectors, |i, j| realization.tone_gain(schedule[i], j, tone).norm());
    let c_real = 0.5 * cfg.uniform_tone_backhaul_bits(cfg.backhaul_per_bs_mbps);
    NetworkInstance::new(
        gains,
        vec![cfg.tx_power_per_tone_mw(); sectors],
        cfg.noise_per_tone_mw(),
        vec![c_real; sectors],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{drop_users, generate_topology, stream_rng};
    use approx::assert_relative_eq;

    #[test]
    fn ped_a_taps() {
        let p = TapProfile::ped_a(1e7);
        assert_eq!(p.delays, vec![0, 1, 2, 4]);
        assert_relative_eq!(p.powers.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert!(p.powers.windows(2).all(|w| w[0] > w[1]));
        // coarse sampling merges taps
        let coarse = TapProfile::ped_a(1e6);
        assert_eq!(coarse.delays, vec![0]);
    }

    #[test]
    fn pathloss_and_pattern() {
        let cfg = SimConfig::default();
        assert_relative_eq!(pathloss_db(&cfg, 1000.0), 128.1);
        assert_relative_eq!(pathloss_db(&cfg, 400.0) - pathloss_db(&cfg, 200.0), 37.6 * 2f64.log10(), epsilon = 1e-12);
        assert_eq!(antenna_gain_db(&cfg, 0.0), 15.0);
        assert_relative_eq!(antenna_gain_db(&cfg, 35.0), 12.0, epsilon = 1e-12);
        assert_eq!(antenna_gain_db(&cfg, 180.0), -5.0);
    }

    #[test]
    fn link_power_matches_large_scale_gain() {
        let profile = TapProfile::ped_a(1e7);
        let mut rng = stream_rng(11, 0);
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| draw_link_taps(&mut rng, &profile, 2.5e-11).iter().map(|a| a.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            / n as f64;
        assert!((mean / 2.5e-11 - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn doubling_distance() {
        let cfg = SimConfig::default();
        let topo = generate_topology(&cfg).unwrap();
        let ratio = mean_link_gain(&cfg, &topo, [100.0, 0.0], 0) / mean_link_gain(&cfg, &topo, [200.0, 0.0], 0);
        assert_relative_eq!(10.0 * ratio.log10(), 37.6 * 2f64.log10(), epsilon = 1e-9);
    }

    fn small_world(multipath: Multipath) -> (SimConfig, ChannelRealization) {
        let cfg = SimConfig { cells: 7, multipath, ..SimConfig::default() };
        let topo = generate_topology(&cfg).unwrap();
        let drop = drop_users(&cfg, &topo, &mut stream_rng(2, 0));
        let ch = draw_channels(&cfg, &topo, &drop, &mut stream_rng(2, 1));
        (cfg, ch)
    }

    #[test]
    fn flat_channel_is_flat_across_tones() {
        let (_, ch) = small_world(Multipath::Flat);
        for t in 1..ch.tones() {
            assert_relative_eq!(ch.power_gain(3, 5, t), ch.power_gain(3, 5, 0), max_relative = 1e-12);
        }
    }

    #[test]
    fn tone_power_averages_to_tap_energy() {
        // Parseval over the full DFT grid
        let (_, ch) = small_world(Multipath::PedA);
        let energy: f64 = ch.taps(4, 2).iter().map(|a| a.norm_sqr()).sum();
        let avg: f64 = (0..ch.tones()).map(|t| ch.power_gain(4, 2, t)).sum::<f64>() / ch.tones() as f64;
        assert_relative_eq!(avg, energy, max_relative = 1e-10);
    }

    #[test]
    fn per_tone_networks() {
        let (cfg, ch) = small_world(Multipath::PedA);
        let schedule = round_robin_schedule(&cfg, 13);
        assert_eq!(schedule[0], 3);
        let net = per_tone_network(&cfg, &ch, 13, &schedule).unwrap();
        assert_eq!(net.users(), 21);
        assert_relative_eq!(net.backhaul()[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(net.gain(2, 4), ch.tone_gain(schedule[2], 4, 13).norm());
        let mut bad = schedule.clone();
        bad.swap(0, 1);
        assert!(matches!(per_tone_network(&cfg, &ch, 13, &bad), Err(Error::InvalidSchedule(_))));
        assert!(per_tone_network(&cfg, &ch, 13, &schedule[1..]).is_err());
        assert!(per_tone_network(&cfg, &ch, 64, &schedule).is_err());
    }
}
