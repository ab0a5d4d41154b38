//! System-level simulation of a sectorized OFDMA uplink with wrap-around.

mod campaign;
mod channel;
mod topology;

pub use campaign::{
    cdf_csv, run_campaign, summary_csv, sweep_backhaul, Campaign, DropRealization, SimResult,
};
pub use channel::{
    antenna_gain_db, draw_channels, draw_link_taps, pathloss_db, per_tone_network,
    round_robin_schedule, ChannelRealization, TapProfile,
};
pub use topology::{drop_users, generate_topology, Drop, Topology, User};

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::schemes::Scheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AllocationMode {
    /// Every tone gets the same share of the sector backhaul.
    Uniform,
    /// Each sector water-fills its backhaul across its own tones.
    Optimized,
}

impl AllocationMode {
    pub fn tag(self) -> &'static str {
        match self {
            AllocationMode::Uniform => "uniform",
            AllocationMode::Optimized => "optimized",
        }
    }
}

impl fmt::Display for AllocationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for AllocationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform" => Ok(AllocationMode::Uniform),
            "optimized" | "optimised" => Ok(AllocationMode::Optimized),
            other => Err(Error::InvalidConfig(format!("unknown allocation mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multipath {
    /// ITU pedestrian A.
    PedA,
    /// Single tap.
    Flat,
}

impl FromStr for Multipath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "peda" => Ok(Multipath::PedA),
            "flat" => Ok(Multipath::Flat),
            other => Err(Error::InvalidConfig(format!("unknown multipath profile `{other}`"))),
        }
    }
}

impl fmt::Display for Multipath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Multipath::PedA => "peda",
            Multipath::Flat => "flat",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Centered hexagonal number: 1, 7, 19, 37, ..
    pub cells: usize,
    pub sectors_per_cell: usize,
    pub users_per_sector: usize,
    pub bandwidth_hz: f64,
    pub tones: usize,
    pub bs_distance_m: f64,
    pub tx_psd_dbm_hz: f64,
    pub antenna_gain_dbi: f64,
    pub beamwidth_deg: f64,
    pub front_to_back_db: f64,
    pub noise_psd_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub pathloss_intercept_db: f64,
    pub pathloss_slope_db: f64,
    pub min_distance_m: f64,
    pub multipath: Multipath,
    pub seed: u64,
    pub drops: usize,
    pub scheme: Scheme,
    pub backhaul_per_bs_mbps: f64,
    pub allocation: AllocationMode,
    pub backhaul_list: Vec<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            cells: 19,
            sectors_per_cell: 3,
            users_per_sector: 10,
            bandwidth_hz: 1e7,
            tones: 64,
            bs_distance_m: 600.0,
            tx_psd_dbm_hz: -27.0,
            antenna_gain_dbi: 15.0,
            beamwidth_deg: 70.0,
            front_to_back_db: 20.0,
            noise_psd_dbm_hz: -169.0,
            noise_figure_db: 7.0,
            pathloss_intercept_db: 128.1,
            pathloss_slope_db: 37.6,
            min_distance_m: 35.0,
            multipath: Multipath::PedA,
            seed: 1,
            drops: 10,
            scheme: Scheme::PerBsWz,
            backhaul_per_bs_mbps: 180.0,
            allocation: AllocationMode::Uniform,
            backhaul_list: vec![30.0, 60.0, 90.0, 150.0, 180.0, 360.0, 720.0, 1440.0],
        }
    }
}

impl SimConfig {
    pub fn sectors(&self) -> usize {
        self.cells * self.sectors_per_cell
    }

    pub fn users(&self) -> usize {
        self.sectors() * self.users_per_sector
    }

    pub fn tone_bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz / self.tones as f64
    }

    /// Transmit power per tone in mW.
    pub fn tx_power_per_tone_mw(&self) -> f64 {
        dbm_to_mw(self.tx_psd_dbm_hz + 10.0 * self.tone_bandwidth_hz().log10())
    }

    /// Noise power per tone in mW, noise figure included.
    pub fn noise_per_tone_mw(&self) -> f64 {
        dbm_to_mw(self.noise_psd_dbm_hz + self.noise_figure_db + 10.0 * self.tone_bandwidth_hz().log10())
    }

    /// Backhaul of one sector on one tone under uniform splitting, in bits per
    /// complex symbol.
    pub fn uniform_tone_backhaul_bits(&self, backhaul_per_bs_mbps: f64) -> f64 {
        let per_sector = backhaul_per_bs_mbps * 1e6 / self.sectors_per_cell as f64;
        per_sector / self.tones as f64 / self.tone_bandwidth_hz()
    }

    /// Number of wrap-around rings around the center site.
    pub fn rings(&self) -> Option<usize> {
        (0..)
            .map(|n| (n, 3 * n * (n + 1) + 1))
            .take_while(|&(_, c)| c <= self.cells)
            .find(|&(_, c)| c == self.cells)
            .map(|(n, _)| n)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.rings().is_none() {
            return bad(format!("cells must be a centered hexagonal number, got {}", self.cells));
        }
        for (name, v) in [
            ("sectors_per_cell", self.sectors_per_cell),
            ("users_per_sector", self.users_per_sector),
            ("tones", self.tones),
            ("drops", self.drops),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        for (name, v) in [
            ("bandwidth_hz", self.bandwidth_hz),
            ("bs_distance_m", self.bs_distance_m),
            ("beamwidth_deg", self.beamwidth_deg),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be positive and finite"));
            }
        }
        if !(self.min_distance_m > 0.0) || self.min_distance_m >= self.bs_distance_m / 3f64.sqrt() {
            return bad("min_distance_m must lie inside the cell".into());
        }
        if !(self.front_to_back_db >= 0.0) {
            return bad("front_to_back_db must be nonnegative".into());
        }
        let finite = [
            self.tx_psd_dbm_hz,
            self.antenna_gain_dbi,
            self.noise_psd_dbm_hz,
            self.noise_figure_db,
            self.pathloss_intercept_db,
            self.pathloss_slope_db,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("power, gain and pathloss parameters must be finite".into());
        }
        let backhaul_ok = |b: f64| b >= 0.0 && b.is_finite();
        if !backhaul_ok(self.backhaul_per_bs_mbps) || !self.backhaul_list.iter().all(|&b| backhaul_ok(b)) {
            return bad("backhaul values must be finite and nonnegative".into());
        }
        if !matches!(self.scheme, Scheme::Baseline | Scheme::PerBsWz | Scheme::PerBsNoWz) {
            return bad(format!("scheme `{}` is not simulated", self.scheme));
        }
        Ok(())
    }

    /// Flat `key=value` lines; `#` starts a comment. Unset keys keep their
    /// defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: n + 1, msg };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key=value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            cfg.set(key, value).map_err(|e| match e {
                Error::InvalidConfig(msg) => err(msg),
                other => err(other.to_string()),
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one field from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| Error::InvalidConfig(format!("bad value `{value}` for {key}")))
        }
        match key {
            "cells" => self.cells = num(key, value)?,
            "sectors_per_cell" => self.sectors_per_cell = num(key, value)?,
            "users_per_sector" => self.users_per_sector = num(key, value)?,
            "bandwidth_hz" => self.bandwidth_hz = num(key, value)?,
            "tones" => self.tones = num(key, value)?,
            "bs_distance_m" => self.bs_distance_m = num(key, value)?,
            "tx_psd_dbm_hz" => self.tx_psd_dbm_hz = num(key, value)?,
            "antenna_gain_dbi" => self.antenna_gain_dbi = num(key, value)?,
            "beamwidth_deg" => self.beamwidth_deg = num(key, value)?,
            "front_to_back_db" => self.front_to_back_db = num(key, value)?,
            "noise_psd_dbm_hz" => self.noise_psd_dbm_hz = num(key, value)?,
            "noise_figure_db" => self.noise_figure_db = num(key, value)?,
            "pathloss_intercept_db" => self.pathloss_intercept_db = num(key, value)?,
            "pathloss_slope_db" => self.pathloss_slope_db = num(key, value)?,
            "min_distance_m" => self.min_distance_m = num(key, value)?,
            "multipath" => self.multipath = value.parse()?,
            "seed" => self.seed = num(key, value)?,
            "drops" => self.drops = num(key, value)?,
            "scheme" => {
                self.scheme = value.parse().map_err(|_| Error::InvalidConfig(format!("unknown scheme `{value}`")))?
            }
            "backhaul_per_bs_mbps" => self.backhaul_per_bs_mbps = num(key, value)?,
            "allocation" => self.allocation = value.parse()?,
            "backhaul_list" => {
                self.backhaul_list = value
                    .split(',')
                    .map(|v| num(key, v.trim()))
                    .collect::<Result<Vec<f64>>>()?
            }
            other => return Err(Error::InvalidConfig(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let list: Vec<String> = self.backhaul_list.iter().map(|b| b.to_string()).collect();
        format!(
            "cells={}\nsectors_per_cell={}\nusers_per_sector={}\nbandwidth_hz={}\ntones={}\n\
             bs_distance_m={}\ntx_psd_dbm_hz={}\nantenna_gain_dbi={}\nbeamwidth_deg={}\n\
             front_to_back_db={}\nnoise_psd_dbm_hz={}\nnoise_figure_db={}\npathloss_intercept_db={}\n\
             pathloss_slope_db={}\nmin_distance_m={}\nmultipath={}\nseed={}\ndrops={}\nscheme={}\n\
             backhaul_per_bs_mbps={}\nallocation={}\nbackhaul_list={}\n",
            self.cells,
            self.sectors_per_cell,
            self.users_per_sector,
            self.bandwidth_hz,
            self.tones,
            self.bs_distance_m,
            self.tx_psd_dbm_hz,
            self.antenna_gain_dbi,
            self.beamwidth_deg,
            self.front_to_back_db,
            self.noise_psd_dbm_hz,
            self.noise_figure_db,
            self.pathloss_intercept_db,
            self.pathloss_slope_db,
            self.min_distance_m,
            self.multipath,
            self.seed,
            self.drops,
            self.scheme,
            self.backhaul_per_bs_mbps,
            self.allocation,
            list.join(",")
        )
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Independent generator number `stream` under the master seed. Drop `d` uses
/// stream `2d` for placement and `2d + 1` for fading.
pub fn stream_rng(master: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn per_tone_units() {
        let cfg = SimConfig::default();
        assert_relative_eq!(cfg.tone_bandwidth_hz(), 156_250.0);
        assert_relative_eq!(cfg.uniform_tone_backhaul_bits(180.0), 6.0, epsilon = 1e-12);
        let bw_db = 10.0 * 156_250f64.log10();
        assert_relative_eq!(10.0 * cfg.noise_per_tone_mw().log10(), -162.0 + bw_db, epsilon = 1e-9);
        assert_relative_eq!(10.0 * cfg.tx_power_per_tone_mw().log10(), -27.0 + bw_db, epsilon = 1e-9);
    }

    #[test]
    fn rings() {
        let mut cfg = SimConfig::default();
        assert_eq!(cfg.rings(), Some(2));
        cfg.cells = 1;
        assert_eq!(cfg.rings(), Some(0));
        cfg.cells = 7;
        assert_eq!(cfg.rings(), Some(1));
        cfg.cells = 8;
        assert_eq!(cfg.rings(), None);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn parse_round_trip() {
        let mut cfg = SimConfig::default();
        cfg.drops = 3;
        cfg.allocation = AllocationMode::Optimized;
        cfg.scheme = Scheme::PerBsNoWz;
        cfg.multipath = Multipath::Flat;
        cfg.backhaul_list = vec![1.0, 2.5];
        assert_eq!(SimConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn parse_errors() {
        let e = SimConfig::parse("drops=2\nfoo=1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        assert!(SimConfig::parse("drops=x").is_err());
        assert!(SimConfig::parse("drops").is_err());
        assert!(SimConfig::parse("scheme=joint").is_err());
        assert!(SimConfig::parse("drops=0").is_err());
        let cfg = SimConfig::parse("# comment\n\ndrops = 4 # inline\n").unwrap();
        assert_eq!(cfg.drops, 4);
    }

    #[test]
    fn streams_differ() {
        use rand::Rng;
        let a: u64 = stream_rng(7, 0).random();
        let b: u64 = stream_rng(7, 1).random();
        let c: u64 = stream_rng(7, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
