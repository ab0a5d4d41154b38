use std::f64::consts::PI;

use rand::Rng;

use super::SimConfig;
use crate::error::Result;

/// Hexagonal site layout with toroidal wrap-around.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub isd: f64,
    /// Site centers in meters, center site first, then ring by ring.
    pub sites: Vec<[f64; 2]>,
    /// Zero plus the six lattice translations that tile the cluster.
    pub wrap: Vec<[f64; 2]>,
    /// Sector boresights in degrees, counterclockwise from the x axis.
    pub boresights_deg: Vec<f64>,
}

fn axial_to_xy(q: i64, r: i64, isd: f64) -> [f64; 2] {
    let (q, r) = (q as f64, r as f64);
    [isd * (q + r / 2.0), isd * 3f64.sqrt() / 2.0 * r]
}

fn angle_deg(v: [f64; 2]) -> f64 {
    v[1].atan2(v[0]).to_degrees().rem_euclid(360.0)
}

/// Signed difference `a - b` folded into `[-180, 180)`.
fn angle_diff_deg(a: f64, b: f64) -> f64 {
    (a - b + 180.0).rem_euclid(360.0) - 180.0
}

pub fn generate_topology(cfg: &SimConfig) -> Result<Topology> {
    cfg.validate()?;
    let n = cfg.rings().expect("validated") as i64;
    let isd = cfg.bs_distance_m;

    let mut axial = Vec::new();
    for q in -n..=n {
        for r in -n..=n {
            if (q + r).abs() <= n {
                axial.push((q, r));
            }
        }
    }
    let ring = |&(q, r): &(i64, i64)| q.abs().max(r.abs()).max((q + r).abs());
    let mut keyed: Vec<(i64, f64, [f64; 2])> = axial
        .iter()
        .map(|a| {
            let p = axial_to_xy(a.0, a.1, isd);
            (ring(a), (angle_deg(p) * 1e6).round() / 1e6, p)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let sites = keyed.into_iter().map(|(_, _, p)| p).collect();

    let mut wrap = vec![[0.0, 0.0]];
    let (mut q, mut r) = (2 * n + 1, -n);
    for _ in 0..6 {
        wrap.push(axial_to_xy(q, r, isd));
        (q, r) = (-r, q + r);
    }

    let s = cfg.sectors_per_cell;
    let boresights_deg = (0..s).map(|k| 360.0 * k as f64 / s as f64).collect();
    Ok(Topology { isd, sites, wrap, boresights_deg })
}

impl Topology {
    pub fn sectors_per_cell(&self) -> usize {
        self.boresights_deg.len()
    }

    /// Offset from the nearest wrap-around image of `site` to `p`.
    pub fn min_image_offset(&self, site: usize, p: [f64; 2]) -> [f64; 2] {
        let c = self.sites[site];
        self.wrap
            .iter()
            .map(|w| [p[0] - c[0] - w[0], p[1] - c[1] - w[1]])
            .min_by(|a, b| a[0].hypot(a[1]).total_cmp(&b[0].hypot(b[1])))
            .expect("wrap set is nonempty")
    }

    pub fn distance(&self, site: usize, p: [f64; 2]) -> f64 {
        let v = self.min_image_offset(site, p);
        v[0].hypot(v[1])
    }

    /// Angle of `p` seen from the nearest image of `site`, measured from the
    /// boresight of `sector`, in `[-180, 180)`.
    pub fn off_boresight_deg(&self, site: usize, sector: usize, p: [f64; 2]) -> f64 {
        angle_diff_deg(angle_deg(self.min_image_offset(site, p)), self.boresights_deg[sector])
    }

    /// Whether the local offset `v` lies in the hexagon of a site.
    pub fn in_cell(&self, v: [f64; 2]) -> bool {
        (0..3).all(|k| {
            let a = PI / 3.0 * k as f64;
            (v[0] * a.cos() + v[1] * a.sin()).abs() <= self.isd / 2.0
        })
    }

    /// Sector whose azimuth wedge contains the local offset `v`.
    pub fn sector_of(&self, v: [f64; 2]) -> usize {
        let half = 180.0 / self.sectors_per_cell() as f64;
        let a = angle_deg(v);
        self.boresights_deg
            .iter()
            .position(|&b| {
                let d = angle_diff_deg(a, b);
                d >= -half && d < half
            })
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct User {
    pub pos: [f64; 2],
    pub site: usize,
    /// Global sector index `site * sectors_per_cell + local sector`.
    pub sector: usize,
}

/// Users grouped by serving sector: user `g * users_per_sector + u` is the
/// `u`-th user of global sector `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Drop {
    pub users: Vec<User>,
    pub users_per_sector: usize,
}

impl Drop {
    pub fn sector_users(&self, sector: usize) -> std::ops::Range<usize> {
        sector * self.users_per_sector..(sector + 1) * self.users_per_sector
    }
}

/// Uniform placement inside each sector's part of the site hexagon by
/// rejection, keeping at least `min_distance_m` from the site.
pub fn drop_users<R: Rng>(cfg: &SimConfig, topo: &Topology, rng: &mut R) -> Drop {
    let s = topo.sectors_per_cell();
    let radius = topo.isd / 3f64.sqrt();
    let mut users = Vec::with_capacity(cfg.users());
    for (site, c) in topo.sites.iter().enumerate() {
        for local in 0..s {
            for _ in 0..cfg.users_per_sector {
                let v = loop {
                    let v = [rng.random_range(-radius..radius), rng.random_range(-radius..radius)];
                    if topo.in_cell(v) && v[0].hypot(v[1]) >= cfg.min_distance_m && topo.sector_of(v) == local {
                        break v;
                    }
                };
                users.push(User { pos: [c[0] + v[0], c[1] + v[1]], site, sector: site * s + local });
            }
        }
    }
    Drop { users, users_per_sector: cfg.users_per_sector }
}
