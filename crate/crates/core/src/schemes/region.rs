//! Two-user symmetric rate regions: one corner point per decoding order, closed
//! under time-sharing and rate reduction.

use super::{
    rates_baseline, rates_joint_bs_sic, rates_per_bs_sic_nowz, rates_per_bs_sic_wz,
    two_user_symmetric_joint_q, DecodingOrder, QuantizationProfile, Scheme,
};
use crate::error::{Error, Result};
use crate::network::make_symmetric_two_user;

const HULL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoUserRegion {
    pub scheme: Scheme,
    /// `(R1, R2)` for decoding orders (1,2) and (2,1); a single point for the baseline.
    pub corners: Vec<(f64, f64)>,
    /// Counter-clockwise hull vertices starting at the origin.
    pub hull: Vec<(f64, f64)>,
}

impl TwoUserRegion {
    fn from_corners(scheme: Scheme, corners: Vec<(f64, f64)>) -> Self {
        let mut pts = vec![(0.0, 0.0)];
        for &(r1, r2) in &corners {
            pts.extend([(r1, r2), (r1, 0.0), (0.0, r2)]);
        }
        Self { scheme, hull: convex_hull(pts), corners }
    }

    pub fn sum_rate(&self) -> f64 {
        self.hull.iter().map(|(a, b)| a + b).fold(0.0, f64::max)
    }

    /// Whether `(r1, r2)` lies in the region, up to `tol`.
    pub fn contains(&self, (r1, r2): (f64, f64), tol: f64) -> bool {
        let n = self.hull.len();
        if n < 3 {
            return self.hull.iter().any(|&(a, b)| (a - r1).abs() <= tol && (b - r2).abs() <= tol);
        }
        (0..n).all(|i| {
            let (a, b) = (self.hull[i], self.hull[(i + 1) % n]);
            let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt().max(f64::MIN_POSITIVE);
            cross(a, b, (r1, r2)) / len >= -tol
        })
    }

    /// `R1,R2,label` rows for the corners and the hull.
    pub fn to_csv_rows(&self) -> String {
        let mut out = String::new();
        let tag = self.scheme.tag();
        let labels = ["corner-12", "corner-21"];
        for (i, (r1, r2)) in self.corners.iter().enumerate() {
            out.push_str(&format!("{r1},{r2},{tag}-{}\n", labels[i.min(1)]));
        }
        for (r1, r2) in &self.hull {
            out.push_str(&format!("{r1},{r2},{tag}-hull\n"));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        format!("R1,R2,label\n{}", self.to_csv_rows())
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain; collinear points are dropped.
fn convex_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite rates"));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() <= HULL_EPS && (a.1 - b.1).abs() <= HULL_EPS);
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= HULL_EPS {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= HULL_EPS {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Region of `scheme` on the symmetric two-user channel. The joint-BS scheme
/// uses the common quantization level that spends `2c` bits over both links.
pub fn two_user_region(scheme: Scheme, snr: f64, inr: f64, c: f64) -> Result<TwoUserRegion> {
    let net = make_symmetric_two_user(snr, inr, c)?;
    let orders = [DecodingOrder::identity(2), DecodingOrder::reversed(2)];
    let pair = |r: &[f64]| (r[0], r[1]);
    let corners = match scheme {
        Scheme::Baseline => {
            let r = rates_baseline(&net);
            vec![pair(&r.rates)]
        }
        Scheme::PerBsWz => orders
            .iter()
            .map(|o| rates_per_bs_sic_wz(&net, o).map(|r| pair(&r.rates)))
            .collect::<Result<_>>()?,
        Scheme::PerBsNoWz => orders
            .iter()
            .map(|o| rates_per_bs_sic_nowz(&net, o).map(|r| pair(&r.rates)))
            .collect::<Result<_>>()?,
        Scheme::JointBs => {
            let q = two_user_symmetric_joint_q(snr, inr, c)?;
            let profile = QuantizationProfile { q: vec![q, q] };
            orders
                .iter()
                .map(|o| rates_joint_bs_sic(&net, o, &profile).map(|(r, _)| pair(&r.rates)))
                .collect::<Result<_>>()?
        }
        Scheme::ImprovedPerBs => return Err(Error::UnsupportedScheme("improved")),
    };
    Ok(TwoUserRegion::from_corners(scheme, corners))
}
