//! Network instances for the uplink multicell model: `L` users, each paired with
//! a base-station that forwards a compressed observation to a central processor
//! over a backhaul link of finite capacity.
//!
//! All quantities are real-valued. Rates and backhaul capacities are in bits per
//! real channel use; logs are base 2.

mod random;
mod text;

pub use random::{random_instance, RandomInstanceSpec};
pub use text::{parse_instance, write_instance};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A single uplink network: gains `h[i][j]` from user `i` to base-station `j`,
/// transmit powers, receiver noise variance and backhaul capacities.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInstance {
    gains: DMatrix<f64>,
    powers: Vec<f64>,
    noise: f64,
    backhaul: Vec<f64>,
}

impl NetworkInstance {
    pub fn new(
        gains: DMatrix<f64>,
        powers: Vec<f64>,
        noise: f64,
        backhaul: Vec<f64>,
    ) -> Result<Self> {
        let l = gains.nrows();
        if l == 0 {
            return Err(Error::InvalidNetwork("at least one user is required".into()));
        }
        if gains.ncols() != l {
            return Err(Error::InvalidNetwork(format!(
                "gain matrix must be square, got {}x{}",
                l,
                gains.ncols()
            )));
        }
        if powers.len() != l {
            return Err(Error::LengthMismatch { what: "powers", expected: l, got: powers.len() });
        }
        if backhaul.len() != l {
            return Err(Error::LengthMismatch {
                what: "backhaul capacities",
                expected: l,
                got: backhaul.len(),
            });
        }
        if gains.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidNetwork("gains must be finite".into()));
        }
        if powers.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidNetwork("powers must be finite and non-negative".into()));
        }
        if !(noise.is_finite() && noise > 0.0) {
            return Err(Error::InvalidNetwork("noise level must be finite and positive".into()));
        }
        // +inf is a legal capacity; NaN is not.
        if backhaul.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::InvalidNetwork("backhaul capacities must be non-negative".into()));
        }
        Ok(Self { gains, powers, noise, backhaul })
    }

    pub fn users(&self) -> usize {
        self.powers.len()
    }

    /// Amplitude gain from `user` to base-station `bs`.
    pub fn gain(&self, user: usize, bs: usize) -> f64 {
        self.gains[(user, bs)]
    }

    pub fn gains(&self) -> &DMatrix<f64> {
        &self.gains
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn backhaul(&self) -> &[f64] {
        &self.backhaul
    }

    /// `h_{user,bs}^2 P_user`.
    pub fn received_power(&self, user: usize, bs: usize) -> f64 {
        let h = self.gains[(user, bs)];
        h * h * self.powers[user]
    }

    /// Same channel, different backhaul capacities.
    pub fn with_backhaul(&self, backhaul: Vec<f64>) -> Result<Self> {
        Self::new(self.gains.clone(), self.powers.clone(), self.noise, backhaul)
    }

    pub fn with_uniform_backhaul(&self, c: f64) -> Result<Self> {
        self.with_backhaul(vec![c; self.users()])
    }

    pub fn derive_ratios(&self) -> DerivedRatios {
        derive_ratios(self)
    }
}

/// SNR and INR of every link, normalized by the noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedRatios {
    pub snr: Vec<f64>,
    /// `inr[(i, j)]` is the interference of user `i` at base-station `j`; the
    /// diagonal is zero.
    pub inr: DMatrix<f64>,
}

pub fn derive_ratios(net: &NetworkInstance) -> DerivedRatios {
    let l = net.users();
    let snr = (0..l).map(|i| net.received_power(i, i) / net.noise).collect();
    let inr = DMatrix::from_fn(l, l, |i, j| {
        if i == j {
            0.0
        } else {
            net.received_power(i, j) / net.noise
        }
    });
    DerivedRatios { snr, inr }
}

fn check_ratio(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite and non-negative, got {v}")))
    }
}

/// Two-user symmetric network with `P = N0 = 1`: direct gains `sqrt(snr)`,
/// cross gains `sqrt(inr)`, backhaul `c` on both links.
pub fn make_symmetric_two_user(snr: f64, inr: f64, c: f64) -> Result<NetworkInstance> {
    check_ratio("snr", snr)?;
    check_ratio("inr", inr)?;
    if !(c >= 0.0) {
        return Err(Error::InvalidArgument(format!("backhaul must be non-negative, got {c}")));
    }
    let (d, x) = (snr.sqrt(), inr.sqrt());
    let gains = DMatrix::from_row_slice(2, 2, &[d, x, x, d]);
    NetworkInstance::new(gains, vec![1.0, 1.0], 1.0, vec![c, c])
}

/// Soft-handoff Wyner network: user `i+1` interferes only at base-station `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct WynerInstance {
    net: NetworkInstance,
    weak_interference: bool,
}

impl WynerInstance {
    /// Wraps an existing instance after checking the bidiagonal sparsity pattern.
    pub fn from_network(net: NetworkInstance) -> Result<Self> {
        let l = net.users();
        for i in 0..l {
            for j in 0..l {
                if i != j && i != j + 1 && net.gain(i, j) != 0.0 {
                    return Err(Error::InvalidNetwork(format!(
                        "not a Wyner instance: user {} reaches base-station {}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let r = net.derive_ratios();
        let weak_interference = (0..l.saturating_sub(1)).all(|i| r.inr[(i + 1, i)] <= r.snr[i]);
        Ok(Self { net, weak_interference })
    }

    pub fn network(&self) -> &NetworkInstance {
        &self.net
    }

    pub fn into_network(self) -> NetworkInstance {
        self.net
    }

    /// `INR_{i+1,i} <= SNR_i` for every `i < L`.
    pub fn weak_interference(&self) -> bool {
        self.weak_interference
    }

    pub fn users(&self) -> usize {
        self.net.users()
    }

    pub fn snr(&self, i: usize) -> f64 {
        self.net.received_power(i, i) / self.net.noise()
    }

    /// Interference of user `i+1` at base-station `i`; zero for the last index.
    pub fn inr_from_next(&self, i: usize) -> f64 {
        if i + 1 < self.users() {
            self.net.received_power(i + 1, i) / self.net.noise()
        } else {
            0.0
        }
    }
}

/// Builds a Wyner instance with unit powers and noise from linear SNR/INR values.
pub fn make_wyner(snr: &[f64], inr: &[f64], backhaul: &[f64]) -> Result<WynerInstance> {
    let l = snr.len();
    if l == 0 {
        return Err(Error::InvalidNetwork("at least one user is required".into()));
    }
    if inr.len() != l - 1 {
        return Err(Error::LengthMismatch { what: "INR values", expected: l - 1, got: inr.len() });
    }
    if backhaul.len() != l {
        return Err(Error::LengthMismatch {
            what: "backhaul capacities",
            expected: l,
            got: backhaul.len(),
        });
    }
    for &s in snr {
        check_ratio("snr", s)?;
    }
    for &x in inr {
        check_ratio("inr", x)?;
    }
    let mut gains = DMatrix::zeros(l, l);
    for i in 0..l {
        gains[(i, i)] = snr[i].sqrt();
        if i + 1 < l {
            gains[(i + 1, i)] = inr[i].sqrt();
        }
    }
    let net = NetworkInstance::new(gains, vec![1.0; l], 1.0, backhaul.to_vec())?;
    WynerInstance::from_network(net)
}

/// `10^(db/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
