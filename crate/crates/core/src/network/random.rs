use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{db_to_linear, NetworkInstance};

/// Parameters for [`random_instance`]. Ranges are closed intervals `(lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomInstanceSpec {
    pub users: usize,
    pub snr_range_db: (f64, f64),
    /// Ignored for Wyner instances, where `INR_{i+1,i}` is drawn uniformly in `[0, SNR_i]`.
    pub inr_range_db: (f64, f64),
    pub backhaul_range: (f64, f64),
    pub wyner: bool,
}

impl Default for RandomInstanceSpec {
    fn default() -> Self {
        Self {
            users: 3,
            snr_range_db: (0.0, 30.0),
            inr_range_db: (-10.0, 20.0),
            backhaul_range: (0.0, 8.0),
            wyner: false,
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Deterministic random network with unit powers and noise.
pub fn random_instance(seed: u64, spec: &RandomInstanceSpec) -> NetworkInstance {
    let l = spec.users.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let snr: Vec<f64> = (0..l).map(|_| db_to_linear(uniform(&mut rng, spec.snr_range_db))).collect();
    let mut gains = DMatrix::zeros(l, l);
    for (i, s) in snr.iter().enumerate() {
        gains[(i, i)] = s.sqrt();
    }
    if spec.wyner {
        for i in 0..l - 1 {
            let inr = rng.random_range(0.0..=1.0) * snr[i];
            gains[(i + 1, i)] = inr.sqrt();
        }
    } else {
        for i in 0..l {
            for j in 0..l {
                if i != j {
                    gains[(i, j)] = db_to_linear(uniform(&mut rng, spec.inr_range_db)).sqrt();
                }
            }
        }
    }
    let backhaul = (0..l).map(|_| uniform(&mut rng, spec.backhaul_range)).collect();
    NetworkInstance::new(gains, vec![1.0; l], 1.0, backhaul)
        .expect("generated instance satisfies the constructor invariants")
}
