//! Uplink multicell joint processing with finite-capacity backhaul.
//!
//! Rates are in bits per real channel use. Users and base-stations are indexed
//! from zero in the API and from one in every text format.

pub mod alloc;
pub mod bounds;
pub mod error;
pub mod gaussian;
pub mod network;
pub mod schemes;
pub mod sim;
pub mod verify;

pub use alloc::{allocation_oracle_grid, kkt_residual, optimal_allocation, water_fill, Allocation};
pub use bounds::{
    cutset_upper_bound_wyner, gap_certificate, nnc_region, nnc_sum_rate, wyner_sum_rate_nowz,
    wyner_sum_rate_wz, GapCertificate, NncRegion,
};
pub use error::{Error, Result};
pub use gaussian::{gaussian_conditional_mi, GaussianModel};
pub use network::{
    derive_ratios, make_symmetric_two_user, make_wyner, DerivedRatios, NetworkInstance, WynerInstance,
};
pub use schemes::{DecodingOrder, QuantizationProfile, RateVector, Scheme};
