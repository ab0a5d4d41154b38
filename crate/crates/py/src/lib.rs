//! Python bindings. Decoding orders and user indices are zero-based.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use uplink_sic_core as core;
use uplink_sic_core::bounds::{gap_certificate as certificate, gap_limit};
use uplink_sic_core::network::{make_symmetric_two_user, make_wyner, parse_instance, write_instance};
use uplink_sic_core::schemes::{self, rates_for};
use uplink_sic_core::sim::{AllocationMode, Campaign, SimConfig};
use uplink_sic_core::{DecodingOrder, QuantizationProfile, Scheme};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn scheme(tag: &str) -> PyResult<Scheme> {
    tag.parse().map_err(err)
}

fn order_for(net: &core::NetworkInstance, order: Option<Vec<usize>>) -> PyResult<DecodingOrder> {
    let order = match order {
        Some(perm) => DecodingOrder::new(perm).map_err(err)?,
        None => schemes::sinr_descending_order(net),
    };
    if order.len() != net.users() {
        return Err(err(format!("order has {} entries, network has {} users", order.len(), net.users())));
    }
    Ok(order)
}

/// Uplink network: `gains[i][j]` is the power gain from user `i` to base-station `j`.
#[pyclass(name = "NetworkInstance", module = "uplink_sic", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyNetwork {
    inner: core::NetworkInstance,
}

#[pymethods]
impl PyNetwork {
    #[new]
    #[pyo3(signature = (gains, powers, noise, backhaul))]
    fn new(gains: Vec<Vec<f64>>, powers: Vec<f64>, noise: f64, backhaul: Vec<f64>) -> PyResult<Self> {
        let l = gains.len();
        if gains.iter().any(|row| row.len() != l) {
            return Err(err("gain matrix must be square"));
        }
        let m = nalgebra::DMatrix::from_fn(l, l, |i, j| gains[i][j]);
        let inner = core::NetworkInstance::new(m, powers, noise, backhaul).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self { inner: parse_instance(text).map_err(err)? })
    }

    #[staticmethod]
    fn symmetric_two_user(snr: f64, inr: f64, backhaul: f64) -> PyResult<Self> {
        Ok(Self { inner: make_symmetric_two_user(snr, inr, backhaul).map_err(err)? })
    }

    /// Linear Wyner chain; `inr[i]` is the gain from user `i+1` into cell `i`.
    #[staticmethod]
    fn wyner(snr: Vec<f64>, inr: Vec<f64>, backhaul: Vec<f64>) -> PyResult<Self> {
        let w = make_wyner(&snr, &inr, &backhaul).map_err(err)?;
        Ok(Self { inner: w.into_network() })
    }

    fn to_text(&self) -> String {
        write_instance(&self.inner)
    }

    #[getter]
    fn users(&self) -> usize {
        self.inner.users()
    }

    #[getter]
    fn gains(&self) -> Vec<Vec<f64>> {
        let l = self.inner.users();
        (0..l).map(|i| (0..l).map(|j| self.inner.gain(i, j)).collect()).collect()
    }

    #[getter]
    fn powers(&self) -> Vec<f64> {
        self.inner.powers().to_vec()
    }

    #[getter]
    fn noise(&self) -> f64 {
        self.inner.noise()
    }

    #[getter]
    fn backhaul(&self) -> Vec<f64> {
        self.inner.backhaul().to_vec()
    }

    fn with_backhaul(&self, backhaul: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: self.inner.with_backhaul(backhaul).map_err(err)? })
    }

    /// Per-user rates in bits per real channel use.
    #[pyo3(signature = (scheme_tag, order=None))]
    fn rates(&self, scheme_tag: &str, order: Option<Vec<usize>>) -> PyResult<Vec<f64>> {
        let order = order_for(&self.inner, order)?;
        Ok(rates_for(&self.inner, &order, scheme(scheme_tag)?).map_err(err)?.rates)
    }

    /// Sum-rate maximizing order and its rates.
    #[pyo3(signature = (scheme_tag, exhaustive_limit=5040))]
    fn best_order(&self, scheme_tag: &str, exhaustive_limit: u64) -> PyResult<(Vec<usize>, Vec<f64>)> {
        let (order, rates) =
            schemes::best_decoding_order(&self.inner, scheme(scheme_tag)?, exhaustive_limit).map_err(err)?;
        Ok((order.perm().to_vec(), rates.rates))
    }

    #[pyo3(signature = (order=None))]
    fn sinr_bars(&self, order: Option<Vec<usize>>) -> PyResult<Vec<f64>> {
        let order = order_for(&self.inner, order)?;
        schemes::sinr_bars(&self.inner, &order).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("NetworkInstance(users={}, noise={})", self.inner.users(), self.inner.noise())
    }
}

#[pyfunction]
fn rate_wz(sinr: f64, backhaul: f64) -> f64 {
    schemes::rate_wz_closed_form(sinr, backhaul)
}

/// `(C, gap)` where the rate is half a bit short of its SIC limit.
#[pyfunction]
fn half_bit_point(sinr: f64) -> PyResult<(f64, f64)> {
    schemes::half_bit_point(sinr).map_err(err)
}

/// Joint-decoding bounds as `(members, bits)` pairs with a common noise level `q`.
#[pyfunction]
#[pyo3(signature = (net, q=None))]
fn nnc_region(net: &PyNetwork, q: Option<f64>) -> PyResult<Vec<(Vec<usize>, f64)>> {
    let l = net.inner.users();
    let q = q.unwrap_or(net.inner.noise());
    let region = core::nnc_region(&net.inner, &QuantizationProfile { q: vec![q; l] }).map_err(err)?;
    Ok((1..1usize << l)
        .map(|mask| ((0..l).filter(|i| mask >> i & 1 == 1).collect(), region.bound(mask)))
        .collect())
}

/// Gap certificate on a Wyner chain as a dict.
#[pyfunction]
#[pyo3(signature = (snr, inr, backhaul, scheme_tag="wz"))]
fn gap_certificate<'py>(
    py: Python<'py>,
    snr: Vec<f64>,
    inr: Vec<f64>,
    backhaul: Vec<f64>,
    scheme_tag: &str,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let w = make_wyner(&snr, &inr, &backhaul).map_err(err)?;
    let c = certificate(&w, scheme(scheme_tag)?).map_err(err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("achievable", c.achievable_sum)?;
    d.set_item("upper", c.upper_bound)?;
    d.set_item("gap", c.gap)?;
    d.set_item("limit", c.bound_limit)?;
    d.set_item("weak_interference", c.weak_interference)?;
    d.set_item("ok", c.ok())?;
    Ok(d)
}

#[pyfunction]
fn gap_bound(scheme_tag: &str, users: usize) -> PyResult<f64> {
    gap_limit(scheme(scheme_tag)?, users).map_err(err)
}

/// `(capacities, water_level)` for the given effective SINRs.
#[pyfunction]
fn water_fill(sinr_bars: Vec<f64>, total_bits: f64) -> PyResult<(Vec<f64>, f64)> {
    let a = core::water_fill(&sinr_bars, total_bits).map_err(err)?;
    Ok((a.c, a.alpha))
}

/// `(capacities, water_level, sum_rate)` for a network and order.
#[pyfunction]
#[pyo3(signature = (net, total_bits, order=None))]
fn optimal_allocation(net: &PyNetwork, total_bits: f64, order: Option<Vec<usize>>) -> PyResult<(Vec<f64>, f64, f64)> {
    let order = order_for(&net.inner, order)?;
    let a = core::optimal_allocation(&net.inner, &order, total_bits).map_err(err)?;
    let s = schemes::sinr_bars(&net.inner, &order).map_err(err)?;
    let sum = core::alloc::allocation_sum_rate(&s, &a.c);
    Ok((a.c, a.alpha, sum))
}

/// Campaign for one scheme; returns `(mean_percell_mbps, user_rates_mbps)`.
#[pyfunction]
#[pyo3(signature = (scheme_tag="wz", backhaul_mbps=180.0, allocation="uniform", config=None, overrides=None))]
fn simulate(
    py: Python<'_>,
    scheme_tag: &str,
    backhaul_mbps: f64,
    allocation: &str,
    config: Option<&str>,
    overrides: Option<Vec<(String, String)>>,
) -> PyResult<(f64, Vec<f64>)> {
    let mut cfg = match config {
        Some(text) => SimConfig::parse(text).map_err(err)?,
        None => SimConfig::default(),
    };
    for (k, v) in overrides.unwrap_or_default() {
        cfg.set(&k, &v).map_err(err)?;
    }
    cfg.validate().map_err(err)?;
    let scheme = scheme(scheme_tag)?;
    let mode: AllocationMode = allocation.parse().map_err(err)?;
    let r = py
        .detach(|| Campaign::prepare(&cfg).and_then(|c| c.evaluate(scheme, backhaul_mbps, mode)))
        .map_err(err)?;
    Ok((r.mean_percell_mbps, r.user_rates_mbps))
}

/// Property suites as `(name, passed, detail)`.
#[pyfunction]
#[pyo3(signature = (seed=1))]
fn verify(py: Python<'_>, seed: u64) -> PyResult<Vec<(String, bool, String)>> {
    let out = py.detach(|| core::verify::run_all(seed)).map_err(err)?;
    Ok(out.into_iter().map(|o| (o.name.to_string(), o.passed, o.detail)).collect())
}

#[pymodule]
fn uplink_sic(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetwork>()?;
    m.add_function(wrap_pyfunction!(rate_wz, m)?)?;
    m.add_function(wrap_pyfunction!(half_bit_point, m)?)?;
    m.add_function(wrap_pyfunction!(nnc_region, m)?)?;
    m.add_function(wrap_pyfunction!(gap_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(gap_bound, m)?)?;
    m.add_function(wrap_pyfunction!(water_fill, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_allocation, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
