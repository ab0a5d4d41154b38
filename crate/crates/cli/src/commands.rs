use std::fs;
use std::path::Path;

use anyhow::Context;

use uplink_sic_core::alloc::{allocation_oracle_grid, allocation_sum_rate, kkt_residual, optimal_allocation};
use uplink_sic_core::bounds::{gap_certificate, nnc_region, nnc_sum_rate};
use uplink_sic_core::network::{db_to_linear, parse_instance, NetworkInstance};
use uplink_sic_core::schemes::{
    best_decoding_order, half_bit_point, rate_wz_closed_form, sinr_bars, two_user_region,
};
use uplink_sic_core::sim::{cdf_csv, summary_csv, AllocationMode, Campaign, SimConfig, SimResult};
use uplink_sic_core::verify::{run_all, wyner_trial};
use uplink_sic_core::{DecodingOrder, QuantizationProfile, Scheme};

use crate::{AllocateArgs, Failure, NncArgs, OutArg, RegionArgs, RkCurveArgs, SimArgs, VerifyArgs, WynerGapArgs};

const KKT_LIMIT: f64 = 1e-8;
const ORACLE_LIMIT: f64 = 1e-3;
const ORDER_SEARCH_LIMIT: u64 = 5040;

type Outcome = Result<(), Failure>;

fn emit(out: &OutArg, file: &str, body: &str) -> anyhow::Result<()> {
    match &out.out {
        None => print!("{body}"),
        Some(dir) => write_file(dir, file, body)?,
    }
    Ok(())
}

fn write_file(dir: &Path, file: &str, body: &str) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(file);
    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn read_instance(path: &Path) -> anyhow::Result<NetworkInstance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn rk_curve(a: &RkCurveArgs) -> Outcome {
    if !(a.step > 0.0) || !(a.c_max >= 0.0) || !a.c_max.is_finite() {
        return Err(anyhow::anyhow!("--step must be positive and --c-max finite and nonnegative").into());
    }
    let s = db_to_linear(a.sinr_db);
    let (c_half, gap) = half_bit_point(s)?;
    let limit = rate_wz_closed_form(s, f64::INFINITY);
    let n = (a.c_max / a.step + 1e-9).floor() as usize;
    let mut rows: Vec<(f64, bool)> = (0..=n).map(|i| (i as f64 * a.step, false)).collect();
    if c_half <= a.c_max {
        rows.push((c_half, true));
        rows.sort_by(|x, y| x.0.total_cmp(&y.0));
    }
    let mut csv = String::from("C_bits,rate_bits,sic_limit_bits,half_bit_marker\n");
    for (c, marker) in rows {
        csv.push_str(&format!("{c},{},{limit},{}\n", rate_wz_closed_form(s, c), u8::from(marker)));
    }
    emit(&a.out, "rk_curve.csv", &csv)?;
    eprintln!("half-bit point: C={c_half}, gap={gap}");
    Ok(())
}

pub fn region(a: &RegionArgs) -> Outcome {
    let (snr, inr) = (db_to_linear(a.snr_db), db_to_linear(a.inr_db));
    let schemes = match a.scheme {
        Some(s) => vec![Scheme::from(s)],
        None => vec![Scheme::Baseline, Scheme::PerBsNoWz, Scheme::PerBsWz, Scheme::JointBs],
    };
    let mut csv = String::from("R1,R2,label\n");
    for scheme in schemes {
        let r = two_user_region(scheme, snr, inr, a.backhaul_bits)?;
        csv.push_str(&r.to_csv_rows());
        eprintln!("{scheme}: sum rate {}", r.sum_rate());
    }
    emit(&a.out, "region.csv", &csv)?;
    Ok(())
}

pub fn wyner_gap(a: &WynerGapArgs) -> Outcome {
    let scheme = Scheme::from(a.scheme);
    if !matches!(scheme, Scheme::PerBsWz | Scheme::PerBsNoWz) {
        return Err(anyhow::anyhow!("--scheme must be wz or nowz").into());
    }
    if a.users == 0 {
        return Err(anyhow::anyhow!("--users must be positive").into());
    }
    let mut worst = None;
    let mut violations = 0u64;
    for i in 0..a.trials {
        let cert = gap_certificate(&wyner_trial(a.seed, i, a.users), scheme)?;
        violations += u64::from(!cert.ok());
        if worst.as_ref().is_none_or(|w: &uplink_sic_core::GapCertificate| cert.gap > w.gap) {
            worst = Some(cert);
        }
    }
    let limit = uplink_sic_core::bounds::gap_limit(scheme, a.users)?;
    let max_gap = worst.as_ref().map_or(0.0, |w| w.gap);
    println!("scheme={scheme}, L={}, trials={}, max_gap={max_gap}, limit={limit}, violations={violations}", a.users, a.trials);
    if let Some(w) = &worst {
        println!("{w}");
    }
    if violations > 0 {
        return Err(Failure::Verification(format!("{violations} certificates exceed the gap limit")));
    }
    Ok(())
}

pub fn nnc(a: &NncArgs) -> Outcome {
    let net = read_instance(&a.instance)?;
    let q = a.q.unwrap_or(net.noise());
    let region = nnc_region(&net, &QuantizationProfile { q: vec![q; net.users()] })?;
    emit(&a.out, "nnc.csv", &region.to_csv())?;
    eprintln!("sum-rate bound: {}", nnc_sum_rate(&region));
    Ok(())
}

pub fn allocate(a: &AllocateArgs) -> Outcome {
    let net = read_instance(&a.instance)?;
    let order = match &a.order {
        Some(text) => {
            let order = DecodingOrder::parse_one_based(text)?;
            if order.len() != net.users() {
                return Err(anyhow::anyhow!("--order has {} entries, instance has {} users", order.len(), net.users()).into());
            }
            order
        }
        None => best_decoding_order(&net, Scheme::PerBsWz, ORDER_SEARCH_LIMIT)?.0,
    };
    let alloc = optimal_allocation(&net, &order, a.total_bits)?;
    let s = sinr_bars(&net, &order)?;
    let value = allocation_sum_rate(&s, &alloc.c);
    let kkt = kkt_residual(&net, &order, &alloc)?;
    emit(&a.out, "allocation.csv", &alloc.to_csv())?;
    eprintln!("order={order}, sum_rate={value}, kkt_residual={kkt:e}");
    let mut problems = Vec::new();
    if kkt > KKT_LIMIT {
        problems.push(format!("KKT residual {kkt:e} above {KKT_LIMIT:e}"));
    }
    if let Some(step) = a.oracle_step {
        let grid = allocation_oracle_grid(&net, &order, a.total_bits, step)?;
        let diff = value - allocation_sum_rate(&s, &grid.c);
        eprintln!("grid_sum_rate={}, difference={diff:e}", allocation_sum_rate(&s, &grid.c));
        if diff.abs() > ORACLE_LIMIT {
            problems.push(format!("grid oracle differs by {diff:e}"));
        }
    }
    if !problems.is_empty() {
        return Err(Failure::Verification(problems.join("; ")));
    }
    Ok(())
}

fn sim_config(a: &SimArgs) -> anyhow::Result<SimConfig> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            SimConfig::parse(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => SimConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(drops) = a.drops {
        cfg.drops = drops;
    }
    if let Some(s) = a.scheme {
        cfg.scheme = s.into();
    }
    if let Some(m) = a.alloc {
        cfg.allocation = m.into();
    }
    if let Some(b) = a.backhaul_mbps {
        cfg.backhaul_per_bs_mbps = b;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(results: &[SimResult], out: &Path) -> anyhow::Result<()> {
    write_file(out, "cdf.csv", &cdf_csv(results))?;
    write_file(out, "summary.csv", &summary_csv(results))?;
    for r in results {
        eprintln!(
            "{} {} Mbps {}: {:.2} Mbps per cell, median user {:.3} Mbps",
            r.scheme,
            r.backhaul_mbps,
            r.allocation,
            r.mean_percell_mbps,
            r.percentile(0.5)
        );
    }
    Ok(())
}

pub fn simulate(a: &SimArgs) -> Outcome {
    let cfg = sim_config(a)?;
    let campaign = Campaign::prepare(&cfg)?;
    let schemes = match a.scheme {
        Some(_) if cfg.scheme != Scheme::Baseline => vec![Scheme::Baseline, cfg.scheme],
        Some(_) => vec![Scheme::Baseline],
        None => vec![Scheme::Baseline, Scheme::PerBsNoWz, Scheme::PerBsWz],
    };
    let results = schemes
        .into_iter()
        .map(|s| campaign.evaluate(s, cfg.backhaul_per_bs_mbps, cfg.allocation))
        .collect::<Result<Vec<_>, _>>()?;
    report(&results, &a.out)?;
    Ok(())
}

pub fn sweep(a: &SimArgs) -> Outcome {
    let cfg = sim_config(a)?;
    let campaign = Campaign::prepare(&cfg)?;
    let mut results = Vec::new();
    for &b in &cfg.backhaul_list {
        for mode in [AllocationMode::Uniform, AllocationMode::Optimized] {
            if cfg.scheme != Scheme::Baseline {
                results.push(campaign.evaluate(Scheme::Baseline, b, mode)?);
            }
            results.push(campaign.evaluate(cfg.scheme, b, mode)?);
        }
    }
    report(&results, &a.out)?;
    Ok(())
}

pub fn verify(a: &VerifyArgs) -> Outcome {
    let outcomes = run_all(a.seed)?;
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} suites, {failed} failed", outcomes.len());
    if failed > 0 {
        return Err(Failure::Verification(format!("{failed} suites failed")));
    }
    Ok(())
}
