//! Flat text serialization of [`NetworkInstance`]:
//!
//! ```text
//! # comment
//! L=2
//! N0=1
//! h 1 1 31.6227766
//! h 1 2 10
//! P 1 1
//! C 1 inf
//! ```
//!
//! Indices are 1-based. Gains not listed are zero; every `P` and `C` entry is required.

use std::fmt::Write;

use nalgebra::DMatrix;

use super::NetworkInstance;
use crate::error::{Error, Result};

pub fn write_instance(net: &NetworkInstance) -> String {
    let l = net.users();
    let mut out = String::new();
    writeln!(out, "L={l}").unwrap();
    writeln!(out, "N0={}", net.noise()).unwrap();
    for i in 0..l {
        for j in 0..l {
            let g = net.gain(i, j);
            if g != 0.0 {
                writeln!(out, "h {} {} {}", i + 1, j + 1, g).unwrap();
            }
        }
    }
    for (i, p) in net.powers().iter().enumerate() {
        writeln!(out, "P {} {}", i + 1, p).unwrap();
    }
    for (i, c) in net.backhaul().iter().enumerate() {
        writeln!(out, "C {} {}", i + 1, c).unwrap();
    }
    out
}

fn parse_value(s: &str, line: usize) -> Result<f64> {
    match s {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        _ => s.parse().map_err(|_| Error::Parse { line, msg: format!("bad number `{s}`") }),
    }
}

fn parse_index(s: &str, l: usize, line: usize) -> Result<usize> {
    let i: usize =
        s.parse().map_err(|_| Error::Parse { line, msg: format!("bad index `{s}`") })?;
    if i == 0 || i > l {
        return Err(Error::Parse { line, msg: format!("index {i} out of range 1..={l}") });
    }
    Ok(i - 1)
}

pub fn parse_instance(text: &str) -> Result<NetworkInstance> {
    let mut l: Option<usize> = None;
    let mut noise: Option<f64> = None;
    let mut entries: Vec<(usize, Vec<&str>)> = Vec::new();

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some((key, value)) = content.split_once('=') {
            match key.trim() {
                "L" => {
                    let v: usize = value.trim().parse().map_err(|_| Error::Parse {
                        line,
                        msg: format!("bad user count `{}`", value.trim()),
                    })?;
                    l = Some(v);
                }
                "N0" => noise = Some(parse_value(value.trim(), line)?),
                other => {
                    return Err(Error::Parse { line, msg: format!("unknown key `{other}`") })
                }
            }
        } else {
            entries.push((line, content.split_whitespace().collect()));
        }
    }

    let l = l.ok_or(Error::Parse { line: 0, msg: "missing `L=` header".into() })?;
    let noise = noise.ok_or(Error::Parse { line: 0, msg: "missing `N0=` header".into() })?;
    let mut gains = DMatrix::zeros(l, l);
    let mut powers = vec![None; l];
    let mut backhaul = vec![None; l];

    for (line, fields) in entries {
        match fields.as_slice() {
            ["h", i, j, v] => {
                let (i, j) = (parse_index(i, l, line)?, parse_index(j, l, line)?);
                gains[(i, j)] = parse_value(v, line)?;
            }
            ["P", i, v] => powers[parse_index(i, l, line)?] = Some(parse_value(v, line)?),
            ["C", i, v] => backhaul[parse_index(i, l, line)?] = Some(parse_value(v, line)?),
            _ => {
                return Err(Error::Parse { line, msg: format!("unrecognized entry `{}`", fields.join(" ")) })
            }
        }
    }

    let collect = |v: Vec<Option<f64>>, what: &str| -> Result<Vec<f64>> {
        v.into_iter()
            .enumerate()
            .map(|(i, x)| {
                x.ok_or_else(|| Error::Parse { line: 0, msg: format!("missing `{what} {}`", i + 1) })
            })
            .collect()
    };
    let powers = collect(powers, "P")?;
    let backhaul = collect(backhaul, "C")?;
    NetworkInstance::new(gains, powers, noise, backhaul)
}
