//! Grid sweeps over eigenvalue parameters, one CSV row per grid point.
//! Rows are computed in parallel but emitted in grid order; failures fill
//! the error column instead of aborting the sweep.

use std::collections::BTreeMap;

use rayon::prelude::*;

use hetnet::b2b2::{b2_network_indices, validate_b2};
use hetnet::b3b3::{c_indices, n_indices, pas_report, regime, validate};
use hetnet::extreal::ExtReal;
use hetnet::network::Assumptions;

use crate::config::{b2_spec_from_map, b3_spec_from_map, RunConfig, SweepRange};

fn fmt(v: ExtReal) -> String {
    v.to_string()
}

fn fmtf(v: f64) -> String {
    hetnet::extreal::format_sig(v, 12)
}

/// Cartesian product of the sweep ranges in key order.
fn grid(ranges: &BTreeMap<String, SweepRange>) -> (Vec<String>, Vec<Vec<f64>>) {
    let keys: Vec<String> = ranges.keys().cloned().collect();
    let axes: Vec<Vec<f64>> = ranges.values().map(|r| r.values()).collect();
    if axes.iter().any(|a| a.is_empty()) {
        return (keys, vec![]);
    }
    let mut points = vec![vec![]];
    for axis in &axes {
        let mut next = Vec::with_capacity(points.len() * axis.len());
        for p in &points {
            for v in axis {
                let mut q = p.clone();
                q.push(*v);
                next.push(q);
            }
        }
        points = next;
    }
    (keys, points)
}

pub fn run_sweep(cfg: &RunConfig) -> anyhow::Result<String> {
    let ranges = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("sweep command needs a \"sweep\" block in the config"))?;
    let assumptions = cfg.assumptions()?;
    let (keys, points) = grid(ranges);
    match cfg.network.as_str() {
        "B3B3" => sweep_b3(cfg, assumptions, &keys, &points),
        "B2B2" => sweep_b2(cfg, assumptions, &keys, &points),
        other => anyhow::bail!("unknown network type: {other}"),
    }
}

const B3_PARAMS: [&str; 16] = [
    "e12", "e23", "e24", "e31", "e41", "c13", "c14", "c21", "c32", "c42", "c34", "c43", "r1", "r2",
    "r3", "r4",
];

fn sweep_b3(
    cfg: &RunConfig,
    assumptions: Assumptions,
    keys: &[String],
    points: &[Vec<f64>],
) -> anyhow::Result<String> {
    let n_cap = cfg.options.n_cap;
    let nu = cfg.options.nu_convention;
    let mut csv = String::new();
    csv.push_str(&B3_PARAMS.join(","));
    csv.push_str(",regime,delta,delta_t,sigma,sigma_t");
    csv.push_str(",c_xi3_12,c_xi3_23,c_xi3_31,c_xi4_12,c_xi4_24,c_xi4_41");
    csv.push_str(",n_xi3_12,n_xi3_23,n_xi3_31,n_xi4_12,n_xi4_24,n_xi4_41");
    csv.push_str(",pas_xi3,pas_xi4,pas_network,error\n");

    let rows: Vec<String> = points
        .par_iter()
        .map(|point| {
            let mut eigen = cfg.eigenvalues.clone();
            for (k, v) in keys.iter().zip(point) {
                eigen.insert(k.clone(), *v);
            }
            let spec = match b3_spec_from_map(&eigen) {
                Ok(s) => s,
                Err(e) => return error_row_b3(&eigen, &e.to_string()),
            };
            let params: Vec<String> = B3_PARAMS
                .iter()
                .map(|k| fmtf(*eigen.get(*k).unwrap_or(&1.0)))
                .collect();
            let body = (|| -> Result<String, hetnet::Error> {
                let v = validate(&spec, assumptions, nu)?;
                let reg = regime(&v)?;
                let c = c_indices(&v)?;
                let n = n_indices(&v, n_cap)?;
                let pas = pas_report(&c, &n);
                let d = &v.derived;
                Ok(format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},",
                    reg.name().replace(',', ";"),
                    fmtf(d.delta),
                    fmtf(d.delta_t),
                    fmtf(d.sigma),
                    fmtf(d.sigma_t),
                    fmt(c.xi3[0]),
                    fmt(c.xi3[1]),
                    fmt(c.xi3[2]),
                    fmt(c.xi4[0]),
                    fmt(c.xi4[1]),
                    fmt(c.xi4[2]),
                    fmt(n.x1x2.value),
                    fmt(n.x2x3.value),
                    fmt(n.x3x1.value),
                    fmt(n.x1x2.value),
                    fmt(n.x2x4.value),
                    fmt(n.x4x1.value),
                    pas.pas_xi3,
                    pas.pas_xi4,
                    pas.pas_network
                ))
            })();
            match body {
                Ok(b) => format!("{},{}\n", params.join(","), b),
                Err(e) => format!(
                    "{},{}\n",
                    params.join(","),
                    format!(",,,,,,,,,,,,,,,,,,,,{}", e.to_string().replace(',', ";"))
                ),
            }
        })
        .collect();
    for r in rows {
        csv.push_str(&r);
    }
    Ok(csv)
}

fn error_row_b3(eigen: &BTreeMap<String, f64>, msg: &str) -> String {
    let params: Vec<String> = B3_PARAMS
        .iter()
        .map(|k| eigen.get(*k).map_or(String::new(), |v| fmtf(*v)))
        .collect();
    format!(
        "{},{}\n",
        params.join(","),
        format!(",,,,,,,,,,,,,,,,,,,,{}", msg.replace(',', ";"))
    )
}

const B2_PARAMS: [&str; 8] = ["ea2", "eb3", "eb4", "ca3", "ca4", "cb2", "ra", "rb"];

fn sweep_b2(
    cfg: &RunConfig,
    assumptions: Assumptions,
    keys: &[String],
    points: &[Vec<f64>],
) -> anyhow::Result<String> {
    let n_cap = cfg.options.n_cap;
    let mut csv = String::new();
    csv.push_str(&B2_PARAMS.join(","));
    csv.push_str(",regime,delta,delta_t");
    csv.push_str(",c_ab3,c_ba3,c_ab4,c_ba4,n_ab,n_ba3,n_ba4");
    csv.push_str(",pas_c3,pas_c4,pas_network,error\n");
    let rows: Vec<String> = points
        .par_iter()
        .map(|point| {
            let mut eigen = cfg.eigenvalues.clone();
            for (k, v) in keys.iter().zip(point) {
                eigen.insert(k.clone(), *v);
            }
            let params: Vec<String> = B2_PARAMS
                .iter()
                .map(|k| eigen.get(*k).map_or(String::new(), |v| fmtf(*v)))
                .collect();
            let body = (|| -> anyhow::Result<String> {
                let spec = b2_spec_from_map(&eigen)?;
                let v = validate_b2(&spec, assumptions)?;
                let r = b2_network_indices(&v, n_cap)?;
                let d = &v.derived;
                let pas_c3 = r.c_ab3.is_positive() && r.c_ba3.is_positive();
                let pas_c4 = r.c_ab4.is_positive() && r.c_ba4.is_positive();
                let pas_net = r.n_ab.value.is_positive()
                    && r.n_ba3.value.is_positive()
                    && r.n_ba4.value.is_positive();
                Ok(format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},",
                    if d.delta < 0.0 { "delta<0" } else { "delta>0" },
                    fmtf(d.delta),
                    fmtf(d.delta_t),
                    fmt(r.c_ab3),
                    fmt(r.c_ba3),
                    fmt(r.c_ab4),
                    fmt(r.c_ba4),
                    fmt(r.n_ab.value),
                    fmt(r.n_ba3.value),
                    fmt(r.n_ba4.value),
                    pas_c3,
                    pas_c4,
                    pas_net
                ))
            })();
            match body {
                Ok(b) => format!("{},{}\n", params.join(","), b),
                Err(e) => {
                    let tail = format!(",,,,,,,,,,,,,{}", e.to_string().replace(',', ";"));
                    format!("{},{}\n", params.join(","), tail)
                }
            }
        })
        .collect();
    for r in rows {
        csv.push_str(&r);
    }
    Ok(csv)
}
