//! Run configuration: network selection, eigenvalue table, assumption flags
//! and command options, read from JSON with unknown keys rejected.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context};
use serde::Deserialize;

use hetnet::b2b2::{validate_b2, ValidatedB2};
use hetnet::b3b3::{validate, ParamBox, ValidatedB3};
use hetnet::network::{Assumptions, B2B2Spec, B3B3Spec, NuConvention};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub network: String,
    #[serde(default)]
    pub eigenvalues: BTreeMap<String, f64>,
    #[serde(default)]
    pub assumptions: Vec<String>,
    #[serde(default)]
    pub options: Options,
    #[serde(default)]
    pub sweep: Option<BTreeMap<String, SweepRange>>,
    #[serde(default)]
    pub witness_box: Option<ParamBox>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_eps_grid")]
    pub eps_grid: Vec<f64>,
    #[serde(default = "default_n_cap")]
    pub n_cap: usize,
    #[serde(default)]
    pub nu_convention: NuConvention,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_draws")]
    pub max_draws: usize,
}

fn default_seed() -> u64 {
    1
}
fn default_samples() -> usize {
    400_000
}
fn default_eps_grid() -> Vec<f64> {
    vec![5e-2, 2e-2, 8e-3, 3e-3]
}
fn default_n_cap() -> usize {
    10_000
}
fn default_tolerance() -> f64 {
    0.15
}
fn default_max_draws() -> usize {
    200_000
}

impl Default for Options {
    fn default() -> Self {
        Options {
            seed: default_seed(),
            samples: default_samples(),
            eps_grid: default_eps_grid(),
            n_cap: default_n_cap(),
            nu_convention: NuConvention::default(),
            tolerance: default_tolerance(),
            max_draws: default_max_draws(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepRange {
    pub fn values(&self) -> Vec<f64> {
        match self.steps {
            0 => vec![],
            1 => vec![self.start],
            n => (0..n)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

pub enum Validated {
    B3(ValidatedB3),
    B2(ValidatedB2),
}

const B3_KEYS: [&str; 16] = [
    "e12", "e23", "e24", "e31", "e41", "c13", "c14", "c21", "c32", "c42", "c34", "c43", "r1", "r2",
    "r3", "r4",
];
const B2_KEYS: [&str; 8] = ["ea2", "eb3", "eb4", "ca3", "ca4", "cb2", "ra", "rb"];

pub fn b3_spec_from_map(map: &BTreeMap<String, f64>) -> anyhow::Result<B3B3Spec> {
    for k in map.keys() {
        if !B3_KEYS.contains(&k.as_str()) {
            bail!("unknown eigenvalue key for the four-node network: {k}");
        }
    }
    let get = |k: &str| -> anyhow::Result<f64> {
        map.get(k)
            .copied()
            .ok_or_else(|| anyhow!("missing eigenvalue {k}"))
    };
    // Radial rates default to 1: they never enter an index.
    let r = |k: &str| map.get(k).copied().unwrap_or(1.0);
    Ok(B3B3Spec {
        e12: get("e12")?,
        e23: get("e23")?,
        e24: get("e24")?,
        e31: get("e31")?,
        e41: get("e41")?,
        c13: get("c13")?,
        c14: get("c14")?,
        c21: get("c21")?,
        c32: get("c32")?,
        c42: get("c42")?,
        c34: get("c34")?,
        c43: get("c43")?,
        r1: r("r1"),
        r2: r("r2"),
        r3: r("r3"),
        r4: r("r4"),
    })
}

pub fn b2_spec_from_map(map: &BTreeMap<String, f64>) -> anyhow::Result<B2B2Spec> {
    for k in map.keys() {
        if !B2_KEYS.contains(&k.as_str()) {
            bail!("unknown eigenvalue key for the two-node network: {k}");
        }
    }
    let get = |k: &str| -> anyhow::Result<f64> {
        map.get(k)
            .copied()
            .ok_or_else(|| anyhow!("missing eigenvalue {k}"))
    };
    let r = |k: &str| map.get(k).copied().unwrap_or(1.0);
    Ok(B2B2Spec {
        ea2: get("ea2")?,
        eb3: get("eb3")?,
        eb4: get("eb4")?,
        ca3: get("ca3")?,
        ca4: get("ca4")?,
        cb2: get("cb2")?,
        ra: r("ra"),
        rb: r("rb"),
    })
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> anyhow::Result<RunConfig> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(cfg)
    }

    pub fn assumptions(&self) -> anyhow::Result<Assumptions> {
        Ok(Assumptions::from_names(&self.assumptions)?)
    }

    pub fn validated(&self) -> anyhow::Result<Validated> {
        let a = self.assumptions()?;
        match self.network.as_str() {
            "B3B3" => {
                let spec = b3_spec_from_map(&self.eigenvalues)?;
                Ok(Validated::B3(validate(
                    &spec,
                    a,
                    self.options.nu_convention,
                )?))
            }
            "B2B2" => {
                let spec = b2_spec_from_map(&self.eigenvalues)?;
                Ok(Validated::B2(validate_b2(&spec, a)?))
            }
            other => bail!("unknown network type: {other} (expected B3B3 or B2B2)"),
        }
    }
}
