//! The four-node network with two three-node cycles (`xi3`-cycle through
//! `xi_1, xi_2, xi_3` and `xi4`-cycle through `xi_1, xi_2, xi_4`) sharing the
//! connection `[xi_1 -> xi_2]`.
//!
//! Everything here reduces to exponent arithmetic on the reduced return maps
//!
//! ```text
//! ht1(x, y) = (x^rho_t, y x^nu_t)   on H1_out2, domain y < x^(e24/e23 or alpha)
//! h1(x, y)  = (x y^nu,  y^rho)      on H1_out2, domain x < y^(e23/e24 or ...)
//! ```
//!
//! and their one-pass companions between sections. The c-indices come from
//! the closed case tables in [`crate::index_kernel`]; the n-indices from the
//! escape-wedge families those maps generate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal::{ExtReal, PosInf};
use crate::index_kernel::{b3_cycle_indices, CycleNodeParams};
use crate::is_degenerate;
use crate::network::{Assumptions, B3B3Spec, NuConvention, RegimeTags, SigmaBand};
use crate::wedge::{classify_exponents, return_map_chain, ExpWedge};

/// Loop and cusp exponents of the two cycles. Untilded quantities belong to
/// the `xi4`-cycle, `_t` (tilded) ones to the `xi3`-cycle.
///
/// `nu`/`nu_t` carry the convention selected at construction; the composed
/// values (the exponents the return maps actually have) are kept alongside
/// and drive every escape-set computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedQuantities {
    pub rho: f64,
    pub rho_t: f64,
    pub nu: f64,
    pub nu_t: f64,
    pub nu_composed: f64,
    pub nu_t_composed: f64,
    pub delta: f64,
    pub delta_t: f64,
    pub tau: f64,
    pub tau_t: f64,
    pub sigma: f64,
    pub sigma_t: f64,
    /// Domain exponent of the `xi3` return map at the common section when
    /// `c34 < 0`: `e24/e23 - c21 c34 / (e23 e31)`.
    pub alpha: f64,
    /// `tau_t / alpha`, the vacuous-bound exponent at `[xi_4 -> xi_1]`.
    pub beta: f64,
    pub nu_convention: NuConvention,
}

/// All derived quantities of a spec under the chosen loop-exponent
/// convention.
pub fn derived(s: &B3B3Spec, convention: NuConvention) -> DerivedQuantities {
    let rho = s.c42 * s.c14 * s.c21 / (s.e24 * s.e41 * s.e12);
    let rho_t = s.c32 * s.c13 * s.c21 / (s.e23 * s.e31 * s.e12);
    let nu_tail = s.c21 * s.c43 / (s.e24 * s.e41) + s.c13 * s.c42 * s.c21 / (s.e41 * s.e24 * s.e12);
    let nu_t_tail =
        s.c21 * s.c34 / (s.e23 * s.e31) + s.c14 * s.c32 * s.c21 / (s.e31 * s.e23 * s.e12);
    let nu_composed = -s.e23 / s.e24 + nu_tail;
    let nu_t_composed = -s.e24 / s.e23 + nu_t_tail;
    let (nu, nu_t) = match convention {
        NuConvention::Composed => (nu_composed, nu_t_composed),
        NuConvention::Display => (s.e23 / s.e24 + nu_tail, s.e24 / s.e23 + nu_t_tail),
    };
    let delta = s.c43 / s.e41 + s.c13 * s.c42 / (s.e12 * s.e41)
        - s.e23 * s.c14 * s.c42 / (s.e12 * s.e41 * s.e24);
    let delta_t = s.c34 / s.e31 + s.c14 * s.c32 / (s.e12 * s.e31)
        - s.e24 * s.c13 * s.c32 / (s.e12 * s.e31 * s.e23);
    let tau = s.c13 / s.e12 - s.e23 * s.c14 / (s.e12 * s.e24)
        + s.c14 * s.c21 * s.c43 / (s.e12 * s.e41 * s.e24);
    let tau_t = s.c14 / s.e12 - s.e24 * s.c13 / (s.e12 * s.e23)
        + s.c13 * s.c21 * s.c34 / (s.e12 * s.e31 * s.e23);
    let sigma = s.c14 * s.e23 / (s.e12 * s.e24) - s.c13 / s.e12;
    let sigma_t = s.c13 * s.e24 / (s.e12 * s.e23) - s.c14 / s.e12;
    let alpha = s.e24 / s.e23 - s.c21 * s.c34 / (s.e23 * s.e31);
    let beta = tau_t / alpha;
    DerivedQuantities {
        rho,
        rho_t,
        nu,
        nu_t,
        nu_composed,
        nu_t_composed,
        delta,
        delta_t,
        tau,
        tau_t,
        sigma,
        sigma_t,
        alpha,
        beta,
        nu_convention: convention,
    }
}

/// A spec that passed positivity, genericity and the flagged assumptions,
/// carrying its derived quantities and sign tags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidatedB3 {
    pub spec: B3B3Spec,
    pub assumptions: Assumptions,
    pub derived: DerivedQuantities,
    pub tags: RegimeTags,
}

/// Validates a spec against positivity, flagged assumptions and genericity.
pub fn validate(
    spec: &B3B3Spec,
    assumptions: Assumptions,
    convention: NuConvention,
) -> Result<ValidatedB3> {
    spec.check_positivity()?;
    let d = derived(spec, convention);

    let delta_scale = s_abs(&[
        spec.c43 / spec.e41,
        spec.c13 * spec.c42 / (spec.e12 * spec.e41),
        spec.e23 * spec.c14 * spec.c42 / (spec.e12 * spec.e41 * spec.e24),
    ]);
    let delta_t_scale = s_abs(&[
        spec.c34 / spec.e31,
        spec.c14 * spec.c32 / (spec.e12 * spec.e31),
        spec.e24 * spec.c13 * spec.c32 / (spec.e12 * spec.e31 * spec.e23),
    ]);
    let generic: [(&'static str, f64, f64); 7] = [
        ("delta", d.delta, delta_scale),
        ("delta_t", d.delta_t, delta_t_scale),
        ("sigma - 1", d.sigma - 1.0, d.sigma),
        ("sigma_t - 1", d.sigma_t - 1.0, d.sigma_t),
        ("alpha - 1", d.alpha - 1.0, d.alpha),
        ("b2 = c43/e41", spec.c43 / spec.e41, 1.0),
        ("b2_t = c34/e31", spec.c34 / spec.e31, 1.0),
    ];
    for (name, v, scale) in generic {
        if is_degenerate(v, scale) {
            return Err(Error::NonGeneric(name, v));
        }
    }

    if assumptions.a1 {
        if !(d.rho > 1.0) {
            return Err(Error::AssumptionViolation(format!(
                "rho = {} must exceed 1",
                d.rho
            )));
        }
        if !(d.rho_t > 1.0) {
            return Err(Error::AssumptionViolation(format!(
                "rho_t = {} must exceed 1",
                d.rho_t
            )));
        }
        let ratio = spec.e24 / spec.e23;
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::AssumptionViolation(format!(
                "e24/e23 = {ratio} must lie in (0, 1)"
            )));
        }
    }
    if assumptions.a2 {
        for (name, v) in [
            ("tau", d.tau),
            ("tau_t", d.tau_t),
            ("delta", d.delta),
            ("delta_t", d.delta_t),
        ] {
            if !(v > 0.0) {
                return Err(Error::AssumptionViolation(format!(
                    "{name} = {v} must be positive"
                )));
            }
        }
        if spec.c34 < 0.0 && !(spec.c34.abs() < spec.e31) {
            return Err(Error::AssumptionViolation(format!(
                "|c34| = {} must stay below e31 = {}",
                spec.c34.abs(),
                spec.e31
            )));
        }
        if spec.c43 < 0.0 && !(spec.c43.abs() < spec.e41) {
            return Err(Error::AssumptionViolation(format!(
                "|c43| = {} must stay below e41 = {}",
                spec.c43.abs(),
                spec.e41
            )));
        }
    }

    let tags = RegimeTags {
        c34_negative: spec.c34 < 0.0,
        c43_negative: spec.c43 < 0.0,
        delta_positive: d.delta > 0.0,
        delta_t_positive: d.delta_t > 0.0,
        sigma_band: SigmaBand::of(d.sigma),
        sigma_t_band: SigmaBand::of(d.sigma_t),
    };
    Ok(ValidatedB3 {
        spec: *spec,
        assumptions,
        derived: d,
        tags,
    })
}

fn s_abs(terms: &[f64]) -> f64 {
    terms.iter().map(|t| t.abs()).sum()
}

/// Dispatch regimes with an analytic route for the network indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `c34, c43 > 0`, `delta, delta_t > 0`: all return maps contract.
    Contracting,
    /// `c34, c43 > 0`, `delta < 0 < delta_t`: the `xi4`-cycle repels.
    CompetingXi4Dies,
    /// `c34, c43 > 0`, `delta_t < 0 < delta`: the `xi3`-cycle repels.
    CompetingXi3Dies,
    /// `c34 < 0` with `tau, tau_t, delta, delta_t > 0` and `|c34| < e31`.
    TransverseXi3,
    /// `c43 < 0` with `tau, tau_t, delta, delta_t > 0` and `|c43| < e41`.
    TransverseXi4,
    /// `c34 < 0`, `delta_t < 0 < delta`: escape sets grow under iteration.
    Stabilizing,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Contracting => "contracting",
            Regime::CompetingXi4Dies => "competing (xi4-cycle repels)",
            Regime::CompetingXi3Dies => "competing (xi3-cycle repels)",
            Regime::TransverseXi3 => "positive transverse rate at xi3",
            Regime::TransverseXi4 => "positive transverse rate at xi4",
            Regime::Stabilizing => "stabilizing (delta_t < 0 < delta, c34 < 0)",
        }
    }
}

/// Picks the dispatch regime of a validated spec, or explains why none of
/// the analytic routes covers it.
pub fn regime(v: &ValidatedB3) -> Result<Regime> {
    if !v.assumptions.a1 {
        return Err(Error::UnsupportedRegime(
            "network indices require the contraction condition (flag A1)".into(),
        ));
    }
    let s = &v.spec;
    let d = &v.derived;
    match (s.c34 < 0.0, s.c43 < 0.0) {
        (true, true) => Err(Error::UnsupportedRegime(
            "c34 and c43 both negative: no analytic route for the network indices".into(),
        )),
        (false, false) => Ok(match (d.delta > 0.0, d.delta_t > 0.0) {
            (true, true) => Regime::Contracting,
            (false, true) => Regime::CompetingXi4Dies,
            (true, false) => Regime::CompetingXi3Dies,
            (false, false) => {
                unreachable!("delta < 0 and delta_t < 0 force sigma and sigma_t positive at once")
            }
        }),
        (true, false) => {
            if a2_holds(v) {
                Ok(Regime::TransverseXi3)
            } else if d.delta_t < 0.0 && d.delta > 0.0 {
                Ok(Regime::Stabilizing)
            } else {
                Err(Error::UnsupportedRegime(
                    "c34 < 0 outside both the positive-tau/delta band and the delta_t < 0 < delta band"
                        .into(),
                ))
            }
        }
        (false, true) => {
            if a2_holds(v) {
                Ok(Regime::TransverseXi4)
            } else {
                Err(Error::UnsupportedRegime(
                    "c43 < 0 outside the positive-tau/delta band".into(),
                ))
            }
        }
    }
}

fn a2_holds(v: &ValidatedB3) -> bool {
    let d = &v.derived;
    let s = &v.spec;
    d.tau > 0.0
        && d.tau_t > 0.0
        && d.delta > 0.0
        && d.delta_t > 0.0
        && (s.c34 >= 0.0 || s.c34.abs() < s.e31)
        && (s.c43 >= 0.0 || s.c43.abs() < s.e41)
}

/// Per-node `(a, b)` ratios of the `xi3`-cycle in node order
/// `(xi_2, xi_3, xi_1)`.
pub fn xi3_cycle_params(s: &B3B3Spec) -> [CycleNodeParams; 3] {
    [
        CycleNodeParams {
            a: s.c21 / s.e23,
            b: -s.e24 / s.e23,
        },
        CycleNodeParams {
            a: s.c32 / s.e31,
            b: s.c34 / s.e31,
        },
        CycleNodeParams {
            a: s.c13 / s.e12,
            b: s.c14 / s.e12,
        },
    ]
}

/// Per-node `(a, b)` ratios of the `xi4`-cycle in node order
/// `(xi_2, xi_4, xi_1)`.
pub fn xi4_cycle_params(s: &B3B3Spec) -> [CycleNodeParams; 3] {
    [
        CycleNodeParams {
            a: s.c21 / s.e24,
            b: -s.e23 / s.e24,
        },
        CycleNodeParams {
            a: s.c42 / s.e41,
            b: s.c43 / s.e41,
        },
        CycleNodeParams {
            a: s.c14 / s.e12,
            b: s.c13 / s.e12,
        },
    ]
}

/// The six per-cycle indices. Array order within each cycle:
/// `[xi_1 -> xi_2]`, `[xi_2 -> xi_3/4]`, `[xi_3/4 -> xi_1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CIndices {
    pub xi3: [ExtReal; 3],
    pub xi4: [ExtReal; 3],
    pub xi3_case: &'static str,
    pub xi4_case: &'static str,
}

/// c-indices of both cycles from the closed case tables.
pub fn c_indices(v: &ValidatedB3) -> Result<CIndices> {
    let t = b3_cycle_indices(xi3_cycle_params(&v.spec))?;
    let u = b3_cycle_indices(xi4_cycle_params(&v.spec))?;
    Ok(CIndices {
        xi3: t.sigma,
        xi4: u.sigma,
        xi3_case: t.case,
        xi4_case: u.case,
    })
}

/// Connections of the network, in report order. The first is common to both
/// cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum B3Connection {
    X1toX2,
    X2toX3,
    X3toX1,
    X2toX4,
    X4toX1,
}

pub const B3_CONNECTIONS: [B3Connection; 5] = [
    B3Connection::X1toX2,
    B3Connection::X2toX3,
    B3Connection::X3toX1,
    B3Connection::X2toX4,
    B3Connection::X4toX1,
];

impl B3Connection {
    pub fn label(&self) -> &'static str {
        match self {
            B3Connection::X1toX2 => "xi1->xi2",
            B3Connection::X2toX3 => "xi2->xi3",
            B3Connection::X3toX1 => "xi3->xi1",
            B3Connection::X2toX4 => "xi2->xi4",
            B3Connection::X4toX1 => "xi4->xi1",
        }
    }
}

/// One network index with its computation route.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NIndexEntry {
    pub value: ExtReal,
    /// How the value was obtained: `empty-escape-set`, `thin-cusp-family`,
    /// or `thick-cusp-model` (optionally with the escape-iteration count at
    /// which the straddling wedge appeared).
    pub source: String,
    /// True when the value rests on the straddling-wedge model, whose
    /// magnitude (not sign) is an extrapolation.
    pub model_extrapolated: bool,
}

/// The five network indices, `[xi_1 -> xi_2]` first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NIndices {
    pub regime: Regime,
    pub x1x2: NIndexEntry,
    pub x2x3: NIndexEntry,
    pub x3x1: NIndexEntry,
    pub x2x4: NIndexEntry,
    pub x4x1: NIndexEntry,
}

impl NIndices {
    pub fn get(&self, c: B3Connection) -> &NIndexEntry {
        match c {
            B3Connection::X1toX2 => &self.x1x2,
            B3Connection::X2toX3 => &self.x2x3,
            B3Connection::X3toX1 => &self.x3x1,
            B3Connection::X2toX4 => &self.x2x4,
            B3Connection::X4toX1 => &self.x4x1,
        }
    }

    pub fn values(&self) -> [ExtReal; 5] {
        [
            self.x1x2.value,
            self.x2x3.value,
            self.x3x1.value,
            self.x2x4.value,
            self.x4x1.value,
        ]
    }
}

/// Escape-wedge exponents at the common section, both domain exponents, and
/// the iteration count at which each chain member arose.
struct EscapeFamily {
    /// (wedge, chain index). Index 0 is the first-return escape set.
    wedges: Vec<(ExpWedge, usize)>,
}

fn escape_family(v: &ValidatedB3, n_cap: usize) -> Result<EscapeFamily> {
    let s = &v.spec;
    let d = &v.derived;
    let a_exp = if s.c34 < 0.0 { d.alpha } else { s.e24 / s.e23 };
    let c_exp = if s.c43 < 0.0 {
        s.e23 / s.e24 - s.c21 * s.c43 / (s.e24 * s.e41)
    } else {
        s.e23 / s.e24
    };
    let e0 = ExpWedge {
        lo: a_exp,
        hi: 1.0 / c_exp,
    };
    let mut wedges = vec![(e0, 0usize)];
    for (n, w) in return_map_chain(e0, d.rho_t, d.nu_t_composed, a_exp, n_cap)?
        .into_iter()
        .enumerate()
    {
        wedges.push((w, n + 1));
    }
    // The xi4-side return map drives the second coordinate; its chain lives
    // in swapped orientation and converts back by exponent reciprocals.
    let e0_swapped = ExpWedge {
        lo: c_exp,
        hi: 1.0 / a_exp,
    };
    for (n, w) in return_map_chain(e0_swapped, d.rho, d.nu_composed, c_exp, n_cap)?
        .into_iter()
        .enumerate()
    {
        wedges.push((
            ExpWedge {
                lo: 1.0 / w.hi,
                hi: 1.0 / w.lo,
            },
            n + 1,
        ));
    }
    Ok(EscapeFamily { wedges })
}

/// Escape wedges near one connection: the common-section family pulled back
/// through the connecting one-pass maps, plus the direct transverse cusp at
/// the `H2` sections when the corresponding rate is negative.
fn connection_wedges(
    v: &ValidatedB3,
    fam: &EscapeFamily,
    conn: B3Connection,
) -> Vec<(ExpWedge, usize)> {
    let s = &v.spec;
    let mut out: Vec<(ExpWedge, usize)> = Vec::new();
    match conn {
        B3Connection::X1toX2 => out.extend(fam.wedges.iter().copied()),
        B3Connection::X2toX3 => {
            let cusp = if s.c34 < 0.0 {
                let g = -s.c34 / s.e31;
                out.push((ExpWedge { lo: g, hi: 0.0 }, 0));
                Some(g)
            } else {
                None
            };
            let p = s.c32 * s.c13 / (s.e31 * s.e12);
            let q = s.c34 / s.e31 + s.c32 * s.c14 / (s.e31 * s.e12);
            for (w, n) in &fam.wedges {
                if let Some(mut pulled) = w.pull_triangular(p, q) {
                    if let Some(g) = cusp {
                        pulled.hi = pulled.hi.max(g);
                        if !pulled.valid() {
                            continue;
                        }
                    }
                    out.push((pulled, *n));
                }
            }
        }
        B3Connection::X3toX1 => {
            let p = s.c13 / s.e12;
            let q = s.c14 / s.e12;
            for (w, n) in &fam.wedges {
                if let Some(pulled) = w.pull_triangular(p, q) {
                    out.push((pulled, *n));
                }
            }
        }
        B3Connection::X2toX4 => {
            let cusp = if s.c43 < 0.0 {
                let g = -s.c43 / s.e41;
                out.push((ExpWedge { lo: g, hi: 0.0 }, 0));
                Some(g)
            } else {
                None
            };
            let p = s.c43 / s.e41 + s.c42 * s.c13 / (s.e41 * s.e12);
            let q = s.c42 * s.c14 / (s.e41 * s.e12);
            for (w, n) in &fam.wedges {
                if let Some(mut pulled) = w.pull_anti(p, q) {
                    if let Some(g) = cusp {
                        pulled.hi = pulled.hi.max(g);
                        if !pulled.valid() {
                            continue;
                        }
                    }
                    out.push((pulled, *n));
                }
            }
        }
        B3Connection::X4toX1 => {
            let p = s.c13 / s.e12;
            let q = s.c14 / s.e12;
            for (w, n) in &fam.wedges {
                if let Some(pulled) = w.pull_anti(p, q) {
                    out.push((pulled, *n));
                }
            }
        }
    }
    out
}

pub(crate) fn index_entry(wedges: &[(ExpWedge, usize)]) -> Result<NIndexEntry> {
    if wedges.is_empty() {
        return Ok(NIndexEntry {
            value: PosInf,
            source: "empty-escape-set".into(),
            model_extrapolated: false,
        });
    }
    let out = classify_exponents(wedges.iter().map(|(w, _)| (w.lo, w.hi)))?;
    let source = if out.thick_model {
        let n_star = wedges
            .iter()
            .find(|(w, _)| w.straddles_one())
            .map(|(_, n)| *n)
            .unwrap_or(0);
        format!("thick-cusp-model(escape iteration {n_star})")
    } else {
        "thin-cusp-family".into()
    };
    Ok(NIndexEntry {
        value: out.index,
        source,
        model_extrapolated: out.thick_model,
    })
}

/// Network indices of all five connections via the escape-wedge engine.
///
/// Errors with `UnsupportedRegime` outside the covered regimes and
/// `NonGeneric` when an escape exponent sits on the boundary.
pub fn n_indices(v: &ValidatedB3, n_cap: usize) -> Result<NIndices> {
    let reg = regime(v)?;
    let fam = escape_family(v, n_cap)?;
    let entry = |conn: B3Connection| -> Result<NIndexEntry> {
        index_entry(&connection_wedges(v, &fam, conn))
    };
    let out = NIndices {
        regime: reg,
        x1x2: entry(B3Connection::X1toX2)?,
        x2x3: entry(B3Connection::X2toX3)?,
        x3x1: entry(B3Connection::X3toX1)?,
        x2x4: entry(B3Connection::X2toX4)?,
        x4x1: entry(B3Connection::X4toX1)?,
    };
    debug_assert!(
        regime_pattern_ok(v, reg, &out),
        "index pattern broke for {reg:?}: {out:?}"
    );
    Ok(out)
}

/// Sign/infinity pattern each regime guarantees.
fn regime_pattern_ok(v: &ValidatedB3, reg: Regime, n: &NIndices) -> bool {
    let vals = n.values();
    match reg {
        Regime::Contracting => vals.iter().all(|s| s.is_positive()),
        Regime::CompetingXi4Dies => {
            n.x1x2.value.is_positive()
                && n.x2x4.value.is_positive()
                && n.x4x1.value.is_positive()
                && n.x2x3.value.is_pos_inf()
                && n.x3x1.value.is_pos_inf()
        }
        Regime::CompetingXi3Dies => {
            n.x1x2.value.is_positive()
                && n.x2x3.value.is_positive()
                && n.x3x1.value.is_positive()
                && n.x2x4.value.is_pos_inf()
                && n.x4x1.value.is_pos_inf()
        }
        Regime::TransverseXi3 => {
            // delta_t > 0 with c34 < 0 forces sigma_t < 0 and sigma > 0.
            v.derived.sigma_t < 0.0
                && v.derived.sigma > 0.0
                && n.x3x1.value.is_pos_inf()
                && n.x2x4.value.is_pos_inf()
                && n.x2x3.value.is_positive()
        }
        Regime::TransverseXi4 => {
            v.derived.sigma_t > 0.0
                && v.derived.sigma < 0.0
                && n.x2x3.value.is_pos_inf()
                && n.x4x1.value.is_pos_inf()
                && n.x1x2.value.is_positive()
                && n.x2x4.value.is_positive()
                && n.x3x1.value.is_finite()
        }
        Regime::Stabilizing => n.x2x4.value.is_pos_inf(),
    }
}

/// The six escape-set exponent sequences of the stabilizing regime and the
/// crossings that decide the signs of the three varying network indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceReport {
    pub gamma: Vec<f64>,
    pub gamma_bar: Vec<f64>,
    pub zeta: Vec<f64>,
    pub zeta_bar: Vec<f64>,
    pub eta: Vec<f64>,
    pub eta_bar: Vec<f64>,
    /// First `n` with `bar_n < 1 < main_n`, per pair.
    pub crossing_gamma: Option<usize>,
    pub crossing_zeta: Option<usize>,
    pub crossing_eta: Option<usize>,
    pub monotone: bool,
}

fn run_pair(
    seed_main: f64,
    seed_bar: f64,
    rho_t: f64,
    step: f64,
    n_cap: usize,
    label: &'static str,
) -> Result<(Vec<f64>, Vec<f64>, Option<usize>)> {
    let mut main = vec![seed_main];
    let mut bar = vec![seed_bar];
    for n in 0..=n_cap {
        let (m, b) = (main[n], bar[n]);
        for v in [m, b] {
            if is_degenerate(v - 1.0, 1.0) {
                return Err(Error::NonGeneric("sequence term - 1", v - 1.0));
            }
        }
        if b < 1.0 && 1.0 < m {
            return Ok((main, bar, Some(n)));
        }
        if b > 1.0 {
            return Ok((main, bar, None));
        }
        if n == n_cap {
            break;
        }
        let m_next = rho_t * m - step;
        let b_next = rho_t * b - step;
        assert!(
            m_next > m && b_next > b,
            "escape sequences must increase; the loop-exponent convention is inconsistent"
        );
        main.push(m_next);
        bar.push(b_next);
    }
    Err(Error::CapExceeded(n_cap, label))
}

/// Escape-set sequences of the stabilizing regime (`delta_t < 0 < delta`,
/// `c34 < 0`, A1). Iteration stops at the first crossing `bar < 1 < main`
/// or as soon as the lower sequence passes 1 (no crossing can follow).
pub fn escape_sequences(v: &ValidatedB3, n_cap: usize) -> Result<SequenceReport> {
    if regime(v)? != Regime::Stabilizing {
        return Err(Error::UnsupportedRegime(
            "escape sequences apply to the delta_t < 0 < delta, c34 < 0 regime only".into(),
        ));
    }
    let s = &v.spec;
    let d = &v.derived;
    let ratio = s.e24 / s.e23;
    let g = -s.c34 / s.e31;
    // Monotonicity of the gamma pair pins the composed loop-exponent value.
    let increment = (d.rho_t - 1.0) * (d.alpha - ratio) - (s.c21 / s.e23) * d.delta_t;
    assert!(
        increment > 0.0,
        "gamma increment must be positive under A1 with delta_t < 0"
    );

    let (gamma, gamma_bar, cg) = run_pair(
        d.alpha,
        ratio,
        d.rho_t,
        d.nu_t_composed,
        n_cap,
        "gamma pair",
    )?;
    let (zeta, zeta_bar, cz) = run_pair(-d.tau_t, d.sigma_t, d.rho_t, d.tau_t, n_cap, "zeta pair")?;
    let (eta, eta_bar, ce) = run_pair(
        g - d.delta_t,
        -d.delta_t,
        d.rho_t,
        d.delta_t,
        n_cap,
        "eta pair",
    )?;

    Ok(SequenceReport {
        gamma,
        gamma_bar,
        zeta,
        zeta_bar,
        eta,
        eta_bar,
        crossing_gamma: cg,
        crossing_zeta: cz,
        crossing_eta: ce,
        monotone: true,
    })
}

/// Predominant-asymptotic-stability flags: a cycle or the network is
/// predominantly stable exactly when all its local indices are positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PasReport {
    pub pas_xi3: bool,
    pub pas_xi4: bool,
    pub pas_network: bool,
}

pub fn pas_report(c: &CIndices, n: &NIndices) -> PasReport {
    PasReport {
        pas_xi3: c.xi3.iter().all(|s| s.is_positive()),
        pas_xi4: c.xi4.iter().all(|s| s.is_positive()),
        pas_network: n.values().iter().all(|s| s.is_positive()),
    }
}

/// Sufficient condition for all network indices to be positive in the
/// stabilizing regime (`c34 < 0`, `-c34 < e31`, A1):
/// `sigma < min(-e23/e24, -e23 (e31 + c34) / (e24 c32))` together with
/// `1 - c21/e23 < e24/e23 < 1 - (c21/e23)(-c34/e31)`.
pub fn stabilization_condition(v: &ValidatedB3) -> Result<bool> {
    let s = &v.spec;
    let d = &v.derived;
    if !v.assumptions.a1 {
        return Err(Error::AssumptionViolation(
            "stabilization condition needs the contraction condition (flag A1)".into(),
        ));
    }
    if !(s.c34 < 0.0 && -s.c34 < s.e31) {
        return Err(Error::AssumptionViolation(format!(
            "stabilization condition needs c34 < 0 with |c34| < e31 (got c34 = {})",
            s.c34
        )));
    }
    let bound = (-s.e23 / s.e24).min(-s.e23 * (s.e31 + s.c34) / (s.e24 * s.c32));
    let ratio = s.e24 / s.e23;
    let left = 1.0 - s.c21 / s.e23;
    let right = 1.0 - (s.c21 / s.e23) * (-s.c34 / s.e31);
    Ok(d.sigma < bound && left < ratio && ratio < right)
}

/// Rectangular sampling box for the witness search; radial rates are pinned
/// to 1 (they never enter an index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamBox {
    pub e12: (f64, f64),
    pub e23: (f64, f64),
    pub e24: (f64, f64),
    pub e31: (f64, f64),
    pub e41: (f64, f64),
    pub c13: (f64, f64),
    pub c14: (f64, f64),
    pub c21: (f64, f64),
    pub c32: (f64, f64),
    pub c34: (f64, f64),
    pub c42: (f64, f64),
    pub c43: (f64, f64),
}

impl Default for ParamBox {
    /// A box inside the regime where a p.a.s. `xi3`-cycle coexists with a
    /// negative network index along `[xi_4 -> xi_1]`.
    fn default() -> Self {
        ParamBox {
            e12: (0.9, 1.1),
            e23: (8.0, 12.0),
            e24: (0.08, 0.12),
            e31: (0.9, 1.1),
            e41: (0.9, 1.1),
            c13: (0.9, 1.1),
            c14: (0.02, 0.03),
            c21: (1.5, 2.5),
            c32: (6.0, 8.0),
            c34: (-0.06, -0.04),
            c42: (2.5, 3.5),
            c43: (4.5, 5.5),
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn draw(state: &mut u64, range: (f64, f64)) -> f64 {
    let u = (splitmix64(state) >> 11) as f64 / (1u64 << 53) as f64;
    range.0 + u * (range.1 - range.0)
}

/// Searches `bx` for a spec whose `xi3`-cycle is predominantly stable while
/// the network index along `[xi_4 -> xi_1]` is negative. The accepted spec
/// satisfies `b1_t + b2_t a1_t in (-1, 0)`, `sigma > 1` and `tau_t < alpha`
/// (the straddling condition at `[xi_4 -> xi_1]`), and is re-verified
/// through the index pipeline before being returned.
pub fn find_nonpas_witness(bx: &ParamBox, seed: u64, max_draws: usize) -> Result<B3B3Spec> {
    let mut state = seed ^ 0xb3b3_0000_cafe_f00d;
    for _ in 0..max_draws {
        let spec = B3B3Spec {
            e12: draw(&mut state, bx.e12),
            e23: draw(&mut state, bx.e23),
            e24: draw(&mut state, bx.e24),
            e31: draw(&mut state, bx.e31),
            e41: draw(&mut state, bx.e41),
            c13: draw(&mut state, bx.c13),
            c14: draw(&mut state, bx.c14),
            c21: draw(&mut state, bx.c21),
            c32: draw(&mut state, bx.c32),
            c34: draw(&mut state, bx.c34),
            c42: draw(&mut state, bx.c42),
            c43: draw(&mut state, bx.c43),
            r1: 1.0,
            r2: 1.0,
            r3: 1.0,
            r4: 1.0,
        };
        let Ok(v) = validate(&spec, Assumptions::A1_A2, NuConvention::Composed) else {
            continue;
        };
        if !(spec.c34 < 0.0) {
            continue;
        }
        let d = &v.derived;
        let b_combo = -d.alpha; // b1_t + b2_t a1_t
        if !(b_combo > -1.0 && b_combo < 0.0 && d.sigma > 1.0 && d.tau_t < d.alpha) {
            continue;
        }
        let Ok(c) = c_indices(&v) else { continue };
        let Ok(n) = n_indices(&v, 10_000) else {
            continue;
        };
        let pas = pas_report(&c, &n);
        if pas.pas_xi3 && n.x4x1.value < crate::extreal::Finite(0.0) {
            return Ok(spec);
        }
    }
    Err(Error::SearchFailed(max_draws))
}

// ---------------------------------------------------------------------------

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn p0() -> B3B3Spec {
        B3B3Spec {
            e12: 1.0,
            e23: 2.0,
            e24: 1.0,
            e31: 1.0,
            e41: 1.0,
            c13: 1.2,
            c14: 0.8,
            c21: 1.5,
            c32: 1.5,
            c34: 1.0,
            c42: 1.5,
            c43: 1.0,
            r1: 1.0,
            r2: 1.0,
            r3: 1.0,
            r4: 1.0,
        }
    }

    pub fn p1() -> B3B3Spec {
        B3B3Spec { c34: -0.5, ..p0() }
    }

    pub fn p2() -> B3B3Spec {
        B3B3Spec { c34: -0.1, ..p0() }
    }

    pub fn p3() -> B3B3Spec {
        B3B3Spec {
            e12: 1.0,
            e23: 2.0,
            e24: 1.0,
            e31: 1.0,
            e41: 1.5,
            c13: 0.1,
            c14: 0.4,
            c21: 4.0,
            c32: 6.0,
            c34: -0.5,
            c42: 1.5,
            c43: 1.2,
            r1: 1.0,
            r2: 1.0,
            r3: 1.0,
            r4: 1.0,
        }
    }

    pub fn validated(spec: &B3B3Spec, a: Assumptions) -> ValidatedB3 {
        validate(spec, a, NuConvention::Composed).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::extreal::{Finite, NegInf};
    use approx::assert_relative_eq;

    #[test]
    fn derived_p0() {
        let d = derived(&p0(), NuConvention::Composed);
        assert_relative_eq!(d.rho, 1.8, max_relative = 1e-12);
        assert_relative_eq!(d.rho_t, 1.35, max_relative = 1e-12);
        assert_relative_eq!(d.delta, 0.4, max_relative = 1e-12);
        assert_relative_eq!(d.delta_t, 1.3, max_relative = 1e-12);
        assert_relative_eq!(d.tau, 0.8, max_relative = 1e-12);
        assert_relative_eq!(d.tau_t, 1.1, max_relative = 1e-12);
        assert_relative_eq!(d.sigma, 0.4, max_relative = 1e-12);
        assert_relative_eq!(d.sigma_t, -0.2, max_relative = 1e-12);
        assert_relative_eq!(d.nu, 2.2, max_relative = 1e-12);
        assert_relative_eq!(d.nu_t, 1.15, max_relative = 1e-12);
    }

    #[test]
    fn derived_p1_and_p3() {
        let d = derived(&p1(), NuConvention::Composed);
        assert_relative_eq!(d.delta_t, -0.2, max_relative = 1e-12);
        assert_relative_eq!(d.alpha, 0.875, max_relative = 1e-12);
        assert_relative_eq!(d.nu_t, 0.025, max_relative = 1e-9);

        let d = derived(&p3(), NuConvention::Composed);
        assert_relative_eq!(d.rho, 1.6, max_relative = 1e-12);
        assert_relative_eq!(d.rho_t, 1.2, max_relative = 1e-12);
        assert_relative_eq!(d.delta, 0.1, max_relative = 1e-10);
        assert_relative_eq!(d.delta_t, 1.6, max_relative = 1e-12);
        assert_relative_eq!(d.tau, 0.58, max_relative = 1e-10);
        assert_relative_eq!(d.tau_t, 0.25, max_relative = 1e-12);
        assert_relative_eq!(d.sigma, 0.7, max_relative = 1e-12);
        assert_relative_eq!(d.sigma_t, -0.35, max_relative = 1e-12);
        // b1_t + b2_t a1_t = -alpha = -1.5
        assert_relative_eq!(d.alpha, 1.5, max_relative = 1e-12);
    }

    #[test]
    fn delta_matches_node_ratio_form() {
        // delta = b1 a2 a3 + b3 a2 + b2 with the per-node ratios, and the
        // tilded twin likewise.
        for spec in [p0(), p1(), p2(), p3()] {
            let d = derived(&spec, NuConvention::Composed);
            let t = xi3_cycle_params(&spec);
            let u = xi4_cycle_params(&spec);
            let delta_nodes = u[0].b * u[1].a * u[2].a + u[2].b * u[1].a + u[1].b;
            let delta_t_nodes = t[0].b * t[1].a * t[2].a + t[2].b * t[1].a + t[1].b;
            assert_relative_eq!(d.delta, delta_nodes, max_relative = 1e-12);
            assert_relative_eq!(d.delta_t, delta_t_nodes, max_relative = 1e-12);
            // rho = a1 a2 a3 for both cycles.
            assert_relative_eq!(d.rho, u[0].a * u[1].a * u[2].a, max_relative = 1e-12);
            assert_relative_eq!(d.rho_t, t[0].a * t[1].a * t[2].a, max_relative = 1e-12);
        }
    }

    #[test]
    fn validate_p0_tags() {
        let v = validated(&p0(), Assumptions::A1);
        assert!(v.tags.delta_positive && v.tags.delta_t_positive);
        assert_eq!(v.tags.sigma_band, SigmaBand::Unit);
        assert_eq!(v.tags.sigma_t_band, SigmaBand::Negative);
        assert!(!v.tags.c34_negative && !v.tags.c43_negative);
    }

    #[test]
    fn validate_rejections() {
        let mut bad = p0();
        bad.e23 = 0.5; // e24/e23 = 2
        assert!(matches!(
            validate(&bad, Assumptions::A1, NuConvention::Composed),
            Err(Error::AssumptionViolation(_))
        ));
        let mut bad = p0();
        bad.c13 = 0.0;
        assert!(matches!(
            validate(&bad, Assumptions::A1, NuConvention::Composed),
            Err(Error::PositivityViolation("c13", _))
        ));
    }

    #[test]
    fn validate_is_idempotent() {
        let v1 = validated(&p0(), Assumptions::A1);
        let v2 = validated(&v1.spec, Assumptions::A1);
        assert_eq!(v1, v2);
    }

    #[test]
    fn p2_passes_assumption_two() {
        // tau_t = 0.11, delta_t = 0.2; |c43| = e41 is exempt since c43 > 0.
        let v = validated(&p2(), Assumptions::A1_A2);
        assert_relative_eq!(v.derived.tau_t, 0.11, max_relative = 1e-10);
        assert_relative_eq!(v.derived.delta_t, 0.2, max_relative = 1e-10);
        assert_eq!(regime(&v).unwrap(), Regime::TransverseXi3);
    }

    #[test]
    fn regimes_of_fixtures() {
        assert_eq!(
            regime(&validated(&p0(), Assumptions::A1)).unwrap(),
            Regime::Contracting
        );
        assert_eq!(
            regime(&validated(&p1(), Assumptions::A1)).unwrap(),
            Regime::Stabilizing
        );
        assert_eq!(
            regime(&validated(&p3(), Assumptions::A1_A2)).unwrap(),
            Regime::TransverseXi3
        );
        let both = B3B3Spec {
            c34: -0.5,
            c43: -0.5,
            ..p0()
        };
        let v = validated(&both, Assumptions::A1);
        assert!(matches!(regime(&v), Err(Error::UnsupportedRegime(_))));
    }

    #[test]
    fn c_indices_p0() {
        let c = c_indices(&validated(&p0(), Assumptions::A1)).unwrap();
        assert_eq!(c.xi3[0], Finite(1.0));
        assert_eq!(c.xi3[1], PosInf);
        assert_eq!(c.xi3[2], PosInf);
        assert_eq!(c.xi4[0], Finite(-1.0));
        assert_eq!(c.xi4[1], PosInf);
        assert_relative_eq!(c.xi4[2].finite().unwrap(), 1.5, max_relative = 1e-12);
    }

    #[test]
    fn c_indices_p1_p2() {
        let c = c_indices(&validated(&p1(), Assumptions::A1)).unwrap();
        assert_eq!(c.xi3, [NegInf, NegInf, NegInf]);
        assert_eq!(c.xi4[0], Finite(-1.0));
        assert_eq!(c.xi4[1], PosInf);
        assert_relative_eq!(c.xi4[2].finite().unwrap(), 1.5, max_relative = 1e-12);

        let c = c_indices(&validated(&p2(), Assumptions::A1_A2)).unwrap();
        let expect = 1.0 / 0.575 - 1.0;
        assert_relative_eq!(c.xi3[0].finite().unwrap(), expect, max_relative = 1e-12);
        assert_relative_eq!(c.xi3[1].finite().unwrap(), 9.0, max_relative = 1e-10);
        assert_eq!(c.xi3[2], PosInf);
        assert_eq!(c.xi4[0], Finite(-1.0));
        assert_eq!(c.xi4[1], PosInf);
        assert_relative_eq!(c.xi4[2].finite().unwrap(), 1.5, max_relative = 1e-12);
    }

    #[test]
    fn n_indices_p0_contracting() {
        let v = validated(&p0(), Assumptions::A1);
        let n = n_indices(&v, 10_000).unwrap();
        assert_eq!(n.regime, Regime::Contracting);
        assert_relative_eq!(n.x1x2.value.finite().unwrap(), 1.0, max_relative = 1e-12);
        assert_eq!(n.x2x3.value, PosInf);
        assert_eq!(n.x3x1.value, PosInf);
        assert_eq!(n.x2x4.value, PosInf);
        assert_relative_eq!(n.x4x1.value.finite().unwrap(), 1.5, max_relative = 1e-12);
        assert_eq!(n.x2x3.source, "empty-escape-set");
    }

    #[test]
    fn n_indices_p1_stabilizing() {
        let v = validated(&p1(), Assumptions::A1);
        let n = n_indices(&v, 10_000).unwrap();
        assert_eq!(n.regime, Regime::Stabilizing);
        assert!(n.x1x2.value < Finite(0.0));
        assert!(n.x1x2.model_extrapolated);
        // Straddling wedge appears at escape iteration 1 with clamped upper
        // exponent 0.875: model value -(1 - 0.875).
        assert_relative_eq!(n.x1x2.value.finite().unwrap(), -0.125, max_relative = 1e-12);
        assert!(n.x2x3.value < Finite(0.0));
        assert!(n.x3x1.value < Finite(0.0));
        assert_eq!(n.x2x4.value, PosInf);
        assert_relative_eq!(n.x4x1.value.finite().unwrap(), 1.5, max_relative = 1e-12);
    }

    #[test]
    fn n_indices_p3_transverse() {
        let v = validated(&p3(), Assumptions::A1_A2);
        let n = n_indices(&v, 10_000).unwrap();
        assert!(n.x1x2.value < Finite(0.0));
        assert_relative_eq!(n.x1x2.value.finite().unwrap(), -0.5, max_relative = 1e-12);
        assert_relative_eq!(n.x2x3.value.finite().unwrap(), 1.0, max_relative = 1e-12);
        assert_eq!(n.x3x1.value, PosInf);
        assert_eq!(n.x2x4.value, PosInf);
        assert_relative_eq!(
            n.x4x1.value.finite().unwrap(),
            1.0 / 0.7 - 1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn n_indices_competing_xi4_dies() {
        // c43 small enough that the xi4-cycle splitting exponent turns
        // negative while everything else stays at the canonical rates.
        let spec = B3B3Spec { c43: 0.15, ..p0() };
        let v = validated(&spec, Assumptions::A1);
        assert_relative_eq!(v.derived.delta, -0.45, max_relative = 1e-12);
        let n = n_indices(&v, 10_000).unwrap();
        assert_eq!(n.regime, Regime::CompetingXi4Dies);
        // Escape family: first-return band at exponent 1/2 plus the
        // xi4-side preimage chain with swapped exponents {2.675, 3.89, ...}.
        assert_relative_eq!(n.x1x2.value.finite().unwrap(), 1.0, max_relative = 1e-12);
        assert_eq!(n.x2x3.value, PosInf);
        assert_eq!(n.x3x1.value, PosInf);
        // Pulled families: {0.45, 1.26, ...} and {0.4, 0.94, 1.912, ...};
        // the first above-1 exponent beats the reciprocal of the largest
        // below-1 exponent at x2->x4.
        assert_relative_eq!(n.x2x4.value.finite().unwrap(), 0.26, max_relative = 1e-9);
        assert_relative_eq!(
            n.x4x1.value.finite().unwrap(),
            1.0 / 0.94 - 1.0,
            max_relative = 1e-9
        );
        let c = c_indices(&v).unwrap();
        assert!(c.xi4.iter().all(|s| s.is_neg_inf()));
        let pas = pas_report(&c, &n);
        assert!(pas.pas_xi3 && !pas.pas_xi4 && pas.pas_network);
    }

    #[test]
    fn n_indices_competing_xi3_dies() {
        // sigma_t > 0 with a moderate transverse rate at xi3 flips the
        // xi3-cycle splitting exponent negative: both cycles fail on their
        // own but every network index stays positive.
        let spec = B3B3Spec {
            c13: 2.0,
            c14: 0.55,
            c34: 0.2,
            ..p0()
        };
        let v = validated(&spec, Assumptions::A1);
        assert!(v.derived.delta_t < 0.0 && v.derived.delta > 0.0);
        let n = n_indices(&v, 10_000).unwrap();
        assert_eq!(n.regime, Regime::CompetingXi3Dies);
        // Growing xi3-side chain: bands {0.5, 0.85625, 1.658, ...}.
        assert_relative_eq!(
            n.x1x2.value.finite().unwrap(),
            1.0 / 0.85625 - 1.0,
            max_relative = 1e-9
        );
        assert_relative_eq!(n.x2x3.value.finite().unwrap(), 0.54375, max_relative = 1e-9);
        assert_relative_eq!(n.x3x1.value.finite().unwrap(), 0.1625, max_relative = 1e-9);
        assert_eq!(n.x2x4.value, PosInf);
        assert_eq!(n.x4x1.value, PosInf);
        let c = c_indices(&v).unwrap();
        assert!(c.xi3.iter().all(|s| s.is_neg_inf()));
        let pas = pas_report(&c, &n);
        assert!(!pas.pas_xi3 && !pas.pas_xi4 && pas.pas_network, "{pas:?}");
    }

    #[test]
    fn n_indices_p2_equal_cycle_values() {
        // Mild transverse rate: every escape chain dies immediately and the
        // network indices coincide with the cycle indices.
        let v = validated(&p2(), Assumptions::A1_A2);
        let n = n_indices(&v, 10_000).unwrap();
        assert_eq!(n.regime, Regime::TransverseXi3);
        assert_relative_eq!(
            n.x1x2.value.finite().unwrap(),
            1.0 / 0.575 - 1.0,
            max_relative = 1e-9
        );
        assert_relative_eq!(n.x2x3.value.finite().unwrap(), 9.0, max_relative = 1e-9);
        assert_eq!(n.x3x1.value, PosInf);
        assert_eq!(n.x2x4.value, PosInf);
        assert_relative_eq!(n.x4x1.value.finite().unwrap(), 1.5, max_relative = 1e-9);
        let pas = pas_report(&c_indices(&v).unwrap(), &n);
        assert!(pas.pas_xi3 && pas.pas_network);
    }

    #[test]
    fn n_indices_transverse_xi4_both_subcases() {
        // Positive transverse rate at xi4 (c43 < 0), strong contraction
        // into xi1 so sigma < 0 and both splitting exponents stay positive.
        // Sub-case one: tau exceeds the modified domain exponent, so the
        // escape set at [xi3 -> xi1] is a thin above-1 wedge.
        let spec = B3B3Spec { c13: 4.0, c34: 2.0, c43: -0.1, ..p0() };
        let v = validated(&spec, Assumptions::A1_A2);
        let n = n_indices(&v, 10_000).unwrap();
        assert_eq!(n.regime, Regime::TransverseXi4);
        assert_relative_eq!(n.x1x2.value.finite().unwrap(), 1.0, max_relative = 1e-9);
        assert_eq!(n.x2x3.value, PosInf);
        assert_eq!(n.x4x1.value, PosInf);
        // sigma_24 = f(c43/e41) survives unchanged at the network level.
        assert_relative_eq!(n.x2x4.value.finite().unwrap(), 9.0, max_relative = 1e-9);
        // Wedge (sigma_t, tau / C) with C = e23/e24 - c21 c43/(e24 e41).
        let c_mod = 2.0 + 1.5 * 0.1;
        assert_relative_eq!(
            n.x3x1.value.finite().unwrap(),
            v.derived.tau / c_mod - 1.0,
            max_relative = 1e-9
        );
        assert!(n.x3x1.value.is_positive());

        // Sub-case two: a stronger positive transverse rate flips the
        // [xi3 -> xi1] wedge across exponent 1 and the index negative.
        let spec = B3B3Spec { c13: 4.0, c34: 2.0, c43: -0.9, ..p0() };
        let v = validated(&spec, Assumptions::A1_A2);
        let n = n_indices(&v, 10_000).unwrap();
        assert_eq!(n.regime, Regime::TransverseXi4);
        let c_mod = 2.0 + 1.5 * 0.9;
        assert!(v.derived.tau / c_mod < 1.0);
        assert!(n.x3x1.value < Finite(0.0), "{:?}", n.x3x1);
        assert!(n.x3x1.model_extrapolated);
        assert_relative_eq!(
            n.x3x1.value.finite().unwrap(),
            -(1.0 - v.derived.tau / c_mod),
            max_relative = 1e-9
        );
        assert_relative_eq!(
            n.x2x4.value.finite().unwrap(),
            1.0 / 0.9 - 1.0,
            max_relative = 1e-9
        );
        assert_eq!(n.x2x3.value, PosInf);
        assert_eq!(n.x4x1.value, PosInf);
    }

    #[test]
    fn escape_sequences_cap_exceeded() {
        let v = validated(&p1(), Assumptions::A1);
        assert!(matches!(
            escape_sequences(&v, 0),
            Err(Error::CapExceeded(0, _))
        ));
    }

    #[test]
    fn network_index_dominates_cycle_index_on_fixtures() {
        // Network index dominates every cycle index on each connection.
        for (spec, a) in [
            (p0(), Assumptions::A1),
            (p1(), Assumptions::A1),
            (p2(), Assumptions::A1_A2),
            (p3(), Assumptions::A1_A2),
        ] {
            let v = validated(&spec, a);
            let c = c_indices(&v).unwrap();
            let n = n_indices(&v, 10_000).unwrap();
            assert!(n.x1x2.value >= c.xi3[0].max(c.xi4[0]));
            assert!(n.x2x3.value >= c.xi3[1]);
            assert!(n.x3x1.value >= c.xi3[2]);
            assert!(n.x2x4.value >= c.xi4[1]);
            assert!(n.x4x1.value >= c.xi4[2]);
        }
    }

    #[test]
    fn escape_sequences_p1() {
        let v = validated(&p1(), Assumptions::A1);
        let r = escape_sequences(&v, 10_000).unwrap();
        assert_relative_eq!(r.gamma[0], 0.875, max_relative = 1e-12);
        assert_relative_eq!(r.gamma_bar[0], 0.5, max_relative = 1e-12);
        assert_relative_eq!(r.gamma[1], 1.15625, max_relative = 1e-12);
        assert_relative_eq!(r.gamma_bar[1], 0.65, max_relative = 1e-12);
        assert_eq!(r.crossing_gamma, Some(1));
        assert_eq!(r.crossing_zeta, Some(2));
        assert_eq!(r.crossing_eta, Some(1));
        assert!(r.monotone);
    }

    #[test]
    fn escape_sequences_refuse_other_regimes() {
        let v = validated(&p0(), Assumptions::A1);
        assert!(matches!(
            escape_sequences(&v, 100),
            Err(Error::UnsupportedRegime(_))
        ));
    }

    #[test]
    fn pas_reports() {
        let v = validated(&p0(), Assumptions::A1);
        let pas = pas_report(&c_indices(&v).unwrap(), &n_indices(&v, 10_000).unwrap());
        assert!(pas.pas_xi3 && !pas.pas_xi4 && pas.pas_network);

        let v = validated(&p1(), Assumptions::A1);
        let pas = pas_report(&c_indices(&v).unwrap(), &n_indices(&v, 10_000).unwrap());
        assert!(!pas.pas_xi3 && !pas.pas_xi4 && !pas.pas_network);
    }

    #[test]
    fn stabilization_condition_fixtures() {
        let v = validated(&p1(), Assumptions::A1);
        assert!(!stabilization_condition(&v).unwrap());

        // Hand-built spec satisfying both inequalities.
        let spec = B3B3Spec {
            e12: 1.0,
            e23: 2.0,
            e24: 1.0,
            e31: 1.0,
            e41: 1.0,
            c13: 4.0,
            c14: 0.75,
            c21: 1.9,
            c32: 1.0,
            c34: -0.1,
            c42: 1.0,
            c43: 1.0,
            r1: 1.0,
            r2: 1.0,
            r3: 1.0,
            r4: 1.0,
        };
        let v = validated(&spec, Assumptions::A1);
        assert!(stabilization_condition(&v).unwrap());
        let n = n_indices(&v, 10_000).unwrap();
        assert!(n.values().iter().all(|s| s.is_positive()), "{n:?}");
        // All sequence members stay on one side of 1: no crossing, and the
        // varying indices come out positive.
        let seq = escape_sequences(&v, 10_000).unwrap();
        assert_eq!(seq.crossing_gamma, None);
        assert_eq!(seq.crossing_zeta, None);
        assert_eq!(seq.crossing_eta, None);
    }

    #[test]
    fn witness_search_finds_nonpas_network() {
        let spec = find_nonpas_witness(&ParamBox::default(), 7, 50_000).unwrap();
        let v = validated(&spec, Assumptions::A1_A2);
        let c = c_indices(&v).unwrap();
        let n = n_indices(&v, 10_000).unwrap();
        let pas = pas_report(&c, &n);
        assert!(pas.pas_xi3);
        assert!(!pas.pas_network);
        assert!(n.x4x1.value < Finite(0.0));
    }

    #[test]
    fn witness_search_fails_on_hostile_box() {
        // sigma > 1 unattainable: c14 too small for any sigma above 1.
        let bx = ParamBox {
            c14: (0.0001, 0.0002),
            e23: (1.2, 1.3),
            e24: (1.0, 1.1),
            ..ParamBox::default()
        };
        assert!(matches!(
            find_nonpas_witness(&bx, 1, 2_000),
            Err(Error::SearchFailed(_))
        ));
    }
}
