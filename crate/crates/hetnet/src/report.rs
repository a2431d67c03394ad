//! Assembled analysis reports: per-connection index rows with provenance,
//! stability flags, and the derived-quantity block, in a shape that
//! round-trips through JSON.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::b2b2::{b2_network_indices, ValidatedB2, B2_CONNECTIONS};
use crate::b3b3::{
    c_indices, n_indices, pas_report, regime, PasReport, ValidatedB3, B3_CONNECTIONS,
};
use crate::error::Result;
use crate::extreal::ExtReal;
use crate::network::NuConvention;

/// Rounds to `sig` significant digits so every emitted float honours the
/// 12-digit output contract exactly, including after a JSON round trip.
pub fn round_sig(v: f64, sig: i32) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let mag = v.abs().log10().floor() as i32;
    let factor = 10f64.powi(sig - 1 - mag);
    (v * factor).round() / factor
}

fn round_ext(v: ExtReal) -> ExtReal {
    match v {
        ExtReal::Finite(f) => ExtReal::Finite(round_sig(f, 12)),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleIndexEntry {
    pub cycle: String,
    pub value: ExtReal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionRow {
    pub connection: String,
    pub c_indices: Vec<CycleIndexEntry>,
    pub n_index: ExtReal,
    pub source: String,
    pub caveats: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub network: String,
    pub eigenvalues: BTreeMap<String, f64>,
    pub assumptions: Vec<String>,
    pub nu_convention: NuConvention,
    pub derived: BTreeMap<String, f64>,
    pub regime: String,
    pub connections: Vec<ConnectionRow>,
    pub pas: PasReport,
}

pub fn analyze_b3(v: &ValidatedB3, n_cap: usize) -> Result<AnalyzeReport> {
    let c = c_indices(v)?;
    let n = n_indices(v, n_cap)?;
    let reg = regime(v)?;
    let pas = pas_report(&c, &n);

    let s = &v.spec;
    let eigenvalues: BTreeMap<String, f64> = [
        ("e12", s.e12),
        ("e23", s.e23),
        ("e24", s.e24),
        ("e31", s.e31),
        ("e41", s.e41),
        ("c13", s.c13),
        ("c14", s.c14),
        ("c21", s.c21),
        ("c32", s.c32),
        ("c42", s.c42),
        ("c34", s.c34),
        ("c43", s.c43),
        ("r1", s.r1),
        ("r2", s.r2),
        ("r3", s.r3),
        ("r4", s.r4),
    ]
    .into_iter()
    .map(|(k, x)| (k.to_string(), round_sig(x, 12)))
    .collect();

    let d = &v.derived;
    let derived: BTreeMap<String, f64> = [
        ("rho", d.rho),
        ("rho_t", d.rho_t),
        ("nu", d.nu),
        ("nu_t", d.nu_t),
        ("delta", d.delta),
        ("delta_t", d.delta_t),
        ("tau", d.tau),
        ("tau_t", d.tau_t),
        ("sigma", d.sigma),
        ("sigma_t", d.sigma_t),
        ("alpha", d.alpha),
        ("beta", d.beta),
    ]
    .into_iter()
    .map(|(k, x)| (k.to_string(), round_sig(x, 12)))
    .collect();

    // c-index slots per connection: the common one carries both cycles.
    let c_slot = |conn: crate::b3b3::B3Connection| -> Vec<CycleIndexEntry> {
        use crate::b3b3::B3Connection::*;
        match conn {
            X1toX2 => vec![
                CycleIndexEntry {
                    cycle: "xi3-cycle".into(),
                    value: round_ext(c.xi3[0]),
                },
                CycleIndexEntry {
                    cycle: "xi4-cycle".into(),
                    value: round_ext(c.xi4[0]),
                },
            ],
            X2toX3 => vec![CycleIndexEntry {
                cycle: "xi3-cycle".into(),
                value: round_ext(c.xi3[1]),
            }],
            X3toX1 => vec![CycleIndexEntry {
                cycle: "xi3-cycle".into(),
                value: round_ext(c.xi3[2]),
            }],
            X2toX4 => vec![CycleIndexEntry {
                cycle: "xi4-cycle".into(),
                value: round_ext(c.xi4[1]),
            }],
            X4toX1 => vec![CycleIndexEntry {
                cycle: "xi4-cycle".into(),
                value: round_ext(c.xi4[2]),
            }],
        }
    };

    let connections = B3_CONNECTIONS
        .iter()
        .map(|&conn| {
            let e = n.get(conn);
            ConnectionRow {
                connection: conn.label().to_string(),
                c_indices: c_slot(conn),
                n_index: round_ext(e.value),
                source: e.source.clone(),
                caveats: if e.model_extrapolated {
                    vec!["model-extrapolated magnitude; sign-exact".into()]
                } else {
                    vec![]
                },
            }
        })
        .collect();

    let mut assumptions = Vec::new();
    if v.assumptions.a1 {
        assumptions.push("A1".to_string());
    }
    if v.assumptions.a2 {
        assumptions.push("A2".to_string());
    }

    Ok(AnalyzeReport {
        network: "B3B3".into(),
        eigenvalues,
        assumptions,
        nu_convention: d.nu_convention,
        derived,
        regime: reg.name().to_string(),
        connections,
        pas,
    })
}

pub fn analyze_b2(v: &ValidatedB2, n_cap: usize) -> Result<AnalyzeReport> {
    let r = b2_network_indices(v, n_cap)?;
    let s = &v.spec;
    let eigenvalues: BTreeMap<String, f64> = [
        ("ea2", s.ea2),
        ("eb3", s.eb3),
        ("eb4", s.eb4),
        ("ca3", s.ca3),
        ("ca4", s.ca4),
        ("cb2", s.cb2),
        ("ra", s.ra),
        ("rb", s.rb),
    ]
    .into_iter()
    .map(|(k, x)| (k.to_string(), round_sig(x, 12)))
    .collect();
    let d = &v.derived;
    let derived: BTreeMap<String, f64> = [
        ("rho", d.rho),
        ("rho_t", d.rho_t),
        ("delta", d.delta),
        ("delta_t", d.delta_t),
    ]
    .into_iter()
    .map(|(k, x)| (k.to_string(), round_sig(x, 12)))
    .collect();

    let pas = PasReport {
        pas_xi3: r.c_ab3.is_positive() && r.c_ba3.is_positive(),
        pas_xi4: r.c_ab4.is_positive() && r.c_ba4.is_positive(),
        pas_network: r.n_ab.value.is_positive()
            && r.n_ba3.value.is_positive()
            && r.n_ba4.value.is_positive(),
    };

    let rows = vec![
        ConnectionRow {
            connection: crate::b2b2::B2Connection::AtoB.label().into(),
            c_indices: vec![
                CycleIndexEntry {
                    cycle: "C3".into(),
                    value: round_ext(r.c_ab3),
                },
                CycleIndexEntry {
                    cycle: "C4".into(),
                    value: round_ext(r.c_ab4),
                },
            ],
            n_index: round_ext(r.n_ab.value),
            source: r.n_ab.source.clone(),
            caveats: caveats(r.n_ab.model_extrapolated),
        },
        ConnectionRow {
            connection: crate::b2b2::B2Connection::BtoA3.label().into(),
            c_indices: vec![CycleIndexEntry {
                cycle: "C3".into(),
                value: round_ext(r.c_ba3),
            }],
            n_index: round_ext(r.n_ba3.value),
            source: r.n_ba3.source.clone(),
            caveats: caveats(r.n_ba3.model_extrapolated),
        },
        ConnectionRow {
            connection: crate::b2b2::B2Connection::BtoA4.label().into(),
            c_indices: vec![CycleIndexEntry {
                cycle: "C4".into(),
                value: round_ext(r.c_ba4),
            }],
            n_index: round_ext(r.n_ba4.value),
            source: r.n_ba4.source.clone(),
            caveats: caveats(r.n_ba4.model_extrapolated),
        },
    ];
    debug_assert_eq!(B2_CONNECTIONS.len(), rows.len());

    let mut assumptions = Vec::new();
    if v.assumptions.a1 {
        assumptions.push("A1".to_string());
    }

    Ok(AnalyzeReport {
        network: "B2B2".into(),
        eigenvalues,
        assumptions,
        nu_convention: NuConvention::Composed,
        derived,
        regime: if d.delta < 0.0 {
            "delta < 0 (C3 attracts)"
        } else {
            "delta > 0 (C4 attracts)"
        }
        .into(),
        connections: rows,
        pas,
    })
}

fn caveats(model_extrapolated: bool) -> Vec<String> {
    if model_extrapolated {
        vec!["model-extrapolated magnitude; sign-exact".into()]
    } else {
        vec![]
    }
}

/// Plain-text table for humans.
pub fn render_text(r: &AnalyzeReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("network: {}\n", r.network));
    out.push_str(&format!("assumptions: {}\n", r.assumptions.join(", ")));
    out.push_str(&format!("regime: {}\n", r.regime));
    out.push_str("derived:\n");
    for (k, v) in &r.derived {
        out.push_str(&format!(
            "  {k:<8} = {}\n",
            crate::extreal::format_sig(*v, 12)
        ));
    }
    out.push_str(&format!(
        "\n{:<12} {:<28} {:>14}  {}\n",
        "connection", "c-index (per cycle)", "n-index", "source"
    ));
    for row in &r.connections {
        let cs = row
            .c_indices
            .iter()
            .map(|e| format!("{}: {}", e.cycle, e.value))
            .collect::<Vec<_>>()
            .join(", ");
        let caveat = if row.caveats.is_empty() { "" } else { " [*]" };
        out.push_str(&format!(
            "{:<12} {:<28} {:>14}  {}{}\n",
            row.connection,
            cs,
            row.n_index.to_string(),
            row.source,
            caveat
        ));
    }
    out.push_str(&format!(
        "\npas: cycle3 = {}, cycle4 = {}, network = {}\n",
        r.pas.pas_xi3, r.pas.pas_xi4, r.pas.pas_network
    ));
    if r.connections.iter().any(|c| !c.caveats.is_empty()) {
        out.push_str("[*] magnitude from the straddling-wedge model; only the sign is exact\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::b3b3::fixtures::*;
    use crate::network::Assumptions;

    #[test]
    fn report_round_trips_through_json() {
        let v = validated(&p0(), Assumptions::A1);
        let rep = analyze_b3(&v, 10_000).unwrap();
        let text = serde_json::to_string_pretty(&rep).unwrap();
        let back: AnalyzeReport = serde_json::from_str(&text).unwrap();
        assert_eq!(rep, back);
        assert!(text.contains("\"inf\""));
    }

    #[test]
    fn p0_report_flags() {
        let v = validated(&p0(), Assumptions::A1);
        let rep = analyze_b3(&v, 10_000).unwrap();
        assert!(rep.pas.pas_xi3 && !rep.pas.pas_xi4 && rep.pas.pas_network);
        assert_eq!(rep.connections.len(), 5);
        assert_eq!(rep.connections[0].c_indices.len(), 2);
        let txt = render_text(&rep);
        assert!(txt.contains("xi1->xi2"));
    }

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(1.0 / 3.0, 12), 0.333333333333);
        assert_eq!(round_sig(-123456.789012345, 12), -123456.789012);
        assert_eq!(round_sig(0.0, 12), 0.0);
    }
}
