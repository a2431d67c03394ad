//! Independent verification oracle: exact iteration of the section maps with
//! their domain inequalities, basin membership by following itineraries,
//! Monte-Carlo estimation of the attracted fraction, log-log regression to a
//! stability-index estimate, and a fixed-step integrator for the concrete
//! vector field.
//!
//! Nothing here reuses the analytic index formulas; agreement between the
//! two routes is what the verification commands certify.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::b2b2::{B2Connection, FieldCoeffs, ValidatedB2};
use crate::b3b3::{B3Connection, ValidatedB3};
use crate::error::{Error, Result};
use crate::extreal::{ExtReal, Finite, PosInf};
use crate::DOMAIN_MARGIN;

/// Coordinate floor below which a driving coordinate counts as converged.
pub const ATTRACTION_FLOOR: f64 = 1e-12;
/// Hard underflow guard for raw map application.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;
/// Default cap on full circuits before an itinerary is abandoned.
pub const DEFAULT_MAX_LOOPS: usize = 200;

/// The map skeleton of one network.
#[derive(Debug, Clone)]
pub enum Model {
    B3(ValidatedB3),
    B2(ValidatedB2),
}

/// Outgoing cross-sections, named by the node being left and the node ahead.
/// For the two-node network the three section planes are shared between the
/// incoming and outgoing roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SectionId {
    H1Out2,
    H2Out3,
    H3Out1,
    H2Out4,
    H4Out1,
    Hb2,
    Ha3,
    Ha4,
}

impl SectionId {
    pub fn label(&self) -> &'static str {
        match self {
            SectionId::H1Out2 => "H1^out,2",
            SectionId::H2Out3 => "H2^out,3",
            SectionId::H3Out1 => "H3^out,1",
            SectionId::H2Out4 => "H2^out,4",
            SectionId::H4Out1 => "H4^out,1",
            SectionId::Hb2 => "Hb2^in",
            SectionId::Ha3 => "Ha3^in",
            SectionId::Ha4 => "Ha4^in",
        }
    }
}

/// Point on a section: the two stability-relevant coordinates, plus the full
/// four-vector when the caller tracks radial components too.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionPoint {
    pub section: SectionId,
    pub x: f64,
    pub y: f64,
    pub full: Option<[f64; 4]>,
}

impl SectionPoint {
    pub fn reduced(section: SectionId, x: f64, y: f64) -> Self {
        SectionPoint {
            section,
            x,
            y,
            full: None,
        }
    }
}

/// Local (one-pass) and return maps of both networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum MapId {
    Phi123,
    Phi231,
    Phi312,
    Phi124,
    Phi241,
    Phi412,
    Ht1,
    Ht2,
    Ht3,
    H1,
    H2,
    H4,
    PhiA3,
    PhiB3,
    PhiA4,
    PhiB4,
    G3a,
    G3b,
    G4a,
    G4b,
}

/// Result of one map application.
#[derive(Debug, Clone, PartialEq)]
pub enum MapOutcome {
    Next(SectionPoint),
    /// Input violated the named domain inequality: the point leaves the
    /// network neighbourhood transversally.
    Escaped {
        violated: String,
    },
    /// Driving coordinate underflowed; the point is as good as converged to
    /// the contracting cycle.
    Underflow,
}

/// Which cycle an attracted itinerary settled on. `Cycle3` is the
/// `xi3`-cycle / `C3`, `Cycle4` the `xi4`-cycle / `C4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CycleTag {
    Cycle3,
    Cycle4,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Outcome {
    Attracted { cycle: CycleTag },
    Escaped { loops: usize, violated: String },
    Undecided,
}

/// Section-to-section record of one followed point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Itinerary {
    pub points: Vec<SectionPoint>,
    pub outcome: Outcome,
}

struct MapSpec {
    source: SectionId,
    target: SectionId,
    /// Domain inequality `lhs < margin * rhs^exponent`, expressed over the
    /// reduced coordinates; `None` means globally defined.
    dom: Option<Dom>,
}

#[derive(Clone, Copy)]
enum Dom {
    /// `y < m x^e`
    YbelowX(f64),
    /// `x < m y^e`
    XbelowY(f64),
}

impl Dom {
    fn check(&self, x: f64, y: f64) -> (bool, String) {
        match *self {
            Dom::YbelowX(e) => (y < DOMAIN_MARGIN * x.powf(e), format!("y < x^{e}")),
            Dom::XbelowY(e) => (x < DOMAIN_MARGIN * y.powf(e), format!("x < y^{e}")),
        }
    }
}

fn map_spec(model: &Model, id: MapId) -> Result<MapSpec> {
    use MapId::*;
    use SectionId::*;
    let b3 = |m: &Model| -> Result<ValidatedB3> {
        match m {
            Model::B3(v) => Ok(*v),
            Model::B2(_) => Err(Error::UnknownMap(
                format!("{id:?}"),
                "two-node network".into(),
            )),
        }
    };
    let b2 = |m: &Model| -> Result<ValidatedB2> {
        match m {
            Model::B2(v) => Ok(*v),
            Model::B3(_) => Err(Error::UnknownMap(
                format!("{id:?}"),
                "four-node network".into(),
            )),
        }
    };
    Ok(match id {
        Phi123 => {
            let v = b3(model)?;
            MapSpec {
                source: H1Out2,
                target: H2Out3,
                dom: Some(Dom::YbelowX(v.spec.e24 / v.spec.e23)),
            }
        }
        Phi231 => {
            let v = b3(model)?;
            let dom = (v.spec.c34 < 0.0).then(|| Dom::YbelowX(-v.spec.c34 / v.spec.e31));
            MapSpec {
                source: H2Out3,
                target: H3Out1,
                dom,
            }
        }
        Phi312 => MapSpec {
            source: H3Out1,
            target: H1Out2,
            dom: None,
        },
        Phi124 => {
            let v = b3(model)?;
            MapSpec {
                source: H1Out2,
                target: H2Out4,
                dom: Some(Dom::XbelowY(v.spec.e23 / v.spec.e24)),
            }
        }
        Phi241 => {
            let v = b3(model)?;
            let dom = (v.spec.c43 < 0.0).then(|| Dom::YbelowX(-v.spec.c43 / v.spec.e41));
            MapSpec {
                source: H2Out4,
                target: H4Out1,
                dom,
            }
        }
        Phi412 => MapSpec {
            source: H4Out1,
            target: H1Out2,
            dom: None,
        },
        Ht1 => {
            let v = b3(model)?;
            let a_exp = if v.spec.c34 < 0.0 {
                v.derived.alpha
            } else {
                v.spec.e24 / v.spec.e23
            };
            MapSpec {
                source: H1Out2,
                target: H1Out2,
                dom: Some(Dom::YbelowX(a_exp)),
            }
        }
        Ht2 => {
            let v = b3(model)?;
            // The tighter of y < x^{-delta_t} and the transverse cusp.
            let e = if v.spec.c34 < 0.0 {
                (-v.derived.delta_t).max(-v.spec.c34 / v.spec.e31)
            } else {
                -v.derived.delta_t
            };
            MapSpec {
                source: H2Out3,
                target: H2Out3,
                dom: Some(Dom::YbelowX(e)),
            }
        }
        Ht3 => {
            let v = b3(model)?;
            let e = if v.spec.c34 < 0.0 {
                -v.derived.tau_t
            } else {
                v.derived.sigma_t
            };
            MapSpec {
                source: H3Out1,
                target: H3Out1,
                dom: Some(Dom::YbelowX(e)),
            }
        }
        H1 => {
            let v = b3(model)?;
            let c_exp = if v.spec.c43 < 0.0 {
                v.spec.e23 / v.spec.e24 - v.spec.c21 * v.spec.c43 / (v.spec.e24 * v.spec.e41)
            } else {
                v.spec.e23 / v.spec.e24
            };
            MapSpec {
                source: H1Out2,
                target: H1Out2,
                dom: Some(Dom::XbelowY(c_exp)),
            }
        }
        H2 => {
            let v = b3(model)?;
            let e = if v.spec.c43 < 0.0 {
                (-v.derived.delta).max(-v.spec.c43 / v.spec.e41)
            } else {
                -v.derived.delta
            };
            MapSpec {
                source: H2Out4,
                target: H2Out4,
                dom: Some(Dom::YbelowX(e)),
            }
        }
        H4 => {
            let v = b3(model)?;
            let e = if v.spec.c43 < 0.0 {
                -v.derived.tau
            } else {
                v.derived.sigma
            };
            MapSpec {
                source: H4Out1,
                target: H4Out1,
                dom: Some(Dom::YbelowX(e)),
            }
        }
        PhiB3 => {
            let v = b2(model)?;
            MapSpec {
                source: Hb2,
                target: Ha3,
                dom: Some(Dom::YbelowX(v.spec.eb4 / v.spec.eb3)),
            }
        }
        PhiB4 => {
            let v = b2(model)?;
            MapSpec {
                source: Hb2,
                target: Ha4,
                dom: Some(Dom::XbelowY(v.spec.eb3 / v.spec.eb4)),
            }
        }
        PhiA3 => MapSpec {
            source: Ha3,
            target: Hb2,
            dom: None,
        },
        PhiA4 => MapSpec {
            source: Ha4,
            target: Hb2,
            dom: None,
        },
        G3a => {
            let v = b2(model)?;
            MapSpec {
                source: Ha3,
                target: Ha3,
                dom: Some(Dom::YbelowX(-v.derived.delta_t)),
            }
        }
        G3b => {
            let v = b2(model)?;
            MapSpec {
                source: Hb2,
                target: Hb2,
                dom: Some(Dom::YbelowX(v.spec.eb4 / v.spec.eb3)),
            }
        }
        G4a => {
            let v = b2(model)?;
            MapSpec {
                source: Ha4,
                target: Ha4,
                dom: Some(Dom::YbelowX(-v.derived.delta)),
            }
        }
        G4b => {
            let v = b2(model)?;
            MapSpec {
                source: Hb2,
                target: Hb2,
                dom: Some(Dom::XbelowY(v.spec.eb3 / v.spec.eb4)),
            }
        }
    })
}

/// Reduced-coordinate image (x', y') of one map, assuming the domain check
/// already passed.
fn apply_reduced(model: &Model, id: MapId, x: f64, y: f64) -> (f64, f64) {
    match (model, id) {
        (Model::B3(v), _) => {
            let s = &v.spec;
            let d = &v.derived;
            match id {
                MapId::Phi123 => (x.powf(s.c21 / s.e23), y * x.powf(-s.e24 / s.e23)),
                MapId::Phi231 => (x.powf(s.c32 / s.e31), y * x.powf(s.c34 / s.e31)),
                MapId::Phi312 => (x.powf(s.c13 / s.e12), y * x.powf(s.c14 / s.e12)),
                MapId::Phi124 => (y.powf(s.c21 / s.e24), x * y.powf(-s.e23 / s.e24)),
                MapId::Phi241 => (x.powf(s.c42 / s.e41), y * x.powf(s.c43 / s.e41)),
                MapId::Phi412 => (y * x.powf(s.c13 / s.e12), x.powf(s.c14 / s.e12)),
                MapId::Ht1 => (x.powf(d.rho_t), y * x.powf(d.nu_t_composed)),
                MapId::Ht2 => (x.powf(d.rho_t), y * x.powf(d.delta_t)),
                MapId::Ht3 => (x.powf(d.rho_t), y * x.powf(d.tau_t)),
                MapId::H1 => (x * y.powf(d.nu_composed), y.powf(d.rho)),
                MapId::H2 => (x.powf(d.rho), y * x.powf(d.delta)),
                MapId::H4 => (x.powf(d.rho), y * x.powf(d.tau)),
                _ => unreachable!("map/model mismatch is rejected upstream"),
            }
        }
        (Model::B2(v), _) => {
            let s = &v.spec;
            let d = &v.derived;
            match id {
                MapId::PhiA3 => (x.powf(s.ca3 / s.ea2), y * x.powf(s.ca4 / s.ea2)),
                MapId::PhiA4 => (y * x.powf(s.ca3 / s.ea2), x.powf(s.ca4 / s.ea2)),
                MapId::PhiB3 => (x.powf(s.cb2 / s.eb3), y * x.powf(-s.eb4 / s.eb3)),
                MapId::PhiB4 => (y.powf(s.cb2 / s.eb4), x * y.powf(-s.eb3 / s.eb4)),
                MapId::G3a => (x.powf(d.rho_t), y * x.powf(d.delta_t)),
                MapId::G3b => (x.powf(d.rho_t), y * x.powf((s.eb4 / s.eb3) * (d.rho - 1.0))),
                MapId::G4a => (x.powf(d.rho), y * x.powf(d.delta)),
                MapId::G4b => (x * y.powf((s.eb3 / s.eb4) * (d.rho_t - 1.0)), y.powf(d.rho)),
                _ => unreachable!("map/model mismatch is rejected upstream"),
            }
        }
    }
}

/// Full four-component image of the one-pass maps, with the radial slot of
/// the source box passed into the radial slot of the target box (identity
/// global maps).
fn apply_full(model: &Model, id: MapId, v4: [f64; 4]) -> Option<[f64; 4]> {
    match model {
        Model::B3(v) => {
            let s = &v.spec;
            let p = |b: f64, e: f64| -> f64 { b.powf(e) };
            Some(match id {
                MapId::Phi123 => {
                    let [_, x2, x3, x4] = v4;
                    [
                        p(x3, s.c21 / s.e23),
                        1.0,
                        x2 * p(x3, s.r2 / s.e23),
                        x4 * p(x3, -s.e24 / s.e23),
                    ]
                }
                MapId::Phi231 => {
                    let [x1, _, x3, x4] = v4;
                    [
                        x3 * p(x1, s.r3 / s.e31),
                        p(x1, s.c32 / s.e31),
                        1.0,
                        x4 * p(x1, s.c34 / s.e31),
                    ]
                }
                MapId::Phi312 => {
                    let [x1, x2, _, x4] = v4;
                    [
                        1.0,
                        x1 * p(x2, s.r1 / s.e12),
                        p(x2, s.c13 / s.e12),
                        x4 * p(x2, s.c14 / s.e12),
                    ]
                }
                MapId::Phi124 => {
                    let [_, x2, x3, x4] = v4;
                    [
                        p(x4, s.c21 / s.e24),
                        1.0,
                        x3 * p(x4, -s.e23 / s.e24),
                        x2 * p(x4, s.r2 / s.e24),
                    ]
                }
                MapId::Phi241 => {
                    let [x1, _, x3, x4] = v4;
                    [
                        x4 * p(x1, s.r4 / s.e41),
                        p(x1, s.c42 / s.e41),
                        x3 * p(x1, s.c43 / s.e41),
                        1.0,
                    ]
                }
                MapId::Phi412 => {
                    let [x1, x2, x3, _] = v4;
                    [
                        1.0,
                        x1 * p(x2, s.r1 / s.e12),
                        x3 * p(x2, s.c13 / s.e12),
                        p(x2, s.c14 / s.e12),
                    ]
                }
                _ => return None,
            })
        }
        Model::B2(v) => {
            let s = &v.spec;
            let p = |b: f64, e: f64| -> f64 { b.powf(e) };
            Some(match id {
                MapId::PhiA3 => {
                    let [x1, x2, _, x4] = v4;
                    [
                        x1 * p(x2, s.ra / s.ea2),
                        1.0,
                        p(x2, s.ca3 / s.ea2),
                        x4 * p(x2, s.ca4 / s.ea2),
                    ]
                }
                MapId::PhiA4 => {
                    let [x1, x2, x3, _] = v4;
                    [
                        x1 * p(x2, s.ra / s.ea2),
                        1.0,
                        x3 * p(x2, s.ca3 / s.ea2),
                        p(x2, s.ca4 / s.ea2),
                    ]
                }
                MapId::PhiB3 => {
                    let [x1, _, x3, x4] = v4;
                    [
                        x1 * p(x3, s.rb / s.eb3),
                        p(x3, s.cb2 / s.eb3),
                        1.0,
                        x4 * p(x3, -s.eb4 / s.eb3),
                    ]
                }
                MapId::PhiB4 => {
                    let [x1, _, x3, x4] = v4;
                    [
                        x1 * p(x4, s.rb / s.eb4),
                        p(x4, s.cb2 / s.eb4),
                        x3 * p(x4, -s.eb3 / s.eb4),
                        1.0,
                    ]
                }
                _ => return None,
            })
        }
    }
}

/// One map application with domain and underflow checks. Out-of-domain input
/// comes back as `Escaped` naming the violated inequality.
pub fn apply_map(model: &Model, id: MapId, point: &SectionPoint) -> Result<MapOutcome> {
    let spec = map_spec(model, id)?;
    if spec.source != point.section {
        return Err(Error::UnknownMap(
            format!("{id:?}"),
            point.section.label().into(),
        ));
    }
    if let Some(dom) = &spec.dom {
        let (ok, ineq) = dom.check(point.x, point.y);
        if !ok {
            return Ok(MapOutcome::Escaped { violated: ineq });
        }
    }
    if point.x < UNDERFLOW_FLOOR || point.y < UNDERFLOW_FLOOR {
        return Ok(MapOutcome::Underflow);
    }
    let (x, y) = apply_reduced(model, id, point.x, point.y);
    if x < UNDERFLOW_FLOOR || y < UNDERFLOW_FLOOR {
        return Ok(MapOutcome::Underflow);
    }
    let full = point.full.and_then(|v4| apply_full(model, id, v4));
    Ok(MapOutcome::Next(SectionPoint {
        section: spec.target,
        x,
        y,
        full,
    }))
}

/// Caps for [`follow`]: loop budget, transverse tube radius and the
/// convergence floor for the driving coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FollowCaps {
    pub max_loops: usize,
    pub tube: f64,
    pub floor: f64,
}

impl Default for FollowCaps {
    fn default() -> Self {
        FollowCaps {
            max_loops: DEFAULT_MAX_LOOPS,
            tube: DOMAIN_MARGIN,
            floor: ATTRACTION_FLOOR,
        }
    }
}

/// Whether looping `tag`'s cycle contracts a point onto it. Orbits of the
/// return map `(x, y) -> (x^rho, y x^nu)` have log-log slopes `u = ln y /
/// ln x` obeying `u -> (u + nu) / rho`, which converges to `nu / (rho - 1)`.
/// The cycle holds on to deep points exactly when that limit slope stays
/// above the domain exponent; otherwise every point eventually violates a
/// domain inequality no matter how small its transverse coordinate is.
fn cycle_contracting(model: &Model, tag: CycleTag) -> bool {
    let (rho, nu, dom) = match (model, tag) {
        (Model::B3(v), CycleTag::Cycle3) => {
            let a_exp = if v.spec.c34 < 0.0 {
                v.derived.alpha
            } else {
                v.spec.e24 / v.spec.e23
            };
            (v.derived.rho_t, v.derived.nu_t_composed, a_exp)
        }
        (Model::B3(v), CycleTag::Cycle4) => {
            let c_exp = if v.spec.c43 < 0.0 {
                v.spec.e23 / v.spec.e24 - v.spec.c21 * v.spec.c43 / (v.spec.e24 * v.spec.e41)
            } else {
                v.spec.e23 / v.spec.e24
            };
            (v.derived.rho, v.derived.nu_composed, c_exp)
        }
        (Model::B2(v), CycleTag::Cycle3) => {
            let ratio = v.spec.eb4 / v.spec.eb3;
            (v.derived.rho_t, ratio * (v.derived.rho - 1.0), ratio)
        }
        (Model::B2(v), CycleTag::Cycle4) => {
            let ratio = v.spec.eb3 / v.spec.eb4;
            (v.derived.rho, ratio * (v.derived.rho_t - 1.0), ratio)
        }
    };
    rho > 1.0 && nu > (rho - 1.0) * dom
}

/// The one-pass map leaving a section, with the driving coordinate and the
/// cycle it belongs to. At branching sections the first applicable branch in
/// listed order is taken; their domains are disjoint up to constants.
fn branches(section: SectionId) -> &'static [(MapId, CycleTag, bool)] {
    use CycleTag::*;
    use MapId::*;
    // Third field: the driving coordinate is x (true) or y (false).
    match section {
        SectionId::H1Out2 => &[(Phi123, Cycle3, true), (Phi124, Cycle4, false)],
        SectionId::H2Out3 => &[(Phi231, Cycle3, true)],
        SectionId::H3Out1 => &[(Phi312, Cycle3, true)],
        SectionId::H2Out4 => &[(Phi241, Cycle4, true)],
        SectionId::H4Out1 => &[(Phi412, Cycle4, true)],
        SectionId::Hb2 => &[(PhiB3, Cycle3, true), (PhiB4, Cycle4, false)],
        SectionId::Ha3 => &[(PhiA3, Cycle3, true)],
        SectionId::Ha4 => &[(PhiA4, Cycle4, true)],
    }
}

/// Follows a point through the map skeleton until it converges onto a cycle,
/// leaves the neighbourhood, or exhausts the loop budget. `loops` counts
/// returns to the starting section.
pub fn follow(model: &Model, start: &SectionPoint, caps: &FollowCaps) -> Itinerary {
    follow_impl(model, start, caps, true)
}

/// Outcome-only variant used by the Monte-Carlo sampler.
pub fn follow_outcome(model: &Model, start: &SectionPoint, caps: &FollowCaps) -> Outcome {
    follow_impl(model, start, caps, false).outcome
}

fn follow_impl(model: &Model, start: &SectionPoint, caps: &FollowCaps, record: bool) -> Itinerary {
    let mut points = Vec::new();
    if record {
        points.push(*start);
    }
    let contracting = [
        cycle_contracting(model, CycleTag::Cycle3),
        cycle_contracting(model, CycleTag::Cycle4),
    ];
    let holds = |cycle: CycleTag| match cycle {
        CycleTag::Cycle3 => contracting[0],
        CycleTag::Cycle4 => contracting[1],
    };
    let mut cur = *start;
    let mut loops = 0usize;
    // Generous bound on single map applications per loop.
    let step_budget = caps.max_loops.saturating_mul(8).saturating_add(8);
    let mut last_violation: Option<String> = None;
    for _ in 0..step_budget {
        if loops >= caps.max_loops {
            return Itinerary {
                points,
                outcome: Outcome::Undecided,
            };
        }
        let mut advanced = false;
        for &(map, cycle, x_drives) in branches(cur.section) {
            let spec = map_spec(model, map).expect("section/map tables agree");
            if let Some(dom) = &spec.dom {
                let (ok, ineq) = dom.check(cur.x, cur.y);
                if !ok {
                    last_violation = Some(ineq);
                    continue;
                }
            }
            let (driving, transverse) = if x_drives {
                (cur.x, cur.y)
            } else {
                (cur.y, cur.x)
            };
            // The convergence shortcut is sound only on a cycle whose limit
            // slope clears the domain exponent.
            if driving < caps.floor && transverse < caps.tube && holds(cycle) {
                return Itinerary {
                    points,
                    outcome: Outcome::Attracted { cycle },
                };
            }
            match apply_map(model, map, &cur).expect("domain pre-checked") {
                MapOutcome::Next(next) => {
                    if next.x >= caps.tube && next.y >= caps.tube {
                        return Itinerary {
                            points,
                            outcome: Outcome::Escaped {
                                loops,
                                violated: "both coordinates left the tube".into(),
                            },
                        };
                    }
                    cur = next;
                    if record {
                        points.push(cur);
                    }
                    if cur.section == start.section {
                        loops += 1;
                    }
                    advanced = true;
                }
                MapOutcome::Escaped { violated } => {
                    return Itinerary {
                        points,
                        outcome: Outcome::Escaped { loops, violated },
                    };
                }
                MapOutcome::Underflow => {
                    let outcome = if holds(cycle) {
                        Outcome::Attracted { cycle }
                    } else {
                        Outcome::Escaped {
                            loops,
                            violated: "limit slope falls below the domain exponent".into(),
                        }
                    };
                    return Itinerary { points, outcome };
                }
            }
            break;
        }
        if !advanced {
            let violated = last_violation
                .take()
                .unwrap_or_else(|| "no admissible map at section".into());
            return Itinerary {
                points,
                outcome: Outcome::Escaped { loops, violated },
            };
        }
    }
    Itinerary {
        points,
        outcome: Outcome::Undecided,
    }
}

// ---------------------------------------------------------------------------
// Monte-Carlo index estimation.
// ---------------------------------------------------------------------------

/// Connection handle across both networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conn {
    B3(B3Connection),
    B2(B2Connection),
}

impl Conn {
    pub fn section(&self) -> SectionId {
        match self {
            Conn::B3(B3Connection::X1toX2) => SectionId::H1Out2,
            Conn::B3(B3Connection::X2toX3) => SectionId::H2Out3,
            Conn::B3(B3Connection::X3toX1) => SectionId::H3Out1,
            Conn::B3(B3Connection::X2toX4) => SectionId::H2Out4,
            Conn::B3(B3Connection::X4toX1) => SectionId::H4Out1,
            Conn::B2(B2Connection::AtoB) => SectionId::Hb2,
            Conn::B2(B2Connection::BtoA3) => SectionId::Ha3,
            Conn::B2(B2Connection::BtoA4) => SectionId::Ha4,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Conn::B3(c) => c.label(),
            Conn::B2(c) => c.label(),
        }
    }
}

/// Whether a sampled point counts as attracted: to one specific cycle, or to
/// the network (either cycle).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    Cycle(CycleTag),
    Network,
}

/// Counter-based uniform draw: a pure function of `(seed, eps index, sample
/// index, dimension)`, so parallel scheduling cannot affect the stream.
fn counter_u01(seed: u64, eps_idx: u64, sample: u64, dim: u64) -> f64 {
    let mut z = seed
        ^ eps_idx.wrapping_mul(0x9e3779b97f4a7c15)
        ^ sample.wrapping_mul(0xbf58476d1ce4e5b9)
        ^ dim.wrapping_mul(0x94d049bb133111eb);
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    // Map to (0, 1), excluding the endpoints.
    (((z >> 11) as f64) + 0.5) / (1u64 << 53) as f64
}

/// Per-epsilon tallies of a Monte-Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsCell {
    pub eps: f64,
    pub attracted: usize,
    pub escaped: usize,
    pub undecided: usize,
}

impl EpsCell {
    pub fn fraction(&self) -> f64 {
        self.attracted as f64 / (self.attracted + self.escaped + self.undecided) as f64
    }
}

/// Estimated stability index with its regression diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexEstimate {
    pub eps_grid: Vec<f64>,
    pub cells: Vec<EpsCell>,
    /// Attracted fraction per epsilon.
    pub sigma_eps: Vec<f64>,
    pub sigma_plus: ExtReal,
    pub sigma_minus: ExtReal,
    pub sigma: ExtReal,
    /// OLS standard errors of the two slopes (0 when pinned at infinity).
    pub stderr_plus: f64,
    pub stderr_minus: f64,
    pub undecided_fraction: f64,
    pub samples_per_eps: usize,
    pub seed: u64,
}

/// Options of one estimation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub eps_grid: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub caps: FollowCaps,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            eps_grid: vec![1e-2, 3e-3, 1e-3, 3e-4, 1e-4],
            samples: 100_000,
            seed: 1,
            caps: FollowCaps::default(),
        }
    }
}

fn classify(outcome: &Outcome, level: Level) -> u8 {
    // 0 attracted, 1 escaped, 2 undecided
    match outcome {
        Outcome::Attracted { cycle } => match level {
            Level::Network => 0,
            Level::Cycle(tag) => {
                if cycle == &tag {
                    0
                } else {
                    1
                }
            }
        },
        Outcome::Escaped { .. } => 1,
        Outcome::Undecided => 2,
    }
}

/// Samples `m` points uniformly in `[0, eps]^2` of the reduced section at
/// the connection, follows each, and regresses the attracted fraction
/// against epsilon on log-log axes. Deterministic for a fixed seed.
pub fn estimate_sigma_mc(
    model: &Model,
    conn: Conn,
    level: Level,
    opts: &McOptions,
) -> Result<IndexEstimate> {
    if opts.samples < 1_000 {
        return Err(Error::InsufficientSamples(format!(
            "need at least 1000 samples per epsilon, got {}",
            opts.samples
        )));
    }
    if let (Model::B3(_), Conn::B2(_)) | (Model::B2(_), Conn::B3(_)) = (model, conn) {
        return Err(Error::UnknownMap(
            "connection".into(),
            "wrong network".into(),
        ));
    }
    if opts.eps_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Parse(
            "epsilon grid must be strictly descending".into(),
        ));
    }
    let section = conn.section();
    let mut cells = Vec::with_capacity(opts.eps_grid.len());
    for (eps_idx, &eps) in opts.eps_grid.iter().enumerate() {
        if !(eps > 0.0 && eps < DOMAIN_MARGIN) {
            return Err(Error::Parse(format!("epsilon {eps} outside (0, margin)")));
        }
        let tally = (0..opts.samples)
            .into_par_iter()
            .map(|i| {
                let x = eps * counter_u01(opts.seed, eps_idx as u64, i as u64, 0);
                let y = eps * counter_u01(opts.seed, eps_idx as u64, i as u64, 1);
                let start = SectionPoint::reduced(section, x, y);
                classify(&follow_outcome(model, &start, &opts.caps), level)
            })
            .fold(
                || [0usize; 3],
                |mut acc, c| {
                    acc[c as usize] += 1;
                    acc
                },
            )
            .reduce(
                || [0usize; 3],
                |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]],
            );
        cells.push(EpsCell {
            eps,
            attracted: tally[0],
            escaped: tally[1],
            undecided: tally[2],
        });
    }

    let total: usize = cells
        .iter()
        .map(|c| c.attracted + c.escaped + c.undecided)
        .sum();
    let undecided: usize = cells.iter().map(|c| c.undecided).sum();
    let undecided_fraction = undecided as f64 / total as f64;
    if undecided_fraction >= 1e-3 {
        return Err(Error::InsufficientSamples(format!(
            "undecided fraction {undecided_fraction:.2e} exceeds 0.1%; raise the loop cap"
        )));
    }

    let sigma_eps: Vec<f64> = cells.iter().map(|c| c.fraction()).collect();
    let ln_eps: Vec<f64> = cells.iter().map(|c| c.eps.ln()).collect();

    // Regression uses the leading (largest-epsilon) cells that still carry
    // at least 10 points of the relevant kind: a vanishing side starves its
    // smallest cells first, and a slope needs three usable cells. A side
    // with no usable cells at all is indistinguishable from its limit and
    // pins to infinity.
    let side = |counts: Vec<usize>, ys: Vec<f64>, what: &str| -> Result<(ExtReal, f64)> {
        let usable = counts.iter().take_while(|&&c| c >= 10).count();
        if usable >= 3 {
            return Ok({
                let (slope, se) = ols_slope(&ln_eps[..usable], &ys[..usable]);
                (Finite(slope), se)
            });
        }
        if counts.iter().all(|&c| c < 10) {
            return Ok((PosInf, 0.0));
        }
        let starved = counts
            .iter()
            .position(|&c| c < 10)
            .unwrap_or(counts.len() - 1);
        Err(Error::InsufficientSamples(format!(
            "only {} {what} points at eps = {}; widen the sample budget or coarsen the grid",
            counts[starved], cells[starved].eps
        )))
    };
    let (sigma_plus, stderr_plus) = side(
        cells.iter().map(|c| c.escaped).collect(),
        sigma_eps
            .iter()
            .map(|s| (1.0 - s).max(f64::MIN_POSITIVE).ln())
            .collect(),
        "escaping",
    )?;
    let (sigma_minus, stderr_minus) = side(
        cells.iter().map(|c| c.attracted).collect(),
        sigma_eps
            .iter()
            .map(|s| s.max(f64::MIN_POSITIVE).ln())
            .collect(),
        "attracted",
    )?;

    let sigma = sigma_plus.sub(sigma_minus);
    Ok(IndexEstimate {
        eps_grid: opts.eps_grid.clone(),
        cells,
        sigma_eps,
        sigma_plus,
        sigma_minus,
        sigma,
        stderr_plus,
        stderr_minus,
        undecided_fraction,
        samples_per_eps: opts.samples,
        seed: opts.seed,
    })
}

/// Raw per-sample rows for CSV dumps.
#[derive(Debug, Clone, Serialize)]
pub struct SampleRow {
    pub eps: f64,
    pub x: f64,
    pub y: f64,
    pub outcome: &'static str,
    pub loops: usize,
    pub exit_reason: String,
}

pub fn sample_rows(
    model: &Model,
    conn: Conn,
    eps: f64,
    n: usize,
    seed: u64,
    caps: &FollowCaps,
) -> Vec<SampleRow> {
    let section = conn.section();
    (0..n)
        .map(|i| {
            let x = eps * counter_u01(seed, 0, i as u64, 0);
            let y = eps * counter_u01(seed, 0, i as u64, 1);
            let it = follow(
                model,
                &SectionPoint::reduced(section, x, y),
                &FollowCaps { ..*caps },
            );
            let (outcome, loops, reason) = match &it.outcome {
                Outcome::Attracted { cycle } => {
                    ("attracted", it.points.len(), format!("{cycle:?}"))
                }
                Outcome::Escaped { loops, violated } => ("escaped", *loops, violated.clone()),
                Outcome::Undecided => ("undecided", caps.max_loops, String::new()),
            };
            SampleRow {
                eps,
                x,
                y,
                outcome,
                loops,
                exit_reason: reason,
            }
        })
        .collect()
}

fn ols_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    if xs.len() <= 2 {
        return (slope, 0.0);
    }
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let fit = my + slope * (x - mx);
            (y - fit) * (y - fit)
        })
        .sum();
    let se = (sse / (n - 2.0) / sxx).sqrt();
    (slope, se)
}

// ---------------------------------------------------------------------------
// Fixed-step integration of the concrete field.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub states: Vec<[f64; 4]>,
}

const BLOWUP_NORM: f64 = 1e6;

/// Classical fourth-order fixed-step integration. Coordinates that start at
/// exactly zero are clamped back to zero whenever rounding noise pushes them
/// below 1e-14 in magnitude, preserving the invariant subspaces.
pub fn integrate_rk4(fc: &FieldCoeffs, x0: [f64; 4], dt: f64, t_end: f64) -> Result<Trajectory> {
    assert!(dt > 0.0 && t_end > dt, "need dt > 0 and t_end > dt");
    let started_zero: [bool; 4] = [x0[0] == 0.0, x0[1] == 0.0, x0[2] == 0.0, x0[3] == 0.0];
    let steps = (t_end / dt).ceil() as usize;
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = x0;
    states.push(x);
    for step in 0..steps {
        let k1 = fc.eval(&x);
        let k2 = fc.eval(&add_scaled(&x, &k1, dt / 2.0));
        let k3 = fc.eval(&add_scaled(&x, &k2, dt / 2.0));
        let k4 = fc.eval(&add_scaled(&x, &k3, dt));
        for i in 0..4 {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if started_zero[i] && x[i].abs() < 1e-14 {
                x[i] = 0.0;
            }
        }
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        if norm2 > BLOWUP_NORM * BLOWUP_NORM {
            return Err(Error::Blowup((step + 1) as f64 * dt));
        }
        states.push(x);
    }
    Ok(Trajectory { dt, states })
}

fn add_scaled(x: &[f64; 4], k: &[f64; 4], h: f64) -> [f64; 4] {
    [
        x[0] + h * k[0],
        x[1] + h * k[1],
        x[2] + h * k[2],
        x[3] + h * k[3],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::b2b2::fixtures as b2fix;
    use crate::b2b2::{reference_field, validate_b2};
    use crate::b3b3::fixtures as b3fix;
    use crate::network::Assumptions;
    use approx::assert_relative_eq;

    fn p0_model() -> Model {
        Model::B3(b3fix::validated(&b3fix::p0(), Assumptions::A1))
    }

    fn p1_model() -> Model {
        Model::B3(b3fix::validated(&b3fix::p1(), Assumptions::A1))
    }

    #[test]
    fn apply_ht2_example() {
        // In-domain application of the xi3 return map at H2^out,3:
        // (x, y) -> (x^1.35, y x^1.3).
        let m = p0_model();
        let pt = SectionPoint::reduced(SectionId::H2Out3, 0.01, 1e-6);
        match apply_map(&m, MapId::Ht2, &pt).unwrap() {
            MapOutcome::Next(q) => {
                assert_relative_eq!(q.x, 0.01f64.powf(1.35), max_relative = 1e-12);
                assert_relative_eq!(q.y, 1e-6 * 0.01f64.powf(1.3), max_relative = 1e-12);
            }
            other => panic!("expected in-domain application, got {other:?}"),
        }
    }

    #[test]
    fn phi123_escapes_outside_domain() {
        let m = p0_model();
        // y >= x^(e24/e23) = x^0.5 violates the transition inequality.
        let pt = SectionPoint::reduced(SectionId::H1Out2, 1e-4, 0.5);
        match apply_map(&m, MapId::Phi123, &pt).unwrap() {
            MapOutcome::Escaped { violated } => assert!(violated.contains("y < x^0.5")),
            other => panic!("expected escape, got {other:?}"),
        }
    }

    #[test]
    fn unknown_map_for_wrong_network() {
        let m = p0_model();
        let pt = SectionPoint::reduced(SectionId::Hb2, 0.1, 0.1);
        assert!(matches!(
            apply_map(&m, MapId::G3b, &pt),
            Err(Error::UnknownMap(_, _))
        ));
        // Right network, wrong source section.
        let pt = SectionPoint::reduced(SectionId::H2Out3, 0.1, 0.01);
        assert!(matches!(
            apply_map(&m, MapId::Phi123, &pt),
            Err(Error::UnknownMap(_, _))
        ));
    }

    #[test]
    fn underflow_is_reported() {
        let m = p0_model();
        let pt = SectionPoint::reduced(SectionId::H1Out2, 1e-301, 1e-305);
        assert!(matches!(
            apply_map(&m, MapId::Ht1, &pt),
            Ok(MapOutcome::Underflow)
        ));
    }

    /// Return maps must equal the composition of their one-pass maps.
    #[test]
    fn return_maps_match_compositions() {
        let cases: [(Model, MapId, &[MapId]); 5] = [
            (
                p0_model(),
                MapId::Ht2,
                &[MapId::Phi231, MapId::Phi312, MapId::Phi123],
            ),
            (
                p0_model(),
                MapId::Ht3,
                &[MapId::Phi312, MapId::Phi123, MapId::Phi231],
            ),
            (
                p1_model(),
                MapId::Ht1,
                &[MapId::Phi123, MapId::Phi231, MapId::Phi312],
            ),
            (
                p0_model(),
                MapId::H2,
                &[MapId::Phi241, MapId::Phi412, MapId::Phi124],
            ),
            (
                p0_model(),
                MapId::H1,
                &[MapId::Phi124, MapId::Phi241, MapId::Phi412],
            ),
        ];
        for (model, ret, path) in cases {
            let src = map_spec(&model, ret).unwrap().source;
            let mut state = 0x9e3779b97f4a7c15u64;
            let mut rnd = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                ((state >> 11) as f64 / (1u64 << 53) as f64).max(1e-9)
            };
            let mut checked = 0;
            for _attempt in 0..200_000 {
                if checked >= 1_000 {
                    break;
                }
                let u = 10f64.powf(-1.0 - 4.0 * rnd());
                let w = u.powf(3.0 + 2.0 * rnd()) * rnd();
                for (x, y) in [(u, w), (w, u)] {
                    let start = SectionPoint::reduced(src, x, y);
                    let direct = match apply_map(&model, ret, &start).unwrap() {
                        MapOutcome::Next(p) => p,
                        _ => continue,
                    };
                    let mut cur = start;
                    let mut ok = true;
                    for &leg in path {
                        match apply_map(&model, leg, &cur).unwrap() {
                            MapOutcome::Next(p) => cur = p,
                            _ => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if !ok {
                        continue;
                    }
                    assert_eq!(cur.section, direct.section);
                    assert_relative_eq!(cur.x, direct.x, max_relative = 1e-9);
                    assert_relative_eq!(cur.y, direct.y, max_relative = 1e-9);
                    checked += 1;
                }
            }
            assert!(
                checked >= 1_000,
                "only {checked} in-domain samples for {ret:?}"
            );
        }
    }

    #[test]
    fn b2_return_maps_match_compositions() {
        let v = validate_b2(&b2fix::q0(), Assumptions::A1).unwrap();
        let model = Model::B2(v);
        let cases: [(MapId, [MapId; 2]); 4] = [
            (MapId::G3a, [MapId::PhiA3, MapId::PhiB3]),
            (MapId::G3b, [MapId::PhiB3, MapId::PhiA3]),
            (MapId::G4a, [MapId::PhiA4, MapId::PhiB4]),
            (MapId::G4b, [MapId::PhiB4, MapId::PhiA4]),
        ];
        for (ret, path) in cases {
            let src = map_spec(&model, ret).unwrap().source;
            let mut state = 77u64;
            let mut rnd = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                ((state >> 11) as f64 / (1u64 << 53) as f64).max(1e-9)
            };
            let mut checked = 0;
            for _attempt in 0..200_000 {
                if checked >= 1_000 {
                    break;
                }
                let u = 10f64.powf(-1.0 - 4.0 * rnd());
                let w = u.powf(4.0 + 2.0 * rnd()) * rnd();
                // Either coordinate may drive, depending on the map.
                for (x, y) in [(u, w), (w, u)] {
                    let start = SectionPoint::reduced(src, x, y);
                    let direct = match apply_map(&model, ret, &start).unwrap() {
                        MapOutcome::Next(p) => p,
                        _ => continue,
                    };
                    let mut cur = start;
                    let mut ok = true;
                    for leg in path {
                        match apply_map(&model, leg, &cur).unwrap() {
                            MapOutcome::Next(p) => cur = p,
                            _ => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if !ok {
                        continue;
                    }
                    assert_relative_eq!(cur.x, direct.x, max_relative = 1e-9);
                    assert_relative_eq!(cur.y, direct.y, max_relative = 1e-9);
                    checked += 1;
                }
            }
            assert!(
                checked >= 1_000,
                "only {checked} in-domain samples for {ret:?}"
            );
        }
    }

    #[test]
    fn follow_p0_deep_inside_attracts_to_xi3() {
        let m = p0_model();
        let start = SectionPoint::reduced(SectionId::H1Out2, 1e-3, 1e-9);
        let it = follow(&m, &start, &FollowCaps::default());
        assert_eq!(
            it.outcome,
            Outcome::Attracted {
                cycle: CycleTag::Cycle3
            }
        );
        // Driving coordinate contracts monotonically on revisits.
        let revisits: Vec<f64> = it
            .points
            .iter()
            .filter(|p| p.section == SectionId::H1Out2)
            .map(|p| p.x)
            .collect();
        assert!(revisits.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn follow_p0_escape_band_leaves_at_step_zero() {
        let m = p0_model();
        // Between the two domains: y just above 0.95 x^0.5, x above y^2 side.
        let x = 1e-4f64;
        let y = 0.97 * x.powf(0.5);
        let it = follow(
            &m,
            &SectionPoint::reduced(SectionId::H1Out2, x, y),
            &FollowCaps::default(),
        );
        match it.outcome {
            Outcome::Escaped { loops, .. } => assert_eq!(loops, 0),
            other => panic!("expected immediate escape, got {other:?}"),
        }
    }

    #[test]
    fn follow_p1_first_preimage_escapes_after_one_loop() {
        let m = p1_model();
        // Inside E1 = ht1^{-1}(E0): exponents (1.15625, 0.875).
        let x = 1e-3f64;
        let y = x.powf(1.0);
        let it = follow(
            &m,
            &SectionPoint::reduced(SectionId::H1Out2, x, y),
            &FollowCaps::default(),
        );
        match it.outcome {
            Outcome::Escaped { loops, .. } => assert_eq!(loops, 1),
            other => panic!("expected escape after one loop, got {other:?}"),
        }
    }

    #[test]
    fn mc_estimate_is_deterministic_and_sane() {
        let m = p0_model();
        let opts = McOptions {
            eps_grid: vec![3e-2, 1e-2, 3e-3],
            samples: 50_000,
            seed: 42,
            caps: FollowCaps::default(),
        };
        let a = estimate_sigma_mc(
            &m,
            Conn::B3(B3Connection::X1toX2),
            Level::Cycle(CycleTag::Cycle3),
            &opts,
        )
        .unwrap();
        let b = estimate_sigma_mc(
            &m,
            Conn::B3(B3Connection::X1toX2),
            Level::Cycle(CycleTag::Cycle3),
            &opts,
        )
        .unwrap();
        assert_eq!(a, b, "same seed must reproduce bit-identical estimates");
        let s = a.sigma.finite().expect("finite estimate");
        assert!((s - 1.0).abs() < 0.3, "sigma_hat = {s}");
    }

    #[test]
    fn rk4_equivariance_and_blowup() {
        let fc = reference_field();
        let x0 = [0.5, 0.3, 0.2, 0.1];
        let t = integrate_rk4(&fc, x0, 1e-3, 1.0).unwrap();
        let flipped0 = [0.5, -0.3, 0.2, 0.1];
        let tf = integrate_rk4(&fc, flipped0, 1e-3, 1.0).unwrap();
        for (a, b) in t.states.iter().zip(&tf.states) {
            assert_relative_eq!(a[0], b[0], max_relative = 1e-12, epsilon = 1e-12);
            assert_relative_eq!(a[1], -b[1], max_relative = 1e-12, epsilon = 1e-12);
            assert_relative_eq!(a[2], b[2], max_relative = 1e-12, epsilon = 1e-12);
        }

        // A strongly expanding linear field blows up past the norm bound.
        let mut exploding = reference_field();
        exploding.a1 = 50.0;
        exploding.c1 = -1e-12;
        let r = integrate_rk4(&exploding, [10.0, 0.0, 0.0, 0.0], 1e-2, 100.0);
        assert!(matches!(r, Err(Error::Blowup(_))));
    }

    #[test]
    fn rk4_preserves_invariant_axis() {
        let fc = reference_field();
        // Start on the x1-axis near xi_b: stays on the axis and slides to it.
        let t = integrate_rk4(&fc, [1.6, 0.0, 0.0, 0.0], 1e-3, 30.0).unwrap();
        let last = t.states.last().unwrap();
        assert_eq!(last[1], 0.0);
        assert_eq!(last[2], 0.0);
        assert_eq!(last[3], 0.0);
        assert_relative_eq!(last[0], 2.0, max_relative = 1e-6);
    }
}
