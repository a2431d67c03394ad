//! Single-cycle index machinery: the piecewise index function, the per-node
//! `(a, b)` ratios and the closed-form index tables for two- and three-node
//! cycles.

use crate::error::{Error, Result};
use crate::extreal::{ExtReal, Finite, NegInf, PosInf};
use crate::is_degenerate;
use crate::network::NodeEigenvalues;

/// Contraction/expansion ratios of one node: `a = c/e > 0` and
/// `b = -t/e != 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleNodeParams {
    pub a: f64,
    pub b: f64,
}

impl CycleNodeParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::PositivityViolation("a", a));
        }
        if is_degenerate(b, 1.0) {
            return Err(Error::NonGeneric("b", b));
        }
        Ok(Self { a, b })
    }
}

/// `(a, b) = (c/e, -t/e)` of a node's linearization.
pub fn node_ab(n: &NodeEigenvalues) -> CycleNodeParams {
    CycleNodeParams {
        a: n.c / n.e,
        b: -n.t / n.e,
    }
}

/// The index function at unit second argument:
/// `+inf` for `alpha >= 0`, `-1/alpha - 1` on `(-1, 0)`, `alpha + 1` below
/// `-1`. The value 0 (argument exactly `-1`) is excluded as non-generic.
pub fn f_index(alpha: f64) -> Result<ExtReal> {
    if is_degenerate(alpha + 1.0, alpha) {
        return Err(Error::NonGeneric("f_index argument + 1", alpha + 1.0));
    }
    Ok(if alpha >= 0.0 {
        PosInf
    } else if alpha > -1.0 {
        Finite(-1.0 / alpha - 1.0)
    } else {
        Finite(alpha + 1.0)
    })
}

/// Indices of one cycle together with the applied cyclic rotation and the
/// case-tree branch that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleIndices<const N: usize> {
    pub sigma: [ExtReal; N],
    /// `rotated[i] = input[(i + rotation) % N]` was fed to the case tree.
    pub rotation: usize,
    pub case: &'static str,
}

fn guard(name: &'static str, v: f64, scale: f64) -> Result<f64> {
    if is_degenerate(v, scale) {
        Err(Error::NonGeneric(name, v))
    } else {
        Ok(v)
    }
}

fn check_generic_b<const N: usize>(p: &[CycleNodeParams; N]) -> Result<()> {
    for q in p {
        if is_degenerate(q.b, 1.0) {
            return Err(Error::NonGeneric("b", q.b));
        }
        if !(q.a > 0.0) {
            return Err(Error::PositivityViolation("a", q.a));
        }
    }
    Ok(())
}

/// Stability indices of a two-node cycle, in input order.
///
/// Case tree on the transverse signs `(b1, b2)`:
/// both negative -> all `-inf`; both positive -> all `-inf` if `a1 a2 < 1`,
/// all `+inf` if `a1 a2 > 1`; mixed (rotated to `b1 < 0 < b2`) -> all `-inf`
/// if `a1 a2 < 1` or `b1 a2 + b2 < 0`, otherwise
/// `sigma_1 = f_index(b1)`, `sigma_2 = +inf`.
pub fn b2_cycle_indices(p: [CycleNodeParams; 2]) -> Result<CycleIndices<2>> {
    check_generic_b(&p)?;
    let rotation = match (p[0].b < 0.0, p[1].b < 0.0) {
        (true, false) | (true, true) | (false, false) => 0,
        (false, true) => 1,
    };
    let q = [p[rotation % 2], p[(1 + rotation) % 2]];
    let (sigma, case) = match (q[0].b < 0.0, q[1].b < 0.0) {
        (true, true) => ([NegInf, NegInf], "case i"),
        (false, false) => {
            let prod = guard("a1*a2 - 1", q[0].a * q[1].a - 1.0, q[0].a * q[1].a)? + 1.0;
            if prod < 1.0 {
                ([NegInf, NegInf], "case ii(a)")
            } else {
                ([PosInf, PosInf], "case ii(b)")
            }
        }
        (true, false) => {
            let prod = guard("a1*a2 - 1", q[0].a * q[1].a - 1.0, q[0].a * q[1].a)? + 1.0;
            let comb = guard("b1*a2 + b2", q[0].b * q[1].a + q[1].b, q[1].b.abs())?;
            if prod < 1.0 || comb < 0.0 {
                ([NegInf, NegInf], "case iii(a)")
            } else {
                ([f_index(q[0].b)?, PosInf], "case iii(b)")
            }
        }
        (false, true) => unreachable!("rotated to canonical order"),
    };
    let mut out = [NegInf; 2];
    for (i, s) in sigma.into_iter().enumerate() {
        out[(i + rotation) % 2] = s;
    }
    Ok(CycleIndices {
        sigma: out,
        rotation,
        case,
    })
}

/// Stability indices of a three-node cycle, in input order.
///
/// The input is rotated so the transverse signs match one of the canonical
/// patterns `(-,-,-)`, `(+,+,+)`, `(-,+,+)`, `(-,-,+)`. In the last case the
/// third index is always `+inf`: positivity of `b2 a1 a3 + b1 a3 + b3`
/// forces `b1 a3 + b3 > 0`, so the nominal `f_index(b3 + b1 a3)` collapses.
pub fn b3_cycle_indices(p: [CycleNodeParams; 3]) -> Result<CycleIndices<3>> {
    check_generic_b(&p)?;
    let neg: Vec<usize> = (0..3).filter(|&i| p[i].b < 0.0).collect();
    let rotation = match neg.len() {
        0 | 3 => 0,
        1 => neg[0],
        2 => {
            let pos = (0..3).find(|i| !neg.contains(i)).unwrap();
            (pos + 1) % 3
        }
        _ => unreachable!(),
    };
    let q = [p[rotation], p[(1 + rotation) % 3], p[(2 + rotation) % 3]];
    let rho = q[0].a * q[1].a * q[2].a;
    let (sigma, case): ([ExtReal; 3], &'static str) = match neg.len() {
        3 => ([NegInf, NegInf, NegInf], "case i"),
        0 => {
            guard("a1*a2*a3 - 1", rho - 1.0, rho)?;
            if rho < 1.0 {
                ([NegInf, NegInf, NegInf], "case ii(a)")
            } else {
                ([PosInf, PosInf, PosInf], "case ii(b)")
            }
        }
        1 => {
            guard("a1*a2*a3 - 1", rho - 1.0, rho)?;
            let d = guard(
                "b1*a2*a3 + b3*a2 + b2",
                q[0].b * q[1].a * q[2].a + q[2].b * q[1].a + q[1].b,
                q[1].b.abs() + q[2].b.abs(),
            )?;
            if rho < 1.0 || d < 0.0 {
                ([NegInf, NegInf, NegInf], "case iii(a)")
            } else {
                (
                    [f_index(q[0].b)?, PosInf, f_index(q[2].b + q[0].b * q[2].a)?],
                    "case iii(b)",
                )
            }
        }
        2 => {
            guard("a1*a2*a3 - 1", rho - 1.0, rho)?;
            let d = guard(
                "b1*a2*a3 + b3*a2 + b2",
                q[0].b * q[1].a * q[2].a + q[2].b * q[1].a + q[1].b,
                q[1].b.abs() + q[2].b.abs(),
            )?;
            let e = guard(
                "b2*a1*a3 + b1*a3 + b3",
                q[1].b * q[0].a * q[2].a + q[0].b * q[2].a + q[2].b,
                q[0].b.abs() + q[2].b.abs(),
            )?;
            if rho < 1.0 || d < 0.0 || e < 0.0 {
                ([NegInf, NegInf, NegInf], "case iv(a)")
            } else {
                let s1 = f_index(q[0].b)?.min(f_index(q[0].b + q[1].b * q[0].a)?);
                ([s1, f_index(q[1].b)?, PosInf], "case iv(b)")
            }
        }
        _ => unreachable!(),
    };
    let mut out = [NegInf; 3];
    for (i, s) in sigma.into_iter().enumerate() {
        out[(i + rotation) % 3] = s;
    }
    Ok(CycleIndices {
        sigma: out,
        rotation,
        case,
    })
}
