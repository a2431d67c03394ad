//! Eigenvalue data of the two supported networks, and the standing
//! assumptions under which the index formulas hold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::is_degenerate;

/// Linearization rates at one node, relative to a fixed cycle through it.
///
/// `r`, `c`, `e` are stored positive; the actual eigenvalues are
/// `-r` (radial), `-c` (contracting), `+e` (expanding) and `t` (transverse,
/// either sign). All four magnitudes must be distinct (simple cycle).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeEigenvalues {
    pub r: f64,
    pub c: f64,
    pub e: f64,
    pub t: f64,
}

impl NodeEigenvalues {
    pub fn new(r: f64, c: f64, e: f64, t: f64) -> Result<Self> {
        for (name, v) in [("r", r), ("c", c), ("e", e)] {
            if !(v > 0.0) {
                return Err(Error::PositivityViolation(name, v));
            }
        }
        if t == 0.0 {
            return Err(Error::NonGeneric("t", t));
        }
        let mags = [r, c, e, t.abs()];
        for i in 0..4 {
            for j in (i + 1)..4 {
                if is_degenerate(mags[i] - mags[j], mags[i]) {
                    return Err(Error::NonGeneric(
                        "eigenvalue magnitude gap",
                        mags[i] - mags[j],
                    ));
                }
            }
        }
        Ok(Self { r, c, e, t })
    }
}

/// Eigenvalue data of the four-node network with two three-node cycles
/// sharing the connection `[xi_1 -> xi_2]`.
///
/// At `xi_i` (`i != 2`) the rates are `-c_ij` (contracting), `-c_ik`
/// (transverse), `-r_i` (radial), `e_il` (expanding), read from the cycle
/// `[xi_i -> xi_l -> xi_j -> xi_i]`. At `xi_2`: `-c_21`, `-r_2`, and the two
/// expanding rates `e_23`, `e_24`, each transverse for the opposite cycle.
/// All entries are positive except `c34` and `c43`, which may take either
/// sign (a negative value is a positive transverse eigenvalue at `xi_3`
/// resp. `xi_4`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct B3B3Spec {
    pub e12: f64,
    pub e23: f64,
    pub e24: f64,
    pub e31: f64,
    pub e41: f64,
    pub c13: f64,
    pub c14: f64,
    pub c21: f64,
    pub c32: f64,
    pub c42: f64,
    pub c34: f64,
    pub c43: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
}

impl B3B3Spec {
    /// Strictly positive rates; `c34`/`c43` are exempt.
    pub fn check_positivity(&self) -> Result<()> {
        let named: [(&'static str, f64); 14] = [
            ("e12", self.e12),
            ("e23", self.e23),
            ("e24", self.e24),
            ("e31", self.e31),
            ("e41", self.e41),
            ("c13", self.c13),
            ("c14", self.c14),
            ("c21", self.c21),
            ("c32", self.c32),
            ("c42", self.c42),
            ("r1", self.r1),
            ("r2", self.r2),
            ("r3", self.r3),
            ("r4", self.r4),
        ];
        for (name, v) in named {
            if !(v > 0.0) {
                return Err(Error::PositivityViolation(name, v));
            }
        }
        Ok(())
    }
}

/// Eigenvalue data of the two-node network: cycles `C3` (planes `P12`,
/// `P13`) and `C4` (planes `P12`, `P14`) sharing `[xi_a -> xi_b]`.
/// All rates positive; `e_b3 > e_b4` without loss of generality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct B2B2Spec {
    pub ea2: f64,
    pub eb3: f64,
    pub eb4: f64,
    pub ca3: f64,
    pub ca4: f64,
    pub cb2: f64,
    pub ra: f64,
    pub rb: f64,
}

impl B2B2Spec {
    pub fn check_positivity(&self) -> Result<()> {
        let named: [(&'static str, f64); 8] = [
            ("ea2", self.ea2),
            ("eb3", self.eb3),
            ("eb4", self.eb4),
            ("ca3", self.ca3),
            ("ca4", self.ca4),
            ("cb2", self.cb2),
            ("ra", self.ra),
            ("rb", self.rb),
        ];
        for (name, v) in named {
            if !(v > 0.0) {
                return Err(Error::PositivityViolation(name, v));
            }
        }
        Ok(())
    }
}

/// Which standing assumptions a validation run enforces.
///
/// For the `B3B3` network `a1` is the return-map contraction condition
/// (`rho, rho_t > 1` and `0 < e24/e23 < 1`) and `a2` the
/// positive-transverse-rate regime (`tau, tau_t, delta, delta_t > 0`, plus
/// `|c34| < e31` when `c34 < 0` and `|c43| < e41` when `c43 < 0`).
/// For the `B2B2` network only `a1` applies (`rho, rho_t > 1`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assumptions {
    pub a1: bool,
    pub a2: bool,
}

impl Assumptions {
    pub const NONE: Assumptions = Assumptions {
        a1: false,
        a2: false,
    };
    pub const A1: Assumptions = Assumptions {
        a1: true,
        a2: false,
    };
    pub const A1_A2: Assumptions = Assumptions { a1: true, a2: true };

    pub fn from_names(names: &[String]) -> Result<Self> {
        let mut out = Assumptions::default();
        for n in names {
            match n.as_str() {
                "A1" | "a1" => out.a1 = true,
                "A2" | "a2" => out.a2 = true,
                other => return Err(Error::Parse(format!("unknown assumption flag: {other}"))),
            }
        }
        Ok(out)
    }
}

/// Which first-term sign convention the loop exponents `nu`, `nu_t` use.
///
/// `Composed` is the value obtained by composing the local maps around a
/// cycle (first term negative); `Display` keeps the first term positive.
/// Only `Composed` satisfies the escape-sequence increment identity
/// `nu_t = (rho_t - 1) e24/e23 + (c21/e23) delta_t`; the alternative is kept
/// for side-by-side comparison runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NuConvention {
    #[default]
    Composed,
    Display,
}

/// Sign bands of the cusp exponents `sigma` / `sigma_t`, fixing which branch
/// of the index function applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaBand {
    Negative,
    Unit,
    AboveOne,
}

impl SigmaBand {
    pub fn of(v: f64) -> SigmaBand {
        if v < 0.0 {
            SigmaBand::Negative
        } else if v < 1.0 {
            SigmaBand::Unit
        } else {
            SigmaBand::AboveOne
        }
    }
}

/// Sign/band tags a validated spec carries into the dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeTags {
    pub c34_negative: bool,
    pub c43_negative: bool,
    pub delta_positive: bool,
    pub delta_t_positive: bool,
    pub sigma_band: SigmaBand,
    pub sigma_t_band: SigmaBand,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_eigenvalues_reject_double_magnitude() {
        assert!(NodeEigenvalues::new(2.0, 1.0, 1.0, 0.5).is_err());
        assert!(NodeEigenvalues::new(2.0, 1.5, 1.0, -0.5).is_ok());
        assert!(NodeEigenvalues::new(2.0, 1.5, 1.0, 1.5).is_err());
    }

    #[test]
    fn node_eigenvalues_positivity() {
        assert!(matches!(
            NodeEigenvalues::new(1.0, 0.0, 1.0, 0.5),
            Err(Error::PositivityViolation("c", _))
        ));
    }
}
