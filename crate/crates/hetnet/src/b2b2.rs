//! The two-node network: cycles `C3` (planes `P12`, `P13`) and `C4` (planes
//! `P12`, `P14`) through the equilibria `xi_a`, `xi_b`, sharing
//! `[xi_a -> xi_b]`. Includes the concrete sign-change-equivariant cubic
//! vector field realizing the network for the end-to-end ODE check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index_kernel::{b2_cycle_indices, CycleNodeParams};
use crate::is_degenerate;
use crate::network::{Assumptions, B2B2Spec};
use crate::wedge::{return_map_chain, ExpWedge};

/// Loop and splitting exponents of the two cycles; tilded (`_t`) values
/// belong to `C3`. `delta * delta_t < 0` holds identically:
/// `delta_t = -delta * eb4/eb3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct B2DerivedQuantities {
    pub rho: f64,
    pub delta: f64,
    pub rho_t: f64,
    pub delta_t: f64,
}

pub fn derived_b2(s: &B2B2Spec) -> B2DerivedQuantities {
    B2DerivedQuantities {
        rho: s.ca4 * s.cb2 / (s.ea2 * s.eb4),
        delta: s.ca3 / s.ea2 - s.eb3 * s.ca4 / (s.ea2 * s.eb4),
        rho_t: s.ca3 * s.cb2 / (s.ea2 * s.eb3),
        delta_t: s.ca4 / s.ea2 - s.eb4 * s.ca3 / (s.ea2 * s.eb3),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidatedB2 {
    pub spec: B2B2Spec,
    pub assumptions: Assumptions,
    pub derived: B2DerivedQuantities,
}

/// Positivity, the `eb3 > eb4` normalization, genericity of the splitting
/// exponents, and (when flagged) the contraction condition `rho, rho_t > 1`.
pub fn validate_b2(spec: &B2B2Spec, assumptions: Assumptions) -> Result<ValidatedB2> {
    spec.check_positivity()?;
    if !(spec.eb3 > spec.eb4) {
        return Err(Error::AssumptionViolation(format!(
            "eb3 = {} must exceed eb4 = {}",
            spec.eb3, spec.eb4
        )));
    }
    if is_degenerate(spec.eb3 - spec.eb4, spec.eb3) {
        return Err(Error::NonGeneric("eb3 - eb4", spec.eb3 - spec.eb4));
    }
    let d = derived_b2(spec);
    if is_degenerate(d.delta, d.rho + 1.0) {
        return Err(Error::NonGeneric("delta", d.delta));
    }
    if is_degenerate(d.delta_t, d.rho_t + 1.0) {
        return Err(Error::NonGeneric("delta_t", d.delta_t));
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
    }
    Ok(ValidatedB2 {
        spec: *spec,
        assumptions,
        derived: d,
    })
}

/// `(a, b)` ratios of cycle `C3` in node order `(xi_b, xi_a)`.
pub fn c3_cycle_params(s: &B2B2Spec) -> [CycleNodeParams; 2] {
    [
        CycleNodeParams {
            a: s.cb2 / s.eb3,
            b: -s.eb4 / s.eb3,
        },
        CycleNodeParams {
            a: s.ca3 / s.ea2,
            b: s.ca4 / s.ea2,
        },
    ]
}

/// `(a, b)` ratios of cycle `C4` in node order `(xi_b, xi_a)`.
pub fn c4_cycle_params(s: &B2B2Spec) -> [CycleNodeParams; 2] {
    [
        CycleNodeParams {
            a: s.cb2 / s.eb4,
            b: -s.eb3 / s.eb4,
        },
        CycleNodeParams {
            a: s.ca4 / s.ea2,
            b: s.ca3 / s.ea2,
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum B2Connection {
    AtoB,
    BtoA3,
    BtoA4,
}

pub const B2_CONNECTIONS: [B2Connection; 3] =
    [B2Connection::AtoB, B2Connection::BtoA3, B2Connection::BtoA4];

impl B2Connection {
    pub fn label(&self) -> &'static str {
        match self {
            B2Connection::AtoB => "a->b",
            B2Connection::BtoA3 => "b->a (P13)",
            B2Connection::BtoA4 => "b->a (P14)",
        }
    }
}

/// All indices of the two-node network: four per-cycle values (the common
/// connection carries one per cycle) and three network values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct B2Indices {
    pub c_ab3: crate::ExtReal,
    pub c_ba3: crate::ExtReal,
    pub c_ab4: crate::ExtReal,
    pub c_ba4: crate::ExtReal,
    pub c3_case: &'static str,
    pub c4_case: &'static str,
    pub n_ab: crate::b3b3::NIndexEntry,
    pub n_ba3: crate::b3b3::NIndexEntry,
    pub n_ba4: crate::b3b3::NIndexEntry,
}

/// Per-cycle indices from the two-node case table and network indices from
/// the escape-wedge families of the return maps
/// `g3b(x, y) = (x^rho_t, y x^((eb4/eb3)(rho - 1)))` and
/// `g4b(y, x) = (y^rho, x y^((eb3/eb4)(rho_t - 1)))` at the common section.
pub fn b2_network_indices(v: &ValidatedB2, n_cap: usize) -> Result<B2Indices> {
    if !v.assumptions.a1 {
        return Err(Error::AssumptionViolation(
            "network indices need the contraction condition rho, rho_t > 1 (flag A1)".into(),
        ));
    }
    let s = &v.spec;
    let d = &v.derived;
    let c3 = b2_cycle_indices(c3_cycle_params(s))?;
    let c4 = b2_cycle_indices(c4_cycle_params(s))?;

    // Escape family at the common section H_b2: the band between the two
    // transition-map domains, plus whichever return-map chain survives.
    let ratio = s.eb4 / s.eb3;
    let e0 = ExpWedge {
        lo: ratio,
        hi: ratio,
    };
    let mut family = vec![(e0, 0usize)];
    let kappa3 = ratio * (d.rho - 1.0);
    for (n, w) in return_map_chain(e0, d.rho_t, kappa3, ratio, n_cap)?
        .into_iter()
        .enumerate()
    {
        family.push((w, n + 1));
    }
    let e0_swapped = ExpWedge {
        lo: 1.0 / ratio,
        hi: 1.0 / ratio,
    };
    let kappa4 = (1.0 / ratio) * (d.rho_t - 1.0);
    for (n, w) in return_map_chain(e0_swapped, d.rho, kappa4, 1.0 / ratio, n_cap)?
        .into_iter()
        .enumerate()
    {
        family.push((
            ExpWedge {
                lo: 1.0 / w.hi,
                hi: 1.0 / w.lo,
            },
            n + 1,
        ));
    }

    let p = s.ca3 / s.ea2;
    let q = s.ca4 / s.ea2;
    let pulled = |conn: B2Connection| -> Vec<(ExpWedge, usize)> {
        family
            .iter()
            .filter_map(|(w, n)| {
                match conn {
                    B2Connection::AtoB => Some(*w),
                    B2Connection::BtoA3 => w.pull_triangular(p, q),
                    B2Connection::BtoA4 => w.pull_anti(p, q),
                }
                .map(|pw| (pw, *n))
            })
            .collect()
    };

    Ok(B2Indices {
        c_ab3: c3.sigma[0],
        c_ba3: c3.sigma[1],
        c_ab4: c4.sigma[0],
        c_ba4: c4.sigma[1],
        c3_case: c3.case,
        c4_case: c4.case,
        n_ab: crate::b3b3::index_entry(&pulled(B2Connection::AtoB))?,
        n_ba3: crate::b3b3::index_entry(&pulled(B2Connection::BtoA3))?,
        n_ba4: crate::b3b3::index_entry(&pulled(B2Connection::BtoA4))?,
    })
}

// ---------------------------------------------------------------------------
// The concrete vector field.
// ---------------------------------------------------------------------------

/// Coefficients of the planar restriction
/// `x1' = a1 x1 + b1 (x1^2 + x2^2) + c1 x1^3`,
/// `x2' = a2 x2 + b2 (x1^2 + x2^2) x2 + d1 x1 x2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarFieldCoeffs {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub a2: f64,
    pub b2: f64,
    pub d1: f64,
}

impl PlanarFieldCoeffs {
    pub fn new(a1: f64, b1: f64, c1: f64, a2: f64, b2: f64, d1: f64) -> Result<Self> {
        if !(a2 * b2 > 0.0) {
            return Err(Error::AssumptionViolation(format!(
                "a2*b2 = {} must be positive (no equilibria on the x2-axis)",
                a2 * b2
            )));
        }
        if !(c1 < 0.0) {
            return Err(Error::AssumptionViolation(format!(
                "c1 = {c1} must be negative"
            )));
        }
        Ok(Self {
            a1,
            b1,
            c1,
            a2,
            b2,
            d1,
        })
    }
}

/// The two axis equilibria: roots of `a1 + b1 x + c1 x^2` with
/// `xi_a < 0 < xi_b`.
pub fn planar_equilibria(a1: f64, b1: f64, c1: f64) -> Result<(f64, f64)> {
    let disc = b1 * b1 - 4.0 * a1 * c1;
    if !(disc > 0.0) {
        return Err(Error::NoSaddlePair(format!(
            "discriminant = {disc} is not positive"
        )));
    }
    let sq = disc.sqrt();
    let r1 = (-b1 + sq) / (2.0 * c1);
    let r2 = (-b1 - sq) / (2.0 * c1);
    let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
    if !(lo < 0.0 && hi > 0.0) {
        return Err(Error::NoSaddlePair(format!(
            "roots {lo}, {hi} are not of opposite sign"
        )));
    }
    Ok((lo, hi))
}

/// Coefficients of the full sign-change-equivariant field
///
/// ```text
/// x1' = a1 x1 + b1 x1^2 + c1 x1^3 + sum_j q_j x_j^2
/// xj' = xj (alpha_j + beta_j x1 + sum_k gamma_jk x_k^2),  j = 2, 3, 4
/// ```
///
/// with `j`-arrays indexed by coordinate `x_{j+2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldCoeffs {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub q: [f64; 3],
    pub alpha: [f64; 3],
    pub beta: [f64; 3],
    pub gamma: [[f64; 3]; 3],
}

/// One monomial `coeff * x1^p0 x2^p1 x3^p2 x4^p3` of one component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub component: usize,
    pub coeff: f64,
    pub powers: [u32; 4],
}

impl FieldCoeffs {
    pub fn eval(&self, x: &[f64; 4]) -> [f64; 4] {
        let sq = [x[1] * x[1], x[2] * x[2], x[3] * x[3]];
        let mut out = [0.0; 4];
        out[0] = self.a1 * x[0]
            + self.b1 * x[0] * x[0]
            + self.c1 * x[0] * x[0] * x[0]
            + self.q[0] * sq[0]
            + self.q[1] * sq[1]
            + self.q[2] * sq[2];
        for j in 0..3 {
            let mut rate = self.alpha[j] + self.beta[j] * x[0];
            for k in 0..3 {
                rate += self.gamma[j][k] * sq[k];
            }
            out[j + 1] = x[j + 1] * rate;
        }
        out
    }

    /// Expands into explicit monomials (for the symmetry check and tests).
    pub fn monomials(&self) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut push = |component: usize, coeff: f64, powers: [u32; 4]| {
            if coeff != 0.0 {
                out.push(Monomial {
                    component,
                    coeff,
                    powers,
                });
            }
        };
        push(0, self.a1, [1, 0, 0, 0]);
        push(0, self.b1, [2, 0, 0, 0]);
        push(0, self.c1, [3, 0, 0, 0]);
        for j in 0..3 {
            let mut p = [0u32; 4];
            p[j + 1] = 2;
            push(0, self.q[j], p);
        }
        for j in 0..3 {
            let mut base = [0u32; 4];
            base[j + 1] = 1;
            push(j + 1, self.alpha[j], base);
            let mut with_x1 = base;
            with_x1[0] = 1;
            push(j + 1, self.beta[j], with_x1);
            for k in 0..3 {
                let mut cubic = base;
                cubic[k + 1] += 2;
                push(j + 1, self.gamma[j][k], cubic);
            }
        }
        out
    }
}

/// Equivariance under the three sign changes `x_s -> -x_s` (`s = 2, 3, 4`):
/// every monomial of the `x_s`-component must be odd in `x_s`, every other
/// component even in `x_s`.
pub fn check_equivariance(monomials: &[Monomial]) -> Result<()> {
    for m in monomials {
        for s in 1..4 {
            let odd = m.powers[s] % 2 == 1;
            let needs_odd = m.component == s;
            if odd != needs_odd {
                return Err(Error::EquivarianceViolation(format!(
                    "component {} monomial with powers {:?} is {} in x{}",
                    m.component + 1,
                    m.powers,
                    if odd { "odd" } else { "even" },
                    s + 1
                )));
            }
        }
    }
    Ok(())
}

/// Builds the field and runs the symmetry check on its monomials.
pub fn build_4d_field(fc: FieldCoeffs) -> Result<FieldCoeffs> {
    check_equivariance(&fc.monomials())?;
    Ok(fc)
}

/// Diagonal linearization rates at an axis equilibrium `(xi, 0, 0, 0)`:
/// the radial rate and the three transverse rates `alpha_j + beta_j xi`.
/// Off-axis Jacobian entries vanish by equivariance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisEigs {
    pub xi: f64,
    pub radial: f64,
    pub by_axis: [f64; 3],
}

pub fn jacobian_eigs(fc: &FieldCoeffs) -> Result<(AxisEigs, AxisEigs)> {
    let (xa, xb) = planar_equilibria(fc.a1, fc.b1, fc.c1)?;
    let eigs = |xi: f64| AxisEigs {
        xi,
        radial: fc.a1 + 2.0 * fc.b1 * xi + 3.0 * fc.c1 * xi * xi,
        by_axis: [
            fc.alpha[0] + fc.beta[0] * xi,
            fc.alpha[1] + fc.beta[1] * xi,
            fc.alpha[2] + fc.beta[2] * xi,
        ],
    };
    Ok((eigs(xa), eigs(xb)))
}

/// Reads the eigenvalue data off the field: `xi_a` must be a saddle with
/// unstable direction `x2`, `xi_b` a saddle with unstable `x3`, `x4`.
pub fn spec_from_field(fc: &FieldCoeffs) -> Result<B2B2Spec> {
    let (a, b) = jacobian_eigs(fc)?;
    let spec = B2B2Spec {
        ea2: a.by_axis[0],
        ca3: -a.by_axis[1],
        ca4: -a.by_axis[2],
        ra: -a.radial,
        cb2: -b.by_axis[0],
        eb3: b.by_axis[1],
        eb4: b.by_axis[2],
        rb: -b.radial,
    };
    spec.check_positivity().map_err(|e| {
        Error::AssumptionViolation(format!(
            "field equilibria carry the wrong saddle/sink types: {e}"
        ))
    })?;
    Ok(spec)
}

/// The pinned field whose equilibria carry the canonical two-node rates
/// (`ea2 = 1, ca3 = 1.5, ca4 = 1, cb2 = 1.5, eb3 = 2, eb4 = 1`), with
/// `xi_a = -1`, `xi_b = 2` and radial rates 1 and 2.
pub fn reference_field() -> FieldCoeffs {
    FieldCoeffs {
        a1: 2.0 / 3.0,
        b1: 1.0 / 3.0,
        c1: -1.0 / 3.0,
        q: [0.5, -1.0, -1.0],
        alpha: [1.0 / 6.0, -1.0 / 3.0, -1.0 / 3.0],
        beta: [-5.0 / 6.0, 7.0 / 6.0, 2.0 / 3.0],
        gamma: [[0.0; 3]; 3],
    }
}

/// Plain-text coefficient table: one `key value` pair per line, `#` starts
/// a comment. Keys: `a1 b1 c1 q2 q3 q4 alpha2.. beta2.. gamma22..gamma44`.
pub fn parse_field_fixture(text: &str) -> Result<FieldCoeffs> {
    let mut fc = FieldCoeffs {
        a1: f64::NAN,
        b1: f64::NAN,
        c1: f64::NAN,
        q: [f64::NAN; 3],
        alpha: [f64::NAN; 3],
        beta: [f64::NAN; 3],
        gamma: [[f64::NAN; 3]; 3],
    };
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let key = it.next().unwrap();
        let val: f64 = it
            .next()
            .ok_or_else(|| Error::Parse(format!("line {}: missing value", lineno + 1)))?
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad number", lineno + 1)))?;
        if it.next().is_some() {
            return Err(Error::Parse(format!(
                "line {}: trailing tokens",
                lineno + 1
            )));
        }
        let idx = |c: char| -> Result<usize> {
            c.to_digit(10)
                .filter(|d| (2..=4).contains(d))
                .map(|d| d as usize - 2)
                .ok_or_else(|| {
                    Error::Parse(format!("line {}: bad coordinate in {key}", lineno + 1))
                })
        };
        let chars: Vec<char> = key.chars().collect();
        match key {
            "a1" => fc.a1 = val,
            "b1" => fc.b1 = val,
            "c1" => fc.c1 = val,
            _ if key.starts_with('q') && chars.len() == 2 => fc.q[idx(chars[1])?] = val,
            _ if key.starts_with("alpha") && chars.len() == 6 => fc.alpha[idx(chars[5])?] = val,
            _ if key.starts_with("beta") && chars.len() == 5 => fc.beta[idx(chars[4])?] = val,
            _ if key.starts_with("gamma") && chars.len() == 7 => {
                fc.gamma[idx(chars[5])?][idx(chars[6])?] = val
            }
            other => {
                return Err(Error::Parse(format!(
                    "line {}: unknown key {other}",
                    lineno + 1
                )))
            }
        }
    }
    let all = fc
        .monomials()
        .iter()
        .map(|m| m.coeff)
        .chain([fc.a1, fc.b1, fc.c1])
        .all(|v| v.is_finite());
    let complete = all
        && fc.q.iter().all(|v| v.is_finite())
        && fc.alpha.iter().all(|v| v.is_finite())
        && fc.beta.iter().all(|v| v.is_finite())
        && fc.gamma.iter().flatten().all(|v| v.is_finite());
    if !complete {
        return Err(Error::Parse("field fixture is missing coefficients".into()));
    }
    Ok(fc)
}

pub fn render_field_fixture(fc: &FieldCoeffs) -> String {
    let mut s = String::new();
    s.push_str("# Equivariant cubic field coefficients\n");
    s.push_str("# x1' = a1 x1 + b1 x1^2 + c1 x1^3 + q2 x2^2 + q3 x3^2 + q4 x4^2\n");
    s.push_str(
        "# xj' = xj (alpha_j + beta_j x1 + gamma_j2 x2^2 + gamma_j3 x3^2 + gamma_j4 x4^2)\n",
    );
    s.push_str(&format!(
        "a1 {:.17}\nb1 {:.17}\nc1 {:.17}\n",
        fc.a1, fc.b1, fc.c1
    ));
    for j in 0..3 {
        s.push_str(&format!("q{} {:.17}\n", j + 2, fc.q[j]));
    }
    for j in 0..3 {
        s.push_str(&format!("alpha{} {:.17}\n", j + 2, fc.alpha[j]));
    }
    for j in 0..3 {
        s.push_str(&format!("beta{} {:.17}\n", j + 2, fc.beta[j]));
    }
    for j in 0..3 {
        for k in 0..3 {
            s.push_str(&format!("gamma{}{} {:.17}\n", j + 2, k + 2, fc.gamma[j][k]));
        }
    }
    s
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn q0() -> B2B2Spec {
        B2B2Spec {
            ea2: 1.0,
            ca3: 1.5,
            ca4: 1.0,
            eb3: 2.0,
            eb4: 1.0,
            cb2: 1.5,
            ra: 1.0,
            rb: 1.0,
        }
    }

    /// delta > 0 mirror of the canonical fixture.
    pub fn q_case_ii() -> B2B2Spec {
        B2B2Spec {
            ea2: 1.0,
            ca3: 3.0,
            ca4: 1.0,
            eb3: 2.0,
            eb4: 1.0,
            cb2: 1.5,
            ra: 1.0,
            rb: 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::extreal::{Finite, NegInf, PosInf};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn derived_q0() {
        let d = derived_b2(&q0());
        assert_relative_eq!(d.rho, 1.5, max_relative = 1e-12);
        assert_relative_eq!(d.rho_t, 1.125, max_relative = 1e-12);
        assert_relative_eq!(d.delta, -0.5, max_relative = 1e-12);
        assert_relative_eq!(d.delta_t, 0.25, max_relative = 1e-12);
    }

    #[test]
    fn indices_q0_case_i() {
        let v = validate_b2(&q0(), Assumptions::A1).unwrap();
        let r = b2_network_indices(&v, 10_000).unwrap();
        assert_eq!(r.c_ab3, Finite(1.0));
        assert_eq!(r.c_ba3, PosInf);
        assert_eq!(r.c_ab4, NegInf);
        assert_eq!(r.c_ba4, NegInf);
        assert_relative_eq!(r.n_ab.value.finite().unwrap(), 1.0, max_relative = 1e-12);
        assert_eq!(r.n_ba3.value, PosInf);
        assert_relative_eq!(r.n_ba4.value.finite().unwrap(), 0.25, max_relative = 1e-12);
    }

    #[test]
    fn indices_case_ii_mirror() {
        let v = validate_b2(&q_case_ii(), Assumptions::A1).unwrap();
        let r = b2_network_indices(&v, 10_000).unwrap();
        assert_eq!(r.c_ab3, NegInf);
        assert_eq!(r.c_ba3, NegInf);
        assert_eq!(r.c_ab4, Finite(-1.0));
        assert_eq!(r.c_ba4, PosInf);
        assert!(r.n_ab.value.is_positive() && r.n_ab.value.is_finite());
        assert_relative_eq!(
            r.n_ab.value.finite().unwrap(),
            1.0 / 0.875 - 1.0,
            max_relative = 1e-12
        );
        assert!(r.n_ba3.value.is_positive() && r.n_ba3.value.is_finite());
        assert_relative_eq!(r.n_ba3.value.finite().unwrap(), 0.625, max_relative = 1e-12);
        assert_eq!(r.n_ba4.value, PosInf);
    }

    #[test]
    fn q0_shifted_contracting_stays_case_i() {
        // ca3 = 1.0, ca4 = 1.5 gives delta = 1 - 3 = -2 < 0, delta_t = 1.
        let spec = B2B2Spec {
            ca3: 1.0,
            ca4: 1.5,
            ..q0()
        };
        let d = derived_b2(&spec);
        assert_relative_eq!(d.delta, -2.0, max_relative = 1e-12);
        assert_relative_eq!(d.delta_t, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn validate_rejects_swapped_expansion() {
        let spec = B2B2Spec {
            eb3: 1.0,
            eb4: 2.0,
            ..q0()
        };
        assert!(matches!(
            validate_b2(&spec, Assumptions::A1),
            Err(Error::AssumptionViolation(_))
        ));
    }

    proptest! {
        #[test]
        fn deltas_have_opposite_signs(
            ea2 in 0.3f64..3.0, ca3 in 0.3f64..3.0, ca4 in 0.3f64..3.0,
            cb2 in 0.3f64..3.0, eb4 in 0.3f64..2.0, gap in 0.1f64..2.0,
        ) {
            let spec = B2B2Spec { ea2, ca3, ca4, cb2, eb4, eb3: eb4 + gap, ra: 1.0, rb: 1.0 };
            let d = derived_b2(&spec);
            prop_assume!(d.delta.abs() > 1e-9);
            prop_assert!(d.delta * d.delta_t < 0.0);
            // Exact identity behind it.
            prop_assert!((d.delta_t + d.delta * spec.eb4 / spec.eb3).abs() < 1e-12);
        }
    }

    #[test]
    fn planar_equilibria_examples() {
        assert_eq!(planar_equilibria(1.0, 0.0, -1.0).unwrap(), (-1.0, 1.0));
        let (a, b) = planar_equilibria(2.0, 1.0, -1.0).unwrap();
        assert_relative_eq!(a, -1.0, max_relative = 1e-12);
        assert_relative_eq!(b, 2.0, max_relative = 1e-12);
        assert!(matches!(
            planar_equilibria(-1.0, 0.0, -1.0),
            Err(Error::NoSaddlePair(_))
        ));
    }

    #[test]
    fn planar_coeffs_invariants() {
        assert!(PlanarFieldCoeffs::new(1.0, 0.0, -1.0, 1.0, -1.0, 0.5).is_err());
        assert!(PlanarFieldCoeffs::new(1.0, 0.0, 1.0, 1.0, 1.0, 0.5).is_err());
        assert!(PlanarFieldCoeffs::new(1.0, 0.0, -1.0, 1.0, 1.0, 0.5).is_ok());
    }

    #[test]
    fn reference_field_matches_canonical_rates() {
        let fc = build_4d_field(reference_field()).unwrap();
        let spec = spec_from_field(&fc).unwrap();
        let want = q0();
        assert_relative_eq!(spec.ea2, want.ea2, max_relative = 1e-12);
        assert_relative_eq!(spec.ca3, want.ca3, max_relative = 1e-12);
        assert_relative_eq!(spec.ca4, want.ca4, max_relative = 1e-12);
        assert_relative_eq!(spec.cb2, want.cb2, max_relative = 1e-12);
        assert_relative_eq!(spec.eb3, want.eb3, max_relative = 1e-12);
        assert_relative_eq!(spec.eb4, want.eb4, max_relative = 1e-12);
        assert_relative_eq!(spec.ra, 1.0, max_relative = 1e-12);
        assert_relative_eq!(spec.rb, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let fc = reference_field();
        let (ea, eb) = jacobian_eigs(&fc).unwrap();
        for eigs in [ea, eb] {
            let base = [eigs.xi, 0.0, 0.0, 0.0];
            let h = 1e-6;
            for col in 0..4 {
                let mut xp = base;
                let mut xm = base;
                xp[col] += h;
                xm[col] -= h;
                let fp = fc.eval(&xp);
                let fm = fc.eval(&xm);
                for row in 0..4 {
                    let d = (fp[row] - fm[row]) / (2.0 * h);
                    let want = if row != col {
                        0.0
                    } else if row == 0 {
                        eigs.radial
                    } else {
                        eigs.by_axis[row - 1]
                    };
                    assert!(
                        (d - want).abs() < 1e-6,
                        "jacobian entry ({row},{col}) at xi={}: {d} vs {want}",
                        eigs.xi
                    );
                }
            }
        }
    }

    #[test]
    fn equivariance_check_catches_odd_term() {
        let mut monos = reference_field().monomials();
        check_equivariance(&monos).unwrap();
        monos.push(Monomial {
            component: 0,
            coeff: 0.1,
            powers: [1, 1, 0, 0],
        });
        assert!(matches!(
            check_equivariance(&monos),
            Err(Error::EquivarianceViolation(_))
        ));
    }

    #[test]
    fn restriction_to_p12_drops_cleanly() {
        // With the couplings zeroed the x1 equation on P12 is the pure axis
        // cubic and x3, x4 stay identically zero.
        let mut fc = reference_field();
        fc.q = [0.0; 3];
        fc.gamma = [[0.0; 3]; 3];
        let v = fc.eval(&[0.3, 0.2, 0.0, 0.0]);
        let axis = fc.a1 * 0.3 + fc.b1 * 0.09 + fc.c1 * 0.027;
        assert_relative_eq!(v[0], axis, max_relative = 1e-12);
        assert_relative_eq!(
            v[1],
            0.2 * (fc.alpha[0] + fc.beta[0] * 0.3),
            max_relative = 1e-12
        );
        assert_eq!(v[2], 0.0);
        assert_eq!(v[3], 0.0);
    }

    #[test]
    fn fixture_round_trip() {
        let fc = reference_field();
        let text = render_field_fixture(&fc);
        let back = parse_field_fixture(&text).unwrap();
        assert_eq!(fc, back);
        assert!(parse_field_fixture("a1 nonsense").is_err());
        assert!(parse_field_fixture("zz 1.0").is_err());
    }
}
