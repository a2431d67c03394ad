//! Cusp-measure calculus on the unit square: wedge regions, monomial-map
//! preimages, and the scaling-exponent index of a family of escape wedges.
//!
//! A wedge `{k x^l <= y <= k_hat x^h}` with `h < l` (or `h = l` and
//! `k < k_hat`) pinches onto the x-axis connection as `x -> 0`. Its share of
//! a square `[0, eps]^2` scales like `eps^(l - 1)` when both exponents lie
//! below 1 and like `eps^(h - 1)` when both lie above; a wedge straddling
//! exponent 1 keeps a bounded share and flips the index negative.

use crate::error::{Error, Result};
use crate::extreal::{ExtReal, Finite, PosInf};
use crate::{is_degenerate, TOL_GENERIC};

/// `{(x, y) in (0,1)^2 : lo_const * x^lo_exponent <= y <= hi_const * x^hi_exponent}`.
///
/// `lo_exponent` must be positive for the set to reach the origin; a
/// non-positive `hi_exponent` makes the upper bound vacuous near 0 (the set
/// is then the whole region above the lower curve).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wedge {
    pub lo_exponent: f64,
    pub hi_exponent: f64,
    pub lo_const: f64,
    pub hi_const: f64,
}

impl Wedge {
    pub fn new(lo_exponent: f64, hi_exponent: f64, lo_const: f64, hi_const: f64) -> Result<Self> {
        if !(lo_const > 0.0) {
            return Err(Error::PositivityViolation("lo_const", lo_const));
        }
        if !(hi_const > 0.0) {
            return Err(Error::PositivityViolation("hi_const", hi_const));
        }
        if !(lo_exponent > 0.0) {
            return Err(Error::Parse(format!(
                "wedge empty near origin: lo_exponent = {lo_exponent} <= 0"
            )));
        }
        let ok = hi_exponent < lo_exponent || (hi_exponent == lo_exponent && hi_const > lo_const);
        if !ok {
            return Err(Error::Parse(format!(
                "wedge empty near origin: lo = {lo_exponent}, hi = {hi_exponent}"
            )));
        }
        Ok(Self {
            lo_exponent,
            hi_exponent,
            lo_const,
            hi_const,
        })
    }

    /// Same exponents, distinct constants.
    pub fn band(exponent: f64, lo_const: f64, hi_const: f64) -> Result<Self> {
        Self::new(exponent, exponent, lo_const, hi_const)
    }

    /// Membership in the open unit square.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x > 0.0
            && x < 1.0
            && y > 0.0
            && y < 1.0
            && y >= self.lo_const * x.powf(self.lo_exponent)
            && y <= self.hi_const * x.powf(self.hi_exponent)
    }
}

/// `(x, y) -> (k1 x^p11 y^p12, k2 x^p21 y^p22)` on `(0,1)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonomialMap2 {
    pub exponents: [[f64; 2]; 2],
    pub constants: [f64; 2],
}

impl MonomialMap2 {
    pub fn new(exponents: [[f64; 2]; 2], constants: [f64; 2]) -> Result<Self> {
        let det = exponents[0][0] * exponents[1][1] - exponents[0][1] * exponents[1][0];
        if is_degenerate(det, 1.0) {
            return Err(Error::NonGeneric("monomial map determinant", det));
        }
        if !(constants[0] > 0.0) || !(constants[1] > 0.0) {
            return Err(Error::PositivityViolation(
                "monomial map constant",
                constants[0].min(constants[1]),
            ));
        }
        Ok(Self {
            exponents,
            constants,
        })
    }

    /// Triangular form `(x, y) -> (k1 x^p, k2 x^q y^e)` with `p, e > 0`.
    pub fn triangular(p: f64, q: f64, e: f64, k1: f64, k2: f64) -> Result<Self> {
        Self::new([[p, 0.0], [q, e]], [k1, k2])
    }

    /// The coordinate swap `(x, y) -> (y, x)`.
    pub fn swap() -> Self {
        Self {
            exponents: [[0.0, 1.0], [1.0, 0.0]],
            constants: [1.0, 1.0],
        }
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let [[p11, p12], [p21, p22]] = self.exponents;
        (
            self.constants[0] * x.powf(p11) * y.powf(p12),
            self.constants[1] * x.powf(p21) * y.powf(p22),
        )
    }
}

/// Exact preimage of a wedge under a triangular or anti-triangular monomial
/// map; the two forms the reduced section maps take.
pub fn preimage(m: &MonomialMap2, w: &Wedge) -> Result<Wedge> {
    let [[p11, p12], [p21, p22]] = m.exponents;
    let [k1, k2] = m.constants;
    if p12 == 0.0 {
        // (x, y) -> (k1 x^p11, k2 x^p21 y^p22)
        if !(p11 > 0.0) || !(p22 > 0.0) {
            return Err(Error::UnsupportedForm(format!(
                "triangular map must expand off the origin: p11 = {p11}, p22 = {p22}"
            )));
        }
        let lo = (p11 * w.lo_exponent - p21) / p22;
        let hi = (p11 * w.hi_exponent - p21) / p22;
        let lo_c = (w.lo_const * k1.powf(w.lo_exponent) / k2).powf(1.0 / p22);
        let hi_c = (w.hi_const * k1.powf(w.hi_exponent) / k2).powf(1.0 / p22);
        Wedge::new(lo, hi, lo_c, hi_c)
    } else if p11 == 0.0 && p22 == 0.0 {
        // (x, y) -> (k1 y^p12, k2 x^p21): swap composed with a triangular map.
        if !(p12 > 0.0) || !(p21 > 0.0) {
            return Err(Error::UnsupportedForm(format!(
                "anti-triangular map must be orientation-positive: p12 = {p12}, p21 = {p21}"
            )));
        }
        if !(w.hi_exponent > 0.0) {
            return Err(Error::UnsupportedForm(
                "anti-triangular preimage of a wedge with vacuous upper bound".into(),
            ));
        }
        // First invert the swap: bounds exchange roles and exponents invert.
        let sw = Wedge::new(
            1.0 / w.hi_exponent,
            1.0 / w.lo_exponent,
            w.hi_const.powf(-1.0 / w.hi_exponent),
            w.lo_const.powf(-1.0 / w.lo_exponent),
        )?;
        // Then pull through (x, y) -> (k2 x^p21, k1 x^0 y^p12) read in
        // swapped coordinates.
        preimage(&MonomialMap2::triangular(p21, 0.0, p12, k2, k1)?, &sw)
    } else {
        Err(Error::UnsupportedForm(format!(
            "dense exponent matrix {:?}",
            m.exponents
        )))
    }
}

/// Outcome of [`wedge_index`]: the index plus whether the straddling-wedge
/// model (rather than the thin-cusp formula) produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WedgeIndexOutcome {
    pub index: ExtReal,
    pub thick_model: bool,
}

/// Stability index of the connection whose escape set is the union of `ws`.
///
/// Empty list: nothing escapes, `+inf`. Thin wedges feed the scaling
/// exponents `alpha_max` (largest exponent below 1) and `alpha_min`
/// (smallest above 1) into `-1 + min(1/alpha_max, alpha_min)`. A wedge
/// straddling exponent 1 keeps a bounded escape share; its index is modeled
/// as `-(1 - hi_exponent)` (or `-1` when the upper bound is vacuous) and
/// flagged, since only its sign is backed by the thin-cusp calculus.
pub fn wedge_index(ws: &[Wedge]) -> Result<WedgeIndexOutcome> {
    check_disjoint(ws)?;
    classify_exponents(ws.iter().map(|w| (w.lo_exponent, w.hi_exponent)))
}

/// Index from exponent pairs alone (constants never matter). Used directly
/// by the network engines, whose wedge families are disjoint by
/// construction (distinct iterates of injective maps).
pub(crate) fn classify_exponents(
    pairs: impl Iterator<Item = (f64, f64)>,
) -> Result<WedgeIndexOutcome> {
    let mut alpha_max: Option<f64> = None;
    let mut alpha_min: Option<f64> = None;
    let mut thick_hi: Option<f64> = None;
    for (lo, hi) in pairs {
        if is_degenerate(lo - 1.0, 1.0) {
            return Err(Error::NonGeneric("wedge exponent - 1", lo - 1.0));
        }
        if hi > 0.0 && is_degenerate(hi - 1.0, 1.0) {
            return Err(Error::NonGeneric("wedge exponent - 1", hi - 1.0));
        }
        if lo < 1.0 {
            alpha_max = Some(alpha_max.map_or(lo, |a: f64| a.max(lo)));
        } else if hi > 1.0 {
            alpha_min = Some(alpha_min.map_or(hi, |a: f64| a.min(hi)));
        } else {
            thick_hi = Some(thick_hi.map_or(hi, |h: f64| h.max(hi)));
        }
    }
    if let Some(hi) = thick_hi {
        let sigma_minus = if hi > 0.0 { 1.0 - hi } else { 1.0 };
        return Ok(WedgeIndexOutcome {
            index: Finite(-sigma_minus),
            thick_model: true,
        });
    }
    let index = match (alpha_max, alpha_min) {
        (None, None) => PosInf,
        (Some(amax), None) => Finite(1.0 / amax - 1.0),
        (None, Some(amin)) => Finite(amin - 1.0),
        (Some(amax), Some(amin)) => Finite((1.0 / amax).min(amin) - 1.0),
    };
    Ok(WedgeIndexOutcome {
        index,
        thick_model: false,
    })
}

/// Pairwise disjointness probe. Same-exponent bands are compared exactly on
/// their constant ranges; the mixed cases are sampled at one small x, where
/// distinct exponents have separated.
fn check_disjoint(ws: &[Wedge]) -> Result<()> {
    for (i, a) in ws.iter().enumerate() {
        for b in &ws[i + 1..] {
            let same = a.lo_exponent == a.hi_exponent
                && b.lo_exponent == b.hi_exponent
                && (a.lo_exponent - b.lo_exponent).abs() < 1e-12;
            if same && a.lo_const < b.hi_const && b.lo_const < a.hi_const {
                return Err(Error::UnsupportedForm(format!(
                    "same-exponent wedges overlap: exponent {}, constants [{},{}] and [{},{}]",
                    a.lo_exponent, a.lo_const, a.hi_const, b.lo_const, b.hi_const
                )));
            }
        }
    }
    let x = 1e-6f64;
    let mut ivals: Vec<(f64, f64)> = Vec::with_capacity(ws.len());
    for w in ws {
        let lo = w.lo_const * x.powf(w.lo_exponent);
        let hi = (w.hi_const * x.powf(w.hi_exponent)).min(1.0);
        if lo < hi {
            ivals.push((lo, hi));
        }
    }
    ivals.sort_by(|a, b| a.0.total_cmp(&b.0));
    for pair in ivals.windows(2) {
        if pair[1].0 < pair[0].1 * (1.0 - TOL_GENERIC) {
            return Err(Error::UnsupportedForm(format!(
                "wedges overlap near 0 (at x = {x}: [{:.3e},{:.3e}] and [{:.3e},{:.3e}])",
                pair[0].0, pair[0].1, pair[1].0, pair[1].1
            )));
        }
    }
    Ok(())
}

/// Area of `w` intersected with `[0, eps]^2`, divided by `eps^2`.
///
/// Adaptive Simpson quadrature in x with the analytic inner bounds; used as
/// the integration oracle the index engine is checked against.
pub fn wedge_measure_fraction(w: &Wedge, eps: f64) -> f64 {
    assert!(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
    let upper = |x: f64| (w.hi_const * x.powf(w.hi_exponent)).min(eps);
    let lower = |x: f64| w.lo_const * x.powf(w.lo_exponent);
    let g = |x: f64| (upper(x) - lower(x).min(eps)).max(0.0);

    // Past this x the lower bound already exceeds the square; integrating
    // the identically-zero tail would only accumulate rounding residue from
    // the kink at its left endpoint.
    let x_max = (eps / w.lo_const).powf(1.0 / w.lo_exponent).min(eps);
    if !(x_max > 0.0) {
        return 0.0;
    }

    // Breakpoints where the integrand kinks.
    let mut cuts = Vec::new();
    if w.hi_exponent > 0.0 {
        cuts.push((eps / w.hi_const).powf(1.0 / w.hi_exponent));
    }
    if w.hi_exponent != w.lo_exponent {
        let xc = (w.lo_const / w.hi_const).powf(1.0 / (w.hi_exponent - w.lo_exponent));
        cuts.push(xc);
    }
    cuts.retain(|&c| c.is_finite() && c > 0.0 && c < x_max);
    cuts.push(0.0);
    cuts.push(x_max);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut area = 0.0;
    for seg in cuts.windows(2) {
        area += adaptive_simpson(&g, seg[0], seg[1], 1e-6, 22);
    }
    area / (eps * eps)
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, depth: u32) -> f64 {
    fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, m);
        let right = simpson(f, m, b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, m, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, right, 0.5 * tol, depth - 1)
        }
    }
    if b <= a {
        return 0.0;
    }
    let whole = simpson(f, a, b);
    let scale = whole.abs().max((b - a) * 1e-300);
    recurse(f, a, b, whole, rel_tol * scale, depth)
}

// ---------------------------------------------------------------------------
// Exponent-level machinery used by the network escape-set engines. Constants
// never influence an index, so chains track exponents only.
// ---------------------------------------------------------------------------

/// Exponent pair of an escape wedge; `hi <= 0` marks a vacuous upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ExpWedge {
    pub lo: f64,
    pub hi: f64,
}

impl ExpWedge {
    /// Nonempty near the origin.
    pub fn valid(&self) -> bool {
        self.lo > 0.0 && self.lo >= self.hi - 1e-12
    }

    pub fn straddles_one(&self) -> bool {
        self.lo > 1.0 && self.hi.max(0.0) < 1.0
    }

    /// Preimage exponents under the return map `(x, y) -> (x^rho, y x^nu)`,
    /// intersected with its domain `{y < x^dom_exp}`; `None` when empty.
    /// Iterating this on the already-clamped previous wedge carries the
    /// domain restriction of every intermediate pass along.
    pub fn pull_return(&self, rho: f64, nu: f64, dom_exp: f64) -> Option<ExpWedge> {
        let lo = rho * self.lo - nu;
        let hi = (rho * self.hi - nu).max(dom_exp);
        let w = ExpWedge { lo, hi };
        w.valid().then_some(w)
    }

    /// Preimage exponents under the one-pass map `(x, y) -> (x^p, y x^q)`.
    pub fn pull_triangular(&self, p: f64, q: f64) -> Option<ExpWedge> {
        let w = ExpWedge {
            lo: p * self.lo - q,
            hi: p * self.hi - q,
        };
        w.valid().then_some(w)
    }

    /// Preimage exponents under `(x, y) -> (y x^p, x^q)`; requires a real
    /// upper bound on the source wedge.
    pub fn pull_anti(&self, p: f64, q: f64) -> Option<ExpWedge> {
        if self.hi <= 0.0 {
            return None;
        }
        let w = ExpWedge {
            lo: q / self.hi - p,
            hi: q / self.lo - p,
        };
        w.valid().then_some(w)
    }
}

pub(crate) const MAX_CHAIN_EXP: f64 = 1e3;

/// Iterated preimages of `seed` under `(x, y) -> (x^rho, y x^nu)` restricted
/// to `{y < x^dom_exp}`. Stops once the exponents exceed [`MAX_CHAIN_EXP`]
/// (pullbacks of later members are settled by then) or when the chain dies
/// inside the domain. The chain runs past a straddling member: deeper
/// members still matter for the pulled-back families at other connections.
pub(crate) fn return_map_chain(
    seed: ExpWedge,
    rho: f64,
    nu: f64,
    dom_exp: f64,
    n_cap: usize,
) -> Result<Vec<ExpWedge>> {
    let mut out = Vec::new();
    let mut cur = seed;
    for _ in 0..n_cap {
        match cur.pull_return(rho, nu, dom_exp) {
            None => return Ok(out),
            Some(next) => {
                out.push(next);
                if next.lo > MAX_CHAIN_EXP {
                    return Ok(out);
                }
                cur = next;
            }
        }
    }
    Err(Error::CapExceeded(n_cap, "return-map preimage chain"))
}
