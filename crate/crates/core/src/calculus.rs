//! Certainty-factor revision calculus.
//!
//! Beliefs are bounded values in `[0, 1]` revised by a pair of maps:
//! `confirm` moves a value up on supporting evidence, `contradict` moves it
//! down on contradicting evidence. A revision blends the two maps by the
//! evidence's degree of support and then interpolates with the old value by
//! the evidence's reliability:
//!
//! ```text
//! new = (1 - q) * x + q * (d * confirm(x) + (1 - d) * contradict(x))
//! ```
//!
//! The concrete pair used throughout is linear: `confirm(x) = x + a2*(1-x)`
//! and `contradict(x) = (1-a1)*x`. It keeps recent evidence dominant
//! (`confirm(contradict(x)) - contradict(confirm(x)) = a1*a2 >= 0`), saturates
//! at both ends, and bounds how far a single observation can push a belief.
//! [`validate_pair`] checks those constraints pointwise for any candidate
//! pair, including hand-written nonlinear ones.

use std::fmt;

use crate::error::{Error, Result};

fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange { name, value })
    }
}

/// One node's belief that a peer's collection is relevant for a keyword.
///
/// Always in `[0, 1]`; construction rejects anything else and every
/// operation in this module preserves the range.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct CertaintyFactor(f64);

impl CertaintyFactor {
    /// Full disbelief.
    pub const ZERO: CertaintyFactor = CertaintyFactor(0.0);
    /// Full belief.
    pub const ONE: CertaintyFactor = CertaintyFactor(1.0);
    /// Maximal-ignorance prior.
    pub const HALF: CertaintyFactor = CertaintyFactor(0.5);

    pub fn new(value: f64) -> Result<Self> {
        check_unit("certainty factor", value).map(CertaintyFactor)
    }

    /// Wraps an already-computed value, clamping away float dust at the ends.
    fn clamped(value: f64) -> Self {
        CertaintyFactor(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for CertaintyFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One observation feeding a revision.
///
/// `degree_of_support` says how strongly the observation supports the
/// proposition (0 = pure contradiction, 1 = pure confirmation);
/// `reliability` says how much this type of evidence is to be trusted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evidence {
    degree_of_support: f64,
    reliability: f64,
}

impl Evidence {
    pub fn new(degree_of_support: f64, reliability: f64) -> Result<Self> {
        Ok(Evidence {
            degree_of_support: check_unit("degree of support", degree_of_support)?,
            reliability: check_unit("reliability", reliability)?,
        })
    }

    pub fn degree_of_support(self) -> f64 {
        self.degree_of_support
    }

    pub fn reliability(self) -> f64 {
        self.reliability
    }
}

/// Parameters of the linear update pair.
///
/// `rate_up` is the confirmation learning rate, `rate_down` the
/// contradiction learning rate. Higher rates react faster to fresh
/// observations at the cost of noise immunity; both default to 0.3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolicyParams {
    rate_up: f64,
    rate_down: f64,
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams {
            rate_up: 0.3,
            rate_down: 0.3,
        }
    }
}

impl PolicyParams {
    pub fn new(rate_up: f64, rate_down: f64) -> Result<Self> {
        Ok(PolicyParams {
            rate_up: check_unit("rate_up", rate_up)?,
            rate_down: check_unit("rate_down", rate_down)?,
        })
    }

    pub fn rate_up(self) -> f64 {
        self.rate_up
    }

    pub fn rate_down(self) -> f64 {
        self.rate_down
    }

    /// Upward revision on confirmatory evidence: `x + rate_up * (1 - x)`.
    ///
    /// The result never drops below `rate_up` (the confirmation floor) and
    /// never drops below `x`.
    pub fn confirm(self, x: CertaintyFactor) -> CertaintyFactor {
        CertaintyFactor::clamped(self.confirm_map(x.value()))
    }

    /// Downward revision on contradictory evidence: `(1 - rate_down) * x`.
    ///
    /// The result never exceeds `1 - rate_down` (the contradiction ceiling)
    /// and never exceeds `x`.
    pub fn contradict(self, x: CertaintyFactor) -> CertaintyFactor {
        CertaintyFactor::clamped(self.contradict_map(x.value()))
    }

    /// Weighted average of the two maps in the ratio `d : 1 - d`.
    pub fn blend(self, x: CertaintyFactor, degree_of_support: f64) -> Result<CertaintyFactor> {
        let d = check_unit("degree of support", degree_of_support)?;
        Ok(self.blend_unchecked(x, d))
    }

    fn blend_unchecked(self, x: CertaintyFactor, d: f64) -> CertaintyFactor {
        let up = self.confirm(x).value();
        let down = self.contradict(x).value();
        CertaintyFactor::clamped(d * up + (1.0 - d) * down)
    }

    /// Full revision: `(1 - q) * x + q * blend(x, d)`.
    ///
    /// Evidence with zero reliability leaves `x` exactly unchanged.
    pub fn revise(self, x: CertaintyFactor, evidence: Evidence) -> CertaintyFactor {
        let q = evidence.reliability;
        let blended = self.blend_unchecked(x, evidence.degree_of_support);
        CertaintyFactor::clamped((1.0 - q) * x.value() + q * blended.value())
    }

    /// Checks this policy against the full constraint set.
    pub fn validate(&self, grid_points: usize) -> Result<ValidationReport> {
        validate_pair(self, grid_points)
    }
}

/// A candidate update pair, evaluated pointwise on `[0, 1]`.
///
/// [`PolicyParams`] implements this with its linear maps; arbitrary pairs
/// can be checked through [`FnPair`].
pub trait UpdatePair {
    /// Map applied on pure confirmation.
    fn confirm_map(&self, x: f64) -> f64;
    /// Map applied on pure contradiction.
    fn contradict_map(&self, x: f64) -> f64;
    /// Whether the pair promises `min confirm_map > 0`.
    fn expects_floor(&self) -> bool {
        true
    }
    /// Whether the pair promises `max contradict_map < 1`.
    fn expects_ceiling(&self) -> bool {
        true
    }
}

impl UpdatePair for PolicyParams {
    fn confirm_map(&self, x: f64) -> f64 {
        x + self.rate_up * (1.0 - x)
    }

    fn contradict_map(&self, x: f64) -> f64 {
        (1.0 - self.rate_down) * x
    }

    fn expects_floor(&self) -> bool {
        self.rate_up > 0.0
    }

    fn expects_ceiling(&self) -> bool {
        self.rate_down > 0.0
    }
}

/// Ad-hoc update pair built from two closures, for validating candidate
/// policies that do not fit the linear family.
pub struct FnPair<C, D>
where
    C: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    confirm: C,
    contradict: D,
    expects_floor: bool,
    expects_ceiling: bool,
}

impl<C, D> FnPair<C, D>
where
    C: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    pub fn new(confirm: C, contradict: D) -> Self {
        FnPair {
            confirm,
            contradict,
            expects_floor: true,
            expects_ceiling: true,
        }
    }

    /// Opt out of the strict confirmation-floor check.
    pub fn expect_floor(mut self, yes: bool) -> Self {
        self.expects_floor = yes;
        self
    }

    /// Opt out of the strict contradiction-ceiling check.
    pub fn expect_ceiling(mut self, yes: bool) -> Self {
        self.expects_ceiling = yes;
        self
    }
}

impl<C, D> UpdatePair for FnPair<C, D>
where
    C: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    fn confirm_map(&self, x: f64) -> f64 {
        (self.confirm)(x)
    }

    fn contradict_map(&self, x: f64) -> f64 {
        (self.contradict)(x)
    }

    fn expects_floor(&self) -> bool {
        self.expects_floor
    }

    fn expects_ceiling(&self) -> bool {
        self.expects_ceiling
    }
}

/// The constraints a usable update pair must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// `contradict(x) <= x` everywhere.
    DownwardRevision,
    /// `confirm(x) >= x` everywhere.
    UpwardRevision,
    /// Both maps stay inside `[0, 1]`.
    RangePreservation,
    /// Both maps are nondecreasing: `x < y` implies `f(x) <= f(y)`.
    OrderPreservation,
    /// `max contradict(x) < 1`: one contradiction always leaves a mark.
    ContradictionCeiling,
    /// `min confirm(x) > 0`: one confirmation always leaves a mark.
    ConfirmationFloor,
    /// `confirm(contradict(x)) >= contradict(confirm(x))`: later evidence
    /// outweighs earlier evidence of equal strength.
    TemporalPrecedence,
}

impl Constraint {
    pub const ALL: [Constraint; 7] = [
        Constraint::DownwardRevision,
        Constraint::UpwardRevision,
        Constraint::RangePreservation,
        Constraint::OrderPreservation,
        Constraint::ContradictionCeiling,
        Constraint::ConfirmationFloor,
        Constraint::TemporalPrecedence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Constraint::DownwardRevision => "downward-revision",
            Constraint::UpwardRevision => "upward-revision",
            Constraint::RangePreservation => "range-preservation",
            Constraint::OrderPreservation => "order-preservation",
            Constraint::ContradictionCeiling => "contradiction-ceiling",
            Constraint::ConfirmationFloor => "confirmation-floor",
            Constraint::TemporalPrecedence => "temporal-precedence",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A broken constraint together with a grid point witnessing the break.
#[derive(Clone, Debug)]
pub struct Violation {
    pub constraint: Constraint,
    pub witness: f64,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} violated at x = {:.6}: {}",
            self.constraint, self.witness, self.detail
        )
    }
}

/// Outcome of a pointwise constraint check.
///
/// Holds at most one violation per constraint (the first witness found);
/// `violations` is empty exactly when every constraint held at every grid
/// point.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub grid_points: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn passes(&self, constraint: Constraint) -> bool {
        !self.violations.iter().any(|v| v.constraint == constraint)
    }
}

/// Evaluates the constraint set on the uniform grid `{i / (grid_points - 1)}`.
pub fn validate_pair(pair: &impl UpdatePair, grid_points: usize) -> Result<ValidationReport> {
    if grid_points < 2 {
        return Err(Error::GridTooSmall(grid_points));
    }

    let mut violations: Vec<Violation> = Vec::new();
    let mut record = |constraint: Constraint, witness: f64, detail: String| {
        if !violations.iter().any(|v| v.constraint == constraint) {
            violations.push(Violation {
                constraint,
                witness,
                detail,
            });
        }
    };

    let step = 1.0 / (grid_points - 1) as f64;
    let grid = |i: usize| (i as f64 * step).min(1.0);

    let mut max_down = f64::NEG_INFINITY;
    let mut max_down_at = 0.0;
    let mut min_up = f64::INFINITY;
    let mut min_up_at = 0.0;
    let mut prev: Option<(f64, f64, f64)> = None;

    for i in 0..grid_points {
        let x = grid(i);
        let up = pair.confirm_map(x);
        let down = pair.contradict_map(x);

        if down > x {
            record(
                Constraint::DownwardRevision,
                x,
                format!("contradict({x}) = {down} exceeds x"),
            );
        }
        if up < x {
            record(
                Constraint::UpwardRevision,
                x,
                format!("confirm({x}) = {up} is below x"),
            );
        }
        if !(0.0..=1.0).contains(&down) || !down.is_finite() {
            record(
                Constraint::RangePreservation,
                x,
                format!("contradict({x}) = {down} leaves [0, 1]"),
            );
        }
        if !(0.0..=1.0).contains(&up) || !up.is_finite() {
            record(
                Constraint::RangePreservation,
                x,
                format!("confirm({x}) = {up} leaves [0, 1]"),
            );
        }
        if let Some((px, pup, pdown)) = prev {
            if down < pdown {
                record(
                    Constraint::OrderPreservation,
                    x,
                    format!("contradict({px}) = {pdown} > contradict({x}) = {down}"),
                );
            }
            if up < pup {
                record(
                    Constraint::OrderPreservation,
                    x,
                    format!("confirm({px}) = {pup} > confirm({x}) = {up}"),
                );
            }
        }

        let gap = pair.confirm_map(down) - pair.contradict_map(up);
        if gap < 0.0 {
            record(
                Constraint::TemporalPrecedence,
                x,
                format!("confirm(contradict(x)) - contradict(confirm(x)) = {gap}"),
            );
        }

        if down > max_down {
            max_down = down;
            max_down_at = x;
        }
        if up < min_up {
            min_up = up;
            min_up_at = x;
        }
        prev = Some((x, up, down));
    }

    if pair.expects_ceiling() && max_down >= 1.0 {
        record(
            Constraint::ContradictionCeiling,
            max_down_at,
            format!("max contradict = {max_down}, no ceiling below 1"),
        );
    }
    if pair.expects_floor() && min_up <= 0.0 {
        record(
            Constraint::ConfirmationFloor,
            min_up_at,
            format!("min confirm = {min_up}, no floor above 0"),
        );
    }

    Ok(ValidationReport {
        grid_points,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    fn cf(v: f64) -> CertaintyFactor {
        CertaintyFactor::new(v).unwrap()
    }

    fn policy(up: f64, down: f64) -> PolicyParams {
        PolicyParams::new(up, down).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < TOL
    }

    #[test]
    fn construction_rejects_out_of_range() {
        assert!(CertaintyFactor::new(-0.1).is_err());
        assert!(CertaintyFactor::new(1.1).is_err());
        assert!(CertaintyFactor::new(f64::NAN).is_err());
        assert!(Evidence::new(1.2, 0.5).is_err());
        assert!(Evidence::new(0.5, -0.2).is_err());
        assert!(PolicyParams::new(1.5, 0.3).is_err());
    }

    #[test]
    fn confirm_examples() {
        let p = policy(0.3, 0.3);
        assert!(close(p.confirm(CertaintyFactor::ZERO).value(), 0.3));
        assert!(close(p.confirm(CertaintyFactor::ONE).value(), 1.0));
        assert!(close(policy(0.9, 0.1).confirm(CertaintyFactor::ONE).value(), 1.0));
        assert!(close(p.confirm(cf(0.5)).value(), 0.65));
    }

    #[test]
    fn contradict_examples() {
        let p = policy(0.3, 0.3);
        assert!(close(p.contradict(CertaintyFactor::ONE).value(), 0.7));
        assert!(close(p.contradict(CertaintyFactor::ZERO).value(), 0.0));
        assert!(close(policy(0.1, 0.9).contradict(CertaintyFactor::ZERO).value(), 0.0));
        assert!(close(p.contradict(cf(0.5)).value(), 0.35));
    }

    #[test]
    fn blend_examples() {
        let p = policy(0.3, 0.3);
        let x = cf(0.4);
        assert_eq!(p.blend(x, 1.0).unwrap(), p.confirm(x));
        assert_eq!(p.blend(x, 0.0).unwrap(), p.contradict(x));
        // 0.7 * 0.65 + 0.3 * 0.35
        assert!(close(p.blend(cf(0.5), 0.7).unwrap().value(), 0.56));
        assert!(p.blend(x, 1.5).is_err());
    }

    #[test]
    fn revise_examples() {
        let p = policy(0.3, 0.3);
        let x = cf(0.5);
        assert_eq!(p.revise(x, Evidence::new(0.8, 0.0).unwrap()), x);
        // reduces to blend at q = 1
        assert!(close(p.revise(x, Evidence::new(0.7, 1.0).unwrap()).value(), 0.56));
        // owner-side setting (d, q) = (1.0, 0.1): 0.9 * 0.5 + 0.1 * 0.65
        assert!(close(p.revise(x, Evidence::new(1.0, 0.1).unwrap()).value(), 0.515));
    }

    #[test]
    fn linear_family_validates_clean() {
        let report = policy(0.3, 0.3).validate(1001).unwrap();
        assert!(report.is_valid(), "{:?}", report.violations);
    }

    #[test]
    fn identity_pair_validates_clean() {
        // zero rates: both maps are the identity, all non-strict constraints hold
        let report = policy(0.0, 0.0).validate(101).unwrap();
        assert!(report.is_valid(), "{:?}", report.violations);
    }

    #[test]
    fn upward_contradiction_is_flagged() {
        let pair = FnPair::new(|x| x, |x| x + 0.1);
        let report = validate_pair(&pair, 101).unwrap();
        assert!(!report.passes(Constraint::DownwardRevision));
        let v = report
            .violations
            .iter()
            .find(|v| v.constraint == Constraint::DownwardRevision)
            .unwrap();
        assert_eq!(v.witness, 0.0);
    }

    #[test]
    fn missing_bounds_are_flagged() {
        // identity maps promise bounds they do not deliver
        let pair = FnPair::new(|x| x, |x| x);
        let report = validate_pair(&pair, 11).unwrap();
        assert!(!report.passes(Constraint::ContradictionCeiling));
        assert!(!report.passes(Constraint::ConfirmationFloor));
        let relaxed = FnPair::new(|x| x, |x| x)
            .expect_floor(false)
            .expect_ceiling(false);
        assert!(validate_pair(&relaxed, 11).unwrap().is_valid());
    }

    #[test]
    fn grid_too_small_is_rejected() {
        assert!(matches!(
            policy(0.3, 0.3).validate(1),
            Err(Error::GridTooSmall(1))
        ));
    }

    #[test]
    fn temporal_precedence_gap_is_product_of_rates() {
        for &(up, down) in &[(0.1, 0.5), (0.3, 0.3), (0.9, 0.2), (0.0, 0.7)] {
            let p = policy(up, down);
            for i in 0..=100 {
                let x = i as f64 / 100.0;
                let gap = p.confirm_map(p.contradict_map(x)) - p.contradict_map(p.confirm_map(x));
                assert!(close(gap, up * down), "gap {gap} at x = {x}");
            }
        }
    }

    proptest! {
        #[test]
        fn revision_preserves_range(
            x in 0.0..=1.0f64,
            d in 0.0..=1.0f64,
            q in 0.0..=1.0f64,
            up in 0.0..=1.0f64,
            down in 0.0..=1.0f64,
        ) {
            let p = policy(up, down);
            let out = p.revise(cf(x), Evidence::new(d, q).unwrap()).value();
            prop_assert!((0.0..=1.0).contains(&out));
        }

        #[test]
        fn zero_reliability_is_exact_noop(x in 0.0..=1.0f64, d in 0.0..=1.0f64) {
            let p = PolicyParams::default();
            let out = p.revise(cf(x), Evidence::new(d, 0.0).unwrap());
            prop_assert_eq!(out.value(), x);
        }

        #[test]
        fn full_reliability_endpoints_reduce(x in 0.0..=1.0f64) {
            let p = PolicyParams::default();
            prop_assert_eq!(
                p.revise(cf(x), Evidence::new(1.0, 1.0).unwrap()),
                p.confirm(cf(x))
            );
            prop_assert_eq!(
                p.revise(cf(x), Evidence::new(0.0, 1.0).unwrap()),
                p.contradict(cf(x))
            );
        }

        #[test]
        fn support_orders_revisions(
            x in 0.01..=0.99f64,
            d1 in 0.0..=1.0f64,
            d2 in 0.0..=1.0f64,
            q in 0.01..=1.0f64,
        ) {
            let p = PolicyParams::default();
            let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            let a = p.revise(cf(x), Evidence::new(lo, q).unwrap()).value();
            let b = p.revise(cf(x), Evidence::new(hi, q).unwrap()).value();
            prop_assert!(a <= b);
            if hi - lo > 1e-6 {
                // strict in the interior when at least one rate is positive
                prop_assert!(a < b);
            }
        }

        #[test]
        fn reliability_scales_displacement(
            x in 0.0..=1.0f64,
            d in 0.0..=1.0f64,
            q1 in 0.0..=1.0f64,
            q2 in 0.0..=1.0f64,
        ) {
            let p = PolicyParams::default();
            let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
            let a = (p.revise(cf(x), Evidence::new(d, lo).unwrap()).value() - x).abs();
            let b = (p.revise(cf(x), Evidence::new(d, hi).unwrap()).value() - x).abs();
            prop_assert!(a <= b + TOL);
        }

        #[test]
        fn temporal_precedence_holds(
            x in 0.0..=1.0f64,
            up in 0.0..=1.0f64,
            down in 0.0..=1.0f64,
        ) {
            let p = policy(up, down);
            let gap = p.confirm_map(p.contradict_map(x)) - p.contradict_map(p.confirm_map(x));
            prop_assert!(gap >= -TOL);
            prop_assert!(close(gap, up * down));
        }

        #[test]
        fn saturation_of_gains(
            x in 0.0..=1.0f64,
            y in 0.0..=1.0f64,
            up in 0.0..=1.0f64,
            down in 0.0..=1.0f64,
        ) {
            let p = policy(up, down);
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            // confirmation gain shrinks as x grows
            let gain_lo = p.confirm_map(lo) - lo;
            let gain_hi = p.confirm_map(hi) - hi;
            prop_assert!(gain_hi <= gain_lo + TOL);
            // contradiction drop grows as x grows
            let drop_lo = lo - p.contradict_map(lo);
            let drop_hi = hi - p.contradict_map(hi);
            prop_assert!(drop_lo <= drop_hi + TOL);
        }

        #[test]
        fn bounds_hold_everywhere(
            x in 0.0..=1.0f64,
            up in 0.0..=1.0f64,
            down in 0.0..=1.0f64,
        ) {
            let p = policy(up, down);
            prop_assert!(p.contradict_map(x) <= 1.0 - down + TOL);
            prop_assert!(p.confirm_map(x) >= up - TOL);
        }
    }
}
