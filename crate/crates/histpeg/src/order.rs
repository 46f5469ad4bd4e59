//! Pluggable partial orders on the complex plane, and monotonicity audits
//! for peg assignments.
//!
//! The default order formalizes the flux-line picture: comparability
//! classes are the circles through both 0 and 1 (with the real segment
//! [0, 1] as the degenerate class), progress along a class is measured by
//! `t(z) = |z| / (|z| + |1 - z|)`, and the endpoints are universal bounds:
//! 0 sits below everything, 1 above everything. Level sets of `t` are the
//! circles around 0 and 1 of constant `|z|/|1-z|`; conjugate points share
//! `t` but lie on mirrored classes, so they are never related.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hpo::{leq as projector_leq, HistoryProjector};
use crate::peg::{peg_via_y, GleasonOperator};

/// A partial order on complex scalars.
pub trait ComplexOrder {
    fn name(&self) -> &'static str;
    fn leq(&self, a: Complex64, b: Complex64) -> bool;

    fn comparable(&self, a: Complex64, b: Complex64) -> bool {
        self.leq(a, b) || self.leq(b, a)
    }
}

/// The flux-circle order described in the module docs.
#[derive(Debug, Clone, Copy)]
pub struct FluxOrder {
    pub tol: f64,
}

impl Default for FluxOrder {
    fn default() -> Self {
        Self { tol: 1e-9 }
    }
}

/// Progress from 0 towards 1: `|z| / (|z| + |1 - z|)`. Restricted to real
/// z in [0, 1] this is z itself.
pub fn progress(z: Complex64) -> f64 {
    let from_zero = z.norm();
    let to_one = (Complex64::new(1.0, 0.0) - z).norm();
    if from_zero + to_one == 0.0 {
        return 0.0;
    }
    from_zero / (from_zero + to_one)
}

impl FluxOrder {
    fn is_real(&self, z: Complex64) -> bool {
        z.im.abs() <= self.tol
    }

    fn on_real_segment(&self, z: Complex64) -> bool {
        self.is_real(z) && z.re >= -self.tol && z.re <= 1.0 + self.tol
    }

    /// Whether two non-endpoint values lie on a common circle through 0
    /// and 1. Uses the cross-multiplied center-offset condition
    /// `(|z1|² - Re z1) · Im z2 = (|z2|² - Re z2) · Im z1` so that nearly
    /// real values do not blow up a quotient; real values belong to the
    /// degenerate segment class only when they sit inside [0, 1].
    pub fn same_class(&self, a: Complex64, b: Complex64) -> bool {
        match (self.is_real(a), self.is_real(b)) {
            (true, true) => self.on_real_segment(a) && self.on_real_segment(b),
            (false, false) => {
                let g = |z: Complex64| z.norm_sqr() - z.re;
                let cross = g(a) * b.im - g(b) * a.im;
                let scale = 1.0 + a.norm_sqr() + b.norm_sqr();
                cross.abs() <= self.tol * scale
            }
            _ => false,
        }
    }
}

impl ComplexOrder for FluxOrder {
    fn name(&self) -> &'static str {
        "flux"
    }

    fn leq(&self, a: Complex64, b: Complex64) -> bool {
        if (a - b).norm() <= self.tol {
            return true;
        }
        if a.norm() <= self.tol {
            return true;
        }
        if (b - Complex64::new(1.0, 0.0)).norm() <= self.tol {
            return true;
        }
        self.same_class(a, b) && progress(a) < progress(b)
    }
}

/// Numeric order on the reals; non-real values are incomparable to
/// everything except themselves. Intended for classical runs, where pegs
/// and entropies are real but not confined to [0, 1].
#[derive(Debug, Clone, Copy)]
pub struct RealTotalOrder {
    pub tol: f64,
}

impl Default for RealTotalOrder {
    fn default() -> Self {
        Self { tol: 1e-9 }
    }
}

impl ComplexOrder for RealTotalOrder {
    fn name(&self) -> &'static str {
        "real-total"
    }

    fn leq(&self, a: Complex64, b: Complex64) -> bool {
        if (a - b).norm() <= self.tol {
            return true;
        }
        a.im.abs() <= self.tol && b.im.abs() <= self.tol && a.re <= b.re
    }
}

/// Looks an order up by its CLI name.
pub fn order_by_name(name: &str) -> Result<Box<dyn ComplexOrder>> {
    match name {
        "flux" => Ok(Box::new(FluxOrder::default())),
        "real-total" => Ok(Box::new(RealTotalOrder::default())),
        other => Err(Error::UnknownOrder(other.to_string())),
    }
}

/// Default-order comparison, `a ⊑ b` under the flux order.
pub fn flux_order_leq(a: Complex64, b: Complex64) -> bool {
    FluxOrder::default().leq(a, b)
}

/// `0 ⊑ z ⊑ 1` under the supplied order. Under the default flux order this
/// holds for every complex value by the endpoint rules; stricter orders
/// can rule values out.
pub fn unit_constraint(z: Complex64, order: &dyn ComplexOrder) -> bool {
    order.leq(Complex64::new(0.0, 0.0), z) && order.leq(z, Complex64::new(1.0, 0.0))
}

/// Outcome of one ordered comparison under a partial order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderOutcome {
    Holds,
    Fails,
    Incomparable,
}

/// One audited pair: the two pegs and how they compare.
#[derive(Debug, Clone, Copy)]
pub struct MonotonicityRecord {
    pub peg_low: Complex64,
    pub peg_high: Complex64,
    pub outcome: OrderOutcome,
}

/// Tally of a monotonicity audit over proposition pairs.
#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    pub records: Vec<MonotonicityRecord>,
    pub holds: usize,
    pub fails: usize,
    pub incomparable: usize,
    /// True when every sampled peg was real and inside [0, 1] up to 1e-9;
    /// in that regime monotonicity must hold and may be asserted.
    pub classical: bool,
}

impl MonotonicityReport {
    pub fn all_hold(&self) -> bool {
        self.fails == 0 && self.incomparable == 0
    }
}

/// Evaluates pegs for proposition pairs `(P, Q)` with `P ≤ Q` and reports
/// how the peg pairs compare under the supplied order. The proposition
/// precondition is verified; the peg-level comparison is a diagnostic
/// except on classical scenarios, where callers should assert
/// [`MonotonicityReport::all_hold`].
pub fn monotonicity_audit(
    pairs: &[(HistoryProjector, HistoryProjector)],
    y: &GleasonOperator,
    order: &dyn ComplexOrder,
) -> Result<MonotonicityReport> {
    let mut records = Vec::with_capacity(pairs.len());
    let (mut holds, mut fails, mut incomparable) = (0usize, 0usize, 0usize);
    let mut classical = true;
    for (index, (p, q)) in pairs.iter().enumerate() {
        if !projector_leq(p, q)? {
            return Err(Error::UnorderedPair { index });
        }
        let peg_low = peg_via_y(p, y)?;
        let peg_high = peg_via_y(q, y)?;
        for v in [peg_low, peg_high] {
            if v.im.abs() > 1e-9 || v.re < -1e-9 || v.re > 1.0 + 1e-9 {
                classical = false;
            }
        }
        let outcome = if order.leq(peg_low, peg_high) {
            holds += 1;
            OrderOutcome::Holds
        } else if order.leq(peg_high, peg_low) {
            fails += 1;
            OrderOutcome::Fails
        } else {
            incomparable += 1;
            OrderOutcome::Incomparable
        };
        records.push(MonotonicityRecord {
            peg_low,
            peg_high,
            outcome,
        });
    }
    Ok(MonotonicityReport {
        records,
        holds,
        fails,
        incomparable,
        classical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// A point on the flux circle with center offset `offset`, at angle `phi`.
    fn circle_point(offset: f64, phi: f64) -> Complex64 {
        let center = c(0.5, offset);
        let radius = (0.25 + offset * offset).sqrt();
        center + c(radius * phi.cos(), radius * phi.sin())
    }

    #[test]
    fn endpoints_bound_everything() {
        let order = FluxOrder::default();
        let samples = [c(0.3, 0.7), c(-2.0, 1.5), c(0.5, 0.0), c(10.0, -3.0)];
        for z in samples {
            assert!(order.leq(c(0.0, 0.0), z));
            assert!(order.leq(z, c(1.0, 0.0)));
            assert!(unit_constraint(z, &order));
        }
        assert!(!order.leq(c(1.0, 0.0), c(0.0, 0.0)));
    }

    #[test]
    fn real_segment_restriction_is_numeric_leq() {
        let order = FluxOrder::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let a: f64 = rng.random();
            let b: f64 = rng.random();
            assert_eq!(order.leq(c(a, 0.0), c(b, 0.0)), a <= b, "a={a} b={b}");
        }
        // reals outside [0,1] are not on any flux line
        assert!(!order.leq(c(1.5, 0.0), c(2.0, 0.0)));
        assert!(!order.leq(c(-0.5, 0.0), c(0.5, 0.0)));
    }

    #[test]
    fn conjugates_are_never_related() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let order = FluxOrder::default();
        for _ in 0..1000 {
            let z = c(rng.random_range(-2.0..3.0), rng.random_range(0.01..2.0));
            assert!(!order.leq(z, z.conj()), "z = {z}");
            assert!(!order.leq(z.conj(), z), "z = {z}");
        }
    }

    #[test]
    fn same_circle_points_compare_by_progress() {
        let order = FluxOrder::default();
        // three points on one circle, ordered by progress
        let pts = [
            circle_point(0.7, 3.6),
            circle_point(0.7, 4.2),
            circle_point(0.7, 4.8),
        ];
        let mut sorted = pts;
        sorted.sort_by(|x, y| progress(*x).partial_cmp(&progress(*y)).unwrap());
        assert!(order.leq(sorted[0], sorted[1]));
        assert!(order.leq(sorted[1], sorted[2]));
        assert!(order.leq(sorted[0], sorted[2]));
        assert!(!order.leq(sorted[1], sorted[0]));
        // different circles, neither an endpoint: unrelated
        let a = circle_point(0.7, 4.0);
        let b = circle_point(-0.4, 2.0);
        assert!(!order.comparable(a, b));
    }

    #[test]
    fn order_laws_on_sampled_triples() {
        let order = FluxOrder::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sample = |rng: &mut ChaCha8Rng| -> Complex64 {
            match rng.random_range(0..5u32) {
                0 => c(0.0, 0.0),
                1 => c(1.0, 0.0),
                2 => c(rng.random_range(0.0..1.0), 0.0),
                3 => {
                    let offset = rng.random_range(-1.5..1.5);
                    circle_point(offset, rng.random_range(0.0..std::f64::consts::TAU))
                }
                _ => c(rng.random_range(-2.0..3.0), rng.random_range(-2.0..2.0)),
            }
        };
        for _ in 0..10_000 {
            let (a, b, z) = (sample(&mut rng), sample(&mut rng), sample(&mut rng));
            // reflexivity
            assert!(order.leq(a, a));
            // antisymmetry (within tolerance-equality)
            if order.leq(a, b) && order.leq(b, a) {
                assert!((a - b).norm() <= 2.0 * order.tol, "a={a} b={b}");
            }
            // transitivity
            if order.leq(a, b) && order.leq(b, z) {
                assert!(order.leq(a, z), "a={a} b={b} z={z}");
            }
        }
    }

    proptest! {
        #[test]
        fn prop_real_total_matches_f64_order(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let order = RealTotalOrder::default();
            prop_assert_eq!(order.leq(c(a, 0.0), c(b, 0.0)), a <= b || (a - b).abs() <= order.tol);
        }

        #[test]
        fn prop_flux_progress_in_unit_interval(re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let t = progress(c(re, im));
            prop_assert!((0.0..=1.0).contains(&t));
        }
    }

    #[test]
    fn real_total_order_rejects_imaginary_values() {
        let order = RealTotalOrder::default();
        assert!(!order.leq(c(0.0, 0.5), c(1.0, 0.0)));
        assert!(!order.comparable(c(0.3, 0.2), c(0.4, 0.0)));
        assert!(order.leq(c(0.5, 0.0), c(1.7, 0.0)));
        assert!(!unit_constraint(c(1.7, 0.0), &order));
    }

    #[test]
    fn order_lookup_by_name() {
        assert_eq!(order_by_name("flux").unwrap().name(), "flux");
        assert_eq!(order_by_name("real-total").unwrap().name(), "real-total");
        assert!(matches!(
            order_by_name("lexicographic"),
            Err(Error::UnknownOrder(_))
        ));
    }
}
