//! The integer-valued counting measure a path's jumps induce on the
//! time-by-size plane, and integration against it.
//!
//! The measure of a product set counts the jumps `(t, delta)` landing in it;
//! nothing at time zero is ever counted. Integration of `f(s, x)` over
//! `[0, t] x A` walks the restricted exhaustion in ascending time and also
//! returns the certificate `max |f|` over the touched points, which bounds
//! the integral of `|f|` by certificate times count.

use serde::{Deserialize, Serialize};

use crate::borel::BorelSet;
use crate::error::{Error, Result};
use crate::exhaust::exhaust_restricted;
use crate::path::RegulatedPath;

/// A closed time window crossed with a Borel set of jump sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rectangle {
    t_lo: f64,
    t_hi: f64,
    space: BorelSet,
}

impl Rectangle {
    pub fn new(t_lo: f64, t_hi: f64, space: BorelSet) -> Result<Self> {
        if !(0.0 <= t_lo && t_lo <= t_hi) || !t_hi.is_finite() {
            return Err(Error::Domain(format!(
                "need 0 <= t_lo <= t_hi finite, got [{t_lo}, {t_hi}]"
            )));
        }
        Ok(Self { t_lo, t_hi, space })
    }

    /// The window `[0, t]` crossed with `space`.
    pub fn up_to(t: f64, space: BorelSet) -> Result<Self> {
        Self::new(0.0, t, space)
    }

    pub fn t_lo(&self) -> f64 {
        self.t_lo
    }

    pub fn t_hi(&self) -> f64 {
        self.t_hi
    }

    pub fn space(&self) -> &BorelSet {
        &self.space
    }

    pub fn contains_event(&self, time: f64, delta: f64) -> bool {
        self.t_lo <= time && time <= self.t_hi && self.space.contains(delta)
    }
}

impl<'de> Deserialize<'de> for Rectangle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            t_lo: f64,
            t_hi: f64,
            space: BorelSet,
        }
        let r = Repr::deserialize(d)?;
        Rectangle::new(r.t_lo, r.t_hi, r.space).map_err(serde::de::Error::custom)
    }
}

/// A finite union of rectangles; the rectangles may overlap, counting
/// deduplicates by jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSet {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub rects: Vec<Rectangle>,
}

impl ProductSet {
    pub fn new(rects: Vec<Rectangle>) -> Self {
        Self { id: None, rects }
    }

    pub fn rects(&self) -> &[Rectangle] {
        &self.rects
    }

    /// Latest time any rectangle reaches; 0 for an empty union.
    pub fn t_max(&self) -> f64 {
        self.rects.iter().map(Rectangle::t_hi).fold(0.0, f64::max)
    }

    pub fn contains_event(&self, time: f64, delta: f64) -> bool {
        self.rects.iter().any(|r| r.contains_event(time, delta))
    }
}

/// The value of the counting measure on a product set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureValue {
    pub count: u64,
}

/// Counts the jumps `(time, delta)` of the path that land in the product
/// set, each jump at most once across overlapping rectangles. Jumps at time
/// zero never exist, so the time-zero slice always has measure zero.
pub fn measure(path: &RegulatedPath, b: &ProductSet) -> MeasureValue {
    let count = path
        .events()
        .iter()
        .filter(|e| b.contains_event(e.time(), e.delta()))
        .count() as u64;
    MeasureValue { count }
}

/// Result of integrating a function against the jump measure over
/// `[0, t] x A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Integration {
    /// The sum of `f` over the touched jump points, in ascending time order.
    pub value: f64,
    /// `max |f|` over the touched jump points; 0 when none are touched.
    pub certificate: f64,
    /// How many jump points were touched; equals the measure of `[0, t] x A`.
    pub count: u64,
}

fn accumulate<F>(points: impl Iterator<Item = (f64, f64)>, f: F) -> Result<Integration>
where
    F: Fn(f64, f64) -> f64,
{
    let mut value = 0.0;
    let mut certificate = 0.0f64;
    let mut count = 0;
    for (s, x) in points {
        let y = f(s, x);
        if !y.is_finite() {
            return Err(Error::Numeric(format!(
                "integrand is not finite at (s, x) = ({s}, {x})"
            )));
        }
        value += y;
        certificate = certificate.max(y.abs());
        count += 1;
    }
    Ok(Integration {
        value,
        certificate,
        count,
    })
}

/// Integrates `f(s, x)` against the jump measure over `[0, t] x A` by
/// walking the restricted exhaustion while its entries stay at or below `t`.
pub fn integrate<F>(path: &RegulatedPath, f: F, t: f64, a: &BorelSet) -> Result<Integration>
where
    F: Fn(f64, f64) -> f64,
{
    if !(0.0 <= t && t <= path.horizon()) {
        return Err(Error::Domain(format!(
            "t = {t} outside [0, {}]",
            path.horizon()
        )));
    }
    let seq = exhaust_restricted(path, a)?;
    let points = seq
        .times
        .iter()
        .map_while(|entry| entry.finite())
        .take_while(|&s| s <= t)
        .map(|s| {
            let delta = path
                .event_at(s)
                .expect("exhaustion entries are event times")
                .delta();
            (s, delta)
        });
    accumulate(points, f)
}

/// Oracle route for [`integrate`]: a direct scan of the event list in
/// ascending time. The two routes touch the same points in the same order,
/// so their sums must agree bit for bit.
pub fn integrate_direct<F>(path: &RegulatedPath, f: F, t: f64, a: &BorelSet) -> Result<Integration>
where
    F: Fn(f64, f64) -> f64,
{
    if !(0.0 <= t && t <= path.horizon()) {
        return Err(Error::Domain(format!(
            "t = {t} outside [0, {}]",
            path.horizon()
        )));
    }
    a.require_zero_separated()?;
    let points = path
        .events()
        .iter()
        .take_while(|e| e.time() <= t)
        .filter(|e| a.contains(e.delta()))
        .map(|e| (e.time(), e.delta()));
    accumulate(points, f)
}

fn check_grid(path: &RegulatedPath, grid: &[f64]) -> Result<()> {
    for &t in grid {
        if !(0.0 <= t && t <= path.horizon()) {
            return Err(Error::Domain(format!(
                "grid time {t} outside [0, {}]",
                path.horizon()
            )));
        }
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("grid must be increasing".to_string()));
    }
    Ok(())
}

/// The counting process of jumps with size in `a`, read on a grid: the
/// number of restricted-exhaustion entries at or before each grid time.
/// A jump exactly at a grid time is counted there.
pub fn counting_process(path: &RegulatedPath, a: &BorelSet, grid: &[f64]) -> Result<Vec<u64>> {
    check_grid(path, grid)?;
    let finite = exhaust_restricted(path, a)?.finite_times();
    Ok(grid
        .iter()
        .map(|&t| finite.partition_point(|&s| s <= t) as u64)
        .collect())
}

/// The cumulative sum of `g(delta)` over jumps with size in `a`, read on a
/// grid. Prefix sums run in ascending jump time, so each grid value equals
/// [`integrate`] with `f(s, x) = g(x)` at that time, bit for bit.
pub fn jump_sum_process<G>(
    path: &RegulatedPath,
    a: &BorelSet,
    g: G,
    grid: &[f64],
) -> Result<Vec<f64>>
where
    G: Fn(f64) -> f64,
{
    check_grid(path, grid)?;
    let seq = exhaust_restricted(path, a)?;
    let jump_times = seq.finite_times();
    let mut prefix = Vec::with_capacity(jump_times.len() + 1);
    prefix.push(0.0);
    let mut running = 0.0;
    for &s in &jump_times {
        let delta = path
            .event_at(s)
            .expect("exhaustion entries are event times")
            .delta();
        let y = g(delta);
        if !y.is_finite() {
            return Err(Error::Numeric(format!(
                "integrand is not finite at x = {delta}"
            )));
        }
        running += y;
        prefix.push(running);
    }
    Ok(grid
        .iter()
        .map(|&t| prefix[jump_times.partition_point(|&s| s <= t)])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::borel::Interval;
    use crate::path::JumpEvent;
    use proptest::prelude::*;

    fn three_jump_path() -> RegulatedPath {
        let events = vec![
            JumpEvent::cadlag(0.5, 2.0).unwrap(),
            JumpEvent::cadlag(1.2, -0.3).unwrap(),
            JumpEvent::cadlag(2.7, 0.05).unwrap(),
        ];
        RegulatedPath::new(0.0, 0.0, 10.0, events).unwrap()
    }

    fn magnitude_at_least(eps: f64) -> BorelSet {
        BorelSet::new(vec![Interval::at_most(-eps), Interval::at_least(eps)]).unwrap()
    }

    #[test]
    fn measure_counts_jumps_in_rectangles() {
        let p = three_jump_path();
        let b1 = ProductSet::new(vec![Rectangle::up_to(
            2.0,
            BorelSet::single(Interval::at_least(1.0)).unwrap(),
        )
        .unwrap()]);
        assert_eq!(measure(&p, &b1).count, 1);

        let b2 = ProductSet::new(vec![Rectangle::up_to(3.0, magnitude_at_least(0.1)).unwrap()]);
        assert_eq!(measure(&p, &b2).count, 2);
    }

    #[test]
    fn time_zero_slice_has_measure_zero() {
        let p = three_jump_path();
        let zero_slice = ProductSet::new(vec![Rectangle::new(
            0.0,
            0.0,
            BorelSet::single(Interval::whole_line()).unwrap(),
        )
        .unwrap()]);
        assert_eq!(measure(&p, &zero_slice).count, 0);
    }

    #[test]
    fn overlapping_rectangles_count_each_jump_once() {
        let p = three_jump_path();
        let r1 = Rectangle::up_to(5.0, magnitude_at_least(0.01)).unwrap();
        let r2 = Rectangle::new(0.4, 2.0, magnitude_at_least(0.2)).unwrap();
        let union = ProductSet::new(vec![r1.clone(), r2.clone()]);
        assert_eq!(measure(&p, &union).count, 3);
        // both cover the jumps at 0.5 and 1.2; the union does not double-count
        assert_eq!(
            measure(&p, &ProductSet::new(vec![r1])).count
                + measure(&p, &ProductSet::new(vec![r2])).count,
            5
        );
    }

    #[test]
    fn integrate_identity_examples() {
        let p = three_jump_path();
        let a = magnitude_at_least(0.1);

        // f = 1 counts jumps
        let one = integrate(&p, |_, _| 1.0, 2.0, &a).unwrap();
        let b = ProductSet::new(vec![Rectangle::up_to(2.0, a.clone()).unwrap()]);
        assert_eq!(one.value, measure(&p, &b).count as f64);

        // f(s, x) = x sums the jump sizes: 2.0 + (-0.3)
        let sum = integrate(&p, |_, x| x, 2.0, &a).unwrap();
        assert_eq!(sum.value, 2.0 + (-0.3));
        assert_eq!(sum.count, 2);
        assert_eq!(sum.certificate, 2.0);

        // no touched jumps
        let empty = RegulatedPath::constant(0.0, 5.0).unwrap();
        let none = integrate(&empty, |_, x| x, 2.0, &a).unwrap();
        assert_eq!(none.value, 0.0);
        assert_eq!(none.certificate, 0.0);
        assert_eq!(none.count, 0);
    }

    #[test]
    fn integrate_rejects_bad_inputs() {
        let p = three_jump_path();
        let not_separated =
            BorelSet::single(Interval::new(Some(0.0), false, Some(1.0), true)).unwrap();
        assert!(matches!(
            integrate(&p, |_, x| x, 1.0, &not_separated),
            Err(Error::NotInBStar)
        ));
        let a = magnitude_at_least(0.1);
        assert!(integrate(&p, |_, x| x, 11.0, &a).is_err());
        assert!(matches!(
            integrate(&p, |_, x| 1.0 / (x - 2.0), 1.0, &a),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn counting_process_examples() {
        let p = three_jump_path();
        let a = magnitude_at_least(0.1);
        assert_eq!(
            counting_process(&p, &a, &[0.0, 1.0, 2.0]).unwrap(),
            vec![0, 1, 2]
        );
        // a grid point exactly at a jump time counts that jump
        assert_eq!(counting_process(&p, &a, &[0.5]).unwrap(), vec![1]);
        let empty = RegulatedPath::constant(0.0, 5.0).unwrap();
        assert_eq!(
            counting_process(&empty, &a, &[1.0, 2.0]).unwrap(),
            vec![0, 0]
        );
        assert!(counting_process(&p, &a, &[2.0, 1.0]).is_err());
        assert!(counting_process(&p, &a, &[-1.0]).is_err());
    }

    #[test]
    fn jump_sum_process_examples() {
        let p = three_jump_path();
        let a = magnitude_at_least(0.1);
        // g(x) = x: running sums 2.0 then 2.0 - 0.3
        assert_eq!(
            jump_sum_process(&p, &a, |x| x, &[1.0, 2.0]).unwrap(),
            vec![2.0, 2.0 + (-0.3)]
        );
        // g = 1 recovers the counting process
        let counts = counting_process(&p, &a, &[1.0, 2.0]).unwrap();
        let ones = jump_sum_process(&p, &a, |_| 1.0, &[1.0, 2.0]).unwrap();
        assert_eq!(ones, counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
        // g(x) = x^2 on the single jump above 1
        let big = BorelSet::single(Interval::at_least(1.0)).unwrap();
        assert_eq!(
            jump_sum_process(&p, &big, |x| x * x, &[1.0]).unwrap(),
            vec![4.0]
        );
    }

    #[test]
    fn product_set_json_round_trip() {
        let b = ProductSet {
            id: Some("B1".to_string()),
            rects: vec![Rectangle::up_to(2.0, magnitude_at_least(0.1)).unwrap()],
        };
        let js = serde_json::to_string(&b).unwrap();
        let back: ProductSet = serde_json::from_str(&js).unwrap();
        assert_eq!(back, b);
        assert!(serde_json::from_str::<ProductSet>(
            r#"{"rects":[{"t_lo":2.0,"t_hi":1.0,"space":{"intervals":[]}}]}"#
        )
        .is_err());
    }

    fn arb_path() -> impl Strategy<Value = RegulatedPath> {
        proptest::collection::btree_set(1u32..3000, 0..50).prop_flat_map(|times| {
            let n = times.len();
            (
                Just(times),
                proptest::collection::vec((0.001f64..4.0, prop::bool::ANY), n),
            )
                .prop_map(|(times, mags)| {
                    let events = times
                        .into_iter()
                        .zip(mags)
                        .map(|(ms, (mag, neg))| {
                            let delta = if neg { -mag } else { mag };
                            JumpEvent::new(ms as f64 / 100.0, delta, 1.0).unwrap()
                        })
                        .collect();
                    RegulatedPath::new(0.0, 0.0, 30.0, events).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn integration_routes_agree_bit_exactly(path in arb_path(), eps in 0.01f64..1.0, t in 0.0f64..30.0) {
            let a = magnitude_at_least(eps);
            let f = |s: f64, x: f64| s * x + x * x;
            let by_exhaustion = integrate(&path, f, t, &a).unwrap();
            let by_scan = integrate_direct(&path, f, t, &a).unwrap();
            prop_assert_eq!(by_exhaustion, by_scan);
        }

        #[test]
        fn certificate_bounds_absolute_integral(path in arb_path(), eps in 0.01f64..1.0, t in 0.0f64..30.0) {
            let a = magnitude_at_least(eps);
            let f = |s: f64, x: f64| s - x;
            let abs = integrate(&path, |s, x| f(s, x).abs(), t, &a).unwrap();
            // certificate * count bounds the integral of |f| up to roundoff
            let bound = abs.certificate * abs.count as f64;
            prop_assert!(abs.value <= bound * (1.0 + 1e-12) + f64::MIN_POSITIVE);
        }

        #[test]
        fn measure_is_additive_on_disjoint_rectangles(path in arb_path(), split in 0.5f64..29.5) {
            // disjoint time windows with a shared space part
            let a = magnitude_at_least(0.05);
            let next = f64::from_bits(split.to_bits() + 1);
            let r1 = Rectangle::new(0.0, split, a.clone()).unwrap();
            let r2 = Rectangle::new(next, 30.0, a.clone()).unwrap();
            let m1 = measure(&path, &ProductSet::new(vec![r1.clone()])).count;
            let m2 = measure(&path, &ProductSet::new(vec![r2.clone()])).count;
            let m12 = measure(&path, &ProductSet::new(vec![r1, r2])).count;
            prop_assert_eq!(m12, m1 + m2);
        }

        #[test]
        fn measure_is_additive_on_space_split_rectangles(path in arb_path(), t in 1.0f64..30.0) {
            // same time window, sign-disjoint space parts
            let negative = BorelSet::single(Interval::at_most(-0.05)).unwrap();
            let positive = BorelSet::single(Interval::at_least(0.05)).unwrap();
            let both = magnitude_at_least(0.05);
            let m_neg = measure(&path, &ProductSet::new(vec![Rectangle::up_to(t, negative).unwrap()])).count;
            let m_pos = measure(&path, &ProductSet::new(vec![Rectangle::up_to(t, positive).unwrap()])).count;
            let m_both = measure(&path, &ProductSet::new(vec![Rectangle::up_to(t, both).unwrap()])).count;
            prop_assert_eq!(m_both, m_neg + m_pos);
        }

        #[test]
        fn counting_process_is_monotone(path in arb_path(), eps in 0.01f64..1.0) {
            let a = magnitude_at_least(eps);
            let grid: Vec<f64> = (0..=30).map(|k| k as f64).collect();
            let counts = counting_process(&path, &a, &grid).unwrap();
            prop_assert_eq!(counts[0], 0);
            prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
