//! Seeded oracle-equivalence property suite, shared by the `selftest`
//! subcommand and the acceptance tests.
//!
//! Each property draws randomized inputs from its own generator stream and
//! cross-checks an implementation route against an independent oracle route:
//! recursion against filter-sort, exhaustion-walk integration against a
//! direct event scan, min-recursion enumeration against comparison sort, and
//! so on. Results are deterministic in the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::borel::{BorelSet, Interval};
use crate::exhaust::{
    check_disjoint_exhaustion, exhaust_global, exhaust_restricted, exhaust_restricted_filter_sort,
    remark_identity_at,
};
use crate::measure::{integrate, integrate_direct, measure, ProductSet, Rectangle};
use crate::path::{enumerate_finite_set, JumpEvent, RegulatedPath};

/// Outcome of one property over its sampled cases.
#[derive(Debug, Clone)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub cases: u64,
    pub failures: u64,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn property_rng(seed: u64, property_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX - property_index);
    rng
}

/// Draws a path with up to `max_jumps` jumps: log-uniform jump magnitudes,
/// random signs, mixed spot weights.
pub fn random_path(rng: &mut ChaCha8Rng, max_jumps: usize, horizon: f64) -> RegulatedPath {
    let n = rng.random_range(0..=max_jumps);
    let mut times: Vec<f64> = (0..n)
        .map(|_| horizon * (1.0 - rng.random::<f64>()))
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let events = times
        .into_iter()
        .map(|t| {
            let mag = 10f64.powf(rng.random_range(-3.0..0.7));
            let delta = if rng.random::<bool>() { mag } else { -mag };
            let theta = match rng.random_range(0..4u8) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random_range(-0.5..1.5),
            };
            JumpEvent::new(t, delta, theta).expect("sampled events are valid")
        })
        .collect();
    let x0 = rng.random_range(-2.0..2.0);
    let drift = rng.random_range(-1.0..1.0);
    RegulatedPath::new(x0, drift, horizon, events).expect("sampled paths are valid")
}

/// Draws a zero-separated union of up to four intervals with separation
/// radius at least 0.01.
pub fn random_zero_separated_set(rng: &mut ChaCha8Rng) -> BorelSet {
    let radius = 10f64.powf(rng.random_range(-2.0..0.0));
    let mut intervals = Vec::new();
    let side = |rng: &mut ChaCha8Rng, sign: f64, intervals: &mut Vec<Interval>| {
        let k = rng.random_range(1..=2usize);
        let mut cuts: Vec<f64> = (0..2 * k)
            .map(|_| radius + rng.random::<f64>() * 8.0)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for pair in cuts.chunks_exact(2) {
            let (mut lo, mut hi) = (sign * pair[0], sign * pair[1]);
            if lo > hi {
                std::mem::swap(&mut lo, &mut hi);
            }
            intervals.push(Interval::new(
                Some(lo),
                rng.random(),
                Some(hi),
                rng.random(),
            ));
        }
        if rng.random::<f64>() < 0.2 {
            let ray = sign * (radius + 9.0);
            intervals.push(if sign > 0.0 {
                Interval::at_least(ray)
            } else {
                Interval::at_most(ray)
            });
        }
    };
    match rng.random_range(0..3u8) {
        0 => side(rng, 1.0, &mut intervals),
        1 => side(rng, -1.0, &mut intervals),
        _ => {
            side(rng, 1.0, &mut intervals);
            side(rng, -1.0, &mut intervals);
        }
    }
    BorelSet::new(intervals).expect("sampled intervals are disjoint by construction")
}

fn run_property<F>(
    name: &'static str,
    seed: u64,
    index: u64,
    cases: u64,
    mut case: F,
) -> PropertyOutcome
where
    F: FnMut(&mut ChaCha8Rng) -> bool,
{
    let mut rng = property_rng(seed, index);
    let mut failures = 0;
    for _ in 0..cases {
        if !case(&mut rng) {
            failures += 1;
        }
    }
    PropertyOutcome {
        name,
        cases,
        failures,
    }
}

/// Runs the whole suite with `cases` sampled inputs per property.
pub fn run(seed: u64, cases: u64) -> Vec<PropertyOutcome> {
    let horizon = 12.0;
    vec![
        run_property(
            "global_exhaustion_is_sorted_jump_set",
            seed,
            0,
            cases,
            |rng| {
                let path = random_path(rng, 200, horizon);
                let seq = exhaust_global(&path);
                let mut sorted = path.jump_times();
                sorted.sort_by(f64::total_cmp);
                seq.finite_times() == sorted
                    && check_disjoint_exhaustion(&path, &seq)
                    && path.layered_decomposition().is_exact_partition(&path)
            },
        ),
        run_property(
            "restricted_recursion_matches_filter_sort",
            seed,
            1,
            cases,
            |rng| {
                let path = random_path(rng, 200, horizon);
                let set = random_zero_separated_set(rng);
                let rec = exhaust_restricted(&path, &set).expect("set is zero-separated");
                let fs =
                    exhaust_restricted_filter_sort(&path, &set).expect("set is zero-separated");
                let t = rng.random_range(0.0..horizon);
                rec == fs
                    && check_disjoint_exhaustion(&path, &rec)
                    && remark_identity_at(&path, &set, t).expect("set is zero-separated")
            },
        ),
        run_property(
            "integration_routes_agree_bit_exactly",
            seed,
            2,
            cases,
            |rng| {
                let path = random_path(rng, 200, horizon);
                let set = random_zero_separated_set(rng);
                let t = rng.random_range(0.0..=horizon);
                let coeff = rng.random_range(-2.0..2.0);
                let f = |s: f64, x: f64| coeff * s * x + x * x;
                let walk = integrate(&path, f, t, &set).expect("valid inputs");
                let scan = integrate_direct(&path, f, t, &set).expect("valid inputs");
                let abs = integrate(&path, |s, x| f(s, x).abs(), t, &set).expect("valid inputs");
                let rect = Rectangle::up_to(t, set.clone()).expect("t is in range");
                let count = measure(&path, &ProductSet::new(vec![rect])).count;
                walk == scan
                    && walk.count == count
                    && abs.value
                        <= abs.certificate * count as f64 * (1.0 + 1e-12) + f64::MIN_POSITIVE
            },
        ),
        run_property(
            "enumeration_matches_comparison_sort",
            seed,
            3,
            cases,
            |rng| {
                let n = rng.random_range(0..400usize);
                let values: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
                let mut sorted = values.clone();
                sorted.sort_by(f64::total_cmp);
                sorted.dedup();
                enumerate_finite_set(&values) == sorted
            },
        ),
        run_property(
            "measure_is_additive_on_disjoint_rectangles",
            seed,
            4,
            cases,
            |rng| {
                let path = random_path(rng, 200, horizon);
                let set = random_zero_separated_set(rng);
                let split = rng.random_range(0.5..horizon - 0.5);
                let just_after = f64::from_bits(split.to_bits() + 1);
                let r1 = Rectangle::new(0.0, split, set.clone()).expect("valid window");
                let r2 = Rectangle::new(just_after, horizon, set.clone()).expect("valid window");
                let m1 = measure(&path, &ProductSet::new(vec![r1.clone()])).count;
                let m2 = measure(&path, &ProductSet::new(vec![r2.clone()])).count;
                let m12 = measure(&path, &ProductSet::new(vec![r1, r2])).count;
                m12 == m1 + m2
            },
        ),
        run_property("membership_matches_interval_scan", seed, 5, cases, |rng| {
            let set = random_zero_separated_set(rng);
            (0..100).all(|_| {
                let x = rng.random_range(-12.0..12.0);
                let naive = set.intervals().iter().any(|iv| {
                    let lo_ok = iv
                        .lo
                        .is_none_or(|lo| if iv.lo_closed { x >= lo } else { x > lo });
                    let hi_ok = iv
                        .hi
                        .is_none_or(|hi| if iv.hi_closed { x <= hi } else { x < hi });
                    lo_ok && hi_ok
                });
                set.contains(x) == naive
            })
        }),
        run_property("time_zero_slice_has_no_mass", seed, 6, cases, |rng| {
            let path = random_path(rng, 200, horizon);
            let everything = BorelSet::single(Interval::whole_line()).expect("valid interval");
            let slice = Rectangle::new(0.0, 0.0, everything).expect("valid window");
            measure(&path, &ProductSet::new(vec![slice])).count == 0
        }),
    ]
}
