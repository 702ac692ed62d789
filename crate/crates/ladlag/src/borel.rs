//! Finite unions of real intervals standing in for Borel subsets of the line.
//!
//! A [`BorelSet`] is a sorted, pairwise-disjoint list of intervals with
//! optionally infinite endpoints. The class of sets whose closure excludes
//! zero plays a special role for jump analytics: jumps landing in such a set
//! have magnitude bounded away from zero, which is what makes their counting
//! measure finite on bounded time windows. [`BorelSet::is_zero_separated`]
//! tests membership in that class and [`BorelSet::separation_radius`] returns
//! the distance from zero to the closure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One real interval; `None` endpoints are unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Option<f64>,
    pub lo_closed: bool,
    pub hi: Option<f64>,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: Option<f64>, lo_closed: bool, hi: Option<f64>, hi_closed: bool) -> Self {
        Self {
            lo,
            lo_closed,
            hi,
            hi_closed,
        }
    }

    /// `[lo, hi]`
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self::new(Some(lo), true, Some(hi), true)
    }

    /// `(lo, hi)`
    pub fn open(lo: f64, hi: f64) -> Self {
        Self::new(Some(lo), false, Some(hi), false)
    }

    /// The singleton `{x}`.
    pub fn point(x: f64) -> Self {
        Self::closed(x, x)
    }

    /// `[lo, ∞)`
    pub fn at_least(lo: f64) -> Self {
        Self::new(Some(lo), true, None, false)
    }

    /// `(-∞, hi]`
    pub fn at_most(hi: f64) -> Self {
        Self::new(None, false, Some(hi), true)
    }

    /// `(-∞, ∞)`
    pub fn whole_line() -> Self {
        Self::new(None, false, None, false)
    }

    pub(crate) fn lo_value(&self) -> f64 {
        self.lo.unwrap_or(f64::NEG_INFINITY)
    }

    pub(crate) fn hi_value(&self) -> f64 {
        self.hi.unwrap_or(f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = match self.lo {
            Some(lo) => x > lo || (self.lo_closed && x == lo),
            None => true,
        };
        let below = match self.hi {
            Some(hi) => x < hi || (self.hi_closed && x == hi),
            None => true,
        };
        above && below
    }

    /// Distance from 0 to the closure of this interval.
    fn distance_to_zero(&self) -> f64 {
        let lo = self.lo_value();
        let hi = self.hi_value();
        if lo > 0.0 {
            lo
        } else if hi < 0.0 {
            -hi
        } else {
            0.0
        }
    }

    fn validate(&self) -> Result<()> {
        for (end, closed) in [(self.lo, self.lo_closed), (self.hi, self.hi_closed)] {
            match end {
                Some(v) if !v.is_finite() => {
                    return Err(Error::Domain(
                        "interval endpoints must be finite; use null for an unbounded end"
                            .to_string(),
                    ))
                }
                None if closed => {
                    return Err(Error::Domain(
                        "an unbounded interval end cannot be closed".to_string(),
                    ))
                }
                _ => {}
            }
        }
        if let (Some(lo), Some(hi)) = (self.lo, self.hi) {
            let nonempty = lo < hi || (lo == hi && self.lo_closed && self.hi_closed);
            if !nonempty {
                return Err(Error::Domain(format!(
                    "empty interval with endpoints {lo} and {hi}"
                )));
            }
        }
        Ok(())
    }
}

/// A finite union of pairwise-disjoint intervals, kept sorted by lower end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BorelSet {
    intervals: Vec<Interval>,
}

impl BorelSet {
    /// Builds a set from intervals, sorting them and rejecting overlaps.
    pub fn new(mut intervals: Vec<Interval>) -> Result<Self> {
        for iv in &intervals {
            iv.validate()?;
        }
        intervals.sort_by(|a, b| {
            (a.lo_value(), a.hi_value())
                .partial_cmp(&(b.lo_value(), b.hi_value()))
                .expect("validated endpoints are comparable")
        });
        for pair in intervals.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let disjoint = a.hi_value() < b.lo_value()
                || (a.hi_value() == b.lo_value() && !(a.hi_closed && b.lo_closed));
            if !disjoint {
                return Err(Error::Domain(format!(
                    "intervals overlap near {}",
                    b.lo_value()
                )));
            }
        }
        Ok(Self { intervals })
    }

    /// The empty set; zero-separated with infinite radius.
    pub fn empty() -> Self {
        Self {
            intervals: Vec::new(),
        }
    }

    /// Convenience for the single-interval case.
    pub fn single(interval: Interval) -> Result<Self> {
        Self::new(vec![interval])
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Membership test. Locates the candidate interval by binary search on
    /// the sorted lower ends; at most the last three intervals with lower
    /// end `<= x` can have closure touching `x`.
    pub fn contains(&self, x: f64) -> bool {
        let idx = self.intervals.partition_point(|iv| iv.lo_value() <= x);
        self.intervals[idx.saturating_sub(3)..idx]
            .iter()
            .rev()
            .any(|iv| iv.contains(x))
    }

    /// Largest `eps` such that the set misses `(-eps, eps)`; equivalently the
    /// distance from 0 to the set's closure. `+∞` for the empty set.
    pub fn separation_radius(&self) -> f64 {
        self.intervals
            .iter()
            .map(Interval::distance_to_zero)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_zero_separated(&self) -> bool {
        self.separation_radius() > 0.0
    }

    pub(crate) fn require_zero_separated(&self) -> Result<()> {
        if self.is_zero_separated() {
            Ok(())
        } else {
            Err(Error::NotInBStar)
        }
    }
}

impl<'de> Deserialize<'de> for BorelSet {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Repr {
            intervals: Vec<Interval>,
        }
        let repr = Repr::deserialize(deserializer)?;
        BorelSet::new(repr.intervals).map_err(serde::de::Error::custom)
    }
}
