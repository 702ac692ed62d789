//! Finite representation of one regulated trajectory on a bounded horizon.
//!
//! A path is an affine drift plus finitely many jump events. Each event
//! carries the two-sided jump size `delta = f(t+) - f(t-)` and a spot weight
//! `theta` placing the value at the point itself: `f(t) = f(t-) + theta*delta`.
//! `theta = 1` is the right-continuous case, `theta = 0` the left-continuous
//! case, and any other weight a genuine double discontinuity. Both one-sided
//! limits exist everywhere by construction, which is exactly the regulated
//! (làdlàg) path class restricted to finitely many events.

use std::collections::BTreeMap;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which value of the path to read at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// The left limit `f(t-)`.
    Left,
    /// The value at the point itself, `f(t)`.
    Spot,
    /// The right limit `f(t+)`.
    Right,
}

/// A single discontinuity of a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpEvent {
    time: f64,
    delta: f64,
    theta: f64,
}

impl JumpEvent {
    /// A jump at `time > 0` of size `delta != 0` with spot weight `theta`.
    pub fn new(time: f64, delta: f64, theta: f64) -> Result<Self> {
        if time <= 0.0 || !time.is_finite() {
            return Err(Error::Domain(format!(
                "jump time must be finite and > 0, got {time}"
            )));
        }
        if delta == 0.0 || !delta.is_finite() {
            return Err(Error::Domain(format!(
                "jump size must be finite and nonzero, got {delta}"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::Domain(format!(
                "spot weight must be finite, got {theta}"
            )));
        }
        Ok(Self { time, delta, theta })
    }

    /// A right-continuous jump (`theta = 1`).
    pub fn cadlag(time: f64, delta: f64) -> Result<Self> {
        Self::new(time, delta, 1.0)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

impl<'de> Deserialize<'de> for JumpEvent {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            time: f64,
            delta: f64,
            theta: f64,
        }
        let r = Repr::deserialize(deserializer)?;
        JumpEvent::new(r.time, r.delta, r.theta).map_err(serde::de::Error::custom)
    }
}

/// One regulated trajectory: `x0 + drift*t` plus ordered jump events.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegulatedPath {
    x0: f64,
    drift: f64,
    horizon: f64,
    events: Vec<JumpEvent>,
}

impl RegulatedPath {
    /// Validates that event times are strictly increasing and lie in
    /// `(0, horizon]`.
    pub fn new(x0: f64, drift: f64, horizon: f64, events: Vec<JumpEvent>) -> Result<Self> {
        if !x0.is_finite() || !drift.is_finite() {
            return Err(Error::Domain("x0 and drift must be finite".to_string()));
        }
        if horizon <= 0.0 || !horizon.is_finite() {
            return Err(Error::Domain(format!(
                "horizon must be finite and > 0, got {horizon}"
            )));
        }
        for pair in events.windows(2) {
            if pair[0].time >= pair[1].time {
                return Err(Error::Domain(format!(
                    "event times must be strictly increasing, got {} then {}",
                    pair[0].time, pair[1].time
                )));
            }
        }
        if let Some(last) = events.last() {
            if last.time > horizon {
                return Err(Error::Domain(format!(
                    "event at {} lies beyond the horizon {horizon}",
                    last.time
                )));
            }
        }
        Ok(Self {
            x0,
            drift,
            horizon,
            events,
        })
    }

    /// A path with no jumps.
    pub fn constant(x0: f64, horizon: f64) -> Result<Self> {
        Self::new(x0, 0.0, horizon, Vec::new())
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn events(&self) -> &[JumpEvent] {
        &self.events
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t >= 0.0 && t <= self.horizon {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "t = {t} outside [0, {}]",
                self.horizon
            )))
        }
    }

    /// The event sitting exactly at `t`, if any.
    pub fn event_at(&self, t: f64) -> Option<&JumpEvent> {
        self.events
            .binary_search_by(|e| e.time.total_cmp(&t))
            .ok()
            .map(|i| &self.events[i])
    }

    /// Evaluates the path at `t` on the requested side. Jumps strictly
    /// before `t` contribute fully; an event at exactly `t` contributes
    /// nothing to the left limit, `theta*delta` to the spot value and
    /// `delta` to the right limit. At `t = 0` all three sides equal `x0`.
    pub fn eval(&self, t: f64, side: Side) -> Result<f64> {
        self.check_time(t)?;
        let mut value = self.x0 + self.drift * t;
        for e in &self.events {
            if e.time < t {
                value += e.delta;
            } else {
                if e.time == t {
                    value += match side {
                        Side::Left => 0.0,
                        Side::Spot => e.theta * e.delta,
                        Side::Right => e.delta,
                    };
                }
                break;
            }
        }
        Ok(value)
    }

    /// The two-sided jump size `f(t+) - f(t-)`: the event's `delta` when an
    /// event sits at `t`, zero otherwise, and always zero at `t = 0`.
    pub fn jump_at(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.event_at(t).map_or(0.0, JumpEvent::delta))
    }

    /// Strictly increasing times of jumps with `|delta| > eps`. With
    /// `eps = 0` this is the full jump-time set of the path.
    pub fn jump_set_eps(&self, eps: f64) -> Result<Vec<f64>> {
        if eps.is_nan() || eps < 0.0 {
            return Err(Error::Domain(format!("eps must be >= 0, got {eps}")));
        }
        Ok(self
            .events
            .iter()
            .filter(|e| e.delta.abs() > eps)
            .map(JumpEvent::time)
            .collect())
    }

    /// All jump times in increasing order.
    pub fn jump_times(&self) -> Vec<f64> {
        self.events.iter().map(JumpEvent::time).collect()
    }

    /// Sorts every jump into its finite cell: unit time window crossed with
    /// magnitude band. See [`LayeredDecomposition`].
    pub fn layered_decomposition(&self) -> LayeredDecomposition {
        let mut cells: BTreeMap<CellIndex, Vec<f64>> = BTreeMap::new();
        for e in &self.events {
            let idx = CellIndex {
                window: time_window(e.time),
                band: magnitude_band(e.delta),
            };
            cells.entry(idx).or_default().push(e.time);
        }
        LayeredDecomposition { cells }
    }
}

impl<'de> Deserialize<'de> for RegulatedPath {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            x0: f64,
            drift: f64,
            horizon: f64,
            events: Vec<JumpEvent>,
        }
        let r = Repr::deserialize(deserializer)?;
        RegulatedPath::new(r.x0, r.drift, r.horizon, r.events).map_err(serde::de::Error::custom)
    }
}

/// Key of one decomposition cell: time window index `window` (the window is
/// `(window-1, window]`) and magnitude band `band` (band 1 holds `|delta| > 1`,
/// band `m+1` holds `1/(m+1) < |delta| <= 1/m`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellIndex {
    pub window: u64,
    pub band: u64,
}

/// Index of the unit time window `(window-1, window]` containing `t > 0`.
pub fn time_window(t: f64) -> u64 {
    debug_assert!(t > 0.0 && t.is_finite());
    t.ceil() as u64
}

/// Magnitude bands above 2^-52 collapse to the same f64 threshold, so the
/// band index is capped there.
const MAX_BAND_DENOM: u64 = 1 << 52;

/// Magnitude band of a jump size. Thresholds `1/m` are computed in f64 and
/// the comparison is strict below, weak above: band 1 is `(1, ∞)` and band
/// `m+1` is `(1/(m+1), 1/m]` on the computed thresholds.
pub fn magnitude_band(delta: f64) -> u64 {
    let mag = delta.abs();
    debug_assert!(mag > 0.0 && mag.is_finite());
    if mag > 1.0 {
        return 1;
    }
    let inv = 1.0 / mag;
    let mut m = if inv >= MAX_BAND_DENOM as f64 {
        MAX_BAND_DENOM
    } else {
        (inv.floor() as u64).max(1)
    };
    while mag > 1.0 / m as f64 {
        m -= 1;
    }
    while m < MAX_BAND_DENOM && mag <= 1.0 / (m + 1) as f64 {
        m += 1;
    }
    m + 1
}

/// The jump times of a path partitioned into finite cells indexed by
/// (time window, magnitude band). Every cell is finite because a bounded
/// window can hold only finitely many jumps above any fixed magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredDecomposition {
    cells: BTreeMap<CellIndex, Vec<f64>>,
}

impl LayeredDecomposition {
    pub fn cells(&self) -> &BTreeMap<CellIndex, Vec<f64>> {
        &self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Total number of jump times across all cells.
    pub fn len(&self) -> usize {
        self.cells.values().map(Vec::len).sum()
    }

    /// Concatenates all cells in lexicographic (window, band) order.
    pub fn flatten_lex(&self) -> Vec<f64> {
        self.cells.values().flatten().copied().collect()
    }

    /// True iff the cells are pairwise disjoint, jointly cover exactly the
    /// path's jump times, and every member satisfies its cell's window and
    /// band membership.
    pub fn is_exact_partition(&self, path: &RegulatedPath) -> bool {
        let mut seen = Vec::with_capacity(path.events().len());
        for (idx, times) in &self.cells {
            for &t in times {
                let Some(event) = path.event_at(t) else {
                    return false;
                };
                if time_window(t) != idx.window || magnitude_band(event.delta()) != idx.band {
                    return false;
                }
                seen.push(t);
            }
        }
        seen.sort_by(f64::total_cmp);
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
        seen == path.jump_times()
    }
}

impl Serialize for LayeredDecomposition {
    fn serialize<S>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error>
    where
        S: serde::Serializer,
    {
        #[derive(Serialize)]
        struct Cell<'a> {
            window: u64,
            band: u64,
            times: &'a [f64],
        }
        let mut seq = serializer.serialize_seq(Some(self.cells.len()))?;
        for (idx, times) in &self.cells {
            seq.serialize_element(&Cell {
                window: idx.window,
                band: idx.band,
                times,
            })?;
        }
        seq.end()
    }
}

/// Enumerates a finite set of reals by the min-recursion
/// `s_1 = min(d)`, `s_n = min(d ∩ (s_{n-1}, ∞))`. The result is the set's
/// elements in strictly increasing order.
pub fn enumerate_finite_set(d: &[f64]) -> Vec<f64> {
    debug_assert!(d.iter().all(|x| x.is_finite()));
    let mut out = Vec::with_capacity(d.len());
    let mut bound = f64::NEG_INFINITY;
    loop {
        let next = d
            .iter()
            .copied()
            .filter(|&x| x > bound)
            .fold(f64::INFINITY, f64::min);
        if next == f64::INFINITY {
            return out;
        }
        out.push(next);
        bound = next;
    }
}
