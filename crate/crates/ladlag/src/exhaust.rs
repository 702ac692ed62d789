//! Exhaustion of a path's jump set by increasing time sequences.
//!
//! Two constructions are provided per path. The restricted exhaustion walks
//! the jumps whose sizes fall in a zero-separated Borel set by iterating
//! "first matching jump strictly after the previous one", padding with `+∞`
//! once the set is used up. The global exhaustion enumerates all jump times
//! by flattening the layered decomposition and relabelling in time order.
//!
//! The restricted construction is implemented twice on purpose: the literal
//! iterated-minimum recursion ([`exhaust_restricted`]) and a bulk filter-sort
//! ([`exhaust_restricted_filter_sort`]). The two routes must produce identical
//! sequences; the selftest suite and the acceptance tests cross-check them.

use serde::de::Error as _;
use serde::{Deserialize, Serialize};

use crate::borel::BorelSet;
use crate::error::{Error, Result};
use crate::path::{JumpEvent, RegulatedPath};

/// A jump time or the `+∞` sentinel. Serializes as a JSON number or the
/// string `"inf"`; no arithmetic is defined on it, only comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopTime {
    Finite(f64),
    Infinite,
}

impl StopTime {
    pub fn is_finite(&self) -> bool {
        matches!(self, StopTime::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            StopTime::Finite(t) => Some(*t),
            StopTime::Infinite => None,
        }
    }

    /// True iff the entry is finite and `<= t`.
    pub fn at_or_before(&self, t: f64) -> bool {
        matches!(self, StopTime::Finite(s) if *s <= t)
    }
}

impl PartialOrd for StopTime {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        use StopTime::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            (Finite(_), Infinite) => Some(std::cmp::Ordering::Less),
            (Infinite, Finite(_)) => Some(std::cmp::Ordering::Greater),
            (Infinite, Infinite) => Some(std::cmp::Ordering::Equal),
        }
    }
}

impl Serialize for StopTime {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            StopTime::Finite(t) => s.serialize_f64(*t),
            StopTime::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for StopTime {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Number(t) if t.is_finite() => Ok(StopTime::Finite(t)),
            Repr::Number(t) => Err(D::Error::custom(format!(
                "finite entries must be finite numbers, got {t}"
            ))),
            Repr::Text(s) if s == "inf" => Ok(StopTime::Infinite),
            Repr::Text(s) => Err(D::Error::custom(format!(
                "expected a number or \"inf\", got {s:?}"
            ))),
        }
    }
}

/// Whether a sequence exhausts all jumps or only those with sizes in a set.
#[derive(Debug, Clone, PartialEq)]
pub enum SequenceKind {
    Global,
    Restricted(BorelSet),
}

/// An increasing sequence of jump times, `+∞`-padded for the restricted kind.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppingSequence {
    pub kind: SequenceKind,
    pub times: Vec<StopTime>,
}

impl StoppingSequence {
    pub fn finite_times(&self) -> Vec<f64> {
        self.times.iter().filter_map(StopTime::finite).collect()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn validate(&self) -> Result<()> {
        let mut saw_infinite = false;
        let mut prev = f64::NEG_INFINITY;
        for entry in &self.times {
            match entry {
                StopTime::Finite(t) => {
                    if saw_infinite {
                        return Err(Error::Domain(
                            "finite entries may not follow +inf entries".to_string(),
                        ));
                    }
                    if *t <= 0.0 {
                        return Err(Error::Domain(format!(
                            "stopping times must be > 0, got {t}"
                        )));
                    }
                    if *t <= prev {
                        return Err(Error::Domain(
                            "finite entries must be strictly increasing".to_string(),
                        ));
                    }
                    prev = *t;
                }
                StopTime::Infinite => {
                    if matches!(self.kind, SequenceKind::Global) {
                        return Err(Error::Domain(
                            "global sequences have no +inf entries".to_string(),
                        ));
                    }
                    saw_infinite = true;
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct SequenceRepr<'a> {
    kind: &'a str,
    set: Option<&'a BorelSet>,
    times: &'a [StopTime],
}

impl Serialize for StoppingSequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (kind, set) = match &self.kind {
            SequenceKind::Global => ("global", None),
            SequenceKind::Restricted(a) => ("restricted", Some(a)),
        };
        SequenceRepr {
            kind,
            set,
            times: &self.times,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StoppingSequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            kind: String,
            set: Option<BorelSet>,
            times: Vec<StopTime>,
        }
        let r = Repr::deserialize(d)?;
        let kind = match (r.kind.as_str(), r.set) {
            ("global", None) => SequenceKind::Global,
            ("global", Some(_)) => return Err(D::Error::custom("global sequences carry no set")),
            ("restricted", Some(a)) => SequenceKind::Restricted(a),
            ("restricted", None) => {
                return Err(D::Error::custom("restricted sequences require a set"))
            }
            (other, _) => return Err(D::Error::custom(format!("unknown sequence kind {other:?}"))),
        };
        let seq = StoppingSequence {
            kind,
            times: r.times,
        };
        seq.validate().map_err(D::Error::custom)?;
        Ok(seq)
    }
}

/// First jump strictly after `after` whose size lies in `set`. This is the
/// one-step minimum of the restricted recursion; the events are sorted, so
/// the minimum is the first match past the bound.
fn first_matching_after<'a>(
    path: &'a RegulatedPath,
    set: &BorelSet,
    after: f64,
) -> Option<&'a JumpEvent> {
    let events = path.events();
    let start = events.partition_point(|e| e.time() <= after);
    events[start..].iter().find(|e| set.contains(e.delta()))
}

/// Restricted exhaustion by the literal recursion: the first entry is the
/// earliest jump with size in `set`, each following entry the earliest
/// matching jump strictly later, and `+∞` once no match remains. The
/// requested length defaults to the path's total jump count; see
/// [`exhaust_restricted_with_len`] to ask for more padding.
pub fn exhaust_restricted(path: &RegulatedPath, set: &BorelSet) -> Result<StoppingSequence> {
    exhaust_restricted_with_len(path, set, path.events().len())
}

/// As [`exhaust_restricted`] with an explicit sequence length.
pub fn exhaust_restricted_with_len(
    path: &RegulatedPath,
    set: &BorelSet,
    len: usize,
) -> Result<StoppingSequence> {
    set.require_zero_separated()?;
    let mut times = Vec::with_capacity(len);
    let mut bound = 0.0;
    while times.len() < len {
        match first_matching_after(path, set, bound) {
            Some(e) => {
                // a finite minimum is attained at a matching jump, so the
                // indicator correction leaves the entry unchanged
                times.push(StopTime::Finite(e.time()));
                bound = e.time();
            }
            None => {
                // the infimum of an empty set: this and all later entries
                times.resize(len, StopTime::Infinite);
            }
        }
    }
    Ok(StoppingSequence {
        kind: SequenceKind::Restricted(set.clone()),
        times,
    })
}

/// Restricted exhaustion by the bulk route: filter the event list by set
/// membership, sort the surviving times, pad with `+∞`. Oracle counterpart
/// of [`exhaust_restricted`].
pub fn exhaust_restricted_filter_sort(
    path: &RegulatedPath,
    set: &BorelSet,
) -> Result<StoppingSequence> {
    exhaust_restricted_filter_sort_with_len(path, set, path.events().len())
}

/// As [`exhaust_restricted_filter_sort`] with an explicit sequence length.
pub fn exhaust_restricted_filter_sort_with_len(
    path: &RegulatedPath,
    set: &BorelSet,
    len: usize,
) -> Result<StoppingSequence> {
    set.require_zero_separated()?;
    let mut finite: Vec<f64> = path
        .events()
        .iter()
        .filter(|e| set.contains(e.delta()))
        .map(JumpEvent::time)
        .collect();
    finite.sort_by(f64::total_cmp);
    finite.truncate(len);
    let mut times: Vec<StopTime> = finite.into_iter().map(StopTime::Finite).collect();
    times.resize(len, StopTime::Infinite);
    Ok(StoppingSequence {
        kind: SequenceKind::Restricted(set.clone()),
        times,
    })
}

/// Global exhaustion of all jump times: flatten the layered decomposition in
/// lexicographic cell order, then relabel into global time order.
pub fn exhaust_global(path: &RegulatedPath) -> StoppingSequence {
    let mut times = path.layered_decomposition().flatten_lex();
    times.sort_by(f64::total_cmp);
    StoppingSequence {
        kind: SequenceKind::Global,
        times: times.into_iter().map(StopTime::Finite).collect(),
    }
}

/// True iff the finite entries of `seq` are pairwise distinct and form
/// exactly the set of the path's jump times (global kind) or of the jump
/// times with size in the sequence's set (restricted kind).
pub fn check_disjoint_exhaustion(path: &RegulatedPath, seq: &StoppingSequence) -> bool {
    let mut finite = seq.finite_times();
    finite.sort_by(f64::total_cmp);
    if finite.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    let expected: Vec<f64> = match &seq.kind {
        SequenceKind::Global => path.jump_times(),
        SequenceKind::Restricted(a) => path
            .events()
            .iter()
            .filter(|e| a.contains(e.delta()))
            .map(JumpEvent::time)
            .collect(),
    };
    finite == expected
}

/// Checks the indicator identity tying the two restricted routes together:
/// for every `n`, the `n`-th entry of the recursion is at or before `t`
/// exactly when the `n`-th filtered jump is at or before `t` and its size
/// lies in the set.
pub fn remark_identity_at(path: &RegulatedPath, set: &BorelSet, t: f64) -> Result<bool> {
    let recursion = exhaust_restricted(path, set)?;
    let filtered = exhaust_restricted_filter_sort(path, set)?;
    Ok(recursion
        .times
        .iter()
        .zip(&filtered.times)
        .all(|(s_n, t_n)| {
            let lhs = s_n.at_or_before(t);
            let rhs = match t_n {
                StopTime::Finite(tn) => {
                    *tn <= t && path.event_at(*tn).is_some_and(|e| set.contains(e.delta()))
                }
                StopTime::Infinite => false,
            };
            lhs == rhs
        }))
}
