//! Closed real intervals and finite unions of them.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval endpoints out of order: {lo} > {hi}");
        Self { lo, hi }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Distance from `x` to the interval (zero inside).
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }

    pub fn dilate(&self, radius: f64) -> Interval {
        Interval::new(self.lo - radius, self.hi + radius)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then(|| Interval::new(lo, hi))
    }
}

/// Sorted, pairwise disjoint union of closed intervals.
///
/// Overlapping or touching inputs are merged, so `intervals()` never
/// contains two members sharing a point.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_intervals<I: IntoIterator<Item = Interval>>(iter: I) -> Self {
        let mut v: Vec<Interval> = iter.into_iter().collect();
        v.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<Interval> = Vec::with_capacity(v.len());
        for iv in v {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => merged.push(iv),
            }
        }
        Self { intervals: merged }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        let idx = self.intervals.partition_point(|iv| iv.hi < x);
        self.intervals.get(idx).is_some_and(|iv| iv.lo <= x)
    }

    /// Distance from `x` to the set; `f64::INFINITY` when empty.
    pub fn distance(&self, x: f64) -> f64 {
        let idx = self.intervals.partition_point(|iv| iv.hi < x);
        let mut best = f64::INFINITY;
        if let Some(iv) = self.intervals.get(idx) {
            best = best.min(iv.distance(x));
        }
        if idx > 0 {
            best = best.min(self.intervals[idx - 1].distance(x));
        }
        best
    }

    pub fn hull(&self) -> Option<Interval> {
        match (self.intervals.first(), self.intervals.last()) {
            (Some(a), Some(b)) => Some(Interval::new(a.lo, b.hi)),
            _ => None,
        }
    }

    pub fn longest(&self) -> Option<Interval> {
        self.intervals
            .iter()
            .copied()
            .max_by(|a, b| a.length().total_cmp(&b.length()))
    }

    pub fn intersect_interval(&self, window: &Interval) -> IntervalSet {
        IntervalSet {
            intervals: self
                .intervals
                .iter()
                .filter_map(|iv| iv.intersect(window))
                .collect(),
        }
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::from_intervals(
            self.intervals
                .iter()
                .chain(other.intervals.iter())
                .copied(),
        )
    }

    pub fn dilate(&self, radius: f64) -> IntervalSet {
        IntervalSet::from_intervals(self.intervals.iter().map(|iv| iv.dilate(radius)))
    }

    /// Open gaps of the set inside `window`, including uncovered stretches
    /// at either end of the window.
    pub fn gaps_within(&self, window: &Interval) -> Vec<Interval> {
        let mut gaps = Vec::new();
        let mut cursor = window.lo;
        for iv in &self.intervals {
            if iv.hi < window.lo {
                continue;
            }
            if iv.lo > window.hi {
                break;
            }
            if iv.lo > cursor {
                gaps.push(Interval::new(cursor, iv.lo.min(window.hi)));
            }
            cursor = cursor.max(iv.hi);
        }
        if cursor < window.hi {
            gaps.push(Interval::new(cursor, window.hi));
        }
        gaps
    }
}

impl FromIterator<Interval> for IntervalSet {
    fn from_iter<I: IntoIterator<Item = Interval>>(iter: I) -> Self {
        IntervalSet::from_intervals(iter)
    }
}

/// Points covered by at least `k` of the given closed intervals.
pub fn coverage_at_least(intervals: &[Interval], k: usize) -> IntervalSet {
    if k == 0 {
        return IntervalSet::from_intervals(intervals.iter().copied());
    }
    // (coordinate, is_end); starts sort before ends at equal coordinates so
    // closed intervals that touch count as overlapping there.
    let mut events: Vec<(f64, bool)> = Vec::with_capacity(2 * intervals.len());
    for iv in intervals {
        events.push((iv.lo, false));
        events.push((iv.hi, true));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut depth = 0usize;
    let mut open_at: Option<f64> = None;
    let mut out = Vec::new();
    for (x, is_end) in events {
        if is_end {
            if depth == k {
                if let Some(lo) = open_at.take() {
                    out.push(Interval::new(lo, x));
                }
            }
            depth -= 1;
        } else {
            depth += 1;
            if depth == k {
                open_at = Some(x);
            }
        }
    }
    IntervalSet::from_intervals(out)
}
