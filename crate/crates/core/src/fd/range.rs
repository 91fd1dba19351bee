//! Finite ranges of naturals: intervals, or bit vectors once a hole appears.

use std::fmt;

/// Largest value an FD variable can take.
pub const MAX_INTEGER: i64 = (1 << 28) - 1;

/// Widest span a bit-vector domain may cover.
pub const SPARSE_SPAN: i64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Range {
    Empty,
    Interval(i64, i64),
    /// Bit i of `bits` stands for value `base + i`; `min`/`max` are cached.
    Sparse { base: i64, bits: Vec<u64>, min: i64, max: i64 },
    /// Sorted, disjoint, non-adjacent runs; used when a set with holes is
    /// wider than `SPARSE_SPAN`.
    Runs(Vec<(i64, i64)>),
}

fn coalesce(mut runs: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    runs.retain(|(lo, hi)| lo <= hi);
    runs.sort_unstable();
    let mut out: Vec<(i64, i64)> = Vec::with_capacity(runs.len());
    for (lo, hi) in runs {
        match out.last_mut() {
            Some((_, h)) if lo <= h.saturating_add(1) => *h = (*h).max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

impl Range {
    pub fn interval(lo: i64, hi: i64) -> Range {
        let (lo, hi) = (lo.max(0), hi.min(MAX_INTEGER));
        if lo > hi {
            Range::Empty
        } else {
            Range::Interval(lo, hi)
        }
    }

    pub fn single(v: i64) -> Range {
        Range::interval(v, v)
    }

    pub fn full() -> Range {
        Range::Interval(0, MAX_INTEGER)
    }

    /// Build from runs in any order; values outside 0..MAX_INTEGER are dropped.
    pub fn from_runs(runs: Vec<(i64, i64)>) -> Range {
        let runs = coalesce(runs.into_iter().map(|(lo, hi)| (lo.max(0), hi.min(MAX_INTEGER))).collect());
        match runs.len() {
            0 => Range::Empty,
            1 => Range::Interval(runs[0].0, runs[0].1),
            n => {
                let (lo, hi) = (runs[0].0, runs[n - 1].1);
                if hi - lo >= SPARSE_SPAN {
                    return Range::Runs(runs);
                }
                let base = lo - lo.rem_euclid(64);
                let mut bits = vec![0u64; ((hi - base) / 64 + 1) as usize];
                for (a, b) in runs {
                    for v in a..=b {
                        let i = (v - base) as usize;
                        bits[i / 64] |= 1 << (i % 64);
                    }
                }
                Range::Sparse { base, bits, min: lo, max: hi }
            }
        }
    }

    /// Build from arbitrary values; out-of-bounds values are dropped.
    pub fn from_values(vals: impl IntoIterator<Item = i64>) -> Range {
        Range::from_runs(vals.into_iter().map(|v| (v, v)).collect())
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Range::Empty)
    }

    pub fn min(&self) -> Option<i64> {
        match self {
            Range::Empty => None,
            Range::Interval(lo, _) => Some(*lo),
            Range::Sparse { min, .. } => Some(*min),
            Range::Runs(r) => Some(r[0].0),
        }
    }

    pub fn max(&self) -> Option<i64> {
        match self {
            Range::Empty => None,
            Range::Interval(_, hi) => Some(*hi),
            Range::Sparse { max, .. } => Some(*max),
            Range::Runs(r) => Some(r[r.len() - 1].1),
        }
    }

    pub fn size(&self) -> i64 {
        match self {
            Range::Empty => 0,
            Range::Interval(lo, hi) => hi - lo + 1,
            Range::Sparse { bits, .. } => bits.iter().map(|w| w.count_ones() as i64).sum(),
            Range::Runs(r) => r.iter().map(|(lo, hi)| hi - lo + 1).sum(),
        }
    }

    pub fn singleton(&self) -> Option<i64> {
        match self {
            Range::Interval(lo, hi) if lo == hi => Some(*lo),
            Range::Sparse { min, max, .. } if min == max => Some(*min),
            _ => None,
        }
    }

    pub fn contains(&self, v: i64) -> bool {
        match self {
            Range::Empty => false,
            Range::Interval(lo, hi) => *lo <= v && v <= *hi,
            Range::Sparse { base, bits, min, max } => {
                if v < *min || v > *max {
                    return false;
                }
                let i = (v - base) as usize;
                bits[i / 64] >> (i % 64) & 1 == 1
            }
            Range::Runs(r) => match r.binary_search_by(|(lo, _)| lo.cmp(&v)) {
                Ok(_) => true,
                Err(0) => false,
                Err(k) => v <= r[k - 1].1,
            },
        }
    }

    /// True for the bit-vector form.
    pub fn is_sparse(&self) -> bool {
        matches!(self, Range::Sparse { .. })
    }

    /// Values in ascending order.
    pub fn values(&self) -> Box<dyn Iterator<Item = i64> + '_> {
        match self {
            Range::Empty => Box::new(std::iter::empty()),
            Range::Interval(lo, hi) => Box::new(*lo..=*hi),
            Range::Sparse { base, bits, .. } => Box::new(bits.iter().enumerate().flat_map(move |(k, &w)| {
                let b = *base + k as i64 * 64;
                (0..64).filter(move |i| w >> i & 1 == 1).map(move |i| b + i)
            })),
            Range::Runs(r) => Box::new(r.iter().flat_map(|&(lo, hi)| lo..=hi)),
        }
    }

    /// Maximal runs of consecutive values.
    pub fn runs(&self) -> Vec<(i64, i64)> {
        match self {
            Range::Empty => vec![],
            Range::Interval(lo, hi) => vec![(*lo, *hi)],
            Range::Runs(r) => r.clone(),
            Range::Sparse { .. } => {
                let mut out: Vec<(i64, i64)> = Vec::new();
                for v in self.values() {
                    match out.last_mut() {
                        Some((_, hi)) if *hi + 1 == v => *hi = v,
                        _ => out.push((v, v)),
                    }
                }
                out
            }
        }
    }

    /// Same set of values, regardless of representation.
    pub fn same_values(&self, other: &Range) -> bool {
        self.runs() == other.runs()
    }

    /// Bit-vector form of the same set, when its span allows one.
    pub fn force_sparse(&self) -> Range {
        match self {
            Range::Interval(lo, hi) if hi - lo < SPARSE_SPAN => {
                let base = lo - lo.rem_euclid(64);
                let mut bits = vec![0u64; ((hi - base) / 64 + 1) as usize];
                for v in *lo..=*hi {
                    let i = (v - base) as usize;
                    bits[i / 64] |= 1 << (i % 64);
                }
                Range::Sparse { base, bits, min: *lo, max: *hi }
            }
            r => r.clone(),
        }
    }

    fn from_bits(base: i64, mut bits: Vec<u64>) -> Range {
        let Some(first) = bits.iter().position(|&w| w != 0) else { return Range::Empty };
        let last = bits.iter().rposition(|&w| w != 0).unwrap();
        let min = base + first as i64 * 64 + bits[first].trailing_zeros() as i64;
        let max = base + last as i64 * 64 + 63 - bits[last].leading_zeros() as i64;
        let count: i64 = bits.iter().map(|w| w.count_ones() as i64).sum();
        if count == max - min + 1 {
            return Range::Interval(min, max);
        }
        bits.truncate(last + 1);
        bits.drain(..first);
        Range::Sparse { base: base + first as i64 * 64, bits, min, max }
    }

    pub fn intersect(&self, other: &Range) -> Range {
        match (self, other) {
            (Range::Empty, _) | (_, Range::Empty) => Range::Empty,
            (Range::Interval(a, b), Range::Interval(c, d)) => Range::interval(*a.max(c), *b.min(d)),
            (Range::Interval(lo, hi), Range::Sparse { base, bits, min, max })
            | (Range::Sparse { base, bits, min, max }, Range::Interval(lo, hi)) => {
                if lo <= min && max <= hi {
                    return Range::Sparse { base: *base, bits: bits.clone(), min: *min, max: *max };
                }
                let (lo, hi) = (*lo.max(min), *hi.min(max));
                if lo > hi {
                    return Range::Empty;
                }
                let mut out = bits.clone();
                for (k, w) in out.iter_mut().enumerate() {
                    let wlo = base + k as i64 * 64;
                    for i in 0..64 {
                        let v = wlo + i;
                        if v < lo || v > hi {
                            *w &= !(1u64 << i);
                        }
                    }
                }
                Range::from_bits(*base, out)
            }
            (Range::Sparse { base: b1, bits: w1, .. }, Range::Sparse { base: b2, bits: w2, .. }) => {
                let base = *b1.max(b2);
                let end = (b1 + w1.len() as i64 * 64).min(b2 + w2.len() as i64 * 64);
                if base >= end {
                    return Range::Empty;
                }
                let n = ((end - base) / 64) as usize;
                let o1 = ((base - b1) / 64) as usize;
                let o2 = ((base - b2) / 64) as usize;
                Range::from_bits(base, (0..n).map(|k| w1[o1 + k] & w2[o2 + k]).collect())
            }
            _ => {
                let (a, b) = (self.runs(), other.runs());
                let (mut i, mut j) = (0, 0);
                let mut out = Vec::new();
                while i < a.len() && j < b.len() {
                    let lo = a[i].0.max(b[j].0);
                    let hi = a[i].1.min(b[j].1);
                    if lo <= hi {
                        out.push((lo, hi));
                    }
                    if a[i].1 < b[j].1 {
                        i += 1;
                    } else {
                        j += 1;
                    }
                }
                Range::from_runs(out)
            }
        }
    }

    pub fn union(&self, other: &Range) -> Range {
        match (self, other) {
            (Range::Empty, r) | (r, Range::Empty) => r.clone(),
            (Range::Interval(a, b), Range::Interval(c, d)) if *c <= b + 1 && *a <= d + 1 => {
                Range::Interval(*a.min(c), *b.max(d))
            }
            _ => {
                let mut r = self.runs();
                r.extend(other.runs());
                Range::from_runs(r)
            }
        }
    }

    /// Complement within 0..MAX_INTEGER.
    pub fn complement(&self) -> Range {
        let mut out = Vec::new();
        let mut next = 0;
        for (lo, hi) in self.runs() {
            if lo > next {
                out.push((next, lo - 1));
            }
            next = hi + 1;
        }
        if next <= MAX_INTEGER {
            out.push((next, MAX_INTEGER));
        }
        Range::from_runs(out)
    }

    /// Remove a single value.
    pub fn remove(&self, v: i64) -> Range {
        if !self.contains(v) {
            return self.clone();
        }
        match self {
            Range::Interval(lo, hi) if v == *lo => Range::interval(lo + 1, *hi),
            Range::Interval(lo, hi) if v == *hi => Range::interval(*lo, hi - 1),
            Range::Sparse { base, bits, .. } => {
                let mut bits = bits.clone();
                let i = (v - base) as usize;
                bits[i / 64] &= !(1u64 << (i % 64));
                Range::from_bits(*base, bits)
            }
            _ => self.intersect(&Range::single(v).complement()),
        }
    }

    /// Pointwise `v + c`.
    pub fn shift(&self, c: i64) -> Range {
        match self {
            Range::Empty => Range::Empty,
            Range::Interval(lo, hi) => Range::interval(lo.saturating_add(c), hi.saturating_add(c)),
            _ => Range::from_runs(self.runs().into_iter().map(|(a, b)| (a.saturating_add(c), b.saturating_add(c))).collect()),
        }
    }

    /// Pointwise `v * c`. Sets larger than `SPARSE_SPAN` are approximated by their hull.
    pub fn scale(&self, c: i64) -> Range {
        match self {
            Range::Empty => Range::Empty,
            _ if c == 0 => Range::single(0),
            _ if c == 1 => self.clone(),
            _ if self.size() > SPARSE_SPAN => {
                let (a, b) = (self.min().unwrap().saturating_mul(c), self.max().unwrap().saturating_mul(c));
                Range::interval(a.min(b), a.max(b))
            }
            _ => Range::from_values(self.values().map(|v| v.saturating_mul(c))),
        }
    }

    /// Pointwise floor division by `c`.
    pub fn div(&self, c: i64) -> Range {
        match self {
            Range::Empty => Range::Empty,
            _ if c == 0 => Range::Empty,
            _ if c > 0 => Range::from_runs(self.runs().into_iter().map(|(a, b)| (a.div_euclid(c), b.div_euclid(c))).collect()),
            _ => Range::from_runs(self.runs().into_iter().map(|(a, b)| (b.div_euclid(c), a.div_euclid(c))).collect()),
        }
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("{}");
        }
        let parts: Vec<String> =
            self.runs().iter().map(|(lo, hi)| if lo == hi { lo.to_string() } else { format!("{lo}..{hi}") }).collect();
        f.write_str(&parts.join(":"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remove_interior_goes_sparse() {
        let r = Range::interval(0, 9).remove(4);
        assert!(r.is_sparse());
        assert_eq!(r.size(), 9);
        assert!(!r.contains(4));
        assert_eq!(r.to_string(), "0..3:5..9");
    }

    #[test]
    fn sparse_collapses_back() {
        let r = Range::from_values([3, 4, 5]);
        assert_eq!(r, Range::Interval(3, 5));
        let s = Range::interval(0, 9).remove(4).intersect(&Range::interval(5, 20));
        assert_eq!(s, Range::Interval(5, 9));
    }

    #[test]
    fn complement_of_singleton() {
        let c = Range::single(0).complement();
        assert_eq!(c, Range::Interval(1, MAX_INTEGER));
        let c = Range::single(5).complement();
        assert_eq!(c.min(), Some(0));
        assert!(!c.contains(5));
        assert!(c.contains(MAX_INTEGER));
    }
}
