//! Per-level patterns of the arcs `[m_{n-1}, m_n]`, their side bits, level
//! counts, and the two-slope comparison.
//!
//! At depth `n` the arc `[m_{n-1}, m_n]` projects onto the same window
//! `[c, R(c)]` for every `n`, where `R` is the right inverse branch. So entry
//! `n + 1` comes from entry `n` by one shift, and the crossing gaps are the
//! adjacent pairs of levels whose orbit points lie on opposite sides of `c`.
//! Patterns are listed from `m_{n-1}` to `m_n`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::arcs::{pull_back, Branch};
use crate::error::{Error, Result};
use crate::folding::{shift_pattern, FoldTable, Pattern};
use crate::numerics::Scalar;
use crate::tentmap::{TentMap, Window};

/// Longest pattern extracted directly from the fold table.
pub const GEOMETRY_CAP: usize = 4096;
/// Longest pattern kept explicitly; longer ones are summarized.
pub const PATTERN_CAP: usize = 1 << 15;

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantEntry {
    pub n: usize,
    /// `None` once the pattern exceeds [`PATTERN_CAP`].
    pub pattern: Option<Pattern>,
    pub length: BigUint,
    /// `T^n(c) > c`.
    pub side: bool,
    /// Number of adjacent level pairs `{a, b}` (unordered, `a <= b`).
    pub pairs: BTreeMap<(usize, usize), BigUint>,
    /// `Some(ok)` when the entry was extracted from geometry and compared
    /// with the shift of the previous entry.
    pub recurrence: Option<bool>,
}

impl InvariantEntry {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "n": self.n,
            "pattern": self.pattern.as_ref().map(Pattern::to_json),
            "side": self.side,
            "length": self.length.to_string(),
        });
        if let Some(ok) = self.recurrence {
            v["recurrence"] = json!(ok);
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct InvariantSequence<S> {
    pub slope: S,
    pub entries: Vec<InvariantEntry>,
    /// Repeat `(i, j)` in the critical orbit, if seen by depth `N`.
    pub preperiodic: Option<(usize, usize)>,
}

impl<S: Scalar> InvariantSequence<S> {
    pub fn recurrence_holds(&self) -> bool {
        self.entries.iter().all(|e| e.recurrence != Some(false))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "slope": self.slope.to_json(),
            "preperiodic": self.preperiodic.map(|(i, j)| json!({"i": i, "j": j})),
            "entries": self.entries.iter().map(InvariantEntry::to_json).collect::<Vec<_>>(),
        })
    }
}

/// `side[L - 1] = c_L > c` for `L = 1..=n`.
pub fn side_bits<S: Scalar>(map: &TentMap<S>, n: usize) -> Result<Vec<bool>> {
    let c = map.c();
    map.orbit_points(n)
        .iter()
        .enumerate()
        .map(|(idx, ci)| match ci.try_cmp(&c)? {
            std::cmp::Ordering::Equal => Err(Error::PreperiodicOrbit {
                index: idx + 1,
                certified: true,
            }),
            ord => Ok(ord == std::cmp::Ordering::Greater),
        })
        .collect()
}

/// The window of `[m_{n-1}, m_n]` at depth `n`, as `[c, R(c)]`.
pub fn invariant_window<S: Scalar>(map: &TentMap<S>) -> Result<Window<S>> {
    let c = map.c();
    let r = pull_back(map, Branch::Right, &c)?;
    Window::new(c, r)
}

fn crosses(sides: &[bool], a: usize, b: usize) -> bool {
    sides[a - 1] != sides[b - 1]
}

fn pair_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Gap flags for `shift_pattern` on an arc-ordered pattern whose ends are
/// turning points.
fn symbolic_flags(p: &Pattern, sides: &[bool]) -> Vec<bool> {
    let l = p.levels();
    let mut out = vec![false];
    out.extend(l.windows(2).map(|w| crosses(sides, w[0], w[1])));
    out.push(false);
    out
}

fn pairs_of(p: &Pattern) -> BTreeMap<(usize, usize), BigUint> {
    let mut out = BTreeMap::new();
    for w in p.levels().windows(2) {
        *out.entry(pair_key(w[0], w[1])).or_insert_with(BigUint::zero) += 1u32;
    }
    out
}

fn shift_pairs(
    pairs: &BTreeMap<(usize, usize), BigUint>,
    sides: &[bool],
) -> BTreeMap<(usize, usize), BigUint> {
    let mut out: BTreeMap<(usize, usize), BigUint> = BTreeMap::new();
    for (&(a, b), k) in pairs {
        if crosses(sides, a, b) {
            *out.entry(pair_key(a + 1, 1)).or_insert_with(BigUint::zero) += k;
            *out.entry(pair_key(1, b + 1)).or_insert_with(BigUint::zero) += k;
        } else {
            *out.entry(pair_key(a + 1, b + 1)).or_insert_with(BigUint::zero) += k;
        }
    }
    out
}

/// Arc-ordered pattern of the window at depth `n`, from the fold table.
fn geometric_pattern<S: Scalar>(map: &TentMap<S>, n: usize, w: &Window<S>) -> Result<(Pattern, Vec<bool>)> {
    let table = FoldTable::build(map, n, w)?;
    let mut p = table.pattern().0;
    p.reverse();
    let mut flags = table.gap_crossings(&map.c())?;
    flags.reverse();
    Ok((Pattern(p), flags))
}

/// Entries `n = 2..=big_n` of the invariant sequence.
pub fn invariant_sequence<S: Scalar>(map: &TentMap<S>, big_n: usize) -> Result<InvariantSequence<S>> {
    invariant_sequence_with(map, big_n, GEOMETRY_CAP)
}

/// [`invariant_sequence`] with geometric cross-checks up to `geometry_cap`
/// pattern entries.
pub fn invariant_sequence_with<S: Scalar>(
    map: &TentMap<S>,
    big_n: usize,
    geometry_cap: usize,
) -> Result<InvariantSequence<S>> {
    if big_n < 2 {
        return Err(Error::InvalidArgument(format!("depth {} < 2", big_n)));
    }
    let sides = side_bits(map, big_n)?;
    let w = invariant_window(map)?;

    let mut entries = Vec::with_capacity(big_n - 1);
    // Symbolic state: explicit pattern while short, pair counts always.
    let mut pattern = Some(Pattern(vec![1, 2]));
    let mut pairs = pairs_of(pattern.as_ref().expect("initial pattern"));
    let mut length = BigUint::from(2u32);
    let mut geometric: Option<(Pattern, Vec<bool>)> = Some(geometric_pattern(map, 2, &w)?);
    let mut recurrence = Some(geometric.as_ref().map(|g| &g.0) == pattern.as_ref());

    for n in 2..=big_n {
        entries.push(InvariantEntry {
            n,
            pattern: pattern.clone(),
            length: length.clone(),
            side: sides[n - 1],
            pairs: pairs.clone(),
            recurrence,
        });
        if n == big_n {
            break;
        }

        let crossings: BigUint = pairs
            .iter()
            .filter(|(&(a, b), _)| crosses(&sides, a, b))
            .map(|(_, k)| k.clone())
            .sum();
        length += crossings;
        let next_pairs = shift_pairs(&pairs, &sides);
        let next_pattern = match &pattern {
            Some(p) if length <= BigUint::from(PATTERN_CAP) => {
                Some(shift_pattern(p, &symbolic_flags(p, &sides))?)
            }
            _ => None,
        };

        recurrence = None;
        if let Some((gp, gflags)) = geometric.take() {
            if length <= BigUint::from(geometry_cap) {
                let shifted = shift_pattern(&gp, &gflags)?;
                let next = geometric_pattern(map, n + 1, &w)?;
                let ok = next.0 == shifted && Some(&next.0) == next_pattern.as_ref();
                recurrence = Some(ok);
                geometric = Some(next);
            }
        }
        pattern = next_pattern;
        pairs = next_pairs;
    }

    let preperiodic = map
        .critical_orbit(big_n.max(3))
        .ok()
        .and_then(|o| o.preperiodic_at);
    Ok(InvariantSequence {
        slope: map.slope().clone(),
        entries,
        preperiodic,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MismatchReason {
    Pattern,
    Side,
}

impl MismatchReason {
    pub fn as_str(self) -> &'static str {
        match self {
            MismatchReason::Pattern => "pattern-mismatch",
            MismatchReason::Side => "side-mismatch",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub n: usize,
    pub reason: MismatchReason,
}

impl Mismatch {
    pub fn to_json(&self) -> Value {
        json!({"n": self.n, "reason": self.reason.as_str()})
    }
}

fn same_pattern(a: &InvariantEntry, b: &InvariantEntry) -> bool {
    match (&a.pattern, &b.pattern) {
        (Some(p), Some(q)) => p == q,
        _ => a.length == b.length && a.pairs == b.pairs,
    }
}

/// First `n <= big_n` where the invariant sequences differ.
///
/// Past [`PATTERN_CAP`] patterns are compared through their length and
/// adjacent-pair counts.
pub fn distinguish<S: Scalar>(a: &TentMap<S>, b: &TentMap<S>, big_n: usize) -> Result<Option<Mismatch>> {
    let (sa, sb) = rayon::join(|| invariant_sequence(a, big_n), || invariant_sequence(b, big_n));
    let (sa, sb) = (sa?, sb?);
    for (ea, eb) in sa.entries.iter().zip(&sb.entries) {
        if !same_pattern(ea, eb) {
            return Ok(Some(Mismatch {
                n: ea.n,
                reason: MismatchReason::Pattern,
            }));
        }
        if ea.side != eb.side {
            return Ok(Some(Mismatch {
                n: ea.n,
                reason: MismatchReason::Side,
            }));
        }
    }
    Ok(None)
}

/// Number of level-`n` points in `[m_k, m_{k+1})` at depth `k + 1`.
pub fn count_levels<S: Scalar>(map: &TentMap<S>, k: usize, n: usize) -> Result<BigUint> {
    if k < 1 || n < 1 {
        return Err(Error::InvalidArgument(format!("count_levels needs K, n >= 1 (got {}, {})", k, n)));
    }
    let depth = k + 1;
    if n > depth {
        return Ok(BigUint::zero());
    }
    let sides = side_bits(map, depth.max(2))?;
    // Depth 1: the window is one monotone lap with only `c` as a turning
    // point. From depth 2 on both ends are turning points.
    if depth == 1 {
        return Ok(BigUint::zero());
    }
    let mut pairs = pairs_of(&Pattern(vec![1, 2]));
    for _ in 2..depth {
        pairs = shift_pairs(&pairs, &sides);
    }
    // Each interior point sits in two pairs, each end in one.
    let (first, last) = (depth - 1, depth);
    let mut twice = BigUint::zero();
    for (&(a, b), m) in &pairs {
        if a == n {
            twice += m;
        }
        if b == n {
            twice += m;
        }
    }
    if first == n {
        twice += BigUint::one();
    }
    if last == n {
        twice += BigUint::one();
    }
    let mut count = twice >> 1u32;
    if last == n {
        count -= BigUint::one();
    }
    Ok(count)
}

/// Direct count from the fold table, for cross-checking [`count_levels`].
pub fn count_levels_direct<S: Scalar>(map: &TentMap<S>, k: usize, n: usize) -> Result<usize> {
    let w = invariant_window(map)?;
    let (p, _) = geometric_pattern(map, k + 1, &w)?;
    let levels = p.levels();
    Ok(levels[..levels.len() - 1].iter().filter(|&&l| l == n).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn map(n: i64, d: i64) -> TentMap<BigRational> {
        TentMap::new(BigRational::new(n.into(), d.into())).unwrap()
    }

    #[test]
    fn side_bits_three_halves() {
        let s = side_bits(&map(3, 2), 7).unwrap();
        assert_eq!(&s[2..7], &[true, true, true, true, false]);
    }

    #[test]
    fn base_entry_and_recurrence() {
        let seq = invariant_sequence(&map(3, 2), 15).unwrap();
        assert_eq!(seq.entries[0].pattern, Some(Pattern(vec![1, 2])));
        assert!(seq.entries.iter().all(|e| e.recurrence == Some(true)));
        for e in &seq.entries {
            let p = e.pattern.as_ref().unwrap();
            assert_eq!(p.levels().first(), Some(&(e.n - 1)));
            assert_eq!(p.levels().last(), Some(&e.n));
            assert_eq!(BigUint::from(p.len()), e.length);
        }
    }

    #[test]
    fn distinguish_identity_and_pair() {
        assert_eq!(distinguish(&map(3, 2), &map(3, 2), 40).unwrap(), None);
        let ab = distinguish(&map(3, 2), &map(7, 4), 40).unwrap().unwrap();
        let ba = distinguish(&map(7, 4), &map(3, 2), 40).unwrap().unwrap();
        assert_eq!(ab, ba);
        assert!(ab.n <= 40);
    }

    #[test]
    fn level_counts_match_direct_count() {
        let m = map(8, 5);
        for k in 1..=12 {
            for n in 1..=k + 2 {
                let sym = count_levels(&m, k, n).unwrap();
                let direct = count_levels_direct(&m, k, n).unwrap();
                assert_eq!(sym, BigUint::from(direct), "K = {}, n = {}", k, n);
            }
            assert_eq!(count_levels(&m, k, k).unwrap(), BigUint::one());
            assert!(count_levels(&m, k, k + 2).unwrap().is_zero());
        }
    }
}
