//! Turning points and k-patterns of iterates `T^n` restricted to windows.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::numerics::Scalar;
use crate::tentmap::{TentMap, Window};

/// A point `t` with `T^m(t) = c` for the minimal such `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct TurningPoint<S> {
    pub position: S,
    pub m: usize,
}

/// Sequence of k-levels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Pattern(pub Vec<usize>);

impl Pattern {
    pub fn levels(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!(self.0)
    }
}

impl From<Vec<usize>> for Pattern {
    fn from(v: Vec<usize>) -> Self {
        Pattern(v)
    }
}

/// Piecewise-linear interpolation of `values` over `breakpoints`.
#[derive(Clone, Debug, PartialEq)]
pub struct PLFunction<S> {
    pub breakpoints: Vec<S>,
    pub values: Vec<S>,
}

impl<S: Scalar> PLFunction<S> {
    pub fn new(breakpoints: Vec<S>, values: Vec<S>) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: breakpoints.len(),
                got: values.len(),
            });
        }
        if breakpoints.is_empty() {
            return Err(Error::InvalidArgument("empty PL function".into()));
        }
        for w in breakpoints.windows(2) {
            if !w[0].try_lt(&w[1])? {
                return Err(Error::InvalidArgument(
                    "breakpoints must be strictly increasing".into(),
                ));
            }
        }
        Ok(PLFunction { breakpoints, values })
    }

    pub fn domain(&self) -> Window<S> {
        Window {
            lo: self.breakpoints[0].clone(),
            hi: self.breakpoints[self.breakpoints.len() - 1].clone(),
        }
    }

    /// Value at `x` by linear interpolation.
    pub fn eval(&self, x: &S) -> Result<S> {
        let bp = &self.breakpoints;
        if x.try_lt(&bp[0])? || x.try_gt(&bp[bp.len() - 1])? {
            return Err(Error::OutOfDomain(x.render()));
        }
        for k in 0..bp.len() - 1 {
            if x.try_le(&bp[k + 1])? {
                return lerp(&bp[k], &self.values[k], &bp[k + 1], &self.values[k + 1], x);
            }
        }
        Ok(self.values[bp.len() - 1].clone())
    }

    /// Restriction to `[lo, hi]` inside the domain.
    pub fn restrict(&self, lo: &S, hi: &S) -> Result<PLFunction<S>> {
        let mut xs = vec![lo.clone()];
        let mut vs = vec![self.eval(lo)?];
        for (x, v) in self.breakpoints.iter().zip(&self.values) {
            if x.try_gt(lo)? && x.try_lt(hi)? {
                xs.push(x.clone());
                vs.push(v.clone());
            }
        }
        if hi.try_gt(lo)? {
            xs.push(hi.clone());
            vs.push(self.eval(hi)?);
        }
        PLFunction::new(xs, vs)
    }

    /// `x -> f(lo + hi - x)`, the graph read backwards.
    pub fn reversed(&self) -> PLFunction<S> {
        let d = self.domain();
        let sum = d.lo.clone() + d.hi.clone();
        PLFunction {
            breakpoints: self
                .breakpoints
                .iter()
                .rev()
                .map(|x| sum.clone() - x.clone())
                .collect(),
            values: self.values.iter().rev().cloned().collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "breakpoints": self.breakpoints.iter().map(Scalar::to_json).collect::<Vec<_>>(),
            "values": self.values.iter().map(Scalar::to_json).collect::<Vec<_>>(),
        })
    }
}

fn lerp<S: Scalar>(x0: &S, y0: &S, x1: &S, y1: &S, x: &S) -> Result<S> {
    if x0.try_eq(x1)? {
        return Ok(y0.clone());
    }
    let t = (x.clone() - x0.clone()).try_div(&(x1.clone() - x0.clone()))?;
    Ok(y0.clone() + t * (y1.clone() - y0.clone()))
}

/// Graph of `T^n` on a window together with the fold data of every
/// breakpoint: `m[k] = Some(m)` when breakpoint `k` is a turning point
/// with `T^m = c`, `None` for a window end that never hits `c`.
#[derive(Clone, Debug)]
pub struct FoldTable<S> {
    pub n: usize,
    pub breakpoints: Vec<S>,
    pub values: Vec<S>,
    pub m: Vec<Option<usize>>,
}

impl<S: Scalar> FoldTable<S> {
    /// Builds the table by pulling `c` back through the monotone pieces
    /// of `T^0, T^1, ..., T^{n-1}` in turn.
    pub fn build(map: &TentMap<S>, n: usize, window: &Window<S>) -> Result<Self> {
        if window.lo.try_lt(&S::zero())? || window.hi.try_gt(&S::one())? {
            return Err(Error::OutOfDomain(format!(
                "[{}, {}]",
                window.lo.render(),
                window.hi.render()
            )));
        }
        let c = map.c();
        let degenerate = window.lo.try_eq(&window.hi)?;
        let mut xs = vec![window.lo.clone()];
        let mut ms: Vec<Option<usize>> = vec![None];
        if !degenerate {
            xs.push(window.hi.clone());
            ms.push(None);
        }
        let mut vs = xs.clone();

        for step in 0..n {
            let mut nx = Vec::with_capacity(xs.len() * 2);
            let mut nv = Vec::with_capacity(xs.len() * 2);
            let mut nm = Vec::with_capacity(xs.len() * 2);
            for k in 0..xs.len() {
                let mut mk = ms[k];
                if mk.is_none() && vs[k].try_eq(&c)? {
                    mk = Some(step);
                }
                nx.push(xs[k].clone());
                nv.push(vs[k].clone());
                nm.push(mk);
                if k + 1 < xs.len() {
                    let (va, vb) = (&vs[k], &vs[k + 1]);
                    let straddles = (va.try_lt(&c)? && c.try_lt(vb)?)
                        || (vb.try_lt(&c)? && c.try_lt(va)?);
                    if straddles {
                        let t = (c.clone() - va.clone()).try_div(&(vb.clone() - va.clone()))?;
                        let x = xs[k].clone() + t * (xs[k + 1].clone() - xs[k].clone());
                        nx.push(x);
                        nv.push(c.clone());
                        nm.push(Some(step));
                    }
                }
            }
            xs = nx;
            ms = nm;
            vs = nv.iter().map(|v| map.apply(v)).collect();
        }
        Ok(FoldTable {
            n,
            breakpoints: xs,
            values: vs,
            m: ms,
        })
    }

    pub fn turning_points(&self) -> Vec<TurningPoint<S>> {
        self.breakpoints
            .iter()
            .zip(&self.m)
            .filter_map(|(x, m)| {
                m.map(|m| TurningPoint {
                    position: x.clone(),
                    m,
                })
            })
            .collect()
    }

    pub fn pattern(&self) -> Pattern {
        Pattern(self.m.iter().flatten().map(|m| self.n - m).collect())
    }

    pub fn pl(&self) -> PLFunction<S> {
        PLFunction {
            breakpoints: self.breakpoints.clone(),
            values: self.values.clone(),
        }
    }

    /// For each gap between consecutive turning points (plus the two
    /// boundary gaps), whether `T^n` hits `c` inside it. Gaps are open at
    /// turning-point ends and closed at window ends.
    pub fn gap_crossings(&self, c: &S) -> Result<Vec<bool>> {
        let mut out = Vec::new();
        let mut hit = false;
        let last = self.breakpoints.len() - 1;
        for k in 0..=last {
            let is_tp = self.m[k].is_some();
            let v = &self.values[k];
            if is_tp {
                out.push(hit);
                hit = false;
            } else if v.try_eq(c)? {
                hit = true;
            }
            if k < last {
                let w = &self.values[k + 1];
                let strictly = (v.try_lt(c)? && c.try_lt(w)?) || (w.try_lt(c)? && c.try_lt(v)?);
                hit |= strictly;
            }
        }
        out.push(hit);
        Ok(out)
    }
}

pub fn turning_points<S: Scalar>(
    map: &TentMap<S>,
    n: usize,
    window: &Window<S>,
) -> Result<Vec<TurningPoint<S>>> {
    Ok(FoldTable::build(map, n, window)?.turning_points())
}

/// Levels `i - m` of the turning points of `T^i` in the window, in order.
pub fn k_pattern<S: Scalar>(map: &TentMap<S>, i: usize, window: &Window<S>) -> Result<Pattern> {
    Ok(FoldTable::build(map, i, window)?.pattern())
}

pub fn pl_restrict<S: Scalar>(
    map: &TentMap<S>,
    n: usize,
    window: &Window<S>,
) -> Result<PLFunction<S>> {
    Ok(FoldTable::build(map, n, window)?.pl())
}

/// Odd-length palindrome whose middle entry is the strict maximum.
pub fn is_symmetric_pattern(p: &Pattern) -> bool {
    let l = p.levels();
    if l.len() % 2 == 0 {
        return false;
    }
    let mid = l.len() / 2;
    let palindrome = l.iter().eq(l.iter().rev());
    palindrome && l.iter().enumerate().all(|(k, &v)| k == mid || v < l[mid])
}

/// Pattern one step deeper: every level grows by one and a level-1 entry
/// appears in each gap flagged as crossing `c`.
pub fn shift_pattern(p: &Pattern, crossings: &[bool]) -> Result<Pattern> {
    if crossings.len() != p.len() + 1 {
        return Err(Error::LengthMismatch {
            expected: p.len() + 1,
            got: crossings.len(),
        });
    }
    let mut out = Vec::with_capacity(2 * p.len() + 1);
    for (j, &cross) in crossings.iter().enumerate() {
        if cross {
            out.push(1);
        }
        if let Some(&level) = p.levels().get(j) {
            out.push(level + 1);
        }
    }
    Ok(Pattern(out))
}

/// Gap-crossing flags of `T^i` on the window, ready for [`shift_pattern`].
pub fn crossing_flags<S: Scalar>(map: &TentMap<S>, i: usize, window: &Window<S>) -> Result<Vec<bool>> {
    FoldTable::build(map, i, window)?.gap_crossings(&map.c())
}

/// Searches `n <= max_n` and windows of the core whose pattern is `p`.
///
/// Each candidate window spans a run of consecutive turning points and
/// extends halfway to the neighbouring turning points (or to the core ends).
pub fn realize_pattern<S: Scalar>(
    map: &TentMap<S>,
    p: &Pattern,
    max_n: usize,
) -> Result<Option<(usize, Window<S>)>> {
    if p.is_empty() {
        return Err(Error::InvalidArgument("pattern must be nonempty".into()));
    }
    let core = map.core();
    let len = p.len();
    for n in 1..=max_n {
        let tps = turning_points(map, n, &core)?;
        let levels: Vec<usize> = tps.iter().map(|t| n - t.m).collect();
        if levels.len() < len {
            continue;
        }
        for start in 0..=levels.len() - len {
            if levels[start..start + len] != p.levels()[..] {
                continue;
            }
            let lo = match start {
                0 => core.lo.clone(),
                _ => (tps[start - 1].position.clone() + tps[start].position.clone()) * S::half(),
            };
            let end = start + len - 1;
            let hi = match tps.get(end + 1) {
                None => core.hi.clone(),
                Some(next) => (tps[end].position.clone() + next.position.clone()) * S::half(),
            };
            let window = Window::new(lo, hi)?;
            if &k_pattern(map, n, &window)? == p {
                return Ok(Some((n, window)));
            }
        }
    }
    Ok(None)
}

/// A failure of the adjacent-images property at one turning-point pair.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjacentViolation {
    pub n: usize,
    pub x: String,
    pub y: String,
    /// `"right"` for the search past `y`, `"left"` for the mirror past `x`.
    pub side: &'static str,
}

impl AdjacentViolation {
    pub fn to_json(&self) -> Value {
        json!({"n": self.n, "x": self.x, "y": self.y, "side": self.side})
    }
}

/// For adjacent turning points `x < y` of `T^n` on `[0, 1]`, checks that
/// some `z > y` has `T^n([y, z]) = [T^n x, T^n y]`, and the mirror image
/// with `z < x`.
pub fn verify_adjacent_images<S: Scalar>(map: &TentMap<S>, n: usize) -> Result<Vec<AdjacentViolation>> {
    let unit = Window::new(S::zero(), S::one())?;
    let table = FoldTable::build(map, n, &unit)?;
    verify_adjacent_images_in(&table)
}

/// [`verify_adjacent_images`] on a precomputed (possibly altered) table.
pub fn verify_adjacent_images_in<S: Scalar>(table: &FoldTable<S>) -> Result<Vec<AdjacentViolation>> {
    let tp_idx: Vec<usize> = (0..table.m.len()).filter(|&k| table.m[k].is_some()).collect();
    let mut out = Vec::new();
    for pair in tp_idx.windows(2) {
        let (ix, iy) = (pair[0], pair[1]);
        let a = &table.values[ix];
        let b = &table.values[iy];
        let right = (iy + 1..table.values.len()).map(|k| &table.values[k]);
        if !reaches(right, b, a)? {
            out.push(violation(table, ix, iy, "right"));
        }
        let left = (0..ix).rev().map(|k| &table.values[k]);
        if !reaches(left, a, b)? {
            out.push(violation(table, ix, iy, "left"));
        }
    }
    Ok(out)
}

/// Walking away from a point with value `from`, do the values reach
/// `target` before leaving the range between `target` and `from`?
fn reaches<'a, S: Scalar + 'a>(
    values: impl Iterator<Item = &'a S>,
    from: &S,
    target: &S,
) -> Result<bool> {
    let up = target.try_gt(from)?;
    for v in values {
        let past_target = if up { v.try_ge(target)? } else { v.try_le(target)? };
        if past_target {
            return Ok(true);
        }
        let behind = if up { v.try_lt(from)? } else { v.try_gt(from)? };
        if behind {
            return Ok(false);
        }
    }
    Ok(false)
}

fn violation<S: Scalar>(table: &FoldTable<S>, ix: usize, iy: usize, side: &'static str) -> AdjacentViolation {
    AdjacentViolation {
        n: table.n,
        x: table.breakpoints[ix].render(),
        y: table.breakpoints[iy].render(),
        side,
    }
}
