//! Natural chains `C_k` and link traversals of arcs.
//!
//! Links are the closed gaps between consecutive boundary points of
//! `C_k`; two links are adjacent when they share a boundary point.

use std::cmp::Ordering;

use serde_json::{json, Value};

use crate::arcs::{arc_a, arc_at_depth, salient_position, Arc};
use crate::error::{Error, Result};
use crate::folding::{FoldTable, PLFunction};
use crate::numerics::Scalar;
use crate::tentmap::{TentMap, Window};

#[derive(Clone, Debug)]
pub struct Chain<S> {
    pub k: usize,
    /// Interior boundary points in `(0, c1)`, increasing.
    pub boundaries: Vec<S>,
    /// `[0, c1]`.
    pub span: Window<S>,
    pub mesh: S,
}

impl<S: Scalar> Chain<S> {
    pub fn link_count(&self) -> usize {
        self.boundaries.len() + 1
    }

    /// Link `l` (1-based) as a closed interval.
    pub fn link(&self, l: usize) -> Window<S> {
        let lo = if l == 1 {
            self.span.lo.clone()
        } else {
            self.boundaries[l - 2].clone()
        };
        let hi = if l == self.link_count() {
            self.span.hi.clone()
        } else {
            self.boundaries[l - 1].clone()
        };
        Window { lo, hi }
    }

    /// Number of boundary points `< y` (`strict`) or `<= y`.
    fn rank(&self, y: &S, strict: bool) -> Result<usize> {
        let (mut lo, mut hi) = (0usize, self.boundaries.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            let below = match self.boundaries[mid].try_cmp(y)? {
                Ordering::Less => true,
                Ordering::Equal => !strict,
                Ordering::Greater => false,
            };
            if below {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "boundaries": self.boundaries.iter().map(Scalar::to_json).collect::<Vec<_>>(),
            "mesh": self.mesh.to_json(),
        })
    }
}

/// `C_k`: boundaries are the points of `[0, c1]` reaching `c` within `k` steps.
pub fn natural_chain<S: Scalar>(map: &TentMap<S>, k: usize) -> Result<Chain<S>> {
    let span = map.interval_i();
    let table = FoldTable::build(map, k + 1, &span)?;
    let boundaries: Vec<S> = table
        .turning_points()
        .into_iter()
        .map(|t| t.position)
        .filter(|x| !x.is_zero())
        .collect();
    let mut edges = vec![span.lo.clone()];
    edges.extend(boundaries.iter().cloned());
    edges.push(span.hi.clone());
    let mesh = edges
        .windows(2)
        .map(|w| w[1].clone() - w[0].clone())
        .reduce(|a, b| a.max_of(&b))
        .expect("at least one link");
    let boundaries = boundaries
        .into_iter()
        .filter(|x| !matches!(x.try_cmp(&span.hi), Ok(Ordering::Equal)))
        .collect();
    Ok(Chain {
        k,
        boundaries,
        span,
        mesh,
    })
}

/// One stay of a path inside a link, with the parameter range it covers.
#[derive(Clone, Debug, PartialEq)]
pub struct Visit<S> {
    pub link: usize,
    pub from: S,
    pub to: S,
}

/// Compact traversal: the link of each visit and where it begins.
///
/// A visit begins at breakpoint `seg` when `boundary` is `u32::MAX`, and
/// otherwise where segment `seg` crosses boundary point `boundary`.
pub struct Walk {
    pub links: Vec<u32>,
    starts: Vec<(u32, u32)>,
}

impl Walk {
    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    fn start<S: Scalar>(&self, v: usize, chain: &Chain<S>, f: &PLFunction<S>) -> Result<S> {
        let (seg, b) = self.starts[v];
        let (seg, xs, vs) = (seg as usize, &f.breakpoints, &f.values);
        if b == u32::MAX {
            return Ok(xs[seg].clone());
        }
        let y = &chain.boundaries[b as usize];
        let t = (y.clone() - vs[seg].clone()).try_div(&(vs[seg + 1].clone() - vs[seg].clone()))?;
        Ok(xs[seg].clone() + t * (xs[seg + 1].clone() - xs[seg].clone()))
    }

    /// First visit whose parameter range contains `x`.
    pub fn locate<S: Scalar>(&self, x: &S, chain: &Chain<S>, f: &PLFunction<S>) -> Result<usize> {
        let d = f.domain();
        if self.is_empty() || x.try_lt(&d.lo)? || x.try_gt(&d.hi)? {
            return Err(Error::NotFound(format!("{} is not on the arc", x.render())));
        }
        // Visit starts increase with the index.
        let (mut lo, mut hi) = (0usize, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.start(mid, chain, f)?.try_le(x)? {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let mut v = lo - 1;
        if v > 0 && self.start(v, chain, f)?.try_eq(x)? {
            v -= 1;
        }
        Ok(v)
    }

    /// Parameter range of visit `v`.
    pub fn range<S: Scalar>(&self, v: usize, chain: &Chain<S>, f: &PLFunction<S>) -> Result<(S, S)> {
        let from = self.start(v, chain, f)?;
        let to = if v + 1 < self.len() {
            self.start(v + 1, chain, f)?
        } else {
            f.breakpoints[f.breakpoints.len() - 1].clone()
        };
        Ok((from, to))
    }
}

pub fn walk<S: Scalar>(chain: &Chain<S>, f: &PLFunction<S>) -> Result<Walk> {
    let vs = &f.values;
    let mut w = Walk {
        links: Vec::new(),
        starts: Vec::new(),
    };
    let mut enter = |link: usize, at: (usize, u32)| {
        if w.links.last() != Some(&(link as u32)) {
            w.links.push(link as u32);
            w.starts.push((at.0 as u32, at.1));
        }
    };
    if vs.len() == 1 {
        enter(chain.rank(&vs[0], true)? + 1, (0, u32::MAX));
        return Ok(w);
    }
    for k in 0..vs.len() - 1 {
        let (y0, y1) = (&vs[k], &vs[k + 1]);
        let up = y1.try_gt(y0)?;
        // Open links met by the piece, in travel order.
        let (first, last) = if up {
            (chain.rank(y0, false)? + 1, chain.rank(y1, true)? + 1)
        } else {
            (chain.rank(y0, true)? + 1, chain.rank(y1, false)? + 1)
        };
        enter(first, (k, u32::MAX));
        if up {
            for l in first + 1..=last {
                enter(l, (k, (l - 2) as u32));
            }
        } else {
            for l in (last..first).rev() {
                enter(l, (k, (l - 1) as u32));
            }
        }
    }
    Ok(w)
}

/// The links visited by the graph `f`, in order, with parameter ranges.
///
/// Touching a boundary point and turning back does not leave the link.
pub fn visits<S: Scalar>(chain: &Chain<S>, f: &PLFunction<S>) -> Result<Vec<Visit<S>>> {
    let w = walk(chain, f)?;
    (0..w.len())
        .map(|v| {
            let (from, to) = w.range(v, chain, f)?;
            Ok(Visit {
                link: w.links[v] as usize,
                from,
                to,
            })
        })
        .collect()
}

/// Radius of the longest odd palindrome centered at each index.
pub fn palindrome_radii<T: PartialEq>(seq: &[T]) -> Vec<usize> {
    let n = seq.len();
    let mut d = vec![0usize; n];
    let (mut l, mut r) = (0usize, 0usize);
    for i in 0..n {
        let mut k = if i < r { d[l + r - 1 - i].min(r - i) } else { 1 };
        while i >= k && i + k < n && seq[i - k] == seq[i + k] {
            k += 1;
        }
        d[i] = k;
        if i + k > r {
            l = i + 1 - k;
            r = i + k;
        }
    }
    d.into_iter().map(|k| k - 1).collect()
}

/// Graph of `T^{a.depth}` over the arc window: the arc seen at level `k`.
pub fn arc_graph<S: Scalar>(map: &TentMap<S>, a: &Arc<S>) -> Result<FoldTable<S>> {
    FoldTable::build(map, a.depth, &a.window)
}

pub fn link_sequence<S: Scalar>(chain: &Chain<S>, map: &TentMap<S>, a: &Arc<S>) -> Result<Vec<usize>> {
    let g = arc_graph(map, a)?;
    Ok(visits(chain, &g.pl())?.into_iter().map(|v| v.link).collect())
}

/// Midlink data of a link-symmetric arc.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkSymmetry<S> {
    pub midlink: usize,
    /// Parameter range of the middle visit, at the arc's depth.
    pub middle: Window<S>,
    /// Highest-level k-point inside the middle visit, if any, as
    /// `(position, level)`.
    pub midpoint: Option<(S, usize)>,
}

pub fn is_link_symmetric<S: Scalar>(
    chain: &Chain<S>,
    map: &TentMap<S>,
    a: &Arc<S>,
) -> Result<Option<LinkSymmetry<S>>> {
    let g = arc_graph(map, a)?;
    let vis = visits(chain, &g.pl())?;
    let seq: Vec<usize> = vis.iter().map(|v| v.link).collect();
    if !seq.iter().eq(seq.iter().rev()) {
        return Ok(None);
    }
    let mid = &vis[vis.len() / 2];
    let middle = Window::new(mid.from.clone(), mid.to.clone())?;
    let mut best: Option<(S, usize)> = None;
    for t in g.turning_points() {
        let level = a.depth - t.m;
        if level == 0 || !middle.contains(&t.position)? {
            continue;
        }
        if best.as_ref().map_or(true, |(_, l)| level > *l) {
            best = Some((t.position, level));
        }
    }
    Ok(Some(LinkSymmetry {
        midlink: mid.link,
        middle,
        midpoint: best,
    }))
}

/// One link-symmetric subarc found by the completeness search.
#[derive(Clone, Debug, PartialEq)]
pub struct CompletenessCase {
    /// Index of the middle visit in the traversal of the big arc.
    pub center: usize,
    pub midlink: usize,
    /// Largest palindromic radius around the center.
    pub radius: usize,
    /// Salient point `m_i` inside the middle visit, if any.
    pub salient: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct CompletenessReport {
    pub k: usize,
    pub depth: usize,
    pub visits: usize,
    pub cases: Vec<CompletenessCase>,
}

impl CompletenessReport {
    pub fn all_pass(&self) -> bool {
        self.cases.iter().all(|c| c.salient.is_some())
    }

    pub fn failures(&self) -> impl Iterator<Item = &CompletenessCase> {
        self.cases.iter().filter(|c| c.salient.is_none())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "depth": self.depth,
            "visits": self.visits,
            "all_pass": self.all_pass(),
            "cases": self.cases.iter().map(|c| json!({
                "center": c.center,
                "midlink": c.midlink,
                "radius": c.radius,
                "pass": c.salient.is_some(),
                "salient": c.salient,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Every k-link-symmetric subarc of `A_{D-k}` that contains `rho` and
/// leaves its first link must have some `m_i` in its middle visit.
pub fn verify_completeness<S: Scalar>(map: &TentMap<S>, k: usize, d: usize) -> Result<CompletenessReport> {
    if d < k + 4 {
        return Err(Error::Precondition(format!("D = {} must be at least k + 4 = {}", d, k + 4)));
    }
    let i = d - k;
    verify_completeness_with(map, k, d, &(1..=i + 2).collect::<Vec<_>>())
}

/// [`verify_completeness`] with an explicit set of admissible midpoints.
pub fn verify_completeness_with<S: Scalar>(
    map: &TentMap<S>,
    k: usize,
    d: usize,
    midpoints: &[usize],
) -> Result<CompletenessReport> {
    let chain = natural_chain(map, k)?;
    let i = d - k;
    let kappa = map.kappa(d + 40)?;
    let top = midpoints.iter().copied().max().unwrap_or(1).max(i);
    // Deep enough that A_i and every candidate m_j lie on one arc whose
    // projection is injective.
    let depth = top + kappa + 2;
    let arc = arc_at_depth(map, &arc_a(map, i)?, depth)?;
    let g = arc_graph(map, &arc)?.pl();
    let w = walk(&chain, &g)?;

    let r = map.fixed_point();
    let rho_visit = w.locate(r, &chain, &g)?;

    let positions: Vec<(usize, S)> = midpoints
        .iter()
        .map(|&j| Ok((j, salient_position(map, j, depth)?)))
        .collect::<Result<_>>()?;

    let radii = palindrome_radii(&w.links);
    let mut cases = Vec::new();
    for (center, &radius) in radii.iter().enumerate() {
        let needed = center.abs_diff(rho_visit).max(1);
        if radius < needed {
            continue;
        }
        let (from, to) = w.range(center, &chain, &g)?;
        let mut salient = None;
        for (j, p) in &positions {
            if from.try_le(p)? && p.try_le(&to)? {
                salient = Some(*j);
                break;
            }
        }
        cases.push(CompletenessCase {
            center,
            midlink: w.links[center] as usize,
            radius,
            salient,
        });
    }
    Ok(CompletenessReport {
        k,
        depth: d,
        visits: w.len(),
        cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn map(n: i64, d: i64) -> TentMap<BigRational> {
        TentMap::new(q(n, d)).unwrap()
    }

    #[test]
    fn palindrome_radii_match_naive() {
        let seq = [1, 2, 1, 2, 3, 2, 1, 2, 1, 1, 4];
        let naive: Vec<usize> = (0..seq.len())
            .map(|c| {
                let mut r = 0;
                while c > r && c + r + 1 < seq.len() && seq[c - r - 1] == seq[c + r + 1] {
                    r += 1;
                }
                r
            })
            .collect();
        assert_eq!(palindrome_radii(&seq), naive);
        assert_eq!(palindrome_radii(&seq)[4], 4);
    }

    #[test]
    fn slope_two_chains() {
        let m = map(2, 1);
        let c1 = natural_chain(&m, 1).unwrap();
        assert_eq!(c1.boundaries, vec![q(1, 4), q(1, 2), q(3, 4)]);
        assert_eq!(c1.mesh, q(1, 4));
        let c2 = natural_chain(&m, 2).unwrap();
        for b in [q(1, 8), q(3, 8), q(5, 8), q(7, 8)] {
            assert!(c2.boundaries.contains(&b));
        }
        assert!(c1.boundaries.iter().all(|b| c2.boundaries.contains(b)));
    }

    #[test]
    fn slope_two_arc_walk() {
        let m = map(2, 1);
        let chain = natural_chain(&m, 1).unwrap();
        let a1 = arc_a(&m, 1).unwrap();
        assert_eq!(link_sequence(&chain, &m, &a1).unwrap(), vec![1, 2, 3, 4, 3, 2, 1]);
        let sym = is_link_symmetric(&chain, &m, &a1).unwrap().unwrap();
        assert_eq!(sym.midlink, 4);
        assert_eq!(sym.midpoint, Some((q(1, 2), 1)));
    }

    #[test]
    fn single_link_arc() {
        let m = map(3, 2);
        let chain = natural_chain(&m, 2).unwrap();
        let tiny = Arc::new(0, Window::new(q(3, 5), q(3, 5) + q(1, 1000)).unwrap(), q(3, 5)).unwrap();
        let seq = link_sequence(&chain, &m, &tiny).unwrap();
        assert_eq!(seq.len(), 1);
        let sym = is_link_symmetric(&chain, &m, &tiny).unwrap().unwrap();
        assert_eq!(sym.midlink, seq[0]);
    }

    #[test]
    fn arcs_a_are_link_symmetric_about_their_midpoints() {
        let m = map(3, 2);
        let chain = natural_chain(&m, 3).unwrap();
        for i in 1..=6 {
            let a = arc_a(&m, i).unwrap();
            let seq = link_sequence(&chain, &m, &a).unwrap();
            assert!(seq.windows(2).all(|w| w[0].abs_diff(w[1]) == 1));
            let sym = is_link_symmetric(&chain, &m, &a).unwrap().expect("symmetric");
            let (pos, level) = sym.midpoint.unwrap();
            assert_eq!(pos, q(1, 2));
            assert_eq!(level, i);
        }
    }

    #[test]
    fn completeness_small_case() {
        let m = map(3, 2);
        let rep = verify_completeness(&m, 3, 9).unwrap();
        assert!(!rep.cases.is_empty());
        assert!(rep.all_pass(), "{:?}", rep.failures().collect::<Vec<_>>());
        let bad = verify_completeness_with(&m, 3, 9, &[1]).unwrap();
        assert!(!bad.all_pass());
    }
}
