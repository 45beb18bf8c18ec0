//! Anchored arcs `A_i`, their midpoints `m_i`, and the containment lattice.
//!
//! An [`Arc`] at depth `i` stands for the arc through the anchor whose
//! projection at level `k + i` is the window `J`, injectively. Moving one
//! level deeper pulls `J` back through the branch of `T` that contains the
//! anchor; for the fixed point `r > 1/2` that is the right branch
//! `y -> 1 - y/s`.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::numerics::Scalar;
use crate::tentmap::{TentMap, Window};

#[derive(Clone, Debug, PartialEq)]
pub struct Arc<S> {
    pub depth: usize,
    pub window: Window<S>,
    pub anchor: S,
}

impl<S: Scalar> Arc<S> {
    pub fn new(depth: usize, window: Window<S>, anchor: S) -> Result<Self> {
        if !window.contains(&anchor)? {
            return Err(Error::AnchorOutside);
        }
        Ok(Arc {
            depth,
            window,
            anchor,
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "depth": self.depth,
            "window": self.window.to_json(),
            "anchor": self.anchor.to_json(),
        })
    }
}

/// `A_i`: window `[c2, 1 - c2]` at depth `i`, anchored at `r`.
pub fn arc_a<S: Scalar>(map: &TentMap<S>, i: usize) -> Result<Arc<S>> {
    if i == 0 {
        return Err(Error::InvalidArgument("arc index must be >= 1".into()));
    }
    let window = Window::new(map.c2().clone(), map.c2_hat())?;
    Arc::new(i, window, map.fixed_point().clone())
}

/// Which branch of `T` the pullback uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Left,
    Right,
}

fn anchor_branch<S: Scalar>(map: &TentMap<S>, anchor: &S) -> Result<Branch> {
    let image = map.eval(anchor)?;
    if !image.try_eq(anchor)? {
        return Err(Error::AnchorNotFixed(anchor.render()));
    }
    match anchor.try_cmp(&map.c())? {
        std::cmp::Ordering::Less => Ok(Branch::Left),
        std::cmp::Ordering::Greater => Ok(Branch::Right),
        std::cmp::Ordering::Equal => Err(Error::AnchorAtFold),
    }
}

/// Preimage of `y` on the given branch.
pub fn pull_back<S: Scalar>(map: &TentMap<S>, branch: Branch, y: &S) -> Result<S> {
    let t = y.try_div(map.slope())?;
    Ok(match branch {
        Branch::Left => t,
        Branch::Right => S::one() - t,
    })
}

fn pull_window<S: Scalar>(map: &TentMap<S>, branch: Branch, w: &Window<S>) -> Result<Window<S>> {
    let a = pull_back(map, branch, &w.lo)?;
    let b = pull_back(map, branch, &w.hi)?;
    match branch {
        Branch::Left => Window::new(a, b),
        Branch::Right => Window::new(b, a),
    }
}

/// The same arc seen at depth `j >= a.depth`.
pub fn arc_at_depth<S: Scalar>(map: &TentMap<S>, a: &Arc<S>, j: usize) -> Result<Arc<S>> {
    if j < a.depth {
        return Err(Error::InvalidArgument(format!(
            "target depth {} is shallower than {}",
            j, a.depth
        )));
    }
    if j == a.depth {
        return Ok(a.clone());
    }
    let branch = anchor_branch(map, &a.anchor)?;
    let mut window = a.window.clone();
    for _ in a.depth..j {
        window = pull_window(map, branch, &window)?;
    }
    Ok(Arc {
        depth: j,
        window,
        anchor: a.anchor.clone(),
    })
}

/// Does arc `a` contain arc `b`? Compared at the deeper of the two depths.
pub fn contains<S: Scalar>(map: &TentMap<S>, a: &Arc<S>, b: &Arc<S>) -> Result<bool> {
    if !a.anchor.try_eq(&b.anchor)? {
        return Err(Error::InvalidArgument("arcs have different anchors".into()));
    }
    let d = a.depth.max(b.depth);
    let a = arc_at_depth(map, a, d)?;
    let b = arc_at_depth(map, b, d)?;
    a.window.contains_window(&b.window)
}

/// The salient point `m_i` of level `i`, tracked through the depths.
#[derive(Clone, Debug)]
pub struct SalientPoint<S> {
    pub index: usize,
    /// `positions[j]` is the projection at depth `j`.
    positions: Vec<S>,
}

impl<S: Scalar> SalientPoint<S> {
    pub fn position_at(&self, j: usize) -> Option<&S> {
        self.positions.get(j)
    }

    pub fn max_depth(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn to_json(&self) -> Value {
        json!({
            "i": self.index,
            "positions": self.positions.iter().map(Scalar::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Projection of `m_i` at depth `j`: forward images of `c` above depth `i`,
/// anchor-branch preimages below it.
pub fn salient_position<S: Scalar>(map: &TentMap<S>, i: usize, j: usize) -> Result<S> {
    let mut x = map.c();
    if j <= i {
        return map.iterate(&x, i - j);
    }
    let branch = anchor_branch(map, map.fixed_point())?;
    for _ in i..j {
        x = pull_back(map, branch, &x)?;
    }
    Ok(x)
}

/// `m_1 ... m_max_i`, each with positions at depths `0 ..= max_depth`.
pub fn salient_points<S: Scalar>(
    map: &TentMap<S>,
    max_i: usize,
    max_depth: usize,
) -> Result<Vec<SalientPoint<S>>> {
    if max_i == 0 {
        return Err(Error::InvalidArgument("max_i must be >= 1".into()));
    }
    let branch = anchor_branch(map, map.fixed_point())?;
    (1..=max_i)
        .map(|i| {
            let mut positions = vec![map.c(); max_depth + 1];
            if i <= max_depth {
                for j in (0..i).rev() {
                    positions[j] = map.eval(&positions[j + 1])?;
                }
                for j in i + 1..=max_depth {
                    positions[j] = pull_back(map, branch, &positions[j - 1])?;
                }
            } else {
                for (j, p) in positions.iter_mut().enumerate() {
                    *p = map.iterate(&map.c(), i - j)?;
                }
            }
            Ok(SalientPoint { index: i, positions })
        })
        .collect()
}

/// One entry of the lattice report.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeCheck {
    pub lemma: &'static str,
    pub i: usize,
    pub pass: bool,
    pub witness: String,
}

#[derive(Clone, Debug, Default)]
pub struct LatticeReport {
    pub kappa: usize,
    pub checks: Vec<LatticeCheck>,
}

impl LatticeReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LatticeCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> Value {
        let mut groups = serde_json::Map::new();
        for name in LATTICE_CHECKS {
            let entries: Vec<Value> = self
                .checks
                .iter()
                .filter(|c| c.lemma == name)
                .map(|c| json!({"i": c.i, "pass": c.pass, "witness": c.witness}))
                .collect();
            groups.insert(name.to_string(), Value::Array(entries));
        }
        json!({"kappa": self.kappa, "all_pass": self.all_pass(), "checks": groups})
    }
}

pub const LATTICE_CHECKS: [&str; 8] = [
    "nesting",
    "kappa_nesting",
    "kappa_gap",
    "rho_between",
    "rho_outside",
    "boundary_midpoint",
    "midpoint_outside",
    "kappa3_midpoint",
];

/// Checks the containment lattice of `A_1 ... A_max_i` and the position
/// facts about `m_i` and `rho`.
pub fn verify_arc_lattice<S: Scalar>(map: &TentMap<S>, max_i: usize) -> Result<LatticeReport> {
    let kappa = map.kappa(max_i.max(3) + 40)?;
    if max_i < kappa + 2 {
        return Err(Error::Precondition(format!(
            "max_i = {} must be at least kappa + 2 = {}",
            max_i,
            kappa + 2
        )));
    }
    verify_arc_lattice_with_kappa(map, max_i, kappa)
}

/// [`verify_arc_lattice`] with an externally supplied `kappa`.
pub fn verify_arc_lattice_with_kappa<S: Scalar>(
    map: &TentMap<S>,
    max_i: usize,
    kappa: usize,
) -> Result<LatticeReport> {
    let arcs: Vec<Arc<S>> = (1..=max_i + 2).map(|i| arc_a(map, i)).collect::<Result<_>>()?;
    let arc = |i: usize| &arcs[i - 1];
    let mut checks = Vec::new();
    let mut push = |lemma, i, pass, witness: String| {
        checks.push(LatticeCheck {
            lemma,
            i,
            pass,
            witness,
        })
    };

    for i in 1..=max_i {
        if i + 2 <= max_i {
            let ok = contains(map, arc(i + 2), arc(i))?;
            push("nesting", i, ok, format!("A_{} in A_{}", i, i + 2));
        }
        if i + kappa <= max_i {
            let ok = contains(map, arc(i + kappa), arc(i))?;
            push("kappa_nesting", i, ok, format!("A_{} in A_{}", i, i + kappa));
        }
        for l in (1..kappa).step_by(2) {
            if i + l <= max_i {
                let inside = contains(map, arc(i + l), arc(i))?;
                push("kappa_gap", i, !inside, format!("A_{} not in A_{} (l = {})", i, i + l, l));
            }
        }
    }

    // All of m_i, m_{i+1}, m_{i+2} lie on A_{i+kappa+1}, whose projection is
    // injective from its own depth on; compare there.
    let depth = max_i + kappa + 2;
    let r = map.fixed_point().clone();
    let pos = |i: usize| salient_position(map, i, depth);
    for i in 1..=max_i {
        let (a, b, c) = (pos(i)?, pos(i + 1)?, pos(i + 2)?);
        let between = |x: &S, y: &S| -> Result<bool> {
            Ok(x.min_of(y).try_le(&r)? && r.try_le(&x.max_of(y))?)
        };
        push("rho_between", i, between(&a, &b)?, format!("rho in [m_{}, m_{}]", i, i + 1));
        push("rho_outside", i, !between(&a, &c)?, format!("rho not in [m_{}, m_{}]", i, i + 2));
    }

    for i in 1..=max_i {
        let seen = arc_at_depth(map, arc(i), i + 2)?;
        let m2 = salient_position(map, i + 2, i + 2)?;
        let on_boundary = seen.window.lo.try_eq(&m2)? || seen.window.hi.try_eq(&m2)?;
        push("boundary_midpoint", i, on_boundary, format!("m_{} at an end of A_{}", i + 2, i));
        let m1 = salient_position(map, i + 1, i + 2)?;
        let outside = !seen.window.contains(&m1)?;
        push("midpoint_outside", i, outside, format!("m_{} not in A_{}", i + 1, i));

        let mi = salient_position(map, i, i + 1)?;
        let inside = arc(i + 1).window.contains(&mi)?;
        push(
            "kappa3_midpoint",
            i,
            inside == (kappa == 3),
            format!("m_{} in A_{} is {} with kappa = {}", i, i + 1, inside, kappa),
        );
    }

    Ok(LatticeReport { kappa, checks })
}

/// Projections of `rho` and `m_1 ... m_max_i` at a common depth, listed in
/// the arc order `... m_5, m_3, m_1, rho, m_2, m_4 ...`.
pub fn arc_order<S: Scalar>(map: &TentMap<S>, max_i: usize, depth: usize) -> Result<Vec<S>> {
    let mut odd: Vec<S> = (1..=max_i)
        .step_by(2)
        .map(|i| salient_position(map, i, depth))
        .collect::<Result<_>>()?;
    odd.reverse();
    let even: Vec<S> = (2..=max_i)
        .step_by(2)
        .map(|i| salient_position(map, i, depth))
        .collect::<Result<_>>()?;
    let mut out = odd;
    out.push(map.fixed_point().clone());
    out.extend(even);
    Ok(out)
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
    fn arc_a_windows() {
        let a = arc_a(&map(3, 2), 1).unwrap();
        assert_eq!(a.window, Window::new(q(3, 8), q(5, 8)).unwrap());
        assert_eq!(a.anchor, q(3, 5));
        let b = arc_a(&map(2, 1), 4).unwrap();
        assert_eq!(b.window, Window::new(q(0, 1), q(1, 1)).unwrap());
        assert_eq!(b.anchor, q(2, 3));
    }

    #[test]
    fn transport_round_trip() {
        let m = map(3, 2);
        let a = arc_a(&m, 1).unwrap();
        assert_eq!(arc_at_depth(&m, &a, 1).unwrap(), a);
        let deep = arc_at_depth(&m, &a, 3).unwrap();
        assert_eq!(deep.window, Window::new(q(1, 2), q(11, 18)).unwrap());
        assert_eq!(m.iterate(&deep.window.lo, 2).unwrap(), q(3, 8));
        assert_eq!(m.iterate(&deep.window.hi, 2).unwrap(), q(5, 8));
    }

    #[test]
    fn containment_examples() {
        let m = map(3, 2);
        let a1 = arc_a(&m, 1).unwrap();
        let a3 = arc_a(&m, 3).unwrap();
        assert!(contains(&m, &a3, &a1).unwrap());
        assert!(!contains(&m, &a1, &a3).unwrap());
        assert!(contains(&m, &a1, &a1).unwrap());
    }

    #[test]
    fn non_fixed_anchor_is_rejected() {
        let m = map(3, 2);
        let a = Arc::new(1, m.core(), q(1, 2)).unwrap();
        assert!(matches!(arc_at_depth(&m, &a, 2), Err(Error::AnchorNotFixed(_))));
    }

    #[test]
    fn salient_positions() {
        let m = map(3, 2);
        let pts = salient_points(&m, 6, 8).unwrap();
        for p in &pts {
            assert_eq!(p.position_at(p.index).unwrap(), &q(1, 2));
            assert_eq!(p.position_at(p.index - 1).unwrap(), m.c1());
            for j in 0..p.max_depth() {
                let down = m.eval(p.position_at(j + 1).unwrap()).unwrap();
                assert_eq!(&down, p.position_at(j).unwrap());
            }
        }
        let m1 = pts[0].position_at(3).unwrap();
        assert_eq!(m.iterate(m1, 2).unwrap(), q(1, 2));
    }

    #[test]
    fn lattice_passes_below_slope_two() {
        for (n, d) in [(3, 2), (8, 5), (7, 4), (9, 5)] {
            let rep = verify_arc_lattice(&map(n, d), 20).unwrap();
            let bad: Vec<_> = rep.failures().collect();
            assert!(bad.is_empty(), "s = {n}/{d}: {:?}", bad);
        }
    }

    #[test]
    fn slope_two_degenerates() {
        // c1 = 1 - c2 = 1 and c3 = c2 = 0, so A_i sits inside A_{i+1} and
        // m_{i+1} lands on the boundary of A_i.
        let rep = verify_arc_lattice(&map(2, 1), 20).unwrap();
        let kinds: std::collections::BTreeSet<_> = rep.failures().map(|c| c.lemma).collect();
        assert_eq!(kinds.into_iter().collect::<Vec<_>>(), vec!["kappa_gap", "midpoint_outside"]);
    }

    #[test]
    fn wrong_kappa_is_caught() {
        let rep = verify_arc_lattice_with_kappa(&map(3, 2), 20, 5).unwrap();
        assert!(!rep.all_pass());
    }
}
