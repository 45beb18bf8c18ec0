//! ε-symmetry and ε-closeness of piecewise-linear graphs, and the sweeps
//! that look for forbidden ε-symmetries of tent-map iterates.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::folding::{FoldTable, PLFunction};
use crate::frechet::{frechet_1d, frechet_le, frechet_lt, matching_path};
use crate::numerics::Scalar;
use crate::tentmap::{TentMap, Window};

/// Outcome of a matching question at tolerance `eps`.
#[derive(Clone, Debug)]
pub struct MatchResult<S> {
    pub close: bool,
    /// Achieved distance minus `eps`; negative exactly when `close`.
    pub margin: S,
    /// Parameter pairs of a monotone matching, present when `close`.
    pub matching: Option<Vec<(S, S)>>,
}

impl<S: Scalar> MatchResult<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "close": self.close,
            "margin": self.margin.to_json(),
            "matching": self.matching.as_ref().map(|m| m
                .iter()
                .map(|(x, y)| json!([x.to_json(), y.to_json()]))
                .collect::<Vec<_>>()),
        })
    }
}

fn decide<S: Scalar>(f: &PLFunction<S>, g: &PLFunction<S>, eps: &S) -> Result<MatchResult<S>> {
    let d = frechet_1d(f, g)?;
    let close = d.try_lt(eps)?;
    let matching = if close { matching_path(f, g, &d)? } else { None };
    Ok(MatchResult {
        close,
        margin: d - eps.clone(),
        matching,
    })
}

/// Is there an orientation-reversing bijection `x -> x^` of the domain
/// with `|f(x) - f(x^)| < eps`? With a center `m`, the bijection must fix
/// `m`, so `f` on `[a, m]` is matched against `f` on `[m, b]` read backwards.
pub fn is_eps_symmetric<S: Scalar>(
    f: &PLFunction<S>,
    eps: &S,
    center: Option<&S>,
) -> Result<MatchResult<S>> {
    match center {
        None => decide(f, &f.reversed(), eps),
        Some(m) => {
            let (left, right) = split_at_center(f, m)?;
            decide(&left, &right.reversed(), eps)
        }
    }
}

fn split_at_center<S: Scalar>(f: &PLFunction<S>, m: &S) -> Result<(PLFunction<S>, PLFunction<S>)> {
    let d = f.domain();
    if !(d.lo.try_lt(m)? && m.try_lt(&d.hi)?) {
        return Err(Error::CenterOutside);
    }
    Ok((f.restrict(&d.lo, m)?, f.restrict(m, &d.hi)?))
}

/// Decision-only variant of [`is_eps_symmetric`] for sweeps.
pub fn eps_symmetric_about<S: Scalar>(f: &PLFunction<S>, eps: &S, m: &S) -> Result<bool> {
    let (left, right) = split_at_center(f, m)?;
    let right = right.reversed();
    // Cheap necessary conditions first: matched endpoints and extremes.
    let (l, r) = (&left.values, &right.values);
    if !(l[0].clone() - r[0].clone()).abs_val().try_lt(eps)? {
        return Ok(false);
    }
    if !extremes_match(l, r, eps)? {
        return Ok(false);
    }
    frechet_lt(&left, &right, eps)
}

fn extremes_match<S: Scalar>(a: &[S], b: &[S], eps: &S) -> Result<bool> {
    let fold = |xs: &[S]| -> (S, S) {
        let lo = xs.iter().skip(1).fold(xs[0].clone(), |m, x| m.min_of(x));
        let hi = xs.iter().skip(1).fold(xs[0].clone(), |m, x| m.max_of(x));
        (lo, hi)
    };
    let (alo, ahi) = fold(a);
    let (blo, bhi) = fold(b);
    Ok((alo - blo).abs_val().try_lt(eps)? && (ahi - bhi).abs_val().try_lt(eps)?)
}

/// ε-closeness under any homeomorphism of the domains (either orientation).
pub fn is_eps_close<S: Scalar>(f: &PLFunction<S>, g: &PLFunction<S>, eps: &S) -> Result<MatchResult<S>> {
    let forward = decide(f, g, eps)?;
    if forward.close {
        return Ok(forward);
    }
    let backward = decide(f, &g.reversed(), eps)?;
    Ok(if backward.margin.try_lt(&forward.margin)? {
        backward
    } else {
        forward
    })
}

/// Decision-only ε-closeness.
pub fn eps_close<S: Scalar>(f: &PLFunction<S>, g: &PLFunction<S>, eps: &S) -> Result<bool> {
    Ok(frechet_lt(f, g, eps)? || frechet_lt(f, &g.reversed(), eps)?)
}

/// A forbidden ε-symmetry found by the sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryViolation<S> {
    /// `"centered"` for windows around `c`, `"orbit"` for windows around `c_i`.
    pub family: &'static str,
    pub n: usize,
    pub window: Window<S>,
    pub center: S,
}

impl<S: Scalar> SymmetryViolation<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "family": self.family,
            "n": self.n,
            "window": self.window.to_json(),
            "center": self.center.to_json(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct NoSymmetryReport<S> {
    pub eps_found: S,
    /// Rung index `j` with `eps_found = delta / 2^j`.
    pub rung: usize,
    pub ladder: Vec<S>,
    /// Rungs that were evaluated, with their violation counts.
    pub evaluated: Vec<(usize, usize)>,
    pub configurations: usize,
    pub skipped: usize,
    pub violations: Vec<SymmetryViolation<S>>,
    /// First violation at the next larger rung, if there is one.
    pub binding: Option<SymmetryViolation<S>>,
}

impl<S: Scalar> NoSymmetryReport<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "eps_found": self.eps_found.to_json(),
            "rung": self.rung,
            "ladder": self.ladder.iter().map(Scalar::to_json).collect::<Vec<_>>(),
            "evaluated": self.evaluated.iter().map(|(j, v)| json!({"rung": j, "violations": v})).collect::<Vec<_>>(),
            "configurations": self.configurations,
            "skipped": self.skipped,
            "violations": self.violations.iter().map(SymmetryViolation::to_json).collect::<Vec<_>>(),
            "binding": self.binding.as_ref().map(SymmetryViolation::to_json),
        })
    }
}

/// One window with its candidate centers.
struct Config<S> {
    family: &'static str,
    n: usize,
    window: Window<S>,
    centers: Vec<S>,
}

/// Number of rungs in the ε ladder `delta / 2^j`.
pub const LADDER_RUNGS: usize = 48;

/// Searches the largest rung `eps = delta / 2^j` at which no configuration of
/// the grid is ε-symmetric in a forbidden way.
///
/// Windows around `c` have `a < c - delta`, `b > c + delta` and candidate
/// centers on the grid, plus `c +- delta 2^-j` and `c` itself; a center with
/// `|c - m| <= eps s^-n` is exempt. Windows around `c_i` contain
/// `(c_i - delta, c_i + delta)` and are tested with center `c_i`.
pub fn verify_no_symmetry<S: Scalar>(
    map: &TentMap<S>,
    delta: &S,
    max_n: usize,
    grid: usize,
) -> Result<NoSymmetryReport<S>> {
    if grid < 4 {
        return Err(Error::InvalidArgument("grid must have at least 4 points".into()));
    }
    let (configs, skipped) = build_configs(map, delta, max_n, grid)?;
    let configurations = configs.iter().map(|c| c.centers.len()).sum();
    let ladder: Vec<S> = (1..=LADDER_RUNGS)
        .map(|j| delta.clone() * pow_half::<S>(j))
        .collect();

    let mut evaluated = Vec::new();
    let mut cache: Vec<Option<Vec<SymmetryViolation<S>>>> = vec![None; LADDER_RUNGS];
    let mut run = |j: usize, cache: &mut Vec<Option<Vec<SymmetryViolation<S>>>>| -> Result<usize> {
        if cache[j].is_none() {
            let v = violations_at(map, &configs, &ladder[j])?;
            evaluated.push((j + 1, v.len()));
            cache[j] = Some(v);
        }
        Ok(cache[j].as_ref().map_or(0, Vec::len))
    };

    // Smallest clean rung, assuming violations only shrink with eps.
    let (mut lo, mut hi) = (0usize, LADDER_RUNGS - 1);
    if run(hi, &mut cache)? > 0 {
        return Err(Error::NoEpsilonFound);
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        if run(mid, &mut cache)? == 0 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let binding = if lo > 0 {
        run(lo - 1, &mut cache)?;
        cache[lo - 1].as_ref().and_then(|v| v.first().cloned())
    } else {
        None
    };
    let violations = cache[lo].clone().unwrap_or_default();
    Ok(NoSymmetryReport {
        eps_found: ladder[lo].clone(),
        rung: lo + 1,
        ladder,
        evaluated,
        configurations,
        skipped,
        violations,
        binding,
    })
}

fn pow_half<S: Scalar>(j: usize) -> S {
    (0..j).fold(S::one(), |acc, _| acc * S::half())
}

fn build_configs<S: Scalar>(
    map: &TentMap<S>,
    delta: &S,
    max_n: usize,
    grid: usize,
) -> Result<(Vec<Config<S>>, usize)> {
    let core = map.core();
    let c = map.c();
    let side = ((grid as f64).sqrt().round() as usize).max(2);
    let grid_points: Vec<S> = (1..grid)
        .map(|t| core.lo.clone() + core.length() * S::from_ratio(t as i64, grid as i64))
        .collect();

    let left_end = c.clone() - delta.clone();
    let right_end = c.clone() + delta.clone();
    let mut lefts = Vec::new();
    let mut rights = Vec::new();
    if core.lo.try_lt(&left_end)? && right_end.try_lt(&core.hi)? {
        for t in 0..side {
            let frac = S::from_ratio(t as i64, side as i64);
            lefts.push(core.lo.clone() + (left_end.clone() - core.lo.clone()) * frac.clone());
            rights.push(core.hi.clone() - (core.hi.clone() - right_end.clone()) * frac);
        }
    }
    let mut specials = vec![c.clone()];
    for j in 0..=10 {
        let off = delta.clone() * pow_half::<S>(j);
        specials.push(c.clone() - off.clone());
        specials.push(c.clone() + off);
    }

    let mut configs = Vec::new();
    for n in 1..=max_n {
        for a in &lefts {
            for b in &rights {
                let window = Window::new(a.clone(), b.clone())?;
                let mut centers = Vec::new();
                for m in grid_points.iter().chain(specials.iter()) {
                    if a.try_lt(m)? && m.try_lt(b)? {
                        centers.push(m.clone());
                    }
                }
                configs.push(Config {
                    family: "centered",
                    n,
                    window,
                    centers,
                });
            }
        }
    }

    let mut skipped = 0;
    let orbit = map.orbit_points(max_n.max(3));
    let widths: Vec<S> = [1, 2, 4, 8].iter().map(|&u| delta.clone() * S::from_ratio(u, 1)).collect();
    for ci in &orbit {
        for u in &widths {
            for v in &widths {
                let lo = ci.clone() - u.clone();
                let hi = ci.clone() + v.clone();
                // The window must sit inside the core.
                if lo.try_lt(&core.lo)? || hi.try_gt(&core.hi)? {
                    skipped += max_n;
                    continue;
                }
                for n in 0..=max_n {
                    configs.push(Config {
                        family: "orbit",
                        n,
                        window: Window::new(lo.clone(), hi.clone())?,
                        centers: vec![ci.clone()],
                    });
                }
            }
        }
    }
    Ok((configs, skipped))
}

fn violations_at<S: Scalar>(
    map: &TentMap<S>,
    configs: &[Config<S>],
    eps: &S,
) -> Result<Vec<SymmetryViolation<S>>> {
    let c = map.c();
    let per_config: Vec<Result<Vec<SymmetryViolation<S>>>> = configs
        .par_iter()
        .map(|cfg| {
            let mut out = Vec::new();
            let fa = map.iterate(&cfg.window.lo, cfg.n)?;
            let fb = map.iterate(&cfg.window.hi, cfg.n)?;
            if !(fa - fb).abs_val().try_lt(eps)? {
                return Ok(out);
            }
            let f = FoldTable::build(map, cfg.n, &cfg.window)?.pl();
            let exempt_radius = eps.clone() * pow_inverse(map.slope(), cfg.n)?;
            for m in &cfg.centers {
                if cfg.family == "centered" && (c.clone() - m.clone()).abs_val().try_le(&exempt_radius)? {
                    continue;
                }
                if eps_symmetric_about(&f, eps, m)? {
                    out.push(SymmetryViolation {
                        family: cfg.family,
                        n: cfg.n,
                        window: cfg.window.clone(),
                        center: m.clone(),
                    });
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in per_config {
        all.extend(r?);
    }
    Ok(all)
}

fn pow_inverse<S: Scalar>(s: &S, n: usize) -> Result<S> {
    let mut acc = S::one();
    for _ in 0..n {
        acc = acc.try_div(s)?;
    }
    Ok(acc)
}

/// Monotone pieces of `T^k` on `w` that map onto the core, as windows.
pub fn core_branches<S: Scalar>(map: &TentMap<S>, k: usize, w: &Window<S>) -> Result<Vec<Window<S>>> {
    let table = FoldTable::build(map, k, w)?;
    let core = map.core();
    let xs = &table.breakpoints;
    let vs = &table.values;
    let mut out = Vec::new();
    for t in 0..xs.len().saturating_sub(1) {
        let (v0, v1) = (&vs[t], &vs[t + 1]);
        let (lo, hi) = if v0.try_le(v1)? { (v0, v1) } else { (v1, v0) };
        if !(lo.try_le(&core.lo)? && core.hi.try_le(hi)?) {
            continue;
        }
        let inv = |y: &S| -> Result<S> {
            let u = (y.clone() - v0.clone()).try_div(&(v1.clone() - v0.clone()))?;
            Ok(xs[t].clone() + u * (xs[t + 1].clone() - xs[t].clone()))
        };
        let (a, b) = (inv(&core.lo)?, inv(&core.hi)?);
        out.push(if a.try_le(&b)? { Window::new(a, b)? } else { Window::new(b, a)? });
    }
    if k == 0 && w.contains_window(&core)? && out.is_empty() {
        out.push(core);
    }
    Ok(out)
}

/// Finds `J' = [a', b']` within `eps` of `ab` on which `T^{j-i}` maps
/// monotonically onto the core.
pub fn verify_lemma12<S: Scalar>(
    map: &TentMap<S>,
    eps: &S,
    i: usize,
    j: usize,
    ab: &Window<S>,
) -> Result<Option<(usize, Window<S>)>> {
    if i > j {
        return Err(Error::Precondition(format!("i = {} exceeds j = {}", i, j)));
    }
    let core = map.core();
    let f = FoldTable::build(map, i, &core)?.pl();
    let g = FoldTable::build(map, j, ab)?.pl();
    if !eps_close(&f, &g, eps)? {
        return Err(Error::Precondition(format!(
            "T^{} on the core and T^{} on [{}, {}] are not eps-close",
            i,
            j,
            ab.lo.render(),
            ab.hi.render()
        )));
    }
    let k = j - i;
    let search = Window::new(
        (ab.lo.clone() - eps.clone()).max_of(&core.lo),
        (ab.hi.clone() + eps.clone()).min_of(&core.hi),
    )?;
    let mut best: Option<(S, Window<S>)> = None;
    for cand in core_branches(map, k, &search)? {
        let da = (cand.lo.clone() - ab.lo.clone()).abs_val();
        let db = (cand.hi.clone() - ab.hi.clone()).abs_val();
        if da.try_lt(eps)? && db.try_lt(eps)? {
            let drift = da.max_of(&db);
            let better = match &best {
                None => true,
                Some((d, _)) => drift.try_lt(d)?,
            };
            if better {
                best = Some((drift, cand));
            }
        }
    }
    Ok(best.map(|(_, w)| (k, w)))
}

/// One window tried by [`lemma12_suite`].
#[derive(Clone, Debug)]
pub struct Lemma12Case<S> {
    pub i: usize,
    pub j: usize,
    pub window: Window<S>,
    /// The recovered `(k, J')`, or `None` when the search failed.
    pub found: Option<(usize, Window<S>)>,
}

#[derive(Clone, Debug)]
pub struct Lemma12Report<S> {
    pub eps: S,
    pub cases: Vec<Lemma12Case<S>>,
    /// Perturbed windows that were not eps-close and so not tried.
    pub skipped: usize,
}

impl<S: Scalar> Lemma12Report<S> {
    pub fn all_found(&self) -> bool {
        self.cases.iter().all(|c| c.found.is_some())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "eps": self.eps.to_json(),
            "all_found": self.all_found(),
            "skipped": self.skipped,
            "cases": self.cases.iter().map(|c| json!({
                "i": c.i,
                "j": c.j,
                "window": c.window.to_json(),
                "k": c.found.as_ref().map(|f| f.0),
                "found": c.found.as_ref().map(|f| f.1.to_json()),
            })).collect::<Vec<_>>(),
        })
    }
}

/// For `i < j <= max_j`: every monotone piece of `T^{j-i}` onto the core,
/// and each piece with its ends moved by `+-eps / (4 s^j)`, run through
/// [`verify_lemma12`].
pub fn lemma12_suite<S: Scalar>(map: &TentMap<S>, eps: &S, max_j: usize) -> Result<Lemma12Report<S>> {
    let core = map.core();
    let mut jobs = Vec::new();
    for j in 1..=max_j {
        let nudge = eps.clone().try_div(&(S::from_ratio(4, 1) * pow(map.slope(), j)))?;
        for i in 0..j {
            for branch in core_branches(map, j - i, &core)? {
                jobs.push((i, j, branch.clone()));
                for (da, db) in [(-1, 1), (1, -1), (1, 1), (-1, -1)] {
                    let lo = (branch.lo.clone() + nudge.clone() * S::from_ratio(da, 1)).max_of(&core.lo);
                    let hi = (branch.hi.clone() + nudge.clone() * S::from_ratio(db, 1)).min_of(&core.hi);
                    jobs.push((i, j, Window::new(lo, hi)?));
                }
            }
        }
    }
    let results: Vec<Result<Option<Lemma12Case<S>>>> = jobs
        .into_par_iter()
        .map(|(i, j, window)| match verify_lemma12(map, eps, i, j, &window) {
            Ok(found) => Ok(Some(Lemma12Case { i, j, window, found })),
            Err(Error::Precondition(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let mut cases = Vec::new();
    let mut skipped = 0;
    for r in results {
        match r? {
            Some(c) => cases.push(c),
            None => skipped += 1,
        }
    }
    Ok(Lemma12Report {
        eps: eps.clone(),
        cases,
        skipped,
    })
}

fn pow<S: Scalar>(s: &S, n: usize) -> S {
    (0..n).fold(S::one(), |acc, _| acc * s.clone())
}

/// Exact Fréchet distance, re-exported for callers that want the number.
pub fn distance<S: Scalar>(f: &PLFunction<S>, g: &PLFunction<S>) -> Result<S> {
    frechet_1d(f, g)
}

/// Closed-tolerance decision, re-exported for oracles.
pub fn within<S: Scalar>(f: &PLFunction<S>, g: &PLFunction<S>, eps: &S) -> Result<bool> {
    frechet_le(f, g, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folding::pl_restrict;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn pl(xs: &[(i64, i64)], ys: &[(i64, i64)]) -> PLFunction<BigRational> {
        PLFunction::new(
            xs.iter().map(|&(n, d)| q(n, d)).collect(),
            ys.iter().map(|&(n, d)| q(n, d)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn distance_basics() {
        let f = pl(&[(0, 1), (1, 2), (1, 1)], &[(0, 1), (1, 1), (0, 1)]);
        assert_eq!(frechet_1d(&f, &f).unwrap(), q(0, 1));
        let zero = pl(&[(0, 1), (1, 1)], &[(0, 1), (0, 1)]);
        let one = pl(&[(0, 1), (1, 1)], &[(1, 1), (1, 1)]);
        assert_eq!(frechet_1d(&zero, &one).unwrap(), q(1, 1));
    }

    #[test]
    fn full_tent_is_symmetric_about_half() {
        let m = TentMap::new(q(2, 1)).unwrap();
        let f = pl_restrict(&m, 1, &Window::new(q(0, 1), q(1, 1)).unwrap()).unwrap();
        let r = is_eps_symmetric(&f, &q(1, 1_000_000), Some(&q(1, 2))).unwrap();
        assert!(r.close);
        assert!(r.matching.is_some());
    }

    #[test]
    fn increasing_function_is_not_symmetric() {
        let f = pl(&[(0, 1), (1, 1)], &[(0, 1), (1, 1)]);
        assert!(!is_eps_symmetric(&f, &q(1, 2), None).unwrap().close);
        assert!(matches!(
            is_eps_symmetric(&f, &q(1, 2), Some(&q(2, 1))),
            Err(Error::CenterOutside)
        ));
    }

    #[test]
    fn closeness_is_symmetric() {
        let f = pl(&[(0, 1), (1, 3), (1, 1)], &[(0, 1), (1, 1), (1, 4)]);
        let g = pl(&[(0, 1), (1, 2), (3, 4), (1, 1)], &[(1, 8), (7, 8), (1, 2), (0, 1)]);
        let e = q(1, 4);
        assert_eq!(is_eps_close(&f, &g, &e).unwrap().close, is_eps_close(&g, &f, &e).unwrap().close);
        assert_eq!(
            frechet_1d(&f, &g).unwrap(),
            frechet_1d(&g, &f).unwrap()
        );
    }

    #[test]
    fn lemma12_identity_and_branch() {
        let m = TentMap::new(q(3, 2)).unwrap();
        let core = m.core();
        let (k, jp) = verify_lemma12(&m, &q(1, 100), 0, 0, &core).unwrap().unwrap();
        assert_eq!(k, 0);
        assert_eq!(jp, core);
        let branches = core_branches(&m, 2, &core).unwrap();
        assert!(!branches.is_empty());
        let (k, jp) = verify_lemma12(&m, &q(1, 100), 0, 2, &branches[0]).unwrap().unwrap();
        assert_eq!(k, 2);
        assert_eq!(jp, branches[0]);
    }

    #[test]
    fn lemma12_suite_small() {
        let m = TentMap::new(q(3, 2)).unwrap();
        let r = lemma12_suite(&m, &q(1, 1000), 3).unwrap();
        assert!(r.all_found());
        assert!(!r.cases.is_empty());
    }

    #[test]
    fn lemma12_precondition() {
        let m = TentMap::new(q(3, 2)).unwrap();
        let tiny = Window::new(q(3, 5), q(3, 5) + q(1, 1000)).unwrap();
        assert!(matches!(
            verify_lemma12(&m, &q(1, 1000), 2, 3, &tiny),
            Err(Error::Precondition(_))
        ));
    }
}
