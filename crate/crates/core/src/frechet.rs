//! Exact Fréchet distance between graphs of piecewise-linear functions,
//! viewed as one-dimensional curves of values.
//!
//! The decision procedure is the free-space reachability sweep over
//! breakpoint cells. For 1-D curves the distance is one of the critical
//! values `|f_i - g_j|`, `|f_i - f_k| / 2`, `|g_j - g_l| / 2`, so the exact
//! distance is the smallest feasible critical value.

use crate::error::Result;
use crate::folding::PLFunction;
use crate::numerics::{try_sort, Scalar};

/// Free sub-interval `[lo, hi]` of a cell edge in local coordinates `[0, 1]`.
type Span<S> = Option<(S, S)>;

/// `{t in [0,1] : |p - (q0 + t (q1 - q0))| <= eps}`.
fn free_span<S: Scalar>(p: &S, q0: &S, q1: &S, eps: &S) -> Result<Span<S>> {
    let lo_v = p.clone() - eps.clone();
    let hi_v = p.clone() + eps.clone();
    let d = q1.clone() - q0.clone();
    if d.is_zero() {
        let inside = lo_v.try_le(q0)? && q0.try_le(&hi_v)?;
        return Ok(inside.then(|| (S::zero(), S::one())));
    }
    let t1 = (lo_v - q0.clone()).try_div(&d)?;
    let t2 = (hi_v - q0.clone()).try_div(&d)?;
    let (a, b) = if t1.try_le(&t2)? { (t1, t2) } else { (t2, t1) };
    let a = a.max_of(&S::zero());
    let b = b.min_of(&S::one());
    Ok(if a.try_le(&b)? { Some((a, b)) } else { None })
}

/// Raise the lower end of a span to `floor`.
fn clip_below<S: Scalar>(span: &Span<S>, floor: &S) -> Result<Span<S>> {
    Ok(match span {
        None => None,
        Some((a, b)) => {
            let a = a.max_of(floor);
            if a.try_le(b)? {
                Some((a, b.clone()))
            } else {
                None
            }
        }
    })
}

/// Reachable parts of the left edges (`lr[i][j]`, `i in 0..=p`, `j < q`)
/// and bottom edges (`br[i][j]`, `i < p`, `j in 0..=q`).
struct Reach<S> {
    lr: Vec<Vec<Span<S>>>,
    br: Vec<Vec<Span<S>>>,
    ok: bool,
}

fn reach<S: Scalar>(f: &[S], g: &[S], eps: &S) -> Result<Reach<S>> {
    let p = f.len() - 1;
    let q = g.len() - 1;
    let mut lr = vec![vec![None; q]; p + 1];
    let mut br = vec![vec![None; q + 1]; p];
    let start_free = (f[0].clone() - g[0].clone()).abs_val().try_le(eps)?;
    if !start_free {
        return Ok(Reach { lr, br, ok: false });
    }
    // Left column and bottom row: reachable only by sliding along them.
    for j in 0..q {
        let span = free_span(&f[0], &g[j], &g[j + 1], eps)?;
        let prev_full = j == 0 || matches!(&lr[0][j - 1], Some((_, b)) if b.is_one_like()?);
        lr[0][j] = match span {
            Some((a, b)) if prev_full && a.is_zero() => Some((a, b)),
            _ => None,
        };
        if lr[0][j].is_none() {
            break;
        }
    }
    for i in 0..p {
        let span = free_span(&g[0], &f[i], &f[i + 1], eps)?;
        let prev_full = i == 0 || matches!(&br[i - 1][0], Some((_, b)) if b.is_one_like()?);
        br[i][0] = match span {
            Some((a, b)) if prev_full && a.is_zero() => Some((a, b)),
            _ => None,
        };
        if br[i][0].is_none() {
            break;
        }
    }
    for i in 0..p {
        for j in 0..q {
            let right = free_span(&f[i + 1], &g[j], &g[j + 1], eps)?;
            let top = free_span(&g[j + 1], &f[i], &f[i + 1], eps)?;
            let left = lr[i][j].clone();
            let bottom = br[i][j].clone();
            lr[i + 1][j] = if bottom.is_some() {
                right
            } else if let Some((a, _)) = &left {
                clip_below(&right, a)?
            } else {
                None
            };
            br[i][j + 1] = if left.is_some() {
                top
            } else if let Some((a, _)) = &bottom {
                clip_below(&top, a)?
            } else {
                None
            };
        }
    }
    let ok = if p == 0 && q == 0 {
        true
    } else if p == 0 {
        matches!(&lr[0][q - 1], Some((_, b)) if b.is_one_like()?)
    } else if q == 0 {
        matches!(&br[p - 1][0], Some((_, b)) if b.is_one_like()?)
    } else {
        matches!(&lr[p][q - 1], Some((_, b)) if b.is_one_like()?)
            || matches!(&br[p - 1][q], Some((_, b)) if b.is_one_like()?)
    };
    Ok(Reach { lr, br, ok })
}

trait OneLike {
    fn is_one_like(&self) -> Result<bool>;
}

impl<S: Scalar> OneLike for S {
    fn is_one_like(&self) -> Result<bool> {
        self.try_ge(&S::one())
    }
}

/// Is the Fréchet distance between `f` and `g` at most `eps`?
pub fn frechet_le<S: Scalar>(f: &PLFunction<S>, g: &PLFunction<S>, eps: &S) -> Result<bool> {
    Ok(reach(&f.values, &g.values, eps)?.ok)
}

/// Is the Fréchet distance strictly below `eps`?
pub fn frechet_lt<S: Scalar>(f: &PLFunction<S>, g: &PLFunction<S>, eps: &S) -> Result<bool> {
    if !frechet_le(f, g, eps)? {
        return Ok(false);
    }
    frechet_1d(f, g)?.try_lt(eps)
}

/// Candidate values the distance can take.
fn critical_values<S: Scalar>(f: &[S], g: &[S]) -> Result<Vec<S>> {
    let half = S::half();
    let mut out = Vec::with_capacity(f.len() * g.len() + f.len() * f.len() / 2 + g.len() * g.len() / 2);
    for a in f {
        for b in g {
            out.push((a.clone() - b.clone()).abs_val());
        }
    }
    for xs in [f, g] {
        for (k, a) in xs.iter().enumerate() {
            for b in &xs[k + 1..] {
                out.push((a.clone() - b.clone()).abs_val() * half.clone());
            }
        }
    }
    try_sort(&mut out)?;
    out.dedup_by(|a, b| matches!(a.try_cmp(b), Ok(std::cmp::Ordering::Equal)));
    Ok(out)
}

/// Exact Fréchet distance over monotone reparametrizations.
pub fn frechet_1d<S: Scalar>(f: &PLFunction<S>, g: &PLFunction<S>) -> Result<S> {
    let cands = critical_values(&f.values, &g.values)?;
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    // The largest candidate bounds max |f_i - g_j|, which is always feasible.
    while lo < hi {
        let mid = (lo + hi) / 2;
        if reach(&f.values, &g.values, &cands[mid])?.ok {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(cands[lo].clone())
}

/// A monotone matching path in parameter space, as pairs `(x, y)` of
/// points in the domains of `f` and `g`, from the left ends to the right ends.
pub fn matching_path<S: Scalar>(
    f: &PLFunction<S>,
    g: &PLFunction<S>,
    eps: &S,
) -> Result<Option<Vec<(S, S)>>> {
    let fv = &f.values;
    let gv = &g.values;
    let r = reach(fv, gv, eps)?;
    if !r.ok {
        return Ok(None);
    }
    let p = fv.len() - 1;
    let q = gv.len() - 1;
    // Global parameter coordinates: vertex index plus local offset.
    let mut path: Vec<(S, S)> = Vec::new();
    let mut s = S::from_ratio(p as i64, 1);
    let mut t = S::from_ratio(q as i64, 1);
    path.push((s.clone(), t.clone()));
    // (i, j): the point lies on the top or right edge of cell (i-1, j-1).
    let (mut i, mut j) = (p, q);
    while i > 0 && j > 0 {
        let (ci, cj) = (i - 1, j - 1);
        let ci_s = S::from_ratio(ci as i64, 1);
        let cj_s = S::from_ratio(cj as i64, 1);
        let local_t = t.clone() - cj_s.clone();
        let local_s = s.clone() - ci_s.clone();
        match (&r.lr[ci][cj], &r.br[ci][cj]) {
            (Some((a, _)), _) if a.try_le(&local_t)? => {
                s = ci_s;
                t = cj_s + a.clone();
                i = ci;
            }
            (_, Some((b, _))) if b.try_le(&local_s)? => {
                s = ci_s + b.clone();
                t = cj_s;
                j = cj;
            }
            _ => unreachable!("reachable point without a reachable predecessor"),
        }
        path.push((s.clone(), t.clone()));
    }
    // Slide along the boundary to the origin.
    if !(s.is_zero() && t.is_zero()) {
        path.push((S::zero(), S::zero()));
    }
    path.reverse();
    let to_x = |u: &S, bp: &[S]| -> Result<S> {
        let n = bp.len() - 1;
        if n == 0 {
            return Ok(bp[0].clone());
        }
        let mut k = (u.to_f64().floor().max(0.0) as usize).min(n - 1);
        while k > 0 && S::from_ratio(k as i64, 1).try_gt(u)? {
            k -= 1;
        }
        while k + 1 < n && S::from_ratio(k as i64 + 1, 1).try_le(u)? {
            k += 1;
        }
        let frac = u.clone() - S::from_ratio(k as i64, 1);
        Ok(bp[k].clone() + frac * (bp[k + 1].clone() - bp[k].clone()))
    };
    let mut out: Vec<(S, S)> = Vec::with_capacity(path.len());
    for (u, v) in &path {
        out.push((to_x(u, &f.breakpoints)?, to_x(v, &g.breakpoints)?));
    }
    out.dedup_by(|a, b| a.0.try_eq(&b.0).unwrap_or(false) && a.1.try_eq(&b.1).unwrap_or(false));
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn pl(ys: &[i64]) -> PLFunction<BigRational> {
        let n = ys.len() as i64 - 1;
        PLFunction::new(
            (0..=n).map(|k| q(k, n)).collect(),
            ys.iter().map(|&y| q(y, 1)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn zigzag_against_line() {
        // A bump of height 2 on a flat line: the bump must be absorbed at a point.
        let f = pl(&[0, 2, 0]);
        let g = pl(&[0, 0]);
        assert_eq!(frechet_1d(&f, &g).unwrap(), q(2, 1));
        // Two humps against one: the dip between them costs half its depth.
        let f = pl(&[0, 4, 2, 4, 0]);
        let g = pl(&[0, 4, 0]);
        assert_eq!(frechet_1d(&f, &g).unwrap(), q(1, 1));
    }

    #[test]
    fn strict_and_closed_thresholds() {
        let f = pl(&[0, 4, 2, 4, 0]);
        let g = pl(&[0, 4, 0]);
        assert!(frechet_le(&f, &g, &q(1, 1)).unwrap());
        assert!(!frechet_lt(&f, &g, &q(1, 1)).unwrap());
        assert!(frechet_lt(&f, &g, &q(101, 100)).unwrap());
        assert!(!frechet_le(&f, &g, &q(99, 100)).unwrap());
    }

    #[test]
    fn witness_path_is_monotone_and_close() {
        let f = pl(&[0, 4, 2, 4, 0, 3]);
        let g = pl(&[1, 4, 1, 3]);
        let d = frechet_1d(&f, &g).unwrap();
        let path = matching_path(&f, &g, &d).unwrap().unwrap();
        assert_eq!(path.first().unwrap(), &(q(0, 1), q(0, 1)));
        assert_eq!(path.last().unwrap(), &(q(1, 1), q(1, 1)));
        for w in path.windows(2) {
            assert!(w[0].0 <= w[1].0 && w[0].1 <= w[1].1);
        }
        for w in path.windows(2) {
            for (x, y) in [w[0].clone(), w[1].clone()] {
                let gap = (f.eval(&x).unwrap() - g.eval(&y).unwrap()).abs_val();
                assert!(gap <= d, "gap {} at ({}, {})", gap, x, y);
            }
        }
        assert!(matching_path(&f, &g, &(d - q(1, 1000))).unwrap().is_none());
    }
}
