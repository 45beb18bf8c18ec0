//! The tent map `T(x) = min{sx, s(1-x)}`, its critical orbit, and the
//! orbit-derived constants.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::folding;
use crate::numerics::Scalar;

/// Closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct Window<S> {
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> Window<S> {
    pub fn new(lo: S, hi: S) -> Result<Self> {
        if lo.try_gt(&hi)? {
            return Err(Error::InvalidArgument(format!(
                "window [{}, {}] is reversed",
                lo.render(),
                hi.render()
            )));
        }
        Ok(Window { lo, hi })
    }

    pub fn length(&self) -> S {
        self.hi.clone() - self.lo.clone()
    }

    pub fn midpoint(&self) -> S {
        (self.lo.clone() + self.hi.clone()) * S::half()
    }

    pub fn contains(&self, x: &S) -> Result<bool> {
        Ok(self.lo.try_le(x)? && x.try_le(&self.hi)?)
    }

    pub fn contains_window(&self, other: &Window<S>) -> Result<bool> {
        Ok(self.lo.try_le(&other.lo)? && other.hi.try_le(&self.hi)?)
    }

    pub fn try_eq(&self, other: &Window<S>) -> Result<bool> {
        Ok(self.lo.try_eq(&other.lo)? && self.hi.try_eq(&other.hi)?)
    }

    pub fn to_json(&self) -> Value {
        json!([self.lo.to_json(), self.hi.to_json()])
    }
}

/// Tent map with slope `s`, `sqrt2 < s <= 2`.
#[derive(Clone, Debug)]
pub struct TentMap<S> {
    s: S,
    c1: S,
    c2: S,
    r: S,
}

impl<S: Scalar> TentMap<S> {
    pub fn new(s: S) -> Result<Self> {
        let two = S::from_ratio(2, 1);
        let in_range = |s: &S| -> Result<bool> {
            Ok((s.clone() * s.clone()).try_gt(&two)? && s.try_le(&two)?)
        };
        if !in_range(&s)? {
            return Err(Error::InvalidSlope(s.render()));
        }
        let c1 = s.clone() * S::half();
        let c2 = s.clone() * (S::one() - c1.clone());
        let r = s.try_div(&(s.clone() + S::one()))?;
        Ok(TentMap { s, c1, c2, r })
    }

    pub fn slope(&self) -> &S {
        &self.s
    }

    /// The critical point `1/2`.
    pub fn c(&self) -> S {
        S::half()
    }

    pub fn c1(&self) -> &S {
        &self.c1
    }

    pub fn c2(&self) -> &S {
        &self.c2
    }

    /// Mirror image `1 - c2` of `c2` around `c`.
    pub fn c2_hat(&self) -> S {
        S::one() - self.c2.clone()
    }

    /// Non-zero fixed point `s / (s + 1)`.
    pub fn fixed_point(&self) -> &S {
        &self.r
    }

    /// Core `[c2, c1]`.
    pub fn core(&self) -> Window<S> {
        Window {
            lo: self.c2.clone(),
            hi: self.c1.clone(),
        }
    }

    /// `[0, c1]`, the interval the natural chains live on.
    pub fn interval_i(&self) -> Window<S> {
        Window {
            lo: S::zero(),
            hi: self.c1.clone(),
        }
    }

    pub fn eval(&self, x: &S) -> Result<S> {
        if x.try_lt(&S::zero())? || x.try_gt(&S::one())? {
            return Err(Error::OutOfDomain(x.render()));
        }
        Ok(self.apply(x))
    }

    /// `T` without the domain check; callers guarantee `x` in `[0, 1]`.
    pub(crate) fn apply(&self, x: &S) -> S {
        let left = self.s.clone() * x.clone();
        let right = self.s.clone() * (S::one() - x.clone());
        left.min_of(&right)
    }

    pub fn iterate(&self, x: &S, n: usize) -> Result<S> {
        let mut y = x.clone();
        for _ in 0..n {
            y = self.eval(&y)?;
        }
        Ok(y)
    }

    /// `c_1 ... c_n` without any classification.
    pub fn orbit_points(&self, n: usize) -> Vec<S> {
        let mut out = Vec::with_capacity(n);
        let mut y = self.c();
        for _ in 0..n {
            y = self.apply(&y);
            out.push(y.clone());
        }
        out
    }

    pub fn critical_orbit(&self, n: usize) -> Result<CriticalOrbit<S>> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("orbit depth {} < 3", n)));
        }
        let points = self.orbit_points(n);
        let c = self.c();

        let mut kappa = None;
        for (idx, ci) in points.iter().enumerate().skip(2) {
            if ci.try_le(&c)? {
                kappa = Some(idx + 1);
                break;
            }
        }
        let kappa = kappa.ok_or(Error::KappaBeyondDepth { depth: n })?;
        if (kappa - 3) % 2 == 1 {
            return Err(Error::Renormalizable { kappa });
        }

        let preperiodic_at = find_repeat(&c, &points);
        let recurrence_gap = points
            .iter()
            .map(|ci| (c.clone() - ci.clone()).abs_val())
            .reduce(|a, b| a.min_of(&b))
            .expect("orbit is nonempty");

        Ok(CriticalOrbit {
            slope: self.s.clone(),
            points,
            preperiodic_at,
            kappa,
            recurrence_gap,
        })
    }

    pub fn kappa(&self, n: usize) -> Result<usize> {
        Ok(self.critical_orbit(n)?.kappa)
    }

    /// `(1/100) min{|c - c_i|, |c - r|, |T^n x - T^n y|}` up to depth `n`.
    ///
    /// The last term ranges over adjacent turning points `x < y` of `T^m`
    /// on the core, `2 <= m <= n`.
    pub fn delta_bound(&self, n: usize) -> Result<DeltaBound<S>> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("delta depth {} < 3", n)));
        }
        let c = self.c();
        let points = self.orbit_points(n);
        for (idx, ci) in points.iter().enumerate() {
            match ci.try_cmp(&c) {
                Ok(std::cmp::Ordering::Equal) => {
                    return Err(Error::PreperiodicOrbit {
                        index: idx + 1,
                        certified: true,
                    })
                }
                Ok(_) => {}
                Err(Error::PrecisionExhausted(_)) => {
                    return Err(Error::PreperiodicOrbit {
                        index: idx + 1,
                        certified: false,
                    })
                }
                Err(e) => return Err(e),
            }
        }

        let mut best: Option<(S, DeltaTerm)> = None;
        let mut offer = |value: S, term: DeltaTerm| -> Result<()> {
            let better = match &best {
                None => true,
                Some((b, _)) => value.try_lt(b)?,
            };
            if better {
                best = Some((value, term));
            }
            Ok(())
        };
        for (idx, ci) in points.iter().enumerate() {
            offer((c.clone() - ci.clone()).abs_val(), DeltaTerm::OrbitGap { i: idx + 1 })?;
        }
        offer((c.clone() - self.r.clone()).abs_val(), DeltaTerm::FixedPointGap)?;

        // Turning points of T^n carry their minimal hitting time m, so the
        // turning points of T^j (j <= n) are the subset with m < j and the
        // image T^j(t) is c_{j - m}.
        let tps = folding::turning_points(self, n, &self.core())?;
        for j in 2..=n {
            let mut prev: Option<&folding::TurningPoint<S>> = None;
            for tp in tps.iter().filter(|t| t.m < j) {
                if let Some(p) = prev {
                    let a = &points[j - p.m - 1];
                    let b = &points[j - tp.m - 1];
                    offer(
                        (a.clone() - b.clone()).abs_val(),
                        DeltaTerm::AdjacentImages {
                            n: j,
                            x: p.position.render(),
                            y: tp.position.render(),
                        },
                    )?;
                }
                prev = Some(tp);
            }
        }

        let (min, term) = best.expect("at least one term");
        Ok(DeltaBound {
            delta: min.clone() * S::from_ratio(1, 100),
            minimum: min,
            term,
            depth: n,
        })
    }
}

/// First exact repeat among `c_0 = c, c_1, ..., c_N`, as `(tail, period)`.
fn find_repeat<S: Scalar>(c: &S, points: &[S]) -> Option<(usize, usize)> {
    let mut seq = Vec::with_capacity(points.len() + 1);
    seq.push(c.clone());
    seq.extend(points.iter().cloned());
    for j in 1..seq.len() {
        for i in 0..j {
            if matches!(seq[i].try_cmp(&seq[j]), Ok(std::cmp::Ordering::Equal)) {
                return Some((i, j - i));
            }
        }
    }
    None
}

#[derive(Clone, Debug)]
pub struct CriticalOrbit<S> {
    pub slope: S,
    /// `c_1 ... c_N`.
    pub points: Vec<S>,
    pub preperiodic_at: Option<(usize, usize)>,
    pub kappa: usize,
    pub recurrence_gap: S,
}

impl<S: Scalar> CriticalOrbit<S> {
    pub fn depth(&self) -> usize {
        self.points.len()
    }

    /// `c_i` for `1 <= i <= N`.
    pub fn point(&self, i: usize) -> &S {
        &self.points[i - 1]
    }

    pub fn to_json(&self) -> Value {
        json!({
            "slope": self.slope.to_json(),
            "points": self.points.iter().map(Scalar::to_json).collect::<Vec<_>>(),
            "kappa": self.kappa,
            "preperiodic": self.preperiodic_at.map(|(t, p)| json!({"tail": t, "period": p})),
            "gap": self.recurrence_gap.to_json(),
        })
    }
}

/// Which term attains the minimum in the delta budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeltaTerm {
    OrbitGap { i: usize },
    FixedPointGap,
    AdjacentImages { n: usize, x: String, y: String },
}

impl DeltaTerm {
    pub fn describe(&self) -> String {
        match self {
            DeltaTerm::OrbitGap { i } => format!("|c - c_{}|", i),
            DeltaTerm::FixedPointGap => "|c - r|".to_string(),
            DeltaTerm::AdjacentImages { n, x, y } => {
                format!("|T^{n}({x}) - T^{n}({y})| at adjacent turning points")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct DeltaBound<S> {
    pub delta: S,
    /// The minimum itself, `100 * delta`.
    pub minimum: S,
    pub term: DeltaTerm,
    pub depth: usize,
}

impl<S: Scalar> DeltaBound<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "delta": self.delta.to_json(),
            "minimum": self.minimum.to_json(),
            "attained_by": self.term.describe(),
            "valid_up_to_depth": self.depth,
        })
    }
}
