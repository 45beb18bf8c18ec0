//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's algorithms; only its number types are reused.
#![allow(dead_code)]

use num_rational::BigRational;
use tentlim_core::{RationalMap, TentMap};

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn map(n: i64, d: i64) -> RationalMap {
    TentMap::new(q(n, d)).unwrap()
}

/// Ten admitted slopes spread over `(sqrt 2, 2]`, including the top.
pub const SLOPES: [(i64, i64); 10] = [
    (3, 2),
    (8, 5),
    (5, 3),
    (7, 4),
    (9, 5),
    (13, 9),
    (10, 7),
    (11, 6),
    (19, 10),
    (2, 1),
];

/// `T(x) = s min(x, 1 - x)` in double precision.
pub fn tent_f64(s: f64, x: f64) -> f64 {
    s * x.min(1.0 - x)
}

pub fn orbit_f64(s: f64, n: usize) -> Vec<f64> {
    let mut y = 0.5;
    (0..n)
        .map(|_| {
            y = tent_f64(s, y);
            y
        })
        .collect()
}

/// Monotone pieces of `T^n` on `[0, 1]` seen on a uniform grid: one plus
/// the number of direction changes between consecutive samples.
pub fn grid_branches(s: f64, n: usize, samples: usize) -> usize {
    let mut prev_y = None;
    let mut prev_dir = 0i8;
    let mut changes = 0;
    for k in 0..samples {
        let mut y = (k as f64 + 0.5) / samples as f64;
        for _ in 0..n {
            y = tent_f64(s, y);
        }
        if let Some(p) = prev_y {
            let dir = if y > p {
                1
            } else if y < p {
                -1
            } else {
                0
            };
            if dir != 0 {
                if prev_dir != 0 && dir != prev_dir {
                    changes += 1;
                }
                prev_dir = dir;
            }
        }
        prev_y = Some(y);
    }
    changes + 1
}

/// Samples a piecewise-linear value sequence with `per` points per piece.
pub fn densify(values: &[f64], per: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len() * per);
    for w in values.windows(2) {
        for t in 0..per {
            out.push(w[0] + (w[1] - w[0]) * t as f64 / per as f64);
        }
    }
    out.push(*values.last().unwrap());
    out
}

/// Discrete Fréchet distance of two sampled curves (Eiter and Mannila).
pub fn discrete_frechet(a: &[f64], b: &[f64]) -> f64 {
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![0.0; m];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            let d = (x - y).abs();
            let best = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => cur[j - 1],
                (_, 0) => prev[0],
                _ => prev[j].min(prev[j - 1]).min(cur[j - 1]),
            };
            cur[j] = d.max(best);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}
