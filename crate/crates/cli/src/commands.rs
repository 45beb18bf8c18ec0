//! One function per subcommand. Each returns an [`Artifact`].

use serde_json::{json, Value};
use tentlim_core::arcs::{arc_a, salient_points, verify_arc_lattice};
use tentlim_core::chains::{natural_chain, verify_completeness};
use tentlim_core::folding::{realize_pattern, verify_adjacent_images, FoldTable};
use tentlim_core::invariants::{count_levels, distinguish, invariant_sequence, invariant_sequence_with};
use tentlim_core::symmetry::{is_eps_close, is_eps_symmetric, lemma12_suite, verify_no_symmetry};
use tentlim_core::{parse_scalar, Error, ExactMap, ExactScalar, Pattern, Scalar, TentMap, Window};

use crate::error::CliError;
use crate::output::{Artifact, Series, Table};

pub type Out = Result<Artifact, CliError>;

pub fn scalar(text: &str, bits: u32) -> Result<ExactScalar, CliError> {
    Ok(parse_scalar(text, bits)?)
}

pub fn slope_map(text: &str, bits: u32) -> Result<ExactMap, CliError> {
    Ok(TentMap::new(scalar(text, bits)?)?)
}

/// `lo,hi`, or the core when absent.
pub fn window(map: &ExactMap, text: Option<&str>, bits: u32) -> Result<Window<ExactScalar>, CliError> {
    match text {
        None => Ok(map.core()),
        Some(t) => {
            let (lo, hi) = t
                .split_once(',')
                .ok_or_else(|| CliError::Usage(format!("window {:?}: expected lo,hi", t)))?;
            Ok(Window::new(scalar(lo.trim(), bits)?, scalar(hi.trim(), bits)?)?)
        }
    }
}

fn graph_series(name: String, table: &FoldTable<ExactScalar>) -> Series {
    Series {
        name,
        points: table
            .breakpoints
            .iter()
            .zip(&table.values)
            .map(|(x, y)| (x.to_f64(), y.to_f64()))
            .collect(),
    }
}

pub fn orbit(map: &ExactMap, depth: usize) -> Out {
    let o = map.critical_orbit(depth)?;
    let rows = o
        .points
        .iter()
        .enumerate()
        .map(|(i, c)| vec![(i + 1).to_string(), c.render()])
        .collect();
    let points = o.points.iter().enumerate().map(|(i, c)| ((i + 1) as f64, c.to_f64())).collect();
    Ok(Artifact::json(o.to_json())
        .with_table(Table {
            headers: vec!["i", "c_i"],
            rows,
        })
        .with_series(Series {
            name: "critical orbit".into(),
            points,
        }))
}

/// κ from the shortest orbit that reaches it, or at the given depth.
pub fn kappa(map: &ExactMap, depth: Option<usize>) -> Out {
    let k = match depth {
        Some(n) => map.kappa(n)?,
        None => {
            let mut n = 8;
            loop {
                match map.kappa(n) {
                    Err(Error::KappaBeyondDepth { .. }) if n < 4096 => n *= 2,
                    other => break other?,
                }
            }
        }
    };
    Ok(Artifact::json(json!({"kappa": k})).with_table(Table {
        headers: vec!["kappa"],
        rows: vec![vec![k.to_string()]],
    }))
}

pub fn delta(map: &ExactMap, depth: usize) -> Out {
    let d = map.delta_bound(depth)?;
    Ok(Artifact::json(d.to_json()).with_table(Table {
        headers: vec!["delta", "minimum", "term", "depth"],
        rows: vec![vec![d.delta.render(), d.minimum.render(), d.term.describe(), d.depth.to_string()]],
    }))
}

pub fn pattern(map: &ExactMap, depth: usize, w: &Window<ExactScalar>) -> Out {
    let table = FoldTable::build(map, depth, w)?;
    let tps = table.turning_points();
    let json = json!({
        "n": depth,
        "window": w.to_json(),
        "pattern": table.pattern().to_json(),
        "turning_points": tps.iter().map(|t| json!({"x": t.position.to_json(), "m": t.m})).collect::<Vec<_>>(),
    });
    let rows = tps
        .iter()
        .map(|t| vec![t.position.render(), t.m.to_string(), (depth - t.m).to_string()])
        .collect();
    Ok(Artifact::json(json)
        .with_table(Table {
            headers: vec!["x", "m", "level"],
            rows,
        })
        .with_series(graph_series(format!("T^{} on the window", depth), &table)))
}

pub fn realize(map: &ExactMap, text: &str, max_depth: usize) -> Out {
    let levels = text
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Usage(format!("pattern {:?}: expected comma-separated levels", text)))?;
    let found = realize_pattern(map, &Pattern(levels), max_depth)?;
    let json = json!({"result": found.as_ref().map(|(n, w)| json!({"n": n, "window": w.to_json()}))});
    Ok(Artifact::json(json).failed_if(found.is_none()))
}

pub fn arcs(map: &ExactMap, max_i: usize) -> Out {
    let report = verify_arc_lattice(map, max_i)?;
    let depth = max_i + 2;
    let points = salient_points(map, max_i, depth)?;
    let arcs: Vec<Value> = (1..=max_i).map(|i| Ok(arc_a(map, i)?.to_json())).collect::<Result<_, Error>>()?;
    let json = json!({
        "kappa": report.kappa,
        "arcs": arcs,
        "salient": points.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
        "lattice": report.to_json(),
    });
    let rows = points
        .iter()
        .map(|p| vec![p.index.to_string(), p.position_at(depth).map(|x| x.render()).unwrap_or_default()])
        .collect();
    let series = points
        .iter()
        .filter_map(|p| p.position_at(depth).map(|x| (p.index as f64, x.to_f64())))
        .collect();
    Ok(Artifact::json(json)
        .with_table(Table {
            headers: vec!["i", "m_i at common depth"],
            rows,
        })
        .with_series(Series {
            name: format!("salient points at depth {}", depth),
            points: series,
        }))
}

pub fn chain(map: &ExactMap, k: usize) -> Out {
    let c = natural_chain(map, k)?;
    let rows = (1..=c.link_count())
        .map(|l| {
            let w = c.link(l);
            vec![l.to_string(), w.lo.render(), w.hi.render()]
        })
        .collect();
    let points = (1..=c.link_count()).map(|l| (l as f64, c.link(l).lo.to_f64())).collect();
    Ok(Artifact::json(c.to_json())
        .with_table(Table {
            headers: vec!["link", "lo", "hi"],
            rows,
        })
        .with_series(Series {
            name: format!("left ends of the links of C_{}", k),
            points,
        }))
}

pub struct SymmetryArgs<'a> {
    pub depth: usize,
    pub window: &'a Window<ExactScalar>,
    pub eps: ExactScalar,
    pub center: Option<ExactScalar>,
    pub compare_depth: Option<usize>,
}

pub fn symmetry(map: &ExactMap, a: SymmetryArgs) -> Out {
    let table = FoldTable::build(map, a.depth, a.window)?;
    let f = table.pl();
    let result = match a.compare_depth {
        Some(i) => {
            let g = FoldTable::build(map, i, &map.core())?.pl();
            is_eps_close(&f, &g, &a.eps)?
        }
        None => is_eps_symmetric(&f, &a.eps, a.center.as_ref())?,
    };
    let mut json = result.to_json();
    json["n"] = json!(a.depth);
    json["window"] = a.window.to_json();
    json["eps"] = a.eps.to_json();
    let mut art = Artifact::json(json).with_series(graph_series(format!("T^{} on the window", a.depth), &table));
    if let Some(m) = &result.matching {
        art = art.with_series(Series {
            name: "matching".into(),
            points: m.iter().map(|(x, y)| (x.to_f64(), y.to_f64())).collect(),
        });
    }
    Ok(art)
}

pub struct VerifyArgs {
    pub max_i: usize,
    pub max_n: usize,
    pub grid: usize,
    pub delta_depth: usize,
    pub k: Option<usize>,
    pub arc_depth: Option<usize>,
    pub eps: Option<ExactScalar>,
}

pub fn verify_lemmas(map: &ExactMap, a: &VerifyArgs) -> Out {
    let mut adjacent = Vec::new();
    for n in 1..=a.max_n {
        adjacent.extend(verify_adjacent_images(map, n)?);
    }
    let lattice = verify_arc_lattice(map, a.max_i)?;
    let seq = invariant_sequence_with(map, a.max_n.max(2), 1 << 16)?;
    let pass = adjacent.is_empty() && lattice.all_pass() && seq.recurrence_holds();
    let json = json!({
        "suite": "lemmas",
        "slope": map.slope().to_json(),
        "pass": pass,
        "adjacent_images": {
            "max_n": a.max_n,
            "violations": adjacent.iter().map(|v| v.to_json()).collect::<Vec<_>>(),
        },
        "lattice": lattice.to_json(),
        "recurrence": {
            "max_n": a.max_n.max(2),
            "pass": seq.recurrence_holds(),
        },
    });
    let rows = lattice
        .checks
        .iter()
        .map(|c| vec![c.lemma.to_string(), c.i.to_string(), c.pass.to_string(), c.witness.clone()])
        .collect();
    Ok(Artifact::json(json)
        .with_table(Table {
            headers: vec!["check", "i", "pass", "witness"],
            rows,
        })
        .failed_if(!pass))
}

fn found_eps(map: &ExactMap, a: &VerifyArgs) -> Result<(ExactScalar, Option<Value>), CliError> {
    if let Some(e) = &a.eps {
        return Ok((e.clone(), None));
    }
    let delta = map.delta_bound(a.delta_depth)?.delta;
    let report = verify_no_symmetry(map, &delta, a.max_n, a.grid)?;
    Ok((report.eps_found.clone(), Some(report.to_json())))
}

pub fn verify_symmetry(map: &ExactMap, a: &VerifyArgs) -> Out {
    let delta = map.delta_bound(a.delta_depth)?;
    let report = verify_no_symmetry(map, &delta.delta, a.max_n, a.grid)?;
    let pass = report.violations.is_empty();
    let json = json!({
        "suite": "symmetry",
        "slope": map.slope().to_json(),
        "pass": pass,
        "delta": delta.to_json(),
        "max_n": a.max_n,
        "grid": a.grid,
        "report": report.to_json(),
    });
    Ok(Artifact::json(json).failed_if(!pass))
}

pub fn verify_completeness_suite(map: &ExactMap, a: &VerifyArgs) -> Out {
    let (eps, sweep) = found_eps(map, a)?;
    let k = match a.k {
        Some(k) => k,
        None => {
            let mut k = 1;
            while natural_chain(map, k)?.mesh.try_ge(&eps)? {
                k += 1;
            }
            k
        }
    };
    let d = a.arc_depth.unwrap_or(k + 10);
    let report = verify_completeness(map, k, d)?;
    let pass = report.all_pass();
    let json = json!({
        "suite": "completeness",
        "slope": map.slope().to_json(),
        "pass": pass,
        "eps": eps.to_json(),
        "sweep": sweep,
        "report": report.to_json(),
    });
    Ok(Artifact::json(json).failed_if(!pass))
}

pub fn verify_lemma12(map: &ExactMap, a: &VerifyArgs) -> Out {
    let (eps, sweep) = found_eps(map, a)?;
    let max_j = a.max_n.min(8);
    let report = lemma12_suite(map, &eps, max_j)?;
    let pass = report.all_found();
    let json = json!({
        "suite": "lemma12",
        "slope": map.slope().to_json(),
        "pass": pass,
        "max_j": max_j,
        "sweep": sweep,
        "report": report.to_json(),
    });
    Ok(Artifact::json(json).failed_if(!pass))
}

pub fn invariant(map: &ExactMap, max_depth: usize) -> Out {
    let seq = invariant_sequence(map, max_depth)?;
    let rows = seq
        .entries
        .iter()
        .map(|e| {
            let p = e
                .pattern
                .as_ref()
                .map(|p| p.levels().iter().map(usize::to_string).collect::<Vec<_>>().join(" "))
                .unwrap_or_default();
            vec![e.n.to_string(), e.side.to_string(), e.length.to_string(), p]
        })
        .collect();
    let points = seq
        .entries
        .iter()
        .map(|e| (e.n as f64, e.length.to_string().parse::<f64>().unwrap_or(f64::INFINITY)))
        .collect();
    Ok(Artifact::json(seq.to_json())
        .with_table(Table {
            headers: vec!["n", "side", "length", "pattern"],
            rows,
        })
        .with_series(Series {
            name: "pattern length".into(),
            points,
        }))
}

pub fn distinguish_cmd(a: &ExactMap, b: &ExactMap, max_depth: usize) -> Out {
    let r = distinguish(a, b, max_depth)?;
    let rows = match &r {
        Some(m) => vec![vec![m.n.to_string(), m.reason.as_str().to_string()]],
        None => vec![],
    };
    Ok(Artifact::json(json!({"result": r.map(|m| m.to_json())})).with_table(Table {
        headers: vec!["n", "reason"],
        rows,
    }))
}

pub fn count(map: &ExactMap, k: usize, level: usize) -> Out {
    let c = count_levels(map, k, level)?;
    let value = match u64::try_from(&c) {
        Ok(v) => json!(v),
        Err(_) => json!(c.to_string()),
    };
    Ok(Artifact::json(json!({"K": k, "n": level, "count": value, "window": "[m_K, m_{K+1})"}))
        .with_table(Table {
            headers: vec!["K", "n", "count"],
            rows: vec![vec![k.to_string(), level.to_string(), c.to_string()]],
        }))
}
