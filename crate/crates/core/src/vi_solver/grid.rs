//! Coarse-to-fine grid minimization of the merit function.

use super::{Objective, TraceEntry};
use crate::geometry::ConvexCompactSet;
use crate::vector::Vector;

const COARSE_BUDGET: usize = 20_000;
const CANDIDATES: usize = 3;
const MAX_LEVELS: usize = 80;
const MIN_SPACING: f64 = 1e-14;

pub(crate) struct GridResult {
    pub best: Vector,
    pub best_value: Vector,
    pub best_merit: f64,
    pub evaluations: usize,
    pub trace: Vec<TraceEntry>,
    pub success: bool,
}

struct Scored {
    x: Vector,
    fx: Vector,
    merit: f64,
}

fn score(obj: &Objective<'_>, x: Vector) -> Option<Scored> {
    let fx = obj.map.eval(&x).ok()?;
    let merit = obj.merit(&x, &fx);
    merit.is_finite().then_some(Scored { x, fx, merit })
}

fn better(a: &Scored, b: &Scored) -> bool {
    a.merit < b.merit || (a.merit == b.merit && lex_less(&a.x, &b.x))
}

fn lex_less(a: &Vector, b: &Vector) -> bool {
    a.iter().zip(b.iter()).find(|(x, y)| x != y).is_some_and(|(x, y)| x < y)
}

/// Coarse grid over the set and its spacing.
fn coarse_points(k: &ConvexCompactSet) -> (Vec<Vector>, f64) {
    match k {
        ConvexCompactSet::Simplex { dim } => {
            let n = *dim;
            let mut m = 1usize;
            while m < 4000 && binomial(m + 1 + n - 1, n - 1) <= COARSE_BUDGET {
                m += 1;
            }
            let mut out = Vec::new();
            let mut parts = vec![0usize; n];
            compositions(m, m, 0, &mut parts, &mut out);
            (out, 1.0 / m as f64)
        }
        _ => {
            let n = k.dim();
            let per_axis = ((COARSE_BUDGET as f64).powf(1.0 / n as f64).floor() as usize).max(3);
            let h = 2.0 / (per_axis - 1) as f64;
            let pts = box_points(&Vector::zeros(n), per_axis, h, n)
                .into_iter()
                .map(|p| k.project_point(&p))
                .collect();
            (pts, h)
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let mut r: usize = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// All points of `Δ` whose coordinates are multiples of `1 / total`.
fn compositions(left: usize, total: usize, i: usize, parts: &mut Vec<usize>, out: &mut Vec<Vector>) {
    let n = parts.len();
    if i == n - 1 {
        parts[i] = left;
        out.push(Vector::raw(parts.iter().map(|&c| c as f64 / total as f64).collect()));
        return;
    }
    for c in 0..=left {
        parts[i] = c;
        compositions(left - c, total, i + 1, parts, out);
    }
}

/// `count^d` points of spacing `h` centered at `center`, varying the first
/// `d` coordinates.
fn box_points(center: &Vector, count: usize, h: f64, d: usize) -> Vec<Vector> {
    let half = (count as f64 - 1.0) / 2.0;
    let total = count.pow(d as u32);
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut p = center.clone().into_inner();
        let mut r = idx;
        for c in p.iter_mut().take(d) {
            *c += (((r % count) as f64) - half) * h;
            r /= count;
        }
        out.push(Vector::raw(p));
    }
    out
}

/// Spacing-`h` neighborhood of `center` mapped into the set. On the simplex
/// the last coordinate absorbs the offsets so points stay on the hyperplane.
fn local_points(k: &ConvexCompactSet, center: &Vector, per_side: usize, h: f64) -> Vec<Vector> {
    let count = 2 * per_side + 1;
    match k {
        ConvexCompactSet::Simplex { dim } if *dim > 1 => {
            let d = dim - 1;
            box_points(center, count, h, d)
                .into_iter()
                .map(|mut p| {
                    let shift: f64 = (0..d).map(|i| p[i] - center[i]).sum();
                    let mut c = p.clone().into_inner();
                    c[d] -= shift;
                    p = Vector::raw(c);
                    k.project_point(&p)
                })
                .collect()
        }
        _ => box_points(center, count, h, k.dim())
            .into_iter()
            .map(|p| k.project_point(&p))
            .collect(),
    }
}

fn per_side(free_dims: usize) -> usize {
    match free_dims {
        0 | 1 => 20,
        2 => 10,
        3 => 6,
        _ => 4,
    }
}

pub(crate) fn search(obj: &Objective<'_>) -> GridResult {
    let k = obj.set;
    let (coarse, h0) = coarse_points(k);
    let mut evaluations = coarse.len();
    let mut scored: Vec<Scored> = coarse.into_iter().filter_map(|x| score(obj, x)).collect();
    scored.sort_by(|a, b| a.merit.total_cmp(&b.merit).then_with(|| cmp_lex(&a.x, &b.x)));

    let mut picks: Vec<Scored> = Vec::new();
    for s in scored {
        if picks.len() == CANDIDATES {
            break;
        }
        if picks.iter().all(|p| p.x.dist(&s.x) > 3.0 * h0) {
            picks.push(s);
        }
    }

    let free = match k {
        ConvexCompactSet::Simplex { dim } => dim - 1,
        _ => k.dim(),
    };
    let side = per_side(free);
    let mut overall: Option<(Scored, Vec<TraceEntry>)> = None;

    for start in picks {
        let mut cur = start;
        let mut trace = vec![TraceEntry::new(0, cur.merit, &cur.x)];
        let mut h = h0;
        for level in 1..=MAX_LEVELS {
            if cur.merit <= obj.tol || h < MIN_SPACING {
                break;
            }
            let step = 2.0 * h / side as f64;
            let pts = local_points(k, &cur.x, side, step);
            evaluations += pts.len();
            for s in pts.into_iter().filter_map(|x| score(obj, x)) {
                if better(&s, &cur) {
                    cur = s;
                }
            }
            h = step;
            trace.push(TraceEntry::new(level, cur.merit, &cur.x));
        }
        let done = cur.merit <= obj.tol;
        let replace = match &overall {
            None => true,
            Some((b, _)) => better(&cur, b),
        };
        if replace {
            overall = Some((cur, trace));
        }
        if done {
            break;
        }
    }

    let (best, trace) = overall.unwrap_or_else(|| {
        let x = k.center();
        let fx = obj.map.eval(&x).unwrap_or_else(|_| Vector::zeros(k.dim()));
        let merit = f64::INFINITY;
        (Scored { x, fx, merit }, Vec::new())
    });
    GridResult {
        success: best.merit <= obj.tol,
        best: best.x,
        best_value: best.fx,
        best_merit: best.merit,
        evaluations,
        trace,
    }
}

fn cmp_lex(a: &Vector, b: &Vector) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}
