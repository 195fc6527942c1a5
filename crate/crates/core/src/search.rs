//! Deterministic global maximization of a log-valued function over a ball in R^d:
//! a uniform grid pass followed by compass-search refinement of the best cells.

use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    pub radius: f64,
    /// Grid points per real axis.
    pub grid: usize,
    /// Maximum compass-search iterations per candidate.
    pub refine_iters: usize,
    /// Number of grid winners that get refined.
    pub candidates: usize,
}

impl SearchOptions {
    pub fn new(radius: f64, grid: usize, refine_iters: usize) -> Self {
        SearchOptions {
            radius,
            grid: grid.max(3),
            refine_iters,
            candidates: 6,
        }
    }
}

/// Default grid density for a problem with `dim_real` real variables.
pub fn default_grid(dim_real: usize) -> usize {
    match dim_real {
        0 | 1 => 401,
        2 => 121,
        3 => 41,
        4 => 25,
        5 => 15,
        _ => 11,
    }
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub log_value: f64,
    pub argmax: Vec<f64>,
}

fn push_top(top: &mut Vec<(f64, Vec<f64>)>, k: usize, val: f64, x: &[f64]) {
    if !val.is_finite() && val != f64::INFINITY {
        return;
    }
    if top.len() < k || val > top[top.len() - 1].0 {
        let pos = top.partition_point(|(v, _)| *v >= val);
        top.insert(pos, (val, x.to_vec()));
        top.truncate(k);
    }
}

/// Maximizes `f` (a log-value, `-inf` allowed) over the ball of radius `opts.radius`.
pub fn maximize<F>(dim_real: usize, opts: &SearchOptions, f: F) -> SearchResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if dim_real == 0 {
        return SearchResult {
            log_value: f(&[]),
            argmax: vec![],
        };
    }
    let g = opts.grid;
    let r = opts.radius;
    let h = 2.0 * r / (g - 1) as f64;
    let coord = |i: usize| -r + h * i as f64;
    let k = opts.candidates.max(1);

    let chunks: Vec<Vec<(f64, Vec<f64>)>> = (0..g)
        .into_par_iter()
        .map(|i0| {
            let mut top = Vec::new();
            let mut idx = vec![0usize; dim_real];
            idx[0] = i0;
            let mut x = vec![0.0; dim_real];
            let inner = g.pow((dim_real - 1) as u32);
            for flat in 0..inner {
                let mut rem = flat;
                for d in 1..dim_real {
                    idx[d] = rem % g;
                    rem /= g;
                }
                let mut r2 = 0.0;
                for d in 0..dim_real {
                    x[d] = coord(idx[d]);
                    r2 += x[d] * x[d];
                }
                if r2 > r * r * (1.0 + 1e-12) {
                    continue;
                }
                push_top(&mut top, k, f(&x), &x);
            }
            top
        })
        .collect();

    let mut top = Vec::new();
    for chunk in chunks {
        for (v, x) in chunk {
            push_top(&mut top, k, v, &x);
        }
    }
    if top.is_empty() {
        return SearchResult {
            log_value: f64::NEG_INFINITY,
            argmax: vec![0.0; dim_real],
        };
    }

    let mut best = (f64::NEG_INFINITY, vec![0.0; dim_real]);
    for (v0, x0) in top {
        let (v, x) = compass(&f, v0, x0, h, opts.refine_iters, r);
        if v > best.0 {
            best = (v, x);
        }
    }
    SearchResult {
        log_value: best.0,
        argmax: best.1,
    }
}

fn compass<F>(f: &F, mut val: f64, mut x: Vec<f64>, h0: f64, iters: usize, scale: f64) -> (f64, Vec<f64>)
where
    F: Fn(&[f64]) -> f64,
{
    let mut h = h0;
    let floor = 1e-10 * scale.max(1.0);
    let mut trial = x.clone();
    for _ in 0..iters {
        if h < floor {
            break;
        }
        let mut improved = false;
        let mut best_val = val;
        let mut best_move = None;
        for d in 0..x.len() {
            for sign in [1.0, -1.0] {
                trial.copy_from_slice(&x);
                trial[d] += sign * h;
                let v = f(&trial);
                if v > best_val {
                    best_val = v;
                    best_move = Some((d, sign));
                    improved = true;
                }
            }
        }
        match best_move {
            Some((d, sign)) if improved => {
                x[d] += sign * h;
                val = best_val;
            }
            _ => h *= 0.5,
        }
    }
    (val, x)
}
