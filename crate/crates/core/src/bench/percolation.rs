//! Does the sparsified defect graph of a d = 3 sample wrap the torus?

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::{syndrome_of, wrap_dist, CodeParams, DefectSet};
use crate::error::Result;
use crate::matching::sparse_distance_edges;
use crate::noise::{sample_chain, trial_rng, NoiseParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercolationPoint {
    pub p: f64,
    #[serde(rename = "L")]
    pub l: usize,
    pub trials: u64,
    pub wraps: u64,
    pub probability: f64,
}

fn signed(a: usize, b: usize, l: usize) -> i64 {
    let up = (b + l - a) % l;
    if 2 * up <= l {
        up as i64
    } else {
        up as i64 - l as i64
    }
}

/// True iff some connected component, unrolled from one of its points,
/// reaches a point at two different lifts.
pub fn wraps(defects: &DefectSet, l: usize) -> bool {
    let pts = &defects.defects;
    let n = pts.len();
    let edges = sparse_distance_edges(n, |a, b| {
        (wrap_dist(pts[a].x, pts[b].x, l) + wrap_dist(pts[a].y, pts[b].y, l)) as u64
    });
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut lift: Vec<Option<(i64, i64)>> = vec![None; n];
    let mut queue = std::collections::VecDeque::new();
    for s in 0..n {
        if lift[s].is_some() {
            continue;
        }
        lift[s] = Some((pts[s].x as i64, pts[s].y as i64));
        queue.push_back(s);
        while let Some(a) = queue.pop_front() {
            let (ax, ay) = lift[a].unwrap();
            for &b in &adj[a] {
                let want = (ax + signed(pts[a].x, pts[b].x, l), ay + signed(pts[a].y, pts[b].y, l));
                match lift[b] {
                    None => {
                        lift[b] = Some(want);
                        queue.push_back(b);
                    }
                    Some(have) if have != want => return true,
                    Some(_) => {}
                }
            }
        }
    }
    false
}

pub fn percolation_trial(p: f64, l: usize, seed: u64, trial: u64) -> Result<bool> {
    let code = CodeParams::new(3, l)?;
    let np = NoiseParams::uniform(p, 3)?;
    let e = sample_chain(&np, &code, &mut trial_rng(seed, trial))?;
    Ok(wraps(&DefectSet::from_syndrome(&syndrome_of(&e, &code)), l))
}

pub fn percolation_experiment(ps: &[f64], ls: &[usize], trials: u64, seed: u64) -> Result<Vec<PercolationPoint>> {
    let mut out = Vec::new();
    for &l in ls {
        for &p in ps {
            let hits: Vec<bool> =
                (0..trials).into_par_iter().map(|t| percolation_trial(p, l, seed, t)).collect::<Result<_>>()?;
            let w = hits.iter().filter(|&&h| h).count() as u64;
            out.push(PercolationPoint { p, l, trials, wraps: w, probability: w as f64 / trials.max(1) as f64 });
        }
    }
    Ok(out)
}
