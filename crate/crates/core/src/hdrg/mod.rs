//! The HDRG framework and the three classic clustering strategies:
//! Bravyi-Haah (BH), the ABCB variant, and expanding diamonds (ED).

pub(crate) mod engine;

use serde::{Deserialize, Serialize};

pub use engine::{Class, Metric};
use engine::Engine;

use crate::code::{CodeParams, DefectSet, ErrorChain};
use crate::error::{Error, Result};
use crate::matching::components;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Bh,
    Abcb,
    Ed,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Bh => "bh",
            Strategy::Abcb => "abcb",
            Strategy::Ed => "ed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutput {
    pub recovery: ErrorChain,
    pub iterations: usize,
}

/// True iff the charges sum to zero mod `d`.
pub fn neutrality(charges: &[u32], d: u32) -> bool {
    charges.iter().map(|&g| g as u64).sum::<u64>() % d as u64 == 0
}

pub(crate) fn abelian_class(_d: u32) -> fn(u32) -> Class {
    |g| if g == 0 { Class::Neutral } else { Class::Continue }
}

/// Scale of the ABCB metric: larger than any Manhattan excess over the
/// Chebyshev distance.
pub fn abcb_scale(code: &CodeParams, defects: &DefectSet) -> u64 {
    let tmax = defects.defects.iter().map(|q| q.t).max().unwrap_or(0);
    if defects.three_d {
        2 * (code.l + tmax + 1) as u64
    } else {
        2 * code.l as u64
    }
}

pub fn strategy_metric(strategy: Strategy, code: &CodeParams, defects: &DefectSet) -> Metric {
    match strategy {
        Strategy::Bh => Metric::Chebyshev,
        Strategy::Abcb => Metric::Abcb { scale: abcb_scale(code, defects) },
        Strategy::Ed => Metric::Manhattan,
    }
}

/// Pairs `(j, k)` of slots merged by the BH or ABCB rule at threshold
/// `limit`: edges for every pair within `limit`, clusters = components.
pub(crate) fn component_merges(e: &Engine, active: &[usize], limit: u64) -> Vec<Vec<u32>> {
    let n = active.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if e.dist(active[i], active[j]) <= limit {
                edges.push((i, j));
            }
        }
    }
    components(n, edges)
        .into_iter()
        .filter(|c| c.len() > 1)
        .map(|c| c.into_iter().map(|i| e.slot_node(active[i])).collect())
        .collect()
}

/// Merges a component cluster by cluster, nearest first, and classifies
/// only the final result.
pub(crate) fn merge_component(e: &mut Engine, nodes: &[u32]) {
    let mut rest: Vec<u32> = nodes.to_vec();
    rest.sort_by_key(|&n| (e.minpos(n), n));
    let mut cur = rest.remove(0);
    while !rest.is_empty() {
        let sc = e.node_slot(cur);
        let (bi, _) = rest
            .iter()
            .enumerate()
            .map(|(i, &n)| (i, e.dist(sc, e.node_slot(n))))
            .min_by_key(|&(i, d)| (d, i))
            .unwrap();
        let next = rest.remove(bi);
        let (m, _) = e.form(sc, e.node_slot(next), rest.is_empty());
        cur = m;
    }
}

/// Pairs chosen by one expanding-diamonds sweep with strict radius `limit`.
pub(crate) fn ed_pairs(e: &Engine, active: &[usize], limit: u64) -> Vec<(u32, u32)> {
    let mut order: Vec<usize> = active.to_vec();
    order.sort_by_key(|&s| (e.minpos(e.slot_node(s)), e.slot_node(s)));
    let mut used = vec![false; order.len()];
    let mut pairs = Vec::new();
    for i in 0..order.len() {
        if used[i] {
            continue;
        }
        let mut best: Option<(u64, usize)> = None;
        for j in i + 1..order.len() {
            if used[j] {
                continue;
            }
            let d = e.dist(order[i], order[j]);
            if d < limit && best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, j));
            }
        }
        if let Some((_, j)) = best {
            used[i] = true;
            used[j] = true;
            pairs.push((e.slot_node(order[i]), e.slot_node(order[j])));
        }
    }
    pairs
}

/// Runs a classic strategy until every cluster is neutral and removed.
pub fn hdrg_run(strategy: Strategy, defects: &DefectSet, code: &CodeParams, shortcuts: bool) -> Result<DecodeOutput> {
    let metric = strategy_metric(strategy, code, defects);
    let mut e = Engine::new(*code, defects.defects.clone(), metric, shortcuts, None, abelian_class(code.d), |_| false);
    let tmax = defects.defects.iter().map(|q| q.t).max().unwrap_or(0);
    let max_n = 4 * (code.l + tmax + 2) + 64;
    let mut iterations = 0;
    let mut n = 0usize;
    loop {
        let active = e.active_slots();
        if active.is_empty() {
            break;
        }
        if n > max_n {
            return Err(Error::NoProgress(active.len()));
        }
        iterations += 1;
        match strategy {
            Strategy::Bh | Strategy::Abcb => {
                let limit = match metric {
                    Metric::Chebyshev => 1u64.checked_shl(n as u32).unwrap_or(u64::MAX / 8).min(u64::MAX / 8),
                    Metric::Abcb { scale } => (n as u64 + 1) * scale,
                    Metric::Manhattan => unreachable!(),
                };
                for comp in component_merges(&e, &active, limit) {
                    merge_component(&mut e, &comp);
                }
            }
            Strategy::Ed => {
                for (a, b) in ed_pairs(&e, &active, n as u64 + 1) {
                    let (sa, sb) = (e.node_slot(a), e.node_slot(b));
                    e.form(sa, sb, true);
                }
            }
        }
        n += 1;
    }
    Ok(DecodeOutput { recovery: e.recovery(), iterations })
}
