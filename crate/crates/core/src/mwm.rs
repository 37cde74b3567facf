//! The minimum-weight-matching HDRG decoder.
//!
//! Each iteration weighs every pair of active clusters by
//! `W_jk = d_jk - ln(mu_jk) / beta`, gives every cluster an abstention
//! weight interpolated between its abstaining and tag-along weights, and
//! solves a minimum-weight matching. Matched pairs are fused; neutral
//! results leave as wormholes that shorten later distances.

use serde::{Deserialize, Serialize};

use crate::code::{CodeParams, DefectSet};
use crate::error::{Error, Result};
use crate::hdrg::engine::{logaddexp, Engine, MuParams};
use crate::hdrg::{abelian_class, Class, DecodeOutput, Metric};
use crate::matching::{mwm_sparse, MatchGraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub lambda: f64,
    /// Relative degeneracy breaker: `eps = epsilon * (1 + |W^min_j|)`.
    pub epsilon: f64,
    pub include_dm1_factor: bool,
    pub use_shortcuts: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self { lambda: 0.3, epsilon: 1e-6, include_dm1_factor: true, use_shortcuts: true }
    }
}

/// Cost per error: `-ln((p / (d - 1)) / (1 - p))`.
pub fn beta(p: f64, d: u32) -> Result<f64> {
    let max = (d - 1) as f64 / d as f64;
    if !(p > 0.0 && p < max) {
        return Err(Error::Probability { p, max });
    }
    Ok(-((p / (d - 1) as f64) / (1.0 - p)).ln())
}

pub fn ln_binom(n: usize, k: usize) -> f64 {
    if k == 0 || k == n {
        return 0.0;
    }
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// `ln mu` for a displacement: the number of shortest lattice paths, times
/// `d - 1` charge labels when `include_dm1` is set. `dt = 0` in 2D.
pub fn log_multiplicity(dx: usize, dy: usize, dt: usize, d: u32, include_dm1: bool) -> f64 {
    let c = if include_dm1 { ((d - 1) as f64).ln() } else { 0.0 };
    c + ln_binom(dx + dy + dt, dt) + ln_binom(dx + dy, dx)
}

pub fn pairing_weight(dist: u64, lmu: f64, beta: f64) -> f64 {
    dist as f64 - lmu / beta
}

/// `W^T_j` from the nearest-neighbour distance and the log-multiplicities
/// of every nearest neighbour.
pub fn tagalong_weight(d_j: u64, nn_lmu: &[f64], beta: f64) -> f64 {
    let l = nn_lmu.iter().copied().reduce(logaddexp).unwrap_or(0.0);
    d_j as f64 - l / beta
}

pub fn abstain_weight(w_min: f64, epsilon: f64) -> f64 {
    w_min / 2.0 + epsilon * (1.0 + w_min.abs())
}

/// Interpolation between abstaining and tag-along weights, never below
/// the abstaining weight.
pub fn vertex_weight(w_a: f64, w_t: f64, lambda: f64) -> f64 {
    if w_t < w_a {
        w_a
    } else {
        w_a + lambda * (w_t - w_a)
    }
}

/// Handle to a cluster inside a running decode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClusterId(pub(crate) u32);

/// Weights of one iteration, indexed like [`MwmState::active`].
#[derive(Debug, Clone)]
pub struct IterationWeights {
    pub clusters: Vec<ClusterId>,
    pub pair: Vec<Vec<f64>>,
    pub tagalong: Vec<f64>,
    pub abstain: Vec<f64>,
    pub vertex: Vec<f64>,
}

/// A decode in progress; exposes single iterations for inspection.
pub struct MwmState {
    pub(crate) engine: Engine,
    beta: f64,
    cfg: DecoderConfig,
    iterations: usize,
}

impl MwmState {
    pub fn new(defects: &DefectSet, code: &CodeParams, p: f64, cfg: &DecoderConfig) -> Result<Self> {
        Self::with_rules(defects, code, p, cfg, abelian_class(code.d), |_| false)
    }

    pub(crate) fn with_rules(
        defects: &DefectSet,
        code: &CodeParams,
        p: f64,
        cfg: &DecoderConfig,
        classify: fn(u32) -> Class,
        frozen: impl Fn(&crate::code::Defect) -> bool,
    ) -> Result<Self> {
        let beta = beta(p, code.d)?;
        let mu = MuParams { d: code.d, dm1: cfg.include_dm1_factor };
        let engine = Engine::new(
            *code,
            defects.defects.clone(),
            Metric::Manhattan,
            cfg.use_shortcuts,
            Some(mu),
            classify,
            frozen,
        );
        Ok(Self { engine, beta, cfg: *cfg, iterations: 0 })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn active(&self) -> Vec<ClusterId> {
        self.engine.active_slots().into_iter().map(|s| ClusterId(self.engine.slot_node(s))).collect()
    }

    pub fn is_done(&self) -> bool {
        self.engine.active_slots().is_empty()
    }

    /// Defect indices (into the input set) belonging to a cluster.
    pub fn members(&self, c: ClusterId) -> Vec<usize> {
        let mut m: Vec<usize> = self.engine.members(c.0).iter().map(|&p| p as usize).collect();
        m.sort_unstable();
        m
    }

    /// The cluster currently holding defect `i`.
    pub fn cluster_of(&self, i: usize) -> ClusterId {
        ClusterId(self.engine.top_of(i as u32))
    }

    pub fn distance(&self, a: ClusterId, b: ClusterId) -> u64 {
        self.engine.dist(self.engine.node_slot(a.0), self.engine.node_slot(b.0))
    }

    pub fn log_mu(&self, a: ClusterId, b: ClusterId) -> f64 {
        self.engine.lmu(self.engine.node_slot(a.0), self.engine.node_slot(b.0))
    }

    pub fn pairing_weight(&self, a: ClusterId, b: ClusterId) -> f64 {
        pairing_weight(self.distance(a, b), self.log_mu(a, b), self.beta)
    }

    pub fn weights(&self) -> IterationWeights {
        let slots = self.engine.active_slots();
        compute_weights(&self.engine, &slots, self.beta, &self.cfg)
    }

    /// Fuses two clusters directly (outside the matching).
    pub fn fuse(&mut self, a: ClusterId, b: ClusterId) -> Class {
        let (sa, sb) = (self.engine.node_slot(a.0), self.engine.node_slot(b.0));
        self.engine.form(sa, sb, true).1
    }

    /// One matching iteration; returns the member sets of each fused pair.
    pub fn step(&mut self) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
        let slots = self.engine.active_slots();
        if slots.is_empty() {
            return Ok(Vec::new());
        }
        if slots.len() == 1 {
            return Err(Error::NoProgress(1));
        }
        self.iterations += 1;
        let w = compute_weights(&self.engine, &slots, self.beta, &self.cfg);
        let n = slots.len();
        let mut g = MatchGraph::new(w.vertex.clone());
        for j in 0..n {
            for k in j + 1..n {
                if w.pair[j][k] < w.vertex[j] + w.vertex[k] {
                    g.add_edge(j, k, w.pair[j][k]);
                }
            }
        }
        let m = mwm_sparse(&g);
        if m.pairs.is_empty() {
            return Err(Error::NoProgress(n));
        }
        let mut out = Vec::with_capacity(m.pairs.len());
        for &(j, k) in &m.pairs {
            let (a, b) = (w.clusters[j], w.clusters[k]);
            out.push((self.members(a), self.members(b)));
            self.fuse(a, b);
        }
        Ok(out)
    }

    pub fn run(&mut self) -> Result<()> {
        while !self.is_done() {
            self.step()?;
        }
        Ok(())
    }

    pub fn finish(self) -> DecodeOutput {
        DecodeOutput { recovery: self.engine.recovery(), iterations: self.iterations }
    }
}

fn compute_weights(e: &Engine, slots: &[usize], beta: f64, cfg: &DecoderConfig) -> IterationWeights {
    let n = slots.len();
    let mut pair = vec![vec![f64::INFINITY; n]; n];
    let mut tagalong = vec![f64::INFINITY; n];
    let mut abstain = vec![f64::INFINITY; n];
    let mut vertex = vec![f64::INFINITY; n];
    for j in 0..n {
        for k in j + 1..n {
            let w = pairing_weight(e.dist(slots[j], slots[k]), e.lmu(slots[j], slots[k]), beta);
            pair[j][k] = w;
            pair[k][j] = w;
        }
    }
    let mut nn = Vec::new();
    for j in 0..n {
        let dj = (0..n).filter(|&k| k != j).map(|k| e.dist(slots[j], slots[k])).min();
        let Some(dj) = dj else { continue };
        nn.clear();
        nn.extend((0..n).filter(|&k| k != j && e.dist(slots[j], slots[k]) == dj).map(|k| e.lmu(slots[j], slots[k])));
        tagalong[j] = tagalong_weight(dj, &nn, beta);
        let wmin = pair[j].iter().copied().fold(f64::INFINITY, f64::min);
        abstain[j] = abstain_weight(wmin, cfg.epsilon);
        vertex[j] = vertex_weight(abstain[j], tagalong[j], cfg.lambda);
    }
    IterationWeights {
        clusters: slots.iter().map(|&s| ClusterId(e.slot_node(s))).collect(),
        pair,
        tagalong,
        abstain,
        vertex,
    }
}

/// Decodes a 2D or 3D defect set. For 3D input the returned recovery is
/// the spatial projection (time-like moves carry no data correction).
pub fn decode(defects: &DefectSet, code: &CodeParams, p: f64, cfg: &DecoderConfig) -> Result<DecodeOutput> {
    let mut st = MwmState::new(defects, code, p, cfg)?;
    st.run()?;
    Ok(st.finish())
}
