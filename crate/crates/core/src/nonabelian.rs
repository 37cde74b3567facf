//! The Phi-Lambda anyon model, simulated on D(Z_6).
//!
//! Charges 1, 2, 4, 5 look like Phi, charge 3 like Lambda. The decoder only
//! ever learns the category of a cluster: the true charges sit inside
//! [`HiddenDefects`] and the clustering engine, and every decision is a
//! function of categories and positions.

use serde::{Deserialize, Serialize};

use crate::code::{CodeParams, Defect, DefectSet, ErrorChain, Syndrome};
use crate::error::{Error, Result};
use crate::hdrg::engine::INF;
use crate::hdrg::Class;
use crate::matching::mwpm;
use crate::mwm::{beta, log_multiplicity, pairing_weight, DecoderConfig, MwmState};

pub const PHI_LAMBDA_D: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FusionCategory {
    Vacuum,
    Lambda,
    Phi,
}

pub fn categorize(g: u32) -> FusionCategory {
    match g % 6 {
        0 => FusionCategory::Vacuum,
        3 => FusionCategory::Lambda,
        _ => FusionCategory::Phi,
    }
}

/// Category of the fusion of two hidden charges.
pub fn fuse(a: u32, b: u32) -> FusionCategory {
    categorize(a + b)
}

fn stage1_class(g: u32) -> Class {
    match categorize(g) {
        FusionCategory::Vacuum => Class::Neutral,
        FusionCategory::Lambda => Class::Freeze,
        FusionCategory::Phi => Class::Continue,
    }
}

/// Defects with their true Z_6 charges kept out of reach of the decoder.
#[derive(Debug, Clone)]
pub struct HiddenDefects {
    inner: DefectSet,
}

impl HiddenDefects {
    pub fn from_syndrome(s: &Syndrome) -> Self {
        Self { inner: DefectSet::from_syndrome(s) }
    }

    pub fn from_defects(inner: DefectSet) -> Self {
        Self { inner }
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    /// What the decoder may see: positions and categories.
    pub fn visible(&self) -> Vec<(usize, usize, FusionCategory)> {
        self.inner.defects.iter().map(|q| (q.x, q.y, categorize(q.charge))).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhiLambdaConfig {
    pub stage1: DecoderConfig,
    /// Lets stage 2 route through wormholes left by stage 1.
    pub stage2_wormholes: bool,
    pub stage2_dm1: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiLambdaOutput {
    pub recovery: ErrorChain,
    pub stage1_iterations: usize,
    /// Member defect indices of each stage-1 pair, in fusion order.
    pub stage1_pairs: Vec<(Vec<usize>, Vec<usize>)>,
    /// Lambda clusters (as member defect indices) paired in stage 2.
    pub stage2_pairs: Vec<(Vec<usize>, Vec<usize>)>,
}

pub fn decode_phi_lambda(
    defects: &HiddenDefects,
    code: &CodeParams,
    p: f64,
    cfg: &PhiLambdaConfig,
) -> Result<PhiLambdaOutput> {
    if code.d != PHI_LAMBDA_D {
        return Err(Error::Config(format!("Phi-Lambda decoding needs d = 6, got d = {}", code.d)));
    }
    let is_lambda = |q: &Defect| categorize(q.charge) == FusionCategory::Lambda;
    let mut st = MwmState::with_rules(&defects.inner, code, p, &cfg.stage1, stage1_class, is_lambda)?;
    let mut stage1_pairs = Vec::new();
    while !st.is_done() {
        stage1_pairs.extend(st.step()?);
    }
    let stage1_iterations = st.iterations();
    let e = &mut st.engine;

    let lambdas = e.frozen_nodes();
    let n = lambdas.len();
    if n % 2 == 1 {
        return Err(Error::OddLambda(n));
    }
    let b2 = beta(p, PHI_LAMBDA_D)?;
    let anchors: Vec<u32> = lambdas.iter().map(|&c| e.anchor(c)).collect();
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    let mut legs = vec![Vec::new(); n * n];
    for i in 0..n {
        let reach = cfg.stage2_wormholes.then(|| e.search(&[anchors[i]], |_| false, INF));
        for j in i + 1..n {
            let direct = e.point_dist(anchors[i], anchors[j]);
            let (dx, dy, _) = e.components(anchors[i], anchors[j]);
            let mut w = pairing_weight(direct, log_multiplicity(dx, dy, 0, PHI_LAMBDA_D, cfg.stage2_dm1), b2);
            legs[i * n + j] = vec![(anchors[i], anchors[j])];
            if let Some(s) = &reach {
                let d = s.dist(anchors[j]);
                if d < direct {
                    let c = if cfg.stage2_dm1 { ((PHI_LAMBDA_D - 1) as f64).ln() } else { 0.0 };
                    w = pairing_weight(d, c, b2);
                    legs[i * n + j] = s.legs_to(anchors[j]);
                }
            }
            edges.push((i, j, w));
        }
    }
    let pairs = mwpm(n, &edges)?;
    let mut stage2_pairs = Vec::with_capacity(pairs.len());
    for (i, j) in pairs {
        let (a, b) = (lambdas[i], lambdas[j]);
        stage2_pairs.push((sorted(e.members(a)), sorted(e.members(b))));
        let g = e.charge(a);
        e.move_along(anchors[i], &legs[i * n + j], anchors[j], g);
    }
    Ok(PhiLambdaOutput { recovery: e.recovery(), stage1_iterations, stage1_pairs, stage2_pairs })
}

fn sorted(m: &[u32]) -> Vec<usize> {
    let mut v: Vec<usize> = m.iter().map(|&p| p as usize).collect();
    v.sort_unstable();
    v
}
