//! Threshold crossings, L*, the hashing bound and small fits.

use serde::{Deserialize, Serialize};

use super::{run_batch, ExperimentConfig, TrialStats};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub p_c: f64,
    /// Max minus min of the pairwise crossings.
    pub spread: f64,
    /// `(L_a, L_b, p)` for each consecutive size pair.
    pub crossings: Vec<(usize, usize, f64)>,
}

fn interp(curve: &[(f64, f64)], p: f64) -> f64 {
    let i = curve.partition_point(|&(x, _)| x < p);
    if i < curve.len() && curve[i].0 == p {
        return curve[i].1;
    }
    let (x0, y0) = curve[i - 1];
    let (x1, y1) = curve[i];
    y0 + (y1 - y0) * (p - x0) / (x1 - x0)
}

/// Crossing of two piecewise-linear curves, the larger code starting below.
/// Among several sign changes the one that best separates the grid into
/// "below" and "above" points wins.
fn crossing(a: &[(f64, f64)], b: &[(f64, f64)]) -> Option<f64> {
    let lo = a[0].0.max(b[0].0);
    let hi = a[a.len() - 1].0.min(b[b.len() - 1].0);
    let mut grid: Vec<f64> = a.iter().chain(b).map(|q| q.0).filter(|&p| p >= lo && p <= hi).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let diff: Vec<f64> = grid.iter().map(|&p| interp(b, p) - interp(a, p)).collect();
    let mut best: Option<(usize, f64)> = None;
    for i in 1..grid.len() {
        let (d0, d1) = (diff[i - 1], diff[i]);
        if !(d0 < 0.0 && d1 >= 0.0) {
            continue;
        }
        let p = grid[i - 1] + (grid[i] - grid[i - 1]) * (-d0) / (d1 - d0);
        let score = diff[..i].iter().filter(|&&d| d < 0.0).count() + diff[i..].iter().filter(|&&d| d > 0.0).count();
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, p));
        }
    }
    best.map(|b| b.1)
}

/// Mean of the crossings of consecutive sizes. Each curve is `(L, [(p, p_L)])`.
pub fn estimate_threshold(curves: &[(usize, Vec<(f64, f64)>)]) -> Result<ThresholdEstimate> {
    if curves.len() < 2 {
        return Err(Error::Config("threshold estimate needs at least two sizes".into()));
    }
    let mut cs: Vec<(usize, Vec<(f64, f64)>)> = curves.to_vec();
    cs.sort_by_key(|c| c.0);
    for c in &mut cs {
        c.1.sort_by(|x, y| x.0.total_cmp(&y.0));
        if c.1.len() < 2 {
            return Err(Error::Config(format!("curve for L = {} has fewer than two points", c.0)));
        }
    }
    let mut crossings = Vec::new();
    for w in cs.windows(2) {
        let p = crossing(&w[0].1, &w[1].1).ok_or(Error::NoCrossing { a: w[0].0, b: w[1].0 })?;
        crossings.push((w[0].0, w[1].0, p));
    }
    let ps: Vec<f64> = crossings.iter().map(|c| c.2).collect();
    let p_c = ps.iter().sum::<f64>() / ps.len() as f64;
    let spread = ps.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ps.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ThresholdEstimate { p_c, spread, crossings })
}

#[derive(Debug, Clone, PartialEq)]
pub enum LStar {
    Found { l: usize, stats: Vec<TrialStats> },
    /// No size in the sweep reached `p_L + 2 sigma < p`; `L*` exceeds `largest`.
    Exhausted { largest: usize, stats: Vec<TrialStats> },
}

/// First `L` of the sweep with `p_L + 2 sigma < p`.
pub fn l_star(p: f64, base: &ExperimentConfig, ls: &[usize]) -> Result<LStar> {
    let mut stats = Vec::new();
    for &l in ls {
        let s = run_batch(&ExperimentConfig { l, p, ..base.clone() })?;
        let ok = s.p_logical + 2.0 * s.sigma < p;
        stats.push(s);
        if ok {
            return Ok(LStar::Found { l, stats });
        }
    }
    Ok(LStar::Exhausted { largest: ls.iter().copied().max().unwrap_or(0), stats })
}

/// Root of `-p ln(p/(d-1)) - (1-p) ln(1-p) = ln(d)/2` in `(0, (d-1)/d)`.
pub fn hashing_bound(d: u32) -> f64 {
    let dm1 = (d - 1) as f64;
    let h = |p: f64| -p * (p / dm1).ln() - (1.0 - p) * (1.0 - p).ln();
    let target = (d as f64).ln() / 2.0;
    let (mut lo, mut hi) = (0.0f64, dm1 / d as f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if mid > 0.0 && h(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub a: f64,
    pub b: f64,
    pub r2: f64,
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> LogFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a * x - b).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    LogFit { a, b, r2 }
}

/// Least squares `y = a ln(x) + b`.
pub fn fit_log(xs: &[f64], ys: &[f64]) -> LogFit {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    linear_fit(&lx, ys)
}

/// Slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> LogFit {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly)
}
