//! Generators, independent oracles and invariant checks shared by the
//! property suites and the acceptance runner. Each check takes a seed and
//! returns `Err(description)` on a violation.
#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use std::collections::BTreeMap;

use hdrg::code::*;
use hdrg::hdrg::{hdrg_run, Strategy};
use hdrg::matching::{doubled_graph, mwm, mwm_sparse, mwpm, MatchGraph, Matching};
use hdrg::mwm::{decode, log_multiplicity, pairing_weight, DecoderConfig, MwmState};
use hdrg::noise::{sample_history, syndrome_changes, trial_rng, NoiseParams};
use hdrg::nonabelian::{decode_phi_lambda, HiddenDefects, PhiLambdaConfig};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = std::result::Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

macro_rules! ensure {
    ($c:expr, $($msg:tt)+) => {
        if !$c {
            return Err(format!($($msg)+));
        }
    };
}

pub fn random_chain(r: &mut ChaCha8Rng, code: &CodeParams, density: f64) -> ErrorChain {
    let mut c = ErrorChain::new();
    for e in 0..code.num_edges() {
        if r.random_bool(density) {
            c.add(e, r.random_range(1..code.d), code.d);
        }
    }
    c
}

pub fn random_code(r: &mut ChaCha8Rng, ds: &[u32], ls: std::ops::RangeInclusive<usize>) -> CodeParams {
    CodeParams::new(ds[r.random_range(0..ds.len())], r.random_range(ls)).unwrap()
}

/// Syndrome from the edge definition, without going through the library.
pub fn oracle_syndrome(chain: &ErrorChain, code: &CodeParams) -> BTreeMap<(usize, usize), u32> {
    let (l, d) = (code.l, code.d);
    let mut m: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for (e, g) in chain.iter() {
        let (x, y) = ((e / 2) / l, (e / 2) % l);
        let tail = if e % 2 == 0 { (x, (y + l - 1) % l) } else { ((x + l - 1) % l, y) };
        *m.entry((x, y)).or_default() += g;
        *m.entry(tail).or_default() += d - g;
    }
    m.into_iter().map(|(k, v)| (k, v % d)).filter(|&(_, v)| v != 0).collect()
}

// ---- exact matching oracle -----------------------------------------------------

/// Minimum over every matching (pairs on edges, the rest abstaining), by
/// exhaustive recursion on the lowest free vertex.
pub fn brute_force_mwm(g: &MatchGraph) -> f64 {
    let n = g.len();
    let mut w = vec![vec![None; n]; n];
    for &(j, k, x) in &g.edges {
        let cur: Option<f64> = w[j][k];
        if cur.is_none_or(|c| x < c) {
            w[j][k] = Some(x);
            w[k][j] = Some(x);
        }
    }
    fn rec(free: &mut Vec<bool>, w: &[Vec<Option<f64>>], vw: &[f64]) -> f64 {
        let Some(j) = free.iter().position(|&f| f) else { return 0.0 };
        free[j] = false;
        let mut best = vw[j] + rec(free, w, vw);
        for k in j + 1..free.len() {
            if let (true, Some(x)) = (free[k], w[j][k]) {
                free[k] = false;
                best = best.min(x + rec(free, w, vw));
                free[k] = true;
            }
        }
        free[j] = true;
        best
    }
    rec(&mut vec![true; n], &w, &g.vertex_weights)
}

/// Random graph whose weights are multiples of 1/4, so every sum is exact.
pub fn random_graph(r: &mut ChaCha8Rng, n: usize, density: f64) -> MatchGraph {
    let q = |r: &mut ChaCha8Rng| r.random_range(-40i32..120) as f64 / 4.0;
    let vw = (0..n).map(|_| q(r)).collect();
    let mut g = MatchGraph::new(vw);
    for j in 0..n {
        for k in j + 1..n {
            if r.random_bool(density) {
                let w = q(r);
                g.add_edge(j, k, w);
            }
        }
    }
    g
}

pub fn check_mwm_exact(seed: u64) -> Check {
    let mut r = rng(seed);
    let n = r.random_range(0..=10);
    let density = r.random_range(0.2..1.0);
    let g = random_graph(&mut r, n, density);
    let m = mwm(&g);
    ensure!(m.is_valid(&g), "invalid matching {m:?}");
    let (got, want) = (m.total_weight(&g), brute_force_mwm(&g));
    ensure!(got == want, "n={n}: mwm {got} vs brute force {want}");
    Ok(())
}

pub fn check_doubling(seed: u64) -> Check {
    let mut r = rng(seed);
    let n = r.random_range(1..=9);
    let g = random_graph(&mut r, n, 0.6);
    let (n2, edges) = doubled_graph(&g);
    let pairs = mwpm(n2, &edges).map_err(|e| e.to_string())?;
    let mut wmap = BTreeMap::new();
    for &(a, b, w) in &edges {
        let e = wmap.entry((a.min(b), a.max(b))).or_insert(w);
        if w < *e {
            *e = w;
        }
    }
    let total: f64 = pairs.iter().map(|p| wmap[p]).sum();
    let direct = brute_force_mwm(&g);
    ensure!(total == direct, "doubled {total} vs direct {direct}");
    Ok(())
}

// ---- zd_code ---------------------------------------------------------------------

pub fn check_syndrome(seed: u64) -> Check {
    let mut r = rng(seed);
    let code = random_code(&mut r, &[2, 3, 4, 5, 6, 7], 2..=9);
    let c = random_chain(&mut r, &code, 0.2);
    let s = syndrome_of(&c, &code);
    ensure!(s.total_charge(code.d) == 0, "non-neutral syndrome");
    ensure!(s.charges == oracle_syndrome(&c, &code), "syndrome differs from edge oracle");
    let c2 = random_chain(&mut r, &code, 0.2);
    let lhs = syndrome_of(&compose(&c, &c2, &code), &code);
    let rhs = s.combine(&syndrome_of(&c2, &code), code.d);
    ensure!(lhs == rhs, "syndrome_of is not a homomorphism");
    ensure!(compose(&c, &c.inverse(&code), &code).is_empty(), "inverse does not cancel");
    Ok(())
}

pub fn check_stabilizer_invariance(seed: u64) -> Check {
    let mut r = rng(seed);
    let code = random_code(&mut r, &[2, 3, 5], 3..=8);
    let (l, d) = (code.l, code.d);
    // A closed chain: random loops of both windings plus stabilizers.
    let (gx, gy) = (r.random_range(0..d), r.random_range(0..d));
    let mut c = ErrorChain::new();
    let (y0, x0) = (r.random_range(0..l), r.random_range(0..l));
    for x in 0..l {
        c.add(edge_id(l, x, y0, Orientation::Vertical), gx, d);
    }
    for y in 0..l {
        c.add(edge_id(l, x0, y, Orientation::Horizontal), gy, d);
    }
    for _ in 0..r.random_range(0..20) {
        c = compose(&c, &stabilizer_chain(r.random_range(0..l), r.random_range(0..l), r.random_range(1..d), &code), &code);
    }
    let before = logical_class(&c, &code).map_err(|e| e.to_string())?;
    ensure!(before == LogicalClass { gx, gy }, "class {before:?}, loops ({gx},{gy})");
    let s = stabilizer_chain(r.random_range(0..l), r.random_range(0..l), r.random_range(1..d), &code);
    let after = logical_class(&compose(&c, &s, &code), &code).map_err(|e| e.to_string())?;
    ensure!(before == after, "stabilizer changed the class");
    Ok(())
}

pub fn check_transport(seed: u64) -> Check {
    let mut r = rng(seed);
    let code = random_code(&mut r, &[2, 3, 5, 7], 2..=12);
    let l = code.l;
    let (a, b) = ((r.random_range(0..l), r.random_range(0..l)), (r.random_range(0..l), r.random_range(0..l)));
    let g = r.random_range(1..code.d);
    let t = transport_chain(a, b, g, &code);
    ensure!(t.len() == torus_displacement(a, b, &code).d1, "path length");
    let mut want = Syndrome::default();
    want.add(a, code.neg(g), code.d);
    want.add(b, g, code.d);
    ensure!(syndrome_of(&t, &code) == want, "transport syndrome");
    Ok(())
}

/// Exhaustive on L = 5: symmetric, triangle inequality for d1.
pub fn check_displacement_exhaustive() -> Check {
    let code = CodeParams::new(2, 5).unwrap();
    let pts: Vec<(usize, usize)> = (0..5).flat_map(|x| (0..5).map(move |y| (x, y))).collect();
    for &a in &pts {
        for &b in &pts {
            let ab = torus_displacement(a, b, &code);
            ensure!(ab == torus_displacement(b, a, &code), "asymmetric {a:?} {b:?}");
            for &c in &pts {
                let (ac, cb) = (torus_displacement(a, c, &code), torus_displacement(c, b, &code));
                ensure!(ab.d1 <= ac.d1 + cb.d1, "triangle {a:?} {c:?} {b:?}");
            }
        }
    }
    Ok(())
}

// ---- noise ------------------------------------------------------------------------

pub fn check_history_neutral(seed: u64) -> Check {
    let mut r = rng(seed);
    let code = random_code(&mut r, &[2, 3, 5], 3..=7);
    let np = NoiseParams::uniform(r.random_range(0.0..0.15), code.d).unwrap();
    let h = sample_history(&np, &code, r.random_range(1..6), &mut r).map_err(|e| e.to_string())?;
    let ds = syndrome_changes(&h, code.d);
    ensure!(ds.total_charge(code.d) == 0, "history defects not neutral");
    ensure!(h.measured.last() == Some(&syndrome_of(&h.total_error(&code), &code)), "final round not exact");
    Ok(())
}

// ---- decoders -----------------------------------------------------------------------

fn residual_ok(err: &ErrorChain, rec: &ErrorChain, code: &CodeParams) -> Check {
    let total = compose(rec, err, code);
    ensure!(syndrome_of(&total, code).is_empty(), "residual syndrome");
    Ok(())
}

/// Every decoder clears the syndrome of random 2D and 3D samples.
pub fn check_decoders_clear(seed: u64) -> Check {
    let mut r = rng(seed);
    let code = random_code(&mut r, &[2, 3, 5], 3..=9);
    let p = r.random_range(0.01..0.2);
    let np = NoiseParams::uniform(p, code.d).unwrap();
    let three_d = r.random_bool(0.3);
    let (err, ds) = if three_d {
        let h = sample_history(&np, &code, code.l, &mut r).unwrap();
        (h.total_error(&code), syndrome_changes(&h, code.d))
    } else {
        let e = hdrg::noise::sample_chain(&np, &code, &mut r).unwrap();
        let ds = DefectSet::from_syndrome(&syndrome_of(&e, &code));
        (e, ds)
    };
    let sc = r.random_bool(0.5);
    for s in [Strategy::Bh, Strategy::Abcb, Strategy::Ed] {
        let out = hdrg_run(s, &ds, &code, sc).map_err(|e| format!("{s:?}: {e}"))?;
        residual_ok(&err, &out.recovery, &code).map_err(|m| format!("{s:?} sc={sc}: {m}"))?;
    }
    let cfg = DecoderConfig { lambda: r.random_range(0.0..1.0), use_shortcuts: sc, include_dm1_factor: r.random_bool(0.5), ..Default::default() };
    let out = decode(&ds, &code, p, &cfg).map_err(|e| format!("mwm: {e}"))?;
    residual_ok(&err, &out.recovery, &code).map_err(|m| format!("mwm {cfg:?}: {m}"))?;
    ensure!(out.iterations <= ds.len(), "{} iterations for {} defects", out.iterations, ds.len());
    let again = decode(&ds, &code, p, &cfg).unwrap();
    ensure!(again == out, "mwm decode is not deterministic");
    Ok(())
}

/// Distances between clusters that survive an iteration never grow, and
/// the pairing weight follows the table.
pub fn check_distance_monotone(seed: u64) -> Check {
    let mut r = rng(seed);
    let code = random_code(&mut r, &[2, 3, 5], 6..=12);
    let p = r.random_range(0.03..0.15);
    let e = random_chain(&mut r, &code, p);
    let ds = DefectSet::from_syndrome(&syndrome_of(&e, &code));
    let cfg = DecoderConfig { use_shortcuts: r.random_bool(0.7), ..Default::default() };
    let mut st = MwmState::new(&ds, &code, p, &cfg).unwrap();
    while !st.is_done() {
        let act = st.active();
        let mut before = BTreeMap::new();
        for (i, &a) in act.iter().enumerate() {
            for &b in &act[i + 1..] {
                before.insert((a, b), st.distance(a, b));
            }
        }
        st.step().map_err(|e| e.to_string())?;
        let now = st.active();
        for (i, &a) in now.iter().enumerate() {
            for &b in &now[i + 1..] {
                let k = if a < b { (a, b) } else { (b, a) };
                if let Some(&old) = before.get(&k).or(before.get(&(k.1, k.0))) {
                    ensure!(st.distance(a, b) <= old, "distance grew {old} -> {}", st.distance(a, b));
                }
                if !cfg.use_shortcuts {
                    let (ma, mb) = (st.members(a), st.members(b));
                    let direct = ma
                        .iter()
                        .flat_map(|&x| mb.iter().map(move |&y| (x, y)))
                        .map(|(x, y)| {
                            let (p, q) = (&ds.defects[x], &ds.defects[y]);
                            torus_displacement((p.x, p.y), (q.x, q.y), &code).d1 as u64
                        })
                        .min()
                        .unwrap();
                    ensure!(st.distance(a, b) == direct, "static distance changed");
                }
            }
        }
    }
    Ok(())
}

/// Relative error of `log_multiplicity` against exact binomials.
pub fn check_multiplicity_precision() -> Check {
    let binom = |n: usize, k: usize| -> BigUint {
        let mut v = BigUint::from(1u32);
        for i in 0..k {
            v = v * BigUint::from(n - i) / BigUint::from(i + 1);
        }
        v
    };
    let ln_big = |v: &BigUint| -> f64 {
        let bits = v.bits();
        if bits <= 60 {
            return (v.to_u64_digits().first().copied().unwrap_or(0) as f64).ln();
        }
        let shift = bits - 60;
        let top: BigUint = v >> shift;
        (top.to_u64_digits()[0] as f64).ln() + shift as f64 * std::f64::consts::LN_2
    };
    for d in [2u32, 3, 5, 7919] {
        for dx in 0..=30usize {
            for dy in 0..=30 - dx {
                for dt in (0..=30 - dx - dy).step_by(3) {
                    let exact = binom(dx + dy + dt, dt) * binom(dx + dy, dx) * BigUint::from(d - 1);
                    let want = ln_big(&exact);
                    let got = log_multiplicity(dx, dy, dt, d, true);
                    let err = (got - want).abs() / want.abs().max(1.0);
                    ensure!(err <= 1e-9, "({dx},{dy},{dt}) d={d}: {got} vs {want}");
                    let got0 = log_multiplicity(dx, dy, dt, d, false);
                    let want0 = ln_big(&(binom(dx + dy + dt, dt) * binom(dx + dy, dx)));
                    ensure!((got0 - want0).abs() <= 1e-9 * want0.abs().max(1.0), "no-dm1 ({dx},{dy},{dt})");
                }
            }
        }
    }
    Ok(())
}

pub fn check_weight_monotone(seed: u64) -> Check {
    let mut r = rng(seed);
    let beta = r.random_range(0.5..10.0);
    let d = r.random_range(1..50u64);
    let lmu = r.random_range(0.0..20.0);
    ensure!(pairing_weight(d + 1, lmu, beta) > pairing_weight(d, lmu, beta), "not increasing in distance");
    ensure!(pairing_weight(d, lmu + 0.5, beta) < pairing_weight(d, lmu, beta), "not decreasing in multiplicity");
    let p = 1e-12;
    let b = hdrg::mwm::beta(p, 3).unwrap();
    ensure!((pairing_weight(d, lmu, b) - d as f64).abs() < 1.0, "p -> 0 limit");
    Ok(())
}

/// With lambda = 0 the first iteration pairs exactly the mutually nearest
/// clusters (in pairing weight).
pub fn check_lambda_zero(seed: u64) -> Check {
    let mut r = rng(seed);
    let code = random_code(&mut r, &[2, 3, 5], 8..=14);
    let p = r.random_range(0.02..0.12);
    let e = random_chain(&mut r, &code, p);
    let ds = DefectSet::from_syndrome(&syndrome_of(&e, &code));
    if ds.len() < 2 {
        return Ok(());
    }
    let cfg = DecoderConfig { lambda: 0.0, ..Default::default() };
    let mut st = MwmState::new(&ds, &code, p, &cfg).unwrap();
    let w = st.weights();
    let n = w.clusters.len();
    let argmin = |j: usize| -> Option<usize> {
        let m = (0..n).filter(|&k| k != j).map(|k| w.pair[j][k]).fold(f64::INFINITY, f64::min);
        let ks: Vec<usize> = (0..n).filter(|&k| k != j && w.pair[j][k] == m).collect();
        (ks.len() == 1).then(|| ks[0])
    };
    let nn: Vec<Option<usize>> = (0..n).map(argmin).collect();
    if nn.iter().any(|x| x.is_none()) {
        return Ok(()); // ties: pairing among equals is arbitrary
    }
    let mut want: Vec<(usize, usize)> = (0..n).filter_map(|j| nn[j].filter(|&k| k > j && nn[k] == Some(j)).map(|k| (j, k))).collect();
    want.sort();
    let got_sets = st.step().map_err(|e| e.to_string())?;
    let index = |m: &Vec<usize>| m[0];
    let mut got: Vec<(usize, usize)> = got_sets.iter().map(|(a, b)| (index(a).min(index(b)), index(a).max(index(b)))).collect();
    got.sort();
    ensure!(got == want, "lambda=0 paired {got:?}, mutual nearest {want:?}");
    Ok(())
}

/// Component-wise solve equals whole-graph solve on decoder graphs.
pub fn check_sparse_equals_dense(seed: u64) -> Check {
    let mut r = rng(seed);
    let code = random_code(&mut r, &[2, 3, 5], 8..=16);
    let p = r.random_range(0.01..0.06);
    let e = random_chain(&mut r, &code, p);
    let ds = DefectSet::from_syndrome(&syndrome_of(&e, &code));
    if ds.len() < 2 {
        return Ok(());
    }
    let st = MwmState::new(&ds, &code, p, &DecoderConfig::default()).unwrap();
    let w = st.weights();
    let mut g = MatchGraph::new(w.vertex.clone());
    for j in 0..w.clusters.len() {
        for k in j + 1..w.clusters.len() {
            g.add_edge(j, k, w.pair[j][k]);
        }
    }
    let (a, b): (Matching, Matching) = (mwm(&g), mwm_sparse(&g));
    let (wa, wb) = (a.total_weight(&g), b.total_weight(&g));
    ensure!((wa - wb).abs() <= 1e-9 * (1.0 + wa.abs()), "dense {wa} vs sparse {wb}");
    Ok(())
}

/// The Z_6 automorphism g -> -g fixes every category, so no decision may
/// change; the recovery is the negated one.
pub fn check_firewall(seed: u64) -> Check {
    let mut r = rng(seed);
    let code = CodeParams::new(6, r.random_range(4..=10)).unwrap();
    let p = r.random_range(0.02..0.2);
    let np = NoiseParams::new(p, 6, hdrg::noise::ChargeDistribution::PhiLambda).unwrap();
    let e = hdrg::noise::sample_chain(&np, &code, &mut r).unwrap();
    let flip = e.inverse(&code);
    let cfg = PhiLambdaConfig { stage2_wormholes: r.random_bool(0.5), ..Default::default() };
    let a = decode_phi_lambda(&HiddenDefects::from_syndrome(&syndrome_of(&e, &code)), &code, p, &cfg).map_err(|x| x.to_string())?;
    let b = decode_phi_lambda(&HiddenDefects::from_syndrome(&syndrome_of(&flip, &code)), &code, p, &cfg).map_err(|x| x.to_string())?;
    ensure!(a.stage1_pairs == b.stage1_pairs, "stage 1 decisions depend on hidden charges");
    ensure!(a.stage2_pairs == b.stage2_pairs, "stage 2 decisions depend on hidden charges");
    ensure!(b.recovery == a.recovery.inverse(&code), "relabelled recovery is not the mirror image");
    residual_ok(&e, &a.recovery, &code).map_err(|m| format!("hidden charge not conserved: {m}"))?;
    Ok(())
}

/// Hidden charges read back from the oracle syndrome: stage 2 sees only
/// Lambda clusters, an even number of them, and charge is conserved.
pub fn check_phi_lambda_stages(seed: u64) -> Check {
    let mut r = rng(seed);
    let code = CodeParams::new(6, r.random_range(3..=10)).unwrap();
    let p = r.random_range(0.01..0.2);
    let np = NoiseParams::new(p, 6, hdrg::noise::ChargeDistribution::PhiLambda).unwrap();
    let e = hdrg::noise::sample_chain(&np, &code, &mut r).unwrap();
    let syn = syndrome_of(&e, &code);
    let charges: Vec<u32> = DefectSet::from_syndrome(&syn).defects.iter().map(|q| q.charge).collect();
    let hidden_sum = |m: &[usize]| m.iter().map(|&i| charges[i]).sum::<u32>() % 6;
    ensure!(hidden_sum(&(0..charges.len()).collect::<Vec<_>>()) == 0, "sample is not neutral");
    let out = decode_phi_lambda(&HiddenDefects::from_syndrome(&syn), &code, p, &PhiLambdaConfig::default())
        .map_err(|x| x.to_string())?;
    for (a, b) in &out.stage1_pairs {
        ensure!(a.iter().all(|i| !b.contains(i)), "stage 1 fused overlapping clusters");
    }
    let mut seen = vec![false; charges.len()];
    for (a, b) in &out.stage2_pairs {
        for m in [a, b] {
            ensure!(hidden_sum(m) == 3, "stage 2 cluster {m:?} has hidden charge {}", hidden_sum(m));
            for &i in m.iter() {
                ensure!(!seen[i], "defect {i} in two stage 2 clusters");
                seen[i] = true;
            }
        }
    }
    let rest: Vec<usize> = (0..charges.len()).filter(|&i| !seen[i]).collect();
    ensure!(hidden_sum(&rest) == 0, "defects cleared in stage 1 carry charge {}", hidden_sum(&rest));
    residual_ok(&e, &out.recovery, &code)?;
    Ok(())
}

/// Every chain on the torus with fewer than (L+1)/2 errors, for L = 3, 5.
fn short_chains(d: u32, l: usize) -> Vec<ErrorChain> {
    let code = CodeParams::new(d, l).unwrap();
    let ne = code.num_edges();
    let maxw = l.div_ceil(2) - 1;
    let mut chains = Vec::new();
    for e1 in 0..ne {
        for g1 in 1..d {
            let mut c = ErrorChain::new();
            c.add(e1, g1, d);
            chains.push(c.clone());
            if maxw >= 2 {
                for e2 in e1 + 1..ne {
                    for g2 in 1..d {
                        let mut c2 = c.clone();
                        c2.add(e2, g2, d);
                        chains.push(c2);
                    }
                }
            }
        }
    }
    chains
}

fn short_chain_decoders() -> [&'static str; 4] {
    ["bh", "abcb", "ed", "mwm"]
}

fn decode_fails(name: &str, c: &ErrorChain, code: &CodeParams) -> Result<bool, String> {
    let ds = DefectSet::from_syndrome(&syndrome_of(c, code));
    let rec = match name {
        "bh" => hdrg_run(Strategy::Bh, &ds, code, true),
        "abcb" => hdrg_run(Strategy::Abcb, &ds, code, true),
        "ed" => hdrg_run(Strategy::Ed, &ds, code, true),
        _ => decode(&ds, code, 0.05, &DecoderConfig::default()),
    }
    .map_err(|e| e.to_string())?
    .recovery;
    let lc = logical_class(&compose(&rec, c, code), code).map_err(|e| e.to_string())?;
    Ok(!lc.is_trivial())
}

/// Chains with fewer than (L+1)/2 errors that a decoder (shortcuts on)
/// turns into a logical error, over L = 3, 5 and d = 2, 3.
pub fn short_chain_failures(name: &str) -> Result<Vec<(CodeParams, ErrorChain)>, String> {
    let mut bad = Vec::new();
    for l in [3usize, 5] {
        for d in [2u32, 3] {
            let code = CodeParams::new(d, l).unwrap();
            for c in short_chains(d, l) {
                if decode_fails(name, &c, &code)? {
                    bad.push((code, c));
                }
            }
        }
    }
    Ok(bad)
}

pub fn check_small_chains_exhaustive() -> Check {
    let mut msgs = Vec::new();
    for name in short_chain_decoders() {
        let bad = short_chain_failures(name)?;
        if let Some((code, c)) = bad.first() {
            msgs.push(format!("{name}: {} chains, e.g. L={} d={} {c:?}", bad.len(), code.l, code.d));
        }
    }
    ensure!(msgs.is_empty(), "{}", msgs.join("; "));
    Ok(())
}

/// Reflection of one axis. Along y, h(x, y) lands on h(x, 1 - y) with its
/// charge negated and v(x, y) on v(x, -y); along x the roles swap.
pub fn mirror_chain(c: &ErrorChain, code: &CodeParams, along_x: bool) -> ErrorChain {
    let (l, d) = (code.l, code.d);
    let flip = |z: usize, shift: usize| (l + shift - z) % l;
    let mut m = ErrorChain::new();
    for (e, g) in c.iter() {
        let (x, y) = ((e / 2) / l, (e / 2) % l);
        let (o, x2, y2, g2) = match (e % 2 == 0, along_x) {
            (true, false) => (Orientation::Horizontal, x, flip(y, 1), code.neg(g)),
            (false, false) => (Orientation::Vertical, x, flip(y, 0), g),
            (true, true) => (Orientation::Horizontal, flip(x, 0), y, g),
            (false, true) => (Orientation::Vertical, flip(x, 1), y, code.neg(g)),
        };
        m.add(edge_id(l, x2, y2, o), g2, d);
    }
    m
}

/// Short-chain failures that a mirror image of the lattice does not
/// reproduce come from a tie broken by defect order.
pub fn check_short_chain_failures_orientation_dependent(name: &str) -> Check {
    for (code, c) in short_chain_failures(name)? {
        let mut repaired = false;
        for along_x in [false, true] {
            let m = mirror_chain(&c, &code, along_x);
            let expect = oracle_syndrome(&c, &code)
                .into_iter()
                .map(|((x, y), g)| if along_x { (((code.l - x) % code.l, y), g) } else { ((x, (code.l - y) % code.l), g) })
                .collect::<BTreeMap<_, _>>();
            ensure!(oracle_syndrome(&m, &code) == expect && m.len() == c.len(), "mirror is not a reflection");
            repaired |= !decode_fails(name, &m, &code)?;
        }
        ensure!(repaired, "{name} fails {c:?} and both mirrors on L={} d={}", code.l, code.d);
    }
    Ok(())
}

pub fn check_reproducible(seed: u64) -> Check {
    let code = CodeParams::new(3, 8).unwrap();
    let np = NoiseParams::uniform(0.1, 3).unwrap();
    let a = hdrg::noise::sample_chain(&np, &code, &mut trial_rng(seed, 5)).unwrap();
    let b = hdrg::noise::sample_chain(&np, &code, &mut trial_rng(seed, 5)).unwrap();
    ensure!(a == b, "same seed, different sample");
    Ok(())
}

/// Nontrivial rate and charge balance over `edges` sampled edges, both
/// within 3 sigma; returns the counts per charge.
pub fn check_noise_statistics(p: f64, d: u32, phi_lambda: bool, edges: usize) -> Check {
    use hdrg::noise::ChargeDistribution::*;
    let dist = if phi_lambda { PhiLambda } else { Uniform };
    let np = NoiseParams::new(p, d, dist).unwrap();
    let l = 100usize;
    let code = CodeParams::new(d, l).unwrap();
    let per = code.num_edges();
    let mut counts = vec![0u64; d as usize];
    let mut total = 0u64;
    let mut t = 0u64;
    while (total as usize) < edges {
        let c = hdrg::noise::sample_chain(&np, &code, &mut trial_rng(77, t)).unwrap();
        t += 1;
        total += per as u64;
        for (_, g) in c.iter() {
            counts[g as usize] += 1;
        }
    }
    let n = total as f64;
    let hits: u64 = counts.iter().sum();
    let sd = (n * p * (1.0 - p)).sqrt();
    ensure!((hits as f64 - n * p).abs() < 3.0 * sd, "nontrivial count {hits} vs {}", n * p);
    for g in 1..d as usize {
        let q = if phi_lambda { if g == 3 { p / 2.0 } else { p / 8.0 } } else { p / (d - 1) as f64 };
        let sd = (n * q * (1.0 - q)).sqrt();
        ensure!((counts[g] as f64 - n * q).abs() < 3.0 * sd, "charge {g}: {} vs {}", counts[g], n * q);
    }
    Ok(())
}
