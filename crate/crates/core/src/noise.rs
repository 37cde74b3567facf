//! Error models: independent qudit noise, faulty-measurement histories,
//! the Phi-Lambda charge mix, and deterministic Cantor-like bundles.
//!
//! Sampling compares raw 64-bit draws against an integer threshold, so a
//! seed reproduces the same samples on every platform.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::code::{compose, edge_id, syndrome_of, CodeParams, Defect, DefectSet, ErrorChain, Orientation, Syndrome};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargeDistribution {
    Uniform,
    /// d = 6 only: charge 3 with weight 1/2, charges 1, 2, 4, 5 with 1/8 each.
    PhiLambda,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub p: f64,
    pub d: u32,
    pub distribution: ChargeDistribution,
}

impl NoiseParams {
    pub fn new(p: f64, d: u32, distribution: ChargeDistribution) -> Result<Self> {
        let np = Self { p, d, distribution };
        np.validate()?;
        Ok(np)
    }

    pub fn uniform(p: f64, d: u32) -> Result<Self> {
        Self::new(p, d, ChargeDistribution::Uniform)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidCode { d: self.d, l: 0 });
        }
        let max = (self.d - 1) as f64 / self.d as f64;
        if !(self.p >= 0.0 && self.p < max) {
            return Err(Error::Probability { p: self.p, max });
        }
        if self.distribution == ChargeDistribution::PhiLambda && self.d != 6 {
            return Err(Error::Config(format!("phi_lambda noise needs d = 6, got d = {}", self.d)));
        }
        Ok(())
    }

    fn threshold(&self) -> u64 {
        // Saturating cast; p < 1 so this never reaches u64::MAX.
        (self.p * 18_446_744_073_709_551_616.0) as u64
    }

    fn draw_charge<R: RngCore>(&self, rng: &mut R) -> u32 {
        match self.distribution {
            ChargeDistribution::Uniform => 1 + rng.random_range(0..self.d - 1),
            ChargeDistribution::PhiLambda => [3, 3, 3, 3, 1, 2, 4, 5][rng.random_range(0..8usize)],
        }
    }
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(trial);
    r
}

fn check(params: &NoiseParams, code: &CodeParams) -> Result<()> {
    params.validate()?;
    if params.d != code.d {
        return Err(Error::Config(format!("noise d = {} but code d = {}", params.d, code.d)));
    }
    Ok(())
}

fn sample_unchecked<R: RngCore>(params: &NoiseParams, code: &CodeParams, rng: &mut R) -> ErrorChain {
    let thr = params.threshold();
    let mut chain = ErrorChain::new();
    for e in 0..code.num_edges() {
        if rng.next_u64() < thr {
            chain.add(e, params.draw_charge(rng), code.d);
        }
    }
    chain
}

pub fn sample_chain<R: RngCore>(params: &NoiseParams, code: &CodeParams, rng: &mut R) -> Result<ErrorChain> {
    check(params, code)?;
    Ok(sample_unchecked(params, code, rng))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementHistory {
    pub rounds: usize,
    /// Data errors added in rounds `1..=T`.
    pub increments: Vec<ErrorChain>,
    /// Measured syndromes of rounds `1..=T+1`; the last one is exact.
    pub measured: Vec<Syndrome>,
}

impl MeasurementHistory {
    pub fn total_error(&self, code: &CodeParams) -> ErrorChain {
        self.increments.iter().fold(ErrorChain::new(), |acc, e| compose(&acc, e, code))
    }
}

pub fn sample_history<R: RngCore>(
    params: &NoiseParams,
    code: &CodeParams,
    rounds: usize,
    rng: &mut R,
) -> Result<MeasurementHistory> {
    check(params, code)?;
    if rounds == 0 {
        return Err(Error::Config("faulty-measurement history needs at least one round".into()));
    }
    let thr = params.threshold();
    let mut acc = ErrorChain::new();
    let mut increments = Vec::with_capacity(rounds);
    let mut measured = Vec::with_capacity(rounds + 1);
    for _ in 0..rounds {
        let inc = sample_unchecked(params, code, rng);
        acc = compose(&acc, &inc, code);
        increments.push(inc);
        let mut s = syndrome_of(&acc, code);
        for x in 0..code.l {
            for y in 0..code.l {
                if rng.next_u64() < thr {
                    s.add((x, y), 1 + rng.random_range(0..code.d - 1), code.d);
                }
            }
        }
        measured.push(s);
    }
    measured.push(syndrome_of(&acc, code));
    Ok(MeasurementHistory { rounds, increments, measured })
}

/// Nonzero differences between consecutive measured syndromes, with an
/// all-trivial reference before round 1. Ordered by `(t, x, y)`.
pub fn syndrome_changes(history: &MeasurementHistory, d: u32) -> DefectSet {
    let mut defects = Vec::new();
    let empty = Syndrome::default();
    let mut prev = &empty;
    for (i, cur) in history.measured.iter().enumerate() {
        let mut keys: Vec<_> = prev.charges.keys().chain(cur.charges.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        for (x, y) in keys {
            let g = (cur.get((x, y)) + d - prev.get((x, y))) % d;
            if g != 0 {
                defects.push(Defect { x, y, t: i + 1, charge: g });
            }
        }
        prev = cur;
    }
    DefectSet { defects, three_d: true }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BundleRegime {
    /// `g_n = l_n - 1`: defeats ED and ABCB without shortcuts.
    PlainEdAbcb,
    /// `g_n = 2^(ceil(log2 l_n) - 1)`: defeats BH without shortcuts.
    PlainBh,
    /// `g_n = 2^n l0 - 1`: defeats ED and ABCB with shortcuts.
    Shortcut,
    /// `g_n = 2^n`: defeats BH with shortcuts.
    ShortcutBh,
}

impl BundleRegime {
    pub const ALL: [BundleRegime; 4] =
        [BundleRegime::PlainEdAbcb, BundleRegime::PlainBh, BundleRegime::Shortcut, BundleRegime::ShortcutBh];

    pub fn name(&self) -> &'static str {
        match self {
            BundleRegime::PlainEdAbcb => "plain_ed_abcb",
            BundleRegime::PlainBh => "plain_bh",
            BundleRegime::Shortcut => "shortcut",
            BundleRegime::ShortcutBh => "shortcut_bh",
        }
    }

    fn gap(&self, n: u32, l_n: usize, l0: usize) -> usize {
        match self {
            BundleRegime::PlainEdAbcb => l_n - 1,
            BundleRegime::PlainBh => {
                let k = usize::BITS - (l_n - 1).leading_zeros();
                1 << (k - 1)
            }
            BundleRegime::Shortcut => (l0 << n) - 1,
            BundleRegime::ShortcutBh => 1 << n,
        }
    }
}

/// `[l_0, ..., l_level]` with `l_{n+1} = 2 l_n + g_n`.
pub fn bundle_lengths(level: u32, l0: usize, regime: BundleRegime) -> Vec<usize> {
    let mut v = vec![l0];
    for n in 0..level {
        let l = v[n as usize];
        v.push(2 * l + regime.gap(n, l, l0));
    }
    v
}

/// Start offsets of the level-0 strings of a bundle, relative to its start.
pub fn bundle_strings(level: u32, l0: usize, regime: BundleRegime) -> Vec<usize> {
    let lens = bundle_lengths(level, l0, regime);
    let mut starts = vec![0usize];
    for (n, &len) in lens.iter().enumerate().take(level as usize) {
        let shift = len + regime.gap(n as u32, len, l0);
        let right: Vec<usize> = starts.iter().map(|s| s + shift).collect();
        starts.extend(right);
    }
    starts
}

/// A level-`level` bundle of charge-1 strings along `y = floor(L/2)`,
/// starting at `x = 0`.
pub fn cantor_bundle(level: u32, l0: usize, regime: BundleRegime, code: &CodeParams) -> Result<ErrorChain> {
    if l0 == 0 {
        return Err(Error::Config("l0 must be positive".into()));
    }
    let len = *bundle_lengths(level, l0, regime).last().unwrap();
    if len > code.l {
        return Err(Error::BundleTooLarge { len, l: code.l });
    }
    let y = code.l / 2;
    let mut chain = ErrorChain::new();
    for s in bundle_strings(level, l0, regime) {
        for x in s + 1..=s + l0 {
            chain.add(edge_id(code.l, x % code.l, y, Orientation::Vertical), 1, code.d);
        }
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_is_empty() {
        let code = CodeParams::new(3, 10).unwrap();
        let np = NoiseParams::uniform(0.0, 3).unwrap();
        let mut r = trial_rng(1, 0);
        assert!(sample_chain(&np, &code, &mut r).unwrap().is_empty());
        let h = sample_history(&np, &code, 5, &mut r).unwrap();
        assert!(h.measured.iter().all(|s| s.is_empty()));
        assert!(syndrome_changes(&h, 3).is_empty());
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(NoiseParams::uniform(0.5, 2).is_err());
        assert!(NoiseParams::uniform(0.66, 3).is_ok());
        assert!(NoiseParams::new(0.1, 3, ChargeDistribution::PhiLambda).is_err());
    }

    #[test]
    fn reproducible_streams() {
        let code = CodeParams::new(5, 12).unwrap();
        let np = NoiseParams::uniform(0.2, 5).unwrap();
        let a = sample_chain(&np, &code, &mut trial_rng(9, 3)).unwrap();
        let b = sample_chain(&np, &code, &mut trial_rng(9, 3)).unwrap();
        let c = sample_chain(&np, &code, &mut trial_rng(9, 4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn measurement_error_gives_time_pair() {
        let h = MeasurementHistory {
            rounds: 3,
            increments: vec![ErrorChain::new(); 3],
            measured: vec![
                Syndrome::default(),
                Syndrome { charges: [((2, 3), 2)].into() },
                Syndrome::default(),
                Syndrome::default(),
            ],
        };
        let ds = syndrome_changes(&h, 5);
        assert_eq!(ds.defects, vec![Defect { x: 2, y: 3, t: 2, charge: 2 }, Defect { x: 2, y: 3, t: 3, charge: 3 }]);
    }

    #[test]
    fn data_error_persists() {
        let code = CodeParams::new(3, 6).unwrap();
        let mut e = ErrorChain::new();
        e.add(edge_id(6, 2, 2, Orientation::Horizontal), 1, 3);
        let s = syndrome_of(&e, &code);
        let h = MeasurementHistory {
            rounds: 3,
            increments: vec![ErrorChain::new(), e, ErrorChain::new()],
            measured: vec![Syndrome::default(), s.clone(), s.clone(), s],
        };
        let ds = syndrome_changes(&h, 3);
        assert_eq!(ds.len(), 2);
        assert!(ds.defects.iter().all(|q| q.t == 2));
        assert_eq!(ds.total_charge(3), 0);
    }

    #[test]
    fn bundle_lengths_per_regime() {
        assert_eq!(bundle_lengths(3, 2, BundleRegime::PlainEdAbcb), vec![2, 5, 14, 41]);
        assert_eq!(bundle_lengths(3, 2, BundleRegime::Shortcut), vec![2, 5, 13, 33]);
        assert_eq!(bundle_lengths(3, 2, BundleRegime::PlainBh), vec![2, 5, 14, 36]);
        assert_eq!(bundle_lengths(3, 2, BundleRegime::ShortcutBh), vec![2, 5, 12, 28]);
        for n in 1..6u32 {
            let l = *bundle_lengths(n, 2, BundleRegime::Shortcut).last().unwrap();
            assert_eq!(l, (n as usize + 1) * (1 << n) + 1);
            let l = *bundle_lengths(n, 2, BundleRegime::PlainEdAbcb).last().unwrap();
            assert_eq!(l, 3usize.pow(n + 1).div_ceil(2));
        }
    }

    #[test]
    fn bundle_shape() {
        let code = CodeParams::new(2, 20).unwrap();
        let c = cantor_bundle(0, 2, BundleRegime::PlainEdAbcb, &code).unwrap();
        assert_eq!(c.len(), 2);
        let s = syndrome_of(&c, &code);
        let pts: Vec<_> = s.charges.keys().copied().collect();
        assert_eq!(pts, vec![(0, 10), (2, 10)]);
        for regime in BundleRegime::ALL {
            for m in 0..3u32 {
                let c = cantor_bundle(m, 2, regime, &CodeParams::new(3, 40).unwrap()).unwrap();
                assert_eq!(c.len(), 2 << m);
                assert_eq!(syndrome_of(&c, &CodeParams::new(3, 40).unwrap()).len(), 2 << m);
            }
        }
        assert!(matches!(
            cantor_bundle(3, 2, BundleRegime::PlainEdAbcb, &CodeParams::new(2, 40).unwrap()),
            Err(Error::BundleTooLarge { len: 41, l: 40 })
        ));
    }
}
