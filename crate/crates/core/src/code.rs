//! The D(Z_d) code on an L x L torus: plaquette geometry, error chains,
//! syndromes and the homology test used to score a decode.
//!
//! Edge ids are `2 * (x * L + y) + bit`. A horizontal edge `h(x, y)` (bit 0)
//! separates plaquette `(x, y - 1)` below from `(x, y)` above; exponent `g`
//! deposits `+g` above and `-g` below. A vertical edge `v(x, y)` (bit 1)
//! separates `(x - 1, y)` on the left from `(x, y)` on the right and deposits
//! `+g` on the right.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Coord = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeParams {
    pub d: u32,
    pub l: usize,
}

impl CodeParams {
    pub fn new(d: u32, l: usize) -> Result<Self> {
        if d < 2 || l < 2 {
            return Err(Error::InvalidCode { d, l });
        }
        Ok(Self { d, l })
    }

    pub fn num_edges(&self) -> usize {
        2 * self.l * self.l
    }

    #[inline]
    pub fn neg(&self, g: u32) -> u32 {
        (self.d - g % self.d) % self.d
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.d as u64) as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    Horizontal = 0,
    Vertical = 1,
}

#[inline]
pub fn edge_id(l: usize, x: usize, y: usize, o: Orientation) -> usize {
    2 * (x * l + y) + o as usize
}

/// Inverse of [`edge_id`].
#[inline]
pub fn edge_coords(l: usize, e: usize) -> (usize, usize, Orientation) {
    let o = if e & 1 == 0 { Orientation::Horizontal } else { Orientation::Vertical };
    let c = e / 2;
    (c / l, c % l, o)
}

/// Plaquettes `(head, tail)` of an edge: `+g` lands on head, `-g` on tail.
pub fn edge_plaquettes(l: usize, e: usize) -> (Coord, Coord) {
    let (x, y, o) = edge_coords(l, e);
    match o {
        Orientation::Horizontal => ((x, y), (x, (y + l - 1) % l)),
        Orientation::Vertical => ((x, y), ((x + l - 1) % l, y)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Displacement {
    pub dx: usize,
    pub dy: usize,
    pub d1: usize,
    pub dinf: usize,
}

#[inline]
pub fn wrap_dist(a: usize, b: usize, l: usize) -> usize {
    let s = a.abs_diff(b);
    s.min(l - s)
}

pub fn torus_displacement(a: Coord, b: Coord, params: &CodeParams) -> Displacement {
    let dx = wrap_dist(a.0, b.0, params.l);
    let dy = wrap_dist(a.1, b.1, params.l);
    Displacement { dx, dy, d1: dx + dy, dinf: dx.max(dy) }
}

/// Sparse map from edge id to a nonzero exponent in `1..d`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorChain {
    exps: BTreeMap<usize, u32>,
}

impl ErrorChain {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a chain from a dense per-edge exponent vector.
    pub fn from_dense(dense: &[u32], d: u32) -> Self {
        let exps = dense
            .iter()
            .enumerate()
            .filter_map(|(e, &g)| (g % d != 0).then_some((e, g % d)))
            .collect();
        Self { exps }
    }

    pub fn get(&self, e: usize) -> u32 {
        self.exps.get(&e).copied().unwrap_or(0)
    }

    /// Adds `g` (mod d) to the exponent on edge `e`.
    pub fn add(&mut self, e: usize, g: u32, d: u32) {
        let v = ((self.get(e) as u64 + g as u64) % d as u64) as u32;
        if v == 0 {
            self.exps.remove(&e);
        } else {
            self.exps.insert(e, v);
        }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.exps.iter().map(|(&e, &g)| (e, g))
    }

    pub fn inverse(&self, params: &CodeParams) -> Self {
        let exps = self.exps.iter().map(|(&e, &g)| (e, params.neg(g))).collect();
        Self { exps }
    }

    pub fn to_dense(&self, params: &CodeParams) -> Vec<u32> {
        let mut v = vec![0; params.num_edges()];
        for (e, g) in self.iter() {
            v[e] = g;
        }
        v
    }
}

/// Sparse map from plaquette to a nonzero charge.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Syndrome {
    pub charges: BTreeMap<Coord, u32>,
}

impl Syndrome {
    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    pub fn len(&self) -> usize {
        self.charges.len()
    }

    pub fn get(&self, c: Coord) -> u32 {
        self.charges.get(&c).copied().unwrap_or(0)
    }

    pub fn add(&mut self, c: Coord, g: u32, d: u32) {
        let v = ((self.get(c) as u64 + g as u64) % d as u64) as u32;
        if v == 0 {
            self.charges.remove(&c);
        } else {
            self.charges.insert(c, v);
        }
    }

    /// Charge-wise sum mod d.
    pub fn combine(&self, other: &Syndrome, d: u32) -> Syndrome {
        let mut out = self.clone();
        for (&c, &g) in &other.charges {
            out.add(c, g, d);
        }
        out
    }

    pub fn total_charge(&self, d: u32) -> u32 {
        (self.charges.values().map(|&g| g as u64).sum::<u64>() % d as u64) as u32
    }
}

pub fn syndrome_of(chain: &ErrorChain, params: &CodeParams) -> Syndrome {
    let mut s = Syndrome::default();
    for (e, g) in chain.iter() {
        let (head, tail) = edge_plaquettes(params.l, e);
        s.add(head, g, params.d);
        s.add(tail, params.neg(g), params.d);
    }
    s
}

pub fn compose(a: &ErrorChain, b: &ErrorChain, params: &CodeParams) -> ErrorChain {
    let mut out = a.clone();
    for (e, g) in b.iter() {
        out.add(e, g, params.d);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LogicalClass {
    pub gx: u32,
    pub gy: u32,
}

impl LogicalClass {
    pub fn is_trivial(&self) -> bool {
        self.gx == 0 && self.gy == 0
    }
}

/// Windings through the cut at x = 0 (vertical edges `v(0, y)`) and through
/// the cut at y = 0 (horizontal edges `h(x, 0)`).
pub fn logical_class(chain: &ErrorChain, params: &CodeParams) -> Result<LogicalClass> {
    let s = syndrome_of(chain, params);
    if !s.is_empty() {
        return Err(Error::NonEmptySyndrome(s.len()));
    }
    Ok(winding(chain, params))
}

pub(crate) fn winding(chain: &ErrorChain, params: &CodeParams) -> LogicalClass {
    let l = params.l;
    let d = params.d as u64;
    let gx = (0..l).map(|y| chain.get(edge_id(l, 0, y, Orientation::Vertical)) as u64).sum::<u64>() % d;
    let gy = (0..l).map(|x| chain.get(edge_id(l, x, 0, Orientation::Horizontal)) as u64).sum::<u64>() % d;
    LogicalClass { gx: gx as u32, gy: gy as u32 }
}

/// Visits the oriented unit steps of the canonical path `from -> to`:
/// x first, then y, each along the shorter way round (ties go up).
/// The callback receives `(edge, sign)` where `sign` is +1 or -1.
pub(crate) fn for_each_step(from: Coord, to: Coord, l: usize, mut f: impl FnMut(usize, i8)) {
    let (mut x, mut y) = from;
    let fwd = |a: usize, b: usize| (b + l - a) % l;
    let sx = fwd(from.0, to.0);
    if sx <= l - sx {
        for _ in 0..sx {
            let nx = (x + 1) % l;
            f(edge_id(l, nx, y, Orientation::Vertical), 1);
            x = nx;
        }
    } else {
        for _ in 0..l - sx {
            f(edge_id(l, x, y, Orientation::Vertical), -1);
            x = (x + l - 1) % l;
        }
    }
    let sy = fwd(from.1, to.1);
    if sy <= l - sy {
        for _ in 0..sy {
            let ny = (y + 1) % l;
            f(edge_id(l, x, ny, Orientation::Horizontal), 1);
            y = ny;
        }
    } else {
        for _ in 0..l - sy {
            f(edge_id(l, x, y, Orientation::Horizontal), -1);
            y = (y + l - 1) % l;
        }
    }
}

/// Chain along one minimal Manhattan path whose syndrome is
/// `{from: -g, to: +g}`.
pub fn transport_chain(from: Coord, to: Coord, g: u32, params: &CodeParams) -> ErrorChain {
    let mut c = ErrorChain::new();
    let ng = params.neg(g);
    for_each_step(from, to, params.l, |e, s| c.add(e, if s > 0 { g } else { ng }, params.d));
    c
}

/// The small closed loop around lattice vertex `(x, y)`, i.e. one stabilizer.
pub fn stabilizer_chain(x: usize, y: usize, g: u32, params: &CodeParams) -> ErrorChain {
    let l = params.l;
    let d = params.d;
    let ng = params.neg(g);
    let mut c = ErrorChain::new();
    c.add(edge_id(l, x, (y + l - 1) % l, Orientation::Vertical), g, d);
    c.add(edge_id(l, x, y, Orientation::Horizontal), g, d);
    c.add(edge_id(l, x, y, Orientation::Vertical), ng, d);
    c.add(edge_id(l, (x + l - 1) % l, y, Orientation::Horizontal), ng, d);
    c
}

/// A point defect: a nonzero plaquette charge (2D, `t = 0`) or a nonzero
/// syndrome change at round `t` (3D).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Defect {
    pub x: usize,
    pub y: usize,
    pub t: usize,
    pub charge: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectSet {
    pub defects: Vec<Defect>,
    /// True when `t` is a time coordinate (faulty measurements).
    pub three_d: bool,
}

impl DefectSet {
    pub fn from_syndrome(s: &Syndrome) -> Self {
        let defects = s.charges.iter().map(|(&(x, y), &charge)| Defect { x, y, t: 0, charge }).collect();
        Self { defects, three_d: false }
    }

    pub fn len(&self) -> usize {
        self.defects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defects.is_empty()
    }

    pub fn total_charge(&self, d: u32) -> u32 {
        (self.defects.iter().map(|q| q.charge as u64).sum::<u64>() % d as u64) as u32
    }
}
