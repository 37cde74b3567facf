//! Cluster engine shared by every HDRG strategy.
//!
//! Clusters form a merge forest over the defect points. Each internal node
//! keeps the route that joined its two children, so the recovery can always
//! be replayed along paths the decoder actually believed in. Active and
//! frozen clusters own a slot in a dense distance table; the table holds
//! shortest distances where moving inside any earlier cluster (including
//! removed ones, the wormholes) is free.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::code::{for_each_step, wrap_dist, CodeParams, Defect, ErrorChain};

pub(crate) const NONE: u32 = u32::MAX;
pub(crate) const INF: u64 = u64::MAX / 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Manhattan,
    Chebyshev,
    /// Chebyshev in units of `scale`, refined by the Manhattan excess.
    Abcb { scale: u64 },
}

pub(crate) fn metric_value(m: Metric, dx: usize, dy: usize, dt: usize) -> u64 {
    let sum = (dx + dy + dt) as u64;
    let max = dx.max(dy).max(dt) as u64;
    match m {
        Metric::Manhattan => sum,
        Metric::Chebyshev => max,
        Metric::Abcb { scale } => max * scale + (sum - max),
    }
}

/// What happens to a freshly formed cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    /// Removed; its points become a wormhole.
    Neutral,
    /// Stays active.
    Continue,
    /// Leaves the game but keeps its slot; never a shortcut.
    Freeze,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Status {
    Active,
    Wormhole,
    Frozen,
    Absorbed,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct MuParams {
    pub d: u32,
    pub dm1: bool,
}

#[derive(Debug, Clone)]
struct Node {
    parent: u32,
    children: [u32; 2],
    /// Legs `(p, q)` from a point under `children[0]` to one under
    /// `children[1]`; consecutive legs are joined by free moves.
    route: Vec<(u32, u32)>,
    via: bool,
    status: Status,
    charge: u32,
    anchor: u32,
    minpos: (usize, usize, usize),
}

#[derive(Debug, Clone, Copy)]
enum Prev {
    Source,
    Leg(u32),
    Jump(u32),
}

/// Result of a point-level shortest-path search.
pub(crate) struct Search {
    dist: Vec<u64>,
    prev: Vec<Prev>,
}

impl Search {
    pub(crate) fn dist(&self, p: u32) -> u64 {
        self.dist[p as usize]
    }

    /// Legs of the path ending at `end`, in travel order.
    pub(crate) fn legs_to(&self, end: u32) -> Vec<(u32, u32)> {
        let mut legs = Vec::new();
        let mut cur = end;
        loop {
            match self.prev[cur as usize] {
                Prev::Source => break,
                Prev::Leg(f) => {
                    legs.push((f, cur));
                    cur = f;
                }
                Prev::Jump(f) => cur = f,
            }
        }
        legs.reverse();
        legs
    }
}

pub(crate) struct Engine {
    pub(crate) code: CodeParams,
    metric: Metric,
    shortcuts: bool,
    mu: Option<MuParams>,
    /// Extra log factor per shortcut hop: the global (d-1) that is
    /// normalised out of every multiplicity when the factor is off.
    hop_lmu: f64,
    classify: fn(u32) -> Class,
    pts: Vec<Defect>,
    nodes: Vec<Node>,
    members: Vec<Vec<u32>>,
    top: Vec<u32>,
    cap: usize,
    slots: Vec<u32>,
    rows: Vec<u32>,
    slot_of: Vec<u32>,
    dist: Vec<u64>,
    lmu: Vec<f64>,
    rec: Vec<u32>,
    mark: Vec<u32>,
    mark_gen: u32,
}

#[inline]
pub(crate) fn logaddexp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

impl Engine {
    /// `frozen` marks defects that start frozen (never paired by this engine).
    pub(crate) fn new(
        code: CodeParams,
        pts: Vec<Defect>,
        metric: Metric,
        shortcuts: bool,
        mu: Option<MuParams>,
        classify: fn(u32) -> Class,
        frozen: impl Fn(&Defect) -> bool,
    ) -> Self {
        let n = pts.len();
        let nodes: Vec<Node> = pts
            .iter()
            .enumerate()
            .map(|(i, p)| Node {
                parent: NONE,
                children: [NONE, NONE],
                route: Vec::new(),
                via: false,
                status: if frozen(p) { Status::Frozen } else { Status::Active },
                charge: p.charge % code.d,
                anchor: i as u32,
                minpos: (p.x, p.y, p.t),
            })
            .collect();
        let hop_lmu = match mu {
            Some(m) if !m.dm1 => ((m.d - 1) as f64).ln(),
            _ => 0.0,
        };
        let mut e = Self {
            code,
            metric,
            shortcuts,
            mu,
            hop_lmu,
            classify,
            members: (0..n as u32).map(|i| vec![i]).collect(),
            top: (0..n as u32).collect(),
            cap: n,
            slots: (0..n as u32).collect(),
            rows: (0..n as u32).collect(),
            slot_of: (0..n as u32).collect(),
            dist: vec![0; n * n],
            lmu: if mu.is_some() { vec![0.0; n * n] } else { Vec::new() },
            rec: vec![0; code.num_edges()],
            mark: vec![0; 2 * n.max(1)],
            mark_gen: 0,
            pts,
            nodes,
        };
        for i in 0..n {
            for j in i + 1..n {
                let d = e.point_dist(i as u32, j as u32);
                e.dist[i * n + j] = d;
                e.dist[j * n + i] = d;
                if let Some(m) = mu {
                    let (dx, dy, dt) = e.components(i as u32, j as u32);
                    let l = crate::mwm::log_multiplicity(dx, dy, dt, m.d, m.dm1);
                    e.lmu[i * n + j] = l;
                    e.lmu[j * n + i] = l;
                }
            }
        }
        e
    }

    #[inline]
    pub(crate) fn components(&self, a: u32, b: u32) -> (usize, usize, usize) {
        let (p, q) = (&self.pts[a as usize], &self.pts[b as usize]);
        let l = self.code.l;
        (wrap_dist(p.x, q.x, l), wrap_dist(p.y, q.y, l), p.t.abs_diff(q.t))
    }

    #[inline]
    pub(crate) fn point_dist(&self, a: u32, b: u32) -> u64 {
        let (dx, dy, dt) = self.components(a, b);
        metric_value(self.metric, dx, dy, dt)
    }

    // ---- slot table -------------------------------------------------------

    #[cfg(test)]
    pub(crate) fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub(crate) fn slot_node(&self, s: usize) -> u32 {
        self.slots[s]
    }

    pub(crate) fn node_slot(&self, n: u32) -> usize {
        let s = self.slot_of[n as usize];
        debug_assert!(s != NONE);
        s as usize
    }

    #[inline]
    fn idx(&self, a: usize, b: usize) -> usize {
        self.rows[a] as usize * self.cap + self.rows[b] as usize
    }

    #[inline]
    pub(crate) fn dist(&self, a: usize, b: usize) -> u64 {
        self.dist[self.idx(a, b)]
    }

    #[inline]
    pub(crate) fn lmu(&self, a: usize, b: usize) -> f64 {
        self.lmu[self.idx(a, b)]
    }

    pub(crate) fn is_active_slot(&self, s: usize) -> bool {
        self.nodes[self.slots[s] as usize].status == Status::Active
    }

    pub(crate) fn active_slots(&self) -> Vec<usize> {
        (0..self.slots.len()).filter(|&s| self.is_active_slot(s)).collect()
    }

    pub(crate) fn frozen_nodes(&self) -> Vec<u32> {
        self.slots.iter().copied().filter(|&n| self.nodes[n as usize].status == Status::Frozen).collect()
    }

    pub(crate) fn charge(&self, n: u32) -> u32 {
        self.nodes[n as usize].charge
    }

    pub(crate) fn anchor(&self, n: u32) -> u32 {
        self.nodes[n as usize].anchor
    }

    pub(crate) fn minpos(&self, n: u32) -> (usize, usize, usize) {
        self.nodes[n as usize].minpos
    }

    pub(crate) fn members(&self, n: u32) -> &[u32] {
        &self.members[n as usize]
    }

    pub(crate) fn top_of(&self, p: u32) -> u32 {
        self.top[p as usize]
    }

    fn swap_remove_slot(&mut self, s: usize) {
        let n = self.slots[s];
        self.slot_of[n as usize] = NONE;
        self.slots.swap_remove(s);
        self.rows.swap_remove(s);
        if s < self.slots.len() {
            let moved = self.slots[s];
            self.slot_of[moved as usize] = s as u32;
        }
    }

    // ---- formation ----------------------------------------------------------

    /// Merges the clusters in slots `sa` and `sb` along a shortest route.
    /// The charge of `sa` travels to the anchor of `sb`. With `finalize`
    /// false the result always stays active. Returns the new node.
    pub(crate) fn form(&mut self, sa: usize, sb: usize, finalize: bool) -> (u32, Class) {
        debug_assert!(sa != sb);
        let a = self.slots[sa];
        let b = self.slots[sb];
        let target = self.dist(sa, sb);
        let route = self.route(a, b, target);

        let m = self.nodes.len() as u32;
        let (na, nb) = (&self.nodes[a as usize], &self.nodes[b as usize]);
        let charge = self.code.add(na.charge, nb.charge);
        let ca = na.charge;
        let (anchor_a, anchor_b) = (na.anchor, nb.anchor);
        let minpos = na.minpos.min(nb.minpos);
        let class = if finalize { (self.classify)(charge) } else { Class::Continue };
        self.nodes.push(Node {
            parent: NONE,
            children: [a, b],
            route: route.clone(),
            via: false,
            status: Status::Active,
            charge,
            anchor: anchor_b,
            minpos,
        });
        self.nodes[a as usize].parent = m;
        self.nodes[b as usize].parent = m;
        self.nodes[a as usize].status = Status::Absorbed;
        self.nodes[b as usize].status = Status::Absorbed;
        let mut mem = std::mem::take(&mut self.members[a as usize]);
        mem.append(&mut self.members[b as usize]);
        for &p in &mem {
            self.top[p as usize] = m;
        }
        self.members.push(mem);
        self.mark.resize(self.nodes.len(), 0);

        if ca != 0 {
            self.move_along(anchor_a, &route, anchor_b, ca);
        }

        // Merge rule into a's row, then drop b's slot.
        let ns = self.slots.len();
        for l in 0..ns {
            if l == sa || l == sb {
                continue;
            }
            let (dal, dbl) = (self.dist(sa, l), self.dist(sb, l));
            let dm = dal.min(dbl);
            let (i1, i2) = (self.idx(sa, l), self.idx(l, sa));
            self.dist[i1] = dm;
            self.dist[i2] = dm;
            if self.mu.is_some() {
                let (la, lb) = (self.lmu(sa, l), self.lmu(sb, l));
                let lm = match dal.cmp(&dbl) {
                    std::cmp::Ordering::Less => la,
                    std::cmp::Ordering::Greater => lb,
                    std::cmp::Ordering::Equal => logaddexp(la, lb),
                };
                self.lmu[i1] = lm;
                self.lmu[i2] = lm;
            }
        }
        self.slots[sa] = m;
        self.slot_of.push(sa as u32);
        self.slot_of[a as usize] = NONE;
        self.swap_remove_slot(sb);
        let sm = self.node_slot(m);

        if self.shortcuts && class != Class::Freeze {
            self.relax_via(sm);
            self.nodes[m as usize].via = true;
        }
        match class {
            Class::Neutral => {
                self.nodes[m as usize].status = Status::Wormhole;
                self.swap_remove_slot(sm);
            }
            Class::Freeze => self.nodes[m as usize].status = Status::Frozen,
            Class::Continue => {}
        }
        (m, class)
    }

    /// One relaxation step of every pair through slot `sm`. Earlier
    /// clusters are already folded into the table, so this keeps it exact.
    fn relax_via(&mut self, sm: usize) {
        let ns = self.slots.len();
        let row: Vec<u64> = (0..ns).map(|x| self.dist(sm, x)).collect();
        let lrow: Vec<f64> = if self.mu.is_some() { (0..ns).map(|x| self.lmu(sm, x)).collect() } else { Vec::new() };
        let cap = self.cap;
        for x in 0..ns {
            if x == sm {
                continue;
            }
            let dx = row[x];
            let rx = self.rows[x] as usize * cap;
            for y in x + 1..ns {
                if y == sm {
                    continue;
                }
                let nd = dx + row[y];
                let i1 = rx + self.rows[y] as usize;
                let cur = self.dist[i1];
                if nd > cur {
                    continue;
                }
                let i2 = self.rows[y] as usize * cap + self.rows[x] as usize;
                if self.mu.is_some() {
                    let via = lrow[x] + lrow[y] + self.hop_lmu;
                    let l = if nd < cur { via } else { logaddexp(self.lmu[i1], via) };
                    self.lmu[i1] = l;
                    self.lmu[i2] = l;
                }
                self.dist[i1] = nd;
                self.dist[i2] = nd;
            }
        }
    }

    /// Route between top clusters `a` and `b` of table distance `target`.
    /// The direct leg between the closest members wins ties.
    fn route(&mut self, a: u32, b: u32, target: u64) -> Vec<(u32, u32)> {
        let mut best = (INF, NONE, NONE);
        for &p in &self.members[a as usize] {
            for &q in &self.members[b as usize] {
                let d = self.point_dist(p, q);
                if d < best.0 {
                    best = (d, p, q);
                }
            }
        }
        if best.0 <= target {
            debug_assert_eq!(best.0, target);
            return vec![(best.1, best.2)];
        }
        let sources = self.members[a as usize].clone();
        let s = self.search(&sources, |p| self.top[p as usize] == b, target);
        let end = (0..self.pts.len() as u32)
            .filter(|&p| self.top[p as usize] == b && s.dist(p) == target)
            .min_by_key(|&p| p)
            .unwrap_or_else(|| panic!("no route of length {target} between clusters"));
        s.legs_to(end)
    }

    /// Highest ancestor of point `p` inside which moves are free.
    fn jump_root(&self, p: u32) -> u32 {
        let mut r = p;
        let mut cur = p;
        loop {
            let par = self.nodes[cur as usize].parent;
            if par == NONE {
                return r;
            }
            cur = par;
            if self.nodes[cur as usize].via {
                r = cur;
            }
        }
    }

    fn leaves(&self, n: u32, out: &mut Vec<u32>) {
        let mut stack = vec![n];
        while let Some(v) = stack.pop() {
            let c = self.nodes[v as usize].children;
            if c[0] == NONE {
                out.push(v);
            } else {
                stack.push(c[1]);
                stack.push(c[0]);
            }
        }
    }

    /// Dijkstra over points: legs cost the metric, moves inside a shortcut
    /// cluster are free. Stops once a target point is settled or distances
    /// exceed `bound`.
    pub(crate) fn search(&self, sources: &[u32], is_target: impl Fn(u32) -> bool, bound: u64) -> Search {
        let n = self.pts.len();
        let mut dist = vec![INF; n];
        let mut prev = vec![Prev::Source; n];
        let mut settled = vec![false; n];
        let mut expanded = vec![false; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s as usize] = 0;
            heap.push(Reverse((0u64, s)));
        }
        let mut buf = Vec::new();
        while let Some(Reverse((d, p))) = heap.pop() {
            if settled[p as usize] || d > dist[p as usize] {
                continue;
            }
            settled[p as usize] = true;
            if is_target(p) || d > bound {
                break;
            }
            let r = self.jump_root(p);
            if !std::mem::replace(&mut expanded[r as usize], true) {
                buf.clear();
                self.leaves(r, &mut buf);
                for &q in &buf {
                    if d < dist[q as usize] {
                        dist[q as usize] = d;
                        prev[q as usize] = Prev::Jump(p);
                        heap.push(Reverse((d, q)));
                    }
                }
            }
            for q in 0..n as u32 {
                if settled[q as usize] {
                    continue;
                }
                let nd = d + self.point_dist(p, q);
                if nd < dist[q as usize] && nd <= bound {
                    dist[q as usize] = nd;
                    prev[q as usize] = Prev::Leg(p);
                    heap.push(Reverse((nd, q)));
                }
            }
        }
        Search { dist, prev }
    }

    // ---- recovery -------------------------------------------------------------

    fn apply_leg(&mut self, p: u32, q: u32, g: u32) {
        let (a, b) = (&self.pts[p as usize], &self.pts[q as usize]);
        let d = self.code.d;
        let ng = self.code.neg(g);
        let rec = &mut self.rec;
        for_each_step((a.x, a.y), (b.x, b.y), self.code.l, |e, s| {
            let v = if s > 0 { g } else { ng };
            rec[e] = ((rec[e] as u64 + v as u64) % d as u64) as u32;
        });
    }

    /// Moves `g` from `from` to `to` along `legs`, resolving the free moves
    /// between legs (and at both ends) through the merge forest.
    pub(crate) fn move_along(&mut self, from: u32, legs: &[(u32, u32)], to: u32, g: u32) {
        let mut pending = Vec::with_capacity(legs.len() + 1);
        let mut cur = from;
        for &(p, q) in legs {
            pending.push((cur, p));
            self.apply_leg(p, q, g);
            cur = q;
        }
        pending.push((cur, to));
        for (x, y) in pending {
            self.tree_path(x, y, g);
        }
    }

    /// Lowest common ancestor of two points and the child of it above `x`.
    fn lca(&mut self, x: u32, y: u32) -> Option<(u32, u32)> {
        self.mark_gen = self.mark_gen.wrapping_add(1);
        if self.mark_gen == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.mark_gen = 1;
        }
        let g = self.mark_gen;
        let mut c = x;
        while c != NONE {
            self.mark[c as usize] = g;
            c = self.nodes[c as usize].parent;
        }
        let mut c = y;
        while c != NONE && self.mark[c as usize] != g {
            c = self.nodes[c as usize].parent;
        }
        if c == NONE {
            return None;
        }
        let mut below = x;
        while self.nodes[below as usize].parent != c {
            below = self.nodes[below as usize].parent;
        }
        Some((c, below))
    }

    /// Moves `g` between two points of one cluster along the routes stored
    /// in the forest.
    fn tree_path(&mut self, x: u32, y: u32, g: u32) {
        let mut stack = vec![(x, y)];
        while let Some((x, y)) = stack.pop() {
            if x == y {
                continue;
            }
            let (m, below) = self.lca(x, y).expect("free move between unrelated points");
            let node = &self.nodes[m as usize];
            let route = node.route.clone();
            let forward = below == node.children[0];
            let ng = self.code.neg(g);
            if forward {
                let mut cur = x;
                for &(p, q) in &route {
                    stack.push((cur, p));
                    self.apply_leg(p, q, g);
                    cur = q;
                }
                stack.push((cur, y));
            } else {
                let mut cur = x;
                for &(p, q) in route.iter().rev() {
                    stack.push((cur, q));
                    self.apply_leg(p, q, ng);
                    cur = p;
                }
                stack.push((cur, y));
            }
        }
    }

    pub(crate) fn recovery(&self) -> ErrorChain {
        ErrorChain::from_dense(&self.rec, self.code.d)
    }

    /// Reference all-pairs distances between current slots, recomputed from
    /// scratch by point-level search.
    #[cfg(test)]
    pub(crate) fn reference_dist(&self, a: usize, b: usize) -> u64 {
        let na = self.slots[a];
        let nb = self.slots[b];
        let src = self.members[na as usize].clone();
        if !self.shortcuts {
            let mut best = INF;
            for &p in &src {
                for &q in &self.members[nb as usize] {
                    best = best.min(self.point_dist(p, q));
                }
            }
            return best;
        }
        let s = self.search(&src, |p| self.top[p as usize] == nb, INF);
        self.members[nb as usize].iter().map(|&q| s.dist(q)).min().unwrap()
    }
}
