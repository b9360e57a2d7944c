//! Systole of a conformal torus metric by shortest paths on the lifted grid.
//!
//! A closed loop in the free homotopy class `v = m·b1 + n·b2` lifts to a path
//! from `x` to `x + v` in the universal cover. We search such paths on the
//! grid graph with a 16-neighbour stencil (axis, diagonal and knight steps);
//! an edge costs its Euclidean length times the mean of `f` at its endpoints.
//!
//! Searches are A* with the admissible heuristic `min f · |p − target|`,
//! restricted to a capsule-shaped strip around the straight segment. A
//! search is certified when no strip-boundary node was settled below the
//! answer; otherwise the strip is widened.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::field::ConformalMetric;
use crate::lattice::{lambda1, length_order, primitive_vectors_up_to, tau_of, LatticeVector, Vec2};

/// Grid steps of the 16-neighbour stencil.
pub const STENCIL: [(i64, i64); 16] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (1, 2),
    (2, 1),
    (-1, 2),
    (-2, 1),
    (1, -2),
    (2, -1),
    (-1, -2),
    (-2, -1),
];

/// Strip widenings attempted before giving up.
pub const MAX_WIDENINGS: u32 = 3;

/// Relative metrication budget of the 16-neighbour stencil at the default grid.
pub const METRICATION_TOLERANCE: f64 = 0.02;

const TIE: f64 = 1e-12;

/// Shortest noncontractible loop found on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SystoleResult {
    pub sys: f64,
    pub witness_class: LatticeVector,
    /// Lifted grid indices from `x` to `x + witness_class`.
    pub witness_nodes: Vec<(i64, i64)>,
    /// The same path as Cartesian points in the cover.
    pub witness_path: Vec<Vec2>,
    pub classes_examined: usize,
    /// Continuous straight-loop estimate used to size the class enumeration.
    pub straight_bound: f64,
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    f: f64,
    g: f64,
    node: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on f; prefer larger g, then lower node index
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| self.g.total_cmp(&other.g))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const OUTSIDE: u8 = 0;
const INSIDE: u8 = 1;
const BOUNDARY: u8 = 2;

/// Capsule of grid offsets (relative to the source) around the segment `0 → v`.
struct Strip {
    di_min: i64,
    dj_min: i64,
    width: usize,
    height: usize,
    mask: Vec<u8>,
    target: (i64, i64),
}

impl Strip {
    fn build(metric: &ConformalMetric, class: (i64, i64), half_width: f64) -> Self {
        let field = metric.factor();
        let lattice = field.lattice();
        let (nu, nv) = (field.nu() as f64, field.nv() as f64);
        let v = lattice.point(class.0 as f64, class.1 as f64);
        let target = (class.0 * field.nu() as i64, class.1 * field.nv() as i64);

        let xs = [0.0, v.x];
        let ys = [0.0, v.y];
        let x_lo = xs[0].min(xs[1]) - half_width;
        let x_hi = xs[0].max(xs[1]) + half_width;
        let y_lo = ys[0].min(ys[1]) - half_width;
        let y_hi = ys[0].max(ys[1]) + half_width;
        let (mut i_lo, mut i_hi, mut j_lo, mut j_hi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in [
            Vec2::new(x_lo, y_lo),
            Vec2::new(x_lo, y_hi),
            Vec2::new(x_hi, y_lo),
            Vec2::new(x_hi, y_hi),
        ] {
            let (u, w) = lattice.coords(p);
            i_lo = i_lo.min(u * nu);
            i_hi = i_hi.max(u * nu);
            j_lo = j_lo.min(w * nv);
            j_hi = j_hi.max(w * nv);
        }
        // padding keeps every stencil neighbour of an in-strip node inside the box
        let di_min = i_lo.floor() as i64 - 3;
        let dj_min = j_lo.floor() as i64 - 3;
        let width = (i_hi.ceil() as i64 + 3 - di_min + 1) as usize;
        let height = (j_hi.ceil() as i64 + 3 - dj_min + 1) as usize;

        let seg_len_sq = v.norm_sq();
        let inside = |di: i64, dj: i64| {
            let p = lattice.point(di as f64 / nu, dj as f64 / nv);
            let t = (p.dot(v) / seg_len_sq).clamp(0.0, 1.0);
            (p - t * v).norm() <= half_width
        };
        let mut mask = vec![OUTSIDE; width * height];
        for a in 0..width {
            for b in 0..height {
                if inside(di_min + a as i64, dj_min + b as i64) {
                    mask[a * height + b] = INSIDE;
                }
            }
        }
        let mut strip = Self {
            di_min,
            dj_min,
            width,
            height,
            mask,
            target,
        };
        for a in 0..width {
            for b in 0..height {
                let k = a * height + b;
                if strip.mask[k] == OUTSIDE {
                    continue;
                }
                let (di, dj) = (di_min + a as i64, dj_min + b as i64);
                let edge = STENCIL
                    .iter()
                    .any(|&(si, sj)| strip.index(di + si, dj + sj).is_none());
                if edge {
                    strip.mask[k] = BOUNDARY;
                }
            }
        }
        strip
    }

    fn index(&self, di: i64, dj: i64) -> Option<usize> {
        let a = di - self.di_min;
        let b = dj - self.dj_min;
        if a < 0 || b < 0 || a >= self.width as i64 || b >= self.height as i64 {
            return None;
        }
        let k = a as usize * self.height + b as usize;
        (self.mask[k] != OUTSIDE).then_some(k)
    }

    fn offset(&self, k: usize) -> (i64, i64) {
        (
            self.di_min + (k / self.height) as i64,
            self.dj_min + (k % self.height) as i64,
        )
    }
}

/// Lower bounds from column and row minima of `f`.
///
/// A grid path from column `a` to column `b` crosses every gap between them;
/// an edge spanning a gap has endpoints within two columns of it, so it pays
/// at least the gap's perpendicular width times the smallest `f` in the four
/// columns around the gap. Rows are handled the same way.
struct BandBounds {
    u: Band,
    v: Band,
}

struct Band {
    prefix: Vec<f64>,
}

impl Band {
    fn new(line_min: &[f64], width: f64) -> Self {
        let n = line_min.len();
        let at = |k: i64| line_min[k.rem_euclid(n as i64) as usize];
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0.0);
        for g in 0..n as i64 {
            let m = at(g - 1).min(at(g)).min(at(g + 1)).min(at(g + 2));
            prefix.push(prefix[g as usize] + width * m);
        }
        Self { prefix }
    }

    fn period(&self) -> f64 {
        self.prefix[self.prefix.len() - 1]
    }

    fn cumulative(&self, x: i64) -> f64 {
        let n = (self.prefix.len() - 1) as i64;
        x.div_euclid(n) as f64 * self.period() + self.prefix[x.rem_euclid(n) as usize]
    }

    /// Least cost of crossing from line `a` to line `b` (lifted indices).
    fn cross(&self, a: i64, b: i64) -> f64 {
        (self.cumulative(a.max(b)) - self.cumulative(a.min(b))).max(0.0)
    }
}

impl BandBounds {
    fn new(metric: &ConformalMetric) -> Self {
        let field = metric.factor();
        let lattice = field.lattice();
        let (nu, nv) = (field.nu(), field.nv());
        let mut col = vec![f64::INFINITY; nu];
        let mut row = vec![f64::INFINITY; nv];
        for i in 0..nu {
            for j in 0..nv {
                let f = field.at(i, j);
                col[i] = col[i].min(f);
                row[j] = row[j].min(f);
            }
        }
        let det = lattice.coarea();
        Self {
            u: Band::new(&col, det / (lattice.b2().norm() * nu as f64)),
            v: Band::new(&row, det / (lattice.b1().norm() * nv as f64)),
        }
    }

    /// Lower bound for any loop in class `(m, n)`.
    fn class_bound(&self, class: (i64, i64)) -> f64 {
        (class.0.unsigned_abs() as f64 * self.u.period())
            .max(class.1.unsigned_abs() as f64 * self.v.period())
    }
}

enum Outcome {
    Found { length: f64, nodes: Vec<(i64, i64)> },
    AboveBound,
}

struct SearchResult {
    outcome: Outcome,
    certified: bool,
}

/// Reusable A* buffers over one strip.
struct Searcher<'a> {
    strip: Strip,
    values: &'a [f64],
    nu: i64,
    nv: i64,
    bands: &'a BandBounds,
    offsets: [isize; 16],
    step_len: [f64; 16],
    /// `min f · |x − target|` per strip node; independent of the source.
    h_euclid: Vec<f64>,
    // per-run tables over strip columns (a) and rows (b)
    col_base: Vec<usize>,
    row_idx: Vec<usize>,
    h_col: Vec<f64>,
    h_row: Vec<f64>,
    g: Vec<f64>,
    parent: Vec<u32>,
    stamp: Vec<u32>,
    generation: u32,
    heap: BinaryHeap<HeapEntry>,
}

impl<'a> Searcher<'a> {
    fn new(
        metric: &'a ConformalMetric,
        bands: &'a BandBounds,
        class: (i64, i64),
        half_width: f64,
    ) -> Self {
        let field = metric.factor();
        let lattice = field.lattice();
        let (nu, nv) = (field.nu() as f64, field.nv() as f64);
        let strip = Strip::build(metric, class, half_width);
        let n = strip.mask.len();
        let mut step_len = [0.0; 16];
        let mut offsets = [0isize; 16];
        for (s, &(di, dj)) in STENCIL.iter().enumerate() {
            step_len[s] = lattice.point(di as f64 / nu, dj as f64 / nv).norm();
            offsets[s] = di as isize * strip.height as isize + dj as isize;
        }
        let fmin = field.min();
        let target = lattice.point(class.0 as f64, class.1 as f64);
        let h_euclid = (0..n)
            .map(|k| {
                if strip.mask[k] == OUTSIDE {
                    return 0.0;
                }
                let (di, dj) = strip.offset(k);
                fmin * (target - lattice.point(di as f64 / nu, dj as f64 / nv)).norm()
            })
            .collect();
        Self {
            values: field.values(),
            nu: field.nu() as i64,
            nv: field.nv() as i64,
            bands,
            offsets,
            step_len,
            h_euclid,
            col_base: vec![0; strip.width],
            row_idx: vec![0; strip.height],
            h_col: vec![0.0; strip.width],
            h_row: vec![0.0; strip.height],
            strip,
            g: vec![f64::INFINITY; n],
            parent: vec![u32::MAX; n],
            stamp: vec![0; n],
            generation: 0,
            heap: BinaryHeap::new(),
        }
    }

    fn prepare(&mut self, source: (i64, i64)) {
        let (t0, t1) = self.strip.target;
        for a in 0..self.strip.width {
            let i = source.0 + self.strip.di_min + a as i64;
            self.col_base[a] = (i.rem_euclid(self.nu) * self.nv) as usize;
            self.h_col[a] = self.bands.u.cross(i, source.0 + t0);
        }
        for b in 0..self.strip.height {
            let j = source.1 + self.strip.dj_min + b as i64;
            self.row_idx[b] = j.rem_euclid(self.nv) as usize;
            self.h_row[b] = self.bands.v.cross(j, source.1 + t1);
        }
    }

    #[inline]
    fn split(&self, k: usize) -> (usize, usize) {
        (k / self.strip.height, k % self.strip.height)
    }

    #[inline]
    fn factor_at(&self, a: usize, b: usize) -> f64 {
        self.values[self.col_base[a] + self.row_idx[b]]
    }

    #[inline]
    fn heuristic(&self, k: usize, a: usize, b: usize) -> f64 {
        self.h_euclid[k].max(self.h_col[a]).max(self.h_row[b])
    }

    /// Shortest path from `source` to `source + v`, ignoring anything longer than `bound`.
    fn run(&mut self, source: (i64, i64), bound: f64) -> SearchResult {
        self.prepare(source);
        self.generation += 1;
        let gen = self.generation;
        self.heap.clear();
        let start = self.strip.index(0, 0).expect("source lies in its strip");
        let target = self
            .strip
            .index(self.strip.target.0, self.strip.target.1)
            .expect("target lies in its strip");
        let cutoff = bound * (1.0 + TIE);
        let (a0, b0) = self.split(start);
        let h0 = self.heuristic(start, a0, b0);
        if h0 > cutoff {
            return SearchResult {
                outcome: Outcome::AboveBound,
                certified: true,
            };
        }
        self.stamp[start] = gen;
        self.g[start] = 0.0;
        self.parent[start] = u32::MAX;
        self.heap.push(HeapEntry {
            f: h0,
            g: 0.0,
            node: start as u32,
        });
        let mut boundary_min = f64::INFINITY;

        while let Some(HeapEntry { f, g, node }) = self.heap.pop() {
            let k = node as usize;
            if g > self.g[k] {
                continue;
            }
            if k == target {
                let mut nodes = Vec::new();
                let mut cur = k;
                loop {
                    let (di, dj) = self.strip.offset(cur);
                    nodes.push((source.0 + di, source.1 + dj));
                    if self.parent[cur] == u32::MAX {
                        break;
                    }
                    cur = self.parent[cur] as usize;
                }
                nodes.reverse();
                return SearchResult {
                    certified: !(boundary_min < g * (1.0 - TIE)),
                    outcome: Outcome::Found { length: g, nodes },
                };
            }
            if self.strip.mask[k] == BOUNDARY {
                boundary_min = boundary_min.min(f);
            }
            let (a, b) = self.split(k);
            let fa = self.factor_at(a, b);
            for (s, &(si, sj)) in STENCIL.iter().enumerate() {
                let nb = (k as isize + self.offsets[s]) as usize;
                if self.strip.mask[nb] == OUTSIDE {
                    continue;
                }
                let (na, nbb) = ((a as i64 + si) as usize, (b as i64 + sj) as usize);
                let cand = g + self.step_len[s] * 0.5 * (fa + self.factor_at(na, nbb));
                if self.stamp[nb] == gen && cand >= self.g[nb] {
                    continue;
                }
                let fc = cand + self.heuristic(nb, na, nbb);
                if fc > cutoff {
                    continue;
                }
                self.stamp[nb] = gen;
                self.g[nb] = cand;
                self.parent[nb] = node;
                self.heap.push(HeapEntry {
                    f: fc,
                    g: cand,
                    node: nb as u32,
                });
            }
        }
        SearchResult {
            certified: !(boundary_min < bound * (1.0 - TIE)),
            outcome: Outcome::AboveBound,
        }
    }
}

fn initial_half_width(metric: &ConformalMetric, class: (i64, i64)) -> f64 {
    let field = metric.factor();
    let v = field.lattice().point(class.0 as f64, class.1 as f64);
    (0.5 * v.norm()).max(4.0 * field.spacing())
}

fn validate_class(class: (i64, i64)) -> Result<()> {
    if class == (0, 0) {
        return Err(Error::InvalidArgument("class vector must be nonzero".into()));
    }
    Ok(())
}

/// Shortest grid path from `x` to `x + v` and its metric length.
pub fn cover_path(
    metric: &ConformalMetric,
    source: (usize, usize),
    class: (i64, i64),
) -> Result<(f64, Vec<(i64, i64)>)> {
    validate_class(class)?;
    let src = (source.0 as i64, source.1 as i64);
    let bands = BandBounds::new(metric);
    let mut width = initial_half_width(metric, class);
    for _ in 0..=MAX_WIDENINGS {
        let mut searcher = Searcher::new(metric, &bands, class, width);
        let res = searcher.run(src, f64::INFINITY);
        if res.certified {
            if let Outcome::Found { length, nodes } = res.outcome {
                return Ok((length, nodes));
            }
        }
        width *= 2.0;
    }
    Err(Error::StripExhausted {
        m: class.0,
        n: class.1,
        retries: MAX_WIDENINGS,
    })
}

/// Metric length of the shortest closed loop through grid node `source` in class `v`.
pub fn cover_distance(
    metric: &ConformalMetric,
    source: (usize, usize),
    class: (i64, i64),
) -> Result<f64> {
    cover_path(metric, source, class).map(|(len, _)| len)
}

/// Metric length of a grid polyline, recomputed edge by edge.
pub fn path_length(metric: &ConformalMetric, nodes: &[(i64, i64)]) -> f64 {
    let field = metric.factor();
    nodes
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let d = (field.node(b.0, b.1) - field.node(a.0, a.1)).norm();
            d * 0.5 * (field.wrapped(a.0, a.1) + field.wrapped(b.0, b.1))
        })
        .sum()
}

/// Straight closed loop in class `v` through `start`, integrated with the
/// midpoint rule on the interpolated factor.
pub fn straight_loop_length(metric: &ConformalMetric, start: Vec2, class: (i64, i64)) -> f64 {
    let field = metric.factor();
    let v = field.lattice().point(class.0 as f64, class.1 as f64);
    let samples = ((v.norm() / field.spacing()).ceil() as usize * 4).max(64);
    let step = 1.0 / samples as f64;
    let mut acc = 0.0;
    for s in 0..samples {
        let t = (s as f64 + 0.5) * step;
        acc += field.sample_at(start + t * v);
    }
    acc * step * v.norm()
}

struct ClassBest {
    length: f64,
    nodes: Vec<(i64, i64)>,
}

/// Basepoints per screening block, along the transversal.
const BLOCK: i64 = 8;

/// Minimum over transversal basepoints for one class, certified by widening.
///
/// Basepoints are screened in blocks: one search from the block centre `c`
/// gives `d(s, s+v) >= d(c, c+v) - 2 d(c, s)` for every `s` in the block, with
/// `d(c, s)` bounded above by a path along the transversal.
fn best_in_class(
    metric: &ConformalMetric,
    bands: &BandBounds,
    class: (i64, i64),
    bound: f64,
) -> Result<Option<ClassBest>> {
    let field = metric.factor();
    let (nu, nv) = (field.nu() as i64, field.nv() as i64);
    // Steps move at most 2 cells, so a loop with m != 0 visits column 0 or 1
    // (mod nu); with m = 0 it visits row 0 or 1.
    let by_column = class.0 != 0;
    let len = if by_column { nv } else { nu };
    let node = |line: i64, t: i64| if by_column { (line, t) } else { (t, line) };

    let mut best: Option<ClassBest> = None;
    let consider = |best: &mut Option<ClassBest>, length: f64, nodes: Vec<(i64, i64)>| {
        let better = best
            .as_ref()
            .is_none_or(|b| length < b.length * (1.0 - TIE));
        if better && length <= bound * (1.0 + TIE) {
            *best = Some(ClassBest { length, nodes });
        }
    };

    let mut width = initial_half_width(metric, class);
    let mut pending = Vec::new();
    {
        let mut searcher = Searcher::new(metric, bands, class, width);
        let mut start = 0;
        while start < len {
            let stop = (start + BLOCK).min(len);
            let mid = (start + stop) / 2;
            let centre = node(0, mid);
            // upper bounds on d(centre, s) along the transversal
            let mut reach = Vec::with_capacity(2 * (stop - start) as usize);
            for t in start..stop {
                let mut path: Vec<(i64, i64)> = if t <= mid {
                    (t..=mid).rev().map(|u| node(0, u)).collect()
                } else {
                    (mid..=t).map(|u| node(0, u)).collect()
                };
                reach.push((node(0, t), path_length(metric, &path)));
                path.push(node(1, t));
                reach.push((node(1, t), path_length(metric, &path)));
            }
            let radius = reach.iter().map(|r| r.1).fold(0.0, f64::max);
            let limit = best.as_ref().map_or(bound, |b| b.length.min(bound));
            let res = searcher.run(centre, limit + 2.0 * radius);
            if res.certified {
                let dc = match res.outcome {
                    Outcome::Found { length, nodes } => {
                        consider(&mut best, length, nodes);
                        length
                    }
                    Outcome::AboveBound => f64::INFINITY,
                };
                let limit = best.as_ref().map_or(bound, |b| b.length.min(bound));
                pending.extend(
                    reach
                        .iter()
                        .filter(|&&(s, r)| s != centre && dc - 2.0 * r <= limit * (1.0 + TIE))
                        .map(|r| r.0),
                );
            } else {
                pending.extend(reach.iter().map(|r| r.0));
            }
            start = stop;
        }
    }
    pending.sort_by(|a, b| {
        field
            .wrapped(a.0, a.1)
            .total_cmp(&field.wrapped(b.0, b.1))
            .then(a.cmp(b))
    });

    for attempt in 0..=MAX_WIDENINGS {
        let mut searcher = Searcher::new(metric, bands, class, width);
        let mut uncertified = Vec::new();
        for &src in &pending {
            let limit = best.as_ref().map_or(bound, |b| b.length.min(bound));
            let res = searcher.run(src, limit);
            if !res.certified {
                uncertified.push(src);
                continue;
            }
            if let Outcome::Found { length, nodes } = res.outcome {
                consider(&mut best, length, nodes);
            }
        }
        if uncertified.is_empty() {
            return Ok(best);
        }
        if attempt == MAX_WIDENINGS {
            break;
        }
        pending = uncertified;
        width *= 2.0;
    }
    Err(Error::StripExhausted {
        m: class.0,
        n: class.1,
        retries: MAX_WIDENINGS,
    })
}

/// Systole: the shortest grid loop over every primitive class that could
/// still beat the current best (`min f · |v| ≤ best`).
pub fn systole(metric: &ConformalMetric) -> Result<SystoleResult> {
    let field = metric.factor();
    let lattice = *field.lattice();
    let fmin = field.min();
    let bands = BandBounds::new(metric);

    // straight loops through the f-minimizing node, over the three shortest classes
    let argmin = field
        .values()
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let start = field.node((argmin / field.nv()) as i64, (argmin % field.nv()) as i64);
    let l1 = lambda1(&lattice);
    let mut short = primitive_vectors_up_to(&lattice, 2.0 * l1);
    short.truncate(3);
    let straight_bound = short
        .iter()
        .map(|v| straight_loop_length(metric, start, (v.m, v.n)))
        .fold(f64::INFINITY, f64::min);

    let mut enum_bound = (1.5 * straight_bound / fmin).max(l1 * (1.0 + 1e-9));
    let mut classes = primitive_vectors_up_to(&lattice, enum_bound);
    let mut idx = 0;
    let mut examined = 0;
    let mut best: Option<(f64, LatticeVector, Vec<(i64, i64)>)> = None;

    loop {
        if idx == classes.len() {
            let current = best.as_ref().map_or(f64::INFINITY, |b| b.0);
            if fmin * enum_bound > current * (1.0 + TIE) {
                break;
            }
            enum_bound *= 2.0;
            let done = classes.len();
            let mut more = primitive_vectors_up_to(&lattice, enum_bound);
            more.sort_by(length_order);
            classes = more;
            idx = done;
            if idx >= classes.len() {
                break;
            }
        }
        let v = classes[idx];
        idx += 1;
        let current = best.as_ref().map_or(f64::INFINITY, |b| b.0);
        if fmin * v.length() > current * (1.0 + TIE) {
            break;
        }
        if bands.class_bound((v.m, v.n)) > current * (1.0 + TIE) {
            continue;
        }
        examined += 1;
        if let Some(found) = best_in_class(metric, &bands, (v.m, v.n), current)? {
            if found.length < current * (1.0 - TIE) {
                best = Some((found.length, v, found.nodes));
            }
        }
    }

    let (sys, witness_class, witness_nodes) = best.ok_or_else(|| {
        Error::Numerical("no noncontractible loop found".into())
    })?;
    let witness_path = witness_nodes
        .iter()
        .map(|&(i, j)| field.node(i, j))
        .collect();
    Ok(SystoleResult {
        sys,
        witness_class,
        witness_nodes,
        witness_path,
        classes_examined: examined,
        straight_bound,
    })
}

/// Lower bound `E_μ(f) ≥ σ·sys(g)` obtained by integrating over a pencil of closed geodesics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FubiniCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Checks `E_μ(f) ≥ σ·sys − tol` with `tol` the metrication budget relative to `E_μ(f)`.
pub fn fubini_bound_check(metric: &ConformalMetric, sys: f64) -> FubiniCheck {
    let lhs = metric.mean();
    let rhs = tau_of(metric.lattice()).sigma() * sys;
    FubiniCheck {
        lhs,
        rhs,
        ok: lhs >= rhs - METRICATION_TOLERANCE * lhs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{from_analytic, AnalyticFamily};
    use crate::lattice::Lattice2D;

    fn metric(lattice: Lattice2D, n: usize, fam: AnalyticFamily) -> ConformalMetric {
        ConformalMetric::new(from_analytic(&lattice, n, n, &fam).unwrap()).unwrap()
    }

    #[test]
    fn flat_cover_distances() {
        let m = metric(Lattice2D::square(), 32, AnalyticFamily::constant(1.0));
        for src in [(0, 0), (5, 17), (31, 31)] {
            assert!((cover_distance(&m, src, (1, 0)).unwrap() - 1.0).abs() < 1e-12);
        }
        let m2 = metric(Lattice2D::square(), 32, AnalyticFamily::constant(2.0));
        assert!((cover_distance(&m2, (3, 4), (0, 1)).unwrap() - 2.0).abs() < 1e-12);
        assert!(cover_distance(&m, (0, 0), (0, 0)).is_err());
    }

    /// On a flat grid the graph distance to (1, 3) decomposes into the two
    /// adjacent stencil directions (1, 2) and (0, 1): √5 + 1.
    #[test]
    fn off_axis_class_matches_stencil_decomposition() {
        let m = metric(Lattice2D::square(), 32, AnalyticFamily::constant(1.0));
        let d = cover_distance(&m, (0, 0), (1, 3)).unwrap();
        assert!((d - (5f64.sqrt() + 1.0)).abs() < 1e-12, "{d}");
        assert!(d >= 10f64.sqrt() && d <= 10f64.sqrt() * 1.03);
    }

    #[test]
    fn path_avoids_bump() {
        let fam = AnalyticFamily::GaussianBump { amplitude: 0.5, center: [0.5, 0.5], width: 0.15 };
        for n in [32, 64] {
            let m = metric(Lattice2D::square(), n, fam.clone());
            let through = cover_distance(&m, (0, n / 2), (1, 0)).unwrap();
            let away = cover_distance(&m, (0, 0), (1, 0)).unwrap();
            assert!(away < through, "n={n}: {away} vs {through}");
        }
    }

    #[test]
    fn flat_square_systole() {
        let m = metric(Lattice2D::square(), 32, AnalyticFamily::constant(1.0));
        let s = systole(&m).unwrap();
        assert!((s.sys - 1.0).abs() < 1e-12);
        assert_eq!((s.witness_class.m, s.witness_class.n), (0, 1));
        assert_eq!(s.classes_examined, 2);
    }

    #[test]
    fn flat_eisenstein_systole_is_lambda1() {
        let m = metric(Lattice2D::eisenstein(), 32, AnalyticFamily::constant(1.0));
        let s = systole(&m).unwrap();
        let expect = (2.0 / 3f64.sqrt()).sqrt();
        assert!((s.sys - expect).abs() < 1e-12, "{}", s.sys);
        assert_eq!(s.classes_examined, 3);
    }

    /// Horizontal loops at height v have length 1 + 0.3·cos(2πv); the trough
    /// at v = 1/2 gives 0.7, and no wiggling path can do better.
    #[test]
    fn trough_systole() {
        for n in [32, 64] {
            let m = metric(Lattice2D::square(), n, AnalyticFamily::trig(0.3, 0, 1));
            let s = systole(&m).unwrap();
            assert!((s.sys - 0.7).abs() < 1e-12, "n={n}: {}", s.sys);
            assert_eq!((s.witness_class.m, s.witness_class.n), (1, 0));
            assert!((path_length(&m, &s.witness_nodes) - s.sys).abs() < 1e-9);
            let f = fubini_bound_check(&m, s.sys);
            assert!(f.ok && (f.lhs - 1.0).abs() < 1e-12 && (f.rhs - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn witness_path_is_closed_in_its_class() {
        let fam = AnalyticFamily::GaussianBump { amplitude: -0.4, center: [0.3, 0.6], width: 0.2 };
        let m = metric(Lattice2D::from_tau(0.2, 1.3).unwrap(), 32, fam);
        let s = systole(&m).unwrap();
        let (a, b) = (s.witness_nodes[0], *s.witness_nodes.last().unwrap());
        assert_eq!(b.0 - a.0, s.witness_class.m * 32);
        assert_eq!(b.1 - a.1, s.witness_class.n * 32);
        assert!((path_length(&m, &s.witness_nodes) - s.sys).abs() < 1e-9);
        let disp = *s.witness_path.last().unwrap() - s.witness_path[0];
        assert!((disp - s.witness_class.vec).norm() < 1e-12);
    }

    #[test]
    fn fubini_equality_on_flat_metrics() {
        for l in [Lattice2D::square(), Lattice2D::eisenstein()] {
            let m = metric(l, 32, AnalyticFamily::constant(1.0));
            let s = systole(&m).unwrap();
            let f = fubini_bound_check(&m, s.sys);
            assert!(f.ok);
            assert!((f.lhs - f.rhs).abs() < 1e-12);
        }
    }

    /// Plain Dijkstra on the cover from `src` to `src + class`, no strip and
    /// no heuristic.
    fn dijkstra_loop(metric: &ConformalMetric, src: (i64, i64), class: (i64, i64)) -> f64 {
        use std::cmp::Reverse;
        use std::collections::{BinaryHeap, HashMap};
        let field = metric.factor();
        let target = (
            src.0 + class.0 * field.nu() as i64,
            src.1 + class.1 * field.nv() as i64,
        );
        let mut dist: HashMap<(i64, i64), f64> = HashMap::from([(src, 0.0)]);
        let mut heap = BinaryHeap::from([(Reverse(0u64), src)]);
        while let Some((Reverse(key), node)) = heap.pop() {
            let d = f64::from_bits(key);
            if node == target {
                return d;
            }
            if d > dist[&node] {
                continue;
            }
            for (di, dj) in STENCIL {
                let next = (node.0 + di, node.1 + dj);
                let nd = d + path_length(metric, &[node, next]);
                if dist.get(&next).is_none_or(|&old| nd < old) {
                    dist.insert(next, nd);
                    heap.push((Reverse(nd.to_bits()), next));
                }
            }
        }
        unreachable!()
    }

    mod oracle {
        use super::*;
        use crate::field::ExpTrigMode;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(6))]

            #[test]
            fn systole_matches_exhaustive_dijkstra(
                re in -0.5f64..0.5,
                im in 0.9f64..1.8,
                amps in proptest::collection::vec(-0.4f64..0.4, 6),
            ) {
                let lattice = Lattice2D::from_tau(re, im).unwrap();
                let modes = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2)]
                    .iter()
                    .zip(&amps)
                    .map(|(&(k, l), &a)| ExpTrigMode { k, l, a, b: 0.5 * a })
                    .collect();
                let m = metric(lattice, 8, AnalyticFamily::ExpTrig { modes });
                let field = m.factor();
                let got = systole(&m).unwrap();

                let fmin = field.min();
                let mut best = f64::INFINITY;
                let mut classes = Vec::new();
                for a in -8i64..=8 {
                    for b in 0i64..=8 {
                        let primitive = gcd(a.unsigned_abs(), b.unsigned_abs()) == 1;
                        if primitive && (b > 0 || a > 0) {
                            classes.push((a, b));
                        }
                    }
                }
                let upper = straight_loop_length(&m, Vec2::new(0.0, 0.0), (1, 0))
                    .max(straight_loop_length(&m, Vec2::new(0.0, 0.0), (0, 1)))
                    * 1.1;
                for class in classes {
                    let v = field.lattice().point(class.0 as f64, class.1 as f64);
                    if fmin * v.norm() > upper.min(best) {
                        continue;
                    }
                    for i in 0..field.nu() as i64 {
                        for j in 0..field.nv() as i64 {
                            best = best.min(dijkstra_loop(&m, (i, j), class));
                        }
                    }
                }
                prop_assert!((got.sys - best).abs() <= 1e-12 * best, "{} vs {}", got.sys, best);
            }
        }

        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 { a } else { gcd(b, a % b) }
        }
    }
}
