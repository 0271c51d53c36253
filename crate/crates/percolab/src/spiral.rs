//! The spiral block construction: a sequence of overlapping rectangles whose
//! bottom sides concatenate into an outward broken-line spiral, successive
//! lowest crossings inside them, their concatenation into one long minimal
//! occupied path, and the decoration of that path with gap indices and fresh
//! unit threads.
//!
//! The exploration that extracts a lowest crossing works from the
//! rectangle's bottom side upward: start candidates on the previous path's
//! boundary are tried in order from where that path lands on the bottom,
//! and from each start a depth-first walk over occupied sites turns toward
//! the bottom side first, so the trace hugs the lower boundary of the
//! occupied material until it reaches the right side. Everything the
//! procedure looks at is recorded as the explored region, so the outcome is
//! a deterministic function of the environment restricted to that region;
//! sites never examined stay fresh.

use crate::geom::{rotate90, Bounds, Point2, Rect, Side};
use crate::rng::RngStream;
use crate::site2d::Environment2D;
use crate::stats::{chi_square_sf, Estimate};
use rayon::prelude::*;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpiralError {
    #[error("environment does not realize the first {0} crossing events")]
    NotInDeltaK(u32),
    #[error("previous path does not span the rectangle the easy way: {0}")]
    PreconditionViolated(String),
    #[error("no crossing sequence recurred at least {needed} times (best had {got})")]
    InsufficientConditionalSamples { needed: u64, got: u64 },
}

/// The rectangle sequence of the block argument together with its anchors
/// and the seed segment.
#[derive(Clone, Debug)]
pub struct SpiralPlan {
    l: u32,
    depth: u32,
    anchors: Vec<Point2>,
    rects: Vec<Rect>,
    window: Bounds,
}

impl SpiralPlan {
    /// Builds the first `depth` rectangles at base scale `l`. The simulation
    /// window is the bounding box of the first `depth + 1` rectangles padded
    /// by one site, so that every path vertex keeps its full neighborhood
    /// inside the window.
    pub fn new(l: u32, depth: u32) -> SpiralPlan {
        assert!(l >= 1, "base scale must be positive");
        assert!(depth >= 1, "depth must be positive");
        let e1 = Point2::new(1, 0);
        let mut anchors = vec![Point2::new(0, 0)];
        let mut rects = Vec::new();
        for n in 1..=depth + 1 {
            let scale = 1i32 << (n - 1);
            let w = anchors[n as usize - 1];
            rects.push(Rect::new(w, n as i32 - 1, 4 * l as i32 * scale, l as i32 * scale));
            // w_{n+1} = w_n + 2^{n+1} L theta^{n-1}(e1)
            let step = rotate90(e1, n as i32 - 1).scale((1i32 << (n + 1)) * l as i32);
            anchors.push(w.add(step));
        }
        let window = rects
            .iter()
            .map(Rect::bounds)
            .reduce(|a, b| a.merge(&b))
            .unwrap()
            .pad(1);
        rects.truncate(depth as usize);
        SpiralPlan { l, depth, anchors, rects, window }
    }

    pub fn base_scale(&self) -> u32 {
        self.l
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn window(&self) -> Bounds {
        self.window
    }

    /// Anchor w_i, 1-based, defined up to depth + 2.
    pub fn anchor(&self, i: u32) -> Point2 {
        self.anchors[i as usize - 1]
    }

    /// Rectangle R_i, 1-based.
    pub fn rect(&self, i: u32) -> Rect {
        assert!((1..=self.depth).contains(&i), "stage {i} out of range");
        self.rects[i as usize - 1]
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    /// Sites of the bottom side b_i.
    pub fn bottom_sites(&self, i: u32) -> Vec<Point2> {
        self.rect(i).side_sites(Side::Bottom)
    }

    /// Sites of the right side r_i.
    pub fn right_sites(&self, i: u32) -> Vec<Point2> {
        self.rect(i).side_sites(Side::Right)
    }

    /// The seed segment: the column of sites just left of the first
    /// rectangle. Its states are never examined.
    pub fn seed_sites(&self) -> Vec<Point2> {
        (0..=self.l as i32).map(|y| Point2::new(-1, y)).collect()
    }
}

/// A self-avoiding nearest-neighbor path.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LatticePath {
    vertices: Vec<Point2>,
}

impl LatticePath {
    pub fn new(vertices: Vec<Point2>) -> LatticePath {
        assert!(!vertices.is_empty(), "empty path");
        for w in vertices.windows(2) {
            assert!(w[0].is_adjacent(w[1]), "vertices {} and {} not adjacent", w[0], w[1]);
        }
        let distinct: std::collections::HashSet<_> = vertices.iter().collect();
        assert_eq!(distinct.len(), vertices.len(), "path revisits a vertex");
        LatticePath { vertices }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn first(&self) -> Point2 {
        self.vertices[0]
    }

    pub fn last(&self) -> Point2 {
        *self.vertices.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// No two non-consecutive vertices adjacent.
    pub fn is_chordless(&self) -> bool {
        for i in 0..self.vertices.len() {
            for j in i + 2..self.vertices.len() {
                if self.vertices[i].is_adjacent(self.vertices[j]) {
                    return false;
                }
            }
        }
        true
    }
}

/// Chordless subpath with the same extremes: repeatedly jump to the farthest
/// later vertex adjacent to the current one. Idempotent.
pub fn minimalize(path: &LatticePath) -> LatticePath {
    let v = path.vertices();
    let mut out = vec![v[0]];
    let mut cur = 0usize;
    while cur + 1 < v.len() {
        let mut next = cur + 1;
        for j in (cur + 1..v.len()).rev() {
            if v[j].is_adjacent(v[cur]) {
                next = j;
                break;
            }
        }
        out.push(v[next]);
        cur = next;
    }
    LatticePath::new(out)
}

/// The explored region of a decorated path: a site set over the plan window.
#[derive(Clone, Debug)]
pub struct ExploredRegion {
    window: Bounds,
    mask: Vec<bool>,
}

impl ExploredRegion {
    pub fn empty(window: Bounds) -> ExploredRegion {
        ExploredRegion { window, mask: vec![false; window.area()] }
    }

    pub fn insert(&mut self, p: Point2) {
        let i = self.index(p);
        self.mask[i] = true;
    }

    fn index(&self, p: Point2) -> usize {
        debug_assert!(self.window.contains(p));
        let w = self.window.width() as usize;
        (p.y - self.window.min.y) as usize * w + (p.x - self.window.min.x) as usize
    }

    /// Sites outside the window are never explored.
    pub fn contains(&self, p: Point2) -> bool {
        self.window.contains(p) && self.mask[self.index(p)]
    }

    pub fn window(&self) -> Bounds {
        self.window
    }

    pub fn sites(&self) -> impl Iterator<Item = Point2> + '_ {
        self.window.sites().filter(|&p| self.contains(p))
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// How thread sites are chosen when decorating a path. `Fresh` is the real
/// rule; `Stale` deliberately re-uses explored sites and exists only to
/// demonstrate that the freshness test has power against that bug.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ThreadRule {
    Fresh,
    Stale,
}

/// A concatenated crossing path with its gap set, thread map and explored
/// region.
#[derive(Clone, Debug)]
pub struct DecoratedPath {
    pub path: LatticePath,
    /// Indices of path vertices whose whole neighborhood is explored.
    pub gaps: Vec<usize>,
    /// Thread site for every index off the gap set.
    pub threads: BTreeMap<usize, Point2>,
    pub explored: ExploredRegion,
}

impl DecoratedPath {
    /// Distinct thread sites.
    pub fn thread_sites(&self) -> Vec<Point2> {
        let set: std::collections::BTreeSet<_> = self.threads.values().copied().collect();
        set.into_iter().collect()
    }

    /// How many thread sites fall outside the union of the plan rectangles.
    /// The selection rule allows this near the outer boundary; callers report
    /// the frequency instead of hiding it.
    pub fn threads_outside_rects(&self, plan: &SpiralPlan) -> usize {
        self.thread_sites()
            .iter()
            .filter(|&&y| !plan.rects().iter().any(|r| r.contains(y)))
            .count()
    }
}

/// One realized stage: the untrimmed lowest crossing and every site the
/// stage examined.
#[derive(Clone, Debug)]
pub struct StageOutcome {
    pub crossing: LatticePath,
    pub revealed: Vec<Point2>,
}

/// The full allowed sequence realizing the depth-k crossing event.
#[derive(Clone, Debug)]
pub struct DeltaOutcome {
    pub crossings: Vec<LatticePath>,
    pub stage_revealed: Vec<Vec<Point2>>,
}

impl DeltaOutcome {
    pub fn explored_region(&self, plan: &SpiralPlan) -> ExploredRegion {
        let mut region = ExploredRegion::empty(plan.window());
        for stage in &self.stage_revealed {
            for &p in stage {
                region.insert(p);
            }
        }
        region
    }
}

/// The previous-stage path against which a rectangle is crossed: the virtual
/// seed segment for the first rectangle, a realized crossing afterwards.
pub enum PrevPath<'a> {
    Seed,
    Path(&'a LatticePath),
}

// Examination cache values for one stage.
const UNEXAMINED: u8 = 0;
const SEEN_VACANT: u8 = 1;
const SEEN_OCCUPIED: u8 = 2;

struct StageGrid {
    rect: Rect,
    // Dense over the rectangle: index = h * (long + 1) + a.
    wall: Vec<bool>,
    curtain: Vec<bool>,
    state: Vec<u8>,
}

impl StageGrid {
    fn idx(&self, a: i32, h: i32) -> usize {
        h as usize * (self.rect.long as usize + 1) + a as usize
    }

    fn in_rect(&self, a: i32, h: i32) -> bool {
        (0..=self.rect.long).contains(&a) && (0..=self.rect.short).contains(&h)
    }
}

/// Runs one stage of the exploration inside R_i. Returns the lowest crossing
/// and the examined sites, or `None` when the crossing event fails.
pub fn lowest_crossing(
    env: &Environment2D,
    plan: &SpiralPlan,
    stage: u32,
    prev: PrevPath<'_>,
) -> Result<Option<StageOutcome>, SpiralError> {
    let rect = plan.rect(stage);
    let prev_sites: Vec<Point2> = match prev {
        PrevPath::Seed => {
            if stage != 1 {
                return Err(SpiralError::PreconditionViolated(
                    "seed segment only precedes the first rectangle".into(),
                ));
            }
            plan.seed_sites()
        }
        PrevPath::Path(p) => p.vertices().to_vec(),
    };
    let prev_set: std::collections::HashSet<Point2> = prev_sites.iter().copied().collect();

    // The previous crossing must land on the bottom side and stay clear of
    // the right side; the seed sits outside, hugging the left side.
    if let PrevPath::Path(p) = prev {
        let last = p.last();
        if !rect.on_side(last, Side::Bottom) {
            return Err(SpiralError::PreconditionViolated(format!(
                "previous crossing must end on the bottom side of R_{stage}, ends at {last}"
            )));
        }
        for &v in p.vertices() {
            for q in v.neighbors() {
                if !prev_set.contains(&q) && rect.on_side(q, Side::Right) {
                    return Err(SpiralError::PreconditionViolated(format!(
                        "previous path boundary touches the right side of R_{stage} at {q}"
                    )));
                }
            }
        }
    }

    let site_count = rect.site_count();
    let mut grid = StageGrid {
        rect,
        wall: vec![false; site_count],
        curtain: vec![false; site_count],
        state: vec![UNEXAMINED; site_count],
    };
    for &p in &prev_sites {
        if rect.contains(p) {
            let (a, h) = rect.global_to_local(p);
            let i = grid.idx(a, h);
            grid.wall[i] = true;
        }
    }
    // The curtain: sites of the rectangle adjacent to the previous path.
    for h in 0..=rect.short {
        for a in 0..=rect.long {
            let i = grid.idx(a, h);
            if grid.wall[i] {
                continue;
            }
            let g = rect.local_to_global(a, h);
            if g.neighbors().iter().any(|q| prev_set.contains(q)) {
                grid.curtain[i] = true;
            }
        }
    }

    // Start candidates ordered by walking the previous path backward from
    // where it lands on the bottom side, taking each vertex's curtain
    // neighbors lowest first. The winning start marks the junction where
    // the concatenated path will leave the previous crossing, so every
    // candidate examined before it hugs only the abandoned tail; curtain
    // sites along the kept prefix stay unexamined.
    let walk_order: Vec<Point2> = match prev {
        PrevPath::Seed => prev_sites.clone(),
        PrevPath::Path(_) => prev_sites.iter().rev().copied().collect(),
    };
    let mut queued = vec![false; site_count];
    let mut candidates: Vec<(i32, i32)> = Vec::new();
    for w in walk_order {
        let mut local: Vec<(i32, i32)> = w
            .neighbors()
            .into_iter()
            .filter(|&g| rect.contains(g))
            .map(|g| {
                let (a, h) = rect.global_to_local(g);
                (h, a)
            })
            .filter(|&(h, a)| grid.curtain[grid.idx(a, h)])
            .collect();
        local.sort_unstable();
        for (h, a) in local {
            let i = grid.idx(a, h);
            if !queued[i] {
                queued[i] = true;
                candidates.push((h, a));
            }
        }
    }
    let mut revealed: Vec<Point2> = Vec::new();
    let mut dead = vec![false; site_count];
    for &(h, a) in &candidates {
        let i = grid.idx(a, h);
        if grid.state[i] == UNEXAMINED {
            grid.state[i] =
                if env.occupied(rect.local_to_global(a, h)) { SEEN_OCCUPIED } else { SEEN_VACANT };
            revealed.push(rect.local_to_global(a, h));
        }
        if grid.state[i] != SEEN_OCCUPIED {
            continue;
        }
        if let Some(path) = trace_crossing(env, &mut grid, (a, h), &mut dead, &mut revealed) {
            let global: Vec<Point2> =
                path.into_iter().map(|(a, h)| rect.local_to_global(a, h)).collect();
            let crossing = minimalize(&LatticePath::new(global));
            return Ok(Some(StageOutcome { crossing, revealed }));
        }
    }
    Ok(None)
}

// One frame of the wall-hugging search: position, heading, directions tried.
type WalkFrame = ((i32, i32), (i32, i32), usize);

/// Wall-hugging depth-first search through occupied sites from one start
/// candidate to the right side. Directions are tried turning toward the
/// bottom side first, so the trace follows the lower boundary of the
/// occupied material; site states are examined on first touch and recorded.
fn trace_crossing(
    env: &Environment2D,
    grid: &mut StageGrid,
    start: (i32, i32),
    dead: &mut [bool],
    revealed: &mut Vec<Point2>,
) -> Option<Vec<(i32, i32)>> {
    let long = grid.rect.long;
    let mut stack: Vec<WalkFrame> = vec![(start, (1, 0), 0)];
    let mut in_stack = vec![false; grid.rect.site_count()];
    in_stack[grid.idx(start.0, start.1)] = true;

    loop {
        let &(pos, heading, tried) = stack.last()?;
        if pos.0 == long {
            return Some(stack.iter().map(|&(p, _, _)| p).collect());
        }
        // Clockwise first (toward the bottom side), then straight, then
        // counterclockwise, then back.
        let dirs = [
            (heading.1, -heading.0),
            heading,
            (-heading.1, heading.0),
            (-heading.0, -heading.1),
        ];
        let mut step = None;
        let mut t = tried;
        while t < 4 {
            let d = dirs[t];
            t += 1;
            let next = (pos.0 + d.0, pos.1 + d.1);
            if !grid.in_rect(next.0, next.1) {
                continue;
            }
            let j = grid.idx(next.0, next.1);
            if grid.wall[j] || grid.curtain[j] || dead[j] || in_stack[j] {
                continue;
            }
            if grid.state[j] == UNEXAMINED {
                grid.state[j] = if env.occupied(grid.rect.local_to_global(next.0, next.1)) {
                    SEEN_OCCUPIED
                } else {
                    SEEN_VACANT
                };
                revealed.push(grid.rect.local_to_global(next.0, next.1));
            }
            if grid.state[j] != SEEN_OCCUPIED {
                continue;
            }
            step = Some((next, d, j));
            break;
        }
        stack.last_mut().unwrap().2 = t;
        match step {
            Some((next, d, j)) => {
                stack.push((next, d, 0));
                in_stack[j] = true;
            }
            None => {
                let (p, _, _) = stack.pop().unwrap();
                let j = grid.idx(p.0, p.1);
                in_stack[j] = false;
                dead[j] = true;
            }
        }
    }
}

/// The unique allowed sequence realizing the depth-`k` event, or `None` when
/// some stage fails. Deterministic in the environment.
pub fn delta_k(env: &Environment2D, plan: &SpiralPlan, k: u32) -> Option<DeltaOutcome> {
    assert!((1..=plan.depth()).contains(&k), "depth {k} out of range");
    let mut crossings: Vec<LatticePath> = Vec::new();
    let mut stage_revealed = Vec::new();
    for i in 1..=k {
        let prev = match crossings.last() {
            None => PrevPath::Seed,
            Some(p) => PrevPath::Path(p),
        };
        let outcome =
            lowest_crossing(env, plan, i, prev).expect("stage preconditions hold along the recursion")?;
        crossings.push(outcome.crossing);
        stage_revealed.push(outcome.revealed);
    }
    Some(DeltaOutcome { crossings, stage_revealed })
}

/// Concatenates the crossings of an allowed sequence into one minimal path:
/// follow each crossing until the first vertex adjacent to the next
/// crossing's start, then switch.
pub fn concatenate(delta: &DeltaOutcome) -> LatticePath {
    let crossings = &delta.crossings;
    let mut vertices: Vec<Point2> = Vec::new();
    for (i, gamma) in crossings.iter().enumerate() {
        if i + 1 == crossings.len() {
            vertices.extend_from_slice(gamma.vertices());
        } else {
            let next_start = crossings[i + 1].first();
            let cut = gamma
                .vertices()
                .iter()
                .position(|v| v.is_adjacent(next_start))
                .expect("next crossing starts on the curtain of the current one");
            vertices.extend_from_slice(&gamma.vertices()[..=cut]);
        }
    }
    LatticePath::new(vertices)
}

/// Gap indices: vertices whose four neighbors all lie in the explored
/// region.
pub fn compute_gaps(path: &LatticePath, explored: &ExploredRegion) -> Vec<usize> {
    path.vertices()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.neighbors().into_iter().all(|q| explored.contains(q)))
        .map(|(i, _)| i)
        .collect()
}

/// Thread map: for each index off the gap set, the lexicographically
/// earliest neighbor outside the explored region.
pub fn compute_threads(
    path: &LatticePath,
    gaps: &[usize],
    explored: &ExploredRegion,
) -> BTreeMap<usize, Point2> {
    let gap_set: std::collections::HashSet<usize> = gaps.iter().copied().collect();
    let mut threads = BTreeMap::new();
    for (i, v) in path.vertices().iter().enumerate() {
        if gap_set.contains(&i) {
            continue;
        }
        let y = v
            .neighbors()
            .into_iter()
            .find(|&q| !explored.contains(q))
            .expect("an index off the gap set has an unexplored neighbor");
        threads.insert(i, y);
    }
    threads
}

fn stale_threads(
    path: &LatticePath,
    gaps: &[usize],
    explored: &ExploredRegion,
) -> BTreeMap<usize, Point2> {
    let gap_set: std::collections::HashSet<usize> = gaps.iter().copied().collect();
    let mut threads = BTreeMap::new();
    for (i, v) in path.vertices().iter().enumerate() {
        if gap_set.contains(&i) {
            continue;
        }
        // Deliberate bug: prefer an explored neighbor (path vertices
        // included), whose state the conditioning has already pinned.
        let y = v
            .neighbors()
            .into_iter()
            .find(|&q| explored.contains(q))
            .or_else(|| v.neighbors().into_iter().find(|&q| !explored.contains(q)))
            .expect("every vertex has some neighbor");
        threads.insert(i, y);
    }
    threads
}

/// The decorated concatenated path for an environment realizing the depth-k
/// event.
pub fn phi_k(env: &Environment2D, plan: &SpiralPlan, k: u32) -> Result<DecoratedPath, SpiralError> {
    phi_k_with_rule(env, plan, k, ThreadRule::Fresh)
}

pub fn phi_k_with_rule(
    env: &Environment2D,
    plan: &SpiralPlan,
    k: u32,
    rule: ThreadRule,
) -> Result<DecoratedPath, SpiralError> {
    let delta = delta_k(env, plan, k).ok_or(SpiralError::NotInDeltaK(k))?;
    Ok(decorate(&delta, plan, rule))
}

/// Decorates an already-realized allowed sequence.
pub fn decorate(delta: &DeltaOutcome, plan: &SpiralPlan, rule: ThreadRule) -> DecoratedPath {
    let path = concatenate(delta);
    let explored = delta.explored_region(plan);
    let gaps = compute_gaps(&path, &explored);
    let threads = match rule {
        ThreadRule::Fresh => compute_threads(&path, &gaps, &explored),
        ThreadRule::Stale => stale_threads(&path, &gaps, &explored),
    };
    DecoratedPath { path, gaps, threads, explored }
}

/// Samples environments from consecutive replica streams until one realizes
/// the depth-k event, then decorates it. Returns the decoration and the
/// replica index that produced it; `None` when the budget runs out.
pub fn sample_decorated(
    rho: f64,
    plan: &SpiralPlan,
    k: u32,
    max_tries: u64,
    stream: &RngStream,
) -> Option<(DecoratedPath, u64)> {
    for rep in 0..max_tries {
        let mut rng = stream.substream(rep);
        let env = Environment2D::sample(plan.window(), rho, &mut rng);
        if let Ok(decorated) = phi_k(&env, plan, k) {
            return Some((decorated, rep));
        }
    }
    None
}

/// Monte Carlo frequency of the depth-k event at density `rho` and scale `l`.
pub fn estimate_delta_prob(
    rho: f64,
    l: u32,
    k: u32,
    n_samples: u64,
    stream: &RngStream,
) -> Estimate {
    let plan = SpiralPlan::new(l, k);
    let hits: u64 = (0..n_samples)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream.substream(rep);
            let env = Environment2D::sample(plan.window(), rho, &mut rng);
            delta_k(&env, &plan, k).is_some() as u64
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Estimate::from_counts(hits, n_samples)
}

/// Outcome of the thread freshness test.
#[derive(Clone, Debug)]
pub struct FreshnessReport {
    pub rho: f64,
    pub l: u32,
    pub k: u32,
    pub n_samples: u64,
    /// Environments realizing the depth-k event.
    pub n_conditioned: u64,
    /// Occurrences of the modal crossing sequence.
    pub modal_count: u64,
    pub thread_site_count: usize,
    pub statistic: f64,
    pub p_value: f64,
    /// True when the density is degenerate and the test carries no
    /// information.
    pub skipped: bool,
}

/// Conditions on the most frequently realized crossing sequence and tests
/// that the states of its thread sites are independent Bernoulli(rho) draws,
/// via a per-site chi-square statistic. With `ThreadRule::Stale` this is the
/// deliberate-bug harness: explored sites masquerade as threads and the test
/// must reject.
pub fn freshness_test(
    rho: f64,
    l: u32,
    k: u32,
    n_samples: u64,
    min_count: u64,
    rule: ThreadRule,
    stream: &RngStream,
) -> Result<FreshnessReport, SpiralError> {
    if rho <= 0.0 || rho >= 1.0 {
        return Ok(FreshnessReport {
            rho,
            l,
            k,
            n_samples,
            n_conditioned: 0,
            modal_count: 0,
            thread_site_count: 0,
            statistic: 0.0,
            p_value: 1.0,
            skipped: true,
        });
    }
    let plan = SpiralPlan::new(l, k);
    // One record per conditioned sample: sequence key and thread states.
    let records: Vec<(u64, Vec<bool>)> = (0..n_samples)
        .into_par_iter()
        .filter_map(|rep| {
            let mut rng = stream.substream(rep);
            let env = Environment2D::sample(plan.window(), rho, &mut rng);
            let delta = delta_k(&env, &plan, k)?;
            let decorated = decorate(&delta, &plan, rule);
            let key = sequence_hash(&delta);
            let states = decorated.thread_sites().iter().map(|&y| env.occupied(y)).collect();
            Some((key, states))
        })
        .collect();

    let n_conditioned = records.len() as u64;
    let mut by_key: BTreeMap<u64, Vec<&Vec<bool>>> = BTreeMap::new();
    for (key, states) in &records {
        by_key.entry(*key).or_default().push(states);
    }
    let (modal_key, modal) = by_key
        .iter()
        .max_by_key(|(key, group)| (group.len(), u64::MAX - **key))
        .map(|(k, g)| (*k, g))
        .ok_or(SpiralError::InsufficientConditionalSamples { needed: min_count, got: 0 })?;
    let _ = modal_key;
    let m = modal.len() as u64;
    if m < min_count {
        return Err(SpiralError::InsufficientConditionalSamples { needed: min_count, got: m });
    }

    let site_count = modal[0].len();
    let mut counts = vec![0u64; site_count];
    for states in modal {
        assert_eq!(states.len(), site_count, "same sequence, same thread sites");
        for (c, &s) in counts.iter_mut().zip(states.iter()) {
            *c += s as u64;
        }
    }
    let expected = m as f64 * rho;
    let var = m as f64 * rho * (1.0 - rho);
    let statistic: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / var).sum();
    let p_value = chi_square_sf(statistic, site_count as u64);

    Ok(FreshnessReport {
        rho,
        l,
        k,
        n_samples,
        n_conditioned,
        modal_count: m,
        thread_site_count: site_count,
        statistic,
        p_value,
        skipped: false,
    })
}

/// Stable hash of the crossing sequence (FNV-1a over vertex coordinates).
pub fn sequence_hash(delta: &DeltaOutcome) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    let mut eat = |v: i32| {
        for b in v.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
    };
    for gamma in &delta.crossings {
        eat(i32::MIN); // separator
        for v in gamma.vertices() {
            eat(v.x);
            eat(v.y);
        }
    }
    h
}

/// Stable hash of a single path.
pub fn path_hash(path: &LatticePath) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for v in path.vertices() {
        for b in v.x.to_le_bytes().into_iter().chain(v.y.to_le_bytes()) {
            h ^= b as u64;
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
    }
    h
}
