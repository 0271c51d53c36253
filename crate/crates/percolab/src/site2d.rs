//! Site percolation on finite windows of the square lattice: sampling of the
//! columnar environment, rectangle crossings, cluster analysis, calibration
//! of the spiral base scale and a finite-size estimate of the site threshold.

use crate::dsu::DisjointSets;
use crate::geom::{Bounds, Point2, Rect, Side};
use crate::rng::RngStream;
use crate::stats::Estimate;
use crate::sweep::ThresholdCurve;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum Site2dError {
    #[error("query rectangle {0:?} exceeds the sampled window")]
    RectOutsideWindow(Bounds),
}

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error("no scale up to {l_max} meets the crossing schedule at rho={rho}")]
    BudgetExhausted { rho: f64, l_max: u32 },
}

/// Occupancy field over a finite window; one bit per site, bit set means the
/// column over that site is retained.
#[derive(Clone, Debug)]
pub struct Environment2D {
    window: Bounds,
    bits: Vec<u64>,
    rho: f64,
}

impl Environment2D {
    /// Draws every site independently with probability `rho`, in row-major
    /// order of the window.
    pub fn sample(window: Bounds, rho: f64, rng: &mut RngStream) -> Environment2D {
        assert!((0.0..=1.0).contains(&rho), "rho out of range");
        let mut env = Environment2D::vacant(window, rho);
        for (i, _) in window.sites().enumerate() {
            if rng.random::<f64>() < rho {
                env.bits[i / 64] |= 1 << (i % 64);
            }
        }
        env
    }

    pub fn vacant(window: Bounds, rho: f64) -> Environment2D {
        let words = window.area().div_ceil(64);
        Environment2D { window, bits: vec![0; words], rho }
    }

    pub fn window(&self) -> Bounds {
        self.window
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Row-major site index; stable, so cluster labels are reproducible.
    pub fn index_of(&self, p: Point2) -> usize {
        assert!(self.window.contains(p), "site {p} outside window");
        let w = self.window.width() as usize;
        (p.y - self.window.min.y) as usize * w + (p.x - self.window.min.x) as usize
    }

    pub fn occupied(&self, p: Point2) -> bool {
        let i = self.index_of(p);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    /// Occupancy for sites that may fall outside the window; outside counts
    /// as vacant. Exploration code probes a one-site margin this way.
    pub fn occupied_or_outside_vacant(&self, p: Point2) -> bool {
        self.window.contains(p) && self.occupied(p)
    }

    pub fn set_occupied(&mut self, p: Point2, value: bool) {
        let i = self.index_of(p);
        if value {
            self.bits[i / 64] |= 1 << (i % 64);
        } else {
            self.bits[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn occupied_sites(&self) -> impl Iterator<Item = Point2> + '_ {
        self.window.sites().filter(|&p| self.occupied(p))
    }
}

/// Which pair of opposite sides a crossing must join, in the rectangle's
/// local frame.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Direction {
    /// Left to right: the long way, between the two short sides.
    Hard,
    /// Bottom to top: the short way, between the two long sides.
    Easy,
}

#[derive(Clone, Copy, Debug)]
pub struct CrossingQuery {
    pub rect: Rect,
    pub direction: Direction,
}

impl CrossingQuery {
    pub fn hard(rect: Rect) -> CrossingQuery {
        CrossingQuery { rect, direction: Direction::Hard }
    }

    pub fn easy(rect: Rect) -> CrossingQuery {
        CrossingQuery { rect, direction: Direction::Easy }
    }

    fn sides(&self) -> (Side, Side) {
        match self.direction {
            Direction::Hard => (Side::Left, Side::Right),
            Direction::Easy => (Side::Bottom, Side::Top),
        }
    }
}

/// Whether an occupied nearest-neighbor path inside the rectangle joins the
/// two designated opposite sides. Union-find over the rectangle's sites with
/// two virtual boundary nodes.
pub fn has_crossing(env: &Environment2D, query: &CrossingQuery) -> Result<bool, Site2dError> {
    let rect = query.rect;
    let b = rect.bounds();
    if !(env.window.contains(b.min) && env.window.contains(b.max)) {
        return Err(Site2dError::RectOutsideWindow(b));
    }
    let cols = rect.long as usize + 1;
    let n = rect.site_count();
    let source = n;
    let sink = n + 1;
    let mut ds = DisjointSets::new(n + 2);
    let local = |a: i32, h: i32| h as usize * cols + a as usize;
    for h in 0..=rect.short {
        for a in 0..=rect.long {
            if !env.occupied(rect.local_to_global(a, h)) {
                continue;
            }
            if a > 0 && env.occupied(rect.local_to_global(a - 1, h)) {
                ds.union(local(a, h), local(a - 1, h));
            }
            if h > 0 && env.occupied(rect.local_to_global(a, h - 1)) {
                ds.union(local(a, h), local(a, h - 1));
            }
        }
    }
    let (from, to) = query.sides();
    for p in rect.side_sites(from) {
        if env.occupied(p) {
            let (a, h) = rect.global_to_local(p);
            ds.union(source, local(a, h));
        }
    }
    for p in rect.side_sites(to) {
        if env.occupied(p) {
            let (a, h) = rect.global_to_local(p);
            ds.union(sink, local(a, h));
        }
    }
    Ok(ds.connected(source, sink))
}

/// Nearest-neighbor connected components of the occupied sites. Clusters and
/// their members come out sorted, so labels are stable across runs.
pub fn clusters(env: &Environment2D) -> Vec<Vec<Point2>> {
    let mut ds = DisjointSets::new(env.window.area());
    for p in env.occupied_sites() {
        let right = Point2::new(p.x + 1, p.y);
        if env.window.contains(right) && env.occupied(right) {
            ds.union(env.index_of(p), env.index_of(right));
        }
        let up = Point2::new(p.x, p.y + 1);
        if env.window.contains(up) && env.occupied(up) {
            ds.union(env.index_of(p), env.index_of(up));
        }
    }
    let mut by_root: std::collections::BTreeMap<usize, Vec<Point2>> = std::collections::BTreeMap::new();
    for p in env.occupied_sites() {
        let root = ds.find(env.index_of(p));
        by_root.entry(root).or_default().push(p);
    }
    let mut out: Vec<Vec<Point2>> = by_root.into_values().collect();
    for c in &mut out {
        c.sort();
    }
    out.sort_by_key(|c| c[0]);
    out
}

/// Monte Carlo frequency of a crossing event at density `rho`, with a 95%
/// Wald interval. Replicas fan out over workers; the result depends only on
/// the stream, not on scheduling.
pub fn estimate_crossing_prob(
    rho: f64,
    query: &CrossingQuery,
    n_samples: u64,
    stream: &RngStream,
) -> Estimate {
    let window = query.rect.bounds();
    let hits = (0..n_samples)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream.substream(rep);
            let env = Environment2D::sample(window, rho, &mut rng);
            has_crossing(&env, query).expect("query window covers the rectangle") as u64
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Estimate::from_counts(hits, n_samples)
}

/// The crossing-probability target for the i-th spiral stage (i >= 1).
pub fn default_target(i: u32) -> f64 {
    1.0 - 0.5f64.powi(i as i32 + 1)
}

/// Hard-crossing evidence for one (scale, stage) pair during calibration.
#[derive(Clone, Debug)]
pub struct CalibrationEvidence {
    pub l: u32,
    pub stage: u32,
    pub long: i32,
    pub short: i32,
    pub estimate: Estimate,
    pub lower_bound: f64,
    pub target: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct Calibration {
    pub rho: f64,
    pub l: u32,
    pub i_max: u32,
    pub n_samples: u64,
    pub evidence: Vec<CalibrationEvidence>,
}

/// Smallest base scale whose first `i_max` spiral rectangles all meet the
/// crossing schedule, certified at the conservative lower confidence bound.
/// Doubling search for an upper bound, then binary refinement. Every scale
/// consulted leaves its evidence rows in the report.
pub fn calibrate_l(
    rho: f64,
    i_max: u32,
    n_samples: u64,
    l_max: u32,
    stream: &RngStream,
    target: impl Fn(u32) -> f64,
) -> Result<Calibration, CalibrationError> {
    assert!(i_max >= 1 && l_max >= 1 && n_samples >= 1);
    let mut evidence = Vec::new();
    let qualifies = |l: u32, evidence: &mut Vec<CalibrationEvidence>| -> bool {
        let mut all = true;
        for i in 1..=i_max {
            let scale = 1i32 << (i - 1);
            let long = 4 * l as i32 * scale;
            let short = l as i32 * scale;
            let rect = Rect::axis_aligned(Point2::new(0, 0), long, short);
            // Stream keyed by (l, i) so a revisited scale reproduces exactly.
            let key = (l as u64) << 32 | i as u64;
            let est = estimate_crossing_prob(rho, &CrossingQuery::hard(rect), n_samples, &stream.substream(key));
            let lower = est.lower_conservative();
            let t = target(i);
            let pass = lower >= t;
            evidence.push(CalibrationEvidence {
                l,
                stage: i,
                long,
                short,
                estimate: est,
                lower_bound: lower,
                target: t,
                pass,
            });
            if !pass {
                all = false;
                break;
            }
        }
        all
    };

    // Doubling phase.
    let mut hi = None;
    let mut l = 1u32;
    let mut last_failed = 0u32;
    while l <= l_max {
        if qualifies(l, &mut evidence) {
            hi = Some(l);
            break;
        }
        last_failed = l;
        l = l.saturating_mul(2);
    }
    let Some(mut hi) = hi else {
        return Err(CalibrationError::BudgetExhausted { rho, l_max });
    };

    // Binary refinement between the last failing scale and the qualifying one.
    let mut lo = last_failed + 1;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if qualifies(mid, &mut evidence) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }

    Ok(Calibration { rho, l: hi, i_max, n_samples, evidence })
}

/// Per-replica occupation threshold at which a hard crossing of the n x n
/// square first appears, found by inserting sites in increasing order of an
/// attached uniform mark. One union-find sweep per replica.
fn square_crossing_threshold(n: u32, rng: &mut RngStream) -> f64 {
    let rect = Rect::axis_aligned(Point2::new(0, 0), n as i32, n as i32);
    let cols = n as usize + 1;
    let count = rect.site_count();
    let source = count;
    let sink = count + 1;
    let mut marks: Vec<(f64, u32)> = (0..count as u32).map(|i| (rng.random::<f64>(), i)).collect();
    marks.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut occupied = vec![false; count];
    let mut ds = DisjointSets::new(count + 2);
    for &(u, idx) in &marks {
        let a = (idx as usize % cols) as i32;
        let h = (idx as usize / cols) as i32;
        occupied[idx as usize] = true;
        let link = |da: i32, dh: i32, ds: &mut DisjointSets| {
            let (na, nh) = (a + da, h + dh);
            if (0..=rect.long).contains(&na) && (0..=rect.short).contains(&nh) {
                let j = nh as usize * cols + na as usize;
                if occupied[j] {
                    ds.union(idx as usize, j);
                }
            }
        };
        link(-1, 0, &mut ds);
        link(1, 0, &mut ds);
        link(0, -1, &mut ds);
        link(0, 1, &mut ds);
        if a == 0 {
            ds.union(source, idx as usize);
        }
        if a == rect.long {
            ds.union(sink, idx as usize);
        }
        if ds.connected(source, sink) {
            return u;
        }
    }
    // A fully occupied square always crosses.
    unreachable!("square crossing must appear by full occupation")
}

#[derive(Clone, Debug)]
pub struct RhoCEstimate {
    pub estimate: f64,
    pub half_width: f64,
    pub curves: Vec<ThresholdCurve>,
    /// Intersection of each successive pair of curves.
    pub pair_estimates: Vec<f64>,
}

/// Finite-size intersection estimate of the site-percolation threshold from
/// hard crossings of squares. Successive curve pairs are intersected; the
/// interval comes from batch resampling over replicas.
pub fn estimate_rho_c(sizes: &[u32], n_samples: u64, stream: &RngStream) -> RhoCEstimate {
    assert!(sizes.len() >= 2, "need at least two window sizes");
    assert!(sizes.windows(2).all(|w| w[0] < w[1]), "sizes must increase");
    let curves: Vec<ThresholdCurve> = sizes
        .iter()
        .enumerate()
        .map(|(si, &n)| {
            let sub = stream.substream(si as u64);
            let thresholds: Vec<f64> = (0..n_samples)
                .into_par_iter()
                .map(|rep| {
                    let mut rng = sub.substream(rep);
                    square_crossing_threshold(n, &mut rng)
                })
                .collect();
            ThresholdCurve::new(n, thresholds)
        })
        .collect();

    // Square crossings always appear by full occupation, so every pair has a
    // genuine intersection; the median fallback only covers pathological
    // sample sizes.
    let pair_estimates: Vec<f64> = crate::sweep::pair_intersections(&curves)
        .into_iter()
        .enumerate()
        .map(|(i, x)| {
            x.unwrap_or_else(|| {
                let a = crate::sweep::finite_median(&curves[i]).unwrap_or(0.5);
                let b = crate::sweep::finite_median(&curves[i + 1]).unwrap_or(0.5);
                (a + b) / 2.0
            })
        })
        .collect();
    let estimate = pair_estimates.iter().sum::<f64>() / pair_estimates.len() as f64;
    let half_width = crate::sweep::batch_half_width(&curves, 8.min(n_samples as usize));

    RhoCEstimate { estimate, half_width, curves, pair_estimates }
}
