//! Direct simulation of bond percolation on the column-diluted cubic
//! lattice over finite boxes: annealed sampling, cluster statistics around a
//! base segment, and the critical-curve estimator built from one-shot
//! edge-insertion sweeps.

use crate::dsu::DisjointSets;
use crate::geom::{Bounds, Point2, Rect};
use crate::rng::RngStream;
use crate::site2d::{has_crossing, CrossingQuery, Environment2D};
use crate::stats::Estimate;
use crate::sweep::ThresholdCurve;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum Perc3dError {
    #[error("box side {n} cannot host the depth-{k} construction at scale {l}")]
    BoxTooSmall { n: u32, l: u32, k: u32 },
    #[error("spanning curves of sizes {0} and {1} never cross")]
    NoIntersection(u32, u32),
}

/// One annealed sample on the box [0,N]^2 x [-H,H]: the environment and the
/// open flags of the surviving edges. Edges incident to a removed column do
/// not exist and count as closed.
#[derive(Clone, Debug)]
pub struct DiluteConfig3D {
    pub n: u32,
    pub height: u32,
    pub rho: f64,
    pub p: f64,
    pub env: Environment2D,
    /// Edges {(x,y,z),(x+1,y,z)}, index ((x * (N+1)) + y) * (2H+1) + zi.
    pub open_x: Vec<bool>,
    /// Edges {(x,y,z),(x,y+1,z)}, index ((x * N) + y) * (2H+1) + zi.
    pub open_y: Vec<bool>,
    /// Edges {(x,y,z),(x,y,z+1)}, index ((x * (N+1)) + y) * 2H + zi.
    pub open_z: Vec<bool>,
}

impl DiluteConfig3D {
    pub fn site_index(&self, x: u32, y: u32, z: i32) -> usize {
        let levels = 2 * self.height as usize + 1;
        ((x as usize * (self.n as usize + 1)) + y as usize) * levels
            + (z + self.height as i32) as usize
    }

    pub fn site_count(&self) -> usize {
        (self.n as usize + 1) * (self.n as usize + 1) * (2 * self.height as usize + 1)
    }

    fn column(&self, x: u32, y: u32) -> bool {
        self.env.occupied(Point2::new(x as i32, y as i32))
    }

    /// Union-find structure of the open configuration.
    pub fn components(&self) -> DisjointSets {
        let mut ds = DisjointSets::new(self.site_count());
        let n = self.n as usize;
        let levels = 2 * self.height as usize + 1;
        let h = self.height as i32;
        for x in 0..n {
            for y in 0..=n {
                for zi in 0..levels {
                    if self.open_x[(x * (n + 1) + y) * levels + zi] {
                        let z = zi as i32 - h;
                        ds.union(
                            self.site_index(x as u32, y as u32, z),
                            self.site_index(x as u32 + 1, y as u32, z),
                        );
                    }
                }
            }
        }
        for x in 0..=n {
            for y in 0..n {
                for zi in 0..levels {
                    if self.open_y[(x * n + y) * levels + zi] {
                        let z = zi as i32 - h;
                        ds.union(
                            self.site_index(x as u32, y as u32, z),
                            self.site_index(x as u32, y as u32 + 1, z),
                        );
                    }
                }
            }
        }
        for x in 0..=n {
            for y in 0..=n {
                for zi in 0..levels - 1 {
                    if self.open_z[(x * (n + 1) + y) * (levels - 1) + zi] {
                        let z = zi as i32 - h;
                        ds.union(
                            self.site_index(x as u32, y as u32, z),
                            self.site_index(x as u32, y as u32, z + 1),
                        );
                    }
                }
            }
        }
        ds
    }
}

/// Base window for a box of side N.
pub fn base_window(n: u32) -> Bounds {
    Bounds { min: Point2::new(0, 0), max: Point2::new(n as i32, n as i32) }
}

/// Annealed sample: environment first, then bonds on the surviving edges.
/// Draw order is fixed (environment row-major, then x-, y-, z-edges in index
/// order over existing edges).
pub fn sample_dilute(rho: f64, p: f64, n: u32, height: u32, rng: &mut RngStream) -> DiluteConfig3D {
    let env = Environment2D::sample(base_window(n), rho, rng);
    let nn = n as usize;
    let levels = 2 * height as usize + 1;
    let col = |x: usize, y: usize| env.occupied(Point2::new(x as i32, y as i32));

    let mut open_x = vec![false; nn * (nn + 1) * levels];
    for x in 0..nn {
        for y in 0..=nn {
            if col(x, y) && col(x + 1, y) {
                for zi in 0..levels {
                    open_x[(x * (nn + 1) + y) * levels + zi] = rng.random::<f64>() < p;
                }
            }
        }
    }
    let mut open_y = vec![false; (nn + 1) * nn * levels];
    for x in 0..=nn {
        for y in 0..nn {
            if col(x, y) && col(x, y + 1) {
                for zi in 0..levels {
                    open_y[(x * nn + y) * levels + zi] = rng.random::<f64>() < p;
                }
            }
        }
    }
    let mut open_z = vec![false; (nn + 1) * (nn + 1) * (levels - 1)];
    for x in 0..=nn {
        for y in 0..=nn {
            if col(x, y) {
                for zi in 0..levels - 1 {
                    open_z[(x * (nn + 1) + y) * (levels - 1) + zi] = rng.random::<f64>() < p;
                }
            }
        }
    }
    DiluteConfig3D { n, height, rho, p, env, open_x, open_y, open_z }
}

/// Size of the largest open cluster meeting the base segment
/// {0} x [0, l] x {0}. Occupied sites with no incident open edge count as
/// clusters of size one; a vacant column contributes nothing.
pub fn largest_cluster_touching(config: &DiluteConfig3D, l: u32) -> usize {
    assert!(l <= config.n, "segment length exceeds the box");
    let mut ds = config.components();
    let mut best = 0usize;
    for j in 0..=l {
        if config.column(0, j) {
            best = best.max(ds.set_size(config.site_index(0, j, 0)));
        }
    }
    best
}

/// Monte Carlo frequency of the event that the largest cluster touching the
/// base segment exceeds 2^k * l vertices. The box must be able to host the
/// depth-k construction, whose footprint has side 2^(k+1) * l.
#[allow(clippy::too_many_arguments)]
pub fn large_cluster_prob(
    rho: f64,
    p: f64,
    l: u32,
    k: u32,
    n: u32,
    height: u32,
    n_samples: u64,
    stream: &RngStream,
) -> Result<Estimate, Perc3dError> {
    let footprint = (1u64 << (k + 1)) * l as u64;
    if (n as u64) < footprint || l > n {
        return Err(Perc3dError::BoxTooSmall { n, l, k });
    }
    let cutoff = (1usize << k) * l as usize;
    let hits: u64 = (0..n_samples)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream.substream(rep);
            let config = sample_dilute(rho, p, n, height, &mut rng);
            (largest_cluster_touching(&config, l) > cutoff) as u64
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(Estimate::from_counts(hits, n_samples))
}

/// Per-replica bond-insertion sweep: the smallest p at which an open
/// left-right crossing of the box appears, reusing one uniform per edge.
/// Returns infinity when the environment itself has no base crossing, since
/// then no p can span.
fn spanning_threshold(rho: f64, n: u32, height: u32, rng: &mut RngStream) -> f64 {
    let env = Environment2D::sample(base_window(n), rho, rng);
    let base_rect = Rect::axis_aligned(Point2::new(0, 0), n as i32, n as i32);
    if !has_crossing(&env, &CrossingQuery::hard(base_rect)).expect("window covers the base") {
        return f64::INFINITY;
    }

    let nn = n as usize;
    let levels = 2 * height as usize + 1;
    let col = |x: usize, y: usize| env.occupied(Point2::new(x as i32, y as i32));
    let site =
        |x: usize, y: usize, zi: usize| (x * (nn + 1) + y) * levels + zi;

    // Existing edges with their marks, in fixed enumeration order.
    let mut edges: Vec<(f64, u32, u32)> = Vec::new();
    let push = |mark: f64, a: usize, b: usize, edges: &mut Vec<(f64, u32, u32)>| {
        edges.push((mark, a as u32, b as u32));
    };
    for x in 0..nn {
        for y in 0..=nn {
            if col(x, y) && col(x + 1, y) {
                for zi in 0..levels {
                    push(rng.random(), site(x, y, zi), site(x + 1, y, zi), &mut edges);
                }
            }
        }
    }
    for x in 0..=nn {
        for y in 0..nn {
            if col(x, y) && col(x, y + 1) {
                for zi in 0..levels {
                    push(rng.random(), site(x, y, zi), site(x, y + 1, zi), &mut edges);
                }
            }
        }
    }
    for x in 0..=nn {
        for y in 0..=nn {
            if col(x, y) {
                for zi in 0..levels - 1 {
                    push(rng.random(), site(x, y, zi), site(x, y, zi + 1), &mut edges);
                }
            }
        }
    }
    edges.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

    let sites = (nn + 1) * (nn + 1) * levels;
    let source = sites;
    let sink = sites + 1;
    let mut ds = DisjointSets::new(sites + 2);
    for y in 0..=nn {
        for zi in 0..levels {
            if col(0, y) {
                ds.union(source, site(0, y, zi));
            }
            if col(nn, y) {
                ds.union(sink, site(nn, y, zi));
            }
        }
    }
    for &(mark, a, b) in &edges {
        ds.union(a as usize, b as usize);
        if ds.connected(source, sink) {
            return mark;
        }
    }
    // The base crossing guarantees a fully open configuration spans.
    unreachable!("base crossing exists, so full occupation spans")
}

#[derive(Clone, Debug)]
pub struct PcEstimate {
    pub rho: f64,
    pub estimate: f64,
    pub half_width: f64,
    /// True when the largest box fails to span at p = 1 in most replicas;
    /// the threshold is then reported as 1.
    pub subcritical: bool,
    pub curves: Vec<ThresholdCurve>,
    pub pair_estimates: Vec<f64>,
}

/// Finite-size intersection estimate of the bond threshold at column
/// density rho. Heights are `aspect` times the side (free boundary).
pub fn estimate_pc(
    rho: f64,
    sizes: &[u32],
    aspect: f64,
    n_samples: u64,
    stream: &RngStream,
) -> Result<PcEstimate, Perc3dError> {
    assert!(sizes.len() >= 2, "need at least two box sizes");
    assert!(sizes.windows(2).all(|w| w[0] < w[1]), "sizes must increase");
    let curves: Vec<ThresholdCurve> = sizes
        .iter()
        .enumerate()
        .map(|(si, &n)| {
            let height = ((n as f64 * aspect).round() as u32).max(1);
            let sub = stream.substream(si as u64);
            let thresholds: Vec<f64> = (0..n_samples)
                .into_par_iter()
                .map(|rep| {
                    let mut rng = sub.substream(rep);
                    spanning_threshold(rho, n, height, &mut rng)
                })
                .collect();
            ThresholdCurve::new(n, thresholds)
        })
        .collect();

    // Below the disconnection threshold the box cannot span even fully
    // open; report the degenerate value instead of hunting intersections.
    if curves.last().unwrap().terminal_fraction() < 0.5 {
        return Ok(PcEstimate {
            rho,
            estimate: 1.0,
            half_width: 0.0,
            subcritical: true,
            curves,
            pair_estimates: Vec::new(),
        });
    }

    let raw = crate::sweep::pair_intersections(&curves);
    let mut pair_estimates = Vec::new();
    for (i, x) in raw.into_iter().enumerate() {
        match x {
            Some(v) => pair_estimates.push(v),
            None => {
                return Err(Perc3dError::NoIntersection(curves[i].size, curves[i + 1].size));
            }
        }
    }
    let estimate = pair_estimates.iter().sum::<f64>() / pair_estimates.len() as f64;
    let half_width = crate::sweep::batch_half_width(&curves, 8.min(n_samples as usize));

    Ok(PcEstimate { rho, estimate, half_width, subcritical: false, curves, pair_estimates })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_samples() {
        let mut rng = RngStream::new(1, 0);
        let none = sample_dilute(0.0, 0.7, 4, 3, &mut rng);
        assert!(!none.open_x.iter().any(|&b| b));
        assert!(!none.open_y.iter().any(|&b| b));
        assert!(!none.open_z.iter().any(|&b| b));
        let all = sample_dilute(1.0, 1.0, 4, 3, &mut rng);
        assert!(all.open_x.iter().all(|&b| b));
        assert!(all.open_y.iter().all(|&b| b));
        assert!(all.open_z.iter().all(|&b| b));
    }

    #[test]
    fn per_edge_open_rates_follow_the_product_law() {
        // Vertical edges need one occupied column, horizontal edges two.
        let stream = RngStream::new(2, 0);
        let trials = 60_000u64;
        let (mut vert, mut horiz) = (0u64, 0u64);
        for rep in 0..trials {
            let mut rng = stream.substream(rep);
            let c = sample_dilute(0.8, 0.3, 1, 1, &mut rng);
            vert += c.open_z[0] as u64; // column (0,0), edge z=-1..0
            horiz += c.open_x[0] as u64; // (0,0)-(1,0) at z=-1
        }
        let check = |count: u64, target: f64| {
            let mean = count as f64 / trials as f64;
            let se = (target * (1.0 - target) / trials as f64).sqrt();
            assert!((mean - target).abs() < 4.0 * se, "{mean} vs {target}");
        };
        check(vert, 0.3 * 0.8);
        check(horiz, 0.3 * 0.8 * 0.8);
    }

    #[test]
    fn isolated_occupied_vertex_counts_as_one() {
        let mut rng = RngStream::new(3, 0);
        let mut config = sample_dilute(1.0, 0.0, 4, 2, &mut rng);
        assert_eq!(largest_cluster_touching(&config, 3), 1);
        // Vacate the whole segment's columns: nothing to touch.
        for j in 0..=4 {
            config.env.set_occupied(Point2::new(0, j), false);
        }
        assert_eq!(largest_cluster_touching(&config, 4), 0);
    }

    #[test]
    fn full_box_is_one_cluster() {
        let mut rng = RngStream::new(4, 0);
        let config = sample_dilute(1.0, 1.0, 3, 2, &mut rng);
        assert_eq!(largest_cluster_touching(&config, 2), config.site_count());
    }

    #[test]
    fn cluster_sizes_match_bfs_oracle() {
        let stream = RngStream::new(5, 0);
        for rep in 0..30 {
            let mut rng = stream.substream(rep);
            let config = sample_dilute(0.7, 0.4, 4, 3, &mut rng);

            // Breadth-first search over open edges from every segment site.
            let n = config.n;
            let h = config.height as i32;
            let levels = 2 * config.height as usize + 1;
            let nn = n as usize;
            let open = |a: (u32, u32, i32), b: (u32, u32, i32)| -> bool {
                let ((xa, ya, za), (xb, yb, zb)) = (a, b);
                let zi = |z: i32| (z + h) as usize;
                if xa != xb {
                    let x = xa.min(xb) as usize;
                    config.open_x[(x * (nn + 1) + ya as usize) * levels + zi(za)]
                } else if ya != yb {
                    let y = ya.min(yb) as usize;
                    config.open_y[(xa as usize * nn + y) * levels + zi(za)]
                } else {
                    let z = za.min(zb);
                    config.open_z[(xa as usize * (nn + 1) + ya as usize) * (levels - 1) + zi(z)]
                }
            };
            let neighbors = |(x, y, z): (u32, u32, i32)| {
                let mut out = Vec::new();
                if x > 0 {
                    out.push((x - 1, y, z));
                }
                if x < n {
                    out.push((x + 1, y, z));
                }
                if y > 0 {
                    out.push((x, y - 1, z));
                }
                if y < n {
                    out.push((x, y + 1, z));
                }
                if z > -h {
                    out.push((x, y, z - 1));
                }
                if z < h {
                    out.push((x, y, z + 1));
                }
                out
            };
            let mut best = 0usize;
            for j in 0..=2u32 {
                if !config.column(0, j) {
                    continue;
                }
                let start = (0u32, j, 0i32);
                let mut seen = std::collections::HashSet::from([start]);
                let mut queue = std::collections::VecDeque::from([start]);
                while let Some(v) = queue.pop_front() {
                    for w in neighbors(v) {
                        if !seen.contains(&w) && open(v, w) {
                            seen.insert(w);
                            queue.push_back(w);
                        }
                    }
                }
                best = best.max(seen.len());
            }
            assert_eq!(largest_cluster_touching(&config, 2), best);
        }
    }

    #[test]
    fn large_cluster_degenerate_probabilities() {
        let full = large_cluster_prob(1.0, 1.0, 1, 2, 8, 4, 100, &RngStream::new(6, 0)).unwrap();
        assert_eq!(full.mean, 1.0);
        let closed = large_cluster_prob(0.9, 0.0, 1, 2, 8, 4, 100, &RngStream::new(6, 1)).unwrap();
        assert_eq!(closed.mean, 0.0);
        assert_eq!(
            large_cluster_prob(0.9, 0.5, 2, 2, 8, 4, 10, &RngStream::new(6, 2)).unwrap_err(),
            Perc3dError::BoxTooSmall { n: 8, l: 2, k: 2 }
        );
    }

    #[test]
    fn spanning_threshold_is_infinite_without_base_crossing() {
        let mut rng = RngStream::new(7, 0);
        // rho = 0 never crosses the base.
        assert!(spanning_threshold(0.0, 4, 4, &mut rng).is_infinite());
    }

    #[test]
    fn same_column_vertical_edges_are_positively_correlated() {
        let stream = RngStream::new(8, 0);
        let trials = 40_000u64;
        let (mut both_same, mut both_diff, mut single) = (0u64, 0u64, 0u64);
        for rep in 0..trials {
            let mut rng = stream.substream(rep);
            let c = sample_dilute(0.7, 0.5, 2, 3, &mut rng);
            let levels_m1 = 6;
            let e_low = c.open_z[0]; // column (0,0), lowest edge
            let e_high = c.open_z[levels_m1 - 1]; // column (0,0), highest edge
            let f_other = c.open_z[4 * levels_m1]; // column (1,1)
            single += e_low as u64;
            both_same += (e_low && e_high) as u64;
            both_diff += (e_low && f_other) as u64;
        }
        let n = trials as f64;
        let p_single = single as f64 / n;
        let p_same = both_same as f64 / n;
        let p_diff = both_diff as f64 / n;
        // Same column: P(both) = p^2 rho > (p rho)^2; distinct columns are
        // independent.
        let se = (p_same * (1.0 - p_same) / n).sqrt();
        assert!(p_same > p_single * p_single + 4.0 * se, "no positive correlation");
        let expected = 0.5 * 0.5 * 0.7 * 0.7;
        let se_diff = (expected * (1.0 - expected) / n).sqrt();
        assert!((p_diff - expected).abs() < 4.0 * se_diff, "cross-column correlation");
    }

    #[test]
    fn spanning_curve_is_monotone_by_construction() {
        let stream = RngStream::new(9, 0);
        let thresholds: Vec<f64> = (0..200)
            .map(|rep| {
                let mut rng = stream.substream(rep);
                spanning_threshold(1.0, 6, 6, &mut rng)
            })
            .collect();
        let curve = ThresholdCurve::new(6, thresholds);
        let mut prev = 0.0;
        for i in 0..=100 {
            let v = curve.value_at(i as f64 / 100.0);
            assert!(v >= prev);
            prev = v;
        }
    }
}
