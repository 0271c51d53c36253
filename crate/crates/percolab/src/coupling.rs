//! Joint construction linking bond percolation over a decorated path to an
//! inhomogeneous strip.
//!
//! Each unit thread hanging off the path is split into four quarter threads,
//! colored blue independently with probability u; a thread is occupied when
//! any quarter is blue, and each path index off the gap set owns one quarter
//! of its thread injectively. Vertical edges over occupied threads split
//! into four parallel quarter-edge copies colored green with probability r;
//! horizontal edges into occupied threads split into two half-edge copies
//! colored red with probability s. The strip configuration reads off the
//! base path edges directly, and boosts a strong column's vertical edge by a
//! handle-shaped detour: the designated bottom and top half-edge copies red
//! and the designated quarter-edge copy green. The derived parameters are
//!
//! ```text
//! u = 1 - (1-rho)^(1/4)
//! s = 1 - (1-p)^(1/2)
//! r = 1 - (1-p)^(1/4)
//! q = p + (1-p) * s^2 * r
//! ```
//!
//! so an occupied thread has marginal rho, every edge of the 3d structure
//! has marginal p, and a strong vertical strip edge has marginal exactly q.
//! Every detour consumes its own flags: the upper half-edge copy at the
//! lower height, the lower copy at the upper height, and the quarter-edge
//! copy indexed by the assigned quarter, so distinct strip edges never share
//! randomness.

use crate::brochette::StripConfig;
use crate::dsu::DisjointSets;
use crate::geom::Point2;
use crate::rng::RngStream;
use crate::spiral::DecoratedPath;
use crate::stats::Estimate;
use rand::Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CouplingError {
    #[error("thread {thread} serves {served} path sites; a unit thread has only 4 quarters")]
    AssignmentImpossible { thread: Point2, served: usize },
}

/// Derived coupling parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingParams {
    pub rho: f64,
    pub p: f64,
    pub u: f64,
    pub s: f64,
    pub r: f64,
    pub q: f64,
}

/// Evaluates the closed forms; valid for rho, p in [0, 1].
pub fn params(rho: f64, p: f64) -> CouplingParams {
    assert!((0.0..=1.0).contains(&rho) && (0.0..=1.0).contains(&p));
    let u = 1.0 - (1.0 - rho).powf(0.25);
    let s = 1.0 - (1.0 - p).sqrt();
    let r = 1.0 - (1.0 - p).powf(0.25);
    let q = p + (1.0 - p) * s * s * r;
    CouplingParams { rho, p, u, s, r, q }
}

/// The strong-column surplus at the self-dual point: q(1/2) = 1/2 + 2 eps.
pub fn epsilon() -> f64 {
    let s = 1.0 - 0.5f64.sqrt();
    let r = 1.0 - 0.5f64.powf(0.25);
    s * s * r / 4.0
}

/// Largest offset d such that q(1/2 - d) still clears 1/2 + eps, found by
/// bisection on the strictly increasing map p -> q(p).
pub fn solve_delta_prime() -> f64 {
    let eps = epsilon();
    let target = 0.5 + eps;
    let mut lo = 0.0f64;
    let mut hi = 0.5f64;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if params(0.0, 0.5 - mid).q >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// A node of the decorated structure: a path vertex by index or a thread
/// site by its position in the sorted thread list.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Node {
    Path(usize),
    Thread(usize),
}

/// Static description of one decorated path as a coupling substrate: the
/// distinct threads, the injective quarter assignment and every lattice
/// adjacency whose edges exist in the 3d structure.
#[derive(Clone, Debug)]
pub struct CouplingTopology {
    pub vertices: Vec<Point2>,
    pub gaps: Vec<usize>,
    pub threads: Vec<Point2>,
    /// Per path index: the thread it is assigned to and its quarter.
    pub assignment: Vec<Option<(usize, u8)>>,
    /// Horizontal adjacencies with at least one thread endpoint.
    pub pairs: Vec<(Node, usize)>,
    /// Per path index: position in `pairs` of the edge to its assigned
    /// thread.
    pub pair_of_index: Vec<Option<usize>>,
}

impl CouplingTopology {
    pub fn new(decorated: &DecoratedPath) -> Result<CouplingTopology, CouplingError> {
        let vertices = decorated.path.vertices().to_vec();
        let threads = decorated.thread_sites();
        let thread_index: BTreeMap<Point2, usize> =
            threads.iter().enumerate().map(|(t, &y)| (y, t)).collect();
        let vertex_index: std::collections::HashMap<Point2, usize> =
            vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();

        // Quarters of one thread go to its served indices in increasing
        // order.
        let mut served: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (&i, &y) in &decorated.threads {
            served.entry(thread_index[&y]).or_default().push(i);
        }
        let mut assignment = vec![None; vertices.len()];
        for (t, indices) in &served {
            if indices.len() > 4 {
                return Err(CouplingError::AssignmentImpossible {
                    thread: threads[*t],
                    served: indices.len(),
                });
            }
            for (quarter, &i) in indices.iter().enumerate() {
                assignment[i] = Some((*t, quarter as u8));
            }
        }

        let mut pairs = Vec::new();
        for (t, &y) in threads.iter().enumerate() {
            for q in y.neighbors() {
                if let Some(&i) = vertex_index.get(&q) {
                    pairs.push((Node::Path(i), t));
                } else if let Some(&t2) = thread_index.get(&q) {
                    if t2 > t {
                        pairs.push((Node::Thread(t2), t));
                    }
                }
            }
        }
        let pair_of_index: Vec<Option<usize>> = assignment
            .iter()
            .enumerate()
            .map(|(i, a)| {
                a.map(|(t, _)| {
                    pairs
                        .iter()
                        .position(|&(node, tt)| node == Node::Path(i) && tt == t)
                        .expect("assigned thread is adjacent to its path vertex")
                })
            })
            .collect();

        Ok(CouplingTopology {
            vertices,
            gaps: decorated.gaps.clone(),
            threads,
            assignment,
            pairs,
            pair_of_index,
        })
    }

    pub fn path_len(&self) -> usize {
        self.vertices.len()
    }

    /// Strip column count: columns [0, n] with n the number of path edges.
    pub fn strip_n(&self) -> u32 {
        (self.vertices.len() - 1) as u32
    }
}

/// The quarter assigned to every index off the gap set. Injective by
/// construction; a thread serving more than four sites is an upstream bug.
pub fn assign_quarters(
    decorated: &DecoratedPath,
) -> Result<BTreeMap<usize, (Point2, u8)>, CouplingError> {
    let topo = CouplingTopology::new(decorated)?;
    Ok(topo
        .assignment
        .iter()
        .enumerate()
        .filter_map(|(i, a)| a.map(|(t, c)| (i, (topo.threads[t], c))))
        .collect())
}

/// One joint realization of all colorings with both induced configurations.
#[derive(Clone, Debug)]
pub struct CoupledSample {
    pub height: u32,
    /// Per thread, the four quarter-thread colors.
    pub blue: Vec<[bool; 4]>,
    /// Thread occupancy: any quarter blue.
    pub lambda_threads: Vec<bool>,
    /// Strong-column indicator on the strip, zero on the gap set.
    pub xi: Vec<bool>,
    /// Base vertical path edges [index][z + H], z in [-H, H).
    pub vert_path: Vec<Vec<bool>>,
    /// Base horizontal path edges [index][z + H], z in [-H, H].
    pub horiz_path: Vec<Vec<bool>>,
    /// Green quarter-edge copies [thread][quarter][z + H].
    pub green: Vec<[Vec<bool>; 4]>,
    /// Red half-edge copies [pair][copy][z + H]; copy 0 lower, copy 1 upper.
    pub red: Vec<[Vec<bool>; 2]>,
    /// Derived 3d bond configuration over the decorated structure.
    pub three_d: ThreeDConfig,
    /// Derived strip configuration on columns [0, n].
    pub strip: StripConfig,
}

/// Bond configuration over (path + threads) x [-H, H].
#[derive(Clone, Debug)]
pub struct ThreeDConfig {
    pub n_path: usize,
    pub n_threads: usize,
    pub height: u32,
    /// Vertical edges per node (path nodes first, then threads).
    pub vert: Vec<Vec<bool>>,
    /// Horizontal edges between consecutive path vertices.
    pub horiz_path: Vec<Vec<bool>>,
    /// Horizontal edges for thread adjacencies, aligned with the topology's
    /// pair list.
    pub pair_open: Vec<Vec<bool>>,
    pairs: Vec<(Node, usize)>,
}

impl ThreeDConfig {
    fn node_count(&self) -> usize {
        self.n_path + self.n_threads
    }

    fn site(&self, node: usize, z: i32) -> usize {
        node * (2 * self.height as usize + 1) + (z + self.height as i32) as usize
    }

    fn node_id(&self, node: Node) -> usize {
        match node {
            Node::Path(i) => i,
            Node::Thread(t) => self.n_path + t,
        }
    }

    /// Whether (v_0, 0) connects to the fiber over the last path vertex.
    pub fn spans(&self) -> bool {
        let h = self.height as i32;
        let sites = self.node_count() * (2 * self.height as usize + 1);
        let target = sites;
        let mut ds = DisjointSets::new(sites + 1);
        for (node, col) in self.vert.iter().enumerate() {
            for (zi, &open) in col.iter().enumerate() {
                if open {
                    let z = zi as i32 - h;
                    ds.union(self.site(node, z), self.site(node, z + 1));
                }
            }
        }
        for (i, col) in self.horiz_path.iter().enumerate() {
            for (zi, &open) in col.iter().enumerate() {
                if open {
                    let z = zi as i32 - h;
                    ds.union(self.site(i, z), self.site(i + 1, z));
                }
            }
        }
        for (pair_idx, col) in self.pair_open.iter().enumerate() {
            let (a, t) = self.pairs[pair_idx];
            let (na, nb) = (self.node_id(a), self.n_path + t);
            for (zi, &open) in col.iter().enumerate() {
                if open {
                    let z = zi as i32 - h;
                    ds.union(self.site(na, z), self.site(nb, z));
                }
            }
        }
        for z in -h..=h {
            ds.union(target, self.site(self.n_path - 1, z));
        }
        ds.connected(self.site(0, 0), target)
    }
}

/// Draws every coloring and assembles both induced configurations.
pub fn sample_coupled(
    topo: &CouplingTopology,
    rho: f64,
    p: f64,
    height: u32,
    rng: &mut RngStream,
) -> CoupledSample {
    let pr = params(rho, p);
    let n_vert = topo.path_len();
    let n_threads = topo.threads.len();
    let h2 = 2 * height as usize;

    // Draw order is fixed: blue, base verticals, base horizontals, green,
    // red.
    let blue: Vec<[bool; 4]> =
        (0..n_threads).map(|_| std::array::from_fn(|_| rng.random::<f64>() < pr.u)).collect();
    let vert_path: Vec<Vec<bool>> =
        (0..n_vert).map(|_| (0..h2).map(|_| rng.random::<f64>() < p).collect()).collect();
    let horiz_path: Vec<Vec<bool>> =
        (0..n_vert - 1).map(|_| (0..=h2).map(|_| rng.random::<f64>() < p).collect()).collect();
    let green: Vec<[Vec<bool>; 4]> = (0..n_threads)
        .map(|_| std::array::from_fn(|_| (0..h2).map(|_| rng.random::<f64>() < pr.r).collect()))
        .collect();
    let red: Vec<[Vec<bool>; 2]> = (0..topo.pairs.len())
        .map(|_| std::array::from_fn(|_| (0..=h2).map(|_| rng.random::<f64>() < pr.s).collect()))
        .collect();

    let lambda_threads: Vec<bool> = blue.iter().map(|b| b.iter().any(|&x| x)).collect();
    let xi: Vec<bool> = topo
        .assignment
        .iter()
        .map(|a| match a {
            Some((t, c)) => blue[*t][*c as usize],
            None => false,
        })
        .collect();

    // 3d configuration: thread edges exist only over occupied threads; a
    // vertical thread edge is open when any quarter copy is green, a
    // horizontal edge into a thread when any half copy is red.
    let mut vert: Vec<Vec<bool>> = vert_path.clone();
    for t in 0..n_threads {
        let col: Vec<bool> =
            (0..h2).map(|zi| lambda_threads[t] && (0..4).any(|c| green[t][c][zi])).collect();
        vert.push(col);
    }
    let pair_open: Vec<Vec<bool>> = topo
        .pairs
        .iter()
        .enumerate()
        .map(|(e, &(a, t))| {
            let exists = lambda_threads[t]
                && match a {
                    Node::Path(_) => true,
                    Node::Thread(t2) => lambda_threads[t2],
                };
            (0..=h2).map(|zi| exists && (red[e][0][zi] || red[e][1][zi])).collect()
        })
        .collect();
    let three_d = ThreeDConfig {
        n_path: n_vert,
        n_threads,
        height,
        vert,
        horiz_path: horiz_path.clone(),
        pair_open,
        pairs: topo.pairs.clone(),
    };

    // Strip configuration: horizontals copy the base path edges; verticals
    // copy the base edge on weak columns and add the handle detour on
    // strong ones.
    let n_strip = topo.strip_n();
    let mut strip_vertical = vec![false; (n_strip as usize + 1) * h2];
    for i in 0..=n_strip as usize {
        for zi in 0..h2 {
            let base = vert_path[i][zi];
            let open = if xi[i] {
                let (t, c) = topo.assignment[i].expect("strong column has a thread");
                let pair = topo.pair_of_index[i].expect("strong column has a pair edge");
                // Detour for the edge {z, z+1}: upper half copy at z, lower
                // half copy at z+1, designated quarter copy.
                let bottom_red = red[pair][1][zi];
                let top_red = red[pair][0][zi + 1];
                let quarter_green = green[t][c as usize][zi];
                base || (bottom_red && top_red && quarter_green)
            } else {
                base
            };
            strip_vertical[i * h2 + zi] = open;
        }
    }
    let strip_horizontal: Vec<bool> =
        horiz_path.iter().flat_map(|col| col.iter().copied()).collect();
    let strip =
        StripConfig { n: n_strip, height, vertical: strip_vertical, horizontal: strip_horizontal };

    CoupledSample {
        height,
        blue,
        lambda_threads,
        xi,
        vert_path,
        horiz_path,
        green,
        red,
        three_d,
        strip,
    }
}

/// The domination oracle: if the strip crossing occurs, the 3d connection
/// must occur as well. Any `false` is a construction bug.
pub fn verify_domination(sample: &CoupledSample) -> bool {
    !crate::brochette::strip_crossing(&sample.strip) || sample.three_d.spans()
}

/// Edge-level version of the domination check: every open strip edge must
/// lift to an open 3d connection between the fibers of its endpoints.
/// Returns the number of violations.
pub fn edge_lift_violations(topo: &CouplingTopology, sample: &CoupledSample) -> usize {
    let h2 = 2 * sample.height as usize;
    let mut violations = 0;
    for i in 0..=sample.strip.n as usize {
        for zi in 0..h2 {
            if !sample.strip.vertical[i * h2 + zi] {
                continue;
            }
            let direct = sample.vert_path[i][zi];
            let detour = if sample.xi[i] {
                let (t, _) = topo.assignment[i].expect("strong column has a thread");
                let pair = topo.pair_of_index[i].expect("strong column has a pair edge");
                sample.lambda_threads[t]
                    && sample.three_d.pair_open[pair][zi]
                    && sample.three_d.vert[sample.three_d.n_path + t][zi]
                    && sample.three_d.pair_open[pair][zi + 1]
            } else {
                false
            };
            if !(direct || detour) {
                violations += 1;
            }
        }
    }
    for i in 0..sample.strip.n as usize {
        for zi in 0..=h2 {
            if sample.strip.horizontal[i * (h2 + 1) + zi] && !sample.horiz_path[i][zi] {
                violations += 1;
            }
        }
    }
    violations
}

/// Exact law of one strong-column vertical strip edge: exhaustively
/// enumerates the nine binary flags of its gadget (base edge, two half-edge
/// copies at each height, four quarter-edge copies) and adds up the
/// probability that the edge opens. Must reproduce the closed form q(p).
pub fn gadget_exact(p: f64) -> f64 {
    let pr = params(0.0, p);
    // Flag layout: bit 0 base; bits 1-2 lower-height copies (bit 2 the
    // designated upper copy); bits 3-4 upper-height copies (bit 3 the
    // designated lower copy); bits 5-8 quarter copies (bit 5 designated).
    let probs: [f64; 9] = [p, pr.s, pr.s, pr.s, pr.s, pr.r, pr.r, pr.r, pr.r];
    let mut total = 0.0;
    for mask in 0u32..512 {
        let mut weight = 1.0;
        for (bit, &prob) in probs.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                weight *= prob;
            } else {
                weight *= 1.0 - prob;
            }
        }
        let base = mask & 1 != 0;
        let detour = mask >> 2 & 1 != 0 && mask >> 3 & 1 != 0 && mask >> 5 & 1 != 0;
        if base || detour {
            total += weight;
        }
    }
    total
}

/// Direct conditional sampler: thread occupancies fresh at rho, every
/// existing edge independently at p, then the 3d connection event. This is
/// the independent route against which the coupled construction is
/// compared; it never touches the coloring machinery.
pub fn sample_direct_conditional(
    topo: &CouplingTopology,
    rho: f64,
    p: f64,
    height: u32,
    rng: &mut RngStream,
) -> bool {
    let h2 = 2 * height as usize;
    let n_vert = topo.path_len();
    let occupied: Vec<bool> = (0..topo.threads.len()).map(|_| rng.random::<f64>() < rho).collect();
    let mut vert: Vec<Vec<bool>> =
        (0..n_vert).map(|_| (0..h2).map(|_| rng.random::<f64>() < p).collect()).collect();
    for &occ in &occupied {
        vert.push((0..h2).map(|_| occ && rng.random::<f64>() < p).collect());
    }
    let horiz_path: Vec<Vec<bool>> =
        (0..n_vert - 1).map(|_| (0..=h2).map(|_| rng.random::<f64>() < p).collect()).collect();
    let pair_open: Vec<Vec<bool>> = topo
        .pairs
        .iter()
        .map(|&(a, t)| {
            let exists = occupied[t]
                && match a {
                    Node::Path(_) => true,
                    Node::Thread(t2) => occupied[t2],
                };
            (0..=h2).map(|_| exists && rng.random::<f64>() < p).collect()
        })
        .collect();
    ThreeDConfig {
        n_path: n_vert,
        n_threads: topo.threads.len(),
        height,
        vert,
        horiz_path,
        pair_open,
        pairs: topo.pairs.clone(),
    }
    .spans()
}

/// Two-sided Monte Carlo comparison of the conditional connection
/// probability over the decorated structure against the strip crossing
/// probability with the derived parameters.
#[derive(Clone, Debug)]
pub struct InequalityReport {
    pub rho: f64,
    pub p: f64,
    pub u: f64,
    pub q: f64,
    pub lhs: Estimate,
    pub rhs: Estimate,
    /// True when the decorated side is significantly below the strip side,
    /// which the coupling forbids.
    pub reversal: bool,
}

pub fn conditional_inequality_estimate(
    decorated: &DecoratedPath,
    rho: f64,
    p: f64,
    height: u32,
    n_samples: u64,
    stream: &RngStream,
) -> Result<InequalityReport, CouplingError> {
    let topo = CouplingTopology::new(decorated)?;
    let pr = params(rho, p);
    let lhs_hits: u64 = (0..n_samples)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream.substream(rep);
            sample_direct_conditional(&topo, rho, p, height, &mut rng) as u64
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let lhs = Estimate::from_counts(lhs_hits, n_samples);

    let forbidden: Vec<u32> = topo.gaps.iter().map(|&i| i as u32).collect();
    let rhs = crate::brochette::estimate_strip_crossing(
        pr.u,
        &forbidden,
        p,
        pr.q,
        topo.strip_n(),
        height,
        n_samples,
        &stream.substream(u64::MAX / 2),
    )
    .expect("gap set of a decorated path is 2-spaced");

    let reversal = lhs.upper() < rhs.lower();
    Ok(InequalityReport { rho, p, u: pr.u, q: pr.q, lhs, rhs, reversal })
}
