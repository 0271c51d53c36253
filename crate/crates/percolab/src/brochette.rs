//! Inhomogeneous bond percolation on a truncated half-strip: vertical edges
//! in randomly chosen strong columns open with a boosted probability q,
//! every other edge with probability p. Strong columns are drawn with
//! density u except on a forbidden 2-spaced index set, where they are
//! suppressed.
//!
//! The strip is infinite in the vertical direction in principle; here it is
//! truncated to heights [-H, H] with free boundary, which is conservative
//! for connection events. Callers are expected to report results for at
//! least two heights to exhibit insensitivity.

use crate::dsu::DisjointSets;
use crate::rng::RngStream;
use crate::stats::Estimate;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BrochetteError {
    #[error("forbidden set is not 2-spaced or exceeds the column range")]
    ForbiddenSetInvalid,
    #[error("parameters must satisfy 0 <= p <= q <= 1, got p={p} q={q}")]
    BadParameters { p: f64, q: f64 },
}

/// Checks that all elements differ by at least two and fit in [0, n].
pub fn is_two_spaced(set: &[u32], n: u32) -> bool {
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    sorted.len() == set.len()
        && sorted.iter().all(|&i| i <= n)
        && sorted.windows(2).all(|w| w[1] - w[0] >= 2)
}

/// Strong-column plan on columns [0, n] with parameters for one strip
/// experiment.
#[derive(Clone, Debug)]
pub struct BrochetteSpec {
    pub n: u32,
    pub height: u32,
    pub xi: Vec<bool>,
    pub forbidden: Vec<u32>,
    pub p: f64,
    pub q: f64,
    pub u: f64,
}

impl BrochetteSpec {
    pub fn new(
        n: u32,
        height: u32,
        xi: Vec<bool>,
        forbidden: Vec<u32>,
        p: f64,
        q: f64,
        u: f64,
    ) -> Result<BrochetteSpec, BrochetteError> {
        if !(0.0..=1.0).contains(&p) || !(p..=1.0).contains(&q) {
            return Err(BrochetteError::BadParameters { p, q });
        }
        if !is_two_spaced(&forbidden, n) {
            return Err(BrochetteError::ForbiddenSetInvalid);
        }
        assert_eq!(xi.len(), n as usize + 1);
        assert!(
            forbidden.iter().all(|&i| !xi[i as usize]),
            "strong columns must vanish on the forbidden set"
        );
        Ok(BrochetteSpec { n, height, xi, forbidden, p, q, u })
    }
}

/// Draws the strong-column indicator: independent Bernoulli(u) off the
/// forbidden set, identically zero on it.
pub fn sample_xi(
    u: f64,
    forbidden: &[u32],
    n: u32,
    rng: &mut RngStream,
) -> Result<Vec<bool>, BrochetteError> {
    if !is_two_spaced(forbidden, n) {
        return Err(BrochetteError::ForbiddenSetInvalid);
    }
    let banned: std::collections::HashSet<u32> = forbidden.iter().copied().collect();
    Ok((0..=n).map(|i| !banned.contains(&i) && rng.random::<f64>() < u).collect())
}

/// One bond configuration on the truncated strip [0,n] x [-H,H].
#[derive(Clone, Debug)]
pub struct StripConfig {
    pub n: u32,
    pub height: u32,
    /// Vertical edges {(i,z),(i,z+1)}, index i * 2H + (z + H).
    pub vertical: Vec<bool>,
    /// Horizontal edges {(i,z),(i+1,z)}, index i * (2H+1) + (z + H).
    pub horizontal: Vec<bool>,
}

impl StripConfig {
    pub fn site_index(&self, i: u32, z: i32) -> usize {
        debug_assert!(i <= self.n && z.unsigned_abs() <= self.height);
        i as usize * (2 * self.height as usize + 1) + (z + self.height as i32) as usize
    }

    pub fn site_count(&self) -> usize {
        (self.n as usize + 1) * (2 * self.height as usize + 1)
    }
}

/// Per-edge and per-column uniform marks, so that one draw can be reused
/// across a whole parameter grid: raising p, q or u only opens more.
#[derive(Clone, Debug)]
pub struct StripUniforms {
    pub n: u32,
    pub height: u32,
    pub columns: Vec<f64>,
    pub vertical: Vec<f64>,
    pub horizontal: Vec<f64>,
}

impl StripUniforms {
    pub fn sample(n: u32, height: u32, rng: &mut RngStream) -> StripUniforms {
        let h2 = 2 * height as usize;
        let columns = (0..=n as usize).map(|_| rng.random()).collect();
        let vertical = (0..(n as usize + 1) * h2).map(|_| rng.random()).collect();
        let horizontal = (0..n as usize * (h2 + 1)).map(|_| rng.random()).collect();
        StripUniforms { n, height, columns, vertical, horizontal }
    }

    /// Strong-column indicator at density `u` off the forbidden set.
    pub fn realize_xi(&self, u: f64, forbidden: &[u32]) -> Vec<bool> {
        let banned: std::collections::HashSet<u32> = forbidden.iter().copied().collect();
        (0..=self.n)
            .map(|i| !banned.contains(&i) && self.columns[i as usize] < u)
            .collect()
    }

    /// Edge configuration given the strong-column indicator.
    pub fn realize_edges(&self, xi: &[bool], p: f64, q: f64) -> StripConfig {
        let h2 = 2 * self.height as usize;
        let vertical = self
            .vertical
            .iter()
            .enumerate()
            .map(|(e, &mark)| {
                let col = e / h2;
                mark < if xi[col] { q } else { p }
            })
            .collect();
        let horizontal = self.horizontal.iter().map(|&mark| mark < p).collect();
        StripConfig { n: self.n, height: self.height, vertical, horizontal }
    }
}

/// Independent edges: verticals in strong columns at q, everything else at p.
pub fn sample_brochette(spec: &BrochetteSpec, rng: &mut RngStream) -> StripConfig {
    let uniforms = StripUniforms::sample(spec.n, spec.height, rng);
    uniforms.realize_edges(&spec.xi, spec.p, spec.q)
}

/// Whether the origin is joined to the far column inside the truncated
/// strip by an open path.
pub fn strip_crossing(config: &StripConfig) -> bool {
    if config.n == 0 {
        return true;
    }
    let sites = config.site_count();
    let target = sites;
    let mut ds = DisjointSets::new(sites + 1);
    let h = config.height as i32;
    let h2 = 2 * config.height as usize;
    for i in 0..=config.n {
        for z in -h..h {
            if config.vertical[i as usize * h2 + (z + h) as usize] {
                ds.union(config.site_index(i, z), config.site_index(i, z + 1));
            }
        }
    }
    for i in 0..config.n {
        for z in -h..=h {
            if config.horizontal[i as usize * (h2 + 1) + (z + h) as usize] {
                ds.union(config.site_index(i, z), config.site_index(i + 1, z));
            }
        }
    }
    for z in -h..=h {
        ds.union(target, config.site_index(config.n, z));
    }
    ds.connected(config.site_index(0, 0), target)
}

/// Monte Carlo frequency of the origin-to-far-column crossing under
/// strong columns drawn with density u off the forbidden set.
#[allow(clippy::too_many_arguments)]
pub fn estimate_strip_crossing(
    u: f64,
    forbidden: &[u32],
    p: f64,
    q: f64,
    n: u32,
    height: u32,
    n_samples: u64,
    stream: &RngStream,
) -> Result<Estimate, BrochetteError> {
    if !(0.0..=1.0).contains(&p) || !(p..=1.0).contains(&q) {
        return Err(BrochetteError::BadParameters { p, q });
    }
    if !is_two_spaced(forbidden, n) {
        return Err(BrochetteError::ForbiddenSetInvalid);
    }
    let hits: u64 = (0..n_samples)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream.substream(rep);
            let uniforms = StripUniforms::sample(n, height, &mut rng);
            let xi = uniforms.realize_xi(u, forbidden);
            let config = uniforms.realize_edges(&xi, p, q);
            strip_crossing(&config) as u64
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(Estimate::from_counts(hits, n_samples))
}

/// Homogeneous planar sanity check: left-right open crossing of the square
/// [0,n] x [0,n] under Bernoulli(p) bond percolation.
pub fn estimate_square_crossing_bond(
    p: f64,
    n: u32,
    n_samples: u64,
    stream: &RngStream,
) -> Estimate {
    let hits: u64 = (0..n_samples)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream.substream(rep);
            square_crossing_bond(p, n, &mut rng) as u64
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Estimate::from_counts(hits, n_samples)
}

fn square_crossing_bond(p: f64, n: u32, rng: &mut RngStream) -> bool {
    let cols = n as usize + 1;
    let sites = cols * cols;
    let source = sites;
    let sink = sites + 1;
    let mut ds = DisjointSets::new(sites + 2);
    let idx = |x: usize, y: usize| y * cols + x;
    // Horizontal then vertical edges, row-major draw order.
    for y in 0..cols {
        for x in 0..cols - 1 {
            if rng.random::<f64>() < p {
                ds.union(idx(x, y), idx(x + 1, y));
            }
        }
    }
    for y in 0..cols - 1 {
        for x in 0..cols {
            if rng.random::<f64>() < p {
                ds.union(idx(x, y), idx(x, y + 1));
            }
        }
    }
    for y in 0..cols {
        ds.union(source, idx(0, y));
        ds.union(sink, idx(cols - 1, y));
    }
    ds.connected(source, sink)
}
