#![allow(dead_code)]

//! Shared oracles for the integration suites. Everything here is
//! independent of the library's exploration code paths: plain breadth-first
//! search, exhaustive path enumeration and geometric region floods.

use percolab::geom::{Point2, Rect, Side};
use percolab::site2d::Environment2D;
use std::collections::{HashSet, VecDeque};

/// Occupied nearest-neighbor reachability between two site sets inside a
/// rectangle.
pub fn bfs_crossing(env: &Environment2D, rect: &Rect, from: Side, to: Side) -> bool {
    let sources: Vec<Point2> =
        rect.side_sites(from).into_iter().filter(|&p| env.occupied(p)).collect();
    let targets: HashSet<Point2> =
        rect.side_sites(to).into_iter().filter(|&p| env.occupied(p)).collect();
    let mut seen: HashSet<Point2> = sources.iter().copied().collect();
    let mut queue: VecDeque<Point2> = sources.into();
    while let Some(v) = queue.pop_front() {
        if targets.contains(&v) {
            return true;
        }
        for w in v.neighbors() {
            if rect.contains(w) && env.occupied(w) && !seen.contains(&w) {
                seen.insert(w);
                queue.push_back(w);
            }
        }
    }
    false
}

/// The setting of one rectangle stage, as the oracle sees it.
pub struct StageSetting {
    pub rect: Rect,
    /// Previous-path sites (the wall).
    pub prev: HashSet<Point2>,
    /// Neighbors of the wall inside the rectangle.
    pub curtain: HashSet<Point2>,
    /// Local along-coordinate of the wall's landing on the bottom side;
    /// -1 when the wall sits outside (seed stage).
    pub a_end: i32,
}

impl StageSetting {
    pub fn new(rect: Rect, prev_sites: &[Point2]) -> StageSetting {
        let prev: HashSet<Point2> = prev_sites.iter().copied().collect();
        let mut curtain = HashSet::new();
        for p in rect.sites() {
            if !prev.contains(&p) && p.neighbors().iter().any(|q| prev.contains(q)) {
                curtain.insert(p);
            }
        }
        let a_end = prev_sites
            .iter()
            .filter(|&&p| rect.on_side(p, Side::Bottom))
            .map(|&p| rect.global_to_local(p).0)
            .max()
            .unwrap_or(-1);
        StageSetting { rect, prev, curtain, a_end }
    }
}

/// Every chordless occupied path from a curtain site to the right side that
/// touches the curtain exactly once and stays inside the rectangle off the
/// wall. Enumerated by depth-first extension with chord pruning.
pub fn enumerate_crossings(env: &Environment2D, setting: &StageSetting) -> Vec<Vec<Point2>> {
    let rect = setting.rect;
    let mut found = Vec::new();
    let starts: Vec<Point2> = setting
        .curtain
        .iter()
        .copied()
        .filter(|&p| env.occupied(p) && !rect.on_side(p, Side::Right))
        .collect();
    for &start in &starts {
        let mut path = vec![start];
        let mut on_path: HashSet<Point2> = HashSet::from([start]);
        extend(env, setting, &mut path, &mut on_path, &mut found);
    }
    found
}

fn extend(
    env: &Environment2D,
    setting: &StageSetting,
    path: &mut Vec<Point2>,
    on_path: &mut HashSet<Point2>,
    found: &mut Vec<Vec<Point2>>,
) {
    let cur = *path.last().unwrap();
    if setting.rect.on_side(cur, Side::Right) {
        found.push(path.clone());
        return;
    }
    for next in cur.neighbors() {
        if !setting.rect.contains(next)
            || !env.occupied(next)
            || on_path.contains(&next)
            || setting.prev.contains(&next)
            || setting.curtain.contains(&next)
        {
            continue;
        }
        // Chordless extension: the new vertex may touch only its
        // predecessor among the path so far.
        let chord = path[..path.len() - 1].iter().any(|&v| v.is_adjacent(next));
        if chord {
            continue;
        }
        path.push(next);
        on_path.insert(next);
        extend(env, setting, path, on_path, found);
        path.pop();
        on_path.remove(&next);
    }
}

/// The cut-off region of one candidate crossing: the crossing itself plus
/// everything reachable from the bottom side (past the wall's landing)
/// without touching the crossing, the wall or the curtain. Flood steps are
/// planar: nearest-neighbor moves, plus diagonal moves whenever the two
/// squeezed corner sites are not joined by a wall or crossing edge.
pub fn region_of(setting: &StageSetting, crossing: &[Point2]) -> HashSet<Point2> {
    let rect = setting.rect;
    let cross_set: HashSet<Point2> = crossing.iter().copied().collect();
    let blocked = |p: Point2| {
        cross_set.contains(&p) || setting.prev.contains(&p) || setting.curtain.contains(&p)
    };
    let curve_edge = |a: Point2, b: Point2| {
        let consecutive = |path: &[Point2]| {
            path.windows(2).any(|w| (w[0] == a && w[1] == b) || (w[0] == b && w[1] == a))
        };
        if consecutive(crossing) {
            return true;
        }
        // The wall is itself a path or a segment; adjacency within it is
        // consecutive because it is chordless.
        setting.prev.contains(&a) && setting.prev.contains(&b) && a.is_adjacent(b)
    };

    let mut region: HashSet<Point2> = cross_set.clone();
    let mut queue: VecDeque<Point2> = VecDeque::new();
    for a in (setting.a_end + 1)..=rect.long {
        let p = rect.local_to_global(a, 0);
        if !blocked(p) && region.insert(p) {
            queue.push_back(p);
        }
    }
    let mut flooded: HashSet<Point2> =
        queue.iter().copied().collect();
    while let Some(v) = queue.pop_front() {
        for dx in -1i32..=1 {
            for dy in -1i32..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let w = Point2::new(v.x + dx, v.y + dy);
                if !rect.contains(w) || blocked(w) || flooded.contains(&w) {
                    continue;
                }
                if dx != 0 && dy != 0 {
                    let c1 = Point2::new(v.x + dx, v.y);
                    let c2 = Point2::new(v.x, v.y + dy);
                    if curve_edge(c1, c2) {
                        continue;
                    }
                }
                flooded.insert(w);
                region.insert(w);
                queue.push_back(w);
            }
        }
    }
    region
}

/// Candidates whose region is not strictly contained in any other
/// candidate's region.
pub fn minimal_regions(
    setting: &StageSetting,
    candidates: &[Vec<Point2>],
) -> Vec<(Vec<Point2>, HashSet<Point2>)> {
    let with_regions: Vec<(Vec<Point2>, HashSet<Point2>)> = candidates
        .iter()
        .map(|c| (c.clone(), region_of(setting, c)))
        .collect();
    with_regions
        .iter()
        .filter(|(_, d)| {
            !with_regions.iter().any(|(_, other)| other.len() < d.len() && other.is_subset(d))
        })
        .cloned()
        .collect()
}
