//! Exhaustive and randomized oracles for the crossing and exploration code:
//! reachability against breadth-first search, lowest crossings against full
//! enumeration with region-inclusion comparison, and the measurability of
//! the exploration outcome with respect to the sites it examined.

mod common;

use common::{bfs_crossing, enumerate_crossings, minimal_regions, region_of, StageSetting};
use percolab::geom::{Point2, Rect, Side};
use percolab::rng::RngStream;
use percolab::site2d::{has_crossing, CrossingQuery, Environment2D};
use percolab::spiral::{delta_k, lowest_crossing, phi_k, PrevPath, SpiralPlan, ThreadRule};
use rand::Rng;

/// All 2^10 environments of the 5 x 2 rectangle.
fn micro_environments() -> impl Iterator<Item = Environment2D> {
    let plan = SpiralPlan::new(1, 1);
    let rect = plan.rect(1);
    let sites: Vec<Point2> = rect.sites().collect();
    let window = plan.window();
    (0u32..1 << sites.len()).map(move |mask| {
        let mut env = Environment2D::vacant(window, 0.5);
        for (b, &p) in sites.iter().enumerate() {
            if mask >> b & 1 == 1 {
                env.set_occupied(p, true);
            }
        }
        env
    })
}

#[test]
fn crossing_detector_agrees_with_path_enumeration_exhaustively() {
    let rect = Rect::axis_aligned(Point2::new(0, 0), 4, 1);
    for env in micro_environments() {
        let hard = has_crossing(&env, &CrossingQuery::hard(rect)).unwrap();
        assert_eq!(hard, bfs_crossing(&env, &rect, Side::Left, Side::Right));
        let easy = has_crossing(&env, &CrossingQuery::easy(rect)).unwrap();
        assert_eq!(easy, bfs_crossing(&env, &rect, Side::Bottom, Side::Top));
    }
}

#[test]
fn first_stage_event_is_exactly_the_hard_crossing() {
    let plan = SpiralPlan::new(1, 1);
    let rect = plan.rect(1);
    for env in micro_environments() {
        let hard = has_crossing(&env, &CrossingQuery::hard(rect)).unwrap();
        let stage = lowest_crossing(&env, &plan, 1, PrevPath::Seed).unwrap();
        assert_eq!(hard, stage.is_some(), "event mismatch");
    }
}

#[test]
fn first_stage_crossing_is_region_minimal_exhaustively() {
    let plan = SpiralPlan::new(1, 1);
    let rect = plan.rect(1);
    let setting = StageSetting::new(rect, &plan.seed_sites());
    for env in micro_environments() {
        let candidates = enumerate_crossings(&env, &setting);
        let stage = lowest_crossing(&env, &plan, 1, PrevPath::Seed).unwrap();
        match stage {
            None => assert!(candidates.is_empty(), "missed a crossing"),
            Some(outcome) => {
                let got = outcome.crossing.vertices().to_vec();
                assert!(candidates.contains(&got), "not a valid candidate: {got:?}");
                let got_region = region_of(&setting, &got);
                for cand in &candidates {
                    let region = region_of(&setting, cand);
                    assert!(
                        !(region.len() < got_region.len() && region.is_subset(&got_region)),
                        "strictly lower candidate exists: {cand:?} under {got:?}"
                    );
                }
                // The exploration's answer is one of the inclusion-minimal
                // candidates.
                let minima = minimal_regions(&setting, &candidates);
                assert!(
                    minima.iter().any(|(c, _)| *c == got),
                    "answer not among the minimal candidates"
                );
            }
        }
    }
}

#[test]
fn second_stage_crossing_is_region_minimal_on_random_environments() {
    let plan = SpiralPlan::new(1, 2);
    let stream = RngStream::new(2024, 11);
    let mut checked = 0;
    for rep in 0..600u64 {
        let mut rng = stream.substream(rep);
        let rho = [0.55, 0.7, 0.85][(rep % 3) as usize];
        let env = Environment2D::sample(plan.window(), rho, &mut rng);
        let Some(delta1) = delta_k(&env, &plan, 1) else { continue };
        let gamma1 = &delta1.crossings[0];
        let setting = StageSetting::new(plan.rect(2), gamma1.vertices());
        let candidates = enumerate_crossings(&env, &setting);
        let stage = lowest_crossing(&env, &plan, 2, PrevPath::Path(gamma1)).unwrap();
        match stage {
            None => assert!(candidates.is_empty(), "missed a stage-2 crossing"),
            Some(outcome) => {
                checked += 1;
                let got = outcome.crossing.vertices().to_vec();
                assert!(candidates.contains(&got), "stage-2 answer not a candidate");
                let got_region = region_of(&setting, &got);
                for cand in &candidates {
                    let region = region_of(&setting, cand);
                    assert!(
                        !(region.len() < got_region.len() && region.is_subset(&got_region)),
                        "strictly lower stage-2 candidate exists"
                    );
                }
            }
        }
    }
    assert!(checked > 100, "only {checked} realized second stages");
}

#[test]
fn crossing_is_monotone_in_added_sites() {
    let rect = Rect::axis_aligned(Point2::new(0, 0), 10, 3);
    let stream = RngStream::new(5, 5);
    for rep in 0..200u64 {
        let mut rng = stream.substream(rep);
        let mut env = Environment2D::sample(rect.bounds(), 0.55, &mut rng);
        let before = has_crossing(&env, &CrossingQuery::hard(rect)).unwrap();
        // Flip a handful of vacant sites to occupied.
        let vacant: Vec<Point2> = rect.sites().filter(|&p| !env.occupied(p)).collect();
        for _ in 0..5 {
            if vacant.is_empty() {
                break;
            }
            let p = vacant[rng.random_range(0..vacant.len())];
            env.set_occupied(p, true);
        }
        let after = has_crossing(&env, &CrossingQuery::hard(rect)).unwrap();
        assert!(!before || after, "adding occupied sites destroyed a crossing");
    }
}

#[test]
fn outcome_depends_only_on_the_explored_region() {
    // Re-randomizing every site outside the explored region never changes
    // the realized crossing sequence, the region itself, or the decoration.
    let cases = [(1u32, 2u32, 0.8f64), (2, 2, 0.75), (1, 3, 0.8)];
    let stream = RngStream::new(99, 1);
    let mut verified = 0;
    for (case, &(l, k, rho)) in cases.iter().enumerate() {
        let plan = SpiralPlan::new(l, k);
        for rep in 0..120u64 {
            let mut rng = stream.substream(case as u64 * 1000 + rep);
            let env = Environment2D::sample(plan.window(), rho, &mut rng);
            let Ok(decorated) = phi_k(&env, &plan, k) else { continue };
            verified += 1;

            let mut scrambled = env.clone();
            for p in plan.window().sites() {
                if !decorated.explored.contains(p) {
                    scrambled.set_occupied(p, rng.random::<f64>() < 0.5);
                }
            }
            let again = phi_k(&scrambled, &plan, k).expect("event must persist");
            assert_eq!(again.path, decorated.path);
            assert_eq!(again.gaps, decorated.gaps);
            assert_eq!(again.threads, decorated.threads);
            let a: Vec<Point2> = decorated.explored.sites().collect();
            let b: Vec<Point2> = again.explored.sites().collect();
            assert_eq!(a, b, "explored region changed");
        }
    }
    assert!(verified > 120, "only {verified} decorated samples");
}

#[test]
fn stale_rule_reuses_explored_sites() {
    let plan = SpiralPlan::new(1, 2);
    let stream = RngStream::new(7, 7);
    let mut stale_hits = 0;
    for rep in 0..200u64 {
        let mut rng = stream.substream(rep);
        let env = Environment2D::sample(plan.window(), 0.8, &mut rng);
        let Some(delta) = delta_k(&env, &plan, 2) else { continue };
        let fresh = percolab::spiral::decorate(&delta, &plan, ThreadRule::Fresh);
        let stale = percolab::spiral::decorate(&delta, &plan, ThreadRule::Stale);
        for y in fresh.thread_sites() {
            assert!(!fresh.explored.contains(y), "fresh thread inside the explored region");
        }
        stale_hits += stale
            .thread_sites()
            .iter()
            .filter(|&&y| stale.explored.contains(y))
            .count();
    }
    assert!(stale_hits > 50, "stale harness produced too few explored threads: {stale_hits}");
}
