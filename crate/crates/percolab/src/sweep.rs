//! Threshold sweeps and finite-size intersection estimates.
//!
//! A sweep attaches one uniform mark per element and records, per replica,
//! the smallest parameter at which the monitored connection event appears.
//! The empirical curve of one system size is then the distribution function
//! of those thresholds, and a critical point is estimated by intersecting
//! the curves of successive sizes.

use crate::stats::mean_ci;

/// Sorted per-replica thresholds of one system size. A value above 1
/// (infinity) means the event never occurs in that replica.
#[derive(Clone, Debug)]
pub struct ThresholdCurve {
    pub size: u32,
    pub thresholds: Vec<f64>,
}

impl ThresholdCurve {
    pub fn new(size: u32, mut thresholds: Vec<f64>) -> ThresholdCurve {
        thresholds.sort_by(f64::total_cmp);
        ThresholdCurve { size, thresholds }
    }

    /// Fraction of replicas whose event appears by parameter `x`.
    pub fn value_at(&self, x: f64) -> f64 {
        let k = self.thresholds.partition_point(|&t| t <= x);
        k as f64 / self.thresholds.len() as f64
    }

    /// Fraction of replicas where the event occurs at all.
    pub fn terminal_fraction(&self) -> f64 {
        self.value_at(1.0)
    }
}

/// Crossing point of two curves: the sign change of their difference whose
/// mean height is closest to one half. Zero plateaus between opposite signs
/// count as crossings; flat stretches where both curves sit at 0 or 1 do
/// not. `None` when the difference never changes sign.
pub fn intersect(small: &ThresholdCurve, large: &ThresholdCurve) -> Option<f64> {
    let step = 1e-3;
    let mut best: Option<(f64, f64)> = None;
    let mut last_nonzero: Option<(f64, f64)> = None;
    for i in 0..=1000 {
        let x = i as f64 * step;
        let d = small.value_at(x) - large.value_at(x);
        if d == 0.0 {
            continue;
        }
        if let Some((lx, ld)) = last_nonzero {
            if ld.signum() != d.signum() {
                let cross = lx + (x - lx) * ld.abs() / (ld.abs() + d.abs());
                let height = (small.value_at(cross) + large.value_at(cross)) / 2.0;
                let score = (height - 0.5).abs();
                if best.is_none_or(|(s, _)| score < s) {
                    best = Some((score, cross));
                }
            }
        }
        last_nonzero = Some((x, d));
    }
    best.map(|(_, c)| c)
}

/// Median threshold, ignoring replicas where the event never occurs.
pub fn finite_median(curve: &ThresholdCurve) -> Option<f64> {
    let finite: Vec<f64> = curve.thresholds.iter().copied().filter(|t| *t <= 1.0).collect();
    if finite.is_empty() {
        None
    } else {
        Some(finite[(finite.len() - 1) / 2])
    }
}

/// Intersections of each successive pair of curves. `None` entries mark
/// pairs that never cross.
pub fn pair_intersections(curves: &[ThresholdCurve]) -> Vec<Option<f64>> {
    curves.windows(2).map(|w| intersect(&w[0], &w[1])).collect()
}

/// Sampling interval for the pooled intersection estimate: replicas are
/// split round-robin into batches, each batch re-estimates every pair
/// intersection, and the spread of the batch values gives the half-width.
/// Pairs sharing one size are correlated, so the interval is approximate.
pub fn batch_half_width(curves: &[ThresholdCurve], batches: usize) -> f64 {
    let mut values = Vec::new();
    for b in 0..batches {
        let sub: Vec<ThresholdCurve> = curves
            .iter()
            .map(|c| {
                let t: Vec<f64> = c
                    .thresholds
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i % batches == b)
                    .map(|(_, &v)| v)
                    .collect();
                ThresholdCurve::new(c.size, t)
            })
            .collect();
        for pair in sub.windows(2) {
            if let Some(v) = intersect(&pair[0], &pair[1]) {
                values.push(v);
            }
        }
    }
    if values.len() < 2 {
        return f64::INFINITY;
    }
    mean_ci(&values).1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_endpoints() {
        let c = ThresholdCurve::new(8, vec![0.2, 0.4, 0.6, f64::INFINITY]);
        assert_eq!(c.value_at(0.0), 0.0);
        assert_eq!(c.value_at(0.5), 0.5);
        assert_eq!(c.terminal_fraction(), 0.75);
    }

    #[test]
    fn sharp_curves_intersect_where_they_should() {
        // Two synthetic sigmoid-like threshold samples around 0.6 with the
        // larger size steeper.
        let small = ThresholdCurve::new(8, (0..1000).map(|i| 0.6 + (i as f64 / 1000.0 - 0.5) * 0.4).collect());
        let large = ThresholdCurve::new(16, (0..1000).map(|i| 0.6 + (i as f64 / 1000.0 - 0.5) * 0.1).collect());
        let x = intersect(&small, &large).unwrap();
        assert!((x - 0.6).abs() < 0.01, "intersection {x}");
    }

    #[test]
    fn disjoint_curves_do_not_intersect() {
        let a = ThresholdCurve::new(8, vec![0.1, 0.2, 0.3]);
        let b = ThresholdCurve::new(16, vec![0.7, 0.8, 0.9]);
        // a is entirely above b as a distribution function; differences never
        // change sign.
        assert!(intersect(&a, &b).is_none());
    }
}
