//! Small statistics toolbox: binomial point estimates with Wald intervals,
//! chi-square tail probabilities and a pooled two-sample proportion test.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// A Monte Carlo frequency with its 95% Wald half-width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
    pub n: u64,
}

impl Estimate {
    pub fn from_counts(successes: u64, n: u64) -> Estimate {
        assert!(n > 0, "empty sample");
        let p = successes as f64 / n as f64;
        Estimate {
            mean: p,
            half_width: Z95 * (p * (1.0 - p) / n as f64).sqrt(),
            n,
        }
    }

    pub fn lower(&self) -> f64 {
        (self.mean - self.half_width).max(0.0)
    }

    pub fn upper(&self) -> f64 {
        (self.mean + self.half_width).min(1.0)
    }

    /// Lower confidence bound with a 1/(2n) continuity correction, so that
    /// extreme frequencies still carry sampling slack. Used where an estimate
    /// has to *certify* a threshold rather than just report a value.
    pub fn lower_conservative(&self) -> f64 {
        (self.mean - self.half_width - 0.5 / self.n as f64).max(0.0)
    }
}

/// Mean and 95% half-width of a small batch of real values.
pub fn mean_ci(values: &[f64]) -> (f64, f64) {
    assert!(!values.is_empty());
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, f64::INFINITY);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Z95 * (var / n).sqrt())
}

/// Pooled z statistic for the difference of two binomial proportions.
pub fn two_sample_z(s1: u64, n1: u64, s2: u64, n2: u64) -> f64 {
    let p1 = s1 as f64 / n1 as f64;
    let p2 = s2 as f64 / n2 as f64;
    let pool = (s1 + s2) as f64 / (n1 + n2) as f64;
    let se = (pool * (1.0 - pool) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    if se == 0.0 {
        0.0
    } else {
        (p1 - p2) / se
    }
}

/// Survival function of the chi-square distribution with `dof` degrees of
/// freedom, i.e. P(X > x).
pub fn chi_square_sf(x: f64, dof: u64) -> f64 {
    assert!(dof > 0);
    if x <= 0.0 {
        return 1.0;
    }
    regularized_gamma_q(dof as f64 / 2.0, x / 2.0)
}

/// Upper regularized incomplete gamma Q(a, x).
fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_continued_fraction(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..500 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-15 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    const FPMIN: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-15 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Lanczos approximation (g = 7, 9 terms), accurate to ~1e-13 for z > 0.
#[allow(clippy::excessive_precision)]
fn ln_gamma(z: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if z < 0.5 {
        // Reflection formula.
        std::f64::consts::PI.ln() - (std::f64::consts::PI * z).sin().ln() - ln_gamma(1.0 - z)
    } else {
        let z = z - 1.0;
        let mut x = COEF[0];
        for (i, &c) in COEF.iter().enumerate().skip(1) {
            x += c / (z + i as f64);
        }
        let t = z + 7.5;
        0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wald_interval_basics() {
        let e = Estimate::from_counts(500, 1000);
        assert!((e.mean - 0.5).abs() < 1e-12);
        assert!((e.half_width - Z95 * (0.25f64 / 1000.0).sqrt()).abs() < 1e-12);
        // Degenerate frequencies report zero width but keep conservative slack.
        let e = Estimate::from_counts(1000, 1000);
        assert_eq!(e.half_width, 0.0);
        assert!((e.lower_conservative() - (1.0 - 0.0005)).abs() < 1e-12);
    }

    #[test]
    fn chi_square_df2_is_exponential() {
        for &x in &[0.5, 1.0, 3.0, 10.0, 25.0] {
            let exact = (-x / 2.0f64).exp();
            assert!((chi_square_sf(x, 2) - exact).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn chi_square_reference_quantiles() {
        // Classical 5% critical values.
        assert!((chi_square_sf(3.841458820694124, 1) - 0.05).abs() < 1e-9);
        assert!((chi_square_sf(18.307038053275146, 10) - 0.05).abs() < 1e-9);
        assert!((chi_square_sf(124.34211341849652, 100) - 0.05).abs() < 1e-9);
        // 1% with 10 dof.
        assert!((chi_square_sf(23.209251158954356, 10) - 0.01).abs() < 1e-9);
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut fact = 1.0f64;
        for n in 1..15u32 {
            if n > 1 {
                fact *= (n - 1) as f64;
            }
            assert!((ln_gamma(n as f64) - fact.ln()).abs() < 1e-10);
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-12);
    }
}
