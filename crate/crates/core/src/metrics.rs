//! Statistics over per-episode performance vectors.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Per-episode survival steps and compute time of one run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PerformanceVector {
    pub steps: Vec<u64>,
    pub compute_ns: Vec<u64>,
}

impl PerformanceVector {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps_f64(&self) -> Vec<f64> {
        self.steps.iter().map(|&s| s as f64).collect()
    }

    pub fn summary(&self) -> Result<SummaryStats> {
        summarize(&self.steps_f64())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SummaryStats {
    pub mean: f64,
    pub median: f64,
    /// Root mean squared deviation from the mean (population standard deviation).
    pub rmsd: f64,
    /// Root mean square of consecutive differences.
    pub step_volatility: f64,
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn median(v: &[f64]) -> f64 {
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub fn summarize(v: &[f64]) -> Result<SummaryStats> {
    if v.is_empty() {
        return Err(Error::Argument("cannot summarize an empty vector"));
    }
    let m = mean(v);
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64;
    let volatility = if v.len() < 2 {
        0.0
    } else {
        let sq: f64 = v.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum();
        libm::sqrt(sq / (v.len() - 1) as f64)
    };
    Ok(SummaryStats {
        mean: m,
        median: median(v),
        rmsd: libm::sqrt(var),
        step_volatility: volatility,
    })
}

/// Trailing means over `window` consecutive entries; `len - window + 1` values.
pub fn moving_average(v: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window > v.len() {
        return Err(Error::Argument("moving-average window must lie in 1..=len"));
    }
    Ok(v.windows(window)
        .map(|w| {
            let (lo, hi) = w
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                    (lo.min(x), hi.max(x))
                });
            // Rounding in the sum can leave the window's range by an ulp.
            (w.iter().sum::<f64>() / window as f64).clamp(lo, hi)
        })
        .collect())
}

/// Element-wise `a.steps − b.steps`.
pub fn difference_vector(a: &PerformanceVector, b: &PerformanceVector) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::Argument("difference vector needs equal-length runs"));
    }
    Ok(a.steps
        .iter()
        .zip(&b.steps)
        .map(|(&x, &y)| x as f64 - y as f64)
        .collect())
}

/// Outcome of Welch's unequal-variance t-test.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WelchTest {
    pub t: f64,
    pub dof: f64,
    /// Two-sided p-value.
    pub p: f64,
}

fn sample_variance(v: &[f64], m: f64) -> f64 {
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}

/// Welch's t-test of `mean(a) − mean(b)` with Welch–Satterthwaite degrees of
/// freedom and a two-sided p-value from Student's t distribution.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Argument(
            "t-test needs at least two samples per group",
        ));
    }
    let (ma, mb) = (mean(a), mean(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (sample_variance(a, ma) / na, sample_variance(b, mb) / nb);
    let se2 = sa + sb;
    if se2 == 0.0 {
        if ma == mb {
            return Ok(WelchTest {
                t: 0.0,
                dof: na + nb - 2.0,
                p: 1.0,
            });
        }
        return Err(Error::Argument(
            "both samples are constant with different means",
        ));
    }
    let t = (ma - mb) / libm::sqrt(se2);
    let dof = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    Ok(WelchTest {
        t,
        dof,
        p: student_t_two_sided(t, dof),
    })
}

/// `P(|T| ≥ |t|)` for Student's t with `dof` degrees of freedom.
pub fn student_t_two_sided(t: f64, dof: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let x = dof / (dof + t * t);
    regularized_incomplete_beta(0.5 * dof, 0.5, x).clamp(0.0, 1.0)
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b)
        + a * libm::log(x)
        + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    // The continued fraction converges quickly for x < (a + 1) / (a + b + 2);
    // use the symmetry I_x(a, b) = 1 − I_{1−x}(b, a) otherwise.
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    const MAX_ITER: usize = 10_000;

    let guard = |v: f64| if libm::fabs(v) < TINY { TINY } else { v };
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 / guard(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        let step = d * c;
        h *= step;
        if libm::fabs(step - 1.0) < EPS {
            break;
        }
    }
    h
}

/// How a run's mean relates to its median.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MeanMedianReading {
    /// Median above mean: the big deviations are bad episodes; the agent
    /// learns and recovers quickly from occasional strong forgetting.
    MedianAboveMean,
    /// Mean above median: most episodes suffer from forgetting, with a few
    /// good ones pulling the mean up.
    MeanAboveMedian,
    /// Learning and forgetting roughly cancel out.
    Balanced,
}

impl MeanMedianReading {
    /// Relative gap `|mean − median| / max(|mean|, |median|)` below which the
    /// two count as nearly the same.
    pub const BALANCED_TOLERANCE: f64 = 0.05;

    pub fn of(stats: &SummaryStats) -> Self {
        let scale = libm::fmax(libm::fabs(stats.mean), libm::fabs(stats.median));
        let gap = stats.median - stats.mean;
        if scale == 0.0 || libm::fabs(gap) <= Self::BALANCED_TOLERANCE * scale {
            MeanMedianReading::Balanced
        } else if gap > 0.0 {
            MeanMedianReading::MedianAboveMean
        } else {
            MeanMedianReading::MeanAboveMedian
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            MeanMedianReading::MedianAboveMean => {
                "learns successfully; forgetting has occasional strong impact"
            }
            MeanMedianReading::MeanAboveMedian => {
                "most episodes are dominated by forgetting; occasional good policies"
            }
            MeanMedianReading::Balanced => "learning and forgetting counterbalance each other",
        }
    }
}
