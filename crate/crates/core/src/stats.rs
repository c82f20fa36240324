//! Empirical distributions, Kolmogorov–Smirnov and chi-square statistics.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{domain, Result};

/// Ascending, NaN-free, nonempty sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample(Vec<f64>);

impl EmpiricalSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("empirical sample must be nonempty"));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(domain("empirical sample contains NaN"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Fraction of the sample `≤ x`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.0.partition_point(|&v| v <= x) as f64 / self.0.len() as f64
    }
}

/// `sup_x |F_a(x) − F_b(x)|`, by a merge scan that steps past ties together.
pub fn ks_two_sample(a: &EmpiricalSample, b: &EmpiricalSample) -> f64 {
    let (xs, ys) = (&a.0, &b.0);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Convenience wrapper over raw slices.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(ks_two_sample(&EmpiricalSample::new(a.to_vec())?, &EmpiricalSample::new(b.to_vec())?))
}

/// `sup_x |F_n(x) − F(x)|` against a continuous reference CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &EmpiricalSample, cdf: F) -> f64 {
    let n = sample.0.len() as f64;
    sample
        .0
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

fn chi_square_survival(statistic: f64, df: usize) -> f64 {
    let dist = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    dist.sf(statistic)
}

/// Pearson goodness of fit with `df = categories − 1`.
///
/// `expected` holds category probabilities summing to one; every category
/// needs an expected count of at least 5 (see [`merge_tail`]).
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> Result<ChiSquare> {
    if observed.len() != expected.len() || observed.len() < 2 {
        return Err(domain("need at least two matching categories"));
    }
    let mass: f64 = expected.iter().sum();
    if (mass - 1.0).abs() > 1e-9 || expected.iter().any(|&p| !(p >= 0.0)) {
        return Err(domain(format!("expected probabilities sum to {mass}")));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(domain("no observations"));
    }
    let total = total as f64;
    let mut statistic = 0.0;
    for (&o, &p) in observed.iter().zip(expected) {
        let e = p * total;
        if e < 5.0 {
            return Err(domain(format!("category with expected count {e:.3} < 5; merge categories first")));
        }
        statistic += (o as f64 - e).powi(2) / e;
    }
    let df = observed.len() - 1;
    Ok(ChiSquare { statistic, df, p_value: chi_square_survival(statistic, df) })
}

/// Folds trailing categories into one bucket, absorbing the mass not
/// covered by `expected`, until that bucket's expected count reaches
/// `min_count`. `observed` may be longer than `expected`; extra entries
/// land in the tail bucket.
pub fn merge_tail(observed: &[u64], expected: &[f64], min_count: f64) -> (Vec<u64>, Vec<f64>) {
    let total: u64 = observed.iter().sum();
    let total = total as f64;
    let mut obs: Vec<u64> = observed.iter().take(expected.len()).copied().collect();
    obs.resize(expected.len(), 0);
    let extra: u64 = observed.iter().skip(expected.len()).sum();
    let mut probs = expected.to_vec();
    let mut tail_obs = extra;
    let mut tail_p = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    while tail_p * total < min_count || probs.last().is_some_and(|&p| p * total < min_count) {
        match (obs.pop(), probs.pop()) {
            (Some(o), Some(p)) => {
                tail_obs += o;
                tail_p += p;
            }
            _ => break,
        }
    }
    obs.push(tail_obs);
    probs.push(tail_p);
    // thin categories in the middle of a non-monotone head are left alone
    (obs, probs)
}

/// Chi-square homogeneity test of two count vectors over shared categories.
/// Categories are merged from the top down until every pooled expected count
/// is at least 5.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> Result<ChiSquare> {
    let len = a.len().max(b.len());
    let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0);
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(domain("both samples need observations"));
    }
    let share_a = na / (na + nb);
    let min_share = share_a.min(1.0 - share_a);
    let mut cells: Vec<(u64, u64)> = Vec::new();
    let (mut pa, mut pb) = (0, 0);
    for i in (0..len).rev() {
        pa += get(a, i);
        pb += get(b, i);
        if ((pa + pb) as f64) * min_share >= 5.0 {
            cells.push((pa, pb));
            pa = 0;
            pb = 0;
        }
    }
    if pa + pb > 0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += pa;
                last.1 += pb;
            }
            None => cells.push((pa, pb)),
        }
    }
    if cells.len() < 2 {
        return Err(domain("fewer than two usable categories"));
    }
    let mut statistic = 0.0;
    for &(x, y) in &cells {
        let pooled = (x + y) as f64;
        let (ex, ey) = (pooled * share_a, pooled * (1.0 - share_a));
        statistic += (x as f64 - ex).powi(2) / ex + (y as f64 - ey).powi(2) / ey;
    }
    let df = cells.len() - 1;
    Ok(ChiSquare { statistic, df, p_value: chi_square_survival(statistic, df) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    /// `(probability, value)` pairs.
    pub quantiles: Vec<(f64, f64)>,
}

pub const SUMMARY_PROBS: [f64; 7] = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99];

/// Linear-interpolation quantile on the sorted sample (`h = (n−1)p`).
pub fn quantile(sample: &EmpiricalSample, p: f64) -> f64 {
    let v = &sample.0;
    let h = (v.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn summarize(sample: &EmpiricalSample) -> Summary {
    let v = &sample.0;
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Summary {
        count: n,
        mean,
        variance,
        std_error: (variance / n as f64).sqrt(),
        quantiles: SUMMARY_PROBS.iter().map(|&p| (p, quantile(sample, p))).collect(),
    }
}
