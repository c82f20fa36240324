#![allow(dead_code)]

use hawkes_cluster::stats::EmpiricalSample;

/// Two-sample KS critical value at level `alpha` (asymptotic).
pub fn ks_critical(alpha: f64, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (-(alpha / 2.0).ln() / 2.0).sqrt() * ((n + m) / (n * m)).sqrt()
}

pub fn sample(v: Vec<f64>) -> EmpiricalSample {
    EmpiricalSample::new(v).expect("nonempty")
}

pub fn column(rows: &[Vec<f64>], i: usize) -> EmpiricalSample {
    sample(rows.iter().map(|r| r[i]).collect())
}
