//! Closed-form results for the exponential kernel `g(x) = α e^{−βx}`.
//!
//! The pre-event intensity is affine in the compensator point,
//! `λ_k = αk − βΛ_k`, and the cluster duration is a random sum of
//! conditionally independent exponentials whose rates are read off a uniform
//! parking function.

use rand::distr::Open01;
use rand::Rng;

use crate::cluster::simulate_cluster;
use crate::combinat::{sample_borel, sample_parking_function, ParkingFunction};
use crate::error::{domain, Error, Result};
use crate::kernel::Kernel;
use crate::polytope::CompensatorVector;
use crate::stats::{ks_two_sample, EmpiricalSample};

/// Pre-event intensities `λ_1..λ_{N−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensitySkeleton(Vec<f64>);

impl IntensitySkeleton {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

fn check_params(alpha: f64, beta: f64) -> Result<()> {
    if alpha > 0.0 && beta > alpha && beta.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("need 0 < α < β, got α = {alpha}, β = {beta}")))
    }
}

pub fn intensity_skeleton(alpha: f64, beta: f64, lam: &CompensatorVector) -> Result<IntensitySkeleton> {
    check_params(alpha, beta)?;
    let values = lam
        .values()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let v = alpha * (i + 1) as f64 - beta * x;
            if v > 0.0 {
                Ok(v)
            } else {
                Err(Error::Invariant(format!("pre-event intensity λ_{} = {v} is not positive", i + 1)))
            }
        })
        .collect::<Result<_>>()?;
    Ok(IntensitySkeleton(values))
}

/// Exponential rates `i + 1 − Σ_{j=N−i}^{N−1} κ_j(π)` for `i = 1..N−1`,
/// where `π` has length `N − 1`.
pub fn theorem2_rates(pi: &ParkingFunction) -> Vec<u32> {
    let k = pi.len();
    let occ = pi.occupancy();
    let mut tail = 0usize;
    (1..=k)
        .map(|i| {
            // j runs from N−i = k+1−i up to k
            tail += occ.get(k + 1 - i);
            (i + 1 - tail) as u32
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct DurationSample {
    pub size: u64,
    /// Length `size − 1`; `None` when `size = 1`.
    pub parking: Option<ParkingFunction>,
    /// Unit-scale exponential draws `T_{π,i}`.
    pub draws: Vec<f64>,
    pub tau: f64,
}

/// `τ = (1/β) Σ_i T_{π,i}` with `T_{π,i} ~ Exp(rate_i)`.
pub fn sample_duration_theorem2<R: Rng + ?Sized>(
    alpha: f64,
    beta: f64,
    rng: &mut R,
    conditioned_size: Option<u64>,
) -> Result<DurationSample> {
    check_params(alpha, beta)?;
    let size = match conditioned_size {
        Some(0) => return Err(domain("conditioned cluster size must be at least 1")),
        Some(n) => n,
        None => sample_borel(alpha / beta, rng)?,
    };
    if size == 1 {
        return Ok(DurationSample { size, parking: None, draws: Vec::new(), tau: 0.0 });
    }
    let pi = sample_parking_function((size - 1) as usize, rng)?;
    let draws: Vec<f64> = theorem2_rates(&pi)
        .into_iter()
        .map(|rate| {
            let u: f64 = rng.sample(Open01);
            -u.ln() / rate as f64
        })
        .collect();
    let tau = draws.iter().sum::<f64>() / beta;
    Ok(DurationSample { size, parking: Some(pi), draws, tau })
}

/// Two-sample KS distance between `β₁τ₁` and `β₂τ₂`, with durations drawn by
/// the parking-function cluster simulator.
///
/// Without conditioning the two kernels must share `ρ`; with a fixed size the
/// scaled durations agree for any pair of ratios.
pub fn scaling_check<R: Rng + ?Sized>(
    (alpha1, beta1): (f64, f64),
    (alpha2, beta2): (f64, f64),
    reps: usize,
    rng: &mut R,
    conditioned_size: Option<u64>,
) -> Result<f64> {
    let k1 = Kernel::exponential(alpha1, beta1)?;
    let k2 = Kernel::exponential(alpha2, beta2)?;
    let (rho1, rho2) = (alpha1 / beta1, alpha2 / beta2);
    if conditioned_size.is_none() && (rho1 - rho2).abs() > 1e-12 * rho1.max(rho2) {
        return Err(domain(format!("branching ratios differ: {rho1} vs {rho2}")));
    }
    if reps == 0 {
        return Err(domain("scaling check needs at least one replication"));
    }
    let mut draw = |k: &Kernel, beta: f64| -> Result<Vec<f64>> {
        (0..reps)
            .map(|_| simulate_cluster(k, rng, conditioned_size).map(|c| beta * c.duration()))
            .collect()
    };
    let a = draw(&k1, beta1)?;
    let b = draw(&k2, beta2)?;
    Ok(ks_two_sample(&EmpiricalSample::new(a)?, &EmpiricalSample::new(b)?))
}
