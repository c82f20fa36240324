//! Uniform sampling on the compensator polytope
//! `P_k = {0 < x_1 < … < x_k, x_i < iρ}`.
//!
//! Given a cluster of size `k + 1`, its compensator points are uniform on
//! `P_k` regardless of the kernel. The polytope splits into regions indexed
//! by Dyck paths, and a uniform parking function picks a region with exactly
//! the right weight, so `ρ · sort(π − U)` is an exact uniform draw.

use rand::distr::Open01;
use rand::{Rng, RngCore};

use crate::combinat::{sample_parking_function, DyckPath, ParkingFunction};
use crate::error::{domain, Error, Result};

/// Largest dimension accepted by [`rejection_sample_polytope`].
pub const MAX_REJECTION_DIM: usize = 12;

/// Default attempt budget for [`rejection_sample_polytope`].
pub const REJECTION_BUDGET: u64 = 50_000_000;

/// Sorted compensator points `Λ_1 < … < Λ_k` together with the branching
/// ratio of the kernel they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct CompensatorVector {
    values: Vec<f64>,
    rho: f64,
}

impl CompensatorVector {
    /// Validates membership in `P_k`.
    pub fn new(values: Vec<f64>, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(domain(format!("branching ratio {rho} outside (0, 1)")));
        }
        let v = Self { values, rho };
        match v.first_violation() {
            None => Ok(v),
            Some(i) => Err(Error::Invariant(format!(
                "compensator point {} = {} breaks 0 < Λ_1 < … < Λ_k, Λ_i < iρ (ρ = {rho})",
                i + 1,
                v.values[i]
            ))),
        }
    }

    pub(crate) fn from_raw(values: Vec<f64>, rho: f64) -> Self {
        Self { values, rho }
    }

    pub fn empty(rho: f64) -> Self {
        Self { values: Vec::new(), rho }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Index (0-based) of the first coordinate breaking the polytope
    /// constraints, if any.
    pub fn first_violation(&self) -> Option<usize> {
        let mut prev = 0.0;
        for (i, &x) in self.values.iter().enumerate() {
            let bound = (i + 1) as f64 * self.rho;
            if !(x > prev && x < bound) {
                return Some(i);
            }
            prev = x;
        }
        None
    }

    pub fn in_polytope(&self) -> bool {
        self.first_violation().is_none()
    }
}

/// A polytope draw with its combinatorial spine exposed.
#[derive(Debug, Clone)]
pub struct PolytopeDraw {
    pub points: CompensatorVector,
    /// `None` when `k = 0`.
    pub parking: Option<ParkingFunction>,
    /// `U_i`, aligned with the unsorted parking function entries.
    pub uniforms: Vec<f64>,
}

/// Pluggable strategy for drawing uniformly from `P_k`.
pub trait PolytopeSampler {
    fn sample(&self, k: usize, rho: f64, rng: &mut dyn RngCore) -> Result<CompensatorVector>;
}

/// `ρ · sort(π − U)` with `π` a uniform parking function.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParkingSpine;

/// Independent coordinates `x_i ~ U(0, iρ)` kept only when increasing.
#[derive(Debug, Clone, Copy)]
pub struct Rejection {
    pub budget: u64,
}

impl Default for Rejection {
    fn default() -> Self {
        Self { budget: REJECTION_BUDGET }
    }
}

impl PolytopeSampler for ParkingSpine {
    fn sample(&self, k: usize, rho: f64, rng: &mut dyn RngCore) -> Result<CompensatorVector> {
        sample_compensator_points(k, rho, rng)
    }
}

impl PolytopeSampler for Rejection {
    fn sample(&self, k: usize, rho: f64, rng: &mut dyn RngCore) -> Result<CompensatorVector> {
        rejection_sample_with_budget(k, rho, self.budget, rng)
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("branching ratio {rho} outside (0, 1)")))
    }
}

pub fn sample_compensator_points<R: Rng + ?Sized>(
    k: usize,
    rho: f64,
    rng: &mut R,
) -> Result<CompensatorVector> {
    sample_compensator_points_with_spine(k, rho, rng).map(|d| d.points)
}

pub fn sample_compensator_points_with_spine<R: Rng + ?Sized>(
    k: usize,
    rho: f64,
    rng: &mut R,
) -> Result<PolytopeDraw> {
    check_rho(rho)?;
    if k == 0 {
        return Ok(PolytopeDraw { points: CompensatorVector::empty(rho), parking: None, uniforms: Vec::new() });
    }
    let pf = sample_parking_function(k, rng)?;
    let uniforms: Vec<f64> = (0..k).map(|_| rng.sample(Open01)).collect();
    // π_i − U_i lies in (π_i − 1, π_i): bucket by π, then sort within buckets
    let mut start = vec![0usize; k + 2];
    for &p in pf.entries() {
        start[p as usize + 1] += 1;
    }
    for i in 1..start.len() {
        start[i] += start[i - 1];
    }
    let mut values = vec![0.0; k];
    let mut fill = start.clone();
    for (&p, &u) in pf.entries().iter().zip(&uniforms) {
        values[fill[p as usize]] = p as f64 - u;
        fill[p as usize] += 1;
    }
    for w in start.windows(2) {
        if w[1] - w[0] > 1 {
            values[w[0]..w[1]].sort_unstable_by(f64::total_cmp);
        }
    }
    for v in &mut values {
        *v *= rho;
    }
    Ok(PolytopeDraw { points: CompensatorVector::from_raw(values, rho), parking: Some(pf), uniforms })
}

/// Dyck path `d_i = ⌊Λ_i / ρ⌋ + 1`, i.e. the ceiling with integer ties sent
/// to the next region up.
pub fn classify_region(lam: &CompensatorVector) -> Result<DyckPath> {
    if lam.is_empty() {
        return Err(domain("cannot classify an empty compensator vector"));
    }
    let d = lam
        .values
        .iter()
        .map(|&x| {
            let y = (x / lam.rho).floor() + 1.0;
            if y >= 1.0 && y <= u32::MAX as f64 {
                Ok(y as u32)
            } else {
                Err(domain(format!("compensator point {x} outside the polytope")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    DyckPath::new(d)
}

pub fn rejection_sample_polytope<R: Rng + ?Sized>(
    k: usize,
    rho: f64,
    rng: &mut R,
) -> Result<CompensatorVector> {
    rejection_sample_with_budget(k, rho, REJECTION_BUDGET, rng)
}

/// Acceptance rate `(k+1)^{k−1} / (k!)²` of the rejection sampler.
pub fn rejection_acceptance_rate(k: usize) -> f64 {
    let mut rate = ((k + 1) as f64).powi(k as i32 - 1);
    for i in 1..=k {
        rate /= (i * i) as f64;
    }
    rate
}

pub fn rejection_sample_with_budget<R: Rng + ?Sized>(
    k: usize,
    rho: f64,
    budget: u64,
    rng: &mut R,
) -> Result<CompensatorVector> {
    check_rho(rho)?;
    if k == 0 {
        return Err(domain("rejection sampler needs k ≥ 1"));
    }
    if k > MAX_REJECTION_DIM {
        return Err(Error::Capacity { what: "rejection sampler dimension", limit: MAX_REJECTION_DIM });
    }
    let mut x = vec![0.0; k];
    'attempt: for _ in 0..budget {
        let mut prev = 0.0;
        for (i, xi) in x.iter_mut().enumerate() {
            let u: f64 = rng.sample(Open01);
            *xi = (i + 1) as f64 * rho * u;
            if *xi <= prev {
                continue 'attempt;
            }
            prev = *xi;
        }
        return Ok(CompensatorVector::from_raw(x, rho));
    }
    Err(Error::RejectionBudget { attempts: budget })
}
