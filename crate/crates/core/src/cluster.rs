//! Cluster simulation.
//!
//! The main pipeline draws the size from the Borel law (or takes it as
//! given), draws compensator points uniformly on the polytope, then recovers
//! epochs by solving the triangular system `Λ_i = Σ_{j<i} G(A_i − A_j)` one
//! epoch at a time. Three independent samplers are provided for
//! cross-validation: the branching (Hawkes–Oakes) construction, the
//! Dassios–Zhao exact method for the exponential kernel, and a unit-rate
//! Poisson race in compensator space.

use std::collections::VecDeque;

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::combinat::sample_borel;
use crate::error::{domain, Error, Result};
use crate::kernel::ExcitationKernel;
use crate::polytope::{sample_compensator_points, CompensatorVector};

/// Arrival epochs `0 = A_0 < A_1 < … < A_{N−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    epochs: Vec<f64>,
}

impl Cluster {
    pub fn new(epochs: Vec<f64>) -> Result<Self> {
        if epochs.first() != Some(&0.0) {
            return Err(Error::Invariant("cluster must start with an epoch at exactly 0".into()));
        }
        if let Some(w) = epochs.windows(2).find(|w| !(w[1] > w[0] && w[1].is_finite())) {
            return Err(Error::Invariant(format!("epochs not strictly increasing at {} → {}", w[0], w[1])));
        }
        Ok(Self { epochs })
    }

    pub(crate) fn from_raw(epochs: Vec<f64>) -> Self {
        debug_assert!(epochs.first() == Some(&0.0));
        Self { epochs }
    }

    pub fn singleton() -> Self {
        Self { epochs: vec![0.0] }
    }

    pub fn epochs(&self) -> &[f64] {
        &self.epochs
    }

    pub fn size(&self) -> usize {
        self.epochs.len()
    }

    pub fn duration(&self) -> f64 {
        *self.epochs.last().expect("cluster is nonempty")
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.epochs.windows(2).all(|w| w[1] > w[0])
    }

    pub fn into_epochs(self) -> Vec<f64> {
        self.epochs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InversionMethod {
    ClosedForm,
    NewtonBisection,
}

/// Diagnostics from recovering epochs out of compensator points.
#[derive(Debug, Clone, PartialEq)]
pub struct InversionReport {
    pub method: InversionMethod,
    /// `|Σ_j G(A_i − A_j) − Λ_i|` for each recovered epoch.
    pub residuals: Vec<f64>,
    /// Newton/bisection iterations per epoch (zero for the closed form).
    pub iterations: Vec<u32>,
}

impl InversionReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonConfig {
    /// Residual tolerance required on exit.
    pub tolerance: f64,
    pub max_iterations: u32,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 200 }
    }
}

/// Recovers epochs from compensator points, using the closed form when the
/// kernel is exponential.
pub fn invert_compensator<K: ExcitationKernel + ?Sized>(
    kernel: &K,
    lam: &CompensatorVector,
) -> Result<Cluster> {
    match kernel.exponential_params() {
        Some((alpha, beta)) => invert_exponential(alpha, beta, lam),
        None => invert_newton(kernel, lam, &NewtonConfig::default()).map(|(c, _)| c),
    }
}

fn check_lambda_kernel(rho: f64, lam: &CompensatorVector) -> Result<()> {
    if (lam.rho() - rho).abs() > 1e-12 * rho {
        return Err(domain(format!(
            "compensator vector built for ρ = {} but kernel has ρ = {rho}",
            lam.rho()
        )));
    }
    Ok(())
}

/// Solves each `f_i(t) = Σ_{j<i} G(t − A_j) − Λ_i = 0` in turn.
///
/// `f_i` is increasing with slope equal to the intensity, `f_i(A_{i−1}) < 0`,
/// and `f_i(A_{i−1} + G⁻¹(Λ_i − Λ_{i−1})) ≥ 0`, so the root is bracketed from
/// the start. Newton steps that leave the bracket fall back to bisection.
pub fn invert_newton<K: ExcitationKernel + ?Sized>(
    kernel: &K,
    lam: &CompensatorVector,
    config: &NewtonConfig,
) -> Result<(Cluster, InversionReport)> {
    let rho = kernel.branching_ratio();
    check_lambda_kernel(rho, lam)?;
    let k = lam.len();
    let mut epochs = Vec::with_capacity(k + 1);
    epochs.push(0.0);
    let mut report = InversionReport {
        method: InversionMethod::NewtonBisection,
        residuals: Vec::with_capacity(k),
        iterations: Vec::with_capacity(k),
    };
    let mut prev_lam = 0.0;
    for (i, &target) in lam.values().iter().enumerate() {
        let (t, residual, iters) = solve_epoch(kernel, &epochs, target, target - prev_lam, config);
        report.residuals.push(residual);
        report.iterations.push(iters);
        if !(residual <= config.tolerance) || !(t > epochs[i]) {
            return Err(Error::Inversion { index: i + 1, residual, report: Box::new(report) });
        }
        epochs.push(t);
        prev_lam = target;
    }
    Ok((Cluster::from_raw(epochs), report))
}

fn solve_epoch<K: ExcitationKernel + ?Sized>(
    kernel: &K,
    parents: &[f64],
    target: f64,
    gap: f64,
    config: &NewtonConfig,
) -> (f64, f64, u32) {
    let rho = kernel.branching_ratio();
    let f = |t: f64| parents.iter().map(|&a| kernel.integrated(t - a)).sum::<f64>() - target;
    let slope = |t: f64| parents.iter().map(|&a| kernel.rate(t - a)).sum::<f64>();

    let prev = *parents.last().expect("initial epoch present");
    let mut lo = prev;
    let mut hi = if gap > 0.0 && gap < rho { prev + kernel.offset_quantile(gap / rho) } else { prev };
    let mut step = (hi - prev).max(1.0);
    let mut iters = 0;
    // the heuristic bound can miss by rounding; widen until f(hi) ≥ 0
    while !(f(hi) >= 0.0) && iters < config.max_iterations {
        lo = hi.max(lo);
        hi += step;
        step *= 2.0;
        iters += 1;
    }

    let mut t = hi;
    while iters < config.max_iterations {
        iters += 1;
        let fv = f(t);
        if fv == 0.0 {
            return (t, 0.0, iters);
        }
        if fv < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let mut next = t - fv / slope(t);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
            // no representable point left inside the bracket
            if !(next > lo && next < hi) {
                break;
            }
        }
        if next == t {
            break;
        }
        t = next;
    }
    let (best, residual) = [t, lo, hi]
        .into_iter()
        .filter(|&x| x > prev)
        .map(|x| (x, f(x).abs()))
        .fold((t, f64::INFINITY), |best, cand| if cand.1 < best.1 { cand } else { best });
    (best, residual, iters)
}

/// Closed-form inversion for `g(x) = α e^{−βx}`:
/// `S_k = −(1/β) ln((kρ − Λ_k) / (kρ − Λ_{k−1}))`, `A_k = Σ_{i≤k} S_i`.
pub fn invert_exponential(alpha: f64, beta: f64, lam: &CompensatorVector) -> Result<Cluster> {
    invert_exponential_with_report(alpha, beta, lam).map(|(c, _)| c)
}

pub fn invert_exponential_with_report(
    alpha: f64,
    beta: f64,
    lam: &CompensatorVector,
) -> Result<(Cluster, InversionReport)> {
    if !(alpha > 0.0 && beta > alpha) {
        return Err(domain(format!("need 0 < α < β, got α = {alpha}, β = {beta}")));
    }
    let rho = alpha / beta;
    check_lambda_kernel(rho, lam)?;
    let mut epochs = Vec::with_capacity(lam.len() + 1);
    epochs.push(0.0);
    let mut t = 0.0;
    let mut prev = 0.0;
    for (i, &x) in lam.values().iter().enumerate() {
        let k = (i + 1) as f64;
        let num = k * rho - x;
        let den = k * rho - prev;
        if !(num > 0.0) {
            return Err(domain(format!("Λ_{} = {x} is not below {}ρ", i + 1, i + 1)));
        }
        if !(x > prev) {
            return Err(domain(format!("Λ_{} = {x} does not exceed its predecessor {prev}", i + 1)));
        }
        t -= (num / den).ln() / beta;
        epochs.push(t);
        prev = x;
    }
    let report = InversionReport {
        method: InversionMethod::ClosedForm,
        residuals: vec![0.0; lam.len()],
        iterations: vec![0; lam.len()],
    };
    Ok((Cluster::from_raw(epochs), report))
}

/// Parking-function simulation of one cluster.
///
/// With `conditioned_size = Some(n)` the Borel draw is skipped and the
/// cluster has exactly `n` events.
pub fn simulate_cluster<K, R>(kernel: &K, rng: &mut R, conditioned_size: Option<u64>) -> Result<Cluster>
where
    K: ExcitationKernel + ?Sized,
    R: Rng + ?Sized,
{
    let rho = kernel.branching_ratio();
    let n = match conditioned_size {
        Some(0) => return Err(domain("conditioned cluster size must be at least 1")),
        Some(n) => n,
        None => sample_borel(rho, rng)?,
    };
    if n == 1 {
        return Ok(Cluster::singleton());
    }
    let lam = sample_compensator_points((n - 1) as usize, rho, rng)?;
    invert_compensator(kernel, &lam)
}

/// Offspring tree from the branching construction, in generation order.
#[derive(Debug, Clone)]
pub struct BranchingTree {
    /// Event times; entry 0 is the root at time 0.
    pub times: Vec<f64>,
    /// Parent index of each event (`None` for the root).
    pub parents: Vec<Option<usize>>,
}

impl BranchingTree {
    pub fn children_of(&self, idx: usize) -> usize {
        self.parents.iter().filter(|p| **p == Some(idx)).count()
    }

    pub fn into_cluster(self) -> Cluster {
        let mut epochs = self.times;
        epochs.sort_by(f64::total_cmp);
        Cluster::from_raw(epochs)
    }
}

/// Every event independently spawns `Poisson(ρ)` children at offsets drawn
/// from the density `g / ρ`.
pub fn branching_tree<K, R>(kernel: &K, rng: &mut R) -> Result<BranchingTree>
where
    K: ExcitationKernel + ?Sized,
    R: Rng + ?Sized,
{
    let rho = kernel.branching_ratio();
    let offspring = Poisson::new(rho).map_err(|e| domain(format!("offspring law: {e}")))?;
    let mut tree = BranchingTree { times: vec![0.0], parents: vec![None] };
    let mut queue = VecDeque::from([0usize]);
    while let Some(parent) = queue.pop_front() {
        let children = offspring.sample(rng) as u64;
        for _ in 0..children {
            let offset = kernel.offset_quantile(rng.sample(Open01));
            tree.times.push(tree.times[parent] + offset);
            tree.parents.push(Some(parent));
            queue.push_back(tree.times.len() - 1);
        }
    }
    Ok(tree)
}

pub fn branching_cluster<K, R>(kernel: &K, rng: &mut R) -> Result<Cluster>
where
    K: ExcitationKernel + ?Sized,
    R: Rng + ?Sized,
{
    branching_tree(kernel, rng).map(BranchingTree::into_cluster)
}

/// Dassios–Zhao exact simulation for `g(x) = α e^{−βx}`.
///
/// With post-jump intensity `λ⁺`, the next gap `S` has survival
/// `exp(−λ⁺(1 − e^{−βS})/β)`, which is defective: no further event occurs
/// with probability `e^{−λ⁺/β}`. Inverting with one uniform `V` gives
/// `D = 1 + β ln V / λ⁺`; `D ≤ 0` ends the cluster, otherwise
/// `S = −ln D / β` and `λ⁺ ← λ⁺ D + α`.
pub fn dassios_zhao_cluster<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> Result<Cluster> {
    if !(alpha > 0.0 && beta > alpha && beta.is_finite()) {
        return Err(domain(format!("need 0 < α < β, got α = {alpha}, β = {beta}")));
    }
    let mut epochs = vec![0.0];
    let mut t = 0.0;
    let mut intensity = alpha;
    loop {
        let v: f64 = rng.sample(Open01);
        let d = 1.0 + beta * v.ln() / intensity;
        if d <= 0.0 {
            break;
        }
        t -= d.ln() / beta;
        epochs.push(t);
        intensity = intensity * d + alpha;
    }
    Ok(Cluster::from_raw(epochs))
}

/// Unit-rate Poisson epochs `T_1, T_2, …` stopped at the first `i` with
/// `T_i ≥ iρ`; `T_1..T_{i−1}` are the compensator points of a cluster of
/// size `i`.
pub fn sample_compensator_poisson_race<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> Result<CompensatorVector> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(domain(format!("branching ratio {rho} outside (0, 1)")));
    }
    let mut points = Vec::new();
    let mut t = 0.0;
    loop {
        let u: f64 = rng.sample(Open01);
        t -= u.ln();
        if t >= (points.len() + 1) as f64 * rho {
            return Ok(CompensatorVector::from_raw(points, rho));
        }
        points.push(t);
    }
}

/// Poisson race in compensator space followed by epoch recovery.
pub fn poisson_race_cluster<K, R>(kernel: &K, rng: &mut R) -> Result<Cluster>
where
    K: ExcitationKernel + ?Sized,
    R: Rng + ?Sized,
{
    let lam = sample_compensator_poisson_race(kernel.branching_ratio(), rng)?;
    invert_compensator(kernel, &lam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{compensator_at_epochs, Kernel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cluster_validation() {
        assert!(Cluster::new(vec![0.0, 1.0, 2.0]).is_ok());
        assert!(Cluster::new(vec![]).is_err());
        assert!(Cluster::new(vec![0.5]).is_err());
        assert!(Cluster::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(Cluster::new(vec![0.0, f64::INFINITY]).is_err());
        let c = Cluster::new(vec![0.0]).unwrap();
        assert_eq!(c.duration(), 0.0);
        assert_eq!(c.size(), 1);
    }

    #[test]
    fn exponential_single_epoch_inverse() {
        let (alpha, beta): (f64, f64) = (3.0, 4.0);
        let rho = alpha / beta;
        let a = 0.81;
        let lam = CompensatorVector::new(vec![rho * (1.0 - (-beta * a).exp())], rho).unwrap();
        let c = invert_exponential(alpha, beta, &lam).unwrap();
        assert!((c.epochs()[1] - a).abs() < 1e-14);
    }

    #[test]
    fn exponential_inverse_rejects_points_outside_polytope() {
        let bad = CompensatorVector::from_raw(vec![0.75], 0.75);
        assert!(matches!(invert_exponential(3.0, 4.0, &bad), Err(Error::Domain(_))));
        let unsorted = CompensatorVector::from_raw(vec![0.5, 0.4], 0.75);
        assert!(invert_exponential(3.0, 4.0, &unsorted).is_err());
        let wrong_rho = CompensatorVector::new(vec![0.1], 0.5).unwrap();
        assert!(invert_exponential(3.0, 4.0, &wrong_rho).is_err());
        assert!(invert_exponential(4.0, 3.0, &wrong_rho).is_err());
    }

    #[test]
    fn newton_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let kernel = Kernel::exponential(3.0, 4.0).unwrap();
        let as_generic = crate::kernel::Exponential::new(3.0, 4.0).unwrap();
        for _ in 0..2000 {
            let n = rng.random_range(2..40);
            let lam = sample_compensator_points(n, 0.75, &mut rng).unwrap();
            let closed = invert_compensator(&kernel, &lam).unwrap();
            let (newton, report) = invert_newton(&as_generic, &lam, &NewtonConfig::default()).unwrap();
            assert!(report.max_residual() <= 1e-10);
            for (a, b) in closed.epochs().iter().zip(newton.epochs()) {
                assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn newton_failure_reports() {
        let kernel = crate::kernel::PowerLaw::new(1.0, 2.0).unwrap();
        let lam = CompensatorVector::new(vec![0.2, 0.3], 0.5).unwrap();
        let tight = NewtonConfig { tolerance: 1e-10, max_iterations: 1 };
        match invert_newton(&kernel, &lam, &tight) {
            Err(Error::Inversion { index, report, .. }) => {
                // a lone parent is solved exactly by the initial bracket
                assert_eq!(index, 2);
                assert_eq!(report.residuals.len(), index);
                assert_eq!(report.method, InversionMethod::NewtonBisection);
            }
            other => panic!("expected inversion failure, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let kernel = Kernel::power_law(1.0, 2.0).unwrap();
        for _ in 0..500 {
            let n = rng.random_range(1..12);
            let c = simulate_cluster(&kernel, &mut rng, Some(n)).unwrap();
            let lam = compensator_at_epochs(&kernel, &c);
            assert!(lam.in_polytope());
            let back = invert_compensator(&kernel, &lam).unwrap();
            for (a, b) in c.epochs().iter().zip(back.epochs()) {
                assert!((a - b).abs() <= 1e-8 * a.max(1.0));
            }
        }
    }

    #[test]
    fn conditioned_sizes_are_honored() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let kernel = Kernel::exponential(0.9, 1.0).unwrap();
        for n in [1, 2, 17, 100] {
            let c = simulate_cluster(&kernel, &mut rng, Some(n)).unwrap();
            assert_eq!(c.size() as u64, n);
            assert!(c.is_strictly_increasing());
        }
        assert!(simulate_cluster(&kernel, &mut rng, Some(0)).is_err());
        assert_eq!(simulate_cluster(&kernel, &mut rng, Some(1)).unwrap().duration(), 0.0);
    }

    #[test]
    fn dassios_zhao_rejects_unstable() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(dassios_zhao_cluster(4.0, 4.0, &mut rng).is_err());
        assert!(dassios_zhao_cluster(0.0, 4.0, &mut rng).is_err());
    }

    #[test]
    fn dassios_zhao_singleton_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 200_000;
        let singles = (0..n)
            .filter(|_| dassios_zhao_cluster(3.0, 4.0, &mut rng).unwrap().size() == 1)
            .count() as f64
            / n as f64;
        let p = (-0.75f64).exp();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((singles - p).abs() < 4.0 * se, "{singles} vs {p}");
    }

    #[test]
    fn poisson_race_empty_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 200_000;
        let empty = (0..n)
            .filter(|_| sample_compensator_poisson_race(0.75, &mut rng).unwrap().is_empty())
            .count() as f64
            / n as f64;
        let p = (-0.75f64).exp();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((empty - p).abs() < 4.0 * se);
        assert!(sample_compensator_poisson_race(1.0, &mut rng).is_err());
    }

    #[test]
    fn branching_root_offspring_is_poisson() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let kernel = Kernel::exponential(3.0, 4.0).unwrap();
        let n = 100_000;
        let mut counts = [0u64; 12];
        for _ in 0..n {
            let tree = branching_tree(&kernel, &mut rng).unwrap();
            counts[tree.children_of(0).min(11)] += 1;
        }
        let mean = counts.iter().enumerate().map(|(k, &c)| k as f64 * c as f64).sum::<f64>() / n as f64;
        assert!((mean - 0.75).abs() < 4.0 * (0.75f64 / n as f64).sqrt());
        let p0 = counts[0] as f64 / n as f64;
        assert!((p0 - (-0.75f64).exp()).abs() < 0.006);
    }
}
