//! WebAssembly bindings for the demo page in `www/`.
//!
//! Three operations are exposed: simulate one cluster with its intensity
//! path, compare duration histograms from the closed-form sampler and the
//! parking-function simulator, and tally polytope regions.

use hawkes_cluster::combinat::{enumerate_dyck, region_probability};
use hawkes_cluster::kernel::{ExcitationKernel, Kernel};
use hawkes_cluster::markov::sample_duration_theorem2;
use hawkes_cluster::polytope::{classify_region, sample_compensator_points};
use hawkes_cluster::stats::{ks_statistic, quantile, EmpiricalSample};
use hawkes_cluster::{replication_rng, simulate_cluster};
use wasm_bindgen::prelude::*;

/// Largest cluster drawn for plotting; bigger draws are rejected.
pub const MAX_PLOT_EVENTS: u64 = 20_000;

fn kernel(family: &str, p1: f64, p2: f64) -> Result<Kernel, String> {
    match family {
        "exponential" => Kernel::exponential(p1, p2),
        "powerlaw" => Kernel::power_law(p1, p2),
        _ => return Err(format!("unknown kernel family {family:?}")),
    }
    .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub struct ClusterView {
    epochs: Vec<f64>,
    grid: Vec<f64>,
    intensity: Vec<f64>,
}

#[wasm_bindgen]
impl ClusterView {
    #[wasm_bindgen(getter)]
    pub fn epochs(&self) -> Vec<f64> {
        self.epochs.clone()
    }

    /// Time points of the intensity path.
    #[wasm_bindgen(getter)]
    pub fn grid(&self) -> Vec<f64> {
        self.grid.clone()
    }

    /// `Σ_{A_j ≤ t} g(t − A_j)` on `grid`.
    #[wasm_bindgen(getter)]
    pub fn intensity(&self) -> Vec<f64> {
        self.intensity.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn size(&self) -> usize {
        self.epochs.len()
    }

    #[wasm_bindgen(getter)]
    pub fn duration(&self) -> f64 {
        self.epochs.last().copied().unwrap_or(0.0)
    }
}

/// Draws one cluster (`cond_size = 0` leaves the size random) and evaluates
/// its intensity on `points` grid points, plus both one-sided limits at each
/// epoch so the jumps render sharply.
#[wasm_bindgen]
pub fn simulate(family: &str, p1: f64, p2: f64, cond_size: u32, seed: u64, points: u32) -> Result<ClusterView, String> {
    let k = kernel(family, p1, p2)?;
    let cond = (cond_size > 0).then_some(cond_size as u64);
    if cond.is_some_and(|n| n > MAX_PLOT_EVENTS) {
        return Err(format!("conditioned size above {MAX_PLOT_EVENTS} is too large to plot"));
    }
    let cluster = simulate_cluster(&k, &mut replication_rng(seed, 0), cond).map_err(|e| e.to_string())?;
    if cluster.size() as u64 > MAX_PLOT_EVENTS {
        return Err(format!("drew a cluster of {} events; try another seed", cluster.size()));
    }
    let epochs = cluster.into_epochs();
    let end = epochs.last().copied().unwrap_or(0.0);
    let span = if end > 0.0 { end * 1.15 } else { 1.0 };
    let n = points.max(2) as usize;
    let mut grid: Vec<f64> = (0..n).map(|i| span * i as f64 / (n - 1) as f64).collect();
    for &a in &epochs {
        grid.push(a);
        grid.push(a - span * 1e-9);
    }
    grid.retain(|&t| t >= 0.0);
    grid.sort_by(f64::total_cmp);
    let intensity = grid
        .iter()
        .map(|&t| epochs.iter().take_while(|&&a| a <= t).map(|&a| k.rate(t - a)).sum())
        .collect();
    Ok(ClusterView { epochs, grid, intensity })
}

#[wasm_bindgen]
pub struct DurationComparison {
    edges: Vec<f64>,
    closed_form: Vec<u32>,
    simulated: Vec<u32>,
    ks: f64,
}

#[wasm_bindgen]
impl DurationComparison {
    /// `bins + 1` bin edges; the last bin also collects the overflow.
    #[wasm_bindgen(getter)]
    pub fn edges(&self) -> Vec<f64> {
        self.edges.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn closed_form(&self) -> Vec<u32> {
        self.closed_form.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn simulated(&self) -> Vec<u32> {
        self.simulated.clone()
    }

    /// Two-sample KS distance between the two duration samples.
    #[wasm_bindgen(getter)]
    pub fn ks(&self) -> f64 {
        self.ks
    }
}

/// Durations of `reps` exponential-kernel clusters from the closed-form
/// exponential-sum sampler and from the parking-function simulator.
#[wasm_bindgen]
pub fn duration_histograms(
    alpha: f64,
    beta: f64,
    cond_size: u32,
    reps: u32,
    bins: u32,
    seed: u64,
) -> Result<DurationComparison, String> {
    if reps == 0 || bins == 0 {
        return Err("need at least one replication and one bin".into());
    }
    let k = Kernel::exponential(alpha, beta).map_err(|e| e.to_string())?;
    let cond = (cond_size > 0).then_some(cond_size as u64);
    let mut rng = replication_rng(seed, 1);
    let mut a = Vec::with_capacity(reps as usize);
    let mut b = Vec::with_capacity(reps as usize);
    for _ in 0..reps {
        a.push(sample_duration_theorem2(alpha, beta, &mut rng, cond).map_err(|e| e.to_string())?.tau);
        b.push(simulate_cluster(&k, &mut rng, cond).map_err(|e| e.to_string())?.duration());
    }
    let ks = ks_statistic(&a, &b).map_err(|e| e.to_string())?;
    // clip the long right tail at the pooled 99th percentile
    let pooled = EmpiricalSample::new(a.iter().chain(&b).copied().collect()).map_err(|e| e.to_string())?;
    let top = quantile(&pooled, 0.99).max(f64::MIN_POSITIVE);
    let edges: Vec<f64> = (0..=bins).map(|i| top * i as f64 / bins as f64).collect();
    let count = |v: &[f64]| {
        let mut h = vec![0u32; bins as usize];
        for &x in v {
            let i = ((x / top) * bins as f64) as usize;
            h[i.min(bins as usize - 1)] += 1;
        }
        h
    };
    Ok(DurationComparison { edges, closed_form: count(&a), simulated: count(&b), ks })
}

#[wasm_bindgen]
pub struct RegionTally {
    labels: Vec<String>,
    observed: Vec<f64>,
    exact: Vec<f64>,
    points: Vec<f64>,
}

#[wasm_bindgen]
impl RegionTally {
    /// Dyck paths written like `1,1,2`.
    #[wasm_bindgen(getter)]
    pub fn labels(&self) -> Vec<String> {
        self.labels.clone()
    }

    /// Observed region frequencies, aligned with `labels`.
    #[wasm_bindgen(getter)]
    pub fn observed(&self) -> Vec<f64> {
        self.observed.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn exact(&self) -> Vec<f64> {
        self.exact.clone()
    }

    /// For `k = 2`, the first few thousand points as `x1, x2` pairs.
    #[wasm_bindgen(getter)]
    pub fn points(&self) -> Vec<f64> {
        self.points.clone()
    }
}

/// Samples `samples` points uniformly from the compensator polytope of
/// dimension `k` and counts how many land in each Dyck-path region.
#[wasm_bindgen]
pub fn region_frequencies(k: u32, rho: f64, samples: u32, seed: u64) -> Result<RegionTally, String> {
    if !(1..=7).contains(&k) {
        return Err("choose k between 1 and 7".into());
    }
    let regions = enumerate_dyck(k as usize).map_err(|e| e.to_string())?;
    let mut counts = vec![0u64; regions.len()];
    let mut points = Vec::new();
    let mut rng = replication_rng(seed, 2);
    for i in 0..samples {
        let lam = sample_compensator_points(k as usize, rho, &mut rng).map_err(|e| e.to_string())?;
        let d = classify_region(&lam).map_err(|e| e.to_string())?;
        let idx = regions.iter().position(|r| *r == d).expect("every draw lands in a region");
        counts[idx] += 1;
        if k == 2 && i < 4000 {
            points.extend_from_slice(lam.values());
        }
    }
    let total = samples.max(1) as f64;
    Ok(RegionTally {
        labels: regions
            .iter()
            .map(|d| d.entries().iter().map(u32::to_string).collect::<Vec<_>>().join(","))
            .collect(),
        observed: counts.iter().map(|&c| c as f64 / total).collect(),
        exact: regions.iter().map(region_probability).collect(),
        points,
    })
}
