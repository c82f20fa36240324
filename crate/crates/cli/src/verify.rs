use std::collections::BTreeMap;
use std::fmt;

use clap::ValueEnum;
use hawkes_cluster::cluster::{
    branching_cluster, dassios_zhao_cluster, poisson_race_cluster, sample_compensator_poisson_race, simulate_cluster,
};
use hawkes_cluster::combinat::{
    borel_pmf, enumerate_dyck, enumerate_parking_functions, is_parking_function, parking_function_count,
    region_probability, sample_borel, sample_parking_function,
};
use hawkes_cluster::kernel::{ExcitationKernel, Kernel};
use hawkes_cluster::markov::sample_duration_theorem2;
use hawkes_cluster::polytope::{classify_region, rejection_sample_polytope, sample_compensator_points};
use hawkes_cluster::seeding::ReplicationRng;
use hawkes_cluster::stats::{
    chi_square_gof, chi_square_homogeneity, ks_one_sample, ks_two_sample, merge_tail, EmpiricalSample,
};
use hawkes_cluster::{replication_rng, Cluster};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{KernelSpec, Method};
use crate::CliError;

/// Significance level behind the KS and chi-square thresholds.
pub const LEVEL: f64 = 1e-3;

/// Smallest budget at which a Monte Carlo check is run.
pub const MIN_BUDGET: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Combinat,
    Polytope,
    Markov,
    CrossSampler,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub statistic: Option<f64>,
    pub threshold: String,
    pub status: Status,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    /// Free-form tables printed after the checks (e.g. pairwise KS).
    #[serde(skip)]
    pub tables: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn count(&self, status: Status) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    fn exact(&mut self, suite: &'static str, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            suite,
            name: name.into(),
            statistic: None,
            threshold: detail.into(),
            status: if ok { Status::Pass } else { Status::Fail },
        });
    }

    fn at_most(&mut self, suite: &'static str, name: impl Into<String>, value: f64, limit: f64) {
        self.checks.push(Check {
            suite,
            name: name.into(),
            statistic: Some(value),
            threshold: format!("≤ {limit:.4}"),
            status: if value <= limit { Status::Pass } else { Status::Fail },
        });
    }

    fn p_value(&mut self, suite: &'static str, name: impl Into<String>, p: f64) {
        self.checks.push(Check {
            suite,
            name: name.into(),
            statistic: Some(p),
            threshold: format!("p > {LEVEL}"),
            status: if p > LEVEL { Status::Pass } else { Status::Fail },
        });
    }

    fn skip(&mut self, suite: &'static str, name: impl Into<String>, need: usize) {
        self.checks.push(Check {
            suite,
            name: name.into(),
            statistic: None,
            threshold: format!("insufficient power: budget < {need}"),
            status: Status::Skipped,
        });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<14} {:<46} {:>12}  {:<34} status", "suite", "check", "statistic", "threshold")?;
        for c in &self.checks {
            let stat = c.statistic.map(|s| format!("{s:.6}")).unwrap_or_else(|| "-".into());
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            writeln!(f, "{:<14} {:<46} {:>12}  {:<34} {status}", c.suite, c.name, stat, c.threshold)?;
        }
        for t in &self.tables {
            writeln!(f)?;
            f.write_str(t)?;
        }
        writeln!(
            f,
            "\n{} passed, {} failed, {} skipped",
            self.count(Status::Pass),
            self.count(Status::Fail),
            self.count(Status::Skipped)
        )
    }
}

/// Two-sample KS critical value at [`LEVEL`].
pub fn ks_critical(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (-(LEVEL / 2.0).ln() / 2.0).sqrt() * ((n + m) / (n * m)).sqrt()
}

fn sample(v: Vec<f64>) -> Result<EmpiricalSample, CliError> {
    Ok(EmpiricalSample::new(v)?)
}

struct Ctx<'a> {
    seed: u64,
    budget: usize,
    pool: &'a rayon::ThreadPool,
}

impl Ctx<'_> {
    /// `n` independent draws; draw `r` of stream `s` always sees the same
    /// random stream, whatever the thread count.
    fn draws<T, F>(&self, stream: u64, n: usize, f: F) -> Result<Vec<T>, CliError>
    where
        T: Send,
        F: Fn(&mut ReplicationRng) -> Result<T, CliError> + Sync,
    {
        let base = self.seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        self.pool.install(|| (0..n as u64).into_par_iter().map(|r| f(&mut replication_rng(base, r))).collect())
    }
}

pub fn cmd_verify(
    suite: Suite,
    seed: u64,
    budget: usize,
    kernel: Option<KernelSpec>,
    threads: Option<usize>,
) -> Result<VerifyReport, CliError> {
    let pool = crate::simulate::thread_pool(threads)?;
    let ctx = Ctx { seed, budget, pool: &pool };
    let mut report = VerifyReport::default();
    let all = suite == Suite::All;
    if all || suite == Suite::Combinat {
        combinat_suite(&ctx, &mut report)?;
    }
    if all || suite == Suite::Polytope {
        polytope_suite(&ctx, &mut report)?;
    }
    if all || suite == Suite::Markov {
        markov_suite(&ctx, &mut report)?;
    }
    if all || suite == Suite::CrossSampler {
        let spec = kernel.unwrap_or(KernelSpec::Exponential { alpha: 3.0, beta: 4.0 });
        cross_sampler_suite(&ctx, spec, &mut report)?;
    }
    Ok(report)
}

fn combinat_suite(ctx: &Ctx, report: &mut VerifyReport) -> Result<(), CliError> {
    const S: &str = "combinat";
    for k in 1..=6usize {
        let pfs = enumerate_parking_functions(k)?;
        let ok = pfs.len() as u128 == parking_function_count(k) && pfs.iter().all(|p| is_parking_function(p.entries()));
        report.exact(S, format!("|PF_{k}| = (k+1)^(k-1)"), ok, format!("{} = {}", pfs.len(), parking_function_count(k)));
        let dyck = enumerate_dyck(k)?.len() as u64;
        let catalan = (0..k as u64).fold(1u64, |c, i| c * 2 * (2 * i + 1) / (i + 2));
        report.exact(S, format!("|Dyck_{k}| = Catalan({k})"), dyck == catalan, format!("{dyck} = {catalan}"));
    }

    let n = ctx.budget;
    if n < MIN_BUDGET {
        report.skip(S, "uniform parking functions, k = 3", MIN_BUDGET);
    } else {
        let all = enumerate_parking_functions(3)?;
        let index: BTreeMap<Vec<u32>, usize> = all.iter().enumerate().map(|(i, p)| (p.entries().to_vec(), i)).collect();
        let hits = ctx.draws(1, n, |rng| Ok(index[sample_parking_function(3, rng)?.entries()]))?;
        let mut counts = vec![0u64; all.len()];
        for h in hits {
            counts[h] += 1;
        }
        let chi = chi_square_gof(&counts, &[1.0 / 16.0; 16])?;
        report.p_value(S, "uniform parking functions, k = 3 (chi-square)", chi.p_value);
    }

    for (i, rho) in [0.5, 0.75].into_iter().enumerate() {
        let name = format!("Borel sizes, rho = {rho} (chi-square)");
        if n < MIN_BUDGET {
            report.skip(S, name, MIN_BUDGET);
            continue;
        }
        let sizes = ctx.draws(2 + i as u64, n, |rng| Ok(sample_borel(rho, rng)?))?;
        report.p_value(S, name, borel_p_value(&sizes, rho)?);
    }
    Ok(())
}

fn borel_p_value(sizes: &[u64], rho: f64) -> Result<f64, CliError> {
    let max = *sizes.iter().max().expect("nonempty") as usize;
    let mut hist = vec![0u64; max];
    for &s in sizes {
        hist[s as usize - 1] += 1;
    }
    let pmf: Vec<f64> = (1..=max as u64).map(|k| borel_pmf(rho, k)).collect::<Result<_, _>>()?;
    let (obs, exp) = merge_tail(&hist, &pmf, 5.0);
    Ok(chi_square_gof(&obs, &exp)?.p_value)
}

fn polytope_suite(ctx: &Ctx, report: &mut VerifyReport) -> Result<(), CliError> {
    const S: &str = "polytope";
    let n = ctx.budget;
    let regions = enumerate_dyck(3)?;
    if n < MIN_BUDGET {
        report.skip(S, "region frequencies, k = 3", MIN_BUDGET);
    } else {
        let classes = ctx.draws(10, n, |rng| {
            let lam = sample_compensator_points(3, 0.5, rng)?;
            Ok(classify_region(&lam)?.entries().to_vec())
        })?;
        let mut freq: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        for c in classes {
            *freq.entry(c).or_default() += 1;
        }
        for d in &regions {
            let p = region_probability(d);
            let f = freq.get(d.entries()).copied().unwrap_or(0) as f64 / n as f64;
            let z = (f - p) / (p * (1.0 - p) / n as f64).sqrt();
            report.at_most(S, format!("region {:?}: freq {f:.5} vs {p:.5}, |z|", d.entries()), z.abs(), 4.0);
        }
    }

    for (i, k) in [1usize, 2, 3, 5].into_iter().enumerate() {
        let name = format!("spine vs rejection, k = {k}, max coordinate KS");
        if n < MIN_BUDGET {
            report.skip(S, name, MIN_BUDGET);
            continue;
        }
        let a = ctx.draws(20 + i as u64, n, |rng| Ok(sample_compensator_points(k, 0.6, rng)?.into_values()))?;
        let b = ctx.draws(30 + i as u64, n, |rng| Ok(rejection_sample_polytope(k, 0.6, rng)?.into_values()))?;
        let mut worst: f64 = 0.0;
        for j in 0..k {
            let col = |v: &[Vec<f64>]| sample(v.iter().map(|x| x[j]).collect());
            worst = worst.max(ks_two_sample(&col(&a)?, &col(&b)?));
        }
        report.at_most(S, name, worst, ks_critical(n, n));
    }

    let violations: u64 = ctx
        .draws(40, n, |rng| {
            use rand::Rng;
            let k = rng.random_range(1..=30);
            let rho = rng.random_range(0.01..0.99);
            let lam = if rng.random_bool(0.5) {
                sample_compensator_points(k, rho, rng)?
            } else {
                sample_compensator_poisson_race(rho, rng)?
            };
            let bad = !lam.in_polytope() || (!lam.is_empty() && !is_parking_function(classify_region(&lam)?.entries()));
            Ok(bad as u64)
        })?
        .into_iter()
        .sum();
    report.exact(S, format!("polytope and parking invariants over {n} vectors"), violations == 0, format!("{violations} violations"));
    Ok(())
}

fn markov_suite(ctx: &Ctx, report: &mut VerifyReport) -> Result<(), CliError> {
    const S: &str = "markov";
    let n = ctx.budget;
    let (alpha, beta) = (3.0, 4.0);
    let kernel = Kernel::exponential(alpha, beta)?;
    let mut cases: Vec<(String, Option<u64>)> = vec![("closed-form vs parking duration KS".into(), None)];
    for k in [2, 3, 5] {
        cases.push((format!("closed-form vs parking duration | N = {k}, KS"), Some(k)));
    }
    for (i, (name, cond)) in cases.into_iter().enumerate() {
        if n < MIN_BUDGET {
            report.skip(S, name, MIN_BUDGET);
            continue;
        }
        let a = ctx.draws(50 + i as u64, n, |rng| Ok(sample_duration_theorem2(alpha, beta, rng, cond)?.tau))?;
        let b = ctx.draws(60 + i as u64, n, |rng| Ok(simulate_cluster(&kernel, rng, cond)?.duration()))?;
        report.at_most(S, name, ks_two_sample(&sample(a)?, &sample(b)?), ks_critical(n, n));
    }

    if n < MIN_BUDGET {
        report.skip(S, "duration | N = 2 vs Exp(beta), KS", MIN_BUDGET);
        report.skip(S, "scaled durations (3,4) vs (15,20), KS", MIN_BUDGET);
        return Ok(());
    }
    let two = ctx.draws(70, n, |rng| Ok(sample_duration_theorem2(alpha, beta, rng, Some(2))?.tau))?;
    let d = ks_one_sample(&sample(two)?, |x| 1.0 - (-beta * x).exp());
    report.at_most(S, "duration | N = 2 vs Exp(beta), KS", d, (-(LEVEL / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt());

    let fast = Kernel::exponential(15.0, 20.0)?;
    let a = ctx.draws(71, n, |rng| Ok(beta * simulate_cluster(&kernel, rng, None)?.duration()))?;
    let b = ctx.draws(72, n, |rng| Ok(20.0 * simulate_cluster(&fast, rng, None)?.duration()))?;
    report.at_most(S, "scaled durations (3,4) vs (15,20), KS", ks_two_sample(&sample(a)?, &sample(b)?), ks_critical(n, n));
    Ok(())
}

fn cross_sampler_suite(ctx: &Ctx, spec: KernelSpec, report: &mut VerifyReport) -> Result<(), CliError> {
    const S: &str = "cross-sampler";
    let n = ctx.budget;
    let kernel = spec.build()?;
    let methods: Vec<Method> = [Method::Parking, Method::Branching, Method::DassiosZhao, Method::PoissonRace]
        .into_iter()
        .filter(|m| !m.needs_exponential() || spec.is_exponential())
        .collect();
    if n < MIN_BUDGET {
        report.skip(S, format!("pairwise duration KS, {spec}"), MIN_BUDGET);
        return Ok(());
    }
    let mut runs: Vec<(Method, Vec<u64>, EmpiricalSample)> = Vec::new();
    for (i, &m) in methods.iter().enumerate() {
        let clusters: Vec<(u64, f64)> = ctx.draws(80 + i as u64, n, |rng| {
            let c = draw_cluster(m, &spec, &kernel, rng)?;
            Ok((c.size() as u64, c.duration()))
        })?;
        let sizes = clusters.iter().map(|c| c.0).collect::<Vec<_>>();
        let taus = sample(clusters.iter().map(|c| c.1).collect())?;
        runs.push((m, sizes, taus));
    }

    let mut table = format!("pairwise duration KS, {spec}, {n} clusters per sampler\n{:<14}", "");
    for (m, ..) in &runs {
        table += &format!("{:>14}", m.name());
    }
    table.push('\n');
    for (a, _, ta) in &runs {
        table += &format!("{:<14}", a.name());
        for (_, _, tb) in &runs {
            table += &format!("{:>14.5}", ks_two_sample(ta, tb));
        }
        table.push('\n');
    }
    report.tables.push(table);

    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            let (a, sa, ta) = &runs[i];
            let (b, sb, tb) = &runs[j];
            report.at_most(S, format!("{a} vs {b}: duration KS"), ks_two_sample(ta, tb), ks_critical(n, n));
            let chi = chi_square_homogeneity(&histogram(sa), &histogram(sb))?;
            report.p_value(S, format!("{a} vs {b}: size chi-square"), chi.p_value);
        }
    }
    let rho = kernel.branching_ratio();
    for (m, sizes, _) in &runs {
        report.p_value(S, format!("{m}: sizes vs Borel({rho})"), borel_p_value(sizes, rho)?);
    }
    Ok(())
}

fn draw_cluster(m: Method, spec: &KernelSpec, kernel: &Kernel, rng: &mut ReplicationRng) -> Result<Cluster, CliError> {
    Ok(match (m, spec) {
        (Method::Branching, _) => branching_cluster(kernel, rng)?,
        (Method::PoissonRace, _) => poisson_race_cluster(kernel, rng)?,
        (Method::DassiosZhao, KernelSpec::Exponential { alpha, beta }) => dassios_zhao_cluster(*alpha, *beta, rng)?,
        _ => simulate_cluster(kernel, rng, None)?,
    })
}

fn histogram(sizes: &[u64]) -> Vec<u64> {
    let max = sizes.iter().copied().max().unwrap_or(1) as usize;
    let mut h = vec![0u64; max];
    for &s in sizes {
        h[s as usize - 1] += 1;
    }
    h
}
