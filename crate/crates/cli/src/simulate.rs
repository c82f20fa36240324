use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use hawkes_cluster::cluster::{branching_cluster, dassios_zhao_cluster, poisson_race_cluster, simulate_cluster};
use hawkes_cluster::kernel::Kernel;
use hawkes_cluster::markov::sample_duration_theorem2;
use hawkes_cluster::replication_rng;
use hawkes_cluster::stats::{summarize, EmpiricalSample, Summary};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::value::RawValue;

use crate::config::{Format, KernelSpec, Method, RunConfig};
use crate::CliError;

/// Replications generated per parallel batch before writing.
const CHUNK: u64 = 4096;

/// One simulated cluster. `epochs` is `None` for the closed-form duration
/// sampler, which does not produce event times.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub replication: u64,
    pub size: u64,
    pub duration: f64,
    pub epochs: Option<Vec<f64>>,
}

/// `x` with 17 significant digits, which round-trips any `f64`.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

struct Sig17(f64);

impl Serialize for Sig17 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(sig17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

#[derive(Serialize)]
struct JsonRecord<'a> {
    replication: u64,
    seed: u64,
    #[serde(rename = "N")]
    size: u64,
    tau: Sig17,
    method: &'a str,
    kernel: &'a str,
    epochs: Option<Vec<Sig17>>,
}

pub fn simulate_one(cfg: &RunConfig, kernel: &Kernel, replication: u64) -> Result<Record, CliError> {
    let mut rng = replication_rng(cfg.seed, replication);
    let cluster = match cfg.method {
        Method::Parking => simulate_cluster(kernel, &mut rng, cfg.cond_size)?,
        Method::Branching => branching_cluster(kernel, &mut rng)?,
        Method::PoissonRace => poisson_race_cluster(kernel, &mut rng)?,
        Method::DassiosZhao | Method::Theorem2 => {
            let KernelSpec::Exponential { alpha, beta } = cfg.kernel else {
                return Err(CliError::Config(format!("method {} needs the exponential kernel", cfg.method)));
            };
            if cfg.method == Method::Theorem2 {
                let d = sample_duration_theorem2(alpha, beta, &mut rng, cfg.cond_size)?;
                return Ok(Record { replication, size: d.size, duration: d.tau, epochs: None });
            }
            dassios_zhao_cluster(alpha, beta, &mut rng)?
        }
    };
    Ok(Record {
        replication,
        size: cluster.size() as u64,
        duration: cluster.duration(),
        epochs: Some(cluster.into_epochs()),
    })
}

/// Aggregates written next to the records.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub records: u64,
    /// Cluster size → number of replications.
    pub size_histogram: BTreeMap<u64, u64>,
    pub size: SummaryJson,
    pub duration: SummaryJson,
    pub threads: usize,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryJson {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub quantiles: BTreeMap<String, f64>,
}

impl From<Summary> for SummaryJson {
    fn from(s: Summary) -> Self {
        SummaryJson {
            count: s.count,
            mean: s.mean,
            variance: s.variance,
            std_error: s.std_error,
            quantiles: s.quantiles.into_iter().map(|(p, v)| (format!("{p}"), v)).collect(),
        }
    }
}

pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))
}

enum Sink<W: Write> {
    Csv(Box<csv::Writer<W>>),
    Jsonl(std::io::BufWriter<W>),
}

impl<W: Write> Sink<W> {
    fn new(format: Format, out: W) -> Result<Self, CliError> {
        Ok(match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(["replication", "seed", "N", "tau", "method", "kernel", "epochs"])?;
                Sink::Csv(Box::new(w))
            }
            Format::Jsonl => Sink::Jsonl(std::io::BufWriter::new(out)),
        })
    }

    fn write(&mut self, rec: &Record, cfg: &RunConfig, kernel: &str) -> Result<(), CliError> {
        match self {
            Sink::Csv(w) => {
                // epochs as one ';'-separated field; empty when not produced
                let epochs = rec
                    .epochs
                    .as_ref()
                    .map(|e| e.iter().map(|&x| sig17(x)).collect::<Vec<_>>().join(";"))
                    .unwrap_or_default();
                w.write_record([
                    rec.replication.to_string(),
                    cfg.seed.to_string(),
                    rec.size.to_string(),
                    sig17(rec.duration),
                    cfg.method.to_string(),
                    kernel.to_string(),
                    epochs,
                ])?;
            }
            Sink::Jsonl(w) => {
                let json = JsonRecord {
                    replication: rec.replication,
                    seed: cfg.seed,
                    size: rec.size,
                    tau: Sig17(rec.duration),
                    method: cfg.method.name(),
                    kernel,
                    epochs: rec.epochs.as_ref().map(|e| e.iter().map(|&x| Sig17(x)).collect()),
                };
                serde_json::to_writer(&mut *w, &json)?;
                w.write_all(b"\n")?;
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<(), CliError> {
        match self {
            Sink::Csv(mut w) => w.flush()?,
            Sink::Jsonl(mut w) => w.flush()?,
        }
        Ok(())
    }
}

/// Runs the campaign and streams records to `out`. Record output depends only
/// on the configuration, never on the thread count.
pub fn cmd_simulate<W: Write>(cfg: &RunConfig, out: W) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    let kernel = cfg.kernel.build()?;
    let pool = thread_pool(cfg.threads)?;
    let started = Instant::now();
    let kernel_name = cfg.kernel.to_string();
    let mut sink = Sink::new(cfg.format, out)?;
    let mut histogram = BTreeMap::new();
    let cap = cfg.reps.min(1 << 24) as usize;
    let (mut sizes, mut durations) = (Vec::with_capacity(cap), Vec::with_capacity(cap));

    let mut start = 0;
    while start < cfg.reps {
        let end = (start + CHUNK).min(cfg.reps);
        let batch: Vec<Record> = pool.install(|| {
            (start..end).into_par_iter().map(|r| simulate_one(cfg, &kernel, r)).collect::<Result<_, _>>()
        })?;
        for rec in &batch {
            *histogram.entry(rec.size).or_insert(0u64) += 1;
            sizes.push(rec.size as f64);
            durations.push(rec.duration);
            sink.write(rec, cfg, &kernel_name)?;
        }
        start = end;
    }
    sink.finish()?;

    let summary = |v: Vec<f64>| -> Result<SummaryJson, CliError> { Ok(summarize(&EmpiricalSample::new(v)?).into()) };
    Ok(RunSummary {
        config: cfg.clone(),
        records: cfg.reps,
        size_histogram: histogram,
        size: summary(sizes)?,
        duration: summary(durations)?,
        threads: pool.current_num_threads(),
        elapsed_seconds: started.elapsed().as_secs_f64(),
    })
}
