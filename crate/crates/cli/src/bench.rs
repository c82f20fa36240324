use std::time::{Duration, Instant};

use hawkes_cluster::kernel::Kernel;

use crate::config::{KernelSpec, Method, RunConfig};
use crate::simulate::simulate_one;
use crate::CliError;

/// Table-1 style grid: one row per method, one column per kernel.
#[derive(Debug, Clone)]
pub struct BenchTable {
    pub kernels: Vec<KernelSpec>,
    pub methods: Vec<Method>,
    /// `cells[method][kernel]`; `None` where the method does not apply.
    pub cells: Vec<Vec<Option<Duration>>>,
}

/// The exponential family `(4^m − 1) e^{−4^m x}` and the power-law family
/// `c = 2^m − 1, d = 2^m`, for `m = 1..=4`.
pub fn default_kernels() -> Vec<KernelSpec> {
    let exp = (1..=4).map(|m| {
        let b = 4f64.powi(m);
        KernelSpec::Exponential { alpha: b - 1.0, beta: b }
    });
    let pow = (1..=4).map(|m| {
        let d = 2f64.powi(m);
        KernelSpec::Powerlaw { c: d - 1.0, d }
    });
    exp.chain(pow).collect()
}

pub fn default_methods() -> Vec<Method> {
    vec![Method::Parking, Method::DassiosZhao, Method::Branching]
}

/// Wall clock for `reps` clusters: one warm-up pass, then the median of three
/// timed passes. Runs single-threaded so that columns are comparable.
pub fn cmd_bench(kernels: &[KernelSpec], methods: &[Method], reps: u64, seed: u64) -> Result<BenchTable, CliError> {
    let mut cells = Vec::with_capacity(methods.len());
    if reps == 0 {
        return Ok(BenchTable { kernels: Vec::new(), methods: Vec::new(), cells });
    }
    for &method in methods {
        let mut row = Vec::with_capacity(kernels.len());
        for spec in kernels {
            if method.needs_exponential() && !spec.is_exponential() {
                row.push(None);
                continue;
            }
            let kernel = spec.build()?;
            let cfg = RunConfig {
                kernel: *spec,
                method,
                reps,
                cond_size: None,
                seed,
                out: None,
                summary: None,
                format: Default::default(),
                threads: Some(1),
            };
            row.push(Some(time_method(&cfg, &kernel)?));
        }
        cells.push(row);
    }
    Ok(BenchTable { kernels: kernels.to_vec(), methods: methods.to_vec(), cells })
}

fn time_method(cfg: &RunConfig, kernel: &Kernel) -> Result<Duration, CliError> {
    let pass = || -> Result<Duration, CliError> {
        let t = Instant::now();
        for r in 0..cfg.reps {
            std::hint::black_box(simulate_one(cfg, kernel, r)?);
        }
        Ok(t.elapsed())
    };
    pass()?;
    let mut runs = [pass()?, pass()?, pass()?];
    runs.sort();
    Ok(runs[1])
}

impl BenchTable {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// CSV with kernels as columns; inapplicable pairs are marked `×`.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["method".to_string()];
        header.extend(self.kernels.iter().map(kernel_label));
        w.write_record(&header)?;
        for (method, row) in self.methods.iter().zip(&self.cells) {
            let mut rec = vec![method.to_string()];
            rec.extend(row.iter().map(|c| match c {
                Some(d) => format!("{:.4}", d.as_secs_f64()),
                None => "×".to_string(),
            }));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Column header, e.g. `3e^(-4x)` or `powerlaw(1,2)`.
fn kernel_label(spec: &KernelSpec) -> String {
    match spec {
        KernelSpec::Exponential { alpha, beta } => format!("{alpha}e^(-{beta}x)"),
        KernelSpec::Powerlaw { .. } => spec.to_string(),
    }
}
