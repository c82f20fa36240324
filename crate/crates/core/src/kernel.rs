//! Excitation kernels.
//!
//! A kernel supplies the pointwise excitation `g`, its integral `G(x) = ∫₀ˣ g`,
//! the branching ratio `rho = G(∞)`, and the quantile function of the
//! normalized offspring-offset law `g / rho`. Two families ship with the crate;
//! anything else can implement [`ExcitationKernel`] and inherit a bisection
//! fallback for the quantile.

use std::fmt;

use crate::error::{domain, Error, Result};
use crate::{Cluster, CompensatorVector};

/// Absolute tolerance on the numeric offset quantile.
pub const QUANTILE_TOL: f64 = 1e-10;

pub trait ExcitationKernel: fmt::Debug + Send + Sync {
    /// `g(x)` for `x >= 0`, unchecked.
    fn rate(&self, x: f64) -> f64;

    /// `G(x)` for `x >= 0`, unchecked.
    fn integrated(&self, x: f64) -> f64;

    fn branching_ratio(&self) -> f64;

    /// Inverse of `x ↦ G(x) / rho` for `u` in `(0, 1)`, unchecked.
    ///
    /// The default brackets the root by doubling and bisects it down to
    /// [`QUANTILE_TOL`].
    fn offset_quantile(&self, u: f64) -> f64 {
        let rho = self.branching_ratio();
        let target = u * rho;
        let mut lo = 0.0;
        let mut hi = 1.0;
        while self.integrated(hi) < target {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return f64::INFINITY;
            }
        }
        for _ in 0..2000 {
            if hi - lo <= QUANTILE_TOL {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.integrated(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `(alpha, beta)` when the kernel is `alpha * exp(-beta x)`.
    fn exponential_params(&self) -> Option<(f64, f64)> {
        None
    }

    /// Short description used in output records.
    fn label(&self) -> String;

    fn eval_g(&self, x: f64) -> Result<f64> {
        check_time(x)?;
        Ok(self.rate(x))
    }

    #[allow(non_snake_case)]
    fn eval_G(&self, x: f64) -> Result<f64> {
        check_time(x)?;
        Ok(self.integrated(x))
    }

    fn offspring_offset_invcdf(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(domain(format!("probability {u} outside (0, 1)")));
        }
        Ok(self.offset_quantile(u))
    }
}

fn check_time(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!("kernel evaluated at negative time {x}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidKernel(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_stable(rho: f64) -> Result<()> {
    if rho < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidKernel(format!(
            "branching ratio {rho} must be below 1 for finite clusters"
        )))
    }
}

/// `g(x) = alpha * exp(-beta x)`, the Markovian kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    alpha: f64,
    beta: f64,
}

impl Exponential {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("beta", beta)?;
        check_stable(alpha / beta)?;
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl ExcitationKernel for Exponential {
    fn rate(&self, x: f64) -> f64 {
        self.alpha * (-self.beta * x).exp()
    }

    fn integrated(&self, x: f64) -> f64 {
        // -expm1 keeps precision for small x
        -self.branching_ratio() * (-self.beta * x).exp_m1()
    }

    fn branching_ratio(&self) -> f64 {
        self.alpha / self.beta
    }

    fn offset_quantile(&self, u: f64) -> f64 {
        -(-u).ln_1p() / self.beta
    }

    fn exponential_params(&self) -> Option<(f64, f64)> {
        Some((self.alpha, self.beta))
    }

    fn label(&self) -> String {
        format!("exponential(alpha={},beta={})", self.alpha, self.beta)
    }
}

/// `g(x) = c / (d + x)^2`, a heavy-tailed (Omori-type) kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    c: f64,
    d: f64,
}

impl PowerLaw {
    pub fn new(c: f64, d: f64) -> Result<Self> {
        check_positive("c", c)?;
        check_positive("d", d)?;
        check_stable(c / d)?;
        Ok(Self { c, d })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }
}

impl ExcitationKernel for PowerLaw {
    fn rate(&self, x: f64) -> f64 {
        let s = self.d + x;
        self.c / (s * s)
    }

    fn integrated(&self, x: f64) -> f64 {
        if x.is_infinite() {
            return self.branching_ratio();
        }
        self.c * x / (self.d * (self.d + x))
    }

    fn branching_ratio(&self) -> f64 {
        self.c / self.d
    }

    fn offset_quantile(&self, u: f64) -> f64 {
        self.d * u / (1.0 - u)
    }

    fn label(&self) -> String {
        format!("powerlaw(c={},d={})", self.c, self.d)
    }
}

/// The shipped kernel families behind one concrete type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Exponential(Exponential),
    PowerLaw(PowerLaw),
}

impl Kernel {
    pub fn exponential(alpha: f64, beta: f64) -> Result<Self> {
        Exponential::new(alpha, beta).map(Self::Exponential)
    }

    pub fn power_law(c: f64, d: f64) -> Result<Self> {
        PowerLaw::new(c, d).map(Self::PowerLaw)
    }

    fn inner(&self) -> &dyn ExcitationKernel {
        match self {
            Self::Exponential(k) => k,
            Self::PowerLaw(k) => k,
        }
    }
}

impl ExcitationKernel for Kernel {
    fn rate(&self, x: f64) -> f64 {
        self.inner().rate(x)
    }

    fn integrated(&self, x: f64) -> f64 {
        self.inner().integrated(x)
    }

    fn branching_ratio(&self) -> f64 {
        self.inner().branching_ratio()
    }

    fn offset_quantile(&self, u: f64) -> f64 {
        self.inner().offset_quantile(u)
    }

    fn exponential_params(&self) -> Option<(f64, f64)> {
        self.inner().exponential_params()
    }

    fn label(&self) -> String {
        self.inner().label()
    }
}

/// Compensator points `Λ_i = Σ_{j<i} G(A_i − A_j)` for `i = 1..N−1`.
///
/// The output is not validated against the polytope constraints so that
/// callers can check them independently.
pub fn compensator_at_epochs<K: ExcitationKernel + ?Sized>(
    kernel: &K,
    cluster: &Cluster,
) -> CompensatorVector {
    let epochs = cluster.epochs();
    let values = (1..epochs.len())
        .map(|i| {
            epochs[..i]
                .iter()
                .map(|&a| kernel.integrated(epochs[i] - a))
                .sum()
        })
        .collect();
    CompensatorVector::from_raw(values, kernel.branching_ratio())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Gauss–Legendre on `[0, x]`, used as an oracle for `G`.
    fn quadrature<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
        const NODES: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let panels = 2000;
        let h = x / panels as f64;
        (0..panels)
            .map(|p| {
                let mid = (p as f64 + 0.5) * h;
                NODES
                    .iter()
                    .zip(WEIGHTS)
                    .map(|(&n, w)| w * f(mid + 0.5 * h * n))
                    .sum::<f64>()
                    * 0.5
                    * h
            })
            .sum()
    }

    /// User-style kernel relying on the numeric quantile fallback.
    #[derive(Debug)]
    struct Stretched(Exponential);

    impl ExcitationKernel for Stretched {
        fn rate(&self, x: f64) -> f64 {
            self.0.rate(x)
        }
        fn integrated(&self, x: f64) -> f64 {
            self.0.integrated(x)
        }
        fn branching_ratio(&self) -> f64 {
            self.0.branching_ratio()
        }
        fn label(&self) -> String {
            "stretched".into()
        }
    }

    #[test]
    fn point_values() {
        let e = Kernel::exponential(3.0, 4.0).unwrap();
        assert_eq!(e.eval_g(0.0).unwrap(), 3.0);
        assert_eq!(e.eval_g(f64::INFINITY).unwrap(), 0.0);
        assert_eq!(e.eval_G(0.0).unwrap(), 0.0);
        assert!((e.eval_G(f64::INFINITY).unwrap() - 0.75).abs() < 1e-15);

        let p = Kernel::power_law(1.0, 2.0).unwrap();
        assert_eq!(p.eval_g(0.0).unwrap(), 0.25);
        assert!((p.eval_G(2.0).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(p.eval_G(f64::INFINITY).unwrap(), 0.5);
    }

    #[test]
    fn negative_time_is_a_domain_error() {
        let e = Kernel::exponential(3.0, 4.0).unwrap();
        assert!(matches!(e.eval_g(-1e-9), Err(Error::Domain(_))));
        assert!(matches!(e.eval_G(-1.0), Err(Error::Domain(_))));
        assert!(matches!(e.eval_g(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn branching_ratios() {
        assert_eq!(Kernel::exponential(3.0, 4.0).unwrap().branching_ratio(), 0.75);
        assert_eq!(Kernel::power_law(15.0, 16.0).unwrap().branching_ratio(), 15.0 / 16.0);
        assert_eq!(
            Kernel::exponential(255.0, 256.0).unwrap().branching_ratio(),
            255.0 / 256.0
        );
    }

    #[test]
    fn unstable_or_degenerate_kernels_rejected() {
        assert!(matches!(Kernel::exponential(4.0, 4.0), Err(Error::InvalidKernel(_))));
        assert!(matches!(Kernel::exponential(5.0, 4.0), Err(Error::InvalidKernel(_))));
        assert!(matches!(Kernel::power_law(2.0, 2.0), Err(Error::InvalidKernel(_))));
        assert!(Kernel::power_law(0.0, 2.0).is_err());
        assert!(Kernel::exponential(1.0, f64::NAN).is_err());
        assert!(Kernel::exponential(-1.0, 2.0).is_err());
    }

    #[test]
    fn closed_form_integral_matches_quadrature() {
        let kernels = [
            Kernel::exponential(3.0, 4.0).unwrap(),
            Kernel::exponential(255.0, 256.0).unwrap(),
            Kernel::power_law(1.0, 2.0).unwrap(),
            Kernel::power_law(15.0, 16.0).unwrap(),
        ];
        for k in &kernels {
            for i in 1..=100 {
                let x = 0.05 * i as f64;
                let exact = k.integrated(x);
                let numeric = quadrature(|t| k.rate(t), x);
                let rel = (exact - numeric).abs() / exact;
                assert!(rel < 1e-9, "{} at {x}: {exact} vs {numeric}", k.label());
            }
        }
    }

    #[test]
    fn quantile_inverts_normalized_integral() {
        let kernels = [
            Kernel::exponential(3.0, 4.0).unwrap(),
            Kernel::power_law(1.0, 2.0).unwrap(),
            Kernel::power_law(15.0, 16.0).unwrap(),
        ];
        for k in &kernels {
            let rho = k.branching_ratio();
            for i in 1..1000 {
                let u = i as f64 / 1000.0;
                let x = k.offspring_offset_invcdf(u).unwrap();
                assert!((k.integrated(x) / rho - u).abs() < 1e-10);
            }
        }
        let e = Kernel::exponential(1.0, 4.0).unwrap();
        assert!((e.offspring_offset_invcdf(0.5).unwrap() - 2f64.ln() / 4.0).abs() < 1e-15);
        let p = Kernel::power_law(1.0, 2.0).unwrap();
        assert!((p.offspring_offset_invcdf(0.25).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(e.offspring_offset_invcdf(1e-300).unwrap() < 1e-290);
        assert!(p.offspring_offset_invcdf(1e-300).unwrap() < 1e-290);
    }

    #[test]
    fn quantile_rejects_boundary() {
        let e = Kernel::exponential(3.0, 4.0).unwrap();
        for u in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(e.offspring_offset_invcdf(u), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn numeric_quantile_fallback() {
        let k = Stretched(Exponential::new(3.0, 4.0).unwrap());
        for i in 1..100 {
            let u = i as f64 / 100.0;
            let x = k.offspring_offset_invcdf(u).unwrap();
            assert!((x - k.0.offset_quantile(u)).abs() < 1e-9);
        }
    }

    #[test]
    fn compensator_of_small_clusters() {
        let e = Kernel::exponential(3.0, 4.0).unwrap();
        let single = Cluster::new(vec![0.0]).unwrap();
        assert!(compensator_at_epochs(&e, &single).is_empty());

        let a = 0.37;
        let pair = Cluster::new(vec![0.0, a]).unwrap();
        let lam = compensator_at_epochs(&e, &pair);
        assert_eq!(lam.len(), 1);
        assert!((lam.values()[0] - 0.75 * (1.0 - (-4.0 * a).exp())).abs() < 1e-15);
    }
}
