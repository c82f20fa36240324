//! Borel cluster sizes, parking functions and Dyck paths.
//!
//! Entries of parking functions and Dyck paths are 1-based, as in the usual
//! combinatorial convention: a parking function of length `k` takes values in
//! `{1, …, k}`.

use std::sync::OnceLock;

use rand::Rng;
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};

/// Hard cap on a single Borel draw.
pub const BOREL_CAP: u64 = 100_000_000;

/// Largest `k` accepted by [`enumerate_dyck`].
pub const MAX_DYCK_ENUM: usize = 14;

/// Largest `k` accepted by [`enumerate_parking_functions`].
pub const MAX_PF_ENUM: usize = 7;

/// Whether the ascending sort of `entries` satisfies `π_(i) ≤ i`.
pub fn is_parking_function(entries: &[u32]) -> bool {
    let k = entries.len();
    // counting sort: the parking condition is that at least m entries are ≤ m
    let mut counts = vec![0usize; k + 1];
    for &e in entries {
        if e == 0 || e as usize > k {
            return false;
        }
        counts[e as usize] += 1;
    }
    let mut seen = 0;
    for (m, c) in counts.iter().enumerate().skip(1) {
        seen += c;
        if seen < m {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParkingFunction(Vec<u32>);

impl ParkingFunction {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Invariant("parking function must be nonempty".into()));
        }
        if !is_parking_function(&entries) {
            return Err(Error::Invariant(format!("{entries:?} is not a parking function")));
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn occupancy(&self) -> OccupancyCounts {
        OccupancyCounts::of(&self.0)
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.0
    }
}

/// Nondecreasing `d` with `d_1 = 1` and `d_i ≤ i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyckPath(Vec<u32>);

impl DyckPath {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        let ok = !entries.is_empty()
            && entries[0] == 1
            && entries.windows(2).all(|w| w[0] <= w[1])
            && entries.iter().enumerate().all(|(i, &d)| d as usize <= i + 1);
        if ok {
            Ok(Self(entries))
        } else {
            Err(Error::Invariant(format!("{entries:?} is not a Dyck path")))
        }
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn occupancy(&self) -> OccupancyCounts {
        OccupancyCounts::of(&self.0)
    }
}

/// `κ_i = |{j : π_j = i}|` for `i = 1..=k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyCounts(Vec<usize>);

impl OccupancyCounts {
    fn of(entries: &[u32]) -> Self {
        let mut counts = vec![0; entries.len()];
        for &e in entries {
            counts[e as usize - 1] += 1;
        }
        Self(counts)
    }

    /// `κ_i` for 1-based `i`; zero outside `1..=k`.
    pub fn get(&self, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            self.0.get(i - 1).copied().unwrap_or(0)
        }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("branching ratio {rho} outside (0, 1)")))
    }
}

/// `ln P(N = k)` for `N ~ Borel(rho)`.
pub fn borel_log_pmf(rho: f64, k: u64) -> Result<f64> {
    check_rho(rho)?;
    if k == 0 {
        return Err(domain("Borel support starts at 1"));
    }
    let kf = k as f64;
    Ok(-rho * kf + (kf - 1.0) * (rho * kf).ln() - ln_gamma(kf + 1.0))
}

/// `P(N = k) = e^{-ρk} (ρk)^{k-1} / k!`.
pub fn borel_pmf(rho: f64, k: u64) -> Result<f64> {
    borel_log_pmf(rho, k).map(f64::exp)
}

/// Draws a cluster size by walking the Borel CDF.
///
/// Successive masses follow `ln p_{k+1} = ln p_k + ln ρ − ρ + (k−1) ln(1 + 1/k)`.
pub fn sample_borel<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> Result<u64> {
    check_rho(rho)?;
    let u: f64 = rng.random();
    // p_{k+1} = p_k · ρe^{−ρ} · (1 + 1/k)^{k−1}
    let q = rho * (-rho).exp();
    let growth = borel_growth_table();
    let mut p = (-rho).exp();
    let mut cdf = p;
    let mut k = 1u64;
    while cdf <= u {
        if k >= BOREL_CAP {
            return Err(Error::BorelOverflow { cap: BOREL_CAP });
        }
        let r = match growth.get(k as usize) {
            Some(&r) => r,
            None => ((k as f64 - 1.0) * (1.0 / k as f64).ln_1p()).exp(),
        };
        p *= q * r;
        k += 1;
        if p == 0.0 {
            // remaining mass is below double resolution; u sits in rounding slack
            break;
        }
        cdf += p;
    }
    Ok(k)
}

const BOREL_TABLE_LEN: usize = 1 << 16;

/// `(1 + 1/k)^{k−1}` for `k < BOREL_TABLE_LEN`; independent of `ρ`.
fn borel_growth_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..BOREL_TABLE_LEN)
            .map(|k| if k == 0 { 0.0 } else { ((k as f64 - 1.0) * (1.0 / k as f64).ln_1p()).exp() })
            .collect()
    })
}

/// Resolves a preference vector on the `(k+1)`-circle into a parking function.
///
/// Cars park in order at their preferred spot or the next free one clockwise;
/// the single empty spot `ℓ` is then rotated to position `k+1`, giving
/// `π = (π̃ − ℓ) mod (k+1)`. Uses a next-free-spot forest with path halving.
pub fn park_on_circle(prefs: &[u32]) -> Result<ParkingFunction> {
    let k = prefs.len();
    check_prefs(prefs)?;
    let spots = k + 1;
    // next[s] == s marks a free spot (0-based)
    let mut next: Vec<usize> = (0..spots).collect();
    for &p in prefs {
        let mut s = p as usize - 1;
        while next[s] != s {
            let up = next[next[s]];
            next[s] = up;
            s = up;
        }
        next[s] = if s + 1 == spots { 0 } else { s + 1 };
    }
    let empty = (0..spots).find(|&s| next[s] == s).expect("one spot stays free") + 1;
    Ok(rotate(prefs, empty))
}

/// Literal linear-probing version of [`park_on_circle`], kept as a reference.
pub fn park_on_circle_linear(prefs: &[u32]) -> Result<ParkingFunction> {
    let k = prefs.len();
    check_prefs(prefs)?;
    let spots = k + 1;
    let mut occupied = vec![false; spots];
    for &p in prefs {
        let mut s = p as usize - 1;
        while occupied[s] {
            s = (s + 1) % spots;
        }
        occupied[s] = true;
    }
    let empty = occupied.iter().position(|&o| !o).expect("one spot stays free") + 1;
    Ok(rotate(prefs, empty))
}

fn check_prefs(prefs: &[u32]) -> Result<()> {
    let k = prefs.len();
    if k == 0 {
        return Err(domain("preference vector must be nonempty"));
    }
    match prefs.iter().find(|&&p| p == 0 || p as usize > k + 1) {
        Some(p) => Err(domain(format!("preference {p} outside 1..={}", k + 1))),
        None => Ok(()),
    }
}

fn rotate(prefs: &[u32], empty: usize) -> ParkingFunction {
    let spots = prefs.len() + 1;
    let pf = prefs
        .iter()
        .map(|&p| {
            let q = p as usize + spots - empty;
            (if q >= spots { q - spots } else { q }) as u32
        })
        .collect::<Vec<_>>();
    debug_assert!(is_parking_function(&pf), "{prefs:?} rotated to {pf:?}");
    ParkingFunction(pf)
}

/// Uniformly random parking function of length `k` via Pollak's circle.
pub fn sample_parking_function<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<ParkingFunction> {
    if k == 0 {
        return Err(domain("parking function length must be at least 1"));
    }
    let top = k as u32 + 1;
    let prefs: Vec<u32> = (0..k).map(|_| rng.random_range(1..=top)).collect();
    park_on_circle(&prefs)
}

/// All `k`-step Dyck paths in descending lexicographic order.
pub fn enumerate_dyck(k: usize) -> Result<Vec<DyckPath>> {
    if k == 0 {
        return Err(domain("Dyck path length must be at least 1"));
    }
    if k > MAX_DYCK_ENUM {
        return Err(Error::Capacity { what: "Dyck path enumeration length", limit: MAX_DYCK_ENUM });
    }
    fn extend(prefix: &mut Vec<u32>, k: usize, out: &mut Vec<DyckPath>) {
        let i = prefix.len();
        if i == k {
            out.push(DyckPath(prefix.clone()));
            return;
        }
        let lo = prefix.last().copied().unwrap_or(1);
        for v in (lo..=i as u32 + 1).rev() {
            prefix.push(v);
            extend(prefix, k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(k), k, &mut out);
    Ok(out)
}

/// All parking functions of length `k`, as the distinct rearrangements of each
/// Dyck path.
pub fn enumerate_parking_functions(k: usize) -> Result<Vec<ParkingFunction>> {
    if k > MAX_PF_ENUM {
        return Err(Error::Capacity { what: "parking function enumeration length", limit: MAX_PF_ENUM });
    }
    let mut out = Vec::new();
    for d in enumerate_dyck(k)? {
        let mut perm = d.0;
        loop {
            out.push(ParkingFunction(perm.clone()));
            if !next_permutation(&mut perm) {
                break;
            }
        }
    }
    Ok(out)
}

/// Advances to the next lexicographic permutation; false once wrapped.
fn next_permutation(v: &mut [u32]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("pivot has a successor");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

pub fn sort_to_dyck(pf: &ParkingFunction) -> Result<DyckPath> {
    if !is_parking_function(&pf.0) {
        return Err(Error::Invariant(format!("{:?} is not a parking function", pf.0)));
    }
    let mut d = pf.0.clone();
    d.sort_unstable();
    DyckPath::new(d)
}

/// Number of parking functions that sort to `d`: `k! / Π κ_i(d)!`.
pub fn region_count(d: &DyckPath) -> u128 {
    let k = d.len();
    let mut count: u128 = 1;
    let mut placed: u128 = 0;
    // build the multinomial as a product of binomials to stay exact
    for &c in d.occupancy().as_slice() {
        for j in 1..=c as u128 {
            placed += 1;
            count = count * placed / j;
        }
    }
    debug_assert_eq!(placed as usize, k);
    count
}

/// `|PF_k| = (k+1)^{k−1}`.
pub fn parking_function_count(k: usize) -> u128 {
    (k as u128 + 1).pow(k as u32 - 1)
}

/// Probability that a uniform parking function sorts to `d`, equal to the
/// volume share of the matching polytope region:
/// `k! / ((k+1)^{k−1} Π κ_i(d)!)`.
pub fn region_probability(d: &DyckPath) -> f64 {
    region_count(d) as f64 / parking_function_count(d.len()) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn borel_pmf_values() {
        assert!((borel_pmf(0.5, 1).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        assert!((borel_pmf(0.5, 2).unwrap() - 0.5 * (-1f64).exp()).abs() < 1e-15);
        assert!((borel_pmf(0.5, 1).unwrap() - 0.606_531).abs() < 1e-6);
        assert!((borel_pmf(0.5, 2).unwrap() - 0.183_940).abs() < 1e-6);
    }

    #[test]
    fn borel_pmf_sums_to_one() {
        let total: f64 = (1..=1_000_000).map(|k| borel_pmf(0.9, k).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn borel_rejects_bad_rho() {
        for rho in [0.0, 1.0, -0.2, 1.3, f64::NAN] {
            assert!(borel_pmf(rho, 1).is_err());
            assert!(sample_borel(rho, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        }
        assert!(borel_pmf(0.5, 0).is_err());
    }

    #[test]
    fn borel_near_zero_rho_is_single_event() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ones = (0..10_000).filter(|_| sample_borel(1e-9, &mut rng).unwrap() == 1).count();
        assert_eq!(ones, 10_000);
    }

    #[test]
    fn borel_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for rho in [0.5, 0.75, 0.9] {
            let n = 200_000;
            let draws: Vec<f64> = (0..n).map(|_| sample_borel(rho, &mut rng).unwrap() as f64).collect();
            let mean = draws.iter().sum::<f64>() / n as f64;
            let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            let target = 1.0 / (1.0 - rho);
            assert!((mean - target).abs() < 4.0 * se, "rho={rho}: {mean} vs {target} (se {se})");
        }
    }

    #[test]
    fn circle_parking_example() {
        let pf = park_on_circle(&[2, 5, 1, 5, 6]).unwrap();
        assert_eq!(pf.entries(), &[4, 1, 3, 1, 2]);
        assert_eq!(park_on_circle_linear(&[2, 5, 1, 5, 6]).unwrap(), pf);
    }

    #[test]
    fn all_ones_is_left_alone() {
        let pf = park_on_circle(&[1; 7]).unwrap();
        assert_eq!(pf.entries(), &[1; 7]);
    }

    #[test]
    fn circle_parking_matches_linear_reference_exhaustively() {
        for k in 1..=5usize {
            let top = k as u32 + 1;
            let total = (k + 1).pow(k as u32);
            for code in 0..total {
                let mut c = code;
                let prefs: Vec<u32> = (0..k)
                    .map(|_| {
                        let v = (c % (k + 1)) as u32 + 1;
                        c /= k + 1;
                        v
                    })
                    .collect();
                assert!(prefs.iter().all(|&p| p <= top));
                assert_eq!(park_on_circle(&prefs).unwrap(), park_on_circle_linear(&prefs).unwrap());
            }
        }
    }

    #[test]
    fn bad_preferences_rejected() {
        assert!(park_on_circle(&[]).is_err());
        assert!(park_on_circle(&[0, 1]).is_err());
        assert!(park_on_circle(&[4, 1]).is_err());
        assert!(sample_parking_function(0, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn dyck_paths_small() {
        let k3: Vec<Vec<u32>> = enumerate_dyck(3).unwrap().into_iter().map(|d| d.0).collect();
        assert_eq!(k3, vec![vec![1, 2, 3], vec![1, 2, 2], vec![1, 1, 3], vec![1, 1, 2], vec![1, 1, 1]]);
        assert_eq!(enumerate_dyck(1).unwrap(), vec![DyckPath(vec![1])]);
        assert_eq!(enumerate_dyck(4).unwrap().len(), 14);
        assert!(matches!(enumerate_dyck(15), Err(Error::Capacity { .. })));
    }

    #[test]
    fn dyck_paths_match_brute_force_filter() {
        for k in 1..=6usize {
            let mut brute = Vec::new();
            let total = k.pow(k as u32);
            for code in 0..total {
                let mut c = code;
                let v: Vec<u32> = (0..k)
                    .map(|_| {
                        let x = (c % k) as u32 + 1;
                        c /= k;
                        x
                    })
                    .collect();
                if v.windows(2).all(|w| w[0] <= w[1]) && v.iter().enumerate().all(|(i, &x)| x as usize <= i + 1) {
                    brute.push(v);
                }
            }
            let mut fast: Vec<Vec<u32>> = enumerate_dyck(k).unwrap().into_iter().map(|d| d.0).collect();
            brute.sort();
            fast.sort();
            assert_eq!(brute, fast);
        }
    }

    #[test]
    fn sorting_gives_dyck_paths() {
        let pf = ParkingFunction::new(vec![4, 1, 3, 1, 2]).unwrap();
        assert_eq!(sort_to_dyck(&pf).unwrap().entries(), &[1, 1, 2, 3, 4]);
        let ones = ParkingFunction::new(vec![1, 1, 1]).unwrap();
        assert_eq!(sort_to_dyck(&ones).unwrap().entries(), &[1, 1, 1]);
        for pf in enumerate_parking_functions(4).unwrap() {
            let d = sort_to_dyck(&pf).unwrap();
            assert!(d.entries().iter().enumerate().all(|(i, &x)| x as usize <= i + 1));
        }
        assert!(sort_to_dyck(&ParkingFunction(vec![2, 2])).is_err());
        assert!(ParkingFunction::new(vec![2, 2]).is_err());
        assert!(ParkingFunction::new(vec![]).is_err());
        assert!(DyckPath::new(vec![1, 3, 3]).is_err());
        assert!(DyckPath::new(vec![1, 2, 1]).is_err());
    }

    #[test]
    fn region_probabilities_small() {
        let p = |v: Vec<u32>| region_probability(&DyckPath::new(v).unwrap());
        assert!((p(vec![1, 2, 3]) - 3.0 / 8.0).abs() < 1e-15);
        assert!((p(vec![1, 1, 1]) - 1.0 / 16.0).abs() < 1e-15);
        assert!((p(vec![1, 2]) - 2.0 / 3.0).abs() < 1e-15);
        assert!((p(vec![1, 1]) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn occupancy_counts() {
        let pf = ParkingFunction::new(vec![1, 1, 1]).unwrap();
        let occ = pf.occupancy();
        assert_eq!(occ.as_slice(), &[3, 0, 0]);
        assert_eq!(occ.get(0), 0);
        assert_eq!(occ.get(4), 0);
        assert_eq!(occ.as_slice().iter().sum::<usize>(), 3);
    }

    #[test]
    fn next_permutation_counts_multiset_arrangements() {
        let mut v = vec![1, 1, 2, 3];
        let mut n = 1;
        while next_permutation(&mut v) {
            n += 1;
        }
        assert_eq!(n, 12);
    }
}
