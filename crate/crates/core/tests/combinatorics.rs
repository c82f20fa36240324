mod common;

use std::collections::HashMap;

use hawkes_cluster::combinat::{
    borel_pmf, enumerate_parking_functions, park_on_circle, park_on_circle_linear, sample_borel,
    sample_parking_function,
};
use hawkes_cluster::replication_rng;
use hawkes_cluster::stats::{chi_square_gof, merge_tail};

fn uniformity_p_value(k: usize, draws_per_cell: u64, seed: u64) -> f64 {
    let all = enumerate_parking_functions(k).unwrap();
    let index: HashMap<Vec<u32>, usize> =
        all.iter().enumerate().map(|(i, p)| (p.entries().to_vec(), i)).collect();
    let mut counts = vec![0u64; all.len()];
    let mut rng = replication_rng(seed, 0);
    for _ in 0..draws_per_cell * all.len() as u64 {
        let pf = sample_parking_function(k, &mut rng).unwrap();
        counts[index[pf.entries()]] += 1;
    }
    let p = vec![1.0 / all.len() as f64; all.len()];
    chi_square_gof(&counts, &p).unwrap().p_value
}

#[test]
fn parking_sampler_is_uniform_on_pf3() {
    assert!(uniformity_p_value(3, 100_000, 1) > 1e-3);
}

#[test]
fn parking_sampler_is_uniform_on_pf4() {
    assert!(uniformity_p_value(4, 2_000, 2) > 1e-3);
}

#[test]
fn forest_parking_matches_linear_probing_on_random_inputs() {
    use rand::Rng;
    let mut rng = replication_rng(3, 0);
    for _ in 0..20_000 {
        let k = rng.random_range(1..40usize);
        let prefs: Vec<u32> = (0..k).map(|_| rng.random_range(1..=k as u32 + 1)).collect();
        assert_eq!(park_on_circle(&prefs).unwrap(), park_on_circle_linear(&prefs).unwrap());
    }
}

#[test]
fn borel_sampler_matches_pmf() {
    for (seed, rho) in [(4, 0.5), (5, 0.9)] {
        let n = 200_000u64;
        let mut rng = replication_rng(seed, 0);
        let mut hist: Vec<u64> = Vec::new();
        for _ in 0..n {
            let k = sample_borel(rho, &mut rng).unwrap() as usize;
            if hist.len() < k {
                hist.resize(k, 0);
            }
            hist[k - 1] += 1;
        }
        let pmf: Vec<f64> = (1..=hist.len() as u64).map(|k| borel_pmf(rho, k).unwrap()).collect();
        let (obs, exp) = merge_tail(&hist, &pmf, 5.0);
        let chi = chi_square_gof(&obs, &exp).unwrap();
        assert!(chi.p_value > 1e-3, "ρ = {rho}: {chi:?}");
    }
}
