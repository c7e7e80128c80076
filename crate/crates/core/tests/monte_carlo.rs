//! Seeded Monte Carlo checks of estimator behaviour over many realizations.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use resilience_core::arma::{self, ArmaParams, ArmaSpec};
use resilience_core::crosssection::{property_matrix, PanelTable};
use resilience_core::resilience::{profile, AnalysisConfig, ResilienceProfile};
use resilience_core::LevelSeries;

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

#[test]
fn ar1_coefficient_is_unbiased_enough() {
    let truth = ArmaParams::new(10.0, vec![-0.5], vec![], 50.0);
    let betas: Vec<f64> = (0..300)
        .map(|seed| {
            let inc = arma::simulate(&truth, truth.spec(), 200, seed).unwrap();
            arma::fit(&inc, ArmaSpec::new(1, 0)).unwrap().params.betas[0]
        })
        .collect();
    let mean = betas.iter().sum::<f64>() / betas.len() as f64;
    assert!((mean + 0.5).abs() < 0.1, "mean beta {mean}");
}

#[test]
fn aic_prefers_white_noise_on_white_noise() {
    let truth = ArmaParams::new(0.0, vec![], vec![], 1.0);
    let hits = (0..100)
        .filter(|&seed| {
            let inc = arma::simulate(&truth, truth.spec(), 500, 1_000 + seed).unwrap();
            arma::select_order(&inc, 2, 2).unwrap().spec.is_white_noise()
        })
        .count();
    assert!(hits >= 60, "(0,0) chosen {hits}/100");
}

#[test]
fn aic_detects_ar_dynamics() {
    let truth = ArmaParams::new(0.0, vec![0.6], vec![], 1.0);
    let hits = (0..100)
        .filter(|&seed| {
            let inc = arma::simulate(&truth, truth.spec(), 500, 2_000 + seed).unwrap();
            !arma::select_order(&inc, 2, 2).unwrap().spec.is_white_noise()
        })
        .count();
    assert!(hits >= 95, "dynamics detected {hits}/100");
}

#[test]
fn persistence_round_trip_per_regime() {
    for beta in [-0.5, 0.0, 0.5] {
        let truth = ArmaParams::new(10.0, if beta == 0.0 { vec![] } else { vec![beta] }, vec![], 50.0);
        let pis: Vec<f64> = (0..300)
            .map(|seed| {
                let inc = arma::simulate(&truth, truth.spec(), 199, 3_000 + seed).unwrap();
                arma::select_order(&inc, 2, 2).unwrap().persistence()
            })
            .collect();
        let m = median(pis);
        if beta == 0.0 {
            assert_eq!(m, 0.0);
        } else {
            assert_eq!(m.signum(), f64::signum(beta), "beta {beta}: median {m}");
        }
        assert!((m - beta).abs() <= 0.1, "beta {beta}: median {m}");
    }
}

#[test]
fn random_walk_profiles_are_mostly_random() {
    let truth = ArmaParams::new(10.0, vec![], vec![], 50.0);
    let config = AnalysisConfig::default();
    let mut by_spec: BTreeMap<ArmaSpec, usize> = BTreeMap::new();
    let mut resilient_white = 0;
    for seed in 0..100 {
        let inc = arma::simulate(&truth, truth.spec(), 199, 4_000 + seed).unwrap();
        let levels = inc.integrate(2000.0).unwrap();
        let p = profile(&levels, &config).unwrap();
        if p.selected_spec().is_white_noise() {
            assert_eq!(p.pi, 0.0);
            resilient_white += usize::from(p.classification.resilient);
        }
        *by_spec.entry(p.selected_spec()).or_default() += 1;
    }
    let white = by_spec.get(&ArmaSpec::new(0, 0)).copied().unwrap_or(0);
    assert!(white > 50, "{by_spec:?}");
    assert_eq!(resilient_white, 0);
}

/// A genuine profile of a simulated random walk; tests overwrite level and π.
fn synthetic_profile(unit: String, seed: u64) -> ResilienceProfile {
    let truth = ArmaParams::new(10.0, vec![], vec![], 50.0);
    let inc = arma::simulate(&truth, truth.spec(), 60, seed).unwrap();
    let levels = LevelSeries::from_values(unit, 1961, inc.integrate(2000.0).unwrap().values().to_vec()).unwrap();
    profile(&levels, &AnalysisConfig::default()).unwrap()
}

#[test]
fn independent_persistence_is_uncorrelated_with_level() {
    let base: Vec<ResilienceProfile> = (0..161)
        .map(|i| synthetic_profile(format!("u{i:03}"), 5_000 + i))
        .collect();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut clean = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(6_000 + seed);
        let mut pis: Vec<f64> = (0..161).map(|i| -0.9 + 1.8 * i as f64 / 160.0).collect();
        pis.shuffle(&mut rng);
        let rows: Vec<ResilienceProfile> = base
            .iter()
            .zip(pis)
            .map(|(p, pi)| {
                let mut p = p.clone();
                p.level = 2500.0 + 300.0 * normal.sample(&mut rng);
                p.pi = pi;
                p
            })
            .collect();
        let m = property_matrix(&PanelTable::new(rows).unwrap(), 1000, seed).unwrap();
        let (r, pv) = (m.coefficients[0][3], m.p_values[0][3].unwrap());
        if r.abs() < 0.2 && pv > 0.05 {
            clean += 1;
        }
    }
    assert!(clean >= 18, "independent in {clean}/20 seeds");
}
