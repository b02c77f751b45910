mod common;

use antq::metrics::*;
use antq::optimizer::{qaa_run, qaoa_ladder, EvalMode, LadderConfig};
use antq::statevector::{run_circuit, CostTable};
use antq::QaaConfig;
use common::*;

#[test]
fn qaa_ratio_matches_distribution_oracle() {
    let inst = golden(12, 0.0);
    let table = CostTable::new(&inst).unwrap();
    let spec = inst.brute_force().unwrap();
    let out = qaa_run(&table, QaaConfig::new(200, 0.5).unwrap(), EvalMode::Exact).unwrap();
    let probs = out.state.probabilities();
    let want: f64 = probs.iter().enumerate().map(|(x, p)| p * cost_oracle(&inst, x as u64)).sum::<f64>() / spec.h_min;
    let rep = exact_report(&out.state, &table, &spec).unwrap();
    assert!((rep.alpha - want).abs() < 1e-12);
    assert!(rep.alpha <= 1.0 + 1e-12);
    let gs: f64 = spec.ground_states.iter().map(|&x| probs[x as usize]).sum();
    assert_eq!(rep.p_gs, Some(gs));
}

#[test]
fn cp_and_histogram_match_exhaustive_oracles() {
    let inst = golden(12, 1.0);
    let table = CostTable::new(&inst).unwrap();
    let spec = inst.brute_force().unwrap();
    let cfg = LadderConfig { p_max: 5, ..Default::default() };
    let ladder = qaoa_ladder(&table, Some(spec.h_min), &cfg).unwrap();
    let state = run_circuit(&table, &ladder.at(5).unwrap().schedule).unwrap();
    let probs = state.probabilities();
    let costs: Vec<f64> = (0..1u64 << 12).map(|x| cost_oracle(&inst, x)).collect();

    let thresholds = threshold_grid(0.0, 1.0, 101);
    let cp = cumulative_probability(Distribution::State(&state), &table, &spec, &thresholds).unwrap();
    for (a, v) in thresholds.iter().zip(&cp.values) {
        assert!((v - cp_oracle(&probs, &costs, spec.h_min, *a)).abs() < 1e-12, "a={a}");
    }
    let bins = ratio_histogram(Distribution::State(&state), &table, &spec, DEFAULT_BIN_WIDTH).unwrap();
    let want = histogram_oracle(&probs, &costs, spec.h_min, DEFAULT_BIN_WIDTH);
    assert_eq!(bins.len(), want.len());
    for (b, (k, m)) in bins.iter().zip(&want) {
        assert_eq!(b.lo, *k as f64 * DEFAULT_BIN_WIDTH);
        assert!((b.mass - m).abs() < 1e-12);
    }
}

#[test]
fn shot_estimators_match_count_oracle() {
    let inst = golden(10, 1.0);
    let table = CostTable::new(&inst).unwrap();
    let spec = inst.brute_force().unwrap();
    let out = qaa_run(&table, QaaConfig::new(50, 0.2).unwrap(), EvalMode::Shots { n_meas: 20_000, seed: 4 }).unwrap();
    let counts = out.counts.unwrap();
    let rep = shot_estimators(&counts, &table, &spec).unwrap();
    let mean: f64 = counts.counts.iter().map(|(&x, &k)| k as f64 * cost_oracle(&inst, x)).sum::<f64>() / 20_000.0;
    assert!((rep.alpha - mean / spec.h_min).abs() < 1e-12);
    let top = counts.counts.iter().max_by_key(|(_, &k)| k).unwrap();
    if counts.counts.values().filter(|&&k| k == *top.1).count() == 1 {
        assert!((rep.alpha_mp - cost_oracle(&inst, *top.0) / spec.h_min).abs() < 1e-12);
    }
    let gs = spec.ground_states.iter().map(|x| counts.counts.get(x).copied().unwrap_or(0)).sum::<u64>();
    assert_eq!(rep.gs_counts_fraction, Some(gs as f64 / 20_000.0));
}

#[test]
fn resource_counts_on_golden_instances() {
    for n in 8..=16 {
        let dense = golden(n, 1.0);
        let sparse = golden(n, 0.0);
        for p in [1, 3, 10] {
            let r = resource_estimate(&dense, p).unwrap();
            assert_eq!(r.g1, 2 * n * p);
            assert_eq!(r.g2, p * n * (n - 1) / 2);
            let s = resource_estimate(&sparse, p).unwrap();
            assert_eq!(s.g2, p * sparse.degrees().iter().sum::<usize>() / 2);
        }
    }
}
