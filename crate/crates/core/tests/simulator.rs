mod common;

use antq::statevector::{run_circuit, CostTable, Statevector};
use antq::{AngleSchedule, IsingInstance};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_schedule(rng: &mut ChaCha8Rng, p: usize) -> AngleSchedule {
    let beta = (0..p).map(|_| rng.random_range(-1.5..1.5)).collect();
    let gamma = (0..p).map(|_| rng.random_range(-2.0..2.0)).collect();
    AngleSchedule::new(beta, gamma).unwrap()
}

#[test]
fn circuit_matches_gate_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..20u64 {
        let n = 1 + (k as usize % 4);
        let lambda = if k % 2 == 0 { 0.0 } else { 1.0 };
        let inst = random_instance(n, lambda, 100 + k);
        let sched = random_schedule(&mut rng, 1 + (k as usize % 3));
        let got = run_circuit(&CostTable::new(&inst).unwrap(), &sched).unwrap();
        let want = gate_circuit(&inst, sched.beta(), sched.gamma());
        let dev = got.amplitudes().iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(dev <= 1e-10, "case {k}: deviation {dev:e}");
    }
}

#[test]
fn one_qubit_closed_form_grid() {
    for a in [-1.3, -0.4] {
        // H(z) = a z with xi = 1/4 and A = -4a
        let inst = IsingInstance::from_parts(vec![0.0], vec![-4.0 * a], 0.25, 0.0, 0).unwrap();
        let table = CostTable::new(&inst).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                let beta = -1.6 + 3.2 * i as f64 / 19.0;
                let gamma = -2.0 + 4.0 * j as f64 / 19.0;
                let s = run_circuit(&table, &AngleSchedule::new(vec![beta], vec![gamma]).unwrap()).unwrap();
                let want = a * (2.0 * beta).sin() * (2.0 * gamma * a).sin();
                assert!((s.expectation(&table).unwrap() - want).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn plus_state_has_zero_energy() {
    for seed in 0..10u64 {
        let inst = random_instance(10, (seed % 2) as f64, seed);
        let table = CostTable::new(&inst).unwrap();
        let e = Statevector::plus_state(10).unwrap().expectation(&table).unwrap();
        assert!(e.abs() <= 1e-10, "{e}");
    }
}

#[test]
fn dense_and_virtual_tables_agree_on_golden_instance() {
    let inst = golden(12, 1.0);
    let sched = AngleSchedule::new(vec![0.3, 0.2], vec![0.1, 0.25]).unwrap();
    let d = run_circuit(&CostTable::dense(&inst).unwrap(), &sched).unwrap();
    let v = run_circuit(&CostTable::virtual_table(&inst).unwrap(), &sched).unwrap();
    assert_eq!(d, v);
}

#[test]
fn sampling_matches_distribution() {
    let inst = golden(8, 0.0);
    let table = CostTable::new(&inst).unwrap();
    let s = run_circuit(&table, &AngleSchedule::new(vec![-0.4, -0.2], vec![0.3, 0.6]).unwrap()).unwrap();
    let counts = s.sample(200_000, 5).unwrap();
    let tv = counts.tv_distance(&s.probabilities());
    assert!(tv < 0.02, "{tv}");
    assert_eq!(counts, s.sample(200_000, 5).unwrap());
    assert_ne!(counts, s.sample(200_000, 6).unwrap());
}
