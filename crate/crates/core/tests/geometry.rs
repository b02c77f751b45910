mod common;

use std::f64::consts::PI;

use antq::geometry::{generate_instance, lens_area, BBox, Site};
use common::*;
use proptest::prelude::*;

#[test]
fn unit_lens_against_monte_carlo() {
    let a = Site::new(0.0, 0.0, 1.0).unwrap();
    let b = Site::new(1.0, 0.0, 1.0).unwrap();
    let exact = lens_area(&a, &b).unwrap();
    let mc = mc_lens_area(&a, &b, 10_000_000, 11);
    assert!(((exact - mc) / exact).abs() < 1e-3, "{exact} vs {mc}");
}

#[test]
fn unequal_lenses_against_monte_carlo() {
    for (k, &(d, ra, rb)) in [(0.9, 0.5, 0.8), (1.2, 1.0, 0.3), (0.25, 0.4, 0.35)].iter().enumerate() {
        let a = Site::new(0.0, 0.0, ra).unwrap();
        let b = Site::new(d, 0.0, rb).unwrap();
        let exact = lens_area(&a, &b).unwrap();
        let mc = mc_lens_area(&a, &b, 4_000_000, 20 + k as u64);
        assert!(((exact - mc) / exact).abs() < 2e-3, "d={d}: {exact} vs {mc}");
    }
}

#[test]
fn golden_set_is_reproducible() {
    let sites = golden_sites(30);
    assert_eq!(sites.len(), 30);
    let side = 2.1 * (30f64 / 30.0).sqrt();
    assert_eq!(generate_instance(30, BBox::square(side).unwrap(), 0.5, 7).unwrap(), sites);
    for n in 8..=16 {
        let side = 2.1 * (n as f64 / 30.0).sqrt();
        assert_eq!(generate_instance(n, BBox::square(side).unwrap(), 0.5, 7).unwrap(), golden_sites(n), "n={n}");
    }
}

#[test]
fn golden_overlaps_match_frozen_matrix_and_sampling() {
    let vals = golden_values();
    let inst = golden(30, 1.0);
    assert_eq!(inst.overlaps(), &vals.overlaps_30[..]);
    let sites = golden_sites(30);
    let mut checked = 0;
    'outer: for i in 0..30 {
        for j in i + 1..30 {
            let exact = inst.overlap(i, j);
            if exact > 0.02 {
                let mc = mc_lens_area(&sites.sites[i], &sites.sites[j], 1_000_000, (i * 30 + j) as u64);
                assert!(((exact - mc) / exact).abs() < 1e-2, "({i},{j}) {exact} vs {mc}");
                checked += 1;
                if checked == 10 {
                    break 'outer;
                }
            }
        }
    }
    assert_eq!(checked, 10);
}

#[test]
fn golden_connectivity_is_logged() {
    let inst = golden(30, 0.0);
    let mean = inst.mean_degree();
    assert_eq!(mean, golden_values().mean_degree_30);
    println!("golden 30-site mean degree {mean:.3}, histogram {:?}", inst.connectivity_histogram());
}

fn site() -> impl Strategy<Value = Site> {
    (-3.0..3.0f64, -3.0..3.0f64, 0.01..2.0f64).prop_map(|(x, y, r)| Site::new(x, y, r).unwrap())
}

proptest! {
    #[test]
    fn lens_symmetric(a in site(), b in site()) {
        prop_assert_eq!(lens_area(&a, &b).unwrap(), lens_area(&b, &a).unwrap());
    }

    #[test]
    fn lens_bounded(a in site(), b in site()) {
        let v = lens_area(&a, &b).unwrap();
        let cap = PI * a.r.min(b.r).powi(2);
        prop_assert!(v >= 0.0);
        prop_assert!(v <= cap * (1.0 + 1e-12));
    }

    #[test]
    fn lens_lipschitz_in_distance(r1 in 0.05..2.0f64, r2 in 0.05..2.0f64, d in 0.0..4.0f64, eps in 1e-9..1e-3f64) {
        // dA/dd is minus the chord length, at most 2 min(r1, r2)
        let a = Site::new(0.0, 0.0, r1).unwrap();
        let near = lens_area(&a, &Site::new(d, 0.0, r2).unwrap()).unwrap();
        let far = lens_area(&a, &Site::new(d + eps, 0.0, r2).unwrap()).unwrap();
        prop_assert!(far <= near + 1e-12);
        prop_assert!(near - far <= 2.0 * r1.min(r2) * eps * (1.0 + 1e-6) + 1e-12);
    }

    #[test]
    fn lens_regimes(r1 in 0.05..2.0f64, r2 in 0.05..2.0f64, t in 0.0..1.0f64) {
        let a = Site::new(0.0, 0.0, r1).unwrap();
        let sum = r1 + r2;
        let outside = lens_area(&a, &Site::new(sum * (1.0 + t), 0.0, r2).unwrap()).unwrap();
        prop_assert_eq!(outside, 0.0);
        let diff = (r1 - r2).abs();
        let inside = lens_area(&a, &Site::new(diff * t, 0.0, r2).unwrap()).unwrap();
        prop_assert!((inside - PI * r1.min(r2).powi(2)).abs() <= 1e-12 * sum * sum);
    }
}
