use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparselab::grid::{
    bilinear_pairing, dyadic_family, local_average, shifted_grid_cubes, DyadicCube, GridWindow, Signal,
};
use sparselab::weights::{
    ap_characteristic, conjugate, dual_weight, power_weight, rh_characteristic, weighted_lp_norm, Weight,
};

fn random_signal(rng: &mut ChaCha8Rng, lo: i64, len: usize) -> Signal {
    Signal::new(lo, (0..len).map(|_| rng.random_range(-2.0..2.0)).collect())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn local_average_vs_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = random_signal(&mut rng, -300, 700);
    for level in 0..7 {
        for shift in 1..=3u8 {
            for x in (-150..150).step_by(37) {
                let q = DyadicCube::containing(shift, level, x);
                let (a, b) = q.triple();
                let mut acc = 0.0;
                let mut x = a;
                while x < b {
                    acc += f.get(x).abs().powf(1.5);
                    x += 1;
                }
                let oracle = (acc / (b - a) as f64).powf(1.0 / 1.5);
                assert!(rel(local_average(&f, &q, 1.5).unwrap(), oracle) < 1e-12);
            }
        }
    }
}

#[test]
fn one_point_average() {
    let q = DyadicCube::containing(1, 2, 0);
    let (a, _) = q.triple();
    let avg = local_average(&Signal::delta(a + 5), &q, 2.0).unwrap();
    assert!((avg - (1.0f64 / 12.0).sqrt()).abs() < 1e-15);
}

#[test]
fn pairing_vs_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = random_signal(&mut rng, -40, 90);
    let g = random_signal(&mut rng, 10, 120);
    let mut oracle = 0.0;
    for (x, a) in f.iter() {
        for (y, b) in g.iter() {
            if x == y {
                oracle += a * b;
            }
        }
    }
    assert!((bilinear_pairing(&f, &g) - oracle).abs() < 1e-12);
    assert_eq!(bilinear_pairing(&Signal::delta(3), &Signal::delta(4)), 0.0);
}

#[test]
fn thirds_cover_with_multiplicity_one() {
    let window = GridWindow::new(0, 1024).unwrap();
    for level in 0..=8 {
        let mut count = vec![0u32; 1024];
        for shift in 1..=3u8 {
            for q in shifted_grid_cubes(shift, level, window) {
                let (a, b) = q.third();
                for x in a.max(0)..b.min(1024) {
                    count[x as usize] += 1;
                }
            }
        }
        assert!(count.iter().all(|&c| c == 1), "level {level}");
    }
    assert!(shifted_grid_cubes(1, 3, GridWindow { lo: 5, hi: 5 }).is_empty());
}

/// Every shifted dyadic interval inside the window, found by locating the
/// cube through each point.
fn brute_family(window: GridWindow) -> Vec<(i64, i64)> {
    let mut out = BTreeSet::new();
    let mut side = 1i64;
    let mut level = 0;
    while side <= window.len() as i64 {
        for shift in 1..=3u8 {
            for x in window.points() {
                let (a, b) = DyadicCube::containing(shift, level, x).bounds();
                if a >= window.lo && b <= window.hi {
                    out.insert((a, b));
                }
            }
        }
        side *= 2;
        level += 1;
    }
    out.into_iter().collect()
}

fn brute_ap(w: &Weight, p: f64, family: &[(i64, i64)]) -> f64 {
    let mut best: f64 = 0.0;
    for &(a, b) in family {
        let n = (b - a) as f64;
        let (mut s1, mut s2) = (0.0, 0.0);
        for x in a..b {
            s1 += w.get(x);
            s2 += w.get(x).powf(1.0 / (1.0 - p));
        }
        best = best.max(s1 / n * (s2 / n).powf(p - 1.0));
    }
    best
}

fn brute_rh(w: &Weight, r: f64, family: &[(i64, i64)]) -> f64 {
    let mut best: f64 = 0.0;
    for &(a, b) in family {
        let n = (b - a) as f64;
        let (mut s1, mut sr) = (0.0, 0.0);
        for x in a..b {
            s1 += w.get(x);
            sr += w.get(x).powf(r);
        }
        best = best.max((sr / n).powf(1.0 / r) / (s1 / n));
    }
    best
}

#[test]
fn characteristics_vs_brute_force() {
    let window = GridWindow::new(-1024, 1025).unwrap();
    let w = power_weight(0.5, window).unwrap();
    let family = dyadic_family(window);
    let brute = brute_family(window);
    let ours: BTreeSet<(i64, i64)> = family.iter().map(|q| q.bounds()).collect();
    assert_eq!(ours.into_iter().collect::<Vec<_>>(), brute);

    assert!(rel(ap_characteristic(&w, 2.0, &family).unwrap(), brute_ap(&w, 2.0, &brute)) < 1e-10);
    assert!(rel(rh_characteristic(&w, 1.5, &family).unwrap(), brute_rh(&w, 1.5, &brute)) < 1e-10);
}

#[test]
fn ap_two_growth_trend() {
    let at = |a: f64, n: i64| {
        let window = GridWindow::new(-n, n + 1).unwrap();
        ap_characteristic(&power_weight(a, window).unwrap(), 2.0, &dyadic_family(window)).unwrap()
    };
    let good: Vec<f64> = [256, 1024, 4096].iter().map(|&n| at(0.5, n)).collect();
    let bad: Vec<f64> = [256, 1024, 4096].iter().map(|&n| at(1.5, n)).collect();
    assert!(good[2] / good[0] < 1.05, "{good:?}");
    assert!(bad[1] > 1.5 * bad[0] && bad[2] > 1.5 * bad[1], "{bad:?}");
}

fn random_weight(seed: u64, len: usize) -> Weight {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = GridWindow::new(0, len as i64).unwrap();
    Weight::from_fn(window, |_| rng.random_range(-3.0f64..3.0).exp()).unwrap()
}

#[test]
fn aq_monotone_on_random_weights() {
    let window = GridWindow::new(0, 64).unwrap();
    let family = dyadic_family(window);
    for seed in 0..100 {
        let w = random_weight(seed, 64);
        let qs = [1.2, 1.5, 2.0, 3.0, 5.0];
        let chars: Vec<f64> = qs.iter().map(|&q| ap_characteristic(&w, q, &family).unwrap()).collect();
        for pair in chars.windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-12), "seed {seed}: {chars:?}");
        }
    }
}

#[test]
fn holder_duality_trials() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let window = GridWindow::new(0, 200).unwrap();
    for _ in 0..200 {
        let p = rng.random_range(1.1..5.0);
        let w = Weight::from_fn(window, |_| rng.random_range(0.1..10.0)).unwrap();
        let sigma = dual_weight(&w, p).unwrap();
        let f = Signal::from_fn(window, |_| rng.random_range(-1.0..1.0));
        let g = Signal::from_fn(window, |_| rng.random_range(-1.0..1.0));
        let lhs: f64 = window.points().map(|x| f.get(x) * sigma.get(x) * g.get(x) * w.get(x)).sum();
        let rhs = weighted_lp_norm(&f, &sigma, p).unwrap() * weighted_lp_norm(&g, &w, conjugate(p)).unwrap();
        assert!(lhs.abs() <= rhs * (1.0 + 1e-12));
    }
}

proptest! {
    #[test]
    fn power_means_increase(seed in any::<u64>(), r in 1.0f64..4.0, dr in 0.0f64..3.0, level in 0u32..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_signal(&mut rng, -100, 200);
        let q = DyadicCube::containing(rng.random_range(1..=3), level, rng.random_range(-50..50));
        let lo = local_average(&f, &q, r).unwrap();
        let hi = local_average(&f, &q, r + dr).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-12));
        prop_assert!(local_average(&f, &q, 1.0).unwrap() <= lo * (1.0 + 1e-12));
        prop_assert!(hi <= f.sup_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn weight_identities(seed in any::<u64>(), p in 1.05f64..6.0, r in 1.05f64..4.0) {
        let w = random_weight(seed, 48);
        let family = dyadic_family(w.window());
        let ap = ap_characteristic(&w, p, &family).unwrap();
        prop_assert!(ap >= 1.0 - 1e-12);
        prop_assert!(rh_characteristic(&w, r, &family).unwrap() >= 1.0 - 1e-12);
        let pp = conjugate(p);
        let sigma = dual_weight(&w, p).unwrap();
        let dual = ap_characteristic(&sigma, pp, &family).unwrap();
        prop_assert!(rel(dual, ap.powf(pp - 1.0)) < 1e-10);
        let back = dual_weight(&sigma, pp).unwrap();
        for (a, b) in back.values().iter().zip(w.values()) {
            prop_assert!(rel(*a, *b) < 1e-12);
        }
    }

    #[test]
    fn constant_weight_is_trivial(len in 1usize..200, p in 1.01f64..8.0) {
        let window = GridWindow::new(0, len as i64).unwrap();
        let family = dyadic_family(window);
        prop_assert!((ap_characteristic(&Weight::constant(window), p, &family).unwrap() - 1.0).abs() < 1e-12);
    }
}
