//! Property tests for the projection and proximal kernels.

use proptest::prelude::*;

use regmod::catalog;
use regmod::instance::NonsmoothPart;
use regmod::linalg::{dist, norm, sub};
use regmod::prox::{project_sparse, project_sparse_nonneg, prox_h, ProxRequest};

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Brute-force optimal value of `min ‖u − z‖` over all supports of size
/// `kappa0` with `u = z` on the support.
fn brute_force_distance(z: &[f64], kappa0: usize) -> f64 {
    combinations(z.len(), kappa0)
        .into_iter()
        .map(|s| {
            let mut u = vec![0.0; z.len()];
            for i in s {
                u[i] = z[i];
            }
            dist(&u, z)
        })
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn hard_thresholding_is_the_euclidean_projection(
        z in proptest::collection::vec(-10.0f64..10.0, 1..=8),
        kappa_raw in 1usize..=8,
    ) {
        let kappa0 = kappa_raw.min(z.len());
        let proj = project_sparse(&z, kappa0);
        prop_assert!(proj.iter().filter(|v| **v != 0.0).count() <= kappa0);
        let got = dist(&proj, &z);
        let want = brute_force_distance(&z, kappa0);
        prop_assert!((got - want).abs() <= 1e-12, "projection {got} vs brute force {want}");
    }

    #[test]
    fn nonneg_projection_is_feasible_and_no_worse_than_any_candidate(
        z in proptest::collection::vec(-10.0f64..10.0, 1..=6),
        kappa_raw in 1usize..=6,
        cand in proptest::collection::vec(0.0f64..10.0, 6),
    ) {
        let kappa0 = kappa_raw.min(z.len());
        let proj = project_sparse_nonneg(&z, kappa0);
        prop_assert!(proj.iter().all(|&v| v >= 0.0));
        prop_assert!(proj.iter().filter(|v| **v != 0.0).count() <= kappa0);
        // any feasible candidate on a single support is at least as far
        let mut u = vec![0.0; z.len()];
        for (i, v) in cand.iter().take(z.len()).enumerate() {
            if i < kappa0 {
                u[i] = *v;
            }
        }
        prop_assert!(dist(&proj, &z) <= dist(&u, &z) + 1e-12);
    }

    #[test]
    fn soft_thresholding_is_nonexpansive(
        z1 in proptest::collection::vec(-10.0f64..10.0, 1..=6),
        shift in proptest::collection::vec(-5.0f64..5.0, 6),
        lambda in 0.0f64..3.0,
        tau in 0.01f64..2.0,
    ) {
        let z2: Vec<f64> = z1
            .iter()
            .zip(&shift)
            .map(|(a, b)| a + b)
            .collect();
        let part = NonsmoothPart::L1 { lambda };
        let p1 = prox_h(&ProxRequest { nonsmooth: &part, z: &z1, step: tau }).unwrap();
        let p2 = prox_h(&ProxRequest { nonsmooth: &part, z: &z2, step: tau }).unwrap();
        prop_assert!(norm(&sub(&p1, &p2)) <= norm(&sub(&z1, &z2)) + 1e-12);
    }

    #[test]
    fn plq_prox_is_nonexpansive_for_the_convex_tables(
        z1 in -15.0f64..15.0,
        z2 in -15.0f64..15.0,
        tau in 0.05f64..2.0,
    ) {
        for name in ["huber", "hinge"] {
            let inst = catalog::builtin(name).unwrap();
            let p1 = prox_h(&ProxRequest { nonsmooth: &inst.nonsmooth, z: &[z1], step: tau }).unwrap();
            let p2 = prox_h(&ProxRequest { nonsmooth: &inst.nonsmooth, z: &[z2], step: tau }).unwrap();
            prop_assert!((p1[0] - p2[0]).abs() <= (z1 - z2).abs() + 1e-12);
        }
    }

    #[test]
    fn prox_optimality_beats_a_grid_for_plq(
        z in -5.0f64..5.0,
        tau in 0.05f64..1.0,
    ) {
        let inst = catalog::builtin("huber").unwrap();
        let p = prox_h(&ProxRequest { nonsmooth: &inst.nonsmooth, z: &[z], step: tau }).unwrap();
        let obj = |u: f64| {
            inst.nonsmooth_value(&[u]).value() + (u - z) * (u - z) / (2.0 * tau)
        };
        let best = obj(p[0]);
        let mut u = -6.0;
        while u <= 6.0 {
            prop_assert!(best <= obj(u) + 1e-9);
            u += 1e-2;
        }
    }
}
