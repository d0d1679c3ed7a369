mod common;

use common::{brute_force, ensemble, mean, params, rel_close};
use proptest::prelude::*;
use superrad::{build_geometry, coupling_g, lamb_shift, AtomParams, CouplingSummary, Geometry};

#[test]
fn random_clusters_match_brute_force() {
    for seed in 0..20u64 {
        let n = 2 + (seed as usize % 7);
        let p = AtomParams { gamma_s: 0.7, ..params() };
        let ens = build_geometry(&Geometry::RandomSphere { n, radius: 3.0 }, p, seed).unwrap();
        let (g_ref, d_ref) = brute_force(ens.positions(), 0.7);
        let (g, g_i) = coupling_g(&ens);
        let (d, d_i) = lamb_shift(&ens);
        assert!(rel_close(g, mean(&g_ref), 1e-12), "seed {seed}");
        assert!(rel_close(d, mean(&d_ref), 1e-12), "seed {seed}");
        for i in 0..n {
            assert!(rel_close(g_i[i], g_ref[i], 1e-12));
            assert!(rel_close(d_i[i], d_ref[i], 1e-12));
        }
    }
}

#[test]
fn uniform_sites_have_no_spread() {
    let ens = build_geometry(&Geometry::Cubic { n_side: 2, spacing: 0.3 }, params(), 0).unwrap();
    let c = CouplingSummary::compute(&ens);
    assert!(c.g_relative_spread < 1e-12);
    assert_eq!(c.g_per_atom.len(), 8);
}

fn positions(max: usize) -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec(prop::array::uniform3(-4.0f64..4.0), 2..max)
        .prop_filter("separated", |p| (0..p.len()).all(|i| (0..i).all(|j| common::dist(&p[i], &p[j]) > 1e-3)))
}

proptest! {
    #[test]
    fn invariant_under_rigid_motion(pos in positions(7), shift in prop::array::uniform3(-10.0f64..10.0), angle in 0.0f64..6.3) {
        let base = ensemble(pos.clone(), params());
        let (c, s) = (angle.cos(), angle.sin());
        let moved: Vec<[f64; 3]> = pos
            .iter()
            .map(|p| [c * p[0] - s * p[1] + shift[0], s * p[0] + c * p[1] + shift[1], p[2] + shift[2]])
            .collect();
        let other = ensemble(moved, params());
        let (g0, gi0) = coupling_g(&base);
        let (g1, gi1) = coupling_g(&other);
        prop_assert!((g0 - g1).abs() <= 1e-9 * (1.0 + g0.abs()));
        for (a, b) in gi0.iter().zip(&gi1) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn permutation_relabels_per_atom_values(pos in positions(7), seed in any::<u64>()) {
        let base = ensemble(pos.clone(), params());
        let n = pos.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut x = seed;
        for i in (1..n).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (x >> 33) as usize % (i + 1));
        }
        let other = base.permuted(&perm).unwrap();
        let (g0, gi0) = coupling_g(&base);
        let (g1, gi1) = coupling_g(&other);
        let (_, di0) = lamb_shift(&base);
        let (_, di1) = lamb_shift(&other);
        prop_assert!((g0 - g1).abs() <= 1e-12 * (1.0 + g0.abs()));
        for k in 0..n {
            prop_assert!((gi1[k] - gi0[perm[k]]).abs() <= 1e-12 * (1.0 + gi0[perm[k]].abs()));
            prop_assert!((di1[k] - di0[perm[k]]).abs() <= 1e-12 * (1.0 + di0[perm[k]].abs()));
        }
    }

    #[test]
    fn linear_in_gamma_s(pos in positions(6), scale in 0.1f64..10.0) {
        let base = ensemble(pos.clone(), params());
        let other = base.with_gamma_s(base.params().gamma_s * scale).unwrap();
        let (g0, _) = coupling_g(&base);
        let (g1, _) = coupling_g(&other);
        let (d0, _) = lamb_shift(&base);
        let (d1, _) = lamb_shift(&other);
        // the means cancel; terms are at most gamma_s / 1e-3 for these separations
        let tol = 1e-12 * scale * pos.len() as f64 * 1e3;
        prop_assert!((g1 - scale * g0).abs() <= tol);
        prop_assert!((d1 - scale * d0).abs() <= tol);
    }

    #[test]
    fn g_bounded_by_partner_count(pos in positions(8)) {
        // |sin x / x| <= 1
        let ens = ensemble(pos.clone(), params());
        let (_, gi) = coupling_g(&ens);
        for g in gi {
            prop_assert!(g.abs() <= (pos.len() - 1) as f64 + 1e-12);
        }
    }
}
