use std::sync::Arc;

use cayley_roe::cohomology::{d1, d2, ModuleRep};
use cayley_roe::roe::{group_algebra_embed, reassemble, translation_decomposition, Block};
use cayley_roe::sos::{self, SolverOptions};
use cayley_roe::spectral::{self, Method};
use cayley_roe::{DisjointUnionSpace, GroupAlgElement, Kernel, MarkedGroup};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_group(kind: u8, m: u64) -> Arc<MarkedGroup> {
    Arc::new(match kind {
        0 => MarkedGroup::cyclic(m),
        _ => MarkedGroup::dihedral(m.max(2)).unwrap(),
    })
}

fn element(g: &Arc<MarkedGroup>, coeffs: &[f64]) -> GroupAlgElement<f64> {
    GroupAlgElement::from_pairs(g, coeffs.iter().enumerate().map(|(i, &c)| ((i * 7) % g.order(), c)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn embedding_is_a_star_homomorphism(
        kind in 0u8..2,
        m in 2u64..9,
        a in prop::collection::vec(-2.0..2.0f64, 1..10),
        b in prop::collection::vec(-2.0..2.0f64, 1..10),
    ) {
        let g = small_group(kind, m);
        let (a, b) = (element(&g, &a), element(&g, &b));
        let prod = group_algebra_embed(&a.conv(&b).unwrap());
        let ea = group_algebra_embed(&a);
        prop_assert!(prod.max_abs_diff(&ea.mul(&group_algebra_embed(&b))) < 1e-12);
        prop_assert!(group_algebra_embed(&a.star()).max_abs_diff(&ea.adjoint()) < 1e-15);
    }

    #[test]
    fn decomposition_reassembles(
        sizes in prop::collection::vec(1usize..7, 1..4),
        seeds in prop::collection::vec((0usize..40, 0usize..40, -3.0..3.0f64), 0..30),
    ) {
        let space = Arc::new(DisjointUnionSpace::plain(sizes.iter().map(|&n| Block::path(n)).collect()));
        let n = space.len();
        let entries: Vec<_> = seeds
            .iter()
            .map(|&(x, y, v)| (x % n, y % n, v))
            .filter(|&(x, y, _)| space.same_block(x, y))
            .collect();
        let a = Kernel::from_entries(&space, entries).unwrap();
        let parts = translation_decomposition(&a);
        prop_assert!(reassemble(&space, &parts).max_abs_diff(&a) < 1e-15);
        let mut degree = vec![0usize; 2 * n];
        for (x, y, _) in a.entries() {
            degree[x] += 1;
            degree[n + y] += 1;
        }
        prop_assert!(parts.len() <= degree.into_iter().max().unwrap_or(0));
    }

    #[test]
    fn union_gap_is_the_smallest_gap(ms in prop::collection::vec(2u64..12, 1..5)) {
        let groups: Vec<_> = ms.iter().map(|&m| small_group(0, m)).collect();
        let each = groups
            .iter()
            .map(|g| spectral::spectral_gap(g, Method::Dense).unwrap().nu)
            .fold(f64::INFINITY, f64::min);
        prop_assert!((spectral::union_gap(&groups).unwrap() - each).abs() < 1e-10);
    }

    #[test]
    fn coboundaries_are_cocycles(sizes in prop::collection::vec(1usize..4, 1..3), mult in 1usize..3, seed in 0u64..1000) {
        let space = DisjointUnionSpace::plain(sizes.iter().map(|&n| Block::path(n)).collect());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let module = ModuleRep::from_multiplicities(&space, &vec![mult; sizes.len()]).unwrap().random_conjugate(&mut rng);
        let v = DVector::from_fn(module.dim(), |i, _| ((i as u64 * 31 + seed) % 17) as f64 - 8.0);
        let dd = d2(&space, &module, &d1(&space, &module, &v)).unwrap();
        prop_assert!(dd.matrix.amax() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn certified_gap_is_a_lower_bound(kind in 0u8..2, m in 3u64..9) {
        let g = small_group(kind, m);
        let exact = spectral::spectral_gap(&g, Method::Dense).unwrap().nu;
        let c = sos::certified_gap(&g, g.diameter(), 1e-3, 1e-6, &SolverOptions::default()).unwrap();
        prop_assert!(c.gap <= exact + 1e-6, "{} {} {}", g.label(), c.gap, exact);
        prop_assert!(c.gap >= 0.95 * exact - 1e-3);
    }
}
