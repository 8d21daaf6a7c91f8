use proptest::prelude::*;

use c1mixed::analysis::{decay_exponent, error_linf};
use c1mixed::bernstein::{basis, num_ordinates, Patch};
use c1mixed::functions::Polynomial;
use c1mixed::geometry::Frame;
use c1mixed::mesh::{ElementKind, MixedMesh};
use c1mixed::space::{check_membership, dimension, SplineSpace};

/// A 2x2 patch of elements over the unit square with the centre vertex
/// moved to `(cx, cy)`: two quads in the bottom row, four triangles on top.
fn jittered(cx: f64, cy: f64) -> MixedMesh<f64> {
    let v = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0], [cx, cy], [2.0, 1.0], [0.0, 2.0], [1.0, 2.0], [2.0, 2.0]];
    MixedMesh::new(v, &[vec![3, 4, 7], vec![3, 7, 6], vec![4, 5, 8], vec![4, 8, 7]], &[vec![0, 1, 4, 3], vec![1, 2, 5, 4]]).unwrap()
}

fn kind() -> impl Strategy<Value = ElementKind> {
    prop_oneof![Just(ElementKind::Triangle), Just(ElementKind::Quad)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bernstein_partition_of_unity(p in 0usize..12, t in 0.0f64..1.0) {
        let s: f64 = basis(p, t).iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-13);
    }

    #[test]
    fn frame_round_trip(k in kind(), a in 0usize..4, forward in any::<bool>(), seed in 0u64..1000) {
        let n = k.num_vertices();
        let a = a % n;
        let b = if forward { (a + 1) % n } else { (a + n - 1) % n };
        let ords: Vec<f64> = (0..num_ordinates(k, 6)).map(|i| ((i as u64 * 7919 + seed) % 101) as f64 / 50.0 - 1.0).collect();
        let patch = Patch::new(k, 6, ords).unwrap();
        let f = Frame::new(k, a, b);
        prop_assert_eq!(f.from_canonical(&f.to_canonical(&patch)), patch);
    }

    #[test]
    fn refinement_preserves_area_and_counts(cx in 0.8f64..1.2, cy in 0.8f64..1.2) {
        let m = jittered(cx, cy);
        let r = m.refine().unwrap();
        prop_assert_eq!(r.num_elements(), 4 * m.num_elements());
        prop_assert!((r.area() - m.area()).abs() < 1e-12);
        prop_assert_eq!(r.num_vertices(), m.num_vertices() + m.num_edges() + m.num_quads());
    }

    #[test]
    fn dimension_matches_space(cx in 0.8f64..1.2, cy in 0.8f64..1.2, p in 5usize..9) {
        let m = jittered(cx, cy);
        prop_assert_eq!(SplineSpace::new(&m, p).unwrap().dim(), dimension(&m, p).unwrap());
    }

    #[test]
    fn interpolation_reproduces_polynomials(cx in 0.8f64..1.2, cy in 0.8f64..1.2, p in 5usize..8, c in prop::collection::vec(-1.0f64..1.0, 36)) {
        let m = jittered(cx, cy);
        let mut terms = Vec::new();
        let mut it = c.iter();
        for a in 0..=p {
            for b in 0..=p - a {
                terms.push(((a, b), *it.next().unwrap() / 2f64.powi((a + b) as i32)));
            }
        }
        let f = Polynomial::new(terms);
        let s = SplineSpace::new(&m, p).unwrap().interpolate(&f);
        prop_assert!(error_linf(&s, &f, &m) < 1e-10);
        prop_assert!(check_membership(&s, &m).unwrap().passes(1e-9, 1e-8, 1e-10));
    }

    #[test]
    fn decay_exponent_of_halving(e in 1e-10f64..1.0, k in 0u32..8) {
        let g = decay_exponent(e, e / 2f64.powi(k as i32)).unwrap_or(f64::NAN);
        if e / 2f64.powi(k as i32) > 1e-13 {
            prop_assert!((g - k as f64).abs() < 1e-9);
        } else {
            prop_assert!(g.is_nan());
        }
    }
}
