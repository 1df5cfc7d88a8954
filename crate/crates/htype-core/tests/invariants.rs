//! Cross-module invariants checked on randomized product-group data.

use std::sync::Arc;

use proptest::prelude::*;

use htype_core::{
    Ambient, CenterMatrix, FinslerSpec, GroupPoint, HTypeAlgebra, MetricSpec, RiemannianSpec,
    WeightLaw,
};

fn ambient(alg: &str, blocks: usize) -> Arc<Ambient> {
    Ambient::new(HTypeAlgebra::by_name(alg).unwrap(), blocks)
}

fn point(amb: &Arc<Ambient>, horiz: &[f64], center: &[f64]) -> GroupPoint {
    let mut p = GroupPoint::zero(amb);
    for (dst, src) in p.horizontal_mut().iter_mut().zip(horiz.iter().cycle()) {
        *dst = *src;
    }
    for (dst, src) in p.center_mut().iter_mut().zip(center.iter().cycle()) {
        *dst = *src;
    }
    p
}

proptest! {
    #[test]
    fn group_law_is_associative(
        a in proptest::collection::vec(-1.0f64..1.0, 8),
        b in proptest::collection::vec(-1.0f64..1.0, 8),
        c in proptest::collection::vec(-1.0f64..1.0, 8),
    ) {
        for alg in ["heisenberg", "quaternionic"] {
            let amb = ambient(alg, 4);
            let p = point(&amb, &a[..4], &a[4..]);
            let q = point(&amb, &b[..4], &b[4..]);
            let r = point(&amb, &c[..4], &c[4..]);
            let lhs = p.multiply(&q).unwrap().multiply(&r).unwrap();
            let rhs = p.multiply(&q.multiply(&r).unwrap()).unwrap();
            let diff = lhs.axpy(-1.0, &rhs).unwrap();
            prop_assert!(diff.norm() < 1e-12, "{alg}: {}", diff.norm());
        }
    }

    #[test]
    fn inverse_and_cancellation(
        a in proptest::collection::vec(-2.0f64..2.0, 8),
        b in proptest::collection::vec(-2.0f64..2.0, 8),
    ) {
        let amb = ambient("quaternionic", 2);
        let p = point(&amb, &a[..4], &a[4..]);
        let q = point(&amb, &b[..4], &b[4..]);
        // p^{-1} (p q) = q
        let back = p.inverse().multiply(&p.multiply(&q).unwrap()).unwrap();
        let diff = back.axpy(-1.0, &q).unwrap();
        prop_assert!(diff.norm() < 1e-12);
    }

    #[test]
    fn bracket_is_central_two_step(
        a in proptest::collection::vec(-1.0f64..1.0, 6),
        b in proptest::collection::vec(-1.0f64..1.0, 6),
        c in proptest::collection::vec(-1.0f64..1.0, 6),
    ) {
        let amb = ambient("heisenberg", 3);
        let u = point(&amb, &a, &[0.0]);
        let v = point(&amb, &b, &[0.0]);
        let w = point(&amb, &c, &[0.0]);
        let uv = u.bracket(&v).unwrap();
        prop_assert!(uv.is_horizontal_part_zero());
        // [[u, v], w] = 0: the bracket lands in the center and brackets away
        let nested = uv.bracket(&w).unwrap();
        prop_assert_eq!(nested.norm(), 0.0);
    }

    #[test]
    fn product_level_pairing_identity(
        a in proptest::collection::vec(-1.0f64..1.0, 128),
        z in proptest::collection::vec(-1.0f64..1.0, 3),
    ) {
        // [x, J_z x] = |x|^2 z summed over all 32 blocks
        for alg in ["heisenberg", "quaternionic"] {
            let amb = ambient(alg, 32);
            let zc = &z[..amb.dim_w()];
            let x = point(&amb, &a, &[0.0]);
            let jx = x.j_apply(zc).unwrap();
            let br = x.bracket(&jx).unwrap();
            let nx2 = x.norm_sq();
            let resid = br
                .center()
                .iter()
                .zip(zc)
                .map(|(got, want)| (got - nx2 * want).abs())
                .fold(0.0f64, f64::max);
            prop_assert!(resid < 1e-12 * nx2.max(1.0), "{alg}: {resid}");
        }
    }

    #[test]
    fn product_level_bracket_bound(
        a in proptest::collection::vec(-1.0f64..1.0, 128),
        b in proptest::collection::vec(-1.0f64..1.0, 128),
    ) {
        for alg in ["heisenberg", "quaternionic"] {
            let amb = ambient(alg, 32);
            let x = point(&amb, &a, &[0.0]);
            let y = point(&amb, &b, &[0.0]);
            let br = x.bracket(&y).unwrap();
            prop_assert!(br.norm() <= x.norm() * y.norm() + 1e-12, "{alg}");
        }
    }

    #[test]
    fn weak_norms_obey_continuity_bounds(
        a in proptest::collection::vec(-1.0f64..1.0, 10),
    ) {
        let amb = ambient("heisenberg", 4);
        let v = point(&amb, &a[..8], &a[8..]);
        for metric in [
            MetricSpec::Riemannian(
                RiemannianSpec::with_identity_center(WeightLaw::InversePower(1.0), 1).unwrap(),
            ),
            MetricSpec::Riemannian(
                RiemannianSpec::with_identity_center(WeightLaw::Exponential(0.5), 1).unwrap(),
            ),
            MetricSpec::Finsler(FinslerSpec::new(4.0, CenterMatrix::identity(1)).unwrap()),
        ] {
            let c = metric.continuity_constant();
            let wn = metric.weak_norm(&v).unwrap();
            prop_assert!(wn <= c * v.norm() + 1e-12, "norm {wn} vs bound {}", c * v.norm());
        }
    }
}
