//! B-adjoint vectors, Arnold's sectional-curvature formula, blow-up plane
//! sequences, and the Levi-Civita obstruction diagnostic.
//!
//! At finite truncation the metric operator `A` is invertible, so B-adjoint
//! vectors always exist; the infinite-model nonexistence is surfaced as a
//! conditioning factor and as unbounded growth of the obstruction norm in
//! the block index.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{Ambient, GroupPoint, TangentVector};
use crate::metrics::{MetricSpec, RiemannianSpec, Strictness};

/// Planes whose σ₀-Gram condition number exceeds this are rejected:
/// curvature values past that point are numerically meaningless.
pub const PLANE_COND_LIMIT: f64 = 1e12;

const ORTHO_TOL: f64 = 1e-12;

/// The B-adjoint vector `B_{σ₀}(y, x) = A⁻¹(J_{A y₂} x₁)` together with the
/// amplification factor `max 1/a_k` over the blocks it occupies.
#[derive(Debug, Clone)]
pub struct BAdjointResult {
    pub vector: TangentVector,
    pub conditioning: f64,
}

/// Computes the B-adjoint vector of `(y, x)`, the representer of
/// `z ↦ <[x, z], y>_{σ₀}`.
pub fn b_adjoint(
    spec: &RiemannianSpec,
    y: &TangentVector,
    x: &TangentVector,
) -> Result<BAdjointResult> {
    let ay2 = spec.w_matrix().apply(y.center());
    let x1 = x.project_horizontal();
    let u = x1.j_apply(&ay2)?;
    let (vector, conditioning) = spec.apply_a_inv_horizontal(&u)?;
    Ok(BAdjointResult {
        vector,
        conditioning,
    })
}

/// A two-dimensional tangent subspace with a σ₀-orthonormalized basis.
#[derive(Debug, Clone)]
pub struct Plane {
    raw_basis: (TangentVector, TangentVector),
    ortho_basis: (TangentVector, TangentVector),
}

impl Plane {
    /// σ₀-orthonormalizes the span of `x` and `y` by Gram-Schmidt with one
    /// re-orthogonalization pass.
    pub fn new(spec: &RiemannianSpec, x: &TangentVector, y: &TangentVector) -> Result<Self> {
        let gxx = spec.sigma_inner(x, x)?;
        let gxy = spec.sigma_inner(x, y)?;
        let gyy = spec.sigma_inner(y, y)?;
        let tr = gxx + gyy;
        let det = gxx * gyy - gxy * gxy;
        if det <= 0.0 || gxx <= 0.0 {
            return Err(Error::ContractViolation(
                "plane basis is linearly dependent".into(),
            ));
        }
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        let lam_max = 0.5 * (tr + disc);
        let lam_min = 0.5 * (tr - disc);
        if lam_min <= 0.0 || lam_max / lam_min > PLANE_COND_LIMIT {
            return Err(Error::ContractViolation(format!(
                "plane Gram condition number {:.3e} exceeds {PLANE_COND_LIMIT:.0e}",
                lam_max / lam_min.max(f64::MIN_POSITIVE)
            )));
        }

        let e1 = x.scaled(1.0 / gxx.sqrt());
        let mut e2 = y.axpy(-spec.sigma_inner(y, &e1)?, &e1)?;
        // second pass suppresses cancellation when ||x||_sigma is tiny
        e2 = e2.axpy(-spec.sigma_inner(&e2, &e1)?, &e1)?;
        let n2 = spec.sigma_norm(&e2)?;
        if n2 == 0.0 {
            return Err(Error::ContractViolation(
                "plane basis is linearly dependent".into(),
            ));
        }
        let e2 = e2.scaled(1.0 / n2);
        Ok(Self {
            raw_basis: (x.clone(), y.clone()),
            ortho_basis: (e1, e2),
        })
    }

    pub fn raw_basis(&self) -> (&TangentVector, &TangentVector) {
        (&self.raw_basis.0, &self.raw_basis.1)
    }

    pub fn ortho_basis(&self) -> (&TangentVector, &TangentVector) {
        (&self.ortho_basis.0, &self.ortho_basis.1)
    }

    /// Max deviation of the σ₀-Gram matrix of the ortho basis from Id.
    pub fn gram_residual(&self, spec: &RiemannianSpec) -> Result<f64> {
        let (e1, e2) = self.ortho_basis();
        let r11 = (spec.sigma_inner(e1, e1)? - 1.0).abs();
        let r22 = (spec.sigma_inner(e2, e2)? - 1.0).abs();
        let r12 = spec.sigma_inner(e1, e2)?.abs();
        Ok(r11.max(r22).max(r12))
    }
}

/// Sectional curvature of a plane by Arnold's formula:
/// `K = <δ,δ> + 2<α,β> - 3<α,α> - 4<B_x,B_y>` over the σ₀-orthonormal basis.
pub fn arnold_curvature(spec: &RiemannianSpec, plane: &Plane) -> Result<f64> {
    if plane.gram_residual(spec)? > ORTHO_TOL {
        return Err(Error::ContractViolation(
            "plane basis is not sigma-orthonormal".into(),
        ));
    }
    let (x, y) = plane.ortho_basis();
    let b_xy = b_adjoint(spec, x, y)?.vector;
    let b_yx = b_adjoint(spec, y, x)?.vector;
    let b_xx = b_adjoint(spec, x, x)?.vector;
    let b_yy = b_adjoint(spec, y, y)?.vector;

    let delta = b_xy.axpy(1.0, &b_yx)?.scaled(0.5);
    let beta = b_xy.axpy(-1.0, &b_yx)?.scaled(0.5);
    let alpha = x.bracket(y)?.scaled(0.5);
    let b_x = b_xx.scaled(0.5);
    let b_y = b_yy.scaled(0.5);

    Ok(
        spec.sigma_inner(&delta, &delta)? + 2.0 * spec.sigma_inner(&alpha, &beta)?
            - 3.0 * spec.sigma_inner(&alpha, &alpha)?
            - 4.0 * spec.sigma_inner(&b_x, &b_y)?,
    )
}

/// The blow-up plane pair at index `n` with their Arnold curvatures.
#[derive(Debug, Clone)]
pub struct BlowupResult {
    pub p_plane: Plane,
    pub q_plane: Plane,
    pub k_p: f64,
    pub k_q: f64,
}

/// Builds `P_n = span{w_n, J_z w_n}` and `Q_n = span{z, J_{Az} w_n}` along
/// the degenerate sequence and evaluates both curvatures by the full Arnold
/// formula.
pub fn blowup_planes(
    spec: &RiemannianSpec,
    n: usize,
    z: &[f64],
    ambient: &Arc<Ambient>,
) -> Result<BlowupResult> {
    let metric = MetricSpec::Riemannian(spec.clone());
    if metric.classify_strictness() != Strictness::StrictlyWeak {
        return Err(Error::StrongMetric(
            "blow-up requires a strictly weak metric".into(),
        ));
    }
    let znorm: f64 = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (znorm - 1.0).abs() > 1e-12 {
        return Err(Error::ContractViolation(format!(
            "z must be a unit center vector, |z| = {znorm}"
        )));
    }
    let w = metric.degenerate_sequence(n, ambient)?;
    let j_z_w = w.j_apply(z)?;
    let p_plane = Plane::new(spec, &w, &j_z_w)?;

    let az = spec.w_matrix().apply(z);
    let j_az_w = w.j_apply(&az)?;
    let z_point = GroupPoint::from_center(ambient, z)?;
    let q_plane = Plane::new(spec, &z_point, &j_az_w)?;

    let k_p = arnold_curvature(spec, &p_plane)?;
    let k_q = arnold_curvature(spec, &q_plane)?;
    Ok(BlowupResult {
        p_plane,
        q_plane,
        k_p,
        k_q,
    })
}

/// Norm of the would-be covariant derivative `A⁻¹(J_{A x₂} x₁)` along the
/// block-`n` probe `x₁ = J_{A x₂} v_n`.
///
/// Equals `|A x₂|² / a_n`; bounded in `n` exactly when the law is strong,
/// unbounded growth is the finite-truncation signature of the missing
/// Levi-Civita derivative.
pub fn levi_civita_obstruction(
    spec: &RiemannianSpec,
    ambient: &Arc<Ambient>,
    x2: &[f64],
    n: usize,
) -> Result<f64> {
    if x2.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidInput(
            "obstruction probe needs a nonzero center component".into(),
        ));
    }
    let ax2 = spec.w_matrix().apply(x2);
    let v_n = GroupPoint::unit_block(ambient, n, 0)?;
    let x1 = v_n.j_apply(&ax2)?;
    let u = x1.j_apply(&ax2)?;
    let (inv, _) = spec.apply_a_inv_horizontal(&u)?;
    Ok(inv.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::HTypeAlgebra;
    use crate::metrics::{CenterMatrix, WeightLaw};

    fn heis(n: usize) -> Arc<Ambient> {
        Ambient::new(HTypeAlgebra::heisenberg(), n)
    }

    fn spec_ip(q: f64) -> RiemannianSpec {
        RiemannianSpec::with_identity_center(WeightLaw::InversePower(q), 1).unwrap()
    }

    fn spec_const() -> RiemannianSpec {
        RiemannianSpec::with_identity_center(WeightLaw::Constant(1.0), 1).unwrap()
    }

    #[test]
    fn b_adjoint_vanishing_cases() {
        let amb = heis(3);
        let spec = spec_ip(1.0);
        let mut y = GroupPoint::zero(&amb); // y in V
        y.horizontal_mut()[0] = 2.0;
        let mut x = GroupPoint::zero(&amb);
        x.horizontal_mut()[3] = -1.5;
        x.center_mut()[0] = 0.4;
        let b = b_adjoint(&spec, &y, &x).unwrap();
        assert_eq!(b.vector.norm(), 0.0);

        // x in W
        let xw = GroupPoint::from_center(&amb, &[3.0]).unwrap();
        let mut y2 = y.clone();
        y2.center_mut()[0] = 1.0;
        let b = b_adjoint(&spec, &y2, &xw).unwrap();
        assert_eq!(b.vector.norm(), 0.0);
    }

    #[test]
    fn b_adjoint_jaz_closed_form() {
        // B(z, J_{Az}(Ax)) = -|Az|² x
        let amb = heis(4);
        let spec = spec_ip(1.0);
        let z = [1.0];
        let az = spec.w_matrix().apply(&z);
        let mut x = GroupPoint::zero(&amb);
        x.horizontal_mut()
            .copy_from_slice(&[0.3, -0.7, 0.2, 0.9, 0.0, 0.1, -0.4, 0.5]);
        let ax = spec.apply_a(&x).unwrap();
        let j_az_ax = ax.j_apply(&az).unwrap();
        let zp = GroupPoint::from_center(&amb, &z).unwrap();
        let b = b_adjoint(&spec, &zp, &j_az_ax).unwrap();
        let az_sq: f64 = az.iter().map(|v| v * v).sum();
        let expect = x.scaled(-az_sq);
        let diff = b.vector.axpy(-1.0, &expect).unwrap();
        assert!(diff.norm() < 1e-12, "residual {}", diff.norm());
    }

    #[test]
    fn b_adjoint_defining_identity() {
        use rand::{Rng, SeedableRng};
        let amb = heis(4);
        let w_mat = CenterMatrix::identity(1);
        let spec = RiemannianSpec::new(WeightLaw::InversePower(1.0), w_mat).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let rand_vec = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut v = GroupPoint::zero(&amb);
            for e in v.horizontal_mut() {
                *e = rng.gen_range(-1.0..1.0);
            }
            v.center_mut()[0] = rng.gen_range(-1.0..1.0);
            v
        };
        for _ in 0..100 {
            let x = rand_vec(&mut rng);
            let y = rand_vec(&mut rng);
            let z = rand_vec(&mut rng);
            let b = b_adjoint(&spec, &y, &x).unwrap();
            let lhs = spec.sigma_inner(&z, &b.vector).unwrap();
            let rhs = spec.sigma_inner(&x.bracket(&z).unwrap(), &y).unwrap();
            assert!((lhs - rhs).abs() < 1e-10, "identity residual {}", lhs - rhs);
        }
    }

    #[test]
    fn b_adjoint_bilinear_homogeneity() {
        let amb = heis(2);
        let spec = spec_ip(2.0);
        let mut x = GroupPoint::zero(&amb);
        x.horizontal_mut().copy_from_slice(&[0.5, -0.2, 0.8, 0.1]);
        let mut y = GroupPoint::zero(&amb);
        y.center_mut()[0] = 0.7;
        y.horizontal_mut()[1] = -0.4;
        let b = b_adjoint(&spec, &y, &x).unwrap();
        let b_scaled = b_adjoint(&spec, &y.scaled(3.0), &x.scaled(-2.0)).unwrap();
        let diff = b_scaled.vector.axpy(6.0, &b.vector).unwrap(); // ts = -6
        assert!(diff.norm() < 1e-12);
    }

    #[test]
    fn heisenberg_flat_plane_curvature() {
        let amb = heis(1);
        let spec = spec_const();
        let e1 = GroupPoint::unit_block(&amb, 1, 0).unwrap();
        let e2 = GroupPoint::unit_block(&amb, 1, 1).unwrap();
        let plane = Plane::new(&spec, &e1, &e2).unwrap();
        let k = arnold_curvature(&spec, &plane).unwrap();
        assert!((k + 0.75).abs() < 1e-12, "K = {k}");
    }

    #[test]
    fn strong_law_sanity_planes() {
        // constant(1): the closed forms give K_P = -3/4 and K_Q = 1/4 with
        // no divergence; build the planes by hand since blowup_planes gates
        // on strictness.
        let amb = heis(1);
        let spec = spec_const();
        let w = GroupPoint::unit_block(&amb, 1, 0).unwrap();
        let z = [1.0];
        let jw = w.j_apply(&z).unwrap();
        let p = Plane::new(&spec, &w, &jw).unwrap();
        assert!((arnold_curvature(&spec, &p).unwrap() + 0.75).abs() < 1e-12);
        let zp = GroupPoint::from_center(&amb, &z).unwrap();
        let jazw = w.j_apply(&spec.w_matrix().apply(&z)).unwrap();
        let q = Plane::new(&spec, &zp, &jazw).unwrap();
        assert!((arnold_curvature(&spec, &q).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn blowup_closed_forms_inverse_power() {
        let amb = heis(8);
        let spec = spec_ip(1.0);
        for n in 1..=8usize {
            let r = blowup_planes(&spec, n, &[1.0], &amb).unwrap();
            let a_n = spec.a(n);
            let kp_expect = -0.75 / (a_n * a_n);
            let kq_expect = 0.25 / (a_n * a_n);
            assert!(
                (r.k_p - kp_expect).abs() <= 1e-9 * kp_expect.abs(),
                "n={n}: K_P = {}, expect {kp_expect}",
                r.k_p
            );
            assert!(
                (r.k_q - kq_expect).abs() <= 1e-9 * kq_expect.abs(),
                "n={n}: K_Q = {}, expect {kq_expect}",
                r.k_q
            );
        }
        // spot value from the closed form: n = 4 gives -12 and 4
        let r = blowup_planes(&spec, 4, &[1.0], &amb).unwrap();
        assert!((r.k_p + 12.0).abs() < 1e-9);
        assert!((r.k_q - 4.0).abs() < 1e-9);
    }

    #[test]
    fn blowup_rejects_strong_law() {
        let amb = heis(2);
        assert!(matches!(
            blowup_planes(&spec_const(), 1, &[1.0], &amb),
            Err(Error::StrongMetric(_))
        ));
    }

    #[test]
    fn q_plane_orthogonality() {
        // z and J_{Az}(Ax) are sigma-orthogonal
        let amb = heis(3);
        let spec = spec_ip(1.0);
        let z = [1.0];
        let zp = GroupPoint::from_center(&amb, &z).unwrap();
        let mut x = GroupPoint::zero(&amb);
        x.horizontal_mut()
            .copy_from_slice(&[0.4, 0.3, -0.9, 0.2, 0.7, -0.5]);
        let jazax = spec
            .apply_a(&x)
            .unwrap()
            .j_apply(&spec.w_matrix().apply(&z))
            .unwrap();
        let ip = spec.sigma_inner(&zp, &jazax).unwrap();
        assert!(ip.abs() < 1e-12);
    }

    #[test]
    fn dependent_plane_rejected() {
        let amb = heis(1);
        let spec = spec_const();
        let e1 = GroupPoint::unit_block(&amb, 1, 0).unwrap();
        assert!(Plane::new(&spec, &e1, &e1.scaled(2.0)).is_err());
    }

    #[test]
    fn obstruction_growth_laws() {
        let amb = heis(16);
        let ip = spec_ip(1.0);
        for n in 1..=16usize {
            let v = levi_civita_obstruction(&ip, &amb, &[1.0], n).unwrap();
            assert!((v - n as f64).abs() < 1e-10, "n={n}: {v}");
        }
        // doubling n doubles the value
        let v4 = levi_civita_obstruction(&ip, &amb, &[1.0], 4).unwrap();
        let v8 = levi_civita_obstruction(&ip, &amb, &[1.0], 8).unwrap();
        assert!((v8 - 2.0 * v4).abs() < 1e-10);
        // constant law: bounded, equal to |x2|² for unit A_W
        let cst = spec_const();
        for n in [1usize, 5, 16] {
            let v = levi_civita_obstruction(&cst, &amb, &[2.0], n).unwrap();
            assert!((v - 4.0).abs() < 1e-12);
        }
        assert!(levi_civita_obstruction(&ip, &amb, &[0.0], 1).is_err());
    }
}
