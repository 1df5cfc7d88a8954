//! Finite dimensional H-type base algebras.
//!
//! An H-type algebra splits as `v ⊕ w` with a skew bilinear bracket
//! `beta: v × v → w` whose associated maps `J_z` act as complex structures
//! scaled by `|z|`. The structure tensor `beta` is the stored primitive;
//! `J` is derived from it, so their compatibility is a checkable identity
//! rather than an assumption.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Skew symmetry is demanded at the tensor level to nearly machine precision.
pub const SKEW_TOL: f64 = 1e-14;

/// A finite dimensional H-type algebra given by its structure tensor.
///
/// `beta[a]` is a `dim_v × dim_v` skew matrix `B_a` (row-major) so that the
/// `a`-th center coordinate of the bracket is `beta(x, y)_a = xᵀ B_a y`.
#[derive(Debug, Clone, PartialEq)]
pub struct HTypeAlgebra {
    dim_v: usize,
    dim_w: usize,
    beta: Vec<Vec<f64>>,
}

impl HTypeAlgebra {
    /// Builds an algebra from its structure tensor, checking skew symmetry.
    pub fn from_beta(dim_v: usize, dim_w: usize, beta: Vec<Vec<f64>>) -> Result<Self> {
        if dim_v == 0 || dim_w == 0 {
            return Err(Error::InvalidInput(
                "dim_v and dim_w must be positive".into(),
            ));
        }
        if beta.len() != dim_w {
            return Err(Error::DimensionMismatch {
                expected: dim_w,
                got: beta.len(),
                context: "structure tensor center slots",
            });
        }
        for (a, mat) in beta.iter().enumerate() {
            if mat.len() != dim_v * dim_v {
                return Err(Error::DimensionMismatch {
                    expected: dim_v * dim_v,
                    got: mat.len(),
                    context: "structure tensor matrix entries",
                });
            }
            for i in 0..dim_v {
                for j in 0..dim_v {
                    let s = mat[i * dim_v + j] + mat[j * dim_v + i];
                    if s.abs() > SKEW_TOL {
                        return Err(Error::ContractViolation(format!(
                            "B_{a} is not skew-symmetric at ({i},{j}): residual {s:.3e}"
                        )));
                    }
                }
            }
        }
        Ok(Self { dim_v, dim_w, beta })
    }

    pub fn dim_v(&self) -> usize {
        self.dim_v
    }

    pub fn dim_w(&self) -> usize {
        self.dim_w
    }

    /// The raw structure matrix `B_a`, row-major.
    pub fn beta_matrix(&self, a: usize) -> &[f64] {
        &self.beta[a]
    }

    /// The 3-dimensional Heisenberg algebra: `beta((x1,x2),(y1,y2)) = x1 y2 - x2 y1`.
    pub fn heisenberg() -> Self {
        let b = vec![0.0, 1.0, -1.0, 0.0];
        Self::from_beta(2, 1, vec![b]).expect("hand-built Heisenberg tensor is valid")
    }

    /// The quaternionic H-type algebra: `dim_v = 4`, `dim_w = 3`,
    /// with `J_z x` given by left quaternion multiplication of `x` by the
    /// imaginary quaternion `z`.
    ///
    /// The tensor is recovered numerically from the defining identity
    /// `<J_z x, y> = <z, beta(x,y)>` on basis pairs, which pins the sign
    /// convention to the one used everywhere else in this crate.
    pub fn quaternionic() -> Self {
        let dim_v = 4;
        let dim_w = 3;
        // (B_a)_{ij} = <J_{e_a} e_i, e_j>
        let mut beta = vec![vec![0.0; dim_v * dim_v]; dim_w];
        for a in 0..dim_w {
            let mut z = [0.0; 3];
            z[a] = 1.0;
            for i in 0..dim_v {
                let mut x = [0.0; 4];
                x[i] = 1.0;
                let jx = quat_left_mul_imag(&z, &x);
                for j in 0..dim_v {
                    beta[a][i * dim_v + j] = jx[j];
                }
            }
        }
        Self::from_beta(dim_v, dim_w, beta).expect("quaternionic tensor is skew")
    }

    /// Looks up a built-in algebra by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "heisenberg" => Ok(Self::heisenberg()),
            "quaternionic" => Ok(Self::quaternionic()),
            other => Err(Error::InvalidInput(format!(
                "unknown algebra '{other}' (expected 'heisenberg' or 'quaternionic')"
            ))),
        }
    }

    /// Evaluates `beta(x, y)` into a fresh center vector.
    pub fn beta(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim_w];
        self.beta_acc(x, y, 1.0, &mut out)?;
        Ok(out)
    }

    /// Accumulates `scale * beta(x, y)` into `out`.
    pub fn beta_acc(&self, x: &[f64], y: &[f64], scale: f64, out: &mut [f64]) -> Result<()> {
        self.check_v(x)?;
        self.check_v(y)?;
        if out.len() != self.dim_w {
            return Err(Error::DimensionMismatch {
                expected: self.dim_w,
                got: out.len(),
                context: "beta output",
            });
        }
        let n = self.dim_v;
        for (a, mat) in self.beta.iter().enumerate() {
            let mut acc = 0.0;
            for i in 0..n {
                let xi = x[i];
                if xi == 0.0 {
                    continue;
                }
                let row = &mat[i * n..(i + 1) * n];
                let mut s = 0.0;
                for j in 0..n {
                    s += row[j] * y[j];
                }
                acc += xi * s;
            }
            out[a] += scale * acc;
        }
        Ok(())
    }

    /// Applies `J_z` to `x`, i.e. the unique vector with
    /// `<J_z x, y> = <z, beta(x, y)>` for all `y`.
    ///
    /// With the stored convention `beta(x,y)_a = xᵀ B_a y` this is
    /// `J_z x = Σ_a z_a B_aᵀ x`.
    pub fn j_apply(&self, z: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim_v];
        self.j_apply_acc(z, x, &mut out)?;
        Ok(out)
    }

    /// Accumulates `J_z x` into `out`.
    pub fn j_apply_acc(&self, z: &[f64], x: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_v(x)?;
        self.check_w(z)?;
        if out.len() != self.dim_v {
            return Err(Error::DimensionMismatch {
                expected: self.dim_v,
                got: out.len(),
                context: "J_z output",
            });
        }
        let n = self.dim_v;
        for (a, mat) in self.beta.iter().enumerate() {
            let za = z[a];
            if za == 0.0 {
                continue;
            }
            // (B_aᵀ x)_j = Σ_i x_i (B_a)_{ij}
            for i in 0..n {
                let xi = x[i];
                if xi == 0.0 {
                    continue;
                }
                let row = &mat[i * n..(i + 1) * n];
                for j in 0..n {
                    out[j] += za * xi * row[j];
                }
            }
        }
        Ok(())
    }

    /// Randomized verification of the H-type identities.
    ///
    /// Samples `trials` random `(x, y, z)` and checks, each within `tol`:
    /// `J_z² x = -|z|² x`, skew-adjointness of `J_z`, `|J_z x| = |z||x|`,
    /// `<z, beta(x, J_z x)> = |z|²|x|²`, `|beta(x,y)| ≤ |x||y|`, and
    /// `beta(x, J_z x) = |x|² z`. Returns the max residual per identity.
    pub fn verify_axioms(&self, trials: usize, tol: f64, seed: u64) -> Result<AxiomReport> {
        if tol <= 0.0 {
            return Err(Error::InvalidInput("tol must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut report = AxiomReport::new(seed, trials, tol);
        for _ in 0..trials {
            let x: Vec<f64> = (0..self.dim_v).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..self.dim_v).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let z: Vec<f64> = (0..self.dim_w).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let nx2 = dot(&x, &x);
            let nz2 = dot(&z, &z);

            let jx = self.j_apply(&z, &x)?;
            let jjx = self.j_apply(&z, &jx)?;

            // J_z² = -|z|² Id
            let r_jsq = jjx
                .iter()
                .zip(&x)
                .map(|(a, b)| (a + nz2 * b).abs())
                .fold(0.0, f64::max);
            report.record("J_z^2 = -|z|^2 Id", r_jsq);

            // <J_z x, y> = -<x, J_z y>
            let jy = self.j_apply(&z, &y)?;
            let r_skew = (dot(&jx, &y) + dot(&x, &jy)).abs();
            report.record("J_z^* = -J_z", r_skew);

            // |J_z x| = |z||x|
            let r_norm = (dot(&jx, &jx).sqrt() - (nz2 * nx2).sqrt()).abs();
            report.record("|J_z x| = |z||x|", r_norm);

            // <z, beta(x, J_z x)> = |z|²|x|²
            let bxjx = self.beta(&x, &jx)?;
            let r_pair = (dot(&z, &bxjx) - nz2 * nx2).abs();
            report.record("<z, beta(x, J_z x)> = |z|^2 |x|^2", r_pair);

            // |beta(x, y)| ≤ |x||y|
            let bxy = self.beta(&x, &y)?;
            let excess = dot(&bxy, &bxy).sqrt() - (nx2 * dot(&y, &y)).sqrt();
            report.record("|beta(x,y)| <= |x||y|", excess.max(0.0));

            // beta(x, J_z x) = |x|² z
            let r_xjz = bxjx
                .iter()
                .zip(&z)
                .map(|(a, b)| (a - nx2 * b).abs())
                .fold(0.0, f64::max);
            report.record("beta(x, J_z x) = |x|^2 z", r_xjz);
        }
        Ok(report)
    }

    fn check_v(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim_v {
            return Err(Error::DimensionMismatch {
                expected: self.dim_v,
                got: x.len(),
                context: "horizontal vector",
            });
        }
        Ok(())
    }

    fn check_w(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim_w {
            return Err(Error::DimensionMismatch {
                expected: self.dim_w,
                got: z.len(),
                context: "center vector",
            });
        }
        Ok(())
    }
}

/// Left quaternion multiplication `z * x` with `z` imaginary.
///
/// `z = z0 i + z1 j + z2 k`, `x = x0 + x1 i + x2 j + x3 k`.
fn quat_left_mul_imag(z: &[f64; 3], x: &[f64; 4]) -> [f64; 4] {
    let (zi, zj, zk) = (z[0], z[1], z[2]);
    let (x0, x1, x2, x3) = (x[0], x[1], x[2], x[3]);
    [
        -zi * x1 - zj * x2 - zk * x3,
        zi * x0 + zj * x3 - zk * x2,
        -zi * x3 + zj * x0 + zk * x1,
        zi * x2 - zj * x1 + zk * x0,
    ]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-identity maximum residuals of a randomized axiom check.
#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
    pub residuals: Vec<(&'static str, f64)>,
}

impl AxiomReport {
    fn new(seed: u64, trials: usize, tol: f64) -> Self {
        Self {
            seed,
            trials,
            tol,
            residuals: Vec::new(),
        }
    }

    fn record(&mut self, identity: &'static str, residual: f64) {
        match self
            .residuals
            .iter_mut()
            .find(|(name, _)| *name == identity)
        {
            Some((_, max)) => *max = max.max(residual),
            None => self.residuals.push((identity, residual)),
        }
    }

    /// Largest residual over all identities.
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_residual() <= self.tol
    }

    /// Err naming the worst offending identity when any residual exceeds tol.
    pub fn into_result(self) -> Result<Self> {
        if let Some((identity, residual)) = self
            .residuals
            .iter()
            .filter(|(_, r)| *r > self.tol)
            .max_by(|a, b| a.1.total_cmp(&b.1))
        {
            return Err(Error::AxiomFailure {
                identity,
                residual: *residual,
                tol: self.tol,
            });
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_beta_basis() {
        let alg = HTypeAlgebra::heisenberg();
        let b = alg.beta(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(b, vec![1.0]);
        let b = alg.beta(&[1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(b, vec![0.0]);
    }

    #[test]
    fn heisenberg_j_basis() {
        // Oracle: brute-force solve <J_z x, y> = z (x1 y2 - x2 y1) over the
        // 2x2 basis. For z = 1, x = e1: <J x, e1> = 0, <J x, e2> = 1, so
        // J_1(1, 0) = (0, 1).
        let alg = HTypeAlgebra::heisenberg();
        let j = alg.j_apply(&[1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(j, vec![0.0, 1.0]);
        // Scaling: J_2(0, 1) = 2 * J_1(0, 1) = (-2, 0).
        let j = alg.j_apply(&[2.0], &[0.0, 1.0]).unwrap();
        assert_eq!(j, vec![-2.0, 0.0]);
    }

    #[test]
    fn j_zero_center_is_zero() {
        let alg = HTypeAlgebra::quaternionic();
        let j = alg.j_apply(&[0.0; 3], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(j.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn quaternionic_unit_identities() {
        let alg = HTypeAlgebra::quaternionic();
        // i² = -1 forces J_i²(1,0,0,0) = -(1,0,0,0)
        let e0 = [1.0, 0.0, 0.0, 0.0];
        let ji = alg.j_apply(&[1.0, 0.0, 0.0], &e0).unwrap();
        let jji = alg.j_apply(&[1.0, 0.0, 0.0], &ji).unwrap();
        assert_eq!(jji, vec![-1.0, 0.0, 0.0, 0.0]);
        // |J_z x| = 1 for unit z, x
        let norm: f64 = ji.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-15);
        // beta(x, J_z x) = z for unit x
        let b = alg.beta(&e0, &ji).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-15);
        assert!(b[1].abs() < 1e-15 && b[2].abs() < 1e-15);
    }

    #[test]
    fn verify_axioms_both_algebras() {
        for alg in [HTypeAlgebra::heisenberg(), HTypeAlgebra::quaternionic()] {
            let report = alg.verify_axioms(100, 1e-12, 42).unwrap();
            assert!(report.passed(), "residuals: {:?}", report.residuals);
        }
    }

    #[test]
    fn corrupted_tensor_fails_j_squared() {
        let alg = HTypeAlgebra::heisenberg();
        let mut beta = vec![alg.beta_matrix(0).to_vec()];
        beta[0][1] += 0.1;
        beta[0][2] -= 0.1; // keep skew so construction succeeds
        let bad = HTypeAlgebra::from_beta(2, 1, beta).unwrap();
        let err = bad.verify_axioms(100, 1e-12, 42).unwrap().into_result();
        match err {
            Err(Error::AxiomFailure { residual, tol, .. }) => {
                assert!(residual > tol);
            }
            other => panic!("expected axiom failure, got {other:?}"),
        }
    }

    #[test]
    fn non_skew_tensor_rejected() {
        let beta = vec![vec![0.0, 1.0, -0.9, 0.0]];
        assert!(HTypeAlgebra::from_beta(2, 1, beta).is_err());
    }

    #[test]
    fn dimension_mismatch_errors() {
        let alg = HTypeAlgebra::heisenberg();
        assert!(alg.j_apply(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(alg.beta(&[1.0], &[1.0, 0.0]).is_err());
    }
}
