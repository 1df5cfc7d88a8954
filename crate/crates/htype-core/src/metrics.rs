//! Weak metric families on the truncated group.
//!
//! Two families are supported: graded Riemannian metrics given by a
//! blockwise-scalar weight law on the horizontal part plus an SPD matrix on
//! the center, and block p-norm Finsler metrics with their sub-Finsler
//! restriction to the horizontal subspace.
//!
//! Strictness is a property of the symbolic weight law, not of the
//! truncated (always invertible) matrix: at any finite truncation all norms
//! are equivalent, so the law carries the asymptotic semantics and the
//! truncation only caps experiments.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Ambient, GroupPoint, TangentVector};

/// Blockwise-scalar weight law `a_k`, evaluated at block index `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightLaw {
    /// `a_k = c` for all k.
    Constant(f64),
    /// `a_k = k^(-q)` with `q > 0`.
    InversePower(f64),
    /// `a_k = r^k` with `0 < r < 1`.
    Exponential(f64),
}

impl WeightLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightLaw::Constant(c) if c > 0.0 => Ok(()),
            WeightLaw::Constant(c) => Err(Error::InvalidInput(format!(
                "constant weight must be positive, got {c}"
            ))),
            WeightLaw::InversePower(q) if q > 0.0 => Ok(()),
            WeightLaw::InversePower(q) => Err(Error::InvalidInput(format!(
                "inverse_power exponent must be positive, got {q}"
            ))),
            WeightLaw::Exponential(r) if r > 0.0 && r < 1.0 => Ok(()),
            WeightLaw::Exponential(r) => Err(Error::InvalidInput(format!(
                "exponential ratio must satisfy 0 < r < 1, got {r}"
            ))),
        }
    }

    /// Weight at block `k` (1-based).
    pub fn eval(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        match *self {
            WeightLaw::Constant(c) => c,
            WeightLaw::InversePower(q) => (k as f64).powf(-q),
            WeightLaw::Exponential(r) => r.powi(k as i32),
        }
    }

    /// `sup_k a_k`; finite for every admitted law.
    pub fn sup(&self) -> f64 {
        match *self {
            WeightLaw::Constant(c) => c,
            WeightLaw::InversePower(_) => 1.0,
            WeightLaw::Exponential(r) => r,
        }
    }

    /// Whether `inf_k a_k = 0` in the symbolic (untruncated) model.
    pub fn vanishes_at_infinity(&self) -> bool {
        !matches!(self, WeightLaw::Constant(_))
    }
}

/// Classification of a weak metric against the ambient Hilbert topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strictness {
    Strong,
    StrictlyWeak,
}

/// Symmetric positive definite matrix acting on the center (`A_W`).
#[derive(Debug, Clone, PartialEq)]
pub struct CenterMatrix {
    dim: usize,
    data: Vec<f64>,
    lambda_max: f64,
}

impl CenterMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self {
            dim,
            data,
            lambda_max: 1.0,
        }
    }

    /// Validates symmetry and positive definiteness (Cholesky).
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidInput("empty center matrix".into()));
        }
        let mut data = vec![0.0; dim * dim];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                    context: "center matrix row",
                });
            }
            data[i * dim..(i + 1) * dim].copy_from_slice(row);
        }
        for i in 0..dim {
            for j in 0..i {
                if (data[i * dim + j] - data[j * dim + i]).abs() > 1e-12 {
                    return Err(Error::InvalidInput(
                        "center matrix must be symmetric".into(),
                    ));
                }
            }
        }
        // Cholesky for positive definiteness.
        let mut l = data.clone();
        for i in 0..dim {
            for j in 0..=i {
                let mut s = l[i * dim + j];
                for k in 0..j {
                    s -= l[i * dim + k] * l[j * dim + k];
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(Error::InvalidInput(
                            "center matrix must be positive definite".into(),
                        ));
                    }
                    l[i * dim + i] = s.sqrt();
                } else {
                    l[i * dim + j] = s / l[j * dim + j];
                }
            }
        }
        let lambda_max = spd_lambda_max(&data, dim);
        Ok(Self {
            dim,
            data,
            lambda_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(z).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `u^T A_W v`.
    pub fn quad(&self, u: &[f64], v: &[f64]) -> f64 {
        let av = self.apply(v);
        u.iter().zip(&av).map(|(a, b)| a * b).sum()
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| {
                let expect = if i == j { 1.0 } else { 0.0 };
                self.data[i * self.dim + j] == expect
            })
        })
    }
}

fn spd_lambda_max(data: &[f64], dim: usize) -> f64 {
    let mut v = vec![1.0 / (dim as f64).sqrt(); dim];
    let mut lambda = 0.0;
    for _ in 0..200 {
        let mut w = vec![0.0; dim];
        for i in 0..dim {
            let row = &data[i * dim..(i + 1) * dim];
            w[i] = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        v = w.iter().map(|x| x / norm).collect();
        if (next - lambda).abs() <= 1e-14 * next.abs() {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Graded Riemannian metric `sigma_0(v, w) = <v, A w>` with blockwise-scalar
/// `A_V` (weight law) and SPD `A_W` on the center.
#[derive(Debug, Clone)]
pub struct RiemannianSpec {
    law: WeightLaw,
    w_matrix: CenterMatrix,
}

impl RiemannianSpec {
    pub fn new(law: WeightLaw, w_matrix: CenterMatrix) -> Result<Self> {
        law.validate()?;
        Ok(Self { law, w_matrix })
    }

    /// Weight law with `A_W = Id` on a center of dimension `dim_w`.
    pub fn with_identity_center(law: WeightLaw, dim_w: usize) -> Result<Self> {
        Self::new(law, CenterMatrix::identity(dim_w))
    }

    pub fn law(&self) -> WeightLaw {
        self.law
    }

    pub fn w_matrix(&self) -> &CenterMatrix {
        &self.w_matrix
    }

    /// Horizontal weight at block `k` (1-based).
    pub fn a(&self, k: usize) -> f64 {
        self.law.eval(k)
    }

    /// Continuity constant: `||v||_sigma <= c0 |v|`.
    pub fn c0(&self) -> f64 {
        self.law.sup().max(self.w_matrix.lambda_max()).sqrt()
    }

    /// `sigma_0(v, w) = Σ_k a_k <v_k, w_k> + v_2^T A_W w_2`.
    pub fn sigma_inner(&self, v: &TangentVector, w: &TangentVector) -> Result<f64> {
        self.check(v)?;
        let d = v.ambient().dim_v();
        let mut acc = 0.0;
        for k in 1..=v.ambient().blocks() {
            let a = self.a(k);
            let (vb, wb) = (v.block(k), w.block(k));
            let mut s = 0.0;
            for i in 0..d {
                s += vb[i] * wb[i];
            }
            acc += a * s;
        }
        acc += self.w_matrix.quad(v.center(), w.center());
        Ok(acc)
    }

    pub fn sigma_norm(&self, v: &TangentVector) -> Result<f64> {
        Ok(self.sigma_inner(v, v)?.max(0.0).sqrt())
    }

    /// Sub-Riemannian norm of a flat horizontal buffer.
    pub fn s0_flat(&self, dim_v: usize, horiz: &[f64]) -> f64 {
        let blocks = horiz.len() / dim_v;
        let mut acc = 0.0;
        for k in 0..blocks {
            let b = &horiz[k * dim_v..(k + 1) * dim_v];
            let n2: f64 = b.iter().map(|x| x * x).sum();
            acc += self.law.eval(k + 1) * n2;
        }
        acc.sqrt()
    }

    /// Left-invariant metric at `p`: `sigma_0((dL_-p) v, (dL_-p) w)`.
    pub fn metric_at(&self, p: &GroupPoint, v: &TangentVector, w: &TangentVector) -> Result<f64> {
        let dv = p.left_translation_differential_inv(v)?;
        let dw = p.left_translation_differential_inv(w)?;
        self.sigma_inner(&dv, &dw)
    }

    /// Applies `A` (blockwise `a_k` plus `A_W` on the center).
    pub fn apply_a(&self, v: &TangentVector) -> Result<TangentVector> {
        self.check(v)?;
        let d = v.ambient().dim_v();
        let mut out = v.clone();
        for k in 0..v.ambient().blocks() {
            let a = self.a(k + 1);
            for x in &mut out.horizontal_mut()[k * d..(k + 1) * d] {
                *x *= a;
            }
        }
        let az = self.w_matrix.apply(v.center());
        out.center_mut().copy_from_slice(&az);
        Ok(out)
    }

    /// Applies `A_V^{-1}` blockwise to a horizontal vector; the center must
    /// be zero. Returns the result and the amplification factor
    /// `max 1/a_k` over occupied blocks.
    pub fn apply_a_inv_horizontal(&self, v: &TangentVector) -> Result<(TangentVector, f64)> {
        self.check(v)?;
        if !v.is_center_zero() {
            return Err(Error::ContractViolation(
                "A_V^{-1} applies to horizontal vectors only".into(),
            ));
        }
        let d = v.ambient().dim_v();
        let mut out = v.clone();
        let mut conditioning: f64 = 0.0;
        for k in 0..v.ambient().blocks() {
            let block = &mut out.horizontal_mut()[k * d..(k + 1) * d];
            if block.iter().all(|x| *x == 0.0) {
                continue;
            }
            let inv = 1.0 / self.a(k + 1);
            conditioning = conditioning.max(inv);
            for x in block {
                *x *= inv;
            }
        }
        Ok((out, conditioning))
    }

    fn check(&self, v: &TangentVector) -> Result<()> {
        if v.ambient().dim_w() != self.w_matrix.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.w_matrix.dim(),
                got: v.ambient().dim_w(),
                context: "center matrix vs ambient",
            });
        }
        Ok(())
    }
}

/// Block p-norm Finsler family:
/// `F_0(x + z) = (Σ_k |x_k|^p)^{1/p} + |z|_{A_W}` with `p >= 2`.
#[derive(Debug, Clone)]
pub struct FinslerSpec {
    p: f64,
    w_matrix: CenterMatrix,
}

impl FinslerSpec {
    pub fn new(p: f64, w_matrix: CenterMatrix) -> Result<Self> {
        if p < 2.0 {
            return Err(Error::InvalidInput(format!(
                "Finsler exponent must satisfy p >= 2, got {p}"
            )));
        }
        Ok(Self { p, w_matrix })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn w_matrix(&self) -> &CenterMatrix {
        &self.w_matrix
    }

    /// Continuity constant: `F_0(v) <= c1 |v|`.
    ///
    /// The block p-norm is bounded by the block 2-norm for `p >= 2`, so
    /// `c1 = max(1, sqrt(lambda_max(A_W)))` works (splitting `v` costs no
    /// extra factor since the parts are orthogonal).
    pub fn c1(&self) -> f64 {
        1.0f64.max(self.w_matrix.lambda_max().sqrt()) * std::f64::consts::SQRT_2
    }

    /// Sub-Finsler norm of a flat horizontal buffer.
    pub fn s0_flat(&self, dim_v: usize, horiz: &[f64]) -> f64 {
        let blocks = horiz.len() / dim_v;
        let mut acc = 0.0;
        for k in 0..blocks {
            let b = &horiz[k * dim_v..(k + 1) * dim_v];
            let n: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            acc += n.powf(self.p);
        }
        acc.powf(1.0 / self.p)
    }

    /// `F_0(v) = S_0(v_1) + |v_2|_{A_W}`.
    pub fn f0(&self, v: &TangentVector) -> f64 {
        let s = self.s0_flat(v.ambient().dim_v(), v.horizontal());
        let zq = self.w_matrix.quad(v.center(), v.center()).max(0.0).sqrt();
        s + zq
    }
}

/// A weak metric description: Riemannian weight law or p-norm Finsler.
#[derive(Debug, Clone)]
pub enum MetricSpec {
    Riemannian(RiemannianSpec),
    Finsler(FinslerSpec),
}

impl MetricSpec {
    /// Strong vs strictly weak, decided on the symbolic law.
    pub fn classify_strictness(&self) -> Strictness {
        match self {
            MetricSpec::Riemannian(r) => {
                if r.law().vanishes_at_infinity() {
                    Strictness::StrictlyWeak
                } else {
                    Strictness::Strong
                }
            }
            MetricSpec::Finsler(f) => {
                if f.p() > 2.0 {
                    Strictness::StrictlyWeak
                } else {
                    Strictness::Strong
                }
            }
        }
    }

    /// Weak norm of a full tangent vector (`sigma_0`-norm or `F_0`).
    pub fn weak_norm(&self, v: &TangentVector) -> Result<f64> {
        match self {
            MetricSpec::Riemannian(r) => r.sigma_norm(v),
            MetricSpec::Finsler(f) => Ok(f.f0(v)),
        }
    }

    /// Sub-Finsler norm `S_0` of a flat horizontal buffer.
    pub fn s0_flat(&self, dim_v: usize, horiz: &[f64]) -> f64 {
        match self {
            MetricSpec::Riemannian(r) => r.s0_flat(dim_v, horiz),
            MetricSpec::Finsler(f) => f.s0_flat(dim_v, horiz),
        }
    }

    /// Continuity constant against the Hilbert norm.
    pub fn continuity_constant(&self) -> f64 {
        match self {
            MetricSpec::Riemannian(r) => r.c0(),
            MetricSpec::Finsler(f) => f.c1(),
        }
    }

    /// The degenerate unit sequence at index `n`: `|w_n| = 1` with the weak
    /// norm given in closed form.
    ///
    /// Riemannian: unit vector supported in block `n`, weak norm `sqrt(a_n)`.
    /// p-norm: uniform spread over `m(n) = ceil(n^{2p/(p-2)})` blocks, with
    /// `S_0(w_n) = m^{1/p - 1/2} <= 1/n`.
    pub fn degenerate_sequence(&self, n: usize, ambient: &Arc<Ambient>) -> Result<TangentVector> {
        if self.classify_strictness() != Strictness::StrictlyWeak {
            return Err(Error::StrongMetric(
                "no degenerate sequence exists for a strong metric".into(),
            ));
        }
        if n == 0 {
            return Err(Error::InvalidInput("sequence index starts at 1".into()));
        }
        match self {
            MetricSpec::Riemannian(_) => GroupPoint::unit_block(ambient, n, 0),
            MetricSpec::Finsler(f) => {
                let m = spread_blocks(n, f.p());
                if m > ambient.blocks() {
                    return Err(Error::Capacity {
                        required: m,
                        available: ambient.blocks(),
                    });
                }
                let mut v = GroupPoint::zero(ambient);
                let d = ambient.dim_v();
                let amp = 1.0 / (m as f64).sqrt();
                for k in 0..m {
                    v.horizontal_mut()[k * d] = amp;
                }
                Ok(v)
            }
        }
    }

    /// Blocks needed by `degenerate_sequence(n)`.
    pub fn degenerate_sequence_blocks(&self, n: usize) -> Result<usize> {
        if self.classify_strictness() != Strictness::StrictlyWeak {
            return Err(Error::StrongMetric(
                "no degenerate sequence exists for a strong metric".into(),
            ));
        }
        Ok(match self {
            MetricSpec::Riemannian(_) => n,
            MetricSpec::Finsler(f) => spread_blocks(n, f.p()),
        })
    }

    /// A unit horizontal vector with `S_0(w) <= 1/n`, the rate demanded by
    /// the vanishing-distance construction.
    ///
    /// For the Riemannian law this picks the first block index whose weight
    /// satisfies `sqrt(a_k) <= 1/n`; for the p-norm family the spread vector
    /// of `degenerate_sequence` already has the rate.
    pub fn shrinking_witness(&self, n: usize, ambient: &Arc<Ambient>) -> Result<TangentVector> {
        match self {
            MetricSpec::Riemannian(_) => {
                let k = self.shrinking_witness_blocks(n)?;
                GroupPoint::unit_block(ambient, k, 0)
            }
            MetricSpec::Finsler(_) => self.degenerate_sequence(n, ambient),
        }
    }

    /// Blocks needed by `shrinking_witness(n)`.
    pub fn shrinking_witness_blocks(&self, n: usize) -> Result<usize> {
        if self.classify_strictness() != Strictness::StrictlyWeak {
            return Err(Error::StrongMetric(
                "no shrinking witness exists for a strong metric".into(),
            ));
        }
        if n == 0 {
            return Err(Error::InvalidInput("sequence index starts at 1".into()));
        }
        match self {
            MetricSpec::Riemannian(r) => {
                let target = 1.0 / (n as f64 * n as f64);
                // Weights are nonincreasing for the strictly weak laws, so a
                // doubling search followed by bisection finds the first index.
                let mut hi = 1usize;
                while r.a(hi) > target {
                    hi = hi
                        .checked_mul(2)
                        .ok_or_else(|| Error::InvalidInput("witness index overflow".into()))?;
                    if hi > 1 << 40 {
                        return Err(Error::InvalidInput(
                            "weight law decays too slowly for a practical witness".into(),
                        ));
                    }
                }
                let mut lo = hi / 2 + 1;
                if hi == 1 {
                    return Ok(1);
                }
                while lo < hi {
                    let mid = lo + (hi - lo) / 2;
                    if r.a(mid) <= target {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                Ok(hi)
            }
            MetricSpec::Finsler(_) => self.degenerate_sequence_blocks(n),
        }
    }
}

/// `m(n) = ceil(n^{2p/(p-2)})` blocks for the spread degenerate vector.
fn spread_blocks(n: usize, p: f64) -> usize {
    let expo = 2.0 * p / (p - 2.0);
    // round-trip noise guard before ceil
    ((n as f64).powf(expo) - 1e-9).ceil().max(1.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::HTypeAlgebra;

    fn heis(n: usize) -> Arc<Ambient> {
        Ambient::new(HTypeAlgebra::heisenberg(), n)
    }

    #[test]
    fn sigma_norm_identity_law_matches_hilbert() {
        let amb = heis(4);
        let spec = RiemannianSpec::with_identity_center(WeightLaw::Constant(1.0), 1).unwrap();
        let mut v = GroupPoint::zero(&amb);
        for (i, x) in v.horizontal_mut().iter_mut().enumerate() {
            *x = (i as f64 + 1.0) * 0.3;
        }
        v.center_mut()[0] = -2.0;
        assert!((spec.sigma_norm(&v).unwrap() - v.norm()).abs() < 1e-14);
    }

    #[test]
    fn sigma_norm_inverse_power_block() {
        let amb = heis(5);
        let spec = RiemannianSpec::with_identity_center(WeightLaw::InversePower(2.0), 1).unwrap();
        let v = GroupPoint::unit_block(&amb, 3, 0).unwrap();
        assert!((spec.sigma_norm(&v).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let zero = GroupPoint::zero(&amb);
        assert_eq!(spec.sigma_norm(&zero).unwrap(), 0.0);
    }

    #[test]
    fn strictness_classification() {
        let strong = MetricSpec::Riemannian(
            RiemannianSpec::with_identity_center(WeightLaw::Constant(1.0), 1).unwrap(),
        );
        assert_eq!(strong.classify_strictness(), Strictness::Strong);
        let weak = MetricSpec::Riemannian(
            RiemannianSpec::with_identity_center(WeightLaw::InversePower(1.0), 1).unwrap(),
        );
        assert_eq!(weak.classify_strictness(), Strictness::StrictlyWeak);
        let l2 = MetricSpec::Finsler(FinslerSpec::new(2.0, CenterMatrix::identity(1)).unwrap());
        assert_eq!(l2.classify_strictness(), Strictness::Strong);
        let lp = MetricSpec::Finsler(FinslerSpec::new(4.0, CenterMatrix::identity(1)).unwrap());
        assert_eq!(lp.classify_strictness(), Strictness::StrictlyWeak);
    }

    #[test]
    fn degenerate_sequence_riemannian() {
        let amb = heis(8);
        let spec = MetricSpec::Riemannian(
            RiemannianSpec::with_identity_center(WeightLaw::InversePower(2.0), 1).unwrap(),
        );
        let w = spec.degenerate_sequence(3, &amb).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-14);
        if let MetricSpec::Riemannian(r) = &spec {
            assert!((r.sigma_norm(&w).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_sequence_pnorm_spread() {
        let amb = heis(16);
        let spec = MetricSpec::Finsler(FinslerSpec::new(4.0, CenterMatrix::identity(1)).unwrap());
        assert_eq!(spec.degenerate_sequence_blocks(2).unwrap(), 16);
        let w = spec.degenerate_sequence(2, &amb).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-14);
        let s0 = spec.s0_flat(2, w.horizontal());
        assert!((s0 - 0.5).abs() < 1e-14); // 16^(-1/4)
    }

    #[test]
    fn degenerate_sequence_capacity_and_strong_errors() {
        let amb = heis(4);
        let spec = MetricSpec::Finsler(FinslerSpec::new(4.0, CenterMatrix::identity(1)).unwrap());
        assert!(matches!(
            spec.degenerate_sequence(2, &amb),
            Err(Error::Capacity { required: 16, .. })
        ));
        let strong = MetricSpec::Riemannian(
            RiemannianSpec::with_identity_center(WeightLaw::Constant(1.0), 1).unwrap(),
        );
        assert!(matches!(
            strong.degenerate_sequence(2, &amb),
            Err(Error::StrongMetric(_))
        ));
    }

    #[test]
    fn shrinking_witness_rate() {
        let spec = MetricSpec::Riemannian(
            RiemannianSpec::with_identity_center(WeightLaw::InversePower(1.0), 1).unwrap(),
        );
        for n in 1..=12usize {
            let k = spec.shrinking_witness_blocks(n).unwrap();
            let amb = heis(k);
            let w = spec.shrinking_witness(n, &amb).unwrap();
            assert!((w.norm() - 1.0).abs() < 1e-14);
            let s0 = spec.s0_flat(2, w.horizontal());
            assert!(s0 <= 1.0 / n as f64 + 1e-15, "n={n} k={k} s0={s0}");
            // first such index: predecessor violates the rate
            if k > 1 {
                assert!((1.0 / ((k - 1) as f64)).sqrt() > 1.0 / n as f64);
            }
        }
    }

    #[test]
    fn left_invariance_of_metric_at() {
        let amb = heis(3);
        let spec = RiemannianSpec::with_identity_center(WeightLaw::InversePower(1.0), 1).unwrap();
        let mut p = GroupPoint::zero(&amb);
        p.horizontal_mut()
            .copy_from_slice(&[0.4, -0.2, 1.0, 0.3, -0.8, 0.6]);
        p.center_mut()[0] = 0.9;
        let mut q = GroupPoint::zero(&amb);
        q.horizontal_mut()
            .copy_from_slice(&[-0.5, 0.2, 0.7, -0.1, 0.2, 0.4]);
        q.center_mut()[0] = -0.3;
        let mut v = GroupPoint::zero(&amb);
        v.horizontal_mut()
            .copy_from_slice(&[1.0, 0.5, -0.4, 0.2, 0.1, -0.6]);
        v.center_mut()[0] = 0.25;

        // sigma_{p·q}((dL_p) v, (dL_p) v) = sigma_q(v, v)
        let pq = p.multiply(&q).unwrap();
        // translate the tangent vector: v at q maps to (dL_p)_q v at p·q
        let v_at_q = q.left_translation_differential(&v).unwrap();
        let v_moved = p.left_translation_differential(&v_at_q).unwrap();
        let lhs = spec.metric_at(&pq, &v_moved, &v_moved).unwrap();
        let rhs = spec.metric_at(&q, &v_at_q, &v_at_q).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn center_matrix_validation() {
        assert!(CenterMatrix::new(&[vec![1.0, 0.2], vec![0.2, 1.0]]).is_ok());
        assert!(CenterMatrix::new(&[vec![1.0, 0.2], vec![0.3, 1.0]]).is_err());
        assert!(CenterMatrix::new(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_err()); // indefinite
    }

    #[test]
    fn weight_law_serde_shape() {
        let law: WeightLaw = serde_json::from_str(r#"{"inverse_power": 1.0}"#).unwrap();
        assert_eq!(law, WeightLaw::InversePower(1.0));
    }
}
