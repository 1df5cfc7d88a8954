//! The truncated product group `M_N = v^N ⊕ w`.
//!
//! Points are block sequences of `N` horizontal vectors from the base
//! algebra plus one center vector. The group law is the two-step BCH
//! formula `p·q = p + q + ½[p,q]`; the bracket is center valued and sums
//! the base bracket blockwise.

use std::sync::Arc;

use crate::algebra::HTypeAlgebra;
use crate::error::{Error, Result};

/// The ambient truncated group: base algebra plus a fixed block count.
///
/// Mixing points from different truncations is always a bug, so every
/// point carries its ambient and operations check compatibility.
#[derive(Debug)]
pub struct Ambient {
    algebra: HTypeAlgebra,
    blocks: usize,
}

impl Ambient {
    pub fn new(algebra: HTypeAlgebra, blocks: usize) -> Arc<Self> {
        assert!(blocks > 0, "truncation must have at least one block");
        Arc::new(Self { algebra, blocks })
    }

    pub fn algebra(&self) -> &HTypeAlgebra {
        &self.algebra
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn dim_v(&self) -> usize {
        self.algebra.dim_v()
    }

    pub fn dim_w(&self) -> usize {
        self.algebra.dim_w()
    }

    /// Total horizontal dimension `N * dim_v`.
    pub fn horizontal_dim(&self) -> usize {
        self.blocks * self.algebra.dim_v()
    }

    fn compatible(&self, other: &Ambient) -> Result<()> {
        if self.blocks != other.blocks {
            return Err(Error::TruncationMismatch(self.blocks, other.blocks));
        }
        if self.algebra.dim_v() != other.algebra.dim_v()
            || self.algebra.dim_w() != other.algebra.dim_w()
        {
            return Err(Error::ContractViolation(
                "points belong to different base algebras".into(),
            ));
        }
        Ok(())
    }
}

/// An element of the truncated group, stored as a flat `N * dim_v`
/// horizontal buffer plus a center vector.
///
/// Tangent vectors share this layout: the linear structure identifies
/// `T_q M` with `M`.
#[derive(Debug, Clone)]
pub struct GroupPoint {
    ambient: Arc<Ambient>,
    blocks: Vec<f64>,
    center: Vec<f64>,
}

/// Same layout as a point; the group is identified with its Lie algebra.
pub type TangentVector = GroupPoint;

impl GroupPoint {
    pub fn new(ambient: Arc<Ambient>, blocks: Vec<f64>, center: Vec<f64>) -> Result<Self> {
        if blocks.len() != ambient.horizontal_dim() {
            return Err(Error::DimensionMismatch {
                expected: ambient.horizontal_dim(),
                got: blocks.len(),
                context: "horizontal buffer",
            });
        }
        if center.len() != ambient.dim_w() {
            return Err(Error::DimensionMismatch {
                expected: ambient.dim_w(),
                got: center.len(),
                context: "center vector",
            });
        }
        Ok(Self {
            ambient,
            blocks,
            center,
        })
    }

    pub fn zero(ambient: &Arc<Ambient>) -> Self {
        Self {
            ambient: Arc::clone(ambient),
            blocks: vec![0.0; ambient.horizontal_dim()],
            center: vec![0.0; ambient.dim_w()],
        }
    }

    /// Unit vector along coordinate `dir` of block `block` (1-based).
    pub fn unit_block(ambient: &Arc<Ambient>, block: usize, dir: usize) -> Result<Self> {
        if block == 0 || block > ambient.blocks() {
            return Err(Error::Capacity {
                required: block,
                available: ambient.blocks(),
            });
        }
        if dir >= ambient.dim_v() {
            return Err(Error::DimensionMismatch {
                expected: ambient.dim_v(),
                got: dir,
                context: "block coordinate",
            });
        }
        let mut p = Self::zero(ambient);
        p.blocks[(block - 1) * ambient.dim_v() + dir] = 1.0;
        Ok(p)
    }

    /// A pure center element.
    pub fn from_center(ambient: &Arc<Ambient>, z: &[f64]) -> Result<Self> {
        let mut p = Self::zero(ambient);
        if z.len() != ambient.dim_w() {
            return Err(Error::DimensionMismatch {
                expected: ambient.dim_w(),
                got: z.len(),
                context: "center vector",
            });
        }
        p.center.copy_from_slice(z);
        Ok(p)
    }

    pub fn ambient(&self) -> &Arc<Ambient> {
        &self.ambient
    }

    pub fn horizontal(&self) -> &[f64] {
        &self.blocks
    }

    pub fn horizontal_mut(&mut self) -> &mut [f64] {
        &mut self.blocks
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn center_mut(&mut self) -> &mut [f64] {
        &mut self.center
    }

    /// Slice view of block `k` (1-based).
    pub fn block(&self, k: usize) -> &[f64] {
        let d = self.ambient.dim_v();
        &self.blocks[(k - 1) * d..k * d]
    }

    /// Hilbert inner product `Σ <x_k, x'_k> + <z, z'>`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.ambient.compatible(&other.ambient)?;
        let h: f64 = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a * b)
            .sum();
        let c: f64 = self
            .center
            .iter()
            .zip(&other.center)
            .map(|(a, b)| a * b)
            .sum();
        Ok(h + c)
    }

    pub fn norm_sq(&self) -> f64 {
        self.blocks.iter().map(|v| v * v).sum::<f64>()
            + self.center.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Linear combination `self + t * other`.
    pub fn axpy(&self, t: f64, other: &Self) -> Result<Self> {
        self.ambient.compatible(&other.ambient)?;
        let mut out = self.clone();
        for (a, b) in out.blocks.iter_mut().zip(&other.blocks) {
            *a += t * b;
        }
        for (a, b) in out.center.iter_mut().zip(&other.center) {
            *a += t * b;
        }
        Ok(out)
    }

    pub fn scaled(&self, t: f64) -> Self {
        let mut out = self.clone();
        out.blocks.iter_mut().for_each(|v| *v *= t);
        out.center.iter_mut().for_each(|v| *v *= t);
        out
    }

    /// Lie bracket `[u, v] = (0; Σ_k beta(u_k, v_k))`, center valued.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.ambient.compatible(&other.ambient)?;
        let alg = self.ambient.algebra();
        let d = alg.dim_v();
        let mut center = vec![0.0; alg.dim_w()];
        for k in 0..self.ambient.blocks() {
            alg.beta_acc(
                &self.blocks[k * d..(k + 1) * d],
                &other.blocks[k * d..(k + 1) * d],
                1.0,
                &mut center,
            )?;
        }
        let mut out = Self::zero(&self.ambient);
        out.center = center;
        Ok(out)
    }

    /// BCH group law `p · q = p + q + ½[p, q]`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        let mut out = self.axpy(1.0, other)?;
        let br = self.bracket(other)?;
        for (a, b) in out.center.iter_mut().zip(&br.center) {
            *a += 0.5 * b;
        }
        Ok(out)
    }

    /// Group inverse; in a two-step group this is `-p`.
    pub fn inverse(&self) -> Self {
        self.scaled(-1.0)
    }

    /// Blockwise `J_z` on a point with zero center.
    pub fn j_apply(&self, z: &[f64]) -> Result<Self> {
        if self.center.iter().any(|v| *v != 0.0) {
            return Err(Error::ContractViolation(
                "J_z acts on horizontal points only (nonzero center)".into(),
            ));
        }
        let alg = self.ambient.algebra();
        let d = alg.dim_v();
        let mut out = Self::zero(&self.ambient);
        for k in 0..self.ambient.blocks() {
            alg.j_apply_acc(
                z,
                &self.blocks[k * d..(k + 1) * d],
                &mut out.blocks[k * d..(k + 1) * d],
            )?;
        }
        Ok(out)
    }

    /// Differential of left translation: `(dL_p)(v) = v + ½[p, v]`.
    pub fn left_translation_differential(&self, v: &Self) -> Result<Self> {
        let br = self.bracket(v)?;
        v.axpy(0.5, &br)
    }

    /// Inverse differential `(dL_{-p})(v) = v - ½[p, v]`.
    pub fn left_translation_differential_inv(&self, v: &Self) -> Result<Self> {
        let br = self.bracket(v)?;
        v.axpy(-0.5, &br)
    }

    /// `π₁`: zero the center.
    pub fn project_horizontal(&self) -> Self {
        let mut out = self.clone();
        out.center.iter_mut().for_each(|v| *v = 0.0);
        out
    }

    /// `π₂`: zero the blocks.
    pub fn project_center(&self) -> Self {
        let mut out = self.clone();
        out.blocks.iter_mut().for_each(|v| *v = 0.0);
        out
    }

    pub fn is_horizontal_part_zero(&self) -> bool {
        self.blocks.iter().all(|v| *v == 0.0)
    }

    pub fn is_center_zero(&self) -> bool {
        self.center.iter().all(|v| *v == 0.0)
    }
}
