//! Sampled horizontal curves, lifts, length functionals, and the explicit
//! shrinking construction behind the vanishing sub-Finsler distance.
//!
//! A curve stores its node samples plus a per-interval 2-point Gauss
//! quadrature cache `(γ₁, γ̇₁, γ̇₂)`. The cache is filled exactly from a
//! closed-form path, or from the piecewise-linear interpolant of a sampled
//! polyline; every integral in this module is evaluated against it.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{Ambient, GroupPoint, TangentVector};
use crate::metrics::MetricSpec;

/// Grid used when no node count is given; composite 2-point Gauss per
/// interval is exact on the cubic integrands of the quadratic lift.
pub const DEFAULT_NODES: usize = 257;

/// Residual threshold below which a curve counts as horizontal.
pub const HORIZONTAL_TOL: f64 = 1e-10;

/// Gauss-Legendre abscissae on [0,1].
const GAUSS_OFFS: [f64; 2] = [
    0.5 - 0.288_675_134_594_812_87,
    0.5 + 0.288_675_134_594_812_87,
];

/// Which quadrature produced the center part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftRule {
    /// Exact per-segment integral of the piecewise-linear interpolant.
    PiecewiseLinear,
    /// 2-point Gauss per interval on a closed-form path.
    Gauss2,
}

/// Length functional selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthMode {
    Finsler,
    SubFinsler,
    Riemannian,
}

/// A sampled path with horizontal part, lifted center part, and quadrature
/// metadata.
#[derive(Debug, Clone)]
pub struct Curve {
    ambient: Arc<Ambient>,
    times: Vec<f64>,
    horiz: Vec<f64>,
    center: Vec<f64>,
    quad_horiz: Vec<f64>,
    quad_vel: Vec<f64>,
    quad_cvel: Vec<f64>,
    lift_rule: LiftRule,
    horizontality_residual: f64,
}

impl Curve {
    /// Lifts a closed-form horizontal path. `path(t)` returns `(γ₁(t), γ̇₁(t))`
    /// as flat horizontal buffers; the center part is the cumulative integral
    /// `½ ∫ β(γ₁, γ̇₁)` from `start_center`, 2-point Gauss per sub-interval.
    pub fn lift_path<F>(
        ambient: &Arc<Ambient>,
        times: &[f64],
        path: F,
        start_center: &[f64],
    ) -> Result<Self>
    where
        F: Fn(f64) -> (Vec<f64>, Vec<f64>),
    {
        check_grid(times)?;
        let hdim = ambient.horizontal_dim();
        let dw = ambient.dim_w();
        let alg = ambient.algebra();
        let dv = alg.dim_v();
        let nodes = times.len();
        let intervals = nodes - 1;

        let mut horiz = vec![0.0; nodes * hdim];
        let mut center = vec![0.0; nodes * dw];
        let mut quad_horiz = vec![0.0; 2 * intervals * hdim];
        let mut quad_vel = vec![0.0; 2 * intervals * hdim];
        let mut quad_cvel = vec![0.0; 2 * intervals * dw];

        for (i, &t) in times.iter().enumerate() {
            let (g, dg) = path(t);
            if g.len() != hdim || dg.len() != hdim {
                return Err(Error::DimensionMismatch {
                    expected: hdim,
                    got: g.len().max(dg.len()),
                    context: "path sample",
                });
            }
            horiz[i * hdim..(i + 1) * hdim].copy_from_slice(&g);
        }
        center[..dw].copy_from_slice(start_center);

        for i in 0..intervals {
            let (t0, t1) = (times[i], times[i + 1]);
            let h = t1 - t0;
            let mut inc = vec![0.0; dw];
            for (g_idx, off) in GAUSS_OFFS.iter().enumerate() {
                let t = t0 + off * h;
                let (g, dg) = path(t);
                let q = (2 * i + g_idx) * hdim;
                quad_horiz[q..q + hdim].copy_from_slice(&g);
                quad_vel[q..q + hdim].copy_from_slice(&dg);
                // γ̇₂ = ½ Σ_k β(γ₁_k, γ̇₁_k)
                let cq = (2 * i + g_idx) * dw;
                for k in 0..ambient.blocks() {
                    alg.beta_acc(
                        &g[k * dv..(k + 1) * dv],
                        &dg[k * dv..(k + 1) * dv],
                        0.5,
                        &mut quad_cvel[cq..cq + dw],
                    )?;
                }
                for a in 0..dw {
                    inc[a] += 0.5 * h * quad_cvel[cq + a];
                }
            }
            for a in 0..dw {
                center[(i + 1) * dw + a] = center[i * dw + a] + inc[a];
            }
        }

        Ok(Self {
            ambient: Arc::clone(ambient),
            times: times.to_vec(),
            horiz,
            center,
            quad_horiz,
            quad_vel,
            quad_cvel,
            lift_rule: LiftRule::Gauss2,
            horizontality_residual: 0.0,
        })
    }

    /// Lifts a sampled polyline. The piecewise-linear interpolant is
    /// horizontal with center increments `½ β(x_i, x_{i+1})`, exact for the
    /// linear-in-t integrand of each segment.
    pub fn lift_polyline(
        ambient: &Arc<Ambient>,
        times: &[f64],
        horiz: &[f64],
        start_center: &[f64],
    ) -> Result<Self> {
        check_grid(times)?;
        let hdim = ambient.horizontal_dim();
        let dw = ambient.dim_w();
        let nodes = times.len();
        if horiz.len() != nodes * hdim {
            return Err(Error::DimensionMismatch {
                expected: nodes * hdim,
                got: horiz.len(),
                context: "polyline samples",
            });
        }
        let alg = ambient.algebra();
        let dv = alg.dim_v();
        let mut center = vec![0.0; nodes * dw];
        center[..dw].copy_from_slice(start_center);
        for i in 0..nodes - 1 {
            let xi = &horiz[i * hdim..(i + 1) * hdim];
            let xj = &horiz[(i + 1) * hdim..(i + 2) * hdim];
            let mut inc = vec![0.0; dw];
            for k in 0..ambient.blocks() {
                alg.beta_acc(
                    &xi[k * dv..(k + 1) * dv],
                    &xj[k * dv..(k + 1) * dv],
                    0.5,
                    &mut inc,
                )?;
            }
            for a in 0..dw {
                center[(i + 1) * dw + a] = center[i * dw + a] + inc[a];
            }
        }
        Self::from_samples(ambient, times, horiz, &center)
    }

    /// Wraps arbitrary node samples as a piecewise-linear curve and records
    /// its horizontality residual.
    pub fn from_samples(
        ambient: &Arc<Ambient>,
        times: &[f64],
        horiz: &[f64],
        center: &[f64],
    ) -> Result<Self> {
        check_grid(times)?;
        let hdim = ambient.horizontal_dim();
        let dw = ambient.dim_w();
        let nodes = times.len();
        if horiz.len() != nodes * hdim || center.len() != nodes * dw {
            return Err(Error::DimensionMismatch {
                expected: nodes * hdim,
                got: horiz.len(),
                context: "curve samples",
            });
        }
        let alg = ambient.algebra();
        let dv = alg.dim_v();
        let intervals = nodes - 1;
        let mut quad_horiz = vec![0.0; 2 * intervals * hdim];
        let mut quad_vel = vec![0.0; 2 * intervals * hdim];
        let mut quad_cvel = vec![0.0; 2 * intervals * dw];
        let mut residual: f64 = 0.0;
        for i in 0..intervals {
            let h = times[i + 1] - times[i];
            let xi = &horiz[i * hdim..(i + 1) * hdim];
            let xj = &horiz[(i + 1) * hdim..(i + 2) * hdim];
            let ci = &center[i * dw..(i + 1) * dw];
            let cj = &center[(i + 1) * dw..(i + 2) * dw];
            for (g_idx, off) in GAUSS_OFFS.iter().enumerate() {
                let q = (2 * i + g_idx) * hdim;
                for d in 0..hdim {
                    quad_horiz[q + d] = xi[d] + off * (xj[d] - xi[d]);
                    quad_vel[q + d] = (xj[d] - xi[d]) / h;
                }
                let cq = (2 * i + g_idx) * dw;
                for a in 0..dw {
                    quad_cvel[cq + a] = (cj[a] - ci[a]) / h;
                }
                // residual |γ̇₂ - ½β(γ₁, γ̇₁)| at this quadrature node
                let mut lift = vec![0.0; dw];
                for k in 0..ambient.blocks() {
                    alg.beta_acc(
                        &quad_horiz[q + k * dv..q + (k + 1) * dv],
                        &quad_vel[q + k * dv..q + (k + 1) * dv],
                        0.5,
                        &mut lift,
                    )?;
                }
                let r: f64 = lift
                    .iter()
                    .zip(&quad_cvel[cq..cq + dw])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                residual = residual.max(r);
            }
        }
        Ok(Self {
            ambient: Arc::clone(ambient),
            times: times.to_vec(),
            horiz: horiz.to_vec(),
            center: center.to_vec(),
            quad_horiz,
            quad_vel,
            quad_cvel,
            lift_rule: LiftRule::PiecewiseLinear,
            horizontality_residual: residual,
        })
    }

    pub fn ambient(&self) -> &Arc<Ambient> {
        &self.ambient
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn nodes(&self) -> usize {
        self.times.len()
    }

    pub fn lift_rule(&self) -> LiftRule {
        self.lift_rule
    }

    pub fn node_horizontal(&self, i: usize) -> &[f64] {
        let hdim = self.ambient.horizontal_dim();
        &self.horiz[i * hdim..(i + 1) * hdim]
    }

    pub fn node_center(&self, i: usize) -> &[f64] {
        let dw = self.ambient.dim_w();
        &self.center[i * dw..(i + 1) * dw]
    }

    pub fn horizontality_residual(&self) -> f64 {
        self.horizontality_residual
    }

    pub fn is_horizontal(&self) -> bool {
        self.horizontality_residual <= HORIZONTAL_TOL
    }

    pub fn start_point(&self) -> GroupPoint {
        self.point_at_node(0)
    }

    pub fn endpoint(&self) -> GroupPoint {
        self.point_at_node(self.nodes() - 1)
    }

    fn point_at_node(&self, i: usize) -> GroupPoint {
        let mut p = GroupPoint::zero(&self.ambient);
        p.horizontal_mut().copy_from_slice(self.node_horizontal(i));
        p.center_mut().copy_from_slice(self.node_center(i));
        p
    }

    /// Curve length under the given metric.
    ///
    /// `SubFinsler` integrates `S₀(γ̇₁)` and demands a horizontal curve;
    /// `Finsler` and `Riemannian` integrate the weak norm of the
    /// left-translated velocity `γ̇ - ½[γ, γ̇]`.
    pub fn length(&self, metric: &MetricSpec, mode: LengthMode) -> Result<f64> {
        if mode == LengthMode::SubFinsler && !self.is_horizontal() {
            return Err(Error::NotHorizontal(self.horizontality_residual));
        }
        let hdim = self.ambient.horizontal_dim();
        let dv = self.ambient.dim_v();
        let dw = self.ambient.dim_w();
        let alg = self.ambient.algebra();
        let intervals = self.nodes() - 1;
        let mut total = 0.0;
        let mut translated = GroupPoint::zero(&self.ambient);
        for i in 0..intervals {
            let h = self.times[i + 1] - self.times[i];
            let mut acc = 0.0;
            for g_idx in 0..2 {
                let q = (2 * i + g_idx) * hdim;
                let vel = &self.quad_vel[q..q + hdim];
                let speed = match mode {
                    LengthMode::SubFinsler => metric.s0_flat(dv, vel),
                    LengthMode::Finsler | LengthMode::Riemannian => {
                        let g1 = &self.quad_horiz[q..q + hdim];
                        let cq = (2 * i + g_idx) * dw;
                        translated.horizontal_mut().copy_from_slice(vel);
                        // center of dL_{-γ} γ̇: γ̇₂ - ½β(γ₁, γ̇₁)
                        let cm = translated.center_mut();
                        cm.copy_from_slice(&self.quad_cvel[cq..cq + dw]);
                        for k in 0..self.ambient.blocks() {
                            alg.beta_acc(
                                &g1[k * dv..(k + 1) * dv],
                                &vel[k * dv..(k + 1) * dv],
                                -0.5,
                                cm,
                            )?;
                        }
                        metric.weak_norm(&translated)?
                    }
                };
                acc += 0.5 * speed;
            }
            total += h * acc;
        }
        Ok(total)
    }

    /// Left-translates the whole curve by a fixed group element.
    pub fn translate(&self, g: &GroupPoint) -> Result<Self> {
        let hdim = self.ambient.horizontal_dim();
        let dw = self.ambient.dim_w();
        let dv = self.ambient.dim_v();
        let alg = self.ambient.algebra();
        let mut out = self.clone();
        // nodes: g · γ(t)
        for i in 0..self.nodes() {
            let p = self.point_at_node(i);
            let moved = g.multiply(&p)?;
            out.horiz[i * hdim..(i + 1) * hdim].copy_from_slice(moved.horizontal());
            out.center[i * dw..(i + 1) * dw].copy_from_slice(moved.center());
        }
        // quadrature: γ₁ shifts by g₁, γ̇₁ unchanged, γ̇₂ += ½β(g₁, γ̇₁)
        let g1 = g.horizontal();
        let q_count = out.quad_horiz.len() / hdim;
        for q_idx in 0..q_count {
            let q = q_idx * hdim;
            for (d, gv) in g1.iter().enumerate() {
                out.quad_horiz[q + d] += gv;
            }
            let cq = q_idx * dw;
            for k in 0..self.ambient.blocks() {
                alg.beta_acc(
                    &g1[k * dv..(k + 1) * dv],
                    &self.quad_vel[q + k * dv..q + (k + 1) * dv],
                    0.5,
                    &mut out.quad_cvel[cq..cq + dw],
                )?;
            }
        }
        Ok(out)
    }

    /// Time reversal `s ↦ γ(1 - s)` (grid assumed on [0, 1]).
    pub fn reversed(&self) -> Self {
        let hdim = self.ambient.horizontal_dim();
        let dw = self.ambient.dim_w();
        let nodes = self.nodes();
        let intervals = nodes - 1;
        let mut out = self.clone();
        for i in 0..nodes {
            let j = nodes - 1 - i;
            out.times[i] = 1.0 - self.times[j];
            out.horiz[i * hdim..(i + 1) * hdim]
                .copy_from_slice(&self.horiz[j * hdim..(j + 1) * hdim]);
            out.center[i * dw..(i + 1) * dw].copy_from_slice(&self.center[j * dw..(j + 1) * dw]);
        }
        for i in 0..intervals {
            for g_idx in 0..2 {
                // interval i, gauss point g maps to interval (last - i), other gauss point
                let src = (2 * (intervals - 1 - i) + (1 - g_idx)) * hdim;
                let dst = (2 * i + g_idx) * hdim;
                out.quad_horiz[dst..dst + hdim].copy_from_slice(&self.quad_horiz[src..src + hdim]);
                for d in 0..hdim {
                    out.quad_vel[dst + d] = -self.quad_vel[src + d];
                }
                let csrc = (2 * (intervals - 1 - i) + (1 - g_idx)) * dw;
                let cdst = (2 * i + g_idx) * dw;
                for a in 0..dw {
                    out.quad_cvel[cdst + a] = -self.quad_cvel[csrc + a];
                }
            }
        }
        out
    }
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::InvalidInput(
            "a curve needs at least 2 samples".into(),
        ));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "time grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Uniform grid on [0, 1].
pub fn uniform_grid(nodes: usize) -> Vec<f64> {
    let m = (nodes - 1) as f64;
    (0..nodes).map(|i| i as f64 / m).collect()
}

/// The shrinking concatenation `αⁿ ⋆ γⁿ` joining the origin to `(c²/6) z`,
/// with its closed-form coefficients retained for exact endpoint checks.
#[derive(Debug, Clone)]
pub struct ShrinkingPair {
    pub curve: Curve,
    pub n: usize,
    pub c: f64,
    z: Vec<f64>,
    w: TangentVector,
    j_z_w: TangentVector,
}

impl ShrinkingPair {
    /// Exact endpoint of the first half: `c√n w + (c/(2√n)) J_z w + (c²/12) z`.
    pub fn gamma_endpoint(&self) -> Result<GroupPoint> {
        let sn = (self.n as f64).sqrt();
        let mut p = self.w.scaled(self.c * sn);
        p = p.axpy(self.c / (2.0 * sn), &self.j_z_w)?;
        for (a, za) in p.center_mut().iter_mut().zip(&self.z) {
            *a += self.c * self.c / 12.0 * za;
        }
        Ok(p)
    }

    /// Exact endpoint of the concatenation: `(c²/6) z`.
    pub fn exact_endpoint(&self) -> Result<GroupPoint> {
        let scaled: Vec<f64> = self.z.iter().map(|za| self.c * self.c / 6.0 * za).collect();
        GroupPoint::from_center(self.w.ambient(), &scaled)
    }
}

/// Builds the concatenated shrinking curve for index `n`, amplitude `c`,
/// unit center direction `z`, and unit degenerate vector `w`.
///
/// Both halves are re-parameterized to [0, ½] and [½, 1] at equal node
/// counts; `nodes` must be odd so the junction is a grid node.
pub fn shrinking_pair(
    n: usize,
    c: f64,
    z: &[f64],
    w: &TangentVector,
    nodes: usize,
) -> Result<ShrinkingPair> {
    if n == 0 {
        return Err(Error::InvalidInput("shrinking index starts at 1".into()));
    }
    if nodes < 3 || nodes.is_multiple_of(2) {
        return Err(Error::InvalidInput(
            "shrinking grid needs an odd node count >= 3".into(),
        ));
    }
    let znorm: f64 = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (znorm - 1.0).abs() > 1e-12 {
        return Err(Error::ContractViolation(format!(
            "z must be a unit center vector, |z| = {znorm}"
        )));
    }
    if (w.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::ContractViolation(format!(
            "w must be a unit vector, |w| = {}",
            w.norm()
        )));
    }
    if !w.is_center_zero() {
        return Err(Error::ContractViolation("w must be horizontal".into()));
    }
    let ambient = Arc::clone(w.ambient());
    let j_z_w = w.j_apply(z)?;
    let sn = (n as f64).sqrt();
    let hdim = ambient.horizontal_dim();
    let wh = w.horizontal().to_vec();
    let jh = j_z_w.horizontal().to_vec();

    // γ₁(t) = t c√n w + (t² c / (2√n)) J_z w on [0, 1], traversed on s ∈ [0, ½];
    // α₁(t) = c√n (1-t) w + (c (1-t²) / (2√n)) J_z w on [0, 1], on s ∈ [½, 1].
    let eval = move |s: f64| -> (Vec<f64>, Vec<f64>) {
        let mut g = vec![0.0; hdim];
        let mut dg = vec![0.0; hdim];
        if s <= 0.5 {
            let t = 2.0 * s;
            let (cw, cj) = (t * c * sn, t * t * c / (2.0 * sn));
            let (dw_, dj) = (2.0 * c * sn, 2.0 * t * c / sn);
            for d in 0..hdim {
                g[d] = cw * wh[d] + cj * jh[d];
                dg[d] = dw_ * wh[d] + dj * jh[d];
            }
        } else {
            let t = 2.0 * s - 1.0;
            let (cw, cj) = (c * sn * (1.0 - t), c * (1.0 - t * t) / (2.0 * sn));
            let (dw_, dj) = (-2.0 * c * sn, -2.0 * t * c / sn);
            for d in 0..hdim {
                g[d] = cw * wh[d] + cj * jh[d];
                dg[d] = dw_ * wh[d] + dj * jh[d];
            }
        }
        (g, dg)
    };

    let times = uniform_grid(nodes);
    let curve = Curve::lift_path(&ambient, &times, eval, &vec![0.0; ambient.dim_w()])?;
    Ok(ShrinkingPair {
        curve,
        n,
        c,
        z: z.to_vec(),
        w: w.clone(),
        j_z_w,
    })
}

/// Certified lower bound on the Finsler distance:
/// `d_F(p, q) >= F₀(π₁p - π₁q) / C` with `C = 1` for the additive split.
pub fn finsler_lower_bound(metric: &MetricSpec, p: &GroupPoint, q: &GroupPoint) -> Result<f64> {
    let diff = p.project_horizontal().axpy(-1.0, &q.project_horizontal())?;
    match metric {
        MetricSpec::Riemannian(r) => r.sigma_norm(&diff),
        MetricSpec::Finsler(f) => Ok(f.f0(&diff)),
    }
}
