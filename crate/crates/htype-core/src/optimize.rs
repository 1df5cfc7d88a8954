//! Constrained length minimization over horizontal polylines.
//!
//! The decision variables are the interior horizontal nodes of a uniform
//! grid; the center coordinates are eliminated through the lift, leaving the
//! endpoint center gain `½ Σ β(x_i, x_{i+1}) = Δz` as the only nonlinear
//! constraint. That constraint is handled by an augmented Lagrangian whose
//! inner problems are solved with limited-memory BFGS and a backtracking
//! (Armijo) line search. The objective is the smoothed energy; the reported
//! length is the exact, non-smoothed one of the returned lifted polyline.
//!
//! Everything in the solve path is deterministic: no randomness, no
//! time-dependent state, so repeated runs are bit-identical.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curves::{finsler_lower_bound, shrinking_pair, uniform_grid, Curve, LengthMode};
use crate::error::{Error, Result};
use crate::group::{Ambient, GroupPoint};
use crate::metrics::{MetricSpec, Strictness};

/// Smoothing floor for the p-norm integrand `(|·|² + ε²)^{p/2}`.
const SMOOTH_EPS: f64 = 1e-9;

/// Line-search sufficient-decrease constant.
const ARMIJO_C1: f64 = 1e-4;

/// L-BFGS memory.
const LBFGS_MEM: usize = 8;

/// A fixed-endpoint length-minimization problem on the truncated group.
#[derive(Debug, Clone)]
pub struct OptProblem {
    pub metric: MetricSpec,
    pub start: GroupPoint,
    pub end: GroupPoint,
    /// Grid node count (>= 9).
    pub nodes: usize,
    /// Initial augmented-Lagrangian penalty weight.
    pub penalty_weight: f64,
    /// Multiplier-update rounds.
    pub max_outer: usize,
    /// Quasi-Newton iterations per round.
    pub max_inner: usize,
    /// Inner stop: sup-norm of the merit gradient.
    pub grad_tol: f64,
    /// Outer stop: Euclidean norm of the center-endpoint residual.
    pub constraint_tol: f64,
}

impl OptProblem {
    pub fn new(metric: MetricSpec, start: GroupPoint, end: GroupPoint) -> Result<Self> {
        if start.ambient().blocks() != end.ambient().blocks() {
            return Err(Error::TruncationMismatch(
                start.ambient().blocks(),
                end.ambient().blocks(),
            ));
        }
        Ok(Self {
            metric,
            start,
            end,
            nodes: 33,
            penalty_weight: 10.0,
            max_outer: 30,
            max_inner: 200,
            grad_tol: 1e-8,
            constraint_tol: 1e-8,
        })
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.nodes < 9 {
            return Err(Error::InvalidInput(format!(
                "optimization grid needs >= 9 nodes, got {}",
                self.nodes
            )));
        }
        if self.penalty_weight <= 0.0 {
            return Err(Error::InvalidInput(
                "penalty weight must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a length minimization.
#[derive(Debug, Clone)]
pub struct OptResult {
    pub curve: Curve,
    /// Exact (non-smoothed) sub-Finsler length of `curve`.
    pub length: f64,
    /// Smoothed energy of the final iterate.
    pub energy: f64,
    /// Euclidean norm of the center-endpoint defect.
    pub constraint_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `F₀(π₁p − π₁q)` — the length can never fall below this.
    pub certified_lower_bound: f64,
}

/// Grid-local view of one problem: endpoints translated so the curve starts
/// at the origin.
///
/// `block_map` lists the ambient blocks the solver actually works on.
/// Gradients vanish identically on blocks where neither the initial guess
/// nor the endpoint has support, so iterates never leave that set and
/// dropping the rest is an exact reduction, not an approximation.
struct Solver<'a> {
    ambient: Arc<Ambient>,
    metric: &'a MetricSpec,
    nodes: usize,
    hdim: usize,
    dv: usize,
    dw: usize,
    nblocks: usize,
    h: f64,
    block_map: Vec<usize>,
    x_end: Vec<f64>,
    dz: Vec<f64>,
}

impl<'a> Solver<'a> {
    fn new(problem: &'a OptProblem) -> Result<Self> {
        problem.validate()?;
        let target = problem.start.inverse().multiply(&problem.end)?;
        let ambient = Arc::clone(problem.start.ambient());
        let hdim = ambient.horizontal_dim();
        Ok(Self {
            metric: &problem.metric,
            nodes: problem.nodes,
            hdim,
            dv: ambient.dim_v(),
            dw: ambient.dim_w(),
            nblocks: ambient.blocks(),
            h: 1.0 / (problem.nodes - 1) as f64,
            block_map: (0..ambient.blocks()).collect(),
            x_end: target.horizontal().to_vec(),
            dz: target.center().to_vec(),
            ambient,
        })
    }

    /// Horizontal weight of solver block `k` (0-based) in the ambient law.
    fn weight(&self, k: usize) -> f64 {
        match self.metric {
            MetricSpec::Riemannian(r) => r.a(self.block_map[k] + 1),
            MetricSpec::Finsler(_) => 1.0,
        }
    }

    /// Restriction to the blocks where `init` (full-dimension interior
    /// variables) or the endpoint has support.
    fn compressed(&self, init_full: &[f64]) -> Self {
        let full_blocks = self.ambient.blocks();
        let mut occupied = vec![false; full_blocks];
        let mark = |occupied: &mut Vec<bool>, buf: &[f64]| {
            for (j, v) in buf.iter().enumerate() {
                if *v != 0.0 {
                    occupied[(j % self.hdim) / self.dv] = true;
                }
            }
        };
        mark(&mut occupied, init_full);
        mark(&mut occupied, &self.x_end);
        if !occupied.iter().any(|b| *b) {
            // nothing occupied but Δz ≠ 0: give the constraint one block
            // (the cheapest) to work with
            occupied[full_blocks - 1] = true;
        }
        let block_map: Vec<usize> = (0..full_blocks).filter(|k| occupied[*k]).collect();
        let mut x_end = vec![0.0; block_map.len() * self.dv];
        for (kr, kf) in block_map.iter().enumerate() {
            x_end[kr * self.dv..(kr + 1) * self.dv]
                .copy_from_slice(&self.x_end[kf * self.dv..(kf + 1) * self.dv]);
        }
        Self {
            ambient: Arc::clone(&self.ambient),
            metric: self.metric,
            nodes: self.nodes,
            hdim: block_map.len() * self.dv,
            dv: self.dv,
            dw: self.dw,
            nblocks: block_map.len(),
            h: self.h,
            block_map,
            x_end,
            dz: self.dz.clone(),
        }
    }

    /// Interior variables restricted to the compressed blocks.
    fn compress_vars(&self, full: &[f64]) -> Vec<f64> {
        let full_hdim = self.ambient.horizontal_dim();
        let nodes = full.len() / full_hdim;
        let mut out = vec![0.0; nodes * self.hdim];
        for i in 0..nodes {
            for (kr, kf) in self.block_map.iter().enumerate() {
                out[i * self.hdim + kr * self.dv..i * self.hdim + (kr + 1) * self.dv]
                    .copy_from_slice(
                        &full[i * full_hdim + kf * self.dv..i * full_hdim + (kf + 1) * self.dv],
                    );
            }
        }
        out
    }

    /// Full-dimension node buffer from a compressed one.
    fn expand_nodes(&self, xs: &[f64]) -> Vec<f64> {
        let full_hdim = self.ambient.horizontal_dim();
        let mut out = vec![0.0; self.nodes * full_hdim];
        for i in 0..self.nodes {
            for (kr, kf) in self.block_map.iter().enumerate() {
                out[i * full_hdim + kf * self.dv..i * full_hdim + (kf + 1) * self.dv]
                    .copy_from_slice(
                        &xs[i * self.hdim + kr * self.dv..i * self.hdim + (kr + 1) * self.dv],
                    );
            }
        }
        out
    }

    fn nvars(&self) -> usize {
        (self.nodes - 2) * self.hdim
    }

    /// Full node buffer with fixed endpoints and the given interior.
    fn assemble(&self, vars: &[f64], xs: &mut [f64]) {
        xs[..self.hdim].iter_mut().for_each(|v| *v = 0.0);
        xs[self.hdim..self.hdim + vars.len()].copy_from_slice(vars);
        xs[(self.nodes - 1) * self.hdim..].copy_from_slice(&self.x_end);
    }

    /// Smoothed edge integrand `Φ(d)` and optionally its gradient.
    fn phi(&self, d: &[f64], grad: Option<&mut [f64]>) -> f64 {
        match self.metric {
            MetricSpec::Riemannian(_) => {
                let mut acc = 0.0;
                if let Some(g) = grad {
                    for k in 0..self.nblocks {
                        let a = self.weight(k);
                        for j in k * self.dv..(k + 1) * self.dv {
                            acc += a * d[j] * d[j];
                            g[j] = 2.0 * a * d[j];
                        }
                    }
                } else {
                    for k in 0..self.nblocks {
                        let a = self.weight(k);
                        for v in &d[k * self.dv..(k + 1) * self.dv] {
                            acc += a * v * v;
                        }
                    }
                }
                acc
            }
            MetricSpec::Finsler(f) => {
                let p = f.p();
                let mut s = 0.0;
                for k in 0..self.nblocks {
                    let n2: f64 = d[k * self.dv..(k + 1) * self.dv]
                        .iter()
                        .map(|x| x * x)
                        .sum();
                    s += (n2 + SMOOTH_EPS * SMOOTH_EPS).powf(0.5 * p);
                }
                let phi = s.powf(2.0 / p);
                if let Some(g) = grad {
                    // ∂Φ/∂d_k = 2 s^{2/p - 1} g_k^{p/2 - 1} d_k
                    let outer = 2.0 * s.powf(2.0 / p - 1.0);
                    for k in 0..self.nblocks {
                        let n2: f64 = d[k * self.dv..(k + 1) * self.dv]
                            .iter()
                            .map(|x| x * x)
                            .sum();
                        let f_k = (n2 + SMOOTH_EPS * SMOOTH_EPS).powf(0.5 * p - 1.0);
                        for j in k * self.dv..(k + 1) * self.dv {
                            g[j] = outer * f_k * d[j];
                        }
                    }
                }
                phi
            }
        }
    }

    /// Energy `Σ Φ(x_{i+1} - x_i)/h` and its gradient over the full node
    /// buffer (endpoint entries included but unused).
    fn energy_grad(&self, xs: &[f64], grad_xs: Option<&mut [f64]>) -> f64 {
        let mut total = 0.0;
        let mut d = vec![0.0; self.hdim];
        let mut gphi = vec![0.0; self.hdim];
        if let Some(grad) = grad_xs {
            grad.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..self.nodes - 1 {
                for j in 0..self.hdim {
                    d[j] = xs[(i + 1) * self.hdim + j] - xs[i * self.hdim + j];
                }
                total += self.phi(&d, Some(&mut gphi)) / self.h;
                for j in 0..self.hdim {
                    grad[i * self.hdim + j] -= gphi[j] / self.h;
                    grad[(i + 1) * self.hdim + j] += gphi[j] / self.h;
                }
            }
        } else {
            for i in 0..self.nodes - 1 {
                for j in 0..self.hdim {
                    d[j] = xs[(i + 1) * self.hdim + j] - xs[i * self.hdim + j];
                }
                total += self.phi(&d, None) / self.h;
            }
        }
        total
    }

    /// Center-endpoint defect `½ Σ β(x_i, x_{i+1}) - Δz`.
    fn constraint(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let alg = self.ambient.algebra();
        let mut c: Vec<f64> = self.dz.iter().map(|z| -z).collect();
        for i in 0..self.nodes - 1 {
            let xi = &xs[i * self.hdim..(i + 1) * self.hdim];
            let xj = &xs[(i + 1) * self.hdim..(i + 2) * self.hdim];
            for k in 0..self.nblocks {
                alg.beta_acc(
                    &xi[k * self.dv..(k + 1) * self.dv],
                    &xj[k * self.dv..(k + 1) * self.dv],
                    0.5,
                    &mut c,
                )?;
            }
        }
        Ok(c)
    }

    /// Augmented-Lagrangian merit and its gradient over the interior
    /// variables.
    fn merit_grad(
        &self,
        vars: &[f64],
        lambda: &[f64],
        mu: f64,
        xs: &mut [f64],
        grad_xs: &mut [f64],
        grad_vars: Option<&mut [f64]>,
    ) -> Result<f64> {
        self.assemble(vars, xs);
        let want_grad = grad_vars.is_some();
        let obj = self.energy_grad(xs, want_grad.then_some(&mut *grad_xs));
        let c = self.constraint(xs)?;
        let mut merit = obj;
        let mut y = vec![0.0; self.dw];
        for a in 0..self.dw {
            merit += lambda[a] * c[a] + 0.5 * mu * c[a] * c[a];
            y[a] = lambda[a] + mu * c[a];
        }
        if let Some(gv) = grad_vars {
            // ∂/∂x_i of y·c is ½ J_y (x_{i-1} - x_{i+1}) blockwise
            let alg = self.ambient.algebra();
            let mut half_diff = vec![0.0; self.dv];
            for i in 1..self.nodes - 1 {
                let prev = &xs[(i - 1) * self.hdim..i * self.hdim];
                let next = &xs[(i + 1) * self.hdim..(i + 2) * self.hdim];
                for k in 0..self.nblocks {
                    for (j, hd) in half_diff.iter_mut().enumerate() {
                        *hd = 0.5 * (prev[k * self.dv + j] - next[k * self.dv + j]);
                    }
                    alg.j_apply_acc(
                        &y,
                        &half_diff,
                        &mut grad_xs
                            [i * self.hdim + k * self.dv..i * self.hdim + (k + 1) * self.dv],
                    )?;
                }
            }
            gv.copy_from_slice(&grad_xs[self.hdim..(self.nodes - 1) * self.hdim]);
        }
        Ok(merit)
    }

    /// Exact sub-Finsler length of the polyline through `xs` (block weights
    /// resolved through `block_map`).
    fn exact_length(&self, xs: &[f64]) -> f64 {
        let mut total = 0.0;
        let mut d = vec![0.0; self.hdim];
        for i in 0..self.nodes - 1 {
            for j in 0..self.hdim {
                d[j] = xs[(i + 1) * self.hdim + j] - xs[i * self.hdim + j];
            }
            let speed = match self.metric {
                MetricSpec::Riemannian(_) => {
                    let mut acc = 0.0;
                    for k in 0..self.nblocks {
                        let n2: f64 = d[k * self.dv..(k + 1) * self.dv]
                            .iter()
                            .map(|x| x * x)
                            .sum();
                        acc += self.weight(k) * n2;
                    }
                    acc.sqrt()
                }
                MetricSpec::Finsler(f) => f.s0_flat(self.dv, &d),
            };
            total += speed;
        }
        total
    }

    /// Default initial interior nodes: linear interpolation of the endpoint
    /// plus, when `Δz ≠ 0`, an area-generating loop of matching signed area
    /// in the cheapest block.
    fn default_init(&self) -> Result<Vec<f64>> {
        let mut vars = vec![0.0; self.nvars()];
        let m = (self.nodes - 1) as f64;
        for i in 1..self.nodes - 1 {
            let t = i as f64 / m;
            for j in 0..self.hdim {
                vars[(i - 1) * self.hdim + j] = t * self.x_end[j];
            }
        }
        let zn: f64 = self.dz.iter().map(|z| z * z).sum::<f64>().sqrt();
        if zn > 1e-15 {
            // the straight polyline through the origin generates no area, so
            // the loop must close the whole Δz gap
            let zhat: Vec<f64> = self.dz.iter().map(|z| z / zn).collect();
            let block = self.nblocks; // weights are nonincreasing in k
            let mut w = vec![0.0; self.dv];
            w[0] = 1.0;
            let jw = self.ambient.algebra().j_apply(&zhat, &w)?;
            let r = (zn / std::f64::consts::PI).sqrt();
            for i in 1..self.nodes - 1 {
                let th = 2.0 * std::f64::consts::PI * i as f64 / m;
                let (ca, cb) = (r * th.sin(), r * (1.0 - th.cos()));
                for j in 0..self.dv {
                    vars[(i - 1) * self.hdim + (block - 1) * self.dv + j] += ca * w[j] + cb * jw[j];
                }
            }
        }
        Ok(vars)
    }

    /// Interior nodes sampled from a warm-start curve (translated to the
    /// origin frame, linearly interpolated onto the uniform grid).
    fn init_from_curve(&self, problem: &OptProblem, warm: &Curve) -> Result<Vec<f64>> {
        let local = warm.translate(&problem.start.inverse())?;
        let times = local.times();
        let m = (self.nodes - 1) as f64;
        let mut vars = vec![0.0; self.nvars()];
        for i in 1..self.nodes - 1 {
            let t = i as f64 / m;
            // locate t in the warm grid
            let seg = match times.binary_search_by(|x| x.total_cmp(&t)) {
                Ok(idx) => idx.min(times.len() - 2),
                Err(idx) => idx.saturating_sub(1).min(times.len() - 2),
            };
            let (t0, t1) = (times[seg], times[seg + 1]);
            let u = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
            let (a, b) = (local.node_horizontal(seg), local.node_horizontal(seg + 1));
            for j in 0..self.hdim {
                vars[(i - 1) * self.hdim + j] = a[j] + u * (b[j] - a[j]);
            }
        }
        Ok(vars)
    }
}

/// Minimizes horizontal length between the problem endpoints, optionally
/// starting from a warm-start curve.
pub fn minimize_length(problem: &OptProblem, warm_start: Option<&Curve>) -> Result<OptResult> {
    let solver = Solver::new(problem)?;
    let clb = finsler_lower_bound(&problem.metric, &problem.start, &problem.end)?;

    // coincident endpoints: the zero curve is the answer
    let gap = problem.start.inverse().multiply(&problem.end)?;
    if gap.norm() == 0.0 {
        let times = uniform_grid(problem.nodes);
        let horiz = vec![0.0; problem.nodes * solver.hdim];
        let curve = Curve::lift_polyline(&solver.ambient, &times, &horiz, &vec![0.0; solver.dw])?
            .translate(&problem.start)?;
        return Ok(OptResult {
            curve,
            length: 0.0,
            energy: 0.0,
            constraint_residual: 0.0,
            iterations: 0,
            converged: true,
            certified_lower_bound: clb,
        });
    }

    let vars_full = match warm_start {
        Some(c) => solver.init_from_curve(problem, c)?,
        None => solver.default_init()?,
    };
    let solver = solver.compressed(&vars_full);
    let mut vars = solver.compress_vars(&vars_full);

    let mut xs = vec![0.0; problem.nodes * solver.hdim];
    let mut grad_xs = vec![0.0; problem.nodes * solver.hdim];
    let mut lambda = vec![0.0; solver.dw];
    let mut mu = problem.penalty_weight;
    let mut total_iters = 0usize;
    let mut converged = false;
    let mut prev_cnorm = f64::INFINITY;

    for _outer in 0..problem.max_outer {
        let inner_ok = lbfgs_inner(
            &solver,
            &mut vars,
            &lambda,
            mu,
            problem.max_inner,
            problem.grad_tol,
            &mut xs,
            &mut grad_xs,
            &mut total_iters,
        )?;
        solver.assemble(&vars, &mut xs);
        let c = solver.constraint(&xs)?;
        let cnorm: f64 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if cnorm <= problem.constraint_tol && inner_ok {
            converged = true;
            break;
        }
        for (l, ca) in lambda.iter_mut().zip(&c) {
            *l += mu * ca;
        }
        if cnorm > 0.25 * prev_cnorm {
            mu = (mu * 10.0).min(1e12);
        }
        prev_cnorm = cnorm;
    }

    solver.assemble(&vars, &mut xs);
    let c = solver.constraint(&xs)?;
    let constraint_residual = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let energy = solver.energy_grad(&xs, None);
    let length = solver.exact_length(&xs);
    let times = uniform_grid(problem.nodes);
    let xs_full = solver.expand_nodes(&xs);
    let curve = Curve::lift_polyline(&solver.ambient, &times, &xs_full, &vec![0.0; solver.dw])?
        .translate(&problem.start)?;

    Ok(OptResult {
        curve,
        length,
        energy,
        constraint_residual,
        iterations: total_iters,
        converged,
        certified_lower_bound: clb,
    })
}

/// One augmented-Lagrangian inner solve; returns whether the gradient
/// tolerance was reached.
#[allow(clippy::too_many_arguments)]
fn lbfgs_inner(
    solver: &Solver,
    vars: &mut [f64],
    lambda: &[f64],
    mu: f64,
    max_inner: usize,
    grad_tol: f64,
    xs: &mut [f64],
    grad_xs: &mut [f64],
    total_iters: &mut usize,
) -> Result<bool> {
    let n = vars.len();
    let mut g = vec![0.0; n];
    let mut f = solver.merit_grad(vars, lambda, mu, xs, grad_xs, Some(&mut g))?;
    let mut mem: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    let mut dir = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut g_new = vec![0.0; n];

    for _ in 0..max_inner {
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gmax <= grad_tol {
            return Ok(true);
        }

        two_loop(&mem, &g, &mut dir);
        let mut slope: f64 = dir.iter().zip(&g).map(|(d, gi)| d * gi).sum();
        if slope >= 0.0 {
            // not a descent direction: restart from steepest descent
            mem.clear();
            for (d, gi) in dir.iter_mut().zip(&g) {
                *d = -gi;
            }
            slope = -g.iter().map(|v| v * v).sum::<f64>();
        }

        // backtracking Armijo search
        let mut step = 1.0;
        let mut accepted = false;
        for _bt in 0..50 {
            for i in 0..n {
                trial[i] = vars[i] + step * dir[i];
            }
            let f_new = solver.merit_grad(&trial, lambda, mu, xs, grad_xs, None)?;
            if f_new <= f + ARMIJO_C1 * step * slope {
                accepted = true;
                f = f_new;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Ok(false);
        }
        solver.merit_grad(&trial, lambda, mu, xs, grad_xs, Some(&mut g_new))?;

        let mut s = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut sy = 0.0;
        for i in 0..n {
            s[i] = trial[i] - vars[i];
            y[i] = g_new[i] - g[i];
            sy += s[i] * y[i];
        }
        if sy > 1e-14 {
            if mem.len() == LBFGS_MEM {
                mem.remove(0);
            }
            mem.push((s, y, 1.0 / sy));
        }
        vars.copy_from_slice(&trial);
        g.copy_from_slice(&g_new);
        *total_iters += 1;
    }
    let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(gmax <= grad_tol)
}

/// Two-loop recursion producing `dir = -H g`.
fn two_loop(mem: &[(Vec<f64>, Vec<f64>, f64)], g: &[f64], dir: &mut [f64]) {
    dir.copy_from_slice(g);
    let mut alpha = vec![0.0; mem.len()];
    for (idx, (s, y, rho)) in mem.iter().enumerate().rev() {
        let a = rho
            * s.iter()
                .zip(dir.iter())
                .map(|(si, qi)| si * qi)
                .sum::<f64>();
        alpha[idx] = a;
        for (qi, yi) in dir.iter_mut().zip(y) {
            *qi -= a * yi;
        }
    }
    if let Some((s, y, _)) = mem.last() {
        let sy: f64 = s.iter().zip(y).map(|(a, b)| a * b).sum();
        let yy: f64 = y.iter().map(|v| v * v).sum();
        if yy > 0.0 {
            let gamma = sy / yy;
            dir.iter_mut().for_each(|v| *v *= gamma);
        }
    }
    for (idx, (s, y, rho)) in mem.iter().enumerate() {
        let b = rho
            * y.iter()
                .zip(dir.iter())
                .map(|(yi, qi)| yi * qi)
                .sum::<f64>();
        let a = alpha[idx];
        for (qi, si) in dir.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    dir.iter_mut().for_each(|v| *v = -*v);
}

/// Outcome of a finite-difference gradient verification.
#[derive(Debug, Clone)]
pub struct GradientCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    /// Coordinates excluded because a p-norm block velocity was too close
    /// to the non-smooth origin for reliable differencing.
    pub skipped: usize,
}

/// Compares the analytic merit gradient (objective + constraint terms)
/// against central finite differences at 20 random interior coordinates of
/// the given curve.
pub fn gradient_check(
    problem: &OptProblem,
    curve: &Curve,
    seed: u64,
) -> Result<GradientCheckReport> {
    const FD_STEP: f64 = 1e-6;
    const COORDS: usize = 20;
    let solver = Solver::new(problem)?;
    let vars_full = solver.init_from_curve(problem, curve)?;
    let solver = solver.compressed(&vars_full);
    let vars = solver.compress_vars(&vars_full);
    let n = solver.nvars();
    let mut xs = vec![0.0; problem.nodes * solver.hdim];
    let mut grad_xs = vec![0.0; problem.nodes * solver.hdim];
    let lambda: Vec<f64> = (0..solver.dw).map(|a| 0.3 + 0.1 * a as f64).collect();
    let mu = problem.penalty_weight;
    let mut analytic = vec![0.0; n];
    solver.merit_grad(
        &vars,
        &lambda,
        mu,
        &mut xs,
        &mut grad_xs,
        Some(&mut analytic),
    )?;

    let p_sensitive = matches!(&problem.metric, MetricSpec::Finsler(f) if f.p() > 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel: f64 = 0.0;
    let mut checked = 0usize;
    let mut skipped = 0usize;
    let mut perturbed = vars.clone();
    for _ in 0..COORDS {
        let j = rng.gen_range(0..n);
        if p_sensitive && near_singular_block(&solver, &vars, j) {
            skipped += 1;
            continue;
        }
        perturbed[j] = vars[j] + FD_STEP;
        let fp = solver.merit_grad(&perturbed, &lambda, mu, &mut xs, &mut grad_xs, None)?;
        perturbed[j] = vars[j] - FD_STEP;
        let fm = solver.merit_grad(&perturbed, &lambda, mu, &mut xs, &mut grad_xs, None)?;
        perturbed[j] = vars[j];
        let fd = (fp - fm) / (2.0 * FD_STEP);
        let rel = (fd - analytic[j]).abs() / analytic[j].abs().max(1.0);
        max_rel = max_rel.max(rel);
        checked += 1;
    }
    Ok(GradientCheckReport {
        max_rel_error: max_rel,
        checked,
        skipped,
    })
}

/// True when either edge difference adjacent to coordinate `j` has a block
/// norm small enough that the smoothed p-power is effectively non-smooth at
/// finite-difference scale.
fn near_singular_block(solver: &Solver, vars: &[f64], j: usize) -> bool {
    const SMALL: f64 = 1e-4;
    let node = j / solver.hdim + 1; // interior node index in the full grid
    let block = (j % solver.hdim) / solver.dv;
    let mut xs = vec![0.0; solver.nodes * solver.hdim];
    solver.assemble(vars, &mut xs);
    for edge in [node - 1, node] {
        let mut n2 = 0.0;
        for d in 0..solver.dv {
            let idx = block * solver.dv + d;
            let diff = xs[(edge + 1) * solver.hdim + idx] - xs[edge * solver.hdim + idx];
            n2 += diff * diff;
        }
        if n2.sqrt() < SMALL {
            return true;
        }
    }
    false
}

/// One row of a degeneration sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub n: usize,
    pub warm_length: f64,
    pub optimized_length: f64,
    pub constraint_residual: f64,
    pub iterations: usize,
    pub lower_bound: f64,
}

/// Runs `minimize_length` toward the pure-center endpoint `z` from the
/// shrinking warm start at each index of `n_list` (with `c = √6`, so the
/// endpoint is exactly `z`).
///
/// The previous optimum stays feasible when `n` grows, so it is kept as a
/// fallback candidate; reported lengths are therefore non-increasing along
/// an increasing `n_list`.
pub fn degeneration_sweep(
    metric: &MetricSpec,
    ambient: &Arc<Ambient>,
    z: &[f64],
    n_list: &[usize],
    nodes: usize,
) -> Result<Vec<SweepRow>> {
    if metric.classify_strictness() != Strictness::StrictlyWeak {
        return Err(Error::StrongMetric(
            "a strong metric has positive distances; nothing degenerates".into(),
        ));
    }
    let c = 6.0f64.sqrt();
    let mut rows = Vec::with_capacity(n_list.len());
    let mut best: Option<(Curve, f64, f64, usize)> = None;
    for &n in n_list {
        let w = metric.shrinking_witness(n, ambient)?;
        let pair = shrinking_pair(n, c, z, &w, nodes | 1)?;
        let warm_length = pair.curve.length(metric, LengthMode::SubFinsler)?;
        let start = GroupPoint::zero(ambient);
        let end = pair.exact_endpoint()?;
        let problem = OptProblem::new(metric.clone(), start, end)?.with_nodes(nodes | 1);
        let res = minimize_length(&problem, Some(&pair.curve))?;

        let (curve, length, residual, iters) = match &best {
            Some((bc, bl, br, _)) if *bl < res.length => (bc.clone(), *bl, *br, res.iterations),
            _ => (
                res.curve.clone(),
                res.length,
                res.constraint_residual,
                res.iterations,
            ),
        };
        best = Some((curve, length, residual, iters));
        rows.push(SweepRow {
            n,
            warm_length,
            optimized_length: length,
            constraint_residual: residual,
            iterations: iters,
            lower_bound: 0.0,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::HTypeAlgebra;
    use crate::metrics::{CenterMatrix, FinslerSpec, RiemannianSpec, WeightLaw};

    fn heis(n: usize) -> Arc<Ambient> {
        Ambient::new(HTypeAlgebra::heisenberg(), n)
    }

    fn strong() -> MetricSpec {
        MetricSpec::Riemannian(
            RiemannianSpec::with_identity_center(WeightLaw::Constant(1.0), 1).unwrap(),
        )
    }

    fn weak_ip1() -> MetricSpec {
        MetricSpec::Riemannian(
            RiemannianSpec::with_identity_center(WeightLaw::InversePower(1.0), 1).unwrap(),
        )
    }

    #[test]
    fn straight_segment_is_optimal() {
        let amb = heis(2);
        let start = GroupPoint::zero(&amb);
        let mut end = GroupPoint::zero(&amb);
        end.horizontal_mut().copy_from_slice(&[3.0, 4.0, 0.0, 0.0]);
        let problem = OptProblem::new(strong(), start, end).unwrap();
        let res = minimize_length(&problem, None).unwrap();
        assert!(res.converged);
        assert!((res.length - 5.0).abs() < 1e-6, "length {}", res.length);
        assert!(res.constraint_residual < 1e-8);
    }

    #[test]
    fn straight_segment_finsler() {
        let amb = heis(2);
        let spec = MetricSpec::Finsler(FinslerSpec::new(4.0, CenterMatrix::identity(1)).unwrap());
        let start = GroupPoint::zero(&amb);
        let mut end = GroupPoint::zero(&amb);
        end.horizontal_mut().copy_from_slice(&[1.0, 0.0, 1.0, 0.0]);
        // block 4-norm of (1, 1) per unit time: 2^{1/4}
        let problem = OptProblem::new(spec, start, end).unwrap();
        let res = minimize_length(&problem, None).unwrap();
        assert!(
            (res.length - 2.0f64.powf(0.25)).abs() < 1e-6,
            "{}",
            res.length
        );
    }

    #[test]
    fn unit_area_matches_isoperimetric_length() {
        // pure center endpoint: the optimum is the circle of enclosed area 1
        // with length 2√π; the polygon optimum differs by O(1/M²).
        let amb = heis(1);
        let start = GroupPoint::zero(&amb);
        let end = GroupPoint::from_center(&amb, &[1.0]).unwrap();
        let problem = OptProblem::new(strong(), start, end).unwrap();
        let res = minimize_length(&problem, None).unwrap();
        let expect = 2.0 * std::f64::consts::PI.sqrt();
        assert!(
            res.constraint_residual < 1e-8,
            "{}",
            res.constraint_residual
        );
        assert!((res.length - expect).abs() < 0.01, "length {}", res.length);
        // the discrete optimum is the regular polygon, slightly above
        assert!(res.length >= expect - 1e-9);
    }

    #[test]
    fn coincident_endpoints_zero_curve() {
        let amb = heis(1);
        let mut p = GroupPoint::zero(&amb);
        p.horizontal_mut()[0] = 2.0;
        let problem = OptProblem::new(strong(), p.clone(), p).unwrap();
        let res = minimize_length(&problem, None).unwrap();
        assert_eq!(res.length, 0.0);
        assert!(res.converged);
    }

    #[test]
    fn warm_start_can_only_improve() {
        let n = 2;
        let spec = weak_ip1();
        let blocks = spec.shrinking_witness_blocks(n).unwrap();
        let amb = heis(blocks);
        let w = spec.shrinking_witness(n, &amb).unwrap();
        let pair = shrinking_pair(n, 6.0f64.sqrt(), &[1.0], &w, 33).unwrap();
        let start = GroupPoint::zero(&amb);
        let end = pair.exact_endpoint().unwrap();
        let problem = OptProblem::new(spec, start, end).unwrap();
        let res = minimize_length(&problem, Some(&pair.curve)).unwrap();
        // compare against the polyline resampling of the warm start, which
        // is what the solver actually starts from
        let solver = Solver::new(&problem).unwrap();
        let vars = solver.init_from_curve(&problem, &pair.curve).unwrap();
        let mut xs = vec![0.0; problem.nodes * solver.hdim];
        solver.assemble(&vars, &mut xs);
        let warm_poly = solver.exact_length(&xs);
        assert!(
            res.length <= warm_poly + 1e-8,
            "optimized {} vs warm {}",
            res.length,
            warm_poly
        );
        assert!(res.length >= res.certified_lower_bound - 1e-8);
    }

    #[test]
    fn energy_dominates_length() {
        let amb = heis(1);
        let start = GroupPoint::zero(&amb);
        let end = GroupPoint::from_center(&amb, &[0.5]).unwrap();
        let problem = OptProblem::new(strong(), start, end).unwrap();
        let res = minimize_length(&problem, None).unwrap();
        // Cauchy-Schwarz on the unit horizon: sqrt(E) >= length
        assert!(res.energy.sqrt() + 1e-10 >= res.length);
    }

    #[test]
    fn gradient_check_riemannian_and_finsler() {
        let amb = heis(3);
        let times = uniform_grid(17);
        let horiz: Vec<f64> = times
            .iter()
            .flat_map(|t| {
                let s = *t;
                [s.sin(), s * s, 0.3 * s, (2.0 * s).cos() - 1.0, s, -0.5 * s]
            })
            .collect();
        let curve = Curve::lift_polyline(&amb, &times, &horiz, &[0.0]).unwrap();
        let start = GroupPoint::zero(&amb);
        let end = curve.endpoint();
        for metric in [
            weak_ip1(),
            MetricSpec::Finsler(FinslerSpec::new(4.0, CenterMatrix::identity(1)).unwrap()),
        ] {
            let problem = OptProblem::new(metric, start.clone(), end.clone())
                .unwrap()
                .with_nodes(17);
            let report = gradient_check(&problem, &curve, 7).unwrap();
            assert!(
                report.max_rel_error < 1e-5,
                "rel err {} (checked {}, skipped {})",
                report.max_rel_error,
                report.checked,
                report.skipped
            );
            assert!(report.checked > 0);
        }
    }

    #[test]
    fn lower_bound_never_violated() {
        use rand::Rng;
        let amb = heis(2);
        let spec = MetricSpec::Finsler(FinslerSpec::new(4.0, CenterMatrix::identity(1)).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let mut end = GroupPoint::zero(&amb);
            for v in end.horizontal_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
            end.center_mut()[0] = rng.gen_range(-0.5..0.5);
            let problem = OptProblem::new(spec.clone(), GroupPoint::zero(&amb), end).unwrap();
            let res = minimize_length(&problem, None).unwrap();
            assert!(
                res.length >= res.certified_lower_bound - 1e-8,
                "length {} below bound {}",
                res.length,
                res.certified_lower_bound
            );
        }
    }

    #[test]
    fn sweep_monotone_and_bounded() {
        let spec = weak_ip1();
        let n_list = [1usize, 2, 3, 4];
        let blocks = spec.shrinking_witness_blocks(4).unwrap();
        let amb = heis(blocks);
        let rows = degeneration_sweep(&spec, &amb, &[1.0], &n_list, 33).unwrap();
        let c0 = spec.continuity_constant();
        for (i, row) in rows.iter().enumerate() {
            assert!(row.optimized_length >= 0.0);
            let bound = 2.0 * (6.0f64.sqrt() / (row.n as f64).sqrt()) * (1.0 + c0);
            assert!(
                row.warm_length <= bound,
                "warm {} bound {bound}",
                row.warm_length
            );
            if i > 0 {
                assert!(
                    row.optimized_length <= rows[i - 1].optimized_length + 1e-8,
                    "sweep not monotone at n = {}",
                    row.n
                );
            }
        }
    }

    #[test]
    fn sweep_rejects_strong_metric() {
        let amb = heis(4);
        assert!(matches!(
            degeneration_sweep(&strong(), &amb, &[1.0], &[1, 2], 33),
            Err(Error::StrongMetric(_))
        ));
    }

    #[test]
    fn deterministic_repeat() {
        let amb = heis(1);
        let start = GroupPoint::zero(&amb);
        let end = GroupPoint::from_center(&amb, &[1.0]).unwrap();
        let problem = OptProblem::new(strong(), start, end).unwrap();
        let a = minimize_length(&problem, None).unwrap();
        let b = minimize_length(&problem, None).unwrap();
        assert_eq!(a.length.to_bits(), b.length.to_bits());
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn small_grid_rejected() {
        let amb = heis(1);
        let problem = OptProblem::new(
            strong(),
            GroupPoint::zero(&amb),
            GroupPoint::from_center(&amb, &[1.0]).unwrap(),
        )
        .unwrap()
        .with_nodes(5);
        assert!(minimize_length(&problem, None).is_err());
    }
}
