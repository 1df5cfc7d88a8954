//! The six experiment implementations behind the runner.
//!
//! Each experiment produces CSV rows, a handful of summary scalars, and a
//! list of built-in assertions; the runner turns those into files and an
//! exit code.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use htype_core::{
    b_adjoint, blowup_planes, degeneration_sweep, levi_civita_obstruction, shrinking_pair,
    GroupPoint, LengthMode, MetricSpec, WeightLaw,
};

use crate::config::{ExperimentConfig, ExperimentKind};

/// One built-in pass/fail check with a human-readable detail line.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Everything an experiment emits.
#[derive(Debug)]
pub struct ExperimentOutput {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub scalars: Map<String, Value>,
    pub assertions: Vec<Assertion>,
}

impl ExperimentOutput {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

/// Dispatches the configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, String> {
    match cfg.experiment {
        ExperimentKind::Axioms => axioms(cfg),
        ExperimentKind::Shrink => shrink(cfg),
        ExperimentKind::Curvature => curvature(cfg),
        ExperimentKind::BAdjoint => badjoint(cfg),
        ExperimentKind::LeviCivita => levi_civita(cfg),
        ExperimentKind::Optimize => optimize(cfg),
    }
}

fn axioms(cfg: &ExperimentConfig) -> Result<ExperimentOutput, String> {
    let trials = cfg.trials.unwrap_or(1000);
    let tol = cfg.tol.unwrap_or(1e-12);
    let alg = cfg.algebra();
    let report = alg
        .verify_axioms(trials, tol, cfg.seed)
        .map_err(|e| e.to_string())?;

    let amb = cfg.ambient();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut r_pair: f64 = 0.0;
    let mut r_bound: f64 = 0.0;
    for _ in 0..trials {
        let mut x = GroupPoint::zero(&amb);
        let mut y = GroupPoint::zero(&amb);
        for v in x.horizontal_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        for v in y.horizontal_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        let z: Vec<f64> = (0..amb.dim_w()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nx2 = x.norm_sq();
        let jx = x.j_apply(&z).map_err(|e| e.to_string())?;
        let br = x.bracket(&jx).map_err(|e| e.to_string())?;
        let r = br
            .center()
            .iter()
            .zip(&z)
            .map(|(got, want)| (got - nx2 * want).abs())
            .fold(0.0f64, f64::max);
        // scale back to unit data so the tolerance is comparable
        r_pair = r_pair.max(r / nx2.max(1.0));
        let bxy = x.bracket(&y).map_err(|e| e.to_string())?;
        let excess = bxy.norm() - x.norm() * y.norm();
        r_bound = r_bound.max(excess.max(0.0) / (x.norm() * y.norm()).max(1.0));
    }

    let mut rows: Vec<Vec<String>> = report
        .residuals
        .iter()
        .map(|(name, r)| vec![name.to_string(), fmt(*r)])
        .collect();
    rows.push(vec![
        format!("[x, J_z x] = |x|^2 z (N = {})", amb.blocks()),
        fmt(r_pair),
    ]);
    rows.push(vec![
        format!("|[x, y]| <= |x||y| (N = {})", amb.blocks()),
        fmt(r_bound),
    ]);

    let max_residual = report.max_residual().max(r_pair).max(r_bound);
    let mut scalars = Map::new();
    scalars.insert("trials".into(), json!(trials));
    scalars.insert("max_residual".into(), json!(max_residual));

    let mut assertions = Vec::new();
    for row in &rows {
        let r: f64 = row[1].parse().unwrap_or(f64::NAN);
        assertions.push(Assertion::new(
            &format!("residual within {tol:.0e}: {}", row[0]),
            r <= tol,
            format!("residual {r:.3e}"),
        ));
    }
    Ok(ExperimentOutput {
        header: vec!["identity", "max_residual"],
        rows,
        scalars,
        assertions,
    })
}

fn shrink(cfg: &ExperimentConfig) -> Result<ExperimentOutput, String> {
    let metric = cfg.metric_spec();
    let n_max = cfg.n_max.unwrap_or(32);
    let c = cfg.c.unwrap_or_else(|| 6.0f64.sqrt());
    let nodes = cfg.nodes.unwrap_or(257) | 1;
    let z = cfg.z_direction();
    let amb = cfg.ambient();
    let c0 = metric.continuity_constant();

    let mut rows = Vec::new();
    let mut lengths = Vec::new();
    let mut max_endpoint_err: f64 = 0.0;
    let mut max_eq_gap: f64 = 0.0;
    let mut all_bounded = true;
    for n in 1..=n_max {
        let w = metric
            .shrinking_witness(n, &amb)
            .map_err(|e| e.to_string())?;
        let pair = shrinking_pair(n, c, &z, &w, nodes).map_err(|e| e.to_string())?;
        let end = pair.curve.endpoint();
        let exact = pair.exact_endpoint().map_err(|e| e.to_string())?;
        let err = end.axpy(-1.0, &exact).map_err(|e| e.to_string())?.norm();
        let ls = pair
            .curve
            .length(&metric, LengthMode::SubFinsler)
            .map_err(|e| e.to_string())?;
        let lf = pair
            .curve
            .length(&metric, LengthMode::Finsler)
            .map_err(|e| e.to_string())?;
        let bound = 2.0 * (c / (n as f64).sqrt()) * (1.0 + c0);
        max_endpoint_err = max_endpoint_err.max(err);
        max_eq_gap = max_eq_gap.max((ls - lf).abs());
        all_bounded &= ls <= bound;
        lengths.push(ls);
        rows.push(vec![
            n.to_string(),
            metric
                .shrinking_witness_blocks(n)
                .map_err(|e| e.to_string())?
                .to_string(),
            fmt(ls),
            fmt(lf),
            fmt(err),
            fmt(bound),
        ]);
    }
    let decreasing = lengths.windows(2).all(|w| w[1] < w[0]);

    let mut scalars = Map::new();
    scalars.insert("c".into(), json!(c));
    scalars.insert("max_endpoint_error".into(), json!(max_endpoint_err));
    scalars.insert("final_length".into(), json!(lengths.last().copied()));
    let assertions = vec![
        Assertion::new(
            "concatenated endpoint hits (c^2/6) z within 1e-8",
            max_endpoint_err <= 1e-8,
            format!("max error {max_endpoint_err:.3e}"),
        ),
        Assertion::new(
            "lengths below 2(c/sqrt(n))(1 + c0)",
            all_bounded,
            format!("c0 = {c0}"),
        ),
        Assertion::new(
            "sub-Finsler lengths strictly decreasing in n",
            decreasing,
            format!(
                "first {:.6}, last {:.6}",
                lengths[0],
                lengths[lengths.len() - 1]
            ),
        ),
        Assertion::new(
            "Finsler and sub-Finsler lengths agree to 1e-10 on horizontal curves",
            max_eq_gap <= 1e-10,
            format!("max gap {max_eq_gap:.3e}"),
        ),
    ];
    Ok(ExperimentOutput {
        header: vec![
            "n",
            "witness_blocks",
            "length_s",
            "length_f",
            "endpoint_error",
            "bound",
        ],
        rows,
        scalars,
        assertions,
    })
}

fn curvature(cfg: &ExperimentConfig) -> Result<ExperimentOutput, String> {
    let MetricSpec::Riemannian(spec) = cfg.metric_spec() else {
        return Err("the curvature experiment needs a riemannian metric".into());
    };
    let n_max = cfg.n_max.unwrap_or(32);
    let z = cfg.z_direction();
    let amb = cfg.ambient();
    if n_max > amb.blocks() {
        return Err(format!(
            "n_max {n_max} exceeds the truncation ({} blocks)",
            amb.blocks()
        ));
    }

    let identity_center = spec.w_matrix().is_identity();
    let mut rows = Vec::new();
    let mut max_rel: f64 = 0.0;
    for n in 1..=n_max {
        let r = blowup_planes(&spec, n, &z, &amb).map_err(|e| e.to_string())?;
        let obstruction = levi_civita_obstruction(&spec, &amb, &z, n).map_err(|e| e.to_string())?;
        let a_n = spec.a(n);
        if identity_center {
            let kp = -0.75 / (a_n * a_n);
            let kq = 0.25 / (a_n * a_n);
            max_rel = max_rel
                .max((r.k_p - kp).abs() / kp.abs())
                .max((r.k_q - kq).abs() / kq.abs());
        }
        rows.push(vec![
            n.to_string(),
            fmt(a_n),
            fmt(r.k_p),
            fmt(r.k_q),
            fmt(obstruction),
        ]);
    }

    let mut scalars = Map::new();
    scalars.insert("n_max".into(), json!(n_max));
    scalars.insert("max_closed_form_rel_error".into(), json!(max_rel));
    let mut assertions = Vec::new();
    if identity_center {
        assertions.push(Assertion::new(
            "Arnold curvatures match -3/(4 a_n^2) and 1/(4 a_n^2) to rel 1e-9",
            max_rel <= 1e-9,
            format!("max rel error {max_rel:.3e}"),
        ));
    }
    let first: f64 = rows[0][2].parse().unwrap();
    let last: f64 = rows[rows.len() - 1][2].parse().unwrap();
    assertions.push(Assertion::new(
        "K_P diverges to -inf along the sweep",
        last <= first && last < 0.0,
        format!("K_P(1) = {first:.3}, K_P({n_max}) = {last:.3}"),
    ));
    Ok(ExperimentOutput {
        header: vec!["n", "a_n", "k_p", "k_q", "obstruction"],
        rows,
        scalars,
        assertions,
    })
}

fn badjoint(cfg: &ExperimentConfig) -> Result<ExperimentOutput, String> {
    let MetricSpec::Riemannian(spec) = cfg.metric_spec() else {
        return Err("the badjoint experiment needs a riemannian metric".into());
    };
    let trials = cfg.trials.unwrap_or(1000);
    let amb = cfg.ambient();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rand_vec = |rng: &mut ChaCha8Rng| {
        let mut v = GroupPoint::zero(&amb);
        for e in v.horizontal_mut() {
            *e = rng.gen_range(-1.0..1.0);
        }
        for e in v.center_mut() {
            *e = rng.gen_range(-1.0..1.0);
        }
        v
    };

    let mut r_defining: f64 = 0.0;
    let mut r_vanishing: f64 = 0.0;
    let mut r_jaz: f64 = 0.0;
    for _ in 0..trials {
        let x = rand_vec(&mut rng);
        let y = rand_vec(&mut rng);
        let z = rand_vec(&mut rng);
        let b = b_adjoint(&spec, &y, &x).map_err(|e| e.to_string())?;
        let lhs = spec.sigma_inner(&z, &b.vector).map_err(|e| e.to_string())?;
        let rhs = spec
            .sigma_inner(&x.bracket(&z).map_err(|e| e.to_string())?, &y)
            .map_err(|e| e.to_string())?;
        r_defining = r_defining.max((lhs - rhs).abs());

        // y in V or x in W: the adjoint vector is exactly zero
        let bv = b_adjoint(&spec, &y.project_horizontal(), &x).map_err(|e| e.to_string())?;
        let bw = b_adjoint(&spec, &y, &x.project_center()).map_err(|e| e.to_string())?;
        r_vanishing = r_vanishing.max(bv.vector.norm()).max(bw.vector.norm());

        // B(z, J_{Az}(Ax)) = -|Az|^2 x on horizontal x
        let xh = x.project_horizontal();
        let zc = z.project_center();
        let az = spec.w_matrix().apply(zc.center());
        let az2: f64 = az.iter().map(|v| v * v).sum();
        let ax = spec.apply_a(&xh).map_err(|e| e.to_string())?;
        let jazax = ax.j_apply(&az).map_err(|e| e.to_string())?;
        let b = b_adjoint(&spec, &zc, &jazax).map_err(|e| e.to_string())?;
        let resid = b.vector.axpy(az2, &xh).map_err(|e| e.to_string())?.norm();
        r_jaz = r_jaz.max(resid / az2.max(1.0));
    }

    let rows = vec![
        vec!["defining_identity".to_string(), fmt(r_defining)],
        vec!["vanishing_cases".to_string(), fmt(r_vanishing)],
        vec!["jaz_closed_form".to_string(), fmt(r_jaz)],
    ];
    let mut scalars = Map::new();
    scalars.insert("trials".into(), json!(trials));
    scalars.insert("max_defining_residual".into(), json!(r_defining));
    let assertions = vec![
        Assertion::new(
            "defining identity residual < 1e-10",
            r_defining < 1e-10,
            format!("max residual {r_defining:.3e}"),
        ),
        Assertion::new(
            "vanishing cases return the exact zero vector",
            r_vanishing == 0.0,
            format!("max norm {r_vanishing:.3e}"),
        ),
        Assertion::new(
            "B(z, J_Az(Ax)) = -|Az|^2 x within 1e-12",
            r_jaz <= 1e-12,
            format!("max residual {r_jaz:.3e}"),
        ),
    ];
    Ok(ExperimentOutput {
        header: vec!["check", "max_residual"],
        rows,
        scalars,
        assertions,
    })
}

fn levi_civita(cfg: &ExperimentConfig) -> Result<ExperimentOutput, String> {
    let MetricSpec::Riemannian(spec) = cfg.metric_spec() else {
        return Err("the levi-civita experiment needs a riemannian metric".into());
    };
    let n_max = cfg.n_max.unwrap_or(32);
    let z = cfg.z_direction();
    let amb = cfg.ambient();
    if n_max > amb.blocks() {
        return Err(format!(
            "n_max {n_max} exceeds the truncation ({} blocks)",
            amb.blocks()
        ));
    }

    let mut rows = Vec::new();
    let mut values = Vec::new();
    for n in 1..=n_max {
        let v = levi_civita_obstruction(&spec, &amb, &z, n).map_err(|e| e.to_string())?;
        values.push(v);
        rows.push(vec![n.to_string(), fmt(spec.a(n)), fmt(v)]);
    }

    let mut scalars = Map::new();
    scalars.insert("first".into(), json!(values[0]));
    scalars.insert("last".into(), json!(values[values.len() - 1]));
    let mut assertions = Vec::new();
    let identity_center = spec.w_matrix().is_identity();
    match spec.law() {
        WeightLaw::InversePower(q) if (q - 1.0).abs() < 1e-15 && identity_center => {
            let max_err = values
                .iter()
                .enumerate()
                .map(|(i, v)| (v - (i + 1) as f64).abs())
                .fold(0.0f64, f64::max);
            assertions.push(Assertion::new(
                "obstruction(n) = n within 1e-10",
                max_err <= 1e-10,
                format!("max error {max_err:.3e}"),
            ));
        }
        WeightLaw::Constant(_) => {
            let spread = values
                .iter()
                .map(|v| (v - values[0]).abs())
                .fold(0.0f64, f64::max);
            assertions.push(Assertion::new(
                "obstruction constant in n (strong metric)",
                spread <= 1e-12,
                format!("spread {spread:.3e}"),
            ));
        }
        _ => {
            assertions.push(Assertion::new(
                "obstruction grows along the sweep (strictly weak metric)",
                values[values.len() - 1] > values[0],
                format!(
                    "first {:.3}, last {:.3}",
                    values[0],
                    values[values.len() - 1]
                ),
            ));
        }
    }
    Ok(ExperimentOutput {
        header: vec!["n", "a_n", "obstruction"],
        rows,
        scalars,
        assertions,
    })
}

fn optimize(cfg: &ExperimentConfig) -> Result<ExperimentOutput, String> {
    let metric = cfg.metric_spec();
    let n_max = cfg.n_max.unwrap_or(32);
    let nodes = cfg.nodes.unwrap_or(33) | 1;
    let z = cfg.z_direction();
    let amb = cfg.ambient();
    let n_list: Vec<usize> = (1..=n_max).collect();
    let sweep = degeneration_sweep(&metric, &amb, &z, &n_list, nodes).map_err(|e| e.to_string())?;

    let c0 = metric.continuity_constant();
    let mut rows = Vec::new();
    let mut monotone = true;
    let mut warm_bounded = true;
    let mut above_lower = true;
    for (i, row) in sweep.iter().enumerate() {
        if i > 0 {
            monotone &= row.optimized_length <= sweep[i - 1].optimized_length + 1e-8;
        }
        let bound = 2.0 * (6.0f64.sqrt() / (row.n as f64).sqrt()) * (1.0 + c0);
        warm_bounded &= row.warm_length <= bound;
        above_lower &= row.optimized_length >= row.lower_bound - 1e-8;
        rows.push(vec![
            row.n.to_string(),
            fmt(row.warm_length),
            fmt(row.optimized_length),
            fmt(row.constraint_residual),
            row.iterations.to_string(),
        ]);
    }
    let first = sweep[0].optimized_length;
    let last = sweep[sweep.len() - 1].optimized_length;

    let mut scalars = Map::new();
    scalars.insert("first_length".into(), json!(first));
    scalars.insert("last_length".into(), json!(last));
    let mut assertions = vec![
        Assertion::new(
            "optimized lengths non-increasing",
            monotone,
            format!("first {first:.6}, last {last:.6}"),
        ),
        Assertion::new(
            "warm lengths below 2(sqrt(6)/sqrt(n))(1 + c0)",
            warm_bounded,
            format!("c0 = {c0}"),
        ),
        Assertion::new(
            "optimized lengths never fall below the certified lower bound",
            above_lower,
            "lower bound 0 for pure-center endpoints".to_string(),
        ),
    ];
    if n_max >= 32 {
        assertions.push(Assertion::new(
            "length at n = 32 below half the n = 1 value",
            last < 0.5 * first,
            format!("ratio {:.4}", last / first),
        ));
    }
    Ok(ExperimentOutput {
        header: vec![
            "n",
            "warm_length",
            "optimized_length",
            "constraint_residual",
            "iterations",
        ],
        rows,
        scalars,
        assertions,
    })
}
