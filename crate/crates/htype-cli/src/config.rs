//! JSON experiment configuration: strict parsing and validation.

use serde::{Deserialize, Serialize};

use htype_core::{
    Ambient, CenterMatrix, FinslerSpec, HTypeAlgebra, MetricSpec, RiemannianSpec, WeightLaw,
};
use std::sync::Arc;

/// Which experiment to dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "axioms")]
    Axioms,
    #[serde(rename = "shrink")]
    Shrink,
    #[serde(rename = "curvature")]
    Curvature,
    #[serde(rename = "badjoint")]
    BAdjoint,
    #[serde(rename = "levi-civita")]
    LeviCivita,
    #[serde(rename = "optimize")]
    Optimize,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Axioms,
        ExperimentKind::Shrink,
        ExperimentKind::Curvature,
        ExperimentKind::BAdjoint,
        ExperimentKind::LeviCivita,
        ExperimentKind::Optimize,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Axioms => "axioms",
            ExperimentKind::Shrink => "shrink",
            ExperimentKind::Curvature => "curvature",
            ExperimentKind::BAdjoint => "badjoint",
            ExperimentKind::LeviCivita => "levi-civita",
            ExperimentKind::Optimize => "optimize",
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            ExperimentKind::Axioms => {
                "randomized H-type identity suite on a base algebra plus product-level checks"
            }
            ExperimentKind::Shrink => {
                "shrinking-curve sweep: endpoint exactness and vanishing sub-Finsler lengths"
            }
            ExperimentKind::Curvature => {
                "Arnold sectional curvature along the blow-up plane sequences"
            }
            ExperimentKind::BAdjoint => "B-adjoint defining identity and its exact special cases",
            ExperimentKind::LeviCivita => "Levi-Civita obstruction growth diagnostic",
            ExperimentKind::Optimize => "degeneration sweep of the constrained length optimizer",
        }
    }
}

/// Metric description as it appears in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricConfig {
    Riemannian {
        law: WeightLaw,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w_matrix: Option<Vec<Vec<f64>>>,
    },
    Finsler {
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w_matrix: Option<Vec<Vec<f64>>>,
    },
}

impl MetricConfig {
    pub fn build(&self, dim_w: usize) -> Result<MetricSpec, String> {
        let center = |m: &Option<Vec<Vec<f64>>>| -> Result<CenterMatrix, String> {
            match m {
                None => Ok(CenterMatrix::identity(dim_w)),
                Some(rows) => CenterMatrix::new(rows).map_err(|e| e.to_string()),
            }
        };
        match self {
            MetricConfig::Riemannian { law, w_matrix } => {
                let c = center(w_matrix)?;
                if c.dim() != dim_w {
                    return Err(format!(
                        "w_matrix is {}x{} but the center has dimension {dim_w}",
                        c.dim(),
                        c.dim()
                    ));
                }
                RiemannianSpec::new(*law, c)
                    .map(MetricSpec::Riemannian)
                    .map_err(|e| e.to_string())
            }
            MetricConfig::Finsler { p, w_matrix } => {
                let c = center(w_matrix)?;
                if c.dim() != dim_w {
                    return Err(format!(
                        "w_matrix is {}x{} but the center has dimension {dim_w}",
                        c.dim(),
                        c.dim()
                    ));
                }
                FinslerSpec::new(*p, c)
                    .map(MetricSpec::Finsler)
                    .map_err(|e| e.to_string())
            }
        }
    }
}

fn default_truncation() -> usize {
    32
}

/// A fully parsed experiment description; unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub algebra: String,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricConfig>,
    /// Random trials (axioms, badjoint).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Residual tolerance for the built-in assertions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Sweep upper index (shrink, curvature, levi-civita, optimize).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Shrinking amplitude; defaults to sqrt(6) so the endpoint is exactly z.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Unit center direction; defaults to the first center basis vector.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<f64>>,
    /// Curve grid node count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
}

impl ExperimentConfig {
    pub fn parse(raw: &str) -> Result<Self, String> {
        let cfg: ExperimentConfig = serde_json::from_str(raw).map_err(|e| {
            format!(
                "config error at line {}, column {}: {e}",
                e.line(),
                e.column()
            )
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        HTypeAlgebra::by_name(&self.algebra).map_err(|e| e.to_string())?;
        if self.truncation == 0 {
            return Err("truncation must be at least 1".into());
        }
        if let Some(t) = self.trials {
            if t == 0 {
                return Err("trials must be positive".into());
            }
        }
        if let Some(tol) = self.tol {
            if tol <= 0.0 {
                return Err("tol must be positive".into());
            }
        }
        if let Some(n) = self.n_max {
            if n == 0 {
                return Err("n_max must be at least 1".into());
            }
        }
        if let Some(z) = &self.z {
            let n: f64 = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (n - 1.0).abs() > 1e-12 {
                return Err(format!("z must be a unit vector, |z| = {n}"));
            }
        }
        // metric shape is checked against the algebra's center dimension
        let alg = HTypeAlgebra::by_name(&self.algebra).map_err(|e| e.to_string())?;
        if let Some(m) = &self.metric {
            m.build(alg.dim_w())?;
        }
        if let Some(z) = &self.z {
            if z.len() != alg.dim_w() {
                return Err(format!(
                    "z has {} entries but the center has dimension {}",
                    z.len(),
                    alg.dim_w()
                ));
            }
        }
        Ok(())
    }

    pub fn algebra(&self) -> HTypeAlgebra {
        HTypeAlgebra::by_name(&self.algebra).expect("validated at parse time")
    }

    pub fn ambient(&self) -> Arc<Ambient> {
        Ambient::new(self.algebra(), self.truncation)
    }

    /// Metric spec with the configured or default (inverse_power(1)) law.
    pub fn metric_spec(&self) -> MetricSpec {
        let dim_w = self.algebra().dim_w();
        match &self.metric {
            Some(m) => m.build(dim_w).expect("validated at parse time"),
            None => MetricSpec::Riemannian(
                RiemannianSpec::with_identity_center(WeightLaw::InversePower(1.0), dim_w)
                    .expect("default law is valid"),
            ),
        }
    }

    /// Unit center direction, defaulting to the first basis vector.
    pub fn z_direction(&self) -> Vec<f64> {
        match &self.z {
            Some(z) => z.clone(),
            None => {
                let mut z = vec![0.0; self.algebra().dim_w()];
                z[0] = 1.0;
                z
            }
        }
    }
}
