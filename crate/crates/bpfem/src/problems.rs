//! Benchmark problem presets: a smooth manufactured solution and the
//! three-body rotation transport test.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::bounds::BoundSpec;
use crate::error::{Error, Result};

pub type ScalarField = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type VelocityField = Arc<dyn Fn(f64, f64, f64) -> [f64; 2] + Send + Sync>;

/// The continuous problem: ∂_t u - ε Δu + β·∇u + μ u = f on (0,1)² with
/// homogeneous Dirichlet data, initial value u0, and known nodal bounds.
#[derive(Clone)]
pub struct ProblemSpec {
    pub eps: f64,
    pub beta: VelocityField,
    pub mu: f64,
    pub f: ScalarField,
    pub u0: ScalarField,
    pub bounds: BoundSpec,
    /// Analytical solution when available (used for error reporting).
    pub exact: Option<ScalarField>,
    /// False when β is constant in time; enables factorization reuse.
    pub beta_time_dependent: bool,
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("eps", &self.eps)
            .field("mu", &self.mu)
            .field("beta_time_dependent", &self.beta_time_dependent)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetName {
    Smooth,
    Rotation,
}

impl std::str::FromStr for PresetName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "smooth" => Ok(PresetName::Smooth),
            "rotation" => Ok(PresetName::Rotation),
            other => Err(Error::invalid(format!("unknown problem preset `{other}`"))),
        }
    }
}

/// Initial datum of the rotation benchmark: slotted cylinder, cone, and
/// cosine hump, each supported on a disk of radius 0.15; zero elsewhere.
pub fn rotation_initial_datum(x: f64, y: f64) -> f64 {
    const R0: f64 = 0.15;
    let rad = |cx: f64, cy: f64| ((x - cx).powi(2) + (y - cy).powi(2)).sqrt() / R0;

    // slotted cylinder at (0.5, 0.75)
    let r = rad(0.5, 0.75);
    if r <= 1.0 {
        return if (x - 0.5).abs() >= 0.0225 || y >= 0.85 { 1.0 } else { 0.0 };
    }
    // cone at (0.5, 0.25)
    let r = rad(0.5, 0.25);
    if r <= 1.0 {
        return 1.0 - r;
    }
    // hump at (0.25, 0.5)
    let r = rad(0.25, 0.5);
    if r <= 1.0 {
        return 0.25 * (1.0 + (PI * r).cos());
    }
    0.0
}

/// The two benchmark presets.
pub fn preset(name: PresetName) -> ProblemSpec {
    match name {
        PresetName::Smooth => {
            let eps = 1e-6;
            let mu = 1.0;
            let exact = |x: f64, y: f64, t: f64| t.exp() * (PI * x).sin() * (PI * y).sin();
            // f = ∂_t u - εΔu + β·∇u + μu with u = e^t sin(πx) sin(πy)
            let f = move |x: f64, y: f64, t: f64| {
                let sx = (PI * x).sin();
                let sy = (PI * y).sin();
                let cx = (PI * x).cos();
                let cy = (PI * y).cos();
                t.exp() * ((1.0 + 2.0 * PI * PI * eps + mu) * sx * sy + PI * (2.0 * cx * sy + sx * cy))
            };
            ProblemSpec {
                eps,
                beta: Arc::new(|_, _, _| [2.0, 1.0]),
                mu,
                f: Arc::new(f),
                u0: Arc::new(move |x, y, _| exact(x, y, 0.0)),
                bounds: BoundSpec::with_upper(|t: f64| t.exp()),
                exact: Some(Arc::new(exact)),
                beta_time_dependent: false,
            }
        }
        PresetName::Rotation => ProblemSpec {
            eps: 1e-12,
            beta: Arc::new(|x, y, _| [0.5 - y, x - 0.5]),
            mu: 0.0,
            f: Arc::new(|_, _, _| 0.0),
            u0: Arc::new(|x, y, _| rotation_initial_datum(x, y)),
            bounds: BoundSpec::constant(0.0, 1.0),
            exact: None,
            beta_time_dependent: false,
        },
    }
}
