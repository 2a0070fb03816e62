//! Time integration: the bound-preserving θ-scheme solved per step by a
//! damped fixed-point iteration, and the linear stabilized θ-scheme used for
//! comparison runs.

use std::sync::Arc;

use crate::analysis::l2_norm_sq;
use crate::bounds::{is_admissible, split, BoundSpec};
use crate::error::{Error, Result};
use crate::fe_space::{interpolate, FeFunction, FeSpace};
use crate::forms::{assemble_load, rhs_fn, AssembledForms};
use crate::linalg::{CsrMatrix, LuFactorization};
use crate::mesh::{compute_mesh_function, MeshFunction};
use crate::problems::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Nonlinear scheme with nodal projection and diagonal stabilization.
    BoundPreserving,
    /// Plain stabilized Galerkin scheme; no projection, no nodal
    /// stabilization.
    CipOnly,
}

/// Weight applied to the diagonal stabilization inside the per-step system.
/// `Dt` scales it by the time step (the form the well-posedness theory
/// uses); `One` keeps the unscaled variant for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabDtFactor {
    Dt,
    One,
}

#[derive(Debug, Clone)]
pub struct SchemeConfig {
    /// Time-integration weight in [1/2, 1] (1 = implicit Euler, 1/2 =
    /// Crank-Nicolson).
    pub theta: f64,
    pub dt: f64,
    pub t_final: f64,
    /// CIP penalty weight.
    pub gamma: f64,
    /// Nodal stabilization weight.
    pub alpha: f64,
    /// Damping of the fixed-point iteration, in (0, 1].
    pub omega: f64,
    /// Stopping threshold on the L² norm of the iteration increment.
    pub tol: f64,
    pub max_iter: usize,
    pub scheme: Scheme,
    pub stab_dt_factor: StabDtFactor,
}

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 500;

impl SchemeConfig {
    pub fn bound_preserving(theta: f64, dt: f64, t_final: f64) -> Self {
        SchemeConfig {
            theta,
            dt,
            t_final,
            gamma: 0.05,
            alpha: 1.0,
            omega: 0.1,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            scheme: Scheme::BoundPreserving,
            stab_dt_factor: StabDtFactor::Dt,
        }
    }

    pub fn cip_only(theta: f64, dt: f64, t_final: f64) -> Self {
        SchemeConfig {
            scheme: Scheme::CipOnly,
            ..Self::bound_preserving(theta, dt, t_final)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(Error::invalid(format!("theta = {} must lie in [1/2, 1]", self.theta)));
        }
        if self.dt <= 0.0 || self.t_final <= 0.0 {
            return Err(Error::invalid("dt and T must be positive"));
        }
        let ratio = self.t_final / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
            return Err(Error::invalid(format!(
                "T/dt = {ratio} must be a positive integer (uniform steps)"
            )));
        }
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return Err(Error::invalid(format!("omega = {} must lie in (0, 1]", self.omega)));
        }
        if self.gamma < 0.0 || self.alpha < 0.0 {
            return Err(Error::invalid("gamma and alpha must be nonnegative"));
        }
        if self.tol <= 0.0 {
            return Err(Error::invalid("tol must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be positive"));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// Per-step solver diagnostics.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub step: usize,
    /// Linear solves performed by the fixed-point iteration (0 for the
    /// linear scheme).
    pub iterations: usize,
    /// Final L² norm of the iteration increment.
    pub residual: f64,
    /// Whether the reported constrained part passes the nodal bound check.
    pub admissible: bool,
    pub l2_norm_plus: f64,
}

/// State handed to observers after every step (including step 0).
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    /// The scheme's raw state u_h^n.
    pub u: FeFunction,
    /// The reported approximation: the constrained part for the
    /// bound-preserving scheme, the raw state for the linear scheme.
    pub u_plus: FeFunction,
    pub report: StepReport,
}

pub trait Observer {
    fn observe(&mut self, snapshot: &Snapshot) -> Result<()>;
}

impl<F> Observer for F
where
    F: FnMut(&Snapshot) -> Result<()>,
{
    fn observe(&mut self, snapshot: &Snapshot) -> Result<()> {
        self(snapshot)
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub reports: Vec<StepReport>,
    pub final_u: FeFunction,
    pub final_u_plus: FeFunction,
}

impl RunResult {
    pub fn mean_iterations(&self) -> f64 {
        let steps: Vec<_> = self.reports.iter().filter(|r| r.step > 0).collect();
        if steps.is_empty() {
            return 0.0;
        }
        steps.iter().map(|r| r.iterations as f64).sum::<f64>() / steps.len() as f64
    }
}

struct OperatorCache {
    time: f64,
    full: Arc<CsrMatrix>,
    factorization: Arc<LuFactorization>,
}

/// Driver for one run: owns the assembled forms and reuses the implicit
/// operator factorization across iterations and, for autonomous velocity
/// fields, across steps.
pub struct ThetaScheme {
    pub space: Arc<FeSpace>,
    pub problem: ProblemSpec,
    pub cfg: SchemeConfig,
    hfun: MeshFunction,
    interior: Vec<usize>,
    forms_cache: Vec<(f64, Arc<AssembledForms>)>,
    op_cache: Option<OperatorCache>,
}

impl ThetaScheme {
    pub fn new(space: Arc<FeSpace>, problem: ProblemSpec, cfg: SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        let hfun = compute_mesh_function(&space.mesh);
        let interior = space.interior_dofs();
        if interior.is_empty() {
            return Err(Error::invalid("space has no interior degrees of freedom"));
        }
        Ok(ThetaScheme {
            space,
            problem,
            cfg,
            hfun,
            interior,
            forms_cache: Vec::new(),
            op_cache: None,
        })
    }

    /// Assembled forms at a time level; a single assembly serves every level
    /// when β does not depend on time.
    pub fn forms_at(&mut self, t: f64) -> Result<Arc<AssembledForms>> {
        let key = if self.problem.beta_time_dependent { t } else { 0.0 };
        if let Some((_, f)) = self.forms_cache.iter().find(|(k, _)| *k == key) {
            return Ok(f.clone());
        }
        let beta = self.problem.beta.clone();
        let forms = AssembledForms::assemble(
            &self.space,
            &self.hfun,
            self.problem.eps,
            self.problem.mu,
            self.cfg.gamma,
            self.cfg.alpha,
            |x, y, tt| beta(x, y, tt),
            key,
            self.cfg.dt,
        )?;
        let forms = Arc::new(forms);
        self.forms_cache.push((key, forms.clone()));
        if self.forms_cache.len() > 2 {
            self.forms_cache.remove(0);
        }
        Ok(forms)
    }

    fn operator_at(&mut self, t: f64) -> Result<(Arc<CsrMatrix>, Arc<LuFactorization>)> {
        let key = if self.problem.beta_time_dependent { t } else { 0.0 };
        let stale = match &self.op_cache {
            Some(c) => c.time != key,
            None => true,
        };
        if stale {
            let forms = self.forms_at(t)?;
            let full = forms.implicit_operator(self.cfg.theta, self.cfg.dt);
            let factorization = LuFactorization::new(&full.restrict(&self.interior))?;
            self.op_cache = Some(OperatorCache {
                time: key,
                full: Arc::new(full),
                factorization: Arc::new(factorization),
            });
        }
        let cache = self.op_cache.as_ref().unwrap();
        Ok((cache.full.clone(), cache.factorization.clone()))
    }

    fn gather_interior(&self, full: &[f64]) -> Vec<f64> {
        self.interior.iter().map(|&i| full[i]).collect()
    }

    /// One step of the bound-preserving scheme by damped fixed-point
    /// iteration, starting from the previous state.
    pub fn step_bp(
        &mut self,
        u_prev: &FeFunction,
        bounds: &BoundSpec,
        step: usize,
        t_n: f64,
    ) -> Result<(FeFunction, StepReport)> {
        let dt = self.cfg.dt;
        let theta = self.cfg.theta;
        let omega = self.cfg.omega;
        let t_prev = t_n - dt;
        let t_theta = theta * t_n + (1.0 - theta) * t_prev;

        let forms_prev = self.forms_at(t_prev)?;
        let forms_n = self.forms_at(t_n)?;
        let u_prev_plus = split(u_prev, bounds, t_prev).plus;
        let f = self.problem.f.clone();
        let rhs_full = rhs_fn(&forms_prev, |x, y, t| f(x, y, t), theta, dt, t_theta, &u_prev_plus)?;

        let s_factor = match self.cfg.stab_dt_factor {
            StabDtFactor::Dt => dt,
            StabDtFactor::One => 1.0,
        };
        let s_diag: Vec<f64> = forms_n.s_diag.iter().map(|d| d * s_factor).collect();
        // boundary coefficients stay fixed, so the increment norm only needs
        // the interior block of the mass matrix
        let mass_int = forms_n.mass.restrict(&self.interior);
        let tol = self.cfg.tol;
        let max_iter = self.cfg.max_iter;
        let (a_full, fact) = self.operator_at(t_n)?;

        let mut u_tilde = u_prev.clone();
        let mut iterations = 0usize;
        let mut last_diff = f64::INFINITY;
        loop {
            let parts = split(&u_tilde, bounds, t_n);
            let ap = a_full.matvec(&parts.plus.coeffs);
            let mut r_inf: f64 = 0.0;
            let r_int: Vec<f64> = self
                .interior
                .iter()
                .map(|&i| {
                    let r = rhs_full[i] - ap[i] - s_diag[i] * parts.minus.coeffs[i];
                    r_inf = r_inf.max(r.abs());
                    r
                })
                .collect();
            if last_diff <= tol && r_inf <= 100.0 * tol {
                break;
            }
            if iterations >= max_iter {
                return Err(Error::NonConvergence {
                    max_iter,
                    residual: last_diff,
                });
            }
            let mut delta = fact.solve(&r_int)?;
            for d in delta.iter_mut() {
                *d *= omega;
            }
            for (k, &i) in self.interior.iter().enumerate() {
                u_tilde.coeffs[i] += delta[k];
            }
            last_diff = mass_int.quadratic_form(&delta, &delta).max(0.0).sqrt();
            iterations += 1;
        }

        let u_plus = split(&u_tilde, bounds, t_n).plus;
        let report = StepReport {
            step,
            iterations,
            residual: if last_diff.is_finite() { last_diff } else { 0.0 },
            admissible: is_admissible(&u_plus, bounds, t_n),
            l2_norm_plus: l2_norm_sq(&u_plus).max(0.0).sqrt(),
        };
        Ok((u_tilde, report))
    }

    /// One step of the linear stabilized θ-scheme.
    pub fn step_cip(&mut self, u_prev: &FeFunction, t_n: f64) -> Result<FeFunction> {
        let dt = self.cfg.dt;
        let theta = self.cfg.theta;
        let t_prev = t_n - dt;
        let t_theta = theta * t_n + (1.0 - theta) * t_prev;

        let forms_prev = self.forms_at(t_prev)?;
        let explicit = forms_prev.explicit_operator(theta, dt).matvec(&u_prev.coeffs);
        let f = self.problem.f.clone();
        let load = assemble_load(self.space.as_ref(), |x, y, t| f(x, y, t), t_theta);
        let rhs_full: Vec<f64> = explicit
            .iter()
            .zip(load.iter())
            .map(|(&e, &l)| e + dt * l)
            .collect();
        let rhs_int = self.gather_interior(&rhs_full);
        let (_, fact) = self.operator_at(t_n)?;
        let x = fact.solve(&rhs_int)?;
        let mut coeffs = vec![0.0; u_prev.coeffs.len()];
        for (k, &i) in self.interior.iter().enumerate() {
            coeffs[i] = x[k];
        }
        Ok(FeFunction::new(self.space.clone(), coeffs))
    }

    /// Advance from the interpolated initial state to the final time,
    /// invoking every observer after each step (step 0 included).
    pub fn run(&mut self, observers: &mut [&mut dyn Observer]) -> Result<RunResult> {
        let n_steps = self.cfg.n_steps();
        let bounds = self.problem.bounds.clone();
        let u0_field = self.problem.u0.clone();
        let mut u = interpolate(&self.space, |x, y, t| u0_field(x, y, t), 0.0);

        let mut reports = Vec::with_capacity(n_steps + 1);
        let emit = |snapshot: &Snapshot, observers: &mut [&mut dyn Observer]| -> Result<()> {
            for obs in observers.iter_mut() {
                obs.observe(snapshot)?;
            }
            Ok(())
        };

        let initial_plus = match self.cfg.scheme {
            Scheme::BoundPreserving => split(&u, &bounds, 0.0).plus,
            Scheme::CipOnly => u.clone(),
        };
        let report0 = StepReport {
            step: 0,
            iterations: 0,
            residual: 0.0,
            admissible: is_admissible(&initial_plus, &bounds, 0.0),
            l2_norm_plus: l2_norm_sq(&initial_plus).max(0.0).sqrt(),
        };
        reports.push(report0.clone());
        emit(
            &Snapshot {
                step: 0,
                time: 0.0,
                u: u.clone(),
                u_plus: initial_plus,
                report: report0,
            },
            observers,
        )?;

        for n in 1..=n_steps {
            let t_n = self.cfg.dt * n as f64;
            let (next, report) = match self.cfg.scheme {
                Scheme::BoundPreserving => self
                    .step_bp(&u, &bounds, n, t_n)
                    .map_err(|e| Error::StepFailed { step: n, source: Box::new(e) })?,
                Scheme::CipOnly => {
                    let next = self
                        .step_cip(&u, t_n)
                        .map_err(|e| Error::StepFailed { step: n, source: Box::new(e) })?;
                    let report = StepReport {
                        step: n,
                        iterations: 0,
                        residual: 0.0,
                        admissible: is_admissible(&next, &bounds, t_n),
                        l2_norm_plus: l2_norm_sq(&next).max(0.0).sqrt(),
                    };
                    (next, report)
                }
            };
            u = next;
            let u_plus = match self.cfg.scheme {
                Scheme::BoundPreserving => split(&u, &bounds, t_n).plus,
                Scheme::CipOnly => u.clone(),
            };
            reports.push(report.clone());
            emit(
                &Snapshot {
                    step: n,
                    time: t_n,
                    u: u.clone(),
                    u_plus,
                    report,
                },
                observers,
            )?;
        }

        let final_u_plus = match self.cfg.scheme {
            Scheme::BoundPreserving => split(&u, &bounds, self.cfg.t_final).plus,
            Scheme::CipOnly => u.clone(),
        };
        Ok(RunResult {
            reports,
            final_u: u,
            final_u_plus,
        })
    }
}

/// Convenience wrapper: build the driver and run with observers.
pub fn run(
    space: Arc<FeSpace>,
    problem: ProblemSpec,
    cfg: SchemeConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<RunResult> {
    ThetaScheme::new(space, problem, cfg)?.run(observers)
}
