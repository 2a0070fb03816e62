//! Error norms, convergence rates, cross-sections, mass tracking, and the
//! per-run stability bookkeeping used by the benchmark harness.

use crate::error::{Error, Result};
use crate::fe_space::{eval_basis, evaluate, quadrature, FeFunction};
use crate::linalg::CsrMatrix;

/// ‖u_h - g(·, t)‖_{L²(Ω)} by cellwise quadrature of order 2k + 2.
pub fn l2_error<G>(u: &FeFunction, g: G, t: f64) -> f64
where
    G: Fn(f64, f64, f64) -> f64,
{
    l2_error_with_order(u, g, t, 2 * u.space.kind.degree() + 2)
}

/// Same as [`l2_error`] with an explicit quadrature order.
pub fn l2_error_with_order<G>(u: &FeFunction, g: G, t: f64, order: usize) -> f64
where
    G: Fn(f64, f64, f64) -> f64,
{
    let space = &u.space;
    let rule = quadrature(space.kind.cell_kind(), order).expect("valid quadrature order");
    let mut acc = 0.0;
    for c in 0..space.mesh.n_cells() {
        let geo = space.geometry(c);
        let dofs = &space.cell_dofs[c];
        for (&q, &w) in rule.points.iter().zip(rule.weights.iter()) {
            let (vals, _) = eval_basis(space.kind, q);
            let uh: f64 = dofs.iter().zip(vals.iter()).map(|(&d, &v)| u.coeffs[d] * v).sum();
            let p = geo.to_physical(q);
            acc += w * geo.det * (uh - g(p[0], p[1], t)).powi(2);
        }
    }
    acc.sqrt()
}

/// ‖u‖²_{L²} of a finite element function by direct quadrature.
pub fn l2_norm_sq(u: &FeFunction) -> f64 {
    let space = &u.space;
    let rule = quadrature(space.kind.cell_kind(), 2 * space.kind.degree()).expect("builtin order");
    let mut acc = 0.0;
    for c in 0..space.mesh.n_cells() {
        let geo = space.geometry(c);
        let dofs = &space.cell_dofs[c];
        for (&q, &w) in rule.points.iter().zip(rule.weights.iter()) {
            let (vals, _) = eval_basis(space.kind, q);
            let uh: f64 = dofs.iter().zip(vals.iter()).map(|(&d, &v)| u.coeffs[d] * v).sum();
            acc += w * geo.det * uh * uh;
        }
    }
    acc
}

/// |u|²_{H¹} of a finite element function by direct quadrature.
pub fn h1_seminorm_sq(u: &FeFunction) -> f64 {
    let space = &u.space;
    let order = (2 * space.kind.degree()).saturating_sub(2).max(1);
    let rule = quadrature(space.kind.cell_kind(), order).expect("builtin order");
    let mut acc = 0.0;
    for c in 0..space.mesh.n_cells() {
        let geo = space.geometry(c);
        let dofs = &space.cell_dofs[c];
        for (&q, &w) in rule.points.iter().zip(rule.weights.iter()) {
            let (_, ref_grads) = eval_basis(space.kind, q);
            let mut g = [0.0f64; 2];
            for (&d, &rg) in dofs.iter().zip(ref_grads.iter()) {
                let pg = geo.grad_to_physical(rg);
                g[0] += u.coeffs[d] * pg[0];
                g[1] += u.coeffs[d] * pg[1];
            }
            acc += w * geo.det * (g[0] * g[0] + g[1] * g[1]);
        }
    }
    acc
}

/// ∫_Ω u dx of a finite element function.
pub fn mass(u: &FeFunction) -> f64 {
    let space = &u.space;
    let rule = quadrature(space.kind.cell_kind(), space.kind.degree().max(1)).expect("builtin");
    let mut acc = 0.0;
    for c in 0..space.mesh.n_cells() {
        let geo = space.geometry(c);
        let dofs = &space.cell_dofs[c];
        for (&q, &w) in rule.points.iter().zip(rule.weights.iter()) {
            let (vals, _) = eval_basis(space.kind, q);
            let uh: f64 = dofs.iter().zip(vals.iter()).map(|(&d, &v)| u.coeffs[d] * v).sum();
            acc += w * geo.det * uh;
        }
    }
    acc
}

/// Ratio of the current mass to a reference mass.
pub fn relative_mass(u: &FeFunction, m0: f64) -> Result<f64> {
    if m0 == 0.0 {
        return Err(Error::invalid("reference mass must be nonzero"));
    }
    Ok(mass(u) / m0)
}

/// Running accumulator for the time-integrated energy error
/// Σ_n Δt (ε|e^n|₁² + μ‖e^n‖² + J(e^n, e^n)) plus the final-time L² error.
#[derive(Debug, Clone, Default)]
pub struct ErrorAccumulator {
    pub energy_sum: f64,
    pub final_l2: f64,
    pub records: Vec<(usize, f64)>,
}

impl ErrorAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Combined norm: final L² error and time-integrated energy terms.
    pub fn combined_norm(&self) -> f64 {
        (self.final_l2 * self.final_l2 + self.energy_sum).sqrt()
    }
}

/// Add the step-n contribution Δt(ε|e|₁² + μ‖e‖² + eᵀJe) for a finite
/// element error field `e_h`.
pub fn accumulate_energy_error(
    acc: &mut ErrorAccumulator,
    step: usize,
    e_h: &FeFunction,
    eps: f64,
    mu: f64,
    dt: f64,
    jmat: &CsrMatrix,
) {
    let grad = if eps > 0.0 { h1_seminorm_sq(e_h) } else { 0.0 };
    let l2 = if mu > 0.0 { l2_norm_sq(e_h) } else { 0.0 };
    let jq = jmat.quadratic_form(&e_h.coeffs, &e_h.coeffs);
    let term = dt * (eps * grad + mu * l2 + jq);
    acc.energy_sum += term;
    acc.records.push((step, term));
}

/// Least-squares slope of log(error) against log(parameter).
pub fn convergence_slope(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::invalid("convergence slope needs at least two points"));
    }
    if pairs.iter().any(|&(h, e)| h <= 0.0 || e <= 0.0) {
        return Err(Error::invalid("convergence slope needs positive parameters and errors"));
    }
    let logs: Vec<(f64, f64)> = pairs.iter().map(|&(h, e)| (h.ln(), e.ln())).collect();
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return Err(Error::invalid("convergence slope is degenerate: repeated parameter values"));
    }
    Ok((n * sxy - sx * sy) / denom)
}

/// Values of `u` at `npoints` equidistant x in [0, 1] along the line y = const.
pub fn cross_section(u: &FeFunction, y: f64, npoints: usize) -> Result<Vec<(f64, f64)>> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::invalid(format!("cross-section height {y} outside [0, 1]")));
    }
    if npoints < 2 {
        return Err(Error::invalid("cross-section needs at least two points"));
    }
    let xs: Vec<f64> = (0..npoints)
        .map(|i| i as f64 / (npoints - 1) as f64)
        .collect();
    let pts: Vec<[f64; 2]> = xs.iter().map(|&x| [x, y]).collect();
    let vals = evaluate(u, &pts)?;
    Ok(xs.into_iter().zip(vals).collect())
}

/// Tracks both sides of the discrete stability estimate
/// max_m ‖(u^m)⁺‖² + 2Δt Σ_n (ε|(u^n)⁺|₁² + μ‖(u^n)⁺‖² + J) ≤
/// e² (‖u⁰_h‖² + Δt T Σ_n ‖f^n‖²)
/// as a run progresses.
#[derive(Debug, Clone)]
pub struct StabilityTracker {
    dt: f64,
    t_final: f64,
    u0_norm_sq: f64,
    max_plus_norm_sq: f64,
    dissipation_sum: f64,
    source_sum: f64,
    pub worst_margin: f64,
}

impl StabilityTracker {
    pub fn new(dt: f64, t_final: f64, u0_norm_sq: f64) -> Self {
        StabilityTracker {
            dt,
            t_final,
            u0_norm_sq,
            max_plus_norm_sq: 0.0,
            dissipation_sum: 0.0,
            source_sum: 0.0,
            worst_margin: f64::INFINITY,
        }
    }

    /// Record one step; returns (lhs, rhs) of the estimate after this step.
    pub fn push_step(
        &mut self,
        plus_norm_sq: f64,
        eps_h1_sq: f64,
        mu_l2_sq: f64,
        j_quad: f64,
        f_norm_sq: f64,
    ) -> (f64, f64) {
        self.max_plus_norm_sq = self.max_plus_norm_sq.max(plus_norm_sq);
        self.dissipation_sum += 2.0 * self.dt * (eps_h1_sq + mu_l2_sq + j_quad);
        self.source_sum += f_norm_sq;
        let lhs = self.max_plus_norm_sq + self.dissipation_sum;
        let e_sq = std::f64::consts::E * std::f64::consts::E;
        let rhs = e_sq * (self.u0_norm_sq + self.dt * self.t_final * self.source_sum);
        let margin = rhs - lhs;
        if margin < self.worst_margin {
            self.worst_margin = margin;
        }
        (lhs, rhs)
    }

    pub fn holds(&self) -> bool {
        self.worst_margin >= 0.0
    }
}
