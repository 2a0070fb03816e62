//! Assembly of every bilinear and linear form the scheme needs: mass,
//! stiffness, convection, the gradient-jump penalty on interior facets, the
//! diagonal nodal stabilization, the lumped inner product, and the per-step
//! right-hand side functional.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fe_space::{eval_basis, gauss_legendre_01, quadrature, FeFunction, FeSpace};
use crate::linalg::CsrMatrix;
use crate::mesh::{MeshFunction, Point};

/// Per-point basis data for one quadrature rule (reference cell).
struct BasisTable {
    phys_points: Vec<Vec<Point>>,
    vals: Vec<Vec<f64>>,
    ref_grads: Vec<Vec<[f64; 2]>>,
}

fn basis_table(space: &FeSpace, rule_points: &[Point]) -> BasisTable {
    let mut vals = Vec::with_capacity(rule_points.len());
    let mut ref_grads = Vec::with_capacity(rule_points.len());
    for &q in rule_points {
        let (v, g) = eval_basis(space.kind, q);
        vals.push(v);
        ref_grads.push(g);
    }
    let mut phys_points = Vec::with_capacity(space.mesh.n_cells());
    for c in 0..space.mesh.n_cells() {
        let geo = space.geometry(c);
        phys_points.push(rule_points.iter().map(|&q| geo.to_physical(q)).collect());
    }
    BasisTable {
        phys_points,
        vals,
        ref_grads,
    }
}

fn mass_order(space: &FeSpace) -> usize {
    2 * space.kind.degree()
}

fn stiffness_order(space: &FeSpace) -> usize {
    (2 * space.kind.degree()).saturating_sub(2).max(2)
}

/// Order 2k keeps the convection matrix exact for affine velocity fields,
/// which the skew-symmetry identity for solenoidal fields relies on.
fn convection_order(space: &FeSpace) -> usize {
    (2 * space.kind.degree()).max(2)
}

fn load_order(space: &FeSpace) -> usize {
    2 * space.kind.degree() + 2
}

/// The Galerkin matrices: mass (w, v), stiffness (∇w, ∇v), and convection
/// ((β·∇w), v) at time `t`. All are assembled over every degree of freedom;
/// boundary conditions are applied by restriction at solve time.
#[derive(Debug, Clone)]
pub struct GalerkinMatrices {
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
    pub convection: CsrMatrix,
}

pub fn assemble_galerkin<B>(
    space: &FeSpace,
    eps: f64,
    mu: f64,
    beta: B,
    t: f64,
) -> GalerkinMatrices
where
    B: Fn(f64, f64, f64) -> [f64; 2],
{
    assert!(eps >= 0.0 && mu >= 0.0, "coefficients must be nonnegative");
    let n = space.n_dofs();
    let nloc = space.kind.dofs_per_cell();

    let cell_kind = space.kind.cell_kind();
    let rule_m = quadrature(cell_kind, mass_order(space)).expect("builtin order");
    let rule_k = quadrature(cell_kind, stiffness_order(space)).expect("builtin order");
    let rule_c = quadrature(cell_kind, convection_order(space)).expect("builtin order");
    let tab_m = basis_table(space, &rule_m.points);
    let tab_k = basis_table(space, &rule_k.points);
    let tab_c = basis_table(space, &rule_c.points);

    let mut trip_m = Vec::new();
    let mut trip_k = Vec::new();
    let mut trip_c = Vec::new();

    for c in 0..space.mesh.n_cells() {
        let geo = space.geometry(c);
        let dofs = &space.cell_dofs[c];
        let mut local_m = vec![0.0; nloc * nloc];
        let mut local_k = vec![0.0; nloc * nloc];
        let mut local_c = vec![0.0; nloc * nloc];

        for (q, &w) in rule_m.weights.iter().enumerate() {
            let vals = &tab_m.vals[q];
            let scale = w * geo.det;
            for a in 0..nloc {
                for b in 0..nloc {
                    local_m[a * nloc + b] += scale * vals[a] * vals[b];
                }
            }
        }
        for (q, &w) in rule_k.weights.iter().enumerate() {
            let grads: Vec<[f64; 2]> = tab_k.ref_grads[q]
                .iter()
                .map(|&g| geo.grad_to_physical(g))
                .collect();
            let scale = w * geo.det;
            for a in 0..nloc {
                for b in 0..nloc {
                    local_k[a * nloc + b] +=
                        scale * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                }
            }
        }
        for (q, &w) in rule_c.weights.iter().enumerate() {
            let vals = &tab_c.vals[q];
            let grads: Vec<[f64; 2]> = tab_c.ref_grads[q]
                .iter()
                .map(|&g| geo.grad_to_physical(g))
                .collect();
            let p = tab_c.phys_points[c][q];
            let b_val = beta(p[0], p[1], t);
            let scale = w * geo.det;
            for a in 0..nloc {
                for b in 0..nloc {
                    local_c[a * nloc + b] +=
                        scale * (b_val[0] * grads[b][0] + b_val[1] * grads[b][1]) * vals[a];
                }
            }
        }
        for a in 0..nloc {
            for b in 0..nloc {
                trip_m.push((dofs[a], dofs[b], local_m[a * nloc + b]));
                trip_k.push((dofs[a], dofs[b], local_k[a * nloc + b]));
                trip_c.push((dofs[a], dofs[b], local_c[a * nloc + b]));
            }
        }
    }

    GalerkinMatrices {
        mass: CsrMatrix::from_triplets(n, n, &trip_m),
        stiffness: CsrMatrix::from_triplets(n, n, &trip_k),
        convection: CsrMatrix::from_triplets(n, n, &trip_c),
    }
}

/// Gradient-jump penalty over interior facets at time `t`:
/// entry (i, j) = γ Σ_F max_F|β| h_F² ∫_F ⟦∇φ_j⟧·⟦∇φ_i⟧ ds.
pub fn assemble_cip<B>(space: &FeSpace, gamma: f64, beta: B, t: f64) -> CsrMatrix
where
    B: Fn(f64, f64, f64) -> [f64; 2],
{
    let n = space.n_dofs();
    if gamma == 0.0 {
        return CsrMatrix::zeros(n, n);
    }
    let degree = space.kind.degree();
    let m1d = degree + 1; // exact to degree 2k on the facet
    let (nodes, weights) = gauss_legendre_01(m1d);

    let mesh = &space.mesh;
    let mut triplets = Vec::new();
    for (f, facet) in mesh.interior_facets() {
        let c1 = facet.cells.0;
        let c2 = facet.cells.1.expect("interior facet");
        let pa = mesh.vertices[facet.vertices[0]];
        let pb = mesh.vertices[facet.vertices[1]];
        let len = mesh.facet_diameter[f];
        let h_f = len;

        // union of the two cells' dofs
        let mut dofs: Vec<usize> = space.cell_dofs[c1].clone();
        for &d in &space.cell_dofs[c2] {
            if !dofs.contains(&d) {
                dofs.push(d);
            }
        }
        let nu = dofs.len();
        let mut local = vec![0.0; nu * nu];
        let mut beta_max: f64 = 0.0;
        for endpoint in [pa, pb] {
            let b = beta(endpoint[0], endpoint[1], t);
            beta_max = beta_max.max((b[0] * b[0] + b[1] * b[1]).sqrt());
        }

        for (&s, &w) in nodes.iter().zip(weights.iter()) {
            let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            let b = beta(x[0], x[1], t);
            beta_max = beta_max.max((b[0] * b[0] + b[1] * b[1]).sqrt());

            // per-side physical gradients of every union dof
            let mut jumps = vec![[0.0f64; 2]; nu];
            for (cell, sign) in [(c1, 1.0), (c2, -1.0)] {
                let geo = space.geometry(cell);
                let r = geo.to_reference(x);
                let (_, ref_grads) = eval_basis(space.kind, r);
                for (local_idx, &d) in space.cell_dofs[cell].iter().enumerate() {
                    let g = geo.grad_to_physical(ref_grads[local_idx]);
                    let u = dofs.iter().position(|&dd| dd == d).unwrap();
                    jumps[u][0] += sign * g[0];
                    jumps[u][1] += sign * g[1];
                }
            }
            for a in 0..nu {
                for b_idx in 0..nu {
                    local[a * nu + b_idx] +=
                        w * len * (jumps[a][0] * jumps[b_idx][0] + jumps[a][1] * jumps[b_idx][1]);
                }
            }
        }

        let factor = gamma * beta_max * h_f * h_f;
        for a in 0..nu {
            for b_idx in 0..nu {
                triplets.push((dofs[a], dofs[b_idx], factor * local[a * nu + b_idx]));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &triplets)
}

/// Per-dof weights of the diagonal stabilization (d = 2):
/// d_i = α [ ε + max_{ω_i}|β(·, t_n)| ℏ_i + (1/Δt + μ) ℏ_i² ],
/// where ω_i is the support patch of basis function i and the supremum is
/// approximated over the patch quadrature points and the dof coordinate.
pub fn assemble_stab_diag<B>(
    space: &FeSpace,
    hfun: &MeshFunction,
    alpha: f64,
    eps: f64,
    mu: f64,
    beta: B,
    t_n: f64,
    dt: f64,
) -> Result<Vec<f64>>
where
    B: Fn(f64, f64, f64) -> [f64; 2],
{
    if dt <= 0.0 {
        return Err(Error::invalid(format!("time step {dt} must be positive")));
    }
    let h_at_dof = space.dof_mesh_function(hfun);
    let rule = quadrature(space.kind.cell_kind(), convection_order(space)).expect("builtin order");
    let mag = |p: Point| -> f64 {
        let b = beta(p[0], p[1], t_n);
        (b[0] * b[0] + b[1] * b[1]).sqrt()
    };

    let mut out = Vec::with_capacity(space.n_dofs());
    for i in 0..space.n_dofs() {
        let mut beta_max = mag(space.dof_coords[i]);
        for &c in &space.dof_cells[i] {
            let geo = space.geometry(c);
            for &q in &rule.points {
                beta_max = beta_max.max(mag(geo.to_physical(q)));
            }
        }
        let h = h_at_dof[i];
        out.push(alpha * (eps + beta_max * h + (1.0 / dt + mu) * h * h));
    }
    Ok(out)
}

/// Per-dof weights ℏ(x_i)² of the lumped inner product.
pub fn lumped_weights(space: &FeSpace, hfun: &MeshFunction) -> Vec<f64> {
    space
        .dof_mesh_function(hfun)
        .into_iter()
        .map(|h| h * h)
        .collect()
}

/// Mass-lumped inner product Σ_i ℏ(x_i)² u(x_i) v(x_i) over all dofs.
pub fn lumped_inner(u: &FeFunction, v: &FeFunction, hfun: &MeshFunction) -> Result<f64> {
    if !Arc::ptr_eq(&u.space, &v.space) {
        return Err(Error::invalid("lumped inner product needs functions on the same space"));
    }
    let w = lumped_weights(&u.space, hfun);
    Ok(w
        .iter()
        .zip(u.coeffs.iter().zip(v.coeffs.iter()))
        .map(|(&wi, (&ui, &vi))| wi * ui * vi)
        .sum())
}

/// Load vector (f(·, t), φ_i) over all dofs.
pub fn assemble_load<F>(space: &FeSpace, f: F, t: f64) -> Vec<f64>
where
    F: Fn(f64, f64, f64) -> f64,
{
    let rule = quadrature(space.kind.cell_kind(), load_order(space)).expect("builtin order");
    let tab = basis_table(space, &rule.points);
    let mut b = vec![0.0; space.n_dofs()];
    for c in 0..space.mesh.n_cells() {
        let geo = space.geometry(c);
        let dofs = &space.cell_dofs[c];
        for (q, &w) in rule.weights.iter().enumerate() {
            let p = tab.phys_points[c][q];
            let fv = f(p[0], p[1], t);
            if fv == 0.0 {
                continue;
            }
            let scale = w * geo.det * fv;
            for (a, &d) in dofs.iter().enumerate() {
                b[d] += scale * tab.vals[q][a];
            }
        }
    }
    b
}

/// Everything assembled at one time level.
#[derive(Debug, Clone)]
pub struct AssembledForms {
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
    /// Convection at the level time.
    pub convection: CsrMatrix,
    /// Gradient-jump penalty at the level time, γ included.
    pub cip: CsrMatrix,
    /// Diagonal stabilization weights d_i at the level time.
    pub s_diag: Vec<f64>,
    /// Lumped inner-product weights ℏ(x_i)².
    pub lumped_diag: Vec<f64>,
    pub eps: f64,
    pub mu: f64,
    /// Level time the convection/CIP/stabilization were assembled at.
    pub time: f64,
}

impl AssembledForms {
    #[allow(clippy::too_many_arguments)]
    pub fn assemble<B>(
        space: &FeSpace,
        hfun: &MeshFunction,
        eps: f64,
        mu: f64,
        gamma: f64,
        alpha: f64,
        beta: B,
        t: f64,
        dt: f64,
    ) -> Result<AssembledForms>
    where
        B: Fn(f64, f64, f64) -> [f64; 2] + Copy,
    {
        let g = assemble_galerkin(space, eps, mu, beta, t);
        let cip = assemble_cip(space, gamma, beta, t);
        let s_diag = assemble_stab_diag(space, hfun, alpha, eps, mu, beta, t, dt)?;
        Ok(AssembledForms {
            mass: g.mass,
            stiffness: g.stiffness,
            convection: g.convection,
            cip,
            s_diag,
            lumped_diag: lumped_weights(space, hfun),
            eps,
            mu,
            time: t,
        })
    }

    /// The implicit operator M + Δtθ(εK + C + μM + J).
    pub fn implicit_operator(&self, theta: f64, dt: f64) -> CsrMatrix {
        CsrMatrix::linear_combination(&[
            (1.0 + dt * theta * self.mu, &self.mass),
            (dt * theta * self.eps, &self.stiffness),
            (dt * theta, &self.convection),
            (dt * theta, &self.cip),
        ])
    }

    /// The explicit operator M - Δt(1-θ)(εK + C + μM + J).
    pub fn explicit_operator(&self, theta: f64, dt: f64) -> CsrMatrix {
        let c = dt * (1.0 - theta);
        CsrMatrix::linear_combination(&[
            (1.0 - c * self.mu, &self.mass),
            (-c * self.eps, &self.stiffness),
            (-c, &self.convection),
            (-c, &self.cip),
        ])
    }
}

/// Right-hand side functional of the per-step problem, assembled against
/// every basis function:
/// F(v) = Δt (f(·, t_θ), v) - Δt(1-θ)[ε(∇u⁺, ∇v) + (β·∇u⁺, v) + J(u⁺, v)]
///        - (μΔt(1-θ) - 1)(u⁺, v),
/// with u⁺ the constrained part carried over from the previous step and the
/// convection/CIP matrices of `forms` taken at the previous level time.
pub fn rhs_fn<F>(
    forms: &AssembledForms,
    f: F,
    theta: f64,
    dt: f64,
    t_theta: f64,
    u_prev_plus: &FeFunction,
) -> Result<Vec<f64>>
where
    F: Fn(f64, f64, f64) -> f64,
{
    if !(0.5..=1.0).contains(&theta) {
        return Err(Error::invalid(format!("theta = {theta} must lie in [1/2, 1]")));
    }
    if dt <= 0.0 {
        return Err(Error::invalid(format!("time step {dt} must be positive")));
    }
    let space = &u_prev_plus.space;
    let load = assemble_load(space.as_ref(), f, t_theta);
    let p = &u_prev_plus.coeffs;
    let explicit = forms.explicit_operator(theta, dt).matvec(p);
    Ok(load
        .iter()
        .zip(explicit.iter())
        .map(|(&l, &e)| dt * l + e)
        .collect())
}
