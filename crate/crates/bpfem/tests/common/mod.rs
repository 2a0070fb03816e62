//! Shared oracle machinery for the integration test suites: brute-force
//! dense assembly with independently re-derived basis formulas, and dense
//! linear solves through nalgebra.

use std::sync::Arc;

use bpfem::fe_space::{build_space, quadrature, ElementKind, FeSpace};
use bpfem::linalg::CsrMatrix;
use bpfem::mesh::{
    build_structured_quadrilateral, build_structured_triangular, CellKind, Mesh, TriangularVariant,
};

pub fn tri_space(n: usize, kind: ElementKind) -> Arc<FeSpace> {
    let mesh = Arc::new(build_structured_triangular(n, TriangularVariant::Delaunay).unwrap());
    Arc::new(build_space(mesh, kind).unwrap())
}

pub fn quad_space(n: usize) -> Arc<FeSpace> {
    let mesh = Arc::new(build_structured_quadrilateral(n).unwrap());
    Arc::new(build_space(mesh, ElementKind::Q1).unwrap())
}

/// Basis values, written out independently of the library's formulas
/// (monomial expansions instead of barycentric products).
pub fn oracle_basis(kind: ElementKind, x: f64, y: f64) -> Vec<f64> {
    match kind {
        ElementKind::P1 => vec![1.0 - x - y, x, y],
        ElementKind::P2 => {
            let l0 = 1.0 - x - y;
            vec![
                2.0 * l0 * l0 - l0,
                2.0 * x * x - x,
                2.0 * y * y - y,
                4.0 * l0 * x,
                4.0 * x * y,
                4.0 * y * l0,
            ]
        }
        ElementKind::Q1 => vec![
            1.0 - x - y + x * y,
            x - x * y,
            x * y,
            y - x * y,
        ],
    }
}

/// Reference gradients, hand-differentiated from the monomial expansions.
pub fn oracle_basis_grad(kind: ElementKind, x: f64, y: f64) -> Vec<[f64; 2]> {
    match kind {
        ElementKind::P1 => vec![[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]],
        ElementKind::P2 => {
            let l0 = 1.0 - x - y;
            let dl0 = 1.0 - 4.0 * l0;
            vec![
                [dl0, dl0],
                [4.0 * x - 1.0, 0.0],
                [0.0, 4.0 * y - 1.0],
                [4.0 * (l0 - x), -4.0 * x],
                [4.0 * y, 4.0 * x],
                [-4.0 * y, 4.0 * (l0 - y)],
            ]
        }
        ElementKind::Q1 => vec![
            [y - 1.0, x - 1.0],
            [1.0 - y, -x],
            [y, x],
            [-y, 1.0 - x],
        ],
    }
}

struct OracleGeometry {
    origin: [f64; 2],
    jac: [[f64; 2]; 2],
    det: f64,
}

impl OracleGeometry {
    fn build(mesh: &Mesh, c: usize) -> Self {
        let cell = &mesh.cells[c];
        let v: Vec<[f64; 2]> = cell.vertices.iter().map(|&i| mesh.vertices[i]).collect();
        let jac = match cell.kind {
            CellKind::Triangle => [
                [v[1][0] - v[0][0], v[2][0] - v[0][0]],
                [v[1][1] - v[0][1], v[2][1] - v[0][1]],
            ],
            CellKind::Quadrilateral => [
                [v[1][0] - v[0][0], v[3][0] - v[0][0]],
                [v[1][1] - v[0][1], v[3][1] - v[0][1]],
            ],
        };
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        OracleGeometry { origin: v[0], jac, det }
    }

    fn physical(&self, r: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * r[0] + self.jac[0][1] * r[1],
            self.origin[1] + self.jac[1][0] * r[0] + self.jac[1][1] * r[1],
        ]
    }

    fn reference(&self, p: [f64; 2]) -> [f64; 2] {
        let d = [p[0] - self.origin[0], p[1] - self.origin[1]];
        [
            (self.jac[1][1] * d[0] - self.jac[0][1] * d[1]) / self.det,
            (-self.jac[1][0] * d[0] + self.jac[0][0] * d[1]) / self.det,
        ]
    }

    fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            (self.jac[1][1] * g[0] - self.jac[1][0] * g[1]) / self.det,
            (-self.jac[0][1] * g[0] + self.jac[0][0] * g[1]) / self.det,
        ]
    }
}

/// Brute-force dense mass matrix: loops over every dof pair and every cell.
pub fn dense_mass(space: &FeSpace) -> Vec<Vec<f64>> {
    dense_cell_form(space, 2 * space.kind.degree(), |vals, _, _, a, b| vals[a] * vals[b])
}

/// Brute-force dense stiffness matrix.
pub fn dense_stiffness(space: &FeSpace) -> Vec<Vec<f64>> {
    let order = (2 * space.kind.degree()).saturating_sub(2).max(2);
    dense_cell_form(space, order, |_, grads, _, a, b| {
        grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]
    })
}

/// Brute-force dense convection matrix for velocity `beta` at time `t`;
/// entry (i, j) integrates (β·∇φ_j) φ_i.
pub fn dense_convection<B>(space: &FeSpace, beta: B, t: f64) -> Vec<Vec<f64>>
where
    B: Fn(f64, f64, f64) -> [f64; 2],
{
    let order = (2 * space.kind.degree()).max(2);
    dense_cell_form(space, order, |vals, grads, p, a, b| {
        let bv = beta(p[0], p[1], t);
        (bv[0] * grads[b][0] + bv[1] * grads[b][1]) * vals[a]
    })
}

fn dense_cell_form<F>(space: &FeSpace, order: usize, integrand: F) -> Vec<Vec<f64>>
where
    F: Fn(&[f64], &[[f64; 2]], [f64; 2], usize, usize) -> f64,
{
    let n = space.n_dofs();
    let rule = quadrature(space.kind.cell_kind(), order).unwrap();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for c in 0..space.mesh.n_cells() {
                let dofs = &space.cell_dofs[c];
                let (Some(a), Some(b)) = (
                    dofs.iter().position(|&d| d == i),
                    dofs.iter().position(|&d| d == j),
                ) else {
                    continue;
                };
                let geo = OracleGeometry::build(&space.mesh, c);
                for (&q, &w) in rule.points.iter().zip(rule.weights.iter()) {
                    let vals = oracle_basis(space.kind, q[0], q[1]);
                    let ref_grads = oracle_basis_grad(space.kind, q[0], q[1]);
                    let grads: Vec<[f64; 2]> = ref_grads.iter().map(|&g| geo.grad(g)).collect();
                    let p = geo.physical(q);
                    acc += w * geo.det * integrand(&vals, &grads, p, a, b);
                }
            }
            m[i][j] = acc;
        }
    }
    m
}

/// Hardcoded Gauss nodes/weights on [0, 1] for the facet oracle.
fn oracle_gauss_1d(m: usize) -> Vec<(f64, f64)> {
    match m {
        2 => {
            let s = 1.0 / (3.0f64).sqrt();
            vec![(0.5 * (1.0 - s), 0.5), (0.5 * (1.0 + s), 0.5)]
        }
        3 => {
            let s = (0.6f64).sqrt();
            vec![
                (0.5 * (1.0 - s), 2.5 / 9.0),
                (0.5, 4.0 / 9.0),
                (0.5 * (1.0 + s), 2.5 / 9.0),
            ]
        }
        _ => panic!("oracle supports 2- and 3-point facet rules"),
    }
}

/// Brute-force dense gradient-jump penalty matrix.
pub fn dense_cip<B>(space: &FeSpace, gamma: f64, beta: B, t: f64) -> Vec<Vec<f64>>
where
    B: Fn(f64, f64, f64) -> [f64; 2],
{
    let n = space.n_dofs();
    let mut m = vec![vec![0.0; n]; n];
    if gamma == 0.0 {
        return m;
    }
    let mesh = &space.mesh;
    let rule = oracle_gauss_1d(space.kind.degree() + 1);

    for (f, facet) in mesh.facets.iter().enumerate() {
        if facet.boundary {
            continue;
        }
        let (c1, c2) = (facet.cells.0, facet.cells.1.unwrap());
        let pa = mesh.vertices[facet.vertices[0]];
        let pb = mesh.vertices[facet.vertices[1]];
        let len = mesh.facet_diameter[f];

        // supremum of |β| over the facet quadrature points and endpoints
        let mut beta_max: f64 = 0.0;
        let mut probe = vec![pa, pb];
        for &(s, _) in &rule {
            probe.push([pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])]);
        }
        for p in probe {
            let b = beta(p[0], p[1], t);
            beta_max = beta_max.max((b[0] * b[0] + b[1] * b[1]).sqrt());
        }
        let factor = gamma * beta_max * len * len;

        // gradient jump of every global dof at a point on the facet
        let jump = |i: usize, p: [f64; 2]| -> [f64; 2] {
            let mut out = [0.0; 2];
            for (cell, sign) in [(c1, 1.0), (c2, -1.0)] {
                if let Some(a) = space.cell_dofs[cell].iter().position(|&d| d == i) {
                    let geo = OracleGeometry::build(mesh, cell);
                    let r = geo.reference(p);
                    let g = geo.grad(oracle_basis_grad(space.kind, r[0], r[1])[a]);
                    out[0] += sign * g[0];
                    out[1] += sign * g[1];
                }
            }
            out
        };

        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for &(s, w) in &rule {
                    let p = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                    let gi = jump(i, p);
                    let gj = jump(j, p);
                    acc += w * len * (gi[0] * gj[0] + gi[1] * gj[1]);
                }
                m[i][j] += factor * acc;
            }
        }
    }
    m
}

pub fn max_entry_diff(sparse: &CsrMatrix, dense: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..sparse.nrows() {
        for j in 0..sparse.ncols() {
            worst = worst.max((sparse.get(i, j) - dense[i][j]).abs());
        }
    }
    worst
}

/// Dense LU solve through nalgebra, used as the linear-solver oracle.
pub fn dense_solve(a: &CsrMatrix, b: &[f64]) -> Vec<f64> {
    let n = a.nrows();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a.get(i, j));
    let rhs = nalgebra::DVector::from_column_slice(b);
    m.lu().solve(&rhs).expect("dense oracle solve").iter().copied().collect()
}
