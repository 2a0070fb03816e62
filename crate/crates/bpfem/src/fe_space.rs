//! Lagrange finite element spaces on triangles (P1, P2) and rectangles (Q1):
//! degree-of-freedom layout, reference bases, quadrature, nodal
//! interpolation, and point evaluation.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{CellKind, Mesh, MeshFunction, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    P1,
    P2,
    Q1,
}

impl ElementKind {
    pub fn degree(self) -> usize {
        match self {
            ElementKind::P1 | ElementKind::Q1 => 1,
            ElementKind::P2 => 2,
        }
    }

    pub fn cell_kind(self) -> CellKind {
        match self {
            ElementKind::P1 | ElementKind::P2 => CellKind::Triangle,
            ElementKind::Q1 => CellKind::Quadrilateral,
        }
    }

    pub fn dofs_per_cell(self) -> usize {
        match self {
            ElementKind::P1 => 3,
            ElementKind::P2 => 6,
            ElementKind::Q1 => 4,
        }
    }
}

impl std::str::FromStr for ElementKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p1" => Ok(ElementKind::P1),
            "p2" => Ok(ElementKind::P2),
            "q1" => Ok(ElementKind::Q1),
            other => Err(Error::invalid(format!("unknown element kind `{other}`"))),
        }
    }
}

/// Quadrature rule on the reference cell (unit triangle or unit square).
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

/// Gauss-Legendre nodes and weights on [0, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre_01(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre P_m(x) and derivative via the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            let dpm = m as f64 * (x * pm - pm1) / (x * x - 1.0);
            let dx = pm / dpm;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=m {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let pm = if m == 1 { x } else { p1 };
        let pm1 = if m == 1 { 1.0 } else { p0 };
        let dpm = m as f64 * (x * pm - pm1) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dpm * dpm);
        // map [-1, 1] -> [0, 1]
        nodes[i] = 0.5 * (x + 1.0);
        weights[i] = 0.5 * w;
    }
    // sort ascending for reproducible ordering
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| nodes[a].partial_cmp(&nodes[b]).unwrap());
    (
        idx.iter().map(|&k| nodes[k]).collect(),
        idx.iter().map(|&k| weights[k]).collect(),
    )
}

const MAX_QUADRATURE_ORDER: usize = 30;

/// Rule exact for polynomials of total degree `order` on the reference cell.
///
/// Triangle rules come from collapsing a tensor Gauss rule on the unit
/// square through (x, y) -> (x, y(1-x)) with the Jacobian factor (1-x);
/// square rules are plain tensor Gauss.
pub fn quadrature(kind: CellKind, order: usize) -> Result<QuadratureRule> {
    if order < 1 || order > MAX_QUADRATURE_ORDER {
        return Err(Error::invalid(format!(
            "unsupported quadrature order {order} (valid: 1..={MAX_QUADRATURE_ORDER})"
        )));
    }
    match kind {
        CellKind::Triangle => {
            // the collapsed integrand gains one degree in x
            let m = (order + 3) / 2;
            let (nodes, w) = gauss_legendre_01(m);
            let mut points = Vec::with_capacity(m * m);
            let mut weights = Vec::with_capacity(m * m);
            for i in 0..m {
                for j in 0..m {
                    let x = nodes[i];
                    let y = nodes[j] * (1.0 - x);
                    points.push([x, y]);
                    weights.push(w[i] * w[j] * (1.0 - x));
                }
            }
            Ok(QuadratureRule { points, weights })
        }
        CellKind::Quadrilateral => {
            let m = (order + 2) / 2;
            let (nodes, w) = gauss_legendre_01(m);
            let mut points = Vec::with_capacity(m * m);
            let mut weights = Vec::with_capacity(m * m);
            for i in 0..m {
                for j in 0..m {
                    points.push([nodes[i], nodes[j]]);
                    weights.push(w[i] * w[j]);
                }
            }
            Ok(QuadratureRule { points, weights })
        }
    }
}

/// Values and reference gradients of all local basis functions at a
/// reference point.
pub fn eval_basis(kind: ElementKind, p: Point) -> (Vec<f64>, Vec<[f64; 2]>) {
    let [x, y] = p;
    match kind {
        ElementKind::P1 => (
            vec![1.0 - x - y, x, y],
            vec![[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]],
        ),
        ElementKind::P2 => {
            let l = [1.0 - x - y, x, y];
            let dl = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
            let mut vals = vec![0.0; 6];
            let mut grads = vec![[0.0; 2]; 6];
            for i in 0..3 {
                vals[i] = l[i] * (2.0 * l[i] - 1.0);
                grads[i] = [dl[i][0] * (4.0 * l[i] - 1.0), dl[i][1] * (4.0 * l[i] - 1.0)];
            }
            // edge midpoints in local edge order (0,1), (1,2), (2,0)
            let edges = [(0, 1), (1, 2), (2, 0)];
            for (k, &(a, b)) in edges.iter().enumerate() {
                vals[3 + k] = 4.0 * l[a] * l[b];
                grads[3 + k] = [
                    4.0 * (dl[a][0] * l[b] + l[a] * dl[b][0]),
                    4.0 * (dl[a][1] * l[b] + l[a] * dl[b][1]),
                ];
            }
            (vals, grads)
        }
        ElementKind::Q1 => (
            vec![
                (1.0 - x) * (1.0 - y),
                x * (1.0 - y),
                x * y,
                (1.0 - x) * y,
            ],
            vec![
                [-(1.0 - y), -(1.0 - x)],
                [1.0 - y, -x],
                [y, x],
                [-y, 1.0 - x],
            ],
        ),
    }
}

/// Affine map of a cell: x = origin + jac * ref.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub origin: Point,
    pub jac: [[f64; 2]; 2],
    pub det: f64,
    inv: [[f64; 2]; 2],
}

impl CellGeometry {
    pub fn to_physical(&self, r: Point) -> Point {
        [
            self.origin[0] + self.jac[0][0] * r[0] + self.jac[0][1] * r[1],
            self.origin[1] + self.jac[1][0] * r[0] + self.jac[1][1] * r[1],
        ]
    }

    pub fn to_reference(&self, x: Point) -> Point {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        [
            self.inv[0][0] * d[0] + self.inv[0][1] * d[1],
            self.inv[1][0] * d[0] + self.inv[1][1] * d[1],
        ]
    }

    /// Push a reference gradient to physical coordinates: J^{-T} g.
    pub fn grad_to_physical(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv[0][0] * g[0] + self.inv[1][0] * g[1],
            self.inv[0][1] * g[0] + self.inv[1][1] * g[1],
        ]
    }
}

/// Lagrange finite element space over a mesh.
#[derive(Debug)]
pub struct FeSpace {
    pub mesh: Arc<Mesh>,
    pub kind: ElementKind,
    pub dof_coords: Vec<Point>,
    /// Local-to-global map per cell. P2 order: three vertices followed by
    /// the midpoints of local edges (0,1), (1,2), (2,0).
    pub cell_dofs: Vec<Vec<usize>>,
    /// True for degrees of freedom not on the domain boundary.
    pub interior_mask: Vec<bool>,
    /// Cells whose closure contains each dof (the support patch of the
    /// associated basis function).
    pub dof_cells: Vec<Vec<usize>>,
    geometries: Vec<CellGeometry>,
}

const BOUNDARY_TOL: f64 = 1e-12;

fn on_unit_square_boundary(p: Point) -> bool {
    p[0].abs() < BOUNDARY_TOL
        || (p[0] - 1.0).abs() < BOUNDARY_TOL
        || p[1].abs() < BOUNDARY_TOL
        || (p[1] - 1.0).abs() < BOUNDARY_TOL
}

fn cell_geometry(mesh: &Mesh, c: usize, kind: ElementKind) -> Result<CellGeometry> {
    let cell = &mesh.cells[c];
    let v: Vec<Point> = cell.vertices.iter().map(|&i| mesh.vertices[i]).collect();
    let (origin, jac) = match kind.cell_kind() {
        CellKind::Triangle => (
            v[0],
            [
                [v[1][0] - v[0][0], v[2][0] - v[0][0]],
                [v[1][1] - v[0][1], v[2][1] - v[0][1]],
            ],
        ),
        CellKind::Quadrilateral => {
            let e1 = [v[1][0] - v[0][0], v[1][1] - v[0][1]];
            let e2 = [v[3][0] - v[0][0], v[3][1] - v[0][1]];
            // the bilinear map is affine only when the cell is a
            // parallelogram; generated meshes use axis-aligned rectangles
            let far = [v[0][0] + e1[0] + e2[0], v[0][1] + e1[1] + e2[1]];
            if (far[0] - v[2][0]).abs() > 1e-12 || (far[1] - v[2][1]).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "cell {c} is not an affine quadrilateral"
                )));
            }
            (v[0], [[e1[0], e2[0]], [e1[1], e2[1]]])
        }
    };
    let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    if det <= 0.0 {
        return Err(Error::invalid(format!("cell {c} has nonpositive Jacobian")));
    }
    let inv = [
        [jac[1][1] / det, -jac[0][1] / det],
        [-jac[1][0] / det, jac[0][0] / det],
    ];
    Ok(CellGeometry { origin, jac, det, inv })
}

/// Construct the space; dof enumeration is deterministic given the mesh:
/// vertex dofs carry the vertex index, P2 edge dofs follow at
/// `n_vertices + facet_index`.
pub fn build_space(mesh: Arc<Mesh>, kind: ElementKind) -> Result<FeSpace> {
    for (c, cell) in mesh.cells.iter().enumerate() {
        if cell.kind != kind.cell_kind() {
            return Err(Error::invalid(format!(
                "element kind {kind:?} is incompatible with cell {c} ({:?})",
                cell.kind
            )));
        }
    }

    let nv = mesh.n_vertices();
    let mut dof_coords: Vec<Point> = mesh.vertices.clone();
    if kind == ElementKind::P2 {
        for f in &mesh.facets {
            let [a, b] = f.vertices;
            let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
            dof_coords.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
        }
    }

    let mut cell_dofs = Vec::with_capacity(mesh.n_cells());
    for cell in &mesh.cells {
        let mut dofs = cell.vertices.clone();
        if kind == ElementKind::P2 {
            let v = &cell.vertices;
            for (a, b) in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
                let f = mesh
                    .facet_between(a, b)
                    .expect("cell edge must be a mesh facet");
                dofs.push(nv + f);
            }
        }
        cell_dofs.push(dofs);
    }

    let interior_mask: Vec<bool> = dof_coords
        .iter()
        .map(|&p| !on_unit_square_boundary(p))
        .collect();

    let mut dof_cells: Vec<Vec<usize>> = vec![Vec::new(); dof_coords.len()];
    for (c, dofs) in cell_dofs.iter().enumerate() {
        for &d in dofs {
            dof_cells[d].push(c);
        }
    }

    let geometries = (0..mesh.n_cells())
        .map(|c| cell_geometry(&mesh, c, kind))
        .collect::<Result<Vec<_>>>()?;

    Ok(FeSpace {
        mesh,
        kind,
        dof_coords,
        cell_dofs,
        interior_mask,
        dof_cells,
        geometries,
    })
}

impl FeSpace {
    pub fn n_dofs(&self) -> usize {
        self.dof_coords.len()
    }

    pub fn n_interior_dofs(&self) -> usize {
        self.interior_mask.iter().filter(|&&m| m).count()
    }

    pub fn interior_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs()).filter(|&i| self.interior_mask[i]).collect()
    }

    pub fn geometry(&self, cell: usize) -> &CellGeometry {
        &self.geometries[cell]
    }

    /// Mesh-function value at each dof; vertex dofs take the vertex value,
    /// edge-midpoint dofs the linear interpolation along the edge.
    pub fn dof_mesh_function(&self, hfun: &MeshFunction) -> Vec<f64> {
        let nv = self.mesh.n_vertices();
        (0..self.n_dofs())
            .map(|d| {
                if d < nv {
                    hfun.value_at_vertex[d]
                } else {
                    let f = &self.mesh.facets[d - nv];
                    hfun.at_edge_midpoint(f.vertices[0], f.vertices[1])
                }
            })
            .collect()
    }
}

/// A finite element function: one coefficient per degree of freedom.
#[derive(Debug, Clone)]
pub struct FeFunction {
    pub space: Arc<FeSpace>,
    pub coeffs: Vec<f64>,
}

impl FeFunction {
    pub fn new(space: Arc<FeSpace>, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), space.n_dofs());
        FeFunction { space, coeffs }
    }

    pub fn zero(space: Arc<FeSpace>) -> Self {
        let n = space.n_dofs();
        FeFunction { space, coeffs: vec![0.0; n] }
    }
}

/// Nodal (Lagrange) interpolation of a scalar field at time `t`.
pub fn interpolate<F>(space: &Arc<FeSpace>, g: F, t: f64) -> FeFunction
where
    F: Fn(f64, f64, f64) -> f64,
{
    let coeffs = space
        .dof_coords
        .iter()
        .map(|&[x, y]| g(x, y, t))
        .collect();
    FeFunction::new(space.clone(), coeffs)
}

/// Piecewise-polynomial point evaluation via cell location.
pub fn evaluate(u: &FeFunction, points: &[Point]) -> Result<Vec<f64>> {
    let space = &u.space;
    let mut out = Vec::with_capacity(points.len());
    for &p in points {
        let cell = space
            .mesh
            .locate(p)
            .ok_or(Error::OutOfDomain { x: p[0], y: p[1] })?;
        let r = space.geometry(cell).to_reference(p);
        let (vals, _) = eval_basis(space.kind, r);
        let acc = space.cell_dofs[cell]
            .iter()
            .zip(vals.iter())
            .map(|(&d, &v)| u.coeffs[d] * v)
            .sum();
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured_quadrilateral, build_structured_triangular, TriangularVariant};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn tri_space(n: usize, kind: ElementKind) -> Arc<FeSpace> {
        let mesh = Arc::new(build_structured_triangular(n, TriangularVariant::Delaunay).unwrap());
        Arc::new(build_space(mesh, kind).unwrap())
    }

    /// Exact integral of x^a y^b over the reference triangle.
    fn tri_monomial(a: u32, b: u32) -> f64 {
        // a! b! / (a + b + 2)!
        let fact = |k: u32| (1..=k as u64).product::<u64>() as f64;
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn quadrature_weight_sums() {
        let tri = quadrature(CellKind::Triangle, 1).unwrap();
        assert!((tri.weights.iter().sum::<f64>() - 0.5).abs() < 1e-14);
        let quad = quadrature(CellKind::Quadrilateral, 2).unwrap();
        assert!((quad.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quadrature_rejects_bad_order() {
        assert!(quadrature(CellKind::Triangle, 0).is_err());
        assert!(quadrature(CellKind::Triangle, 99).is_err());
    }

    #[test]
    fn triangle_rules_integrate_monomials_exactly() {
        for order in 1..=8usize {
            let rule = quadrature(CellKind::Triangle, order).unwrap();
            for a in 0..=order as u32 {
                for b in 0..=(order as u32 - a) {
                    let num: f64 = rule
                        .points
                        .iter()
                        .zip(rule.weights.iter())
                        .map(|(&[x, y], &w)| w * x.powi(a as i32) * y.powi(b as i32))
                        .sum();
                    let exact = tri_monomial(a, b);
                    assert!(
                        (num - exact).abs() < 1e-14,
                        "order {order}, x^{a} y^{b}: {num} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn order_two_rule_integrates_x_squared() {
        let rule = quadrature(CellKind::Triangle, 2).unwrap();
        let num: f64 = rule
            .points
            .iter()
            .zip(rule.weights.iter())
            .map(|(&[x, _], &w)| w * x * x)
            .sum();
        assert!((num - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn square_rules_integrate_monomials_exactly() {
        for order in 1..=8usize {
            let rule = quadrature(CellKind::Quadrilateral, order).unwrap();
            for a in 0..=order as u32 {
                for b in 0..=(order as u32 - a) {
                    let num: f64 = rule
                        .points
                        .iter()
                        .zip(rule.weights.iter())
                        .map(|(&[x, y], &w)| w * x.powi(a as i32) * y.powi(b as i32))
                        .sum();
                    let exact = 1.0 / ((a + 1) as f64 * (b + 1) as f64);
                    assert!((num - exact).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn dof_counts() {
        assert_eq!(tri_space(2, ElementKind::P1).n_dofs(), 9);
        assert_eq!(tri_space(2, ElementKind::P1).n_interior_dofs(), 1);

        // edge-enumeration oracle for P2 on n = 2: count lattice edges
        let n = 2;
        let horizontal = n * (n + 1);
        let vertical = n * (n + 1);
        let diagonal = n * n;
        let edges = horizontal + vertical + diagonal;
        let p2 = tri_space(2, ElementKind::P2);
        assert_eq!(p2.n_dofs(), 9 + edges);
        assert_eq!(p2.n_dofs(), 25);

        let mesh = Arc::new(build_structured_quadrilateral(3).unwrap());
        let q1 = build_space(mesh, ElementKind::Q1).unwrap();
        assert_eq!(q1.n_dofs(), 16);
        assert_eq!(q1.n_interior_dofs(), 4);
    }

    #[test]
    fn incompatible_kind_is_rejected() {
        let mesh = Arc::new(build_structured_quadrilateral(2).unwrap());
        assert!(build_space(mesh, ElementKind::P1).is_err());
        let tri = Arc::new(build_structured_triangular(2, TriangularVariant::Delaunay).unwrap());
        assert!(build_space(tri, ElementKind::Q1).is_err());
    }

    #[test]
    fn partition_of_unity_at_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in [ElementKind::P1, ElementKind::P2, ElementKind::Q1] {
            let space = match kind {
                ElementKind::Q1 => {
                    let mesh = Arc::new(build_structured_quadrilateral(3).unwrap());
                    Arc::new(build_space(mesh, kind).unwrap())
                }
                _ => tri_space(3, kind),
            };
            for _ in 0..100 {
                let r = match kind.cell_kind() {
                    CellKind::Triangle => {
                        let a: f64 = rng.gen();
                        let b: f64 = rng.gen_range(0.0..(1.0 - a));
                        [a, b]
                    }
                    CellKind::Quadrilateral => [rng.gen(), rng.gen()],
                };
                let (vals, grads) = eval_basis(kind, r);
                let s: f64 = vals.iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
                let gx: f64 = grads.iter().map(|g| g[0]).sum();
                let gy: f64 = grads.iter().map(|g| g[1]).sum();
                assert!(gx.abs() < 1e-12 && gy.abs() < 1e-12);
                let _ = &space;
            }
        }
    }

    #[test]
    fn interpolation_basics() {
        let space = tri_space(4, ElementKind::P1);
        let zero = interpolate(&space, |_, _, _| 0.0, 0.0);
        assert!(zero.coeffs.iter().all(|&c| c == 0.0));

        let affine = interpolate(&space, |x, y, _| x + y, 0.0);
        let pts = [[0.3, 0.4], [0.11, 0.77], [1.0, 1.0]];
        let vals = evaluate(&affine, &pts).unwrap();
        for (v, p) in vals.iter().zip(pts.iter()) {
            assert!((v - (p[0] + p[1])).abs() < 1e-14);
        }

        let sine = interpolate(
            &space,
            |x, y, _| (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin(),
            0.0,
        );
        let d = space
            .dof_coords
            .iter()
            .position(|p| (p[0] - 0.5).abs() < 1e-14 && (p[1] - 0.5).abs() < 1e-14)
            .unwrap();
        assert!((sine.coeffs[d] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lagrange_property_at_nodes() {
        for kind in [ElementKind::P1, ElementKind::P2] {
            let space = tri_space(2, kind);
            for i in 0..space.n_dofs() {
                let mut coeffs = vec![0.0; space.n_dofs()];
                coeffs[i] = 1.0;
                let phi = FeFunction::new(space.clone(), coeffs);
                let vals = evaluate(&phi, &space.dof_coords).unwrap();
                for (j, &v) in vals.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (v - expect).abs() < 1e-12,
                        "{kind:?}: phi_{i} at node {j} = {v}"
                    );
                }
            }
        }
    }

    #[test]
    fn evaluate_rejects_outside_points() {
        let space = tri_space(2, ElementKind::P1);
        let u = FeFunction::zero(space);
        assert!(matches!(
            evaluate(&u, &[[1.2, 0.5]]),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn interpolate_then_evaluate_is_identity_on_space_members() {
        let space = tri_space(3, ElementKind::P2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let coeffs: Vec<f64> = (0..space.n_dofs()).map(|_| rng.gen::<f64>() - 0.5).collect();
        let u = FeFunction::new(space.clone(), coeffs.clone());
        let reinterp = interpolate(
            &space,
            |x, y, _| evaluate(&u, &[[x, y]]).unwrap()[0],
            0.0,
        );
        for (a, b) in reinterp.coeffs.iter().zip(coeffs.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn interpolation_error_decays_at_expected_rate() {
        let pi = std::f64::consts::PI;
        let exact = |x: f64, y: f64, _t: f64| (pi * x).sin() * (pi * y).sin();
        for kind in [ElementKind::P1, ElementKind::P2] {
            let mut errors = Vec::new();
            let mut hs = Vec::new();
            for n in [4usize, 8, 16] {
                let space = tri_space(n, kind);
                let u = interpolate(&space, exact, 0.0);
                // L2 error by high-order quadrature
                let rule = quadrature(CellKind::Triangle, 2 * kind.degree() + 4).unwrap();
                let mut err2 = 0.0;
                for c in 0..space.mesh.n_cells() {
                    let geo = space.geometry(c);
                    for (q, &w) in rule.points.iter().zip(rule.weights.iter()) {
                        let (vals, _) = eval_basis(kind, *q);
                        let uh: f64 = space.cell_dofs[c]
                            .iter()
                            .zip(vals.iter())
                            .map(|(&d, &v)| u.coeffs[d] * v)
                            .sum();
                        let p = geo.to_physical(*q);
                        err2 += w * geo.det * (uh - exact(p[0], p[1], 0.0)).powi(2);
                    }
                }
                errors.push(err2.sqrt());
                hs.push(space.mesh.max_cell_diameter());
            }
            let slope = (errors[0] / errors[2]).log2() / (hs[0] / hs[2]).log2();
            let k = kind.degree() as f64;
            assert!(
                slope >= k + 0.9,
                "{kind:?}: interpolation slope {slope} below {}",
                k + 0.9
            );
        }
    }
}
