//! Structured meshes of the unit square and the geometric quantities the
//! assembly routines need: facet connectivity, cell/facet diameters, and the
//! vertexwise averaged diameter field used by the nodal stabilization.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Variants of the structured triangular mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangularVariant {
    /// All lattice squares split along the same diagonal (three-directional
    /// mesh); satisfies the empty-circumcircle property.
    Delaunay,
    /// Checkerboard diagonals plus a fixed shift of the interior vertices;
    /// violates the empty-circumcircle property on some interior facets.
    NonDelaunay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Triangle,
    Quadrilateral,
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub kind: CellKind,
    /// Vertex indices, counterclockwise. Length 3 or 4.
    pub vertices: Vec<usize>,
}

impl Cell {
    fn local_edges(&self) -> Vec<(usize, usize)> {
        let v = &self.vertices;
        match self.kind {
            CellKind::Triangle => vec![(v[0], v[1]), (v[1], v[2]), (v[2], v[0])],
            CellKind::Quadrilateral => {
                vec![(v[0], v[1]), (v[1], v[2]), (v[2], v[3]), (v[3], v[0])]
            }
        }
    }
}

/// An edge of the mesh together with its adjacency.
#[derive(Debug, Clone)]
pub struct Facet {
    /// Endpoint vertex indices, sorted ascending.
    pub vertices: [usize; 2],
    /// Adjacent cell(s); interior facets have two, boundary facets one.
    pub cells: (usize, Option<usize>),
    pub boundary: bool,
}

impl Facet {
    pub fn is_interior(&self) -> bool {
        !self.boundary
    }
}

/// Immutable 2D mesh. Construction computes connectivity, diameters, and a
/// uniform-grid cell locator; afterwards the structure is safe to share
/// across threads.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub cells: Vec<Cell>,
    pub facets: Vec<Facet>,
    /// h_K: largest pairwise vertex distance of cell K.
    pub cell_diameter: Vec<f64>,
    /// h_F: facet length.
    pub facet_diameter: Vec<f64>,
    /// Facet indices per cell, aligned with the cell's local edge order.
    pub cell_facets: Vec<Vec<usize>>,
    /// Cells incident to each vertex.
    pub vertex_cells: Vec<Vec<usize>>,
    facet_lookup: HashMap<(usize, usize), usize>,
    locator: CellLocator,
}

/// Vertexwise average of the diameters of the incident cells, read as a
/// continuous piecewise-linear field.
#[derive(Debug, Clone)]
pub struct MeshFunction {
    pub value_at_vertex: Vec<f64>,
}

impl MeshFunction {
    /// Linear interpolation along the edge (a, b); used for non-vertex
    /// degrees of freedom placed at edge midpoints.
    pub fn at_edge_midpoint(&self, a: usize, b: usize) -> f64 {
        0.5 * (self.value_at_vertex[a] + self.value_at_vertex[b])
    }
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn polygon_area(pts: &[Point]) -> f64 {
    let mut acc = 0.0;
    for i in 0..pts.len() {
        let j = (i + 1) % pts.len();
        acc += pts[i][0] * pts[j][1] - pts[j][0] * pts[i][1];
    }
    0.5 * acc
}

#[derive(Debug, Clone)]
struct CellLocator {
    nx: usize,
    ny: usize,
    min: Point,
    max: Point,
    buckets: Vec<Vec<usize>>,
}

impl CellLocator {
    fn build(vertices: &[Point], cells: &[Cell]) -> Self {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for v in vertices {
            for d in 0..2 {
                min[d] = min[d].min(v[d]);
                max[d] = max[d].max(v[d]);
            }
        }
        let n = ((cells.len() as f64).sqrt().ceil() as usize).max(1);
        let (nx, ny) = (n, n);
        let mut buckets = vec![Vec::new(); nx * ny];
        let span = [
            (max[0] - min[0]).max(f64::MIN_POSITIVE),
            (max[1] - min[1]).max(f64::MIN_POSITIVE),
        ];
        for (c, cell) in cells.iter().enumerate() {
            let mut cmin = [f64::INFINITY; 2];
            let mut cmax = [f64::NEG_INFINITY; 2];
            for &v in &cell.vertices {
                for d in 0..2 {
                    cmin[d] = cmin[d].min(vertices[v][d]);
                    cmax[d] = cmax[d].max(vertices[v][d]);
                }
            }
            let pad = 1e-9;
            let i0 = (((cmin[0] - pad - min[0]) / span[0] * nx as f64).floor() as isize).max(0)
                as usize;
            let i1 = (((cmax[0] + pad - min[0]) / span[0] * nx as f64).floor() as isize)
                .min(nx as isize - 1) as usize;
            let j0 = (((cmin[1] - pad - min[1]) / span[1] * ny as f64).floor() as isize).max(0)
                as usize;
            let j1 = (((cmax[1] + pad - min[1]) / span[1] * ny as f64).floor() as isize)
                .min(ny as isize - 1) as usize;
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(c);
                }
            }
        }
        CellLocator {
            nx,
            ny,
            min,
            max,
            buckets,
        }
    }

    fn candidates(&self, p: Point) -> &[usize] {
        let span = [
            (self.max[0] - self.min[0]).max(f64::MIN_POSITIVE),
            (self.max[1] - self.min[1]).max(f64::MIN_POSITIVE),
        ];
        let i = (((p[0] - self.min[0]) / span[0] * self.nx as f64).floor() as isize)
            .clamp(0, self.nx as isize - 1) as usize;
        let j = (((p[1] - self.min[1]) / span[1] * self.ny as f64).floor() as isize)
            .clamp(0, self.ny as isize - 1) as usize;
        &self.buckets[j * self.nx + i]
    }
}

const GEOM_TOL: f64 = 1e-12;

impl Mesh {
    /// Assemble a mesh from raw vertices and cells, deriving all
    /// connectivity. Validates that every facet touches one or two cells and
    /// that all cells have positive area.
    pub fn from_cells(vertices: Vec<Point>, cells: Vec<Cell>) -> Result<Mesh> {
        if vertices.is_empty() || cells.is_empty() {
            return Err(Error::invalid("mesh needs at least one cell"));
        }
        for (c, cell) in cells.iter().enumerate() {
            let expect = match cell.kind {
                CellKind::Triangle => 3,
                CellKind::Quadrilateral => 4,
            };
            if cell.vertices.len() != expect {
                return Err(Error::invalid(format!(
                    "cell {c} has {} vertices, expected {expect}",
                    cell.vertices.len()
                )));
            }
            if cell.vertices.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::invalid(format!("cell {c} references missing vertex")));
            }
            let pts: Vec<Point> = cell.vertices.iter().map(|&v| vertices[v]).collect();
            if polygon_area(&pts) <= GEOM_TOL {
                return Err(Error::invalid(format!(
                    "cell {c} is degenerate or clockwise (area {})",
                    polygon_area(&pts)
                )));
            }
        }

        let mut facet_lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut facets: Vec<Facet> = Vec::new();
        let mut cell_facets: Vec<Vec<usize>> = vec![Vec::new(); cells.len()];
        for (c, cell) in cells.iter().enumerate() {
            for (a, b) in cell.local_edges() {
                let key = (a.min(b), a.max(b));
                match facet_lookup.get(&key) {
                    Some(&f) => {
                        let facet = &mut facets[f];
                        if facet.cells.1.is_some() {
                            return Err(Error::invalid(format!(
                                "facet ({}, {}) touches more than two cells",
                                key.0, key.1
                            )));
                        }
                        facet.cells.1 = Some(c);
                        facet.boundary = false;
                        cell_facets[c].push(f);
                    }
                    None => {
                        let f = facets.len();
                        facets.push(Facet {
                            vertices: [key.0, key.1],
                            cells: (c, None),
                            boundary: true,
                        });
                        facet_lookup.insert(key, f);
                        cell_facets[c].push(f);
                    }
                }
            }
        }

        let cell_diameter: Vec<f64> = cells
            .iter()
            .map(|cell| {
                let mut h: f64 = 0.0;
                for (i, &a) in cell.vertices.iter().enumerate() {
                    for &b in cell.vertices.iter().skip(i + 1) {
                        h = h.max(dist(vertices[a], vertices[b]));
                    }
                }
                h
            })
            .collect();
        let facet_diameter: Vec<f64> = facets
            .iter()
            .map(|f| dist(vertices[f.vertices[0]], vertices[f.vertices[1]]))
            .collect();

        let mut vertex_cells: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
        for (c, cell) in cells.iter().enumerate() {
            for &v in &cell.vertices {
                vertex_cells[v].push(c);
            }
        }

        let locator = CellLocator::build(&vertices, &cells);
        Ok(Mesh {
            vertices,
            cells,
            facets,
            cell_diameter,
            facet_diameter,
            cell_facets,
            vertex_cells,
            facet_lookup,
            locator,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        let pts: Vec<Point> = self.cells[c].vertices.iter().map(|&v| self.vertices[v]).collect();
        polygon_area(&pts)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_area(c)).sum()
    }

    pub fn max_cell_diameter(&self) -> f64 {
        self.cell_diameter.iter().cloned().fold(0.0, f64::max)
    }

    pub fn facet_between(&self, a: usize, b: usize) -> Option<usize> {
        self.facet_lookup.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn interior_facets(&self) -> impl Iterator<Item = (usize, &Facet)> {
        self.facets.iter().enumerate().filter(|(_, f)| f.is_interior())
    }

    /// Point-in-cell test with a small geometric tolerance.
    pub fn cell_contains(&self, c: usize, p: Point) -> bool {
        let cell = &self.cells[c];
        let vs = &cell.vertices;
        match cell.kind {
            CellKind::Triangle => {
                let (a, b, cc) = (self.vertices[vs[0]], self.vertices[vs[1]], self.vertices[vs[2]]);
                let det = (b[0] - a[0]) * (cc[1] - a[1]) - (cc[0] - a[0]) * (b[1] - a[1]);
                let l1 = ((p[0] - a[0]) * (cc[1] - a[1]) - (cc[0] - a[0]) * (p[1] - a[1])) / det;
                let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
                let tol = 1e-12;
                l1 >= -tol && l2 >= -tol && l1 + l2 <= 1.0 + tol
            }
            CellKind::Quadrilateral => {
                // generated quadrilaterals are axis-aligned rectangles
                let xs: Vec<f64> = vs.iter().map(|&v| self.vertices[v][0]).collect();
                let ys: Vec<f64> = vs.iter().map(|&v| self.vertices[v][1]).collect();
                let (x0, x1) = (xs.iter().cloned().fold(f64::INFINITY, f64::min),
                                xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
                let (y0, y1) = (ys.iter().cloned().fold(f64::INFINITY, f64::min),
                                ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
                let tol = 1e-12;
                p[0] >= x0 - tol && p[0] <= x1 + tol && p[1] >= y0 - tol && p[1] <= y1 + tol
            }
        }
    }

    /// Find a cell containing `p`; ties on shared edges resolve to the
    /// lowest cell index for determinism.
    pub fn locate(&self, p: Point) -> Option<usize> {
        let mut cands: Vec<usize> = self.locator.candidates(p).to_vec();
        cands.sort_unstable();
        for c in cands {
            if self.cell_contains(c, p) {
                return Some(c);
            }
        }
        // fall back to a full scan; only reachable for points hugging bucket
        // borders beyond the locator padding
        (0..self.n_cells()).find(|&c| self.cell_contains(c, p))
    }
}

fn lattice_index(n: usize, i: usize, j: usize) -> usize {
    j * (n + 1) + i
}

/// Uniform lattice triangulations of (0,1)².
///
/// The `Delaunay` variant splits every lattice square along the diagonal from
/// its lower-left to its upper-right corner. The `NonDelaunay` variant
/// alternates the diagonal in a checkerboard pattern and shifts every
/// interior vertex by (+0.15/n, -0.1/n), which breaks the empty-circumcircle
/// property while keeping all triangles positively oriented.
pub fn build_structured_triangular(n: usize, variant: TriangularVariant) -> Result<Mesh> {
    if n < 2 {
        return Err(Error::invalid(format!("mesh resolution n = {n} must be at least 2")));
    }
    let nf = n as f64;
    let mut vertices: Vec<Point> = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let mut p = [i as f64 / nf, j as f64 / nf];
            if variant == TriangularVariant::NonDelaunay && i > 0 && i < n && j > 0 && j < n {
                p[0] += 0.15 / nf;
                p[1] -= 0.1 / nf;
            }
            vertices.push(p);
        }
    }
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let a = lattice_index(n, i, j);
            let b = lattice_index(n, i + 1, j);
            let c = lattice_index(n, i + 1, j + 1);
            let d = lattice_index(n, i, j + 1);
            let split_main = match variant {
                TriangularVariant::Delaunay => true,
                TriangularVariant::NonDelaunay => (i + j) % 2 == 0,
            };
            if split_main {
                // diagonal a-c
                cells.push(Cell { kind: CellKind::Triangle, vertices: vec![a, b, c] });
                cells.push(Cell { kind: CellKind::Triangle, vertices: vec![a, c, d] });
            } else {
                // diagonal b-d
                cells.push(Cell { kind: CellKind::Triangle, vertices: vec![a, b, d] });
                cells.push(Cell { kind: CellKind::Triangle, vertices: vec![b, c, d] });
            }
        }
    }
    Mesh::from_cells(vertices, cells)
}

/// Uniform mesh of n x n axis-aligned squares on (0,1)².
pub fn build_structured_quadrilateral(n: usize) -> Result<Mesh> {
    if n < 2 {
        return Err(Error::invalid(format!("mesh resolution n = {n} must be at least 2")));
    }
    let nf = n as f64;
    let mut vertices: Vec<Point> = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / nf, j as f64 / nf]);
        }
    }
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(Cell {
                kind: CellKind::Quadrilateral,
                vertices: vec![
                    lattice_index(n, i, j),
                    lattice_index(n, i + 1, j),
                    lattice_index(n, i + 1, j + 1),
                    lattice_index(n, i, j + 1),
                ],
            });
        }
    }
    Mesh::from_cells(vertices, cells)
}

/// Vertexwise mean of the diameters of the incident cells.
pub fn compute_mesh_function(mesh: &Mesh) -> MeshFunction {
    let value_at_vertex = mesh
        .vertex_cells
        .iter()
        .map(|cells| {
            let sum: f64 = cells.iter().map(|&c| mesh.cell_diameter[c]).sum();
            sum / cells.len() as f64
        })
        .collect();
    MeshFunction { value_at_vertex }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Strict empty-circumcircle test for an interior facet: returns true
    /// when the vertex of the second cell opposite the facet lies strictly
    /// inside the circumcircle of the first cell.
    pub(crate) fn facet_violates_delaunay(mesh: &Mesh, facet: &Facet) -> bool {
        let (c1, c2) = (facet.cells.0, facet.cells.1.expect("interior facet"));
        let tri = &mesh.cells[c1].vertices;
        assert_eq!(tri.len(), 3);
        let opposite = mesh.cells[c2]
            .vertices
            .iter()
            .copied()
            .find(|v| !facet.vertices.contains(v))
            .expect("opposite vertex");
        let [a, b, c] = [mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]];
        let p = mesh.vertices[opposite];
        // incircle determinant, positive for counterclockwise (a, b, c) with
        // p strictly inside
        let (adx, ady) = (a[0] - p[0], a[1] - p[1]);
        let (bdx, bdy) = (b[0] - p[0], b[1] - p[1]);
        let (cdx, cdy) = (c[0] - p[0], c[1] - p[1]);
        let alift = adx * adx + ady * ady;
        let blift = bdx * bdx + bdy * bdy;
        let clift = cdx * cdx + cdy * cdy;
        let det = adx * (bdy * clift - cdy * blift) - ady * (bdx * clift - cdx * blift)
            + alift * (bdx * cdy - cdx * bdy);
        let h = mesh.facet_diameter[mesh.facet_between(facet.vertices[0], facet.vertices[1]).unwrap()];
        det > 1e-10 * h.powi(4)
    }

    #[test]
    fn rejects_too_coarse_resolution() {
        assert!(build_structured_triangular(1, TriangularVariant::Delaunay).is_err());
        assert!(build_structured_quadrilateral(0).is_err());
    }

    #[test]
    fn delaunay_counts_n5() {
        let mesh = build_structured_triangular(5, TriangularVariant::Delaunay).unwrap();
        assert_eq!(mesh.n_vertices(), 36);
        assert_eq!(mesh.n_cells(), 50);
    }

    #[test]
    fn delaunay_n2_uniform_diameters() {
        let mesh = build_structured_triangular(2, TriangularVariant::Delaunay).unwrap();
        let expect = (2.0f64).sqrt() / 2.0;
        for &h in &mesh.cell_diameter {
            assert!((h - expect).abs() < 1e-14);
        }
        let hfun = compute_mesh_function(&mesh);
        assert_eq!(hfun.value_at_vertex.len(), 9);
        for &v in &hfun.value_at_vertex {
            assert!((v - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn quadrilateral_n5_cells_and_diameters() {
        let mesh = build_structured_quadrilateral(5).unwrap();
        assert_eq!(mesh.n_cells(), 25);
        for &h in &mesh.cell_diameter {
            assert!((h - (2.0f64).sqrt() / 5.0).abs() < 1e-14);
        }
    }

    #[test]
    fn quadrilateral_n2_area() {
        let mesh = build_structured_quadrilateral(2).unwrap();
        assert!((mesh.total_area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadrilateral_n3_facet_counts() {
        // facet-enumeration oracle: count lattice edges directly
        let n = 3;
        let horizontal = n * (n + 1);
        let vertical = n * (n + 1);
        let total = horizontal + vertical;
        let boundary = 4 * n;
        let interior = total - boundary;

        let mesh = build_structured_quadrilateral(n).unwrap();
        assert_eq!(mesh.facets.len(), total);
        assert_eq!(mesh.facets.iter().filter(|f| f.boundary).count(), boundary);
        assert_eq!(mesh.facets.iter().filter(|f| f.is_interior()).count(), interior);
    }

    #[test]
    fn generated_meshes_partition_unit_square() {
        for mesh in [
            build_structured_triangular(4, TriangularVariant::Delaunay).unwrap(),
            build_structured_triangular(5, TriangularVariant::NonDelaunay).unwrap(),
            build_structured_quadrilateral(4).unwrap(),
        ] {
            assert!((mesh.total_area() - 1.0).abs() < 1e-12);
            for f in &mesh.facets {
                match f.cells {
                    (_, Some(_)) => assert!(!f.boundary),
                    (_, None) => assert!(f.boundary),
                }
            }
        }
    }

    #[test]
    fn delaunay_variant_passes_circumcircle_everywhere() {
        let mesh = build_structured_triangular(5, TriangularVariant::Delaunay).unwrap();
        for (_, f) in mesh.interior_facets() {
            assert!(!facet_violates_delaunay(&mesh, f));
        }
    }

    #[test]
    fn non_delaunay_variant_fails_circumcircle_somewhere() {
        let mesh = build_structured_triangular(5, TriangularVariant::NonDelaunay).unwrap();
        let violations = mesh
            .interior_facets()
            .filter(|(_, f)| facet_violates_delaunay(&mesh, f))
            .count();
        assert!(violations > 0, "expected at least one non-Delaunay facet");
    }

    #[test]
    fn mesh_function_is_relabeling_invariant() {
        let mesh = build_structured_triangular(4, TriangularVariant::Delaunay).unwrap();
        let base = compute_mesh_function(&mesh);
        // reverse the cell ordering and rebuild
        let mut cells: Vec<Cell> = mesh.cells.clone();
        cells.reverse();
        let permuted = Mesh::from_cells(mesh.vertices.clone(), cells).unwrap();
        let other = compute_mesh_function(&permuted);
        for (a, b) in base.value_at_vertex.iter().zip(other.value_at_vertex.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn mesh_function_on_graded_mesh() {
        // two cell sizes meeting along x = 0.5: left half one square of side
        // 1/2 per row, right half split into side-1/4 squares
        let mut vertices = Vec::new();
        let mut index = HashMap::new();
        let mut vid = |vertices: &mut Vec<Point>, index: &mut HashMap<(i64, i64), usize>, x: f64, y: f64| {
            let key = ((x * 1e9).round() as i64, (y * 1e9).round() as i64);
            *index.entry(key).or_insert_with(|| {
                vertices.push([x, y]);
                vertices.len() - 1
            })
        };
        let mut cells = Vec::new();
        // coarse 0.5 x 0.5 squares on the left column
        for j in 0..2 {
            let y0 = j as f64 * 0.5;
            let quad = [
                vid(&mut vertices, &mut index, 0.0, y0),
                vid(&mut vertices, &mut index, 0.5, y0),
                vid(&mut vertices, &mut index, 0.5, y0 + 0.5),
                vid(&mut vertices, &mut index, 0.0, y0 + 0.5),
            ];
            cells.push(Cell { kind: CellKind::Quadrilateral, vertices: quad.to_vec() });
        }
        // fine 0.25 x 0.25 squares on the right half
        for j in 0..4 {
            for i in 0..2 {
                let x0 = 0.5 + i as f64 * 0.25;
                let y0 = j as f64 * 0.25;
                let quad = [
                    vid(&mut vertices, &mut index, x0, y0),
                    vid(&mut vertices, &mut index, x0 + 0.25, y0),
                    vid(&mut vertices, &mut index, x0 + 0.25, y0 + 0.25),
                    vid(&mut vertices, &mut index, x0, y0 + 0.25),
                ];
                cells.push(Cell { kind: CellKind::Quadrilateral, vertices: quad.to_vec() });
            }
        }
        // hanging nodes at (0.5, 0.25) and (0.5, 0.75) are fine for this
        // diameter-averaging check even though the mesh is nonconforming
        let mesh = Mesh::from_cells(vertices.clone(), cells).unwrap();
        let hfun = compute_mesh_function(&mesh);

        // interface vertex (0.5, 0.5): oracle by direct summation
        let v = vertices
            .iter()
            .position(|p| (p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12)
            .unwrap();
        let incident = &mesh.vertex_cells[v];
        let oracle: f64 =
            incident.iter().map(|&c| mesh.cell_diameter[c]).sum::<f64>() / incident.len() as f64;
        let coarse = 0.5 * (2.0f64).sqrt();
        let fine = 0.25 * (2.0f64).sqrt();
        // two coarse and two fine cells meet there
        assert!((oracle - 0.5 * (coarse + fine)).abs() < 1e-14);
        assert!((hfun.value_at_vertex[v] - oracle).abs() < 1e-14);
    }

    #[test]
    fn locate_finds_containing_cell() {
        let mesh = build_structured_triangular(4, TriangularVariant::Delaunay).unwrap();
        for p in [[0.0, 0.0], [1.0, 1.0], [0.3, 0.7], [0.5, 0.5], [0.25, 0.25]] {
            let c = mesh.locate(p).expect("point should be inside");
            assert!(mesh.cell_contains(c, p));
        }
        assert!(mesh.locate([1.5, 0.5]).is_none());
    }
}
