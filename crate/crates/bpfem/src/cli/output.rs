//! CSV and legacy-VTK serialization of run results.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fe_space::{ElementKind, FeFunction};
use crate::mesh::CellKind;

/// 17-significant-digit float formatting used in every CSV.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<()> {
    let mut text = String::with_capacity(rows.len() * 32 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Write a scalar field as legacy ASCII VTK (unstructured grid, point data
/// named `u_plus`). P2 fields are exported on the once-refined linear
/// visualization mesh whose vertices are exactly the P2 nodes.
pub fn write_vtk(path: &Path, u: &FeFunction) -> Result<()> {
    let space = &u.space;
    let mesh = &space.mesh;

    let (points, cells): (Vec<[f64; 2]>, Vec<Vec<usize>>) = match space.kind {
        ElementKind::P1 | ElementKind::Q1 => (
            mesh.vertices.clone(),
            mesh.cells.iter().map(|c| c.vertices.clone()).collect(),
        ),
        ElementKind::P2 => {
            let mut cells = Vec::with_capacity(4 * mesh.n_cells());
            for dofs in &space.cell_dofs {
                let [v0, v1, v2, m01, m12, m20] =
                    [dofs[0], dofs[1], dofs[2], dofs[3], dofs[4], dofs[5]];
                cells.push(vec![v0, m01, m20]);
                cells.push(vec![v1, m12, m01]);
                cells.push(vec![v2, m20, m12]);
                cells.push(vec![m01, m12, m20]);
            }
            (space.dof_coords.clone(), cells)
        }
    };
    let cell_type = match space.kind.cell_kind() {
        CellKind::Triangle => 5,
        CellKind::Quadrilateral => 9,
    };

    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io_err = |e: std::io::Error| Error::io(path, e);

    writeln!(w, "# vtk DataFile Version 3.0").map_err(io_err)?;
    writeln!(w, "bpfem field").map_err(io_err)?;
    writeln!(w, "ASCII").map_err(io_err)?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID").map_err(io_err)?;
    writeln!(w, "POINTS {} double", points.len()).map_err(io_err)?;
    for p in &points {
        writeln!(w, "{:.9e} {:.9e} 0.0", p[0], p[1]).map_err(io_err)?;
    }
    let total: usize = cells.iter().map(|c| c.len() + 1).sum();
    writeln!(w, "CELLS {} {}", cells.len(), total).map_err(io_err)?;
    for c in &cells {
        let ids: Vec<String> = c.iter().map(|i| i.to_string()).collect();
        writeln!(w, "{} {}", c.len(), ids.join(" ")).map_err(io_err)?;
    }
    writeln!(w, "CELL_TYPES {}", cells.len()).map_err(io_err)?;
    for _ in &cells {
        writeln!(w, "{cell_type}").map_err(io_err)?;
    }
    writeln!(w, "POINT_DATA {}", points.len()).map_err(io_err)?;
    writeln!(w, "SCALARS u_plus double 1").map_err(io_err)?;
    writeln!(w, "LOOKUP_TABLE default").map_err(io_err)?;
    for &v in &u.coeffs {
        writeln!(w, "{v:.9e}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
