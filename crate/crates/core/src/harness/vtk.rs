//! Legacy ASCII VTK unstructured grids with cell data.

use std::fmt::Write as _;

use crate::elements::FormValue;
use crate::mesh::SimplicialMesh;

/// A named cell field; scalars and vectors may be mixed.
pub struct CellField<'a> {
    pub name: &'a str,
    pub values: &'a [FormValue],
}

pub fn unstructured_grid(mesh: &SimplicialMesh, title: &str, fields: &[CellField<'_>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "{}", title.replace('\n', " "));
    let _ = writeln!(out, "ASCII");
    let _ = writeln!(out, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(out, "POINTS {} double", mesh.n_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
    }
    let nv = mesh.dim() + 1;
    let _ = writeln!(out, "CELLS {} {}", mesh.n_cells(), mesh.n_cells() * (nv + 1));
    for c in 0..mesh.n_cells() {
        let ids: Vec<String> = mesh.cell(c).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{nv} {}", ids.join(" "));
    }
    let cell_type = if mesh.dim() == 2 { 5 } else { 10 };
    let _ = writeln!(out, "CELL_TYPES {}", mesh.n_cells());
    for _ in 0..mesh.n_cells() {
        let _ = writeln!(out, "{cell_type}");
    }
    if !fields.is_empty() {
        let _ = writeln!(out, "CELL_DATA {}", mesh.n_cells());
    }
    for f in fields {
        let vector = matches!(f.values.first(), Some(FormValue::Vector(_)));
        if vector {
            let _ = writeln!(out, "VECTORS {} double", f.name);
            for v in f.values {
                let p = v.vector();
                let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
            }
        } else {
            let _ = writeln!(out, "SCALARS {} double 1", f.name);
            let _ = writeln!(out, "LOOKUP_TABLE default");
            for v in f.values {
                let _ = writeln!(out, "{}", v.scalar());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::unit_square;

    #[test]
    fn header_and_counts() {
        let m = unit_square(1).unwrap();
        let u = vec![FormValue::Vector(crate::mesh::Point::new(1.0, 2.0, 0.0)); 2];
        let j = vec![FormValue::Scalar(0.5); 2];
        let s = unstructured_grid(&m, "t", &[CellField { name: "u", values: &u }, CellField { name: "J", values: &j }]);
        assert!(s.starts_with("# vtk DataFile Version 3.0\nt\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS 4 double\n"));
        assert!(s.contains("CELLS 2 8\n3 "));
        assert!(s.contains("CELL_TYPES 2\n5\n5\n"));
        assert!(s.contains("CELL_DATA 2\nVECTORS u double\n1 2 0\n"));
        assert!(s.contains("SCALARS J double 1\nLOOKUP_TABLE default\n0.5\n0.5\n"));
    }
}
