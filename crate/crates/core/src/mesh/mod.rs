//! Conforming simplicial meshes of triangles and tetrahedra.
//!
//! Cells are stored positively oriented (the last two vertices are swapped
//! when the input order is negative).  Edges and facets are stored with
//! ascending global vertex indices, which fixes their global orientation:
//! edges point from the lower to the higher vertex, and facet normals follow
//! the right-hand rule on the ascending triple (in 2D the normal of an edge
//! with tangent `t` is `(t_y, -t_x)`).

mod generators;
mod geometry;

use std::collections::HashMap;

use nalgebra::Vector3;
use thiserror::Error;

pub use generators::{unit_cube, unit_square};
pub use geometry::{local_edges, CellGeometry};

pub type Point = Vector3<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("unsupported dimension {0}")]
    Dimension(usize),
    #[error("mesh resolution must be at least 1")]
    ZeroResolution,
    #[error("cell has {got} vertices, expected {expected}")]
    CellArity { expected: usize, got: usize },
    #[error("degenerate cell")]
    Degenerate,
    #[error("cell {cell} is degenerate")]
    DegenerateCell { cell: usize },
    #[error("cell {cell} references missing or repeated vertex {vertex}")]
    BadVertex { cell: usize, vertex: usize },
    #[error("facet shared by more than two cells")]
    NonManifold,
    #[error("2D mesh vertex {0} has a nonzero z coordinate")]
    NotPlanar(usize),
}

const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct SimplicialMesh {
    dim: usize,
    vertices: Vec<Point>,
    cells: Vec<[usize; 4]>,
    edges: Vec<[usize; 2]>,
    facets: Vec<[usize; 3]>,
    cell_edges: Vec<[usize; 6]>,
    cell_edge_signs: Vec<[f64; 6]>,
    cell_facets: Vec<[usize; 4]>,
    cell_facet_signs: Vec<[f64; 4]>,
    facet_cells: Vec<[usize; 2]>,
    boundary_vertex: Vec<bool>,
    boundary_edge: Vec<bool>,
    boundary_facet: Vec<bool>,
}

impl SimplicialMesh {
    /// Build a mesh from vertex coordinates and cell connectivity.
    /// For `dim == 2` all `z` coordinates must be zero.
    pub fn new(dim: usize, vertices: Vec<Point>, cells: &[Vec<usize>]) -> Result<Self, MeshError> {
        if !(dim == 2 || dim == 3) {
            return Err(MeshError::Dimension(dim));
        }
        if dim == 2 {
            if let Some(i) = vertices.iter().position(|v| v.z != 0.0) {
                return Err(MeshError::NotPlanar(i));
            }
        }
        let nv = dim + 1;
        let mut stored = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != nv {
                return Err(MeshError::CellArity { expected: nv, got: cell.len() });
            }
            let mut ids = [NONE; 4];
            for (k, &v) in cell.iter().enumerate() {
                if v >= vertices.len() || cell[..k].contains(&v) {
                    return Err(MeshError::BadVertex { cell: c, vertex: v });
                }
                ids[k] = v;
            }
            let pts: Vec<Point> = ids[..nv].iter().map(|&v| vertices[v]).collect();
            let geo = CellGeometry::new(dim, &pts).map_err(|_| MeshError::DegenerateCell { cell: c })?;
            if geo.orientation() < 0.0 {
                ids.swap(dim - 1, dim);
            }
            stored.push(ids);
        }

        let mut edge_ids: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut cell_edges = Vec::with_capacity(stored.len());
        let mut cell_edge_signs = Vec::with_capacity(stored.len());
        for ids in &stored {
            let mut ce = [NONE; 6];
            let mut cs = [0.0; 6];
            for (e, &[a, b]) in local_edges(dim).iter().enumerate() {
                let (ga, gb) = (ids[a], ids[b]);
                let key = [ga.min(gb), ga.max(gb)];
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edges.len() - 1
                });
                ce[e] = id;
                cs[e] = if ga < gb { 1.0 } else { -1.0 };
            }
            cell_edges.push(ce);
            cell_edge_signs.push(cs);
        }

        let mut facet_ids: HashMap<[usize; 3], usize> = HashMap::new();
        let mut facets = Vec::new();
        let mut facet_cells: Vec<[usize; 2]> = Vec::new();
        let mut cell_facets = Vec::with_capacity(stored.len());
        let mut cell_facet_signs = Vec::with_capacity(stored.len());
        for (c, ids) in stored.iter().enumerate() {
            let mut cf = [NONE; 4];
            let mut cs = [0.0; 4];
            for i in 0..nv {
                let mut key = [NONE; 3];
                let mut k = 0;
                for (j, &g) in ids[..nv].iter().enumerate() {
                    if j != i {
                        key[k] = g;
                        k += 1;
                    }
                }
                key[..dim].sort_unstable();
                let id = match facet_ids.get(&key) {
                    Some(&id) => {
                        let slot = &mut facet_cells[id];
                        if slot[1] != NONE {
                            return Err(MeshError::NonManifold);
                        }
                        slot[1] = c;
                        id
                    }
                    None => {
                        facets.push(key);
                        facet_cells.push([c, NONE]);
                        facet_ids.insert(key, facets.len() - 1);
                        facets.len() - 1
                    }
                };
                cf[i] = id;
                let normal = global_facet_normal(dim, &vertices, &key);
                let outward = vertices[key[0]] - vertices[ids[i]];
                cs[i] = if normal.dot(&outward) > 0.0 { 1.0 } else { -1.0 };
            }
            cell_facets.push(cf);
            cell_facet_signs.push(cs);
        }

        let boundary_facet: Vec<bool> = facet_cells.iter().map(|fc| fc[1] == NONE).collect();
        let mut boundary_vertex = vec![false; vertices.len()];
        let mut boundary_edge = vec![false; edges.len()];
        for (f, key) in facets.iter().enumerate() {
            if !boundary_facet[f] {
                continue;
            }
            for &v in &key[..dim] {
                boundary_vertex[v] = true;
            }
            for a in 0..dim {
                for b in a + 1..dim {
                    boundary_edge[edge_ids[&[key[a], key[b]]]] = true;
                }
            }
        }

        Ok(SimplicialMesh {
            dim,
            vertices,
            cells: stored,
            edges,
            facets,
            cell_edges,
            cell_edge_signs,
            cell_facets,
            cell_facet_signs,
            facet_cells,
            boundary_vertex,
            boundary_edge,
            boundary_facet,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c][..=self.dim]
    }

    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    pub fn facet(&self, f: usize) -> &[usize] {
        &self.facets[f][..self.dim]
    }

    /// Global edges of cell `c` in the order of [`local_edges`].
    pub fn cell_edges(&self, c: usize) -> &[usize] {
        &self.cell_edges[c][..local_edges(self.dim).len()]
    }

    /// `+1` where the local edge direction matches the global one.
    pub fn cell_edge_signs(&self, c: usize) -> &[f64] {
        &self.cell_edge_signs[c][..local_edges(self.dim).len()]
    }

    /// Global facet opposite each local vertex of cell `c`.
    pub fn cell_facets(&self, c: usize) -> &[usize] {
        &self.cell_facets[c][..=self.dim]
    }

    /// `+1` where the local outward normal matches the global facet normal.
    pub fn cell_facet_signs(&self, c: usize) -> &[f64] {
        &self.cell_facet_signs[c][..=self.dim]
    }

    /// The one or two cells sharing facet `f`.
    pub fn facet_cells(&self, f: usize) -> (usize, Option<usize>) {
        let [a, b] = self.facet_cells[f];
        (a, (b != NONE).then_some(b))
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_edge[e]
    }

    pub fn is_boundary_facet(&self, f: usize) -> bool {
        self.boundary_facet[f]
    }

    pub fn cell_geometry(&self, c: usize) -> CellGeometry {
        let pts: Vec<Point> = self.cell(c).iter().map(|&v| self.vertices[v]).collect();
        CellGeometry::new(self.dim, &pts).expect("mesh cells are validated at construction")
    }

    /// Global facet normal scaled by the facet measure.
    pub fn facet_area_normal(&self, f: usize) -> Point {
        global_facet_normal(self.dim, &self.vertices, &self.facets[f])
    }

    /// Largest cell diameter.
    pub fn max_diameter(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_geometry(c).diameter()).fold(0.0, f64::max)
    }
}

fn global_facet_normal(dim: usize, vertices: &[Point], key: &[usize; 3]) -> Point {
    let a = vertices[key[0]];
    if dim == 2 {
        let t = vertices[key[1]] - a;
        Point::new(t.y, -t.x, 0.0)
    } else {
        (vertices[key[1]] - a).cross(&(vertices[key[2]] - a)) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_square() {
        let m = unit_square(1).unwrap();
        assert_eq!((m.n_vertices(), m.n_edges(), m.n_cells()), (4, 5, 2));
        assert_eq!(m.n_facets(), 5);
        let interior: Vec<usize> = (0..5).filter(|&f| !m.is_boundary_facet(f)).collect();
        assert_eq!(interior.len(), 1);
        assert!((0..4).all(|v| m.is_boundary_vertex(v)));
    }

    #[test]
    fn euler_characteristic() {
        for n in 1..4 {
            let m = unit_square(n).unwrap();
            assert_eq!(m.n_cells(), 2 * n * n);
            assert_eq!(m.n_vertices() as i64 - m.n_edges() as i64 + m.n_cells() as i64, 1);
            let m = unit_cube(n).unwrap();
            assert_eq!(m.n_cells(), 6 * n * n * n);
            assert_eq!(m.n_vertices(), (n + 1).pow(3));
            let chi = m.n_vertices() as i64 - m.n_edges() as i64 + m.n_facets() as i64
                - m.n_cells() as i64;
            assert_eq!(chi, 1);
        }
    }

    #[test]
    fn cells_are_positive_and_fill_the_domain() {
        for m in [unit_square(3).unwrap(), unit_cube(3).unwrap()] {
            let mut total = 0.0;
            for c in 0..m.n_cells() {
                let g = m.cell_geometry(c);
                assert!(g.signed_volume() > 0.0);
                total += g.volume();
            }
            assert!((total - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn interior_facets_have_opposite_signs() {
        let m = unit_cube(2).unwrap();
        for f in 0..m.n_facets() {
            let (a, b) = m.facet_cells(f);
            let Some(b) = b else { continue };
            let sign = |c: usize| {
                let i = m.cell_facets(c).iter().position(|&g| g == f).unwrap();
                m.cell_facet_signs(c)[i]
            };
            assert_eq!(sign(a), -sign(b));
        }
    }

    #[test]
    fn local_and_global_orientations_agree() {
        let m = unit_cube(2).unwrap();
        for c in 0..m.n_cells() {
            let g = m.cell_geometry(c);
            for (e, &[a, b]) in local_edges(3).iter().enumerate() {
                let ge = m.edge(m.cell_edges(c)[e]);
                let global = m.vertex(ge[1]) - m.vertex(ge[0]);
                let dot = g.edge_vector(a, b).dot(&global);
                assert_eq!(dot.signum(), m.cell_edge_signs(c)[e]);
            }
            for i in 0..4 {
                let f = m.cell_facets(c)[i];
                let dot = g.facet_area_normal(i).dot(&m.facet_area_normal(f));
                assert_eq!(dot.signum(), m.cell_facet_signs(c)[i]);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(unit_square(0).unwrap_err(), MeshError::ZeroResolution);
        let v = vec![Point::zeros(), Point::x(), Point::new(2.0, 0.0, 0.0)];
        assert_eq!(
            SimplicialMesh::new(2, v.clone(), &[vec![0, 1, 2]]).unwrap_err(),
            MeshError::DegenerateCell { cell: 0 }
        );
        assert!(matches!(
            SimplicialMesh::new(2, v, &[vec![0, 1, 7]]),
            Err(MeshError::BadVertex { .. })
        ));
    }

    #[test]
    fn reorients_negative_cells() {
        let v = vec![Point::zeros(), Point::y(), Point::x()];
        let m = SimplicialMesh::new(2, v, &[vec![0, 1, 2]]).unwrap();
        assert_eq!(m.cell(0), &[0, 2, 1]);
    }
}
