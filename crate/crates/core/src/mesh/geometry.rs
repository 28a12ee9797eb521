use nalgebra::{Matrix2, Matrix3, Vector2};

use super::{MeshError, Point};

/// Affine data of a single triangle or tetrahedron.
///
/// The vertex order is kept as given; `orientation` records the sign of the
/// volume so outward normals are correct either way.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    dim: usize,
    verts: [Point; 4],
    signed_volume: f64,
    grad_lambda: [Point; 4],
}

/// Relative volume below which a cell counts as degenerate.
const DEGENERACY: f64 = 1e-12;

impl CellGeometry {
    pub fn new(dim: usize, vertices: &[Point]) -> Result<CellGeometry, MeshError> {
        if !(dim == 2 || dim == 3) {
            return Err(MeshError::Dimension(dim));
        }
        if vertices.len() != dim + 1 {
            return Err(MeshError::CellArity { expected: dim + 1, got: vertices.len() });
        }
        let mut verts = [Point::zeros(); 4];
        verts[..=dim].copy_from_slice(vertices);
        let x0 = verts[0];
        let mut diam: f64 = 0.0;
        for i in 0..=dim {
            for j in i + 1..=dim {
                diam = diam.max((verts[j] - verts[i]).norm());
            }
        }
        let mut grad_lambda = [Point::zeros(); 4];
        let signed_volume = if dim == 2 {
            let b = Matrix2::new(
                verts[1].x - x0.x,
                verts[2].x - x0.x,
                verts[1].y - x0.y,
                verts[2].y - x0.y,
            );
            let det = b.determinant();
            if !(det.abs() > DEGENERACY * diam * diam) {
                return Err(MeshError::Degenerate);
            }
            let inv = b.try_inverse().ok_or(MeshError::Degenerate)?;
            for i in 0..2 {
                let row: Vector2<f64> = inv.row(i).transpose();
                grad_lambda[i + 1] = Point::new(row.x, row.y, 0.0);
            }
            det / 2.0
        } else {
            let b = Matrix3::from_columns(&[verts[1] - x0, verts[2] - x0, verts[3] - x0]);
            let det = b.determinant();
            if !(det.abs() > DEGENERACY * diam * diam * diam) {
                return Err(MeshError::Degenerate);
            }
            let inv = b.try_inverse().ok_or(MeshError::Degenerate)?;
            for i in 0..3 {
                grad_lambda[i + 1] = inv.row(i).transpose();
            }
            det / 6.0
        };
        grad_lambda[0] = -(1..=dim).map(|i| grad_lambda[i]).sum::<Point>();
        Ok(CellGeometry { dim, verts, signed_volume, grad_lambda })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.dim + 1
    }

    pub fn vertex(&self, i: usize) -> Point {
        self.verts[i]
    }

    pub fn vertices(&self) -> &[Point] {
        &self.verts[..=self.dim]
    }

    pub fn volume(&self) -> f64 {
        self.signed_volume.abs()
    }

    pub fn signed_volume(&self) -> f64 {
        self.signed_volume
    }

    /// `+1` for counter-clockwise triangles and right-handed tetrahedra.
    pub fn orientation(&self) -> f64 {
        self.signed_volume.signum()
    }

    pub fn barycenter(&self) -> Point {
        self.vertices().iter().sum::<Point>() / (self.dim + 1) as f64
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..=self.dim {
            for j in i + 1..=self.dim {
                d = d.max(self.edge_vector(i, j).norm());
            }
        }
        d
    }

    pub fn grad_lambda(&self, i: usize) -> Point {
        self.grad_lambda[i]
    }

    pub fn barycentric(&self, x: &Point) -> [f64; 4] {
        let mut l = [0.0; 4];
        let d = x - self.verts[0];
        for i in 1..=self.dim {
            l[i] = self.grad_lambda[i].dot(&d);
        }
        l[0] = 1.0 - l[1..=self.dim].iter().sum::<f64>();
        l
    }

    pub fn point_from_barycentric(&self, lambda: &[f64]) -> Point {
        self.vertices().iter().zip(lambda).map(|(v, l)| v * *l).sum()
    }

    pub fn edge_vector(&self, i: usize, j: usize) -> Point {
        self.verts[j] - self.verts[i]
    }

    /// Local vertices of the facet opposite vertex `i`, ascending.
    pub fn facet_vertices(&self, i: usize) -> Vec<usize> {
        (0..=self.dim).filter(|&v| v != i).collect()
    }

    /// Outward normal of the facet opposite vertex `i`, scaled by its measure.
    pub fn facet_area_normal(&self, i: usize) -> Point {
        let f = self.facet_vertices(i);
        let a = self.verts[f[0]];
        let n = if self.dim == 2 {
            let t = self.verts[f[1]] - a;
            Point::new(t.y, -t.x, 0.0)
        } else {
            (self.verts[f[1]] - a).cross(&(self.verts[f[2]] - a)) / 2.0
        };
        if n.dot(&(a - self.verts[i])) < 0.0 {
            -n
        } else {
            n
        }
    }

    pub fn facet_normal(&self, i: usize) -> Point {
        self.facet_area_normal(i).normalize()
    }

    pub fn facet_measure(&self, i: usize) -> f64 {
        self.facet_area_normal(i).norm()
    }

    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        self.barycentric(x)[..=self.dim].iter().all(|&l| l >= -tol)
    }
}

/// Local edges of a triangle or tetrahedron as pairs of local vertices.
pub fn local_edges(dim: usize) -> &'static [[usize; 2]] {
    const TRI: [[usize; 2]; 3] = [[0, 1], [0, 2], [1, 2]];
    const TET: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
    if dim == 2 {
        &TRI
    } else {
        &TET
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_tet() -> CellGeometry {
        CellGeometry::new(
            3,
            &[Point::zeros(), Point::x(), Point::y(), Point::z()],
        )
        .unwrap()
    }

    #[test]
    fn reference_tet_data() {
        let t = reference_tet();
        assert!((t.volume() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(t.orientation(), 1.0);
        let l = t.barycentric(&Point::new(0.1, 0.2, 0.3));
        assert!((l[0] - 0.4).abs() < 1e-15 && (l[3] - 0.3).abs() < 1e-15);
        // outward normal opposite the origin points along (1, 1, 1)
        let n = t.facet_normal(0);
        assert!((n - Point::new(1.0, 1.0, 1.0).normalize()).norm() < 1e-15);
        assert!((t.facet_measure(0) - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((t.facet_normal(1) + Point::x()).norm() < 1e-15);
    }

    #[test]
    fn area_normals_close_up() {
        let t = CellGeometry::new(
            3,
            &[
                Point::new(0.3, 0.1, 0.0),
                Point::new(0.1, 1.0, 0.2),
                Point::new(1.2, 0.2, 0.1),
                Point::new(0.4, 0.5, 0.9),
            ],
        )
        .unwrap();
        assert_eq!(t.orientation(), -1.0);
        let s: Point = (0..4).map(|i| t.facet_area_normal(i)).sum();
        assert!(s.norm() < 1e-14);
        for i in 0..4 {
            let out = t.facet_area_normal(i).dot(&(t.barycenter() - t.vertex(i)));
            assert!(out > 0.0);
        }
    }

    #[test]
    fn degenerate_is_rejected() {
        let flat = [Point::zeros(), Point::x(), Point::y(), Point::new(1.0, 1.0, 0.0)];
        assert_eq!(CellGeometry::new(3, &flat), Err(MeshError::Degenerate));
        let line = [Point::zeros(), Point::x(), Point::new(2.0, 0.0, 0.0)];
        assert_eq!(CellGeometry::new(2, &line), Err(MeshError::Degenerate));
    }
}
