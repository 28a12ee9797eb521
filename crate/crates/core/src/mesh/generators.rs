use super::{MeshError, Point, SimplicialMesh};

/// Uniform mesh of the unit square with `2 n^2` triangles; every sub-square
/// is split along its lower-left to upper-right diagonal.
pub fn unit_square(n: usize) -> Result<SimplicialMesh, MeshError> {
    if n == 0 {
        return Err(MeshError::ZeroResolution);
    }
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point::new(i as f64 * h, j as f64 * h, 0.0));
        }
    }
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            cells.push(vec![a, b, d]);
            cells.push(vec![a, d, c]);
        }
    }
    SimplicialMesh::new(2, vertices, &cells)
}

/// Uniform mesh of the unit cube with `6 n^3` tetrahedra (Kuhn split: every
/// sub-cube is cut into six tetrahedra sharing its main diagonal).
pub fn unit_cube(n: usize) -> Result<SimplicialMesh, MeshError> {
    if n == 0 {
        return Err(MeshError::ZeroResolution);
    }
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1).pow(3));
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                vertices.push(Point::new(i as f64 * h, j as f64 * h, k as f64 * h));
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for p in PERMS {
                    let mut pos = [i, j, k];
                    let mut cell = vec![id(i, j, k)];
                    for axis in p {
                        pos[axis] += 1;
                        cell.push(id(pos[0], pos[1], pos[2]));
                    }
                    cells.push(cell);
                }
            }
        }
    }
    SimplicialMesh::new(3, vertices, &cells)
}
