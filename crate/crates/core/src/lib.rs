//! Lowest-order exponentially-fitted finite elements for convection-diffusion
//! problems in H(grad), H(curl) and H(div) on triangles and tetrahedra.

pub mod bernoulli;
pub mod quadrature;
pub mod mesh;
pub mod elements;
pub mod expfit;
pub mod solver;
pub mod harness;
