//! Two-dimensional Neumann solver on the unit disk.
//!
//! Linear finite elements on a structured polar mesh discretize
//! −Δu = λ·w·u with natural boundary conditions, for a prescribed positive
//! vertex weight w. The submodules split the pipeline: `mesh` builds the
//! triangulation, `assemble` produces the stiffness/mass pair in CSR form,
//! `circulant` supplies an FFT-diagonalizable preconditioner, and `eigen`
//! runs the shift-inverted subspace iteration.

pub mod assemble;
pub mod circulant;
pub mod eigen;
pub mod mesh;

pub use eigen::{solve_neumann, MeshEigenResult};
pub use mesh::DiskMesh;
