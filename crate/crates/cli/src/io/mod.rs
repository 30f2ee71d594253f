//! File formats: Matrix Market matrices, text vectors and meshes.

mod mesh;
mod mtx;
mod vector;

pub use mesh::{format_mesh, parse_mesh, read_mesh, write_mesh, MESH_HEADER};
pub use mtx::{format_matrix_market, parse_matrix_market, read_matrix_market, write_matrix_market};
pub use vector::{format_vector, parse_vector, read_vector, write_vector};
