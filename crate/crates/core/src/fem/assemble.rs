use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::mesh::signed_area2;
use super::{mesh_square, mesh_star, Domain, TriMesh, STAR_POINTS, STAR_R_INNER, STAR_R_OUTER};
use crate::linalg::SparseMatrix;
use crate::{Error, Result};
use num_traits::Float;

/// Mass and stiffness matrices on the interior vertices together with the
/// interpolated initial condition.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub m: SparseMatrix<f64>,
    /// Diffusion plus advection, signed so that `M u' = K u`.
    pub k: SparseMatrix<f64>,
    pub b0: Vec<f64>,
    pub mesh: TriMesh,
    /// Mesh vertex of each unknown.
    pub interior: Vec<usize>,
    pub d: f64,
    pub c: [f64; 2],
}

impl AssembledSystem {
    pub fn dim(&self) -> usize {
        self.interior.len()
    }

    pub fn h_bar(&self) -> f64 {
        self.mesh.h_bar
    }
}

/// `|T| / 12 * [[2, 1, 1], [1, 2, 1], [1, 1, 2]]` for a triangle of area `area`.
pub fn element_mass(area: f64) -> [[f64; 3]; 3] {
    let (d, o) = (area / 6.0, area / 12.0);
    [[d, o, o], [o, d, o], [o, o, d]]
}

type Local = [[f64; 3]; 3];

/// Element matrices `(mass, operator)` where the operator entry `(i, j)` is
/// `-d (grad phi_i, grad phi_j) + (phi_i, c · grad phi_j)`.
fn element(p: [[f64; 2]; 3], d: f64, c: [f64; 2]) -> Result<(Local, Local)> {
    let area2 = signed_area2(p[0], p[1], p[2]);
    if area2.is_nan() || area2 <= 0.0 {
        return Err(Error::DegenerateMesh("triangle with non-positive area"));
    }
    let area = 0.5 * area2;
    let grad: [[f64; 2]; 3] = core::array::from_fn(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        [(p[j][1] - p[k][1]) / area2, (p[k][0] - p[j][0]) / area2]
    });
    let mut op = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let diffusion = area * (grad[i][0] * grad[j][0] + grad[i][1] * grad[j][1]);
            let advection = area / 3.0 * (c[0] * grad[j][0] + c[1] * grad[j][1]);
            op[i][j] = -d * diffusion + advection;
        }
    }
    Ok((element_mass(area), op))
}

/// Mass and operator matrices over all vertices, before boundary conditions.
pub fn assemble_full(mesh: &TriMesh, d: f64, c: [f64; 2]) -> Result<(SparseMatrix<f64>, SparseMatrix<f64>)> {
    let n = mesh.num_vertices();
    let mut mt = Vec::with_capacity(9 * mesh.num_triangles());
    let mut kt = Vec::with_capacity(9 * mesh.num_triangles());
    for &t in &mesh.triangles {
        let (me, ke) = element(t.map(|i| mesh.vertices[i]), d, c)?;
        for i in 0..3 {
            for j in 0..3 {
                mt.push((t[i], t[j], me[i][j]));
                kt.push((t[i], t[j], ke[i][j]));
            }
        }
    }
    Ok((SparseMatrix::from_triplets(n, n, &mt)?, SparseMatrix::from_triplets(n, n, &kt)?))
}

/// Galerkin P1 system with the boundary unknowns eliminated.
pub fn assemble_p1(mesh: &TriMesh, d: f64, c: [f64; 2]) -> Result<AssembledSystem> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidArgument("diffusion coefficient must be positive"));
    }
    if !(c[0].is_finite() && c[1].is_finite()) {
        return Err(Error::NonFinite);
    }
    let interior = mesh.interior();
    if interior.is_empty() {
        return Err(Error::DegenerateMesh("mesh has no interior vertices"));
    }
    let mut index = vec![usize::MAX; mesh.num_vertices()];
    for (k, &v) in interior.iter().enumerate() {
        index[v] = k;
    }
    let (mf, kf) = assemble_full(mesh, d, c)?;
    let restrict = |a: &SparseMatrix<f64>| -> Result<SparseMatrix<f64>> {
        let t: Vec<(usize, usize, f64)> = a
            .triplets()
            .into_iter()
            .filter(|&(i, j, _)| index[i] != usize::MAX && index[j] != usize::MAX)
            .map(|(i, j, v)| (index[i], index[j], v))
            .collect();
        SparseMatrix::from_triplets(interior.len(), interior.len(), &t)
    };
    let b0 = initial_vector(mesh, mesh.domain);
    Ok(AssembledSystem { m: restrict(&mf)?, k: restrict(&kf)?, b0, mesh: mesh.clone(), interior, d, c })
}

/// Initial condition of the test problems at `(x, y)`.
pub fn initial_value(domain: Domain, x: f64, y: f64) -> f64 {
    let (u, v) = match domain {
        Domain::Square => (x - 0.5, y - 0.5),
        Domain::Star => (0.5 * x, 0.5 * y),
    };
    Float::exp(-Float::sinh(70.0 * Float::powi(u, 4)) - Float::sinh(70.0 * Float::powi(v, 4)))
}

/// Nodal interpolation of the initial condition at the interior vertices.
pub fn initial_vector(mesh: &TriMesh, domain: Domain) -> Vec<f64> {
    mesh.interior().into_iter().map(|i| initial_value(domain, mesh.vertices[i][0], mesh.vertices[i][1])).collect()
}

/// Parameters of a generated test system.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ProblemSpec {
    pub domain: Domain,
    /// Cells per side of the square mesh.
    pub divisions: usize,
    /// Refinement rounds of the star mesh.
    pub refine: usize,
    pub star_points: usize,
    pub r_outer: f64,
    pub r_inner: f64,
    pub d: f64,
    pub c: [f64; 2],
}

impl ProblemSpec {
    pub fn square(divisions: usize, d: f64) -> Self {
        Self { domain: Domain::Square, divisions, ..Self::star(0, d) }
    }

    pub fn star(refine: usize, d: f64) -> Self {
        Self {
            domain: Domain::Star,
            divisions: 0,
            refine,
            star_points: STAR_POINTS,
            r_outer: STAR_R_OUTER,
            r_inner: STAR_R_INNER,
            d,
            c: [1.0, 1.0],
        }
    }

    pub fn mesh(&self) -> Result<TriMesh> {
        match self.domain {
            Domain::Square => mesh_square(self.divisions),
            Domain::Star => mesh_star(self.star_points, self.r_outer, self.r_inner, self.refine),
        }
    }
}

/// Meshes and assembles a test problem.
pub fn generate(spec: &ProblemSpec) -> Result<AssembledSystem> {
    assemble_p1(&spec.mesh()?, spec.d, spec.c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dense_sym_eig, CholeskyFactor, DenseMatrix};
    use crate::spectral::{extreme_eigs_sym_pencil, EigenOptions};

    fn sym_part(k: &SparseMatrix<f64>) -> DenseMatrix<f64> {
        let a = k.to_dense();
        DenseMatrix::from_fn(a.rows(), a.cols(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
    }

    #[test]
    fn reference_triangle_mass() {
        let (me, _) = element([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], 1.0, [0.0, 0.0]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 2.0 / 24.0 } else { 1.0 / 24.0 };
                assert!((me[i][j] - expected).abs() < 1e-16);
            }
        }
    }

    #[test]
    fn reference_triangle_stiffness_and_advection() {
        // grad phi = (-1,-1), (1,0), (0,1) on the reference triangle
        let (_, ke) = element([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], 1.0, [0.0, 0.0]).unwrap();
        let lap = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((ke[i][j] + lap[i][j]).abs() < 1e-15);
            }
        }
        let (_, ka) = element([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], 1e-30, [2.0, 3.0]).unwrap();
        let cg = [-5.0, 2.0, 3.0];
        for i in 0..3 {
            for j in 0..3 {
                assert!((ka[i][j] - cg[j] / 6.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn mass_sums_to_domain_area() {
        for mesh in [mesh_square(7).unwrap(), mesh_star(5, 2.0, 0.8, 2).unwrap()] {
            let (m, k) = assemble_full(&mesh, 0.1, [1.0, 1.0]).unwrap();
            assert!((m.total() - mesh.total_area()).abs() < 1e-10);
            // constants are in the kernel of the full operator
            let ones = vec![1.0; mesh.num_vertices()];
            assert!(k.matvec(&ones).unwrap().iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn pure_diffusion_is_symmetric_negative_definite() {
        let s = assemble_p1(&mesh_square(6).unwrap(), 0.5, [0.0, 0.0]).unwrap();
        assert!(s.k.symmetry_defect() < 1e-14);
        assert!(dense_sym_eig(&s.k.to_dense()).unwrap().max() < 0.0);
    }

    #[test]
    fn advection_only_changes_skew_part() {
        let mesh = mesh_square(8).unwrap();
        let pure = assemble_p1(&mesh, 0.1, [0.0, 0.0]).unwrap();
        let adv = assemble_p1(&mesh, 0.1, [1.0, 1.0]).unwrap();
        let dp = sym_part(&pure.k);
        let da = sym_part(&adv.k);
        assert!(da.combine(1.0, &dp, -1.0).unwrap().max_abs() < 1e-14);
        assert!(dense_sym_eig(&da).unwrap().max() < 0.0);
        assert!(adv.k.symmetry_defect() > 1e-3);
    }

    #[test]
    fn star_system_properties() {
        let s = generate(&ProblemSpec::star(2, 1e-3)).unwrap();
        assert!(CholeskyFactor::sparse(&s.m).is_ok());
        assert!(dense_sym_eig(&sym_part(&s.k)).unwrap().max() < 0.0);
        assert_eq!(s.b0.len(), s.dim());
    }

    #[test]
    fn square_mass_condition_is_near_four() {
        for n in [10, 20] {
            let s = generate(&ProblemSpec::square(n, 0.1)).unwrap();
            assert_eq!(s.dim(), (n - 1) * (n - 1));
            let e = dense_sym_eig(&s.m.to_dense()).unwrap();
            let kappa = e.max() / e.min();
            assert!((3.0..=6.0).contains(&kappa), "{kappa}");
        }
    }

    #[test]
    fn laplacian_eigenvalue_converges() {
        let d = 0.3;
        let s = assemble_p1(&mesh_square(64).unwrap(), d, [0.0, 0.0]).unwrap();
        let opts = EigenOptions { rel_resid_tol: 1e-8, ..Default::default() };
        let (lo, _) = extreme_eigs_sym_pencil(&s.k.scale(-1.0), &s.m, &opts).unwrap();
        let exact = 2.0 * core::f64::consts::PI.powi(2) * d;
        assert!((lo.value - exact).abs() <= 0.05 * exact, "{} vs {exact}", lo.value);
    }

    #[test]
    fn initial_values() {
        assert_eq!(initial_value(Domain::Square, 0.5, 0.5), 1.0);
        assert_eq!(initial_value(Domain::Star, 0.0, 0.0), 1.0);
        let edge = initial_value(Domain::Square, 0.0, 0.5);
        let expected = (-(4.375_f64).sinh()).exp();
        assert!((edge - expected).abs() <= 1e-15 * expected);
        assert!((edge / 5.8e-18 - 1.0).abs() < 0.05);
    }

    #[test]
    fn rejects_bad_input() {
        let mesh = mesh_square(3).unwrap();
        assert!(assemble_p1(&mesh, 0.0, [1.0, 1.0]).is_err());
        assert!(assemble_p1(&mesh_star(3, 2.0, 0.8, 0).unwrap(), 1.0, [1.0, 1.0]).is_err());
    }
}
