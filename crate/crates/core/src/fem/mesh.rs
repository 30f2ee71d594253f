use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::Domain;
use crate::{Error, Result};
use num_traits::Float;

/// Conforming triangulation of a polygonal domain.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TriMesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// `true` for vertices on the domain boundary.
    pub boundary: Vec<bool>,
    /// Mean length of the unique edges.
    pub h_bar: f64,
    pub domain: Domain,
}

/// Twice the signed area of the triangle `a, b, c`.
pub(crate) fn signed_area2(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    Float::hypot(a[0] - b[0], a[1] - b[1])
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TriMesh {
    /// Validates the triangles and marks as boundary every vertex on an edge
    /// that belongs to a single triangle.
    pub fn new(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>, domain: Domain) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::DegenerateMesh("no triangles"));
        }
        if vertices.iter().any(|v| !(v[0].is_finite() && v[1].is_finite())) {
            return Err(Error::NonFinite);
        }
        let mut mesh = Self { boundary: vec![false; vertices.len()], vertices, triangles, h_bar: 0.0, domain };
        for t in &mesh.triangles {
            if t.iter().any(|&i| i >= mesh.vertices.len()) {
                return Err(Error::DegenerateMesh("triangle references a missing vertex"));
            }
        }
        mesh.check_orientation()?;
        for ((a, b), count) in mesh.edge_counts() {
            match count {
                1 => {
                    mesh.boundary[a] = true;
                    mesh.boundary[b] = true;
                }
                2 => {}
                _ => return Err(Error::DegenerateMesh("edge shared by more than two triangles")),
            }
        }
        mesh.h_bar = mesh.avg_edge_length();
        Ok(mesh)
    }

    fn check_orientation(&self) -> Result<()> {
        if self.triangles.iter().all(|&t| self.area(t) > 0.0) {
            Ok(())
        } else {
            Err(Error::DegenerateMesh("triangle with non-positive area"))
        }
    }

    fn edge_counts(&self) -> BTreeMap<(usize, usize), usize> {
        let mut counts = BTreeMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                *counts.entry(edge_key(t[k], t[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        counts
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_boundary(&self) -> usize {
        self.boundary.iter().filter(|&&b| b).count()
    }

    /// Indices of the vertices not on the boundary, in increasing order.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&i| !self.boundary[i]).collect()
    }

    pub fn area(&self, t: [usize; 3]) -> f64 {
        0.5 * signed_area2(self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]])
    }

    pub fn total_area(&self) -> f64 {
        self.triangles.iter().map(|&t| self.area(t)).sum()
    }

    /// Unique edges as sorted index pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.edge_counts().into_keys().collect()
    }

    pub fn avg_edge_length(&self) -> f64 {
        let edges = self.edges();
        let total: f64 = edges.iter().map(|&(a, b)| dist(self.vertices[a], self.vertices[b])).sum();
        total / edges.len() as f64
    }

    /// Splits every triangle into four through its edge midpoints.
    pub fn refine(&self) -> Result<Self> {
        let mut vertices = self.vertices.clone();
        let mut midpoint = BTreeMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<[f64; 2]>| -> usize {
            *midpoint.entry(edge_key(a, b)).or_insert_with(|| {
                let (p, q) = (vertices[a], vertices[b]);
                vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        Self::new(vertices, triangles, self.domain)
    }

    /// Moves each interior vertex to the mean of its neighbours, `sweeps`
    /// times. A sweep that would invert a triangle is undone and reported as
    /// [`Error::DegenerateMesh`]; earlier sweeps are kept.
    pub fn smooth(&mut self, sweeps: usize) -> Result<()> {
        let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for (a, b) in self.edges() {
            neighbours[a].push(b);
            neighbours[b].push(a);
        }
        for _ in 0..sweeps {
            let previous = self.vertices.clone();
            for i in 0..self.vertices.len() {
                if self.boundary[i] || neighbours[i].is_empty() {
                    continue;
                }
                let k = neighbours[i].len() as f64;
                let sx: f64 = neighbours[i].iter().map(|&j| previous[j][0]).sum();
                let sy: f64 = neighbours[i].iter().map(|&j| previous[j][1]).sum();
                self.vertices[i] = [sx / k, sy / k];
            }
            if self.check_orientation().is_err() {
                self.vertices = previous;
                self.h_bar = self.avg_edge_length();
                return Err(Error::DegenerateMesh("smoothing inverted a triangle"));
            }
        }
        self.h_bar = self.avg_edge_length();
        Ok(())
    }
}

/// Uniform triangulation of the unit square with `divisions` cells per side.
/// Each cell is split along a diagonal whose direction alternates in a
/// checkerboard pattern.
pub fn mesh_square(divisions: usize) -> Result<TriMesh> {
    if divisions < 2 {
        return Err(Error::InvalidArgument("square mesh needs at least two divisions"));
    }
    let n = divisions;
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                triangles.extend([[a, b, c], [a, c, d]]);
            } else {
                triangles.extend([[a, b, d], [b, c, d]]);
            }
        }
    }
    TriMesh::new(vertices, triangles, Domain::Square)
}

pub const STAR_POINTS: usize = 5;
pub const STAR_R_OUTER: f64 = 2.0;
pub const STAR_R_INNER: f64 = 0.8;
const STAR_SMOOTHING_SWEEPS: usize = 5;

/// Counterclockwise outline of a star centred at the origin, starting at the
/// outer tip on the positive `y` axis and alternating outer and inner radii.
pub fn star_outline(points: usize, r_outer: f64, r_inner: f64) -> Result<Vec<[f64; 2]>> {
    if points < 3 {
        return Err(Error::InvalidArgument("a star needs at least three points"));
    }
    if !(r_outer > r_inner && r_inner > 0.0 && r_outer.is_finite()) {
        return Err(Error::InvalidArgument("star radii must satisfy r_outer > r_inner > 0"));
    }
    let m = 2 * points;
    Ok((0..m)
        .map(|k| {
            let theta = 0.5 * PI + PI * k as f64 / points as f64;
            let r = if k % 2 == 0 { r_outer } else { r_inner };
            [r * Float::cos(theta), r * Float::sin(theta)]
        })
        .collect())
}

/// Star-shaped polygon triangulated by ear clipping, refined `refine` times
/// and smoothed with the boundary held fixed.
pub fn mesh_star(points: usize, r_outer: f64, r_inner: f64, refine: usize) -> Result<TriMesh> {
    let outline = star_outline(points, r_outer, r_inner)?;
    let triangles = ear_clip(&outline)?;
    let mut mesh = TriMesh::new(outline, triangles, Domain::Star)?;
    for _ in 0..refine {
        mesh = mesh.refine()?;
        // an inverting sweep is rolled back; the mesh stays valid
        let _ = mesh.smooth(STAR_SMOOTHING_SWEEPS);
    }
    Ok(mesh)
}

/// Minimum interior angle of a triangle, used to prefer well-shaped ears.
fn min_angle(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let angle = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| {
        let (u, v) = ([q[0] - p[0], q[1] - p[1]], [r[0] - p[0], r[1] - p[1]]);
        let cross = u[0] * v[1] - u[1] * v[0];
        let dot = u[0] * v[0] + u[1] * v[1];
        Float::atan2(cross.abs(), dot)
    };
    angle(a, b, c).min(angle(b, c, a)).min(angle(c, a, b))
}

fn inside_or_on(p: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> bool {
    signed_area2(a, b, p) >= 0.0 && signed_area2(b, c, p) >= 0.0 && signed_area2(c, a, p) >= 0.0
}

/// Ear clipping for a simple counterclockwise polygon. Among the available
/// ears the one with the largest minimum angle is cut first.
pub fn ear_clip(polygon: &[[f64; 2]]) -> Result<Vec<[usize; 3]>> {
    let n = polygon.len();
    if n < 3 {
        return Err(Error::DegenerateMesh("polygon needs three vertices"));
    }
    let area2: f64 = (0..n)
        .map(|i| {
            let (p, q) = (polygon[i], polygon[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum();
    if area2 <= 0.0 {
        return Err(Error::DegenerateMesh("polygon is not counterclockwise"));
    }
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut triangles = Vec::with_capacity(n - 2);
    while remaining.len() > 3 {
        let m = remaining.len();
        let mut best: Option<(usize, f64)> = None;
        for k in 0..m {
            let (ip, i, inx) = (remaining[(k + m - 1) % m], remaining[k], remaining[(k + 1) % m]);
            let (a, b, c) = (polygon[ip], polygon[i], polygon[inx]);
            if signed_area2(a, b, c) <= 0.0 {
                continue;
            }
            let blocked = remaining
                .iter()
                .filter(|&&j| j != ip && j != i && j != inx)
                .any(|&j| inside_or_on(polygon[j], a, b, c));
            if blocked {
                continue;
            }
            let q = min_angle(a, b, c);
            if best.is_none_or(|(_, bq)| q > bq) {
                best = Some((k, q));
            }
        }
        let (k, _) = best.ok_or(Error::DegenerateMesh("no ear found; polygon is not simple"))?;
        triangles.push([remaining[(k + m - 1) % m], remaining[k], remaining[(k + 1) % m]]);
        remaining.remove(k);
    }
    triangles.push([remaining[0], remaining[1], remaining[2]]);
    Ok(triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn seg_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
        dist(p, [a[0] + t * dx, a[1] + t * dy])
    }

    #[test]
    fn square_counts_and_areas() {
        assert!(mesh_square(1).is_err());
        let m = mesh_square(2).unwrap();
        assert_eq!((m.num_vertices(), m.num_triangles(), m.num_boundary()), (9, 8, 8));
        assert_eq!(m.interior(), vec![4]);
        for n in [2, 3, 7] {
            let m = mesh_square(n).unwrap();
            for &t in &m.triangles {
                assert!((m.area(t) - 1.0 / (2.0 * (n * n) as f64)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn square_boundary_flags_match_geometry() {
        let m = mesh_square(6).unwrap();
        for (v, &b) in m.vertices.iter().zip(&m.boundary) {
            let on_edge = v[0] == 0.0 || v[0] == 1.0 || v[1] == 0.0 || v[1] == 1.0;
            assert_eq!(on_edge, b);
        }
    }

    #[test]
    fn square_h_bar_by_edge_enumeration() {
        for n in [2usize, 5] {
            let m = mesh_square(n).unwrap();
            // independent count: axis edges 2 n (n + 1), one diagonal per cell
            let h = 1.0 / n as f64;
            let axis = 2 * n * (n + 1);
            let diag = n * n;
            let expected = (axis as f64 * h + diag as f64 * h * 2.0_f64.sqrt()) / (axis + diag) as f64;
            assert!((m.h_bar - expected).abs() < 1e-14);
            let brute: BTreeSet<(usize, usize)> =
                m.triangles.iter().flat_map(|t| (0..3).map(move |k| edge_key(t[k], t[(k + 1) % 3]))).collect();
            assert_eq!(brute.len(), axis + diag);
        }
    }

    #[test]
    fn single_triangle_mean_edge() {
        let m = TriMesh::new(vec![[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]], vec![[0, 1, 2]], Domain::Square).unwrap();
        assert!((m.avg_edge_length() - 4.0).abs() < 1e-15);
        assert_eq!(m.num_boundary(), 3);
        assert!(TriMesh::new(vec![[0.0, 0.0], [0.0, 4.0], [3.0, 0.0]], vec![[0, 1, 2]], Domain::Square).is_err());
    }

    #[test]
    fn refinement_quadruples_and_halves() {
        let m = mesh_square(3).unwrap();
        let r = m.refine().unwrap();
        assert_eq!(r.num_triangles(), 4 * m.num_triangles());
        // boundary edges are counted once but interior edges twice by the
        // midsegments, so the halving is exact only up to that weighting
        let ratio = r.h_bar / m.h_bar;
        assert!((ratio - 0.5).abs() < 0.01, "{ratio}");
        // exact: old edges split in two, plus three midsegments per triangle
        let len = |a: usize, b: usize| dist(m.vertices[a], m.vertices[b]);
        let edge_sum: f64 = m.edges().iter().map(|&(a, b)| len(a, b)).sum();
        let perimeters: f64 = m.triangles.iter().map(|t| len(t[0], t[1]) + len(t[1], t[2]) + len(t[2], t[0])).sum();
        let count = 2 * m.edges().len() + 3 * m.num_triangles();
        assert!((r.h_bar - (edge_sum + 0.5 * perimeters) / count as f64).abs() < 1e-14);
        let fine = mesh_square(6).unwrap();
        assert_eq!(r.num_vertices(), fine.num_vertices());
        assert_eq!(r.num_boundary(), fine.num_boundary());
    }

    #[test]
    fn star_with_three_points() {
        let m = mesh_star(3, 2.0, 0.8, 0).unwrap();
        assert_eq!(m.num_vertices(), 6);
        assert_eq!(m.num_triangles(), 4);
        assert!(m.boundary.iter().all(|&b| b));
        let area = 6.0 * 0.5 * 2.0 * 0.8 * (PI / 3.0).sin();
        assert!((m.total_area() - area).abs() < 1e-12);
    }

    #[test]
    fn star_refinement_keeps_boundary_on_outline() {
        let outline = star_outline(5, 2.0, 0.8).unwrap();
        let base = mesh_star(5, 2.0, 0.8, 0).unwrap();
        assert_eq!(base.num_triangles(), 8);
        for refine in 1..=3 {
            let m = mesh_star(5, 2.0, 0.8, refine).unwrap();
            assert_eq!(m.num_triangles(), 8 * 4usize.pow(refine as u32));
            assert!(m.triangles.iter().all(|&t| m.area(t) > 0.0));
            assert!((m.total_area() - base.total_area()).abs() < 1e-10);
            for (v, &b) in m.vertices.iter().zip(&m.boundary) {
                let d = (0..outline.len())
                    .map(|k| seg_distance(*v, outline[k], outline[(k + 1) % outline.len()]))
                    .fold(f64::INFINITY, f64::min);
                if b {
                    assert!(d <= 1e-12);
                } else {
                    assert!(d > 1e-6);
                }
            }
        }
    }

    #[test]
    fn smoothing_improves_or_keeps_validity() {
        let mut m = mesh_star(5, 2.0, 0.8, 2).unwrap();
        let boundary_before: Vec<[f64; 2]> =
            (0..m.num_vertices()).filter(|&i| m.boundary[i]).map(|i| m.vertices[i]).collect();
        let _ = m.smooth(10);
        let boundary_after: Vec<[f64; 2]> =
            (0..m.num_vertices()).filter(|&i| m.boundary[i]).map(|i| m.vertices[i]).collect();
        assert_eq!(boundary_before, boundary_after);
        assert!(m.triangles.iter().all(|&t| m.area(t) > 0.0));
    }

    #[test]
    fn bad_star_parameters() {
        assert!(mesh_star(2, 2.0, 0.8, 0).is_err());
        assert!(mesh_star(5, 0.8, 2.0, 0).is_err());
        assert!(mesh_star(5, 2.0, 0.0, 0).is_err());
    }
}
