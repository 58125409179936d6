//! Broken continuous-P1 space.
//!
//! Fields are piecewise linear and continuous within each region, with
//! independent unknowns on the two sides of the interface: every interface
//! vertex owns two degrees of freedom, one per region, and the jump of a
//! field along an interface edge is the linear interpolant of the region-2
//! trace minus the region-1 trace. Gradients are taken per triangle and
//! never across the interface.
//!
//! Dirichlet data is handled by lifting: problems are solved for the
//! correction `p` with `field = lift + p`, where `p` vanishes on the
//! Dirichlet degrees of freedom and the lift has no interface jump.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::mesh::{BoundaryMarker, InterfaceMesh, Region};
use crate::vec2::Vec2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpaceError {
    CoefficientCountMismatch { expected: usize, got: usize },
    NonFiniteCoefficient { dof: usize },
    /// Field does not satisfy its Dirichlet constraints.
    ConstraintViolated { dof: usize },
}

impl core::fmt::Display for SpaceError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SpaceError::CoefficientCountMismatch { expected, got } => {
                write!(f, "expected {expected} coefficients, got {got}")
            }
            SpaceError::NonFiniteCoefficient { dof } => {
                write!(f, "non-finite coefficient at dof {dof}")
            }
            SpaceError::ConstraintViolated { dof } => {
                write!(f, "Dirichlet constraint violated at dof {dof}")
            }
        }
    }
}

impl core::error::Error for SpaceError {}

/// Degree-of-freedom layout over an interface mesh.
///
/// Non-interface vertices own the dof with their own index; interface
/// vertices keep their index for the region-1 side and take
/// `n_vertices + rank` for the region-2 side, with ranks assigned in vertex
/// order. Total count is `n_vertices + n_interface_vertices`.
#[derive(Debug)]
pub struct BrokenSpace {
    mesh: Arc<InterfaceMesh>,
    /// rank of each interface vertex, dense map over vertices.
    interface_rank: Vec<Option<usize>>,
    n_dofs: usize,
    dirichlet_a: Vec<usize>,
    dirichlet_b: Vec<usize>,
    /// dof → position among free dofs.
    free_index: Vec<Option<usize>>,
    /// position among free dofs → dof.
    free_dofs: Vec<usize>,
}

impl BrokenSpace {
    pub fn new(mesh: Arc<InterfaceMesh>) -> Arc<Self> {
        let nv = mesh.vertices().len();
        let mut interface_rank = vec![None; nv];
        for (rank, v) in mesh.interface_vertices().into_iter().enumerate() {
            interface_rank[v] = Some(rank);
        }
        let n_interface = interface_rank.iter().filter(|r| r.is_some()).count();
        let n_dofs = nv + n_interface;

        let dof_of = |vertex: usize, region: Region| -> usize {
            match (region, interface_rank[vertex]) {
                (Region::Omega2, Some(rank)) => nv + rank,
                _ => vertex,
            }
        };

        let mut dirichlet_a = Vec::new();
        let mut dirichlet_b = Vec::new();
        for (e, edge) in mesh.boundary_edges().iter().enumerate() {
            let region = mesh.triangles()[mesh.boundary_edge_triangle(e)].region;
            let bucket = match edge.marker {
                BoundaryMarker::DirichletA => &mut dirichlet_a,
                BoundaryMarker::DirichletB => &mut dirichlet_b,
                BoundaryMarker::Neumann => continue,
            };
            for v in edge.vertices {
                bucket.push(dof_of(v, region));
            }
        }
        dirichlet_a.sort_unstable();
        dirichlet_a.dedup();
        dirichlet_b.sort_unstable();
        dirichlet_b.dedup();

        let mut free_index = vec![None; n_dofs];
        let mut constrained = vec![false; n_dofs];
        for &d in dirichlet_a.iter().chain(dirichlet_b.iter()) {
            constrained[d] = true;
        }
        let mut free_dofs = Vec::with_capacity(n_dofs);
        for d in 0..n_dofs {
            if !constrained[d] {
                free_index[d] = Some(free_dofs.len());
                free_dofs.push(d);
            }
        }

        Arc::new(BrokenSpace {
            mesh,
            interface_rank,
            n_dofs,
            dirichlet_a,
            dirichlet_b,
            free_index,
            free_dofs,
        })
    }

    pub fn mesh(&self) -> &InterfaceMesh {
        &self.mesh
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn n_free(&self) -> usize {
        self.free_dofs.len()
    }

    pub fn dof(&self, vertex: usize, region: Region) -> usize {
        match (region, self.interface_rank[vertex]) {
            (Region::Omega2, Some(rank)) => self.mesh.vertices().len() + rank,
            _ => vertex,
        }
    }

    /// The three dofs a triangle reads, on its own region side.
    pub fn triangle_dofs(&self, t: usize) -> [usize; 3] {
        let tri = self.mesh.triangles()[t];
        [
            self.dof(tri.vertices[0], tri.region),
            self.dof(tri.vertices[1], tri.region),
            self.dof(tri.vertices[2], tri.region),
        ]
    }

    /// Per-side dofs of an interface edge: `(region-1 pair, region-2 pair)`,
    /// both in edge-vertex order.
    pub fn edge_side_dofs(&self, e: usize) -> ([usize; 2], [usize; 2]) {
        let [a, b] = self.mesh.interface_edges()[e].vertices;
        (
            [self.dof(a, Region::Omega1), self.dof(b, Region::Omega1)],
            [self.dof(a, Region::Omega2), self.dof(b, Region::Omega2)],
        )
    }

    pub fn dirichlet_a_dofs(&self) -> &[usize] {
        &self.dirichlet_a
    }

    pub fn dirichlet_b_dofs(&self) -> &[usize] {
        &self.dirichlet_b
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.free_index[dof].is_none()
    }

    pub fn free_index(&self, dof: usize) -> Option<usize> {
        self.free_index[dof]
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free_dofs
    }

    /// Scatters a free-dof vector into a full field, zero on constrained
    /// dofs.
    pub fn field_from_free(self: &Arc<Self>, free: &[f64]) -> Result<BrokenField, SpaceError> {
        if free.len() != self.free_dofs.len() {
            return Err(SpaceError::CoefficientCountMismatch {
                expected: self.free_dofs.len(),
                got: free.len(),
            });
        }
        let mut coeffs = vec![0.0; self.n_dofs];
        for (k, &d) in self.free_dofs.iter().enumerate() {
            coeffs[d] = free[k];
        }
        BrokenField::from_coefficients(Arc::clone(self), coeffs)
    }

    /// A lift of the boundary data: linear blend in x between the prescribed
    /// values (exact on slab geometry), overwritten to the exact values on
    /// the Dirichlet dofs. Interface vertices get the same value on both
    /// sides, so the lift never jumps.
    pub fn lift_dirichlet(self: &Arc<Self>, value_a: f64, value_b: f64) -> BrokenField {
        let vs = self.mesh.vertices();
        let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in vs {
            x_min = x_min.min(p.x);
            x_max = x_max.max(p.x);
        }
        let width = x_max - x_min;
        let mut coeffs = vec![0.0; self.n_dofs];
        for (v, p) in vs.iter().enumerate() {
            let blend = if width > 0.0 {
                value_a + (value_b - value_a) * (p.x - x_min) / width
            } else {
                value_a
            };
            coeffs[self.dof(v, Region::Omega1)] = blend;
            coeffs[self.dof(v, Region::Omega2)] = blend;
        }
        for &d in &self.dirichlet_a {
            coeffs[d] = value_a;
        }
        for &d in &self.dirichlet_b {
            coeffs[d] = value_b;
        }
        BrokenField { space: Arc::clone(self), coeffs }
    }
}

/// A field in the broken space: one coefficient per dof.
#[derive(Clone, Debug)]
pub struct BrokenField {
    space: Arc<BrokenSpace>,
    coeffs: Vec<f64>,
}

impl BrokenField {
    pub fn zero(space: &Arc<BrokenSpace>) -> Self {
        BrokenField { space: Arc::clone(space), coeffs: vec![0.0; space.n_dofs()] }
    }

    pub fn from_coefficients(
        space: Arc<BrokenSpace>,
        coeffs: Vec<f64>,
    ) -> Result<Self, SpaceError> {
        if coeffs.len() != space.n_dofs() {
            return Err(SpaceError::CoefficientCountMismatch {
                expected: space.n_dofs(),
                got: coeffs.len(),
            });
        }
        for (d, c) in coeffs.iter().enumerate() {
            if !c.is_finite() {
                return Err(SpaceError::NonFiniteCoefficient { dof: d });
            }
        }
        Ok(BrokenField { space, coeffs })
    }

    pub fn space(&self) -> &Arc<BrokenSpace> {
        &self.space
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Constant gradient of the linear interpolant on a triangle, read from
    /// the triangle's own region side.
    pub fn element_gradient(&self, t: usize) -> Vec2 {
        let [p0, p1, p2] = self.space.mesh().triangle_corners(t);
        let [d0, d1, d2] = self.space.triangle_dofs(t);
        let (u0, u1, u2) = (self.coeffs[d0], self.coeffs[d1], self.coeffs[d2]);
        let two_area = (p1 - p0).cross(p2 - p0);
        // ∇λ_i = perp(p_{i+2} − p_{i+1}) / (2A) with perp(x, y) = (-y, x)
        // rotated to point inward; written out componentwise.
        let gx = u0 * (p1.y - p2.y) + u1 * (p2.y - p0.y) + u2 * (p0.y - p1.y);
        let gy = u0 * (p2.x - p1.x) + u1 * (p0.x - p2.x) + u2 * (p1.x - p0.x);
        Vec2::new(gx / two_area, gy / two_area)
    }

    /// Jump across an interface edge at barycentric coordinate `s ∈ [0, 1]`
    /// along the edge: region-2 trace minus region-1 trace.
    pub fn edge_jump(&self, e: usize, s: f64) -> f64 {
        let (side1, side2) = self.space.edge_side_dofs(e);
        let j0 = self.coeffs[side2[0]] - self.coeffs[side1[0]];
        let j1 = self.coeffs[side2[1]] - self.coeffs[side1[1]];
        (1.0 - s) * j0 + s * j1
    }

    /// Checks that all Dirichlet dofs hold exactly the given values.
    pub fn check_constraints(&self, value_a: f64, value_b: f64) -> Result<(), SpaceError> {
        for &d in self.space.dirichlet_a_dofs() {
            if self.coeffs[d] != value_a {
                return Err(SpaceError::ConstraintViolated { dof: d });
            }
        }
        for &d in self.space.dirichlet_b_dofs() {
            if self.coeffs[d] != value_b {
                return Err(SpaceError::ConstraintViolated { dof: d });
            }
        }
        Ok(())
    }

    pub fn infnorm_diff(&self, other: &BrokenField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Linear combination `self + other · factor`.
    pub fn axpy(&mut self, factor: f64, other: &BrokenField) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += factor * b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::InterfaceMesh;

    fn slab_space(nx: usize, ny: usize) -> Arc<BrokenSpace> {
        let mesh = InterfaceMesh::generate_slab(nx, ny, 1.0, 1.0, 1.0).unwrap();
        BrokenSpace::new(Arc::new(mesh))
    }

    /// Interpolates `f(x, y)` per region side.
    fn interpolate(
        space: &Arc<BrokenSpace>,
        f1: impl Fn(Vec2) -> f64,
        f2: impl Fn(Vec2) -> f64,
    ) -> BrokenField {
        let mut field = BrokenField::zero(space);
        for (v, &p) in space.mesh().vertices().iter().enumerate() {
            field.coefficients_mut()[space.dof(v, Region::Omega1)] = f1(p);
            field.coefficients_mut()[space.dof(v, Region::Omega2)] = f2(p);
        }
        field
    }

    #[test]
    fn dof_count_adds_one_per_interface_vertex() {
        let space = slab_space(2, 2);
        let nv = space.mesh().vertices().len();
        let ni = space.mesh().interface_vertices().len();
        assert_eq!(space.n_dofs(), nv + ni);
        for v in 0..nv {
            let d1 = space.dof(v, Region::Omega1);
            let d2 = space.dof(v, Region::Omega2);
            if space.mesh().interface_vertices().contains(&v) {
                assert_ne!(d1, d2);
            } else {
                assert_eq!(d1, d2);
            }
        }
    }

    #[test]
    fn gradients_reproduce_linear_fields_exactly() {
        let space = slab_space(2, 3);
        let field = interpolate(
            &space,
            |p| 2.0 * p.x + 3.0 * p.y - 1.0,
            |p| 2.0 * p.x + 3.0 * p.y - 1.0,
        );
        for t in 0..space.mesh().triangles().len() {
            let g = field.element_gradient(t);
            assert!((g.x - 2.0).abs() < 1e-14);
            assert!((g.y - 3.0).abs() < 1e-14);
        }
        let constant = interpolate(&space, |_| 5.0, |_| 5.0);
        for t in 0..space.mesh().triangles().len() {
            assert!(constant.element_gradient(t).norm() < 1e-14);
        }
    }

    #[test]
    fn jump_of_continuous_field_vanishes() {
        let space = slab_space(2, 2);
        let field = interpolate(&space, |p| p.x * 2.0 + p.y, |p| p.x * 2.0 + p.y);
        for e in 0..space.mesh().interface_edges().len() {
            for s in [0.0, 0.25, 0.5, 1.0] {
                assert_eq!(field.edge_jump(e, s), 0.0);
            }
        }
    }

    #[test]
    fn jump_separates_the_sides() {
        let space = slab_space(1, 1);
        let field = interpolate(&space, |_| 0.0, |_| 1.0);
        for e in 0..space.mesh().interface_edges().len() {
            for s in [0.0, 0.5, 1.0] {
                assert_eq!(field.edge_jump(e, s), 1.0);
            }
        }
    }

    #[test]
    fn jump_interpolates_linearly_along_the_edge() {
        let space = slab_space(1, 1);
        let mut field = BrokenField::zero(&space);
        let (side1, side2) = space.edge_side_dofs(0);
        field.coefficients_mut()[side2[0]] = 0.0;
        field.coefficients_mut()[side2[1]] = 2.0;
        for d in side1 {
            field.coefficients_mut()[d] = 0.0;
        }
        assert_eq!(field.edge_jump(0, 0.5), 1.0);
        assert_eq!(field.edge_jump(0, 0.25), 0.5);
    }

    #[test]
    fn jump_is_linear_in_the_field() {
        let space = slab_space(2, 2);
        let u = interpolate(&space, |p| p.x, |p| 1.0 - p.y);
        let v = interpolate(&space, |p| p.y * p.y, |p| p.x);
        let (alpha, beta) = (1.7, -0.3);
        let mut combo = BrokenField::zero(&space);
        combo.axpy(alpha, &u);
        combo.axpy(beta, &v);
        for e in 0..space.mesh().interface_edges().len() {
            for s in [0.0, 0.3, 0.71, 1.0] {
                let lhs = combo.edge_jump(e, s);
                let rhs = alpha * u.edge_jump(e, s) + beta * v.edge_jump(e, s);
                assert!((lhs - rhs).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn lift_hits_boundary_values_without_jump() {
        let space = slab_space(2, 2);
        let lift = space.lift_dirichlet(0.0, 3.0);
        lift.check_constraints(0.0, 3.0).unwrap();
        for e in 0..space.mesh().interface_edges().len() {
            for s in [0.0, 0.5, 1.0] {
                assert_eq!(lift.edge_jump(e, s), 0.0);
            }
        }
        // Zero data lifts to the zero field.
        let zero = space.lift_dirichlet(0.0, 0.0);
        assert!(zero.coefficients().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn free_dof_scatter_roundtrips() {
        let space = slab_space(2, 1);
        let free: Vec<f64> = (0..space.n_free()).map(|k| k as f64 * 0.1 - 1.0).collect();
        let field = space.field_from_free(&free).unwrap();
        for (k, &d) in space.free_dofs().iter().enumerate() {
            assert_eq!(field.coefficients()[d], free[k]);
        }
        for d in 0..space.n_dofs() {
            if space.is_constrained(d) {
                assert_eq!(field.coefficients()[d], 0.0);
            }
        }
    }

    #[test]
    fn rejects_bad_coefficients() {
        let space = slab_space(1, 1);
        assert!(matches!(
            BrokenField::from_coefficients(Arc::clone(&space), vec![0.0; 3]),
            Err(SpaceError::CoefficientCountMismatch { .. })
        ));
        let mut coeffs = vec![0.0; space.n_dofs()];
        coeffs[2] = f64::NAN;
        assert!(matches!(
            BrokenField::from_coefficients(Arc::clone(&space), coeffs),
            Err(SpaceError::NonFiniteCoefficient { dof: 2 })
        ));
    }
}
