//! Discrete energy, residual and Hessian on the broken space.
//!
//! The energy of a correction `p` against the lift `φ₀` is
//!
//! ```text
//! I(p) = Σ_T area·F(|∇(φ₀+p)|) − Σ_T area·j₀·∇(φ₀+p) + Σ_e ∫_e G([p])
//! ```
//!
//! with `F` the region's volume potential and `G` the interface potential.
//! P1 gradients are constant per triangle, so the volume terms are exact
//! with one point; the interface potential of a linear jump is not
//! polynomial and is integrated with a Gauss rule (two points by default,
//! configurable). The residual is the exact gradient of this energy with
//! respect to the free coefficients and the Hessian its second derivative,
//! symmetric positive semidefinite by convexity and positive definite once
//! the Dirichlet rows are eliminated.
//!
//! The background flux `j₀` is kept in the signatures but the shipped
//! pipeline fixes it to zero; a divergence-free field with vanishing
//! interface normal flux may be injected per element later.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::constitutive::LawSet;
use crate::linalg::DenseMatrix;
use crate::mesh::InterfaceMesh;
use crate::space::{BrokenField, BrokenSpace};
use crate::vec2::Vec2;

/// Which entity an assembly failure happened on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementId {
    Triangle(usize),
    InterfaceEdge(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum AssemblyError {
    /// Law or potential evaluation failed (overflow or invalid input).
    Overflow { element: ElementId },
    /// The lift must not jump across the interface.
    LiftHasJump { edge: usize },
    /// Correction field carries nonzero Dirichlet coefficients.
    InhomogeneousCorrection { dof: usize },
    FieldSpaceMismatch,
    BackgroundFluxCount { expected: usize, got: usize },
    UnsupportedQuadrature { points: usize },
}

impl core::fmt::Display for AssemblyError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AssemblyError::Overflow { element } => match element {
                ElementId::Triangle(t) => write!(f, "law evaluation overflow in triangle {t}"),
                ElementId::InterfaceEdge(e) => {
                    write!(f, "law evaluation overflow on interface edge {e}")
                }
            },
            AssemblyError::LiftHasJump { edge } => {
                write!(f, "Dirichlet lift jumps across interface edge {edge}")
            }
            AssemblyError::InhomogeneousCorrection { dof } => {
                write!(f, "correction field is nonzero on Dirichlet dof {dof}")
            }
            AssemblyError::FieldSpaceMismatch => write!(f, "field built on a different space"),
            AssemblyError::BackgroundFluxCount { expected, got } => {
                write!(f, "background flux needs {expected} per-element values, got {got}")
            }
            AssemblyError::UnsupportedQuadrature { points } => {
                write!(f, "unsupported edge quadrature point count {points}")
            }
        }
    }
}

impl core::error::Error for AssemblyError {}

/// Gauss-Legendre rule mapped to `[0, 1]`; weights sum to one.
#[derive(Clone, Debug)]
pub struct GaussRule {
    points: Vec<(f64, f64)>,
}

impl GaussRule {
    pub fn on_unit_interval(n_points: usize) -> Result<Self, AssemblyError> {
        // Nodes/weights on [-1, 1]; mapped by s = (1+x)/2, w/2.
        let raw: &[(f64, f64)] = match n_points {
            1 => &[(0.0, 2.0)],
            2 => &[(-0.5773502691896257, 1.0), (0.5773502691896257, 1.0)],
            3 => &[
                (-0.7745966692414834, 0.5555555555555556),
                (0.0, 0.8888888888888888),
                (0.7745966692414834, 0.5555555555555556),
            ],
            4 => &[
                (-0.8611363115940526, 0.3478548451374538),
                (-0.3399810435848563, 0.6521451548625461),
                (0.3399810435848563, 0.6521451548625461),
                (0.8611363115940526, 0.3478548451374538),
            ],
            5 => &[
                (-0.9061798459386640, 0.2369268850561891),
                (-0.5384693101056831, 0.4786286704993665),
                (0.0, 0.5688888888888889),
                (0.5384693101056831, 0.4786286704993665),
                (0.9061798459386640, 0.2369268850561891),
            ],
            _ => return Err(AssemblyError::UnsupportedQuadrature { points: n_points }),
        };
        Ok(GaussRule {
            points: raw.iter().map(|&(x, w)| (0.5 * (1.0 + x), 0.5 * w)).collect(),
        })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

/// P1 basis gradients and the triangle area.
pub(crate) fn basis_gradients(corners: [Vec2; 3]) -> ([Vec2; 3], f64) {
    let [p0, p1, p2] = corners;
    let two_area = (p1 - p0).cross(p2 - p0);
    let grads = [
        Vec2::new(p1.y - p2.y, p2.x - p1.x) * (1.0 / two_area),
        Vec2::new(p2.y - p0.y, p0.x - p2.x) * (1.0 / two_area),
        Vec2::new(p0.y - p1.y, p1.x - p0.x) * (1.0 / two_area),
    ];
    (grads, 0.5 * two_area)
}

/// One discrete problem: space, laws, Dirichlet lift, quadrature.
#[derive(Debug)]
pub struct DiscreteProblem {
    space: Arc<BrokenSpace>,
    laws: LawSet,
    lift: BrokenField,
    background_flux: Option<Vec<Vec2>>,
    edge_rule: GaussRule,
}

impl DiscreteProblem {
    pub fn new(
        space: Arc<BrokenSpace>,
        laws: LawSet,
        lift: BrokenField,
    ) -> Result<Self, AssemblyError> {
        if !Arc::ptr_eq(lift.space(), &space) {
            return Err(AssemblyError::FieldSpaceMismatch);
        }
        for e in 0..space.mesh().interface_edges().len() {
            for s in [0.0, 1.0] {
                if lift.edge_jump(e, s).abs() > 1e-12 {
                    return Err(AssemblyError::LiftHasJump { edge: e });
                }
            }
        }
        Ok(DiscreteProblem {
            space,
            laws,
            lift,
            background_flux: None,
            edge_rule: GaussRule::on_unit_interval(2)?,
        })
    }

    /// Replaces the default 2-point edge quadrature.
    pub fn with_edge_quadrature(mut self, n_points: usize) -> Result<Self, AssemblyError> {
        self.edge_rule = GaussRule::on_unit_interval(n_points)?;
        Ok(self)
    }

    /// Installs a constant-per-element background flux. The caller is
    /// responsible for divergence-freedom and vanishing normal flux on the
    /// interface; the assembly only consumes the values.
    pub fn with_background_flux(mut self, flux: Vec<Vec2>) -> Result<Self, AssemblyError> {
        let expected = self.space.mesh().triangles().len();
        if flux.len() != expected {
            return Err(AssemblyError::BackgroundFluxCount { expected, got: flux.len() });
        }
        self.background_flux = Some(flux);
        Ok(self)
    }

    pub fn space(&self) -> &Arc<BrokenSpace> {
        &self.space
    }

    pub fn laws(&self) -> &LawSet {
        &self.laws
    }

    pub fn lift(&self) -> &BrokenField {
        &self.lift
    }

    pub fn edge_rule(&self) -> &GaussRule {
        &self.edge_rule
    }

    fn mesh(&self) -> &InterfaceMesh {
        self.space.mesh()
    }

    fn check_correction(&self, p: &BrokenField) -> Result<(), AssemblyError> {
        if !Arc::ptr_eq(p.space(), &self.space) {
            return Err(AssemblyError::FieldSpaceMismatch);
        }
        for &d in self.space.dirichlet_a_dofs().iter().chain(self.space.dirichlet_b_dofs()) {
            if p.coefficients()[d] != 0.0 {
                return Err(AssemblyError::InhomogeneousCorrection { dof: d });
            }
        }
        Ok(())
    }

    /// `lift + p`, the full field the laws see.
    pub fn total_field(&self, p: &BrokenField) -> BrokenField {
        let mut total = self.lift.clone();
        total.axpy(1.0, p);
        total
    }

    /// Discrete energy of the correction `p`.
    pub fn energy(&self, p: &BrokenField) -> Result<f64, AssemblyError> {
        self.check_correction(p)?;
        let total = self.total_field(p);
        let mesh = self.mesh();
        let mut energy = 0.0;
        for t in 0..mesh.triangles().len() {
            let gradient = total.element_gradient(t);
            let region = mesh.triangles()[t].region;
            let area = mesh.triangle_area(t);
            let value = self
                .laws
                .volume(region)
                .potential()
                .eval(gradient.norm())
                .map_err(|_| AssemblyError::Overflow { element: ElementId::Triangle(t) })?;
            energy += area * value;
            if let Some(bg) = &self.background_flux {
                energy -= area * bg[t].dot(gradient);
            }
        }
        for e in 0..mesh.interface_edges().len() {
            let len = mesh.interface_edge_length(e);
            for &(s, w) in self.edge_rule.points() {
                let jump = total.edge_jump(e, s);
                let value = self
                    .laws
                    .interface
                    .potential()
                    .eval(jump.abs())
                    .map_err(|_| AssemblyError::Overflow { element: ElementId::InterfaceEdge(e) })?;
                energy += len * w * value;
            }
        }
        Ok(energy)
    }

    /// Gradient of the energy with respect to the free coefficients,
    /// assembled element by element and then edge by edge in index order.
    pub fn residual(&self, p: &BrokenField) -> Result<Vec<f64>, AssemblyError> {
        self.check_correction(p)?;
        let total = self.total_field(p);
        let mesh = self.mesh();
        let mut full = vec![0.0; self.space.n_dofs()];
        for t in 0..mesh.triangles().len() {
            let gradient = total.element_gradient(t);
            let region = mesh.triangles()[t].region;
            let flux = self
                .laws
                .volume(region)
                .flux(gradient)
                .map_err(|_| AssemblyError::Overflow { element: ElementId::Triangle(t) })?;
            let (grads, area) = basis_gradients(mesh.triangle_corners(t));
            let dofs = self.space.triangle_dofs(t);
            for i in 0..3 {
                full[dofs[i]] += area * flux.dot(grads[i]);
                if let Some(bg) = &self.background_flux {
                    full[dofs[i]] -= area * bg[t].dot(grads[i]);
                }
            }
        }
        for e in 0..mesh.interface_edges().len() {
            let len = mesh.interface_edge_length(e);
            let (side1, side2) = self.space.edge_side_dofs(e);
            for &(s, w) in self.edge_rule.points() {
                let jump = total.edge_jump(e, s);
                let flux = self
                    .laws
                    .interface
                    .flux(jump)
                    .map_err(|_| AssemblyError::Overflow { element: ElementId::InterfaceEdge(e) })?;
                let shape = [1.0 - s, s];
                for k in 0..2 {
                    full[side2[k]] += len * w * flux * shape[k];
                    full[side1[k]] -= len * w * flux * shape[k];
                }
            }
        }
        Ok(self.space.free_dofs().iter().map(|&d| full[d]).collect())
    }

    /// Second derivative of the energy over the free dofs.
    pub fn hessian(&self, p: &BrokenField) -> Result<DenseMatrix, AssemblyError> {
        self.check_correction(p)?;
        let total = self.total_field(p);
        let mesh = self.mesh();
        let mut matrix = DenseMatrix::zeros(self.space.n_free());
        for t in 0..mesh.triangles().len() {
            let gradient = total.element_gradient(t);
            let region = mesh.triangles()[t].region;
            let jac = self
                .laws
                .volume(region)
                .flux_jacobian(gradient)
                .map_err(|_| AssemblyError::Overflow { element: ElementId::Triangle(t) })?;
            let (grads, area) = basis_gradients(mesh.triangle_corners(t));
            let dofs = self.space.triangle_dofs(t);
            for i in 0..3 {
                let Some(fi) = self.space.free_index(dofs[i]) else { continue };
                for j in 0..3 {
                    let Some(fj) = self.space.free_index(dofs[j]) else { continue };
                    let jg = Vec2::new(
                        jac[0][0] * grads[j].x + jac[0][1] * grads[j].y,
                        jac[1][0] * grads[j].x + jac[1][1] * grads[j].y,
                    );
                    matrix.add(fi, fj, area * grads[i].dot(jg));
                }
            }
        }
        for e in 0..mesh.interface_edges().len() {
            let len = mesh.interface_edge_length(e);
            let (side1, side2) = self.space.edge_side_dofs(e);
            for &(s, w) in self.edge_rule.points() {
                let jump = total.edge_jump(e, s);
                let slope = self
                    .laws
                    .interface
                    .slope(jump)
                    .map_err(|_| AssemblyError::Overflow { element: ElementId::InterfaceEdge(e) })?;
                let shape = [1.0 - s, s];
                // Jump derivative: +shape on the region-2 dofs, −shape on
                // the region-1 dofs.
                let entries = [
                    (side2[0], shape[0]),
                    (side2[1], shape[1]),
                    (side1[0], -shape[0]),
                    (side1[1], -shape[1]),
                ];
                for &(da, ca) in &entries {
                    let Some(fa) = self.space.free_index(da) else { continue };
                    for &(db, cb) in &entries {
                        let Some(fb) = self.space.free_index(db) else { continue };
                        matrix.add(fa, fb, len * w * slope * ca * cb);
                    }
                }
            }
        }
        Ok(matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Region;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn slab_problem(nx: usize, ny: usize, laws: LawSet, a: f64, b: f64) -> DiscreteProblem {
        let mesh = InterfaceMesh::generate_slab(nx, ny, 1.0, 1.0, 1.0).unwrap();
        let space = BrokenSpace::new(Arc::new(mesh));
        let lift = space.lift_dirichlet(a, b);
        DiscreteProblem::new(space, laws, lift).unwrap()
    }

    fn random_correction(problem: &DiscreteProblem, rng: &mut ChaCha8Rng, scale: f64) -> BrokenField {
        let free: Vec<f64> = (0..problem.space().n_free())
            .map(|_| rng.gen_range(-scale..scale))
            .collect();
        problem.space().field_from_free(&free).unwrap()
    }

    #[test]
    fn zero_data_zero_energy_zero_residual() {
        let problem = slab_problem(2, 2, LawSet::prototype(), 0.0, 0.0);
        let p = BrokenField::zero(problem.space());
        assert_eq!(problem.energy(&p).unwrap(), 0.0);
        let r = problem.residual(&p).unwrap();
        assert!(r.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn quadratic_slab_energy_matches_one_dimensional_closed_form() {
        // p = 2, boundary values (0, 3): slopes 1 and 1, jump 1, so the
        // energy is 1/2 + 1/2 + 1/2 per unit height.
        let problem = slab_problem(1, 1, LawSet::power(2.0).unwrap(), 0.0, 3.0);
        let space = problem.space();
        let mesh = space.mesh();
        let mut total = BrokenField::zero(space);
        for (v, &pt) in mesh.vertices().iter().enumerate() {
            // φ = x left of the interface, x + 1 right of it; the two
            // branches meet the interface with traces 1 and 2.
            total.coefficients_mut()[space.dof(v, Region::Omega1)] =
                if pt.x <= 1.0 { pt.x } else { pt.x + 1.0 };
            total.coefficients_mut()[space.dof(v, Region::Omega2)] =
                if pt.x < 1.0 { pt.x } else { pt.x + 1.0 };
        }
        let mut p = total.clone();
        p.axpy(-1.0, problem.lift());
        let energy = problem.energy(&p).unwrap();
        assert!((energy - 1.5).abs() < 1e-12, "{energy}");
    }

    #[test]
    fn energy_scales_with_height_for_y_independent_data() {
        // The integrand of a y-independent field has no y dependence, so
        // the energy is proportional to the slab height.
        for (ny, height) in [(1usize, 1.0f64), (3, 1.0), (2, 2.5)] {
            let mesh = InterfaceMesh::generate_slab(2, ny, 1.0, 1.0, height).unwrap();
            let space = BrokenSpace::new(Arc::new(mesh));
            let lift = space.lift_dirichlet(0.0, 3.0);
            let problem = DiscreteProblem::new(space, LawSet::prototype(), lift).unwrap();
            let p = BrokenField::zero(problem.space());
            let energy = problem.energy(&p).unwrap();
            let lift_slope: f64 = 3.0 / 2.0;
            let phi1 = lift_slope.cosh() - 1.0;
            let phi2 = 0.5 * lift_slope * lift_slope;
            let expected = height * (phi1 + phi2);
            assert!((energy - expected).abs() < 1e-12 * (1.0 + expected), "{energy} vs {expected}");
        }
    }

    #[test]
    fn residual_is_the_gradient_of_the_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for laws in [LawSet::prototype(), LawSet::power(3.0).unwrap()] {
            let problem = slab_problem(2, 2, laws, 0.0, 3.0);
            for _ in 0..10 {
                let p = random_correction(&problem, &mut rng, 0.4);
                let direction = random_correction(&problem, &mut rng, 1.0);
                let r = problem.residual(&p).unwrap();
                let pairing: f64 = problem
                    .space()
                    .free_dofs()
                    .iter()
                    .enumerate()
                    .map(|(k, &d)| r[k] * direction.coefficients()[d])
                    .sum();
                let eps = 1e-6;
                let mut plus = p.clone();
                plus.axpy(eps, &direction);
                let mut minus = p.clone();
                minus.axpy(-eps, &direction);
                let fd = (problem.energy(&plus).unwrap() - problem.energy(&minus).unwrap())
                    / (2.0 * eps);
                assert!(
                    (fd - pairing).abs() <= 1e-5 * (1.0 + pairing.abs()),
                    "fd {fd} vs exact {pairing}"
                );
            }
        }
    }

    #[test]
    fn hessian_is_symmetric_and_matches_residual_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for laws in [LawSet::prototype(), LawSet::power(3.0).unwrap()] {
            let problem = slab_problem(2, 1, laws, 0.0, 2.0);
            for _ in 0..5 {
                let p = random_correction(&problem, &mut rng, 0.4);
                let h = problem.hessian(&p).unwrap();
                assert!(h.max_asymmetry() <= 1e-12);
                let direction = random_correction(&problem, &mut rng, 1.0);
                let eps = 1e-6;
                let mut plus = p.clone();
                plus.axpy(eps, &direction);
                let mut minus = p.clone();
                minus.axpy(-eps, &direction);
                let rp = problem.residual(&plus).unwrap();
                let rm = problem.residual(&minus).unwrap();
                for (k, &dk) in problem.space().free_dofs().iter().enumerate() {
                    let _ = dk;
                    let fd = (rp[k] - rm[k]) / (2.0 * eps);
                    let mut exact = 0.0;
                    for (l, &dl) in problem.space().free_dofs().iter().enumerate() {
                        exact += h.at(k, l) * direction.coefficients()[dl];
                    }
                    assert!(
                        (fd - exact).abs() <= 1e-4 * (1.0 + exact.abs()),
                        "row {k}: fd {fd} vs exact {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn quadratic_law_hessian_is_constant_in_the_field() {
        let problem = slab_problem(2, 2, LawSet::power(2.0).unwrap(), 0.0, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h0 = problem.hessian(&BrokenField::zero(problem.space())).unwrap();
        let p = random_correction(&problem, &mut rng, 1.0);
        let h1 = problem.hessian(&p).unwrap();
        let mut worst = 0.0f64;
        for i in 0..h0.dim() {
            for j in 0..h0.dim() {
                worst = worst.max((h0.at(i, j) - h1.at(i, j)).abs());
            }
        }
        assert!(worst <= 1e-12);
    }

    #[test]
    fn energy_is_convex_along_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let problem = slab_problem(2, 2, LawSet::prototype(), 0.0, 3.0);
        for _ in 0..10 {
            let p = random_correction(&problem, &mut rng, 0.3);
            let u = random_correction(&problem, &mut rng, 0.3);
            let energy_at = |t: f64| {
                let mut q = p.clone();
                q.axpy(t, &u);
                problem.energy(&q).unwrap()
            };
            let (e0, e1, e2) = (energy_at(-0.5), energy_at(0.0), energy_at(0.5));
            assert!(e0 + e2 - 2.0 * e1 >= -1e-10 * (1.0 + e1.abs()));
        }
    }

    #[test]
    fn energy_terms_are_nonnegative_without_background_flux() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let problem = slab_problem(2, 2, LawSet::prototype(), -1.0, 2.0);
        for _ in 0..10 {
            let p = random_correction(&problem, &mut rng, 0.5);
            assert!(problem.energy(&p).unwrap() >= 0.0);
        }
    }

    #[test]
    fn overflow_names_the_failing_element() {
        let problem = slab_problem(1, 1, LawSet::prototype(), 0.0, 3.0);
        // Push one interface jump far past the exp overflow point.
        let (side1, _) = problem.space().edge_side_dofs(0);
        let mut free = vec![0.0; problem.space().n_free()];
        let idx = problem.space().free_index(side1[0]).unwrap();
        free[idx] = -800.0;
        let p = problem.space().field_from_free(&free).unwrap();
        match problem.energy(&p) {
            Err(AssemblyError::Overflow { element }) => match element {
                ElementId::Triangle(_) | ElementId::InterfaceEdge(_) => {}
            },
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn rejects_inhomogeneous_correction() {
        let problem = slab_problem(1, 1, LawSet::prototype(), 0.0, 3.0);
        let mut p = BrokenField::zero(problem.space());
        let d = problem.space().dirichlet_a_dofs()[0];
        p.coefficients_mut()[d] = 1.0;
        assert!(matches!(
            problem.energy(&p),
            Err(AssemblyError::InhomogeneousCorrection { .. })
        ));
    }

    #[test]
    fn background_flux_shifts_the_residual_linearly() {
        let mesh = InterfaceMesh::generate_slab(2, 1, 1.0, 1.0, 1.0).unwrap();
        let space = BrokenSpace::new(Arc::new(mesh));
        let lift = space.lift_dirichlet(0.0, 1.0);
        let n_tri = space.mesh().triangles().len();
        let base = DiscreteProblem::new(Arc::clone(&space), LawSet::power(2.0).unwrap(), lift.clone())
            .unwrap();
        let shifted = DiscreteProblem::new(space, LawSet::power(2.0).unwrap(), lift)
            .unwrap()
            .with_background_flux(vec![Vec2::new(0.25, 0.0); n_tri])
            .unwrap();
        let p = BrokenField::zero(base.space());
        let r0 = base.residual(&p).unwrap();
        let r1 = shifted.residual(&p).unwrap();
        // The difference is the fixed linear functional q ↦ ∫ j₀·∇q.
        let mut probe = BrokenField::zero(base.space());
        for (k, &d) in base.space().free_dofs().iter().enumerate() {
            probe.coefficients_mut()[d] = 1.0;
            let mut expected = 0.0;
            for t in 0..n_tri {
                let (grads, area) = basis_gradients(base.space().mesh().triangle_corners(t));
                let dofs = base.space().triangle_dofs(t);
                for i in 0..3 {
                    if dofs[i] == d {
                        expected += area * Vec2::new(0.25, 0.0).dot(grads[i]);
                    }
                }
            }
            assert!((r0[k] - r1[k] - expected).abs() < 1e-14);
            probe.coefficients_mut()[d] = 0.0;
        }
    }
}
