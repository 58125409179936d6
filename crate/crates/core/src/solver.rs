//! Damped Newton minimization of the discrete energy, and the semi-analytic
//! slab reference solution used as ground truth in tests.
//!
//! The discrete first-order conditions coincide with the Galerkin system for
//! the flux laws whenever the laws derive from potentials (always true for
//! the shipped families), so Newton on the energy solves the same nonlinear
//! equations. Steps are damped two ways: an Armijo backtracking line search
//! on the energy, and an a-priori cap keeping elementwise gradients and
//! interface jumps below the exp overflow range. If the Newton system is
//! not solvable or fails to give descent, the step falls back to steepest
//! descent.

use alloc::vec;
use alloc::vec::Vec;

use crate::assembly::{AssemblyError, DiscreteProblem};
use crate::constitutive::{ConstitutiveError, LawSet};
use crate::linalg::{dot, inf_norm};
use crate::space::BrokenField;

/// Keeps `|∇φ|` and `|[φ]|` below this during line search; comfortably
/// inside the `exp` overflow range with room for the doubling probes.
pub const ARGUMENT_CAP: f64 = 650.0;

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Convergence threshold on the ∞-norm of the free-dof residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo_c: f64,
    pub max_backtracks: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, max_iter: 50, armijo_c: 1e-4, max_backtracks: 60 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveError {
    Assembly(AssemblyError),
    Constitutive(ConstitutiveError),
    /// Line search exhausted its backtracks without an acceptable step.
    LineSearchFailed { iteration: usize },
    /// Initial field violates the homogeneous Dirichlet constraints.
    InvalidInitial,
    InvalidTolerance,
    /// Slab oracle could not bracket the flux equation's root.
    BracketFailure,
}

impl core::fmt::Display for SolveError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SolveError::Assembly(e) => write!(f, "{e}"),
            SolveError::Constitutive(e) => write!(f, "{e}"),
            SolveError::LineSearchFailed { iteration } => {
                write!(f, "line search failed at iteration {iteration}")
            }
            SolveError::InvalidInitial => write!(f, "initial field violates constraints"),
            SolveError::InvalidTolerance => write!(f, "tolerance must be positive"),
            SolveError::BracketFailure => write!(f, "could not bracket the slab flux equation"),
        }
    }
}

impl core::error::Error for SolveError {}

impl From<AssemblyError> for SolveError {
    fn from(e: AssemblyError) -> Self {
        SolveError::Assembly(e)
    }
}

impl From<ConstitutiveError> for SolveError {
    fn from(e: ConstitutiveError) -> Self {
        SolveError::Constitutive(e)
    }
}

/// Everything a solve produced: iterate history and the final total field
/// (`lift + correction`).
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub iterations: usize,
    pub energy_history: Vec<f64>,
    pub residual_norm_history: Vec<f64>,
    pub converged: bool,
    pub final_field: BrokenField,
    pub line_search_counts: Vec<usize>,
}

/// Minimizes the discrete energy starting from the correction `initial`
/// (homogeneous Dirichlet). Convergence is declared when the free-dof
/// residual ∞-norm drops to `tol`; hitting `max_iter` returns a report with
/// `converged = false` rather than an error.
pub fn minimize(
    problem: &DiscreteProblem,
    initial: &BrokenField,
    options: &SolverOptions,
) -> Result<SolveReport, SolveError> {
    if !(options.tol > 0.0) {
        return Err(SolveError::InvalidTolerance);
    }
    let space = problem.space();
    let mut correction = initial.clone();
    for &d in space.dirichlet_a_dofs().iter().chain(space.dirichlet_b_dofs()) {
        if correction.coefficients()[d] != 0.0 {
            return Err(SolveError::InvalidInitial);
        }
    }

    let mut energy = problem.energy(&correction)?;
    let mut energy_history = vec![energy];
    let mut residual_norm_history = Vec::new();
    let mut line_search_counts = Vec::new();
    let mut converged = false;
    let mut iterations = 0usize;

    for iteration in 0..=options.max_iter {
        let residual = problem.residual(&correction)?;
        let residual_norm = inf_norm(&residual);
        residual_norm_history.push(residual_norm);
        if residual_norm <= options.tol {
            converged = true;
            iterations = iteration;
            break;
        }
        if iteration == options.max_iter {
            iterations = iteration;
            break;
        }

        // Newton direction, steepest descent as fallback.
        let neg_residual: Vec<f64> = residual.iter().map(|&r| -r).collect();
        let newton = problem.hessian(&correction)?.solve_spd(&neg_residual).ok();
        let direction_free = match newton {
            Some(d) if dot(&d, &residual) < 0.0 => d,
            _ => neg_residual,
        };
        let direction = space.field_from_free(&direction_free).map_err(|_| SolveError::InvalidInitial)?;
        let slope = dot(&direction_free, &residual);

        let mut step = initial_step_cap(problem, &correction, &direction);
        let mut backtracks = 0usize;
        let accepted = loop {
            let mut candidate = correction.clone();
            candidate.axpy(step, &direction);
            match problem.energy(&candidate) {
                Ok(e) if e <= energy + options.armijo_c * step * slope => {
                    break Some((candidate, e));
                }
                // Overflowing trial steps are treated as infinitely bad.
                Ok(_) | Err(AssemblyError::Overflow { .. }) => {
                    backtracks += 1;
                    if backtracks > options.max_backtracks {
                        break None;
                    }
                    step *= 0.5;
                }
                Err(e) => return Err(e.into()),
            }
        };
        let Some((next, next_energy)) = accepted else {
            return Err(SolveError::LineSearchFailed { iteration });
        };
        correction = next;
        energy = next_energy;
        energy_history.push(energy);
        line_search_counts.push(backtracks);
    }

    Ok(SolveReport {
        iterations,
        energy_history,
        residual_norm_history,
        converged,
        final_field: problem.total_field(&correction),
        line_search_counts,
    })
}

/// Largest initial step keeping elementwise gradient magnitudes and edge
/// jumps below [`ARGUMENT_CAP`]; never activates once iterates are in the
/// convergent regime.
fn initial_step_cap(
    problem: &DiscreteProblem,
    correction: &BrokenField,
    direction: &BrokenField,
) -> f64 {
    let mesh = problem.space().mesh();
    let total = problem.total_field(correction);
    let mut cap = 1.0f64;
    for t in 0..mesh.triangles().len() {
        let g = total.element_gradient(t).norm();
        let dg = direction.element_gradient(t).norm();
        if dg > 0.0 {
            cap = cap.min((ARGUMENT_CAP - g).max(0.0) / dg);
        }
    }
    for e in 0..mesh.interface_edges().len() {
        for s in [0.0, 1.0] {
            let z = total.edge_jump(e, s).abs();
            let dz = direction.edge_jump(e, s).abs();
            if dz > 0.0 {
                cap = cap.min((ARGUMENT_CAP - z).max(0.0) / dz);
            }
        }
    }
    if cap <= 0.0 {
        // Already at the cap; take a conservative probe step and let the
        // line search sort it out.
        1e-6
    } else {
        cap
    }
}

/// Exact solution of the one-dimensional slab reduction: constant flux,
/// one slope per region, one jump at the interface.
#[derive(Clone, Copy, Debug)]
pub struct SlabSolution {
    pub flux: f64,
    pub slope_region1: f64,
    pub slope_region2: f64,
    pub jump: f64,
    pub value_a: f64,
    pub value_b: f64,
    pub length_1: f64,
    pub length_2: f64,
}

impl SlabSolution {
    /// Potential at `x`, using the region-1 branch at the interface.
    pub fn trace_region1(&self, x: f64) -> f64 {
        if x <= self.length_1 {
            self.value_a + self.slope_region1 * x
        } else {
            self.trace_region2(x)
        }
    }

    /// Potential at `x`, using the region-2 branch at the interface.
    pub fn trace_region2(&self, x: f64) -> f64 {
        if x < self.length_1 {
            self.trace_region1(x)
        } else {
            self.value_a + self.slope_region1 * self.length_1 + self.jump
                + self.slope_region2 * (x - self.length_1)
        }
    }
}

/// Solves the scalar flux equation
/// `L1·f₁(j) + g(j) + L2·f₂(j) = value_b − value_a`
/// by bisection; the left side is odd and strictly increasing, so the root
/// is unique. `f₁`, `f₂` are the scalar inverse slopes of the two volume
/// laws and `g` the inverse interface law.
pub fn slab_oracle(
    laws: &LawSet,
    length_1: f64,
    length_2: f64,
    value_a: f64,
    value_b: f64,
) -> Result<SlabSolution, SolveError> {
    let delta = value_b - value_a;
    let drop_at = |j: f64| -> Result<f64, SolveError> {
        Ok(length_1 * laws.omega1.scalar_inverse_flux(j)?
            + laws.interface.inverse_flux(j)?
            + length_2 * laws.omega2.scalar_inverse_flux(j)?)
    };
    let flux = if delta == 0.0 {
        0.0
    } else {
        let target = delta.abs();
        let mut hi = 1.0f64;
        let mut guard = 0usize;
        while drop_at(hi)? < target {
            hi *= 2.0;
            guard += 1;
            if guard > 2000 {
                return Err(SolveError::BracketFailure);
            }
        }
        let mut lo = 0.0f64;
        for _ in 0..200 {
            if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if drop_at(mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let j = 0.5 * (lo + hi);
        if delta > 0.0 {
            j
        } else {
            -j
        }
    };
    Ok(SlabSolution {
        flux,
        slope_region1: laws.omega1.scalar_inverse_flux(flux)?,
        slope_region2: laws.omega2.scalar_inverse_flux(flux)?,
        jump: laws.interface.inverse_flux(flux)?,
        value_a,
        value_b,
        length_1,
        length_2,
    })
}

/// Interpolant of the slab solution in a broken space: region-1 dofs take
/// the region-1 trace, region-2 dofs the region-2 trace.
pub fn slab_interpolant(
    solution: &SlabSolution,
    space: &alloc::sync::Arc<crate::space::BrokenSpace>,
) -> BrokenField {
    let mut field = BrokenField::zero(space);
    for (v, &p) in space.mesh().vertices().iter().enumerate() {
        let d1 = space.dof(v, crate::mesh::Region::Omega1);
        let d2 = space.dof(v, crate::mesh::Region::Omega2);
        field.coefficients_mut()[d1] = solution.trace_region1(p.x);
        field.coefficients_mut()[d2] = solution.trace_region2(p.x);
    }
    field
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::InterfaceMesh;
    use crate::space::BrokenSpace;
    use alloc::sync::Arc;

    fn slab_problem(nx: usize, ny: usize, laws: LawSet, a: f64, b: f64) -> DiscreteProblem {
        let mesh = InterfaceMesh::generate_slab(nx, ny, 1.0, 1.0, 1.0).unwrap();
        let space = BrokenSpace::new(Arc::new(mesh));
        let lift = space.lift_dirichlet(a, b);
        DiscreteProblem::new(space, laws, lift).unwrap()
    }

    #[test]
    fn zero_data_converges_in_zero_iterations() {
        let problem = slab_problem(2, 2, LawSet::prototype(), 0.0, 0.0);
        let report = minimize(
            &problem,
            &BrokenField::zero(problem.space()),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 0);
        assert!(report.final_field.coefficients().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn oracle_zero_drop_means_zero_flux() {
        let s = slab_oracle(&LawSet::prototype(), 1.0, 1.0, 2.0, 2.0).unwrap();
        assert_eq!(s.flux, 0.0);
        assert_eq!(s.jump, 0.0);
        assert_eq!(s.trace_region1(0.7), 2.0);
        assert_eq!(s.trace_region2(1.5), 2.0);
    }

    #[test]
    fn oracle_linear_laws_split_the_drop_evenly() {
        // 3 = j + j + j for unit lengths and identity laws.
        let s = slab_oracle(&LawSet::power(2.0).unwrap(), 1.0, 1.0, 0.0, 3.0).unwrap();
        assert!((s.flux - 1.0).abs() < 1e-12);
        assert!((s.jump - 1.0).abs() < 1e-12);
        assert!((s.slope_region1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_prototype_flux_solves_the_scalar_equation() {
        let s = slab_oracle(&LawSet::prototype(), 1.0, 1.0, 0.0, 3.0).unwrap();
        let residual = s.flux.asinh() + s.flux.ln_1p() + s.flux - 3.0;
        assert!(residual.abs() <= 1e-12, "residual {residual}");
        assert!(s.flux > 1.19 && s.flux < 1.21, "flux {}", s.flux);
        // Negative drop mirrors the solution.
        let m = slab_oracle(&LawSet::prototype(), 1.0, 1.0, 3.0, 0.0).unwrap();
        assert!((m.flux + s.flux).abs() < 1e-12);
    }

    #[test]
    fn solver_reproduces_the_quadratic_slab_solution() {
        let problem = slab_problem(1, 1, LawSet::power(2.0).unwrap(), 0.0, 3.0);
        let report = minimize(
            &problem,
            &BrokenField::zero(problem.space()),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(report.converged);
        let oracle = slab_oracle(&LawSet::power(2.0).unwrap(), 1.0, 1.0, 0.0, 3.0).unwrap();
        let exact = slab_interpolant(&oracle, problem.space());
        assert!(report.final_field.infnorm_diff(&exact) <= 1e-10);
    }

    #[test]
    fn solver_matches_the_prototype_oracle_on_every_resolution() {
        let oracle = slab_oracle(&LawSet::prototype(), 1.0, 1.0, 0.0, 3.0).unwrap();
        for (nx, ny) in [(1, 1), (2, 2), (3, 1)] {
            let problem = slab_problem(nx, ny, LawSet::prototype(), 0.0, 3.0);
            let report = minimize(
                &problem,
                &BrokenField::zero(problem.space()),
                &SolverOptions::default(),
            )
            .unwrap();
            assert!(report.converged, "nx={nx} ny={ny}");
            let exact = slab_interpolant(&oracle, problem.space());
            let err = report.final_field.infnorm_diff(&exact);
            assert!(err <= 1e-8, "nx={nx} ny={ny}: error {err}");
        }
    }

    #[test]
    fn energy_history_is_strictly_decreasing() {
        let problem = slab_problem(2, 2, LawSet::prototype(), 0.0, 3.0);
        let report = minimize(
            &problem,
            &BrokenField::zero(problem.space()),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(report.converged);
        for w in report.energy_history.windows(2) {
            assert!(w[1] < w[0], "energy did not decrease: {w:?}");
        }
        assert_eq!(report.energy_history.len(), report.iterations + 1);
    }

    #[test]
    fn max_iter_exhaustion_reports_not_converged() {
        let problem = slab_problem(2, 2, LawSet::prototype(), 0.0, 3.0);
        let options = SolverOptions { max_iter: 1, ..Default::default() };
        let report =
            minimize(&problem, &BrokenField::zero(problem.space()), &options).unwrap();
        assert!(!report.converged);
        assert_eq!(report.iterations, 1);
    }

    #[test]
    fn rejects_nonpositive_tolerance_and_bad_initial() {
        let problem = slab_problem(1, 1, LawSet::prototype(), 0.0, 3.0);
        let zero = BrokenField::zero(problem.space());
        let options = SolverOptions { tol: 0.0, ..Default::default() };
        assert!(matches!(
            minimize(&problem, &zero, &options),
            Err(SolveError::InvalidTolerance)
        ));
        let mut bad = zero.clone();
        bad.coefficients_mut()[problem.space().dirichlet_b_dofs()[0]] = 0.5;
        assert!(matches!(
            minimize(&problem, &bad, &SolverOptions::default()),
            Err(SolveError::InvalidInitial)
        ));
    }
}
