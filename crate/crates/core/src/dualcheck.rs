//! Post-solve verification of the structural identities.
//!
//! At a converged solution the following are all small, and each check here
//! computes one of them from the recovered flux `j = h(∇φ)` rather than
//! from the solver's own residual path:
//!
//! * pointwise Fenchel gaps `Φ(∇φ) + Φ*(j) − j·∇φ` in the volume and their
//!   interface counterparts (nonnegative by the Young inequality, zero at
//!   matched slopes),
//! * the conservation residual of `j` against continuous test functions
//!   vanishing on the Dirichlet boundary,
//! * the interface condition `j·n = b([φ])` at edge quadrature points,
//! * the dual-membership pairing, which coincides algebraically with the
//!   primal residual and therefore doubles as an assembly cross-check,
//! * the energy identity: the four convex integrals sum to the duality
//!   pairing.
//!
//! All diagnostics are pure post-processing over immutable inputs.

use alloc::vec;
use alloc::vec::Vec;

use crate::assembly::{basis_gradients, AssemblyError, DiscreteProblem};
use crate::constitutive::ConstitutiveError;
use crate::linalg::inf_norm;
use crate::nfunction::NFunctionError;
use crate::space::BrokenField;
use crate::vec2::Vec2;

#[derive(Clone, Debug, PartialEq)]
pub enum DualCheckError {
    Assembly(AssemblyError),
    Constitutive(ConstitutiveError),
    NFunction(NFunctionError),
    /// The transposed pairing disagrees with the primal residual: the two
    /// assembly routes are inconsistent.
    PairingMismatch { worst: f64 },
    /// Field is not `lift + correction` for this problem.
    NotALiftedField { dof: usize },
}

impl core::fmt::Display for DualCheckError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DualCheckError::Assembly(e) => write!(f, "{e}"),
            DualCheckError::Constitutive(e) => write!(f, "{e}"),
            DualCheckError::NFunction(e) => write!(f, "{e}"),
            DualCheckError::PairingMismatch { worst } => {
                write!(f, "dual pairing deviates from the primal residual by {worst}")
            }
            DualCheckError::NotALiftedField { dof } => {
                write!(f, "field disagrees with the Dirichlet lift at dof {dof}")
            }
        }
    }
}

impl core::error::Error for DualCheckError {}

impl From<AssemblyError> for DualCheckError {
    fn from(e: AssemblyError) -> Self {
        DualCheckError::Assembly(e)
    }
}

impl From<ConstitutiveError> for DualCheckError {
    fn from(e: ConstitutiveError) -> Self {
        DualCheckError::Constitutive(e)
    }
}

impl From<NFunctionError> for DualCheckError {
    fn from(e: NFunctionError) -> Self {
        DualCheckError::NFunction(e)
    }
}

/// Flux recovered from a solved field: per-element vectors and the two
/// normal-flux readings on every interface edge.
#[derive(Clone, Debug)]
pub struct FluxRecovery {
    /// `h(∇φ)` per triangle; constant for P1 fields.
    pub element_flux: Vec<Vec2>,
    /// `h(∇φ)·n` read from the region-1 side of each interface edge.
    pub normal_flux_region1: Vec<f64>,
    /// Same, read from the region-2 side.
    pub normal_flux_region2: Vec<f64>,
    /// `b([φ])` at the edge quadrature points, per edge.
    pub transfer_flux: Vec<Vec<f64>>,
}

/// The four convex integrals and their pairing.
#[derive(Clone, Copy, Debug)]
pub struct EnergyIdentity {
    /// `∫ Φ(∇φ)` (region-wise potentials).
    pub volume_value: f64,
    /// `∫ Φ*(h(∇φ))`.
    pub volume_conjugate: f64,
    /// `∫_Γ Ψ([φ])`.
    pub interface_value: f64,
    /// `∫_Γ Ψ*(b([φ]))`.
    pub interface_conjugate: f64,
    /// `∫ h(∇φ)·∇φ + ∫_Γ b([φ])·[φ]`.
    pub pairing: f64,
    /// `|sum of the four integrals − pairing|`.
    pub gap: f64,
}

/// All diagnostics of one solve, serialized with the run output so every
/// run self-verifies.
#[derive(Clone, Copy, Debug)]
pub struct DiagnosticsReport {
    pub fenchel_gap_volume: f64,
    pub fenchel_gap_interface: f64,
    pub conservation_residual: f64,
    pub interface_residual: f64,
    pub dual_membership_residual: f64,
    pub energy_volume_value: f64,
    pub energy_volume_conjugate: f64,
    pub energy_interface_value: f64,
    pub energy_interface_conjugate: f64,
    pub energy_gap: f64,
}

/// Splits a total field back into the correction over the problem's lift,
/// absorbing oracle-level rounding (≤ 1e-9) on the constrained dofs.
fn correction_of(
    problem: &DiscreteProblem,
    field: &BrokenField,
) -> Result<BrokenField, DualCheckError> {
    let space = problem.space();
    let mut correction = field.clone();
    correction.axpy(-1.0, problem.lift());
    for &d in space.dirichlet_a_dofs().iter().chain(space.dirichlet_b_dofs()) {
        let r = correction.coefficients()[d];
        if r.abs() > 1e-9 * (1.0 + field.coefficients()[d].abs()) {
            return Err(DualCheckError::NotALiftedField { dof: d });
        }
        correction.coefficients_mut()[d] = 0.0;
    }
    Ok(correction)
}

/// Recovers the flux of a solved field.
pub fn recover_flux(
    problem: &DiscreteProblem,
    field: &BrokenField,
) -> Result<FluxRecovery, DualCheckError> {
    let mesh = problem.space().mesh();
    let mut element_flux = Vec::with_capacity(mesh.triangles().len());
    for t in 0..mesh.triangles().len() {
        let region = mesh.triangles()[t].region;
        let flux = problem.laws().volume(region).flux(field.element_gradient(t))?;
        element_flux.push(flux);
    }
    let mut normal_flux_region1 = Vec::with_capacity(mesh.interface_edges().len());
    let mut normal_flux_region2 = Vec::with_capacity(mesh.interface_edges().len());
    let mut transfer_flux = Vec::with_capacity(mesh.interface_edges().len());
    for (e, edge) in mesh.interface_edges().iter().enumerate() {
        let n = mesh.interface_normal(e);
        normal_flux_region1.push(element_flux[edge.tri_omega1].dot(n));
        normal_flux_region2.push(element_flux[edge.tri_omega2].dot(n));
        let mut at_points = Vec::with_capacity(problem.edge_rule().points().len());
        for &(s, _) in problem.edge_rule().points() {
            at_points.push(problem.laws().interface.flux(field.edge_jump(e, s))?);
        }
        transfer_flux.push(at_points);
    }
    Ok(FluxRecovery { element_flux, normal_flux_region1, normal_flux_region2, transfer_flux })
}

/// Residual of the recovered flux against the continuous P1 subspace
/// (interface dofs identified, Dirichlet vertices excluded): the ∞-norm of
/// `v ↦ Σ_T area·j_T·∇λ_v`. Continuous test functions see no interface
/// term, so this isolates conservation of the recovered flux.
pub fn conservation_residual(
    problem: &DiscreteProblem,
    field: &BrokenField,
) -> Result<f64, DualCheckError> {
    let mesh = problem.space().mesh();
    let recovery = recover_flux(problem, field)?;
    let mut per_vertex = vec![0.0f64; mesh.vertices().len()];
    for t in 0..mesh.triangles().len() {
        let (grads, area) = basis_gradients(mesh.triangle_corners(t));
        let vs = mesh.triangles()[t].vertices;
        for i in 0..3 {
            per_vertex[vs[i]] += area * recovery.element_flux[t].dot(grads[i]);
        }
    }
    let mut on_dirichlet = vec![false; mesh.vertices().len()];
    for edge in mesh.boundary_edges() {
        if matches!(
            edge.marker,
            crate::mesh::BoundaryMarker::DirichletA | crate::mesh::BoundaryMarker::DirichletB
        ) {
            for v in edge.vertices {
                on_dirichlet[v] = true;
            }
        }
    }
    let mut worst = 0.0f64;
    for (v, &r) in per_vertex.iter().enumerate() {
        if !on_dirichlet[v] {
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

/// Worst relative mismatch of the interface condition `j·n = b([φ])`,
/// evaluated from the region-1 side at the edge quadrature points.
pub fn interface_residual(
    problem: &DiscreteProblem,
    field: &BrokenField,
) -> Result<f64, DualCheckError> {
    let recovery = recover_flux(problem, field)?;
    let mut worst = 0.0f64;
    for (e, at_points) in recovery.transfer_flux.iter().enumerate() {
        let side = recovery.normal_flux_region1[e];
        for &b in at_points {
            worst = worst.max((side - b).abs() / (1.0 + b.abs()));
        }
    }
    Ok(worst)
}

/// Largest gap between the two one-sided normal-flux readings; weak
/// continuity of the normal flux at convergence.
pub fn flux_two_sided_gap(
    problem: &DiscreteProblem,
    field: &BrokenField,
) -> Result<f64, DualCheckError> {
    let recovery = recover_flux(problem, field)?;
    let worst = recovery
        .normal_flux_region1
        .iter()
        .zip(&recovery.normal_flux_region2)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(worst)
}

/// Pairs the recovered flux with the broken test basis — the transpose of
/// the primal weak form. The result equals the primal residual entry by
/// entry (same integrals, assembled edge-first from recovered quantities);
/// any disagreement above 1e-12 is reported as an assembly inconsistency.
/// Returns the pairing's ∞-norm over free dofs.
pub fn dual_membership_residual(
    problem: &DiscreteProblem,
    field: &BrokenField,
) -> Result<f64, DualCheckError> {
    let space = problem.space();
    let mesh = space.mesh();
    let recovery = recover_flux(problem, field)?;

    let mut full = vec![0.0f64; space.n_dofs()];
    for e in 0..mesh.interface_edges().len() {
        let len = mesh.interface_edge_length(e);
        let (side1, side2) = space.edge_side_dofs(e);
        for (g, &(s, w)) in problem.edge_rule().points().iter().enumerate() {
            let transfer = recovery.transfer_flux[e][g];
            let shape = [1.0 - s, s];
            for k in 0..2 {
                full[side2[k]] += len * w * transfer * shape[k];
                full[side1[k]] -= len * w * transfer * shape[k];
            }
        }
    }
    for t in 0..mesh.triangles().len() {
        let (grads, area) = basis_gradients(mesh.triangle_corners(t));
        let dofs = space.triangle_dofs(t);
        for i in 0..3 {
            full[dofs[i]] += area * recovery.element_flux[t].dot(grads[i]);
        }
    }
    let pairing: Vec<f64> = space.free_dofs().iter().map(|&d| full[d]).collect();

    let correction = correction_of(problem, field)?;
    let residual = problem.residual(&correction)?;
    let mut worst = 0.0f64;
    for (a, b) in pairing.iter().zip(&residual) {
        worst = worst.max((a - b).abs());
    }
    let scale = 1.0 + inf_norm(&residual);
    if worst > 1e-12 * scale {
        return Err(DualCheckError::PairingMismatch { worst });
    }
    Ok(inf_norm(&pairing))
}

/// Pointwise Fenchel gaps, signed: per-element volume gaps and per-edge
/// per-quadrature-point interface gaps. Nonnegative up to rounding by the
/// Young inequality.
pub fn pointwise_fenchel_gaps(
    problem: &DiscreteProblem,
    field: &BrokenField,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), DualCheckError> {
    let mesh = problem.space().mesh();
    let mut volume = Vec::with_capacity(mesh.triangles().len());
    for t in 0..mesh.triangles().len() {
        let region = mesh.triangles()[t].region;
        let law = problem.laws().volume(region);
        let gradient = field.element_gradient(t);
        let flux = law.flux(gradient)?;
        let value = law.potential().eval(gradient.norm())?;
        let conjugate = law.potential().conjugate(flux.norm())?;
        volume.push(value + conjugate - flux.dot(gradient));
    }
    let mut interface = Vec::with_capacity(mesh.interface_edges().len());
    for e in 0..mesh.interface_edges().len() {
        let mut at_points = Vec::with_capacity(problem.edge_rule().points().len());
        for &(s, _) in problem.edge_rule().points() {
            let jump = field.edge_jump(e, s);
            let transfer = problem.laws().interface.flux(jump)?;
            let value = problem.laws().interface.potential().eval(jump.abs())?;
            let conjugate = problem.laws().interface.potential().conjugate(transfer.abs())?;
            at_points.push(value + conjugate - transfer * jump);
        }
        interface.push(at_points);
    }
    Ok((volume, interface))
}

/// The four convex integrals of the solved field and the duality-pairing
/// gap. The sum equals `∫ h(∇φ)·∇φ + ∫_Γ b([φ])·[φ]` exactly when the
/// Fenchel equality holds pointwise.
pub fn energy_identity(
    problem: &DiscreteProblem,
    field: &BrokenField,
) -> Result<EnergyIdentity, DualCheckError> {
    let mesh = problem.space().mesh();
    let mut volume_value = 0.0;
    let mut volume_conjugate = 0.0;
    let mut pairing = 0.0;
    for t in 0..mesh.triangles().len() {
        let region = mesh.triangles()[t].region;
        let law = problem.laws().volume(region);
        let area = mesh.triangle_area(t);
        let gradient = field.element_gradient(t);
        let flux = law.flux(gradient)?;
        volume_value += area * law.potential().eval(gradient.norm())?;
        volume_conjugate += area * law.potential().conjugate(flux.norm())?;
        pairing += area * flux.dot(gradient);
    }
    let mut interface_value = 0.0;
    let mut interface_conjugate = 0.0;
    for e in 0..mesh.interface_edges().len() {
        let len = mesh.interface_edge_length(e);
        for &(s, w) in problem.edge_rule().points() {
            let jump = field.edge_jump(e, s);
            let transfer = problem.laws().interface.flux(jump)?;
            interface_value += len * w * problem.laws().interface.potential().eval(jump.abs())?;
            interface_conjugate +=
                len * w * problem.laws().interface.potential().conjugate(transfer.abs())?;
            pairing += len * w * transfer * jump;
        }
    }
    let sum = volume_value + volume_conjugate + interface_value + interface_conjugate;
    Ok(EnergyIdentity {
        volume_value,
        volume_conjugate,
        interface_value,
        interface_conjugate,
        pairing,
        gap: (sum - pairing).abs(),
    })
}

/// The one-sided optimality pairing of the solved field against a test
/// correction `q`:
///
/// ```text
/// ∫ (h(∇φ) − j₀)·∇(φ − φ₀ − q) + ∫_Γ b([φ])·[φ − q]
/// ```
///
/// Nonpositive for all admissible `q` at the exact minimizer, and zero up
/// to solver tolerance at a converged discrete solution.
pub fn variational_pairing(
    problem: &DiscreteProblem,
    field: &BrokenField,
    test: &BrokenField,
) -> Result<f64, DualCheckError> {
    let mesh = problem.space().mesh();
    let correction = correction_of(problem, field)?;
    let mut difference = correction.clone();
    difference.axpy(-1.0, test);

    let recovery = recover_flux(problem, field)?;
    let mut pairing = 0.0;
    for t in 0..mesh.triangles().len() {
        let area = mesh.triangle_area(t);
        pairing += area * recovery.element_flux[t].dot(difference.element_gradient(t));
    }
    for e in 0..mesh.interface_edges().len() {
        let len = mesh.interface_edge_length(e);
        for (g, &(s, w)) in problem.edge_rule().points().iter().enumerate() {
            pairing += len * w * recovery.transfer_flux[e][g] * difference.edge_jump(e, s);
        }
    }
    Ok(pairing)
}

/// Runs every diagnostic and collects the report. Gap fields are worst
/// relative values (`gap / (1 + |pairing|)` pointwise).
pub fn diagnostics(
    problem: &DiscreteProblem,
    field: &BrokenField,
) -> Result<DiagnosticsReport, DualCheckError> {
    let mesh = problem.space().mesh();
    let (volume_gaps, interface_gaps) = pointwise_fenchel_gaps(problem, field)?;
    let mut fenchel_gap_volume = 0.0f64;
    for (t, &gap) in volume_gaps.iter().enumerate() {
        let gradient = field.element_gradient(t);
        let region = mesh.triangles()[t].region;
        let flux = problem.laws().volume(region).flux(gradient)?;
        fenchel_gap_volume = fenchel_gap_volume.max(gap.abs() / (1.0 + flux.dot(gradient).abs()));
    }
    let mut fenchel_gap_interface = 0.0f64;
    for (e, at_points) in interface_gaps.iter().enumerate() {
        for (g, &gap) in at_points.iter().enumerate() {
            let (s, _) = problem.edge_rule().points()[g];
            let jump = field.edge_jump(e, s);
            let transfer = problem.laws().interface.flux(jump)?;
            fenchel_gap_interface =
                fenchel_gap_interface.max(gap.abs() / (1.0 + (transfer * jump).abs()));
        }
    }
    let identity = energy_identity(problem, field)?;
    Ok(DiagnosticsReport {
        fenchel_gap_volume,
        fenchel_gap_interface,
        conservation_residual: conservation_residual(problem, field)?,
        interface_residual: interface_residual(problem, field)?,
        dual_membership_residual: dual_membership_residual(problem, field)?,
        energy_volume_value: identity.volume_value,
        energy_volume_conjugate: identity.volume_conjugate,
        energy_interface_value: identity.interface_value,
        energy_interface_conjugate: identity.interface_conjugate,
        energy_gap: identity.gap,
    })
}
