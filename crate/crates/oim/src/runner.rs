//! The three pipeline entry points behind the CLI subcommands.
//!
//! * [`run_solve`] — build mesh and problem, minimize, verify, emit
//!   `<prefix>.field.csv`, `<prefix>.diag.json` and `<prefix>.report.json`.
//!   Slab runs additionally compare the solve against the one-dimensional
//!   reference solution and record the ∞-norm error.
//! * [`run_oracle`] — print the slab reference solution.
//! * [`run_nfinfo`] — doubling-condition classification of a law family's
//!   potentials and conjugates, plus growth witnesses.

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use oim_core::assembly::{AssemblyError, DiscreteProblem};
use oim_core::constitutive::LawSet;
use oim_core::dualcheck::{diagnostics, DiagnosticsReport, DualCheckError};
use oim_core::mesh::{InterfaceMesh, MeshError};
use oim_core::nfunction::{Delta2Verdict, GrowthWitness, NFunction};
use oim_core::solver::{minimize, slab_interpolant, slab_oracle, SolveError, SolverOptions};
use oim_core::space::{BrokenField, BrokenSpace};

use crate::config::{ConfigError, LawName, MeshSpec, RunConfig};
use crate::fieldio::write_field_csv;
use crate::jsonout::{format_float, JsonObject, JsonValue};
use crate::meshio::{read_mesh, MeshIoError};

/// Probe ranges for the doubling classification; exponential profiles
/// overflow and truncate the grid early, which still yields a `No`.
const DELTA2_T_MAX: f64 = 1e6;
const DELTA2_RATIO_BOUND: f64 = 100.0;
const GROWTH_T_MAX: f64 = 100.0;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    MeshIo(MeshIoError),
    Mesh(MeshError),
    Assembly(AssemblyError),
    Solve(SolveError),
    Diagnostics(DualCheckError),
    Io(String),
    /// The oracle subcommand needs a slab mesh.
    NotASlab,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::MeshIo(e) => write!(f, "mesh file error: {e}"),
            RunError::Mesh(e) => write!(f, "mesh error: {e}"),
            RunError::Assembly(e) => write!(f, "assembly error: {e}"),
            RunError::Solve(e) => write!(f, "solver error: {e}"),
            RunError::Diagnostics(e) => write!(f, "diagnostics error: {e}"),
            RunError::Io(e) => write!(f, "io error: {e}"),
            RunError::NotASlab => write!(f, "this subcommand needs a slab mesh"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<MeshIoError> for RunError {
    fn from(e: MeshIoError) -> Self {
        RunError::MeshIo(e)
    }
}

impl From<MeshError> for RunError {
    fn from(e: MeshError) -> Self {
        RunError::Mesh(e)
    }
}

impl From<AssemblyError> for RunError {
    fn from(e: AssemblyError) -> Self {
        RunError::Assembly(e)
    }
}

impl From<SolveError> for RunError {
    fn from(e: SolveError) -> Self {
        RunError::Solve(e)
    }
}

impl From<DualCheckError> for RunError {
    fn from(e: DualCheckError) -> Self {
        RunError::Diagnostics(e)
    }
}

/// What a solve run produced, with the emitted file paths.
#[derive(Debug)]
pub struct SolveArtifacts {
    pub converged: bool,
    pub iterations: usize,
    pub final_residual_norm: f64,
    pub final_energy: f64,
    pub diagnostics: Option<DiagnosticsReport>,
    pub oracle_flux: Option<f64>,
    pub oracle_infnorm_error: Option<f64>,
    /// All gated diagnostics within the configured bounds.
    pub within_bounds: bool,
    pub field_path: PathBuf,
    pub diag_path: PathBuf,
    pub report_path: PathBuf,
}

fn build_mesh(spec: &MeshSpec) -> Result<InterfaceMesh, RunError> {
    match spec {
        MeshSpec::Slab { nx, ny, length_1, length_2, height } => {
            Ok(InterfaceMesh::generate_slab(*nx, *ny, *length_1, *length_2, *height)?)
        }
        MeshSpec::File(path) => Ok(read_mesh(path)?),
    }
}

pub fn run_solve(config: &RunConfig) -> Result<SolveArtifacts, RunError> {
    let mesh = build_mesh(&config.mesh)?;
    let laws = config.law.build();
    let space = BrokenSpace::new(Arc::new(mesh));
    let lift = space.lift_dirichlet(config.dirichlet_a, config.dirichlet_b);
    let problem = DiscreteProblem::new(Arc::clone(&space), laws, lift)?
        .with_edge_quadrature(config.edge_quad_points)?;

    let options = SolverOptions {
        tol: config.tol,
        max_iter: config.max_iter,
        ..SolverOptions::default()
    };
    let report = minimize(&problem, &BrokenField::zero(&space), &options)?;

    let diag = if report.converged {
        Some(diagnostics(&problem, &report.final_field)?)
    } else {
        None
    };

    let (oracle_flux, oracle_infnorm_error) = match config.mesh.slab_dimensions() {
        Some((_, _, l1, l2, _)) => {
            let oracle =
                slab_oracle(problem.laws(), l1, l2, config.dirichlet_a, config.dirichlet_b)?;
            let exact = slab_interpolant(&oracle, &space);
            (Some(oracle.flux), Some(report.final_field.infnorm_diff(&exact)))
        }
        None => (None, None),
    };

    let within_bounds = report.converged
        && diag.map_or(false, |d| {
            let sum = d.energy_volume_value
                + d.energy_volume_conjugate
                + d.energy_interface_value
                + d.energy_interface_conjugate;
            d.energy_gap <= config.gap_tol * (1.0 + sum)
                && d.fenchel_gap_volume <= config.gap_tol
                && d.fenchel_gap_interface <= config.gap_tol
        })
        && oracle_infnorm_error.map_or(true, |e| e <= config.oracle_tol);

    let prefix = config.output_prefix.display().to_string();
    let field_path = PathBuf::from(format!("{prefix}.field.csv"));
    let diag_path = PathBuf::from(format!("{prefix}.diag.json"));
    let report_path = PathBuf::from(format!("{prefix}.report.json"));
    if let Some(parent) = config.output_prefix.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| RunError::Io(format!("cannot create {}: {e}", parent.display())))?;
        }
    }

    write_field_csv(&report.final_field, &field_path)
        .map_err(|e| RunError::Io(format!("cannot write {}: {e}", field_path.display())))?;

    if let Some(d) = diag {
        let mut obj = JsonObject::new();
        obj.push("fenchel_gap_volume", JsonValue::Float(d.fenchel_gap_volume));
        obj.push("fenchel_gap_interface", JsonValue::Float(d.fenchel_gap_interface));
        obj.push("conservation_residual", JsonValue::Float(d.conservation_residual));
        obj.push("interface_residual", JsonValue::Float(d.interface_residual));
        obj.push("dual_membership_residual", JsonValue::Float(d.dual_membership_residual));
        obj.push("energy_phi", JsonValue::Float(d.energy_volume_value));
        obj.push("energy_phi_star", JsonValue::Float(d.energy_volume_conjugate));
        obj.push("energy_psi", JsonValue::Float(d.energy_interface_value));
        obj.push("energy_psi_star", JsonValue::Float(d.energy_interface_conjugate));
        obj.push("energy_gap", JsonValue::Float(d.energy_gap));
        std::fs::write(&diag_path, obj.render())
            .map_err(|e| RunError::Io(format!("cannot write {}: {e}", diag_path.display())))?;
    }

    let final_energy = *report.energy_history.last().expect("history has the initial energy");
    let final_residual_norm =
        *report.residual_norm_history.last().expect("at least one residual evaluation");
    let mut obj = JsonObject::new();
    obj.push("converged", JsonValue::Bool(report.converged));
    obj.push("iterations", JsonValue::Uint(report.iterations));
    obj.push("final_residual_norm", JsonValue::Float(final_residual_norm));
    obj.push("final_energy", JsonValue::Float(final_energy));
    obj.push("energy_history", JsonValue::FloatArray(report.energy_history.clone()));
    obj.push(
        "residual_norm_history",
        JsonValue::FloatArray(report.residual_norm_history.clone()),
    );
    obj.push("line_search_counts", JsonValue::UintArray(report.line_search_counts.clone()));
    if let Some(flux) = oracle_flux {
        obj.push("oracle_flux", JsonValue::Float(flux));
    }
    if let Some(err) = oracle_infnorm_error {
        obj.push("oracle_infnorm_error", JsonValue::Float(err));
    }
    obj.push("within_bounds", JsonValue::Bool(within_bounds));
    std::fs::write(&report_path, obj.render())
        .map_err(|e| RunError::Io(format!("cannot write {}: {e}", report_path.display())))?;

    Ok(SolveArtifacts {
        converged: report.converged,
        iterations: report.iterations,
        final_residual_norm,
        final_energy,
        diagnostics: diag,
        oracle_flux,
        oracle_infnorm_error,
        within_bounds,
        field_path,
        diag_path,
        report_path,
    })
}

/// Formats the slab reference solution: flux, jump, slopes and the
/// piecewise-linear profile as CSV breakpoints (the interface appears once
/// per side).
pub fn run_oracle(config: &RunConfig) -> Result<String, RunError> {
    let Some((_, _, l1, l2, _)) = config.mesh.slab_dimensions() else {
        return Err(RunError::NotASlab);
    };
    let laws = config.law.build();
    let solution = slab_oracle(&laws, l1, l2, config.dirichlet_a, config.dirichlet_b)?;
    let mut out = String::new();
    out.push_str(&format!("flux {}\n", format_float(solution.flux)));
    out.push_str(&format!("jump {}\n", format_float(solution.jump)));
    out.push_str(&format!("slope_region1 {}\n", format_float(solution.slope_region1)));
    out.push_str(&format!("slope_region2 {}\n", format_float(solution.slope_region2)));
    out.push_str("x,region,phi\n");
    out.push_str(&format!("{},1,{}\n", format_float(0.0), format_float(solution.value_a)));
    out.push_str(&format!(
        "{},1,{}\n",
        format_float(l1),
        format_float(solution.trace_region1(l1))
    ));
    out.push_str(&format!(
        "{},2,{}\n",
        format_float(l1),
        format_float(solution.trace_region2(l1))
    ));
    out.push_str(&format!(
        "{},2,{}\n",
        format_float(l1 + l2),
        format_float(solution.trace_region2(l1 + l2))
    ));
    Ok(out)
}

/// Doubling-condition classification of one law family.
#[derive(Clone, Debug)]
pub struct NfunctionSummary {
    pub law: String,
    /// Verdicts of the two volume potential pieces (region 1, region 2).
    pub volume_pieces: [Delta2Verdict; 2],
    pub interface_piece: Delta2Verdict,
    pub volume_conjugate_pieces: [Delta2Verdict; 2],
    pub interface_conjugate_piece: Delta2Verdict,
    /// Combined verdicts of the piecewise potentials and their conjugates.
    pub value_volume: Delta2Verdict,
    pub value_interface: Delta2Verdict,
    pub conjugate_volume: Delta2Verdict,
    pub conjugate_interface: Delta2Verdict,
    /// At least one of the two couples satisfies the doubling condition.
    pub delta_condition_holds: bool,
    pub growth_volume: [GrowthWitness; 2],
    pub growth_interface: GrowthWitness,
}

fn combine(a: Delta2Verdict, b: Delta2Verdict) -> Delta2Verdict {
    match (a, b) {
        (Delta2Verdict::No, _) | (_, Delta2Verdict::No) => Delta2Verdict::No,
        (Delta2Verdict::Yes, Delta2Verdict::Yes) => Delta2Verdict::Yes,
        _ => Delta2Verdict::Inconclusive,
    }
}

pub fn run_nfinfo(law_name: &str) -> Result<NfunctionSummary, RunError> {
    let name = LawName::parse(law_name)?;
    let laws = name.build();
    let probe = |nf: &NFunction| nf.delta2_probe(DELTA2_T_MAX, DELTA2_RATIO_BOUND).verdict;

    let volume_potentials = [laws.omega1.potential(), laws.omega2.potential()];
    let volume_pieces = [probe(volume_potentials[0]), probe(volume_potentials[1])];
    let interface_piece = probe(laws.interface.potential());
    let volume_conjugate_pieces = [
        probe(&volume_potentials[0].conjugate_function()),
        probe(&volume_potentials[1].conjugate_function()),
    ];
    let interface_conjugate_piece = probe(&laws.interface.potential().conjugate_function());

    let value_volume = combine(volume_pieces[0], volume_pieces[1]);
    let conjugate_volume = combine(volume_conjugate_pieces[0], volume_conjugate_pieces[1]);
    let value_couple_holds =
        value_volume == Delta2Verdict::Yes && interface_piece == Delta2Verdict::Yes;
    let conjugate_couple_holds = conjugate_volume == Delta2Verdict::Yes
        && interface_conjugate_piece == Delta2Verdict::Yes;

    Ok(NfunctionSummary {
        law: name.as_str(),
        volume_pieces,
        interface_piece,
        volume_conjugate_pieces,
        interface_conjugate_piece,
        value_volume,
        value_interface: interface_piece,
        conjugate_volume,
        conjugate_interface: interface_conjugate_piece,
        delta_condition_holds: value_couple_holds || conjugate_couple_holds,
        growth_volume: [
            volume_potentials[0].superquadratic_growth(GROWTH_T_MAX),
            volume_potentials[1].superquadratic_growth(GROWTH_T_MAX),
        ],
        growth_interface: laws.interface.potential().superquadratic_growth(GROWTH_T_MAX),
    })
}

fn verdict_word(v: Delta2Verdict) -> &'static str {
    match v {
        Delta2Verdict::Yes => "yes",
        Delta2Verdict::No => "no",
        Delta2Verdict::Inconclusive => "inconclusive",
    }
}

fn growth_line(label: &str, w: &GrowthWitness) -> String {
    format!(
        "growth {label} {} witness_k {} equality {}\n",
        if w.satisfied { "yes" } else { "no" },
        format_float(w.witness_k),
        w.equality
    )
}

pub fn format_nfinfo(summary: &NfunctionSummary) -> String {
    let mut out = String::new();
    out.push_str(&format!("law {}\n", summary.law));
    out.push_str(&format!("phi delta2 {}\n", verdict_word(summary.value_volume)));
    out.push_str(&format!("psi delta2 {}\n", verdict_word(summary.value_interface)));
    out.push_str(&format!("phi_star delta2 {}\n", verdict_word(summary.conjugate_volume)));
    out.push_str(&format!("psi_star delta2 {}\n", verdict_word(summary.conjugate_interface)));
    out.push_str(&format!(
        "delta_condition {}\n",
        if summary.delta_condition_holds { "holds" } else { "fails" }
    ));
    out.push_str(&format!(
        "phi_omega1 delta2 {}\n",
        verdict_word(summary.volume_pieces[0])
    ));
    out.push_str(&format!(
        "phi_omega2 delta2 {}\n",
        verdict_word(summary.volume_pieces[1])
    ));
    out.push_str(&growth_line("phi_omega1", &summary.growth_volume[0]));
    out.push_str(&growth_line("phi_omega2", &summary.growth_volume[1]));
    out.push_str(&growth_line("psi", &summary.growth_interface));
    out
}
