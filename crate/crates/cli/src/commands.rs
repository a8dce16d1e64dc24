use std::fs;
use std::io::Write;
use std::path::Path;

use mclock_core::dynamics::{central_difference_bound, Propagator};
use mclock_core::measurement::rate_from_projector;
use mclock_core::scenario::{
    emit_report_csv, emit_trajectory_csv, emit_trials_csv, parse_scenario, ScenarioSpec,
};
use mclock_core::{m_projector, premeasurement_check, sample_trials, tolerance, trajectory};

/// Scales every `check` tolerance; acceptance runs leave it unset.
pub const TOL_SCALE_VAR: &str = "MCLOCK_TOL_SCALE";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] mclock_core::Error),
    #[error("check `{name}` failed: {detail}")]
    Check { name: &'static str, detail: String },
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Check { .. } => 4,
        }
    }
}

fn load(path: &Path) -> Result<ScenarioSpec, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read scenario {}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Writes through a temporary file in the destination directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::Input(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents.as_bytes()).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn tolerance_scale() -> Result<f64, CliError> {
    match std::env::var(TOL_SCALE_VAR) {
        Err(_) => Ok(1.0),
        Ok(raw) => match raw.trim().parse::<f64>() {
            Ok(s) if s.is_finite() && s > 0.0 => Ok(s),
            _ => Err(CliError::Input(format!(
                "{TOL_SCALE_VAR} must be a positive number, got {raw:?}"
            ))),
        },
    }
}

pub fn run(scenario: &Path, out: &Path) -> Result<(), CliError> {
    let spec = load(scenario)?;
    let model = spec.build_model()?;
    let hamiltonian = model.total_hamiltonian();
    let projector = m_projector(&model)?;
    let rate = rate_from_projector(&projector, hamiltonian)?;
    let psi0 = spec.initial_state(&model)?;
    let traj = trajectory(hamiltonian, &psi0, spec.grid, &projector, &rate)?;
    write_atomic(out, &emit_trajectory_csv(&traj))?;

    let (t_peak, p_peak) = traj.peak_density();
    let last = traj.probability()[traj.len() - 1];
    println!("model        {} (n={}, g={}, epsilon={})", spec.model_kind, spec.n_outcomes, spec.coupling_g, spec.epsilon);
    println!("T            {}", model.nominal_duration());
    println!("P(t1)        {last} at t1={}", spec.grid.t_end());
    println!("peak p       {p_peak} at t={t_peak}");
    println!("wrote        {} ({} rows)", out.display(), traj.len());
    Ok(())
}

pub fn sample(scenario: &Path, out: &Path, trials_out: Option<&Path>) -> Result<(), CliError> {
    let spec = load(scenario)?;
    let sampling = spec
        .sampling
        .ok_or_else(|| CliError::Input(format!("{}: no `sampling` block", scenario.display())))?;
    let model = spec.build_model()?;
    let psi0 = spec.initial_state(&model)?;
    let run = sample_trials(
        &model,
        model.total_hamiltonian(),
        &psi0,
        sampling.t,
        sampling.trials,
        sampling.seed,
    )?;
    write_atomic(out, &emit_report_csv(&run.report))?;
    if let Some(path) = trials_out {
        write_atomic(path, &emit_trials_csv(&run.records))?;
    }

    let r = &run.report;
    println!("t            {}", r.t);
    println!("trials       {} (case 1: {})", r.n_trials, r.case1_count);
    println!("estimate     {} ± {}", r.estimate, r.std_error);
    println!("exact P      {}", r.exact_p);
    println!("rng          {} seed={}", r.rng_algorithm, r.seed);
    Ok(())
}

pub fn check(scenario: &Path, min_fidelity: Option<f64>) -> Result<(), CliError> {
    let spec = load(scenario)?;
    let scale = tolerance_scale()?;
    if let Some(f) = min_fidelity {
        if !(0.0..=1.0).contains(&f) {
            return Err(CliError::Input(format!("--min-fidelity must lie in [0, 1], got {f}")));
        }
    }
    let model = spec.build_model()?;

    let report = premeasurement_check(&model)?;
    let threshold = min_fidelity.unwrap_or(model.declared_fidelity() - tolerance::FIDELITY * scale);
    let fidelities: Vec<String> = report.fidelities.iter().map(|f| format!("{f:.12}")).collect();
    if let Some((i, f)) = report.first_failure(threshold) {
        println!("premeasurement  FAIL  fidelities [{}]", fidelities.join(", "));
        return Err(CliError::Check {
            name: "premeasurement",
            detail: format!("outcome {} reaches fidelity {f} < {threshold}", model.labels()[i]),
        });
    }
    println!("premeasurement  ok    fidelities [{}] >= {threshold}", fidelities.join(", "));

    let projector = m_projector(&model)?;
    let idempotence = projector.idempotence_deviation();
    let hermiticity = projector.hermiticity_deviation();
    let rank_error = (projector.trace().re - model.n_outcomes() as f64).abs();
    let projector_tol = tolerance::HERMITICITY * scale;
    if idempotence >= projector_tol || hermiticity >= projector_tol || rank_error >= tolerance::ORTHONORMALITY * scale {
        println!("projector       FAIL");
        return Err(CliError::Check {
            name: "projector",
            detail: format!("|M²-M| = {idempotence:e}, |M-M†| = {hermiticity:e}, |tr M - n| = {rank_error:e}"),
        });
    }
    println!("projector       ok    |M²-M| = {idempotence:.1e}, |M-M†| = {hermiticity:.1e}, tr M = {}", model.n_outcomes());

    let hamiltonian = model.total_hamiltonian();
    let rate = rate_from_projector(&projector, hamiltonian)?;
    let psi0 = spec.initial_state(&model)?;
    let traj = trajectory(hamiltonian, &psi0, spec.grid, &projector, &rate)?;
    let h = spec.grid.step();
    let spread = Propagator::new(hamiltonian)?.spectrum().spread();
    let truncation = central_difference_bound(spread, h);
    let ehrenfest_tol = scale * tolerance::EHRENFEST_FLOOR.max(truncation);
    let widened = if truncation > tolerance::EHRENFEST_FLOOR {
        format!(" (tolerance widened for coarse h = {h})")
    } else {
        String::new()
    };
    let diffs = traj.central_differences();
    if diffs.is_empty() {
        println!("ehrenfest       skip  grid has no interior points");
        return Ok(());
    }
    let worst = diffs.iter().map(|(fd, m)| (fd - m).abs()).fold(0.0, f64::max);
    if worst >= ehrenfest_tol {
        println!("ehrenfest       FAIL  max |ΔP/Δt - <m>| = {worst:e} >= {ehrenfest_tol:e}{widened}");
        return Err(CliError::Check {
            name: "ehrenfest",
            detail: format!("finite-difference mismatch {worst:e} exceeds {ehrenfest_tol:e}"),
        });
    }
    println!("ehrenfest       ok    max |ΔP/Δt - <m>| = {worst:.1e} < {ehrenfest_tol:.1e}{widened}");
    Ok(())
}
