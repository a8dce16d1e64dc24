//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p mclock --test acceptance`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use mclock_core::dynamics::{Propagator, TimeGrid};
use mclock_core::measurement::{rate_from_projector, schmidt_instability_demo};
use mclock_core::scenario::{emit_trials_csv, parse_trajectory_csv};
use mclock_core::{
    build_imperfect_model, build_rotation_model, expectation, happened_probability,
    joint_distribution, m_projector, premeasurement_check, random, rate_operator, sample_trials,
    tensor_state, trajectory, MeasurementModel, TimingTrajectory, C64,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(detail.into())
    }
}

fn half_half() -> [C64; 2] {
    [C64::from(FRAC_1_SQRT_2), C64::from(FRAC_1_SQRT_2)]
}

fn max_abs(v: impl Iterator<Item = C64>) -> f64 {
    v.map(|z| z.norm()).fold(0.0, f64::max)
}

fn run_trajectory(model: &MeasurementModel, c: &[C64], grid: TimeGrid) -> Result<TimingTrajectory, String> {
    let h = model.total_hamiltonian();
    let m = m_projector(model).map_err(|e| e.to_string())?;
    let rate = rate_operator(model, h).map_err(|e| e.to_string())?;
    let psi0 = model.initial_state(c).map_err(|e| e.to_string())?;
    trajectory(h, &psi0, grid, &m, &rate).map_err(|e| e.to_string())
}

fn m_operator_algebra() -> Outcome {
    const TOL: f64 = 1e-12;
    let mut summary = Vec::new();
    for n in [2, 3, 6] {
        let model = build_rotation_model(n, 1.0).map_err(|e| e.to_string())?;
        let m = m_projector(&model).map_err(|e| e.to_string())?;
        ensure(m.idempotence_deviation() < TOL, format!("n={n}: |M²-M| = {:e}", m.idempotence_deviation()))?;
        ensure(m.hermiticity_deviation() < TOL, format!("n={n}: |M-M†| = {:e}", m.hermiticity_deviation()))?;
        ensure((m.trace().re - n as f64).abs() < TOL, format!("n={n}: tr M = {}", m.trace()))?;

        let mut worst: f64 = 0.0;
        for i in 0..n {
            let a = &model.system_eigenstates()[i];
            for j in 0..n {
                let product = tensor_state(a, &model.pointer_states()[j]);
                let image = m.apply(&product).unwrap();
                let expected = if i == j { product.amplitudes().clone() } else { product.amplitudes() * C64::from(0.0) };
                worst = worst.max(max_abs((image - expected).iter().copied()));
            }
        }
        // The ready state is orthogonal to every pointer state.
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        for _ in 0..10 {
            let psi = random::state(&mut rng, vec![n]);
            let image = m.apply(&tensor_state(&psi, model.pointer_ready())).unwrap();
            worst = worst.max(max_abs(image.iter().copied()));
        }
        ensure(worst < TOL, format!("n={n}: defining action violated by {worst:e}"))?;
        summary.push(format!("n={n} ok"));
    }
    Ok(summary.join(", "))
}

fn closed_form_curve() -> Outcome {
    let model = build_rotation_model(2, 1.0).map_err(|e| e.to_string())?;
    let grid = TimeGrid::new(0.0, FRAC_PI_2, 201).unwrap();
    let traj = run_trajectory(&model, &half_half(), grid)?;
    let mut err_p: f64 = 0.0;
    let mut err_rate: f64 = 0.0;
    for (k, t) in grid.times().enumerate() {
        err_p = err_p.max((traj.probability()[k] - t.sin().powi(2)).abs());
        err_rate = err_rate.max((traj.density()[k] - (2.0 * t).sin()).abs());
    }
    ensure(err_p < 1e-9, format!("max |P - sin²t| = {err_p:e}"))?;
    ensure(err_rate < 1e-9, format!("max |p - sin 2t| = {err_rate:e}"))?;
    let (t_peak, _) = traj.peak_density();
    ensure(
        (t_peak - FRAC_PI_4).abs() <= grid.step(),
        format!("p peaks at {t_peak}, not within one step of π/4"),
    )?;
    Ok(format!("max|ΔP| = {err_p:.1e}, max|Δp| = {err_rate:.1e}, peak at t = {t_peak:.6}"))
}

fn monotone_growth() -> Outcome {
    let model = build_rotation_model(2, 1.0).map_err(|e| e.to_string())?;
    let grid = TimeGrid::new(0.0, FRAC_PI_2, 201).unwrap();
    let traj = run_trajectory(&model, &half_half(), grid)?;
    let p = traj.probability();
    let worst_drop = p.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max);
    ensure(worst_drop <= 1e-12, format!("P decreases by {worst_drop:e}"))?;
    ensure(p[0] < 1e-12, format!("P(0) = {:e}", p[0]))?;
    let end = p[p.len() - 1];
    ensure((end - 1.0).abs() < 1e-10, format!("P(π/2) = {end}"))?;
    Ok(format!("nondecreasing, P(0) = {:.1e}, |P(π/2) - 1| = {:.1e}", p[0], (end - 1.0).abs()))
}

fn ehrenfest_identity() -> Outcome {
    const STEP: f64 = 1e-4;
    const TOL: f64 = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut max_dim = 0;
    for trial in 0..50 {
        let model = random::model(&mut rng, 4, 1);
        let dims = model.joint_dims();
        max_dim = max_dim.max(dims.iter().product::<usize>());
        let h = random::hermitian(&mut rng, dims.clone(), 2.0);
        let psi0 = random::state(&mut rng, dims);
        let m = m_projector(&model).map_err(|e| e.to_string())?;
        let rate = rate_from_projector(&m, &h).map_err(|e| e.to_string())?;
        let propagator = Propagator::new(&h).map_err(|e| e.to_string())?;
        let prepared = propagator.prepare(&psi0).map_err(|e| e.to_string())?;
        let t = 0.1 * trial as f64;
        let p_at = |s: f64| expectation(&m, &prepared.at(s).unwrap()).unwrap();
        let fd = (p_at(t + STEP) - p_at(t - STEP)) / (2.0 * STEP);
        let exact = expectation(&rate, &prepared.at(t).unwrap()).map_err(|e| e.to_string())?;
        worst = worst.max((fd - exact).abs());
    }
    ensure(max_dim <= 24, format!("joint dimension {max_dim} exceeds 24"))?;
    ensure(worst < TOL, format!("max |ΔP/Δt - <m>| = {worst:e}"))?;
    Ok(format!("50 triples, dim <= {max_dim}, max |ΔP/Δt - <m>| = {worst:.1e}"))
}

fn operational_exact() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let model = random::model(&mut rng, 5, 3);
        let psi = random::state(&mut rng, model.joint_dims());
        let d = joint_distribution(&model, &psi).map_err(|e| e.to_string())?;
        let p = happened_probability(&model, &psi).map_err(|e| e.to_string())?;
        worst = worst.max((d.matched_mass() - p).abs());
    }
    ensure(worst < 1e-10, format!("max |matched - <M>| = {worst:e}"))?;
    Ok(format!("100 pairs, max |matched - <M>| = {worst:.1e}"))
}

fn operational_statistical() -> Outcome {
    const SEED: u64 = 20240601;
    let model = build_rotation_model(2, 1.0).map_err(|e| e.to_string())?;
    let psi0 = model.initial_state(&half_half()).map_err(|e| e.to_string())?;
    let h = model.total_hamiltonian();
    let first = sample_trials(&model, h, &psi0, FRAC_PI_4, 100_000, SEED).map_err(|e| e.to_string())?;
    let second = sample_trials(&model, h, &psi0, FRAC_PI_4, 100_000, SEED).map_err(|e| e.to_string())?;
    let r = &first.report;
    let diff = (r.estimate - 0.5).abs();
    ensure(diff < 4.0 * r.std_error, format!("|estimate - 0.5| = {diff} >= 4σ = {}", 4.0 * r.std_error))?;
    ensure(
        emit_trials_csv(&first.records) == emit_trials_csv(&second.records) && first.report == second.report,
        "rerun with the same seed differs",
    )?;
    Ok(format!(
        "estimate {} ± {:.4}, |Δ| = {diff:.4} < 4σ = {:.4}, rerun identical",
        r.estimate,
        r.std_error,
        4.0 * r.std_error
    ))
}

fn imperfect_measurement() -> Outcome {
    let expected = (1.0 + (0.45 * PI).sin().powi(2)) / 2.0;
    let model = build_imperfect_model(2, 1.0, 0.1).map_err(|e| e.to_string())?;
    let grid = TimeGrid::new(0.0, model.nominal_duration(), 201).unwrap();
    let traj = run_trajectory(&model, &half_half(), grid)?;
    let p_t = traj.probability()[grid.n_points() - 1];
    ensure((p_t - expected).abs() < 1e-9, format!("P(T) = {p_t}, closed form {expected}"))?;
    ensure(p_t < 1.0, "P(T) is not below 1")?;
    let report = premeasurement_check(&model).map_err(|e| e.to_string())?;
    ensure(
        (report.fidelities[0] - (0.45 * PI).sin().powi(2)).abs() < 1e-10,
        format!("outcome-1 fidelity {}", report.fidelities[0]),
    )?;
    Ok(format!("P(T) = {p_t:.12} (closed form {expected:.12})"))
}

fn schmidt_footnote() -> Outcome {
    let demo = schmidt_instability_demo(1e-4).map_err(|e| e.to_string())?;
    ensure(demo.state_distance < 1e-3, format!("states differ by {}", demo.state_distance))?;
    ensure(demo.left_basis_angle > 0.5, format!("basis angle {}", demo.left_basis_angle))?;
    Ok(format!(
        "‖ψ₁ - ψ₂‖ = {:.1e}, left-basis angle = {:.4} rad",
        demo.state_distance, demo.left_basis_angle
    ))
}

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn mclock(args: &[&str]) -> Result<(i32, String), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_mclock"))
        .args(args)
        .env_remove("MCLOCK_TOL_SCALE")
        .output()
        .map_err(|e| format!("cannot spawn mclock: {e}"))?;
    let code = out.status.code().ok_or("mclock killed by signal")?;
    Ok((code, String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr)))
}

fn expect_code(args: &[&str], code: i32) -> Result<(), String> {
    let (got, output) = mclock(args)?;
    ensure(got == code, format!("`mclock {}` exited {got}, expected {code}: {output}", args.join(" ")))
}

fn pipeline_integrity() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let tmp = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let bundled = ["rotation", "imperfect", "rotation_n3"];
    for name in bundled {
        let scenario = scenarios_dir().join(format!("{name}.json"));
        let scenario = scenario.to_string_lossy();
        expect_code(&["run", &scenario, "--out", &tmp(&format!("{name}.csv"))], 0)?;
        expect_code(&["sample", &scenario, "--out", &tmp(&format!("{name}.report.csv"))], 0)?;
        expect_code(&["check", &scenario], 0)?;
    }

    let write = |name: &str, body: &str| -> Result<String, String> {
        let path = dir.path().join(name);
        std::fs::write(&path, body).map_err(|e| e.to_string())?;
        Ok(path.to_string_lossy().into_owned())
    };
    let base = std::fs::read_to_string(scenarios_dir().join("rotation.json")).map_err(|e| e.to_string())?;
    let malformed = write("malformed.json", &base[..base.len() / 2])?;
    let zero_g = write("zero_g.json", &base.replace("\"g\": 1.0", "\"g\": 0.0"))?;
    let unnormalized = write("unnormalized.json", &base.replace("0.7071067811865475", "1.0"))?;
    let no_sampling = write(
        "no_sampling.json",
        r#"{"model": "rotation", "n": 2, "g": 1.0, "c": [[1, 0], [0, 0]], "grid": {"t0": 0, "t1": 1, "points": 11}}"#,
    )?;
    let missing = tmp("does_not_exist.json");
    let out = tmp("junk.csv");

    expect_code(&["run", &missing, "--out", &out], 2)?;
    expect_code(&["run", &malformed, "--out", &out], 2)?;
    expect_code(&["run", &zero_g, "--out", &out], 2)?;
    expect_code(&["check", &unnormalized], 2)?;
    expect_code(&["sample", &no_sampling, "--out", &out], 2)?;
    let imperfect = scenarios_dir().join("imperfect.json");
    expect_code(&["check", &imperfect.to_string_lossy(), "--min-fidelity", "0.99"], 4)?;
    ensure(!Path::new(&out).exists(), "failed runs left an output file behind")?;

    let rotation = scenarios_dir().join("rotation.json");
    let rotation = rotation.to_string_lossy();
    for k in 0..2 {
        expect_code(
            &["sample", &rotation, "--out", &tmp(&format!("rep{k}.csv")), "--trials-out", &tmp(&format!("trials{k}.csv"))],
            0,
        )?;
    }
    for name in ["rep", "trials"] {
        let a = std::fs::read(tmp(&format!("{name}0.csv"))).map_err(|e| e.to_string())?;
        let b = std::fs::read(tmp(&format!("{name}1.csv"))).map_err(|e| e.to_string())?;
        ensure(a == b, format!("repeated sample produced different {name} files"))?;
    }

    // The CSV written by `run` must parse back to the library's values bit for bit.
    let model = build_rotation_model(2, 1.0).map_err(|e| e.to_string())?;
    let grid = TimeGrid::new(0.0, FRAC_PI_2, 201).unwrap();
    let traj = run_trajectory(&model, &[C64::from(0.7071067811865475), C64::from(0.7071067811865475)], grid)?;
    let csv = std::fs::read_to_string(tmp("rotation.csv")).map_err(|e| e.to_string())?;
    let rows = parse_trajectory_csv(&csv).map_err(|e| e.to_string())?;
    ensure(rows.len() == traj.len(), "row count mismatch")?;
    for (k, row) in rows.iter().enumerate() {
        ensure(
            row.t.to_bits() == grid.time(k).to_bits()
                && row.probability.to_bits() == traj.probability()[k].to_bits()
                && row.density.to_bits() == traj.density()[k].to_bits(),
            format!("row {k} does not round-trip bit-exactly"),
        )?;
    }
    Ok(format!("{} bundled scenarios x 3 commands exit 0, 6 corrupted inputs exit 2/4, CSV bit-exact, repeated samples identical", bundled.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("M-operator algebra", m_operator_algebra),
        ("closed-form timing curve", closed_form_curve),
        ("monotone growth", monotone_growth),
        ("Ehrenfest derivative identity", ehrenfest_identity),
        ("operational equivalence (exact)", operational_exact),
        ("operational equivalence (statistical)", operational_statistical),
        ("imperfect measurement", imperfect_measurement),
        ("Schmidt basis instability", schmidt_footnote),
        ("pipeline integrity", pipeline_integrity),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS  {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
