//! Experiment execution: build the problem, run the requested experiment,
//! write the artifacts.

use std::path::{Path, PathBuf};

use curvmf::analysis::{
    deficit_battery, gauss_bonnet_residual, lambda_sweep, perturbation_experiment, pde_residual,
    sharpness_sequence, spike_sweep, tm_deficit, tm_symmetric_deficit, trace_deficit,
};
use curvmf::io;
use curvmf::meanfield::{compute_alpha_beta, compute_c, sign_conditions, ProblemSpec};
use curvmf::minimize::{minimize, SolveError, SolveResult, Termination};
use curvmf::ops::background_check;
use curvmf::report::{self, ExperimentSummary};

use crate::config::{ExperimentConfig, RunConfig};
use crate::CliError;

pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub refinement: Option<usize>,
}

fn out_dir(config: &RunConfig, over: &Overrides) -> Result<PathBuf, CliError> {
    let dir = over
        .out
        .clone()
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Config(format!("output dir: {e}")))?;
    Ok(dir)
}

fn map_solve_err(e: SolveError) -> CliError {
    use curvmf::meanfield::MeanFieldError as M;
    match e {
        SolveError::MeanField(M::Infeasible { clause }) => CliError::Infeasible(clause),
        SolveError::MeanField(M::ConstructiveSearchFailed { cap }) => CliError::Infeasible(
            format!("constructive search for a domain point failed (amplitude cap {cap})"),
        ),
        other => CliError::NonConvergence(other.to_string()),
    }
}

fn write_mesh_artifacts(
    config: &RunConfig,
    spec: &ProblemSpec<f64>,
    dir: &Path,
) -> Result<(), CliError> {
    io::write_edge_csv(&dir.join("edges.csv"), &spec.mesh)
        .map_err(|e| CliError::Config(e.to_string()))?;
    if config.output.mesh_off.unwrap_or(false) {
        io::write_off(&dir.join("mesh.off"), &spec.mesh)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    if config.output.stiffness_coo.unwrap_or(false) {
        io::write_coo_csv(&dir.join("stiffness.csv"), &spec.ops)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn run_one_solve(
    config: &RunConfig,
    over: &Overrides,
) -> Result<(ProblemSpec<f64>, SolveResult<f64>, u64), CliError> {
    let spec = config.build_spec(over.refinement)?;
    let solver = config.solver_config(over.seed);
    let seed = solver.seed;

    // Feasibility gate: refuse specs the sign conditions rule out, except on
    // the χ=0 route with sign-definite K where the sign resolution may still
    // produce the mirror solution.
    let feasibility = sign_conditions(&spec);
    let chi_zero_route = spec.chi == 0
        && (spec.min_k() >= 0.0 || spec.max_k() <= 0.0)
        && (spec.min_k() < 0.0 || spec.max_k() > 0.0);
    if !feasibility.feasible && !chi_zero_route {
        return Err(CliError::Infeasible(feasibility.clause));
    }

    let result = minimize(&spec, &solver, None).map_err(map_solve_err)?;
    Ok((spec, result, seed))
}

pub fn solve(config: &RunConfig, over: &Overrides) -> Result<(), CliError> {
    let dir = out_dir(config, over)?;
    let (spec, result, seed) = run_one_solve(config, over)?;

    let gb = result
        .v_star
        .as_ref()
        .map(|v| {
            if result.sign_used == curvmf::minimize::SignUsed::MinusH {
                let mut flipped = spec.clone();
                for h in flipped.h.iter_mut() {
                    *h = -*h;
                }
                gauss_bonnet_residual(&flipped, v)
            } else {
                gauss_bonnet_residual(&spec, v)
            }
        })
        .unwrap_or(f64::NAN);
    let pde = pde_residual(&spec, &result.u_star).unwrap_or(f64::NAN);

    let report = report::solve_report("solve", &spec, seed, &result, gb, pde);
    io::write_json(&dir.join("report.json"), &report)
        .map_err(|e| CliError::Config(e.to_string()))?;
    io::write_solution_csv(
        &dir.join("solution.csv"),
        &result.u_star,
        result.v_star.as_deref(),
        &spec.k,
        &spec.h,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    io::write_trace_csv(&dir.join("trace.csv"), &result)
        .map_err(|e| CliError::Config(e.to_string()))?;
    write_mesh_artifacts(config, &spec, &dir)?;

    if result.termination != Termination::GradTol {
        return Err(CliError::NonConvergence(format!(
            "terminated with {:?} after {} iterations (grad {:.3e})",
            result.termination, result.iterations, result.grad_norm_inf
        )));
    }
    println!(
        "solve: J = {:.12e}, C = {:.12e}, {} iterations, report in {}",
        result.j_star,
        result.c_star,
        result.iterations,
        dir.display()
    );
    Ok(())
}

pub fn verify(config: &RunConfig, solution: &Path, over: &Overrides) -> Result<(), CliError> {
    let dir = out_dir(config, over)?;
    let spec = config.build_spec(over.refinement)?;
    let (u, v) = io::read_solution_csv(solution).map_err(|e| CliError::Config(e.to_string()))?;
    if u.len() != spec.vertex_count() {
        return Err(CliError::Config(format!(
            "solution field has {} vertices, mesh has {}",
            u.len(),
            spec.vertex_count()
        )));
    }

    let (alpha, beta) = compute_alpha_beta(&spec, &u);
    let c = compute_c(spec.chi, alpha, beta).unwrap_or(f64::NAN);
    let gb = match &v {
        Some(v) => gauss_bonnet_residual(&spec, v),
        None => f64::NAN,
    };
    let pde = pde_residual(&spec, &u).unwrap_or(f64::NAN);
    let j = curvmf::meanfield::energy(&spec, &u)
        .map(|st| st.j)
        .unwrap_or(f64::NAN);

    let report = report::verify_report(&spec, alpha, beta, c, j, gb, pde);
    io::write_json(&dir.join("report.json"), &report)
        .map_err(|e| CliError::Config(e.to_string()))?;
    println!(
        "verify: gb residual {gb:.6e}, pde residual {pde:.6e}, report in {}",
        dir.display()
    );
    Ok(())
}

pub fn mesh(config: &RunConfig, over: &Overrides) -> Result<(), CliError> {
    let dir = out_dir(config, over)?;
    let spec = config.build_spec(over.refinement)?;
    write_mesh_artifacts(config, &spec, &dir)?;
    let bg = background_check(&spec.mesh);
    io::write_json(&dir.join("background.json"), &bg)
        .map_err(|e| CliError::Config(e.to_string()))?;
    println!(
        "mesh: V = {}, E = {}, F = {}, chi = {}, artifacts in {}",
        spec.mesh.vertex_count(),
        spec.mesh.edge_count(),
        spec.mesh.face_count(),
        spec.chi,
        dir.display()
    );
    Ok(())
}

pub fn sweep(config: &RunConfig, over: &Overrides) -> Result<(), CliError> {
    let dir = out_dir(config, over)?;
    let spec = config.build_spec(over.refinement)?;
    let seed = over.seed.or(config.solver.seed).unwrap_or(0);

    match &config.experiment {
        ExperimentConfig::Tm {
            samples,
            spike_amplitude_max,
            spike_radius,
        } => {
            let samples = samples.unwrap_or(1000);
            let amax = spike_amplitude_max.unwrap_or(14.0);
            let radius = spike_radius.unwrap_or(1.0);
            let mesh = &spec.mesh;
            let ops = &spec.ops;
            let battery = deficit_battery(mesh, ops, "tm", samples, seed, None, |u| {
                tm_deficit(mesh, ops, u)
            });
            let amps: Vec<f64> = (0..=amax as usize).map(|i| i as f64).collect();
            let center = mesh.boundary_loops[0][0];
            let spikes = spike_sweep(mesh, ops, "tm_spikes", &[center], &amps, radius, |u| {
                tm_deficit(mesh, ops, u)
            });
            let sym = spec.orbits.as_ref().map(|orbits| {
                deficit_battery(mesh, ops, "tm_symmetric", samples, seed, Some(orbits), |u| {
                    tm_symmetric_deficit(mesh, orbits, ops, u, 0.1).unwrap()
                })
            });
            io::write_json(&dir.join("tm_battery.json"), &battery)
                .map_err(|e| CliError::Config(e.to_string()))?;
            io::write_deficit_csv(&dir.join("tm_battery.csv"), &battery)
                .map_err(|e| CliError::Config(e.to_string()))?;
            io::write_json(&dir.join("tm_spikes.json"), &spikes)
                .map_err(|e| CliError::Config(e.to_string()))?;
            io::write_deficit_csv(&dir.join("tm_spikes.csv"), &spikes)
                .map_err(|e| CliError::Config(e.to_string()))?;
            if let Some(sym) = &sym {
                io::write_json(&dir.join("tm_symmetric.json"), sym)
                    .map_err(|e| CliError::Config(e.to_string()))?;
            }
            let max = battery.max_deficit.max(spikes.max_deficit);
            let summary = ExperimentSummary {
                experiment: "tm".into(),
                verdict: "no violation observed".into(),
                max_deficit: max,
                samples: battery.samples + spikes.samples,
                seed,
            };
            io::write_json(&dir.join("report.json"), &summary)
                .map_err(|e| CliError::Config(e.to_string()))?;
            println!("tm sweep: max deficit {max:.6}, artifacts in {}", dir.display());
        }
        ExperimentConfig::Trace {
            samples,
            epsilon,
            spike_amplitude_max,
            spike_radius,
        } => {
            let samples = samples.unwrap_or(1000);
            let eps = epsilon.unwrap_or(0.1);
            let amax = spike_amplitude_max.unwrap_or(14.0);
            let radius = spike_radius.unwrap_or(0.4);
            let mesh = spec.mesh.clone();
            let ops = spec.ops.clone();
            let battery = deficit_battery(&mesh, &ops, "trace", samples, seed, None, |u| {
                trace_deficit(&spec, u, eps).unwrap()
            });
            let amps: Vec<f64> = (0..=amax as usize).map(|i| i as f64).collect();
            let center = mesh.boundary_loops[0][0];
            let spikes = spike_sweep(&mesh, &ops, "trace_spikes", &[center], &amps, radius, |u| {
                trace_deficit(&spec, u, eps).unwrap()
            });
            io::write_json(&dir.join("trace_battery.json"), &battery)
                .map_err(|e| CliError::Config(e.to_string()))?;
            io::write_deficit_csv(&dir.join("trace_battery.csv"), &battery)
                .map_err(|e| CliError::Config(e.to_string()))?;
            io::write_json(&dir.join("trace_spikes.json"), &spikes)
                .map_err(|e| CliError::Config(e.to_string()))?;
            io::write_deficit_csv(&dir.join("trace_spikes.csv"), &spikes)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let max = battery.max_deficit.max(spikes.max_deficit);
            let summary = ExperimentSummary {
                experiment: "trace".into(),
                verdict: "no violation observed".into(),
                max_deficit: max,
                samples: battery.samples + spikes.samples,
                seed,
            };
            io::write_json(&dir.join("report.json"), &summary)
                .map_err(|e| CliError::Config(e.to_string()))?;
            println!(
                "trace sweep: max deficit {max:.6}, artifacts in {}",
                dir.display()
            );
        }
        ExperimentConfig::Sharpness {
            d0,
            n_min_exp,
            n_max_exp,
            collar,
            boundary_loop,
        } => {
            let ns: Vec<u64> = (*n_min_exp..=*n_max_exp).map(|e| 1u64 << e).collect();
            let seqn = sharpness_sequence(&spec, *d0, &ns, boundary_loop.unwrap_or(0), *collar)
                .map_err(|e| CliError::Config(e.to_string()))?;
            io::write_json(&dir.join("report.json"), &seqn)
                .map_err(|e| CliError::Config(e.to_string()))?;
            io::write_sharpness_csv(&dir.join("sharpness.csv"), &seqn)
                .map_err(|e| CliError::Config(e.to_string()))?;
            println!(
                "sharpness: tail increasing = {}, tenfold = {}, artifacts in {}",
                seqn.tail_increasing,
                seqn.exceeds_tenfold,
                dir.display()
            );
        }
        ExperimentConfig::LambdaSweep { lambdas } => {
            let solver = config.solver_config(Some(seed));
            let rows = lambda_sweep(&spec, lambdas, &solver)
                .map_err(|e| CliError::Config(e.to_string()))?;
            io::write_json(&dir.join("report.json"), &rows)
                .map_err(|e| CliError::Config(e.to_string()))?;
            io::write_lambda_csv(&dir.join("lambda_sweep.csv"), &rows)
                .map_err(|e| CliError::Config(e.to_string()))?;
            println!("lambda sweep over {} values, artifacts in {}", rows.len(), dir.display());
        }
        ExperimentConfig::Perturb { deltas } => {
            let solver = config.solver_config(Some(seed));
            let report = perturbation_experiment(&spec, deltas, &solver, seed)
                .map_err(|e| CliError::NonConvergence(e.to_string()))?;
            io::write_json(&dir.join("report.json"), &report)
                .map_err(|e| CliError::Config(e.to_string()))?;
            println!(
                "perturbation: slope {:.3}, artifacts in {}",
                report.slope,
                dir.display()
            );
        }
        ExperimentConfig::Solve | ExperimentConfig::Verify => {
            return Err(CliError::Config(
                "sweep requires a tm/trace/sharpness/lambda_sweep/perturb experiment".into(),
            ));
        }
    }
    Ok(())
}
