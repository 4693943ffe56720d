//! TOML run configuration: surface, curvature, solver and experiment
//! sections. Generator/curvature compatibility is validated before any
//! computation.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use curvmf::fields::CurvatureFamily;
use curvmf::meanfield::ProblemSpec;
use curvmf::mesh::{gen_flat_cylinder, gen_hemisphere, gen_pair_of_pants, SymmetryOrbits};
use curvmf::minimize::SolverConfig;
use curvmf::Mesh64;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub surface: SurfaceConfig,
    pub curvature: CurvatureConfig,
    #[serde(default)]
    pub solver: SolverSection,
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceConfig {
    Hemisphere {
        k: usize,
        refinement: usize,
    },
    Cylinder {
        length: f64,
        n_axial: usize,
        n_circ: usize,
    },
    PairOfPants {
        boundary_lengths: [f64; 3],
        refinement: usize,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureConfig {
    pub k_family: FamilyConfig,
    pub h_family: FamilyConfig,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    Constant {
        value: f64,
    },
    AzimuthalCosine {
        offset: f64,
        amplitude: f64,
        mode: u32,
    },
    CapBump {
        center_vertex: usize,
        radius: f64,
        height: f64,
    },
    Csv {
        path: PathBuf,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub grad_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub memory: Option<usize>,
    pub domain_margin: Option<f64>,
    pub backtrack_factor: Option<f64>,
    pub armijo_c: Option<f64>,
    pub symmetric: Option<bool>,
    pub seed: Option<u64>,
    /// Coupling for the λ-family (χ>0 surfaces only).
    pub lambda: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentConfig {
    Solve,
    Verify,
    Tm {
        samples: Option<usize>,
        spike_amplitude_max: Option<f64>,
        spike_radius: Option<f64>,
    },
    Trace {
        samples: Option<usize>,
        epsilon: Option<f64>,
        spike_amplitude_max: Option<f64>,
        spike_radius: Option<f64>,
    },
    Sharpness {
        d0: f64,
        n_min_exp: u32,
        n_max_exp: u32,
        collar: f64,
        boundary_loop: Option<usize>,
    },
    LambdaSweep {
        lambdas: Vec<f64>,
    },
    Perturb {
        deltas: Vec<f64>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub mesh_off: Option<bool>,
    pub stiffness_coo: Option<bool>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Build the mesh (with orbits when the surface carries them).
    pub fn build_mesh(
        &self,
        refinement_override: Option<usize>,
    ) -> Result<(Mesh64, Option<SymmetryOrbits>), CliError> {
        match &self.surface {
            SurfaceConfig::Hemisphere { k, refinement } => {
                let r = refinement_override.unwrap_or(*refinement);
                let (mesh, orbits) =
                    gen_hemisphere::<f64>(*k, r).map_err(|e| CliError::Config(e.to_string()))?;
                Ok((mesh, Some(orbits)))
            }
            SurfaceConfig::Cylinder {
                length,
                n_axial,
                n_circ,
            } => {
                let scale = refinement_override.unwrap_or(1).max(1);
                let mesh = gen_flat_cylinder::<f64>(*length, n_axial * scale, n_circ * scale)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                Ok((mesh, None))
            }
            SurfaceConfig::PairOfPants {
                boundary_lengths,
                refinement,
            } => {
                let r = refinement_override.unwrap_or(*refinement);
                let mesh = gen_pair_of_pants::<f64>(*boundary_lengths, r)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                Ok((mesh, None))
            }
        }
    }

    pub fn build_spec(
        &self,
        refinement_override: Option<usize>,
    ) -> Result<ProblemSpec<f64>, CliError> {
        let (mesh, orbits) = self.build_mesh(refinement_override)?;
        let k = evaluate_family(&self.curvature.k_family, &mesh)?;
        let h = evaluate_family(&self.curvature.h_family, &mesh)?;
        let lambda = self.solver.lambda;
        ProblemSpec::new(mesh, orbits, k, h, lambda)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn solver_config(&self, seed_override: Option<u64>) -> SolverConfig<f64> {
        let mut c = SolverConfig::default();
        if let Some(v) = self.solver.grad_tol {
            c.grad_tol = Some(v);
        }
        if let Some(v) = self.solver.max_iters {
            c.max_iters = v;
        }
        if let Some(v) = self.solver.memory {
            c.memory = v;
        }
        if let Some(v) = self.solver.domain_margin {
            c.domain_margin = v;
        }
        if let Some(v) = self.solver.backtrack_factor {
            c.backtrack_factor = v;
        }
        if let Some(v) = self.solver.armijo_c {
            c.armijo_c = v;
        }
        if let Some(v) = self.solver.symmetric {
            c.symmetric = v;
        }
        c.seed = seed_override.or(self.solver.seed).unwrap_or(0);
        c
    }
}

fn evaluate_family(family: &FamilyConfig, mesh: &Mesh64) -> Result<Vec<f64>, CliError> {
    let built = match family {
        FamilyConfig::Constant { value } => CurvatureFamily::Constant(*value),
        FamilyConfig::AzimuthalCosine {
            offset,
            amplitude,
            mode,
        } => CurvatureFamily::AzimuthalCosine {
            offset: *offset,
            amplitude: *amplitude,
            mode: *mode,
        },
        FamilyConfig::CapBump {
            center_vertex,
            radius,
            height,
        } => CurvatureFamily::CapBump {
            center: *center_vertex,
            radius: *radius,
            height: *height,
        },
        FamilyConfig::Csv { path } => {
            let vals = curvmf::io::read_samples_csv(path, mesh.vertex_count())
                .map_err(|e| CliError::Config(e.to_string()))?;
            CurvatureFamily::Samples(vals)
        }
    };
    built
        .evaluate(mesh)
        .map_err(|e| CliError::Config(e.to_string()))
}
