use anyhow::{bail, Context, Result};
use krecycle::eigrecycle::KsConfig;
use krecycle::precond::FactorKind;
use krecycle::transfer::TransferOptions;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    /// Poisson with Robin conditions on a blade outline with a moving
    /// circular hole.
    PoissonHole,
    /// Plane-stress elasticity on a bent rod that straightens step by step.
    ElasticityRod,
    /// Poisson (`f = 1`, zero Dirichlet) on a rotated square translated
    /// along x.
    MovingSquare,
}

/// Parameters of the geometry sequence. Unused fields are ignored by the
/// other problems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SequenceConfig {
    /// Number of geometries (step 0 included).
    pub steps: usize,
    /// Hole or square translation per step.
    pub offset: [f64; 2],
    /// Rod sagitta at step 0 and its change per step.
    pub sagitta: f64,
    pub sagitta_step: f64,
}

impl Default for SequenceConfig {
    fn default() -> Self {
        Self {
            steps: 4,
            offset: [0.0, 0.0],
            sagitta: 0.3,
            sagitta_step: -0.01,
        }
    }
}

/// Plane-stress material of the rod.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaterialConfig {
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
}

impl Default for MaterialConfig {
    /// Alumina-like, modulus in GPa.
    fn default() -> Self {
        Self {
            youngs_modulus: 300.0,
            poisson_ratio: 0.22,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Relative residual tolerance.
    pub tol: f64,
    /// `None`: `5·√N`.
    pub maxit: Option<usize>,
    /// Recycle space dimension.
    pub k: usize,
    /// `None`: unpreconditioned.
    pub precond: Option<FactorKind>,
    pub rcm: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            maxit: None,
            k: 15,
            precond: Some(FactorKind::Ic0),
            rcm: false,
        }
    }
}

impl SolverConfig {
    pub fn maxit_for(&self, n: usize) -> usize {
        self.maxit.unwrap_or_else(|| (5.0 * (n as f64).sqrt()).ceil() as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: Problem,
    /// Background grid nodes `(nx, ny)`.
    pub grid: [usize; 2],
    #[serde(default)]
    pub sequence: SequenceConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub material: MaterialConfig,
    /// Warm-start Krylov-Schur between transfer and solve.
    #[serde(default)]
    pub ks: Option<KsConfig>,
    #[serde(default)]
    pub transfer: TransferOptions,
    /// Also solve every step without recycling.
    #[serde(default = "yes")]
    pub cold_baseline: bool,
    /// Dimension of the reference eigenspace for angle tables; `None`
    /// disables the oracle.
    #[serde(default)]
    pub oracle_dim: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

fn yes() -> bool {
    true
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    /// Desk-scale defaults for each problem.
    pub fn preset(problem: Problem) -> Self {
        let (grid, sequence, solver) = match problem {
            Problem::PoissonHole => (
                [181, 91],
                SequenceConfig {
                    steps: 4,
                    // Three grid steps of the 181×91 grid over [0,2]×[0,1].
                    offset: [3.0 * 2.0 / 180.0, 0.0],
                    ..SequenceConfig::default()
                },
                SolverConfig::default(),
            ),
            Problem::ElasticityRod => (
                [151, 101],
                SequenceConfig {
                    steps: 4,
                    sagitta: 0.3,
                    // Midline moves about one grid step per step.
                    sagitta_step: -0.01,
                    ..SequenceConfig::default()
                },
                SolverConfig {
                    k: 20,
                    precond: Some(FactorKind::Ict { droptol: 1e-3 }),
                    rcm: true,
                    ..SolverConfig::default()
                },
            ),
            Problem::MovingSquare => (
                [101, 101],
                SequenceConfig {
                    steps: 2,
                    offset: [0.1, 0.0],
                    ..SequenceConfig::default()
                },
                SolverConfig::default(),
            ),
        };
        // The mapped space alone does not help the translated square.
        let ks = (problem == Problem::MovingSquare).then(|| KsConfig {
            cycles: 2,
            m: 65,
            k: 15,
            conv_tol: 2e-8,
            ..KsConfig::default()
        });
        Self {
            problem,
            grid,
            sequence,
            solver,
            material: MaterialConfig::default(),
            ks,
            transfer: TransferOptions::default(),
            cold_baseline: true,
            oracle_dim: None,
            seed: 0,
            output_dir: default_output(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("parsing experiment configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.solver.tol > 0.0 && self.solver.tol < 1.0) {
            bail!("solver.tol must lie in (0, 1), got {}", self.solver.tol);
        }
        if self.grid[0] < 2 || self.grid[1] < 2 {
            bail!("grid needs at least 2 nodes per axis");
        }
        if self.sequence.steps == 0 {
            bail!("sequence.steps must be at least 1");
        }
        if let Some(ks) = &self.ks {
            if ks.k == 0 || ks.k >= ks.m {
                bail!("ks needs 0 < k < m");
            }
            if !(ks.conv_tol > 0.0) {
                bail!("ks.conv_tol must be positive");
            }
        }
        let m = &self.material;
        if !(m.youngs_modulus > 0.0) || !(m.poisson_ratio > -1.0 && m.poisson_ratio < 0.5) {
            bail!("material needs E > 0 and -1 < nu < 0.5");
        }
        if self.oracle_dim == Some(0) {
            bail!("oracle_dim must be positive");
        }
        Ok(())
    }

    pub fn dofs_per_node(&self) -> usize {
        match self.problem {
            Problem::ElasticityRod => 2,
            _ => 1,
        }
    }
}
