use crate::config::{ExperimentConfig, MaterialConfig, Problem};
use crate::geometry::{background_grid, generate_geometry_sequence, tags};
use crate::oracle::smallest_eigenspace;
use anyhow::{Context, Result};
use krecycle::eigrecycle::{warmstart_krylov_schur, KsConfig, KsOutcome};
use krecycle::fem::{assemble_elasticity, assemble_poisson, AssembledSystem, ElasticBc, ElasticityProblem, PoissonBc, PoissonProblem};
use krecycle::linalg::{principal_angles, DenseMatrix};
use krecycle::mesh::{adapt_to_boundary, AdaptedMesh, BackgroundGrid, Geometry};
use krecycle::precond::{build_operator, PrecondConfig, PrecondOperator};
use krecycle::solver::{minres, rminres, RecycleSpace, SolveOptions, SolveReport};
use krecycle::transfer::{transfer_recycle_basis, TransferReport};
use std::collections::BTreeMap;

pub fn poisson_problem(problem: Problem) -> PoissonProblem {
    let boundary = match problem {
        // Outer ambient temperature twice the cooling channel temperature.
        Problem::PoissonHole => BTreeMap::from([
            (tags::OUTER, PoissonBc::Robin { alpha: 1.0, ambient: 2.0 }),
            (tags::HOLE, PoissonBc::Robin { alpha: 1.0, ambient: 1.0 }),
        ]),
        _ => BTreeMap::from([(tags::OUTER, PoissonBc::Dirichlet { value: 0.0 })]),
    };
    let source = if problem == Problem::MovingSquare { 1.0 } else { 0.0 };
    PoissonProblem {
        conductivity: 1.0,
        source,
        boundary,
    }
}

/// Plane-stress rod clamped on the left under axial tension on the right.
pub fn elasticity_problem(material: &MaterialConfig) -> ElasticityProblem {
    ElasticityProblem {
        youngs_modulus: material.youngs_modulus,
        poisson_ratio: material.poisson_ratio,
        thickness: 1.0,
        boundary: BTreeMap::from([
            (tags::FREE, ElasticBc::Free),
            (tags::CLAMPED, ElasticBc::Clamped),
            (tags::LOADED, ElasticBc::Traction { tx: 1.0, ty: 0.0 }),
        ]),
    }
}

/// Mesh, assembled system and preconditioned operator of one step.
pub struct StepSystem {
    pub mesh: AdaptedMesh,
    pub system: AssembledSystem,
    pub op: PrecondOperator,
    /// Right-hand side in preconditioned coordinates.
    pub rhs: Vec<f64>,
}

pub fn build_step(cfg: &ExperimentConfig, grid: &BackgroundGrid, geom: &Geometry) -> Result<StepSystem> {
    let mesh = adapt_to_boundary(grid, geom)?;
    let system = match cfg.problem {
        Problem::ElasticityRod => assemble_elasticity(&mesh, &elasticity_problem(&cfg.material))?,
        p => assemble_poisson(&mesh, &poisson_problem(p))?,
    };
    let pc = PrecondConfig {
        kind: cfg.solver.precond,
        rcm: cfg.solver.rcm,
    };
    let op = build_operator(&system.k, system.dofs_per_node, &pc)?;
    let rhs = op.rhs(&system.f);
    Ok(StepSystem { mesh, system, op, rhs })
}

/// Principal-angle cosines of candidate spaces against a reference
/// eigenspace, one column per space.
#[derive(Debug, Clone)]
pub struct AngleTable {
    pub step: usize,
    pub eigenvalues: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

pub fn angle_table(step: usize, reference: (&[f64], &DenseMatrix), spaces: &[(String, DenseMatrix)]) -> Result<AngleTable> {
    let columns = spaces
        .iter()
        .map(|(name, s)| Ok((name.clone(), principal_angles(reference.1, s)?)))
        .collect::<Result<_>>()?;
    Ok(AngleTable {
        step,
        eigenvalues: reference.0.to_vec(),
        columns,
    })
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub step: usize,
    pub n: usize,
    /// The recycled solve (step 0: plain MINRES that harvests the space).
    pub report: SolveReport,
    pub cold: Option<SolveReport>,
    pub transfer: Option<TransferReport>,
    pub ks: Option<KsOutcome>,
    pub recycle_dim: usize,
}

impl StepResult {
    pub fn converged(&self) -> bool {
        self.report.converged && self.cold.as_ref().map_or(true, |c| c.converged)
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: Vec<StepResult>,
    pub angles: Vec<AngleTable>,
}

impl RunSummary {
    pub fn all_converged(&self) -> bool {
        self.steps.iter().all(StepResult::converged)
    }
}

/// Step 0 solved by MINRES while harvesting a recycle space; each later
/// step maps the space to the new mesh, optionally improves it by
/// warm-start Krylov-Schur, and solves by recycling MINRES. Non-converged
/// solves are recorded and the chain continues.
pub fn run_chain(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let grid = background_grid(cfg)?;
    let geoms = generate_geometry_sequence(cfg)?;
    let k = cfg.solver.k;
    let mut steps = Vec::with_capacity(geoms.len());
    let mut angles = Vec::new();
    let mut prev: Option<(StepSystem, DenseMatrix)> = None;
    for (i, geom) in geoms.iter().enumerate() {
        let cur = build_step(cfg, &grid, geom).with_context(|| format!("building step {i}"))?;
        let n = cur.system.n();
        let opts = SolveOptions::new(cfg.solver.tol, cfg.solver.maxit_for(n));
        let (rs, transfer, ks) = match &prev {
            None => (RecycleSpace::empty(n), None, None),
            Some((_, w)) if w.cols() == 0 => (RecycleSpace::empty(n), None, None),
            Some((old, w)) => {
                let (mapped, report) = transfer_recycle_basis(
                    w,
                    &old.mesh,
                    &cur.mesh,
                    old.op.factor(),
                    cur.op.factor(),
                    cfg.dofs_per_node(),
                    &cfg.transfer,
                )?;
                let mut spaces = vec![("mapped".to_string(), mapped.clone())];
                let (basis, ks) = match &cfg.ks {
                    Some(kc) => {
                        let out = warmstart_krylov_schur(&cur.op, &mapped, kc)?;
                        if cfg.oracle_dim.is_some() {
                            for c in 1..=kc.cycles {
                                let partial = KsConfig { cycles: c, ..kc.clone() };
                                let o = warmstart_krylov_schur(&cur.op, &mapped, &partial)?;
                                spaces.push((format!("ks{c}"), o.extended_block()));
                            }
                        }
                        (out.ritz_block.clone(), Some(out))
                    }
                    None => (mapped, None),
                };
                if let Some(dim) = cfg.oracle_dim {
                    let (vals, vecs) = smallest_eigenspace(&cur.op, dim, 1e-10, cfg.seed)?;
                    angles.push(angle_table(i, (&vals, &vecs), &spaces)?);
                }
                (RecycleSpace::from_basis(&cur.op, &basis)?, Some(report), ks)
            }
        };
        let sol = rminres(&cur.op, &cur.rhs, None, &rs, &opts, k)?;
        let cold = match (i, cfg.cold_baseline) {
            (0, _) => None,
            (_, true) => Some(minres(&cur.op, &cur.rhs, None, &opts)?.1),
            (_, false) => None,
        };
        steps.push(StepResult {
            step: i,
            n,
            recycle_dim: rs.k(),
            report: sol.report,
            cold,
            transfer,
            ks,
        });
        prev = Some((cur, sol.recycle.w().clone()));
    }
    Ok(RunSummary { steps, angles })
}

impl StepResult {
    /// Iterations of the solve without recycling: the cold baseline, or the
    /// step-0 solve itself.
    pub fn cold_iterations(&self) -> Option<usize> {
        match (&self.cold, self.step) {
            (Some(c), _) => Some(c.iterations),
            (None, 0) => Some(self.report.iterations),
            _ => None,
        }
    }
}
