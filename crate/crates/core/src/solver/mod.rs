//! Epsilon-regularized solver for
//! -div(grad u / w) + w = f,  w = sqrt(|grad u|^2 + eps^2),
//! with homogeneous Dirichlet data, via lagged-diffusivity fixed-point
//! iteration and continuation in eps.
//!
//! Both nonlinear coefficients are frozen at the previous iterate, so each
//! step is a linear elliptic solve that is well posed for any eps > 0, and a
//! fixed point of the step solves the regularized equation exactly: the
//! lagged absorption (grad u_k . grad u_{k+1} + eps^2)/w_k reduces to w at
//! u_{k+1} = u_k. Continuation shrinks eps geometrically, warm-starting each
//! level from the previous one, which keeps iteration counts bounded as the
//! conditioning of 1/w degrades.

mod grid;
mod radial;

use crate::datum::{evaluate_datum, DatumSpec};
use crate::error::{Error, Result};
use crate::field::{Mesh, ScalarField, VectorData, VectorField};
use std::time::Instant;

/// How the convection-like term (grad u_k . grad u_{k+1})/w_k enters the
/// linear step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvectionScheme {
    /// Kept in the matrix; the radial step then solves the full linearized
    /// problem in one (nonsymmetric) tridiagonal solve.
    Implicit,
    /// Evaluated at u_k and moved to the right-hand side, keeping the inner
    /// solve symmetric positive definite; the update is damped.
    LaggedRhs,
}

/// Iteration scaffolding of the continuation solver.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub eps_start: f64,
    pub eps_min: f64,
    /// Geometric shrink factor of the eps schedule, in (0, 1).
    pub shrink: f64,
    /// Relative fixed-point tolerance on the update norm.
    pub tol_fp: f64,
    /// Residual tolerance; the final level keeps iterating until the
    /// nonlinear residual drops below it.
    pub tol_res: f64,
    pub max_iters: usize,
    /// Relative tolerance of the inner linear solve (iterative backends).
    pub linear_tol: f64,
    /// Update damping of the lagged-right-hand-side scheme.
    pub damping: f64,
    pub convection: ConvectionScheme,
    /// Clamp negative undershoots to zero in the returned field (they are
    /// always reported either way).
    pub clip_negative: bool,
}

impl SolverConfig {
    /// Defaults scaled to a domain of size `radius`:
    /// eps from 1e-2 R down to 1e-6 R with shrink 1/4.
    pub fn for_radius(radius: f64) -> Self {
        Self {
            eps_start: 1e-2 * radius,
            eps_min: 1e-6 * radius,
            shrink: 0.25,
            tol_fp: 1e-12,
            tol_res: 1e-5,
            max_iters: 600,
            linear_tol: 1e-12,
            damping: 0.5,
            convection: ConvectionScheme::Implicit,
            clip_negative: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_start > 0.0) || !(self.eps_min > 0.0) || self.eps_min > self.eps_start {
            return Err(Error::Config(format!(
                "need 0 < eps_min <= eps_start, got {} and {}",
                self.eps_min, self.eps_start
            )));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::Config(format!("shrink {} must lie in (0,1)", self.shrink)));
        }
        if !(self.tol_fp > 0.0) || !(self.tol_res > 0.0) || !(self.linear_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config(format!("damping {} must lie in (0,1]", self.damping)));
        }
        Ok(())
    }

    /// The eps continuation ladder: geometric from eps_start with the final
    /// level clamped to exactly eps_min.
    pub fn eps_schedule(&self) -> Vec<f64> {
        let mut levels = Vec::new();
        let mut eps = self.eps_start;
        while eps > self.eps_min * (1.0 + 1e-12) {
            levels.push(eps);
            eps *= self.shrink;
        }
        levels.push(self.eps_min);
        levels
    }
}

/// Per-level record of the continuation loop.
#[derive(Debug, Clone)]
pub struct EpsLevelRecord {
    pub eps: f64,
    pub iterations: usize,
    pub update_norm: f64,
    pub residual: f64,
}

/// Solved field with its extracted calibration field and diagnostics.
#[derive(Debug, Clone)]
pub struct SolutionReport {
    pub u: ScalarField,
    pub z: VectorField,
    pub levels: Vec<EpsLevelRecord>,
    pub final_eps: f64,
    pub final_residual: f64,
    pub converged: bool,
    /// Most negative value of the solution if it undershoots below -tol_res.
    pub negative_undershoot: Option<f64>,
    pub clipped: bool,
    pub wall_seconds: f64,
}

/// One lagged-diffusivity step at fixed eps: returns u_{k+1} solving the
/// linearized problem. Boundary values of the output are exactly zero.
pub fn picard_step(u_k: &ScalarField, f: &ScalarField, eps: f64) -> Result<ScalarField> {
    picard_step_with(u_k, f, eps, &SolverConfig::for_radius(domain_scale(u_k.mesh())))
}

/// [`picard_step`] under an explicit configuration (convection scheme,
/// damping, linear tolerance).
pub fn picard_step_with(
    u_k: &ScalarField,
    f: &ScalarField,
    eps: f64,
    config: &SolverConfig,
) -> Result<ScalarField> {
    if !(eps > 0.0) {
        return Err(Error::Config(format!("eps = {eps} must be positive")));
    }
    if !u_k.mesh().compatible(f.mesh()) {
        return Err(Error::Data("field and datum live on different meshes".into()));
    }
    match u_k.mesh() {
        Mesh::Radial(m) => {
            let next = radial::picard_step(m, u_k.values(), f.values(), eps, config)?;
            ScalarField::new(u_k.mesh().clone(), next)
        }
        Mesh::Grid(g) => {
            let next = grid::picard_step(g, u_k.values(), f.values(), eps, config)?;
            ScalarField::new(u_k.mesh().clone(), next)
        }
    }
}

/// Weighted L2 norm of -div(grad u/w) + w - f over interior sites, with the
/// same discrete operators as the Picard step, so a converged fixed point
/// has residual at the level of the linear-solve tolerance.
pub fn nonlinear_residual(u: &ScalarField, f: &ScalarField, eps: f64) -> f64 {
    assert!(eps > 0.0, "eps must be positive");
    match u.mesh() {
        Mesh::Radial(m) => radial::residual_norm(m, u.values(), f.values(), eps),
        Mesh::Grid(g) => grid::residual_norm(g, u.values(), f.values(), eps),
    }
}

/// The regularized flux z = grad u / sqrt(|grad u|^2 + eps^2); per face on a
/// grid, averaged to nodes from the adjacent edges on a radial mesh. The
/// supremum of magnitudes is strictly below 1 by construction.
pub fn extract_vector_field(u: &ScalarField, eps: f64) -> Result<VectorField> {
    if !(eps > 0.0) {
        return Err(Error::Config(format!("eps = {eps} must be positive")));
    }
    match u.mesh() {
        Mesh::Radial(m) => {
            let values = radial::node_flux(m, u.values(), eps);
            VectorField::new(u.mesh().clone(), VectorData::RadialNodes(values))
        }
        Mesh::Grid(g) => {
            let (x, y) = grid::face_flux(g, u.values(), eps);
            VectorField::new(u.mesh().clone(), VectorData::GridFaces { x, y })
        }
    }
}

/// Per-edge flux on a radial mesh (the quantity averaged by
/// [`extract_vector_field`]); used by saturation diagnostics.
pub fn radial_edge_flux(u: &ScalarField, eps: f64) -> Result<Vec<f64>> {
    match u.mesh() {
        Mesh::Radial(m) => Ok(radial::edge_flux(m, u.values(), eps)),
        _ => Err(Error::Data("edge flux is defined on radial meshes".into())),
    }
}

/// Continuation solve: runs the Picard iteration at each eps level of the
/// schedule, warm-starting from the previous level, and reports the final
/// field, flux, residual history and convergence flag. Hitting max_iters on
/// a level is recorded (converged = false), not an error, so parameter
/// sweeps can tabulate failures.
pub fn solve(mesh: &Mesh, datum: &DatumSpec, config: &SolverConfig) -> Result<SolutionReport> {
    config.validate()?;
    let start = Instant::now();
    let f = evaluate_datum(datum, mesh)?;
    let schedule = config.eps_schedule();
    let mut u = ScalarField::zeros(mesh.clone());
    let mut levels = Vec::with_capacity(schedule.len());
    let mut converged = true;
    for (li, &eps) in schedule.iter().enumerate() {
        let last_level = li + 1 == schedule.len();
        let mut iterations = 0;
        let mut update;
        loop {
            let next = picard_step_with(&u, &f, eps, config)?;
            update = next
                .values()
                .iter()
                .zip(u.values())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let scale = next.max_abs().max(1e-30);
            u = next;
            iterations += 1;
            // The final level must also meet the residual target, not just
            // the fixed-point criterion.
            let settled = update <= config.tol_fp * scale
                && (!last_level || nonlinear_residual(&u, &f, eps) <= config.tol_res);
            if settled {
                break;
            }
            if iterations >= config.max_iters {
                converged = false;
                break;
            }
        }
        levels.push(EpsLevelRecord {
            eps,
            iterations,
            update_norm: update,
            residual: nonlinear_residual(&u, &f, eps),
        });
    }
    let final_eps = *schedule.last().unwrap();
    let final_residual = levels.last().unwrap().residual;
    let min_value = u.min();
    let negative_undershoot = (min_value < -config.tol_res).then_some(min_value);
    let mut clipped = false;
    if config.clip_negative && min_value < 0.0 {
        u = u.map(|v| v.max(0.0))?;
        clipped = true;
    }
    let z = extract_vector_field(&u, final_eps)?;
    Ok(SolutionReport {
        u,
        z,
        levels,
        final_eps,
        final_residual,
        converged,
        negative_undershoot,
        clipped,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

fn domain_scale(mesh: &Mesh) -> f64 {
    match mesh {
        Mesh::Radial(m) => m.radius(),
        Mesh::Grid(g) => 0.5 * g.spacing() * g.nx().max(g.ny()) as f64,
    }
}
