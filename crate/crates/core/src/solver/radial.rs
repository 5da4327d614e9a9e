//! Radial backend: the r^{N-1}-weighted flux form reduced to a two-point
//! problem on [0, R], discretized by finite volumes on the graded mesh.
//!
//! Control surfaces sit at cell midpoints with area r_{i+1/2}^{N-1}; the
//! flux through r = 0 vanishes by symmetry, so the first equation integrates
//! over the half cell [0, r_{1/2}]. The outer node carries the Dirichlet
//! value 0 and is eliminated from the system.

use super::{ConvectionScheme, SolverConfig};
use crate::error::{Error, Result};
use crate::mesh::RadialMesh;

/// Edge gradients (u_{i+1} - u_i) / dr_i.
fn edge_grads(mesh: &RadialMesh, u: &[f64]) -> Vec<f64> {
    (0..mesh.cells())
        .map(|e| (u[e + 1] - u[e]) / mesh.spacing(e))
        .collect()
}

fn edge_w(grads: &[f64], eps: f64) -> Vec<f64> {
    grads.iter().map(|d| (d * d + eps * eps).sqrt()).collect()
}

/// Per-edge regularized flux d / sqrt(d^2 + eps^2); always in (-1, 1).
pub fn edge_flux(mesh: &RadialMesh, u: &[f64], eps: f64) -> Vec<f64> {
    let grads = edge_grads(mesh, u);
    grads.iter().map(|d| d / (d * d + eps * eps).sqrt()).collect()
}

/// Edge flux averaged to nodes; node 0 is 0 by radial symmetry.
pub fn node_flux(mesh: &RadialMesh, u: &[f64], eps: f64) -> Vec<f64> {
    let edge = edge_flux(mesh, u, eps);
    let n = mesh.cells();
    let mut nodes = Vec::with_capacity(n + 1);
    nodes.push(0.0);
    for i in 1..n {
        nodes.push(0.5 * (edge[i - 1] + edge[i]));
    }
    nodes.push(edge[n - 1]);
    nodes
}

/// Solve a tridiagonal system in place (Thomas algorithm).
fn thomas(lower: &[f64], diag: &mut [f64], upper: &[f64], rhs: &mut [f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    for i in 1..n {
        let pivot = diag[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::LinearSolve(format!(
                "zero or non-finite pivot {pivot} at row {}",
                i - 1
            )));
        }
        let m = lower[i] / pivot;
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    let last = diag[n - 1];
    if last == 0.0 || !last.is_finite() {
        return Err(Error::LinearSolve(format!("zero or non-finite pivot {last} at last row")));
    }
    let mut x = vec![0.0; n];
    x[n - 1] = rhs[n - 1] / last;
    for i in (0..n - 1).rev() {
        x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
    }
    Ok(x)
}

/// One lagged-diffusivity step; returns the full node vector with the
/// boundary value set to exactly 0.
pub fn picard_step(
    mesh: &RadialMesh,
    u_k: &[f64],
    f: &[f64],
    eps: f64,
    config: &SolverConfig,
) -> Result<Vec<f64>> {
    let n = mesh.cells();
    let grads = edge_grads(mesh, u_k);
    let w = edge_w(&grads, eps);
    // Unknowns are nodes 0..n-1.
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let implicit = config.convection == ConvectionScheme::Implicit;
    for i in 0..n {
        let (vol_l, vol_r) = mesh.half_volumes(i);
        rhs[i] = mesh.node_volume(i) * f[i];
        // Right edge e = i (always present; couples to u[i+1], which is the
        // eliminated boundary node when i = n-1).
        {
            let e = i;
            let coef = mesh.edge_area(e) / (mesh.spacing(e) * w[e]);
            diag[i] += coef;
            if i + 1 < n {
                upper[i] -= coef;
            }
            if implicit {
                let c = vol_r * grads[e] / (w[e] * mesh.spacing(e));
                diag[i] -= c;
                if i + 1 < n {
                    upper[i] += c;
                }
                rhs[i] -= vol_r * eps * eps / w[e];
            } else {
                rhs[i] -= vol_r * w[e];
            }
        }
        // Left edge e = i - 1.
        if i > 0 {
            let e = i - 1;
            let coef = mesh.edge_area(e) / (mesh.spacing(e) * w[e]);
            diag[i] += coef;
            lower[i] -= coef;
            if implicit {
                let c = vol_l * grads[e] / (w[e] * mesh.spacing(e));
                diag[i] += c;
                lower[i] -= c;
                rhs[i] -= vol_l * eps * eps / w[e];
            } else {
                rhs[i] -= vol_l * w[e];
            }
        }
    }
    let interior = thomas(&lower, &mut diag, &upper, &mut rhs)?;
    let mut next = Vec::with_capacity(n + 1);
    if implicit {
        next.extend_from_slice(&interior);
    } else {
        // Damped update toward the symmetric-solve iterate.
        next.extend(
            interior
                .iter()
                .zip(u_k)
                .map(|(hat, old)| old + config.damping * (hat - old)),
        );
    }
    next.push(0.0);
    Ok(next)
}

/// Volume-weighted L2 norm of the discrete residual over nodes 0..n-1.
pub fn residual_norm(mesh: &RadialMesh, u: &[f64], f: &[f64], eps: f64) -> f64 {
    let n = mesh.cells();
    let grads = edge_grads(mesh, u);
    let w = edge_w(&grads, eps);
    let mut acc = 0.0;
    for i in 0..n {
        let (vol_l, vol_r) = mesh.half_volumes(i);
        let mut flux_balance = -mesh.edge_area(i) * grads[i] / w[i];
        let mut absorb = vol_r * w[i];
        if i > 0 {
            flux_balance += mesh.edge_area(i - 1) * grads[i - 1] / w[i - 1];
            absorb += vol_l * w[i - 1];
        }
        let vol = mesh.node_volume(i);
        let res = (flux_balance + absorb) / vol - f[i];
        acc += vol * res * res;
    }
    (mesh.sphere_area() * acc).sqrt()
}
