//! Discretizations of the domain: graded radial meshes for balls B_R(0)
//! in dimension N >= 2, and masked uniform 2D grids.

use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::sync::Arc;

/// Minimum number of cells accepted by [`RadialMesh::build`].
pub const MIN_RADIAL_CELLS: usize = 4;

/// Surface area of the unit sphere S^{N-1} in R^N.
///
/// sigma_{N-1} = 2 pi^{N/2} / Gamma(N/2), evaluated with the exact
/// half-integer Gamma values so no special-function crate is needed.
pub fn unit_sphere_area(dim: usize) -> f64 {
    assert!(dim >= 1, "dimension must be at least 1");
    // Gamma(N/2): for even N = 2m it is (m-1)!; for odd N = 2m+1 it is
    // (2m)! sqrt(pi) / (4^m m!).
    if dim % 2 == 0 {
        let m = dim / 2;
        let mut gamma = 1.0;
        for k in 1..m {
            gamma *= k as f64;
        }
        2.0 * PI.powi(m as i32) / gamma
    } else {
        let m = dim / 2; // N = 2m + 1
        let mut gamma = PI.sqrt();
        for k in 0..m {
            gamma *= 0.5 + k as f64;
        }
        2.0 * PI.powi(dim as i32 / 2) * PI.sqrt() / gamma
    }
}

/// Graded one-dimensional mesh on [0, R] standing for the ball B_R(0).
///
/// Nodes are r_i = R (i/n)^g; grading g > 1 concentrates resolution at the
/// origin where power-law data are singular.
#[derive(Debug, Clone)]
pub struct RadialMesh {
    dim: usize,
    radius: f64,
    grading: f64,
    nodes: Vec<f64>,
}

impl RadialMesh {
    /// Build a radial mesh with `cells` cells (`cells + 1` nodes).
    pub fn build(dim: usize, radius: f64, cells: usize, grading: f64) -> Result<Arc<Self>> {
        if dim < 2 {
            return Err(Error::Config(format!("dimension N = {dim} must be >= 2")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Config(format!("radius R = {radius} must be positive")));
        }
        if cells < MIN_RADIAL_CELLS {
            return Err(Error::Config(format!(
                "cell count n = {cells} must be >= {MIN_RADIAL_CELLS}"
            )));
        }
        if !(grading >= 1.0) || !grading.is_finite() {
            return Err(Error::Config(format!("grading g = {grading} must be >= 1")));
        }
        let n = cells;
        let mut nodes = Vec::with_capacity(n + 1);
        for i in 0..=n {
            nodes.push(radius * (i as f64 / n as f64).powf(grading));
        }
        nodes[0] = 0.0;
        nodes[n] = radius;
        for i in 0..n {
            if !(nodes[i] < nodes[i + 1]) {
                return Err(Error::Config(format!(
                    "nodes are not strictly increasing near index {i}"
                )));
            }
        }
        Ok(Arc::new(Self { dim, radius, grading, nodes }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    /// Node radii r_0 = 0 < r_1 < ... < r_n = R.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of cells n (= number of edges).
    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Number of nodes n + 1.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Cell width r_{i+1} - r_i.
    pub fn spacing(&self, edge: usize) -> f64 {
        self.nodes[edge + 1] - self.nodes[edge]
    }

    /// Largest cell width; the resolution h quoted in tolerances.
    pub fn max_spacing(&self) -> f64 {
        (0..self.cells())
            .map(|i| self.spacing(i))
            .fold(0.0, f64::max)
    }

    /// Midpoint radius of a cell, used as the control surface and as the
    /// quadrature point; never equals zero, so singular integrands at the
    /// origin are not evaluated there.
    pub fn edge_midpoint(&self, edge: usize) -> f64 {
        0.5 * (self.nodes[edge] + self.nodes[edge + 1])
    }

    /// sigma_{N-1} for this mesh's dimension.
    pub fn sphere_area(&self) -> f64 {
        unit_sphere_area(self.dim)
    }

    /// Volume (per unit solid angle) of the control cell around node `i`:
    /// the integral of r^{N-1} over [r_{i-1/2}, r_{i+1/2}], with half cells
    /// at both ends.
    pub fn node_volume(&self, i: usize) -> f64 {
        let n = self.cells();
        let lo = if i == 0 { 0.0 } else { self.edge_midpoint(i - 1) };
        let hi = if i == n { self.radius } else { self.edge_midpoint(i) };
        self.shell_volume(lo, hi)
    }

    /// Integral of r^{N-1} over [lo, hi].
    pub fn shell_volume(&self, lo: f64, hi: f64) -> f64 {
        let nn = self.dim as f64;
        (hi.powi(self.dim as i32) - lo.powi(self.dim as i32)) / nn
    }

    /// Half-cell volumes adjacent to node `i` for the edge on its left and
    /// right (zero when the edge does not exist).
    pub fn half_volumes(&self, i: usize) -> (f64, f64) {
        let n = self.cells();
        let left = if i == 0 {
            0.0
        } else {
            self.shell_volume(self.edge_midpoint(i - 1), self.nodes[i])
        };
        let right = if i == n {
            0.0
        } else {
            self.shell_volume(self.nodes[i], self.edge_midpoint(i))
        };
        (left, right)
    }

    /// Area factor r_{i+1/2}^{N-1} of the control surface at the midpoint of
    /// edge `i`.
    pub fn edge_area(&self, edge: usize) -> f64 {
        self.edge_midpoint(edge).powi(self.dim as i32 - 1)
    }
}

/// Uniform 2D grid with an interior mask; cell centers carry the unknowns
/// and anything outside the mask is held at the Dirichlet value 0.
#[derive(Debug, Clone)]
pub struct CartesianGrid {
    nx: usize,
    ny: usize,
    spacing: f64,
    mask: Vec<bool>,
    /// Flat index of each masked cell, and the inverse map.
    cells: Vec<usize>,
    cell_index: Vec<Option<usize>>,
}

impl CartesianGrid {
    /// Build a grid from an explicit mask. The mask must be nonempty and
    /// 4-connected.
    pub fn new(nx: usize, ny: usize, spacing: f64, mask: Vec<bool>) -> Result<Arc<Self>> {
        if nx == 0 || ny == 0 {
            return Err(Error::Config("grid extents must be positive".into()));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::Config(format!("spacing h = {spacing} must be positive")));
        }
        if mask.len() != nx * ny {
            return Err(Error::Config(format!(
                "mask length {} does not match {nx} x {ny}",
                mask.len()
            )));
        }
        let mut cells = Vec::new();
        let mut cell_index = vec![None; nx * ny];
        for (k, &m) in mask.iter().enumerate() {
            if m {
                cell_index[k] = Some(cells.len());
                cells.push(k);
            }
        }
        if cells.is_empty() {
            return Err(Error::Config("mask has no interior cells".into()));
        }
        let grid = Self { nx, ny, spacing, mask, cells, cell_index };
        if !grid.mask_connected() {
            return Err(Error::Config("interior mask is not 4-connected".into()));
        }
        Ok(Arc::new(grid))
    }

    /// Disk of radius `radius` centered at the grid center, sampled on an
    /// `n x n` grid covering [-radius, radius]^2.
    pub fn disk(radius: f64, n: usize) -> Result<Arc<Self>> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Config(format!("radius R = {radius} must be positive")));
        }
        if n < 8 {
            return Err(Error::Config(format!("grid resolution n = {n} must be >= 8")));
        }
        let h = 2.0 * radius / n as f64;
        let mut mask = vec![false; n * n];
        for j in 0..n {
            for i in 0..n {
                let (x, y) = center_of(i, j, n, n, h);
                if (x * x + y * y).sqrt() < radius {
                    mask[j * n + i] = true;
                }
            }
        }
        Self::new(n, n, h, mask)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Flat (row-major) indices of masked cells, in row-major order.
    pub fn masked_cells(&self) -> &[usize] {
        &self.cells
    }

    /// Number of masked cells.
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Compact index of a flat cell, if masked.
    pub fn compact_index(&self, flat: usize) -> Option<usize> {
        self.cell_index[flat]
    }

    /// Physical coordinates of the center of flat cell `k`, with the origin
    /// at the center of the grid.
    pub fn cell_center(&self, flat: usize) -> (f64, f64) {
        let i = flat % self.nx;
        let j = flat / self.nx;
        center_of(i, j, self.nx, self.ny, self.spacing)
    }

    /// Distance of a cell center from the grid center, floored at h/2 so
    /// singular radial data are never evaluated at 0.
    pub fn center_distance(&self, flat: usize) -> f64 {
        let (x, y) = self.cell_center(flat);
        (x * x + y * y).sqrt().max(0.5 * self.spacing)
    }

    fn mask_connected(&self) -> bool {
        let mut seen = vec![false; self.nx * self.ny];
        let mut stack = vec![self.cells[0]];
        seen[self.cells[0]] = true;
        let mut count = 0usize;
        while let Some(k) = stack.pop() {
            count += 1;
            for nb in self.neighbors(k).into_iter().flatten() {
                if self.mask[nb] && !seen[nb] {
                    seen[nb] = true;
                    stack.push(nb);
                }
            }
        }
        count == self.cells.len()
    }

    /// Flat indices of the 4 neighbors (W, E, S, N); `None` when outside the
    /// array, which counts as an unmasked ghost cell with value 0.
    pub fn neighbors(&self, flat: usize) -> [Option<usize>; 4] {
        let i = flat % self.nx;
        let j = flat / self.nx;
        [
            (i > 0).then(|| flat - 1),
            (i + 1 < self.nx).then(|| flat + 1),
            (j > 0).then(|| flat - self.nx),
            (j + 1 < self.ny).then(|| flat + self.nx),
        ]
    }
}

fn center_of(i: usize, j: usize, nx: usize, ny: usize, h: f64) -> (f64, f64) {
    (
        (i as f64 + 0.5) * h - 0.5 * nx as f64 * h,
        (j as f64 + 0.5) * h - 0.5 * ny as f64 * h,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_areas_match_known_values() {
        assert_relative_eq!(unit_sphere_area(2), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(unit_sphere_area(3), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(unit_sphere_area(4), 2.0 * PI * PI, max_relative = 1e-15);
        assert_relative_eq!(unit_sphere_area(5), 8.0 * PI * PI / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn uniform_grading_nodes() {
        let mesh = RadialMesh::build(2, 1.0, 4, 1.0).unwrap();
        assert_eq!(mesh.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn quadratic_grading_nodes() {
        let mesh = RadialMesh::build(3, 2.0, 4, 2.0).unwrap();
        assert_eq!(mesh.nodes(), &[0.0, 0.125, 0.5, 1.125, 2.0]);
    }

    #[test]
    fn sub_unit_grading_rejected() {
        assert!(matches!(
            RadialMesh::build(2, 1.0, 4, 0.5),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(RadialMesh::build(1, 1.0, 16, 1.0).is_err());
        assert!(RadialMesh::build(2, -1.0, 16, 1.0).is_err());
        assert!(RadialMesh::build(2, 1.0, 2, 1.0).is_err());
    }

    #[test]
    fn node_volumes_partition_the_ball() {
        let mesh = RadialMesh::build(3, 2.0, 16, 2.0).unwrap();
        let total: f64 = (0..mesh.node_count()).map(|i| mesh.node_volume(i)).sum();
        assert_relative_eq!(total, 8.0 / 3.0, max_relative = 1e-12);
        for i in 0..mesh.node_count() {
            let (l, r) = mesh.half_volumes(i);
            assert_relative_eq!(l + r, mesh.node_volume(i), max_relative = 1e-12);
        }
    }

    #[test]
    fn disk_mask_is_connected_and_centered() {
        let grid = CartesianGrid::disk(1.0, 32).unwrap();
        assert!(grid.cell_count() > 700); // pi/4 of 1024, roughly
        for &k in grid.masked_cells() {
            let (x, y) = grid.cell_center(k);
            assert!((x * x + y * y).sqrt() < 1.0);
        }
    }

    #[test]
    fn disconnected_mask_rejected() {
        let mut mask = vec![false; 16];
        mask[0] = true;
        mask[15] = true;
        assert!(CartesianGrid::new(4, 4, 0.1, mask).is_err());
    }
}
