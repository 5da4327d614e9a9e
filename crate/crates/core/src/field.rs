//! Scalar and vector fields attached to a mesh.
//!
//! Fields are immutable after construction; every operation that changes
//! values builds a new field, so fields can be shared freely across threads.

use crate::error::{Error, Result};
use crate::mesh::{CartesianGrid, RadialMesh};
use std::sync::Arc;

/// Reference to the mesh a field lives on.
#[derive(Debug, Clone)]
pub enum Mesh {
    Radial(Arc<RadialMesh>),
    Grid(Arc<CartesianGrid>),
}

impl Mesh {
    /// Number of scalar degrees of freedom (nodes or masked cells).
    pub fn value_count(&self) -> usize {
        match self {
            Mesh::Radial(m) => m.node_count(),
            Mesh::Grid(g) => g.cell_count(),
        }
    }

    /// Whether two fields can be combined: same underlying mesh object or a
    /// structurally identical one.
    pub fn compatible(&self, other: &Mesh) -> bool {
        match (self, other) {
            (Mesh::Radial(a), Mesh::Radial(b)) => {
                Arc::ptr_eq(a, b) || (a.dim() == b.dim() && a.nodes() == b.nodes())
            }
            (Mesh::Grid(a), Mesh::Grid(b)) => {
                Arc::ptr_eq(a, b)
                    || (a.nx() == b.nx()
                        && a.ny() == b.ny()
                        && a.spacing() == b.spacing()
                        && a.mask() == b.mask())
            }
            _ => false,
        }
    }

    pub fn as_radial(&self) -> Option<&Arc<RadialMesh>> {
        match self {
            Mesh::Radial(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_grid(&self) -> Option<&Arc<CartesianGrid>> {
        match self {
            Mesh::Grid(g) => Some(g),
            _ => None,
        }
    }
}

/// One value per node (radial mesh) or per masked cell (grid).
#[derive(Debug, Clone)]
pub struct ScalarField {
    mesh: Mesh,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(mesh: Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.value_count() {
            return Err(Error::Data(format!(
                "field has {} values but the mesh has {} sites",
                values.len(),
                mesh.value_count()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Data(format!("field contains a non-finite value {v}")));
        }
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: Mesh) -> Self {
        let n = mesh.value_count();
        Self { mesh, values: vec![0.0; n] }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// New field with the same mesh and mapped values.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.mesh.clone(), self.values.iter().map(|&v| f(v)).collect())
    }
}

/// Direction-resolved data of a vector field.
#[derive(Debug, Clone)]
pub enum VectorData {
    /// Signed radial component at each node of a radial mesh; the field is
    /// value * x/|x|.
    RadialNodes(Vec<f64>),
    /// Per-face components on a grid: `x` holds faces between (i-1,j) and
    /// (i,j) for i in 0..=nx, `y` likewise in the other direction. Faces not
    /// touching a masked cell are zero.
    GridFaces { x: Vec<f64>, y: Vec<f64> },
}

/// Discrete stand-in for the calibration field z.
#[derive(Debug, Clone)]
pub struct VectorField {
    mesh: Mesh,
    data: VectorData,
}

impl VectorField {
    pub fn new(mesh: Mesh, data: VectorData) -> Result<Self> {
        let ok = match (&mesh, &data) {
            (Mesh::Radial(m), VectorData::RadialNodes(v)) => v.len() == m.node_count(),
            (Mesh::Grid(g), VectorData::GridFaces { x, y }) => {
                x.len() == (g.nx() + 1) * g.ny() && y.len() == g.nx() * (g.ny() + 1)
            }
            _ => false,
        };
        if !ok {
            return Err(Error::Data("vector data does not match the mesh".into()));
        }
        let field = Self { mesh, data };
        if !field.sup_magnitude().is_finite() {
            return Err(Error::Data("vector field has non-finite magnitude".into()));
        }
        Ok(field)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn data(&self) -> &VectorData {
        &self.data
    }

    /// Supremum of componentwise magnitudes (the reported sup |z|).
    pub fn sup_magnitude(&self) -> f64 {
        match &self.data {
            VectorData::RadialNodes(v) => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            VectorData::GridFaces { x, y } => x
                .iter()
                .chain(y.iter())
                .fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// Radial components, if this is a radial-mesh field.
    pub fn radial_components(&self) -> Option<&[f64]> {
        match &self.data {
            VectorData::RadialNodes(v) => Some(v),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::RadialMesh;

    #[test]
    fn field_length_is_checked() {
        let mesh = RadialMesh::build(2, 1.0, 8, 1.0).unwrap();
        assert!(ScalarField::new(Mesh::Radial(mesh.clone()), vec![0.0; 3]).is_err());
        assert!(ScalarField::new(Mesh::Radial(mesh.clone()), vec![0.0; 9]).is_ok());
        assert!(ScalarField::new(Mesh::Radial(mesh), vec![f64::NAN; 9]).is_err());
    }

    #[test]
    fn sup_magnitude_reported() {
        let mesh = RadialMesh::build(2, 1.0, 8, 1.0).unwrap();
        let z = VectorField::new(
            Mesh::Radial(mesh),
            VectorData::RadialNodes(vec![-0.5; 9]),
        )
        .unwrap();
        assert_eq!(z.sup_magnitude(), 0.5);
    }
}
