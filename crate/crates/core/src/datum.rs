//! Symbolic source descriptions and their evaluation on meshes.

use crate::error::{Error, Result};
use crate::field::{Mesh, ScalarField};

/// Nonnegative source term f of the equation.
#[derive(Debug, Clone)]
pub enum DatumSpec {
    /// f(x) = lambda |x|^{-q}. Requires lambda > 0 and 0 < q < N so the
    /// datum is integrable; q is checked against N at evaluation time.
    PowerLaw { lambda: f64, q: f64 },
    /// f = c >= 0.
    Constant { c: f64 },
    /// Explicit nonnegative node/cell values on the target mesh.
    Tabulated { values: Vec<f64> },
}

impl DatumSpec {
    pub fn power_law(lambda: f64, q: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Config(format!("lambda = {lambda} must be positive")));
        }
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::Config(format!("exponent q = {q} must be positive")));
        }
        Ok(Self::PowerLaw { lambda, q })
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::Config(format!("constant c = {c} must be nonnegative")));
        }
        Ok(Self::Constant { c })
    }

    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Data(format!("tabulated datum entry {v} is not a nonnegative number")));
        }
        Ok(Self::Tabulated { values })
    }
}

/// Evaluate a datum at the mesh sites.
///
/// Power-law data are clamped at the origin: on a radial mesh the value at
/// r_0 = 0 is lambda r_1^{-q} (the value at the first positive node), and on
/// a grid the center distance is floored at h/2. The clamped value carries a
/// quadrature weight no larger than its own cell, so the L^1 content of the
/// datum is preserved under refinement.
pub fn evaluate_datum(spec: &DatumSpec, mesh: &Mesh) -> Result<ScalarField> {
    match spec {
        DatumSpec::PowerLaw { lambda, q } => {
            let (lambda, q) = (*lambda, *q);
            match mesh {
                Mesh::Radial(m) => {
                    if q >= m.dim() as f64 {
                        return Err(Error::Config(format!(
                            "power-law exponent q = {q} must be < N = {} for an integrable datum",
                            m.dim()
                        )));
                    }
                    let r1 = m.nodes()[1];
                    let values = m
                        .nodes()
                        .iter()
                        .map(|&r| lambda * if r > 0.0 { r } else { r1 }.powf(-q))
                        .collect();
                    ScalarField::new(mesh.clone(), values)
                }
                Mesh::Grid(g) => {
                    if q >= 2.0 {
                        return Err(Error::Config(format!(
                            "power-law exponent q = {q} must be < 2 on a 2D grid"
                        )));
                    }
                    let values = g
                        .masked_cells()
                        .iter()
                        .map(|&k| lambda * g.center_distance(k).powf(-q))
                        .collect();
                    ScalarField::new(mesh.clone(), values)
                }
            }
        }
        DatumSpec::Constant { c } => {
            ScalarField::new(mesh.clone(), vec![*c; mesh.value_count()])
        }
        DatumSpec::Tabulated { values } => {
            if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
                return Err(Error::Data(format!("tabulated datum entry {v} is negative")));
            }
            ScalarField::new(mesh.clone(), values.clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::RadialMesh;
    use approx::assert_relative_eq;

    #[test]
    fn power_law_values_and_origin_clamp() {
        let mesh = RadialMesh::build(3, 1.0, 4, 1.0).unwrap(); // nodes 0, .25, .5, .75, 1
        let f = evaluate_datum(&DatumSpec::power_law(1.0, 2.0).unwrap(), &Mesh::Radial(mesh)).unwrap();
        assert_relative_eq!(f.values()[2], 4.0, max_relative = 1e-15); // 1 / 0.5^2
        assert_relative_eq!(f.values()[0], f.values()[1], max_relative = 1e-15); // clamp
    }

    #[test]
    fn constant_datum() {
        let mesh = RadialMesh::build(2, 1.0, 8, 1.0).unwrap();
        let f = evaluate_datum(&DatumSpec::constant(3.0).unwrap(), &Mesh::Radial(mesh)).unwrap();
        assert!(f.values().iter().all(|&v| v == 3.0));
    }

    #[test]
    fn power_law_at_specific_radius() {
        let mesh = RadialMesh::build(2, 8.0, 4, 1.0).unwrap(); // nodes 0, 2, 4, 6, 8
        let f = evaluate_datum(&DatumSpec::power_law(2.0, 0.5).unwrap(), &Mesh::Radial(mesh)).unwrap();
        assert_relative_eq!(f.values()[2], 1.0, max_relative = 1e-15); // 2 / 4^0.5
    }

    #[test]
    fn negative_tabulated_rejected() {
        assert!(DatumSpec::tabulated(vec![1.0, -0.5]).is_err());
    }

    #[test]
    fn integrability_constraint_enforced() {
        let mesh = RadialMesh::build(2, 1.0, 8, 1.0).unwrap();
        let spec = DatumSpec::power_law(1.0, 2.5).unwrap();
        assert!(evaluate_datum(&spec, &Mesh::Radial(mesh)).is_err());
    }

    #[test]
    fn power_law_nonincreasing_in_radius() {
        let mesh = RadialMesh::build(3, 2.0, 64, 2.0).unwrap();
        let f = evaluate_datum(&DatumSpec::power_law(1.7, 1.3).unwrap(), &Mesh::Radial(mesh)).unwrap();
        for w in f.values()[1..].windows(2) {
            assert!(w[1] <= w[0]);
        }
    }
}
