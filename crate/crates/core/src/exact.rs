//! Closed-form radial solutions for power-law data lambda |x|^{-q} on a
//! ball B_R(0), together with their calibration vector fields.
//!
//! Two regimes exist, split by the datum exponent:
//!
//! * Singular (1 < q < N): the solution blows up like r^{1-q} at the origin,
//!   decreases to 0 at the threshold radius rho = ((N-1)/lambda)^{1/(1-q)}
//!   and stays 0 on the outer plateau [rho, R]. The calibration is -x/|x|
//!   on the decreasing core and a computed radial profile on the plateau.
//! * Mild (0 < q < 1): the solution is a positive constant P on the inner
//!   plateau [0, r_lambda], r_lambda = ((N-q)/lambda)^{1/(1-q)}, and
//!   decreases to 0 on (r_lambda, R]. When r_lambda >= R the datum is too
//!   small and the solution is identically zero.
//!
//! q = 1 separates the regimes and is rejected.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::mesh::RadialMesh;

/// Which closed-form branch a solution belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactCase {
    /// 1 < q < N: unbounded at the origin, zero plateau at the boundary.
    Singular,
    /// 0 < q < 1 with r_lambda < R: bounded, constant near the origin.
    Mild,
    /// 0 < q < 1 with r_lambda >= R: the solution is identically zero.
    Trivial,
}

/// Value of the solution at a radius; the Singular case is unbounded at the
/// origin and reports that explicitly instead of overflowing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointValue {
    Finite(f64),
    UnboundedAtOrigin,
}

impl PointValue {
    /// Finite value, or +inf for the origin marker.
    pub fn to_f64(self) -> f64 {
        match self {
            PointValue::Finite(v) => v,
            PointValue::UnboundedAtOrigin => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            PointValue::Finite(v) => Some(v),
            PointValue::UnboundedAtOrigin => None,
        }
    }
}

/// Maximum residuals of the two analytic identities on a mesh: the
/// decreasing-branch balance (N-1)/r - h'(r) = lambda r^{-q} and the
/// plateau balance -div z = lambda r^{-q}.
#[derive(Debug, Clone, Copy)]
pub struct ResidualReport {
    pub core: f64,
    pub plateau: f64,
    pub core_nodes: usize,
    pub plateau_nodes: usize,
}

/// Threshold radius of the radial solution: rho_lambda for q > 1,
/// r_lambda for q < 1.
pub fn threshold_radius(dim: usize, lambda: f64, q: f64) -> Result<f64> {
    if dim < 2 {
        return Err(Error::Domain(format!("dimension N = {dim} must be >= 2")));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda = {lambda} must be positive")));
    }
    let n = dim as f64;
    // The threshold formula itself only needs q > 0, q != 1; integrability
    // of the datum (q < N) is enforced where the datum is evaluated.
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::Domain(format!("exponent q = {q} must be positive")));
    }
    if q == 1.0 {
        return Err(Error::UnsupportedExponent(
            "q = 1 separates the two closed-form regimes and admits neither".into(),
        ));
    }
    let top = if q > 1.0 { n - 1.0 } else { n - q };
    Ok((top / lambda).powf(1.0 / (1.0 - q)))
}

/// Closed-form radial solution of the equation with datum lambda |x|^{-q}.
#[derive(Debug, Clone)]
pub struct ExactRadialSolution {
    dim: usize,
    radius: f64,
    lambda: f64,
    q: f64,
    case: ExactCase,
    threshold: f64,
    plateau_value: f64,
    field_constant: f64,
    /// Radius where the decreasing branch hits zero: min(threshold, R) in
    /// the Singular case (the paper pins h(R) = 0 when rho >= R), R in the
    /// Mild case.
    pin: f64,
}

/// Build the closed-form solution for the given parameters.
pub fn build_exact(dim: usize, radius: f64, lambda: f64, q: f64) -> Result<ExactRadialSolution> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain(format!("radius R = {radius} must be positive")));
    }
    let threshold = threshold_radius(dim, lambda, q)?;
    let n = dim as f64;
    if q > 1.0 {
        let pin = threshold.min(radius);
        // The plateau calibration profile needs q < N; the solution profile
        // itself is valid for any q > 1 and the constant is only consumed
        // when a plateau exists.
        let field_constant = if q < n {
            threshold.powf(n - 1.0) * (1.0 - q) / (n - q)
        } else {
            f64::NAN
        };
        Ok(ExactRadialSolution {
            dim,
            radius,
            lambda,
            q,
            case: ExactCase::Singular,
            threshold,
            plateau_value: 0.0,
            field_constant,
            pin,
        })
    } else if threshold >= radius {
        Ok(ExactRadialSolution {
            dim,
            radius,
            lambda,
            q,
            case: ExactCase::Trivial,
            threshold,
            plateau_value: 0.0,
            field_constant: 0.0,
            pin: radius,
        })
    } else {
        // Central plateau value: the decreasing branch evaluated at r_lambda.
        let p = (n - 1.0) * (threshold / radius).ln()
            + lambda / (1.0 - q) * (radius.powf(1.0 - q) - threshold.powf(1.0 - q));
        Ok(ExactRadialSolution {
            dim,
            radius,
            lambda,
            q,
            case: ExactCase::Mild,
            threshold,
            plateau_value: p,
            field_constant: 0.0,
            pin: radius,
        })
    }
}

impl ExactRadialSolution {
    pub fn case(&self) -> ExactCase {
        self.case
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// rho_lambda (Singular) or r_lambda (Mild / Trivial).
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Constant value on the plateau: 0 in the Singular and Trivial cases.
    pub fn plateau_value(&self) -> f64 {
        self.plateau_value
    }

    /// C = rho^{N-1} (1-q)/(N-q) of the Singular plateau field.
    pub fn field_constant(&self) -> f64 {
        self.field_constant
    }

    /// Whether the solution actually has a zero plateau inside the domain
    /// (Singular case with rho < R).
    pub fn has_plateau(&self) -> bool {
        match self.case {
            ExactCase::Singular => self.threshold < self.radius,
            ExactCase::Mild => true,
            ExactCase::Trivial => true,
        }
    }

    /// Solution value at radius r in [0, R].
    pub fn u(&self, r: f64) -> Result<PointValue> {
        if !(0.0..=self.radius * (1.0 + 1e-14)).contains(&r) {
            return Err(Error::Domain(format!(
                "radius {r} outside [0, {}]",
                self.radius
            )));
        }
        let n = self.dim as f64;
        match self.case {
            ExactCase::Trivial => Ok(PointValue::Finite(0.0)),
            ExactCase::Singular => {
                if r == 0.0 {
                    return Ok(PointValue::UnboundedAtOrigin);
                }
                if r >= self.pin {
                    return Ok(PointValue::Finite(0.0));
                }
                let v = (n - 1.0) * (r / self.pin).ln()
                    + self.lambda / (1.0 - self.q)
                        * (self.pin.powf(1.0 - self.q) - r.powf(1.0 - self.q));
                Ok(PointValue::Finite(v.max(0.0)))
            }
            ExactCase::Mild => {
                if r <= self.threshold {
                    return Ok(PointValue::Finite(self.plateau_value));
                }
                let v = (n - 1.0) * (r / self.radius).ln()
                    + self.lambda / (1.0 - self.q)
                        * (self.radius.powf(1.0 - self.q) - r.powf(1.0 - self.q));
                Ok(PointValue::Finite(v.max(0.0)))
            }
        }
    }

    /// Signed radial component of the calibration field z at r in (0, R];
    /// the full field is z(x) = value * x/|x|. Magnitude never exceeds 1.
    pub fn z(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Err(Error::Domain("z has no direction at the origin".into()));
        }
        if !(r > 0.0) || r > self.radius * (1.0 + 1e-14) {
            return Err(Error::Domain(format!(
                "radius {r} outside (0, {}]",
                self.radius
            )));
        }
        let n = self.dim as f64;
        match self.case {
            ExactCase::Singular => {
                if !self.has_plateau() || r < self.threshold {
                    Ok(-1.0)
                } else {
                    if self.q >= n {
                        return Err(Error::Domain(format!(
                            "the plateau calibration needs q < N; got q = {} in dimension {}",
                            self.q, self.dim
                        )));
                    }
                    let rho = self.threshold;
                    let v = -(r / (n - self.q))
                        * ((n - 1.0) * rho.powf(self.q - 1.0) * r.powf(-self.q)
                            + (1.0 - self.q) * rho.powf(n - 1.0) * r.powf(-n));
                    Ok(v)
                }
            }
            ExactCase::Mild => {
                if r <= self.threshold {
                    Ok(-self.lambda / (n - self.q) * r.powf(1.0 - self.q))
                } else {
                    Ok(-1.0)
                }
            }
            // u = 0 everywhere; the mild inner profile still calibrates the
            // equation (-div z = f) and stays below 1 since r <= R <= r_lambda.
            ExactCase::Trivial => Ok(-self.lambda / (n - self.q) * r.powf(1.0 - self.q)),
        }
    }

    /// Derivative h'(r) of the radial profile (0 on plateaus). Finite for
    /// r > 0.
    pub fn u_prime(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || r > self.radius * (1.0 + 1e-14) {
            return Err(Error::Domain(format!("radius {r} outside (0, {}]", self.radius)));
        }
        let n = self.dim as f64;
        let dinar = (n - 1.0) / r - self.lambda * r.powf(-self.q);
        Ok(match self.case {
            ExactCase::Trivial => 0.0,
            ExactCase::Singular => {
                if r < self.pin {
                    dinar
                } else {
                    0.0
                }
            }
            ExactCase::Mild => {
                if r <= self.threshold {
                    0.0
                } else {
                    dinar
                }
            }
        })
    }

    /// Sample u at the mesh nodes; the Singular origin becomes +inf.
    pub fn sample_u(&self, mesh: &RadialMesh) -> Vec<f64> {
        mesh.nodes()
            .iter()
            .map(|&r| self.u(r).expect("node inside the domain").to_f64())
            .collect()
    }

    /// Sample the radial component of z at the mesh nodes; the origin has no
    /// direction and samples as 0 by convention of radial symmetry.
    pub fn sample_z(&self, mesh: &RadialMesh) -> Vec<f64> {
        mesh.nodes()
            .iter()
            .map(|&r| if r == 0.0 { 0.0 } else { self.z(r).expect("node inside domain") })
            .collect()
    }

    /// Residuals of the analytic identities over the mesh nodes, evaluated
    /// in double-double arithmetic so the report reflects the identities and
    /// not the f64 ulps of the singular terms. `None` for the Trivial case.
    pub fn residual(&self, mesh: &RadialMesh) -> Result<Option<ResidualReport>> {
        if mesh.dim() != self.dim {
            return Err(Error::Config(format!(
                "mesh dimension {} does not match the solution dimension {}",
                mesh.dim(),
                self.dim
            )));
        }
        if (mesh.radius() - self.radius).abs() > 1e-12 * self.radius {
            return Err(Error::Config(format!(
                "mesh radius {} does not match the solution radius {}",
                mesh.radius(),
                self.radius
            )));
        }
        if self.case == ExactCase::Trivial {
            return Ok(None);
        }
        if self.case == ExactCase::Singular && self.has_plateau() && self.q >= self.dim as f64 {
            return Err(Error::Domain(format!(
                "the plateau calibration needs q < N; got q = {} in dimension {}",
                self.q, self.dim
            )));
        }
        let n = Dd::from(self.dim as f64);
        let lam = Dd::from(self.lambda);
        let q = self.q;
        let mut report = ResidualReport { core: 0.0, plateau: 0.0, core_nodes: 0, plateau_nodes: 0 };
        for &r in &mesh.nodes()[1..] {
            let rd = Dd::from(r);
            let f = lam.mul(rd.powf(-q));
            let on_core = match self.case {
                ExactCase::Singular => r < self.pin || !self.has_plateau(),
                ExactCase::Mild => r > self.threshold,
                ExactCase::Trivial => false,
            };
            if on_core {
                // (N-1)/r - h'(r) - lambda r^{-q} with the analytic h'.
                let a = n.sub(Dd::ONE).div(rd);
                let hp = a.sub(f);
                let res = a.sub(hp).sub(f).abs().to_f64();
                report.core = report.core.max(res);
                report.core_nodes += 1;
            } else {
                // Plateau: -(N xi(r) + r xi'(r)) = lambda r^{-q} with the
                // analytic radial profile z = x xi(|x|).
                let nmq = Dd::from(self.dim as f64 - q);
                let (xi, xip) = match self.case {
                    ExactCase::Singular => {
                        let c = Dd::from(self.field_constant);
                        let xi = lam.div(nmq).mul(rd.powf(-q)).neg().sub(c.mul(rd.powf(-(self.dim as f64))));
                        let xip = lam.scale(q).div(nmq).mul(rd.powf(-q - 1.0)).add(
                            c.scale(self.dim as f64).mul(rd.powf(-(self.dim as f64) - 1.0)),
                        );
                        (xi, xip)
                    }
                    _ => {
                        let xi = lam.div(nmq).mul(rd.powf(-q)).neg();
                        let xip = lam.scale(q).div(nmq).mul(rd.powf(-q - 1.0));
                        (xi, xip)
                    }
                };
                let div_z = n.mul(xi).add(rd.mul(xip));
                let res = div_z.add(f).abs().to_f64();
                report.plateau = report.plateau.max(res);
                report.plateau_nodes += 1;
            }
        }
        Ok(Some(report))
    }
}
