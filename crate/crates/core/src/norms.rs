//! Truncation and weighted Lebesgue norms.

use crate::field::{Mesh, ScalarField};

/// Truncation T_k(s) = min(|s|, k) sign(s); clamps s to [-k, k].
pub fn truncate(s: f64, k: f64) -> f64 {
    assert!(k > 0.0, "truncation level must be positive");
    s.clamp(-k, k)
}

/// Tail G_k(s) = s - T_k(s); truncate + tail is the identity.
pub fn tail(s: f64, k: f64) -> f64 {
    s - truncate(s, k)
}

/// L^s norm of a field, s >= 1.
///
/// Radial meshes use the midpoint rule with weight r^{N-1}, which never
/// evaluates the integrand at r = 0:
/// (sigma_{N-1} sum |u_mid|^s r_mid^{N-1} dr)^{1/s}.
/// Grids use the cell sum (h^2 sum |u|^s)^{1/s} over the mask.
pub fn lp_norm(u: &ScalarField, s: f64) -> f64 {
    assert!(s >= 1.0, "Lebesgue exponent must be >= 1");
    match u.mesh() {
        Mesh::Radial(m) => {
            let v = u.values();
            let mut acc = 0.0;
            for e in 0..m.cells() {
                let mid = 0.5 * (v[e] + v[e + 1]);
                acc += mid.abs().powf(s) * m.edge_area(e) * m.spacing(e);
            }
            (m.sphere_area() * acc).powf(1.0 / s)
        }
        Mesh::Grid(g) => {
            let h2 = g.spacing() * g.spacing();
            let acc: f64 = u.values().iter().map(|v| v.abs().powf(s)).sum();
            (h2 * acc).powf(1.0 / s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Mesh;
    use crate::mesh::RadialMesh;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn truncate_and_tail_basics() {
        assert_eq!(truncate(5.0, 2.0), 2.0);
        assert_eq!(tail(5.0, 2.0), 3.0);
        assert_eq!(truncate(-5.0, 2.0), -2.0);
        assert_eq!(truncate(1.0, 2.0), 1.0);
        assert_eq!(tail(1.0, 2.0), 0.0);
    }

    #[test]
    fn unit_field_measures_the_disk() {
        let mesh = RadialMesh::build(2, 1.0, 256, 1.0).unwrap();
        let u = ScalarField::new(Mesh::Radial(mesh), vec![1.0; 257]).unwrap();
        assert_relative_eq!(lp_norm(&u, 1.0), PI, max_relative = 1e-3);
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let mesh = RadialMesh::build(3, 2.0, 16, 1.0).unwrap();
        let u = ScalarField::zeros(Mesh::Radial(mesh));
        assert_eq!(lp_norm(&u, 1.0), 0.0);
    }

    #[test]
    fn linear_field_l2_norm() {
        // u(r) = r on B_1(0) in 2D: ||u||_2 = sqrt(2 pi / 4) = sqrt(pi/2).
        let mesh = RadialMesh::build(2, 1.0, 512, 1.0).unwrap();
        let values = mesh.nodes().to_vec();
        let u = ScalarField::new(Mesh::Radial(mesh), values).unwrap();
        assert_relative_eq!(lp_norm(&u, 2.0), (PI / 2.0).sqrt(), max_relative = 1e-3);
    }

    #[test]
    fn large_exponent_approaches_sup() {
        // Smooth field with max 2 at the boundary.
        let mesh = RadialMesh::build(2, 1.0, 512, 1.0).unwrap();
        let values: Vec<f64> = mesh.nodes().iter().map(|&r| 1.0 + r * r).collect();
        let u = ScalarField::new(Mesh::Radial(mesh), values).unwrap();
        let n64 = lp_norm(&u, 64.0);
        assert!((n64 - 2.0).abs() / 2.0 < 0.05, "lp_norm(s=64) = {n64}");
    }

    proptest! {
        #[test]
        fn truncate_is_one_lipschitz_and_nondecreasing(
            a in -50.0f64..50.0, b in -50.0f64..50.0, k in 0.01f64..20.0
        ) {
            let (ta, tb) = (truncate(a, k), truncate(b, k));
            prop_assert!((ta - tb).abs() <= (a - b).abs() + 1e-15);
            if a <= b { prop_assert!(ta <= tb); }
            prop_assert!((truncate(a, k) + tail(a, k) - a).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn lp_norm_is_monotone_in_the_field(
            seed in 0u64..1000, s in 1.0f64..8.0
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mesh = RadialMesh::build(2, 1.0, 32, 1.0).unwrap();
            let small: Vec<f64> = (0..33).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let big: Vec<f64> = small.iter().map(|v| v * rng.gen_range(1.0..3.0)).collect();
            // |big| >= |small| sitewise only if scaled with matching sign; use abs fields.
            let lo = ScalarField::new(Mesh::Radial(mesh.clone()), small.iter().map(|v| v.abs()).collect()).unwrap();
            let hi = ScalarField::new(Mesh::Radial(mesh), big.iter().map(|v| v.abs()).collect()).unwrap();
            prop_assert!(lp_norm(&lo, s) <= lp_norm(&hi, s) * (1.0 + 1e-12));
        }
    }
}
