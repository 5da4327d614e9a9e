//! Exact discrete counterparts of the pairing machinery: anisotropic total
//! variation, coarea slicing, the pairing of a bounded field with a
//! gradient, theta densities, Green's formula and the product rule.
//!
//! Fields live on nodes, vector fields on the edges between them. The
//! discrete gradient is the raw edge difference Du_e = u_b - u_a and every
//! operation carries positive per-edge weights (r^{N-1} at the edge midpoint
//! on a radial mesh, the face length h on a grid, or 1). With the
//! anisotropic per-edge convention, the coarea and slicing identities are
//! exact layer-cake sums and the Green identity is summation by parts, so
//! the checks here hold to machine precision rather than to a scheme order.
//!
//! The continuum pairing is only defined when one factor is bounded (or
//! through truncations); the total sums computed here exist for any finite
//! field, so the correspondence for unbounded functions is heuristic.

use crate::error::{Error, Result};
use crate::mesh::CartesianGrid;

/// Node values of a 1D field; edge differences are derived.
#[derive(Debug, Clone)]
pub struct DiscreteField1D {
    pub values: Vec<f64>,
}

impl DiscreteField1D {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Data("a 1D field needs at least two nodes".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("field contains a non-finite value".into()));
        }
        Ok(Self { values })
    }

    pub fn edge_count(&self) -> usize {
        self.values.len() - 1
    }

    /// Edge differences Du_i = u_{i+1} - u_i.
    pub fn differences(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// One value per edge plus the boundary fluxes at both ends, standing in
/// for the weak normal trace.
#[derive(Debug, Clone)]
pub struct DiscreteVectorField1D {
    pub edge_values: Vec<f64>,
    pub flux_left: f64,
    pub flux_right: f64,
}

impl DiscreteVectorField1D {
    pub fn new(edge_values: Vec<f64>, flux_left: f64, flux_right: f64) -> Result<Self> {
        if edge_values.iter().any(|v| !v.is_finite())
            || !flux_left.is_finite()
            || !flux_right.is_finite()
        {
            return Err(Error::Data("vector field contains a non-finite value".into()));
        }
        Ok(Self { edge_values, flux_left, flux_right })
    }

    /// Reported supremum of edge magnitudes.
    pub fn sup_magnitude(&self) -> f64 {
        self.edge_values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Superlevel indicator chi_{u > t}.
#[derive(Debug, Clone)]
pub struct LevelSlice {
    pub threshold: f64,
    pub indicator: Vec<f64>,
}

/// Indicator field of {u > t}.
pub fn superlevel(u: &[f64], t: f64) -> LevelSlice {
    LevelSlice {
        threshold: t,
        indicator: u.iter().map(|&v| if v > t { 1.0 } else { 0.0 }).collect(),
    }
}

/// Compensated accumulator; the slicing checks sum up to 1e8 terms and the
/// 1e-12 relative contract leaves no room for naive accumulation.
#[derive(Default, Clone, Copy)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

fn check_edge_weights(n_edges: usize, weights: &[f64]) -> Result<()> {
    if weights.len() != n_edges {
        return Err(Error::Data(format!(
            "{} weights for {} edges",
            weights.len(),
            n_edges
        )));
    }
    if weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::Data("edge weights must be positive".into()));
    }
    Ok(())
}

// Shared edge-list kernels; the 1D mesh and the masked grid differ only in
// which node pairs form an edge.

fn tv_over_edges<'a>(
    edges: impl Iterator<Item = (usize, usize, f64)>,
    u: &[f64],
) -> f64 {
    let mut acc = KahanSum::default();
    for (a, b, w) in edges {
        acc.add(w * (u[b] - u[a]).abs());
    }
    acc.value()
}

fn pairing_over_edges(
    edges: impl Iterator<Item = (usize, usize, f64)>,
    z: &[f64],
    u: &[f64],
) -> f64 {
    let mut acc = KahanSum::default();
    for (e, (a, b, w)) in edges.enumerate() {
        acc.add(w * z[e] * (u[b] - u[a]));
    }
    acc.value()
}

/// Midpoints between consecutive distinct values of u; the level set is
/// constant between consecutive values, so these thresholds enumerate every
/// distinct superlevel set.
fn level_midpoints(u: &[f64]) -> Vec<(f64, f64)> {
    let mut vals: Vec<f64> = u.to_vec();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals.dedup();
    vals.windows(2)
        .map(|w| (0.5 * (w[0] + w[1]), w[1] - w[0]))
        .collect()
}

/// Anisotropic total variation sum_e w_e |Du_e|.
pub fn discrete_tv(u: &DiscreteField1D, weights: &[f64]) -> Result<f64> {
    check_edge_weights(u.edge_count(), weights)?;
    let n = u.edge_count();
    Ok(tv_over_edges(
        (0..n).map(|i| (i, i + 1, weights[i])),
        &u.values,
    ))
}

/// Both sides of the coarea identity: the total variation and its layer-cake
/// sum over superlevel-set perimeters. Exact for the anisotropic TV.
pub fn coarea_check(u: &DiscreteField1D, weights: &[f64]) -> Result<(f64, f64)> {
    check_edge_weights(u.edge_count(), weights)?;
    let lhs = discrete_tv(u, weights)?;
    let mut rhs = KahanSum::default();
    for (t, dt) in level_midpoints(&u.values) {
        let slice = superlevel(&u.values, t);
        let per = tv_over_edges(
            (0..u.edge_count()).map(|i| (i, i + 1, weights[i])),
            &slice.indicator,
        );
        rhs.add(dt * per);
    }
    Ok((lhs, rhs.value()))
}

/// Discrete pairing sum_e w_e z_e Du_e. Bounded by sup|z| * discrete_tv.
pub fn pairing_sum(z: &DiscreteVectorField1D, u: &DiscreteField1D, weights: &[f64]) -> Result<f64> {
    if z.edge_values.len() != u.edge_count() {
        return Err(Error::Data(format!(
            "{} edge values for {} edges",
            z.edge_values.len(),
            u.edge_count()
        )));
    }
    check_edge_weights(u.edge_count(), weights)?;
    let n = u.edge_count();
    Ok(pairing_over_edges(
        (0..n).map(|i| (i, i + 1, weights[i])),
        &z.edge_values,
        &u.values,
    ))
}

/// Both sides of the pairing slicing identity: the pairing against u and
/// the layer-cake sum of pairings against superlevel indicators.
pub fn slicing_check(
    z: &DiscreteVectorField1D,
    u: &DiscreteField1D,
    weights: &[f64],
) -> Result<(f64, f64)> {
    let lhs = pairing_sum(z, u, weights)?;
    let n = u.edge_count();
    let mut rhs = KahanSum::default();
    for (t, dt) in level_midpoints(&u.values) {
        let slice = superlevel(&u.values, t);
        let p = pairing_over_edges(
            (0..n).map(|i| (i, i + 1, weights[i])),
            &z.edge_values,
            &slice.indicator,
        );
        rhs.add(dt * p);
    }
    Ok((lhs, rhs.value()))
}

/// Radon-Nikodym density of the pairing with respect to |Du|: on edges with
/// Du_e != 0 it is z_e sign(Du_e); inactive edges carry `None`.
pub fn theta_density(z: &DiscreteVectorField1D, u: &DiscreteField1D) -> Result<Vec<Option<f64>>> {
    if z.edge_values.len() != u.edge_count() {
        return Err(Error::Data("vector field does not match the edge count".into()));
    }
    Ok(u.differences()
        .iter()
        .zip(&z.edge_values)
        .map(|(&d, &z)| if d != 0.0 { Some(z * d.signum()) } else { None })
        .collect())
}

/// Invariance of theta under a nondecreasing reparametrization phi of u:
/// the densities agree exactly on edges active for both u and phi(u).
/// Returns the maximum deviation over those edges (exactly 0).
pub fn theta_invariance_check(
    z: &DiscreteVectorField1D,
    u: &DiscreteField1D,
    phi: impl Fn(f64) -> f64,
) -> Result<f64> {
    let composed: Vec<f64> = u.values.iter().map(|&v| phi(v)).collect();
    // phi must be nondecreasing on the sampled range of u.
    let mut order: Vec<usize> = (0..u.values.len()).collect();
    order.sort_by(|&a, &b| u.values[a].partial_cmp(&u.values[b]).unwrap());
    for w in order.windows(2) {
        let (a, b) = (w[0], w[1]);
        if composed[b] < composed[a] && u.values[b] > u.values[a] {
            return Err(Error::Precondition(format!(
                "phi is decreasing between sampled values {} and {}",
                u.values[a], u.values[b]
            )));
        }
    }
    let v = DiscreteField1D::new(composed)?;
    let theta_u = theta_density(z, u)?;
    let theta_v = theta_density(z, &v)?;
    let mut worst = 0.0f64;
    for (a, b) in theta_u.iter().zip(&theta_v) {
        if let (Some(a), Some(b)) = (a, b) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// Green's identity by summation by parts. Returns (interior, pairing,
/// boundary) with interior + pairing = boundary, where interior is
/// sum_j w_j (div z)_j for the divergence defined as the negative adjoint of
/// the edge difference under these weights, and boundary uses the end fluxes
/// against the end node values.
pub fn green_check(
    z: &DiscreteVectorField1D,
    w: &DiscreteField1D,
    weights: &[f64],
) -> Result<(f64, f64, f64)> {
    if z.edge_values.len() != w.edge_count() {
        return Err(Error::Data("vector field does not match the edge count".into()));
    }
    check_edge_weights(w.edge_count(), weights)?;
    let n = w.edge_count();
    let wz = |e: usize| weights[e] * z.edge_values[e];
    let mut interior = KahanSum::default();
    for j in 0..=n {
        let outgoing = if j == n { z.flux_right } else { wz(j) };
        let incoming = if j == 0 { z.flux_left } else { wz(j - 1) };
        interior.add(w.values[j] * (outgoing - incoming));
    }
    let pairing = pairing_sum(z, w, weights)?;
    let boundary = w.values[n] * z.flux_right - w.values[0] * z.flux_left;
    Ok((interior.value(), pairing, boundary))
}

/// Product-rule convention check: pairing u against w z versus weighting the
/// pairing by the two-node mean w*. Under the mean convention the two
/// expressions are the same product rearranged, so the reported deviation is
/// exactly zero; the check exercises the w* plumbing.
pub fn product_rule_check(
    z: &DiscreteVectorField1D,
    u: &DiscreteField1D,
    w: &DiscreteField1D,
) -> Result<f64> {
    if u.values.len() != w.values.len() || z.edge_values.len() != u.edge_count() {
        return Err(Error::Data("field sizes do not match".into()));
    }
    let du = u.differences();
    let mut worst = 0.0f64;
    for e in 0..u.edge_count() {
        let wstar = 0.5 * (w.values[e] + w.values[e + 1]);
        let lhs = (wstar * z.edge_values[e]) * du[e];
        let rhs = wstar * (z.edge_values[e] * du[e]);
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

// Grid counterparts: the same per-edge contracts over the anisotropic edge
// set of a masked grid. Values index the masked cells in row-major order.

/// Interior edges (a, b, weight) between adjacent masked cells of a grid;
/// weight is the face length h. Boundary faces (cell, signed weight) connect
/// masked cells to the Dirichlet exterior; the sign is the outward
/// orientation along the +x/+y convention.
#[derive(Debug, Clone)]
pub struct GridEdges {
    pub edges: Vec<(usize, usize, f64)>,
    pub boundary: Vec<(usize, f64)>,
}

impl GridEdges {
    pub fn from_grid(grid: &CartesianGrid) -> Self {
        let h = grid.spacing();
        let mut edges = Vec::new();
        let mut boundary = Vec::new();
        for &flat in grid.masked_cells() {
            let a = grid.compact_index(flat).unwrap();
            let nb = grid.neighbors(flat);
            // +x and +y neighbors define each interior edge once.
            for dir in [1usize, 3] {
                match nb[dir].and_then(|f| grid.compact_index(f)) {
                    Some(b) => edges.push((a, b, h)),
                    None => boundary.push((a, h)),
                }
            }
            // -x and -y faces are boundary faces when the neighbor is not
            // masked (otherwise the neighbor already owns that edge).
            for dir in [0usize, 2] {
                if nb[dir].and_then(|f| grid.compact_index(f)).is_none() {
                    boundary.push((a, -h));
                }
            }
        }
        Self { edges, boundary }
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// Anisotropic grid total variation over interior edges.
pub fn discrete_tv_grid(edges: &GridEdges, u: &[f64]) -> f64 {
    tv_over_edges(edges.edges.iter().copied(), u)
}

/// Grid pairing sum over interior edges.
pub fn pairing_sum_grid(edges: &GridEdges, z: &[f64], u: &[f64]) -> f64 {
    pairing_over_edges(edges.edges.iter().copied(), z, u)
}

/// Grid coarea identity (lhs, rhs).
pub fn coarea_check_grid(edges: &GridEdges, u: &[f64]) -> (f64, f64) {
    let lhs = discrete_tv_grid(edges, u);
    let mut rhs = KahanSum::default();
    for (t, dt) in level_midpoints(u) {
        let slice = superlevel(u, t);
        rhs.add(dt * discrete_tv_grid(edges, &slice.indicator));
    }
    (lhs, rhs.value())
}

/// Grid slicing identity (lhs, rhs).
pub fn slicing_check_grid(edges: &GridEdges, z: &[f64], u: &[f64]) -> (f64, f64) {
    let lhs = pairing_sum_grid(edges, z, u);
    let mut rhs = KahanSum::default();
    for (t, dt) in level_midpoints(u) {
        let slice = superlevel(u, t);
        rhs.add(dt * pairing_sum_grid(edges, z, &slice.indicator));
    }
    (lhs, rhs.value())
}

/// Grid Green identity (interior, pairing, boundary): boundary fluxes are
/// given per boundary face, paired against the inner cell value.
pub fn green_check_grid(
    edges: &GridEdges,
    z: &[f64],
    bflux: &[f64],
    w: &[f64],
) -> Result<(f64, f64, f64)> {
    if z.len() != edges.edges.len() || bflux.len() != edges.boundary.len() {
        return Err(Error::Data("flux sizes do not match the edge set".into()));
    }
    let mut interior = KahanSum::default();
    for (e, &(a, b, wt)) in edges.edges.iter().enumerate() {
        // Edge oriented a -> b: outgoing at a, incoming at b.
        interior.add(-w[a] * wt * z[e]);
        interior.add(w[b] * wt * z[e]);
    }
    let mut boundary = KahanSum::default();
    for (f, &(c, signed_wt)) in edges.boundary.iter().enumerate() {
        // Outward flux through a boundary face contributes to div at the cell
        // and pairs against the cell value in the boundary term.
        interior.add(w[c] * signed_wt.abs() * bflux[f] * signed_wt.signum());
        boundary.add(w[c] * signed_wt.abs() * bflux[f] * signed_wt.signum());
    }
    // interior as computed is sum_c w_c (div z)_c with div the signed flux
    // balance; the identity interior + pairing = boundary follows by
    // rearrangement, computed here independently on both sides.
    let pairing = pairing_sum_grid(edges, z, w);
    Ok((interior.value(), pairing, boundary.value()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::truncate;

    fn unit_weights(n: usize) -> Vec<f64> {
        vec![1.0; n]
    }

    #[test]
    fn tv_hand_values() {
        let u = DiscreteField1D::new(vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(discrete_tv(&u, &unit_weights(2)).unwrap(), 2.0);
        let c = DiscreteField1D::new(vec![3.0; 5]).unwrap();
        assert_eq!(discrete_tv(&c, &unit_weights(4)).unwrap(), 0.0);
        let u = DiscreteField1D::new(vec![0.0, 2.0, 5.0]).unwrap();
        assert_eq!(discrete_tv(&u, &[1.0, 3.0]).unwrap(), 11.0);
    }

    #[test]
    fn coarea_hand_values() {
        let u = DiscreteField1D::new(vec![0.0, 1.0, 0.0]).unwrap();
        let (l, r) = coarea_check(&u, &unit_weights(2)).unwrap();
        assert_eq!((l, r), (2.0, 2.0));
        // Enumerating levels for {0,2,5}: t in (0,2) has perimeter 1 (one
        // active edge), t in (2,5) has perimeter 1; rhs = 2*1 + 3*1 = 5 = tv.
        let u = DiscreteField1D::new(vec![0.0, 2.0, 5.0]).unwrap();
        let (l, r) = coarea_check(&u, &unit_weights(2)).unwrap();
        assert_eq!((l, r), (5.0, 5.0));
        let c = DiscreteField1D::new(vec![4.0; 4]).unwrap();
        let (l, r) = coarea_check(&c, &unit_weights(3)).unwrap();
        assert_eq!((l, r), (0.0, 0.0));
    }

    #[test]
    fn pairing_hand_values() {
        let u = DiscreteField1D::new(vec![0.0, 1.0, 0.0]).unwrap();
        let z = DiscreteVectorField1D::new(vec![1.0, 1.0], 1.0, 1.0).unwrap();
        assert_eq!(pairing_sum(&z, &u, &unit_weights(2)).unwrap(), 0.0);
        // z = sign(Du) saturates the pairing at the total variation.
        let u = DiscreteField1D::new(vec![0.0, 2.0, 1.0, 4.0]).unwrap();
        let signs: Vec<f64> = u.differences().iter().map(|d| d.signum()).collect();
        let z = DiscreteVectorField1D::new(signs, 0.0, 0.0).unwrap();
        let w = unit_weights(3);
        assert_eq!(
            pairing_sum(&z, &u, &w).unwrap(),
            discrete_tv(&u, &w).unwrap()
        );
        let u = DiscreteField1D::new(vec![0.0, 2.0, 5.0]).unwrap();
        let z = DiscreteVectorField1D::new(vec![0.5, 0.5], 0.0, 0.0).unwrap();
        assert_eq!(pairing_sum(&z, &u, &unit_weights(2)).unwrap(), 2.5);
    }

    #[test]
    fn slicing_hand_values() {
        let c = DiscreteField1D::new(vec![2.0; 4]).unwrap();
        let z = DiscreteVectorField1D::new(vec![0.3, -0.2, 0.9], 0.0, 0.0).unwrap();
        let (l, r) = slicing_check(&z, &c, &unit_weights(3)).unwrap();
        assert_eq!((l, r), (0.0, 0.0));

        let u = DiscreteField1D::new(vec![0.0, 2.0, 5.0]).unwrap();
        let ones = DiscreteVectorField1D::new(vec![1.0, 1.0], 1.0, 1.0).unwrap();
        let (l, r) = slicing_check(&ones, &u, &unit_weights(2)).unwrap();
        assert_eq!((l, r), (5.0, 5.0)); // telescoping: u_n - u_0

        let z = DiscreteVectorField1D::new(vec![1.0, -1.0], 0.0, 0.0).unwrap();
        let (l, r) = slicing_check(&z, &u, &unit_weights(2)).unwrap();
        assert_eq!((l, r), (-1.0, -1.0)); // 2 - 3
    }

    #[test]
    fn theta_hand_values() {
        let inc = DiscreteField1D::new(vec![0.0, 1.0, 3.0]).unwrap();
        let ones = DiscreteVectorField1D::new(vec![1.0, 1.0], 0.0, 0.0).unwrap();
        assert_eq!(
            theta_density(&ones, &inc).unwrap(),
            vec![Some(1.0), Some(1.0)]
        );
        let dec = DiscreteField1D::new(vec![3.0, 1.0, 0.0]).unwrap();
        assert_eq!(
            theta_density(&ones, &dec).unwrap(),
            vec![Some(-1.0), Some(-1.0)]
        );
        let u = DiscreteField1D::new(vec![0.0, 1.0, 0.0]).unwrap();
        let z = DiscreteVectorField1D::new(vec![0.3, -0.7], 0.0, 0.0).unwrap();
        assert_eq!(
            theta_density(&z, &u).unwrap(),
            vec![Some(0.3), Some(0.7)]
        );
    }

    #[test]
    fn theta_invariance_for_reparametrizations() {
        let u = DiscreteField1D::new(vec![0.0, 2.5, 1.0, 4.0, 4.0, 0.5]).unwrap();
        let z = DiscreteVectorField1D::new(vec![0.4, -0.9, 0.1, 0.8, -0.3], 0.0, 0.0).unwrap();
        assert_eq!(theta_invariance_check(&z, &u, |s| s).unwrap(), 0.0);
        assert_eq!(
            theta_invariance_check(&z, &u, |s| truncate(s, 2.0)).unwrap(),
            0.0
        );
        assert_eq!(
            theta_invariance_check(&z, &u, |s| 1.0 - (-s).exp()).unwrap(),
            0.0
        );
        assert!(matches!(
            theta_invariance_check(&z, &u, |s| -s),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn green_hand_values() {
        let w = DiscreteField1D::new(vec![0.0; 4]).unwrap();
        let z = DiscreteVectorField1D::new(vec![0.5, -0.25, 1.0], 2.0, -1.0).unwrap();
        let (i, p, b) = green_check(&z, &w, &unit_weights(3)).unwrap();
        assert_eq!((i, p, b), (0.0, 0.0, 0.0));

        // z = 1 with unit weights and matching end fluxes has zero discrete
        // divergence; the pairing telescopes to w_n - w_0 = 0.
        let w = DiscreteField1D::new(vec![0.0, 0.7, -0.3, 0.0]).unwrap();
        let z = DiscreteVectorField1D::new(vec![1.0; 3], 1.0, 1.0).unwrap();
        let (i, p, b) = green_check(&z, &w, &unit_weights(3)).unwrap();
        assert_eq!(i, 0.0);
        assert!(p.abs() < 1e-15 && b.abs() < 1e-15);
    }

    #[test]
    fn product_rule_zero_by_convention() {
        let u = DiscreteField1D::new(vec![0.0, 2.0, 1.0]).unwrap();
        let z = DiscreteVectorField1D::new(vec![0.4, -0.4], 0.0, 0.0).unwrap();
        for w in [vec![1.0; 3], vec![2.5; 3], vec![0.3, -1.7, 0.9]] {
            let w = DiscreteField1D::new(w).unwrap();
            assert_eq!(product_rule_check(&z, &u, &w).unwrap(), 0.0);
        }
    }

    #[test]
    fn grid_edges_of_a_plus_shape() {
        let mask = vec![
            false, true, false, //
            true, true, true, //
            false, true, false,
        ];
        let grid = CartesianGrid::new(3, 3, 1.0, mask).unwrap();
        let edges = GridEdges::from_grid(&grid);
        assert_eq!(edges.edge_count(), 4);
        assert_eq!(edges.boundary.len(), 5 * 4 - 2 * 4);
        // Constant field: zero TV; checkerboard-ish field: hand TV.
        let u0 = vec![2.0; 5];
        assert_eq!(discrete_tv_grid(&edges, &u0), 0.0);
    }
}
