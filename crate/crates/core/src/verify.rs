//! Experiment procedures confronting the solver and the exact oracle with
//! the quantitative claims: the comparison principle, the summability
//! ladder, the power identity, the gradient-power bound, plateau structure
//! and origin regularity.
//!
//! Suites fan out independent solves over a worker pool (size controlled by
//! the TVLAP_WORKERS environment variable, default the available
//! parallelism) and reduce results in input order, so reports are
//! reproducible given a seed.

use crate::datum::DatumSpec;
use crate::error::{Error, Result};
use crate::exact::{build_exact, ExactCase, ExactRadialSolution};
use crate::field::{Mesh, ScalarField};
use crate::mesh::RadialMesh;
use crate::norms::lp_norm;
use crate::solver::{solve, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Environment variable naming the worker-pool size for the suites.
pub const WORKERS_ENV: &str = "TVLAP_WORKERS";

fn pool() -> rayon::ThreadPool {
    let threads = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0); // 0 = available parallelism
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("worker pool")
}

// ---------------------------------------------------------------------------
// Exponent ladder

/// The iterated-test-function exponent ladder s_j and its limit Np/(N-p).
#[derive(Debug, Clone)]
pub struct ExponentLadder {
    pub dim: usize,
    pub p: f64,
    pub n_prime: f64,
    pub p_prime: f64,
    /// s_0 .. s_j, strictly increasing below the limit.
    pub terms: Vec<f64>,
    pub limit: f64,
}

/// s_j = N' sum_{k=0..j} (N'/p')^k, limit Np/(N-p) = N'/(1 - N'/p').
pub fn exponent_ladder(dim: usize, p: f64, j: usize) -> Result<ExponentLadder> {
    let n = dim as f64;
    if dim < 2 {
        return Err(Error::Domain(format!("dimension N = {dim} must be >= 2")));
    }
    if !(p > 1.0 && p < n) {
        return Err(Error::Domain(format!("p = {p} must lie in (1, N) = (1, {n})")));
    }
    let n_prime = n / (n - 1.0);
    let p_prime = p / (p - 1.0);
    let ratio = n_prime / p_prime;
    let mut terms = Vec::with_capacity(j + 1);
    let mut power = 1.0;
    let mut partial = 0.0;
    for _ in 0..=j {
        partial += power;
        terms.push(n_prime * partial);
        power *= ratio;
    }
    Ok(ExponentLadder {
        dim,
        p,
        n_prime,
        p_prime,
        terms,
        limit: n * p / (n - p),
    })
}

// ---------------------------------------------------------------------------
// Comparison suite

/// Generator of ordered datum pairs f1 <= f2.
#[derive(Debug, Clone)]
pub enum PairFamily {
    /// Same exponent q, lambda_2 = lambda_1 * gap with gap >= min_gap > 1.
    PowerLawLambda {
        q_range: (f64, f64),
        lambda_range: (f64, f64),
        min_gap: f64,
    },
    /// Constant data c_1 <= c_2.
    ConstantPair { c_range: (f64, f64) },
}

impl PairFamily {
    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<(DatumSpec, DatumSpec)> {
        match self {
            PairFamily::PowerLawLambda { q_range, lambda_range, min_gap } => {
                let q = rng.gen_range(q_range.0..q_range.1);
                let l1 = rng.gen_range(lambda_range.0..lambda_range.1);
                let gap = rng.gen_range(*min_gap..(2.0 * min_gap));
                Ok((DatumSpec::power_law(l1, q)?, DatumSpec::power_law(l1 * gap, q)?))
            }
            PairFamily::ConstantPair { c_range } => {
                let c1 = rng.gen_range(c_range.0..c_range.1);
                let c2 = rng.gen_range(c1..(c_range.1 * 1.5));
                Ok((DatumSpec::constant(c1)?, DatumSpec::constant(c2)?))
            }
        }
    }
}

/// One solved pair of the comparison suite.
#[derive(Debug, Clone)]
pub struct ComparisonPair {
    pub violation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub f2_l1_norm: f64,
}

/// Outcome of the randomized comparison suite.
#[derive(Debug, Clone)]
pub struct ComparisonOutcome {
    pub worst_violation: f64,
    pub pass: bool,
    pub pairs: Vec<ComparisonPair>,
}

fn mesh_resolution(mesh: &Mesh) -> f64 {
    match mesh {
        Mesh::Radial(m) => m.max_spacing(),
        Mesh::Grid(g) => g.spacing(),
    }
}

/// Solve `count` randomized nested-data pairs and report the worst violation
/// of u1 <= u2. Each pair passes when
/// max(u1 - u2) <= (h + eps) * 10 * max(1, ||f2||_L1).
pub fn comparison_suite(
    seed: u64,
    count: usize,
    family: &PairFamily,
    mesh: &Mesh,
    config: &SolverConfig,
) -> Result<ComparisonOutcome> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut specs = Vec::with_capacity(count);
    for _ in 0..count {
        specs.push(family.draw(&mut rng)?);
    }
    let h = mesh_resolution(mesh);
    let results: Vec<Result<ComparisonPair>> = pool().install(|| {
        specs
            .par_iter()
            .map(|(f1, f2)| {
                let r1 = solve(mesh, f1, config)?;
                let r2 = solve(mesh, f2, config)?;
                let violation = r1
                    .u
                    .values()
                    .iter()
                    .zip(r2.u.values())
                    .fold(f64::NEG_INFINITY, |m, (a, b)| m.max(a - b));
                let f2_field = crate::datum::evaluate_datum(f2, mesh)?;
                let f2_l1_norm = lp_norm(&f2_field, 1.0);
                let tolerance = (h + config.eps_min) * 10.0 * f2_l1_norm.max(1.0);
                Ok(ComparisonPair {
                    violation,
                    tolerance,
                    pass: violation <= tolerance,
                    f2_l1_norm,
                })
            })
            .collect()
    });
    let mut pairs = Vec::with_capacity(count);
    for r in results {
        pairs.push(r?);
    }
    let worst_violation = pairs.iter().fold(f64::NEG_INFINITY, |m, p| m.max(p.violation));
    let pass = pairs.iter().all(|p| p.pass);
    Ok(ComparisonOutcome { worst_violation, pass, pairs })
}

/// Comparison monotonicity of the closed forms alone: lambda_1 < lambda_2
/// with the same exponent gives u_1 <= u_2 at every sampled radius, so the
/// returned worst violation is <= 0 exactly.
pub fn oracle_comparison_suite(
    seed: u64,
    count: usize,
    dim: usize,
    radius: f64,
    q_range: (f64, f64),
    lambda_range: (f64, f64),
    samples: usize,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..count {
        let q = rng.gen_range(q_range.0..q_range.1);
        if (q - 1.0).abs() < 1e-6 {
            continue;
        }
        let l1 = rng.gen_range(lambda_range.0..lambda_range.1);
        let l2 = l1 * rng.gen_range(1.1..3.0);
        let s1 = build_exact(dim, radius, l1, q)?;
        let s2 = build_exact(dim, radius, l2, q)?;
        for k in 1..=samples {
            let r = radius * k as f64 / samples as f64;
            let u1 = s1.u(r)?.to_f64();
            let u2 = s2.u(r)?.to_f64();
            if u1.is_finite() && u2.is_finite() {
                worst = worst.max(u1 - u2);
            }
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Plateau probe

/// Detected plateau of a solved radial field against the oracle threshold.
#[derive(Debug, Clone)]
pub struct PlateauProbe {
    /// Smallest node radius beyond which |u| stays at or below the probe
    /// tolerance.
    pub detected_radius: f64,
    /// Largest |u| over the oracle's plateau region r >= rho.
    pub max_plateau_value: f64,
    /// Admissible distance 5 h + sqrt(eps) R.
    pub band: f64,
    pub pass: bool,
}

/// Locate the zero plateau of `u` and compare it with the oracle threshold.
/// Requires a Singular (or Trivial) oracle; the Mild plateau is interior and
/// nonzero, which this probe does not target.
pub fn plateau_probe(
    u: &[f64],
    mesh: &RadialMesh,
    exact: &ExactRadialSolution,
    tol: f64,
    eps: f64,
) -> Result<PlateauProbe> {
    if u.len() != mesh.node_count() {
        return Err(Error::Data("field does not match the mesh".into()));
    }
    if exact.case() == ExactCase::Mild {
        return Err(Error::Precondition(
            "plateau probe expects a Singular or Trivial oracle".into(),
        ));
    }
    let nodes = mesh.nodes();
    // Suffix maxima of |u|: detected radius is the first node whose suffix
    // stays within tolerance.
    let mut suffix = vec![0.0f64; u.len()];
    let mut run = f64::NEG_INFINITY;
    for i in (0..u.len()).rev() {
        run = run.max(u[i].abs());
        suffix[i] = run;
    }
    let first = suffix
        .iter()
        .position(|&m| m <= tol)
        .unwrap_or(u.len() - 1);
    let detected_radius = nodes[first];
    let rho = exact.threshold().min(mesh.radius());
    let max_plateau_value = nodes
        .iter()
        .zip(u)
        .filter(|(r, _)| **r >= rho)
        .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    let band = 5.0 * mesh.max_spacing() + eps.sqrt() * mesh.radius();
    let pass = match exact.case() {
        ExactCase::Trivial => detected_radius == 0.0,
        _ => (detected_radius - rho).abs() <= band,
    };
    Ok(PlateauProbe { detected_radius, max_plateau_value, band, pass })
}

// ---------------------------------------------------------------------------
// Regularity probe

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormVerdict {
    Stabilizes,
    Grows,
    Inconclusive,
}

/// Trend of the L^s content across shrinking inner cutoffs.
#[derive(Debug, Clone)]
pub struct NormTrend {
    pub s: f64,
    /// L^s norms at each cutoff level (cutoffs shrink along the list).
    pub norms: Vec<f64>,
    pub verdict: NormVerdict,
}

/// Origin blow-up fit and critical-summability table for a singular datum.
#[derive(Debug, Clone)]
pub struct RegularityReport {
    pub dim: usize,
    pub lambda: f64,
    pub q: f64,
    pub fitted_alpha: f64,
    pub predicted_alpha: f64,
    /// s* = N/(q-1); norms below it stabilize, above it they grow.
    pub critical_exponent: f64,
    pub table: Vec<NormTrend>,
}

/// L^s norm of the oracle over [cutoff, R] by composite midpoint quadrature
/// on a geometric partition (the integrand is a power near the origin).
pub fn oracle_norm_with_cutoff(
    sol: &ExactRadialSolution,
    s: f64,
    cutoff: f64,
    subdivisions: usize,
) -> Result<f64> {
    if !(cutoff > 0.0 && cutoff < sol.radius()) {
        return Err(Error::Domain(format!("cutoff {cutoff} outside (0, R)")));
    }
    let n = sol.dim() as f64;
    let sigma = crate::mesh::unit_sphere_area(sol.dim());
    let ratio = (sol.radius() / cutoff).powf(1.0 / subdivisions as f64);
    let mut acc = 0.0;
    let mut lo = cutoff;
    for _ in 0..subdivisions {
        let hi = (lo * ratio).min(sol.radius());
        let mid = 0.5 * (lo + hi);
        let u = sol.u(mid)?.to_f64();
        if u > 0.0 && u.is_finite() {
            acc += u.powf(s) * mid.powf(n - 1.0) * (hi - lo);
        }
        lo = hi;
    }
    Ok((sigma * acc).powf(1.0 / s))
}

/// Fit u ~ r^{-alpha} on [window_lo, 10 window_lo] by least squares in
/// log-log coordinates.
fn fit_blowup(sol: &ExactRadialSolution, window_lo: f64, points: usize) -> Result<f64> {
    let ratio = 10.0f64.powf(1.0 / (points - 1) as f64);
    let mut xs = Vec::with_capacity(points);
    let mut ys = Vec::with_capacity(points);
    let mut r = window_lo;
    for _ in 0..points {
        let u = sol.u(r)?.to_f64();
        if u > 0.0 && u.is_finite() {
            xs.push(r.ln());
            ys.push(u.ln());
        }
        r *= ratio;
    }
    if xs.len() < 2 {
        return Err(Error::Precondition("no usable samples in the fit window".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    Ok(-(num / den))
}

/// Probe the sharpness of the summability claim for the singular oracle:
/// fit the origin blow-up exponent (predicted q - 1) and classify each L^s
/// norm trend across the given shrinking cutoffs against s* = N/(q-1).
pub fn regularity_probe(
    dim: usize,
    radius: f64,
    lambda: f64,
    q: f64,
    cutoffs: &[f64],
    s_list: &[f64],
) -> Result<RegularityReport> {
    if !(q > 1.0) {
        return Err(Error::Precondition(format!(
            "regularity probe expects a singular exponent q > 1, got {q}"
        )));
    }
    if cutoffs.len() < 2 {
        return Err(Error::Precondition("need at least two cutoff levels".into()));
    }
    let sol = build_exact(dim, radius, lambda, q)?;
    let fitted_alpha = fit_blowup(&sol, cutoffs.last().copied().unwrap(), 64)?;
    let mut table = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let mut norms = Vec::with_capacity(cutoffs.len());
        for &cut in cutoffs {
            norms.push(oracle_norm_with_cutoff(&sol, s, cut, 2000)?);
        }
        // Work with the integral (norm^s), whose growth is geometric in the
        // divergent case.
        let k = norms.len();
        let last = norms[k - 1].powf(s);
        let prev = norms[k - 2].powf(s);
        let ratio = last / prev.max(1e-300);
        let verdict = if ratio >= 1.5 {
            NormVerdict::Grows
        } else if ratio <= 1.05 {
            NormVerdict::Stabilizes
        } else {
            NormVerdict::Inconclusive
        };
        table.push(NormTrend { s, norms, verdict });
    }
    Ok(RegularityReport {
        dim,
        lambda,
        q,
        fitted_alpha,
        predicted_alpha: q - 1.0,
        critical_exponent: dim as f64 / (q - 1.0),
        table,
    })
}

// ---------------------------------------------------------------------------
// Power identity and gradient-power bound

/// Both sides of the tested-power identity and their relative gap.
#[derive(Debug, Clone, Copy)]
pub struct PowerIdentity {
    /// integral |D u^m| + integral u^m |Du|.
    pub lhs: f64,
    /// integral u^m f.
    pub rhs: f64,
    pub relative_gap: f64,
}

/// Quadrature of g(r) r^{N-1} over the mesh cells clipped to (0, hi), with
/// the midpoint of each clipped cell.
fn clipped_quadrature(
    mesh: &RadialMesh,
    hi: f64,
    mut g: impl FnMut(f64) -> f64,
) -> f64 {
    let n = mesh.dim() as f64;
    let mut acc = 0.0;
    for e in 0..mesh.cells() {
        let a = mesh.nodes()[e];
        let b = mesh.nodes()[e + 1].min(hi);
        if b <= a {
            break;
        }
        let mid = 0.5 * (a + b);
        acc += g(mid) * mid.powf(n - 1.0) * (b - a);
    }
    mesh.sphere_area() * acc
}

fn admissibility(exact: &ExactRadialSolution, m: f64) -> Result<()> {
    if exact.case() != ExactCase::Singular {
        return Err(Error::Precondition("the identity checks target the singular case".into()));
    }
    let (n, q) = (exact.dim() as f64, exact.q());
    if !(m > 1.0) {
        return Err(Error::Precondition(format!("test power m = {m} must exceed 1")));
    }
    let bound = (n - q) / (q - 1.0);
    if m * (q - 1.0) >= n - q - 1e-9 {
        return Err(Error::Precondition(format!(
            "integrability requires m (q-1) < N - q, i.e. m < {bound}; got m = {m}"
        )));
    }
    Ok(())
}

/// Verify integral |D u^m| + integral u^m |Du| = integral u^m f against the
/// closed forms, by r^{N-1}-weighted midpoint quadrature on the mesh. The
/// gap shrinks under refinement.
pub fn power_identity_check(
    exact: &ExactRadialSolution,
    m: f64,
    mesh: &RadialMesh,
) -> Result<PowerIdentity> {
    admissibility(exact, m)?;
    let pin = exact.threshold().min(exact.radius());
    let (lam, q) = (exact.lambda(), exact.q());
    let profile = |r: f64| exact.u(r).map(|v| v.to_f64()).unwrap_or(0.0);
    let slope = |r: f64| exact.u_prime(r).unwrap_or(0.0);
    let lhs = clipped_quadrature(mesh, pin, |r| {
        let h = profile(r);
        let dh = slope(r).abs();
        m * h.powf(m - 1.0) * dh + h.powf(m) * dh
    });
    let rhs = clipped_quadrature(mesh, pin, |r| profile(r).powf(m) * lam * r.powf(-q));
    let relative_gap = (lhs - rhs).abs() / rhs.abs().max(1e-300);
    Ok(PowerIdentity { lhs, rhs, relative_gap })
}

/// Both sides of the gradient-power bound
/// integral |D u^{m+1}| <= (m+1) ||u^m||_{p'} ||f||_p.
#[derive(Debug, Clone, Copy)]
pub struct GradientPowerBound {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Check the bound for the closed-form solution; all exponent constraints
/// are validated first (f in L^p needs p < N/q, u^m in L^{p'} needs
/// m (q-1) p' < N, and the left side needs m (q-1) < N - q).
pub fn gradient_power_bound_check(
    exact: &ExactRadialSolution,
    m: f64,
    p: f64,
    mesh: &RadialMesh,
) -> Result<GradientPowerBound> {
    admissibility(exact, m)?;
    let (n, q, lam) = (exact.dim() as f64, exact.q(), exact.lambda());
    if !(p > 1.0) || p >= n / q - 1e-9 {
        return Err(Error::Precondition(format!(
            "datum membership f in L^p requires 1 < p < N/q = {}; got p = {p}",
            n / q
        )));
    }
    let p_prime = p / (p - 1.0);
    if m * (q - 1.0) * p_prime >= n - 1e-9 {
        return Err(Error::Precondition(format!(
            "u^m in L^p' requires m (q-1) p' < N; got {} >= {n}",
            m * (q - 1.0) * p_prime
        )));
    }
    let pin = exact.threshold().min(exact.radius());
    let profile = |r: f64| exact.u(r).map(|v| v.to_f64()).unwrap_or(0.0);
    let slope = |r: f64| exact.u_prime(r).unwrap_or(0.0);
    let lhs = clipped_quadrature(mesh, pin, |r| {
        (m + 1.0) * profile(r).powf(m) * slope(r).abs()
    });
    let um_norm = clipped_quadrature(mesh, pin, |r| profile(r).powf(m * p_prime)).powf(1.0 / p_prime);
    let f_norm = clipped_quadrature(mesh, exact.radius(), |r| (lam * r.powf(-q)).powf(p))
        .powf(1.0 / p);
    let rhs = (m + 1.0) * um_norm * f_norm;
    Ok(GradientPowerBound { lhs, rhs, pass: lhs <= rhs * 1.01 })
}

// ---------------------------------------------------------------------------
// Transformed equation

/// Residual of -div(e^{-u} z) = e^{-u} f with the divergence taken by
/// second-order finite differences.
#[derive(Debug, Clone, Copy)]
pub struct TransformedResidual {
    pub max_residual: f64,
    pub l2_residual: f64,
    pub nodes_used: usize,
}

/// Exclusion windows of the transformed-equation check.
#[derive(Debug, Clone, Copy)]
pub struct TransformOpts {
    /// Exclude nodes with r below this radius (the solution may be
    /// unbounded there).
    pub inner_exclusion: f64,
    /// Exclude nodes within (center, halfwidth) of the threshold kink.
    pub kink_exclusion: Option<(f64, f64)>,
}

/// Evaluate the transformed-equation residual for node data (u may contain
/// +inf at the origin marker; e^{-u} is then 0). The divergence of
/// F = r^{N-1} e^{-u} z is differenced with the 3-point nonuniform stencil.
pub fn transformed_equation_check(
    u: &[f64],
    z: &[f64],
    f: &[f64],
    mesh: &RadialMesh,
    opts: TransformOpts,
) -> Result<TransformedResidual> {
    let nn = mesh.node_count();
    if u.len() != nn || z.len() != nn || f.len() != nn {
        return Err(Error::Data("field sizes do not match the mesh".into()));
    }
    let n = mesh.dim() as f64;
    let nodes = mesh.nodes();
    let big: Vec<f64> = (0..nn)
        .map(|i| nodes[i].powf(n - 1.0) * (-u[i]).exp() * z[i])
        .collect();
    let mut max_residual = 0.0f64;
    let mut acc = 0.0;
    let mut nodes_used = 0;
    for i in 1..nn - 1 {
        let r = nodes[i];
        if r < opts.inner_exclusion {
            continue;
        }
        if let Some((center, half)) = opts.kink_exclusion {
            if (r - center).abs() <= half {
                continue;
            }
        }
        let dl = nodes[i] - nodes[i - 1];
        let dr = nodes[i + 1] - nodes[i];
        let deriv = (dl * dl * big[i + 1] - dr * dr * big[i - 1]
            + (dr * dr - dl * dl) * big[i])
            / (dl * dr * (dl + dr));
        let res = -deriv / r.powf(n - 1.0) - (-u[i]).exp() * f[i];
        max_residual = max_residual.max(res.abs());
        acc += mesh.node_volume(i) * res * res;
        nodes_used += 1;
    }
    if nodes_used == 0 {
        return Err(Error::Precondition("every node was excluded".into()));
    }
    Ok(TransformedResidual {
        max_residual,
        l2_residual: (mesh.sphere_area() * acc).sqrt(),
        nodes_used,
    })
}

/// Convenience: run the transformed-equation check on a solver report.
pub fn transformed_equation_check_solved(
    u: &ScalarField,
    z: &[f64],
    f: &ScalarField,
    opts: TransformOpts,
) -> Result<TransformedResidual> {
    let mesh = u
        .mesh()
        .as_radial()
        .ok_or_else(|| Error::Data("transformed-equation check needs a radial mesh".into()))?;
    transformed_equation_check(u.values(), z, f.values(), mesh, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datum::evaluate_datum;
    use approx::assert_relative_eq;

    #[test]
    fn ladder_matches_the_formula() {
        let l = exponent_ladder(3, 2.0, 1).unwrap();
        assert_relative_eq!(l.terms[0], 1.5, max_relative = 1e-14);
        assert_relative_eq!(l.terms[1], 2.625, max_relative = 1e-14);
        assert_relative_eq!(l.limit, 6.0, max_relative = 1e-14);
        let l = exponent_ladder(2, 1.5, 0).unwrap();
        assert_relative_eq!(l.terms[0], 2.0, max_relative = 1e-14);
        assert_relative_eq!(l.limit, 6.0, max_relative = 1e-14);
        assert!(exponent_ladder(3, 0.9, 2).is_err());
        assert!(exponent_ladder(3, 3.0, 2).is_err());
    }

    #[test]
    fn ladder_partial_sums_approach_the_limit() {
        let l = exponent_ladder(3, 2.0, 40).unwrap();
        let ratio: f64 = l.n_prime / l.p_prime;
        for (j, w) in l.terms.windows(2).enumerate() {
            assert!(w[1] > w[0]);
            assert!(w[1] < l.limit);
            let _ = j;
        }
        // Within 1% once the geometric tail is below 1%.
        let j = (0.01f64.ln() / ratio.ln()).ceil() as usize;
        assert!((l.limit - l.terms[j]) / l.limit < 0.01);
        let last = *l.terms.last().unwrap();
        assert_relative_eq!(last, l.limit, max_relative = 1e-5);
    }

    #[test]
    fn oracle_comparison_has_no_violation() {
        let worst = oracle_comparison_suite(7, 25, 3, 2.0, (1.1, 2.5), (0.4, 3.0), 160).unwrap();
        assert!(worst <= 0.0, "worst violation {worst}");
        let worst = oracle_comparison_suite(11, 25, 2, 1.0, (0.2, 0.9), (0.5, 4.0), 160).unwrap();
        assert!(worst <= 0.0, "worst violation {worst}");
    }

    #[test]
    fn plateau_probe_on_the_sampled_oracle() {
        let mesh = RadialMesh::build(3, 3.0, 256, 1.0).unwrap();
        let sol = build_exact(3, 3.0, 2.0, 2.0).unwrap();
        let u = sol.sample_u(&mesh);
        let probe = plateau_probe(&u, &mesh, &sol, 0.0, 1e-12).unwrap();
        // First node at or beyond rho = 1.
        let expected = mesh.nodes().iter().copied().find(|&r| r >= 1.0).unwrap();
        assert_eq!(probe.detected_radius, expected);
        assert_eq!(probe.max_plateau_value, 0.0);
        assert!(probe.pass);
    }

    #[test]
    fn plateau_probe_trivial_case() {
        let mesh = RadialMesh::build(2, 0.5, 64, 1.0).unwrap();
        let sol = build_exact(2, 0.5, 2.0, 0.5).unwrap();
        let u = sol.sample_u(&mesh);
        let probe = plateau_probe(&u, &mesh, &sol, 1e-12, 1e-12).unwrap();
        assert_eq!(probe.detected_radius, 0.0);
        assert!(probe.pass);
    }

    #[test]
    fn regularity_probe_fits_the_blowup() {
        let cutoffs = [1e-2, 1e-3, 1e-4, 1e-5];
        let report = regularity_probe(3, 1.0, 2.0, 2.0, &cutoffs, &[2.4, 3.6]).unwrap();
        assert_relative_eq!(report.predicted_alpha, 1.0, max_relative = 1e-14);
        assert!((report.fitted_alpha - 1.0).abs() < 0.05, "alpha {}", report.fitted_alpha);
        assert_relative_eq!(report.critical_exponent, 3.0, max_relative = 1e-14);
        assert_eq!(report.table[0].verdict, NormVerdict::Stabilizes);
        assert_eq!(report.table[1].verdict, NormVerdict::Grows);
    }

    #[test]
    fn power_identity_on_a_fine_graded_mesh() {
        // Oracle values for (N=3, R=1, lambda=1, q=1.5, m=2), computed by
        // high-precision quadrature of the closed forms:
        // |Du^m| = 0.8726646259971648, u^m |Du| = 5.643231248114999,
        // u^m f = 6.515895874112163.
        let sol = build_exact(3, 1.0, 1.0, 1.5).unwrap();
        let mesh = RadialMesh::build(3, 1.0, 50_000, 3.0).unwrap();
        let check = power_identity_check(&sol, 2.0, &mesh).unwrap();
        assert_relative_eq!(check.rhs, 6.515895874112163, max_relative = 3e-3);
        assert_relative_eq!(check.lhs, 0.8726646259971648 + 5.643231248114999, max_relative = 3e-3);
        assert!(check.relative_gap < 5e-3, "gap {}", check.relative_gap);
    }

    #[test]
    fn power_identity_rejects_inadmissible_powers() {
        let sol = build_exact(3, 3.0, 2.0, 2.0).unwrap();
        let mesh = RadialMesh::build(3, 3.0, 64, 2.0).unwrap();
        // m (q-1) = 1.1 > N - q = 1.
        assert!(matches!(
            power_identity_check(&sol, 1.1, &mesh),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn gradient_power_bound_holds_with_slack() {
        // Independent quadrature gives lhs ~ 21.83, rhs ~ 40.14.
        let sol = build_exact(3, 1.0, 2.0, 1.5).unwrap();
        let mesh = RadialMesh::build(3, 1.0, 50_000, 3.0).unwrap();
        let check = gradient_power_bound_check(&sol, 1.2, 1.8, &mesh).unwrap();
        assert!(check.pass);
        assert_relative_eq!(check.lhs, 21.834271564924025, max_relative = 5e-3);
        assert_relative_eq!(check.rhs, 40.14487661839113, max_relative = 5e-3);
    }

    #[test]
    fn transformed_equation_oracle_residual_is_tiny() {
        let mesh = RadialMesh::build(3, 3.0, 20_000, 1.0).unwrap();
        let sol = build_exact(3, 3.0, 2.0, 2.0).unwrap();
        let u = sol.sample_u(&mesh);
        let z = sol.sample_z(&mesh);
        let f = evaluate_datum(
            &DatumSpec::power_law(2.0, 2.0).unwrap(),
            &Mesh::Radial(mesh.clone()),
        )
        .unwrap();
        let res = transformed_equation_check(
            &u,
            &z,
            f.values(),
            &mesh,
            TransformOpts { inner_exclusion: 0.03, kink_exclusion: Some((1.0, 0.06)) },
        )
        .unwrap();
        assert!(res.max_residual <= 1e-8, "max residual {}", res.max_residual);
        assert!(res.nodes_used > 10_000);
    }

    #[test]
    fn transformed_equation_zero_fields() {
        let mesh = RadialMesh::build(2, 1.0, 64, 1.0).unwrap();
        let zeros = vec![0.0; 65];
        let res = transformed_equation_check(
            &zeros,
            &zeros,
            &zeros,
            &mesh,
            TransformOpts { inner_exclusion: 0.0, kink_exclusion: None },
        )
        .unwrap();
        assert_eq!(res.max_residual, 0.0);
        assert_eq!(res.l2_residual, 0.0);
    }
}
