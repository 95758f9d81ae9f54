//! Pointwise numerical checks of the partition identities.
//!
//! Closed-form ambient curvature terms are used throughout; finite
//! differences only enter through derivatives of the potential.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::discrete::{bochner_gap, delta1_vol, InterfaceMesh2D, OperatorSet, PartitionComplex};
use crate::error::{Error, Result};
use crate::geometry::linalg::min_norm_solve;
use crate::geometry::{fd_surface_hessian, fd_surface_laplacian, sphere_chart, FdConfig, Space, SpaceKind, Vector};
use crate::partitions::{
    interface_samples, interface_sphere, mean_curvature_of, nonempty_interfaces, PartitionSpec, TriplePointSample,
    DEFAULT_SAMPLES,
};
use crate::potential::PotentialSpec;

pub const ALGEBRAIC_TOL: f64 = 1e-10;
pub const FD_TOL: f64 = 1e-6;
pub const MESH_TOL: f64 = 0.02;
pub const VOLUME_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSpec {
    /// Samples per interface or per triple junction.
    pub samples: usize,
    pub seed: u64,
    pub fd: FdConfig,
    pub tol: f64,
}

impl CheckSpec {
    pub fn new(samples: usize, seed: u64, tol: f64) -> Result<Self> {
        let s = CheckSpec { samples, seed, fd: FdConfig::default(), tol };
        s.validate()?;
        Ok(s)
    }

    pub fn algebraic(samples: usize, seed: u64) -> Self {
        CheckSpec { samples, seed, fd: FdConfig::default(), tol: ALGEBRAIC_TOL }
    }

    pub fn finite_difference(samples: usize, seed: u64) -> Self {
        CheckSpec { samples, seed, fd: FdConfig::default(), tol: FD_TOL }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Contract("tolerance must be positive".into()));
        }
        self.fd.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub max: f64,
    pub mean: f64,
    pub samples: usize,
    pub tol: f64,
    pub pass: bool,
}

impl VerificationReport {
    pub fn from_residuals(check: &str, residuals: &[f64], tol: f64) -> Self {
        let max = residuals.iter().cloned().fold(0.0, f64::max);
        let nan = residuals.iter().any(|r| r.is_nan());
        let mean = if residuals.is_empty() { 0.0 } else { residuals.iter().sum::<f64>() / residuals.len() as f64 };
        let max = if nan { f64::NAN } else { max };
        VerificationReport { check: check.to_string(), max, mean, samples: residuals.len(), tol, pass: max <= tol }
    }

    /// Combines reports of the same check into one.
    pub fn merge(check: &str, reports: &[VerificationReport], tol: f64) -> Self {
        let samples: usize = reports.iter().map(|r| r.samples).sum();
        let max = reports.iter().map(|r| r.max).fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) });
        let mean = if samples == 0 {
            0.0
        } else {
            reports.iter().map(|r| r.mean * r.samples as f64).sum::<f64>() / samples as f64
        };
        VerificationReport { check: check.to_string(), max, mean, samples, tol, pass: max <= tol }
    }
}

/// Sampling radius used on non-compact spaces: Euclidean norm on `R^n` and
/// the Gaussian space, distance to the apex on `H^n`.
pub fn sampling_radius(space: Space) -> f64 {
    match space.kind {
        SpaceKind::SphereS => 1e6,
        SpaceKind::EuclidR | SpaceKind::GaussG => 6.0,
        SpaceKind::HyperH => 3.0,
    }
}

/// Samples of every nonempty interface.
pub fn interface_sample_sets(part: &PartitionSpec, spec: &CheckSpec) -> Result<Vec<((usize, usize), Vec<Vector>)>> {
    let radius = sampling_radius(part.space);
    let mut out = Vec::new();
    for (i, j) in nonempty_interfaces(part, DEFAULT_SAMPLES, spec.seed) {
        let pts = interface_samples(part, i, j, spec.samples, spec.seed, 1e-6, radius)?;
        out.push(((i, j), pts));
    }
    Ok(out)
}

/// Triple-junction samples of every triple of cells with pairwise nonempty
/// interfaces, together with the number of such triples.
pub fn triple_sample_sets(part: &PartitionSpec, spec: &CheckSpec) -> Result<(Vec<TriplePointSample>, usize)> {
    let radius = sampling_radius(part.space);
    let pairs = nonempty_interfaces(part, DEFAULT_SAMPLES, spec.seed);
    let adjacent = |a: usize, b: usize| pairs.contains(&(a.min(b), a.max(b)));
    let q = part.q();
    let mut out = Vec::new();
    let mut triples = 0;
    for i in 0..q {
        for j in i + 1..q {
            for k in j + 1..q {
                if !(adjacent(i, j) && adjacent(j, k) && adjacent(i, k)) {
                    continue;
                }
                triples += 1;
                match crate::partitions::triple_points(part, i, j, k, spec.samples, spec.seed, radius) {
                    Ok(pts) => out.extend(pts.into_iter().map(|p| TriplePointSample::at(part, i, j, k, p))),
                    Err(Error::EmptyJunction(..)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok((out, triples))
}

fn norm_in(space: Space, v: &Vector) -> f64 {
    space.inner(v, v).abs().sqrt()
}

/// Stationarity residuals, reported separately: constancy of the weighted
/// mean curvature, normal sums and angles at triple points, and the fit of
/// mean curvatures by differences of Lagrange multipliers.
pub fn stationarity_parts(part: &PartitionSpec, spec: &CheckSpec) -> Result<Vec<VerificationReport>> {
    spec.validate()?;
    part.validate()?;
    let sets = interface_sample_sets(part, spec)?;
    let mut constancy = Vec::new();
    let mut reference = Vec::new();
    for ((i, j), pts) in &sets {
        let s = part.interface_sphere_raw(*i, *j);
        if let Some(p0) = pts.first() {
            let h0 = mean_curvature_of(&s, p0);
            reference.push(((*i, *j), h0));
            constancy.extend(pts.iter().map(|p| (mean_curvature_of(&s, p) - h0).abs()));
        }
    }
    let (triples, adjacent) = triple_sample_sets(part, spec)?;
    if adjacent > 0 && triples.is_empty() {
        return Err(Error::UnresolvedJunction(format!("{adjacent} adjacent triples but no junction samples")));
    }
    let mut sums = Vec::new();
    let mut angles = Vec::new();
    for t in &triples {
        let s = &t.normals[0] + &t.normals[1] + &t.normals[2];
        sums.push(norm_in(part.space, &s));
        for m in 0..3 {
            let a = part.space.inner(&t.normals[m], &t.normals[(m + 1) % 3]);
            angles.push((a + 0.5).abs());
        }
    }
    let mut lagrange = Vec::new();
    if !reference.is_empty() {
        let q = part.q();
        let a = DMatrix::from_fn(reference.len(), q, |r, c| {
            let (i, j) = reference[r].0;
            if c == i {
                1.0
            } else if c == j {
                -1.0
            } else {
                0.0
            }
        });
        let b = DVector::from_iterator(reference.len(), reference.iter().map(|r| r.1));
        let ls = min_norm_solve(&a, &b, 1e-12);
        let r = &a * &ls.x - &b;
        lagrange.extend(r.iter().map(|v| v.abs()));
    }
    Ok(vec![
        VerificationReport::from_residuals("stationarity/meanCurvature", &constancy, spec.tol),
        VerificationReport::from_residuals("stationarity/normalSum", &sums, spec.tol),
        VerificationReport::from_residuals("stationarity/angle", &angles, spec.tol),
        VerificationReport::from_residuals("stationarity/lagrange", &lagrange, spec.tol),
    ])
}

pub fn check_stationarity(part: &PartitionSpec, spec: &CheckSpec) -> Result<VerificationReport> {
    Ok(VerificationReport::merge("stationarity", &stationarity_parts(part, spec)?, spec.tol))
}

/// Largest component of the cyclic 3-tensor
/// `sum n ⊗ n ⊗ n_∂ - n_∂ ⊗ n ⊗ n` at a triple point.
pub fn three_tensor_residual(t: &TriplePointSample) -> f64 {
    let d = t.p.len();
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let mut v = 0.0;
                for m in 0..3 {
                    let (n, e) = (&t.normals[m], &t.conormals[m]);
                    v += n[a] * n[b] * e[c] - e[a] * n[b] * n[c];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

pub fn check_three_tensor(part: &PartitionSpec, spec: &CheckSpec) -> Result<VerificationReport> {
    spec.validate()?;
    let (triples, adjacent) = triple_sample_sets(part, spec)?;
    if adjacent == 0 || triples.is_empty() {
        return Err(Error::UnresolvedJunction("no triple points to test".into()));
    }
    let r: Vec<f64> = triples.iter().map(three_tensor_residual).collect();
    Ok(VerificationReport::from_residuals("threeTensor", &r, spec.tol))
}

/// Residual of the non-oriented conformal boundary conditions at a triple
/// point, relative to `max(V, 1)`.
pub fn conformal_bc_residual(v: &PotentialSpec, t: &TriplePointSample) -> f64 {
    let val = v.value(&t.p);
    (0..3)
        .map(|m| (v.derivative(&t.p, &t.conormals[m]) - t.bar_ii[m] * val).abs() / val.max(1.0))
        .fold(0.0, f64::max)
}

pub fn check_conformal_bc(part: &PartitionSpec, v: &PotentialSpec, spec: &CheckSpec) -> Result<VerificationReport> {
    spec.validate()?;
    v.validate()?;
    if v.space != part.space {
        return Err(Error::Contract("potential and partition live on different spaces".into()));
    }
    let (triples, _) = triple_sample_sets(part, spec)?;
    let r: Vec<f64> = triples.iter().map(|t| conformal_bc_residual(v, t)).collect();
    Ok(VerificationReport::from_residuals("conformalBC", &r, spec.tol))
}

/// `Ric_{M,mu}(n,n) + |II|^2` on an interface of geometric curvature `k`.
pub fn jacobi_potential_term(space: Space, k: f64) -> f64 {
    let m = space.n as f64 - 1.0;
    match space.kind {
        SpaceKind::SphereS => m * (1.0 + k * k),
        SpaceKind::EuclidR => m * k * k,
        SpaceKind::HyperH => m * (k * k - 1.0),
        SpaceKind::GaussG => 1.0,
    }
}

/// Constant `r` with `Ric_{Σ,mu} = r g` on an interface of curvature `k`
/// (Gauss equation; on the Gaussian space the Hessian of the weight).
pub fn interface_ricci(space: Space, k: f64) -> f64 {
    let m = space.n as f64 - 2.0;
    match space.kind {
        SpaceKind::SphereS => m * (1.0 + k * k),
        SpaceKind::EuclidR => m * k * k,
        SpaceKind::HyperH => m * (k * k - 1.0),
        SpaceKind::GaussG => 1.0,
    }
}

struct PotentialSample {
    value: f64,
    laplacian: f64,
    hessian: DMatrix<f64>,
    curvature: f64,
    p: Vector,
}

fn potential_samples(part: &PartitionSpec, v: &PotentialSpec, spec: &CheckSpec) -> Result<Vec<PotentialSample>> {
    spec.validate()?;
    v.validate()?;
    if v.space != part.space {
        return Err(Error::Contract("potential and partition live on different spaces".into()));
    }
    let f = |x: &Vector| v.value(x);
    let mut out = Vec::new();
    for ((i, j), pts) in interface_sample_sets(part, spec)? {
        let s = interface_sphere(part, i, j)?;
        for p in pts {
            let chart = sphere_chart(part.space, &s, &p)?;
            out.push(PotentialSample {
                value: v.value(&p),
                laplacian: fd_surface_laplacian(&chart, &f, spec.fd)?,
                hessian: fd_surface_hessian(&chart, &f, spec.fd)?,
                curvature: s.geometric_curvature(&p),
                p,
            });
        }
    }
    Ok(out)
}

/// Finite-difference `L_Jac V` against its expected constant, and the FD
/// interface Hessian of `V` against its closed form. Residuals are relative
/// to `max(V, 1)`.
pub fn check_ljac_potential(part: &PartitionSpec, v: &PotentialSpec, spec: &CheckSpec) -> Result<VerificationReport> {
    let target = v.expected_ljac();
    let mut r = Vec::new();
    for s in potential_samples(part, v, spec)? {
        let ljac = s.laplacian + jacobi_potential_term(part.space, s.curvature) * s.value;
        let h = v.surface_hessian_coefficient(s.curvature, &s.p);
        let m = s.hessian.nrows();
        let hess_err = (&s.hessian - DMatrix::identity(m, m) * h).abs().max();
        let scale = s.value.max(1.0);
        r.push((ljac - target).abs().max(hess_err) / scale);
    }
    Ok(VerificationReport::from_residuals("LJacPotential", &r, spec.tol))
}

/// `V Ric^V = V Ric_{Σ,mu} + (Δ_mu V) g - ∇²V` at a sample, in the frame of
/// the chart.
fn v_ric_v(space: Space, s: &PotentialSample) -> DMatrix<f64> {
    let m = s.hessian.nrows();
    let ric = interface_ricci(space, s.curvature);
    DMatrix::identity(m, m) * (s.value * ric + s.laplacian) - &s.hessian
}

/// Largest eigenvalue deviation of `V Ric^V` from its expected multiple of
/// the metric, relative to `max(V, 1)`.
pub fn check_ric_v(part: &PartitionSpec, v: &PotentialSpec, spec: &CheckSpec) -> Result<VerificationReport> {
    if part.space.n == 2 && part.space.kind != SpaceKind::GaussG {
        return Err(Error::Unsupported("V Ric^V vanishes identically on unweighted surfaces (n = 2)".into()));
    }
    let target = v.expected_ric_v();
    let mut r = Vec::new();
    for s in potential_samples(part, v, spec)? {
        let mat = v_ric_v(part.space, &s);
        let sym = (&mat + mat.transpose()) * 0.5;
        let eig = sym.symmetric_eigenvalues();
        let dev = eig.iter().map(|e| (e - target).abs()).fold(0.0, f64::max);
        r.push(dev / s.value.max(1.0));
    }
    Ok(VerificationReport::from_residuals("RicV", &r, spec.tol))
}

/// Relative gap of the integrated Bochner identity on a closed interface
/// mesh for one test function.
pub fn check_bochner_closed(
    mesh: &InterfaceMesh2D,
    v: &PotentialSpec,
    u: &dyn Fn(&Vector) -> f64,
    spec: &CheckSpec,
) -> Result<VerificationReport> {
    spec.validate()?;
    let g = bochner_gap(mesh, v, u, spec.fd)?;
    Ok(VerificationReport::from_residuals("BochnerClosed", &[g.gap], spec.tol))
}

/// `|delta^1 Vol|_inf` of `f = L_V u` for each field `u`.
pub fn check_volume_first_variation(
    complex: &PartitionComplex,
    ops: &OperatorSet,
    us: &[DVector<f64>],
    tol: f64,
) -> Result<VerificationReport> {
    if !(tol > 0.0) {
        return Err(Error::Contract("tolerance must be positive".into()));
    }
    let mut r = Vec::with_capacity(us.len());
    for u in us {
        if u.len() != ops.dofs {
            return Err(Error::DimensionMismatch { expected: ops.dofs, got: u.len() });
        }
        r.push(delta1_vol(complex, &ops.apply_l_v(u))?.amax());
    }
    Ok(VerificationReport::from_residuals("VolumeFirstVariation", &r, tol))
}
