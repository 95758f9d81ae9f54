use std::collections::HashMap;

use nalgebra::{DMatrix, Matrix2, Vector3};
use serde::{Deserialize, Serialize};

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};
use crate::geometry::{
    fd_gradient_coords, fd_surface_hessian, sphere_chart, Chart, FdConfig, GeneralizedSphere, SpaceKind, Vector,
};
use crate::potential::PotentialSpec;
use crate::rng;

/// Size cap of dense symmetric solves.
pub const MAX_DENSE: usize = 4000;

/// Icosahedral triangulation of a compact generalized 2-sphere. The sphere
/// is the affine image `center + radius (y_1 e_1 + y_2 e_2 + y_3 e_3)` of the
/// unit sphere, with `e` orthonormal in the signature of the space, so that
/// `unit` coordinates scaled by `radius` are isometric to the ambient ones.
#[derive(Debug, Clone)]
pub struct InterfaceMesh2D {
    pub sphere: GeneralizedSphere,
    pub center: Vector,
    pub radius: f64,
    pub axes: [Vector; 3],
    pub unit: Vec<Vector3<f64>>,
    pub vertices: Vec<Vector>,
    pub triangles: Vec<[usize; 3]>,
    /// Barycentric lumped areas.
    pub mass: Vec<f64>,
    pub closed: bool,
}

impl InterfaceMesh2D {
    pub fn nv(&self) -> usize {
        self.vertices.len()
    }

    pub fn area(&self) -> f64 {
        self.mass.iter().sum()
    }

    fn scaled(&self, i: usize) -> Vector3<f64> {
        self.unit[i] * self.radius
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        0.5 * (self.scaled(b) - self.scaled(a)).cross(&(self.scaled(c) - self.scaled(a))).norm()
    }

    /// Largest on-sphere residual of the vertices.
    pub fn sphere_residual(&self) -> f64 {
        self.vertices.iter().map(|x| self.sphere.residual(x) / self.sphere.normal_scale(x)).fold(0.0, f64::max)
    }

    /// Cotangent stiffness `K` (positive semidefinite): `u^T K u` is the
    /// Dirichlet energy of the piecewise linear interpolant.
    pub fn stiffness(&self) -> SparseMatrix {
        let n = self.nv();
        let mut k = SparseMatrix::zeros(n, n);
        for (i, j, c) in self.cotan_weights() {
            k.add(i, i, c);
            k.add(j, j, c);
            k.add(i, j, -c);
            k.add(j, i, -c);
        }
        k
    }

    // (i, j, (cot alpha + cot beta)/2) per triangle corner.
    fn cotan_weights(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(3 * self.triangles.len());
        for tri in &self.triangles {
            for r in 0..3 {
                let (i, j, k) = (tri[r], tri[(r + 1) % 3], tri[(r + 2) % 3]);
                let (a, b) = (self.scaled(i) - self.scaled(k), self.scaled(j) - self.scaled(k));
                let cot = a.dot(&b) / a.cross(&b).norm();
                out.push((i, j, 0.5 * cot));
            }
        }
        out
    }

    /// Discrete `L_V u = V Delta u - u Delta V` with edge weights
    /// `c_ij V_i V_j`, so that `L_V V = 0` exactly.
    pub fn apply_l_v(&self, v: &[f64], u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nv()];
        for (i, j, c) in self.cotan_weights() {
            let flux = c * (v[i] * u[j] - v[j] * u[i]);
            out[i] += flux;
            out[j] -= flux;
        }
        for (o, m) in out.iter_mut().zip(&self.mass) {
            *o /= m;
        }
        out
    }

    /// Coordinates of an ambient tangent vector in the scaled unit frame.
    fn scaled_coords(&self, w: &Vector) -> Vector3<f64> {
        let s = self.sphere.space;
        Vector3::new(s.inner(w, &self.axes[0]), s.inner(w, &self.axes[1]), s.inner(w, &self.axes[2]))
    }

    fn chart_at(&self, i: usize) -> Result<Chart> {
        sphere_chart(self.sphere.space, &self.sphere, &self.vertices[i])
    }
}

// A point of a compact generalized sphere, or `None` if it is not compact.
fn anchor_point(s: &GeneralizedSphere) -> Option<Vector> {
    let space = s.space;
    let d = space.ambient_dim();
    let orth = |c: &Vector, lorentz: bool| -> Vector {
        let inner = |x: &Vector, y: &Vector| if lorentz { space.inner(x, y) } else { x.dot(y) };
        let cc = inner(c, c);
        (0..d)
            .map(|i| {
                let b = crate::geometry::basis(d, i);
                &b - c * (inner(&b, c) / cc)
            })
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("d > 0")
    };
    match space.kind {
        SpaceKind::SphereS => {
            let c2 = s.c.norm_squared();
            let r2 = 1.0 - s.k * s.k / c2;
            if !(r2 > 0.0) {
                return None;
            }
            let u = orth(&s.c, false).normalize();
            Some(&s.c * (-s.k / c2) + u * r2.sqrt())
        }
        SpaceKind::EuclidR => {
            if s.k.abs() < 1e-12 {
                return None;
            }
            let center = &s.c * (-1.0 / s.k);
            let r2 = s.c.norm_squared() / (s.k * s.k) - (2.0 * s.k_s? - s.k) / s.k;
            if !(r2 > 0.0) {
                return None;
            }
            Some(center + crate::geometry::basis(d, 0) * r2.sqrt())
        }
        SpaceKind::HyperH => {
            let t = -space.inner(&s.c, &s.c);
            if !(t > 0.0) {
                return None;
            }
            let mut yc = &s.c / t.sqrt();
            if yc[d - 1] < 0.0 {
                yc = -yc;
            }
            let ch = s.k / space.inner(&s.c, &yc);
            if !(ch >= 1.0) {
                return None;
            }
            let mut u = crate::geometry::basis(d, 0);
            let proj = space.inner(&u, &yc);
            u += &yc * proj;
            let un = space.inner(&u, &u).sqrt();
            Some(yc * ch + u * ((ch * ch - 1.0).sqrt() / un))
        }
        SpaceKind::GaussG => None,
    }
}

fn icosahedron() -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let v = [
        [-1.0, p, 0.0],
        [1.0, p, 0.0],
        [-1.0, -p, 0.0],
        [1.0, -p, 0.0],
        [0.0, -1.0, p],
        [0.0, 1.0, p],
        [0.0, -1.0, -p],
        [0.0, 1.0, -p],
        [p, 0.0, -1.0],
        [p, 0.0, 1.0],
        [-p, 0.0, -1.0],
        [-p, 0.0, 1.0],
    ];
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (v.iter().map(|x| Vector3::new(x[0], x[1], x[2]).normalize()).collect(), f)
}

fn subdivide(v: &mut Vec<Vector3<f64>>, f: &[[usize; 3]]) -> Vec<[usize; 3]> {
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut get = |a: usize, b: usize, v: &mut Vec<Vector3<f64>>| -> usize {
        let key = (a.min(b), a.max(b));
        *mid.entry(key).or_insert_with(|| {
            v.push(((v[a] + v[b]) * 0.5).normalize());
            v.len() - 1
        })
    };
    let mut out = Vec::with_capacity(4 * f.len());
    for &[a, b, c] in f {
        let ab = get(a, b, v);
        let bc = get(b, c, v);
        let ca = get(c, a, v);
        out.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
    }
    out
}

/// Icosahedral mesh of a compact interface sphere after `level` midpoint
/// subdivisions (`10 * 4^level + 2` vertices).
pub fn mesh_sphere(sphere: &GeneralizedSphere, level: usize) -> Result<InterfaceMesh2D> {
    let space = sphere.space;
    if space.n != 3 {
        return Err(Error::Unsupported(format!("surface meshes need n = 3, got n = {}", space.n)));
    }
    if level > 7 {
        return Err(Error::OutOfRange(format!("subdivision level {level} above 7")));
    }
    let p = anchor_point(sphere).ok_or_else(|| Error::OpenMesh("interface is not a compact sphere".into()))?;
    let chart = sphere_chart(space, sphere, &p)?;
    let w2 = chart.omega2();
    if !(w2 > 1e-12) {
        return Err(Error::OpenMesh("interface is not a compact sphere".into()));
    }
    let w = w2.sqrt();
    let a = chart.accel();
    let center = &p + a / w2;
    let axes = [chart.frame[0].clone(), chart.frame[1].clone(), a * (-1.0 / w)];
    let radius = 1.0 / w;
    let (mut unit, mut tris) = icosahedron();
    for _ in 0..level {
        tris = subdivide(&mut unit, &tris);
    }
    for t in &mut tris {
        let [a, b, c] = *t;
        if (unit[b] - unit[a]).cross(&(unit[c] - unit[a])).dot(&unit[a]) < 0.0 {
            *t = [a, c, b];
        }
    }
    let vertices: Vec<Vector> =
        unit.iter().map(|y| &center + (&axes[0] * y[0] + &axes[1] * y[1] + &axes[2] * y[2]) * radius).collect();
    let mut mesh = InterfaceMesh2D {
        sphere: sphere.clone(),
        center,
        radius,
        axes,
        unit,
        vertices,
        triangles: tris,
        mass: Vec::new(),
        closed: true,
    };
    let mut mass = vec![0.0; mesh.nv()];
    for t in 0..mesh.triangles.len() {
        let ar = mesh.triangle_area(t) / 3.0;
        for &i in &mesh.triangles[t] {
            mass[i] += ar;
        }
    }
    mesh.mass = mass;
    Ok(mesh)
}

/// Lowest `count` eigenvalues of the lumped cotangent Laplacian
/// `M^{-1} K`, by a dense symmetric solve.
pub fn spectrum(mesh: &InterfaceMesh2D, count: usize) -> Result<Vec<f64>> {
    if !mesh.closed {
        return Err(Error::OpenMesh("spectrum needs a closed mesh".into()));
    }
    let n = mesh.nv();
    if n > MAX_DENSE {
        return Err(Error::TooLarge { limit: MAX_DENSE, got: n });
    }
    let k = mesh.stiffness();
    let d: Vec<f64> = mesh.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for &(j, v) in k.row(i) {
            s[(i, j)] = v * d[i] * d[j];
        }
    }
    let mut ev: Vec<f64> = s.symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    ev.truncate(count);
    Ok(ev)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BlReport {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Minimum over trials of `(rhs - lhs)/rhs`.
    pub min_gap: f64,
    pub trials: usize,
}

// V Ric^V in the chart frame at a vertex and V there.
fn v_ric_v_at(mesh: &InterfaceMesh2D, v: &PotentialSpec, i: usize, fd: FdConfig) -> Result<(Chart, Matrix2<f64>)> {
    let chart = mesh.chart_at(i)?;
    let f = |x: &Vector| v.value(x);
    let hess = fd_surface_hessian(&chart, &f, fd)?;
    let lap = hess[(0, 0)] + hess[(1, 1)];
    let gauss = mesh.sphere.space.curvature() + chart.curvature * chart.curvature;
    let val = v.value(&mesh.vertices[i]);
    let a = Matrix2::new(
        val * gauss + lap - hess[(0, 0)],
        -hess[(0, 1)],
        -hess[(1, 0)],
        val * gauss + lap - hess[(1, 1)],
    );
    Ok((chart, a))
}

fn check_potential(mesh: &InterfaceMesh2D, v: &PotentialSpec) -> Result<Vec<f64>> {
    if v.space != mesh.sphere.space {
        return Err(Error::Contract("potential and mesh live on different spaces".into()));
    }
    let vals: Vec<f64> = mesh.vertices.iter().map(|x| v.value(x)).collect();
    if let Some(bad) = vals.iter().find(|x| !(**x > 0.0)) {
        return Err(Error::NonPositivePotential(*bad));
    }
    Ok(vals)
}

/// Both sides of the conjugated Brascamp-Lieb inequality for `f = L_V u`:
/// `(N/(N-1)) int f^2/V` and `int (V Ric^V)^{-1}(X, X)` with
/// `X = V grad(f/V)` piecewise linear per triangle.
pub fn bl_sides(mesh: &InterfaceMesh2D, v: &PotentialSpec, n_dim: f64, u: &[f64]) -> Result<(f64, f64)> {
    let ctx = BlContext::new(mesh, v, FdConfig::default())?;
    ctx.sides(mesh, n_dim, u)
}

struct BlContext {
    vals: Vec<f64>,
    // Inverse of V Ric^V and the chart frame in scaled coordinates.
    inv: Vec<Matrix2<f64>>,
    frames: Vec<[Vector3<f64>; 2]>,
}

impl BlContext {
    fn new(mesh: &InterfaceMesh2D, v: &PotentialSpec, fd: FdConfig) -> Result<Self> {
        if !mesh.closed {
            return Err(Error::OpenMesh("Brascamp-Lieb check needs a closed mesh".into()));
        }
        let vals = check_potential(mesh, v)?;
        let mut inv = Vec::with_capacity(mesh.nv());
        let mut frames = Vec::with_capacity(mesh.nv());
        for i in 0..mesh.nv() {
            let (chart, a) = v_ric_v_at(mesh, v, i, fd)?;
            let sym = (a + a.transpose()) * 0.5;
            let emin = sym.symmetric_eigenvalues().min();
            if !(emin > 0.0) {
                return Err(Error::IndefiniteRicV(emin));
            }
            inv.push(sym.try_inverse().ok_or(Error::IndefiniteRicV(emin))?);
            frames.push([mesh.scaled_coords(&chart.frame[0]), mesh.scaled_coords(&chart.frame[1])]);
        }
        Ok(BlContext { vals, inv, frames })
    }

    fn sides(&self, mesh: &InterfaceMesh2D, n_dim: f64, u: &[f64]) -> Result<(f64, f64)> {
        if !(n_dim > 1.0) {
            return Err(Error::Contract("N must exceed 1".into()));
        }
        if u.len() != mesh.nv() {
            return Err(Error::DimensionMismatch { expected: mesh.nv(), got: u.len() });
        }
        let f = mesh.apply_l_v(&self.vals, u);
        let lhs = n_dim / (n_dim - 1.0)
            * (0..mesh.nv()).map(|i| mesh.mass[i] * f[i] * f[i] / self.vals[i]).sum::<f64>();
        let g: Vec<f64> = f.iter().zip(&self.vals).map(|(a, b)| a / b).collect();
        let mut rhs = 0.0;
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let grad = p1_gradient(mesh, tri, &g);
            let vavg = tri.iter().map(|&i| self.vals[i]).sum::<f64>() / 3.0;
            let x = grad * vavg;
            let mut acc = 0.0;
            for &i in tri {
                let xc = nalgebra::Vector2::new(x.dot(&self.frames[i][0]), x.dot(&self.frames[i][1]));
                acc += (xc.transpose() * self.inv[i] * xc)[0];
            }
            rhs += mesh.triangle_area(t) * acc / 3.0;
        }
        Ok((lhs, rhs))
    }
}

// Gradient of the linear interpolant on a triangle, in scaled coordinates.
fn p1_gradient(mesh: &InterfaceMesh2D, tri: &[usize; 3], g: &[f64]) -> Vector3<f64> {
    let p: Vec<Vector3<f64>> = tri.iter().map(|&i| mesh.scaled(i)).collect();
    let nrm = (p[1] - p[0]).cross(&(p[2] - p[0]));
    let a2 = nrm.norm_squared();
    let mut out = Vector3::zeros();
    for r in 0..3 {
        let edge = p[(r + 2) % 3] - p[(r + 1) % 3];
        out += nrm.cross(&edge) * (g[tri[r]] / a2);
    }
    out
}

/// Brascamp-Lieb check over random smooth fields: `u` is a random cubic
/// polynomial of the unit-sphere coordinates and `f = L_V u`.
pub fn bl_check(mesh: &InterfaceMesh2D, v: &PotentialSpec, n_dim: f64, trials: usize, seed: u64) -> Result<BlReport> {
    let ctx = BlContext::new(mesh, v, FdConfig::default())?;
    let mut r = rng::rng(seed);
    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
    let mut min_gap = f64::INFINITY;
    for _ in 0..trials {
        let coef: Vec<f64> = (0..20).map(|_| rng::gaussian(&mut r)).collect();
        let u: Vec<f64> = mesh.unit.iter().map(|y| cubic(&coef, y)).collect();
        let (l, rr) = ctx.sides(mesh, n_dim, &u)?;
        let gap = if rr > 0.0 { (rr - l) / rr } else if l <= 0.0 { 0.0 } else { f64::NEG_INFINITY };
        min_gap = min_gap.min(gap);
        lhs.push(l);
        rhs.push(rr);
    }
    Ok(BlReport { lhs, rhs, min_gap, trials })
}

// The 20 monomials of degree <= 3 in three variables.
fn cubic(c: &[f64], y: &Vector3<f64>) -> f64 {
    let mut out = 0.0;
    let mut t = 0;
    for a in 0..4 {
        for b in 0..4 - a {
            for d in 0..4 - a - b {
                out += c[t] * y[0].powi(a) * y[1].powi(b) * y[2].powi(d);
                t += 1;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BochnerGap {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / max(|lhs|, |rhs|)`, zero when both vanish.
    pub gap: f64,
}

/// Both sides of the integrated Bochner identity on a closed interface,
/// `int V (Delta u - (Delta V/V) u)^2` and
/// `int V |Hess u - (Hess V/V) u|^2 + (V Ric^V)(X, X)` with
/// `X = grad u - (grad V/V) u`, using chart derivatives at the vertices and
/// lumped quadrature.
pub fn bochner_gap(mesh: &InterfaceMesh2D, v: &PotentialSpec, u: &dyn Fn(&Vector) -> f64, fd: FdConfig) -> Result<BochnerGap> {
    if !mesh.closed {
        return Err(Error::OpenMesh("Bochner check needs a closed mesh".into()));
    }
    fd.validate()?;
    let vals = check_potential(mesh, v)?;
    let vf = |x: &Vector| v.value(x);
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for i in 0..mesh.nv() {
        let (chart, a) = v_ric_v_at(mesh, v, i, fd)?;
        let hv = fd_surface_hessian(&chart, &vf, fd)?;
        let gv = fd_gradient_coords(&chart, &vf, fd)?;
        let hu = fd_surface_hessian(&chart, u, fd)?;
        let gu = fd_gradient_coords(&chart, u, fd)?;
        let (vi, ui) = (vals[i], u(&mesh.vertices[i]));
        let lap = |h: &DMatrix<f64>| h[(0, 0)] + h[(1, 1)];
        let l = lap(&hu) - lap(&hv) / vi * ui;
        let m = &hu - &hv * (ui / vi);
        let x = nalgebra::Vector2::new(gu[0] - gv[0] / vi * ui, gu[1] - gv[1] / vi * ui);
        lhs += mesh.mass[i] * vi * l * l;
        rhs += mesh.mass[i] * (vi * m.norm_squared() + (x.transpose() * a * x)[0]);
    }
    let scale = lhs.abs().max(rhs.abs());
    let gap = if scale > 0.0 { (lhs - rhs).abs() / scale } else { 0.0 };
    Ok(BochnerGap { lhs, rhs, gap })
}

/// Random smooth ambient test function: a cubic polynomial in the
/// coordinates plus a low-frequency cosine.
pub fn random_smooth_function(d: usize, seed: u64) -> impl Fn(&Vector) -> f64 {
    let mut r = rng::rng(seed);
    let lin = rng::gaussian_vector(&mut r, d);
    let quad = DMatrix::from_fn(d, d, |_, _| rng::gaussian(&mut r) * 0.5);
    let cub = rng::gaussian_vector(&mut r, d) * 0.3;
    let w = rng::gaussian_vector(&mut r, d);
    let c0 = rng::gaussian(&mut r);
    move |x: &Vector| {
        let q = (x.transpose() * &quad * x)[0];
        let c = cub.dot(x) * x.dot(&lin).powi(2) / (1.0 + x.norm_squared());
        c0 + lin.dot(x) + q + c + (w.dot(x)).cos()
    }
}
