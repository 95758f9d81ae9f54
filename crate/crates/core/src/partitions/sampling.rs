use nalgebra::Matrix2;

use super::{check_pair, PartitionSpec};
use crate::error::{Error, Result};
use crate::geometry::{basis, Space, SpaceKind, Vector};
use crate::mobius::{lift_to_sphere, sphere_to_space};
use crate::rng;

/// Default number of sampled points per interface sphere.
pub const DEFAULT_SAMPLES: usize = 4096;

// Orthonormal basis of the orthogonal complement of `vs` in R^d.
fn complement(vs: &[Vector], d: usize) -> Vec<Vector> {
    let mut b: Vec<Vector> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for e in &b {
                let c = w.dot(e);
                w.axpy(-c, e, 1.0);
            }
        }
        let n = w.norm();
        if n > 1e-12 {
            b.push(w / n);
        }
    }
    let fixed = b.len();
    for i in 0..d {
        let mut w = basis(d, i);
        for _ in 0..2 {
            for e in &b {
                let c = w.dot(e);
                w.axpy(-c, e, 1.0);
            }
        }
        let n = w.norm();
        if n > 1e-6 {
            b.push(w / n);
        }
    }
    b.split_off(fixed)
}

fn random_in(rng: &mut rng::Rng, basis: &[Vector], d: usize) -> Vector {
    let w = rng::unit_vector(rng, basis.len());
    let mut out = Vector::zeros(d);
    for (wi, b) in w.iter().zip(basis) {
        out.axpy(*wi, b, 1.0);
    }
    out
}

// Accepts a point of the sphere as a sample of the target space.
fn to_space(space: Space, p: &Vector, max_radius: f64) -> Option<Vector> {
    let x = sphere_to_space(space.kind, &p.normalize()).ok()?;
    match space.kind {
        SpaceKind::EuclidR => (x.norm() <= max_radius).then_some(x),
        SpaceKind::HyperH => {
            let y0 = x[x.len() - 1];
            (y0 <= max_radius.cosh() && y0.is_finite()).then_some(x)
        }
        _ => Some(x),
    }
}

/// Points of the interface sphere `S_ij` (not filtered by membership). On
/// `R^n` and the Gaussian space points satisfy `|x| <= max_radius`; on `H^n`
/// their distance to the apex is at most `max_radius`. May return fewer than
/// `count` points when the sphere barely meets the allowed region.
pub fn interface_points(part: &PartitionSpec, i: usize, j: usize, count: usize, seed: u64, max_radius: f64) -> Result<Vec<Vector>> {
    check_pair(part, i, j)?;
    let space = part.space;
    let mut r = rng::substream(seed, (i * 64 + j) as u64 + 1);
    let mut out = Vec::with_capacity(count);
    if space.kind == SpaceKind::GaussG {
        let s = part.interface_sphere_raw(i, j);
        let cn = s.c.norm();
        if cn < 1e-14 {
            return Ok(out);
        }
        let x0 = &s.c * (-s.k / (cn * cn));
        let comp = complement(std::slice::from_ref(&s.c), space.n);
        let mut tries = 0;
        while out.len() < count && tries < 50 * count.max(4) {
            tries += 1;
            let mut x = x0.clone();
            for b in &comp {
                x.axpy(1.5 * rng::gaussian(&mut r), b, 1.0);
            }
            if x.norm() <= max_radius {
                out.push(x);
            }
        }
        return Ok(out);
    }
    let lifted = lift_to_sphere(part)?;
    let s = lifted.interface_sphere_raw(i, j);
    let cn = s.c.norm();
    if cn < 1e-14 {
        return Ok(out);
    }
    let chat = &s.c / cn;
    let a = -s.k / cn;
    let r2 = 1.0 - a * a;
    if r2 <= 1e-14 {
        return Ok(out);
    }
    let rad = r2.sqrt();
    let d = space.n + 1;
    let comp = complement(std::slice::from_ref(&chat), d);
    let mut tries = 0;
    while out.len() < count && tries < 50 * count.max(4) {
        tries += 1;
        let mut p = &chat * a;
        p += random_in(&mut r, &comp, d) * rad;
        if space.kind == SpaceKind::HyperH && p[d - 1] < 0.0 {
            continue;
        }
        if let Some(x) = to_space(space, &p, max_radius) {
            out.push(x);
        }
    }
    Ok(out)
}

/// True iff some sampled point of `S_ij` has cells `i` and `j` as the only
/// minimizers, with margin `1e-9` on normalized scores.
pub fn interface_nonempty(part: &PartitionSpec, i: usize, j: usize, count: usize, seed: u64) -> Result<bool> {
    let pts = interface_points(part, i, j, count, seed, 1e6)?;
    Ok(pts.iter().any(|p| part.pair_gap(i, j, p) > 1e-9))
}

/// All pairs `i < j` whose interface is detected as nonempty.
pub fn nonempty_interfaces(part: &PartitionSpec, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let q = part.q();
    let mut out = Vec::new();
    for i in 0..q {
        for j in (i + 1)..q {
            if interface_nonempty(part, i, j, count, seed).unwrap_or(false) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Points of `Sigma_ij` whose pair gap exceeds `margin`, within `max_radius`.
pub fn interface_samples(part: &PartitionSpec, i: usize, j: usize, count: usize, seed: u64, margin: f64, max_radius: f64) -> Result<Vec<Vector>> {
    let mut out = Vec::with_capacity(count);
    let mut round = 0u64;
    while out.len() < count && round < 40 {
        let pts = interface_points(part, i, j, count.max(64), seed.wrapping_add(round * 7919), max_radius)?;
        for p in pts {
            if out.len() < count && part.pair_gap(i, j, &p) > margin {
                out.push(p);
            }
        }
        round += 1;
    }
    Ok(out)
}

/// A point of the triple junction `Sigma_ijk` with its geometric data. The
/// normals are the unit normals of the three interface spheres at `p`, for
/// the cyclic pairs `(i,j)`, `(j,k)`, `(k,i)`.
#[derive(Debug, Clone)]
pub struct TriplePointSample {
    pub p: Vector,
    pub cells: [usize; 3],
    pub normals: [Vector; 3],
    pub conormals: [Vector; 3],
    pub bar_ii: [f64; 3],
    pub curvatures: [f64; 3],
}

impl TriplePointSample {
    /// Builds the geometric data at a point of the junction.
    pub fn at(part: &PartitionSpec, i: usize, j: usize, k: usize, p: Vector) -> TriplePointSample {
        let pairs = [(i, j), (j, k), (k, i)];
        let spheres: Vec<_> = pairs.iter().map(|&(a, b)| part.interface_sphere_raw(a, b)).collect();
        let normals: [Vector; 3] = std::array::from_fn(|m| spheres[m].geometric_normal(&p));
        let curvatures: [f64; 3] = std::array::from_fn(|m| spheres[m].geometric_curvature(&p));
        let s3 = 3f64.sqrt();
        // Pair m = (a, b) with third cell c: n_db = (n_ac + n_bc)/sqrt 3.
        // For (i,j): n_ik + n_jk = -n_ki + n_jk.
        let conormals = [
            (&normals[1] - &normals[2]) / s3,
            (&normals[2] - &normals[0]) / s3,
            (&normals[0] - &normals[1]) / s3,
        ];
        let bar_ii = [
            (curvatures[1] - curvatures[2]) / s3,
            (curvatures[2] - curvatures[0]) / s3,
            (curvatures[0] - curvatures[1]) / s3,
        ];
        TriplePointSample { p, cells: [i, j, k], normals, conormals, bar_ii, curvatures }
    }
}

/// Samples of the triple junction of cells `i`, `j`, `k`: solutions of the
/// two linear interface equations on the model space, filtered by three-cell
/// membership. For `n = 2` the junction is a finite set and duplicates are
/// removed.
pub fn triple_point_samples(part: &PartitionSpec, i: usize, j: usize, k: usize, count: usize, seed: u64) -> Result<Vec<TriplePointSample>> {
    triple_points(part, i, j, k, count, seed, 1e3).map(|pts| {
        pts.into_iter().map(|p| TriplePointSample::at(part, i, j, k, p)).collect()
    })
}

pub fn triple_points(part: &PartitionSpec, i: usize, j: usize, k: usize, count: usize, seed: u64, max_radius: f64) -> Result<Vec<Vector>> {
    triple_points_by(part, i, j, k, count, seed, max_radius, triple_member)
}

/// Like `triple_points`, but keeps points where further cells tie with
/// `i, j, k`; used to detect points of higher multiplicity.
pub(crate) fn triple_ties(part: &PartitionSpec, i: usize, j: usize, k: usize, count: usize, seed: u64, max_radius: f64) -> Result<Vec<Vector>> {
    triple_points_by(part, i, j, k, count, seed, max_radius, triple_tie)
}

#[allow(clippy::too_many_arguments)]
fn triple_points_by(
    part: &PartitionSpec,
    i: usize,
    j: usize,
    k: usize,
    count: usize,
    seed: u64,
    max_radius: f64,
    member: fn(&PartitionSpec, usize, usize, usize, &Vector) -> bool,
) -> Result<Vec<Vector>> {
    check_pair(part, i, j)?;
    check_pair(part, j, k)?;
    check_pair(part, i, k)?;
    let space = part.space;
    let (lin, d) = if space.kind == SpaceKind::GaussG {
        (part.clone(), space.n)
    } else {
        (lift_to_sphere(part)?, space.n + 1)
    };
    let s1 = lin.interface_sphere_raw(i, j);
    let s2 = lin.interface_sphere_raw(j, k);
    let g = Matrix2::new(s1.c.dot(&s1.c), s1.c.dot(&s2.c), s2.c.dot(&s1.c), s2.c.dot(&s2.c));
    let det = g.determinant();
    if det.abs() <= 1e-12 * g.norm().powi(2).max(1e-300) {
        return Err(Error::EmptyJunction(i, j, k));
    }
    let coef = g.try_inverse().ok_or(Error::EmptyJunction(i, j, k))? * nalgebra::Vector2::new(-s1.k, -s2.k);
    let p0 = &s1.c * coef[0] + &s2.c * coef[1];
    let comp = complement(&[s1.c.clone(), s2.c.clone()], d);
    let rad = if space.kind == SpaceKind::GaussG {
        1.5
    } else {
        let r2 = 1.0 - p0.norm_squared();
        if r2 <= 1e-14 {
            return Err(Error::EmptyJunction(i, j, k));
        }
        r2.sqrt()
    };
    let mut r = rng::substream(seed, ((i * 64 + j) * 64 + k) as u64 + 7);
    let mut out: Vec<Vector> = Vec::new();
    let attempts = 200.max(60 * count);
    let one_point = comp.is_empty();
    for _ in 0..attempts {
        if out.len() >= count {
            break;
        }
        let mut p = p0.clone();
        if !comp.is_empty() {
            if space.kind == SpaceKind::GaussG {
                for b in &comp {
                    p.axpy(rad * rng::gaussian(&mut r), b, 1.0);
                }
            } else {
                p += random_in(&mut r, &comp, d) * rad;
            }
        }
        let x = if space.kind == SpaceKind::GaussG {
            if p.norm() > max_radius {
                continue;
            }
            p
        } else {
            if space.kind == SpaceKind::HyperH && p[d - 1] <= 0.0 {
                continue;
            }
            match to_space(space, &p, max_radius) {
                Some(x) => x,
                None => continue,
            }
        };
        if !member(part, i, j, k, &x) {
            continue;
        }
        if (space.n == 2 || one_point) && out.iter().any(|q| (q - &x).norm() <= 1e-9 * (1.0 + x.norm())) {
            continue;
        }
        out.push(x);
        if one_point {
            break;
        }
    }
    Ok(out)
}

fn triple_tie(part: &PartitionSpec, i: usize, j: usize, k: usize, x: &Vector) -> bool {
    let s = part.normalized_scores(x);
    let top = s[i].max(s[j]).max(s[k]);
    let scale = 1.0 + top.abs();
    if (s[i] - s[j]).abs() > 1e-9 * scale || (s[j] - s[k]).abs() > 1e-9 * scale {
        return false;
    }
    s.iter().all(|v| *v >= top - 1e-9 * scale)
}

pub(crate) fn triple_member(part: &PartitionSpec, i: usize, j: usize, k: usize, x: &Vector) -> bool {
    let s = part.normalized_scores(x);
    let top = s[i].max(s[j]).max(s[k]);
    let scale = 1.0 + top.abs();
    if (s[i] - s[j]).abs() > 1e-9 * scale || (s[j] - s[k]).abs() > 1e-9 * scale {
        return false;
    }
    s.iter()
        .enumerate()
        .all(|(m, v)| m == i || m == j || m == k || *v > top + 1e-9 * scale)
}
