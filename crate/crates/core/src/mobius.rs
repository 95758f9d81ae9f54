//! Stereographic projections, parameter transforms between the sphere, the
//! Euclidean space and the hyperboloid, and Möbius automorphisms of the sphere
//! acting on partitions.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Space, SpaceKind, Vector};
use crate::partitions::{cell_of, CellParams, PartitionSpec};
use crate::rng;

/// `pi_R(x) = (2x, |x|^2 - 1) / (|x|^2 + 1)`.
pub fn stereo_r(x: &Vector) -> Vector {
    let n = x.len();
    let r2 = x.norm_squared();
    let mut p = Vector::zeros(n + 1);
    for i in 0..n {
        p[i] = 2.0 * x[i] / (r2 + 1.0);
    }
    p[n] = (r2 - 1.0) / (r2 + 1.0);
    p
}

pub fn stereo_r_inv(p: &Vector) -> Result<Vector> {
    let n = p.len() - 1;
    let d = 1.0 - p[n];
    if d.abs() <= 1e-12 {
        return Err(Error::NorthPole);
    }
    Ok(p.rows(0, n) / d)
}

/// `pi_H(y) = (ybar, 1) / y_0`, onto the open northern hemisphere.
pub fn stereo_h(y: &Vector) -> Vector {
    let n = y.len() - 1;
    let y0 = y[n];
    let mut p = y / y0;
    p[n] = 1.0 / y0;
    p
}

pub fn stereo_h_inv(p: &Vector) -> Result<Vector> {
    let n = p.len() - 1;
    let p0 = p[n];
    if p0 <= 1e-12 {
        return Err(Error::BelowEquator);
    }
    let mut y = p / p0;
    y[n] = 1.0 / p0;
    Ok(y)
}

/// `c^H = (cbar^S, -k^S)`, `k^H = -c_0^S`.
pub fn params_h_from_s(c: &Vector, k: f64) -> (Vector, f64) {
    let n = c.len() - 1;
    let mut ch = c.clone();
    ch[n] = -k;
    (ch, -c[n])
}

/// `c^S = (cbar^H, -k^H)`, `k^S = -c_0^H`.
pub fn params_s_from_h(c: &Vector, k: f64) -> (Vector, f64) {
    let n = c.len() - 1;
    let mut cs = c.clone();
    cs[n] = -k;
    (cs, -c[n])
}

/// `c^R = cbar^S`, `k^R = k^S + c_0^S`; the sphere curvature is kept.
pub fn params_r_from_s(c: &Vector, k: f64) -> (Vector, f64, f64) {
    let n = c.len() - 1;
    (c.rows(0, n).into_owned(), k + c[n], k)
}

pub fn params_s_from_r(c: &Vector, k: f64, k_s: f64) -> (Vector, f64) {
    let n = c.len();
    let mut cs = Vector::zeros(n + 1);
    cs.rows_mut(0, n).copy_from(c);
    cs[n] = k - k_s;
    (cs, k_s)
}

/// The partition of the sphere whose restriction (through the relevant
/// stereographic projection) is `part`. Scores agree up to the positive
/// factor `PartitionSpec::score_scale`. Gaussian partitions have no lift.
pub fn lift_to_sphere(part: &PartitionSpec) -> Result<PartitionSpec> {
    let n = part.space.n;
    let cells = match part.space.kind {
        SpaceKind::SphereS => return Ok(part.clone()),
        SpaceKind::EuclidR => part
            .cells
            .iter()
            .map(|c| {
                let (cs, ks) = params_s_from_r(&c.c, c.k, c.k_s.unwrap_or(0.0));
                CellParams::new(cs, ks)
            })
            .collect(),
        SpaceKind::HyperH => part
            .cells
            .iter()
            .map(|c| {
                let (cs, ks) = params_s_from_h(&c.c, c.k);
                CellParams::new(cs, ks)
            })
            .collect(),
        SpaceKind::GaussG => return Err(Error::Unsupported("Gaussian partitions have no spherical lift".into())),
    };
    Ok(PartitionSpec { space: Space::sphere(n), cells })
}

/// Maps a point of the sphere to the space of `part`, if it has a preimage.
pub fn sphere_to_space(kind: SpaceKind, p: &Vector) -> Result<Vector> {
    match kind {
        SpaceKind::SphereS => Ok(p.clone()),
        SpaceKind::EuclidR => stereo_r_inv(p),
        SpaceKind::HyperH => stereo_h_inv(p),
        SpaceKind::GaussG => Err(Error::Unsupported("no projection to the Gaussian space".into())),
    }
}

pub fn space_to_sphere(kind: SpaceKind, x: &Vector) -> Result<Vector> {
    match kind {
        SpaceKind::SphereS => Ok(x.clone()),
        SpaceKind::EuclidR => Ok(stereo_r(x)),
        SpaceKind::HyperH => Ok(stereo_h(x)),
        SpaceKind::GaussG => Err(Error::Unsupported("no projection from the Gaussian space".into())),
    }
}

/// Result of pulling a spherical partition back to `R^n` or `H^n`. `index`
/// lists, for every retained cell, its index in the spherical partition.
#[derive(Debug, Clone)]
pub struct Pullback {
    pub partition: PartitionSpec,
    pub index: Vec<usize>,
}

/// Pull-back of a spherical partition to the Euclidean space (all cells) or
/// to the hyperboloid (cells meeting the open northern hemisphere, decided
/// by seeded sampling with `samples` points).
pub fn pullback_partition(part_s: &PartitionSpec, target: SpaceKind, samples: usize, seed: u64) -> Result<Pullback> {
    if part_s.space.kind != SpaceKind::SphereS {
        return Err(Error::Contract("pull-back expects a spherical partition".into()));
    }
    part_s.validate()?;
    let n = part_s.space.n;
    match target {
        SpaceKind::EuclidR => {
            let cells = part_s
                .cells
                .iter()
                .map(|c| {
                    let (cr, kr, ks) = params_r_from_s(&c.c, c.k);
                    CellParams::euclid(cr, kr, ks)
                })
                .collect();
            Ok(Pullback {
                partition: PartitionSpec::new(Space::euclid(n), cells)?,
                index: (0..part_s.q()).collect(),
            })
        }
        SpaceKind::HyperH => {
            let index = cells_meeting_north(part_s, samples, seed);
            if index.is_empty() {
                return Err(Error::EmptyRetainedSet);
            }
            let cells: Vec<CellParams> = index
                .iter()
                .map(|&i| {
                    let (ch, kh) = params_h_from_s(&part_s.cells[i].c, part_s.cells[i].k);
                    CellParams::new(ch, kh)
                })
                .collect();
            if cells.len() < 2 {
                return Err(Error::MalformedPartition("only one cell meets the northern hemisphere".into()));
            }
            Ok(Pullback { partition: PartitionSpec::new(Space::hyper(n), cells)?, index })
        }
        _ => Err(Error::Contract("pull-back target must be R or H".into())),
    }
}

fn cells_meeting_north(part: &PartitionSpec, samples: usize, seed: u64) -> Vec<usize> {
    let d = part.space.ambient_dim();
    let q = part.q();
    let mut hit = vec![false; q];
    let consider = |p: &Vector, hit: &mut Vec<bool>| {
        if p[d - 1] > 1e-9 {
            let s = part.normalized_scores(p);
            if let Some(i) = crate::partitions::argmin_strict(&s, 1e-9) {
                hit[i] = true;
            }
        }
    };
    // Each cell's own deepest point, then its images pushed north.
    for cell in &part.cells {
        let nc = cell.c.norm();
        if nc > 0.0 {
            let p = -&cell.c / nc;
            consider(&p, &mut hit);
        }
    }
    let mut r = rng::rng(seed);
    for _ in 0..samples {
        let mut p = rng::unit_vector(&mut r, d);
        p[d - 1] = p[d - 1].abs();
        consider(&p, &mut hit);
    }
    (0..q).filter(|&i| hit[i]).collect()
}

/// Push-forward of a cluster in `H^n` (last cell unbounded, every interface
/// with it of curvature above 1 in absolute value) to the sphere. The last
/// spherical cell must contain the closed southern hemisphere.
pub fn pushforward_cluster_h_to_s(part_h: &PartitionSpec, samples: usize, seed: u64) -> Result<PartitionSpec> {
    if part_h.space.kind != SpaceKind::HyperH {
        return Err(Error::Contract("push-forward expects a hyperbolic partition".into()));
    }
    part_h.validate()?;
    let q = part_h.q();
    let ext = q - 1;
    let nonempty = crate::partitions::nonempty_interfaces(part_h, crate::partitions::DEFAULT_SAMPLES, seed);
    for &(i, j) in &nonempty {
        if i == ext || j == ext {
            let s = part_h.interface_sphere_raw(i, j);
            if s.k.abs() <= 1.0 {
                return Err(Error::NotCluster(format!(
                    "interface ({i},{j}) with the exterior cell has |k| = {} <= 1",
                    s.k.abs()
                )));
            }
        }
    }
    let lifted = lift_to_sphere(part_h)?;
    let d = lifted.space.ambient_dim();
    let mut r = rng::rng(seed ^ 0x5157);
    for t in 0..samples {
        let mut p = rng::unit_vector(&mut r, d);
        p[d - 1] = if t % 8 == 0 { 0.0 } else { -p[d - 1].abs() };
        let p = p.normalize();
        let s = lifted.normalized_scores(&p);
        let m = s[..ext].iter().cloned().fold(f64::INFINITY, f64::min);
        if m <= s[ext] {
            return Err(Error::NotCluster("exterior cell does not contain the southern hemisphere".into()));
        }
    }
    Ok(lifted)
}

/// Primitive Möbius moves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MobiusMove {
    /// Orthogonal matrix acting on the ambient space of the sphere, rows first.
    Rotate(Vec<Vec<f64>>),
    /// `pi_R o (x -> s x + t) o pi_R^{-1}`, extended by continuity at the pole.
    StereoAffine { t: Vec<f64>, s: f64 },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MobiusMap {
    pub moves: Vec<MobiusMove>,
}

fn rotation_matrix(rows: &[Vec<f64>], d: usize) -> Result<DMatrix<f64>> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: rows.len() });
    }
    let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
    let err = (m.transpose() * &m - DMatrix::identity(d, d)).abs().max();
    if !(err <= 1e-12) {
        return Err(Error::Contract(format!("rotation is not orthogonal (error {err:e})")));
    }
    Ok(m)
}

impl MobiusMap {
    pub fn identity() -> Self {
        MobiusMap { moves: Vec::new() }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        for mv in &self.moves {
            match mv {
                MobiusMove::Rotate(rows) => {
                    rotation_matrix(rows, n + 1)?;
                }
                MobiusMove::StereoAffine { t, s } => {
                    if t.len() != n {
                        return Err(Error::DimensionMismatch { expected: n, got: t.len() });
                    }
                    if !(*s > 0.0) || !s.is_finite() || t.iter().any(|v| !v.is_finite()) {
                        return Err(Error::Contract("stereo-affine move needs finite t and s > 0".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Image of a point of the sphere.
    pub fn apply_point(&self, p: &Vector) -> Result<Vector> {
        let n = p.len() - 1;
        self.validate(n)?;
        let mut x = p.clone();
        for mv in &self.moves {
            x = match mv {
                MobiusMove::Rotate(rows) => rotation_matrix(rows, n + 1)? * x,
                MobiusMove::StereoAffine { t, s } => {
                    if (1.0 - x[n]).abs() <= 1e-15 {
                        x
                    } else {
                        let e = stereo_r_inv(&x)?;
                        stereo_r(&(e * *s + Vector::from_column_slice(t)))
                    }
                }
            };
        }
        Ok(x)
    }

    /// A random map with rotations and moderate stereo-affine moves.
    pub fn random(n: usize, moves: usize, seed: u64) -> MobiusMap {
        let mut r = rng::rng(seed);
        let mut out = Vec::new();
        for m in 0..moves {
            if m % 2 == 0 {
                out.push(MobiusMove::Rotate(random_orthogonal(&mut r, n + 1)));
            } else {
                let t: Vec<f64> = (0..n).map(|_| rng::uniform(&mut r, -0.4, 0.4)).collect();
                let s = rng::uniform(&mut r, 0.6, 1.6);
                out.push(MobiusMove::StereoAffine { t, s });
            }
        }
        MobiusMap { moves: out }
    }
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix).
pub fn random_orthogonal(r: &mut rng::Rng, d: usize) -> Vec<Vec<f64>> {
    let g = DMatrix::from_fn(d, d, |_, _| rng::gaussian(r));
    let qr = g.qr();
    let mut q = qr.q();
    let rr = qr.r();
    for j in 0..d {
        if rr[(j, j)] < 0.0 {
            for i in 0..d {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    (0..d).map(|i| (0..d).map(|j| q[(i, j)]).collect()).collect()
}

/// Transports a spherical partition by a Möbius map. Rotations act on the
/// quasi-centers; a stereo-affine move acts on the coefficient triple
/// `(A, B, C) = (k^R, c^R, 2k^S - k^R)` of the Euclidean score
/// `A|x|^2 + 2<B,x> + C` by substitution, followed by division by `s`, which
/// restores the consistency relation exactly.
pub fn mobius_apply(map: &MobiusMap, part_s: &PartitionSpec) -> Result<PartitionSpec> {
    if part_s.space.kind != SpaceKind::SphereS {
        return Err(Error::Contract("Möbius maps act on spherical partitions".into()));
    }
    let n = part_s.space.n;
    map.validate(n)?;
    let mut cells = part_s.cells.clone();
    for mv in &map.moves {
        match mv {
            MobiusMove::Rotate(rows) => {
                let m = rotation_matrix(rows, n + 1)?;
                for c in cells.iter_mut() {
                    c.c = &m * &c.c;
                }
            }
            MobiusMove::StereoAffine { t, s } => {
                let t = Vector::from_column_slice(t);
                let s = *s;
                for c in cells.iter_mut() {
                    let (b, a, ks) = params_r_from_s(&c.c, c.k);
                    let cc = 2.0 * ks - a;
                    let a2 = a;
                    let b2 = &b * s - &t * a;
                    let c2 = a * t.norm_squared() - 2.0 * s * b.dot(&t) + s * s * cc;
                    let (a2, b2, c2) = (a2 / s, b2 / s, c2 / s);
                    let k_new = 0.5 * (a2 + c2);
                    let (cs, ks_new) = params_s_from_r(&b2, a2, k_new);
                    c.c = cs;
                    c.k = ks_new;
                }
            }
        }
    }
    let out = PartitionSpec { space: part_s.space, cells };
    for i in 0..out.q() {
        for j in 0..i {
            let before = part_s.interface_sphere_raw(i, j).consistency_defect();
            let after = out.interface_sphere_raw(i, j).consistency_defect();
            if before.abs() <= 1e-10 && after.abs() > 1e-8 {
                return Err(Error::Degenerate(format!(
                    "transported interface ({i},{j}) has consistency defect {after:e}"
                )));
            }
        }
    }
    out.validate()?;
    Ok(out)
}

/// Membership commutation test helper: the fraction of sampled points whose
/// cell (relabeled) differs after mapping, ignoring points with normalized
/// score gap below `gap`.
pub fn commutation_mismatches(map: &MobiusMap, before: &PartitionSpec, after: &PartitionSpec, samples: usize, gap: f64, seed: u64) -> Result<usize> {
    let d = before.space.ambient_dim();
    let mut r = rng::rng(seed);
    let mut bad = 0;
    for _ in 0..samples {
        let p = rng::unit_vector(&mut r, d);
        let s = before.normalized_scores(&p);
        let mut sorted = s.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted[1] - sorted[0] < gap {
            continue;
        }
        let a = cell_of(before, &p)?;
        let b = cell_of(after, &map.apply_point(&p)?)?;
        if a != b {
            bad += 1;
        }
    }
    Ok(bad)
}
