//! Generators of standard partitions, their Möbius images and pull-backs.

use crate::error::{Error, Result};
use crate::geometry::{SpaceKind, Vector};
use crate::mobius::{mobius_apply, pullback_partition, MobiusMap, MobiusMove};
use crate::partitions::{standard_flat_partition, PartitionSpec, DEFAULT_SAMPLES};
use crate::rng;

/// Möbius image of the standard flat `q`-partition of `S^n` under a random map.
pub fn random_standard_sphere(n: usize, q: usize, seed: u64) -> Result<PartitionSpec> {
    let base = standard_flat_partition(n, q)?;
    mobius_apply(&MobiusMap::random(n, 4, seed), &base)
}

/// A standard partition of `kind` (`S`, `R` or `H`): the pull-back of a random
/// Möbius image of the standard flat partition. On `H^n` only cells meeting
/// the northern hemisphere survive; maps are redrawn until at least two do.
pub fn random_standard(kind: SpaceKind, n: usize, q: usize, seed: u64) -> Result<PartitionSpec> {
    match kind {
        SpaceKind::SphereS => random_standard_sphere(n, q, seed),
        SpaceKind::EuclidR => {
            let s = random_standard_sphere(n, q, seed)?;
            Ok(pullback_partition(&s, kind, DEFAULT_SAMPLES, seed)?.partition)
        }
        SpaceKind::HyperH => {
            let mut last = None;
            for attempt in 0..16u64 {
                let s = random_standard_sphere(n, q, seed.wrapping_add(attempt * 1_000_003))?;
                match pullback_partition(&s, kind, DEFAULT_SAMPLES, seed) {
                    Ok(pb) => return Ok(pb.partition),
                    Err(e) => last = Some(e),
                }
            }
            Err(last.unwrap_or(Error::EmptyRetainedSet))
        }
        SpaceKind::GaussG => Err(Error::Unsupported("no Möbius images on the Gaussian space".into())),
    }
}

/// Rotation of `R^d` taking the unit vector `u` to the last axis.
pub fn rotation_to_pole(u: &Vector) -> Vec<Vec<f64>> {
    let d = u.len();
    let e = crate::geometry::basis(d, d - 1);
    let u = u.normalize();
    let w = &e - &u * u.dot(&e);
    let mut m = nalgebra::DMatrix::<f64>::identity(d, d);
    if w.norm() > 1e-12 {
        // Rotation in the plane spanned by u and w.
        let w = w.normalize();
        let (cs, sn) = (u.dot(&e), (1.0 - u.dot(&e).powi(2)).max(0.0).sqrt());
        let uu = &u * u.transpose();
        let ww = &w * w.transpose();
        let wu = &w * u.transpose() - &u * w.transpose();
        m += (&uu + &ww) * (cs - 1.0) + wu * sn;
    } else if u.dot(&e) < 0.0 {
        m[(0, 0)] = -1.0;
        m[(d - 1, d - 1)] = -1.0;
    }
    (0..d).map(|i| (0..d).map(|j| m[(i, j)]).collect()).collect()
}

/// A spherical Voronoi `(q-1)`-cluster in `H^n`, Möbius-flat by construction:
/// the standard partition with all cells but the last one squeezed into a
/// small region around the north pole, pulled back to `H^n`. The last cell is
/// the unbounded one.
pub fn random_hyper_cluster(n: usize, q: usize, seed: u64) -> Result<PartitionSpec> {
    let d = n + 1;
    let base = standard_flat_partition(n, q)?;
    let mut r = rng::rng(seed ^ 0xc1u64);
    // The last cell surrounds -c_{q-1}; move that point to the north pole.
    let to_pole = rotation_to_pole(&(-&base.cells[q - 1].c));
    let spin = {
        // Random rotation fixing the pole.
        let g = crate::mobius::random_orthogonal(&mut r, n);
        let mut m = vec![vec![0.0; d]; d];
        for i in 0..n {
            m[i][..n].copy_from_slice(&g[i]);
        }
        m[n][n] = 1.0;
        m
    };
    let s = rng::uniform(&mut r, 0.08, 0.3);
    let t: Vec<f64> = (0..n).map(|_| rng::uniform(&mut r, -0.2, 0.2) * s).collect();
    let map = MobiusMap {
        moves: vec![
            MobiusMove::Rotate(to_pole),
            MobiusMove::Rotate(spin),
            MobiusMove::StereoAffine { t, s },
            MobiusMove::Rotate(flip_poles(d)),
        ],
    };
    let image = mobius_apply(&map, &base)?;
    let pb = pullback_partition(&image, SpaceKind::HyperH, DEFAULT_SAMPLES, seed)?;
    if pb.index.len() != q {
        return Err(Error::Degenerate("cluster construction lost a cell".into()));
    }
    Ok(pb.partition)
}

fn flip_poles(d: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; d]; d];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m[0][0] = -1.0;
    m[d - 1][d - 1] = -1.0;
    m
}

/// The partition of `H^n` by totally geodesic hyperplanes through the apex,
/// pulled back from the standard flat partition (`q <= n + 1`).
pub fn hyper_apex_partition(n: usize, q: usize) -> Result<PartitionSpec> {
    if q > n + 1 {
        return Err(Error::Contract("apex partitions need q <= n + 1".into()));
    }
    let base = standard_flat_partition(n, q)?;
    Ok(pullback_partition(&base, SpaceKind::HyperH, DEFAULT_SAMPLES, 0)?.partition)
}
