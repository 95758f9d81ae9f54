//! Spherical Voronoi partitions: cells are argmin regions of per-cell scores
//! whose pairwise differences define the interfaces.

mod sampling;
mod standard;
mod volumes;

pub use sampling::{
    interface_nonempty, interface_points, interface_samples, nonempty_interfaces, triple_point_samples, triple_points,
    TriplePointSample, DEFAULT_SAMPLES,
};
pub(crate) use sampling::triple_ties;
pub use standard::{
    equidistant_points, gauss_hex_patch, gauss_parallel_lines, gauss_y_partition, standard_flat_gauss,
    standard_flat_partition,
};
pub use volumes::{estimate_volumes, VolumeEstimate, DEFAULT_TRUNCATION};

pub use crate::geometry::GeneralizedSphere;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{on_space_residual, Space, SpaceKind, Vector};

/// Tie tolerance of `cell_of` on normalized scores.
pub const TIE_TOL: f64 = 1e-12;
/// Consistency tolerance for interfaces returned by `interface_sphere`.
pub const CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    #[serde(with = "vec_serde")]
    pub c: Vector,
    pub k: f64,
    #[serde(rename = "kS", default, skip_serializing_if = "Option::is_none")]
    pub k_s: Option<f64>,
}

impl CellParams {
    pub fn new(c: Vector, k: f64) -> Self {
        CellParams { c, k, k_s: None }
    }
    pub fn euclid(c: Vector, k: f64, k_s: f64) -> Self {
        CellParams { c, k, k_s: Some(k_s) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub space: Space,
    pub cells: Vec<CellParams>,
}

pub mod vec_serde {
    use super::Vector;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector, D::Error> {
        let xs = Vec::<f64>::deserialize(d)?;
        Ok(Vector::from_vec(xs))
    }
}

impl PartitionSpec {
    /// Builds and validates a partition.
    pub fn new(space: Space, cells: Vec<CellParams>) -> Result<Self> {
        let p = PartitionSpec { space, cells };
        p.validate()?;
        Ok(p)
    }

    pub fn q(&self) -> usize {
        self.cells.len()
    }

    /// Structural validation: cell count, lengths, finiteness, presence of
    /// the Euclidean companion curvature, pairwise distinct parameters.
    pub fn validate(&self) -> Result<()> {
        Space::new(self.space.kind, self.space.n)?;
        let q = self.cells.len();
        if !(2..=64).contains(&q) {
            return Err(Error::MalformedPartition(format!("cell count {q} not in [2, 64]")));
        }
        let d = self.space.ambient_dim();
        for (i, cell) in self.cells.iter().enumerate() {
            if cell.c.len() != d {
                return Err(Error::MalformedPartition(format!(
                    "cell {i}: c has length {}, expected {d}",
                    cell.c.len()
                )));
            }
            if cell.c.iter().any(|v| !v.is_finite()) || !cell.k.is_finite() {
                return Err(Error::MalformedPartition(format!("cell {i}: non-finite parameter")));
            }
            match (self.space.kind, cell.k_s) {
                (SpaceKind::EuclidR, None) => {
                    return Err(Error::MalformedPartition(format!("cell {i}: missing kS")))
                }
                (SpaceKind::EuclidR, Some(v)) if !v.is_finite() => {
                    return Err(Error::MalformedPartition(format!("cell {i}: non-finite kS")))
                }
                (SpaceKind::EuclidR, Some(_)) => {}
                (_, Some(_)) => {
                    return Err(Error::MalformedPartition(format!("cell {i}: kS only allowed on R^n")))
                }
                _ => {}
            }
        }
        for i in 0..q {
            for j in 0..i {
                if self.cells[i] == self.cells[j] {
                    return Err(Error::MalformedPartition(format!("cells {j} and {i} coincide")));
                }
            }
        }
        Ok(())
    }

    /// Raw score of cell `j` at `p`; the cell is the argmin of these.
    pub fn score(&self, j: usize, p: &Vector) -> f64 {
        let cell = &self.cells[j];
        match self.space.kind {
            SpaceKind::SphereS | SpaceKind::GaussG => cell.c.dot(p) + cell.k,
            SpaceKind::HyperH => self.space.inner(&cell.c, p) - cell.k,
            SpaceKind::EuclidR => {
                cell.k * p.norm_squared() + 2.0 * cell.c.dot(p) + 2.0 * cell.k_s.unwrap_or(0.0) - cell.k
            }
        }
    }

    /// Positive factor relating raw scores to the scores of the lifted
    /// partition on the sphere.
    pub fn score_scale(&self, p: &Vector) -> f64 {
        match self.space.kind {
            SpaceKind::EuclidR => p.norm_squared() + 1.0,
            SpaceKind::HyperH => p[p.len() - 1],
            _ => 1.0,
        }
    }

    /// Scores divided by `score_scale`, comparable across the whole space.
    pub fn normalized_scores(&self, p: &Vector) -> Vec<f64> {
        let s = self.score_scale(p);
        (0..self.q()).map(|j| self.score(j, p) / s).collect()
    }

    /// Smallest normalized score of a cell other than `i` and `j`, minus the
    /// larger of the scores of `i` and `j`. Positive when `p` lies in the
    /// closure of both cells and strictly away from every other cell.
    pub fn pair_gap(&self, i: usize, j: usize, p: &Vector) -> f64 {
        let s = self.normalized_scores(p);
        let own = s[i].max(s[j]);
        s.iter()
            .enumerate()
            .filter(|(m, _)| *m != i && *m != j)
            .map(|(_, v)| v - own)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check_point(&self, p: &Vector) -> Result<()> {
        self.space.check_len(p)?;
        let r = on_space_residual(self.space, p);
        if r > 1e-8 {
            return Err(Error::OffSpace(r));
        }
        Ok(())
    }

    /// Interface data without the consistency check.
    pub fn interface_sphere_raw(&self, i: usize, j: usize) -> GeneralizedSphere {
        let (a, b) = (&self.cells[i], &self.cells[j]);
        GeneralizedSphere {
            space: self.space,
            c: &a.c - &b.c,
            k: a.k - b.k,
            k_s: match (a.k_s, b.k_s) {
                (Some(x), Some(y)) => Some(x - y),
                _ => None,
            },
        }
    }
}

/// Index of the cell containing `p`, or `None` on an interface (two
/// normalized scores within `TIE_TOL` of the minimum).
pub fn cell_of(part: &PartitionSpec, p: &Vector) -> Result<Option<usize>> {
    part.check_point(p)?;
    Ok(argmin_strict(&part.normalized_scores(p), TIE_TOL))
}

pub(crate) fn argmin_strict(s: &[f64], tol: f64) -> Option<usize> {
    let mut best = 0;
    for (j, v) in s.iter().enumerate() {
        if *v < s[best] {
            best = j;
        }
    }
    let scale = 1.0 + s[best].abs();
    let tie = s
        .iter()
        .enumerate()
        .any(|(j, v)| j != best && (v - s[best]).abs() <= tol * scale);
    if tie {
        None
    } else {
        Some(best)
    }
}

/// Generalized sphere carrying `Sigma_ij`, with `c = c_i - c_j`,
/// `k = k_i - k_j`. Fails if the consistency relation is violated.
pub fn interface_sphere(part: &PartitionSpec, i: usize, j: usize) -> Result<GeneralizedSphere> {
    check_pair(part, i, j)?;
    let s = part.interface_sphere_raw(i, j);
    let defect = s.consistency_defect();
    if defect.abs() > CONSISTENCY_TOL {
        return Err(Error::MalformedPartition(format!(
            "interface ({i},{j}) violates the consistency relation by {defect:e}"
        )));
    }
    Ok(s)
}

pub(crate) fn check_pair(part: &PartitionSpec, i: usize, j: usize) -> Result<()> {
    let q = part.q();
    if i >= q || j >= q {
        return Err(Error::OutOfRange(format!("cell index out of range (q = {q})")));
    }
    if i == j {
        return Err(Error::Contract("interface needs two distinct cells".into()));
    }
    Ok(())
}

fn check_on_interface(part: &PartitionSpec, s: &GeneralizedSphere, p: &Vector) -> Result<()> {
    part.check_point(p)?;
    let r = s.residual(p) / part.score_scale(p).abs().max(1.0);
    if r > 1e-8 {
        return Err(Error::OffSphere(r));
    }
    Ok(())
}

/// Normal `n_ij = c_ij + k_ij p` pointing from cell `i` into cell `j`
/// (`c_ij` on the Gaussian space).
pub fn normal_at(part: &PartitionSpec, i: usize, j: usize, p: &Vector) -> Result<Vector> {
    check_pair(part, i, j)?;
    let s = part.interface_sphere_raw(i, j);
    check_on_interface(part, &s, p)?;
    Ok(s.raw_normal(p))
}

/// Weighted mean curvature of `Sigma_ij` at `p` with respect to `n_ij`:
/// `(n-1) k_ij`, or `-<x, n_ij>` for Gaussian hyperplanes.
pub fn weighted_mean_curvature(part: &PartitionSpec, i: usize, j: usize, p: &Vector) -> Result<f64> {
    check_pair(part, i, j)?;
    let s = part.interface_sphere_raw(i, j);
    check_on_interface(part, &s, p)?;
    Ok(mean_curvature_of(&s, p))
}

/// Mean curvature of the zero set of `s` at `p`, independent of the
/// normalization of its parameters.
pub fn mean_curvature_of(s: &GeneralizedSphere, p: &Vector) -> f64 {
    let n = s.space.n as f64;
    match s.space.kind {
        SpaceKind::GaussG => -p.dot(&s.geometric_normal(p)),
        _ => (n - 1.0) * s.geometric_curvature(p),
    }
}

#[cfg(test)]
mod tests;
