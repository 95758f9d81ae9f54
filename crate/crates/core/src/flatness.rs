//! Möbius-flatness certificates and the hypo/epi dichotomy on `H^n`.
//!
//! A partition is certified by `xi` in the open unit ball of `R^{n+1}` with
//! `<c_ij, xi> + k_ij = 0` for every nonempty interface, where `(c_ij, k_ij)`
//! are the parameters of the lifted spherical partition.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::linalg::min_norm_solve;
use crate::geometry::{SpaceKind, Vector};
use crate::mobius::lift_to_sphere;
use crate::partitions::{nonempty_interfaces, vec_serde, PartitionSpec, DEFAULT_SAMPLES};

pub const FEASIBILITY_TOL: f64 = 1e-9;
pub const BALL_MARGIN: f64 = 1e-9;
/// Residuals in `(FEASIBILITY_TOL, WARNING_TOL]` are reported as nearly feasible.
pub const WARNING_TOL: f64 = 1e-6;
const RANK_TOL: f64 = 1e-10;
const INTERFACE_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessCertificate {
    #[serde(with = "vec_serde")]
    pub xi: Vector,
    pub residual: f64,
    pub feasible: bool,
    #[serde(rename = "dim")]
    pub solution_space_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlatnessStatus {
    Feasible,
    /// Residual small but above the feasibility tolerance.
    NearlyFeasible,
    /// The linear system is solvable but only outside the unit ball.
    OutsideBall,
    Infeasible,
}

impl FlatnessCertificate {
    pub fn status(&self) -> FlatnessStatus {
        if self.feasible {
            FlatnessStatus::Feasible
        } else if self.residual <= FEASIBILITY_TOL {
            FlatnessStatus::OutsideBall
        } else if self.residual <= WARNING_TOL {
            FlatnessStatus::NearlyFeasible
        } else {
            FlatnessStatus::Infeasible
        }
    }
}

/// The flatness constraints of a partition in lifted spherical form.
#[derive(Debug, Clone)]
pub struct FlatnessSystem {
    /// Ambient dimension `n + 1`.
    pub dim: usize,
    /// Nonempty interfaces `(i, j)`, `i < j`.
    pub interfaces: Vec<(usize, usize)>,
    /// One row `c_i - c_root` per non-root cell of every connected component
    /// of the interface graph.
    pub a: DMatrix<f64>,
    pub b: Vector,
    lifted: PartitionSpec,
}

impl FlatnessSystem {
    pub fn new(part: &PartitionSpec) -> Result<Self> {
        part.validate()?;
        let interfaces = nonempty_interfaces(part, DEFAULT_SAMPLES, INTERFACE_SEED);
        Self::with_interfaces(part, interfaces)
    }

    pub fn with_interfaces(part: &PartitionSpec, interfaces: Vec<(usize, usize)>) -> Result<Self> {
        part.validate()?;
        if part.space.kind == SpaceKind::GaussG {
            return Err(Error::Unsupported("Gaussian partitions are certified by V = 1".into()));
        }
        let lifted = lift_to_sphere(part)?;
        let q = part.q();
        let dim = part.space.n + 1;
        // Union-find over the interface graph; the smallest index is the root.
        let mut parent: Vec<usize> = (0..q).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            let mut i = i;
            while p[i] != r {
                let next = p[i];
                p[i] = r;
                i = next;
            }
            r
        }
        for &(i, j) in &interfaces {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for i in 0..q {
            let r = find(&mut parent, i);
            if r == i {
                continue;
            }
            let (ci, cr) = (&lifted.cells[i], &lifted.cells[r]);
            rows.push(&ci.c - &cr.c);
            rhs.push(-(ci.k - cr.k));
        }
        let a = if rows.is_empty() {
            DMatrix::zeros(0, dim)
        } else {
            DMatrix::from_fn(rows.len(), dim, |r, c| rows[r][c])
        };
        Ok(FlatnessSystem { dim, interfaces, a, b: Vector::from_vec(rhs), lifted })
    }

    /// Largest violation of `<c_ij, xi> + k_ij = 0` over all nonempty interfaces.
    pub fn residual(&self, xi: &Vector) -> f64 {
        self.interfaces
            .iter()
            .map(|&(i, j)| {
                let s = self.lifted.interface_sphere_raw(i, j);
                (s.c.dot(xi) + s.k).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Minimum-norm solution, residual and an orthonormal null-space basis.
    pub fn solve(&self) -> (Vector, f64, DMatrix<f64>) {
        if self.a.nrows() == 0 {
            return (Vector::zeros(self.dim), 0.0, DMatrix::identity(self.dim, self.dim));
        }
        let ls = min_norm_solve(&self.a, &self.b, RANK_TOL);
        let res = self.residual(&ls.x);
        (ls.x, res, ls.nullspace)
    }
}

/// Solves the flatness system. The minimum-norm solution is the point of the
/// affine solution space closest to the origin, so no other candidate can
/// lie inside the unit ball when it does not.
pub fn solve_flatness(part: &PartitionSpec) -> Result<FlatnessCertificate> {
    if part.space.kind == SpaceKind::GaussG {
        part.validate()?;
        return Ok(FlatnessCertificate {
            xi: Vector::zeros(part.space.n + 1),
            residual: 0.0,
            feasible: true,
            solution_space_dim: 0,
        });
    }
    let sys = FlatnessSystem::new(part)?;
    Ok(certificate_of(&sys))
}

pub fn certificate_of(sys: &FlatnessSystem) -> FlatnessCertificate {
    let (xi, residual, null) = sys.solve();
    let feasible = residual <= FEASIBILITY_TOL && xi.norm() < 1.0 - BALL_MARGIN;
    FlatnessCertificate { xi, residual, feasible, solution_space_dim: null.ncols() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Hypo,
    Epi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypoEpi {
    pub classification: Classification,
    /// Certificate with `xi_0 <= 0` when hypo.
    #[serde(with = "opt_vec_serde", skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Vector>,
    /// Infimum of `xi_0` over certificates in the open unit ball.
    #[serde(rename = "minXi0")]
    pub min_xi0: f64,
}

mod opt_vec_serde {
    use super::Vector;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vector>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.collect_seq(v.iter()),
            None => s.serialize_none(),
        }
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vector>, D::Error> {
        Ok(Option::<Vec<f64>>::deserialize(d)?.map(Vector::from_vec))
    }
}

/// Searches the certificates of a partition of `H^n` for one with `xi_0 <= 0`.
///
/// Writing certificates as `x + N z` with `x` the minimum-norm solution and
/// `N` an orthonormal null-space basis, `xi_0 = x_0 + <g, z>` with `g = N^T e_0`
/// and `|xi|^2 = |x|^2 + |z|^2`. The witness is the certificate of least norm
/// with `xi_0 <= 0`.
pub fn classify_hypo_epi(part_h: &PartitionSpec) -> Result<HypoEpi> {
    if part_h.space.kind != SpaceKind::HyperH {
        return Err(Error::Contract("hypo/epi classification applies to H^n".into()));
    }
    let sys = FlatnessSystem::new(part_h)?;
    classify_system(&sys)
}

pub fn classify_system(sys: &FlatnessSystem) -> Result<HypoEpi> {
    let (x, residual, null) = sys.solve();
    let limit = 1.0 - BALL_MARGIN;
    if residual > FEASIBILITY_TOL || x.norm() >= limit {
        return Err(Error::Infeasible { residual, norm: x.norm() });
    }
    let t = sys.dim - 1;
    let g: Vector = null.row(t).transpose();
    let gn = g.norm();
    let room = (limit * limit - x.norm_squared()).max(0.0).sqrt();
    let min_xi0 = x[t] - gn * room;
    let witness = if x[t] <= 0.0 {
        Some(x.clone())
    } else if gn > 1e-14 {
        let z = &g * (-x[t] / (gn * gn));
        let w = &x + &null * &z;
        (w.norm() < limit).then(|| {
            let mut w = w;
            w[t] = w[t].min(0.0);
            w
        })
    } else {
        None
    };
    let classification = if witness.is_some() { Classification::Hypo } else { Classification::Epi };
    Ok(HypoEpi { classification, witness, min_xi0 })
}
