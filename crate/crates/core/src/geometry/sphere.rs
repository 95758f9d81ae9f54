use serde::{Deserialize, Serialize};

use super::{Space, SpaceKind, Vector};
use crate::error::{Error, Result};

/// Interface data `(c, k)` of a co-oriented generalized sphere. On the
/// Euclidean space `k_s` is the companion curvature of the lifted sphere. On
/// the Gaussian space the sphere is the hyperplane `<c,x> + k = 0` with unit `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedSphere {
    pub space: Space,
    pub c: Vector,
    pub k: f64,
    pub k_s: Option<f64>,
}

impl GeneralizedSphere {
    pub fn new(space: Space, c: Vector, k: f64, k_s: Option<f64>) -> Result<Self> {
        space.check_len(&c)?;
        if !k.is_finite() || k_s.is_some_and(|v| !v.is_finite()) {
            return Err(Error::Contract("non-finite sphere parameter".into()));
        }
        match (space.kind, k_s) {
            (SpaceKind::EuclidR, None) => {
                return Err(Error::Contract("Euclidean sphere needs the companion curvature".into()))
            }
            (SpaceKind::EuclidR, Some(_)) => {}
            (_, Some(_)) => return Err(Error::Contract("companion curvature only on R^n".into())),
            _ => {}
        }
        Ok(GeneralizedSphere { space, c, k, k_s })
    }

    /// Signed defect of the consistency relation of the space.
    pub fn consistency_defect(&self) -> f64 {
        let c2 = self.space.inner(&self.c, &self.c);
        match self.space.kind {
            SpaceKind::SphereS => c2 - 1.0 - self.k * self.k,
            SpaceKind::HyperH => c2 - 1.0 + self.k * self.k,
            SpaceKind::EuclidR => c2 + self.k * self.k - 2.0 * self.k * self.k_s.unwrap_or(0.0) - 1.0,
            SpaceKind::GaussG => c2 - 1.0,
        }
    }

    /// Level function whose zero set is the sphere. Its sign is negative on
    /// the side the sphere's normal points away from.
    pub fn level(&self, p: &Vector) -> f64 {
        match self.space.kind {
            SpaceKind::SphereS => self.c.dot(p) + self.k,
            SpaceKind::HyperH => self.space.inner(&self.c, p) - self.k,
            SpaceKind::EuclidR => {
                self.k * p.norm_squared() + 2.0 * self.c.dot(p) + 2.0 * self.k_s.unwrap_or(0.0) - self.k
            }
            SpaceKind::GaussG => self.c.dot(p) + self.k,
        }
    }

    /// Residual of `p` on the sphere, measured in units of the level gradient.
    pub fn residual(&self, p: &Vector) -> f64 {
        let scale = match self.space.kind {
            SpaceKind::EuclidR => 2.0,
            _ => 1.0,
        };
        (self.level(p) / scale).abs()
    }

    /// Unnormalized normal `c + k p` (`c` on the Gaussian space).
    pub fn raw_normal(&self, p: &Vector) -> Vector {
        match self.space.kind {
            SpaceKind::GaussG => self.c.clone(),
            _ => &self.c + p * self.k,
        }
    }

    /// Norm of the raw normal at `p`; 1 when the consistency relation holds.
    pub fn normal_scale(&self, p: &Vector) -> f64 {
        let n = self.raw_normal(p);
        self.space.inner(&n, &n).max(0.0).sqrt()
    }

    /// Unit normal computed from the zero set itself, insensitive to the
    /// normalization of `(c, k)`.
    pub fn geometric_normal(&self, p: &Vector) -> Vector {
        let n = self.raw_normal(p);
        let s = self.normal_scale(p);
        n / s
    }

    /// Curvature of the zero set (0 for Gaussian hyperplanes).
    pub fn geometric_curvature(&self, p: &Vector) -> f64 {
        match self.space.kind {
            SpaceKind::GaussG => 0.0,
            _ => self.k / self.normal_scale(p),
        }
    }

    /// Curvature entering mean curvature and second fundamental form.
    pub fn curvature(&self) -> f64 {
        match self.space.kind {
            SpaceKind::GaussG => 0.0,
            _ => self.k,
        }
    }

    /// Sectional curvature of the sphere with its induced metric.
    pub fn intrinsic_curvature(&self) -> f64 {
        self.space.curvature() + self.curvature().powi(2)
    }

    pub fn neg(&self) -> GeneralizedSphere {
        GeneralizedSphere {
            space: self.space,
            c: -&self.c,
            k: -self.k,
            k_s: self.k_s.map(|v| -v),
        }
    }
}
