//! Vector algebra in Euclidean and Lorentzian signature, model spaces,
//! exact charts on generalized spheres and finite-difference surface calculus.

mod chart;
mod fd;
pub mod linalg;
mod sphere;

pub use chart::{sphere_chart, Chart};
pub(crate) use chart::{cos_k, sinc_k, vers_k};
pub use sphere::GeneralizedSphere;
pub use fd::{fd_gradient_coords, fd_surface_gradient, fd_surface_hessian, fd_surface_laplacian, FdConfig};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ambient coordinate vector. For the hyperboloid the time coordinate is
/// stored last.
pub type Vector = DVector<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Signature {
    Euclidean,
    /// Last coordinate carries the minus sign.
    Lorentzian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpaceKind {
    #[serde(rename = "S")]
    SphereS,
    #[serde(rename = "R")]
    EuclidR,
    #[serde(rename = "H")]
    HyperH,
    #[serde(rename = "G")]
    GaussG,
}

/// A model space of dimension `n`. The Gaussian space carries the weight
/// `W(x) = |x|^2/2 + (n/2) ln(2π)`, so that its measure is a probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Space {
    pub kind: SpaceKind,
    pub n: usize,
}

pub const MAX_DIM: usize = 8;

impl Space {
    pub fn new(kind: SpaceKind, n: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::OutOfRange(format!("dimension n = {n} not in [2, {MAX_DIM}]")));
        }
        Ok(Space { kind, n })
    }

    pub fn sphere(n: usize) -> Self {
        Space::new(SpaceKind::SphereS, n).expect("dimension in range")
    }
    pub fn euclid(n: usize) -> Self {
        Space::new(SpaceKind::EuclidR, n).expect("dimension in range")
    }
    pub fn hyper(n: usize) -> Self {
        Space::new(SpaceKind::HyperH, n).expect("dimension in range")
    }
    pub fn gauss(n: usize) -> Self {
        Space::new(SpaceKind::GaussG, n).expect("dimension in range")
    }

    /// Length of coordinate vectors for points of this space.
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            SpaceKind::SphereS | SpaceKind::HyperH => self.n + 1,
            SpaceKind::EuclidR | SpaceKind::GaussG => self.n,
        }
    }

    pub fn signature(&self) -> Signature {
        match self.kind {
            SpaceKind::HyperH => Signature::Lorentzian,
            _ => Signature::Euclidean,
        }
    }

    /// Sectional curvature of the ambient manifold (0 for the Gaussian space).
    pub fn curvature(&self) -> f64 {
        match self.kind {
            SpaceKind::SphereS => 1.0,
            SpaceKind::HyperH => -1.0,
            SpaceKind::EuclidR | SpaceKind::GaussG => 0.0,
        }
    }

    pub fn is_weighted(&self) -> bool {
        self.kind == SpaceKind::GaussG
    }

    /// Weight `W` of the Gaussian measure; zero elsewhere.
    pub fn weight(&self, x: &Vector) -> f64 {
        if self.is_weighted() {
            0.5 * x.norm_squared() + 0.5 * self.n as f64 * (2.0 * std::f64::consts::PI).ln()
        } else {
            0.0
        }
    }

    pub fn inner(&self, x: &Vector, y: &Vector) -> f64 {
        lorentz_or_euclid(x, y, self.signature())
    }

    pub fn check_len(&self, x: &Vector) -> Result<()> {
        check_vector(x, self.ambient_dim())
    }
}

fn lorentz_or_euclid(x: &Vector, y: &Vector, sig: Signature) -> f64 {
    let d = x.len();
    let mut s = 0.0;
    for i in 0..d {
        s += x[i] * y[i];
    }
    if sig == Signature::Lorentzian {
        s -= 2.0 * x[d - 1] * y[d - 1];
    }
    s
}

/// Inner product in the given signature.
pub fn inner(x: &Vector, y: &Vector, sig: Signature) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    Ok(lorentz_or_euclid(x, y, sig))
}

/// Checks length and finiteness of a coordinate vector.
pub fn check_vector(x: &Vector, len: usize) -> Result<()> {
    if x.len() != len {
        return Err(Error::DimensionMismatch { expected: len, got: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("non-finite coordinate".into()));
    }
    Ok(())
}

/// Distance of `p` from the model space: `|<p,p> - 1|` on the sphere,
/// `|<p,p>_1 + 1|` on the hyperboloid (infinite on the lower sheet), zero on
/// flat spaces.
pub fn on_space_residual(space: Space, p: &Vector) -> f64 {
    match space.kind {
        SpaceKind::SphereS => (p.norm_squared() - 1.0).abs(),
        SpaceKind::HyperH => {
            if p[p.len() - 1] <= 0.0 {
                f64::INFINITY
            } else {
                (space.inner(p, p) + 1.0).abs()
            }
        }
        SpaceKind::EuclidR | SpaceKind::GaussG => 0.0,
    }
}

/// Unit basis vector of length `d`.
pub fn basis(d: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(d);
    v[i] = 1.0;
    v
}

/// Builds a vector from a slice.
pub fn vector(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

/// Tangent projection onto `T_p M` for the curved model spaces; identity on
/// flat ones.
pub fn project_tangent(space: Space, p: &Vector, v: &Vector) -> Vector {
    match space.kind {
        SpaceKind::SphereS => v - p * p.dot(v),
        SpaceKind::HyperH => v + p * space.inner(v, p),
        _ => v.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inner_examples() {
        let e = vector(&[1.0, 0.0]);
        assert_eq!(inner(&e, &e, Signature::Euclidean).unwrap(), 1.0);
        let t = vector(&[0.0, 1.0]);
        assert_eq!(inner(&t, &t, Signature::Lorentzian).unwrap(), -1.0);
        let z = vector(&[3.0, 4.0, 5.0]);
        assert_eq!(inner(&z, &z, Signature::Lorentzian).unwrap(), 0.0);
        assert!(inner(&e, &z, Signature::Euclidean).is_err());
    }

    #[test]
    fn residual_examples() {
        assert_eq!(on_space_residual(Space::sphere(2), &vector(&[1.0, 0.0, 0.0])), 0.0);
        assert_eq!(on_space_residual(Space::hyper(2), &vector(&[0.0, 0.0, 1.0])), 0.0);
        assert!(on_space_residual(Space::hyper(2), &vector(&[0.0, 0.0, -1.0])).is_infinite());
        assert_eq!(on_space_residual(Space::euclid(2), &vector(&[5.0, 1.0])), 0.0);
    }

    #[test]
    fn space_dimension_range() {
        assert!(Space::new(SpaceKind::SphereS, 1).is_err());
        assert!(Space::new(SpaceKind::SphereS, 9).is_err());
        assert_eq!(Space::hyper(3).ambient_dim(), 4);
        assert_eq!(Space::gauss(3).ambient_dim(), 3);
    }

    fn vec_strategy(d: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, d)
    }

    proptest! {
        #[test]
        fn inner_symmetric_bilinear(
            x in vec_strategy(5), y in vec_strategy(5), z in vec_strategy(5),
            a in -3.0f64..3.0, lorentz in any::<bool>()
        ) {
            let sig = if lorentz { Signature::Lorentzian } else { Signature::Euclidean };
            let (x, y, z) = (vector(&x), vector(&y), vector(&z));
            let xy = inner(&x, &y, sig).unwrap();
            prop_assert!((xy - inner(&y, &x, sig).unwrap()).abs() <= 1e-12 * (1.0 + xy.abs()));
            let lhs = inner(&(&x * a + &z), &y, sig).unwrap();
            let rhs = a * xy + inner(&z, &y, sig).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + lhs.abs()));
        }
    }
}
