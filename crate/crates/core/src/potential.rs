//! Closed-form conformally flattening boundary potentials.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flatness::{FlatnessCertificate, BALL_MARGIN};
use crate::geometry::{on_space_residual, GeneralizedSphere, Space, SpaceKind, Vector};
use crate::partitions::vec_serde;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PotentialForm {
    /// `V(p) = 1 - <p, xi>` on `S^n`.
    SphereAffine {
        #[serde(with = "vec_serde")]
        xi: Vector,
    },
    /// `V(x) = |x|^2/2 - <x, theta> + eta` on `R^n`.
    EuclidQuadratic {
        #[serde(with = "vec_serde")]
        theta: Vector,
        eta: f64,
    },
    /// `V(y) = -xi_0 - <y, (xi_bar, 1)>_1` on `H^n`.
    #[serde(rename_all = "camelCase")]
    MinkowskiAffine {
        #[serde(with = "vec_serde")]
        xi_bar: Vector,
        xi0: f64,
    },
    /// `V = 1` on the Gaussian space.
    GaussianConst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub space: Space,
    pub form: PotentialForm,
}

const ON_SPACE_TOL: f64 = 1e-9;

impl PotentialSpec {
    /// Checks dimensions and the positivity invariant of the form.
    pub fn validate(&self) -> Result<()> {
        let n = self.space.n;
        let mismatch = |expected: usize, got: usize| Err(Error::DimensionMismatch { expected, got });
        match (&self.form, self.space.kind) {
            (PotentialForm::SphereAffine { xi }, SpaceKind::SphereS) => {
                if xi.len() != n + 1 {
                    return mismatch(n + 1, xi.len());
                }
                if !(xi.norm() < 1.0) {
                    return Err(Error::NonPositivePotential(1.0 - xi.norm()));
                }
            }
            (PotentialForm::EuclidQuadratic { theta, eta }, SpaceKind::EuclidR) => {
                if theta.len() != n {
                    return mismatch(n, theta.len());
                }
                let m = eta - theta.norm_squared() / 2.0;
                if !(m > 0.0) {
                    return Err(Error::NonPositivePotential(m));
                }
            }
            (PotentialForm::MinkowskiAffine { xi_bar, xi0 }, SpaceKind::HyperH) => {
                if xi_bar.len() != n {
                    return mismatch(n, xi_bar.len());
                }
                let m = 1.0 - xi_bar.norm_squared() - xi0 * xi0;
                if !(m > 0.0) {
                    return Err(Error::NonPositivePotential(m));
                }
            }
            (PotentialForm::GaussianConst, SpaceKind::GaussG) => {}
            _ => return Err(Error::Contract("potential form does not match the space".into())),
        }
        Ok(())
    }

    /// Value at a point of the space (not checked to lie on it).
    pub fn value(&self, p: &Vector) -> f64 {
        match &self.form {
            PotentialForm::SphereAffine { xi } => 1.0 - p.dot(xi),
            PotentialForm::EuclidQuadratic { theta, eta } => p.norm_squared() / 2.0 - p.dot(theta) + eta,
            PotentialForm::MinkowskiAffine { xi_bar, xi0 } => {
                let n = xi_bar.len();
                -xi0 - (p.rows(0, n).dot(xi_bar) - p[n])
            }
            PotentialForm::GaussianConst => 1.0,
        }
    }

    /// Gradient of the ambient extension with respect to the inner product of
    /// the space (Lorentzian on `H^n`), so that `dV(v) = <grad, v>`.
    pub fn grad(&self, p: &Vector) -> Vector {
        match &self.form {
            PotentialForm::SphereAffine { xi } => -xi.clone(),
            PotentialForm::EuclidQuadratic { theta, .. } => p - theta,
            PotentialForm::MinkowskiAffine { xi_bar, .. } => {
                let n = xi_bar.len();
                let mut w = Vector::zeros(n + 1);
                w.rows_mut(0, n).copy_from(&(-xi_bar));
                w[n] = -1.0;
                w
            }
            PotentialForm::GaussianConst => Vector::zeros(p.len()),
        }
    }

    /// Derivative of `V` along a tangent vector `v` at `p`.
    pub fn derivative(&self, p: &Vector, v: &Vector) -> f64 {
        self.space.inner(&self.grad(p), v)
    }

    /// Second derivative of `V` along a curve through `p` with velocity `vel`
    /// and ambient acceleration `acc`.
    pub fn curve_second_derivative(&self, p: &Vector, vel: &Vector, acc: &Vector) -> f64 {
        let hess = match self.form {
            PotentialForm::EuclidQuadratic { .. } => vel.norm_squared(),
            _ => 0.0,
        };
        hess + self.derivative(p, acc)
    }

    /// `L_Jac V` on every interface of a partition certified by this potential.
    pub fn expected_ljac(&self) -> f64 {
        let n = self.space.n as f64;
        match &self.form {
            PotentialForm::MinkowskiAffine { xi0, .. } => (n - 1.0) * xi0,
            PotentialForm::GaussianConst => 1.0,
            _ => n - 1.0,
        }
    }

    /// Constant `c` with `V Ric^V = c g` on the interfaces.
    pub fn expected_ric_v(&self) -> f64 {
        let n = self.space.n as f64;
        match &self.form {
            PotentialForm::MinkowskiAffine { xi0, .. } => (n - 2.0) * xi0,
            PotentialForm::GaussianConst => 1.0,
            _ => n - 2.0,
        }
    }

    /// Coefficient `h` of the interface Hessian `∇²_Σ V = h g` at `p` on an
    /// interface of geometric curvature `k`.
    pub fn surface_hessian_coefficient(&self, k: f64, p: &Vector) -> f64 {
        let v = self.value(p);
        match &self.form {
            PotentialForm::SphereAffine { .. } => 1.0 - (1.0 + k * k) * v,
            PotentialForm::EuclidQuadratic { .. } => 1.0 - k * k * v,
            PotentialForm::MinkowskiAffine { xi0, .. } => xi0 - (k * k - 1.0) * v,
            PotentialForm::GaussianConst => 0.0,
        }
    }

    fn check_point(&self, p: &Vector) -> Result<()> {
        self.space.check_len(p)?;
        let r = on_space_residual(self.space, p);
        if !(r <= ON_SPACE_TOL * (1.0 + p.norm_squared())) {
            return Err(Error::OffSpace(r));
        }
        Ok(())
    }
}

pub fn potential_eval(v: &PotentialSpec, p: &Vector) -> Result<f64> {
    v.check_point(p)?;
    Ok(v.value(p))
}

pub fn potential_ambient_grad(v: &PotentialSpec, p: &Vector) -> Result<Vector> {
    v.check_point(p)?;
    Ok(v.grad(p))
}

/// `<∇V, c + k p>` at a point of the sphere.
pub fn potential_normal_derivative(v: &PotentialSpec, sphere: &GeneralizedSphere, p: &Vector) -> Result<f64> {
    v.check_point(p)?;
    if sphere.space != v.space {
        return Err(Error::Contract("sphere and potential live on different spaces".into()));
    }
    let r = sphere.residual(p);
    if !(r <= 1e-8 * (1.0 + p.norm_squared())) {
        return Err(Error::OffSphere(r));
    }
    Ok(v.derivative(p, &sphere.raw_normal(p)))
}

/// The potential attached to a feasible certificate.
pub fn build_potential(space: Space, cert: &FlatnessCertificate) -> Result<PotentialSpec> {
    let n = space.n;
    let form = if space.kind == SpaceKind::GaussG {
        PotentialForm::GaussianConst
    } else {
        if !cert.feasible {
            return Err(Error::Infeasible { residual: cert.residual, norm: cert.xi.norm() });
        }
        if cert.xi.len() != n + 1 {
            return Err(Error::DimensionMismatch { expected: n + 1, got: cert.xi.len() });
        }
        if !(cert.xi.norm() < 1.0 - BALL_MARGIN) {
            return Err(Error::Infeasible { residual: cert.residual, norm: cert.xi.norm() });
        }
        let xi = &cert.xi;
        let xi_bar = xi.rows(0, n).into_owned();
        let xi0 = xi[n];
        match space.kind {
            SpaceKind::SphereS => PotentialForm::SphereAffine { xi: xi.clone() },
            SpaceKind::EuclidR => {
                if !(1.0 - xi0 > 0.0) {
                    return Err(Error::Degenerate("xi_0 = 1".into()));
                }
                PotentialForm::EuclidQuadratic { theta: xi_bar / (1.0 - xi0), eta: 0.5 * (1.0 + xi0) / (1.0 - xi0) }
            }
            SpaceKind::HyperH => PotentialForm::MinkowskiAffine { xi_bar, xi0 },
            SpaceKind::GaussG => unreachable!(),
        }
    };
    let v = PotentialSpec { space, form };
    v.validate()?;
    Ok(v)
}
