use super::{on_space_residual, GeneralizedSphere, Space, SpaceKind, Vector};
use crate::error::{Error, Result};

/// Geodesic normal coordinates of a generalized sphere around an anchor.
///
/// Every generalized sphere has constant intrinsic curvature, so its geodesics
/// are closed-form curves in the span of the anchor, the normal and the
/// initial direction:
/// `gamma(s) = p + e S(s) + a C(s)` with `a = -eps p - kappa n`,
/// `S'' = -omega^2 S`, `C'' = S'` and `omega^2 = eps + kappa^2`.
#[derive(Debug, Clone)]
pub struct Chart {
    pub space: Space,
    pub sphere: GeneralizedSphere,
    pub anchor: Vector,
    pub normal: Vector,
    pub frame: Vec<Vector>,
    pub curvature: f64,
    pub valid_radius: f64,
    accel: Vector,
    omega2: f64,
}

// sin(w s)/(w s) style kernel and its companions, for any sign of w^2.
pub(crate) fn sinc_k(omega2: f64, s: f64) -> f64 {
    let x2 = omega2 * s * s;
    if x2.abs() < 1e-8 {
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else if omega2 > 0.0 {
        let x = x2.sqrt();
        x.sin() / x
    } else {
        let x = (-x2).sqrt();
        x.sinh() / x
    }
}

pub(crate) fn cos_k(omega2: f64, s: f64) -> f64 {
    if omega2 >= 0.0 {
        (omega2.sqrt() * s).cos()
    } else {
        ((-omega2).sqrt() * s).cosh()
    }
}

// (1 - cos(w s))/w^2, written without cancellation.
pub(crate) fn vers_k(omega2: f64, s: f64) -> f64 {
    let half = 0.5 * s;
    let r = sinc_k(omega2, half);
    2.0 * half * half * r * r
}

impl Chart {
    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    /// Ambient point at chart parameter `t`.
    pub fn point(&self, t: &[f64]) -> Vector {
        assert_eq!(t.len(), self.frame.len());
        let mut tv = Vector::zeros(self.anchor.len());
        let mut s2 = 0.0;
        for (ti, f) in t.iter().zip(&self.frame) {
            tv.axpy(*ti, f, 1.0);
            s2 += ti * ti;
        }
        let s = s2.sqrt();
        &self.anchor + tv * sinc_k(self.omega2, s) + &self.accel * vers_k(self.omega2, s)
    }

    /// Point on the geodesic through the anchor with unit initial direction
    /// `dir` (ambient tangent vector), at arclength `s`.
    pub fn geodesic_point(&self, dir: &Vector, s: f64) -> Vector {
        &self.anchor + dir * (s * sinc_k(self.omega2, s)) + &self.accel * vers_k(self.omega2, s)
    }

    /// Velocity of the same geodesic.
    pub fn geodesic_velocity(&self, dir: &Vector, s: f64) -> Vector {
        dir * cos_k(self.omega2, s) + &self.accel * (s * sinc_k(self.omega2, s))
    }

    /// Ambient tangent vector for frame coordinates `v`.
    pub fn tangent(&self, v: &[f64]) -> Vector {
        let mut out = Vector::zeros(self.anchor.len());
        for (vi, f) in v.iter().zip(&self.frame) {
            out.axpy(*vi, f, 1.0);
        }
        out
    }

    /// Squared intrinsic curvature parameter `omega^2`.
    pub fn omega2(&self) -> f64 {
        self.omega2
    }

    /// The vector `a = -eps p - kappa n` of the parametrization.
    pub fn accel(&self) -> &Vector {
        &self.accel
    }
}

/// Chart of `sphere` centered at `anchor`, built from exact trigonometric or
/// hyperbolic parametrizations. The frame is orthonormal in the signature of
/// the space. Valid radius: a quarter period `pi/(2 omega)` on positively
/// curved spheres, 2 otherwise.
pub fn sphere_chart(space: Space, sphere: &GeneralizedSphere, anchor: &Vector) -> Result<Chart> {
    space.check_len(anchor)?;
    if sphere.space != space {
        return Err(Error::Contract("sphere belongs to another space".into()));
    }
    let off = on_space_residual(space, anchor);
    let res = sphere.residual(anchor) / sphere.normal_scale(anchor).max(1e-300);
    if off > 1e-10 || res > 1e-10 {
        return Err(Error::OffSphere(off.max(res)));
    }
    let normal = sphere.geometric_normal(anchor);
    let kappa = sphere.geometric_curvature(anchor);
    let eps = space.curvature();
    let d = anchor.len();

    let mut fixed: Vec<(Vector, f64)> = Vec::new();
    if matches!(space.kind, SpaceKind::SphereS | SpaceKind::HyperH) {
        fixed.push((anchor.clone(), space.inner(anchor, anchor)));
    }
    fixed.push((normal.clone(), space.inner(&normal, &normal)));
    let mut frame: Vec<Vector> = Vec::new();
    let want = space.n - 1;
    for i in 0..d {
        if frame.len() == want {
            break;
        }
        let mut v = super::basis(d, i);
        for _ in 0..2 {
            for (b, bb) in &fixed {
                let coef = space.inner(&v, b) / bb;
                v.axpy(-coef, b, 1.0);
            }
            for f in &frame {
                let coef = space.inner(&v, f);
                v.axpy(-coef, f, 1.0);
            }
        }
        let nn = space.inner(&v, &v);
        if nn > 1e-6 {
            frame.push(v / nn.sqrt());
        }
    }
    if frame.len() < want {
        return Err(Error::DegenerateFrame(0.0));
    }
    let mut gram = nalgebra::DMatrix::<f64>::zeros(want, want);
    for a in 0..want {
        for b in 0..want {
            gram[(a, b)] = space.inner(&frame[a], &frame[b]);
        }
    }
    let det = gram.determinant();
    if det < 1e-12 {
        return Err(Error::DegenerateFrame(det));
    }
    let accel = anchor * (-eps) - &normal * kappa;
    let omega2 = eps + kappa * kappa;
    let valid_radius = if omega2 > 1e-12 {
        std::f64::consts::FRAC_PI_2 / omega2.sqrt()
    } else {
        2.0
    };
    Ok(Chart {
        space,
        sphere: sphere.clone(),
        anchor: anchor.clone(),
        normal,
        frame,
        curvature: kappa,
        valid_radius,
        accel,
        omega2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{basis, vector};
    use proptest::prelude::*;

    #[test]
    fn chart_at_zero_is_anchor() {
        let s = Space::sphere(3);
        let sph = GeneralizedSphere::new(s, basis(4, 0), 0.0, None).unwrap();
        let a = basis(4, 1);
        let ch = sphere_chart(s, &sph, &a).unwrap();
        assert!((ch.point(&[0.0, 0.0]) - &a).norm() < 1e-15);
        assert_eq!(ch.dim(), 2);
    }

    #[test]
    fn unit_circle_chart() {
        let s = Space::euclid(2);
        // k = 1, c = 0, companion 0: the unit circle.
        let sph = GeneralizedSphere::new(s, vector(&[0.0, 0.0]), 1.0, Some(0.0)).unwrap();
        let ch = sphere_chart(s, &sph, &vector(&[1.0, 0.0])).unwrap();
        assert!((ch.valid_radius - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        for i in 0..100 {
            let t = -1.5 + 3.0 * i as f64 / 99.0;
            let p = ch.point(&[t]);
            assert!((p.norm() - 1.0).abs() < 1e-14);
            assert!((p[0] - t.cos()).abs() < 1e-14);
            assert!((p[1].abs() - t.sin().abs()).abs() < 1e-14);
        }
    }

    #[test]
    fn hyperbolic_geodesic_through_apex() {
        let s = Space::hyper(2);
        let sph = GeneralizedSphere::new(s, vector(&[1.0, 0.0, 0.0]), 0.0, None).unwrap();
        let apex = vector(&[0.0, 0.0, 1.0]);
        let ch = sphere_chart(s, &sph, &apex).unwrap();
        for i in 0..50 {
            let t = -2.0 + 4.0 * i as f64 / 49.0;
            let p = ch.point(&[t]);
            assert!(on_space_residual(s, &p) < 1e-12);
            assert!(sph.residual(&p) < 1e-12);
            assert!((p[2] - t.cosh()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_anchor_off_sphere() {
        let s = Space::sphere(2);
        let sph = GeneralizedSphere::new(s, basis(3, 0), 0.0, None).unwrap();
        assert!(sphere_chart(s, &sph, &basis(3, 0)).is_err());
    }

    // Random generalized spheres through a random anchor: the sphere is
    // determined by the anchor, a unit normal at it and a curvature.
    fn random_sphere(kind: u8, n: usize, seed: &[f64], k: f64) -> (Space, GeneralizedSphere, Vector) {
        let space = match kind {
            0 => Space::sphere(n),
            1 => Space::euclid(n),
            _ => Space::hyper(n),
        };
        let d = space.ambient_dim();
        let raw = vector(&seed[..d]);
        let anchor = match space.kind {
            SpaceKind::SphereS => raw.normalize(),
            SpaceKind::EuclidR => raw.clone(),
            _ => {
                let mut y = raw.clone();
                y[d - 1] = 0.0;
                let r2 = y.norm_squared();
                y[d - 1] = (1.0 + r2).sqrt();
                y
            }
        };
        let mut nrm = vector(&seed[d..2 * d]);
        nrm = crate::geometry::project_tangent(space, &anchor, &nrm);
        let nn = space.inner(&nrm, &nrm).sqrt();
        nrm /= nn;
        let c = &nrm - &anchor * k;
        let sph = match space.kind {
            SpaceKind::EuclidR => {
                // level k|x|^2 + 2<c,x> + 2 ks - k vanishes at the anchor.
                let ks = (k - k * anchor.norm_squared() - 2.0 * c.dot(&anchor)) / 2.0;
                GeneralizedSphere::new(space, c, k, Some(ks)).unwrap()
            }
            _ => GeneralizedSphere::new(space, c, k, None).unwrap(),
        };
        (space, sph, anchor)
    }

    proptest! {
        #[test]
        fn chart_stays_on_sphere(
            kind in 0u8..3, n in 2usize..5,
            seed in prop::collection::vec(-1.0f64..1.0, 10),
            k in -2.5f64..2.5,
            t in prop::collection::vec(-1.0f64..1.0, 4),
        ) {
            let (space, sph, anchor) = random_sphere(kind, n, &seed, k);
            prop_assume!(sph.consistency_defect().abs() < 1e-10);
            let ch = sphere_chart(space, &sph, &anchor).unwrap();
            let tt: Vec<f64> = t[..n - 1].iter().map(|v| v * ch.valid_radius / (n as f64).sqrt()).collect();
            let p = ch.point(&tt);
            let scale = 1.0 + p.norm_squared();
            prop_assert!(on_space_residual(space, &p) < 1e-10 * scale);
            prop_assert!(sph.residual(&p) < 1e-10 * scale);
            for a in 0..ch.dim() {
                for b in 0..ch.dim() {
                    let g = space.inner(&ch.frame[a], &ch.frame[b]);
                    let target = if a == b { 1.0 } else { 0.0 };
                    prop_assert!((g - target).abs() < 1e-12);
                }
            }
        }
    }
}
