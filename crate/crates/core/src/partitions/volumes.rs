use serde::{Deserialize, Serialize};

use super::{argmin_strict, PartitionSpec};
use crate::error::{Error, Result};
use crate::geometry::{SpaceKind, Vector};
use crate::mobius::lift_to_sphere;
use crate::rng;

/// Default truncation radius (geodesic on `H^n`) for Monte Carlo volumes on
/// the non-compact unweighted spaces.
pub const DEFAULT_TRUNCATION: f64 = 8.0;

/// Monte Carlo measure of one cell. `volume` is `None` for cells of infinite
/// volume on `R^n` and `H^n`; `fraction` is always the share of samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VolumeEstimate {
    pub cell: usize,
    pub fraction: f64,
    pub volume: Option<f64>,
    pub std_error: Option<f64>,
    pub infinite: bool,
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7.
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Area of the unit sphere `S^m` in `R^(m+1)`.
pub fn sphere_area(m: usize) -> f64 {
    let a = (m as f64 + 1.0) / 2.0;
    2.0 * std::f64::consts::PI.powf(a) / ln_gamma(a).exp()
}

fn euclid_ball_volume(n: usize, r: f64) -> f64 {
    sphere_area(n - 1) * r.powi(n as i32) / n as f64
}

fn hyper_ball_volume(n: usize, r: f64) -> f64 {
    // |S^(n-1)| * int_0^r sinh^(n-1), by composite Simpson.
    let m = 4096;
    let h = r / m as f64;
    let f = |t: f64| t.sinh().powi(n as i32 - 1);
    let mut s = f(0.0) + f(r);
    for i in 1..m {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    sphere_area(n - 1) * s * h / 3.0
}

// Cells whose closure reaches infinity: on R^n those minimizing the lifted
// score at the north pole, on H^n those meeting the equator of the lift.
fn infinite_cells(part: &PartitionSpec, seed: u64) -> Result<Vec<bool>> {
    let q = part.q();
    let mut inf = vec![false; q];
    let lifted = lift_to_sphere(part)?;
    let d = lifted.space.ambient_dim();
    match part.space.kind {
        SpaceKind::EuclidR => {
            let np = crate::geometry::basis(d, d - 1);
            let s = lifted.normalized_scores(&np);
            let m = s.iter().cloned().fold(f64::INFINITY, f64::min);
            for (i, v) in s.iter().enumerate() {
                if *v <= m + 1e-12 * (1.0 + m.abs()) {
                    inf[i] = true;
                }
            }
        }
        SpaceKind::HyperH => {
            let mut r = rng::rng(seed ^ 0xE0);
            for _ in 0..20_000 {
                let mut p = rng::unit_vector(&mut r, d);
                p[d - 1] = 0.0;
                let p = p.normalize();
                if let Some(i) = argmin_strict(&lifted.normalized_scores(&p), 1e-12) {
                    inf[i] = true;
                }
            }
        }
        _ => {}
    }
    Ok(inf)
}

/// Monte Carlo cell measures: uniform on the sphere (absolute areas), the
/// Gaussian measure (probabilities), and uniform in the ball of radius
/// `truncation` on `R^n` and `H^n` (volumes inside the ball). Standard errors
/// are binomial.
pub fn estimate_volumes(part: &PartitionSpec, sample_count: usize, seed: u64, truncation: f64) -> Result<Vec<VolumeEstimate>> {
    if sample_count < 10_000 {
        return Err(Error::OutOfRange(format!("sample count {sample_count} below 10^4")));
    }
    part.validate()?;
    let q = part.q();
    let n = part.space.n;
    let d = part.space.ambient_dim();
    let mut r = rng::rng(seed);
    let mut counts = vec![0usize; q];
    let (total, infinite) = match part.space.kind {
        SpaceKind::SphereS => (sphere_area(n), vec![false; q]),
        SpaceKind::GaussG => (1.0, vec![false; q]),
        SpaceKind::EuclidR => (euclid_ball_volume(n, truncation), infinite_cells(part, seed)?),
        SpaceKind::HyperH => (hyper_ball_volume(n, truncation), infinite_cells(part, seed)?),
    };
    let nm1 = n as f64 - 1.0;
    for _ in 0..sample_count {
        let p: Vector = match part.space.kind {
            SpaceKind::SphereS => rng::unit_vector(&mut r, d),
            SpaceKind::GaussG => rng::gaussian_vector(&mut r, d),
            SpaceKind::EuclidR => {
                let u = rng::uniform(&mut r, 0.0, 1.0);
                rng::unit_vector(&mut r, d) * (truncation * u.powf(1.0 / n as f64))
            }
            SpaceKind::HyperH => {
                // Radius density proportional to sinh^(n-1): propose from
                // exp((n-1) t) and accept with (1 - exp(-2t))^(n-1).
                let t = loop {
                    let u = rng::uniform(&mut r, 0.0, 1.0);
                    let t = if nm1 * truncation > 700.0 {
                        truncation + (u.ln()) / nm1
                    } else {
                        ((u * ((nm1 * truncation).exp() - 1.0)) + 1.0).ln() / nm1
                    };
                    if t < 0.0 {
                        continue;
                    }
                    let acc = (1.0 - (-2.0 * t).exp()).powf(nm1);
                    if rng::uniform(&mut r, 0.0, 1.0) < acc {
                        break t;
                    }
                };
                let w = rng::unit_vector(&mut r, n);
                let mut y = Vector::zeros(d);
                for i in 0..n {
                    y[i] = w[i] * t.sinh();
                }
                y[n] = t.cosh();
                y
            }
        };
        if let Some(i) = argmin_strict(&part.normalized_scores(&p), super::TIE_TOL) {
            counts[i] += 1;
        }
    }
    let nf = sample_count as f64;
    Ok((0..q)
        .map(|i| {
            let f = counts[i] as f64 / nf;
            let se = (f * (1.0 - f) / nf).sqrt() * total;
            VolumeEstimate {
                cell: i,
                fraction: f,
                volume: (!infinite[i]).then_some(f * total),
                std_error: (!infinite[i]).then_some(se),
                infinite: infinite[i],
            }
        })
        .collect())
}
