use nalgebra::DMatrix;

use super::{Chart, Vector};
use crate::error::{Error, Result};

/// Central finite differences of second order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    pub h: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig { h: 1e-4 }
    }
}

impl FdConfig {
    pub fn new(h: f64) -> Result<Self> {
        let cfg = FdConfig { h };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h >= 1e-7) {
            return Err(Error::StepUnderflow(self.h));
        }
        if self.h > 1e-2 {
            return Err(Error::OutOfRange(format!("step {} above 1e-2", self.h)));
        }
        Ok(())
    }
}

fn eval_at(chart: &Chart, f: &dyn Fn(&Vector) -> f64, t: &[f64]) -> f64 {
    f(&chart.point(t))
}

fn offset(dim: usize, pairs: &[(usize, f64)]) -> Vec<f64> {
    let mut t = vec![0.0; dim];
    for &(i, v) in pairs {
        t[i] += v;
    }
    t
}

/// Frame components of the surface gradient at the chart center.
pub fn fd_gradient_coords(chart: &Chart, f: &dyn Fn(&Vector) -> f64, cfg: FdConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let d = chart.dim();
    let h = cfg.h;
    Ok((0..d)
        .map(|i| {
            (eval_at(chart, f, &offset(d, &[(i, h)])) - eval_at(chart, f, &offset(d, &[(i, -h)]))) / (2.0 * h)
        })
        .collect())
}

/// Surface gradient at the chart center as an ambient vector.
pub fn fd_surface_gradient(chart: &Chart, f: &dyn Fn(&Vector) -> f64, cfg: FdConfig) -> Result<Vector> {
    let g = fd_gradient_coords(chart, f, cfg)?;
    Ok(chart.tangent(&g))
}

/// Covariant Hessian at the chart center in frame components. The chart is
/// a normal coordinate system, so plain second differences suffice.
pub fn fd_surface_hessian(chart: &Chart, f: &dyn Fn(&Vector) -> f64, cfg: FdConfig) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    let d = chart.dim();
    let h = cfg.h;
    let f0 = eval_at(chart, f, &vec![0.0; d]);
    let mut hess = DMatrix::zeros(d, d);
    for i in 0..d {
        let fp = eval_at(chart, f, &offset(d, &[(i, h)]));
        let fm = eval_at(chart, f, &offset(d, &[(i, -h)]));
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let fpp = eval_at(chart, f, &offset(d, &[(i, h), (j, h)]));
            let fpm = eval_at(chart, f, &offset(d, &[(i, h), (j, -h)]));
            let fmp = eval_at(chart, f, &offset(d, &[(i, -h), (j, h)]));
            let fmm = eval_at(chart, f, &offset(d, &[(i, -h), (j, -h)]));
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}

/// Surface Laplacian at the chart center. On the Gaussian space this is the
/// weighted Laplacian `Delta F - <grad F, grad W>`.
pub fn fd_surface_laplacian(chart: &Chart, f: &dyn Fn(&Vector) -> f64, cfg: FdConfig) -> Result<f64> {
    cfg.validate()?;
    let d = chart.dim();
    let h = cfg.h;
    let f0 = eval_at(chart, f, &vec![0.0; d]);
    let mut lap = 0.0;
    for i in 0..d {
        let fp = eval_at(chart, f, &offset(d, &[(i, h)]));
        let fm = eval_at(chart, f, &offset(d, &[(i, -h)]));
        lap += (fp - 2.0 * f0 + fm) / (h * h);
    }
    if chart.space.is_weighted() {
        let g = fd_gradient_coords(chart, f, cfg)?;
        for (gi, e) in g.iter().zip(&chart.frame) {
            lap -= gi * chart.anchor.dot(e);
        }
    }
    Ok(lap)
}
