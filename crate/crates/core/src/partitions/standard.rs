use super::{CellParams, PartitionSpec};
use crate::error::{Error, Result};
use crate::geometry::{Space, Vector};

/// `q` unit vectors of `R^(n+1)` with pairwise inner products `-1/(q-1)` and
/// zero sum. The first is `e_1`; the others follow by Gram-Schmidt on the
/// regular simplex, so the configuration is deterministic.
pub fn equidistant_points(q: usize, n: usize) -> Result<Vec<Vector>> {
    if q < 2 || q > n + 2 {
        return Err(Error::OutOfRange(format!("q = {q} not in [2, n+2 = {}]", n + 2)));
    }
    simplex_in(q, n + 1)
}

// Regular simplex with q vertices written in the first q-1 coordinates of R^d.
fn simplex_in(q: usize, d: usize) -> Result<Vec<Vector>> {
    if q - 1 > d {
        return Err(Error::OutOfRange(format!("{q} equidistant points do not fit in R^{d}")));
    }
    let qf = q as f64;
    let verts: Vec<Vector> = (0..q)
        .map(|i| {
            let mut v = Vector::from_element(q, -1.0 / qf);
            v[i] += 1.0;
            v.normalize()
        })
        .collect();
    let mut basis: Vec<Vector> = Vec::new();
    for v in &verts {
        if basis.len() == q - 1 {
            break;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = w.dot(b);
                w.axpy(-c, b, 1.0);
            }
        }
        let nw = w.norm();
        if nw > 1e-9 {
            basis.push(w / nw);
        }
    }
    Ok(verts
        .iter()
        .map(|v| {
            let mut out = Vector::zeros(d);
            for (m, b) in basis.iter().enumerate() {
                out[m] = v.dot(b);
            }
            out
        })
        .collect())
}

fn flat_radius(q: usize) -> f64 {
    ((q as f64 - 1.0) / (2.0 * q as f64)).sqrt()
}

/// Voronoi partition of the sphere by `q` equidistant points, scaled so that
/// every interface quasi-center has unit length; all curvatures vanish.
pub fn standard_flat_partition(n: usize, q: usize) -> Result<PartitionSpec> {
    let space = Space::new(crate::geometry::SpaceKind::SphereS, n)?;
    let pts = equidistant_points(q, n)?;
    let r = flat_radius(q);
    // The cell is the argmin of <c_i, p>, so cell i surrounds -c_i.
    let cells = pts.into_iter().map(|v| CellParams::new(v * r, 0.0)).collect();
    PartitionSpec::new(space, cells)
}

/// Flat Gaussian partition by `q <= n+1` equidistant directions: a cone over
/// the standard simplex configuration, with unit interface normals.
pub fn standard_flat_gauss(n: usize, q: usize) -> Result<PartitionSpec> {
    let space = Space::new(crate::geometry::SpaceKind::GaussG, n)?;
    if q < 2 || q > n + 1 {
        return Err(Error::OutOfRange(format!("q = {q} not in [2, n+1 = {}]", n + 1)));
    }
    let pts = simplex_in(q, n)?;
    let r = flat_radius(q);
    let cells = pts.into_iter().map(|v| CellParams::new(v * r, 0.0)).collect();
    PartitionSpec::new(space, cells)
}

/// Three half-lines from the origin at 120 degrees in the Gaussian plane.
pub fn gauss_y_partition() -> PartitionSpec {
    standard_flat_gauss(2, 3).expect("valid")
}

/// Two parallel lines `x_2 = -a` and `x_2 = a` in the Gaussian plane; the
/// middle strip is cell 0.
pub fn gauss_parallel_lines(a: f64) -> Result<PartitionSpec> {
    let v = |x: f64, y: f64| Vector::from_column_slice(&[x, y]);
    PartitionSpec::new(
        Space::gauss(2),
        vec![
            CellParams::new(v(0.0, 0.0), 0.0),
            CellParams::new(v(0.0, -1.0), a),
            CellParams::new(v(0.0, 1.0), a),
        ],
    )
}

/// Euclidean Voronoi diagram of points of the unit triangular lattice, as a
/// flat Gaussian partition. Pass lattice coordinates `(a, b)` for the points
/// `a u + b v` with `u = (1, 0)`, `v = (1/2, sqrt(3)/2)`.
pub fn gauss_hex_patch(lattice: &[(i32, i32)]) -> Result<PartitionSpec> {
    let h = 3f64.sqrt() / 2.0;
    let cells = lattice
        .iter()
        .map(|&(a, b)| {
            let z = Vector::from_column_slice(&[a as f64 + 0.5 * b as f64, h * b as f64]);
            // (|x - z|^2 - |x|^2)/2 = <-z, x> + |z|^2/2.
            let k = 0.5 * z.norm_squared();
            CellParams::new(-z, k)
        })
        .collect();
    PartitionSpec::new(Space::gauss(2), cells)
}
