use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::complex::{EndTag, PartitionComplex};
use super::sparse::SparseMatrix;
use super::MAX_DENSE;
use crate::error::{Error, Result};
use crate::geometry::linalg::min_norm_solve;
use crate::potential::PotentialSpec;
use crate::rng;

const KIRCHHOFF_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Q0Mode {
    LJacForm,
    GradientForm,
    ConjugatedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarginMode {
    ImageOfLV,
    VolumeKernel,
}

/// Junction conditions imposed on a discrete field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldClass {
    /// Dirichlet-Kirchhoff sums only.
    Scalar,
    /// Kirchhoff and conformal boundary conditions.
    Admissible,
    /// Admissible, and `L_V u` satisfies the Kirchhoff sums as well.
    ImageAdmissible,
}

#[derive(Debug, Clone)]
struct EdgeTerm {
    a: usize,
    b: usize,
    h: f64,
    rho: f64,
    // V'/V at the midpoint.
    v_slope: f64,
}

#[derive(Debug, Clone)]
struct EndTerm {
    stencil: [usize; 3],
    h: f64,
    rho: f64,
    dn_v_over_v: f64,
    bar_ii: Option<f64>,
}

impl EndTerm {
    // One-sided second-order outward derivative.
    fn derivative(&self, f: &DVector<f64>) -> f64 {
        let [a, b, c] = self.stencil;
        (3.0 * f[a] - 4.0 * f[b] + f[c]) / (2.0 * self.h)
    }
}

/// Assembled operators of a polyline complex. Matrices act on the global
/// vertex numbering of the complex; each interface carries the values of its
/// stored orientation.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub dofs: usize,
    /// Lumped trapezoid mass `e^{-W} ds`.
    pub mass: DVector<f64>,
    pub potential: DVector<f64>,
    /// `L_Jac 1 = Ric_{M,mu}(n,n) + |II|^2` per vertex.
    pub jacobi_potential: DVector<f64>,
    pub stiffness: SparseMatrix,
    /// Strong weighted Laplacian `f'' - W' f'` (one-sided at ends).
    pub laplacian: SparseMatrix,
    pub l_jac: SparseMatrix,
    /// `u -> V Delta u - u Delta V` in flux form.
    pub l_v: SparseMatrix,
    /// Gradient form of the index form.
    pub q_form: SparseMatrix,
    /// One row per cell: the first variation of its volume.
    pub volume: DMatrix<f64>,
    pub kirchhoff: DMatrix<f64>,
    pub conformal: DMatrix<f64>,
    pub image_kirchhoff: DMatrix<f64>,
    ljac_v_ratio: DVector<f64>,
    edges: Vec<EdgeTerm>,
    ends: Vec<EndTerm>,
}

impl OperatorSet {
    pub fn constraints(&self, class: FieldClass) -> DMatrix<f64> {
        let mut blocks = vec![&self.kirchhoff];
        if matches!(class, FieldClass::Admissible | FieldClass::ImageAdmissible) {
            blocks.push(&self.conformal);
        }
        if class == FieldClass::ImageAdmissible {
            blocks.push(&self.image_kirchhoff);
        }
        stack(&blocks, self.dofs)
    }

    /// Largest constraint violation, each row scaled by its largest entry
    /// and by `max(1, |f|_inf)`.
    pub fn constraint_residual(&self, class: FieldClass, f: &DVector<f64>) -> f64 {
        scaled_residual(&self.constraints(class), f)
    }

    /// `L_V u`.
    pub fn apply_l_v(&self, u: &DVector<f64>) -> DVector<f64> {
        self.l_v.mul_vec(u)
    }
}

fn stack(blocks: &[&DMatrix<f64>], n: usize) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, n);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), (b.nrows(), n)).copy_from(b);
        r += b.nrows();
    }
    out
}

fn scaled_residual(c: &DMatrix<f64>, f: &DVector<f64>) -> f64 {
    let fmax = f.amax().max(1.0);
    (0..c.nrows())
        .map(|i| {
            let row = c.row(i);
            let scale = row.amax().max(1e-300);
            (row * f)[0].abs() / (scale * fmax)
        })
        .fold(0.0, f64::max)
}

pub fn assemble_operators(complex: &PartitionComplex, v: &PotentialSpec) -> Result<OperatorSet> {
    v.validate()?;
    if v.space != complex.space {
        return Err(Error::Contract("potential and complex live on different spaces".into()));
    }
    let n = complex.dofs();
    let q = complex.cells();
    let mass = DVector::from_vec(complex.mass());
    if let Some(w) = mass.iter().find(|w| !(**w > 0.0)) {
        return Err(Error::Degenerate(format!("singular mass (entry {w:e})")));
    }
    let mut potential = DVector::zeros(n);
    let mut jacobi_potential = DVector::zeros(n);
    let mut ljac_v_ratio = DVector::zeros(n);
    let mut stiffness = SparseMatrix::zeros(n, n);
    let mut laplacian = SparseMatrix::zeros(n, n);
    let mut l_v = SparseMatrix::zeros(n, n);
    let mut volume = DMatrix::zeros(q, n);
    let mut edges = Vec::new();
    let mut ends = Vec::new();

    for (mi, m) in complex.meshes.iter().enumerate() {
        let o = m.offset;
        let nv = m.nv();
        let h = m.h;
        let qm = complex.jacobi_potential(m);
        for k in 0..nv {
            let x = &m.points[k];
            let val = v.value(x);
            if !(val > 0.0) {
                return Err(Error::NonPositivePotential(val));
            }
            potential[o + k] = val;
            jacobi_potential[o + k] = qm;
            let vel = m.curve.velocity(m.s[k]);
            let acc = m.curve.acceleration(m.s[k]);
            let d1 = v.derivative(x, &vel);
            let d2 = v.curve_second_derivative(x, &vel, &acc);
            ljac_v_ratio[o + k] = (d2 - m.weight_slope(k) * d1 + qm * val) / val;
            volume[(m.cells.0, o + k)] += mass[o + k];
            volume[(m.cells.1, o + k)] -= mass[o + k];
        }
        for (e, (ka, kb)) in m.edges().into_iter().enumerate() {
            let (a, b) = (o + ka, o + kb);
            let rho = m.mid_weights[e];
            let c = rho / h;
            stiffness.add(a, a, c);
            stiffness.add(b, b, c);
            stiffness.add(a, b, -c);
            stiffness.add(b, a, -c);
            let sm = m.mid_param(e);
            let xm = m.curve.point(sm);
            let v_slope = v.derivative(&xm, &m.curve.velocity(sm)) / v.value(&xm);
            edges.push(EdgeTerm { a, b, h, rho, v_slope });
            // Flux rho (V_a u_b - V_b u_a)/h leaves a and enters b.
            let (va, vb) = (potential[a], potential[b]);
            l_v.add(a, b, c * va / mass[a]);
            l_v.add(a, a, -c * vb / mass[a]);
            l_v.add(b, b, -c * va / mass[b]);
            l_v.add(b, a, c * vb / mass[b]);
        }
        // Strong Laplacian.
        let h2 = h * h;
        for k in 0..nv {
            let g = o + k;
            let ws = m.weight_slope(k);
            let interior = m.closed() || (k > 0 && k + 1 < nv);
            if interior {
                let (prev, next) = (o + (k + nv - 1) % nv, o + (k + 1) % nv);
                laplacian.add(g, prev, 1.0 / h2 + ws / (2.0 * h));
                laplacian.add(g, g, -2.0 / h2);
                laplacian.add(g, next, 1.0 / h2 - ws / (2.0 * h));
            } else {
                // d/ds = dir * (outward-style stencil), dir = -1 at the start.
                let (idx, dir) = if k == 0 { ([g, g + 1, g + 2, g + 3], -1.0) } else { ([g, g - 1, g - 2, g - 3], 1.0) };
                for (t, cf) in [2.0, -5.0, 4.0, -1.0].iter().enumerate() {
                    laplacian.add(g, idx[t], cf / h2);
                }
                for (t, cf) in [3.0, -4.0, 1.0].iter().enumerate() {
                    laplacian.add(g, idx[t], -ws * dir * cf / (2.0 * h));
                }
            }
        }
        if let Some(tags) = m.ends {
            for (side, tag) in tags.iter().enumerate() {
                let stencil = m.end_stencil(side);
                let k_end = stencil[0] - o;
                let x = &m.points[k_end];
                let outward = m.curve.velocity(m.s[k_end]) * if side == 0 { -1.0 } else { 1.0 };
                let rho = m.weights[k_end];
                let ve = potential[stencil[0]];
                let bar_ii = match tag {
                    EndTag::Junction(j) => {
                        let jn = &complex.junctions[*j];
                        let slot = jn.ends.iter().position(|&(mm, ss)| mm == mi && ss == side).ok_or_else(|| {
                            Error::UnresolvedJunction("mesh end missing from its junction".into())
                        })?;
                        Some(jn.bar_ii[slot])
                    }
                    EndTag::Free => None,
                };
                if let EndTag::Junction(j) = tag {
                    // Boundary flux rho V^2 d_n(u/V), with rho V taken at the
                    // junction point so the three incident fluxes share it.
                    let pj = &complex.junctions[*j].point;
                    let pref = (-complex.space.weight(pj)).exp() * v.value(pj);
                    let e = stencil[0];
                    for (t, cf) in [3.0, -4.0, 1.0].iter().enumerate() {
                        let col = stencil[t];
                        l_v.add(e, col, pref * ve * cf / (2.0 * h * potential[col] * mass[e]));
                    }
                }
                ends.push(EndTerm { stencil, h, rho, dn_v_over_v: v.derivative(x, &outward) / ve, bar_ii });
            }
        }
    }

    let mut l_jac = laplacian.clone();
    let mut q_form = stiffness.clone();
    for k in 0..n {
        l_jac.add(k, k, jacobi_potential[k]);
        q_form.add(k, k, -mass[k] * jacobi_potential[k]);
    }
    for e in &ends {
        if let Some(b) = e.bar_ii {
            q_form.add(e.stencil[0], e.stencil[0], -e.rho * b);
        }
    }

    let nj = complex.junctions.len();
    let mut kirchhoff = DMatrix::zeros(nj, n);
    let mut conformal = DMatrix::zeros(2 * nj, n);
    let mut image_kirchhoff = DMatrix::zeros(nj, n);
    for (ji, jn) in complex.junctions.iter().enumerate() {
        let mut g = vec![DVector::<f64>::zeros(n); 3];
        for m in 0..3 {
            let (mesh, side) = jn.ends[m];
            let mm = &complex.meshes[mesh];
            let st = mm.end_stencil(side);
            let sigma = jn.signs[m];
            kirchhoff[(ji, st[0])] += sigma;
            for &(col, val) in l_v.row(st[0]) {
                image_kirchhoff[(ji, col)] += sigma * val;
            }
            // sigma V_e d_n(u/V), the oriented conformal quantity.
            let ve = potential[st[0]];
            for (t, cf) in [3.0, -4.0, 1.0].iter().enumerate() {
                g[m][st[t]] += sigma * ve * cf / (2.0 * mm.h * potential[st[t]]);
            }
        }
        conformal.row_mut(2 * ji).copy_from(&(&g[0] - &g[1]).transpose());
        conformal.row_mut(2 * ji + 1).copy_from(&(&g[1] - &g[2]).transpose());
    }

    Ok(OperatorSet {
        dofs: n,
        mass,
        potential,
        jacobi_potential,
        stiffness,
        laplacian,
        l_jac,
        l_v,
        q_form,
        volume,
        kirchhoff,
        conformal,
        image_kirchhoff,
        ljac_v_ratio,
        edges,
        ends,
    })
}

/// Index form of `f` in one of its three formulations.
pub fn q0_eval(complex: &PartitionComplex, ops: &OperatorSet, f: &DVector<f64>, mode: Q0Mode) -> Result<f64> {
    if f.len() != ops.dofs || complex.dofs() != ops.dofs {
        return Err(Error::DimensionMismatch { expected: ops.dofs, got: f.len() });
    }
    let r = scaled_residual(&ops.kirchhoff, f);
    if !(r <= KIRCHHOFF_TOL) {
        return Err(Error::ConstraintViolation(format!("Kirchhoff residual {r:e}")));
    }
    let w = &ops.mass;
    let qpot: f64 = (0..ops.dofs).map(|k| w[k] * ops.jacobi_potential[k] * f[k] * f[k]).sum();
    let junction_ii: f64 = ops.ends.iter().filter_map(|e| e.bar_ii.map(|b| e.rho * b * f[e.stencil[0]].powi(2))).sum();
    let value = match mode {
        Q0Mode::GradientForm => ops.q_form.quadratic(f),
        Q0Mode::LJacForm => {
            let lf = ops.laplacian.mul_vec(f);
            let bulk: f64 = (0..ops.dofs).map(|k| w[k] * f[k] * lf[k]).sum();
            let flux: f64 = ops.ends.iter().map(|e| e.rho * f[e.stencil[0]] * e.derivative(f)).sum();
            -bulk - qpot + flux - junction_ii
        }
        Q0Mode::ConjugatedForm => {
            let bulk: f64 = ops
                .edges
                .iter()
                .map(|e| {
                    let d = (f[e.b] - f[e.a]) / e.h - e.v_slope * 0.5 * (f[e.a] + f[e.b]);
                    e.h * e.rho * d * d
                })
                .sum();
            let pot: f64 = (0..ops.dofs).map(|k| w[k] * ops.ljac_v_ratio[k] * f[k] * f[k]).sum();
            let bdry: f64 = ops
                .ends
                .iter()
                .map(|e| e.rho * (e.dn_v_over_v - e.bar_ii.unwrap_or(0.0)) * f[e.stencil[0]].powi(2))
                .sum();
            bulk - pot + bdry
        }
    };
    Ok(value)
}

/// First variation of the cell volumes: `sum_j int_{Sigma_ij} f_ij` per cell.
pub fn delta1_vol(complex: &PartitionComplex, f: &DVector<f64>) -> Result<DVector<f64>> {
    let n = complex.dofs();
    if f.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: f.len() });
    }
    let mut out = DVector::zeros(complex.cells());
    for m in &complex.meshes {
        let s: f64 = m.mass().iter().enumerate().map(|(k, w)| w * f[m.offset + k]).sum();
        out[m.cells.0] += s;
        out[m.cells.1] -= s;
    }
    Ok(out)
}

// Basis of {x : c x = 0} by pivoted elimination: identity on the free
// columns. Redundant rows are dropped.
fn constraint_basis(c: &DMatrix<f64>) -> DMatrix<f64> {
    let n = c.ncols();
    let mut r = c.clone();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut is_pivot = vec![false; n];
    for i in 0..r.nrows() {
        let scale = c.row(i).amax();
        let (mut best, mut col) = (0.0, usize::MAX);
        for j in 0..n {
            if !is_pivot[j] && r[(i, j)].abs() > best {
                best = r[(i, j)].abs();
                col = j;
            }
        }
        if col == usize::MAX || best <= 1e-11 * scale.max(1e-300) {
            continue;
        }
        let p = r[(i, col)];
        let row = r.row(i) / p;
        r.row_mut(i).copy_from(&row);
        for k in 0..r.nrows() {
            if k != i && r[(k, col)] != 0.0 {
                let f = r[(k, col)];
                let new = r.row(k) - &row * f;
                r.row_mut(k).copy_from(&new);
            }
        }
        is_pivot[col] = true;
        pivots.push((i, col));
    }
    let free: Vec<usize> = (0..n).filter(|&j| !is_pivot[j]).collect();
    let mut z = DMatrix::zeros(n, free.len());
    for (t, &f) in free.iter().enumerate() {
        z[(f, t)] = 1.0;
        for &(i, j) in &pivots {
            z[(j, t)] = -r[(i, f)];
        }
    }
    z
}

// Minimum of f^T Q f / f^T diag(m) f over the column range of `a`.
fn min_ratio_on_range(a: &DMatrix<f64>, q: &SparseMatrix, m: &DVector<f64>) -> Option<f64> {
    let d = m.map(f64::sqrt);
    let mut b = a.clone();
    for (i, di) in d.iter().enumerate() {
        b.row_mut(i).scale_mut(*di);
    }
    let svd = b.svd(true, false);
    let u = svd.u?;
    let smax = svd.singular_values.max();
    if !(smax > 0.0) {
        return None;
    }
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > 1e-12 * smax).collect();
    if keep.is_empty() {
        return None;
    }
    let mut basis = DMatrix::from_columns(&keep.iter().map(|&i| u.column(i).into_owned()).collect::<Vec<_>>());
    for (i, di) in d.iter().enumerate() {
        basis.row_mut(i).unscale_mut(*di);
    }
    let qb = q.mul_dense(&basis);
    let h = basis.transpose() * qb;
    let h = (&h + h.transpose()) * 0.5;
    Some(h.symmetric_eigenvalues().min())
}

/// Smallest Rayleigh quotient of the index form over the image of `L_V`
/// on admissible fields (norm `int f^2 / V`) or over the fields with
/// vanishing first variation of volume (mass norm).
pub fn stability_margin(complex: &PartitionComplex, ops: &OperatorSet, mode: MarginMode) -> Result<f64> {
    let n = ops.dofs;
    if complex.dofs() != n {
        return Err(Error::DimensionMismatch { expected: n, got: complex.dofs() });
    }
    if n > MAX_DENSE {
        return Err(Error::TooLarge { limit: MAX_DENSE, got: n });
    }
    let (a, norm) = match mode {
        MarginMode::ImageOfLV => {
            let z = constraint_basis(&ops.constraints(FieldClass::ImageAdmissible));
            (ops.l_v.mul_dense(&z), ops.mass.component_div(&ops.potential))
        }
        MarginMode::VolumeKernel => {
            let c = stack(&[&ops.kirchhoff, &ops.volume], n);
            (constraint_basis(&c), ops.mass.clone())
        }
    };
    if a.ncols() == 0 {
        return Err(Error::EmptyAdmissibleSpace);
    }
    min_ratio_on_range(&a, &ops.q_form, &norm).ok_or(Error::EmptyAdmissibleSpace)
}

// Smooth cutoff: 1 near 0, 0 from 1 on.
fn cutoff(t: f64) -> f64 {
    let psi = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let (a, b) = (psi(1.0 - t), psi(t));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// A random smooth field satisfying the junction conditions of `class`:
/// low-frequency cosines on each interface, corrected near the junctions by
/// cut-off polynomials chosen by a minimum-norm solve.
pub fn random_field(complex: &PartitionComplex, ops: &OperatorSet, class: FieldClass, seed: u64) -> Result<DVector<f64>> {
    let n = ops.dofs;
    let mut u = DVector::zeros(n);
    for (mi, m) in complex.meshes.iter().enumerate() {
        let mut r = rng::substream(seed, mi as u64 + 1);
        let len = m.length();
        let freq = if m.closed() { 2.0 } else { 1.0 } * std::f64::consts::PI;
        let modes: Vec<(f64, f64)> =
            (0..5).map(|_| (rng::gaussian(&mut r), rng::uniform(&mut r, 0.0, std::f64::consts::TAU))).collect();
        for k in 0..m.nv() {
            let t = (m.s[k] - m.s[0]) / len;
            u[m.offset + k] =
                modes.iter().enumerate().map(|(j, (amp, ph))| amp * (freq * j as f64 * t + ph).cos() / (1.0 + j as f64)).sum();
        }
    }
    let c = ops.constraints(class);
    if c.nrows() == 0 {
        return Ok(u);
    }
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for m in &complex.meshes {
        let Some(_) = m.ends else { continue };
        let len = m.length();
        for side in 0..2 {
            for p in 0..4 {
                let mut col = DVector::zeros(n);
                for k in 0..m.nv() {
                    let dist = if side == 0 { m.s[k] - m.s[0] } else { m.s[m.nv() - 1] - m.s[k] };
                    let ell = len / 3.0;
                    col[m.offset + k] = cutoff(dist / ell) * (dist / ell).powi(p);
                }
                cols.push(col);
            }
        }
    }
    if cols.is_empty() {
        return Ok(u);
    }
    let b = DMatrix::from_columns(&cols);
    // Row scaling keeps the solve well conditioned; a few refinement passes
    // remove what rounding leaves behind.
    let mut cbs = &c * &b;
    let scale: Vec<f64> = (0..cbs.nrows()).map(|i| cbs.row(i).norm().max(1e-300)).collect();
    for (i, s) in scale.iter().enumerate() {
        cbs.row_mut(i).unscale_mut(*s);
    }
    for _ in 0..4 {
        let mut rhs = -(&c * &u);
        for (i, s) in scale.iter().enumerate() {
            rhs[i] /= s;
        }
        let sol = min_norm_solve(&cbs, &rhs, 1e-13);
        u += &b * &sol.x;
        if scaled_residual(&c, &u) <= 1e-13 {
            break;
        }
    }
    if !(scaled_residual(&c, &u) <= 1e-11) {
        return Err(Error::EmptyAdmissibleSpace);
    }
    Ok(u)
}
