//! Figures of planar partitions and of plane slices of 3-dimensional ones.
//!
//! Points are drawn in display coordinates `u`: stereographic coordinates on
//! the sphere, the identity on `R^n` and the Gaussian space, and the
//! Poincaré ball on the hyperboloid. In each of them the raw score of a cell
//! times a positive factor is `A|u|^2 + <B, u> + D`, so every interface is a
//! circle or a line in the display, and stays one on a cutting plane.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::Serialize;
use voronoi_bubbles::geometry::{vector, SpaceKind, Vector};
use voronoi_bubbles::mobius::stereo_r;
use voronoi_bubbles::partitions::{CellParams, PartitionSpec};

use crate::failure::CliError;

const SIZE_PX: f64 = 600.0;
const LINE_TOL: f64 = 1e-10;
const BISECTIONS: usize = 60;

#[derive(Debug, Clone)]
pub struct RenderOptions {
    /// `(a, b, c, d)` for the plane `a u_1 + b u_2 + c u_3 = d`; n = 3 only.
    pub plane: Option<[f64; 4]>,
    pub extent: Option<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum Shape {
    Circle { center: [f64; 2], radius: f64 },
    /// Counterclockwise from `start` to `end` (radians, `end > start`).
    Arc { center: [f64; 2], radius: f64, start: f64, end: f64 },
    Segment { from: [f64; 2], to: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Piece {
    pub i: usize,
    pub j: usize,
    #[serde(flatten)]
    pub shape: Shape,
}

#[derive(Debug, Clone)]
pub struct Figure {
    pub pieces: Vec<Piece>,
    pub svg: String,
    pub csv: String,
}

/// Coefficients `(A, B, D)` of `lambda(u) * score_j(p(u))`.
fn display_form(kind: SpaceKind, cell: &CellParams) -> (f64, Vector, f64) {
    let c = &cell.c;
    let k = cell.k;
    match kind {
        SpaceKind::SphereS => {
            let n = c.len() - 1;
            (c[n] + k, c.rows(0, n) * 2.0, k - c[n])
        }
        SpaceKind::HyperH => {
            let n = c.len() - 1;
            (k - c[n], c.rows(0, n) * 2.0, -c[n] - k)
        }
        SpaceKind::EuclidR => (k, c * 2.0, 2.0 * cell.k_s.unwrap_or(0.0) - k),
        SpaceKind::GaussG => (0.0, c.clone(), k),
    }
}

/// The point of the space drawn at display position `u`, if any.
fn space_point(kind: SpaceKind, u: &Vector) -> Option<Vector> {
    match kind {
        SpaceKind::SphereS => Some(stereo_r(u)),
        SpaceKind::EuclidR | SpaceKind::GaussG => Some(u.clone()),
        SpaceKind::HyperH => {
            let r2 = u.norm_squared();
            if r2 >= 1.0 {
                return None;
            }
            let n = u.len();
            let mut y = Vector::zeros(n + 1);
            for a in 0..n {
                y[a] = 2.0 * u[a] / (1.0 - r2);
            }
            y[n] = (1.0 + r2) / (1.0 - r2);
            Some(y)
        }
    }
}

/// Affine parametrization `u = o + s e1 + t e2` of the drawing plane, with
/// `o` orthogonal to `e1` and `e2`.
struct Frame {
    o: Vector,
    e1: Vector,
    e2: Vector,
}

impl Frame {
    fn new(n: usize, plane: Option<[f64; 4]>) -> Result<Frame, CliError> {
        match (n, plane) {
            (2, None) => Ok(Frame { o: Vector::zeros(2), e1: vector(&[1.0, 0.0]), e2: vector(&[0.0, 1.0]) }),
            (2, Some(_)) => Err(CliError::new("Contract", "a cutting plane is only used for n = 3")),
            (3, Some([a, b, c, d])) => {
                let nrm = vector(&[a, b, c]);
                let len = nrm.norm();
                if !(len > 0.0) || !len.is_finite() || !d.is_finite() {
                    return Err(CliError::new("Contract", "cutting plane needs a nonzero finite normal"));
                }
                let nrm = nrm / len;
                let o = &nrm * (d / len);
                // Axis least aligned with the normal, then Gram-Schmidt.
                let m = (0..3).min_by(|&x, &y| nrm[x].abs().total_cmp(&nrm[y].abs())).unwrap_or(0);
                let mut e1 = Vector::zeros(3);
                e1[m] = 1.0;
                e1 -= &nrm * nrm[m];
                let e1 = e1.normalize();
                let e2 = vector(&[
                    nrm[1] * e1[2] - nrm[2] * e1[1],
                    nrm[2] * e1[0] - nrm[0] * e1[2],
                    nrm[0] * e1[1] - nrm[1] * e1[0],
                ]);
                Ok(Frame { o, e1, e2 })
            }
            (3, None) => Err(CliError::new("Contract", "n = 3 partitions need --plane a,b,c,d")),
            _ => Err(CliError::new("Unsupported", format!("rendering needs n = 2 or n = 3 with a plane, got n = {n}"))),
        }
    }

    fn at(&self, w: [f64; 2]) -> Vector {
        &self.o + &self.e1 * w[0] + &self.e2 * w[1]
    }

    /// Restriction of `A|u|^2 + <B,u> + D` to the plane.
    fn restrict(&self, a: f64, b: &Vector, d: f64) -> (f64, [f64; 2], f64) {
        (a, [b.dot(&self.e1), b.dot(&self.e2)], d + a * self.o.norm_squared() + b.dot(&self.o))
    }
}

enum Curve {
    Circle { center: [f64; 2], radius: f64 },
    Line { base: [f64; 2], dir: [f64; 2], range: (f64, f64) },
}

impl Curve {
    fn at(&self, t: f64) -> [f64; 2] {
        match *self {
            Curve::Circle { center, radius } => [center[0] + radius * t.cos(), center[1] + radius * t.sin()],
            Curve::Line { base, dir, .. } => [base[0] + t * dir[0], base[1] + t * dir[1]],
        }
    }
}

/// Parameter interval of the line `base + t dir` inside the square of half
/// width `e`.
fn clip_line(base: [f64; 2], dir: [f64; 2], e: f64) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for a in 0..2 {
        if dir[a].abs() < 1e-300 {
            if base[a].abs() > e {
                return None;
            }
            continue;
        }
        let (t0, t1) = ((-e - base[a]) / dir[a], (e - base[a]) / dir[a]);
        lo = lo.max(t0.min(t1));
        hi = hi.min(t0.max(t1));
    }
    (hi > lo).then_some((lo, hi))
}

fn curve_of(a: f64, b: [f64; 2], d: f64, extent: f64) -> Option<Curve> {
    let scale = a.abs().max(b[0].abs()).max(b[1].abs()).max(d.abs());
    if scale == 0.0 {
        return None;
    }
    if a.abs() <= LINE_TOL * scale {
        let bn = (b[0] * b[0] + b[1] * b[1]).sqrt();
        if bn <= LINE_TOL * scale {
            return None;
        }
        let base = [-d * b[0] / (bn * bn), -d * b[1] / (bn * bn)];
        let dir = [-b[1] / bn, b[0] / bn];
        let range = clip_line(base, dir, extent)?;
        return Some(Curve::Line { base, dir, range });
    }
    let center = [-b[0] / (2.0 * a), -b[1] / (2.0 * a)];
    let r2 = center[0] * center[0] + center[1] * center[1] - d / a;
    (r2 > 0.0).then(|| Curve::Circle { center, radius: r2.sqrt() })
}

struct Scene<'a> {
    part: &'a PartitionSpec,
    frame: Frame,
}

impl Scene<'_> {
    fn point(&self, w: [f64; 2]) -> Option<Vector> {
        space_point(self.part.space.kind, &self.frame.at(w))
    }

    /// Positive where the pair `(i, j)` bounds the partition at `w`.
    fn gap(&self, i: usize, j: usize, w: [f64; 2]) -> f64 {
        match self.point(w) {
            Some(p) => self.part.pair_gap(i, j, &p).min(1.0),
            None => -1.0,
        }
    }
}

fn bisect(f: impl Fn(f64) -> bool, mut inside: f64, mut outside: f64) -> f64 {
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (inside + outside);
        if f(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Visible parameter intervals of a curve.
fn visible_runs(visible: &dyn Fn(f64) -> bool, t0: f64, t1: f64, samples: usize, periodic: bool) -> Vec<(f64, f64)> {
    let m = samples.max(16);
    let step = (t1 - t0) / m as f64;
    let ts: Vec<f64> = (0..m + usize::from(!periodic)).map(|k| t0 + step * k as f64).collect();
    let flags: Vec<bool> = ts.iter().map(|&t| visible(t)).collect();
    let count = flags.len();
    if flags.iter().all(|&f| f) {
        return vec![(t0, t1)];
    }
    let mut runs = Vec::new();
    if periodic {
        for s in 0..count {
            let prev = (s + count - 1) % count;
            if !flags[s] || flags[prev] {
                continue;
            }
            let mut e = s;
            while flags[(e + 1) % count] {
                e += 1;
            }
            let a = bisect(visible, ts[s], ts[s] - step);
            let b = bisect(visible, t0 + step * e as f64, t0 + step * (e + 1) as f64);
            runs.push((a, b));
        }
    } else {
        let mut s = 0;
        while s < count {
            if !flags[s] {
                s += 1;
                continue;
            }
            let mut e = s;
            while e + 1 < count && flags[e + 1] {
                e += 1;
            }
            let a = if s == 0 { ts[0] } else { bisect(visible, ts[s], ts[s - 1]) };
            let b = if e + 1 == count { ts[e] } else { bisect(visible, ts[e], ts[e + 1]) };
            if b > a {
                runs.push((a, b));
            }
            s = e + 1;
        }
    }
    runs
}

fn default_extent(kind: SpaceKind) -> f64 {
    match kind {
        SpaceKind::HyperH => 1.05,
        SpaceKind::GaussG => 4.0,
        SpaceKind::SphereS | SpaceKind::EuclidR => 3.0,
    }
}

fn fmt_svg(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

pub fn render(part: &PartitionSpec, opts: &RenderOptions) -> Result<Figure, CliError> {
    part.validate()?;
    if opts.samples < 16 {
        return Err(CliError::new("OutOfRange", format!("samples = {} below 16", opts.samples)));
    }
    let kind = part.space.kind;
    let frame = Frame::new(part.space.n, opts.plane)?;
    let extent = opts.extent.unwrap_or_else(|| default_extent(kind));
    if !(extent > 0.0) || !extent.is_finite() {
        return Err(CliError::new("Contract", "extent must be positive"));
    }
    let scene = Scene { part, frame };
    let forms: Vec<_> = part.cells.iter().map(|c| display_form(kind, c)).collect();

    let mut pieces = Vec::new();
    for i in 0..part.q() {
        for j in i + 1..part.q() {
            let (a, b, d) = scene.frame.restrict(forms[i].0 - forms[j].0, &(&forms[i].1 - &forms[j].1), forms[i].2 - forms[j].2);
            let Some(curve) = curve_of(a, b, d, extent) else { continue };
            let visible = |t: f64| scene.gap(i, j, curve.at(t)) > 0.0;
            match curve {
                Curve::Circle { center, radius } => {
                    for (s, e) in visible_runs(&visible, 0.0, TAU, opts.samples, true) {
                        let shape = if s == 0.0 && e == TAU {
                            Shape::Circle { center, radius }
                        } else {
                            let s0 = s.rem_euclid(TAU);
                            Shape::Arc { center, radius, start: s0, end: s0 + (e - s) }
                        };
                        pieces.push(Piece { i, j, shape });
                    }
                }
                Curve::Line { range, .. } => {
                    for (s, e) in visible_runs(&visible, range.0, range.1, opts.samples, false) {
                        pieces.push(Piece { i, j, shape: Shape::Segment { from: curve.at(s), to: curve.at(e) } });
                    }
                }
            }
        }
    }
    if pieces.is_empty() {
        return Err(CliError::new("Empty", "no interface is visible in the drawing window"));
    }
    pieces.sort_by(|x, y| (x.i, x.j).cmp(&(y.i, y.j)).then(start_of(&x.shape).total_cmp(&start_of(&y.shape))));
    let svg = svg_of(&pieces, kind, extent);
    let csv = csv_of(&scene, &pieces, opts.samples, part.space.ambient_dim());
    Ok(Figure { pieces, svg, csv })
}

fn start_of(s: &Shape) -> f64 {
    match *s {
        Shape::Circle { .. } => 0.0,
        Shape::Arc { start, .. } => start,
        Shape::Segment { from, .. } => from[0] * 1e6 + from[1],
    }
}

fn svg_of(pieces: &[Piece], kind: SpaceKind, e: f64) -> String {
    let f = fmt_svg;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{px}" height="{px}" viewBox="{} {} {} {}">"#,
        f(-e),
        f(-e),
        f(2.0 * e),
        f(2.0 * e),
        px = SIZE_PX
    );
    let stroke = f(e / 250.0);
    let _ = writeln!(s, r#"<g fill="none" stroke="black" stroke-width="{stroke}">"#);
    if kind == SpaceKind::HyperH {
        let _ = writeln!(s, r#"<circle cx="0.000000" cy="0.000000" r="1.000000" stroke="gray" stroke-dasharray="{}"/>"#, f(e / 50.0));
    }
    // Display y points up; SVG y points down.
    for p in pieces {
        let id = format!("i{}j{}", p.i, p.j);
        match p.shape {
            Shape::Circle { center, radius } => {
                let _ = writeln!(s, r#"<circle class="{id}" cx="{}" cy="{}" r="{}"/>"#, f(center[0]), f(-center[1]), f(radius));
            }
            Shape::Arc { center, radius, start, end } => {
                let (x0, y0) = (center[0] + radius * start.cos(), center[1] + radius * start.sin());
                let (x1, y1) = (center[0] + radius * end.cos(), center[1] + radius * end.sin());
                let large = u8::from(end - start > std::f64::consts::PI);
                // Counterclockwise on screen is the negative SVG sweep.
                let _ = writeln!(
                    s,
                    r#"<path class="{id}" d="M {} {} A {} {} 0 {large} 0 {} {}"/>"#,
                    f(x0),
                    f(-y0),
                    f(radius),
                    f(radius),
                    f(x1),
                    f(-y1)
                );
            }
            Shape::Segment { from, to } => {
                let _ = writeln!(s, r#"<line class="{id}" x1="{}" y1="{}" x2="{}" y2="{}"/>"#, f(from[0]), f(-from[1]), f(to[0]), f(-to[1]));
            }
        }
    }
    s.push_str("</g>\n</svg>\n");
    s
}

fn csv_of(scene: &Scene, pieces: &[Piece], samples: usize, d: usize) -> String {
    let mut s = String::from("i,j,piece,u,v");
    for a in 0..d {
        let _ = write!(s, ",x{a}");
    }
    s.push('\n');
    let mut counter = std::collections::BTreeMap::new();
    for p in pieces {
        let idx = counter.entry((p.i, p.j)).or_insert(0usize);
        let pts: Vec<[f64; 2]> = match p.shape {
            Shape::Circle { center, radius } => (0..samples)
                .map(|k| {
                    let t = TAU * k as f64 / samples as f64;
                    [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                })
                .collect(),
            Shape::Arc { center, radius, start, end } => {
                let m = ((samples as f64 * (end - start) / TAU).ceil() as usize).max(2);
                (0..=m)
                    .map(|k| {
                        let t = start + (end - start) * k as f64 / m as f64;
                        [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                    })
                    .collect()
            }
            Shape::Segment { from, to } => {
                let m = (samples / 8).max(2);
                (0..=m)
                    .map(|k| {
                        let t = k as f64 / m as f64;
                        [from[0] + t * (to[0] - from[0]), from[1] + t * (to[1] - from[1])]
                    })
                    .collect()
            }
        };
        for w in pts {
            let Some(x) = scene.point(w) else { continue };
            let _ = write!(s, "{},{},{},{},{}", p.i, p.j, idx, w[0], w[1]);
            for v in x.iter() {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        *idx += 1;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_and_line_forms() {
        // |u|^2 - 1 = 0 is the unit circle.
        match curve_of(1.0, [0.0, 0.0], -1.0, 3.0) {
            Some(Curve::Circle { center, radius }) => {
                assert_eq!(center, [0.0, 0.0]);
                assert!((radius - 1.0).abs() < 1e-15);
            }
            _ => panic!("expected a circle"),
        }
        // u_1 = 0.5 clipped to the square of half width 2.
        match curve_of(0.0, [1.0, 0.0], -0.5, 2.0) {
            Some(Curve::Line { base, range, .. }) => {
                assert_eq!(base, [0.5, 0.0]);
                assert!((range.1 - range.0 - 4.0).abs() < 1e-12);
            }
            _ => panic!("expected a line"),
        }
        assert!(curve_of(1.0, [0.0, 0.0], 1.0, 3.0).is_none());
        assert!(curve_of(0.0, [1.0, 0.0], -5.0, 2.0).is_none());
    }

    #[test]
    fn poincare_disk_lands_on_hyperboloid() {
        let y = space_point(SpaceKind::HyperH, &vector(&[0.3, -0.4])).unwrap();
        let minkowski = y[0] * y[0] + y[1] * y[1] - y[2] * y[2];
        assert!((minkowski + 1.0).abs() < 1e-14);
        assert!(space_point(SpaceKind::HyperH, &vector(&[0.8, 0.6])).is_none());
    }

    #[test]
    fn display_forms_match_scores() {
        // lambda(u) * score(p(u)) against the closed form at random points.
        let cells = [
            (SpaceKind::SphereS, CellParams::new(vector(&[0.3, -0.2, 0.7]), 0.4)),
            (SpaceKind::HyperH, CellParams::new(vector(&[0.3, -0.2, 0.7]), 0.4)),
            (SpaceKind::EuclidR, CellParams::euclid(vector(&[0.3, -0.2]), 0.4, -0.1)),
            (SpaceKind::GaussG, CellParams::new(vector(&[0.3, -0.2]), 0.4)),
        ];
        for (kind, cell) in cells {
            let part = PartitionSpec { space: voronoi_bubbles::geometry::Space::new(kind, 2).unwrap(), cells: vec![cell.clone()] };
            let (a, b, d) = display_form(kind, &cell);
            for u in [[0.1, 0.2], [-0.5, 0.3], [0.0, -0.7]] {
                let uv = vector(&u);
                let p = space_point(kind, &uv).unwrap();
                let lambda = match kind {
                    SpaceKind::SphereS => uv.norm_squared() + 1.0,
                    SpaceKind::HyperH => 1.0 - uv.norm_squared(),
                    _ => 1.0,
                };
                let lhs = lambda * part.score(0, &p);
                let rhs = a * uv.norm_squared() + b.dot(&uv) + d;
                assert!((lhs - rhs).abs() < 1e-13, "{kind:?}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn slicing_frame_is_orthonormal() {
        let f = Frame::new(3, Some([1.0, 2.0, -2.0, 3.0])).unwrap();
        let n = vector(&[1.0, 2.0, -2.0]) / 3.0;
        assert!((f.e1.norm() - 1.0).abs() < 1e-15 && (f.e2.norm() - 1.0).abs() < 1e-15);
        assert!(f.e1.dot(&f.e2).abs() < 1e-15 && f.e1.dot(&n).abs() < 1e-15 && f.e2.dot(&n).abs() < 1e-15);
        assert!((f.at([0.3, -1.2]).dot(&n) - 1.0).abs() < 1e-14);
        assert!(Frame::new(3, None).is_err());
        assert!(Frame::new(4, Some([1.0, 0.0, 0.0, 0.0])).is_err());
    }
}
