use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{cos_k, sinc_k, sphere_chart, vers_k, Space, SpaceKind, Vector};
use crate::partitions::{interface_points, interface_sphere, triple_ties, PartitionSpec, TriplePointSample};

/// Truncation radius for unbounded interfaces (Gaussian or Euclidean radius,
/// hyperbolic distance to the apex).
pub const DEFAULT_RADIUS: f64 = 8.0;
/// Smallest number of vertices of a mesh.
pub const MIN_VERTICES: usize = 9;

const POINT_TOL: f64 = 1e-8;
const MEMBER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Resolution {
    PerUnitLength(f64),
    /// Vertices per interface mesh.
    PerInterface(usize),
}

impl Resolution {
    fn vertices(self, length: f64) -> usize {
        let n = match self {
            Resolution::PerUnitLength(r) => (r * length).ceil() as usize + 1,
            Resolution::PerInterface(n) => n,
        };
        n.max(MIN_VERTICES)
    }

    fn validate(self) -> Result<()> {
        match self {
            Resolution::PerUnitLength(r) if !(r > 0.0 && r.is_finite()) => {
                Err(Error::Contract("resolution must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComplexConfig {
    pub resolution: Resolution,
    pub radius: f64,
    /// Replaces `Ric_{M,mu}(n,n)` in the Jacobi potential when set.
    pub ric_override: Option<f64>,
}

impl ComplexConfig {
    pub fn new(resolution: Resolution) -> Self {
        ComplexConfig { resolution, radius: DEFAULT_RADIUS, ric_override: None }
    }
}

/// Arclength parametrization `gamma(s) = p + e S(s) + a C(s)` of a curve of
/// constant curvature, as in the interface charts.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcCurve {
    pub space: Space,
    pub p: Vector,
    pub e: Vector,
    pub a: Vector,
    /// Unit normal at `p`, the normal of the stored interface orientation.
    pub normal: Vector,
    pub omega2: f64,
    pub curvature: f64,
}

impl ArcCurve {
    pub fn point(&self, s: f64) -> Vector {
        &self.p + &self.e * (s * sinc_k(self.omega2, s)) + &self.a * vers_k(self.omega2, s)
    }

    pub fn velocity(&self, s: f64) -> Vector {
        &self.e * cos_k(self.omega2, s) + &self.a * (s * sinc_k(self.omega2, s))
    }

    pub fn acceleration(&self, s: f64) -> Vector {
        &self.e * (-self.omega2 * s * sinc_k(self.omega2, s)) + &self.a * cos_k(self.omega2, s)
    }

    pub fn period(&self) -> Option<f64> {
        (self.omega2 > 1e-12).then(|| 2.0 * std::f64::consts::PI / self.omega2.sqrt())
    }

    /// Parameter of a point of the curve; in `(-P/2, P/2]` on closed curves.
    pub fn param(&self, x: &Vector) -> f64 {
        let d = x - &self.p;
        let sv = self.space.inner(&d, &self.e);
        if self.omega2 > 1e-12 {
            let w = self.omega2.sqrt();
            let c = 1.0 - self.space.inner(&d, &self.a);
            (w * sv).atan2(c) / w
        } else if self.omega2 < -1e-12 {
            let w = (-self.omega2).sqrt();
            (w * sv).asinh() / w
        } else {
            sv
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EndTag {
    Junction(usize),
    /// Truncation end with natural (zero flux) boundary behaviour.
    Free,
}

/// One interface piece between junctions, truncation ends or around a
/// closed curve.
#[derive(Debug, Clone)]
pub struct InterfaceMesh1D {
    pub cells: (usize, usize),
    pub curve: ArcCurve,
    pub s: Vec<f64>,
    pub points: Vec<Vector>,
    /// `e^{-W}` at the vertices.
    pub weights: Vec<f64>,
    /// `e^{-W}` at the edge midpoints.
    pub mid_weights: Vec<f64>,
    /// `None` for closed (periodic) meshes.
    pub ends: Option<[EndTag; 2]>,
    /// Index of the first vertex in the global numbering.
    pub offset: usize,
    pub h: f64,
}

impl InterfaceMesh1D {
    pub fn nv(&self) -> usize {
        self.s.len()
    }

    pub fn closed(&self) -> bool {
        self.ends.is_none()
    }

    /// Edges as local vertex pairs; closed meshes wrap around.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.nv();
        if self.closed() {
            (0..n).map(|k| (k, (k + 1) % n)).collect()
        } else {
            (0..n - 1).map(|k| (k, k + 1)).collect()
        }
    }

    pub fn length(&self) -> f64 {
        self.h * self.edges().len() as f64
    }

    pub fn mid_param(&self, edge: usize) -> f64 {
        self.s[0] + (edge as f64 + 0.5) * self.h
    }

    /// Lumped trapezoid weights `e^{-W} ds`.
    pub fn mass(&self) -> Vec<f64> {
        let n = self.nv();
        (0..n)
            .map(|k| {
                let half = !self.closed() && (k == 0 || k == n - 1);
                self.weights[k] * self.h * if half { 0.5 } else { 1.0 }
            })
            .collect()
    }

    /// Global indices of an end vertex and its next two neighbours inward.
    pub fn end_stencil(&self, side: usize) -> [usize; 3] {
        let n = self.nv();
        let o = self.offset;
        if side == 0 {
            [o, o + 1, o + 2]
        } else {
            [o + n - 1, o + n - 2, o + n - 3]
        }
    }

    /// `W'` along the curve at local vertex `k`.
    pub fn weight_slope(&self, k: usize) -> f64 {
        weight_slope(&self.curve, self.s[k])
    }
}

fn weight_slope(curve: &ArcCurve, s: f64) -> f64 {
    if curve.space.is_weighted() {
        curve.point(s).dot(&curve.velocity(s))
    } else {
        0.0
    }
}

/// A triple point with the three incident mesh ends, listed for the cyclic
/// pairs `(i,j)`, `(j,k)`, `(k,i)` of `cells`. `signs[m]` is `+1` when the
/// mesh stores pair `m` in that order and `-1` otherwise.
#[derive(Debug, Clone)]
pub struct Junction {
    pub point: Vector,
    pub cells: [usize; 3],
    /// `(mesh index, side)` with side 0 the start and 1 the end.
    pub ends: [(usize, usize); 3],
    pub signs: [f64; 3],
    pub bar_ii: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct PartitionComplex {
    pub space: Space,
    pub partition: PartitionSpec,
    pub meshes: Vec<InterfaceMesh1D>,
    pub junctions: Vec<Junction>,
    pub config: ComplexConfig,
}

impl PartitionComplex {
    pub fn dofs(&self) -> usize {
        self.meshes.iter().map(|m| m.nv()).sum()
    }

    pub fn cells(&self) -> usize {
        self.partition.q()
    }

    /// Global lumped mass vector.
    pub fn mass(&self) -> Vec<f64> {
        self.meshes.iter().flat_map(|m| m.mass()).collect()
    }

    /// Values of `g(mesh, s, x)` at all vertices.
    pub fn sample(&self, g: impl Fn(&InterfaceMesh1D, f64, &Vector) -> f64) -> Vec<f64> {
        self.meshes
            .iter()
            .flat_map(|m| m.s.iter().zip(&m.points).map(|(s, x)| g(m, *s, x)).collect::<Vec<_>>())
            .collect()
    }

    /// `Ric_{M,mu}(n,n) + |II|^2` on a mesh.
    pub fn jacobi_potential(&self, mesh: &InterfaceMesh1D) -> f64 {
        let k2 = mesh.curve.curvature.powi(2);
        let ric = self.config.ric_override.unwrap_or(match self.space.kind {
            SpaceKind::SphereS => 1.0,
            SpaceKind::EuclidR => 0.0,
            SpaceKind::HyperH => -1.0,
            SpaceKind::GaussG => 1.0,
        });
        ric + k2
    }

    /// The same complex with the cell order of every interface flipped in
    /// the bookkeeping: each mesh stores `(j, i)` and the orientation signs
    /// change accordingly. Vertex numbering is unchanged.
    pub fn with_flipped_orientation(&self) -> PartitionComplex {
        let mut out = self.clone();
        for m in &mut out.meshes {
            m.cells = (m.cells.1, m.cells.0);
            m.curve.normal = -&m.curve.normal;
            m.curve.curvature = -m.curve.curvature;
        }
        for j in &mut out.junctions {
            for s in &mut j.signs {
                *s = -*s;
            }
        }
        out
    }
}

pub fn build_complex_1d(part: &PartitionSpec, resolution: Resolution) -> Result<PartitionComplex> {
    build_complex_1d_with(part, &ComplexConfig::new(resolution))
}

// Truncation measure of a point: Euclidean radius or distance to the apex.
fn radius_of(space: Space, x: &Vector) -> f64 {
    match space.kind {
        SpaceKind::HyperH => x[x.len() - 1].max(1.0).acosh(),
        _ => x.norm(),
    }
}

// First parameter beyond `s0` in direction `dir` where the curve leaves the
// truncation ball; the ball meets the curve in an interval.
fn exit_param(curve: &ArcCurve, s0: f64, dir: f64, radius: f64) -> Result<f64> {
    let space = curve.space;
    if radius_of(space, &curve.point(s0)) >= radius {
        return Err(Error::Contract(format!("junction outside the truncation radius {radius}")));
    }
    let mut inside = s0;
    let mut step = 0.25;
    let mut outside = None;
    for _ in 0..80 {
        let s = s0 + dir * step;
        if radius_of(space, &curve.point(s)) >= radius {
            outside = Some(s);
            break;
        }
        inside = s;
        step *= 2.0;
    }
    let mut out = outside.ok_or_else(|| Error::Degenerate("curve does not leave the truncation ball".into()))?;
    for _ in 0..200 {
        let mid = 0.5 * (inside + out);
        if radius_of(space, &curve.point(mid)) >= radius {
            out = mid;
        } else {
            inside = mid;
        }
        if (out - inside).abs() < 1e-14 * (1.0 + out.abs()) {
            break;
        }
    }
    Ok(0.5 * (inside + out))
}

struct RawJunction {
    point: Vector,
    cells: [usize; 3],
}

// All triple points, deduplicated. A point shared by more than three cells
// is a quadruple point and rejected.
fn find_junctions(part: &PartitionSpec, radius: f64) -> Result<Vec<RawJunction>> {
    let q = part.q();
    let search = match part.space.kind {
        SpaceKind::GaussG => radius,
        _ => 1e6,
    };
    let mut out: Vec<(Vector, Vec<usize>)> = Vec::new();
    for i in 0..q {
        for j in (i + 1)..q {
            for k in (j + 1)..q {
                let pts = match triple_ties(part, i, j, k, 8, 0, search) {
                    Ok(p) => p,
                    Err(Error::EmptyJunction(..)) => continue,
                    Err(e) => return Err(e),
                };
                for p in pts {
                    match out.iter_mut().find(|(x, _)| (x - &p).norm() < POINT_TOL * (1.0 + p.norm())) {
                        Some((_, cells)) => {
                            for c in [i, j, k] {
                                if !cells.contains(&c) {
                                    cells.push(c);
                                }
                            }
                        }
                        None => out.push((p, vec![i, j, k])),
                    }
                }
            }
        }
    }
    out.into_iter()
        .map(|(point, cells)| {
            if cells.len() > 3 {
                Err(Error::UnresolvedJunction(format!("quadruple point of cells {cells:?} at {:?}", point.as_slice())))
            } else {
                Ok(RawJunction { point, cells: [cells[0], cells[1], cells[2]] })
            }
        })
        .collect()
}

fn curve_for(part: &PartitionSpec, i: usize, j: usize, anchor: &Vector) -> Result<ArcCurve> {
    let space = part.space;
    let sphere = interface_sphere(part, i, j)?;
    let chart = sphere_chart(space, &sphere, anchor)?;
    Ok(ArcCurve {
        space,
        p: anchor.clone(),
        e: chart.frame[0].clone(),
        a: chart.accel().clone(),
        normal: chart.normal.clone(),
        omega2: chart.omega2(),
        curvature: chart.curvature,
    })
}

/// Polyline complex of a planar partition (`n = 2`). Every nonempty
/// interface is cut at its triple points; unbounded pieces are truncated at
/// `config.radius` and get free ends.
pub fn build_complex_1d_with(part: &PartitionSpec, config: &ComplexConfig) -> Result<PartitionComplex> {
    part.validate()?;
    config.resolution.validate()?;
    if part.space.n != 2 {
        return Err(Error::Unsupported(format!("polyline complexes need n = 2, got n = {}", part.space.n)));
    }
    if !(config.radius > 0.0) {
        return Err(Error::Contract("truncation radius must be positive".into()));
    }
    let space = part.space;
    let q = part.q();
    let raw = find_junctions(part, config.radius)?;

    let mut meshes: Vec<InterfaceMesh1D> = Vec::new();
    // (junction, mesh, side) incidences.
    let mut incidences: Vec<(usize, usize, usize)> = Vec::new();
    for i in 0..q {
        for j in (i + 1)..q {
            let on_curve: Vec<usize> =
                (0..raw.len()).filter(|&r| raw[r].cells.contains(&i) && raw[r].cells.contains(&j)).collect();
            let anchor = match on_curve.first() {
                Some(&r) => raw[r].point.clone(),
                None => {
                    let rmax = match space.kind {
                        SpaceKind::SphereS => 1e6,
                        _ => 0.9 * config.radius,
                    };
                    // Without triple points the whole curve lies in one
                    // pair of cells or in none.
                    let pts = interface_points(part, i, j, 64, 0, rmax)?;
                    match pts.into_iter().find(|p| part.pair_gap(i, j, p) > MEMBER_TOL) {
                        Some(p) => p,
                        None => continue,
                    }
                }
            };
            let curve = curve_for(part, i, j, &anchor)?;
            let mut breaks: Vec<(f64, usize)> = on_curve.iter().map(|&r| (curve.param(&raw[r].point), r)).collect();
            breaks.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in breaks.windows(2) {
                if (w[1].0 - w[0].0).abs() < 1e-9 {
                    return Err(Error::UnresolvedJunction("two junctions coincide on an interface".into()));
                }
            }
            // Pieces as (start, end, start tag, end tag).
            let mut pieces: Vec<(f64, f64, Option<EndTag>, Option<EndTag>)> = Vec::new();
            match (curve.period(), breaks.len()) {
                (Some(p), 0) => pieces.push((-0.5 * p, 0.5 * p, None, None)),
                (Some(p), m) => {
                    for t in 0..m {
                        let (s0, r0) = breaks[t];
                        let (s1, r1) = if t + 1 < m { breaks[t + 1] } else { (breaks[0].0 + p, breaks[0].1) };
                        pieces.push((s0, s1, Some(EndTag::Junction(r0)), Some(EndTag::Junction(r1))));
                    }
                }
                (None, 0) => {
                    let lo = exit_param(&curve, 0.0, -1.0, config.radius)?;
                    let hi = exit_param(&curve, 0.0, 1.0, config.radius)?;
                    pieces.push((lo, hi, Some(EndTag::Free), Some(EndTag::Free)));
                }
                (None, m) => {
                    let lo = exit_param(&curve, breaks[0].0, -1.0, config.radius)?;
                    pieces.push((lo, breaks[0].0, Some(EndTag::Free), Some(EndTag::Junction(breaks[0].1))));
                    for t in 0..m - 1 {
                        pieces.push((
                            breaks[t].0,
                            breaks[t + 1].0,
                            Some(EndTag::Junction(breaks[t].1)),
                            Some(EndTag::Junction(breaks[t + 1].1)),
                        ));
                    }
                    let hi = exit_param(&curve, breaks[m - 1].0, 1.0, config.radius)?;
                    pieces.push((breaks[m - 1].0, hi, Some(EndTag::Junction(breaks[m - 1].1)), Some(EndTag::Free)));
                }
            }
            for (s0, s1, t0, t1) in pieces {
                let len = s1 - s0;
                let member = |s: f64| part.pair_gap(i, j, &curve.point(s)) > MEMBER_TOL;
                if !member(s0 + 0.5 * len) {
                    continue;
                }
                if !member(s0 + 0.01 * len) || !member(s1 - 0.01 * len) {
                    return Err(Error::UnresolvedJunction(format!(
                        "interface ({i},{j}) changes cells away from any detected triple point"
                    )));
                }
                let closed = t0.is_none();
                let nv = config.resolution.vertices(len);
                let h = if closed { len / nv as f64 } else { len / (nv - 1) as f64 };
                let s: Vec<f64> = (0..nv).map(|k| s0 + k as f64 * h).collect();
                let points: Vec<Vector> = s.iter().map(|&t| curve.point(t)).collect();
                let rho = |x: &Vector| (-space.weight(x)).exp();
                let weights = points.iter().map(rho).collect();
                let ne = if closed { nv } else { nv - 1 };
                let mid_weights = (0..ne).map(|e| rho(&curve.point(s0 + (e as f64 + 0.5) * h))).collect();
                let idx = meshes.len();
                let ends = match (t0, t1) {
                    (Some(a), Some(b)) => Some([a, b]),
                    _ => None,
                };
                if let Some(ends) = ends {
                    for (side, tag) in ends.iter().enumerate() {
                        if let EndTag::Junction(r) = tag {
                            incidences.push((*r, idx, side));
                        }
                    }
                }
                meshes.push(InterfaceMesh1D {
                    cells: (i, j),
                    curve: curve.clone(),
                    s,
                    points,
                    weights,
                    mid_weights,
                    ends,
                    offset: 0,
                    h,
                });
            }
        }
    }
    if meshes.is_empty() {
        return Err(Error::Degenerate("partition has no interface inside the truncation region".into()));
    }
    let mut offset = 0;
    for m in &mut meshes {
        m.offset = offset;
        offset += m.nv();
    }

    // Junctions without any incident piece lie outside every interface;
    // renumber the used ones.
    let mut junctions = Vec::new();
    let mut renumber = vec![usize::MAX; raw.len()];
    for (r, rj) in raw.iter().enumerate() {
        let inc: Vec<_> = incidences.iter().filter(|x| x.0 == r).collect();
        if inc.is_empty() {
            continue;
        }
        if inc.len() != 3 {
            return Err(Error::UnresolvedJunction(format!(
                "triple point of cells {:?} has {} incident interface ends",
                rj.cells,
                inc.len()
            )));
        }
        let [a, b, c] = rj.cells;
        let sample = TriplePointSample::at(part, a, b, c, rj.point.clone());
        let pairs = [(a, b), (b, c), (c, a)];
        let mut ends = [(0, 0); 3];
        let mut signs = [0.0; 3];
        for (m, &(x, y)) in pairs.iter().enumerate() {
            let (lo, hi) = (x.min(y), x.max(y));
            let hit = inc
                .iter()
                .find(|t| meshes[t.1].cells == (lo, hi))
                .ok_or_else(|| Error::UnresolvedJunction(format!("no mesh of interface ({lo},{hi}) at junction")))?;
            let mesh = &meshes[hit.1];
            let side = hit.2;
            let s_end = if side == 0 { mesh.s[0] } else { mesh.s[mesh.nv() - 1] };
            let outward = mesh.curve.velocity(s_end) * if side == 0 { -1.0 } else { 1.0 };
            let sign = if (x, y) == (lo, hi) { 1.0 } else { -1.0 };
            // Conormals do not depend on the orientation of the pair.
            if (&outward - &sample.conormals[m]).norm() > 1e-6 {
                return Err(Error::UnresolvedJunction(format!(
                    "conormal of ({lo},{hi}) does not match the mesh end at the junction of {:?}",
                    rj.cells
                )));
            }
            ends[m] = (hit.1, side);
            signs[m] = sign;
        }
        renumber[r] = junctions.len();
        junctions.push(Junction { point: rj.point.clone(), cells: rj.cells, ends, signs, bar_ii: sample.bar_ii });
    }
    for m in &mut meshes {
        if let Some(ends) = &mut m.ends {
            for t in ends.iter_mut() {
                if let EndTag::Junction(r) = t {
                    *r = renumber[*r];
                }
            }
        }
    }
    Ok(PartitionComplex { space, partition: part.clone(), meshes, junctions, config: *config })
}
