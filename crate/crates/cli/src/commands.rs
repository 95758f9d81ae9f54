use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use voronoi_bubbles::discrete::{
    assemble_operators, build_complex_1d_with, q0_eval, random_field, stability_margin, ComplexConfig, FieldClass,
    MarginMode, Q0Mode, Resolution,
};
use voronoi_bubbles::flatness::{classify_hypo_epi, solve_flatness, FlatnessStatus};
use voronoi_bubbles::geometry::{Space, SpaceKind};
use voronoi_bubbles::mobius::{mobius_apply, pullback_partition, MobiusMap};
use voronoi_bubbles::partitions::{
    estimate_volumes, gauss_hex_patch, gauss_parallel_lines, nonempty_interfaces, standard_flat_gauss,
    standard_flat_partition, PartitionSpec, DEFAULT_SAMPLES,
};
use voronoi_bubbles::potential::{build_potential, PotentialSpec};
use voronoi_bubbles::verification::{
    check_conformal_bc, check_ljac_potential, check_ric_v, check_stationarity, check_three_tensor,
    check_volume_first_variation, CheckSpec, VerificationReport, VOLUME_TOL,
};

use crate::args::{
    Cli, Command, ConstructArgs, Family, InputArgs, RenderArgs, StabilityArgs, VerifyArgs, VolumesArgs,
};
use crate::failure::{CliError, Outcome};
use crate::io::{read_json, read_partition, read_potential, to_json, write_output};
use crate::render;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Construct(a) => construct(a, cli.seed, out),
        Command::Flatness(a) => flatness(a, cli.seed, out),
        Command::Potential(a) => potential(a, cli.seed, out),
        Command::Verify(a) => verify(a, cli.seed, out),
        Command::Stability(a) => stability(a, cli.seed, out),
        Command::Volumes(a) => volumes(a, cli.seed, out),
        Command::Render(a) => render_cmd(a, cli.seed, out),
    }
}

fn header(command: &str, seed: u64) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command));
    m.insert("version".into(), json!(VERSION));
    m.insert("seed".into(), json!(seed));
    m
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn emit(report: serde_json::Map<String, Value>, out: Option<&Path>) -> Result<(), CliError> {
    write_output(out, &to_json(&Value::Object(report)))
}

fn log(record: Value) {
    eprintln!("{record}");
}

/// Lattice points of the unit triangular lattice ordered by distance to the
/// origin, ties broken by angle in `[0, 2π)`.
pub fn nearest_lattice_points(q: usize) -> Vec<(i32, i32)> {
    let r = (q as f64).sqrt() as i32 + 2;
    let mut pts: Vec<(i32, i32, f64, f64)> = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            let x = a as f64 + 0.5 * b as f64;
            let y = 3f64.sqrt() / 2.0 * b as f64;
            let d2 = (a * a + a * b + b * b) as f64;
            let ang = y.atan2(x).rem_euclid(std::f64::consts::TAU);
            pts.push((a, b, d2, ang));
        }
    }
    pts.sort_by(|p, s| p.2.total_cmp(&s.2).then(p.3.total_cmp(&s.3)));
    pts.into_iter().take(q).map(|p| (p.0, p.1)).collect()
}

fn mobius_map(a: &ConstructArgs, seed: u64) -> Result<Option<MobiusMap>, CliError> {
    let mut map = match &a.mobius {
        Some(p) => {
            let m: MobiusMap = read_json(p)?;
            m.validate(a.n).map_err(|e| CliError::from(e).with_path(p))?;
            Some(m)
        }
        None => None,
    };
    if let Some(k) = a.random_moves {
        let r = MobiusMap::random(a.n, k, seed);
        map = Some(match map {
            Some(mut m) => {
                m.moves.extend(r.moves);
                m
            }
            None => r,
        });
    }
    Ok(map)
}

pub fn build_partition(a: &ConstructArgs, seed: u64) -> Result<(PartitionSpec, Option<Vec<usize>>), CliError> {
    Space::new(a.space.into(), a.n)?;
    let kind: SpaceKind = a.space.into();
    if kind == SpaceKind::GaussG {
        if a.mobius.is_some() || a.random_moves.is_some() {
            return Err(CliError::new("Unsupported", "no Möbius images on the Gaussian space"));
        }
        let part = match a.family {
            Family::Standard => standard_flat_gauss(a.n, a.q)?,
            Family::Hex | Family::Lines if a.n != 2 => {
                return Err(CliError::new("OutOfRange", format!("family needs n = 2, got n = {}", a.n)))
            }
            Family::Hex => {
                if a.q < 2 {
                    return Err(CliError::new("OutOfRange", format!("q = {} below 2", a.q)));
                }
                gauss_hex_patch(&nearest_lattice_points(a.q))?
            }
            Family::Lines => {
                if a.q != 3 {
                    return Err(CliError::new("OutOfRange", format!("parallel lines have q = 3, got q = {}", a.q)));
                }
                gauss_parallel_lines(a.gap)?
            }
        };
        return Ok((part, None));
    }
    if a.family != Family::Standard {
        return Err(CliError::new("Unsupported", "lattice families exist on the Gaussian space only"));
    }
    let mut part_s = standard_flat_partition(a.n, a.q)?;
    if let Some(map) = mobius_map(a, seed)? {
        part_s = mobius_apply(&map, &part_s)?;
    }
    match kind {
        SpaceKind::SphereS => Ok((part_s, None)),
        _ => {
            let pb = pullback_partition(&part_s, kind, DEFAULT_SAMPLES, seed)?;
            let index = (kind == SpaceKind::HyperH).then_some(pb.index);
            Ok((pb.partition, index))
        }
    }
}

fn construct(a: &ConstructArgs, seed: u64, out: Option<&Path>) -> Result<Outcome, CliError> {
    let (part, index) = build_partition(a, seed)?;
    let pairs = nonempty_interfaces(&part, DEFAULT_SAMPLES, seed);
    let defect = pairs
        .iter()
        .map(|&(i, j)| part.interface_sphere_raw(i, j).consistency_defect().abs())
        .fold(0.0, f64::max);
    let mut rec = json!({ "consistency": { "interfaces": pairs.len(), "maxDefect": defect } });
    if let Some(ix) = index {
        rec["retainedIndex"] = json!(ix);
    }
    log(rec);
    write_output(out, &to_json(&part))?;
    Ok(Outcome::Pass)
}

fn status_name(s: FlatnessStatus) -> &'static str {
    match s {
        FlatnessStatus::Feasible => "Feasible",
        FlatnessStatus::NearlyFeasible => "NearlyFeasible",
        FlatnessStatus::OutsideBall => "OutsideBall",
        FlatnessStatus::Infeasible => "Infeasible",
    }
}

fn flatness(a: &InputArgs, seed: u64, out: Option<&Path>) -> Result<Outcome, CliError> {
    let part = read_partition(&a.partition)?;
    let cert = solve_flatness(&part)?;
    let status = cert.status();
    let mut r = header("flatness", seed);
    r.insert("space".into(), value(&part.space));
    r.insert("status".into(), json!(status_name(status)));
    r.insert("certificate".into(), value(&cert));
    if part.space.kind == SpaceKind::HyperH && cert.feasible {
        r.insert("classification".into(), value(&classify_hypo_epi(&part)?));
    }
    emit(r, out)?;
    Ok(Outcome::from_pass(status == FlatnessStatus::Feasible))
}

fn potential_for(part: &PartitionSpec, path: Option<&Path>) -> Result<PotentialSpec, CliError> {
    let v = match path {
        Some(p) => read_potential(p)?,
        None => build_potential(part.space, &solve_flatness(part)?)?,
    };
    if v.space != part.space {
        return Err(CliError::new(
            "Contract",
            format!("potential lives on {:?}^{}, partition on {:?}^{}", v.space.kind, v.space.n, part.space.kind, part.space.n),
        ));
    }
    Ok(v)
}

fn potential(a: &InputArgs, seed: u64, out: Option<&Path>) -> Result<Outcome, CliError> {
    let part = read_partition(&a.partition)?;
    let cert = solve_flatness(&part)?;
    let v = build_potential(part.space, &cert)?;
    let mut r = header("potential", seed);
    r.insert("potential".into(), value(&v));
    r.insert("expectedLJac".into(), json!(v.expected_ljac()));
    r.insert("expectedRicV".into(), json!(v.expected_ric_v()));
    r.insert("certificate".into(), value(&cert));
    emit(r, out)?;
    Ok(Outcome::Pass)
}

fn has_adjacent_triple(part: &PartitionSpec, seed: u64) -> bool {
    let pairs = nonempty_interfaces(part, DEFAULT_SAMPLES, seed);
    let adj = |a: usize, b: usize| pairs.contains(&(a.min(b), a.max(b)));
    let q = part.q();
    (0..q).any(|i| (i + 1..q).any(|j| adj(i, j) && (j + 1..q).any(|k| adj(i, k) && adj(j, k))))
}

fn verify(a: &VerifyArgs, seed: u64, out: Option<&Path>) -> Result<Outcome, CliError> {
    let part = read_partition(&a.partition)?;
    let v = potential_for(&part, a.potential.as_deref())?;
    let alg = CheckSpec::new(a.samples, seed, a.algebraic_tol)?;
    let fd = CheckSpec::new(a.samples, seed, a.fd_tol)?;
    let mut skipped = Vec::new();
    let mut checks: Vec<VerificationReport> = vec![check_stationarity(&part, &alg)?];
    if has_adjacent_triple(&part, seed) {
        checks.push(check_three_tensor(&part, &alg)?);
    } else {
        skipped.push("threeTensor");
    }
    checks.push(check_conformal_bc(&part, &v, &alg)?);
    checks.push(check_ljac_potential(&part, &v, &fd)?);
    if part.space.n == 2 && part.space.kind != SpaceKind::GaussG {
        skipped.push("RicV");
    } else {
        checks.push(check_ric_v(&part, &v, &fd)?);
    }
    let pass = checks.iter().all(|c| c.pass);
    let mut r = header("verify", seed);
    r.insert("space".into(), value(&part.space));
    r.insert("checks".into(), value(&checks));
    r.insert("skipped".into(), json!(skipped));
    r.insert("pass".into(), json!(pass));
    emit(r, out)?;
    Ok(Outcome::from_pass(pass))
}

fn stability(a: &StabilityArgs, seed: u64, out: Option<&Path>) -> Result<Outcome, CliError> {
    let part = read_partition(&a.partition)?;
    let v = potential_for(&part, a.potential.as_deref())?;
    if !(a.tol > 0.0) {
        return Err(CliError::new("Contract", "tolerance must be positive"));
    }
    let config = ComplexConfig { radius: a.radius, ..ComplexConfig::new(Resolution::PerInterface(a.resolution)) };
    let complex = build_complex_1d_with(&part, &config)?;
    let ops = assemble_operators(&complex, &v)?;
    let image = stability_margin(&complex, &ops, MarginMode::ImageOfLV)?;
    let kernel = stability_margin(&complex, &ops, MarginMode::VolumeKernel)?;
    let mut fields = Vec::with_capacity(a.trials);
    let mut sampled = f64::INFINITY;
    for t in 0..a.trials {
        let u = random_field(&complex, &ops, FieldClass::ImageAdmissible, seed.wrapping_add(t as u64))?;
        let f = ops.apply_l_v(&u);
        let norm2: f64 = (0..f.len()).map(|i| ops.mass[i] * f[i] * f[i] / ops.potential[i]).sum();
        if norm2 > 0.0 {
            sampled = sampled.min(q0_eval(&complex, &ops, &f, Q0Mode::LJacForm)? / norm2);
        }
        fields.push(u);
    }
    let volume = check_volume_first_variation(&complex, &ops, &fields, VOLUME_TOL)?;
    let pass = image >= -a.tol && volume.pass && !(sampled < -a.tol);
    let mut r = header("stability", seed);
    r.insert("space".into(), value(&part.space));
    r.insert("resolution".into(), json!(a.resolution));
    r.insert("interfaces".into(), json!(complex.meshes.len()));
    r.insert("junctions".into(), json!(complex.junctions.len()));
    r.insert("marginImageOfLV".into(), json!(image));
    r.insert("marginVolumeKernel".into(), json!(kernel));
    r.insert("sampledQ0Min".into(), if sampled.is_finite() { json!(sampled) } else { Value::Null });
    r.insert("volumeFirstVariation".into(), value(&volume));
    r.insert("tol".into(), json!(a.tol));
    r.insert("pass".into(), json!(pass));
    emit(r, out)?;
    Ok(Outcome::from_pass(pass))
}

fn volumes(a: &VolumesArgs, seed: u64, out: Option<&Path>) -> Result<Outcome, CliError> {
    let part = read_partition(&a.partition)?;
    let cells = estimate_volumes(&part, a.samples, seed, a.truncation)?;
    let mut r = header("volumes", seed);
    r.insert("space".into(), value(&part.space));
    r.insert("samples".into(), json!(a.samples));
    r.insert("truncation".into(), json!(a.truncation));
    r.insert("cells".into(), value(&cells));
    emit(r, out)?;
    Ok(Outcome::Pass)
}

fn render_cmd(a: &RenderArgs, seed: u64, out: Option<&Path>) -> Result<Outcome, CliError> {
    let part = read_partition(&a.partition)?;
    let plane = match &a.plane {
        Some(p) if p.len() == 4 => Some([p[0], p[1], p[2], p[3]]),
        Some(p) => return Err(CliError::new("Usage", format!("--plane needs 4 numbers a,b,c,d, got {}", p.len()))),
        None => None,
    };
    let fig = render::render(&part, &render::RenderOptions { plane, extent: a.extent, samples: a.samples })?;
    write_output(Some(&a.svg), &fig.svg)?;
    write_output(Some(&a.csv), &fig.csv)?;
    let mut r = header("render", seed);
    r.insert("space".into(), value(&part.space));
    r.insert("pieces".into(), value(&fig.pieces));
    r.insert("svg".into(), json!(a.svg.display().to_string()));
    r.insert("csv".into(), json!(a.csv.display().to_string()));
    emit(r, out)?;
    Ok(Outcome::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_points_by_distance() {
        let pts = nearest_lattice_points(7);
        assert_eq!(pts[0], (0, 0));
        // The six unit neighbours, counterclockwise from (1, 0).
        assert_eq!(&pts[1..], &[(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]);
        let d2 = |(a, b): (i32, i32)| a * a + a * b + b * b;
        let more = nearest_lattice_points(19);
        assert!(more.windows(2).all(|w| d2(w[0]) <= d2(w[1])));
        assert_eq!(more.iter().filter(|&&p| d2(p) == 3).count(), 6);
    }
}
