use nalgebra::DVector;
use proptest::prelude::*;

use super::*;
use crate::error::Error;
use crate::families::random_standard;
use crate::flatness::solve_flatness;
use crate::geometry::{GeneralizedSphere, Space, SpaceKind, Vector};
use crate::partitions::{
    gauss_hex_patch, gauss_parallel_lines, gauss_y_partition, interface_sphere, standard_flat_gauss, CellParams,
    PartitionSpec,
};
use crate::potential::{build_potential, PotentialForm, PotentialSpec};
use crate::verification::{check_bochner_closed, check_volume_first_variation, CheckSpec, VOLUME_TOL};

fn v2(x: f64, y: f64) -> Vector {
    Vector::from_column_slice(&[x, y])
}

fn gauss_v() -> PotentialSpec {
    PotentialSpec { space: Space::gauss(2), form: PotentialForm::GaussianConst }
}

fn euclid_v(n: usize) -> PotentialSpec {
    PotentialSpec { space: Space::euclid(n), form: PotentialForm::EuclidQuadratic { theta: Vector::zeros(n), eta: 0.5 } }
}

fn euclid_y() -> PartitionSpec {
    let s = 3f64.sqrt();
    let cells = (0..3)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / 3.0;
            CellParams::euclid(v2(t.cos() / s, t.sin() / s), 0.0, 0.0)
        })
        .collect();
    PartitionSpec::new(Space::euclid(2), cells).unwrap()
}

// Lines y = -a and y = a in the plane, middle strip is cell 0.
fn euclid_strip(a: f64) -> PartitionSpec {
    PartitionSpec::new(
        Space::euclid(2),
        vec![
            CellParams::euclid(v2(0.0, 0.0), 0.0, 0.0),
            CellParams::euclid(v2(0.0, -1.0), 0.0, a),
            CellParams::euclid(v2(0.0, 1.0), 0.0, a),
        ],
    )
    .unwrap()
}

fn hex4() -> PartitionSpec {
    gauss_hex_patch(&[(0, 0), (1, 0), (0, 1), (1, 1)]).unwrap()
}

fn certificate_potential(part: &PartitionSpec) -> PotentialSpec {
    build_potential(part.space, &solve_flatness(part).unwrap()).unwrap()
}

fn with_certificate(part: PartitionSpec) -> (PartitionSpec, PotentialSpec) {
    let v = certificate_potential(&part);
    (part, v)
}

fn complex(part: &PartitionSpec, nv: usize) -> PartitionComplex {
    build_complex_1d(part, Resolution::PerInterface(nv)).unwrap()
}

fn unit_s2() -> GeneralizedSphere {
    GeneralizedSphere::new(Space::euclid(3), Vector::zeros(3), 1.0, Some(0.0)).unwrap()
}

#[test]
fn gauss_y_complex_structure() {
    let cx = complex(&gauss_y_partition(), 50);
    assert_eq!(cx.meshes.len(), 3);
    assert_eq!(cx.junctions.len(), 1);
    let j = &cx.junctions[0];
    assert!(j.point.norm() < 1e-12);
    assert!(j.bar_ii.iter().all(|b| b.abs() < 1e-12));
    let mut signs = j.signs.to_vec();
    signs.sort_by(f64::total_cmp);
    assert_eq!(signs, vec![-1.0, 1.0, 1.0]);
    for m in &cx.meshes {
        assert_eq!(m.nv(), 50);
        assert!(m.s.windows(2).all(|w| w[1] > w[0]));
        assert!(m.weights.iter().all(|w| *w > 0.0));
        let ends = m.ends.unwrap();
        let free = if ends[0] == EndTag::Free { 0 } else { m.nv() - 1 };
        assert_eq!(ends.iter().filter(|e| **e == EndTag::Free).count(), 1);
        assert!((m.points[free].norm() - DEFAULT_RADIUS).abs() < 1e-9);
    }
}

// Independent enumeration: walk each interface circle densely and count the
// arcs on which the pair is the minimizing one.
fn circle_arcs(part: &PartitionSpec, i: usize, j: usize, samples: usize) -> (usize, usize) {
    let (a, b) = (&part.cells[i], &part.cells[j]);
    let kk = a.k - b.k;
    let cc = &a.c - &b.c;
    let dd = 2.0 * (a.k_s.unwrap() - b.k_s.unwrap()) - kk;
    assert!(kk.abs() > 1e-9, "oracle expects circles");
    let center = -&cc / kk;
    let r2 = cc.norm_squared() / (kk * kk) - dd / kk;
    if r2 <= 0.0 {
        return (0, 0);
    }
    let r = r2.sqrt();
    let score = |m: usize, x: &Vector| {
        let c = &part.cells[m];
        c.k * x.norm_squared() + 2.0 * c.c.dot(x) + 2.0 * c.k_s.unwrap() - c.k
    };
    let inside: Vec<bool> = (0..samples)
        .map(|t| {
            let th = std::f64::consts::TAU * (t as f64 + 0.5) / samples as f64;
            let x = &center + v2(th.cos(), th.sin()) * r;
            let own = 0.5 * (score(i, &x) + score(j, &x));
            (0..part.q()).filter(|&m| m != i && m != j).all(|m| score(m, &x) > own)
        })
        .collect();
    let transitions = (0..samples).filter(|&t| inside[t] != inside[(t + 1) % samples]).count();
    let arcs = if transitions == 0 { usize::from(inside[0]) } else { transitions / 2 };
    (arcs, transitions)
}

#[test]
fn euclid_triple_bubble_matches_enumeration() {
    let part = random_standard(SpaceKind::EuclidR, 2, 4, 5).unwrap();
    let cx = complex(&part, 60);
    let (mut arcs, mut ends) = (0, 0);
    for i in 0..4 {
        for j in i + 1..4 {
            let (a, t) = circle_arcs(&part, i, j, 200_000);
            arcs += a;
            ends += t;
        }
    }
    assert_eq!(arcs, 6);
    assert_eq!(ends, 12);
    assert_eq!(cx.meshes.len(), arcs);
    assert_eq!(cx.junctions.len(), ends / 3);
    for j in &cx.junctions {
        for &(m, side) in &j.ends {
            let e = if side == 0 { 0 } else { cx.meshes[m].nv() - 1 };
            assert!((&cx.meshes[m].points[e] - &j.point).norm() < 1e-9);
        }
    }
}

#[test]
fn hex_patch_junctions_are_degree_three() {
    let cx = complex(&hex4(), 40);
    assert_eq!(cx.junctions.len(), 2);
    assert_eq!(cx.meshes.len(), 5);
    let mut incidence = vec![0usize; cx.junctions.len()];
    for m in &cx.meshes {
        for tag in m.ends.unwrap() {
            if let EndTag::Junction(j) = tag {
                incidence[j] += 1;
            }
        }
    }
    assert!(incidence.iter().all(|&d| d == 3));
}

#[test]
fn quadruple_point_rejected() {
    let cells = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
        .iter()
        .map(|&(a, b)| {
            let z = v2(a, b);
            CellParams::new(-&z, 0.5 * z.norm_squared())
        })
        .collect();
    let part = PartitionSpec::new(Space::gauss(2), cells).unwrap();
    match build_complex_1d(&part, Resolution::PerInterface(40)) {
        Err(Error::UnresolvedJunction(msg)) => assert!(msg.contains("quadruple"), "{msg}"),
        other => panic!("expected a quadruple point rejection, got {:?}", other.map(|c| c.junctions.len())),
    }
}

#[test]
fn coarse_resolution_is_clamped() {
    let cx = complex(&gauss_y_partition(), 3);
    assert!(cx.meshes.iter().all(|m| m.nv() == MIN_VERTICES));
    assert!(build_complex_1d(&gauss_y_partition(), Resolution::PerUnitLength(0.0)).is_err());
    let cx = build_complex_1d(&gauss_y_partition(), Resolution::PerUnitLength(10.0)).unwrap();
    assert!(cx.meshes.iter().all(|m| m.nv() == 81));
}

#[test]
fn gauss_line_hermite_action() {
    let part = standard_flat_gauss(2, 2).unwrap();
    let cx = complex(&part, 1601);
    assert_eq!(cx.meshes.len(), 1);
    let ops = assemble_operators(&cx, &gauss_v()).unwrap();
    let m = &cx.meshes[0];
    let t: Vec<f64> = (0..m.nv()).map(|k| m.points[k].dot(&m.curve.velocity(m.s[k]))).collect();
    let lin = DVector::from_iterator(m.nv(), t.iter().cloned());
    let quad = DVector::from_iterator(m.nv(), t.iter().map(|x| x * x - 1.0));
    let a = ops.l_jac.mul_vec(&lin);
    let b = ops.l_jac.mul_vec(&quad);
    for k in 0..m.nv() {
        if t[k].abs() < 4.0 {
            assert!(a[k].abs() < 1e-8, "L_Jac x at {}: {}", t[k], a[k]);
            assert!((b[k] + quad[k]).abs() < 1e-8, "L_Jac (x^2-1) at {}", t[k]);
        }
    }
}

#[test]
fn mass_rows_sum_to_weighted_length() {
    let cx = complex(&gauss_y_partition(), 400);
    let ops = assemble_operators(&cx, &gauss_v()).unwrap();
    // Weighted length of a ray of the normalized Gaussian: sqrt(pi/2)/(2 pi)
    // up to e^{-32}.
    let ray = (std::f64::consts::PI / 2.0).sqrt() / std::f64::consts::TAU;
    for m in &cx.meshes {
        let sum: f64 = (0..m.nv()).map(|k| ops.mass[m.offset + k]).sum();
        assert!((sum - ray).abs() < 1e-4 * ray, "{sum} vs {ray}");
    }
    // Closed unweighted curve: the total is the circumference.
    let s = random_standard(SpaceKind::SphereS, 2, 2, 3).unwrap();
    let cs = complex(&s, 100);
    assert_eq!(cs.meshes.len(), 1);
    let m = &cs.meshes[0];
    let total: f64 = m.mass().iter().sum();
    let r = 1.0 / (1.0 + m.curve.curvature.powi(2)).sqrt();
    assert!((total - std::f64::consts::TAU * r).abs() < 1e-10);
}

#[test]
fn potential_multiples_are_in_the_kernel() {
    let cases = [
        (gauss_y_partition(), gauss_v()),
        (euclid_y(), euclid_v(2)),
        with_certificate(random_standard(SpaceKind::SphereS, 2, 3, 5).unwrap()),
    ];
    for (part, v) in cases {
        let cx = complex(&part, 120);
        let ops = assemble_operators(&cx, &v).unwrap();
        let mut u = ops.potential.clone();
        for (i, m) in cx.meshes.iter().enumerate() {
            for k in 0..m.nv() {
                u[m.offset + k] *= 1.0 + i as f64;
            }
        }
        let f = ops.apply_l_v(&u);
        assert!(f.amax() < 1e-9 * ops.potential.amax(), "{}", f.amax());
    }
}

#[test]
fn delta1_vol_trivial_cases() {
    let cx = complex(&standard_flat_gauss(2, 2).unwrap(), 200);
    let one = DVector::from_element(cx.dofs(), 1.0);
    let d = delta1_vol(&cx, &one).unwrap();
    let len: f64 = cx.mass().iter().sum();
    let (a, b) = cx.meshes[0].cells;
    assert!((d[a] - len).abs() < 1e-14 && (d[b] + len).abs() < 1e-14);

    let cx = complex(&hex4(), 80);
    let ops = assemble_operators(&cx, &gauss_v()).unwrap();
    let f = random_field(&cx, &ops, FieldClass::Scalar, 4).unwrap();
    let d = delta1_vol(&cx, &f).unwrap();
    assert!(d.sum().abs() < 1e-14 * d.amax().max(1.0));
    let flipped = cx.with_flipped_orientation();
    assert_eq!(delta1_vol(&flipped, &f).unwrap(), -&d);
    // The same physical field stored in the flipped bookkeeping.
    assert_eq!(delta1_vol(&flipped, &(-&f)).unwrap(), d);
}

#[test]
fn image_of_l_v_preserves_volume() {
    let cases = [
        (gauss_y_partition(), gauss_v()),
        (hex4(), gauss_v()),
        with_certificate(random_standard(SpaceKind::EuclidR, 2, 4, 5).unwrap()),
    ];
    for (part, v) in cases {
        let cx = complex(&part, 200);
        let ops = assemble_operators(&cx, &v).unwrap();
        let us: Vec<_> = (0..5).map(|s| random_field(&cx, &ops, FieldClass::ImageAdmissible, s).unwrap()).collect();
        let rep = check_volume_first_variation(&cx, &ops, &us, VOLUME_TOL).unwrap();
        assert!(rep.pass, "{rep:?}");
        let rep = check_volume_first_variation(&cx, &ops, &[ops.potential.clone()], VOLUME_TOL).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}

#[test]
fn broken_junction_condition_moves_volume() {
    let cx = complex(&gauss_y_partition(), 200);
    let ops = assemble_operators(&cx, &gauss_v()).unwrap();
    let mut u = random_field(&cx, &ops, FieldClass::ImageAdmissible, 9).unwrap();
    let (m, side) = cx.junctions[0].ends[0];
    u[cx.meshes[m].end_stencil(side)[0]] += 0.1;
    assert!(ops.constraint_residual(FieldClass::Scalar, &u) > 1e-3);
    let rep = check_volume_first_variation(&cx, &ops, &[u], VOLUME_TOL).unwrap();
    assert!(!rep.pass && rep.max > 100.0 * VOLUME_TOL, "{rep:?}");
}

#[test]
fn q0_of_zero_and_constraint_check() {
    let cx = complex(&gauss_y_partition(), 100);
    let ops = assemble_operators(&cx, &gauss_v()).unwrap();
    let zero = DVector::zeros(cx.dofs());
    for mode in [Q0Mode::LJacForm, Q0Mode::GradientForm, Q0Mode::ConjugatedForm] {
        assert_eq!(q0_eval(&cx, &ops, &zero, mode).unwrap(), 0.0);
    }
    let bad = DVector::from_element(cx.dofs(), 1.0);
    assert!(matches!(q0_eval(&cx, &ops, &bad, Q0Mode::GradientForm), Err(Error::ConstraintViolation(_))));
}

fn form_gaps(part: &PartitionSpec, v: &PotentialSpec, nv: usize, seed: u64) -> (f64, f64) {
    let cx = complex(part, nv);
    let ops = assemble_operators(&cx, v).unwrap();
    let f = random_field(&cx, &ops, FieldClass::Scalar, seed).unwrap();
    let grad = q0_eval(&cx, &ops, &f, Q0Mode::GradientForm).unwrap();
    let ljac = q0_eval(&cx, &ops, &f, Q0Mode::LJacForm).unwrap();
    let conj = q0_eval(&cx, &ops, &f, Q0Mode::ConjugatedForm).unwrap();
    let energy = ops.stiffness.quadratic(&f) + f.component_mul(&f).dot(&ops.mass);
    ((ljac - grad).abs() / energy, (conj - grad).abs() / energy)
}

#[test]
fn q0_forms_agree_at_second_order() {
    let cases = [
        (gauss_y_partition(), gauss_v()),
        (euclid_y(), euclid_v(2)),
        with_certificate(random_standard(SpaceKind::SphereS, 2, 3, 5).unwrap()),
        with_certificate(random_standard(SpaceKind::HyperH, 2, 3, 7).unwrap()),
    ];
    for (part, v) in cases {
        let (l1, c1) = form_gaps(&part, &v, 200, 1);
        let (l2, c2) = form_gaps(&part, &v, 400, 1);
        assert!(l1 < 1e-3 && c1 < 1e-3, "{l1} {c1}");
        assert!(l2 < l1 / 3.0, "LJac form not second order: {l1} {l2}");
        // On flat Gaussian pieces the conjugated form equals the gradient
        // form up to rounding.
        assert!(c2 < c1 / 3.0 || c2 < 1e-12, "conjugated form: {c1} {c2}");
    }
}

#[test]
fn gaussian_margins_nonnegative() {
    for part in [gauss_y_partition(), gauss_parallel_lines(0.7).unwrap()] {
        let cx = complex(&part, 200);
        let ops = assemble_operators(&cx, &gauss_v()).unwrap();
        let m = stability_margin(&cx, &ops, MarginMode::ImageOfLV).unwrap();
        assert!(m >= -1e-4, "{m}");
    }
}

#[test]
fn positive_ricci_strip_is_unstable() {
    let part = euclid_strip(0.7);
    let mut cfg = ComplexConfig::new(Resolution::PerInterface(150));
    cfg.ric_override = Some(1.0);
    let cx = build_complex_1d_with(&part, &cfg).unwrap();
    let ops = assemble_operators(&cx, &euclid_v(2)).unwrap();
    let m = stability_margin(&cx, &ops, MarginMode::ImageOfLV).unwrap();
    assert!(m < -1e-2, "{m}");
    let cx = complex(&part, 150);
    let ops = assemble_operators(&cx, &euclid_v(2)).unwrap();
    let m = stability_margin(&cx, &ops, MarginMode::ImageOfLV).unwrap();
    assert!(m >= -1e-4, "{m}");
}

#[test]
fn margin_size_cap() {
    let cx = complex(&gauss_y_partition(), 1400);
    let ops = assemble_operators(&cx, &gauss_v()).unwrap();
    assert!(matches!(stability_margin(&cx, &ops, MarginMode::ImageOfLV), Err(Error::TooLarge { .. })));
}

// Summation by parts for the flux Laplacian (V = 1 on the Gaussian plane):
// <f, L g>_w + f^T K g equals the junction end fluxes f_e rho_e d_n g.
fn sbp_defect(cx: &PartitionComplex, ops: &OperatorSet, f: &DVector<f64>, g: &DVector<f64>) -> f64 {
    let lhs = f.component_mul(&ops.mass).dot(&ops.apply_l_v(g)) + f.dot(&ops.stiffness.mul_vec(g));
    let mut rhs = 0.0;
    for j in &cx.junctions {
        let rho = (-cx.space.weight(&j.point)).exp();
        for &(m, side) in &j.ends {
            let mesh = &cx.meshes[m];
            let st = mesh.end_stencil(side);
            let dn = (3.0 * g[st[0]] - 4.0 * g[st[1]] + g[st[2]]) / (2.0 * mesh.h);
            rhs += f[st[0]] * rho * dn;
        }
    }
    let scale = f.abs().dot(&ops.stiffness.mul_vec(&g.abs()).abs()) + f.abs().dot(&g.abs());
    (lhs - rhs).abs() / scale.max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn summation_by_parts_holds(seed in 0u64..1000, nv in 20usize..120) {
        let cx = complex(&gauss_hex_patch(&[(0, 0), (1, 0), (0, 1)]).unwrap(), nv);
        let ops = assemble_operators(&cx, &gauss_v()).unwrap();
        let f = random_field(&cx, &ops, FieldClass::Scalar, seed).unwrap();
        let g = random_field(&cx, &ops, FieldClass::Admissible, seed + 1).unwrap();
        prop_assert!(sbp_defect(&cx, &ops, &f, &g) < 1e-13);
    }

    #[test]
    fn volume_variation_is_antisymmetric(seed in 0u64..1000, nv in 20usize..120) {
        let (part, v) = with_certificate(random_standard(SpaceKind::SphereS, 2, 4, seed % 7 + 1).unwrap());
        let cx = complex(&part, nv);
        let ops = assemble_operators(&cx, &v).unwrap();
        let f = random_field(&cx, &ops, FieldClass::Scalar, seed).unwrap();
        let d = delta1_vol(&cx, &f).unwrap();
        prop_assert!(d.sum().abs() <= 1e-13 * d.amax().max(1.0));
        let u = random_field(&cx, &ops, FieldClass::ImageAdmissible, seed).unwrap();
        prop_assert!(delta1_vol(&cx, &ops.apply_l_v(&u)).unwrap().amax() < VOLUME_TOL);
    }

    #[test]
    fn operator_symmetry(seed in 0u64..1000) {
        let (part, v) = with_certificate(random_standard(SpaceKind::EuclidR, 2, 3, seed % 5 + 1).unwrap());
        let cx = complex(&part, 60);
        let ops = assemble_operators(&cx, &v).unwrap();
        prop_assert!(ops.stiffness.is_symmetric(1e-12));
        prop_assert!(ops.q_form.is_symmetric(1e-12));
        prop_assert!(ops.mass.iter().all(|w| *w > 0.0));
        let f = random_field(&cx, &ops, FieldClass::Scalar, seed).unwrap();
        prop_assert!(ops.stiffness.quadratic(&f) >= -1e-12);
    }
}

#[test]
fn icosphere_counts_and_area() {
    let m0 = mesh_sphere(&unit_s2(), 0).unwrap();
    assert_eq!((m0.nv(), m0.triangles.len()), (12, 20));
    let m4 = mesh_sphere(&unit_s2(), 4).unwrap();
    let area = m4.area();
    let exact = 4.0 * std::f64::consts::PI;
    assert!((area - exact).abs() < 0.005 * exact);
    assert!(m4.sphere_residual() < 1e-12);
    assert!(m4.mass.iter().all(|w| *w > 0.0));
    assert!((m4.mass.iter().sum::<f64>() - area).abs() < 1e-12 * area);
}

#[test]
fn open_interfaces_are_not_meshed() {
    let plane =
        GeneralizedSphere::new(Space::euclid(3), Vector::from_column_slice(&[0.0, 0.0, 1.0]), 0.0, Some(0.0)).unwrap();
    assert!(matches!(mesh_sphere(&plane, 2), Err(Error::OpenMesh(_))));
}

#[test]
fn sphere_spectrum_matches_harmonics() {
    let mesh = mesh_sphere(&unit_s2(), 4).unwrap();
    let ev = spectrum(&mesh, 5).unwrap();
    assert!(ev[0].abs() < 1e-10);
    for e in &ev[1..4] {
        assert!((e - 2.0).abs() < 0.02, "{e}");
    }
    assert!(ev[4] > 5.0);
    assert!(ev.windows(2).all(|w| w[1] >= w[0]));
    assert!(ev.iter().all(|e| *e >= -1e-10));
}

#[test]
fn spectrum_size_cap() {
    let mesh = mesh_sphere(&unit_s2(), 5).unwrap();
    assert!(mesh.nv() > MAX_DENSE);
    assert!(matches!(spectrum(&mesh, 3), Err(Error::TooLarge { .. })));
}

#[test]
fn brascamp_lieb_on_round_sphere() {
    let mesh = mesh_sphere(&unit_s2(), 5).unwrap();
    let v = euclid_v(3);
    let rep = bl_check(&mesh, &v, 2.0, 20, 11).unwrap();
    assert!(rep.min_gap >= -0.01, "{}", rep.min_gap);
    let vals: Vec<f64> = mesh.vertices.iter().map(|x| v.value(x)).collect();
    let (l, r) = bl_sides(&mesh, &v, 2.0, &vals).unwrap();
    assert!(l.abs() < 1e-20 && r.abs() < 1e-20, "{l} {r}");
}

#[test]
fn bochner_linear_function_on_sphere() {
    let mesh = mesh_sphere(&unit_s2(), 5).unwrap();
    let v = euclid_v(3);
    let spec = CheckSpec::new(1, 0, 0.01).unwrap();
    let u = |x: &Vector| x[2];
    let rep = check_bochner_closed(&mesh, &v, &u, &spec).unwrap();
    assert!(rep.pass, "{rep:?}");
    // V = (|x|^2 + 1)/2 is 1 on the sphere, so lhs = int (Delta z)^2 = 16 pi/3.
    let g = bochner_gap(&mesh, &v, &u, spec.fd).unwrap();
    let exact = 16.0 * std::f64::consts::PI / 3.0;
    assert!((g.lhs - exact).abs() < 0.01 * exact, "{}", g.lhs);
    let kernel = bochner_gap(&mesh, &v, &|x: &Vector| v.value(x), spec.fd).unwrap();
    assert!(kernel.lhs.abs() < 1e-8 && kernel.rhs.abs() < 1e-8, "{kernel:?}");
}

#[test]
fn bochner_gap_decreases_under_refinement() {
    let (part, v) = with_certificate(random_standard(SpaceKind::SphereS, 3, 2, 4).unwrap());
    let sphere = interface_sphere(&part, 0, 1).unwrap();
    let u = random_smooth_function(4, 21);
    let gaps: Vec<f64> = (3..=5)
        .map(|lvl| bochner_gap(&mesh_sphere(&sphere, lvl).unwrap(), &v, &u, Default::default()).unwrap().gap)
        .collect();
    assert!(gaps[2] < 0.02, "{gaps:?}");
    assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "{gaps:?}");
}

