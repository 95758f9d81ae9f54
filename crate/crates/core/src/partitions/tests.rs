use super::*;
use crate::geometry::{basis, vector};
use crate::mobius::{mobius_apply, pullback_partition, MobiusMap};
use proptest::prelude::*;

fn h2_flat_tripod() -> PartitionSpec {
    let v = equidistant_points(3, 1).unwrap();
    let r = (1.0f64 / 3.0).sqrt();
    let cells = v
        .iter()
        .map(|p| CellParams::new(vector(&[p[0] * r, p[1] * r, 0.0]), 0.0))
        .collect();
    PartitionSpec::new(Space::hyper(2), cells).unwrap()
}

#[test]
fn equidistant_point_configurations() {
    for n in 2..6 {
        for q in 2..=n + 2 {
            let pts = equidistant_points(q, n).unwrap();
            assert_eq!(pts.len(), q);
            assert!((&pts[0] - basis(n + 1, 0)).norm() < 1e-14);
            let sum: Vector = pts.iter().fold(Vector::zeros(n + 1), |a, b| a + b);
            assert!(sum.norm() < 1e-13);
            for a in 0..q {
                assert!((pts[a].norm() - 1.0).abs() < 1e-14);
                for b in 0..a {
                    assert!((pts[a].dot(&pts[b]) + 1.0 / (q as f64 - 1.0)).abs() < 1e-13);
                }
            }
        }
    }
    assert!(equidistant_points(1, 3).is_err());
    assert!(equidistant_points(6, 3).is_err());
}

#[test]
fn standard_flat_radius_and_interfaces() {
    let p2 = standard_flat_partition(3, 2).unwrap();
    assert!((p2.cells[0].c.norm() - 0.5).abs() < 1e-15);
    let p3 = standard_flat_partition(2, 3).unwrap();
    assert!((p3.cells[0].c.norm() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    for n in 2..5 {
        for q in 2..=n + 2 {
            let p = standard_flat_partition(n, q).unwrap();
            for i in 0..q {
                for j in 0..q {
                    if i != j {
                        let s = interface_sphere(&p, i, j).unwrap();
                        assert_eq!(s.k, 0.0);
                        assert!((s.c.norm() - 1.0).abs() < 1e-14);
                    }
                }
            }
        }
    }
}

#[test]
fn cell_of_examples() {
    let p = standard_flat_partition(2, 3).unwrap();
    let c0 = &p.cells[0].c;
    assert_eq!(cell_of(&p, &(-c0 / c0.norm())).unwrap(), Some(0));
    // Equidistant from cells 0 and 1, far from 2: on the interface.
    let m = -(&p.cells[0].c + &p.cells[1].c);
    assert_eq!(cell_of(&p, &m.normalize()).unwrap(), None);
    assert_eq!(cell_of(&h2_flat_tripod(), &vector(&[0.0, 0.0, 1.0])).unwrap(), None);
    assert!(cell_of(&p, &vector(&[2.0, 0.0, 0.0])).is_err());
}

#[test]
fn interface_sphere_rejects_diagonal_and_reports_gauss_hyperplane() {
    let p = standard_flat_partition(2, 3).unwrap();
    assert!(interface_sphere(&p, 1, 1).is_err());
    let g = gauss_parallel_lines(0.5).unwrap();
    let s = interface_sphere(&g, 0, 1).unwrap();
    // Level <c,x> + k vanishes on x_2 = 0.5.
    assert!(s.level(&vector(&[3.0, 0.5])).abs() < 1e-15);
    // Cells 1 and 2 never touch; their parameters are not a unit hyperplane.
    assert!(interface_sphere(&g, 1, 2).is_err());
}

#[test]
fn nonempty_interfaces_examples() {
    let p2 = standard_flat_partition(3, 2).unwrap();
    assert!(interface_nonempty(&p2, 0, 1, 256, 1).unwrap());
    let p4 = standard_flat_partition(3, 4).unwrap();
    assert_eq!(nonempty_interfaces(&p4, DEFAULT_SAMPLES, 3).len(), 6);
    // Dense brute-force oracle over the whole sphere: every pair appears as
    // the two smallest scores with a clear gap to the third.
    let mut seen = std::collections::BTreeSet::new();
    let mut r = crate::rng::rng(5);
    for _ in 0..200_000 {
        let x = crate::rng::unit_vector(&mut r, 4);
        let s = p4.normalized_scores(&x);
        let mut idx: Vec<usize> = (0..4).collect();
        idx.sort_by(|a, b| s[*a].partial_cmp(&s[*b]).unwrap());
        if s[idx[1]] - s[idx[0]] < 1e-2 && s[idx[2]] - s[idx[1]] > 1e-2 {
            seen.insert((idx[0].min(idx[1]), idx[0].max(idx[1])));
        }
    }
    assert_eq!(seen.len(), 6);
    assert!(!interface_nonempty(&gauss_parallel_lines(0.5).unwrap(), 1, 2, 1024, 0).unwrap());
}

#[test]
fn hyperbolic_pullback_drops_southern_interfaces() {
    // Caps below p_0 = -0.5 and above p_0 = 0.5 and the band between them:
    // the interface of the southern cap lies in the southern hemisphere.
    let s = Space::sphere(2);
    let k = 0.5 / (0.75f64).sqrt();
    let c01 = vector(&[0.0, 0.0, 1.0 / 0.75f64.sqrt()]);
    let part = PartitionSpec::new(
        s,
        vec![
            CellParams::new(c01.clone(), k),
            CellParams::new(Vector::zeros(3), 0.0),
            CellParams::new(-&c01, k),
        ],
    )
    .unwrap();
    assert!(interface_nonempty(&part, 0, 1, 2048, 2).unwrap());
    let pb = pullback_partition(&part, SpaceKind::HyperH, 4096, 1).unwrap();
    assert_eq!(pb.index, vec![1, 2]);
    // Keep all three cells: the pair (0,1) has no northern point.
    let all = PartitionSpec::new(
        Space::hyper(2),
        part.cells
            .iter()
            .map(|c| {
                let (ch, kh) = crate::mobius::params_h_from_s(&c.c, c.k);
                CellParams::new(ch, kh)
            })
            .collect(),
    )
    .unwrap();
    assert!(!interface_nonempty(&all, 0, 1, 4096, 2).unwrap());
}

#[test]
fn normal_examples() {
    let p = standard_flat_partition(2, 3).unwrap();
    let tp = triple_point_samples(&p, 0, 1, 2, 4, 0).unwrap();
    let x = &tp[0].p;
    let n01 = normal_at(&p, 0, 1, x).unwrap();
    assert_eq!(n01, &p.cells[0].c - &p.cells[1].c);
    assert_eq!(n01.clone() + normal_at(&p, 1, 0, x).unwrap(), Vector::zeros(3));
    // Unit circle in R^2 as the interface of two cells.
    let r2 = PartitionSpec::new(
        Space::euclid(2),
        vec![
            CellParams::euclid(vector(&[0.0, 0.0]), 1.0, 0.0),
            CellParams::euclid(vector(&[0.0, 0.0]), 0.0, 0.0),
        ],
    )
    .unwrap();
    let x = vector(&[0.6, 0.8]);
    assert!((normal_at(&r2, 0, 1, &x).unwrap() - &x).norm() < 1e-15);
    assert!(normal_at(&r2, 0, 1, &vector(&[0.3, 0.1])).is_err());
    let h = PartitionSpec::new(
        Space::hyper(2),
        vec![
            CellParams::new(vector(&[1.0, 0.0, 0.0]), 0.0),
            CellParams::new(Vector::zeros(3), 0.0),
        ],
    )
    .unwrap();
    let n = normal_at(&h, 0, 1, &vector(&[0.0, 0.0, 1.0])).unwrap();
    assert_eq!(n, vector(&[1.0, 0.0, 0.0]));
    assert_eq!(h.space.inner(&n, &n), 1.0);
}

#[test]
fn triple_points_of_standard_partitions() {
    let p = standard_flat_partition(2, 3).unwrap();
    let tp = triple_point_samples(&p, 0, 1, 2, 10, 4).unwrap();
    assert_eq!(tp.len(), 2);
    for t in &tp {
        assert!((t.p[2].abs() - 1.0).abs() < 1e-14);
        assert!(t.bar_ii.iter().all(|b| b.abs() < 1e-15));
    }
    let pb = pullback_partition(&p, SpaceKind::EuclidR, 0, 0).unwrap().partition;
    let tp = triple_point_samples(&pb, 0, 1, 2, 10, 4).unwrap();
    assert!(!tp.is_empty());
    for t in &tp {
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            assert!(pb.interface_sphere_raw(a, b).residual(&t.p) < 1e-10);
        }
    }
    // Standard triple bubble in the plane: four triple junctions, one of them
    // at infinity in the lift, so three finite plus the ones with cell 3.
    let sq = standard_flat_partition(2, 4).unwrap();
    let mv = MobiusMap::random(2, 3, 17);
    let curved = mobius_apply(&mv, &sq).unwrap();
    let rb = pullback_partition(&curved, SpaceKind::EuclidR, 0, 0).unwrap().partition;
    for (i, j, k) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
        let tp = triple_point_samples(&rb, i, j, k, 5, 9).unwrap();
        assert_eq!(tp.len(), 1);
        let t = &tp[0];
        let sum = &t.normals[0] + &t.normals[1] + &t.normals[2];
        assert!(sum.norm() < 1e-10);
        assert!((t.normals[0].dot(&t.normals[1]) + 0.5).abs() < 1e-10);
    }
}

#[test]
fn mean_curvature_examples() {
    let p = standard_flat_partition(3, 2).unwrap();
    let x = interface_samples(&p, 0, 1, 1, 0, 0.0, 10.0).unwrap();
    assert_eq!(weighted_mean_curvature(&p, 0, 1, &x[0]).unwrap(), 0.0);
    let r3 = PartitionSpec::new(
        Space::euclid(3),
        vec![
            CellParams::euclid(Vector::zeros(3), 1.0, 0.0),
            CellParams::euclid(Vector::zeros(3), 0.0, 0.0),
        ],
    )
    .unwrap();
    let x = vector(&[0.0, 0.6, 0.8]);
    assert!((weighted_mean_curvature(&r3, 0, 1, &x).unwrap() - 2.0).abs() < 1e-14);
    // Line x_1 = a: cell 0 is {x_1 < a}, normal e_1.
    let a = 0.7;
    let g = PartitionSpec::new(
        Space::gauss(2),
        vec![CellParams::new(vector(&[1.0, 0.0]), -a), CellParams::new(Vector::zeros(2), 0.0)],
    )
    .unwrap();
    for t in [-2.0, 0.0, 1.5] {
        let h = weighted_mean_curvature(&g, 0, 1, &vector(&[a, t])).unwrap();
        assert!((h + a).abs() < 1e-15);
    }
}

#[test]
fn volume_examples() {
    let p4 = standard_flat_partition(2, 4).unwrap();
    let v = estimate_volumes(&p4, 200_000, 11, DEFAULT_TRUNCATION).unwrap();
    for e in &v {
        let se = e.std_error.unwrap();
        assert!((e.volume.unwrap() - std::f64::consts::PI).abs() < 3.0 * se, "{e:?}");
    }
    let p2 = standard_flat_partition(2, 2).unwrap();
    let v = estimate_volumes(&p2, 100_000, 12, DEFAULT_TRUNCATION).unwrap();
    for e in &v {
        assert!((e.volume.unwrap() - 2.0 * std::f64::consts::PI).abs() < 3.0 * e.std_error.unwrap());
    }
    let g = standard_flat_gauss(2, 2).unwrap();
    let v = estimate_volumes(&g, 100_000, 13, DEFAULT_TRUNCATION).unwrap();
    for e in &v {
        assert!((e.volume.unwrap() - 0.5).abs() < 3.0 * e.std_error.unwrap());
    }
    assert!(estimate_volumes(&g, 100, 13, DEFAULT_TRUNCATION).is_err());
}

#[test]
fn euclidean_cluster_has_one_infinite_cell() {
    let p = standard_flat_partition(2, 4).unwrap();
    let rot = crate::mobius::random_orthogonal(&mut crate::rng::rng(3), 3);
    let rp = mobius_apply(&MobiusMap { moves: vec![crate::mobius::MobiusMove::Rotate(rot)] }, &p).unwrap();
    let r = pullback_partition(&rp, SpaceKind::EuclidR, 0, 0).unwrap().partition;
    let v = estimate_volumes(&r, 20_000, 1, 4.0).unwrap();
    assert_eq!(v.iter().filter(|e| e.infinite).count(), 1);
}

#[test]
fn serde_schema_round_trip() {
    let p = pullback_partition(&standard_flat_partition(2, 3).unwrap(), SpaceKind::EuclidR, 0, 0)
        .unwrap()
        .partition;
    let s = serde_json::to_string(&p).unwrap();
    assert!(s.starts_with("{\"space\":{\"kind\":\"R\",\"n\":2},\"cells\":[{\"c\":["));
    assert!(s.contains("\"kS\":"));
    let back: PartitionSpec = serde_json::from_str(&s).unwrap();
    assert_eq!(back, p);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mobius_images_keep_consistency_and_angles(n in 2usize..5, extra in 0usize..3, seed in 0u64..1000) {
        let q = (2 + extra).min(n + 2);
        let base = standard_flat_partition(n, q).unwrap();
        let p = mobius_apply(&MobiusMap::random(n, 3, seed), &base).unwrap();
        for i in 0..q {
            for j in 0..q {
                if i != j {
                    prop_assert!(interface_sphere(&p, i, j).unwrap().consistency_defect().abs() < 1e-10);
                    let s = p.interface_sphere_raw(i, j);
                    let t = p.interface_sphere_raw(j, i);
                    prop_assert_eq!(&s.c + &t.c, Vector::zeros(n + 1));
                }
            }
        }
        if q >= 3 {
            for t in triple_point_samples(&p, 0, 1, 2, 5, seed).unwrap() {
                let sum = &t.normals[0] + &t.normals[1] + &t.normals[2];
                prop_assert!(sum.norm() < 1e-10);
                prop_assert!((t.normals[1].dot(&t.normals[2]) + 0.5).abs() < 1e-10);
                let kc = t.curvatures[0] + t.curvatures[1] + t.curvatures[2];
                prop_assert!(kc.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cell_of_inside_gap(n in 2usize..5, seed in 0u64..1000) {
        let p = mobius_apply(&MobiusMap::random(n, 3, seed), &standard_flat_partition(n, n + 1).unwrap()).unwrap();
        let mut r = crate::rng::rng(seed);
        for _ in 0..200 {
            let x = crate::rng::unit_vector(&mut r, n + 1);
            let s = p.normalized_scores(&x);
            let mut sorted = s.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if sorted[1] - sorted[0] > 1e-6 {
                let i = s.iter().position(|v| *v == sorted[0]).unwrap();
                prop_assert_eq!(cell_of(&p, &x).unwrap(), Some(i));
            }
        }
    }
}
