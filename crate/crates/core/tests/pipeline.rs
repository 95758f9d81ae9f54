use voronoi_bubbles::families::random_standard;
use voronoi_bubbles::flatness::solve_flatness;
use voronoi_bubbles::geometry::SpaceKind;
use voronoi_bubbles::mobius::{lift_to_sphere, mobius_apply, pullback_partition, MobiusMap};
use voronoi_bubbles::partitions::{cell_of, estimate_volumes, standard_flat_partition, PartitionSpec};
use voronoi_bubbles::potential::build_potential;
use voronoi_bubbles::verification::{check_conformal_bc, check_ljac_potential, check_stationarity, CheckSpec};
use voronoi_bubbles::Error;

#[test]
fn partition_json_schema() {
    let text = r#"{"space":{"kind":"R","n":2},"cells":[{"c":[1,0],"k":0,"kS":0},{"c":[-1,0],"k":0,"kS":0}]}"#;
    let p: PartitionSpec = serde_json::from_str(text).unwrap();
    p.validate().unwrap();
    assert_eq!(p.space.kind, SpaceKind::EuclidR);
    let back: PartitionSpec = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(back, p);
    let missing = r#"{"space":{"kind":"R","n":2},"cells":[{"c":[1,0],"k":0},{"c":[-1,0],"k":0}]}"#;
    let p: PartitionSpec = serde_json::from_str(missing).unwrap();
    assert!(matches!(p.validate(), Err(Error::MalformedPartition(_))));
}

#[test]
fn construct_certify_verify() {
    for kind in [SpaceKind::SphereS, SpaceKind::EuclidR, SpaceKind::HyperH] {
        let part = random_standard(kind, 3, 4, 31).unwrap();
        let cert = solve_flatness(&part).unwrap();
        assert!(cert.feasible, "{kind:?}");
        let v = build_potential(part.space, &cert).unwrap();
        assert!(check_stationarity(&part, &CheckSpec::algebraic(6, 1)).unwrap().pass);
        assert!(check_conformal_bc(&part, &v, &CheckSpec::algebraic(6, 1)).unwrap().pass);
        assert!(check_ljac_potential(&part, &v, &CheckSpec::finite_difference(6, 1)).unwrap().pass);
    }
}

#[test]
fn pullback_and_lift_are_inverse() {
    let s = mobius_apply(&MobiusMap::random(2, 3, 8), &standard_flat_partition(2, 4).unwrap()).unwrap();
    let r = pullback_partition(&s, SpaceKind::EuclidR, 4096, 0).unwrap();
    let lifted = lift_to_sphere(&r.partition).unwrap();
    for (a, b) in lifted.cells.iter().zip(&s.cells) {
        assert!((&a.c - &b.c).norm() < 1e-14 && (a.k - b.k).abs() < 1e-14);
    }
    // The standard 4-partition of S^2 has equal areas 4π/4.
    let vols = estimate_volumes(&s, 20_000, 2, 8.0).unwrap();
    assert_eq!(vols.len(), 4);
    let total: f64 = vols.iter().map(|v| v.volume.unwrap()).sum();
    assert!((total - 4.0 * std::f64::consts::PI).abs() < 1e-9);
    let flat = standard_flat_partition(2, 4).unwrap();
    let p = -&flat.cells[0].c.normalize();
    assert_eq!(cell_of(&flat, &p).unwrap(), Some(0));
}
