//! A* against a textbook Dijkstra, and the camera against a rotation-matrix
//! pinhole written from scratch.

mod common;

use common::{dijkstra, reference_pixel};
use owmm_bench::geometry::Vec3;
use owmm_bench::planner::astar_cells;
use owmm_bench::sim::CameraPose;
use owmm_bench::world::{Cell, OccupancyGrid, SceneSpec};
use proptest::prelude::*;

fn scene_from(blocked: &[bool], n: usize) -> SceneSpec {
    let mut s = SceneSpec::empty("grid", n, n, 0.1);
    s.occupancy = OccupancyGrid::new(n, n);
    for (k, &b) in blocked.iter().enumerate() {
        s.occupancy.set_blocked(Cell::new(k % n, k / n), b);
    }
    s
}

fn grid_case() -> impl Strategy<Value = (Vec<bool>, (usize, usize), (usize, usize))> {
    (
        proptest::collection::vec(proptest::bool::weighted(0.3), 32 * 32),
        (0..32usize, 0..32usize),
        (0..32usize, 0..32usize),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn astar_cost_matches_dijkstra((mut blocked, s, g) in grid_case()) {
        blocked[s.1 * 32 + s.0] = false;
        blocked[g.1 * 32 + g.0] = false;
        let scene = scene_from(&blocked, 32);
        let want = dijkstra(&blocked, 32, 32, s, g);
        let got = astar_cells(&scene, Cell::new(s.0, s.1), Cell::new(g.0, g.1));
        match (want, got) {
            (None, None) => {}
            (Some(w), Some((cells, c))) => {
                prop_assert!((w - c).abs() < 1e-9, "dijkstra {w} astar {c}");
                prop_assert_eq!(cells.first().copied(), Some(Cell::new(s.0, s.1)));
                prop_assert_eq!(cells.last().copied(), Some(Cell::new(g.0, g.1)));
                let mut sum = 0.0;
                for p in cells.windows(2) {
                    let (di, dj) = (p[1].i as i64 - p[0].i as i64, p[1].j as i64 - p[0].j as i64);
                    prop_assert!(di.abs() <= 1 && dj.abs() <= 1 && (di, dj) != (0, 0));
                    prop_assert!(!scene.occupancy.is_blocked(p[1]));
                    sum += if di != 0 && dj != 0 { 2f64.sqrt() } else { 1.0 };
                }
                prop_assert!((sum - c).abs() < 1e-9);
            }
            (w, g) => prop_assert!(false, "reachability differs: {w:?} vs {:?}", g.map(|x| x.1)),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn projection_round_trip(
        pos in (-5.0..5.0f64, -5.0..5.0f64, 0.2..2.0f64),
        yaw in -3.1..3.1f64,
        pitch in -0.8..0.8f64,
        uv in (0.0..1.0f64, 0.0..1.0f64),
        range in 0.2..8.0f64,
    ) {
        let cam = CameraPose::new(Vec3::new(pos.0, pos.1, pos.2), yaw, pitch);
        let (u, v) = (uv.0 * cam.width(), uv.1 * cam.height());
        let p = cam.unproject(u, v, range).unwrap();
        let (pu, pv, _) = cam.project_point(p).unwrap();
        let (ru, rv) = reference_pixel(&cam, p.to_array()).unwrap();
        prop_assert!((pu - ru).abs() < 1e-6 && (pv - rv).abs() < 1e-6);
        prop_assert!((pu - u).abs() < 1e-6 && (pv - v).abs() < 1e-6);
        let back = cam.unproject(pu, pv, p.distance(cam.origin())).unwrap();
        prop_assert!(back.distance(p) < 1e-6);
    }
}

#[test]
fn blocked_endpoint_has_no_path() {
    let mut blocked = vec![false; 32 * 32];
    blocked[5 * 32 + 5] = true;
    let scene = scene_from(&blocked, 32);
    assert!(astar_cells(&scene, Cell::new(0, 0), Cell::new(5, 5)).is_none());
    assert_eq!(dijkstra(&blocked, 32, 32, (0, 0), (5, 5)), None);
}
