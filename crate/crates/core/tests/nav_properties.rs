use legibility_core::geometry::{Point, Pose2D};
use legibility_core::nav::{integrate, plan_path, point_along_path, GridConfig, OccupancyGrid, PlannedPath, VelocityCommand};
use legibility_core::scenario::builtin_scenarios;
use proptest::prelude::*;

fn brute_force_point(path: &PlannedPath, start: usize, s: f64) -> Point {
    let mut left = s;
    let pts: Vec<Point> = path.poses.iter().map(|p| p.position()).collect();
    for w in pts[start..].windows(2) {
        let seg = w[0].distance(w[1]);
        if left <= seg {
            return w[0].lerp(w[1], if seg > 0.0 { left / seg } else { 0.0 });
        }
        left -= seg;
    }
    *pts.last().unwrap()
}

proptest! {
    #[test]
    fn integrate_is_reversible(
        x in -10.0..10.0f64, y in -10.0..10.0f64, h in -3.1..3.1f64,
        v in -1.0..1.0f64, w in -2.0..2.0f64, dt in 0.01..0.5f64,
    ) {
        let p = Pose2D::new(x, y, h);
        let c = VelocityCommand::new(v, w);
        let back = integrate(integrate(p, c, dt), -c, dt);
        prop_assert!((back.x - p.x).abs() < 1e-9);
        prop_assert!((back.y - p.y).abs() < 1e-9);
        let dh = (back.heading() - p.heading() + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI;
        prop_assert!(dh.abs() < 1e-9);
    }

    #[test]
    fn point_along_matches_arclength_walk(
        pts in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 2..12),
        s in 0.0..30.0f64,
    ) {
        let pts: Vec<Point> = pts.into_iter().map(|(x, y)| Point::new(x, y)).collect();
        let path = PlannedPath::from_points(&pts);
        prop_assume!(path.len() >= 2);
        let from = path.poses[0];
        let i = path.nearest_index(from.position()).unwrap();
        let got = point_along_path(&path, from, s).unwrap();
        let want = brute_force_point(&path, i, s);
        prop_assert!(got.distance(want) < 1e-9, "{got:?} vs {want:?}");
    }
}

#[test]
fn scenario_paths_are_free_and_deterministic() {
    for (_, spec) in builtin_scenarios() {
        let grid = OccupancyGrid::from_scenario(&spec, &GridConfig::default());
        for (a, b) in [(spec.start, spec.goal1), (spec.goal1, spec.goal2)] {
            let p1 = plan_path(&grid, a, b).unwrap();
            let p2 = plan_path(&grid, a, b).unwrap();
            assert_eq!(serde_json::to_string(&p1).unwrap(), serde_json::to_string(&p2).unwrap());
            assert!(p1.poses.iter().all(|p| grid.is_free(p.position())));
            assert!(p1.poses.first().unwrap().position().distance(a.position()) <= grid.resolution * 1.5);
            for w in p1.poses.windows(2) {
                assert!(w[0].position().distance(w[1].position()) <= grid.resolution * 2f64.sqrt() + 1e-12);
            }
            assert!(p1.cumulative_arclength.windows(2).all(|w| w[1] > w[0]));
        }
    }
}

#[test]
fn turn_leg_one_goes_around_obstacle() {
    let spec = builtin_scenarios().remove(0).1;
    let grid = OccupancyGrid::from_scenario(&spec, &GridConfig::default());
    let path = plan_path(&grid, spec.start, spec.goal1).unwrap();
    let r = spec.robot.circumscribed_radius();
    assert!(path.poses.iter().all(|p| spec.clearance(p.position()) > r));
    assert!(path.poses.iter().any(|p| p.y > 0.2), "detour should swing away from the obstacle");
}
