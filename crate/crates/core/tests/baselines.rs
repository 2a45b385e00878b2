use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skyroute::baselines::{octile_distance, rsrp_aware_plan, shortest_path, Planner};
use skyroute::eval::{count_handoffs, disconnectivity_distance};
use skyroute::radio::RadioMap;
use skyroute::scenario::{generate_scenario, DeploymentParams};
use skyroute::{GridPoint, GridSpec, Scenario};

fn base(points: usize) -> (Scenario, GridSpec) {
    let mut s = generate_scenario(2, &DeploymentParams::default()).unwrap();
    s.grid = GridSpec { origin: [0.0, 0.0], step: 20.0, points, altitude: 80.0 };
    let grid = s.grid.clone();
    (s, grid)
}

#[test]
fn geodesic_length_is_octile_for_random_pairs() {
    let (mut s, grid) = base(40);
    let map = RadioMap::from_fn(grid, 2, 1, 0, |p, c| Ok(-50.0 - ((p.i + p.j + c) % 3) as f64)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1000 {
        s.start = GridPoint::new(rng.gen_range(0..40), rng.gen_range(0..40));
        s.goal = GridPoint::new(rng.gen_range(0..40), rng.gen_range(0..40));
        let t = shortest_path(&s, &map).unwrap();
        // Exact in step counts; metres only up to summation order.
        let (di, dj) = (s.start.i.abs_diff(s.goal.i), s.start.j.abs_diff(s.goal.j));
        let diagonal = t.waypoints.windows(2).filter(|w| w[0].i != w[1].i && w[0].j != w[1].j).count();
        assert_eq!(diagonal, di.min(dj));
        assert_eq!(t.len() - 1 - diagonal, di.max(dj) - di.min(dj));
        assert!((t.total_distance(&s.grid) - octile_distance(s.start, s.goal, 20.0)).abs() < 1e-9);
        assert!(t.is_well_formed());
    }
}

#[test]
fn coverage_aware_planner_detours_around_a_hole() {
    // A three-column wall of weak signal with a gap along the top row.
    let (mut s, grid) = base(9);
    let map = RadioMap::from_fn(grid, 2, 2, 0, |p, c| {
        let hole = (3..=5).contains(&p.i) && p.j < 8;
        Ok(if hole { -90.0 - c as f64 } else { -50.0 - c as f64 })
    })
    .unwrap();
    s.start = GridPoint::new(0, 0);
    s.goal = GridPoint::new(8, 0);
    let geodesic = shortest_path(&s, &map).unwrap();
    assert!(disconnectivity_distance(&geodesic, &s.grid, s.rsrp_threshold).1 > 0.0);

    let out = rsrp_aware_plan(&s, &map).unwrap();
    let (_, pct) = disconnectivity_distance(&out.best, &s.grid, s.rsrp_threshold);
    assert_eq!(pct, 0.0);
    assert!(out.best.total_distance(&s.grid) > geodesic.total_distance(&s.grid));
    // Strongest-cell association only: the serving cell is always rank 0.
    for (p, c) in out.best.waypoints.iter().zip(&out.best.cells) {
        assert_eq!(*c, map.best(*p).cell);
    }
}

#[test]
fn every_planner_produces_a_valid_mission() {
    let (mut s, grid) = base(7);
    let map = RadioMap::from_fn(grid, 3, 2, 0, |p, c| Ok(-55.0 - ((p.i * 2 + p.j + c * 4) % 13) as f64)).unwrap();
    s.start = GridPoint::new(0, 1);
    s.goal = GridPoint::new(6, 5);
    s.rl.max_episodes = 2_000;
    for planner in Planner::ALL {
        let (t, outcome) = planner.plan(&s, &map).unwrap();
        assert!(t.is_well_formed(), "{planner}");
        assert_eq!(t.first(), Some(s.start));
        assert_eq!(t.last(), Some(s.goal));
        assert!(count_handoffs(&t) < t.len());
        assert_eq!(outcome.is_some(), planner != Planner::Shortest);
    }
}
