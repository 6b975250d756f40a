//! Grid planning, path following and differential-drive kinematics.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{normalize_angle, polygon_distance, Point, Pose2D};
use crate::scenario::ScenarioSpec;

/// Below this yaw rate `integrate` uses the straight-line update.
pub const ARC_EPSILON: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NavError {
    #[error("no path from ({sx:.3}, {sy:.3}) to ({gx:.3}, {gy:.3})")]
    Unreachable { sx: f64, sy: f64, gx: f64, gy: f64 },
    #[error("{which} pose ({x:.3}, {y:.3}) is outside the grid or in an occupied cell")]
    BlockedEndpoint { which: &'static str, x: f64, y: f64 },
    #[error("path is empty")]
    EmptyPath,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub resolution: f64,
    /// Clearance added on top of the robot's circumscribed radius when inflating.
    pub clearance_margin: f64,
    /// Free border (meters) around the scenario bounds.
    pub border: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            resolution: 0.05,
            clearance_margin: 0.10,
            border: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub col: usize,
    pub row: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    pub origin: Pose2D,
    cells: Vec<bool>,
}

impl OccupancyGrid {
    /// An all-free grid.
    pub fn empty(width: usize, height: usize, resolution: f64, origin: Pose2D) -> Self {
        assert!(resolution > 0.0, "grid resolution must be positive");
        Self {
            resolution,
            width,
            height,
            origin,
            cells: vec![false; width * height],
        }
    }

    /// Rasterizes walls and obstacle, inflated by the robot's circumscribed
    /// radius plus the configured margin. A cell is occupied when its center
    /// is within the inflation radius of any wall or the obstacle.
    pub fn from_scenario(spec: &ScenarioSpec, cfg: &GridConfig) -> Self {
        let (min, max) = spec.bounds();
        let origin = Pose2D::new(min.x - cfg.border, min.y - cfg.border, 0.0);
        let width = ((max.x - min.x + 2.0 * cfg.border) / cfg.resolution).ceil() as usize;
        let height = ((max.y - min.y + 2.0 * cfg.border) / cfg.resolution).ceil() as usize;
        let mut grid = Self::empty(width, height, cfg.resolution, origin);
        let radius = spec.robot.circumscribed_radius() + cfg.clearance_margin;
        let walls = spec.walls();
        let obstacle = spec.obstacle();
        for row in 0..height {
            for col in 0..width {
                let c = grid.cell_center(Cell { col, row });
                let blocked = polygon_distance(&obstacle, c) <= radius
                    || walls.iter().any(|w| w.distance_to(c) <= radius);
                if blocked {
                    grid.set_occupied(Cell { col, row }, true);
                }
            }
        }
        grid
    }

    pub fn set_occupied(&mut self, cell: Cell, occupied: bool) {
        let i = self.index(cell);
        self.cells[i] = occupied;
    }

    pub fn is_occupied(&self, cell: Cell) -> bool {
        self.cells[self.index(cell)]
    }

    fn index(&self, cell: Cell) -> usize {
        assert!(cell.col < self.width && cell.row < self.height);
        cell.row * self.width + cell.col
    }

    pub fn cell_of(&self, p: Point) -> Option<Cell> {
        let fx = ((p.x - self.origin.x) / self.resolution).floor();
        let fy = ((p.y - self.origin.y) / self.resolution).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.width as f64 || fy >= self.height as f64 {
            return None;
        }
        Some(Cell {
            col: fx as usize,
            row: fy as usize,
        })
    }

    pub fn cell_center(&self, cell: Cell) -> Point {
        Point::new(
            self.origin.x + (cell.col as f64 + 0.5) * self.resolution,
            self.origin.y + (cell.row as f64 + 0.5) * self.resolution,
        )
    }

    /// True when the point lies inside the grid in a free cell.
    pub fn is_free(&self, p: Point) -> bool {
        self.cell_of(p).is_some_and(|c| !self.is_occupied(c))
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedPath {
    pub poses: Vec<Pose2D>,
    pub cumulative_arclength: Vec<f64>,
}

impl PlannedPath {
    /// Builds a path from waypoints; headings follow segment directions and
    /// the last pose keeps the previous heading.
    pub fn from_points(points: &[Point]) -> Self {
        let mut poses = Vec::with_capacity(points.len());
        let mut arclength = Vec::with_capacity(points.len());
        let mut s = 0.0;
        for (i, &p) in points.iter().enumerate() {
            if i > 0 {
                s += points[i - 1].distance(p);
            }
            let heading = if i + 1 < points.len() {
                let n = points[i + 1];
                (n.y - p.y).atan2(n.x - p.x)
            } else if i > 0 {
                let q = points[i - 1];
                (p.y - q.y).atan2(p.x - q.x)
            } else {
                0.0
            };
            poses.push(Pose2D::new(p.x, p.y, heading));
            arclength.push(s);
        }
        Self {
            poses,
            cumulative_arclength: arclength,
        }
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.cumulative_arclength.last().copied().unwrap_or(0.0)
    }

    pub fn end(&self) -> Option<Point> {
        self.poses.last().map(Pose2D::position)
    }

    /// Index of the pose nearest to `p` (first one on ties).
    pub fn nearest_index(&self, p: Point) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, pose) in self.poses.iter().enumerate() {
            let d = pose.position().distance(p);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best.map(|(i, _)| i)
    }
}

#[derive(PartialEq)]
struct Frontier {
    f: f64,
    g: f64,
    seq: u64,
    cell: Cell,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    // Min-heap on f, then g, then insertion order.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.g.total_cmp(&self.g))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// E, N, W, S, NE, NW, SW, SE
const NEIGHBORS: [(i64, i64, f64); 8] = [
    (1, 0, 1.0),
    (0, 1, 1.0),
    (-1, 0, 1.0),
    (0, -1, 1.0),
    (1, 1, SQRT_2),
    (-1, 1, SQRT_2),
    (-1, -1, SQRT_2),
    (1, -1, SQRT_2),
];

fn octile(a: Cell, b: Cell) -> f64 {
    let dx = (a.col as f64 - b.col as f64).abs();
    let dy = (a.row as f64 - b.row as f64).abs();
    dx.max(dy) + (SQRT_2 - 1.0) * dx.min(dy)
}

/// A* over the 8-connected grid; diagonal moves may not cut occupied
/// corners. The cell sequence is then shortcut along free lines of sight and
/// densified to grid spacing, running from the start cell center to the
/// goal cell center.
pub fn plan_path(grid: &OccupancyGrid, start: Pose2D, goal: Pose2D) -> Result<PlannedPath, NavError> {
    let blocked = |which, p: Pose2D| NavError::BlockedEndpoint {
        which,
        x: p.x,
        y: p.y,
    };
    let s = grid
        .cell_of(start.position())
        .filter(|&c| !grid.is_occupied(c))
        .ok_or_else(|| blocked("start", start))?;
    let g = grid
        .cell_of(goal.position())
        .filter(|&c| !grid.is_occupied(c))
        .ok_or_else(|| blocked("goal", goal))?;

    let n = grid.width * grid.height;
    let idx = |c: Cell| c.row * grid.width + c.col;
    let mut best_g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;

    best_g[idx(s)] = 0.0;
    heap.push(Frontier {
        f: octile(s, g),
        g: 0.0,
        seq,
        cell: s,
    });

    while let Some(Frontier { g: cost, cell, .. }) = heap.pop() {
        let ci = idx(cell);
        if closed[ci] {
            continue;
        }
        closed[ci] = true;
        if cell == g {
            break;
        }
        for &(dc, dr, step) in &NEIGHBORS {
            let col = cell.col as i64 + dc;
            let row = cell.row as i64 + dr;
            if col < 0 || row < 0 || col >= grid.width as i64 || row >= grid.height as i64 {
                continue;
            }
            let next = Cell {
                col: col as usize,
                row: row as usize,
            };
            if grid.is_occupied(next) {
                continue;
            }
            if dc != 0 && dr != 0 {
                let side_a = Cell { col: next.col, row: cell.row };
                let side_b = Cell { col: cell.col, row: next.row };
                if grid.is_occupied(side_a) || grid.is_occupied(side_b) {
                    continue;
                }
            }
            let ni = idx(next);
            let tentative = cost + step;
            if tentative < best_g[ni] {
                best_g[ni] = tentative;
                parent[ni] = ci;
                seq += 1;
                heap.push(Frontier {
                    f: tentative + octile(next, g),
                    g: tentative,
                    seq,
                    cell: next,
                });
            }
        }
    }

    if !closed[idx(g)] {
        return Err(NavError::Unreachable {
            sx: start.x,
            sy: start.y,
            gx: goal.x,
            gy: goal.y,
        });
    }

    let mut chain = vec![idx(g)];
    while *chain.last().unwrap() != idx(s) {
        chain.push(parent[*chain.last().unwrap()]);
    }
    chain.reverse();
    let cells: Vec<Point> = chain
        .into_iter()
        .map(|i| {
            grid.cell_center(Cell {
                col: i % grid.width,
                row: i / grid.width,
            })
        })
        .collect();
    Ok(PlannedPath::from_points(&densify(&shortcut(grid, &cells), grid.resolution)))
}

/// True when every sample along the segment lies in a free cell.
fn line_of_sight(grid: &OccupancyGrid, a: Point, b: Point) -> bool {
    let steps = (a.distance(b) / (grid.resolution / 4.0)).ceil().max(1.0) as usize;
    (0..=steps).all(|k| grid.is_free(a.lerp(b, k as f64 / steps as f64)))
}

/// Drops intermediate cells while the straight line between kept waypoints
/// stays free, removing the 45° staircase of 8-connected paths.
fn shortcut(grid: &OccupancyGrid, cells: &[Point]) -> Vec<Point> {
    if cells.len() <= 2 {
        return cells.to_vec();
    }
    let mut out = vec![cells[0]];
    let mut anchor = 0;
    let mut i = 1;
    while i < cells.len() {
        if i + 1 < cells.len() && line_of_sight(grid, cells[anchor], cells[i + 1]) {
            i += 1;
            continue;
        }
        out.push(cells[i]);
        anchor = i;
        i += 1;
    }
    out
}

/// Subdivides each segment so consecutive points are at most `spacing` apart.
fn densify(waypoints: &[Point], spacing: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for w in waypoints.windows(2) {
        let n = (w[0].distance(w[1]) / spacing - 1e-9).ceil().max(1.0) as usize;
        out.extend((0..n).map(|k| w[0].lerp(w[1], k as f64 / n as f64)));
    }
    out.extend(waypoints.last());
    out
}

/// The point `s` meters further along the path than the pose nearest to
/// `from`, linearly interpolated; clamps to the final pose.
pub fn point_along_path(path: &PlannedPath, from: Pose2D, s: f64) -> Result<Point, NavError> {
    let start = path.nearest_index(from.position()).ok_or(NavError::EmptyPath)?;
    let target = path.cumulative_arclength[start] + s.max(0.0);
    let arc = &path.cumulative_arclength;
    if target >= path.length() {
        return Ok(path.poses[path.len() - 1].position());
    }
    // First index past `start` whose arclength reaches the target.
    let hi = start + arc[start..].partition_point(|&a| a < target);
    if hi == start {
        return Ok(path.poses[start].position());
    }
    let lo = hi - 1;
    let span = arc[hi] - arc[lo];
    let t = if span > 0.0 { (target - arc[lo]) / span } else { 0.0 };
    Ok(path.poses[lo].position().lerp(path.poses[hi].position(), t))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocityCommand {
    pub linear: f64,
    pub angular: f64,
}

impl VelocityCommand {
    pub const ZERO: VelocityCommand = VelocityCommand {
        linear: 0.0,
        angular: 0.0,
    };

    pub fn new(linear: f64, angular: f64) -> Self {
        Self { linear, angular }
    }

    pub fn is_zero(&self) -> bool {
        self.linear == 0.0 && self.angular == 0.0
    }
}

impl std::ops::Neg for VelocityCommand {
    type Output = VelocityCommand;

    fn neg(self) -> Self::Output {
        VelocityCommand::new(-self.linear, -self.angular)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FollowerLimits {
    pub max_linear: f64,
    pub max_angular: f64,
    pub lookahead: f64,
}

impl Default for FollowerLimits {
    fn default() -> Self {
        Self {
            max_linear: 0.6,
            max_angular: 1.0,
            lookahead: 0.7,
        }
    }
}

/// Pure pursuit toward the lookahead point. Forward speed scales with the
/// cosine of the heading error (zero past ±90°, turning in place); the yaw
/// rate is the pursuit curvature at nominal speed. When the yaw rate
/// saturates, forward speed is scaled by the same factor so the commanded
/// curvature is kept.
pub fn follow_step(pose: Pose2D, path: &PlannedPath, limits: &FollowerLimits) -> Result<VelocityCommand, NavError> {
    let target = point_along_path(path, pose, limits.lookahead)?;
    let local = pose.to_local(target);
    let dist_sq = local.x * local.x + local.y * local.y;
    if dist_sq < 1e-18 {
        return Ok(VelocityCommand::ZERO);
    }
    let alpha = local.y.atan2(local.x);
    let mut linear = limits.max_linear * alpha.cos().max(0.0);
    // Do not overshoot a target closer than the lookahead.
    let dist = dist_sq.sqrt();
    if dist < limits.lookahead {
        linear *= dist / limits.lookahead;
    }
    let mut angular = 2.0 * limits.max_linear * local.y / dist_sq;
    if angular.abs() > limits.max_angular {
        let scale = limits.max_angular / angular.abs();
        angular = limits.max_angular * angular.signum();
        linear *= scale;
    }
    Ok(VelocityCommand::new(
        linear.clamp(-limits.max_linear, limits.max_linear),
        angular,
    ))
}

/// Unicycle update over `dt`, exact for constant commands.
pub fn integrate(pose: Pose2D, cmd: VelocityCommand, dt: f64) -> Pose2D {
    let theta = pose.heading();
    let dtheta = cmd.angular * dt;
    let (dx, dy) = if cmd.angular.abs() < ARC_EPSILON {
        let d = cmd.linear * dt;
        (d * theta.cos(), d * theta.sin())
    } else {
        let chord = 2.0 * (cmd.linear / cmd.angular) * (dtheta / 2.0).sin();
        let mid = theta + dtheta / 2.0;
        (chord * mid.cos(), chord * mid.sin())
    };
    Pose2D::new(pose.x + dx, pose.y + dy, normalize_angle(theta + dtheta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn straight_path(n: usize, step: f64) -> PlannedPath {
        let pts: Vec<Point> = (0..n).map(|i| Point::new(i as f64 * step, 0.0)).collect();
        PlannedPath::from_points(&pts)
    }

    #[test]
    fn empty_grid_straight_line() {
        let grid = OccupancyGrid::empty(10, 10, 1.0, Pose2D::new(-0.5, -0.5, 0.0));
        let path = plan_path(&grid, Pose2D::new(0.0, 0.0, 0.0), Pose2D::new(9.0, 0.0, 0.0)).unwrap();
        assert_eq!(path.len(), 10);
        assert_eq!(path.length(), 9.0);
        assert!(path.poses.iter().all(|p| p.y == 0.0 && p.heading() == 0.0));
    }

    #[test]
    fn occupied_goal_is_an_error() {
        let mut grid = OccupancyGrid::empty(10, 10, 1.0, Pose2D::new(-0.5, -0.5, 0.0));
        grid.set_occupied(Cell { col: 9, row: 0 }, true);
        let err = plan_path(&grid, Pose2D::new(0.0, 0.0, 0.0), Pose2D::new(9.0, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, NavError::BlockedEndpoint { which: "goal", .. }));
    }

    #[test]
    fn walled_off_goal_is_unreachable() {
        let mut grid = OccupancyGrid::empty(10, 10, 1.0, Pose2D::new(-0.5, -0.5, 0.0));
        for row in 0..10 {
            grid.set_occupied(Cell { col: 5, row }, true);
        }
        let err = plan_path(&grid, Pose2D::new(0.0, 0.0, 0.0), Pose2D::new(9.0, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, NavError::Unreachable { .. }));
    }

    #[test]
    fn planner_routes_around_a_block_and_is_deterministic() {
        let mut grid = OccupancyGrid::empty(20, 20, 0.5, Pose2D::new(0.0, 0.0, 0.0));
        for row in 0..15 {
            grid.set_occupied(Cell { col: 10, row }, true);
        }
        let a = plan_path(&grid, Pose2D::new(1.0, 1.0, 0.0), Pose2D::new(9.0, 1.0, 0.0)).unwrap();
        let b = plan_path(&grid, Pose2D::new(1.0, 1.0, 0.0), Pose2D::new(9.0, 1.0, 0.0)).unwrap();
        assert_eq!(a, b);
        assert!(a.poses.iter().all(|p| grid.is_free(p.position())));
        for w in a.poses.windows(2) {
            assert!(w[0].position().distance(w[1].position()) <= SQRT_2 * 0.5 + 1e-12);
        }
        assert!(a.cumulative_arclength.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn point_along_straight_path() {
        let path = straight_path(41, 0.05);
        let origin = Pose2D::new(0.0, 0.0, 0.0);
        let p = point_along_path(&path, origin, 1.0).unwrap();
        assert!((p.x - 1.0).abs() < 1e-12 && p.y == 0.0);
        assert_eq!(point_along_path(&path, origin, 0.0).unwrap(), Point::new(0.0, 0.0));
        let mid = Pose2D::new(0.52, 0.3, 0.0);
        assert_eq!(point_along_path(&path, mid, 0.0).unwrap(), path.poses[10].position());
    }

    #[test]
    fn point_along_empty_path_errors() {
        let path = PlannedPath::from_points(&[]);
        assert_eq!(
            point_along_path(&path, Pose2D::new(0.0, 0.0, 0.0), 1.0),
            Err(NavError::EmptyPath)
        );
    }

    /// Walks vertex by vertex, accumulating segment lengths.
    fn brute_force_walk(points: &[Point], start: usize, s: f64) -> Point {
        let mut remaining = s;
        for i in start..points.len() - 1 {
            let seg = points[i].distance(points[i + 1]);
            if remaining <= seg {
                return points[i].lerp(points[i + 1], remaining / seg);
            }
            remaining -= seg;
        }
        *points.last().unwrap()
    }

    #[test]
    fn point_along_matches_brute_force_walk() {
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(0.05, 0.0),
            Point::new(0.1, 0.05),
            Point::new(0.15, 0.1),
            Point::new(0.15, 0.15),
            Point::new(0.2, 0.2),
            Point::new(0.25, 0.2),
        ];
        let path = PlannedPath::from_points(&pts);
        let from = Pose2D::new(0.09, 0.04, 0.0);
        for k in 0..60 {
            let s = k as f64 * 0.01;
            let got = point_along_path(&path, from, s).unwrap();
            let want = brute_force_walk(&pts, 2, s);
            assert!(got.distance(want) < 1e-12, "s={s}: {got:?} vs {want:?}");
        }
        // Past the end clamps to the final pose.
        assert_eq!(point_along_path(&path, from, 10.0).unwrap(), pts[6]);
    }

    #[test]
    fn follower_aligned_goes_full_speed() {
        let path = straight_path(100, 0.05);
        let cmd = follow_step(Pose2D::new(0.0, 0.0, 0.0), &path, &FollowerLimits::default()).unwrap();
        assert_eq!(cmd.angular, 0.0);
        assert_eq!(cmd.linear, 0.6);
    }

    #[test]
    fn follower_turns_left_toward_left_target() {
        let path = straight_path(100, 0.05);
        let cmd = follow_step(Pose2D::new(0.0, 0.0, -FRAC_PI_2), &path, &FollowerLimits::default()).unwrap();
        assert!(cmd.angular > 0.0);
        assert_eq!(cmd.angular, 1.0);
        assert!(cmd.linear.abs() < 1e-12);
    }

    #[test]
    fn follower_empty_path_errors() {
        let path = PlannedPath::from_points(&[]);
        assert_eq!(
            follow_step(Pose2D::new(0.0, 0.0, 0.0), &path, &FollowerLimits::default()),
            Err(NavError::EmptyPath)
        );
    }

    #[test]
    fn integrate_straight_and_rotation() {
        let p = integrate(Pose2D::new(0.0, 0.0, 0.0), VelocityCommand::new(1.0, 0.0), 0.1);
        assert_eq!((p.x, p.y, p.heading()), (0.1, 0.0, 0.0));
        let r = integrate(Pose2D::new(0.0, 0.0, 0.0), VelocityCommand::new(0.0, PI), 1.0);
        assert_eq!((r.x, r.y), (0.0, 0.0));
        assert_eq!(r.heading(), PI);
    }

    #[test]
    fn integrate_arc_matches_fine_substeps() {
        let cmd = VelocityCommand::new(1.0, FRAC_PI_2);
        let exact = integrate(Pose2D::new(0.0, 0.0, 0.0), cmd, 2.0);
        // Independent midpoint (RK2) integration of the unicycle ODE.
        let n = 1_000_000;
        let h = 2.0 / n as f64;
        let (mut x, mut y, mut th) = (0.0_f64, 0.0_f64, 0.0_f64);
        for _ in 0..n {
            let thm = th + 0.5 * h * cmd.angular;
            x += h * cmd.linear * thm.cos();
            y += h * cmd.linear * thm.sin();
            th += h * cmd.angular;
        }
        assert!((exact.x - x).abs() < 1e-6 && (exact.y - y).abs() < 1e-6);
        assert!((exact.heading() - PI).abs() < 1e-12);
        // Half circle of radius 2/π ends at (0, 4/π).
        assert!(exact.x.abs() < 1e-12);
        assert!((exact.y - 4.0 / PI).abs() < 1e-12);
    }
}
