//! Coverage graph construction and barrier counting.
//!
//! Sensors become vertices; two sensors are linked when their distance is at
//! most `min(2·Rs, Rtx)`, so the sensing disks of adjacent sensors overlap and
//! any cycle of the graph traces a gap-free ring of disks. A barrier is a
//! cycle whose polygon winds exactly once around the region's center.
//!
//! Winding is tracked combinatorially through a cut ray from the center: every
//! edge carries the signed number of times its segment crosses the ray when
//! traversed from its lower to its higher endpoint index.

mod count;
mod flow;
mod oracle;

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::deployment::{Point, SensorField};
use crate::error::{Error, Result};

pub use count::{count_barriers, count_barriers_with, BarrierCount, CountOptions};
pub use oracle::{brute_force_barriers, ORACLE_MAX_VERTICES};

/// Distance below which a sensor or an edge is considered to touch the center.
pub const CENTER_EPS: f64 = 1e-9;

/// Angular clearance kept between the cut ray and every sensor.
const RAY_CLEARANCE: f64 = 1e-9;

/// Binary sensing model: a point is detected iff it lies within `rs` of the
/// sensor, boundary included.
pub fn is_covered(point: Point, sensor: Point, rs: f64) -> bool {
    point.dist(sensor) <= rs
}

/// Upper bound on the number of disjoint barriers when each needs `k`
/// sensors: `floor(n / k)`.
pub fn max_barrier_paths(n: usize, k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::Validation(
            "sensors per barrier must be at least 1".into(),
        ));
    }
    Ok(n / k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    /// Net crossings of the cut ray when walking `a -> b` (`+1` is
    /// counter-clockwise). Reversing the direction negates it.
    pub crossing: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageGraph {
    /// Sensor positions relative to the region center.
    positions: Vec<Point>,
    link_threshold: f64,
    cut_angle: f64,
    edges: Vec<GraphEdge>,
    /// `(neighbor, crossing sign walking from this vertex to neighbor)`.
    adjacency: Vec<Vec<(usize, i8)>>,
    /// Pairs within the link threshold whose segment passes through the
    /// center. Their winding contribution is undefined, so they are dropped.
    excluded: Vec<(usize, usize)>,
}

/// Builds the coverage graph of a sensor field with link threshold
/// `min(2·Rs, Rtx)`.
pub fn build_coverage_graph(field: &SensorField) -> Result<CoverageGraph> {
    let threshold = (2.0 * field.sensing_range_m).min(field.tx_range_m);
    let c = field.region.center;
    let rel = field
        .positions
        .iter()
        .map(|p| Point::new(p.x - c.x, p.y - c.y))
        .collect();
    CoverageGraph::from_points(rel, threshold)
}

impl CoverageGraph {
    /// Builds the graph for points already expressed relative to the center.
    pub fn from_points(positions: Vec<Point>, link_threshold: f64) -> Result<Self> {
        if !(link_threshold.is_finite() && link_threshold > 0.0) {
            return Err(Error::Validation(format!(
                "link threshold must be positive, got {link_threshold}"
            )));
        }
        if let Some(i) = positions
            .iter()
            .position(|p| p.dist(Point::ORIGIN) <= CENTER_EPS)
        {
            return Err(Error::DegenerateGeometry(format!(
                "sensor {i} sits on the region center; winding around it is undefined"
            )));
        }
        let cut_angle = choose_cut_angle(&positions);
        let n = positions.len();
        let t2 = link_threshold * link_threshold;
        let mut edges = Vec::new();
        let mut excluded = Vec::new();
        let mut adjacency = vec![Vec::new(); n];
        for a in 0..n {
            for b in a + 1..n {
                if positions[a].dist_sq(positions[b]) > t2 {
                    continue;
                }
                if segment_center_distance(positions[a], positions[b]) <= CENTER_EPS {
                    excluded.push((a, b));
                    continue;
                }
                let crossing = crossing_sign(positions[a], positions[b], cut_angle);
                edges.push(GraphEdge { a, b, crossing });
                adjacency[a].push((b, crossing));
                adjacency[b].push((a, -crossing));
            }
        }
        Ok(CoverageGraph {
            positions,
            link_threshold,
            cut_angle,
            edges,
            adjacency,
            excluded,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn link_threshold(&self) -> f64 {
        self.link_threshold
    }

    /// Direction of the cut ray, radians from +x. Zero unless a sensor lies on
    /// the +x axis.
    pub fn cut_angle(&self) -> f64 {
        self.cut_angle
    }

    pub fn excluded_pairs(&self) -> &[(usize, usize)] {
        &self.excluded
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, i8)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].iter().any(|&(w, _)| w == v)
    }

    /// Crossing sign walking `u -> v`, if the edge exists.
    pub fn crossing(&self, u: usize, v: usize) -> Option<i8> {
        self.adjacency[u]
            .iter()
            .find(|&&(w, _)| w == v)
            .map(|&(_, s)| s)
    }

    /// A copy with the edge `{u, v}` removed.
    pub fn without_edge(&self, u: usize, v: usize) -> Self {
        let (a, b) = (u.min(v), u.max(v));
        let mut g = self.clone();
        g.edges.retain(|e| !(e.a == a && e.b == b));
        g.adjacency[a].retain(|&(w, _)| w != b);
        g.adjacency[b].retain(|&(w, _)| w != a);
        g
    }

    /// Signed winding number of the closed polygon through `cycle`, computed
    /// from the subtended angles of its sides.
    pub fn winding_number(&self, cycle: &[usize]) -> f64 {
        let total: f64 = cycle
            .iter()
            .zip(cycle.iter().cycle().skip(1))
            .map(|(&u, &v)| subtended_angle(self.positions[u], self.positions[v]))
            .sum();
        total / TAU
    }

    /// Checks that `cycle` is a closed walk of graph edges through distinct
    /// vertices winding once around the center (angle sum within `tol` of
    /// ±2π).
    pub fn is_barrier(&self, cycle: &[usize], tol: f64) -> bool {
        if cycle.len() < 3 {
            return false;
        }
        let mut seen = vec![false; self.vertex_count()];
        for &v in cycle {
            if v >= seen.len() || std::mem::replace(&mut seen[v], true) {
                return false;
            }
        }
        let connected = cycle
            .iter()
            .zip(cycle.iter().cycle().skip(1))
            .all(|(&u, &v)| self.has_edge(u, v));
        connected && (self.winding_number(cycle).abs() * TAU - TAU).abs() <= tol
    }

    /// Crossing signs against a different cut ray, laid out like the
    /// adjacency lists. `None` when a sensor lies on that ray.
    pub(crate) fn signs_for_ray(&self, ray: f64) -> Option<Vec<Vec<i8>>> {
        let blocked = self.positions.iter().any(|p| {
            let a = angle_from(*p, ray);
            a.min(TAU - a) < RAY_CLEARANCE
        });
        if blocked {
            return None;
        }
        Some(
            self.adjacency
                .iter()
                .enumerate()
                .map(|(u, nbrs)| {
                    nbrs.iter()
                        .map(|&(w, _)| crossing_sign(self.positions[u], self.positions[w], ray))
                        .collect()
                })
                .collect(),
        )
    }

    /// Edge list as `i,j,crossing_sign` CSV.
    pub fn to_edge_csv(&self) -> String {
        let mut out = String::from("i,j,crossing_sign\n");
        for e in &self.edges {
            let _ = writeln!(out, "{},{},{}", e.a, e.b, e.crossing);
        }
        out
    }
}

/// Signed angle in (-π, π] subtended at the origin by the segment `p -> q`.
pub(crate) fn subtended_angle(p: Point, q: Point) -> f64 {
    let cross = p.x * q.y - p.y * q.x;
    let dot = p.x * q.x + p.y * q.y;
    cross.atan2(dot)
}

fn angle_from(p: Point, ray: f64) -> f64 {
    (p.y.atan2(p.x) - ray).rem_euclid(TAU)
}

/// Net crossings of the ray at angle `ray` by segment `p -> q`.
fn crossing_sign(p: Point, q: Point, ray: f64) -> i8 {
    let a = angle_from(p, ray);
    let b = angle_from(q, ray);
    let turns = (a + subtended_angle(p, q) - b) / TAU;
    turns.round() as i8
}

fn segment_center_distance(p: Point, q: Point) -> f64 {
    let dx = q.x - p.x;
    let dy = q.y - p.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.dist(Point::ORIGIN);
    }
    let t = (-(p.x * dx + p.y * dy) / len2).clamp(0.0, 1.0);
    Point::new(p.x + t * dx, p.y + t * dy).dist(Point::ORIGIN)
}

/// The +x direction, unless a sensor sits on it; then the bisector of the
/// widest angular gap between sensors.
fn choose_cut_angle(positions: &[Point]) -> f64 {
    let blocked = positions
        .iter()
        .any(|p| {
            let a = angle_from(*p, 0.0);
            a.min(TAU - a) < RAY_CLEARANCE
        });
    if !blocked {
        return 0.0;
    }
    let mut angles: Vec<f64> = positions.iter().map(|p| angle_from(*p, 0.0)).collect();
    angles.sort_by(f64::total_cmp);
    let mut best = (0.0, 0.0);
    for (i, &a) in angles.iter().enumerate() {
        let next = if i + 1 < angles.len() {
            angles[i + 1]
        } else {
            angles[0] + TAU
        };
        if next - a > best.0 {
            best = (next - a, a + (next - a) / 2.0);
        }
    }
    let ray = best.1.rem_euclid(TAU);
    if ray > PI {
        ray - TAU
    } else {
        ray
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deployment::{RegionSpec, SensorRanges};

    fn ring(n: usize, radius: f64, phase: f64) -> Vec<Point> {
        (0..n)
            .map(|i| {
                let t = phase + TAU * i as f64 / n as f64;
                Point::new(radius * t.cos(), radius * t.sin())
            })
            .collect()
    }

    #[test]
    fn binary_sensing_boundary() {
        let s = Point::ORIGIN;
        assert!(is_covered(Point::new(10.0, 0.0), s, 15.0));
        assert!(is_covered(Point::new(15.0, 0.0), s, 15.0));
        assert!(!is_covered(Point::new(15.000001, 0.0), s, 15.0));
    }

    #[test]
    fn bp_max() {
        assert_eq!(max_barrier_paths(100, 2).unwrap(), 50);
        assert_eq!(max_barrier_paths(7, 3).unwrap(), 2);
        assert_eq!(max_barrier_paths(3, 5).unwrap(), 0);
        assert!(max_barrier_paths(3, 0).is_err());
    }

    #[test]
    fn link_threshold_boundary() {
        let rs = 15.0;
        let pts = vec![Point::new(1.0, 5.0), Point::new(1.0 + 2.0 * rs, 5.0)];
        let g = CoverageGraph::from_points(pts, 2.0 * rs).unwrap();
        assert_eq!(g.edges().len(), 1);
        let pts = vec![Point::new(1.0, 5.0), Point::new(1.0 + 2.0 * rs + 1e-6, 5.0)];
        let g = CoverageGraph::from_points(pts, 2.0 * rs).unwrap();
        assert!(g.edges().is_empty());
    }

    #[test]
    fn threshold_is_min_of_overlap_and_radio() {
        let field = SensorField::new(
            vec![Point::new(5.0, 1.0), Point::new(5.0, 31.0)],
            SensorRanges::new(15.0, 30.0),
            RegionSpec::new(40.0),
        )
        .unwrap();
        let g = build_coverage_graph(&field).unwrap();
        assert_eq!(g.link_threshold(), 30.0);
        assert_eq!(g.edges().len(), 1);
    }

    #[test]
    fn sensor_on_center_is_degenerate() {
        let err = CoverageGraph::from_points(vec![Point::ORIGIN, Point::new(1.0, 1.0)], 5.0);
        assert!(matches!(err, Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn edges_through_center_are_excluded() {
        let g = CoverageGraph::from_points(vec![Point::new(-1.0, 0.5), Point::new(1.0, -0.5)], 5.0)
            .unwrap();
        assert!(g.edges().is_empty());
        assert_eq!(g.excluded_pairs(), &[(0, 1)]);
    }

    #[test]
    fn crossing_signs_on_square() {
        // Square around the origin; only the right side crosses +x.
        let pts = vec![
            Point::new(1.0, -1.0),
            Point::new(1.0, 1.0),
            Point::new(-1.0, 1.0),
            Point::new(-1.0, -1.0),
        ];
        let g = CoverageGraph::from_points(pts, 2.5).unwrap();
        assert_eq!(g.crossing(0, 1), Some(1));
        assert_eq!(g.crossing(1, 0), Some(-1));
        assert_eq!(g.crossing(1, 2), Some(0));
        assert_eq!(g.crossing(3, 0), Some(0));
        assert!((g.winding_number(&[0, 1, 2, 3]) - 1.0).abs() < 1e-12);
        assert!(g.is_barrier(&[0, 1, 2, 3], 1e-9));
        assert!(g.is_barrier(&[3, 2, 1, 0], 1e-9));
        assert!(!g.is_barrier(&[0, 1, 2], 1e-9));
    }

    #[test]
    fn cut_ray_rotates_away_from_sensors() {
        let mut pts = ring(6, 10.0, 0.0);
        pts.push(Point::new(3.0, 0.0));
        let g = CoverageGraph::from_points(pts.clone(), 11.0).unwrap();
        assert!(g.cut_angle() != 0.0);
        for p in &pts {
            let a = angle_from(*p, g.cut_angle());
            assert!(a > 1e-3 && a < TAU - 1e-3);
        }
        // Signs still sum to one around the hexagon.
        let total: i32 = (0..6)
            .map(|i| i32::from(g.crossing(i, (i + 1) % 6).unwrap()))
            .sum();
        assert_eq!(total, 1);
    }

    #[test]
    fn removing_an_edge() {
        let g = CoverageGraph::from_points(ring(5, 10.0, 0.3), 12.0).unwrap();
        let n_edges = g.edges().len();
        let h = g.without_edge(1, 0);
        assert_eq!(h.edges().len(), n_edges - 1);
        assert!(!h.has_edge(0, 1) && !h.has_edge(1, 0));
    }

    #[test]
    fn edge_csv() {
        let g = CoverageGraph::from_points(
            vec![Point::new(1.0, -1.0), Point::new(1.0, 1.0), Point::new(5.0, 5.0)],
            2.5,
        )
        .unwrap();
        assert_eq!(g.to_edge_csv(), "i,j,crossing_sign\n0,1,1\n");
    }
}
