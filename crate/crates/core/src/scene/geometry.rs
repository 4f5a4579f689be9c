use nalgebra::Vector3;

use super::SceneObject;

/// World-space axis-aligned box. Boundaries are inclusive in every test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Aabb {
    pub fn new(min: Vector3<f64>, max: Vector3<f64>) -> Self {
        debug_assert!((0..3).all(|i| min[i] <= max[i]), "inverted box {min:?} {max:?}");
        Aabb { min, max }
    }

    pub fn from_center(center: Vector3<f64>, half: Vector3<f64>) -> Self {
        Aabb { min: center - half, max: center + half }
    }

    pub fn center(&self) -> Vector3<f64> {
        (self.min + self.max) * 0.5
    }

    pub fn half_extents(&self) -> Vector3<f64> {
        (self.max - self.min) * 0.5
    }

    pub fn volume(&self) -> f64 {
        let d = self.max - self.min;
        d.x * d.y * d.z
    }

    pub fn footprint_area(&self) -> f64 {
        (self.max.x - self.min.x) * (self.max.y - self.min.y)
    }

    /// Length of the xy footprint diagonal.
    pub fn footprint_diagonal(&self) -> f64 {
        (self.max.x - self.min.x).hypot(self.max.y - self.min.y)
    }

    pub fn contains_point(&self, p: &Vector3<f64>) -> bool {
        (0..3).all(|i| self.min[i] <= p[i] && p[i] <= self.max[i])
    }

    /// Volume of the intersection with `other`; 0 when disjoint or touching.
    pub fn intersection_volume(&self, other: &Aabb) -> f64 {
        (0..3).map(|i| overlap_1d(self.min[i], self.max[i], other.min[i], other.max[i])).product()
    }

    fn footprint_intersection(&self, other: &Aabb) -> f64 {
        (0..2).map(|i| overlap_1d(self.min[i], self.max[i], other.min[i], other.max[i])).product()
    }
}

fn overlap_1d(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

/// Tightest world AABB around an object's rotated local box:
/// `extent_i = Σ_j |R_ij| · h_j`.
pub fn world_aabb(object: &SceneObject) -> Aabb {
    let r = object.pose.orientation.to_rotation_matrix();
    let m = r.matrix();
    let h = object.half_extents;
    let extent = Vector3::from_fn(|i, _| (0..3).map(|j| m[(i, j)].abs() * h[j]).sum());
    Aabb::from_center(object.pose.position, extent)
}

/// Euclidean distance between the closest points of two boxes.
pub fn gap_distance(a: &Aabb, b: &Aabb) -> f64 {
    let sep = Vector3::from_fn(|i, _| (a.min[i] - b.max[i]).max(b.min[i] - a.max[i]).max(0.0));
    sep.norm()
}

/// Area of the xy intersection over `a`'s footprint area.
pub fn horizontal_overlap_ratio(a: &Aabb, b: &Aabb) -> f64 {
    let area = a.footprint_area();
    if area <= 0.0 {
        return 0.0;
    }
    (a.footprint_intersection(b) / area).clamp(0.0, 1.0)
}

fn on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    let scale = (b[0] - a[0]).abs().max((b[1] - a[1]).abs()).max(1.0);
    if cross.abs() > 1e-12 * scale {
        return false;
    }
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Even-odd containment with boundary points counted as inside.
pub fn point_in_polygon(point: [f64; 2], polygon: &[[f64; 2]]) -> bool {
    let n = polygon.len();
    let mut inside = false;
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        if on_segment(point, a, b) {
            return true;
        }
        if (a[1] > point[1]) != (b[1] > point[1]) {
            let x = a[0] + (point[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if point[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Shoelace area; positive for counterclockwise vertex order.
pub fn signed_area(polygon: &[[f64; 2]]) -> f64 {
    let n = polygon.len();
    (0..n)
        .map(|i| {
            let (a, b) = (polygon[i], polygon[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        * 0.5
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(p1, q1, q2))
        || (d2 == 0.0 && on_segment(p2, q1, q2))
        || (d3 == 0.0 && on_segment(q1, p1, p2))
        || (d4 == 0.0 && on_segment(q2, p1, p2))
}

/// True when no two non-adjacent edges meet.
pub fn is_simple(polygon: &[[f64; 2]]) -> bool {
    let n = polygon.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(polygon[i], polygon[(i + 1) % n], polygon[j], polygon[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}
