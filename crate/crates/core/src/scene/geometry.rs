//! Oriented-box geometry: corner enumeration, column intersection, overlap
//! volume via half-space clipping, and horizontal footprints.

use nalgebra::{Point2, Point3, UnitQuaternion, Vector3};

use super::Pose;

/// An oriented box described by its center pose and half extents along the
/// local x/y/z axes.
#[derive(Debug, Clone, Copy)]
pub struct Obb {
    pub center: Point3<f64>,
    pub rotation: UnitQuaternion<f64>,
    pub half: Vector3<f64>,
}

impl Obb {
    /// Builds an OBB from a block's world pose and its file dims
    /// (height, width, depth). Local axes: x = width, y = depth, z = height.
    pub fn from_pose_dims(pose: &Pose, dims: [f64; 3]) -> Self {
        let (h, w, d) = (dims[0], dims[1], dims[2]);
        Self {
            center: Point3::from(pose.position),
            rotation: pose.orientation,
            half: Vector3::new(w / 2.0, d / 2.0, h / 2.0),
        }
    }

    /// The eight corners in world coordinates.
    pub fn corners(&self) -> [Point3<f64>; 8] {
        let mut out = [Point3::origin(); 8];
        let mut i = 0;
        for &sx in &[-1.0, 1.0] {
            for &sy in &[-1.0, 1.0] {
                for &sz in &[-1.0, 1.0] {
                    let local = Vector3::new(sx * self.half.x, sy * self.half.y, sz * self.half.z);
                    out[i] = self.center + self.rotation * local;
                    i += 1;
                }
            }
        }
        out
    }

    /// Lowest world z over the box.
    pub fn min_z(&self) -> f64 {
        self.corners()
            .iter()
            .map(|c| c.z)
            .fold(f64::INFINITY, f64::min)
    }

    /// Highest world z over the box.
    pub fn max_z(&self) -> f64 {
        self.corners()
            .iter()
            .map(|c| c.z)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// World point expressed in the box's local frame.
    pub fn to_local(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation.inverse() * (p - self.center))
    }

    /// Signed distance is not needed; this is the unsigned distance from a
    /// world point to the box surface (zero inside).
    pub fn distance_to_point(&self, p: &Point3<f64>) -> f64 {
        let l = self.to_local(p);
        let dx = (l.x.abs() - self.half.x).max(0.0);
        let dy = (l.y.abs() - self.half.y).max(0.0);
        let dz = (l.z.abs() - self.half.z).max(0.0);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    /// Intersects the vertical line through (x, y) with the box. Returns the
    /// world-z interval covered by the box on that column, if any.
    pub fn column_interval(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        // Column p(t) = (x, y, t); in local coords l(t) = a + t*b.
        let rot_inv = self.rotation.inverse();
        let a = rot_inv * (Vector3::new(x, y, 0.0) - self.center.coords);
        let b = rot_inv * Vector3::new(0.0, 0.0, 1.0);
        let mut t_lo = f64::NEG_INFINITY;
        let mut t_hi = f64::INFINITY;
        for i in 0..3 {
            let (ai, bi, ei) = (a[i], b[i], self.half[i]);
            if bi.abs() < 1e-12 {
                if ai.abs() > ei {
                    return None;
                }
            } else {
                let t1 = (-ei - ai) / bi;
                let t2 = (ei - ai) / bi;
                let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
                t_lo = t_lo.max(lo);
                t_hi = t_hi.min(hi);
                if t_lo > t_hi {
                    return None;
                }
            }
        }
        Some((t_lo, t_hi))
    }

    /// Convex horizontal footprint: the xy-projection of the corners.
    pub fn footprint(&self) -> Vec<Point2<f64>> {
        let pts: Vec<Point2<f64>> = self
            .corners()
            .iter()
            .map(|c| Point2::new(c.x, c.y))
            .collect();
        convex_hull_2d(&pts)
    }

    /// Axis-aligned bounds of the footprint.
    pub fn footprint_aabb(&self) -> (Point2<f64>, Point2<f64>) {
        let corners = self.corners();
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for c in &corners {
            min.x = min.x.min(c.x);
            min.y = min.y.min(c.y);
            max.x = max.x.max(c.x);
            max.y = max.y.max(c.y);
        }
        (min, max)
    }

    /// Exact overlap volume between two oriented boxes, computed by clipping
    /// this box's polyhedron against the other box's six face half-spaces.
    pub fn overlap_volume(&self, other: &Obb) -> f64 {
        let mut poly = box_polyhedron(self);
        for (normal, offset) in box_halfspaces(other) {
            poly = clip_polyhedron(&poly, &normal, offset);
            if poly.faces.is_empty() {
                return 0.0;
            }
        }
        poly.volume()
    }
}

/// Convex polyhedron as a set of planar faces, each a CCW ring of vertices
/// (seen from outside).
#[derive(Debug, Clone)]
pub struct Polyhedron {
    pub faces: Vec<Vec<Point3<f64>>>,
}

impl Polyhedron {
    /// Volume via the divergence theorem over triangulated faces.
    pub fn volume(&self) -> f64 {
        let mut v = 0.0;
        for face in &self.faces {
            if face.len() < 3 {
                continue;
            }
            let p0 = face[0];
            for i in 1..face.len() - 1 {
                let p1 = face[i];
                let p2 = face[i + 1];
                v += p0.coords.dot(&(p1.coords.cross(&p2.coords)));
            }
        }
        (v / 6.0).abs()
    }
}

fn box_polyhedron(b: &Obb) -> Polyhedron {
    let c = b.corners();
    // Corner indexing: bit 2 = x sign, bit 1 = y sign, bit 0 = z sign
    // (from the nested loop order in `corners`).
    let idx = |sx: usize, sy: usize, sz: usize| c[(sx << 2) | (sy << 1) | sz];
    let faces = vec![
        // -x face
        vec![idx(0, 0, 0), idx(0, 0, 1), idx(0, 1, 1), idx(0, 1, 0)],
        // +x face
        vec![idx(1, 0, 0), idx(1, 1, 0), idx(1, 1, 1), idx(1, 0, 1)],
        // -y face
        vec![idx(0, 0, 0), idx(1, 0, 0), idx(1, 0, 1), idx(0, 0, 1)],
        // +y face
        vec![idx(0, 1, 0), idx(0, 1, 1), idx(1, 1, 1), idx(1, 1, 0)],
        // -z face
        vec![idx(0, 0, 0), idx(0, 1, 0), idx(1, 1, 0), idx(1, 0, 0)],
        // +z face
        vec![idx(0, 0, 1), idx(1, 0, 1), idx(1, 1, 1), idx(0, 1, 1)],
    ];
    Polyhedron { faces }
}

/// The six half-spaces (outward normal, offset) whose intersection is the box:
/// a point p is inside iff normal . p <= offset for all six.
fn box_halfspaces(b: &Obb) -> Vec<(Vector3<f64>, f64)> {
    let mut out = Vec::with_capacity(6);
    let axes = [
        b.rotation * Vector3::x(),
        b.rotation * Vector3::y(),
        b.rotation * Vector3::z(),
    ];
    for (i, axis) in axes.iter().enumerate() {
        let e = b.half[i];
        out.push((*axis, axis.dot(&b.center.coords) + e));
        out.push((-*axis, -axis.dot(&b.center.coords) + e));
    }
    out
}

/// Clips a convex polyhedron by the half-space normal . p <= offset,
/// rebuilding the cap face from the cut edges.
fn clip_polyhedron(poly: &Polyhedron, normal: &Vector3<f64>, offset: f64) -> Polyhedron {
    const EPS: f64 = 1e-12;
    let mut faces = Vec::new();
    let mut cut_points: Vec<Point3<f64>> = Vec::new();

    for face in &poly.faces {
        let mut kept = Vec::new();
        let n = face.len();
        for i in 0..n {
            let a = face[i];
            let b = face[(i + 1) % n];
            let da = normal.dot(&a.coords) - offset;
            let db = normal.dot(&b.coords) - offset;
            if da <= EPS {
                kept.push(a);
            }
            if (da < -EPS && db > EPS) || (da > EPS && db < -EPS) {
                let t = da / (da - db);
                let p = Point3::from(a.coords + t * (b.coords - a.coords));
                kept.push(p);
                cut_points.push(p);
            }
        }
        if kept.len() >= 3 {
            faces.push(kept);
        }
    }

    // Build the cap polygon across the cut plane.
    if cut_points.len() >= 3 {
        let centroid = cut_points
            .iter()
            .fold(Vector3::zeros(), |acc, p| acc + p.coords)
            / cut_points.len() as f64;
        // Order around the centroid in the cut plane.
        let u = orthonormal_to(normal);
        let v = normal.cross(&u);
        let mut ordered = cut_points;
        ordered.sort_by(|a, b| {
            let pa = a.coords - centroid;
            let pb = b.coords - centroid;
            let aa = pa.dot(&v).atan2(pa.dot(&u));
            let ab = pb.dot(&v).atan2(pb.dot(&u));
            aa.partial_cmp(&ab).unwrap()
        });
        ordered.dedup_by(|a, b| (a.coords - b.coords).norm() < 1e-10);
        if ordered.len() >= 3 {
            faces.push(ordered);
        }
    }

    Polyhedron { faces }
}

fn orthonormal_to(n: &Vector3<f64>) -> Vector3<f64> {
    let trial = if n.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    n.cross(&trial).normalize()
}

/// Andrew's monotone chain. Returns the hull CCW.
pub fn convex_hull_2d(points: &[Point2<f64>]) -> Vec<Point2<f64>> {
    let mut pts: Vec<Point2<f64>> = points.to_vec();
    pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    pts.dedup_by(|a, b| (a.x - b.x).abs() < 1e-12 && (a.y - b.y).abs() < 1e-12);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>| {
        (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
    };
    let mut lower: Vec<Point2<f64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Point2<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Clips subject polygon against a convex clip polygon (both CCW).
/// Sutherland-Hodgman.
pub fn clip_polygon_2d(subject: &[Point2<f64>], clip: &[Point2<f64>]) -> Vec<Point2<f64>> {
    let mut output: Vec<Point2<f64>> = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if output.is_empty() {
            return output;
        }
        let a = clip[i];
        let b = clip[(i + 1) % n];
        let input = std::mem::take(&mut output);
        let inside = |p: &Point2<f64>| (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) >= 0.0;
        let m = input.len();
        for j in 0..m {
            let cur = input[j];
            let next = input[(j + 1) % m];
            let cur_in = inside(&cur);
            let next_in = inside(&next);
            if cur_in {
                output.push(cur);
            }
            if cur_in != next_in {
                let d = Point2::new(next.x - cur.x, next.y - cur.y);
                let denom = (b.x - a.x) * d.y - (b.y - a.y) * d.x;
                if denom.abs() > 1e-15 {
                    let t = ((b.x - a.x) * (a.y - cur.y) - (b.y - a.y) * (a.x - cur.x)) / -denom;
                    let t = t.clamp(0.0, 1.0);
                    output.push(Point2::new(cur.x + t * d.x, cur.y + t * d.y));
                }
            }
        }
    }
    output
}

/// Signed area of a polygon (positive when CCW).
pub fn polygon_area(poly: &[Point2<f64>]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut a = 0.0;
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        a += p.x * q.y - q.x * p.y;
    }
    a / 2.0
}

/// Signed distance from a point to a convex CCW polygon boundary:
/// positive inside, negative outside.
pub fn signed_margin(poly: &[Point2<f64>], p: &Point2<f64>) -> f64 {
    if poly.len() < 3 {
        return f64::NEG_INFINITY;
    }
    let mut inside = true;
    let mut min_edge_dist = f64::INFINITY;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let e = Point2::new(b.x - a.x, b.y - a.y);
        let cross = e.x * (p.y - a.y) - e.y * (p.x - a.x);
        if cross < 0.0 {
            inside = false;
        }
        // Distance to the segment ab.
        let len2 = e.x * e.x + e.y * e.y;
        let t = if len2 > 0.0 {
            (((p.x - a.x) * e.x + (p.y - a.y) * e.y) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let proj = Point2::new(a.x + t * e.x, a.y + t * e.y);
        let d = ((p.x - proj.x).powi(2) + (p.y - proj.y).powi(2)).sqrt();
        min_edge_dist = min_edge_dist.min(d);
    }
    if inside {
        min_edge_dist
    } else {
        -min_edge_dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::UnitQuaternion;

    fn aabb(cx: f64, cy: f64, cz: f64, hx: f64, hy: f64, hz: f64) -> Obb {
        Obb {
            center: Point3::new(cx, cy, cz),
            rotation: UnitQuaternion::identity(),
            half: Vector3::new(hx, hy, hz),
        }
    }

    #[test]
    fn overlap_volume_axis_aligned() {
        let a = aabb(0.0, 0.0, 0.0, 1.0, 1.0, 1.0);
        let b = aabb(1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
        // Overlap cube has side 1.
        assert_relative_eq!(a.overlap_volume(&b), 1.0, epsilon = 1e-9);

        let c = aabb(3.0, 0.0, 0.0, 1.0, 1.0, 1.0);
        assert_eq!(a.overlap_volume(&c), 0.0);

        // Touching faces: zero volume.
        let d = aabb(2.0, 0.0, 0.0, 1.0, 1.0, 1.0);
        assert!(a.overlap_volume(&d) < 1e-12);
    }

    #[test]
    fn overlap_volume_contained() {
        let a = aabb(0.0, 0.0, 0.0, 2.0, 2.0, 2.0);
        let b = aabb(0.0, 0.0, 0.0, 1.0, 1.0, 1.0);
        assert_relative_eq!(a.overlap_volume(&b), 8.0, epsilon = 1e-9);
        assert_relative_eq!(b.overlap_volume(&a), 8.0, epsilon = 1e-9);
    }

    #[test]
    fn overlap_volume_rotated() {
        // A cube rotated 45 degrees about z overlapping an axis-aligned cube
        // sharing the same center: the intersection is a regular octagonal
        // prism. Analytic area of the octagon: 8*(sqrt(2)-1)*s^2 for
        // half-extent s.
        let a = aabb(0.0, 0.0, 0.0, 1.0, 1.0, 1.0);
        let rot = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), std::f64::consts::FRAC_PI_4);
        let b = Obb {
            center: Point3::new(0.0, 0.0, 0.0),
            rotation: rot,
            half: Vector3::new(1.0, 1.0, 1.0),
        };
        let expected_area = 8.0 * (2f64.sqrt() - 1.0);
        assert_relative_eq!(a.overlap_volume(&b), expected_area * 2.0, epsilon = 1e-6);
    }

    #[test]
    fn column_interval_upright() {
        let b = aabb(0.0, 0.0, 0.05, 0.025, 0.025, 0.05);
        let (lo, hi) = b.column_interval(0.0, 0.0).unwrap();
        assert_relative_eq!(lo, 0.0, epsilon = 1e-12);
        assert_relative_eq!(hi, 0.1, epsilon = 1e-12);
        assert!(b.column_interval(0.1, 0.0).is_none());
    }

    #[test]
    fn column_interval_rotated() {
        // Cube rotated 45 degrees about y: column through center spans the
        // diagonal.
        let rot = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), std::f64::consts::FRAC_PI_4);
        let b = Obb {
            center: Point3::new(0.0, 0.0, 0.0),
            rotation: rot,
            half: Vector3::new(1.0, 1.0, 1.0),
        };
        let (lo, hi) = b.column_interval(0.0, 0.0).unwrap();
        assert_relative_eq!(hi - lo, 2.0 * 2f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn polygon_clip_and_area() {
        let sq = vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 2.0),
        ];
        let sq2 = vec![
            Point2::new(1.0, 1.0),
            Point2::new(3.0, 1.0),
            Point2::new(3.0, 3.0),
            Point2::new(1.0, 3.0),
        ];
        let inter = clip_polygon_2d(&sq, &sq2);
        assert_relative_eq!(polygon_area(&inter).abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn margin_sign() {
        let sq = vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 2.0),
        ];
        assert_relative_eq!(signed_margin(&sq, &Point2::new(1.0, 1.0)), 1.0);
        assert_relative_eq!(signed_margin(&sq, &Point2::new(3.0, 1.0)), -1.0);
    }
}
