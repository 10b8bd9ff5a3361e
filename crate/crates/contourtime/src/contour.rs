//! Contour ingestion: polyline paths, constant arc-length resampling and
//! per-point tangent estimation.
//!
//! The objective handed to the optimizer is a sequence of points spaced at
//! a constant step along the source polyline, each carrying the orientation
//! of the local tangent. Arc length is measured as cumulative chord length
//! of the source polyline, which is exact for polylines and convergent for
//! dense samplings of smooth curves.

use crate::csvio;
use crate::error::{Error, Result};
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::Path;

/// Minimum separation between consecutive path vertices, in meters.
pub const MIN_VERTEX_SEPARATION: f64 = 1e-12;

/// A point in the machine plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// An ordered polyline describing the geometry to traverse.
///
/// Closed paths do not repeat the first vertex; the closing segment is
/// implicit.
#[derive(Debug, Clone)]
pub struct RawPath {
    vertices: Vec<Point>,
    closed: bool,
}

impl RawPath {
    pub fn new(vertices: Vec<Point>, closed: bool) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "path needs at least 2 vertices, got {}",
                vertices.len()
            )));
        }
        for (i, pair) in vertices.windows(2).enumerate() {
            if pair[0].distance(pair[1]) <= MIN_VERTEX_SEPARATION {
                return Err(Error::InvalidInput(format!(
                    "vertices {i} and {} are coincident",
                    i + 1
                )));
            }
        }
        if closed {
            let n = vertices.len();
            if vertices[n - 1].distance(vertices[0]) <= MIN_VERTEX_SEPARATION {
                return Err(Error::InvalidInput(
                    "closed path repeats its first vertex".into(),
                ));
            }
        }
        Ok(Self { vertices, closed })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Cumulative chord length at each vertex; for closed paths one extra
    /// entry covers the closing segment.
    pub fn cumulative_lengths(&self) -> Vec<f64> {
        let mut cum = Vec::with_capacity(self.vertices.len() + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for pair in self.vertices.windows(2) {
            acc += pair[0].distance(pair[1]);
            cum.push(acc);
        }
        if self.closed {
            acc += self.vertices[self.vertices.len() - 1].distance(self.vertices[0]);
            cum.push(acc);
        }
        cum
    }

    pub fn total_length(&self) -> f64 {
        *self.cumulative_lengths().last().unwrap()
    }

    /// Segment endpoint by index, wrapping for the closing segment.
    fn segment(&self, i: usize) -> (Point, Point) {
        let a = self.vertices[i];
        let b = self.vertices[(i + 1) % self.vertices.len()];
        (a, b)
    }

    /// Reads a path from a CSV file with header `x,y` (meters).
    pub fn from_csv(path: &Path, closed: bool) -> Result<Self> {
        let rows = csvio::read_table(path, "x,y")?;
        let vertices = rows.iter().map(|r| Point::new(r[0], r[1])).collect();
        Self::new(vertices, closed)
    }

    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("x,y\n");
        for v in &self.vertices {
            let _ = writeln!(out, "{},{}", csvio::fmt17(v.x), csvio::fmt17(v.y));
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// One objective sample: position and tangent orientation.
#[derive(Debug, Clone, Copy)]
pub struct ContourPoint {
    pub x: f64,
    pub y: f64,
    /// Tangent orientation in radians, in (-pi, pi].
    pub alpha: f64,
}

/// The geometric objective: N contour samples at constant arc-length step.
#[derive(Debug, Clone)]
pub struct Objective {
    points: Vec<ContourPoint>,
    delta_s: f64,
    closed: bool,
    /// Dense source polyline, kept for unbiased deviation measurements.
    source: Vec<Point>,
}

impl Objective {
    pub fn points(&self) -> &[ContourPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn delta_s(&self) -> f64 {
        self.delta_s
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// The polyline the objective was sampled from. Falls back to the
    /// objective samples themselves when the source is not available
    /// (e.g. after loading from CSV).
    pub fn source_polyline(&self) -> &[Point] {
        &self.source
    }

    /// Writes the objective as CSV with header `x,y,alpha`.
    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("x,y,alpha\n");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{}",
                csvio::fmt17(p.x),
                csvio::fmt17(p.y),
                csvio::fmt17(p.alpha)
            );
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Loads an objective from CSV. `delta_s` is recomputed from the mean
    /// spacing; the source polyline degrades to the samples themselves.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let rows = csvio::read_table(path, "x,y,alpha")?;
        if rows.len() < 3 {
            return Err(Error::InvalidInput(
                "objective needs at least 3 points".into(),
            ));
        }
        let points: Vec<ContourPoint> = rows
            .iter()
            .map(|r| ContourPoint {
                x: r[0],
                y: r[1],
                alpha: r[2],
            })
            .collect();
        let mut total = 0.0;
        for pair in points.windows(2) {
            total += Point::new(pair[0].x, pair[0].y).distance(Point::new(pair[1].x, pair[1].y));
        }
        let delta_s = total / (points.len() - 1) as f64;
        let source = points.iter().map(|p| Point::new(p.x, p.y)).collect();
        Ok(Self {
            points,
            delta_s,
            closed: false,
            source,
        })
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a % TAU;
    if a > PI {
        a -= TAU;
    } else if a <= -PI {
        a += TAU;
    }
    a
}

/// Samples `path` at `n_points` constant arc-length steps and attaches
/// tangent orientations.
///
/// Open paths keep both endpoints exactly; closed paths distribute the
/// points so that the wrap-around step also equals `delta_s`.
pub fn resample_constant_arclength(path: &RawPath, n_points: usize) -> Result<Objective> {
    if n_points < 3 {
        return Err(Error::InvalidInput(format!(
            "n_points must be >= 3, got {n_points}"
        )));
    }
    let cum = path.cumulative_lengths();
    let total = *cum.last().unwrap();
    if total <= MIN_VERTEX_SEPARATION {
        return Err(Error::InvalidInput("degenerate path: zero length".into()));
    }

    let delta_s = if path.is_closed() {
        total / n_points as f64
    } else {
        total / (n_points - 1) as f64
    };

    let mut pts = Vec::with_capacity(n_points);
    let mut seg = 0usize;
    let nseg = cum.len() - 1;
    for i in 0..n_points {
        if !path.is_closed() && i == n_points - 1 {
            // exact endpoint for open paths
            let last = *path.vertices().last().unwrap();
            pts.push(last);
            break;
        }
        let s = delta_s * i as f64;
        while seg + 1 < nseg && cum[seg + 1] < s {
            seg += 1;
        }
        let (a, b) = path.segment(seg);
        let len = cum[seg + 1] - cum[seg];
        let t = ((s - cum[seg]) / len).clamp(0.0, 1.0);
        pts.push(Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
    }

    let alphas = tangent_orientations(&pts, path.is_closed())?;
    let points = pts
        .iter()
        .zip(&alphas)
        .map(|(p, &alpha)| ContourPoint {
            x: p.x,
            y: p.y,
            alpha,
        })
        .collect();
    Ok(Objective {
        points,
        delta_s,
        closed: path.is_closed(),
        source: path.vertices().to_vec(),
    })
}

/// Tangent orientation at each point from central differences, with
/// one-sided differences at open endpoints. At a corner each point simply
/// carries the orientation of its own central difference; no points are
/// duplicated.
pub fn tangent_orientations(points: &[Point], closed: bool) -> Result<Vec<f64>> {
    let n = points.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "tangent estimation needs >= 3 points, got {n}"
        )));
    }
    let mut alphas = Vec::with_capacity(n);
    for i in 0..n {
        let (prev, next) = if closed {
            (points[(i + n - 1) % n], points[(i + 1) % n])
        } else if i == 0 {
            (points[0], points[1])
        } else if i == n - 1 {
            (points[n - 2], points[n - 1])
        } else {
            (points[i - 1], points[i + 1])
        };
        let alpha = (next.y - prev.y).atan2(next.x - prev.x);
        alphas.push(wrap_angle(alpha));
    }
    Ok(alphas)
}

/// Builds a dense Archimedean spiral polyline, `r(theta) = r0 +
/// pitch * theta / tau`, starting at angle -pi/2 so the initial tangent
/// points along +x.
pub fn make_smooth_spiral(r0: f64, turns: f64, pitch: f64) -> Result<RawPath> {
    if r0 <= 0.0 || turns <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "spiral needs r0 > 0 and turns > 0, got r0={r0}, turns={turns}"
        )));
    }
    let n = ((4096.0 * turns).ceil() as usize).max(4096) + 1;
    let theta_end = TAU * turns;
    let mut vertices = Vec::with_capacity(n);
    for i in 0..n {
        let theta = theta_end * i as f64 / (n - 1) as f64;
        let r = r0 + pitch * theta / TAU;
        vertices.push(Point::new(r * theta.sin(), -r * theta.cos()));
    }
    RawPath::new(vertices, false)
}

/// Builds a rectilinear spiral of axis-aligned segments. Segment `i` has
/// length `(i + 1) * r0`, so the distance from the center grows by a fixed
/// increment every quarter turn and all corners are right angles.
pub fn make_sharp_spiral(r0: f64, steps: usize) -> Result<RawPath> {
    if r0 <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "sharp spiral needs r0 > 0, got {r0}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidInput("sharp spiral needs steps >= 1".into()));
    }
    const DIRS: [(f64, f64); 4] = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
    let mut vertices = vec![Point::new(0.0, 0.0)];
    let mut cursor = Point::new(0.0, 0.0);
    for i in 0..steps {
        let (dx, dy) = DIRS[i % 4];
        let len = (i + 1) as f64 * r0;
        cursor = Point::new(cursor.x + dx * len, cursor.y + dy * len);
        vertices.push(cursor);
    }
    RawPath::new(vertices, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn rejects_degenerate_paths() {
        assert!(RawPath::new(vec![Point::new(0.0, 0.0)], false).is_err());
        assert!(RawPath::new(
            vec![Point::new(0.0, 0.0), Point::new(0.0, 0.0)],
            false
        )
        .is_err());
    }

    #[test]
    fn straight_segment_uniform_subdivision() {
        let path = RawPath::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)], false).unwrap();
        let obj = resample_constant_arclength(&path, 5).unwrap();
        let xs: Vec<f64> = obj.points().iter().map(|p| p.x).collect();
        for (x, expect) in xs.iter().zip([0.0, 0.25, 0.5, 0.75, 1.0]) {
            assert_relative_eq!(*x, expect, epsilon = 1e-15);
        }
        for p in obj.points() {
            assert_eq!(p.y, 0.0);
            assert_eq!(p.alpha, 0.0);
        }
        assert_relative_eq!(obj.delta_s(), 0.25, epsilon = 1e-15);
    }

    /// Brute-force oracle: cumulative arc-length table lookup at much finer
    /// resolution than the resampler uses.
    fn oracle_point_at(path: &RawPath, s: f64) -> Point {
        let cum = path.cumulative_lengths();
        let verts = path.vertices();
        let nseg = cum.len() - 1;
        for i in 0..nseg {
            if s <= cum[i + 1] || i == nseg - 1 {
                let a = verts[i];
                let b = verts[(i + 1) % verts.len()];
                let t = ((s - cum[i]) / (cum[i + 1] - cum[i])).clamp(0.0, 1.0);
                return Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
            }
        }
        unreachable!()
    }

    #[test]
    fn circle_resampling_matches_arclength_oracle() {
        let m = 100_000;
        let verts: Vec<Point> = (0..m)
            .map(|i| {
                let th = TAU * i as f64 / m as f64;
                Point::new(th.cos(), th.sin())
            })
            .collect();
        let path = RawPath::new(verts, true).unwrap();
        let total = path.total_length();
        let obj = resample_constant_arclength(&path, 8).unwrap();
        assert_eq!(obj.len(), 8);
        assert_relative_eq!(obj.delta_s(), total / 8.0, epsilon = 1e-12);
        for (i, p) in obj.points().iter().enumerate() {
            // on the unit circle to within chord error
            let r = p.x.hypot(p.y);
            assert!((r - 1.0).abs() < 1e-6, "sample {i} off circle: r={r}");
            let expect = oracle_point_at(&path, total * i as f64 / 8.0);
            assert!(p.x - expect.x < 1e-9 && p.y - expect.y < 1e-9);
        }
        // spacing ~ 2*pi/8 of total chord length, including the wrap step
        for pair in obj.points().windows(2) {
            let d = Point::new(pair[0].x, pair[0].y).distance(Point::new(pair[1].x, pair[1].y));
            assert_relative_eq!(d, 2.0 * (PI / 8.0).sin(), epsilon = 1e-4);
        }
    }

    #[test]
    fn archimedean_spiral_n256() {
        let obj = resample_constant_arclength(
            &make_smooth_spiral(0.010, 1.0, 0.002).unwrap(),
            256,
        )
        .unwrap();
        assert_eq!(obj.len(), 256);
    }

    #[test]
    fn smooth_spiral_endpoint_radii() {
        let path = make_smooth_spiral(0.010, 1.0, 0.002).unwrap();
        let first = path.vertices().first().unwrap();
        let last = path.vertices().last().unwrap();
        assert_relative_eq!(first.x.hypot(first.y), 0.010, epsilon = 1e-12);
        assert_relative_eq!(last.x.hypot(last.y), 0.012, epsilon = 1e-12);
    }

    #[test]
    fn smooth_spiral_half_turn_ends_at_pi() {
        let path = make_smooth_spiral(0.010, 0.5, 0.002).unwrap();
        let last = path.vertices().last().unwrap();
        // theta = pi at the end: point at r * (sin pi, -cos pi) = (0, r)
        assert_relative_eq!(last.x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(last.y, 0.011, epsilon = 1e-12);
    }

    #[test]
    fn smooth_spiral_length_matches_quadrature() {
        // oracle: numeric quadrature of sqrt(r^2 + (dr/dtheta)^2)
        let (r0, pitch) = (0.010, 0.002);
        let drdth = pitch / TAU;
        let m = 200_000;
        let mut quad = 0.0;
        for i in 0..m {
            let th = TAU * (i as f64 + 0.5) / m as f64;
            let r = r0 + drdth * th;
            quad += (r * r + drdth * drdth).sqrt() * TAU / m as f64;
        }
        let path = make_smooth_spiral(r0, 1.0, pitch).unwrap();
        let len = path.total_length();
        assert!((len - quad).abs() / quad < 0.01, "len={len}, quad={quad}");
    }

    #[test]
    fn sharp_spiral_structure() {
        let r0 = 0.001;
        let path = make_sharp_spiral(r0, 4).unwrap();
        let verts = path.vertices();
        assert_eq!(verts.len(), 5); // 4 segments, 3 interior corners
        let mut prev_len = 0.0;
        for (i, pair) in verts.windows(2).enumerate() {
            let dx = pair[1].x - pair[0].x;
            let dy = pair[1].y - pair[0].y;
            // axis aligned
            assert!(dx == 0.0 || dy == 0.0);
            let ang = dy.atan2(dx);
            assert!([0.0, PI / 2.0, PI, -PI / 2.0]
                .iter()
                .any(|a| (wrap_angle(ang - a)).abs() < 1e-12));
            // lengths grow by exactly r0 per step
            let len = dx.abs() + dy.abs();
            assert_relative_eq!(len, (i + 1) as f64 * r0, epsilon = 1e-15);
            assert!(len > prev_len);
            prev_len = len;
        }
    }

    #[test]
    fn tangents_along_axes() {
        let xs: Vec<Point> = (0..5).map(|i| Point::new(i as f64, 0.0)).collect();
        for a in tangent_orientations(&xs, false).unwrap() {
            assert_eq!(a, 0.0);
        }
        let ys: Vec<Point> = (0..5).map(|i| Point::new(0.0, i as f64)).collect();
        for a in tangent_orientations(&ys, false).unwrap() {
            assert_relative_eq!(a, PI / 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn circle_tangents_match_analytic() {
        let n = 512;
        let pts: Vec<Point> = (0..n)
            .map(|i| {
                let th = TAU * i as f64 / n as f64;
                Point::new(th.cos(), th.sin())
            })
            .collect();
        let alphas = tangent_orientations(&pts, true).unwrap();
        let ds = TAU / n as f64;
        for (i, &a) in alphas.iter().enumerate() {
            let th = TAU * i as f64 / n as f64;
            let expect = wrap_angle(th + PI / 2.0);
            let err = wrap_angle(a - expect).abs();
            // central differences are exact in direction for a circle up to
            // O(ds^2)
            assert!(err < ds * ds, "i={i}: err={err}");
        }
    }

    #[test]
    fn open_path_endpoints_preserved() {
        let path = make_smooth_spiral(0.01, 1.0, 0.002).unwrap();
        let obj = resample_constant_arclength(&path, 64).unwrap();
        let f = path.vertices().first().unwrap();
        let l = path.vertices().last().unwrap();
        assert_eq!((obj.points()[0].x, obj.points()[0].y), (f.x, f.y));
        let last = obj.points().last().unwrap();
        assert_eq!((last.x, last.y), (l.x, l.y));
    }

    #[test]
    fn objective_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("obj.csv");
        let obj = resample_constant_arclength(
            &make_smooth_spiral(0.01, 1.0, 0.002).unwrap(),
            32,
        )
        .unwrap();
        obj.to_csv(&p).unwrap();
        let back = Objective::from_csv(&p).unwrap();
        assert_eq!(back.len(), obj.len());
        for (a, b) in obj.points().iter().zip(back.points()) {
            assert_eq!(a.x, b.x);
            assert_eq!(a.alpha, b.alpha);
        }
    }

    proptest! {
        /// Consecutive samples are delta_s apart in arc length along the
        /// source polyline (chord length), except possibly the final step
        /// of an open path.
        #[test]
        fn resample_spacing_along_path(
            n in 4usize..40,
            seed in 0u64..500,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut verts = vec![Point::new(0.0, 0.0)];
            let mut cursor = Point::new(0.0, 0.0);
            for _ in 0..8 {
                cursor = Point::new(
                    cursor.x + rng.random_range(-1.0..1.0),
                    cursor.y + rng.random_range(-1.0..1.0),
                );
                if verts.last().unwrap().distance(cursor) > 1e-6 {
                    verts.push(cursor);
                }
            }
            prop_assume!(verts.len() >= 2);
            let path = RawPath::new(verts, false).unwrap();
            let obj = resample_constant_arclength(&path, n).unwrap();
            // recompute arc positions of each sample on the source polyline
            let cum = path.cumulative_lengths();
            let verts = path.vertices();
            let arc_of = |p: &ContourPoint| -> f64 {
                let mut best = (f64::INFINITY, 0.0);
                for i in 0..verts.len() - 1 {
                    let (a, b) = (verts[i], verts[i + 1]);
                    let vx = b.x - a.x;
                    let vy = b.y - a.y;
                    let l2 = vx * vx + vy * vy;
                    let t = (((p.x - a.x) * vx + (p.y - a.y) * vy) / l2).clamp(0.0, 1.0);
                    let fx = a.x + t * vx;
                    let fy = a.y + t * vy;
                    let d = (p.x - fx).hypot(p.y - fy);
                    if d < best.0 {
                        best = (d, cum[i] + t * l2.sqrt());
                    }
                }
                best.1
            };
            for pair in obj.points().windows(2) {
                let ds = arc_of(&pair[1]) - arc_of(&pair[0]);
                prop_assert!((ds - obj.delta_s()).abs() < 1e-9 * path.total_length().max(1.0));
            }
        }

        /// Reversing a path flips every tangent by pi.
        #[test]
        fn reversed_tangents_flip_by_pi(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut pts = vec![Point::new(0.0, 0.0)];
            for _ in 0..12 {
                let last = *pts.last().unwrap();
                pts.push(Point::new(
                    last.x + rng.random_range(0.1..1.0),
                    last.y + rng.random_range(-1.0..1.0),
                ));
            }
            let fwd = tangent_orientations(&pts, false).unwrap();
            let mut rev_pts = pts.clone();
            rev_pts.reverse();
            let mut rev = tangent_orientations(&rev_pts, false).unwrap();
            rev.reverse();
            for (f, r) in fwd.iter().zip(&rev) {
                let diff = wrap_angle(r - f - PI).abs();
                prop_assert!(diff < 1e-12, "f={f}, r={r}");
            }
        }
    }
}
