//! Per-point local reference frames and the 2x3 homogeneous state
//! representation.
//!
//! States are row-matrix valued: the first row is position with a
//! homogeneous 1, the second row velocity with a homogeneous 0. A frame
//! transform right-multiplies a state, so translation applies to the
//! position row only.

use crate::contour::ContourPoint;

/// A 2x3 state: rows `(px, py, 1)` and `(vx, vy, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateMatrix {
    pub px: f64,
    pub py: f64,
    pub vx: f64,
    pub vy: f64,
}

impl StateMatrix {
    pub fn new(px: f64, py: f64, vx: f64, vy: f64) -> Self {
        Self { px, py, vx, vy }
    }

    pub fn at_rest(px: f64, py: f64) -> Self {
        Self::new(px, py, 0.0, 0.0)
    }

    pub fn position(&self) -> (f64, f64) {
        (self.px, self.py)
    }

    pub fn velocity(&self) -> (f64, f64) {
        (self.vx, self.vy)
    }

    /// Full 2x3 matrix including the homogeneous column.
    pub fn rows(&self) -> [[f64; 3]; 2] {
        [[self.px, self.py, 1.0], [self.vx, self.vy, 0.0]]
    }
}

/// Local-to-global transform for one contour point: a rotation by the
/// tangent orientation plus the point's position as translation.
#[derive(Debug, Clone, Copy)]
pub struct FrameTransform {
    pub cos_alpha: f64,
    pub sin_alpha: f64,
    pub origin_x: f64,
    pub origin_y: f64,
}

impl FrameTransform {
    pub fn from_alpha_origin(alpha: f64, x: f64, y: f64) -> Self {
        Self {
            cos_alpha: alpha.cos(),
            sin_alpha: alpha.sin(),
            origin_x: x,
            origin_y: y,
        }
    }

    /// The 3x3 matrix with rows `[cos a, sin a, 0]`, `[-sin a, cos a, 0]`,
    /// `[x, y, 1]`.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        [
            [self.cos_alpha, self.sin_alpha, 0.0],
            [-self.sin_alpha, self.cos_alpha, 0.0],
            [self.origin_x, self.origin_y, 1.0],
        ]
    }

    /// Closed-form inverse: transposed rotation block, back-rotated and
    /// negated translation. Keeps the homogeneous structure exact.
    pub fn inverse_matrix(&self) -> [[f64; 3]; 3] {
        let (c, s) = (self.cos_alpha, self.sin_alpha);
        let (x, y) = (self.origin_x, self.origin_y);
        [
            [c, -s, 0.0],
            [s, c, 0.0],
            [-(x * c + y * s), x * s - y * c, 1.0],
        ]
    }
}

/// Frame with origin at the contour point and orientation of its tangent.
pub fn frame_of(point: &ContourPoint) -> FrameTransform {
    FrameTransform::from_alpha_origin(point.alpha, point.x, point.y)
}

fn apply(state: &StateMatrix, m: &[[f64; 3]; 3]) -> StateMatrix {
    // row-vector times matrix; homogeneous entries are 1 and 0 exactly
    StateMatrix {
        px: state.px * m[0][0] + state.py * m[1][0] + m[2][0],
        py: state.px * m[0][1] + state.py * m[1][1] + m[2][1],
        vx: state.vx * m[0][0] + state.vy * m[1][0],
        vy: state.vx * m[0][1] + state.vy * m[1][1],
    }
}

/// Expresses a local state in global coordinates.
pub fn to_global(state_local: &StateMatrix, frame: &FrameTransform) -> StateMatrix {
    apply(state_local, &frame.matrix())
}

/// Expresses a global state in the frame's local coordinates.
pub fn to_local(state_global: &StateMatrix, frame: &FrameTransform) -> StateMatrix {
    apply(state_global, &frame.inverse_matrix())
}
