//! Plane rotations for the MINRES tridiagonal QR.

/// Rotation `[[c, s], [-s, c]]` acting on rows `index` and `index + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GivensRotation {
    pub c: f64,
    pub s: f64,
    pub index: usize,
}

impl GivensRotation {
    pub fn identity(index: usize) -> Self {
        GivensRotation { c: 1.0, s: 0.0, index }
    }

    /// Rotation mapping `(a, b)` to `(r, 0)` with `r = hypot(a, b) >= 0`.
    /// Returns the rotation and `r`.
    pub fn annihilate(a: f64, b: f64, index: usize) -> (Self, f64) {
        let r = a.hypot(b);
        if r == 0.0 {
            return (Self::identity(index), 0.0);
        }
        (
            GivensRotation {
                c: a / r,
                s: b / r,
                index,
            },
            r,
        )
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (self.c * x + self.s * y, -self.s * x + self.c * y)
    }
}
