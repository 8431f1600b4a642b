//! Small fixed-size vector and matrix helpers used throughout the crate.

use std::ops::{Add, Mul, Neg, Sub};

/// A point or vector in ambient three-space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        if n == 0.0 {
            Vec3::ZERO
        } else {
            self * (1.0 / n)
        }
    }

    pub fn scale(self, s: f64) -> Vec3 {
        self * s
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// A 2-vector, used for chart coordinates and pushed-forward fields.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Counterclockwise angle of the vector, in (-pi, pi].
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// Symmetric 2x2 matrix, e.g. a first fundamental form.
#[derive(Debug, Clone, Copy)]
pub struct Sym2 {
    pub a: f64, // (0,0)
    pub b: f64, // (0,1) = (1,0)
    pub c: f64, // (1,1)
}

impl Sym2 {
    pub fn det(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.a * v.x + self.b * v.y, self.b * v.x + self.c * v.y)
    }

    pub fn inv_apply(&self, v: Vec2) -> Vec2 {
        let d = self.det();
        Vec2::new((self.c * v.x - self.b * v.y) / d, (-self.b * v.x + self.a * v.y) / d)
    }

    /// Inverse of the symmetric square root, for mapping the unit disk onto
    /// the metric ellipse {xi : xi^T g xi <= 1}.
    pub fn inv_sqrt(&self) -> [[f64; 2]; 2] {
        // Eigendecomposition of a symmetric 2x2.
        let tr = self.a + self.c;
        let det = self.det();
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        let l1 = tr / 2.0 + disc;
        let l2 = tr / 2.0 - disc;
        let (c, s) = if self.b.abs() > 1e-300 {
            let theta = 0.5 * (2.0 * self.b).atan2(self.a - self.c);
            (theta.cos(), theta.sin())
        } else if self.a >= self.c {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        };
        let i1 = 1.0 / l1.sqrt();
        let i2 = 1.0 / l2.sqrt();
        // R diag(i1, i2) R^T with R = [[c,-s],[s,c]]
        [
            [c * c * i1 + s * s * i2, c * s * (i1 - i2)],
            [c * s * (i1 - i2), s * s * i1 + c * c * i2],
        ]
    }
}

/// General 2x2 matrix, e.g. a chart Jacobian of a pushed-forward field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[f64; 2]; 2],
}

impl Mat2 {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { m: [[a, b], [c, d]] }
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }
}

/// Symmetric 3x3 matrix stored densely; used for Q-tensors.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub const ZERO: Mat3 = Mat3 { m: [[0.0; 3]; 3] };

    pub fn outer(a: Vec3, b: Vec3) -> Mat3 {
        let av = [a.x, a.y, a.z];
        let bv = [b.x, b.y, b.z];
        let mut m = [[0.0; 3]; 3];
        for (i, ai) in av.iter().enumerate() {
            for (j, bj) in bv.iter().enumerate() {
                m[i][j] = ai * bj;
            }
        }
        Mat3 { m }
    }

    pub fn identity() -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        m[0][0] = 1.0;
        m[1][1] = 1.0;
        m[2][2] = 1.0;
        Mat3 { m }
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    /// Frobenius inner product sum_ij A_ij B_ij.
    pub fn frobenius_dot(&self, o: &Mat3) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += self.m[i][j] * o.m[i][j];
            }
        }
        s
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_dot(self).sqrt()
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        Vec3::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y + self.m[0][2] * v.z,
            self.m[1][0] * v.x + self.m[1][1] * v.y + self.m[1][2] * v.z,
            self.m[2][0] * v.x + self.m[2][1] * v.y + self.m[2][2] * v.z,
        )
    }

    pub fn add(&self, o: &Mat3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.m[i][j] + o.m[i][j];
            }
        }
        Mat3 { m }
    }

    pub fn sub(&self, o: &Mat3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.m[i][j] - o.m[i][j];
            }
        }
        Mat3 { m }
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.m[i][j] * s;
            }
        }
        Mat3 { m }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inv_sqrt_maps_ellipse_to_disk() {
        let g = Sym2 { a: 4.0, b: 1.0, c: 2.0 };
        let r = g.inv_sqrt();
        // xi = R e with e a unit vector must satisfy xi^T g xi = 1.
        for k in 0..8 {
            let t = k as f64 * std::f64::consts::PI / 4.0;
            let e = Vec2::new(t.cos(), t.sin());
            let xi = Vec2::new(r[0][0] * e.x + r[0][1] * e.y, r[1][0] * e.x + r[1][1] * e.y);
            let q = g.apply(xi).dot(xi);
            assert!((q - 1.0).abs() < 1e-12, "q = {q}");
        }
    }

    #[test]
    fn cross_is_orthogonal() {
        let a = Vec3::new(1.0, 2.0, 3.0);
        let b = Vec3::new(-0.5, 0.25, 4.0);
        let c = a.cross(b);
        assert!(c.dot(a).abs() < 1e-12);
        assert!(c.dot(b).abs() < 1e-12);
    }
}
