//! Seeded random sampling of quaternions and directions.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::quaternion::Quaternion;
use crate::slice::UnitImaginary;

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform direction on the unit 3-sphere of quaternions.
pub fn unit_quaternion<R: Rng + ?Sized>(rng: &mut R) -> Quaternion {
    loop {
        let q = Quaternion::new(normal(rng), normal(rng), normal(rng), normal(rng));
        let n = q.norm();
        if n > 1e-9 {
            return q.scale(1.0 / n);
        }
    }
}

/// Uniform unit imaginary on the 2-sphere.
pub fn unit_imaginary<R: Rng + ?Sized>(rng: &mut R) -> UnitImaginary {
    loop {
        let q = Quaternion::pure(normal(rng), normal(rng), normal(rng));
        if let Ok(u) = UnitImaginary::new(q) {
            if q.vector_norm() > 1e-9 {
                return u;
            }
        }
    }
}

/// Uniform point in the 4-ball `|q - center| < radius`.
pub fn in_ball<R: Rng + ?Sized>(rng: &mut R, center: Quaternion, radius: f64) -> Quaternion {
    let dir = unit_quaternion(rng);
    let u: f64 = rng.random();
    center + dir.scale(radius * u.powf(0.25))
}

/// Random quaternion with i.i.d. standard normal components.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Quaternion {
    Quaternion::new(normal(rng), normal(rng), normal(rng), normal(rng))
}
