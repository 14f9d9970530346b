//! Slice geometry: `q = t + r ι` with `ι` on the sphere of imaginary units,
//! the angular chart of that sphere, and the commuting/anticommuting split of
//! an increment relative to a given `ι`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

/// Imaginary magnitudes at or below this are treated as the real axis.
pub const R_MIN: f64 = 1e-12;

/// Default width of the band around the real axis where the real-point
/// branch is used instead of the slice equations.
pub const DEFAULT_R_BAND: f64 = 1e-6;

/// `sin β` below this is the neighborhood of the singular subplane `R + kR`.
pub const POLE_SIN_BETA: f64 = 1e-6;

/// A pure imaginary quaternion of unit norm, i.e. a square root of `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitImaginary(Quaternion);

impl UnitImaginary {
    pub const I: UnitImaginary = UnitImaginary(Quaternion::I);
    pub const J: UnitImaginary = UnitImaginary(Quaternion::J);
    pub const K: UnitImaginary = UnitImaginary(Quaternion::K);

    /// Normalizes the imaginary part of `q`; the scalar part is ignored.
    pub fn new(q: Quaternion) -> Result<Self> {
        let r = q.vector_norm();
        if !(r > R_MIN) {
            return Err(Error::DegenerateSlice { r });
        }
        Ok(UnitImaginary(q.vector().scale(1.0 / r)))
    }

    pub fn axis(self) -> Quaternion {
        self.0
    }

    pub fn components(self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }

    pub fn dot(self, other: UnitImaginary) -> f64 {
        self.0.dot(other.0)
    }

    /// Spherical angles `(α, β)` with `α = atan2(y, x)` and `β = acos(z)`.
    pub fn angles(self) -> SphericalAngles {
        let [x, y, z] = self.components();
        SphericalAngles { alpha: y.atan2(x), beta: z.clamp(-1.0, 1.0).acos() }
    }
}

impl std::ops::Neg for UnitImaginary {
    type Output = UnitImaginary;
    fn neg(self) -> UnitImaginary {
        UnitImaginary(-self.0)
    }
}

impl From<UnitImaginary> for Quaternion {
    fn from(u: UnitImaginary) -> Quaternion {
        u.0
    }
}

/// `q = t + r ι` with `r >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceForm {
    pub t: f64,
    pub r: f64,
    pub iota: UnitImaginary,
}

impl SliceForm {
    pub fn recompose(&self) -> Quaternion {
        slice_point(self.t, self.r, self.iota)
    }
}

/// `t + r ι` as a quaternion.
pub fn slice_point(t: f64, r: f64, iota: UnitImaginary) -> Quaternion {
    Quaternion::real(t) + iota.axis().scale(r)
}

/// Splits `q` into scalar part, imaginary magnitude and imaginary direction.
///
/// Fails with [`Error::DegenerateSlice`] when `|Im q| <= R_MIN`; real points
/// have no slice direction.
pub fn slice_form(q: Quaternion) -> Result<SliceForm> {
    let iota = UnitImaginary::new(q)?;
    Ok(SliceForm { t: q.t, r: q.vector_norm(), iota })
}

/// Chart on the sphere of imaginary units:
/// `ι(α, β) = cos α sin β i + sin α sin β j + cos β k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphericalAngles {
    pub alpha: f64,
    pub beta: f64,
}

impl SphericalAngles {
    pub fn new(alpha: f64, beta: f64) -> Self {
        SphericalAngles { alpha, beta }
    }

    /// True within `POLE_SIN_BETA` of the poles `±k`.
    pub fn near_pole(self) -> bool {
        self.beta.sin().abs() < POLE_SIN_BETA
    }

    /// `∂ι/∂α`, a pure imaginary of norm `|sin β|` orthogonal to `ι`.
    pub fn tangent_alpha(self) -> Quaternion {
        let (sa, ca) = self.alpha.sin_cos();
        let sb = self.beta.sin();
        Quaternion::pure(-sa * sb, ca * sb, 0.0)
    }

    /// `∂ι/∂β`, a pure imaginary of unit norm orthogonal to `ι`.
    pub fn tangent_beta(self) -> Quaternion {
        let (sa, ca) = self.alpha.sin_cos();
        let (sb, cb) = self.beta.sin_cos();
        Quaternion::pure(ca * cb, sa * cb, -sb)
    }
}

pub fn iota_from_angles(a: SphericalAngles) -> UnitImaginary {
    let (sa, ca) = a.alpha.sin_cos();
    let (sb, cb) = a.beta.sin_cos();
    UnitImaginary(Quaternion::pure(ca * sb, sa * sb, cb))
}

/// The two parts of an increment relative to a slice direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncrementSplit {
    /// Commutes with `ι`.
    pub h_par: Quaternion,
    /// Anticommutes with `ι`.
    pub h_perp: Quaternion,
}

/// `h_par = (h - ι h ι) / 2`, `h_perp = (h + ι h ι) / 2`.
pub fn split_increment(h: Quaternion, iota: UnitImaginary) -> IncrementSplit {
    let u = iota.axis();
    let sandwich = u * h * u;
    IncrementSplit { h_par: (h - sandwich).scale(0.5), h_perp: (h + sandwich).scale(0.5) }
}

/// A unit imaginary orthogonal to `iota` (so it anticommutes with it).
///
/// Gram-Schmidt of the first of `i, j, k` that is not nearly parallel to
/// `iota` (`|cos| <= 0.9`); every unit vector has a component of magnitude at
/// most `1/sqrt(3)`, so the scan always succeeds.
pub fn perp_direction(iota: UnitImaginary) -> UnitImaginary {
    let u = iota.axis();
    for e in [Quaternion::I, Quaternion::J, Quaternion::K] {
        let c = e.dot(u);
        if c.abs() <= 0.9 {
            let v = e - u.scale(c);
            return UnitImaginary(v.scale(1.0 / v.vector_norm()));
        }
    }
    unreachable!("a unit vector always has a component of magnitude <= 1/sqrt(3)")
}
