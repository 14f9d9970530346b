use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quaternion::Quaternion;
use crate::sampling;
use crate::slice::DEFAULT_R_BAND;

/// One sampling region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// Tensor grid `[lo, hi]^4` with `n` points per axis; points with
    /// `0 < r < band` and real points are dropped.
    Box { lo: f64, hi: f64, n: usize },
    /// `count` evenly spaced real points in `[lo, hi]`.
    Axis { lo: f64, hi: f64, count: usize },
    /// `count` seeded uniform points in the 4-ball.
    Ball { center: Quaternion, radius: f64, count: usize },
}

/// Sampling plan for a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub regions: Vec<Region>,
    /// Width of the band around the real axis excluded from box samples.
    pub r_band: f64,
    pub seed: u64,
}

impl Default for GridSpec {
    /// `5^4` box on `[-1.5, 1.5]`, 25 real-axis points, 100 random points in `B(0, 2)`.
    fn default() -> Self {
        GridSpec {
            regions: vec![
                Region::Box { lo: -1.5, hi: 1.5, n: 5 },
                Region::Axis { lo: -1.5, hi: 1.5, count: 25 },
                Region::Ball { center: Quaternion::ZERO, radius: 2.0, count: 100 },
            ],
            r_band: DEFAULT_R_BAND,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Box,
    Axis,
    Ball,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub index: usize,
    pub point: Quaternion,
    pub source: Source,
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| if n == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
}

impl GridSpec {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Points in region order; ball samples draw from one seeded stream.
    pub fn points(&self) -> Vec<GridPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::new();
        let mut push = |point, source| {
            let index = out.len();
            out.push(GridPoint { index, point, source });
        };
        for region in &self.regions {
            match *region {
                Region::Box { lo, hi, n } => {
                    let ax: Vec<f64> = linspace(lo, hi, n).collect();
                    for &t in &ax {
                        for &x in &ax {
                            for &y in &ax {
                                for &z in &ax {
                                    let q = Quaternion::new(t, x, y, z);
                                    if q.vector_norm() >= self.r_band {
                                        push(q, Source::Box);
                                    }
                                }
                            }
                        }
                    }
                }
                Region::Axis { lo, hi, count } => {
                    for t in linspace(lo, hi, count) {
                        push(Quaternion::real(t), Source::Axis);
                    }
                }
                Region::Ball { center, radius, count } => {
                    for _ in 0..count {
                        push(sampling::in_ball(&mut rng, center, radius), Source::Ball);
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for region in &self.regions {
            match *region {
                Region::Box { lo, hi, n } => write!(f, "box={lo},{hi},{n};")?,
                Region::Axis { lo, hi, count } => write!(f, "axis={lo},{hi},{count};")?,
                Region::Ball { center, radius, count } if center == Quaternion::ZERO => {
                    write!(f, "ball={radius},{count};")?
                }
                Region::Ball { center, radius, count } => {
                    write!(f, "ball={radius},{count},{},{},{},{};", center.t, center.x, center.y, center.z)?
                }
            }
        }
        write!(f, "band={}", self.r_band)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    /// `default`, or `;`-separated parts:
    /// `box=LO,HI,N`, `axis=LO,HI,COUNT`, `ball=RADIUS,COUNT[,T,X,Y,Z]`, `band=R`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "default" {
            return Ok(GridSpec::default());
        }
        let mut spec = GridSpec { regions: Vec::new(), ..GridSpec::default() };
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let bad = |why: &str| Error::Parse(format!("grid part {part:?}: {why}"));
            let (key, args) = part.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            let nums: Vec<f64> = args
                .split(',')
                .map(|a| a.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(&e.to_string()))?;
            let count = |v: f64| -> Result<usize> {
                if v >= 1.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(bad("counts must be positive integers"))
                }
            };
            match (key.trim(), nums.as_slice()) {
                ("box", &[lo, hi, n]) if lo < hi => spec.regions.push(Region::Box { lo, hi, n: count(n)? }),
                ("axis", &[lo, hi, n]) if lo <= hi => spec.regions.push(Region::Axis { lo, hi, count: count(n)? }),
                ("ball", &[radius, n]) if radius > 0.0 => {
                    spec.regions.push(Region::Ball { center: Quaternion::ZERO, radius, count: count(n)? })
                }
                ("ball", &[radius, n, t, x, y, z]) if radius > 0.0 => {
                    spec.regions.push(Region::Ball { center: Quaternion::new(t, x, y, z), radius, count: count(n)? })
                }
                ("band", &[r]) if r >= 0.0 => spec.r_band = r,
                _ => return Err(bad("unknown key or wrong arguments")),
            }
        }
        if spec.regions.is_empty() {
            return Err(Error::Parse(format!("grid {s:?} has no regions")));
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_counts() {
        let pts = GridSpec::default().points();
        let count = |s| pts.iter().filter(|p| p.source == s).count();
        // 625 box points minus the 5 on the real axis
        assert_eq!(count(Source::Box), 620);
        assert_eq!(count(Source::Axis), 25);
        assert_eq!(count(Source::Ball), 100);
        assert!(pts.iter().enumerate().all(|(i, p)| p.index == i));
        assert!(pts.iter().filter(|p| p.source == Source::Ball).all(|p| p.point.norm() < 2.0));
    }

    #[test]
    fn seeded_points_are_reproducible() {
        let a = GridSpec::default().with_seed(7).points();
        let b = GridSpec::default().with_seed(7).points();
        let c = GridSpec::default().with_seed(8).points();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("default".parse::<GridSpec>().unwrap(), GridSpec::default());
        let g: GridSpec = "box=-1,1,3; axis=0,2,5; ball=0.5,10,1,0,0,0; band=1e-4".parse().unwrap();
        assert_eq!(g.regions.len(), 3);
        assert_eq!(g.r_band, 1e-4);
        let back: GridSpec = g.to_string().parse().unwrap();
        assert_eq!(back, g);
        for bad in ["", "box=1,0,3", "ball=2", "axis=0,1,2.5", "cube=1,2,3", "band=-1;box=0,1,2"] {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
    }
}
