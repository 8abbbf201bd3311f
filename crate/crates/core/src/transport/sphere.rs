//! Transport between uniform measures on spheres and circles in `R^3`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::collision::frame_from_axis;
use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

/// Sphere with center and radius; `radius = 0` is a Dirac mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSpec {
    pub center: Vec3,
    pub radius: f64,
}

impl SphereSpec {
    pub fn new(center: Vec3, radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::arg(format!("invalid sphere: center {center:?}, radius {radius}")));
        }
        Ok(Self { center, radius })
    }

    /// `m` uniform points, by normalizing standard Gaussian vectors.
    pub fn sample<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 * m);
        for _ in 0..m {
            let dir = uniform_direction(rng);
            out.extend((0..3).map(|c| self.center[c] + self.radius * dir[c]));
        }
        out
    }
}

/// Uniform direction on `S^2`.
pub fn uniform_direction<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let g: Vec3 = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let n = vec3::norm(&g);
        if n > 1e-300 {
            return vec3::scale(&g, 1.0 / n);
        }
    }
}

/// Circle with center, radius and unit axis (normal to its plane).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleSpec {
    pub center: Vec3,
    pub radius: f64,
    pub axis: Vec3,
}

impl CircleSpec {
    pub fn new(center: Vec3, radius: f64, axis: Vec3) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::arg(format!("circle radius must be nonnegative, got {radius}")));
        }
        if (vec3::norm(&axis) - 1.0).abs() > 1e-12 {
            return Err(Error::arg(format!("circle axis must be a unit vector, got {axis:?}")));
        }
        Ok(Self { center, radius, axis })
    }

    /// `m` uniform points (uniform angle in the plane normal to `axis`).
    pub fn sample<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Vec<f64> {
        let (t1, t2, _) = frame_from_axis(&self.axis).expect("unit axis checked at construction");
        let mut out = Vec::with_capacity(3 * m);
        for _ in 0..m {
            let phi = rng.random::<f64>() * std::f64::consts::TAU;
            let (s, c) = phi.sin_cos();
            out.extend((0..3).map(|k| self.center[k] + self.radius * (c * t1[k] + s * t2[k])));
        }
        out
    }
}

/// Coupling that carries one uniform sphere measure onto another.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SphereMap {
    /// `v ↦ v + shift` (equal radii).
    Translation { shift: Vec3 },
    /// `v ↦ center + factor (v - center)`; the center is either the common
    /// sphere center or the external homothety point.
    Dilation { center: Vec3, factor: f64 },
    /// Positive-radius source onto a Dirac target: everything goes to `target`.
    Collapse { target: Vec3 },
    /// Dirac source onto a sphere: the product coupling (not a map).
    Spread { target: SphereSpec },
}

impl SphereMap {
    /// Image of a source point; `None` for the product coupling.
    pub fn apply(&self, v: &Vec3) -> Option<Vec3> {
        match *self {
            SphereMap::Translation { shift } => Some(vec3::add(v, &shift)),
            SphereMap::Dilation { center, factor } => {
                Some(vec3::add(&center, &vec3::scale(&vec3::sub(v, &center), factor)))
            }
            SphereMap::Collapse { target } => Some(target),
            SphereMap::Spread { .. } => None,
        }
    }
}

/// Transport from `U(O, r)` to `U(O', r')` and its cost `|O' - O|² + (r' - r)²`.
pub fn sphere_transport_map(s: &SphereSpec, t: &SphereSpec) -> (SphereMap, f64) {
    let delta = vec3::sub(&t.center, &s.center);
    let cost = vec3::dot(&delta, &delta) + (t.radius - s.radius).powi(2);
    let map = if s.radius == 0.0 && t.radius == 0.0 {
        SphereMap::Translation { shift: delta }
    } else if s.radius == 0.0 {
        SphereMap::Spread { target: *t }
    } else if t.radius == 0.0 {
        SphereMap::Collapse { target: t.center }
    } else if s.radius == t.radius {
        SphereMap::Translation { shift: delta }
    } else if delta == [0.0; 3] {
        SphereMap::Dilation { center: s.center, factor: t.radius / s.radius }
    } else {
        // Ω solves (O - Ω)/r = (O' - Ω)/r'
        let k = s.radius / (s.radius - t.radius);
        SphereMap::Dilation {
            center: vec3::add(&s.center, &vec3::scale(&delta, k)),
            factor: t.radius / s.radius,
        }
    };
    (map, cost)
}

/// Upper bound `|c - c'|² + r² + r'² - r r' (1 + |k·k'|)` on the squared `W2`
/// between two uniform circle measures.
pub fn circle_cost_bound(a: &CircleSpec, b: &CircleSpec) -> f64 {
    let dc = vec3::sub(&a.center, &b.center);
    let kk = vec3::dot(&a.axis, &b.axis).abs().min(1.0);
    let value = vec3::dot(&dc, &dc) + a.radius * a.radius + b.radius * b.radius
        - a.radius * b.radius * (1.0 + kk);
    value.max(0.0)
}
