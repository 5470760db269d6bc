//! Models of hyperbolic space and the maps between them.
//!
//! Coordinates follow the diagonal basis of [`crate::projective`]: the
//! hyperboloid lives in `ℝ^{n-1,1}` with the time coordinate last, and both
//! ball models use the first `n-1` coordinates of the chart `x_n = 1`.
//! Plane geometry for the gasket uses [`CircleOrLine`] and the extended plane
//! [`ExtendedPoint`]; the point at infinity is always an explicit variant.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::coxeter::UNIT_TOL;
use crate::error::{Error, Result};
use crate::form::{GramMatrix, Vector};

/// Boundary tolerance for ball points.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Circles with radius below this are treated as degenerate.
pub const MIN_RADIUS: f64 = 1e-12;

pub type Point2 = [f64; 2];

/// Point of the upper sheet `q = -1, x_n > 0`, in diagonal coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperboloidPoint(Vec<f64>);

impl HyperboloidPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let q = lorentz_form(&coords, &coords);
        let last = *coords
            .last()
            .ok_or_else(|| Error::arg("empty coordinates"))?;
        if (q + 1.0).abs() > 1e-9 * (1.0 + last * last) || last <= 0.0 {
            return Err(Error::arg(format!(
                "not on the upper hyperboloid sheet (q = {q}, last = {last})"
            )));
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

/// `x₁y₁ + … + x_{n-1}y_{n-1} - x_n y_n`.
pub fn lorentz_form(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    x[..n - 1]
        .iter()
        .zip(&y[..n - 1])
        .map(|(a, b)| a * b)
        .sum::<f64>()
        - x[n - 1] * y[n - 1]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallModel {
    Projective,
    Conformal,
}

/// Point of the closed unit ball in one of the two ball models.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    coords: Vec<f64>,
    model: BallModel,
    boundary: bool,
}

impl BallPoint {
    pub fn new(coords: Vec<f64>, model: BallModel) -> Result<Self> {
        let norm = euclid_norm(&coords);
        if !(norm <= 1.0 + BOUNDARY_TOL) {
            return Err(Error::OutsideBall { norm });
        }
        Ok(Self {
            boundary: (norm - 1.0).abs() <= BOUNDARY_TOL,
            coords,
            model,
        })
    }

    pub fn projective(coords: Vec<f64>) -> Result<Self> {
        Self::new(coords, BallModel::Projective)
    }

    pub fn conformal(coords: Vec<f64>) -> Result<Self> {
        Self::new(coords, BallModel::Conformal)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn model(&self) -> BallModel {
        self.model
    }

    pub fn is_boundary(&self) -> bool {
        self.boundary
    }

    pub fn norm(&self) -> f64 {
        euclid_norm(&self.coords)
    }
}

/// Point of the closed upper half-space; the boundary is `x_last = 0` or `∞`.
#[derive(Debug, Clone, PartialEq)]
pub enum HalfSpacePoint {
    Finite(Vec<f64>),
    Infinity,
}

impl HalfSpacePoint {
    pub fn is_boundary(&self) -> bool {
        match self {
            HalfSpacePoint::Finite(x) => x.last().is_none_or(|&h| h.abs() <= BOUNDARY_TOL),
            HalfSpacePoint::Infinity => true,
        }
    }

    pub fn finite(&self) -> Option<&[f64]> {
        match self {
            HalfSpacePoint::Finite(x) => Some(x),
            HalfSpacePoint::Infinity => None,
        }
    }
}

pub(crate) fn euclid_norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// `p(v) = v / √|q(v)|`, flipped onto the upper sheet when needed.
pub fn radial_project(x: &[f64]) -> Result<HyperboloidPoint> {
    if x.is_empty() {
        return Err(Error::arg("empty coordinates"));
    }
    let q = lorentz_form(x, x);
    if !(q < 0.0) {
        return Err(Error::NotTimeLike { q });
    }
    let s = q.abs().sqrt() * x[x.len() - 1].signum();
    Ok(HyperboloidPoint(x.iter().map(|c| c / s).collect()))
}

/// Radial projection of a vector given in simple-root coordinates.
pub fn radial_project_roots(
    basis: &crate::projective::DiagonalBasis,
    v: &Vector,
) -> Result<HyperboloidPoint> {
    let x = basis.to_diagonal(v)?;
    radial_project(x.as_slice())
}

/// `d(x, y) = arccosh(-B(x, y))`.
pub fn hyperbolic_distance(x: &HyperboloidPoint, y: &HyperboloidPoint) -> Result<f64> {
    if x.0.len() != y.0.len() {
        return Err(Error::DimensionMismatch {
            expected: x.0.len(),
            got: y.0.len(),
        });
    }
    let c = -lorentz_form(&x.0, &y.0);
    if c < 1.0 - 1e-9 {
        return Err(Error::numeric(format!("-B(x, y) = {c} < 1")));
    }
    Ok(c.max(1.0).acosh())
}

/// Inverse of the radial projection restricted to the chart: `p ↦ (p, 1)/√(1-‖p‖²)`.
pub fn projective_to_hyperboloid(p: &BallPoint) -> Result<HyperboloidPoint> {
    let s = 1.0 - p.norm().powi(2);
    if !(s > 0.0) {
        return Err(Error::arg("boundary points have no hyperboloid image"));
    }
    let mut coords: Vec<f64> = p.coords.to_vec();
    coords.push(1.0);
    Ok(HyperboloidPoint(
        coords.into_iter().map(|c| c / s.sqrt()).collect(),
    ))
}

/// The chart isometry `c∘p`: `x ↦ (1 - √(1-‖x‖²))/‖x‖² · x`, identity on the
/// boundary sphere.
pub fn projective_to_conformal(x: &BallPoint) -> Result<BallPoint> {
    let s = x.norm().powi(2);
    if s > 1.0 + 2.0 * BOUNDARY_TOL {
        return Err(Error::OutsideBall { norm: s.sqrt() });
    }
    // (1 - √(1-s))/s rewritten without cancellation near the origin.
    let factor = 1.0 / (1.0 + (1.0 - s).max(0.0).sqrt());
    let coords = if x.boundary {
        x.coords.clone()
    } else {
        x.coords.iter().map(|c| c * factor).collect()
    };
    BallPoint::conformal(coords)
}

/// Inverse chart map `y ↦ 2y / (1 + ‖y‖²)`.
pub fn conformal_to_projective(y: &BallPoint) -> Result<BallPoint> {
    let s = y.norm().powi(2);
    let coords = if y.boundary {
        y.coords.clone()
    } else {
        y.coords.iter().map(|c| 2.0 * c / (1.0 + s)).collect()
    };
    BallPoint::projective(coords)
}

/// Distance in the conformal ball.
pub fn poincare_distance(x: &BallPoint, y: &BallPoint) -> f64 {
    let d2: f64 = x
        .coords
        .iter()
        .zip(&y.coords)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let sx = 1.0 - x.norm().powi(2);
    let sy = 1.0 - y.norm().powi(2);
    (1.0 + 2.0 * d2 / (sx * sy)).acosh()
}

/// Inversion in the sphere of radius `√2` centred at `-e_last`:
/// `u(x) = 2(x + e)/‖x + e‖² - e`. It is its own inverse and swaps `-e` with `∞`.
pub fn upper_inversion(x: &[f64]) -> HalfSpacePoint {
    let m = x.len();
    let mut y = x.to_vec();
    y[m - 1] += 1.0;
    let s: f64 = y.iter().map(|c| c * c).sum();
    if s == 0.0 {
        return HalfSpacePoint::Infinity;
    }
    let mut out: Vec<f64> = y.iter().map(|c| 2.0 * c / s).collect();
    out[m - 1] -= 1.0;
    HalfSpacePoint::Finite(out)
}

/// Conformal ball to upper half-space.
pub fn conformal_to_upper(x: &BallPoint) -> Result<HalfSpacePoint> {
    if x.model != BallModel::Conformal {
        return Err(Error::arg("expected a conformal-ball point"));
    }
    Ok(upper_inversion(&x.coords))
}

/// Upper half-space to conformal ball (the same inversion).
pub fn upper_to_conformal(h: &HalfSpacePoint, dim: usize) -> Result<BallPoint> {
    match h {
        HalfSpacePoint::Infinity => {
            let mut c = vec![0.0; dim];
            c[dim - 1] = -1.0;
            BallPoint::conformal(c)
        }
        HalfSpacePoint::Finite(x) => match upper_inversion(x) {
            HalfSpacePoint::Finite(y) => BallPoint::conformal(y),
            HalfSpacePoint::Infinity => Err(Error::arg("-e is not in the upper half-space")),
        },
    }
}

/// Point of the extended plane `ℝ² ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedPoint {
    Finite(Point2),
    Infinity,
}

/// Generalized circle of the extended plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CircleOrLine {
    Circle {
        center: Point2,
        radius: f64,
    },
    /// Line through `point` with unit `normal`.
    Line {
        point: Point2,
        normal: Point2,
    },
}

pub(crate) fn sub(a: Point2, b: Point2) -> Point2 {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn dot(a: Point2, b: Point2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn norm2(a: Point2) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist2(a: Point2, b: Point2) -> f64 {
    norm2(sub(a, b))
}

impl CircleOrLine {
    pub fn circle(center: Point2, radius: f64) -> Result<Self> {
        if !(radius > MIN_RADIUS) || !radius.is_finite() {
            return Err(Error::numeric(format!("degenerate circle radius {radius}")));
        }
        Ok(CircleOrLine::Circle { center, radius })
    }

    /// Line through `point` with the given (not necessarily unit) normal.
    pub fn line(point: Point2, normal: Point2) -> Result<Self> {
        let n = norm2(normal);
        if !(n > 0.0) {
            return Err(Error::numeric("zero line normal"));
        }
        Ok(CircleOrLine::Line {
            point,
            normal: [normal[0] / n, normal[1] / n],
        })
    }

    /// Unsigned Euclidean distance from `p` to the curve.
    pub fn distance_to(&self, p: Point2) -> f64 {
        match *self {
            CircleOrLine::Circle { center, radius } => (dist2(p, center) - radius).abs(),
            CircleOrLine::Line { point, normal } => dot(sub(p, point), normal).abs(),
        }
    }

    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        self.distance_to(p) <= tol
    }

    /// Point of the curve at parameter `t` (angle for circles, arclength for lines).
    pub fn sample(&self, t: f64) -> Point2 {
        match *self {
            CircleOrLine::Circle { center, radius } => {
                [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
            }
            CircleOrLine::Line { point, normal } => {
                [point[0] - normal[1] * t, point[1] + normal[0] * t]
            }
        }
    }

    /// Whether `self` and `other` meet at right angles.
    pub fn is_orthogonal_to(&self, other: &CircleOrLine, tol: f64) -> bool {
        match (*self, *other) {
            (
                CircleOrLine::Circle {
                    center: a,
                    radius: r,
                },
                CircleOrLine::Circle {
                    center: b,
                    radius: s,
                },
            ) => (dist2(a, b).powi(2) - r * r - s * s).abs() <= tol * (1.0 + r * r + s * s),
            (CircleOrLine::Circle { center, .. }, CircleOrLine::Line { point, normal })
            | (CircleOrLine::Line { point, normal }, CircleOrLine::Circle { center, .. }) => {
                dot(sub(center, point), normal).abs() <= tol
            }
            (CircleOrLine::Line { normal: n1, .. }, CircleOrLine::Line { normal: n2, .. }) => {
                dot(n1, n2).abs() <= tol
            }
        }
    }
}

/// `i_{a,r}(x) = a + r² (x - a)/‖x - a‖²` extended by `a ↔ ∞`; a line acts as
/// the Euclidean reflection across it.
pub fn invert_point(s: &CircleOrLine, x: ExtendedPoint) -> ExtendedPoint {
    match (*s, x) {
        (CircleOrLine::Circle { center, .. }, ExtendedPoint::Infinity) => {
            ExtendedPoint::Finite(center)
        }
        (CircleOrLine::Circle { center, radius }, ExtendedPoint::Finite(p)) => {
            let d = sub(p, center);
            let n2 = dot(d, d);
            if n2 == 0.0 {
                return ExtendedPoint::Infinity;
            }
            let k = radius * radius / n2;
            ExtendedPoint::Finite([center[0] + k * d[0], center[1] + k * d[1]])
        }
        (CircleOrLine::Line { .. }, ExtendedPoint::Infinity) => ExtendedPoint::Infinity,
        (CircleOrLine::Line { point, normal }, ExtendedPoint::Finite(p)) => {
            let h = dot(sub(p, point), normal);
            ExtendedPoint::Finite([p[0] - 2.0 * h * normal[0], p[1] - 2.0 * h * normal[1]])
        }
    }
}

/// Image of the generalized circle `c` under the inversion (or reflection) `s`.
pub fn invert_circle(s: &CircleOrLine, c: &CircleOrLine) -> Result<CircleOrLine> {
    match (*s, *c) {
        (
            CircleOrLine::Circle {
                center: a,
                radius: r,
            },
            CircleOrLine::Circle {
                center,
                radius: rho,
            },
        ) => {
            let d = sub(center, a);
            let dist = norm2(d);
            let power = dist * dist - rho * rho;
            if power.abs() <= 1e-12 * (dist * dist + rho * rho).max(1.0) {
                // circle through the centre of inversion: image is a line
                if dist == 0.0 {
                    return Err(Error::numeric(
                        "degenerate circle at the centre of inversion",
                    ));
                }
                let u = [d[0] / dist, d[1] / dist];
                let h = r * r / (2.0 * rho);
                return CircleOrLine::line([a[0] + h * u[0], a[1] + h * u[1]], u);
            }
            let k = r * r / power;
            CircleOrLine::circle([a[0] + k * d[0], a[1] + k * d[1]], k.abs() * rho)
        }
        (
            CircleOrLine::Circle {
                center: a,
                radius: r,
            },
            CircleOrLine::Line { point, normal },
        ) => {
            let delta = dot(sub(point, a), normal);
            if delta.abs() <= 1e-12 * (1.0 + norm2(sub(point, a))) {
                return Ok(*c);
            }
            let k = r * r / (2.0 * delta);
            CircleOrLine::circle([a[0] + k * normal[0], a[1] + k * normal[1]], k.abs())
        }
        (CircleOrLine::Line { .. }, CircleOrLine::Circle { center, radius }) => {
            let ExtendedPoint::Finite(m) = invert_point(s, ExtendedPoint::Finite(center)) else {
                unreachable!()
            };
            CircleOrLine::circle(m, radius)
        }
        (CircleOrLine::Line { normal: ln, .. }, CircleOrLine::Line { point, normal }) => {
            let ExtendedPoint::Finite(p) = invert_point(s, ExtendedPoint::Finite(point)) else {
                unreachable!()
            };
            let h = dot(normal, ln);
            CircleOrLine::line(
                p,
                [normal[0] - 2.0 * h * ln[0], normal[1] - 2.0 * h * ln[1]],
            )
        }
    }
}

/// Generalized circle through three points: a line when they are collinear.
pub fn circle_through(p: Point2, q: Point2, r: Point2) -> Result<CircleOrLine> {
    let ax = q[0] - p[0];
    let ay = q[1] - p[1];
    let bx = r[0] - p[0];
    let by = r[1] - p[1];
    let det = 2.0 * (ax * by - ay * bx);
    let scale = (ax * ax + ay * ay).max(bx * bx + by * by);
    if scale == 0.0 {
        return Err(Error::numeric("coincident points"));
    }
    if det.abs() <= 1e-14 * scale {
        let dir = if ax * ax + ay * ay > 0.0 {
            [ax, ay]
        } else {
            [bx, by]
        };
        return CircleOrLine::line(p, [-dir[1], dir[0]]);
    }
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let ux = (by * a2 - ay * b2) / det;
    let uy = (ax * b2 - bx * a2) / det;
    CircleOrLine::circle([p[0] + ux, p[1] + uy], (ux * ux + uy * uy).sqrt())
}

/// Relative position of the hyperbolic hyperplanes `α^⊥` and `β^⊥`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HyperplanePosition {
    /// Dihedral angle `arccos |B(α, β)|`.
    Intersect {
        angle: f64,
    },
    Parallel,
    /// Distance `arccosh |B(α, β)|`.
    UltraParallel {
        distance: f64,
    },
}

pub fn hyperplane_position(
    g: &GramMatrix,
    alpha: &Vector,
    beta: &Vector,
) -> Result<HyperplanePosition> {
    for v in [alpha, beta] {
        let q = g.quadratic(v)?;
        if (q - 1.0).abs() > UNIT_TOL {
            return Err(Error::NonUnitRoot { q });
        }
    }
    let (a, b) = (alpha.coords(), beta.coords());
    let scale = DVector::from_column_slice(a).amax() * DVector::from_column_slice(b).amax();
    let independent = (0..a.len())
        .flat_map(|i| (i + 1..a.len()).map(move |j| (i, j)))
        .any(|(i, j)| (a[i] * b[j] - a[j] * b[i]).abs() > 1e-12 * scale);
    if !independent {
        return Err(Error::arg("normals are linearly dependent"));
    }
    let c = g.bilinear(alpha, beta)?.abs();
    Ok(if c < 1.0 - UNIT_TOL {
        HyperplanePosition::Intersect { angle: c.acos() }
    } else if c <= 1.0 + UNIT_TOL {
        HyperplanePosition::Parallel
    } else {
        HyperplanePosition::UltraParallel {
            distance: c.acosh(),
        }
    })
}

/// Angle between two tangent directions, in `[0, π]`.
pub fn angle_between(u: Point2, v: Point2) -> f64 {
    let c = dot(u, v) / (norm2(u) * norm2(v));
    c.clamp(-1.0, 1.0).acos().min(PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_ball_point(rng: &mut ChaCha8Rng, dim: usize, max_norm: f64) -> Vec<f64> {
        loop {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if euclid_norm(&x) < max_norm {
                return x;
            }
        }
    }

    #[test]
    fn radial_projection_examples() {
        let p = radial_project(&[0.0, 0.0, 2.0]).unwrap();
        assert_eq!(p.coords(), &[0.0, 0.0, 1.0]);
        let h = [1f64.sinh(), 0.0, 1f64.cosh()];
        let once = radial_project(&h).unwrap();
        let twice = radial_project(&[2.0 * h[0], 0.0, 2.0 * h[2]]).unwrap();
        for (a, b) in once.coords().iter().zip(twice.coords()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-15);
        }
        // lower sheet is flipped
        let flipped = radial_project(&[0.0, 0.0, -3.0]).unwrap();
        assert_eq!(flipped.coords(), &[0.0, 0.0, 1.0]);
        assert!(matches!(
            radial_project(&[1.0, 0.0, 1.0]),
            Err(Error::NotTimeLike { .. })
        ));
    }

    #[test]
    fn distance_examples() {
        let o = HyperboloidPoint::new(vec![0.0, 0.0, 1.0]).unwrap();
        let y = HyperboloidPoint::new(vec![0.0, 1f64.sinh(), 1f64.cosh()]).unwrap();
        assert_eq!(hyperbolic_distance(&o, &o).unwrap(), 0.0);
        assert_abs_diff_eq!(hyperbolic_distance(&o, &y).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hyperbolic_distance(&y, &o).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let pts: Vec<HyperboloidPoint> = (0..3)
                .map(|_| {
                    projective_to_hyperboloid(
                        &BallPoint::projective(random_ball_point(&mut rng, 2, 0.99)).unwrap(),
                    )
                    .unwrap()
                })
                .collect();
            let d = |i: usize, j: usize| hyperbolic_distance(&pts[i], &pts[j]).unwrap();
            assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
        }
    }

    #[test]
    fn projective_conformal_examples() {
        let o = projective_to_conformal(&BallPoint::projective(vec![0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(o.coords(), &[0.0, 0.0]);
        let b = [0.6, 0.8];
        let bc = projective_to_conformal(&BallPoint::projective(b.to_vec()).unwrap()).unwrap();
        assert!(bc.is_boundary());
        assert_abs_diff_eq!(bc.coords()[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(bc.coords()[1], 0.8, epsilon = 1e-15);
        let half =
            projective_to_conformal(&BallPoint::projective(vec![0.5, 0.0]).unwrap()).unwrap();
        let want = (1.0 - 0.75f64.sqrt()) / 0.25 * 0.5;
        assert_abs_diff_eq!(half.coords()[0], want, epsilon = 1e-15);
        assert_abs_diff_eq!(half.coords()[0], 0.2679491924311227, epsilon = 1e-15);
        let back = conformal_to_projective(&half).unwrap();
        assert_abs_diff_eq!(back.coords()[0], 0.5, epsilon = 1e-15);
        assert!(matches!(
            BallPoint::projective(vec![1.1, 0.0]),
            Err(Error::OutsideBall { .. })
        ));
    }

    #[test]
    fn upper_half_space_examples() {
        let o = BallPoint::conformal(vec![0.0, 0.0]).unwrap();
        assert_eq!(
            conformal_to_upper(&o).unwrap(),
            HalfSpacePoint::Finite(vec![0.0, 1.0])
        );
        let top = BallPoint::conformal(vec![0.0, 1.0]).unwrap();
        let img = conformal_to_upper(&top).unwrap();
        assert_eq!(img, HalfSpacePoint::Finite(vec![0.0, 0.0]));
        assert!(img.is_boundary());
        let south = BallPoint::conformal(vec![0.0, -1.0]).unwrap();
        assert_eq!(
            conformal_to_upper(&south).unwrap(),
            HalfSpacePoint::Infinity
        );
        assert_eq!(
            upper_to_conformal(&HalfSpacePoint::Infinity, 2)
                .unwrap()
                .coords(),
            &[0.0, -1.0]
        );
        assert!(conformal_to_upper(&BallPoint::projective(vec![0.0, 0.0]).unwrap()).is_err());
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [2, 3] {
            for _ in 0..1000 {
                let x = random_ball_point(&mut rng, dim, 1.0);
                let c = BallPoint::conformal(x.clone()).unwrap();
                let back = projective_to_conformal(&conformal_to_projective(&c).unwrap()).unwrap();
                let up = conformal_to_upper(&c).unwrap();
                assert!(up.finite().unwrap()[dim - 1] > 0.0);
                let again = upper_to_conformal(&up, dim).unwrap();
                for k in 0..dim {
                    assert_abs_diff_eq!(back.coords()[k], x[k], epsilon = 1e-12);
                    assert_abs_diff_eq!(again.coords()[k], x[k], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn chart_map_is_an_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let a = BallPoint::projective(random_ball_point(&mut rng, 2, 0.95)).unwrap();
            let b = BallPoint::projective(random_ball_point(&mut rng, 2, 0.95)).unwrap();
            let dh = hyperbolic_distance(
                &projective_to_hyperboloid(&a).unwrap(),
                &projective_to_hyperboloid(&b).unwrap(),
            )
            .unwrap();
            let dc = poincare_distance(
                &projective_to_conformal(&a).unwrap(),
                &projective_to_conformal(&b).unwrap(),
            );
            assert_abs_diff_eq!(dh, dc, epsilon = 1e-9);
        }
    }

    #[test]
    fn invert_point_examples() {
        let unit = CircleOrLine::circle([0.0, 0.0], 1.0).unwrap();
        assert_eq!(
            invert_point(&unit, ExtendedPoint::Finite([2.0, 0.0])),
            ExtendedPoint::Finite([0.5, 0.0])
        );
        assert_eq!(
            invert_point(&unit, ExtendedPoint::Finite([0.0, 0.0])),
            ExtendedPoint::Infinity
        );
        assert_eq!(
            invert_point(&unit, ExtendedPoint::Infinity),
            ExtendedPoint::Finite([0.0, 0.0])
        );
        let on = [0.6, -0.8];
        let ExtendedPoint::Finite(img) = invert_point(&unit, ExtendedPoint::Finite(on)) else {
            panic!()
        };
        assert_abs_diff_eq!(dist2(img, on), 0.0, epsilon = 1e-15);
    }

    /// Image circle computed by mapping three points and taking their circumcircle.
    fn three_point_image(s: &CircleOrLine, c: &CircleOrLine) -> CircleOrLine {
        let pts: Vec<Point2> = [0.3, 2.2, 4.4]
            .iter()
            .map(
                |&t| match invert_point(s, ExtendedPoint::Finite(c.sample(t))) {
                    ExtendedPoint::Finite(p) => p,
                    ExtendedPoint::Infinity => panic!("sample hit the centre"),
                },
            )
            .collect();
        circle_through(pts[0], pts[1], pts[2]).unwrap()
    }

    fn assert_same_circle(a: &CircleOrLine, b: &CircleOrLine, tol: f64) {
        match (*a, *b) {
            (
                CircleOrLine::Circle {
                    center: c1,
                    radius: r1,
                },
                CircleOrLine::Circle {
                    center: c2,
                    radius: r2,
                },
            ) => {
                assert!(
                    dist2(c1, c2) <= tol && (r1 - r2).abs() <= tol,
                    "{a:?} vs {b:?}"
                );
            }
            (CircleOrLine::Line { point, normal: n1 }, CircleOrLine::Line { normal: n2, .. }) => {
                assert!(
                    b.contains(point, tol) && (dot(n1, n2).abs() - 1.0).abs() <= tol,
                    "{a:?} vs {b:?}"
                );
            }
            _ => panic!("kinds differ: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn invert_circle_examples() {
        let unit = CircleOrLine::circle([0.0, 0.0], 1.0).unwrap();
        let c = CircleOrLine::circle([3.0, 0.0], 1.0).unwrap();
        let img = invert_circle(&unit, &c).unwrap();
        assert_same_circle(
            &img,
            &CircleOrLine::circle([0.375, 0.0], 0.125).unwrap(),
            1e-12,
        );
        assert_same_circle(&img, &three_point_image(&unit, &c), 1e-9);

        // orthogonal circle is stable
        let orth = CircleOrLine::circle([1.0, 1.0], 1.0).unwrap();
        assert!(orth.is_orthogonal_to(&unit, 1e-12));
        assert_same_circle(&invert_circle(&unit, &orth).unwrap(), &orth, 1e-9);

        // circle through the centre maps to a line through the images of its points
        let through = CircleOrLine::circle([0.5, 0.0], 0.5).unwrap();
        let line = invert_circle(&unit, &through).unwrap();
        assert!(matches!(line, CircleOrLine::Line { .. }));
        assert_same_circle(&line, &three_point_image(&unit, &through), 1e-9);
        // and back
        assert_same_circle(&invert_circle(&unit, &line).unwrap(), &through, 1e-9);

        assert!(CircleOrLine::circle([0.0, 0.0], 1e-13).is_err());
    }

    #[test]
    fn reflections_in_lines() {
        let axis = CircleOrLine::line([0.0, 0.0], [0.0, 1.0]).unwrap();
        let c = CircleOrLine::circle([1.0, 2.0], 0.5).unwrap();
        assert_same_circle(
            &invert_circle(&axis, &c).unwrap(),
            &CircleOrLine::circle([1.0, -2.0], 0.5).unwrap(),
            1e-15,
        );
        let l = CircleOrLine::line([0.0, 1.0], [1.0, 1.0]).unwrap();
        assert_same_circle(
            &invert_circle(&axis, &l).unwrap(),
            &three_point_image(&axis, &l),
            1e-9,
        );
    }

    #[test]
    fn hyperplane_position_examples() {
        let g = GramMatrix::from_matrix(nalgebra::DMatrix::from_row_slice(
            2,
            2,
            &[1.0, -0.5, -0.5, 1.0],
        ))
        .unwrap();
        let (a, b) = (Vector::simple(2, 0), Vector::simple(2, 1));
        match hyperplane_position(&g, &a, &b).unwrap() {
            HyperplanePosition::Intersect { angle } => {
                assert_abs_diff_eq!(angle, PI / 3.0, epsilon = 1e-12)
            }
            other => panic!("{other:?}"),
        }
        let g4 = GramMatrix::universal(4, -1.0).unwrap();
        for i in 0..4 {
            for j in i + 1..4 {
                assert_eq!(
                    hyperplane_position(&g4, &Vector::simple(4, i), &Vector::simple(4, j)).unwrap(),
                    HyperplanePosition::Parallel
                );
            }
        }
        let gu = GramMatrix::universal(2, -(1f64.cosh())).unwrap();
        match hyperplane_position(&gu, &a, &b).unwrap() {
            HyperplanePosition::UltraParallel { distance } => {
                assert_abs_diff_eq!(distance, 1.0, epsilon = 1e-12)
            }
            other => panic!("{other:?}"),
        }
        assert!(hyperplane_position(&g, &a, &a).is_err());
        assert!(matches!(
            hyperplane_position(&g, &a.scaled(2.0), &b),
            Err(Error::NonUnitRoot { .. })
        ));
    }

    fn circle_strategy() -> impl Strategy<Value = CircleOrLine> {
        (-3.0..3.0f64, -3.0..3.0f64, 0.05..2.0f64)
            .prop_map(|(x, y, r)| CircleOrLine::circle([x, y], r).unwrap())
    }

    proptest! {
        #[test]
        fn invert_circle_matches_point_images(s in circle_strategy(), c in circle_strategy()) {
            let img = invert_circle(&s, &c).unwrap();
            for t in [0.1, 1.7, 3.3, 5.0] {
                if let ExtendedPoint::Finite(p) = invert_point(&s, ExtendedPoint::Finite(c.sample(t))) {
                    let scale = 1.0 + norm2(p);
                    prop_assert!(img.distance_to(p) <= 1e-9 * scale, "{:?} misses {:?}", img, p);
                }
            }
        }

        #[test]
        fn inversions_preserve_angles(
            a in (-2.0..2.0f64, -2.0..2.0f64),
            t1 in 0.0..std::f64::consts::TAU,
            t2 in 0.0..std::f64::consts::TAU,
        ) {
            // Two straight curves through p; compare angles of their images by finite differences.
            let s = CircleOrLine::circle([0.3, -0.2], 1.3).unwrap();
            let p = [a.0, a.1];
            prop_assume!(dist2(p, [0.3, -0.2]) > 0.2);
            let h = 1e-6;
            let img = |q: Point2| match invert_point(&s, ExtendedPoint::Finite(q)) {
                ExtendedPoint::Finite(x) => x,
                ExtendedPoint::Infinity => unreachable!(),
            };
            let tangent = |t: f64| {
                let d = [t.cos(), t.sin()];
                let fwd = img([p[0] + h * d[0], p[1] + h * d[1]]);
                let bwd = img([p[0] - h * d[0], p[1] - h * d[1]]);
                [fwd[0] - bwd[0], fwd[1] - bwd[1]]
            };
            let before = angle_between([t1.cos(), t1.sin()], [t2.cos(), t2.sin()]);
            let after = angle_between(tangent(t1), tangent(t2));
            prop_assert!((before - after).abs() <= 1e-6);

            // same for u in the plane
            let q = [a.0 * 0.4, a.1 * 0.4];
            prop_assume!(euclid_norm(&q) < 0.95);
            let uimg = |x: Point2| match upper_inversion(&x) {
                HalfSpacePoint::Finite(y) => [y[0], y[1]],
                HalfSpacePoint::Infinity => unreachable!(),
            };
            let utan = |t: f64| {
                let d = [t.cos(), t.sin()];
                let fwd = uimg([q[0] + h * d[0], q[1] + h * d[1]]);
                let bwd = uimg([q[0] - h * d[0], q[1] - h * d[1]]);
                [fwd[0] - bwd[0], fwd[1] - bwd[1]]
            };
            prop_assert!((before - angle_between(utan(t1), utan(t2))).abs() <= 1e-6);
        }
    }
}
