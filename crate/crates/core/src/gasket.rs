//! Apollonian gaskets from tangent horocycles and from the rank-4 universal
//! root system.
//!
//! The intrinsic construction starts from three boundary points of the
//! conformal disk, solves for the pairwise tangent horocycles at those points
//! and takes the orbit of the horocycles and the unit circle under the
//! inversions in the three geodesic circles and the circle through the
//! tangency points. The rank-4 construction cuts the boundary sphere of the
//! projective ball with the faces of the simplex of normalized simple roots
//! and with the simple hyperplanes, then carries everything to the boundary
//! plane of the upper half-space with the maps of [`crate::models`].

use std::collections::HashSet;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::form::{GramMatrix, Vector};
use crate::models::{
    circle_through, conformal_to_upper, dist2, dot, invert_circle, invert_point, norm2,
    projective_to_conformal, sub, BallPoint, CircleOrLine, ExtendedPoint, HalfSpacePoint, Point2,
};
use crate::projective::{diagonalizing_basis, normalize, DiagonalBasis, NormalizedPoint};

/// Tangency and clearance tolerance of the scene invariant.
pub const CONTACT_TOL: f64 = 1e-9;

/// Newton stops once every tangency residual is below this.
pub const HOROCYCLE_TOL: f64 = 1e-12;

pub const NEWTON_MAX_ITER: usize = 100;

/// Default element budget for gasket orbits.
pub const GASKET_BUDGET: usize = 1_000_000;

/// How two generalized circles meet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Contact {
    Tangent(ExtendedPoint),
    Disjoint,
    Crossing,
}

/// Classifies the pair with absolute tolerance `tol` on distances.
pub fn contact(a: &CircleOrLine, b: &CircleOrLine, tol: f64) -> Contact {
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
            let d = dist2(c1, c2);
            if (d - (r1 + r2)).abs() <= tol {
                Contact::Tangent(ExtendedPoint::Finite(along(c1, c2, r1 / (r1 + r2))))
            } else if (d - (r1 - r2).abs()).abs() <= tol {
                if d == 0.0 {
                    // coincident within tolerance; no single contact point
                    return Contact::Tangent(ExtendedPoint::Finite([c1[0] + r1, c1[1]]));
                }
                let p = if r1 >= r2 {
                    along(c1, c2, r1 / d)
                } else {
                    along(c2, c1, r2 / d)
                };
                Contact::Tangent(ExtendedPoint::Finite(p))
            } else if d > r1 + r2 || d < (r1 - r2).abs() {
                Contact::Disjoint
            } else {
                Contact::Crossing
            }
        }
        (CircleOrLine::Circle { center, radius }, CircleOrLine::Line { point, normal })
        | (CircleOrLine::Line { point, normal }, CircleOrLine::Circle { center, radius }) => {
            let h = dot(sub(center, point), normal);
            if (h.abs() - radius).abs() <= tol {
                Contact::Tangent(ExtendedPoint::Finite([
                    center[0] - h * normal[0],
                    center[1] - h * normal[1],
                ]))
            } else if h.abs() > radius {
                Contact::Disjoint
            } else {
                Contact::Crossing
            }
        }
        (CircleOrLine::Line { normal: n1, .. }, CircleOrLine::Line { normal: n2, .. }) => {
            if (n1[0] * n2[1] - n1[1] * n2[0]).abs() <= tol {
                Contact::Tangent(ExtendedPoint::Infinity)
            } else {
                Contact::Crossing
            }
        }
    }
}

/// `p + t (q - p)`.
fn along(p: Point2, q: Point2, t: f64) -> Point2 {
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

fn require_boundary(p: Point2) -> Result<()> {
    if (norm2(p) - 1.0).abs() > 1e-9 {
        return Err(Error::arg(format!("{p:?} is not on the unit circle")));
    }
    Ok(())
}

/// The generalized circle through boundary points `a`, `b` orthogonal to the
/// unit circle: the carrier of the geodesic `(ab)`.
pub fn geodesic_circle(a: Point2, b: Point2) -> Result<CircleOrLine> {
    require_boundary(a)?;
    require_boundary(b)?;
    if dist2(a, b) <= 1e-12 {
        return Err(Error::arg("geodesic endpoints coincide"));
    }
    let c = dot(a, b);
    if 1.0 + c <= 1e-12 {
        return CircleOrLine::line([0.0, 0.0], [-a[1], a[0]]);
    }
    let m = [(a[0] + b[0]) / (1.0 + c), (a[1] + b[1]) / (1.0 + c)];
    CircleOrLine::circle(m, (dot(m, m) - 1.0).sqrt())
}

/// Horocycles at three boundary points, each tangent to the other two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horocycles {
    pub circles: [CircleOrLine; 3],
    pub radii: [f64; 3],
    /// `‖mᵢ - mⱼ‖ - (rᵢ + rⱼ)` for the pairs (a,b), (a,c), (b,c).
    pub residuals: [f64; 3],
    pub iterations: usize,
}

impl Horocycles {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn horocycle_residuals(p: &[Point2; 3], r: &[f64; 3]) -> [f64; 3] {
    let m = |i: usize| [(1.0 - r[i]) * p[i][0], (1.0 - r[i]) * p[i][1]];
    PAIRS.map(|(i, j)| dist2(m(i), m(j)) - (r[i] + r[j]))
}

/// Solves `‖mᵢ - mⱼ‖ = rᵢ + rⱼ` with `mᵢ = (1 - rᵢ) pᵢ` by damped Newton.
pub fn tangent_horocycles(a: Point2, b: Point2, c: Point2) -> Result<Horocycles> {
    let p = [a, b, c];
    for q in &p {
        require_boundary(*q)?;
    }
    for (i, j) in PAIRS {
        if dist2(p[i], p[j]) <= 1e-9 {
            return Err(Error::arg("horocycle points must be distinct"));
        }
    }
    // symmetric start: the common radius of three points spaced 120° apart
    let s = 3f64.sqrt() / 2.0;
    let mut r = [s / (1.0 + s); 3];
    let mut f = horocycle_residuals(&p, &r);
    let norm = |f: &[f64; 3]| f.iter().map(|x| x * x).sum::<f64>().sqrt();
    for iter in 0..NEWTON_MAX_ITER {
        if f.iter().all(|x| x.abs() <= HOROCYCLE_TOL) {
            return Ok(finish_horocycles(&p, r, iter));
        }
        let mut jac = Matrix3::zeros();
        for (row, &(i, j)) in PAIRS.iter().enumerate() {
            let mi = [(1.0 - r[i]) * p[i][0], (1.0 - r[i]) * p[i][1]];
            let mj = [(1.0 - r[j]) * p[j][0], (1.0 - r[j]) * p[j][1]];
            let d = sub(mi, mj);
            let len = norm2(d).max(1e-300);
            // ∂‖mᵢ - mⱼ‖/∂rᵢ = -(d·pᵢ)/‖d‖, ∂/∂rⱼ = (d·pⱼ)/‖d‖
            jac[(row, i)] = -dot(d, p[i]) / len - 1.0;
            jac[(row, j)] = dot(d, p[j]) / len - 1.0;
        }
        let step = jac
            .lu()
            .solve(&Vector3::new(-f[0], -f[1], -f[2]))
            .ok_or_else(|| Error::numeric("singular horocycle Jacobian"))?;
        let mut t = 1.0;
        loop {
            let trial = [r[0] + t * step[0], r[1] + t * step[1], r[2] + t * step[2]];
            if trial.iter().all(|&x| x > 0.0 && x < 1.0) {
                let ft = horocycle_residuals(&p, &trial);
                if norm(&ft) < norm(&f) || t < 1e-6 {
                    r = trial;
                    f = ft;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-12 {
                return Err(Error::numeric(format!(
                    "horocycle line search stalled, residuals {f:?}"
                )));
            }
        }
    }
    if f.iter().all(|x| x.abs() <= HOROCYCLE_TOL) {
        return Ok(finish_horocycles(&p, r, NEWTON_MAX_ITER));
    }
    Err(Error::numeric(format!(
        "horocycle Newton did not converge, residuals {f:?}"
    )))
}

fn finish_horocycles(p: &[Point2; 3], r: [f64; 3], iterations: usize) -> Horocycles {
    let circles = [0, 1, 2].map(|i| CircleOrLine::Circle {
        center: [(1.0 - r[i]) * p[i][0], (1.0 - r[i]) * p[i][1]],
        radius: r[i],
    });
    Horocycles {
        circles,
        radii: r,
        residuals: horocycle_residuals(p, &r),
        iterations,
    }
}

/// The same horocycles built by sending `c` to infinity: inversion in the
/// circle of radius `√2` about `c` turns the unit circle into the line
/// `x·c = 0`, `h_a`, `h_b` into equal circles of radius `‖a' - b'‖/2` resting
/// on it and `h_c` into the parallel line at twice that height.
pub fn horocycles_by_transport(a: Point2, b: Point2, c: Point2) -> Result<[CircleOrLine; 3]> {
    for q in [a, b, c] {
        require_boundary(q)?;
    }
    let s = CircleOrLine::circle(c, 2f64.sqrt())?;
    let image = |x: Point2| match invert_point(&s, ExtendedPoint::Finite(x)) {
        ExtendedPoint::Finite(y) => Ok(y),
        ExtendedPoint::Infinity => Err(Error::arg("horocycle points must be distinct")),
    };
    let (a1, b1) = (image(a)?, image(b)?);
    let r = dist2(a1, b1) / 2.0;
    let ha = CircleOrLine::circle([a1[0] - r * c[0], a1[1] - r * c[1]], r)?;
    let hb = CircleOrLine::circle([b1[0] - r * c[0], b1[1] - r * c[1]], r)?;
    let hc = CircleOrLine::line([-2.0 * r * c[0], -2.0 * r * c[1]], c)?;
    Ok([
        invert_circle(&s, &ha)?,
        invert_circle(&s, &hb)?,
        invert_circle(&s, &hc)?,
    ])
}

/// Circle through the three pairwise contact points of `h_a`, `h_b`, `h_c`.
pub fn tangency_circle(
    ha: &CircleOrLine,
    hb: &CircleOrLine,
    hc: &CircleOrLine,
) -> Result<CircleOrLine> {
    let point = |x: &CircleOrLine, y: &CircleOrLine| match contact(x, y, 1e-8) {
        Contact::Tangent(ExtendedPoint::Finite(p)) => Ok(p),
        other => Err(Error::numeric(format!(
            "horocycles are not tangent: {other:?}"
        ))),
    };
    let (p, q, r) = (point(ha, hb)?, point(ha, hc)?, point(hb, hc)?);
    match circle_through(p, q, r)? {
        CircleOrLine::Line { .. } => Err(Error::numeric("tangency points are collinear")),
        circle => Ok(circle),
    }
}

/// A circle of the orbit with the generation it first appeared in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasketCircle {
    pub shape: CircleOrLine,
    pub gen: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GasketScene {
    pub circles: Vec<GasketCircle>,
    pub generators: Vec<CircleOrLine>,
    pub seed: Vec<CircleOrLine>,
}

fn shape_json(c: &CircleOrLine) -> Value {
    match *c {
        CircleOrLine::Circle { center, radius } => json!({ "center": center, "r": radius }),
        CircleOrLine::Line { point, normal } => {
            json!({ "line": { "point": point, "normal": normal } })
        }
    }
}

impl GasketScene {
    pub fn to_value(&self) -> Value {
        let circles: Vec<Value> = self
            .circles
            .iter()
            .map(|c| {
                let mut v = shape_json(&c.shape);
                v["gen"] = json!(c.gen);
                v
            })
            .collect();
        json!({ "circles": circles, "generators": self.generators.iter().map(shape_json).collect::<Vec<_>>() })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_value()).expect("scene serializes")
    }

    /// Circles of generation at most `max_gen`.
    pub fn up_to(&self, max_gen: usize) -> impl Iterator<Item = &GasketCircle> {
        self.circles.iter().filter(move |c| c.gen <= max_gen)
    }

    /// First pair of circles that cross, if any.
    pub fn crossing_pair(&self, tol: f64) -> Option<(usize, usize)> {
        let n = self.circles.len();
        (0..n).into_par_iter().find_map_first(|i| {
            (i + 1..n)
                .find(|&j| {
                    contact(&self.circles[i].shape, &self.circles[j].shape, tol)
                        == Contact::Crossing
                })
                .map(|j| (i, j))
        })
    }

    /// Contact points of tangent pairs among circles of generation ≤ `max_gen`.
    pub fn tangency_points(&self, max_gen: usize, tol: f64) -> Vec<Point2> {
        let shapes: Vec<&CircleOrLine> = self.up_to(max_gen).map(|c| &c.shape).collect();
        let mut out = Vec::new();
        for i in 0..shapes.len() {
            for j in i + 1..shapes.len() {
                if let Contact::Tangent(ExtendedPoint::Finite(p)) =
                    contact(shapes[i], shapes[j], tol)
                {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Distance from `p` to the union of the circles.
    pub fn distance_to(&self, p: Point2) -> f64 {
        self.circles
            .iter()
            .map(|c| c.shape.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }
}

fn rounded(x: f64) -> i64 {
    (x * 1e9).round() as i64
}

/// Dedup key: rounded centre and radius, or rounded canonical line equation.
pub(crate) fn shape_key(c: &CircleOrLine) -> (u8, i64, i64, i64) {
    match *c {
        CircleOrLine::Circle { center, radius } => {
            (0, rounded(center[0]), rounded(center[1]), rounded(radius))
        }
        CircleOrLine::Line { point, normal } => {
            let flip = normal[0] < 0.0 || (normal[0] == 0.0 && normal[1] < 0.0);
            let n = if flip {
                [-normal[0], -normal[1]]
            } else {
                normal
            };
            (1, rounded(n[0]), rounded(n[1]), rounded(dot(n, point)))
        }
    }
}

/// Breadth-first orbit of `seed` under inversion in each generator, up to
/// `max_gen` inversions.
pub fn generate_gasket(
    seed: &[CircleOrLine],
    generators: &[CircleOrLine],
    max_gen: usize,
    budget: usize,
) -> Result<GasketScene> {
    let mut seen = HashSet::new();
    let mut circles = Vec::new();
    let mut frontier = Vec::new();
    for s in seed {
        if seen.insert(shape_key(s)) {
            circles.push(GasketCircle { shape: *s, gen: 0 });
            frontier.push(*s);
        }
    }
    for gen in 1..=max_gen {
        if frontier.is_empty() {
            break;
        }
        let images: Vec<Vec<CircleOrLine>> = frontier
            .par_iter()
            .map(|c| {
                generators
                    .iter()
                    .map(|s| invert_circle(s, c))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut next = Vec::new();
        for img in images.into_iter().flatten() {
            if seen.insert(shape_key(&img)) {
                if circles.len() >= budget {
                    return Err(Error::Budget { budget });
                }
                circles.push(GasketCircle { shape: img, gen });
                next.push(img);
            }
        }
        frontier = next;
    }
    Ok(GasketScene {
        circles,
        generators: generators.to_vec(),
        seed: seed.to_vec(),
    })
}

/// Seed and generators of the disk gasket for boundary points `a`, `b`, `c`.
pub fn intrinsic_configuration(
    a: Point2,
    b: Point2,
    c: Point2,
) -> Result<(Vec<CircleOrLine>, Vec<CircleOrLine>)> {
    let h = tangent_horocycles(a, b, c)?;
    let [ha, hb, hc] = h.circles;
    let tc = tangency_circle(&ha, &hb, &hc)?;
    let seed = vec![ha, hb, hc, CircleOrLine::circle([0.0, 0.0], 1.0)?];
    let generators = vec![
        geodesic_circle(a, b)?,
        geodesic_circle(a, c)?,
        geodesic_circle(b, c)?,
        tc,
    ];
    Ok((seed, generators))
}

/// Boundary points at 90°, 210° and 330°.
pub fn symmetric_points() -> [Point2; 3] {
    [90f64, 210.0, 330.0].map(|deg| {
        let t = deg.to_radians();
        [t.cos(), t.sin()]
    })
}

pub fn intrinsic_gasket(points: [Point2; 3], max_gen: usize, budget: usize) -> Result<GasketScene> {
    let (seed, generators) = intrinsic_configuration(points[0], points[1], points[2])?;
    generate_gasket(&seed, &generators, max_gen, budget)
}

/// The rank-4 universal system with all weights `-1`.
pub fn rank4_gram() -> GramMatrix {
    GramMatrix::universal(4, -1.0).expect("valid universal form")
}

/// Boundary-plane image of a point of the unit sphere (or of a normalized
/// root, after radial projection onto the sphere): `u ∘ c ∘ p`.
pub fn boundary_chart(p: &[f64]) -> Result<ExtendedPoint> {
    let n = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(n > 0.0) {
        return Err(Error::arg("the chart centre has no boundary image"));
    }
    let on_sphere = BallPoint::projective(p.iter().map(|x| x / n).collect())?;
    Ok(
        match conformal_to_upper(&projective_to_conformal(&on_sphere)?)? {
            HalfSpacePoint::Infinity => ExtendedPoint::Infinity,
            HalfSpacePoint::Finite(x) => ExtendedPoint::Finite([x[0], x[1]]),
        },
    )
}

/// Boundary-plane image of the sphere circle cut by the plane `normal·x = offset`.
pub fn sphere_section_image(normal: [f64; 3], offset: f64) -> Result<CircleOrLine> {
    let n = Vector3::from(normal);
    let len = n.norm();
    let (n, d) = (n / len, offset / len);
    if d.abs() >= 1.0 {
        return Err(Error::numeric("plane misses the boundary sphere"));
    }
    let helper = if n.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let u1 = n.cross(&helper).normalize();
    let u2 = n.cross(&u1);
    let rho = (1.0 - d * d).sqrt();
    let mut finite = Vec::new();
    for k in 0..6 {
        let t = 0.3 + k as f64 * std::f64::consts::TAU / 6.0;
        let x = n * d + (u1 * t.cos() + u2 * t.sin()) * rho;
        if let ExtendedPoint::Finite(p) = boundary_chart(x.as_slice())? {
            finite.push(p);
        }
    }
    // At most one sample can hit the pole; take three spread-out images.
    let pick = if finite.len() == 6 {
        [finite[0], finite[2], finite[4]]
    } else {
        [finite[0], finite[2], finite[3]]
    };
    circle_through(pick[0], pick[1], pick[2])
}

/// Chart plane `{x : B(lift(x), α_k) = 0}` as `(normal, offset)`.
pub fn hyperplane_chart_plane(g: &GramMatrix, basis: &DiagonalBasis, k: usize) -> ([f64; 3], f64) {
    let w = basis.matrix().transpose() * g.matrix().column(k);
    ([w[0], w[1], w[2]], -w[3])
}

/// Seed circles `h_χ` (sphere ∩ face of the simplex of normalized simple roots
/// opposite `χ`) and generator circles `∂H_χ`, both in the boundary plane.
pub fn rank4_configuration() -> Result<(Vec<CircleOrLine>, Vec<CircleOrLine>)> {
    let g = rank4_gram();
    let basis = diagonalizing_basis(&g)?;
    let hats: Vec<Vector3<f64>> = (0..4)
        .map(|i| {
            normalize(&basis, &Vector::simple(4, i)).map(|p| Vector3::from_column_slice(p.coords()))
        })
        .collect::<Result<_>>()?;
    let mut seed = Vec::with_capacity(4);
    for k in 0..4 {
        let o: Vec<&Vector3<f64>> = (0..4).filter(|&i| i != k).map(|i| &hats[i]).collect();
        let nv = (o[1] - o[0]).cross(&(o[2] - o[0]));
        seed.push(sphere_section_image([nv.x, nv.y, nv.z], nv.dot(o[0]))?);
    }
    let generators = (0..4)
        .map(|k| {
            let (nv, d) = hyperplane_chart_plane(&g, &basis, k);
            sphere_section_image(nv, d)
        })
        .collect::<Result<_>>()?;
    Ok((seed, generators))
}

pub fn rank4_gasket(max_gen: usize) -> Result<GasketScene> {
    rank4_gasket_with(max_gen, GASKET_BUDGET)
}

pub fn rank4_gasket_with(max_gen: usize, budget: usize) -> Result<GasketScene> {
    let (seed, generators) = rank4_configuration()?;
    generate_gasket(&seed, &generators, max_gen, budget)
}

/// Boundary-plane images of normalized roots; roots sent to the point at
/// infinity are dropped.
pub fn chart_roots(points: &[NormalizedPoint]) -> Result<Vec<Point2>> {
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        if let ExtendedPoint::Finite(x) = boundary_chart(p.coords())? {
            out.push(x);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::HyperplanePosition;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn deg(d: f64) -> Point2 {
        let t = d.to_radians();
        [t.cos(), t.sin()]
    }

    fn same(a: &CircleOrLine, b: &CircleOrLine) -> f64 {
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
            ) => dist2(c1, c2).max((r1 - r2).abs()),
            (CircleOrLine::Line { point, normal: n1 }, CircleOrLine::Line { normal: n2, .. }) => {
                b.distance_to(point).max(1.0 - dot(n1, n2).abs())
            }
            _ => f64::INFINITY,
        }
    }

    #[test]
    fn geodesic_examples() {
        assert!(matches!(
            geodesic_circle([1.0, 0.0], [-1.0, 0.0]).unwrap(),
            CircleOrLine::Line { .. }
        ));
        let c = geodesic_circle([1.0, 0.0], [0.0, 1.0]).unwrap();
        assert_eq!(
            c,
            CircleOrLine::Circle {
                center: [1.0, 1.0],
                radius: 1.0
            }
        );
        assert!(geodesic_circle([1.0, 0.0], [1.0, 0.0]).is_err());
        for (x, y) in [(10.0, 130.0), (-40.0, 200.0), (0.0, 179.0)] {
            let CircleOrLine::Circle { center, radius } = geodesic_circle(deg(x), deg(y)).unwrap()
            else {
                panic!()
            };
            assert!((dot(center, center) - radius * radius - 1.0).abs() <= 1e-12);
            assert!((dist2(center, deg(x)) - radius).abs() <= 1e-12);
            assert!((dist2(center, deg(y)) - radius).abs() <= 1e-12);
        }
    }

    /// With `kᵢ = rᵢ/(1-rᵢ)` the tangency condition reads `kᵢkⱼ = sin²(θᵢⱼ/2)`.
    fn closed_form_radii(p: [Point2; 3]) -> [f64; 3] {
        let s = |i: usize, j: usize| dist2(p[i], p[j]) / 2.0;
        let k = [
            s(0, 1) * s(0, 2) / s(1, 2),
            s(0, 1) * s(1, 2) / s(0, 2),
            s(0, 2) * s(1, 2) / s(0, 1),
        ];
        k.map(|k| k / (1.0 + k))
    }

    #[test]
    fn symmetric_horocycles() {
        let h = tangent_horocycles(deg(90.0), deg(210.0), deg(330.0)).unwrap();
        assert!(h.max_residual() <= 1e-10);
        let s = 60f64.to_radians().sin();
        for r in h.radii {
            assert_abs_diff_eq!(r, s / (1.0 + s), epsilon = 1e-12);
        }
        for c in &h.circles {
            let CircleOrLine::Circle { center, radius } = *c else {
                panic!()
            };
            assert!((norm2(center) + radius - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn asymmetric_horocycles_agree_with_transport() {
        let (a, b, c) = (deg(0.0), deg(90.0), deg(180.0));
        let h = tangent_horocycles(a, b, c).unwrap();
        assert!(h.max_residual() <= 1e-10);
        let want = closed_form_radii([a, b, c]);
        assert_abs_diff_eq!(h.radii[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(h.radii[1], 1.0 / 3.0, epsilon = 1e-12);
        for i in 0..3 {
            assert_abs_diff_eq!(h.radii[i], want[i], epsilon = 1e-12);
        }
        let t = horocycles_by_transport(a, b, c).unwrap();
        for i in 0..3 {
            assert!(
                same(&h.circles[i], &t[i]) <= 1e-8,
                "{:?} vs {:?}",
                h.circles[i],
                t[i]
            );
        }
    }

    proptest! {
        #[test]
        fn horocycles_for_random_triples(x in 0.0..360.0f64, gap1 in 10.0..170.0f64, gap2 in 10.0..170.0f64) {
            let p = [deg(x), deg(x + gap1), deg(x + gap1 + gap2)];
            prop_assume!(gap1 + gap2 < 350.0);
            let h = tangent_horocycles(p[0], p[1], p[2]).unwrap();
            prop_assert!(h.max_residual() <= 1e-10);
            let want = closed_form_radii(p);
            let t = horocycles_by_transport(p[0], p[1], p[2]).unwrap();
            for i in 0..3 {
                prop_assert!((h.radii[i] - want[i]).abs() <= 1e-9);
                prop_assert!(same(&h.circles[i], &t[i]) <= 1e-8);
            }
        }
    }

    #[test]
    fn tangency_circle_examples() {
        let circle = circle_through([1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]).unwrap();
        assert!(
            same(
                &circle,
                &CircleOrLine::Circle {
                    center: [0.0, 0.0],
                    radius: 1.0
                }
            ) <= 1e-15
        );

        let [a, b, c] = symmetric_points();
        let h = tangent_horocycles(a, b, c).unwrap();
        let tc = tangency_circle(&h.circles[0], &h.circles[1], &h.circles[2]).unwrap();
        let CircleOrLine::Circle { center, .. } = tc else {
            panic!()
        };
        assert!(norm2(center) <= 1e-12);

        for pts in [
            [a, b, c],
            [deg(0.0), deg(90.0), deg(180.0)],
            [deg(15.0), deg(100.0), deg(250.0)],
        ] {
            let h = tangent_horocycles(pts[0], pts[1], pts[2]).unwrap();
            let tc = tangency_circle(&h.circles[0], &h.circles[1], &h.circles[2]).unwrap();
            for (i, j) in PAIRS {
                let geo = geodesic_circle(pts[i], pts[j]).unwrap();
                assert!(
                    matches!(contact(&tc, &geo, 1e-8), Contact::Tangent(_)),
                    "{tc:?} {geo:?}"
                );
            }
            for hc in &h.circles {
                assert!(tc.is_orthogonal_to(hc, 1e-9));
            }
        }
    }

    #[test]
    fn generation_zero_is_the_seed() {
        let scene = intrinsic_gasket(symmetric_points(), 0, GASKET_BUDGET).unwrap();
        assert_eq!(scene.circles.len(), 4);
        assert_eq!(scene.generators.len(), 4);
    }

    /// Brute force: every inversion of every seed circle, deduplicated by
    /// pairwise comparison instead of rounded keys.
    fn brute_force_first_generation(seed: &[CircleOrLine], gens: &[CircleOrLine]) -> usize {
        let mut all: Vec<CircleOrLine> = seed.to_vec();
        for c in seed {
            for s in gens {
                let img = invert_circle(s, c).unwrap();
                if all.iter().all(|d| same(d, &img) > 1e-9) {
                    all.push(img);
                }
            }
        }
        all.len()
    }

    #[test]
    fn first_generation_matches_brute_force() {
        for pts in [symmetric_points(), [deg(0.0), deg(90.0), deg(180.0)]] {
            let (seed, gens) = intrinsic_configuration(pts[0], pts[1], pts[2]).unwrap();
            let scene = generate_gasket(&seed, &gens, 1, GASKET_BUDGET).unwrap();
            assert_eq!(
                scene.circles.len(),
                brute_force_first_generation(&seed, &gens)
            );
        }
        let (seed, gens) = rank4_configuration().unwrap();
        assert_eq!(
            rank4_gasket(1).unwrap().circles.len(),
            brute_force_first_generation(&seed, &gens)
        );
    }

    #[test]
    fn scenes_are_tangent_or_disjoint() {
        for pts in [
            symmetric_points(),
            [deg(0.0), deg(90.0), deg(180.0)],
            [deg(15.0), deg(100.0), deg(250.0)],
        ] {
            let scene = intrinsic_gasket(pts, 3, GASKET_BUDGET).unwrap();
            assert_eq!(scene.crossing_pair(CONTACT_TOL), None);
        }
        assert_eq!(rank4_gasket(3).unwrap().crossing_pair(CONTACT_TOL), None);
    }

    #[test]
    fn budget_is_enforced() {
        assert_eq!(
            intrinsic_gasket(symmetric_points(), 6, 50),
            Err(Error::Budget { budget: 50 })
        );
    }

    #[test]
    fn generators_fix_themselves() {
        let (_, gens) = intrinsic_configuration(deg(15.0), deg(100.0), deg(250.0)).unwrap();
        for s in &gens {
            assert!(same(&invert_circle(s, s).unwrap(), s) <= 1e-9);
        }
    }

    #[test]
    fn rank4_simple_hyperplanes_bisect_edges() {
        let g = rank4_gram();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    let mid = Vector::simple(4, i).add(&Vector::simple(4, j)).scaled(0.5);
                    assert_eq!(g.bilinear(&Vector::simple(4, i), &mid).unwrap(), 0.0);
                    assert_eq!(
                        crate::models::hyperplane_position(
                            &g,
                            &Vector::simple(4, i),
                            &Vector::simple(4, j)
                        )
                        .unwrap(),
                        HyperplanePosition::Parallel
                    );
                }
            }
        }
    }

    #[test]
    fn rank4_configuration_is_apollonian() {
        let (seed, gens) = rank4_configuration().unwrap();
        for set in [&seed, &gens] {
            for i in 0..4 {
                for j in i + 1..4 {
                    assert!(
                        matches!(contact(&set[i], &set[j], 1e-9), Contact::Tangent(_)),
                        "{:?} {:?}",
                        set[i],
                        set[j]
                    );
                }
            }
        }
        // each generator meets the seed circles it does not swap at right angles
        let orthogonal = gens
            .iter()
            .flat_map(|s| seed.iter().map(move |c| s.is_orthogonal_to(c, 1e-9)))
            .filter(|&o| o)
            .count();
        assert_eq!(orthogonal, 12);
    }

    fn tangent_pair() -> impl Strategy<Value = (CircleOrLine, CircleOrLine)> {
        (
            -2.0..2.0f64,
            -2.0..2.0f64,
            0.1..1.0f64,
            0.1..1.0f64,
            0.0..std::f64::consts::TAU,
            any::<bool>(),
        )
            .prop_map(|(x, y, r1, r2, t, external)| {
                let d = if external { r1 + r2 } else { (r1 - r2).abs() };
                let c1 = CircleOrLine::circle([x, y], r1).unwrap();
                let c2 = CircleOrLine::circle([x + d * t.cos(), y + d * t.sin()], r2).unwrap();
                (c1, c2)
            })
    }

    proptest! {
        #[test]
        fn inversion_preserves_tangency((c1, c2) in tangent_pair(), g in 0usize..4) {
            prop_assume!(c1 != c2);
            let (_, gens) = intrinsic_configuration(deg(15.0), deg(100.0), deg(250.0)).unwrap();
            let s = gens[g];
            let CircleOrLine::Circle { center: a, .. } = s else { unreachable!() };
            // keep the pair well away from the centre of inversion
            prop_assume!(c1.distance_to(a) > 0.3 && c2.distance_to(a) > 0.3);
            let (i1, i2) = (invert_circle(&s, &c1).unwrap(), invert_circle(&s, &c2).unwrap());
            prop_assert!(matches!(contact(&i1, &i2, 1e-9), Contact::Tangent(_)), "{:?} {:?}", i1, i2);
        }
    }

    #[test]
    fn scene_json_shape() {
        let scene = intrinsic_gasket([deg(0.0), deg(90.0), deg(180.0)], 1, GASKET_BUDGET).unwrap();
        let v = scene.to_value();
        assert_eq!(v.as_object().unwrap().len(), 2);
        assert_eq!(v["generators"].as_array().unwrap().len(), 4);
        assert!(v["generators"][1]["line"]["normal"].is_array());
        assert_eq!(v["circles"][0]["gen"], 0);
        assert!(v["circles"][0]["r"].is_f64());
    }
}
