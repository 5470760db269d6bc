//! Deterministic SVG output for chart pictures and gasket scenes.
//!
//! World coordinates live in the square `[-1.2, 1.2]²`; a world point `(x, y)`
//! is drawn at `((x + 1.2)/2.4·size, (1.2 - y)/2.4·size)` so that `y` points up.
//! Every number is printed with six decimals and `-0` is printed as `0`.

use std::fmt::Write as _;

use crate::coxeter::BfsOptions;
use crate::error::{Error, Result};
use crate::form::{GramMatrix, Vector};
use crate::gasket::GasketScene;
use crate::models::{CircleOrLine, Point2};
use crate::projective::{
    diagonalizing_basis, k_polytope, limit_root_sample_with, normalize, NormalizedPoint,
};

/// Half-width of the visible world square.
pub const HALF_EXTENT: f64 = 1.2;

pub const MIN_SIZE_PX: u32 = 64;

/// Radius of point markers, in pixels.
pub const POINT_RADIUS_PX: f64 = 1.5;

const STYLE: &str = ".qcircle{fill:none;stroke:#c0392b;stroke-width:1.5}\
.simplex{fill:none;stroke:#27ae60;stroke-width:1}\
.roots{fill:#2c3e50;stroke:none}\
.kregion{fill:#f1c40f;fill-opacity:0.35;stroke:#b7950b;stroke-width:1}\
.hyperplane{fill:none;stroke:#2980b9;stroke-width:0.75}\
.gasket{fill:none;stroke:#000000;stroke-width:0.5}";

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Points(Vec<Point2>),
    Circles(Vec<CircleOrLine>),
    Segments(Vec<[Point2; 2]>),
    Polygon(Vec<Point2>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// CSS class: one of `qcircle`, `simplex`, `roots`, `kregion`, `hyperplane`, `gasket`.
    pub class: &'static str,
    pub shape: Shape,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scene2D {
    pub layers: Vec<Layer>,
}

fn scale_point(p: Point2, s: f64) -> Point2 {
    [p[0] * s, p[1] * s]
}

fn scale_shape(c: &CircleOrLine, s: f64) -> CircleOrLine {
    match *c {
        CircleOrLine::Circle { center, radius } => CircleOrLine::Circle {
            center: scale_point(center, s),
            radius: radius * s,
        },
        CircleOrLine::Line { point, normal } => CircleOrLine::Line {
            point: scale_point(point, s),
            normal,
        },
    }
}

impl Scene2D {
    pub fn push(&mut self, class: &'static str, shape: Shape) {
        self.layers.push(Layer { class, shape });
    }

    /// The scene under the homothety `x ↦ s·x`.
    pub fn scaled(&self, s: f64) -> Scene2D {
        let layers = self
            .layers
            .iter()
            .map(|l| Layer {
                class: l.class,
                shape: match &l.shape {
                    Shape::Points(p) => {
                        Shape::Points(p.iter().map(|&x| scale_point(x, s)).collect())
                    }
                    Shape::Polygon(p) => {
                        Shape::Polygon(p.iter().map(|&x| scale_point(x, s)).collect())
                    }
                    Shape::Segments(v) => Shape::Segments(
                        v.iter()
                            .map(|&[a, b]| [scale_point(a, s), scale_point(b, s)])
                            .collect(),
                    ),
                    Shape::Circles(c) => {
                        Shape::Circles(c.iter().map(|c| scale_shape(c, s)).collect())
                    }
                },
            })
            .collect();
        Scene2D { layers }
    }

    pub fn layer(&self, class: &str) -> Option<&Layer> {
        self.layers.iter().find(|l| l.class == class)
    }
}

fn fmt_num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::numeric("non-finite coordinate in scene"))
    }
}

struct Canvas {
    size: f64,
}

impl Canvas {
    fn x(&self, x: f64) -> String {
        fmt_num((x + HALF_EXTENT) / (2.0 * HALF_EXTENT) * self.size)
    }

    fn y(&self, y: f64) -> String {
        fmt_num((HALF_EXTENT - y) / (2.0 * HALF_EXTENT) * self.size)
    }

    fn len(&self, r: f64) -> String {
        fmt_num(r / (2.0 * HALF_EXTENT) * self.size)
    }
}

/// Clips the line through `point` with unit `normal` to the visible square.
fn clip_line(point: Point2, normal: Point2) -> Option<[Point2; 2]> {
    let dir = [-normal[1], normal[0]];
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..2 {
        if dir[k].abs() < 1e-300 {
            if point[k].abs() > HALF_EXTENT {
                return None;
            }
            continue;
        }
        let a = (-HALF_EXTENT - point[k]) / dir[k];
        let b = (HALF_EXTENT - point[k]) / dir[k];
        lo = lo.max(a.min(b));
        hi = hi.min(a.max(b));
    }
    (lo < hi).then(|| {
        [
            [point[0] + lo * dir[0], point[1] + lo * dir[1]],
            [point[0] + hi * dir[0], point[1] + hi * dir[1]],
        ]
    })
}

/// Renders `scene` as an SVG 1.1 document of `size_px` square pixels.
pub fn render_svg(scene: &Scene2D, size_px: u32) -> Result<String> {
    if size_px < MIN_SIZE_PX {
        return Err(Error::arg(format!(
            "image size {size_px} px is below {MIN_SIZE_PX}"
        )));
    }
    let c = Canvas {
        size: size_px as f64,
    };
    let mut out = String::new();
    write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{size_px}\" height=\"{size_px}\" viewBox=\"0 0 {size_px} {size_px}\">"
    )
    .unwrap();
    if scene.layers.is_empty() {
        out.push_str("</svg>\n");
        return Ok(out);
    }
    write!(out, "\n<style>{STYLE}</style>\n").unwrap();
    for layer in &scene.layers {
        writeln!(out, "<g class=\"{}\">", layer.class).unwrap();
        match &layer.shape {
            Shape::Points(points) => {
                for p in points {
                    finite(p)?;
                    writeln!(
                        out,
                        "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>",
                        c.x(p[0]),
                        c.y(p[1]),
                        fmt_num(POINT_RADIUS_PX)
                    )
                    .unwrap();
                }
            }
            Shape::Circles(circles) => {
                for shape in circles {
                    match *shape {
                        CircleOrLine::Circle { center, radius } => {
                            finite(&[center[0], center[1], radius])?;
                            writeln!(
                                out,
                                "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>",
                                c.x(center[0]),
                                c.y(center[1]),
                                c.len(radius)
                            )
                            .unwrap();
                        }
                        CircleOrLine::Line { point, normal } => {
                            finite(&[point[0], point[1], normal[0], normal[1]])?;
                            if let Some([a, b]) = clip_line(point, normal) {
                                writeln!(
                                    out,
                                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
                                    c.x(a[0]),
                                    c.y(a[1]),
                                    c.x(b[0]),
                                    c.y(b[1])
                                )
                                .unwrap();
                            }
                        }
                    }
                }
            }
            Shape::Segments(segments) => {
                for [a, b] in segments {
                    finite(&[a[0], a[1], b[0], b[1]])?;
                    writeln!(
                        out,
                        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
                        c.x(a[0]),
                        c.y(a[1]),
                        c.x(b[0]),
                        c.y(b[1])
                    )
                    .unwrap();
                }
            }
            Shape::Polygon(vertices) => {
                let mut pts = Vec::with_capacity(vertices.len());
                for v in vertices {
                    finite(v)?;
                    pts.push(format!("{},{}", c.x(v[0]), c.y(v[1])));
                }
                writeln!(out, "<polygon points=\"{}\"/>", pts.join(" ")).unwrap();
            }
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Optional layers of [`scene_from_system`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SceneOptions {
    pub k_region: bool,
    pub hyperplanes: bool,
}

fn to_plane(p: &[f64]) -> Point2 {
    match p.len() {
        1 => [p[0], 0.0],
        _ => [p[0], p[1]],
    }
}

/// Chord of the unit disk cut by the line `w·x + c = 0`, if any.
fn chord(w: Point2, c: f64) -> Option<[Point2; 2]> {
    let n = (w[0] * w[0] + w[1] * w[1]).sqrt();
    if n == 0.0 {
        return None;
    }
    let (u, d) = ([w[0] / n, w[1] / n], -c / n);
    if d.abs() >= 1.0 {
        return None;
    }
    let h = (1.0 - d * d).sqrt();
    let foot = [u[0] * d, u[1] * d];
    Some([
        [foot[0] - h * u[1], foot[1] + h * u[0]],
        [foot[0] + h * u[1], foot[1] - h * u[0]],
    ])
}

/// Chart picture of a root system: the isotropic curve, the simplex of
/// normalized simple roots, normalized roots of depth in `window`, and
/// optionally the region `K` and the traces of the simple hyperplanes.
///
/// Rank 2 gives a picture on the horizontal axis, rank 4 is projected
/// orthographically onto the first two chart axes. The picture is shrunk so
/// that the simplex fits in the unit disk.
pub fn scene_from_system(
    g: &GramMatrix,
    window: [usize; 2],
    options: SceneOptions,
    bfs: &BfsOptions,
) -> Result<Scene2D> {
    let n = g.rank();
    if !(2..=4).contains(&n) {
        return Err(Error::Unsupported(format!(
            "rendering rank {n} (supported: 2 to 4)"
        )));
    }
    let basis = diagonalizing_basis(g)?;
    let hats: Vec<NormalizedPoint> = (0..n)
        .map(|i| normalize(&basis, &Vector::simple(n, i)))
        .collect::<Result<_>>()?;
    let roots = limit_root_sample_with(g, window[0], window[1], bfs)?;

    let mut scene = Scene2D::default();
    if n == 2 {
        scene.push(
            "simplex",
            Shape::Segments(vec![[to_plane(&hats[0].0), to_plane(&hats[1].0)]]),
        );
        scene.push("qcircle", Shape::Points(vec![[-1.0, 0.0], [1.0, 0.0]]));
    } else {
        scene.push(
            "qcircle",
            Shape::Circles(vec![CircleOrLine::Circle {
                center: [0.0, 0.0],
                radius: 1.0,
            }]),
        );
        let vertices: Vec<Point2> = hats.iter().map(|h| to_plane(&h.0)).collect();
        if n == 3 {
            scene.push("simplex", Shape::Polygon(vertices));
        } else {
            let edges = (0..4)
                .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
                .map(|(i, j)| [vertices[i], vertices[j]])
                .collect();
            scene.push("simplex", Shape::Segments(edges));
        }
    }
    if options.k_region {
        let verts = k_polytope(g)?;
        let chart: Vec<Point2> = verts
            .iter()
            .map(|v| normalize(&basis, v).map(|p| to_plane(&p.0)))
            .collect::<Result<_>>()?;
        if !chart.is_empty() {
            let shape = match n {
                2 => Shape::Segments(vec![[chart[0], chart[chart.len() - 1]]]),
                3 => Shape::Polygon(chart),
                _ => Shape::Points(chart),
            };
            scene.push("kregion", shape);
        }
    }
    if options.hyperplanes && n == 3 {
        let chords = (0..n)
            .filter_map(|k| {
                let w = basis.matrix().transpose() * g.matrix().column(k);
                chord([w[0], w[1]], w[2])
            })
            .collect();
        scene.push("hyperplane", Shape::Segments(chords));
    }
    scene.push(
        "roots",
        Shape::Points(roots.points.iter().map(|p| to_plane(&p.0)).collect()),
    );

    let extent = hats.iter().map(|h| h.norm()).fold(1.0, f64::max);
    Ok(scene.scaled(1.0 / extent))
}

/// Gasket circles (class `gasket`) and generators (class `hyperplane`) of
/// generation at most `max_gen`, shrunk so that the seed fits in the unit disk.
pub fn scene_from_gasket(scene: &GasketScene, max_gen: usize) -> Scene2D {
    let extent = scene
        .seed
        .iter()
        .filter_map(|c| match *c {
            CircleOrLine::Circle { center, radius } => {
                Some((center[0] * center[0] + center[1] * center[1]).sqrt() + radius)
            }
            CircleOrLine::Line { .. } => None,
        })
        .fold(0.0, f64::max);
    let mut out = Scene2D::default();
    out.push("hyperplane", Shape::Circles(scene.generators.clone()));
    out.push(
        "gasket",
        Shape::Circles(scene.up_to(max_gen).map(|c| c.shape).collect()),
    );
    if extent > 0.0 {
        out.scaled(1.0 / extent)
    } else {
        out
    }
}
