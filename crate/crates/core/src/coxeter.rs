//! Reflections and breadth-first generation of positive roots and orbits.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::form::{GramMatrix, Vector};

/// Tolerance for "is this a unit vector" checks on reflection normals.
pub const UNIT_TOL: f64 = 1e-9;

/// Coordinates below `-NEGATIVE_TOL` mark a vector as outside `cone(Δ)`.
pub const NEGATIVE_TOL: f64 = 1e-9;

/// Breadth-first enumeration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfsOptions {
    /// Maximum number of elements a single call may produce.
    pub budget: usize,
    /// Coordinates are rounded to this many decimal digits to form dedup keys.
    pub dedup_digits: i32,
}

impl Default for BfsOptions {
    fn default() -> Self {
        Self {
            budget: 1_000_000,
            dedup_digits: 9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    pub vector: Vector,
    /// Minimal number of simple reflections needed to reach it from `Δ`.
    pub depth: usize,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitPoint {
    pub vector: Vector,
    /// Word length at discovery (minimal).
    pub length: usize,
}

/// `s_α(v) = v - 2 B(α, v) α` for a unit normal `α`.
pub fn reflect(g: &GramMatrix, alpha: &Vector, v: &Vector) -> Result<Vector> {
    let q = g.quadratic(alpha)?;
    if (q - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnitRoot { q });
    }
    let b = g.bilinear(alpha, v)?;
    Ok(v.axpy(-2.0 * b, alpha))
}

/// Reflection in the `i`-th simple root; only coordinate `i` changes.
pub fn reflect_simple(g: &GramMatrix, i: usize, v: &Vector) -> Vector {
    let b = g.pair_simple(i, v);
    let mut out = v.as_dvector().clone();
    out[i] -= 2.0 * b;
    Vector::from_dvector(out)
}

pub(crate) fn dedup_key(v: &Vector, digits: i32) -> Vec<i128> {
    let scale = 10f64.powi(digits);
    v.coords()
        .iter()
        .map(|x| (x * scale).round() as i128)
        .collect()
}

pub(crate) fn in_positive_cone(v: &Vector) -> bool {
    v.coords().iter().all(|&x| x >= -NEGATIVE_TOL)
}

/// Layered breadth-first closure of `seeds` under the simple reflections.
///
/// Within a layer, candidates are visited ordered by (generator index, parent
/// order); images are computed in parallel, insertion into the dedup set is
/// sequential, so the output is independent of the thread count.
fn closure(
    g: &GramMatrix,
    seeds: Vec<Vector>,
    max_len: usize,
    keep_positive_only: bool,
    opts: &BfsOptions,
) -> Result<Vec<(Vector, usize)>> {
    let n = g.rank();
    for s in &seeds {
        if s.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: s.dim(),
            });
        }
    }
    let mut seen: HashSet<Vec<i128>> = HashSet::new();
    let mut out = Vec::new();
    let mut frontier = Vec::new();
    for s in seeds {
        if seen.insert(dedup_key(&s, opts.dedup_digits)) {
            if out.len() >= opts.budget {
                return Err(Error::Budget {
                    budget: opts.budget,
                });
            }
            out.push((s.clone(), 0));
            frontier.push(s);
        }
    }
    for len in 1..=max_len {
        if frontier.is_empty() {
            break;
        }
        let images: Vec<Vec<Vector>> = (0..n)
            .into_par_iter()
            .map(|i| frontier.iter().map(|v| reflect_simple(g, i, v)).collect())
            .collect();
        let mut next = Vec::new();
        for w in images.into_iter().flatten() {
            if keep_positive_only && !in_positive_cone(&w) {
                continue;
            }
            if !w.is_finite() {
                return Err(Error::numeric(
                    "non-finite coordinate during orbit enumeration",
                ));
            }
            if seen.insert(dedup_key(&w, opts.dedup_digits)) {
                if out.len() >= opts.budget {
                    return Err(Error::Budget {
                        budget: opts.budget,
                    });
                }
                out.push((w.clone(), len));
                next.push(w);
            }
        }
        frontier = next;
    }
    Ok(out)
}

/// All positive roots of depth at most `max_depth`, in breadth-first order.
pub fn generate_roots(g: &GramMatrix, max_depth: usize) -> Result<Vec<Root>> {
    generate_roots_with(g, max_depth, &BfsOptions::default())
}

pub fn generate_roots_with(
    g: &GramMatrix,
    max_depth: usize,
    opts: &BfsOptions,
) -> Result<Vec<Root>> {
    let n = g.rank();
    let simple = (0..n).map(|i| Vector::simple(n, i)).collect();
    Ok(closure(g, simple, max_depth, true, opts)?
        .into_iter()
        .map(|(vector, depth)| Root {
            vector,
            depth,
            positive: true,
        })
        .collect())
}

/// The `W`-orbit of `start` up to word length `max_length`.
pub fn orbit_point(g: &GramMatrix, start: &Vector, max_length: usize) -> Result<Vec<OrbitPoint>> {
    orbit_point_with(g, start, max_length, &BfsOptions::default())
}

pub fn orbit_point_with(
    g: &GramMatrix,
    start: &Vector,
    max_length: usize,
    opts: &BfsOptions,
) -> Result<Vec<OrbitPoint>> {
    Ok(closure(g, vec![start.clone()], max_length, false, opts)?
        .into_iter()
        .map(|(vector, length)| OrbitPoint { vector, length })
        .collect())
}
