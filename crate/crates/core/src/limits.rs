//! Limit-set sampling and numerical comparison with limit roots.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::coxeter::{orbit_point_with, BfsOptions};
use crate::error::{Error, Result};
use crate::form::GramMatrix;
use crate::projective::{
    diagonalizing_basis, imaginary_point, limit_root_sample_with, normalize, CloudKind,
    NormalizedPoint, PointCloud,
};

/// Relative growth tolerated between consecutive Hausdorff values.
pub const MONOTONE_SLACK: f64 = 0.10;

/// Default bound on the final Hausdorff distance.
pub const DEFAULT_EPS: f64 = 0.1;

/// Normalized orbit points of the imaginary point with word length in `[lo, hi]`.
pub fn limit_set_sample(g: &GramMatrix, length_lo: usize, length_hi: usize) -> Result<PointCloud> {
    limit_set_sample_with(g, length_lo, length_hi, &BfsOptions::default())
}

pub fn limit_set_sample_with(
    g: &GramMatrix,
    length_lo: usize,
    length_hi: usize,
    opts: &BfsOptions,
) -> Result<PointCloud> {
    if length_lo > length_hi {
        return Err(Error::arg(format!(
            "empty length window [{length_lo}, {length_hi}]"
        )));
    }
    let basis = diagonalizing_basis(g)?;
    let start = imaginary_point(g)?;
    let orbit = orbit_point_with(g, &start, length_hi, opts)?;
    let points = orbit
        .iter()
        .filter(|p| p.length >= length_lo)
        .map(|p| normalize(&basis, &p.vector))
        .collect::<Result<Vec<_>>>()?;
    Ok(PointCloud::new(
        CloudKind::LimitSet,
        g.rank() - 1,
        [length_lo, length_hi],
        points,
        g.fingerprint(),
    ))
}

/// Symmetric Hausdorff distance in the Euclidean chart metric.
pub fn hausdorff(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    hausdorff_points(&a.points, &b.points)
}

pub fn hausdorff_points(a: &[NormalizedPoint], b: &[NormalizedPoint]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let dim = a[0].dim();
    if let Some(p) = a.iter().chain(b).find(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: p.dim(),
        });
    }
    Ok(directed(a, b).max(directed(b, a)))
}

/// `sup_{p ∈ from} dist(p, to)`, by a sweep over `to` sorted on the first
/// coordinate: candidates whose first-coordinate gap already exceeds the best
/// distance found are skipped.
fn directed(from: &[NormalizedPoint], to: &[NormalizedPoint]) -> f64 {
    let mut sorted: Vec<&NormalizedPoint> = to.iter().collect();
    sorted.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]));
    let keys: Vec<f64> = sorted.iter().map(|p| p.0[0]).collect();
    from.par_iter()
        .map(|p| {
            let x = p.0[0];
            let start = keys.partition_point(|&k| k < x);
            let mut best = f64::INFINITY;
            for i in start..sorted.len() {
                if keys[i] - x > best {
                    break;
                }
                best = best.min(p.distance(sorted[i]));
            }
            for i in (0..start).rev() {
                if x - keys[i] > best {
                    break;
                }
                best = best.min(p.distance(sorted[i]));
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// One row of a [`ComparisonReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRecord {
    pub root_window: [usize; 2],
    pub orbit_window: [usize; 2],
    #[serde(skip)]
    pub root_count: usize,
    #[serde(skip)]
    pub orbit_count: usize,
    pub hausdorff: f64,
    pub root_residual: f64,
    pub orbit_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub levels: Vec<LevelRecord>,
    pub verdict: bool,
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn final_hausdorff(&self) -> Option<f64> {
        self.levels.last().map(|l| l.hausdorff)
    }

    /// Consecutive Hausdorff values never grow by more than [`MONOTONE_SLACK`].
    pub fn is_monotone(&self) -> bool {
        self.levels
            .windows(2)
            .all(|w| w[1].hausdorff <= (1.0 + MONOTONE_SLACK) * w[0].hausdorff)
    }
}

/// A (root depth window, orbit length window) pair.
pub type Level = ([usize; 2], [usize; 2]);

/// Compares normalized roots with normalized orbit points level by level.
pub fn verify_limit_equality(
    g: &GramMatrix,
    levels: &[Level],
    eps: f64,
) -> Result<ComparisonReport> {
    verify_limit_equality_with(g, levels, eps, &BfsOptions::default())
}

pub fn verify_limit_equality_with(
    g: &GramMatrix,
    levels: &[Level],
    eps: f64,
    opts: &BfsOptions,
) -> Result<ComparisonReport> {
    if levels.is_empty() {
        return Err(Error::arg("no comparison levels"));
    }
    if !(eps > 0.0) {
        return Err(Error::arg(format!("tolerance must be positive, got {eps}")));
    }
    let mut records = Vec::with_capacity(levels.len());
    for &(rw, ow) in levels {
        let roots = limit_root_sample_with(g, rw[0], rw[1], opts)?;
        let orbit = limit_set_sample_with(g, ow[0], ow[1], opts)?;
        records.push(LevelRecord {
            root_window: rw,
            orbit_window: ow,
            root_count: roots.len(),
            orbit_count: orbit.len(),
            hausdorff: hausdorff(&roots, &orbit)?,
            root_residual: roots.isotropy_residual(),
            orbit_residual: orbit.isotropy_residual(),
        });
    }
    let mut report = ComparisonReport {
        levels: records,
        verdict: false,
    };
    report.verdict = report.is_monotone() && report.final_hausdorff().is_some_and(|h| h <= eps);
    Ok(report)
}

/// Largest angular gap (radians) between radial projections of a planar cloud
/// onto the unit circle.
pub fn boundary_coverage(cloud: &PointCloud) -> Result<f64> {
    if cloud.dim != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: cloud.dim,
        });
    }
    angular_gap(cloud.points.iter().map(|p| [p.0[0], p.0[1]]))
}

pub(crate) fn angular_gap(points: impl Iterator<Item = [f64; 2]>) -> Result<f64> {
    let mut angles: Vec<f64> = points
        .filter(|p| p[0] != 0.0 || p[1] != 0.0)
        .map(|p| p[1].atan2(p[0]))
        .collect();
    if angles.is_empty() {
        return Err(Error::EmptyCloud);
    }
    angles.sort_by(f64::total_cmp);
    let wrap = angles[0] + TAU - angles[angles.len() - 1];
    Ok(angles.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max))
}
