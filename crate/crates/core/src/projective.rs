//! Affine chart transverse to the positive roots, normalized roots and the
//! imaginary convex body `K`.
//!
//! A [`DiagonalBasis`] puts `q` in the normal form `x₁² + … + x_{n-1}² - x_n²`
//! with the time-like axis `e_n` satisfying `B(e_n, αᵢ) < 0` for every simple
//! root. The chart is the affine hyperplane `x_n = 1`; in it the light cone
//! cuts out the unit sphere and time-like directions the open unit ball.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::coxeter::{dedup_key, generate_roots_with, BfsOptions};
use crate::error::{Error, Result};
use crate::form::{GramMatrix, Signature, Vector, DEFAULT_TOL};

/// Smallest admissible last diagonal coordinate for normalization.
pub const TRANSVERSE_MIN: f64 = 1e-12;

/// Required slack `B(v, αᵢ) ≤ -IMAGINARY_SLACK` for imaginary points.
pub const IMAGINARY_SLACK: f64 = 1e-6;

const BASIS_TOL: f64 = 1e-9;

/// How the time-like axis of a [`DiagonalBasis`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransverseSource {
    /// `z = -G⁻¹ 𝟙`, which has `B(z, αᵢ) = -1` for all `i`.
    Constructed,
    /// Found by the simplex search because `q(-G⁻¹ 𝟙) ≥ 0`.
    Searched,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalBasis {
    /// Columns are `e₁ … e_n` in simple-root coordinates.
    t: DMatrix<f64>,
    t_inv: DMatrix<f64>,
    pub source: TransverseSource,
}

impl DiagonalBasis {
    pub fn rank(&self) -> usize {
        self.t.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.t
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.t_inv
    }

    /// Basis vector `eᵢ` in simple-root coordinates.
    pub fn axis(&self, i: usize) -> Vector {
        Vector::from_dvector(self.t.column(i).into_owned())
    }

    /// The time-like axis `e_n`.
    pub fn time_axis(&self) -> Vector {
        self.axis(self.rank() - 1)
    }

    /// Diagonal coordinates of `v`.
    pub fn to_diagonal(&self, v: &Vector) -> Result<DVector<f64>> {
        if v.dim() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: v.dim(),
            });
        }
        Ok(&self.t_inv * v.as_dvector())
    }

    pub fn from_diagonal(&self, x: &DVector<f64>) -> Vector {
        Vector::from_dvector(&self.t * x)
    }

    /// Lift a chart point `p` to the vector with diagonal coordinates `(p, 1)`.
    pub fn lift(&self, p: &[f64]) -> Result<Vector> {
        if p.len() + 1 != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank() - 1,
                got: p.len(),
            });
        }
        let mut x = DVector::from_element(self.rank(), 1.0);
        x.rows_mut(0, p.len()).copy_from_slice(p);
        Ok(self.from_diagonal(&x))
    }

    /// Largest entrywise deviation of `TᵀGT` from `diag(1, …, 1, -1)`.
    pub fn normal_form_error(&self, g: &GramMatrix) -> f64 {
        let n = self.rank();
        let d = self.t.transpose() * g.matrix() * &self.t;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let want = match (i == j, i == n - 1) {
                    (false, _) => 0.0,
                    (true, false) => 1.0,
                    (true, true) => -1.0,
                };
                worst = worst.max((d[(i, j)] - want).abs());
            }
        }
        worst
    }
}

/// Point of the affine chart `x_n = 1`, given by its first `n-1` coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalizedPoint(pub Vec<f64>);

impl NormalizedPoint {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &NormalizedPoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloudKind {
    LimitRoots,
    LimitSet,
}

/// Finite sample of normalized roots or normalized orbit points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub kind: CloudKind,
    pub dim: usize,
    pub window: [usize; 2],
    pub points: Vec<NormalizedPoint>,
    #[serde(skip)]
    pub diagram_hash: u64,
}

impl PointCloud {
    /// Builds a cloud, dropping points that coincide at resolution `1e-9`.
    pub fn new(
        kind: CloudKind,
        dim: usize,
        window: [usize; 2],
        points: Vec<NormalizedPoint>,
        diagram_hash: u64,
    ) -> Self {
        let mut seen = std::collections::HashSet::new();
        let points = points
            .into_iter()
            .filter(|p| seen.insert(dedup_key(&Vector::new(p.0.clone()), 9)))
            .collect();
        Self {
            kind,
            dim,
            window,
            points,
            diagram_hash,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `max | ‖p‖ - 1 |` over the cloud: distance of the sample from the chart
    /// image of the light cone.
    pub fn isotropy_residual(&self) -> f64 {
        self.points
            .iter()
            .map(|p| (p.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("point cloud serializes")
    }
}

fn require_lorentzian(g: &GramMatrix) -> Result<Signature> {
    let sig = g.signature(DEFAULT_TOL);
    if !sig.is_lorentzian() {
        return Err(Error::NotLorentzian(sig));
    }
    Ok(sig)
}

fn solve(g: &GramMatrix, rhs: DVector<f64>) -> Result<DVector<f64>> {
    g.matrix()
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::numeric("Gram matrix is singular"))
}

/// Euclidean projection onto the probability simplex.
fn project_to_simplex(w: &mut [f64]) {
    let mut sorted: Vec<f64> = w.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    for x in w.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Searches for weights `w > 0` with `wᵀ G⁻¹ w < 0`, so that `v = -G⁻¹ w` is
/// time-like with `B(v, αᵢ) = -wᵢ < 0`. Minimizes `wᵀ G⁻¹ w` over the simplex
/// by projected gradient from several starts, then slides toward the barycentre
/// as far as time-likeness allows to enlarge the smallest slack.
fn search_imaginary_weights(g: &GramMatrix) -> Result<DVector<f64>> {
    let n = g.rank();
    let m = g
        .matrix()
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::numeric("Gram matrix is singular"))?;
    let value = |w: &DVector<f64>| (w.transpose() * &m * w)[(0, 0)];
    let step = 0.5 / m.norm().max(1e-12);
    let uniform = DVector::from_element(n, 1.0 / n as f64);

    let mut starts = vec![uniform.clone()];
    for i in 0..n {
        let mut s = DVector::from_element(n, 0.1 / n as f64);
        s[i] += 0.9;
        starts.push(s);
    }
    for mut w in starts {
        for _ in 0..20_000 {
            let grad = &m * &w * 2.0;
            let mut next: Vec<f64> = (&w - grad * step).iter().copied().collect();
            project_to_simplex(&mut next);
            let next = DVector::from_vec(next);
            let moved = (&next - &w).norm();
            w = next;
            if value(&w) < 0.0 && moved < 1e-15 {
                break;
            }
        }
        if value(&w) >= 0.0 {
            continue;
        }
        // Bisection on the largest t with (1-t) w + t·uniform still time-like.
        let (mut lo, mut hi) = (0.0, 1.0);
        if value(&uniform) < 0.0 {
            lo = 1.0;
        } else {
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if value(&(&w * (1.0 - mid) + &uniform * mid)) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        let best = &w * (1.0 - 0.5 * lo) + &uniform * (0.5 * lo);
        let best = if lo > 0.0 && value(&best) < 0.0 {
            best
        } else {
            w
        };
        let min = best.min();
        if min > 0.0 && value(&best) < 0.0 {
            return Ok(best / min);
        }
    }
    Err(Error::numeric(
        "no time-like vector with B(v, α) < 0 for all simple roots was found",
    ))
}

fn transverse_vector(g: &GramMatrix) -> Result<(Vector, TransverseSource)> {
    let n = g.rank();
    let z = -solve(g, DVector::from_element(n, 1.0))?;
    let z = Vector::from_dvector(z);
    if g.quadratic(&z)? < 0.0 {
        return Ok((z, TransverseSource::Constructed));
    }
    let w = search_imaginary_weights(g)?;
    Ok((
        Vector::from_dvector(-solve(g, w)?),
        TransverseSource::Searched,
    ))
}

/// Lorentzian normal-form basis with a transverse time-like axis.
pub fn diagonalizing_basis(g: &GramMatrix) -> Result<DiagonalBasis> {
    require_lorentzian(g)?;
    let n = g.rank();
    let (z, source) = transverse_vector(g)?;
    let time = z.scaled(1.0 / (-g.quadratic(&z)?).sqrt());

    // B-orthonormalize the projections of the simple roots onto time^⊥, taking
    // αₙ first. Its axis is stored last among the space-like axes, so the chart
    // direction -e_{n-1} points away from α̂ₙ.
    let mut order: Vec<usize> = vec![n - 1];
    order.extend(0..n - 1);
    let mut spatial: Vec<Vector> = Vec::with_capacity(n - 1);
    for i in order {
        let a = Vector::simple(n, i);
        let mut v = a.axpy(g.bilinear_unchecked(&a, &time), &time);
        for _ in 0..2 {
            for u in &spatial {
                v = v.axpy(-g.bilinear_unchecked(&v, u), u);
            }
            v = v.axpy(g.bilinear_unchecked(&v, &time), &time);
        }
        let nn = g.bilinear_unchecked(&v, &v);
        if nn > BASIS_TOL {
            spatial.push(v.scaled(1.0 / nn.sqrt()));
        }
        if spatial.len() == n - 1 {
            break;
        }
    }
    if spatial.len() != n - 1 {
        return Err(Error::numeric(
            "could not complete the space-like part of the basis",
        ));
    }
    spatial.rotate_left(1);
    let mut t = DMatrix::zeros(n, n);
    for (k, v) in spatial.iter().chain(std::iter::once(&time)).enumerate() {
        t.set_column(k, v.as_dvector());
    }
    let t_inv = t
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::numeric("basis matrix is singular"))?;
    let basis = DiagonalBasis { t, t_inv, source };
    let err = basis.normal_form_error(g);
    if err > BASIS_TOL {
        return Err(Error::numeric(format!(
            "basis deviates from the normal form by {err:e}"
        )));
    }
    Ok(basis)
}

/// Intersection of the line `ℝv` with the chart `x_n = 1`.
pub fn normalize(basis: &DiagonalBasis, v: &Vector) -> Result<NormalizedPoint> {
    let x = basis.to_diagonal(v)?;
    let n = x.len();
    let last = x[n - 1];
    if !(last > TRANSVERSE_MIN) {
        return Err(Error::NonTransverse { last });
    }
    Ok(NormalizedPoint(
        x.rows(0, n - 1).iter().map(|c| c / last).collect(),
    ))
}

/// Normalized positive roots with depth in `[depth_lo, depth_hi]`.
pub fn limit_root_sample(g: &GramMatrix, depth_lo: usize, depth_hi: usize) -> Result<PointCloud> {
    limit_root_sample_with(g, depth_lo, depth_hi, &BfsOptions::default())
}

pub fn limit_root_sample_with(
    g: &GramMatrix,
    depth_lo: usize,
    depth_hi: usize,
    opts: &BfsOptions,
) -> Result<PointCloud> {
    if depth_lo > depth_hi {
        return Err(Error::arg(format!(
            "empty depth window [{depth_lo}, {depth_hi}]"
        )));
    }
    let basis = diagonalizing_basis(g)?;
    let roots = generate_roots_with(g, depth_hi, opts)?;
    let points = roots
        .iter()
        .filter(|r| r.depth >= depth_lo)
        .map(|r| normalize(&basis, &r.vector))
        .collect::<Result<Vec<_>>>()?;
    Ok(PointCloud::new(
        CloudKind::LimitRoots,
        g.rank() - 1,
        [depth_lo, depth_hi],
        points,
        g.fingerprint(),
    ))
}

/// A time-like vector `v` with `B(v, αᵢ) ≤ -1e-6` for every simple root.
pub fn imaginary_point(g: &GramMatrix) -> Result<Vector> {
    require_lorentzian(g)?;
    let n = g.rank();
    let z = Vector::from_dvector(-solve(g, DVector::from_element(n, 1.0))?);
    if is_imaginary(g, &z) {
        return Ok(z);
    }
    let w = search_imaginary_weights(g)?;
    let v = Vector::from_dvector(-solve(g, w)?);
    if is_imaginary(g, &v) {
        Ok(v)
    } else {
        Err(Error::numeric(
            "no point of the imaginary cone interior was found",
        ))
    }
}

fn is_imaginary(g: &GramMatrix, v: &Vector) -> bool {
    let q = g.bilinear_unchecked(v, v);
    q < 0.0 && (0..g.rank()).all(|i| g.pair_simple(i, v) <= -IMAGINARY_SLACK)
}

/// Barycentric coordinates of a chart point with respect to the normalized
/// simple roots `Δ̂`.
pub fn barycentric(basis: &DiagonalBasis, p: &NormalizedPoint) -> Result<Vec<f64>> {
    // A lifted chart point v = Σ λᵢ αᵢ; dividing by Σ λᵢ·x_n(αᵢ) gives weights on Δ̂.
    let v = basis.lift(p.coords())?;
    let n = basis.rank();
    let last_row = basis.inverse().row(n - 1);
    let weights: Vec<f64> = (0..n).map(|i| v.coords()[i] * last_row[i]).collect();
    Ok(weights)
}

/// Vertices of `K = {v ∈ conv(Δ̂) : B(v, α) ≤ 0 ∀ α ∈ Δ}`, each scaled onto
/// the chart `x_n = 1`. Returns an empty list when `K` is empty.
pub fn k_polytope(g: &GramMatrix) -> Result<Vec<Vector>> {
    let n = g.rank();
    if n > 4 {
        return Err(Error::Unsupported(format!(
            "vertex enumeration of K for rank {n} (max 4)"
        )));
    }
    // Homogeneous constraints cᵀλ ≥ 0: λᵢ ≥ 0 and -(Gλ)ᵢ ≥ 0.
    let mut cons: Vec<DVector<f64>> = (0..n)
        .map(|i| Vector::simple(n, i).into_dvector())
        .collect();
    for i in 0..n {
        cons.push(-g.matrix().row(i).transpose());
    }
    let feas_tol = 1e-9;
    let mut verts: Vec<DVector<f64>> = Vec::new();
    for subset in combinations(cons.len(), n - 1) {
        let mut a = DMatrix::zeros(n, n);
        for (r, &k) in subset.iter().enumerate() {
            a.set_row(r, &cons[k].transpose());
        }
        a.set_row(n - 1, &DVector::from_element(n, 1.0).transpose());
        let mut rhs = DVector::zeros(n);
        rhs[n - 1] = 1.0;
        if a.determinant().abs() < 1e-12 {
            continue;
        }
        let Some(lambda) = a.lu().solve(&rhs) else {
            continue;
        };
        let scale = 1.0 + lambda.amax();
        if cons.iter().all(|c| c.dot(&lambda) >= -feas_tol * scale)
            && !verts.iter().any(|v| (v - &lambda).amax() <= 1e-8)
        {
            verts.push(lambda);
        }
    }
    if verts.is_empty() {
        return Ok(Vec::new());
    }
    let dim = affine_dimension(&verts);
    if dim + 1 < n {
        return Err(Error::DegeneratePolytope { dim });
    }
    let basis = diagonalizing_basis(g)?;
    let last_row = basis.inverse().row(n - 1).into_owned();
    let mut out: Vec<(Vec<f64>, Vector)> = verts
        .into_iter()
        .map(|lambda| {
            let x_n = (&last_row * &lambda)[(0, 0)];
            let v = Vector::from_dvector(lambda / x_n);
            let chart = normalize(&basis, &v).map(|p| p.0);
            chart.map(|c| (c, v))
        })
        .collect::<Result<_>>()?;
    if n == 3 {
        let cx = out.iter().map(|(c, _)| c[0]).sum::<f64>() / out.len() as f64;
        let cy = out.iter().map(|(c, _)| c[1]).sum::<f64>() / out.len() as f64;
        out.sort_by(|(a, _), (b, _)| {
            let ta = (a[1] - cy).atan2(a[0] - cx);
            let tb = (b[1] - cy).atan2(b[0] - cx);
            ta.total_cmp(&tb)
        });
    } else {
        out.sort_by(|(a, _), (b, _)| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
    }
    Ok(out.into_iter().map(|(_, v)| v).collect())
}

fn affine_dimension(points: &[DVector<f64>]) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let n = points[0].len();
    let diffs = DMatrix::from_fn(n, points.len() - 1, |r, c| points[c + 1][r] - points[0][r]);
    diffs
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-9)
        .count()
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}
