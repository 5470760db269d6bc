//! Symmetric bilinear forms given by Gram matrices in the simple-root basis.
//!
//! A [`CoxeterDiagram`] is turned into a [`GramMatrix`] with the usual
//! convention `B(αᵢ, αⱼ) = -cos(π / mᵢⱼ)` for finite labels and a user-chosen
//! weight `c ≤ -1` for `∞` labels. All geometry downstream is computed from
//! the Gram matrix alone.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

/// Default threshold for eigenvalue sign decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Tolerance used when checking Gram entries against `-cos(π/k)`.
const ENTRY_TOL: f64 = 1e-12;

/// Label of an edge in a Coxeter diagram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeLabel {
    /// Finite label `m ≥ 3`.
    Finite(u32),
    /// `∞` label carrying the Gram entry `c ≤ -1`.
    Infinity(f64),
}

impl EdgeLabel {
    pub fn gram_entry(self) -> f64 {
        match self {
            EdgeLabel::Finite(m) => -(PI / m as f64).cos(),
            EdgeLabel::Infinity(c) => c,
        }
    }
}

/// Coxeter diagram on `rank` generators. Indices are 0-based in the API and
/// 1-based in the text format.
#[derive(Debug, Clone, PartialEq)]
pub struct CoxeterDiagram {
    rank: usize,
    edges: BTreeMap<(usize, usize), EdgeLabel>,
}

impl CoxeterDiagram {
    pub fn new(rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Diagram {
                line: 0,
                msg: "rank must be positive".into(),
            });
        }
        Ok(Self {
            rank,
            edges: BTreeMap::new(),
        })
    }

    /// Universal Coxeter diagram: every pair labelled `∞` with the same weight.
    pub fn universal(rank: usize, weight: f64) -> Result<Self> {
        let mut d = Self::new(rank)?;
        for i in 0..rank {
            for j in i + 1..rank {
                d.add_edge(i, j, EdgeLabel::Infinity(weight))?;
            }
        }
        Ok(d)
    }

    pub fn with_edge(mut self, i: usize, j: usize, label: EdgeLabel) -> Result<Self> {
        self.add_edge(i, j, label)?;
        Ok(self)
    }

    pub fn add_edge(&mut self, i: usize, j: usize, label: EdgeLabel) -> Result<()> {
        self.add_edge_at(i, j, label, 0)
    }

    fn add_edge_at(&mut self, i: usize, j: usize, label: EdgeLabel, line: usize) -> Result<()> {
        let err = |msg: String| Error::Diagram { line, msg };
        if i == j {
            return Err(err(format!("self-loop on generator {}", i + 1)));
        }
        if i >= self.rank || j >= self.rank {
            return Err(err(format!(
                "edge ({}, {}) out of range for rank {}",
                i + 1,
                j + 1,
                self.rank
            )));
        }
        match label {
            EdgeLabel::Finite(m) if m < 3 => {
                return Err(err(format!("finite label must be at least 3, got {m}")))
            }
            EdgeLabel::Infinity(c) if !(c <= -1.0) || !c.is_finite() => {
                return Err(err(format!(
                    "infinity weight must be finite and <= -1, got {c}"
                )))
            }
            _ => {}
        }
        let key = (i.min(j), i.max(j));
        if self.edges.insert(key, label).is_some() {
            return Err(err(format!(
                "duplicate edge ({}, {})",
                key.0 + 1,
                key.1 + 1
            )));
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Label of the pair `(i, j)`; `None` means `m = 2`.
    pub fn label(&self, i: usize, j: usize) -> Option<EdgeLabel> {
        self.edges.get(&(i.min(j), i.max(j))).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = ((usize, usize), EdgeLabel)> + '_ {
        self.edges.iter().map(|(&k, &v)| (k, v))
    }

    /// Gram matrix of the diagram.
    pub fn gram(&self) -> Result<GramMatrix> {
        GramMatrix::from_diagram(self)
    }

    /// Connectivity of the Coxeter graph (edges with label ≥ 3 or ∞).
    pub fn is_irreducible(&self) -> bool {
        let adjacency: Vec<Vec<bool>> = (0..self.rank)
            .map(|i| {
                (0..self.rank)
                    .map(|j| i != j && self.label(i, j).is_some())
                    .collect()
            })
            .collect();
        graph_connected(&adjacency)
    }
}

pub(crate) fn graph_connected(adjacency: &[Vec<bool>]) -> bool {
    let n = adjacency.len();
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if adjacency[i][j] && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

impl FromStr for CoxeterDiagram {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut diagram: Option<CoxeterDiagram> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |msg: &str| Error::Diagram {
                line,
                msg: msg.to_string(),
            };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            match tokens[0] {
                "rank" => {
                    if diagram.is_some() {
                        return Err(err("rank declared twice"));
                    }
                    if tokens.len() != 2 {
                        return Err(err("expected `rank <n>`"));
                    }
                    let n: usize = tokens[1]
                        .parse()
                        .map_err(|_| err("rank is not an integer"))?;
                    if n == 0 {
                        return Err(err("rank must be positive"));
                    }
                    diagram = Some(CoxeterDiagram {
                        rank: n,
                        edges: BTreeMap::new(),
                    });
                }
                "edge" => {
                    let d = diagram.as_mut().ok_or_else(|| err("edge before rank"))?;
                    if tokens.len() < 4 {
                        return Err(err(
                            "expected `edge <i> <j> <m>` or `edge <i> <j> inf [<c>]`",
                        ));
                    }
                    let index = |t: &str| -> Result<usize> {
                        let v: usize =
                            t.parse().map_err(|_| err("edge index is not an integer"))?;
                        if v == 0 {
                            return Err(err("edge indices are 1-based"));
                        }
                        Ok(v - 1)
                    };
                    let i = index(tokens[1])?;
                    let j = index(tokens[2])?;
                    let label = if tokens[3] == "inf" {
                        if tokens.len() > 5 {
                            return Err(err("trailing tokens after infinity weight"));
                        }
                        let c = match tokens.get(4) {
                            Some(t) => t
                                .parse()
                                .map_err(|_| err("infinity weight is not a number"))?,
                            None => -1.0,
                        };
                        EdgeLabel::Infinity(c)
                    } else {
                        if tokens.len() != 4 {
                            return Err(err("trailing tokens after finite label"));
                        }
                        EdgeLabel::Finite(
                            tokens[3]
                                .parse()
                                .map_err(|_| err("label is not an integer or `inf`"))?,
                        )
                    };
                    d.add_edge_at(i, j, label, line)?;
                }
                other => return Err(err(&format!("unknown directive `{other}`"))),
            }
        }
        diagram.ok_or(Error::Diagram {
            line: 0,
            msg: "missing `rank` directive".into(),
        })
    }
}

impl fmt::Display for CoxeterDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rank {}", self.rank)?;
        for ((i, j), label) in self.edges() {
            match label {
                EdgeLabel::Finite(m) => writeln!(f, "edge {} {} {}", i + 1, j + 1, m)?,
                EdgeLabel::Infinity(c) => writeln!(f, "edge {} {} inf {}", i + 1, j + 1, c)?,
            }
        }
        Ok(())
    }
}

/// Vector in the simple-root basis `Δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(DVector<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(DVector::from_vec(coords))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    /// The `i`-th simple root `αᵢ`.
    pub fn simple(n: usize, i: usize) -> Self {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        Self(v)
    }

    pub fn from_dvector(v: DVector<f64>) -> Self {
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_dvector(self) -> DVector<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }

    pub fn add(&self, other: &Vector) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Vector) -> Self {
        Self(&self.0 - &other.0)
    }

    /// `self + s · other`
    pub fn axpy(&self, s: f64, other: &Vector) -> Self {
        Self(&self.0 + &other.0 * s)
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Self::new(v)
    }
}

/// Sign counts of the eigenvalues of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Signature {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
}

impl Signature {
    pub fn new(n_plus: usize, n_minus: usize, n_zero: usize) -> Self {
        Self {
            n_plus,
            n_minus,
            n_zero,
        }
    }

    pub fn rank(&self) -> usize {
        self.n_plus + self.n_minus + self.n_zero
    }

    /// Signature `(n-1, 1, 0)`.
    pub fn is_lorentzian(&self) -> bool {
        self.n_minus == 1 && self.n_zero == 0 && self.n_plus + 1 == self.rank()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.n_minus == 0 && self.n_zero == 0
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n_plus, self.n_minus, self.n_zero)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VectorType {
    SpaceLike,
    TimeLike,
    LightLike,
}

/// Gram matrix of `B` in the simple-root basis. Diagonal entries are exactly 1
/// and every off-diagonal entry lies in `(-∞, -1] ∪ {-cos(π/k) : k ≥ 2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(DMatrix<f64>);

impl GramMatrix {
    pub fn from_diagram(d: &CoxeterDiagram) -> Result<Self> {
        let n = d.rank();
        let mut m = DMatrix::identity(n, n);
        for ((i, j), label) in d.edges() {
            if let EdgeLabel::Infinity(c) = label {
                if !(c <= -1.0) {
                    return Err(Error::Gram(format!(
                        "infinity weight {c} on ({}, {}) violates B(α,β) ≤ -1",
                        i + 1,
                        j + 1
                    )));
                }
            }
            let e = label.gram_entry();
            m[(i, j)] = e;
            m[(j, i)] = e;
        }
        Ok(Self(m))
    }

    /// Validates an explicit matrix against the simple-system axioms.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::Gram("matrix must be square and non-empty".into()));
        }
        let n = m.nrows();
        for i in 0..n {
            if m[(i, i)] != 1.0 {
                return Err(Error::Gram(format!(
                    "diagonal entry {} is {}, not 1",
                    i + 1,
                    m[(i, i)]
                )));
            }
            for j in i + 1..n {
                let x = m[(i, j)];
                if x != m[(j, i)] {
                    return Err(Error::Gram(format!(
                        "not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
                if !admissible_entry(x) {
                    return Err(Error::Gram(format!(
                        "entry ({}, {}) = {x} is neither ≤ -1 nor -cos(π/k)",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    /// Rank-`n` universal system with every off-diagonal entry equal to `weight`.
    pub fn universal(n: usize, weight: f64) -> Result<Self> {
        CoxeterDiagram::universal(n, weight)?.gram()
    }

    pub fn rank(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    fn check_dim(&self, v: &Vector) -> Result<()> {
        if v.dim() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: v.dim(),
            });
        }
        Ok(())
    }

    /// `B(u, v) = uᵀ G v`.
    pub fn bilinear(&self, u: &Vector, v: &Vector) -> Result<f64> {
        self.check_dim(u)?;
        self.check_dim(v)?;
        Ok(self.bilinear_unchecked(u, v))
    }

    pub(crate) fn bilinear_unchecked(&self, u: &Vector, v: &Vector) -> f64 {
        let (u, v) = (u.as_dvector(), v.as_dvector());
        let n = self.rank();
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.0[(i, j)] * v[j];
            }
            acc += u[i] * row;
        }
        acc
    }

    /// `q(v) = B(v, v)`.
    pub fn quadratic(&self, v: &Vector) -> Result<f64> {
        self.bilinear(v, v)
    }

    /// `B(αᵢ, v)`, the `i`-th entry of `G v`.
    pub fn pair_simple(&self, i: usize, v: &Vector) -> f64 {
        self.0
            .row(i)
            .iter()
            .zip(v.coords())
            .map(|(g, x)| g * x)
            .sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        sorted_eigenvalues(&self.0)
    }

    pub fn signature(&self, tol: f64) -> Signature {
        signature_of(&self.0, tol)
    }

    pub fn vector_type(&self, v: &Vector, tol: f64) -> Result<VectorType> {
        let q = self.quadratic(v)?;
        Ok(if q > tol {
            VectorType::SpaceLike
        } else if q < -tol {
            VectorType::TimeLike
        } else {
            VectorType::LightLike
        })
    }

    /// Principal submatrix on the given index set.
    pub fn principal_submatrix(&self, indices: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(indices.len(), indices.len(), |a, b| {
            self.0[(indices[a], indices[b])]
        })
    }

    /// Gram matrix after relabelling generators: entry `(i, j)` of the result is
    /// entry `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: perm.len(),
            });
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::arg("not a permutation"));
            }
        }
        Ok(Self(self.principal_submatrix(perm)))
    }

    /// Stable 64-bit fingerprint of the entries (FNV-1a over the bit patterns).
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for x in self.0.iter() {
            for b in x.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}

fn admissible_entry(x: f64) -> bool {
    if !x.is_finite() {
        return false;
    }
    if x <= -1.0 + ENTRY_TOL {
        return true;
    }
    if x > ENTRY_TOL {
        return false;
    }
    let angle = (-x).clamp(-1.0, 1.0).acos();
    if angle <= 0.0 {
        return false;
    }
    let k = (PI / angle).round();
    k >= 2.0 && ((PI / k).cos() + x).abs() <= ENTRY_TOL
}

pub(crate) fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub(crate) fn signature_of(m: &DMatrix<f64>, tol: f64) -> Signature {
    let ev = sorted_eigenvalues(m);
    let n_plus = ev.iter().filter(|&&e| e > tol).count();
    let n_minus = ev.iter().filter(|&&e| e < -tol).count();
    Signature::new(n_plus, n_minus, ev.len() - n_plus - n_minus)
}
