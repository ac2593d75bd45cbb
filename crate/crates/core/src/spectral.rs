//! Even finite spectral triples on a vertex graph.
//!
//! The algebra acts diagonally on `ℂ^m ⊕ ℂ^m` through
//! `ρ(a) = diag(λ_1..λ_m, λ_1..λ_m)`, the grading is `γ = diag(1_m, −1_m)` and
//! the Dirac operator is `D = (i/h)·[[0, W], [−Wᵀ, 0]]` for a real weight
//! matrix `W` supported on the oriented edges of the graph. The commutator
//! `[D, ρ(a)]` carries the weighted differences `W_ij (λ_j − λ_i)/h`, which is
//! where finite differences come from.

use std::collections::BTreeSet;

use nalgebra::DMatrix;

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::linalg::{
    frobenius_inner, max_abs, null_space, orthonormal_span, projection_residual, CMatrix, SparseMatrix, C64, ONE,
    ZERO,
};
use crate::poset::Poset;

/// Block-pattern tolerance for parity classification, relative to the
/// largest entry (or absolute when all entries are below one).
pub const PARITY_TOL: f64 = 1e-12;
/// Relative eigenvalue threshold below which a Laplacian mode is harmonic.
pub const KERNEL_TOL: f64 = 1e-10;
/// Subspace distance under which two form spaces are considered equal.
pub const SUBSPACE_TOL: f64 = 1e-10;
/// Largest vertex count accepted by [`omega_basis`].
pub const OMEGA_MAX_M: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// A `2m × 2m` complex matrix split along `ℂ^m ⊕ ℂ^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedMatrix {
    entries: CMatrix,
    m: usize,
}

impl GradedMatrix {
    pub fn new(entries: CMatrix, m: usize) -> Result<Self> {
        if entries.nrows() != 2 * m || entries.ncols() != 2 * m {
            return Err(Error::Invalid(format!("expected a {0}×{0} matrix, got {1:?}", 2 * m, entries.shape())));
        }
        Ok(GradedMatrix { entries, m })
    }

    pub fn zeros(m: usize) -> Self {
        GradedMatrix { entries: CMatrix::zeros(2 * m, 2 * m), m }
    }

    pub fn identity(m: usize) -> Self {
        GradedMatrix { entries: CMatrix::identity(2 * m, 2 * m), m }
    }

    /// The grading operator `γ`.
    pub fn grading(m: usize) -> Self {
        let mut g = CMatrix::identity(2 * m, 2 * m);
        for j in m..2 * m {
            g[(j, j)] = -ONE;
        }
        GradedMatrix { entries: g, m }
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn m(&self) -> usize {
        self.m
    }

    fn block_max(&self, diagonal: bool) -> f64 {
        let m = self.m;
        let mut worst: f64 = 0.0;
        for c in 0..2 * m {
            for r in 0..2 * m {
                if ((r < m) == (c < m)) == diagonal {
                    worst = worst.max(self.entries[(r, c)].norm());
                }
            }
        }
        worst
    }

    pub fn parity(&self) -> Parity {
        let tol = PARITY_TOL * max_abs(&self.entries).max(1.0);
        let (diag, off) = (self.block_max(true), self.block_max(false));
        if off <= tol {
            Parity::Even
        } else if diag <= tol {
            Parity::Odd
        } else {
            Parity::Mixed
        }
    }

    /// Upper-right `m × m` block (maps the odd half into the even half).
    pub fn upper_right(&self) -> CMatrix {
        self.entries.view((0, self.m), (self.m, self.m)).into_owned()
    }

    /// Lower-left `m × m` block.
    pub fn lower_left(&self) -> CMatrix {
        self.entries.view((self.m, 0), (self.m, self.m)).into_owned()
    }

    pub fn adjoint(&self) -> Self {
        GradedMatrix { entries: self.entries.adjoint(), m: self.m }
    }

    pub fn mul(&self, other: &Self) -> Self {
        GradedMatrix { entries: &self.entries * &other.entries, m: self.m }
    }

    pub fn add(&self, other: &Self) -> Self {
        GradedMatrix { entries: &self.entries + &other.entries, m: self.m }
    }

    pub fn sub(&self, other: &Self) -> Self {
        GradedMatrix { entries: &self.entries - &other.entries, m: self.m }
    }

    pub fn scale(&self, s: C64) -> Self {
        GradedMatrix { entries: &self.entries * s, m: self.m }
    }

    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }
}

/// Undirected simple graph on vertices `0..m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexGraph {
    m: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl VertexGraph {
    pub fn new(m: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(i, j) in edges {
            if i == j || i >= m || j >= m {
                return Err(Error::Invalid(format!("bad edge ({i}, {j}) on {m} vertices")));
            }
            set.insert((i.min(j), i.max(j)));
        }
        Ok(VertexGraph { m, edges: set })
    }

    pub fn path(m: usize) -> Result<Self> {
        let edges: Vec<_> = (0..m.saturating_sub(1)).map(|j| (j, j + 1)).collect();
        Self::new(m, &edges)
    }

    pub fn cycle(m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::Size(format!("a cycle needs 3 vertices, got {m}")));
        }
        let edges: Vec<_> = (0..m).map(|j| (j, (j + 1) % m)).collect();
        Self::new(m, &edges)
    }

    /// 1-skeleton of the complex behind `p`, vertices in ascending id order.
    pub fn from_poset(p: &Poset) -> Result<Self> {
        let maximal = p.maximal_elements();
        let position = |v: usize| -> Result<usize> {
            maximal
                .iter()
                .position(|&x| p.face(x).is_some_and(|f| f.vertices()[0] == v))
                .ok_or_else(|| Error::Invalid(format!("vertex {v} is not a maximal point")))
        };
        let mut edges = Vec::new();
        for x in 0..p.len() {
            if let Some(f) = p.face(x) {
                if f.dim() == 1 {
                    edges.push((position(f.vertices()[0])?, position(f.vertices()[1])?));
                }
            }
        }
        Self::new(maximal.len(), &edges)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Edges as `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn is_connected(&self) -> bool {
        if self.m == 0 {
            return true;
        }
        let mut seen = vec![false; self.m];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(i, j) in &self.edges {
                let other = if i == v { j } else if j == v { i } else { continue };
                if !seen[other] {
                    seen[other] = true;
                    stack.push(other);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Admissible Dirac operator `D = (i/h)·[[0, W], [−Wᵀ, 0]]`.
#[derive(Clone, Debug)]
pub struct DiracOperator {
    weights: DMatrix<f64>,
    h: f64,
    assembled: SparseMatrix,
}

impl DiracOperator {
    /// Validates that `weights` is supported exactly on the edges of `graph`:
    /// zero on every non-adjacent pair, and at least one orientation nonzero
    /// on every edge.
    pub fn new(graph: &VertexGraph, weights: DMatrix<f64>, h: f64) -> Result<Self> {
        let m = graph.m();
        if weights.shape() != (m, m) {
            return Err(Error::Admissibility(format!("weight matrix must be {m}×{m}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Admissibility(format!("mesh length must be positive, got {h}")));
        }
        for i in 0..m {
            for j in 0..m {
                let w = weights[(i, j)];
                if !w.is_finite() {
                    return Err(Error::Admissibility(format!("non-finite weight at ({i}, {j})")));
                }
                if w != 0.0 && !graph.adjacent(i, j) {
                    return Err(Error::Admissibility(format!("weight {w} on non-edge ({i}, {j})")));
                }
            }
        }
        if let Some((i, j)) = graph.edges().find(|&(i, j)| weights[(i, j)] == 0.0 && weights[(j, i)] == 0.0) {
            return Err(Error::Admissibility(format!("edge ({i}, {j}) carries no weight")));
        }
        let scale = C64::new(0.0, 1.0 / h);
        let mut trip = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let w = weights[(i, j)];
                if w != 0.0 {
                    trip.push((i, m + j, scale * w));
                    trip.push((m + j, i, -scale * w));
                }
            }
        }
        let assembled = SparseMatrix::from_triplets(2 * m, 2 * m, &trip);
        Ok(DiracOperator { weights, h, assembled })
    }

    /// Unit weight on every edge, oriented from the smaller to the larger
    /// vertex index.
    pub fn combinatorial(graph: &VertexGraph, h: f64) -> Result<Self> {
        let mut w = DMatrix::zeros(graph.m(), graph.m());
        for (i, j) in graph.edges() {
            w[(i, j)] = 1.0;
        }
        Self::new(graph, w, h)
    }

    pub fn m(&self) -> usize {
        self.weights.nrows()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// The block `W = D^−`.
    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn sparse(&self) -> &SparseMatrix {
        &self.assembled
    }

    pub fn assembled(&self) -> GradedMatrix {
        GradedMatrix { entries: self.assembled.to_dense(), m: self.m() }
    }

    /// `(‖D‖·h, 2·max weighted degree)`; admissibility asks the first to be at
    /// most the second.
    pub fn norm_bound(&self) -> (f64, f64) {
        let m = self.m();
        let norm = self.weights.singular_values().iter().copied().fold(0.0, f64::max);
        let degree = (0..m)
            .map(|i| (0..m).map(|j| self.weights[(i, j)].abs() + self.weights[(j, i)].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        (norm, 2.0 * degree)
    }
}

/// An even spectral triple over a vertex graph.
#[derive(Clone, Debug)]
pub struct SpectralTriple {
    graph: VertexGraph,
    dirac: DiracOperator,
}

impl SpectralTriple {
    pub fn new(graph: VertexGraph, dirac: DiracOperator) -> Result<Self> {
        if graph.m() != dirac.m() {
            return Err(Error::Invalid("graph and Dirac operator disagree on the vertex count".into()));
        }
        Ok(SpectralTriple { graph, dirac })
    }

    /// Combinatorial triple on the vertex graph of `p`.
    pub fn from_poset(p: &Poset, h: f64) -> Result<Self> {
        let graph = VertexGraph::from_poset(p)?;
        let dirac = DiracOperator::combinatorial(&graph, h)?;
        Ok(SpectralTriple { graph, dirac })
    }

    pub fn graph(&self) -> &VertexGraph {
        &self.graph
    }

    pub fn dirac(&self) -> &DiracOperator {
        &self.dirac
    }

    pub fn m(&self) -> usize {
        self.graph.m()
    }

    pub fn h(&self) -> f64 {
        self.dirac.h()
    }

    pub fn grading(&self) -> GradedMatrix {
        GradedMatrix::grading(self.m())
    }

    /// Largest violations of `γ² = 1`, `γD + Dγ = 0`, `[γ, ρ(e_j)] = 0` and of
    /// hermiticity of `D`.
    pub fn even_triple_defects(&self) -> [f64; 4] {
        let g = self.grading();
        let d = self.dirac.assembled();
        let gamma_sq = max_abs(&(g.mul(&g).sub(&GradedMatrix::identity(self.m())).entries));
        let anti = max_abs(&(g.mul(&d).add(&d.mul(&g)).entries));
        let commute = (0..self.m())
            .map(|j| {
                let r = represent(&AlgebraElement::basis(self.m(), j));
                max_abs(&(g.mul(&r).sub(&r.mul(&g)).entries))
            })
            .fold(0.0, f64::max);
        [gamma_sq, anti, commute, self.dirac.sparse().hermitian_defect()]
    }
}

/// `ρ(a) = diag(λ, λ)`.
pub fn represent(a: &AlgebraElement) -> GradedMatrix {
    let m = a.len();
    let mut e = CMatrix::zeros(2 * m, 2 * m);
    for (j, &v) in a.values().iter().enumerate() {
        e[(j, j)] = v;
        e[(j + m, j + m)] = v;
    }
    GradedMatrix { entries: e, m }
}

/// `[D, ρ(a)]` with the sparsity pattern of `D`.
pub fn commutator_sparse(dirac: &DiracOperator, a: &AlgebraElement) -> Result<SparseMatrix> {
    let m = dirac.m();
    a.ensure_len(m)?;
    let trip: Vec<_> =
        dirac.sparse().triplets().map(|(r, c, v)| (r, c, v * (a.get(c % m) - a.get(r % m)))).collect();
    Ok(SparseMatrix::from_triplets(2 * m, 2 * m, &trip))
}

/// `d ρ(a) = [D, ρ(a)]`.
pub fn d_algebra(a: &AlgebraElement, dirac: &DiracOperator) -> Result<GradedMatrix> {
    Ok(GradedMatrix { entries: commutator_sparse(dirac, a)?.to_dense(), m: dirac.m() })
}

/// Graded differential `db = D·b − ε_b·b·D`.
pub fn graded_d(b: &GradedMatrix, dirac: &DiracOperator) -> Result<GradedMatrix> {
    if b.m != dirac.m() {
        return Err(Error::Level { expected: dirac.m(), got: b.m });
    }
    let sign = match b.parity() {
        Parity::Even => ONE,
        Parity::Odd => -ONE,
        Parity::Mixed => return Err(Error::Parity),
    };
    let left = dirac.sparse().mul_dense(&b.entries);
    let right = dirac.sparse().dense_mul(&b.entries);
    Ok(GradedMatrix { entries: left - right * sign, m: b.m })
}

/// Signed singular values of an operator that is odd for the grading given
/// by `signs`: `+√eig(X*X)` and `−√eig(Y*Y)` where `X` maps the `−1`
/// eigenspace of the grading into the `+1` eigenspace and `Y` the reverse.
/// The result is sorted ascending.
pub fn spectral_values_graded(b: &CMatrix, signs: &[i8]) -> Result<Vec<f64>> {
    let n = b.nrows();
    if signs.len() != n || b.ncols() != n {
        return Err(Error::Invalid("grading does not match the operator".into()));
    }
    let plus: Vec<usize> = (0..n).filter(|&i| signs[i] > 0).collect();
    let minus: Vec<usize> = (0..n).filter(|&i| signs[i] < 0).collect();
    let tol = PARITY_TOL * max_abs(b).max(1.0);
    let same_block = plus.iter().flat_map(|&r| plus.iter().map(move |&c| (r, c)))
        .chain(minus.iter().flat_map(|&r| minus.iter().map(move |&c| (r, c))));
    if same_block.into_iter().any(|(r, c)| b[(r, c)].norm() > tol) {
        return Err(Error::Parity);
    }
    let x = CMatrix::from_fn(plus.len(), minus.len(), |r, c| b[(plus[r], minus[c])]);
    let y = CMatrix::from_fn(minus.len(), plus.len(), |r, c| b[(minus[r], plus[c])]);
    let mut out = singular_values_padded(&x, minus.len());
    out.extend(singular_values_padded(&y, plus.len()).into_iter().map(|s| -s));
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Singular values of `x`, padded with zeros to `len` (the column count).
fn singular_values_padded(x: &CMatrix, len: usize) -> Vec<f64> {
    let mut out: Vec<f64> =
        if x.is_empty() { Vec::new() } else { x.clone().svd(false, false).singular_values.iter().copied().collect() };
    out.resize(len, 0.0);
    out
}

/// Signed singular values of an odd graded matrix, sorted ascending.
pub fn spectral_values(b: &GradedMatrix) -> Result<Vec<f64>> {
    let signs: Vec<i8> = (0..2 * b.m).map(|i| if i < b.m { 1 } else { -1 }).collect();
    spectral_values_graded(&b.entries, &signs)
}

/// `(A, B) = Tr(B* A)`.
pub fn inner_product(a: &GradedMatrix, b: &GradedMatrix) -> C64 {
    frobenius_inner(&a.entries, &b.entries)
}

/// Inner product of algebra elements through `ρ`: `(ρ(a), ρ(b))`.
pub fn algebra_inner(a: &AlgebraElement, b: &AlgebraElement) -> C64 {
    assert_eq!(a.len(), b.len());
    a.values().iter().zip(b.values()).map(|(x, y)| x * y.conj()).sum::<C64>() * 2.0
}

/// Orthogonal projection onto `ρ(𝔄)`, returned as coefficients.
pub fn project_onto_algebra(b: &GradedMatrix) -> AlgebraElement {
    let m = b.m;
    AlgebraElement::new((0..m).map(|j| (b.entries[(j, j)] + b.entries[(j + m, j + m)]) * 0.5).collect())
}

/// Diagonal of `[D, b]` for a dense `b`, without forming the product.
fn commutator_diagonal(dirac: &DiracOperator, b: &CMatrix) -> Vec<C64> {
    let mut diag = vec![ZERO; b.nrows()];
    for (r, c, v) in dirac.sparse().triplets() {
        diag[r] += v * b[(c, r)];
        diag[c] -= b[(c, r)] * v;
    }
    diag
}

fn project_diagonal(diag: &[C64]) -> AlgebraElement {
    let m = diag.len() / 2;
    AlgebraElement::new((0..m).map(|j| (diag[j] + diag[j + m]) * 0.5).collect())
}

/// Adjoint of `d`: `δ(b) = p[D, b]`.
pub fn delta(b: &GradedMatrix, dirac: &DiracOperator) -> Result<AlgebraElement> {
    if b.m != dirac.m() {
        return Err(Error::Level { expected: dirac.m(), got: b.m });
    }
    Ok(project_diagonal(&commutator_diagonal(dirac, &b.entries)))
}

/// `Δa = p[D, [D, ρ(a)]]`, the nonnegative Laplacian (`(Δa, a) = ‖da‖²`).
pub fn laplacian(a: &AlgebraElement, dirac: &DiracOperator) -> Result<AlgebraElement> {
    let da = commutator_sparse(dirac, a)?;
    let m = dirac.m();
    let mut diag = vec![ZERO; 2 * m];
    for (r, c, v) in dirac.sparse().triplets() {
        let b_cr = da.get(c, r);
        diag[r] += v * b_cr;
        diag[c] -= b_cr * v;
    }
    Ok(project_diagonal(&diag))
}

/// Matrix of `Δ` in the basis of vertex indicators.
pub fn laplacian_matrix(dirac: &DiracOperator) -> CMatrix {
    let m = dirac.m();
    let mut out = CMatrix::zeros(m, m);
    for j in 0..m {
        let col = laplacian(&AlgebraElement::basis(m, j), dirac).expect("basis has the right size");
        for (i, v) in col.values().iter().enumerate() {
            out[(i, j)] = *v;
        }
    }
    out
}

/// Split of an algebra element into `δ`-exact and harmonic parts.
#[derive(Clone, Debug)]
pub struct HodgeDecomposition {
    pub exact: AlgebraElement,
    pub harmonic: AlgebraElement,
    /// Dimension of `ker Δ`.
    pub kernel_dim: usize,
}

/// Orthonormal basis of `ker Δ` (columns of the returned vectors).
pub fn harmonic_basis(dirac: &DiracOperator) -> Vec<Vec<C64>> {
    let lap = laplacian_matrix(dirac);
    let eig = lap.symmetric_eigen();
    let scale = eig.eigenvalues.iter().map(|e| e.abs()).fold(1.0, f64::max);
    (0..eig.eigenvalues.len())
        .filter(|&k| eig.eigenvalues[k].abs() <= KERNEL_TOL * scale)
        .map(|k| eig.eigenvectors.column(k).iter().copied().collect())
        .collect()
}

pub fn hodge_decompose(a: &AlgebraElement, dirac: &DiracOperator) -> Result<HodgeDecomposition> {
    a.ensure_len(dirac.m())?;
    let kernel = harmonic_basis(dirac);
    let mut harmonic = vec![ZERO; a.len()];
    for v in &kernel {
        let coeff: C64 = v.iter().zip(a.values()).map(|(x, y)| x.conj() * y).sum();
        for (h, x) in harmonic.iter_mut().zip(v) {
            *h += coeff * x;
        }
    }
    let harmonic = AlgebraElement::new(harmonic);
    Ok(HodgeDecomposition { exact: a - &harmonic, harmonic, kernel_dim: kernel.len() })
}

/// Dimension of `ker d` on the algebra, from the rank of `a ↦ dρ(a)`.
pub fn kernel_dim_d(dirac: &DiracOperator) -> usize {
    let m = dirac.m();
    let cols: Vec<CMatrix> =
        (0..m).map(|j| d_algebra(&AlgebraElement::basis(m, j), dirac).expect("size").into_entries()).collect();
    let n = 4 * m * m;
    let mat = CMatrix::from_fn(n, m, |r, c| cols[c][(r % (2 * m), r / (2 * m))]);
    null_space(&mat, KERNEL_TOL).len()
}

/// Orthonormal basis of a space of quantized forms together with the junk
/// subspace it is taken modulo.
#[derive(Clone, Debug)]
pub struct FormSpace {
    pub degree: usize,
    pub m: usize,
    /// Orthonormal basis of the quotient, realized as the orthogonal
    /// complement of the junk inside the span of `a_0 da_1 ⋯ da_p`.
    pub basis: Vec<CMatrix>,
    pub junk_basis: Vec<CMatrix>,
}

impl FormSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

fn represented_products(dirac: &DiracOperator, gens: &[AlgebraElement], degree: usize) -> Result<Vec<CMatrix>> {
    let reps: Vec<CMatrix> = gens.iter().map(|g| represent(g).into_entries()).collect();
    let diffs: Vec<CMatrix> = gens.iter().map(|g| d_algebra(g, dirac).map(|d| d.entries)).collect::<Result<_>>()?;
    let mut current = reps.clone();
    for _ in 0..degree {
        current = current.iter().flat_map(|w| diffs.iter().map(move |d| w * d)).collect();
    }
    Ok(current)
}

/// Quantized `p`-forms `span{ρ(a_0) dρ(a_1) ⋯ dρ(a_p)}` over `generators`,
/// modulo junk. The junk in degree `p` is spanned by
/// `Σ dρ(a_0) dρ(a_1) ⋯ dρ(a_{p−1})` over combinations whose degree `p−1`
/// representative `Σ ρ(a_0) dρ(a_1) ⋯ dρ(a_{p−1})` vanishes.
pub fn omega_basis(degree: usize, dirac: &DiracOperator, generators: &[AlgebraElement]) -> Result<FormSpace> {
    let m = dirac.m();
    if degree > 2 || m > OMEGA_MAX_M {
        return Err(Error::Capacity(format!("forms of degree {degree} on {m} vertices (limits: 2, {OMEGA_MAX_M})")));
    }
    if generators.is_empty() {
        return Err(Error::Invalid("no generators".into()));
    }
    for g in generators {
        g.ensure_len(m)?;
    }
    let products = represented_products(dirac, generators, degree)?;

    let junk_basis = if degree == 0 {
        Vec::new()
    } else {
        let lower = represented_products(dirac, generators, degree - 1)?;
        let n = 4 * m * m;
        let mat = CMatrix::from_fn(n, lower.len(), |r, c| lower[c][(r % (2 * m), r / (2 * m))]);
        let relations = null_space(&mat, 1e-12);
        let diffs: Vec<CMatrix> =
            generators.iter().map(|g| d_algebra(g, dirac).map(|d| d.entries)).collect::<Result<_>>()?;
        // d of the degree p−1 word with first letter a_0 replaced by da_0
        let raised: Vec<CMatrix> = {
            let mut words: Vec<CMatrix> = diffs.clone();
            for _ in 1..degree {
                words = words.iter().flat_map(|w| diffs.iter().map(move |d| w * d)).collect();
            }
            words
        };
        let junk: Vec<CMatrix> = relations
            .iter()
            .map(|c| {
                let mut acc = CMatrix::zeros(2 * m, 2 * m);
                for (k, w) in raised.iter().enumerate() {
                    acc += w * c[k];
                }
                acc
            })
            .collect();
        orthonormal_span(&junk, 1e-10)
    };

    let mut all = junk_basis.clone();
    all.extend(products);
    let full = orthonormal_span(&all, 1e-10);
    let basis = full[junk_basis.len()..].to_vec();
    Ok(FormSpace { degree, m, basis, junk_basis })
}

/// Symmetric distance between the spans of two orthonormal families:
/// the largest residual of either basis after projecting onto the other.
pub fn subspace_distance(a: &[CMatrix], b: &[CMatrix]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let one = a.iter().map(|v| projection_residual(v, b)).fold(0.0, f64::max);
    let two = b.iter().map(|v| projection_residual(v, a)).fold(0.0, f64::max);
    one.max(two)
}

/// `true` when the degree-`p` form spaces of two admissible Dirac operators
/// on the same graph coincide within [`SUBSPACE_TOL`].
pub fn omega_invariance_check(d1: &DiracOperator, d2: &DiracOperator, degree: usize) -> Result<bool> {
    if d1.m() != d2.m() {
        return Err(Error::Level { expected: d1.m(), got: d2.m() });
    }
    let gens: Vec<AlgebraElement> = (0..d1.m()).map(|j| AlgebraElement::basis(d1.m(), j)).collect();
    let s1 = omega_basis(degree, d1, &gens)?;
    let s2 = omega_basis(degree, d2, &gens)?;
    Ok(subspace_distance(&s1.basis, &s2.basis) <= SUBSPACE_TOL)
}

/// `Tr_s(x) = Tr(γ·x)`.
pub fn graded_trace(x: &GradedMatrix) -> C64 {
    let m = x.m;
    (0..m).map(|j| x.entries[(j, j)]).sum::<C64>() - (m..2 * m).map(|j| x.entries[(j, j)]).sum::<C64>()
}

/// `⟨b⟩_ω = Tr(γ ω b) / Tr_s(ω)`; equal to `Tr(γ ω b)` for a density matrix.
pub fn expectation(omega: &GradedMatrix, b: &GradedMatrix) -> Result<C64> {
    let norm = graded_trace(omega);
    if norm.norm() < 1e-14 {
        return Err(Error::Normalization);
    }
    let m = omega.m;
    let mut acc = ZERO;
    for c in 0..2 * m {
        for r in 0..2 * m {
            let term = omega.entries[(r, c)] * b.entries[(c, r)];
            acc += if r < m { term } else { -term };
        }
    }
    Ok(acc / norm)
}
