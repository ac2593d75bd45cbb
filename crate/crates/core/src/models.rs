//! Closed-form model triples: the line lattice, the circle, products of
//! these through Kronecker sums, and metric-weighted variants.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::{CMatrix, SparseMatrix, C64};
use crate::spectral::{spectral_values_graded, DiracOperator, SpectralTriple, VertexGraph};

/// Largest Hilbert-space dimension of an assembled tensor triple.
pub const TENSOR_MAX_DIM: usize = 4096;
/// Largest number of tensor factors.
pub const TENSOR_MAX_FACTORS: usize = 3;

/// Path graph with the upper-shift Dirac operator.
pub fn line_lattice_triple(m: usize, h: f64) -> Result<SpectralTriple> {
    if m < 2 {
        return Err(Error::Size(format!("line lattice needs 2 vertices, got {m}")));
    }
    let graph = VertexGraph::path(m)?;
    let dirac = DiracOperator::combinatorial(&graph, h)?;
    SpectralTriple::new(graph, dirac)
}

/// Cycle graph: the upper shift plus the corner entry closing the loop
/// (`W[m−1][0] = 1`, the edge from the last vertex back to the first).
pub fn circle_triple(m: usize, h: f64) -> Result<SpectralTriple> {
    let graph = VertexGraph::cycle(m)?;
    let dirac = DiracOperator::new(&graph, cyclic_shift(m), h)?;
    SpectralTriple::new(graph, dirac)
}

fn cyclic_shift(m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |i, j| if j == (i + 1) % m { 1.0 } else { 0.0 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimSpec {
    pub m: usize,
    pub h: f64,
    #[serde(default)]
    pub periodic: bool,
}

/// Product lattice description; `weights` holds one expression per
/// direction, evaluated at vertex coordinates `(i_1 h_1, i_2 h_2, …)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub dims: Vec<DimSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<String>>,
}

impl LatticeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.len() > TENSOR_MAX_FACTORS {
            return Err(Error::Capacity(format!("{} directions (1 to {TENSOR_MAX_FACTORS} supported)", self.dims.len())));
        }
        for d in &self.dims {
            let min = if d.periodic { 3 } else { 2 };
            if d.m < min {
                return Err(Error::Size(format!("direction with {} vertices, need {min}", d.m)));
            }
            if !(d.h > 0.0 && d.h.is_finite()) {
                return Err(Error::Invalid(format!("spacing must be positive, got {}", d.h)));
            }
        }
        if let Some(w) = &self.weights {
            if w.len() != self.dims.len() {
                return Err(Error::Metric(format!("{} weight expressions for {} directions", w.len(), self.dims.len())));
            }
        }
        Ok(())
    }

    pub fn factor_triples(&self) -> Result<Vec<SpectralTriple>> {
        self.dims
            .iter()
            .map(|d| if d.periodic { circle_triple(d.m, d.h) } else { line_lattice_triple(d.m, d.h) })
            .collect()
    }
}

/// Product triple with Dirac operator `Σ_k 1⊗⋯⊗D_k⊗⋯⊗1` and grading
/// `γ⊗⋯⊗γ`. The first factor is the most significant tensor index.
#[derive(Clone, Debug)]
pub struct TensorTriple {
    factors: Vec<SpectralTriple>,
    dirac: SparseMatrix,
    signs: Vec<i8>,
}

type Weight<'a> = &'a dyn Fn(usize, &[f64]) -> Result<f64>;

impl TensorTriple {
    fn assemble(factors: Vec<SpectralTriple>, weight: Option<Weight>) -> Result<Self> {
        if factors.is_empty() || factors.len() > TENSOR_MAX_FACTORS {
            return Err(Error::Capacity(format!("{} factors (1 to {TENSOR_MAX_FACTORS} supported)", factors.len())));
        }
        let sizes: Vec<usize> = factors.iter().map(|f| 2 * f.m()).collect();
        let total = sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s)).unwrap_or(usize::MAX);
        if total > TENSOR_MAX_DIM {
            return Err(Error::Capacity(format!("tensor dimension {total} exceeds {TENSOR_MAX_DIM}")));
        }
        let strides: Vec<usize> = (0..sizes.len()).map(|k| sizes[k + 1..].iter().product()).collect();
        let mut trip = Vec::new();
        for (k, factor) in factors.iter().enumerate() {
            let local: Vec<_> = factor.dirac().sparse().triplets().collect();
            let m_k = factor.m();
            for base in 0..total {
                if !(base / strides[k]).is_multiple_of(sizes[k]) {
                    continue;
                }
                for &(s, t, v) in &local {
                    let (r, c) = (base + s * strides[k], base + t * strides[k]);
                    let scale = match weight {
                        None => 1.0,
                        Some(w) => {
                            let mut point = Vec::with_capacity(factors.len());
                            for (l, f) in factors.iter().enumerate() {
                                let vertex = if l == k {
                                    if s < m_k { s } else { t }
                                } else {
                                    (r / strides[l]) % sizes[l] % f.m()
                                };
                                point.push(vertex as f64 * f.h());
                            }
                            w(k, &point)?
                        }
                    };
                    trip.push((r, c, v * scale));
                }
            }
        }
        let signs = (0..total)
            .map(|i| {
                (0..sizes.len())
                    .map(|k| if (i / strides[k]) % sizes[k] < sizes[k] / 2 { 1i8 } else { -1 })
                    .product()
            })
            .collect();
        Ok(TensorTriple { dirac: SparseMatrix::from_triplets(total, total, &trip), factors, signs })
    }

    pub fn factors(&self) -> &[SpectralTriple] {
        &self.factors
    }

    pub fn total_dim(&self) -> usize {
        self.signs.len()
    }

    /// Number of lattice vertices, `Π m_k`.
    pub fn vertex_count(&self) -> usize {
        self.factors.iter().map(|f| f.m()).product()
    }

    pub fn sparse(&self) -> &SparseMatrix {
        &self.dirac
    }

    pub fn assembled(&self) -> CMatrix {
        self.dirac.to_dense()
    }

    /// Diagonal of `γ⊗⋯⊗γ`.
    pub fn grading_signs(&self) -> &[i8] {
        &self.signs
    }

    /// Index of `index` in the `k`-th factor's `2m_k` space.
    pub fn slot(&self, index: usize, k: usize) -> usize {
        let stride: usize = self.factors[k + 1..].iter().map(|f| 2 * f.m()).product();
        (index / stride) % (2 * self.factors[k].m())
    }

    /// For an entry of `D`, the direction it moves along and whether it sits
    /// in that factor's upper-right block.
    pub fn edge_direction(&self, r: usize, c: usize) -> Option<(usize, bool)> {
        let differing: Vec<usize> = (0..self.factors.len()).filter(|&k| self.slot(r, k) != self.slot(c, k)).collect();
        match differing.as_slice() {
            [k] => Some((*k, self.slot(r, *k) < self.factors[*k].m())),
            _ => None,
        }
    }

    /// Lattice vertex (row-major) that basis vector `index` sits over.
    pub fn vertex_at(&self, index: usize) -> usize {
        let mut rest = index;
        let mut digits = Vec::with_capacity(self.factors.len());
        for f in self.factors.iter().rev() {
            digits.push(rest % (2 * f.m()) % f.m());
            rest /= 2 * f.m();
        }
        digits.iter().zip(self.factors.iter().rev()).rev().fold(0, |acc, (d, f)| acc * f.m() + d)
    }

    /// Lattice coordinates of vertex `v` (row-major over the factors).
    pub fn vertex_coords(&self, v: usize) -> Vec<f64> {
        let mut rest = v;
        let mut out = vec![0.0; self.factors.len()];
        for (k, f) in self.factors.iter().enumerate().rev() {
            out[k] = (rest % f.m()) as f64 * f.h();
            rest /= f.m();
        }
        out
    }

    /// Diagonal action of a lattice function, values indexed row-major by
    /// vertex.
    pub fn represent(&self, a: &AlgebraElement) -> Result<SparseMatrix> {
        a.ensure_len(self.vertex_count())?;
        let n = self.total_dim();
        let trip: Vec<_> = (0..n).map(|i| (i, i, a.get(self.vertex_at(i)))).collect();
        Ok(SparseMatrix::from_triplets(n, n, &trip))
    }

    /// `[D, ρ(a)]`, with the sparsity of `D`.
    pub fn d(&self, a: &AlgebraElement) -> Result<SparseMatrix> {
        a.ensure_len(self.vertex_count())?;
        let n = self.total_dim();
        let trip: Vec<_> = self
            .dirac
            .triplets()
            .map(|(r, c, v)| (r, c, v * (a.get(self.vertex_at(c)) - a.get(self.vertex_at(r)))))
            .collect();
        Ok(SparseMatrix::from_triplets(n, n, &trip))
    }

    /// Signed singular values of `[D, ρ(a)]` for the product grading.
    pub fn spectral_values(&self, a: &AlgebraElement) -> Result<Vec<f64>> {
        spectral_values_graded(&self.d(a)?.to_dense(), &self.signs)
    }

    /// Dense commutator `[D, b]`.
    pub fn commutator(&self, b: &CMatrix) -> CMatrix {
        self.dirac.mul_dense(b) - self.dirac.dense_mul(b)
    }

    /// `[D, b_1⊗⋯⊗b_d]` by the sum-of-tensors rule
    /// `Σ_k b_1⊗⋯⊗[D_k, b_k]⊗⋯⊗b_d`.
    pub fn commutator_of_elementary(&self, parts: &[CMatrix]) -> Result<CMatrix> {
        if parts.len() != self.factors.len() {
            return Err(Error::Invalid(format!("{} tensor factors for {} directions", parts.len(), self.factors.len())));
        }
        for (p, f) in parts.iter().zip(&self.factors) {
            if p.shape() != (2 * f.m(), 2 * f.m()) {
                return Err(Error::Invalid(format!("factor of shape {:?}, expected {}", p.shape(), 2 * f.m())));
            }
        }
        let n = self.total_dim();
        let mut out = CMatrix::zeros(n, n);
        for (k, f) in self.factors.iter().enumerate() {
            let d = f.dirac().sparse();
            let bracket = d.mul_dense(&parts[k]) - d.dense_mul(&parts[k]);
            let mut term = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
            for (l, p) in parts.iter().enumerate() {
                term = term.kronecker(if l == k { &bracket } else { p });
            }
            out += term;
        }
        Ok(out)
    }

    /// Nonzero entries of `D` as `row,col,re,im`.
    pub fn dirac_csv(&self) -> String {
        sparse_csv(&self.dirac)
    }
}

pub fn sparse_csv(s: &SparseMatrix) -> String {
    let mut out = String::from("row,col,re,im\n");
    for (r, c, v) in s.triplets() {
        out.push_str(&format!("{r},{c},{:.16e},{:.16e}\n", v.re, v.im));
    }
    out
}

/// Unweighted product of the given factors.
pub fn tensor_triple(factors: Vec<SpectralTriple>) -> Result<TensorTriple> {
    TensorTriple::assemble(factors, None)
}

/// Product lattice whose direction-`k` block is scaled entrywise by the
/// weight `g_k`, sampled at the source vertex of each oriented edge.
/// Without weights this is the plain product of line and circle factors.
pub fn metric_weighted_dirac(spec: &LatticeSpec) -> Result<TensorTriple> {
    spec.validate()?;
    let factors = spec.factor_triples()?;
    let Some(sources) = &spec.weights else {
        return tensor_triple(factors);
    };
    let exprs: Vec<Expr> = sources.iter().map(|s| Expr::parse(s)).collect::<Result<_>>()?;
    let weight = |k: usize, point: &[f64]| -> Result<f64> {
        let w = exprs[k].eval(point).map_err(|e| Error::Metric(e.to_string()))?;
        if w > 0.0 {
            Ok(w)
        } else {
            Err(Error::Metric(format!("weight {} is {w} at {point:?}", exprs[k].source())))
        }
    };
    TensorTriple::assemble(factors, Some(&weight))
}

/// Torus with major radius 2 and minor radius 1, angles `(θ, φ)`, using the
/// inverse metric `g¹¹ = 1/(2 + cos φ)`, `g²² = 1`.
pub fn torus_spec(m: usize) -> LatticeSpec {
    let h = 2.0 * std::f64::consts::PI / m as f64;
    LatticeSpec {
        dims: vec![DimSpec { m, h, periodic: true }, DimSpec { m, h, periodic: true }],
        weights: Some(vec!["1/(2+cos(y))".into(), "1".into()]),
    }
}

/// Largest entry of `a − b`.
pub fn max_entry_difference(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, ONE};
    use crate::spectral::{d_algebra, spectral_values};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn line_examples() {
        let t = line_lattice_triple(2, 1.0).unwrap();
        assert_eq!(t.dirac().weights(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));
        let t = line_lattice_triple(4, 0.5).unwrap();
        let sv = spectral_values(&d_algebra(&AlgebraElement::from_real(&[0.0, 1.0, 3.0, 6.0]), t.dirac()).unwrap());
        assert_close(&sv.unwrap(), &[-6.0, -4.0, -2.0, 0.0, 0.0, 2.0, 4.0, 6.0], 1e-12);
        let da = d_algebra(&AlgebraElement::constant(4, ONE), t.dirac()).unwrap();
        assert_eq!(max_abs(da.entries()), 0.0);
        assert!(matches!(line_lattice_triple(1, 1.0), Err(Error::Size(_))));
    }

    #[test]
    fn circle_examples() {
        let t = circle_triple(3, 1.0).unwrap();
        let sv = spectral_values(&d_algebra(&AlgebraElement::from_real(&[0.0, 1.0, 3.0]), t.dirac()).unwrap());
        assert_close(&sv.unwrap(), &[-3.0, -2.0, -1.0, 1.0, 2.0, 3.0], 1e-12);
        assert_eq!(t.dirac().weights()[(2, 0)], 1.0);
        assert!(matches!(circle_triple(2, 1.0), Err(Error::Size(_))));
    }

    #[test]
    fn circle_sine_within_mesh_of_cosine() {
        let m = 64;
        let h = 2.0 * std::f64::consts::PI / m as f64;
        let xs: Vec<f64> = (0..m).map(|j| j as f64 * h).collect();
        let t = circle_triple(m, h).unwrap();
        let a = AlgebraElement::from_real(&xs.iter().map(|x| x.sin()).collect::<Vec<_>>());
        let sv = spectral_values(&d_algebra(&a, t.dirac()).unwrap()).unwrap();
        let pos: Vec<f64> = sv[m..].to_vec();
        let target = sorted(xs.iter().map(|x| x.cos().abs()).collect());
        for (p, q) in pos.iter().zip(&target) {
            assert!((p - q).abs() <= h);
        }
    }

    #[test]
    fn single_factor_reduces_to_factor() {
        let f = line_lattice_triple(5, 0.2).unwrap();
        let t = tensor_triple(vec![f.clone()]).unwrap();
        assert_eq!(t.assembled(), f.dirac().assembled().into_entries());
        assert_eq!(t.grading_signs(), &[1, 1, 1, 1, 1, -1, -1, -1, -1, -1]);
        let a = AlgebraElement::from_real(&[0.0, 1.0, 0.5, 2.0, -1.0]);
        let sv = t.spectral_values(&a).unwrap();
        assert_close(&sv, &spectral_values(&d_algebra(&a, f.dirac()).unwrap()).unwrap(), 1e-12);
    }

    fn random_even(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn commutator_identity_on_elementary_tensors() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = tensor_triple(vec![line_lattice_triple(2, 1.0).unwrap(), line_lattice_triple(2, 0.5).unwrap()]).unwrap();
        let one = CMatrix::identity(4, 4);
        assert_eq!(max_abs(&t.commutator(&one.kronecker(&one))), 0.0);
        for _ in 0..20 {
            let parts = vec![random_even(&mut rng, 4), random_even(&mut rng, 4)];
            let b = parts[0].kronecker(&parts[1]);
            // dense Kronecker oracle for D itself
            let d1 = t.factors()[0].dirac().assembled().into_entries();
            let d2 = t.factors()[1].dirac().assembled().into_entries();
            let dense_d = d1.kronecker(&one) + one.kronecker(&d2);
            assert!(max_entry_difference(&t.assembled(), &dense_d) < 1e-15);
            let lhs = &dense_d * &b - &b * &dense_d;
            assert!(max_entry_difference(&lhs, &t.commutator_of_elementary(&parts).unwrap()) <= 1e-12);
            assert!(max_entry_difference(&lhs, &t.commutator(&b)) <= 1e-12);
        }
    }

    #[test]
    fn separable_functions_reduce_to_one_direction() {
        let (m1, m2) = (4, 3);
        let f1 = line_lattice_triple(m1, 0.5).unwrap();
        let t = tensor_triple(vec![f1.clone(), circle_triple(m2, 1.0).unwrap()]).unwrap();
        let a1 = [0.0, 1.0, 3.0, 6.0];
        let values: Vec<f64> = (0..m1 * m2).map(|v| a1[v / m2]).collect();
        let sv = t.spectral_values(&AlgebraElement::from_real(&values)).unwrap();
        let one_d = spectral_values(&d_algebra(&AlgebraElement::from_real(&a1), f1.dirac()).unwrap()).unwrap();
        let expect = sorted(one_d.iter().flat_map(|v| std::iter::repeat_n(*v, 2 * m2)).collect());
        assert_close(&sv, &expect, 1e-12);
    }

    #[test]
    fn capacity_and_shape_checks() {
        let big = || line_lattice_triple(64, 1.0).unwrap();
        assert!(matches!(tensor_triple(vec![big(), big()]), Err(Error::Capacity(_))));
        assert!(matches!(tensor_triple(vec![]), Err(Error::Capacity(_))));
        let t = tensor_triple(vec![line_lattice_triple(2, 1.0).unwrap()]).unwrap();
        assert!(t.commutator_of_elementary(&[CMatrix::identity(3, 3)]).is_err());
    }

    #[test]
    fn unit_weights_match_plain_triples() {
        let spec = LatticeSpec { dims: vec![DimSpec { m: 6, h: 0.3, periodic: true }], weights: Some(vec!["1".into()]) };
        let t = metric_weighted_dirac(&spec).unwrap();
        assert_eq!(t.assembled(), circle_triple(6, 0.3).unwrap().dirac().assembled().into_entries());
        let spec = LatticeSpec {
            dims: vec![DimSpec { m: 3, h: 0.5, periodic: false }, DimSpec { m: 4, h: 0.25, periodic: true }],
            weights: Some(vec!["2.5".into(), "2.5".into()]),
        };
        let weighted = metric_weighted_dirac(&spec).unwrap();
        let plain = metric_weighted_dirac(&LatticeSpec { weights: None, ..spec }).unwrap();
        assert_eq!(weighted.sparse(), &plain.sparse().scale(C64::new(2.5, 0.0)));
    }

    #[test]
    fn torus_is_hermitian_and_odd() {
        let t = metric_weighted_dirac(&torus_spec(8)).unwrap();
        assert!(t.sparse().hermitian_defect() <= 1e-14);
        for (r, c, _) in t.sparse().triplets() {
            assert_eq!(t.grading_signs()[r], -t.grading_signs()[c]);
        }
        // θ-direction entries carry 1/(2 + cos φ) at the sampled φ, φ-direction entries 1
        let h = 2.0 * std::f64::consts::PI / 8.0;
        let scaled: Vec<f64> = t.sparse().triplets().map(|(_, _, v)| v.norm() * h).collect();
        let has = |w: f64| scaled.iter().any(|s| (s - w).abs() < 1e-14);
        assert!(has(1.0 / 3.0) && has(1.0) && has(1.0 / (2.0 + h.cos())));
        assert!(scaled.iter().all(|s| *s >= 1.0 / 3.0 - 1e-14 && *s <= 1.0 + 1e-14));
    }

    #[test]
    fn weight_scaling_scales_spectral_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let dims = vec![DimSpec { m: 4, h: 0.5, periodic: false }, DimSpec { m: 3, h: 1.0, periodic: true }];
        let base = LatticeSpec { dims: dims.clone(), weights: Some(vec!["1+0.5*cos(y)".into(), "1+x".into()]) };
        let scaled =
            LatticeSpec { dims, weights: Some(vec!["3*(1+0.5*cos(y))".into(), "3*(1+x)".into()]) };
        let a = AlgebraElement::from_real(&(0..12).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
        let s1 = metric_weighted_dirac(&base).unwrap().spectral_values(&a).unwrap();
        let s3 = metric_weighted_dirac(&scaled).unwrap().spectral_values(&a).unwrap();
        assert_close(&s1.iter().map(|v| 3.0 * v).collect::<Vec<_>>(), &s3, 1e-12);
    }

    #[test]
    fn metric_validation() {
        let dims = vec![DimSpec { m: 4, h: 1.0, periodic: false }];
        let neg = LatticeSpec { dims: dims.clone(), weights: Some(vec!["x - 1".into()]) };
        assert!(matches!(metric_weighted_dirac(&neg), Err(Error::Metric(_))));
        let count = LatticeSpec { dims, weights: Some(vec!["1".into(), "1".into()]) };
        assert!(matches!(metric_weighted_dirac(&count), Err(Error::Metric(_))));
        let json = r#"{"dims":[{"m":4,"h":0.5,"periodic":true},{"m":3,"h":1.0}],"weights":["1","2"]}"#;
        let spec: LatticeSpec = serde_json::from_str(json).unwrap();
        assert!(!spec.dims[1].periodic);
        assert!(metric_weighted_dirac(&spec).is_ok());
    }
}
