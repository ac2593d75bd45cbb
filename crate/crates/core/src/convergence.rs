//! Refinement driver and error tables for the convergence experiments.
//!
//! Line levels use `8·2^k + 1` nodes on `[0, 1]`; circle levels use `8·2^k`
//! nodes on `[0, 2π)`. A run over `levels = n` produces the rows `k = 0..=n`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::algebra::{sample, sup_distance, AlgebraElement};
use crate::complex::{mesh, GeometricRealization, SimplicialComplex};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, I, ONE};
use crate::models::{circle_triple, line_lattice_triple, metric_weighted_dirac, DimSpec, LatticeSpec, TensorTriple};
use crate::poset::InverseSystem;
use crate::spectral::{d_algebra, expectation, laplacian, spectral_values, GradedMatrix, SpectralTriple};

/// Face budget for [`refine_sequence`].
pub const MAX_FACES: usize = 1_000_000;
/// Errors at or below this value do not enter rate fits.
pub const RATE_FLOOR: f64 = 1e-14;
/// Refinements up to this many faces are checked for coherence.
const COHERENCE_CHECK_FACES: usize = 2_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    Line,
    Circle,
    Lattice2d,
    Torus2d,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorRow {
    pub level: usize,
    pub h: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
    /// Fitted slope of `log error` against `log h`, when enough rows are
    /// above [`RATE_FLOOR`].
    pub rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub rate: Option<f64>,
    pub passed: bool,
}

impl ErrorTable {
    pub fn new(rows: Vec<ErrorRow>) -> Result<Self> {
        if rows.windows(2).any(|w| w[1].h >= w[0].h) {
            return Err(Error::Invalid("mesh sizes must decrease strictly".into()));
        }
        if rows.iter().any(|r| !(r.error >= 0.0 && r.error.is_finite())) {
            return Err(Error::Invalid("errors must be finite and nonnegative".into()));
        }
        let rate = estimate_rate(&rows).ok();
        Ok(ErrorTable { rows, rate })
    }

    pub fn max_error(&self) -> f64 {
        self.rows.iter().map(|r| r.error).fold(0.0, f64::max)
    }

    /// `level,h,error,rate_cum`, where `rate_cum` is the rate fitted to the
    /// rows up to and including the current one (empty while undefined).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,h,error,rate_cum\n");
        for (i, r) in self.rows.iter().enumerate() {
            let cum = estimate_rate(&self.rows[..=i]).map(|v| format!("{v:.16e}")).unwrap_or_default();
            out.push_str(&format!("{},{:.16e},{:.16e},{}\n", r.level, r.h, r.error, cum));
        }
        out
    }

    /// Passes when the fitted rate lies within `tol` of `expected`. A table
    /// whose errors all sit at the floor is exact and passes as well.
    pub fn summary(&self, expected: f64, tol: f64) -> Summary {
        let exact = self.rows.iter().all(|r| r.error <= RATE_FLOOR.max(1e-12));
        let passed = match self.rate {
            Some(rate) => (rate - expected).abs() <= tol,
            None => exact,
        };
        Summary { rate: self.rate, passed }
    }
}

/// Least-squares slope of `log error` against `log h` over rows with error
/// above [`RATE_FLOOR`].
pub fn estimate_rate(rows: &[ErrorRow]) -> Result<f64> {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.error > RATE_FLOOR && r.h > 0.0).map(|r| (r.h.ln(), r.error.ln())).collect();
    if pts.len() < 2 {
        return Err(Error::Rate(format!("{} usable rows, need 2", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Rate("all usable rows share one mesh size".into()));
    }
    Ok(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// `n` barycentric subdivisions of `(k, g)` with induced poset maps, checked
/// for coherence when the result is small enough to do so exhaustively.
pub fn refine_sequence(k: SimplicialComplex, g: GeometricRealization, n: usize) -> Result<InverseSystem> {
    let system = InverseSystem::refine(k, g, n, MAX_FACES)?;
    let finest = system.complex(system.depth()).num_faces();
    if finest <= COHERENCE_CHECK_FACES {
        let bad = system.coherence_violations(system.depth());
        if bad > 0 {
            return Err(Error::Consistency(format!("{bad} coherence violations")));
        }
    }
    Ok(system)
}

/// Nodes and spacing of a one-dimensional level.
pub fn grid(model: Model, level: usize) -> Result<(Vec<f64>, f64)> {
    let cells = 8usize
        .checked_shl(level as u32)
        .filter(|c| *c <= 1 << 24)
        .ok_or_else(|| Error::Capacity(format!("level {level} is too fine")))?;
    match model {
        Model::Line => {
            let h = 1.0 / cells as f64;
            Ok(((0..=cells).map(|j| j as f64 * h).collect(), h))
        }
        Model::Circle => {
            let h = 2.0 * PI / cells as f64;
            Ok(((0..cells).map(|j| j as f64 * h).collect(), h))
        }
        _ => Err(Error::Invalid(format!("{model:?} is not a one-dimensional model"))),
    }
}

fn triple_for(model: Model, m: usize, h: f64) -> Result<SpectralTriple> {
    match model {
        Model::Line => line_lattice_triple(m, h),
        Model::Circle => circle_triple(m, h),
        _ => Err(Error::Invalid(format!("{model:?} is not a one-dimensional model"))),
    }
}

fn sample_grid(f: &dyn Fn(f64) -> f64, xs: &[f64]) -> Result<AlgebraElement> {
    let values: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    if let Some(j) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Evaluation(format!("non-finite value at x = {}", xs[j])));
    }
    Ok(AlgebraElement::from_real(&values))
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Largest discrepancy under the sorted (bottleneck-optimal) matching.
pub fn matched_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (a, b) = (sorted(a.to_vec()), sorted(b.to_vec()));
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Nonnegative spectral values of `da` that carry derivative information:
/// all `m` on the circle, and the `m − 1` edge values on the line (the
/// structural zero of the open end is dropped).
fn derivative_spectrum(model: Model, f: &dyn Fn(f64) -> f64, level: usize) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let (xs, h) = grid(model, level)?;
    let m = xs.len();
    let triple = triple_for(model, m, h)?;
    let a = sample_grid(f, &xs)?;
    let sv = spectral_values(&d_algebra(&a, triple.dirac())?)?;
    let mut positive = sv[m..].to_vec();
    if model == Model::Line {
        positive.remove(0);
    }
    Ok((xs, positive, h))
}

/// Matches the spectral values of `d(sample f)` against `|f′|` on the grid
/// (left nodes of each edge on the line) and records the largest matched
/// discrepancy per level.
pub fn derivative_convergence(
    f: &dyn Fn(f64) -> f64,
    df: &dyn Fn(f64) -> f64,
    model: Model,
    levels: usize,
) -> Result<ErrorTable> {
    let mut rows = Vec::new();
    for level in 0..=levels {
        let (xs, values, h) = derivative_spectrum(model, f, level)?;
        let target: Vec<f64> = xs[..values.len()].iter().map(|&x| df(x).abs()).collect();
        rows.push(ErrorRow { level, h, error: matched_distance(&values, &target) });
    }
    ErrorTable::new(rows)
}

/// Compares `Δ(sample f)` with `−f″` at every circle node, or at the
/// interior nodes of the line.
pub fn laplacian_convergence(
    f: &dyn Fn(f64) -> f64,
    d2f: &dyn Fn(f64) -> f64,
    model: Model,
    levels: usize,
) -> Result<ErrorTable> {
    let mut rows = Vec::new();
    for level in 0..=levels {
        let (xs, h) = grid(model, level)?;
        let m = xs.len();
        let triple = triple_for(model, m, h)?;
        let lap = laplacian(&sample_grid(f, &xs)?, triple.dirac())?;
        let nodes = if model == Model::Line { 1..m - 1 } else { 0..m };
        let error = nodes.map(|j| (lap.get(j).re + d2f(xs[j])).abs()).fold(0.0, f64::max);
        rows.push(ErrorRow { level, h, error });
    }
    ErrorTable::new(rows)
}

/// Sup-distance between `f` and the piecewise-linear prolongation of its
/// samples, at every level of `system`.
pub fn approximation_convergence(f: &dyn Fn(&[f64]) -> Result<f64>, system: &InverseSystem) -> Result<ErrorTable> {
    let mut rows = Vec::new();
    for n in 0..=system.depth() {
        let (k, g) = (system.complex(n), system.realization(n));
        let a = sample(f, system.poset(n), g)?;
        rows.push(ErrorRow { level: n, h: mesh(k, g), error: sup_distance(f, &a, k, g)? });
    }
    ErrorTable::new(rows)
}

/// Density matrix `ω` at node `j` whose expectation against `da` is the
/// convex combination `Σ w_o (λ_{j+o} − λ_j)/(o·h)` of two-point quotients.
///
/// `ω = e_jj + Σ μ_o e_{j, m+j+o}` (or the transposed slot when the edge is
/// stored against `j`); the diagonal entry fixes `Tr_s(ω) = 1` and the odd
/// part picks the edge entries of `da`.
pub fn stencil_synthesis(target: &[(isize, f64)], j: usize, triple: &SpectralTriple) -> Result<GradedMatrix> {
    let m = triple.m();
    if j >= m {
        return Err(Error::Synthesis(format!("node {j} out of range")));
    }
    if target.iter().any(|&(_, w)| w.is_nan() || w < 0.0) {
        return Err(Error::Synthesis("weights must be nonnegative".into()));
    }
    let total: f64 = target.iter().map(|t| t.1).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Synthesis(format!("weights sum to {total}, not 1")));
    }
    let w = triple.dirac().weights();
    let mut omega = CMatrix::zeros(2 * m, 2 * m);
    omega[(j, j)] = ONE;
    for &(offset, weight) in target {
        if weight == 0.0 {
            continue;
        }
        let k = neighbour(triple, j, offset)?;
        let o = offset as f64;
        if w[(j, k)] != 0.0 {
            omega[(j, m + k)] += C64::new(weight / (o * w[(j, k)]), 0.0);
        } else {
            omega[(k, m + j)] += C64::new(-weight / (o * w[(k, j)]), 0.0);
        }
    }
    GradedMatrix::new(omega, m)
}

fn neighbour(triple: &SpectralTriple, j: usize, offset: isize) -> Result<usize> {
    let m = triple.m() as isize;
    if offset == 0 {
        return Err(Error::Synthesis("offset 0 is not a two-point stencil".into()));
    }
    let raw = j as isize + offset;
    let k = if (0..m).contains(&raw) { raw } else { raw.rem_euclid(m) } as usize;
    let wraps = !(0..m).contains(&raw);
    if !triple.graph().adjacent(j, k) || (wraps && m < 3) || offset.unsigned_abs() != 1 {
        return Err(Error::Synthesis(format!("no edge from node {j} with offset {offset}")));
    }
    Ok(k)
}

/// `−i·⟨da⟩_ω`, the real value a synthesized stencil assigns to `a`.
pub fn stencil_value(omega: &GradedMatrix, a: &AlgebraElement, triple: &SpectralTriple) -> Result<f64> {
    Ok((expectation(omega, &d_algebra(a, triple.dirac())?)? * -I).re)
}

/// Error of the synthesized stencil against `f′` over every circle node.
pub fn stencil_convergence(
    f: &dyn Fn(f64) -> f64,
    df: &dyn Fn(f64) -> f64,
    target: &[(isize, f64)],
    levels: usize,
) -> Result<ErrorTable> {
    let mut rows = Vec::new();
    for level in 0..=levels {
        let (xs, h) = grid(Model::Circle, level)?;
        let triple = circle_triple(xs.len(), h)?;
        let a = sample_grid(f, &xs)?;
        let da = d_algebra(&a, triple.dirac())?;
        let mut error: f64 = 0.0;
        for (j, &x) in xs.iter().enumerate() {
            let omega = stencil_synthesis(target, j, &triple)?;
            let value = (expectation(&omega, &da)? * -I).re;
            error = error.max((value - df(x)).abs());
        }
        rows.push(ErrorRow { level, h, error });
    }
    ErrorTable::new(rows)
}

/// Hausdorff distance between two finite sets of reals.
pub fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a.to_vec()), sorted(b.to_vec()));
    let one_sided = |from: &[f64], to: &[f64]| {
        from.iter()
            .map(|&x| {
                let i = to.partition_point(|&y| y < x);
                let right = to.get(i).map_or(f64::INFINITY, |y| y - x);
                let left = if i > 0 { x - to[i - 1] } else { f64::INFINITY };
                left.min(right)
            })
            .fold(0.0, f64::max)
    };
    one_sided(&a, &b).max(one_sided(&b, &a))
}

/// Pooled circle spectra: for each `N ≤ levels`, the Hausdorff distance
/// between the union of `|spectral values|` over levels `0..=N` and a dense
/// sample of `{|f′(x)|}`.
pub fn pooled_spectral_hausdorff(f: &dyn Fn(f64) -> f64, df: &dyn Fn(f64) -> f64, levels: usize) -> Result<Vec<f64>> {
    let dense: Vec<f64> = (0..20_000).map(|i| df(2.0 * PI * i as f64 / 20_000.0).abs()).collect();
    let mut pooled = Vec::new();
    let mut out = Vec::new();
    for level in 0..=levels {
        let (_, values, _) = derivative_spectrum(Model::Circle, f, level)?;
        pooled.extend(values);
        out.push(hausdorff(&pooled, &dense));
    }
    Ok(out)
}

/// Two-dimensional product lattice at a refinement level: `8·2^k` nodes per
/// direction, on `[0, 1]²` for the lattice and the angle square for the torus.
pub fn lattice_spec(model: Model, level: usize) -> Result<LatticeSpec> {
    let m = 8usize.checked_shl(level as u32).ok_or_else(|| Error::Capacity(format!("level {level}")))?;
    match model {
        Model::Lattice2d => {
            let h = 1.0 / (m - 1) as f64;
            Ok(LatticeSpec { dims: vec![DimSpec { m, h, periodic: false }; 2], weights: None })
        }
        Model::Torus2d => Ok(crate::models::torus_spec(m)),
        _ => Err(Error::Invalid(format!("{model:?} is not a two-dimensional model"))),
    }
}

/// Largest deviation of the edge entries of `[D, ρ(a)]` from the weighted
/// partial derivatives `(−i D_rc)·h_k·∂_k f` at the source vertex.
pub fn tensor_derivative_error(
    t: &TensorTriple,
    f: &dyn Fn(&[f64]) -> Result<f64>,
    grad: &dyn Fn(&[f64], usize) -> Result<f64>,
) -> Result<f64> {
    let values: Vec<f64> =
        (0..t.vertex_count()).map(|v| f(&t.vertex_coords(v))).collect::<Result<_>>()?;
    let da = t.d(&AlgebraElement::from_real(&values))?;
    let mut worst: f64 = 0.0;
    for (r, c, entry) in da.triplets() {
        let Some((k, upper)) = t.edge_direction(r, c) else { continue };
        if !upper {
            continue;
        }
        let source = t.vertex_coords(t.vertex_at(r));
        let scale = (t.sparse().get(r, c) * -I).re * t.factors()[k].h();
        worst = worst.max(((entry * -I).re - scale * grad(&source, k)?).abs());
    }
    Ok(worst)
}

/// First-derivative convergence on a two-dimensional model.
pub fn tensor_derivative_convergence(
    model: Model,
    f: &dyn Fn(&[f64]) -> Result<f64>,
    grad: &dyn Fn(&[f64], usize) -> Result<f64>,
    levels: usize,
) -> Result<ErrorTable> {
    let mut rows = Vec::new();
    for level in 0..=levels {
        let spec = lattice_spec(model, level)?;
        let t = metric_weighted_dirac(&spec)?;
        let h = spec.dims[0].h;
        rows.push(ErrorRow { level, h, error: tensor_derivative_error(&t, f, grad)? });
    }
    ErrorTable::new(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::interval;
    use crate::spectral::graded_trace;

    fn row(level: usize, h: f64, error: f64) -> ErrorRow {
        ErrorRow { level, h, error }
    }

    #[test]
    fn rate_examples() {
        assert!((estimate_rate(&[row(0, 0.1, 0.1), row(1, 0.05, 0.05)]).unwrap() - 1.0).abs() < 1e-12);
        assert!((estimate_rate(&[row(0, 0.2, 0.04), row(1, 0.1, 0.01)]).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(estimate_rate(&[row(0, 0.1, 0.1), row(1, 0.05, 0.0)]), Err(Error::Rate(_))));
    }

    #[test]
    fn noisy_rate_recovers_exponent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for p in [1.0, 1.5, 2.0] {
            let rows: Vec<_> = (0..5)
                .map(|k| {
                    let h = 0.5f64.powi(k);
                    row(k as usize, h, 3.0 * h.powf(p) * (1.0 + rng.gen_range(-0.1..0.1)))
                })
                .collect();
            assert!((estimate_rate(&rows).unwrap() - p).abs() <= 0.2);
        }
    }

    #[test]
    fn table_validation_and_csv() {
        assert!(ErrorTable::new(vec![row(0, 0.1, 0.1), row(1, 0.1, 0.05)]).is_err());
        assert!(ErrorTable::new(vec![row(0, 0.1, -1.0)]).is_err());
        let t = ErrorTable::new(vec![row(0, 0.5, 0.25), row(1, 0.25, 0.0625)]).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "level,h,error,rate_cum");
        assert!(lines[1].ends_with(','));
        assert!(lines[2].ends_with("2.0000000000000000e0"));
        assert!(t.summary(2.0, 0.1).passed);
        assert!(!t.summary(1.0, 0.1).passed);
    }

    #[test]
    fn refine_interval() {
        let (k, g) = interval(0.0, 1.0);
        let s = refine_sequence(k.clone(), g.clone(), 3).unwrap();
        let meshes: Vec<f64> = (0..=3).map(|n| mesh(s.complex(n), s.realization(n))).collect();
        assert_eq!(meshes, vec![1.0, 0.5, 0.25, 0.125]);
        assert_eq!(s.coherence_violations(3), 0);
        assert_eq!(refine_sequence(k, g, 0).unwrap().depth(), 0);
        let (k, g) = crate::complex::standard_simplex(2);
        assert!(matches!(refine_sequence(k, g, 20), Err(Error::Capacity(_))));
    }

    #[test]
    fn linear_function_is_exact_on_line() {
        let t = derivative_convergence(&|x| x, &|_| 1.0, Model::Line, 4).unwrap();
        assert!(t.max_error() <= 1e-12);
        assert!(t.rate.is_none());
    }

    #[test]
    fn forward_difference_taylor_bound() {
        let t = derivative_convergence(&f64::exp, &f64::exp, Model::Line, 5).unwrap();
        for r in &t.rows {
            assert!(r.error <= std::f64::consts::E * r.h / 2.0 + 1e-10);
        }
        assert!((t.rate.unwrap() - 1.0).abs() <= 0.15);
    }

    #[test]
    fn laplacian_examples() {
        let t = laplacian_convergence(&|x| 3.0 * x * x - x, &|_| 6.0, Model::Line, 4).unwrap();
        assert!(t.max_error() <= 1e-10);
        let t = laplacian_convergence(&|_| 2.0, &|_| 0.0, Model::Circle, 3).unwrap();
        assert_eq!(t.max_error(), 0.0);
    }

    #[test]
    fn approximation_of_linear_function() {
        let (k, g) = interval(0.0, 1.0);
        let s = refine_sequence(k, g, 4).unwrap();
        let t = approximation_convergence(&|x: &[f64]| Ok(2.0 * x[0] - 1.0), &s).unwrap();
        assert!(t.max_error() < 1e-12);
    }

    #[test]
    fn stencil_examples() {
        let triple = line_lattice_triple(5, 0.5).unwrap();
        let a = AlgebraElement::from_real(&[0.0, 1.0, 4.0, 9.0, 16.0]);
        let forward = stencil_synthesis(&[(1, 1.0)], 2, &triple).unwrap();
        assert_eq!(graded_trace(&forward), ONE);
        assert!((stencil_value(&forward, &a, &triple).unwrap() - 10.0).abs() < 1e-12);
        let central = stencil_synthesis(&[(1, 0.5), (-1, 0.5)], 2, &triple).unwrap();
        assert!((stencil_value(&central, &a, &triple).unwrap() - 8.0).abs() < 1e-12);
        let backward = stencil_synthesis(&[(-1, 1.0)], 2, &triple).unwrap();
        assert!((stencil_value(&backward, &a, &triple).unwrap() - 6.0).abs() < 1e-12);
        for bad in [vec![(1, 0.7)], vec![(1, 1.5), (-1, -0.5)], vec![(2, 1.0)]] {
            assert!(matches!(stencil_synthesis(&bad, 2, &triple), Err(Error::Synthesis(_))));
        }
        assert!(matches!(stencil_synthesis(&[(-1, 1.0)], 0, &triple), Err(Error::Synthesis(_))));
        // across the corner edge of the circle
        let circle = circle_triple(4, 1.0).unwrap();
        let a = AlgebraElement::from_real(&[0.0, 1.0, 3.0, 6.0]);
        let wrap = stencil_synthesis(&[(1, 0.5), (-1, 0.5)], 0, &circle).unwrap();
        assert!((stencil_value(&wrap, &a, &circle).unwrap() - (1.0 - 6.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff(&[0.0, 1.0], &[0.0, 1.0]), 0.0);
        assert_eq!(hausdorff(&[0.0], &[0.0, 0.5]), 0.5);
        let pooled = pooled_spectral_hausdorff(&f64::sin, &f64::cos, 4).unwrap();
        assert!(pooled.windows(2).all(|w| w[1] <= w[0]));
        assert!(pooled[4] < pooled[0]);
    }

    #[test]
    fn tables_are_deterministic() {
        let a = derivative_convergence(&f64::sin, &f64::cos, Model::Circle, 3).unwrap().to_csv();
        let b = derivative_convergence(&f64::sin, &f64::cos, Model::Circle, 3).unwrap().to_csv();
        assert_eq!(a, b);
    }

    #[test]
    fn two_dimensional_first_derivatives() {
        let f = |p: &[f64]| Ok((p[0]).sin() * (p[1]).cos());
        let grad = |p: &[f64], k: usize| Ok(if k == 0 { p[0].cos() * p[1].cos() } else { -p[0].sin() * p[1].sin() });
        let t = tensor_derivative_convergence(Model::Torus2d, &f, &grad, 2).unwrap();
        assert!((t.rate.unwrap() - 1.0).abs() <= 0.2, "{t:?}");
        let lin = |p: &[f64]| Ok(2.0 * p[0] - p[1]);
        let lgrad = |_: &[f64], k: usize| Ok(if k == 0 { 2.0 } else { -1.0 });
        let t = tensor_derivative_convergence(Model::Lattice2d, &lin, &lgrad, 1).unwrap();
        assert!(t.max_error() < 1e-12);
        assert!(matches!(tensor_derivative_convergence(Model::Torus2d, &f, &grad, 3), Err(Error::Capacity(_))));
    }
}
