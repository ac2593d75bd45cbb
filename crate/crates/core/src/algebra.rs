//! The commutative algebra of values on maximal points, its pullbacks along
//! refinement maps, and prolongations back to the realized complex.
//!
//! Values are indexed by the position of the maximal point in the poset's
//! ascending list of maximal elements, which is also the ascending order of
//! vertex ids.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Sub};

use crate::complex::{GeometricRealization, Simplex, SimplicialComplex, SUPPORT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};
use crate::poset::{Poset, PosetMap};

/// Sampling density of [`sup_distance`]: lattice points per unit of
/// barycentric coordinate on each maximal face.
pub const SUP_SAMPLES_PER_DIM: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    values: Vec<C64>,
}

impl AlgebraElement {
    pub fn new(values: Vec<C64>) -> Self {
        AlgebraElement { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        AlgebraElement { values: values.iter().map(|&v| C64::new(v, 0.0)).collect() }
    }

    pub fn constant(m: usize, c: C64) -> Self {
        AlgebraElement { values: vec![c; m] }
    }

    pub fn zeros(m: usize) -> Self {
        Self::constant(m, ZERO)
    }

    /// Indicator of the `j`-th maximal point.
    pub fn basis(m: usize, j: usize) -> Self {
        let mut v = vec![ZERO; m];
        v[j] = C64::new(1.0, 0.0);
        AlgebraElement { values: v }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn get(&self, j: usize) -> C64 {
        self.values[j]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: C64) -> Self {
        AlgebraElement { values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn conj(&self) -> Self {
        AlgebraElement { values: self.values.iter().map(|v| v.conj()).collect() }
    }

    /// Euclidean distance between value vectors.
    pub fn distance(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn ensure_len(&self, m: usize) -> Result<()> {
        if self.len() != m {
            return Err(Error::Level { expected: m, got: self.len() });
        }
        Ok(())
    }

    /// CSV rows `vertex_id,re,im`.
    pub fn to_csv(&self, vertex_ids: &[usize]) -> String {
        let mut out = String::from("vertex_id,re,im\n");
        for (id, v) in vertex_ids.iter().zip(&self.values) {
            writeln!(out, "{id},{:.16e},{:.16e}", v.re, v.im).expect("write to String");
        }
        out
    }

    /// Parses the output of [`AlgebraElement::to_csv`], returning vertex ids
    /// alongside the element.
    pub fn from_csv(text: &str) -> Result<(Vec<usize>, Self)> {
        let mut ids = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("vertex_id")) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::Invalid(format!("line {}: expected `vertex_id,re,im`", lineno + 1));
            if fields.len() != 3 {
                return Err(bad());
            }
            ids.push(fields[0].parse().map_err(|_| bad())?);
            values.push(C64::new(fields[1].parse().map_err(|_| bad())?, fields[2].parse().map_err(|_| bad())?));
        }
        Ok((ids, AlgebraElement { values }))
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: Self) -> AlgebraElement {
        assert_eq!(self.len(), rhs.len());
        AlgebraElement { values: self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: Self) -> AlgebraElement {
        assert_eq!(self.len(), rhs.len());
        AlgebraElement { values: self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: Self) -> AlgebraElement {
        assert_eq!(self.len(), rhs.len());
        AlgebraElement { values: self.values.iter().zip(&rhs.values).map(|(a, b)| a * b).collect() }
    }
}

/// Vector in the Hilbert space spanned by all poset elements.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorElement {
    amplitudes: Vec<C64>,
}

impl VectorElement {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        VectorElement { amplitudes }
    }

    pub fn zeros(n: usize) -> Self {
        VectorElement { amplitudes: vec![ZERO; n] }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn vertex_of(p: &Poset, x: usize) -> Result<usize> {
    match p.face(x) {
        Some(f) if f.dim() == 0 => Ok(f.vertices()[0]),
        Some(_) => Err(Error::Invalid(format!("element {x} is not a maximal point"))),
        None => Err(Error::Invalid("poset has no face data".into())),
    }
}

/// `values(v) = f(coords(v))` on every maximal point of `p`.
pub fn sample<F>(f: F, p: &Poset, g: &GeometricRealization) -> Result<AlgebraElement>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut values = Vec::new();
    for x in p.maximal_elements() {
        let v = vertex_of(p, x)?;
        let y = f(g.coords(v))?;
        if !y.is_finite() {
            return Err(Error::Evaluation(format!("non-finite value at vertex {v}")));
        }
        values.push(C64::new(y, 0.0));
    }
    Ok(AlgebraElement { values })
}

/// Zero-fill pullback along `φ : X′ → X`: a fine maximal point takes the
/// value of its image when that image is itself a maximal point (same face
/// dimension), and zero otherwise.
pub fn pullback(phi: &PosetMap, coarse: &Poset, fine: &Poset, a: &AlgebraElement) -> Result<AlgebraElement> {
    let coarse_max = coarse.maximal_elements();
    a.ensure_len(coarse_max.len())?;
    if phi.source_len() != fine.len() || phi.target_len() != coarse.len() {
        return Err(Error::Level { expected: phi.source_len(), got: fine.len() });
    }
    let values = fine
        .maximal_elements()
        .into_iter()
        .map(|y| {
            let x = phi.apply(y);
            if fine.face_dim(y) == coarse.face_dim(x) {
                coarse_max.binary_search(&x).map_or(ZERO, |j| a.get(j))
            } else {
                ZERO
            }
        })
        .collect();
    Ok(AlgebraElement { values })
}

/// Barycentric-linear interpolation of vertex values over `|K|`.
pub struct PiecewiseLinear<'a> {
    k: &'a SimplicialComplex,
    g: &'a GeometricRealization,
    by_vertex: Vec<C64>,
}

impl PiecewiseLinear<'_> {
    pub fn eval(&self, x: &[f64]) -> Result<C64> {
        for tau in self.k.maximal_faces() {
            if let Some(t) = self.g.barycentric(tau, x) {
                if t.iter().all(|&w| w >= -SUPPORT_TOL) {
                    return Ok(self.on_face(tau, &t));
                }
            }
        }
        Err(Error::OutsideComplex(x.to_vec()))
    }

    fn on_face(&self, tau: &Simplex, t: &[f64]) -> C64 {
        tau.vertices().iter().zip(t).map(|(&v, &w)| self.by_vertex[v] * w).sum()
    }
}

pub fn prolong_pl<'a>(
    a: &AlgebraElement,
    k: &'a SimplicialComplex,
    g: &'a GeometricRealization,
) -> Result<PiecewiseLinear<'a>> {
    let verts = k.vertices();
    a.ensure_len(verts.len())?;
    let mut by_vertex = vec![ZERO; verts.last().map_or(0, |v| v + 1)];
    for (&v, &val) in verts.iter().zip(a.values()) {
        by_vertex[v] = val;
    }
    Ok(PiecewiseLinear { k, g, by_vertex })
}

/// Compositions of `total` into `parts` nonnegative integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Maximum of `|f − prolong_pl(a)|` over a barycentric lattice with
/// [`SUP_SAMPLES_PER_DIM`] steps on every maximal face.
pub fn sup_distance<F>(f: F, a: &AlgebraElement, k: &SimplicialComplex, g: &GeometricRealization) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let pl = prolong_pl(a, k, g)?;
    let n = SUP_SAMPLES_PER_DIM;
    let mut worst: f64 = 0.0;
    for tau in k.maximal_faces() {
        for comp in compositions(n, tau.vertices().len()) {
            let t: Vec<f64> = comp.iter().map(|&c| c as f64 / n as f64).collect();
            let x = g.point_in(tau, &t);
            let err = (C64::new(f(&x)?, 0.0) - pl.on_face(tau, &t)).norm();
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

/// Prolongation `ψ` of vectors: a fine element copies the amplitude of its
/// image when both faces have the same dimension, and is zero otherwise.
pub fn hilbert_prolong(phi: &PosetMap, coarse: &Poset, fine: &Poset, xi: &VectorElement) -> Result<VectorElement> {
    if xi.amplitudes.len() != coarse.len() {
        return Err(Error::Level { expected: coarse.len(), got: xi.amplitudes.len() });
    }
    if phi.source_len() != fine.len() {
        return Err(Error::Level { expected: phi.source_len(), got: fine.len() });
    }
    let amplitudes = (0..fine.len())
        .map(|y| {
            let x = phi.apply(y);
            if fine.face_dim(y) == coarse.face_dim(x) {
                xi.amplitudes[x]
            } else {
                ZERO
            }
        })
        .collect();
    Ok(VectorElement { amplitudes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{interval, polygon};
    use crate::poset::InverseSystem;

    fn real(v: &[f64]) -> AlgebraElement {
        AlgebraElement::from_real(v)
    }

    fn interval_tower(levels: usize) -> InverseSystem {
        let (k, g) = interval(0.0, 1.0);
        InverseSystem::refine(k, g, levels, 100_000).unwrap()
    }

    /// Values keyed by vertex coordinate, for order-independent assertions.
    fn by_coordinate(sys: &InverseSystem, n: usize, a: &AlgebraElement) -> Vec<(f64, C64)> {
        let mut out: Vec<(f64, C64)> = sys
            .complex(n)
            .vertices()
            .iter()
            .zip(a.values())
            .map(|(&v, &val)| (sys.realization(n).coords(v)[0], val))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    #[test]
    fn sampling_identity_and_constants() {
        let sys = interval_tower(1);
        let a = sample(|x| Ok(x[0]), sys.poset(1), sys.realization(1)).unwrap();
        let vals: Vec<f64> = by_coordinate(&sys, 1, &a).iter().map(|p| p.1.re).collect();
        assert_eq!(vals, vec![0.0, 0.5, 1.0]);
        let c = sample(|_| Ok(3.0), sys.poset(1), sys.realization(1)).unwrap();
        assert_eq!(c, AlgebraElement::constant(3, C64::new(3.0, 0.0)));
        assert!(matches!(sample(|_| Ok(f64::NAN), sys.poset(1), sys.realization(1)), Err(Error::Evaluation(_))));
    }

    #[test]
    fn sampling_sine_on_the_octagon() {
        let (k, g) = polygon(8).unwrap();
        let p = Poset::from_complex(&k);
        let a = sample(|x| Ok(x[1].atan2(x[0]).sin()), &p, &g).unwrap();
        for j in 0..8 {
            let expect = (std::f64::consts::TAU * j as f64 / 8.0).sin();
            assert!((a.get(j).re - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn pullback_zero_fills_new_vertices() {
        let sys = interval_tower(1);
        let a = real(&[2.0, 5.0]);
        let fine = pullback(sys.step(0), sys.poset(0), sys.poset(1), &a).unwrap();
        let vals: Vec<f64> = by_coordinate(&sys, 1, &fine).iter().map(|p| p.1.re).collect();
        assert_eq!(vals, vec![2.0, 0.0, 5.0]);
        let one = pullback(sys.step(0), sys.poset(0), sys.poset(1), &real(&[1.0, 1.0])).unwrap();
        assert_eq!(one, real(&[1.0, 1.0, 0.0]));
        assert!(matches!(
            pullback(sys.step(0), sys.poset(0), sys.poset(1), &real(&[1.0, 2.0, 3.0])),
            Err(Error::Level { .. })
        ));
    }

    #[test]
    fn pullback_along_identity() {
        let sys = interval_tower(1);
        let id = PosetMap::identity(sys.poset(1).len());
        let a = real(&[1.0, -2.0, 0.5]);
        assert_eq!(pullback(&id, sys.poset(1), sys.poset(1), &a).unwrap(), a);
    }

    #[test]
    fn pullback_is_a_coherent_homomorphism() {
        let sys = interval_tower(3);
        let a = real(&[0.3, -1.2]);
        let b = AlgebraElement::new(vec![C64::new(1.0, 2.0), C64::new(-0.5, 0.25)]);
        let pb = |x: &AlgebraElement| pullback(sys.step(0), sys.poset(0), sys.poset(1), x).unwrap();
        assert_eq!(pb(&(&a * &b)), &pb(&a) * &pb(&b));
        assert_eq!(pb(&(&a + &b)), &pb(&a) + &pb(&b));

        let direct = pullback(&sys.map_between(0, 3), sys.poset(0), sys.poset(3), &a).unwrap();
        let mut stepwise = a.clone();
        for n in 0..3 {
            stepwise = pullback(sys.step(n), sys.poset(n), sys.poset(n + 1), &stepwise).unwrap();
        }
        assert_eq!(direct, stepwise);
    }

    #[test]
    fn pl_prolongation() {
        let (k, g) = interval(0.0, 1.0);
        let pl = prolong_pl(&real(&[0.0, 1.0]), &k, &g).unwrap();
        for x in [0.0, 0.3, 0.75, 1.0] {
            assert!((pl.eval(&[x]).unwrap().re - x).abs() < 1e-15);
        }
        assert!(pl.eval(&[1.5]).is_err());
        let c = prolong_pl(&real(&[4.0, 4.0]), &k, &g).unwrap();
        assert_eq!(c.eval(&[0.6]).unwrap().re, 4.0);
    }

    #[test]
    fn sup_distance_is_exact_on_linear_functions() {
        let sys = interval_tower(3);
        let f = |x: &[f64]| Ok(3.0 * x[0] - 1.0);
        let a = sample(f, sys.poset(3), sys.realization(3)).unwrap();
        assert!(sup_distance(f, &a, sys.complex(3), sys.realization(3)).unwrap() < 1e-12);
    }

    #[test]
    fn sup_distance_on_the_circle_respects_interpolation_bound() {
        // sin of the angle, on the 16-gon: arc step 2π/16, ‖f″‖ ≤ 1
        let (k, g) = polygon(16).unwrap();
        let p = Poset::from_complex(&k);
        let f = |x: &[f64]| Ok(x[1].atan2(x[0]).sin());
        let a = sample(f, &p, &g).unwrap();
        let err = sup_distance(f, &a, &k, &g).unwrap();
        let h = std::f64::consts::TAU / 16.0;
        assert!(err <= h * h / 8.0 + 1e-3, "err = {err}");
    }

    #[test]
    fn sup_distance_lipschitz_bound() {
        let sys = interval_tower(4);
        let f = |x: &[f64]| Ok((x[0] - 0.3).abs());
        for n in 0..=4 {
            let a = sample(f, sys.poset(n), sys.realization(n)).unwrap();
            let h = 0.5f64.powi(n as i32);
            assert!(sup_distance(f, &a, sys.complex(n), sys.realization(n)).unwrap() <= h);
        }
    }

    #[test]
    fn hilbert_prolongation() {
        let sys = interval_tower(1);
        let (p0, p1, phi) = (sys.poset(0), sys.poset(1), sys.step(0));
        let mut amp = vec![ZERO; 3];
        amp[0] = C64::new(0.6, 0.8);
        let xi = VectorElement::new(amp);
        let out = hilbert_prolong(phi, p0, p1, &xi).unwrap();
        assert!((out.norm() - xi.norm()).abs() < 1e-15);
        assert_eq!(out.amplitudes().iter().filter(|a| a.norm() > 0.0).count(), 1);

        assert_eq!(hilbert_prolong(phi, p0, p1, &VectorElement::zeros(3)).unwrap(), VectorElement::zeros(p1.len()));

        let mut amp = vec![ZERO; 3];
        amp[2] = C64::new(1.0, 0.0);
        let edge = hilbert_prolong(phi, p0, p1, &VectorElement::new(amp)).unwrap();
        assert!((edge.norm() - 2f64.sqrt()).abs() < 1e-15);
        assert!(hilbert_prolong(phi, p0, p1, &VectorElement::zeros(4)).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let a = AlgebraElement::new(vec![C64::new(0.1, -2.0), C64::new(1.0 / 3.0, 0.0)]);
        let text = a.to_csv(&[4, 7]);
        assert!(text.starts_with("vertex_id,re,im\n4,"));
        let (ids, back) = AlgebraElement::from_csv(&text).unwrap();
        assert_eq!(ids, vec![4, 7]);
        assert_eq!(back, a);
        assert!(AlgebraElement::from_csv("1,2\n").is_err());
    }
}
