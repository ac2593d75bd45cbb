//! Abstract simplicial complexes, their geometric realizations and barycentric
//! subdivision.
//!
//! Faces of a complex are stored in a canonical order: by dimension first and
//! lexicographically within a dimension. A face is addressed by its position
//! in that order. Barycentric subdivision names the barycenter of face `f` by
//! the vertex id `f`, so vertex ids of a subdivision encode the face they
//! subdivide and replaying a refinement is deterministic.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Barycentric coordinates above this threshold count as strictly positive.
pub const SUPPORT_TOL: f64 = 1e-9;
/// Smallest admissible relative volume of a realized maximal face.
pub const AFFINE_TOL: f64 = 1e-10;

/// A nonempty set of vertex ids, stored strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Simplex(Vec<usize>);

impl Simplex {
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Build("simplex without vertices".into()));
        }
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Build(format!("repeated vertex in {vertices:?}")));
        }
        Ok(Simplex(vertices))
    }

    pub fn vertex(v: usize) -> Self {
        Simplex(vec![v])
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// `true` when every vertex of `other` is a vertex of `self`.
    pub fn contains(&self, other: &Simplex) -> bool {
        other.0.iter().all(|v| self.0.binary_search(v).is_ok())
    }

    /// All nonempty faces, including `self`.
    pub fn faces(&self) -> Vec<Simplex> {
        let n = self.0.len();
        assert!(n < 32, "simplex dimension too large to enumerate faces");
        (1u32..(1 << n))
            .map(|mask| {
                Simplex((0..n).filter(|i| mask & (1 << i) != 0).map(|i| self.0[i]).collect())
            })
            .collect()
    }
}

impl TryFrom<Vec<usize>> for Simplex {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Simplex::new(v)
    }
}

impl From<Simplex> for Vec<usize> {
    fn from(s: Simplex) -> Self {
        s.0
    }
}

impl Ord for Simplex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Simplex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Downward-closed family of simplices.
#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    faces: Vec<Simplex>,
    index: HashMap<Simplex, usize>,
    maximal: Vec<Simplex>,
}

impl SimplicialComplex {
    /// Downward closure of `maximal`; nested inputs are dropped from the
    /// maximal list.
    pub fn build(maximal: &[Simplex]) -> Result<Self> {
        if maximal.is_empty() {
            return Err(Error::Build("no maximal faces given".into()));
        }
        let mut faces = BTreeSet::new();
        for s in maximal {
            faces.extend(s.faces());
        }
        let faces: Vec<Simplex> = faces.into_iter().collect();
        let index: HashMap<Simplex, usize> =
            faces.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();

        let candidates: BTreeSet<&Simplex> = maximal.iter().collect();
        let mut covered: HashSet<Simplex> = HashSet::new();
        for t in &candidates {
            covered.extend(t.faces().into_iter().filter(|f| f.dim() < t.dim()));
        }
        let maximal: Vec<Simplex> =
            candidates.into_iter().filter(|s| !covered.contains(*s)).cloned().collect();
        Ok(SimplicialComplex { faces, index, maximal })
    }

    pub fn faces(&self) -> &[Simplex] {
        &self.faces
    }

    pub fn face(&self, id: usize) -> &Simplex {
        &self.faces[id]
    }

    pub fn face_index(&self, s: &Simplex) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn maximal_faces(&self) -> &[Simplex] {
        &self.maximal
    }

    /// Vertex ids in increasing order.
    pub fn vertices(&self) -> Vec<usize> {
        self.faces.iter().take_while(|f| f.dim() == 0).map(|f| f.0[0]).collect()
    }

    pub fn num_vertices(&self) -> usize {
        self.faces.iter().take_while(|f| f.dim() == 0).count()
    }

    pub fn dim(&self) -> usize {
        self.faces.last().map_or(0, Simplex::dim)
    }

    pub fn is_pure(&self) -> bool {
        let d = self.dim();
        self.maximal.iter().all(|s| s.dim() == d)
    }

    /// Faces of dimension exactly `k`.
    pub fn faces_of_dim(&self, k: usize) -> impl Iterator<Item = (usize, &Simplex)> {
        self.faces.iter().enumerate().filter(move |(_, s)| s.dim() == k)
    }
}

/// Vertex coordinates in ℝ^d, indexed by vertex id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricRealization {
    coords: Vec<Vec<f64>>,
}

impl GeometricRealization {
    pub fn new(coords: Vec<Vec<f64>>) -> Result<Self> {
        let d = coords.first().map_or(0, Vec::len);
        if d == 0 || coords.iter().any(|c| c.len() != d) {
            return Err(Error::Geometry("coordinates must share one positive dimension".into()));
        }
        if coords.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Geometry("non-finite coordinate".into()));
        }
        Ok(GeometricRealization { coords })
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords[0].len()
    }

    pub fn coords(&self, v: usize) -> &[f64] {
        &self.coords[v]
    }

    pub fn all_coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    /// Checks that every vertex of `k` has coordinates and every maximal face
    /// is affinely independent.
    pub fn validate(&self, k: &SimplicialComplex) -> Result<()> {
        if let Some(v) = k.vertices().into_iter().find(|&v| v >= self.coords.len()) {
            return Err(Error::Geometry(format!("vertex {v} has no coordinates")));
        }
        for s in k.maximal_faces() {
            if s.dim() > self.ambient_dim() {
                return Err(Error::Geometry(format!("{s:?} cannot embed in ℝ^{}", self.ambient_dim())));
            }
            if s.dim() == 0 {
                continue;
            }
            let edges = self.edge_matrix(s);
            let scale = edges.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
            let sv = edges.singular_values();
            let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
            if scale == 0.0 || smin < AFFINE_TOL * scale {
                return Err(Error::Geometry(format!("face {:?} is affinely dependent", s.vertices())));
            }
        }
        Ok(())
    }

    fn edge_matrix(&self, s: &Simplex) -> DMatrix<f64> {
        let v = s.vertices();
        let base = &self.coords[v[0]];
        DMatrix::from_fn(self.ambient_dim(), v.len() - 1, |r, c| self.coords[v[c + 1]][r] - base[r])
    }

    pub fn barycenter(&self, s: &Simplex) -> Vec<f64> {
        let n = s.vertices().len() as f64;
        let mut out = vec![0.0; self.ambient_dim()];
        for &v in s.vertices() {
            for (o, x) in out.iter_mut().zip(&self.coords[v]) {
                *o += x;
            }
        }
        out.iter_mut().for_each(|o| *o /= n);
        out
    }

    pub fn diameter(&self, s: &Simplex) -> f64 {
        let v = s.vertices();
        let mut best: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                best = best.max(distance(&self.coords[v[i]], &self.coords[v[j]]));
            }
        }
        best
    }

    /// Point with barycentric coordinates `t` in face `s`.
    pub fn point_in(&self, s: &Simplex, t: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient_dim()];
        for (&v, &w) in s.vertices().iter().zip(t) {
            for (o, x) in out.iter_mut().zip(&self.coords[v]) {
                *o += w * x;
            }
        }
        out
    }

    /// Barycentric coordinates of `x` with respect to `s`, provided `x` lies in
    /// the affine hull of `s` within [`SUPPORT_TOL`]. Coordinates may be
    /// negative when `x` is outside the simplex itself.
    pub fn barycentric(&self, s: &Simplex, x: &[f64]) -> Option<Vec<f64>> {
        let v = s.vertices();
        let base = &self.coords[v[0]];
        let rhs = DVector::from_fn(self.ambient_dim(), |r, _| x[r] - base[r]);
        if v.len() == 1 {
            return (rhs.norm() <= SUPPORT_TOL).then(|| vec![1.0]);
        }
        let a = self.edge_matrix(s);
        let gram = a.transpose() * &a;
        let t = gram.lu().solve(&(a.transpose() * &rhs))?;
        if (&a * &t - &rhs).norm() > SUPPORT_TOL {
            return None;
        }
        let mut out = Vec::with_capacity(v.len());
        out.push(1.0 - t.sum());
        out.extend(t.iter());
        Some(out)
    }
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Carrier map of a barycentric subdivision `K′ → K`.
#[derive(Clone, Debug)]
pub struct SubdivisionMap {
    /// Face of K whose barycenter is each vertex of K′ (indexed by vertex id).
    vertex_face: Vec<usize>,
    /// Carrier in K of each face of K′ (indexed by face id of K′).
    carrier: Vec<usize>,
}

impl SubdivisionMap {
    /// Face id in K carrying face `fine_face` of K′.
    pub fn carrier(&self, fine_face: usize) -> usize {
        self.carrier[fine_face]
    }

    pub fn carriers(&self) -> &[usize] {
        &self.carrier
    }

    /// Face id in K subdivided by the vertex `v` of K′.
    pub fn vertex_face(&self, v: usize) -> usize {
        self.vertex_face[v]
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Barycentric subdivision. Faces of the result are chains of faces of `k`;
/// the carrier of a chain is its largest element.
pub fn barycentric_subdivide(
    k: &SimplicialComplex,
    g: &GeometricRealization,
) -> Result<(SimplicialComplex, GeometricRealization, SubdivisionMap)> {
    g.validate(k)?;
    let mut top = Vec::new();
    for tau in k.maximal_faces() {
        for order in permutations(tau.vertices()) {
            let chain: Vec<usize> = (1..=order.len())
                .map(|len| {
                    let face = Simplex::new(order[..len].to_vec()).expect("prefix of a simplex");
                    k.face_index(&face).expect("closed complex")
                })
                .collect();
            top.push(Simplex::new(chain)?);
        }
    }
    let fine = SimplicialComplex::build(&top)?;
    let coords: Vec<Vec<f64>> = k.faces().iter().map(|f| g.barycenter(f)).collect();
    let fine_g = GeometricRealization::new(coords)?;
    // Faces of K are sorted by dimension, so the largest element of a chain
    // has the largest id.
    let carrier = fine.faces().iter().map(|s| *s.vertices().last().expect("nonempty")).collect();
    let map = SubdivisionMap { vertex_face: (0..k.num_faces()).collect(), carrier };
    Ok((fine, fine_g, map))
}

/// Largest face diameter.
pub fn mesh(k: &SimplicialComplex, g: &GeometricRealization) -> f64 {
    k.maximal_faces().iter().map(|s| g.diameter(s)).fold(0.0, f64::max)
}

/// The unique face whose relative interior contains `x`.
pub fn carrier_of_point(x: &[f64], k: &SimplicialComplex, g: &GeometricRealization) -> Result<Simplex> {
    if x.len() != g.ambient_dim() {
        return Err(Error::OutsideComplex(x.to_vec()));
    }
    for tau in k.maximal_faces() {
        let Some(t) = g.barycentric(tau, x) else { continue };
        if t.iter().any(|&w| w < -SUPPORT_TOL) {
            continue;
        }
        let support: Vec<usize> =
            tau.vertices().iter().zip(&t).filter(|(_, &w)| w > SUPPORT_TOL).map(|(&v, _)| v).collect();
        if support.is_empty() {
            continue;
        }
        return Simplex::new(support);
    }
    Err(Error::OutsideComplex(x.to_vec()))
}

/// Uniformly random maximal face, then a uniform point of that face.
pub fn sample_point<R: Rng>(k: &SimplicialComplex, g: &GeometricRealization, rng: &mut R) -> Vec<f64> {
    let tau = &k.maximal_faces()[rng.gen_range(0..k.maximal_faces().len())];
    let t = random_barycentric(tau.vertices().len(), rng);
    g.point_in(tau, &t)
}

/// Uniform sample of the standard simplex with `n` vertices.
pub fn random_barycentric<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut cuts: Vec<f64> = (0..n - 1).map(|_| rng.gen::<f64>()).collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2).map(|w| w[1] - w[0]).collect()
}

/// JSON exchange format `{"vertices": [[coords...]...], "maximal": [[ids...]...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexFile {
    pub vertices: Vec<Vec<f64>>,
    pub maximal: Vec<Vec<usize>>,
}

impl ComplexFile {
    pub fn from_parts(k: &SimplicialComplex, g: &GeometricRealization) -> Self {
        ComplexFile {
            vertices: g.all_coords().to_vec(),
            maximal: k.maximal_faces().iter().map(|s| s.vertices().to_vec()).collect(),
        }
    }

    pub fn into_parts(self) -> Result<(SimplicialComplex, GeometricRealization)> {
        let maximal = self.maximal.into_iter().map(Simplex::new).collect::<Result<Vec<_>>>()?;
        let k = SimplicialComplex::build(&maximal)?;
        let g = GeometricRealization::new(self.vertices)?;
        g.validate(&k)?;
        Ok((k, g))
    }
}

/// The segment `[a, b]` as a single edge.
pub fn interval(a: f64, b: f64) -> (SimplicialComplex, GeometricRealization) {
    let k = SimplicialComplex::build(&[Simplex(vec![0, 1])]).expect("edge");
    let g = GeometricRealization::new(vec![vec![a], vec![b]]).expect("finite coordinates");
    (k, g)
}

/// Regular `n`-gon inscribed in the unit circle, vertex `j` at angle `2πj/n`.
pub fn polygon(n: usize) -> Result<(SimplicialComplex, GeometricRealization)> {
    if n < 3 {
        return Err(Error::Size(format!("a triangulated circle needs 3 vertices, got {n}")));
    }
    let edges: Vec<Simplex> = (0..n).map(|j| Simplex::new(vec![j, (j + 1) % n])).collect::<Result<_>>()?;
    let k = SimplicialComplex::build(&edges)?;
    let coords = (0..n)
        .map(|j| {
            let t = std::f64::consts::TAU * j as f64 / n as f64;
            vec![t.cos(), t.sin()]
        })
        .collect();
    Ok((k, GeometricRealization::new(coords)?))
}

/// Standard `n`-simplex in ℝ^n (origin plus unit vectors).
pub fn standard_simplex(n: usize) -> (SimplicialComplex, GeometricRealization) {
    let k = SimplicialComplex::build(&[Simplex((0..=n).collect())]).expect("simplex");
    let coords = (0..=n)
        .map(|v| (0..n.max(1)).map(|i| if v == i + 1 { 1.0 } else { 0.0 }).collect())
        .collect();
    (k, GeometricRealization::new(coords).expect("finite coordinates"))
}
