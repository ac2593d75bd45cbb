//! Finite posets with their Alexandrov topology.
//!
//! The poset of a complex has one element per face with `y ≤ x` iff
//! `σ_y ⊇ σ_x`. Open sets are down-sets and `U_x = {y : y ≤ x}` is the
//! smallest open neighbourhood of `x`; for a face this is its open star.
//! Maximal points are the vertices.

use std::collections::{BTreeMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{
    barycentric_subdivide, carrier_of_point, sample_point, GeometricRealization, Simplex, SimplicialComplex,
    SubdivisionMap, SUPPORT_TOL,
};
use crate::error::{Error, Result};

/// Largest poset for which down-sets are enumerated.
pub const LATTICE_CAP: usize = 64;
/// Largest number of down-sets returned by [`open_set_lattice`].
pub const LATTICE_COUNT_CAP: usize = 1 << 22;

#[derive(Clone, Debug)]
pub struct Poset {
    /// `down[x]` = sorted `{y : y ≤ x}`.
    down: Vec<Vec<usize>>,
    /// `up[x]` = sorted `{z : x ≤ z}`.
    up: Vec<Vec<usize>>,
    faces: Option<Vec<Simplex>>,
}

impl Poset {
    /// Opposite face poset of `k`: element ids are face ids of `k`.
    pub fn from_complex(k: &SimplicialComplex) -> Self {
        let n = k.num_faces();
        let mut down = vec![Vec::new(); n];
        let mut up = vec![Vec::new(); n];
        for (y, face) in k.faces().iter().enumerate() {
            for sub in face.faces() {
                let x = k.face_index(&sub).expect("complex is closed");
                down[x].push(y);
                up[y].push(x);
            }
        }
        down.iter_mut().chain(up.iter_mut()).for_each(|v| v.sort_unstable());
        Poset { down, up, faces: Some(k.faces().to_vec()) }
    }

    /// Poset on `0..n` generated by `pairs` (`(y, x)` meaning `y ≤ x`), closed
    /// reflexively and transitively.
    pub fn from_relation(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(y, x) in pairs {
            if y >= n || x >= n {
                return Err(Error::Lookup(y.max(x)));
            }
            leq[y][x] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if leq[i][j] && leq[j][i] {
                    return Err(Error::Consistency(format!("{i} and {j} are mutually below each other")));
                }
            }
        }
        let down = (0..n).map(|x| (0..n).filter(|&y| leq[y][x]).collect()).collect();
        let up = (0..n).map(|x| (0..n).filter(|&z| leq[x][z]).collect()).collect();
        Ok(Poset { down, up, faces: None })
    }

    pub fn len(&self) -> usize {
        self.down.len()
    }

    pub fn is_empty(&self) -> bool {
        self.down.is_empty()
    }

    pub fn leq(&self, y: usize, x: usize) -> bool {
        self.down[x].binary_search(&y).is_ok()
    }

    pub fn face(&self, x: usize) -> Option<&Simplex> {
        self.faces.as_ref().map(|f| &f[x])
    }

    /// Dimension of the face behind `x`; zero for abstract posets.
    pub fn face_dim(&self, x: usize) -> usize {
        self.face(x).map_or(0, Simplex::dim)
    }

    /// Smallest open set containing `x`.
    pub fn basis_open(&self, x: usize) -> Result<&[usize]> {
        self.down.get(x).map(Vec::as_slice).ok_or(Error::Lookup(x))
    }

    pub fn up_set(&self, x: usize) -> Result<&[usize]> {
        self.up.get(x).map(Vec::as_slice).ok_or(Error::Lookup(x))
    }

    pub fn maximal_elements(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.up[x].len() == 1).collect()
    }

    pub fn minimal_elements(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.down[x].len() == 1).collect()
    }

    /// Hasse diagram: pairs `(a, b)` with `a < b` and nothing strictly between.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for b in 0..self.len() {
            for &a in &self.down[b] {
                if a == b {
                    continue;
                }
                let between = self.down[b].iter().any(|&c| c != a && c != b && self.leq(a, c));
                if !between {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Reflexivity, antisymmetry and transitivity of the stored relation.
    pub fn verify_partial_order(&self) -> Result<()> {
        for x in 0..self.len() {
            if !self.leq(x, x) {
                return Err(Error::Consistency(format!("{x} ≰ {x}")));
            }
            for &y in &self.down[x] {
                if y != x && self.leq(x, y) {
                    return Err(Error::Consistency(format!("{x} and {y} are not antisymmetric")));
                }
                if let Some(&z) = self.down[y].iter().find(|&&z| !self.leq(z, x)) {
                    return Err(Error::Consistency(format!("{z} ≤ {y} ≤ {x} but {z} ≰ {x}")));
                }
            }
        }
        Ok(())
    }

    /// `true` when the set encoded by `mask` is a down-set.
    pub fn is_down_set(&self, mask: u64) -> bool {
        (0..self.len()).filter(|x| mask & (1 << x) != 0).all(|x| self.down[x].iter().all(|y| mask & (1 << y) != 0))
    }

    pub fn to_file(&self) -> PosetFile {
        PosetFile {
            elements: (0..self.len()).collect(),
            covers: self.covers().into_iter().map(|(a, b)| [a, b]).collect(),
            faces: self
                .faces
                .as_ref()
                .map(|f| f.iter().enumerate().map(|(i, s)| (i.to_string(), s.vertices().to_vec())).collect())
                .unwrap_or_default(),
        }
    }
}

/// Hasse-diagram export. A cover `[a, b]` means `a < b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosetFile {
    pub elements: Vec<usize>,
    pub covers: Vec<[usize; 2]>,
    pub faces: BTreeMap<String, Vec<usize>>,
}

/// Every down-set of `p`, each as a bitmask over element ids.
pub fn open_set_lattice(p: &Poset) -> Result<Vec<u64>> {
    if p.len() > LATTICE_CAP {
        return Err(Error::Capacity(format!("{} elements exceed the lattice cap of {LATTICE_CAP}", p.len())));
    }
    // Deciding elements in a linear extension means every element's strict
    // down-set is settled before the element itself.
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by_key(|&x| (p.down[x].len(), x));
    let below: Vec<u64> = (0..p.len())
        .map(|x| p.down[x].iter().filter(|&&y| y != x).fold(0u64, |m, &y| m | (1 << y)))
        .collect();

    let mut out = Vec::new();
    let mut stack = vec![(0usize, 0u64)];
    while let Some((depth, mask)) = stack.pop() {
        if depth == order.len() {
            out.push(mask);
            if out.len() > LATTICE_COUNT_CAP {
                return Err(Error::Capacity(format!("more than {LATTICE_COUNT_CAP} open sets")));
            }
            continue;
        }
        let x = order[depth];
        stack.push((depth + 1, mask));
        if mask & below[x] == below[x] {
            stack.push((depth + 1, mask | (1 << x)));
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// `true` when `family` is closed under pairwise union and intersection.
pub fn closed_under_union_and_intersection(family: &[u64]) -> bool {
    let set: HashSet<u64> = family.iter().copied().collect();
    family
        .iter()
        .all(|&a| family.iter().all(|&b| set.contains(&(a | b)) && set.contains(&(a & b))))
}

/// Order-preserving map between posets, stored as element images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosetMap {
    image: Vec<usize>,
    target_len: usize,
}

impl PosetMap {
    pub fn new(image: Vec<usize>, target_len: usize) -> Result<Self> {
        if let Some(&bad) = image.iter().find(|&&t| t >= target_len) {
            return Err(Error::Lookup(bad));
        }
        Ok(PosetMap { image, target_len })
    }

    pub fn identity(n: usize) -> Self {
        PosetMap { image: (0..n).collect(), target_len: n }
    }

    pub fn apply(&self, x: usize) -> usize {
        self.image[x]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn source_len(&self) -> usize {
        self.image.len()
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    /// `self ∘ inner`: first `inner`, then `self`.
    pub fn compose(&self, inner: &PosetMap) -> PosetMap {
        assert_eq!(inner.target_len, self.image.len());
        PosetMap { image: inner.image.iter().map(|&y| self.image[y]).collect(), target_len: self.target_len }
    }

    pub fn is_monotone(&self, source: &Poset, target: &Poset) -> bool {
        (0..source.len()).all(|x| source.down[x].iter().all(|&y| target.leq(self.image[y], self.image[x])))
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.target_len];
        self.image.iter().for_each(|&t| hit[t] = true);
        hit.into_iter().all(|h| h)
    }
}

/// The map `X′ → X` sending each fine face to its carrier.
pub fn induced_poset_map(s: &SubdivisionMap, fine: &Poset, coarse: &Poset) -> Result<PosetMap> {
    let map = PosetMap::new(s.carriers().to_vec(), coarse.len())?;
    if map.source_len() != fine.len() {
        return Err(Error::Consistency("subdivision map does not match the fine poset".into()));
    }
    if !map.is_monotone(fine, coarse) {
        return Err(Error::Consistency("carrier map is not order preserving".into()));
    }
    Ok(map)
}

/// Face count of the barycentric subdivision of `k`: one face per chain of
/// faces, counted by the chain's largest element.
pub fn subdivided_face_count(k: &SimplicialComplex) -> usize {
    // chains[d]: chains of faces of a d-simplex ending in the whole simplex
    let mut chains: Vec<usize> = Vec::new();
    for d in 0..=k.dim() {
        let mut c = 1usize;
        for (j, &cj) in chains.iter().enumerate() {
            c = c.saturating_add(binomial(d + 1, j + 1).saturating_mul(cj));
        }
        chains.push(c);
    }
    k.faces().iter().fold(0usize, |acc, f| acc.saturating_add(chains[f.dim()]))
}

fn binomial(n: usize, r: usize) -> usize {
    (0..r).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Finite truncation of the refinement tower `X_0 ← X_1 ← ⋯ ← X_N`.
#[derive(Clone, Debug)]
pub struct InverseSystem {
    complexes: Vec<SimplicialComplex>,
    realizations: Vec<GeometricRealization>,
    levels: Vec<Poset>,
    subdivisions: Vec<SubdivisionMap>,
    /// `maps[n]` is `φ_{n,n+1} : X_{n+1} → X_n`.
    maps: Vec<PosetMap>,
}

impl InverseSystem {
    /// Repeated barycentric subdivision, stopping with an error once a level
    /// would hold more than `max_faces` faces.
    pub fn refine(k: SimplicialComplex, g: GeometricRealization, levels: usize, max_faces: usize) -> Result<Self> {
        g.validate(&k)?;
        let mut sys = InverseSystem {
            levels: vec![Poset::from_complex(&k)],
            complexes: vec![k],
            realizations: vec![g],
            subdivisions: Vec::new(),
            maps: Vec::new(),
        };
        for _ in 0..levels {
            let (k, g) = (sys.complexes.last().unwrap(), sys.realizations.last().unwrap());
            let expected = subdivided_face_count(k);
            if expected > max_faces {
                return Err(Error::Capacity(format!("refinement would hold {expected} faces, cap is {max_faces}")));
            }
            let (k1, g1, s) = barycentric_subdivide(k, g)?;
            if k1.num_faces() > max_faces {
                return Err(Error::Capacity(format!("{} faces exceed {max_faces}", k1.num_faces())));
            }
            let p1 = Poset::from_complex(&k1);
            let phi = induced_poset_map(&s, &p1, sys.levels.last().unwrap())?;
            sys.complexes.push(k1);
            sys.realizations.push(g1);
            sys.levels.push(p1);
            sys.subdivisions.push(s);
            sys.maps.push(phi);
        }
        Ok(sys)
    }

    /// Index of the finest level.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn complex(&self, n: usize) -> &SimplicialComplex {
        &self.complexes[n]
    }

    pub fn realization(&self, n: usize) -> &GeometricRealization {
        &self.realizations[n]
    }

    pub fn poset(&self, n: usize) -> &Poset {
        &self.levels[n]
    }

    pub fn subdivision(&self, n: usize) -> &SubdivisionMap {
        &self.subdivisions[n]
    }

    /// `φ_{n,n+1}`.
    pub fn step(&self, n: usize) -> &PosetMap {
        &self.maps[n]
    }

    /// `φ_{l,n} : X_n → X_l` for `l ≤ n`, the identity when `l = n`.
    pub fn map_between(&self, l: usize, n: usize) -> PosetMap {
        assert!(l <= n && n <= self.depth());
        let mut acc = PosetMap::identity(self.levels[n].len());
        for m in (l..n).rev() {
            acc = self.maps[m].compose(&acc);
        }
        acc
    }

    /// Number of fine elements whose composed image disagrees with the
    /// geometric carrier of the fine face's barycenter, over every pair of
    /// levels `l ≤ n ≤ max_level`.
    pub fn coherence_violations(&self, max_level: usize) -> usize {
        let mut bad = 0;
        for n in 0..=max_level.min(self.depth()) {
            for l in 0..=n {
                let composed = self.map_between(l, n);
                for y in 0..self.levels[n].len() {
                    let b = self.realizations[n].barycenter(self.complexes[n].face(y));
                    let geometric = carrier_of_point(&b, &self.complexes[l], &self.realizations[l])
                        .ok()
                        .and_then(|s| self.complexes[l].face_index(&s));
                    if geometric != Some(composed.apply(y)) {
                        bad += 1;
                    }
                }
                for m in l..=n {
                    let split = self.map_between(l, m).compose(&self.map_between(m, n));
                    bad += composed.image().iter().zip(split.image()).filter(|(a, b)| a != b).count();
                }
            }
        }
        bad
    }

    /// `p_n(x)`: the element of `X_n` whose face carries `x`.
    pub fn project_point(&self, x: &[f64], n: usize) -> Result<usize> {
        if n > self.depth() {
            return Err(Error::Lookup(n));
        }
        let face = carrier_of_point(x, &self.complexes[n], &self.realizations[n])?;
        Ok(self.complexes[n].face_index(&face).expect("carrier is a face"))
    }

    /// `true` when `x` lies in the open star of face `f` at level `n`.
    pub fn in_open_star(&self, x: &[f64], n: usize, f: usize) -> bool {
        let (k, g) = (&self.complexes[n], &self.realizations[n]);
        let sigma = k.face(f);
        k.maximal_faces().iter().filter(|tau| tau.contains(sigma)).any(|tau| {
            g.barycentric(tau, x).is_some_and(|t| {
                t.iter().all(|&w| w >= -SUPPORT_TOL)
                    && tau.vertices().iter().zip(&t).all(|(v, &w)| !sigma.vertices().contains(v) || w > SUPPORT_TOL)
            })
        })
    }

    /// Points used by the star identity check: every vertex, every face
    /// barycenter and `random` seeded uniform samples of `|K_n|`.
    pub fn probe_points(&self, n: usize, random: usize, seed: u64) -> Vec<Vec<f64>> {
        let (k, g) = (&self.complexes[n], &self.realizations[n]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts: Vec<Vec<f64>> = k.faces().iter().map(|s| g.barycenter(s)).collect();
        pts.extend((0..random).map(|_| sample_point(k, g, &mut rng)));
        pts
    }

    /// Checks `p_n^{-1}(U_x) = st(σ_x)` on probe points.
    pub fn star_identity_check(&self, n: usize, x: usize) -> Result<bool> {
        self.star_identity_with(n, x, |p| self.project_point(p, n))
    }

    /// Star identity with a caller-supplied projection `p_n`.
    pub fn star_identity_with<F>(&self, n: usize, x: usize, project: F) -> Result<bool>
    where
        F: Fn(&[f64]) -> Result<usize>,
    {
        let p = self.poset(n);
        p.basis_open(x)?;
        for pt in self.probe_points(n, 1000, 0x5eed ^ (n as u64) << 32 ^ x as u64) {
            let lhs = p.leq(project(&pt)?, x);
            if lhs != self.in_open_star(&pt, n, x) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
