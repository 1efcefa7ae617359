//! Seeded generators for the property suites: based complexes with a known
//! splitting, contractions, commuting self-equivalences with explicit
//! homotopies, and degree -1 derivations of Sullivan algebras.
//!
//! Every complex is a basis change of a direct sum of pieces `R --x--> R` and
//! `R`. The raw splitting gives contractions (for unit `x`) and chain
//! automorphisms that scale each piece by a unit; these automorphisms commute
//! with each other, and perturbing them by `[d, s]` keeps explicit
//! homotopies available for every identity the checks need.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::chains::{BasedComplex, ChainHomotopy, ChainMap, Contraction, EquivalencePack, GradedMap, Shape};
use crate::error::{Error, Result};
use crate::groupring::{GroupElement, GroupSpec, RingElement, RingMatrix};
use crate::sullivan::{Cdga, Derivation, GradedPoly};
use crate::torsion::K1Class;

pub fn random_group_element(spec: &GroupSpec, rng: &mut impl Rng) -> GroupElement {
    GroupElement {
        free: (0..spec.free_rank).map(|_| rng.gen_range(-1..=1)).collect(),
        torsion: spec.torsion.iter().map(|&n| rng.gen_range(0..n)).collect(),
    }
}

pub fn random_trivial_unit(spec: &Arc<GroupSpec>, rng: &mut impl Rng) -> RingElement {
    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
    RingElement::monomial(spec, random_group_element(spec, rng), BigInt::from(sign))
}

/// Nontrivial units embedded from the cyclic factors of orders 5 and 8.
pub fn unit_pool(spec: &Arc<GroupSpec>) -> Vec<RingElement> {
    let mut pool = vec![];
    for (slot, &n) in spec.torsion.iter().enumerate() {
        let pairs: &[(u64, i64)] = match n {
            5 => &[(0, -1), (1, 1), (4, 1)],
            8 => &[(0, -2), (1, -1), (3, 1), (4, 1), (5, 1), (7, -1)],
            _ => &[],
        };
        if pairs.is_empty() {
            continue;
        }
        let terms = pairs.iter().map(|&(e, c)| {
            let mut torsion = vec![0; spec.torsion.len()];
            torsion[slot] = e;
            (GroupElement { free: vec![0; spec.free_rank], torsion }, BigInt::from(c))
        });
        pool.push(RingElement::from_terms(spec, terms));
    }
    pool
}

/// A trivial unit, possibly times a nontrivial unit from the pool.
pub fn random_unit(spec: &Arc<GroupSpec>, rng: &mut impl Rng) -> RingElement {
    let trivial = random_trivial_unit(spec, rng);
    let pool = unit_pool(spec);
    if pool.is_empty() || rng.gen_bool(0.5) {
        return trivial;
    }
    let mut u = pool.choose(rng).expect("nonempty").clone();
    if rng.gen_bool(0.3) {
        u = &u * &u;
    }
    &trivial * &u
}

/// At most `support` terms with coefficients in `[-2, 2]`; may be zero.
pub fn random_element(spec: &Arc<GroupSpec>, rng: &mut impl Rng, support: usize) -> RingElement {
    let n = rng.gen_range(0..=support);
    let terms: Vec<(GroupElement, BigInt)> =
        (0..n).map(|_| (random_group_element(spec, rng), BigInt::from(rng.gen_range(-2..=2)))).collect();
    RingElement::from_terms(spec, terms)
}

pub fn random_matrix(spec: &Arc<GroupSpec>, rows: usize, cols: usize, density: f64, rng: &mut impl Rng) -> RingMatrix {
    let mut m = RingMatrix::zeros(spec, rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            if rng.gen_bool(density) {
                m.set(r, c, random_element(spec, rng, 2));
            }
        }
    }
    m
}

/// An invertible matrix with its inverse: a permutation, trivial units on
/// the diagonal and a few elementary transvections.
pub fn random_automorphism(spec: &Arc<GroupSpec>, n: usize, rng: &mut impl Rng) -> (RingMatrix, RingMatrix) {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut a = RingMatrix::zeros(spec, n, n);
    let mut a_inv = RingMatrix::zeros(spec, n, n);
    for (i, &p) in perm.iter().enumerate() {
        let u = random_trivial_unit(spec, rng);
        let inv = K1Class::new(u.clone()).expect("trivial unit").inverse_det().clone();
        a.set(p, i, u);
        a_inv.set(i, p, inv);
    }
    if n >= 2 {
        for _ in 0..rng.gen_range(0..=n) {
            let i = rng.gen_range(0..n);
            let j = (i + rng.gen_range(1..n)) % n;
            let x = random_element(spec, rng, 2);
            let mut e = RingMatrix::identity(spec, n);
            e.set(i, j, x.clone());
            let mut e_inv = RingMatrix::identity(spec, n);
            e_inv.set(i, j, -&x);
            a = &e * &a;
            a_inv = &a_inv * &e_inv;
        }
    }
    (a, a_inv)
}

#[derive(Clone, Copy, Debug)]
pub struct ComplexOptions {
    pub max_rank: usize,
    pub max_len: usize,
    pub acyclic: bool,
}

#[derive(Clone, Debug)]
struct Piece {
    /// Degree of the upper module; the only module when `lower` is `None`.
    top: i64,
    top_pos: usize,
    /// Position of the lower module and the differential entry.
    lower: Option<(usize, RingElement)>,
}

/// A based complex together with the splitting it was built from.
#[derive(Clone, Debug)]
pub struct RandomComplex {
    pub complex: BasedComplex,
    pieces: Vec<Piece>,
    basis: BTreeMap<i64, (RingMatrix, RingMatrix)>,
}

impl RandomComplex {
    pub fn generate(spec: &Arc<GroupSpec>, opts: ComplexOptions, rng: &mut impl Rng) -> Result<Self> {
        let min_len = if opts.acyclic { 2 } else { 1 };
        if opts.max_len < min_len || opts.max_rank == 0 {
            return Err(Error::Spec("options leave no room for a complex".into()));
        }
        let lo = rng.gen_range(-1..=1);
        let len = rng.gen_range(min_len..=opts.max_len) as i64;
        let hi = lo + len - 1;
        let mut ranks: BTreeMap<i64, usize> = (lo..=hi).map(|k| (k, 0)).collect();
        let mut pieces = vec![];
        for _ in 0..rng.gen_range(1..=opts.max_rank * len as usize) {
            let elementary = opts.acyclic || rng.gen_bool(0.6);
            if elementary {
                let top = rng.gen_range(lo + 1..=hi.max(lo + 1));
                if top > hi || ranks[&top] >= opts.max_rank || ranks[&(top - 1)] >= opts.max_rank {
                    continue;
                }
                let x = if opts.acyclic || rng.gen_bool(0.5) {
                    random_unit(spec, rng)
                } else {
                    random_element(spec, rng, 3)
                };
                let top_pos = ranks[&top];
                let low_pos = ranks[&(top - 1)];
                *ranks.get_mut(&top).unwrap() += 1;
                *ranks.get_mut(&(top - 1)).unwrap() += 1;
                pieces.push(Piece { top, top_pos, lower: Some((low_pos, x)) });
            } else {
                let k = rng.gen_range(lo..=hi);
                if ranks[&k] >= opts.max_rank {
                    continue;
                }
                pieces.push(Piece { top: k, top_pos: ranks[&k], lower: None });
                *ranks.get_mut(&k).unwrap() += 1;
            }
        }
        if pieces.is_empty() {
            let top = lo + 1;
            let x = random_unit(spec, rng);
            if top <= hi {
                *ranks.get_mut(&top).unwrap() += 1;
                *ranks.get_mut(&lo).unwrap() += 1;
                pieces.push(Piece { top, top_pos: 0, lower: Some((0, x)) });
            } else {
                *ranks.get_mut(&lo).unwrap() += 1;
                pieces.push(Piece { top: lo, top_pos: 0, lower: None });
            }
        }
        let shape = Shape::new(lo, (lo..=hi).map(|k| ranks[&k]).collect());
        let basis: BTreeMap<i64, (RingMatrix, RingMatrix)> =
            (lo - 1..=hi + 1).map(|k| (k, random_automorphism(spec, shape.rank(k), rng))).collect();
        let raw = GradedMap::from_fn(spec, -1, &shape, &shape, |k| {
            let mut m = RingMatrix::zeros(spec, shape.rank(k - 1), shape.rank(k));
            for p in pieces.iter().filter(|p| p.top == k) {
                if let Some((low, x)) = &p.lower {
                    m.set(*low, p.top_pos, x.clone());
                }
            }
            Ok(m)
        })?;
        let mut rc = RandomComplex { complex: BasedComplex::zero(spec), pieces, basis };
        let diffs = shape.degrees().map(|k| rc.transport(&raw, k)).collect();
        rc.complex = BasedComplex::new(spec, shape, diffs)?;
        Ok(rc)
    }

    /// `A_{k+p} m_k A_k^-1` for a raw map `m` of degree `p`.
    fn transport(&self, raw: &GradedMap, k: i64) -> RingMatrix {
        let p = raw.degree;
        let (a_out, _) = &self.basis[&(k + p)];
        let (_, a_in_inv) = &self.basis[&k];
        &(a_out * &raw.at(k)) * a_in_inv
    }

    fn transported(&self, raw: &GradedMap) -> Result<GradedMap> {
        let spec = self.complex.spec();
        let shape = self.complex.shape();
        GradedMap::from_fn(spec, raw.degree, shape, shape, |k| Ok(self.transport(raw, k)))
    }

    fn spec(&self) -> &Arc<GroupSpec> {
        self.complex.spec()
    }

    /// Every piece is `R --x--> R` with `x` a unit.
    pub fn is_acyclic(&self) -> bool {
        self.pieces.iter().all(|p| p.lower.as_ref().is_some_and(|(_, x)| K1Class::new(x.clone()).is_ok()))
    }

    /// The contraction inverting each elementary piece, if all pieces are
    /// elementary with unit differential.
    pub fn contraction(&self) -> Result<Contraction> {
        if !self.is_acyclic() {
            return Err(Error::NotAcyclic("complex has a one-module piece or a non-unit differential".into()));
        }
        let spec = self.spec().clone();
        let shape = self.complex.shape().clone();
        let raw = GradedMap::from_fn(&spec, 1, &shape, &shape, |k| {
            let mut m = RingMatrix::zeros(&spec, shape.rank(k + 1), shape.rank(k));
            for p in self.pieces.iter().filter(|p| p.top == k + 1) {
                let (low, x) = p.lower.as_ref().expect("elementary");
                let inv = K1Class::new(x.clone())?.inverse_det().clone();
                m.set(p.top_pos, *low, inv);
            }
            Ok(m)
        })?;
        Contraction::new(self.complex.clone(), self.transported(&raw)?)
    }

    /// Scales each piece by a random unit; returns the map and its inverse.
    pub fn piece_automorphism(&self, rng: &mut impl Rng) -> Result<(GradedMap, GradedMap)> {
        let spec = self.spec().clone();
        let shape = self.complex.shape().clone();
        let mut units = vec![];
        for _ in &self.pieces {
            let u = random_unit(&spec, rng);
            let inv = K1Class::new(u.clone())?.inverse_det().clone();
            units.push((u, inv));
        }
        let raw = |inverse: bool| {
            GradedMap::from_fn(&spec, 0, &shape, &shape, |k| {
                let mut m = RingMatrix::zeros(&spec, shape.rank(k), shape.rank(k));
                for (p, (u, inv)) in self.pieces.iter().zip(&units) {
                    let v = if inverse { inv } else { u };
                    if p.top == k {
                        m.set(p.top_pos, p.top_pos, v.clone());
                    }
                    if let Some((low, _)) = &p.lower {
                        if p.top - 1 == k {
                            m.set(*low, *low, v.clone());
                        }
                    }
                }
                Ok(m)
            })
        };
        Ok((self.transported(&raw(false)?)?, self.transported(&raw(true)?)?))
    }

    /// A sparse random map of the given degree.
    pub fn random_map(&self, degree: i64, density: f64, rng: &mut impl Rng) -> Result<GradedMap> {
        let spec = self.spec().clone();
        let c = &self.complex;
        GradedMap::from_fn(&spec, degree, c.shape(), c.shape(), |k| {
            Ok(random_matrix(&spec, c.rank(k + degree), c.rank(k), density, rng))
        })
    }
}

/// `[d, s]` for a map of any degree.
fn bracket_d(c: &BasedComplex, s: &GradedMap) -> Result<GradedMap> {
    crate::chains::commutator_with_d(s, c, c)
}

/// `delta d delta + [d, phi]` for a random degree 2 map `phi`; again a
/// contraction whenever `delta` is. `phi` is resampled until the result
/// differs from `delta`, which fails only when the contraction is unique
/// (for instance on complexes spanning two degrees, where `delta = d^-1`).
pub fn second_contraction(delta: &Contraction, rc: &RandomComplex, rng: &mut impl Rng) -> Result<Contraction> {
    let c = &delta.complex;
    let d = c.d();
    let ddd = delta.delta.compose(&d)?.compose(&delta.delta)?;
    let mut candidate = ddd.clone();
    for _ in 0..16 {
        let phi = rc.random_map(2, 0.4, rng)?;
        candidate = ddd.add(&bracket_d(c, &phi)?)?;
        if candidate != delta.delta {
            break;
        }
    }
    Contraction::new(c.clone(), candidate)
}

/// A self-equivalence `D + [d, s]` with `D` a piece automorphism, together
/// with `D`, `D^-1` and `s`.
pub struct Perturbed {
    pub pack: EquivalencePack,
    pub base: GradedMap,
    pub base_inv: GradedMap,
    pub s: GradedMap,
}

pub fn perturbed_equivalence(rc: &RandomComplex, rng: &mut impl Rng) -> Result<Perturbed> {
    let c = &rc.complex;
    let (base, base_inv) = rc.piece_automorphism(rng)?;
    let s = if rng.gen_bool(0.7) { rc.random_map(1, 0.3, rng)? } else { c.zero_map(1) };
    let f = base.add(&bracket_d(c, &s)?)?;
    // f D^-1 = id + [d, s D^-1] and D^-1 f = id + [d, D^-1 s]
    let h = s.compose(&base_inv)?;
    let k = base_inv.compose(&s)?;
    let pack = EquivalencePack::new(
        ChainMap::new(c.clone(), c.clone(), f)?,
        ChainMap::new(c.clone(), c.clone(), base_inv.clone())?,
        ChainHomotopy { map: h },
        ChainHomotopy { map: k },
    )?;
    Ok(Perturbed { pack, base, base_inv, s })
}

/// Two commuting self-equivalences `f`, `g` with `comm` satisfying
/// `d comm + comm d = g f - f g`.
pub struct CommutingPair {
    pub f: EquivalencePack,
    pub g: EquivalencePack,
    pub comm: ChainHomotopy,
}

/// With `f = D + [d, s]`, `g = E + [d, r]` and commuting chain maps `D`, `E`:
/// `gf - fg = [d, E s - s E + r D - D r + r [d, s] - s [d, r]]`.
pub fn commuting_pair(rc: &RandomComplex, rng: &mut impl Rng) -> Result<CommutingPair> {
    let c = &rc.complex;
    let p = perturbed_equivalence(rc, rng)?;
    let q = perturbed_equivalence(rc, rng)?;
    let (d_map, s) = (&p.base, &p.s);
    let (e_map, r) = (&q.base, &q.s);
    let comm = e_map
        .compose(s)?
        .sub(&s.compose(e_map)?)?
        .add(&r.compose(d_map)?)?
        .sub(&d_map.compose(r)?)?
        .add(&r.compose(&bracket_d(c, s)?)?)?
        .sub(&s.compose(&bracket_d(c, r)?)?)?;
    let comm = ChainHomotopy { map: comm };
    comm.validate(c, c, &q.pack.f.map.compose(&p.pack.f.map)?, &p.pack.f.map.compose(&q.pack.f.map)?)?;
    Ok(CommutingPair { f: p.pack, g: q.pack, comm })
}

fn random_rational(rng: &mut impl Rng) -> BigRational {
    let num = rng.gen_range(-3..=3);
    let den = rng.gen_range(1..=2);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A random degree -1 derivation; with `u_star` it kills degree-1
/// generators.
pub fn random_derivation(m: &Cdga, u_star: bool, rng: &mut impl Rng) -> Derivation {
    let images = m
        .generators()
        .iter()
        .map(|g| {
            if u_star && g.degree == 1 {
                return GradedPoly::zero();
            }
            let basis = m.monomials_of_degree(g.degree - 1);
            let mut p = GradedPoly::zero();
            for mono in basis {
                if rng.gen_bool(0.6) {
                    let mut term = m.one();
                    for (i, &e) in mono.iter().enumerate() {
                        for _ in 0..e {
                            term = m.mul(&term, &m.generator(i));
                        }
                    }
                    p = p.add(&term.scale(&random_rational(rng)));
                }
            }
            p
        })
        .collect();
    Derivation::new(m, -1, images).expect("degrees match by construction")
}
