//! Derivation calculus on free graded-commutative algebras over `Q`:
//! brackets `[i, d]`, nilpotency, exponentials, homotopies through
//! `Q(t, dt)` and the Block-Lazarev recovery of a derivation from a homotopy.
//!
//! Elements of `M (x) Q(t, dt)` are written `A + dt B` with `A, B` in `M[t]`
//! and `dt` on the left, so that
//! `d(A + dt B) = d_M A + dt (d/dt A - d_M B)`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

/// Exponent of each generator, in generator order; odd generators have
/// exponent at most one.
pub type Monomial = Vec<u32>;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GradedPoly {
    terms: BTreeMap<Monomial, Q>,
}

impl GradedPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Q> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &GradedPoly) -> GradedPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &GradedPoly) -> GradedPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> GradedPoly {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, c: &Q) -> GradedPoly {
        if c.is_zero() {
            return GradedPoly::zero();
        }
        GradedPoly { terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    /// Coefficient of the empty monomial.
    pub fn constant_term(&self) -> Q {
        self.terms.iter().find(|(m, _)| m.iter().all(|&e| e == 0)).map_or_else(Q::zero, |(_, c)| c.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub degree: u32,
}

/// A free graded-commutative algebra with a differential given on
/// generators. Structural consistency (degrees) is checked on construction;
/// `d^2 = 0` and minimality are reported by [`check_cdga`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cdga {
    generators: Vec<Generator>,
    d: Vec<GradedPoly>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CdgaCheck {
    pub valid: bool,
    pub d_squared_zero: bool,
    pub minimal: bool,
    pub failure: Option<String>,
}

impl Cdga {
    pub fn new(generators: Vec<Generator>, d: Vec<GradedPoly>) -> Result<Self> {
        if generators.len() != d.len() {
            return Err(Error::Spec(format!("{} generators but {} differentials", generators.len(), d.len())));
        }
        for (i, g) in generators.iter().enumerate() {
            if g.degree == 0 {
                return Err(Error::Spec(format!("generator {} has degree 0", g.name)));
            }
            if generators[..i].iter().any(|h| h.name == g.name) {
                return Err(Error::Spec(format!("duplicate generator name {}", g.name)));
            }
        }
        let m = Cdga { generators, d: vec![] };
        for (g, p) in m.generators.iter().zip(&d) {
            m.check_poly(p)?;
            if !m.is_homogeneous(p, g.degree as i64 + 1) {
                return Err(Error::Spec(format!("d({}) is not homogeneous of degree {}", g.name, g.degree + 1)));
            }
        }
        Ok(Cdga { d, ..m })
    }

    /// Builds a model from `(name, degree, d)` triples, `d` written as
    /// `(coefficient, factor names)` terms.
    pub fn from_spec(gens: &[(&str, u32)], d: &[Vec<(i64, Vec<&str>)>]) -> Result<Self> {
        let generators: Vec<Generator> =
            gens.iter().map(|&(n, deg)| Generator { name: n.to_string(), degree: deg }).collect();
        let bare = Cdga { generators: generators.clone(), d: vec![GradedPoly::zero(); generators.len()] };
        let d = d
            .iter()
            .map(|terms| {
                let t: Vec<(Q, Vec<String>)> = terms
                    .iter()
                    .map(|(c, f)| (Q::from_integer(BigInt::from(*c)), f.iter().map(|s| s.to_string()).collect()))
                    .collect();
                bare.poly(&t)
            })
            .collect::<Result<Vec<_>>>()?;
        Cdga::new(generators, d)
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn d_of(&self, i: usize) -> &GradedPoly {
        &self.d[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| Error::Spec(format!("unknown generator {name}")))
    }

    fn is_odd(&self, i: usize) -> bool {
        self.generators[i].degree % 2 == 1
    }

    pub fn degree(&self, m: &[u32]) -> i64 {
        m.iter().zip(&self.generators).map(|(&e, g)| e as i64 * g.degree as i64).sum()
    }

    fn check_poly(&self, p: &GradedPoly) -> Result<()> {
        for m in p.terms.keys() {
            if m.len() != self.len() {
                return Err(Error::Spec("monomial length differs from the generator count".into()));
            }
            if let Some(i) = (0..self.len()).find(|&i| self.is_odd(i) && m[i] > 1) {
                return Err(Error::Spec(format!("odd generator {} squared", self.generators[i].name)));
            }
        }
        Ok(())
    }

    pub fn is_homogeneous(&self, p: &GradedPoly, degree: i64) -> bool {
        p.terms.keys().all(|m| self.degree(m) == degree)
    }

    pub fn one(&self) -> GradedPoly {
        self.constant(Q::one())
    }

    pub fn constant(&self, c: Q) -> GradedPoly {
        let mut p = GradedPoly::zero();
        p.add_term(vec![0; self.len()], c);
        p
    }

    pub fn generator(&self, i: usize) -> GradedPoly {
        let mut m = vec![0; self.len()];
        m[i] = 1;
        let mut p = GradedPoly::zero();
        p.add_term(m, Q::one());
        p
    }

    /// Parses `(coefficient, ordered factor names)` terms; the Koszul sign of
    /// reordering the factors is applied.
    pub fn poly(&self, terms: &[(Q, Vec<String>)]) -> Result<GradedPoly> {
        let mut out = GradedPoly::zero();
        for (c, factors) in terms {
            let mut acc = self.constant(c.clone());
            for f in factors {
                acc = self.mul(&acc, &self.generator(self.index_of(f)?));
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    /// Inverse of [`Cdga::poly`]: factors listed in generator order.
    pub fn poly_terms(&self, p: &GradedPoly) -> Vec<(Q, Vec<String>)> {
        p.terms
            .iter()
            .map(|(m, c)| {
                let names = m
                    .iter()
                    .enumerate()
                    .flat_map(|(i, &e)| std::iter::repeat_n(self.generators[i].name.clone(), e as usize))
                    .collect();
                (c.clone(), names)
            })
            .collect()
    }

    /// Sign and normal form of `a b`, or `None` when an odd generator repeats.
    fn mono_mul(&self, a: &[u32], b: &[u32]) -> Option<(bool, Monomial)> {
        let mut negative = false;
        for j in (0..self.len()).filter(|&j| self.is_odd(j) && b[j] == 1) {
            if a[j] == 1 {
                return None;
            }
            let passed = (j + 1..self.len()).filter(|&i| self.is_odd(i) && a[i] == 1).count();
            negative ^= passed % 2 == 1;
        }
        Some((negative, a.iter().zip(b).map(|(x, y)| x + y).collect()))
    }

    pub fn mul(&self, p: &GradedPoly, q: &GradedPoly) -> GradedPoly {
        let mut out = GradedPoly::zero();
        for (a, ca) in &p.terms {
            for (b, cb) in &q.terms {
                if let Some((negative, m)) = self.mono_mul(a, b) {
                    let c = ca * cb;
                    out.add_term(m, if negative { -c } else { c });
                }
            }
        }
        out
    }

    /// The factors of a monomial in normal order, with repetition.
    fn factors(&self, m: &[u32]) -> Vec<usize> {
        m.iter().enumerate().flat_map(|(i, &e)| std::iter::repeat_n(i, e as usize)).collect()
    }

    fn mono_of(&self, factors: &[usize]) -> GradedPoly {
        let mut m = vec![0; self.len()];
        for &f in factors {
            m[f] += 1;
        }
        let mut p = GradedPoly::zero();
        p.add_term(m, Q::one());
        p
    }

    /// Monomials of total degree `deg`.
    pub fn monomials_of_degree(&self, deg: u32) -> Vec<Monomial> {
        fn go(m: &Cdga, i: usize, left: u32, cur: &mut Monomial, out: &mut Vec<Monomial>) {
            if i == m.len() {
                if left == 0 {
                    out.push(cur.clone());
                }
                return;
            }
            let d = m.generators[i].degree;
            let max = if m.is_odd(i) { 1.min(left / d) } else { left / d };
            for e in 0..=max {
                cur[i] = e;
                go(m, i + 1, left - e * d, cur, out);
            }
            cur[i] = 0;
        }
        let mut out = vec![];
        go(self, 0, deg, &mut vec![0; self.len()], &mut out);
        out
    }

    fn max_dimension(&self) -> usize {
        self.generators.iter().map(|g| self.monomials_of_degree(g.degree).len()).max().unwrap_or(0)
    }

    fn apply_morphism(&self, images: &[GradedPoly], p: &GradedPoly) -> GradedPoly {
        let mut out = GradedPoly::zero();
        for (m, c) in &p.terms {
            let mut acc = self.constant(c.clone());
            for f in self.factors(m) {
                acc = self.mul(&acc, &images[f]);
            }
            out = out.add(&acc);
        }
        out
    }

    pub fn differential(&self) -> Derivation {
        Derivation { degree: 1, images: self.d.clone() }
    }
}

pub fn check_cdga(m: &Cdga) -> CdgaCheck {
    let d = m.differential();
    let mut failure = None;
    let mut d_squared_zero = true;
    let mut minimal = true;
    for (i, g) in m.generators.iter().enumerate() {
        if d_squared_zero && !d.apply(m, &m.d[i]).is_zero() {
            d_squared_zero = false;
            failure.get_or_insert_with(|| format!("d^2({}) is nonzero", g.name));
        }
        if minimal && m.d[i].terms.keys().any(|mono| mono.iter().sum::<u32>() < 2) {
            minimal = false;
            failure.get_or_insert_with(|| format!("d({}) is not decomposable", g.name));
        }
    }
    CdgaCheck { valid: d_squared_zero && minimal, d_squared_zero, minimal, failure }
}

/// A derivation of degree `degree`, given on generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub degree: i32,
    pub images: Vec<GradedPoly>,
}

impl Derivation {
    pub fn new(m: &Cdga, degree: i32, images: Vec<GradedPoly>) -> Result<Self> {
        if images.len() != m.len() {
            return Err(Error::Spec(format!("derivation has {} images for {} generators", images.len(), m.len())));
        }
        for (g, p) in m.generators.iter().zip(&images) {
            m.check_poly(p)?;
            if !m.is_homogeneous(p, g.degree as i64 + degree as i64) {
                return Err(Error::Spec(format!(
                    "image of {} is not of degree {}",
                    g.name,
                    g.degree as i64 + degree as i64
                )));
            }
        }
        Ok(Derivation { degree, images })
    }

    pub fn zero(m: &Cdga, degree: i32) -> Self {
        Derivation { degree, images: vec![GradedPoly::zero(); m.len()] }
    }

    pub fn is_zero(&self) -> bool {
        self.images.iter().all(GradedPoly::is_zero)
    }

    /// Leibniz extension with `D(xy) = D(x) y + (-1)^(degree |x|) x D(y)`.
    pub fn apply(&self, m: &Cdga, p: &GradedPoly) -> GradedPoly {
        let mut out = GradedPoly::zero();
        for (mono, c) in &p.terms {
            let factors = m.factors(mono);
            let mut prefix_degree = 0i64;
            for (j, &f) in factors.iter().enumerate() {
                if !self.images[f].is_zero() {
                    let prefix = m.mono_of(&factors[..j]);
                    let suffix = m.mono_of(&factors[j + 1..]);
                    let sign = if (self.degree as i64 * prefix_degree) % 2 != 0 { -c.clone() } else { c.clone() };
                    let term = m.mul(&m.mul(&prefix, &self.images[f]), &suffix);
                    out = out.add(&term.scale(&sign));
                }
                prefix_degree += m.generators[f].degree as i64;
            }
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Derivation {
        Derivation { degree: self.degree, images: self.images.iter().map(|p| p.scale(c)).collect() }
    }

    pub fn add(&self, other: &Derivation) -> Result<Derivation> {
        if self.degree != other.degree {
            return Err(Error::Spec("adding derivations of different degrees".into()));
        }
        Ok(Derivation {
            degree: self.degree,
            images: self.images.iter().zip(&other.images).map(|(a, b)| a.add(b)).collect(),
        })
    }
}

/// `[A, B] = A B - (-1)^(|A||B|) B A`, again a derivation.
pub fn bracket(m: &Cdga, a: &Derivation, b: &Derivation) -> Derivation {
    let odd = (a.degree * b.degree).rem_euclid(2) == 1;
    let images = (0..m.len())
        .map(|i| {
            let ab = a.apply(m, &b.images[i]);
            let ba = b.apply(m, &a.images[i]);
            if odd {
                ab.add(&ba)
            } else {
                ab.sub(&ba)
            }
        })
        .collect();
    Derivation { degree: a.degree + b.degree, images }
}

/// `[i, d] = i d + d i`.
pub fn bracket_with_d(i: &Derivation, m: &Cdga) -> Result<Derivation> {
    if i.degree != -1 {
        return Err(Error::Spec(format!("expected a degree -1 derivation, got degree {}", i.degree)));
    }
    Ok(bracket(m, i, &m.differential()))
}

/// Least `k` with `D^k` zero on every generator, or `(false, bound)`. For
/// degree-preserving `D` the bound is the largest dimension of a graded piece
/// holding a generator: a nilpotent endomorphism of an `N`-dimensional space
/// satisfies `D^N = 0`.
pub fn is_nilpotent(d: &Derivation, m: &Cdga) -> (bool, usize) {
    let max_degree = m.generators.iter().map(|g| g.degree as usize).max().unwrap_or(0);
    let bound = m.max_dimension().max(max_degree + 1).max(1);
    let mut current: Vec<GradedPoly> = (0..m.len()).map(|i| m.generator(i)).collect();
    for k in 1..=bound {
        current = current.iter().map(|p| d.apply(m, p)).collect();
        if current.iter().all(GradedPoly::is_zero) {
            return (true, k);
        }
    }
    (false, bound)
}

/// An algebra endomorphism of degree zero, given on generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    pub images: Vec<GradedPoly>,
}

impl Morphism {
    pub fn identity(m: &Cdga) -> Self {
        Morphism { images: (0..m.len()).map(|i| m.generator(i)).collect() }
    }

    pub fn apply(&self, m: &Cdga, p: &GradedPoly) -> GradedPoly {
        m.apply_morphism(&self.images, p)
    }

    /// `self` after `inner`.
    pub fn compose(&self, m: &Cdga, inner: &Morphism) -> Morphism {
        Morphism { images: inner.images.iter().map(|p| self.apply(m, p)).collect() }
    }

    pub fn commutes_with_d(&self, m: &Cdga) -> bool {
        (0..m.len()).all(|i| self.apply(m, m.d_of(i)) == m.differential().apply(m, &self.images[i]))
    }
}

fn factorial_inverse(k: usize) -> Q {
    let f: BigInt = (1..=k).fold(BigInt::one(), |acc, j| acc * BigInt::from(j));
    Q::new(BigInt::one(), f)
}

fn exp_series(d: &Derivation, m: &Cdga) -> Result<Morphism> {
    let (nilpotent, k) = is_nilpotent(d, m);
    if !nilpotent {
        return Err(Error::NonNilpotent(k));
    }
    let images = (0..m.len())
        .map(|i| {
            let mut term = m.generator(i);
            let mut acc = term.clone();
            for j in 1..k {
                term = d.apply(m, &term);
                acc = acc.add(&term.scale(&factorial_inverse(j)));
            }
            acc
        })
        .collect();
    Ok(Morphism { images })
}

/// `exp(D) = sum D^k / k!`, checked to commute with `d` and to be inverted by
/// `exp(-D)`.
pub fn exp_derivation(d: &Derivation, m: &Cdga) -> Result<Morphism> {
    if d.degree != 0 {
        return Err(Error::Spec(format!("exponential needs a degree 0 derivation, got degree {}", d.degree)));
    }
    let e = exp_series(d, m)?;
    if !bracket(m, &m.differential(), d).is_zero() {
        return Err(Error::Spec("derivation does not commute with d".into()));
    }
    let inv = exp_series(&d.scale(&-Q::one()), m)?;
    if !e.commutes_with_d(m) {
        return Err(Error::Contract("exp(D) does not commute with d".into()));
    }
    let id = Morphism::identity(m);
    if inv.compose(m, &e) != id || e.compose(m, &inv) != id {
        return Err(Error::Contract("exp(-D) does not invert exp(D)".into()));
    }
    Ok(e)
}

/// Whether `i` vanishes on degree-1 generators, which span the degree-1 part.
pub fn in_u_star(i: &Derivation, m: &Cdga) -> bool {
    m.generators.iter().zip(&i.images).all(|(g, p)| g.degree != 1 || p.is_zero())
}

/// A polynomial in `t` with coefficients in `M`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TPoly {
    coeffs: BTreeMap<u32, GradedPoly>,
}

impl TPoly {
    pub fn constant(p: GradedPoly) -> Self {
        Self::monomial(0, p)
    }

    pub fn monomial(k: u32, p: GradedPoly) -> Self {
        let mut coeffs = BTreeMap::new();
        if !p.is_zero() {
            coeffs.insert(k, p);
        }
        TPoly { coeffs }
    }

    pub fn from_coeffs(coeffs: impl IntoIterator<Item = (u32, GradedPoly)>) -> Self {
        coeffs.into_iter().fold(TPoly::default(), |acc, (k, p)| acc.add(&TPoly::monomial(k, p)))
    }

    pub fn coeffs(&self) -> &BTreeMap<u32, GradedPoly> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &TPoly) -> TPoly {
        let mut coeffs = self.coeffs.clone();
        for (k, p) in &other.coeffs {
            let sum = coeffs.get(k).map_or_else(|| p.clone(), |q| q.add(p));
            if sum.is_zero() {
                coeffs.remove(k);
            } else {
                coeffs.insert(*k, sum);
            }
        }
        TPoly { coeffs }
    }

    pub fn sub(&self, other: &TPoly) -> TPoly {
        self.add(&other.map(|p| p.neg()))
    }

    /// Coefficientwise map, which must be `Q[t]`-linear.
    pub fn map(&self, f: impl Fn(&GradedPoly) -> GradedPoly) -> TPoly {
        TPoly::from_coeffs(self.coeffs.iter().map(|(k, p)| (*k, f(p))))
    }

    pub fn times_t(&self) -> TPoly {
        TPoly { coeffs: self.coeffs.iter().map(|(k, p)| (k + 1, p.clone())).collect() }
    }

    pub fn d_dt(&self) -> TPoly {
        TPoly::from_coeffs(
            self.coeffs.iter().filter(|(k, _)| **k > 0).map(|(k, p)| (k - 1, p.scale(&Q::from_integer((*k).into())))),
        )
    }

    pub fn at_zero(&self) -> GradedPoly {
        self.coeffs.get(&0).cloned().unwrap_or_default()
    }

    pub fn at_one(&self) -> GradedPoly {
        self.coeffs.values().fold(GradedPoly::zero(), |acc, p| acc.add(p))
    }

    /// `int_0^1 p(t) dt`.
    pub fn integrate(&self) -> GradedPoly {
        self.coeffs
            .iter()
            .fold(GradedPoly::zero(), |acc, (k, p)| acc.add(&p.scale(&Q::new(BigInt::one(), BigInt::from(k + 1)))))
    }

    fn mul(&self, m: &Cdga, other: &TPoly) -> TPoly {
        let mut out = TPoly::default();
        for (j, p) in &self.coeffs {
            for (k, q) in &other.coeffs {
                out = out.add(&TPoly::monomial(j + k, m.mul(p, q)));
            }
        }
        out
    }

    /// `(-1)^|x| x` termwise.
    fn parity_twist(&self, m: &Cdga) -> TPoly {
        self.map(|p| {
            let mut out = GradedPoly::zero();
            for (mono, c) in &p.terms {
                out.add_term(mono.clone(), if m.degree(mono) % 2 != 0 { -c.clone() } else { c.clone() });
            }
            out
        })
    }
}

/// An element `a + dt b` of `M (x) Q(t, dt)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TdtElement {
    pub a: TPoly,
    pub b: TPoly,
}

impl TdtElement {
    fn add(&self, o: &TdtElement) -> TdtElement {
        TdtElement { a: self.a.add(&o.a), b: self.b.add(&o.b) }
    }

    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn scale(&self, c: &Q) -> TdtElement {
        TdtElement { a: self.a.map(|p| p.scale(c)), b: self.b.map(|p| p.scale(c)) }
    }

    /// `(a1 + dt b1)(a2 + dt b2) = a1 a2 + dt ((-1)^|a1| a1 b2 + b1 a2)`.
    fn mul(&self, m: &Cdga, o: &TdtElement) -> TdtElement {
        TdtElement { a: self.a.mul(m, &o.a), b: self.a.parity_twist(m).mul(m, &o.b).add(&self.b.mul(m, &o.a)) }
    }

    fn differential(&self, m: &Cdga) -> TdtElement {
        let d = m.differential();
        TdtElement { a: self.a.map(|p| d.apply(m, p)), b: self.a.d_dt().sub(&self.b.map(|p| d.apply(m, p))) }
    }
}

/// An algebra map `M -> M (x) Q(t, dt)`, `x -> F(x) + dt G(x)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HomotopyLine {
    pub on_generators: Vec<TdtElement>,
}

impl HomotopyLine {
    pub fn f(&self, i: usize) -> &TPoly {
        &self.on_generators[i].a
    }

    pub fn g(&self, i: usize) -> &TPoly {
        &self.on_generators[i].b
    }

    pub fn apply(&self, m: &Cdga, p: &GradedPoly) -> TdtElement {
        let mut out = TdtElement::default();
        for (mono, c) in &p.terms {
            let mut acc = TdtElement { a: TPoly::constant(m.constant(c.clone())), b: TPoly::default() };
            for f in m.factors(mono) {
                acc = acc.mul(m, &self.on_generators[f]);
            }
            out = out.add(&acc);
        }
        out
    }

    pub fn at_zero(&self) -> Morphism {
        Morphism { images: self.on_generators.iter().map(|e| e.a.at_zero()).collect() }
    }

    pub fn at_one(&self) -> Morphism {
        Morphism { images: self.on_generators.iter().map(|e| e.a.at_one()).collect() }
    }

    /// `d H(x) = H(d x)` on generators.
    pub fn commutes_with_d(&self, m: &Cdga) -> bool {
        (0..m.len()).all(|i| self.on_generators[i].differential(m) == self.apply(m, m.d_of(i)))
    }

    pub fn validate(&self, m: &Cdga) -> Result<()> {
        if self.on_generators.len() != m.len() {
            return Err(Error::Spec(format!(
                "homotopy has {} images for {} generators",
                self.on_generators.len(),
                m.len()
            )));
        }
        for (g, e) in m.generators.iter().zip(&self.on_generators) {
            for p in e.a.coeffs.values().chain(e.b.coeffs.values()) {
                m.check_poly(p)?;
            }
            let deg = g.degree as i64;
            if !e.a.coeffs.values().all(|p| m.is_homogeneous(p, deg))
                || !e.b.coeffs.values().all(|p| m.is_homogeneous(p, deg - 1))
            {
                return Err(Error::Spec(format!("image of {} has the wrong degree", g.name)));
            }
        }
        if !self.commutes_with_d(m) {
            return Err(Error::InvalidWitness("homotopy does not commute with the differentials".into()));
        }
        Ok(())
    }
}

/// The homotopy `x -> exp([I, d])(x)` with `I = t i`, from the identity to
/// `exp([i, d])`. On `a + dt b` the derivation `[I, d]` acts as
/// `t D a + dt (i a + t D b)` with `D = [i, d]`.
pub fn build_homotopy(i: &Derivation, m: &Cdga) -> Result<HomotopyLine> {
    let big_d = bracket_with_d(i, m)?;
    let (nilpotent, bound) = is_nilpotent(&big_d, m);
    if !nilpotent {
        return Err(Error::NonNilpotent(bound));
    }
    let cap = 2 * m.max_dimension() + 2;
    let step = |e: &TdtElement| TdtElement {
        a: e.a.map(|p| big_d.apply(m, p)).times_t(),
        b: e.a.map(|p| i.apply(m, p)).add(&e.b.map(|p| big_d.apply(m, p)).times_t()),
    };
    let mut on_generators = vec![];
    for x in 0..m.len() {
        let mut term = TdtElement { a: TPoly::constant(m.generator(x)), b: TPoly::default() };
        let mut acc = term.clone();
        let mut k = 1;
        loop {
            term = step(&term).scale(&Q::new(BigInt::one(), BigInt::from(k)));
            if term.is_zero() {
                break;
            }
            if k > cap {
                return Err(Error::NonNilpotent(cap));
            }
            acc = acc.add(&term);
            k += 1;
        }
        on_generators.push(acc);
    }
    let h = HomotopyLine { on_generators };
    if h.at_zero() != Morphism::identity(m) {
        return Err(Error::Contract("homotopy does not start at the identity".into()));
    }
    if h.at_one() != exp_derivation(&big_d, m)? {
        return Err(Error::Contract("homotopy does not end at exp([i, d])".into()));
    }
    if !h.commutes_with_d(m) {
        return Err(Error::Contract("homotopy does not commute with the differentials".into()));
    }
    Ok(h)
}

/// Whether every `H(x)` lies in `(Mbar (x) Q(t, dt)) + Q`.
pub fn augmentation_check(h: &HomotopyLine) -> bool {
    h.on_generators.iter().all(|e| {
        let constant_in = |p: &GradedPoly| !p.constant_term().is_zero();
        !e.b.coeffs.values().any(constant_in) && !e.a.coeffs.iter().any(|(k, p)| *k > 0 && constant_in(p))
    })
}

/// `i = int_0^1 G F^-1 dt`. `F^-1` is the series `sum (id - F)^k`, which
/// must terminate within the dimension of the relevant graded piece.
pub fn block_lazarev(h: &HomotopyLine, m: &Cdga) -> Result<Derivation> {
    h.validate(m)?;
    if h.at_zero() != Morphism::identity(m) {
        return Err(Error::NonUnipotentHomotopy("F does not start at the identity".into()));
    }
    let f_images: Vec<TPoly> = h.on_generators.iter().map(|e| e.a.clone()).collect();
    let apply_f = |p: &TPoly| -> TPoly {
        let mut out = TPoly::default();
        for (k, q) in &p.coeffs {
            let mut image = TPoly::default();
            for (mono, c) in &q.terms {
                let mut acc = TPoly::constant(m.constant(c.clone()));
                for f in m.factors(mono) {
                    acc = acc.mul(m, &f_images[f]);
                }
                image = image.add(&acc);
            }
            for _ in 0..*k {
                image = image.times_t();
            }
            out = out.add(&image);
        }
        out
    };
    // G extended as an F-derivation:
    // G(f1..fn) = sum_j (-1)^|f1..f(j-1)| F(f1)..F(f(j-1)) G(fj) F(f(j+1))..F(fn)
    let apply_g = |p: &TPoly| -> TPoly {
        let mut out = TPoly::default();
        for (k, q) in &p.coeffs {
            for (mono, c) in &q.terms {
                let factors = m.factors(mono);
                let mut prefix_degree = 0i64;
                for (j, &fj) in factors.iter().enumerate() {
                    let mut acc =
                        TPoly::constant(m.constant(if prefix_degree % 2 != 0 { -c.clone() } else { c.clone() }));
                    for &f in &factors[..j] {
                        acc = acc.mul(m, &f_images[f]);
                    }
                    acc = acc.mul(m, h.g(fj));
                    for &f in &factors[j + 1..] {
                        acc = acc.mul(m, &f_images[f]);
                    }
                    for _ in 0..*k {
                        acc = acc.times_t();
                    }
                    out = out.add(&acc);
                    prefix_degree += m.generators[fj].degree as i64;
                }
            }
        }
        out
    };
    let mut images = vec![];
    for x in 0..m.len() {
        let cap = m.monomials_of_degree(m.generators[x].degree).len() + 1;
        let mut term = TPoly::constant(m.generator(x));
        let mut inverse = term.clone();
        let mut steps = 0;
        loop {
            term = term.sub(&apply_f(&term));
            if term.is_zero() {
                break;
            }
            steps += 1;
            if steps > cap {
                return Err(Error::NonUnipotentHomotopy(format!(
                    "id - F is not nilpotent on the degree of {}",
                    m.generators[x].name
                )));
            }
            inverse = inverse.add(&term);
        }
        images.push(apply_g(&inverse).integrate());
    }
    Derivation::new(m, -1, images)
}

/// Whether `exp([i, d])` equals the endpoint of `h`.
pub fn recovers_endpoint(i: &Derivation, h: &HomotopyLine, m: &Cdga) -> Result<bool> {
    Ok(exp_derivation(&bracket_with_d(i, m)?, m)? == h.at_one())
}

/// `Lambda(x1, y1, z1)`, `dz = xy`.
pub fn heisenberg_model() -> Cdga {
    Cdga::from_spec(&[("x", 1), ("y", 1), ("z", 1)], &[vec![], vec![], vec![(1, vec!["x", "y"])]]).expect("valid model")
}

/// `Lambda(a2, z3)`, `dz = a^2`.
pub fn sphere_model() -> Cdga {
    Cdga::from_spec(&[("a", 2), ("z", 3)], &[vec![], vec![(1, vec!["a", "a"])]]).expect("valid model")
}

/// `Lambda(a2, z3, u4)`, `dz = a^2`, `du = 0`.
pub fn sphere_with_u_model() -> Cdga {
    Cdga::from_spec(&[("a", 2), ("z", 3), ("u", 4)], &[vec![], vec![(1, vec!["a", "a"])], vec![]]).expect("valid model")
}

pub fn desk_models() -> Vec<(&'static str, Cdga)> {
    vec![("heisenberg", heisenberg_model()), ("sphere", sphere_model()), ("sphere_with_u", sphere_with_u_model())]
}

/// Exact rational from a decimal integer or `p/q` string.
pub fn parse_rational(s: &str) -> Result<Q> {
    let q: Q = s.trim().parse().map_err(|_| Error::Spec(format!("not a rational number: {s}")))?;
    Ok(q)
}

pub fn format_rational(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl std::fmt::Display for Derivation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "derivation of degree {}", self.degree)
    }
}

pub fn describe(m: &Cdga, p: &GradedPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (c, names)) in m.poly_terms(p).into_iter().enumerate() {
        let negative = c.is_negative();
        let mag = c.abs();
        if k == 0 {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        let body = names.join("*");
        if body.is_empty() {
            out.push_str(&format_rational(&mag));
        } else if mag.is_one() {
            out.push_str(&body);
        } else {
            out.push_str(&format!("{}*{}", format_rational(&mag), body));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    fn poly(m: &Cdga, terms: &[(i64, &[&str])]) -> GradedPoly {
        let t: Vec<(Q, Vec<String>)> =
            terms.iter().map(|(c, f)| (q(*c), f.iter().map(|s| s.to_string()).collect())).collect();
        m.poly(&t).unwrap()
    }

    fn derivation(m: &Cdga, degree: i32, images: &[(&str, &[(i64, &[&str])])]) -> Derivation {
        let mut d = Derivation::zero(m, degree);
        for (name, terms) in images {
            d.images[m.index_of(name).unwrap()] = poly(m, terms);
        }
        Derivation::new(m, degree, d.images).unwrap()
    }

    #[test]
    fn koszul_signs() {
        let h = heisenberg_model();
        assert_eq!(poly(&h, &[(1, &["y", "x"])]), poly(&h, &[(-1, &["x", "y"])]));
        assert!(poly(&h, &[(1, &["x", "x"])]).is_zero());
        let s = sphere_model();
        assert_eq!(poly(&s, &[(1, &["z", "a"])]), poly(&s, &[(1, &["a", "z"])]));
    }

    #[test]
    fn cdga_checks() {
        assert!(check_cdga(&sphere_model()).valid);
        assert!(check_cdga(&heisenberg_model()).valid);
        let not_minimal = Cdga::from_spec(&[("x", 2), ("z", 1)], &[vec![], vec![(1, vec!["x"])]]).unwrap();
        let r = check_cdga(&not_minimal);
        assert!(!r.valid && !r.minimal);
        assert!(r.failure.unwrap().contains('z'));
        // wrong degree of d is structural
        assert!(Cdga::from_spec(&[("x", 1), ("z", 1)], &[vec![], vec![(1, vec!["x"])]]).is_err());
    }

    #[test]
    fn d_squared_failure_named() {
        // d^2 c = d(ab) = a^3
        let m = Cdga::from_spec(
            &[("a", 2), ("b", 3), ("c", 4)],
            &[vec![], vec![(1, vec!["a", "a"])], vec![(1, vec!["a", "b"])]],
        )
        .unwrap();
        let r = check_cdga(&m);
        assert!(!r.d_squared_zero);
        assert!(r.failure.unwrap().contains("d^2(c)"));
    }

    #[test]
    fn brackets() {
        let s = sphere_model();
        let i = derivation(&s, -1, &[("z", &[(1, &["a"])])]);
        assert!(bracket_with_d(&i, &s).unwrap().is_zero());

        let h = heisenberg_model();
        let i = derivation(&h, -1, &[("y", &[(1, &[])])]);
        let d = bracket_with_d(&i, &h).unwrap();
        assert_eq!(d, derivation(&h, 0, &[("z", &[(-1, &["x"])])]));

        let u = sphere_with_u_model();
        let i = derivation(&u, -1, &[("u", &[(1, &["z"])])]);
        let d = bracket_with_d(&i, &u).unwrap();
        assert_eq!(d, derivation(&u, 0, &[("u", &[(1, &["a", "a"])])]));
        assert!(bracket_with_d(&d, &u).is_err());
    }

    #[test]
    fn nilpotency() {
        let u = sphere_with_u_model();
        assert_eq!(is_nilpotent(&Derivation::zero(&u, 0), &u), (true, 1));
        let d = derivation(&u, 0, &[("u", &[(1, &["a", "a"])])]);
        assert_eq!(is_nilpotent(&d, &u), (true, 2));
        let id = Derivation { degree: 0, images: (0..u.len()).map(|i| u.generator(i)).collect() };
        let (nil, bound) = is_nilpotent(&id, &u);
        assert!(!nil);
        assert_eq!(exp_derivation(&id, &u), Err(Error::NonNilpotent(bound)));
    }

    #[test]
    fn exponentials() {
        let u = sphere_with_u_model();
        assert_eq!(exp_derivation(&Derivation::zero(&u, 0), &u).unwrap(), Morphism::identity(&u));
        let d = derivation(&u, 0, &[("u", &[(1, &["a", "a"])])]);
        let e = exp_derivation(&d, &u).unwrap();
        assert_eq!(e.images[2], poly(&u, &[(1, &["u"]), (1, &["a", "a"])]));

        let h = heisenberg_model();
        let d = derivation(&h, 0, &[("z", &[(-1, &["x"])])]);
        let e = exp_derivation(&d, &h).unwrap();
        assert_eq!(e.images[2], poly(&h, &[(1, &["z"]), (-1, &["x"])]));
    }

    #[test]
    fn u_star_membership() {
        let h = heisenberg_model();
        assert!(!in_u_star(&derivation(&h, -1, &[("y", &[(1, &[])])]), &h));
        let u = sphere_with_u_model();
        assert!(in_u_star(&derivation(&u, -1, &[("u", &[(1, &["z"])])]), &u));
        assert!(in_u_star(&Derivation::zero(&h, -1), &h));
    }

    #[test]
    fn homotopies() {
        let u = sphere_with_u_model();
        let zero = build_homotopy(&Derivation::zero(&u, -1), &u).unwrap();
        assert_eq!(zero.at_one(), Morphism::identity(&u));
        assert!(augmentation_check(&zero));
        assert!(block_lazarev(&zero, &u).unwrap().is_zero());

        let i = derivation(&u, -1, &[("u", &[(1, &["z"])])]);
        let hu = build_homotopy(&i, &u).unwrap();
        let expected = TdtElement {
            a: TPoly::from_coeffs([(0, u.generator(2)), (1, poly(&u, &[(1, &["a", "a"])]))]),
            b: TPoly::constant(u.generator(1)),
        };
        assert_eq!(hu.on_generators[2], expected);
        assert!(augmentation_check(&hu));
        let back = block_lazarev(&hu, &u).unwrap();
        assert_eq!(back, i);
        assert!(recovers_endpoint(&back, &hu, &u).unwrap());

        let h = heisenberg_model();
        let i = derivation(&h, -1, &[("y", &[(1, &[])])]);
        let hh = build_homotopy(&i, &h).unwrap();
        assert_eq!(hh.on_generators[1], TdtElement { a: TPoly::constant(h.generator(1)), b: TPoly::constant(h.one()) });
        assert_eq!(
            hh.on_generators[2],
            TdtElement { a: TPoly::from_coeffs([(0, h.generator(2)), (1, h.generator(0).neg())]), b: TPoly::default() }
        );
        assert!(!augmentation_check(&hh));
        let back = block_lazarev(&hh, &h).unwrap();
        assert_eq!(back, i);
        assert!(recovers_endpoint(&back, &hh, &h).unwrap());
    }

    #[test]
    fn non_unipotent_homotopy_rejected() {
        // F(x) = 2x is constant in t, so it does not start at the identity
        let h = heisenberg_model();
        let mut line = build_homotopy(&Derivation::zero(&h, -1), &h).unwrap();
        line.on_generators[0].a = TPoly::constant(h.generator(0).scale(&q(2)));
        line.on_generators[2].a = TPoly::constant(h.generator(2).scale(&q(2)));
        assert!(matches!(block_lazarev(&line, &h), Err(Error::NonUnipotentHomotopy(_))));
    }

    #[test]
    fn rational_text() {
        assert_eq!(format_rational(&parse_rational("6/4").unwrap()), "3/2");
        assert_eq!(format_rational(&parse_rational("-2").unwrap()), "-2");
        assert!(parse_rational("x").is_err());
        let u = sphere_with_u_model();
        assert_eq!(describe(&u, &poly(&u, &[(1, &["u"]), (-2, &["a", "a"])])), "u - 2*a*a");
    }
}
