//! Exact arithmetic in integral group rings `Z[G]` for finitely generated
//! abelian `G = Z^r x Z/n_1 x ... x Z/n_k`.
//!
//! Elements are sparse maps from group elements to nonzero big integers.
//! Terms are kept in lexicographic order on `(free exponents, torsion
//! residues)`, which makes equality structural and serialization
//! deterministic.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Description of `Z^free_rank x Z/torsion[0] x ...`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    pub free_rank: usize,
    pub torsion: Vec<u64>,
}

impl GroupSpec {
    pub fn new(free_rank: usize, torsion: Vec<u64>) -> Result<Self> {
        if let Some(&n) = torsion.iter().find(|&&n| n < 2) {
            return Err(Error::Spec(format!("torsion order {n} must be at least 2")));
        }
        Ok(GroupSpec { free_rank, torsion })
    }

    /// `Z/n`
    pub fn cyclic(n: u64) -> Self {
        GroupSpec::new(0, vec![n]).expect("cyclic order must be at least 2")
    }

    /// `Z x Z/n`
    pub fn z_times_cyclic(n: u64) -> Self {
        GroupSpec::new(1, vec![n]).expect("cyclic order must be at least 2")
    }

    pub fn trivial() -> Self {
        GroupSpec { free_rank: 0, torsion: Vec::new() }
    }

    /// Order of the torsion subgroup.
    pub fn torsion_order(&self) -> u64 {
        self.torsion.iter().product()
    }

    /// All elements of the torsion subgroup, in canonical order.
    pub fn torsion_elements(&self) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::new()];
        for &n in &self.torsion {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..n).map(move |r| {
                        let mut v = prefix.clone();
                        v.push(r);
                        v
                    })
                })
                .collect();
        }
        out
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { free: vec![0; self.free_rank], torsion: vec![0; self.torsion.len()] }
    }

    /// Builds an element, reducing residues modulo their orders.
    pub fn element(&self, free: Vec<i64>, torsion: Vec<i64>) -> Result<GroupElement> {
        if free.len() != self.free_rank || torsion.len() != self.torsion.len() {
            return Err(Error::Spec(format!(
                "group element has shape ({}, {}) but group expects ({}, {})",
                free.len(),
                torsion.len(),
                self.free_rank,
                self.torsion.len()
            )));
        }
        let torsion = torsion.iter().zip(&self.torsion).map(|(&r, &n)| r.rem_euclid(n as i64) as u64).collect();
        Ok(GroupElement { free, torsion })
    }

    pub fn mul_elements(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement {
            free: a.free.iter().zip(&b.free).map(|(x, y)| x + y).collect(),
            torsion: a.torsion.iter().zip(&b.torsion).zip(&self.torsion).map(|((x, y), n)| (x + y) % n).collect(),
        }
    }

    pub fn inverse_element(&self, a: &GroupElement) -> GroupElement {
        GroupElement {
            free: a.free.iter().map(|x| -x).collect(),
            torsion: a.torsion.iter().zip(&self.torsion).map(|(x, n)| (n - x) % n).collect(),
        }
    }

    /// The group with one extra free generator appended after the existing
    /// free coordinates.
    pub fn with_extra_free(&self) -> GroupSpec {
        GroupSpec { free_rank: self.free_rank + 1, torsion: self.torsion.clone() }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = (0..self.free_rank).map(|_| "Z".to_string()).collect();
        parts.extend(self.torsion.iter().map(|n| format!("Z/{n}")));
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join(" x "))
        }
    }
}

/// A group element: free exponents followed by reduced torsion residues.
/// The derived order is the canonical term order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    pub free: Vec<i64>,
    pub torsion: Vec<u64>,
}

impl GroupElement {
    pub fn is_identity(&self) -> bool {
        self.free.iter().all(|&x| x == 0) && self.torsion.iter().all(|&x| x == 0)
    }
}

/// An element of `Z[G]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RingElement {
    spec: Arc<GroupSpec>,
    terms: BTreeMap<GroupElement, BigInt>,
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (g, c) in &self.terms {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let mono = monomial_name(g);
            match (mag.is_one(), mono.is_empty()) {
                (true, true) => write!(f, "1")?,
                (true, false) => write!(f, "{mono}")?,
                (false, true) => write!(f, "{mag}")?,
                (false, false) => write!(f, "{mag}*{mono}")?,
            }
        }
        Ok(())
    }
}

fn monomial_name(g: &GroupElement) -> String {
    let mut parts = Vec::new();
    for (i, &e) in g.free.iter().enumerate() {
        if e != 0 {
            let name = if g.free.len() == 1 { "t".to_string() } else { format!("t{i}") };
            parts.push(if e == 1 { name } else { format!("{name}^{e}") });
        }
    }
    for (i, &e) in g.torsion.iter().enumerate() {
        if e != 0 {
            let name = if g.torsion.len() == 1 { "g".to_string() } else { format!("g{i}") };
            parts.push(if e == 1 { name } else { format!("{name}^{e}") });
        }
    }
    parts.join("*")
}

impl RingElement {
    pub fn zero(spec: &Arc<GroupSpec>) -> Self {
        RingElement { spec: spec.clone(), terms: BTreeMap::new() }
    }

    pub fn one(spec: &Arc<GroupSpec>) -> Self {
        Self::monomial(spec, spec.identity(), BigInt::one())
    }

    pub fn from_int(spec: &Arc<GroupSpec>, c: i64) -> Self {
        Self::monomial(spec, spec.identity(), BigInt::from(c))
    }

    pub fn monomial(spec: &Arc<GroupSpec>, g: GroupElement, c: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(g, c);
        }
        RingElement { spec: spec.clone(), terms }
    }

    /// `g` for a group element `g`.
    pub fn group(spec: &Arc<GroupSpec>, g: GroupElement) -> Self {
        Self::monomial(spec, g, BigInt::one())
    }

    /// Builds an element from `(group element, coefficient)` pairs, merging
    /// repeated keys and dropping zeros.
    pub fn from_terms<I>(spec: &Arc<GroupSpec>, terms: I) -> Self
    where
        I: IntoIterator<Item = (GroupElement, BigInt)>,
    {
        let mut out = RingElement::zero(spec);
        for (g, c) in terms {
            out.add_term(g, c);
        }
        out
    }

    /// Element of `Z[Z/n]` (or the torsion part of a one-factor group) from
    /// exponent/coefficient pairs of the first torsion generator.
    pub fn cyclic(spec: &Arc<GroupSpec>, pairs: &[(i64, i64)]) -> Result<Self> {
        if spec.torsion.is_empty() {
            return Err(Error::Spec("group has no torsion generator".into()));
        }
        let mut terms = Vec::new();
        for &(e, c) in pairs {
            let mut tors = vec![0; spec.torsion.len()];
            tors[0] = e;
            terms.push((spec.element(vec![0; spec.free_rank], tors)?, BigInt::from(c)));
        }
        Ok(Self::from_terms(spec, terms))
    }

    pub fn spec(&self) -> &Arc<GroupSpec> {
        &self.spec
    }

    pub fn terms(&self) -> &BTreeMap<GroupElement, BigInt> {
        &self.terms
    }

    pub fn support_size(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.iter().all(|(g, c)| g.is_identity() && c.is_one())
    }

    fn add_term(&mut self, g: GroupElement, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(g) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    fn check_same(&self, other: &RingElement) -> Result<()> {
        if self.spec != other.spec && *self.spec != *other.spec {
            return Err(Error::Spec(format!("group ring mismatch: Z[{}] vs Z[{}]", self.spec, other.spec)));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &RingElement) -> Result<RingElement> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.add_term(g.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &RingElement) -> Result<RingElement> {
        self.check_same(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &RingElement) -> RingElement {
        let mut acc: BTreeMap<GroupElement, BigInt> = BTreeMap::new();
        for (g, a) in &self.terms {
            for (h, b) in &other.terms {
                let gh = self.spec.mul_elements(g, h);
                *acc.entry(gh).or_insert_with(BigInt::zero) += a * b;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        RingElement { spec: self.spec.clone(), terms: acc }
    }

    pub fn neg(&self) -> RingElement {
        RingElement { spec: self.spec.clone(), terms: self.terms.iter().map(|(g, c)| (g.clone(), -c)).collect() }
    }

    pub fn scale(&self, k: &BigInt) -> RingElement {
        if k.is_zero() {
            return RingElement::zero(&self.spec);
        }
        RingElement { spec: self.spec.clone(), terms: self.terms.iter().map(|(g, c)| (g.clone(), c * k)).collect() }
    }

    /// Multiplication by a group element.
    pub fn shift(&self, g: &GroupElement) -> RingElement {
        RingElement {
            spec: self.spec.clone(),
            terms: self.terms.iter().map(|(h, c)| (self.spec.mul_elements(g, h), c.clone())).collect(),
        }
    }

    /// Image under a ring map induced by a group homomorphism given on
    /// elements.
    pub fn map_group<F>(&self, target: &Arc<GroupSpec>, f: F) -> RingElement
    where
        F: Fn(&GroupElement) -> GroupElement,
    {
        RingElement::from_terms(target, self.terms.iter().map(|(g, c)| (f(g), c.clone())))
    }

    /// Coefficient-wise inclusion `Z[H] -> Z[H x Z]` along a spec with one
    /// extra free coordinate appended.
    pub fn induce_extra_free(&self, target: &Arc<GroupSpec>) -> RingElement {
        self.map_group(target, |g| {
            let mut free = g.free.clone();
            free.push(0);
            GroupElement { free, torsion: g.torsion.clone() }
        })
    }
}

impl std::ops::Add for &RingElement {
    type Output = RingElement;
    fn add(self, rhs: &RingElement) -> RingElement {
        self.try_add(rhs).expect("group ring mismatch in addition")
    }
}

impl std::ops::Sub for &RingElement {
    type Output = RingElement;
    fn sub(self, rhs: &RingElement) -> RingElement {
        self.try_add(&rhs.neg()).expect("group ring mismatch in subtraction")
    }
}

impl std::ops::Mul for &RingElement {
    type Output = RingElement;
    fn mul(self, rhs: &RingElement) -> RingElement {
        self.try_mul(rhs).expect("group ring mismatch in multiplication")
    }
}

impl std::ops::Neg for &RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        RingElement::neg(self)
    }
}

/// Group-ring product. Errors if the operands live over different groups.
pub fn gr_mul(a: &RingElement, b: &RingElement) -> Result<RingElement> {
    a.try_mul(b)
}

/// True iff `u = ±g` for a group element `g`.
pub fn is_trivial_unit(u: &RingElement) -> bool {
    u.terms.len() == 1 && u.terms.values().all(|c| c.abs().is_one())
}

/// Searches for a two-sided inverse of `u` whose support has at most
/// `support_bound` terms.
///
/// A unit of `Z[Z^r x T]` (T finite abelian) has the form `t^a w` with `w` a
/// unit of `Z[T]`, so the search reduces to one exact rational solve of the
/// `|T| x |T|` multiplication system for `w`. `None` only means no inverse
/// was found within the bound; it is not a certificate of non-invertibility.
pub fn gr_inverse(u: &RingElement, support_bound: usize) -> Option<RingElement> {
    let spec = u.spec.clone();
    let mut keys = u.terms.keys();
    let first = keys.next()?;
    let free = first.free.clone();
    if keys.any(|g| g.free != free) {
        return None;
    }
    let tors = spec.torsion_elements();
    let index: BTreeMap<&Vec<u64>, usize> = tors.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let n = tors.len();
    // column j: coefficients of w * tors[j]
    let mut mat = vec![vec![BigRational::zero(); n]; n];
    for (j, tj) in tors.iter().enumerate() {
        for (g, c) in &u.terms {
            let prod: Vec<u64> = g.torsion.iter().zip(tj).zip(&spec.torsion).map(|((a, b), m)| (a + b) % m).collect();
            let i = index[&prod];
            mat[i][j] += BigRational::from_integer(c.clone());
        }
    }
    let mut rhs = vec![BigRational::zero(); n];
    rhs[0] = BigRational::one();
    let sol = solve_rational(mat, rhs)?;
    if sol.iter().any(|x| !x.is_integer()) {
        return None;
    }
    let inv_free: Vec<i64> = free.iter().map(|x| -x).collect();
    let v = RingElement::from_terms(
        &spec,
        sol.into_iter()
            .zip(&tors)
            .map(|(x, t)| (GroupElement { free: inv_free.clone(), torsion: t.clone() }, x.to_integer())),
    );
    if v.support_size() > support_bound {
        return None;
    }
    debug_assert!(u.mul_unchecked(&v).is_one());
    Some(v)
}

/// Unique solution of a square rational system, or `None` if singular.
fn solve_rational(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for c in col..n {
            a[col][c] = &a[col][c] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..n {
                    let delta = &factor * &a[col][c];
                    a[r][c] -= delta;
                }
                let delta = &factor * &b[col];
                b[r] -= delta;
            }
        }
    }
    Some(b)
}

/// Dense matrix over `Z[G]`, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct RingMatrix {
    spec: Arc<GroupSpec>,
    rows: usize,
    cols: usize,
    entries: Vec<RingElement>,
}

impl fmt::Debug for RingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
        }
        write!(f, "] ({}x{})", self.rows, self.cols)
    }
}

impl RingMatrix {
    pub fn zeros(spec: &Arc<GroupSpec>, rows: usize, cols: usize) -> Self {
        RingMatrix { spec: spec.clone(), rows, cols, entries: vec![RingElement::zero(spec); rows * cols] }
    }

    pub fn identity(spec: &Arc<GroupSpec>, n: usize) -> Self {
        Self::scalar(spec, n, &RingElement::one(spec))
    }

    pub fn scalar(spec: &Arc<GroupSpec>, n: usize, u: &RingElement) -> Self {
        let mut m = Self::zeros(spec, n, n);
        for i in 0..n {
            m.set(i, i, u.clone());
        }
        m
    }

    pub fn diagonal(spec: &Arc<GroupSpec>, diag: &[RingElement]) -> Self {
        let mut m = Self::zeros(spec, diag.len(), diag.len());
        for (i, u) in diag.iter().enumerate() {
            m.set(i, i, u.clone());
        }
        m
    }

    pub fn from_rows(spec: &Arc<GroupSpec>, rows: Vec<Vec<RingElement>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Spec("ragged matrix rows".into()));
        }
        let entries: Vec<RingElement> = rows.into_iter().flatten().collect();
        if let Some(e) = entries.iter().find(|e| **e.spec() != **spec) {
            return Err(Error::Spec(format!("matrix entry over Z[{}] in a matrix over Z[{}]", e.spec(), spec)));
        }
        Ok(RingMatrix { spec: spec.clone(), rows: r, cols: c, entries })
    }

    pub fn spec(&self) -> &Arc<GroupSpec> {
        &self.spec
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &RingElement {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: RingElement) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[RingElement] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(RingElement::is_zero)
    }

    pub fn try_mul(&self, other: &RingMatrix) -> Result<RingMatrix> {
        if self.cols != other.rows {
            return Err(Error::Spec(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if *self.spec != *other.spec {
            return Err(Error::Spec("matrix group ring mismatch".into()));
        }
        let mut out = RingMatrix::zeros(&self.spec, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * other.cols + j;
                    out.entries[idx] = &out.entries[idx] + &a.mul_unchecked(b);
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, other: &RingMatrix) -> Result<RingMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Spec(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.try_add(b)).collect::<Result<Vec<_>>>()?;
        Ok(RingMatrix { spec: self.spec.clone(), rows: self.rows, cols: self.cols, entries })
    }

    pub fn neg(&self) -> RingMatrix {
        self.map(RingElement::neg)
    }

    pub fn map<F: Fn(&RingElement) -> RingElement>(&self, f: F) -> RingMatrix {
        RingMatrix {
            spec: self.spec.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    /// Applies a ring map entrywise, landing over `target`.
    pub fn map_ring<F: Fn(&RingElement) -> RingElement>(&self, target: &Arc<GroupSpec>, f: F) -> RingMatrix {
        RingMatrix {
            spec: target.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, u: &RingElement) -> RingMatrix {
        self.map(|e| e.mul_unchecked(u))
    }

    /// Assembles a block matrix. Every block in a block-row must share its
    /// row count and every block in a block-column its column count.
    pub fn block(spec: &Arc<GroupSpec>, blocks: &[Vec<RingMatrix>]) -> Result<RingMatrix> {
        let row_heights: Vec<usize> = blocks.iter().map(|br| br.first().map_or(0, |b| b.rows)).collect();
        let ncols_blocks = blocks.first().map_or(0, Vec::len);
        let col_widths: Vec<usize> = (0..ncols_blocks).map(|j| blocks[0][j].cols).collect();
        for br in blocks {
            if br.len() != ncols_blocks {
                return Err(Error::Spec("ragged block matrix".into()));
            }
        }
        let total_rows: usize = row_heights.iter().sum();
        let total_cols: usize = col_widths.iter().sum();
        let mut out = RingMatrix::zeros(spec, total_rows, total_cols);
        let mut r0 = 0;
        for (bi, br) in blocks.iter().enumerate() {
            let mut c0 = 0;
            for (bj, b) in br.iter().enumerate() {
                if b.rows != row_heights[bi] || b.cols != col_widths[bj] {
                    return Err(Error::Spec(format!(
                        "block ({bi},{bj}) is {}x{}, expected {}x{}",
                        b.rows, b.cols, row_heights[bi], col_widths[bj]
                    )));
                }
                for r in 0..b.rows {
                    for c in 0..b.cols {
                        out.set(r0 + r, c0 + c, b.get(r, c).clone());
                    }
                }
                c0 += col_widths[bj];
            }
            r0 += row_heights[bi];
        }
        Ok(out)
    }

    /// Submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> RingMatrix {
        let mut out = RingMatrix::zeros(&self.spec, rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                out.set(i, j, self.get(r, c).clone());
            }
        }
        out
    }

    /// Writes `block` at rows/columns given by index lists.
    pub fn place(&mut self, rows: &[usize], cols: &[usize], block: &RingMatrix) {
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                self.set(r, c, block.get(i, j).clone());
            }
        }
    }
}

impl std::ops::Mul for &RingMatrix {
    type Output = RingMatrix;
    fn mul(self, rhs: &RingMatrix) -> RingMatrix {
        self.try_mul(rhs).expect("matrix shape mismatch")
    }
}

impl std::ops::Add for &RingMatrix {
    type Output = RingMatrix;
    fn add(self, rhs: &RingMatrix) -> RingMatrix {
        self.try_add(rhs).expect("matrix shape mismatch")
    }
}

impl std::ops::Sub for &RingMatrix {
    type Output = RingMatrix;
    fn sub(self, rhs: &RingMatrix) -> RingMatrix {
        self.try_add(&rhs.neg()).expect("matrix shape mismatch")
    }
}

/// Determinant over the commutative ring `Z[G]`.
///
/// Uses the division-free Berkowitz recurrence: `Z[G]` has zero divisors
/// when `G` has torsion, so Bareiss-style exact division is unavailable.
/// `O(n^4)` ring multiplications.
pub fn gr_det(m: &RingMatrix) -> Result<RingElement> {
    if m.rows != m.cols {
        return Err(Error::Spec(format!("determinant of non-square {}x{} matrix", m.rows, m.cols)));
    }
    let spec = m.spec.clone();
    let n = m.rows;
    if n == 0 {
        return Ok(RingElement::one(&spec));
    }
    // Characteristic-polynomial coefficients of the leading r x r minor,
    // highest degree first: c[0] = 1.
    let mut coeffs = vec![RingElement::one(&spec), m.get(0, 0).neg()];
    for r in 1..n {
        // A_r = leading r x r block, R = row r restricted to cols < r,
        // C = col r restricted to rows < r, a = m[r][r].
        let a = m.get(r, r);
        let row: Vec<&RingElement> = (0..r).map(|j| m.get(r, j)).collect();
        let mut col: Vec<RingElement> = (0..r).map(|i| m.get(i, r).clone()).collect();
        // Toeplitz column: [1, -a, -R C, -R A C, ..., -R A^{r-1} C]
        let mut toeplitz = Vec::with_capacity(r + 2);
        toeplitz.push(RingElement::one(&spec));
        toeplitz.push(a.neg());
        for _ in 0..r {
            let rc = dot(&row, &col, &spec);
            toeplitz.push(rc.neg());
            col = (0..r)
                .map(|i| {
                    let entries: Vec<&RingElement> = (0..r).map(|j| m.get(i, j)).collect();
                    dot(&entries, &col, &spec)
                })
                .collect();
        }
        let mut next = Vec::with_capacity(r + 2);
        for i in 0..r + 2 {
            let mut acc = RingElement::zero(&spec);
            for j in 0..=i.min(r) {
                if i - j < toeplitz.len() {
                    acc = &acc + &toeplitz[i - j].mul_unchecked(&coeffs[j]);
                }
            }
            next.push(acc);
        }
        coeffs = next;
    }
    // det = (-1)^n * constant term of det(xI - A)
    let c = coeffs[n].clone();
    Ok(if n % 2 == 1 { c.neg() } else { c })
}

fn dot(a: &[&RingElement], b: &[RingElement], spec: &Arc<GroupSpec>) -> RingElement {
    let mut acc = RingElement::zero(spec);
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc = &acc + &x.mul_unchecked(y);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z5() -> Arc<GroupSpec> {
        Arc::new(GroupSpec::cyclic(5))
    }

    fn laurent(spec: &Arc<GroupSpec>, pairs: &[(i64, i64)]) -> RingElement {
        RingElement::from_terms(
            spec,
            pairs.iter().map(|&(e, c)| (GroupElement { free: vec![e], torsion: vec![] }, BigInt::from(c))),
        )
    }

    #[test]
    fn exponent_reduction() {
        let s = z5();
        let g = RingElement::cyclic(&s, &[(1, 1)]).unwrap();
        let g4 = RingElement::cyclic(&s, &[(4, 1)]).unwrap();
        assert!(gr_mul(&g, &g4).unwrap().is_one());
    }

    #[test]
    fn laurent_difference_of_squares() {
        let s = Arc::new(GroupSpec::new(1, vec![]).unwrap());
        let a = laurent(&s, &[(0, 1), (1, 1)]);
        let b = laurent(&s, &[(0, 1), (1, -1)]);
        assert_eq!(gr_mul(&a, &b).unwrap(), laurent(&s, &[(0, 1), (2, -1)]));
    }

    #[test]
    fn golden_unit_inverse() {
        let s = z5();
        let u = RingElement::cyclic(&s, &[(1, 1), (4, 1), (0, -1)]).unwrap();
        let v = gr_inverse(&u, 5).expect("unit");
        assert_eq!(v, RingElement::cyclic(&s, &[(2, 1), (3, 1), (0, -1)]).unwrap());
        assert!(gr_mul(&u, &v).unwrap().is_one());
        assert!(!is_trivial_unit(&u));
        // below the support bound the search reports nothing
        assert!(gr_inverse(&u, 2).is_none());
    }

    #[test]
    fn trivial_inverses() {
        let s = z5();
        assert!(gr_inverse(&RingElement::one(&s), 1).unwrap().is_one());
        let minus_g = RingElement::cyclic(&s, &[(1, -1)]).unwrap();
        assert_eq!(gr_inverse(&minus_g, 1).unwrap(), RingElement::cyclic(&s, &[(4, -1)]).unwrap());
        assert!(is_trivial_unit(&minus_g));
        assert!(is_trivial_unit(&RingElement::one(&s)));
    }

    #[test]
    fn non_units_not_found() {
        let s = z5();
        // 1 + g maps to 2 under augmentation
        assert!(gr_inverse(&RingElement::cyclic(&s, &[(0, 1), (1, 1)]).unwrap(), 5).is_none());
        let l = Arc::new(GroupSpec::new(1, vec![]).unwrap());
        assert!(gr_inverse(&laurent(&l, &[(0, 1), (1, 1)]), 5).is_none());
        assert_eq!(gr_inverse(&laurent(&l, &[(3, -1)]), 1).unwrap(), laurent(&l, &[(-3, -1)]));
    }

    #[test]
    fn mismatched_groups_rejected() {
        let a = RingElement::one(&z5());
        let b = RingElement::one(&Arc::new(GroupSpec::cyclic(4)));
        assert!(matches!(gr_mul(&a, &b), Err(Error::Spec(_))));
        assert!(GroupSpec::new(0, vec![1]).is_err());
    }

    #[test]
    fn determinant_examples() {
        let s = z5();
        assert!(gr_det(&RingMatrix::identity(&s, 4)).unwrap().is_one());
        let u = RingElement::cyclic(&s, &[(1, 1), (4, 1), (0, -1)]).unwrap();
        let v = RingElement::cyclic(&s, &[(2, 3), (0, 1)]).unwrap();
        let d = RingMatrix::diagonal(&s, &[u.clone(), v.clone()]);
        assert_eq!(gr_det(&d).unwrap(), &u * &v);
        let mut shear = RingMatrix::identity(&s, 3);
        shear.set(0, 2, v.clone());
        assert!(gr_det(&shear).unwrap().is_one());
        assert!(gr_det(&RingMatrix::zeros(&s, 2, 3)).is_err());
        // 2x2 cofactor check
        let m = RingMatrix::from_rows(&s, vec![vec![u.clone(), v.clone()], vec![v.clone(), u.clone()]]).unwrap();
        assert_eq!(gr_det(&m).unwrap(), &(&u * &u) - &(&v * &v));
    }
}
