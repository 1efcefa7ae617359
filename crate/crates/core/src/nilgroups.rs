//! Surjections onto `Z` from finitely generated subgroups of the
//! unitriangular integer group `Uni_n(Z)`.
//!
//! `Uni_n^m` is the subgroup whose first `m` off-diagonals vanish. On it the
//! `(m+1)`-th off-diagonal is additive, because every cross term of a product
//! lands at off-diagonal `2(m+1)` or deeper. A subgroup of level `m` therefore
//! maps homomorphically onto a lattice in `Z^(n-m-1)`, and a primitive
//! functional on that lattice is a surjection onto `Z`.
//!
//! Inputs are assumed torsion-free, that is already unitriangular; no
//! torsion quotient is computed.

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn overflow() -> Error {
    Error::Spec("integer overflow in unitriangular arithmetic".into())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct UniMatrix {
    n: usize,
    entries: Vec<Vec<i64>>,
}

impl TryFrom<Vec<Vec<i64>>> for UniMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        UniMatrix::new(rows)
    }
}

impl From<UniMatrix> for Vec<Vec<i64>> {
    fn from(m: UniMatrix) -> Self {
        m.entries
    }
}

impl UniMatrix {
    pub fn new(entries: Vec<Vec<i64>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 {
            return Err(Error::Spec("unitriangular matrix must be at least 1x1".into()));
        }
        for (i, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Spec(format!("row {i} has length {}, expected {n}", row.len())));
            }
            if row[i] != 1 {
                return Err(Error::Spec(format!("diagonal entry ({i},{i}) is {}, expected 1", row[i])));
            }
            if let Some(j) = (0..i).find(|&j| row[j] != 0) {
                return Err(Error::Spec(format!("entry ({i},{j}) below the diagonal is nonzero")));
            }
        }
        Ok(UniMatrix { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        let entries = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        UniMatrix { n, entries }
    }

    /// `I + k E_{ij}` with 1-based indices, `i < j`.
    pub fn elementary(n: usize, i: usize, j: usize, k: i64) -> Result<Self> {
        if !(1 <= i && i < j && j <= n) {
            return Err(Error::Spec(format!("E_{i}{j} is not strictly upper triangular in size {n}")));
        }
        let mut m = Self::identity(n);
        m.entries[i - 1][j - 1] = k;
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i][j]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    pub fn mul(&self, other: &UniMatrix) -> Result<UniMatrix> {
        if self.n != other.n {
            return Err(Error::Spec(format!("size mismatch: {} vs {}", self.n, other.n)));
        }
        let n = self.n;
        let mut entries = vec![vec![0i64; n]; n];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate().skip(i) {
                let mut acc = 0i64;
                for k in i..=j {
                    let p = self.entries[i][k].checked_mul(other.entries[k][j]).ok_or_else(overflow)?;
                    acc = acc.checked_add(p).ok_or_else(overflow)?;
                }
                *slot = acc;
            }
        }
        Ok(UniMatrix { n, entries })
    }

    /// `sum_{k<n} (-N)^k` with `N = A - I`; `N^n = 0`.
    pub fn inverse(&self) -> Result<UniMatrix> {
        let n = self.n;
        let mut neg_n = Self::identity(n);
        for i in 0..n {
            for j in i + 1..n {
                neg_n.entries[i][j] = -self.entries[i][j];
            }
            neg_n.entries[i][i] = 0;
        }
        let mut acc = Self::identity(n);
        let mut power = Self::identity(n);
        for _ in 1..n {
            power = mul_raw(&power, &neg_n)?;
            for i in 0..n {
                for j in i + 1..n {
                    acc.entries[i][j] = acc.entries[i][j].checked_add(power.entries[i][j]).ok_or_else(overflow)?;
                }
            }
        }
        Ok(acc)
    }

    pub fn pow(&self, e: i64) -> Result<UniMatrix> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc = Self::identity(self.n);
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }

    /// `A B A^-1 B^-1`.
    pub fn commutator(&self, other: &UniMatrix) -> Result<UniMatrix> {
        self.mul(other)?.mul(&self.inverse()?)?.mul(&other.inverse()?)
    }

    /// Entries `(i, i+j)` of the `j`-th off-diagonal, `j >= 1`.
    pub fn off_diagonal(&self, j: usize) -> Vec<i64> {
        (0..self.n.saturating_sub(j)).map(|i| self.entries[i][i + j]).collect()
    }

    /// Whether off-diagonals `1..=m` vanish.
    pub fn in_level(&self, m: usize) -> bool {
        (1..=m).all(|j| self.off_diagonal(j).iter().all(|&x| x == 0))
    }
}

/// Product of matrices that are not unitriangular (strictly upper parts).
fn mul_raw(a: &UniMatrix, b: &UniMatrix) -> Result<UniMatrix> {
    let n = a.n;
    let mut entries = vec![vec![0i64; n]; n];
    for (i, row) in entries.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let mut acc = 0i64;
            for k in 0..n {
                let p = a.entries[i][k].checked_mul(b.entries[k][j]).ok_or_else(overflow)?;
                acc = acc.checked_add(p).ok_or_else(overflow)?;
            }
            *slot = acc;
        }
    }
    Ok(UniMatrix { n, entries })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniSubgroup {
    n: usize,
    generators: Vec<UniMatrix>,
}

impl UniSubgroup {
    pub fn new(n: usize, generators: Vec<UniMatrix>) -> Result<Self> {
        if let Some(i) = generators.iter().position(|g| g.size() != n) {
            return Err(Error::Spec(format!("generator {i} has size {}, expected {n}", generators[i].size())));
        }
        Ok(UniSubgroup { n, generators })
    }

    pub fn from_rows(n: usize, gens: Vec<Vec<Vec<i64>>>) -> Result<Self> {
        let generators = gens
            .into_iter()
            .enumerate()
            .map(|(i, g)| UniMatrix::new(g).map_err(|e| Error::Spec(format!("generator {i}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, generators)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[UniMatrix] {
        &self.generators
    }

    /// Evaluates a word of `(generator index, exponent)` letters.
    pub fn evaluate(&self, word: &[(usize, i64)]) -> Result<UniMatrix> {
        let mut acc = UniMatrix::identity(self.n);
        for &(i, e) in word {
            let g = self
                .generators
                .get(i)
                .ok_or_else(|| Error::Spec(format!("word uses generator {i} of {}", self.generators.len())))?;
            acc = acc.mul(&g.pow(e)?)?;
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZFunctional {
    pub level: usize,
    /// Weights on the `(level+1)`-th off-diagonal.
    pub weights: Vec<i64>,
    /// `phi(A) = (weights . offdiag(A)) / divisor`; exact on the subgroup.
    pub divisor: i64,
    pub values_on_generators: Vec<i64>,
}

impl ZFunctional {
    /// Undivided value `weights . offdiag_{level+1}(a)`.
    fn raw(&self, a: &UniMatrix) -> Result<i128> {
        let v = a.off_diagonal(self.level + 1);
        if v.len() != self.weights.len() {
            return Err(Error::Spec(format!(
                "functional has {} weights, matrix gives {}",
                self.weights.len(),
                v.len()
            )));
        }
        Ok(self.weights.iter().zip(&v).map(|(&w, &x)| w as i128 * x as i128).sum())
    }

    pub fn evaluate(&self, a: &UniMatrix) -> Result<i64> {
        let raw = self.raw(a)?;
        let d = self.divisor as i128;
        if raw % d != 0 {
            return Err(Error::Spec("matrix lies outside the subgroup the functional was built for".into()));
        }
        i64::try_from(raw / d).map_err(|_| overflow())
    }
}

/// Largest `m` with every generator in `Uni_n^m`.
pub fn filtration_level(s: &UniSubgroup) -> Result<usize> {
    if s.generators.iter().all(UniMatrix::is_identity) {
        return Err(Error::TrivialGroup);
    }
    let mut m = 0;
    while s.generators.iter().all(|g| g.in_level(m + 1)) {
        m += 1;
    }
    Ok(m)
}

/// Row-style Hermite normal form: nonzero rows, strictly increasing pivot
/// columns, positive pivots, entries above each pivot reduced into
/// `[0, pivot)`.
pub fn hermite_normal_form(rows: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut r = 0;
    for c in 0..cols {
        // gcd-combine rows r.. into row r at column c
        for i in r + 1..a.len() {
            if a[i][c] == 0 {
                continue;
            }
            let (x, y) = (a[r][c], a[i][c]);
            let e = x.extended_gcd(&y);
            let (p, q) = (x / e.gcd, y / e.gcd);
            let (top, bottom): (Vec<i128>, Vec<i128>) =
                a[r].iter().zip(&a[i]).map(|(&u, &v)| (e.x * u + e.y * v, -q * u + p * v)).unzip();
            a[r] = top;
            a[i] = bottom;
        }
        if r < a.len() && a[r][c] != 0 {
            if a[r][c] < 0 {
                a[r].iter_mut().for_each(|x| *x = -*x);
            }
            let pivot = a[r][c];
            for i in 0..r {
                let f = Integer::div_floor(&a[i][c], &pivot);
                if f != 0 {
                    let row = a[r].clone();
                    a[i].iter_mut().zip(&row).for_each(|(x, &y)| *x -= f * y);
                }
            }
            r += 1;
        }
    }
    a.truncate(r);
    a.into_iter().map(|row| row.into_iter().map(|x| i64::try_from(x).map_err(|_| overflow())).collect()).collect()
}

/// Hermite basis of the lattice spanned by the `(m+1)`-th off-diagonals of
/// the generators.
pub fn graded_image(s: &UniSubgroup, m: usize) -> Result<Vec<Vec<i64>>> {
    let level = filtration_level(s)?;
    if m != level {
        return Err(Error::Spec(format!("subgroup has filtration level {level}, not {m}")));
    }
    let rows: Vec<Vec<i64>> = s.generators.iter().map(|g| g.off_diagonal(m + 1)).collect();
    hermite_normal_form(&rows)
}

/// A surjection onto `Z`: the pivot coordinate of the first Hermite basis
/// vector, divided by that pivot. Every lattice vector has that coordinate
/// divisible by the pivot, and the first basis vector attains it.
pub fn surjection_to_z(s: &UniSubgroup) -> Result<ZFunctional> {
    let level = filtration_level(s)?;
    let basis = graded_image(s, level)?;
    let first = basis.first().ok_or(Error::TrivialGroup)?;
    let pivot = first.iter().position(|&x| x != 0).expect("Hermite rows are nonzero");
    let mut weights = vec![0; first.len()];
    weights[pivot] = 1;
    let phi = ZFunctional { level, weights, divisor: first[pivot], values_on_generators: vec![] };
    let values = s.generators.iter().map(|g| phi.evaluate(g)).collect::<Result<Vec<_>>>()?;
    Ok(ZFunctional { values_on_generators: values, ..phi })
}

/// Random word of length at most 20 in the generators and their inverses.
pub fn random_word(rng: &mut impl Rng, generators: usize) -> Vec<(usize, i64)> {
    if generators == 0 {
        return vec![];
    }
    let len = rng.gen_range(0..=20);
    (0..len).map(|_| (rng.gen_range(0..generators), if rng.gen_bool(0.5) { 1 } else { -1 })).collect()
}

/// Compares `phi(word)` with the sum of stored generator values on `trials`
/// random words.
pub fn verify_homomorphism(phi: &ZFunctional, s: &UniSubgroup, trials: usize, seed: u64) -> Result<bool> {
    if phi.values_on_generators.len() != s.generators.len() {
        return Err(Error::Spec("functional and subgroup have different generator counts".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let word = random_word(&mut rng, s.generators.len());
        if !word_agrees(phi, s, &word)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn word_agrees(phi: &ZFunctional, s: &UniSubgroup, word: &[(usize, i64)]) -> Result<bool> {
    let image = phi.raw(&s.evaluate(word)?)?;
    let expected: i128 = word.iter().map(|&(i, e)| e as i128 * phi.values_on_generators[i] as i128).sum();
    Ok(image == expected * phi.divisor as i128)
}

/// `phi` on every commutator of a pair of generators; all zero for a genuine
/// homomorphism to an abelian group.
pub fn commutator_values(phi: &ZFunctional, s: &UniSubgroup) -> Result<Vec<i64>> {
    let g = &s.generators;
    let mut out = vec![];
    for a in g {
        for b in g {
            out.push(phi.evaluate(&a.commutator(b)?)?);
        }
    }
    Ok(out)
}

pub fn gcd_of(values: &[i64]) -> i64 {
    values.iter().fold(0i64, |acc, &v| acc.gcd(&v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn heisenberg() -> UniSubgroup {
        let x = UniMatrix::elementary(3, 1, 2, 1).unwrap();
        let y = UniMatrix::elementary(3, 2, 3, 1).unwrap();
        UniSubgroup::new(3, vec![x, y]).unwrap()
    }

    #[test]
    fn rejects_malformed_matrices() {
        assert!(UniMatrix::new(vec![vec![1, 0], vec![1, 1]]).is_err());
        assert!(UniMatrix::new(vec![vec![2, 0], vec![0, 1]]).is_err());
        assert!(UniMatrix::new(vec![vec![1, 0]]).is_err());
    }

    #[test]
    fn inverse_and_commutator() {
        let h = heisenberg();
        let (x, y) = (&h.generators()[0], &h.generators()[1]);
        assert!(x.mul(&x.inverse().unwrap()).unwrap().is_identity());
        assert_eq!(x.commutator(y).unwrap(), UniMatrix::elementary(3, 1, 3, 1).unwrap());
    }

    #[test]
    fn levels() {
        assert_eq!(filtration_level(&heisenberg()).unwrap(), 0);
        let z = UniSubgroup::new(3, vec![UniMatrix::elementary(3, 1, 3, 1).unwrap()]).unwrap();
        assert_eq!(filtration_level(&z).unwrap(), 1);
        let id = UniSubgroup::new(3, vec![UniMatrix::identity(3)]).unwrap();
        assert_eq!(filtration_level(&id), Err(Error::TrivialGroup));
        assert_eq!(filtration_level(&UniSubgroup::new(3, vec![]).unwrap()), Err(Error::TrivialGroup));
    }

    #[test]
    fn graded_images() {
        assert_eq!(graded_image(&heisenberg(), 0).unwrap(), vec![vec![1, 0], vec![0, 1]]);
        assert!(graded_image(&heisenberg(), 1).is_err());
        let z = UniSubgroup::new(3, vec![UniMatrix::elementary(3, 1, 3, 1).unwrap()]).unwrap();
        assert_eq!(graded_image(&z, 1).unwrap(), vec![vec![1]]);
        let e = UniMatrix::elementary(2, 1, 2, 1).unwrap();
        let s = UniSubgroup::new(2, vec![e.pow(2).unwrap(), e.pow(3).unwrap()]).unwrap();
        assert_eq!(graded_image(&s, 0).unwrap(), vec![vec![1]]);
    }

    #[test]
    fn hermite_examples() {
        assert_eq!(hermite_normal_form(&[vec![2, 3], vec![0, 5]]).unwrap(), vec![vec![2, 3], vec![0, 5]]);
        assert_eq!(hermite_normal_form(&[vec![4, 6], vec![6, 9]]).unwrap(), vec![vec![2, 3]]);
        assert_eq!(hermite_normal_form(&[vec![0, -3], vec![0, 6]]).unwrap(), vec![vec![0, 3]]);
        assert_eq!(hermite_normal_form(&[vec![1, 7], vec![0, 2]]).unwrap(), vec![vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn heisenberg_functional() {
        let h = heisenberg();
        let phi = surjection_to_z(&h).unwrap();
        assert_eq!(phi.values_on_generators, vec![1, 0]);
        assert_eq!(phi.weights, vec![1, 0]);
        assert!(verify_homomorphism(&phi, &h, 1000, 7).unwrap());
        assert!(commutator_values(&phi, &h).unwrap().iter().all(|&v| v == 0));
        assert!(word_agrees(&phi, &h, &[]).unwrap());
    }

    #[test]
    fn powers_are_rescaled() {
        let e = UniMatrix::elementary(3, 1, 2, 1).unwrap().pow(6).unwrap();
        let s = UniSubgroup::new(3, vec![e]).unwrap();
        let phi = surjection_to_z(&s).unwrap();
        assert_eq!(phi.values_on_generators, vec![1]);
        assert_eq!(phi.divisor, 6);
    }

    #[test]
    fn corrupted_weight_is_caught() {
        let h = heisenberg();
        let mut phi = surjection_to_z(&h).unwrap();
        phi.weights[1] = 1;
        assert!(!verify_homomorphism(&phi, &h, 1000, 7).unwrap());
    }

    fn upper(n: usize, m: usize) -> impl Strategy<Value = UniMatrix> {
        proptest::collection::vec(-9i64..=9, n * n).prop_map(move |v| {
            let mut a = UniMatrix::identity(n);
            for i in 0..n {
                for j in i + m + 1..n {
                    a.entries[i][j] = v[i * n + j];
                }
            }
            a
        })
    }

    proptest! {
        #[test]
        fn off_diagonal_is_additive((_n, m, a, b) in (2usize..=6).prop_flat_map(|n| (Just(n), 0..n - 1))
            .prop_flat_map(|(n, m)| (Just(n), Just(m), upper(n, m), upper(n, m)))) {
            let ab = a.mul(&b).unwrap();
            let sum: Vec<i64> = a.off_diagonal(m + 1).iter().zip(b.off_diagonal(m + 1)).map(|(x, y)| x + y).collect();
            prop_assert_eq!(ab.off_diagonal(m + 1), sum);
        }

        #[test]
        fn functional_is_primitive(gens in proptest::collection::vec(upper(4, 0), 1..4)) {
            let s = UniSubgroup::new(4, gens).unwrap();
            match surjection_to_z(&s) {
                Ok(phi) => {
                    prop_assert_eq!(gcd_of(&phi.values_on_generators), 1);
                    prop_assert!(commutator_values(&phi, &s).unwrap().iter().all(|&v| v == 0));
                }
                Err(e) => prop_assert_eq!(e, Error::TrivialGroup),
            }
        }
    }
}
