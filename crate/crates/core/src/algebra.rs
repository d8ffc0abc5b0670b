//! Exact algebra of signed permutation matrices.
//!
//! A [`SignedPermutation`] on `n` modes sends mode `i` to mode `perm[i]`
//! with the sign `signs[perm[i]]` attached to the output row, i.e. its matrix
//! has the single non-zero entry `M[perm[i]][i] = signs[perm[i]]` in column
//! `i`. Composition is matrix multiplication: `a.compose(&b)` applies `b`
//! first, then `a`.
//!
//! Spectra and orders come from the cycle decomposition. A cycle of length
//! `k` whose signs multiply to `σ` contributes the `k` roots of `γᵏ = σ` and
//! has order `k` (σ = +1) or `2k` (σ = −1).

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Complex;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SignedPermutationWire", into = "SignedPermutationWire")]
pub struct SignedPermutation {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

#[derive(Serialize, Deserialize)]
struct SignedPermutationWire {
    n: usize,
    permutation: Vec<usize>,
    signs: Vec<i8>,
}

impl TryFrom<SignedPermutationWire> for SignedPermutation {
    type Error = Error;
    fn try_from(w: SignedPermutationWire) -> Result<Self> {
        if w.permutation.len() != w.n {
            return Err(Error::InvalidPermutation(format!("n = {} but {} images", w.n, w.permutation.len())));
        }
        SignedPermutation::new(w.permutation, w.signs)
    }
}

impl From<SignedPermutation> for SignedPermutationWire {
    fn from(s: SignedPermutation) -> Self {
        SignedPermutationWire { n: s.n(), permutation: s.perm, signs: s.signs }
    }
}

/// Which of the two sign placements of a signed exchange to use.
///
/// `Positive` puts the −1 on row `i`: for `n = 2` it is `[[0, −1], [1, 0]]`;
/// `Negative` puts it on row `j`: `[[0, 1], [−1, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Positive,
    Negative,
}

/// `exp(2πi · numerator / denominator)` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootOfUnity {
    pub numerator: u64,
    pub denominator: u64,
}

impl RootOfUnity {
    pub fn new(numerator: u64, denominator: u64) -> Self {
        let g = gcd(numerator, denominator).max(1);
        let (num, den) = (numerator / g, denominator / g);
        RootOfUnity { numerator: num % den, denominator: den }
    }

    pub fn to_complex(self) -> Complex {
        let angle = std::f64::consts::TAU * self.numerator as f64 / self.denominator as f64;
        Complex::from_polar(1.0, angle)
    }

    /// `true` when `γᵏ = 1`.
    pub fn satisfies_power_one(self, k: u64) -> bool {
        (self.numerator * k).is_multiple_of(self.denominator)
    }
}

/// One cycle of the underlying permutation, listed from its smallest element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub elements: Vec<usize>,
    pub sign: i8,
}

impl SignedPermutation {
    pub fn new(perm: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        let n = perm.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty permutation".into()));
        }
        if signs.len() != n {
            return Err(Error::InvalidPermutation(format!("{} signs for {} modes", signs.len(), n)));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidPermutation("signs must be ±1".into()));
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidPermutation(format!("{perm:?} is not a bijection on 0..{n}")));
            }
        }
        Ok(SignedPermutation { perm, signs })
    }

    pub fn unsigned(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        Self::new(perm, vec![1; n])
    }

    pub fn identity(n: usize) -> Self {
        SignedPermutation { perm: (0..n).collect(), signs: vec![1; n] }
    }

    /// Exchange of modes `i < j`; optionally signed per [`Direction`].
    pub fn generator(n: usize, i: usize, j: usize, signed: bool, direction: Direction) -> Result<Self> {
        if !(i < j && j < n) {
            return Err(Error::IndexOutOfRange { n, i, j });
        }
        let mut s = Self::identity(n);
        s.perm.swap(i, j);
        if signed {
            match direction {
                Direction::Positive => s.signs[i] = -1,
                Direction::Negative => s.signs[j] = -1,
            }
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p) && self.signs.iter().all(|&s| s == 1)
    }

    /// Same permutation with every sign set to +1.
    pub fn unsigned_part(&self) -> Self {
        SignedPermutation { perm: self.perm.clone(), signs: vec![1; self.n()] }
    }

    /// `self ∘ other` (apply `other`, then `self`).
    pub fn compose(&self, other: &SignedPermutation) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: other.n() });
        }
        let perm: Vec<usize> = (0..self.n()).map(|i| self.perm[other.perm[i]]).collect();
        let mut signs = vec![1i8; self.n()];
        for i in 0..self.n() {
            let mid = other.perm[i];
            signs[perm[i]] = self.signs[perm[i]] * other.signs[mid];
        }
        Ok(SignedPermutation { perm, signs })
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = Self::identity(self.n());
        for _ in 0..k {
            acc = self.compose(&acc).expect("same dimension");
        }
        acc
    }

    pub fn inverse(&self) -> Self {
        let n = self.n();
        let mut perm = vec![0; n];
        let mut signs = vec![1i8; n];
        for i in 0..n {
            perm[self.perm[i]] = i;
            // M[p(i)][i] = s[p(i)]  ⇒  M⁻¹ = Mᵀ has M⁻¹[i][p(i)] = s[p(i)]
            signs[i] = self.signs[self.perm[i]];
        }
        SignedPermutation { perm, signs }
    }

    /// Dense matrix with entries in {−1, 0, +1}.
    pub fn to_matrix(&self) -> Vec<Vec<i8>> {
        let n = self.n();
        let mut m = vec![vec![0i8; n]; n];
        for i in 0..n {
            m[self.perm[i]][i] = self.signs[self.perm[i]];
        }
        m
    }

    pub fn cycles(&self) -> Vec<Cycle> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut elements = Vec::new();
            let mut sign = 1i8;
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                elements.push(k);
                sign *= self.signs[k];
                k = self.perm[k];
            }
            out.push(Cycle { elements, sign });
        }
        out
    }

    /// Least `k ≥ 1` with `selfᵏ = I`.
    pub fn order(&self) -> usize {
        self.cycles().iter().map(|c| if c.sign < 0 { 2 * c.elements.len() } else { c.elements.len() }).fold(1, lcm)
    }

    /// Order of the underlying unsigned permutation.
    pub fn order_unsigned(&self) -> usize {
        self.cycles().iter().map(|c| c.elements.len()).fold(1, lcm)
    }

    /// Eigenvalues as exact roots of unity, with multiplicity.
    pub fn spectrum_exact(&self) -> Vec<RootOfUnity> {
        let mut out = Vec::with_capacity(self.n());
        for c in self.cycles() {
            let k = c.elements.len() as u64;
            for j in 0..k {
                // γᵏ = 1: exp(2πi j/k);  γᵏ = −1: exp(2πi (2j+1)/(2k))
                out.push(if c.sign > 0 { RootOfUnity::new(j, k) } else { RootOfUnity::new(2 * j + 1, 2 * k) });
            }
        }
        out.sort();
        out
    }

    pub fn spectrum(&self) -> Vec<Complex> {
        self.spectrum_exact().into_iter().map(RootOfUnity::to_complex).collect()
    }

    /// Equivalent form with each cycle's sign product on its smallest element.
    ///
    /// Two signed permutations conjugate by a diagonal ±1 matrix share this
    /// form, so measured signs (which depend on the base-point frame) compare
    /// through it.
    pub fn canonical(&self) -> Self {
        let mut signs = vec![1i8; self.n()];
        for c in self.cycles() {
            signs[c.elements[0]] = c.sign;
        }
        SignedPermutation { perm: self.perm.clone(), signs }
    }

    /// Commutator test `ab − ba ≠ 0`.
    pub fn commutes_with(&self, other: &SignedPermutation) -> Result<bool> {
        Ok(self.compose(other)? == other.compose(self)?)
    }
}

impl fmt::Display for SignedPermutation {
    /// Cycle notation with per-row sign annotations, e.g. `(0 1)(2)[-,+,+]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.cycles() {
            write!(f, "({})", c.elements.iter().join(" "))?;
        }
        let signs = self.signs.iter().map(|&s| if s > 0 { "+" } else { "-" }).join(",");
        write!(f, "[{signs}]")
    }
}

/// One ordering of a generator list with its product.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderingProduct {
    /// Indices into the generator list, leftmost factor first.
    pub ordering: Vec<usize>,
    pub product: SignedPermutation,
    pub order: usize,
}

/// Every ordering of `generators` with its product `g[o₀]·g[o₁]·…` and order.
pub fn enumerate_orderings(generators: &[SignedPermutation]) -> Result<Vec<OrderingProduct>> {
    let count = generators.len();
    if !(1..=5).contains(&count) {
        return Err(Error::InvalidGeneratorCount(count));
    }
    let n = generators[0].n();
    (0..count)
        .permutations(count)
        .map(|ordering| {
            let mut product = SignedPermutation::identity(n);
            for &k in &ordering {
                product = product.compose(&generators[k])?;
            }
            let order = product.order();
            Ok(OrderingProduct { ordering, product, order })
        })
        .collect()
}

/// Unsigned exchange generators for the given mode pairs.
pub fn generators_for_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Vec<SignedPermutation>> {
    pairs
        .iter()
        .map(|&(a, b)| SignedPermutation::generator(n, a.min(b), a.max(b), false, Direction::Positive))
        .collect()
}

/// Orderings of the enclosed-pair generators whose product permutes the
/// modes exactly as `measured` does. Signs are not compared.
///
/// An empty result means the measurement cannot be explained by any ordering
/// of the given exchanges.
pub fn match_measurement(measured: &[usize], pairs: &[(usize, usize)]) -> Result<Vec<OrderingProduct>> {
    let n = measured.len();
    let target = SignedPermutation::unsigned(measured.to_vec())?;
    if pairs.is_empty() {
        let id = SignedPermutation::identity(n);
        return Ok(if target == id {
            vec![OrderingProduct { ordering: vec![], product: id, order: 1 }]
        } else {
            vec![]
        });
    }
    let gens = generators_for_pairs(n, pairs)?;
    Ok(enumerate_orderings(&gens)?.into_iter().filter(|o| o.product.permutation() == target.permutation()).collect())
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a as u64, b as u64) as usize * b
}
