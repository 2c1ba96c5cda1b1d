//! Free algebra over idempotent generators.
//!
//! A [`Word`] is a product of generators `P_1 .. P_N` written as its index
//! sequence; idempotency collapses adjacent repeats, so canonical words are
//! adjacent-distinct. A [`FormalSum`] is an integer combination of canonical
//! words. No other relations are imposed: the generators do not commute.
//!
//! The index constraint in the expansion layers is read as
//! adjacent-distinct (`i1 != i2`, `i2 != i3`, ... with `i1 == i3` allowed).
//! Under the all-distinct reading the expansion identity breaks down at
//! three generators and order three; [`expansion_terms_all_distinct`] exists to
//! demonstrate exactly that.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Product of generators in canonical, adjacent-distinct form. Letters are
/// 1-based generator indices; the empty word is the identity operator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<usize>,
}

impl Word {
    pub fn identity() -> Self {
        Self {
            letters: Vec::new(),
        }
    }

    /// Canonicalizes an index sequence: validates every letter against the
    /// generator count and merges runs of equal letters (`P_i^2 = P_i`)
    /// until no adjacent repeats remain.
    pub fn reduce(letters: &[usize], n_generators: usize) -> Result<Self> {
        let mut canonical = Vec::with_capacity(letters.len());
        for &l in letters {
            if l == 0 || l > n_generators {
                return Err(Error::IndexOutOfRange {
                    index: l,
                    max: n_generators,
                });
            }
            if canonical.last() != Some(&l) {
                canonical.push(l);
            }
        }
        Ok(Self { letters: canonical })
    }

    /// Wraps letters that are already adjacent-distinct.
    fn from_canonical(letters: Vec<usize>) -> Self {
        debug_assert!(letters.windows(2).all(|w| w[0] != w[1]));
        Self { letters }
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Concatenates two canonical words; the seam collapses by idempotency.
    pub fn concat(&self, other: &Self) -> Self {
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            if letters.last() != Some(&l) {
                letters.push(l);
            }
        }
        Self { letters }
    }
}

// Graded lexicographic order: by length first, then letterwise. This is the
// canonical term order used for serialization and rendering.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        write!(f, "[")?;
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "]")
    }
}

/// Convenience canonicalizer mirroring the idempotency relation.
pub fn reduce_word(letters: &[usize], n_generators: usize) -> Result<Word> {
    Word::reduce(letters, n_generators)
}

/// Integer-weighted combination of canonical words. Zero coefficients are
/// never stored; terms iterate in graded lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FormalSum {
    terms: BTreeMap<Word, i64>,
}

impl FormalSum {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The identity operator `1` as a sum.
    pub fn one() -> Self {
        Self::from_word(Word::identity())
    }

    pub fn from_word(word: Word) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(word, 1);
        Self { terms }
    }

    /// `P = P_1 + ... + P_N`.
    pub fn generator_sum(n_generators: usize) -> Self {
        let mut terms = BTreeMap::new();
        for i in 1..=n_generators {
            terms.insert(Word::from_canonical(vec![i]), 1);
        }
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, word: &Word) -> i64 {
        self.terms.get(word).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, i64)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    fn insert(&mut self, word: Word, coeff: i64) {
        if coeff == 0 {
            return;
        }
        match self.terms.entry(word) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                // Coefficients overflow only far beyond any order whose
                // term count still fits in memory; fail loudly anyway.
                let next = e.get().checked_add(coeff).expect("coefficient overflow");
                if next == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = next;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, &c) in &other.terms {
            out.insert(w.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, &c) in &other.terms {
            out.insert(w.clone(), c.checked_neg().expect("coefficient overflow"));
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(-1)
    }

    pub fn scale(&self, factor: i64) -> Self {
        if factor == 0 {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(w, &c)| {
                    (
                        w.clone(),
                        c.checked_mul(factor).expect("coefficient overflow"),
                    )
                })
                .collect(),
        }
    }

    /// Noncommutative product; every concatenation is re-canonicalized.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (wa, &ca) in &self.terms {
            for (wb, &cb) in &other.terms {
                out.insert(
                    wa.concat(wb),
                    ca.checked_mul(cb).expect("coefficient overflow"),
                );
            }
        }
        out
    }

    /// Restriction to the words of exactly length `len`.
    pub fn layer(&self, len: usize) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.len() == len)
                .map(|(w, &c)| (w.clone(), c))
                .collect(),
        }
    }

    /// Signed word-list rendering, e.g. `+[1] +[2] -[1,2] -[2,1]`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (w, &c) in &self.terms {
            if !out.is_empty() {
                out.push(' ');
            }
            let sign = if c < 0 { '-' } else { '+' };
            out.push(sign);
            let mag = c.unsigned_abs();
            if mag != 1 {
                out.push_str(&mag.to_string());
                out.push('*');
            }
            out.push_str(&w.to_string());
        }
        out
    }
}

impl fmt::Display for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

#[derive(Serialize, Deserialize)]
struct TermDe {
    word: Vec<usize>,
    coeff: i64,
}

// JSON schema: {"terms": [{"word": [..], "coeff": n}, ..]} in canonical order.
impl Serialize for FormalSum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let terms: Vec<TermDe> = self
            .terms
            .iter()
            .map(|(w, &c)| TermDe {
                word: w.letters.clone(),
                coeff: c,
            })
            .collect();
        let mut s = serializer.serialize_struct("FormalSum", 1)?;
        s.serialize_field("terms", &terms)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for FormalSum {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            terms: Vec<TermDe>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mut sum = FormalSum::zero();
        for t in raw.terms {
            let max = t.word.iter().copied().max().unwrap_or(1);
            let word = Word::reduce(&t.word, max).map_err(D::Error::custom)?;
            sum.insert(word, t.coeff);
        }
        Ok(sum)
    }
}

/// All adjacent-distinct words of length `len` over `n_generators` letters,
/// in lexicographic order. There are `N * (N-1)^(len-1)` of them.
pub fn adjacent_distinct_words(n_generators: usize, len: usize) -> Vec<Word> {
    let mut words: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &words {
            for l in 1..=n_generators {
                if w.last() != Some(&l) {
                    let mut ext = w.clone();
                    ext.push(l);
                    next.push(ext);
                }
            }
        }
        words = next;
    }
    words.into_iter().map(Word::from_canonical).collect()
}

/// All words of length `len` whose letters are pairwise distinct; the
/// competing (and refuted) reading of the layer index constraint.
pub fn all_distinct_words(n_generators: usize, len: usize) -> Vec<Word> {
    let mut words: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &words {
            for l in 1..=n_generators {
                if !w.contains(&l) {
                    let mut ext = w.clone();
                    ext.push(l);
                    next.push(ext);
                }
            }
        }
        words = next;
    }
    words.into_iter().map(Word::from_canonical).collect()
}

/// Number of adjacent-distinct words of length `len`: `N * (N-1)^(len-1)`.
pub fn count_layer(n_generators: usize, len: usize) -> u128 {
    if n_generators == 0 || len == 0 {
        return 0;
    }
    let n = n_generators as u128;
    let mut count = n;
    for _ in 1..len {
        count *= n - 1;
    }
    count
}

fn signed_layer(words: Vec<Word>, len: usize) -> FormalSum {
    let sign = if len % 2 == 1 { 1 } else { -1 };
    let mut sum = FormalSum::zero();
    for w in words {
        sum.insert(w, sign);
    }
    sum
}

/// Partial expansion of the complete projector: the sum of the first
/// `order` layers, layer `k` carrying sign `(-1)^(k-1)` over all
/// adjacent-distinct words of length `k`.
pub fn expansion_terms(n_generators: usize, order: usize) -> FormalSum {
    let mut sum = FormalSum::zero();
    for k in 1..=order {
        sum = sum.add(&signed_layer(adjacent_distinct_words(n_generators, k), k));
    }
    sum
}

/// Same partial sums under the all-distinct index reading. Breaks the
/// expansion identity from three generators and order three onward; kept
/// as the executable counterexample for that reading.
pub fn expansion_terms_all_distinct(n_generators: usize, order: usize) -> FormalSum {
    let mut sum = FormalSum::zero();
    for k in 1..=order {
        sum = sum.add(&signed_layer(all_distinct_words(n_generators, k), k));
    }
    sum
}

/// Symbolic `1 - (1 - P)^m` with `P` the generator sum, fully reduced by
/// idempotency. The binomial constant terms cancel the leading identity,
/// so the result is supported on words of length 1 through `m`.
pub fn binomial_expansion(n_generators: usize, power: usize) -> FormalSum {
    let one_minus_p = FormalSum::one().sub(&FormalSum::generator_sum(n_generators));
    let mut acc = FormalSum::one();
    for _ in 0..power {
        acc = acc.mul(&one_minus_p);
    }
    FormalSum::one().sub(&acc)
}

/// One step of the defining recursion: the order-`order` partial sum plus
/// the signed layer of length `order + 1`. Equals `expansion_terms(N, order+1)`.
pub fn recursion_step(n_generators: usize, order: usize) -> FormalSum {
    let next = order + 1;
    expansion_terms(n_generators, order).add(&signed_layer(
        adjacent_distinct_words(n_generators, next),
        next,
    ))
}

/// Outcome of comparing two formal sums; `difference = a - b`.
#[derive(Clone, Debug)]
pub struct FormalEquality {
    pub equal: bool,
    pub difference: FormalSum,
}

pub fn formal_equal(a: &FormalSum, b: &FormalSum) -> FormalEquality {
    let difference = a.sub(b);
    FormalEquality {
        equal: difference.is_zero(),
        difference,
    }
}
