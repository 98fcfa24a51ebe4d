//! Alphabets, exact rational source distributions, types, type classes and
//! joint types.
//!
//! Sequences are slices of symbol indices (`usize`) into an [`Alphabet`].
//! Counting is exact ([`BigUint`]) with a `u128` fast path; [`ln_multinomial`]
//! gives the log-domain counterpart used once block lengths grow past what
//! exact enumeration can handle.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Rational;

/// Default cap on the number of objects any enumeration may produce.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1_000_000;

/// An ordered finite set of symbol labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet must be nonempty".into()));
        }
        let mut seen = HashSet::new();
        for s in &symbols {
            if !seen.insert(s.as_str()) {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol {s:?}")));
            }
        }
        Ok(Self { symbols })
    }

    /// Alphabet `{"0", "1", ..., size-1}`.
    pub fn indexed(size: usize) -> Result<Self> {
        Self::new((0..size).map(|i| i.to_string()))
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbol(&self, index: usize) -> Option<&str> {
        self.symbols.get(index).map(String::as_str)
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    /// Maps labels to indices, failing on the first unknown label.
    pub fn encode(&self, labels: &[&str]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| {
                self.index_of(l)
                    .ok_or_else(|| Error::InvalidAlphabet(format!("unknown symbol {l:?}")))
            })
            .collect()
    }
}

/// Parses `"num/den"` or a bare integer into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse rational {text:?}"));
    match text.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(text.parse().map_err(|_| bad())?)),
    }
}

/// Formats a rational as `"num/den"` (always with an explicit denominator).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Least positive `n0` such that `n0 * p` is an integer for every entry.
///
/// Rejects negative entries and vectors that do not sum to exactly one.
pub fn lattice_constant(probs: &[Rational]) -> Result<u64> {
    if probs.is_empty() {
        return Err(Error::InvalidPmf("empty pmf".into()));
    }
    if let Some(p) = probs.iter().find(|p| **p < Rational::zero()) {
        return Err(Error::InvalidPmf(format!("negative probability {p}")));
    }
    let sum: Rational = probs.iter().sum();
    if sum != Rational::one() {
        return Err(Error::InvalidPmf(format!(
            "probabilities sum to {sum}, not 1"
        )));
    }
    // Ratio keeps its fields reduced, so the lcm of denominators is minimal.
    let n0 = probs.iter().fold(1i64, |acc, p| acc.lcm(p.denom()));
    Ok(n0 as u64)
}

/// An exact rational source distribution together with its lattice constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPmf {
    probs: Vec<Rational>,
    n0: u64,
}

impl RationalPmf {
    pub fn new(probs: Vec<Rational>) -> Result<Self> {
        let n0 = lattice_constant(&probs)?;
        Ok(Self { probs, n0 })
    }

    pub fn parse(entries: &[impl AsRef<str>]) -> Result<Self> {
        let probs = entries
            .iter()
            .map(|e| parse_rational(e.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(probs)
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidPmf("empty pmf".into()));
        }
        Self::new(vec![Rational::new(1, size as i64); size])
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn n0(&self) -> u64 {
        self.n0
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.probs
            .iter()
            .map(|p| *p.numer() as f64 / *p.denom() as f64)
            .collect()
    }

    /// The exact type `n' * p` at a block length on the lattice `n0 * N`.
    pub fn type_at(&self, blocklength: usize) -> Result<TypeVector> {
        if blocklength == 0 || !(blocklength as u64).is_multiple_of(self.n0) {
            return Err(Error::InvalidType(format!(
                "block length {blocklength} is not a positive multiple of n0 = {}",
                self.n0
            )));
        }
        let counts = self
            .probs
            .iter()
            .map(|p| (p * Rational::from_integer(blocklength as i64)).to_integer() as usize)
            .collect();
        TypeVector::new(counts)
    }
}

/// Symbol counts of a sequence at block length `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeVector {
    counts: Vec<usize>,
    n: usize,
}

impl TypeVector {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidType("empty count vector".into()));
        }
        let n: usize = counts.iter().sum();
        if n == 0 {
            return Err(Error::InvalidType("block length must be positive".into()));
        }
        Ok(Self { counts, n })
    }

    /// The type of `seq` over an alphabet of `alphabet_size` symbols.
    pub fn of_sequence(seq: &[usize], alphabet_size: usize) -> Result<Self> {
        let mut counts = vec![0usize; alphabet_size];
        for &s in seq {
            *counts.get_mut(s).ok_or_else(|| {
                Error::InvalidType(format!(
                    "symbol {s} outside alphabet of size {alphabet_size}"
                ))
            })? += 1;
        }
        Self::new(counts)
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    /// The lexicographically smallest member of the type class.
    pub fn canonical_sequence(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(s, &c)| std::iter::repeat_n(s, c))
            .collect()
    }

    pub fn class_size(&self) -> BigUint {
        multinomial(&self.counts)
    }

    pub fn ln_class_size(&self) -> f64 {
        ln_multinomial(&self.counts)
    }

    /// Semicolon-separated counts, e.g. `2;1;3` (safe inside CSV cells).
    pub fn compact(&self) -> String {
        self.counts
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Members of the type class in lexicographic order.
    pub fn members(&self) -> TypeClassIter {
        TypeClassIter {
            next: Some(self.canonical_sequence()),
        }
    }
}

impl fmt::Display for TypeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// `|T_t| = n! / prod(counts!)`.
pub fn type_class_size(t: &TypeVector) -> BigUint {
    t.class_size()
}

/// Multinomial coefficient `(sum counts)! / prod(counts!)`, exact.
pub fn multinomial(counts: &[usize]) -> BigUint {
    multinomial_u128(counts)
        .map(BigUint::from)
        .unwrap_or_else(|| multinomial_big(counts))
}

/// Product of binomials `C(c1, c1) C(c1+c2, c2) ...`; every partial product is
/// itself a multinomial, so it never exceeds the final value.
fn multinomial_u128(counts: &[usize]) -> Option<u128> {
    let mut acc: u128 = 1;
    let mut total: u128 = 0;
    for &c in counts {
        for i in 1..=c as u128 {
            total += 1;
            // acc = prev * C(total-1, i-1), so acc * total is divisible by i.
            acc = acc.checked_mul(total)? / i;
        }
    }
    Some(acc)
}

fn multinomial_big(counts: &[usize]) -> BigUint {
    let mut acc = BigUint::one();
    let mut total = 0u64;
    for &c in counts {
        for i in 1..=c as u64 {
            total += 1;
            acc = acc * total / i;
        }
    }
    acc
}

/// Natural log of the multinomial coefficient via log-gamma.
pub fn ln_multinomial(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    ln_factorial(n) - counts.iter().map(|&c| ln_factorial(c)).sum::<f64>()
}

pub fn ln_factorial(k: usize) -> f64 {
    if k < 2 {
        0.0
    } else {
        libm::lgamma(k as f64 + 1.0)
    }
}

/// Binomial coefficient `C(n, k)` as exact big integer.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn check_budget(what: &'static str, count: &BigUint, budget: u64) -> Result<()> {
    if *count > BigUint::from(budget) {
        return Err(Error::BudgetExceeded {
            what,
            count: count.to_string(),
            budget,
        });
    }
    Ok(())
}

/// Number of types at block length `n` over `alphabet_size` symbols.
pub fn type_count(alphabet_size: usize, n: usize) -> BigUint {
    binomial((n + alphabet_size - 1) as u64, (alphabet_size - 1) as u64)
}

/// All compositions of `n` into `alphabet_size` nonnegative parts, in
/// lexicographic order of the count vectors.
pub fn enumerate_types(alphabet_size: usize, n: usize, budget: u64) -> Result<Vec<TypeVector>> {
    if alphabet_size == 0 || n == 0 {
        return Err(Error::InvalidArgument(
            "alphabet size and block length must be positive".into(),
        ));
    }
    check_budget("type set", &type_count(alphabet_size, n), budget)?;
    let mut out = Vec::new();
    let mut counts = vec![0usize; alphabet_size];
    fill_compositions(&mut counts, 0, n, &mut out);
    Ok(out)
}

fn fill_compositions(
    counts: &mut [usize],
    pos: usize,
    remaining: usize,
    out: &mut Vec<TypeVector>,
) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        out.push(TypeVector {
            counts: counts.to_vec(),
            n: counts.iter().sum(),
        });
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        fill_compositions(counts, pos + 1, remaining - c, out);
    }
}

/// Count matrix of an aligned pair of sequences, stored row-major
/// (`rows` input symbols by `cols` output symbols).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JointType {
    rows: usize,
    cols: usize,
    counts: Vec<usize>,
    n: usize,
}

impl JointType {
    pub fn new(rows: usize, cols: usize, counts: Vec<usize>) -> Result<Self> {
        if rows == 0 || cols == 0 || counts.len() != rows * cols {
            return Err(Error::InvalidType(format!(
                "joint type needs {rows}x{cols} entries, got {}",
                counts.len()
            )));
        }
        let n = counts.iter().sum();
        if n == 0 {
            return Err(Error::InvalidType("block length must be positive".into()));
        }
        Ok(Self {
            rows,
            cols,
            counts,
            n,
        })
    }

    pub fn of_pair(x: &[usize], y: &[usize], rows: usize, cols: usize) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        let mut counts = vec![0usize; rows * cols];
        for (&a, &b) in x.iter().zip(y) {
            if a >= rows || b >= cols {
                return Err(Error::InvalidType(format!(
                    "pair ({a},{b}) outside {rows}x{cols}"
                )));
            }
            counts[a * cols + b] += 1;
        }
        Self::new(rows, cols, counts)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn get(&self, x: usize, y: usize) -> usize {
        self.counts[x * self.cols + y]
    }

    pub fn row_type(&self) -> TypeVector {
        let counts = (0..self.rows)
            .map(|x| self.counts[x * self.cols..(x + 1) * self.cols].iter().sum())
            .collect();
        TypeVector { counts, n: self.n }
    }

    pub fn col_type(&self) -> TypeVector {
        let counts = (0..self.cols)
            .map(|y| (0..self.rows).map(|x| self.get(x, y)).sum())
            .collect();
        TypeVector { counts, n: self.n }
    }

    /// Number of sequence pairs with this joint type, `n! / prod M[x,y]!`.
    pub fn pairs(&self) -> BigUint {
        multinomial(&self.counts)
    }
}

/// Number of aligned sequence pairs whose joint type is `j`.
pub fn pairs_with_joint_type(j: &JointType) -> BigUint {
    j.pairs()
}

/// Visits every count matrix with the given margins in lexicographic
/// row-major order. The slice handed to `visit` is row-major with
/// `col.alphabet_size()` columns. Stops early and returns the error if
/// `visit` fails.
pub fn visit_joint_types<F>(row: &TypeVector, col: &TypeVector, mut visit: F) -> Result<()>
where
    F: FnMut(&[usize]) -> Result<()>,
{
    if row.n != col.n {
        return Err(Error::LengthMismatch {
            expected: row.n,
            found: col.n,
        });
    }
    let rows = row.alphabet_size();
    let cols = col.alphabet_size();
    let mut cells = vec![0usize; rows * cols];
    let mut row_left = row.counts.clone();
    let mut col_left = col.counts.clone();
    fill_joint(
        0,
        rows,
        cols,
        &mut cells,
        &mut row_left,
        &mut col_left,
        &mut visit,
    )
}

fn fill_joint<F>(
    cell: usize,
    rows: usize,
    cols: usize,
    cells: &mut [usize],
    row_left: &mut [usize],
    col_left: &mut [usize],
    visit: &mut F,
) -> Result<()>
where
    F: FnMut(&[usize]) -> Result<()>,
{
    if cell == rows * cols {
        return visit(cells);
    }
    let (x, y) = (cell / cols, cell % cols);
    let later_cols: usize = col_left[y + 1..].iter().sum();
    let lo = row_left[x].saturating_sub(later_cols);
    let hi = row_left[x].min(col_left[y]);
    for v in lo..=hi {
        cells[cell] = v;
        row_left[x] -= v;
        col_left[y] -= v;
        let res = fill_joint(cell + 1, rows, cols, cells, row_left, col_left, visit);
        row_left[x] += v;
        col_left[y] += v;
        res?;
    }
    cells[cell] = 0;
    Ok(())
}

/// Every joint type with row margin `row` and column margin `col`, each once,
/// in lexicographic row-major order. Fails rather than truncating when more
/// than `budget` matrices exist.
pub fn enumerate_joint_types(
    row: &TypeVector,
    col: &TypeVector,
    budget: u64,
) -> Result<Vec<JointType>> {
    let rows = row.alphabet_size();
    let cols = col.alphabet_size();
    let mut out = Vec::new();
    visit_joint_types(row, col, |cells| {
        if out.len() as u64 >= budget {
            return Err(Error::BudgetExceeded {
                what: "joint type set",
                count: format!("more than {budget}"),
                budget,
            });
        }
        out.push(JointType {
            rows,
            cols,
            counts: cells.to_vec(),
            n: row.n,
        });
        Ok(())
    })?;
    Ok(out)
}

/// Uniform draw from the type class of `t`: Fisher-Yates shuffle of the
/// canonical member.
pub fn sample_uniform<R: Rng + ?Sized>(t: &TypeVector, rng: &mut R) -> Vec<usize> {
    let mut seq = t.canonical_sequence();
    seq.shuffle(rng);
    seq
}

/// Lexicographic iterator over a type class (multiset permutations).
pub struct TypeClassIter {
    next: Option<Vec<usize>>,
}

impl Iterator for TypeClassIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_permutation(&mut succ) {
            self.next = Some(succ);
        }
        Some(current)
    }
}

/// Advances `seq` to its lexicographic successor among rearrangements;
/// returns `false` (leaving `seq` untouched) at the last one.
pub fn next_permutation(seq: &mut [usize]) -> bool {
    if seq.len() < 2 {
        return false;
    }
    let mut i = seq.len() - 1;
    while i > 0 && seq[i - 1] >= seq[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = seq.len() - 1;
    while seq[j] <= seq[i - 1] {
        j -= 1;
    }
    seq.swap(i - 1, j);
    seq[i..].reverse();
    true
}

/// Calls `visit` on every member of the type class of `t` in lexicographic
/// order, reusing one buffer.
pub fn for_each_member<F: FnMut(&[usize])>(t: &TypeVector, mut visit: F) {
    let mut seq = t.canonical_sequence();
    loop {
        visit(&seq);
        if !next_permutation(&mut seq) {
            break;
        }
    }
}

/// A rearrangement of positions `0..n` (zero-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n || std::mem::replace(&mut seen[m], true) {
                return Err(Error::InvalidArgument(format!(
                    "{mapping:?} is not a bijection on 0..{n}"
                )));
            }
        }
        Ok(Self { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut mapping: Vec<usize> = (0..n).collect();
        mapping.shuffle(rng);
        Self { mapping }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    /// `out[i] = seq[perm(i)]`.
    pub fn apply<T: Copy>(&self, seq: &[T]) -> Result<Vec<T>> {
        if seq.len() != self.mapping.len() {
            return Err(Error::LengthMismatch {
                expected: self.mapping.len(),
                found: seq.len(),
            });
        }
        Ok(self.mapping.iter().map(|&i| seq[i]).collect())
    }

    /// A permutation carrying `from` onto `to` (`to = perm.apply(from)`),
    /// which exists iff both have the same type.
    pub fn carrying(from: &[usize], to: &[usize]) -> Option<Self> {
        if from.len() != to.len() {
            return None;
        }
        let symbols = from.iter().chain(to).copied().max().map_or(0, |m| m + 1);
        let mut slots: Vec<Vec<usize>> = vec![Vec::new(); symbols];
        for (i, &s) in from.iter().enumerate().rev() {
            slots[s].push(i);
        }
        let mapping = to
            .iter()
            .map(|&s| slots[s].pop())
            .collect::<Option<Vec<_>>>()?;
        Some(Self { mapping })
    }
}

pub fn apply_permutation<T: Copy>(perm: &Permutation, seq: &[T]) -> Result<Vec<T>> {
    perm.apply(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tv(c: &[usize]) -> TypeVector {
        TypeVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn lattice_constant_examples() {
        let r = |s: &[&str]| RationalPmf::parse(s).unwrap().n0();
        assert_eq!(r(&["1/2", "1/2"]), 2);
        assert_eq!(r(&["1/3", "2/3"]), 3);
        assert_eq!(r(&["1/6", "1/3", "1/2"]), 6);
        assert_eq!(r(&["1", "0"]), 1);
        assert_eq!(r(&["2/4", "3/6"]), 2);
    }

    #[test]
    fn lattice_constant_rejects_bad_pmfs() {
        assert!(RationalPmf::parse(&["1/2", "1/3"]).is_err());
        assert!(RationalPmf::parse(&["3/2", "-1/2"]).is_err());
        assert!(RationalPmf::parse(&["x"]).is_err());
        assert!(lattice_constant(&[]).is_err());
    }

    #[test]
    fn type_at_lattice_points() {
        let p = RationalPmf::parse(&["1/6", "1/3", "1/2"]).unwrap();
        assert_eq!(p.type_at(12).unwrap().counts(), &[2, 4, 6]);
        assert!(p.type_at(8).is_err());
        assert!(p.type_at(0).is_err());
    }

    #[test]
    fn class_size_examples() {
        assert_eq!(tv(&[1, 1]).class_size(), BigUint::from(2u32));
        assert_eq!(tv(&[2, 2]).class_size(), BigUint::from(6u32));
        assert_eq!(tv(&[1, 2, 3]).class_size(), BigUint::from(60u32));
    }

    #[test]
    fn multinomial_big_path_matches_fast_path() {
        for counts in [vec![30, 30, 30], vec![17, 1, 0, 5], vec![40, 40]] {
            let fast = multinomial_u128(&counts).map(BigUint::from);
            let big = multinomial_big(&counts);
            if let Some(fast) = fast {
                assert_eq!(fast, big);
            }
        }
        // 200!/(100!100!) overflows u128.
        assert!(multinomial_u128(&[100, 100]).is_none());
        assert_eq!(multinomial(&[100, 100]), binomial(200, 100));
    }

    #[test]
    fn enumerate_types_examples() {
        let t = enumerate_types(2, 2, DEFAULT_ENUMERATION_BUDGET).unwrap();
        let counts: Vec<_> = t.iter().map(|t| t.counts().to_vec()).collect();
        assert_eq!(counts, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(enumerate_types(2, 4, 100).unwrap().len(), 5);
        assert_eq!(enumerate_types(3, 2, 100).unwrap().len(), 6);
    }

    #[test]
    fn enumerate_types_refuses_over_budget() {
        let err = enumerate_types(3, 10, 10).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn joint_type_examples() {
        let j = enumerate_joint_types(&tv(&[1, 1]), &tv(&[1, 1]), 100).unwrap();
        let got: Vec<_> = j.iter().map(|j| j.counts().to_vec()).collect();
        assert_eq!(got, vec![vec![0, 1, 1, 0], vec![1, 0, 0, 1]]);

        let j = enumerate_joint_types(&tv(&[2, 2]), &tv(&[2, 2]), 100).unwrap();
        assert_eq!(j.len(), 3);

        let j = enumerate_joint_types(&tv(&[2, 0]), &tv(&[0, 2]), 100).unwrap();
        assert_eq!(j.len(), 1);
        assert_eq!(j[0].counts(), &[0, 2, 0, 0]);
    }

    #[test]
    fn joint_type_budget_is_a_hard_error() {
        let row = tv(&[4, 4, 4]);
        let err = enumerate_joint_types(&row, &row, 3).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn pairs_examples() {
        let j = |c: &[usize]| JointType::new(2, 2, c.to_vec()).unwrap().pairs();
        assert_eq!(j(&[1, 0, 0, 1]), BigUint::from(2u32));
        assert_eq!(j(&[1, 1, 1, 1]), BigUint::from(24u32));
        assert_eq!(j(&[2, 0, 0, 2]), BigUint::from(6u32));
    }

    #[test]
    fn margins_round_trip() {
        let j = JointType::of_pair(&[0, 1, 2, 2], &[1, 1, 0, 1], 3, 2).unwrap();
        assert_eq!(j.row_type().counts(), &[1, 1, 2]);
        assert_eq!(j.col_type().counts(), &[1, 3]);
    }

    #[test]
    fn class_iterator_visits_every_member_once() {
        let t = tv(&[2, 1, 1]);
        let members: Vec<_> = t.members().collect();
        assert_eq!(members.len(), 12);
        let unique: HashSet<_> = members.iter().cloned().collect();
        assert_eq!(unique.len(), 12);
        assert!(members.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sampling_small_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut hits = 0;
        for _ in 0..2000 {
            let s = sample_uniform(&tv(&[1, 1]), &mut rng);
            assert!(s == vec![0, 1] || s == vec![1, 0]);
            hits += usize::from(s == vec![0, 1]);
        }
        assert!((800..1200).contains(&hits));
        for _ in 0..10 {
            assert_eq!(sample_uniform(&tv(&[2, 0]), &mut rng), vec![0, 0]);
        }
    }

    #[test]
    fn permutation_examples() {
        let swap = Permutation::new(vec![1, 0]).unwrap();
        assert_eq!(swap.apply(&['a', 'b']).unwrap(), vec!['b', 'a']);
        let id = Permutation::identity(3);
        assert_eq!(id.apply(&[2, 0, 1]).unwrap(), vec![2, 0, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = Permutation::random(5, &mut rng);
        assert_eq!(p.apply(&[4; 5]).unwrap(), vec![4; 5]);
        assert!(p.apply(&[1, 2]).is_err());
        assert!(Permutation::new(vec![0, 0]).is_err());
    }

    #[test]
    fn carrying_permutation() {
        let from = [0, 1, 1, 2];
        let to = [1, 2, 0, 1];
        let p = Permutation::carrying(&from, &to).unwrap();
        assert_eq!(p.apply(&from).unwrap(), to);
        assert!(Permutation::carrying(&[0, 0], &[0, 1]).is_none());
    }
}
