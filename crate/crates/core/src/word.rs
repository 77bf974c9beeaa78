//! The tandem-duplication word automaton.
//!
//! Every TD introduces one new somatic connection, labelled by its TD number.
//! Reading the connections left to right along the genome gives a word; the
//! n-th TD rewrites `P X Q` (where `X = W(a:b)`) into `P X n X Q`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A word over TD numbers. Symbols are stored as integers so that words on
/// ten or more TDs stay unambiguous.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn new(symbols: Vec<u32>) -> Self {
        Word(symbols)
    }

    /// `W_1 = 1`.
    pub fn initial() -> Self {
        Word(vec![1])
    }

    pub fn symbols(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_symbol(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn count_of(&self, symbol: u32) -> usize {
        self.0.iter().filter(|&&s| s == symbol).count()
    }

    pub fn position_of(&self, symbol: u32) -> Option<usize> {
        self.0.iter().position(|&s| s == symbol)
    }

    /// Drops every copy of symbol 1 and shifts the remaining symbols down by one.
    pub fn delete_first_symbol(&self) -> Word {
        Word(self.0.iter().filter(|&&s| s != 1).map(|&s| s - 1).collect())
    }

    pub fn shifted_up(&self) -> Word {
        Word(self.0.iter().map(|&s| s + 1).collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.max_symbol() <= 9 {
            for s in &self.0 {
                write!(f, "{s}")?;
            }
        } else {
            for (i, s) in self.0.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{s}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |message: String| Error::Parse {
            line: 1,
            column: 1,
            message,
        };
        let s = s.trim();
        if s.contains(',') {
            s.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u32>()
                        .map_err(|e| bad(format!("bad symbol {t:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()
                .map(Word)
        } else {
            s.chars()
                .map(|c| {
                    c.to_digit(10)
                        .ok_or_else(|| bad(format!("bad symbol {c:?}")))
                })
                .collect::<Result<Vec<_>>>()
                .map(Word)
        }
    }
}

/// A duplication choice `(a, b)`: 1-based inclusive bounds of the duplicated
/// subword. `b = a - 1` is the empty duplication (a fence step).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DupChoice {
    pub a: usize,
    pub b: usize,
}

impl DupChoice {
    pub fn new(a: usize, b: usize) -> Self {
        DupChoice { a, b }
    }

    pub fn is_fence(&self) -> bool {
        self.b + 1 == self.a
    }

    pub fn is_valid_for(&self, len: usize) -> bool {
        self.a >= 1 && self.a <= len + 1 && self.b + 1 >= self.a && self.b <= len
    }

    /// First choice in lexicographic order for a word of length `len`.
    pub fn first() -> Self {
        DupChoice { a: 1, b: 0 }
    }

    /// Lexicographic successor among the valid choices for a word of length `len`.
    pub fn successor(&self, len: usize) -> Option<Self> {
        if self.b < len {
            Some(DupChoice::new(self.a, self.b + 1))
        } else if self.a <= len {
            Some(DupChoice::new(self.a + 1, self.a))
        } else {
            None
        }
    }

    /// Number of valid choices on a word of length `len`.
    pub fn count_for(len: usize) -> usize {
        (len + 1) * (len + 2) / 2
    }
}

/// Applies one automaton step: `W(1:a-1) · W(a:b) · n · W(a:b) · W(b+1:N)`.
pub fn td_step(word: &Word, choice: DupChoice, new_symbol: u32) -> Result<Word> {
    let len = word.len();
    if !choice.is_valid_for(len) {
        return Err(Error::IndexOutOfRange {
            a: choice.a,
            b: choice.b,
            len,
        });
    }
    let w = word.symbols();
    let (prefix, rest) = w.split_at(choice.a - 1);
    let (dup, suffix) = rest.split_at(choice.b + 1 - choice.a);
    let mut out = Vec::with_capacity(len + dup.len() + 1);
    out.extend_from_slice(prefix);
    out.extend_from_slice(dup);
    out.push(new_symbol);
    out.extend_from_slice(dup);
    out.extend_from_slice(suffix);
    Ok(Word(out))
}

/// A word evolution `W_1 -> ... -> W_n` together with the choices producing it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WordEvolution {
    steps: Vec<DupChoice>,
    words: Vec<Word>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvolutionFile {
    steps: Vec<[usize; 2]>,
}

impl WordEvolution {
    /// The one-TD evolution `[1]`.
    pub fn initial() -> Self {
        WordEvolution {
            steps: Vec::new(),
            words: vec![Word::initial()],
        }
    }

    pub fn from_steps<I: IntoIterator<Item = DupChoice>>(steps: I) -> Result<Self> {
        let mut evo = WordEvolution::initial();
        for (i, c) in steps.into_iter().enumerate() {
            evo.push(c).map_err(|e| Error::Validation {
                step: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(evo)
    }

    /// Recovers the duplication choices from a word sequence.
    pub fn from_words(words: &[Word]) -> Result<Self> {
        let first = words.first().ok_or_else(|| Error::Validation {
            step: 0,
            message: "empty word sequence".into(),
        })?;
        if *first != Word::initial() {
            return Err(Error::Validation {
                step: 0,
                message: format!("first word must be 1, got {first}"),
            });
        }
        let mut evo = WordEvolution::initial();
        for (k, pair) in words.windows(2).enumerate() {
            let symbol = k as u32 + 2;
            let choice = infer_choice(&pair[0], &pair[1], symbol).ok_or_else(|| {
                Error::Validation {
                    step: k + 1,
                    message: format!("{} does not follow from {}", pair[1], pair[0]),
                }
            })?;
            evo.push(choice)?;
        }
        Ok(evo)
    }

    pub fn push(&mut self, choice: DupChoice) -> Result<()> {
        let symbol = self.words.len() as u32 + 1;
        let next = td_step(self.last_word(), choice, symbol)?;
        self.steps.push(choice);
        self.words.push(next);
        Ok(())
    }

    pub(crate) fn pop(&mut self) -> Option<DupChoice> {
        if self.steps.is_empty() {
            return None;
        }
        self.words.pop();
        self.steps.pop()
    }

    /// Number of TDs.
    pub fn td_count(&self) -> usize {
        self.words.len()
    }

    pub fn steps(&self) -> &[DupChoice] {
        &self.steps
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn last_word(&self) -> &Word {
        self.words.last().expect("evolution always holds W_1")
    }

    /// Word `W_k`, 1-based.
    pub fn word(&self, k: usize) -> &Word {
        &self.words[k - 1]
    }

    pub fn to_json(&self) -> String {
        let file = EvolutionFile {
            steps: self.steps.iter().map(|c| [c.a, c.b]).collect(),
        };
        serde_json::to_string(&file).expect("plain integers always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: EvolutionFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::from_steps(file.steps.into_iter().map(|[a, b]| DupChoice::new(a, b)))
    }
}

impl Serialize for WordEvolution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EvolutionFile {
            steps: self.steps.iter().map(|c| [c.a, c.b]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WordEvolution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = EvolutionFile::deserialize(d)?;
        Self::from_steps(file.steps.into_iter().map(|[a, b]| DupChoice::new(a, b)))
            .map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for WordEvolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, w) in self.words.iter().enumerate() {
            if i > 0 {
                f.write_str(" -> ")?;
            }
            write!(f, "{w}")?;
        }
        f.write_str("]")
    }
}

fn infer_choice(prev: &Word, next: &Word, symbol: u32) -> Option<DupChoice> {
    let p = next.position_of(symbol)?;
    if next.count_of(symbol) != 1 {
        return None;
    }
    let (left, right) = (&next.symbols()[..p], &next.symbols()[p + 1..]);
    let max_dup = left.len().min(right.len());
    (0..=max_dup).find_map(|d| {
        let dup = &left[left.len() - d..];
        if dup != &right[..d] {
            return None;
        }
        let rebuilt_len = left.len() + right.len() - d;
        if rebuilt_len != prev.len() {
            return None;
        }
        let matches = left
            .iter()
            .chain(&right[d..])
            .zip(prev.symbols())
            .all(|(x, y)| x == y);
        matches.then(|| DupChoice::new(left.len() - d + 1, left.len()))
    })
}

/// Depth-first stream of all word evolutions on `n` TDs extending a prefix,
/// in lexicographic order of their step sequences.
pub struct WordEvolutions {
    n: usize,
    base: usize,
    current: WordEvolution,
    started: bool,
}

impl WordEvolutions {
    fn descend(&mut self) {
        while self.current.td_count() < self.n {
            self.current
                .push(DupChoice::first())
                .expect("(1,0) is valid for any word");
        }
    }

    fn advance(&mut self) -> bool {
        if !self.started {
            self.started = true;
            if self.n == 0 || self.current.td_count() > self.n {
                return false;
            }
            self.descend();
            return true;
        }
        while self.current.td_count() > self.base {
            let last = self.current.pop().expect("depth above base");
            let len = self.current.last_word().len();
            if let Some(next) = last.successor(len) {
                self.current.push(next).expect("successor is valid");
                self.descend();
                return true;
            }
        }
        false
    }
}

impl Iterator for WordEvolutions {
    type Item = WordEvolution;

    fn next(&mut self) -> Option<WordEvolution> {
        self.advance().then(|| self.current.clone())
    }
}

/// All word evolutions on `n` TDs. `n = 0` yields nothing.
pub fn enumerate_word_evolutions(n: usize) -> WordEvolutions {
    enumerate_with_prefix(n, WordEvolution::initial())
}

/// Evolutions on `n` TDs whose first steps are those of `prefix`. Disjoint
/// prefixes give disjoint streams, which is how work is split across threads.
pub fn enumerate_with_prefix(n: usize, prefix: WordEvolution) -> WordEvolutions {
    WordEvolutions {
        n,
        base: prefix.td_count(),
        current: prefix,
        started: false,
    }
}

/// Word evolutions on `min(depth, n)` TDs, used as work units.
pub fn prefixes(n: usize, depth: usize) -> Vec<WordEvolution> {
    enumerate_word_evolutions(depth.min(n).max(1)).collect()
}

/// Parallel map-reduce over every word evolution on `n` TDs. The result does
/// not depend on the number of threads as long as `reduce` is associative and
/// commutative.
pub fn par_fold_evolutions<T, M, R>(n: usize, identity: T, map: M, reduce: R) -> T
where
    T: Clone + Send + Sync,
    M: Fn(T, &WordEvolution) -> T + Sync,
    R: Fn(T, T) -> T + Sync + Send,
{
    if n == 0 {
        return identity;
    }
    let split = if n > 3 { 3 } else { 1 };
    prefixes(n, split)
        .into_par_iter()
        .map(|p| enumerate_with_prefix(n, p).fold(identity.clone(), |acc, e| map(acc, &e)))
        .reduce(|| identity.clone(), &reduce)
}

/// Memoised table of `w_{m,n}`, the number of words of length `m` on `n` TDs.
#[derive(Debug, Default, Clone)]
pub struct WordCountTable {
    entries: BTreeMap<(usize, usize), BigUint>,
}

impl WordCountTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// `w_{m,n} = Σ_{k=⌊(m-1)/2⌋}^{m-1} (2k - m + 2) w_{k,n-1}`, `w_{0,0} = 1`.
    pub fn get(&mut self, m: usize, n: usize) -> BigUint {
        if n == 0 {
            return if m == 0 { BigUint::one() } else { BigUint::zero() };
        }
        if m < n || (n < usize::BITS as usize && m >= (1usize << n)) {
            return BigUint::zero();
        }
        if let Some(v) = self.entries.get(&(m, n)) {
            return v.clone();
        }
        let mut total = BigUint::zero();
        for k in (m - 1) / 2..m {
            let ways = 2 * k + 2 - m;
            total += self.get(k, n - 1) * BigUint::from(ways);
        }
        self.entries.insert((m, n), total.clone());
        total
    }

    /// Non-zero `(m, w_{m,n})` pairs for one TD count.
    pub fn row(&mut self, n: usize) -> Vec<(usize, BigUint)> {
        let max_len = if n == 0 { 0 } else { (1usize << n.min(40)) - 1 };
        (n..=max_len)
            .map(|m| (m, self.get(m, n)))
            .filter(|(_, v)| !v.is_zero())
            .collect()
    }

    pub fn total(&mut self, n: usize) -> BigUint {
        self.row(n).into_iter().map(|(_, v)| v).sum()
    }
}

pub fn word_count_recursion(m: usize, n: usize) -> BigUint {
    WordCountTable::new().get(m, n)
}

/// `|W_n| = Σ_m w_{m,n}`.
pub fn word_count_total(n: usize) -> BigUint {
    WordCountTable::new().total(n)
}

/// Default cap on `n` for exhaustive word enumeration.
pub const DEFAULT_WORD_GUARD: usize = 6;

/// Terminal words of every evolution on `n` TDs.
#[derive(Debug, Clone)]
pub struct DistinctWords {
    pub words: HashSet<Word>,
    pub evolutions: u64,
    /// Words reached by more than one evolution. Always expected empty.
    pub collisions: Vec<Word>,
}

impl DistinctWords {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Number of distinct words of each length.
    pub fn length_histogram(&self) -> BTreeMap<usize, u64> {
        let mut hist = BTreeMap::new();
        for w in &self.words {
            *hist.entry(w.len()).or_insert(0) += 1;
        }
        hist
    }
}

pub fn distinct_words(n: usize, guard: usize) -> Result<DistinctWords> {
    if n > guard {
        return Err(Error::BudgetExceeded(format!(
            "word enumeration for n={n} exceeds guard n<={guard}"
        )));
    }
    let mut words = HashSet::new();
    let mut collisions = Vec::new();
    let mut evolutions = 0u64;
    for evo in enumerate_word_evolutions(n) {
        evolutions += 1;
        let w = evo.last_word().clone();
        if !words.insert(w.clone()) {
            collisions.push(w);
        }
    }
    Ok(DistinctWords {
        words,
        evolutions,
        collisions,
    })
}

/// Counts-only version of [`distinct_words`] with compact storage and
/// parallel enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordCensus {
    pub n: usize,
    pub evolutions: u64,
    pub distinct: u64,
    pub lengths: BTreeMap<usize, u64>,
}

pub fn word_census(n: usize, guard: usize) -> Result<WordCensus> {
    if n > guard {
        return Err(Error::BudgetExceeded(format!(
            "word enumeration for n={n} exceeds guard n<={guard}"
        )));
    }
    if n > u8::MAX as usize {
        return Err(Error::BudgetExceeded("symbols above 255".into()));
    }
    if n == 0 {
        return Ok(WordCensus {
            n,
            evolutions: 0,
            distinct: 0,
            lengths: BTreeMap::new(),
        });
    }
    let split = if n > 3 { 3 } else { 1 };
    let parts: Vec<(u64, HashSet<Box<[u8]>>)> = prefixes(n, split)
        .into_par_iter()
        .map(|p| {
            let mut set = HashSet::new();
            let mut count = 0u64;
            for e in enumerate_with_prefix(n, p) {
                count += 1;
                set.insert(e.last_word().symbols().iter().map(|&s| s as u8).collect());
            }
            (count, set)
        })
        .collect();
    let evolutions = parts.iter().map(|(c, _)| c).sum();
    let mut all: HashSet<Box<[u8]>> = HashSet::new();
    for (_, set) in parts {
        all.extend(set);
    }
    let mut lengths = BTreeMap::new();
    for w in &all {
        *lengths.entry(w.len()).or_insert(0) += 1;
    }
    Ok(WordCensus {
        n,
        evolutions,
        distinct: all.len() as u64,
        lengths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn step_examples() {
        assert_eq!(td_step(&w("3121"), DupChoice::new(2, 3), 4).unwrap(), w("3124121"));
        assert_eq!(td_step(&w("1"), DupChoice::new(1, 0), 2).unwrap(), w("21"));
        assert_eq!(td_step(&w("1"), DupChoice::new(1, 1), 2).unwrap(), w("121"));
        assert_eq!(td_step(&w("1"), DupChoice::new(2, 1), 2).unwrap(), w("12"));
    }

    #[test]
    fn step_rejects_out_of_range() {
        for c in [(0, 0), (3, 2), (1, 2), (2, 0)] {
            let err = td_step(&w("1"), DupChoice::new(c.0, c.1), 2).unwrap_err();
            assert!(matches!(err, Error::IndexOutOfRange { .. }), "{c:?}");
        }
    }

    #[test]
    fn enumeration_small() {
        assert_eq!(enumerate_word_evolutions(0).count(), 0);
        let one: Vec<_> = enumerate_word_evolutions(1).collect();
        assert_eq!(one, vec![WordEvolution::initial()]);
        let two: Vec<String> = enumerate_word_evolutions(2)
            .map(|e| e.last_word().to_string())
            .collect();
        // (1,0), (1,1), (2,1)
        assert_eq!(two, vec!["21", "121", "12"]);
        assert_eq!(enumerate_word_evolutions(4).count(), 377);
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let steps: Vec<Vec<DupChoice>> = enumerate_word_evolutions(4)
            .map(|e| e.steps().to_vec())
            .collect();
        assert!(steps.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn prefix_streams_partition() {
        let all: HashSet<_> = enumerate_word_evolutions(4).collect();
        let mut union = HashSet::new();
        let mut total = 0;
        for p in prefixes(4, 2) {
            for e in enumerate_with_prefix(4, p) {
                total += 1;
                union.insert(e);
            }
        }
        assert_eq!(total, all.len());
        assert_eq!(union, all);
    }

    #[test]
    fn recursion_values() {
        assert_eq!(word_count_recursion(5, 3), BigUint::from(5u32));
        assert_eq!(word_count_recursion(1, 1), BigUint::from(1u32));
        assert_eq!(word_count_recursion(0, 0), BigUint::from(1u32));
        assert_eq!(word_count_recursion(3, 0), BigUint::zero());
        assert_eq!(word_count_recursion(2, 3), BigUint::zero());
    }

    #[test]
    fn length_seven_at_three_by_brute_force() {
        let words = distinct_words(3, DEFAULT_WORD_GUARD).unwrap();
        let n7 = words.words.iter().filter(|w| w.len() == 7).count();
        assert_eq!(n7, 1);
        assert_eq!(word_count_recursion(7, 3), BigUint::from(n7));
        let n5: HashSet<String> = words
            .words
            .iter()
            .filter(|w| w.len() == 5)
            .map(|w| w.to_string())
            .collect();
        let expected: HashSet<String> = ["12312", "21321", "13121", "12321", "12131"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(n5, expected);
    }

    #[test]
    fn totals() {
        let expect = [1u64, 3, 22, 377, 15315, 1539281];
        for (i, &e) in expect.iter().enumerate() {
            assert_eq!(word_count_total(i + 1), BigUint::from(e));
        }
    }

    #[test]
    fn distinct_words_guard() {
        assert!(matches!(distinct_words(7, 6), Err(Error::BudgetExceeded(_))));
        let two = distinct_words(2, 6).unwrap();
        assert_eq!(two.len(), 3);
        assert!(two.collisions.is_empty());
        assert_eq!(distinct_words(3, 6).unwrap().len(), 22);
    }

    #[test]
    fn census_matches_set() {
        let set = distinct_words(4, 6).unwrap();
        let census = word_census(4, 6).unwrap();
        assert_eq!(census.distinct, set.len() as u64);
        assert_eq!(census.evolutions, set.evolutions);
        assert_eq!(census.lengths, set.length_histogram());
    }

    #[test]
    fn json_examples() {
        let e = WordEvolution::from_json(r#"{"steps":[[1,1],[1,0],[2,3]]}"#).unwrap();
        let words: Vec<String> = e.words().iter().map(|w| w.to_string()).collect();
        assert_eq!(words, ["1", "121", "3121", "3124121"]);
        let trivial = WordEvolution::from_json(r#"{"steps":[]}"#).unwrap();
        assert_eq!(trivial, WordEvolution::initial());
        assert_eq!(trivial.to_json(), r#"{"steps":[]}"#);
    }

    #[test]
    fn json_errors() {
        let err = WordEvolution::from_json(r#"{"steps":[[2,2],[1,1],[2,3]]}"#).unwrap_err();
        assert!(matches!(err, Error::Validation { step: 1, .. }), "{err:?}");
        let err = WordEvolution::from_json("{\"steps\":\n[[1,1],").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(WordEvolution::from_json(r#"{"stepz":[]}"#).is_err());
    }

    #[test]
    fn from_words_recovers_steps() {
        for e in enumerate_word_evolutions(4) {
            assert_eq!(WordEvolution::from_words(e.words()).unwrap(), e);
        }
        assert!(WordEvolution::from_words(&[w("1"), w("22")]).is_err());
        assert!(WordEvolution::from_words(&[w("2")]).is_err());
    }

    #[test]
    fn rendering_switches_to_commas() {
        let big = Word::new(vec![1, 10, 2]);
        assert_eq!(big.to_string(), "1,10,2");
        assert_eq!("1,10,2".parse::<Word>().unwrap(), big);
        assert_eq!(w("3124121").to_string(), "3124121");
    }

    #[test]
    fn successor_covers_all_choices() {
        for len in 0..6 {
            let mut c = Some(DupChoice::first());
            let mut count = 0;
            while let Some(x) = c {
                assert!(x.is_valid_for(len));
                count += 1;
                c = x.successor(len);
            }
            assert_eq!(count, DupChoice::count_for(len));
        }
    }
}
