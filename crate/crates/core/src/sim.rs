//! Direct simulation of the TD process on a genome made of reference
//! intervals, with CNVs, TD-Graphs and TD-Evolutions deduplicated by hash.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::xxh3_128;

use crate::error::{Error, Result};
use crate::tree::BreakpointId;
use crate::word::{DupChoice, Word, WordEvolution};

pub const DEFAULT_MAX_N: usize = 4;
pub const DEEP_MAX_N: usize = 5;
/// Rough in-memory cost of one deduplicated record across all tally sets.
pub const BYTES_PER_RECORD: u64 = 64;

/// Genome copy of the reference interval between two consecutive reference
/// breakpoints.
pub type Interval = (BreakpointId, BreakpointId);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutOrder {
    AFirst,
    BFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TdChoice {
    pub g1: usize,
    pub g2: usize,
    pub order_flag: Option<CutOrder>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenomeState {
    reference: Vec<BreakpointId>,
    genome: Vec<Interval>,
    /// Genome after each TD, at the resolution of that moment.
    snapshots: Vec<Vec<Interval>>,
    steps: Vec<DupChoice>,
}

impl Default for GenomeState {
    fn default() -> Self {
        Self::initial()
    }
}

impl GenomeState {
    pub fn initial() -> Self {
        GenomeState {
            reference: vec![BreakpointId::ROOT_A, BreakpointId::ROOT_B],
            genome: vec![(BreakpointId::ROOT_A, BreakpointId::ROOT_B)],
            snapshots: Vec::new(),
            steps: Vec::new(),
        }
    }

    pub fn td_count(&self) -> usize {
        self.snapshots.len()
    }

    /// Breakpoints in reference order, flanked by `0_a` and `0_b`.
    pub fn reference(&self) -> &[BreakpointId] {
        &self.reference
    }

    pub fn genome(&self) -> &[Interval] {
        &self.genome
    }

    pub fn word_evolution(&self) -> Option<WordEvolution> {
        if self.snapshots.is_empty() {
            return None;
        }
        Some(WordEvolution::from_steps(self.steps.iter().copied()).expect("simulated steps are valid"))
    }

    fn position(&self, id: BreakpointId) -> usize {
        self.reference
            .iter()
            .position(|&x| x == id)
            .expect("breakpoint in reference")
    }

    /// Genome rendered with one letter per final reference interval.
    pub fn letters(&self) -> String {
        self.genome
            .iter()
            .flat_map(|&(l, r)| (self.position(l)..self.position(r)).map(|i| (b'A' + i as u8) as char))
            .collect()
    }
}

fn is_junction(left: Interval, right: Interval) -> bool {
    left.1 != right.0
}

fn junctions(genome: &[Interval]) -> impl Iterator<Item = (BreakpointId, BreakpointId)> + '_ {
    genome
        .windows(2)
        .filter(|w| is_junction(w[0], w[1]))
        .map(|w| (w[0].1, w[1].0))
}

pub fn enumerate_choices(s: &GenomeState) -> Vec<TdChoice> {
    let len = s.genome.len();
    let mut out = Vec::with_capacity(len * (len + 1) / 2 + len);
    for g1 in 0..len {
        for g2 in g1..len {
            if g1 != g2 && s.genome[g1] == s.genome[g2] {
                for flag in [CutOrder::AFirst, CutOrder::BFirst] {
                    out.push(TdChoice {
                        g1,
                        g2,
                        order_flag: Some(flag),
                    });
                }
            } else {
                out.push(TdChoice {
                    g1,
                    g2,
                    order_flag: None,
                });
            }
        }
    }
    out
}

pub fn apply_td(s: &GenomeState, c: TdChoice) -> Result<GenomeState> {
    let len = s.genome.len();
    if c.g1 > c.g2 || c.g2 >= len {
        return Err(Error::InvalidChoice(format!(
            "segments ({}, {}) on a genome of {len}",
            c.g1, c.g2
        )));
    }
    let same_interval = s.genome[c.g1] == s.genome[c.g2];
    if c.order_flag.is_some() != (same_interval && c.g1 != c.g2) {
        return Err(Error::InvalidChoice("order flag does not match the segments".into()));
    }
    let k = s.td_count() as u32 + 1;
    let (na, nb) = (BreakpointId::a(k), BreakpointId::b(k));

    let mut reference = s.reference.clone();
    let insert_after = |reference: &mut Vec<BreakpointId>, left: BreakpointId, new: &[BreakpointId]| {
        let i = reference.iter().position(|&x| x == left).expect("interval start in reference");
        for (j, &x) in new.iter().enumerate() {
            reference.insert(i + 1 + j, x);
        }
    };
    if same_interval {
        let pair = if c.order_flag == Some(CutOrder::BFirst) { [nb, na] } else { [na, nb] };
        insert_after(&mut reference, s.genome[c.g1].0, &pair);
    } else {
        insert_after(&mut reference, s.genome[c.g1].0, &[na]);
        insert_after(&mut reference, s.genome[c.g2].0, &[nb]);
    }
    let mut seen = HashSet::with_capacity(reference.len());
    assert!(reference.iter().all(|x| seen.insert(*x)), "breakpoint reused");

    // refine every copy of the split intervals
    let split = |iv: Interval| -> Vec<Interval> {
        let lo = reference.iter().position(|&x| x == iv.0).unwrap();
        let hi = reference.iter().position(|&x| x == iv.1).unwrap();
        reference[lo..=hi].windows(2).map(|w| (w[0], w[1])).collect()
    };
    let mut refined = Vec::with_capacity(len + 8);
    let (mut start, mut end) = (None, None);
    for (i, &iv) in s.genome.iter().enumerate() {
        for piece in split(iv) {
            if i == c.g1 && piece.0 == na {
                start = Some(refined.len());
            }
            if i == c.g2 && piece.1 == nb {
                end = Some(refined.len());
            }
            refined.push(piece);
        }
    }
    let (start, end) = match (start, end) {
        (Some(a), Some(b)) if a <= b => (a, b),
        _ => return Err(Error::InvalidChoice("cut points out of order".into())),
    };

    let junctions_before = |t: usize| (0..t).filter(|&i| is_junction(refined[i], refined[i + 1])).count();
    let mut steps = s.steps.clone();
    if k >= 2 {
        steps.push(DupChoice::new(junctions_before(start) + 1, junctions_before(end)));
    }

    let mut genome = Vec::with_capacity(refined.len() + end - start + 1);
    genome.extend_from_slice(&refined[..=end]);
    genome.extend_from_slice(&refined[start..]);
    let mut snapshots = s.snapshots.clone();
    snapshots.push(genome.clone());
    Ok(GenomeState {
        reference,
        genome,
        snapshots,
        steps,
    })
}

pub fn word_of(s: &GenomeState) -> Word {
    Word::new(junctions(&s.genome).map(|(from, _)| from.td).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Reversed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Connection {
    pub from: BreakpointId,
    pub to: BreakpointId,
    pub direction: Direction,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TdGraph {
    pub cnv: Vec<u32>,
    pub connections: Vec<Connection>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TdEvolutionRecord {
    pub word_evolution: WordEvolution,
    pub reference: Vec<BreakpointId>,
    pub graphs: Vec<TdGraph>,
    /// Genome after each TD as maximal reference-contiguous pieces, each a
    /// half-open range of final reference intervals.
    pub layouts: Vec<Vec<(usize, usize)>>,
}

impl TdEvolutionRecord {
    pub fn from_state(s: &GenomeState) -> Option<Self> {
        let word_evolution = s.word_evolution()?;
        let pos = |id: BreakpointId| s.position(id);
        let regions = s.reference.len() - 1;
        let graphs = s
            .snapshots
            .iter()
            .map(|genome| {
                let mut cnv = vec![0u32; regions];
                for &(l, r) in genome {
                    for c in &mut cnv[pos(l)..pos(r)] {
                        *c += 1;
                    }
                }
                let mut connections: Vec<Connection> = junctions(genome)
                    .map(|(from, to)| Connection {
                        from,
                        to,
                        direction: if pos(from) > pos(to) {
                            Direction::Reversed
                        } else {
                            Direction::Forward
                        },
                    })
                    .collect();
                connections.sort_by_key(|c| (pos(c.from), pos(c.to)));
                connections.dedup();
                TdGraph { cnv, connections }
            })
            .collect();
        let layouts = s
            .snapshots
            .iter()
            .map(|genome| {
                let mut pieces: Vec<(usize, usize)> = Vec::new();
                for (i, &(l, r)) in genome.iter().enumerate() {
                    if i > 0 && !is_junction(genome[i - 1], (l, r)) {
                        pieces.last_mut().unwrap().1 = pos(r);
                    } else {
                        pieces.push((pos(l), pos(r)));
                    }
                }
                pieces
            })
            .collect();
        Some(TdEvolutionRecord {
            word_evolution,
            reference: s.reference.clone(),
            graphs,
            layouts,
        })
    }

    pub fn final_graph(&self) -> &TdGraph {
        self.graphs.last().expect("at least one TD")
    }

    fn position(&self, id: BreakpointId) -> usize {
        self.reference.iter().position(|&x| x == id).unwrap()
    }

    fn graph_bytes(&self, g: &TdGraph, out: &mut Vec<u8>) {
        out.extend_from_slice(&(g.cnv.len() as u32).to_le_bytes());
        for &c in &g.cnv {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out.extend_from_slice(&(g.connections.len() as u32).to_le_bytes());
        for c in &g.connections {
            out.extend_from_slice(&(self.position(c.from) as u16).to_le_bytes());
            out.extend_from_slice(&(self.position(c.to) as u16).to_le_bytes());
        }
    }

    /// Fixed byte layout of the final TD-Graph, independent of TD labels.
    pub fn final_graph_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.graph_bytes(self.final_graph(), &mut out);
        out
    }

    /// Fixed byte layout of the TD-Graph sequence alone, every graph
    /// expressed over the final reference intervals.
    pub fn graph_sequence_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.graphs.len() as u32).to_le_bytes());
        for g in &self.graphs {
            self.graph_bytes(g, &mut out);
        }
        out
    }

    /// Fixed byte layout of the whole TD-Evolution: the graph sequence plus
    /// the genome layout after each TD.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = self.graph_sequence_bytes();
        for layout in &self.layouts {
            out.extend_from_slice(&(layout.len() as u32).to_le_bytes());
            for &(a, b) in layout {
                out.extend_from_slice(&(a as u16).to_le_bytes());
                out.extend_from_slice(&(b as u16).to_le_bytes());
            }
        }
        out
    }

    pub fn canonical_hash(&self) -> u128 {
        xxh3_128(&self.canonical_bytes())
    }
}

/// Counts of distinct words, final CNVs, final TD-Graphs and TD-Evolutions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table1Row {
    pub n: usize,
    pub words: u64,
    pub cnvs: u64,
    pub td_graphs: u64,
    pub evolutions: u64,
    /// Distinct TD-Graph sequences, ignoring genome layout.
    pub graph_sequences: u64,
}

impl Table1Row {
    pub const CSV_HEADER: &'static str = "n,words,cnvs,td_graphs,evolutions";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.n, self.words, self.cnvs, self.td_graphs, self.evolutions
        )
    }
}

impl fmt::Display for Table1Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} words={} cnvs={} td_graphs={} evolutions={} graph_sequences={}",
            self.n, self.words, self.cnvs, self.td_graphs, self.evolutions, self.graph_sequences
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimBudget {
    pub max_n: usize,
    /// Cap on dedup-set memory in bytes.
    pub max_mem: Option<u64>,
}

impl Default for SimBudget {
    fn default() -> Self {
        SimBudget {
            max_n: DEFAULT_MAX_N,
            max_mem: None,
        }
    }
}

impl SimBudget {
    pub fn deep() -> Self {
        SimBudget {
            max_n: DEEP_MAX_N,
            ..Self::default()
        }
    }

    /// Reads `TD_MAX_MEM` (bytes, optional K/M/G suffix).
    pub fn with_env_mem(mut self) -> Result<Self> {
        if let Ok(v) = std::env::var("TD_MAX_MEM") {
            self.max_mem = Some(parse_mem(&v)?);
        }
        Ok(self)
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.max_n {
            return Err(Error::BudgetExceeded(format!(
                "simulation of {n} TDs exceeds the limit of {}",
                self.max_n
            )));
        }
        if let Some(cap) = self.max_mem {
            let records = crate::beta::closed_form(n as u32);
            let need = &records * BYTES_PER_RECORD;
            if need > num_bigint::BigUint::from(cap) {
                return Err(Error::BudgetExceeded(format!(
                    "dedup of {records} records needs about {need} bytes, cap is {cap}"
                )));
            }
        }
        Ok(())
    }
}

pub fn parse_mem(text: &str) -> Result<u64> {
    let t = text.trim();
    let (digits, mult) = match t.chars().last().map(|c| c.to_ascii_uppercase()) {
        Some('K') => (&t[..t.len() - 1], 1u64 << 10),
        Some('M') => (&t[..t.len() - 1], 1u64 << 20),
        Some('G') => (&t[..t.len() - 1], 1u64 << 30),
        _ => (t, 1),
    };
    digits
        .trim()
        .parse::<u64>()
        .ok()
        .and_then(|v| v.checked_mul(mult))
        .filter(|&v| v > 0)
        .ok_or_else(|| Error::Parse {
            line: 1,
            column: 1,
            message: format!("bad memory size {text:?}"),
        })
}

/// Depth-first walk over every choice sequence of `n` TDs below `start`.
pub fn walk_process(start: &GenomeState, n: usize, visit: &mut impl FnMut(&GenomeState)) {
    if start.td_count() >= n {
        visit(start);
        return;
    }
    for c in enumerate_choices(start) {
        let next = apply_td(start, c).expect("enumerated choice is valid");
        walk_process(&next, n, visit);
    }
}

pub fn prefix_states(depth: usize) -> Vec<GenomeState> {
    let mut out = Vec::new();
    walk_process(&GenomeState::initial(), depth, &mut |s| out.push(s.clone()));
    out
}

pub fn enumerate_process(n: usize, budget: &SimBudget) -> Result<Vec<TdEvolutionRecord>> {
    budget.check(n)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let depth = n.min(2);
    let chunks: Vec<Vec<TdEvolutionRecord>> = prefix_states(depth)
        .par_iter()
        .map(|s| {
            let mut out = Vec::new();
            walk_process(s, n, &mut |leaf| out.extend(TdEvolutionRecord::from_state(leaf)));
            out
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

#[derive(Default)]
struct Tally {
    words: HashSet<Word>,
    cnvs: HashSet<u128>,
    graphs: HashSet<u128>,
    sequences: HashSet<u128>,
    records: HashSet<u128>,
}

impl Tally {
    fn add(&mut self, s: &GenomeState) {
        let Some(rec) = TdEvolutionRecord::from_state(s) else { return };
        self.words.insert(word_of(s));
        let g = rec.final_graph();
        let cnv_bytes: Vec<u8> = g.cnv.iter().flat_map(|c| c.to_le_bytes()).collect();
        self.cnvs.insert(xxh3_128(&cnv_bytes));
        self.graphs.insert(xxh3_128(&rec.final_graph_bytes()));
        self.sequences.insert(xxh3_128(&rec.graph_sequence_bytes()));
        self.records.insert(rec.canonical_hash());
    }

    fn merge(mut self, other: Tally) -> Tally {
        let (mut big, small) = if self.records.len() >= other.records.len() {
            (std::mem::take(&mut self), other)
        } else {
            (other, self)
        };
        big.words.extend(small.words);
        big.cnvs.extend(small.cnvs);
        big.graphs.extend(small.graphs);
        big.sequences.extend(small.sequences);
        big.records.extend(small.records);
        big
    }
}

pub fn tabulate(n: usize, budget: &SimBudget) -> Result<Table1Row> {
    budget.check(n)?;
    if n == 0 {
        return Ok(Table1Row::default());
    }
    let depth = n.min(3);
    let tally = prefix_states(depth)
        .par_iter()
        .map(|s| {
            let mut t = Tally::default();
            walk_process(s, n, &mut |leaf| t.add(leaf));
            t
        })
        .reduce(Tally::default, Tally::merge);
    Ok(Table1Row {
        n,
        words: tally.words.len() as u64,
        cnvs: tally.cnvs.len() as u64,
        td_graphs: tally.graphs.len() as u64,
        evolutions: tally.records.len() as u64,
        graph_sequences: tally.sequences.len() as u64,
    })
}

/// One JSON object per line, records in enumeration order.
pub fn write_records_jsonl(n: usize, budget: &SimBudget, out: &mut impl Write) -> Result<u64> {
    let records = enumerate_process(n, budget)?;
    let io = |e: std::io::Error| Error::Parse {
        line: 0,
        column: 0,
        message: e.to_string(),
    };
    for r in &records {
        let line = serde_json::to_string(r).expect("record serializes");
        writeln!(out, "{line}").map_err(io)?;
    }
    Ok(records.len() as u64)
}

impl fmt::Display for TdGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cnv: Vec<String> = self.cnv.iter().map(u32::to_string).collect();
        write!(f, "[{}]", cnv.join(","))?;
        for c in &self.connections {
            let arrow = match c.direction {
                Direction::Forward => "->",
                Direction::Reversed => "<-",
            };
            write!(f, " {}{arrow}{}", c.from, c.to)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::count::count_evolution;
    use crate::tree::{build_2d_tree, hasse_diagram};
    use std::collections::HashMap;

    fn state(choices: &[TdChoice]) -> GenomeState {
        choices
            .iter()
            .fold(GenomeState::initial(), |s, &c| apply_td(&s, c).unwrap())
    }

    fn ch(g1: usize, g2: usize, order_flag: Option<CutOrder>) -> TdChoice {
        TdChoice { g1, g2, order_flag }
    }

    #[test]
    fn choice_counts() {
        let s0 = GenomeState::initial();
        assert_eq!(enumerate_choices(&s0), vec![ch(0, 0, None)]);
        assert!(word_of(&s0).is_empty());
        let s1 = apply_td(&s0, ch(0, 0, None)).unwrap();
        assert_eq!(enumerate_choices(&s1).len(), 11);
        assert_eq!(word_of(&s1).to_string(), "1");
    }

    #[test]
    fn three_junction_process() {
        let s = state(&[ch(0, 0, None), ch(1, 2, Some(CutOrder::BFirst))]);
        assert_eq!(s.letters(), "ABCDBDBCDE");
        let rec = TdEvolutionRecord::from_state(&s).unwrap();
        assert_eq!(rec.graphs[0].cnv, vec![1, 2, 2, 2, 1]);
        assert_eq!(rec.graphs[1].cnv, vec![1, 3, 2, 3, 1]);
        assert_eq!(word_of(&s).to_string(), "121");
        let dirs: Vec<(u32, Direction)> = rec.graphs[1]
            .connections
            .iter()
            .map(|c| (c.from.td, c.direction))
            .collect();
        assert_eq!(dirs.len(), 2);
        assert!(dirs.contains(&(1, Direction::Reversed)));
        assert!(dirs.contains(&(2, Direction::Forward)));
    }

    #[test]
    fn word_twelve_case_three() {
        // 1a < 1b < 2a < 2b: second TD inside the right flank
        let s = state(&[ch(0, 0, None), ch(3, 3, None)]);
        let rec = TdEvolutionRecord::from_state(&s).unwrap();
        assert_eq!(word_of(&s).to_string(), "12");
        assert_eq!(rec.final_graph().cnv, vec![1, 2, 1, 2, 1]);
    }

    #[test]
    fn invalid_choices_rejected() {
        let s1 = state(&[ch(0, 0, None)]);
        assert!(matches!(apply_td(&s1, ch(2, 1, None)), Err(Error::InvalidChoice(_))));
        assert!(matches!(apply_td(&s1, ch(0, 9, None)), Err(Error::InvalidChoice(_))));
        assert!(matches!(apply_td(&s1, ch(1, 2, None)), Err(Error::InvalidChoice(_))));
        assert!(matches!(
            apply_td(&s1, ch(0, 1, Some(CutOrder::AFirst))),
            Err(Error::InvalidChoice(_))
        ));
    }

    #[test]
    fn small_tables() {
        let b = SimBudget::default();
        let row = |n| {
            let r = tabulate(n, &b).unwrap();
            (r.words, r.cnvs, r.td_graphs, r.evolutions)
        };
        assert_eq!(row(1), (1, 1, 1, 1));
        assert_eq!(row(2), (3, 7, 8, 11));
        assert_eq!(row(3), (22, 225, 288, 627));
    }

    #[test]
    fn graph_sequences_alone_merge_two_structures() {
        // same reference order, second TD inside the first or the second copy
        let left = state(&[ch(0, 0, None), ch(1, 1, None)]);
        let right = state(&[ch(0, 0, None), ch(2, 2, None)]);
        assert_eq!(word_of(&left).to_string(), "21");
        assert_eq!(word_of(&right).to_string(), "12");
        let (l, r) = (
            TdEvolutionRecord::from_state(&left).unwrap(),
            TdEvolutionRecord::from_state(&right).unwrap(),
        );
        assert_eq!(l.graph_sequence_bytes(), r.graph_sequence_bytes());
        assert_ne!(l.canonical_bytes(), r.canonical_bytes());
        assert_ne!(left.letters(), right.letters());
        assert_eq!(tabulate(2, &SimBudget::default()).unwrap().graph_sequences, 10);
    }

    #[test]
    fn records_match_words_and_extensions() {
        for n in 1..=3 {
            let records = enumerate_process(n, &SimBudget::default()).unwrap();
            let mut per_evo: HashMap<WordEvolution, u128> = HashMap::new();
            let mut pairs = HashSet::new();
            let mut bytes = HashSet::new();
            for r in &records {
                *per_evo.entry(r.word_evolution.clone()).or_default() += 1;
                assert!(pairs.insert((r.word_evolution.clone(), r.reference.clone())));
                assert!(bytes.insert(r.canonical_bytes()));
                let h = hasse_diagram(&build_2d_tree(&r.word_evolution)).unwrap();
                let pos = |i: usize| r.reference.iter().position(|&x| x == h.labels[i]).unwrap();
                assert!(h.edges.iter().all(|&(u, v)| pos(u) < pos(v)));
                for (k, g) in r.graphs.iter().enumerate() {
                    assert_eq!(g.connections.len(), k + 1);
                    assert_eq!(g.cnv.len(), 2 * n + 1);
                    assert_eq!((g.cnv[0], g.cnv[2 * n]), (1, 1));
                    if k > 0 {
                        assert!(g.cnv.iter().zip(&r.graphs[k - 1].cnv).all(|(x, y)| x >= y));
                    }
                }
            }
            for (e, c) in per_evo {
                assert_eq!(c, count_evolution(&e).unwrap().value, "{e}");
            }
        }
    }

    #[test]
    fn sim_word_matches_derived_evolution() {
        walk_process(&GenomeState::initial(), 3, &mut |s| {
            assert_eq!(&word_of(s), s.word_evolution().unwrap().last_word());
        });
    }

    #[test]
    fn budget_and_memory_cap() {
        assert!(matches!(
            tabulate(5, &SimBudget::default()),
            Err(Error::BudgetExceeded(_))
        ));
        let tight = SimBudget {
            max_n: 4,
            max_mem: Some(1000),
        };
        assert!(matches!(tabulate(3, &tight), Err(Error::BudgetExceeded(_))));
        assert_eq!(parse_mem("2G").unwrap(), 2 << 30);
        assert!(parse_mem("lots").is_err());
    }

    #[test]
    fn jsonl_export() {
        let mut buf = Vec::new();
        let n = write_records_jsonl(2, &SimBudget::default(), &mut buf).unwrap();
        assert_eq!(n, 11);
        let text = String::from_utf8(buf).unwrap();
        let first: TdEvolutionRecord = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first.graphs.len(), 2);
        assert_eq!(Table1Row::CSV_HEADER.split(',').count(), 5);
    }
}
