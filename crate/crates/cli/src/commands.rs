use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use tdspace::beta::{
    closed_form, enumerate_beta_subtrees, example_fenced_beta_tree, fiber_table, fiber_violations,
    induced_count_via_subtrees, induced_evolutions, induced_major_graph, kernel_check_all, one_nodeset_of,
    random_beta_tree, total_evolutions_via_words_with, BetaTree, OneNodeset, DEFAULT_TOTAL_GUARD,
};
use tdspace::count::{count_evolution, count_extensions_bruteforce_with};
use tdspace::dot::{beta_to_dot, hasse_to_dot, major_to_dot, tree_to_dot};
use tdspace::sim::{tabulate, write_records_jsonl, SimBudget, Table1Row, BYTES_PER_RECORD, DEFAULT_MAX_N};
use tdspace::tree::{build_2d_tree, hasse_diagram, major_graph, validate_structure, TdTree};
use tdspace::word::{enumerate_word_evolutions, word_census, Word, WordCountTable, WordEvolution, DEFAULT_WORD_GUARD};
use tdspace::Error;

use crate::config::{Format, RunConfig};

const MAX_RECURSION_N: usize = 12;
const DEEP_RECURSION_N: usize = 14;

#[derive(Debug)]
pub enum Failure {
    Budget(String),
    Usage(String),
    Other(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Budget(_) => 2,
            Failure::Usage(_) | Failure::Other(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Budget(m) | Failure::Usage(m) | Failure::Other(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded(m) => Failure::Budget(m),
            e => Failure::Other(e.to_string()),
        }
    }
}

impl From<String> for Failure {
    fn from(m: String) -> Self {
        Failure::Usage(m)
    }
}

/// Rendered command output. `ok` is false when a check disagreed.
pub struct Output {
    pub body: String,
    pub ok: bool,
}

impl Output {
    fn passed(body: String) -> Self {
        Output { body, ok: true }
    }
}

type Outcome = Result<Output, Failure>;

fn big(v: impl ToString) -> Value {
    let s = v.to_string();
    match s.parse::<u64>() {
        Ok(x) => x.into(),
        Err(_) => Value::String(s),
    }
}

fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn need_positive(n: usize) -> Result<(), Failure> {
    if n == 0 {
        Err(Failure::Usage("-n must be at least 1".into()))
    } else {
        Ok(())
    }
}

pub fn load_evolution(file: Option<&Path>, words: Option<&str>) -> Result<WordEvolution, Failure> {
    match (file, words) {
        (Some(p), None) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Other(format!("{}: {e}", p.display())))?;
            Ok(WordEvolution::from_json(&text)?)
        }
        (None, Some(w)) => {
            let ws = w
                .split(|c: char| c.is_whitespace() || c == ',' || c == '>' || c == '-')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<Word>())
                .collect::<Result<Vec<_>, _>>()?;
            Ok(WordEvolution::from_words(&ws)?)
        }
        _ => Err(Failure::Usage("give exactly one of FILE or --words".into())),
    }
}

/// Accepts either an evolution file or an exported tree.
fn load_tree(path: &Path) -> Result<TdTree, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?;
    match WordEvolution::from_json(&text) {
        Ok(e) => Ok(build_2d_tree(&e)),
        Err(evo_err) => TdTree::from_json(&text)
            .map_err(|tree_err| Failure::Other(format!("not an evolution ({evo_err}) nor a tree ({tree_err})"))),
    }
}

pub fn words(cfg: &RunConfig, n: usize, recursion: bool, enumerate: bool, deep: bool) -> Outcome {
    need_positive(n)?;
    let fmt = cfg.format_or(Format::Text, &[Format::Text, Format::Json, Format::Csv])?;
    let use_recursion = recursion || !enumerate;
    let mut rows: BTreeMap<usize, String> = BTreeMap::new();
    let mut total = None;
    let mut enumerated = None;
    let mut problems = Vec::new();

    if use_recursion {
        let limit = if deep { DEEP_RECURSION_N } else { MAX_RECURSION_N };
        if n > limit {
            return Err(Failure::Budget(format!("recursion for n={n} exceeds n<={limit}")));
        }
        let mut table = WordCountTable::new();
        for (m, v) in table.row(n) {
            rows.insert(m, v.to_string());
        }
        total = Some(table.total(n).to_string());
    }
    if enumerate {
        let guard = if deep { DEFAULT_WORD_GUARD } else { DEFAULT_WORD_GUARD - 1 };
        let census = word_census(n, guard)?;
        if census.distinct != census.evolutions {
            problems.push(format!(
                "{} evolutions but {} distinct words",
                census.evolutions, census.distinct
            ));
        }
        if use_recursion {
            let by_length: BTreeMap<usize, String> =
                census.lengths.iter().map(|(&m, &c)| (m, c.to_string())).collect();
            if by_length != rows {
                problems.push("length histogram differs from recursion".into());
            }
            if total.as_deref() != Some(census.evolutions.to_string().as_str()) {
                problems.push(format!("recursion total {} vs enumeration {}", total.clone().unwrap(), census.evolutions));
            }
        } else {
            rows = census.lengths.iter().map(|(&m, &c)| (m, c.to_string())).collect();
        }
        enumerated = Some(census.evolutions.to_string());
    }
    let ok = problems.is_empty();
    let headline = total.clone().or(enumerated.clone()).unwrap_or_default();

    let body = match fmt {
        Format::Json => pretty(&json!({
            "n": n,
            "rows": rows.iter().map(|(m, c)| json!({"m": m, "count": big(c)})).collect::<Vec<_>>(),
            "total": big(&headline),
            "recursion": total.as_ref().map(big),
            "enumeration": enumerated.as_ref().map(big),
            "agree": ok,
        })),
        Format::Csv => {
            let mut s = String::from("m,count\n");
            for (m, c) in &rows {
                writeln!(s, "{m},{c}").unwrap();
            }
            s
        }
        _ => {
            let mut s = String::from("m\tw(m,n)\n");
            for (m, c) in &rows {
                writeln!(s, "{m}\t{c}").unwrap();
            }
            writeln!(s, "total {headline}").unwrap();
            if let (Some(r), Some(e)) = (&total, &enumerated) {
                writeln!(s, "recursion {r} enumeration {e}").unwrap();
            }
            for p in &problems {
                writeln!(s, "MISMATCH {p}").unwrap();
            }
            s
        }
    };
    Ok(Output { body, ok })
}

pub fn count(cfg: &RunConfig, evo: &WordEvolution, oracle: bool) -> Outcome {
    let fmt = cfg.format_or(Format::Text, &[Format::Text, Format::Json])?;
    let c = count_evolution(evo)?;
    let brute = if oracle {
        let h = hasse_diagram(&build_2d_tree(evo))?;
        Some(count_extensions_bruteforce_with(&h, cfg.max_nodes)?)
    } else {
        None
    };
    let ok = brute.is_none_or(|b| b == c.value);
    let body = match fmt {
        Format::Json => pretty(&json!({
            "evolution": evo.to_string(),
            "count": big(c.value),
            "factors": c
                .nontrivial()
                .map(|(s, f)| json!({"site": s.to_string(), "factor": big(f)}))
                .collect::<Vec<_>>(),
            "trace": c.product_string(),
            "oracle": brute.map(big),
            "agree": ok,
        })),
        _ => {
            let mut s = String::new();
            for (site, f) in c.nontrivial() {
                writeln!(s, "site={site} factor={f}").unwrap();
            }
            writeln!(s, "{}", c.product_string()).unwrap();
            if let Some(b) = brute {
                writeln!(s, "oracle={b} {}", if ok { "agree" } else { "MISMATCH" }).unwrap();
            }
            s
        }
    };
    Ok(Output { body, ok })
}

pub fn table(cfg: &RunConfig, n: usize, all: bool, deep: bool, records: Option<&Path>) -> Outcome {
    need_positive(n)?;
    let fmt = cfg.format_or(Format::Csv, &[Format::Text, Format::Json, Format::Csv])?;
    let mut budget = if deep { SimBudget::deep() } else { SimBudget::default() }.with_env_mem()?;
    if let Some(r) = cfg.max_records {
        let cap = r.saturating_mul(BYTES_PER_RECORD);
        budget.max_mem = Some(budget.max_mem.map_or(cap, |m| m.min(cap)));
    }
    let first = if all { 1 } else { n };
    let rows: Vec<Table1Row> = (first..=n).map(|k| tabulate(k, &budget)).collect::<Result<_, _>>()?;
    if let Some(path) = records {
        let f = File::create(path).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?;
        let mut w = BufWriter::new(f);
        write_records_jsonl(n, &budget, &mut w)?;
    }
    let body = match fmt {
        Format::Json => pretty(&rows),
        Format::Text => rows.iter().map(|r| format!("{r}\n")).collect(),
        _ => {
            let mut s = format!("{}\n", Table1Row::CSV_HEADER);
            for r in &rows {
                writeln!(s, "{}", r.to_csv()).unwrap();
            }
            s
        }
    };
    Ok(Output::passed(body))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Structure,
    Kernel,
    Induction,
    GrandTotal,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Structure => "structure",
            Suite::Kernel => "kernel",
            Suite::Induction => "induction",
            Suite::GrandTotal => "grand-total",
        }
    }

    fn limit(self, deep: bool) -> usize {
        let base = match self {
            Suite::Structure => 5,
            Suite::Kernel | Suite::Induction => 4,
            Suite::GrandTotal => DEFAULT_TOTAL_GUARD - 1,
        };
        base + deep as usize
    }
}

#[derive(Serialize)]
struct CheckLine {
    name: String,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct Report {
    suite: &'static str,
    n: usize,
    passed: bool,
    checks: Vec<CheckLine>,
}

impl Report {
    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.passed &= passed;
        self.checks.push(CheckLine {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn render(&self, fmt: Format) -> String {
        if fmt == Format::Json {
            return pretty(self);
        }
        let mut s = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(s, "{tag} {}: {}", c.name, c.detail).unwrap();
        }
        let tag = if self.passed { "PASS" } else { "FAIL" };
        writeln!(s, "suite {} n={}: {tag}", self.suite, self.n).unwrap();
        s
    }
}

fn progress(deep: bool, msg: &str) {
    if deep {
        eprintln!("[verify] {msg}");
    }
}

pub fn verify(cfg: &RunConfig, suite: Suite, n: usize, deep: bool) -> Outcome {
    need_positive(n)?;
    let fmt = cfg.format_or(Format::Text, &[Format::Text, Format::Json])?;
    let limit = suite.limit(deep);
    if n > limit {
        let hint = if deep { "" } else { " (try --deep)" };
        return Err(Failure::Budget(format!(
            "{} suite allows n<={limit}{hint}",
            suite.name()
        )));
    }
    let mut report = Report {
        suite: suite.name(),
        n,
        passed: true,
        checks: Vec::new(),
    };
    match suite {
        Suite::Structure => verify_structure(&mut report, n, deep),
        Suite::Kernel => verify_kernel(&mut report, n, deep)?,
        Suite::Induction => verify_induction(&mut report, n, deep)?,
        Suite::GrandTotal => verify_grand_total(&mut report, n, deep)?,
    }
    Ok(Output {
        ok: report.passed,
        body: report.render(fmt),
    })
}

fn verify_structure(report: &mut Report, n: usize, deep: bool) {
    for m in 1..=n {
        progress(deep, &format!("structure m={m}"));
        let (trees, bad, controls, missed) = enumerate_word_evolutions(m)
            .par_bridge()
            .map(|e| {
                let t = build_2d_tree(&e);
                let bad = !validate_structure(&t).passed() as u64;
                let mut controls = 0u64;
                let mut missed = 0u64;
                for x in t.nodes().filter(|x| x.td >= 2) {
                    let mut c = t.clone();
                    c.flip_major(x);
                    controls += 1;
                    missed += validate_structure(&c).passed() as u64;
                }
                (1u64, bad, controls, missed)
            })
            .reduce(|| (0, 0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3));
        report.check(
            format!("invariants m={m}"),
            bad == 0,
            format!("{trees} trees, {bad} with violations"),
        );
        report.check(
            format!("negative controls m={m}"),
            missed == 0,
            format!("{}/{controls} corrupted trees flagged", controls - missed),
        );
    }
}

fn kernel_line(report: &mut Report, name: String, t: &BetaTree) -> Result<(), Failure> {
    let checks = kernel_check_all(t)?;
    let bad: Vec<String> = checks
        .iter()
        .filter(|k| !k.equal())
        .map(|k| format!("r={} {}!={}", k.r, k.lhs, k.rhs))
        .collect();
    let detail = if bad.is_empty() {
        format!("{} values of r equal", checks.len())
    } else {
        bad.join(", ")
    };
    report.check(name, bad.is_empty(), detail);
    Ok(())
}

fn verify_kernel(report: &mut Report, n: usize, deep: bool) -> Result<(), Failure> {
    let fenced = example_fenced_beta_tree();
    let r5 = kernel_check_all(&fenced)?.into_iter().find(|k| k.r == 5).expect("seven nodes");
    report.check(
        "fenced example r=5",
        r5.lhs == 18 && r5.rhs == 18,
        format!("{} = {}", r5.lhs, r5.rhs),
    );
    kernel_line(report, "fenced example all r".into(), &fenced)?;
    for m in 1..=n {
        progress(deep, &format!("kernel m={m}"));
        let results: Vec<Result<(u64, u64), Error>> = enumerate_word_evolutions(m)
            .par_bridge()
            .map(|e| {
                let checks = kernel_check_all(&BetaTree::from_td_tree(&build_2d_tree(&e)))?;
                let bad = checks.iter().filter(|k| !k.equal()).count() as u64;
                Ok((checks.len() as u64, bad))
            })
            .collect();
        let mut identities = 0;
        let mut bad = 0;
        for r in results {
            let (i, b) = r?;
            identities += i;
            bad += b;
        }
        report.check(
            format!("TD trees m={m}"),
            bad == 0,
            format!("{identities} identities, {bad} unequal"),
        );
    }
    Ok(())
}

fn verify_induction(report: &mut Report, n: usize, deep: bool) -> Result<(), Failure> {
    for m in 1..n {
        progress(deep, &format!("induction m={m}"));
        let bad = fiber_violations(m)?;
        report.check(
            format!("fiber sums m={m}"),
            bad.is_empty(),
            match bad.first() {
                None => "0 violations".to_string(),
                Some(e) => format!("{} violations, first {e}", bad.len()),
            },
        );
        let mut pairs = 0;
        let mut mismatches = Vec::new();
        let mut subtree_route = 0;
        for e in enumerate_word_evolutions(m) {
            let t = build_2d_tree(&e);
            let induced = induced_evolutions(&e)?;
            let mut fiber_sum = 0u128;
            for ep in &induced {
                let nodes = one_nodeset_of(&e, ep)?;
                let g = induced_major_graph(&t, &nodes)?;
                if !g.same_graph(&major_graph(&build_2d_tree(ep))) {
                    mismatches.push(format!("{e} -> {ep}"));
                }
                fiber_sum += count_evolution(ep)?.value;
                pairs += 1;
            }
            let subtrees = enumerate_beta_subtrees(&BetaTree::from_td_tree(&t))?.len();
            if subtrees != induced.len() || induced_count_via_subtrees(&t)? != fiber_sum {
                subtree_route += 1;
            }
        }
        report.check(
            format!("two routes m={m}"),
            mismatches.is_empty(),
            format!("{pairs} induced pairs, {} mismatches", mismatches.len()),
        );
        report.check(
            format!("subtree route m={m}"),
            subtree_route == 0,
            format!("{subtree_route} evolutions disagree"),
        );
    }
    if n == 1 {
        report.check("fiber sums", true, "nothing induces the first level");
    }
    Ok(())
}

fn verify_grand_total(report: &mut Report, n: usize, deep: bool) -> Result<(), Failure> {
    let cf = closed_form(n as u32).to_string();
    progress(deep, &format!("summing counts over word evolutions n={n}"));
    let guard = if deep { DEFAULT_TOTAL_GUARD } else { DEFAULT_TOTAL_GUARD - 1 };
    let sum = total_evolutions_via_words_with(n, guard)?.to_string();
    report.check("word route", sum == cf, format!("sum {sum}, closed form {cf}"));
    if n <= DEFAULT_MAX_N {
        progress(deep, "simulating");
        let row = tabulate(n, &SimBudget::default().with_env_mem()?)?;
        let sim = row.evolutions.to_string();
        report.check("simulator", sim == cf, format!("{sim} distinct records, closed form {cf}"));
    } else {
        report.check("simulator", true, format!("skipped above n={DEFAULT_MAX_N}"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum What {
    Tree,
    Hasse,
    Major,
    Beta,
}

pub fn export(cfg: &RunConfig, path: &Path, what: What) -> Outcome {
    let fmt = cfg.format_or(Format::Dot, &[Format::Dot, Format::Json])?;
    let t = load_tree(path)?;
    let dot = fmt == Format::Dot;
    let body = match what {
        What::Tree if dot => tree_to_dot(&t),
        What::Tree => t.to_json() + "\n",
        What::Hasse => {
            let h = hasse_diagram(&t)?;
            if dot {
                hasse_to_dot(&h)
            } else {
                pretty(&h)
            }
        }
        What::Major => {
            let g = major_graph(&t);
            if dot {
                major_to_dot(&g)
            } else {
                pretty(&g)
            }
        }
        What::Beta => {
            let b = BetaTree::from_td_tree(&t);
            if dot {
                beta_to_dot(&b)
            } else {
                b.to_json() + "\n"
            }
        }
    };
    Ok(Output::passed(body))
}

fn nodeset_string(n: &OneNodeset) -> String {
    let parts: Vec<String> = n.members.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

pub fn induce(cfg: &RunConfig, evo: &WordEvolution) -> Outcome {
    let fmt = cfg.format_or(Format::Text, &[Format::Text, Format::Json])?;
    let rows = fiber_table(evo)?;
    let m = evo.td_count() as u32 + 1;
    let factor = (1u128 << (2 * m)) - (2 * m as u128 + 1);
    let expected = count_evolution(evo)?.value * factor;
    let sum: u128 = rows.iter().map(|r| r.2).sum();
    let ok = sum == expected;
    let body = match fmt {
        Format::Json => pretty(&json!({
            "evolution": evo.to_string(),
            "fiber": rows.iter().map(|(ep, n, c)| json!({
                "induced": ep.to_string(),
                "steps": ep.steps().iter().map(|s| [s.a, s.b]).collect::<Vec<_>>(),
                "nodeset": n.members.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                "count": big(c),
            })).collect::<Vec<_>>(),
            "sum": big(sum),
            "expected": big(expected),
            "agree": ok,
        })),
        _ => {
            let mut s = String::new();
            for (ep, n, c) in &rows {
                writeln!(s, "{ep}\t{}\t{c}", nodeset_string(n)).unwrap();
            }
            writeln!(
                s,
                "{} induced evolutions, sum {sum}, expected {expected} {}",
                rows.len(),
                if ok { "agree" } else { "MISMATCH" }
            )
            .unwrap();
            s
        }
    };
    Ok(Output { body, ok })
}

/// Seed, size, identities checked and failing `r` values of one random tree.
type TreeResult = (u64, usize, usize, Vec<usize>);

pub fn beta(cfg: &RunConfig, trees: usize, max_size: usize, example: bool) -> Outcome {
    let fmt = cfg.format_or(Format::Text, &[Format::Text, Format::Json, Format::Dot])?;
    if !(3..=20).contains(&max_size) {
        return Err(Failure::Usage("--max-size must lie in 3..=20".into()));
    }
    let seed = cfg.seed.expect("validated");
    if fmt == Format::Dot {
        return Ok(Output::passed(beta_to_dot(&random_beta_tree(seed, max_size))));
    }
    let span = max_size - 2;
    let results: Vec<Result<TreeResult, Error>> = (0..trees)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_add(i as u64);
            let size = 3 + i % span;
            let checks = kernel_check_all(&random_beta_tree(s, size))?;
            let bad = checks.iter().filter(|k| !k.equal()).map(|k| k.r).collect();
            Ok((s, size, checks.len(), bad))
        })
        .collect();
    let mut identities = 0;
    let mut failures = Vec::new();
    for r in results {
        let (s, size, k, bad) = r?;
        identities += k;
        if !bad.is_empty() {
            failures.push(json!({"seed": s, "size": size, "r": bad}));
        }
    }
    let mut example_ok = None;
    if example {
        let checks = kernel_check_all(&example_fenced_beta_tree())?;
        example_ok = Some(checks.iter().all(|k| k.equal()));
    }
    let ok = failures.is_empty() && example_ok != Some(false);
    let body = match fmt {
        Format::Json => pretty(&json!({
            "seed": seed,
            "trees": trees,
            "max_size": max_size,
            "identities": identities,
            "failures": failures,
            "example": example_ok,
            "passed": ok,
        })),
        _ => {
            let mut s = format!(
                "seed {seed}: {trees} trees of 3..={max_size} nodes, {identities} identities, {} failing trees\n",
                failures.len()
            );
            for f in &failures {
                writeln!(s, "FAIL {f}").unwrap();
            }
            if let Some(e) = example_ok {
                writeln!(s, "fenced example {}", if e { "PASS" } else { "FAIL" }).unwrap();
            }
            s
        }
    };
    Ok(Output { body, ok })
}
