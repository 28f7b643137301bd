//! Acceptance run: one line per criterion, nonzero exit if any fails.
//! Informational lines start with `INFO` and never fail the run.

use std::cmp::Ordering;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hydra_core::diagram::{compare, Diagram};
use hydra_core::game::{game_height, play, Height, Strategy};
use hydra_core::generate;
use hydra_core::hydra::{Hydra, LabelSet};
use hydra_core::moves::{enumerate_moves, BraceDVariant, MoveConfig, Rule};
use hydra_core::textio::{parse_hydra, parse_labels};
use hydra_core::verify::{generate_case, run_property_suite, strictly_decreasing, SuiteConfig, SuiteReport};

const ORDER_PAIRS: usize = 10_000;
const ORDER_TRIPLES: usize = 2_000;
const ORDER_MAX_SIZE: usize = 20;
const ORDER_TIME_LIMIT: Duration = Duration::from_secs(60);
const CORPUS_HYDRAS: usize = 500;
const CORPUS_MAX_SIZE: usize = 10;
const CORPUS_LEVELS: (u64, u64) = (0, 4);
const CORPUS_SEED: u64 = 0;
const PLAY_BUDGET: usize = 100_000;
const HEIGHT_BUDGET: usize = 100_000;

struct Outcome {
    failed: usize,
}

impl Outcome {
    fn report(&mut self, name: &str, ok: bool, detail: String) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed += 1;
        }
    }
}

fn corpus_config(brace_d: BraceDVariant) -> SuiteConfig {
    SuiteConfig {
        num_hydras: CORPUS_HYDRAS,
        max_size: CORPUS_MAX_SIZE,
        min_level: CORPUS_LEVELS.0,
        max_level: CORPUS_LEVELS.1,
        seed: CORPUS_SEED,
        moves: MoveConfig {
            brace_d,
            ..MoveConfig::default()
        },
        ..SuiteConfig::default()
    }
}

fn corpus() -> Vec<(Hydra, LabelSet)> {
    let config = corpus_config(BraceDVariant::Extended);
    (0..CORPUS_HYDRAS)
        .map(|i| {
            let c = generate_case(&config, i);
            (c.hydra, c.labels)
        })
        .collect()
}

fn order_laws(out: &mut Outcome) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut bad = Vec::new();
    let mut singles = 0usize;
    for _ in 0..ORDER_PAIRS {
        let a = generate::diagram(&mut rng, ORDER_MAX_SIZE);
        let b = generate::diagram(&mut rng, ORDER_MAX_SIZE);
        let ab = compare(&a, &b);
        if ab != compare(&b, &a).reverse() || (ab == Ordering::Equal) != (a == b) {
            bad.push(format!("{a} vs {b}"));
        }
        for x in [&a, &b] {
            singles += 1;
            if compare(x, x) != Ordering::Equal {
                bad.push(format!("{x} not equal to itself"));
            }
        }
    }
    let mut chains = 0usize;
    for _ in 0..ORDER_TRIPLES {
        let mut t: Vec<Diagram> = (0..3).map(|_| generate::diagram(&mut rng, ORDER_MAX_SIZE)).collect();
        t.sort_by(compare);
        // after sorting, a consistent order has t0 ≤ t1 ≤ t2 and t0 ≤ t2
        let (x, y, z) = (&t[0], &t[1], &t[2]);
        if compare(x, y).is_le() && compare(y, z).is_le() {
            chains += 1;
            if compare(x, z).is_gt() {
                bad.push(format!("{x} < {y} < {z} but not {x} < {z}"));
            }
        } else {
            bad.push(format!("sort produced an inconsistent triple {x}, {y}, {z}"));
        }
    }
    let elapsed = start.elapsed();
    out.report(
        "order laws",
        bad.is_empty() && elapsed < ORDER_TIME_LIMIT,
        format!(
            "{ORDER_PAIRS} pairs, {chains} triples, {singles} singles, size <= {ORDER_MAX_SIZE}, {} violations, {:.1}s (limit {}s){}",
            bad.len(),
            elapsed.as_secs_f64(),
            ORDER_TIME_LIMIT.as_secs(),
            bad.first().map(|b| format!("; first: {b}")).unwrap_or_default()
        ),
    );
}

fn describe(r: &SuiteReport) -> String {
    let mut s = format!(
        "{} hydras, size <= {}, levels {}..{}, {} moves, {} lemma failures, {} measure failures, {} enumeration errors",
        r.hydras,
        r.config.max_size,
        r.config.min_level,
        r.config.max_level,
        r.moves_checked,
        r.lemma_failures,
        r.measure_failures,
        r.enumeration_errors.len()
    );
    if let Some(c) = r.counterexamples.first() {
        let c = c.shrunk.as_deref().unwrap_or(c);
        s.push_str(&format!("; e.g. ({}, {{{}}}) at level {} via {}", c.hydra, c.labels, c.level, c.redex.name()));
    }
    s
}

fn lemma_and_corollary(out: &mut Outcome) {
    let report = run_property_suite(&corpus_config(BraceDVariant::Extended));
    out.report(
        "decrease lemma (brace-under-D with added label)",
        report.lemma_failures == 0 && report.enumeration_errors.is_empty() && report.moves_checked > 0,
        describe(&report),
    );
    out.report(
        "measure decrease corollary",
        report.measure_failures == 0 && report.enumeration_errors.is_empty() && report.moves_checked > 0,
        format!("{} moves checked, {} measure failures", report.moves_checked, report.measure_failures),
    );
    let covered: Vec<Rule> = report.per_rule.iter().filter(|(_, n)| *n > 0).map(|(r, _)| *r).collect();
    println!("INFO rule coverage: {covered:?}");
    let plain = run_property_suite(&corpus_config(BraceDVariant::Plain));
    println!("INFO decrease lemma (brace-under-D as displayed, non-blocking): {}", describe(&plain));
}

fn random_plays(out: &mut Outcome) {
    let start = Instant::now();
    let mut longest = 0usize;
    let mut problems = Vec::new();
    for (i, (h, lb)) in corpus().iter().enumerate() {
        match play(h, lb, Strategy::Random { seed: i as u64 }, PLAY_BUDGET, MoveConfig::default()) {
            Ok(trace) => {
                longest = longest.max(trace.len());
                if trace.budget_exhausted {
                    problems.push(format!("#{i} {h} hit the budget"));
                } else if !strictly_decreasing(&trace.measures().unwrap()) {
                    problems.push(format!("#{i} {h} measure did not decrease"));
                }
            }
            Err(e) => problems.push(format!("#{i} {h}: {e}")),
        }
    }
    out.report(
        "random plays terminate",
        problems.is_empty(),
        format!(
            "{CORPUS_HYDRAS} plays, budget {PLAY_BUDGET}, longest {longest} steps, {} problems, {:.1}s{}",
            problems.len(),
            start.elapsed().as_secs_f64(),
            problems.first().map(|p| format!("; first: {p}")).unwrap_or_default()
        ),
    );
}

fn exact_values(out: &mut Outcome) {
    let lb = LabelSet::new();
    let want = [("0", 0u64), ("1", 1), ("1+1", 2)];
    let got: Vec<Height> = want
        .iter()
        .map(|(src, _)| game_height(&parse_hydra(src).unwrap(), &lb, HEIGHT_BUDGET, MoveConfig::default()).unwrap())
        .collect();
    let ok = want.iter().zip(&got).all(|((_, n), h)| *h == Height::Exact(*n));
    out.report(
        "small heights",
        ok,
        format!("F[0]={}, F[1]={}, F[1+1]={}", got[0], got[1], got[2]),
    );
}

fn has_move(h: &str, lb: &str, level: u64, target: &str) -> bool {
    let h = parse_hydra(h).unwrap();
    let target = parse_hydra(target).unwrap();
    enumerate_moves(&h, &parse_labels(lb).unwrap(), level)
        .unwrap()
        .iter()
        .any(|m| m.result_hydra == target)
}

fn spot_checks(out: &mut Outcome) {
    let cases = [
        ("{mu}(w(1))", "", 0, "w(1)"),
        ("{mu}(1+1)", "", 2, "1+1"),
        // `·2` needs `k = 2 ≤ ℓ+1`, so these are checked at level 1
        ("w(1+1)", "", 1, "w(1)+w(1)"),
        ("w(w(0)+1)", "", 1, "w(w(0))+w(w(0))"),
        ("D{}(1+1)", "", 1, "D{}(1)+D{}(1)"),
        ("D{dmu(0)}(w(0)+1)", "dmu(0)", 1, "D{dmu(0)}(w(0))+D{dmu(0)}(w(0))"),
        ("phi{dmu(0)}+0(1+1)", "", 1, "phi{dmu(0)}+0(1)+phi{dmu(0)}+0(1)"),
    ];
    let missing: Vec<String> = cases
        .iter()
        .filter(|(h, lb, l, t)| !has_move(h, lb, *l, t))
        .map(|(h, _, l, t)| format!("{h} -/-> {t} at level {l}"))
        .collect();
    out.report(
        "move spot checks",
        missing.is_empty(),
        format!("{} of {} present{}", cases.len() - missing.len(), cases.len(),
            missing.first().map(|m| format!("; missing {m}")).unwrap_or_default()),
    );
}

fn round_trip(out: &mut Outcome) {
    let mut bad = Vec::new();
    let mut labels = 0usize;
    for (h, lb) in corpus() {
        if parse_hydra(&h.to_string()).as_ref() != Ok(&h) {
            bad.push(h.to_string());
        }
        if parse_labels(&lb.to_string()).as_ref() != Ok(&lb) {
            bad.push(lb.to_string());
        }
        labels += lb.len();
    }
    out.report(
        "print/parse round trip",
        bad.is_empty(),
        format!("{CORPUS_HYDRAS} hydras, {labels} labels, {} mismatches", bad.len()),
    );
}

fn label_growth(out: &mut Outcome) {
    let mut moves = 0usize;
    let mut bad = Vec::new();
    for (h, lb) in corpus() {
        for level in CORPUS_LEVELS.0..=CORPUS_LEVELS.1 {
            for mv in enumerate_moves(&h, &lb, level).unwrap() {
                moves += 1;
                let same = mv.result_labels == lb && mv.produced.is_none();
                let grown = mv.produced.as_ref().is_some_and(|a| !lb.contains(a) && mv.result_labels == lb.with(a.clone()));
                if !same && !grown {
                    bad.push(format!("{h} via {}", mv.redex.name()));
                }
            }
        }
    }
    out.report(
        "label growth",
        bad.is_empty(),
        format!("{moves} moves, {} violations", bad.len()),
    );
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let o = Command::new(env!("CARGO_BIN_EXE_hydra"))
        .args(args)
        .env_remove("HYDRA_SEED")
        .output()
        .expect("hydra binary runs");
    (o.status.code().unwrap_or(-1), o.stdout)
}

fn cli_determinism(out: &mut Outcome) {
    let runs: [&[&str]; 4] = [
        &["play", "D{}(w(1)+1)", "--strategy", "random", "--seed", "11", "--budget", "500"],
        &["moves", "D{}({mu}(1)+1)", "--level", "2", "--json"],
        &["verify", "--hydras", "40", "--max-size", "8", "--levels", "0..2", "--seed", "5", "--jobs", "3"],
        &["tree", "w(1)+1", "--max-nodes", "200", "--json"],
    ];
    let mut bad = Vec::new();
    for args in runs {
        let a = run_cli(args);
        let b = run_cli(args);
        if a != b || a.0 != 0 || a.1.is_empty() {
            bad.push(args.join(" "));
        }
    }
    out.report(
        "CLI determinism",
        bad.is_empty(),
        format!("{} invocations run twice, {} differ or failed", runs.len(), bad.len()),
    );
}

fn main() {
    let mut out = Outcome { failed: 0 };
    order_laws(&mut out);
    lemma_and_corollary(&mut out);
    random_plays(&mut out);
    exact_values(&mut out);
    spot_checks(&mut out);
    round_trip(&mut out);
    label_growth(&mut out);
    cli_determinism(&mut out);
    if out.failed > 0 {
        println!("acceptance: {} criteria failed", out.failed);
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
