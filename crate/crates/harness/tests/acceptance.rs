//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use oracle::{h_add_costs, h_plus, mask, mask_actions, random_state, random_task, random_tree_task, relaxed_closure};
use parplan_core::blackbox::{lift_heuristic, wrap_strips_as_blackbox};
use parplan_core::heuristics::{ff_heuristic, heuristic_ranker, ConstantEvaluator, FfHeuristic, Ranker};
use parplan_core::search::{search, Algorithm, Guidance, Outcome};
use parplan_core::{Evaluator, HValue, PartialModel};
use parplan_domains::DomainKind;
use parplan_harness::report::{coverage_table, Comparison};
use parplan_harness::runner::{load_instances, plan_dir, read_plan};
use parplan_harness::{run_experiment, Execution, ExperimentConfig, RunRecord};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SUITE: usize = 50;
const BUDGET: u64 = 10_000;

fn say(line: &str) {
    // Bypasses libtest output capture so the lines always show.
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

struct Verdicts(Vec<(u32, bool)>);

impl Verdicts {
    fn record(&mut self, n: u32, ok: bool, detail: String) {
        say(&format!("criterion {n}: {} | {detail}", if ok { "PASS" } else { "FAIL" }));
        self.0.push((n, ok));
    }
}

fn config(domain: DomainKind, combination: &str, rows: &str, cols: &str) -> ExperimentConfig {
    let text = format!(
        "domain = {domain}\ndataset = test\nseed = 1\ncount = {SUITE}\nbudget = {BUDGET}\n\
         train-seed = 1000\ntrain-count = 100\nalgorithm = {combination}\nrows = {rows}\ncols = {cols}\n"
    );
    ExperimentConfig::parse(&text).unwrap()
}

struct Run {
    cfg: ExperimentConfig,
    dir: PathBuf,
    records: Vec<RunRecord>,
}

impl Run {
    fn new(root: &Path, name: &str, cfg: ExperimentConfig) -> Run {
        let dir = root.join(name);
        let records = run_experiment(&cfg, Some(&dir), Execution::default()).unwrap();
        let table = coverage_table(&records);
        fs::write(dir.join("coverage.md"), table.to_markdown()).unwrap();
        say(&format!("\n{name}:\n{}", table.to_markdown()));
        Run { cfg, dir, records }
    }

    fn solved(&self, row: &str, col: &str) -> usize {
        coverage_table(&self.records).get(row, col).map_or(0, |c| c.solved)
    }

    fn solved_set(&self, id: &str) -> HashSet<&str> {
        self.records.iter().filter(|r| r.config == id && r.solved()).map(|r| r.instance.as_str()).collect()
    }
}

/// Criterion 3 for one domain: every heuristic surrogate row combined with
/// the partial model that is strongest alone.
fn combination_gain(run: &Run) -> (bool, bool, String) {
    let t = coverage_table(&run.records);
    let partials: Vec<&String> = t.cols.iter().filter(|c| c.starts_with("h:ff-partial")).collect();
    let best = partials.iter().max_by_key(|c| (run.solved("none", c), std::cmp::Reverse(c.as_str()))).unwrap();
    let mut ok = true;
    let mut strict = false;
    let mut parts = Vec::new();
    for row in t.rows.iter().filter(|r| r.starts_with("h:surrogate")) {
        let (alone, ff, combo) = (run.solved(row, "none"), run.solved("none", best), run.solved(row, best));
        ok &= combo >= alone.max(ff);
        strict |= combo > alone.max(ff);
        parts.push(format!("{row}: {combo} vs max({alone}, {ff})"));
    }
    (ok, strict, format!("{} [{best}] {}", run.cfg.domain, parts.join("; ")))
}

/// Re-validates every solved record from its stored plan file.
fn recheck_plans(run: &Run) -> (usize, usize, u64) {
    let insts: HashMap<String, _> = load_instances(&run.cfg).unwrap().into_iter().map(|i| (i.id.clone(), i)).collect();
    let (mut valid, mut solved, mut max_exp) = (0, 0, 0);
    for r in &run.records {
        max_exp = max_exp.max(r.expansions);
        if !r.solved() {
            continue;
        }
        solved += 1;
        let plan = read_plan(&plan_dir(&run.dir, &r.config).join(format!("{}.plan", r.instance))).unwrap();
        if insts[&r.instance].task.validate_named_plan(&plan).ok() == r.cost {
            valid += 1;
        }
    }
    (valid, solved, max_exp)
}

fn ff_oracle_violations() -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut checked, mut bad) = (0, 0);
    for _ in 0..200 {
        let task = Arc::new(random_task(&mut rng));
        let actions = mask_actions(&task);
        let goal = mask(task.goal().iter().copied());
        let mut states = vec![task.init().clone()];
        states.extend((0..4).map(|_| random_state(&mut rng, &task)));
        for s in states {
            checked += 1;
            let sm = mask(s.iter());
            let ff = ff_heuristic(&task, &s);
            let reachable = relaxed_closure(&actions, sm) & goal == goal;
            let mut ok = ff.is_infinite() != reachable && (ff == HValue::ZERO) == (sm & goal == goal);
            if let Some(v) = ff.finite() {
                let costs = h_add_costs(&actions, sm, task.num_facts());
                let sum: u64 = task.goal().iter().map(|g| costs[g.index()].unwrap_or(u64::MAX)).sum();
                let hp = h_plus(&actions, sm, goal);
                ok &= hp.is_some_and(|hp| hp <= v) && v <= sum;
            }
            bad += !ok as usize;
        }
    }
    (checked, bad)
}

fn discrepancy_violations() -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut bad = 0;
    for _ in 0..100 {
        let (task, depth) = random_tree_task(&mut rng, 6, 3);
        let task = Arc::new(task);
        let bb = wrap_strips_as_blackbox(task.clone());
        let ff: Arc<dyn Evaluator> =
            Arc::new(lift_heuristic(Arc::new(FfHeuristic::new(task.clone())), &PartialModel::identity(task.clone())));
        let perfect: Arc<dyn Ranker> = Arc::new(heuristic_ranker(ff));
        let r = search(&bb, &Algorithm::Gbfs(Guidance::policy(perfect)), BUDGET, None).unwrap();
        if r.outcome != Outcome::Solved || r.expansions != depth {
            bad += 1;
        }

        let blind: Arc<dyn Ranker> = Arc::new(heuristic_ranker(Arc::new(ConstantEvaluator::blind())));
        let mut trace = Vec::new();
        let r = search(&bb, &Algorithm::Gbfs(Guidance::policy(blind)), BUDGET, Some(&mut trace)).unwrap();
        let mut value_of = HashMap::new();
        let mut root = None;
        for line in String::from_utf8(trace).unwrap().lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            let value = v["values"][0].as_u64().unwrap();
            root.get_or_insert(value);
            if v["event"] == "generate" {
                value_of.insert(v["state"].as_str().unwrap().to_string(), value);
            }
        }
        if root != Some(0) {
            bad += 1;
        }
        let mut s = task.init().clone();
        let mut last = 0;
        for label in &r.plan {
            s = task.action_by_name(label).unwrap().apply(&s).unwrap();
            let v = value_of[&format!("{:016x}", bb.encode(&s).stable_hash())];
            if v < last {
                bad += 1;
            }
            last = v;
        }
    }
    bad
}

#[test]
fn acceptance() {
    let root = std::env::temp_dir().join(format!("parplan-acceptance-{}", std::process::id()));
    let mut v = Verdicts(Vec::new());

    let logistics = Run::new(
        &root,
        "logistics",
        config(
            DomainKind::Logistics,
            "double-queue",
            "none, h:surrogate(hgn-one), h:surrogate(default), h:biased-ff(hgn-one)",
            "none, ff-partial(air), ff-full",
        ),
    );
    let grid = Run::new(
        &root,
        "grid",
        config(
            DomainKind::Grid,
            "double-queue",
            "none, h:surrogate(hgn-gridsize), h:surrogate(hgn-onelock), h:surrogate(default)",
            "none, ff-partial(robot), ff-partial(keys), ff-full",
        ),
    );
    let wood_cfg = config(
        DomainKind::Woodworking,
        "double-queue",
        "none, h:surrogate(hgn-move), h:surrogate(default), h:surrogate(hgn-oneloc), p:surrogate(default)",
        "none, ff-partial(logistics), ff-partial(wood), ff-full",
    );
    let wood = Run::new(&root, "woodworking", wood_cfg.clone());
    let wood_tb = Run::new(
        &root,
        "woodworking-tiebreak",
        config(DomainKind::Woodworking, "tiebreak", "none, p:surrogate(default)", "none, ff-partial(wood)"),
    );
    let runs = [&logistics, &grid, &wood, &wood_tb];

    let full: Vec<(DomainKind, usize)> =
        [&logistics, &grid, &wood].iter().map(|r| (r.cfg.domain, r.solved("none", "h:ff-full"))).collect();
    v.record(
        1,
        full.iter().all(|&(_, s)| s >= 45),
        full.iter().map(|(d, s)| format!("{d} {s}/{SUITE}")).collect::<Vec<_>>().join(", ") + " (need >= 45)",
    );

    let air = logistics.solved("none", "h:ff-partial(air)");
    let keys = grid.solved("none", "h:ff-partial(keys)");
    let robot = grid.solved("none", "h:ff-partial(robot)");
    let (wl, ww, wf) = (
        wood.solved("none", "h:ff-partial(logistics)"),
        wood.solved("none", "h:ff-partial(wood)"),
        wood.solved("none", "h:ff-full"),
    );
    v.record(
        2,
        air <= 5 && keys >= 45 && keys > robot && wl < ww && ww < wf,
        format!("air {air} (<= 5); keys {keys} (>= 45) > robot {robot}; logistics {wl} < wood {ww} < full {wf}"),
    );

    let gains: Vec<(bool, bool, String)> = [&logistics, &grid, &wood].iter().map(|r| combination_gain(r)).collect();
    v.record(
        3,
        gains.iter().all(|g| g.0) && gains.iter().any(|g| g.1),
        gains.iter().map(|g| g.2.clone()).collect::<Vec<_>>().join(" | "),
    );

    let air_alone = logistics.solved_set("none~h:ff-partial(air)");
    let rescued: Vec<&str> = logistics
        .solved_set("h:biased-ff(hgn-one)~h:ff-partial(air)")
        .into_iter()
        .filter(|i| !air_alone.contains(i))
        .collect();
    v.record(
        4,
        rescued.len() >= 10,
        format!("double-queue(air, truck-only) solves {} instances air alone does not (need >= 10)", rescued.len()),
    );

    let (checked, bad) = ff_oracle_violations();
    v.record(5, bad == 0, format!("{bad} violations over {checked} states of 200 random tasks"));

    let bad = discrepancy_violations();
    v.record(6, bad == 0, format!("{bad} violations over 100 random trees"));

    let again = run_experiment(&wood_cfg, Some(&root.join("woodworking-again")), Execution::Sequential).unwrap();
    let first = fs::read(wood.dir.join("records.csv")).unwrap();
    let second = fs::read(root.join("woodworking-again/records.csv")).unwrap();
    v.record(
        7,
        first == second && again == wood.records,
        format!("re-run of the woodworking grid ({} records): byte-identical = {}", again.len(), first == second),
    );

    let (mut valid, mut solved, mut max_exp) = (0, 0, 0);
    for r in runs {
        let (a, b, c) = recheck_plans(r);
        valid += a;
        solved += b;
        max_exp = max_exp.max(c);
    }
    v.record(
        8,
        valid == solved && max_exp <= BUDGET,
        format!("{valid}/{solved} solved records re-validate; max expansions {max_exp} (budget {BUDGET})"),
    );

    let row = "p:surrogate(default)";
    let tb = wood_tb.solved(row, "h:ff-partial(wood)");
    let dq = wood.solved(row, "h:ff-partial(wood)");
    let cells: HashSet<&str> = wood_tb.records.iter().map(|r| r.config.as_str()).collect();
    let base: Vec<RunRecord> = wood.records.iter().filter(|r| cells.contains(r.config.as_str())).cloned().collect();
    let cmp = Comparison::new(&base, &wood_tb.records);
    fs::write(root.join("woodworking-comparison.md"), cmp.to_markdown()).unwrap();
    say(&format!("\nwoodworking tiebreak vs double-queue:\n{}", cmp.to_markdown()));
    v.record(9, tb >= dq, format!("tiebreak(ff-wood, policy) {tb} vs double-queue {dq}"));

    say(&format!("outputs in {}", root.display()));
    let failed: Vec<u32> = v.0.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
