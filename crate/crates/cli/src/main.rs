mod dot;

use std::collections::BTreeSet;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use qrg::decider::{decide_secure_existence, Answer, Budgets, DecideOptions};
use qrg::format::{history_string, parse_game, parse_moore, parse_profile, render_game, render_moore, render_tree_profile};
use qrg::moore::restrict_strategy;
use qrg::solver::{
    backward_induction_seeded, is_dev_optimized, is_goal_optimized, is_nash, is_secure, is_spe, is_spse, Family,
    SolverError, Verdict, Witness,
};
use qrg::tree::{outcome, unravel_with, CostModel, TreeError, TreeStrategyProfile, TruncatedTree, DEFAULT_NODE_BUDGET};
use qrg::zero_sum::{build_coalition_game, build_player_game, solve_reach_under_safety, ZeroSumError};
use qrg::{Cost, GameGraph, VertexId};

#[derive(Parser)]
#[command(name = "qrg", version, about = "Verifier and solver for quantitative reachability games")]
struct Cli {
    /// Print machine-readable JSON reports.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a game file and check its invariants.
    Validate { game: PathBuf },
    /// Compute a subgame perfect (secure) profile by backward induction.
    Solve {
        game: PathBuf,
        #[arg(long, value_enum)]
        kind: SolveKind,
        #[arg(long)]
        depth: Option<usize>,
        /// Tie-break seed; 0 picks the least vertex.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        nodes: usize,
        /// Write the profile here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a property of a profile (history rules or a Moore profile).
    Check {
        #[arg(long, value_enum)]
        kind: CheckKind,
        game: PathBuf,
        profile: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        nodes: usize,
    },
    /// Decide whether a secure equilibrium exists.
    DecideSecure {
        game: PathBuf,
        /// Upper bounds on the costs, e.g. `3,inf`.
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<String>>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = Budgets::default().nodes)]
        nodes: usize,
        #[arg(long, default_value_t = Budgets::default().profiles)]
        profiles: u64,
        #[arg(long, default_value_t = Budgets::default().seeds)]
        seeds: u64,
        /// Time limit in seconds.
        #[arg(long)]
        time: Option<f64>,
        /// Directory receiving the witness files.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Solve a reachability-under-safety game derived from the arena.
    Attractor {
        game: PathBuf,
        /// `player:I` or `coalition:J`, players numbered from 1.
        #[arg(long)]
        protagonist: String,
        #[arg(long, num_args = 1.., required = true)]
        reach: Vec<String>,
        /// Defaults to every vertex.
        #[arg(long, num_args = 1..)]
        safe: Option<Vec<String>>,
    },
    /// Render the arena in DOT, optionally with a profile's outcome.
    ExportDot {
        game: PathBuf,
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Length of the highlighted outcome.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Run the fixture corpus listed in a manifest.
    Corpus {
        #[arg(default_value = "fixtures/manifest.toml")]
        manifest: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveKind {
    Spe,
    Spse,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum CheckKind {
    Nash,
    Secure,
    Spe,
    Spse,
    Goalopt,
    Devopt,
}

/// Failures that are not verdicts.
#[derive(Debug)]
enum Failure {
    Input(String),
    Budget(String),
}

impl Failure {
    fn input(e: impl Display) -> Self {
        Failure::Input(e.to_string())
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 3,
            Failure::Budget(_) => 4,
        }
    }
}

impl From<TreeError> for Failure {
    fn from(e: TreeError) -> Self {
        match e {
            TreeError::Budget { .. } => Failure::Budget(e.to_string()),
            e => Failure::input(e),
        }
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        Failure::input(e)
    }
}

/// Exit status and report of a successful run.
struct Outcome {
    code: u8,
    human: String,
    json: Value,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(o) => {
            // A closed pipe is not worth a panic.
            let mut out = std::io::stdout().lock();
            let _ = if cli.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&o.json).unwrap())
            } else {
                write!(out, "{}", o.human)
            };
            ExitCode::from(o.code)
        }
        Err(f) => {
            let msg = match &f {
                Failure::Input(m) => format!("input error: {m}"),
                Failure::Budget(m) => format!("resource budget exceeded: {m}"),
            };
            if cli.json {
                let _ = writeln!(std::io::stdout().lock(), "{}", json!({ "error": msg, "exit": f.code() }));
            }
            eprintln!("{msg}");
            ExitCode::from(f.code())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_game(path: &Path) -> Result<GameGraph, Failure> {
    let g = parse_game(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let report = g.validate();
    if !report.is_valid() {
        return Err(Failure::Input(format!("{}: {report}", path.display())));
    }
    Ok(g)
}

fn initial(g: &GameGraph) -> Result<VertexId, Failure> {
    g.initial().ok_or_else(|| Failure::input("the game declares no initial vertex"))
}

fn vertex(g: &GameGraph, name: &str) -> Result<VertexId, Failure> {
    g.vertex(name).ok_or_else(|| Failure::Input(format!("unknown vertex `{name}`")))
}

/// Explicit depth, or `|V| + 1` when every play is absorbed early enough.
fn resolve_depth(g: &GameGraph, v0: VertexId, depth: Option<usize>) -> Result<usize, Failure> {
    match depth {
        Some(d) => Ok(d),
        None if g.is_terminal_lasso_shaped(v0) => Ok(g.vertex_count() + 1),
        None => Err(Failure::input(
            "--depth is required: the game is not terminal-lasso shaped",
        )),
    }
}

fn build_tree(g: &GameGraph, depth: usize, nodes: usize) -> Result<TruncatedTree, Failure> {
    let model = if g.is_weighted() { CostModel::Weighted } else { CostModel::Unit };
    Ok(unravel_with(g, initial(g)?, depth, model, nodes)?)
}

/// Reads history rules, falling back to the Moore format.
fn load_profile(tree: &TruncatedTree, path: &Path) -> Result<TreeStrategyProfile, Failure> {
    let g = tree.game();
    let text = read(path)?;
    match parse_profile(g, &text) {
        Ok(rules) => rules.to_tree_profile(tree).map_err(Failure::input),
        Err(rules_err) => match parse_moore(g, &text) {
            Ok(m) => Ok(restrict_strategy(&m, tree)),
            Err(_) => Err(Failure::Input(format!("{}: {rules_err}", path.display()))),
        },
    }
}

fn witness_json(g: &GameGraph, w: &Witness) -> Value {
    json!({
        "player": w.player + 1,
        "after": history_string(g, &w.history),
        "on_path": w.on_path.to_string(),
        "deviation": w.deviation.to_string(),
        "deviation_play": history_string(g, &w.deviation_play),
    })
}

fn witness_text(g: &GameGraph, w: &Witness) -> String {
    format!(
        "player {} deviates after {} and reaches {} instead of {} via {}\n",
        w.player + 1,
        history_string(g, &w.history),
        w.deviation,
        w.on_path,
        history_string(g, &w.deviation_play)
    )
}

fn run(command: Command) -> Result<Outcome, Failure> {
    match command {
        Command::Validate { game } => validate(&game),
        Command::Solve {
            game,
            kind,
            depth,
            seed,
            nodes,
            out,
        } => solve(&game, kind, depth, seed, nodes, out.as_deref()),
        Command::Check {
            kind,
            game,
            profile,
            depth,
            nodes,
        } => check(kind, &game, &profile, depth, nodes),
        Command::DecideSecure {
            game,
            thresholds,
            depth,
            nodes,
            profiles,
            seeds,
            time,
            emit,
        } => {
            if nodes == 0 || profiles == 0 || seeds == 0 {
                return Err(Failure::input("budgets must be positive"));
            }
            let time = match time {
                Some(t) if !(t > 0.0) => return Err(Failure::input("--time must be positive")),
                t => t.map(Duration::from_secs_f64),
            };
            let opts = DecideOptions {
                depth,
                thresholds: None,
                budgets: Budgets {
                    nodes,
                    profiles,
                    seeds,
                    time,
                    ..Budgets::default()
                },
            };
            decide(&game, thresholds, opts, emit.as_deref())
        }
        Command::Attractor {
            game,
            protagonist,
            reach,
            safe,
        } => attractor(&game, &protagonist, &reach, safe.as_deref()),
        Command::ExportDot { game, profile, steps } => export(&game, profile.as_deref(), steps),
        Command::Corpus { manifest } => corpus(&manifest),
    }
}

fn validate(path: &Path) -> Result<Outcome, Failure> {
    let g = load_game(path)?;
    Ok(Outcome {
        code: 0,
        human: format!(
            "valid: {} players, {} vertices, {} edges\n",
            g.players(),
            g.vertex_count(),
            g.edge_count()
        ),
        json: json!({
            "command": "validate",
            "valid": true,
            "players": g.players(),
            "vertices": g.vertex_count(),
            "edges": g.edge_count(),
        }),
    })
}

fn solve(
    path: &Path,
    kind: SolveKind,
    depth: Option<usize>,
    seed: u64,
    nodes: usize,
    out: Option<&Path>,
) -> Result<Outcome, Failure> {
    let g = load_game(path)?;
    let depth = resolve_depth(&g, initial(&g)?, depth)?;
    let tree = build_tree(&g, depth, nodes)?;
    let (family, verdict) = match kind {
        SolveKind::Spe => (Family::Nash, is_spe as fn(&TruncatedTree, &TreeStrategyProfile) -> Verdict),
        SolveKind::Spse => (Family::Secure, is_spse as fn(&TruncatedTree, &TreeStrategyProfile) -> Verdict),
    };
    let sigma = backward_induction_seeded(&tree, family, seed);
    assert!(verdict(&tree, &sigma).holds(), "backward induction failed its own check");
    let leaf = outcome(&tree, &sigma, tree.root());
    let rendered = render_tree_profile(&tree, &sigma);
    let mut human = format!(
        "outcome {} with costs {} at depth {depth}\n",
        history_string(&g, &tree.history(leaf)),
        tree.profile(leaf)
    );
    match out {
        Some(p) => std::fs::write(p, &rendered).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        None => human.push_str(&rendered),
    }
    Ok(Outcome {
        code: 0,
        human,
        json: json!({
            "command": "solve",
            "kind": match kind { SolveKind::Spe => "spe", SolveKind::Spse => "spse" },
            "depth": depth,
            "outcome": history_string(&g, &tree.history(leaf)),
            "costs": tree.profile(leaf).to_string(),
            "profile": rendered,
        }),
    })
}

fn check(kind: CheckKind, game: &Path, profile: &Path, depth: Option<usize>, nodes: usize) -> Result<Outcome, Failure> {
    let g = load_game(game)?;
    let depth = resolve_depth(&g, initial(&g)?, depth)?;
    let tree = build_tree(&g, depth, nodes)?;
    let sigma = load_profile(&tree, profile)?;
    let leaf = outcome(&tree, &sigma, tree.root());
    let x = tree.profile(leaf).clone();
    let (holds, witness) = match kind {
        CheckKind::Goalopt => (is_goal_optimized(&g, &x), None),
        _ => {
            let v = match kind {
                CheckKind::Nash => is_nash(&tree, &sigma),
                CheckKind::Secure => is_secure(&tree, &sigma),
                CheckKind::Spe => is_spe(&tree, &sigma),
                CheckKind::Spse => is_spse(&tree, &sigma),
                _ => is_dev_optimized(&tree, &sigma)?,
            };
            (v.holds(), v.witness)
        }
    };
    let name = CheckKind::value_variants()
        .iter()
        .position(|k| *k == kind)
        .map(|i| ["nash", "secure", "spe", "spse", "goalopt", "devopt"][i])
        .unwrap();
    let mut human = format!(
        "{name}: {} at depth {depth}; outcome {} with costs {x}\n",
        if holds { "holds" } else { "fails" },
        history_string(&g, &tree.history(leaf))
    );
    if let Some(w) = &witness {
        human.push_str(&witness_text(&g, w));
    }
    Ok(Outcome {
        code: if holds { 0 } else { 1 },
        human,
        json: json!({
            "command": "check",
            "kind": name,
            "depth": depth,
            "holds": holds,
            "outcome": history_string(&g, &tree.history(leaf)),
            "costs": x.to_string(),
            "witness": witness.as_ref().map(|w| witness_json(&g, w)),
        }),
    })
}

fn decide(
    path: &Path,
    thresholds: Option<Vec<String>>,
    mut opts: DecideOptions,
    emit: Option<&Path>,
) -> Result<Outcome, Failure> {
    let g = load_game(path)?;
    if g.is_weighted() {
        return Err(Failure::input("the decision procedure works on unweighted games"));
    }
    if let Some(t) = thresholds {
        let t: Vec<Cost> = t
            .iter()
            .map(|s| s.parse::<Cost>().map_err(Failure::input))
            .collect::<Result<_, _>>()?;
        if t.len() != g.players() {
            return Err(Failure::Input(format!("expected {} thresholds, got {}", g.players(), t.len())));
        }
        opts.thresholds = Some(t);
    }
    let d = decide_secure_existence(&g, initial(&g)?, &opts)?;
    let stages: Vec<&str> = d.stages.iter().map(|s| s.name()).collect();
    let mut report = json!({
        "command": "decide-secure",
        "answer": d.answer.label(),
        "depth": d.depth,
        "full_depth": d.full_depth,
        "conclusive": d.conclusive(),
        "tree_nodes": d.tree_nodes,
        "profile_count": d.profile_count,
        "stages": stages,
        "elapsed_ms": d.elapsed.as_millis() as u64,
    });
    let mut human = format!(
        "{} at depth {} (d = {}; {} nodes; stages: {})\n",
        d.answer.label(),
        d.depth,
        d.full_depth,
        d.tree_nodes,
        stages.join(", ")
    );
    let code = match &d.answer {
        Answer::Yes(w) => {
            let g = &g;
            let outcome = history_string(g, &w.outcome);
            human.push_str(&format!(
                "witness from {}: outcome {outcome} with costs {}\n{}\n",
                w.stage.name(),
                w.costs,
                w.moore_note
            ));
            let tree = build_tree(g, d.depth, opts.budgets.nodes)?;
            let rules = render_tree_profile(&tree, &w.profile);
            let moore = w.moore.as_ref().map(|m| render_moore(g, m));
            if let Some(dir) = emit {
                let io = |e: std::io::Error| Failure::Input(format!("{}: {e}", dir.display()));
                std::fs::create_dir_all(dir).map_err(io)?;
                std::fs::write(dir.join("witness.prof"), &rules).map_err(io)?;
                if let Some(m) = &moore {
                    std::fs::write(dir.join("witness.moore"), m).map_err(io)?;
                }
            }
            report["witness"] = json!({
                "stage": w.stage.name(),
                "outcome": outcome,
                "costs": w.costs.to_string(),
                "profile": rules,
                "moore": moore,
                "moore_note": w.moore_note,
            });
            0
        }
        Answer::No(e) => {
            human.push_str(&format!("all {} profiles of the tree were refuted\n", e.profiles));
            report["double_checked"] = json!(e.double_checked);
            1
        }
        Answer::Unknown(reason) => {
            human.push_str(reason);
            human.push('\n');
            report["reason"] = json!(reason);
            2
        }
    };
    Ok(Outcome { code, human, json: report })
}

fn attractor(path: &Path, protagonist: &str, reach: &[String], safe: Option<&[String]>) -> Result<Outcome, Failure> {
    let g = load_game(path)?;
    let (side, who) = protagonist
        .split_once(':')
        .ok_or_else(|| Failure::input("--protagonist expects player:I or coalition:J"))?;
    let who: usize = who
        .parse()
        .ok()
        .filter(|&i| (1..=g.players()).contains(&i))
        .ok_or_else(|| Failure::Input(format!("player `{who}` out of range")))?;
    let reach: Vec<VertexId> = reach.iter().map(|n| vertex(&g, n)).collect::<Result<_, _>>()?;
    let safe: Vec<VertexId> = match safe {
        Some(s) => s.iter().map(|n| vertex(&g, n)).collect::<Result<_, _>>()?,
        None => g.vertices().collect(),
    };
    let arena = match side {
        "player" => build_player_game(&g, who - 1, reach, safe),
        "coalition" => build_coalition_game(&g, who - 1, reach, safe),
        _ => return Err(Failure::input("--protagonist expects player:I or coalition:J")),
    }
    .map_err(|e: ZeroSumError| Failure::input(e))?;
    let res = solve_reach_under_safety(&arena);
    let winning: Vec<&str> = res.winning_region().map(|v| g.name(v)).collect();
    let mut human = format!("winning region: {{{}}}\n", winning.join(", "));
    let mut table = serde_json::Map::new();
    for v in g.vertices() {
        let role = if arena.is_protagonist(v) { "protagonist" } else { "antagonist" };
        let rank = res.rank(v).map_or("-".to_string(), |r| r.to_string());
        human.push_str(&format!("{} ({role}, rank {rank}) -> {}\n", g.name(v), g.name(res.choice(v))));
        table.insert(
            g.name(v).to_string(),
            json!({ "winning": res.is_winning(v), "rank": res.rank(v), "role": role, "move": g.name(res.choice(v)) }),
        );
    }
    let holds = g.initial().is_none_or(|v| res.is_winning(v));
    Ok(Outcome {
        code: if holds { 0 } else { 1 },
        human,
        json: json!({
            "command": "attractor",
            "winning": winning,
            "initial_winning": g.initial().map(|v| res.is_winning(v)),
            "vertices": table,
        }),
    })
}

fn export(path: &Path, profile: Option<&Path>, steps: Option<usize>) -> Result<Outcome, Failure> {
    let g = load_game(path)?;
    let mut highlight = BTreeSet::new();
    if let Some(p) = profile {
        let rules = parse_profile(&g, &read(p)?).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
        let mut play = vec![initial(&g)?];
        for _ in 0..steps.unwrap_or(2 * g.vertex_count()) {
            let Some(w) = rules.move_after(&g, &play) else { break };
            highlight.insert((*play.last().unwrap(), w));
            play.push(w);
        }
    }
    let text = dot::export_dot(&g, &highlight);
    Ok(Outcome {
        code: 0,
        json: json!({ "command": "export-dot", "dot": text }),
        human: text,
    })
}

#[derive(Deserialize)]
struct Manifest {
    #[serde(default)]
    game: Vec<ManifestGame>,
    #[serde(default)]
    broken: Vec<ManifestBroken>,
}

#[derive(Deserialize)]
struct ManifestGame {
    file: String,
    figure: String,
    players: usize,
    depth: Option<usize>,
    #[serde(default)]
    profiles: Vec<String>,
}

#[derive(Deserialize)]
struct ManifestBroken {
    file: String,
    violation: String,
}

/// Checks every listed fixture: games parse, validate and round-trip,
/// profiles are classified, broken games report their violation.
fn corpus(manifest: &Path) -> Result<Outcome, Failure> {
    let m: Manifest = toml::from_str(&read(manifest)?).map_err(|e| Failure::Input(format!("{}: {e}", manifest.display())))?;
    let dir = manifest.parent().unwrap_or(Path::new("."));
    let mut human = String::new();
    let mut rows = Vec::new();
    let mut ok = true;
    for entry in &m.game {
        let g = load_game(&dir.join(&entry.file))?;
        let round_trip = parse_game(&render_game(&g)).map_err(Failure::input)? == g;
        let players_ok = g.players() == entry.players;
        ok &= round_trip && players_ok;
        human.push_str(&format!(
            "figure {} ({}): round trip {}, players {}\n",
            entry.figure,
            entry.file,
            if round_trip { "ok" } else { "FAILED" },
            if players_ok { "ok" } else { "MISMATCH" }
        ));
        let v0 = initial(&g)?;
        let depth = resolve_depth(&g, v0, entry.depth)?;
        let tree = build_tree(&g, depth, DEFAULT_NODE_BUDGET)?;
        for prof in &entry.profiles {
            let sigma = load_profile(&tree, &dir.join(prof))?;
            let leaf = outcome(&tree, &sigma, tree.root());
            let flags = [
                ("nash", is_nash(&tree, &sigma).holds()),
                ("secure", is_secure(&tree, &sigma).holds()),
                ("spe", is_spe(&tree, &sigma).holds()),
                ("spse", is_spse(&tree, &sigma).holds()),
            ];
            let listed: Vec<String> = flags
                .iter()
                .map(|(n, h)| format!("{}{n}", if *h { "" } else { "!" }))
                .collect();
            human.push_str(&format!(
                "  {prof}: {} {} {}\n",
                history_string(&g, &tree.history(leaf)),
                tree.profile(leaf),
                listed.join(" ")
            ));
            rows.push(json!({
                "game": entry.file,
                "profile": prof,
                "depth": depth,
                "outcome": history_string(&g, &tree.history(leaf)),
                "costs": tree.profile(leaf).to_string(),
                "nash": flags[0].1, "secure": flags[1].1, "spe": flags[2].1, "spse": flags[3].1,
            }));
        }
    }
    let mut broken = Vec::new();
    for entry in &m.broken {
        let reported = match load_game(&dir.join(&entry.file)) {
            Err(Failure::Input(msg)) => msg.contains(&entry.violation),
            _ => false,
        };
        ok &= reported;
        human.push_str(&format!(
            "{}: {}\n",
            entry.file,
            if reported { "rejected as expected" } else { "NOT rejected as expected" }
        ));
        broken.push(json!({ "file": entry.file, "rejected": reported }));
    }
    Ok(Outcome {
        code: if ok { 0 } else { 1 },
        human,
        json: json!({ "command": "corpus", "ok": ok, "profiles": rows, "broken": broken }),
    })
}
