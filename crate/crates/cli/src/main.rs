//! Command-line front end: gadget generation, solving, verification and
//! brute-force oracles.
//!
//! Exit codes: 0 solved or passed, 1 usage or I/O error, 2 no k-uniform
//! eps/4 equilibrium exists (certified by an empty root table), 3 verification
//! failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use polymatrix::constraints::{
    check, ovd_max_prob, ovd_min_payoff, ovd_min_support, ovd_player_support, ovd_total_support,
    ovd_welfare, ConstraintCheck, EquilibriumKind, Ovd, OvdConstraint, Problem, Sense,
};
use polymatrix::dp::{auto_decomposition, phase1, solve, SolverConfig};
use polymatrix::exact::to_f64;
use polymatrix::generate::{random_normalized_game, random_profile, Topology};
use polymatrix::oracle::{
    enumerate_k_uniform_ne, enumerate_pure_ne, grid_search_wsne, sampling_check, DEFAULT_BUDGET,
};
use polymatrix::reductions::{
    build_g, build_gprime, build_gtilde, parse_rational, pick_constants, Formula, LabeledGame,
};
use polymatrix::treedec::{parse_td, to_nice, TreeDecomposition};
use polymatrix::{
    is_eps_ne, is_eps_wsne, normalize, MixedStrategy, PolymatrixGame, StrategyProfile,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "polymatrix", version, about = "Approximate equilibria of polymatrix games")]
struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Leave out run-dependent fields such as timings.
    #[arg(long, global = true)]
    no_meta: bool,
    /// Write the JSON result here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    #[value(name = "G")]
    G,
    #[value(name = "Gprime")]
    Gprime,
    #[value(name = "Gtilde")]
    Gtilde,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Ne,
    Wsne,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Path,
    Star,
    Cycle,
    Tree,
}

#[derive(Subcommand)]
enum Command {
    /// Build a gadget game from a monotone formula.
    Generate {
        formula: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Exact epsilon, e.g. `0.5` or `1/3` (Gprime and Gtilde only).
        #[arg(long)]
        eps: Option<String>,
    },
    /// Random normalized game with payoffs in sixteenths.
    Random {
        #[arg(long, value_enum, default_value = "path")]
        topology: Shape,
        #[arg(long)]
        players: usize,
        #[arg(long, default_value_t = 2)]
        max_actions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Find a 1.5 eps equilibrium, optionally optimizing a constraint.
    Solve {
        game: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        k: Option<usize>,
        /// Tree decomposition in PACE `.td` format.
        #[arg(long)]
        td: Option<PathBuf>,
        /// Constraint as JSON, e.g. `{"problem": 1, "param": 2.0}`.
        #[arg(long)]
        constraint: Option<String>,
        /// Also dump every witness table to this file.
        #[arg(long)]
        tables: Option<PathBuf>,
    },
    /// Check profiles against eps-NE or eps-WSNE and an optional constraint.
    Verify {
        game: PathBuf,
        #[arg(required = true)]
        profiles: Vec<PathBuf>,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value = "ne")]
        mode: Mode,
        #[arg(long)]
        constraint: Option<String>,
    },
    /// Brute-force ground truth for small games.
    Oracle {
        #[command(subcommand)]
        query: OracleQuery,
    },
}

#[derive(Subcommand)]
enum OracleQuery {
    /// Pure eps-WSNE.
    Pure {
        game: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// k-uniform eps-NE.
    Kuniform {
        game: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// eps-WSNE on a probability grid.
    Grid {
        game: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        grid_step: f64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Payoff deviation of k-uniform samples from a mixed profile.
    Sample {
        game: PathBuf,
        /// Profile to sample from; a random one is drawn if absent.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Empty(Value),
    Rejected(Value),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build_global()
    {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let started = Instant::now();
    let result = run(&cli.command);
    let (value, code) = match result {
        Ok(v) => (v, 0),
        Err(Failure::Empty(v)) => (v, 2),
        Err(Failure::Rejected(v)) => (v, 3),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let mut value = value;
    if !cli.no_meta {
        value["meta"] = json!({
            "version": env!("CARGO_PKG_VERSION"),
            "runtime_ms": started.elapsed().as_secs_f64() * 1e3,
        });
    }
    let text = serde_json::to_string_pretty(&value).expect("serializable output") + "\n";
    match &cli.output {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(code)
}

fn run(command: &Command) -> Result<Value, Failure> {
    match command {
        Command::Generate { formula, kind, eps } => cmd_generate(formula, *kind, eps.as_deref()),
        Command::Random {
            topology,
            players,
            max_actions,
            seed,
        } => {
            if *players == 0 || *max_actions == 0 {
                return Err(Failure::Usage("players and max-actions must be positive".into()));
            }
            let t = match topology {
                Shape::Path => Topology::Path,
                Shape::Star => Topology::Star,
                Shape::Cycle => Topology::Cycle,
                Shape::Tree => Topology::Tree,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok(serde_json::to_value(random_normalized_game(&mut rng, t, *players, *max_actions))?)
        }
        Command::Solve {
            game,
            eps,
            k,
            td,
            constraint,
            tables,
        } => cmd_solve(game, *eps, *k, td.as_deref(), constraint.as_deref(), tables.as_deref()),
        Command::Verify {
            game,
            profiles,
            eps,
            mode,
            constraint,
        } => cmd_verify(game, profiles, *eps, *mode, constraint.as_deref()),
        Command::Oracle { query } => cmd_oracle(query),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Accepts a bare game document or a generated manifest with a `game` field.
fn read_game(path: &Path) -> Result<PolymatrixGame, Failure> {
    let v: Value = serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let doc = v.get("game").cloned().unwrap_or(v);
    serde_json::from_value(doc).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Accepts a bare list of probability vectors or an object with `profile`.
fn read_profile(path: &Path) -> Result<StrategyProfile, Failure> {
    let v: Value = serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let doc = match v.get("profile") {
        Some(p) => p.clone(),
        None => v,
    };
    let rows: Vec<MixedStrategy> = serde_json::from_value(doc)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(StrategyProfile::new(rows))
}

fn cmd_generate(path: &Path, kind: Kind, eps: Option<&str>) -> Result<Value, Failure> {
    let formula = Formula::parse(&read(path)?)?;
    let constants = match (kind, eps) {
        (Kind::G, _) => None,
        (_, None) => return Err(Failure::Usage("--eps is required for Gprime and Gtilde".into())),
        (_, Some(text)) => {
            let e = parse_rational(text).ok_or_else(|| Failure::Usage(format!("bad epsilon {text:?}")))?;
            Some(pick_constants(&e)?)
        }
    };
    let lg: LabeledGame = match (kind, &constants) {
        (Kind::G, _) => build_g(&formula)?,
        (Kind::Gprime, Some(k)) => build_gprime(&formula, k)?,
        (Kind::Gtilde, Some(k)) => build_gtilde(&formula, k)?,
        _ => unreachable!("constants exist for Gprime and Gtilde"),
    };
    let mut out = serde_json::to_value(&lg)?;
    out["constants"] = match &lg.constants {
        Some(k) => json!({
            "eps": k.eps.to_string(),
            "c": k.c.to_string(),
            "kappa": k.kappa.to_string(),
            "eps_f64": to_f64(&k.eps),
            "c_f64": to_f64(&k.c),
            "kappa_f64": to_f64(&k.kappa),
        }),
        None => Value::Null,
    };
    out["formula"] = json!({
        "n_vars": formula.n_vars(),
        "n_clauses": formula.clauses().len(),
        "cubic": formula.is_cubic(),
        "connected": formula.is_connected(),
    });
    Ok(out)
}

/// Maps a constraint row onto the solver: an objective, or a support filter
/// for row 4. Row 5 compares two equilibria and cannot be solved for.
/// Player and allowed actions for a support filter.
type SupportFilter = (usize, Vec<usize>);

fn objective_for(spec: &ConstraintCheck) -> Result<(Option<OvdConstraint>, Option<SupportFilter>), Failure> {
    use Sense::Minimize;
    let ovd = match &spec.problem {
        Problem::WelfareAtLeast(_) => ovd_welfare(),
        Problem::WelfareAtMost(_) => ovd_welfare().with_sense(Minimize),
        Problem::MinPayoffAtMost(_) => ovd_min_payoff().with_sense(Minimize),
        Problem::SupportWithin { player, allowed } => return Ok((None, Some((*player, allowed.clone())))),
        Problem::FarApart(_) => {
            return Err(Failure::Usage(
                "problem 5 compares two equilibria; use `verify` with two profiles".into(),
            ))
        }
        Problem::MaxProbAtMost { player, .. } => ovd_max_prob(*player),
        Problem::TotalSupportAtLeast(_) => ovd_total_support(),
        Problem::MinSupportAtLeast(_) => ovd_min_support(),
        Problem::PlayerSupportAtLeast { player, .. } => ovd_player_support(*player),
    };
    Ok((Some(ovd), None))
}

fn cmd_solve(
    path: &Path,
    eps: f64,
    k: Option<usize>,
    td: Option<&Path>,
    constraint: Option<&str>,
    tables: Option<&Path>,
) -> Result<Value, Failure> {
    let game = read_game(path)?;
    let decomposition: TreeDecomposition = match td {
        Some(p) => parse_td(&read(p)?)?,
        None => auto_decomposition(&game)?,
    };
    let mut cfg = SolverConfig::new(eps);
    if let Some(k) = k {
        cfg = cfg.with_k(k);
    }
    let spec = constraint.map(ConstraintCheck::from_json).transpose()?;
    if let Some(spec) = &spec {
        spec.check_domain(&game)?;
        let (ovd, filter) = objective_for(spec)?;
        if let Some(o) = ovd {
            cfg.constraint = Some(Arc::new(o) as Arc<dyn Ovd>);
        }
        if let Some((player, allowed)) = filter {
            cfg = cfg.with_support_filter(player, allowed);
        }
    }
    let result = solve(&game, &decomposition, &cfg)?;
    let (normalized, _) = normalize(&game);
    if let Some(p) = tables {
        let nice = to_nice(&decomposition)?;
        let p1 = phase1(&normalized, &nice, &cfg)?;
        fs::write(p, serde_json::to_string(&p1.export(&nice))?)
            .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
    }
    let mut out = json!({
        "eps": eps,
        "bound": 1.5 * eps,
        "diagnostics": result.diagnostics,
        "maps": result.maps,
    });
    let Some(solution) = &result.solution else {
        out["status"] = json!("empty");
        out["message"] = json!("no k-uniform eps/4-NE exists");
        return Err(Failure::Empty(out));
    };
    let report = is_eps_ne(&normalized, &solution.profile, 1.5 * eps)?;
    out["status"] = json!("solved");
    out["profile"] = serde_json::to_value(&solution.profile)?;
    out["strategies"] = json!(solution
        .strategies
        .iter()
        .map(|s| s.multiset().to_vec())
        .collect::<Vec<_>>());
    out["max_regret"] = json!(report.report.max_regret());
    out["within_bound"] = json!(report.holds);
    if let Some(spec) = &spec {
        if let Some(o) = &cfg.constraint {
            out["objective"] = json!({
                "name": o.name(),
                "value": solution.value_f64(),
                "exact": solution.value.as_ref().and_then(|v| v.as_ref().map(|r| r.to_string())),
            });
        }
        let outcome = check(&normalized, std::slice::from_ref(&solution.profile), spec, 1.5 * eps)?;
        out["constraint"] = json!({
            "problem": outcome.problem,
            "predicate_holds": outcome.predicate_holds,
            "value": outcome.value,
            "explanation": outcome.explanation,
        });
    }
    Ok(out)
}

fn cmd_verify(
    path: &Path,
    profile_paths: &[PathBuf],
    eps: f64,
    mode: Mode,
    constraint: Option<&str>,
) -> Result<Value, Failure> {
    let game = read_game(path)?;
    let profiles = profile_paths
        .iter()
        .map(|p| read_profile(p))
        .collect::<Result<Vec<_>, _>>()?;
    let out = match constraint {
        Some(text) => {
            let spec = ConstraintCheck::from_json(text)?;
            let outcome = check(&game, &profiles, &spec, eps)?;
            let kind = match spec.equilibrium_kind() {
                EquilibriumKind::Ne => "ne",
                EquilibriumKind::Wsne => "wsne",
            };
            json!({
                "pass": outcome.holds,
                "mode": kind,
                "eps": eps,
                "equilibrium_holds": outcome.equilibrium_holds,
                "predicate_holds": outcome.predicate_holds,
                "value": outcome.value,
                "explanation": outcome.explanation,
                "reports": outcome.reports,
            })
        }
        None => {
            let mut pass = true;
            let mut reports = Vec::new();
            for p in &profiles {
                let c = match mode {
                    Mode::Ne => is_eps_ne(&game, p, eps)?,
                    Mode::Wsne => is_eps_wsne(&game, p, eps)?,
                };
                pass &= c.holds;
                reports.push(json!({
                    "holds": c.holds,
                    "max_regret": c.report.max_regret(),
                    "max_support_regret": c.report.max_support_regret(),
                    "welfare": c.report.welfare(),
                    "players": c.report.players,
                }));
            }
            json!({
                "pass": pass,
                "mode": match mode { Mode::Ne => "ne", Mode::Wsne => "wsne" },
                "eps": eps,
                "reports": reports,
            })
        }
    };
    if out["pass"] == json!(true) {
        Ok(out)
    } else {
        Err(Failure::Rejected(out))
    }
}

fn cmd_oracle(query: &OracleQuery) -> Result<Value, Failure> {
    Ok(match query {
        OracleQuery::Pure { game, eps, budget } => {
            let hits = enumerate_pure_ne(&read_game(game)?, *eps, *budget)?;
            json!({"count": hits.len(), "profiles": hits})
        }
        OracleQuery::Kuniform { game, k, eps, budget } => {
            let hits = enumerate_k_uniform_ne(&read_game(game)?, *k, *eps, *budget, None)?;
            json!({"count": hits.len(), "profiles": hits})
        }
        OracleQuery::Grid {
            game,
            eps,
            grid_step,
            budget,
        } => {
            let hits = grid_search_wsne(&read_game(game)?, *eps, *grid_step, *budget)?;
            json!({"count": hits.len(), "profiles": hits})
        }
        OracleQuery::Sample {
            game,
            profile,
            k,
            trials,
            seed,
            threshold,
        } => {
            let g = read_game(game)?;
            let p = match profile {
                Some(path) => read_profile(path)?,
                None => random_profile(&mut ChaCha8Rng::seed_from_u64(*seed), &g),
            };
            let report = sampling_check(&g, &p, *k, *trials, *seed, *threshold)?;
            json!({"profile": p, "report": report})
        }
    })
}
