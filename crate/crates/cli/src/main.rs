use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use stackevo_bench::config::{ExperimentConfig, LoadedGame};
use stackevo_bench::experiment::{game_info, RunLog};
use stackevo_bench::report::run_gap;
use stackevo_bench::scalability::scalability_table;
use stackevo_bench::{parameter_sweep, run_experiment, BenchError};
use stackevo_core::io::{to_canonical_json, write_canonical_json, GenerateSpec};
use stackevo_core::oracle::solve_game;
use stackevo_core::{strategy_cap, with_game, AnyGame, Easg, EasgParams, GameError, GameKind, GenerationStats};

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_CAPACITY: u8 = 3;

#[derive(Parser)]
#[command(name = "stackevo", version, about = "Evolutionary and exact solvers for sequential Stackelberg security games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random game instance.
    Generate(GenerateArgs),
    /// Run the evolutionary solver on a game file.
    Solve(SolveArgs),
    /// Compute the exact equilibrium of a game file.
    Exact(ExactArgs),
    /// Run an experiment or parameter sweep described by a JSON config.
    Bench(BenchArgs),
    /// Run the solver and the exact oracle and print the gap.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Whg,
    Seg,
    Fig,
}

impl From<KindArg> for GameKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Whg => GameKind::Whg,
            KindArg::Seg => GameKind::Seg,
            KindArg::Fig => GameKind::Fig,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long = "type", value_enum)]
    kind: KindArg,
    /// Vertices (whg, fig) or corridor width (seg).
    #[arg(long)]
    size: usize,
    #[arg(long)]
    steps: usize,
    /// Graph family: chain, tree or mesh (fig); narrow, medium or wide (seg).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolverFlags {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = EasgParams::default().p_size)]
    p_size: usize,
    #[arg(long, default_value_t = EasgParams::default().p_m)]
    p_m: f64,
    #[arg(long, default_value_t = EasgParams::default().p_c)]
    p_c: f64,
    #[arg(long, default_value_t = EasgParams::default().p_s)]
    p_s: f64,
    #[arg(long, default_value_t = EasgParams::default().elite)]
    elite: usize,
    /// Generation limit.
    #[arg(long, default_value_t = EasgParams::default().n_g)]
    max_gen: usize,
    /// Generations without improvement before stopping.
    #[arg(long, default_value_t = EasgParams::default().n_c)]
    stall_gen: usize,
}

impl SolverFlags {
    fn params(&self) -> EasgParams {
        EasgParams {
            p_size: self.p_size,
            n_g: self.max_gen,
            n_c: self.stall_gen,
            p_m: self.p_m,
            p_c: self.p_c,
            p_s: self.p_s,
            elite: self.elite,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    game: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
    /// Where to write the mixed strategy.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExactArgs {
    game: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    config: PathBuf,
    /// Worker threads; defaults to the number of processors.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    game: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Serialize)]
struct SolveOutput<S> {
    best_fitness: f64,
    generations_run: usize,
    interrupted: bool,
    seed: u64,
    params: EasgParams,
    strategy: S,
    history: Vec<GenerationStats>,
}

#[derive(Serialize)]
struct ExactOutput<S, A> {
    value: f64,
    strategy: S,
    attacker_response: A,
    attacker_index: usize,
}

fn load(path: &Path) -> Result<AnyGame> {
    AnyGame::load(path).with_context(|| format!("cannot load {}", path.display()))
}

fn generate(args: &GenerateArgs) -> Result<()> {
    let spec = GenerateSpec {
        kind: args.kind.into(),
        size: args.size,
        steps: args.steps,
        preset: args.preset.clone(),
    };
    let game = AnyGame::generate(&spec, args.seed)?;
    game.save(&args.out)?;
    println!("wrote {} ({} steps) to {}", game.kind(), game.steps(), args.out.display());
    Ok(())
}

fn solve(args: &SolveArgs) -> Result<()> {
    let params = args.solver.params();
    params.validate()?;
    let game = load(&args.game)?;
    let stop = Arc::new(AtomicBool::new(false));
    let flag = stop.clone();
    ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst)).context("cannot install the interrupt handler")?;
    with_game!(&game, g => {
        let mut easg = Easg::with_cap(g, params, args.solver.seed, strategy_cap())?;
        easg.run_until(Some(&stop));
        let interrupted = stop.load(Ordering::SeqCst) && !easg.is_done();
        let r = easg.finish();
        println!(
            "best fitness {} after {} generations ({:.3}s){}",
            r.best_fitness,
            r.generations_run,
            r.wall_time,
            if interrupted { ", interrupted" } else { "" }
        );
        let out = SolveOutput {
            best_fitness: r.best_fitness,
            generations_run: r.generations_run,
            interrupted,
            seed: r.seed,
            params,
            strategy: &r.best,
            history: r.history,
        };
        match &args.out {
            Some(path) => write_canonical_json(path, &out)?,
            None => print!("{}", to_canonical_json(&out)?),
        }
    });
    Ok(())
}

fn exact(args: &ExactArgs) -> Result<()> {
    let game = load(&args.game)?;
    with_game!(&game, g => {
        let sse = solve_game(g, strategy_cap())?;
        println!("equilibrium value {}", sse.value);
        let out = ExactOutput {
            value: sse.value,
            strategy: &sse.defender_mixed,
            attacker_response: &sse.attacker_response,
            attacker_index: sse.attacker_index,
        };
        match &args.out {
            Some(path) => write_canonical_json(path, &out)?,
            None => print!("{}", to_canonical_json(&out)?),
        }
    });
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(out) = &args.out {
        cfg.output = Some(out.clone());
    }
    if cfg.sweep.is_some() {
        let report = parameter_sweep(&cfg, args.jobs)?;
        for c in &report.curves {
            for p in &c.points {
                println!(
                    "{} = {}: mean fitness {:.6}, mean time {:.4}s, mean generations {:.1} over {} trials",
                    c.parameter, p.value, p.mean_fitness, p.mean_time_s, p.mean_generations, p.trials
                );
            }
        }
        if let Some(dir) = &cfg.output {
            std::fs::create_dir_all(dir)?;
            write_canonical_json(&dir.join("sweep.json"), &report)?;
        }
        return Ok(());
    }
    let outcome = run_experiment(&cfg, args.jobs)?;
    if let Some(dir) = &cfg.output {
        write_canonical_json(&dir.join("scalability.json"), &scalability_table(&outcome.games, &outcome.logs))?;
        println!("wrote reports to {}", dir.display());
    }
    for r in &outcome.report.rows {
        let gap = r.gap_mean.map_or("-".to_string(), |g| format!("{g:.6}"));
        println!("{}: best {:.6} mean {:.6} gap {gap} median generations {}", r.game_id, r.best, r.mean, r.gen_median);
    }
    Ok(())
}

fn compare(args: &CompareArgs) -> Result<()> {
    let params = args.solver.params();
    params.validate()?;
    let loaded = LoadedGame {
        id: args.game.file_stem().map_or("game".into(), |s| s.to_string_lossy().into_owned()),
        game: load(&args.game)?,
    };
    let cap = strategy_cap();
    let info = game_info(&loaded, true, cap)?;
    let Some(sse) = info.sse_value else {
        return Err(GameError::Capacity {
            count: info.tree_size,
            cap,
        }
        .into());
    };
    let seed = args.solver.seed;
    let r = with_game!(&loaded.game, g => {
        let mut easg = Easg::with_cap(g, params, seed, cap)?;
        easg.run_until(None);
        let r = easg.finish();
        (r.best_fitness, r.generations_run, r.wall_time)
    });
    let log = RunLog {
        game_id: loaded.id.clone(),
        kind: info.kind,
        steps: info.steps,
        run: 0,
        seed,
        best_fitness: r.0,
        generations_run: r.1,
        wall_time_s: r.2,
        history: vec![],
        sse_value: Some(sse),
        payoff_range: info.payoff_range,
        tree_size: info.tree_size,
    };
    let gap = run_gap(&log).expect("equilibrium value is present");
    println!("{} sse {sse} easg {} gap {gap} generations {}", loaded.id, r.0, r.1);
    Ok(())
}

fn game_exit_code(e: &GameError) -> u8 {
    match e {
        GameError::Capacity { .. } => EXIT_CAPACITY,
        GameError::InvalidArgument(_) => EXIT_USAGE,
        _ => EXIT_VALIDATION,
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<GameError>() {
            return game_exit_code(e);
        }
        if let Some(e) = cause.downcast_ref::<BenchError>() {
            return match e {
                BenchError::Config(_) => EXIT_USAGE,
                BenchError::Game(g) | BenchError::Load { source: g, .. } => game_exit_code(g),
                _ => EXIT_VALIDATION,
            };
        }
    }
    EXIT_VALIDATION
}

/// Joins the cause chain, skipping causes already quoted by their parent.
fn render(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let msg = cause.to_string();
        if !out.ends_with(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Exact(a) => exact(a),
        Command::Bench(a) => bench(a),
        Command::Compare(a) => compare(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", render(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn solver_defaults_are_the_recommended_values() {
        let cli = Cli::try_parse_from(["stackevo", "solve", "g.json"]).unwrap();
        let Command::Solve(a) = cli.command else { unreachable!() };
        assert_eq!(a.solver.params(), EasgParams::default());
        assert_eq!(a.solver.seed, 0);
    }

    #[test]
    fn errors_map_to_exit_codes() {
        let cap: anyhow::Error = GameError::Capacity { count: 1e9, cap: 10 }.into();
        assert_eq!(exit_code(&cap), EXIT_CAPACITY);
        let bad: anyhow::Error = GameError::validation("x").into();
        assert_eq!(exit_code(&bad.context("loading")), EXIT_VALIDATION);
        let empty: anyhow::Error = BenchError::Config("the game list is empty".into()).into();
        assert_eq!(exit_code(&empty), EXIT_USAGE);
        let nested: anyhow::Error = BenchError::Game(GameError::Capacity { count: 1e9, cap: 1 }).into();
        assert_eq!(exit_code(&nested), EXIT_CAPACITY);
    }
}
