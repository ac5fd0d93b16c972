use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use birdbench_agents::{play, probe_solvability, AgentKind, Client, LevelPolicy, RoundRobin, WeightedResidual};
use birdbench_core::level::{load_pack, validate_stability};
use birdbench_core::physics::PhysicsConfig;
use birdbench_server::{serve, GameServer, ServerConfig, Visibility, DEFAULT_PORT};
use birdbench_tournament::{benchmark, run_tournament, verify_replay, PolicyKind, TournamentConfig};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "birdbench", version, about = "Physics-puzzle agent competition server and tools")]
struct Cli {
    /// Multiplies every round budget, grace window and watchdog period.
    #[arg(long, global = true, env = "BIRDBENCH_TIME_SCALE")]
    time_scale: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    Group,
    Global,
}

#[derive(Subcommand)]
enum Command {
    /// Serve a level directory over TCP.
    Serve {
        #[arg(long, default_value = "levels")]
        levels: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "BIRDBENCH_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "practice")]
        stage: String,
        /// Round budget in seconds, before scaling.
        #[arg(long, default_value_t = 1800.0)]
        budget: f64,
        #[arg(long, value_enum, default_value = "global")]
        visibility: Scope,
    },
    /// Run the stages of a tournament configuration file.
    Tournament {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run one agent alone over a level directory.
    Benchmark {
        #[arg(long)]
        agent: AgentKind,
        #[arg(long, default_value = "levels")]
        levels: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Budget in seconds, before scaling.
        #[arg(long, default_value_t = 1200.0)]
        budget: f64,
    },
    /// Check every level in a directory for stability and solvability.
    Validate {
        #[arg(long, default_value = "levels")]
        levels: PathBuf,
        /// Full attempts per level for the solvability probe; 0 skips it.
        #[arg(long, default_value_t = 3)]
        probe: u32,
        #[arg(long, default_value_t = 5.0)]
        t_sim: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Connect a reference agent to a running server.
    Agent {
        #[arg(long)]
        kind: AgentKind,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "BIRDBENCH_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Agent id; defaults to `<kind>-<seed>`.
        #[arg(long)]
        id: Option<String>,
        #[arg(long, default_value = "round-robin")]
        policy: String,
    },
    /// Replay a stage directory's action log and compare leaderboards.
    Replay {
        #[arg(long)]
        run: PathBuf,
        #[arg(long, default_value = "levels")]
        levels: PathBuf,
    },
}

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let scale = cli.time_scale.unwrap_or(1.0);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err("--time-scale must be positive".into());
    }
    match cli.command {
        Command::Serve {
            levels,
            host,
            port,
            stage,
            budget,
            visibility,
        } => {
            let pack = load_pack(&levels)?;
            let config = ServerConfig {
                stage,
                visibility: match visibility {
                    Scope::Group => Visibility::Group,
                    Scope::Global => Visibility::Global,
                },
                budget: budget * scale,
                grace: birdbench_server::server::DEFAULT_GRACE * scale,
                watchdog_idle: Some(birdbench_server::server::DEFAULT_WATCHDOG_IDLE * scale),
                ..ServerConfig::default()
            };
            let n = pack.len();
            let handle = serve(GameServer::new(config, pack, PhysicsConfig::default()), (host.as_str(), port))?;
            println!("serving {n} levels on {}", handle.local_addr());
            handle.join();
        }
        Command::Tournament { config } => {
            let text = std::fs::read_to_string(&config)?;
            let mut c = TournamentConfig::from_json(&text)?;
            if let Some(s) = cli.time_scale {
                c.time_scale = s;
            }
            let outcome = run_tournament(&c, PhysicsConfig::default())?;
            for s in &outcome.stages {
                println!("{}", s.stage);
                for st in &s.leaderboard.standings {
                    println!("  {:>2}. {:<16} group {} {:>9}", st.rank, st.agent, st.group, st.combined);
                }
            }
            if let Some(ch) = &outcome.champion {
                println!("champion: {ch}");
            }
        }
        Command::Benchmark {
            agent,
            levels,
            seed,
            budget,
        } => {
            let pack = load_pack(&levels)?;
            let report = benchmark(agent, seed, pack, budget * scale, PhysicsConfig::default())?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Validate { levels, probe, t_sim, eps } => {
            let pack = load_pack(&levels)?;
            let config = Arc::new(PhysicsConfig::default());
            let (mut unstable, mut solved) = (0, 0);
            for l in &pack {
                let s = validate_stability(l, Arc::clone(&config), t_sim, eps);
                let mut line = format!("{:<24} drift {:.4} {}", l.id, s.max_drift, if s.stable { "stable" } else { "UNSTABLE" });
                unstable += usize::from(!s.stable);
                if probe > 0 {
                    let p = probe_solvability(&Arc::new(l.clone()), &config, probe);
                    let ok = p.solvable == Some(true);
                    solved += usize::from(ok);
                    line += &format!(
                        "  {} ({} probe shots)",
                        if ok { "solvable" } else { "not shown solvable" },
                        p.probe_shots
                    );
                }
                println!("{line}");
            }
            if probe > 0 {
                println!("{solved}/{} shown solvable", pack.len());
            }
            if unstable > 0 {
                println!("{unstable} unstable");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Agent {
            kind,
            host,
            port,
            seed,
            id,
            policy,
        } => {
            let policy: PolicyKind = serde_json::from_value(serde_json::Value::String(policy))
                .map_err(|_| "policy must be round-robin or weighted")?;
            let id = id.unwrap_or_else(|| format!("{kind}-{seed}"));
            let mut client = Client::connect_tcp(&host, port, &id)?;
            let mut agent = kind.build(seed);
            let mut policy: Box<dyn LevelPolicy> = match policy {
                PolicyKind::RoundRobin => Box::new(RoundRobin::default()),
                PolicyKind::Weighted => Box::new(WeightedResidual::new(seed)),
            };
            let (score, stats) = play(&mut client, agent.as_mut(), policy.as_mut())?;
            println!("{id}: total {} after {} shots on {} level visits", score.total, stats.shots, stats.levels_loaded);
        }
        Command::Replay { run, levels } => {
            let pack = load_pack(&levels)?;
            if verify_replay(&run, &pack, PhysicsConfig::default())? {
                println!("replay matches {}", run.display());
            } else {
                println!("replay DIFFERS from {}", run.display());
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
