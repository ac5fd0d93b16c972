//! One PASS/FAIL line per acceptance criterion.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use birdbench_agents::{probe_solvability, AgentKind};
use birdbench_core::game::{Game, GameInfo};
use birdbench_core::geometry::{solve_launch_angles, Vec2};
use birdbench_core::level::{load_level_file, load_pack, validate_stability, Level};
use birdbench_core::model::BirdType;
use birdbench_core::percept::LevelState;
use birdbench_core::physics::{PhysicsConfig, World};
use birdbench_server::{serve, AttemptRecord, GameServer, Request, ServerConfig, Visibility, OPS};
use birdbench_tournament::run::{read_jsonl, resolve_levels, write_jsonl};
use birdbench_tournament::{
    advance, benchmark, combined_score, run_stage, verify_replay, Entrant, Leaderboard, StageConfig, StageKind,
    StageSetup,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

fn levels_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../levels")
}

fn pack() -> Vec<Level> {
    load_pack(&levels_dir()).unwrap()
}

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn trajectory_oracle() -> Outcome {
    let cfg = PhysicsConfig::default();
    let (v, g) = (cfg.launch_speed, cfg.gravity);
    let mut rng = StdRng::seed_from_u64(1000);
    let mut targets = Vec::new();
    while targets.len() < 1000 {
        let t = Vec2::new(rng.random_range(1.0..70.0), rng.random_range(-5.0..30.0));
        if solve_launch_angles(v, g, t).unwrap().reachable {
            targets.push(t);
        }
    }
    let (mut worst_analytic, mut worst_engine) = (0.0f64, 0.0f64);
    let origin = Vec2::new(20.0, 100.0);
    for t in &targets {
        let (low, high) = solve_launch_angles(v, g, *t).unwrap().angles().unwrap();
        for a in [low, high] {
            // y = x tan a - g x^2 / (2 v^2 cos^2 a)
            let c = a.cos();
            let y = t.x * a.tan() - g * t.x * t.x / (2.0 * v * v * c * c);
            worst_analytic = worst_analytic.max((y - t.y).abs());

            let mut w = World::new(Arc::new(cfg.clone()), 400.0, 400.0, origin, vec![BirdType::Red]);
            let id = w.launch_bird(a, 1.0).map_err(|e| e.to_string())?;
            let mut prev = Vec2::new(0.0, 0.0);
            let mut hit = None;
            for _ in 0..60 * 40 {
                w.step();
                let p = w.body(id).ok_or("bird left the world")?.pos - origin;
                if p.x >= t.x {
                    let f = (t.x - prev.x) / (p.x - prev.x);
                    hit = Some(prev.y + f * (p.y - prev.y));
                    break;
                }
                prev = p;
            }
            let y = hit.ok_or("bird never reached the target column")?;
            let rel = (y - t.y).abs() / t.length();
            worst_engine = worst_engine.max(rel);
        }
    }
    check(worst_analytic <= 1e-9, format!("analytic error {worst_analytic:e}"))?;
    check(worst_engine <= 0.02, format!("engine error {:.4}%", worst_engine * 100.0))?;
    Ok(format!(
        "1000 targets, analytic max {worst_analytic:.1e}, engine max {:.2e} of range",
        worst_engine
    ))
}

fn play_out(level: &Level, kind: AgentKind) -> (LevelState, String) {
    let cfg = Arc::new(PhysicsConfig::default());
    let info = GameInfo::new(PhysicsConfig::default());
    let mut game = Game::new(Arc::new(level.clone()), cfg);
    let mut agent = kind.build(0);
    while game.state() == LevelState::Playing {
        let shot = agent.select_shot(&game.percept(0.0), &info);
        game.shoot(&shot).unwrap();
    }
    (game.state(), game.world().state_hash())
}

fn determinism() -> Outcome {
    let pack = pack();
    let ids: Vec<String> = pack.iter().map(|l| l.id.clone()).collect();
    let mut runs = Vec::new();
    for _ in 0..3 {
        let hashes: Vec<String> = pack.iter().map(|l| play_out(l, AgentKind::Simulation).1).collect();
        let dir = tempfile::tempdir().unwrap();
        let mut stage = StageConfig::new(StageKind::Benchmark, ids.clone());
        stage.budget = Some(600.0);
        let r = run_stage(StageSetup {
            stage: &stage,
            levels: pack.clone(),
            groups: vec![vec!["sim".to_string()]],
            entrants: &[Entrant::new("sim", AgentKind::Simulation, 0)],
            physics: PhysicsConfig::default(),
            time_scale: 1.0,
            out_dir: Some(dir.path().to_path_buf()),
        })
        .map_err(|e| e.to_string())?;
        check(
            verify_replay(dir.path(), &pack, PhysicsConfig::default()).map_err(|e| e.to_string())?,
            "stage replay differs",
        )?;
        runs.push((hashes, r.leaderboard.to_json()));
    }
    check(runs[0] == runs[1] && runs[1] == runs[2], "runs differ")?;
    Ok(format!("3 runs x {} levels, identical hashes and leaderboards", pack.len()))
}

fn selection_vectors() -> Outcome {
    let semi = Leaderboard::from_totals(
        "semifinal",
        &[
            ("IHSEV", 415890),
            ("Eagle's Wing", 350900),
            ("Angry-HEX", 238040),
            ("PlanA+", 225780),
        ],
    );
    let adv = advance(StageKind::Semifinal, &semi).map_err(|e| e.to_string())?;
    let finalists: BTreeSet<&str> = adv.groups.iter().flatten().map(String::as_str).collect();
    check(
        finalists == BTreeSet::from(["IHSEV", "Eagle's Wing"]),
        format!("finalists {finalists:?}"),
    )?;
    let fin = Leaderboard::from_totals("grandfinal", &[("Eagle's Wing", 355700), ("IHSEV", 275110)]);
    let adv = advance(StageKind::Grandfinal, &fin).map_err(|e| e.to_string())?;
    check(
        adv.champion.as_deref() == Some("Eagle's Wing"),
        format!("champion {:?}", adv.champion),
    )?;
    Ok("finalists {IHSEV, Eagle's Wing}, champion Eagle's Wing".into())
}

fn histories() -> impl Strategy<Value = Vec<AttemptRecord>> {
    prop::collection::vec((0usize..3, 0usize..8, any::<bool>(), 0i64..150_000), 0..50).prop_map(|rows| {
        let mut n: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        rows.into_iter()
            .map(|(agent, level, solved, total)| {
                let k = n.entry((agent, level)).or_default();
                *k += 1;
                AttemptRecord {
                    agent: format!("a{agent}"),
                    level,
                    attempt: *k,
                    shots: 1,
                    solved,
                    total,
                }
            })
            .collect()
    })
}

fn tournament_semantics() -> Outcome {
    let levels: Vec<String> = (0..8).map(|i| format!("L{i}")).collect();
    let entrants: BTreeMap<String, u32> = (0..3).map(|i| (format!("a{i}"), 0)).collect();
    let dir = tempfile::tempdir().unwrap();
    let mut runner = TestRunner::new(Config {
        cases: 500,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&histories(), |h| {
            let board = Leaderboard::from_attempts("qualification", &levels, &entrants, &h);
            for s in &board.standings {
                let mine: Vec<&AttemptRecord> = h.iter().filter(|a| a.agent == s.agent).collect();
                let mut expect = 0;
                for l in 0..levels.len() {
                    expect += mine
                        .iter()
                        .filter(|a| a.level == l && a.solved)
                        .map(|a| a.total)
                        .max()
                        .unwrap_or(0);
                }
                prop_assert_eq!(s.combined, expect);
                prop_assert_eq!(combined_score(mine.iter().copied()), expect);
                let unsolved_only = mine.iter().copied().filter(|a| !a.solved);
                prop_assert_eq!(combined_score(unsolved_only), 0);
            }
            let path = dir.path().join("attempts.jsonl");
            write_jsonl(&path, &h).unwrap();
            let back: Vec<AttemptRecord> = read_jsonl(&path).unwrap();
            let again = Leaderboard::from_attempts("qualification", &levels, &entrants, &back);
            prop_assert_eq!(board.to_json(), again.to_json());
            Ok(())
        })
        .map_err(|e| e.to_string())?;

    // Replay invariance on a real stage.
    let pack = pack();
    let stage = StageConfig::new(StageKind::Semifinal, pack.iter().take(8).map(|l| l.id.clone()).collect());
    let entrants = [
        Entrant::new("n1", AgentKind::Naive, 1),
        Entrant::new("n2", AgentKind::Naive, 2),
        Entrant::new("blk", AgentKind::Blocking, 0),
        Entrant::new("str", AgentKind::Strategy, 0),
    ];
    let out = dir.path().join("semifinal");
    run_stage(StageSetup {
        stage: &stage,
        levels: resolve_levels(&pack, &stage.levels).map_err(|e| e.to_string())?,
        groups: vec![entrants.iter().map(|e| e.id.clone()).collect()],
        entrants: &entrants,
        physics: PhysicsConfig::default(),
        time_scale: 0.1,
        out_dir: Some(out.clone()),
    })
    .map_err(|e| e.to_string())?;
    check(
        verify_replay(&out, &pack, PhysicsConfig::default()).map_err(|e| e.to_string())?,
        "stage replay differs",
    )?;
    Ok("500 histories; stage replay byte-identical".into())
}

fn agent_ordering() -> Outcome {
    let pack = pack();
    let budget = 1200.0;
    let mut naive_l04_failures = 0;
    let mut detail = Vec::new();
    for seed in 0..20u64 {
        let naive = benchmark(AgentKind::Naive, seed, pack.clone(), budget, PhysicsConfig::default())
            .map_err(|e| e.to_string())?;
        let sim = benchmark(AgentKind::Simulation, seed, pack.clone(), budget, PhysicsConfig::default())
            .map_err(|e| e.to_string())?;
        check(
            sim.solved >= naive.solved,
            format!("seed {seed}: simulation {} < naive {}", sim.solved, naive.solved),
        )?;
        if naive.levels.iter().any(|l| l.level == "L04" && !l.solved) {
            naive_l04_failures += 1;
        }
        detail.push((naive.solved, sim.solved));
    }
    let l04 = pack.iter().find(|l| l.id == "L04").ok_or("no L04")?;
    check(
        play_out(l04, AgentKind::Strategy).0 == LevelState::Solved,
        "strategy agent fails L04",
    )?;
    check(
        naive_l04_failures >= 19,
        format!("naive fails L04 in only {naive_l04_failures}/20 seeds"),
    )?;
    let naive_min = detail.iter().map(|d| d.0).min().unwrap();
    let naive_max = detail.iter().map(|d| d.0).max().unwrap();
    let sim_min = detail.iter().map(|d| d.1).min().unwrap();
    Ok(format!(
        "20 seeds: naive solves {naive_min}-{naive_max}/12, simulation >= {sim_min}/12; strategy solves L04; naive fails L04 in {naive_l04_failures}/20"
    ))
}

fn random_line(rng: &mut StdRng, seq: u64) -> (String, Value) {
    match rng.random_range(0..10) {
        0 => ("{\"op\": \"SHOOT\", \"args\": {".to_string(), Value::Null),
        1 => ("not json at all".to_string(), Value::Null),
        2 => (format!("{{\"seq\": {seq}, \"args\": []}}"), json!(seq)),
        3 => (format!("{{\"op\": \"FLY\", \"seq\": {seq}}}"), json!(seq)),
        _ => {
            let op = OPS[rng.random_range(0..OPS.len())];
            let args = match op {
                "LOAD_LEVEL" => json!({"level": rng.random_range(0..4)}),
                "SHOOT" => json!({
                    "angle_deg": rng.random_range(-10.0..100.0),
                    "speed_fraction": rng.random_range(-0.1..1.1),
                    "tap_ms": rng.random_range(0..3000),
                }),
                "HELLO" => json!({"agent_id": "intruder"}),
                _ => json!({}),
            };
            (Request::new(op, args, seq).to_line(), json!(seq))
        }
    }
}

fn protocol_fuzz() -> Outcome {
    let levels: Vec<Level> = pack().into_iter().take(3).collect();
    let roster: BTreeMap<String, u32> = (0..4).map(|i| (format!("q{i}"), i % 2)).collect();
    let server = GameServer::new(
        ServerConfig {
            stage: "quarterfinal".into(),
            visibility: Visibility::Group,
            roster: Some(roster.clone()),
            budget: 1e9,
            ..ServerConfig::default()
        },
        levels,
        PhysicsConfig::default(),
    );
    let handle = serve(Arc::clone(&server), "127.0.0.1:0").map_err(|e| e.to_string())?;
    let addr = handle.local_addr();
    let results: Vec<Result<(usize, usize), String>> = std::thread::scope(|scope| {
        let workers: Vec<_> = roster
            .iter()
            .enumerate()
            .map(|(i, (agent, group))| {
                let roster = &roster;
                scope.spawn(move || -> Result<(usize, usize), String> {
                    let mut rng = StdRng::seed_from_u64(77 + i as u64);
                    let stream = TcpStream::connect(addr).map_err(|e| e.to_string())?;
                    stream.set_read_timeout(Some(Duration::from_secs(30))).unwrap();
                    let mut reader = BufReader::new(stream.try_clone().unwrap());
                    let mut writer = stream;
                    let mut send = |line: &str| -> Result<Value, String> {
                        writer.write_all(format!("{line}\n").as_bytes()).map_err(|e| e.to_string())?;
                        let mut reply = String::new();
                        if reader.read_line(&mut reply).map_err(|e| e.to_string())? == 0 {
                            return Err("connection closed".into());
                        }
                        serde_json::from_str(&reply).map_err(|e| format!("bad reply {reply}: {e}"))
                    };
                    let hello = Request::new("HELLO", json!({"agent_id": agent}), 0).to_line();
                    check(send(&hello)?["ok"] == true, "hello refused")?;
                    let (mut sent, mut scoped) = (1, 0);
                    for seq in 1..2500u64 {
                        let (line, seq_back) = random_line(&mut rng, seq);
                        let r = send(&line)?;
                        sent += 1;
                        check(r["seq"] == seq_back, format!("reply {r} does not answer {line}"))?;
                        check(r["ok"] == true || r["error"]["code"].is_string(), format!("bad reply {r}"))?;
                        if line.contains("GET_BEST_SCORES") && r["ok"] == true {
                            scoped += 1;
                            for l in r["data"]["levels"].as_array().ok_or("no levels")? {
                                if let Some(h) = l["holder"].as_str() {
                                    check(roster[h] == *group, format!("{agent} saw {h}"))?;
                                }
                            }
                        }
                    }
                    // Nothing extra is queued: the next reply answers the sentinel.
                    let r = send(r#"{"op": "TIME_LEFT", "seq": "end"}"#)?;
                    check(r["seq"] == "end", "stray reply")?;
                    Ok((sent + 1, scoped))
                })
            })
            .collect();
        workers
            .into_iter()
            .map(|w| w.join().unwrap_or_else(|_| Err("client thread panicked".into())))
            .collect()
    });
    // The server is still alive.
    let alive = TcpStream::connect(addr).is_ok();
    handle.shutdown();
    let mut total = 0;
    let mut scoped = 0;
    for r in results {
        let (n, s) = r?;
        total += n;
        scoped += s;
    }
    check(alive, "server stopped accepting connections")?;
    check(total >= 10_000, format!("only {total} messages"))?;
    Ok(format!("{total} messages, one reply each, {scoped} scoped best-score replies clean"))
}

fn validators() -> Outcome {
    let cfg = Arc::new(PhysicsConfig::default());
    let pack = pack();
    let mut worst = 0.0f64;
    for l in &pack {
        let r = validate_stability(l, Arc::clone(&cfg), 5.0, 0.1);
        check(r.stable, format!("{} unstable, drift {}", l.id, r.max_drift))?;
        worst = worst.max(r.max_drift);
    }
    let fixture = load_level_file(&levels_dir().join("fixtures/unstable_floating_box.json")).unwrap();
    let r = validate_stability(&fixture, Arc::clone(&cfg), 5.0, 0.1);
    check(!r.stable, "unstable fixture passed")?;
    let solved = pack
        .iter()
        .filter(|l| probe_solvability(&Arc::new((*l).clone()), &cfg, 3).solvable == Some(true))
        .count();
    check(solved >= 10, format!("only {solved}/12 shown solvable"))?;
    Ok(format!(
        "{} levels stable (max drift {worst:.3}); fixture drift {:.2} rejected; {solved}/{} solvable",
        pack.len(),
        r.max_drift,
        pack.len()
    ))
}

#[test]
fn acceptance() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 7] = [
        ("trajectory oracle", trajectory_oracle),
        ("determinism", determinism),
        ("selection vectors", selection_vectors),
        ("tournament semantics", tournament_semantics),
        ("agent ordering", agent_ordering),
        ("protocol robustness", protocol_fuzz),
        ("validators", validators),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for (name, f) in criteria {
        let t = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        let line = match &r {
            Ok(msg) => format!("PASS {name} ({secs:.1} s): {msg}"),
            Err(msg) => {
                failed.push(name);
                format!("FAIL {name} ({secs:.1} s): {msg}")
            }
        };
        writeln!(out, "{line}").unwrap();
        out.flush().unwrap();
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
