//! The request stream of a seeded naive run is pinned byte for byte. Other
//! client implementations compare their own streams against the same file.
//!
//! Set `BIRDBENCH_BLESS=1` to rewrite the file after an intended change.

use std::path::PathBuf;

use birdbench_agents::{play, Client, LevelPolicy, LocalTransport, MyScore, NaiveAgent};
use birdbench_core::level::load_level_file;
use birdbench_core::physics::PhysicsConfig;
use birdbench_server::{GameServer, ServerConfig};

struct FirstLevelOnce(bool);

impl LevelPolicy for FirstLevelOnce {
    fn next_level(&mut self, _: &MyScore) -> Option<usize> {
        (!std::mem::replace(&mut self.0, true)).then_some(0)
    }
}

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn recorded_run(seed: u64) -> (Vec<String>, MyScore) {
    let level = load_level_file(&root().join("../../levels/L01_unprotected_pig.json")).unwrap();
    let server = GameServer::new(ServerConfig::default(), vec![level], PhysicsConfig::default());
    let transport = LocalTransport(server.connect());
    let mut client = Client::connect_recorded(Box::new(transport), "naive-7", true).unwrap();
    let mut agent = NaiveAgent::new(seed);
    let (score, _) = play(&mut client, &mut agent, &mut FirstLevelOnce(false)).unwrap();
    (client.sent().unwrap().to_vec(), score)
}

#[test]
fn naive_seed_7_request_stream_matches_golden_file() {
    let (lines, score) = recorded_run(7);
    assert!(score.levels[0].solved);
    let text = lines.join("\n") + "\n";
    let path = root().join("tests/golden/naive_seed7_l01.jsonl");
    if std::env::var_os("BIRDBENCH_BLESS").is_some() {
        std::fs::write(&path, &text).unwrap();
    }
    let golden = std::fs::read_to_string(&path).expect("golden file missing; run with BIRDBENCH_BLESS=1");
    assert_eq!(text, golden);
}

#[test]
fn same_seed_same_stream() {
    assert_eq!(recorded_run(7).0, recorded_run(7).0);
}

#[test]
fn stream_starts_with_hello_and_counts_up() {
    let (lines, _) = recorded_run(7);
    let seqs: Vec<u64> = lines
        .iter()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["seq"].as_u64().unwrap())
        .collect();
    assert!(lines[0].contains("\"HELLO\""));
    assert_eq!(seqs, (1..=lines.len() as u64).collect::<Vec<_>>());
}
