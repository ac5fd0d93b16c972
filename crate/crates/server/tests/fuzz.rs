use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::PathBuf;

use birdbench_core::level::load_pack;
use birdbench_core::physics::PhysicsConfig;
use birdbench_server::{serve, GameServer, Request, ServerConfig, Visibility, OPS};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

fn random_args(rng: &mut StdRng, op: &str) -> Value {
    match (op, rng.random_range(0..6)) {
        (_, 0) => json!({"junk": rng.random::<u32>()}),
        (_, 1) => Value::Null,
        ("HELLO", _) => json!({"agent_id": "x"}),
        ("LOAD_LEVEL", _) => json!({"level": rng.random_range(0..3)}),
        ("GET_STATE", _) => json!({"debug_svg": rng.random_bool(0.1)}),
        ("SHOOT", _) => json!({
            "angle_deg": rng.random_range(-10.0..100.0),
            "speed_fraction": rng.random_range(-0.2..1.2),
            "tap_ms": rng.random_range(0..3000),
        }),
        _ => json!({}),
    }
}

fn random_line(rng: &mut StdRng, seq: u64) -> (String, Option<Value>) {
    match rng.random_range(0..10) {
        0 => ("{\"op\": \"SHOOT\", \"args\": {".to_string(), None),
        1 => ("[1, 2, 3]".to_string(), None),
        2 => (format!("{{\"seq\": {seq}, \"args\": 5}}"), Some(json!(seq))),
        3 => (format!("{{\"op\": \"DANCE\", \"seq\": {seq}}}"), Some(json!(seq))),
        _ => {
            let op = OPS[rng.random_range(0..OPS.len())];
            let args = random_args(rng, op);
            (Request::new(op, args, seq).to_line(), Some(json!(seq)))
        }
    }
}

#[test]
fn ten_thousand_mixed_messages() {
    let levels = load_pack(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../levels")).unwrap();
    let levels = levels.into_iter().take(3).collect::<Vec<_>>();
    let roster: BTreeMap<String, u32> = (0..4).map(|i| (format!("agent{i}"), i % 2)).collect();
    let config = ServerConfig {
        stage: "quarterfinal".into(),
        visibility: Visibility::Group,
        roster: Some(roster.clone()),
        budget: 1e9,
        ..ServerConfig::default()
    };
    let server = GameServer::new(config, levels, PhysicsConfig::default());
    let handle = serve(server.clone(), "127.0.0.1:0").unwrap();
    let addr = handle.local_addr();

    std::thread::scope(|scope| {
        for (i, (agent, group)) in roster.iter().enumerate() {
            let roster = &roster;
            scope.spawn(move || {
                let mut rng = StdRng::seed_from_u64(i as u64);
                let stream = TcpStream::connect(addr).unwrap();
                stream.set_nodelay(true).unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut writer = stream;
                let mut send = |line: &str| {
                    writer.write_all(format!("{line}\n").as_bytes()).unwrap();
                    let mut reply = String::new();
                    assert!(reader.read_line(&mut reply).unwrap() > 0, "server closed the connection");
                    serde_json::from_str::<Value>(&reply).unwrap()
                };
                let hello = Request::new("HELLO", json!({"agent_id": agent}), 0).to_line();
                assert_eq!(send(&hello)["ok"], true);
                for seq in 1..=2500u64 {
                    let (line, expected_seq) = random_line(&mut rng, seq);
                    let r = send(&line);
                    assert_eq!(r["seq"], expected_seq.unwrap_or(Value::Null), "for {line}");
                    assert!(r["ok"].is_boolean());
                    assert!(r["ok"] == true || r["error"]["code"].is_string());
                    if line.contains("GET_BEST_SCORES") && r["ok"] == true {
                        for lb in r["data"]["levels"].as_array().unwrap() {
                            if let Some(h) = lb["holder"].as_str() {
                                assert_eq!(roster[h], *group, "cross-group best leaked");
                            }
                        }
                    }
                }
            });
        }
    });
    handle.shutdown();
}
