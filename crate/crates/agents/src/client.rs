use std::io::{self, BufRead, BufReader, Write};
use std::net::TcpStream;

use birdbench_core::game::{GameInfo, Shot, ShotOutcome};
use birdbench_core::model::BirdType;
use birdbench_core::percept::Percept;
use birdbench_server::{Connection, ErrorCode, LevelBest, Phase, Request, Response};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

/// Carries one request line to the server and brings back its response.
pub trait Transport: Send {
    fn exchange(&mut self, line: &str) -> io::Result<String>;
}

pub struct TcpTransport {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl TcpTransport {
    pub fn connect(host: &str, port: u16) -> io::Result<TcpTransport> {
        let stream = TcpStream::connect((host, port))?;
        stream.set_nodelay(true)?;
        Ok(TcpTransport {
            reader: BufReader::new(stream.try_clone()?),
            writer: stream,
        })
    }
}

impl Transport for TcpTransport {
    fn exchange(&mut self, line: &str) -> io::Result<String> {
        self.writer.write_all(format!("{line}\n").as_bytes())?;
        let mut reply = String::new();
        if self.reader.read_line(&mut reply)? == 0 {
            return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "server closed the connection"));
        }
        Ok(reply)
    }
}

/// In-process transport straight into a server connection.
pub struct LocalTransport(pub Connection);

impl Transport for LocalTransport {
    fn exchange(&mut self, line: &str) -> io::Result<String> {
        Ok(self.0.handle_line(line))
    }
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("server error {code:?}: {message}")]
    Server { code: ErrorCode, message: String },
    #[error("unexpected response: {0}")]
    Decode(String),
}

impl ClientError {
    pub fn code(&self) -> Option<ErrorCode> {
        match self {
            ClientError::Server { code, .. } => Some(*code),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct Welcome {
    pub agent_id: String,
    pub group: u32,
    pub stage: String,
    pub levels: usize,
    pub level_ids: Vec<String>,
    pub time_left: f64,
    pub resumed: bool,
    pub info: GameInfo,
}

#[derive(Clone, Debug, Deserialize)]
pub struct LoadedLevel {
    pub level: usize,
    pub level_id: String,
    pub birds: Vec<BirdType>,
    pub pigs: usize,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct LevelScore {
    pub level: usize,
    pub best: i64,
    pub solved: bool,
    pub attempts: u32,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct MyScore {
    pub levels: Vec<LevelScore>,
    pub total: i64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
pub struct TimeLeft {
    pub time_left: f64,
    pub phase: Phase,
}

#[derive(Deserialize)]
struct BestScores {
    levels: Vec<LevelBest>,
}

/// Blocking request/response session with the game server.
pub struct Client {
    transport: Box<dyn Transport>,
    seq: u64,
    welcome: Welcome,
    sent: Option<Vec<String>>,
}

impl Client {
    /// Performs the `HELLO` handshake over `transport`.
    pub fn connect(transport: Box<dyn Transport>, agent_id: &str) -> Result<Client, ClientError> {
        Client::connect_recorded(transport, agent_id, false)
    }

    /// Like [`Client::connect`], optionally keeping every request line sent.
    pub fn connect_recorded(
        mut transport: Box<dyn Transport>,
        agent_id: &str,
        record: bool,
    ) -> Result<Client, ClientError> {
        let line = Request::new("HELLO", json!({ "agent_id": agent_id }), 1).to_line();
        let reply = transport.exchange(&line)?;
        let welcome = decode(parse_reply(&reply, 1)?)?;
        Ok(Client {
            transport,
            seq: 1,
            welcome,
            sent: record.then(|| vec![line]),
        })
    }

    pub fn connect_tcp(host: &str, port: u16, agent_id: &str) -> Result<Client, ClientError> {
        Client::connect(Box::new(TcpTransport::connect(host, port)?), agent_id)
    }

    pub fn welcome(&self) -> &Welcome {
        &self.welcome
    }

    pub fn info(&self) -> &GameInfo {
        &self.welcome.info
    }

    /// Request lines sent so far, when recording.
    pub fn sent(&self) -> Option<&[String]> {
        self.sent.as_deref()
    }

    fn request(&mut self, op: &str, args: Value) -> Result<Value, ClientError> {
        self.seq += 1;
        let line = Request::new(op, args, self.seq).to_line();
        if let Some(log) = &mut self.sent {
            log.push(line.clone());
        }
        let reply = self.transport.exchange(&line)?;
        parse_reply(&reply, self.seq)
    }

    pub fn load_level(&mut self, level: usize) -> Result<LoadedLevel, ClientError> {
        decode(self.request("LOAD_LEVEL", json!({ "level": level }))?)
    }

    pub fn restart_level(&mut self) -> Result<(), ClientError> {
        self.request("RESTART_LEVEL", json!({})).map(|_| ())
    }

    pub fn get_state(&mut self) -> Result<Percept, ClientError> {
        decode(self.request("GET_STATE", json!({}))?)
    }

    pub fn shoot(&mut self, shot: &Shot) -> Result<ShotOutcome, ClientError> {
        let args = json!({
            "angle_deg": shot.angle.to_degrees(),
            "speed_fraction": shot.speed_fraction,
            "tap_ms": shot.tap_ms,
        });
        decode(self.request("SHOOT", args)?)
    }

    pub fn my_score(&mut self) -> Result<MyScore, ClientError> {
        decode(self.request("GET_MY_SCORE", json!({}))?)
    }

    pub fn best_scores(&mut self) -> Result<Vec<LevelBest>, ClientError> {
        decode::<BestScores>(self.request("GET_BEST_SCORES", json!({}))?).map(|b| b.levels)
    }

    pub fn time_left(&mut self) -> Result<TimeLeft, ClientError> {
        decode(self.request("TIME_LEFT", json!({}))?)
    }
}

fn parse_reply(reply: &str, seq: u64) -> Result<Value, ClientError> {
    let r: Response = serde_json::from_str(reply).map_err(|e| ClientError::Decode(e.to_string()))?;
    if r.seq != seq {
        return Err(ClientError::Decode(format!("expected seq {seq}, got {}", r.seq)));
    }
    match (r.ok, r.data, r.error) {
        (true, Some(data), _) => Ok(data),
        (false, _, Some(e)) => Err(ClientError::Server {
            code: e.code,
            message: e.message,
        }),
        _ => Err(ClientError::Decode("response has neither data nor error".into())),
    }
}

fn decode<T: DeserializeOwned>(v: Value) -> Result<T, ClientError> {
    serde_json::from_value(v).map_err(|e| ClientError::Decode(e.to_string()))
}
