//! Wire format: one JSON object per line in each direction.
//!
//! Requests are `{"op", "args", "seq"}`; every request gets exactly one
//! response `{"seq", "ok", "data"}` or `{"seq", "ok", "error"}`, in order.

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub op: String,
    #[serde(default)]
    pub args: Value,
    #[serde(default)]
    pub seq: Value,
}

impl Request {
    pub fn new(op: &str, args: Value, seq: u64) -> Request {
        Request {
            op: op.to_string(),
            args,
            seq: Value::from(seq),
        }
    }

    /// Canonical single-line encoding (keys of `args` sorted).
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("request serializes")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorCode {
    Malformed,
    UnknownOp,
    BadArgs,
    NotAuthenticated,
    Rejected,
    NoLevel,
    OutOfBirds,
    LevelOver,
    RoundClosed,
    IllegalAction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: ErrorCode,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub seq: Value,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

impl Response {
    pub fn ok(seq: Value, data: Value) -> Response {
        Response {
            seq,
            ok: true,
            data: Some(data),
            error: None,
        }
    }

    pub fn err(seq: Value, code: ErrorCode, message: impl Into<String>) -> Response {
        Response {
            seq,
            ok: false,
            data: None,
            error: Some(ErrorBody {
                code,
                message: message.into(),
            }),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("response serializes")
    }
}

/// A parsed, argument-checked operation.
#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    Hello { agent_id: String },
    LoadLevel { level: usize },
    RestartLevel,
    GetState { debug_svg: bool },
    Shoot { angle_deg: f64, speed_fraction: f64, tap_ms: u64 },
    GetMyScore,
    GetBestScores,
    TimeLeft,
}

pub const OPS: [&str; 8] = [
    "HELLO",
    "LOAD_LEVEL",
    "RESTART_LEVEL",
    "GET_STATE",
    "SHOOT",
    "GET_MY_SCORE",
    "GET_BEST_SCORES",
    "TIME_LEFT",
];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HelloArgs {
    agent_id: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadArgs {
    level: usize,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct StateArgs {
    #[serde(default)]
    debug_svg: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ShootArgs {
    angle_deg: f64,
    speed_fraction: f64,
    #[serde(default)]
    tap_ms: u64,
}

fn args<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T, (ErrorCode, String)> {
    let v = if v.is_null() { Value::Object(Default::default()) } else { v.clone() };
    serde_json::from_value(v).map_err(|e| (ErrorCode::BadArgs, e.to_string()))
}

fn no_args(v: &Value) -> Result<(), (ErrorCode, String)> {
    match v {
        Value::Null => Ok(()),
        Value::Object(m) if m.is_empty() => Ok(()),
        _ => Err((ErrorCode::BadArgs, "this op takes no arguments".to_string())),
    }
}

impl Op {
    pub fn parse(req: &Request) -> Result<Op, (ErrorCode, String)> {
        let op = match req.op.as_str() {
            "HELLO" => {
                let a: HelloArgs = args(&req.args)?;
                if a.agent_id.trim().is_empty() {
                    return Err((ErrorCode::BadArgs, "agent_id must be nonempty".into()));
                }
                Op::Hello { agent_id: a.agent_id }
            }
            "LOAD_LEVEL" => Op::LoadLevel {
                level: args::<LoadArgs>(&req.args)?.level,
            },
            "RESTART_LEVEL" => {
                no_args(&req.args)?;
                Op::RestartLevel
            }
            "GET_STATE" => Op::GetState {
                debug_svg: args::<StateArgs>(&req.args)?.debug_svg,
            },
            "SHOOT" => {
                let a: ShootArgs = args(&req.args)?;
                if !(a.angle_deg.is_finite() && (0.0..90.0).contains(&a.angle_deg)) {
                    return Err((ErrorCode::BadArgs, "angle_deg must lie in [0, 90)".into()));
                }
                if !(a.speed_fraction.is_finite() && (0.0..=1.0).contains(&a.speed_fraction)) {
                    return Err((ErrorCode::BadArgs, "speed_fraction must lie in [0, 1]".into()));
                }
                Op::Shoot {
                    angle_deg: a.angle_deg,
                    speed_fraction: a.speed_fraction,
                    tap_ms: a.tap_ms,
                }
            }
            "GET_MY_SCORE" => {
                no_args(&req.args)?;
                Op::GetMyScore
            }
            "GET_BEST_SCORES" => {
                no_args(&req.args)?;
                Op::GetBestScores
            }
            "TIME_LEFT" => {
                no_args(&req.args)?;
                Op::TimeLeft
            }
            other => return Err((ErrorCode::UnknownOp, format!("unknown op `{other}`"))),
        };
        Ok(op)
    }

    /// Ops that change game state; refused once the round clock has run out.
    pub fn is_action(&self) -> bool {
        matches!(self, Op::LoadLevel { .. } | Op::RestartLevel | Op::Shoot { .. })
    }
}
