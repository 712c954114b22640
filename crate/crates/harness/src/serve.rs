//! Line-delimited JSON protocol over any reader/writer pair.
//!
//! Requests, one object per line:
//! `{"cmd":"reset","config":{"episode.seed":3,...}}` → `{"obs":[..14]}`,
//! `{"cmd":"step","action":[f,i]}` → `{"obs":[..],"reward":r,"done":b,"info":{..}}`,
//! `{"cmd":"close"}` → `{"ok":true}`. Failures answer `{"error":"..."}` and
//! the loop keeps going.

use std::io::{self, BufRead, Write};

use serde_json::ser::Formatter;
use serde_json::{json, Map, Value};

use agrosim_core::config::Section;
use agrosim_core::{Action, Config, CropEnv};

/// Writes every float with 17 significant digits, enough to round-trip.
struct FullPrecision;

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes `value` on one line with full-precision floats.
pub fn to_line(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    serde::Serialize::serialize(value, &mut ser).expect("serializing a JSON value cannot fail");
    String::from_utf8(buf).expect("JSON output is UTF-8")
}

fn error(message: impl std::fmt::Display) -> Value {
    json!({ "error": message.to_string() })
}

fn config_value(v: &Value) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        Value::Null => Ok(String::new()),
        other => Err(format!("config values must be scalars, got {other}")),
    }
}

struct Session {
    base: Config,
    env: Option<CropEnv>,
}

impl Session {
    fn reset(&mut self, req: &Map<String, Value>) -> Result<Value, String> {
        let mut cfg = self.base.clone();
        match req.get("config") {
            None | Some(Value::Null) => {}
            Some(Value::Object(pairs)) => {
                for (k, v) in pairs {
                    let value = config_value(v)?;
                    match cfg.set(k, &value) {
                        Ok(true) => {}
                        Ok(false) => return Err(format!("unknown config key `{k}`")),
                        Err(e) => return Err(e.to_string()),
                    }
                }
            }
            Some(_) => return Err("`config` must be an object".into()),
        }
        match req.get("seed") {
            None | Some(Value::Null) => {}
            Some(v) => cfg.seed = v.as_u64().ok_or("`seed` must be a non-negative integer")?,
        }
        let mut env = CropEnv::new(cfg).map_err(|e| e.to_string())?;
        let obs = env.reset();
        self.env = Some(env);
        Ok(json!({ "obs": obs.0.to_vec() }))
    }

    fn step(&mut self, req: &Map<String, Value>) -> Result<Value, String> {
        let action = match req.get("action") {
            Some(Value::Array(a)) if a.len() == 2 => {
                let num = |v: &Value| v.as_f64().ok_or("action entries must be numbers");
                Action::new(num(&a[0])?, num(&a[1])?)
            }
            _ => return Err("`action` must be an array [fertilizer, irrigation]".into()),
        };
        let env = self.env.as_mut().ok_or("no episode; send reset first")?;
        let out = env.step(action).map_err(|e| e.to_string())?;
        let info = serde_json::to_value(out.info).map_err(|e| e.to_string())?;
        Ok(json!({
            "obs": out.obs.0.to_vec(),
            "reward": out.reward,
            "done": out.done,
            "info": info,
        }))
    }
}

/// Answers requests from `input` on `output` until `close` or end of input.
/// Every `reset` starts from `base` plus the request's config overrides.
pub fn serve<R: BufRead, W: Write>(base: &Config, input: R, mut output: W) -> io::Result<()> {
    let mut session = Session { base: base.clone(), env: None };
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut close = false;
        let reply = match serde_json::from_str::<Value>(&line) {
            Err(e) => error(format!("malformed JSON: {e}")),
            Ok(Value::Object(req)) => {
                let result = match req.get("cmd").and_then(Value::as_str) {
                    Some("reset") => session.reset(&req),
                    Some("step") => session.step(&req),
                    Some("close") => {
                        close = true;
                        Ok(json!({ "ok": true }))
                    }
                    Some(other) => Err(format!("unknown command `{other}`; expected reset, step or close")),
                    None => Err("missing string field `cmd`".into()),
                };
                result.unwrap_or_else(error)
            }
            Ok(_) => error("request must be a JSON object"),
        };
        writeln!(output, "{}", to_line(&reply))?;
        output.flush()?;
        if close {
            break;
        }
    }
    Ok(())
}
