use mfhh_core::superlin::CONVENTION;
use mfhh_core::Error;
use serde_json::{json, Map, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNSTABLE: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Unstable(_) => EXIT_UNSTABLE,
        Error::Invariant(_) | Error::Splitting(_) | Error::PotentialMismatch => EXIT_INVARIANT,
        _ => EXIT_INPUT,
    }
}

/// One command's output. The text rendering is derived from the JSON value,
/// so both carry the same data.
pub struct Report {
    command: Value,
    jet_order: Option<u32>,
    arity_window: Option<usize>,
    seed: Option<u64>,
    results: Map<String, Value>,
    flags: Map<String, Value>,
    exit_status: i32,
}

impl Report {
    pub fn new(command: Value) -> Self {
        Report {
            command,
            jet_order: None,
            arity_window: None,
            seed: None,
            results: Map::new(),
            flags: Map::new(),
            exit_status: EXIT_OK,
        }
    }

    pub fn jet_order(&mut self, n: u32) -> &mut Self {
        self.jet_order = Some(n);
        self
    }

    pub fn arity_window(&mut self, k: usize) -> &mut Self {
        self.arity_window = Some(k);
        self
    }

    pub fn seed(&mut self, s: u64) -> &mut Self {
        self.seed = Some(s);
        self
    }

    pub fn set(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.results.insert(key.to_string(), v.into());
        self
    }

    pub fn flag(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.flags.insert(key.to_string(), v.into());
        self
    }

    /// Keeps the most severe status seen so far.
    pub fn fail(&mut self, code: i32) -> &mut Self {
        if self.exit_status == EXIT_OK || code < self.exit_status {
            self.exit_status = code;
        }
        self
    }

    pub fn error(&mut self, e: &Error) -> &mut Self {
        self.results.insert("error".into(), Value::String(e.to_string()));
        self.fail(exit_code(e))
    }

    pub fn status(&self) -> i32 {
        self.exit_status
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "convention": {
                "sign": CONVENTION,
                "jet_order": self.jet_order,
                "arity_window": self.arity_window,
                "seed": self.seed,
            },
            "results": self.results,
            "flags": self.flags,
            "exit_status": self.exit_status,
        })
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("serializable") + "\n"
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        flatten("", &self.to_json(), &mut out);
        out
    }
}

fn flatten(path: &str, v: &Value, out: &mut String) {
    let join = |k: &str| {
        if path.is_empty() {
            k.to_string()
        } else {
            format!("{path}.{k}")
        }
    };
    match v {
        Value::Object(m) if !m.is_empty() => {
            for (k, x) in m {
                flatten(&join(k), x, out);
            }
        }
        Value::Array(a) if !a.is_empty() && a.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&join(&i.to_string()), x, out);
            }
        }
        Value::String(s) => {
            out.push_str(&format!("{path}: {s}\n"));
        }
        other => {
            out.push_str(&format!("{path}: {other}\n"));
        }
    }
}
