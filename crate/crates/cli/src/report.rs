use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde_json::{json, Value};

use crate::args::{Format, GlobalArgs};
use crate::error::CliError;

/// Result of one instance: a JSON body, CSV rows and whether a hypothesis failed.
pub struct Entry {
    pub name: String,
    pub outcome: Result<Output, CliError>,
}

pub struct Output {
    pub body: Value,
    pub csv_rows: Vec<String>,
    pub hypothesis_failed: bool,
}

impl Output {
    pub fn ok(body: Value, csv_rows: Vec<String>) -> Self {
        Output { body, csv_rows, hypothesis_failed: false }
    }
}

pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub csv_header: &'static str,
    pub entries: Vec<Entry>,
}

/// Runs `f` on `0..n` with at most `jobs` threads; results keep their index order.
pub fn run_parallel<T: Send>(n: usize, jobs: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let jobs = jobs.clamp(1, n.max(1));
    if jobs == 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|sc| {
        for _ in 0..jobs {
            sc.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let r = f(i);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|r| r.expect("worker finished")).collect()
}

impl Report {
    /// 1 if any instance hit a structural error, else 2 if any failed a hypothesis, else 0.
    pub fn exit_code(&self) -> i32 {
        let mut code = 0;
        for e in &self.entries {
            match &e.outcome {
                Err(err) if !err.is_hypothesis() => return 1,
                Err(_) => code = 2,
                Ok(o) if o.hypothesis_failed => code = 2,
                Ok(_) => {}
            }
        }
        code
    }

    pub fn diagnostics(&self) -> Vec<String> {
        self.entries
            .iter()
            .filter_map(|e| e.outcome.as_ref().err().map(|err| format!("{}: {err}", e.name)))
            .collect()
    }

    pub fn render(&self, g: &GlobalArgs) -> String {
        match g.format {
            Format::Json => self.render_json(g),
            Format::Csv => self.render_csv(),
        }
    }

    fn render_json(&self, g: &GlobalArgs) -> String {
        let results: Vec<Value> = self
            .entries
            .iter()
            .map(|e| match &e.outcome {
                Ok(o) => {
                    let mut v = json!({ "instance": e.name });
                    if let (Value::Object(dst), Value::Object(src)) = (&mut v, &o.body) {
                        dst.extend(src.clone());
                    }
                    v
                }
                Err(err) => json!({
                    "instance": e.name,
                    "error": {
                        "kind": if err.is_hypothesis() { "hypothesis" } else { "structural" },
                        "message": err.to_string(),
                    }
                }),
            })
            .collect();
        let mut doc = json!({
            "command": self.command,
            "config": self.config,
            "exit_code": self.exit_code(),
            "results": results,
        });
        if !g.no_meta {
            doc["meta"] = meta();
        }
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    fn render_csv(&self) -> String {
        let mut s = format!("{}\n", self.csv_header);
        for e in &self.entries {
            if let Ok(o) = &e.outcome {
                for row in &o.csv_rows {
                    s.push_str(row);
                    s.push('\n');
                }
            }
        }
        s
    }
}

fn meta() -> Value {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "tool": "iet",
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix": secs,
    })
}

/// Quotes a CSV field when needed.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
