//! Minimal evaluator for the child-process protocol: answers every eval with
//! the squared norm of the point.
//!
//! Flags: `--dim N` (default 3), `--mismatch` (reply with a wrong id),
//! `--die-after K` (exit after K replies).

use std::io::{BufRead, Write};

use optbench::Message;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let value_of = |flag: &str| args.iter().position(|a| a == flag).and_then(|i| args.get(i + 1)).and_then(|v| v.parse().ok());
    let dim: usize = value_of("--dim").unwrap_or(3);
    let die_after: Option<usize> = value_of("--die-after");
    let mismatch = args.iter().any(|a| a == "--mismatch");

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let hello = Message::Hello { dimension: dim, variables: None };
    writeln!(out, "{}", serde_json::to_string(&hello).unwrap()).unwrap();
    out.flush().unwrap();
    let mut answered = 0;
    for line in std::io::stdin().lock().lines() {
        let Ok(line) = line else { break };
        let Ok(Message::Eval { id, point }) = serde_json::from_str::<Message>(&line) else { continue };
        if die_after.is_some_and(|k| answered >= k) {
            std::process::exit(3);
        }
        let value = point.iter().map(|v| v * v).sum();
        let id = if mismatch { id + 1 } else { id };
        writeln!(out, "{}", serde_json::to_string(&Message::Loss { id, value }).unwrap()).unwrap();
        out.flush().unwrap();
        answered += 1;
    }
}
