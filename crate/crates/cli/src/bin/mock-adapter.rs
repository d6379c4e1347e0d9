//! Scriptable tagger adapter for tests and demos.
//!
//! ```text
//! praisetag-mock-adapter [--tcp ADDR] [--seed N] MODE
//! ```
//!
//! Speaks the adapter protocol on stdio, or on a TCP listener with `--tcp`.
//! Modes:
//! - `lexicon`: tags with the built-in lexicon
//! - `hedged`: like `lexicon` but every confidence is 0.4
//! - `empty`: never finds anything
//! - `fuzz`: malformed lines, wrong ids, out-of-range spans, silence
//! - `sleep:MS`: waits before answering with no spans
//! - `exit`: exits on the first request without answering

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::time::Duration;

use praisetag_core::tagging::{lexicon_tag, AdapterReply, AdapterRequest, ReplySpan};
use praisetag_core::Lexicon;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy)]
enum Mode {
    Lexicon,
    Hedged,
    Empty,
    Fuzz,
    Sleep(u64),
    Exit,
}

fn parse_mode(s: &str) -> Option<Mode> {
    Some(match s {
        "lexicon" => Mode::Lexicon,
        "hedged" => Mode::Hedged,
        "empty" => Mode::Empty,
        "fuzz" => Mode::Fuzz,
        "exit" => Mode::Exit,
        _ => Mode::Sleep(s.strip_prefix("sleep:")?.parse().ok()?),
    })
}

struct Responder {
    mode: Mode,
    lexicon: Lexicon,
    rng: ChaCha8Rng,
}

impl Responder {
    /// `None` means hang up.
    fn respond(&mut self, line: &str) -> Option<String> {
        let Ok(request) = serde_json::from_str::<AdapterRequest>(line) else {
            return Some("{\"error\":\"bad request\"}".to_string());
        };
        let reply = |spans| Some(serde_json::to_string(&AdapterReply { id: request.id.clone(), spans }).unwrap());
        let from_lexicon = |lexicon: &Lexicon, confidence: Option<f64>| -> Vec<ReplySpan> {
            lexicon_tag(&request.id, &request.text, lexicon)
                .spans
                .iter()
                .map(|s| ReplySpan {
                    token_start: s.token_start as i64,
                    token_end: s.token_end as i64,
                    label: s.label,
                    confidence: confidence.or(s.confidence).unwrap_or(1.0),
                })
                .collect()
        };
        match self.mode {
            Mode::Lexicon => reply(from_lexicon(&self.lexicon, None)),
            Mode::Hedged => reply(from_lexicon(&self.lexicon, Some(0.4))),
            Mode::Empty => reply(Vec::new()),
            Mode::Sleep(ms) => {
                std::thread::sleep(Duration::from_millis(ms));
                reply(Vec::new())
            }
            Mode::Exit => std::process::exit(0),
            Mode::Fuzz => {
                let n = request.tokens.len() as i64;
                match self.rng.random_range(0..8) {
                    0 => Some("not json at all".to_string()),
                    1 => Some(r#"{"id":"someone-else","spans":[]}"#.to_string()),
                    2 => Some(format!(r#"{{"id":{:?},"spans":[{{"label":"Praise","token_start":0,"token_end":1,"confidence":0.5}}]}}"#, request.id)),
                    3 => Some(format!(r#"{{"id":{:?}}}"#, request.id)),
                    _ => {
                        let labels = [
                            praisetag_core::EntityLabel::Effort,
                            praisetag_core::EntityLabel::Outcome,
                            praisetag_core::EntityLabel::Person,
                        ];
                        let spans = (0..self.rng.random_range(0..6))
                            .map(|_| ReplySpan {
                                token_start: self.rng.random_range(-3..n + 3),
                                token_end: self.rng.random_range(-3..n + 6),
                                label: labels[self.rng.random_range(0..3)],
                                confidence: self.rng.random_range(-0.5..1.5),
                            })
                            .collect();
                        reply(spans)
                    }
                }
            }
        }
    }
}

fn serve_lines(reader: impl BufRead, mut writer: impl Write, responder: &mut Responder) {
    for line in reader.lines() {
        let Ok(line) = line else { return };
        match responder.respond(&line) {
            Some(out) => {
                if writer.write_all(format!("{out}\n").as_bytes()).and_then(|_| writer.flush()).is_err() {
                    return;
                }
            }
            None => return,
        }
    }
}

fn main() {
    let mut args = std::env::args().skip(1);
    let mut tcp = None;
    let mut seed = 0u64;
    let mut mode = None;
    while let Some(arg) = args.next() {
        match arg.as_str() {
            "--tcp" => tcp = args.next(),
            "--seed" => seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0),
            other => mode = parse_mode(other),
        }
    }
    let Some(mode) = mode else {
        eprintln!("usage: praisetag-mock-adapter [--tcp ADDR] [--seed N] lexicon|hedged|empty|fuzz|sleep:MS|exit");
        std::process::exit(1);
    };
    let responder = |seed| Responder { mode, lexicon: Lexicon::default_praise(), rng: ChaCha8Rng::seed_from_u64(seed) };
    match tcp {
        None => serve_lines(std::io::stdin().lock(), std::io::stdout().lock(), &mut responder(seed)),
        Some(addr) => {
            let listener = TcpListener::bind(&addr).expect("bind");
            println!("{}", listener.local_addr().expect("local addr"));
            // One thread per connection; each gets its own seed so runs stay
            // reproducible per connection.
            for (n, stream) in listener.incoming().flatten().enumerate() {
                let mut responder = responder(seed.wrapping_add(n as u64));
                std::thread::spawn(move || {
                    let _ = stream.set_nodelay(true);
                    let reader = BufReader::new(stream.try_clone().expect("clone stream"));
                    serve_lines(reader, stream, &mut responder);
                });
            }
        }
    }
}
