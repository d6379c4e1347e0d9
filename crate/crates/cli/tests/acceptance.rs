//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs with `cargo test -p praisetag-cli --test acceptance`. Exits non-zero
//! if any criterion fails.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use praisetag_core::annotation::{repair_bio, spans_to_tags, tags_to_spans, tokenize, validate_bio};
use praisetag_core::dataset::{
    compute_stats, load_jsonl, load_predictions, read_conll, read_jsonl, split_dataset, split_sizes, write_conll,
    write_jsonl, write_predictions,
};
use praisetag_core::evaluation::{aggregate_runs, categorize_case, partial_metrics, span_exact_metrics, token_metrics, Counts};
use praisetag_core::tagging::derive_labels;
use praisetag_core::{
    AdapterEndpoint, BioTag, CaseCategory, Corpus, EntityLabel, EntitySpan, FeedbackConfig, Lexicon, SplitConfig,
    StratifyBy, Token,
};
use praisetag_fixtures::{PRAISE_GROUPS, TAG_COUNTS};
use praisetag_service::{router, AdapterPool, AppState, Tagger};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

const MIXED: &str = "Good job! I like how you stuck with it.";
const MIXED_OUTCOME: &str = "Saying \"Good job\" is praising students for the outcome. You should focus on praising the students for their effort and process towards learning. Do you want to try responding again?";
const MIXED_EFFORT: &str =
    "Saying \"stuck with it\" is a nice example of process-focused praise, which praises students for their effort.";
const HEDGED_TEXT: &str = "I think you are committed to this.";
const HEDGED: &str =
    "Saying \"you are committed\" might be an example of praising effort. Do you want to explain your reasoning?";

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.jsonl"))
}

fn fixture(name: &str) -> Corpus {
    load_jsonl(fixture_path(name)).expect("bundled fixture loads")
}

fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap()
}

async fn post(app: &axum::Router, route: &str, body: Value) -> (StatusCode, Value) {
    let req = Request::builder()
        .method("POST")
        .uri(route)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = axum::body::to_bytes(res.into_body(), usize::MAX).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn app(tagger: Tagger) -> axum::Router {
    router(AppState::new(tagger, Lexicon::default_praise(), FeedbackConfig::default(), Vec::new()))
}

fn tag_distribution() -> Result<String, String> {
    let stats = compute_stats(&fixture("tag_count_corpus")).map_err(|e| e.to_string())?;
    let expected = [("O", 76.5), ("B-Outcome", 1.7), ("I-Outcome", 3.7), ("B-Effort", 2.6), ("I-Effort", 15.6)];
    for (i, (tag, pct)) in expected.iter().enumerate() {
        ensure!(stats.count(tag) == Some(TAG_COUNTS[i]), "{tag} count {:?}", stats.count(tag));
        ensure!(stats.percentage(tag) == Some(*pct), "{tag}: {:?} != {pct}", stats.percentage(tag));
    }
    Ok(format!("{} tokens, 76.5/1.7/3.7/2.6/15.6", stats.total()))
}

fn four_cases() -> Result<String, String> {
    let gold = fixture("four_cases_gold");
    let preds = load_predictions(fixture_path("four_cases_pred")).map_err(|e| e.to_string())?;
    let expected = [CaseCategory::Accurate, CaseCategory::Inaccurate, CaseCategory::PartiallyAccurate, CaseCategory::AccurateNone];
    for ((response, pred), want) in gold.responses().iter().zip(&preds).zip(expected) {
        ensure!(response.id() == pred.response_id, "fixture order");
        let got = categorize_case(response.gold_spans(), &pred.spans, 0.5).map_err(|e| e.to_string())?;
        ensure!(got == want, "{}: {got:?} != {want:?}", response.id());
    }
    Ok("cases 1-4 at tau 0.5".into())
}

const TAGS: [BioTag; 7] = [
    BioTag::O,
    BioTag::B(EntityLabel::Effort),
    BioTag::I(EntityLabel::Effort),
    BioTag::B(EntityLabel::Outcome),
    BioTag::I(EntityLabel::Outcome),
    BioTag::B(EntityLabel::Person),
    BioTag::I(EntityLabel::Person),
];

fn random_tags(rng: &mut impl Rng, len: usize) -> Vec<BioTag> {
    (0..len).map(|_| TAGS[rng.random_range(0..TAGS.len())]).collect()
}

fn tag_name(tag: BioTag) -> &'static str {
    match tag {
        BioTag::O => "O",
        BioTag::B(l) | BioTag::I(l) => l.as_str(),
    }
}

/// Tallies a confusion matrix over tag names and reads the counts off it.
fn brute_force(gold: &[BioTag], pred: &[BioTag]) -> BTreeMap<&'static str, Counts> {
    let mut matrix: BTreeMap<(BioTag, BioTag), u64> = BTreeMap::new();
    for i in 0..gold.len() {
        *matrix.entry((gold[i], pred[i])).or_default() += 1;
    }
    let mut out: BTreeMap<&'static str, Counts> = BTreeMap::new();
    for name in ["O", "Effort", "Outcome", "Person"] {
        let mut c = Counts::default();
        for (&(g, p), &n) in &matrix {
            if g == p && tag_name(g) == name {
                c.tp += n;
            }
            if g != p && tag_name(p) == name {
                c.fp += n;
            }
            if g != p && tag_name(g) == name {
                c.fn_ += n;
            }
        }
        out.insert(name, c);
    }
    out
}

fn token_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pairs = 2000;
    for i in 0..pairs {
        let len = rng.random_range(0..40);
        let gold = random_tags(&mut rng, len);
        let mut pred = gold.clone();
        for t in pred.iter_mut() {
            if rng.random_bool(0.3) {
                *t = TAGS[rng.random_range(0..TAGS.len())];
            }
        }
        let oracle = brute_force(&gold, &pred);
        for exclude in [true, false] {
            let report = token_metrics(&gold, &pred, exclude).map_err(|e| e.to_string())?;
            let mut total = Counts::default();
            for label in EntityLabel::ALL {
                let want = oracle[label.as_str()];
                ensure!(report.label(label).counts == want, "pair {i} {label:?}: {:?} != {want:?}", report.label(label).counts);
                total.add(want);
            }
            if exclude {
                ensure!(report.outside.is_none(), "pair {i}: O reported under exclusion");
            } else {
                ensure!(report.outside.map(|m| m.counts) == Some(oracle["O"]), "pair {i}: O counts");
                total.add(oracle["O"]);
            }
            ensure!(report.counts == total, "pair {i} exclude={exclude}: micro {:?} != {total:?}", report.counts);
        }
    }
    Ok(format!("{pairs} pairs, with and without O-exclusion"))
}

fn random_spans(rng: &mut impl Rng, n_tokens: usize) -> Vec<EntitySpan> {
    (0..rng.random_range(0..6))
        .map(|_| {
            let start = rng.random_range(0..n_tokens);
            let end = rng.random_range(start + 1..=n_tokens.min(start + 5));
            EntitySpan::new(EntityLabel::ALL[rng.random_range(0..3)], start, end)
        })
        .collect()
}

fn partial_vs_exact() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pairs = 2000;
    for i in 0..pairs {
        let n = rng.random_range(1..12);
        let gold = random_spans(&mut rng, n);
        let mut pred = random_spans(&mut rng, n);
        if rng.random_bool(0.5) {
            pred.extend(gold.iter().filter(|_| rng.random_bool(0.5)).copied());
        }
        let partial = partial_metrics(&gold, &pred, 1.0).map_err(|e| e.to_string())?;
        let exact = span_exact_metrics(&gold, &pred);
        ensure!(partial == exact, "pair {i}: {partial:?} != {exact:?}");
    }
    Ok(format!("{pairs} span-set pairs"))
}

fn word_tokens(n: usize) -> Vec<Token> {
    tokenize(&(0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" "))
}

fn bio_suite() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sequences = 12_000;
    for i in 0..sequences {
        let len = rng.random_range(0..30);
        let tags = random_tags(&mut rng, len);
        let tokens = word_tokens(len);
        let repaired = repair_bio(&tags);
        ensure!(validate_bio(&repaired.0).is_ok(), "seq {i}: repaired output invalid");
        ensure!(repair_bio(&repaired.0) == repaired, "seq {i}: repair not idempotent");
        if validate_bio(&tags).is_ok() {
            ensure!(repaired.0 == tags, "seq {i}: repair changed a valid sequence");
        }
        let spans = tags_to_spans(&tokens, &repaired.0).map_err(|e| format!("seq {i}: {e}"))?;
        let back = spans_to_tags(&tokens, &spans).map_err(|e| format!("seq {i}: {e}"))?;
        ensure!(back == repaired, "seq {i}: tags -> spans -> tags differs");
        ensure!(tags_to_spans(&tokens, &back.0).ok() == Some(spans), "seq {i}: spans -> tags -> spans differs");
    }
    Ok(format!("{sequences} random sequences"))
}

fn templates() -> Result<String, String> {
    let adapter = format!("{} hedged", env!("CARGO_BIN_EXE_praisetag-mock-adapter"));
    let endpoint = AdapterEndpoint::parse(&adapter).unwrap();
    runtime().block_on(async {
        let (status, body) = post(&app(Tagger::Lexicon), "/v1/feedback", json!({"text": MIXED})).await;
        ensure!(status == StatusCode::OK, "mixed status {status}");
        let texts: Vec<&str> = body["items"].as_array().unwrap().iter().filter_map(|i| i["text"].as_str()).collect();
        ensure!(texts == [MIXED_OUTCOME, MIXED_EFFORT], "mixed items {texts:?}");

        let pool = Arc::new(AdapterPool::new(endpoint, Duration::from_secs(5), 1));
        let (status, body) = post(&app(Tagger::External(pool)), "/v1/feedback", json!({"text": HEDGED_TEXT})).await;
        ensure!(status == StatusCode::OK, "hedged status {status}");
        ensure!(body["items"][0]["text"] == HEDGED, "hedged item {}", body["items"][0]);
        Ok("mixed-praise pair and hedged Effort at 0.4 < 0.5".to_string())
    })
}

fn membership(corpus: &Corpus) -> Vec<String> {
    corpus.responses().iter().map(|r| r.id().to_string()).collect()
}

fn splits() -> Result<String, String> {
    let corpus = fixture("praise_corpus");
    ensure!(corpus.len() == 129, "corpus has {}", corpus.len());
    ensure!(split_sizes(129, (0.7, 0.1, 0.2)) == [91, 13, 25], "split_sizes");
    for seed in [0, 1, 42, 20230907] {
        let config = SplitConfig::new((0.7, 0.1, 0.2), seed);
        let (a, b, c) = split_dataset(&corpus, &config).map_err(|e| e.to_string())?;
        ensure!([a.len(), b.len(), c.len()] == [91, 13, 25], "seed {seed}: {}/{}/{}", a.len(), b.len(), c.len());
        let (a2, b2, c2) = split_dataset(&corpus, &config).map_err(|e| e.to_string())?;
        ensure!(membership(&a) == membership(&a2) && membership(&b) == membership(&b2) && membership(&c) == membership(&c2),
            "seed {seed}: membership not reproducible");

        let stratified = SplitConfig { stratify_by: StratifyBy::PraiseLabelCombination, ..config };
        let (train, _, _) = split_dataset(&corpus, &stratified).map_err(|e| e.to_string())?;
        for (labels, size) in PRAISE_GROUPS {
            let in_corpus = corpus.responses().iter().filter(|r| derive_labels(r.gold_spans()) == labels).count();
            ensure!(in_corpus == size, "group {} has {in_corpus}", labels.combination_name());
            let in_train = train.responses().iter().filter(|r| derive_labels(r.gold_spans()) == labels).count();
            let target = 0.7 * size as f64;
            ensure!((in_train as f64 - target).abs() <= 1.0, "seed {seed} group {}: {in_train} vs {target}", labels.combination_name());
        }
    }
    Ok("91/13/25, reproducible, strata 52/29/26/22 within 1 of 70%".into())
}

fn round_trips() -> Result<String, String> {
    let mut n = 0;
    for name in ["praise_corpus", "tag_count_corpus", "four_cases_gold"] {
        let corpus = fixture(name);
        let mut buf = Vec::new();
        write_jsonl(&corpus, &mut buf).map_err(|e| e.to_string())?;
        let again = read_jsonl(buf.as_slice(), name).map_err(|e| e.to_string())?;
        ensure!(again == corpus, "{name}: JSONL round trip differs");

        let mut conll = Vec::new();
        write_conll(&corpus, &mut conll).map_err(|e| e.to_string())?;
        let imported = read_conll(conll.as_slice(), name).map_err(|e| e.to_string())?;
        ensure!(imported.len() == corpus.len(), "{name}: CoNLL lost responses");
        for (a, b) in corpus.responses().iter().zip(imported.responses()) {
            ensure!(a.id() == b.id() && a.gold_spans() == b.gold_spans(), "{name}/{}: CoNLL spans differ", a.id());
        }
        n += corpus.len();
    }
    Ok(format!("JSONL identity and CoNLL spans over {n} responses"))
}

fn aggregation() -> Result<String, String> {
    let a = aggregate_runs(&[0.8, 0.9], "f1").map_err(|e| e.to_string())?;
    ensure!((a.mean - 0.85).abs() < 1e-12, "mean {}", a.mean);
    ensure!((a.std - 0.070710678).abs() < 1e-6, "std {}", a.std);
    Ok(format!("mean {:.2}, std {:.9}", a.mean, a.std))
}

struct Spawned(Child);

impl Drop for Spawned {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn spawn_fuzz_adapter() -> (Spawned, String) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_praisetag-mock-adapter"))
        .args(["--tcp", "127.0.0.1:0", "--seed", "9", "fuzz"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    (Spawned(child), format!("tcp://{}", line.trim()))
}

fn adapter_robustness() -> Result<String, String> {
    let (_child, spec) = spawn_fuzz_adapter();
    let endpoint = AdapterEndpoint::parse(&spec).unwrap();
    let texts = [MIXED, HEDGED_TEXT, "Great job!", "ok", "You worked hard and never gave up, well done.", "¡Bravo! großartig"];

    let mut handle = endpoint.connect(Duration::from_secs(2)).map_err(|e| e.to_string())?;
    let (mut ok, mut rejected) = (0, 0);
    for i in 0..300 {
        let text = texts[i % texts.len()];
        match handle.external_tag(&format!("r{i}"), text) {
            Ok(p) => {
                ok += 1;
                p.validate(tokenize(text).len()).map_err(|e| format!("request {i}: {e}"))?;
                ensure!(p.spans.iter().all(|s| s.confidence.is_some_and(|c| (0.0..=1.0).contains(&c))), "request {i}: confidence");
            }
            Err(_) => {
                rejected += 1;
                handle = endpoint.connect(Duration::from_secs(2)).map_err(|e| e.to_string())?;
            }
        }
    }
    ensure!(ok > 0 && rejected > 0, "fuzzer produced ok={ok} rejected={rejected}");

    runtime().block_on(async {
        let strict = app(Tagger::External(Arc::new(AdapterPool::new(endpoint.clone(), Duration::from_secs(2), 2))));
        let fallback = app(Tagger::ExternalWithFallback(Arc::new(AdapterPool::new(endpoint, Duration::from_secs(2), 2))));
        for i in 0..150 {
            let body = json!({"text": texts[i % texts.len()]});
            let (status, _) = post(&strict, "/v1/annotate", body.clone()).await;
            ensure!(status == StatusCode::OK || status == StatusCode::BAD_GATEWAY, "strict request {i}: {status}");
            let (status, reply) = post(&fallback, "/v1/annotate", body).await;
            ensure!(status == StatusCode::OK, "fallback request {i}: {status}");
            let n = reply["tokens"].as_array().map_or(0, Vec::len) as u64;
            let mut last = 0;
            for s in reply["spans"].as_array().unwrap() {
                let (a, b) = (s["token_start"].as_u64().unwrap(), s["token_end"].as_u64().unwrap());
                ensure!(last <= a && a < b && b <= n, "fallback request {i}: bad span {s}");
                last = b;
            }
        }
        Ok(format!("300 direct calls ({ok} sanitized, {rejected} rejected), 150 service calls, no 5xx in fallback"))
    })
}

fn fixtures_current() -> Result<String, String> {
    for corpus in [praisetag_fixtures::praise_corpus(), praisetag_fixtures::tag_count_corpus(), praisetag_fixtures::four_cases_gold()] {
        let mut buf = Vec::new();
        write_jsonl(&corpus, &mut buf).unwrap();
        let on_disk = std::fs::read(fixture_path(corpus.name())).map_err(|e| e.to_string())?;
        ensure!(buf == on_disk, "{}.jsonl is stale; run build-fixtures", corpus.name());
    }
    let mut buf = Vec::new();
    write_predictions(&praisetag_fixtures::four_cases_predictions(), &mut buf).unwrap();
    ensure!(buf == std::fs::read(fixture_path("four_cases_pred")).map_err(|e| e.to_string())?, "four_cases_pred.jsonl is stale");
    Ok("4 files".into())
}

fn main() {
    let checks: [(&str, Check, Option<Duration>); 11] = [
        ("tag-distribution-arithmetic", tag_distribution, Some(Duration::from_secs(1))),
        ("four-case-categories", four_cases, Some(Duration::from_secs(1))),
        ("token-metric-oracle", token_oracle, Some(Duration::from_secs(30))),
        ("partial-tau1-equals-exact", partial_vs_exact, None),
        ("bio-properties", bio_suite, None),
        ("template-byte-exactness", templates, None),
        ("split-sizes-determinism-strata", splits, None),
        ("format-round-trips", round_trips, None),
        ("run-aggregation", aggregation, None),
        ("adapter-robustness", adapter_robustness, None),
        ("fixtures-match-generator", fixtures_current, None),
    ];
    let mut failed = 0;
    for (name, check, budget) in checks {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = started.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:?}, limit {limit:?}")),
            (o, _) => o,
        };
        let ms = elapsed.as_secs_f64() * 1000.0;
        match outcome {
            Ok(detail) => println!("PASS {name:<32} {ms:>8.1} ms  {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name:<32} {ms:>8.1} ms  {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
