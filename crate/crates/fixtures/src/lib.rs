//! Synthetic corpora shipped under `fixtures/`.
//!
//! Authored texts arranged to hit fixed tag counts and label-group sizes.
//! Everything is generated from
//! fixed seeds; `build-fixtures` rewrites the files and the acceptance suite
//! checks that the committed copies still match.

use std::collections::BTreeMap;

use praisetag_core::annotation::tokenize;
use praisetag_core::dataset::Corpus;
use praisetag_core::{AnnotatedResponse, EntityLabel, EntitySpan, PraiseLabels, Prediction, Token};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use EntityLabel::{Effort, Outcome};

pub const PRAISE_CORPUS: &str = "praise_corpus";
pub const TAG_COUNT_CORPUS: &str = "tag_count_corpus";
pub const FOUR_CASES_GOLD: &str = "four_cases_gold";
pub const FOUR_CASES_PRED: &str = "four_cases_pred";

/// Label-combination group sizes of the praise corpus: effort only, both,
/// outcome only, neither.
pub const PRAISE_GROUPS: [(PraiseLabels, usize); 4] = [
    (PraiseLabels { effort: true, outcome: false, person: false }, 52),
    (PraiseLabels { effort: true, outcome: true, person: false }, 29),
    (PraiseLabels { effort: false, outcome: true, person: false }, 26),
    (PraiseLabels { effort: false, outcome: false, person: false }, 22),
];

/// Gold tag counts of the tag-count corpus in `TAG_ORDER`.
pub const TAG_COUNTS: [usize; 7] = [2380, 53, 114, 80, 484, 0, 0];

const SEED: u64 = 20230907;

/// Accumulates text while remembering the character ranges of labelled
/// fragments, then maps those ranges onto tokens.
#[derive(Default)]
struct TextBuilder {
    text: String,
    chars: usize,
    marks: Vec<(EntityLabel, usize, usize)>,
}

impl TextBuilder {
    fn plain(&mut self, s: &str) -> &mut Self {
        self.text.push_str(s);
        self.chars += s.chars().count();
        self
    }

    fn span(&mut self, label: EntityLabel, s: &str) -> &mut Self {
        let start = self.chars;
        self.plain(s);
        self.marks.push((label, start, self.chars));
        self
    }

    fn sentence_break(&mut self) {
        if !self.text.is_empty() {
            self.plain(" ");
        }
    }

    fn finish(self, id: &str, meta: BTreeMap<String, String>) -> AnnotatedResponse {
        let tokens = tokenize(&self.text);
        let spans = self
            .marks
            .iter()
            .map(|&(label, start, end)| {
                let first = tokens.iter().position(|t| t.char_start == start);
                let last = tokens.iter().position(|t| t.char_end == end);
                match (first, last) {
                    (Some(a), Some(b)) => EntitySpan::new(label, a, b + 1),
                    _ => panic!("fragment {start}..{end} of `{}` is not token aligned", self.text),
                }
            })
            .collect();
        AnnotatedResponse::new(id, self.text, spans, meta).expect("generated response is valid")
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

const EFFORT_VERBS: &[&str] = &[
    "worked hard",
    "stuck with it",
    "kept trying",
    "never gave up",
    "put in a lot of effort",
    "worked through every step carefully",
    "kept going even when it got tough",
    "tried some different approaches",
    "stayed focused the whole time",
];

const OUTCOME_EXCLAIMS: &[&str] = &["Great job", "Good job", "Well done", "Nice job", "Awesome job", "Excellent work"];

const OUTCOME_VERBS: &[&str] = &["got the right answer", "got it right", "did well", "solved it correctly", "aced this problem"];

const NEUTRAL: &[&str] = &[
    "Let's work together.",
    "Let's look at the next problem.",
    "Can you show me how you set it up?",
    "What do you think the first step should be?",
    "Take a deep breath and read the question again.",
    "I am glad you asked for help today.",
    "We can do this homework together.",
    "Tell me what you tried so far.",
    "Remember to write down each step.",
    "Try your best to focus on the next step.",
];

fn effort_sentence(b: &mut TextBuilder, rng: &mut ChaCha8Rng) {
    b.sentence_break();
    match rng.random_range(0..4) {
        0 => {
            b.plain("You ").span(Effort, EFFORT_VERBS.choose(rng).unwrap()).plain(".");
        }
        1 => {
            b.plain("I can tell you ").span(Effort, EFFORT_VERBS.choose(rng).unwrap()).plain(" on this one.");
        }
        2 => {
            b.plain("I'm proud that you ").span(Effort, EFFORT_VERBS.choose(rng).unwrap()).plain(" today.");
        }
        _ => {
            b.span(Effort, "Good job working through this")
                .plain(" and ")
                .span(Effort, "trying some different approaches")
                .plain(".");
        }
    }
}

fn outcome_sentence(b: &mut TextBuilder, rng: &mut ChaCha8Rng) {
    b.sentence_break();
    match rng.random_range(0..3) {
        0 => {
            b.span(Outcome, OUTCOME_EXCLAIMS.choose(rng).unwrap()).plain("!");
        }
        1 => {
            b.plain("You ").span(Outcome, OUTCOME_VERBS.choose(rng).unwrap()).plain(".");
        }
        _ => {
            b.plain("You're already ").span(Outcome, "doing great so far").plain(".");
        }
    }
}

fn neutral_sentence(b: &mut TextBuilder, rng: &mut ChaCha8Rng) {
    b.sentence_break();
    b.plain(NEUTRAL.choose(rng).unwrap());
}

fn meta(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// 129 responses whose praise-label combinations follow [`PRAISE_GROUPS`].
pub fn praise_corpus() -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut plan: Vec<PraiseLabels> =
        PRAISE_GROUPS.iter().flat_map(|(labels, n)| std::iter::repeat_n(*labels, *n)).collect();
    plan.shuffle(&mut rng);

    let responses = plan
        .iter()
        .enumerate()
        .map(|(i, labels)| {
            let mut b = TextBuilder::default();
            let lead_neutral = rng.random_bool(0.3);
            if lead_neutral || (!labels.effort && !labels.outcome) {
                neutral_sentence(&mut b, &mut rng);
            }
            let outcome_first = rng.random_bool(0.5);
            if labels.outcome && outcome_first {
                outcome_sentence(&mut b, &mut rng);
            }
            if labels.effort {
                effort_sentence(&mut b, &mut rng);
            }
            if labels.outcome && !outcome_first {
                outcome_sentence(&mut b, &mut rng);
            }
            for _ in 0..rng.random_range(0..=2) {
                neutral_sentence(&mut b, &mut rng);
            }
            let scenario = format!("s{}", i % 5 + 1);
            b.finish(
                &format!("praise-{:03}", i + 1),
                meta(&[("lesson", "giving-effective-praise".into()), ("scenario", scenario), ("source", "synthetic".into())]),
            )
        })
        .collect();
    Corpus::new(PRAISE_CORPUS, responses).expect("ids are unique")
}

const COUNT_OUTCOME_3: &[&str] = &["great job today", "nice work today", "got it right", "good job there", "well done today"];
const COUNT_OUTCOME_4: &[&str] = &["you did great work", "you got it right", "that was excellent work"];
const COUNT_EFFORT_7: &[&str] = &[
    "kept going even when it got hard",
    "stuck with it and tried new ideas",
    "worked really hard on every single step",
    "took your time and checked each step",
    "tried again right after the first mistake",
];
const COUNT_EFFORT_8: &[&str] =
    &["kept trying different ways to solve the problem", "stayed focused and worked through every single step"];

/// 129 responses whose gold tags total exactly [`TAG_COUNTS`].
///
/// 53 Outcome spans (45 of three tokens, 8 of four) and 80 Effort spans (76
/// of seven tokens, 4 of eight) give the B and I counts; neutral sentences
/// are then dealt out until the O count is met.
pub fn tag_count_corpus() -> Corpus {
    const N: usize = 129;
    let mut builders: Vec<TextBuilder> = (0..N).map(|_| TextBuilder::default()).collect();
    for (i, b) in builders.iter_mut().enumerate() {
        if i < 80 {
            let phrase = if i < 4 { COUNT_EFFORT_8[i % 2] } else { COUNT_EFFORT_7[i % COUNT_EFFORT_7.len()] };
            b.plain("You ").span(Effort, phrase).plain(".");
        }
        if (40..93).contains(&i) {
            let k = i - 40;
            let phrase = if k < 8 { COUNT_OUTCOME_4[k % 3] } else { COUNT_OUTCOME_3[k % COUNT_OUTCOME_3.len()] };
            b.sentence_break();
            b.span(Outcome, &capitalize(phrase)).plain("!");
        }
    }

    let outside = |b: &TextBuilder| -> usize {
        let inside = |t: &Token| b.marks.iter().any(|&(_, s, e)| t.char_start >= s && t.char_end <= e);
        tokenize(&b.text).iter().filter(|t| !inside(t)).count()
    };
    let mut remaining = TAG_COUNTS[0] - builders.iter().map(outside).sum::<usize>();
    let fillers: Vec<(&str, usize)> = NEUTRAL.iter().chain(["Okay"].iter()).map(|s| (*s, tokenize(s).len())).collect();
    let mut i = 0;
    while remaining > 0 {
        let preferred = fillers[i % NEUTRAL.len()];
        let (s, n) = if preferred.1 <= remaining {
            preferred
        } else {
            fillers.iter().copied().find(|(_, n)| *n <= remaining).expect("a one-token filler exists")
        };
        let b = &mut builders[(i * 7) % N];
        b.sentence_break();
        b.plain(s);
        remaining -= n;
        i += 1;
    }

    let responses = builders
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.finish(&format!("count-{:03}", i + 1), meta(&[("source", "synthetic".into())])))
        .collect();
    Corpus::new(TAG_COUNT_CORPUS, responses).expect("ids are unique")
}

/// The four worked cases: accurate, missed, partially right, and a response
/// with no praise at all.
pub fn four_cases_gold() -> Corpus {
    let mut c1 = TextBuilder::default();
    c1.span(Effort, "Good job working through this").plain(" and trying some different approaches.");
    let mut c2 = TextBuilder::default();
    c2.plain("Try your best to focus on the next step, you're already ").span(Outcome, "doing great so far").plain(".");
    let mut c3 = TextBuilder::default();
    c3.plain("You did it, you did well, ")
        .span(Outcome, "you got the right answer")
        .plain(" and ")
        .span(Effort, "you stuck with it")
        .plain(", I'm proud of what you have done. ")
        .span(Outcome, "Good job")
        .plain(".");
    let mut c4 = TextBuilder::default();
    c4.plain("I am glad you asked for help today. We can do this homework together.");

    let responses = [c1, c2, c3, c4]
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.finish(&format!("case-{}", i + 1), BTreeMap::new()))
        .collect();
    Corpus::new(FOUR_CASES_GOLD, responses).expect("ids are unique")
}

/// Predictions for [`four_cases_gold`]: case 1 exact, case 2 empty, case 3 with
/// "Good job" and "you stuck with it" right, "did well" and "I'm proud of
/// what you have done" wrong and the right-answer span missed, case 4 empty.
pub fn four_cases_predictions() -> Vec<Prediction> {
    let pred = |id: &str, spans: Vec<EntitySpan>| Prediction {
        response_id: id.to_string(),
        spans,
        tagger_id: "four-cases".to_string(),
        latency_ms: 0,
    };
    vec![
        pred("case-1", vec![EntitySpan::new(Effort, 0, 5)]),
        pred("case-2", vec![]),
        pred(
            "case-3",
            vec![
                EntitySpan::new(Outcome, 5, 7),
                EntitySpan::new(Effort, 14, 18),
                EntitySpan::new(Effort, 19, 26),
                EntitySpan::new(Outcome, 27, 29),
            ],
        ),
        pred("case-4", vec![]),
    ]
}
