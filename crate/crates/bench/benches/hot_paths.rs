use criterion::{black_box, criterion_group, criterion_main, Criterion};
use praisetag_core::annotation::tokenize;
use praisetag_core::dataset::compute_stats;
use praisetag_core::evaluation::{evaluate_predictions, partial_metrics, token_metrics, DEFAULT_TAU};
use praisetag_core::tagging::lexicon_tag;
use praisetag_core::{Lexicon, Prediction};

fn corpus_text() -> Vec<String> {
    praisetag_fixtures::praise_corpus().responses().iter().map(|r| r.text().to_string()).collect()
}

fn tokenizing(c: &mut Criterion) {
    let texts = corpus_text();
    c.bench_function("tokenize/praise_corpus", |b| {
        b.iter(|| texts.iter().map(|t| tokenize(black_box(t)).len()).sum::<usize>())
    });
}

fn tagging(c: &mut Criterion) {
    let texts = corpus_text();
    let lexicon = Lexicon::default_praise();
    c.bench_function("lexicon_tag/praise_corpus", |b| {
        b.iter(|| texts.iter().map(|t| lexicon_tag("b", black_box(t), &lexicon).spans.len()).sum::<usize>())
    });
}

fn metrics(c: &mut Criterion) {
    let corpus = praisetag_fixtures::praise_corpus();
    let lexicon = Lexicon::default_praise();
    let preds: Vec<Prediction> = corpus.responses().iter().map(|r| lexicon_tag(r.id(), r.text(), &lexicon)).collect();

    c.bench_function("token_metrics/per_response", |b| {
        b.iter(|| {
            for (r, p) in corpus.responses().iter().zip(&preds) {
                let pred = praisetag_core::annotation::spans_to_tags(r.tokens(), &p.spans).unwrap();
                black_box(token_metrics(&r.gold_tags().0, &pred.0, true).unwrap());
            }
        })
    });
    c.bench_function("partial_metrics/iou", |b| {
        b.iter(|| {
            for (r, p) in corpus.responses().iter().zip(&preds) {
                black_box(partial_metrics(r.gold_spans(), &p.spans, DEFAULT_TAU).unwrap());
            }
        })
    });
    c.bench_function("evaluate_predictions/praise_corpus", |b| {
        b.iter(|| black_box(evaluate_predictions(corpus.responses(), &preds, DEFAULT_TAU).unwrap()))
    });
    let counted = praisetag_fixtures::tag_count_corpus();
    c.bench_function("compute_stats/tag_count_corpus", |b| b.iter(|| black_box(compute_stats(&counted).unwrap())));
}

criterion_group!(benches, tokenizing, tagging, metrics);
criterion_main!(benches);
