//! Tagging tutor praise with Effort/Outcome/Person entity spans, scoring
//! predictions against gold annotations, and rendering explanatory feedback.

pub mod annotation;
pub mod dataset;
pub mod evaluation;
pub mod feedback;
pub mod tagging;

pub use annotation::{AnnotatedResponse, AnnotationError, BioTag, EntityLabel, EntitySpan, TagSequence, Token};
pub use dataset::{Corpus, DatasetError, SplitConfig, StratifyBy, TagDistribution};
pub use evaluation::{CaseCategory, EvalError, EvalReport, MetricReport, RunsReport};
pub use feedback::{FeedbackConfig, FeedbackError, FeedbackMessage, TemplateId};
pub use tagging::{AdapterEndpoint, AdapterError, Lexicon, PraiseLabels, Prediction, Verdict};
