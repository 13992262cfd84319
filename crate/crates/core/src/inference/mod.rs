//! Turning member predictions into final answers.

mod decode;
mod ensemble;
mod members;
mod predictions;
mod ranking;

pub use decode::{
    decode_premise_groups, mednli_constrained_decode, CONTRADICTION, ENTAILMENT, LABEL_PERMUTATIONS, NEUTRAL,
};
pub use ensemble::{argmax, ensemble_classify, ensemble_regress, vote_with_tiebreak, RegressionVote};
pub use members::{default_thresholds, select_members};
pub use predictions::{
    combine_classification, combine_regression, predict_dataset, read_ensemble_output, read_predictions,
    write_ensemble_output, write_predictions, EnsembleRow, Prediction, PredictionSet,
};
pub use ranking::{rank_answers, rank_questions, RankedAnswer, RankedAnswerList};
