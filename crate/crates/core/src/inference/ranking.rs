use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedAnswer {
    pub answer_id: String,
    pub positive: bool,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedAnswerList {
    pub question_id: String,
    pub answers: Vec<RankedAnswer>,
}

/// Predicted positives first, each block by score descending, then by
/// answer id.
pub fn rank_answers(question_id: &str, answers: Vec<RankedAnswer>) -> RankedAnswerList {
    let mut answers = answers;
    answers.sort_by(|a, b| {
        b.positive
            .cmp(&a.positive)
            .then_with(|| b.score.total_cmp(&a.score))
            .then_with(|| a.answer_id.cmp(&b.answer_id))
    });
    RankedAnswerList {
        question_id: question_id.to_string(),
        answers,
    }
}

/// Ranks every question; `rows` are `(question_id, answer)`.
pub fn rank_questions(rows: impl IntoIterator<Item = (String, RankedAnswer)>) -> Vec<RankedAnswerList> {
    let mut by_question: BTreeMap<String, Vec<RankedAnswer>> = BTreeMap::new();
    for (q, a) in rows {
        by_question.entry(q).or_default().push(a);
    }
    by_question
        .into_iter()
        .map(|(q, answers)| rank_answers(&q, answers))
        .collect()
}
