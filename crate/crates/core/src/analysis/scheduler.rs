use std::collections::{BTreeSet, HashMap};

use super::AnalysisError;
use crate::survey::Vote;

/// Pairs to compare for one respondent and one image set.
///
/// Images voted Yes or Unsure form one comparison group, No or Unsure the
/// other, so Unsure images sit in both. Every within-group pair is compared
/// once. Pairs come back as `(smaller_id, larger_id)`, sorted.
pub fn schedule_comparisons<S: AsRef<str>>(
    image_set: &[S],
    votes: &HashMap<String, Vote>,
) -> Result<Vec<(String, String)>, AnalysisError> {
    if !(2..=6).contains(&image_set.len()) {
        return Err(AnalysisError::SetSize(image_set.len()));
    }
    let mut passable = Vec::new();
    let mut impassable = Vec::new();
    for id in image_set {
        let id = id.as_ref();
        let vote = votes
            .get(id)
            .ok_or_else(|| AnalysisError::UnvotedImage(id.to_string()))?;
        if matches!(vote, Vote::Yes | Vote::Unsure) {
            passable.push(id);
        }
        if matches!(vote, Vote::No | Vote::Unsure) {
            impassable.push(id);
        }
    }

    let mut pairs = BTreeSet::new();
    for group in [&passable, &impassable] {
        for (i, a) in group.iter().enumerate() {
            for b in &group[i + 1..] {
                let pair = if a <= b { (*a, *b) } else { (*b, *a) };
                pairs.insert(pair);
            }
        }
    }
    Ok(pairs.into_iter().map(|(a, b)| (a.to_string(), b.to_string())).collect())
}
