use std::collections::BTreeSet;
use std::sync::OnceLock;

use crate::spatial::{Direction, Relation};

const FILLER: [&str; 9] = ["answer", "it", "is", "the", "a", "an", "to", "at", "located"];

/// Surface forms accepted for each answer label, before normalization.
pub fn aliases(label: Relation) -> &'static [&'static str] {
    use Direction::*;
    match label {
        Relation::Dir(Left) => &["left", "left of", "to the left", "west", "9 o'clock"],
        Relation::Dir(Right) => &["right", "right of", "to the right", "east", "3 o'clock"],
        Relation::Dir(Above) => &["above", "north", "top", "12 o'clock", "over"],
        Relation::Dir(Below) => &["below", "south", "bottom", "6 o'clock", "under", "beneath"],
        Relation::Dir(UpperLeft) => &["upper-left", "upper left", "top-left", "northwest", "north-west", "10:30"],
        Relation::Dir(UpperRight) => &["upper-right", "upper right", "top-right", "northeast", "north-east", "1:30"],
        Relation::Dir(LowerLeft) => &["lower-left", "lower left", "bottom-left", "southwest", "south-west", "7:30"],
        Relation::Dir(LowerRight) => &["lower-right", "lower right", "bottom-right", "southeast", "south-east", "4:30"],
        Relation::SameLevel => &["same level", "same row", "horizontally aligned"],
        Relation::SameColumn => &["same column", "vertically aligned"],
    }
}

/// Lowercase, fold hyphens and underscores to spaces, drop punctuation
/// (keeping `:` between digits and the apostrophe of "o'clock"), and strip
/// leading articles and copulas.
fn normalize(text: &str) -> String {
    let lowered = text.trim().to_lowercase().replace(['’', '`'], "'");
    let chars: Vec<char> = lowered.chars().collect();
    let mut cleaned = String::with_capacity(chars.len());
    for (i, &c) in chars.iter().enumerate() {
        let digit_at = |j: Option<usize>| j.and_then(|j| chars.get(j)).is_some_and(|c| c.is_ascii_digit());
        match c {
            c if c.is_alphanumeric() || c == '\'' => cleaned.push(c),
            ':' if digit_at(i.checked_sub(1)) && digit_at(Some(i + 1)) => cleaned.push(c),
            _ => cleaned.push(' '),
        }
    }
    let words: Vec<&str> = cleaned.split_whitespace().collect();
    let start = words.iter().take_while(|w| FILLER.contains(w)).count();
    words[start..].join(" ")
}

fn alias_table() -> &'static Vec<(Relation, BTreeSet<String>)> {
    static TABLE: OnceLock<Vec<(Relation, BTreeSet<String>)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        Relation::ALL
            .into_iter()
            .map(|r| (r, aliases(r).iter().map(|a| normalize(a)).collect()))
            .collect()
    })
}

/// The label whose alias set contains `answer`, if any.
pub fn normalize_answer(answer: &str) -> Option<Relation> {
    let key = normalize(answer);
    alias_table()
        .iter()
        .find(|(_, set)| set.contains(&key))
        .map(|(r, _)| *r)
}

/// Whether `answer` names `gold_label` under the alias table. An
/// unrecognized gold label only matches itself after normalization.
pub fn relation_alias_match(answer: &str, gold_label: &str) -> bool {
    match gold_label.parse::<Relation>() {
        Ok(gold) => normalize_answer(answer) == Some(gold),
        Err(_) => normalize(answer) == normalize(gold_label),
    }
}
