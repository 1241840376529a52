use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use super::{Family, LanguageError};
use crate::spatial::Direction;

const BUILTIN: &str = include_str!("lexicon.tsv");

/// One surface template, e.g. `"is to the lower-right of"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub direction: Direction,
    pub family: Family,
    pub phrase: String,
}

/// Relation phrase inventory plus the lookup tables the parser uses.
#[derive(Debug, Clone)]
pub struct Lexicon {
    version: u32,
    templates: Vec<Template>,
    /// Normalized phrase → direction, for phrases without a clock value.
    exact: BTreeMap<String, Direction>,
    /// Normalized phrase shapes with the clock value replaced by `#`.
    clock_shapes: BTreeSet<String>,
}

impl Lexicon {
    pub fn builtin() -> &'static Lexicon {
        static LEXICON: OnceLock<Lexicon> = OnceLock::new();
        LEXICON.get_or_init(|| Lexicon::parse(BUILTIN).expect("builtin lexicon is valid"))
    }

    pub fn parse(text: &str) -> Result<Self, LanguageError> {
        let mut version = None;
        let mut templates = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let bad = |msg: &str| LanguageError::Lexicon(format!("line {}: {msg}", i + 1));
            match fields.as_slice() {
                ["version", v] => version = Some(v.parse().map_err(|_| bad("bad version"))?),
                [dir, fam, phrase] => templates.push(Template {
                    direction: dir.parse().map_err(|_| bad("unknown direction"))?,
                    family: fam.parse()?,
                    phrase: phrase.trim().to_string(),
                }),
                _ => return Err(bad("expected direction, terminology, phrase")),
            }
        }
        let version = version.ok_or_else(|| LanguageError::Lexicon("missing version line".into()))?;

        let mut exact = BTreeMap::new();
        let mut clock_shapes = BTreeSet::new();
        for t in &templates {
            let key = phrase_key(&t.phrase);
            match key.clock {
                Some(value) => {
                    if value != t.direction {
                        return Err(LanguageError::Lexicon(format!(
                            "clock phrase {:?} does not point {}",
                            t.phrase, t.direction
                        )));
                    }
                    clock_shapes.insert(key.shape);
                }
                None => {
                    if let Some(prev) = exact.insert(key.shape.clone(), t.direction) {
                        if prev != t.direction {
                            return Err(LanguageError::Lexicon(format!(
                                "phrase {:?} is ambiguous between {prev} and {}",
                                t.phrase, t.direction
                            )));
                        }
                    }
                }
            }
        }
        if exact.keys().any(|k| clock_shapes.contains(k)) {
            return Err(LanguageError::Lexicon("clock shape collides with a plain phrase".into()));
        }
        for dir in Direction::ALL {
            for fam in Family::ALL {
                let n = templates.iter().filter(|t| t.direction == dir && t.family == fam).count();
                if n < 2 {
                    return Err(LanguageError::Lexicon(format!(
                        "{dir}/{fam} has {n} templates, need at least 2"
                    )));
                }
            }
        }
        Ok(Lexicon {
            version,
            templates,
            exact,
            clock_shapes,
        })
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn templates_for(&self, direction: Direction, family: Family) -> impl Iterator<Item = &Template> {
        self.templates
            .iter()
            .filter(move |t| t.direction == direction && t.family == family)
    }

    /// Direction named by a relation phrase (the text between the two labels).
    pub fn lookup(&self, phrase: &str) -> Option<Direction> {
        let key = phrase_key(phrase);
        match key.clock {
            Some(dir) => self.clock_shapes.contains(&key.shape).then_some(dir),
            None if key.shape.contains('#') => None,
            None => self.exact.get(&key.shape).copied(),
        }
    }
}

struct PhraseKey {
    shape: String,
    clock: Option<Direction>,
}

const COPULA_MODIFIERS: [&str; 4] = ["located", "positioned", "situated", "placed"];
const ARTICLES: [&str; 3] = ["the", "a", "an"];

/// Lowercases, folds hyphens to spaces, drops a leading copula and all
/// articles. A clock value becomes `#` and is decoded separately; a clock
/// token that names no direction leaves `#` in the shape with no value.
fn phrase_key(phrase: &str) -> PhraseKey {
    let lowered = phrase.to_lowercase().replace(['’', '`'], "'").replace('-', " ");
    let mut words: Vec<&str> = lowered.split_whitespace().collect();
    if words.first() == Some(&"is") {
        words.remove(0);
        if words.first().is_some_and(|w| COPULA_MODIFIERS.contains(w)) {
            words.remove(0);
        }
    }
    let mut clock = None;
    let mut shape = Vec::new();
    for w in words {
        if ARTICLES.contains(&w) {
            continue;
        }
        if w.starts_with(|c: char| c.is_ascii_digit()) {
            clock = clock_direction(w);
            shape.push("#");
        } else {
            shape.push(w);
        }
    }
    PhraseKey {
        shape: shape.join(" "),
        clock,
    }
}

/// Clock-face reading: 12 up, 3 right, 6 down, 9 left; half hours 1:30,
/// 4:30, 7:30, 10:30 and the neighbouring whole hours name the diagonals.
pub fn clock_direction(token: &str) -> Option<Direction> {
    let (hour, minute) = match token.split_once(':') {
        Some((h, m)) => (h.parse::<u32>().ok()?, m.parse::<u32>().ok()?),
        None => (token.parse::<u32>().ok()?, 0),
    };
    use Direction::*;
    match (hour, minute) {
        (12, 0) => Some(Above),
        (3, 0) => Some(Right),
        (6, 0) => Some(Below),
        (9, 0) => Some(Left),
        (1 | 2, 0) | (1, 30) => Some(UpperRight),
        (4 | 5, 0) | (4, 30) => Some(LowerRight),
        (7 | 8, 0) | (7, 30) => Some(LowerLeft),
        (10 | 11, 0) | (10, 30) => Some(UpperLeft),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_loads() {
        let lex = Lexicon::builtin();
        assert_eq!(lex.version(), 1);
        assert!(lex.templates().len() >= 48);
    }

    #[test]
    fn lookup_tolerates_copulas_and_articles() {
        let lex = Lexicon::builtin();
        assert_eq!(lex.lookup("is to the lower-right of"), Some(Direction::LowerRight));
        assert_eq!(lex.lookup("is located to lower right of"), Some(Direction::LowerRight));
        assert_eq!(lex.lookup("IS POSITIONED BELOW"), Some(Direction::Below));
        assert_eq!(lex.lookup("at the bottom-right of"), Some(Direction::LowerRight));
        assert_eq!(lex.lookup("is kind of near"), None);
    }

    #[test]
    fn clock_hours() {
        let lex = Lexicon::builtin();
        assert_eq!(lex.lookup("is at 4 o'clock relative to"), Some(Direction::LowerRight));
        assert_eq!(lex.lookup("is at 5 o'clock from"), Some(Direction::LowerRight));
        assert_eq!(lex.lookup("is in the 10:30 direction from"), Some(Direction::UpperLeft));
        assert_eq!(lex.lookup("is at 3 o’clock from"), Some(Direction::Right));
        assert_eq!(lex.lookup("is at 13 o'clock from"), None);
        assert_eq!(lex.lookup("is at 2:15 relative to"), None);
        assert_eq!(clock_direction("11"), Some(Direction::UpperLeft));
    }

    #[test]
    fn rejects_ambiguous_inventory() {
        let text = "version\t1\nabove\tspatial\tis over\nbelow\tspatial\tis the over\n";
        assert!(matches!(Lexicon::parse(text), Err(LanguageError::Lexicon(_))));
        assert!(matches!(Lexicon::parse("above\tspatial\tis over\n"), Err(LanguageError::Lexicon(_))));
    }
}
