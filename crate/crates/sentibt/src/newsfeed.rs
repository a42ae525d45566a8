//! Article ingestion, alias-dictionary asset matching, and per-(article, asset)
//! sentiment scoring through pluggable sentence scorers.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sentence index within an article. Index -1 refers to the title.
pub const TITLE_INDEX: i32 = -1;

#[derive(Debug, Clone, PartialEq)]
pub struct NewsArticle {
    pub article_id: String,
    pub source: String,
    pub timestamp: DateTime<Utc>,
    pub title: String,
    pub sentences: Vec<String>,
}

impl NewsArticle {
    /// Text for a sentence index, with -1 resolving to the title.
    pub fn sentence_text(&self, index: i32) -> Option<&str> {
        if index == TITLE_INDEX {
            Some(self.title.as_str())
        } else {
            self.sentences.get(index as usize).map(|s| s.as_str())
        }
    }
}

/// Deterministic sentence splitter: '.', '!' or '?' followed by whitespace
/// or end-of-text ends a sentence. No abbreviation handling.
pub fn split_sentences(body: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut chars = body.chars().peekable();
    while let Some(c) = chars.next() {
        current.push(c);
        if matches!(c, '.' | '!' | '?') {
            match chars.peek() {
                None => {}
                Some(next) if next.is_whitespace() => {}
                Some(_) => continue,
            }
            let s = current.trim();
            if !s.is_empty() {
                out.push(s.to_string());
            }
            current.clear();
        }
    }
    let s = current.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
    out
}

/// Map from asset_id to its case-insensitive surface forms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AliasTable {
    aliases: BTreeMap<String, BTreeSet<String>>,
}

impl AliasTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, asset_id: &str, alias: &str) -> Result<()> {
        if alias.trim().is_empty() {
            return Err(Error::Validation(format!(
                "empty alias for asset {asset_id}"
            )));
        }
        self.aliases
            .entry(asset_id.to_string())
            .or_default()
            .insert(alias.trim().to_lowercase());
        Ok(())
    }

    pub fn assets(&self) -> impl Iterator<Item = &str> {
        self.aliases.keys().map(|s| s.as_str())
    }

    pub fn aliases_for(&self, asset_id: &str) -> Option<&BTreeSet<String>> {
        self.aliases.get(asset_id)
    }

    /// Load from CSV asset_id,alias (header row required).
    pub fn load(path: &Path) -> Result<Self> {
        let file =
            std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let mut table = AliasTable::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
            if rec.len() != 2 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected 2 fields (asset_id,alias), got {}", rec.len()),
                });
            }
            table.add(&rec[0], &rec[1])?;
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssetMention {
    pub article_id: String,
    pub asset_id: String,
    /// Sorted, unique indices into the article's sentences; -1 is the title.
    pub sentence_indices: Vec<i32>,
}

/// Whole-word, case-insensitive containment test. An alias may span
/// several words; each boundary must be a non-alphanumeric character
/// or the text edge.
fn contains_whole_word(text: &str, alias_lower: &str) -> bool {
    let text_lower = text.to_lowercase();
    let mut start = 0;
    while let Some(pos) = text_lower[start..].find(alias_lower) {
        let begin = start + pos;
        let end = begin + alias_lower.len();
        let left_ok = begin == 0
            || !text_lower[..begin]
                .chars()
                .next_back()
                .is_some_and(|c| c.is_alphanumeric());
        let right_ok = end == text_lower.len()
            || !text_lower[end..]
                .chars()
                .next()
                .is_some_and(|c| c.is_alphanumeric());
        if left_ok && right_ok {
            return true;
        }
        start = begin + alias_lower.len().max(1);
        if start >= text_lower.len() {
            break;
        }
    }
    false
}

/// Find every asset mentioned in the article. A sentence index appears in
/// asset A's mention iff that sentence (or the title, index -1) contains
/// any alias of A as a whole word, case-insensitively.
pub fn match_assets(article: &NewsArticle, aliases: &AliasTable) -> Vec<AssetMention> {
    let mut mentions = Vec::new();
    for (asset_id, forms) in &aliases.aliases {
        let mut indices = Vec::new();
        if forms.iter().any(|a| contains_whole_word(&article.title, a)) {
            indices.push(TITLE_INDEX);
        }
        for (i, sentence) in article.sentences.iter().enumerate() {
            if forms.iter().any(|a| contains_whole_word(sentence, a)) {
                indices.push(i as i32);
            }
        }
        if !indices.is_empty() {
            mentions.push(AssetMention {
                article_id: article.article_id.clone(),
                asset_id: asset_id.clone(),
                sentence_indices: indices,
            });
        }
    }
    mentions
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Negative,
    Neutral,
    Positive,
}

impl SentimentLabel {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "negative" => Ok(SentimentLabel::Negative),
            "neutral" => Ok(SentimentLabel::Neutral),
            "positive" => Ok(SentimentLabel::Positive),
            other => Err(Error::Config(format!("unknown sentiment label {other:?}"))),
        }
    }
}

/// Classification labels map onto -1, 0 and +1.
pub fn label_to_value(label: SentimentLabel) -> f64 {
    match label {
        SentimentLabel::Negative => -1.0,
        SentimentLabel::Neutral => 0.0,
        SentimentLabel::Positive => 1.0,
    }
}

/// A scorer emits either a discrete class or a continuous value in [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SentenceSentiment {
    Label(SentimentLabel),
    Value(f64),
}

impl SentenceSentiment {
    pub fn value(self) -> f64 {
        match self {
            SentenceSentiment::Label(l) => label_to_value(l),
            SentenceSentiment::Value(v) => v,
        }
    }
}

/// Plugin contract: deterministic, total sentence-level scoring.
pub trait SentenceScorer {
    fn score_sentence(&self, sentence: &str) -> Result<SentenceSentiment>;
}

/// Word-count lexicon baseline: sentence value = (pos - neg) / max(1, pos + neg).
#[derive(Debug, Clone)]
pub struct LexiconScorer {
    positive: HashSet<String>,
    negative: HashSet<String>,
}

impl LexiconScorer {
    pub fn new<I, J>(positive: I, negative: J) -> Self
    where
        I: IntoIterator,
        I::Item: AsRef<str>,
        J: IntoIterator,
        J::Item: AsRef<str>,
    {
        LexiconScorer {
            positive: positive.into_iter().map(|w| w.as_ref().to_lowercase()).collect(),
            negative: negative.into_iter().map(|w| w.as_ref().to_lowercase()).collect(),
        }
    }

    /// A small default lexicon so the pipeline runs with zero configuration.
    pub fn default_lexicon() -> Self {
        Self::new(
            [
                "gain", "gains", "rise", "rises", "rose", "surge", "surges", "surged", "beat",
                "beats", "strong", "record", "upgrade", "upgraded", "profit", "profits", "growth",
                "rally", "rallies", "rallied", "bullish", "outperform", "up",
            ],
            [
                "loss", "losses", "fall", "falls", "fell", "drop", "drops", "dropped", "miss",
                "misses", "weak", "downgrade", "downgraded", "decline", "declines", "declined",
                "plunge", "plunges", "plunged", "bearish", "underperform", "down", "lawsuit",
            ],
        )
    }
}

impl SentenceScorer for LexiconScorer {
    fn score_sentence(&self, sentence: &str) -> Result<SentenceSentiment> {
        let mut pos = 0usize;
        let mut neg = 0usize;
        for word in sentence
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
        {
            let w = word.to_lowercase();
            if self.positive.contains(&w) {
                pos += 1;
            } else if self.negative.contains(&w) {
                neg += 1;
            }
        }
        let value = (pos as f64 - neg as f64) / (pos + neg).max(1) as f64;
        Ok(SentenceSentiment::Value(value))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleAssetScore {
    pub article_id: String,
    pub asset_id: String,
    pub score: f64,
    pub timestamp: DateTime<Utc>,
}

/// One score per (article, asset): arithmetic mean over the values of the
/// mentioned sentences, clamped to [-1, 1] to absorb rounding.
pub fn score_article_asset(
    mention: &AssetMention,
    article: &NewsArticle,
    scorer: &dyn SentenceScorer,
) -> Result<ArticleAssetScore> {
    if mention.sentence_indices.is_empty() {
        return Err(Error::Scoring {
            article_id: article.article_id.clone(),
            msg: "mention with no sentence indices".into(),
        });
    }
    let mut sum = 0.0;
    for &idx in &mention.sentence_indices {
        let text = article.sentence_text(idx).ok_or_else(|| Error::Scoring {
            article_id: article.article_id.clone(),
            msg: format!("sentence index {idx} out of range"),
        })?;
        sum += scorer.score_sentence(text).map_err(|e| Error::Scoring {
            article_id: article.article_id.clone(),
            msg: e.to_string(),
        })?
        .value();
    }
    let mean = sum / mention.sentence_indices.len() as f64;
    Ok(ArticleAssetScore {
        article_id: article.article_id.clone(),
        asset_id: mention.asset_id.clone(),
        score: mean.clamp(-1.0, 1.0),
        timestamp: article.timestamp,
    })
}

#[derive(Debug, Deserialize)]
struct ArticleJson {
    id: String,
    #[serde(default)]
    source: String,
    timestamp: DateTime<Utc>,
    title: String,
    #[serde(default)]
    body: Option<String>,
    #[serde(default)]
    sentences: Option<Vec<String>>,
}

/// Load articles from JSON Lines. Each line carries id, source, timestamp,
/// title and either body (split here) or pre-split sentences.
pub fn load_articles(path: &Path) -> Result<Vec<NewsArticle>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    load_articles_from_reader(file)
}

pub fn load_articles_from_reader<R: Read>(reader: R) -> Result<Vec<NewsArticle>> {
    let mut articles = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: ArticleJson = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        if !seen.insert(raw.id.clone()) {
            return Err(Error::Validation(format!(
                "duplicate article_id {:?} at line {line_no}",
                raw.id
            )));
        }
        let sentences = match (raw.sentences, raw.body) {
            (Some(s), _) => s,
            (None, Some(body)) => split_sentences(&body),
            (None, None) => Vec::new(),
        };
        if sentences.is_empty() && raw.title.trim().is_empty() {
            return Err(Error::Validation(format!(
                "article {:?} at line {line_no} has neither body sentences nor a title",
                raw.id
            )));
        }
        articles.push(NewsArticle {
            article_id: raw.id,
            source: raw.source,
            timestamp: raw.timestamp,
            title: raw.title,
            sentences,
        });
    }
    Ok(articles)
}

#[derive(Debug, Deserialize)]
struct ScoreRow {
    article_id: String,
    asset_id: String,
    timestamp: DateTime<Utc>,
    score: f64,
}

/// Load precomputed (article, asset) scores from CSV, validated and sorted
/// by timestamp (ties broken by article_id).
pub fn load_precomputed_scores(path: &Path) -> Result<Vec<ArticleAssetScore>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    load_precomputed_scores_from_reader(file)
}

pub fn load_precomputed_scores_from_reader<R: Read>(reader: R) -> Result<Vec<ArticleAssetScore>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, row) in rdr.deserialize::<ScoreRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        if !(-1.0..=1.0).contains(&row.score) {
            return Err(Error::Validation(format!(
                "score {} out of [-1, 1] at line {line}",
                row.score
            )));
        }
        if !seen.insert((row.article_id.clone(), row.asset_id.clone())) {
            return Err(Error::Validation(format!(
                "duplicate (article, asset) record ({}, {}) at line {line}",
                row.article_id, row.asset_id
            )));
        }
        out.push(ArticleAssetScore {
            article_id: row.article_id,
            asset_id: row.asset_id,
            score: row.score,
            timestamp: row.timestamp,
        });
    }
    out.sort_by(|a, b| {
        a.timestamp
            .cmp(&b.timestamp)
            .then_with(|| a.article_id.cmp(&b.article_id))
    });
    Ok(out)
}

/// Score a whole article batch against an alias table with one scorer.
/// Output is ordered by timestamp, ties broken by article_id.
pub fn score_articles(
    articles: &[NewsArticle],
    aliases: &AliasTable,
    scorer: &dyn SentenceScorer,
) -> Result<Vec<ArticleAssetScore>> {
    let mut out = Vec::new();
    for article in articles {
        for mention in match_assets(article, aliases) {
            out.push(score_article_asset(&mention, article, scorer)?);
        }
    }
    out.sort_by(|a, b| {
        a.timestamp
            .cmp(&b.timestamp)
            .then_with(|| a.article_id.cmp(&b.article_id))
            .then_with(|| a.asset_id.cmp(&b.asset_id))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use proptest::prelude::*;

    fn article(sentences: &[&str]) -> NewsArticle {
        NewsArticle {
            article_id: "a1".into(),
            source: "test".into(),
            timestamp: Utc.with_ymd_and_hms(2020, 1, 2, 12, 0, 0).unwrap(),
            title: String::new(),
            sentences: sentences.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn aliases(pairs: &[(&str, &str)]) -> AliasTable {
        let mut t = AliasTable::new();
        for (a, al) in pairs {
            t.add(a, al).unwrap();
        }
        t
    }

    #[test]
    fn single_match() {
        let art = article(&["Apple rose.", "Oil fell."]);
        let t = aliases(&[("AAPL", "Apple")]);
        let m = match_assets(&art, &t);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].asset_id, "AAPL");
        assert_eq!(m[0].sentence_indices, vec![0]);
    }

    #[test]
    fn whole_word_rule_rejects_substrings() {
        let art = article(&["Pineapple juice."]);
        let t = aliases(&[("AAPL", "Apple")]);
        assert!(match_assets(&art, &t).is_empty());
        // regex word-boundary oracle
        let re = regex_lite_boundary("apple", "pineapple juice.");
        assert!(!re);
    }

    // tiny word-boundary oracle without pulling in regex: scan all
    // occurrences and check both neighbours
    fn regex_lite_boundary(needle: &str, hay: &str) -> bool {
        let hay: Vec<char> = hay.chars().collect();
        let needle: Vec<char> = needle.chars().collect();
        for start in 0..hay.len() {
            if start + needle.len() > hay.len() {
                break;
            }
            if hay[start..start + needle.len()]
                .iter()
                .zip(&needle)
                .all(|(a, b)| a.eq_ignore_ascii_case(b))
            {
                let left = start == 0 || !hay[start - 1].is_alphanumeric();
                let right = start + needle.len() == hay.len()
                    || !hay[start + needle.len()].is_alphanumeric();
                if left && right {
                    return true;
                }
            }
        }
        false
    }

    #[test]
    fn two_assets_same_sentence() {
        let art = article(&["Apple and Boeing met."]);
        let t = aliases(&[("AAPL", "Apple"), ("BA", "Boeing")]);
        let m = match_assets(&art, &t);
        assert_eq!(m.len(), 2);
        for mention in &m {
            assert_eq!(mention.sentence_indices, vec![0]);
        }
        // exhaustive substring-scan oracle
        assert!(regex_lite_boundary("apple", "Apple and Boeing met."));
        assert!(regex_lite_boundary("boeing", "Apple and Boeing met."));
    }

    #[test]
    fn title_participates_as_index_minus_one() {
        let mut art = article(&["Nothing relevant here."]);
        art.title = "Apple shares jump".into();
        let t = aliases(&[("AAPL", "Apple")]);
        let m = match_assets(&art, &t);
        assert_eq!(m[0].sentence_indices, vec![TITLE_INDEX]);
    }

    #[test]
    fn label_values_match_convention() {
        assert_eq!(label_to_value(SentimentLabel::Negative), -1.0);
        assert_eq!(label_to_value(SentimentLabel::Neutral), 0.0);
        assert_eq!(label_to_value(SentimentLabel::Positive), 1.0);
        assert!(SentimentLabel::parse("bogus").is_err());
    }

    struct FixedScorer(Vec<SentenceSentiment>);
    impl SentenceScorer for FixedScorer {
        fn score_sentence(&self, sentence: &str) -> Result<SentenceSentiment> {
            let idx: usize = sentence.parse().unwrap();
            Ok(self.0[idx])
        }
    }

    fn mention(n: usize) -> (AssetMention, NewsArticle) {
        let sentences: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let art = NewsArticle {
            article_id: "a1".into(),
            source: "t".into(),
            timestamp: Utc.with_ymd_and_hms(2020, 1, 2, 12, 0, 0).unwrap(),
            title: "t".into(),
            sentences,
        };
        let m = AssetMention {
            article_id: "a1".into(),
            asset_id: "AAA".into(),
            sentence_indices: (0..n as i32).collect(),
        };
        (m, art)
    }

    #[test]
    fn mean_of_constant_labels() {
        let (m, art) = mention(2);
        let s = FixedScorer(vec![
            SentenceSentiment::Label(SentimentLabel::Positive),
            SentenceSentiment::Label(SentimentLabel::Positive),
        ]);
        assert_eq!(score_article_asset(&m, &art, &s).unwrap().score, 1.0);
    }

    #[test]
    fn mean_of_mixed_labels() {
        let (m, art) = mention(3);
        let s = FixedScorer(vec![
            SentenceSentiment::Label(SentimentLabel::Positive),
            SentenceSentiment::Label(SentimentLabel::Negative),
            SentenceSentiment::Label(SentimentLabel::Neutral),
        ]);
        assert_eq!(score_article_asset(&m, &art, &s).unwrap().score, 0.0);
    }

    #[test]
    fn mean_of_float_scores() {
        let (m, art) = mention(2);
        let s = FixedScorer(vec![
            SentenceSentiment::Value(0.6),
            SentenceSentiment::Value(-0.2),
        ]);
        let got = score_article_asset(&m, &art, &s).unwrap().score;
        assert!((got - 0.2).abs() < 1e-12);
    }

    #[test]
    fn lexicon_scorer_counts_words() {
        let s = LexiconScorer::new(["good"], ["bad"]);
        assert_eq!(
            s.score_sentence("good good bad").unwrap(),
            SentenceSentiment::Value((2.0 - 1.0) / 3.0)
        );
        assert_eq!(
            s.score_sentence("nothing matches").unwrap(),
            SentenceSentiment::Value(0.0)
        );
    }

    #[test]
    fn sentence_splitter_baseline() {
        assert_eq!(
            split_sentences("One. Two! Three? Four"),
            vec!["One.", "Two!", "Three?", "Four"]
        );
        // no split when punctuation is not followed by whitespace
        assert_eq!(split_sentences("v1.2 shipped"), vec!["v1.2 shipped"]);
    }

    #[test]
    fn precomputed_scores_validation() {
        let csv = "article_id,asset_id,timestamp,score\na1,AAA,2020-01-02T12:00:00Z,0.5\n";
        let recs = load_precomputed_scores_from_reader(csv.as_bytes()).unwrap();
        assert_eq!(recs[0].score, 0.5);

        let bad = "article_id,asset_id,timestamp,score\na1,AAA,2020-01-02T12:00:00Z,1.5\n";
        assert!(load_precomputed_scores_from_reader(bad.as_bytes()).is_err());

        let dup = "article_id,asset_id,timestamp,score\n\
                   a1,AAA,2020-01-02T12:00:00Z,0.5\n\
                   a1,AAA,2020-01-03T12:00:00Z,0.2\n";
        let err = load_precomputed_scores_from_reader(dup.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn jsonl_articles_round_trip() {
        let jsonl = concat!(
            r#"{"id":"a1","source":"wire","timestamp":"2020-01-02T12:00:00Z","title":"Apple up","body":"Apple rose. Oil fell."}"#,
            "\n",
            r#"{"id":"a2","source":"wire","timestamp":"2020-01-02T13:00:00Z","title":"T","sentences":["Pre-split one.","Pre-split two."]}"#,
            "\n",
        );
        let arts = load_articles_from_reader(jsonl.as_bytes()).unwrap();
        assert_eq!(arts.len(), 2);
        assert_eq!(arts[0].sentences, vec!["Apple rose.", "Oil fell."]);
        assert_eq!(arts[1].sentences.len(), 2);
    }

    #[test]
    fn duplicate_article_id_rejected() {
        let jsonl = concat!(
            r#"{"id":"a1","source":"w","timestamp":"2020-01-02T12:00:00Z","title":"x","body":"y."}"#,
            "\n",
            r#"{"id":"a1","source":"w","timestamp":"2020-01-02T13:00:00Z","title":"x","body":"y."}"#,
            "\n",
        );
        assert!(load_articles_from_reader(jsonl.as_bytes()).is_err());
    }

    proptest! {
        // mean commutativity: scoring is invariant under sentence-order permutation
        #[test]
        fn score_permutation_invariant(values in proptest::collection::vec(-1.0f64..=1.0, 1..8)) {
            let n = values.len();
            let (m, art) = mention(n);
            let forward = FixedScorer(values.iter().copied().map(SentenceSentiment::Value).collect());
            let mut rev = values.clone();
            rev.reverse();
            let backward = FixedScorer(rev.into_iter().map(SentenceSentiment::Value).collect());
            let a = score_article_asset(&m, &art, &forward).unwrap().score;
            let b = score_article_asset(&m, &art, &backward).unwrap().score;
            prop_assert!((a - b).abs() < 1e-12);
        }

        // label-only scorers land on the grid {k/n}
        #[test]
        fn label_scores_on_grid(labels in proptest::collection::vec(0usize..3, 1..10)) {
            let n = labels.len();
            let (m, art) = mention(n);
            let sentiments: Vec<SentenceSentiment> = labels.iter().map(|&l| {
                SentenceSentiment::Label(match l {
                    0 => SentimentLabel::Negative,
                    1 => SentimentLabel::Neutral,
                    _ => SentimentLabel::Positive,
                })
            }).collect();
            let s = FixedScorer(sentiments);
            let got = score_article_asset(&m, &art, &s).unwrap().score;
            let scaled = got * n as f64;
            prop_assert!((scaled - scaled.round()).abs() < 1e-9);
        }
    }
}
