//! Corpus loading, tokenization and TF-IDF document-term matrices.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Zero-width non-joiner; joins the parts of Persian compound words.
const ZWNJ: char = '\u{200C}';

#[derive(Debug, Error)]
pub enum TextError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: line {line} is not valid UTF-8")]
    Encoding { path: String, line: usize },
    #[error("{texts} text lines but {labels} labels")]
    LabelCount { texts: usize, labels: usize },
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("no document contains a single token")]
    NoTokens,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub label: String,
    pub text: String,
}

/// Labeled documents in file order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    docs: Vec<Document>,
    labels: BTreeSet<String>,
    dropped_blank: usize,
}

impl Corpus {
    pub fn new(docs: Vec<Document>) -> Result<Self, TextError> {
        let mut seen = HashSet::new();
        for d in &docs {
            if !seen.insert(d.id.as_str()) {
                return Err(TextError::DuplicateId(d.id.clone()));
            }
        }
        let labels = docs.iter().map(|d| d.label.clone()).collect();
        Ok(Corpus {
            docs,
            labels,
            dropped_blank: 0,
        })
    }

    /// Builds a corpus from `(label, text)` pairs with ids `0, 1, ...`.
    pub fn from_texts<L: Into<String>, T: Into<String>>(items: impl IntoIterator<Item = (L, T)>) -> Self {
        let docs: Vec<Document> = items
            .into_iter()
            .enumerate()
            .map(|(i, (label, text))| Document {
                id: i.to_string(),
                label: label.into(),
                text: text.into(),
            })
            .collect();
        Corpus::new(docs).expect("sequential ids are unique")
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// The declared label set.
    pub fn labels(&self) -> &BTreeSet<String> {
        &self.labels
    }

    /// Blank lines skipped while loading.
    pub fn dropped_blank(&self) -> usize {
        self.dropped_blank
    }

    pub fn doc_labels(&self) -> Vec<String> {
        self.docs.iter().map(|d| d.label.clone()).collect()
    }

    pub fn ids(&self) -> Vec<String> {
        self.docs.iter().map(|d| d.id.clone()).collect()
    }
}

/// Where document labels come from.
#[derive(Debug, Clone)]
pub enum LabelSource<'a> {
    /// One label per line, aligned with the text file.
    File(&'a Path),
    /// Every document carries the same label.
    Single(&'a str),
}

fn read_lines(path: &Path) -> Result<Vec<String>, TextError> {
    let bytes = std::fs::read(path).map_err(|source| TextError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut lines = Vec::new();
    for (i, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        let line = std::str::from_utf8(raw).map_err(|_| TextError::Encoding {
            path: path.display().to_string(),
            line: i + 1,
        })?;
        lines.push(line.to_string());
    }
    if bytes.ends_with(b"\n") {
        lines.pop();
    }
    Ok(lines)
}

/// One document per line; blank lines are dropped (together with their
/// label) and counted. Document ids are 1-based line numbers.
pub fn load_corpus(text_path: &Path, labels: LabelSource<'_>) -> Result<Corpus, TextError> {
    let texts = read_lines(text_path)?;
    let labels: Vec<String> = match labels {
        LabelSource::File(p) => {
            let l = read_lines(p)?;
            if l.len() != texts.len() {
                return Err(TextError::LabelCount {
                    texts: texts.len(),
                    labels: l.len(),
                });
            }
            l.into_iter().map(|s| s.trim().to_string()).collect()
        }
        LabelSource::Single(l) => vec![l.to_string(); texts.len()],
    };
    let mut docs = Vec::with_capacity(texts.len());
    let mut dropped = 0;
    for (i, (text, label)) in texts.into_iter().zip(labels).enumerate() {
        if text.trim().is_empty() {
            dropped += 1;
            continue;
        }
        docs.push(Document {
            id: (i + 1).to_string(),
            label,
            text,
        });
    }
    let mut corpus = Corpus::new(docs)?;
    corpus.dropped_blank = dropped;
    Ok(corpus)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || is_combining_mark(c) || c == ZWNJ
}

/// Splits on whitespace and punctuation after canonical (NFC)
/// normalization. ZWNJ stays inside words; cased scripts are lowercased.
pub fn tokenize(text: &str) -> Vec<String> {
    let normalized: String = text.nfc().collect();
    normalized
        .split(|c: char| !is_word_char(c))
        .map(|t| t.trim_matches(ZWNJ))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Sparse TF-IDF matrix with a sorted vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentTermMatrix {
    vocab: Vec<String>,
    /// Per document, `(term index, weight)` sorted by term index.
    rows: Vec<Vec<(usize, f64)>>,
    doc_ids: Vec<String>,
    idf: Vec<f64>,
}

impl DocumentTermMatrix {
    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.vocab.len()
    }

    pub fn weight(&self, doc: usize, term: &str) -> f64 {
        let Ok(t) = self.vocab.binary_search_by(|v| v.as_str().cmp(term)) else {
            return 0.0;
        };
        self.rows[doc]
            .binary_search_by_key(&t, |&(i, _)| i)
            .map_or(0.0, |k| self.rows[doc][k].1)
    }

    /// Sub-matrix of the given rows, sharing the vocabulary.
    pub fn select_rows(&self, rows: &[usize]) -> DocumentTermMatrix {
        DocumentTermMatrix {
            vocab: self.vocab.clone(),
            rows: rows.iter().map(|&i| self.rows[i].clone()).collect(),
            doc_ids: rows.iter().map(|&i| self.doc_ids[i].clone()).collect(),
            idf: self.idf.clone(),
        }
    }

    /// Dense copy of row `i`.
    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.vocab.len()];
        for &(t, w) in &self.rows[i] {
            out[t] = w;
        }
        out
    }

    /// Sparse dot product of two rows.
    pub fn row_dot(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.rows[i], &self.rows[j]);
        let (mut x, mut y, mut acc) = (0, 0, 0.0);
        while x < a.len() && y < b.len() {
            match a[x].0.cmp(&b[y].0) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[x].1 * b[y].1;
                    x += 1;
                    y += 1;
                }
            }
        }
        acc
    }

    pub fn row_norm(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    /// Triplet CSV `doc,term,weight`, one line per nonzero.
    pub fn triplets_csv(&self) -> String {
        let mut out = String::from("doc,term,weight\n");
        for (id, row) in self.doc_ids.iter().zip(&self.rows) {
            for &(t, w) in row {
                let _ = writeln!(out, "{},{},{:?}", csv_field(id), csv_field(&self.vocab[t]), w);
            }
        }
        out
    }

    pub fn vocab_txt(&self) -> String {
        let mut out = String::new();
        for v in &self.vocab {
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone)]
pub struct TfidfOptions {
    pub normalize: bool,
    pub stop_words: HashSet<String>,
}

impl Default for TfidfOptions {
    fn default() -> Self {
        TfidfOptions {
            normalize: true,
            stop_words: HashSet::new(),
        }
    }
}

/// Smooth inverse document frequency `ln((1 + n) / (1 + df)) + 1`.
pub fn smooth_idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

pub fn tfidf(corpus: &Corpus) -> Result<DocumentTermMatrix, TextError> {
    tfidf_with(corpus, &TfidfOptions::default())
}

/// Raw term counts times smooth idf, rows L2-normalized unless disabled.
/// Empty documents give zero rows.
pub fn tfidf_with(corpus: &Corpus, opts: &TfidfOptions) -> Result<DocumentTermMatrix, TextError> {
    if corpus.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    let counts: Vec<BTreeMap<String, usize>> = corpus
        .docs()
        .iter()
        .map(|d| {
            let mut c = BTreeMap::new();
            for t in tokenize(&d.text) {
                if !opts.stop_words.contains(&t) {
                    *c.entry(t).or_insert(0) += 1;
                }
            }
            c
        })
        .collect();
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for c in &counts {
        for term in c.keys() {
            *df.entry(term.as_str()).or_insert(0) += 1;
        }
    }
    if df.is_empty() {
        return Err(TextError::NoTokens);
    }
    let vocab: Vec<String> = df.keys().map(|s| s.to_string()).collect();
    let n = corpus.len();
    let idf: Vec<f64> = df.values().map(|&f| smooth_idf(n, f)).collect();

    let rows = counts
        .iter()
        .map(|c| {
            // both c and vocab iterate in sorted order
            let mut row: Vec<(usize, f64)> = c
                .iter()
                .map(|(term, &tf)| {
                    let t = vocab.binary_search(term).expect("term in vocabulary");
                    (t, tf as f64 * idf[t])
                })
                .collect();
            if opts.normalize {
                let norm = row.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for (_, w) in &mut row {
                        *w /= norm;
                    }
                }
            }
            row
        })
        .collect();
    Ok(DocumentTermMatrix {
        vocab,
        rows,
        doc_ids: corpus.ids(),
        idf,
    })
}

/// A consecutive slice of a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusPart {
    pub corpus: Corpus,
    /// Position of the first document in the source corpus.
    pub offset: usize,
    /// Set on a final part holding fewer than `part_size` documents.
    pub short: bool,
}

/// Consecutive chunks of `part_size` documents, in order; a trailing short
/// chunk is kept and flagged.
pub fn split_parts(corpus: &Corpus, part_size: usize) -> Vec<CorpusPart> {
    assert!(part_size >= 1, "part_size must be positive");
    corpus
        .docs
        .chunks(part_size)
        .enumerate()
        .map(|(i, chunk)| CorpusPart {
            corpus: Corpus {
                docs: chunk.to_vec(),
                labels: corpus.labels.clone(),
                dropped_blank: 0,
            },
            offset: i * part_size,
            short: chunk.len() < part_size,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn write(dir: &tempdir::Dir, name: &str, body: &[u8]) -> std::path::PathBuf {
        let p = dir.0.join(name);
        std::fs::File::create(&p).unwrap().write_all(body).unwrap();
        p
    }

    mod tempdir {
        pub struct Dir(pub std::path::PathBuf);
        impl Dir {
            pub fn new(tag: &str) -> Self {
                let p = std::env::temp_dir().join(format!("topotext-{tag}-{}", std::process::id()));
                std::fs::create_dir_all(&p).unwrap();
                Dir(p)
            }
        }
        impl Drop for Dir {
            fn drop(&mut self) {
                let _ = std::fs::remove_dir_all(&self.0);
            }
        }
    }

    #[test]
    fn load_with_label_file() {
        let dir = tempdir::Dir::new("labels");
        let t = write(&dir, "a.txt", b"first doc\nsecond doc\n");
        let l = write(&dir, "a.labels", b"x\ny\n");
        let c = load_corpus(&t, LabelSource::File(&l)).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.docs()[1].label, "y");
        assert_eq!(c.labels().len(), 2);
    }

    #[test]
    fn blank_lines_are_dropped_and_counted() {
        let dir = tempdir::Dir::new("blank");
        let t = write(&dir, "a.txt", b"one\n   \nthree\n");
        let c = load_corpus(&t, LabelSource::Single("poet")).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.dropped_blank(), 1);
        assert_eq!(c.docs()[1].id, "3");
    }

    #[test]
    fn label_count_mismatch() {
        let dir = tempdir::Dir::new("mismatch");
        let t = write(&dir, "a.txt", b"a\nb\nc\n");
        let l = write(&dir, "a.labels", b"x\ny\n");
        let err = load_corpus(&t, LabelSource::File(&l)).unwrap_err();
        assert!(matches!(err, TextError::LabelCount { texts: 3, labels: 2 }));
        assert!(err.to_string().contains('3') && err.to_string().contains('2'));
    }

    #[test]
    fn bad_utf8_names_line() {
        let dir = tempdir::Dir::new("utf8");
        let t = write(&dir, "a.txt", b"fine\n\xff\xfe\n");
        let err = load_corpus(&t, LabelSource::Single("x")).unwrap_err();
        assert!(matches!(err, TextError::Encoding { line: 2, .. }));
    }

    #[test]
    fn tokenizer_cases() {
        assert_eq!(tokenize("Love, love!"), vec!["love", "love"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("ab\u{200C}cd ef"), vec!["ab\u{200C}cd", "ef"]);
        assert_eq!(tokenize("می\u{200C}خواهم، دل!"), vec!["می\u{200C}خواهم", "دل"]);
        // decomposed e + acute normalizes to the composed form
        assert_eq!(tokenize("Cafe\u{301}"), vec!["caf\u{e9}"]);
    }

    #[test]
    fn tfidf_hand_computed() {
        let c = Corpus::from_texts([("x", "a b"), ("x", "a c")]);
        let m = tfidf(&c).unwrap();
        assert_eq!(m.vocab(), &["a", "b", "c"]);
        assert_eq!(m.idf()[0], 1.0);
        assert!((m.idf()[1] - 1.405465).abs() < 1e-6);
        assert!((m.weight(0, "a") - 0.57974).abs() < 1e-4);
        assert!((m.weight(0, "b") - 0.81480).abs() < 1e-4);
        assert_eq!(m.weight(0, "c"), 0.0);
    }

    #[test]
    fn empty_doc_gives_zero_row() {
        let c = Corpus::from_texts([("x", "a b"), ("x", "!!")]);
        let m = tfidf(&c).unwrap();
        assert!(m.row(1).is_empty());
        assert!(matches!(tfidf(&Corpus::from_texts([("x", "...")])), Err(TextError::NoTokens)));
        assert!(matches!(tfidf(&Corpus::default()), Err(TextError::EmptyCorpus)));
    }

    #[test]
    fn stop_words_are_removed() {
        let c = Corpus::from_texts([("x", "the cat"), ("x", "the dog")]);
        let opts = TfidfOptions {
            stop_words: ["the".to_string()].into_iter().collect(),
            ..Default::default()
        };
        assert_eq!(tfidf_with(&c, &opts).unwrap().vocab(), &["cat", "dog"]);
    }

    #[test]
    fn parts() {
        let c = Corpus::from_texts((0..5).map(|i| ("x", format!("w{i}"))));
        let sizes: Vec<(usize, bool)> = split_parts(&c, 2).iter().map(|p| (p.corpus.len(), p.short)).collect();
        assert_eq!(sizes, vec![(2, false), (2, false), (1, true)]);
        assert_eq!(split_parts(&c, 9).len(), 1);
        let big = Corpus::from_texts((0..8000).map(|i| ("x", format!("w{i}"))));
        let parts = split_parts(&big, 1000);
        assert_eq!(parts.len(), 8);
        assert!(parts.iter().all(|p| p.corpus.len() == 1000 && !p.short));
    }

    #[test]
    fn exports() {
        let c = Corpus::from_texts([("x", "a b"), ("x", "a")]);
        let m = tfidf(&c).unwrap();
        assert_eq!(m.vocab_txt(), "a\nb\n");
        let csv = m.triplets_csv();
        assert!(csv.starts_with("doc,term,weight\n0,a,"));
        assert_eq!(csv.lines().count(), 4);
    }

    fn arb_corpus() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec(prop::collection::vec("[a-f]{1,3}", 0..8).prop_map(|w| w.join(" ")), 1..12)
    }

    proptest! {
        #[test]
        fn tfidf_invariants(texts in arb_corpus()) {
            let c = Corpus::from_texts(texts.iter().map(|t| ("x", t.clone())));
            prop_assume!(texts.iter().any(|t| !t.is_empty()));
            let m = tfidf(&c).unwrap();
            let union: BTreeSet<String> = texts.iter().flat_map(|t| tokenize(t)).collect();
            prop_assert_eq!(m.vocab().to_vec(), union.into_iter().collect::<Vec<_>>());
            for (i, t) in texts.iter().enumerate() {
                let toks: BTreeSet<String> = tokenize(t).into_iter().collect();
                for term in m.vocab() {
                    let w = m.weight(i, term);
                    prop_assert!(w >= 0.0);
                    prop_assert_eq!(w > 0.0, toks.contains(term));
                }
                if !toks.is_empty() {
                    prop_assert!((m.row_norm(i) - 1.0).abs() <= 1e-12);
                }
            }
            prop_assert_eq!(tfidf(&c).unwrap(), m);
        }
    }
}
