//! Sentence preprocessing, vocabulary construction and bag-of-words vectors.
//!
//! The pipeline is: lowercase, split on any non-alphanumeric character, drop
//! stopwords, Porter-stem what is left. Stemmed terms form the first-stage
//! vocabulary; the second stage keeps only terms that are not purely numeric,
//! have at least `min_len` characters and occur in at least `min_df` training
//! sentences. Term indices follow lexicographic order so they are stable.

mod io;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::hash64;

pub use io::{format_vectors, format_vocabulary, parse_vectors, parse_vocabulary};

const ENGLISH_STOPWORDS: &str = include_str!("stopwords_en.txt");

/// The stopword list shipped with the crate, one word per line.
pub fn english_stopwords() -> HashSet<String> {
    ENGLISH_STOPWORDS
        .lines()
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .map(str::to_owned)
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stemmer {
    #[default]
    Porter,
    /// Leaves tokens untouched.
    None,
}

impl Stemmer {
    pub fn stem(self, token: &str) -> String {
        match self {
            Stemmer::Porter => porter_stemmer::stem(token),
            Stemmer::None => token.to_owned(),
        }
    }
}

/// Lowercases, tokenizes on non-alphanumeric boundaries, removes stopwords and
/// stems the remaining tokens.
pub fn preprocess(sentence: &str, stopwords: &HashSet<String>, stemmer: Stemmer) -> Vec<String> {
    sentence
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(|t| !stopwords.contains(t))
        .map(|t| stemmer.stem(&t))
        .collect()
}

/// Bundles a stopword set with a stemmer.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    stopwords: HashSet<String>,
    stemmer: Stemmer,
}

impl Preprocessor {
    pub fn new(stopwords: HashSet<String>, stemmer: Stemmer) -> Self {
        Self { stopwords, stemmer }
    }

    /// Shipped English stopwords with the Porter stemmer.
    pub fn english() -> Self {
        Self::new(english_stopwords(), Stemmer::Porter)
    }

    pub fn tokens(&self, sentence: &str) -> Vec<String> {
        preprocess(sentence, &self.stopwords, self.stemmer)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VocabStage {
    /// After stopword removal and stemming.
    Vocab1,
    /// After the numeric, length and document-frequency filter.
    Vocab2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabFilter {
    pub min_df: u32,
    pub min_len: usize,
}

impl Default for VocabFilter {
    fn default() -> Self {
        Self {
            min_df: 5,
            min_len: 3,
        }
    }
}

impl VocabFilter {
    pub fn validate(&self) -> Result<()> {
        if self.min_df == 0 || self.min_len == 0 {
            return Err(Error::InvalidConfig(
                "min_df and min_len must both be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn keeps(&self, term: &str, doc_freq: u32) -> bool {
        !is_numeric(term) && term.chars().count() >= self.min_len && doc_freq >= self.min_df
    }
}

/// A term counts as numeric when every character is a digit, so "2nd" is not.
pub fn is_numeric(term: &str) -> bool {
    !term.is_empty() && term.chars().all(char::is_numeric)
}

/// Ordered, deduplicated term list. The index of a term is its position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: BTreeMap<String, u32>,
    stage: VocabStage,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Counts, for every term, the number of sentences containing it.
    pub fn from_token_lists(sentences: &[Vec<String>]) -> Self {
        let mut doc_freq: BTreeMap<String, u32> = BTreeMap::new();
        for tokens in sentences {
            let distinct: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
            for t in distinct {
                *doc_freq.entry(t.to_owned()).or_insert(0) += 1;
            }
        }
        Self::from_doc_freq(doc_freq, VocabStage::Vocab1)
    }

    /// A second-stage vocabulary from a bare term list (e.g. read from a
    /// vocabulary file). Document frequencies are unknown.
    pub fn from_terms<I, S>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let terms: Vec<String> = terms.into_iter().map(Into::into).collect();
        if terms.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        for pair in terms.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::format(
                    "vocabulary",
                    format!("terms not strictly sorted near {:?}", pair[1]),
                ));
            }
        }
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Ok(Self {
            terms,
            doc_freq: BTreeMap::new(),
            stage: VocabStage::Vocab2,
            index,
        })
    }

    fn from_doc_freq(doc_freq: BTreeMap<String, u32>, stage: VocabStage) -> Self {
        let terms: Vec<String> = doc_freq.keys().cloned().collect();
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Self {
            terms,
            doc_freq,
            stage,
            index,
        }
    }

    pub fn filtered(&self, filter: &VocabFilter) -> Result<Self> {
        filter.validate()?;
        let kept: BTreeMap<String, u32> = self
            .doc_freq
            .iter()
            .filter(|(t, &df)| filter.keeps(t, df))
            .map(|(t, &df)| (t.clone(), df))
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        Ok(Self::from_doc_freq(kept, VocabStage::Vocab2))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn stage(&self) -> VocabStage {
        self.stage
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn doc_freq(&self, term: &str) -> Option<u32> {
        self.doc_freq.get(term).copied()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.index.contains_key(term)
    }

    /// Stable fingerprint of the term list; stored in model files.
    pub fn fingerprint(&self) -> u64 {
        hash64(self.terms.join("\n").as_bytes())
    }
}

/// Both vocabulary stages produced from one training token set.
#[derive(Debug, Clone)]
pub struct VocabularyBuild {
    pub vocab1: Vocabulary,
    pub vocab2: Vocabulary,
}

pub fn build_vocabulary(
    train_tokens: &[Vec<String>],
    filter: &VocabFilter,
) -> Result<VocabularyBuild> {
    filter.validate()?;
    let vocab1 = Vocabulary::from_token_lists(train_tokens);
    let vocab2 = vocab1.filtered(filter)?;
    Ok(VocabularyBuild { vocab1, vocab2 })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorMode {
    Binary,
    #[default]
    Count,
}

/// Sparse bag-of-words vector. Indices are strictly increasing and every
/// stored value is at least 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SentenceVector {
    indices: Vec<u32>,
    values: Vec<u32>,
}

impl SentenceVector {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: Vec<(u32, u32)>) -> Result<Self> {
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values = Vec::with_capacity(pairs.len());
        for (i, (idx, val)) in pairs.into_iter().enumerate() {
            if val == 0 {
                return Err(Error::format(
                    "sentence vector",
                    format!("zero count at index {idx}"),
                ));
            }
            if i > 0 && indices[i - 1] >= idx {
                return Err(Error::format(
                    "sentence vector",
                    format!("indices not strictly increasing at {idx}"),
                ));
            }
            indices.push(idx);
            values.push(val);
        }
        Ok(Self { indices, values })
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.indices
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    /// Sentence length D: the total count of kept terms.
    pub fn length(&self) -> u32 {
        self.values.iter().sum()
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Largest stored index plus one, or 0 when empty.
    pub fn min_dim(&self) -> usize {
        self.indices.last().map_or(0, |&i| i as usize + 1)
    }

    /// Presence view: every stored value clamped to 1.
    pub fn binary(&self) -> Self {
        Self {
            indices: self.indices.clone(),
            values: vec![1; self.values.len()],
        }
    }

    pub fn view(&self, mode: VectorMode) -> Self {
        match mode {
            VectorMode::Binary => self.binary(),
            VectorMode::Count => self.clone(),
        }
    }

    /// Writes the vector densely into `out` (which must be zeroed and at
    /// least `min_dim()` long).
    pub fn scatter_into(&self, out: &mut [f64], mode: VectorMode) {
        for (i, v) in self.iter() {
            out[i as usize] = match mode {
                VectorMode::Binary => 1.0,
                VectorMode::Count => v as f64,
            };
        }
    }

    pub fn to_dense(&self, n: usize, mode: VectorMode) -> Vec<f64> {
        let mut out = vec![0.0; n];
        self.scatter_into(&mut out, mode);
        out
    }
}

/// Maps tokens onto `vocab`. Returns the vector and the number of
/// out-of-vocabulary tokens that were dropped.
pub fn vectorize(
    tokens: &[String],
    vocab: &Vocabulary,
    mode: VectorMode,
) -> (SentenceVector, usize) {
    let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
    let mut oov = 0;
    for t in tokens {
        match vocab.index_of(t) {
            Some(i) => *counts.entry(i).or_insert(0) += 1,
            None => oov += 1,
        }
    }
    let (indices, values) = counts
        .into_iter()
        .map(|(i, c)| match mode {
            VectorMode::Binary => (i, 1),
            VectorMode::Count => (i, c),
        })
        .unzip();
    (SentenceVector { indices, values }, oov)
}

/// Counters reported by corpus construction.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub vocab1_size: usize,
    pub vocab2_size: usize,
    pub train_sentences: usize,
    pub test_sentences: usize,
    pub train_empty: usize,
    pub test_empty: usize,
    pub train_oov_tokens: usize,
    pub test_oov_tokens: usize,
}

/// Count-mode vectors for a train/test split plus the vocabulary built from
/// the training side only.
#[derive(Debug, Clone)]
pub struct CorpusSplit {
    pub train: Vec<SentenceVector>,
    pub test: Vec<SentenceVector>,
    pub vocabulary: Vocabulary,
}

impl CorpusSplit {
    pub fn from_sentences<S: AsRef<str> + Sync>(
        train: &[S],
        test: &[S],
        pre: &Preprocessor,
        filter: &VocabFilter,
    ) -> Result<(Self, CorpusStats)> {
        let train_tokens: Vec<Vec<String>> =
            train.par_iter().map(|s| pre.tokens(s.as_ref())).collect();
        let test_tokens: Vec<Vec<String>> =
            test.par_iter().map(|s| pre.tokens(s.as_ref())).collect();
        let VocabularyBuild { vocab1, vocab2 } = build_vocabulary(&train_tokens, filter)?;

        let vectorize_all = |toks: &[Vec<String>]| -> (Vec<SentenceVector>, usize) {
            let out: Vec<(SentenceVector, usize)> = toks
                .par_iter()
                .map(|t| vectorize(t, &vocab2, VectorMode::Count))
                .collect();
            let oov = out.iter().map(|(_, o)| o).sum();
            (out.into_iter().map(|(v, _)| v).collect(), oov)
        };
        let (train_vecs, train_oov) = vectorize_all(&train_tokens);
        let (test_vecs, test_oov) = vectorize_all(&test_tokens);

        let stats = CorpusStats {
            vocab1_size: vocab1.len(),
            vocab2_size: vocab2.len(),
            train_sentences: train_vecs.len(),
            test_sentences: test_vecs.len(),
            train_empty: train_vecs.iter().filter(|v| v.is_empty()).count(),
            test_empty: test_vecs.iter().filter(|v| v.is_empty()).count(),
            train_oov_tokens: train_oov,
            test_oov_tokens: test_oov,
        };
        Ok((
            Self {
                train: train_vecs,
                test: test_vecs,
                vocabulary: vocab2,
            },
            stats,
        ))
    }

    pub fn dim(&self) -> usize {
        self.vocabulary.len()
    }
}
