use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{Answer, MembershipOracle, OracleError, Provenance};
use crate::automata::{Alphabet, Symbol, Word};
use crate::identify::LabeledExamples;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CacheEntry {
    pub answer: Answer,
    pub provenance: Provenance,
}

/// Memoized answers keyed by word.
#[derive(Clone, Debug, Default)]
pub struct QueryCache {
    entries: BTreeMap<Word, CacheEntry>,
    /// Treat cached Unsure answers as unknown so they are asked again.
    pub reask_unsure: bool,
}

#[derive(Serialize, Deserialize)]
struct CacheRecord {
    word: Vec<String>,
    answer: Answer,
    provenance: Provenance,
}

impl QueryCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &[Symbol]) -> Option<CacheEntry> {
        let e = *self.entries.get(word)?;
        if self.reask_unsure && e.answer == Answer::Unsure {
            None
        } else {
            Some(e)
        }
    }

    pub fn insert(&mut self, word: Word, entry: CacheEntry) {
        self.entries.insert(word, entry);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &CacheEntry)> {
        self.entries.iter()
    }

    /// Yes/No entries as labelled examples.
    pub fn labeled(&self, alphabet: &Alphabet) -> LabeledExamples {
        let mut ex = LabeledExamples::new(alphabet.clone());
        for (w, e) in &self.entries {
            if let Some(label) = e.answer.label() {
                ex.relabel(w.clone(), label);
            }
        }
        ex
    }

    /// Reads records written by [`QueryCache::append_record`]; later records
    /// for the same word win.
    pub fn load_jsonl(text: &str, alphabet: &Alphabet) -> Result<Self, String> {
        let mut cache = Self::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: CacheRecord = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
            let word = rec
                .word
                .iter()
                .map(|n| alphabet.symbol(n))
                .collect::<Result<Word, _>>()
                .map_err(|e| format!("line {}: {e}", i + 1))?;
            cache.insert(
                word,
                CacheEntry {
                    answer: rec.answer,
                    provenance: rec.provenance,
                },
            );
        }
        Ok(cache)
    }

    pub fn append_record<W: Write + ?Sized>(
        out: &mut W,
        alphabet: &Alphabet,
        word: &[Symbol],
        entry: CacheEntry,
    ) -> io::Result<()> {
        let rec = CacheRecord {
            word: word.iter().map(|&s| alphabet.name(s).to_owned()).collect(),
            answer: entry.answer,
            provenance: entry.provenance,
        };
        serde_json::to_writer(&mut *out, &rec)?;
        out.write_all(b"\n")
    }
}

/// Oracle wrapper that answers seed examples itself, memoizes every inner
/// answer, and only contacts the inner oracle for unseen words. Seed labels
/// always win, so the combined oracle never contradicts them.
pub struct CachingOracle<O> {
    seed: LabeledExamples,
    cache: QueryCache,
    inner: O,
    inner_calls: usize,
    log: Option<Box<dyn Write + Send>>,
}

impl<O: MembershipOracle> CachingOracle<O> {
    pub fn new(seed: LabeledExamples, inner: O) -> Self {
        Self {
            seed,
            cache: QueryCache::new(),
            inner,
            inner_calls: 0,
            log: None,
        }
    }

    pub fn with_cache(mut self, cache: QueryCache) -> Self {
        self.cache = cache;
        self
    }

    /// Appends every new inner answer to `log` as a JSON line.
    pub fn with_log(mut self, log: Box<dyn Write + Send>) -> Self {
        self.log = Some(log);
        self
    }

    pub fn seed(&self) -> &LabeledExamples {
        &self.seed
    }

    pub fn cache(&self) -> &QueryCache {
        &self.cache
    }

    pub fn cache_mut(&mut self) -> &mut QueryCache {
        &mut self.cache
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    pub fn inner_mut(&mut self) -> &mut O {
        &mut self.inner
    }

    pub fn inner_calls(&self) -> usize {
        self.inner_calls
    }

    /// Everything known with a Yes/No label: seed examples plus cached
    /// answers, with seeds taking precedence.
    pub fn known_labels(&self) -> LabeledExamples {
        let mut ex = self.cache.labeled(self.seed.alphabet());
        for (w, label) in self.seed.iter() {
            ex.relabel(w.clone(), label);
        }
        ex
    }
}

impl<O: MembershipOracle> MembershipOracle for CachingOracle<O> {
    fn query(&mut self, word: &[Symbol]) -> Result<Answer, OracleError> {
        if let Some((answer, _)) = self.lookup(word) {
            return Ok(answer);
        }
        let answer = self.inner.query(word)?;
        self.inner_calls += 1;
        let entry = CacheEntry {
            answer,
            provenance: Provenance::Oracle,
        };
        self.cache.insert(Word::from(word), entry);
        if let Some(log) = self.log.as_mut() {
            if let Err(e) = QueryCache::append_record(log, self.seed.alphabet(), word, entry) {
                log::warn!("cache log write failed: {e}");
            }
        }
        Ok(answer)
    }

    fn lookup(&self, word: &[Symbol]) -> Option<(Answer, Provenance)> {
        if let Some(label) = self.seed.label(word) {
            return Some((Answer::from_bool(label), Provenance::SeedExample));
        }
        self.cache.get(word).map(|e| (e.answer, e.provenance))
    }

    fn is_live(&self) -> bool {
        self.inner.is_live()
    }
}
