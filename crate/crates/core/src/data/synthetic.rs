//! Seeded synthetic streams standing in for data that cannot be shipped:
//! an ad click-through log and a bag-of-words sentiment corpus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::example::Example;
use crate::sparse::SparseVector;

use super::{unit_scale, Dataset};

/// Click-through stream. Every impression carries a bias feature (index 0), a
/// query feature, and `ad_terms` distinct ad-text features drawn from a power
/// law over `vocabulary` ids. Query ranks follow a power law over `queries`
/// slots; the first `head_queries` slots keep their id for the whole stream,
/// while the rest are reassigned fresh ids at each of `epochs` equal phases, so
/// new rare queries keep arriving. Each impression also carries
/// `context_terms` context tokens (placement, page, user agent fragments)
/// drawn from a power law over `context_vocabulary` ids with value
/// `context_value`; they carry no signal. Clicks follow a logistic model with
/// a hidden weight per query and ad term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CtrSpec {
    pub examples: usize,
    pub queries: usize,
    pub query_exponent: f64,
    pub head_queries: usize,
    pub epochs: usize,
    pub vocabulary: usize,
    pub ad_terms: usize,
    pub term_exponent: f64,
    pub context_terms: usize,
    pub context_vocabulary: usize,
    pub context_exponent: f64,
    pub context_value: f64,
    pub bias: f64,
    /// Standard deviation of the hidden per-feature weights.
    pub weight_scale: f64,
    pub seed: u64,
}

impl Default for CtrSpec {
    fn default() -> Self {
        Self {
            examples: 100_000,
            queries: 2_000,
            query_exponent: 1.1,
            head_queries: 100,
            epochs: 1,
            vocabulary: 2_000,
            ad_terms: 3,
            term_exponent: 1.0,
            context_terms: 60,
            context_vocabulary: 10_000_000,
            context_exponent: 0.5,
            context_value: 0.002,
            bias: -1.5,
            weight_scale: 1.0,
            seed: 7,
        }
    }
}

fn zipf(n: usize, s: f64) -> Result<Zipf<f64>> {
    Zipf::new(n as f64, s).map_err(|e| Error::Config(format!("power law over {n} ids, exponent {s}: {e}")))
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub fn ctr(spec: &CtrSpec) -> Result<Dataset> {
    if spec.examples == 0
        || spec.queries == 0
        || spec.epochs == 0
        || spec.head_queries > spec.queries
        || spec.ad_terms > spec.vocabulary
        || spec.context_terms > spec.context_vocabulary
    {
        return Err(Error::Config(format!("degenerate click-through spec {spec:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, spec.weight_scale)
        .map_err(|e| Error::Config(format!("weight scale: {e}")))?;
    let tail = spec.queries - spec.head_queries;
    let query_ids = spec.head_queries + tail * spec.epochs;
    let query_weights: Vec<f64> = (0..query_ids).map(|_| normal.sample(&mut rng)).collect();
    let term_weights: Vec<f64> = (0..spec.vocabulary).map(|_| normal.sample(&mut rng)).collect();
    let queries = zipf(spec.queries, spec.query_exponent)?;
    let terms = zipf(spec.vocabulary, spec.term_exponent)?;
    let term_base = 1 + query_ids;
    let context_base = term_base + spec.vocabulary;
    let context = zipf(spec.context_vocabulary, spec.context_exponent)?;
    let epoch_len = spec.examples.div_ceil(spec.epochs);

    let mut examples = Vec::with_capacity(spec.examples);
    for t in 0..spec.examples {
        let slot = queries.sample(&mut rng) as usize - 1;
        let q = if slot < spec.head_queries {
            slot
        } else {
            slot + tail * (t / epoch_len)
        };
        let mut features = vec![(0, 1.0), (1 + q, 1.0)];
        let mut z = spec.bias + query_weights[q];
        while features.len() < 2 + spec.ad_terms {
            let w = terms.sample(&mut rng) as usize - 1;
            if features.iter().all(|&(i, _)| i != term_base + w) {
                features.push((term_base + w, 1.0));
                z += term_weights[w];
            }
        }
        let ad_len = features.len();
        while features.len() < ad_len + spec.context_terms {
            let c = context_base + context.sample(&mut rng) as usize - 1;
            if features[ad_len..].iter().all(|&(i, _)| i != c) {
                features.push((c, spec.context_value));
            }
        }
        let label = if rng.random_bool(sigmoid(z)) { 1.0 } else { -1.0 };
        examples.push(Example::new(SparseVector::from_pairs(features), label));
    }
    Ok(Dataset::new(format!("synthetic-ctr-{}", spec.seed), examples))
}

/// Bag-of-words reviews. Words follow a power law over `vocabulary`; the first
/// `polar_words` ranks after `stop_words` carry a hidden polarity. Each document
/// mixes neutral text with polar words biased toward its label, and the counts
/// are scaled to unit length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SentimentSpec {
    pub documents: usize,
    pub vocabulary: usize,
    pub exponent: f64,
    pub stop_words: usize,
    pub polar_words: usize,
    pub min_length: usize,
    pub max_length: usize,
    /// Fraction of tokens drawn from the polar lexicon.
    pub polar_rate: f64,
    /// Probability that a polar token agrees with the document label.
    pub agreement: f64,
    pub seed: u64,
}

impl Default for SentimentSpec {
    fn default() -> Self {
        Self {
            documents: 2_000,
            vocabulary: 20_000,
            exponent: 1.05,
            stop_words: 50,
            polar_words: 4_000,
            min_length: 40,
            max_length: 250,
            polar_rate: 0.15,
            agreement: 0.7,
            seed: 2010,
        }
    }
}

pub fn sentiment(spec: &SentimentSpec) -> Result<Dataset> {
    if spec.documents == 0
        || spec.min_length == 0
        || spec.min_length > spec.max_length
        || spec.stop_words + spec.polar_words > spec.vocabulary
    {
        return Err(Error::Config(format!("degenerate sentiment spec {spec:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let words = zipf(spec.vocabulary, spec.exponent)?;
    let lexicon = zipf(spec.polar_words, spec.exponent)?;
    // polarity of each lexicon entry: +1 or -1, fixed per seed
    let polarity: Vec<f64> = (0..spec.polar_words)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    let polar_of = |rank: usize| rank.checked_sub(spec.stop_words).filter(|&k| k < spec.polar_words);

    let mut examples = Vec::with_capacity(spec.documents);
    for d in 0..spec.documents {
        let label = if d % 2 == 0 { 1.0 } else { -1.0 };
        let length = rng.random_range(spec.min_length..=spec.max_length);
        let mut counts = std::collections::BTreeMap::<usize, f64>::new();
        for _ in 0..length {
            let word = if rng.random_bool(spec.polar_rate) {
                let want = if rng.random_bool(spec.agreement) { label } else { -label };
                // resample until the polarity matches
                loop {
                    let k = lexicon.sample(&mut rng) as usize - 1;
                    if polarity[k] == want {
                        break spec.stop_words + k;
                    }
                }
            } else {
                loop {
                    let w = words.sample(&mut rng) as usize - 1;
                    if polar_of(w).is_none() {
                        break w;
                    }
                }
            };
            *counts.entry(word).or_insert(0.0) += 1.0;
        }
        examples.push(Example::new(counts.into_iter().collect(), label));
    }
    let ds = Dataset::new(format!("synthetic-sentiment-{}", spec.seed), examples);
    Ok(unit_scale(&ds))
}
