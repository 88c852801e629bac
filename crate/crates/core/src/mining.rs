//! Frequent ("large") itemset mining.
//!
//! [`apriori`] is the level-wise miner: count the candidates of size k, keep
//! the frequent ones, and build the size k+1 candidates from them with
//! [`apriori_gen`]. Counting runs on a vertical index of per-item tid bitsets
//! so that each candidate's support is a popcount of the parent's tidset
//! intersected with one item's tidset.
//!
//! [`brute_force_frequent`] enumerates every non-empty subset of the
//! dictionary. It exists as a test oracle and refuses more than
//! [`BRUTE_FORCE_MAX_ITEMS`] items.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ratio::{ceil_mul, Ratio};
use crate::registry::{Named, Registry};
use crate::store::{ItemId, Itemset, TransactionDb};

pub const BRUTE_FORCE_MAX_ITEMS: usize = 20;

/// Minimum support, either a fraction of the transaction count or an
/// absolute count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinSupport {
    Fraction(Ratio),
    Count(u64),
}

impl MinSupport {
    /// `max(1, ceil(s * n))` for fractions, `max(1, count)` for counts.
    /// An itemset with zero support is never frequent.
    pub fn threshold_count(&self, n: usize) -> Result<u64> {
        let raw = match self {
            MinSupport::Fraction(s) => {
                if *s > Ratio::from_integer(1) {
                    return Err(Error::Param(format!(
                        "fractional min support {s} is outside [0, 1]"
                    )));
                }
                ceil_mul(s, n)
            }
            MinSupport::Count(c) => *c,
        };
        Ok(raw.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MiningParams {
    pub min_support: MinSupport,
}

impl MiningParams {
    pub fn count(count: u64) -> Self {
        MiningParams {
            min_support: MinSupport::Count(count),
        }
    }

    pub fn fraction(fraction: Ratio) -> Self {
        MiningParams {
            min_support: MinSupport::Fraction(fraction),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FrequentItemset {
    pub itemset: Itemset,
    pub support: u64,
}

/// Frequent itemsets grouped by size: `levels[0]` holds the singletons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequentCollection {
    pub levels: Vec<Vec<FrequentItemset>>,
    /// Database passes under the level-wise model.
    pub scan_count: usize,
    pub threshold_count: u64,
}

impl FrequentCollection {
    pub fn iter(&self) -> impl Iterator<Item = &FrequentItemset> {
        self.levels.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Size of the largest frequent itemset, 0 if there is none.
    pub fn max_size(&self) -> usize {
        self.levels.len()
    }

    pub fn support_of(&self, set: &Itemset) -> Option<u64> {
        let level = self.levels.get(set.len().checked_sub(1)?)?;
        level
            .binary_search_by(|f| f.itemset.cmp(set))
            .ok()
            .map(|i| level[i].support)
    }

    fn from_sorted_levels(mut levels: Vec<Vec<FrequentItemset>>, threshold_count: u64) -> Self {
        while levels.last().is_some_and(Vec::is_empty) {
            levels.pop();
        }
        // One pass per non-empty level, plus the pass over the next candidate
        // set that finds nothing frequent.
        let scan_count = levels.len() + 1;
        FrequentCollection {
            levels,
            scan_count,
            threshold_count,
        }
    }
}

/// A frequent itemset miner selectable by name.
pub trait FrequentMiner: Named + Send + Sync {
    fn mine(&self, db: &TransactionDb, params: &MiningParams) -> Result<FrequentCollection>;
}

pub struct Apriori;

impl Named for Apriori {
    fn name(&self) -> &'static str {
        "apriori"
    }
}

impl FrequentMiner for Apriori {
    fn mine(&self, db: &TransactionDb, params: &MiningParams) -> Result<FrequentCollection> {
        apriori(db, params)
    }
}

pub struct BruteForce;

impl Named for BruteForce {
    fn name(&self) -> &'static str {
        "brute-force"
    }
}

impl FrequentMiner for BruteForce {
    fn mine(&self, db: &TransactionDb, params: &MiningParams) -> Result<FrequentCollection> {
        brute_force_frequent(db, params)
    }
}

pub type MinerRegistry = Registry<dyn FrequentMiner>;

impl Default for MinerRegistry {
    /// `apriori` and `brute-force`.
    fn default() -> Self {
        let mut r: MinerRegistry = Registry::empty("miner");
        r.register(Box::new(Apriori));
        r.register(Box::new(BruteForce));
        r
    }
}

/// Per-item tid bitsets.
struct TidIndex {
    words: usize,
    by_item: Vec<Vec<u64>>,
}

impl TidIndex {
    fn build(db: &TransactionDb) -> Self {
        let words = db.len().div_ceil(64);
        let mut by_item = vec![vec![0u64; words]; db.item_count()];
        for (pos, t) in db.transactions().iter().enumerate() {
            for id in t.items.items() {
                by_item[id.index()][pos / 64] |= 1 << (pos % 64);
            }
        }
        TidIndex { words, by_item }
    }

    fn item(&self, id: ItemId) -> &[u64] {
        &self.by_item[id.index()]
    }

    fn intersect(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        debug_assert_eq!(a.len(), self.words);
        a.iter().zip(b).map(|(x, y)| x & y).collect()
    }
}

fn popcount(bits: &[u64]) -> u64 {
    bits.iter().map(|w| w.count_ones() as u64).sum()
}

/// Level-wise Apriori. Returns exactly the itemsets whose support reaches the
/// threshold (inclusive).
pub fn apriori(db: &TransactionDb, params: &MiningParams) -> Result<FrequentCollection> {
    let threshold = params.min_support.threshold_count(db.len())?;
    let index = TidIndex::build(db);

    let mut level: Vec<(FrequentItemset, Vec<u64>)> = db
        .dictionary()
        .ids()
        .filter_map(|id| {
            let bits = index.item(id).to_vec();
            let support = popcount(&bits);
            (support >= threshold).then(|| {
                (
                    FrequentItemset {
                        itemset: Itemset::from_ids([id]),
                        support,
                    },
                    bits,
                )
            })
        })
        .collect();

    let mut levels = Vec::new();
    while !level.is_empty() {
        let prior: Vec<Itemset> = level.iter().map(|(f, _)| f.itemset.clone()).collect();
        let joined = join_and_prune(&prior);
        let next: Vec<(FrequentItemset, Vec<u64>)> = joined
            .into_par_iter()
            .filter_map(|(parent, candidate)| {
                let last = *candidate.items().last()?;
                let bits = index.intersect(&level[parent].1, index.item(last));
                let support = popcount(&bits);
                (support >= threshold).then_some((
                    FrequentItemset {
                        itemset: candidate,
                        support,
                    },
                    bits,
                ))
            })
            .collect();
        levels.push(level.into_iter().map(|(f, _)| f).collect());
        level = next;
    }
    Ok(FrequentCollection::from_sorted_levels(levels, threshold))
}

/// Candidate generation from one level of frequent itemsets.
///
/// Join: two itemsets `I < J` agreeing on all but their last item produce
/// `I u J`. Prune: a candidate survives only if every subset one item
/// smaller is in `prior_level`. `prior_level` must be canonically sorted,
/// duplicate-free and of uniform non-zero size.
pub fn apriori_gen(prior_level: &[Itemset]) -> Result<Vec<Itemset>> {
    let Some(first) = prior_level.first() else {
        return Ok(Vec::new());
    };
    let size = first.len();
    if size == 0 {
        return Err(Error::Contract(
            "apriori_gen input contains the empty itemset".into(),
        ));
    }
    if let Some(bad) = prior_level.iter().find(|s| s.len() != size) {
        return Err(Error::Contract(format!(
            "apriori_gen input mixes sizes {size} and {}",
            bad.len()
        )));
    }
    if prior_level.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Contract(
            "apriori_gen input is not strictly ascending".into(),
        ));
    }
    Ok(join_and_prune(prior_level)
        .into_iter()
        .map(|(_, c)| c)
        .collect())
}

/// Returns candidates paired with the index of the prior-level itemset they
/// extend (its tidset is reused for counting). Output is canonically sorted.
fn join_and_prune(prior: &[Itemset]) -> Vec<(usize, Itemset)> {
    let lookup: HashSet<&Itemset> = prior.iter().collect();
    let mut out = Vec::new();
    for (i, left) in prior.iter().enumerate() {
        let prefix = &left.items()[..left.len() - 1];
        for right in prior[i + 1..]
            .iter()
            .take_while(|r| &r.items()[..r.len() - 1] == prefix)
        {
            let mut items = left.items().to_vec();
            items.push(*right.items().last().expect("non-empty"));
            let candidate = Itemset::from_sorted(items);
            if all_subsets_frequent(&candidate, &lookup) {
                out.push((i, candidate));
            }
        }
    }
    out
}

fn all_subsets_frequent(candidate: &Itemset, lookup: &HashSet<&Itemset>) -> bool {
    let items = candidate.items();
    // Dropping either of the last two items yields the joined parents.
    (0..items.len().saturating_sub(2)).all(|skip| {
        let subset = Itemset::from_sorted(
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, id)| *id)
                .collect(),
        );
        lookup.contains(&subset)
    })
}

/// Exhaustive oracle: counts every non-empty subset of the dictionary with a
/// full database scan. `scan_count` is the number of subsets counted.
pub fn brute_force_frequent(
    db: &TransactionDb,
    params: &MiningParams,
) -> Result<FrequentCollection> {
    let m = db.item_count();
    if m > BRUTE_FORCE_MAX_ITEMS {
        return Err(Error::TooManyItems {
            items: m,
            limit: BRUTE_FORCE_MAX_ITEMS,
        });
    }
    let threshold = params.min_support.threshold_count(db.len())?;
    let ids: Vec<ItemId> = db.dictionary().ids().collect();
    let mut levels: Vec<Vec<FrequentItemset>> = vec![Vec::new(); m];
    let subsets = (1u32 << m) - 1;
    for mask in 1..=subsets {
        let set: Itemset = ids
            .iter()
            .enumerate()
            .filter(|(bit, _)| mask & (1 << bit) != 0)
            .map(|(_, id)| *id)
            .collect();
        let support = db.support_count(&set)? as u64;
        if support >= threshold {
            levels[set.len() - 1].push(FrequentItemset {
                itemset: set,
                support,
            });
        }
    }
    for level in &mut levels {
        level.sort_by(|a, b| a.itemset.cmp(&b.itemset));
    }
    let mut out = FrequentCollection::from_sorted_levels(levels, threshold);
    out.scan_count = subsets as usize;
    Ok(out)
}
