//! Transaction database, basket file format and support counting.
//!
//! Basket format: one transaction per line, whitespace-separated item names.
//! Lines starting with `#` are comments. Every other line, empty ones
//! included, is a transaction; its tid is its 1-based index among the
//! non-comment lines.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Dense handle into a [`Dictionary`]. Ids follow lexicographic name order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemId(pub u32);

impl ItemId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Set of items kept in ascending id order.
///
/// Itemsets order canonically by size first, then lexicographically by id,
/// so sorting a mixed collection lists all singletons before all pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Itemset(Vec<ItemId>);

impl Itemset {
    pub fn empty() -> Self {
        Itemset(Vec::new())
    }

    pub fn from_ids(ids: impl IntoIterator<Item = ItemId>) -> Self {
        let mut items: Vec<ItemId> = ids.into_iter().collect();
        items.sort_unstable();
        items.dedup();
        Itemset(items)
    }

    /// Builds from ids already strictly ascending. Only checked in debug builds.
    pub(crate) fn from_sorted(items: Vec<ItemId>) -> Self {
        debug_assert!(items.windows(2).all(|w| w[0] < w[1]));
        Itemset(items)
    }

    pub fn items(&self) -> &[ItemId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<ItemId> {
        self.0.first().copied()
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    /// Merge walk over both sorted lists.
    pub fn is_subset_of(&self, other: &Itemset) -> bool {
        if self.len() > other.len() {
            return false;
        }
        let mut rest = other.0.iter();
        'outer: for a in &self.0 {
            for b in rest.by_ref() {
                match b.cmp(a) {
                    Ordering::Less => continue,
                    Ordering::Equal => continue 'outer,
                    Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    pub fn is_disjoint(&self, other: &Itemset) -> bool {
        !self.0.iter().any(|i| other.contains(*i))
    }

    pub fn union(&self, other: &Itemset) -> Itemset {
        Itemset::from_ids(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn difference(&self, other: &Itemset) -> Itemset {
        Itemset(
            self.0
                .iter()
                .copied()
                .filter(|i| !other.contains(*i))
                .collect(),
        )
    }

    pub(crate) fn remove(&mut self, item: ItemId) -> bool {
        match self.0.binary_search(&item) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }
}

impl Ord for Itemset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Itemset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromIterator<ItemId> for Itemset {
    fn from_iter<T: IntoIterator<Item = ItemId>>(iter: T) -> Self {
        Itemset::from_ids(iter)
    }
}

/// Bijection between item names and dense ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dictionary {
    names: Vec<String>,
    ids: HashMap<String, ItemId>,
}

impl Dictionary {
    /// Ids are assigned in lexicographic order of the distinct names.
    pub fn from_names<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let sorted: BTreeSet<String> = names.into_iter().map(|s| s.as_ref().to_owned()).collect();
        for name in &sorted {
            validate_token(name).map_err(|m| Error::Param(format!("item `{name}`: {m}")))?;
        }
        let names: Vec<String> = sorted.into_iter().collect();
        let ids = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), ItemId(i as u32)))
            .collect();
        Ok(Dictionary { names, ids })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<ItemId> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: ItemId) -> Option<&str> {
        self.names.get(id.index()).map(String::as_str)
    }

    pub fn ids(&self) -> impl Iterator<Item = ItemId> + '_ {
        (0..self.names.len() as u32).map(ItemId)
    }

    pub fn contains(&self, id: ItemId) -> bool {
        id.index() < self.names.len()
    }

    /// Resolves names to an itemset; duplicates collapse.
    pub fn itemset<S: AsRef<str>>(&self, names: impl IntoIterator<Item = S>) -> Result<Itemset> {
        names
            .into_iter()
            .map(|n| {
                self.id(n.as_ref())
                    .ok_or_else(|| Error::UnknownItem(n.as_ref().to_owned()))
            })
            .collect()
    }

    /// Space-separated names in canonical order.
    pub fn display<'a>(&'a self, itemset: &'a Itemset) -> DisplayItemset<'a> {
        DisplayItemset {
            dict: self,
            itemset,
        }
    }
}

pub struct DisplayItemset<'a> {
    dict: &'a Dictionary,
    itemset: &'a Itemset,
}

impl fmt::Display for DisplayItemset<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, id) in self.itemset.items().iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(self.dict.name(*id).unwrap_or("?"))?;
        }
        Ok(())
    }
}

fn validate_token(token: &str) -> std::result::Result<(), &'static str> {
    if token.is_empty() {
        Err("empty item name")
    } else if token.contains('#') {
        Err("item names may not contain '#'")
    } else if token.contains("->") {
        Err("item names may not contain \"->\"")
    } else if token.chars().any(char::is_whitespace) {
        Err("item names may not contain whitespace")
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    /// 1-based position in the database. Never renumbered.
    pub tid: usize,
    pub items: Itemset,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionDb {
    dictionary: Dictionary,
    transactions: Vec<Transaction>,
}

impl TransactionDb {
    /// Builds a database from already-resolved itemsets; tids are assigned
    /// from position.
    pub fn new(dictionary: Dictionary, itemsets: Vec<Itemset>) -> Result<Self> {
        for (pos, set) in itemsets.iter().enumerate() {
            if let Some(id) = set.items().iter().find(|id| !dictionary.contains(**id)) {
                return Err(Error::Contract(format!(
                    "transaction {} references item id {} outside the dictionary",
                    pos + 1,
                    id.0
                )));
            }
        }
        let transactions = itemsets
            .into_iter()
            .enumerate()
            .map(|(i, items)| Transaction { tid: i + 1, items })
            .collect();
        Ok(TransactionDb {
            dictionary,
            transactions,
        })
    }

    /// Convenience constructor from string rows; the dictionary is every name
    /// seen.
    pub fn from_rows<R, S>(rows: impl IntoIterator<Item = R>) -> Result<Self>
    where
        R: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let rows: Vec<Vec<String>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|s| s.as_ref().to_owned()).collect())
            .collect();
        let dictionary = Dictionary::from_names(rows.iter().flatten())?;
        let itemsets = rows
            .iter()
            .map(|r| dictionary.itemset(r))
            .collect::<Result<Vec<_>>>()?;
        TransactionDb::new(dictionary, itemsets)
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    /// Number of transactions (n).
    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    /// Number of dictionary items (m).
    pub fn item_count(&self) -> usize {
        self.dictionary.len()
    }

    /// Sum of transaction sizes.
    pub fn total_occurrences(&self) -> usize {
        self.transactions.iter().map(|t| t.items.len()).sum()
    }

    pub fn transaction(&self, tid: usize) -> Option<&Transaction> {
        tid.checked_sub(1).and_then(|i| self.transactions.get(i))
    }

    fn check_known(&self, set: &Itemset) -> Result<()> {
        match set
            .items()
            .iter()
            .find(|id| !self.dictionary.contains(**id))
        {
            Some(id) => Err(Error::Contract(format!(
                "item id {} is not in the dictionary",
                id.0
            ))),
            None => Ok(()),
        }
    }

    /// Number of transactions containing `set`.
    pub fn support_count(&self, set: &Itemset) -> Result<usize> {
        self.check_known(set)?;
        Ok(self
            .transactions
            .iter()
            .filter(|t| set.is_subset_of(&t.items))
            .count())
    }

    /// Ascending tids of the transactions containing `set`.
    pub fn supporting_tids(&self, set: &Itemset) -> Result<Vec<usize>> {
        self.check_known(set)?;
        Ok(self
            .transactions
            .iter()
            .filter(|t| set.is_subset_of(&t.items))
            .map(|t| t.tid)
            .collect())
    }

    /// Removes `item` from transaction `tid`. Asking to delete an item the
    /// transaction does not hold is an error, never a silent no-op.
    pub fn delete_item(&mut self, tid: usize, item: ItemId) -> Result<()> {
        let n = self.transactions.len();
        let tx = tid
            .checked_sub(1)
            .and_then(|i| self.transactions.get_mut(i))
            .ok_or_else(|| Error::Contract(format!("tid {tid} out of range 1..={n}")))?;
        if tx.items.remove(item) {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "item id {} is not present in transaction {tid}",
                item.0
            )))
        }
    }
}

/// Parses a basket file. The dictionary is built from every item seen.
pub fn parse_basket(text: &str) -> Result<TransactionDb> {
    let rows = tokenize(text)?;
    let dictionary = Dictionary::from_names(rows.iter().flatten().copied())?;
    let itemsets = rows
        .iter()
        .map(|r| dictionary.itemset(r.iter().copied()))
        .collect::<Result<Vec<_>>>()?;
    TransactionDb::new(dictionary, itemsets)
}

/// Parses a basket file against an existing dictionary, keeping its ids.
/// Used to read a sanitized file next to its original, where some items may
/// no longer occur at all.
pub fn parse_basket_with_dictionary(text: &str, dictionary: &Dictionary) -> Result<TransactionDb> {
    let rows = tokenize(text)?;
    let mut itemsets = Vec::with_capacity(rows.len());
    for (line, row) in line_numbers(text).zip(&rows) {
        let set = dictionary
            .itemset(row.iter().copied())
            .map_err(|e| Error::parse(line, e.to_string()))?;
        itemsets.push(set);
    }
    TransactionDb::new(dictionary.clone(), itemsets)
}

fn line_numbers(text: &str) -> impl Iterator<Item = usize> + '_ {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#'))
        .map(|(i, _)| i + 1)
}

fn tokenize(text: &str) -> Result<Vec<Vec<&str>>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for token in line.split_whitespace() {
            validate_token(token).map_err(|m| Error::parse(i + 1, format!("`{token}`: {m}")))?;
            row.push(token);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Writes one line per transaction, items in canonical order.
pub fn serialize_basket(db: &TransactionDb) -> String {
    let mut out = String::new();
    for t in db.transactions() {
        out.push_str(&db.dictionary().display(&t.items).to_string());
        out.push('\n');
    }
    out
}
