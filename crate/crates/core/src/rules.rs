//! Association rules `X -> Y` mined from frequent itemsets.
//!
//! Confidence is kept as an exact ratio `support(X u Y) / support(X)` and
//! compared against thresholds without floating point.

use std::fmt;

use crate::error::{Error, Result};
use crate::mining::{apriori_gen, FrequentCollection, MiningParams};
use crate::ratio::{format_decimal, Ratio};
use crate::store::{Dictionary, Itemset, TransactionDb};

/// Antecedent/consequent pair without statistics, as read from a rules file.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleSpec {
    pub antecedent: Itemset,
    pub consequent: Itemset,
}

impl RuleSpec {
    pub fn new(antecedent: Itemset, consequent: Itemset) -> Result<Self> {
        if antecedent.is_empty() || consequent.is_empty() {
            return Err(Error::Contract("rule sides must be non-empty".into()));
        }
        if !antecedent.is_disjoint(&consequent) {
            return Err(Error::Contract("rule sides must be disjoint".into()));
        }
        Ok(RuleSpec {
            antecedent,
            consequent,
        })
    }

    /// `X u Y`, the itemset that generates the rule.
    pub fn generating_itemset(&self) -> Itemset {
        self.antecedent.union(&self.consequent)
    }

    pub fn display<'a>(&'a self, dict: &'a Dictionary) -> DisplayRule<'a> {
        DisplayRule { dict, rule: self }
    }

    /// Canonical rule order: size of `X u Y`, then `X`, then `Y`.
    pub fn canonical_cmp(&self, other: &RuleSpec) -> std::cmp::Ordering {
        (self.antecedent.len() + self.consequent.len())
            .cmp(&(other.antecedent.len() + other.consequent.len()))
            .then_with(|| self.antecedent.cmp(&other.antecedent))
            .then_with(|| self.consequent.cmp(&other.consequent))
    }
}

pub struct DisplayRule<'a> {
    dict: &'a Dictionary,
    rule: &'a RuleSpec,
}

impl fmt::Display for DisplayRule<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} -> {}",
            self.dict.display(&self.rule.antecedent),
            self.dict.display(&self.rule.consequent)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AssociationRule {
    pub spec: RuleSpec,
    /// Support count of `X u Y`.
    pub support: u64,
    pub confidence: Ratio,
}

impl AssociationRule {
    pub fn antecedent(&self) -> &Itemset {
        &self.spec.antecedent
    }

    pub fn consequent(&self) -> &Itemset {
        &self.spec.consequent
    }

    /// `X -> Y support=<count> conf=<decimal>`, the listing format.
    pub fn listing<'a>(&'a self, dict: &'a Dictionary) -> impl fmt::Display + 'a {
        ListingLine { dict, rule: self }
    }
}

struct ListingLine<'a> {
    dict: &'a Dictionary,
    rule: &'a AssociationRule,
}

impl fmt::Display for ListingLine<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} support={} conf={}",
            self.rule.spec.display(self.dict),
            self.rule.support,
            format_decimal(&self.rule.confidence, 4)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleParams {
    pub mining: MiningParams,
    pub min_confidence: Ratio,
}

impl RuleParams {
    pub fn new(mining: MiningParams, min_confidence: Ratio) -> Result<Self> {
        if min_confidence > Ratio::from_integer(1) {
            return Err(Error::Param(format!(
                "min confidence {min_confidence} is outside [0, 1]"
            )));
        }
        Ok(RuleParams {
            mining,
            min_confidence,
        })
    }
}

/// Rules in canonical order, no duplicate `(X, Y)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleSet {
    pub rules: Vec<AssociationRule>,
}

impl RuleSet {
    pub fn from_rules(mut rules: Vec<AssociationRule>) -> Self {
        rules.sort_by(|a, b| a.spec.canonical_cmp(&b.spec));
        rules.dedup_by(|a, b| a.spec == b.spec);
        RuleSet { rules }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &AssociationRule> {
        self.rules.iter()
    }

    pub fn get(&self, spec: &RuleSpec) -> Option<&AssociationRule> {
        self.rules
            .binary_search_by(|r| r.spec.canonical_cmp(spec))
            .ok()
            .map(|i| &self.rules[i])
    }

    pub fn contains(&self, spec: &RuleSpec) -> bool {
        self.get(spec).is_some()
    }
}

/// Exact `support(X u Y) / support(X)`.
pub fn confidence(db: &TransactionDb, antecedent: &Itemset, consequent: &Itemset) -> Result<Ratio> {
    if antecedent.is_empty() || consequent.is_empty() || !antecedent.is_disjoint(consequent) {
        return Err(Error::Contract(
            "confidence needs non-empty disjoint sides".into(),
        ));
    }
    let whole = db.support_count(&antecedent.union(consequent))? as u64;
    let base = db.support_count(antecedent)? as u64;
    if base == 0 {
        return Err(Error::UndefinedConfidence);
    }
    Ok(Ratio::new(whole, base))
}

/// Mines every rule `x -> I - x` over the frequent itemsets `I`, keeping
/// those with confidence `>= min_confidence`.
///
/// Consequents are grown level-wise per itemset: a consequent is only tried
/// if all its one-smaller subsets produced passing rules, since moving items
/// from antecedent to consequent can only lower confidence.
pub fn mine_rules(
    freq: &FrequentCollection,
    db: &TransactionDb,
    params: &RuleParams,
) -> Result<RuleSet> {
    mine_rules_with(freq, db, params, true)
}

/// [`mine_rules`] with the consequent pruning optionally disabled. Both
/// settings return the same rules.
pub fn mine_rules_with(
    freq: &FrequentCollection,
    db: &TransactionDb,
    params: &RuleParams,
    confidence_pruning: bool,
) -> Result<RuleSet> {
    let params = RuleParams::new(params.mining, params.min_confidence)?;
    check_consistent(freq, db, &params)?;
    let mut rules = Vec::new();
    for fi in freq.iter().filter(|f| f.itemset.len() >= 2) {
        let mut emit = |consequent: &Itemset| -> Result<bool> {
            let antecedent = fi.itemset.difference(consequent);
            let base = freq.support_of(&antecedent).ok_or_else(|| {
                Error::Contract("frequent collection is not downward closed".into())
            })?;
            let conf = Ratio::new(fi.support, base);
            let pass = conf >= params.min_confidence;
            if pass {
                rules.push(AssociationRule {
                    spec: RuleSpec {
                        antecedent,
                        consequent: consequent.clone(),
                    },
                    support: fi.support,
                    confidence: conf,
                });
            }
            Ok(pass)
        };
        if confidence_pruning {
            let mut level: Vec<Itemset> = fi
                .itemset
                .items()
                .iter()
                .map(|id| Itemset::from_ids([*id]))
                .collect();
            while !level.is_empty() && level[0].len() < fi.itemset.len() {
                let mut passing = Vec::with_capacity(level.len());
                for y in level {
                    if emit(&y)? {
                        passing.push(y);
                    }
                }
                level = apriori_gen(&passing)?;
            }
        } else {
            let items = fi.itemset.items();
            let full = (1u64 << items.len()) - 1;
            for mask in 1..full {
                let y: Itemset = items
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| mask & (1 << bit) != 0)
                    .map(|(_, id)| *id)
                    .collect();
                emit(&y)?;
            }
        }
    }
    Ok(RuleSet::from_rules(rules))
}

fn check_consistent(
    freq: &FrequentCollection,
    db: &TransactionDb,
    params: &RuleParams,
) -> Result<()> {
    let threshold = params.mining.min_support.threshold_count(db.len())?;
    if threshold != freq.threshold_count {
        return Err(Error::Contract(format!(
            "frequent itemsets were mined at threshold {}, rules requested at {threshold}",
            freq.threshold_count
        )));
    }
    for fi in freq.iter() {
        if db.support_count(&fi.itemset)? as u64 != fi.support {
            return Err(Error::Contract(
                "frequent itemset supports are stale for this database".into(),
            ));
        }
    }
    Ok(())
}

/// Parses `A B -> C` lines against `db`'s dictionary. `#` lines and blank
/// lines are skipped.
pub fn parse_rules_file(text: &str, db: &TransactionDb) -> Result<Vec<RuleSpec>> {
    let mut specs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        specs.push(parse_rule_line(line, db.dictionary()).map_err(|m| Error::parse(i + 1, m))?);
    }
    Ok(specs)
}

pub(crate) fn parse_rule_line(
    line: &str,
    dict: &Dictionary,
) -> std::result::Result<RuleSpec, String> {
    let (lhs, rhs) = line
        .split_once("->")
        .ok_or_else(|| "expected `<items> -> <items>`".to_string())?;
    let side = |text: &str, which: &str| -> std::result::Result<Itemset, String> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.is_empty() {
            return Err(format!("empty {which}"));
        }
        dict.itemset(tokens).map_err(|e| e.to_string())
    };
    let antecedent = side(lhs, "antecedent")?;
    let consequent = side(rhs, "consequent")?;
    if !antecedent.is_disjoint(&consequent) {
        return Err("antecedent and consequent overlap".into());
    }
    Ok(RuleSpec {
        antecedent,
        consequent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mining::{apriori, brute_force_frequent};
    use crate::store::tests::d5;

    fn d5_rules(alpha: Ratio) -> (TransactionDb, RuleSet) {
        let db = d5();
        let mining = MiningParams::count(2);
        let freq = apriori(&db, &mining).unwrap();
        let params = RuleParams::new(mining, alpha).unwrap();
        let rules = mine_rules(&freq, &db, &params).unwrap();
        (db, rules)
    }

    fn spec(db: &TransactionDb, x: &[&str], y: &[&str]) -> RuleSpec {
        let d = db.dictionary();
        RuleSpec::new(d.itemset(x).unwrap(), d.itemset(y).unwrap()).unwrap()
    }

    #[test]
    fn d5_alpha_07_gives_six_pair_rules() {
        let (db, rules) = d5_rules(Ratio::new(7, 10));
        let listed: Vec<String> = rules
            .iter()
            .map(|r| r.spec.display(db.dictionary()).to_string())
            .collect();
        assert_eq!(
            listed,
            ["A -> B", "A -> C", "B -> A", "B -> C", "C -> A", "C -> B"]
        );
        assert!(rules
            .iter()
            .all(|r| r.confidence == Ratio::new(3, 4) && r.support == 3));
    }

    #[test]
    fn d5_alpha_zero_gives_all_splits() {
        let (_, rules) = d5_rules(Ratio::from_integer(0));
        assert_eq!(rules.len(), 12);
    }

    #[test]
    fn d5_alpha_one_gives_nothing() {
        let (_, rules) = d5_rules(Ratio::from_integer(1));
        assert!(rules.is_empty());
    }

    #[test]
    fn pruning_does_not_change_output() {
        let db = d5();
        let mining = MiningParams::count(1);
        let freq = apriori(&db, &mining).unwrap();
        for (n, d) in [(0, 1), (1, 2), (2, 3), (3, 4), (1, 1)] {
            let params = RuleParams::new(mining, Ratio::new(n, d)).unwrap();
            assert_eq!(
                mine_rules_with(&freq, &db, &params, true).unwrap(),
                mine_rules_with(&freq, &db, &params, false).unwrap()
            );
        }
    }

    #[test]
    fn rules_from_oracle_itemsets_match() {
        let db = d5();
        let mining = MiningParams::count(2);
        let params = RuleParams::new(mining, Ratio::new(1, 2)).unwrap();
        let a = mine_rules(&apriori(&db, &mining).unwrap(), &db, &params).unwrap();
        let b = mine_rules(&brute_force_frequent(&db, &mining).unwrap(), &db, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn alpha_above_one_rejected() {
        assert!(RuleParams::new(MiningParams::count(1), Ratio::new(11, 10)).is_err());
    }

    #[test]
    fn stale_frequents_rejected() {
        let mut db = d5();
        let mining = MiningParams::count(2);
        let freq = apriori(&db, &mining).unwrap();
        db.delete_item(1, db.dictionary().id("A").unwrap()).unwrap();
        let params = RuleParams::new(mining, Ratio::from_integer(0)).unwrap();
        assert!(matches!(
            mine_rules(&freq, &db, &params),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn confidence_values() {
        let db = d5();
        let d = db.dictionary();
        let a = d.itemset(["A"]).unwrap();
        let b = d.itemset(["B"]).unwrap();
        assert_eq!(confidence(&db, &a, &b).unwrap(), Ratio::new(3, 4));

        let db2 = TransactionDb::from_rows([vec!["A"], vec!["B"]]).unwrap();
        let d2 = db2.dictionary();
        let (a2, b2) = (d2.itemset(["A"]).unwrap(), d2.itemset(["B"]).unwrap());
        // B never occurs with A.
        assert_eq!(confidence(&db2, &b2, &a2).unwrap(), Ratio::new(0, 1));

        let db3 = parse_basket_ab();
        let d3 = db3.dictionary();
        assert_eq!(
            confidence(
                &db3,
                &d3.itemset(["A"]).unwrap(),
                &d3.itemset(["B"]).unwrap()
            )
            .unwrap(),
            Ratio::from_integer(1)
        );
    }

    fn parse_basket_ab() -> TransactionDb {
        crate::store::parse_basket("A B\nA B\nB\n").unwrap()
    }

    #[test]
    fn zero_support_antecedent_is_undefined() {
        let mut db = d5();
        let a = db.dictionary().id("A").unwrap();
        for tid in db.supporting_tids(&Itemset::from_ids([a])).unwrap() {
            db.delete_item(tid, a).unwrap();
        }
        let d = db.dictionary();
        assert_eq!(
            confidence(&db, &d.itemset(["A"]).unwrap(), &d.itemset(["B"]).unwrap()),
            Err(Error::UndefinedConfidence)
        );
    }

    #[test]
    fn parse_rules() {
        let db = d5();
        assert_eq!(
            parse_rules_file("A -> B\n", &db).unwrap(),
            vec![spec(&db, &["A"], &["B"])]
        );
        assert_eq!(
            parse_rules_file("A B -> C\n# note\n", &db).unwrap(),
            vec![spec(&db, &["A", "B"], &["C"])]
        );
    }

    #[test]
    fn parse_rules_errors_carry_line() {
        let db = d5();
        for (text, line) in [
            ("A -> A\n", 1),
            ("# c\nA -> \n", 2),
            ("A -> B\n -> C\n", 2),
            ("A -> Z\n", 1),
            ("A B\n", 1),
        ] {
            match parse_rules_file(text, &db) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn listing_format() {
        let (db, rules) = d5_rules(Ratio::new(7, 10));
        assert_eq!(
            rules.rules[0].listing(db.dictionary()).to_string(),
            "A -> B support=3 conf=0.7500"
        );
    }
}
