//! Side effects of a sanitization, measured by re-mining both databases at
//! the public thresholds.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::hiding::HidingParams;
use crate::mining::{apriori, FrequentCollection};
use crate::ratio::{format_decimal, Ratio};
use crate::rules::{mine_rules, parse_rule_line, AssociationRule, RuleSet, RuleSpec};
use crate::store::{Dictionary, TransactionDb};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelDelta {
    /// Itemset size.
    pub size: usize,
    pub before: usize,
    pub after: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SideEffectReport {
    /// Sensitive rules minable in the original and not in the sanitized db.
    pub hidden_rules: Vec<AssociationRule>,
    /// Sensitive rules still minable after sanitization.
    pub failed_rules: Vec<AssociationRule>,
    /// Non-sensitive rules lost to sanitization.
    pub lost_rules: Vec<AssociationRule>,
    /// Ghost rules: minable only after sanitization.
    pub new_rules: Vec<AssociationRule>,
    pub itemset_delta: Vec<LevelDelta>,
    pub deletions: usize,
    /// Item occurrences in the original database.
    pub original_occurrences: usize,
}

impl SideEffectReport {
    pub fn distortion_ratio(&self) -> Ratio {
        if self.original_occurrences == 0 {
            Ratio::from_integer(0)
        } else {
            Ratio::new(self.deletions as u64, self.original_occurrences as u64)
        }
    }

    pub fn frequent_before(&self) -> usize {
        self.itemset_delta.iter().map(|d| d.before).sum()
    }

    pub fn frequent_after(&self) -> usize {
        self.itemset_delta.iter().map(|d| d.after).sum()
    }
}

fn check_comparable(original: &TransactionDb, sanitized: &TransactionDb) -> Result<()> {
    if original.len() != sanitized.len() {
        return Err(Error::Contract(format!(
            "transaction counts differ: {} vs {}",
            original.len(),
            sanitized.len()
        )));
    }
    if original.dictionary() != sanitized.dictionary() {
        return Err(Error::Contract(
            "databases use different dictionaries".into(),
        ));
    }
    for (o, s) in original.transactions().iter().zip(sanitized.transactions()) {
        if !s.items.is_subset_of(&o.items) {
            return Err(Error::Contract(format!(
                "transaction {} gained items during sanitization",
                o.tid
            )));
        }
    }
    Ok(())
}

fn level_deltas(before: &FrequentCollection, after: &FrequentCollection) -> Vec<LevelDelta> {
    let levels = before.levels.len().max(after.levels.len());
    (0..levels)
        .map(|i| LevelDelta {
            size: i + 1,
            before: before.levels.get(i).map_or(0, Vec::len),
            after: after.levels.get(i).map_or(0, Vec::len),
        })
        .collect()
}

/// Mines both databases at `(threshold, min_confidence)` and diffs the rule
/// sets. The safety margin plays no part here.
pub fn compare(
    original: &TransactionDb,
    sanitized: &TransactionDb,
    params: &HidingParams,
    sensitive: &[RuleSpec],
) -> Result<SideEffectReport> {
    check_comparable(original, sanitized)?;
    let mining = params.mining();
    let rule_params = params.public_rule_params();
    let mine = |db: &TransactionDb| -> Result<(FrequentCollection, RuleSet)> {
        let freq = apriori(db, &mining)?;
        let rules = mine_rules(&freq, db, &rule_params)?;
        Ok((freq, rules))
    };
    let (before, after) = rayon::join(|| mine(original), || mine(sanitized));
    let (freq_before, rules_before) = before?;
    let (freq_after, rules_after) = after?;

    let mut report = SideEffectReport {
        itemset_delta: level_deltas(&freq_before, &freq_after),
        original_occurrences: original.total_occurrences(),
        deletions: original.total_occurrences() - sanitized.total_occurrences(),
        ..Default::default()
    };
    for rule in rules_before.iter() {
        let still_there = rules_after.contains(&rule.spec);
        match (sensitive.contains(&rule.spec), still_there) {
            (true, false) => report.hidden_rules.push(rule.clone()),
            (false, false) => report.lost_rules.push(rule.clone()),
            _ => {}
        }
    }
    for rule in rules_after.iter() {
        if sensitive.contains(&rule.spec) {
            report.failed_rules.push(rule.clone());
        }
        if !rules_before.contains(&rule.spec) {
            report.new_rules.push(rule.clone());
        }
    }
    Ok(report)
}

/// `key=value` header lines, then one section per rule category. Rule lines
/// use the rules-file syntax followed by `support=<count> conf=<num>/<den>`.
/// Hidden and lost rules carry their original statistics; failed and new
/// rules carry the sanitized ones.
pub fn render_report(report: &SideEffectReport, dict: &Dictionary) -> String {
    let mut out = String::new();
    let ratio = report.distortion_ratio();
    let _ = writeln!(out, "hidden={}", report.hidden_rules.len());
    let _ = writeln!(out, "failed={}", report.failed_rules.len());
    let _ = writeln!(out, "lost={}", report.lost_rules.len());
    let _ = writeln!(out, "new={}", report.new_rules.len());
    let _ = writeln!(out, "deletions={}", report.deletions);
    let _ = writeln!(out, "item_occurrences={}", report.original_occurrences);
    let _ = writeln!(out, "distortion_ratio={}", format_decimal(&ratio, 6));
    let _ = writeln!(out, "frequent_before={}", report.frequent_before());
    let _ = writeln!(out, "frequent_after={}", report.frequent_after());
    for d in &report.itemset_delta {
        let _ = writeln!(out, "level{}={}/{}", d.size, d.before, d.after);
    }
    for (title, rules) in [
        ("hidden", &report.hidden_rules),
        ("failed", &report.failed_rules),
        ("lost", &report.lost_rules),
        ("new", &report.new_rules),
    ] {
        let _ = writeln!(out, "# {title}");
        for r in rules {
            let _ = writeln!(
                out,
                "{} support={} conf={}/{}",
                r.spec.display(dict),
                r.support,
                r.confidence.numer(),
                r.confidence.denom()
            );
        }
    }
    out
}

/// Recovers the rule specs of each section of a rendered report, in
/// section order hidden, failed, lost, new.
pub fn parse_report_rules(text: &str, dict: &Dictionary) -> Result<[Vec<RuleSpec>; 4]> {
    let mut sections: [Vec<RuleSpec>; 4] = Default::default();
    let mut current: Option<usize> = None;
    for (i, line) in text.lines().enumerate() {
        if let Some(title) = line.strip_prefix("# ") {
            current = ["hidden", "failed", "lost", "new"]
                .iter()
                .position(|t| *t == title);
            continue;
        }
        let Some(section) = current else { continue };
        let rule = line
            .split_once(" support=")
            .map(|(r, _)| r)
            .ok_or_else(|| Error::parse(i + 1, "rule line lacks `support=`"))?;
        sections[section].push(parse_rule_line(rule, dict).map_err(|m| Error::parse(i + 1, m))?);
    }
    Ok(sections)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hiding::sanitize;
    use crate::mining::MinSupport;
    use crate::rules::parse_rules_file;
    use crate::store::tests::d5;
    use crate::store::{parse_basket, parse_basket_with_dictionary};

    fn params() -> HidingParams {
        HidingParams::new(
            MinSupport::Count(2),
            Ratio::new(7, 10),
            Ratio::from_integer(0),
        )
        .unwrap()
    }

    fn names(rules: &[AssociationRule], dict: &Dictionary) -> Vec<String> {
        rules
            .iter()
            .map(|r| r.spec.display(dict).to_string())
            .collect()
    }

    #[test]
    fn d5_after_hiding_a_to_b() {
        let db = d5();
        let sensitive = parse_rules_file("A -> B\n", &db).unwrap();
        let sanitized =
            parse_basket_with_dictionary("A B C\nB\nA C\nB C\nA B C\n", db.dictionary()).unwrap();
        let r = compare(&db, &sanitized, &params(), &sensitive).unwrap();
        let d = db.dictionary();
        assert_eq!(names(&r.hidden_rules, d), ["A -> B"]);
        assert_eq!(names(&r.lost_rules, d), ["B -> A"]);
        // Dropping A from T2 lowers support({A,B}) to 2, so A B -> C climbs
        // from 2/3 to 2/2.
        assert_eq!(names(&r.new_rules, d), ["A B -> C"]);
        assert_eq!(r.new_rules[0].confidence, Ratio::from_integer(1));
        assert!(r.failed_rules.is_empty());
        assert_eq!(r.deletions, 1);
        assert_eq!(r.distortion_ratio(), Ratio::new(1, 12));
        assert_eq!(
            r.itemset_delta,
            vec![
                LevelDelta {
                    size: 1,
                    before: 3,
                    after: 3
                },
                LevelDelta {
                    size: 2,
                    before: 3,
                    after: 3
                },
                LevelDelta {
                    size: 3,
                    before: 1,
                    after: 1
                },
            ]
        );
        let text = render_report(&r, d);
        assert!(text.starts_with(
            "hidden=1\nfailed=0\nlost=1\nnew=1\ndeletions=1\nitem_occurrences=12\ndistortion_ratio=0.083333\n"
        ));
        assert!(text.contains("# hidden\nA -> B support=3 conf=3/4\n# failed\n# lost\nB -> A support=3 conf=3/4\n# new\nA B -> C support=2 conf=1/1\n"));
    }

    #[test]
    fn identical_databases() {
        let db = d5();
        let r = compare(&db, &db, &params(), &[]).unwrap();
        assert!(r.hidden_rules.is_empty() && r.lost_rules.is_empty() && r.new_rules.is_empty());
        assert_eq!(r.deletions, 0);
    }

    #[test]
    fn empty_report_renders_zeros() {
        let text = render_report(&SideEffectReport::default(), &Dictionary::default());
        assert_eq!(
            text,
            "hidden=0\nfailed=0\nlost=0\nnew=0\ndeletions=0\nitem_occurrences=0\n\
             distortion_ratio=0.000000\nfrequent_before=0\nfrequent_after=0\n\
             # hidden\n# failed\n# lost\n# new\n"
        );
    }

    #[test]
    fn ghost_rule_is_detected() {
        // B -> C has confidence 2/4 before. Removing B from the two
        // transactions holding B without C lifts it to 2/2.
        let db = parse_basket("B C\nB C\nB\nB\nA\n").unwrap();
        let mut sanitized = db.clone();
        let b = db.dictionary().id("B").unwrap();
        sanitized.delete_item(3, b).unwrap();
        sanitized.delete_item(4, b).unwrap();
        let p = HidingParams::new(
            MinSupport::Count(2),
            Ratio::new(3, 4),
            Ratio::from_integer(0),
        )
        .unwrap();
        let r = compare(&db, &sanitized, &p, &[]).unwrap();
        assert_eq!(names(&r.new_rules, db.dictionary()), ["B -> C"]);
    }

    #[test]
    fn mismatched_databases_rejected() {
        let db = d5();
        let shorter = parse_basket_with_dictionary("A\n", db.dictionary()).unwrap();
        assert!(matches!(
            compare(&db, &shorter, &params(), &[]),
            Err(Error::Contract(_))
        ));
        let other = parse_basket("A B C\nA B\nA C\nB C\nA B D\n").unwrap();
        assert!(matches!(
            compare(&db, &other, &params(), &[]),
            Err(Error::Contract(_))
        ));
        let grown =
            parse_basket_with_dictionary("A B C\nA B C\nA C\nB C\nA B C\n", db.dictionary())
                .unwrap();
        assert!(matches!(
            compare(&db, &grown, &params(), &[]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn rendered_rules_parse_back() {
        let db = d5();
        let sensitive = parse_rules_file("A -> B\n", &db).unwrap();
        let p = HidingParams::new(
            MinSupport::Count(2),
            Ratio::new(1, 2),
            Ratio::from_integer(0),
        )
        .unwrap();
        let res = sanitize(&db, &sensitive, &p).unwrap();
        let r = compare(&db, &res.sanitized, &p, &sensitive).unwrap();
        let parsed =
            parse_report_rules(&render_report(&r, db.dictionary()), db.dictionary()).unwrap();
        let specs =
            |rules: &[AssociationRule]| rules.iter().map(|r| r.spec.clone()).collect::<Vec<_>>();
        assert_eq!(parsed[0], specs(&r.hidden_rules));
        assert_eq!(parsed[1], specs(&r.failed_rules));
        assert_eq!(parsed[2], specs(&r.lost_rules));
        assert_eq!(parsed[3], specs(&r.new_rules));
    }
}
