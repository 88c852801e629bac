//! Weight-based sorting distortion.
//!
//! For each sensitive rule `X -> Y` that is still minable, the transactions
//! supporting `X u Y` are ranked by priority (the summed weight of the strong
//! non-sensitive rules each one supports) and the lowest-priority ones lose
//! the first item of `X`. Deleting an antecedent item lowers both
//! `support(X u Y)` and `support(X)` by one, so confidence `(a-k)/(b-k)`
//! never increases and the number of deletions has a closed form
//! ([`hiding_count`]).
//!
//! Rules are processed in input order against the current database. A later
//! deletion can raise an earlier rule's confidence (it removes an `X` item
//! from a transaction that lacks `Y`), so passes repeat until one makes no
//! change.

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mining::{apriori, MinSupport, MiningParams};
use crate::ratio::{to_big, Ratio};
use crate::registry::{Named, Registry};
use crate::rules::{mine_rules, AssociationRule, RuleParams, RuleSet, RuleSpec};
use crate::store::{Dictionary, ItemId, Itemset, TransactionDb};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HidingParams {
    pub min_support: MinSupport,
    pub min_confidence: Ratio,
    pub safety_margin: Ratio,
}

impl HidingParams {
    /// Requires `min_confidence <= 1` and `safety_margin < min_confidence`.
    pub fn new(
        min_support: MinSupport,
        min_confidence: Ratio,
        safety_margin: Ratio,
    ) -> Result<Self> {
        if min_confidence > Ratio::from_integer(1) {
            return Err(Error::Param(format!(
                "min confidence {min_confidence} is outside [0, 1]"
            )));
        }
        if safety_margin >= min_confidence {
            return Err(Error::Param(format!(
                "safety margin {safety_margin} must be below min confidence {min_confidence}"
            )));
        }
        if let MinSupport::Fraction(s) = min_support {
            if s > Ratio::from_integer(1) {
                return Err(Error::Param(format!(
                    "fractional min support {s} is outside [0, 1]"
                )));
            }
        }
        Ok(HidingParams {
            min_support,
            min_confidence,
            safety_margin,
        })
    }

    /// Hiding target `min_confidence - safety_margin`.
    pub fn theta(&self) -> Ratio {
        self.min_confidence - self.safety_margin
    }

    pub fn mining(&self) -> MiningParams {
        MiningParams {
            min_support: self.min_support,
        }
    }

    /// Parameters an adversary would mine with: the public thresholds.
    pub fn public_rule_params(&self) -> RuleParams {
        RuleParams {
            mining: self.mining(),
            min_confidence: self.min_confidence,
        }
    }
}

/// Strength of a strong rule, summed into transaction priorities.
pub trait RuleWeight: Named + Send + Sync {
    fn weight(&self, rule: &AssociationRule) -> Ratio;
}

/// Weight = confidence.
pub struct ConfidenceWeight;

impl Named for ConfidenceWeight {
    fn name(&self) -> &'static str {
        "confidence"
    }
}

impl RuleWeight for ConfidenceWeight {
    fn weight(&self, rule: &AssociationRule) -> Ratio {
        rule.confidence
    }
}

/// Weight = 1, so priority counts supported strong rules.
pub struct UnitWeight;

impl Named for UnitWeight {
    fn name(&self) -> &'static str {
        "unit"
    }
}

impl RuleWeight for UnitWeight {
    fn weight(&self, _rule: &AssociationRule) -> Ratio {
        Ratio::from_integer(1)
    }
}

pub type WeightRegistry = Registry<dyn RuleWeight>;

impl Default for WeightRegistry {
    fn default() -> Self {
        let mut r: WeightRegistry = Registry::empty("weight");
        r.register(Box::new(ConfidenceWeight));
        r.register(Box::new(UnitWeight));
        r
    }
}

/// The default rule weight (confidence).
pub fn rule_weight(rule: &AssociationRule) -> Ratio {
    ConfidenceWeight.weight(rule)
}

fn is_hidden(a: u64, b: u64, theta: Ratio, threshold: u64) -> bool {
    b == 0 || a < threshold || Ratio::new(a, b) < theta
}

fn count_pair(db: &TransactionDb, spec: &RuleSpec) -> Result<(u64, u64)> {
    Ok((
        db.support_count(&spec.generating_itemset())? as u64,
        db.support_count(&spec.antecedent)? as u64,
    ))
}

/// Smallest `k` such that deleting an antecedent item from `k` transactions
/// that support `X u Y` leaves the rule below `theta` or below the support
/// threshold.
pub fn hiding_count(
    db: &TransactionDb,
    rule: &RuleSpec,
    theta: Ratio,
    threshold_count: u64,
) -> Result<u64> {
    if theta <= Ratio::from_integer(0) {
        return Err(Error::Param("hiding threshold must be positive".into()));
    }
    let (a, b) = count_pair(db, rule)?;
    if b == 0 {
        return Err(Error::UndefinedConfidence);
    }
    Ok(hiding_count_from(a, b, theta, threshold_count))
}

fn hiding_count_from(a: u64, b: u64, theta: Ratio, threshold: u64) -> u64 {
    (0..=a)
        .find(|k| is_hidden(a - k, b - k, theta, threshold))
        .unwrap_or(a)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionPriority {
    pub tid: usize,
    pub priority: BigRational,
}

/// Priority of each candidate: summed weight of the strong rules outside
/// `sensitive` whose generating itemset the transaction contains. Sorted by
/// priority, then tid.
pub fn transaction_priorities(
    db: &TransactionDb,
    strong_rules: &RuleSet,
    sensitive: &[RuleSpec],
    candidate_tids: &[usize],
    weight: &dyn RuleWeight,
) -> Result<Vec<TransactionPriority>> {
    let weighted: Vec<(Itemset, BigRational)> = strong_rules
        .iter()
        .filter(|r| !sensitive.contains(&r.spec))
        .map(|r| (r.spec.generating_itemset(), to_big(&weight.weight(r))))
        .collect();
    let mut out = candidate_tids
        .par_iter()
        .map(|&tid| {
            let tx = db
                .transaction(tid)
                .ok_or_else(|| Error::Contract(format!("candidate tid {tid} out of range")))?;
            let priority = weighted
                .iter()
                .filter(|(set, _)| set.is_subset_of(&tx.items))
                .fold(BigRational::zero(), |acc, (_, w)| acc + w);
            Ok(TransactionPriority { tid, priority })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.priority.cmp(&b.priority).then(a.tid.cmp(&b.tid)));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Modification {
    /// 1-based position in the log.
    pub step: usize,
    pub tid: usize,
    pub item: ItemId,
    pub rule: RuleSpec,
}

/// One round of deletions for one rule: all ranked candidates, of which the
/// first `selected` were modified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HidingStep {
    pub rule_index: usize,
    pub ranked: Vec<TransactionPriority>,
    pub selected: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HidingStatus {
    /// Deletions were needed.
    Hidden,
    /// Not minable when first examined; nothing deleted for it.
    AlreadyHidden,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleOutcome {
    pub rule: RuleSpec,
    pub status: HidingStatus,
    /// `None` when the antecedent has zero support.
    pub initial_confidence: Option<Ratio>,
    pub final_confidence: Option<Ratio>,
    pub initial_support: u64,
    pub final_support: u64,
    /// Tids modified on behalf of this rule, in deletion order.
    pub touched: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SanitizationResult {
    pub sanitized: TransactionDb,
    pub modifications: Vec<Modification>,
    pub steps: Vec<HidingStep>,
    pub outcomes: Vec<RuleOutcome>,
}

impl SanitizationResult {
    /// Indices of sensitive rules that needed no deletions.
    pub fn already_hidden(&self) -> Vec<usize> {
        self.outcomes
            .iter()
            .enumerate()
            .filter(|(_, o)| o.status == HidingStatus::AlreadyHidden)
            .map(|(i, _)| i)
            .collect()
    }
}

fn ratio_or_none(a: u64, b: u64) -> Option<Ratio> {
    (b > 0).then(|| Ratio::new(a, b))
}

/// Sanitizes with the confidence weight.
pub fn sanitize(
    db: &TransactionDb,
    sensitive: &[RuleSpec],
    params: &HidingParams,
) -> Result<SanitizationResult> {
    sanitize_with(db, sensitive, params, &ConfidenceWeight)
}

pub fn sanitize_with(
    db: &TransactionDb,
    sensitive: &[RuleSpec],
    params: &HidingParams,
    weight: &dyn RuleWeight,
) -> Result<SanitizationResult> {
    let params = HidingParams::new(
        params.min_support,
        params.min_confidence,
        params.safety_margin,
    )?;
    let theta = params.theta();
    let threshold = params.min_support.threshold_count(db.len())?;
    for spec in sensitive {
        RuleSpec::new(spec.antecedent.clone(), spec.consequent.clone())?;
        db.support_count(&spec.generating_itemset())?;
    }

    let mut current = db.clone();
    let mut modifications = Vec::new();
    let mut steps = Vec::new();
    let mut initial: Vec<Option<(u64, u64)>> = vec![None; sensitive.len()];
    let mut touched: Vec<Vec<usize>> = vec![Vec::new(); sensitive.len()];

    loop {
        let mut changed = false;
        for (idx, spec) in sensitive.iter().enumerate() {
            let (a, b) = count_pair(&current, spec)?;
            initial[idx].get_or_insert((a, b));
            if is_hidden(a, b, theta, threshold) {
                continue;
            }
            let k = hiding_count_from(a, b, theta, threshold);
            let freq = apriori(&current, &params.mining())?;
            let strong = mine_rules(&freq, &current, &params.public_rule_params())?;
            let candidates = current.supporting_tids(&spec.generating_itemset())?;
            let ranked = transaction_priorities(&current, &strong, sensitive, &candidates, weight)?;
            let selected = (k as usize).min(ranked.len());
            let victim = spec
                .antecedent
                .first()
                .ok_or_else(|| Error::Contract("empty antecedent".into()))?;
            for p in &ranked[..selected] {
                current.delete_item(p.tid, victim)?;
                modifications.push(Modification {
                    step: modifications.len() + 1,
                    tid: p.tid,
                    item: victim,
                    rule: spec.clone(),
                });
                touched[idx].push(p.tid);
            }
            steps.push(HidingStep {
                rule_index: idx,
                ranked,
                selected,
            });
            changed |= selected > 0;
        }
        if !changed {
            break;
        }
    }

    let outcomes = sensitive
        .iter()
        .zip(initial)
        .zip(touched)
        .map(|((spec, init), touched)| {
            let (a0, b0) = init.unwrap_or((0, 0));
            let (a1, b1) = count_pair(&current, spec)?;
            Ok(RuleOutcome {
                rule: spec.clone(),
                status: if touched.is_empty() {
                    HidingStatus::AlreadyHidden
                } else {
                    HidingStatus::Hidden
                },
                initial_confidence: ratio_or_none(a0, b0),
                final_confidence: ratio_or_none(a1, b1),
                initial_support: a0,
                final_support: a1,
                touched,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SanitizationResult {
        sanitized: current,
        modifications,
        steps,
        outcomes,
    })
}

/// Re-mines `sanitized` at `(threshold, theta)` and fails if any sensitive
/// rule is still produced.
pub fn verify_hidden(
    sanitized: &TransactionDb,
    sensitive: &[RuleSpec],
    params: &HidingParams,
) -> Result<()> {
    let mining = params.mining();
    let freq = apriori(sanitized, &mining)?;
    let rules = mine_rules(&freq, sanitized, &RuleParams::new(mining, params.theta())?)?;
    match sensitive.iter().find(|s| rules.contains(s)) {
        Some(s) => Err(Error::HidingFailed(format!(
            "{} is still minable",
            s.display(sanitized.dictionary())
        ))),
        None => Ok(()),
    }
}

/// Applies a modification log to `original`.
pub fn replay(original: &TransactionDb, modifications: &[Modification]) -> Result<TransactionDb> {
    let mut db = original.clone();
    for m in modifications {
        db.delete_item(m.tid, m.item)?;
    }
    Ok(db)
}

const LOG_HEADER: &str = "# step\ttid\titem\trule";

/// Tab-separated modification log: `step tid item rule`, one line per
/// deletion, after a `#` header line.
pub fn render_modification_log(dict: &Dictionary, modifications: &[Modification]) -> String {
    let mut out = String::from(LOG_HEADER);
    out.push('\n');
    for m in modifications {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            m.step,
            m.tid,
            dict.name(m.item).unwrap_or("?"),
            m.rule.display(dict)
        ));
    }
    out
}

pub fn parse_modification_log(text: &str, dict: &Dictionary) -> Result<Vec<Modification>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        let [step, tid, item, rule] = fields[..] else {
            return Err(Error::parse(line_no, "expected 4 tab-separated fields"));
        };
        let number = |s: &str, what: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::parse(line_no, format!("bad {what} `{s}`")))
        };
        out.push(Modification {
            step: number(step, "step")?,
            tid: number(tid, "tid")?,
            item: dict
                .id(item)
                .ok_or_else(|| Error::parse(line_no, format!("unknown item `{item}`")))?,
            rule: crate::rules::parse_rule_line(rule, dict)
                .map_err(|m| Error::parse(line_no, m))?,
        });
    }
    Ok(out)
}
