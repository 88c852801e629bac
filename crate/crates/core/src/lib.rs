//! Frequent itemset mining, association rule mining and distortion-based
//! hiding of sensitive association rules.
//!
//! The pipeline has four stages, each in its own module:
//!
//! * [`store`]: the transaction database, the basket file format and the
//!   item-deletion primitive used by sanitization.
//! * [`mining`]: level-wise Apriori with join/prune candidate generation,
//!   plus an exhaustive oracle. Both are [`mining::FrequentMiner`]s and can
//!   be looked up by name in a [`mining::MinerRegistry`].
//! * [`rules`]: association rules `X -> Y` with exact rational confidence.
//! * [`hiding`]: weight-based sorting distortion. Candidate transactions are
//!   ranked by how many strong non-sensitive rules they support, and the
//!   lowest-ranked ones lose an antecedent item until every sensitive rule
//!   falls below the hiding threshold. Rule weights are pluggable
//!   ([`hiding::RuleWeight`], [`hiding::WeightRegistry`]).
//! * [`report`]: side effects of a sanitization (hidden, lost and new rules).
//!
//! ```
//! use rulehide::hiding::{sanitize, HidingParams};
//! use rulehide::mining::MinSupport;
//! use rulehide::ratio::Ratio;
//! use rulehide::rules::parse_rules_file;
//! use rulehide::store::parse_basket;
//!
//! let db = parse_basket("A B C\nA B\nA C\nB C\nA B C\n").unwrap();
//! let sensitive = parse_rules_file("A -> B\n", &db).unwrap();
//! let params = HidingParams::new(MinSupport::Count(2), Ratio::new(7, 10), Ratio::from_integer(0)).unwrap();
//! let result = sanitize(&db, &sensitive, &params).unwrap();
//! assert_eq!(result.modifications.len(), 1);
//! ```

pub mod cli;
pub mod error;
pub mod hiding;
pub mod mining;
pub mod ratio;
pub mod registry;
pub mod report;
pub mod rules;
pub mod store;

pub use error::{Error, Result};
