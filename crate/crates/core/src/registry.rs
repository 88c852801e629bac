//! Name-keyed registry of strategy objects.
//!
//! Miners and rule weights are trait objects registered under a stable name
//! so the CLI (or a config file) can select them at runtime.

use crate::error::{Error, Result};

pub trait Named {
    fn name(&self) -> &'static str;
}

pub struct Registry<S: ?Sized + Named> {
    kind: &'static str,
    entries: Vec<Box<S>>,
}

impl<S: ?Sized + Named> Registry<S> {
    pub fn empty(kind: &'static str) -> Self {
        Registry {
            kind,
            entries: Vec::new(),
        }
    }

    /// Registers `strategy`, replacing any entry with the same name.
    pub fn register(&mut self, strategy: Box<S>) {
        match self
            .entries
            .iter()
            .position(|e| e.name() == strategy.name())
        {
            Some(i) => self.entries[i] = strategy,
            None => self.entries.push(strategy),
        }
    }

    pub fn get(&self, name: &str) -> Result<&S> {
        self.entries
            .iter()
            .find(|e| e.name() == name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_owned(),
                available: self.names().join(", "),
            })
    }

    /// Registration order.
    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }
}
