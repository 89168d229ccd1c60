//! Process-wide symbol interning.
//!
//! Symbols compare equal by identity but order by their text, so any
//! collection sorted by symbol iterates in name order no matter which thread
//! interned what first.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

#[derive(Default)]
struct Interner {
    ids: HashMap<&'static str, u32>,
    names: Vec<&'static str>,
}

fn interner() -> &'static RwLock<Interner> {
    static INTERNER: OnceLock<RwLock<Interner>> = OnceLock::new();
    INTERNER.get_or_init(Default::default)
}

/// An interned name: a constant, predicate, concept or rule id.
#[derive(Clone, Copy)]
pub struct Symbol {
    id: u32,
    text: &'static str,
}

impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Symbol {}

impl std::hash::Hash for Symbol {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

impl Symbol {
    pub fn intern(name: &str) -> Symbol {
        if let Some((&text, &id)) = interner().read().unwrap().ids.get_key_value(name) {
            return Symbol { id, text };
        }
        let mut table = interner().write().unwrap();
        if let Some((&text, &id)) = table.ids.get_key_value(name) {
            return Symbol { id, text };
        }
        let leaked: &'static str = Box::leak(name.to_owned().into_boxed_str());
        let id = table.names.len() as u32;
        table.names.push(leaked);
        table.ids.insert(leaked, id);
        Symbol { id, text: leaked }
    }

    pub fn as_str(self) -> &'static str {
        self.text
    }

    /// Raw interner index; stable only within one process.
    pub fn index(self) -> u32 {
        self.id
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.id == other.id {
            Ordering::Equal
        } else {
            self.as_str().cmp(other.as_str())
        }
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::intern(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_idempotent() {
        let a = Symbol::intern("alpha-sym");
        let b = Symbol::intern("alpha-sym");
        assert_eq!(a, b);
        assert_eq!(a.as_str(), "alpha-sym");
    }

    #[test]
    fn ordering_follows_text() {
        let z = Symbol::intern("zz-order");
        let a = Symbol::intern("aa-order");
        assert!(a < z);
    }
}
