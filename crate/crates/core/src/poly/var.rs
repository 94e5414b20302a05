//! Process-wide registry of indeterminate names.
//!
//! The first four slots are the operator variables `d` (∂), `l` (λ), `m` (μ)
//! and `n` (ν); the built-in parameters `a`, `b`, `c`, `cinv` follow. Any
//! other identifier met by the parser is registered as a new parameter.
//! Exponent vectors are indexed by slot, so registering a name never changes
//! the meaning of an existing polynomial.

use std::fmt;
use std::sync::{LazyLock, RwLock};

static REGISTRY: LazyLock<RwLock<Vec<String>>> = LazyLock::new(|| {
    RwLock::new(
        ["d", "l", "m", "n", "a", "b", "c", "cinv"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    )
});

/// Number of operator variables (∂, λ, μ, ν) at the head of the registry.
const OPERATOR_SLOTS: u16 = 4;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(u16);

impl Var {
    /// ∂
    pub const D: Var = Var(0);
    /// λ
    pub const L: Var = Var(1);
    /// μ
    pub const M: Var = Var(2);
    /// ν
    pub const N: Var = Var(3);
    pub const A: Var = Var(4);
    pub const B: Var = Var(5);
    pub const C: Var = Var(6);
    /// Formal inverse of `c`; products reduce with `c * cinv = 1`.
    pub const CINV: Var = Var(7);

    /// Returns the variable called `name`, registering it as a parameter if
    /// it is not known yet.
    pub fn named(name: &str) -> Var {
        if let Some(v) = Var::lookup(name) {
            return v;
        }
        let mut reg = REGISTRY.write().expect("variable registry poisoned");
        if let Some(pos) = reg.iter().position(|n| n == name) {
            return Var(pos as u16);
        }
        assert!(reg.len() < u16::MAX as usize, "variable registry full");
        reg.push(name.to_string());
        Var((reg.len() - 1) as u16)
    }

    pub fn lookup(name: &str) -> Option<Var> {
        let reg = REGISTRY.read().expect("variable registry poisoned");
        reg.iter().position(|n| n == name).map(|p| Var(p as u16))
    }

    pub fn name(self) -> String {
        let reg = REGISTRY.read().expect("variable registry poisoned");
        reg[self.0 as usize].clone()
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(idx: usize) -> Var {
        Var(idx as u16)
    }

    /// ∂, λ, μ and ν are operator variables; everything else is a parameter.
    pub fn is_operator(self) -> bool {
        self.0 < OPERATOR_SLOTS
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_slots() {
        assert_eq!(Var::lookup("d"), Some(Var::D));
        assert_eq!(Var::lookup("cinv"), Some(Var::CINV));
        assert!(Var::L.is_operator());
        assert!(!Var::A.is_operator());
    }

    #[test]
    fn registering_is_idempotent() {
        let x = Var::named("kappa_test");
        assert_eq!(Var::named("kappa_test"), x);
        assert_eq!(x.name(), "kappa_test");
        assert!(!x.is_operator());
    }
}
