//! Memoized computable functions `ℕ → ℕ`.
//!
//! Moduli of local connectivity and of continuity are total functions on
//! precision levels.  They are produced either from explicit tables and
//! formulas or from searches that may exhaust an enumeration budget, so the
//! evaluation rule is fallible; successful values are cached and every later
//! call returns the same answer.

use std::collections::BTreeMap;

use crate::error::Result;

/// A memoized fallible function `u32 → u32`.
///
/// The rule is consulted at most once per argument; afterwards evaluation is
/// a pure lookup, so a `MemoFn` behaves deterministically even when the rule
/// is backed by an expensive search.
pub struct MemoFn {
    memo: BTreeMap<u32, u32>,
    rule: Box<dyn FnMut(u32) -> Result<u32> + Send>,
}

impl std::fmt::Debug for MemoFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MemoFn").field("memo", &self.memo).finish_non_exhaustive()
    }
}

impl MemoFn {
    /// Wraps an evaluation rule.
    pub fn new(rule: impl FnMut(u32) -> Result<u32> + Send + 'static) -> Self {
        MemoFn { memo: BTreeMap::new(), rule: Box::new(rule) }
    }

    /// A function given by an infallible closed form.
    pub fn from_formula(f: impl Fn(u32) -> u32 + Send + 'static) -> Self {
        Self::new(move |k| Ok(f(k)))
    }

    /// The identity function `k ↦ k`.
    pub fn identity() -> Self {
        Self::from_formula(|k| k)
    }

    /// A function pinned on an initial segment by `table`, extended beyond it
    /// by `table[last] + (k − last)`.  Panics on an empty table.
    pub fn from_table(table: Vec<u32>) -> Self {
        assert!(!table.is_empty(), "table must be nonempty");
        Self::from_formula(move |k| {
            let last = (table.len() - 1) as u32;
            if k <= last {
                table[k as usize]
            } else {
                table[last as usize] + (k - last)
            }
        })
    }

    /// Evaluates at `k`, consulting the rule on a miss.
    pub fn eval(&mut self, k: u32) -> Result<u32> {
        if let Some(&v) = self.memo.get(&k) {
            return Ok(v);
        }
        let v = (self.rule)(k)?;
        self.memo.insert(k, v);
        Ok(v)
    }

    /// Largest argument with `eval(m) ≤ bound`, scanning from `0`; `None` when
    /// even `eval(0)` exceeds the bound.  Requires the function to be
    /// nondecreasing, which every modulus in this crate is.
    pub fn last_arg_with_value_at_most(&mut self, bound: u32) -> Result<Option<u32>> {
        let mut best = None;
        let mut m = 0;
        loop {
            let v = self.eval(m)?;
            if v > bound {
                return Ok(best);
            }
            best = Some(m);
            if m == u32::MAX {
                return Ok(best);
            }
            m += 1;
        }
    }
}

/// Rewraps `f` so that `g(k) = max(f(0), …, f(k), k)`.  The result is a
/// nondecreasing majorant of both `f` and the identity, which is the
/// normal form every modulus is kept in.
pub fn monotonized(mut f: MemoFn) -> MemoFn {
    let mut running: Vec<u32> = Vec::new();
    MemoFn::new(move |k| {
        while running.len() <= k as usize {
            let i = running.len() as u32;
            let fi = f.eval(i)?;
            let prev = running.last().copied().unwrap_or(0);
            running.push(fi.max(i).max(prev));
        }
        Ok(running[k as usize])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn memoizes_and_is_stable() {
        let mut calls = 0u32;
        let mut f = MemoFn::new(move |k| {
            calls += 1;
            if calls > 3 {
                Err(Error::BudgetExhausted { stage: "test" })
            } else {
                Ok(2 * k)
            }
        });
        assert_eq!(f.eval(5).unwrap(), 10);
        assert_eq!(f.eval(5).unwrap(), 10);
        assert_eq!(f.eval(1).unwrap(), 2);
        assert_eq!(f.eval(2).unwrap(), 4);
        // Fourth distinct argument would hit the budget.
        assert!(matches!(f.eval(3), Err(Error::BudgetExhausted { .. })));
    }

    #[test]
    fn table_extension() {
        let mut f = MemoFn::from_table(vec![2, 2, 5]);
        assert_eq!(f.eval(0).unwrap(), 2);
        assert_eq!(f.eval(2).unwrap(), 5);
        assert_eq!(f.eval(3).unwrap(), 6);
        assert_eq!(f.eval(10).unwrap(), 13);
    }

    #[test]
    fn monotonized_majorizes() {
        let f = MemoFn::from_formula(|k| if k == 1 { 7 } else { 0 });
        let mut g = monotonized(f);
        assert_eq!(g.eval(0).unwrap(), 0);
        assert_eq!(g.eval(1).unwrap(), 7);
        assert_eq!(g.eval(2).unwrap(), 7);
        assert_eq!(g.eval(8).unwrap(), 8);
    }

    #[test]
    fn last_arg_search() {
        let mut f = MemoFn::from_formula(|k| 3 * k);
        assert_eq!(f.last_arg_with_value_at_most(10).unwrap(), Some(3));
        let mut g = MemoFn::from_formula(|k| k + 5);
        assert_eq!(g.last_arg_with_value_at_most(4).unwrap(), None);
    }
}
