//! Named constants of the construction and where their values came from.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// User-tunable constants. Unset entries are derived from the others.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    /// Width of the length window around `√ρ`.
    pub c0: f64,
    /// Scale of the center shifts, in units of ρ.
    pub c1: f64,
    pub c6: f64,
    pub c9: Option<f64>,
    pub c10: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            c0: 10.0,
            c1: 1.0,
            c6: 0.1,
            c9: None,
            c10: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Configured,
    Derived,
    Measured,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub value: f64,
    pub source: Source,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantsLedger {
    pub rho: f64,
    pub epsilon: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub d: f64,
    pub d_prime: f64,
    pub constants: BTreeMap<String, LedgerEntry>,
    pub checks: Vec<ConsistencyCheck>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ConstantsLedger {
    pub fn new(c: &Constants, rho: f64, epsilon: f64, m: f64, d: f64, d_prime: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidArgument(format!("rho must lie in (0,1), got {rho}")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon must lie in (0,1), got {epsilon}")));
        }
        if !(m > 1.0 && m.is_finite()) {
            return Err(Error::InvalidArgument(format!("M must exceed 1, got {m}")));
        }
        for (name, v) in [("c0", c.c0), ("c1", c.c1), ("c6", c.c6), ("c10", c.c10)] {
            positive(name, v)?;
        }
        if c.c0 <= 1.0 {
            return Err(Error::InvalidArgument(format!("c0 must exceed 1, got {}", c.c0)));
        }
        let mut ledger = Self {
            rho,
            epsilon,
            m,
            d,
            d_prime,
            constants: BTreeMap::new(),
            checks: Vec::new(),
        };
        ledger.set("c0", c.c0, Source::Configured);
        ledger.set("c1", c.c1, Source::Configured);
        ledger.set("c6", c.c6, Source::Configured);
        ledger.set("c10", c.c10, Source::Configured);
        match c.c9 {
            Some(c9) => {
                positive("c9", c9)?;
                ledger.set("c9", c9, Source::Configured);
            }
            None => {
                // Rectangle masses are |I|^d |I'|^d' and projected lengths
                // are |I| + r|I'|, both pinned by the c0 window.
                let c9 = ((1.0 + m) * c.c0).max(c.c0.powf(d + d_prime));
                ledger.set("c9", c9, Source::Derived);
            }
        }
        let (c6, c9, c10) = (c.c6, ledger.get("c9").unwrap(), c.c10);
        ledger.set("c7", 0.25 * c6 * c10 * epsilon / c9, Source::Derived);
        ledger.set("c8", c6 * c6 * c10 / (24.0 * c9 * c9), Source::Derived);
        let lhs = (1.0 + m) * c6 * c6;
        let rhs = c6 * c10 / (24.0 * c9 * c9);
        ledger.checks.push(ConsistencyCheck {
            name: "(1+M) c6^2 < c6 c9^-2 c10 / 24".into(),
            lhs,
            rhs,
            holds: lhs < rhs,
        });
        Ok(ledger)
    }

    pub fn set(&mut self, name: &str, value: f64, source: Source) {
        self.constants.insert(name.to_string(), LedgerEntry { value, source });
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.constants.get(name).map(|e| e.value)
    }

    fn required(&self, name: &str) -> f64 {
        self.get(name).unwrap_or_else(|| panic!("constant {name} is always set"))
    }

    pub fn c0(&self) -> f64 {
        self.required("c0")
    }

    pub fn c1(&self) -> f64 {
        self.required("c1")
    }

    pub fn c6(&self) -> f64 {
        self.required("c6")
    }

    pub fn c7(&self) -> f64 {
        self.required("c7")
    }

    pub fn c8(&self) -> f64 {
        self.required("c8")
    }

    pub fn c9(&self) -> f64 {
        self.required("c9")
    }

    pub fn c10(&self) -> f64 {
        self.required("c10")
    }

    /// `c6^2 ρ^{-(d+d'-1)/2}`, rounded up, at least one.
    pub fn n_rows(&self) -> usize {
        let n = self.c6() * self.c6() * self.rho.powf(-(self.d + self.d_prime - 1.0) / 2.0);
        (n.ceil() as usize).max(1)
    }

    /// Crowding threshold `c6^-1 ρ^{-(d+d'-1)/2}` for good pairs.
    pub fn crowding_threshold(&self) -> f64 {
        self.rho.powf(-(self.d + self.d_prime - 1.0) / 2.0) / self.c6()
    }

    pub fn consistent(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_chain() {
        let d = 2f64.ln() / 3f64.ln();
        let l = ConstantsLedger::new(&Constants::default(), 3f64.powi(-8), 0.05, 4.0, d, d).unwrap();
        assert_eq!(l.c9(), 50.0);
        assert!((l.c7() - 0.25 * 0.1 * 0.05 / 50.0).abs() < 1e-18);
        assert!((l.c8() - 0.01 / (24.0 * 2500.0)).abs() < 1e-18);
        assert!(!l.consistent());
        assert_eq!(l.n_rows(), 1);
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = Constants::default();
        assert!(ConstantsLedger::new(&c, 1.5, 0.1, 4.0, 0.6, 0.6).is_err());
        assert!(ConstantsLedger::new(&c, 0.01, 0.1, 1.0, 0.6, 0.6).is_err());
        let bad = Constants { c6: -1.0, ..c };
        assert!(ConstantsLedger::new(&bad, 0.01, 0.1, 4.0, 0.6, 0.6).is_err());
    }

    #[test]
    fn small_c6_is_consistent() {
        let c = Constants {
            c6: 1e-7,
            ..Constants::default()
        };
        let l = ConstantsLedger::new(&c, 1e-4, 0.1, 4.0, 0.6, 0.6).unwrap();
        assert!(l.consistent());
    }
}
