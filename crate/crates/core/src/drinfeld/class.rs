use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fq::FiniteField;
use crate::tower::FieldElement;

/// The torsion point `rho_a(v_n)`, stored as `a mod t^(n*m0)`.
#[derive(Clone, PartialEq, Eq)]
pub struct TorsionClass {
    field: Arc<FiniteField>,
    level: usize,
    m0: u32,
    digits: Vec<u32>,
}

impl fmt::Debug for TorsionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] . v_{}", self.format(), self.level)
    }
}

/// Serialized form used in reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub level: usize,
    pub residue: String,
}

impl TorsionClass {
    pub fn new(field: &Arc<FiniteField>, level: usize, m0: u32, mut digits: Vec<u32>) -> Self {
        digits.resize(level * m0 as usize, 0);
        TorsionClass {
            field: field.clone(),
            level,
            m0,
            digits,
        }
    }

    pub fn zero(field: &Arc<FiniteField>, level: usize, m0: u32) -> Self {
        Self::new(field, level, m0, Vec::new())
    }

    /// Reduces an integral element of `K` modulo `t^(level*m0)`.
    pub fn from_element(x: &FieldElement, level: usize, m0: u32) -> Result<Self> {
        let k = x.field();
        if k.depth() != 1 {
            return Err(Error::Usage("torsion classes come from elements of K".into()));
        }
        let need = (level * m0 as usize) as i64;
        if x.prec() < need {
            return Err(Error::precision(need, x.prec(), "reducing to a torsion class"));
        }
        if let Some(v) = x.int_valuation() {
            if v < 0 {
                return Err(Error::Inconsistency(format!(
                    "value {} is not integral",
                    x.format("t")
                )));
            }
        }
        let digits = (0..need).map(|i| x.repr().coeff(i)).collect();
        Ok(Self::new(k.residue(), level, m0, digits))
    }

    pub fn level(&self) -> usize {
        self.level
    }
    pub fn digits(&self) -> &[u32] {
        &self.digits
    }
    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    fn check(&self, other: &TorsionClass) -> Result<()> {
        if self.level != other.level || self.m0 != other.m0 || *self.field != *other.field {
            return Err(Error::Usage("torsion classes of different levels".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &TorsionClass) -> Result<Self> {
        self.check(other)?;
        let f = &self.field;
        let digits = self
            .digits
            .iter()
            .zip(&other.digits)
            .map(|(&a, &b)| f.add(a, b))
            .collect();
        Ok(Self::new(f, self.level, self.m0, digits))
    }

    pub fn neg(&self) -> Self {
        let f = &self.field;
        let digits = self.digits.iter().map(|&a| f.neg(a)).collect();
        Self::new(f, self.level, self.m0, digits)
    }

    /// `a . class` for `a` in `O_K`, given by its `t`-digits.
    pub fn scale(&self, a: &[u32]) -> Self {
        let f = &self.field;
        let n = self.digits.len();
        let mut out = vec![0u32; n];
        for (i, &ai) in a.iter().enumerate().take(n) {
            if ai == 0 {
                continue;
            }
            for (j, &d) in self.digits.iter().enumerate().take(n - i) {
                out[i + j] = f.add(out[i + j], f.mul(ai, d));
            }
        }
        Self::new(f, self.level, self.m0, out)
    }

    /// `rho_(eta^(level-to))` applied to the point: the class read modulo the lower level.
    pub fn lower(&self, to: usize) -> Result<Self> {
        if to > self.level {
            return Err(Error::Usage("cannot raise the level of a torsion class".into()));
        }
        let digits = self.digits[..to * self.m0 as usize].to_vec();
        Ok(Self::new(&self.field, to, self.m0, digits))
    }

    /// The same torsion point read at level `to`: `c . v_level = (c / eta^(level-to)) . v_to`.
    /// Fails unless `eta^(level-to)` divides `c`.
    pub fn as_level(&self, to: usize) -> Result<Self> {
        if to > self.level {
            return Err(Error::Usage("cannot raise the level of a torsion class".into()));
        }
        let k = (self.level - to) * self.m0 as usize;
        if self.digits[..k].iter().any(|&d| d != 0) {
            return Err(Error::Domain(format!(
                "point {} . v_{} does not lie in W^{to}",
                self.format(),
                self.level
            )));
        }
        Ok(Self::new(&self.field, to, self.m0, self.digits[k..].to_vec()))
    }

    pub fn format(&self) -> String {
        let f = &self.field;
        let terms: Vec<String> = self
            .digits
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != 0)
            .map(|(i, &d)| {
                let c = f.format(d);
                match (i, c.as_str()) {
                    (0, _) => c,
                    (1, "1") => "t".to_string(),
                    (1, _) => format!("{c}*t"),
                    (_, "1") => format!("t^{i}"),
                    _ => format!("{c}*t^{i}"),
                }
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }

    pub fn record(&self) -> ClassRecord {
        ClassRecord {
            level: self.level,
            residue: self.format(),
        }
    }
}
