//! Default tolerances, keyed by check id.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULTS: &[(&str, f64)] = &[
    ("group-associativity", 0.0),
    ("group-identity", 0.0),
    ("group-inverse", 0.0),
    ("norm-homogeneity", 1e-12),
    ("left-invariance", 1e-12),
    ("volume-slope", 0.05),
    ("commutators", 1e-10),
    ("commutators-symbolic", 0.0),
    ("jets-agreement", 1e-6),
    ("fd-slope", 0.5),
    ("amplitude-constancy", 1e-8),
    ("amplitude-closed-form", 1e-10),
    ("bubble-residual", 1e-8),
    ("family-closure", 1e-8),
    ("pde-gate", 1e-7),
    ("gate-negative", 0.0),
    ("divergence-identity", 1e-6),
    ("m-vanishes", 1e-8),
    ("m-nonnegative", 0.0),
    ("g-modulus", 1e-12),
    ("gbar-expansion", 1e-8),
    ("gradient-relations", 1e-8),
    ("trick", 1e-12),
    ("p1", 1e-8),
    ("p2", 1e-8),
    ("stima-efg", 1e-8),
    ("p1-generic", 1e-8),
    ("p2-generic", 1e-8),
    ("stima-efg-generic", 1e-8),
    ("bochner", 1e-8),
    ("bochner-identity", 1e-9),
    ("bochner-from-identity", 1e-8),
    ("dt-identity", 1e-6),
    ("gradient-estimate", 4.0),
    ("gradient-global", 1e6),
    ("lower-bound", 4.0),
    ("decay", 4.0),
    ("cutoff", 1e-12),
    ("quadrature", 3.0),
    ("lemma-pipeline", 3.0),
    ("euclidean-residual", 1e-8),
    ("determinism", 0.0),
];

/// Tolerance table. Ids may carry a bracketed qualifier such as
/// `trick[beta=0.1]`; lookups fall back to the bare id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tolerances {
    map: BTreeMap<String, f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            map: DEFAULTS.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

fn bare(id: &str) -> &str {
    id.split('[').next().unwrap_or(id)
}

impl Tolerances {
    pub fn get(&self, id: &str) -> f64 {
        if let Some(v) = self.map.get(id) {
            return *v;
        }
        match self.map.get(bare(id)) {
            Some(v) => *v,
            None => panic!("no tolerance registered for check '{id}'"),
        }
    }

    pub fn contains(&self, id: &str) -> bool {
        self.map.contains_key(id) || self.map.contains_key(bare(id))
    }

    /// Override one entry. Overrides must name a known check and be positive.
    pub fn set(&mut self, id: &str, v: f64) -> Result<()> {
        if !self.contains(id) {
            return Err(Error::Config(format!("unknown check id '{id}'")));
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config(format!(
                "tolerance for '{id}' must be positive, got {v}"
            )));
        }
        self.map.insert(id.to_string(), v);
        Ok(())
    }

    /// Parse `check=value`.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (k, v) = spec
            .rsplit_once('=')
            .ok_or_else(|| Error::Config(format!("expected check=value, got '{spec}'")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad tolerance value in '{spec}'")))?;
        self.set(k.trim(), v)
    }

    pub fn entries(&self) -> &BTreeMap<String, f64> {
        &self.map
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qualified_ids_fall_back() {
        let t = Tolerances::default();
        assert_eq!(t.get("trick[beta=0.5]"), 1e-12);
    }

    #[test]
    fn overrides_are_validated() {
        let mut t = Tolerances::default();
        t.apply_override("bochner=1e-6").unwrap();
        assert_eq!(t.get("bochner"), 1e-6);
        assert!(t.apply_override("bochner=-1").is_err());
        assert!(t.apply_override("nope=1").is_err());
        assert!(t.apply_override("bochner").is_err());
    }
}
