//! Lossless JSON form of simple functions.
//!
//! `{"d": 1, "terms": [{"rect": [["0/2^0", "1/2^0"]], "coeff": "1"}]}`. Endpoints are
//! `"m/2^e"` strings and coefficients `"p/q"` strings, so a round trip reproduces the exact value.

use dashu_ratio::RBig;
use dyadrep_core::{DyadicRational, Rect, SimpleFunction};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TermJson {
    pub rect: Vec<[String; 2]>,
    pub coeff: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SimpleFunctionJson {
    pub d: usize,
    pub terms: Vec<TermJson>,
}

pub fn to_json(f: &SimpleFunction) -> SimpleFunctionJson {
    SimpleFunctionJson {
        d: f.dim(),
        terms: f
            .terms()
            .iter()
            .map(|(r, c)| TermJson {
                rect: r.lo().iter().zip(r.hi()).map(|(lo, hi)| [lo.to_fraction_string(), hi.to_fraction_string()]).collect(),
                coeff: c.to_string(),
            })
            .collect(),
    }
}

pub fn from_json(j: &SimpleFunctionJson) -> anyhow::Result<SimpleFunction> {
    let mut terms = Vec::with_capacity(j.terms.len());
    for t in &j.terms {
        if t.rect.len() != j.d {
            anyhow::bail!("term has {} intervals, expected {}", t.rect.len(), j.d);
        }
        let mut lo = Vec::with_capacity(j.d);
        let mut hi = Vec::with_capacity(j.d);
        for [a, b] in &t.rect {
            lo.push(a.parse::<DyadicRational>()?);
            hi.push(b.parse::<DyadicRational>()?);
        }
        let coeff: RBig = t.coeff.trim().parse().map_err(|e| anyhow::anyhow!("bad coefficient {:?}: {e:?}", t.coeff))?;
        terms.push((Rect::new(lo, hi), coeff));
    }
    Ok(SimpleFunction::try_from_terms(j.d, terms)?)
}

pub fn write_string(f: &SimpleFunction) -> String {
    serde_json::to_string(&to_json(f)).expect("serializable")
}

pub fn read_str(s: &str) -> anyhow::Result<SimpleFunction> {
    from_json(&serde_json::from_str(s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{random_function, Slot};

    #[test]
    fn round_trip_is_exact() {
        for i in 0..20 {
            for d in [1, 2] {
                let f = random_function(5, i, Slot::G, d);
                let back = read_str(&write_string(&f)).unwrap();
                assert_eq!(back.terms(), f.terms());
                assert_eq!(write_string(&back), write_string(&f));
            }
        }
    }

    #[test]
    fn reads_documented_schema() {
        let f = read_str(r#"{"d": 1, "terms": [{"rect": [["0/2^0", "3/2^1"]], "coeff": "-2/3"}]}"#).unwrap();
        assert_eq!(f.terms().len(), 1);
        assert!(read_str(r#"{"d": 2, "terms": [{"rect": [["0/2^0", "1/2^0"]], "coeff": "1"}]}"#).is_err());
    }
}
