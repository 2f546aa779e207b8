//! Sectioned key/value configuration, parsed by a small hand-rolled
//! reader: `[section]` headers, `key = value` lines, `#` comments.
//! Values are whitespace-separated tokens; numeric tokens accept
//! integers, decimals and exact `p/q` rationals.

use crate::error::{Error, Result};
use crate::expsum::{ExactC, ExponentTerm, ExponentTermCollection, PolytopeFamily};
use num::complex::Complex64;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct Document {
    /// section -> key -> raw value string
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Document::default();
        let mut current = String::from("");
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::config(format!("line {}: unterminated section", lineno + 1)))?;
                current = name.trim().to_string();
                doc.sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected key = value", lineno + 1)))?;
            let prev = doc
                .sections
                .entry(current.clone())
                .or_default()
                .insert(key.trim().to_string(), value.trim().to_string());
            if prev.is_some() {
                return Err(Error::config(format!(
                    "line {}: duplicate key {}",
                    lineno + 1,
                    key.trim()
                )));
            }
        }
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key)
            .ok_or_else(|| Error::config(format!("missing [{section}] {key}")))
    }

    pub fn get_f64(&self, section: &str, key: &str) -> Result<Option<f64>> {
        self.get(section, key)
            .map(|s| parse_number(s))
            .transpose()
    }

    pub fn get_u64(&self, section: &str, key: &str) -> Result<Option<u64>> {
        self.get(section, key)
            .map(|s| {
                s.parse::<u64>()
                    .map_err(|e| Error::config(format!("[{section}] {key}: {e}")))
            })
            .transpose()
    }

    pub fn get_list_f64(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(section, key)
            .map(|s| s.split_whitespace().map(parse_number).collect())
            .transpose()
    }

    pub fn section_keys(&self, section: &str) -> Vec<&str> {
        self.sections
            .get(section)
            .map(|m| m.keys().map(|k| k.as_str()).collect())
            .unwrap_or_default()
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }
}

/// Accepts integers, decimals, and exact `p/q` rationals.
pub fn parse_number(token: &str) -> Result<f64> {
    if let Some((num, den)) = token.split_once('/') {
        let n: f64 = num
            .trim()
            .parse()
            .map_err(|e| Error::config(format!("bad rational {token}: {e}")))?;
        let d: f64 = den
            .trim()
            .parse()
            .map_err(|e| Error::config(format!("bad rational {token}: {e}")))?;
        if d == 0.0 {
            return Err(Error::config(format!("zero denominator in {token}")));
        }
        return Ok(n / d);
    }
    token
        .parse()
        .map_err(|e| Error::config(format!("bad number {token}: {e}")))
}

fn parse_exact(token: &str) -> Result<(i64, i64)> {
    if let Some((num, den)) = token.split_once('/') {
        let n: i64 = num
            .trim()
            .parse()
            .map_err(|e| Error::config(format!("bad rational {token}: {e}")))?;
        let d: i64 = den
            .trim()
            .parse()
            .map_err(|e| Error::config(format!("bad rational {token}: {e}")))?;
        if d == 0 {
            return Err(Error::config(format!("zero denominator in {token}")));
        }
        Ok((n, d))
    } else if let Ok(n) = token.parse::<i64>() {
        Ok((n, 1))
    } else {
        Err(Error::config(format!(
            "exact rational expected (integer or p/q): {token}"
        )))
    }
}

/// Reads a term collection and polytope family:
///
/// ```text
/// [collection]
/// dimension = 2
/// terms = 1
/// term.0.re_lambda = -1/2 0
/// term.0.im_lambda_pi_mult = 1/2 0
/// term.0.im_lambda_rem = 0 0
/// term.0.m = 1 0
/// term.0.c_re = 1
/// term.0.c_im = 0
/// [family]
/// directions = 2
/// direction.0 = 1 0
/// direction.1 = 0 1
/// ```
///
/// Real parts may be decimals (converted exactly to rationals); the
/// pi-multiples and remainders must be exact integers or `p/q`.
pub fn read_collection(doc: &Document) -> Result<(ExponentTermCollection, PolytopeFamily)> {
    let dim = doc.require("collection", "dimension")?.parse::<usize>()
        .map_err(|e| Error::config(format!("dimension: {e}")))?;
    let n_terms = doc.require("collection", "terms")?.parse::<usize>()
        .map_err(|e| Error::config(format!("terms: {e}")))?;
    let mut terms = Vec::with_capacity(n_terms);
    for i in 0..n_terms {
        let key = |field: &str| format!("term.{i}.{field}");
        let re: Vec<f64> = doc
            .require("collection", &key("re_lambda"))?
            .split_whitespace()
            .map(parse_number)
            .collect::<Result<_>>()?;
        let pi_mult: Vec<(i64, i64)> = doc
            .require("collection", &key("im_lambda_pi_mult"))?
            .split_whitespace()
            .map(parse_exact)
            .collect::<Result<_>>()?;
        let rem: Vec<(i64, i64)> = doc
            .require("collection", &key("im_lambda_rem"))?
            .split_whitespace()
            .map(parse_exact)
            .collect::<Result<_>>()?;
        let m: Vec<u32> = doc
            .require("collection", &key("m"))?
            .split_whitespace()
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|e| Error::config(format!("m: {e}")))
            })
            .collect::<Result<_>>()?;
        if re.len() != dim || pi_mult.len() != dim || rem.len() != dim || m.len() != dim {
            return Err(Error::config(format!("term {i}: field lengths must equal dimension")));
        }
        let c_re = parse_number(doc.require("collection", &key("c_re"))?)?;
        let c_im = parse_number(doc.require("collection", &key("c_im"))?)?;
        let lambda: Vec<ExactC> = (0..dim)
            .map(|j| {
                let base = ExactC::from_re_f64(re[j])?;
                Ok(base
                    .add(&ExactC::i_pi(pi_mult[j].0, pi_mult[j].1))
                    .add(&ExactC::new(
                        num::rational::BigRational::from_integer(0.into()),
                        num::rational::BigRational::from_integer(0.into()),
                        num::rational::BigRational::new(rem[j].0.into(), rem[j].1.into()),
                    )))
            })
            .collect::<Result<_>>()?;
        terms.push(ExponentTerm::new(Complex64::new(c_re, c_im), lambda, m)?);
    }
    let n_dirs = doc.require("family", "directions")?.parse::<usize>()
        .map_err(|e| Error::config(format!("directions: {e}")))?;
    let mut dirs = Vec::with_capacity(n_dirs);
    for i in 0..n_dirs {
        let v: Vec<f64> = doc
            .require("family", &format!("direction.{i}"))?
            .split_whitespace()
            .map(parse_number)
            .collect::<Result<_>>()?;
        dirs.push(v);
    }
    Ok((
        ExponentTermCollection::new(dim, terms)?,
        PolytopeFamily::new(dim, dirs)?,
    ))
}

/// Parses K-type vector tokens `n:re:im` into (type, amplitude) pairs.
pub fn parse_vector_tokens(raw: &str) -> Result<Vec<(i64, Complex64)>> {
    raw.split_whitespace()
        .map(|tok| {
            let parts: Vec<&str> = tok.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::config(format!("vector token {tok}: want n:re:im")));
            }
            let n: i64 = parts[0]
                .parse()
                .map_err(|e| Error::config(format!("vector token {tok}: {e}")))?;
            Ok((n, Complex64::new(parse_number(parts[1])?, parse_number(parts[2])?)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_basics() {
        let doc = Document::parse(
            "# comment\n[alpha]\nx = 1 2 3\ny = 4/8\n\n[beta]\nname = hello world\n",
        )
        .unwrap();
        assert_eq!(doc.get("alpha", "x"), Some("1 2 3"));
        assert_eq!(doc.get_f64("alpha", "y").unwrap(), Some(0.5));
        assert_eq!(doc.get("beta", "name"), Some("hello world"));
        assert!(doc.get("beta", "missing").is_none());
    }

    #[test]
    fn duplicate_keys_rejected() {
        assert!(Document::parse("[s]\nx = 1\nx = 2\n").is_err());
    }

    #[test]
    fn collection_roundtrip() {
        let text = "\
[collection]
dimension = 1
terms = 2
term.0.re_lambda = 0
term.0.im_lambda_pi_mult = 1/2
term.0.im_lambda_rem = 0
term.0.m = 0
term.0.c_re = 1
term.0.c_im = 0
term.1.re_lambda = 0
term.1.im_lambda_pi_mult = -1/2
term.1.im_lambda_rem = 0
term.1.m = 0
term.1.c_re = 1
term.1.c_im = 0
[family]
directions = 1
direction.0 = 1
";
        let doc = Document::parse(text).unwrap();
        let (coll, fam) = read_collection(&doc).unwrap();
        assert_eq!(coll.terms.len(), 2);
        assert_eq!(fam.dim, 1);
        let p = crate::expsum::predicted_growth_lattice(&coll, &fam).unwrap();
        assert!((p.limit - 2.0).abs() < 1e-9);
    }

    #[test]
    fn vector_tokens() {
        let v = parse_vector_tokens("0:1:0 2:0.5:-0.5").unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[1].0, 2);
        assert!((v[1].1 - Complex64::new(0.5, -0.5)).norm() < 1e-15);
    }
}

