//! The line-oriented bundle definition format.
//!
//! ```text
//! # the trivial line bundle
//! name        = trivial_line
//! base_dim    = 1
//! total_dim   = 2
//! coords      = x, a          # optional names for the coordinates of E
//! base_coords = m             # optional names for the coordinates of M
//! q           = x
//! xi          = m, 0
//! lambda      = x, 0, 0, a
//! add         = x, a + a_     # second summand: names with a trailing `_`
//! scalar      = x, r*a        # the scalar is `r`
//! negate      = x, -a
//! total_box   = -2..2, -1..1  # one range per coordinate, or one for all
//! samples     = 200
//! ```
//!
//! Every line is `key = value`; `#` starts a comment. Maps are
//! comma-separated expressions. Positional names `x0, x1, ...` are always
//! accepted. Keys may appear once; unknown keys are rejected.

use std::collections::HashMap;

use crate::bundle::BundleSpec;
use crate::error::{Error, Result};
use crate::expr::{parse_map_with, SampleBox, SmoothMap, VarNames};

/// Everything a bundle file can set.
#[derive(Clone, Debug)]
pub struct BundleFile {
    pub spec: BundleSpec,
    pub suite: Option<String>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub depth: Option<usize>,
}

const KEYS: [&str; 18] = [
    "name",
    "base_dim",
    "total_dim",
    "coords",
    "base_coords",
    "q",
    "xi",
    "lambda",
    "add",
    "scalar",
    "negate",
    "base_box",
    "total_box",
    "suite",
    "samples",
    "tol",
    "seed",
    "depth",
];

struct Entry {
    line: usize,
    column: usize,
    value: String,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::BundleFile {
        line,
        message: message.into(),
    }
}

fn entries(text: &str) -> Result<HashMap<String, Entry>> {
    let mut out: HashMap<String, Entry> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            return Err(err(line, "expected `key = value`"));
        };
        let key = content[..eq].trim();
        if !KEYS.contains(&key) {
            return Err(err(line, format!("unknown key `{key}`")));
        }
        if let Some(prev) = out.get(key) {
            return Err(err(line, format!("`{key}` already set on line {}", prev.line)));
        }
        let after = &content[eq + 1..];
        let lead = after.len() - after.trim_start().len();
        let column = content[..eq + 1 + lead].chars().count() + 1;
        out.insert(
            key.to_string(),
            Entry {
                line,
                column,
                value: after.trim().to_string(),
            },
        );
    }
    Ok(out)
}

fn number<T: std::str::FromStr>(e: &Entry, what: &str) -> Result<T> {
    e.value.parse().map_err(|_| err(e.line, format!("{what} must be a number, got `{}`", e.value)))
}

fn names(e: Option<&Entry>, n: usize, what: &str) -> Result<Option<Vec<String>>> {
    let Some(e) = e else { return Ok(None) };
    let list: Vec<String> = e.value.split(',').map(|s| s.trim().to_string()).collect();
    if list.len() != n {
        return Err(err(e.line, format!("{what} needs {n} names, found {}", list.len())));
    }
    if let Some(bad) = list.iter().find(|s| s.is_empty() || !s.chars().all(|c| c.is_alphanumeric() || c == '_') || s.starts_with(|c: char| c.is_ascii_digit())) {
        return Err(err(e.line, format!("`{bad}` is not a valid name")));
    }
    Ok(Some(list))
}

fn range_box(e: &Entry, dim: usize) -> Result<SampleBox> {
    let parts: Vec<&str> = e.value.split(',').map(str::trim).collect();
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for p in &parts {
        let Some((a, b)) = p.split_once("..") else {
            return Err(err(e.line, format!("expected `lo..hi`, got `{p}`")));
        };
        let (Ok(a), Ok(b)) = (a.trim().parse::<f64>(), b.trim().parse::<f64>()) else {
            return Err(err(e.line, format!("bad range `{p}`")));
        };
        if !(a < b) {
            return Err(err(e.line, format!("empty range `{p}`")));
        }
        lo.push(a);
        hi.push(b);
    }
    if parts.len() == 1 && dim > 1 {
        lo = vec![lo[0]; dim];
        hi = vec![hi[0]; dim];
    }
    if lo.len() != dim {
        return Err(err(e.line, format!("expected {dim} ranges, found {}", lo.len())));
    }
    Ok(SampleBox::new(lo, hi))
}

fn parse_entry(e: &Entry, vars: &VarNames, coarity: usize, what: &str) -> Result<SmoothMap> {
    parse_map_with(&e.value, vars, Some(coarity), (e.line, e.column)).map_err(|x| err(e.line, format!("{what}: {x}")))
}

/// Parse a bundle file.
pub fn parse_bundle_file(text: &str) -> Result<BundleFile> {
    let map = entries(text)?;
    let last_line = text.lines().count().max(1);
    let need = |key: &str| map.get(key).ok_or_else(|| err(last_line, format!("missing required key `{key}`")));
    let name = need("name")?.value.clone();
    let k: usize = number(need("base_dim")?, "base_dim")?;
    let d: usize = number(need("total_dim")?, "total_dim")?;
    if k == 0 || d < k {
        return Err(err(need("total_dim")?.line, "need 0 < base_dim <= total_dim"));
    }
    let coords = names(map.get("coords"), d, "coords")?;
    let base_coords = names(map.get("base_coords"), k, "base_coords")?;
    let e_names = coords.clone().map_or_else(|| VarNames::positional(d), |c| VarNames::named(&c));
    let m_names = base_coords.map_or_else(|| VarNames::positional(k), |c| VarNames::named(&c));
    let pair_names = match &coords {
        Some(c) => {
            let both: Vec<String> = c.iter().cloned().chain(c.iter().map(|s| format!("{s}_"))).collect();
            VarNames::named(&both)
        }
        None => VarNames::positional(2 * d),
    };
    let scalar_names = match &coords {
        Some(c) => VarNames::named(&std::iter::once("r".to_string()).chain(c.iter().cloned()).collect::<Vec<_>>()),
        None => VarNames::positional(1 + d).alias("r", 0),
    };

    let q = parse_entry(need("q")?, &e_names, k, "q")?;
    let xi = parse_entry(need("xi")?, &m_names, d, "xi")?;
    let lambda = parse_entry(need("lambda")?, &e_names, 2 * d, "lambda")?;
    let lambda_line = need("lambda")?.line;
    let mut spec = BundleSpec::new(&name, k, d, q, xi, lambda).map_err(|e| err(lambda_line, e.to_string()))?;
    if let Some(e) = map.get("add") {
        spec = spec.with_add(parse_entry(e, &pair_names, d, "add")?).map_err(|x| err(e.line, x.to_string()))?;
    }
    if let Some(e) = map.get("scalar") {
        spec = spec.with_scalar(parse_entry(e, &scalar_names, d, "scalar")?).map_err(|x| err(e.line, x.to_string()))?;
    }
    if let Some(e) = map.get("negate") {
        spec = spec.with_negate(parse_entry(e, &e_names, d, "negate")?).map_err(|x| err(e.line, x.to_string()))?;
    }
    if map.contains_key("base_box") || map.contains_key("total_box") {
        let bb = match map.get("base_box") {
            Some(e) => range_box(e, k)?,
            None => spec.base_box.clone(),
        };
        let tb = match map.get("total_box") {
            Some(e) => range_box(e, d)?,
            None => spec.total_box.clone(),
        };
        spec = spec.with_boxes(bb, tb).map_err(|x| err(last_line, x.to_string()))?;
    }
    let opt = |key: &str| map.get(key);
    Ok(BundleFile {
        spec,
        suite: opt("suite").map(|e| e.value.clone()),
        samples: opt("samples").map(|e| number(e, "samples")).transpose()?,
        tol: opt("tol").map(|e| number(e, "tol")).transpose()?,
        seed: opt("seed").map(|e| number(e, "seed")).transpose()?,
        depth: opt("depth").map(|e| number(e, "depth")).transpose()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetMap;

    const LINE: &str = "\
# the trivial line bundle
name = line
base_dim = 1
total_dim = 2
coords = x, a
base_coords = m
q = x
xi = m, 0
lambda = x, 0, 0, a
add = x, a + a_
scalar = x, r*a
";

    #[test]
    fn parses_named_coordinates() {
        let f = parse_bundle_file(LINE).unwrap();
        assert_eq!(f.spec.name, "line");
        assert_eq!(f.spec.lambda.to_string(), "(x0, 0, 0, x1)");
        let add = f.spec.add.unwrap();
        assert_eq!(JetMap::eval(&add, &[1.0, 2.0, 1.0, 3.0]).unwrap(), vec![1.0, 5.0]);
        let s = f.spec.scalar.unwrap();
        assert_eq!(JetMap::eval(&s, &[2.0, 1.0, 3.0]).unwrap(), vec![1.0, 6.0]);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let e = parse_bundle_file(&format!("{LINE}colour = red\n")).unwrap_err();
        assert_eq!(e, Error::BundleFile { line: 12, message: "unknown key `colour`".into() });
        let e = parse_bundle_file(&format!("{LINE}q = a\n")).unwrap_err();
        assert!(matches!(e, Error::BundleFile { line: 12, .. }), "{e}");
    }

    #[test]
    fn expression_errors_carry_the_line() {
        let text = LINE.replace("lambda = x, 0, 0, a", "lambda = x, 0, 0, b");
        let e = parse_bundle_file(&text).unwrap_err();
        assert!(matches!(e, Error::BundleFile { line: 9, .. }), "{e}");
        let text = LINE.replace("q = x", "q = x, a");
        assert!(matches!(parse_bundle_file(&text).unwrap_err(), Error::BundleFile { line: 7, .. }));
    }

    #[test]
    fn boxes_and_overrides() {
        let text = format!("{LINE}total_box = -1..1\nbase_box = -1..1\nsamples = 50\ndepth = 1\n");
        let f = parse_bundle_file(&text).unwrap();
        assert_eq!(f.spec.total_box.lo, vec![-1.0, -1.0]);
        assert_eq!(f.samples, Some(50));
        assert_eq!(f.depth, Some(1));
        assert!(parse_bundle_file(&format!("{LINE}total_box = 1..0\n")).is_err());
    }
}
