//! JSON form of [`ObliviousSpec`].
//!
//! ```json
//! {
//!   "dimension": 1,
//!   "floor": [1],
//!   "pieces": [{ "gradient": ["0"], "period": 1, "offsets": { "0": "1" } }],
//!   "restrictions": [
//!     { "axis": 1, "value": 0,
//!       "spec": { "dimension": 1, "floor": [0],
//!                 "pieces": [{ "gradient": ["0"], "period": 1, "offsets": { "0": "0" } }],
//!                 "restrictions": [] } }
//!   ]
//! }
//! ```
//!
//! Axes are 1-based. Offsets map every class `a1,...,ad` in `[0, period)^d`
//! to a rational; the table must be total.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_path_to_error::{Path, Segment};

use super::quilt::{Classes, QuiltAffine};
use super::spec::{ObliviousSpec, Restriction};
use super::FuncError;
use crate::rational::Rational;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    dimension: usize,
    floor: Vec<u64>,
    pieces: Vec<PieceFile>,
    #[serde(default)]
    restrictions: Vec<RestrictionFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PieceFile {
    gradient: Vec<Rational>,
    period: u64,
    offsets: BTreeMap<String, Rational>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RestrictionFile {
    axis: usize,
    value: u64,
    spec: SpecFile,
}

/// Parse a spec document, reporting errors with a JSON pointer.
pub fn spec_from_json(text: &str) -> Result<ObliviousSpec, FuncError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: SpecFile = serde_path_to_error::deserialize(de).map_err(|e| FuncError::Schema {
        pointer: pointer(e.path()),
        message: e.inner().to_string(),
    })?;
    let (floor, pieces, restrictions) = convert(&file, "")?;
    ObliviousSpec::new(file.dimension, floor, pieces, restrictions)
}

pub fn spec_to_json(spec: &ObliviousSpec) -> String {
    let mut s = serde_json::to_string_pretty(&to_file(spec)).expect("plain data serializes");
    s.push('\n');
    s
}

fn pointer(path: &Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

type Parts = (Vec<u64>, Vec<QuiltAffine>, Vec<Restriction>);

fn convert(file: &SpecFile, at: &str) -> Result<Parts, FuncError> {
    let schema = |ptr: String, message: String| FuncError::Schema {
        pointer: ptr,
        message,
    };
    let d = file.dimension;
    if file.floor.len() != d {
        return Err(schema(
            format!("{at}/floor"),
            format!("expected {d} entries, found {}", file.floor.len()),
        ));
    }
    let mut pieces = Vec::with_capacity(file.pieces.len());
    for (k, p) in file.pieces.iter().enumerate() {
        let here = format!("{at}/pieces/{k}");
        if p.gradient.len() != d {
            return Err(schema(
                format!("{here}/gradient"),
                format!("expected {d} entries, found {}", p.gradient.len()),
            ));
        }
        if p.period == 0 {
            return Err(schema(format!("{here}/period"), "period must be positive".into()));
        }
        let mut table = Vec::with_capacity(p.offsets.len());
        for class in Classes::new(d, p.period) {
            let key = class_key(&class);
            match p.offsets.get(&key) {
                Some(v) => table.push(*v),
                None => {
                    return Err(schema(
                        format!("{here}/offsets"),
                        format!("missing class `{key}`"),
                    ))
                }
            }
        }
        if table.len() != p.offsets.len() {
            let stray = p
                .offsets
                .keys()
                .find(|k| parse_key(k, d, p.period).is_none())
                .cloned()
                .unwrap_or_default();
            return Err(schema(
                format!("{here}/offsets/{stray}"),
                "not a class of the period".into(),
            ));
        }
        let q = QuiltAffine::new(p.gradient.clone(), p.period, table)
            .map_err(|e| schema(here.clone(), e.to_string()))?;
        pieces.push(q);
    }
    let mut restrictions = Vec::with_capacity(file.restrictions.len());
    for (k, r) in file.restrictions.iter().enumerate() {
        let here = format!("{at}/restrictions/{k}");
        if r.axis == 0 || r.axis > d {
            return Err(schema(format!("{here}/axis"), format!("axis must be in 1..={d}")));
        }
        if r.spec.dimension != d {
            return Err(schema(
                format!("{here}/spec/dimension"),
                format!("nested spec must keep dimension {d}"),
            ));
        }
        let (floor, pieces, nested) = convert(&r.spec, &format!("{here}/spec"))?;
        restrictions.push(Restriction {
            axis: r.axis - 1,
            value: r.value,
            spec: ObliviousSpec::nested(d, floor, pieces, nested),
        });
    }
    Ok((file.floor.clone(), pieces, restrictions))
}

fn class_key(class: &[u64]) -> String {
    class.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

fn parse_key(key: &str, d: usize, period: u64) -> Option<Vec<u64>> {
    let parts: Vec<u64> = if key.is_empty() {
        Vec::new()
    } else {
        key.split(',')
            .map(|s| s.trim().parse().ok())
            .collect::<Option<_>>()?
    };
    (parts.len() == d && parts.iter().all(|&a| a < period)).then_some(parts)
}

fn to_file(spec: &ObliviousSpec) -> SpecFile {
    SpecFile {
        dimension: spec.dimension(),
        floor: spec.floor().to_vec(),
        pieces: spec
            .pieces()
            .iter()
            .map(|p| PieceFile {
                gradient: p.gradient().to_vec(),
                period: p.period(),
                offsets: p
                    .classes()
                    .zip(p.offsets())
                    .map(|(c, v)| (class_key(&c), *v))
                    .collect(),
            })
            .collect(),
        restrictions: spec
            .restrictions()
            .iter()
            .map(|r| RestrictionFile {
                axis: r.axis + 1,
                value: r.value,
                spec: to_file(&r.spec),
            })
            .collect(),
    }
}
