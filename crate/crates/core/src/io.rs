//! JSON and CSV formats for points, registries, measures and reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{fmt_q, parse_q, GenSource, Registry, SymbolicPoint};
use crate::measure::{fmt_big, parse_big, Atom, Coverage, PointMeasure, TailModel, Weight, WindowStats};

/// Serde adapter writing a rational as `"p/q"` (decimals accepted on input).
pub mod q_string {
    use super::*;
    use crate::exactnum::Q;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointJson {
    pub rat: String,
    #[serde(default)]
    pub coeffs: BTreeMap<String, String>,
}

pub fn point_to_json(p: &SymbolicPoint, reg: &Registry) -> Result<PointJson> {
    let mut coeffs = BTreeMap::new();
    for (g, c) in p.coeffs() {
        coeffs.insert(reg.name(*g)?, fmt_q(c));
    }
    Ok(PointJson {
        rat: fmt_q(&p.rat()),
        coeffs,
    })
}

pub fn point_from_json(j: &PointJson, reg: &Registry) -> Result<SymbolicPoint> {
    let terms = j
        .coeffs
        .iter()
        .map(|(n, c)| Ok((reg.lookup(n)?, parse_q(c)?)))
        .collect::<Result<Vec<_>>>()?;
    SymbolicPoint::new(parse_q(&j.rat)?, terms)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceJson {
    Literal,
    Sqrt {
        radicand: u64,
        scale: String,
        offset: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorJson {
    pub name: String,
    pub value: String,
    pub provenance: String,
    pub source: SourceJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegistryJson {
    pub stored_digits: u32,
    pub generators: Vec<GeneratorJson>,
}

pub fn registry_to_json(reg: &Registry) -> RegistryJson {
    RegistryJson {
        stored_digits: reg.stored_digits(),
        generators: reg
            .entries()
            .iter()
            .map(|e| GeneratorJson {
                name: e.name.clone(),
                value: e.decimal.clone(),
                provenance: e.provenance.clone(),
                source: match &e.source {
                    GenSource::Literal => SourceJson::Literal,
                    GenSource::Sqrt { radicand, scale, offset } => SourceJson::Sqrt {
                        radicand: *radicand,
                        scale: fmt_big(scale),
                        offset: offset.to_string(),
                    },
                },
            })
            .collect(),
    }
}

/// Rebuild a registry; sqrt sources are re-derived and checked against the stored digits.
pub fn registry_from_json(j: &RegistryJson) -> Result<Registry> {
    let reg = Registry::with_digits(j.stored_digits.max(30));
    for g in &j.generators {
        match &g.source {
            SourceJson::Literal => {
                reg.add_literal(&g.name, &g.value, &g.provenance)?;
            }
            SourceJson::Sqrt { radicand, scale, offset } => {
                let scale: BigRational = parse_big(scale)
                    .ok_or_else(|| Error::Parse(format!("bad scale for `{}`", g.name)))?;
                let offset: BigInt = offset
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad offset for `{}`", g.name)))?;
                let id = reg.add_sqrt(&g.name, *radicand, scale, offset, &g.provenance)?;
                if reg.entry(id)?.decimal != g.value {
                    return Err(Error::Registry(format!(
                        "`{}`: stored digits disagree with its sqrt source",
                        g.name
                    )));
                }
            }
        }
    }
    Ok(reg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageJson {
    pub lo: String,
    pub hi: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomJson {
    pub coord: PointJson,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub w_exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub w_num: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureJson {
    pub registry: RegistryJson,
    /// `null` for a finite measure (every atom present).
    pub coverage: Option<CoverageJson>,
    #[serde(default)]
    pub tail: Option<TailModel>,
    pub atoms: Vec<AtomJson>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

pub fn measure_to_json(mu: &PointMeasure) -> Result<MeasureJson> {
    let reg = mu.registry();
    let coverage = match mu.coverage() {
        Coverage::All => None,
        Coverage::Window { lo, hi } => Some(CoverageJson {
            lo: fmt_q(&lo),
            hi: fmt_q(&hi),
        }),
        Coverage::Empty => Some(CoverageJson {
            lo: "1/1".into(),
            hi: "0/1".into(),
        }),
    };
    let atoms = mu
        .atoms()
        .iter()
        .map(|a| {
            Ok(AtomJson {
                coord: point_to_json(&a.coord, reg)?,
                w_exact: a.weight.exact_string(),
                w_num: match a.weight {
                    Weight::Num(z) => Some([z.re, z.im]),
                    Weight::Exact(_) => None,
                },
            })
        })
        .collect::<Result<_>>()?;
    Ok(MeasureJson {
        registry: registry_to_json(reg),
        coverage,
        tail: mu.tail(),
        atoms,
        metadata: mu.metadata.clone(),
    })
}

pub fn measure_from_json(j: &MeasureJson) -> Result<PointMeasure> {
    let reg = registry_from_json(&j.registry)?;
    measure_from_json_in(j, &reg)
}

/// Load atoms against an existing registry (generators matched by name).
pub fn measure_from_json_in(j: &MeasureJson, reg: &Registry) -> Result<PointMeasure> {
    let coverage = match &j.coverage {
        None => Coverage::All,
        Some(c) => Coverage::window(parse_q(&c.lo)?, parse_q(&c.hi)?),
    };
    let atoms = j
        .atoms
        .iter()
        .map(|a| {
            let w = match (&a.w_exact, a.w_num) {
                (Some(s), _) => Weight::parse_exact(s)?,
                (None, Some([re, im])) => Weight::num(Complex64::new(re, im)),
                _ => return Err(Error::Parse("atom without weight".into())),
            };
            Ok(Atom::new(point_from_json(&a.coord, reg)?, w))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut m = PointMeasure::new(reg, atoms, coverage)?;
    if coverage != Coverage::All {
        m = m.with_tail(j.tail);
    }
    m.metadata = j.metadata.clone();
    Ok(m)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let s = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&s)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

/// Two-column CSV with a header.
pub fn csv_pairs(h1: &str, h2: &str, rows: &[(f64, f64)]) -> String {
    let mut s = format!("{h1},{h2}\n");
    for (a, b) in rows {
        s.push_str(&format!("{a},{b}\n"));
    }
    s
}

pub fn window_stats_csv(w: &WindowStats) -> String {
    csv_pairs("window_start", "mass", &w.table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{q, qi};

    #[test]
    fn measure_round_trip() {
        let reg = Registry::new();
        let t = reg
            .add_sqrt("t1", 2, BigRational::new(1.into(), 4.into()), 0.into(), "test")
            .unwrap();
        reg.add_literal("lit", "0.125", "test").unwrap();
        let p = SymbolicPoint::new(q(3, 4), [(t, q(-2, 3))]).unwrap();
        let m = PointMeasure::new(
            &reg,
            vec![
                Atom::new(p, Weight::q(q(1, 3))),
                Atom::new(SymbolicPoint::int(2), Weight::num(Complex64::new(0.5, -0.25))),
            ],
            Coverage::window(qi(-5), qi(5)),
        )
        .unwrap()
        .with_tail(Some(TailModel::bounded(2.0)))
        .with_meta("k", "v");
        let j = measure_to_json(&m).unwrap();
        let s = serde_json::to_string(&j).unwrap();
        let back = measure_from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back.atoms(), m.atoms());
        assert_eq!(back.coverage(), m.coverage());
        assert_eq!(back.tail(), m.tail());
        assert_eq!(back.metadata, m.metadata);
        assert_eq!(serde_json::to_string(&measure_to_json(&back).unwrap()).unwrap(), s);
    }

    #[test]
    fn point_format() {
        let reg = Registry::new();
        let t = reg.add_literal("t1", "0.125", "x").unwrap();
        let p = SymbolicPoint::new(q(1, 2), [(t, q(4, 1))]).unwrap();
        let j = serde_json::to_value(point_to_json(&p, &reg).unwrap()).unwrap();
        assert_eq!(j, serde_json::json!({"rat": "1/2", "coeffs": {"t1": "4/1"}}));
    }
}
