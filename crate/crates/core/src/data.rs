//! Coefficient tables and the material database.
//!
//! The tables are compiled into the library and verified against
//! `data/MANIFEST.sha256` at build time. Setting `TERASIM_DATA_DIR` loads
//! them from a directory instead; those files are checked against the same
//! manifest and rejected on any mismatch.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::propagation::Material;

/// Environment variable naming an alternative data directory.
pub const DATA_DIR_ENV: &str = "TERASIM_DATA_DIR";

const MANIFEST: &str = include_str!("../data/MANIFEST.sha256");

const EMBEDDED: [(&str, &str); 5] = [
    ("materials.json", include_str!("../data/materials.json")),
    ("p676_oxygen.csv", include_str!("../data/p676_oxygen.csv")),
    ("p676_water_vapour.csv", include_str!("../data/p676_water_vapour.csv")),
    ("p838_rain.csv", include_str!("../data/p838_rain.csv")),
    ("p840_debye.csv", include_str!("../data/p840_debye.csv")),
];

/// Oxygen spectral line: center frequency (GHz) and coefficients a1..a6.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct OxygenLine {
    pub f0_ghz: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
}

/// Water-vapour spectral line: center frequency (GHz) and coefficients b1..b6.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct WaterVapourLine {
    pub f0_ghz: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub b5: f64,
    pub b6: f64,
}

/// Rain regression coefficients at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct RainRow {
    pub f_ghz: f64,
    pub k_h: f64,
    pub alpha_h: f64,
    pub k_v: f64,
    pub alpha_v: f64,
}

/// Double-Debye liquid-water permittivity parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DebyeParams {
    pub eps0_a: f64,
    pub eps0_b: f64,
    pub eps1_ratio: f64,
    pub eps2: f64,
    pub fp_a: f64,
    pub fp_b: f64,
    pub fp_c: f64,
    pub fs_ratio: f64,
    pub t_min_k: f64,
    pub t_max_k: f64,
}

#[derive(Deserialize)]
struct MaterialFile {
    #[allow(dead_code)]
    version: u32,
    materials: Vec<Material>,
}

/// All tables, parsed.
#[derive(Debug, Clone)]
pub struct DataSet {
    pub oxygen: Vec<OxygenLine>,
    pub water_vapour: Vec<WaterVapourLine>,
    pub rain: Vec<RainRow>,
    pub debye: DebyeParams,
    pub materials: BTreeMap<String, Material>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn manifest_entries() -> Vec<(&'static str, &'static str)> {
    MANIFEST
        .lines()
        .filter_map(|l| {
            let mut it = l.split_whitespace();
            Some((it.next()?, it.next()?))
        })
        .collect()
}

/// Reads every table from `dir` and verifies it against the manifest.
fn read_dir(dir: &Path) -> Result<Vec<(&'static str, String)>> {
    let manifest = manifest_entries();
    EMBEDDED
        .iter()
        .map(|(name, _)| {
            let path = dir.join(name);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
            let expected = manifest
                .iter()
                .find(|(_, n)| n == name)
                .map(|(h, _)| *h)
                .ok_or_else(|| Error::Data(format!("{name} missing from manifest")))?;
            let actual = sha256_hex(text.as_bytes());
            if actual != expected {
                return Err(Error::Data(format!(
                    "checksum mismatch for {}: expected {expected}, found {actual}",
                    path.display()
                )));
            }
            Ok((*name, text))
        })
        .collect()
}

fn parse_csv<T: DeserializeOwned>(name: &str, text: &str) -> Result<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| Error::Data(format!("{name}: {e}")))
}

fn parse_debye(text: &str) -> Result<DebyeParams> {
    #[derive(Deserialize)]
    struct Row {
        name: String,
        value: f64,
    }
    let rows: Vec<Row> = parse_csv("p840_debye.csv", text)?;
    let get = |key: &str| {
        rows.iter()
            .find(|r| r.name == key)
            .map(|r| r.value)
            .ok_or_else(|| Error::Data(format!("p840_debye.csv: missing '{key}'")))
    };
    Ok(DebyeParams {
        eps0_a: get("eps0_a")?,
        eps0_b: get("eps0_b")?,
        eps1_ratio: get("eps1_ratio")?,
        eps2: get("eps2")?,
        fp_a: get("fp_a")?,
        fp_b: get("fp_b")?,
        fp_c: get("fp_c")?,
        fs_ratio: get("fs_ratio")?,
        t_min_k: get("t_min_k")?,
        t_max_k: get("t_max_k")?,
    })
}

fn parse(files: &[(&str, String)]) -> Result<DataSet> {
    let get = |n: &str| {
        files
            .iter()
            .find(|(name, _)| *name == n)
            .map(|(_, t)| t.as_str())
            .ok_or_else(|| Error::Data(format!("missing table {n}")))
    };
    let mf: MaterialFile = serde_json::from_str(get("materials.json")?)
        .map_err(|e| Error::Data(format!("materials.json: {e}")))?;
    let mut materials = BTreeMap::new();
    for m in mf.materials {
        m.validate().map_err(|e| Error::Data(e.to_string()))?;
        materials.insert(m.name.clone(), m);
    }
    Ok(DataSet {
        oxygen: parse_csv("p676_oxygen.csv", get("p676_oxygen.csv")?)?,
        water_vapour: parse_csv("p676_water_vapour.csv", get("p676_water_vapour.csv")?)?,
        rain: parse_csv("p838_rain.csv", get("p838_rain.csv")?)?,
        debye: parse_debye(get("p840_debye.csv")?)?,
        materials,
    })
}

/// Loads the tables from `dir`, verifying checksums.
pub fn load_from_dir(dir: &Path) -> Result<DataSet> {
    parse(&read_dir(dir)?)
}

/// Parses the tables compiled into the library.
pub fn load_embedded() -> Result<DataSet> {
    let files: Vec<(&str, String)> = EMBEDDED.iter().map(|(n, t)| (*n, t.to_string())).collect();
    parse(&files)
}

/// Process-wide tables, loaded once. Honors [`DATA_DIR_ENV`].
pub fn tables() -> Result<&'static DataSet> {
    static TABLES: OnceLock<Result<DataSet>> = OnceLock::new();
    TABLES
        .get_or_init(|| match std::env::var_os(DATA_DIR_ENV) {
            Some(dir) => load_from_dir(Path::new(&dir)),
            None => load_embedded(),
        })
        .as_ref()
        .map_err(Clone::clone)
}

/// Looks up a material in the shipped database.
pub fn material(name: &str) -> Result<&'static Material> {
    tables()?
        .materials
        .get(name)
        .ok_or_else(|| Error::Configuration(format!("unknown material '{name}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_tables_parse() {
        let d = load_embedded().unwrap();
        assert_eq!(d.oxygen.len(), 44);
        assert_eq!(d.water_vapour.len(), 35);
        assert!(d.rain.len() >= 30);
        assert!(d.materials.contains_key("plasterboard"));
        assert_eq!(d.debye.eps2, 3.52);
    }

    #[test]
    fn embedded_tables_match_manifest() {
        let manifest = manifest_entries();
        assert_eq!(manifest.len(), EMBEDDED.len());
        for (name, text) in EMBEDDED {
            let (hash, _) = manifest.iter().find(|(_, n)| *n == name).unwrap();
            assert_eq!(sha256_hex(text.as_bytes()), *hash, "{name}");
        }
    }
}
