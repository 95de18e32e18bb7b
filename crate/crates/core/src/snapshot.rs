//! Versioned JSON snapshots of the memoized Jack tables, so expensive
//! expansions survive between processes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::esym::EPolynomial;
use crate::jack::{cached_tables, insert_table, leading_coefficient};
use crate::partition::Partition;
use crate::rational::{format_rational, parse_rational};

pub const FORMAT: &str = "jackratio-jack-tables";
pub const VERSION: u32 = 1;
/// Directory holding `jack-tables-v1.json`.
pub const CACHE_DIR_ENV: &str = "JACKRATIO_CACHE_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub format: String,
    pub version: u32,
    pub tables: Vec<TableEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub partition: Partition,
    pub beta: String,
    pub m: usize,
    /// `"mu" -> "p/q"`, keyed by comma-separated partitions.
    pub terms: BTreeMap<String, String>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Snapshot(msg.into())
}

impl TableEntry {
    /// Parses and checks the entry: positive beta, equal weights, every key
    /// dominated by the partition, and the exact leading coefficient.
    pub fn decode(&self) -> Result<(Partition, crate::Rational, EPolynomial)> {
        let beta = parse_rational(&self.beta)?;
        if beta <= crate::Rational::zero() {
            return Err(bad(format!("beta {} is not positive", self.beta)));
        }
        let kappa = &self.partition;
        if kappa.len() > self.m {
            return Err(bad(format!("{kappa} has more than {} parts", self.m)));
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for (key, value) in &self.terms {
            let mu: Partition = key.parse()?;
            let c = parse_rational(value)?;
            if c.is_zero() {
                return Err(bad(format!("zero coefficient stored for {mu}")));
            }
            if mu.weight() != kappa.weight() || !kappa.dominates(&mu) || mu.len() > self.m {
                return Err(bad(format!("{mu} cannot occur in the expansion of {kappa}")));
            }
            terms.push((mu, c));
        }
        let poly = EPolynomial::from_terms(self.m, terms)?;
        if poly.coefficient(kappa) != leading_coefficient(kappa, &beta) {
            return Err(bad(format!("leading coefficient of {kappa} does not match")));
        }
        Ok((kappa.clone(), beta, poly))
    }
}

impl Snapshot {
    /// Everything currently memoized.
    pub fn capture() -> Self {
        let tables = cached_tables()
            .into_iter()
            .map(|(partition, beta, m, poly)| TableEntry {
                partition,
                beta: format_rational(&beta),
                m,
                terms: poly
                    .terms()
                    .iter()
                    .map(|(mu, c)| (mu.to_csv(), format_rational(c)))
                    .collect(),
            })
            .collect();
        Snapshot {
            format: FORMAT.into(),
            version: VERSION,
            tables,
        }
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let snapshot: Snapshot = serde_json::from_slice(bytes).map_err(|e| bad(e.to_string()))?;
        if snapshot.format != FORMAT {
            return Err(bad(format!("unknown format {:?}", snapshot.format)));
        }
        if snapshot.version != VERSION {
            return Err(bad(format!("unsupported version {}", snapshot.version)));
        }
        for entry in &snapshot.tables {
            entry.decode()?;
        }
        Ok(snapshot)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("snapshot serializes")
    }

    /// Seeds the in-memory cache; returns the number of tables installed.
    pub fn install(&self) -> Result<usize> {
        let decoded: Vec<_> = self.tables.iter().map(TableEntry::decode).collect::<Result<_>>()?;
        let count = decoded.len();
        for (kappa, beta, poly) in decoded {
            insert_table(kappa, beta, poly.m(), poly);
        }
        Ok(count)
    }
}

pub fn cache_file(dir: &Path) -> PathBuf {
    dir.join(format!("jack-tables-v{VERSION}.json"))
}

pub fn cache_dir_from_env() -> Option<PathBuf> {
    std::env::var_os(CACHE_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// Loads the snapshot in `dir` if there is one; returns the number of
/// tables installed.
pub fn load(dir: &Path) -> Result<usize> {
    let path = cache_file(dir);
    match std::fs::read(&path) {
        Ok(bytes) => Snapshot::decode(&bytes)?.install(),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(0),
        Err(e) => Err(bad(format!("{}: {e}", path.display()))),
    }
}

/// Writes every memoized table to `dir`, replacing the file atomically.
pub fn save(dir: &Path) -> Result<usize> {
    let snapshot = Snapshot::capture();
    std::fs::create_dir_all(dir).map_err(|e| bad(format!("{}: {e}", dir.display())))?;
    let path = cache_file(dir);
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, snapshot.to_json()).map_err(|e| bad(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, &path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    Ok(snapshot.tables.len())
}
