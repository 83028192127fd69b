//! Bundled vector-set assets with checksums, plus directory inventories.
//!
//! Shipped sets: the 13-vector qutrit and 18-vector four-level
//! contextuality families, and complete unbiased-basis sets for d = 4
//! and d = 9. The 21-vector d = 6 family is not bundled: its explicit
//! vectors are not printed in the source material.

use sha2::{Digest, Sha256};

use crate::defect::PovmSet;
use crate::{Error, Result};

pub struct BundledSet {
    pub name: &'static str,
    pub description: &'static str,
    json: &'static str,
}

pub const BUNDLED: &[BundledSet] = &[
    BundledSet {
        name: "ks13_d3",
        description: "13-vector contextuality set in dimension 3",
        json: include_str!("../data/ks13_d3.json"),
    },
    BundledSet {
        name: "ks18_d4",
        description: "18-vector contextuality set in dimension 4",
        json: include_str!("../data/ks18_d4.json"),
    },
    BundledSet {
        name: "mub_d4",
        description: "complete set of 5 mutually unbiased bases in dimension 4",
        json: include_str!("../data/mub_d4.json"),
    },
    BundledSet {
        name: "mub_d9",
        description: "complete set of 10 mutually unbiased bases in dimension 9",
        json: include_str!("../data/mub_d9.json"),
    },
];

impl BundledSet {
    pub fn load(&self) -> Result<PovmSet> {
        let (d, vectors) = crate::io::vectors_from_json(self.json)?;
        PovmSet::new(d, vectors)
    }

    pub fn checksum(&self) -> String {
        hex_digest(self.json.as_bytes())
    }
}

pub fn bundled(name: &str) -> Result<&'static BundledSet> {
    BUNDLED
        .iter()
        .find(|b| b.name == name)
        .ok_or_else(|| Error::Unsupported(format!("no bundled dataset named {name:?}")))
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// One row of a dataset inventory.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DatasetInfo {
    pub name: String,
    pub dim: usize,
    pub vector_count: usize,
    pub sha256: String,
    pub bundled: bool,
    /// Set when a `<name>.sha256` sidecar disagrees with the content.
    pub checksum_mismatch: bool,
}

/// Inventory of the bundled sets plus any `.json` vector sets in `dir`.
/// A sidecar file `<stem>.json.sha256` is compared against the content.
pub fn dataset_list(dir: Option<&std::path::Path>) -> Result<Vec<DatasetInfo>> {
    let mut out = Vec::new();
    for b in BUNDLED {
        let set = b.load()?;
        out.push(DatasetInfo {
            name: b.name.to_string(),
            dim: set.d,
            vector_count: set.len(),
            sha256: b.checksum(),
            bundled: true,
            checksum_mismatch: false,
        });
    }
    if let Some(dir) = dir {
        if !dir.is_dir() {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("dataset directory {} not found", dir.display()),
            )));
        }
        let mut entries: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().map_or(false, |x| x == "json"))
            .collect();
        entries.sort();
        for path in entries {
            let text = std::fs::read_to_string(&path)?;
            let digest = hex_digest(text.as_bytes());
            let sidecar = path.with_extension("json.sha256");
            let mismatch = match std::fs::read_to_string(&sidecar) {
                Ok(expect) => expect.trim() != digest,
                Err(_) => false,
            };
            match crate::io::vectors_from_json(&text) {
                Ok((d, vectors)) => out.push(DatasetInfo {
                    name: path
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_default(),
                    dim: d,
                    vector_count: vectors.len(),
                    sha256: digest,
                    bundled: false,
                    checksum_mismatch: mismatch,
                }),
                Err(_) => out.push(DatasetInfo {
                    name: format!("{} (unreadable)", path.display()),
                    dim: 0,
                    vector_count: 0,
                    sha256: digest,
                    bundled: false,
                    checksum_mismatch: true,
                }),
            }
        }
    }
    Ok(out)
}
