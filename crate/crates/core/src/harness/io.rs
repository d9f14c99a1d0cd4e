//! JSON file formats for instances and packings.
//!
//! Instance files use caller-chosen integer ids; they are mapped to dense ids
//! in file order and kept as item labels, so packings are written back with
//! the original ids.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::model::{parse_fraction, ConflictInstance, GraphClass, ItemId, Packing};

/// A size as written in a file: `"p/q"`, a decimal string, or a JSON number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SizeValue {
    Text(String),
    Number(serde_json::Number),
}

impl SizeValue {
    pub fn to_ratio(&self) -> Result<Ratio<u64>> {
        match self {
            SizeValue::Text(s) => parse_fraction(s),
            SizeValue::Number(n) => parse_fraction(&n.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemEntry {
    pub id: i64,
    pub size: SizeValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub items: Vec<ItemEntry>,
    #[serde(default)]
    pub edges: Vec<[i64; 2]>,
    #[serde(default)]
    pub class_hint: Option<String>,
}

impl InstanceFile {
    pub fn to_instance(&self) -> Result<ConflictInstance> {
        let mut index: HashMap<i64, ItemId> = HashMap::with_capacity(self.items.len());
        let mut sizes = Vec::with_capacity(self.items.len());
        for (k, item) in self.items.iter().enumerate() {
            if index.insert(item.id, k).is_some() {
                return param(format!("duplicate item id {}", item.id));
            }
            sizes.push(
                item.size
                    .to_ratio()
                    .map_err(|e| Error::Parameter(format!("item {}: {e}", item.id)))?,
            );
        }
        let lookup = |id: i64| {
            index
                .get(&id)
                .copied()
                .ok_or_else(|| Error::Parameter(format!("edge references unknown item {id}")))
        };
        let edges = self
            .edges
            .iter()
            .map(|[u, v]| Ok((lookup(*u)?, lookup(*v)?)))
            .collect::<Result<Vec<_>>>()?;
        let labels = self.items.iter().map(|i| i.id.to_string()).collect();
        let hint = self
            .class_hint
            .as_deref()
            .map(str::parse::<GraphClass>)
            .transpose()?;
        Ok(ConflictInstance::with_labels(&sizes, &edges, labels)?.with_class_hint(hint))
    }

    /// File form of `inst`; sizes are written as reduced `"p/q"` strings.
    pub fn from_instance(inst: &ConflictInstance) -> Self {
        let id = |v: ItemId| file_id(inst, v);
        InstanceFile {
            items: inst
                .items()
                .iter()
                .map(|&v| {
                    let r = inst.size_ratio(v);
                    ItemEntry {
                        id: id(v),
                        size: SizeValue::Text(format!("{}/{}", r.numer(), r.denom())),
                    }
                })
                .collect(),
            edges: inst
                .edges()
                .into_iter()
                .map(|(u, v)| [id(u), id(v)])
                .collect(),
            class_hint: inst.class_hint().map(|c| c.name().to_string()),
        }
    }
}

fn file_id(inst: &ConflictInstance, v: ItemId) -> i64 {
    inst.label(v).parse().unwrap_or(v as i64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingFile {
    #[serde(default)]
    pub algorithm: String,
    pub bins: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl PackingFile {
    pub fn from_packing(inst: &ConflictInstance, p: &Packing) -> Self {
        PackingFile {
            algorithm: p.source.clone(),
            bins: p
                .bins
                .iter()
                .map(|b| b.iter().map(|&v| file_id(inst, v)).collect())
                .collect(),
            flags: p.flags.clone(),
        }
    }

    /// Maps file ids back to item ids. Ids not in `inst` become ids outside
    /// the instance so that validation reports them.
    pub fn to_packing(&self, inst: &ConflictInstance) -> Packing {
        let index: HashMap<i64, ItemId> = inst
            .items()
            .iter()
            .map(|&v| (file_id(inst, v), v))
            .collect();
        let mut unknown: HashMap<i64, ItemId> = HashMap::new();
        let bins = self
            .bins
            .iter()
            .map(|b| {
                b.iter()
                    .map(|id| match index.get(id) {
                        Some(&v) => v,
                        None => {
                            let next = inst.id_bound() + unknown.len();
                            *unknown.entry(*id).or_insert(next)
                        }
                    })
                    .collect()
            })
            .collect();
        let mut p = Packing::new(bins, self.algorithm.clone());
        p.flags = self.flags.clone();
        p
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_instance(path: &Path) -> Result<ConflictInstance> {
    read_json::<InstanceFile>(path)?.to_instance()
}

pub fn write_instance(path: &Path, inst: &ConflictInstance) -> Result<()> {
    write_json(path, &InstanceFile::from_instance(inst))
}
