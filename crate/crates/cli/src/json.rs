//! JSON records for structures and configuration witnesses.

use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::{bail, Context};
use fraisse_core::configurations::{ConfigEntry, ConfigWitness, Interpretation, QfFormula};
use fraisse_core::{RawStructure, Signature, Structure};
use serde::{Deserialize, Serialize};

/// `{"signature": [[name, arity], ...], "size": n, "relations": {name: [[i, j, ...], ...]}}`,
/// tuples sorted, every symbol present.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureRecord {
    pub signature: Vec<(String, usize)>,
    pub size: usize,
    pub relations: BTreeMap<String, Vec<Vec<usize>>>,
}

impl From<&Structure> for StructureRecord {
    fn from(s: &Structure) -> Self {
        let signature = s.sig().symbols().iter().map(|sym| (sym.name.clone(), sym.arity)).collect();
        let relations = (0..s.sig().len()).map(|r| (s.sig().name(r).to_string(), s.tuples(r))).collect();
        StructureRecord { signature, size: s.size(), relations }
    }
}

impl StructureRecord {
    pub fn signature(&self) -> anyhow::Result<Signature> {
        Ok(Signature::new(self.signature.iter().cloned())?)
    }

    pub fn to_structure(&self) -> anyhow::Result<Structure> {
        let raw = RawStructure {
            sig: self.signature()?,
            size: self.size,
            relations: self.relations.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        };
        Ok(raw.build()?)
    }
}

pub fn structure_to_json(s: &Structure) -> String {
    serde_json::to_string(&StructureRecord::from(s)).expect("records serialize")
}

pub fn structure_from_json(text: &str) -> anyhow::Result<Structure> {
    let rec: StructureRecord = serde_json::from_str(text).context("malformed structure record")?;
    rec.to_structure()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub index: StructureRecord,
    pub target: StructureRecord,
    pub map: Vec<Vec<usize>>,
}

/// Formulas are written in prefix form over the target signature.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub source: Vec<(String, usize)>,
    pub target: Vec<(String, usize)>,
    pub width: usize,
    pub formulas: Vec<String>,
    pub entries: Vec<EntryRecord>,
}

fn sig_pairs(sig: &Signature) -> Vec<(String, usize)> {
    sig.symbols().iter().map(|s| (s.name.clone(), s.arity)).collect()
}

impl From<&ConfigWitness> for ConfigRecord {
    fn from(w: &ConfigWitness) -> Self {
        let i = &w.interp;
        ConfigRecord {
            source: sig_pairs(&i.source),
            target: sig_pairs(&i.target),
            width: i.width,
            formulas: i.formulas.iter().map(|phi| phi.to_prefix(&i.target)).collect(),
            entries: w
                .entries
                .iter()
                .map(|e| EntryRecord { index: (&e.index).into(), target: (&e.target).into(), map: e.map.clone() })
                .collect(),
        }
    }
}

impl ConfigRecord {
    pub fn to_witness(&self) -> anyhow::Result<ConfigWitness> {
        let source = Arc::new(Signature::new(self.source.iter().cloned())?);
        let target = Arc::new(Signature::new(self.target.iter().cloned())?);
        let formulas = self
            .formulas
            .iter()
            .enumerate()
            .map(|(r, f)| QfFormula::parse_prefix(f, &target).with_context(|| format!("formula {r}")))
            .collect::<anyhow::Result<Vec<_>>>()?;
        let interp = Interpretation::new(source.clone(), target.clone(), self.width, formulas)?;
        let mut entries = Vec::with_capacity(self.entries.len());
        for (i, e) in self.entries.iter().enumerate() {
            let index = e.index.to_structure().with_context(|| format!("entry {i} index"))?;
            let tgt = e.target.to_structure().with_context(|| format!("entry {i} target"))?;
            // Share the interpretation's signature allocations.
            let index = index.retag(source.clone())?;
            let tgt = tgt.retag(target.clone())?;
            entries.push(ConfigEntry { index, target: tgt, map: e.map.clone() });
        }
        let w = ConfigWitness { interp, entries };
        if let Err(e) = w.validate() {
            bail!("invalid configuration witness: {e}");
        }
        Ok(w)
    }
}

pub fn config_to_json(w: &ConfigWitness) -> String {
    serde_json::to_string_pretty(&ConfigRecord::from(w)).expect("records serialize")
}

pub fn config_from_json(text: &str) -> anyhow::Result<ConfigWitness> {
    let rec: ConfigRecord = serde_json::from_str(text).context("malformed configuration record")?;
    rec.to_witness()
}
