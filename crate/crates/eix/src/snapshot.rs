//! JSON model snapshots.
//!
//! ```json
//! {
//!   "version": 1,
//!   "config": {"epsilon": 0.055, "rho": 0.45, "alpha": 0.3, "beta": 0.3,
//!              "merge_method": "convex_hull", "tnorm": "min", "merge_gate": "core_overlap"},
//!   "h": 400,
//!   "next_id": 57,
//!   "granules": [{"id": 3, "center": [..], "inner_lower": [..], "inner_upper": [..],
//!                 "outer_lower": [..], "outer_upper": [..], "support": 40,
//!                 "outer_hits": 12, "label_tally": {"1": 38, "2": 4}}],
//!   "creation_log": [{"h": 1, "id": 0}],
//!   "merge_log": [{"h": 9, "kept": 0, "absorbed": 2}]
//! }
//! ```
//!
//! Reals are written in shortest round-trip form, so a restore reproduces the
//! model bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use eix_core::engine::{CreationRecord, Entry, MergeRecord};
use eix_core::{Bounds, ClassLabel, Engine, EngineConfig, Granule, GranuleId, ModelState};
use serde::{Deserialize, Serialize};

use crate::atomic;
use crate::error::{Error, Result};

pub const SNAPSHOT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GranuleDoc {
    pub id: u64,
    pub center: Vec<f64>,
    pub inner_lower: Vec<f64>,
    pub inner_upper: Vec<f64>,
    pub outer_lower: Vec<f64>,
    pub outer_upper: Vec<f64>,
    pub support: u64,
    #[serde(default)]
    pub outer_hits: u64,
    #[serde(default)]
    pub label_tally: BTreeMap<ClassLabel, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDoc {
    pub version: u64,
    pub config: EngineConfig,
    pub h: u64,
    pub next_id: u64,
    pub granules: Vec<GranuleDoc>,
    #[serde(default)]
    pub creation_log: Vec<CreationRecord>,
    #[serde(default)]
    pub merge_log: Vec<MergeRecord>,
}

impl SnapshotDoc {
    pub fn from_engine(engine: &Engine) -> Self {
        let state = engine.state();
        let granules = state
            .granules()
            .iter()
            .map(|e| {
                let g = &e.granule;
                GranuleDoc {
                    id: e.id.0,
                    center: g.center().to_vec(),
                    inner_lower: g.inner().lower.clone(),
                    inner_upper: g.inner().upper.clone(),
                    outer_lower: g.outer().lower.clone(),
                    outer_upper: g.outer().upper.clone(),
                    support: g.support(),
                    outer_hits: g.outer_hits(),
                    label_tally: g.label_tally().clone(),
                }
            })
            .collect();
        Self {
            version: SNAPSHOT_VERSION,
            config: *engine.config(),
            h: state.clock(),
            next_id: state.next_id(),
            granules,
            creation_log: state.creation_log().to_vec(),
            merge_log: state.merge_log().to_vec(),
        }
    }

    pub fn into_engine(self) -> Result<Engine> {
        if self.version != SNAPSHOT_VERSION {
            return Err(Error::Version {
                found: self.version,
                expected: SNAPSHOT_VERSION,
            });
        }
        let entries = self
            .granules
            .into_iter()
            .map(|d| {
                let granule = Granule::from_parts(
                    d.center,
                    Bounds::new(d.inner_lower, d.inner_upper)?,
                    Bounds::new(d.outer_lower, d.outer_upper)?,
                    d.support,
                    d.outer_hits,
                    d.label_tally,
                )?;
                Ok(Entry {
                    id: GranuleId(d.id),
                    granule,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let state = ModelState::from_parts(
            entries,
            self.h,
            self.next_id,
            self.creation_log,
            self.merge_log,
        )?;
        Ok(Engine::from_state(self.config, state)?)
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u64,
}

pub fn snapshot(engine: &Engine) -> String {
    serde_json::to_string_pretty(&SnapshotDoc::from_engine(engine))
        .expect("snapshot serialization is infallible")
}

/// Parses a snapshot document. Nothing is returned unless the whole document
/// is valid.
pub fn restore(text: &str) -> Result<Engine> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(Error::from_json)?;
    if probe.version != SNAPSHOT_VERSION {
        return Err(Error::Version {
            found: probe.version,
            expected: SNAPSHOT_VERSION,
        });
    }
    let doc: SnapshotDoc = serde_json::from_str(text).map_err(Error::from_json)?;
    doc.into_engine()
}

pub fn write_snapshot(path: &Path, engine: &Engine) -> Result<()> {
    atomic::write_file(path, snapshot(engine).as_bytes())
}

pub fn read_snapshot(path: &Path) -> Result<Engine> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    restore(&text)
}
