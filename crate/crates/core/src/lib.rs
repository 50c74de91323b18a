//! Evolving double-boundary granular clustering for numerical data streams.
//!
//! Each granule is a pair of nested hyper-boxes around a prototype. Instances
//! inside the inner box contract the granule and pull it toward them; instances
//! in the band between the boxes widen it; instances outside every outer box
//! spawn a new granule. Close, overlapping granules are merged and all widths
//! are pulled toward the per-axis average after every instance.
//!
//! ```
//! use eix_core::{Engine, EngineConfig};
//!
//! let mut engine = Engine::new(EngineConfig::new(0.055, 0.45).unwrap()).unwrap();
//! for x in [[0.40, 0.41], [0.41, 0.40], [0.62, 0.60]] {
//!     engine.process(&x).unwrap();
//! }
//! assert_eq!(engine.state().len(), 2);
//! ```
//!
//! The crate is `no_std` and only needs `alloc`. File formats, timing and the
//! command-line tool live in the `fuzzy-eix` crate.

#![no_std]

extern crate alloc;

pub mod bench;
pub mod engine;
pub mod error;
pub mod granule;
pub mod projection;

pub use bench::{
    gen_stream, prequential_run, ClassSchedule, Prequential, RunMetrics, StreamInstance,
    TwinGaussians,
};
pub use engine::{
    balance, balance_unclamped, merge_convex_hull, merge_pass, merge_weighted_mean, select_granule,
    Engine, EngineConfig, EventKind, GranuleId, MergeGate, MergeMethod, ModelState, StepEvent,
};
pub use error::{Error, Result};
pub use granule::{Bounds, ClassLabel, Granule, TNorm, UpdateParams};
pub use projection::{
    export_rulebase, project_type1, project_type2, RuleBase, RuleKind, TrapezoidMf, Type2Mf,
};
