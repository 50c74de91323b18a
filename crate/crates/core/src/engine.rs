//! The evolving learner: granule selection, creation of granules for
//! eccentric instances, pairwise merging and granularity balancing.
//!
//! Each instance updates at most one granule. The target is the granule whose
//! inner box contains the instance (nearest center by L∞ on ties), else one
//! whose outer band contains it, else a new granule is created. After the
//! update a merge pass runs to fixpoint and then one balancing step pulls
//! every granule's widths toward the per-axis mean.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::granule::{check_epsilon, validate_instance, ClassLabel, Granule, TNorm, UpdateParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GranuleId(pub u64);

impl fmt::Display for GranuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeMethod {
    /// Support-weighted convex combination of both granules.
    WeightedMean,
    /// Smallest box pair enclosing both granules, centred on the inner midpoint.
    #[default]
    ConvexHull,
}

/// Which pairs are eligible for merging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeGate {
    /// Center distance `<= rho` alone.
    Distance,
    /// Center distance `<= rho` and one center inside the other's inner box.
    #[default]
    CoreOverlap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub epsilon: f64,
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    pub merge_method: MergeMethod,
    pub tnorm: TNorm,
    #[serde(default)]
    pub merge_gate: MergeGate,
}

impl EngineConfig {
    pub const DEFAULT_ALPHA: f64 = 0.3;
    pub const DEFAULT_BETA: f64 = UpdateParams::DEFAULT_BETA;

    /// Configuration with default `alpha`, `beta`, convex-hull merging, min T-norm
    /// and core-overlap merge gating.
    pub fn new(epsilon: f64, rho: f64) -> Result<Self> {
        let cfg = Self {
            epsilon,
            rho,
            alpha: Self::DEFAULT_ALPHA,
            beta: Self::DEFAULT_BETA,
            merge_method: MergeMethod::default(),
            tnorm: TNorm::default(),
            merge_gate: MergeGate::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)?;
        let unit = |name, value: f64| {
            if (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must lie in [0, 1]",
                })
            }
        };
        unit("rho", self.rho)?;
        unit("alpha", self.alpha)?;
        UpdateParams::new(self.epsilon, self.beta)?;
        Ok(())
    }

    pub fn update_params(&self) -> UpdateParams {
        UpdateParams::new(self.epsilon, self.beta).expect("validated configuration")
    }
}

/// A granule together with its stable identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub id: GranuleId,
    pub granule: Granule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub h: u64,
    /// Survivor; it keeps the position of the earlier granule.
    pub kept: GranuleId,
    pub absorbed: GranuleId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreationRecord {
    pub h: u64,
    pub id: GranuleId,
}

/// Ordered collection of granules plus the stream clock and structural logs.
/// Entries are always sorted by id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelState {
    entries: Vec<Entry>,
    clock: u64,
    next_id: u64,
    creation_log: Vec<CreationRecord>,
    merge_log: Vec<MergeRecord>,
}

impl ModelState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a state from stored parts, checking id ordering and log monotonicity.
    pub fn from_parts(
        entries: Vec<Entry>,
        clock: u64,
        next_id: u64,
        creation_log: Vec<CreationRecord>,
        merge_log: Vec<MergeRecord>,
    ) -> Result<Self> {
        if entries.windows(2).any(|w| w[0].id >= w[1].id) {
            return Err(Error::InvalidState(
                "granule ids must be strictly increasing",
            ));
        }
        if entries.last().is_some_and(|e| e.id.0 >= next_id) {
            return Err(Error::InvalidState("granule id not below next_id"));
        }
        if let Some(first) = entries.first() {
            let n = first.granule.dim();
            if let Some(bad) = entries.iter().find(|e| e.granule.dim() != n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: bad.granule.dim(),
                });
            }
        }
        let monotone = |hs: &mut dyn Iterator<Item = u64>| {
            let v: Vec<u64> = hs.collect();
            v.windows(2).all(|w| w[0] <= w[1]) && v.last().is_none_or(|&h| h <= clock)
        };
        if !monotone(&mut creation_log.iter().map(|r| r.h))
            || !monotone(&mut merge_log.iter().map(|r| r.h))
        {
            return Err(Error::InvalidState(
                "logs must be monotone in h and not exceed the clock",
            ));
        }
        Ok(Self {
            entries,
            clock,
            next_id,
            creation_log,
            merge_log,
        })
    }

    pub fn granules(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Instances processed so far.
    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn dim(&self) -> Option<usize> {
        self.entries.first().map(|e| e.granule.dim())
    }

    pub fn get(&self, id: GranuleId) -> Option<&Granule> {
        self.position(id).map(|i| &self.entries[i].granule)
    }

    fn position(&self, id: GranuleId) -> Option<usize> {
        self.entries.binary_search_by_key(&id, |e| e.id).ok()
    }

    pub fn creation_log(&self) -> &[CreationRecord] {
        &self.creation_log
    }

    pub fn merge_log(&self) -> &[MergeRecord] {
        &self.merge_log
    }

    fn push_new(&mut self, granule: Granule) -> GranuleId {
        let id = GranuleId(self.next_id);
        self.next_id += 1;
        self.entries.push(Entry { id, granule });
        self.creation_log.push(CreationRecord { h: self.clock, id });
        id
    }

    /// Inserts a granule with a fresh id, outside of any stream step.
    pub fn insert(&mut self, granule: Granule) -> Result<GranuleId> {
        if let Some(n) = self.dim() {
            if granule.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: granule.dim(),
                });
            }
        }
        Ok(self.push_new(granule))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HitKind {
    Inner,
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub index: usize,
    pub id: GranuleId,
    pub hit: HitKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    InnerUpdate,
    OuterUpdate,
    Created,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepEvent {
    pub h: u64,
    pub kind: EventKind,
    /// Granule updated or created by this instance, before merging.
    pub granule: GranuleId,
    /// Membership of the instance in that granule at arrival; 0 for creations.
    pub membership: f64,
    pub merges: Vec<MergeRecord>,
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn nearest_where(state: &ModelState, x: &[f64], pred: impl Fn(&Granule) -> bool) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, e) in state.entries.iter().enumerate() {
        if !pred(&e.granule) {
            continue;
        }
        let d = linf(e.granule.center(), x);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// Picks the update target for `x`. Dimension mismatches yield `None`.
pub fn select_granule(state: &ModelState, x: &[f64]) -> Option<Selection> {
    if state.dim() != Some(x.len()) {
        return None;
    }
    let inner = |g: &Granule| g.contains_inner(x).unwrap_or(false);
    let outer_only = |g: &Granule| g.contains_outer(x).unwrap_or(false) && !inner(g);
    let (index, hit) = match nearest_where(state, x, inner) {
        Some(i) => (i, HitKind::Inner),
        None => (nearest_where(state, x, outer_only)?, HitKind::Outer),
    };
    Some(Selection {
        index,
        id: state.entries[index].id,
        hit,
    })
}

/// Index of the granule with the nearest center by L∞ (lowest id on ties).
pub fn nearest_granule(state: &ModelState, x: &[f64]) -> Option<usize> {
    if state.dim() != Some(x.len()) {
        return None;
    }
    nearest_where(state, x, |_| true)
}

fn check_same_dim(g1: &Granule, g2: &Granule) -> Result<()> {
    if g1.dim() == g2.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: g1.dim(),
            found: g2.dim(),
        })
    }
}

fn merge_bookkeeping(target: &mut Granule, g1: &Granule, g2: &Granule) {
    target.support = g1.support + g2.support;
    target.outer_hits = g1.outer_hits + g2.outer_hits;
    target.label_tally = g1.label_tally.clone();
    for (&label, &count) in &g2.label_tally {
        *target.label_tally.entry(label).or_insert(0) += count;
    }
}

/// Places the merged granule on the segment between the operands at parameter
/// `N2 / (N1 + N2)`; the four bound vectors are combined the same way.
pub fn merge_weighted_mean(g1: &Granule, g2: &Granule) -> Result<Granule> {
    check_same_dim(g1, g2)?;
    let total = (g1.support + g2.support) as f64;
    let w = g2.support as f64 / total;
    let combine = |a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(p, q)| p - w * (p - q)).collect()
    };
    let mut g = g1.clone();
    g.center = combine(&g1.center, &g2.center);
    g.inner.lower = combine(&g1.inner.lower, &g2.inner.lower);
    g.inner.upper = combine(&g1.inner.upper, &g2.inner.upper);
    g.outer.lower = combine(&g1.outer.lower, &g2.outer.lower);
    g.outer.upper = combine(&g1.outer.upper, &g2.outer.upper);
    merge_bookkeeping(&mut g, g1, g2);
    Ok(g)
}

/// Coordinate-wise hull of both boxes; the center is the inner-box midpoint.
pub fn merge_convex_hull(g1: &Granule, g2: &Granule) -> Result<Granule> {
    check_same_dim(g1, g2)?;
    let lo =
        |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p.min(*q)).collect() };
    let hi =
        |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p.max(*q)).collect() };
    let mut g = g1.clone();
    g.inner.lower = lo(&g1.inner.lower, &g2.inner.lower);
    g.inner.upper = hi(&g1.inner.upper, &g2.inner.upper);
    g.outer.lower = lo(&g1.outer.lower, &g2.outer.lower);
    g.outer.upper = hi(&g1.outer.upper, &g2.outer.upper);
    g.center = g
        .inner
        .lower
        .iter()
        .zip(&g.inner.upper)
        .map(|(l, u)| (l + u) / 2.0)
        .collect();
    merge_bookkeeping(&mut g, g1, g2);
    Ok(g)
}

fn merge_eligible(a: &Granule, b: &Granule, cfg: &EngineConfig) -> Option<f64> {
    let d = linf(a.center(), b.center());
    if d > cfg.rho {
        return None;
    }
    match cfg.merge_gate {
        MergeGate::Distance => Some(d),
        MergeGate::CoreOverlap => {
            let overlapped = a.contains_inner(b.center()).unwrap_or(false)
                || b.contains_inner(a.center()).unwrap_or(false);
            overlapped.then_some(d)
        }
    }
}

/// Merges the closest eligible pair until no pair qualifies. Ties go to the
/// lexicographically first index pair. Returns the merges in order.
pub fn merge_pass(state: &mut ModelState, cfg: &EngineConfig) -> Vec<MergeRecord> {
    let mut merges = Vec::new();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..state.entries.len() {
            for j in (i + 1)..state.entries.len() {
                let (a, b) = (&state.entries[i].granule, &state.entries[j].granule);
                if let Some(d) = merge_eligible(a, b, cfg) {
                    if best.is_none_or(|(_, _, bd)| d < bd) {
                        best = Some((i, j, d));
                    }
                }
            }
        }
        let Some((i, j, _)) = best else { break };
        let absorbed = state.entries.remove(j);
        let kept = &mut state.entries[i];
        let mut merged = match cfg.merge_method {
            MergeMethod::WeightedMean => merge_weighted_mean(&kept.granule, &absorbed.granule),
            MergeMethod::ConvexHull => merge_convex_hull(&kept.granule, &absorbed.granule),
        }
        .expect("granules in one state share a dimension");
        merged.enforce_floors(cfg.epsilon);
        kept.granule = merged;
        let record = MergeRecord {
            h: state.clock,
            kept: kept.id,
            absorbed: absorbed.id,
        };
        state.merge_log.push(record);
        merges.push(record);
    }
    merges
}

/// Moves every granule's inner and outer widths toward the per-axis mean widths
/// at rate `alpha` (each bound moves by `alpha * (mean - own)`), then restores
/// the width floors.
pub fn balance(state: &mut ModelState, cfg: &EngineConfig) {
    balance_unclamped(state, cfg);
    for e in &mut state.entries {
        e.granule.enforce_floors(cfg.epsilon);
    }
}

/// The width averaging of [`balance`] without the floor pass. Mean widths are
/// preserved exactly up to rounding.
pub fn balance_unclamped(state: &mut ModelState, cfg: &EngineConfig) {
    let Some(n) = state.dim() else { return };
    let k = state.entries.len() as f64;
    for j in 0..n {
        let mut sum_in = 0.0;
        let mut sum_out = 0.0;
        for e in &state.entries {
            let g = &e.granule;
            sum_in += g.inner.upper[j] - g.inner.lower[j];
            sum_out += g.outer.upper[j] - g.outer.lower[j];
        }
        let mean_in = sum_in / k;
        let mean_out = sum_out / k;
        for e in &mut state.entries {
            let g = &mut e.granule;
            let step_in = cfg.alpha * (mean_in - (g.inner.upper[j] - g.inner.lower[j]));
            let step_out = cfg.alpha * (mean_out - (g.outer.upper[j] - g.outer.lower[j]));
            g.outer.lower[j] -= step_out;
            g.inner.lower[j] -= step_in;
            g.inner.upper[j] += step_in;
            g.outer.upper[j] += step_out;
        }
    }
}

/// A model bound to its configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Engine {
    config: EngineConfig,
    state: ModelState,
}

impl Engine {
    pub fn new(config: EngineConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            state: ModelState::new(),
        })
    }

    /// Resumes from a restored state; every granule must meet the configured floors.
    pub fn from_state(config: EngineConfig, state: ModelState) -> Result<Self> {
        config.validate()?;
        for e in state.granules() {
            e.granule.check_invariants(config.epsilon)?;
        }
        Ok(Self { config, state })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn state(&self) -> &ModelState {
        &self.state
    }

    pub fn into_state(self) -> ModelState {
        self.state
    }

    pub fn process(&mut self, x: &[f64]) -> Result<StepEvent> {
        self.learn(x, None)
    }

    /// Processes one instance. A label, when given, is tallied on the target
    /// granule before merging; it never affects geometry. On error the state
    /// is left untouched.
    pub fn learn(&mut self, x: &[f64], label: Option<ClassLabel>) -> Result<StepEvent> {
        validate_instance(x)?;
        if let Some(n) = self.state.dim() {
            if x.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: x.len(),
                });
            }
        }
        let cfg = self.config;
        let params = cfg.update_params();
        let state = &mut self.state;
        state.clock += 1;

        let (kind, index, membership) = match select_granule(state, x) {
            Some(sel) => {
                let slot = &mut state.entries[sel.index].granule;
                let membership = slot.membership(x, cfg.tnorm)?;
                match sel.hit {
                    HitKind::Inner => {
                        let mut g = slot.shrink_on_inner(x, &params)?.slide(x)?;
                        g.support += 1;
                        *slot = g;
                        (EventKind::InnerUpdate, sel.index, membership)
                    }
                    HitKind::Outer => {
                        let mut g = slot.expand_on_outer(x, &params)?;
                        g.outer_hits += 1;
                        *slot = g;
                        (EventKind::OuterUpdate, sel.index, membership)
                    }
                }
            }
            None => {
                state.push_new(Granule::new(x, cfg.epsilon)?);
                (EventKind::Created, state.entries.len() - 1, 0.0)
            }
        };
        let target = state.entries[index].id;
        if let Some(label) = label {
            state.entries[index].granule.add_label(label);
        }

        let merges = merge_pass(state, &cfg);
        balance(state, &cfg);

        Ok(StepEvent {
            h: state.clock,
            kind,
            granule: target,
            membership,
            merges,
        })
    }

    /// Majority label of the granule that would be updated by `x`, falling back
    /// to the nearest granule when none contains it. `None` when the model is
    /// empty or that granule has no clear majority.
    pub fn predict(&self, x: &[f64]) -> Option<ClassLabel> {
        let index = match select_granule(&self.state, x) {
            Some(sel) => sel.index,
            None => nearest_granule(&self.state, x)?,
        };
        self.state.entries[index].granule.majority_label()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::granule::Bounds;
    use alloc::collections::BTreeMap;
    use alloc::vec;

    fn cfg(rho: f64) -> EngineConfig {
        EngineConfig::new(0.055, rho).unwrap()
    }

    fn boxed(center: &[f64], inner_half: f64, outer_half: f64, support: u64) -> Granule {
        Granule::from_parts(
            center.to_vec(),
            Bounds::new(
                center.iter().map(|c| c - inner_half).collect(),
                center.iter().map(|c| c + inner_half).collect(),
            )
            .unwrap(),
            Bounds::new(
                center.iter().map(|c| c - outer_half).collect(),
                center.iter().map(|c| c + outer_half).collect(),
            )
            .unwrap(),
            support,
            0,
            BTreeMap::new(),
        )
        .unwrap()
    }

    fn state_of(granules: Vec<Granule>) -> ModelState {
        let mut s = ModelState::new();
        for g in granules {
            s.insert(g).unwrap();
        }
        s
    }

    #[test]
    fn first_instance_creates() {
        let mut e = Engine::new(cfg(0.45)).unwrap();
        let ev = e.process(&[0.5, 0.5]).unwrap();
        assert_eq!(ev.kind, EventKind::Created);
        assert_eq!(ev.membership, 0.0);
        assert_eq!(e.state().len(), 1);
        assert_eq!(e.state().clock(), 1);
    }

    #[test]
    fn eccentric_instance_creates() {
        let mut e = Engine::new(cfg(0.45)).unwrap();
        e.process(&[0.5, 0.5]).unwrap();
        let ev = e.process(&[0.95, 0.95]).unwrap();
        assert_eq!(ev.kind, EventKind::Created);
        assert_eq!(ev.granule, GranuleId(1));
        assert_eq!(e.state().len(), 2);
        assert_eq!(e.state().creation_log().len(), 2);
    }

    #[test]
    fn inner_hit_shrinks_slides_and_counts() {
        let mut e = Engine::new(cfg(0.1)).unwrap();
        e.process(&[0.5, 0.5]).unwrap();
        let ev = e.process(&[0.51, 0.5]).unwrap();
        assert_eq!(ev.kind, EventKind::InnerUpdate);
        assert_eq!(ev.membership, 1.0);
        let g = &e.state().granules()[0].granule;
        assert_eq!(g.support(), 2);
        assert!((g.center()[0] - 0.505).abs() < 1e-12);
    }

    #[test]
    fn outer_hit_expands_without_support() {
        let mut e = Engine::new(cfg(0.1)).unwrap();
        e.process(&[0.5, 0.5]).unwrap();
        let ev = e.process(&[0.54, 0.5]).unwrap();
        assert_eq!(ev.kind, EventKind::OuterUpdate);
        assert!(ev.membership > 0.0 && ev.membership < 1.0);
        let g = &e.state().granules()[0].granule;
        assert_eq!(g.support(), 1);
        assert_eq!(g.outer_hits(), 1);
        assert!(g.widths().0[0] > 0.055);
    }

    #[test]
    fn rejected_instance_leaves_state() {
        let mut e = Engine::new(cfg(0.45)).unwrap();
        e.process(&[0.5, 0.5]).unwrap();
        let before = e.clone();
        assert!(matches!(
            e.process(&[f64::NAN, 0.5]),
            Err(Error::RejectedInstance { .. })
        ));
        assert!(matches!(
            e.process(&[1.5, 0.5]),
            Err(Error::RejectedInstance { .. })
        ));
        assert!(matches!(
            e.process(&[0.5]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(e, before);
    }

    #[test]
    fn selection_prefers_inner_then_nearest_then_lowest_id() {
        let s = state_of(vec![
            boxed(&[0.25], 0.3, 0.4, 1),
            boxed(&[0.75], 0.3, 0.4, 1),
        ]);
        let sel = select_granule(&s, &[0.52]).unwrap();
        assert_eq!((sel.id, sel.hit), (GranuleId(1), HitKind::Inner));

        // Both centers are exactly 0.25 away.
        let tie = select_granule(&s, &[0.5]).unwrap();
        assert_eq!((tie.id, tie.hit), (GranuleId(0), HitKind::Inner));

        // Inner hits win over a nearer outer-band hit.
        let s = state_of(vec![
            boxed(&[0.5], 0.05, 0.2, 1),
            boxed(&[0.3], 0.2, 0.3, 1),
        ]);
        let sel = select_granule(&s, &[0.44]).unwrap();
        assert_eq!((sel.id, sel.hit), (GranuleId(1), HitKind::Inner));

        assert!(select_granule(&s, &[0.95]).is_none());
        assert!(select_granule(&ModelState::new(), &[0.5]).is_none());
    }

    #[test]
    fn merge_pass_distance_examples() {
        let mut c = cfg(0.45);
        c.merge_gate = MergeGate::Distance;
        let mut s = state_of(vec![
            Granule::new(&[0.2, 0.2], 0.055).unwrap(),
            Granule::new(&[0.25, 0.25], 0.055).unwrap(),
        ]);
        let merges = merge_pass(&mut s, &c);
        assert_eq!(merges.len(), 1);
        assert_eq!(s.len(), 1);
        assert_eq!(s.granules()[0].granule.support(), 2);

        let mut s = state_of(vec![
            Granule::new(&[0.1, 0.1], 0.055).unwrap(),
            Granule::new(&[0.9, 0.9], 0.055).unwrap(),
        ]);
        assert!(merge_pass(&mut s, &c).is_empty());
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn merge_pass_chains_to_fixpoint() {
        // Hand trace with rho = 0.1, convex hull:
        // centers 0.30, 0.35, 0.42. Closest pair (0,1) at 0.05 merges into
        // inner [0.2725, 0.3775], center 0.325; that is 0.095 from 0.42, so it
        // absorbs granule 2 as well.
        let mut c = cfg(0.1);
        c.merge_gate = MergeGate::Distance;
        let mut s = state_of(vec![
            Granule::new(&[0.30], 0.055).unwrap(),
            Granule::new(&[0.35], 0.055).unwrap(),
            Granule::new(&[0.42], 0.055).unwrap(),
        ]);
        let merges = merge_pass(&mut s, &c);
        assert_eq!(s.len(), 1);
        assert_eq!(
            merges
                .iter()
                .map(|m| (m.kept, m.absorbed))
                .collect::<Vec<_>>(),
            vec![(GranuleId(0), GranuleId(1)), (GranuleId(0), GranuleId(2))]
        );
        let g = &s.granules()[0].granule;
        assert!((g.inner().lower[0] - 0.2725).abs() < 1e-12);
        assert!((g.inner().upper[0] - 0.4475).abs() < 1e-12);
        assert_eq!(g.support(), 3);
    }

    #[test]
    fn core_overlap_gate_blocks_distant_pairs() {
        let c = cfg(0.45);
        let mut s = state_of(vec![
            Granule::new(&[0.4, 0.4], 0.055).unwrap(),
            Granule::new(&[0.6, 0.6], 0.055).unwrap(),
        ]);
        assert!(merge_pass(&mut s, &c).is_empty());
        let mut s = state_of(vec![
            boxed(&[0.4, 0.4], 0.1, 0.15, 3),
            Granule::new(&[0.45, 0.45], 0.055).unwrap(),
        ]);
        assert_eq!(merge_pass(&mut s, &c).len(), 1);
    }

    #[test]
    fn weighted_mean_examples() {
        let a = boxed(&[0.2], 0.05, 0.1, 3);
        let b = boxed(&[0.6], 0.05, 0.1, 1);
        let m = merge_weighted_mean(&a, &b).unwrap();
        assert!((m.center()[0] - 0.3).abs() < 1e-12);
        assert!((m.inner().lower[0] - 0.25).abs() < 1e-12);
        assert_eq!(m.support(), 4);

        let b = boxed(&[0.6], 0.05, 0.1, 3);
        let m = merge_weighted_mean(&a, &b).unwrap();
        assert!((m.center()[0] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn convex_hull_examples() {
        let a = Granule::from_parts(
            vec![0.2],
            Bounds::new(vec![0.1], vec![0.3]).unwrap(),
            Bounds::new(vec![0.05], vec![0.35]).unwrap(),
            1,
            0,
            BTreeMap::new(),
        )
        .unwrap();
        let b = Granule::from_parts(
            vec![0.35],
            Bounds::new(vec![0.2], vec![0.5]).unwrap(),
            Bounds::new(vec![0.1], vec![0.6]).unwrap(),
            2,
            0,
            BTreeMap::new(),
        )
        .unwrap();
        let m = merge_convex_hull(&a, &b).unwrap();
        assert_eq!(m.inner().lower[0], 0.1);
        assert_eq!(m.inner().upper[0], 0.5);
        assert!((m.center()[0] - 0.3).abs() < 1e-12);
        assert_eq!(m.support(), 3);

        let same = merge_convex_hull(&a, &a).unwrap();
        assert_eq!(same.inner(), a.inner());
        assert_eq!(same.outer(), a.outer());
        assert_eq!(same.center(), a.center());

        let big = boxed(&[0.5], 0.2, 0.3, 1);
        let small = boxed(&[0.45], 0.05, 0.1, 1);
        let m = merge_convex_hull(&big, &small).unwrap();
        assert_eq!(m.inner(), big.inner());
        assert_eq!(m.outer(), big.outer());
    }

    #[test]
    fn merge_tallies_sum() {
        let mut a = boxed(&[0.4], 0.05, 0.1, 1);
        let mut b = boxed(&[0.42], 0.05, 0.1, 1);
        a.add_label(1);
        b.add_label(1);
        b.add_label(2);
        let m = merge_convex_hull(&a, &b).unwrap();
        assert_eq!(m.label_tally().get(&1), Some(&2));
        assert_eq!(m.label_tally().get(&2), Some(&1));
        assert_eq!(m.majority_label(), Some(1));
    }

    #[test]
    fn balance_examples() {
        let c = cfg(0.45);
        let mut s = state_of(vec![
            boxed(&[0.3], 0.05, 0.1, 1),
            boxed(&[0.7], 0.15, 0.2, 1),
        ]);
        balance(&mut s, &c);
        let (w0, w1) = (
            s.granules()[0].granule.widths(),
            s.granules()[1].granule.widths(),
        );
        assert!((w0.0[0] - 0.16).abs() < 1e-12);
        assert!((w1.0[0] - 0.24).abs() < 1e-12);
        assert!((w0.1[0] - 0.26).abs() < 1e-12);
        assert!((w1.1[0] - 0.34).abs() < 1e-12);

        let mut s = state_of(vec![
            boxed(&[0.25], 0.125, 0.25, 1),
            boxed(&[0.75], 0.125, 0.25, 1),
        ]);
        let before = s.clone();
        balance(&mut s, &c);
        assert_eq!(s, before);

        let mut s = state_of(vec![boxed(&[0.3], 0.05, 0.1, 1)]);
        let before = s.clone();
        balance(&mut s, &c);
        assert_eq!(s, before);
    }

    #[test]
    fn predict_uses_majority_and_fallback() {
        let mut e = Engine::new(cfg(0.45)).unwrap();
        assert_eq!(e.predict(&[0.5, 0.5]), None);
        e.learn(&[0.2, 0.2], Some(1)).unwrap();
        e.learn(&[0.8, 0.8], Some(2)).unwrap();
        assert_eq!(e.predict(&[0.21, 0.2]), Some(1));
        assert_eq!(e.predict(&[0.7, 0.7]), Some(2));
        assert_eq!(e.predict(&[0.35, 0.3]), Some(1));
    }

    #[test]
    fn config_validation() {
        assert!(EngineConfig::new(0.0, 0.4).is_err());
        assert!(EngineConfig::new(0.05, 1.4).is_err());
        let mut c = cfg(0.4);
        c.alpha = -0.1;
        assert!(c.validate().is_err());
        c.alpha = 0.3;
        c.beta = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn state_from_parts_checks_ids() {
        let g = Granule::new(&[0.5], 0.05).unwrap();
        let entries = vec![
            Entry {
                id: GranuleId(3),
                granule: g.clone(),
            },
            Entry {
                id: GranuleId(1),
                granule: g.clone(),
            },
        ];
        assert!(ModelState::from_parts(entries, 5, 4, vec![], vec![]).is_err());
        let entries = vec![Entry {
            id: GranuleId(4),
            granule: g,
        }];
        assert!(ModelState::from_parts(entries, 5, 4, vec![], vec![]).is_err());
    }
}
