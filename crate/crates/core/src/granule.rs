//! Double-boundary granules and the per-instance update rules.
//!
//! A granule is a pair of nested axis-aligned boxes around a prototype
//! (`center`). Points in the inner box belong fully to the granule; points in
//! the band between the inner and the outer box belong partially. Every update
//! is a pure function returning a new granule, and every update ends with
//! [`Granule::enforce_floors`] so that the ordering chain
//! `outer.lower <= inner.lower <= center <= inner.upper <= outer.upper`
//! and the width floors (`epsilon` inner, `2 * epsilon` outer) always hold.
//!
//! The shrink and expand rules are multiplicative in the bound coordinates,
//! so they assume inputs scaled to `[0, 1]`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Class identifier used only for evaluation bookkeeping.
pub type ClassLabel = u32;

/// Slack used when checking width floors after floating-point updates.
pub const FLOOR_TOLERANCE: f64 = 1e-12;

/// Per-dimension lower and upper limits of one box.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.iter().chain(&upper).any(|v| !v.is_finite()) {
            return Err(Error::InvalidGranule("non-finite bound"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(Error::InvalidGranule("lower bound above upper bound"));
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.upper
            .iter()
            .zip(&self.lower)
            .map(|(u, l)| u - l)
            .collect()
    }

    /// Strict containment, `lower < x < upper` on every axis.
    fn contains_open(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&v, (&l, &u))| l < v && v < u)
    }

    fn translate(&mut self, delta: &[f64]) {
        for ((l, u), d) in self.lower.iter_mut().zip(self.upper.iter_mut()).zip(delta) {
            *l += d;
            *u += d;
        }
    }
}

/// Meta-parameters used by the shrink and expand rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateParams {
    epsilon: f64,
    beta: f64,
}

impl UpdateParams {
    pub const DEFAULT_BETA: f64 = 0.3;

    pub fn new(epsilon: f64, beta: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: beta,
                reason: "must lie in (0, 1)",
            });
        }
        Ok(Self { epsilon, beta })
    }

    pub fn with_epsilon(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, Self::DEFAULT_BETA)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "epsilon",
            value: epsilon,
            reason: "must lie in (0, 0.5]",
        })
    }
}

/// T-norm used to aggregate per-dimension membership degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TNorm {
    #[default]
    Min,
    Product,
}

impl TNorm {
    pub fn combine(self, degrees: impl IntoIterator<Item = f64>) -> f64 {
        match self {
            TNorm::Min => degrees.into_iter().fold(1.0, f64::min),
            TNorm::Product => degrees.into_iter().product(),
        }
    }
}

/// Checks that `x` is a non-empty vector of finite values in `[0, 1]`.
pub fn validate_instance(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::EmptyInstance);
    }
    match x
        .iter()
        .position(|v| !v.is_finite() || *v < 0.0 || *v > 1.0)
    {
        Some(index) => Err(Error::RejectedInstance {
            index,
            value: x[index],
        }),
        None => Ok(()),
    }
}

/// A double-boundary hyper-box granule.
#[derive(Debug, Clone, PartialEq)]
pub struct Granule {
    pub(crate) center: Vec<f64>,
    pub(crate) inner: Bounds,
    pub(crate) outer: Bounds,
    /// Instances absorbed by the inner region.
    pub(crate) support: u64,
    /// Instances that expanded the granule through its outer band. Diagnostic only.
    pub(crate) outer_hits: u64,
    pub(crate) label_tally: BTreeMap<ClassLabel, u64>,
}

impl Granule {
    /// Creates a granule centred on `x` with inner width `epsilon` and outer
    /// width `2 * epsilon` on every axis.
    pub fn new(x: &[f64], epsilon: f64) -> Result<Self> {
        validate_instance(x)?;
        check_epsilon(epsilon)?;
        let half = epsilon / 2.0;
        Ok(Self {
            center: x.to_vec(),
            inner: Bounds {
                lower: x.iter().map(|v| v - half).collect(),
                upper: x.iter().map(|v| v + half).collect(),
            },
            outer: Bounds {
                lower: x.iter().map(|v| v - epsilon).collect(),
                upper: x.iter().map(|v| v + epsilon).collect(),
            },
            support: 1,
            outer_hits: 0,
            label_tally: BTreeMap::new(),
        })
    }

    /// Assembles a granule from stored parts, checking the ordering chain.
    /// Width floors depend on `epsilon` and are checked by [`Granule::check_invariants`].
    pub fn from_parts(
        center: Vec<f64>,
        inner: Bounds,
        outer: Bounds,
        support: u64,
        outer_hits: u64,
        label_tally: BTreeMap<ClassLabel, u64>,
    ) -> Result<Self> {
        let n = center.len();
        if n == 0 {
            return Err(Error::EmptyInstance);
        }
        for d in [inner.dim(), outer.dim()] {
            if d != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: d,
                });
            }
        }
        if support == 0 {
            return Err(Error::InvalidGranule("support must be at least 1"));
        }
        let g = Self {
            center,
            inner,
            outer,
            support,
            outer_hits,
            label_tally,
        };
        if !g.ordering_holds() {
            return Err(Error::InvalidGranule("ordering chain violated"));
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn inner(&self) -> &Bounds {
        &self.inner
    }

    pub fn outer(&self) -> &Bounds {
        &self.outer
    }

    pub fn support(&self) -> u64 {
        self.support
    }

    pub fn outer_hits(&self) -> u64 {
        self.outer_hits
    }

    pub fn label_tally(&self) -> &BTreeMap<ClassLabel, u64> {
        &self.label_tally
    }

    pub fn add_label(&mut self, label: ClassLabel) {
        *self.label_tally.entry(label).or_insert(0) += 1;
    }

    /// Most frequent label; `None` when the tally is empty or the top count is tied.
    pub fn majority_label(&self) -> Option<ClassLabel> {
        let mut best: Option<(ClassLabel, u64)> = None;
        let mut tied = false;
        for (&label, &count) in &self.label_tally {
            match best {
                Some((_, top)) if count == top => tied = true,
                Some((_, top)) if count < top => {}
                _ => {
                    best = Some((label, count));
                    tied = false;
                }
            }
        }
        if tied {
            None
        } else {
            best.map(|(label, _)| label)
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            })
        }
    }

    pub fn contains_inner(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.inner.contains_open(x))
    }

    /// Outer-box containment. Inner points also satisfy it.
    pub fn contains_outer(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.outer.contains_open(x))
    }

    /// Degree of `x_j` on axis `j`: 1 on the closed inner interval, 0 outside the
    /// open outer interval, linear in between.
    pub fn axis_membership(&self, j: usize, x_j: f64) -> f64 {
        let (ol, il) = (self.outer.lower[j], self.inner.lower[j]);
        let (iu, ou) = (self.inner.upper[j], self.outer.upper[j]);
        if x_j >= il && x_j <= iu {
            1.0
        } else if x_j <= ol || x_j >= ou {
            0.0
        } else if x_j < il {
            (x_j - ol) / (il - ol)
        } else {
            (ou - x_j) / (ou - iu)
        }
    }

    pub fn membership(&self, x: &[f64], tnorm: TNorm) -> Result<f64> {
        self.check_dim(x)?;
        Ok(tnorm.combine(
            x.iter()
                .enumerate()
                .map(|(j, &v)| self.axis_membership(j, v)),
        ))
    }

    /// Inner and outer widths per axis.
    pub fn widths(&self) -> (Vec<f64>, Vec<f64>) {
        (self.inner.widths(), self.outer.widths())
    }

    /// Contracts both boxes after an inner-region hit. The closer `x` is to the
    /// center, the stronger the contraction.
    pub fn shrink_on_inner(&self, x: &[f64], params: &UpdateParams) -> Result<Granule> {
        let mut g = self.shrink_unclamped(x, params)?;
        g.enforce_floors(params.epsilon());
        Ok(g)
    }

    /// The contraction of [`Granule::shrink_on_inner`] without restoring the
    /// width floors afterwards.
    pub fn shrink_unclamped(&self, x: &[f64], params: &UpdateParams) -> Result<Granule> {
        if !self.contains_inner(x)? {
            return Err(Error::Contract(
                "shrink_on_inner requires an inner-region instance",
            ));
        }
        let beta = params.beta();
        let mut g = self.clone();
        for (j, &xj) in x.iter().enumerate() {
            let c = self.center[j];
            let il = self.inner.lower[j];
            let ol = self.outer.lower[j];
            let d = shrink_rate(beta, c, il, xj);

            let il_new = (1.0 + d) * il;
            let ol_new = (1.0 + d) * ol;
            g.inner.lower[j] = il_new;
            g.outer.lower[j] = ol_new;
            g.inner.upper[j] = self.inner.upper[j] - (il_new - il);
            g.outer.upper[j] = self.outer.upper[j] - (ol_new - ol);
        }
        Ok(g)
    }

    /// Moves the center and all four bound vectors toward `x` by
    /// `(x - center) / (support + 1)`. Widths are unchanged; the caller owns
    /// the support increment.
    pub fn slide(&self, x: &[f64]) -> Result<Granule> {
        self.check_dim(x)?;
        let weight = (self.support + 1) as f64;
        let delta: Vec<f64> = x
            .iter()
            .zip(&self.center)
            .map(|(xv, c)| (xv - c) / weight)
            .collect();
        let mut g = self.clone();
        for (c, d) in g.center.iter_mut().zip(&delta) {
            *c += d;
        }
        g.inner.translate(&delta);
        g.outer.translate(&delta);
        Ok(g)
    }

    /// Widens both boxes on the axes where `x` falls in the outer band. The
    /// closer `x` is to the outer border, the stronger the expansion. The
    /// center does not move.
    pub fn expand_on_outer(&self, x: &[f64], params: &UpdateParams) -> Result<Granule> {
        let mut g = self.expand_unclamped(x, params)?;
        g.enforce_floors(params.epsilon());
        Ok(g)
    }

    /// The widening of [`Granule::expand_on_outer`] without restoring the
    /// width floors afterwards.
    pub fn expand_unclamped(&self, x: &[f64], params: &UpdateParams) -> Result<Granule> {
        if !self.contains_outer(x)? || self.contains_inner(x)? {
            return Err(Error::Contract(
                "expand_on_outer requires an instance in the outer band",
            ));
        }
        let beta = params.beta();
        let mut g = self.clone();
        for (j, &xj) in x.iter().enumerate() {
            let il = self.inner.lower[j];
            let ol = self.outer.lower[j];
            let iu = self.inner.upper[j];
            let ou = self.outer.upper[j];
            if ol <= xj && xj <= il {
                let f = lower_expansion_rate(beta, ol, il, xj);
                let il_new = (1.0 - f) * il;
                let ol_new = (1.0 - f) * ol;
                g.inner.lower[j] = il_new;
                g.outer.lower[j] = ol_new;
                g.inner.upper[j] = iu + (il - il_new);
                g.outer.upper[j] = ou + (ol - ol_new);
            } else if iu <= xj && xj <= ou {
                let f = upper_expansion_rate(beta, iu, ou, xj);
                let iu_new = (1.0 - f) * iu;
                let ou_new = (1.0 - f) * ou;
                g.inner.upper[j] = iu_new;
                g.outer.upper[j] = ou_new;
                g.inner.lower[j] = il - (iu_new - iu);
                g.outer.lower[j] = ol - (ou_new - ou);
            }
        }
        Ok(g)
    }

    /// Restores the ordering chain and the width floors by pushing bounds
    /// away from the center: every inner bound ends at least `epsilon / 2`
    /// from the center, every outer bound at least `epsilon` from it and
    /// outside the inner bound.
    pub fn enforce_floors(&mut self, epsilon: f64) {
        let half = epsilon / 2.0;
        for j in 0..self.dim() {
            let c = self.center[j];
            let il = self.inner.lower[j].min(c - half);
            let iu = self.inner.upper[j].max(c + half);
            self.inner.lower[j] = il;
            self.inner.upper[j] = iu;
            self.outer.lower[j] = self.outer.lower[j].min(c - epsilon).min(il);
            self.outer.upper[j] = self.outer.upper[j].max(c + epsilon).max(iu);
        }
    }

    pub fn ordering_holds(&self) -> bool {
        (0..self.dim()).all(|j| {
            let chain = [
                self.outer.lower[j],
                self.inner.lower[j],
                self.center[j],
                self.inner.upper[j],
                self.outer.upper[j],
            ];
            chain.iter().all(|v| v.is_finite()) && chain.windows(2).all(|w| w[0] <= w[1])
        })
    }

    /// Ordering chain plus width floors, with [`FLOOR_TOLERANCE`] slack on the floors.
    pub fn check_invariants(&self, epsilon: f64) -> Result<()> {
        if !self.ordering_holds() {
            return Err(Error::InvalidGranule("ordering chain violated"));
        }
        let (w_in, w_out) = self.widths();
        if w_in.iter().any(|w| *w < epsilon - FLOOR_TOLERANCE) {
            return Err(Error::InvalidGranule("inner width below epsilon"));
        }
        if w_out.iter().any(|w| *w < 2.0 * epsilon - FLOOR_TOLERANCE) {
            return Err(Error::InvalidGranule("outer width below 2 * epsilon"));
        }
        if self.support == 0 {
            return Err(Error::InvalidGranule("support must be at least 1"));
        }
        Ok(())
    }
}

/// Contraction factor in `[0, beta]`: `beta` at the center, 0 at the inner border.
pub fn shrink_rate(beta: f64, center: f64, inner_lower: f64, x: f64) -> f64 {
    let d = beta - beta * ((center - x).abs() / (center - inner_lower));
    d.clamp(0.0, beta)
}

/// Expansion factor in `[0, beta]` for an instance below the inner interval.
pub fn lower_expansion_rate(beta: f64, outer_lower: f64, inner_lower: f64, x: f64) -> f64 {
    let span = inner_lower - outer_lower;
    if span > 0.0 {
        beta * ((inner_lower - x) / span)
    } else {
        0.0
    }
}

/// Expansion factor in `[-beta, 0]` for an instance above the inner interval.
pub fn upper_expansion_rate(beta: f64, inner_upper: f64, outer_upper: f64, x: f64) -> f64 {
    let span = outer_upper - inner_upper;
    if span > 0.0 {
        -beta * ((x - inner_upper) / span)
    } else {
        0.0
    }
}
