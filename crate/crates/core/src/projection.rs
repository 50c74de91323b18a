//! Axis projections of granules into type-1 and interval type-2 membership
//! functions, and a one-rule-per-granule rule base.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::engine::{GranuleId, ModelState};
use crate::error::{Error, Result};
use crate::granule::{ClassLabel, Granule};

/// Trapezoid with support `[a, d]` and core `[b, c]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidMf {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl TrapezoidMf {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let ordered = a <= b && b <= c && c <= d;
        if !ordered || ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGranule(
                "trapezoid requires finite a <= b <= c <= d",
            ));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_mf(self, x)
    }

    pub fn area(&self) -> f64 {
        ((self.d - self.a) + (self.c - self.b)) / 2.0
    }
}

pub fn eval_mf(m: &TrapezoidMf, x: f64) -> f64 {
    if x >= m.b && x <= m.c {
        1.0
    } else if x <= m.a || x >= m.d {
        0.0
    } else if x < m.b {
        (x - m.a) / (m.b - m.a)
    } else {
        (m.d - x) / (m.d - m.c)
    }
}

/// Interval type-2 set bounded by a lower and an upper trapezoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Type2Mf {
    pub lower: TrapezoidMf,
    pub upper: TrapezoidMf,
}

impl Type2Mf {
    /// Requires the lower set to sit under the upper one: its support and its
    /// ramps lie inside the upper support and core.
    pub fn new(lower: TrapezoidMf, upper: TrapezoidMf) -> Result<Self> {
        let nested =
            upper.a <= lower.a && upper.b <= lower.b && lower.c <= upper.c && lower.d <= upper.d;
        if !nested {
            return Err(Error::InvalidGranule(
                "lower membership function escapes the upper one",
            ));
        }
        Ok(Self { lower, upper })
    }

    pub fn fou_area(&self) -> f64 {
        fou_area(self)
    }
}

/// Area of the footprint of uncertainty, `area(upper) - area(lower)`.
pub fn fou_area(m: &Type2Mf) -> f64 {
    m.upper.area() - m.lower.area()
}

fn check_axis(g: &Granule, j: usize) -> Result<()> {
    if j < g.dim() {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange {
            index: j,
            dim: g.dim(),
        })
    }
}

/// Outer bounds give the support, inner bounds the core.
pub fn project_type1(g: &Granule, j: usize) -> Result<TrapezoidMf> {
    check_axis(g, j)?;
    TrapezoidMf::new(
        g.outer().lower[j],
        g.inner().lower[j],
        g.inner().upper[j],
        g.outer().upper[j],
    )
}

/// Upper set is the type-1 trapezoid; the lower set is a triangle on the
/// inner interval peaking at the center.
pub fn project_type2(g: &Granule, j: usize) -> Result<Type2Mf> {
    let upper = project_type1(g, j)?;
    let c = g.center()[j];
    let lower = TrapezoidMf::new(g.inner().lower[j], c, c, g.inner().upper[j])?;
    Type2Mf::new(lower, upper)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Type1,
    Type2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttributeMf {
    Type2(Type2Mf),
    Type1(TrapezoidMf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub granule_id: GranuleId,
    pub label: Option<ClassLabel>,
    pub mfs: Vec<AttributeMf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleBase {
    pub kind: RuleKind,
    pub n: usize,
    pub rules: Vec<Rule>,
}

/// One rule per granule, in id order, labelled by the granule's majority class.
pub fn export_rulebase(state: &ModelState, kind: RuleKind) -> Result<RuleBase> {
    let n = state.dim().unwrap_or(0);
    let rules = state
        .granules()
        .iter()
        .map(|e| {
            let mfs = (0..n)
                .map(|j| match kind {
                    RuleKind::Type1 => project_type1(&e.granule, j).map(AttributeMf::Type1),
                    RuleKind::Type2 => project_type2(&e.granule, j).map(AttributeMf::Type2),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Rule {
                granule_id: e.id,
                label: e.granule.majority_label(),
                mfs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RuleBase { kind, n, rules })
}
