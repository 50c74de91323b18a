//! Rotating twin-Gaussians stream and prequential (test-then-train) evaluation.
//!
//! Two isotropic Gaussians sit on a circle of radius √2 around (5, 5), on
//! opposite sides. During the first stage they are fixed; afterwards both
//! rotate counterclockwise by `phi_deg` per step. Classes alternate
//! (odd `h` draws class 1, even `h` class 2) and samples are mapped into the
//! unit square by dividing by `scale`.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::engine::{Engine, EngineConfig, EventKind};
use crate::error::{Error, Result};
use crate::granule::ClassLabel;

/// One rotating Gaussian source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub theta0_deg: f64,
    pub sigma: f64,
    pub pivot: [f64; 2],
    pub radius: f64,
}

impl GaussianSpec {
    pub fn center(&self, theta_deg: f64) -> [f64; 2] {
        let t = theta_deg.to_radians();
        [
            self.pivot[0] + self.radius * libm::cos(t),
            self.pivot[1] + self.radius * libm::sin(t),
        ]
    }
}

/// Order in which the two sources emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassSchedule {
    /// Class 1 on odd steps, class 2 on even steps.
    #[default]
    Alternate,
    /// A fair coin per step, drawn from the stream's generator.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwinGaussians {
    /// Sources for class 1 and class 2.
    pub classes: [GaussianSpec; 2],
    pub steps: u64,
    /// Rotation per step in degrees, applied for `h > drift_start`.
    pub phi_deg: f64,
    pub drift_start: u64,
    /// Raw coordinates are divided by this value.
    pub scale: f64,
    #[serde(default)]
    pub schedule: ClassSchedule,
}

impl Default for TwinGaussians {
    fn default() -> Self {
        let source = |theta0_deg| GaussianSpec {
            theta0_deg,
            sigma: 0.8,
            pivot: [5.0, 5.0],
            radius: core::f64::consts::SQRT_2,
        };
        Self {
            // Class 1 starts at (4, 4), class 2 at (6, 6).
            classes: [source(225.0), source(45.0)],
            steps: 400,
            phi_deg: 0.45,
            drift_start: 200,
            scale: 10.0,
            schedule: ClassSchedule::Alternate,
        }
    }
}

impl TwinGaussians {
    /// Closed-form source angle at step `h`.
    pub fn theta_at(&self, class_index: usize, h: u64) -> f64 {
        self.classes[class_index].theta0_deg
            + self.phi_deg * h.saturating_sub(self.drift_start) as f64
    }

    pub fn class_at(h: u64) -> ClassLabel {
        if h % 2 == 1 {
            1
        } else {
            2
        }
    }
}

/// One labelled (or unlabelled) instance of a stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamInstance {
    pub h: u64,
    pub x: Vec<f64>,
    pub label: Option<ClassLabel>,
}

/// Generates the stream deterministically from `seed`. Samples are not clipped.
pub fn gen_stream(spec: &TwinGaussians, seed: u64) -> Result<Vec<StreamInstance>> {
    if spec.scale.is_nan() || spec.scale <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "scale",
            value: spec.scale,
            reason: "must be positive",
        });
    }
    let noises = spec
        .classes
        .iter()
        .map(|c| {
            if c.sigma > 0.0 {
                Normal::new(0.0, c.sigma).map_err(|_| Error::InvalidParameter {
                    name: "sigma",
                    value: c.sigma,
                    reason: "must be positive and finite",
                })
            } else {
                Err(Error::InvalidParameter {
                    name: "sigma",
                    value: c.sigma,
                    reason: "must be positive",
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta = [spec.classes[0].theta0_deg, spec.classes[1].theta0_deg];
    let mut out = Vec::with_capacity(spec.steps as usize);
    for h in 1..=spec.steps {
        let phi = if h > spec.drift_start {
            spec.phi_deg
        } else {
            0.0
        };
        for t in &mut theta {
            *t += phi;
        }
        let label = match spec.schedule {
            ClassSchedule::Alternate => TwinGaussians::class_at(h),
            ClassSchedule::Random => 1 + (rng.next_u32() & 1),
        };
        let i = (label - 1) as usize;
        let center = spec.classes[i].center(theta[i]);
        let x = center
            .iter()
            .map(|c| (c + noises[i].sample(&mut rng)) / spec.scale)
            .collect();
        out.push(StreamInstance {
            h,
            x,
            label: Some(label),
        });
    }
    Ok(out)
}

/// Binary confusion matrix against a designated positive class. A missing
/// prediction counts as wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn record(
        &mut self,
        positive: ClassLabel,
        truth: ClassLabel,
        predicted: Option<ClassLabel>,
    ) {
        let correct = predicted == Some(truth);
        match (truth == positive, correct) {
            (true, true) => self.tp += 1,
            (true, false) => self.fn_ += 1,
            (false, true) => self.tn += 1,
            (false, false) => self.fp += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// `(TP + TN) / (TP + FP + TN + FN) * 100`, or `None` when empty.
    pub fn accuracy(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| (self.tp + self.tn) as f64 / total as f64 * 100.0)
    }

    fn add(&mut self, other: &Confusion) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.tn += other.tn;
        self.fn_ += other.fn_;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageMetrics {
    pub first_h: u64,
    pub last_h: u64,
    pub steps: u64,
    pub confusion: Confusion,
    pub accuracy: Option<f64>,
    /// Mean granule count after each step of the stage.
    pub avg_granules: f64,
    pub creations: u64,
    /// Instances predicted on but refused by the learner.
    pub rejected: u64,
    /// Filled in by callers that can read a clock.
    pub time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub h: u64,
    pub k: usize,
    pub predicted: Option<ClassLabel>,
    pub truth: Option<ClassLabel>,
    pub correct: Option<bool>,
    /// Accuracy in percent over labelled instances seen so far.
    pub cum_acc: Option<f64>,
    /// `None` when the learner rejected the instance.
    pub event: Option<EventKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub stages: Vec<StageMetrics>,
    pub steps: Vec<StepRecord>,
    pub wall_time_s: f64,
}

impl RunMetrics {
    pub fn granule_count_series(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.k).collect()
    }

    /// All stages folded into one.
    pub fn overall(&self) -> StageMetrics {
        let mut confusion = Confusion::default();
        let (mut steps, mut creations, mut rejected) = (0, 0, 0);
        let (mut k_sum, mut time_s) = (0.0, 0.0);
        for s in &self.stages {
            confusion.add(&s.confusion);
            steps += s.steps;
            creations += s.creations;
            rejected += s.rejected;
            k_sum += s.avg_granules * s.steps as f64;
            time_s += s.time_s;
        }
        StageMetrics {
            first_h: self.stages.first().map_or(0, |s| s.first_h),
            last_h: self.stages.last().map_or(0, |s| s.last_h),
            steps,
            confusion,
            accuracy: confusion.accuracy(),
            avg_granules: if steps > 0 { k_sum / steps as f64 } else { 0.0 },
            creations,
            rejected,
            time_s,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct StageAcc {
    first_h: u64,
    last_h: u64,
    steps: u64,
    confusion: Confusion,
    k_sum: u64,
    creations: u64,
    rejected: u64,
}

/// Incremental test-then-train driver around an [`Engine`].
#[derive(Debug, Clone)]
pub struct Prequential {
    engine: Engine,
    positive: ClassLabel,
    stage_split: Option<u64>,
    stages: Vec<StageAcc>,
    steps: Vec<StepRecord>,
    labeled: u64,
    correct: u64,
}

impl Prequential {
    /// Instances with `h <= stage_split` form the first stage, the rest the second.
    pub fn new(config: EngineConfig, stage_split: Option<u64>) -> Result<Self> {
        Ok(Self {
            engine: Engine::new(config)?,
            positive: 1,
            stage_split,
            stages: Vec::new(),
            steps: Vec::new(),
            labeled: 0,
            correct: 0,
        })
    }

    pub fn with_positive_class(mut self, label: ClassLabel) -> Self {
        self.positive = label;
        self
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    /// Index of the stage `h` belongs to.
    pub fn stage_of(&self, h: u64) -> usize {
        match self.stage_split {
            Some(split) if h > split => 1,
            _ => 0,
        }
    }

    /// Predicts on the instance, then learns from it. Instances the learner
    /// rejects for their values are still scored; other errors propagate.
    pub fn step(&mut self, inst: &StreamInstance) -> Result<&StepRecord> {
        let predicted = self.engine.predict(&inst.x);
        let event = match self.engine.learn(&inst.x, inst.label) {
            Ok(ev) => Some(ev.kind),
            Err(Error::RejectedInstance { .. }) => None,
            Err(e) => return Err(e),
        };
        let k = self.engine.state().len();

        let stage = self.stage_of(inst.h);
        while self.stages.len() <= stage {
            self.stages.push(StageAcc::default());
        }
        let acc = &mut self.stages[stage];
        if acc.steps == 0 {
            acc.first_h = inst.h;
        }
        acc.last_h = inst.h;
        acc.steps += 1;
        acc.k_sum += k as u64;
        match event {
            Some(EventKind::Created) => acc.creations += 1,
            None => acc.rejected += 1,
            _ => {}
        }
        let correct = inst.label.map(|truth| {
            acc.confusion.record(self.positive, truth, predicted);
            predicted == Some(truth)
        });
        if let Some(c) = correct {
            self.labeled += 1;
            self.correct += c as u64;
        }
        let cum_acc = (self.labeled > 0).then(|| self.correct as f64 / self.labeled as f64 * 100.0);
        self.steps.push(StepRecord {
            h: inst.h,
            k,
            predicted,
            truth: inst.label,
            correct,
            cum_acc,
            event,
        });
        Ok(self.steps.last().expect("just pushed"))
    }

    pub fn finish(self) -> (RunMetrics, Engine) {
        let stages = self
            .stages
            .into_iter()
            .filter(|s| s.steps > 0)
            .map(|s| StageMetrics {
                first_h: s.first_h,
                last_h: s.last_h,
                steps: s.steps,
                confusion: s.confusion,
                accuracy: s.confusion.accuracy(),
                avg_granules: s.k_sum as f64 / s.steps as f64,
                creations: s.creations,
                rejected: s.rejected,
                time_s: 0.0,
            })
            .collect();
        (
            RunMetrics {
                stages,
                steps: self.steps,
                wall_time_s: 0.0,
            },
            self.engine,
        )
    }
}

/// Runs a fully labelled stream test-then-train.
pub fn prequential_run(
    config: EngineConfig,
    stream: &[StreamInstance],
    stage_split: Option<u64>,
) -> Result<RunMetrics> {
    if let Some(inst) = stream.iter().find(|i| i.label.is_none()) {
        return Err(Error::Unlabeled { h: inst.h });
    }
    let mut run = Prequential::new(config, stage_split)?;
    for inst in stream {
        run.step(inst)?;
    }
    Ok(run.finish().0)
}

/// One line of a parameter sweep, averaged over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub rho: f64,
    /// 1-based stage number.
    pub stage: usize,
    pub acc: f64,
    pub avg_granules: f64,
    pub time_s: f64,
}

/// Averages per-stage accuracy, granule count and time over several runs of
/// the same cell. Stages missing from some runs average over the runs that have them.
pub fn summarize_cell(epsilon: f64, rho: f64, runs: &[RunMetrics]) -> Vec<SweepRow> {
    let n_stages = runs.iter().map(|r| r.stages.len()).max().unwrap_or(0);
    (0..n_stages)
        .map(|i| {
            let stages: Vec<&StageMetrics> = runs.iter().filter_map(|r| r.stages.get(i)).collect();
            let m = stages.len() as f64;
            let mean =
                |f: &dyn Fn(&StageMetrics) -> f64| stages.iter().map(|s| f(s)).sum::<f64>() / m;
            SweepRow {
                epsilon,
                rho,
                stage: i + 1,
                acc: mean(&|s| s.accuracy.unwrap_or(0.0)),
                avg_granules: mean(&|s| s.avg_granules),
                time_s: mean(&|s| s.time_s),
            }
        })
        .collect()
}
