//! Timed prequential runs and their CSV outputs.

use std::fmt::Write as _;
use std::time::Instant;

use eix_core::bench::{Prequential, StageMetrics};
use eix_core::{Engine, EngineConfig, RunMetrics, StreamInstance};

use crate::error::Result;

/// Test-then-train over `stream`, recording wall time per stage and in total.
pub fn timed_run(
    config: EngineConfig,
    stream: &[StreamInstance],
    stage_split: Option<u64>,
) -> Result<(RunMetrics, Engine)> {
    let mut run = Prequential::new(config, stage_split)?;
    let mut stage_time = Vec::<Option<f64>>::new();
    let start = Instant::now();
    for inst in stream {
        let t0 = Instant::now();
        run.step(inst)?;
        let stage = run.stage_of(inst.h);
        if stage_time.len() <= stage {
            stage_time.resize(stage + 1, None);
        }
        *stage_time[stage].get_or_insert(0.0) += t0.elapsed().as_secs_f64();
    }
    let wall = start.elapsed().as_secs_f64();
    let (mut metrics, engine) = run.finish();
    // Empty stages were dropped by `finish`; keep the times of the populated ones.
    let populated = stage_time.into_iter().flatten();
    for (s, t) in metrics.stages.iter_mut().zip(populated) {
        s.time_s = t;
    }
    metrics.wall_time_s = wall;
    Ok((metrics, engine))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn summary_row(out: &mut String, name: &str, s: &StageMetrics) {
    let c = &s.confusion;
    let _ = writeln!(
        out,
        "{name},{},{},{},{},{},{},{},{},{},{},{},{}",
        s.first_h,
        s.last_h,
        s.steps,
        opt(s.accuracy),
        s.avg_granules,
        c.tp,
        c.fp,
        c.tn,
        c.fn_,
        s.creations,
        s.rejected,
        s.time_s
    );
}

/// Per-step rows `h,k,pred,true,correct,cum_acc`, a blank line, then one
/// summary row per stage plus an `all` row.
pub fn metrics_csv(m: &RunMetrics) -> String {
    let mut out = String::from("h,k,pred,true,correct,cum_acc\n");
    for s in &m.steps {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.h,
            s.k,
            opt(s.predicted),
            opt(s.truth),
            opt(s.correct.map(u8::from)),
            opt(s.cum_acc)
        );
    }
    out.push('\n');
    out.push_str(
        "stage,h_start,h_end,steps,acc,avg_granules,tp,fp,tn,fn,creations,rejected,time_s\n",
    );
    for (i, s) in m.stages.iter().enumerate() {
        summary_row(&mut out, &(i + 1).to_string(), s);
    }
    summary_row(&mut out, "all", &m.overall());
    out
}

/// Samples the unit square on a `resolution x resolution` lattice and records
/// the predicted label and the highest granule membership at each node.
/// Only meaningful for two-attribute models.
pub fn boundary_csv(engine: &Engine, resolution: usize) -> String {
    let mut out = String::from("x1,x2,label,membership\n");
    let steps = resolution.max(2) - 1;
    for i in 0..=steps {
        for j in 0..=steps {
            let x = [i as f64 / steps as f64, j as f64 / steps as f64];
            let membership = engine
                .state()
                .granules()
                .iter()
                .filter_map(|e| e.granule.membership(&x, engine.config().tnorm).ok())
                .fold(0.0, f64::max);
            let _ = writeln!(
                out,
                "{},{},{},{}",
                x[0],
                x[1],
                opt(engine.predict(&x)),
                membership
            );
        }
    }
    out
}
