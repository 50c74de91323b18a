//! A second, deliberately naive implementation of the learning rules, kept
//! separate from the engine so the two can be run in lockstep.

#![allow(
    clippy::needless_range_loop,
    clippy::assign_op_pattern,
    clippy::unnecessary_map_or
)]

use std::collections::BTreeMap;

use eix_core::{Engine, EngineConfig, MergeGate, MergeMethod};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Clone, Debug)]
pub struct G {
    pub id: u64,
    pub c: Vec<f64>,
    pub il: Vec<f64>,
    pub iu: Vec<f64>,
    pub ol: Vec<f64>,
    pub ou: Vec<f64>,
    pub n: u64,
    pub tally: BTreeMap<u32, u64>,
}

pub struct Reference {
    pub eps: f64,
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    pub hull: bool,
    pub core_gate: bool,
    pub gs: Vec<G>,
    pub next: u64,
}

fn inside(lo: &[f64], hi: &[f64], x: &[f64]) -> bool {
    (0..x.len()).all(|j| lo[j] < x[j] && x[j] < hi[j])
}

fn cheb(a: &[f64], b: &[f64]) -> f64 {
    let mut m = 0.0;
    for j in 0..a.len() {
        let d = (a[j] - b[j]).abs();
        if d > m {
            m = d;
        }
    }
    m
}

impl Reference {
    pub fn new(cfg: &EngineConfig) -> Self {
        Reference {
            eps: cfg.epsilon,
            rho: cfg.rho,
            alpha: cfg.alpha,
            beta: cfg.beta,
            hull: cfg.merge_method == MergeMethod::ConvexHull,
            core_gate: cfg.merge_gate == MergeGate::CoreOverlap,
            gs: Vec::new(),
            next: 0,
        }
    }

    fn clamp(&self, g: &mut G) {
        for j in 0..g.c.len() {
            let c = g.c[j];
            if g.il[j] > c - self.eps / 2.0 {
                g.il[j] = c - self.eps / 2.0;
            }
            if g.iu[j] < c + self.eps / 2.0 {
                g.iu[j] = c + self.eps / 2.0;
            }
            if g.ol[j] > c - self.eps {
                g.ol[j] = c - self.eps;
            }
            if g.ol[j] > g.il[j] {
                g.ol[j] = g.il[j];
            }
            if g.ou[j] < c + self.eps {
                g.ou[j] = c + self.eps;
            }
            if g.ou[j] < g.iu[j] {
                g.ou[j] = g.iu[j];
            }
        }
    }

    fn nearest(&self, x: &[f64], pick: impl Fn(&G) -> bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, g) in self.gs.iter().enumerate() {
            if pick(g) {
                let d = cheb(&g.c, x);
                if best.map_or(true, |(_, b)| d < b) {
                    best = Some((i, d));
                }
            }
        }
        best.map(|b| b.0)
    }

    fn target(&self, x: &[f64]) -> (Option<usize>, bool) {
        if let Some(i) = self.nearest(x, |g| inside(&g.il, &g.iu, x)) {
            return (Some(i), true);
        }
        let band = |g: &G| inside(&g.ol, &g.ou, x) && !inside(&g.il, &g.iu, x);
        (self.nearest(x, band), false)
    }

    pub fn predict(&self, x: &[f64]) -> Option<u32> {
        let i = match self.target(x).0 {
            Some(i) => i,
            None => self.nearest(x, |_| true)?,
        };
        let tally = &self.gs[i].tally;
        let top = tally.values().copied().max()?;
        let mut winners = tally.iter().filter(|(_, &v)| v == top);
        let first = winners.next()?;
        if winners.next().is_some() {
            None
        } else {
            Some(*first.0)
        }
    }

    pub fn learn(&mut self, x: &[f64], label: Option<u32>) {
        let n = x.len();
        let (t, is_inner) = self.target(x);
        let idx = match t {
            Some(i) if is_inner => {
                let mut g = self.gs[i].clone();
                for j in 0..n {
                    let d0 = self.beta - self.beta * ((g.c[j] - x[j]).abs() / (g.c[j] - g.il[j]));
                    let d = d0.max(0.0).min(self.beta);
                    let il = (1.0 + d) * g.il[j];
                    let ol = (1.0 + d) * g.ol[j];
                    g.iu[j] = g.iu[j] - (il - g.il[j]);
                    g.ou[j] = g.ou[j] - (ol - g.ol[j]);
                    g.il[j] = il;
                    g.ol[j] = ol;
                }
                self.clamp(&mut g);
                let w = (g.n + 1) as f64;
                for j in 0..n {
                    let s = (x[j] - g.c[j]) / w;
                    g.c[j] += s;
                    g.il[j] += s;
                    g.iu[j] += s;
                    g.ol[j] += s;
                    g.ou[j] += s;
                }
                g.n += 1;
                self.gs[i] = g;
                i
            }
            Some(i) => {
                let mut g = self.gs[i].clone();
                for j in 0..n {
                    let (il, iu, ol, ou) = (g.il[j], g.iu[j], g.ol[j], g.ou[j]);
                    if ol <= x[j] && x[j] <= il {
                        let f = if il - ol > 0.0 {
                            self.beta * ((il - x[j]) / (il - ol))
                        } else {
                            0.0
                        };
                        g.il[j] = (1.0 - f) * il;
                        g.ol[j] = (1.0 - f) * ol;
                        g.iu[j] = iu + (il - g.il[j]);
                        g.ou[j] = ou + (ol - g.ol[j]);
                    } else if iu <= x[j] && x[j] <= ou {
                        let f = if ou - iu > 0.0 {
                            -self.beta * ((x[j] - iu) / (ou - iu))
                        } else {
                            0.0
                        };
                        g.iu[j] = (1.0 - f) * iu;
                        g.ou[j] = (1.0 - f) * ou;
                        g.il[j] = il - (g.iu[j] - iu);
                        g.ol[j] = ol - (g.ou[j] - ou);
                    }
                }
                self.clamp(&mut g);
                self.gs[i] = g;
                i
            }
            None => {
                let h = self.eps / 2.0;
                self.gs.push(G {
                    id: self.next,
                    c: x.to_vec(),
                    il: x.iter().map(|v| v - h).collect(),
                    iu: x.iter().map(|v| v + h).collect(),
                    ol: x.iter().map(|v| v - self.eps).collect(),
                    ou: x.iter().map(|v| v + self.eps).collect(),
                    n: 1,
                    tally: BTreeMap::new(),
                });
                self.next += 1;
                self.gs.len() - 1
            }
        };
        if let Some(l) = label {
            *self.gs[idx].tally.entry(l).or_insert(0) += 1;
        }
        self.merge_all();
        self.balance();
    }

    fn merge_all(&mut self) {
        loop {
            let mut best: Option<(usize, usize, f64)> = None;
            for a in 0..self.gs.len() {
                for b in a + 1..self.gs.len() {
                    let (ga, gb) = (&self.gs[a], &self.gs[b]);
                    let d = cheb(&ga.c, &gb.c);
                    let mut ok = d <= self.rho;
                    if self.core_gate {
                        ok = ok && (inside(&ga.il, &ga.iu, &gb.c) || inside(&gb.il, &gb.iu, &ga.c));
                    }
                    if ok && best.map_or(true, |(_, _, bd)| d < bd) {
                        best = Some((a, b, d));
                    }
                }
            }
            let Some((a, b, _)) = best else { return };
            let gb = self.gs.remove(b);
            let ga = self.gs[a].clone();
            let n = ga.c.len();
            let mut m = ga.clone();
            if self.hull {
                for j in 0..n {
                    m.il[j] = ga.il[j].min(gb.il[j]);
                    m.iu[j] = ga.iu[j].max(gb.iu[j]);
                    m.ol[j] = ga.ol[j].min(gb.ol[j]);
                    m.ou[j] = ga.ou[j].max(gb.ou[j]);
                    m.c[j] = (m.il[j] + m.iu[j]) / 2.0;
                }
            } else {
                let w = gb.n as f64 / (ga.n + gb.n) as f64;
                for j in 0..n {
                    m.c[j] = ga.c[j] - w * (ga.c[j] - gb.c[j]);
                    m.il[j] = ga.il[j] - w * (ga.il[j] - gb.il[j]);
                    m.iu[j] = ga.iu[j] - w * (ga.iu[j] - gb.iu[j]);
                    m.ol[j] = ga.ol[j] - w * (ga.ol[j] - gb.ol[j]);
                    m.ou[j] = ga.ou[j] - w * (ga.ou[j] - gb.ou[j]);
                }
            }
            m.n = ga.n + gb.n;
            for (l, v) in gb.tally {
                *m.tally.entry(l).or_insert(0) += v;
            }
            self.clamp(&mut m);
            self.gs[a] = m;
        }
    }

    fn balance(&mut self) {
        if self.gs.is_empty() {
            return;
        }
        let k = self.gs.len() as f64;
        for j in 0..self.gs[0].c.len() {
            let mut si = 0.0;
            let mut so = 0.0;
            for g in &self.gs {
                si += g.iu[j] - g.il[j];
                so += g.ou[j] - g.ol[j];
            }
            let (mi, mo) = (si / k, so / k);
            for g in &mut self.gs {
                let di = self.alpha * (mi - (g.iu[j] - g.il[j]));
                let dout = self.alpha * (mo - (g.ou[j] - g.ol[j]));
                g.ol[j] -= dout;
                g.il[j] -= di;
                g.iu[j] += di;
                g.ou[j] += dout;
            }
        }
        let gs = std::mem::take(&mut self.gs);
        self.gs = gs
            .into_iter()
            .map(|mut g| {
                self.clamp(&mut g);
                g
            })
            .collect();
    }
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Clustered points with occasional uniform outliers, so every branch fires.
pub fn stream(seed: u64, len: usize, dim: usize) -> Vec<(Vec<f64>, Option<u32>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchors: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..dim).map(|_| 0.15 + 0.7 * unit(&mut rng)).collect())
        .collect();
    (0..len)
        .map(|_| {
            let r = unit(&mut rng);
            let x = if r < 0.15 {
                (0..dim).map(|_| unit(&mut rng)).collect()
            } else {
                let a = &anchors[(rng.next_u32() % 4) as usize];
                a.iter()
                    .map(|v| (v + 0.12 * (unit(&mut rng) - 0.5)).clamp(0.0, 1.0))
                    .collect()
            };
            let label = match rng.next_u32() % 5 {
                0 => None,
                1 | 2 => Some(1),
                _ => Some(2),
            };
            (x, label)
        })
        .collect()
}

/// Runs engine and reference side by side over a 500-instance stream and
/// panics on the first difference. Returns the peak granule count and the
/// number of merges seen.
pub fn lockstep(cfg: EngineConfig, seed: u64, dim: usize) -> (usize, usize) {
    let mut engine = Engine::new(cfg).unwrap();
    let mut oracle = Reference::new(&cfg);
    let mut max_k = 0;
    let mut merges = 0;
    for (h, (x, label)) in stream(seed, 500, dim).into_iter().enumerate() {
        assert_eq!(
            engine.predict(&x),
            oracle.predict(&x),
            "prediction at step {}",
            h + 1
        );
        let ev = engine.learn(&x, label).unwrap();
        merges += ev.merges.len();
        oracle.learn(&x, label);
        let ours = engine.state().granules();
        assert_eq!(
            ours.len(),
            oracle.gs.len(),
            "granule count at step {}",
            h + 1
        );
        for (e, g) in ours.iter().zip(&oracle.gs) {
            let q = &e.granule;
            assert_eq!(e.id.0, g.id);
            assert_eq!(q.support(), g.n);
            assert_eq!(q.label_tally(), &g.tally);
            let bits = |v: &[f64]| v.iter().map(|f| f.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(q.center()), bits(&g.c), "center, step {}", h + 1);
            assert_eq!(
                bits(&q.inner().lower),
                bits(&g.il),
                "inner lower, step {}",
                h + 1
            );
            assert_eq!(
                bits(&q.inner().upper),
                bits(&g.iu),
                "inner upper, step {}",
                h + 1
            );
            assert_eq!(
                bits(&q.outer().lower),
                bits(&g.ol),
                "outer lower, step {}",
                h + 1
            );
            assert_eq!(
                bits(&q.outer().upper),
                bits(&g.ou),
                "outer upper, step {}",
                h + 1
            );
        }
        max_k = max_k.max(ours.len());
    }
    (max_k, merges)
}
