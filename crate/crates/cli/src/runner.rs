//! Running totals over a stream for each engine selection.

use anyhow::{anyhow, bail, Result};
use quadcount::engine::LayeredEngine;
use quadcount::graph::{GeneralGraph, GeneralUpdate, LayeredGraph, MatrixId, UpdateEvent};
use quadcount::main_engine::{MainConfig, MainEngine};
use quadcount::metrics::Metrics;
use quadcount::naive::{LayeredNaive, NaiveEngine};
use quadcount::oracle;
use quadcount::params::thresholds_for;
use quadcount::reduction::{FourCopyCounter, GeneralCounter};
use quadcount::stream::Stream;
use quadcount::warmup::{WarmupConfig, WarmupLayered};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EngineKind {
    Naive,
    Warmup,
    Main,
    Oracle,
}

/// Work counters summed over every engine copy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Snapshot {
    pub ops: u64,
    pub backlog: u64,
    pub rebuilds: u64,
    pub deadline_misses: u64,
    pub cap_violations: u64,
    pub max_steady_ops: u64,
    pub transitions: u64,
    pub phases: u64,
}

impl Snapshot {
    fn add(&mut self, m: &Metrics) {
        self.ops += m.ops;
        self.backlog += m.job_backlog;
        self.rebuilds += m.rebuilds;
        self.deadline_misses += m.deadline_misses;
        self.cap_violations += m.cap_violations;
        self.max_steady_ops = self.max_steady_ops.max(m.max_steady_ops);
        self.transitions += m.transitions_committed;
        self.phases += m.phases;
    }

    pub fn render(&self) -> String {
        format!(
            "ops={}\njob_backlog={}\nrebuilds={}\ndeadline_misses={}\ncap_violations={}\nmax_steady_ops={}\ntransitions={}\nphases={}\n",
            self.ops,
            self.backlog,
            self.rebuilds,
            self.deadline_misses,
            self.cap_violations,
            self.max_steady_ops,
            self.transitions,
            self.phases
        )
    }
}

/// A running 4-cycle total fed one stream update at a time.
pub trait Counter {
    /// Applies update `i`; returns the running total.
    fn step(&mut self, i: usize) -> quadcount::Result<i64>;
    fn snapshot(&self) -> Snapshot;
    fn layered_graph(&self) -> Option<&LayeredGraph> {
        None
    }
}

struct GeneralNaive(NaiveEngine, Vec<GeneralUpdate>);
struct GeneralMain(GeneralCounter<MainEngine>, Vec<GeneralUpdate>);
struct GeneralOracle(GeneralGraph, Vec<GeneralUpdate>);
struct Layered<E>(FourCopyCounter<E>, Vec<UpdateEvent>);
struct LayeredOracle(LayeredGraph, Vec<UpdateEvent>);

/// The warm-up engine alone: D updates query it, B updates add the cycles
/// through the frozen A, C and the current D.
struct WarmupTotal {
    engine: WarmupLayered,
    events: Vec<UpdateEvent>,
    total: i64,
}

impl Counter for GeneralNaive {
    fn step(&mut self, i: usize) -> quadcount::Result<i64> {
        self.0.apply(&self.1[i])?;
        Ok(self.0.total())
    }
    fn snapshot(&self) -> Snapshot {
        let mut s = Snapshot::default();
        s.add(self.0.metrics());
        s
    }
}

impl Counter for GeneralMain {
    fn step(&mut self, i: usize) -> quadcount::Result<i64> {
        self.0.apply(&self.1[i])?;
        Ok(self.0.total())
    }
    fn snapshot(&self) -> Snapshot {
        let mut s = Snapshot::default();
        s.add(self.0.engine().metrics());
        s
    }
}

impl Counter for GeneralOracle {
    fn step(&mut self, i: usize) -> quadcount::Result<i64> {
        self.0.apply(&self.1[i])?;
        Ok(oracle::brute_4cycles_general(&self.0) as i64)
    }
    fn snapshot(&self) -> Snapshot {
        Snapshot::default()
    }
}

impl<E: LayeredEngine> Counter for Layered<E> {
    fn step(&mut self, i: usize) -> quadcount::Result<i64> {
        self.0.apply(&self.1[i])?;
        Ok(self.0.total())
    }
    fn snapshot(&self) -> Snapshot {
        let mut s = Snapshot::default();
        for c in self.0.copies() {
            s.add(c.metrics());
        }
        s
    }
    fn layered_graph(&self) -> Option<&LayeredGraph> {
        Some(self.0.copies()[0].graph())
    }
}

impl Counter for LayeredOracle {
    fn step(&mut self, i: usize) -> quadcount::Result<i64> {
        self.0.apply(&self.1[i])?;
        Ok(oracle::brute_layered_4cycles(&self.0) as i64)
    }
    fn snapshot(&self) -> Snapshot {
        Snapshot::default()
    }
    fn layered_graph(&self) -> Option<&LayeredGraph> {
        Some(&self.0)
    }
}

impl Counter for WarmupTotal {
    fn step(&mut self, i: usize) -> quadcount::Result<i64> {
        let e = self.events[i];
        let s = e.op.sign();
        self.engine.graph().check(&e)?;
        let delta = match e.matrix {
            MatrixId::B => s * self.engine.b_delta(e.x, e.y),
            // D holds (layer 4, layer 1)
            MatrixId::D => s * self.engine.query(e.y, e.x)?,
            _ => 0,
        };
        self.engine.apply(&e)?;
        self.total += delta;
        Ok(self.total)
    }
    fn snapshot(&self) -> Snapshot {
        let mut s = Snapshot::default();
        s.add(self.engine.metrics());
        s
    }
    fn layered_graph(&self) -> Option<&LayeredGraph> {
        Some(self.engine.graph())
    }
}

pub fn build(kind: EngineKind, stream: Stream, main: &MainConfig) -> Result<Box<dyn Counter>> {
    let new_main = || MainEngine::new(main.clone()).map_err(|e| anyhow!("main engine: {e}"));
    Ok(match (kind, stream) {
        (EngineKind::Naive, Stream::General(v)) => Box::new(GeneralNaive(NaiveEngine::new(), v)),
        (EngineKind::Main, Stream::General(v)) => Box::new(GeneralMain(GeneralCounter::new(new_main()?), v)),
        (EngineKind::Oracle, Stream::General(v)) => Box::new(GeneralOracle(GeneralGraph::new(), v)),
        (EngineKind::Warmup, Stream::General(_)) => bail!("the warm-up engine needs --mode layered"),
        (EngineKind::Naive, Stream::Layered(v)) => Box::new(Layered(FourCopyCounter::new(|_| LayeredNaive::new()), v)),
        (EngineKind::Main, Stream::Layered(v)) => {
            let mut copies = Vec::new();
            for _ in 0..4 {
                copies.push(new_main()?);
            }
            let mut it = copies.into_iter();
            Box::new(Layered(FourCopyCounter::new(|_| it.next().expect("four copies")), v))
        }
        (EngineKind::Oracle, Stream::Layered(v)) => Box::new(LayeredOracle(LayeredGraph::new(), v)),
        (EngineKind::Warmup, Stream::Layered(v)) => {
            let a_c = v.iter().filter(|e| matches!(e.matrix, MatrixId::A | MatrixId::C)).count().max(1) as u64;
            let th = thresholds_for(a_c.max(quadcount::params::bootstrap_minimum(&main.params)), &main.params)
                .map_err(|e| anyhow!("warm-up thresholds: {e}"))?;
            let engine = WarmupLayered::new(WarmupConfig::from_thresholds(&th));
            Box::new(WarmupTotal { engine, events: v, total: 0 })
        }
    })
}
