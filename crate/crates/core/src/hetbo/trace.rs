use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "hetero-bo")]
    HeteroBo,
    #[serde(rename = "homo-bo")]
    HomoBo,
    #[serde(rename = "cma-es")]
    CmaEs,
    #[serde(rename = "random")]
    Random,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::HeteroBo, Method::HomoBo, Method::CmaEs, Method::Random];

    pub fn name(self) -> &'static str {
        match self {
            Method::HeteroBo => "hetero-bo",
            Method::HomoBo => "homo-bo",
            Method::CmaEs => "cma-es",
            Method::Random => "random",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("unknown method `{s}`")))
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// 0-based evaluation counter.
    pub eval: usize,
    /// 0 for the initial design, then 1, 2, … per optimisation iteration.
    pub iteration: usize,
    /// Point in raw search coordinates.
    pub x: Vec<f64>,
    pub reward: f64,
    /// Running maximum of `reward`.
    pub best: f64,
    /// The objective failed; `reward` holds the worst value observed.
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningTrace {
    pub method: Method,
    /// Number of leading rows forming the initial design.
    pub initial: usize,
    pub rows: Vec<TraceRow>,
}

/// Row of a reward-per-iteration curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub iteration: usize,
    pub best_so_far: f64,
    /// Reward observed at this iteration; at iteration 0 the worst point of
    /// the initial design, which is where every method is considered to start.
    pub observed: f64,
}

impl TuningTrace {
    pub fn new(method: Method) -> Self {
        Self { method, initial: 0, rows: Vec::new() }
    }

    /// Relabels iterations so the first `initial` rows form iteration 0.
    pub fn with_initial(mut self, initial: usize) -> Self {
        self.initial = initial.min(self.rows.len());
        let init = self.initial;
        for (k, row) in self.rows.iter_mut().enumerate() {
            row.iteration = if k < init { 0 } else { k + 1 - init };
        }
        self
    }

    pub fn iterations(&self) -> usize {
        self.rows.len() - self.initial
    }

    pub fn best(&self) -> Option<&TraceRow> {
        self.rows.iter().reduce(|a, b| if b.reward > a.reward { b } else { a })
    }

    /// Worst row of the initial design.
    pub fn start(&self) -> Option<&TraceRow> {
        self.rows[..self.initial].iter().reduce(|a, b| if b.reward < a.reward { b } else { a })
    }

    /// Best-so-far and observed reward for iterations `0..=iterations()`.
    /// Empty when there is no initial design.
    pub fn curve(&self) -> Vec<CurvePoint> {
        let Some(start) = self.start() else { return Vec::new() };
        let mut out = Vec::with_capacity(self.iterations() + 1);
        out.push(CurvePoint { iteration: 0, best_so_far: self.rows[self.initial - 1].best, observed: start.reward });
        for row in &self.rows[self.initial..] {
            out.push(CurvePoint { iteration: row.iteration, best_so_far: row.best, observed: row.reward });
        }
        out
    }
}

/// Builds a trace while evaluations arrive, substituting the worst observed
/// reward for failures.
#[derive(Debug)]
pub struct Recorder {
    trace: TuningTrace,
    pending: Vec<usize>,
    worst: Option<f64>,
}

impl Recorder {
    pub fn new(method: Method) -> Self {
        Self { trace: TuningTrace::new(method), pending: Vec::new(), worst: None }
    }

    pub fn len(&self) -> usize {
        self.trace.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trace.rows.is_empty()
    }

    /// Records an evaluation; returns the value stored, or `None` while a
    /// failure has no observed reward to stand in for it.
    pub fn record<E>(&mut self, x: Vec<f64>, outcome: core::result::Result<f64, E>) -> Option<f64> {
        let eval = self.trace.rows.len();
        let (reward, failed) = match outcome {
            Ok(r) if r.is_finite() => (Some(r), false),
            _ => (self.worst, true),
        };
        if let Some(r) = reward {
            self.worst = Some(self.worst.map_or(r, |w| w.min(r)));
            for &i in &self.pending {
                self.trace.rows[i].reward = r;
            }
            self.pending.clear();
        } else {
            self.pending.push(eval);
        }
        self.trace.rows.push(TraceRow { eval, iteration: eval + 1, x, reward: reward.unwrap_or(f64::NAN), best: f64::NAN, failed });
        reward
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.trace.rows
    }

    pub fn finish(mut self, initial: usize) -> Result<TuningTrace> {
        if self.worst.is_none() && !self.trace.rows.is_empty() {
            return Err(Error::AllEvaluationsFailed);
        }
        let mut best = f64::NEG_INFINITY;
        for row in &mut self.trace.rows {
            best = best.max(row.reward);
            row.best = best;
        }
        Ok(self.trace.with_initial(initial))
    }
}
