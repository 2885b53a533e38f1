use std::time::Instant;

use crate::error::Result;
use crate::trace::{Observer, RunTrace, Termination, TraceHeader, TraceRow};

/// Shared run loop: steps until the iteration cap or time limit, recording
/// every `record_every` iterations plus the final state.
pub(crate) struct Drive<'a, 'b> {
    pub max_iters: usize,
    pub time_limit_s: Option<f64>,
    pub record_every: usize,
    pub observers: &'a mut [&'b mut dyn Observer],
}

impl Drive<'_, '_> {
    pub fn run<S>(
        self,
        header: TraceHeader,
        mut state: S,
        mut step: impl FnMut(&mut S) -> Result<()>,
        row: impl Fn(&S, usize, f64) -> TraceRow,
    ) -> RunTrace {
        let start = Instant::now();
        let mut trace = RunTrace::new(header);
        let every = self.record_every.max(1);
        let observers = self.observers;
        let mut push = |trace: &mut RunTrace, r: TraceRow| {
            for o in observers.iter_mut() {
                o.on_row(&r);
            }
            trace.rows.push(r);
        };
        push(&mut trace, row(&state, 0, start.elapsed().as_secs_f64()));
        let mut t = 0;
        let mut recorded = 0;
        let mut termination = Termination::MaxIters;
        while t < self.max_iters {
            if let Some(limit) = self.time_limit_s {
                if start.elapsed().as_secs_f64() >= limit {
                    termination = Termination::TimeLimit;
                    break;
                }
            }
            if let Err(e) = step(&mut state) {
                termination = Termination::Failed(e.to_string());
                break;
            }
            t += 1;
            if t % every == 0 || t == self.max_iters {
                push(&mut trace, row(&state, t, start.elapsed().as_secs_f64()));
                recorded = t;
            }
        }
        if recorded != t {
            push(&mut trace, row(&state, t, start.elapsed().as_secs_f64()));
        }
        trace.header.termination = termination;
        trace
    }
}
