//! ON/OFF packet emission for a single source.

use crate::dists::DistributionSpec;
use crate::model::{BulkSizeLaw, EmissionMode, SourceParams};
use crate::rng::{open_unit, Stream};

/// Mean packet size in bytes; sizes are recorded but do not drive service.
pub const MEAN_PACKET_BYTES: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Emission {
    pub time: f64,
    pub size_bytes: f64,
}

/// Lazily generated emission stream of one source, ending at the horizon.
///
/// Each cycle draws a burst size `L`, emits `L` packets at the peak rate
/// (evenly spaced or with exponential gaps) and then idles for an OFF draw.
#[derive(Debug, Clone)]
pub struct SourceProcess {
    law: BulkSizeLaw,
    off: DistributionSpec,
    mode: EmissionMode,
    gap: f64,
    rng: Stream,
    horizon: f64,
    clock: f64,
    remaining: u64,
    last: f64,
    done: bool,
}

impl SourceProcess {
    pub fn new(params: &SourceParams, law: BulkSizeLaw, rng: Stream, horizon: f64) -> Self {
        SourceProcess {
            law,
            off: params.off_dist,
            mode: params.emission_mode,
            gap: 1.0 / params.lambda_p,
            rng,
            horizon,
            clock: 0.0,
            remaining: 0,
            last: f64::NEG_INFINITY,
            done: false,
        }
    }
}

impl Iterator for SourceProcess {
    type Item = Emission;

    #[inline]
    fn next(&mut self) -> Option<Emission> {
        if self.done {
            return None;
        }
        if self.remaining == 0 {
            self.remaining = self.law.sample(&mut self.rng);
        }
        let mut t = match self.mode {
            EmissionMode::ConstantPeakRate => {
                let t = self.clock;
                self.clock += self.gap;
                t
            }
            EmissionMode::PoissonAtPeakRate => {
                self.clock -= self.gap * open_unit(&mut self.rng).ln();
                self.clock
            }
        };
        self.remaining -= 1;
        if self.remaining == 0 {
            self.clock += self.off.sample(&mut self.rng);
        }
        if t <= self.last {
            t = self.last.next_up();
        }
        if t >= self.horizon {
            self.done = true;
            return None;
        }
        self.last = t;
        let size_bytes = -MEAN_PACKET_BYTES * open_unit(&mut self.rng).ln();
        Some(Emission { time: t, size_bytes })
    }
}

/// All emissions of one source in `[0, horizon)`.
pub fn source_emit(params: &SourceParams, law: BulkSizeLaw, rng: Stream, horizon: f64) -> Vec<Emission> {
    SourceProcess::new(params, law, rng, horizon).collect()
}
