use serde::{Deserialize, Serialize};

/// Default SMF tempo when a file carries no Set Tempo event (120 BPM).
pub const DEFAULT_US_PER_QUARTER: u32 = 500_000;

/// Tempo in effect from `time` seconds onward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TempoMark {
    pub time: f64,
    pub bpm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Timebase {
    /// Ticks per quarter note.
    Metrical(u16),
    /// SMPTE frames per second (29 means 29.97 drop-frame) and ticks per frame.
    Timecode { fps: u8, ticks_per_frame: u8 },
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    tick: u64,
    us_per_quarter: u32,
    /// Sum of `ticks * us_per_quarter` over all earlier segments.
    acc: u128,
}

/// Piecewise-constant tick to seconds conversion.
///
/// Accumulation is done in exact integers (tick times microseconds per
/// quarter); floating point only enters at the final division.
#[derive(Debug, Clone)]
pub struct TempoMap {
    timebase: Timebase,
    segments: Vec<Segment>,
}

impl TempoMap {
    /// `changes` are `(tick, microseconds per quarter)`; they need not be sorted.
    pub fn new(timebase: Timebase, mut changes: Vec<(u64, u32)>) -> Self {
        changes.sort_by_key(|c| c.0);
        let mut segments = vec![Segment {
            tick: 0,
            us_per_quarter: DEFAULT_US_PER_QUARTER,
            acc: 0,
        }];
        for (tick, tempo) in changes {
            let tempo = tempo.max(1);
            let last = *segments.last().unwrap();
            if tick == last.tick {
                segments.last_mut().unwrap().us_per_quarter = tempo;
                continue;
            }
            let acc = last.acc + u128::from(tick - last.tick) * u128::from(last.us_per_quarter);
            segments.push(Segment {
                tick,
                us_per_quarter: tempo,
                acc,
            });
        }
        Self { timebase, segments }
    }

    pub fn timebase(&self) -> Timebase {
        self.timebase
    }

    fn segment_for_tick(&self, tick: u64) -> &Segment {
        let idx = self.segments.partition_point(|s| s.tick <= tick);
        &self.segments[idx.saturating_sub(1)]
    }

    pub fn tick_to_seconds(&self, tick: u64) -> f64 {
        match self.timebase {
            Timebase::Metrical(ppq) => {
                let seg = self.segment_for_tick(tick);
                let acc = seg.acc + u128::from(tick - seg.tick) * u128::from(seg.us_per_quarter);
                acc as f64 / (f64::from(ppq) * 1e6)
            }
            Timebase::Timecode { .. } => tick as f64 / self.ticks_per_second_timecode(),
        }
    }

    fn ticks_per_second_timecode(&self) -> f64 {
        match self.timebase {
            Timebase::Timecode {
                fps,
                ticks_per_frame,
            } => {
                let fps = if fps == 29 { 29.97 } else { f64::from(fps) };
                fps * f64::from(ticks_per_frame)
            }
            Timebase::Metrical(_) => unreachable!(),
        }
    }

    /// Nearest tick to `seconds` (inverse of [`tick_to_seconds`](Self::tick_to_seconds)).
    pub fn seconds_to_tick(&self, seconds: f64) -> u64 {
        let seconds = seconds.max(0.0);
        match self.timebase {
            Timebase::Metrical(ppq) => {
                let denom = f64::from(ppq) * 1e6;
                let idx = self
                    .segments
                    .partition_point(|s| s.acc as f64 / denom <= seconds);
                let seg = &self.segments[idx.saturating_sub(1)];
                let seg_start = seg.acc as f64 / denom;
                let ticks = (seconds - seg_start) * denom / f64::from(seg.us_per_quarter);
                seg.tick + ticks.round().max(0.0) as u64
            }
            Timebase::Timecode { .. } => {
                (seconds * self.ticks_per_second_timecode()).round() as u64
            }
        }
    }

    /// Tempo marks in seconds, starting with the segment at tick 0.
    pub fn marks(&self) -> Vec<TempoMark> {
        self.segments
            .iter()
            .map(|s| TempoMark {
                time: self.tick_to_seconds(s.tick),
                bpm: 60e6 / f64::from(s.us_per_quarter),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_tempo() {
        let map = TempoMap::new(Timebase::Metrical(480), vec![(0, 500_000)]);
        assert_eq!(map.tick_to_seconds(480), 0.5);
        assert_eq!(map.tick_to_seconds(960), 1.0);
        assert_eq!(map.seconds_to_tick(0.5), 480);
    }

    #[test]
    fn piecewise_tempo() {
        // 480 ticks at 120 BPM, then 60 BPM.
        let map = TempoMap::new(Timebase::Metrical(480), vec![(0, 500_000), (480, 1_000_000)]);
        assert_eq!(map.tick_to_seconds(480), 0.5);
        assert_eq!(map.tick_to_seconds(720), 1.0);
        assert_eq!(map.seconds_to_tick(1.0), 720);
        assert_eq!(map.seconds_to_tick(0.25), 240);
    }

    #[test]
    fn timecode_base() {
        let map = TempoMap::new(
            Timebase::Timecode {
                fps: 25,
                ticks_per_frame: 40,
            },
            vec![(0, 250_000)],
        );
        assert_eq!(map.tick_to_seconds(1000), 1.0);
        assert_eq!(map.seconds_to_tick(2.0), 2000);
    }
}
