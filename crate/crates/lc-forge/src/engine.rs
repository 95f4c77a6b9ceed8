//! Level-crossing ADC emulation over uniformly sampled signals, and linear
//! reconstruction of a uniform signal from the recorded events.
//!
//! Each level owns two Schmitt sub-levels at `level ± hysteresis/2`; only the
//! active sub-level is sensitive, and a crossing deactivates it and arms the
//! sibling. Between consecutive samples the signal path is the straight
//! segment joining them, so crossing times come from inverting the linear
//! interpolation. With zero hysteresis the automaton degenerates to plain
//! level crossing with an arming rule: a level cannot re-fire without the
//! path leaving it, so a tangent touch emits at most one event.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LcError, Result};
use crate::levels::LevelScheme;
use crate::signal::UniformSignal;

/// One recorded crossing. `amplitude` is the nominal level value (the
/// quantized output of a physical LC-ADC), not the crossed sub-level. Times
/// are signal-local seconds from the first sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub amplitude: f64,
    pub level_index: usize,
}

/// Time-ordered events plus the provenance needed by the compression metrics
/// (events recorded vs. uniform samples replaced).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventStream {
    pub events: Vec<Event>,
    pub source_duration: f64,
    pub source_sample_count: usize,
}

impl EventStream {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Per-level Schmitt trigger state.
#[derive(Clone, Copy)]
struct Trigger {
    upper: f64,
    lower: f64,
    upper_active: bool,
}

impl Trigger {
    fn new(level: f64, hysteresis: f64, first_sample: f64) -> Self {
        let upper = level + hysteresis / 2.0;
        let lower = level - hysteresis / 2.0;
        // Arm the sub-level on the opposite side of the starting sample;
        // inside the band the upper one is active.
        Trigger {
            upper,
            lower,
            upper_active: first_sample <= upper,
        }
    }

    fn active(&self) -> f64 {
        if self.upper_active {
            self.upper
        } else {
            self.lower
        }
    }
}

/// True when the straight path from `a` to `b` passes through `s`, counting
/// arrival (`b == s`) but not departure (`a == s`). Strictness on the start
/// side prevents double fire on plateaus and implements the arming rule.
#[inline]
fn crosses(a: f64, b: f64, s: f64) -> bool {
    (a < s && b >= s) || (a > s && b <= s)
}

/// Emulates the LC-ADC over `signal` and returns the event stream.
pub fn lc_sample(signal: &UniformSignal, scheme: &LevelScheme) -> Result<EventStream> {
    if signal.is_empty() {
        return Err(LcError::Argument("cannot LC-sample an empty signal".into()));
    }
    let period = 1.0 / signal.sample_rate;
    let samples = &signal.samples;
    let mut triggers: Vec<Trigger> = scheme
        .levels()
        .iter()
        .map(|&level| Trigger::new(level, scheme.hysteresis(), samples[0]))
        .collect();

    let mut events = Vec::new();
    let mut segment_events: Vec<Event> = Vec::with_capacity(4);
    for i in 0..samples.len().saturating_sub(1) {
        let a = samples[i];
        let b = samples[i + 1];
        segment_events.clear();
        for (idx, trig) in triggers.iter_mut().enumerate() {
            let s = trig.active();
            if crosses(a, b, s) {
                // Exact linear inversion; b != a whenever a crossing exists.
                let time = i as f64 * period + period * (s - a) / (b - a);
                segment_events.push(Event {
                    time,
                    amplitude: scheme.levels()[idx],
                    level_index: idx,
                });
                trig.upper_active = !trig.upper_active;
            }
        }
        // Monotone segment => path order == time order; the level index
        // tie-break only matters for coincident times and keeps the output
        // deterministic.
        segment_events
            .sort_by(|x, y| x.time.total_cmp(&y.time).then(x.level_index.cmp(&y.level_index)));
        events.extend_from_slice(&segment_events);
    }

    Ok(EventStream {
        events,
        source_duration: signal.duration(),
        source_sample_count: signal.len(),
    })
}

/// Target uniform grid for reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub sample_rate: f64,
    pub sample_count: usize,
}

impl GridSpec {
    /// The grid a signal was sampled on.
    pub fn of(signal: &UniformSignal) -> Self {
        GridSpec {
            sample_rate: signal.sample_rate,
            sample_count: signal.len(),
        }
    }
}

/// Piecewise-linear interpolation through the events, resampled on the
/// uniform target grid. Before the first event the output holds the first
/// event's amplitude, after the last event the last one's; an empty stream
/// reconstructs to all zeros (callers flag that in reports).
pub fn reconstruct_linear(stream: &EventStream, grid: GridSpec) -> Result<UniformSignal> {
    if grid.sample_count == 0 {
        return Err(LcError::Argument("target grid must be non-empty".into()));
    }
    if !(grid.sample_rate > 0.0) {
        return Err(LcError::Argument(format!(
            "target sample rate must be positive, got {}",
            grid.sample_rate
        )));
    }
    let events = &stream.events;
    if events.is_empty() {
        return UniformSignal::new(vec![0.0; grid.sample_count], grid.sample_rate);
    }

    let period = 1.0 / grid.sample_rate;
    let mut out = Vec::with_capacity(grid.sample_count);
    let mut j = 0usize; // index of the event segment in play
    for i in 0..grid.sample_count {
        let t = i as f64 * period;
        while j + 1 < events.len() && events[j + 1].time <= t {
            j += 1;
        }
        let value = if t <= events[0].time {
            events[0].amplitude
        } else if j + 1 >= events.len() {
            events[events.len() - 1].amplitude
        } else {
            let (e0, e1) = (&events[j], &events[j + 1]);
            let dt = e1.time - e0.time;
            if dt <= 0.0 {
                e1.amplitude
            } else {
                e0.amplitude + (t - e0.time) * (e1.amplitude - e0.amplitude) / dt
            }
        };
        out.push(value);
    }
    UniformSignal::new(out, grid.sample_rate)
}

/// Writes events as CSV: `time_s,amplitude_mv,level_index`.
pub fn write_events_csv(path: &Path, stream: &EventStream) -> Result<()> {
    let mut out = String::from("time_s,amplitude_mv,level_index\n");
    for e in &stream.events {
        let _ = writeln!(out, "{},{},{}", e.time, e.amplitude, e.level_index);
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads events from the CSV form. Source bookkeeping is not stored in the
/// CSV; callers supply it from the reference signal.
pub fn read_events_csv(path: &Path) -> Result<Vec<Event>> {
    let text = fs::read_to_string(path)?;
    let mut events = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("time_s") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(LcError::Format(format!(
                "{}:{}: expected 3 fields",
                path.display(),
                lineno + 1
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| {
                LcError::Format(format!("{}:{}: bad number {s:?}", path.display(), lineno + 1))
            })
        };
        events.push(Event {
            time: parse(fields[0])?,
            amplitude: parse(fields[1])?,
            level_index: fields[2].trim().parse::<usize>().map_err(|_| {
                LcError::Format(format!("{}:{}: bad level index", path.display(), lineno + 1))
            })?,
        });
    }
    Ok(events)
}

/// Compact binary event record: little-endian f64 time, f32 amplitude,
/// u16 level index (14 bytes per event).
pub fn write_events_binary(path: &Path, stream: &EventStream) -> Result<()> {
    let mut bytes = Vec::with_capacity(stream.len() * 14);
    for e in &stream.events {
        let idx = u16::try_from(e.level_index).map_err(|_| {
            LcError::Argument(format!("level index {} exceeds u16", e.level_index))
        })?;
        bytes.extend_from_slice(&e.time.to_le_bytes());
        bytes.extend_from_slice(&(e.amplitude as f32).to_le_bytes());
        bytes.extend_from_slice(&idx.to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Reads the compact binary event form.
pub fn read_events_binary(path: &Path) -> Result<Vec<Event>> {
    let bytes = fs::read(path)?;
    if bytes.len() % 14 != 0 {
        return Err(LcError::Format(format!(
            "{}: length {} is not a multiple of the 14-byte record",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(14)
        .map(|c| Event {
            time: f64::from_le_bytes(c[0..8].try_into().unwrap()),
            amplitude: f32::from_le_bytes(c[8..12].try_into().unwrap()) as f64,
            level_index: u16::from_le_bytes(c[12..14].try_into().unwrap()) as usize,
        })
        .collect())
}
