//! Stream stages used by the command-line tool: track, build, follow.

use std::io::Write;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::follower::{map_categorical, map_temporal, Follower, MappingConfig};
use crate::io::{feature_vector, layout_width, write_record, FollowRecord, TrackRecord};
use crate::tracker::{Registry, TrackerConfig};
use crate::types::MarkerFrame;
use crate::vmo::{select_threshold, Oracle, ThresholdSelection};

/// Paces emission at a fixed frame rate.
#[derive(Debug)]
pub struct Pacer {
    period: Duration,
    next: Option<Instant>,
}

impl Pacer {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::input(format!("rate must be positive, got {rate}")));
        }
        Ok(Pacer {
            period: Duration::from_secs_f64(1.0 / rate),
            next: None,
        })
    }

    /// Blocks until the next frame slot.
    pub fn wait(&mut self) {
        let now = Instant::now();
        let due = *self.next.get_or_insert(now);
        if due > now {
            std::thread::sleep(due - now);
        }
        self.next = Some(due.max(now) + self.period);
    }
}

/// Runs the tracker over a frame stream, writing one record per frame.
pub fn track_stream<I, W>(
    frames: I,
    config: TrackerConfig,
    out: &mut W,
    mut pacer: Option<&mut Pacer>,
) -> Result<usize>
where
    I: IntoIterator<Item = Result<MarkerFrame>>,
    W: Write,
{
    let mut registry = Registry::new(config)?;
    let mut n = 0;
    for frame in frames {
        let update = registry.step(&frame?)?;
        if let Some(p) = pacer.as_deref_mut() {
            p.wait();
        }
        write_record(out, &TrackRecord::from(&update))?;
        n += 1;
    }
    out.flush()?;
    Ok(n)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThetaChoice {
    Fixed(f64),
    Sweep(Vec<f64>),
}

/// Builds an oracle from tracker output. `width` fixes the blob layout;
/// by default it covers every blob id that was ever alive.
pub fn build_model(
    records: &[TrackRecord],
    theta: &ThetaChoice,
    width: Option<usize>,
    exec: Execution,
) -> Result<(Oracle, Option<ThresholdSelection>)> {
    let width = width.unwrap_or_else(|| layout_width(records));
    if width == 0 {
        return Err(Error::input("no living blobs in tracker output"));
    }
    let features: Vec<Vec<f64>> = records.iter().map(|r| feature_vector(r, width)).collect();
    let (theta, selection) = match theta {
        ThetaChoice::Fixed(t) => (*t, None),
        ThetaChoice::Sweep(c) => {
            let sel = select_threshold(&features, c, exec)?;
            (sel.theta, Some(sel))
        }
    };
    Ok((Oracle::build(theta, &features)?, selection))
}

/// Follows a tracker-output stream against `oracle`, writing one record per
/// input frame.
pub fn follow_stream<I, W>(
    oracle: &Oracle,
    records: I,
    mapping: &MappingConfig,
    out: &mut W,
    exec: Execution,
    mut pacer: Option<&mut Pacer>,
) -> Result<usize>
where
    I: IntoIterator<Item = Result<TrackRecord>>,
    W: Write,
{
    let dim = oracle
        .dim()
        .ok_or_else(|| Error::input("cannot follow an empty model"))?;
    if dim % 3 != 0 {
        return Err(Error::input(format!(
            "model dimension {dim} is not a marker layout"
        )));
    }
    mapping.validate(oracle.len())?;
    let mut follower = Follower::new(oracle)?.with_execution(exec);
    let mut n = 0;
    for rec in records {
        let rec = rec?;
        let v = feature_vector(&rec, dim / 3);
        let state = follower.push(&v)?;
        let st = follower.state().expect("initialized by push");
        let record = FollowRecord {
            t: rec.t,
            best: st.best,
            state,
            cost: st.best_cost(),
            event: map_categorical(oracle, st, mapping).map(str::to_owned),
            scrub: map_temporal(st, mapping),
        };
        if let Some(p) = pacer.as_deref_mut() {
            p.wait();
        }
        write_record(out, &record)?;
        n += 1;
    }
    out.flush()?;
    Ok(n)
}
