//! Line-delimited JSON streams.
//!
//! | stream          | one line per frame                                                     |
//! |-----------------|------------------------------------------------------------------------|
//! | marker frames   | `{"t":0,"markers":[[x,y,z],...]}`                                      |
//! | tracker output  | `{"t":0,"events":[{"id":0,"action":"living","pos":[x,y,z]},...]}`      |
//! | follower output | `{"t":0,"best":2,"state":17,"cost":0.4,"event":"..","scrub":{..}}`     |
//! | ground truth    | `{"t":0,"markers":[..],"ids":[0,null,..],"clean":[..],"ref":12}`       |
//!
//! `pos` is omitted on death events; `event`, `scrub` and `ref` are omitted
//! when absent.

use std::io::{BufRead, Write};
use std::marker::PhantomData;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::follower::Scrub;
use crate::tracker::{Action, TrackEvent, TrackUpdate};
use crate::types::{MarkerFrame, Point3};

/// Iterator over the JSON records of a line-delimited stream. Blank lines
/// are skipped; parse failures carry the 1-based line number.
pub struct NdjsonReader<R, T> {
    reader: R,
    line: usize,
    buf: String,
    _marker: PhantomData<T>,
}

impl<R: BufRead, T: DeserializeOwned> NdjsonReader<R, T> {
    pub fn new(reader: R) -> Self {
        NdjsonReader {
            reader,
            line: 0,
            buf: String::new(),
            _marker: PhantomData,
        }
    }
}

impl<R: BufRead, T: DeserializeOwned> Iterator for NdjsonReader<R, T> {
    type Item = Result<T>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line += 1;
            let text = self.buf.trim();
            if text.is_empty() {
                continue;
            }
            return Some(serde_json::from_str(text).map_err(|e| Error::Parse {
                line: self.line,
                msg: e.to_string(),
            }));
        }
    }
}

/// Marker frames with strictly increasing `t` and finite coordinates.
pub struct FrameReader<R> {
    inner: NdjsonReader<R, MarkerFrame>,
    last_t: Option<u64>,
}

impl<R: BufRead> FrameReader<R> {
    pub fn new(reader: R) -> Self {
        FrameReader {
            inner: NdjsonReader::new(reader),
            last_t: None,
        }
    }
}

impl<R: BufRead> Iterator for FrameReader<R> {
    type Item = Result<MarkerFrame>;

    fn next(&mut self) -> Option<Self::Item> {
        let frame = match self.inner.next()? {
            Ok(f) => f,
            Err(e) => return Some(Err(e)),
        };
        let line = self.inner.line;
        if let Some(prev) = self.last_t {
            if frame.t <= prev {
                return Some(Err(Error::Parse {
                    line,
                    msg: format!("frame index {} does not follow {prev}", frame.t),
                }));
            }
        }
        if frame.markers.iter().any(|p| !p.is_finite()) {
            return Some(Err(Error::Parse {
                line,
                msg: "non-finite marker coordinate".into(),
            }));
        }
        self.last_t = Some(frame.t);
        Some(Ok(frame))
    }
}

pub fn read_frames<R: BufRead>(reader: R) -> Result<Vec<MarkerFrame>> {
    FrameReader::new(reader).collect()
}

pub fn read_records<R: BufRead, T: DeserializeOwned>(reader: R) -> Result<Vec<T>> {
    NdjsonReader::new(reader).collect()
}

pub fn write_record<W: Write, T: Serialize>(w: &mut W, record: &T) -> Result<()> {
    serde_json::to_writer(&mut *w, record).map_err(std::io::Error::from)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_records<W: Write, T: Serialize>(w: &mut W, records: &[T]) -> Result<()> {
    for r in records {
        write_record(w, r)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub t: u64,
    pub events: Vec<TrackEvent>,
}

impl From<&TrackUpdate> for TrackRecord {
    fn from(u: &TrackUpdate) -> Self {
        TrackRecord {
            t: u.t,
            events: u.events.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowRecord {
    pub t: u64,
    /// Winning candidate (cluster label).
    pub best: usize,
    /// Matched oracle state.
    pub state: usize,
    /// Running cost of the winning candidate.
    pub cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scrub: Option<Scrub>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub t: u64,
    /// Observed markers, in the same order as the frame stream.
    pub markers: Vec<Point3>,
    /// True identity per marker; `null` for clutter.
    pub ids: Vec<Option<usize>>,
    /// Noise-free position per marker.
    pub clean: Vec<Point3>,
    /// Reference time index of the underlying gesture, if any.
    #[serde(default, rename = "ref", skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
}

/// Number of blob slots referenced by living/birth events.
pub fn layout_width(records: &[TrackRecord]) -> usize {
    records
        .iter()
        .flat_map(|r| &r.events)
        .filter(|e| matches!(e.action, Action::Living | Action::Birth))
        .map(|e| e.id + 1)
        .max()
        .unwrap_or(0)
}

/// Feature vector of one tracker frame: blob coordinates concatenated in id
/// order, zero for blobs without a living/birth event. Ids at or beyond
/// `width` are ignored.
pub fn feature_vector(record: &TrackRecord, width: usize) -> Vec<f64> {
    let mut v = vec![0.0; width * 3];
    for e in &record.events {
        if !matches!(e.action, Action::Living | Action::Birth) || e.id >= width {
            continue;
        }
        if let Some(p) = e.pos {
            v[e.id * 3..e.id * 3 + 3].copy_from_slice(&p.to_array());
        }
    }
    v
}
