//! Synthetic marker scenarios with ground truth.
//!
//! - `cross`: pairs of markers passing each other in depth.
//! - `occlude`: a row of drifting markers, some hidden during a window.
//! - `rebirth`: hidden markers freeze and reappear near where they vanished.
//! - `noise`: steady markers plus random clutter every frame.
//! - `gesture`: one stored gesture replayed with time warp and noise.
//! - `concat`: several gestures back to back, followed by a warped repeat.
//!
//! Gesture kinds list markers in performer order and carry a reference time
//! index into the concatenated recording (`gesture g`, phase `s` maps to
//! `g * frames + s * (frames - 1)`). The other kinds shuffle marker order
//! every frame.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::TruthRecord;
use crate::types::{MarkerFrame, Point3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Cross,
    Occlude,
    Rebirth,
    Noise,
    Gesture,
    Concat,
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "cross" => ScenarioKind::Cross,
            "occlude" => ScenarioKind::Occlude,
            "rebirth" => ScenarioKind::Rebirth,
            "noise" => ScenarioKind::Noise,
            "gesture" => ScenarioKind::Gesture,
            "concat" => ScenarioKind::Concat,
            other => return Err(Error::input(format!("unknown scenario kind {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    /// Stream length; for gesture kinds, the length of one stored gesture.
    pub frames: usize,
    /// Frames per second (metadata for pacing).
    pub rate: f64,
    pub seed: u64,
    /// Tracked markers (clutter excluded). `None` picks the kind's default.
    pub markers: Option<usize>,
    /// Markers hidden during the occlusion window.
    pub hidden: usize,
    /// Occlusion window `[start, end)` in frames.
    pub window: (usize, usize),
    /// Clutter markers per frame (`noise`).
    pub clutter: usize,
    /// Gaussian position noise, meters.
    pub jitter: f64,
    /// Maximum reappearance offset from the frozen position (`rebirth`).
    pub reappear_radius: f64,
    /// Number of distinct gestures (`concat`).
    pub gestures: usize,
    /// Gesture replayed by `gesture`.
    pub gesture: usize,
    /// Gesture repeated at the end of `concat`.
    pub repeat: usize,
    /// Time-warp depth in [0, 1); 0 replays at constant speed.
    pub warp: f64,
    /// Replay length relative to the stored gesture.
    pub stretch: f64,
    /// Additive noise, as a fraction of each coordinate's range.
    pub noise_level: f64,
    /// Seed of the gesture shapes, shared between recording and replay.
    pub shape_seed: u64,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, frames: usize) -> Self {
        ScenarioSpec {
            kind,
            frames,
            rate: 30.0,
            seed: 0,
            markers: None,
            hidden: 2,
            window: (20, 40),
            clutter: 2,
            jitter: 0.0,
            reappear_radius: 0.1,
            gestures: 3,
            gesture: 0,
            repeat: 0,
            warp: 0.0,
            stretch: 1.0,
            noise_level: 0.0,
            shape_seed: 7,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn marker_count(&self) -> usize {
        self.markers.unwrap_or(match self.kind {
            ScenarioKind::Cross | ScenarioKind::Gesture | ScenarioKind::Concat => 2,
            ScenarioKind::Occlude | ScenarioKind::Rebirth => 4,
            ScenarioKind::Noise => 3,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.marker_count();
        if self.frames == 0 {
            return Err(Error::input("scenario needs at least one frame"));
        }
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(Error::input("rate must be positive"));
        }
        if n == 0 {
            return Err(Error::input("scenario needs at least one marker"));
        }
        if self.kind == ScenarioKind::Cross && !n.is_multiple_of(2) {
            return Err(Error::input("cross scenario needs an even marker count"));
        }
        if matches!(self.kind, ScenarioKind::Occlude | ScenarioKind::Rebirth) {
            if self.hidden > n {
                return Err(Error::input("more hidden markers than markers"));
            }
            if self.window.0 > self.window.1 {
                return Err(Error::input("occlusion window ends before it starts"));
            }
        }
        if !(0.0..1.0).contains(&self.warp) {
            return Err(Error::input("warp must lie in [0, 1)"));
        }
        if !(self.stretch.is_finite() && self.stretch > 0.0) {
            return Err(Error::input("stretch must be positive"));
        }
        for (name, v) in [
            ("jitter", self.jitter),
            ("noise level", self.noise_level),
            ("reappear radius", self.reappear_radius),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::input(format!("{name} must be non-negative")));
            }
        }
        if self.kind == ScenarioKind::Gesture && self.gesture >= self.gestures {
            return Err(Error::input("gesture index out of range"));
        }
        if self.kind == ScenarioKind::Concat && (self.gestures == 0 || self.repeat >= self.gestures)
        {
            return Err(Error::input("repeat index out of range"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub frames: Vec<MarkerFrame>,
    pub truth: Vec<TruthRecord>,
}

/// Generates a scenario. Identical specs give identical output.
pub fn simulate(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let frames: Vec<Vec<Sample>> = match spec.kind {
        ScenarioKind::Cross => cross(spec, &mut rng),
        ScenarioKind::Occlude => occlude(spec, &mut rng, false),
        ScenarioKind::Rebirth => occlude(spec, &mut rng, true),
        ScenarioKind::Noise => noise(spec, &mut rng),
        ScenarioKind::Gesture => gesture_replay(spec, &mut rng),
        ScenarioKind::Concat => concat(spec, &mut rng),
    };
    let shuffle = !matches!(spec.kind, ScenarioKind::Gesture | ScenarioKind::Concat);
    let jitter = Normal::new(0.0, spec.jitter).expect("finite jitter");

    let mut out = Scenario {
        frames: Vec::with_capacity(frames.len()),
        truth: Vec::with_capacity(frames.len()),
    };
    for (t, mut samples) in frames.into_iter().enumerate() {
        if shuffle {
            samples.shuffle(&mut rng);
        }
        let observed: Vec<Point3> = samples
            .iter()
            .map(|s| {
                if spec.jitter > 0.0 && s.id.is_some() {
                    Point3::new(
                        s.observed.x + jitter.sample(&mut rng),
                        s.observed.y + jitter.sample(&mut rng),
                        s.observed.z + jitter.sample(&mut rng),
                    )
                } else {
                    s.observed
                }
            })
            .collect();
        let reference = samples.first().and_then(|s| s.reference);
        out.frames
            .push(MarkerFrame::new(t as u64, observed.clone()));
        out.truth.push(TruthRecord {
            t: t as u64,
            markers: observed,
            ids: samples.iter().map(|s| s.id).collect(),
            clean: samples.iter().map(|s| s.clean).collect(),
            reference,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    id: Option<usize>,
    clean: Point3,
    observed: Point3,
    reference: Option<f64>,
}

impl Sample {
    fn exact(id: usize, p: Point3) -> Self {
        Sample {
            id: Some(id),
            clean: p,
            observed: p,
            reference: None,
        }
    }
}

fn cross(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> Vec<Vec<Sample>> {
    let pairs = spec.marker_count() / 2;
    let n = spec.frames;
    let params: Vec<_> = (0..pairs)
        .map(|k| {
            let sep = rng.random_range(0.15..0.3);
            let near = rng.random_range(1.5..2.0);
            let far = rng.random_range(3.0..3.5);
            let y = 0.5 + 0.6 * k as f64 + rng.random_range(-0.05..0.05);
            let sway = rng.random_range(0.0..0.02);
            (sep, near, far, y, sway)
        })
        .collect();
    (0..n)
        .map(|t| {
            let u = if n > 1 {
                t as f64 / (n - 1) as f64
            } else {
                0.0
            };
            let mut out = Vec::with_capacity(pairs * 2);
            for (k, &(sep, near, far, y, sway)) in params.iter().enumerate() {
                let dy = sway * (2.0 * PI * u).sin();
                let za = near + (far - near) * u;
                let zb = far - (far - near) * u;
                out.push(Sample::exact(2 * k, Point3::new(-sep / 2.0, y + dy, za)));
                out.push(Sample::exact(2 * k + 1, Point3::new(sep / 2.0, y - dy, zb)));
            }
            out
        })
        .collect()
}

fn occlude(spec: &ScenarioSpec, rng: &mut ChaCha8Rng, freeze: bool) -> Vec<Vec<Sample>> {
    let m = spec.marker_count();
    let spacing = rng.random_range(0.3..0.6);
    let base: Vec<Point3> = (0..m)
        .map(|i| {
            Point3::new(
                (i as f64 - (m - 1) as f64 / 2.0) * spacing,
                1.0 + rng.random_range(-0.1..0.1),
                2.5 + rng.random_range(-0.2..0.2),
            )
        })
        .collect();
    let phases: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    // Hidden markers are taken from the middle of the row.
    let first_hidden = (m - spec.hidden) / 2;
    let hidden = first_hidden..first_hidden + spec.hidden;
    let (w0, w1) = spec.window;
    let drift = |i: usize, t: usize| {
        let a = 0.05 * (2.0 * PI * t as f64 / 90.0 + phases[i]).sin();
        Point3::new(base[i].x + a, base[i].y + 0.5 * a, base[i].z)
    };
    let offsets: Vec<Point3> = (0..m)
        .map(|_| {
            // Uniform direction, radius up to the configured bound.
            let r = spec.reappear_radius * rng.random_range(0.0..1.0f64);
            let th = rng.random_range(0.0..2.0 * PI);
            let ph = rng.random_range(-1.0..1.0f64).acos();
            Point3::new(
                r * ph.sin() * th.cos(),
                r * ph.sin() * th.sin(),
                r * ph.cos(),
            )
        })
        .collect();
    (0..spec.frames)
        .map(|t| {
            (0..m)
                .filter_map(|i| {
                    let is_hidden = hidden.contains(&i);
                    if is_hidden && t >= w0 && t < w1 {
                        return None;
                    }
                    if freeze && is_hidden && t >= w1 && w0 > 0 {
                        let frozen = drift(i, w0 - 1);
                        let o = offsets[i];
                        return Some(Sample::exact(
                            i,
                            Point3::new(frozen.x + o.x, frozen.y + o.y, frozen.z + o.z),
                        ));
                    }
                    Some(Sample::exact(i, drift(i, t)))
                })
                .collect()
        })
        .collect()
}

fn noise(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> Vec<Vec<Sample>> {
    let m = spec.marker_count();
    let spacing = 0.5;
    (0..spec.frames)
        .map(|t| {
            let mut v: Vec<Sample> = (0..m)
                .map(|i| {
                    let a = 0.05 * (2.0 * PI * t as f64 / 60.0 + i as f64).sin();
                    Sample::exact(
                        i,
                        Point3::new((i as f64 - (m - 1) as f64 / 2.0) * spacing + a, 1.0, 2.5),
                    )
                })
                .collect();
            for _ in 0..spec.clutter {
                let p = Point3::new(
                    rng.random_range(-2.0..2.0),
                    rng.random_range(0.0..2.5),
                    rng.random_range(1.0..4.0),
                );
                v.push(Sample {
                    id: None,
                    clean: p,
                    observed: p,
                    reference: None,
                });
            }
            v
        })
        .collect()
}

/// Shape of one gesture: boundary poses plus per marker and axis
/// `(amplitude, cycles, phase)` oscillation terms.
#[derive(Debug, Clone)]
struct GestureShape {
    start: Vec<Point3>,
    end: Vec<Point3>,
    terms: Vec<[(f64, f64, f64); 3]>,
}

/// Boundary pose `b`: gesture `g` runs from pose `g` to pose `g + 1`, so
/// consecutive gestures join without a jump.
fn boundary_pose(shape_seed: u64, b: usize, markers: usize) -> Vec<Point3> {
    let mut rng = ChaCha8Rng::seed_from_u64(
        shape_seed.wrapping_mul(0xD1B5_4A32_D192_ED03) ^ (b as u64).wrapping_add(0x5555),
    );
    (0..markers)
        .map(|j| {
            let x = if markers > 1 {
                -0.3 + 0.6 * j as f64 / (markers - 1) as f64
            } else {
                0.0
            };
            Point3::new(
                x + rng.random_range(-0.08..0.08),
                1.2 + rng.random_range(-0.15..0.15),
                2.5 + rng.random_range(-0.15..0.15),
            )
        })
        .collect()
}

impl GestureShape {
    fn new(shape_seed: u64, gesture: usize, markers: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(
            shape_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ gesture as u64,
        );
        let terms = (0..markers)
            .map(|_| {
                std::array::from_fn(|_| {
                    (
                        rng.random_range(0.08..0.2),
                        rng.random_range(0.5..2.5),
                        rng.random_range(0.0..2.0 * PI),
                    )
                })
            })
            .collect();
        GestureShape {
            start: boundary_pose(shape_seed, gesture, markers),
            end: boundary_pose(shape_seed, gesture + 1, markers),
            terms,
        }
    }

    /// Marker positions at phase `s` in [0, 1].
    fn at(&self, s: f64) -> Vec<Point3> {
        let env = (PI * s).sin();
        self.start
            .iter()
            .zip(&self.end)
            .zip(&self.terms)
            .map(|((a, b), terms)| {
                let d: [f64; 3] = std::array::from_fn(|k| {
                    let (amp, f, ph) = terms[k];
                    env * amp * (2.0 * PI * f * s + ph).sin()
                });
                Point3::new(
                    a.x + s * (b.x - a.x) + d[0],
                    a.y + s * (b.y - a.y) + d[1],
                    a.z + s * (b.z - a.z) + d[2],
                )
            })
            .collect()
    }
}

/// Monotone time warp of [0, 1] onto itself.
fn warp(u: f64, depth: f64) -> f64 {
    u - depth * (2.0 * PI * u).sin() / (2.0 * PI)
}

/// Replays gesture `g` and returns per-frame samples with clean positions.
fn replay(
    spec: &ScenarioSpec,
    shape: &GestureShape,
    g: usize,
    len: usize,
    depth: f64,
) -> Vec<(f64, Vec<Point3>)> {
    (0..len)
        .map(|i| {
            let u = if len > 1 {
                i as f64 / (len - 1) as f64
            } else {
                0.0
            };
            let s = warp(u, depth);
            let reference = (g * spec.frames) as f64 + s * (spec.frames.saturating_sub(1)) as f64;
            (reference, shape.at(s))
        })
        .collect()
}

fn with_noise(
    spec: &ScenarioSpec,
    rng: &mut ChaCha8Rng,
    clip: Vec<(f64, Vec<Point3>)>,
) -> Vec<Vec<Sample>> {
    let m = spec.marker_count();
    // Per-coordinate range of the clean signal.
    let mut lo = vec![f64::INFINITY; m * 3];
    let mut hi = vec![f64::NEG_INFINITY; m * 3];
    for (_, pts) in &clip {
        for (j, p) in pts.iter().enumerate() {
            for (a, v) in p.to_array().into_iter().enumerate() {
                lo[j * 3 + a] = lo[j * 3 + a].min(v);
                hi[j * 3 + a] = hi[j * 3 + a].max(v);
            }
        }
    }
    clip.into_iter()
        .map(|(reference, pts)| {
            pts.into_iter()
                .enumerate()
                .map(|(j, p)| {
                    let mut c = p.to_array();
                    if spec.noise_level > 0.0 {
                        for (a, x) in c.iter_mut().enumerate() {
                            let sd = spec.noise_level * (hi[j * 3 + a] - lo[j * 3 + a]);
                            if sd > 0.0 {
                                *x += Normal::new(0.0, sd).expect("finite sd").sample(rng);
                            }
                        }
                    }
                    Sample {
                        id: Some(j),
                        clean: p,
                        observed: Point3::from(c),
                        reference: Some(reference),
                    }
                })
                .collect()
        })
        .collect()
}

fn stretched_len(spec: &ScenarioSpec) -> usize {
    ((spec.frames as f64 * spec.stretch).round() as usize).max(1)
}

fn gesture_replay(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> Vec<Vec<Sample>> {
    let shape = GestureShape::new(spec.shape_seed, spec.gesture, spec.marker_count());
    let clip = replay(spec, &shape, spec.gesture, stretched_len(spec), spec.warp);
    with_noise(spec, rng, clip)
}

fn concat(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> Vec<Vec<Sample>> {
    let m = spec.marker_count();
    let mut clip = Vec::new();
    for g in 0..spec.gestures {
        let shape = GestureShape::new(spec.shape_seed, g, m);
        clip.extend(replay(spec, &shape, g, spec.frames, 0.0));
    }
    let shape = GestureShape::new(spec.shape_seed, spec.repeat, m);
    clip.extend(replay(
        spec,
        &shape,
        spec.repeat,
        stretched_len(spec),
        spec.warp,
    ));
    with_noise(spec, rng, clip)
}
