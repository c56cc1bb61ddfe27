//! Synthetic binary datasets with known ground truth.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Shape};

pub const FOREGROUND: f64 = 255.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RollingBallParams {
    pub width: usize,
    pub height: usize,
    pub steps: usize,
    pub radius: f64,
    /// Horizontal displacement per step, in pixels.
    pub dx: f64,
}

impl Default for RollingBallParams {
    /// 800x400, 19 steps, radius 40 px moving half a radius per step.
    fn default() -> Self {
        RollingBallParams {
            width: 800,
            height: 400,
            steps: 19,
            radius: 40.0,
            dx: 20.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RollingBall {
    pub frames: Vec<Field>,
    /// Ball visible in frame t.
    pub presence: Vec<bool>,
    /// Ball centre `(x, y)` in pixels for visible frames.
    pub centers: Vec<Option<(f64, f64)>>,
}

fn disk_into(samples: &mut [f64], width: usize, cx: f64, cy: f64, r: f64) {
    let height = samples.len() / width;
    let y0 = (cy - r).floor().max(0.0) as usize;
    let y1 = ((cy + r).ceil() as usize).min(height.saturating_sub(1));
    let x0 = (cx - r).floor().max(0.0) as usize;
    let x1 = ((cx + r).ceil() as usize).min(width.saturating_sub(1));
    for y in y0..=y1 {
        for x in x0..=x1 {
            let (ddx, ddy) = (x as f64 - cx, y as f64 - cy);
            if ddx * ddx + ddy * ddy <= r * r {
                samples[y * width + x] = FOREGROUND;
            }
        }
    }
}

/// A ball crossing the frame left to right. The first and last frames are
/// empty; every frame in between holds one disk that partially overlaps its
/// predecessor. The visible path is centred horizontally.
pub fn gen_rolling_ball(params: &RollingBallParams) -> Result<RollingBall> {
    let RollingBallParams {
        width,
        height,
        steps,
        radius,
        dx,
    } = *params;
    if steps < 3 {
        return Err(Error::InvalidArgument(
            "rolling ball needs at least 3 steps".into(),
        ));
    }
    if !(radius >= 1.0 && dx > 0.0) {
        return Err(Error::InvalidArgument(
            "radius must be >= 1 and dx positive".into(),
        ));
    }
    if dx >= 2.0 * radius {
        return Err(Error::InvalidArgument(format!(
            "dx {dx} leaves consecutive balls of radius {radius} disjoint"
        )));
    }
    let span = (steps - 3) as f64 * dx + 2.0 * radius;
    if span > width as f64 - 1.0 || 2.0 * radius > height as f64 - 1.0 {
        return Err(Error::InvalidArgument(format!(
            "ball path of {span} px does not fit a {width}x{height} frame"
        )));
    }
    let shape = Shape::image(width, height)?;
    let start = (width as f64 - (steps - 3) as f64 * dx) / 2.0;
    let cy = (height as f64 / 2.0).floor();

    let mut frames = Vec::with_capacity(steps);
    let mut presence = Vec::with_capacity(steps);
    let mut centers = Vec::with_capacity(steps);
    for t in 0..steps {
        let mut samples = vec![0.0; width * height];
        if t == 0 || t == steps - 1 {
            presence.push(false);
            centers.push(None);
        } else {
            let cx = start + (t - 1) as f64 * dx;
            disk_into(&mut samples, width, cx, cy, radius);
            presence.push(true);
            centers.push(Some((cx, cy)));
        }
        frames.push(Field::new(shape.clone(), samples)?);
    }
    Ok(RollingBall {
        frames,
        presence,
        centers,
    })
}

/// One blob present in frames `enter..=exit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlobEvent {
    pub enter: usize,
    pub exit: usize,
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
}

#[derive(Debug, Clone)]
pub struct MultiBlob {
    pub frames: Vec<Field>,
    /// Blob count per frame.
    pub counts: Vec<usize>,
    /// Frames after the first where the count changes.
    pub trigger_indices: Vec<usize>,
}

impl MultiBlob {
    /// Expected key timesteps: frame 0 plus every trigger.
    pub fn key_indices(&self) -> Vec<usize> {
        std::iter::once(0)
            .chain(self.trigger_indices.iter().copied())
            .collect()
    }
}

/// Blobs appearing and disappearing on a schedule. Blobs that are visible at
/// the same time must stay at least two pixels apart so they never merge.
pub fn gen_multiblob(
    width: usize,
    height: usize,
    steps: usize,
    schedule: &[BlobEvent],
) -> Result<MultiBlob> {
    if steps == 0 {
        return Err(Error::InvalidArgument(
            "multiblob needs at least one step".into(),
        ));
    }
    let shape = Shape::image(width, height)?;
    for (i, b) in schedule.iter().enumerate() {
        if b.enter > b.exit || b.exit >= steps {
            return Err(Error::InvalidArgument(format!(
                "blob {i}: frames {}..={} outside 0..{steps}",
                b.enter, b.exit
            )));
        }
        let inside = b.radius >= 1.0
            && b.cx - b.radius >= 0.0
            && b.cy - b.radius >= 0.0
            && b.cx + b.radius <= (width - 1) as f64
            && b.cy + b.radius <= (height - 1) as f64;
        if !inside {
            return Err(Error::InvalidArgument(format!(
                "blob {i} does not fit the frame"
            )));
        }
    }
    for (i, a) in schedule.iter().enumerate() {
        for (j, b) in schedule.iter().enumerate().skip(i + 1) {
            let concurrent = a.enter <= b.exit && b.enter <= a.exit;
            let dist = ((a.cx - b.cx).powi(2) + (a.cy - b.cy).powi(2)).sqrt();
            if concurrent && dist <= a.radius + b.radius + 2.0 {
                return Err(Error::ScheduleConflict(format!(
                    "blobs {i} and {j} touch while both visible"
                )));
            }
        }
    }

    let mut frames = Vec::with_capacity(steps);
    let mut counts = Vec::with_capacity(steps);
    for t in 0..steps {
        let mut samples = vec![0.0; width * height];
        let mut count = 0;
        for b in schedule.iter().filter(|b| (b.enter..=b.exit).contains(&t)) {
            disk_into(&mut samples, width, b.cx, b.cy, b.radius);
            count += 1;
        }
        counts.push(count);
        frames.push(Field::new(shape.clone(), samples)?);
    }
    let trigger_indices = (1..steps).filter(|&t| counts[t] != counts[t - 1]).collect();
    Ok(MultiBlob {
        frames,
        counts,
        trigger_indices,
    })
}

/// A random conflict-free schedule: blobs are placed in distinct cells of a
/// coarse grid so concurrent blobs never touch.
pub fn random_schedule<R: Rng + ?Sized>(
    rng: &mut R,
    width: usize,
    height: usize,
    steps: usize,
    max_blobs: usize,
) -> Vec<BlobEvent> {
    let cell = 24usize;
    let (cols, rows) = (width / cell, height / cell);
    let cells = cols * rows;
    if cells == 0 || steps == 0 {
        return Vec::new();
    }
    let n = rng.gen_range(0..=max_blobs.min(cells));
    let mut free: Vec<usize> = (0..cells).collect();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let c = free.swap_remove(rng.gen_range(0..free.len()));
        let enter = rng.gen_range(0..steps);
        let exit = rng.gen_range(enter..steps);
        out.push(BlobEvent {
            enter,
            exit,
            cx: (c % cols * cell + cell / 2) as f64,
            cy: (c / cols * cell + cell / 2) as f64,
            radius: rng.gen_range(3..=8) as f64,
        });
    }
    out
}
