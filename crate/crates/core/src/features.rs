//! Key-region extraction and the trigger predicates that separate key
//! timesteps from fusible ones.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, LabelField, Shape, TimestepRecord};
use crate::infotheory::mutual_information;
use crate::probability::{build_joint, DEFAULT_IMAGE_BINS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// Samples strictly above the threshold are foreground.
    Above,
    /// Samples strictly below the threshold are foreground.
    Below,
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "above" => Ok(Polarity::Above),
            "below" => Ok(Polarity::Below),
            other => Err(Error::InvalidArgument(format!(
                "unknown polarity {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Connectivity {
    /// N, S, E and W neighbours.
    #[serde(rename = "4")]
    Four,
    /// All eight neighbours.
    #[serde(rename = "8")]
    #[default]
    Eight,
}

impl FromStr for Connectivity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "4" => Ok(Connectivity::Four),
            "8" => Ok(Connectivity::Eight),
            other => Err(Error::InvalidArgument(format!(
                "connectivity must be 4 or 8, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    shape: Shape,
    bits: Vec<u8>,
}

impl BinaryMask {
    pub fn new(shape: Shape, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != shape.len() {
            return Err(Error::InvalidArgument(format!(
                "{} mask bits for shape {:?}",
                bits.len(),
                shape.dims()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument("mask values must be 0 or 1".into()));
        }
        Ok(BinaryMask { shape, bits })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }
}

/// Inclusive pixel bounds of a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_x: usize,
    pub min_y: usize,
    pub max_x: usize,
    pub max_y: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub label: u32,
    pub size: usize,
    pub bbox: BoundingBox,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSet {
    pub count: usize,
    pub components: Vec<Component>,
    pub labeled: LabelField,
}

pub fn segment_threshold(field: &Field, threshold: f64, polarity: Polarity) -> BinaryMask {
    let bits = field
        .samples()
        .iter()
        .map(|&s| match polarity {
            Polarity::Above => (s > threshold) as u8,
            Polarity::Below => (s < threshold) as u8,
        })
        .collect();
    BinaryMask {
        shape: field.shape().clone(),
        bits,
    }
}

/// Foreground where `|sample - background| > threshold`.
pub fn segment_background(field: &Field, background: &Field, threshold: f64) -> Result<BinaryMask> {
    if field.shape() != background.shape() {
        return Err(Error::InvalidArgument(
            "background shape differs from frame".into(),
        ));
    }
    let bits = field
        .samples()
        .iter()
        .zip(background.samples())
        .map(|(&s, &b)| ((s - b).abs() > threshold) as u8)
        .collect();
    Ok(BinaryMask {
        shape: field.shape().clone(),
        bits,
    })
}

/// Per-position median of a stack of equally shaped frames. Even stacks take
/// the mean of the two middle values.
pub fn median_background(frames: &[Field]) -> Result<Field> {
    let Some(first) = frames.first() else {
        return Err(Error::EmptyInput);
    };
    if frames.iter().any(|f| f.shape() != first.shape()) {
        return Err(Error::InvalidSequence(
            "background frames differ in shape".into(),
        ));
    }
    let k = frames.len();
    let mut column = vec![0.0; k];
    let samples = (0..first.len())
        .map(|p| {
            for (c, f) in column.iter_mut().zip(frames) {
                *c = f.samples()[p];
            }
            column.sort_by(f64::total_cmp);
            if k % 2 == 1 {
                column[k / 2]
            } else {
                0.5 * (column[k / 2 - 1] + column[k / 2])
            }
        })
        .collect();
    Field::new(first.shape().clone(), samples)
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let next = parent[x as usize];
        parent[x as usize] = parent[next as usize];
        x = next;
    }
    x
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi as usize] = lo;
    }
}

/// Two-pass connected component labelling of a 2D mask. Components smaller
/// than `min_size` are dropped and labelled 0; survivors are numbered 1..=count
/// in raster order of their first pixel.
pub fn connected_components(
    mask: &BinaryMask,
    connectivity: Connectivity,
    min_size: usize,
) -> Result<ComponentSet> {
    let Some((width, height)) = mask.shape().as_image() else {
        return Err(Error::UnsupportedShape(mask.shape().dims().to_vec()));
    };
    let bits = mask.bits();
    let mut provisional = vec![0u32; bits.len()];
    // parent[0] is the unused background slot
    let mut parent: Vec<u32> = vec![0];

    for y in 0..height {
        for x in 0..width {
            let idx = y * width + x;
            if bits[idx] == 0 {
                continue;
            }
            let mut neighbours = [0u32; 4];
            let mut n = 0;
            let mut look = |nx: isize, ny: isize| {
                if nx >= 0 && ny >= 0 && (nx as usize) < width {
                    let l = provisional[ny as usize * width + nx as usize];
                    if l != 0 {
                        neighbours[n] = l;
                        n += 1;
                    }
                }
            };
            let (xi, yi) = (x as isize, y as isize);
            look(xi - 1, yi);
            look(xi, yi - 1);
            if connectivity == Connectivity::Eight {
                look(xi - 1, yi - 1);
                look(xi + 1, yi - 1);
            }
            if n == 0 {
                let l = parent.len() as u32;
                parent.push(l);
                provisional[idx] = l;
            } else {
                let first = neighbours[0];
                for &other in &neighbours[1..n] {
                    union(&mut parent, first, other);
                }
                provisional[idx] = find(&mut parent, first);
            }
        }
    }

    let mut sizes = vec![0usize; parent.len()];
    for l in provisional.iter_mut() {
        if *l != 0 {
            *l = find(&mut parent, *l);
            sizes[*l as usize] += 1;
        }
    }

    let mut final_label = vec![0u32; parent.len()];
    let mut components: Vec<Component> = Vec::new();
    let mut labels = vec![0u32; bits.len()];
    for (idx, &root) in provisional.iter().enumerate() {
        if root == 0 || sizes[root as usize] < min_size.max(1) {
            continue;
        }
        let (x, y) = (idx % width, idx / width);
        let r = root as usize;
        if final_label[r] == 0 {
            let label = components.len() as u32 + 1;
            final_label[r] = label;
            components.push(Component {
                label,
                size: sizes[r],
                bbox: BoundingBox {
                    min_x: x,
                    min_y: y,
                    max_x: x,
                    max_y: y,
                },
            });
        }
        let label = final_label[r];
        labels[idx] = label;
        let bb = &mut components[label as usize - 1].bbox;
        bb.min_x = bb.min_x.min(x);
        bb.max_x = bb.max_x.max(x);
        bb.max_y = y;
    }

    Ok(ComponentSet {
        count: components.len(),
        components,
        labeled: LabelField::new(mask.shape().clone(), labels)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TriggerKind {
    CountChange,
    PresenceChange,
    MiThreshold,
}

impl FromStr for TriggerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "count-change" => Ok(TriggerKind::CountChange),
            "presence-change" => Ok(TriggerKind::PresenceChange),
            "mi-threshold" => Ok(TriggerKind::MiThreshold),
            other => Err(Error::InvalidArgument(format!("unknown trigger {other:?}"))),
        }
    }
}

impl fmt::Display for TriggerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TriggerKind::CountChange => "count-change",
            TriggerKind::PresenceChange => "presence-change",
            TriggerKind::MiThreshold => "mi-threshold",
        })
    }
}

/// Parameters of the MI-threshold trigger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiTrigger {
    /// Fires when the channel pair's MI is at least this many bits.
    pub threshold: f64,
    pub channel_a: String,
    pub channel_b: String,
    pub bin_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerConfig {
    pub kind: TriggerKind,
    /// Channel to segment; the record's first channel when unset.
    pub channel: Option<String>,
    pub seg_threshold: f64,
    pub seg_polarity: Polarity,
    pub min_component_size: usize,
    pub connectivity: Connectivity,
    pub mi: Option<MiTrigger>,
    /// Static background; when set, segmentation is `|s - bg| > seg_threshold`
    /// and `seg_polarity` is ignored.
    #[serde(skip)]
    pub background: Option<Field>,
}

impl TriggerConfig {
    /// Segmentation-based trigger with default connectivity and no size filter.
    pub fn segmentation(kind: TriggerKind, seg_threshold: f64, seg_polarity: Polarity) -> Self {
        TriggerConfig {
            kind,
            channel: None,
            seg_threshold,
            seg_polarity,
            min_component_size: 1,
            connectivity: Connectivity::Eight,
            mi: None,
            background: None,
        }
    }

    pub fn mi_threshold(
        threshold: f64,
        channel_a: impl Into<String>,
        channel_b: impl Into<String>,
    ) -> Self {
        TriggerConfig {
            kind: TriggerKind::MiThreshold,
            channel: None,
            seg_threshold: 0.0,
            seg_polarity: Polarity::Above,
            min_component_size: 1,
            connectivity: Connectivity::Eight,
            mi: Some(MiTrigger {
                threshold,
                channel_a: channel_a.into(),
                channel_b: channel_b.into(),
                bin_count: DEFAULT_IMAGE_BINS,
            }),
            background: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, &self.mi) {
            (TriggerKind::MiThreshold, None) => Err(Error::InvalidArgument(
                "mi-threshold trigger needs a threshold and channel pair".into(),
            )),
            (TriggerKind::MiThreshold, Some(mi)) if mi.bin_count == 0 => Err(
                Error::InvalidArgument("bin count must be at least 1".into()),
            ),
            (TriggerKind::MiThreshold, Some(mi)) if !mi.threshold.is_finite() => {
                Err(Error::InvalidArgument("mi threshold must be finite".into()))
            }
            (TriggerKind::CountChange | TriggerKind::PresenceChange, Some(_)) => {
                Err(Error::InvalidArgument(
                    "mi parameters are only valid for the mi-threshold trigger".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    fn segment(&self, record: &TimestepRecord) -> Result<BinaryMask> {
        let field = match &self.channel {
            Some(tag) => record.channel(tag).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "timestep {} has no channel {tag:?}",
                    record.index()
                ))
            })?,
            None => record.first_channel().1,
        };
        match &self.background {
            Some(bg) => segment_background(field, bg, self.seg_threshold),
            None => Ok(segment_threshold(
                field,
                self.seg_threshold,
                self.seg_polarity,
            )),
        }
    }

    /// Filtered component count of a record's segmentation channel.
    pub fn component_count(&self, record: &TimestepRecord) -> Result<usize> {
        let mask = self.segment(record)?;
        Ok(connected_components(&mask, self.connectivity, self.min_component_size)?.count)
    }

    /// MI between the configured channel pair.
    pub fn channel_mi(&self, record: &TimestepRecord) -> Result<f64> {
        let mi = self
            .mi
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("no mi trigger configured".into()))?;
        let get = |tag: &str| {
            record.channel(tag).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "timestep {} has no channel {tag:?}",
                    record.index()
                ))
            })
        };
        let joint = build_joint(get(&mi.channel_a)?, get(&mi.channel_b)?, mi.bin_count)?;
        Ok(mutual_information(&joint))
    }
}

/// What the trigger remembers between timesteps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriggerState {
    consumed: usize,
    prev_count: Option<usize>,
    prev_mi: Option<f64>,
}

impl TriggerState {
    pub fn consumed(&self) -> usize {
        self.consumed
    }

    pub fn last_count(&self) -> Option<usize> {
        self.prev_count
    }

    pub fn last_mi(&self) -> Option<f64> {
        self.prev_mi
    }
}

/// Decides whether `record` is a key timestep. The first record evaluated
/// from a fresh state always fires. For presence-change the baseline is the
/// second record rather than the first, so a feature that is already visible
/// right after the stored first record does not fire on its appearance.
pub fn evaluate_trigger(
    prev: &TriggerState,
    record: &TimestepRecord,
    config: &TriggerConfig,
) -> Result<(bool, TriggerState)> {
    config.validate()?;
    let first = prev.consumed == 0;
    let mut next = TriggerState {
        consumed: prev.consumed + 1,
        ..prev.clone()
    };
    let fired = match config.kind {
        TriggerKind::CountChange | TriggerKind::PresenceChange => {
            let count = config.component_count(record)?;
            if !(first && config.kind == TriggerKind::PresenceChange) {
                next.prev_count = Some(count);
            }
            match prev.prev_count {
                _ if first => true,
                None => false,
                Some(before) if config.kind == TriggerKind::CountChange => before != count,
                Some(before) => (before > 0) != (count > 0),
            }
        }
        TriggerKind::MiThreshold => {
            let mi = config.channel_mi(record)?;
            next.prev_mi = Some(mi);
            let threshold = config
                .mi
                .as_ref()
                .map(|m| m.threshold)
                .unwrap_or(f64::INFINITY);
            first || mi >= threshold
        }
    };
    Ok((fired, next))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image(width: usize, height: usize, s: Vec<f64>) -> Field {
        Field::new(Shape::image(width, height).unwrap(), s).unwrap()
    }

    fn mask(width: usize, rows: &[&str]) -> BinaryMask {
        let bits: Vec<u8> = rows
            .iter()
            .flat_map(|r| r.bytes().map(|b| (b == b'#') as u8))
            .collect();
        BinaryMask::new(Shape::image(width, rows.len()).unwrap(), bits).unwrap()
    }

    /// Flood fill oracle: number of components with size >= min_size.
    fn flood_count(m: &BinaryMask, conn: Connectivity, min_size: usize) -> usize {
        let (w, h) = m.shape().as_image().unwrap();
        let mut seen = vec![false; w * h];
        let mut count = 0;
        for start in 0..w * h {
            if m.bits()[start] == 0 || seen[start] {
                continue;
            }
            let mut stack = vec![start];
            seen[start] = true;
            let mut size = 0;
            while let Some(p) = stack.pop() {
                size += 1;
                let (x, y) = ((p % w) as isize, (p / w) as isize);
                for dy in -1..=1isize {
                    for dx in -1..=1isize {
                        if (dx == 0 && dy == 0)
                            || (conn == Connectivity::Four && dx != 0 && dy != 0)
                        {
                            continue;
                        }
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                            continue;
                        }
                        let q = ny as usize * w + nx as usize;
                        if m.bits()[q] == 1 && !seen[q] {
                            seen[q] = true;
                            stack.push(q);
                        }
                    }
                }
            }
            if size >= min_size {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn threshold_segmentation() {
        let f = image(2, 2, vec![0., 255., 255., 0.]);
        assert_eq!(
            segment_threshold(&f, 128.0, Polarity::Above).bits(),
            &[0, 1, 1, 0]
        );
        assert_eq!(
            segment_threshold(&f, 128.0, Polarity::Below).bits(),
            &[1, 0, 0, 1]
        );
        let c = image(2, 2, vec![5.0; 4]);
        assert_eq!(segment_threshold(&c, 10.0, Polarity::Above).count_ones(), 0);
    }

    #[test]
    fn density_blobs_below_cutoff() {
        // two low-density pockets in a dense bed
        let (w, h) = (20, 10);
        let mut s = vec![29.0; w * h];
        for (cx, cy) in [(4usize, 4usize), (14, 5)] {
            for y in cy - 1..=cy + 1 {
                for x in cx - 1..=cx + 1 {
                    s[y * w + x] = 0.5;
                }
            }
        }
        let m = segment_threshold(&image(w, h, s), 2.0, Polarity::Below);
        let cs = connected_components(&m, Connectivity::Eight, 1).unwrap();
        assert_eq!(cs.count, 2);
        assert_eq!(cs.count, flood_count(&m, Connectivity::Eight, 1));
    }

    #[test]
    fn components_empty_and_single() {
        let m = mask(4, &["....", "....", "...."]);
        assert_eq!(
            connected_components(&m, Connectivity::Eight, 1)
                .unwrap()
                .count,
            0
        );

        let (w, h, r) = (21usize, 21usize, 6.0f64);
        let bits: Vec<u8> = (0..w * h)
            .map(|i| {
                let (x, y) = ((i % w) as f64 - 10.0, (i / w) as f64 - 10.0);
                (x * x + y * y <= r * r) as u8
            })
            .collect();
        let area = bits.iter().filter(|&&b| b == 1).count();
        let m = BinaryMask::new(Shape::image(w, h).unwrap(), bits).unwrap();
        let cs = connected_components(&m, Connectivity::Eight, 1).unwrap();
        assert_eq!(cs.count, 1);
        assert_eq!(cs.components[0].size, area);
        assert!((area as f64 - std::f64::consts::PI * r * r).abs() < 0.15 * area as f64);
        assert_eq!(
            cs.components[0].bbox,
            BoundingBox {
                min_x: 4,
                min_y: 4,
                max_x: 16,
                max_y: 16
            }
        );
    }

    #[test]
    fn diagonal_touch_depends_on_connectivity() {
        let m = mask(6, &["##....", "##....", "..##..", "..##..", "......"]);
        assert_eq!(
            connected_components(&m, Connectivity::Eight, 1)
                .unwrap()
                .count,
            1
        );
        assert_eq!(
            connected_components(&m, Connectivity::Four, 1)
                .unwrap()
                .count,
            2
        );
        assert_eq!(flood_count(&m, Connectivity::Eight, 1), 1);
        assert_eq!(flood_count(&m, Connectivity::Four, 1), 2);
    }

    #[test]
    fn u_shape_merges_labels() {
        let m = mask(5, &["#...#", "#...#", "#.#.#", "#####"]);
        let cs = connected_components(&m, Connectivity::Four, 1).unwrap();
        assert_eq!(cs.count, 1);
        assert!(cs.labeled.labels().iter().all(|&l| l <= 1));
    }

    #[test]
    fn size_filter_relabels() {
        let m = mask(6, &["#....#", "....##", "##....", "##...."]);
        let cs = connected_components(&m, Connectivity::Eight, 3).unwrap();
        assert_eq!(cs.count, 2);
        assert_eq!(
            cs.components.iter().map(|c| c.label).collect::<Vec<_>>(),
            vec![1, 2]
        );
        assert_eq!(cs.labeled.labels()[0], 0);
        assert_eq!(cs.labeled.max_label(), 2);
    }

    #[test]
    fn non_2d_masks_are_rejected() {
        let m = BinaryMask::new(Shape::new(vec![2, 2, 2]).unwrap(), vec![0; 8]).unwrap();
        assert!(matches!(
            connected_components(&m, Connectivity::Eight, 1),
            Err(Error::UnsupportedShape(_))
        ));
    }

    #[test]
    fn median_background_and_difference() {
        let frames: Vec<Field> = [1.0, 9.0, 2.0]
            .iter()
            .map(|&v| image(2, 1, vec![v, 5.0]))
            .collect();
        let bg = median_background(&frames).unwrap();
        assert_eq!(bg.samples(), &[2.0, 5.0]);
        let frames4: Vec<Field> = [1.0, 9.0, 2.0, 4.0]
            .iter()
            .map(|&v| image(1, 1, vec![v]))
            .collect();
        assert_eq!(median_background(&frames4).unwrap().samples(), &[3.0]);
        let m = segment_background(&image(2, 1, vec![2.5, 50.0]), &bg, 10.0).unwrap();
        assert_eq!(m.bits(), &[0, 1]);
        assert!(matches!(median_background(&[]), Err(Error::EmptyInput)));
    }

    fn binary_record(index: usize, rows: &[&str]) -> TimestepRecord {
        let w = rows[0].len();
        let s = rows
            .iter()
            .flat_map(|r| r.bytes().map(|b| if b == b'#' { 255.0 } else { 0.0 }))
            .collect();
        TimestepRecord::single(index, "gray", image(w, rows.len(), s)).unwrap()
    }

    #[test]
    fn first_record_always_fires() {
        let cfg = TriggerConfig::segmentation(TriggerKind::CountChange, 128.0, Polarity::Above);
        let (fired, st) =
            evaluate_trigger(&TriggerState::default(), &binary_record(0, &["...."]), &cfg).unwrap();
        assert!(fired);
        assert_eq!(st.last_count(), Some(0));
        assert_eq!(st.consumed(), 1);
    }

    #[test]
    fn presence_baseline_is_the_second_record() {
        let cfg = TriggerConfig::segmentation(TriggerKind::PresenceChange, 128.0, Polarity::Above);
        let (fired, st) =
            evaluate_trigger(&TriggerState::default(), &binary_record(0, &["...."]), &cfg).unwrap();
        assert!(fired);
        assert_eq!(st.last_count(), None);
        let (fired, st) = evaluate_trigger(&st, &binary_record(1, &["#..#"]), &cfg).unwrap();
        assert!(!fired);
        assert_eq!(st.last_count(), Some(2));
        let (fired, _) = evaluate_trigger(&st, &binary_record(2, &["...."]), &cfg).unwrap();
        assert!(fired);
    }

    /// State after the stored first record and one baseline record.
    fn seeded(rows: &[&str], cfg: &TriggerConfig) -> TriggerState {
        let (_, st) =
            evaluate_trigger(&TriggerState::default(), &binary_record(0, rows), cfg).unwrap();
        evaluate_trigger(&st, &binary_record(1, rows), cfg)
            .unwrap()
            .1
    }

    #[test]
    fn ball_entry_fires_presence() {
        let cfg = TriggerConfig::segmentation(TriggerKind::PresenceChange, 128.0, Polarity::Above);
        let st = seeded(&["....", "...."], &cfg);
        let (fired, st) =
            evaluate_trigger(&st, &binary_record(2, &["##..", "##.."]), &cfg).unwrap();
        assert!(fired);
        let (fired, _) = evaluate_trigger(&st, &binary_record(3, &[".##.", ".##."]), &cfg).unwrap();
        assert!(!fired);
    }

    #[test]
    fn steady_count_does_not_fire() {
        let cfg = TriggerConfig::segmentation(TriggerKind::CountChange, 128.0, Polarity::Above);
        let frames = [
            ["#.#..", "....."],
            ["#.#..", "....."],
            [".#.#.", "....."],
            ["..#.#", "....."],
        ];
        let mut st = TriggerState::default();
        let mut fires = vec![];
        for (i, rows) in frames.iter().enumerate() {
            let (f, s) = evaluate_trigger(&st, &binary_record(i, rows), &cfg).unwrap();
            fires.push(f);
            st = s;
        }
        assert_eq!(fires, vec![true, false, false, false]);
        // presence ignores the move from 2 to 1 blob
        let cfg_p =
            TriggerConfig::segmentation(TriggerKind::PresenceChange, 128.0, Polarity::Above);
        let st = seeded(&["#.#"], &cfg_p);
        assert!(
            !evaluate_trigger(&st, &binary_record(2, &["##."]), &cfg_p)
                .unwrap()
                .0
        );
        assert!(
            evaluate_trigger(&st, &binary_record(2, &["##."]), &cfg)
                .unwrap()
                .0
        );
    }

    fn two_channel(index: usize, red: Vec<f64>, green: Vec<f64>) -> TimestepRecord {
        let n = red.len();
        TimestepRecord::new(
            index,
            vec![
                ("red".into(), image(n, 1, red)),
                ("green".into(), image(n, 1, green)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn mi_trigger() {
        let cfg = TriggerConfig::mi_threshold(0.5, "red", "green");
        let red = vec![0., 0., 255., 255., 0., 0., 255., 255.];
        let (_, st) = evaluate_trigger(
            &TriggerState::default(),
            &two_channel(0, red.clone(), red.clone()),
            &cfg,
        )
        .unwrap();
        // identical channels: MI = H(red) = 1 bit
        let (fired, st) =
            evaluate_trigger(&st, &two_channel(1, red.clone(), red.clone()), &cfg).unwrap();
        assert!(fired);
        assert!((st.last_mi().unwrap() - 1.0).abs() < 1e-12);
        let green = vec![0., 255., 0., 255., 0., 255., 0., 255.];
        let (fired, st) = evaluate_trigger(&st, &two_channel(2, red.clone(), green), &cfg).unwrap();
        assert!(!fired);
        assert!(st.last_mi().unwrap().abs() < 1e-12);

        let exact = TriggerConfig::mi_threshold(1.0, "red", "green");
        let (fired, _) =
            evaluate_trigger(&st, &two_channel(3, red.clone(), red.clone()), &exact).unwrap();
        assert!(fired, "threshold is inclusive");
    }

    #[test]
    fn missing_channel_is_invalid() {
        let cfg = TriggerConfig::mi_threshold(0.5, "red", "blue");
        let r = two_channel(0, vec![0., 1.], vec![1., 0.]);
        assert!(matches!(
            evaluate_trigger(&TriggerState::default(), &r, &cfg),
            Err(Error::InvalidArgument(_))
        ));
        let mut seg = TriggerConfig::segmentation(TriggerKind::CountChange, 0.5, Polarity::Above);
        seg.channel = Some("alpha".into());
        assert!(evaluate_trigger(&TriggerState::default(), &r, &seg).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = TriggerConfig::segmentation(TriggerKind::MiThreshold, 0.0, Polarity::Above);
        assert!(c.validate().is_err());
        c = TriggerConfig::mi_threshold(0.1, "a", "b");
        c.kind = TriggerKind::CountChange;
        assert!(c.validate().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn mask_strategy() -> impl Strategy<Value = (usize, usize, Vec<u8>)> {
            (1usize..14, 1usize..14).prop_flat_map(|(w, h)| {
                (
                    Just(w),
                    Just(h),
                    proptest::collection::vec(prop_oneof![3 => Just(0u8), 2 => Just(1u8)], w * h),
                )
            })
        }

        proptest! {
            #[test]
            fn matches_flood_fill((w, h, bits) in mask_strategy(), min in 1usize..5) {
                let m = BinaryMask::new(Shape::image(w, h).unwrap(), bits).unwrap();
                for conn in [Connectivity::Four, Connectivity::Eight] {
                    let cs = connected_components(&m, conn, min).unwrap();
                    prop_assert_eq!(cs.count, flood_count(&m, conn, min));
                    prop_assert_eq!(cs.count, cs.components.len());
                    prop_assert!(cs.components.iter().all(|c| c.size >= min));
                    prop_assert_eq!(cs.labeled.max_label() as usize, cs.count);
                }
            }

            #[test]
            fn min_size_monotone((w, h, bits) in mask_strategy(), a in 1usize..6, b in 1usize..6) {
                let m = BinaryMask::new(Shape::image(w, h).unwrap(), bits).unwrap();
                let (lo, hi) = (a.min(b), a.max(b));
                let c_lo = connected_components(&m, Connectivity::Eight, lo).unwrap().count;
                let c_hi = connected_components(&m, Connectivity::Eight, hi).unwrap().count;
                prop_assert!(c_hi <= c_lo);
            }

            #[test]
            fn translation_invariant((w, h, bits) in mask_strategy(), dx in 0usize..4, dy in 0usize..4) {
                let m = BinaryMask::new(Shape::image(w, h).unwrap(), bits.clone()).unwrap();
                let (w2, h2) = (w + dx, h + dy);
                let mut shifted = vec![0u8; w2 * h2];
                for y in 0..h {
                    for x in 0..w {
                        shifted[(y + dy) * w2 + x + dx] = bits[y * w + x];
                    }
                }
                let m2 = BinaryMask::new(Shape::image(w2, h2).unwrap(), shifted).unwrap();
                for conn in [Connectivity::Four, Connectivity::Eight] {
                    prop_assert_eq!(
                        connected_components(&m, conn, 1).unwrap().count,
                        connected_components(&m2, conn, 1).unwrap().count
                    );
                }
            }

            #[test]
            fn presence_fires_subset_of_count_fires(seq in proptest::collection::vec(proptest::collection::vec(0u8..2, 12), 1..12)) {
                let cfg_c = TriggerConfig::segmentation(TriggerKind::CountChange, 0.5, Polarity::Above);
                let cfg_p = TriggerConfig::segmentation(TriggerKind::PresenceChange, 0.5, Polarity::Above);
                let (mut sc, mut sp) = (TriggerState::default(), TriggerState::default());
                for (i, bits) in seq.iter().enumerate() {
                    let f = image(4, 3, bits.iter().map(|&b| b as f64).collect());
                    let rec = TimestepRecord::single(i, "v", f).unwrap();
                    let (fc, nc) = evaluate_trigger(&sc, &rec, &cfg_c).unwrap();
                    let (fp, np) = evaluate_trigger(&sp, &rec, &cfg_p).unwrap();
                    prop_assert!(!fp || fc);
                    let again = evaluate_trigger(&sc, &rec, &cfg_c).unwrap();
                    prop_assert_eq!(again, (fc, nc.clone()));
                    sc = nc;
                    sp = np;
                }
            }
        }
    }
}
