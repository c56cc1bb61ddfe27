//! The field data model: shaped grids of real samples and the label grids
//! produced by fusion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probability::BinningSpec;

/// Grid extents, outermost first. Samples are flattened row-major, so for a
/// 2D image `dims == [height, width]` and the last index varies fastest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.len() > 3 {
            return Err(Error::InvalidArgument(format!(
                "shape must have 1 to 3 dimensions, got {}",
                dims.len()
            )));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "zero extent in shape {dims:?}"
            )));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidArgument(format!("shape {dims:?} overflows")))?;
        Ok(Shape(dims))
    }

    /// 2D shape in image terms.
    pub fn image(width: usize, height: usize) -> Result<Self> {
        Shape::new(vec![height, width])
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(width, height)` for 2D shapes.
    pub fn as_image(&self) -> Option<(usize, usize)> {
        match self.0.as_slice() {
            &[h, w] => Some((w, h)),
            _ => None,
        }
    }
}

/// A shaped grid of finite real samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    shape: Shape,
    samples: Vec<f64>,
    channel: Option<String>,
}

impl Field {
    pub fn new(shape: Shape, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != shape.len() {
            return Err(Error::InvalidArgument(format!(
                "{} samples for shape {:?} ({} expected)",
                samples.len(),
                shape.dims(),
                shape.len()
            )));
        }
        if let Some(pos) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite sample {} at position {pos}",
                samples[pos]
            )));
        }
        Ok(Field {
            shape,
            samples,
            channel: None,
        })
    }

    pub fn filled(shape: Shape, value: f64) -> Result<Self> {
        let n = shape.len();
        Field::new(shape, vec![value; n])
    }

    pub fn with_channel(mut self, tag: impl Into<String>) -> Self {
        self.channel = Some(tag.into());
        self
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn channel(&self) -> Option<&str> {
        self.channel.as_deref()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Exact minimum and maximum sample values.
    pub fn minmax(&self) -> (f64, f64) {
        self.samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
                (lo.min(s), hi.max(s))
            })
    }

    /// Replaces every sample by `table[bin_of(sample)]`.
    pub fn map_samples(&self, table: &[f64], binning: &BinningSpec) -> Result<Field> {
        if table.len() != binning.bin_count() {
            return Err(Error::InvalidArgument(format!(
                "lookup table has {} entries for {} bins",
                table.len(),
                binning.bin_count()
            )));
        }
        let samples = self
            .samples
            .iter()
            .map(|&s| {
                let bin = binning.bin_of(s);
                table.get(bin).copied().ok_or_else(|| {
                    Error::Internal(format!("sample {s} binned to {bin}, outside the table"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Field {
            shape: self.shape.clone(),
            samples,
            channel: self.channel.clone(),
        })
    }

    pub(crate) fn from_parts_unchecked(shape: Shape, samples: Vec<f64>) -> Self {
        debug_assert_eq!(shape.len(), samples.len());
        Field {
            shape,
            samples,
            channel: None,
        }
    }
}

/// Free-function form of [`Field::minmax`].
pub fn minmax(field: &Field) -> (f64, f64) {
    field.minmax()
}

/// Free-function form of [`Field::map_samples`].
pub fn map_samples(field: &Field, table: &[f64], binning: &BinningSpec) -> Result<Field> {
    field.map_samples(table, binning)
}

/// Per-sample timestep labels. 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelField {
    shape: Shape,
    labels: Vec<u32>,
}

impl LabelField {
    pub fn zeros(shape: Shape) -> Self {
        let n = shape.len();
        LabelField {
            shape,
            labels: vec![0; n],
        }
    }

    pub fn new(shape: Shape, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != shape.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for shape {:?}",
                labels.len(),
                shape.dims()
            )));
        }
        Ok(LabelField { shape, labels })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub(crate) fn labels_mut(&mut self) -> &mut [u32] {
        &mut self.labels
    }

    pub fn max_label(&self) -> u32 {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// Sorted distinct nonzero labels.
    pub fn distinct_nonzero(&self) -> Vec<u32> {
        let mut seen: Vec<u32> = self.labels.iter().copied().filter(|&l| l != 0).collect();
        seen.sort_unstable();
        seen.dedup();
        seen
    }
}

/// One timestep of the input sequence: one or more equally shaped channels.
#[derive(Debug, Clone, PartialEq)]
pub struct TimestepRecord {
    index: usize,
    channels: Vec<(String, Field)>,
}

impl TimestepRecord {
    pub fn new(index: usize, channels: Vec<(String, Field)>) -> Result<Self> {
        let Some((_, first)) = channels.first() else {
            return Err(Error::InvalidArgument(format!(
                "timestep {index} has no channels"
            )));
        };
        let shape = first.shape().clone();
        for (tag, field) in &channels {
            if field.shape() != &shape {
                return Err(Error::InvalidArgument(format!(
                    "timestep {index}: channel {tag} has shape {:?}, expected {:?}",
                    field.shape().dims(),
                    shape.dims()
                )));
            }
        }
        let mut tags: Vec<&str> = channels.iter().map(|(t, _)| t.as_str()).collect();
        tags.sort_unstable();
        if tags.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!(
                "timestep {index}: duplicate channel tag"
            )));
        }
        let channels = channels
            .into_iter()
            .map(|(tag, field)| {
                let field = field.with_channel(tag.clone());
                (tag, field)
            })
            .collect();
        Ok(TimestepRecord { index, channels })
    }

    /// Single-channel convenience constructor.
    pub fn single(index: usize, tag: impl Into<String>, field: Field) -> Result<Self> {
        TimestepRecord::new(index, vec![(tag.into(), field)])
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn shape(&self) -> &Shape {
        self.channels[0].1.shape()
    }

    pub fn channel(&self, tag: &str) -> Option<&Field> {
        self.channels.iter().find(|(t, _)| t == tag).map(|(_, f)| f)
    }

    pub fn channels(&self) -> impl Iterator<Item = (&str, &Field)> {
        self.channels.iter().map(|(t, f)| (t.as_str(), f))
    }

    pub fn channel_tags(&self) -> Vec<&str> {
        self.channels.iter().map(|(t, _)| t.as_str()).collect()
    }

    pub fn first_channel(&self) -> (&str, &Field) {
        let (t, f) = &self.channels[0];
        (t, f)
    }
}

/// The three fused outputs of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryBundle {
    pub fused_data: Field,
    pub fused_info: Field,
    pub labels: LabelField,
    pub run_start: usize,
    pub run_end: usize,
}

impl SummaryBundle {
    pub fn run_len(&self) -> usize {
        self.run_end - self.run_start + 1
    }

    /// Absolute timestep for a local label (1-based). 0 has no timestep.
    pub fn absolute_index(&self, label: u32) -> Option<usize> {
        let label = label as usize;
        (1..=self.run_len())
            .contains(&label)
            .then(|| self.run_start + label - 1)
    }
}
