//! Pairwise information-guided fusion and the run loop built on it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, LabelField, SummaryBundle, TimestepRecord};
use crate::infotheory::{information_fields_both, InformationField, MeasureKind, SsiSign};
use crate::probability::DEFAULT_IMAGE_BINS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConfidenceDirection {
    /// Fused values strictly below the threshold are background.
    BelowIsBackground,
    /// Fused values strictly above the threshold are background.
    AboveIsBackground,
}

impl FromStr for ConfidenceDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "below-bg" | "below-is-background" => Ok(ConfidenceDirection::BelowIsBackground),
            "above-bg" | "above-is-background" => Ok(ConfidenceDirection::AboveIsBackground),
            other => Err(Error::InvalidArgument(format!(
                "unknown confidence direction {other:?}"
            ))),
        }
    }
}

impl fmt::Display for ConfidenceDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConfidenceDirection::BelowIsBackground => "below-bg",
            ConfidenceDirection::AboveIsBackground => "above-bg",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceRule {
    pub threshold: f64,
    pub comparator: ConfidenceDirection,
}

impl ConfidenceRule {
    pub fn below(threshold: f64) -> Self {
        ConfidenceRule {
            threshold,
            comparator: ConfidenceDirection::BelowIsBackground,
        }
    }

    pub fn above(threshold: f64) -> Self {
        ConfidenceRule {
            threshold,
            comparator: ConfidenceDirection::AboveIsBackground,
        }
    }

    #[inline]
    pub fn is_background(&self, value: f64) -> bool {
        match self.comparator {
            ConfidenceDirection::BelowIsBackground => value < self.threshold,
            ConfidenceDirection::AboveIsBackground => value > self.threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub measure: MeasureKind,
    pub bin_count: usize,
    /// `None` keeps every label.
    pub confidence: Option<ConfidenceRule>,
    #[serde(default)]
    pub ssi_sign: SsiSign,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            measure: MeasureKind::Surprise,
            bin_count: DEFAULT_IMAGE_BINS,
            confidence: None,
            ssi_sign: SsiSign::Positive,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bin_count == 0 {
            return Err(Error::InvalidArgument(
                "bin count must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Output of one fusion step.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedFields {
    pub data: Field,
    pub info: Field,
    pub labels: LabelField,
}

/// One fusion step: per position, keep `data1` where its information is
/// strictly greater, else take `data2` (ties go to the newer timestep). When
/// `data1` wins, the existing label is kept, except on the first step where it
/// becomes `time`. When `data2` wins the label becomes `time + 1`.
///
/// If a confidence rule is given, labels of fused values it rejects are then
/// reset to 0. Data and information values are left as they are.
#[allow(clippy::too_many_arguments)]
pub fn create_fusion_fields(
    data1: &Field,
    data2: &Field,
    ifield1: &InformationField,
    ifield2: &InformationField,
    labels: &LabelField,
    time: u32,
    confidence: Option<&ConfidenceRule>,
) -> Result<FusedFields> {
    let mut labels = labels.clone();
    let (data, info) = fusion_sweep(
        data1,
        data2,
        &ifield1.values,
        &ifield2.values,
        &mut labels,
        time,
    )?;
    if let Some(rule) = confidence {
        apply_confidence(&data, &mut labels, rule);
    }
    Ok(FusedFields { data, info, labels })
}

fn fusion_sweep(
    data1: &Field,
    data2: &Field,
    info1: &Field,
    info2: &Field,
    labels: &mut LabelField,
    time: u32,
) -> Result<(Field, Field)> {
    let shape = data1.shape();
    if data2.shape() != shape
        || info1.shape() != shape
        || info2.shape() != shape
        || labels.shape() != shape
    {
        return Err(Error::InvalidArgument(
            "fusion inputs must share one shape".into(),
        ));
    }
    if time < 1 {
        return Err(Error::InvalidArgument(
            "fusion time must be at least 1".into(),
        ));
    }
    let n = data1.len();
    let mut data = Vec::with_capacity(n);
    let mut info = Vec::with_capacity(n);
    let (d1, d2, i1, i2) = (
        data1.samples(),
        data2.samples(),
        info1.samples(),
        info2.samples(),
    );
    let labels = labels.labels_mut();
    for p in 0..n {
        if i1[p] > i2[p] {
            data.push(d1[p]);
            info.push(i1[p]);
            if time == 1 {
                labels[p] = time;
            }
        } else {
            data.push(d2[p]);
            info.push(i2[p]);
            labels[p] = time + 1;
        }
    }
    Ok((
        Field::from_parts_unchecked(shape.clone(), data),
        Field::from_parts_unchecked(shape.clone(), info),
    ))
}

fn apply_confidence(data: &Field, labels: &mut LabelField, rule: &ConfidenceRule) {
    for (label, &v) in labels.labels_mut().iter_mut().zip(data.samples()) {
        if rule.is_background(v) {
            *label = 0;
        }
    }
}

/// Incremental left fold of a run: holds only the accumulator, its
/// information values and labels. Frames are consumed as they arrive.
#[derive(Debug, Clone)]
pub struct RunFuser {
    config: FusionConfig,
    data: Field,
    info: Field,
    labels: LabelField,
    run_start: usize,
    last_index: usize,
    steps: u32,
}

impl RunFuser {
    /// Seeds the accumulator with the first frame of a run.
    pub fn new(first: &Field, index: usize, config: FusionConfig) -> Result<Self> {
        config.validate()?;
        let shape = first.shape().clone();
        Ok(RunFuser {
            config,
            data: first.clone(),
            info: Field::filled(shape.clone(), 0.0)?,
            labels: LabelField::zeros(shape),
            run_start: index,
            last_index: index,
            steps: 0,
        })
    }

    /// Number of frames consumed so far.
    pub fn len(&self) -> usize {
        self.steps as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn run_start(&self) -> usize {
        self.run_start
    }

    pub fn last_index(&self) -> usize {
        self.last_index
    }

    /// Fuses the next frame into the accumulator.
    pub fn push(&mut self, next: &Field, index: usize) -> Result<()> {
        if index != self.last_index + 1 {
            return Err(Error::InvalidSequence(format!(
                "run expected timestep {}, got {index}",
                self.last_index + 1
            )));
        }
        if next.shape() != self.data.shape() {
            return Err(Error::InvalidSequence(format!(
                "timestep {index} has shape {:?}, run has {:?}",
                next.shape().dims(),
                self.data.shape().dims()
            )));
        }
        let (ifield1, ifield2) = information_fields_both(
            &self.data,
            next,
            self.config.measure,
            self.config.bin_count,
            self.config.ssi_sign,
        )?;
        let time = self.steps + 1;
        let (data, info) = fusion_sweep(
            &self.data,
            next,
            &ifield1.values,
            &ifield2.values,
            &mut self.labels,
            time,
        )?;
        self.data = data;
        self.info = info;
        self.steps = time;
        self.last_index = index;
        Ok(())
    }

    /// Applies the confidence rule once and returns the summary. Runs of a
    /// single frame are rejected.
    pub fn finish(mut self) -> Result<SummaryBundle> {
        if self.steps == 0 {
            return Err(Error::InvalidArgument(
                "a fused run needs at least 2 timesteps".into(),
            ));
        }
        if let Some(rule) = &self.config.confidence {
            apply_confidence(&self.data, &mut self.labels, rule);
        }
        Ok(SummaryBundle {
            fused_data: self.data,
            fused_info: self.info,
            labels: self.labels,
            run_start: self.run_start,
            run_end: self.last_index,
        })
    }
}

/// Fuses a contiguous run of at least two records on one channel.
pub fn fuse_run(
    records: &[TimestepRecord],
    channel: &str,
    config: &FusionConfig,
) -> Result<SummaryBundle> {
    if records.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "a fused run needs at least 2 timesteps, got {}",
            records.len()
        )));
    }
    let pick = |r: &TimestepRecord| -> Result<Field> {
        r.channel(channel).cloned().ok_or_else(|| {
            Error::InvalidArgument(format!("timestep {} has no channel {channel:?}", r.index()))
        })
    };
    let mut fuser = RunFuser::new(&pick(&records[0])?, records[0].index(), config.clone())?;
    for r in &records[1..] {
        fuser.push(&pick(r)?, r.index())?;
    }
    fuser.finish()
}
