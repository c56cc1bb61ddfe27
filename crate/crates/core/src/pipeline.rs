//! Streaming key/fuse state machine and its manifest.
//!
//! Records are consumed one at a time. A firing record is saved raw; the
//! quiet records between two firings form a run that is folded into a
//! [`RunFuser`] as it arrives, so only the accumulator is ever held. Runs of
//! one record are discarded.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{evaluate_trigger, TriggerConfig};
use crate::field::{Shape, SummaryBundle, TimestepRecord};
use crate::fusion::{FusionConfig, RunFuser};

pub use crate::features::TriggerState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ManifestEntry {
    Key {
        index: usize,
    },
    Fused {
        run_start: usize,
        run_end: usize,
        /// Local label to absolute timestep.
        #[serde(with = "label_map")]
        label_map: BTreeMap<u32, usize>,
    },
    Discarded {
        index: usize,
    },
}

// JSON object keys are strings; internally tagged enums lose serde_json's
// integer-key coercion, so labels are parsed back explicitly.
mod label_map {
    use std::collections::BTreeMap;

    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<u32, usize>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(map.iter().map(|(k, v)| (k.to_string(), v)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u32, usize>, D::Error> {
        let raw = BTreeMap::<String, usize>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| k.parse::<u32>().map(|k| (k, v)).map_err(D::Error::custom))
            .collect()
    }
}

impl ManifestEntry {
    fn fused(bundle: &SummaryBundle) -> Self {
        let label_map = (1..=bundle.run_len() as u32)
            .map(|l| (l, bundle.run_start + l as usize - 1))
            .collect();
        ManifestEntry::Fused {
            run_start: bundle.run_start,
            run_end: bundle.run_end,
            label_map,
        }
    }

    pub fn is_output(&self) -> bool {
        !matches!(self, ManifestEntry::Discarded { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionStats {
    pub input_count: usize,
    pub output_count: usize,
    /// `1 - output_count / input_count`, rounded to 4 decimals.
    pub reduction_ratio: f64,
}

impl ReductionStats {
    pub fn new(input_count: usize, output_count: usize) -> Self {
        let ratio = if input_count == 0 {
            0.0
        } else {
            1.0 - output_count as f64 / input_count as f64
        };
        ReductionStats {
            input_count,
            output_count,
            reduction_ratio: (ratio * 1e4).round() / 1e4,
        }
    }
}

/// Parameters echoed into the manifest so a run can be reproduced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub fusion_channel: Option<String>,
    pub trigger: TriggerConfig,
    pub fusion: FusionConfig,
    pub binning: String,
    pub log_base: u32,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub extra: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
    pub stats: ReductionStats,
    pub config: ConfigEcho,
}

impl Manifest {
    pub fn key_indices(&self) -> Vec<usize> {
        self.entries
            .iter()
            .filter_map(|e| match e {
                ManifestEntry::Key { index } => Some(*index),
                _ => None,
            })
            .collect()
    }

    pub fn fused_ranges(&self) -> Vec<(usize, usize)> {
        self.entries
            .iter()
            .filter_map(|e| match e {
                ManifestEntry::Fused {
                    run_start, run_end, ..
                } => Some((*run_start, *run_end)),
                _ => None,
            })
            .collect()
    }

    pub fn discarded_indices(&self) -> Vec<usize> {
        self.entries
            .iter()
            .filter_map(|e| match e {
                ManifestEntry::Discarded { index } => Some(*index),
                _ => None,
            })
            .collect()
    }

    /// Checks that every input index appears exactly once, in order, and that
    /// every fused run has at least two timesteps.
    pub fn check_conservation(&self) -> Result<()> {
        let mut next = 0usize;
        for e in &self.entries {
            let (start, end) = match e {
                ManifestEntry::Key { index } | ManifestEntry::Discarded { index } => {
                    (*index, *index)
                }
                ManifestEntry::Fused {
                    run_start, run_end, ..
                } => {
                    if run_end <= run_start {
                        return Err(Error::InvalidSequence(format!(
                            "fused run {run_start}..={run_end} is too short"
                        )));
                    }
                    (*run_start, *run_end)
                }
            };
            if start != next {
                return Err(Error::InvalidSequence(format!(
                    "manifest expected index {next}, found {start}"
                )));
            }
            next = end + 1;
        }
        if next != self.stats.input_count {
            return Err(Error::InvalidSequence(format!(
                "manifest covers {next} of {} inputs",
                self.stats.input_count
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("bad manifest: {e}")))
    }
}

pub fn reduction_stats(manifest: &Manifest) -> ReductionStats {
    let outputs = manifest.entries.iter().filter(|e| e.is_output()).count();
    ReductionStats::new(manifest.stats.input_count, outputs)
}

/// Receives the pipeline's outputs as they are produced.
pub trait Sink {
    fn key(&mut self, record: &TimestepRecord) -> Result<()>;
    fn fused(&mut self, bundle: &SummaryBundle) -> Result<()>;
    fn discarded(&mut self, _index: usize) -> Result<()> {
        Ok(())
    }
}

/// Drops everything.
#[derive(Debug, Default)]
pub struct NullSink;

impl Sink for NullSink {
    fn key(&mut self, _record: &TimestepRecord) -> Result<()> {
        Ok(())
    }

    fn fused(&mut self, _bundle: &SummaryBundle) -> Result<()> {
        Ok(())
    }
}

/// Keeps every output in memory.
#[derive(Debug, Default)]
pub struct MemorySink {
    pub keys: Vec<TimestepRecord>,
    pub bundles: Vec<SummaryBundle>,
    pub discarded: Vec<usize>,
}

impl Sink for MemorySink {
    fn key(&mut self, record: &TimestepRecord) -> Result<()> {
        self.keys.push(record.clone());
        Ok(())
    }

    fn fused(&mut self, bundle: &SummaryBundle) -> Result<()> {
        self.bundles.push(bundle.clone());
        Ok(())
    }

    fn discarded(&mut self, index: usize) -> Result<()> {
        self.discarded.push(index);
        Ok(())
    }
}

struct Layout {
    shape: Shape,
    tags: Vec<String>,
}

/// Runs the key/fuse state machine over `source`. Fusion uses the trigger's
/// segmentation channel when set, else each record's first channel.
pub fn run_pipeline<I, S>(
    source: I,
    trigger: &TriggerConfig,
    fusion: &FusionConfig,
    sink: &mut S,
) -> Result<Manifest>
where
    I: IntoIterator<Item = Result<TimestepRecord>>,
    S: Sink + ?Sized,
{
    trigger.validate()?;
    fusion.validate()?;

    let mut entries = Vec::new();
    let mut state = TriggerState::default();
    let mut pending: Option<RunFuser> = None;
    let mut layout: Option<Layout> = None;
    let mut fusion_channel: Option<String> = trigger.channel.clone();
    let mut consumed = 0usize;

    for record in source {
        let record = record?;
        match &layout {
            None => {
                fusion_channel.get_or_insert_with(|| record.first_channel().0.to_string());
                layout = Some(Layout {
                    shape: record.shape().clone(),
                    tags: record
                        .channel_tags()
                        .iter()
                        .map(|t| t.to_string())
                        .collect(),
                });
            }
            Some(l) => {
                if record.shape() != &l.shape {
                    return Err(Error::InvalidSequence(format!(
                        "timestep {} has shape {:?}, sequence has {:?}",
                        record.index(),
                        record.shape().dims(),
                        l.shape.dims()
                    )));
                }
                if record.channel_tags() != l.tags {
                    return Err(Error::InvalidSequence(format!(
                        "timestep {} has channels {:?}, sequence has {:?}",
                        record.index(),
                        record.channel_tags(),
                        l.tags
                    )));
                }
            }
        }
        if record.index() != consumed {
            return Err(Error::InvalidSequence(format!(
                "expected timestep {consumed}, got {}",
                record.index()
            )));
        }
        consumed += 1;

        let (fired, next_state) = evaluate_trigger(&state, &record, trigger)?;
        state = next_state;

        if fired {
            flush(pending.take(), &mut entries, sink)?;
            sink.key(&record)?;
            entries.push(ManifestEntry::Key {
                index: record.index(),
            });
        } else {
            let channel = fusion_channel.as_deref().unwrap_or_default();
            let field = record.channel(channel).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "timestep {} has no channel {channel:?}",
                    record.index()
                ))
            })?;
            match pending.as_mut() {
                Some(run) => run.push(field, record.index())?,
                None => pending = Some(RunFuser::new(field, record.index(), fusion.clone())?),
            }
        }
    }

    if consumed == 0 {
        return Err(Error::EmptyInput);
    }
    flush(pending.take(), &mut entries, sink)?;

    let outputs = entries.iter().filter(|e| e.is_output()).count();
    let manifest = Manifest {
        entries,
        stats: ReductionStats::new(consumed, outputs),
        config: ConfigEcho {
            fusion_channel,
            trigger: trigger.clone(),
            fusion: fusion.clone(),
            binning: "equal-width over each field's observed range".into(),
            log_base: 2,
            extra: BTreeMap::new(),
        },
    };
    debug_assert!(manifest.check_conservation().is_ok());
    Ok(manifest)
}

fn flush<S: Sink + ?Sized>(
    run: Option<RunFuser>,
    entries: &mut Vec<ManifestEntry>,
    sink: &mut S,
) -> Result<()> {
    let Some(run) = run else { return Ok(()) };
    if run.len() == 1 {
        let index = run.run_start();
        log::debug!("discarding single quiet timestep {index}");
        sink.discarded(index)?;
        entries.push(ManifestEntry::Discarded { index });
        return Ok(());
    }
    let bundle = run.finish()?;
    sink.fused(&bundle)?;
    entries.push(ManifestEntry::fused(&bundle));
    Ok(())
}
