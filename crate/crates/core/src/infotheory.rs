//! Mutual information and its per-value decompositions, in bits.
//!
//! For a joint `p(x, y)` the specific measures are indexed by a `y` bin and
//! describe what observing that value says about `X`:
//!
//! * surprise: `I1(y;X) = sum_x p(x|y) log2(p(x|y) / p(x))`
//! * predictability: `I2(y;X) = H(X) - H(X|y)`
//! * stimulus-specific information: `I3(y;X) = sum_x p(x|y) I2(x;Y)`
//!
//! Each averages to `I(X;Y)` under `p(y)`. Cells with zero probability
//! contribute nothing to any sum.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::probability::{build_joint, JointDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    #[default]
    Surprise,
    Predictability,
    Ssi,
    Pmi,
}

impl MeasureKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MeasureKind::Surprise => "surprise",
            MeasureKind::Predictability => "predictability",
            MeasureKind::Ssi => "ssi",
            MeasureKind::Pmi => "pmi",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "surprise" | "i1" => Ok(MeasureKind::Surprise),
            "predictability" | "i2" => Ok(MeasureKind::Predictability),
            "ssi" | "i3" => Ok(MeasureKind::Ssi),
            "pmi" => Ok(MeasureKind::Pmi),
            other => Err(Error::InvalidArgument(format!("unknown measure {other:?}"))),
        }
    }
}

/// Sign convention for stimulus-specific information. The positive form is
/// the probability-weighted average of predictability; `Negated` flips it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SsiSign {
    #[default]
    Positive,
    Negated,
}

/// Which field of a pair supplies the per-sample values being scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reference {
    A,
    B,
}

/// Per-sample information values aligned with a source field.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationField {
    pub values: Field,
    pub measure: MeasureKind,
    pub reference: Reference,
}

#[inline]
fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits.
pub fn entropy(dist: &[f64]) -> f64 {
    -dist.iter().map(|&p| plogp(p)).sum::<f64>()
}

pub fn mutual_information(joint: &JointDistribution) -> f64 {
    let (px, py) = (joint.px(), joint.py());
    let mut mi = 0.0;
    for (i, &pxi) in px.iter().enumerate() {
        if pxi == 0.0 {
            continue;
        }
        for (j, &pyj) in py.iter().enumerate() {
            let pij = joint.p(i, j);
            if pij > 0.0 {
                mi += pij * (pij / (pxi * pyj)).log2();
            }
        }
    }
    mi
}

/// Surprise of observing `y_bin`: KL divergence of `p(x|y)` from `p(x)`.
pub fn surprise(joint: &JointDistribution, y_bin: usize) -> Result<f64> {
    let py = joint.observed_y(y_bin)?;
    Ok(surprise_unchecked(joint, y_bin, py))
}

fn surprise_unchecked(joint: &JointDistribution, y_bin: usize, py: f64) -> f64 {
    joint
        .px()
        .iter()
        .enumerate()
        .map(|(i, &pxi)| {
            let c = joint.p(i, y_bin) / py;
            if c > 0.0 {
                c * (c / pxi).log2()
            } else {
                0.0
            }
        })
        .sum()
}

/// Reduction in the entropy of X from observing `y_bin`. May be negative.
pub fn predictability(joint: &JointDistribution, y_bin: usize) -> Result<f64> {
    let py = joint.observed_y(y_bin)?;
    Ok(predictability_unchecked(
        joint,
        y_bin,
        py,
        entropy(joint.px()),
    ))
}

fn predictability_unchecked(joint: &JointDistribution, y_bin: usize, py: f64, hx: f64) -> f64 {
    let cond_neg_entropy: f64 = (0..joint.bins_x())
        .map(|i| plogp(joint.p(i, y_bin) / py))
        .sum();
    hx + cond_neg_entropy
}

/// Stimulus-specific information of `y_bin` (positive form).
pub fn ssi(joint: &JointDistribution, y_bin: usize) -> Result<f64> {
    ssi_signed(joint, y_bin, SsiSign::Positive)
}

pub fn ssi_signed(joint: &JointDistribution, y_bin: usize, sign: SsiSign) -> Result<f64> {
    let py = joint.observed_y(y_bin)?;
    let i2x = predictability_table(&joint.transpose());
    Ok(ssi_unchecked(joint, y_bin, py, &i2x, sign))
}

fn ssi_unchecked(
    joint: &JointDistribution,
    y_bin: usize,
    py: f64,
    i2x: &[f64],
    sign: SsiSign,
) -> f64 {
    let v: f64 = (0..joint.bins_x())
        .map(|i| {
            let c = joint.p(i, y_bin) / py;
            if c > 0.0 {
                c * i2x[i]
            } else {
                0.0
            }
        })
        .sum();
    match sign {
        SsiSign::Positive => v,
        SsiSign::Negated => -v,
    }
}

/// Pointwise mutual information of a bin pair. Pairs that never co-occur
/// report 0 rather than negative infinity.
pub fn pmi(joint: &JointDistribution, x_bin: usize, y_bin: usize) -> f64 {
    let pxy = joint.p(x_bin, y_bin);
    if pxy > 0.0 {
        (pxy / (joint.px()[x_bin] * joint.py()[y_bin])).log2()
    } else {
        0.0
    }
}

fn surprise_table(joint: &JointDistribution) -> Vec<f64> {
    joint
        .py()
        .iter()
        .enumerate()
        .map(|(j, &py)| {
            if py > 0.0 {
                surprise_unchecked(joint, j, py)
            } else {
                0.0
            }
        })
        .collect()
}

fn predictability_table(joint: &JointDistribution) -> Vec<f64> {
    let hx = entropy(joint.px());
    joint
        .py()
        .iter()
        .enumerate()
        .map(|(j, &py)| {
            if py > 0.0 {
                predictability_unchecked(joint, j, py, hx)
            } else {
                0.0
            }
        })
        .collect()
}

fn ssi_table(joint: &JointDistribution, sign: SsiSign) -> Vec<f64> {
    let i2x = predictability_table(&joint.transpose());
    joint
        .py()
        .iter()
        .enumerate()
        .map(|(j, &py)| {
            if py > 0.0 {
                ssi_unchecked(joint, j, py, &i2x, sign)
            } else {
                0.0
            }
        })
        .collect()
}

/// Specific measure for every `y` bin; unobserved bins hold 0. PMI has no
/// per-bin form and is rejected.
pub fn specific_table(
    joint: &JointDistribution,
    measure: MeasureKind,
    sign: SsiSign,
) -> Result<Vec<f64>> {
    match measure {
        MeasureKind::Surprise => Ok(surprise_table(joint)),
        MeasureKind::Predictability => Ok(predictability_table(joint)),
        MeasureKind::Ssi => Ok(ssi_table(joint, sign)),
        MeasureKind::Pmi => Err(Error::InvalidArgument(
            "pmi is a pairwise measure, not a per-bin one".into(),
        )),
    }
}

/// Scores every sample of the reference field against the other field.
pub fn information_field(
    field_a: &Field,
    field_b: &Field,
    measure: MeasureKind,
    reference: Reference,
    bin_count: usize,
) -> Result<InformationField> {
    information_field_signed(
        field_a,
        field_b,
        measure,
        reference,
        bin_count,
        SsiSign::Positive,
    )
}

pub fn information_field_signed(
    field_a: &Field,
    field_b: &Field,
    measure: MeasureKind,
    reference: Reference,
    bin_count: usize,
    sign: SsiSign,
) -> Result<InformationField> {
    let (subject, other) = match reference {
        Reference::A => (field_a, field_b),
        Reference::B => (field_b, field_a),
    };
    // Rows are the other field, columns the reference, so per-y tables index
    // the reference's bins.
    let joint = build_joint(other, subject, bin_count)?;
    information_field_from_joint(&joint, other, subject, measure, reference, sign)
}

/// Both directions from one pair of fields, sharing one histogram. The first
/// result scores `field_a`, the second `field_b`.
pub fn information_fields_both(
    field_a: &Field,
    field_b: &Field,
    measure: MeasureKind,
    bin_count: usize,
    sign: SsiSign,
) -> Result<(InformationField, InformationField)> {
    let joint_ba = build_joint(field_b, field_a, bin_count)?;
    let joint_ab = joint_ba.transpose();
    let a = information_field_from_joint(&joint_ba, field_b, field_a, measure, Reference::A, sign)?;
    let b = information_field_from_joint(&joint_ab, field_a, field_b, measure, Reference::B, sign)?;
    Ok((a, b))
}

fn information_field_from_joint(
    joint: &JointDistribution,
    other: &Field,
    subject: &Field,
    measure: MeasureKind,
    reference: Reference,
    sign: SsiSign,
) -> Result<InformationField> {
    let values = match measure {
        MeasureKind::Pmi => {
            let (bx, by) = (joint.binning_x(), joint.binning_y());
            let samples = other
                .samples()
                .iter()
                .zip(subject.samples())
                .map(|(&o, &s)| pmi(joint, bx.bin_of(o), by.bin_of(s)))
                .collect();
            Field::from_parts_unchecked(subject.shape().clone(), samples)
        }
        _ => {
            let table = specific_table(joint, measure, sign)?;
            subject.map_samples(&table, joint.binning_y())?
        }
    };
    Ok(InformationField {
        values,
        measure,
        reference,
    })
}
