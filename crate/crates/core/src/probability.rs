//! Histogram estimates of marginal, joint and conditional distributions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;

/// Default bin count for 8-bit image data.
pub const DEFAULT_IMAGE_BINS: usize = 256;
/// Default bin count for floating-point scalar data.
pub const DEFAULT_SCALAR_BINS: usize = 128;

/// Equal-width bins over `[lo, hi]`. Samples outside the range are clamped
/// into the end bins; a degenerate range sends everything to bin 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinningSpec {
    bin_count: usize,
    lo: f64,
    hi: f64,
}

impl BinningSpec {
    pub fn new(bin_count: usize, lo: f64, hi: f64) -> Result<Self> {
        if bin_count == 0 {
            return Err(Error::InvalidArgument(
                "bin count must be at least 1".into(),
            ));
        }
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidArgument(format!(
                "invalid bin range [{lo}, {hi}]"
            )));
        }
        Ok(BinningSpec { bin_count, lo, hi })
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    #[inline]
    pub fn bin_of(&self, sample: f64) -> usize {
        if self.is_degenerate() {
            return 0;
        }
        let t = (sample - self.lo) / (self.hi - self.lo) * self.bin_count as f64;
        let last = self.bin_count - 1;
        if t <= 0.0 {
            0
        } else {
            (t.floor() as usize).min(last)
        }
    }

    /// Midpoint of a bin, mapped back to sample space.
    pub fn bin_center(&self, bin: usize) -> f64 {
        if self.is_degenerate() {
            return self.lo;
        }
        let width = (self.hi - self.lo) / self.bin_count as f64;
        self.lo + (bin as f64 + 0.5) * width
    }
}

/// Bins spanning the field's observed range.
pub fn build_binning(field: &Field, bin_count: usize) -> Result<BinningSpec> {
    let (lo, hi) = field.minmax();
    BinningSpec::new(bin_count, lo, hi)
}

/// Binned joint probability table of a field pair. `p` is stored row-major
/// with `x` indexing rows.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    bins_x: usize,
    bins_y: usize,
    p: Vec<f64>,
    px: Vec<f64>,
    py: Vec<f64>,
    binning_x: BinningSpec,
    binning_y: BinningSpec,
}

impl JointDistribution {
    /// Normalizes a `bins_x * bins_y` count table. Binnings default to the
    /// integer ranges `[0, bins - 1]`.
    pub fn from_counts(counts: &[u64], bins_x: usize, bins_y: usize) -> Result<Self> {
        let bx = BinningSpec::new(bins_x, 0.0, bins_x.saturating_sub(1) as f64)?;
        let by = BinningSpec::new(bins_y, 0.0, bins_y.saturating_sub(1) as f64)?;
        Self::from_counts_with(counts, bx, by)
    }

    fn from_counts_with(
        counts: &[u64],
        binning_x: BinningSpec,
        binning_y: BinningSpec,
    ) -> Result<Self> {
        let bins_x = binning_x.bin_count();
        let bins_y = binning_y.bin_count();
        if counts.len() != bins_x * bins_y {
            return Err(Error::InvalidArgument(format!(
                "count table has {} cells, expected {bins_x}x{bins_y}",
                counts.len()
            )));
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidArgument("count table is empty".into()));
        }
        let n = total as f64;
        let p: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
        let px = (0..bins_x)
            .map(|i| p[i * bins_y..(i + 1) * bins_y].iter().sum())
            .collect();
        let py = (0..bins_y)
            .map(|j| (0..bins_x).map(|i| p[i * bins_y + j]).sum())
            .collect();
        Ok(JointDistribution {
            bins_x,
            bins_y,
            p,
            px,
            py,
            binning_x,
            binning_y,
        })
    }

    pub fn bins_x(&self) -> usize {
        self.bins_x
    }

    pub fn bins_y(&self) -> usize {
        self.bins_y
    }

    #[inline]
    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.p[x * self.bins_y + y]
    }

    pub fn table(&self) -> &[f64] {
        &self.p
    }

    pub fn px(&self) -> &[f64] {
        &self.px
    }

    pub fn py(&self) -> &[f64] {
        &self.py
    }

    pub fn binning_x(&self) -> &BinningSpec {
        &self.binning_x
    }

    pub fn binning_y(&self) -> &BinningSpec {
        &self.binning_y
    }

    /// The same distribution with the roles of X and Y swapped. Marginals are
    /// carried over rather than re-summed, so `t.px() == self.py()` exactly.
    pub fn transpose(&self) -> JointDistribution {
        let mut p = vec![0.0; self.p.len()];
        for i in 0..self.bins_x {
            for j in 0..self.bins_y {
                p[j * self.bins_x + i] = self.p[i * self.bins_y + j];
            }
        }
        JointDistribution {
            bins_x: self.bins_y,
            bins_y: self.bins_x,
            p,
            px: self.py.clone(),
            py: self.px.clone(),
            binning_x: self.binning_y,
            binning_y: self.binning_x,
        }
    }

    /// `p(x | y)` over all x bins.
    pub fn conditional(&self, y_bin: usize) -> Result<Vec<f64>> {
        let py = self.observed_y(y_bin)?;
        Ok((0..self.bins_x).map(|i| self.p(i, y_bin) / py).collect())
    }

    pub(crate) fn observed_y(&self, y_bin: usize) -> Result<f64> {
        match self.py.get(y_bin) {
            Some(&py) if py > 0.0 => Ok(py),
            _ => Err(Error::UndefinedConditional { bin: y_bin }),
        }
    }
}

/// Joint histogram of two equally shaped fields, each binned over its own
/// observed range.
pub fn build_joint(
    field_x: &Field,
    field_y: &Field,
    bin_count: usize,
) -> Result<JointDistribution> {
    if field_x.shape() != field_y.shape() {
        return Err(Error::InvalidArgument(format!(
            "shape mismatch: {:?} vs {:?}",
            field_x.shape().dims(),
            field_y.shape().dims()
        )));
    }
    let bx = build_binning(field_x, bin_count)?;
    let by = build_binning(field_y, bin_count)?;
    let mut counts = vec![0u64; bin_count * bin_count];
    for (&x, &y) in field_x.samples().iter().zip(field_y.samples()) {
        counts[bx.bin_of(x) * bin_count + by.bin_of(y)] += 1;
    }
    JointDistribution::from_counts_with(&counts, bx, by)
}

/// Free-function form of [`JointDistribution::conditional`].
pub fn conditional(joint: &JointDistribution, y_bin: usize) -> Result<Vec<f64>> {
    joint.conditional(y_bin)
}
