//! Frame sequences on disk, raw field files and bundle output.
//!
//! Raw fields are little-endian `f32`, row-major, with a `meta.txt` sidecar
//! (`key=value` lines: `width`, `height`, optional `depth`, `dtype`) in the
//! same directory.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, LabelField, Shape, SummaryBundle, TimestepRecord};
use crate::pipeline::Sink;
use crate::render::{render_gray, render_labels, Palette, PaletteMode};

pub const SIDECAR: &str = "meta.txt";
pub const DEFAULT_GRAY_CHANNEL: &str = "gray";
pub const DEFAULT_RAW_CHANNEL: &str = "value";
const RGB_CHANNELS: [&str; 3] = ["red", "green", "blue"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetFormat {
    /// PGM or PNG frames, 8-bit. Colour images become red/green/blue channels.
    GrayImage,
    /// `.f32` frames plus a sidecar.
    RawF32,
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gray-image" => Ok(DatasetFormat::GrayImage),
            "raw-f32" => Ok(DatasetFormat::RawF32),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

impl fmt::Display for DatasetFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetFormat::GrayImage => "gray-image",
            DatasetFormat::RawF32 => "raw-f32",
        })
    }
}

/// Where and how to find an ordered frame sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetDescriptor {
    pub dir: PathBuf,
    pub format: DatasetFormat,
    /// Overrides the sidecar shape for raw frames.
    pub shape: Option<Shape>,
    /// Channel names. For grayscale images and untagged raw files the first
    /// entry names the single channel.
    pub channels: Vec<String>,
}

impl DatasetDescriptor {
    pub fn new(dir: impl Into<PathBuf>, format: DatasetFormat) -> Self {
        DatasetDescriptor {
            dir: dir.into(),
            format,
            shape: None,
            channels: Vec::new(),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn is_image_file(p: &Path) -> bool {
    matches!(
        p.extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref(),
        Some("pgm" | "pnm" | "ppm" | "png")
    )
}

fn is_raw_file(p: &Path) -> bool {
    p.extension().and_then(|e| e.to_str()) == Some("f32")
}

/// One timestep's files: `(channel tag, path)`.
type FrameFiles = Vec<(String, PathBuf)>;

fn list_frames(desc: &DatasetDescriptor) -> Result<Vec<FrameFiles>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(&desc.dir)
        .map_err(io_err(&desc.dir))?
        .map(|e| e.map(|e| e.path()).map_err(io_err(&desc.dir)))
        .collect::<Result<_>>()?;
    paths.sort();
    match desc.format {
        DatasetFormat::GrayImage => Ok(paths
            .into_iter()
            .filter(|p| is_image_file(p))
            .map(|p| vec![(String::new(), p)])
            .collect()),
        DatasetFormat::RawF32 => {
            // `stem.f32` is a single default channel, `stem.tag.f32` a tagged one
            let default = desc
                .channels
                .first()
                .map(String::as_str)
                .unwrap_or(DEFAULT_RAW_CHANNEL);
            let mut groups: BTreeMap<String, FrameFiles> = BTreeMap::new();
            for p in paths.into_iter().filter(|p| is_raw_file(p)) {
                let stem = p
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or_default()
                    .to_string();
                let (group, tag) = match stem.rsplit_once('.') {
                    Some((g, t)) => (g.to_string(), t.to_string()),
                    None => (stem.clone(), default.to_string()),
                };
                groups.entry(group).or_default().push((tag, p));
            }
            Ok(groups
                .into_values()
                .map(|mut files| {
                    if !desc.channels.is_empty() {
                        files.sort_by_key(|(t, _)| {
                            desc.channels
                                .iter()
                                .position(|c| c == t)
                                .unwrap_or(usize::MAX)
                        });
                    }
                    files
                })
                .collect())
        }
    }
}

/// Lazily decoded frame sequence. Each frame is read when requested.
#[derive(Debug)]
pub struct FrameSource {
    frames: std::vec::IntoIter<FrameFiles>,
    format: DatasetFormat,
    shape: Option<Shape>,
    channels: Vec<String>,
    next_index: usize,
    total: usize,
    layout: Option<(Shape, Vec<String>)>,
}

impl FrameSource {
    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    fn read_frame(&mut self, files: FrameFiles) -> Result<TimestepRecord> {
        let index = self.next_index;
        let channels = match self.format {
            DatasetFormat::GrayImage => {
                let (_, path) = &files[0];
                read_image_channels(path, &self.channels)?
            }
            DatasetFormat::RawF32 => {
                let mut out = Vec::with_capacity(files.len());
                for (tag, path) in files {
                    let shape = match &self.shape {
                        Some(s) => s.clone(),
                        None => read_sidecar(path.parent().unwrap_or(Path::new(".")))?,
                    };
                    out.push((tag, read_raw_f32(&path, &shape)?));
                }
                out
            }
        };
        let record = TimestepRecord::new(index, channels)?;
        let tags: Vec<String> = record
            .channel_tags()
            .iter()
            .map(|t| t.to_string())
            .collect();
        match &self.layout {
            None => self.layout = Some((record.shape().clone(), tags)),
            Some((shape, known)) => {
                if record.shape() != shape || &tags != known {
                    return Err(Error::InvalidSequence(format!(
                        "frame {index} has shape {:?} and channels {tags:?}, expected {:?} and {known:?}",
                        record.shape().dims(),
                        shape.dims()
                    )));
                }
            }
        }
        self.next_index += 1;
        Ok(record)
    }
}

impl Iterator for FrameSource {
    type Item = Result<TimestepRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        let files = self.frames.next()?;
        Some(self.read_frame(files))
    }
}

/// Opens an ordered frame sequence. Frames are ordered lexicographically by
/// file name, so indices should be zero-padded.
pub fn read_sequence(desc: &DatasetDescriptor) -> Result<FrameSource> {
    let frames = list_frames(desc)?;
    if frames.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(FrameSource {
        total: frames.len(),
        frames: frames.into_iter(),
        format: desc.format,
        shape: desc.shape.clone(),
        channels: desc.channels.clone(),
        next_index: 0,
        layout: None,
    })
}

fn read_image_channels(path: &Path, names: &[String]) -> Result<Vec<(String, Field)>> {
    let img = image::open(path).map_err(|e| Error::decode(path, e))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let shape = Shape::image(w, h)?;
    if img.color().has_color() {
        let rgb = img.to_rgb8();
        (0..3)
            .map(|c| {
                let tag = names
                    .get(c)
                    .cloned()
                    .unwrap_or_else(|| RGB_CHANNELS[c].to_string());
                let samples = rgb.pixels().map(|p| p.0[c] as f64).collect();
                Ok((tag, Field::new(shape.clone(), samples)?))
            })
            .collect()
    } else {
        let gray = img.to_luma8();
        let tag = names
            .first()
            .cloned()
            .unwrap_or_else(|| DEFAULT_GRAY_CHANNEL.to_string());
        let samples = gray.as_raw().iter().map(|&v| v as f64).collect();
        Ok(vec![(tag, Field::new(shape, samples)?)])
    }
}

/// Reads a single field from an image file or a `.f32` file with sidecar.
pub fn read_field_file(path: &Path) -> Result<Field> {
    if is_raw_file(path) {
        let shape = read_sidecar(path.parent().unwrap_or(Path::new(".")))?;
        read_raw_f32(path, &shape)
    } else {
        let mut channels = read_image_channels(path, &[])?;
        if channels.len() != 1 {
            return Err(Error::decode(path, "expected a single-channel image"));
        }
        Ok(channels.remove(0).1)
    }
}

pub fn write_raw_f32(path: &Path, field: &Field) -> Result<()> {
    let bytes: Vec<u8> = field
        .samples()
        .iter()
        .flat_map(|&s| (s as f32).to_le_bytes())
        .collect();
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn read_raw_f32(path: &Path, shape: &Shape) -> Result<Field> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    if bytes.len() != 4 * shape.len() {
        return Err(Error::decode(
            path,
            format!(
                "{} bytes, expected {} for shape {:?}",
                bytes.len(),
                4 * shape.len(),
                shape.dims()
            ),
        ));
    }
    let samples = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    Field::new(shape.clone(), samples).map_err(|e| Error::decode(path, e))
}

pub fn write_labels_u16(path: &Path, labels: &LabelField) -> Result<()> {
    let mut bytes = Vec::with_capacity(labels.labels().len() * 2);
    for &l in labels.labels() {
        let l = u16::try_from(l).map_err(|_| {
            Error::InvalidArgument(format!("label {l} does not fit a 16-bit label file"))
        })?;
        bytes.extend_from_slice(&l.to_le_bytes());
    }
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn read_labels_u16(path: &Path, shape: &Shape) -> Result<LabelField> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    if bytes.len() != 2 * shape.len() {
        return Err(Error::decode(
            path,
            format!("{} bytes, expected {}", bytes.len(), 2 * shape.len()),
        ));
    }
    let labels = bytes
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]) as u32)
        .collect();
    LabelField::new(shape.clone(), labels)
}

pub fn write_sidecar(dir: &Path, shape: &Shape) -> Result<()> {
    let dims = shape.dims();
    let mut text = String::new();
    let (w, h, d) = match dims {
        [n] => (*n, 1, None),
        [h, w] => (*w, *h, None),
        [d, h, w] => (*w, *h, Some(*d)),
        _ => unreachable!("shape has 1 to 3 dimensions"),
    };
    text.push_str(&format!("width={w}\nheight={h}\n"));
    if let Some(d) = d {
        text.push_str(&format!("depth={d}\n"));
    }
    text.push_str("dtype=f32\n");
    let path = dir.join(SIDECAR);
    fs::write(&path, text).map_err(io_err(&path))
}

pub fn read_sidecar(dir: &Path) -> Result<Shape> {
    let path = dir.join(SIDECAR);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let mut kv = BTreeMap::new();
    for line in text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
    {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::decode(&path, format!("bad line {line:?}")))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    if let Some(dtype) = kv.get("dtype") {
        if dtype != "f32" {
            return Err(Error::decode(&path, format!("unsupported dtype {dtype}")));
        }
    }
    let num = |k: &str| -> Result<Option<usize>> {
        kv.get(k)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| Error::decode(&path, format!("bad {k} {v:?}")))
            })
            .transpose()
    };
    let (w, h) = match (num("width")?, num("height")?) {
        (Some(w), Some(h)) => (w, h),
        _ => return Err(Error::decode(&path, "width and height are required")),
    };
    let dims = match num("depth")? {
        Some(d) => vec![d, h, w],
        None => vec![h, w],
    };
    Shape::new(dims).map_err(|e| Error::decode(&path, e))
}

/// Writes an 8-bit binary PGM (P5).
pub fn write_pgm(path: &Path, field: &Field) -> Result<()> {
    let (w, h) = field
        .shape()
        .as_image()
        .ok_or_else(|| Error::UnsupportedShape(field.shape().dims().to_vec()))?;
    let mut bytes = format!("P5\n{w} {h}\n255\n").into_bytes();
    bytes.extend(
        field
            .samples()
            .iter()
            .map(|&s| s.round().clamp(0.0, 255.0) as u8),
    );
    fs::write(path, bytes).map_err(io_err(path))
}

/// Per-bundle metadata written next to the fused fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub run_start: usize,
    pub run_end: usize,
    pub label_map: BTreeMap<u32, usize>,
    pub palette: PaletteMode,
    pub info_min: f64,
    pub info_max: f64,
}

/// Paths written for one bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleFiles {
    pub dir: PathBuf,
    pub data_raw: PathBuf,
    pub info_raw: PathBuf,
    pub labels_raw: PathBuf,
    pub data_png: Option<PathBuf>,
    pub info_png: Option<PathBuf>,
    pub labels_png: Option<PathBuf>,
    pub meta: PathBuf,
}

pub fn bundle_dir_name(bundle: &SummaryBundle) -> String {
    format!("fused_{:06}_{:06}", bundle.run_start, bundle.run_end)
}

/// Writes fused data and information as raw `f32` plus grey PNGs, labels as
/// raw `u16` plus a colour PNG, and a `bundle.json` record. PNGs are skipped
/// for non-2D fields.
pub fn write_bundle(
    bundle: &SummaryBundle,
    out_dir: &Path,
    palette: &Palette,
) -> Result<BundleFiles> {
    let dir = out_dir.join(bundle_dir_name(bundle));
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let shape = bundle.fused_data.shape();
    write_sidecar(&dir, shape)?;

    let data_raw = dir.join("data.f32");
    let info_raw = dir.join("info.f32");
    let labels_raw = dir.join("labels.u16");
    write_raw_f32(&data_raw, &bundle.fused_data)?;
    write_raw_f32(&info_raw, &bundle.fused_info)?;
    write_labels_u16(&labels_raw, &bundle.labels)?;

    let (mut data_png, mut info_png, mut labels_png) = (None, None, None);
    if shape.as_image().is_some() {
        let save = |img_path: PathBuf, result: image::ImageResult<()>| -> Result<PathBuf> {
            result.map_err(|e| Error::decode(&img_path, e))?;
            Ok(img_path)
        };
        let p = dir.join("data.png");
        data_png = Some(save(p.clone(), render_gray(&bundle.fused_data)?.save(&p))?);
        let p = dir.join("info.png");
        info_png = Some(save(p.clone(), render_gray(&bundle.fused_info)?.save(&p))?);
        let p = dir.join("labels.png");
        labels_png = Some(save(
            p.clone(),
            render_labels(&bundle.labels, palette)?.save(&p),
        )?);
    }

    let (info_min, info_max) = bundle.fused_info.minmax();
    let meta = BundleMeta {
        run_start: bundle.run_start,
        run_end: bundle.run_end,
        label_map: (1..=bundle.run_len() as u32)
            .map(|l| (l, bundle.run_start + l as usize - 1))
            .collect(),
        palette: palette.effective_mode(bundle.labels.max_label() as usize),
        info_min,
        info_max,
    };
    let meta_path = dir.join("bundle.json");
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Internal(e.to_string()))?;
    fs::write(&meta_path, text).map_err(io_err(&meta_path))?;

    Ok(BundleFiles {
        dir,
        data_raw,
        info_raw,
        labels_raw,
        data_png,
        info_png,
        labels_png,
        meta: meta_path,
    })
}

/// Reads a bundle written by [`write_bundle`].
pub fn read_bundle(dir: &Path) -> Result<SummaryBundle> {
    let shape = read_sidecar(dir)?;
    let meta_path = dir.join("bundle.json");
    let text = fs::read_to_string(&meta_path).map_err(io_err(&meta_path))?;
    let meta: BundleMeta = serde_json::from_str(&text).map_err(|e| Error::decode(&meta_path, e))?;
    Ok(SummaryBundle {
        fused_data: read_raw_f32(&dir.join("data.f32"), &shape)?,
        fused_info: read_raw_f32(&dir.join("info.f32"), &shape)?,
        labels: read_labels_u16(&dir.join("labels.u16"), &shape)?,
        run_start: meta.run_start,
        run_end: meta.run_end,
    })
}

pub fn key_dir_name(index: usize) -> String {
    format!("key_{index:06}")
}

/// Writes every channel of a key timestep as raw `f32` with a sidecar.
pub fn write_key(record: &TimestepRecord, out_dir: &Path) -> Result<PathBuf> {
    let dir = out_dir.join(key_dir_name(record.index()));
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    write_sidecar(&dir, record.shape())?;
    for (tag, field) in record.channels() {
        write_raw_f32(&dir.join(format!("{tag}.f32")), field)?;
    }
    Ok(dir)
}

/// Writes pipeline outputs under one directory as they are produced.
#[derive(Debug)]
pub struct DirectorySink {
    out_dir: PathBuf,
    palette: Palette,
    pub written: Vec<PathBuf>,
}

impl DirectorySink {
    pub fn new(out_dir: impl Into<PathBuf>, palette: Palette) -> Result<Self> {
        let out_dir = out_dir.into();
        fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;
        Ok(DirectorySink {
            out_dir,
            palette,
            written: Vec::new(),
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }
}

impl Sink for DirectorySink {
    fn key(&mut self, record: &TimestepRecord) -> Result<()> {
        let dir = write_key(record, &self.out_dir)?;
        self.written.push(dir);
        Ok(())
    }

    fn fused(&mut self, bundle: &SummaryBundle) -> Result<()> {
        let files = write_bundle(bundle, &self.out_dir, &self.palette)?;
        self.written.push(files.dir);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(w: usize, h: usize, s: Vec<f64>) -> Field {
        Field::new(Shape::image(w, h).unwrap(), s).unwrap()
    }

    #[test]
    fn raw_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let f = field(3, 2, vec![-1.2e-6, 3.0, 29.08f32 as f64, 7.5, 0.0, -0.0]);
        let p = dir.path().join("a.f32");
        write_raw_f32(&p, &f).unwrap();
        let back = read_raw_f32(&p, f.shape()).unwrap();
        for (a, b) in f.samples().iter().zip(back.samples()) {
            assert_eq!((*a as f32).to_bits(), (*b as f32).to_bits());
        }
    }

    #[test]
    fn raw_length_mismatch_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("short.f32");
        fs::write(&p, [0u8; 6]).unwrap();
        let err = read_raw_f32(&p, &Shape::image(2, 1).unwrap()).unwrap_err();
        assert!(err.to_string().contains("short.f32"));
    }

    #[test]
    fn sidecar_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for dims in [vec![488, 842], vec![4, 5, 6]] {
            let s = Shape::new(dims).unwrap();
            write_sidecar(dir.path(), &s).unwrap();
            assert_eq!(read_sidecar(dir.path()).unwrap(), s);
        }
        fs::write(dir.path().join(SIDECAR), "width=3\nheight=2\ndtype=f64\n").unwrap();
        assert!(read_sidecar(dir.path()).is_err());
    }

    #[test]
    fn reads_pgm_sequence() {
        let dir = tempfile::tempdir().unwrap();
        for i in 0..3 {
            let f = field(4, 2, vec![(i * 10) as f64; 8]);
            write_pgm(&dir.path().join(format!("frame_{i:04}.pgm")), &f).unwrap();
        }
        let src = read_sequence(&DatasetDescriptor::new(
            dir.path(),
            DatasetFormat::GrayImage,
        ))
        .unwrap();
        assert_eq!(src.len(), 3);
        let recs: Vec<_> = src.collect::<Result<_>>().unwrap();
        assert_eq!(
            recs.iter().map(|r| r.index()).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
        assert_eq!(recs[2].channel("gray").unwrap().samples()[0], 20.0);
        assert_eq!(recs[0].shape().as_image(), Some((4, 2)));
    }

    #[test]
    fn reads_tagged_raw_sequence() {
        let dir = tempfile::tempdir().unwrap();
        let shape = Shape::image(842, 488).unwrap();
        write_sidecar(dir.path(), &shape).unwrap();
        for i in 0..2 {
            let f = Field::filled(shape.clone(), i as f64).unwrap();
            write_raw_f32(&dir.path().join(format!("t{i:03}.f32")), &f).unwrap();
        }
        let mut desc = DatasetDescriptor::new(dir.path(), DatasetFormat::RawF32);
        desc.channels = vec!["density".into()];
        let recs: Vec<_> = read_sequence(&desc)
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].shape().dims(), &[488, 842]);
        assert_eq!(recs[1].channel("density").unwrap().samples()[0], 1.0);

        let dir2 = tempfile::tempdir().unwrap();
        let small = Shape::image(2, 1).unwrap();
        write_sidecar(dir2.path(), &small).unwrap();
        for tag in ["red", "green"] {
            write_raw_f32(
                &dir2.path().join(format!("t000.{tag}.f32")),
                &Field::filled(small.clone(), 1.0).unwrap(),
            )
            .unwrap();
        }
        let recs: Vec<_> =
            read_sequence(&DatasetDescriptor::new(dir2.path(), DatasetFormat::RawF32))
                .unwrap()
                .collect::<Result<_>>()
                .unwrap();
        let mut tags = recs[0].channel_tags();
        tags.sort();
        assert_eq!(tags, vec!["green", "red"]);
    }

    #[test]
    fn empty_and_drifting_sequences() {
        let dir = tempfile::tempdir().unwrap();
        let desc = DatasetDescriptor::new(dir.path(), DatasetFormat::GrayImage);
        assert!(matches!(read_sequence(&desc), Err(Error::EmptyInput)));

        write_pgm(&dir.path().join("a.pgm"), &field(2, 2, vec![0.0; 4])).unwrap();
        write_pgm(&dir.path().join("b.pgm"), &field(3, 2, vec![0.0; 6])).unwrap();
        let r: Result<Vec<_>> = read_sequence(&desc).unwrap().collect();
        assert!(matches!(r, Err(Error::InvalidSequence(_))));

        fs::write(dir.path().join("c.pgm"), b"not an image").unwrap();
        fs::remove_file(dir.path().join("b.pgm")).unwrap();
        let r: Result<Vec<_>> = read_sequence(&desc).unwrap().collect();
        match r {
            Err(Error::Decode { path, .. }) => assert!(path.ends_with("c.pgm")),
            other => panic!("expected decode error, got {other:?}"),
        }
    }

    #[test]
    fn bundle_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let shape = Shape::image(3, 2).unwrap();
        let b = SummaryBundle {
            fused_data: field(3, 2, vec![0., 255., 255., 0., 0., 255.]),
            fused_info: field(3, 2, vec![0.125, 1.5, 1.5, 0.0, 0.0, 0.25]),
            labels: LabelField::new(shape, vec![0, 1, 2, 0, 0, 3]).unwrap(),
            run_start: 1,
            run_end: 3,
        };
        let files = write_bundle(&b, dir.path(), &Palette::default()).unwrap();
        assert!(files.labels_png.as_ref().unwrap().exists());
        let back = read_bundle(&files.dir).unwrap();
        assert_eq!(back, b);
        let meta: BundleMeta =
            serde_json::from_str(&fs::read_to_string(&files.meta).unwrap()).unwrap();
        assert_eq!(meta.label_map, BTreeMap::from([(1, 1), (2, 2), (3, 3)]));
        assert_eq!(meta.palette, PaletteMode::Discrete);
    }

    #[test]
    fn key_written_verbatim() {
        let dir = tempfile::tempdir().unwrap();
        let f = field(2, 1, vec![0.5, 255.0]);
        let rec = TimestepRecord::single(7, "gray", f.clone()).unwrap();
        let kdir = write_key(&rec, dir.path()).unwrap();
        assert!(kdir.ends_with("key_000007"));
        assert_eq!(
            read_field_file(&kdir.join("gray.f32")).unwrap().samples(),
            f.samples()
        );
    }
}
