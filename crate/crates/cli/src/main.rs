use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde_json::json;

use stsum_core::features::{median_background, MiTrigger};
use stsum_core::fusion::ConfidenceDirection;
use stsum_core::infotheory::{entropy, specific_table, SsiSign};
use stsum_core::io::{
    read_field_file, read_sequence, write_pgm, DatasetDescriptor, DatasetFormat, DirectorySink,
};
use stsum_core::probability::{DEFAULT_IMAGE_BINS, DEFAULT_SCALAR_BINS};
use stsum_core::render::Palette;
use stsum_core::synth::{
    gen_multiblob, gen_rolling_ball, random_schedule, BlobEvent, RollingBallParams,
};
use stsum_core::{
    build_joint, mutual_information, pmi, run_pipeline, ConfidenceRule, Connectivity, Error,
    FusionConfig, MeasureKind, Polarity, Result, TriggerConfig, TriggerKind,
};

#[derive(Parser)]
#[command(
    name = "stsum",
    version,
    about = "Summarize time-varying fields into key and fused timesteps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the key/fuse pipeline over a frame directory.
    Run(RunArgs),
    /// Generate a synthetic dataset.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Print information measures between two fields as JSON.
    Info(InfoArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "gray-image")]
    format: DatasetFormat,
    /// Channel used for segmentation and fusion.
    #[arg(long)]
    channel: Option<String>,
    #[arg(long, default_value = "count-change")]
    trigger: TriggerKind,
    #[arg(long, default_value_t = 127.5)]
    seg_threshold: f64,
    #[arg(long, default_value = "above")]
    seg_polarity: Polarity,
    #[arg(long = "min-size", default_value_t = 1)]
    min_size: usize,
    #[arg(long, default_value = "8")]
    connectivity: Connectivity,
    /// Median of the first k frames as a static background.
    #[arg(long)]
    background_frames: Option<usize>,
    #[arg(long)]
    mi_threshold: Option<f64>,
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    mi_channels: Option<Vec<String>>,
    #[arg(long, default_value = "surprise")]
    measure: MeasureKind,
    /// Histogram bins; 256 for images and 128 for raw fields by default.
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    conf_th: Option<f64>,
    #[arg(long, default_value = "below-bg")]
    conf_dir: ConfidenceDirection,
    #[arg(long)]
    negate_ssi: bool,
    /// Raw frame shape as WIDTHxHEIGHT, overriding the sidecar.
    #[arg(long)]
    shape: Option<String>,
    #[arg(long)]
    continuous_palette: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum GenCommand {
    RollingBall(RollingBallArgs),
    Multiblob(MultiblobArgs),
}

#[derive(Args)]
struct RollingBallArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 800)]
    width: usize,
    #[arg(long, default_value_t = 400)]
    height: usize,
    #[arg(long, default_value_t = 19)]
    steps: usize,
    #[arg(long, default_value_t = 40.0)]
    radius: f64,
    #[arg(long, default_value_t = 20.0)]
    dx: f64,
}

#[derive(Args)]
struct MultiblobArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 128)]
    width: usize,
    #[arg(long, default_value_t = 96)]
    height: usize,
    #[arg(long, default_value_t = 12)]
    steps: usize,
    /// Blobs as `enter-exit@x,y,r` separated by `;`, frames inclusive.
    #[arg(long, conflicts_with = "random")]
    schedule: Option<String>,
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    max_blobs: usize,
}

#[derive(Args)]
struct InfoArgs {
    #[arg(long, num_args = 2, value_names = ["A", "B"], required = true)]
    pair: Vec<PathBuf>,
    #[arg(long, default_value = "surprise")]
    measure: MeasureKind,
    #[arg(long, default_value_t = DEFAULT_IMAGE_BINS)]
    bins: usize,
}

fn parse_shape(s: &str) -> Result<stsum_core::Shape> {
    let bad = || Error::InvalidArgument(format!("shape must be WIDTHxHEIGHT, got {s:?}"));
    let (w, h) = s.split_once('x').ok_or_else(bad)?;
    stsum_core::Shape::image(
        w.trim().parse().map_err(|_| bad())?,
        h.trim().parse().map_err(|_| bad())?,
    )
}

fn run(args: RunArgs) -> Result<()> {
    let mut desc = DatasetDescriptor::new(&args.input, args.format);
    if let Some(s) = &args.shape {
        desc.shape = Some(parse_shape(s)?);
    }
    if let Some(c) = &args.channel {
        desc.channels = vec![c.clone()];
    }
    let bins = args.bins.unwrap_or(match args.format {
        DatasetFormat::GrayImage => DEFAULT_IMAGE_BINS,
        DatasetFormat::RawF32 => DEFAULT_SCALAR_BINS,
    });

    let mut trigger =
        TriggerConfig::segmentation(args.trigger, args.seg_threshold, args.seg_polarity);
    trigger.channel = args.channel.clone();
    trigger.min_component_size = args.min_size;
    trigger.connectivity = args.connectivity;
    if args.trigger == TriggerKind::MiThreshold {
        let threshold = args.mi_threshold.ok_or_else(|| {
            Error::InvalidArgument("--mi-threshold is required for the mi-threshold trigger".into())
        })?;
        let pair = args.mi_channels.clone().ok_or_else(|| {
            Error::InvalidArgument("--mi-channels is required for the mi-threshold trigger".into())
        })?;
        trigger.mi = Some(MiTrigger {
            threshold,
            channel_a: pair[0].clone(),
            channel_b: pair[1].clone(),
            bin_count: bins,
        });
    }
    if let Some(k) = args.background_frames {
        let frames = read_sequence(&desc)?
            .take(k)
            .map(|r| {
                r.map(|rec| match &args.channel {
                    Some(tag) => rec.channel(tag).cloned(),
                    None => Some(rec.first_channel().1.clone()),
                })
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidArgument("background channel missing".into()))?;
        trigger.background = Some(median_background(&frames)?);
    }

    let fusion = FusionConfig {
        measure: args.measure,
        bin_count: bins,
        confidence: args.conf_th.map(|threshold| ConfidenceRule {
            threshold,
            comparator: args.conf_dir,
        }),
        ssi_sign: if args.negate_ssi {
            SsiSign::Negated
        } else {
            SsiSign::Positive
        },
    };

    let source = read_sequence(&desc)?;
    log::info!("{} frames in {}", source.len(), args.input.display());
    let palette = if args.continuous_palette {
        Palette::continuous()
    } else {
        Palette::default()
    };
    let mut sink = DirectorySink::new(&args.out, palette)?;
    let manifest = run_pipeline(source, &trigger, &fusion, &mut sink)?;
    let path = args.out.join("manifest.json");
    fs::write(&path, manifest.to_json()?).map_err(|e| Error::io(&path, e))?;
    println!(
        "{} -> {} outputs (reduction {:.4})",
        manifest.stats.input_count, manifest.stats.output_count, manifest.stats.reduction_ratio
    );
    Ok(())
}

fn write_frames(out: &Path, frames: &[stsum_core::Field]) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    for (t, f) in frames.iter().enumerate() {
        write_pgm(&out.join(format!("frame_{t:04}.pgm")), f)?;
    }
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn gen_ball(args: RollingBallArgs) -> Result<()> {
    let params = RollingBallParams {
        width: args.width,
        height: args.height,
        steps: args.steps,
        radius: args.radius,
        dx: args.dx,
    };
    let ball = gen_rolling_ball(&params)?;
    write_frames(&args.out, &ball.frames)?;
    write_json(
        &args.out.join("truth.json"),
        &json!({ "params": params, "presence": ball.presence, "centers": ball.centers }),
    )
}

fn parse_schedule(s: &str) -> Result<Vec<BlobEvent>> {
    s.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|part| {
            let bad =
                || Error::InvalidArgument(format!("bad blob {part:?}, expected enter-exit@x,y,r"));
            let (frames, geom) = part.split_once('@').ok_or_else(bad)?;
            let (enter, exit) = frames.split_once('-').ok_or_else(bad)?;
            let g: Vec<f64> = geom
                .split(',')
                .map(|v| v.trim().parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad())?;
            if g.len() != 3 {
                return Err(bad());
            }
            Ok(BlobEvent {
                enter: enter.trim().parse().map_err(|_| bad())?,
                exit: exit.trim().parse().map_err(|_| bad())?,
                cx: g[0],
                cy: g[1],
                radius: g[2],
            })
        })
        .collect()
}

fn gen_blobs(args: MultiblobArgs) -> Result<()> {
    let schedule = match (&args.schedule, args.random) {
        (Some(s), _) => parse_schedule(s)?,
        (None, true) => {
            let mut rng = StdRng::seed_from_u64(args.seed);
            random_schedule(
                &mut rng,
                args.width,
                args.height,
                args.steps,
                args.max_blobs,
            )
        }
        (None, false) => Vec::new(),
    };
    let blobs = gen_multiblob(args.width, args.height, args.steps, &schedule)?;
    write_frames(&args.out, &blobs.frames)?;
    write_json(
        &args.out.join("truth.json"),
        &json!({
            "schedule": schedule,
            "counts": blobs.counts,
            "trigger_indices": blobs.trigger_indices,
            "key_indices": blobs.key_indices(),
        }),
    )
}

fn info(args: InfoArgs) -> Result<()> {
    let a = read_field_file(&args.pair[0])?;
    let b = read_field_file(&args.pair[1])?;
    // rows are A, columns B: per-bin values are indexed by B's bins
    let joint = build_joint(&a, &b, args.bins)?;
    let mut out = json!({
        "measure": args.measure.as_str(),
        "bins": args.bins,
        "mutual_information": mutual_information(&joint),
        "entropy_a": entropy(joint.px()),
        "entropy_b": entropy(joint.py()),
    });
    if args.measure == MeasureKind::Pmi {
        let rows: Vec<Vec<f64>> = (0..joint.bins_x())
            .map(|x| (0..joint.bins_y()).map(|y| pmi(&joint, x, y)).collect())
            .collect();
        out["pmi"] = json!(rows);
    } else {
        out["per_bin"] = json!(specific_table(&joint, args.measure, SsiSign::Positive)?);
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&out).map_err(|e| Error::Internal(e.to_string()))?
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Gen(GenCommand::RollingBall(a)) => gen_ball(a),
        Command::Gen(GenCommand::Multiblob(a)) => gen_blobs(a),
        Command::Info(a) => info(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stsum: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
