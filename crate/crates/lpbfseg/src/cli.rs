//! Command-line front end: simulate | segment | evaluate | tune | bench |
//! compress | spatter.
//!
//! Every command is deterministic given its config and seed (benchmark
//! wall-clock fields aside), and partial outputs are removed when a command
//! fails.

use crate::bench::{bench, machine_info};
use crate::error::Error;
use crate::eval::{confusion, f1, spatter_outside_fraction, ConfusionCounts};
use crate::frame::{mask_apply, mask_or, Mask};
use crate::segment::{Segmenter, SegmenterSpec};
use crate::seqfile::{
    read_gt_sidecar, sequence_file_size, GtReader, GtWriter, SeqDtype, SequenceReader,
    SequenceWriter,
};
use crate::sim::{SimConfig, SimStream};
use crate::sparse::{decode, encode, SparseReader, SparseWriter};
use crate::tune::{random_search, ParamRange, ParamSpace, TuneResult};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "lpbfseg",
    about = "Streaming segmentation and benchmark harness for LPBF thermal sequences"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic sequence file plus its ground-truth sidecar.
    Simulate(SimulateArgs),
    /// Run segmenters over a sequence, writing sparse foreground files.
    Segment(SegmentArgs),
    /// Score segmenters against a ground-truth sidecar.
    Evaluate(EvaluateArgs),
    /// Calibrate one segmenter's parameters by random search.
    Tune(TuneArgs),
    /// Time segmenters frame by frame.
    Bench(BenchArgs),
    /// Extract and store foregrounds losslessly; report the size ratio.
    Compress(CompressArgs),
    /// Build binary composite images and score spatter overflow.
    Spatter(SpatterArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Run-config file (TOML); command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for all randomized steps.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Base scenario: demo | standard | calibration | spatter.
    #[arg(long, default_value = "demo")]
    preset: String,
}

#[derive(Args)]
struct SegmentArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Sequence file to segment.
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated algorithm names, e.g. fd+thresh,otsu.
    #[arg(long, value_delimiter = ',', required = true)]
    algo: Vec<String>,
    /// default | calibrated | path to a tune-result or parameter file.
    #[arg(long, default_value = "default")]
    params: String,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    input: PathBuf,
    /// Ground-truth sidecar aligned with the input.
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    algo: Vec<String>,
    #[arg(long, default_value = "default")]
    params: String,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    /// Single algorithm name.
    #[arg(long)]
    algo: String,
    #[arg(long, default_value_t = 300)]
    trials: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    algo: Vec<String>,
    #[arg(long, default_value = "calibrated")]
    params: String,
}

#[derive(Args)]
struct CompressArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "fd+thresh")]
    algo: String,
    #[arg(long, default_value = "default")]
    params: String,
    /// Verify an existing sparse file against the input sequence instead of
    /// writing one.
    #[arg(long)]
    check: Option<PathBuf>,
}

#[derive(Args)]
struct SpatterArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    input: PathBuf,
    /// Sidecar providing the cross-section contour.
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    algo: Vec<String>,
    #[arg(long, default_value = "default")]
    params: String,
    /// Allowed overflow around the contour, pixels; defaults to the track
    /// width from the sidecar.
    #[arg(long)]
    overflow: Option<usize>,
}

/// Optional TOML run-config file.
#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    /// Field-wise overrides of the simulate preset.
    simulate: Option<toml::Table>,
    tune: Option<TuneFileConfig>,
}

#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct TuneFileConfig {
    trials: Option<usize>,
    space: Option<BTreeMap<String, ParamRange>>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<FileConfig> {
        match path {
            None => Ok(FileConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }
}

/// Removes declared outputs unless the command completed.
struct OutputGuard {
    paths: Vec<PathBuf>,
    armed: bool,
}

impl OutputGuard {
    fn new() -> Self {
        OutputGuard {
            paths: Vec::new(),
            armed: true,
        }
    }

    fn track(&mut self, path: &Path) -> PathBuf {
        self.paths.push(path.to_path_buf());
        path.to_path_buf()
    }

    fn disarm(mut self) {
        self.armed = false;
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if self.armed {
            for p in &self.paths {
                let _ = std::fs::remove_file(p);
            }
        }
    }
}

pub fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Segment(args) => cmd_segment(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Tune(args) => cmd_tune(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Compress(args) => cmd_compress(args),
        Command::Spatter(args) => cmd_spatter(args),
    }
}

fn parse_specs(names: &[String], params: &str) -> Result<Vec<(SegmenterSpec, String)>> {
    names.iter().map(|n| parse_spec(n, params)).collect()
}

fn parse_spec(name: &str, params: &str) -> Result<(SegmenterSpec, String)> {
    let spec = SegmenterSpec::parse(name).map_err(|e| {
        anyhow::anyhow!(
            "{e}\nvalid names: thresh, submax, fd, otsu, li, isodata, yen, triangle, \
             sauvola, adapt_mean, adapt_gauss, mog, mog2, knn, optionally prefixed with 'fd+'"
        )
    })?;
    let (spec, label) = match params {
        "default" => (spec, "default".to_string()),
        "calibrated" => (
            SegmenterSpec::calibrated(spec.algorithm, spec.fd_prefix),
            "calibrated".to_string(),
        ),
        path => {
            let mut spec = spec;
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading parameter file {path}"))?;
            if let Ok(tuned) = toml::from_str::<TuneResult>(&text) {
                spec.set_params(&tuned.best_params);
            } else {
                let map: BTreeMap<String, f64> = toml::from_str(&text)
                    .with_context(|| format!("parsing parameter file {path}"))?;
                spec.set_params(&map);
            }
            spec.sanitize();
            (spec, "file".to_string())
        }
    };
    spec.validate()?;
    Ok((spec, label))
}

fn build_sim_config(args: &SimulateArgs, file: &FileConfig) -> Result<SimConfig> {
    let seed = args.common.seed.or(file.seed).unwrap_or(0);
    let base = match args.preset.as_str() {
        "demo" => SimConfig {
            seed,
            ..SimConfig::default()
        },
        "standard" => SimConfig::standard_batch(seed),
        "calibration" => SimConfig::calibration_batch(seed),
        "spatter" => SimConfig::spatter_batch(seed),
        other => bail!("unknown preset '{other}' (demo | standard | calibration | spatter)"),
    };
    let Some(overrides) = &file.simulate else {
        return Ok(base);
    };
    // Field-wise merge: overlay the [simulate] table onto the preset.
    let mut table = toml::Table::try_from(base).context("serializing preset")?;
    for (k, v) in overrides {
        table.insert(k.clone(), v.clone());
    }
    let mut cfg: SimConfig = table.try_into().context("applying [simulate] overrides")?;
    if let Some(s) = args.common.seed.or(file.seed) {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let cfg = build_sim_config(&args, &file)?;
    std::fs::create_dir_all(&args.common.out)?;

    let mut guard = OutputGuard::new();
    let seq_path = guard.track(&args.common.out.join("sequence.lpbfseq"));
    let gt_path = guard.track(&args.common.out.join("groundtruth.lpbfgt"));

    let sim = SimStream::new(&cfg).map_err(anyhow::Error::from)?;
    let gt_cfg = sim.gt_config();

    let mut seq_writer = SequenceWriter::new(
        BufWriter::new(File::create(&seq_path)?),
        cfg.width,
        cfg.height,
        SeqDtype::F32,
        cfg.warmup_frames as u32,
    )?;
    let mut gt_writer = GtWriter::new(
        BufWriter::new(File::create(&gt_path)?),
        cfg.width,
        cfg.height,
        &gt_cfg,
    )?;
    let mut frames = 0usize;
    for (frame, gt) in sim {
        seq_writer.write_frame(&frame)?;
        gt_writer.write_frame(&gt)?;
        frames += 1;
    }
    seq_writer.finish()?;
    gt_writer.finish()?;
    guard.disarm();

    println!(
        "wrote {} frames ({}x{}, warmup {}) to {}",
        frames,
        cfg.width,
        cfg.height,
        cfg.warmup_frames,
        seq_path.display()
    );
    println!(
        "ground truth: track width {} px, cutoff {:.1}, buffers {}/{} px -> {}",
        gt_cfg.track_width,
        gt_cfg.cutoff,
        gt_cfg.inner_buffer,
        gt_cfg.outer_buffer,
        gt_path.display()
    );
    Ok(())
}

fn cmd_segment(args: SegmentArgs) -> Result<()> {
    let _ = FileConfig::load(args.common.config.as_deref())?;
    let specs = parse_specs(&args.algo, &args.params)?;
    std::fs::create_dir_all(&args.common.out)?;
    let seed = args.common.seed.unwrap_or(0);

    for (spec, _) in &specs {
        let mut reader = SequenceReader::open(&args.input)?;
        let mut guard = OutputGuard::new();
        let out_path = guard.track(
            &args
                .common
                .out
                .join(format!("{}.lpbfsparse", file_stem_for(spec))),
        );
        let mut writer = SparseWriter::new(
            BufWriter::new(File::create(&out_path)?),
            reader.width as u32,
            reader.height as u32,
        )?;
        let mut segmenter = Segmenter::with_seed(spec.clone(), seed)?;
        let mut masked = 0usize;
        let mut total = 0usize;
        while let Some(frame) = reader.next_frame()? {
            let mask = segmenter.step(&frame)?;
            if mask.any() {
                masked += 1;
            }
            writer.write_frame(&encode(&frame, &mask)?)?;
            total += 1;
        }
        writer.finish()?;
        guard.disarm();
        println!(
            "{}: {}/{} frames with foreground -> {}",
            spec.display_name(),
            masked,
            total,
            out_path.display()
        );
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct FrameScoreRecord {
    frame: usize,
    precision: f64,
    recall: f64,
    f1: f64,
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let _ = FileConfig::load(args.common.config.as_deref())?;
    let specs = parse_specs(&args.algo, &args.params)?;
    std::fs::create_dir_all(&args.common.out)?;
    let seed = args.common.seed.unwrap_or(0);

    let mut rows: Vec<(String, String, f64, f64, f64)> = Vec::new();
    for (spec, label) in &specs {
        let mut reader = SequenceReader::open(&args.input)?;
        let mut gt_reader = GtReader::open(&args.gt)?;
        let mut guard = OutputGuard::new();
        let jsonl_path = guard.track(
            &args
                .common
                .out
                .join(format!("{}.scores.jsonl", file_stem_for(spec))),
        );
        let mut jsonl = BufWriter::new(File::create(&jsonl_path)?);

        let mut segmenter = Segmenter::with_seed(spec.clone(), seed)?;
        let mut counts = ConfusionCounts::default();
        let mut index = 0usize;
        while let Some(frame) = reader.next_frame()? {
            let gt = gt_reader
                .next_frame()?
                .ok_or_else(|| Error::Input("ground truth shorter than sequence".into()))?;
            let mask = segmenter.step(&frame)?;
            let c = confusion(&mask, &gt)?;
            let s = f1(&c);
            counts.merge(&c);
            serde_json::to_writer(
                &mut jsonl,
                &FrameScoreRecord {
                    frame: index,
                    precision: s.precision,
                    recall: s.recall,
                    f1: s.f1,
                },
            )?;
            jsonl.write_all(b"\n")?;
            index += 1;
        }
        jsonl.flush()?;
        guard.disarm();

        let score = f1(&counts);
        rows.push((
            spec.display_name(),
            label.clone(),
            score.precision,
            score.recall,
            score.f1,
        ));
    }

    rows.sort_by(|a, b| b.4.total_cmp(&a.4));
    let mut table = String::new();
    table.push_str(&format!(
        "{:<16} {:<12} {:>9} {:>7} {:>8}\n",
        "Algorithm", "Parameters", "Precision", "Recall", "F1-score"
    ));
    for (name, label, p, r, f) in &rows {
        table.push_str(&format!(
            "{name:<16} {label:<12} {p:>9.2} {r:>7.2} {f:>8.2}\n"
        ));
    }
    print!("{table}");
    std::fs::write(args.common.out.join("scores.txt"), table)?;
    Ok(())
}

fn cmd_tune(args: TuneArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let (spec, _) = parse_spec(&args.algo, "default")?;
    std::fs::create_dir_all(&args.common.out)?;
    let seed = args.common.seed.or(file.seed).unwrap_or(0);
    let tune_cfg = file.tune.unwrap_or_default();
    let trials = tune_cfg.trials.unwrap_or(args.trials);

    let calib = crate::seqfile::read_sequence(&args.input)?;
    let (_, gts) = read_gt_sidecar(&args.gt)?;

    let space = match tune_cfg.space {
        Some(ranges) => ParamSpace { ranges },
        None => ParamSpace::default_for(&spec),
    };
    if space.ranges.is_empty() {
        bail!("algorithm '{}' has no tunable parameters", args.algo);
    }

    let result = random_search(&spec, &space, &calib, &gts, trials, seed)?;
    let mut guard = OutputGuard::new();
    let out_path = guard.track(
        &args
            .common
            .out
            .join(format!("{}.tune.toml", file_stem_for(&spec))),
    );
    result.save(&out_path)?;
    guard.disarm();

    println!(
        "{}: best F1 {:.4} after {} trials -> {}",
        spec.display_name(),
        result.best_f1,
        trials,
        out_path.display()
    );
    for (name, value) in &result.best_params {
        println!("  {name} = {value:.4}");
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let _ = FileConfig::load(args.common.config.as_deref())?;
    let specs = parse_specs(&args.algo, &args.params)?;
    std::fs::create_dir_all(&args.common.out)?;

    let mut reports = Vec::new();
    for (spec, _) in &specs {
        let mut reader = SequenceReader::open(&args.input)?;
        let frames = std::iter::from_fn(move || reader.next_frame().ok().flatten());
        reports.push(bench(spec, frames)?);
    }
    reports.sort_by(|a, b| a.mean_ms.total_cmp(&b.mean_ms));

    let mut table = String::new();
    table.push_str(&format!("machine: {}\n", machine_info()));
    table.push_str(&format!(
        "{:<16} {:>20} {:>12} {:>10}\n",
        "ID", "Time per image [ms]", "median [ms]", "p99 [ms]"
    ));
    for r in &reports {
        let (spec, _) = parse_spec(&r.spec_name, "default")?;
        table.push_str(&format!(
            "{:<16} {:>20.3} {:>12.3} {:>10.3}\n",
            spec.display_name(),
            r.mean_ms,
            r.median_ms,
            r.p99_ms
        ));
    }
    print!("{table}");
    std::fs::write(args.common.out.join("bench.txt"), table)?;
    Ok(())
}

fn cmd_compress(args: CompressArgs) -> Result<()> {
    let _ = FileConfig::load(args.common.config.as_deref())?;
    if let Some(sparse_path) = &args.check {
        return check_sparse(&args.input, sparse_path);
    }
    let (spec, _) = parse_spec(&args.algo, &args.params)?;
    std::fs::create_dir_all(&args.common.out)?;
    let seed = args.common.seed.unwrap_or(0);

    let mut reader = SequenceReader::open(&args.input)?;
    let (w, h, dtype) = (reader.width, reader.height, reader.dtype);
    let total_frames = reader.frame_count;

    let mut guard = OutputGuard::new();
    let out_path = guard.track(
        &args
            .common
            .out
            .join(format!("{}.lpbfsparse", file_stem_for(&spec))),
    );
    let mut writer = SparseWriter::new(
        BufWriter::new(File::create(&out_path)?),
        w as u32,
        h as u32,
    )?;
    let mut segmenter = Segmenter::with_seed(spec.clone(), seed)?;
    let mut fg_pixels = 0usize;
    while let Some(frame) = reader.next_frame()? {
        let mask = segmenter.step(&frame)?;
        let sf = encode(&frame, &mask)?;
        // Lossless check on the fly: decoding must reproduce the masked frame.
        let decoded = decode(&sf, w, h)?;
        if decoded.pixels() != mask_apply(&frame, &mask)?.pixels() {
            bail!("sparse round-trip mismatch on frame {}", frame.index());
        }
        fg_pixels += sf.foreground_pixels();
        writer.write_frame(&sf)?;
    }
    writer.finish()?;
    guard.disarm();

    let sparse_size = std::fs::metadata(&out_path)?.len();
    let dense_size = sequence_file_size(w, h, total_frames, dtype);
    println!(
        "{}: {} foreground pixels, sparse {} bytes vs dense {} bytes ({:.2}%) -> {}",
        spec.display_name(),
        fg_pixels,
        sparse_size,
        dense_size,
        100.0 * sparse_size as f64 / dense_size as f64,
        out_path.display()
    );
    Ok(())
}

/// Decodes every record of a sparse file and confirms its values match the
/// raw sequence at the recorded coordinates.
fn check_sparse(seq_path: &Path, sparse_path: &Path) -> Result<()> {
    let mut seq = SequenceReader::open(seq_path)?;
    let mut sparse = SparseReader::new(std::io::BufReader::new(File::open(sparse_path)?))?;
    if (sparse.width as usize, sparse.height as usize) != (seq.width, seq.height) {
        bail!(
            "sparse file is {}x{} but sequence is {}x{}",
            sparse.width,
            sparse.height,
            seq.width,
            seq.height
        );
    }
    let mut checked = 0usize;
    while let Some(sf) = sparse.next_frame()? {
        let decoded = decode(&sf, seq.width, seq.height)?;
        let frame = seq
            .next_frame()?
            .ok_or_else(|| Error::Corrupt("sparse file has more frames than sequence".into()))?;
        for run in &sf.runs {
            let y = run.y as usize;
            for (i, v) in run.values.iter().enumerate() {
                let x = run.x_start as usize + i;
                if frame.get(x, y) != *v || decoded.get(x, y) != *v {
                    bail!("value mismatch at frame {} pixel ({x},{y})", sf.frame_index);
                }
            }
        }
        checked += 1;
    }
    println!("verified {checked} sparse frames against {}", seq_path.display());
    Ok(())
}

fn cmd_spatter(args: SpatterArgs) -> Result<()> {
    let _ = FileConfig::load(args.common.config.as_deref())?;
    let specs = parse_specs(&args.algo, &args.params)?;
    std::fs::create_dir_all(&args.common.out)?;
    let seed = args.common.seed.unwrap_or(0);

    let gt_reader = GtReader::open(&args.gt)?;
    let region = gt_reader.config.cross_section;
    let overflow = args.overflow.unwrap_or(gt_reader.config.track_width);

    let mut rows = Vec::new();
    for (spec, _) in &specs {
        let mut reader = SequenceReader::open(&args.input)?;
        let mut segmenter = Segmenter::with_seed(spec.clone(), seed)?;
        let mut comp = Mask::new_false(reader.width, reader.height);
        while let Some(frame) = reader.next_frame()? {
            let mask = segmenter.step(&frame)?;
            comp = mask_or(&comp, &mask)?;
        }
        let fraction = spatter_outside_fraction(&comp, region, overflow);

        let mut guard = OutputGuard::new();
        let png_path = guard.track(
            &args
                .common
                .out
                .join(format!("{}_composite.png", file_stem_for(spec))),
        );
        save_mask_png(&comp, &png_path)?;
        guard.disarm();
        rows.push((spec.display_name(), fraction, png_path));
    }

    let mut table = String::new();
    table.push_str(&format!(
        "{:<16} {:>16} {:>10}\n",
        "Algorithm", "outside fraction", "verdict"
    ));
    for (name, fraction, png) in &rows {
        table.push_str(&format!(
            "{name:<16} {fraction:>16.4} {:>10}   {}\n",
            if *fraction < 0.01 { "clean" } else { "spatter" },
            png.display()
        ));
    }
    print!("{table}");
    std::fs::write(args.common.out.join("spatter.txt"), table)?;
    Ok(())
}

fn save_mask_png(mask: &Mask, path: &Path) -> Result<()> {
    let mut img = image::GrayImage::new(mask.width() as u32, mask.height() as u32);
    for (x, y) in mask.true_positions() {
        img.put_pixel(x as u32, y as u32, image::Luma([255u8]));
    }
    img.save(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn file_stem_for(spec: &SegmenterSpec) -> String {
    spec.name().replace('+', "_")
}
