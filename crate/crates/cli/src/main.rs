use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use glyphocr::classifier::{train, TemplateStore, TrainingSample};
use glyphocr::features::{feature_vector, FeatureConfig, DEFAULT_RINGS};
use glyphocr::glyphnorm::{normalize_box, Glyph};
use glyphocr::pipeline::{
    layout_page, prepare_sample, recognize_page, LineLayout, PipelineConfig, PipelineError,
    DEFAULT_GAP_FACTOR, DEFAULT_GLYPH_SIZE, DEFAULT_MIN_LINE_HEIGHT,
};
use glyphocr::raster::{load_pnm, save_pbm, BinaryRaster, Threshold};
use glyphocr::segmentation::tight_bounding_box;
use glyphocr::thinning::hilditch_thin_with_limit;

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_OUTPUT: u8 = 4;

const MANIFEST_NAME: &str = "manifest.tsv";

#[derive(Parser)]
#[command(name = "glyphocr", version, about = "Character recognition for scanned pages")]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Options {
    /// Binarization threshold: `otsu` or a fixed cut in 0..=255
    #[arg(long, global = true, default_value = "otsu")]
    threshold: Threshold,
    /// Treat light pixels as ink
    #[arg(long, global = true)]
    invert: bool,
    /// Minimum text line height in pixels
    #[arg(long, global = true, default_value_t = DEFAULT_MIN_LINE_HEIGHT)]
    min_line_height: usize,
    /// Word break when a gap is at least this multiple of the median gap
    #[arg(long, global = true, default_value_t = DEFAULT_GAP_FACTOR)]
    gap_factor: f64,
    /// Normalized glyph size (recognize: defaults to the store's)
    #[arg(long, global = true)]
    size: Option<usize>,
    /// Radial histogram rings (recognize: defaults to the store's)
    #[arg(long, global = true)]
    rings: Option<usize>,
    /// Neighbors consulted per classification
    #[arg(long, global = true, default_value_t = 1)]
    k: usize,
    /// Emit `?` for characters farther than this from every template
    #[arg(long, global = true)]
    reject_dist: Option<f64>,
    /// Directory for intermediate artifacts
    #[arg(long, global = true)]
    debug_dir: Option<PathBuf>,
    /// Separator between character labels inside a word
    #[arg(long, global = true, default_value = "")]
    separator: String,
}

#[derive(Subcommand)]
enum Command {
    /// Binarize an image and write it as PBM
    Binarize { input: PathBuf, output: PathBuf },
    /// Print text lines and character boxes as JSON lines
    Segment { page: PathBuf },
    /// Thin a binary image
    Thin {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        max_passes: Option<usize>,
    },
    /// Print the feature vector of a square glyph image
    Features { glyph: PathBuf },
    /// Build a template store from a manifest (or a directory holding manifest.tsv)
    Train { manifest: PathBuf, store: PathBuf },
    /// Recognize a page against a template store
    Recognize { page: PathBuf, store: PathBuf },
}

struct Failure {
    code: u8,
    message: String,
}

type CmdResult = Result<(), Failure>;

fn fail(code: u8, message: impl Display) -> Failure {
    Failure {
        code,
        message: message.to_string(),
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let code = match e {
            PipelineError::InvalidConfig(_) => EXIT_USAGE,
            _ => EXIT_PRECONDITION,
        };
        fail(code, e)
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> CmdResult {
    fs::write(path, bytes).map_err(|e| fail(EXIT_OUTPUT, format!("{}: {e}", path.display())))
}

fn load_binary(path: &Path, opts: &Options) -> Result<BinaryRaster, Failure> {
    let image = load_pnm(&read(path)?).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    Ok(image.into_binary(opts.threshold, opts.invert))
}

fn debug_dir(opts: &Options) -> Result<Option<&Path>, Failure> {
    match &opts.debug_dir {
        None => Ok(None),
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| fail(EXIT_OUTPUT, format!("{}: {e}", dir.display())))?;
            Ok(Some(dir.as_path()))
        }
    }
}

fn pipeline_config(opts: &Options, features: FeatureConfig) -> PipelineConfig {
    PipelineConfig {
        threshold: opts.threshold,
        invert: opts.invert,
        min_line_height: opts.min_line_height,
        gap_factor: opts.gap_factor,
        size: features.size,
        rings: features.rings,
        k: opts.k,
        reject_distance: opts.reject_dist,
    }
}

fn default_features(opts: &Options) -> FeatureConfig {
    FeatureConfig {
        size: opts.size.unwrap_or(DEFAULT_GLYPH_SIZE),
        rings: opts.rings.unwrap_or(DEFAULT_RINGS),
    }
}

fn line_record(layout: &LineLayout) -> String {
    let band = layout.line.band;
    let boxes: Vec<_> = layout
        .boxes
        .iter()
        .map(|b| json!([b.x0, b.y0, b.x1, b.y1, b.word_index]))
        .collect();
    json!({
        "line": layout.index,
        "band": [band.start, band.end],
        "baselines": [layout.line.upper_baseline, layout.line.lower_baseline],
        "boxes": boxes,
    })
    .to_string()
}

fn lines_jsonl(layouts: &[LineLayout]) -> String {
    layouts.iter().map(|l| line_record(l) + "\n").collect()
}

fn cmd_binarize(opts: &Options, input: &Path, output: &Path) -> CmdResult {
    let r = load_binary(input, opts)?;
    write(output, &save_pbm(&r))
}

fn cmd_segment(opts: &Options, page: &Path) -> CmdResult {
    let r = load_binary(page, opts)?;
    let cfg = pipeline_config(opts, default_features(opts));
    cfg.validate()?;
    let layouts = layout_page(&r, &cfg)?;
    let text = lines_jsonl(&layouts);
    if let Some(dir) = debug_dir(opts)? {
        write(&dir.join("lines.jsonl"), text.as_bytes())?;
    }
    print!("{text}");
    Ok(())
}

fn cmd_thin(opts: &Options, input: &Path, output: &Path, max_passes: Option<usize>) -> CmdResult {
    let r = load_binary(input, opts)?;
    let thinned = hilditch_thin_with_limit(&r, max_passes).map_err(|e| fail(EXIT_PRECONDITION, e))?;
    write(output, &save_pbm(&thinned.raster))
}

fn cmd_features(opts: &Options, path: &Path) -> CmdResult {
    let r = load_binary(path, opts)?;
    if r.width() != r.height() {
        return Err(fail(
            EXIT_PRECONDITION,
            format!("{}: glyph must be square, got {}x{}", path.display(), r.width(), r.height()),
        ));
    }
    if let Some(size) = opts.size.filter(|&s| s != r.width()) {
        return Err(fail(
            EXIT_PRECONDITION,
            format!("{}: glyph is {}x{} but --size is {size}", path.display(), r.width(), r.height()),
        ));
    }
    let config = FeatureConfig {
        size: r.width(),
        rings: opts.rings.unwrap_or(DEFAULT_RINGS),
    };
    if config.rings == 0 {
        return Err(fail(EXIT_USAGE, "ring count must be at least 1"));
    }
    let glyph = Glyph::from_raster(r).map_err(|e| fail(EXIT_PRECONDITION, e))?;
    let v = feature_vector(&glyph, config).map_err(|e| fail(EXIT_PRECONDITION, format!("{}: {e}", path.display())))?;
    let line: Vec<String> = v.values().iter().map(|x| x.to_string()).collect();
    println!("{}", line.join(" "));
    Ok(())
}

fn parse_manifest(path: &Path) -> Result<Vec<(PathBuf, String)>, Failure> {
    let text = String::from_utf8(read(path)?)
        .map_err(|_| fail(EXIT_INPUT, format!("{}: manifest is not valid UTF-8", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let (rel, label) = line
            .split_once('\t')
            .ok_or_else(|| fail(EXIT_INPUT, format!("{}:{}: expected `<path>\\t<label>`", path.display(), i + 1)))?;
        if rel.is_empty() || label.is_empty() {
            return Err(fail(EXIT_INPUT, format!("{}:{}: empty path or label", path.display(), i + 1)));
        }
        entries.push((base.join(rel), label.to_string()));
    }
    if entries.is_empty() {
        return Err(fail(EXIT_INPUT, format!("{}: manifest has no entries", path.display())));
    }
    Ok(entries)
}

fn cmd_train(opts: &Options, manifest: &Path, out: &Path) -> CmdResult {
    let manifest = if manifest.is_dir() {
        manifest.join(MANIFEST_NAME)
    } else {
        manifest.to_path_buf()
    };
    let features = default_features(opts);
    pipeline_config(opts, features).validate()?;
    let mut samples = Vec::new();
    for (path, label) in parse_manifest(&manifest)? {
        let r = load_binary(&path, opts)?;
        let glyph = prepare_sample(&r, features.size)
            .map_err(|e| fail(EXIT_PRECONDITION, format!("{}: {e}", path.display())))?;
        samples.push(TrainingSample {
            name: path.display().to_string(),
            label,
            glyph,
        });
    }
    let store = train(&samples, features).map_err(|e| fail(EXIT_PRECONDITION, e))?;
    write(out, store.to_text().as_bytes())
}

fn cmd_recognize(opts: &Options, page: &Path, store_path: &Path) -> CmdResult {
    let text = String::from_utf8(read(store_path)?)
        .map_err(|_| fail(EXIT_INPUT, format!("{}: store is not valid UTF-8", store_path.display())))?;
    let store = TemplateStore::from_text(&text).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", store_path.display())))?;
    let features = FeatureConfig {
        size: opts.size.unwrap_or(store.config().size),
        rings: opts.rings.unwrap_or(store.config().rings),
    };
    let cfg = pipeline_config(opts, features);
    cfg.validate()?;
    let r = load_binary(page, opts)?;
    let rec = recognize_page(&r, &store, &cfg)?;

    if let Some(dir) = debug_dir(opts)? {
        let layouts: Vec<LineLayout> = rec.lines.iter().map(|l| l.layout.clone()).collect();
        write(&dir.join("lines.jsonl"), lines_jsonl(&layouts).as_bytes())?;
        for line in &rec.lines {
            let mut word = usize::MAX;
            let mut k = 0;
            for c in &line.chars {
                if c.bbox.word_index != word {
                    word = c.bbox.word_index;
                    k = 0;
                }
                let tight = tight_bounding_box(&r, c.bbox).map_err(PipelineError::from)?;
                let normalized = normalize_box(&r, tight, cfg.size).map_err(PipelineError::from)?;
                let name = format!("line{}_word{}_char{}.pbm", line.layout.index, word, k);
                write(&dir.join(name), &save_pbm(normalized.raster()))?;
                k += 1;
            }
        }
    }

    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(rec.transcript(&opts.separator).as_bytes())
        .map_err(|e| fail(EXIT_OUTPUT, format!("stdout: {e}")))
}

fn run(cli: Cli) -> CmdResult {
    let opts = &cli.opts;
    match &cli.command {
        Command::Binarize { input, output } => cmd_binarize(opts, input, output),
        Command::Segment { page } => cmd_segment(opts, page),
        Command::Thin { input, output, max_passes } => cmd_thin(opts, input, output, *max_passes),
        Command::Features { glyph } => cmd_features(opts, glyph),
        Command::Train { manifest, store } => cmd_train(opts, manifest, store),
        Command::Recognize { page, store } => cmd_recognize(opts, page, store),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("glyphocr: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
