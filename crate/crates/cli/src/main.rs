use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use planesym::cip::{process, translation_average, CipConfig, ProcessOutput, RegionSpec};
use planesym::hierarchy::{classify, decide, table_from_models, ClassificationResult, ClassifyConfig};
use planesym::image_io::{
    compute_histogram, load_image, parse_hka, save_image, write_report, RasterImage, ReportFormat,
};
use planesym::lattice_fourier::{dft2, CoefficientSet};
use planesym::symmetrize::{plane_group, MetricTolerances};
use planesym::synth::{
    apply_noise, generate_pattern, generate_trio, random_motif, LatticeRequest, NoiseSpec, TrioSpec,
};

const OUT_DIR_ENV: &str = "PLANESYM_OUT_DIR";

/// Plane-group and Laue-class classification of 2D periodic images.
#[derive(Parser, Debug)]
#[command(name = "planesym", version)]
struct Cli {
    /// TOML file whose keys override the corresponding flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log verbosity (error, warn, info, debug).
    #[arg(long, global = true, default_value = "warn")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify an image (or a set of .hka models) and write a report.
    Classify(ClassifyArgs),
    /// Symmetrize an image to a plane group and back-transform it.
    Process(ProcessArgs),
    /// Write synthetic test patterns.
    Generate(GenerateArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct RegionArgs {
    /// Region centre as "x,y" in pixels (default: image centre).
    #[arg(long, value_parser = parse_pair)]
    center: Option<(f64, f64)>,
    /// Region radius in pixels (default: largest centred disk).
    #[arg(long)]
    radius: Option<f64>,
    /// Use the whole image instead of a disk.
    #[arg(long, conflicts_with_all = ["center", "radius"])]
    full: bool,
    /// Amplitude dynamic range; coefficients below max/range are dropped.
    #[arg(long, default_value_t = 200.0)]
    dynamic_range: f64,
    /// Resolution limit in reciprocal pixels (default: Nyquist).
    #[arg(long)]
    resolution_radius: Option<f64>,
    /// Peak detection threshold as a multiple of the median amplitude.
    #[arg(long, default_value_t = 8.0)]
    min_peak_snr: f64,
    /// Relative length tolerance for hexagonal lattices.
    #[arg(long, default_value_t = 0.02)]
    hex_length_tol: f64,
    /// Angle tolerance (degrees) for hexagonal lattices.
    #[arg(long, default_value_t = 2.0)]
    hex_angle_tol: f64,
    /// Relative length tolerance for square lattices.
    #[arg(long, default_value_t = 0.01)]
    square_length_tol: f64,
    /// Angle tolerance (degrees) for square lattices.
    #[arg(long, default_value_t = 1.0)]
    square_angle_tol: f64,
    /// Relative length tolerance for rectangular and centred lattices.
    #[arg(long, default_value_t = 0.01)]
    rect_length_tol: f64,
    /// Angle tolerance (degrees) for rectangular and centred lattices.
    #[arg(long, default_value_t = 1.0)]
    rect_angle_tol: f64,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    /// Input image (PNG or PGM).
    #[arg(long = "in", conflicts_with = "hka")]
    input: Option<PathBuf>,
    /// Symmetrized model as [group=]path; repeat once per setting. The translation average
    /// is the p1 entry.
    #[arg(long)]
    hka: Vec<String>,
    /// Report path (default: <out-dir>/report.json).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Report format (default: from the report extension).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Also write the DFT amplitude map (log scale) to this image.
    #[arg(long)]
    amplitude_map: Option<PathBuf>,
    /// Pseudosymmetry band as a multiple of the anchor residual.
    #[arg(long, default_value_t = 10.0)]
    pseudo_band: f64,
    #[command(flatten)]
    region: RegionArgs,
}

#[derive(Args, Debug)]
struct ProcessArgs {
    /// Input image (PNG or PGM).
    #[arg(long = "in")]
    input: PathBuf,
    /// Plane group to enforce, or "auto" for the classification's best group.
    #[arg(long, default_value = "auto")]
    group: String,
    /// Output image (default: <out-dir>/processed.png).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON with quality metrics and histograms (default: <out-dir>/process.json).
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    region: RegionArgs,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Named preset; "paper-trio" writes clean, moderate and heavy noise patterns.
    #[arg(long, value_enum, conflicts_with = "group")]
    preset: Option<Preset>,
    /// Plane group of a single random-motif pattern.
    #[arg(long)]
    group: Option<String>,
    /// Lattice metric to render on (default: the most general one the group allows).
    #[arg(long, value_enum)]
    lattice: Option<LatticeArg>,
    /// Unit cells per image edge.
    #[arg(long, default_value_t = 12)]
    cells: usize,
    /// Pixels per cell edge.
    #[arg(long, default_value_t = 96)]
    cell_px: usize,
    /// Blobs in the asymmetric unit of a random motif.
    #[arg(long, default_value_t = 8)]
    blobs: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Gaussian noise sigma (gray levels); for the trio, the moderate-noise sigma.
    #[arg(long)]
    sigma: Option<f64>,
    /// Spread-noise radius in pixels.
    #[arg(long)]
    spread: Option<usize>,
    /// Output directory (default: $PLANESYM_OUT_DIR or the current directory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum FormatArg {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Preset {
    #[value(name = "paper-trio")]
    #[serde(rename = "paper-trio")]
    Trio,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum LatticeArg {
    Oblique,
    Rectangular,
    Rhombic,
    Square,
    Hexagonal,
}

/// Keys accepted in `--config`; each one replaces the flag of the same name.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    input: Option<PathBuf>,
    report: Option<PathBuf>,
    format: Option<FormatArg>,
    amplitude_map: Option<PathBuf>,
    out: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    center: Option<[f64; 2]>,
    radius: Option<f64>,
    full: Option<bool>,
    dynamic_range: Option<f64>,
    resolution_radius: Option<f64>,
    min_peak_snr: Option<f64>,
    pseudo_band: Option<f64>,
    metric: Option<MetricTolerances>,
    group: Option<String>,
    preset: Option<Preset>,
    lattice: Option<LatticeArg>,
    cells: Option<usize>,
    cell_px: Option<usize>,
    blobs: Option<usize>,
    seed: Option<u64>,
    sigma: Option<f64>,
    spread: Option<usize>,
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected x,y")?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| e.to_string());
    Ok((p(a)?, p(b)?))
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from)
}

fn out_path(explicit: Option<PathBuf>, out_dir: Option<&Path>, name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| out_dir.map_or_else(default_out_dir, Path::to_path_buf).join(name))
}

fn apply_region(mut r: RegionArgs, fc: &FileConfig) -> RegionArgs {
    if let Some(c) = fc.center {
        r.center = Some((c[0], c[1]));
    }
    r.radius = fc.radius.or(r.radius);
    r.full = fc.full.unwrap_or(r.full);
    r.dynamic_range = fc.dynamic_range.unwrap_or(r.dynamic_range);
    r.resolution_radius = fc.resolution_radius.or(r.resolution_radius);
    r.min_peak_snr = fc.min_peak_snr.unwrap_or(r.min_peak_snr);
    if let Some(m) = fc.metric {
        r.hex_length_tol = m.hex_length;
        r.hex_angle_tol = m.hex_angle_deg;
        r.square_length_tol = m.square_length;
        r.square_angle_tol = m.square_angle_deg;
        r.rect_length_tol = m.rect_length;
        r.rect_angle_tol = m.rect_angle_deg;
    }
    r
}

fn cip_config(r: &RegionArgs, image: &RasterImage) -> CipConfig {
    let (w, h) = (image.width() as f64, image.height() as f64);
    let region = if r.full {
        RegionSpec::Full
    } else if r.center.is_none() && r.radius.is_none() {
        RegionSpec::Centered
    } else {
        let (cx, cy) = r.center.unwrap_or(((w - 1.0) / 2.0, (h - 1.0) / 2.0));
        let radius = r.radius.unwrap_or((w.min(h) - 1.0) / 2.0);
        RegionSpec::Disk { cx, cy, radius }
    };
    CipConfig {
        region,
        dynamic_range: r.dynamic_range,
        resolution_radius: r.resolution_radius,
        min_peak_snr: r.min_peak_snr,
        metric: MetricTolerances {
            hex_length: r.hex_length_tol,
            hex_angle_deg: r.hex_angle_tol,
            square_length: r.square_length_tol,
            square_angle_deg: r.square_angle_tol,
            rect_length: r.rect_length_tol,
            rect_angle_deg: r.rect_angle_tol,
        },
        check_laue: true,
    }
}

fn print_summary(r: &ClassificationResult) {
    println!("anchor plane group: {}", r.anchor_plane);
    println!("genuine plane groups: {}", r.genuine_plane.join(", "));
    println!("pseudosymmetries: {}", r.pseudo_plane.join(", "));
    println!("best plane group: {}", r.best_plane);
    println!("Laue class: {} (pseudo: {})", r.genuine_laue, r.pseudo_laue.join(", "));
    if let Some(e) = r.noise_eps2 {
        println!("noise estimate eps^2: {e:.6e}");
    }
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
}

fn write_amplitude_map(image: &RasterImage, cfg: &CipConfig, path: &Path) -> Result<()> {
    let region = cfg.select(image)?;
    let map = dft2(image, &region)?;
    let logs: Vec<f64> = map.amplitudes().iter().map(|a| (1.0 + a).ln()).collect();
    let max = logs.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let pixels = logs.iter().map(|v| 255.0 * v / max).collect();
    save_image(&RasterImage::new(map.width(), map.height(), pixels)?, path)?;
    Ok(())
}

fn parse_hka_arg(arg: &str) -> Result<(String, PathBuf)> {
    if let Some((g, p)) = arg.split_once('=') {
        let group = plane_group(g).ok_or_else(|| anyhow!("unknown plane group '{g}' in --hka {arg}"))?;
        return Ok((group.name.to_string(), PathBuf::from(p)));
    }
    let path = PathBuf::from(arg);
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    let group = stem
        .rsplit(['_', '-', '.'])
        .find_map(plane_group)
        .ok_or_else(|| anyhow!("cannot infer the plane group of {arg}; use group=path"))?;
    Ok((group.name.to_string(), path))
}

fn cmd_classify(args: ClassifyArgs, fc: &FileConfig) -> Result<ExitCode> {
    let region = apply_region(args.region, fc);
    let config = ClassifyConfig {
        pseudo_band: fc.pseudo_band.unwrap_or(args.pseudo_band),
        ..ClassifyConfig::default()
    };
    let input = fc.input.clone().or(args.input);
    let result = if !args.hka.is_empty() {
        let mut trans: Option<CoefficientSet> = None;
        let mut models = Vec::new();
        for a in &args.hka {
            let (group, path) = parse_hka_arg(a)?;
            let set = CoefficientSet::from_hka(&parse_hka(&path)?);
            if group == "p1" {
                trans = Some(set);
            } else {
                models.push((group, set));
            }
        }
        let trans = trans.ok_or_else(|| anyhow!("hka mode needs the translation average as p1=path"))?;
        let table = table_from_models(&trans, &models)?;
        decide(&table, &config)?
    } else {
        let path = input.ok_or_else(|| anyhow!("classify needs --in <image> or --hka files"))?;
        let image = load_image(&path)?;
        let mut cc = cip_config(&region, &image);
        cc.check_laue = false;
        let config = ClassifyConfig {
            metric: cc.metric,
            ..config
        };
        if let Some(p) = fc.amplitude_map.clone().or(args.amplitude_map) {
            write_amplitude_map(&image, &cc, &p)?;
        }
        let (_, trans) = translation_average(&image, &cc)?;
        classify(&trans, &config)?
    };
    let report = out_path(fc.report.clone().or(args.report), fc.out_dir.as_deref(), "report.json");
    let format = match fc.format.or(args.format) {
        Some(FormatArg::Json) => ReportFormat::Json,
        Some(FormatArg::Csv) => ReportFormat::Csv,
        None => ReportFormat::from_path(&report),
    };
    write_report(&result, format, &report)?;
    print_summary(&result);
    println!("report: {}", report.display());
    if result.is_consistent() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "conflict: {}",
            result.consistency.description.as_deref().unwrap_or("plane/Laue inconsistency")
        );
        Ok(ExitCode::from(2))
    }
}

#[derive(Serialize)]
struct ProcessReport<'a> {
    group: &'a str,
    origin: [f64; 2],
    quality: planesym::cip::QualityReport,
    before: &'a planesym::image_io::Histogram,
    after: &'a planesym::image_io::Histogram,
    warnings: &'a [String],
}

fn cmd_process(args: ProcessArgs, fc: &FileConfig) -> Result<ExitCode> {
    let region = apply_region(args.region, fc);
    let input = fc.input.clone().unwrap_or(args.input);
    let image = load_image(&input)?;
    let cc = cip_config(&region, &image);
    let group_name = fc.group.clone().unwrap_or(args.group);
    let group = if group_name == "auto" {
        let (_, trans) = translation_average(&image, &cc)?;
        let config = ClassifyConfig {
            metric: cc.metric,
            ..ClassifyConfig::default()
        };
        let r = classify(&trans, &config)?;
        println!("auto: best plane group {}", r.best_plane);
        plane_group(&r.best_plane).expect("classification returns known groups")
    } else {
        plane_group(&group_name).ok_or_else(|| anyhow!("unknown plane group '{group_name}'"))?
    };
    let ProcessOutput {
        image: out,
        quality,
        before,
        after,
        origin,
        warnings,
        ..
    } = process(&image, group, &cc)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let out_dir = fc.out_dir.as_deref();
    let out_file = out_path(fc.out.clone().or(args.out), out_dir, "processed.png");
    save_image(&out, &out_file)?;
    let report_file = out_path(fc.report.clone().or(args.report), out_dir, "process.json");
    let report = ProcessReport {
        group: group.name,
        origin,
        quality,
        before: &before,
        after: &after,
        warnings: &warnings,
    };
    let text = serde_json::to_string_pretty(&report)?;
    std::fs::write(&report_file, text + "\n").with_context(|| format!("writing {}", report_file.display()))?;
    let hist = compute_histogram(&out, None)?;
    println!(
        "processed in {}: {} (mean {:.2}, rms {:.2}); boosts sqrt(K) = {:.4}, sqrt(k) = {:.4}",
        group.name,
        out_file.display(),
        hist.mean,
        hist.rms,
        quality.fourier_filter_boost,
        quality.cip_boost
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_generate(args: GenerateArgs, fc: &FileConfig) -> Result<ExitCode> {
    let out_dir = fc.out_dir.clone().or(args.out_dir).unwrap_or_else(default_out_dir);
    std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let seed = fc.seed.unwrap_or(args.seed);
    let cells = fc.cells.unwrap_or(args.cells);
    let cell_px = fc.cell_px.unwrap_or(args.cell_px);
    let sigma = fc.sigma.or(args.sigma);
    let spread = fc.spread.or(args.spread);
    let preset = fc.preset.or(args.preset);
    let group = fc.group.clone().or(args.group);
    match (preset, group) {
        (Some(Preset::Trio), _) => {
            let mut spec = TrioSpec {
                seed,
                cells,
                cell_px,
                ..TrioSpec::default()
            };
            if let Some(s) = sigma {
                spec.sigma = s;
            }
            if let Some(r) = spread {
                spec.spread_radius = r;
            }
            let trio = generate_trio(&spec)?;
            for (name, img) in [("clean", &trio.clean), ("moderate", &trio.moderate), ("heavy", &trio.heavy)] {
                let path = out_dir.join(format!("trio_{name}.png"));
                save_image(img, &path)?;
                println!("{}", path.display());
            }
        }
        (None, Some(g)) => {
            let group = plane_group(&g).ok_or_else(|| anyhow!("unknown plane group '{g}'"))?;
            let mut spec = random_motif(group.name, fc.blobs.unwrap_or(args.blobs), seed);
            spec.cells = cells;
            spec.cell_px = cell_px;
            spec.lattice = match fc.lattice.or(args.lattice) {
                None => LatticeRequest::Auto,
                Some(LatticeArg::Oblique) => LatticeRequest::Oblique,
                Some(LatticeArg::Rectangular) => LatticeRequest::Rectangular,
                Some(LatticeArg::Rhombic) => LatticeRequest::Rhombic,
                Some(LatticeArg::Square) => LatticeRequest::Square,
                Some(LatticeArg::Hexagonal) => LatticeRequest::Hexagonal,
            };
            let mut img = generate_pattern(&spec)?;
            if sigma.is_some() || spread.is_some() {
                img = apply_noise(
                    &img,
                    &NoiseSpec {
                        gaussian_sigma: sigma.unwrap_or(0.0),
                        spread_radius: spread.unwrap_or(0),
                        seed,
                    },
                )?;
            }
            let path = out_dir.join(format!("pattern_{}.png", group.name));
            save_image(&img, &path)?;
            println!("{}", path.display());
        }
        (None, None) => bail!("generate needs --preset or --group"),
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let fc = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Classify(a) => cmd_classify(a, &fc),
        Command::Process(a) => cmd_process(a, &fc),
        Command::Generate(a) => cmd_generate(a, &fc),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::new().parse_filters(&cli.log).init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
