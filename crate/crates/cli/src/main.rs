//! `fhsf`: add impulsive noise, filter, score and tune from the command line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fhsf_core::color::{hsl_to_rgb, rgb_to_hsl, Hsl};
use fhsf_core::config::{Config, CONFIG_ENV};
use fhsf_core::filters::{filter_image, FhsfParams, FilterKind, FilterParams, FilterStats, Norm};
use fhsf_core::metrics::{MetricReport, Scielab};
use fhsf_core::noise::{inject, NoiseSpec};
use fhsf_core::ppm::{load_ppm, save_ppm};
use fhsf_core::report::run_benchmark;
use fhsf_core::tuner::{self, grid_search, ParamGrid, Range};
use fhsf_core::{with_workers, Error, RgbImage};

#[derive(Parser)]
#[command(
    name = "fhsf",
    version,
    about = "Impulsive noise removal for color images"
)]
struct Cli {
    /// Worker threads for the parallel kernels.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// TOML file overriding color constants and S-CIELAB kernels.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Corrupt an image with correlated impulsive noise.
    Noise {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the corruption mask (white = hit) as a PPM.
        #[arg(long)]
        mask: Option<PathBuf>,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Run one filter and print its statistics.
    Filter {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// VMF, BVDF, DDF, FPGF1, FPGF2, FHSF_S or FHSF_HSL.
        #[arg(short, long, default_value = "FHSF_S")]
        kind: String,
        #[command(flatten)]
        params: FilterArgs,
    },
    /// Compare a processed image against its original.
    Metrics {
        original: PathBuf,
        processed: PathBuf,
        /// Print one CSV row instead of a table.
        #[arg(long)]
        csv: bool,
    },
    /// Corrupt an image once, run several filters, tabulate quality and time.
    Bench {
        #[arg(short, long)]
        input: PathBuf,
        /// Comma-separated filter names; an empty string runs none.
        #[arg(long, default_value = "VMF,BVDF,DDF,FPGF1,FPGF2,FHSF_S,FHSF_HSL")]
        filters: String,
        /// Write the report as CSV to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Grid-search the HSL switching filter parameters by PCD.
    Tune {
        #[arg(required = true)]
        images: Vec<PathBuf>,
        /// Peer group sizes, lo:hi:step.
        #[arg(long, default_value = "1:8:1")]
        m: Range<usize>,
        #[arg(long, default_value = "6:20:2")]
        ht: Range<f64>,
        #[arg(long, default_value = "4:16:2")]
        st: Range<f64>,
        #[arg(long, default_value = "32:64:4")]
        lt: Range<f64>,
        /// Share of the best configurations kept per image before intersecting.
        #[arg(long, default_value_t = 0.05)]
        fraction: f64,
        /// Write every (image, configuration, PCD) row to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Dump a PPM as per-pixel RGB and HSL CSV, or rebuild a PPM from such a dump.
    Convert {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Read a CSV dump (columns x,y,h,s,l) and write a PPM.
        #[arg(long)]
        from_hsl: bool,
    },
}

#[derive(Args)]
struct NoiseArgs {
    /// Per-pixel corruption probability.
    #[arg(short, long, value_parser = probability)]
    p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Probabilities of hitting R, G, B, all channels.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    mix: Option<Vec<f64>>,
    /// Values written into hit channels.
    #[arg(long, value_delimiter = ',')]
    impulses: Option<Vec<u8>>,
    /// TOML noise spec; explicit flags take precedence.
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long)]
    m: Option<usize>,
    /// Hue threshold in degrees.
    #[arg(long)]
    ht: Option<f64>,
    /// Saturation threshold.
    #[arg(long)]
    st: Option<f64>,
    /// Lightness threshold.
    #[arg(long)]
    lt: Option<f64>,
    /// Distance threshold for FPGF and FHSF_HSL.
    #[arg(long)]
    tol: Option<f64>,
    /// l1 or l2, for VMF.
    #[arg(long)]
    norm: Option<String>,
}

fn probability(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(format!("{p} is outside [0, 1]"))
    }
}

impl NoiseArgs {
    fn spec(&self) -> fhsf_core::Result<NoiseSpec> {
        let mut spec = match &self.spec {
            Some(path) => NoiseSpec::from_toml(&read_text(path)?)?,
            None => NoiseSpec::default(),
        };
        if let Some(p) = self.p {
            spec.p = p;
        }
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        if let Some(mix) = &self.mix {
            spec.channel_mix = [mix[0], mix[1], mix[2], mix[3]];
        }
        if let Some(values) = &self.impulses {
            spec.impulse_values = values.clone();
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_norm(s: &str) -> fhsf_core::Result<Norm> {
    match s.to_ascii_lowercase().as_str() {
        "l1" => Ok(Norm::L1),
        "l2" => Ok(Norm::L2),
        _ => Err(Error::InvalidParams(format!(
            "unknown norm `{s}`, expected l1 or l2"
        ))),
    }
}

impl FilterArgs {
    fn resolve(&self, kind: FilterKind) -> fhsf_core::Result<FilterParams> {
        let unused =
            |flag: &str| Error::InvalidParams(format!("--{flag} does not apply to {kind}"));
        let mut params = kind.default_params();
        match &mut params {
            FilterParams::Fhsf(p) => {
                if self.tol.is_some() {
                    return Err(unused("tol"));
                }
                p.m = self.m.unwrap_or(p.m);
                let t = &mut p.thresholds;
                t.hue = self.ht.unwrap_or(t.hue);
                t.saturation = self.st.unwrap_or(t.saturation);
                t.lightness = self.lt.unwrap_or(t.lightness);
            }
            FilterParams::Fpgf(p) => {
                p.m = self.m.unwrap_or(p.m);
                p.tol = self.tol.unwrap_or(p.tol);
            }
            FilterParams::FhsfHsl(p) => {
                p.m = self.m.unwrap_or(p.m);
                p.tol = self.tol.unwrap_or(p.tol);
            }
            FilterParams::Vmf(norm) => {
                if let Some(n) = &self.norm {
                    *norm = parse_norm(n)?;
                }
            }
            FilterParams::None => {}
        }
        if !matches!(params, FilterParams::Fhsf(_)) {
            for (flag, set) in [
                ("ht", self.ht.is_some()),
                ("st", self.st.is_some()),
                ("lt", self.lt.is_some()),
            ] {
                if set {
                    return Err(unused(flag));
                }
            }
        }
        if !kind.is_switching() && self.m.is_some() {
            return Err(unused("m"));
        }
        if !matches!(params, FilterParams::Vmf(_)) && self.norm.is_some() {
            return Err(unused("norm"));
        }
        if matches!(params, FilterParams::None | FilterParams::Vmf(_)) && self.tol.is_some() {
            return Err(unused("tol"));
        }
        Ok(params)
    }
}

fn read_text(path: &Path) -> fhsf_core::Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> fhsf_core::Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn scielab(config: &Option<PathBuf>) -> fhsf_core::Result<Scielab> {
    match config {
        Some(path) => Config::load(path)?.scielab(),
        None => Config::default().scielab(),
    }
}

fn stats_block(kind: FilterKind, img: &RgbImage, stats: &FilterStats) -> String {
    format!(
        "kind={kind}\nwidth={}\nheight={}\npixels_switched={}\ndistance_evals={}\nelapsed={:.6}\n",
        img.width(),
        img.height(),
        stats.pixels_switched,
        stats.distance_evals,
        stats.elapsed_secs()
    )
}

fn run(cli: Cli) -> fhsf_core::Result<()> {
    match cli.command {
        Command::Noise {
            input,
            output,
            mask,
            noise,
        } => {
            let spec = noise.spec()?;
            let img = load_ppm(&input)?;
            let (noisy, hits) = inject(&img, &spec)?;
            save_ppm(&noisy, &output)?;
            if let Some(path) = mask {
                save_ppm(&hits.to_image(), &path)?;
            }
            println!(
                "corrupted_pixels={}\npixels={}",
                hits.count(),
                img.pixel_count()
            );
        }
        Command::Filter {
            input,
            output,
            kind,
            params,
        } => {
            let kind: FilterKind = kind.parse()?;
            let params = params.resolve(kind)?;
            let img = load_ppm(&input)?;
            let (out, stats) = filter_image(&img, kind, &params)?;
            save_ppm(&out, &output)?;
            print!("{}", stats_block(kind, &img, &stats));
        }
        Command::Metrics {
            original,
            processed,
            csv,
        } => {
            let s = scielab(&cli.config)?;
            let report = MetricReport::compare(&load_ppm(&original)?, &load_ppm(&processed)?, &s)?;
            if csv {
                println!("{}\n{}", MetricReport::CSV_HEADER, report.to_csv_row());
            } else {
                print!("{}", report.to_table());
            }
        }
        Command::Bench {
            input,
            filters,
            csv,
            noise,
        } => {
            let spec = noise.spec()?;
            let kinds = filters
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    let kind: FilterKind = s.parse()?;
                    Ok((kind, kind.default_params()))
                })
                .collect::<fhsf_core::Result<Vec<_>>>()?;
            let s = scielab(&cli.config)?;
            let report = run_benchmark(&load_ppm(&input)?, &spec, &kinds, &s)?;
            print!("{}", report.to_table());
            if let Some(path) = csv {
                write_text(&path, &report.to_csv())?;
            }
        }
        Command::Tune {
            images,
            m,
            ht,
            st,
            lt,
            fraction,
            csv,
            noise,
        } => {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(Error::InvalidParams(format!(
                    "fraction {fraction} outside (0, 1]"
                )));
            }
            let spec = noise.spec()?;
            let grid = ParamGrid {
                m,
                hue: ht,
                saturation: st,
                lightness: lt,
            };
            let originals = images
                .iter()
                .map(load_ppm)
                .collect::<fhsf_core::Result<Vec<_>>>()?;
            let s = scielab(&cli.config)?;
            let result = grid_search(&originals, &spec, &grid, &s)?;
            if let Some(path) = csv {
                write_text(&path, &result.to_csv())?;
            }
            print!("{}", tune_summary(&result, &images, fraction));
        }
        Command::Convert {
            input,
            output,
            from_hsl,
        } => {
            if from_hsl {
                save_ppm(&parse_hsl_dump(&read_text(&input)?)?, &output)?;
            } else {
                write_text(&output, &hsl_dump(&load_ppm(&input)?))?;
            }
        }
    }
    Ok(())
}

fn fmt_params(p: &FhsfParams) -> String {
    let t = &p.thresholds;
    format!(
        "m={} Ht={} St={} Lt={}",
        p.m, t.hue, t.saturation, t.lightness
    )
}

fn tune_summary(result: &tuner::TuneResult, images: &[PathBuf], fraction: f64) -> String {
    let mut out = String::new();
    let n = result.configs.len();
    let _ = writeln!(out, "configurations={n}");
    let best = &result.configs[result.global_ranking[0]];
    let _ = writeln!(out, "best_overall: {}", fmt_params(best));
    let hit = tuner::top_fraction_intersect(result, fraction);
    let _ = writeln!(
        out,
        "top {:.1}% intersection: {} configuration(s)",
        fraction * 100.0,
        hit.configs.len()
    );
    if let Some(msg) = &hit.diagnostic {
        let _ = writeln!(out, "note: {msg}");
    }
    for &c in &hit.configs {
        let _ = writeln!(out, "  {}", fmt_params(&result.configs[c]));
    }
    if let Some(span) = tuner::threshold_span(&result.configs, &hit.configs) {
        let ms: Vec<usize> = hit.configs.iter().map(|&c| result.configs[c].m).collect();
        let (lo, hi) = (ms.iter().min().unwrap(), ms.iter().max().unwrap());
        let _ = writeln!(
            out,
            "recommended: m in [{lo},{hi}] Ht in [{},{}] St in [{},{}] Lt in [{},{}]",
            span[0].0, span[0].1, span[1].0, span[1].1, span[2].0, span[2].1
        );
    }
    let _ = writeln!(out, "minimum PCD per m:");
    for (path, per_m) in images.iter().zip(tuner::min_pcd_per_m(result)) {
        let cells: Vec<String> = per_m.iter().map(|(m, v)| format!("{m}:{v:.4}")).collect();
        let _ = writeln!(out, "  {} {}", path.display(), cells.join(" "));
    }
    out
}

fn hsl_dump(img: &RgbImage) -> String {
    let mut out = String::from("x,y,r,g,b,h,s,l\n");
    for y in 0..img.height() {
        for x in 0..img.width() {
            let p = img.pixel(x, y);
            let c = rgb_to_hsl(p);
            let _ = writeln!(
                out,
                "{x},{y},{},{},{},{},{},{}",
                p[0], p[1], p[2], c.h, c.s, c.l
            );
        }
    }
    out
}

fn parse_hsl_dump(text: &str) -> fhsf_core::Result<RgbImage> {
    let bad = |line: usize, why: &str| Error::InvalidParams(format!("HSL dump line {line}: {why}"));
    let mut lines = text.lines().enumerate();
    let header: Vec<&str> = lines
        .next()
        .map(|(_, h)| h.split(',').map(str::trim).collect())
        .unwrap_or_default();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| bad(1, &format!("missing column `{name}`")))
    };
    let cols = [col("x")?, col("y")?, col("h")?, col("s")?, col("l")?];
    let mut cells = Vec::new();
    for (k, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |i: usize| {
            fields
                .get(cols[i])
                .copied()
                .ok_or_else(|| bad(k + 1, "too few fields"))
        };
        let x: usize = get(0)?.parse().map_err(|_| bad(k + 1, "bad x"))?;
        let y: usize = get(1)?.parse().map_err(|_| bad(k + 1, "bad y"))?;
        let mut hsl = [0.0; 3];
        for (v, i) in hsl.iter_mut().zip(2..5) {
            *v = get(i)?.parse().map_err(|_| bad(k + 1, "bad HSL value"))?;
        }
        cells.push((x, y, Hsl::new(hsl[0], hsl[1], hsl[2])));
    }
    let width = cells.iter().map(|c| c.0 + 1).max().unwrap_or(0);
    let height = cells.iter().map(|c| c.1 + 1).max().unwrap_or(0);
    if cells.len() != width * height {
        return Err(Error::InvalidParams(format!(
            "HSL dump has {} pixels, a {width}x{height} grid needs {}",
            cells.len(),
            width * height
        )));
    }
    let mut img = RgbImage::filled(width, height, [0; 3])?;
    for (x, y, c) in cells {
        img.set_pixel(x, y, hsl_to_rgb(c));
    }
    Ok(img)
}

/// Exit status per error class; 2 is shared with clap's usage errors.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParams(_) | Error::UnknownFilter(_) | Error::EmptyGrid | Error::NoImages => 2,
        Error::Io { .. } => 3,
        Error::MalformedHeader(_)
        | Error::UnsupportedMaxval(_)
        | Error::TruncatedPayload { .. }
        | Error::InvalidDimensions { .. }
        | Error::BufferSize { .. } => 4,
        Error::Config(_) | Error::SingularMatrix => 5,
        Error::DimensionMismatch(..) | Error::ZeroReference | Error::OutOfBounds { .. } => 6,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    match with_workers(threads, || run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fhsf: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
