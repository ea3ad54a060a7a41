//! Command-line front end: inspect, validate, convert, transform and render
//! `.catd` images, and run declarative pipelines.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or invariant error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use catmorph::io::{
    annotator_bias_recipe, apply_step, denoise_recipe, read_catd, render, run_pipeline,
    write_catd, Backend, CatdImage, OpKind, Palette, PipelineSpec, RenderStyle, Step,
};
use catmorph::protected::ProtectionMode;
use catmorph::{Error, Norm};

#[derive(Parser)]
#[command(name = "catmorph", version, about = "Morphology on categorical distribution images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print header and summary information for a .catd file
    Info { file: PathBuf },
    /// Check that a file's payload satisfies its invariants
    Validate {
        file: PathBuf,
        /// Simplex tolerance for categorical payloads
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Convert between representations (PNG labels, Dirichlet expectation,
    /// channel extraction)
    Convert {
        input: PathBuf,
        output: PathBuf,
        /// Palette for PNG label import: comma-separated #rrggbb, one per category
        #[arg(long)]
        palette: Option<String>,
        /// Target representation: categorical (Dirichlet expectation) or scalar
        #[arg(long)]
        to: Option<String>,
        /// Channel to extract when converting to scalar
        #[arg(long)]
        channel: Option<usize>,
    },
    /// Dilate one category (or channels, depending on backend)
    Dilate(MorphArgs),
    /// Erode one category
    Erode(MorphArgs),
    /// Open one category (erode, then dilate)
    Open(MorphArgs),
    /// Close one category (dilate, then erode)
    Close(MorphArgs),
    /// Render an image to PNG
    Render {
        input: PathBuf,
        output: PathBuf,
        /// rgb-mixture | entropy | magnitude | argmax
        #[arg(long, default_value = "rgb-mixture")]
        style: String,
        /// Palette for rgb-mixture/argmax; defaults to built-in colors
        #[arg(long)]
        palette: Option<String>,
    },
    /// Run, print or generate pipelines
    Pipeline {
        #[command(subcommand)]
        command: PipelineCommand,
    },
}

#[derive(Args)]
struct MorphArgs {
    input: PathBuf,
    output: PathBuf,
    /// categorical | dirichlet | dirichlet-subset | nary | set | label
    #[arg(long, default_value = "categorical")]
    backend: String,
    /// Operated category (categorical and nary backends)
    #[arg(long)]
    category: Option<usize>,
    /// Channels for the dirichlet-subset backend, comma separated
    #[arg(long)]
    subset: Option<String>,
    /// Ball radius
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// city-block | chessboard | euclidean
    #[arg(long, default_value = "city-block")]
    norm: String,
    /// Protected categories, comma separated
    #[arg(long)]
    protect: Option<String>,
    /// literal | capacity (protection semantics)
    #[arg(long, default_value = "literal")]
    mode: String,
    /// Capacity quantization levels
    #[arg(long)]
    plevels: Option<usize>,
    /// Tie-break ranking for nary erosion, comma separated
    #[arg(long)]
    ranking: Option<String>,
}

#[derive(Subcommand)]
enum PipelineCommand {
    /// Execute a pipeline spec (or a built-in recipe) on an input image
    Run {
        /// Pipeline spec file; mutually exclusive with --recipe
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Built-in recipe: denoise | annotator-bias
        #[arg(long)]
        recipe: Option<String>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        outdir: PathBuf,
        #[command(flatten)]
        recipe_args: RecipeArgs,
    },
    /// Parse a spec file and print its canonical form
    Print {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Print the canonical spec of a built-in recipe
    Recipe {
        /// denoise | annotator-bias
        name: String,
        #[command(flatten)]
        recipe_args: RecipeArgs,
    },
}

#[derive(Args)]
struct RecipeArgs {
    /// Category to open (denoise)
    #[arg(long)]
    category: Option<usize>,
    /// Inner class to grow first (annotator-bias)
    #[arg(long)]
    inner: Option<usize>,
    /// Surrounding class grown second (annotator-bias)
    #[arg(long)]
    outer: Option<usize>,
    /// Class kept fixed throughout (annotator-bias)
    #[arg(long)]
    background: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value = "city-block")]
    norm: String,
}

enum CliError {
    Usage(String),
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Info { file } => {
            let img = read_catd(&file)?;
            let (lo, hi) = min_max(img.values());
            println!("kind:     {}", img.kind().name());
            println!("rank:     {}", img.shape().len());
            println!("shape:    {:?}", img.shape());
            println!("channels: {}", img.channels());
            println!("values:   [{lo}, {hi}]");
            Ok(())
        }
        Command::Validate { file, tol } => {
            let img = read_catd(&file)?;
            if let CatdImage::Categorical(c) = &img {
                c.validate(tol).map_err(CliError::Data)?;
            }
            println!("ok");
            Ok(())
        }
        Command::Convert {
            input,
            output,
            palette,
            to,
            channel,
        } => {
            let img = load_any(&input, palette.as_deref())?;
            let out = match (to.as_deref(), channel) {
                (None, None) => img,
                (Some("categorical"), None) => match img {
                    CatdImage::Dirichlet(d) => CatdImage::Categorical(d.expectation()),
                    other @ CatdImage::Categorical(_) => other,
                    CatdImage::Scalar(_) => {
                        return Err(usage("cannot convert a scalar payload to categorical"))
                    }
                },
                (Some("scalar"), Some(k)) | (None, Some(k)) => match &img {
                    CatdImage::Categorical(c) => CatdImage::Scalar(c.channel(k)?),
                    CatdImage::Dirichlet(d) => CatdImage::Scalar(d.channel(k)?),
                    CatdImage::Scalar(_) => {
                        return Err(usage("scalar payloads have no channels to extract"))
                    }
                },
                (Some("scalar"), None) => return Err(usage("--to scalar needs --channel")),
                (Some(other), _) => {
                    return Err(usage(format!("unknown conversion target '{other}'")))
                }
            };
            write_catd(&out, &output)?;
            Ok(())
        }
        Command::Dilate(args) => morph(OpKind::Dilate, args),
        Command::Erode(args) => morph(OpKind::Erode, args),
        Command::Open(args) => morph(OpKind::Open, args),
        Command::Close(args) => morph(OpKind::Close, args),
        Command::Render {
            input,
            output,
            style,
            palette,
        } => {
            let img = read_catd(&input)?;
            let style = RenderStyle::parse(&style)
                .ok_or_else(|| usage(format!("unknown render style '{style}'")))?;
            let palette = match palette {
                Some(s) => Some(Palette::parse(&s)?),
                None => Some(Palette::auto(img.channels())),
            };
            let rgb = render(&img, style, palette.as_ref())?;
            rgb.save(&output)
                .map_err(|e| CliError::Data(Error::Unsupported(format!("cannot write PNG: {e}"))))?;
            Ok(())
        }
        Command::Pipeline { command } => pipeline(command),
    }
}

fn morph(op: OpKind, args: MorphArgs) -> Result<(), CliError> {
    let backend = Backend::parse(&args.backend)
        .ok_or_else(|| usage(format!("unknown backend '{}'", args.backend)))?;
    let norm =
        Norm::parse(&args.norm).ok_or_else(|| usage(format!("unknown norm '{}'", args.norm)))?;
    let mode = match args.mode.as_str() {
        "literal" => ProtectionMode::Literal,
        "capacity" => ProtectionMode::Capacity,
        other => return Err(usage(format!("unknown mode '{other}'"))),
    };
    let mut step = Step::new(op, backend);
    step.category = args.category;
    step.subset = parse_indices(args.subset.as_deref())?;
    step.radius = args.radius;
    step.norm = norm;
    step.protect = parse_indices(args.protect.as_deref())?;
    step.mode = mode;
    step.plevels = args.plevels;
    step.ranking = parse_indices(args.ranking.as_deref())?
        .into_iter()
        .map(|v| v as u32)
        .collect();

    let input = read_catd(&args.input)?;
    let spec = PipelineSpec {
        steps: vec![step.clone()],
    };
    spec.validate_against(&input)
        .map_err(|e| usage(e.to_string()))?;
    let (out, drift) = apply_step(&step, &input)?;
    write_catd(&out, &args.output)?;
    eprintln!("drift: {drift:.3e}");
    Ok(())
}

fn pipeline(command: PipelineCommand) -> Result<(), CliError> {
    match command {
        PipelineCommand::Run {
            spec,
            recipe,
            input,
            outdir,
            recipe_args,
        } => {
            let spec = match (spec, recipe) {
                (Some(path), None) => {
                    let text = std::fs::read_to_string(&path).map_err(Error::Io)?;
                    PipelineSpec::parse(&text)?
                }
                (None, Some(name)) => build_recipe(&name, &recipe_args)?,
                _ => return Err(usage("pass exactly one of --spec or --recipe")),
            };
            let img = read_catd(&input)?;
            let report = run_pipeline(&spec, &img, &outdir)?;
            for s in &report.steps {
                println!(
                    "step {} {} ({}) drift={:.3e} {:.3}ms",
                    s.index, s.op, s.backend, s.renorm_drift, s.millis
                );
            }
            println!("final: {}", report.final_path.display());
            Ok(())
        }
        PipelineCommand::Print { spec } => {
            let text = std::fs::read_to_string(&spec).map_err(Error::Io)?;
            print!("{}", PipelineSpec::parse(&text)?.canonical());
            Ok(())
        }
        PipelineCommand::Recipe { name, recipe_args } => {
            print!("{}", build_recipe(&name, &recipe_args)?.canonical());
            Ok(())
        }
    }
}

fn build_recipe(name: &str, args: &RecipeArgs) -> Result<PipelineSpec, CliError> {
    let norm =
        Norm::parse(&args.norm).ok_or_else(|| usage(format!("unknown norm '{}'", args.norm)))?;
    match name {
        "denoise" => {
            let category = args
                .category
                .ok_or_else(|| usage("denoise needs --category"))?;
            Ok(denoise_recipe(category, args.radius, norm))
        }
        "annotator-bias" => {
            let (inner, outer, background) = match (args.inner, args.outer, args.background) {
                (Some(i), Some(o), Some(b)) => (i, o, b),
                _ => {
                    return Err(usage(
                        "annotator-bias needs --inner, --outer and --background",
                    ))
                }
            };
            Ok(annotator_bias_recipe(
                inner,
                outer,
                background,
                args.radius,
                norm,
            ))
        }
        other => Err(usage(format!("unknown recipe '{other}'"))),
    }
}

fn load_any(path: &PathBuf, palette: Option<&str>) -> Result<CatdImage, CliError> {
    if path.extension().is_some_and(|e| e == "png") {
        let palette = palette.ok_or_else(|| usage("PNG import needs --palette"))?;
        let palette = Palette::parse(palette)?;
        Ok(CatdImage::Categorical(catmorph::io::import_png_labels(
            path, &palette,
        )?))
    } else {
        Ok(read_catd(path)?)
    }
}

fn parse_indices(s: Option<&str>) -> Result<Vec<usize>, CliError> {
    let Some(s) = s else { return Ok(Vec::new()) };
    s.split(',')
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("bad index '{p}'")))
        })
        .collect()
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}
