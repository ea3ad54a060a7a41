//! Declarative processing pipelines.
//!
//! A pipeline is a list of steps in a plain text format, one step per line:
//!
//! ```text
//! # grow category 2, then smooth category 1 under protection
//! step dilate backend=categorical category=2 radius=1 norm=city-block
//! step open backend=categorical category=1 radius=2 norm=city-block protect=0 mode=literal tap=smoothed
//! ```
//!
//! Empty lines and `#` comments are ignored. [`PipelineSpec::canonical`]
//! prints the normal form (fixed key order, defaults elided), which
//! re-parses to the same spec. Running a pipeline writes every tapped
//! intermediate plus `final.catd` to the output directory along with a
//! tab-separated `pipeline.log` recording per-step rebalancing drift and
//! timing.
//!
//! Crisp backends (`nary`, `set`, `label`) act on a crisp view of the
//! categorical input (argmax labels, or the ≥ 0.5 support for sets) and
//! re-embed the result: labels become one-hot pixels; set members and
//! sentinel labels become uniform distributions over the member respectively
//! all categories.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::baselines;
use crate::categorical;
use crate::dirichlet;
use crate::error::{Error, Result};
use crate::image::{CategoricalImage, Label, LabelImage, SetImage};
use crate::io::catd::{write_catd, CatdImage, PayloadKind};
use crate::protected::{self, ProtectionMode, ProtectionSpec};
use crate::se::{Norm, StructuringElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Dilate,
    Erode,
    Open,
    Close,
}

impl OpKind {
    pub fn name(&self) -> &'static str {
        match self {
            OpKind::Dilate => "dilate",
            OpKind::Erode => "erode",
            OpKind::Open => "open",
            OpKind::Close => "close",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "dilate" => Some(OpKind::Dilate),
            "erode" => Some(OpKind::Erode),
            "open" => Some(OpKind::Open),
            "close" => Some(OpKind::Close),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Categorical,
    Dirichlet,
    DirichletSubset,
    Nary,
    Set,
    Label,
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Categorical => "categorical",
            Backend::Dirichlet => "dirichlet",
            Backend::DirichletSubset => "dirichlet-subset",
            Backend::Nary => "nary",
            Backend::Set => "set",
            Backend::Label => "label",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "categorical" => Some(Backend::Categorical),
            "dirichlet" => Some(Backend::Dirichlet),
            "dirichlet-subset" => Some(Backend::DirichletSubset),
            "nary" => Some(Backend::Nary),
            "set" => Some(Backend::Set),
            "label" => Some(Backend::Label),
            _ => None,
        }
    }
}

/// One pipeline step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub op: OpKind,
    pub backend: Backend,
    pub category: Option<usize>,
    pub subset: Vec<usize>,
    pub radius: f64,
    pub norm: Norm,
    pub protect: Vec<usize>,
    pub mode: ProtectionMode,
    pub plevels: Option<usize>,
    pub ranking: Vec<u32>,
    pub tap: Option<String>,
}

impl Step {
    pub fn new(op: OpKind, backend: Backend) -> Self {
        Step {
            op,
            backend,
            category: None,
            subset: Vec::new(),
            radius: 1.0,
            norm: Norm::CityBlock,
            protect: Vec::new(),
            mode: ProtectionMode::Literal,
            plevels: None,
            ranking: Vec::new(),
            tap: None,
        }
    }

    fn canonical_line(&self) -> String {
        let mut s = format!("step {} backend={}", self.op.name(), self.backend.name());
        if let Some(c) = self.category {
            let _ = write!(s, " category={c}");
        }
        if !self.subset.is_empty() {
            let _ = write!(s, " subset={}", join(&self.subset));
        }
        let _ = write!(s, " radius={} norm={}", self.radius, self.norm.name());
        if !self.protect.is_empty() {
            let _ = write!(s, " protect={}", join(&self.protect));
            let mode = match self.mode {
                ProtectionMode::Literal => "literal",
                ProtectionMode::Capacity => "capacity",
            };
            let _ = write!(s, " mode={mode}");
        }
        if let Some(p) = self.plevels {
            let _ = write!(s, " plevels={p}");
        }
        if !self.ranking.is_empty() {
            let _ = write!(s, " ranking={}", join(&self.ranking));
        }
        if let Some(tap) = &self.tap {
            let _ = write!(s, " tap={tap}");
        }
        s
    }
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// An ordered list of steps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineSpec {
    pub steps: Vec<Step>,
}

impl PipelineSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut steps = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            steps.push(parse_step(line, lineno + 1)?);
        }
        Ok(PipelineSpec { steps })
    }

    /// Normal form: one canonical `step` line per step.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            out.push_str(&step.canonical_line());
            out.push('\n');
        }
        out
    }

    /// Check every step against the input image; the first invalid step is
    /// reported with its index.
    pub fn validate_against(&self, input: &CatdImage) -> Result<()> {
        for (index, step) in self.steps.iter().enumerate() {
            validate_step(step, input).map_err(|reason| Error::PipelineStep { index, reason })?;
        }
        Ok(())
    }
}

fn parse_step(line: &str, lineno: usize) -> Result<Step> {
    let err = |reason: String| Error::PipelineParse {
        line: lineno,
        reason,
    };
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some("step") {
        return Err(err("lines must start with 'step'".to_string()));
    }
    let op_name = tokens
        .next()
        .ok_or_else(|| err("missing operation name".to_string()))?;
    let op = OpKind::parse(op_name)
        .ok_or_else(|| err(format!("unknown operation '{op_name}'")))?;
    let mut step = Step::new(op, Backend::Categorical);
    for token in tokens {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value, got '{token}'")))?;
        match key {
            "backend" => {
                step.backend = Backend::parse(value)
                    .ok_or_else(|| err(format!("unknown backend '{value}'")))?;
            }
            "category" => {
                step.category =
                    Some(value.parse().map_err(|_| {
                        err(format!("category must be an index, got '{value}'"))
                    })?);
            }
            "subset" => step.subset = parse_list(value).map_err(&err)?,
            "radius" => {
                step.radius = value
                    .parse()
                    .map_err(|_| err(format!("bad radius '{value}'")))?;
                if step.radius.is_nan() || step.radius <= 0.0 || !step.radius.is_finite() {
                    return Err(err(format!("radius must be positive, got '{value}'")));
                }
            }
            "norm" => {
                step.norm =
                    Norm::parse(value).ok_or_else(|| err(format!("unknown norm '{value}'")))?;
            }
            "protect" => step.protect = parse_list(value).map_err(&err)?,
            "mode" => {
                step.mode = match value {
                    "literal" => ProtectionMode::Literal,
                    "capacity" => ProtectionMode::Capacity,
                    _ => return Err(err(format!("unknown mode '{value}'"))),
                };
            }
            "plevels" => {
                step.plevels = Some(
                    value
                        .parse()
                        .map_err(|_| err(format!("bad plevels '{value}'")))?,
                );
            }
            "ranking" => step.ranking = parse_list(value).map_err(&err)?,
            "tap" => step.tap = Some(value.to_string()),
            _ => return Err(err(format!("unknown key '{key}'"))),
        }
    }
    Ok(step)
}

fn parse_list<T: std::str::FromStr>(value: &str) -> std::result::Result<Vec<T>, String> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| format!("bad list entry '{v}'"))
        })
        .collect()
}

fn validate_step(step: &Step, input: &CatdImage) -> std::result::Result<(), String> {
    let channels = input.channels();
    let kind = input.kind();
    let want_categorical = matches!(
        step.backend,
        Backend::Categorical | Backend::Nary | Backend::Set | Backend::Label
    );
    match (want_categorical, kind) {
        (true, PayloadKind::Categorical) | (false, PayloadKind::Dirichlet) => {}
        _ => {
            return Err(format!(
                "backend {} cannot process a {} payload",
                step.backend.name(),
                kind.name()
            ))
        }
    }
    if matches!(step.backend, Backend::Categorical | Backend::Nary) && step.category.is_none() {
        return Err(format!("backend {} needs category=", step.backend.name()));
    }
    if let Some(c) = step.category {
        if c >= channels {
            return Err(format!("category {c} out of range for {channels} channels"));
        }
    }
    for &k in step.subset.iter().chain(&step.protect) {
        if k >= channels {
            return Err(format!("channel {k} out of range for {channels} channels"));
        }
    }
    for &r in &step.ranking {
        if r as usize >= channels {
            return Err(format!("ranking entry {r} out of range"));
        }
    }
    if let (Some(c), false) = (step.category, step.protect.is_empty()) {
        if step.protect.contains(&c) {
            return Err(format!("category {c} cannot be protected and operated on"));
        }
    }
    if !step.protect.is_empty() && step.backend != Backend::Categorical {
        return Err("protection applies to the categorical backend only".to_string());
    }
    if step.backend == Backend::Set && channels > 64 {
        return Err("set backend supports at most 64 categories".to_string());
    }
    Ok(())
}

/// Apply one step, returning the result and the rebalancing drift the step
/// logged (zero for backends that do not rebalance).
pub fn apply_step(step: &Step, input: &CatdImage) -> Result<(CatdImage, f64)> {
    let rank = input.shape().len();
    let se = StructuringElement::ball(rank, step.radius, step.norm)?;
    match step.backend {
        Backend::Categorical => {
            let f = input.as_categorical()?;
            let i = step
                .category
                .ok_or_else(|| Error::Unsupported("category required".to_string()))?;
            let (out, drift) = if step.protect.is_empty() {
                match step.op {
                    OpKind::Dilate => categorical::dilate_i_logged(f, i, &se)?,
                    OpKind::Erode => categorical::erode_i_logged(f, i, &se)?,
                    OpKind::Open => categorical::open_i_logged(f, i, &se)?,
                    OpKind::Close => categorical::close_i_logged(f, i, &se)?,
                }
            } else {
                let mut spec = ProtectionSpec::new(&step.protect).mode(step.mode);
                if let Some(p) = step.plevels {
                    spec = spec.plevels(p);
                }
                match step.op {
                    OpKind::Dilate => protected::protected_dilate_logged(f, i, &se, &spec)?,
                    OpKind::Erode => protected::protected_erode_logged(f, i, &se, &spec)?,
                    OpKind::Open => protected::protected_open_logged(f, i, &se, &spec)?,
                    OpKind::Close => protected::protected_close_logged(f, i, &se, &spec)?,
                }
            };
            Ok((CatdImage::Categorical(out), drift))
        }
        Backend::Dirichlet => {
            let f = input.as_dirichlet()?;
            let out = match step.op {
                OpKind::Dilate => dirichlet::dilate(f, &se)?,
                OpKind::Erode => dirichlet::erode(f, &se)?,
                OpKind::Open => dirichlet::open(f, &se)?,
                OpKind::Close => dirichlet::close(f, &se)?,
            };
            Ok((CatdImage::Dirichlet(out), 0.0))
        }
        Backend::DirichletSubset => {
            let f = input.as_dirichlet()?;
            let s = &step.subset;
            let out = match step.op {
                OpKind::Dilate => dirichlet::dilate_subset(f, &se, s)?,
                OpKind::Erode => dirichlet::erode_subset(f, &se, s)?,
                OpKind::Open => dirichlet::open_subset(f, &se, s)?,
                OpKind::Close => dirichlet::close_subset(f, &se, s)?,
            };
            Ok((CatdImage::Dirichlet(out), 0.0))
        }
        Backend::Nary => {
            let f = input.as_categorical()?;
            let i = step
                .category
                .ok_or_else(|| Error::Unsupported("category required".to_string()))? as u32;
            let labels = f.argmax_labels();
            let ranking = (!step.ranking.is_empty()).then_some(step.ranking.as_slice());
            let out = match step.op {
                OpKind::Dilate => baselines::nary_dilate(&labels, i, &se)?,
                OpKind::Erode => baselines::nary_erode(&labels, i, &se, ranking)?,
                OpKind::Open => baselines::nary_dilate(
                    &baselines::nary_erode(&labels, i, &se, ranking)?,
                    i,
                    &se,
                )?,
                OpKind::Close => baselines::nary_erode(
                    &baselines::nary_dilate(&labels, i, &se)?,
                    i,
                    &se,
                    ranking,
                )?,
            };
            Ok((
                CatdImage::Categorical(CategoricalImage::one_hot(&out, f.channels())?),
                0.0,
            ))
        }
        Backend::Set => {
            let f = input.as_categorical()?;
            let sets = support_sets(f)?;
            let out = match step.op {
                OpKind::Dilate => baselines::set_dilate(&sets, &se)?,
                OpKind::Erode => baselines::set_erode(&sets, &se)?,
                OpKind::Open => baselines::set_dilate(&baselines::set_erode(&sets, &se)?, &se)?,
                OpKind::Close => baselines::set_erode(&baselines::set_dilate(&sets, &se)?, &se)?,
            };
            Ok((CatdImage::Categorical(sets_to_categorical(&out)), 0.0))
        }
        Backend::Label => {
            let f = input.as_categorical()?;
            let labels = f.argmax_labels();
            let out = match step.op {
                OpKind::Dilate => baselines::label_dilate(&labels, &se)?,
                OpKind::Erode => baselines::label_erode(&labels, &se)?,
                OpKind::Open => {
                    baselines::label_dilate(&baselines::label_erode(&labels, &se)?, &se)?
                }
                OpKind::Close => {
                    baselines::label_erode(&baselines::label_dilate(&labels, &se)?, &se)?
                }
            };
            Ok((
                CatdImage::Categorical(labels_to_categorical(&out, f.channels())),
                0.0,
            ))
        }
    }
}

/// Categories with probability at least one half become set members.
fn support_sets(f: &CategoricalImage) -> Result<SetImage> {
    if f.channels() > 64 {
        return Err(Error::TooManyCategories {
            categories: f.channels(),
        });
    }
    let data = (0..f.pixel_count())
        .map(|pixel| {
            f.pixel(pixel)
                .iter()
                .enumerate()
                .filter(|(_, &p)| p >= 0.5)
                .fold(0u64, |acc, (k, _)| acc | (1 << k))
        })
        .collect();
    Ok(SetImage::new(f.shape().to_vec(), f.channels(), data).unwrap())
}

/// Uniform distribution over set members; empty sets carry no information
/// and become uniform over everything.
fn sets_to_categorical(sets: &SetImage) -> CategoricalImage {
    let channels = sets.categories();
    let mut data = Vec::with_capacity(sets.pixel_count() * channels);
    for pixel in 0..sets.pixel_count() {
        let mask = sets.get(pixel);
        let count = mask.count_ones() as f64;
        for k in 0..channels {
            let p = if count == 0.0 {
                1.0 / channels as f64
            } else if mask & (1 << k) != 0 {
                1.0 / count
            } else {
                0.0
            };
            data.push(p);
        }
    }
    CategoricalImage::new(sets.shape().to_vec(), channels, data).unwrap()
}

/// One-hot for plain labels; sentinels become the uniform distribution.
fn labels_to_categorical(labels: &LabelImage, channels: usize) -> CategoricalImage {
    let mut data = Vec::with_capacity(labels.pixel_count() * channels);
    for &l in labels.data() {
        match l {
            Label::Cat(k) => {
                for c in 0..channels {
                    data.push(if c == k as usize { 1.0 } else { 0.0 });
                }
            }
            Label::Bottom | Label::Top => {
                data.extend(std::iter::repeat_n(1.0 / channels as f64, channels));
            }
        }
    }
    CategoricalImage::new(labels.shape().to_vec(), channels, data).unwrap()
}

#[derive(Debug, Clone)]
pub struct StepReport {
    pub index: usize,
    pub op: String,
    pub backend: String,
    pub renorm_drift: f64,
    pub millis: f64,
    pub tap: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub steps: Vec<StepReport>,
    pub final_path: PathBuf,
    pub log_path: PathBuf,
}

/// Run every step, writing tapped intermediates, `final.catd` and
/// `pipeline.log` into `outdir`. An empty pipeline writes the input
/// unchanged.
pub fn run_pipeline(
    spec: &PipelineSpec,
    input: &CatdImage,
    outdir: impl AsRef<Path>,
) -> Result<PipelineReport> {
    let outdir = outdir.as_ref();
    spec.validate_against(input)?;
    std::fs::create_dir_all(outdir)?;

    let mut current = input.clone();
    let mut reports = Vec::new();
    for (index, step) in spec.steps.iter().enumerate() {
        let t0 = Instant::now();
        let (next, drift) = apply_step(step, &current).map_err(|e| Error::PipelineStep {
            index,
            reason: e.to_string(),
        })?;
        let millis = t0.elapsed().as_secs_f64() * 1e3;
        current = next;
        let tap = match &step.tap {
            Some(name) => {
                check_payload(&current).map_err(|e| Error::PipelineStep {
                    index,
                    reason: e.to_string(),
                })?;
                let path = outdir.join(format!("{name}.catd"));
                write_catd(&current, &path)?;
                Some(path)
            }
            None => None,
        };
        reports.push(StepReport {
            index,
            op: step.op.name().to_string(),
            backend: step.backend.name().to_string(),
            renorm_drift: drift,
            millis,
            tap,
        });
    }

    check_payload(&current)?;
    let final_path = outdir.join("final.catd");
    write_catd(&current, &final_path)?;

    let log_path = outdir.join("pipeline.log");
    let mut log = String::from("step\top\tbackend\tdrift\tmillis\ttap\n");
    for r in &reports {
        let tap = r
            .tap
            .as_ref()
            .and_then(|p| p.file_name())
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "-".to_string());
        let _ = writeln!(
            log,
            "{}\t{}\t{}\t{:.3e}\t{:.3}\t{}",
            r.index, r.op, r.backend, r.renorm_drift, r.millis, tap
        );
    }
    std::fs::write(&log_path, log)?;

    Ok(PipelineReport {
        steps: reports,
        final_path,
        log_path,
    })
}

fn check_payload(img: &CatdImage) -> Result<()> {
    if let CatdImage::Categorical(c) = img {
        c.validate(crate::image::SIMPLEX_TOL)?;
    }
    Ok(())
}

/// Remove small blobs of one category by opening it.
pub fn denoise_recipe(category: usize, radius: f64, norm: Norm) -> PipelineSpec {
    let mut step = Step::new(OpKind::Open, Backend::Categorical);
    step.category = Some(category);
    step.radius = radius;
    step.norm = norm;
    PipelineSpec { steps: vec![step] }
}

/// Grow an inner class into everything but its protected surroundings, then
/// grow the surrounding class while keeping the background fixed.
pub fn annotator_bias_recipe(
    inner: usize,
    outer: usize,
    background: usize,
    radius: f64,
    norm: Norm,
) -> PipelineSpec {
    let mut first = Step::new(OpKind::Dilate, Backend::Categorical);
    first.category = Some(inner);
    first.protect = vec![outer, background];
    first.protect.sort_unstable();
    first.radius = radius;
    first.norm = norm;
    first.tap = Some("inner-grown".to_string());
    let mut second = Step::new(OpKind::Dilate, Backend::Categorical);
    second.category = Some(outer);
    second.protect = vec![background];
    second.radius = radius;
    second.norm = norm;
    PipelineSpec {
        steps: vec![first, second],
    }
}
