//! The `moran` command line: spec files, command dispatch and output files.
//!
//! Every command reads an IFS spec (JSON, rationals as `"p/q"` strings),
//! writes its results into `--out`, prints one summary line and records a
//! [`RunReport`]. Result files are byte-identical for identical inputs; the
//! run report also carries the wall time and is excluded from that promise.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::furstenberg;
use crate::geoset::{attractor_level, GeoSet};
use crate::ifs::{AxisBox, ContractionMap, IfsSystem, MoranConstruction, MoranReport, SeedSet};
use crate::measures::{self, MarkovMeasure};
use crate::microsets;
use crate::pressure;
use crate::rational::{format_rational, parse_rational, pow, to_f64, Q};
use crate::render;
use crate::separation::{self, GridSpec};
use crate::subshift::Subshift;
use crate::word::Word;

pub const TOOL_VERSION: &str = concat!("moran ", env!("CARGO_PKG_VERSION"));

/// On-disk description of a construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IfsSpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub dimension: usize,
    pub maps: Vec<MapSpec>,
    pub subshift: SubshiftSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<SeedSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum MapSpec {
    #[serde(rename = "homothety")]
    Homothety { r: String, a: String },
    #[serde(rename = "diag_affine")]
    DiagAffine { r: String, s: String, a: String, b: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubshiftSpec {
    pub alphabet: u8,
    #[serde(default)]
    pub forbidden: Vec<String>,
}

/// `{"lo": "0", "hi": "1"}` on the line, `{"lo": ["0", "0"], "hi": ["1", "1"]}`
/// for a rectangle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSpec {
    pub lo: Coords,
    pub hi: Coords,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coords {
    One(String),
    Many(Vec<String>),
}

impl Coords {
    fn strings(&self) -> Vec<&str> {
        match self {
            Coords::One(s) => vec![s.as_str()],
            Coords::Many(v) => v.iter().map(String::as_str).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum MeasureSpec {
    #[serde(rename = "bernoulli")]
    Bernoulli { probs: Vec<String> },
    #[serde(rename = "markov")]
    Markov { initial: Vec<String>, transition: Vec<Vec<String>> },
    #[serde(rename = "uniform_out")]
    UniformOut,
}

/// A validated spec.
#[derive(Clone, Debug)]
pub struct LoadedSpec {
    pub file: IfsSpecFile,
    pub construction: MoranConstruction,
    pub digest: String,
}

fn rational_field(field: &str, text: &str) -> Result<Q> {
    parse_rational(text).map_err(|_| Error::spec(field, format!("malformed rational {text:?}, expected \"p/q\"")))
}

fn ratio_field(field: &str, text: &str) -> Result<Q> {
    let r = rational_field(field, text)?;
    if r <= Q::zero() || r >= Q::one() {
        return Err(Error::spec(field, format!("ratio {text} is not in (0, 1)")));
    }
    Ok(r)
}

impl IfsSpecFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::spec("spec", e.to_string()))
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec serialises");
        s.push('\n');
        s
    }

    pub fn system(&self) -> Result<IfsSystem> {
        if !(1..=2).contains(&self.dimension) {
            return Err(Error::spec("dimension", "must be 1 or 2"));
        }
        let mut maps = Vec::with_capacity(self.maps.len());
        for (k, m) in self.maps.iter().enumerate() {
            let f = |name: &str| format!("maps[{k}].{name}");
            let map = match m {
                MapSpec::Homothety { r, a } => {
                    if self.dimension != 1 {
                        return Err(Error::spec(format!("maps[{k}].type"), "homothety needs dimension 1"));
                    }
                    ContractionMap::homothety(ratio_field(&f("r"), r)?, rational_field(&f("a"), a)?)
                }
                MapSpec::DiagAffine { r, s, a, b } => {
                    if self.dimension != 2 {
                        return Err(Error::spec(format!("maps[{k}].type"), "diag_affine needs dimension 2"));
                    }
                    ContractionMap::diagonal(
                        ratio_field(&f("r"), r)?,
                        ratio_field(&f("s"), s)?,
                        rational_field(&f("a"), a)?,
                        rational_field(&f("b"), b)?,
                    )
                }
            };
            maps.push(map.map_err(|e| Error::spec(format!("maps[{k}]"), e.to_string()))?);
        }
        IfsSystem::new(maps).map_err(|e| Error::spec("maps", e.to_string()))
    }

    pub fn subshift(&self) -> Result<Subshift> {
        let k = self.subshift.alphabet;
        if k as usize != self.maps.len() {
            return Err(Error::spec(
                "subshift.alphabet",
                format!("alphabet {k} does not match the {} maps", self.maps.len()),
            ));
        }
        let mut forbidden = Vec::with_capacity(self.subshift.forbidden.len());
        for (idx, text) in self.subshift.forbidden.iter().enumerate() {
            let w = Word::parse(k, text).map_err(|e| Error::spec(format!("subshift.forbidden[{idx}]"), e.to_string()))?;
            forbidden.push(w);
        }
        Subshift::new(k, forbidden).map_err(|e| Error::spec("subshift.forbidden", e.to_string()))
    }

    pub fn seed_set(&self) -> Result<Option<SeedSet>> {
        let Some(seed) = &self.seed else { return Ok(None) };
        let parse = |name: &str, c: &Coords| -> Result<Vec<Q>> {
            c.strings().iter().enumerate().map(|(i, s)| rational_field(&format!("seed.{name}[{i}]"), s)).collect()
        };
        let (lo, hi) = (parse("lo", &seed.lo)?, parse("hi", &seed.hi)?);
        if lo.len() != self.dimension || hi.len() != self.dimension {
            return Err(Error::spec("seed", format!("expected {} coordinates", self.dimension)));
        }
        AxisBox::new(lo, hi).map(Some).map_err(|e| Error::spec("seed", e.to_string()))
    }

    pub fn construction(&self) -> Result<MoranConstruction> {
        let system = self.system()?;
        let subshift = self.subshift()?;
        let seed = match self.seed_set()? {
            Some(seed) => {
                system.check_seed(&seed).map_err(|e| Error::spec("seed", e.to_string()))?;
                seed
            }
            None => system.seed_set(),
        };
        MoranConstruction::new(system, subshift, seed)
    }

    pub fn markov_measure(&self, subshift: &Subshift) -> Result<MarkovMeasure> {
        let probs = |field: &str, v: &[String]| -> Result<Vec<Q>> {
            v.iter().enumerate().map(|(i, s)| rational_field(&format!("{field}[{i}]"), s)).collect()
        };
        let wrap = |e: Error| Error::spec("measure", e.to_string());
        match self.measure.as_ref().unwrap_or(&MeasureSpec::UniformOut) {
            MeasureSpec::Bernoulli { probs: p } => {
                let p = probs("measure.probs", p)?;
                let rows = vec![p.clone(); p.len()];
                MarkovMeasure::new(subshift.clone(), p, rows).map_err(wrap)
            }
            MeasureSpec::Markov { initial, transition } => {
                let init = probs("measure.initial", initial)?;
                let rows = transition
                    .iter()
                    .enumerate()
                    .map(|(a, row)| probs(&format!("measure.transition[{a}]"), row))
                    .collect::<Result<Vec<_>>>()?;
                MarkovMeasure::new(subshift.clone(), init, rows).map_err(wrap)
            }
            MeasureSpec::UniformOut => MarkovMeasure::uniform_out(subshift.clone()).map_err(wrap),
        }
    }

    /// The canonical spec of a construction.
    pub fn from_construction(mc: &MoranConstruction, label: Option<String>) -> Self {
        let f = format_rational;
        let maps = mc
            .system()
            .maps()
            .iter()
            .map(|m| match m {
                ContractionMap::Homothety1D { r, a } => MapSpec::Homothety { r: f(r), a: f(a) },
                ContractionMap::DiagonalAffine2D { r, s, a, b } => {
                    MapSpec::DiagAffine { r: f(r), s: f(s), a: f(a), b: f(b) }
                }
            })
            .collect();
        let coords = |v: &[Q]| {
            if v.len() == 1 { Coords::One(f(&v[0])) } else { Coords::Many(v.iter().map(f).collect()) }
        };
        let seed = mc.seed();
        IfsSpecFile {
            label,
            dimension: mc.dimension(),
            maps,
            subshift: SubshiftSpec {
                alphabet: mc.alphabet(),
                forbidden: mc.subshift().forbidden().iter().map(|w| w.to_string()).collect(),
            },
            seed: Some(SeedSpec { lo: coords(&seed.lo), hi: coords(&seed.hi) }),
            measure: None,
            metadata: BTreeMap::new(),
        }
    }
}

/// Reads and validates a spec file.
pub fn load_spec(path: &Path) -> Result<LoadedSpec> {
    let bytes = fs::read(path)?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Error::spec("spec", "not UTF-8"))?;
    let file = IfsSpecFile::from_json(&text)?;
    let construction = file.construction()?;
    Ok(LoadedSpec { file, construction, digest: hex(&Sha256::digest(&bytes)) })
}

/// `(system, subshift, seed)` of a spec file.
pub fn parse_spec(path: &Path) -> Result<(IfsSystem, Subshift, SeedSet)> {
    let mc = load_spec(path)?.construction;
    Ok((mc.system().clone(), mc.subshift().clone(), mc.seed().clone()))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes through a temporary file in the same directory and renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Parser)]
#[command(name = "moran", version, about = "Moran constructions, pressure, microsets and separation checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// IFS spec file (JSON)
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Level, depth or path length; meaning depends on the command
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Bits of precision for decimal output fields (at most 53)
    #[arg(long, global = true, default_value_t = 53)]
    pub precision: u32,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Write only this format
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Tree-node budget for enumerations
    #[arg(long, global = true, default_value_t = crate::ifs::DEFAULT_NODE_BUDGET)]
    pub budget: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pressure curve at a finite level and the zero t*
    Pressure {
        #[arg(long, default_value_t = 40)]
        steps: usize,
    },
    /// Dimension report: t*, box-count slope, optional clustering scan
    Dim {
        #[arg(long)]
        scan: bool,
    },
    /// Moran axioms and a clustering scan
    CheckSep {
        /// Count distinct maps instead of words
        #[arg(long)]
        maps: bool,
        #[arg(long, default_value_t = 8)]
        steps: usize,
    },
    /// Exact deduplication of coinciding maps
    Dedup,
    /// Microset prefix sets at a depth
    Microsets,
    /// Assouad estimate from branching numbers
    Assouad,
    /// Symbolic and geometric local dimension of the spec's measure
    Localdim {
        #[arg(long, default_value_t = 64)]
        samples: usize,
        /// Number of radii in the geometric ladder
        #[arg(long, default_value_t = 12)]
        ladder: usize,
    },
    /// Exact and sampled entropy of the spec's measure
    Entropy {
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Magnification sequence and gap certificates for the three-map example
    FurstenbergDemo {
        #[arg(long, default_value_t = 5)]
        jmax: u32,
        /// Longest anchor word for candidate windows
        #[arg(long, default_value_t = 4)]
        anchor_len: usize,
    },
    /// SVG of the construction levels
    Render {
        /// Overlay the level-one gaps (1D only)
        #[arg(long)]
        gaps: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Pressure { .. } => "pressure",
            Command::Dim { .. } => "dim",
            Command::CheckSep { .. } => "check-sep",
            Command::Dedup => "dedup",
            Command::Microsets => "microsets",
            Command::Assouad => "assouad",
            Command::Localdim { .. } => "localdim",
            Command::Entropy { .. } => "entropy",
            Command::FurstenbergDemo { .. } => "furstenberg-demo",
            Command::Render { .. } => "render",
        }
    }

    fn formats(&self) -> &'static [Format] {
        match self {
            Command::Dim { .. } | Command::Entropy { .. } => &[Format::Json],
            Command::Render { .. } => &[Format::Svg],
            Command::FurstenbergDemo { .. } => &[Format::Csv, Format::Json, Format::Svg],
            _ => &[Format::Csv, Format::Json],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub tool_version: String,
    pub spec_digest: Option<String>,
    pub parameters: BTreeMap<String, String>,
    pub seed: u64,
    pub precision: u32,
    pub outputs: Vec<String>,
    pub summary: String,
    pub wall_time_ms: u128,
}

struct Ctx<'a> {
    cli: &'a Cli,
    outputs: Vec<String>,
    digits: usize,
}

impl Ctx<'_> {
    fn wants(&self, f: Format) -> bool {
        self.cli.format.is_none_or(|g| g == f)
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.cli.out.join(name);
        write_atomic(&path, contents.as_bytes())?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        if !self.wants(Format::Json) {
            return Ok(());
        }
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, &s)
    }

    fn write_csv(&mut self, name: &str, header: &str, rows: impl IntoIterator<Item = String>) -> Result<()> {
        if !self.wants(Format::Csv) {
            return Ok(());
        }
        let mut s = String::from(header);
        s.push('\n');
        for row in rows {
            s.push_str(&row);
            s.push('\n');
        }
        self.write(name, &s)
    }

    fn num(&self, x: f64) -> String {
        format!("{x:.*}", self.digits)
    }
}

fn require_spec(cli: &Cli) -> Result<LoadedSpec> {
    let path = cli.spec.as_ref().ok_or_else(|| Error::Argument("--spec is required".into()))?;
    load_spec(path)
}

fn report_json(r: &MoranReport) -> Value {
    let w = |x: &Option<Word>| x.as_ref().map(|w| w.to_string());
    json!({
        "depth": r.depth,
        "all_ok": r.all_ok(),
        "nesting_ok": r.nesting_ok,
        "nesting_witness": w(&r.nesting_witness),
        "d_squared": format_rational(&r.d_squared),
        "m3_max_ratio_squared": format_rational(&r.m3_max_ratio_squared),
        "m3_ok": r.m3_ok,
        "m3_witness": w(&r.m3_witness),
        "alpha_underline": format_rational(&r.alpha_underline),
        "m4_min_ratio_squared": r.m4_min_ratio_squared.as_ref().map(format_rational),
        "m4_ok": r.m4_ok,
        "m4_witness": w(&r.m4_witness),
        "alpha_bar": format_rational(&r.alpha_bar),
        "c_squared": format_rational(&r.c_constant),
        "decay_ok": r.decay_ok,
        "decay_witness": w(&r.decay_witness),
    })
}

/// Runs a parsed command line and returns its report.
pub fn run(cli: &Cli) -> Result<RunReport> {
    let start = Instant::now();
    if cli.precision == 0 || cli.precision > 53 {
        return Err(Error::Argument(format!(
            "--precision {} is unsupported: decimal output is derived from f64 (1 to 53 bits)",
            cli.precision
        )));
    }
    if let Some(f) = cli.format {
        if !cli.command.formats().contains(&f) {
            return Err(Error::Argument(format!("{} does not produce {f:?} output", cli.command.name())));
        }
    }
    if let Some(tol) = cli.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Argument("--tol must be positive".into()));
        }
    }
    fs::create_dir_all(&cli.out)?;
    let digits = (cli.precision as f64 * std::f64::consts::LOG10_2).ceil() as usize;
    let mut ctx = Ctx { cli, outputs: Vec::new(), digits };
    let mut params = BTreeMap::new();
    let mut spec_digest = None;
    let summary = dispatch(&mut ctx, &mut params, &mut spec_digest)?;
    if let Some(d) = cli.depth {
        params.insert("depth".into(), d.to_string());
    }
    if let Some(t) = cli.tol {
        params.insert("tol".into(), format!("{t:e}"));
    }
    params.insert("budget".into(), cli.budget.to_string());
    let report = RunReport {
        command: cli.command.name().to_string(),
        tool_version: TOOL_VERSION.to_string(),
        spec_digest,
        parameters: params,
        seed: cli.seed,
        precision: cli.precision,
        outputs: ctx.outputs.clone(),
        summary,
        wall_time_ms: start.elapsed().as_millis(),
    };
    let mut s = serde_json::to_string_pretty(&report)?;
    s.push('\n');
    write_atomic(&cli.out.join(format!("{}.run.json", report.command)), s.as_bytes())?;
    Ok(report)
}

fn dispatch(ctx: &mut Ctx, params: &mut BTreeMap<String, String>, digest: &mut Option<String>) -> Result<String> {
    let cli = ctx.cli;
    let tol = cli.tol.unwrap_or(1e-10);
    let mut spec = || -> Result<LoadedSpec> {
        let mut s = require_spec(cli)?;
        s.construction = s.construction.with_node_budget(cli.budget);
        *digest = Some(s.digest.clone());
        Ok(s)
    };
    match &cli.command {
        Command::Pressure { steps } => {
            let mc = spec()?.construction;
            let n = cli.depth.unwrap_or(10);
            params.insert("steps".into(), steps.to_string());
            let root = pressure::pressure_zero(&mc, tol)?;
            let t_max = (2.0 * root.t_star).max(1.0);
            let ts: Vec<f64> = (0..=*steps).map(|k| t_max * k as f64 / (*steps).max(1) as f64).collect();
            let finite = pressure::level_sums(&mc, &ts, n)?;
            let ratios = mc.system().similarity_ratios();
            let spectral = ts
                .iter()
                .map(|&t| ratios.as_ref().map(|r| pressure::pressure_spectral(mc.subshift(), r, t)).transpose())
                .collect::<Result<Vec<_>>>()?;
            let rows: Vec<String> = ts
                .iter()
                .zip(&finite)
                .zip(&spectral)
                .map(|((t, p), s)| {
                    format!("{},{},{}", ctx.num(*t), ctx.num(*p), s.map(|s| ctx.num(s)).unwrap_or_default())
                })
                .collect();
            ctx.write_csv("pressure.csv", "t,finite_level,spectral", rows)?;
            let curve: Vec<Value> = ts
                .iter()
                .zip(&finite)
                .zip(&spectral)
                .map(|((t, p), s)| json!({"t": t, "finite_level": p, "spectral": s}))
                .collect();
            ctx.write_json("pressure.json", &json!({"level": n, "root": root, "curve": curve}))?;
            Ok(format!(
                "pressure: t* = {} ({}, bracket [{}, {}])",
                ctx.num(root.t_star),
                root.method.name(),
                ctx.num(root.bracket_lo),
                ctx.num(root.bracket_hi)
            ))
        }
        Command::Dim { scan } => {
            let mc = spec()?.construction;
            let depth = cli.depth.unwrap_or(8);
            params.insert("scan".into(), scan.to_string());
            let evidence = if *scan { Some(separation::fcp_scan(&mc, &default_grid(&mc, depth.min(5), 6, false))?) } else { None };
            let report = pressure::dimension_report(&mc, evidence.as_ref(), tol, Some(depth))?;
            ctx.write_json("dim.json", &report)?;
            Ok(format!("dim: t* = {} ({})", ctx.num(report.root.t_star), report.root.method.name()))
        }
        Command::CheckSep { maps, steps } => {
            let mc = spec()?.construction;
            let depth = cli.depth.unwrap_or(5);
            params.insert("maps".into(), maps.to_string());
            params.insert("steps".into(), steps.to_string());
            let axioms = mc.verify_moran_axioms(depth)?;
            let scan = separation::fcp_scan(&mc, &default_grid(&mc, depth, *steps, *maps))?;
            let bound = separation::disjoint_projection_bound(mc.system());
            let rows: Vec<String> = scan
                .samples
                .iter()
                .map(|s| format!("{},{},{}", s.x.join(" "), s.r, s.count))
                .collect();
            ctx.write_csv("check-sep.csv", "x,r,count", rows)?;
            ctx.write_json(
                "check-sep.json",
                &json!({
                    "axioms": report_json(&axioms),
                    "scan": scan,
                    "disjoint_projection_bound": bound.map(|(m, b)| json!({"m": m, "bound": b})),
                }),
            )?;
            Ok(format!(
                "check-sep: axioms {}, max cluster {} ({})",
                if axioms.all_ok() { "ok" } else { "violated" },
                scan.max,
                if scan.stabilized { "stable" } else { "still growing" }
            ))
        }
        Command::Dedup => {
            let mc = spec()?.construction;
            let depth = cli.depth.unwrap_or(8);
            let result = separation::dedup(mc.system(), depth, mc.node_budget());
            let (levels, forbidden) = match &result {
                Ok(r) => (r.levels.clone(), Some(r.forbidden.iter().map(|w| w.to_string()).collect::<Vec<_>>())),
                Err(Error::DedupBudget { completed, .. }) => (completed.clone(), None),
                Err(_) => (Vec::new(), None),
            };
            if let Ok(_) | Err(Error::DedupBudget { .. }) = &result {
                let rows: Vec<String> = levels
                    .iter()
                    .map(|l| format!("{},{},{},{}", l.length, l.allowed, l.distinct_maps, l.forbidden_added))
                    .collect();
                ctx.write_csv("dedup.csv", "length,allowed,distinct_maps,forbidden_added", rows)?;
            }
            let r = result?;
            ctx.write_json("dedup.json", &json!({"depth": depth, "levels": levels, "forbidden": forbidden}))?;
            let counts: Vec<String> = r.level_counts().iter().map(u64::to_string).collect();
            Ok(format!("dedup: #Γ_n = {}", counts.join(", ")))
        }
        Command::Microsets => {
            let mc = spec()?.construction;
            let n = cli.depth.unwrap_or(4);
            let fam = microsets::microset_family(mc.subshift(), n)?;
            let members: Vec<Value> = fam
                .members
                .iter()
                .map(|m| {
                    json!({
                        "size": m.size(),
                        "leaves": m.tree.leaves().iter().map(Word::to_string).collect::<Vec<_>>(),
                        "provenance": m.provenance.iter().map(Word::to_string).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let rows: Vec<String> = fam
                .members
                .iter()
                .enumerate()
                .map(|(k, m)| {
                    let prov: Vec<String> = m.provenance.iter().map(|w| format!("\"{w}\"")).collect();
                    format!("{k},{},{}", m.size(), prov.join(" "))
                })
                .collect();
            ctx.write_csv("microsets.csv", "member,size,provenance", rows)?;
            ctx.write_json("microsets.json", &json!({"depth": n, "complete": fam.complete, "members": members}))?;
            Ok(format!("microsets: {} prefix sets at depth {n}, N_{n} = {}", fam.len(), fam.max_size()))
        }
        Command::Assouad => {
            let mc = spec()?.construction;
            let n_max = cli.depth.unwrap_or(16);
            let est = microsets::assouad_estimate(&mc, n_max)?;
            let dq: BTreeMap<usize, f64> = est.difference_quotients.iter().cloned().collect();
            let rows: Vec<String> = est
                .rows
                .iter()
                .map(|(n, c, t)| {
                    format!("{n},{c},{},{}", ctx.num(*t), dq.get(n).map(|d| ctx.num(*d)).unwrap_or_default())
                })
                .collect();
            ctx.write_csv("assouad.csv", "n,N_n,t_n,difference_quotient", rows)?;
            ctx.write_json("assouad.json", &est)?;
            Ok(format!("assouad: estimate {} (Fekete bound {})", ctx.num(est.estimate), ctx.num(est.fekete_bound)))
        }
        Command::Localdim { samples, ladder } => {
            let s = spec()?;
            let mc = s.construction;
            let mu = s.file.markov_measure(mc.subshift())?;
            let n = cli.depth.unwrap_or(10_000);
            params.insert("samples".into(), samples.to_string());
            params.insert("ladder".into(), ladder.to_string());
            let stats = measures::local_dim_symbolic(&mu, &mc, n, *samples, cli.seed)?;
            let rows: Vec<String> = stats
                .samples
                .iter()
                .map(|p| format!("{},{n},{},{},{}", p.index, ctx.num(p.quotient), ctx.num(p.tail_min), ctx.num(p.tail_slope)))
                .collect();
            ctx.write_csv("localdim.csv", "sample,n,quotient,tail_min,tail_slope", rows)?;
            // geometric ladder at one sampled point, radii ᾱ^k
            let alpha = mc.system().alpha_bar();
            let x = measures::sample_point(&mu, &mc, 4 * ladder + 16, &mut measures::sample_rng(cli.seed, u64::MAX))?;
            let radii: Vec<Q> = (1..=*ladder).map(|k| pow(&alpha, k)).collect();
            let geometric = measures::local_dim_geometric(&mu, &mc, &x, &radii, &pow(&alpha, ladder + 4))?;
            ctx.write_json(
                "localdim.json",
                &json!({
                    "n": n,
                    "seed": cli.seed,
                    "samples": samples,
                    "mean": stats.mean,
                    "standard_error": stats.standard_error,
                    "min": stats.min,
                    "max": stats.max,
                    "geometric": {
                        "point": x.coords().iter().map(format_rational).collect::<Vec<_>>(),
                        "point_approx": x.to_f64(),
                        "ladder": geometric,
                    },
                }),
            )?;
            Ok(format!(
                "localdim: mean quotient {} ± {} over {samples} paths at n = {n}",
                ctx.num(stats.mean),
                ctx.num(stats.standard_error)
            ))
        }
        Command::Entropy { samples } => {
            let s = spec()?;
            let mu = s.file.markov_measure(s.construction.subshift())?;
            let n = cli.depth.unwrap_or(1000);
            params.insert("samples".into(), samples.to_string());
            let (exact, note) = match measures::entropy_exact(&mu) {
                Ok(h) => (Some(h), None),
                Err(Error::NotIrreducible) => (None, Some("transition structure is not irreducible")),
                Err(e) => return Err(e),
            };
            let empirical = measures::entropy_empirical(&mu, n, *samples, cli.seed)?;
            ctx.write_json("entropy.json", &json!({"exact": exact, "note": note, "empirical": empirical}))?;
            Ok(format!(
                "entropy: exact {} empirical {} ± {}",
                exact.map(|h| ctx.num(h)).unwrap_or_else(|| "n/a".into()),
                ctx.num(empirical.mean),
                ctx.num(empirical.standard_error)
            ))
        }
        Command::FurstenbergDemo { jmax, anchor_len } => {
            let depth = cli.depth.unwrap_or(14);
            params.insert("jmax".into(), jmax.to_string());
            params.insert("anchor_len".into(), anchor_len.to_string());
            let report = furstenberg::furstenberg_demo(depth, *jmax, *anchor_len)?;
            let mut verified = 0usize;
            for cert in &report.certificates {
                if furstenberg::verify_certificate(cert)? {
                    verified += 1;
                }
            }
            let rows: Vec<String> = report
                .convergence
                .iter()
                .map(|r| format!("{},{},{},{},{},{},{}", r.j, r.m, r.n, r.u, r.v, r.distance, ctx.num(r.distance_approx)))
                .collect();
            ctx.write_csv("furstenberg-convergence.csv", "j,m,n,u,v,distance,distance_approx", rows)?;
            ctx.write_json(
                "furstenberg-certificates.json",
                &json!({
                    "windows": report.windows,
                    "certified": report.certificates.len(),
                    "verified": verified,
                    "gap": report.gap,
                    "eta": report.eta,
                    "sequence": report.sequence,
                    "sandwich": report.sandwich,
                    "certificates": report.certificates,
                    "undecided": report.undecided,
                }),
            )?;
            if ctx.wants(Format::Svg) {
                let e = attractor_level(&furstenberg::example_maps(), &GeoSet::unit(), depth.min(7))?;
                let k = furstenberg::doubled(&e)?;
                let mut sets = Vec::new();
                for row in &report.convergence {
                    let (u, v) = furstenberg::window(row.m)?;
                    sets.push((format!("A_{}", row.j), e.magnify(&u, &v)?));
                }
                let labelled: Vec<(String, &GeoSet)> = sets.iter().map(|(l, s)| (l.clone(), s)).collect();
                ctx.write("furstenberg.svg", &render::render_magnifications(&labelled, &k))?;
            }
            let last = report.convergence.last().map(|r| r.distance_approx).unwrap_or(f64::NAN);
            Ok(format!(
                "furstenberg-demo: gap ({}, {}), D(A_{jmax}, K) = {}, {}/{} windows certified, {verified} verified",
                report.gap.0,
                report.gap.1,
                ctx.num(last),
                report.certificates.len(),
                report.windows
            ))
        }
        Command::Render { gaps } => {
            let mc = spec()?.construction;
            let depth = cli.depth.unwrap_or(6);
            params.insert("gaps".into(), gaps.to_string());
            let svg = if mc.dimension() == 1 {
                let overlay = if *gaps { level_gaps(&mc, 1)? } else { Vec::new() };
                render::render_1d(&mc, depth, &overlay)?
            } else {
                render::render_2d(&mc, depth)?
            };
            ctx.write("render.svg", &svg)?;
            Ok(format!("render: depth {depth} written"))
        }
    }
}

/// Gaps of the union of level-`n` cells inside the seed interval.
pub fn level_gaps(mc: &MoranConstruction, n: usize) -> Result<Vec<(f64, f64)>> {
    let mut cells: Vec<(Q, Q)> = mc.level(n)?.into_iter().map(|(_, c)| (c.lo[0].clone(), c.hi[0].clone())).collect();
    cells.sort();
    let mut gaps = Vec::new();
    let mut reach = cells.first().map(|c| c.1.clone());
    for (lo, hi) in cells.into_iter().skip(1) {
        let r = reach.take().expect("set above");
        if lo > r {
            gaps.push((to_f64(&r), to_f64(&lo)));
        }
        reach = Some(if hi > r { hi } else { r });
    }
    Ok(gaps)
}

/// Sample points at the cell midpoints of `Γ_depth`; radii `diam(W)/2 · (1/2)^k`.
fn default_grid(mc: &MoranConstruction, depth: usize, steps: usize, count_maps: bool) -> GridSpec {
    let widths = mc.seed().widths();
    let rho = widths.iter().max().cloned().unwrap_or_else(Q::one) / Q::from_integer(2.into());
    GridSpec {
        sample_depth: depth,
        extra_points: Vec::new(),
        rho,
        gamma: Q::new(1.into(), 2.into()),
        steps,
        count_maps,
    }
}

/// Entry point used by the binary: runs, prints the summary line, and maps
/// errors to a JSON line on stderr plus the exit code.
pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(report) => {
            println!("{}", report.summary);
            0
        }
        Err(e) => {
            eprintln!("{}", json!({"error": e.code_name(), "exit_code": e.exit_code(), "message": e.to_string()}));
            e.exit_code()
        }
    }
}
