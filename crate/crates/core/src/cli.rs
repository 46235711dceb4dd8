//! Run configuration, presets, orchestration and output formats.
//!
//! Configuration files are line oriented:
//!
//! ```text
//! # Coulomb plus linear confinement
//! problem.kind = fv0
//! problem.l = 0
//! potential.vector = coulomb -1
//! potential.direct = linear 1
//! basis.n = 60
//! basis.b = 0.5
//! search.e_min = 0
//! search.e_max = 7.5
//! numerics.cf_depth = 1000
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::csbasis::BasisSpec;
use crate::error::{FvError, Result};
use crate::fvcore::{ChannelSpace, FvProblem, Kind, Numerics};
use crate::potentials::{
    format_terms, parse_terms, split, PhysicalSystem, PotentialModel, PotentialTerm,
};
use crate::solver::{converge, find_bound_states, find_resonance, SearchWindow, SpectralResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default number of grid points in a search window.
pub const DEFAULT_GRID_POINTS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angular {
    L(u32),
    J(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Search {
    Window {
        e_min: f64,
        e_max: f64,
        grid_points: usize,
    },
    Guess(Complex64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
    Csv,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "table" => Some(Format::Table),
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Format::Table => "table",
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub system: PhysicalSystem,
    pub kind: Kind,
    pub angular: Angular,
    pub vector: Vec<PotentialTerm>,
    pub scalar: Vec<PotentialTerm>,
    /// Terms added to `U` as given.
    pub direct: Vec<PotentialTerm>,
    pub n_max: usize,
    pub b: f64,
    pub theta: f64,
    /// Basis sizes and scales for `converge`.
    pub n_list: Vec<usize>,
    pub b_list: Vec<f64>,
    pub search: Search,
    /// Report at most this many of the lowest levels.
    pub levels: Option<usize>,
    pub numerics: Numerics,
    pub format: Format,
    pub path: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "system.mass",
    "system.c",
    "problem.kind",
    "problem.l",
    "problem.j",
    "potential.vector",
    "potential.scalar",
    "potential.direct",
    "basis.n",
    "basis.b",
    "basis.theta",
    "basis.n_list",
    "basis.b_list",
    "search.e_min",
    "search.e_max",
    "search.grid_points",
    "search.guess",
    "search.levels",
    "numerics.cf_tol",
    "numerics.cf_max_depth",
    "numerics.cf_depth",
    "numerics.refine_tol",
    "numerics.quadrature_factor",
    "output.format",
    "output.path",
];

fn value_error(key: &str, message: impl Into<String>) -> FvError {
    FvError::ConfigValue {
        key: key.to_string(),
        message: message.into(),
    }
}

struct Entries<'a> {
    map: HashMap<&'a str, (usize, &'a str)>,
}

impl<'a> Entries<'a> {
    fn get(&self, key: &str) -> Option<&'a str> {
        self.map.get(key).map(|(_, v)| *v)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| value_error(key, format!("cannot parse `{v}`"))),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>> {
        match self.get(key) {
            None => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<T>()
                        .map_err(|_| value_error(key, format!("cannot parse list item `{s}`")))
                })
                .collect(),
        }
    }

    fn terms(&self, key: &str, base_dir: Option<&Path>) -> Result<Vec<PotentialTerm>> {
        match self.get(key) {
            None => Ok(Vec::new()),
            Some(v) => parse_terms(v, base_dir).map_err(|e| value_error(key, e.to_string())),
        }
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_in(text, None)
}

/// Like [`parse_config`]; relative table paths resolve against `base_dir`.
pub fn parse_config_in(text: &str, base_dir: Option<&Path>) -> Result<RunConfig> {
    let mut map = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(FvError::ConfigSyntax {
                line: line_no,
                message: format!("expected `section.key = value`, got `{line}`"),
            });
        };
        let key = key.trim();
        if !key.contains('.') {
            return Err(FvError::ConfigSyntax {
                line: line_no,
                message: format!("key `{key}` has no section"),
            });
        }
        if !KEYS.contains(&key) {
            return Err(value_error(key, "unknown key"));
        }
        if map.insert(key, (line_no, value.trim())).is_some() {
            return Err(value_error(key, "given twice"));
        }
    }
    let e = Entries { map };

    let mut system = PhysicalSystem::default();
    if let Some(m) = e.parse::<f64>("system.mass")? {
        system.mass = m;
    }
    if let Some(c) = e.parse::<f64>("system.c")? {
        system.c = c;
    }
    if !(system.mass > 0.0 && system.mass.is_finite()) {
        return Err(value_error("system.mass", "must be positive"));
    }
    if !(system.c > 0.0 && system.c.is_finite()) {
        return Err(value_error("system.c", "must be positive"));
    }

    let kind = match e.get("problem.kind") {
        None => Kind::Schrodinger,
        Some(k) => Kind::parse(k)
            .ok_or_else(|| value_error("problem.kind", format!("unknown kind `{k}`")))?,
    };
    let l = e.parse::<u32>("problem.l")?;
    let j = e.parse::<f64>("problem.j")?;
    let angular = match (kind, l, j) {
        (Kind::Fv12, Some(_), _) => {
            return Err(value_error("problem.l", "fv12 takes problem.j"));
        }
        (Kind::Fv12, None, j) => {
            let j = j.unwrap_or(0.5);
            ChannelSpace::fv12(j).map_err(|e| value_error("problem.j", e.to_string()))?;
            Angular::J(j)
        }
        (_, _, Some(_)) => {
            return Err(value_error("problem.j", "only fv12 takes problem.j"));
        }
        (_, l, None) => Angular::L(l.unwrap_or(0)),
    };

    let vector = e.terms("potential.vector", base_dir)?;
    let scalar = e.terms("potential.scalar", base_dir)?;
    let direct = e.terms("potential.direct", base_dir)?;

    let n_max = e.parse::<usize>("basis.n")?.unwrap_or(60);
    let b = e.parse::<f64>("basis.b")?.unwrap_or(0.5);
    let theta = e.parse::<f64>("basis.theta")?.unwrap_or(0.0);
    BasisSpec::rotated(0, b, n_max, theta).map_err(|err| {
        let key = if b > 0.0 && b.is_finite() {
            "basis.theta"
        } else {
            "basis.b"
        };
        value_error(key, err.to_string())
    })?;
    let n_list = e.list::<usize>("basis.n_list")?;
    let b_list = e.list::<f64>("basis.b_list")?;
    if b_list.iter().any(|&x| !(x > 0.0)) {
        return Err(value_error("basis.b_list", "scales must be positive"));
    }

    let mut numerics = Numerics::default();
    if let Some(v) = e.parse::<f64>("numerics.cf_tol")? {
        numerics.cf_tol = v;
    }
    if let Some(v) = e.parse::<usize>("numerics.cf_max_depth")? {
        numerics.cf_max_depth = v;
    }
    if let Some(v) = e.parse::<f64>("numerics.refine_tol")? {
        numerics.refine_tol = v;
    }
    if let Some(v) = e.parse::<usize>("numerics.quadrature_factor")? {
        numerics.quadrature_factor = v;
    }
    numerics.depth = match e.get("numerics.cf_depth") {
        None | Some("auto") => None,
        Some(_) => e.parse::<usize>("numerics.cf_depth")?,
    };
    for (key, ok) in [
        ("numerics.cf_tol", numerics.cf_tol > 0.0),
        ("numerics.refine_tol", numerics.refine_tol > 0.0),
        ("numerics.quadrature_factor", numerics.quadrature_factor > 0),
        ("numerics.cf_max_depth", numerics.cf_max_depth > 0),
    ] {
        if !ok {
            return Err(value_error(key, "must be positive"));
        }
    }

    let e_min = e.parse::<f64>("search.e_min")?;
    let e_max = e.parse::<f64>("search.e_max")?;
    let grid_points = e.parse::<usize>("search.grid_points")?;
    let guess =
        match e.get("search.guess") {
            None => None,
            Some(v) => Some(parse_complex(v).ok_or_else(|| {
                value_error("search.guess", format!("expected `re im`, got `{v}`"))
            })?),
        };
    let search = match (e_min, e_max, guess) {
        (Some(lo), Some(hi), None) => {
            let n = grid_points.unwrap_or(DEFAULT_GRID_POINTS);
            SearchWindow::new(lo, hi, n, numerics.refine_tol)
                .map_err(|err| value_error("search.e_min", err.to_string()))?;
            Search::Window {
                e_min: lo,
                e_max: hi,
                grid_points: n,
            }
        }
        (None, None, Some(z)) => {
            if grid_points.is_some() {
                return Err(value_error(
                    "search.grid_points",
                    "not used with search.guess",
                ));
            }
            if z.im > 0.0 {
                return Err(value_error("search.guess", "imaginary part must be <= 0"));
            }
            Search::Guess(z)
        }
        (Some(_), None, _) | (None, Some(_), _) => {
            return Err(value_error(
                "search",
                "give both search.e_min and search.e_max",
            ));
        }
        (Some(_), Some(_), Some(_)) => {
            return Err(value_error("search", "give a window or a guess, not both"));
        }
        (None, None, None) => {
            return Err(value_error(
                "search",
                "missing window (e_min, e_max) or guess",
            ));
        }
    };
    let levels = e.parse::<usize>("search.levels")?;

    let format = match e.get("output.format") {
        None => Format::Table,
        Some(f) => Format::parse(f)
            .ok_or_else(|| value_error("output.format", format!("unknown format `{f}`")))?,
    };
    let path = e
        .get("output.path")
        .filter(|p| !p.is_empty())
        .map(PathBuf::from);

    Ok(RunConfig {
        system,
        kind,
        angular,
        vector,
        scalar,
        direct,
        n_max,
        b,
        theta,
        n_list,
        b_list,
        search,
        levels,
        numerics,
        format,
        path,
    })
}

/// `re im`, e.g. `15.6 -1e-5`.
fn parse_complex(s: &str) -> Option<Complex64> {
    let mut it = s.split_whitespace();
    let re = it.next()?.parse().ok()?;
    let im = it.next().map(str::parse).unwrap_or(Ok(0.0)).ok()?;
    if it.next().is_some() {
        return None;
    }
    Some(Complex64::new(re, im))
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

impl RunConfig {
    /// Canonical config text; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("system.mass", self.system.mass.to_string());
        line("system.c", self.system.c.to_string());
        line("problem.kind", self.kind.name().to_string());
        match self.angular {
            Angular::L(l) => line("problem.l", l.to_string()),
            Angular::J(j) => line("problem.j", j.to_string()),
        }
        line("potential.vector", format_terms(&self.vector));
        line("potential.scalar", format_terms(&self.scalar));
        line("potential.direct", format_terms(&self.direct));
        line("basis.n", self.n_max.to_string());
        line("basis.b", self.b.to_string());
        line("basis.theta", self.theta.to_string());
        if !self.n_list.is_empty() {
            line("basis.n_list", join(&self.n_list));
        }
        if !self.b_list.is_empty() {
            line("basis.b_list", join(&self.b_list));
        }
        match self.search {
            Search::Window {
                e_min,
                e_max,
                grid_points,
            } => {
                line("search.e_min", e_min.to_string());
                line("search.e_max", e_max.to_string());
                line("search.grid_points", grid_points.to_string());
            }
            Search::Guess(z) => line("search.guess", format!("{} {}", z.re, z.im)),
        }
        if let Some(n) = self.levels {
            line("search.levels", n.to_string());
        }
        let n = &self.numerics;
        line("numerics.cf_tol", n.cf_tol.to_string());
        line("numerics.cf_max_depth", n.cf_max_depth.to_string());
        line(
            "numerics.cf_depth",
            n.depth.map_or("auto".to_string(), |d| d.to_string()),
        );
        line("numerics.refine_tol", n.refine_tol.to_string());
        line(
            "numerics.quadrature_factor",
            n.quadrature_factor.to_string(),
        );
        line("output.format", self.format.name().to_string());
        if let Some(p) = &self.path {
            line("output.path", p.display().to_string());
        }
        out
    }

    pub fn model(&self) -> PotentialModel {
        PotentialModel::new(
            self.vector.clone(),
            self.scalar.clone(),
            self.direct.clone(),
        )
    }

    pub fn channel(&self) -> Result<ChannelSpace> {
        Ok(match (self.kind, self.angular) {
            (Kind::Schrodinger, Angular::L(l)) => ChannelSpace::Schrodinger { l },
            (Kind::Fv0, Angular::L(l)) => ChannelSpace::Fv0 { l },
            (Kind::Fv12, Angular::J(j)) => ChannelSpace::fv12(j)?,
            _ => {
                return Err(FvError::Precondition(format!(
                    "{} with {:?}",
                    self.kind.name(),
                    self.angular
                )))
            }
        })
    }

    pub fn problem(&self) -> Result<FvProblem> {
        self.problem_for(self.channel()?)
    }

    fn problem_for(&self, channel: ChannelSpace) -> Result<FvProblem> {
        let l = channel.ls()[0];
        FvProblem::new(
            self.system,
            channel,
            split(&self.model(), &self.system),
            BasisSpec::rotated(l, self.b, self.n_max, self.theta)?,
            self.numerics,
        )
    }

    pub fn window(&self) -> Result<SearchWindow> {
        match self.search {
            Search::Window {
                e_min,
                e_max,
                grid_points,
            } => SearchWindow::new(e_min, e_max, grid_points, self.numerics.refine_tol),
            Search::Guess(_) => Err(FvError::Precondition(
                "this command needs a search window, not a guess".into(),
            )),
        }
    }

    pub fn guess(&self) -> Result<Complex64> {
        match self.search {
            Search::Guess(z) => Ok(z),
            Search::Window { .. } => {
                Err(FvError::Precondition("resonance needs search.guess".into()))
            }
        }
    }

    /// Column label such as `FV0 (l=0)` or `FV1/2 (j=1/2)`.
    pub fn label(&self) -> String {
        let name = kind_label(self.kind);
        match self.angular {
            Angular::L(l) => format!("{name} (l={l})"),
            Angular::J(j) => format!("{name} (j={})", half_integer(j)),
        }
    }
}

fn kind_label(kind: Kind) -> &'static str {
    match kind {
        Kind::Schrodinger => "Schr",
        Kind::Fv0 => "FV0",
        Kind::Fv12 => "FV1/2",
    }
}

fn half_integer(j: f64) -> String {
    format!("{}/2", (2.0 * j).round() as i64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyPair {
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisRecord {
    #[serde(rename = "N")]
    pub n: usize,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub label: String,
    pub energy: EnergyPair,
    pub kind: String,
    pub determinant_residual: f64,
    pub basis: BasisRecord,
    pub cf_depth: usize,
    pub channels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominant_l: Option<u32>,
    pub multiplicity: usize,
    /// Canonical text of the configuration that produced the record.
    pub config: String,
    /// Seconds; only filled in on request so that output stays reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
    pub version: String,
}

impl ResultRecord {
    pub fn new(label: &str, result: &SpectralResult, config: &RunConfig) -> Self {
        Self {
            label: label.to_string(),
            energy: EnergyPair {
                re: result.energy.re,
                im: result.energy.im,
            },
            kind: result.kind.name().to_string(),
            determinant_residual: result.determinant_residual,
            basis: BasisRecord {
                n: result.n_max,
                b: result.b,
            },
            cf_depth: result.cf_depth,
            channels: result.channels.clone(),
            dominant_l: result.dominant_l,
            multiplicity: result.multiplicity,
            config: config.to_text(),
            wall_time: None,
            version: VERSION.to_string(),
        }
    }

    pub fn energy(&self) -> Complex64 {
        Complex64::new(self.energy.re, self.energy.im)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Table1,
    Table2,
    Table3,
}

impl Preset {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "table1" => Some(Preset::Table1),
            "table2" => Some(Preset::Table2),
            "table3" => Some(Preset::Table3),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Resonance,
    Converge,
    Compare,
    Preset(Preset),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// `solve` exits with status 1 when nothing is found.
    pub require_roots: bool,
    /// Record wall time in each record.
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub records: Vec<ResultRecord>,
    /// Process exit status: 0 success, 1 no roots under `require_roots`.
    pub status: i32,
    /// Extra human-readable lines (convergence verdicts).
    pub notes: Vec<String>,
}

/// Exit status for a failed run.
pub const EXIT_FAILURE: i32 = 2;

const TABLE1: &str = "\
potential.vector = coulomb 92, screened -240 1, screened 320 4
basis.n = 100
basis.b = 4
search.e_min = -10
search.e_max = -1
search.grid_points = 91
numerics.cf_depth = 400
";

const TABLE1_GUESS: Complex64 = Complex64::new(15.6, -1e-5);

const TABLE2: &str = "\
potential.vector = coulomb -1
potential.direct = linear 1
basis.n = 60
basis.b = 0.5
search.e_min = 0
search.e_max = 7.5
search.grid_points = 151
search.levels = 6
numerics.cf_depth = 1000
";

const TABLE3: &str = "\
potential.vector = coulomb -1
potential.direct = quadratic 0.5
basis.n = 60
basis.b = 0.5
search.e_min = 0
search.e_max = 12.5
search.grid_points = 251
search.levels = 6
numerics.cf_depth = 1000
";

/// Built-in configuration of a preset (kind and angular momentum are set per
/// column when the preset runs).
pub fn preset_config(preset: Preset) -> RunConfig {
    let text = match preset {
        Preset::Table1 => TABLE1,
        Preset::Table2 => TABLE2,
        Preset::Table3 => TABLE3,
    };
    parse_config(text).expect("built-in preset parses")
}

fn with_channel(config: &RunConfig, kind: Kind, angular: Angular) -> RunConfig {
    RunConfig {
        kind,
        angular,
        ..config.clone()
    }
}

fn truncate(mut found: Vec<SpectralResult>, levels: Option<usize>) -> Vec<SpectralResult> {
    if let Some(n) = levels {
        found.truncate(n);
    }
    found
}

/// `j` whose FV1/2 problem supplies the orbital-`l` column of a comparison:
/// `j = 1/2` for `l = 0`, otherwise `j = l - 1/2` (the `l-` channel).
pub fn fv12_j_for(l: u32) -> f64 {
    if l == 0 {
        0.5
    } else {
        l as f64 - 0.5
    }
}

struct Runner {
    timing: bool,
    fv12_cache: HashMap<u64, (RunConfig, Vec<SpectralResult>)>,
}

impl Runner {
    fn records(
        &self,
        label: &str,
        found: &[SpectralResult],
        config: &RunConfig,
        start: Instant,
    ) -> Vec<ResultRecord> {
        let elapsed = start.elapsed().as_secs_f64();
        found
            .iter()
            .map(|r| {
                let mut rec = ResultRecord::new(label, r, config);
                if self.timing {
                    rec.wall_time = Some(elapsed);
                }
                rec
            })
            .collect()
    }

    fn solve(&self, config: &RunConfig) -> Result<Vec<SpectralResult>> {
        let found = find_bound_states(&config.problem()?, &config.window()?)?;
        Ok(truncate(found, config.levels))
    }

    fn fv12_scan(
        &mut self,
        config: &RunConfig,
        j: f64,
    ) -> Result<(RunConfig, Vec<SpectralResult>)> {
        let key = j.to_bits();
        if let Some(hit) = self.fv12_cache.get(&key) {
            return Ok(hit.clone());
        }
        let cfg = with_channel(config, Kind::Fv12, Angular::J(j));
        let found = find_bound_states(&cfg.problem()?, &cfg.window()?)?;
        self.fv12_cache.insert(key, (cfg.clone(), found.clone()));
        Ok((cfg, found))
    }

    /// Schr, FV0 and FV1/2 columns for orbital momentum `l`.
    fn compare(&mut self, config: &RunConfig, l: u32) -> Result<Vec<ResultRecord>> {
        let mut out = Vec::new();
        for kind in [Kind::Schrodinger, Kind::Fv0] {
            let start = Instant::now();
            let cfg = with_channel(config, kind, Angular::L(l));
            let found = self.solve(&cfg)?;
            out.extend(self.records(
                &format!("{} (l={l})", kind_label(kind)),
                &found,
                &cfg,
                start,
            ));
        }
        let start = Instant::now();
        let (cfg, found) = self.fv12_scan(config, fv12_j_for(l))?;
        let picked: Vec<SpectralResult> = found
            .into_iter()
            .filter(|r| r.dominant_l == Some(l))
            .collect();
        let picked = truncate(picked, config.levels);
        out.extend(self.records(&format!("FV1/2 (l={l})"), &picked, &cfg, start));
        Ok(out)
    }

    fn table1(&mut self, base: &RunConfig) -> Result<Vec<ResultRecord>> {
        let mut out = Vec::new();
        for (kind, angular) in [
            (Kind::Schrodinger, Angular::L(0)),
            (Kind::Fv0, Angular::L(0)),
            (Kind::Fv12, Angular::J(0.5)),
        ] {
            let label = kind_label(kind);
            let cfg = with_channel(base, kind, angular);
            let start = Instant::now();
            let found: Vec<_> = self
                .solve(&cfg)?
                .into_iter()
                .filter(|r| r.dominant_l.unwrap_or(0) == 0)
                .collect();
            out.extend(self.records(label, &found, &cfg, start));
            let res_cfg = RunConfig {
                search: Search::Guess(TABLE1_GUESS),
                ..cfg
            };
            let start = Instant::now();
            let res = find_resonance(&res_cfg.problem()?, TABLE1_GUESS)?;
            out.extend(self.records(label, &[res], &res_cfg, start));
        }
        Ok(out)
    }
}

/// Runs one command. Errors are numerical failures or invalid input; the
/// binary maps them to [`EXIT_FAILURE`].
pub fn run(command: Command, config: &RunConfig, options: RunOptions) -> Result<RunOutcome> {
    let mut runner = Runner {
        timing: options.timing,
        fv12_cache: HashMap::new(),
    };
    let mut notes = Vec::new();
    let records = match command {
        Command::Solve => {
            let start = Instant::now();
            let found = runner.solve(config)?;
            runner.records(&config.label(), &found, config, start)
        }
        Command::Resonance => {
            let start = Instant::now();
            let found = find_resonance(&config.problem()?, config.guess()?)?;
            runner.records(&config.label(), &[found], config, start)
        }
        Command::Converge => {
            let start = Instant::now();
            let ns = if config.n_list.is_empty() {
                vec![config.n_max]
            } else {
                config.n_list.clone()
            };
            let bs = if config.b_list.is_empty() {
                vec![config.b]
            } else {
                config.b_list.clone()
            };
            let report = converge(&config.problem()?, &ns, &bs, &config.window()?)?;
            let mut recs = Vec::new();
            for row in &report.rows {
                let label = format!("N={} b={}", row.n_max, row.b);
                match (&row.lowest, &row.error) {
                    (Some(r), _) => {
                        recs.extend(runner.records(&label, std::slice::from_ref(r), config, start))
                    }
                    (None, Some(e)) => notes.push(format!("{label}: failed: {e}")),
                    (None, None) => notes.push(format!("{label}: no state in window")),
                }
            }
            for (b, ok) in &report.converged {
                notes.push(format!(
                    "b={b}: {}",
                    if *ok { "converged" } else { "not converged" }
                ));
            }
            match report.recommended {
                Some((n, b)) => notes.push(format!("recommended: N={n} b={b}")),
                None => notes.push("recommended: none".to_string()),
            }
            recs
        }
        Command::Compare => {
            let l = match config.angular {
                Angular::L(l) => l,
                Angular::J(j) => (j - 0.5).round() as u32,
            };
            runner.compare(config, l)?
        }
        Command::Preset(Preset::Table1) => runner.table1(&preset_config(Preset::Table1))?,
        Command::Preset(p) => {
            let base = preset_config(p);
            let mut recs = runner.compare(&base, 0)?;
            recs.extend(runner.compare(&base, 1)?);
            recs
        }
    };
    let status = if command == Command::Solve && options.require_roots && records.is_empty() {
        1
    } else {
        0
    };
    Ok(RunOutcome {
        records,
        status,
        notes,
    })
}

/// `x` with 7 significant digits.
pub fn sig7(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-4..7).contains(&magnitude) {
        return format!("{x:.6e}");
    }
    let decimals = (6 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn energy_cell(r: &ResultRecord) -> String {
    if r.energy.im == 0.0 {
        sig7(r.energy.re)
    } else {
        format!("{} {:+.2e}i", sig7(r.energy.re), r.energy.im)
    }
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    label: String,
    energy_re: String,
    energy_im: String,
    kind: String,
    #[serde(rename = "N")]
    n: usize,
    b: f64,
    cf_depth: usize,
    residual: String,
}

/// Renders records as `table`, `json` or `csv`.
///
/// With more than one label, the table is a grid with one column per label in
/// order of first appearance.
pub fn write_output(records: &[ResultRecord], format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(records).expect("records serialize");
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in records {
                w.serialize(CsvRow {
                    label: r.label.clone(),
                    energy_re: format!("{:.16e}", r.energy.re),
                    energy_im: format!("{:.16e}", r.energy.im),
                    kind: r.kind.clone(),
                    n: r.basis.n,
                    b: r.basis.b,
                    cf_depth: r.cf_depth,
                    residual: format!("{:.3e}", r.determinant_residual),
                })
                .expect("csv row");
            }
            if records.is_empty() {
                w.write_record([
                    "label",
                    "energy_re",
                    "energy_im",
                    "kind",
                    "N",
                    "b",
                    "cf_depth",
                    "residual",
                ])
                .expect("csv header");
            }
            w.into_inner().expect("csv buffer")
        }
        Format::Table => table(records).into_bytes(),
    }
}

fn table(records: &[ResultRecord]) -> String {
    let mut labels: Vec<&str> = Vec::new();
    for r in records {
        if !labels.contains(&r.label.as_str()) {
            labels.push(&r.label);
        }
    }
    let mut out = String::new();
    if records.is_empty() {
        out.push_str("no states found\n");
        return out;
    }
    if labels.len() == 1 {
        let _ = writeln!(
            out,
            "{:>3}  {:>24}  {:>9}  {:>5}  {:>8}  {:>8}  {:>9}  {:>3}",
            "#", labels[0], "kind", "N", "b", "cf_depth", "residual", "l"
        );
        for (i, r) in records.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:>3}  {:>24}  {:>9}  {:>5}  {:>8}  {:>8}  {:>9.2e}  {:>3}",
                i + 1,
                energy_cell(r),
                r.kind,
                r.basis.n,
                r.basis.b,
                r.cf_depth,
                r.determinant_residual,
                r.dominant_l.map_or("-".to_string(), |l| l.to_string())
            );
        }
        return out;
    }
    let columns: Vec<Vec<String>> = labels
        .iter()
        .map(|l| {
            records
                .iter()
                .filter(|r| r.label == *l)
                .map(energy_cell)
                .collect()
        })
        .collect();
    let width = columns
        .iter()
        .flatten()
        .map(String::len)
        .chain(labels.iter().map(|l| l.len()))
        .max()
        .unwrap_or(0);
    let rows = columns.iter().map(Vec::len).max().unwrap_or(0);
    let header: Vec<String> = labels.iter().map(|l| format!("{l:>width$}")).collect();
    let _ = writeln!(out, "{}", header.join("  "));
    for i in 0..rows {
        let cells: Vec<String> = columns
            .iter()
            .map(|c| format!("{:>width$}", c.get(i).map_or("", String::as_str)))
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    out
}

/// Parses CSV produced by [`write_output`] back into `(label, energy)` pairs.
pub fn read_csv_energies(bytes: &[u8]) -> Result<Vec<(String, Complex64)>> {
    let mut r = csv::Reader::from_reader(bytes);
    let mut out = Vec::new();
    for row in r.deserialize::<CsvRow>() {
        let row = row.map_err(|e| FvError::Domain(format!("bad csv: {e}")))?;
        let re: f64 = row
            .energy_re
            .parse()
            .map_err(|_| FvError::Domain(format!("bad energy `{}`", row.energy_re)))?;
        let im: f64 = row
            .energy_im
            .parse()
            .map_err(|_| FvError::Domain(format!("bad energy `{}`", row.energy_im)))?;
        out.push((row.label, Complex64::new(re, im)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HYDROGEN: &str = "\
problem.kind = schrodinger
problem.l = 0
potential.vector = coulomb -1
basis.n = 20
basis.b = 0.5
search.e_min = -0.6
search.e_max = -0.1
";

    #[test]
    fn defaults() {
        let c = parse_config(HYDROGEN).unwrap();
        assert_eq!(c.system, PhysicalSystem::default());
        assert_eq!(c.numerics.cf_tol, 1e-12);
        assert_eq!(c.numerics.refine_tol, 1e-10);
        assert_eq!(c.format, Format::Table);
    }

    #[test]
    fn syntax_error_has_line_number() {
        let err = parse_config("# comment\nproblem.kind fv0\n").unwrap_err();
        assert!(
            matches!(err, FvError::ConfigSyntax { line: 2, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn unknown_key_is_rejected_by_name() {
        let err = parse_config("basis.size = 3\n").unwrap_err();
        match err {
            FvError::ConfigValue { key, .. } => assert_eq!(key, "basis.size"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn window_and_guess_are_exclusive() {
        let text = format!("{HYDROGEN}search.guess = 1 -0.1\n");
        assert!(matches!(
            parse_config(&text),
            Err(FvError::ConfigValue { key, .. }) if key == "search"
        ));
        assert!(parse_config("potential.vector = coulomb -1\n").is_err());
    }

    #[test]
    fn angular_field_follows_kind() {
        let bad = "problem.kind = fv12\nproblem.l = 0\nsearch.guess = 1 0\n";
        assert!(matches!(
            parse_config(bad),
            Err(FvError::ConfigValue { key, .. }) if key == "problem.l"
        ));
        let ok =
            parse_config("problem.kind = fv12\nproblem.j = 1.5\nsearch.guess = 1 0\n").unwrap();
        assert_eq!(ok.angular, Angular::J(1.5));
        assert!(parse_config("problem.kind = fv12\nproblem.j = 1\nsearch.guess = 1 0\n").is_err());
    }

    #[test]
    fn couls_vector_line() {
        let c = parse_config(
            "potential.vector = coulomb 92, screened -240 1, screened 320 4\nsearch.guess = 15.6 -1e-5\n",
        )
        .unwrap();
        assert_eq!(c.vector.len(), 3);
        assert_eq!(c.guess().unwrap(), Complex64::new(15.6, -1e-5));
    }

    #[test]
    fn tenfold_c_passes_through() {
        let c = parse_config(&format!("{HYDROGEN}system.c = 1370.36\n")).unwrap();
        assert_eq!(c.system.c, 1370.36);
    }

    #[test]
    fn echo_reparses() {
        for text in [HYDROGEN, TABLE1, TABLE2, TABLE3] {
            let c = parse_config(text).unwrap();
            let again = parse_config(&c.to_text()).unwrap();
            assert_eq!(c, again);
            assert_eq!(again.to_text(), c.to_text());
        }
    }

    #[test]
    fn sig7_digits() {
        assert_eq!(sig7(0.5777494), "0.5777494");
        assert_eq!(sig7(-5.9293684), "-5.929368");
        assert_eq!(sig7(15.609181), "15.60918");
        assert_eq!(sig7(10.809347), "10.80935");
    }

    #[test]
    fn empty_outputs() {
        assert_eq!(write_output(&[], Format::Json), b"[]\n");
        assert!(read_csv_energies(&write_output(&[], Format::Csv))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn zero_potential_solve_is_empty() {
        let c = parse_config("search.e_min = -1\nsearch.e_max = -0.1\n").unwrap();
        let out = run(Command::Solve, &c, RunOptions::default()).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.status, 0);
        let strict = run(
            Command::Solve,
            &c,
            RunOptions {
                require_roots: true,
                timing: false,
            },
        )
        .unwrap();
        assert_eq!(strict.status, 1);
    }
}
