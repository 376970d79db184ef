//! Job configs, command dispatch and report emission.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::approx::{enumerate_approximation, DEFAULT_ENUMERATION_BUDGET};
use crate::constructions::{
    build_case1, build_case3, build_for_dimension, decimal_ratio, fraser_yu_fixture,
    IdentityRow, MSequence, Segment,
};
use crate::digits::{BAdicPoint, DigitString, DigitSystem};
use crate::dimension::{
    covering_count, dimension_report, lower_density_profile, window_density_profile,
    CoveringStats, DensityProfile, DimensionReport, WindowDensityReport,
};
use crate::error::{Error, Result};
use crate::exact::{self, f64_17::format as fmt17, format_rational};
use crate::fourier::{
    coefficient_to_tolerance, fourier_coefficient, nondecay_scan, FourierValue, NaturalMeasure,
    ScanRow,
};
use crate::positions::PositionSet;
use crate::progressions::{
    construct_ap, longest_ap, run_growth, search_ap, ArithmeticProgression, LongestAp,
    RunReport, DEFAULT_SEARCH_BUDGET,
};

/// Environment variable overriding enumeration and search budgets.
pub const BUDGET_ENV: &str = "DIGITFRACT_BUDGET";

const MAX_DEPTH: u64 = 100_000;
const MAX_HORIZON: u64 = 1_000_000_000;
const DEFAULT_HORIZON: u64 = 1_000_000;
const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Command {
    #[serde(rename = "dims")]
    Dims,
    #[serde(rename = "enumerate")]
    Enumerate,
    #[serde(rename = "ap construct")]
    ApConstruct,
    #[serde(rename = "ap search")]
    ApSearch,
    #[serde(rename = "ap longest")]
    ApLongest,
    #[serde(rename = "runs")]
    Runs,
    #[serde(rename = "fourier coeff")]
    FourierCoeff,
    #[serde(rename = "fourier scan")]
    FourierScan,
    #[serde(rename = "construct-s")]
    ConstructS,
    #[serde(rename = "fixture fraser-yu")]
    FixtureFraserYu,
}

impl Command {
    fn allowed_params(self) -> &'static [&'static str] {
        match self {
            Command::Dims => &["horizon", "windows", "offset_bound"],
            Command::Enumerate => &["depth", "budget"],
            Command::ApConstruct => &["k", "horizon", "tail_depth", "budget"],
            Command::ApSearch => &["k", "depth", "budget", "search_budget", "fixture", "n_max"],
            Command::ApLongest => &["depth", "budget", "search_budget", "fixture", "n_max"],
            Command::Runs => &["horizon", "intervals"],
            Command::FourierCoeff => &["frequencies", "depth", "tolerance"],
            Command::FourierScan => &["ks", "tolerance", "block_budget"],
            Command::ConstructS => &["levels", "horizon", "windows", "offset_bound"],
            Command::FixtureFraserYu => &["n_max"],
        }
    }

    fn needs_system(self) -> bool {
        !matches!(
            self,
            Command::Runs | Command::ConstructS | Command::FixtureFraserYu
        )
    }

    fn needs_positions(self) -> bool {
        !matches!(self, Command::FixtureFraserYu)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PositionSpec {
    Periodic {
        period: u64,
        residues: Vec<u64>,
    },
    Case1 {
        s: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m_prefix: Option<Vec<u64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        growth: Option<u64>,
    },
    #[serde(alias = "cube-blocks")]
    Case2,
    Case3 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m_prefix: Option<Vec<u64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        growth: Option<u64>,
    },
    /// Picks the builder from `s`: 0, `(0, 1)` or 1.
    Auto {
        s: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m_prefix: Option<Vec<u64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        growth: Option<u64>,
    },
    Explicit {
        members: Vec<u64>,
        horizon: u64,
    },
}

fn m_rule(s: Option<f64>, prefix: &Option<Vec<u64>>, growth: Option<u64>) -> Result<Option<MSequence>> {
    let base = match (prefix, growth) {
        (None, None) => return Ok(None),
        (Some(p), _) => MSequence::new(p.clone())?,
        (None, Some(_)) => match s {
            Some(s) if s > 0.0 && s < 1.0 => MSequence::default_for(&decimal_ratio(s)?)?,
            _ => MSequence::default_full(),
        },
    };
    Ok(Some(match growth {
        Some(g) => base.with_growth_floor(g)?,
        None => base,
    }))
}

impl PositionSpec {
    pub fn build(&self) -> Result<PositionSet> {
        match self {
            PositionSpec::Periodic { period, residues } => PositionSet::periodic(*period, residues),
            PositionSpec::Case1 { s, m_prefix, growth } => {
                build_case1(*s, m_rule(Some(*s), m_prefix, *growth)?)
            }
            PositionSpec::Case2 => Ok(PositionSet::cube_blocks()),
            PositionSpec::Case3 { m_prefix, growth } => build_case3(m_rule(None, m_prefix, *growth)?),
            PositionSpec::Auto { s, m_prefix, growth } => {
                build_for_dimension(*s, m_rule(Some(*s), m_prefix, *growth)?)
            }
            PositionSpec::Explicit { members, horizon } => PositionSet::explicit(members, *horizon),
        }
    }
}

/// Command parameters; each command accepts only the keys it uses.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_depth: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<Fixture>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub windows: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset_bound: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<[u64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fixture {
    FraserYu,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<DigitSystem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<PositionSpec>,
    pub command: Command,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: OutputSpec,
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Sets every budget the command accepts to `budget`.
    pub fn override_budgets(&mut self, budget: u64) {
        let allowed = self.command.allowed_params();
        if allowed.contains(&"budget") {
            self.params.budget = Some(budget);
        }
        if allowed.contains(&"search_budget") {
            self.params.search_budget = Some(budget);
        }
    }

    /// Applies `DIGITFRACT_BUDGET` when it is set.
    pub fn apply_budget_env(&mut self) -> Result<()> {
        match std::env::var(BUDGET_ENV) {
            Ok(v) => {
                let budget = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{BUDGET_ENV}={v:?} is not an integer")))?;
                self.override_budgets(budget);
                Ok(())
            }
            Err(std::env::VarError::NotPresent) => Ok(()),
            Err(e) => Err(Error::Config(format!("{BUDGET_ENV}: {e}"))),
        }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn input_hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical))
    }

    fn validate(&self) -> Result<()> {
        let given = serde_json::to_value(&self.params).expect("params serialize");
        let allowed = self.command.allowed_params();
        if let Some(map) = given.as_object() {
            if let Some(key) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
                return Err(Error::Config(format!(
                    "parameter {key:?} is not used by {:?}; accepted: {allowed:?}",
                    command_name(self.command)
                )));
            }
        }
        // a fixture replaces the enumerated point set
        let sourced = self.params.fixture.is_some();
        if self.command.needs_system() && self.system.is_none() && !sourced {
            return Err(Error::Config("this command needs a digit system".into()));
        }
        if self.command.needs_positions() && self.positions.is_none() && !sourced {
            return Err(Error::Config("this command needs a position set".into()));
        }
        let p = &self.params;
        for (name, v, cap) in [
            ("depth", p.depth, MAX_DEPTH),
            ("tail_depth", p.tail_depth, MAX_DEPTH),
            ("horizon", p.horizon, MAX_HORIZON),
            ("offset_bound", p.offset_bound, MAX_HORIZON),
            ("levels", p.levels, 64),
        ] {
            if let Some(v) = v {
                if v > cap {
                    return Err(Error::Config(format!("{name} = {v} exceeds the limit {cap}")));
                }
            }
        }
        if let Some(w) = &p.windows {
            if w.iter().any(|&m| m > MAX_HORIZON) {
                return Err(Error::Config(format!("window lengths are limited to {MAX_HORIZON}")));
            }
        }
        if p.fixture.is_some() && p.depth.is_some() {
            return Err(Error::Config("give either a fixture or a depth, not both".into()));
        }
        if p.depth.is_some() && p.tolerance.is_some() {
            return Err(Error::Config("give either a depth or a tolerance, not both".into()));
        }
        if let Some(t) = p.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("tolerance must be positive, got {t}")));
            }
        }
        Ok(())
    }
}

fn command_name(c: Command) -> String {
    serde_json::to_value(c)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimsResult {
    pub positions: String,
    pub profile: DensityProfile,
    pub windows: WindowDensityReport,
    pub report: DimensionReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerateResult {
    pub depth: u64,
    pub count: u64,
    pub members: Vec<DigitString>,
    pub endpoints: Vec<BAdicPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructedAp {
    pub progression: ArithmeticProgression,
    /// Tail depth the terms were completed to.
    pub depth: u64,
    /// `N_{r,R}` of the terms at the start with `r = gap`, `R = (k-1)·gap`.
    pub covering: CoveringStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub k: usize,
    pub candidates: usize,
    /// `"found"` or `"none"`.
    pub outcome: String,
    pub progression: Option<ArithmeticProgression>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongestResult {
    pub candidates: usize,
    pub longest: LongestAp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructSResult {
    pub positions: String,
    pub identity: Vec<IdentityRow>,
    pub identity_holds: bool,
    pub segments: Vec<Segment>,
    pub dims: DimsResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureResult {
    pub n_max: u64,
    #[serde(with = "exact::rational_vec")]
    pub points: Vec<BigRational>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Payload {
    Dims(DimsResult),
    Enumerate(EnumerateResult),
    ApConstruct(ConstructedAp),
    ApSearch(SearchResult),
    ApLongest(LongestResult),
    Runs(Vec<RunReport>),
    FourierCoeff(Vec<FourierValue>),
    FourierScan(Vec<ScanRow>),
    ConstructS(ConstructSResult),
    Fixture(FixtureResult),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: Command,
    pub config: JobConfig,
    pub input_hash: String,
    /// How each reported quantity was obtained.
    pub exactness: BTreeMap<String, String>,
    pub result: Payload,
    pub elapsed_ms: u64,
}

fn flags(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn kebab<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn dims(positions: &PositionSet, system: Option<&DigitSystem>, p: &Params) -> Result<DimsResult> {
    let limit = match positions.horizon() {
        Some(h) => p.horizon.unwrap_or(h).min(h),
        None => p.horizon.unwrap_or(DEFAULT_HORIZON),
    };
    let checkpoints = positions.structural_checkpoints(limit)?;
    let profile = lower_density_profile(positions, &checkpoints)?;
    let (windows, offset_bound) = match (&p.windows, positions.horizon()) {
        (Some(w), _) => (w.clone(), p.offset_bound.unwrap_or(10_000)),
        (None, None) => (vec![10, 100, 1000], p.offset_bound.unwrap_or(10_000)),
        (None, Some(h)) => {
            let m = h.div_ceil(4);
            (vec![m], p.offset_bound.unwrap_or(h - m))
        }
    };
    let windows = window_density_profile(positions, &windows, offset_bound)?;
    // density-only reports use the full-digit base term when no system is given
    let fallback;
    let system = match system {
        Some(s) => s,
        None => {
            fallback = DigitSystem::new(2, &[0])?;
            &fallback
        }
    };
    let report = dimension_report(system, &profile, &windows);
    Ok(DimsResult {
        positions: positions.to_string(),
        profile,
        windows,
        report,
    })
}

fn candidate_points(
    system: Option<&DigitSystem>,
    positions: Option<&PositionSet>,
    p: &Params,
) -> Result<Vec<BigRational>> {
    match p.fixture {
        Some(Fixture::FraserYu) => fraser_yu_fixture(p.n_max.unwrap_or(200)),
        None => {
            if p.n_max.is_some() {
                return Err(Error::Config("n_max applies to fixtures only".into()));
            }
            let (Some(system), Some(positions)) = (system, positions) else {
                return Err(Error::Config("enumeration needs a system and a position set".into()));
            };
            let depth = p
                .depth
                .ok_or_else(|| Error::Config("missing parameter depth".into()))?;
            let approx = enumerate_approximation(
                system,
                positions,
                depth,
                p.budget.unwrap_or(DEFAULT_ENUMERATION_BUDGET),
            )?;
            Ok(approx.endpoints().iter().map(BAdicPoint::to_rational).collect())
        }
    }
}

fn require<T: Copy>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing parameter {name}")))
}

/// Validates the config and runs its command.
pub fn run_command(config: &JobConfig) -> Result<Report> {
    let started = Instant::now();
    config.validate()?;
    let positions = config.positions.as_ref().map(PositionSpec::build).transpose()?;
    let system = config.system.as_ref();
    let p = &config.params;
    let needs = |what: &str| Error::Config(format!("this command needs {what}"));
    let pos = || positions.as_ref().ok_or_else(|| needs("a position set"));
    let sys = || system.ok_or_else(|| needs("a digit system"));

    let (result, exactness) = match config.command {
        Command::Dims => {
            let r = dims(pos()?, Some(sys()?), p)?;
            let f = flags(&[
                ("hausdorff", &kebab(&r.report.hausdorff.exactness)),
                ("assouad", &kebab(&r.report.assouad.exactness)),
            ]);
            (Payload::Dims(r), f)
        }
        Command::Enumerate => {
            let depth = require(p.depth, "depth")?;
            let a = enumerate_approximation(
                sys()?,
                pos()?,
                depth,
                p.budget.unwrap_or(DEFAULT_ENUMERATION_BUDGET),
            )?;
            let endpoints = a.endpoints();
            let r = EnumerateResult {
                depth,
                count: a.len() as u64,
                members: a.members,
                endpoints,
            };
            (Payload::Enumerate(r), flags(&[("endpoints", "exact")]))
        }
        Command::ApConstruct => {
            let k = require(p.k, "k")?;
            let budget = p.budget.unwrap_or(DEFAULT_ENUMERATION_BUDGET);
            if k > budget {
                return Err(Error::BudgetExceeded {
                    what: "progression terms",
                    required: k.to_string(),
                    budget,
                });
            }
            let horizon = p.horizon.unwrap_or(DEFAULT_HORIZON);
            let ap = construct_ap(sys()?, pos()?, k, horizon, p.tail_depth)?;
            let depth = ap.witnesses.first().map_or(0, |w| w.len() as u64);
            let points = ap.points();
            let big_r = &ap.gap * BigInt::from(ap.length - 1);
            let covering =
                covering_count(&points, &ap.gap, &big_r, Some(std::slice::from_ref(&ap.start)))?;
            let r = ConstructedAp {
                progression: ap,
                depth,
                covering,
            };
            (Payload::ApConstruct(r), flags(&[("progression", "exact")]))
        }
        Command::ApSearch => {
            let k = require(p.k, "k")?;
            let points = candidate_points(system, positions.as_ref(), p)?;
            let found = search_ap(
                &points,
                usize::try_from(k).unwrap_or(usize::MAX),
                p.search_budget.unwrap_or(DEFAULT_SEARCH_BUDGET),
            )?;
            let r = SearchResult {
                k: k as usize,
                candidates: points.len(),
                outcome: if found.is_some() { "found" } else { "none" }.to_string(),
                progression: found,
            };
            (Payload::ApSearch(r), flags(&[("search", "exact")]))
        }
        Command::ApLongest => {
            let points = candidate_points(system, positions.as_ref(), p)?;
            let longest = longest_ap(&points, p.search_budget.unwrap_or(DEFAULT_SEARCH_BUDGET))?;
            let r = LongestResult {
                candidates: points.len(),
                longest,
            };
            (Payload::ApLongest(r), flags(&[("search", "exact")]))
        }
        Command::Runs => {
            let intervals: Vec<(u64, u64)> = match &p.intervals {
                Some(v) => v.iter().map(|&[a, b]| (a, b)).collect(),
                None => vec![(1, p.horizon.unwrap_or(DEFAULT_HORIZON))],
            };
            if p.intervals.is_some() && p.horizon.is_some() {
                return Err(Error::Config("give either intervals or a horizon".into()));
            }
            if intervals.iter().any(|&(_, b)| b > MAX_HORIZON) {
                return Err(Error::Config(format!("intervals are limited to {MAX_HORIZON}")));
            }
            let rows = run_growth(pos()?, &intervals)?;
            (Payload::Runs(rows), flags(&[("runs", "exact")]))
        }
        Command::FourierCoeff => {
            let measure = NaturalMeasure::new(sys()?.clone(), pos()?.clone());
            let freqs = p
                .frequencies
                .as_ref()
                .ok_or_else(|| Error::Config("missing parameter frequencies".into()))?;
            let values = freqs
                .iter()
                .map(|&m| match p.depth {
                    Some(n) => fourier_coefficient(&measure, m, n),
                    None => coefficient_to_tolerance(
                        &measure,
                        m,
                        p.tolerance.unwrap_or(DEFAULT_TOLERANCE),
                    ),
                })
                .collect::<Result<Vec<_>>>()?;
            (Payload::FourierCoeff(values), flags(&[("value", "double-precision")]))
        }
        Command::FourierScan => {
            let measure = NaturalMeasure::new(sys()?.clone(), pos()?.clone());
            let ks = p
                .ks
                .as_ref()
                .ok_or_else(|| Error::Config("missing parameter ks".into()))?;
            let rows = nondecay_scan(
                &measure,
                ks,
                p.tolerance.unwrap_or(DEFAULT_TOLERANCE),
                p.block_budget,
            )?;
            (Payload::FourierScan(rows), flags(&[("abs", "double-precision")]))
        }
        Command::ConstructS => {
            let positions = pos()?;
            let levels = p.levels.unwrap_or(3);
            let (identity, segments) = match positions.construction() {
                Some(c) => (c.count_identity(levels)?, c.segments(2 * levels as usize)?),
                None => (Vec::new(), Vec::new()),
            };
            let r = ConstructSResult {
                positions: positions.to_string(),
                identity_holds: identity.iter().all(IdentityRow::holds),
                identity,
                segments,
                dims: dims(positions, system, p)?,
            };
            let f = flags(&[
                ("identity", "exact"),
                ("lower_density", &kebab(&r.dims.profile.liminf.exactness)),
            ]);
            (Payload::ConstructS(r), f)
        }
        Command::FixtureFraserYu => {
            let n_max = p.n_max.unwrap_or(200);
            let r = FixtureResult {
                n_max,
                points: fraser_yu_fixture(n_max)?,
            };
            (Payload::Fixture(r), flags(&[("points", "exact")]))
        }
    };
    Ok(Report {
        command: config.command,
        config: config.clone(),
        input_hash: config.input_hash(),
        exactness,
        result,
        elapsed_ms: started.elapsed().as_millis() as u64,
    })
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// The report with its timing zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> Report {
        Report {
            elapsed_ms: 0,
            ..self.clone()
        }
    }

    fn table(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        let q = format_rational;
        match &self.result {
            Payload::Dims(r) => dims_table(r),
            Payload::ConstructS(r) => (
                vec!["i", "boundary", "count", "target", "holds"],
                r.identity
                    .iter()
                    .map(|row| {
                        vec![
                            row.i.to_string(),
                            row.boundary.to_string(),
                            row.count.to_string(),
                            row.target.to_string(),
                            row.holds().to_string(),
                        ]
                    })
                    .collect(),
            ),
            Payload::Enumerate(r) => (
                vec!["index", "digits", "point"],
                r.members
                    .iter()
                    .zip(&r.endpoints)
                    .enumerate()
                    .map(|(i, (m, e))| vec![i.to_string(), m.to_string(), e.to_string()])
                    .collect(),
            ),
            Payload::ApConstruct(r) => ap_table(Some(&r.progression)),
            Payload::ApSearch(r) => ap_table(r.progression.as_ref()),
            Payload::ApLongest(r) => ap_table(r.longest.witness.as_ref()),
            Payload::Runs(rows) => (
                vec!["from", "to", "longest_run_elements", "longest_run_steps", "run_start"],
                rows.iter()
                    .map(|r| {
                        vec![
                            r.from.to_string(),
                            r.to.to_string(),
                            r.longest_run_elements.to_string(),
                            r.longest_run_steps.map_or(String::new(), |v| v.to_string()),
                            r.witness.map_or(String::new(), |w| w.start.to_string()),
                        ]
                    })
                    .collect(),
            ),
            Payload::FourierCoeff(values) => (
                vec!["frequency", "re", "im", "abs", "depth", "tail_bound"],
                values
                    .iter()
                    .map(|v| {
                        vec![
                            v.frequency.to_string(),
                            fmt17(v.value.re),
                            fmt17(v.value.im),
                            fmt17(v.value.norm()),
                            v.depth.to_string(),
                            fmt17(v.tail_bound),
                        ]
                    })
                    .collect(),
            ),
            Payload::FourierScan(rows) => (
                vec!["k", "m", "abs", "tail_bound", "next_in_s", "depth", "block_max_m", "block_max_abs"],
                rows.iter()
                    .map(|r| {
                        vec![
                            r.k.to_string(),
                            r.frequency.to_string(),
                            fmt17(r.abs),
                            fmt17(r.tail_bound),
                            r.next_in_s.to_string(),
                            r.depth.to_string(),
                            r.block_max.as_ref().map_or(String::new(), |b| b.frequency.to_string()),
                            r.block_max.as_ref().map_or(String::new(), |b| fmt17(b.abs)),
                        ]
                    })
                    .collect(),
            ),
            Payload::Fixture(r) => (
                vec!["index", "point"],
                r.points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| vec![i.to_string(), q(p)])
                    .collect(),
            ),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let (header, rows) = self.table();
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&header).map_err(io)?;
        for row in rows {
            w.write_record(&row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }

    pub fn write_to(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        out.write_all(self.render(format)?.as_bytes())?;
        Ok(())
    }
}

fn dims_table(r: &DimsResult) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let rep = &r.report;
    let exact = |v: &Option<BigRational>| v.as_ref().map_or(String::new(), format_rational);
    (
        vec!["quantity", "value", "exact", "exactness"],
        vec![
            vec!["base_term".into(), fmt17(rep.base_term), String::new(), String::new()],
            vec![
                "hausdorff".into(),
                fmt17(rep.hausdorff.value),
                String::new(),
                kebab(&rep.hausdorff.exactness),
            ],
            vec![
                "assouad".into(),
                fmt17(rep.assouad.value),
                String::new(),
                kebab(&rep.assouad.exactness),
            ],
            vec![
                "lower_density".into(),
                fmt17(rep.lower_density.value),
                exact(&rep.lower_density.exact),
                kebab(&rep.lower_density.exactness),
            ],
            vec![
                "window_density".into(),
                fmt17(rep.window_density.value),
                exact(&rep.window_density.exact),
                kebab(&rep.window_density.exactness),
            ],
        ],
    )
}

fn ap_table(ap: Option<&ArithmeticProgression>) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec!["outcome", "index", "point", "digits"];
    let Some(ap) = ap else {
        return (header, vec![vec!["none".into(), String::new(), String::new(), String::new()]]);
    };
    let rows = ap
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            vec![
                "found".into(),
                i.to_string(),
                format_rational(p),
                ap.witnesses.get(i).map_or(String::new(), |w| w.to_string()),
            ]
        })
        .collect();
    (header, rows)
}

/// Structured error payload for stderr.
pub fn error_json(e: &Error) -> String {
    let kind = format!("{e:?}");
    let kind = kind.split(['(', ' ', '{']).next().unwrap_or_default();
    serde_json::json!({
        "error": kind,
        "message": e.to_string(),
        "exit_code": e.exit_code(),
    })
    .to_string()
}
