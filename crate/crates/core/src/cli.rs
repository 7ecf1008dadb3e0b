//! Batch front end: run configuration, command dispatch and the corpus sweep.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::discretize::{assemble_cylinder_product, assemble_on_torus, numerical_index, IndexOptions, IndexReport, IndexStatus};
use crate::ellipticity::{check_elliptic, CosphereGrid, EllipticityReport, Verdict, DEFAULT_N_SCHEDULE, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::operator::ShiftOperatorSpec;
use crate::report::{write_atomic, Report, RunStatus, SpecInfo};
use crate::topo::{topological_index, MappingTorusGrid, OrbitCosphere, TopoOptions, TopoStatus};
use crate::uniformize::{self as uni, CylinderSample, GridInfo, TransformReport};
use crate::c64;

pub const MAX_K: usize = 64;
pub const MAX_H: usize = 64;
pub const MAX_N: usize = 128;
pub const MAX_GRID: usize = 64;
pub const MAX_JOBS: usize = 256;
pub const DEFAULT_K: usize = 16;
pub const DEFAULT_H: usize = 16;
pub const DEFAULT_TOPO_WINDOW: usize = 16;
pub const DEFAULT_RADIUS: f64 = 1.0;
pub const EPS_SCAN: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Ellipticity,
    Index,
    Equality,
    UniformizeVerify,
    Topo,
    HomotopyScan,
    Corpus,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Ellipticity => "ellipticity",
            Command::Index => "index",
            Command::Equality => "equality",
            Command::UniformizeVerify => "uniformize-verify",
            Command::Topo => "topo",
            Command::HomotopyScan => "homotopy-scan",
            Command::Corpus => "corpus",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub spec: Option<PathBuf>,
    #[serde(default)]
    pub corpus_dir: Option<PathBuf>,
    #[serde(default, rename = "K")]
    pub k: Option<usize>,
    #[serde(default, rename = "H")]
    pub h: Option<usize>,
    #[serde(default, rename = "N")]
    pub n: Option<usize>,
    /// Resolution override for sampling grids.
    #[serde(default)]
    pub grid: Option<usize>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub fixed_order: bool,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            spec: None,
            corpus_dir: None,
            k: None,
            h: None,
            n: None,
            grid: None,
            radius: None,
            tol: None,
            jobs: None,
            out: None,
            fixed_order: false,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let within = |v: Option<usize>, lo: usize, hi: usize, what: &str| match v {
            Some(x) if x < lo || x > hi => Err(Error::Schema(format!("{what} = {x} outside the supported range [{lo}, {hi}]"))),
            _ => Ok(()),
        };
        within(self.k, 4, MAX_K, "K")?;
        within(self.h, 4, MAX_H, "H")?;
        within(self.n, 1, MAX_N, "N")?;
        within(self.grid, 4, MAX_GRID, "grid")?;
        within(self.jobs, 1, MAX_JOBS, "jobs")?;
        if let Some(t) = self.tol {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Schema(format!("tol = {t} must lie in (0, 1)")));
            }
        }
        if let Some(r) = self.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Schema(format!("radius = {r} must be positive")));
            }
        }
        match self.command {
            Command::Corpus => Ok(()),
            _ if self.spec.is_none() => Err(Error::Schema(format!("command `{}` needs --spec", self.command.name()))),
            _ => Ok(()),
        }
    }

    fn k(&self) -> usize {
        self.k.unwrap_or(DEFAULT_K)
    }

    fn h(&self) -> usize {
        self.h.unwrap_or(DEFAULT_H)
    }

    fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }

    fn n_schedule(&self, spec: &ShiftOperatorSpec) -> Vec<usize> {
        let floor = spec.max_shift().max(1);
        let mut s: Vec<usize> = match self.n {
            Some(n) => [n / 8, n / 4, n / 2, n].iter().map(|&v| v.max(floor)).collect(),
            None => DEFAULT_N_SCHEDULE.iter().map(|&v| v.max(floor)).collect(),
        };
        s.dedup();
        s
    }

    fn cosphere_grid(&self) -> Result<CosphereGrid> {
        match self.grid {
            Some(g) => CosphereGrid::uniform(g),
            None => Ok(CosphereGrid::default()),
        }
    }

    /// The configuration as echoed into reports (output path excluded).
    fn echo(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(o) = v.as_object_mut() {
            o.remove("out");
            o.remove("jobs");
        }
        v
    }
}

/// Bundled example corpus.
pub fn default_corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn load_spec(cfg: &RunConfig) -> Result<ShiftOperatorSpec> {
    let path = cfg.spec.as_ref().ok_or_else(|| Error::Schema("no spec path given".into()))?;
    ShiftOperatorSpec::from_path(path)
}

fn index_status(r: &IndexReport) -> RunStatus {
    match r.status {
        IndexStatus::Conclusive => RunStatus::Conclusive,
        IndexStatus::Inconclusive => RunStatus::Inconclusive,
    }
}

fn verdict_status(r: &EllipticityReport) -> RunStatus {
    match r.status {
        Verdict::Elliptic | Verdict::NotElliptic => RunStatus::Conclusive,
        Verdict::Inconclusive => RunStatus::Inconclusive,
    }
}

fn ellipticity(spec: &ShiftOperatorSpec, cfg: &RunConfig) -> Result<EllipticityReport> {
    check_elliptic(spec, &cfg.cosphere_grid()?, &cfg.n_schedule(spec), cfg.tol())
}

/// Ellipticity gate of the index commands.
fn require_elliptic(spec: &ShiftOperatorSpec, cfg: &RunConfig) -> Result<EllipticityReport> {
    let r = ellipticity(spec, cfg)?;
    if r.status == Verdict::NotElliptic {
        return Err(Error::Domain(format!(
            "operator is not elliptic: symbol min singular value {:.3e} at x = {:?}, ξ = {:?}",
            r.min_sv, r.argmin.x, r.argmin.xi
        )));
    }
    Ok(r)
}

fn index_of_d(spec: &ShiftOperatorSpec, k: usize) -> Result<IndexReport> {
    let levels = [k.div_ceil(2), k]
        .iter()
        .map(|&kk| assemble_on_torus(spec, kk.max(spec.max_frequency() as usize + 1), 0.0))
        .collect::<Result<Vec<_>>>()?;
    numerical_index(&levels, &IndexOptions::default())
}

fn index_of_b(spec: &ShiftOperatorSpec, k: usize, h: usize, eps: f64) -> Result<IndexReport> {
    let opts = IndexOptions::default();
    let coarse = |v: usize| (3 * v).div_ceil(4);
    let levels = [(coarse(k), coarse(h)), (k, h)]
        .iter()
        .map(|&(kk, hh)| assemble_cylinder_product(spec, kk.max(spec.max_frequency() as usize + 1), hh, eps, 0.0, opts.cap))
        .collect::<Result<Vec<_>>>()?;
    numerical_index(&levels, &opts)
}

fn triple_json(r: &IndexReport) -> Value {
    json!({"ker": r.ker, "coker": r.coker, "index": r.index, "gap": r.gap, "converged": r.converged, "status": r.status})
}

/// `ind D` and `ind B₁` at the configured truncation.
pub fn equality(spec: &ShiftOperatorSpec, cfg: &RunConfig) -> Result<(Value, RunStatus)> {
    let ell = require_elliptic(spec, cfg)?;
    let d = index_of_d(spec, cfg.k())?;
    let b = index_of_b(spec, cfg.k(), cfg.h(), 1.0)?;
    let equal = d.index == b.index;
    let mut status = index_status(&d).combine(index_status(&b)).combine(verdict_status(&ell));
    if status == RunStatus::Conclusive && !equal {
        status = RunStatus::Failed;
    }
    let value = json!({
        "ellipticity": ell.status,
        "D": triple_json(&d),
        "B1": triple_json(&b),
        "equal": equal,
        "K": cfg.k(),
        "H": cfg.h(),
    });
    Ok((value, status))
}

fn homotopy_scan(spec: &ShiftOperatorSpec, cfg: &RunConfig) -> Result<(Value, RunStatus)> {
    require_elliptic(spec, cfg)?;
    let mut rows = Vec::new();
    let mut status = RunStatus::Conclusive;
    let mut triples = Vec::new();
    for eps in EPS_SCAN {
        let r = index_of_b(spec, cfg.k(), cfg.h(), eps)?;
        status = status.combine(index_status(&r));
        triples.push(r.triple());
        rows.push(json!({"eps": eps, "index": triple_json(&r)}));
    }
    let constant = triples.windows(2).all(|w| w[0] == w[1]);
    if status == RunStatus::Conclusive && !constant {
        status = RunStatus::Failed;
    }
    Ok((json!({"scan": rows, "constant": constant, "K": cfg.k(), "H": cfg.h()}), status))
}

fn test_function(x: &[f64], t: f64) -> c64 {
    let wave: f64 = x.iter().enumerate().map(|(c, xc)| (c as f64 + 1.0) * xc).sum();
    c64::cis(2.0 * PI * wave) * (-(t - 0.2) * (t - 0.2) / 1.5).exp() * (1.0 + 0.3 * (2.0 * PI * x[0]).sin())
}

/// Uniformization checks on Gaussian ⊗ plane-wave data.
pub fn uniformize_verify(spec: &ShiftOperatorSpec, cfg: &RunConfig) -> Result<(Value, RunStatus)> {
    let d = spec.d();
    let iso = spec.isometry();
    let gx = cfg.grid.unwrap_or(if d == 1 { 32 } else { 16 });
    let (nt, gt, nf, gphi) = (12, if d == 1 { 8 } else { 4 }, 11, 24);
    let rational = iso.theta().iter().all(|t| {
        let s = t * gx as f64;
        (s - s.round()).abs() < 1e-9
    });
    let grid = GridInfo { d, gx, nt, gt, nf, gphi };
    let phi = CylinderSample::from_fn(d, gx, nt, gt, test_function)?;
    let norm = phi.norm();
    let u = uni::apply_i(&phi, iso, nf)?;
    let back = uni::apply_i_inv(&u, iso, nt)?;
    let max_diff = |a: &CylinderSample, b: &CylinderSample| {
        a.values.iter().zip(&b.values).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
    };
    let v = uni::apply_k(&u, gphi)?;
    let j = uni::apply_j(&phi, gphi, 2)?;
    let j_back = uni::apply_j_inv(&j, nt)?;
    let (via_j, direct) = uni::oscillator_form_check(&phi, gphi)?;
    let rows = vec![
        TransformReport::new("I/isometry", grid.clone(), (u.norm() - norm).abs() / norm, 1e-8),
        TransformReport::new("I/roundtrip", grid.clone(), max_diff(&back, &phi), 1e-10),
        TransformReport::new(
            "I/conjugate_shift",
            grid.clone(),
            uni::conjugate_shift_check(&phi, iso, nf)?,
            if rational { 1e-10 } else { 1e-6 },
        ),
        TransformReport::new("K/parseval", grid.clone(), (v.norm() - u.norm()).abs() / u.norm(), 1e-10),
        TransformReport::new("J/isometry", grid.clone(), (j.norm() - norm).abs() / norm, 1e-8),
        TransformReport::new("J/roundtrip", grid.clone(), max_diff(&j_back, &phi), 1e-8),
        TransformReport::new("J/quasi_periodicity", grid.clone(), j.quasi_periodicity_defect, 1e-8),
        TransformReport::new("J/oscillator_form", grid.clone(), (via_j - direct).norm(), 1e-6),
        TransformReport::new(
            "KI=J/factorization",
            grid.clone(),
            uni::factorization_check(&phi, iso, nf, gphi)?,
            if rational { 1e-9 } else { 1e-5 },
        ),
        TransformReport::new("I/intertwining", grid, uni::intertwining_check(&phi, iso, nf)?, 1e-8),
    ];
    let status = if rows.iter().all(|r| r.pass) { RunStatus::Conclusive } else { RunStatus::Failed };
    Ok((json!({"grid_rational": rational, "checks": rows}), status))
}

fn topo(spec: &ShiftOperatorSpec, cfg: &RunConfig) -> Result<(Value, RunStatus)> {
    crate::topo::check_dimension(spec.d())?;
    let sym = OrbitCosphere::new(spec, cfg.radius.unwrap_or(DEFAULT_RADIUS), cfg.n.unwrap_or(DEFAULT_TOPO_WINDOW))?;
    let mut grid = MappingTorusGrid::default();
    if let Some(g) = cfg.grid {
        grid.base_res = g;
    }
    let r = topological_index(&sym, &grid, &TopoOptions::default())?;
    let status = match r.status {
        TopoStatus::Conclusive => RunStatus::Conclusive,
        TopoStatus::Inconclusive => RunStatus::Inconclusive,
    };
    Ok((serde_json::to_value(r).expect("report serializes"), status))
}

fn dispatch(cfg: &RunConfig, report: &mut Report) -> Result<(Value, RunStatus)> {
    if cfg.command == Command::Corpus {
        return corpus(cfg);
    }
    let spec = load_spec(cfg)?;
    report.spec = Some(SpecInfo::of(&spec));
    match cfg.command {
        Command::Ellipticity => {
            let r = ellipticity(&spec, cfg)?;
            let status = verdict_status(&r);
            Ok((serde_json::to_value(r).expect("report serializes"), status))
        }
        Command::Index => {
            let ell = require_elliptic(&spec, cfg)?;
            let r = index_of_d(&spec, cfg.k())?;
            let status = index_status(&r).combine(verdict_status(&ell));
            Ok((serde_json::to_value(r).expect("report serializes"), status))
        }
        Command::Equality => equality(&spec, cfg),
        Command::UniformizeVerify => uniformize_verify(&spec, cfg),
        Command::Topo => topo(&spec, cfg),
        Command::HomotopyScan => homotopy_scan(&spec, cfg),
        Command::Corpus => unreachable!("handled above"),
    }
}

/// Runs one configuration; failures are reported, never raised.
pub fn execute(cfg: &RunConfig) -> Report {
    let mut report = Report::new(cfg.command.name(), cfg.echo());
    let outcome = cfg.validate().and_then(|_| dispatch(cfg, &mut report));
    match outcome {
        Ok((value, status)) => {
            report.result = value;
            report.status = status;
        }
        Err(e) => {
            report.status = RunStatus::Error;
            report.error = Some(e.to_string());
        }
    }
    report
}

/// Executes `cfg` on a pool of `jobs` threads, writes the report when an output
/// path is configured, and returns it with the exit status.
pub fn run(cfg: &RunConfig) -> Result<(Report, i32)> {
    let threads = if cfg.fixed_order { 1 } else { cfg.jobs.unwrap_or(0) };
    if cfg.fixed_order {
        faer::set_global_parallelism(faer::Par::Seq);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Schema(format!("cannot build thread pool: {e}")))?;
    let report = pool.install(|| execute(cfg));
    if let Some(out) = &cfg.out {
        write_atomic(out, &report.to_json())?;
    }
    let code = report.status.exit_code();
    Ok((report, code))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Pass,
    Fail,
    Inconclusive,
    Skipped,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusRow {
    pub file: String,
    pub name: Option<String>,
    pub check: String,
    pub status: RowStatus,
    pub detail: Value,
}

fn row_status(s: RunStatus) -> RowStatus {
    match s {
        RunStatus::Conclusive => RowStatus::Pass,
        RunStatus::Inconclusive => RowStatus::Inconclusive,
        RunStatus::Failed => RowStatus::Fail,
        RunStatus::Error => RowStatus::Error,
    }
}

fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("json" | "toml")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Schema(format!("corpus directory {dir:?} holds no spec files")));
    }
    Ok(files)
}

fn corpus_rows(path: &Path, cfg: &RunConfig) -> Vec<CorpusRow> {
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let row = |name: Option<String>, check: &str, status: RowStatus, detail: Value| CorpusRow {
        file: file.clone(),
        name,
        check: check.into(),
        status,
        detail,
    };
    let spec = match ShiftOperatorSpec::from_path(path) {
        Ok(s) => s,
        Err(e) => return vec![row(None, "parse", RowStatus::Error, json!(e.to_string()))],
    };
    let name = spec.name.clone();
    let ell = match ellipticity(&spec, cfg) {
        Ok(r) => r,
        Err(e) => return vec![row(name, "ellipticity", RowStatus::Error, json!(e.to_string()))],
    };
    let ell_detail = json!({"verdict": ell.status, "min_sv": ell.min_sv, "spec_hash": spec.spec_hash()});
    let mut rows = vec![row(name.clone(), "ellipticity", row_status(verdict_status(&ell)), ell_detail)];
    if ell.status != Verdict::Elliptic {
        rows.push(row(name, "index_equality", RowStatus::Skipped, json!("operator is not certified elliptic")));
        return rows;
    }
    match equality(&spec, cfg) {
        Ok((v, s)) => rows.push(row(name, "index_equality", row_status(s), v)),
        Err(e) => rows.push(row(name, "index_equality", RowStatus::Error, json!(e.to_string()))),
    }
    rows
}

/// One row per spec per check over the corpus directory, with summary counts.
pub fn corpus(cfg: &RunConfig) -> Result<(Value, RunStatus)> {
    let dir = cfg.corpus_dir.clone().unwrap_or_else(default_corpus_dir);
    let rows: Vec<CorpusRow> = corpus_files(&dir)?.iter().flat_map(|p| corpus_rows(p, cfg)).collect();
    let count = |s: RowStatus| rows.iter().filter(|r| r.status == s).count();
    let summary = json!({
        "rows": rows.len(),
        "pass": count(RowStatus::Pass),
        "fail": count(RowStatus::Fail),
        "inconclusive": count(RowStatus::Inconclusive),
        "skipped": count(RowStatus::Skipped),
        "error": count(RowStatus::Error),
    });
    let status = if count(RowStatus::Fail) + count(RowStatus::Error) > 0 {
        RunStatus::Failed
    } else if count(RowStatus::Inconclusive) > 0 {
        RunStatus::Inconclusive
    } else {
        RunStatus::Conclusive
    };
    Ok((json!({"summary": summary, "rows": rows}), status))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_config_fields_are_rejected() {
        assert!(RunConfig::from_json_str(r#"{"command": "index", "spec": "a.json", "bogus": 1}"#).is_err());
        let c = RunConfig::from_json_str(r#"{"command": "uniformize-verify", "spec": "a.json", "K": 8}"#).unwrap();
        assert_eq!(c.k, Some(8));
    }

    #[test]
    fn caps_are_enforced() {
        let mut c = RunConfig::new(Command::Index);
        c.spec = Some("x.json".into());
        c.k = Some(MAX_K + 1);
        assert!(c.validate().is_err());
        c.k = Some(8);
        c.validate().unwrap();
        c.spec = None;
        assert!(c.validate().is_err());
    }

    #[test]
    fn missing_spec_is_an_error_report() {
        let mut c = RunConfig::new(Command::Index);
        c.spec = Some("/nonexistent/spec.json".into());
        let r = execute(&c);
        assert_eq!(r.status, RunStatus::Error);
        assert_eq!(r.status.exit_code(), 1);
    }
}
