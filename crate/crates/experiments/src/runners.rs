//! One function per CLI subcommand. Each returns the CSV/SVG artifacts as
//! strings together with a [`RunRecord`]; nothing touches the filesystem
//! until [`RunOutput::write_to`].

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use twodisk::images::{
    reference_flux, relative_l2_error, relative_linf_error, standard_densities_from_series, ReferenceFlux,
};
use twodisk::singular::{self, stress_intensity};
use twodisk::solver::{assemble, rhs_augmented, rhs_standard, SingularCoefficient, SvdDiagnostics};
use twodisk::{
    AssembledSystem, BoundaryDensity, BoundaryGrid, Conductivity, CrossQuadrature, Discretization, DiskId, Mode,
    SolutionField, TwoDiskConfig,
};

use crate::config::{ExperimentConfig, Method};
use crate::contour::{contour_levels, marching_squares, render_svg, CircleShape, SampledField};
use crate::record::{EntryRecord, FailureRecord, RunRecord};
use crate::Error;

pub const EPS_SWEEP_COLUMNS: [&str; 4] = ["eps", "M", "rel_err_standard", "rel_err_augmented"];
pub const GRID_SWEEP_COLUMNS: [&str; 7] = [
    "M",
    "rel_l2_std",
    "rel_l2_aug",
    "rel_inf_std",
    "rel_inf_aug",
    "argmax_node_std",
    "argmax_node_aug",
];
pub const CONDITION_COLUMNS: [&str; 4] = ["eps", "sigma_min", "sigma_max", "cond"];
pub const SPECTRUM_COLUMNS: [&str; 2] = ["index", "sigma"];
pub const PROJECTION_COLUMNS: [&str; 6] = [
    "rank_from_smallest",
    "sigma",
    "proj_rhs_std",
    "proj_rhs_aug",
    "proj_res_std",
    "proj_res_aug",
];
pub const FIELD_COLUMNS: [&str; 4] = ["x1", "x2", "u", "masked"];
pub const BOUNDARY_COLUMNS: [&str; 13] = [
    "eps",
    "M",
    "method",
    "conductivity",
    "H",
    "disk",
    "node",
    "theta",
    "x1",
    "x2",
    "density",
    "flux",
    "u",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    SweepEps,
    SweepGrid,
    Condition,
    Projections,
    Levels,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::SweepEps => "sweep-eps",
            Command::SweepGrid => "sweep-grid",
            Command::Condition => "condition",
            Command::Projections => "projections",
            Command::Levels => "levels",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: &'static str,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    pub artifacts: Vec<Artifact>,
}

impl RunOutput {
    pub fn artifact(&self, name: &str) -> Option<&str> {
        self.artifacts
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.contents.as_str())
    }

    /// Writes every artifact plus `record.json` into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<(), Error> {
        std::fs::create_dir_all(dir)?;
        for a in &self.artifacts {
            std::fs::write(dir.join(a.name), &a.contents)?;
        }
        std::fs::write(dir.join("record.json"), self.record.to_json()?)?;
        Ok(())
    }
}

pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<RunOutput, Error> {
    match command {
        Command::Solve => run_solve(cfg),
        Command::SweepEps => run_eps_error_sweep(cfg),
        Command::SweepGrid => run_grid_error_sweep(cfg),
        Command::Condition => run_condition_sweep(cfg),
        Command::Projections => run_projection_study(cfg),
        Command::Levels => run_level_curves(cfg),
    }
}

fn discretization(cfg: &ExperimentConfig, m: usize) -> Discretization {
    Discretization::new(m)
        .with_layout(cfg.layout)
        .with_quadrature(cfg.quadrature)
}

fn require_perfect(cfg: &ExperimentConfig, what: &str) -> Result<(), Error> {
    if cfg.conductivity != Conductivity::Perfect {
        return Err(Error::Usage(format!(
            "{what} needs the series reference, which exists only for perfect conductors"
        )));
    }
    Ok(())
}

fn single<T: Copy>(values: &[T], key: &str, command: Command) -> Result<T, Error> {
    match values {
        [v] => Ok(*v),
        _ => Err(Error::Usage(format!(
            "`{}` takes a single `{key}` value",
            command.name()
        ))),
    }
}

fn grids_of(system: &AssembledSystem) -> [Arc<BoundaryGrid>; 2] {
    [system.grid(DiskId::First).clone(), system.grid(DiskId::Second).clone()]
}

/// Series reference for the configured background on the given grids.
pub fn oracle(
    cfg: &ExperimentConfig,
    config: &TwoDiskConfig,
    grids: &[Arc<BoundaryGrid>; 2],
) -> Result<(f64, ReferenceFlux), Error> {
    let a = stress_intensity(config, &cfg.background).a_perfect;
    let reference = reference_flux(config, &cfg.background, a, grids, cfg.series_tol, cfg.series_max_terms)?;
    Ok((a, reference))
}

fn densities(grids: &[Arc<BoundaryGrid>; 2], values: &[Vec<f64>; 2]) -> Result<[BoundaryDensity; 2], Error> {
    Ok([
        BoundaryDensity::new(grids[0].clone(), values[0].clone())?,
        BoundaryDensity::new(grids[1].clone(), values[1].clone())?,
    ])
}

pub fn fluxes(field: &SolutionField) -> Result<[Vec<f64>; 2], Error> {
    Ok([
        field.boundary_flux(DiskId::First)?,
        field.boundary_flux(DiskId::Second)?,
    ])
}

/// Largest `|∇u|` over equally spaced points of the shortest segment
/// between the circles, endpoints included, using exterior limits.
pub fn max_gap_gradient(field: &SolutionField, samples: usize) -> Result<f64, Error> {
    let (a, b) = field.config().gap_segment();
    let n = samples.max(2) - 1;
    (0..=n).try_fold(0.0f64, |best, k| {
        let x = a + (b - a) * (k as f64 / n as f64);
        Ok(best.max(field.eval_grad_u_spectral(x)?.norm()))
    })
}

/// The field described by `cfg.method` at one geometry; the oracle is the
/// series solution wrapped as an augmented representation.
pub fn build_field(
    cfg: &ExperimentConfig,
    config: &TwoDiskConfig,
    m: usize,
    entry: &mut EntryRecord,
) -> Result<SolutionField, Error> {
    match cfg.method {
        Method::Standard | Method::Augmented => {
            let mode = if cfg.method == Method::Standard {
                Mode::Standard
            } else {
                Mode::Augmented
            };
            let (field, report) =
                SolutionField::solve(config, &cfg.background, discretization(cfg, m), cfg.conductivity, mode)?;
            entry.set("relative_residual", report.relative_residual);
            Ok(field)
        }
        Method::Oracle => {
            require_perfect(cfg, "the oracle method")?;
            let grids = BoundaryGrid::pair(config, m, cfg.layout)?;
            let (a, reference) = oracle(cfg, config, &grids)?;
            entry.series = Some((&reference.series.report).into());
            Ok(SolutionField::from_densities(
                config.clone(),
                cfg.background.clone(),
                Conductivity::Perfect,
                Mode::Augmented,
                a,
                densities(&grids, &reference.series.psi)?,
            )
            .with_cross_quadrature(CrossQuadrature::Interpolatory))
        }
    }
}

struct Sweep<T> {
    entries: Vec<EntryRecord>,
    results: Vec<Option<T>>,
    failures: Vec<FailureRecord>,
    warnings: Vec<String>,
}

fn sweep<T: Send>(
    jobs: &[(f64, usize)],
    job: impl Fn(f64, usize, &mut EntryRecord) -> Result<T, Error> + Sync,
) -> Sweep<T> {
    let outcomes: Vec<(EntryRecord, Result<T, Error>)> = jobs
        .par_iter()
        .map(|&(eps, m)| {
            let start = Instant::now();
            let mut entry = EntryRecord::new(eps, m);
            let result = job(eps, m, &mut entry);
            entry.seconds = start.elapsed().as_secs_f64();
            (entry, result)
        })
        .collect();

    let mut out = Sweep {
        entries: Vec::new(),
        results: Vec::new(),
        failures: Vec::new(),
        warnings: Vec::new(),
    };
    for (index, (entry, result)) in outcomes.into_iter().enumerate() {
        if let Some(s) = entry.series.as_ref().filter(|s| s.truncated) {
            out.warnings.push(format!(
                "series truncated at eps = {}, M = {} after {:?} terms (tail ratio {:?})",
                entry.eps, entry.m, s.terms, s.tail_ratio
            ));
        }
        match result {
            Ok(v) => out.results.push(Some(v)),
            Err(e) => {
                out.failures.push(FailureRecord {
                    index,
                    eps: entry.eps,
                    m: entry.m,
                    message: e.to_string(),
                });
                out.results.push(None);
            }
        }
        out.entries.push(entry);
    }
    out
}

fn write_csv<R: Serialize>(columns: &[&str], rows: &[R]) -> Result<String, Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(columns)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn record<T>(command: Command, cfg: &ExperimentConfig, sweep: &Sweep<T>, start: Instant) -> RunRecord {
    RunRecord {
        command: command.name().to_owned(),
        inputs: cfg.clone(),
        entries: sweep.entries.clone(),
        failures: sweep.failures.clone(),
        warnings: sweep.warnings.clone(),
        seconds: start.elapsed().as_secs_f64(),
    }
}

#[derive(Debug, Clone, Serialize)]
struct EpsRow {
    eps: f64,
    m: usize,
    rel_err_standard: Option<f64>,
    rel_err_augmented: Option<f64>,
}

/// Standard and augmented flux errors against the series reference for
/// every `(M, ε)` pair, `M` outermost.
pub fn run_eps_error_sweep(cfg: &ExperimentConfig) -> Result<RunOutput, Error> {
    require_perfect(cfg, "sweep-eps")?;
    let start = Instant::now();
    let jobs: Vec<(f64, usize)> = cfg
        .m
        .iter()
        .flat_map(|&m| cfg.eps.iter().map(move |&e| (e, m)))
        .collect();
    let sweep = sweep(&jobs, |eps, m, entry| {
        let config = cfg.geometry(eps)?;
        let system = assemble(&config, discretization(cfg, m), Conductivity::Perfect)?;
        let (std, rs) = SolutionField::solve_system(&system, &cfg.background, Mode::Standard, false)?;
        let (aug, ra) = SolutionField::solve_system(&system, &cfg.background, Mode::Augmented, false)?;
        let (a, reference) = oracle(cfg, &config, &grids_of(&system))?;
        entry.series = Some((&reference.series.report).into());
        let r = [reference.flux[0].as_slice(), reference.flux[1].as_slice()];
        let (fs, fa) = (fluxes(&std)?, fluxes(&aug)?);
        let es = relative_l2_error([&fs[0], &fs[1]], r)?;
        let ea = relative_l2_error([&fa[0], &fa[1]], r)?;
        entry.set("rel_err_standard", es);
        entry.set("rel_err_augmented", ea);
        entry.set("a_perfect", a);
        entry.set("residual_standard", rs.relative_residual);
        entry.set("residual_augmented", ra.relative_residual);
        Ok((es, ea))
    });
    let rows: Vec<EpsRow> = jobs
        .iter()
        .zip(&sweep.results)
        .map(|(&(eps, m), r)| EpsRow {
            eps,
            m,
            rel_err_standard: r.map(|v| v.0),
            rel_err_augmented: r.map(|v| v.1),
        })
        .collect();
    Ok(RunOutput {
        artifacts: vec![Artifact {
            name: "eps_sweep.csv",
            contents: write_csv(&EPS_SWEEP_COLUMNS, &rows)?,
        }],
        record: record(Command::SweepEps, cfg, &sweep, start),
    })
}

#[derive(Debug, Clone, Serialize)]
struct GridRow {
    m: usize,
    rel_l2_std: Option<f64>,
    rel_l2_aug: Option<f64>,
    rel_inf_std: Option<f64>,
    rel_inf_aug: Option<f64>,
    argmax_node_std: Option<usize>,
    argmax_node_aug: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
struct GridResult {
    l2: [f64; 2],
    inf: [f64; 2],
    argmax: [usize; 2],
}

/// Node of largest absolute deviation over both circles, numbered
/// `0..M` on disk 1 and `M..2M` on disk 2.
pub fn global_argmax(a: &[Vec<f64>; 2], b: &[Vec<f64>; 2]) -> usize {
    let m = a[0].len();
    (0..2)
        .flat_map(|j| (0..m).map(move |k| (j * m + k, (a[j][k] - b[j][k]).abs())))
        .fold((0, -1.0), |best, (i, d)| if d > best.1 { (i, d) } else { best })
        .0
}

/// Errors against the series reference for each `M` at a fixed `ε`.
pub fn run_grid_error_sweep(cfg: &ExperimentConfig) -> Result<RunOutput, Error> {
    require_perfect(cfg, "sweep-grid")?;
    let eps = single(&cfg.eps, "eps", Command::SweepGrid)?;
    let start = Instant::now();
    let jobs: Vec<(f64, usize)> = cfg.m.iter().map(|&m| (eps, m)).collect();
    let sweep = sweep(&jobs, |eps, m, entry| {
        let config = cfg.geometry(eps)?;
        let system = assemble(&config, discretization(cfg, m), Conductivity::Perfect)?;
        let (std, _) = SolutionField::solve_system(&system, &cfg.background, Mode::Standard, false)?;
        let (aug, _) = SolutionField::solve_system(&system, &cfg.background, Mode::Augmented, false)?;
        let (_, reference) = oracle(cfg, &config, &grids_of(&system))?;
        entry.series = Some((&reference.series.report).into());
        let r = [reference.flux[0].as_slice(), reference.flux[1].as_slice()];
        let mut out = GridResult {
            l2: [0.0; 2],
            inf: [0.0; 2],
            argmax: [0; 2],
        };
        for (k, field) in [std, aug].iter().enumerate() {
            let f = fluxes(field)?;
            out.l2[k] = relative_l2_error([&f[0], &f[1]], r)?;
            out.inf[k] = relative_linf_error([&f[0], &f[1]], r)?.0;
            out.argmax[k] = global_argmax(&f, &reference.flux);
        }
        for (k, name) in ["std", "aug"].iter().enumerate() {
            entry.set(&format!("rel_l2_{name}"), out.l2[k]);
            entry.set(&format!("rel_inf_{name}"), out.inf[k]);
            entry.set(&format!("argmax_node_{name}"), out.argmax[k] as f64);
        }
        Ok(out)
    });
    let rows: Vec<GridRow> = jobs
        .iter()
        .zip(&sweep.results)
        .map(|(&(_, m), r)| GridRow {
            m,
            rel_l2_std: r.map(|v| v.l2[0]),
            rel_l2_aug: r.map(|v| v.l2[1]),
            rel_inf_std: r.map(|v| v.inf[0]),
            rel_inf_aug: r.map(|v| v.inf[1]),
            argmax_node_std: r.map(|v| v.argmax[0]),
            argmax_node_aug: r.map(|v| v.argmax[1]),
        })
        .collect();
    Ok(RunOutput {
        artifacts: vec![Artifact {
            name: "grid_sweep.csv",
            contents: write_csv(&GRID_SWEEP_COLUMNS, &rows)?,
        }],
        record: record(Command::SweepGrid, cfg, &sweep, start),
    })
}

#[derive(Debug, Clone, Serialize)]
struct ConditionRow {
    eps: f64,
    sigma_min: Option<f64>,
    sigma_max: Option<f64>,
    cond: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct SpectrumRow {
    index: usize,
    sigma: f64,
}

/// Extreme singular values of the system matrix along the `ε` list, plus
/// the full spectrum at `spectrum_eps` (the last record entry).
pub fn run_condition_sweep(cfg: &ExperimentConfig) -> Result<RunOutput, Error> {
    let m = single(&cfg.m, "m", Command::Condition)?;
    let start = Instant::now();
    let mut jobs: Vec<(f64, usize)> = cfg.eps.iter().map(|&e| (e, m)).collect();
    jobs.push((cfg.spectrum_eps, m));
    let sweep = sweep(&jobs, |eps, m, entry| {
        let config = cfg.geometry(eps)?;
        let system = assemble(&config, discretization(cfg, m), cfg.conductivity)?;
        let svd = SvdDiagnostics::new(system.matrix())?;
        entry.set("sigma_min", svd.sigma_min());
        entry.set("sigma_max", svd.sigma_max());
        entry.set("cond", svd.condition_number());
        Ok(svd)
    });
    let n = cfg.eps.len();
    let rows: Vec<ConditionRow> = jobs[..n]
        .iter()
        .zip(&sweep.results[..n])
        .map(|(&(eps, _), r)| ConditionRow {
            eps,
            sigma_min: r.as_ref().map(|s| s.sigma_min()),
            sigma_max: r.as_ref().map(|s| s.sigma_max()),
            cond: r.as_ref().map(|s| s.condition_number()),
        })
        .collect();
    let spectrum: Vec<SpectrumRow> = sweep.results[n]
        .as_ref()
        .map(|s| {
            s.singular_values()
                .iter()
                .enumerate()
                .map(|(i, &sigma)| SpectrumRow { index: i + 1, sigma })
                .collect()
        })
        .unwrap_or_default();
    Ok(RunOutput {
        artifacts: vec![
            Artifact {
                name: "condition.csv",
                contents: write_csv(&CONDITION_COLUMNS, &rows)?,
            },
            Artifact {
                name: "singular_values.csv",
                contents: write_csv(&SPECTRUM_COLUMNS, &spectrum)?,
            },
        ],
        record: record(Command::Condition, cfg, &sweep, start),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionRow {
    pub rank_from_smallest: usize,
    pub sigma: f64,
    pub proj_rhs_std: f64,
    pub proj_rhs_aug: f64,
    pub proj_res_std: f64,
    pub proj_res_aug: f64,
}

/// Projections of both right-hand sides, and of the residuals left when
/// the series densities are substituted into each system, onto the left
/// singular vectors of the smallest singular values.
pub fn projection_rows(
    cfg: &ExperimentConfig,
    eps: f64,
    m: usize,
    entry: &mut EntryRecord,
) -> Result<Vec<ProjectionRow>, Error> {
    require_perfect(cfg, "projections")?;
    let config = cfg.geometry(eps)?;
    let system = assemble(&config, discretization(cfg, m), Conductivity::Perfect)?;
    let coefficient = SingularCoefficient::closed_form(&config, &cfg.background, Conductivity::Perfect);
    let rhs_std = rhs_standard(&system, &cfg.background);
    let rhs_aug = rhs_augmented(&system, &cfg.background, coefficient)?;
    let grids = grids_of(&system);
    let (a, reference) = oracle(cfg, &config, &grids)?;
    entry.series = Some((&reference.series.report).into());
    let psi = &reference.series.psi;
    let phi = standard_densities_from_series(&config, a, &grids, psi)?;
    let x_std = AssembledSystem::stack(&densities(&grids, &phi)?);
    let x_aug = AssembledSystem::stack(&densities(&grids, psi)?);
    let res_std = system.matrix() * x_std - &rhs_std;
    let res_aug = system.matrix() * x_aug - &rhs_aug;

    let svd = SvdDiagnostics::new(system.matrix())?;
    let count = cfg.projections.min(2 * m);
    let p = |v| svd.projections(v, count);
    let (ps, pa, qs, qa) = (p(&rhs_std), p(&rhs_aug), p(&res_std), p(&res_aug));
    let rows: Vec<ProjectionRow> = (0..count)
        .map(|k| ProjectionRow {
            rank_from_smallest: k + 1,
            sigma: ps[k].0,
            proj_rhs_std: ps[k].1,
            proj_rhs_aug: pa[k].1,
            proj_res_std: qs[k].1,
            proj_res_aug: qa[k].1,
        })
        .collect();
    let fraction = |f: fn(&ProjectionRow) -> bool| rows.iter().filter(|r| f(r)).count() as f64 / count.max(1) as f64;
    entry.set("a_perfect", a);
    entry.set("fraction_rhs_aug_below", fraction(|r| r.proj_rhs_aug < r.proj_rhs_std));
    entry.set("fraction_res_aug_below", fraction(|r| r.proj_res_aug < r.proj_res_std));
    Ok(rows)
}

pub fn run_projection_study(cfg: &ExperimentConfig) -> Result<RunOutput, Error> {
    require_perfect(cfg, "projections")?;
    let eps = single(&cfg.eps, "eps", Command::Projections)?;
    let m = single(&cfg.m, "m", Command::Projections)?;
    let start = Instant::now();
    let sweep = sweep(&[(eps, m)], |eps, m, entry| projection_rows(cfg, eps, m, entry));
    let rows = sweep.results[0].clone().unwrap_or_default();
    Ok(RunOutput {
        artifacts: vec![Artifact {
            name: "projections.csv",
            contents: write_csv(&PROJECTION_COLUMNS, &rows)?,
        }],
        record: record(Command::Projections, cfg, &sweep, start),
    })
}

#[derive(Debug, Clone, Serialize)]
struct FieldRow {
    x1: f64,
    x2: f64,
    u: Option<f64>,
    masked: u8,
}

/// `true` inside either disk or within that disk's near-boundary margin,
/// where the trapezoid evaluation of the layer potentials is refused.
pub fn is_masked(field: &SolutionField, x: twodisk::Vec2) -> bool {
    DiskId::BOTH.iter().any(|&id| {
        let grid = field.density(id).grid();
        grid.disk().signed_distance(x) < grid.margin()
    })
}

pub fn sample_field(cfg: &ExperimentConfig, field: &SolutionField) -> Result<SampledField, Error> {
    let bbox = cfg.bounding_box(field.config().eps());
    let (nx, ny) = cfg.resolution;
    let values = (0..nx * ny)
        .into_par_iter()
        .map(|i| {
            let (x, y) = SampledField::point(&bbox, nx, ny, i % nx, i / nx);
            let p = twodisk::Vec2::new(x, y);
            if is_masked(field, p) {
                Ok(None)
            } else {
                Ok(Some(field.eval_u(p)?))
            }
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(SampledField { bbox, nx, ny, values })
}

/// Samples `u` on the bounding box and draws uniformly spaced level curves.
pub fn run_level_curves(cfg: &ExperimentConfig) -> Result<RunOutput, Error> {
    let eps = single(&cfg.eps, "eps", Command::Levels)?;
    let m = single(&cfg.m, "m", Command::Levels)?;
    let start = Instant::now();
    let sweep = sweep(&[(eps, m)], |eps, m, entry| {
        let config = cfg.geometry(eps)?;
        let field = build_field(cfg, &config, m, entry)?;
        let sampled = sample_field(cfg, &field)?;
        let (lo, hi) = sampled
            .range()
            .ok_or_else(|| Error::Usage("every pixel is masked".into()))?;
        let contours: Vec<(f64, Vec<_>)> = contour_levels(lo, hi, cfg.contours)
            .into_par_iter()
            .map(|level| (level, marching_squares(&sampled, level)))
            .collect();
        entry.set("u_min", lo);
        entry.set("u_max", hi);
        entry.set("masked", sampled.values.iter().filter(|v| v.is_none()).count() as f64);
        entry.set("segments", contours.iter().map(|c| c.1.len()).sum::<usize>() as f64);
        let disks: Vec<CircleShape> = [config.disk1(), config.disk2()]
            .iter()
            .map(|d| CircleShape {
                center: (d.center().x, d.center().y),
                radius: d.radius(),
            })
            .collect();
        let svg = render_svg(&sampled.bbox, &disks, &contours);
        Ok((sampled, svg))
    });
    let (rows, svg) = match &sweep.results[0] {
        Some((sampled, svg)) => {
            let rows: Vec<FieldRow> = (0..sampled.values.len())
                .map(|i| {
                    let (x1, x2) =
                        SampledField::point(&sampled.bbox, sampled.nx, sampled.ny, i % sampled.nx, i / sampled.nx);
                    let u = sampled.values[i];
                    FieldRow {
                        x1,
                        x2,
                        u,
                        masked: u8::from(u.is_none()),
                    }
                })
                .collect();
            (rows, svg.clone())
        }
        None => (Vec::new(), String::new()),
    };
    let mut artifacts = vec![Artifact {
        name: "field.csv",
        contents: write_csv(&FIELD_COLUMNS, &rows)?,
    }];
    if !svg.is_empty() {
        artifacts.push(Artifact {
            name: "contours.svg",
            contents: svg,
        });
    }
    Ok(RunOutput {
        artifacts,
        record: record(Command::Levels, cfg, &sweep, start),
    })
}

#[derive(Debug, Clone, Serialize)]
struct BoundaryRow {
    eps: f64,
    m: usize,
    method: String,
    conductivity: &'static str,
    h: String,
    disk: usize,
    node: usize,
    theta: f64,
    x1: f64,
    x2: f64,
    density: f64,
    flux: f64,
    u: f64,
}

/// Boundary densities, fluxes and traces for every `(M, ε)` pair, with
/// intensities, boundary constants and the gap gradient in the record.
pub fn run_solve(cfg: &ExperimentConfig) -> Result<RunOutput, Error> {
    let start = Instant::now();
    let jobs: Vec<(f64, usize)> = cfg
        .m
        .iter()
        .flat_map(|&m| cfg.eps.iter().map(move |&e| (e, m)))
        .collect();
    let conductivity = match cfg.conductivity {
        Conductivity::Perfect => "perfect",
        Conductivity::Insulated => "insulated",
    };
    let h_text = cfg.background.to_string();
    let sweep = sweep(&jobs, |eps, m, entry| {
        let config = cfg.geometry(eps)?;
        let field = build_field(cfg, &config, m, entry)?;
        let intensity = stress_intensity(&config, &cfg.background);
        entry.set("a_perfect", intensity.a_perfect);
        entry.set("a_insulated", intensity.a_insulated);
        entry.set("max_gap_gradient", max_gap_gradient(&field, 51)?);
        if cfg.conductivity == Conductivity::Perfect {
            let [l1, l2] = field.boundary_constants()?;
            let h_jump = singular::h(&config, config.disk2().point_at(0.0))?
                - singular::h(&config, config.disk1().point_at(0.0))?;
            entry.set("lambda_1", l1);
            entry.set("lambda_2", l2);
            entry.set("potential_difference", l2 - l1);
            entry.set(
                "potential_difference_closed_form",
                singular::potential_difference(&config, &cfg.background),
            );
            entry.set("decomposition_ratio", (l2 - l1) / h_jump);
        }
        let mut rows = Vec::new();
        for id in DiskId::BOTH {
            let density = field.density(id);
            let grid = density.grid();
            let flux = field.boundary_flux(id)?;
            let u = field.boundary_values(id)?;
            for k in 0..grid.len() {
                rows.push(BoundaryRow {
                    eps,
                    m,
                    method: cfg.method.to_string(),
                    conductivity,
                    h: h_text.clone(),
                    disk: id.index() + 1,
                    node: k,
                    theta: grid.angles()[k],
                    x1: grid.nodes()[k].x,
                    x2: grid.nodes()[k].y,
                    density: density.values()[k],
                    flux: flux[k],
                    u: u[k],
                });
            }
        }
        Ok(rows)
    });
    let rows: Vec<BoundaryRow> = sweep.results.iter().flatten().flatten().cloned().collect();
    Ok(RunOutput {
        artifacts: vec![Artifact {
            name: "boundary.csv",
            contents: write_csv(&BOUNDARY_COLUMNS, &rows)?,
        }],
        record: record(Command::Solve, cfg, &sweep, start),
    })
}
