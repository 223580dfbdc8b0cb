//! Mode dispatch and artifact writing.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gbec::basis::BasisSpec;
use gbec::fluct::{spectrum, SpectrumInput, SpectrumRow};
use gbec::gpe::{collapse_threshold, solve_effective, ScanRow, Threshold};
use gbec::ground::{solve_ground, Phase};
use gbec::gstate::{extract_squeezed_mode, width, GaussianState, QuadratureInteraction, StateSnapshot};
use gbec::tof::{default_extent, expansion_table, mode_profile, TofRow};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, Mode, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("configuration error: {0}")]
    Config(String),
}

/// One ground-state solve of a sweep.
#[derive(Clone, Debug, Serialize)]
pub struct GroundRow {
    #[serde(rename = "a_s_over_aho_times_N")]
    pub na_s: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "Nc_over_N")]
    pub condensate_fraction: f64,
    #[serde(rename = "E_per_N")]
    pub e_per_n: f64,
    pub mu: f64,
    #[serde(rename = "W")]
    pub w: f64,
    pub phase: String,
    pub converged: bool,
    pub collapsed: bool,
    pub steps: usize,
    pub error: String,
}

/// Files written by a run.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Points whose solve failed; recorded in the sidecars as well.
    pub failures: Vec<String>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    config: &'a RunConfig,
    version: &'static str,
    n_cut: usize,
    wall_time_s: f64,
    rows: usize,
    failures: &'a [String],
}

struct Writer<'a> {
    cfg: &'a RunConfig,
    start: Instant,
    summary: RunSummary,
}

impl Writer<'_> {
    fn io(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
        move |source| RunError::Io { path: path.to_path_buf(), source }
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8], rows: usize) -> Result<(), RunError> {
        let path = self.cfg.out_dir.join(name);
        fs::write(&path, bytes).map_err(Self::io(&path))?;
        let side = Sidecar {
            config: self.cfg,
            version: env!("CARGO_PKG_VERSION"),
            n_cut: self.cfg.n_cut,
            wall_time_s: self.start.elapsed().as_secs_f64(),
            rows,
            failures: &self.summary.failures,
        };
        let side_path = self.cfg.out_dir.join(format!("{name}.meta.json"));
        let text = serde_json::to_string_pretty(&side).expect("sidecar serializes");
        fs::write(&side_path, text).map_err(Self::io(&side_path))?;
        self.summary.files.push(path);
        self.summary.files.push(side_path);
        Ok(())
    }

    fn table<R: Serialize>(&mut self, stem: &str, rows: &[R]) -> Result<(), RunError> {
        let (name, bytes) = match self.cfg.format {
            Format::Csv => {
                let mut out = csv::Writer::from_writer(Vec::new());
                for r in rows {
                    out.serialize(r).map_err(|e| RunError::Config(e.to_string()))?;
                }
                (format!("{stem}.csv"), out.into_inner().expect("in-memory writer"))
            }
            Format::Json => {
                let text = serde_json::to_string_pretty(rows).expect("rows serialize");
                (format!("{stem}.json"), text.into_bytes())
            }
        };
        self.write_bytes(&name, &bytes, rows.len())
    }
}

fn ground_row(cfg: &RunConfig, na_s: f64, out: &gbec::Result<(GaussianState<f64>, gbec::ground::ConvergenceReport)>) -> GroundRow {
    match out {
        Ok((state, rep)) => GroundRow {
            na_s,
            n: rep.n,
            condensate_fraction: state.particle_numbers().0 / rep.n,
            e_per_n: rep.e / rep.n,
            mu: rep.mu,
            w: width(state, true).unwrap_or(f64::NAN),
            phase: rep.phase.to_string(),
            converged: rep.converged,
            collapsed: rep.collapsed,
            steps: rep.steps,
            error: String::new(),
        },
        Err(e) => GroundRow {
            na_s,
            n: cfg.n,
            condensate_fraction: f64::NAN,
            e_per_n: f64::NAN,
            mu: f64::NAN,
            w: f64::NAN,
            phase: String::new(),
            converged: false,
            collapsed: matches!(e, gbec::GbecError::Collapse { .. }),
            steps: 0,
            error: e.to_string(),
        },
    }
}

fn solve_point(cfg: &RunConfig, spec: BasisSpec, na_s: f64) -> (QuadratureInteraction, gbec::Result<(GaussianState<f64>, gbec::ground::ConvergenceReport)>) {
    let inter = QuadratureInteraction::new(spec, na_s / cfg.n);
    let out = solve_ground(&cfg.solver, &inter);
    (inter, out)
}

fn note_failures(rows: &[GroundRow], summary: &mut RunSummary) {
    for r in rows {
        if !r.error.is_empty() {
            summary.failures.push(format!("na_s = {}: {}", r.na_s, r.error));
        } else if r.collapsed {
            summary.failures.push(format!("na_s = {}: collapse", r.na_s));
        } else if !r.converged {
            summary.failures.push(format!("na_s = {}: not converged after {} steps", r.na_s, r.steps));
        }
    }
}

/// Runs `cfg` on a worker pool of `jobs` threads (all cores when `None`).
pub fn run(cfg: &RunConfig, jobs: Option<usize>) -> Result<RunSummary, RunError> {
    cfg.validate().map_err(|e| RunError::Config(e.to_string()))?;
    fs::create_dir_all(&cfg.out_dir).map_err(Writer::io(&cfg.out_dir))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| RunError::Config(e.to_string()))?;
    let mut w = Writer { cfg, start: Instant::now(), summary: RunSummary::default() };
    pool.install(|| dispatch(cfg, &mut w))?;
    Ok(w.summary)
}

fn dispatch(cfg: &RunConfig, w: &mut Writer<'_>) -> Result<(), RunError> {
    let spec = BasisSpec::new(cfg.n_cut, cfg.l_max).map_err(|e| RunError::Config(e.to_string()))?;
    match cfg.mode {
        Mode::Ground => {
            let solved: Vec<_> = cfg.na_s.par_iter().map(|&k| solve_point(cfg, spec, k)).collect();
            let rows: Vec<GroundRow> = cfg.na_s.iter().zip(&solved).map(|(&k, (_, o))| ground_row(cfg, k, o)).collect();
            note_failures(&rows, &mut w.summary);
            for (i, (&k, (_, out))) in cfg.na_s.iter().zip(&solved).enumerate() {
                if let Ok((state, _)) = out {
                    let snap = StateSnapshot::from_state(state, k / cfg.n).to_json().expect("snapshot serializes");
                    w.write_bytes(&format!("state_{i}.json"), snap.as_bytes(), 1)?;
                }
            }
            w.table("ground", &rows)
        }
        Mode::Sweep => {
            let rows: Vec<GroundRow> = cfg.na_s.par_iter().map(|&k| ground_row(cfg, k, &solve_point(cfg, spec, k).1)).collect();
            note_failures(&rows, &mut w.summary);
            if cfg.gpe {
                let radial = BasisSpec::new(cfg.n_cut, 0).expect("validated basis");
                let jobs: Vec<(f64, f64)> = [1.0, 3.0].iter().flat_map(|&u| cfg.na_s.iter().map(move |&k| (u, k))).collect();
                let scan: Vec<ScanRow> = jobs
                    .par_iter()
                    .map(|&(u, k)| {
                        let a = k / cfg.n;
                        ScanRow::from_outcome(cfg.n, a, u, &solve_effective(cfg.n, a, u, &radial))
                    })
                    .collect();
                w.table("scan", &scan)?;
            }
            w.table("sweep", &rows)
        }
        Mode::Spectrum => {
            let per_point: Vec<Result<Vec<SpectrumRow>, String>> = cfg
                .na_s
                .par_iter()
                .map(|&k| {
                    let (inter, out) = solve_point(cfg, spec, k);
                    let (state, rep) = out.map_err(|e| format!("na_s = {k}: {e}"))?;
                    if rep.collapsed {
                        return Err(format!("na_s = {k}: collapse"));
                    }
                    let modes = spectrum(&SpectrumInput { ground: &state, inter: &inter }, &cfg.sectors)
                        .map_err(|e| format!("na_s = {k}: {e}"))?;
                    Ok(modes.iter().flatten().map(|m| SpectrumRow::new(k, &m.record)).collect())
                })
                .collect();
            let mut rows = Vec::new();
            for p in per_point {
                match p {
                    Ok(r) => rows.extend(r),
                    Err(e) => w.summary.failures.push(e),
                }
            }
            w.table("spectrum", &rows)
        }
        Mode::Tof => {
            let k = cfg.na_s[0];
            let rows: Result<Vec<TofRow>, String> = (|| {
                let (_, out) = solve_point(cfg, spec, k);
                let (state, rep) = out.map_err(|e| e.to_string())?;
                if rep.phase != Phase::Ssc {
                    return Err(format!("ground state is {}, not a squeezed condensate", rep.phase));
                }
                let mode = extract_squeezed_mode(&state).map_err(|e| e.to_string())?;
                let f = mode_profile(&spec, &mode.f).map_err(|e| e.to_string())?;
                expansion_table(f, default_extent(&spec), state.total_number(), &cfg.times).map_err(|e| e.to_string())
            })();
            let rows = rows.unwrap_or_else(|e| {
                w.summary.failures.push(format!("na_s = {k}: {e}"));
                Vec::new()
            });
            w.table("tof", &rows)
        }
        Mode::Threshold => {
            let radial = BasisSpec::new(cfg.n_cut, 0).expect("validated basis");
            let found: Vec<gbec::Result<Threshold>> =
                [1.0, 3.0].par_iter().map(|&u| collapse_threshold(u, &radial, cfg.resolution)).collect();
            let mut rows = Vec::new();
            for (u, t) in [1.0, 3.0].iter().zip(found) {
                match t {
                    Ok(t) => rows.push(t),
                    Err(e) => w.summary.failures.push(format!("u_mult = {u}: {e}")),
                }
            }
            w.table("threshold", &rows)
        }
    }
}
