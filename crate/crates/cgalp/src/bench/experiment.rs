//! End-to-end experiment execution: instance generation, reference
//! caching, measured runs with per-iteration criteria, CSV traces and a
//! JSON rate-fit summary.
//!
//! Reference solutions follow the long-run protocol: the same algorithm
//! is run for `ref_iters` iterations and its final variables are cached
//! and reused. Timing lives in the JSON summary only, so the CSV traces
//! are byte-identical across repeated runs of one configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::bench::cache::{self, CgalpReference, GfbReference};
use crate::bench::instances::{gen_matcomp_instance, gen_projection_instance};
use crate::bench::ratefit::{fit_rate, RateFit};
use crate::error::Error;
use crate::gfb::{gfb_bregman_criterion, gfb_step, GfbState};
use crate::linalg::DenseVector;
use crate::problem::CompositeProblem;
use crate::product::lift;
use crate::schedule::{validate_schedule, ParameterSchedule};
use crate::solver::{lagrangian, run, CallbackFlow};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Projection,
    Matcomp,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Projection => "projection",
            Experiment::Matcomp => "matcomp",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub density: f64,
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    pub rho: f64,
    pub c: f64,
    pub iters: usize,
    pub ref_iters: usize,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
    /// When false, a missing cached reference is an error instead of
    /// triggering a long reference solve.
    #[serde(skip)]
    pub allow_reference_solve: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::InvalidInput(format!("density {} outside (0, 1]", self.density)));
        }
        if self.iters > self.ref_iters {
            return Err(Error::InvalidInput(format!(
                "iters {} exceeds ref_iters {}",
                self.iters, self.ref_iters
            )));
        }
        let report = validate_schedule(&self.schedule(), None, 2.0);
        if !report.all_pass() {
            return Err(Error::InvalidInput(format!("inadmissible schedule:\n{report}")));
        }
        Ok(())
    }

    pub fn schedule(&self) -> ParameterSchedule {
        ParameterSchedule::new(self.a, self.b, self.delta, self.rho, self.c)
    }

    /// Stable identifier for file and cache names.
    pub fn key(&self, algo: &str) -> String {
        let mut k = format!("{}_{algo}_s{}", self.experiment.name(), self.seed);
        if self.experiment == Experiment::Matcomp {
            let _ = write!(k, "_n{}_d{}", self.n, self.density);
        }
        let _ = write!(
            k,
            "_a{}_b{}_del{}_rho{}_c{}_ref{}",
            self.a, self.b, self.delta, self.rho, self.c, self.ref_iters
        );
        k.replace(['.', '-'], "p")
    }
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub algo: String,
    pub csv: String,
    pub wall_time_s: f64,
    pub ref_wall_time_s: Option<f64>,
    pub fits: Vec<(String, RateFit)>,
}

#[derive(Debug, Serialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub runs: Vec<RunSummary>,
}

#[derive(Debug)]
pub struct ExperimentArtifacts {
    pub csv_paths: Vec<PathBuf>,
    pub summary_path: PathBuf,
    pub summary: ExperimentSummary,
}

/// A recorded CGALP trace row; `k` counts completed iterations, the
/// schedule columns are the values used by that iteration.
struct CgalpRow {
    k: usize,
    gamma: f64,
    beta: f64,
    feas_gap: f64,
    erg_feas_gap: f64,
    lagrangian_gap: f64,
    erg_lagrangian_gap: f64,
    mu_norm: f64,
}

const CGALP_HEADER: &str =
    "k,gamma_k,beta_k,feas_gap,erg_feas_gap,lagrangian_gap,erg_lagrangian_gap,mu_norm";
const GFB_HEADER: &str = "k,bregman_criterion,feas_nuc,feas_l1";

fn write_csv(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> Result<()> {
    let mut text = String::with_capacity(1 << 20);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn initial_point(p: &CompositeProblem<f64>) -> (DenseVector<f64>, DenseVector<f64>) {
    (p.h.a_feasible_point().clone(), DenseVector::zeros(p.a.out_dim()))
}

/// Load or compute the long-run reference for a composite problem.
fn cgalp_reference(
    p: &CompositeProblem<f64>,
    sched: &ParameterSchedule,
    cfg: &ExperimentConfig,
    cache_dir: &Path,
) -> Result<(CgalpReference, Option<f64>)> {
    let key = cfg.key("cgalp");
    if let Some(found) = cache::load::<CgalpReference>(cache_dir, &key)? {
        return Ok((found, None));
    }
    if !cfg.allow_reference_solve {
        return Err(Error::CacheMiss { key });
    }
    let t0 = Instant::now();
    let (x0, mu0) = initial_point(p);
    let res = run(p, sched, x0, mu0, cfg.ref_iters, |_, _| Ok(CallbackFlow::Continue))?;
    if let Some(reason) = res.stopped {
        return Err(Error::SolverAbort {
            iteration: res.state.k,
            reason: format!("reference solve stopped early: {reason:?}"),
        });
    }
    let reference = CgalpReference {
        x: res.state.x.as_slice().to_vec(),
        mu: res.state.mu.as_slice().to_vec(),
        ref_iters: cfg.ref_iters,
    };
    cache::store(cache_dir, &key, &reference)?;
    Ok((reference, Some(t0.elapsed().as_secs_f64())))
}

/// Measured pass: run `iters` iterations recording per-iteration criteria
/// against the reference pair.
fn cgalp_trace(
    p: &CompositeProblem<f64>,
    sched: &ParameterSchedule,
    iters: usize,
    reference: &CgalpReference,
) -> Result<Vec<CgalpRow>> {
    let x_star = DenseVector::from_f64_slice(&reference.x);
    let mu_star = DenseVector::from_f64_slice(&reference.mu);
    let l_star = lagrangian(p, &x_star, &mu_star)?;
    let mut rows = Vec::with_capacity(iters);
    let (x0, mu0) = initial_point(p);
    let res = run(p, sched, x0, mu0, iters, |st, trace| {
        let k_used = st.k - 1;
        let xbar = st.ergodic_feas().expect("at least one step taken");
        rows.push(CgalpRow {
            k: st.k,
            gamma: sched.gamma(k_used),
            beta: sched.beta(k_used),
            feas_gap: trace.feas_gap,
            erg_feas_gap: p.residual(&xbar).norm(),
            lagrangian_gap: lagrangian(p, &st.x, &mu_star)? - l_star,
            erg_lagrangian_gap: lagrangian(p, &xbar, &mu_star)? - l_star,
            mu_norm: st.mu.norm(),
        });
        Ok(CallbackFlow::Continue)
    })?;
    if let Some(reason) = res.stopped {
        return Err(Error::SolverAbort {
            iteration: res.state.k,
            reason: format!("measured run stopped early: {reason:?}"),
        });
    }
    Ok(rows)
}

fn cgalp_fits(rows: &[CgalpRow], iters: usize) -> Vec<(String, RateFit)> {
    let k_lo = (iters / 100).max(10);
    let mut fits = Vec::new();
    for (name, values) in [
        (
            "erg_lagrangian_gap",
            rows.iter().map(|r| (r.k, r.erg_lagrangian_gap)).collect::<Vec<_>>(),
        ),
        ("erg_feas_gap", rows.iter().map(|r| (r.k, r.erg_feas_gap)).collect()),
    ] {
        if let Ok(fit) = fit_rate(&values, k_lo, iters) {
            fits.push((name.to_string(), fit));
        }
    }
    fits
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentArtifacts> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out)?;
    let cache_dir = cache::cache_dir(&cfg.out);
    match cfg.experiment {
        Experiment::Projection => run_projection(cfg, &cache_dir),
        Experiment::Matcomp => run_matcomp(cfg, &cache_dir),
    }
}

fn cgalp_row_strings(rows: &[CgalpRow]) -> impl Iterator<Item = String> + '_ {
    rows.iter().map(|r| {
        format!(
            "{},{},{},{},{},{},{},{}",
            r.k,
            r.gamma,
            r.beta,
            r.feas_gap,
            r.erg_feas_gap,
            r.lagrangian_gap,
            r.erg_lagrangian_gap,
            r.mu_norm
        )
    })
}

fn finish(
    cfg: &ExperimentConfig,
    runs: Vec<RunSummary>,
    csv_paths: Vec<PathBuf>,
) -> Result<ExperimentArtifacts> {
    let summary = ExperimentSummary { config: cfg.clone(), runs };
    let summary_path = cfg.out.join(format!("summary_{}.json", cfg.key("all")));
    std::fs::write(&summary_path, serde_json::to_vec_pretty(&summary)?)?;
    Ok(ExperimentArtifacts { csv_paths, summary_path, summary })
}

fn run_projection(cfg: &ExperimentConfig, cache_dir: &Path) -> Result<ExperimentArtifacts> {
    let inst = gen_projection_instance(cfg.seed);
    let sched = cfg.schedule();
    let (reference, ref_time) = cgalp_reference(&inst.problem, &sched, cfg, cache_dir)?;
    let t0 = Instant::now();
    let rows = cgalp_trace(&inst.problem, &sched, cfg.iters, &reference)?;
    let wall = t0.elapsed().as_secs_f64();
    let csv_path = cfg.out.join(format!("{}.csv", cfg.key("cgalp")));
    write_csv(&csv_path, CGALP_HEADER, cgalp_row_strings(&rows))?;
    let runs = vec![RunSummary {
        algo: "cgalp".into(),
        csv: csv_path.file_name().unwrap().to_string_lossy().into_owned(),
        wall_time_s: wall,
        ref_wall_time_s: ref_time,
        fits: cgalp_fits(&rows, cfg.iters),
    }];
    finish(cfg, runs, vec![csv_path])
}

fn run_matcomp(cfg: &ExperimentConfig, cache_dir: &Path) -> Result<ExperimentArtifacts> {
    let inst = gen_matcomp_instance(cfg.n, cfg.density, cfg.seed);
    let spec = inst.product_spec()?;
    let lifted = lift(&spec)?;
    let sched = cfg.schedule();

    let (reference, cgalp_ref_time) = cgalp_reference(&lifted, &sched, cfg, cache_dir)?;
    let t0 = Instant::now();
    let rows = cgalp_trace(&lifted, &sched, cfg.iters, &reference)?;
    let cgalp_wall = t0.elapsed().as_secs_f64();
    let cgalp_csv = cfg.out.join(format!("{}.csv", cfg.key("cgalp")));
    write_csv(&cgalp_csv, CGALP_HEADER, cgalp_row_strings(&rows))?;

    // Forward-backward baseline with its own cached long-run reference.
    let gfb = inst.gfb_problem();
    let gfb_key = cfg.key("gfb");
    let mut gfb_ref_time = None;
    let gfb_reference = match cache::load::<GfbReference>(cache_dir, &gfb_key)? {
        Some(found) => found,
        None => {
            if !cfg.allow_reference_solve {
                return Err(Error::CacheMiss { key: gfb_key });
            }
            let t0 = Instant::now();
            let mut st = GfbState::init(cfg.n);
            for _ in 0..cfg.ref_iters {
                st = gfb_step(&gfb, st)?;
            }
            gfb_ref_time = Some(t0.elapsed().as_secs_f64());
            let reference = GfbReference {
                w: st.w.iter().map(|b| b.as_slice().to_vec()).collect(),
                z: st.z.iter().map(|b| b.as_slice().to_vec()).collect(),
                ref_iters: cfg.ref_iters,
            };
            cache::store(cache_dir, &gfb_key, &reference)?;
            reference
        }
    };
    let as_blocks = |v: &Vec<Vec<f64>>| -> [DenseVector<f64>; 3] {
        [
            DenseVector::from_f64_slice(&v[0]),
            DenseVector::from_f64_slice(&v[1]),
            DenseVector::from_f64_slice(&v[2]),
        ]
    };
    let w_star = as_blocks(&gfb_reference.w);
    let z_star = as_blocks(&gfb_reference.z);

    let t0 = Instant::now();
    let mut st = GfbState::init(cfg.n);
    let mut gfb_rows = Vec::with_capacity(cfg.iters);
    for _ in 0..cfg.iters {
        st = gfb_step(&gfb, st)?;
        let u_erg = st.u_ergodic();
        let criterion = gfb_bregman_criterion(&gfb, &u_erg, &w_star, &z_star, 1.0)?;
        let feas_nuc = crate::linalg::jacobi_svd(&crate::linalg::DenseMatrix::from_flat(
            cfg.n, cfg.n, &u_erg[1],
        )?)?
        .nuclear_norm()
            - gfb.delta_nuc;
        let feas_l1 = u_erg[2].norm_l1() - gfb.delta_l1;
        gfb_rows.push((st.k, criterion, feas_nuc, feas_l1));
    }
    let gfb_wall = t0.elapsed().as_secs_f64();
    let gfb_csv = cfg.out.join(format!("{gfb_key}.csv"));
    write_csv(
        &gfb_csv,
        GFB_HEADER,
        gfb_rows.iter().map(|(k, c, fnuc, fl1)| format!("{k},{c},{fnuc},{fl1}")),
    )?;

    let mut gfb_fits = Vec::new();
    let breg: Vec<(usize, f64)> = gfb_rows.iter().map(|&(k, c, _, _)| (k, c)).collect();
    if let Ok(fit) = fit_rate(&breg, (cfg.iters / 100).max(10), cfg.iters) {
        gfb_fits.push(("bregman_criterion".to_string(), fit));
    }

    let runs = vec![
        RunSummary {
            algo: "cgalp".into(),
            csv: cgalp_csv.file_name().unwrap().to_string_lossy().into_owned(),
            wall_time_s: cgalp_wall,
            ref_wall_time_s: cgalp_ref_time,
            fits: cgalp_fits(&rows, cfg.iters),
        },
        RunSummary {
            algo: "gfb".into(),
            csv: gfb_csv.file_name().unwrap().to_string_lossy().into_owned(),
            wall_time_s: gfb_wall,
            ref_wall_time_s: gfb_ref_time,
            fits: gfb_fits,
        },
    ];
    finish(cfg, runs, vec![cgalp_csv, gfb_csv])
}
