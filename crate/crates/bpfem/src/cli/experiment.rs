//! Configuration-driven experiment drivers: single runs, convergence
//! studies, cross-sections, and mass tracking.

use std::path::PathBuf;
use std::sync::Arc;

use crate::analysis::{
    accumulate_energy_error, convergence_slope, cross_section, l2_error, mass, ErrorAccumulator,
};
use crate::cli::config::RunConfig;
use crate::cli::output::{fmt_float, write_csv, write_vtk};
use crate::error::{Error, Result};
use crate::fe_space::{build_space, interpolate, FeFunction};
use crate::forms::assemble_cip;
use crate::problems::preset;
use crate::stepper::{Observer, RunResult, Snapshot, ThetaScheme};

#[derive(Debug, Clone)]
pub struct ExperimentOptions {
    /// Dump `field_<step>.vtk` snapshots at the configured stride.
    pub write_vtk: bool,
    /// Write the per-run CSV files (errors, iterations, mass).
    pub write_files: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions { write_vtk: true, write_files: true }
    }
}

/// Outcome of a single configured run.
pub struct RunSummary {
    pub result: RunResult,
    /// Final-time L² error against the exact solution, when one is known.
    pub l2_error_final: Option<f64>,
    /// Time-integrated energy norm of the error, when computable.
    pub energy_error: Option<f64>,
    pub mean_iterations: f64,
    /// Smallest nodal value of the reported solution over the whole run.
    pub min_nodal: f64,
    /// Largest nodal value of the reported solution over the whole run.
    pub max_nodal: f64,
}

/// Run one configuration, write its outputs, and return the summary.
pub fn run_experiment(cfg: &RunConfig, opts: &ExperimentOptions) -> Result<RunSummary> {
    let mesh = Arc::new(cfg.build_mesh()?);
    let space = Arc::new(build_space(mesh, cfg.element)?);
    let problem = preset(cfg.problem);
    let scheme_cfg = cfg.scheme_config();
    let n_steps = scheme_cfg.n_steps();
    let out_dir = cfg.output_dir.clone();

    let mut mass_rows: Vec<Vec<String>> = Vec::new();
    let mut m0: Option<f64> = None;
    let mut mass_obs = |s: &Snapshot| -> Result<()> {
        let m = mass(&s.u_plus);
        if s.step == 0 {
            m0 = Some(m);
        }
        let m_ref = m0.expect("step 0 observed first");
        let mr = if m_ref != 0.0 { m / m_ref } else { f64::NAN };
        mass_rows.push(vec![fmt_float(s.time), fmt_float(m), fmt_float(mr)]);
        Ok(())
    };

    let mut iter_rows: Vec<Vec<String>> = Vec::new();
    let mut iter_obs = |s: &Snapshot| -> Result<()> {
        if s.step > 0 {
            iter_rows.push(vec![
                s.step.to_string(),
                s.report.iterations.to_string(),
                fmt_float(s.report.residual),
            ]);
        }
        Ok(())
    };

    let mut min_nodal = f64::INFINITY;
    let mut max_nodal = f64::NEG_INFINITY;
    let mut range_obs = |s: &Snapshot| -> Result<()> {
        for &c in &s.u_plus.coeffs {
            min_nodal = min_nodal.min(c);
            max_nodal = max_nodal.max(c);
        }
        Ok(())
    };

    // time-integrated energy error against the interpolated exact solution
    let exact = problem.exact.clone();
    let jmat = exact.as_ref().map(|_| {
        let beta = problem.beta.clone();
        assemble_cip(&space, cfg.gamma, |x, y, t| beta(x, y, t), 0.0)
    });
    let (eps, mu, dt) = (problem.eps, problem.mu, cfg.dt);
    let mut acc = ErrorAccumulator::new();
    let space_for_err = space.clone();
    let mut energy_obs = |s: &Snapshot| -> Result<()> {
        if let (Some(exact), Some(jmat)) = (&exact, &jmat) {
            let interp = interpolate(&space_for_err, |x, y, t| exact(x, y, t), s.time);
            let e_h = FeFunction::new(
                space_for_err.clone(),
                s.u_plus
                    .coeffs
                    .iter()
                    .zip(interp.coeffs.iter())
                    .map(|(a, b)| a - b)
                    .collect(),
            );
            accumulate_energy_error(&mut acc, s.step, &e_h, eps, mu, dt, jmat);
        }
        Ok(())
    };

    let stride = cfg.snapshot_stride;
    let vtk_dir = out_dir.clone();
    let do_vtk = opts.write_vtk;
    let mut vtk_obs = |s: &Snapshot| -> Result<()> {
        if do_vtk && (s.step % stride == 0 || s.step == n_steps) {
            write_vtk(&vtk_dir.join(format!("field_{}.vtk", s.step)), &s.u_plus)?;
        }
        Ok(())
    };

    let mut observers: Vec<&mut dyn Observer> = vec![
        &mut mass_obs,
        &mut iter_obs,
        &mut range_obs,
        &mut energy_obs,
        &mut vtk_obs,
    ];
    let mut driver = ThetaScheme::new(space.clone(), problem.clone(), scheme_cfg)?;
    let result = driver.run(&mut observers)?;

    let l2_error_final = problem.exact.as_ref().map(|exact| {
        let exact = exact.clone();
        l2_error(&result.final_u_plus, move |x, y, t| exact(x, y, t), cfg.t_final)
    });
    let energy_error = l2_error_final.map(|l2| {
        acc.final_l2 = l2;
        acc.combined_norm()
    });
    let mean_iterations = result.mean_iterations();

    if opts.write_files {
        let h = space.mesh.max_cell_diameter();
        write_csv(
            &out_dir.join("errors.csv"),
            "n,h,dt,l2_error_final,energy_error",
            &[vec![
                cfg.n.to_string(),
                fmt_float(h),
                fmt_float(cfg.dt),
                fmt_float(l2_error_final.unwrap_or(f64::NAN)),
                fmt_float(energy_error.unwrap_or(f64::NAN)),
            ]],
        )?;
        write_csv(&out_dir.join("iterations.csv"), "step,iterations,residual", &iter_rows)?;
        write_csv(&out_dir.join("mass.csv"), "t,M,M_r", &mass_rows)?;
    }

    Ok(RunSummary {
        result,
        l2_error_final,
        energy_error,
        mean_iterations,
        min_nodal,
        max_nodal,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Space,
    Time,
}

pub struct StudyLevel {
    pub level: f64,
    /// Mesh size for space studies, time step for time studies.
    pub param: f64,
    pub l2_error: f64,
    pub energy_error: f64,
}

pub struct StudySummary {
    pub levels: Vec<StudyLevel>,
    pub l2_slope: f64,
    pub energy_slope: f64,
    pub rates_csv: PathBuf,
}

/// Run the configured scheme once per refinement level and fit convergence
/// slopes of the final-time L² error and the energy error.
pub fn convergence_study(cfg: &RunConfig, axis: Axis, levels: &[f64]) -> Result<StudySummary> {
    let mut distinct = levels.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::invalid(
            "degenerate study: need at least two distinct levels",
        ));
    }

    let mut rows = Vec::new();
    let mut out_levels = Vec::new();
    for &level in levels {
        let mut level_cfg = cfg.clone();
        match axis {
            Axis::Space => {
                if level.fract() != 0.0 || level < 2.0 {
                    return Err(Error::invalid(format!(
                        "space level {level} must be an integer mesh resolution >= 2"
                    )));
                }
                level_cfg.n = level as usize;
            }
            Axis::Time => {
                if level <= 0.0 {
                    return Err(Error::invalid(format!("time level {level} must be positive")));
                }
                level_cfg.dt = level;
            }
        }
        let opts = ExperimentOptions { write_vtk: false, write_files: false };
        let summary = run_experiment(&level_cfg, &opts).map_err(|e| {
            Error::invalid(format!("convergence level {level} failed: {e}"))
        })?;
        let l2 = summary.l2_error_final.ok_or_else(|| {
            Error::invalid("convergence study needs a problem with an exact solution")
        })?;
        let energy = summary.energy_error.unwrap_or(f64::NAN);
        let param = match axis {
            Axis::Space => {
                let mesh = level_cfg.build_mesh()?;
                mesh.max_cell_diameter()
            }
            Axis::Time => level,
        };
        out_levels.push(StudyLevel { level, param, l2_error: l2, energy_error: energy });
    }

    let l2_pairs: Vec<(f64, f64)> = out_levels.iter().map(|l| (l.param, l.l2_error)).collect();
    let l2_slope = convergence_slope(&l2_pairs)?;
    let energy_pairs: Vec<(f64, f64)> = out_levels
        .iter()
        .filter(|l| l.energy_error.is_finite() && l.energy_error > 0.0)
        .map(|l| (l.param, l.energy_error))
        .collect();
    let energy_slope = if energy_pairs.len() >= 2 {
        convergence_slope(&energy_pairs)?
    } else {
        f64::NAN
    };

    for l in &out_levels {
        rows.push(vec![
            fmt_float(l.level),
            fmt_float(l.param),
            fmt_float(l.l2_error),
            fmt_float(l.energy_error),
            fmt_float(l2_slope),
            fmt_float(energy_slope),
        ]);
    }
    let rates_csv = cfg.output_dir.join("rates.csv");
    write_csv(
        &rates_csv,
        "level,param,l2_error,energy_error,l2_slope,energy_slope",
        &rows,
    )?;

    Ok(StudySummary { levels: out_levels, l2_slope, energy_slope, rates_csv })
}

/// Run the configuration and write a cross-section of the final reported
/// solution along the line y = const.
pub fn section_to_csv(cfg: &RunConfig, y: f64, npoints: usize) -> Result<PathBuf> {
    let opts = ExperimentOptions { write_vtk: false, write_files: true };
    let summary = run_experiment(cfg, &opts)?;
    let section = cross_section(&summary.result.final_u_plus, y, npoints)?;
    let rows: Vec<Vec<String>> = section
        .iter()
        .map(|&(x, v)| vec![fmt_float(x), fmt_float(v)])
        .collect();
    let path = cfg.output_dir.join("section.csv");
    write_csv(&path, "x,value", &rows)?;
    Ok(path)
}
