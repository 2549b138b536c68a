use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use acmoduli::balance::{
    axis_integrals, classify, contour_flux, Classification, Contour, KillingField,
};
use acmoduli::continuation::{continue_curve, continue_to, seed_saddle, ContinuationOptions};
use acmoduli::discretization::{residual_of_imposed, QuadrantGrid};
use acmoduli::geometry::Ansatz;
use acmoduli::io::{load_acf, save_acf, write_curve_csv, write_spectrum_csv, SolutionFile};
use acmoduli::potential::{Model, Potential};
use acmoduli::solver::{newton_solve, Solution};
use acmoduli::spectra::{sector_eigenvalues, SymmetrySector};
use acmoduli::{Error, Result};
use rayon::prelude::*;

use crate::{Cli, Command, Failure, GridArgs};

fn model(cli: &Cli) -> Result<Model> {
    match &cli.potential {
        None => Ok(Model::quartic()),
        Some(path) => Model::new(Potential::from_csv_path(path)?),
    }
}

/// The model a solution file was computed with.
fn model_for(cli: &Cli, file: &SolutionFile) -> Result<Model> {
    let m = model(cli)?;
    if m.potential.id() != file.potential {
        return Err(Error::Domain(format!(
            "file was computed with potential `{}` but `{}` is loaded (see --potential)",
            file.potential,
            m.potential.id()
        )));
    }
    Ok(m)
}

fn grid(args: &GridArgs) -> Result<QuadrantGrid> {
    QuadrantGrid::new(args.half_width, args.h)
}

fn check_angle(theta: f64, guard: f64) -> Result<()> {
    let (lo, hi) = (guard, FRAC_PI_2 - guard);
    if !(lo <= theta && theta <= hi) {
        return Err(Error::Domain(format!("theta {theta} outside [{lo}, {hi}]")));
    }
    Ok(())
}

/// Three decimals with a negative zero printed as zero.
fn fixed3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn classification_line(c: &Classification) -> String {
    let (dt, r) = c.pair();
    format!("theta-pi/4 {} r {}", fixed3(dt), fixed3(r))
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn is_numerical(e: &Error) -> bool {
    matches!(
        e,
        Error::NonConvergence { .. }
            | Error::BlowUp { .. }
            | Error::LinearSolver { .. }
            | Error::Accuracy(_)
    )
}

pub(crate) fn run(cli: &Cli) -> std::result::Result<(), Failure> {
    match &cli.command {
        Command::Solve {
            theta,
            r0,
            out,
            max_step,
            grid: g,
            solver,
        } => {
            check_angle(*theta, solver.theta_guard)?;
            let opts = solver.options();
            opts.validate()?;
            let grid = grid(g)?;
            let model = model(cli)?;
            let sol = match newton_solve(grid, &model, *theta, *r0, None, &opts) {
                Ok(sol) => sol,
                Err(e) if is_numerical(&e) => {
                    eprintln!(
                        "note: direct solve failed ({}); continuing from the saddle",
                        e.kind()
                    );
                    let seed = seed_saddle(grid, &model, &opts)?;
                    continue_to(
                        &seed,
                        &model,
                        *theta,
                        *max_step,
                        &opts,
                        &ContinuationOptions::default(),
                    )?
                }
                Err(e) => return Err(e.into()),
            };
            save_acf(out, &SolutionFile::from_solution(&sol))?;
            print_solution(&sol);
            if !sol.is_accepted(opts.tolerance) {
                let m = sol.monotonicity();
                return Err(Failure::Numerical(Error::Accuracy(format!(
                    "solution rejected: residual {:e}, {} x and {} y monotonicity violations, max |u| {}",
                    sol.residual, m.x_violations, m.y_violations, m.max_abs
                ))));
            }
            Ok(())
        }
        Command::Continue {
            theta_min,
            theta_max,
            steps,
            out_dir,
            curve,
            margin_radius,
            k,
            index,
            step_halvings,
            grid: g,
            solver,
        } => {
            check_angle(*theta_min, solver.theta_guard)?;
            check_angle(*theta_max, solver.theta_guard)?;
            let opts = solver.options();
            opts.validate()?;
            let grid = grid(g)?;
            if !(*margin_radius > 0.0 && *margin_radius <= grid.half_width()) {
                return Err(Error::Domain(format!(
                    "margin radius {margin_radius} must lie in (0, L]"
                ))
                .into());
            }
            let model = model(cli)?;
            let seed = seed_saddle(grid, &model, &opts)?;
            let copts = ContinuationOptions {
                max_halvings: *step_halvings,
            };
            let mut result =
                continue_curve(&seed, &model, *theta_min, *theta_max, *steps, &opts, &copts)?;
            result.attach_margins(&model, *margin_radius, *k)?;
            if *index {
                result.attach_indices(&model, *margin_radius)?;
            }
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(dir).map_err(Error::from)?;
                for (n, s) in result.samples.iter_mut().enumerate() {
                    let name = format!("sample_{n:03}.acf");
                    save_acf(&dir.join(&name), &SolutionFile::from_solution(&s.solution))?;
                    s.file = Some(name);
                }
            }
            let mut w = output(curve.as_deref()).map_err(Error::from)?;
            write_curve_csv(&mut w, &result)?;
            w.flush().map_err(Error::from)?;
            if let Some(t) = result
                .lower_termination
                .as_ref()
                .or(result.upper_termination.as_ref())
            {
                return Err(Failure::Numerical(Error::NonConvergence {
                    reason: format!(
                        "march stopped after theta = {} at theta = {}: {}",
                        t.theta, t.attempted, t.reason
                    ),
                    last: None,
                }));
            }
            Ok(())
        }
        Command::Balance { file, contour } => {
            let data = load_acf(file)?;
            let model = model_for(cli, &data)?;
            let field = &data.field;
            let grid = *field.grid();
            let n = grid.n();
            let (i0, j0, i1, j1) = match contour {
                Some(spec) => parse_rectangle(spec)?,
                None => (n / 4, n / 4, 3 * n / 4, 3 * n / 4),
            };
            let rect = Contour::rectangle(i0, j0, i1, j1)?;
            let ax = axis_integrals(field, &model.potential);
            let c = classify(field, &model);
            let bound = 10.0 * grid.spacing().powi(2);
            println!("A {}", ax.a);
            println!("B {}", ax.b);
            println!("{}", classification_line(&c));
            println!("defect {:e}", c.defect);
            println!("contour {i0} {j0} {i1} {j1}");
            let mut worst = 0.0f64;
            for x in KillingField::ALL {
                let flux = contour_flux(field, &model.potential, &rect, x)?;
                worst = worst.max(flux.abs());
                println!("flux {} {:e}", x.label(), flux);
            }
            println!("bound {bound:e}");
            if worst > bound {
                return Err(Failure::Numerical(Error::Accuracy(format!(
                    "closed-contour flux {worst:e} exceeds {bound:e}"
                ))));
            }
            Ok(())
        }
        Command::Spectrum {
            file,
            radius,
            k,
            sector,
            out,
        } => {
            let data = load_acf(file)?;
            let model = model_for(cli, &data)?;
            let sectors: Vec<SymmetrySector> = match sector {
                Some(s) => vec![*s],
                None => SymmetrySector::ALL.to_vec(),
            };
            let reports = sectors
                .par_iter()
                .map(|&s| sector_eigenvalues(&data.field, &model.potential, s, *radius, *k))
                .collect::<Result<Vec<_>>>()?;
            let mut w = output(out.as_deref()).map_err(Error::from)?;
            write_spectrum_csv(&mut w, &reports)?;
            w.flush().map_err(Error::from)?;
            if out.is_some() {
                for r in &reports {
                    println!(
                        "{} negative {} smallest-abs {:e}",
                        r.sector, r.negative_count, r.smallest_abs
                    );
                }
            }
            Ok(())
        }
        Command::Classify { file } => {
            let data = load_acf(file)?;
            let model = model_for(cli, &data)?;
            let c = classify(&data.field, &model);
            println!("{}", classification_line(&c));
            if c.is_unreliable() {
                eprintln!(
                    "warning: balancing defect {:.3} exceeds the reliability threshold",
                    c.defect
                );
            }
            Ok(())
        }
        Command::Ansatz {
            theta,
            r,
            out,
            grid: g,
        } => {
            let grid = grid(g)?;
            let model = model(cli)?;
            let ansatz = Ansatz::symmetric(*theta, *r)?;
            let field = ansatz.sample(&model.profile, &grid);
            let residual = residual_of_imposed(&field, &model.potential).sup_norm();
            let c = classify(&field, &model);
            save_acf(
                out,
                &SolutionFile {
                    potential: model.potential.id().to_string(),
                    theta: *theta,
                    r: *r,
                    residual,
                    classify: c.pair(),
                    field,
                },
            )?;
            println!("{}", classification_line(&c));
            println!("residual {residual:e}");
            Ok(())
        }
    }
}

fn print_solution(sol: &Solution) {
    if let Some(c) = &sol.classification {
        println!("{}", classification_line(c));
    }
    println!("residual {:e}", sol.residual);
    println!(
        "newton {} total {} offset-iterations {}",
        sol.newton_iterations, sol.total_newton_iterations, sol.r_iterations
    );
}

fn parse_rectangle(spec: &str) -> Result<(usize, usize, usize, usize)> {
    let parts: Vec<usize> = spec
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Domain(format!("contour {spec:?} is not `i0,j0,i1,j1`")))?;
    match parts[..] {
        [i0, j0, i1, j1] => Ok((i0, j0, i1, j1)),
        _ => Err(Error::Domain(format!(
            "contour {spec:?} is not `i0,j0,i1,j1`"
        ))),
    }
}
