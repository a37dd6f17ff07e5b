//! Subcommand bodies. Each returns the exit code and the stdout lines.

use anyhow::{Context, Result};
use gpt_cloak::{
    decay_rate, field_value, gpt_spectrum, operator_norm_estimate, pushforward_tensor,
    solve_design, DesignProblem, Error, Options, ResidualForm,
};

use crate::config::{
    Command, DecayArgs, DesignArgs, DtnArgs, FieldArgs, GptArgs, PushforwardArgs, ResidualArg,
};
use crate::csv::{number, Table};
use crate::files::{read_structure, render_structure, write_atomic, Metadata, RunReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
/// Design finished without meeting the tolerance; outputs are still written.
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: Vec<String>,
}

impl Outcome {
    fn ok(stdout: Vec<String>) -> Self {
        Outcome {
            code: EXIT_OK,
            stdout,
        }
    }
}

pub fn run(command: &Command) -> Result<Outcome> {
    match command {
        Command::Design(a) => design(a),
        Command::Gpt(a) => gpt(a),
        Command::Dtn(a) => dtn(a),
        Command::Decay(a) => decay(a),
        Command::Field(a) => field(a),
        Command::Pushforward(a) => pushforward(a),
    }
}

fn residual_label(r: ResidualArg) -> &'static str {
    match r {
        ResidualArg::Defect => "defect",
        ResidualArg::Gpt => "gpt",
    }
}

pub fn design(args: &DesignArgs) -> Result<Outcome> {
    args.validate()?;
    let mut problem = DesignProblem::new(args.order, args.core.0);
    if let Some(r) = &args.radii {
        problem = problem.with_radii(r.0.clone());
    }
    let options = Options {
        max_iterations: args.max_iterations,
        residual_tolerance: args.tolerance,
        residual_form: ResidualForm::from(args.residual),
        ..Options::default()
    };
    let report = solve_design(&problem, &options).context("design failed")?;
    let core = args.core.label();
    let meta = Metadata {
        order: Some(args.order),
        core: Some(core.clone()),
        solver: Some(format!("gauss-newton/{}", residual_label(args.residual))),
        converged: Some(report.converged),
        iterations: Some(report.iterations),
    };
    write_atomic(&args.out, &render_structure(&report.structure, Some(&meta)))?;
    let run = RunReport {
        order: args.order,
        core: &core,
        residual_form: residual_label(args.residual),
        tolerance: args.tolerance,
        report: &report,
    };
    write_atomic(&args.report_path(), &run.render())?;
    Ok(Outcome {
        code: if report.converged {
            EXIT_OK
        } else {
            EXIT_NOT_CONVERGED
        },
        stdout: vec![
            format!("converged={}", report.converged),
            format!("iterations={}", report.iterations),
        ],
    })
}

pub fn gpt(args: &GptArgs) -> Result<Outcome> {
    args.validate()?;
    let structure = read_structure(&args.structure)?;
    let spectrum = gpt_spectrum(&structure, args.kmax)?;
    let mut table = Table::new(&["k", "M_k"]);
    for (i, &m) in spectrum.values.iter().enumerate() {
        table.row([(i + 1).to_string(), number(m)]);
    }
    write_atomic(&args.out, &table.finish())?;
    Ok(Outcome::ok(vec![]))
}

pub fn dtn(args: &DtnArgs) -> Result<Outcome> {
    args.validate()?;
    let structure = read_structure(&args.structure)?;
    let report = operator_norm_estimate(&structure, args.rho, args.s, args.kmax)?;
    let mut table = Table::new(&["k", "delta_k"]);
    for (k, &d) in report.deltas.iter().enumerate() {
        table.row([k.to_string(), number(d)]);
    }
    table.row(["sup_norm".to_owned(), number(report.sup_norm)]);
    table.row([
        "tail_bound".to_owned(),
        report.tail_bound.map(number).unwrap_or_default(),
    ]);
    write_atomic(&args.out, &table.finish())?;
    Ok(Outcome::ok(vec![format!(
        "sup_norm={}",
        number(report.sup_norm)
    )]))
}

pub fn decay(args: &DecayArgs) -> Result<Outcome> {
    args.validate()?;
    let structure = read_structure(&args.structure)?;
    let fit = decay_rate(&structure, args.s, &args.rho_list.0, args.kmax)?;
    let mut table = Table::new(&["rho", "sup_norm"]);
    for (&r, &v) in fit.rhos.iter().zip(&fit.sup_norms) {
        table.row([number(r), number(v)]);
    }
    write_atomic(&args.out, &table.finish())?;
    Ok(Outcome::ok(vec![format!("slope={}", fit.slope)]))
}

/// Grid coordinates `−extent … extent` with `n` samples.
fn axis(n: usize, extent: f64) -> Vec<f64> {
    let step = 2.0 * extent / (n - 1) as f64;
    (0..n).map(|i| -extent + step * i as f64).collect()
}

pub fn field(args: &FieldArgs) -> Result<Outcome> {
    args.validate()?;
    // ρ^k u_k(x/ρ) is the mode-k potential of the shrunken structure
    let structure = read_structure(&args.structure)?.scaled(args.rho)?;
    let xs = axis(args.grid, args.extent);
    let mut table = Table::new(&["x", "y", "u"]);
    for &y in &xs {
        for &x in &xs {
            let u = field_value(&structure, args.mode, x.hypot(y), y.atan2(x))?;
            table.row([number(x), number(y), u.map(number).unwrap_or_default()]);
        }
    }
    write_atomic(&args.out, &table.finish())?;
    Ok(Outcome::ok(vec![]))
}

pub fn pushforward(args: &PushforwardArgs) -> Result<Outcome> {
    args.validate()?;
    let structure = read_structure(&args.structure)?;
    let xs = axis(args.grid, 2.0);
    let mut table = Table::new(&["x", "y", "a11", "a12", "a22"]);
    let mut skipped = 0usize;
    for &y in &xs {
        for &x in &xs {
            if x.hypot(y) > 2.0 {
                continue;
            }
            match pushforward_tensor(&structure, args.rho, [x, y]) {
                Ok(t) => {
                    let m = t.matrix;
                    table.row([
                        number(x),
                        number(y),
                        number(m[0][0]),
                        number(m[0][1]),
                        number(m[1][1]),
                    ]);
                }
                Err(Error::CloakedHole) => skipped += 1,
                Err(e) => return Err(e.into()),
            }
        }
    }
    write_atomic(&args.out, &table.finish())?;
    Ok(Outcome::ok(vec![format!("hole_points={skipped}")]))
}
