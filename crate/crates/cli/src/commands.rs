//! The `solve`, `sweep` and `extrapolate` commands for the MHD model.

use rayon::prelude::*;

use nsfd::newton::{newton_solve, NewtonConfig, SolutionGrid};
use nsfd::problem::InitialGuess;
use nsfd::refine::{continuation_solve_from, extrapolate_with_sizes, observed_order};
use nsfd::{models, GridMap, Mesh, MidpointWeights};

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::table::Table;

/// Settings that only exist as flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub full_precision: bool,
    pub max_iter: usize,
    pub weights: MidpointWeights,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            full_precision: false,
            max_iter: NewtonConfig::default().max_iter,
            weights: MidpointWeights::default(),
        }
    }
}

/// What a command produced. `failure` is set when the table was written but
/// some result did not converge.
#[derive(Debug)]
pub struct Report {
    pub table: Table,
    pub summary: Vec<String>,
    pub failure: Option<CliError>,
}

fn mesh(cfg: &RunConfig, n: usize, opts: &RunOptions) -> Result<Mesh, CliError> {
    let map = GridMap::new(cfg.map, cfg.c)?;
    Ok(Mesh::with_weights(map, n, opts.weights)?)
}

fn newton_config(cfg: &RunConfig, opts: &RunOptions) -> NewtonConfig {
    NewtonConfig {
        tol: cfg.tol,
        max_iter: opts.max_iter,
        ..NewtonConfig::default()
    }
}

fn solve_beta(beta: f64, mesh: &Mesh, newton: &NewtonConfig) -> nsfd::Result<SolutionGrid> {
    let sys = models::mhd_system(beta)?;
    let guess = models::mhd_initial_guess().sample(mesh)?;
    newton_solve(&sys, mesh, guess, newton)
}

/// Profile on the full mesh at `beta_start`.
pub fn solve(cfg: &RunConfig, opts: &RunOptions) -> Result<Report, CliError> {
    let mesh = mesh(cfg, cfg.n, opts)?;
    let beta = cfg.beta_start;
    let sol = solve_beta(beta, &mesh, &newton_config(cfg, opts))?;

    let d = sol.dim();
    let mut header = vec!["n".to_string(), "xi".into(), "x".into()];
    header.extend((1..=d).map(|l| format!("u{l}")));
    let mut table = Table::new(header);
    let n_int = mesh.intervals();
    for n in 0..=n_int {
        let x = if n == n_int {
            "inf".to_string()
        } else {
            mesh.finite_node(n).to_string()
        };
        let mut row = vec![n.to_string(), mesh.xi(n).to_string(), x];
        row.extend(sol.states.row(n).iter().map(|v| format!("{v:e}")));
        table.push(row);
    }

    let shear = models::wall_shear(&sol)?;
    let failure = (!sol.converged).then(|| {
        CliError::Failed(format!(
            "beta {beta}: Newton did not converge in {} iterations (mean update {:e})",
            sol.iterations, sol.final_update_norm
        ))
    });
    Ok(Report {
        table,
        summary: vec![
            format!("wall_shear {shear:.15}"),
            format!("iterations {}", sol.iterations),
            format!("converged {}", sol.converged),
        ],
        failure,
    })
}

fn fixed(v: f64, decimals: usize, full: bool) -> String {
    if full {
        format!("{v:.16e}")
    } else {
        format!("{v:.decimals$}")
    }
}

/// Wall shear for every β of the range. Rows are solved in parallel and
/// emitted in β order; failing rows are flagged and the sweep continues.
pub fn sweep(cfg: &RunConfig, opts: &RunOptions) -> Result<Report, CliError> {
    let mesh = mesh(cfg, cfg.n, opts)?;
    let newton = newton_config(cfg, opts);
    let betas = cfg.betas();
    let results: Vec<nsfd::Result<SolutionGrid>> =
        betas.par_iter().map(|&beta| solve_beta(beta, &mesh, &newton)).collect();

    let mut table = Table::new(["beta", "wall_shear", "iterations", "status"]);
    let mut failed = Vec::new();
    for (&beta, res) in betas.iter().zip(&results) {
        let (shear, iterations, status) = match res {
            Ok(sol) if sol.converged => (
                fixed(models::wall_shear(sol)?, 7, opts.full_precision),
                sol.iterations.to_string(),
                "ok",
            ),
            Ok(sol) => (
                fixed(models::wall_shear(sol)?, 7, opts.full_precision),
                sol.iterations.to_string(),
                "not_converged",
            ),
            Err(_) => ("nan".into(), "-".into(), "failed"),
        };
        if status != "ok" {
            failed.push(beta.to_string());
        }
        table.push(vec![beta.to_string(), shear, iterations, status.into()]);
    }

    let failure = (!failed.is_empty()).then(|| {
        let detail: Vec<String> = betas
            .iter()
            .zip(&results)
            .filter_map(|(b, r)| r.as_ref().err().map(|e| format!("beta {b}: {e}")))
            .collect();
        let mut msg = format!("{} of {} betas failed: {}", failed.len(), betas.len(), failed.join(", "));
        for line in detail {
            msg.push('\n');
            msg.push_str(&line);
        }
        CliError::Failed(msg)
    });
    Ok(Report {
        table,
        summary: vec![format!("rows {}", betas.len())],
        failure,
    })
}

/// Richardson ladder of the wall shear at `beta_start` over `N0 * 2^g`.
pub fn extrapolate(cfg: &RunConfig, opts: &RunOptions) -> Result<Report, CliError> {
    let rich = cfg.richardson()?;
    let coarsest = mesh(cfg, rich.n0, opts)?;
    let sys = models::mhd_system(cfg.beta_start)?;
    let levels = continuation_solve_from(
        &sys,
        coarsest,
        rich.levels,
        &models::mhd_initial_guess(),
        &newton_config(cfg, opts),
    )?;
    let raw = levels
        .iter()
        .map(models::wall_shear)
        .collect::<nsfd::Result<Vec<f64>>>()?;
    let sizes: Vec<usize> = levels.iter().map(|s| s.mesh.intervals()).collect();
    let ladder = extrapolate_with_sizes(&raw, &rich.orders, sizes)?;

    let mut header = vec!["N_g".to_string()];
    header.extend((0..=rich.levels).map(|k| format!("k{k}")));
    let mut table = Table::new(header);
    for (g, row) in ladder.values.iter().enumerate() {
        let mut cells = vec![ladder.grid_sizes[g].to_string()];
        cells.extend((0..=rich.levels).map(|k| row.get(k).map_or(String::new(), |&v| fixed(v, 9, opts.full_precision))));
        table.push(cells);
    }
    if cfg.format == Format::Human {
        if let Some(cell) = table.rows.last_mut().and_then(|r| r.last_mut()) {
            cell.push('*');
        }
    }

    let finest = *ladder.grid_sizes.last().expect("at least one level");
    let mut summary = vec![format!(
        "benchmark {} (N={finest}, level {})",
        fixed(ladder.benchmark(), 9, opts.full_precision),
        rich.levels
    )];
    if raw.len() >= 3 {
        let tail = [raw[raw.len() - 3], raw[raw.len() - 2], raw[raw.len() - 1]];
        if let Some(p) = observed_order(tail) {
            summary.push(format!("observed_order {p:.4}"));
        }
    }
    Ok(Report {
        table,
        summary,
        failure: None,
    })
}
