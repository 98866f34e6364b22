//! One function per subcommand, each a pure map from configuration to table.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::config::{EdConfig, ModelConfig, RunConfig, SweepCommand};
use super::format::{Cell, Table};
use super::Units;
use crate::ed::{build_hamiltonian_chiral, ed_check, low_spectrum, TruncationSpec};
use crate::error::{Error, Result};
use crate::fluctuations::{amplitude_gaps, branch_dispersion, broken_phase, goldstone_slope};
use crate::meanfield::{classical_energy, general_saddle_point, homogeneous_saddle_point, MeanFieldState, Phase};
use crate::model::{critical_coupling, Model, ModelParams};

pub const MEANFIELD_COLUMNS: [&str; 7] =
    ["phase", "g_c", "cos_theta", "sin_theta", "alpha_0", "rho_bar", "energy_per_site"];
pub const DISPERSION_COLUMNS: [&str; 5] = ["k_index", "wavenumber", "omega_G", "omega_A_minus", "omega_A_plus"];
pub const GAPS_COLUMNS: [&str; 5] = ["g_c", "Omega", "delta_minus", "delta_plus", "c_s"];
const ED_COLUMNS: [&str; 7] =
    ["E0", "E_MF", "ratio", "commutator_norm", "basis_agreement", "rotation_defect", "dimension"];

pub const FIG1_SITES: usize = 100;

/// Seed and limits for lattices without a closed-form saddle point.
const GENERAL_SEED_THETA: f64 = 2.0 * PI / 3.0;
const GENERAL_TOL: f64 = 1e-12;
const GENERAL_MAX_ITER: usize = 200_000;

/// Energy unit: g when reporting in units of g and g > 0, else 1.
pub fn energy_unit(units: Units, g: f64) -> f64 {
    if units == Units::G && g > 0.0 {
        g
    } else {
        1.0
    }
}

fn build_model(config: &ModelConfig) -> Result<Model> {
    Model::new(config.params()?)
}

fn solve_meanfield(model: &Model) -> Result<(MeanFieldState, usize)> {
    match homogeneous_saddle_point(model) {
        Ok(state) => {
            let condensate = model.modes().uniform_lowest_mode().unwrap_or(0);
            Ok((state, condensate))
        }
        Err(Error::NonUniformLattice) => {
            let n = model.sites();
            let seed = MeanFieldState::from_angles(model, vec![GENERAL_SEED_THETA; n], vec![0.0; n])?;
            let solution = general_saddle_point(model, &seed, GENERAL_TOL, GENERAL_MAX_ITER)?;
            Ok((solution.state, 0))
        }
        Err(e) => Err(e),
    }
}

/// Site-averaged angles, the condensate amplitude Re ᾱ_{r,0}, ρ̄ and E/N.
pub fn meanfield_row(model: &Model, unit: f64) -> Result<Vec<Cell>> {
    let (state, condensate) = solve_meanfield(model)?;
    let n = model.sites() as f64;
    // the normal state is exactly spin-down; sin(π) would print as 1e-16
    let (cos, sin) = match state.phase {
        Phase::Normal => (-1.0, 0.0),
        Phase::Broken => (
            state.theta.iter().map(|t| t.cos()).sum::<f64>() / n,
            state.theta.iter().map(|t| t.sin()).sum::<f64>() / n,
        ),
    };
    let energy = classical_energy(model, &state)? / n;
    Ok(vec![
        state.phase.to_string().as_str().into(),
        (critical_coupling(model) / unit).into(),
        cos.into(),
        sin.into(),
        state.alpha_r[condensate].re.into(),
        state.rho_bar.into(),
        (energy / unit).into(),
    ])
}

pub fn dispersion_rows(model: &Model, unit: f64) -> Result<Vec<Vec<Cell>>> {
    let grid: Vec<usize> = (0..model.sites()).collect();
    let spectrum = branch_dispersion(model, &grid)?;
    Ok((0..spectrum.len())
        .map(|i| {
            let w = spectrum.omega[i];
            vec![
                spectrum.k_index[i].into(),
                spectrum.wavenumber[i].into(),
                (w[0] / unit).into(),
                (w[1] / unit).into(),
                (w[2] / unit).into(),
            ]
        })
        .collect())
}

/// Gap record; c_s is left empty when the lattice is not a uniform ring.
pub fn gaps_row(model: &Model, unit: f64) -> Result<Vec<Cell>> {
    let phase = broken_phase(model)?;
    let (minus, plus) = amplitude_gaps(model)?;
    let slope = match goldstone_slope(model) {
        Ok(c) => Some(c / unit),
        Err(Error::OutOfDomain(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(vec![
        (phase.g_c / unit).into(),
        (phase.omega_cap / unit).into(),
        (minus / unit).into(),
        (plus / unit).into(),
        slope.into(),
    ])
}

pub fn ed_columns(levels: usize) -> Vec<String> {
    let mut cols: Vec<String> = ED_COLUMNS.iter().map(|s| s.to_string()).collect();
    for i in 0..levels {
        cols.push(format!("level_{i}"));
        cols.push(format!("charge_{i}"));
    }
    cols
}

pub fn ed_row(model: &Model, ed: &EdConfig, unit: f64) -> Result<Vec<Cell>> {
    if ed.n_sites != model.sites() {
        return Err(Error::InvalidInput(format!("ed.N_sites = {} but the model has {} sites", ed.n_sites, model.sites())));
    }
    let trunc = TruncationSpec::new(ed.n_max, ed.n_sites)?;
    let report = ed_check(model, &trunc)?;
    let h = build_hamiltonian_chiral(model, &trunc)?;
    let spectrum = low_spectrum(&h, &trunc, ed.num_levels)?;
    let mut row: Vec<Cell> = vec![
        (report.e0 / unit).into(),
        (report.e_mf / unit).into(),
        report.ratio.into(),
        report.commutator_norm.into(),
        report.basis_agreement.into(),
        report.rotation_defect.into(),
        report.dimension.into(),
    ];
    for (e, c) in spectrum.energies.iter().zip(&spectrum.charge_values) {
        row.push((e / unit).into());
        row.push((*c).into());
    }
    Ok(row)
}

pub fn cmd_meanfield(config: &RunConfig, units: Units) -> Result<Table> {
    let model = build_model(&config.model)?;
    let mut table = Table::new(&MEANFIELD_COLUMNS);
    table.push(meanfield_row(&model, energy_unit(units, model.g()))?);
    Ok(table)
}

pub fn cmd_dispersion(config: &RunConfig, units: Units) -> Result<Table> {
    let model = build_model(&config.model)?;
    let mut table = Table::new(&DISPERSION_COLUMNS);
    for row in dispersion_rows(&model, energy_unit(units, model.g()))? {
        table.push(row);
    }
    Ok(table)
}

pub fn cmd_gaps(config: &RunConfig, units: Units) -> Result<Table> {
    let model = build_model(&config.model)?;
    let mut table = Table::new(&GAPS_COLUMNS);
    table.push(gaps_row(&model, energy_unit(units, model.g()))?);
    Ok(table)
}

pub fn cmd_ed_check(config: &RunConfig, units: Units) -> Result<Table> {
    let ed = config.ed.as_ref().ok_or_else(|| Error::InvalidInput("ed-check needs an ed block".into()))?;
    let model = build_model(&config.model)?;
    let mut table = Table::new(&ed_columns(ed.num_levels));
    table.push(ed_row(&model, ed, energy_unit(units, model.g()))?);
    Ok(table)
}

/// Model with Δ/g = 1, t/g = 0.5, ω_z/g = 1 at g = 1.
pub fn fig1_model(sites: usize) -> Result<Model> {
    Model::new(ModelParams::uniform_chain(1.0, 1.0, 1.0, 0.5, sites)?)
}

/// Dispersion table and the derived scalars (g_c, Ω, c_s, Δ_±) for the
/// reference parameter set.
pub fn cmd_fig1(sites: usize) -> Result<(Table, Table)> {
    let model = fig1_model(sites)?;
    let mut table = Table::new(&DISPERSION_COLUMNS);
    for row in dispersion_rows(&model, 1.0)? {
        table.push(row);
    }
    let mut columns = vec!["N", "Delta_over_g", "t_over_g", "omega_z_over_g"];
    columns.extend(GAPS_COLUMNS);
    let mut scalars = Table::new(&columns);
    let mut row: Vec<Cell> = vec![sites.into(), 1.0.into(), 0.5.into(), 1.0.into()];
    row.extend(gaps_row(&model, 1.0)?);
    scalars.push(row);
    Ok((table, scalars))
}

/// Row label for a failed sweep point.
pub fn status_of(error: &Error) -> &'static str {
    match error {
        Error::InvalidInput(_) => "invalid_input",
        Error::NonConvergence { .. } | Error::EigenNonConvergence { .. } => "nonconvergence",
        Error::DimensionBudget { .. } => "budget_exceeded",
        _ => "domain_error",
    }
}

fn sweep_columns(command: SweepCommand, config: &RunConfig) -> Result<Vec<String>> {
    Ok(match command {
        SweepCommand::Meanfield => MEANFIELD_COLUMNS.iter().map(|s| s.to_string()).collect(),
        SweepCommand::Dispersion => DISPERSION_COLUMNS.iter().map(|s| s.to_string()).collect(),
        SweepCommand::Gaps => GAPS_COLUMNS.iter().map(|s| s.to_string()).collect(),
        SweepCommand::EdCheck => {
            let ed = config.ed.as_ref().ok_or_else(|| Error::InvalidInput("ed-check sweep needs an ed block".into()))?;
            ed_columns(ed.num_levels)
        }
    })
}

fn sweep_point(config: &RunConfig, command: SweepCommand, parameter: &str, value: f64, unit: f64) -> Result<Vec<Vec<Cell>>> {
    let model = build_model(&config.model.with_parameter(parameter, value)?)?;
    match command {
        SweepCommand::Meanfield => Ok(vec![meanfield_row(&model, unit)?]),
        SweepCommand::Dispersion => dispersion_rows(&model, unit),
        SweepCommand::Gaps => Ok(vec![gaps_row(&model, unit)?]),
        SweepCommand::EdCheck => Ok(vec![ed_row(&model, config.ed.as_ref().expect("checked"), unit)?]),
    }
}

/// Sweep table and the number of points that succeeded. Points run on a pool
/// of `workers` threads; rows come out in grid order. Energies use the unit of
/// the configured base coupling so that rows stay comparable across the grid.
pub fn run_sweep(config: &RunConfig, units: Units, workers: Option<usize>) -> Result<(Table, usize)> {
    let sweep = config.sweep.as_ref().ok_or_else(|| Error::InvalidInput("sweep needs a sweep block".into()))?;
    let payload = sweep_columns(sweep.command, config)?;
    let mut columns = vec!["index".to_string(), sweep.parameter.clone(), "status".to_string()];
    columns.extend(payload.iter().cloned());
    let unit = energy_unit(units, config.model.g);
    let grid = sweep.grid();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
    let results: Vec<Result<Vec<Vec<Cell>>>> = pool.install(|| {
        grid.par_iter().map(|&v| sweep_point(config, sweep.command, &sweep.parameter, v, unit)).collect()
    });

    let mut table = Table::new(&columns);
    let mut succeeded = 0;
    for (i, (value, result)) in grid.iter().zip(results).enumerate() {
        let lead = |status: &str| -> Vec<Cell> { vec![i.into(), (*value).into(), status.into()] };
        match result {
            Ok(rows) => {
                succeeded += 1;
                for row in rows {
                    let mut full = lead("ok");
                    full.extend(row);
                    table.push(full);
                }
            }
            Err(e) => {
                let mut full = lead(status_of(&e));
                full.extend(std::iter::repeat_n(Cell::Missing, payload.len()));
                table.push(full);
            }
        }
    }
    Ok((table, succeeded))
}
