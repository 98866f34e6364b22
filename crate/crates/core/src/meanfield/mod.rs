//! Saddle-point (classical) solutions: the closed-form homogeneous state, a
//! damped fixed-point solver for arbitrary lattices, the classical energy and
//! real-time classical dynamics.
//!
//! Spins are Bloch vectors n_j = (sinθ_j cosφ_j, sinθ_j sinφ_j, cosθ_j). The two
//! boson species are stored as normal-mode amplitudes α_{r,k}, α_{l,k}. The
//! static energy is
//!
//! E = Σ_k Δ_k (|α_{r,k}|² + |α_{l,k}|²) + (ω_z/2) Σ_j n_{z,j}
//!     + g Σ_j Re[(n_{x,j} + i n_{y,j}) A_j],   A_j = Σ_k b_{k,j} (α_{r,k} + α*_{l,k}).

mod dynamics;

pub use dynamics::{classical_charge, evolve_classical, BlochTrajectory, ClassicalState};

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{critical_coupling, Model};
use crate::numerics::Matrix;

/// Largest sinθ_j still classified as the normal phase.
pub const ORDER_THRESHOLD: f64 = 1e-8;
pub const DEFAULT_DAMPING: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Normal,
    Broken,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Normal => "Normal",
            Phase::Broken => "Broken",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeanFieldState {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub alpha_r: Vec<Complex64>,
    pub alpha_l: Vec<Complex64>,
    pub phase: Phase,
    /// Condensate density Σ_k |α_{r,k}|² / N.
    pub rho_bar: f64,
}

impl MeanFieldState {
    /// Every spin down, no condensate.
    pub fn normal(n: usize) -> Self {
        Self {
            theta: vec![PI; n],
            phi: vec![0.0; n],
            alpha_r: vec![Complex64::new(0.0, 0.0); n],
            alpha_l: vec![Complex64::new(0.0, 0.0); n],
            phase: Phase::Normal,
            rho_bar: 0.0,
        }
    }

    /// Spin angles with the boson amplitudes set to their stationary values
    /// for those angles.
    pub fn from_angles(model: &Model, theta: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        validate_angles(model, &theta, &phi)?;
        let (alpha_r, alpha_l) = slaved_bosons(model, &theta, &phi);
        Ok(Self::assemble(theta, phi, alpha_r, alpha_l))
    }

    /// Arbitrary fields; phase and ρ̄ are derived from them.
    pub fn assemble(theta: Vec<f64>, phi: Vec<f64>, alpha_r: Vec<Complex64>, alpha_l: Vec<Complex64>) -> Self {
        let n = theta.len().max(1) as f64;
        let rho_bar = alpha_r.iter().map(|a| a.norm_sqr()).sum::<f64>() / n;
        let order = theta.iter().fold(0.0_f64, |m, t| m.max(t.sin().abs()));
        let phase = if order > ORDER_THRESHOLD { Phase::Broken } else { Phase::Normal };
        Self { theta, phi, alpha_r, alpha_l, phase, rho_bar }
    }

    pub fn sites(&self) -> usize {
        self.theta.len()
    }

    /// max_j sinθ_j.
    pub fn order_parameter(&self) -> f64 {
        self.theta.iter().fold(0.0_f64, |m, t| m.max(t.sin()))
    }

    pub fn bloch_vectors(&self) -> Vec<[f64; 3]> {
        self.theta
            .iter()
            .zip(&self.phi)
            .map(|(&t, &p)| [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()])
            .collect()
    }

    pub fn to_classical(&self) -> ClassicalState {
        ClassicalState { n: self.bloch_vectors(), alpha_r: self.alpha_r.clone(), alpha_l: self.alpha_l.clone() }
    }
}

fn validate_angles(model: &Model, theta: &[f64], phi: &[f64]) -> Result<()> {
    let n = model.sites();
    if theta.len() != n || phi.len() != n {
        return Err(Error::InvalidInput(format!(
            "state has {} polar and {} azimuthal angles for {n} sites",
            theta.len(),
            phi.len()
        )));
    }
    if theta.iter().chain(phi).any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite spin angle".into()));
    }
    if theta.iter().any(|&t| !(0.0..=PI).contains(&t)) {
        return Err(Error::InvalidInput("polar angle outside [0, pi]".into()));
    }
    Ok(())
}

fn validate_state(model: &Model, state: &MeanFieldState) -> Result<()> {
    validate_angles(model, &state.theta, &state.phi)?;
    let n = model.sites();
    if state.alpha_r.len() != n || state.alpha_l.len() != n {
        return Err(Error::InvalidInput("boson amplitudes do not match the lattice size".into()));
    }
    Ok(())
}

/// ᾱ_{r,k} = −(g/2Δ_k) Σ_j b_{k,j} sinθ_j e^{−iφ_j}, and the l species with e^{+iφ_j}.
fn slaved_bosons(model: &Model, theta: &[f64], phi: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let modes = model.modes();
    let g = model.g();
    let spins: Vec<Complex64> = theta.iter().zip(phi).map(|(&t, &p)| Complex64::from_polar(t.sin(), p)).collect();
    let mut alpha_r = Vec::with_capacity(spins.len());
    let mut alpha_l = Vec::with_capacity(spins.len());
    for (k, &energy) in modes.energies().iter().enumerate() {
        let s: Complex64 = modes.wavefunctions().row(k).iter().zip(&spins).map(|(&b, &z)| b * z).sum();
        let pref = -g / (2.0 * energy);
        alpha_r.push(pref * s.conj());
        alpha_l.push(pref * s);
    }
    (alpha_r, alpha_l)
}

/// Closed-form saddle point of a lattice whose lowest normal mode is uniform.
/// Below g_c every spin points down; above it cosθ̄ = −g_c²/g² and both species
/// condense into k = 0 with ᾱ_0 = −(g√N / 2Δ_0) sinθ̄. The gauge is φ̄ = 0.
pub fn homogeneous_saddle_point(model: &Model) -> Result<MeanFieldState> {
    let condensate = model.modes().uniform_lowest_mode().ok_or(Error::NonUniformLattice)?;
    let n = model.sites();
    let g = model.g();
    let gc = critical_coupling(model);
    if g <= gc {
        return Ok(MeanFieldState::normal(n));
    }
    let ratio = gc * gc / (g * g);
    let cos = -ratio;
    let sin = ((1.0 - ratio) * (1.0 + ratio)).sqrt();
    let delta0 = model.delta0();
    let a0 = Complex64::new(-g * (n as f64).sqrt() / (2.0 * delta0) * sin, 0.0);
    let mut alpha = vec![Complex64::new(0.0, 0.0); n];
    alpha[condensate] = a0;
    let rho = (g / (2.0 * delta0)).powi(2) * sin * sin;
    Ok(MeanFieldState {
        theta: vec![sin.atan2(cos); n],
        phi: vec![0.0; n],
        alpha_r: alpha.clone(),
        alpha_l: alpha,
        phase: Phase::Broken,
        rho_bar: rho,
    })
}

/// H_j = Σ_l J_{j,l} sinθ_l e^{iφ_l}.
fn spin_fields(j_mat: &Matrix, theta: &[f64], phi: &[f64]) -> Vec<Complex64> {
    let spins: Vec<Complex64> = theta.iter().zip(phi).map(|(&t, &p)| Complex64::from_polar(t.sin(), p)).collect();
    (0..spins.len())
        .map(|j| j_mat.row(j).iter().zip(&spins).map(|(&jl, &z)| jl * z).sum())
        .collect()
}

/// Max-norm of the stationarity conditions: for every site
/// ω_z sinθ_j + cosθ_j Σ_l J_{j,l} sinθ_l cos(φ_j − φ_l) and
/// Σ_l J_{j,l} sinθ_l sin(φ_j − φ_l), and for every mode the difference between
/// each ᾱ_{γ,k} and its stationary value.
pub fn saddle_residual(model: &Model, state: &MeanFieldState) -> Result<f64> {
    validate_state(model, state)?;
    let fields = spin_fields(&model.coupling_matrix(), &state.theta, &state.phi);
    let mut residual = 0.0_f64;
    for (j, h) in fields.iter().enumerate() {
        let projected = Complex64::from_polar(1.0, -state.phi[j]) * h;
        let (s, c) = state.theta[j].sin_cos();
        residual = residual.max((model.omega_z() * s + c * projected.re).abs());
        residual = residual.max(projected.im.abs());
    }
    let (alpha_r, alpha_l) = slaved_bosons(model, &state.theta, &state.phi);
    for k in 0..alpha_r.len() {
        residual = residual.max((state.alpha_r[k] - alpha_r[k]).norm());
        residual = residual.max((state.alpha_l[k] - alpha_l[k]).norm());
    }
    Ok(residual)
}

/// A_j = Σ_k b_{k,j} (α_{r,k} + α*_{l,k}).
pub(crate) fn local_boson_fields(model: &Model, alpha_r: &[Complex64], alpha_l: &[Complex64]) -> Vec<Complex64> {
    let w = model.modes().wavefunctions();
    let n = model.sites();
    let mut fields = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let c = alpha_r[k] + alpha_l[k].conj();
        for (j, f) in fields.iter_mut().enumerate() {
            *f += w[(k, j)] * c;
        }
    }
    fields
}

/// Energy of Bloch vectors (not necessarily unit) and mode amplitudes.
pub(crate) fn bloch_energy(model: &Model, n: &[[f64; 3]], alpha_r: &[Complex64], alpha_l: &[Complex64]) -> f64 {
    let energies = model.modes().energies();
    let bosons: f64 = (0..energies.len())
        .map(|k| energies[k] * (alpha_r[k].norm_sqr() + alpha_l[k].norm_sqr()))
        .sum();
    let fields = local_boson_fields(model, alpha_r, alpha_l);
    let spins: f64 = n
        .iter()
        .zip(&fields)
        .map(|(v, a)| 0.5 * model.omega_z() * v[2] + model.g() * (Complex64::new(v[0], v[1]) * a).re)
        .sum();
    bosons + spins
}

/// Static classical energy of a mean-field configuration.
pub fn classical_energy(model: &Model, state: &MeanFieldState) -> Result<f64> {
    validate_state(model, state)?;
    Ok(bloch_energy(model, &state.bloch_vectors(), &state.alpha_r, &state.alpha_l))
}

/// Converged output of [`general_saddle_point`].
#[derive(Clone, Debug)]
pub struct SaddlePointSolution {
    pub state: MeanFieldState,
    pub iterations: usize,
    pub residual: f64,
    /// The iteration reached a nontrivial stationary point whose energy is
    /// above the normal state; `state` is the normal state instead.
    pub trivial_fallback: bool,
}

/// Damped fixed-point iteration of the stationarity conditions from the seed
/// `init`, with damping 0.5. See [`general_saddle_point_damped`].
pub fn general_saddle_point(model: &Model, init: &MeanFieldState, tol: f64, max_iter: usize) -> Result<SaddlePointSolution> {
    general_saddle_point_damped(model, init, tol, max_iter, DEFAULT_DAMPING)
}

/// Each sweep sets φ_j = arg H_j and moves θ_j a fraction `damping` towards
/// atan2(|H_j|, −ω_z), the root of ω_z sinθ = −cosθ |H_j| in [π/2, π]. The
/// boson amplitudes follow the spins, and φ_0 is pinned to zero. Iteration
/// stops once [`saddle_residual`] ≤ `tol`.
///
/// A result with max sinθ_j ≤ [`ORDER_THRESHOLD`] is returned as the exact
/// normal state. A nontrivial result is compared against the normal state and
/// replaced by it if its energy is higher. Only the fixed point reached from
/// this seed is reported; other solutions may exist.
pub fn general_saddle_point_damped(
    model: &Model,
    init: &MeanFieldState,
    tol: f64,
    max_iter: usize,
    damping: f64,
) -> Result<SaddlePointSolution> {
    validate_angles(model, &init.theta, &init.phi)?;
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::InvalidInput(format!("damping must lie in (0, 1], got {damping}")));
    }
    let n = model.sites();
    if model.g() == 0.0 {
        let state = MeanFieldState::normal(n);
        let residual = saddle_residual(model, &state)?;
        return Ok(SaddlePointSolution { state, iterations: 1, residual, trivial_fallback: false });
    }

    let j_mat = model.coupling_matrix();
    let omega = model.omega_z();
    let mut theta = init.theta.clone();
    let mut phi = init.phi.clone();
    let mut residual = f64::INFINITY;
    for iteration in 1..=max_iter {
        let fields = spin_fields(&j_mat, &theta, &phi);
        for (j, h) in fields.iter().enumerate() {
            let magnitude = h.norm();
            if magnitude > 0.0 {
                phi[j] = h.arg();
            }
            let target = magnitude.atan2(-omega);
            theta[j] = ((1.0 - damping) * theta[j] + damping * target).clamp(0.0, PI);
        }
        let gauge = phi[0];
        for p in phi.iter_mut() {
            *p = wrap_angle(*p - gauge);
        }

        let state = MeanFieldState::from_angles(model, theta.clone(), phi.clone())?;
        residual = saddle_residual(model, &state)?;
        if residual <= tol {
            let (state, trivial_fallback) = select_branch(model, state)?;
            let residual = if state.phase == Phase::Normal { saddle_residual(model, &state)? } else { residual };
            return Ok(SaddlePointSolution { state, iterations: iteration, residual, trivial_fallback });
        }
    }
    Err(Error::NonConvergence { iterations: max_iter, residual })
}

/// Chooses between a converged candidate and the always-stationary normal
/// state. Returns the chosen state and whether the candidate was rejected.
pub fn select_branch(model: &Model, candidate: MeanFieldState) -> Result<(MeanFieldState, bool)> {
    let n = model.sites();
    let trivial = MeanFieldState::normal(n);
    if candidate.order_parameter() <= ORDER_THRESHOLD {
        return Ok((trivial, false));
    }
    let e_candidate = classical_energy(model, &candidate)?;
    let e_trivial = classical_energy(model, &trivial)?;
    if e_candidate > e_trivial + 1e-12 * e_trivial.abs().max(1.0) {
        return Ok((trivial, true));
    }
    Ok((candidate, false))
}

/// Representative in (−π, π].
fn wrap_angle(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let w = x.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}
