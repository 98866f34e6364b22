//! Gaussian fluctuations around the homogeneous broken-phase saddle point.
//!
//! Each mode k carries a symmetric 3×3 matrix B^(k) whose eigenvalues are the
//! squared frequencies of one Goldstone and two amplitude branches. The matrix
//! is written with μ_± = 1 ± √(Δ_0/Δ_k), so every entry stays finite at k = 0
//! where μ_− vanishes.
//!
//! Mode labels: on a uniform nearest-neighbour ring with at least three sites,
//! `k` is the Fourier label 0..N−1 and the wavenumber is 2πk/N. On any other
//! lattice `k` indexes the normal modes in ascending energy.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::meanfield::homogeneous_saddle_point;
use crate::model::Model;
use crate::numerics::{matrix_sqrt_spd, symmetric_eigenvalues, Matrix};

/// Negative squared frequencies down to this value are rounded up to zero.
pub const CLAMP_TOLERANCE: f64 = 1e-9;

/// Broken-phase scalars shared by every k.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BrokenPhase {
    pub omega_z: f64,
    pub g: f64,
    pub delta0: f64,
    pub g_c: f64,
    /// Ω = ω_z/|cosθ̄| = ω_z g²/g_c².
    pub omega_cap: f64,
    pub cos_theta: f64,
    pub sin_theta: f64,
}

impl BrokenPhase {
    fn from_scalars(omega_z: f64, g: f64, delta0: f64) -> Result<Self> {
        let g_c = (delta0 * omega_z / 2.0).sqrt();
        if !(g > g_c) {
            return Err(Error::OutOfDomain(format!(
                "fluctuation spectrum needs the broken phase, but g = {g} <= g_c = {g_c}"
            )));
        }
        let ratio = g_c * g_c / (g * g);
        Ok(Self {
            omega_z,
            g,
            delta0,
            g_c,
            omega_cap: omega_z / ratio,
            cos_theta: -ratio,
            sin_theta: ((1.0 - ratio) * (1.0 + ratio)).sqrt(),
        })
    }
}

/// Scalars of the homogeneous broken phase, or an error when the lattice has
/// no homogeneous solution or g ≤ g_c.
pub fn broken_phase(model: &Model) -> Result<BrokenPhase> {
    homogeneous_saddle_point(model)?;
    BrokenPhase::from_scalars(model.omega_z(), model.g(), model.delta0())
}

/// Ω = ω_z g²/g_c².
pub fn renormalized_frequency(model: &Model) -> Result<f64> {
    Ok(broken_phase(model)?.omega_cap)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FluctuationMatrix {
    pub k_index: usize,
    pub delta_k: f64,
    pub b: Matrix,
    pub omega_cap: f64,
    pub eps_sq: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
}

impl FluctuationMatrix {
    fn build(phase: &BrokenPhase, k_index: usize, delta_k: f64) -> Self {
        let s = (phase.delta0 / delta_k).sqrt();
        let mu_plus = 1.0 + s;
        let mu_minus = 1.0 - s;
        let omega = phase.omega_cap;
        let eps_sq = 0.5 * (delta_k * delta_k + omega * omega);
        let gc2 = phase.g_c * phase.g_c;
        let b12 = -gc2 * (2.0 * delta_k * mu_plus / phase.delta0).sqrt();
        let b13 = -gc2 * (2.0 * delta_k * mu_minus / phase.delta0).sqrt();
        let b23 = (eps_sq - delta_k * delta_k) * (mu_plus * mu_minus).sqrt();
        let b = Matrix::from_rows(&[
            [delta_k * delta_k, b12, b13],
            [b12, eps_sq * mu_plus, b23],
            [b13, b23, eps_sq * mu_minus],
        ]);
        Self { k_index, delta_k, b, omega_cap: omega, eps_sq, mu_plus, mu_minus }
    }

    /// Sorted frequencies √eig(B).
    pub fn frequencies(&self) -> Result<[f64; 3]> {
        frequencies_from_squares(&symmetric_eigenvalues(&self.b)?, self.k_index)
    }
}

fn frequencies_from_squares(values: &[f64], k: usize) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for (slot, &v) in out.iter_mut().zip(values) {
        if v < -CLAMP_TOLERANCE {
            return Err(Error::UnstableFluctuationSpectrum { k, eigenvalue: v });
        }
        *slot = v.max(0.0).sqrt();
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Δ_k for a mode label, see the module documentation.
pub fn mode_energy(model: &Model, k: usize) -> Result<f64> {
    let n = model.sites();
    if let Some(e) = model.params().lattice.fourier_energy(k) {
        if k < n {
            return Ok(e);
        }
    }
    model
        .modes()
        .energies()
        .get(k)
        .copied()
        .ok_or_else(|| Error::InvalidInput(format!("mode index {k} out of range for {n} sites")))
}

/// Wavenumber 2πk/N attached to mode label k.
pub fn wavenumber(n: usize, k: usize) -> f64 {
    2.0 * PI * k as f64 / n as f64
}

pub fn fluctuation_matrix(model: &Model, k: usize) -> Result<FluctuationMatrix> {
    let phase = broken_phase(model)?;
    Ok(FluctuationMatrix::build(&phase, k, mode_energy(model, k)?))
}

/// Collective-mode frequencies over a set of wavenumbers, sorted per point.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchSpectrum {
    pub k_index: Vec<usize>,
    pub wavenumber: Vec<f64>,
    /// (ω_G, ω_{A,−}, ω_{A,+}) per point.
    pub omega: Vec<[f64; 3]>,
}

impl BranchSpectrum {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

/// Frequencies at every label of `k_grid`, evaluated in parallel and returned
/// in input order.
pub fn branch_dispersion(model: &Model, k_grid: &[usize]) -> Result<BranchSpectrum> {
    let phase = broken_phase(model)?;
    let n = model.sites();
    let omega = k_grid
        .par_iter()
        .map(|&k| FluctuationMatrix::build(&phase, k, mode_energy(model, k)?).frequencies())
        .collect::<Result<Vec<_>>>()?;
    Ok(BranchSpectrum {
        k_index: k_grid.to_vec(),
        wavenumber: k_grid.iter().map(|&k| wavenumber(n, k)).collect(),
        omega,
    })
}

/// Closed-form amplitude gaps (Δ_−, Δ_+) with
/// Δ_±² = Ω²/2 + Δ_0² ± √(Ω⁴/4 + 4g_c⁴).
pub fn amplitude_gaps(model: &Model) -> Result<(f64, f64)> {
    let p = broken_phase(model)?;
    Ok(gaps_from(&p))
}

fn gaps_from(p: &BrokenPhase) -> (f64, f64) {
    let omega2 = p.omega_cap * p.omega_cap;
    let mean = 0.5 * omega2 + p.delta0 * p.delta0;
    let root = (0.25 * omega2 * omega2 + 4.0 * p.g_c.powi(4)).sqrt();
    ((mean - root).sqrt(), (mean + root).sqrt())
}

/// Long-wavelength slope of the Goldstone branch on a uniform chain with band
/// Δ + 2t(1 − cos(2πk/N)): c_s = 2g² sinθ̄ √(tΔ/(Δ⁴ + 4g⁴ sin²θ̄)).
pub fn goldstone_slope(model: &Model) -> Result<f64> {
    let p = broken_phase(model)?;
    let (delta, t) = model.params().lattice.chain_parameters().ok_or_else(|| {
        Error::OutOfDomain("goldstone slope is defined for uniform nearest-neighbour rings of at least three sites".into())
    })?;
    let g2 = p.g * p.g;
    let s = p.sin_theta;
    Ok(2.0 * g2 * s * (t * delta / (delta.powi(4) + 4.0 * g2 * g2 * s * s)).sqrt())
}

/// Potential V and kinetic matrix T of the coupled-oscillator form, in
/// (x, y, z) order.
pub fn oscillator_forms(model: &Model, k: usize) -> Result<(Matrix, Matrix)> {
    let p = broken_phase(model)?;
    Ok(oscillator_forms_from(&p, mode_energy(model, k)?))
}

fn oscillator_forms_from(p: &BrokenPhase, delta_k: f64) -> (Matrix, Matrix) {
    let s = (p.delta0 / delta_k).sqrt();
    let xz = -2.0 * p.g_c * p.g_c * (delta_k / p.delta0).sqrt();
    let d2 = delta_k * delta_k;
    let v = Matrix::from_rows(&[[d2, 0.0, xz], [0.0, d2, 0.0], [xz, 0.0, p.omega_cap * p.omega_cap]]);
    let t = Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, -s], [0.0, -s, 1.0]]);
    (v, t)
}

/// Frequencies of the oscillator pair (T, V), the independent route to the
/// collective modes.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleSpectrum {
    /// √eig(T·V) from the similarity T^{1/2} V T^{1/2}.
    pub omega: [f64; 3],
    /// √eig(T·V) from V^{1/2} T V^{1/2}; present when V is positive definite.
    pub omega_v_side: Option<[f64; 3]>,
}

/// Eigenvalues of T·V. T has the closed-form eigenbasis e_x, (e_y ± e_z)/√2
/// with eigenvalues 1, 1 ∓ s, all non-negative, so T^{1/2} V T^{1/2} is a
/// symmetric matrix with the same spectrum as T·V for every k, including the
/// zone center where T is singular.
pub fn symplectic_oracle(model: &Model, k: usize) -> Result<OracleSpectrum> {
    let p = broken_phase(model)?;
    let delta_k = mode_energy(model, k)?;
    let (v, _) = oscillator_forms_from(&p, delta_k);
    let s = (p.delta0 / delta_k).sqrt();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let u = Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, h, h], [0.0, h, -h]]);
    let root = [1.0, (1.0 - s).max(0.0).sqrt(), (1.0 + s).sqrt()];
    let rotated = u.transpose().matmul(&v).matmul(&u);
    let similar = Matrix::from_fn(3, 3, |i, j| root[i] * rotated[(i, j)] * root[j]);
    let omega = frequencies_from_squares(&symmetric_eigenvalues(&similar)?, k)?;

    let (_, t) = oscillator_forms_from(&p, delta_k);
    let omega_v_side = match matrix_sqrt_spd(&v) {
        Ok(root_v) => {
            let m = root_v.matmul(&t).matmul(&root_v).symmetrized();
            Some(frequencies_from_squares(&symmetric_eigenvalues(&m)?, k)?)
        }
        Err(Error::NotPositiveDefinite { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(OracleSpectrum { omega, omega_v_side })
}

/// Position and momentum transforms q̃ = Q q, p̃ = P p that turn the
/// oscillator pair (T, V) into (I, B).
pub fn appendix_transform_matrices(model: &Model, k: usize) -> Result<(Matrix, Matrix)> {
    let m = fluctuation_matrix(model, k)?;
    if m.mu_minus <= 0.0 {
        return Err(Error::NonInvertible { k });
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (rp, rm) = (m.mu_plus.sqrt(), m.mu_minus.sqrt());
    let q = Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, -h * rp, h * rm], [0.0, h * rp, h * rm]]);
    let p = Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, -h / rp, h / rm], [0.0, h / rp, h / rm]]);
    Ok((q, p))
}

/// Band-bottom convention of [`continuum_dispersion`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ContinuumOffset {
    /// Δ(k) = Δ − t·d + t(ka)².
    #[default]
    Shifted,
    /// Δ(k) = Δ + t(ka)², the small-ka expansion of the lattice band.
    OffsetFree,
}

/// Branches with the lattice band replaced by its quadratic long-wavelength
/// form in d dimensions. The model must be a uniform chain; its Δ and t set
/// the band, and g_c and Ω are taken at the continuum band bottom.
pub fn continuum_dispersion(
    model: &Model,
    d: u32,
    a: f64,
    k_values: &[f64],
    offset: ContinuumOffset,
) -> Result<BranchSpectrum> {
    let (delta, t) = model.params().lattice.chain_parameters().ok_or_else(|| {
        Error::OutOfDomain("continuum dispersion needs a uniform nearest-neighbour ring".into())
    })?;
    let bottom = match offset {
        ContinuumOffset::Shifted => delta - t * d as f64,
        ContinuumOffset::OffsetFree => delta,
    };
    if t < 0.0 {
        return Err(Error::UnstableBosonSector { energy: f64::NEG_INFINITY });
    }
    if !(bottom > 0.0) {
        return Err(Error::UnstableBosonSector { energy: bottom });
    }
    let phase = BrokenPhase::from_scalars(model.omega_z(), model.g(), bottom)?;
    let omega = k_values
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let ka = k * a;
            FluctuationMatrix::build(&phase, i, bottom + t * ka * ka).frequencies()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BranchSpectrum { k_index: (0..k_values.len()).collect(), wavenumber: k_values.to_vec(), omega })
}
