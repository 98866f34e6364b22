//! Physical parameters of the lattice model and a cached normal-mode basis.

use crate::error::{Error, Result};
use crate::lattice::{coupling_matrix, normal_modes, HoppingSpec, NormalModeBasis};
use crate::numerics::Matrix;

/// Spin splitting ω_z, Jahn-Teller coupling g and the boson lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub omega_z: f64,
    pub g: f64,
    pub lattice: HoppingSpec,
}

impl ModelParams {
    pub fn new(omega_z: f64, g: f64, lattice: HoppingSpec) -> Result<Self> {
        if !(omega_z > 0.0) || !omega_z.is_finite() {
            return Err(Error::InvalidInput(format!("omega_z must be positive, got {omega_z}")));
        }
        if !(g >= 0.0) || !g.is_finite() {
            return Err(Error::InvalidInput(format!("g must be non-negative, got {g}")));
        }
        Ok(Self { omega_z, g, lattice })
    }

    /// Uniform periodic chain with band Δ + 2t(1 − cos(2πk/N)).
    pub fn uniform_chain(omega_z: f64, g: f64, delta: f64, t: f64, n: usize) -> Result<Self> {
        Self::new(omega_z, g, HoppingSpec::uniform_chain(n, delta, t)?)
    }

    pub fn with_g(&self, g: f64) -> Result<Self> {
        Self::new(self.omega_z, g, self.lattice.clone())
    }
}

/// Parameters together with their normal modes, built once and shared by the
/// mean-field and fluctuation code.
#[derive(Clone, Debug)]
pub struct Model {
    params: ModelParams,
    modes: NormalModeBasis,
}

impl Model {
    pub fn new(params: ModelParams) -> Result<Self> {
        let modes = normal_modes(&params.lattice)?;
        Ok(Self { params, modes })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn modes(&self) -> &NormalModeBasis {
        &self.modes
    }

    pub fn sites(&self) -> usize {
        self.modes.len()
    }

    pub fn omega_z(&self) -> f64 {
        self.params.omega_z
    }

    pub fn g(&self) -> f64 {
        self.params.g
    }

    /// Δ_0.
    pub fn delta0(&self) -> f64 {
        self.modes.lowest_energy()
    }

    /// Same lattice, different coupling; reuses the normal modes.
    pub fn with_g(&self, g: f64) -> Result<Self> {
        Ok(Self { params: self.params.with_g(g)?, modes: self.modes.clone() })
    }

    pub fn coupling_matrix(&self) -> Matrix {
        coupling_matrix(self.params.g, &self.modes)
    }
}

/// g_c = √(Δ_0 ω_z / 2).
pub fn critical_coupling(model: &Model) -> f64 {
    (model.delta0() * model.omega_z() / 2.0).sqrt()
}
