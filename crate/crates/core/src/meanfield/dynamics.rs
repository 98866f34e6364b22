//! Real-time classical dynamics of the spins and boson modes.
//!
//! The equations are the real-time counterpart of the imaginary-time
//! stationarity equations: each spin precesses about ω_z ẑ + 2g(Re A_j, −Im A_j, 0)
//! and the modes obey
//! i dα_{r,k}/dt = Δ_k α_{r,k} + (g/2) Σ_j b_{k,j} (n_{x,j} − i n_{y,j}),
//! i dα_{l,k}/dt = Δ_k α_{l,k} + (g/2) Σ_j b_{k,j} (n_{x,j} + i n_{y,j}).
//! They are Hamiltonian for the classical energy, which is conserved together
//! with the charge Σ_k (|α_{r,k}|² − |α_{l,k}|²) + Σ_j n_{z,j}/2.
//! Bloch vectors are not renormalized between steps.

use num_complex::Complex64;

use super::{bloch_energy, local_boson_fields};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::numerics::rk4_step;

/// Instantaneous classical configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalState {
    pub n: Vec<[f64; 3]>,
    pub alpha_r: Vec<Complex64>,
    pub alpha_l: Vec<Complex64>,
}

impl ClassicalState {
    pub fn energy(&self, model: &Model) -> f64 {
        bloch_energy(model, &self.n, &self.alpha_r, &self.alpha_l)
    }

    fn pack(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(7 * self.n.len());
        for v in &self.n {
            y.extend_from_slice(v);
        }
        for a in self.alpha_r.iter().chain(&self.alpha_l) {
            y.push(a.re);
            y.push(a.im);
        }
        y
    }

    fn unpack(y: &[f64], n: usize) -> Self {
        let spins = (0..n).map(|j| [y[3 * j], y[3 * j + 1], y[3 * j + 2]]).collect();
        let amp = |k: usize| Complex64::new(y[3 * n + 2 * k], y[3 * n + 2 * k + 1]);
        Self { n: spins, alpha_r: (0..n).map(amp).collect(), alpha_l: (n..2 * n).map(amp).collect() }
    }
}

/// C_cl = Σ_k (|α_{r,k}|² − |α_{l,k}|²) + Σ_j n_{z,j}/2.
pub fn classical_charge(state: &ClassicalState) -> f64 {
    let bosons: f64 = state.alpha_r.iter().zip(&state.alpha_l).map(|(r, l)| r.norm_sqr() - l.norm_sqr()).sum();
    bosons + state.n.iter().map(|v| 0.5 * v[2]).sum::<f64>()
}

/// Sampled trajectory, one entry per step including the initial point.
#[derive(Clone, Debug)]
pub struct BlochTrajectory {
    pub times: Vec<f64>,
    pub n: Vec<Vec<[f64; 3]>>,
    pub alpha_r: Vec<Vec<Complex64>>,
    pub alpha_l: Vec<Vec<Complex64>>,
}

impl BlochTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, idx: usize) -> ClassicalState {
        ClassicalState { n: self.n[idx].clone(), alpha_r: self.alpha_r[idx].clone(), alpha_l: self.alpha_l[idx].clone() }
    }

    pub fn last(&self) -> ClassicalState {
        self.state(self.len() - 1)
    }

    /// Largest | |n_j| − 1 | over all samples and sites.
    pub fn max_norm_drift(&self) -> f64 {
        self.n
            .iter()
            .flatten()
            .map(|v| ((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Integrates `steps` RK4 steps of size `dt`. Accuracy needs
/// dt·max(Δ_k, ω_z, g) of order 0.1 or less.
pub fn evolve_classical(model: &Model, initial: &ClassicalState, dt: f64, steps: usize) -> Result<BlochTrajectory> {
    let n = model.sites();
    if initial.n.len() != n || initial.alpha_r.len() != n || initial.alpha_l.len() != n {
        return Err(Error::InvalidInput("initial state does not match the lattice size".into()));
    }
    if !dt.is_finite() {
        return Err(Error::InvalidInput("time step must be finite".into()));
    }
    let w = model.modes().wavefunctions().clone();
    let energies = model.modes().energies().to_vec();
    let omega = model.omega_z();
    let g = model.g();

    let rhs = |y: &[f64], dy: &mut [f64]| {
        let state = ClassicalState::unpack(y, n);
        let fields = local_boson_fields(model, &state.alpha_r, &state.alpha_l);
        for j in 0..n {
            let v = state.n[j];
            let axis = [2.0 * g * fields[j].re, -2.0 * g * fields[j].im, omega];
            dy[3 * j] = axis[1] * v[2] - axis[2] * v[1];
            dy[3 * j + 1] = axis[2] * v[0] - axis[0] * v[2];
            dy[3 * j + 2] = axis[0] * v[1] - axis[1] * v[0];
        }
        for k in 0..n {
            let source: Complex64 = (0..n).map(|j| w[(k, j)] * Complex64::new(state.n[j][0], -state.n[j][1])).sum();
            let dr = -Complex64::i() * (energies[k] * state.alpha_r[k] + 0.5 * g * source);
            let dl = -Complex64::i() * (energies[k] * state.alpha_l[k] + 0.5 * g * source.conj());
            dy[3 * n + 2 * k] = dr.re;
            dy[3 * n + 2 * k + 1] = dr.im;
            dy[5 * n + 2 * k] = dl.re;
            dy[5 * n + 2 * k + 1] = dl.im;
        }
    };

    let mut trajectory = BlochTrajectory {
        times: Vec::with_capacity(steps + 1),
        n: Vec::with_capacity(steps + 1),
        alpha_r: Vec::with_capacity(steps + 1),
        alpha_l: Vec::with_capacity(steps + 1),
    };
    let mut y = initial.pack();
    for step in 0..=steps {
        if step > 0 {
            y = rk4_step(&rhs, &y, dt);
        }
        let state = ClassicalState::unpack(&y, n);
        trajectory.times.push(step as f64 * dt);
        trajectory.n.push(state.n);
        trajectory.alpha_r.push(state.alpha_r);
        trajectory.alpha_l.push(state.alpha_l);
    }
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::homogeneous_saddle_point;
    use crate::model::ModelParams;
    use rand::{Rng, SeedableRng};

    fn chain(g: f64, n: usize) -> Model {
        Model::new(ModelParams::uniform_chain(1.0, g, 1.0, 0.5, n).unwrap()).unwrap()
    }

    fn random_state(n: usize, seed: u64) -> ClassicalState {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let spins = (0..n)
            .map(|_| {
                let z: f64 = rng.gen_range(-1.0..1.0);
                let p: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let r = (1.0 - z * z).sqrt();
                [r * p.cos(), r * p.sin(), z]
            })
            .collect();
        let mut amp = || Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let alpha_r = (0..n).map(|_| amp()).collect();
        let alpha_l = (0..n).map(|_| amp()).collect();
        ClassicalState { n: spins, alpha_r, alpha_l }
    }

    #[test]
    fn free_spin_precesses() {
        let model = chain(0.0, 1);
        let zero = Complex64::new(0.0, 0.0);
        let init = ClassicalState { n: vec![[1.0, 0.0, 0.0]], alpha_r: vec![zero], alpha_l: vec![zero] };
        let traj = evolve_classical(&model, &init, 1e-3, 2000).unwrap();
        for (t, n) in traj.times.iter().zip(&traj.n).step_by(250) {
            assert!((n[0][0] - t.cos()).abs() < 1e-12);
            assert!((n[0][1] - t.sin()).abs() < 1e-12);
            assert!(n[0][2].abs() < 1e-15);
        }
    }

    #[test]
    fn saddle_point_is_stationary() {
        let model = chain(1.0, 4);
        let init = homogeneous_saddle_point(&model).unwrap().to_classical();
        let traj = evolve_classical(&model, &init, 0.01, 1000).unwrap();
        let last = traj.last();
        for j in 0..4 {
            for c in 0..3 {
                assert!((last.n[j][c] - init.n[j][c]).abs() < 1e-10);
            }
            assert!((last.alpha_r[j] - init.alpha_r[j]).norm() < 1e-10);
        }
    }

    #[test]
    fn charge_and_energy_conserved_over_long_run() {
        let model = chain(1.0, 4);
        let init = random_state(4, 7);
        let traj = evolve_classical(&model, &init, 0.002, 10_000).unwrap();
        let c0 = classical_charge(&init);
        let e0 = init.energy(&model);
        let dc = (0..traj.len()).step_by(100).map(|i| (classical_charge(&traj.state(i)) - c0).abs()).fold(0.0, f64::max);
        let de = (0..traj.len()).step_by(100).map(|i| (traj.state(i).energy(&model) - e0).abs()).fold(0.0, f64::max);
        assert!(dc < 1e-8, "charge drift {dc}");
        assert!(de < 1e-8, "energy drift {de}");
        assert!(traj.max_norm_drift() < 1e-8);
    }

    #[test]
    fn global_error_is_fourth_order() {
        let model = chain(1.0, 2);
        let init = random_state(2, 3);
        let t_final = 2.0;
        let endpoint = |dt: f64| evolve_classical(&model, &init, dt, (t_final / dt).round() as usize).unwrap().last();
        let reference = endpoint(0.0025);
        let distance = |s: &ClassicalState| {
            let spins = s.n.iter().zip(&reference.n).flat_map(|(a, b)| (0..3).map(move |c| (a[c] - b[c]).abs()));
            let modes = s
                .alpha_r
                .iter()
                .chain(&s.alpha_l)
                .zip(reference.alpha_r.iter().chain(&reference.alpha_l))
                .map(|(a, b)| (a - b).norm());
            spins.chain(modes).fold(0.0, f64::max)
        };
        let coarse = distance(&endpoint(0.04));
        let fine = distance(&endpoint(0.02));
        let ratio = coarse / fine;
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let model = chain(1.0, 3);
        assert!(evolve_classical(&model, &random_state(2, 1), 0.01, 1).is_err());
    }
}
