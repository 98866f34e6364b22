//! Bosonic tight-binding sector: hopping matrices, normal modes, the analytic
//! nearest-neighbour band and the staggered sign transformation.
//!
//! Conventions. The hopping matrix has the on-site energies Δ_j on its diagonal
//! and t_{j,l} off the diagonal. A nearest-neighbour periodic spec stores the
//! matrix element itself as `amplitude`, so the standard chain with band
//! Δ + 2t(1 − cos(2πk/N)) is on-site Δ + 2t with amplitude −t (see
//! [`HoppingSpec::uniform_chain`]).
//!
//! Normal modes are the rows of an orthogonal matrix, sorted by ascending
//! energy. Each row is real with its first nonzero component positive; rows
//! sharing an energy (to 1e-10 relative) are ordered lexicographically.

use std::cmp::Ordering;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{symmetric_eigen, Matrix};

const SYMMETRY_TOL: f64 = 1e-12;
const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum Hopping {
    /// Ring with a single hopping matrix element between neighbours.
    NearestNeighborPeriodic { amplitude: f64 },
    /// Symmetric matrix of hopping elements with zero diagonal.
    Explicit(Matrix),
}

/// On-site energies plus the hopping pattern for N sites.
#[derive(Clone, Debug, PartialEq)]
pub struct HoppingSpec {
    onsite: Vec<f64>,
    hopping: Hopping,
}

impl HoppingSpec {
    pub fn nearest_neighbor(onsite: Vec<f64>, amplitude: f64) -> Result<Self> {
        if onsite.is_empty() {
            return Err(Error::InvalidInput("lattice needs at least one site".into()));
        }
        if !amplitude.is_finite() || onsite.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidInput("non-finite lattice parameter".into()));
        }
        Ok(Self { onsite, hopping: Hopping::NearestNeighborPeriodic { amplitude } })
    }

    pub fn explicit(onsite: Vec<f64>, hopping: Matrix) -> Result<Self> {
        let n = onsite.len();
        if n == 0 {
            return Err(Error::InvalidInput("lattice needs at least one site".into()));
        }
        if hopping.rows() != n || hopping.cols() != n {
            return Err(Error::InvalidInput(format!(
                "hopping matrix is {}x{}, expected {n}x{n}",
                hopping.rows(),
                hopping.cols()
            )));
        }
        if hopping.as_slice().iter().chain(&onsite).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite lattice parameter".into()));
        }
        let scale = hopping.max_abs().max(1.0);
        if hopping.asymmetry() > SYMMETRY_TOL * scale {
            return Err(Error::InvalidInput("hopping matrix is not symmetric".into()));
        }
        if (0..n).any(|j| hopping[(j, j)] != 0.0) {
            return Err(Error::InvalidInput("hopping matrix must have a zero diagonal".into()));
        }
        Ok(Self { onsite, hopping: Hopping::Explicit(hopping) })
    }

    /// Periodic chain with band Δ + 2t(1 − cos(2πk/N)): on-site Δ + 2t,
    /// neighbour element −t.
    pub fn uniform_chain(n: usize, delta: f64, t: f64) -> Result<Self> {
        Self::nearest_neighbor(vec![delta + 2.0 * t; n], -t)
    }

    pub fn sites(&self) -> usize {
        self.onsite.len()
    }

    pub fn onsite(&self) -> &[f64] {
        &self.onsite
    }

    pub fn hopping(&self) -> &Hopping {
        &self.hopping
    }

    /// Nearest-neighbour ring with N ≥ 3 and identical on-site energies; the
    /// closed-form Fourier solution applies.
    pub fn is_uniform_chain(&self) -> bool {
        matches!(self.hopping, Hopping::NearestNeighborPeriodic { .. })
            && self.sites() >= 3
            && self.onsite.iter().all(|&d| d == self.onsite[0])
    }

    /// Energy of the Fourier mode with label k on a uniform chain,
    /// onsite + 2·amplitude·cos(2πk/N). `None` for any other lattice.
    pub fn fourier_energy(&self, k: usize) -> Option<f64> {
        match self.hopping {
            Hopping::NearestNeighborPeriodic { amplitude } if self.is_uniform_chain() => {
                let n = self.sites();
                let k = k % n;
                let folded = k.min(n - k);
                Some(self.onsite[0] + 2.0 * amplitude * (2.0 * PI * folded as f64 / n as f64).cos())
            }
            _ => None,
        }
    }

    /// Band-convention (Δ, t) of a uniform chain: Δ is the band bottom
    /// onsite + 2·amplitude and t = −amplitude.
    pub fn chain_parameters(&self) -> Option<(f64, f64)> {
        match self.hopping {
            Hopping::NearestNeighborPeriodic { amplitude } if self.is_uniform_chain() => {
                Some((self.onsite[0] + 2.0 * amplitude, -amplitude))
            }
            _ => None,
        }
    }
}

/// Normal modes of the hopping matrix: `wavefunctions` row k is b_{k,·}.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalModeBasis {
    wavefunctions: Matrix,
    energies: Vec<f64>,
}

impl NormalModeBasis {
    pub fn wavefunctions(&self) -> &Matrix {
        &self.wavefunctions
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Δ_0, the smallest mode energy.
    pub fn lowest_energy(&self) -> f64 {
        self.energies[0]
    }

    /// b_{k,j}.
    pub fn amplitude(&self, k: usize, j: usize) -> f64 {
        self.wavefunctions[(k, j)]
    }

    /// Index of the mode equal to the uniform vector 1/√N, provided that mode
    /// lies in the lowest eigenspace. This is what the homogeneous saddle point
    /// needs; it is 0 unless the lowest level is degenerate.
    pub fn uniform_lowest_mode(&self) -> Option<usize> {
        let n = self.len();
        let expected = 1.0 / (n as f64).sqrt();
        let tol = DEGENERACY_TOL * self.energies[0].abs().max(1.0);
        (0..n)
            .take_while(|&k| self.energies[k] - self.energies[0] <= tol)
            .find(|&k| self.wavefunctions.row(k).iter().all(|&b| (b - expected).abs() <= 1e-10))
    }
}

/// Dense hopping matrix: Δ_j on the diagonal, t_{j,l} off it. A two-site ring
/// has a single bond, so its off-diagonal element is the amplitude once.
pub fn build_hopping_matrix(spec: &HoppingSpec) -> Matrix {
    let n = spec.sites();
    let mut m = match &spec.hopping {
        Hopping::Explicit(t) => t.clone(),
        Hopping::NearestNeighborPeriodic { amplitude } => {
            let mut m = Matrix::zeros(n, n);
            if n == 2 {
                m[(0, 1)] = *amplitude;
                m[(1, 0)] = *amplitude;
            } else if n >= 3 {
                for j in 0..n {
                    let l = (j + 1) % n;
                    m[(j, l)] = *amplitude;
                    m[(l, j)] = *amplitude;
                }
            }
            m
        }
    };
    for (j, &d) in spec.onsite.iter().enumerate() {
        m[(j, j)] = d;
    }
    m
}

/// Normal-mode decomposition. Uniform chains use the closed-form Fourier
/// solution; anything else goes through the dense eigensolver. Fails when a
/// mode energy is not strictly positive.
pub fn normal_modes(spec: &HoppingSpec) -> Result<NormalModeBasis> {
    let n = spec.sites();
    let (energies, rows) = if spec.is_uniform_chain() {
        fourier_modes(spec)
    } else {
        let eig = symmetric_eigen(&build_hopping_matrix(spec))?;
        let rows = (0..n).map(|k| eig.vector(k)).collect();
        (eig.values, rows)
    };
    if let Some(&bad) = energies.iter().find(|&&e| e <= 0.0) {
        return Err(Error::UnstableBosonSector { energy: bad });
    }
    let (energies, rows) = canonical_order(energies, rows);
    let wavefunctions = Matrix::from_fn(n, n, |k, j| rows[k][j]);
    Ok(NormalModeBasis { wavefunctions, energies })
}

fn fourier_modes(spec: &HoppingSpec) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = spec.sites();
    let nf = n as f64;
    let mut energies = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for k in 0..n {
        energies.push(spec.fourier_energy(k).expect("uniform chain"));
        let folded = k.min(n - k);
        let row: Vec<f64> = if k == 0 {
            vec![1.0 / nf.sqrt(); n]
        } else if 2 * k == n {
            (0..n).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } / nf.sqrt()).collect()
        } else if k < n - k {
            let norm = (2.0 / nf).sqrt();
            (0..n).map(|j| norm * (2.0 * PI * (folded * j % n) as f64 / nf).cos()).collect()
        } else {
            let norm = (2.0 / nf).sqrt();
            (0..n).map(|j| norm * (2.0 * PI * (folded * j % n) as f64 / nf).sin()).collect()
        };
        rows.push(row);
    }
    (energies, rows)
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

fn canonical_order(energies: Vec<f64>, mut rows: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    for row in rows.iter_mut() {
        let scale = row.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if let Some(&first) = row.iter().find(|x| x.abs() > 1e-12 * scale) {
            if first < 0.0 {
                row.iter_mut().for_each(|x| *x = -*x);
            }
        }
    }
    let mut order: Vec<usize> = (0..energies.len()).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
    let scale = energies.iter().fold(1.0_f64, |m, e| m.max(e.abs()));
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && energies[order[end]] - energies[order[end - 1]] <= DEGENERACY_TOL * scale {
            end += 1;
        }
        order[start..end].sort_by(|&a, &b| lexicographic(&rows[a], &rows[b]));
        start = end;
    }
    let sorted_energies = order.iter().map(|&i| energies[i]).collect();
    let sorted_rows = order.iter().map(|&i| std::mem::take(&mut rows[i])).collect();
    (sorted_energies, sorted_rows)
}

/// Closed-form band of the periodic chain, Δ + 2t(1 − cos(2πk/N)). Errors when
/// the band over the N allowed momenta reaches zero or below.
pub fn analytic_nn_dispersion(delta: f64, t: f64, n: usize, k: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("chain needs at least one site".into()));
    }
    let band = |k: usize| delta + 2.0 * t * (1.0 - (2.0 * PI * k as f64 / n as f64).cos());
    let bottom = band(0).min(band(n / 2));
    if bottom <= 0.0 {
        return Err(Error::UnstableBosonSector { energy: bottom });
    }
    Ok(band(k % n))
}

/// t_{j,l} → (−1)^{j−l} t_{j,l}; on-site energies unchanged. A ring with an
/// even number of sites stays a ring with the opposite amplitude; odd rings
/// pick up a frustrated wrap-around bond and become explicit.
pub fn staggered_transform(spec: &HoppingSpec) -> HoppingSpec {
    let n = spec.sites();
    let hopping = match &spec.hopping {
        Hopping::NearestNeighborPeriodic { amplitude } if n.is_multiple_of(2) || n < 3 => {
            let amplitude = if n == 1 { *amplitude } else { -*amplitude };
            Hopping::NearestNeighborPeriodic { amplitude }
        }
        Hopping::NearestNeighborPeriodic { .. } => {
            let mut m = build_hopping_matrix(spec);
            for j in 0..n {
                m[(j, j)] = 0.0;
            }
            Hopping::Explicit(stagger(&m))
        }
        Hopping::Explicit(m) => Hopping::Explicit(stagger(m)),
    };
    HoppingSpec { onsite: spec.onsite.clone(), hopping }
}

fn stagger(m: &Matrix) -> Matrix {
    Matrix::from_fn(m.rows(), m.cols(), |j, l| if (j + l) % 2 == 0 { m[(j, l)] } else { -m[(j, l)] })
}

/// Effective spin-spin coupling J_{j,l} = 2 Σ_k (g²/Δ_k) b_{k,j} b_{k,l}
/// generated by integrating out both boson species.
pub fn coupling_matrix(g: f64, basis: &NormalModeBasis) -> Matrix {
    let n = basis.len();
    let mut j_mat = Matrix::zeros(n, n);
    for (k, &energy) in basis.energies.iter().enumerate() {
        let weight = 2.0 * g * g / energy;
        let row = basis.wavefunctions.row(k);
        for j in 0..n {
            let wj = weight * row[j];
            for l in 0..n {
                j_mat[(j, l)] += wj * row[l];
            }
        }
    }
    j_mat
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::symmetric_eigenvalues;
    use proptest::prelude::*;

    #[test]
    fn two_site_matrix() {
        let spec = HoppingSpec::nearest_neighbor(vec![1.0, 1.0], -0.3).unwrap();
        assert_eq!(build_hopping_matrix(&spec), Matrix::from_rows(&[[1.0, -0.3], [-0.3, 1.0]]));
    }

    #[test]
    fn three_site_ring_wraps() {
        let spec = HoppingSpec::nearest_neighbor(vec![2.0; 3], -0.5).unwrap();
        let expected = Matrix::from_rows(&[[2.0, -0.5, -0.5], [-0.5, 2.0, -0.5], [-0.5, -0.5, 2.0]]);
        assert_eq!(build_hopping_matrix(&spec), expected);
    }

    #[test]
    fn single_site() {
        let spec = HoppingSpec::nearest_neighbor(vec![1.7], 0.4).unwrap();
        assert_eq!(build_hopping_matrix(&spec), Matrix::from_rows(&[[1.7]]));
        let modes = normal_modes(&spec).unwrap();
        assert_eq!(modes.energies(), &[1.7]);
        assert_eq!(modes.amplitude(0, 0), 1.0);
    }

    #[test]
    fn non_symmetric_explicit_is_rejected() {
        let t = Matrix::from_rows(&[[0.0, 0.1], [0.2, 0.0]]);
        assert!(matches!(HoppingSpec::explicit(vec![1.0, 1.0], t), Err(Error::InvalidInput(_))));
        let diag = Matrix::from_rows(&[[0.1, 0.0], [0.0, 0.0]]);
        assert!(HoppingSpec::explicit(vec![1.0, 1.0], diag).is_err());
    }

    #[test]
    fn two_site_modes_by_hand() {
        let spec = HoppingSpec::nearest_neighbor(vec![1.0, 1.0], -0.3).unwrap();
        let modes = normal_modes(&spec).unwrap();
        assert!((modes.energies()[0] - 0.7).abs() < 1e-15);
        assert!((modes.energies()[1] - 1.3).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((modes.amplitude(0, 0) - h).abs() < 1e-15 && (modes.amplitude(0, 1) - h).abs() < 1e-15);
        assert!((modes.amplitude(1, 0) - h).abs() < 1e-15 && (modes.amplitude(1, 1) + h).abs() < 1e-15);
    }

    #[test]
    fn unstable_sector_is_reported() {
        let spec = HoppingSpec::nearest_neighbor(vec![0.5, 0.5], -0.7).unwrap();
        assert!(matches!(normal_modes(&spec), Err(Error::UnstableBosonSector { .. })));
        assert!(matches!(analytic_nn_dispersion(1.0, -0.3, 8, 0), Err(Error::UnstableBosonSector { .. })));
    }

    #[test]
    fn analytic_band_examples() {
        assert_eq!(analytic_nn_dispersion(1.0, 0.5, 10, 0).unwrap(), 1.0);
        assert!((analytic_nn_dispersion(1.0, 0.5, 10, 5).unwrap() - 3.0).abs() < 1e-15);
        assert!((analytic_nn_dispersion(1.0, 0.5, 4, 1).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn eight_site_chain_matches_closed_form() {
        let (delta, t) = (1.0, 0.5);
        let spec = HoppingSpec::uniform_chain(8, delta, t).unwrap();
        let mut analytic: Vec<f64> = (0..8).map(|k| analytic_nn_dispersion(delta, t, 8, k).unwrap()).collect();
        analytic.sort_by(f64::total_cmp);
        let fast = normal_modes(&spec).unwrap();
        let dense = symmetric_eigenvalues(&build_hopping_matrix(&spec)).unwrap();
        for k in 0..8 {
            assert!((fast.energies()[k] - analytic[k]).abs() < 1e-10);
            assert!((dense[k] - analytic[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn fast_path_reconstructs_hopping_matrix() {
        for n in [3, 4, 7, 10] {
            let spec = HoppingSpec::uniform_chain(n, 1.3, 0.4).unwrap();
            let modes = normal_modes(&spec).unwrap();
            let w = modes.wavefunctions();
            let rebuilt = w.transpose().matmul(&Matrix::from_diag(modes.energies())).matmul(w);
            assert!(rebuilt.sub(&build_hopping_matrix(&spec)).max_abs() < 1e-10);
            assert!(w.matmul(&w.transpose()).sub(&Matrix::identity(n)).max_abs() < 1e-12);
            assert_eq!(modes.uniform_lowest_mode(), Some(0));
        }
    }

    #[test]
    fn flat_band_still_has_uniform_mode() {
        let modes = normal_modes(&HoppingSpec::uniform_chain(6, 1.0, 0.0).unwrap()).unwrap();
        let k = modes.uniform_lowest_mode().unwrap();
        assert!(modes.wavefunctions().row(k).iter().all(|&b| (b - 6.0_f64.sqrt().recip()).abs() < 1e-15));
    }

    #[test]
    fn staggering_examples() {
        let chain = HoppingSpec::nearest_neighbor(vec![1.0; 6], 0.3).unwrap();
        assert_eq!(
            staggered_transform(&chain).hopping(),
            &Hopping::NearestNeighborPeriodic { amplitude: -0.3 }
        );
        let mut t = Matrix::zeros(3, 3);
        t[(0, 2)] = 0.2;
        t[(2, 0)] = 0.2;
        t[(0, 1)] = 0.1;
        t[(1, 0)] = 0.1;
        let spec = HoppingSpec::explicit(vec![1.0; 3], t).unwrap();
        match staggered_transform(&spec).hopping() {
            Hopping::Explicit(m) => {
                assert_eq!(m[(0, 2)], 0.2);
                assert_eq!(m[(0, 1)], -0.1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn odd_ring_staggers_to_explicit() {
        let spec = HoppingSpec::nearest_neighbor(vec![2.0; 5], -0.4).unwrap();
        let staggered = staggered_transform(&spec);
        assert!(matches!(staggered.hopping(), Hopping::Explicit(_)));
        let back = staggered_transform(&staggered);
        let mut original = build_hopping_matrix(&spec);
        for j in 0..5 {
            original[(j, j)] = 0.0;
        }
        assert_eq!(back.hopping(), &Hopping::Explicit(original));
    }

    #[test]
    fn staggering_preserves_even_ring_spectrum() {
        let spec = HoppingSpec::uniform_chain(10, 1.0, 0.45).unwrap();
        let a = normal_modes(&spec).unwrap();
        let b = normal_modes(&staggered_transform(&spec)).unwrap();
        for (x, y) in a.energies().iter().zip(b.energies()) {
            assert!((x - y).abs() < 1e-10);
        }
        // the staggered chain condenses at the zone boundary, not k = 0
        assert_eq!(b.uniform_lowest_mode(), None);
    }

    #[test]
    fn coupling_matrix_examples() {
        let single = normal_modes(&HoppingSpec::nearest_neighbor(vec![1.0], 0.0).unwrap()).unwrap();
        assert_eq!(coupling_matrix(1.0, &single), Matrix::from_rows(&[[2.0]]));

        let pair = normal_modes(&HoppingSpec::nearest_neighbor(vec![1.0, 1.0], -0.3).unwrap()).unwrap();
        let j = coupling_matrix(1.0, &pair);
        let diag = 1.0 / 0.7 + 1.0 / 1.3;
        let off = 1.0 / 0.7 - 1.0 / 1.3;
        assert!((j[(0, 0)] - diag).abs() < 1e-14 && (j[(1, 1)] - diag).abs() < 1e-14);
        assert!((j[(0, 1)] - off).abs() < 1e-14 && (j[(1, 0)] - off).abs() < 1e-14);
        assert!((diag - 2.197_802_197_8).abs() < 1e-9 && (off - 0.659_340_659_3).abs() < 1e-9);
    }

    #[test]
    fn coupling_row_sums_on_uniform_chain() {
        let g = 0.8;
        let modes = normal_modes(&HoppingSpec::uniform_chain(12, 1.1, 0.3).unwrap()).unwrap();
        let j = coupling_matrix(g, &modes);
        let expected = 2.0 * g * g / modes.lowest_energy();
        for r in 0..12 {
            let sum: f64 = j.row(r).iter().sum();
            assert!((sum - expected).abs() < 1e-12);
        }
    }

    fn random_explicit(n: usize, values: &[f64]) -> HoppingSpec {
        let mut t = Matrix::zeros(n, n);
        let mut idx = 0;
        for j in 0..n {
            for l in (j + 1)..n {
                t[(j, l)] = values[idx] * 0.3;
                t[(l, j)] = t[(j, l)];
                idx += 1;
            }
        }
        let onsite = values[idx..idx + n].iter().map(|v| 3.0 + v).collect();
        HoppingSpec::explicit(onsite, t).unwrap()
    }

    proptest! {
        #[test]
        fn explicit_modes_are_orthonormal_and_reconstruct(
            n in 1usize..7,
            values in proptest::collection::vec(-1.0f64..1.0, 30),
        ) {
            let spec = random_explicit(n, &values);
            let modes = normal_modes(&spec).unwrap();
            let w = modes.wavefunctions();
            prop_assert!(w.matmul(&w.transpose()).sub(&Matrix::identity(n)).max_abs() <= 1e-12);
            let rebuilt = w.transpose().matmul(&Matrix::from_diag(modes.energies())).matmul(w);
            prop_assert!(rebuilt.sub(&build_hopping_matrix(&spec)).max_abs() <= 1e-10);
            prop_assert!(modes.energies().windows(2).all(|p| p[0] <= p[1]));
        }

        #[test]
        fn staggering_is_an_involution(
            n in 1usize..7,
            values in proptest::collection::vec(-1.0f64..1.0, 30),
            amp in -1.0f64..1.0,
            even in 1usize..6,
        ) {
            let spec = random_explicit(n, &values);
            prop_assert_eq!(staggered_transform(&staggered_transform(&spec)), spec);
            let ring = HoppingSpec::nearest_neighbor(vec![4.0; 2 * even], amp).unwrap();
            prop_assert_eq!(staggered_transform(&staggered_transform(&ring)), ring);
        }

        #[test]
        fn coupling_matrix_is_symmetric_psd(
            n in 1usize..7,
            values in proptest::collection::vec(-1.0f64..1.0, 30),
            g in 0.0f64..3.0,
        ) {
            let modes = normal_modes(&random_explicit(n, &values)).unwrap();
            let j = coupling_matrix(g, &modes);
            prop_assert!(j.asymmetry() <= 1e-13 * j.max_abs().max(1.0));
            let eig = symmetric_eigenvalues(&j).unwrap();
            prop_assert!(eig[0] >= -1e-12);
        }
    }
}
