//! Exact diagonalization of the full spin-boson Hamiltonian on one to three
//! sites with a truncated boson Fock space.
//!
//! Basis layout: site-major with site 0 most significant; within a site the
//! spin (0 = down, 1 = up) varies slowest, then the first boson occupation,
//! then the second. The chiral builder uses (n_r, n_l), the Cartesian builder
//! (n_x, n_y).
//!
//! Two truncations are available. `PerMode` keeps every occupation up to
//! n_max independently. `TotalQuanta` keeps n_1 + n_2 ≤ n_max per site; that
//! space is invariant under the x/y ↔ r/l mode rotation, so the two builders
//! are exactly unitarily equivalent there, which `PerMode` does not give.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::build_hopping_matrix;
use crate::meanfield::{classical_energy, homogeneous_saddle_point};
use crate::model::Model;
use crate::numerics::{hermitian_eigen, hermitian_eigenvalues, CMatrix};

pub const DEFAULT_BUDGET: usize = 4096;
pub const MAX_SITES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TruncationScheme {
    #[default]
    PerMode,
    TotalQuanta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TruncationSpec {
    pub n_max: usize,
    pub sites: usize,
    pub scheme: TruncationScheme,
    /// Largest Hilbert-space dimension a builder will accept.
    pub budget: usize,
}

impl TruncationSpec {
    pub fn new(n_max: usize, sites: usize) -> Result<Self> {
        let spec = Self { n_max, sites, scheme: TruncationScheme::PerMode, budget: DEFAULT_BUDGET };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_scheme(self, scheme: TruncationScheme) -> Self {
        Self { scheme, ..self }
    }

    pub fn with_budget(self, budget: usize) -> Self {
        Self { budget, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.sites == 0 || self.sites > MAX_SITES {
            return Err(Error::InvalidInput(format!("exact diagonalization supports 1 to {MAX_SITES} sites, got {}", self.sites)));
        }
        Ok(())
    }

    /// Boson occupation pairs kept on one site.
    fn occupations(&self) -> Vec<(usize, usize)> {
        let m = self.n_max;
        let mut out = Vec::new();
        for n1 in 0..=m {
            for n2 in 0..=m {
                if self.scheme == TruncationScheme::PerMode || n1 + n2 <= m {
                    out.push((n1, n2));
                }
            }
        }
        out
    }

    pub fn local_dimension(&self) -> usize {
        2 * self.occupations().len()
    }

    /// Total dimension, or `None` on overflow.
    pub fn dimension(&self) -> Option<usize> {
        self.local_dimension().checked_pow(self.sites as u32)
    }

    fn checked_dimension(&self) -> Result<usize> {
        self.validate()?;
        match self.dimension() {
            Some(d) if d <= self.budget => Ok(d),
            Some(d) => Err(Error::DimensionBudget { dimension: d, budget: self.budget }),
            None => Err(Error::DimensionBudget { dimension: usize::MAX, budget: self.budget }),
        }
    }

    /// True when every occupation is at least one quantum below the cutoff.
    fn is_interior(&self, n1: usize, n2: usize) -> bool {
        match self.scheme {
            TruncationScheme::PerMode => n1 < self.n_max && n2 < self.n_max,
            TruncationScheme::TotalQuanta => n1 + n2 < self.n_max,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct LocalState {
    up: bool,
    n1: usize,
    n2: usize,
}

struct FockBasis {
    trunc: TruncationSpec,
    local: Vec<LocalState>,
    /// local index of (spin, n1, n2), spin-major over a (n_max+1)² grid
    lookup: Vec<Option<usize>>,
    dim: usize,
}

impl FockBasis {
    fn new(trunc: &TruncationSpec) -> Result<Self> {
        let dim = trunc.checked_dimension()?;
        let m1 = trunc.n_max + 1;
        let mut local = Vec::new();
        let mut lookup = vec![None; 2 * m1 * m1];
        for up in [false, true] {
            for (n1, n2) in trunc.occupations() {
                lookup[(up as usize) * m1 * m1 + n1 * m1 + n2] = Some(local.len());
                local.push(LocalState { up, n1, n2 });
            }
        }
        Ok(Self { trunc: *trunc, local, lookup, dim })
    }

    fn local_dim(&self) -> usize {
        self.local.len()
    }

    fn find(&self, s: LocalState) -> Option<usize> {
        let m1 = self.trunc.n_max + 1;
        if s.n1 >= m1 || s.n2 >= m1 {
            return None;
        }
        self.lookup[(s.up as usize) * m1 * m1 + s.n1 * m1 + s.n2]
    }

    fn stride(&self, site: usize) -> usize {
        self.local_dim().pow((self.trunc.sites - 1 - site) as u32)
    }

    fn digits(&self, mut index: usize) -> Vec<usize> {
        let l = self.local_dim();
        let mut d = vec![0; self.trunc.sites];
        for slot in d.iter_mut().rev() {
            *slot = index % l;
            index /= l;
        }
        d
    }

    fn states(&self, index: usize) -> Vec<LocalState> {
        self.digits(index).into_iter().map(|i| self.local[i]).collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Flavor {
    Cartesian,
    Chiral,
}

fn check_sites(model: &Model, trunc: &TruncationSpec) -> Result<()> {
    if model.sites() != trunc.sites {
        return Err(Error::InvalidInput(format!(
            "model has {} sites but the truncation describes {}",
            model.sites(),
            trunc.sites
        )));
    }
    Ok(())
}

fn assemble(model: &Model, trunc: &TruncationSpec, flavor: Flavor) -> Result<CMatrix> {
    check_sites(model, trunc)?;
    let basis = FockBasis::new(trunc)?;
    let hopping = build_hopping_matrix(&model.params().lattice);
    let omega = model.omega_z();
    let g = model.g();
    let n = trunc.sites;
    let mut h = CMatrix::zeros(basis.dim, basis.dim);
    let real = |x: f64| Complex64::new(x, 0.0);

    for a in 0..basis.dim {
        let digits = basis.digits(a);
        let states = basis.states(a);

        let mut diag = 0.0;
        for (j, s) in states.iter().enumerate() {
            diag += 0.5 * omega * if s.up { 1.0 } else { -1.0 };
            diag += hopping[(j, j)] * (s.n1 + s.n2) as f64;
        }
        h[(a, a)] += real(diag);

        // boson hopping a†_{ε,j} a_{ε,l}, identical for either mode pair
        for j in 0..n {
            for l in 0..n {
                let t = hopping[(j, l)];
                if j == l || t == 0.0 {
                    continue;
                }
                for mode in 0..2 {
                    let mut from = states[l];
                    let mut to = states[j];
                    let (occ_l, occ_j) = if mode == 0 { (&mut from.n1, &mut to.n1) } else { (&mut from.n2, &mut to.n2) };
                    if *occ_l == 0 {
                        continue;
                    }
                    let amp = t * ((*occ_l as f64) * (*occ_j as f64 + 1.0)).sqrt();
                    *occ_l -= 1;
                    *occ_j += 1;
                    if let (Some(il), Some(ij)) = (basis.find(from), basis.find(to)) {
                        let b = replace_digits(a, &[(l, digits[l], il), (j, digits[j], ij)], &basis);
                        h[(b, a)] += real(amp);
                    }
                }
            }
        }

        for (j, &s) in states.iter().enumerate() {
            for (target, amp) in interaction(s, g, flavor) {
                if let Some(local) = basis.find(target) {
                    let b = replace_digits(a, &[(j, digits[j], local)], &basis);
                    h[(b, a)] += amp;
                }
            }
        }
    }
    Ok(h)
}

/// Global index after replacing the local digit of some sites.
fn replace_digits(a: usize, changes: &[(usize, usize, usize)], basis: &FockBasis) -> usize {
    let mut b = a;
    for &(site, old, new) in changes {
        b = b - old * basis.stride(site) + new * basis.stride(site);
    }
    b
}

/// Local interaction terms acting on one site state: (target, amplitude).
fn interaction(s: LocalState, g: f64, flavor: Flavor) -> Vec<(LocalState, Complex64)> {
    let mut out = Vec::with_capacity(4);
    let sq = |n: usize| (n as f64).sqrt();
    let flipped = LocalState { up: !s.up, ..s };
    match flavor {
        Flavor::Chiral => {
            // g[σ⁺(a_r + a_l†) + σ⁻(a_r† + a_l)]
            if s.up {
                out.push((LocalState { n1: s.n1 + 1, ..flipped }, Complex64::new(g * sq(s.n1 + 1), 0.0)));
                if s.n2 > 0 {
                    out.push((LocalState { n2: s.n2 - 1, ..flipped }, Complex64::new(g * sq(s.n2), 0.0)));
                }
            } else {
                if s.n1 > 0 {
                    out.push((LocalState { n1: s.n1 - 1, ..flipped }, Complex64::new(g * sq(s.n1), 0.0)));
                }
                out.push((LocalState { n2: s.n2 + 1, ..flipped }, Complex64::new(g * sq(s.n2 + 1), 0.0)));
            }
        }
        Flavor::Cartesian => {
            // (g/√2)[σx(a_x + a_x†) + σy(a_y + a_y†)] with σy|↓⟩ = −i|↑⟩
            let c = g / std::f64::consts::SQRT_2;
            let sy = if s.up { Complex64::new(0.0, c) } else { Complex64::new(0.0, -c) };
            let sx = Complex64::new(c, 0.0);
            if s.n1 > 0 {
                out.push((LocalState { n1: s.n1 - 1, ..flipped }, sx * sq(s.n1)));
            }
            out.push((LocalState { n1: s.n1 + 1, ..flipped }, sx * sq(s.n1 + 1)));
            if s.n2 > 0 {
                out.push((LocalState { n2: s.n2 - 1, ..flipped }, sy * sq(s.n2)));
            }
            out.push((LocalState { n2: s.n2 + 1, ..flipped }, sy * sq(s.n2 + 1)));
        }
    }
    out
}

/// H in the Cartesian Fock basis (n_x, n_y):
/// (ω_z/2)Σσ_z + Σ_ε Σ_{j,l} M_{j,l} a†_{ε,j} a_{ε,l} + (g/√2)Σ[σ_x(a_x + a_x†) + σ_y(a_y + a_y†)],
/// with M the hopping matrix.
pub fn build_hamiltonian(model: &Model, trunc: &TruncationSpec) -> Result<CMatrix> {
    assemble(model, trunc, Flavor::Cartesian)
}

/// H in the chiral Fock basis (n_r, n_l), with the interaction
/// gΣ[σ⁺(a_r + a_l†) + σ⁻(a_r† + a_l)]. All matrix elements are real.
pub fn build_hamiltonian_chiral(model: &Model, trunc: &TruncationSpec) -> Result<CMatrix> {
    assemble(model, trunc, Flavor::Chiral)
}

/// Diagonal of C = Σ_j (n_r − n_l + σ_z/2) in the chiral layout.
pub fn charge_values(trunc: &TruncationSpec) -> Result<Vec<f64>> {
    let basis = FockBasis::new(trunc)?;
    Ok((0..basis.dim)
        .map(|a| {
            basis
                .states(a)
                .iter()
                .map(|s| s.n1 as f64 - s.n2 as f64 + if s.up { 0.5 } else { -0.5 })
                .sum()
        })
        .collect())
}

pub fn charge_operator(trunc: &TruncationSpec) -> Result<CMatrix> {
    let c: Vec<Complex64> = charge_values(trunc)?.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
    Ok(CMatrix::from_diag(&c))
}

/// R(φ) = exp(iφC), diagonal in the chiral layout.
pub fn symmetry_rotation(phi: f64, trunc: &TruncationSpec) -> Result<CMatrix> {
    let r: Vec<Complex64> = charge_values(trunc)?.into_iter().map(|c| Complex64::from_polar(1.0, phi * c)).collect();
    Ok(CMatrix::from_diag(&r))
}

/// Basis states whose occupations all sit strictly below the cutoff.
pub fn interior_states(trunc: &TruncationSpec) -> Result<Vec<bool>> {
    let basis = FockBasis::new(trunc)?;
    Ok((0..basis.dim).map(|a| basis.states(a).iter().all(|s| trunc.is_interior(s.n1, s.n2))).collect())
}

/// Single-site ladder and spin operators in either layout, for checking how
/// the symmetry acts on generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    /// Creation operator of the first mode (a_r† or a_x†).
    CreateFirst,
    /// Creation operator of the second mode (a_l† or a_y†).
    CreateSecond,
    SpinRaise,
}

pub fn generator(trunc: &TruncationSpec, site: usize, which: Generator) -> Result<CMatrix> {
    let basis = FockBasis::new(trunc)?;
    if site >= trunc.sites {
        return Err(Error::InvalidInput(format!("site {site} out of range")));
    }
    let mut op = CMatrix::zeros(basis.dim, basis.dim);
    for a in 0..basis.dim {
        let digits = basis.digits(a);
        let s = basis.local[digits[site]];
        let (target, amp) = match which {
            Generator::CreateFirst => (LocalState { n1: s.n1 + 1, ..s }, ((s.n1 + 1) as f64).sqrt()),
            Generator::CreateSecond => (LocalState { n2: s.n2 + 1, ..s }, ((s.n2 + 1) as f64).sqrt()),
            Generator::SpinRaise if !s.up => (LocalState { up: true, ..s }, 1.0),
            Generator::SpinRaise => continue,
        };
        if let Some(local) = basis.find(target) {
            let b = replace_digits(a, &[(site, digits[site], local)], &basis);
            op[(b, a)] = Complex64::new(amp, 0.0);
        }
    }
    Ok(op)
}

/// Lowest eigenpair of a Hermitian matrix.
pub fn ground_state(h: &CMatrix) -> Result<(f64, Vec<Complex64>)> {
    let eig = hermitian_eigen(h)?;
    Ok((eig.values[0], eig.vector(0)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumResult {
    pub energies: Vec<f64>,
    /// ⟨C⟩ for each returned eigenstate.
    pub charge_values: Vec<f64>,
    pub cutoff_used: TruncationSpec,
}

/// The `m` lowest levels of a chiral-layout Hamiltonian with their charges.
/// A Hamiltonian that conserves C is diagonalized sector by sector, so every
/// eigenstate has a definite charge even inside degenerate levels; otherwise
/// the full matrix is diagonalized and ⟨C⟩ is reported.
pub fn low_spectrum(h: &CMatrix, trunc: &TruncationSpec, m: usize) -> Result<SpectrumResult> {
    let charges = charge_values(trunc)?;
    let dim = charges.len();
    if h.rows() != dim || h.cols() != dim {
        return Err(Error::InvalidInput(format!("operator is {}x{}, basis has {dim} states", h.rows(), h.cols())));
    }
    if m > dim {
        return Err(Error::InvalidInput(format!("asked for {m} levels of a {dim}-dimensional space")));
    }

    let scale = h.max_abs().max(1.0);
    let conserves = (0..dim).all(|a| (0..dim).all(|b| charges[a] == charges[b] || h[(a, b)].norm() <= 1e-14 * scale));
    let mut levels: Vec<(f64, f64)> = Vec::with_capacity(dim);
    if conserves {
        let mut sectors: Vec<f64> = charges.clone();
        sectors.sort_by(f64::total_cmp);
        sectors.dedup();
        for c in sectors {
            let idx: Vec<usize> = (0..dim).filter(|&a| charges[a] == c).collect();
            let block = CMatrix::from_fn(idx.len(), idx.len(), |i, j| h[(idx[i], idx[j])]);
            for e in hermitian_eigenvalues(&block)? {
                levels.push((e, c));
            }
        }
    } else {
        let eig = hermitian_eigen(h)?;
        for (p, &e) in eig.values.iter().enumerate() {
            let v = eig.vector(p);
            levels.push((e, v.iter().zip(&charges).map(|(x, c)| x.norm_sqr() * c).sum()));
        }
    }
    levels.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    levels.truncate(m);
    Ok(SpectrumResult {
        energies: levels.iter().map(|l| l.0).collect(),
        charge_values: levels.iter().map(|l| l.1).collect(),
        cutoff_used: *trunc,
    })
}

/// Largest |[H, C]_{ab}| and |(RHR† − H)_{ab}| over interior states, plus
/// the same over the whole space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetryDefects {
    pub commutator_interior: f64,
    pub commutator_full: f64,
    pub rotation_interior: f64,
    pub rotation_full: f64,
}

pub fn symmetry_defects(h: &CMatrix, trunc: &TruncationSpec, phi: f64) -> Result<SymmetryDefects> {
    let c = charge_operator(trunc)?;
    let r = symmetry_rotation(phi, trunc)?;
    let interior = interior_states(trunc)?;
    let comm = h.matmul(&c).sub(&c.matmul(h));
    let rot = r.matmul(h).matmul(&r.adjoint()).sub(h);
    let restricted = |m: &CMatrix| {
        let mut worst = 0.0_f64;
        for a in (0..m.rows()).filter(|&a| interior[a]) {
            for b in (0..m.cols()).filter(|&b| interior[b]) {
                worst = worst.max(m[(a, b)].norm());
            }
        }
        worst
    };
    Ok(SymmetryDefects {
        commutator_interior: restricted(&comm),
        commutator_full: comm.max_abs(),
        rotation_interior: restricted(&rot),
        rotation_full: rot.max_abs(),
    })
}

/// Largest difference between the sorted spectra of the Cartesian and chiral
/// builders, evaluated on the total-quanta truncation with the same n_max.
pub fn basis_agreement(model: &Model, trunc: &TruncationSpec) -> Result<f64> {
    let symmetric = trunc.with_scheme(TruncationScheme::TotalQuanta);
    let cart = hermitian_eigenvalues(&build_hamiltonian(model, &symmetric)?)?;
    let chiral = hermitian_eigenvalues(&build_hamiltonian_chiral(model, &symmetric)?)?;
    Ok(cart.iter().zip(&chiral).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Summary of the exact-diagonalization checks for one model and cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct EdReport {
    pub e0: f64,
    pub e_mf: f64,
    pub ratio: f64,
    pub commutator_norm: f64,
    pub rotation_defect: f64,
    pub basis_agreement: f64,
    pub dimension: usize,
}

/// Ground energy of the chiral Hamiltonian, the homogeneous mean-field
/// energy, the symmetry defects on the interior sector (rotation angle 0.7),
/// and the Cartesian/chiral spectrum agreement.
pub fn ed_check(model: &Model, trunc: &TruncationSpec) -> Result<EdReport> {
    let h = build_hamiltonian_chiral(model, trunc)?;
    let (e0, _) = ground_state(&h)?;
    let e_mf = classical_energy(model, &homogeneous_saddle_point(model)?)?;
    let defects = symmetry_defects(&h, trunc, 0.7)?;
    Ok(EdReport {
        e0,
        e_mf,
        ratio: e0 / e_mf,
        commutator_norm: defects.commutator_interior,
        rotation_defect: defects.rotation_interior,
        basis_agreement: basis_agreement(model, trunc)?,
        dimension: h.rows(),
    })
}
