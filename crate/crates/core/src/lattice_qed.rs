//! One-dimensional U(1) lattice with truncated link fields and static charges.
//!
//! Sites `1..=N` carry charges `q_x ∈ {−1, 0, +1}`; link `x` sits to the right
//! of site `x` and carries an integer field `E_x ∈ [−E_max, E_max]`. The left
//! boundary field `E_0 := ε_L` is a fixed classical value, and link `N` plays
//! the role of the boundary at infinity.
//!
//! Configuration basis layout: `[3; N]` site factors followed by `[2E_max+1; N]`
//! link factors, so flat order is lexicographic in `(q_1..q_N, E_1..E_N)`.
//!
//! Gauss operator: `𝒢_x = E_x − E_{x−1} − q_x`. Gauge generator, with
//! `ξ_0 := ξ_L` and `ξ_{N+1} := ξ_∞`:
//!
//! ```text
//! Q^ξ = Σ_{x=0}^{N} E_x (ξ_{x+1} − ξ_x) + Σ_{x=1}^{N} ξ_x q_x
//!     = (ξ_∞ E_N − ξ_L ε_L)  −  Σ_x ξ_x 𝒢_x
//!        surface term          bulk term
//! ```
//!
//! so on the Gauss-law kernel `Q^ξ = ξ_∞ Q + (ξ_∞ − ξ_L) ε_L` with total charge
//! `Q = E_N − ε_L`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{
    CMatrix, DiagonalOperator, FactorSplit, Operator, StateVector, TensorLayout, NORM_TOL,
};
use crate::par::{self, Execution};

/// Largest flat dimension for configuration enumeration.
pub const MAX_ENUMERATION_DIM: usize = 20_000;
/// Largest flat dimension for dense operator work.
pub const MAX_DENSE_DIM: usize = 400;
/// Tolerance for the exact-arithmetic identities and superselection checks.
pub const EXACT_TOL: f64 = 1e-12;

const SITE_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LatticeSpec {
    sites: usize,
    e_max: i64,
    left_field: i64,
}

impl LatticeSpec {
    pub fn new(sites: usize, e_max: i64, left_field: i64) -> Result<Self> {
        if sites == 0 {
            return Err(Error::InvalidParameter(
                "lattice needs at least one site".into(),
            ));
        }
        if e_max < 1 {
            return Err(Error::InvalidParameter(format!(
                "field truncation must be >= 1, got {e_max}"
            )));
        }
        if left_field.abs() > e_max {
            return Err(Error::InvalidParameter(format!(
                "left boundary field {left_field} outside [-{e_max}, {e_max}]"
            )));
        }
        Ok(Self {
            sites,
            e_max,
            left_field,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn e_max(&self) -> i64 {
        self.e_max
    }

    pub fn left_field(&self) -> i64 {
        self.left_field
    }

    pub fn link_dim(&self) -> usize {
        (2 * self.e_max + 1) as usize
    }

    /// `3^N (2E_max+1)^N`, or [`Error::DimensionOverflow`] if it overflows.
    pub fn flat_dim(&self) -> Result<usize> {
        let per_cell = SITE_DIM * self.link_dim();
        (0..self.sites)
            .try_fold(1usize, |acc, _| acc.checked_mul(per_cell))
            .ok_or(Error::DimensionOverflow {
                dim: usize::MAX,
                max: MAX_ENUMERATION_DIM,
            })
    }

    pub fn layout(&self) -> Result<TensorLayout> {
        let mut dims = vec![SITE_DIM; self.sites];
        dims.extend(std::iter::repeat_n(self.link_dim(), self.sites));
        TensorLayout::new(dims)
    }

    fn check_dim(&self, max: usize) -> Result<usize> {
        let dim = self.flat_dim()?;
        if dim > max {
            return Err(Error::DimensionOverflow { dim, max });
        }
        Ok(dim)
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.sites {
            return Err(Error::SiteOutOfRange {
                site,
                sites: self.sites,
            });
        }
        Ok(())
    }

    /// Configuration of a flat basis index.
    pub fn decode(&self, mut flat: usize) -> Configuration {
        let n = self.sites;
        let ld = self.link_dim();
        let mut fields = vec![0i64; n];
        for x in (0..n).rev() {
            fields[x] = (flat % ld) as i64 - self.e_max;
            flat /= ld;
        }
        let mut charges = vec![0i64; n];
        for x in (0..n).rev() {
            charges[x] = (flat % SITE_DIM) as i64 - 1;
            flat /= SITE_DIM;
        }
        Configuration { charges, fields }
    }

    /// Flat index of a configuration; `None` if any value is out of range.
    pub fn encode(&self, cfg: &Configuration) -> Option<usize> {
        if cfg.charges.len() != self.sites || cfg.fields.len() != self.sites {
            return None;
        }
        let mut flat = 0usize;
        for &q in &cfg.charges {
            if !(-1..=1).contains(&q) {
                return None;
            }
            flat = flat * SITE_DIM + (q + 1) as usize;
        }
        for &e in &cfg.fields {
            if e.abs() > self.e_max {
                return None;
            }
            flat = flat * self.link_dim() + (e + self.e_max) as usize;
        }
        Some(flat)
    }

    /// `E_x − E_{x−1} − q_x` on one configuration.
    pub fn gauss_value(&self, cfg: &Configuration, site: usize) -> i64 {
        cfg.field_or_boundary(site, self.left_field)
            - cfg.field_or_boundary(site - 1, self.left_field)
            - cfg.charge(site)
    }

    /// `E_N − ε_L`.
    pub fn boundary_charge(&self, cfg: &Configuration) -> i64 {
        cfg.field(self.sites) - self.left_field
    }

    fn diagonal(&self, f: impl Fn(&Configuration) -> f64) -> Result<DiagonalOperator> {
        self.diagonal_over(&enumerate_basis(self)?, f)
    }

    /// Diagonal operator from a precomputed basis enumeration.
    fn diagonal_over(
        &self,
        basis: &[Configuration],
        f: impl Fn(&Configuration) -> f64,
    ) -> Result<DiagonalOperator> {
        DiagonalOperator::new(self.layout()?, basis.iter().map(f).collect())
    }
}

/// Charges and link fields of one basis configuration (0-based storage,
/// 1-based accessors).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub charges: Vec<i64>,
    pub fields: Vec<i64>,
}

impl Configuration {
    pub fn charge(&self, site: usize) -> i64 {
        self.charges[site - 1]
    }

    pub fn field(&self, link: usize) -> i64 {
        self.fields[link - 1]
    }

    fn field_or_boundary(&self, link: usize, left_field: i64) -> i64 {
        if link == 0 {
            left_field
        } else {
            self.field(link)
        }
    }

    pub fn total_site_charge(&self) -> i64 {
        self.charges.iter().sum()
    }
}

/// All configurations in flat-index order.
pub fn enumerate_basis(spec: &LatticeSpec) -> Result<Vec<Configuration>> {
    let dim = spec.check_dim(MAX_ENUMERATION_DIM)?;
    Ok((0..dim).map(|i| spec.decode(i)).collect())
}

pub fn gauss_operator(spec: &LatticeSpec, site: usize) -> Result<DiagonalOperator> {
    spec.check_site(site)?;
    spec.diagonal(|cfg| spec.gauss_value(cfg, site) as f64)
}

/// Joint kernel of all Gauss operators, found by filtering the enumerated
/// configuration basis.
#[derive(Debug, Clone)]
pub struct PhysicalSubspace {
    spec: LatticeSpec,
    layout: TensorLayout,
    basis: Vec<usize>,
    configurations: Vec<Configuration>,
}

impl PhysicalSubspace {
    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn layout(&self) -> &TensorLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Flat indices of the physical configurations, ascending.
    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn configurations(&self) -> &[Configuration] {
        &self.configurations
    }

    /// Physical coordinate of a flat index, if that configuration is physical.
    pub fn position(&self, flat: usize) -> Option<usize> {
        self.basis.binary_search(&flat).ok()
    }

    pub fn basis_state(&self, k: usize) -> Result<StateVector> {
        let flat = *self.basis.get(k).ok_or(Error::DimensionMismatch {
            expected: self.dim(),
            found: k,
        })?;
        StateVector::basis(self.layout.clone(), flat)
    }

    /// Full-space vector with the given physical coordinates.
    pub fn embed(&self, coords: &[C64]) -> Result<StateVector> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: coords.len(),
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); self.layout.flat_dim()];
        for (&flat, &c) in self.basis.iter().zip(coords) {
            amps[flat] = c;
        }
        StateVector::new(self.layout.clone(), amps)
    }

    /// Physical coordinates of a full-space vector supported on the kernel.
    pub fn project(&self, psi: &StateVector) -> Result<Vec<C64>> {
        self.layout.check_flat(psi.dim())?;
        let total = psi.norm_sqr();
        let inside: f64 = self
            .basis
            .iter()
            .map(|&f| psi.amplitudes()[f].norm_sqr())
            .sum();
        let weight = (total - inside).max(0.0);
        if weight > KERNEL_LEAK_TOL * total.max(1.0) {
            return Err(Error::OutsideKernel { weight });
        }
        Ok(self.basis.iter().map(|&f| psi.amplitudes()[f]).collect())
    }

    /// Diagonal of a diagonal operator restricted to the kernel.
    pub fn restrict_diagonal(&self, op: &DiagonalOperator) -> Vec<f64> {
        self.basis.iter().map(|&f| op.diagonal()[f]).collect()
    }

    /// Physical block `P O P` of a dense operator, in physical coordinates.
    pub fn restrict(&self, op: &Operator) -> CMatrix {
        let m = op.matrix();
        CMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            m[(self.basis[i], self.basis[j])]
        })
    }
}

const KERNEL_LEAK_TOL: f64 = 1e-20;

pub fn physical_subspace(spec: &LatticeSpec) -> Result<PhysicalSubspace> {
    let dim = spec.check_dim(MAX_ENUMERATION_DIM)?;
    let mut basis = Vec::new();
    let mut configurations = Vec::new();
    for flat in 0..dim {
        let cfg = spec.decode(flat);
        if (1..=spec.sites).all(|x| spec.gauss_value(&cfg, x) == 0) {
            basis.push(flat);
            configurations.push(cfg);
        }
    }
    Ok(PhysicalSubspace {
        spec: *spec,
        layout: spec.layout()?,
        basis,
        configurations,
    })
}

/// Gauge parameter: site values `ξ_1..ξ_N` plus the boundary values `ξ_L`
/// and `ξ_∞`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeFunction {
    values: Vec<f64>,
    left: f64,
    infinity: f64,
}

impl GaugeFunction {
    pub fn new(values: Vec<f64>, left: f64, infinity: f64) -> Result<Self> {
        if values
            .iter()
            .chain([&left, &infinity])
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidParameter(
                "gauge function values must be finite".into(),
            ));
        }
        Ok(Self {
            values,
            left,
            infinity,
        })
    }

    pub fn constant(sites: usize, value: f64) -> Self {
        Self {
            values: vec![value; sites],
            left: value,
            infinity: value,
        }
    }

    /// Uniform in `[−1, 1)` at every site and boundary.
    pub fn random(sites: usize, rng: &mut impl Rng) -> Self {
        let values = (0..sites).map(|_| rng.random_range(-1.0..1.0)).collect();
        Self {
            values,
            left: rng.random_range(-1.0..1.0),
            infinity: rng.random_range(-1.0..1.0),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn infinity(&self) -> f64 {
        self.infinity
    }

    /// `ξ_k` for `k = 0..=N+1`, boundaries included.
    fn at(&self, k: usize) -> f64 {
        if k == 0 {
            self.left
        } else if k > self.values.len() {
            self.infinity
        } else {
            self.values[k - 1]
        }
    }

    fn check(&self, spec: &LatticeSpec) -> Result<()> {
        if self.values.len() != spec.sites {
            return Err(Error::DimensionMismatch {
                expected: spec.sites,
                found: self.values.len(),
            });
        }
        Ok(())
    }
}

fn generator_value(spec: &LatticeSpec, xi: &GaugeFunction, cfg: &Configuration) -> f64 {
    let n = spec.sites;
    let links: f64 = (0..=n)
        .map(|x| cfg.field_or_boundary(x, spec.left_field) as f64 * (xi.at(x + 1) - xi.at(x)))
        .sum();
    let sites: f64 = (1..=n).map(|x| xi.at(x) * cfg.charge(x) as f64).sum();
    links + sites
}

fn surface_value(spec: &LatticeSpec, xi: &GaugeFunction, cfg: &Configuration) -> f64 {
    xi.infinity * cfg.field(spec.sites) as f64 - xi.left * spec.left_field as f64
}

fn bulk_value(spec: &LatticeSpec, xi: &GaugeFunction, cfg: &Configuration) -> f64 {
    -(1..=spec.sites)
        .map(|x| xi.at(x) * spec.gauss_value(cfg, x) as f64)
        .sum::<f64>()
}

/// `ξ_∞ Q + (ξ_∞ − ξ_L) ε_L`, the value `Q^ξ` must take on the kernel.
pub fn boundary_flux_form(spec: &LatticeSpec, xi: &GaugeFunction, cfg: &Configuration) -> f64 {
    xi.infinity * spec.boundary_charge(cfg) as f64
        + (xi.infinity - xi.left) * spec.left_field as f64
}

/// The gauge generator `Q^ξ` (diagonal in the configuration basis).
pub fn gauge_generator(spec: &LatticeSpec, xi: &GaugeFunction) -> Result<DiagonalOperator> {
    generator_over(spec, xi, &enumerate_basis(spec)?)
}

fn generator_over(
    spec: &LatticeSpec,
    xi: &GaugeFunction,
    basis: &[Configuration],
) -> Result<DiagonalOperator> {
    xi.check(spec)?;
    spec.diagonal_over(basis, |cfg| generator_value(spec, xi, cfg))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDecomposition {
    /// `ξ_∞ E_N − ξ_L ε_L`.
    pub surface: DiagonalOperator,
    /// `−Σ_x ξ_x 𝒢_x`.
    pub bulk: DiagonalOperator,
}

impl BoundaryDecomposition {
    /// `max |Q^ξ − surface − bulk|` against a generator built separately.
    pub fn residual(&self, generator: &DiagonalOperator) -> Result<f64> {
        Ok(generator.sub(&self.surface)?.sub(&self.bulk)?.max_abs())
    }
}

pub fn boundary_decomposition(
    spec: &LatticeSpec,
    xi: &GaugeFunction,
) -> Result<BoundaryDecomposition> {
    decomposition_over(spec, xi, &enumerate_basis(spec)?)
}

fn decomposition_over(
    spec: &LatticeSpec,
    xi: &GaugeFunction,
    basis: &[Configuration],
) -> Result<BoundaryDecomposition> {
    xi.check(spec)?;
    Ok(BoundaryDecomposition {
        surface: spec.diagonal_over(basis, |cfg| surface_value(spec, xi, cfg))?,
        bulk: spec.diagonal_over(basis, |cfg| bulk_value(spec, xi, cfg))?,
    })
}

/// `Q = E_N − ε_L`.
pub fn total_charge(spec: &LatticeSpec) -> Result<DiagonalOperator> {
    spec.diagonal(|cfg| spec.boundary_charge(cfg) as f64)
}

/// Physical basis grouped by total charge.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorDecomposition {
    layout: TensorLayout,
    basis: Vec<usize>,
    charges: Vec<i64>,
    sectors: BTreeMap<i64, Vec<usize>>,
}

impl SectorDecomposition {
    /// Charge → physical coordinates in that sector.
    pub fn sectors(&self) -> &BTreeMap<i64, Vec<usize>> {
        &self.sectors
    }

    pub fn sector_sizes(&self) -> BTreeMap<i64, usize> {
        self.sectors.iter().map(|(&q, v)| (q, v.len())).collect()
    }

    pub fn charge_of(&self, physical_index: usize) -> i64 {
        self.charges[physical_index]
    }

    fn physical_amplitudes(&self, psi: &StateVector) -> Result<Vec<C64>> {
        self.layout.check_flat(psi.dim())?;
        let total = psi.norm_sqr();
        let inside: f64 = self
            .basis
            .iter()
            .map(|&f| psi.amplitudes()[f].norm_sqr())
            .sum();
        let weight = (total - inside).max(0.0);
        if weight > KERNEL_LEAK_TOL * total.max(1.0) {
            return Err(Error::OutsideKernel { weight });
        }
        Ok(self.basis.iter().map(|&f| psi.amplitudes()[f]).collect())
    }

    /// Sector of a charge eigenstate.
    pub fn sector_of(&self, psi: &StateVector) -> Result<i64> {
        let coords = self.physical_amplitudes(psi)?;
        let total: f64 = coords.iter().map(|c| c.norm_sqr()).sum();
        let mut found = None;
        for (&q, members) in &self.sectors {
            let w: f64 = members.iter().map(|&k| coords[k].norm_sqr()).sum();
            if w > KERNEL_LEAK_TOL * total.max(1.0) {
                if found.is_some() {
                    return Err(Error::NotChargeEigenstate);
                }
                found = Some(q);
            }
        }
        found.ok_or(Error::NotChargeEigenstate)
    }
}

pub fn sector_decomposition(subspace: &PhysicalSubspace) -> SectorDecomposition {
    let spec = subspace.spec;
    let charges: Vec<i64> = subspace
        .configurations
        .iter()
        .map(|cfg| spec.boundary_charge(cfg))
        .collect();
    let mut sectors: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (k, &q) in charges.iter().enumerate() {
        sectors.entry(q).or_default().push(k);
    }
    SectorDecomposition {
        layout: subspace.layout.clone(),
        basis: subspace.basis.clone(),
        charges,
        sectors,
    }
}

/// Multiplies the charge-`Q` component of a physical state by `e^{iQθ}`.
pub fn charge_phase_action(
    decomp: &SectorDecomposition,
    state: &StateVector,
    theta: f64,
) -> Result<StateVector> {
    decomp.physical_amplitudes(state)?;
    let mut amps = state.amplitudes().to_vec();
    for (k, &flat) in decomp.basis.iter().enumerate() {
        amps[flat] *= C64::from_polar(1.0, decomp.charges[k] as f64 * theta);
    }
    StateVector::new(state.layout().clone(), amps)
}

/// `e^{i Q^ξ} ψ`.
pub fn gauge_transform(
    spec: &LatticeSpec,
    xi: &GaugeFunction,
    state: &StateVector,
) -> Result<StateVector> {
    let generator = gauge_generator(spec, xi)?;
    generator.layout().check_flat(state.dim())?;
    let amps = state
        .amplitudes()
        .iter()
        .zip(generator.exp_i(1.0))
        .map(|(a, p)| a * p)
        .collect();
    StateVector::new(state.layout().clone(), amps)
}

/// Image of a configuration under the Wilson line from site `x` to the right
/// boundary: `q_x → q_x + 1` and `E_l → E_l + 1` for every `l ≥ x`. `None` when
/// the result leaves the truncated range.
pub fn wilson_shift(spec: &LatticeSpec, cfg: &Configuration, site: usize) -> Option<Configuration> {
    let mut out = cfg.clone();
    out.charges[site - 1] += 1;
    for l in site..=spec.sites {
        out.fields[l - 1] += 1;
    }
    spec.encode(&out).map(|_| out)
}

/// Dense Wilson-line operator `W_x` (not Hermitian; `W + W†` is the observable).
pub fn wilson_line(spec: &LatticeSpec, site: usize) -> Result<Operator> {
    spec.check_site(site)?;
    let dim = spec.check_dim(MAX_DENSE_DIM)?;
    let mut m = CMatrix::zeros(dim, dim);
    for flat in 0..dim {
        if let Some(target) = wilson_shift(spec, &spec.decode(flat), site) {
            let to = spec.encode(&target).expect("shift stays in range");
            m[(to, flat)] = C64::new(1.0, 0.0);
        }
    }
    Operator::new(spec.layout()?, m)
}

/// Flat indices on which `W_x` does not clip.
pub fn wilson_unclipped(spec: &LatticeSpec, site: usize) -> Result<Vec<usize>> {
    spec.check_site(site)?;
    let dim = spec.check_dim(MAX_ENUMERATION_DIM)?;
    Ok((0..dim)
        .filter(|&f| wilson_shift(spec, &spec.decode(f), site).is_some())
        .collect())
}

/// Support of a local operator: a set of sites and links.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Interior {
    pub sites: BTreeSet<usize>,
    pub links: BTreeSet<usize>,
}

impl Interior {
    pub fn new(
        sites: impl IntoIterator<Item = usize>,
        links: impl IntoIterator<Item = usize>,
    ) -> Self {
        Self {
            sites: sites.into_iter().collect(),
            links: links.into_iter().collect(),
        }
    }

    /// Every site and every link except the boundary link `N`.
    pub fn maximal(spec: &LatticeSpec) -> Self {
        Self::new(1..=spec.sites, 1..spec.sites)
    }

    /// The whole lattice, boundary link included.
    pub fn everything(spec: &LatticeSpec) -> Self {
        Self::new(1..=spec.sites, 1..=spec.sites)
    }

    fn factors(&self, spec: &LatticeSpec) -> Result<Vec<usize>> {
        let n = spec.sites;
        if self.sites.is_empty() && self.links.is_empty() {
            return Err(Error::InvalidParameter("interior is empty".into()));
        }
        let mut factors = Vec::new();
        for &s in &self.sites {
            spec.check_site(s)?;
            factors.push(s - 1);
        }
        for &l in &self.links {
            if l == 0 || l > n {
                return Err(Error::LinkOutOfRange { link: l, sites: n });
            }
            factors.push(n + l - 1);
        }
        Ok(factors)
    }
}

/// Sparse operator used while building commutant bases.
#[derive(Debug, Clone, Default)]
struct SparseOp {
    entries: HashMap<(usize, usize), C64>,
}

impl SparseOp {
    fn inner(&self, other: &Self) -> C64 {
        let (small, large, conj_small) = if self.entries.len() <= other.entries.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        small
            .entries
            .iter()
            .filter_map(|(k, &v)| {
                large.entries.get(k).map(|&w| {
                    if conj_small {
                        v.conj() * w
                    } else {
                        w.conj() * v
                    }
                })
            })
            .sum()
    }

    fn norm_sqr(&self) -> f64 {
        self.entries.values().map(|v| v.norm_sqr()).sum()
    }

    fn axpy(&mut self, a: f64, other: &Self) {
        for (k, &v) in &other.entries {
            *self.entries.entry(*k).or_default() += v * a;
        }
    }

    fn prune(&mut self) {
        self.entries.retain(|_, v| v.norm() > 1e-15);
    }

    fn matrix_element(&self, bra: &[C64], ket: &[C64]) -> C64 {
        self.entries
            .iter()
            .map(|(&(r, c), &v)| bra[r].conj() * v * ket[c])
            .sum()
    }

    /// `max |[self, D]|` for a real diagonal `D`.
    fn commutator_with_diagonal(&self, diag: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|(&(r, c), &v)| (v * (diag[c] - diag[r])).norm())
            .fold(0.0, f64::max)
    }

    fn to_dense(&self, dim: usize) -> CMatrix {
        let mut m = CMatrix::zeros(dim, dim);
        for (&(r, c), &v) in &self.entries {
            m[(r, c)] = v;
        }
        m
    }

    fn from_dense(m: &CMatrix) -> Self {
        let mut entries = HashMap::new();
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                if m[(r, c)].norm() > 0.0 {
                    entries.insert((r, c), m[(r, c)]);
                }
            }
        }
        Self { entries }
    }
}

/// Hermitian spanning set of the operators supported on `interior` that
/// commute with every Gauss operator. Each interior matrix unit `|a⟩⟨b| ⊗ 1`
/// is pinched onto the joint Gauss eigenspaces, Hermitian combinations are
/// formed, and the result is Gram–Schmidt orthogonalized (Hilbert–Schmidt)
/// after the identity, discarding zeros.
fn commutant_basis(
    spec: &LatticeSpec,
    interior: &Interior,
    exec: Execution,
) -> Result<Vec<SparseOp>> {
    let dim = spec.check_dim(MAX_DENSE_DIM)?;
    let layout = spec.layout()?;
    let split = FactorSplit::new(&layout, &interior.factors(spec)?)?;
    let labels: Vec<Vec<i64>> = (0..dim)
        .map(|f| {
            let cfg = spec.decode(f);
            (1..=spec.sites)
                .map(|x| spec.gauss_value(&cfg, x))
                .collect()
        })
        .collect();
    let di = split.kept.flat_dim();
    let de = split.traced_dim;
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);

    let rows: Vec<usize> = (0..di).collect();
    let candidates: Vec<SparseOp> = par::map(&rows, exec, |&a| {
        let mut out = Vec::new();
        for b in a..di {
            let pairs: Vec<(usize, usize)> = (0..de)
                .map(|e| (split.full_index(a, e), split.full_index(b, e)))
                .filter(|&(fa, fb)| labels[fa] == labels[fb])
                .collect();
            if pairs.is_empty() {
                continue;
            }
            if a == b {
                let mut d = SparseOp::default();
                for &(fa, _) in &pairs {
                    d.entries.insert((fa, fa), one);
                }
                out.push(d);
            } else {
                let mut sym = SparseOp::default();
                let mut anti = SparseOp::default();
                for &(fa, fb) in &pairs {
                    sym.entries.insert((fa, fb), one);
                    sym.entries.insert((fb, fa), one);
                    anti.entries.insert((fa, fb), i);
                    anti.entries.insert((fb, fa), -i);
                }
                out.push(sym);
                out.push(anti);
            }
        }
        out
    })
    .into_iter()
    .flatten()
    .collect();

    let identity = SparseOp {
        entries: (0..dim).map(|f| ((f, f), one)).collect(),
    };
    let mut basis = vec![identity];
    let mut norms = vec![dim as f64];
    for mut v in candidates {
        let start = v.norm_sqr();
        for (b, &nb) in basis.iter().zip(&norms) {
            // Hermitian pairs have real Hilbert–Schmidt products
            let coef = v.inner(b).re / nb;
            if coef.abs() > 1e-14 {
                v.axpy(-coef, b);
            }
        }
        v.prune();
        let n = v.norm_sqr();
        if n > 1e-20 * start {
            basis.push(v);
            norms.push(n);
        }
    }
    Ok(basis)
}

/// Gauge-invariant Hermitian operators supported on `interior`, which must
/// exclude the boundary link. The identity comes first.
pub fn gauge_invariant_local_basis(
    spec: &LatticeSpec,
    interior: &Interior,
) -> Result<Vec<Operator>> {
    if interior.links.contains(&spec.sites) {
        return Err(Error::BoundaryInInterior { link: spec.sites });
    }
    let dim = spec.check_dim(MAX_DENSE_DIM)?;
    let layout = spec.layout()?;
    commutant_basis(spec, interior, Execution::default())?
        .iter()
        .map(|op| Operator::new(layout.clone(), op.to_dense(dim)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperselectionReport {
    pub physical_dim: usize,
    pub sector_sizes: BTreeMap<i64, usize>,
    pub plus_sector: i64,
    pub minus_sector: i64,
    pub includes_boundary_link: bool,
    pub operator_count: usize,
    /// `max_O |⟨Ψ₊|O|Ψ₋⟩|`.
    pub max_cross: f64,
    /// `max_O |⟨O⟩_superposition − ⟨O⟩_mixture|`.
    pub max_mixture_deviation: f64,
    /// `max_O max |[O, Q]|`.
    pub max_charge_commutator: f64,
    /// `max_O max_x max |[O, 𝒢_x]|`.
    pub max_gauss_commutator: f64,
    /// `|⟨Ψ₊|O|Ψ₋⟩|` per operator, in basis order.
    pub cross_elements: Vec<f64>,
    /// `max_x |⟨Ψ₊|W_x + W_x†|Ψ₋⟩|`, only in boundary-including reports.
    pub wilson_cross: Option<f64>,
}

impl SuperselectionReport {
    /// Cross elements and superposition/mixture gap both within `tol`.
    pub fn superselected(&self, tol: f64) -> bool {
        self.max_cross <= tol && self.max_mixture_deviation <= tol
    }
}

struct CheckedPair {
    subspace: PhysicalSubspace,
    decomp: SectorDecomposition,
    plus: (StateVector, i64),
    minus: (StateVector, i64),
}

fn check_pair(spec: &LatticeSpec, plus: &StateVector, minus: &StateVector) -> Result<CheckedPair> {
    for psi in [plus, minus] {
        let norm = psi.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
    }
    let subspace = physical_subspace(spec)?;
    let decomp = sector_decomposition(&subspace);
    let qp = decomp.sector_of(plus)?;
    let qm = decomp.sector_of(minus)?;
    if qp == qm {
        return Err(Error::SameSector(qp));
    }
    Ok(CheckedPair {
        subspace,
        decomp,
        plus: (plus.clone(), qp),
        minus: (minus.clone(), qm),
    })
}

fn build_report(
    spec: &LatticeSpec,
    pair: CheckedPair,
    ops: &[SparseOp],
    includes_boundary_link: bool,
    wilson_cross: Option<f64>,
) -> Result<SuperselectionReport> {
    let plus = pair.plus.0.amplitudes();
    let minus = pair.minus.0.amplitudes();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let superposition: Vec<C64> = plus.iter().zip(minus).map(|(a, b)| (a + b) * s).collect();
    let charge = total_charge(spec)?;
    let gauss = (1..=spec.sites)
        .map(|x| gauss_operator(spec, x))
        .collect::<Result<Vec<_>>>()?;

    let mut cross_elements = Vec::with_capacity(ops.len());
    let mut max_mixture_deviation: f64 = 0.0;
    let mut max_charge_commutator: f64 = 0.0;
    let mut max_gauss_commutator: f64 = 0.0;
    for op in ops {
        cross_elements.push(op.matrix_element(plus, minus).norm());
        let sup = op.matrix_element(&superposition, &superposition);
        let mix = 0.5 * (op.matrix_element(plus, plus) + op.matrix_element(minus, minus));
        max_mixture_deviation = max_mixture_deviation.max((sup - mix).norm());
        max_charge_commutator =
            max_charge_commutator.max(op.commutator_with_diagonal(charge.diagonal()));
        for g in &gauss {
            max_gauss_commutator =
                max_gauss_commutator.max(op.commutator_with_diagonal(g.diagonal()));
        }
    }
    Ok(SuperselectionReport {
        physical_dim: pair.subspace.dim(),
        sector_sizes: pair.decomp.sector_sizes(),
        plus_sector: pair.plus.1,
        minus_sector: pair.minus.1,
        includes_boundary_link,
        operator_count: ops.len(),
        max_cross: cross_elements.iter().copied().fold(0.0, f64::max),
        max_mixture_deviation,
        max_charge_commutator,
        max_gauss_commutator,
        cross_elements,
        wilson_cross,
    })
}

/// Cross-sector matrix elements and superposition-vs-mixture expectations of
/// every gauge-invariant operator on the maximal interior.
pub fn superselection_report(
    spec: &LatticeSpec,
    plus: &StateVector,
    minus: &StateVector,
) -> Result<SuperselectionReport> {
    let pair = check_pair(spec, plus, minus)?;
    let ops = commutant_basis(spec, &Interior::maximal(spec), Execution::default())?;
    build_report(spec, pair, &ops, false, None)
}

/// The same report with the boundary link admitted into the support and the
/// Wilson-line observables `W_x + W_x†`, `i(W_x − W_x†)` appended.
pub fn superselection_contrast(
    spec: &LatticeSpec,
    plus: &StateVector,
    minus: &StateVector,
) -> Result<SuperselectionReport> {
    let pair = check_pair(spec, plus, minus)?;
    let mut ops = commutant_basis(spec, &Interior::everything(spec), Execution::default())?;
    let i = C64::new(0.0, 1.0);
    let mut wilson_cross: f64 = 0.0;
    for x in 1..=spec.sites {
        let w = wilson_line(spec, x)?;
        let wd = w.dagger();
        let sym = w.add(&wd)?;
        let anti = w.sub(&wd)?.scale(i);
        wilson_cross = wilson_cross.max(sym.matrix_element(&pair.plus.0, &pair.minus.0)?.norm());
        ops.push(SparseOp::from_dense(sym.matrix()));
        ops.push(SparseOp::from_dense(anti.matrix()));
    }
    build_report(spec, pair, &ops, true, Some(wilson_cross))
}

/// Superselection run with default state choices: `Ψ₊`/`Ψ₋` are the first
/// basis states of the highest/lowest charge sectors; the contrast pair is the
/// first physical basis state `b` with an unclipped Wilson image, with
/// `Ψ₊ = W_x b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperselectionExperiment {
    pub spec: LatticeSpec,
    pub report: SuperselectionReport,
    pub contrast: Option<SuperselectionReport>,
}

pub fn superselection_experiment(spec: &LatticeSpec) -> Result<SuperselectionExperiment> {
    spec.check_dim(MAX_DENSE_DIM)?;
    let subspace = physical_subspace(spec)?;
    let decomp = sector_decomposition(&subspace);
    let (Some((_, top)), Some((&q_low, low))) = (
        decomp.sectors().iter().next_back(),
        decomp.sectors().iter().next(),
    ) else {
        return Err(Error::InvalidParameter("physical subspace is empty".into()));
    };
    if decomp.sectors().len() < 2 {
        return Err(Error::SameSector(q_low));
    }
    let plus = subspace.basis_state(top[0])?;
    let minus = subspace.basis_state(low[0])?;
    let report = superselection_report(spec, &plus, &minus)?;

    let mut contrast = None;
    'search: for (k, cfg) in subspace.configurations().iter().enumerate() {
        for x in 1..=spec.sites {
            if let Some(image) = wilson_shift(spec, cfg, x) {
                let flat = spec.encode(&image).expect("shift stays in range");
                let up = StateVector::basis(spec.layout()?, flat)?;
                let down = subspace.basis_state(k)?;
                contrast = Some(superselection_contrast(spec, &up, &down)?);
                break 'search;
            }
        }
    }
    Ok(SuperselectionExperiment {
        spec: *spec,
        report,
        contrast,
    })
}

/// Residuals of the surface/bulk identity and of the kernel form of `Q^ξ`
/// over random gauge functions, for every admissible left boundary field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheckReport {
    pub sites: usize,
    pub e_max: i64,
    pub left_fields: Vec<i64>,
    pub samples: usize,
    pub seed: u64,
    /// `max |Q^ξ − surface − bulk|`.
    pub max_identity_residual: f64,
    /// `max |Q^ξ − ξ_∞ Q − (ξ_∞ − ξ_L) ε_L|` over physical states.
    pub max_kernel_residual: f64,
    /// Physical dimension per left boundary field.
    pub physical_dims: BTreeMap<i64, usize>,
}

impl IdentityCheckReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_identity_residual <= tol && self.max_kernel_residual <= tol
    }
}

pub fn identity_check(
    sites: usize,
    e_max: i64,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<IdentityCheckReport> {
    LatticeSpec::new(sites, e_max, 0)?.check_dim(MAX_ENUMERATION_DIM)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xis: Vec<GaugeFunction> = (0..samples)
        .map(|_| GaugeFunction::random(sites, &mut rng))
        .collect();

    let mut max_identity: f64 = 0.0;
    let mut max_kernel: f64 = 0.0;
    let mut physical_dims = BTreeMap::new();
    let left_fields: Vec<i64> = (-e_max..=e_max).collect();
    for &eps in &left_fields {
        let spec = LatticeSpec::new(sites, e_max, eps)?;
        let subspace = physical_subspace(&spec)?;
        physical_dims.insert(eps, subspace.dim());
        let basis = enumerate_basis(&spec)?;
        let residuals = par::try_map(&xis, exec, |xi| -> Result<(f64, f64)> {
            let generator = generator_over(&spec, xi, &basis)?;
            let split = decomposition_over(&spec, xi, &basis)?;
            let identity = split.residual(&generator)?;
            let kernel = subspace
                .basis()
                .iter()
                .zip(subspace.configurations())
                .map(|(&f, cfg)| {
                    (generator.diagonal()[f] - boundary_flux_form(&spec, xi, cfg)).abs()
                })
                .fold(0.0, f64::max);
            Ok((identity, kernel))
        })?;
        for (a, b) in residuals {
            max_identity = max_identity.max(a);
            max_kernel = max_kernel.max(b);
        }
    }
    Ok(IdentityCheckReport {
        sites,
        e_max,
        left_fields,
        samples,
        seed,
        max_identity_residual: max_identity,
        max_kernel_residual: max_kernel,
        physical_dims,
    })
}
