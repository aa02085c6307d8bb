//! System–apparatus–environment decoherence.
//!
//! A correlated state `Σ c_n |φ_n⟩⊗|Φ_n⟩⊗|ℰ_n⟩` reduced over the environment
//! keeps its branch interference terms only in proportion to the environment
//! overlaps `⟨ℰ_n|ℰ_m⟩`. The spin-bath model below makes the overlap decay
//! dynamical: a central qubit dephases against `N` bath spins prepared in
//! `|+⟩`, and the exact coherence is `Π_k |cos(g_k t)|`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, StateVector, TensorLayout};
use crate::par::{self, Execution};

/// Tolerance on the total-state norm of a correlated-state spec.
pub const SPEC_NORM_TOL: f64 = 1e-9;
/// Largest bath for dense state evolution (flat dimension `2^(N+1)`).
pub const MAX_DENSE_BATH: usize = 12;

/// Branches of a correlated system–apparatus–environment state.
///
/// Environment states need not be orthogonal. Normalization of the total state
/// is checked by [`build_correlated_state`], never repaired.
#[derive(Debug, Clone)]
pub struct CorrelatedStateSpec {
    coefficients: Vec<C64>,
    system: Vec<StateVector>,
    apparatus: Vec<StateVector>,
    environment: Vec<StateVector>,
}

impl CorrelatedStateSpec {
    pub fn new(
        coefficients: Vec<C64>,
        system: Vec<StateVector>,
        apparatus: Vec<StateVector>,
        environment: Vec<StateVector>,
    ) -> Result<Self> {
        let n = coefficients.len();
        if n == 0 {
            return Err(Error::BranchCount("no branches".into()));
        }
        for (name, list) in [
            ("system", &system),
            ("apparatus", &apparatus),
            ("environment", &environment),
        ] {
            if list.len() != n {
                return Err(Error::BranchCount(format!(
                    "{n} coefficients but {} {name} states",
                    list.len()
                )));
            }
            let dim = list[0].dim();
            if let Some(bad) = list.iter().find(|s| s.dim() != dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: bad.dim(),
                });
            }
        }
        Ok(Self {
            coefficients,
            system,
            apparatus,
            environment,
        })
    }

    pub fn branches(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn system(&self) -> &[StateVector] {
        &self.system
    }

    pub fn apparatus(&self) -> &[StateVector] {
        &self.apparatus
    }

    pub fn environment(&self) -> &[StateVector] {
        &self.environment
    }

    /// `‖Ψ‖²` from the branch Gram matrices, without building `Ψ`.
    pub fn norm_sqr(&self) -> Result<f64> {
        let n = self.branches();
        let mut total = C64::new(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                total += self.coefficients[a].conj()
                    * self.coefficients[b]
                    * self.system[a].inner(&self.system[b])?
                    * self.apparatus[a].inner(&self.apparatus[b])?
                    * self.environment[a].inner(&self.environment[b])?;
            }
        }
        Ok(total.re)
    }

    pub fn validate_normalization(&self) -> Result<()> {
        let norm_sqr = self.norm_sqr()?;
        if (norm_sqr - 1.0).abs() > SPEC_NORM_TOL {
            return Err(Error::NotNormalized {
                norm: norm_sqr.max(0.0).sqrt(),
            });
        }
        Ok(())
    }

    fn check_branch(&self, index: usize) -> Result<()> {
        if index >= self.branches() {
            return Err(Error::BranchOutOfRange {
                index,
                branches: self.branches(),
            });
        }
        Ok(())
    }

    fn system_apparatus_layout(&self) -> Result<TensorLayout> {
        TensorLayout::new(vec![self.system[0].dim(), self.apparatus[0].dim()])
    }
}

/// `Σ_n c_n φ_n ⊗ Φ_n ⊗ ℰ_n` with layout `(dim_S, dim_A, dim_E)`.
pub fn build_correlated_state(spec: &CorrelatedStateSpec) -> Result<StateVector> {
    spec.validate_normalization()?;
    let dim_s = spec.system[0].dim();
    let dim_a = spec.apparatus[0].dim();
    let dim_e = spec.environment[0].dim();
    let layout = TensorLayout::new(vec![dim_s, dim_a, dim_e])?;
    let mut amps = vec![C64::new(0.0, 0.0); layout.flat_dim()];
    for n in 0..spec.branches() {
        let c = spec.coefficients[n];
        let sa = spec.system[n].tensor(&spec.apparatus[n]);
        let env = spec.environment[n].amplitudes();
        for (i, &x) in sa.amplitudes().iter().enumerate() {
            let w = c * x;
            if w == C64::new(0.0, 0.0) {
                continue;
            }
            let block = &mut amps[i * dim_e..(i + 1) * dim_e];
            for (slot, &e) in block.iter_mut().zip(env) {
                *slot += w * e;
            }
        }
    }
    StateVector::new(layout, amps)
}

/// Trace out the environment (third factor) of a unit three-factor state.
pub fn reduce_to_apparatus(psi: &StateVector) -> Result<DensityMatrix> {
    let found = psi.layout().num_factors();
    if found != 3 {
        return Err(Error::FactorCount { expected: 3, found });
    }
    DensityMatrix::reduce_pure(psi, &[0, 1])
}

/// The same reduced state assembled from branch data and environment overlaps:
/// `ρ = Σ_{n,m} c_m c_n* ⟨ℰ_n|ℰ_m⟩ |φ_mΦ_m⟩⟨φ_nΦ_n|`.
pub fn reduced_from_branches(spec: &CorrelatedStateSpec) -> Result<DensityMatrix> {
    spec.validate_normalization()?;
    let layout = spec.system_apparatus_layout()?;
    let kets: Vec<StateVector> = (0..spec.branches())
        .map(|n| spec.system[n].tensor(&spec.apparatus[n]))
        .collect();
    let d = layout.flat_dim();
    let mut m = crate::hilbert::CMatrix::zeros(d, d);
    for n in 0..spec.branches() {
        for k in 0..spec.branches() {
            let w = spec.coefficients[k]
                * spec.coefficients[n].conj()
                * spec.environment[n].inner(&spec.environment[k])?;
            let ket = kets[k].amplitudes();
            let bra = kets[n].amplitudes();
            for i in 0..d {
                if ket[i] == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    m[(i, j)] += w * ket[i] * bra[j].conj();
                }
            }
        }
    }
    DensityMatrix::new(layout, m)
}

/// `⟨ℰ_n|ℰ_m⟩`.
pub fn environment_overlap(spec: &CorrelatedStateSpec, n: usize, m: usize) -> Result<C64> {
    spec.check_branch(n)?;
    spec.check_branch(m)?;
    spec.environment[n].inner(&spec.environment[m])
}

/// Matrix element `⟨φ_nΦ_n|ρ|φ_mΦ_m⟩` of a reduced system–apparatus state.
pub fn branch_element(
    rho: &DensityMatrix,
    spec: &CorrelatedStateSpec,
    n: usize,
    m: usize,
) -> Result<C64> {
    spec.check_branch(n)?;
    spec.check_branch(m)?;
    let bra = spec.system[n].tensor(&spec.apparatus[n]);
    let ket = spec.system[m].tensor(&spec.apparatus[m]);
    if rho.dim() != bra.dim() {
        return Err(Error::DimensionMismatch {
            expected: bra.dim(),
            found: rho.dim(),
        });
    }
    let rk = rho.matrix().mul_vec(ket.amplitudes());
    Ok(bra
        .amplitudes()
        .iter()
        .zip(&rk)
        .map(|(b, r)| b.conj() * r)
        .sum())
}

/// Summary of a tripartite run with orthonormal system/apparatus pointer
/// states and environment states of uniform pairwise overlap.
#[derive(Debug, Clone, Serialize)]
pub struct TripartiteSummary {
    pub branches: usize,
    pub env_overlap: f64,
    /// Diagonal of the reduced state on the branch states, `|c_n|²`.
    pub branch_weights: Vec<f64>,
    pub max_offdiagonal: f64,
    /// `max_{n≠m} |c_n||c_m||⟨ℰ_n|ℰ_m⟩|`.
    pub predicted_offdiagonal: f64,
    pub coherence_norm: f64,
    pub entropy_nats: f64,
    pub purity: f64,
    /// Max elementwise gap between the partial-trace and overlap routes.
    pub route_residual: f64,
}

/// Environment states `√r·|0⟩ + √(1−r)·|n+1⟩`, whose pairwise overlaps are
/// exactly `r` for `0 ≤ r ≤ 1`.
pub fn uniform_overlap_environment(branches: usize, overlap: f64) -> Result<Vec<StateVector>> {
    if !(0.0..=1.0).contains(&overlap) {
        return Err(Error::InvalidParameter(format!(
            "environment overlap must lie in [0, 1], got {overlap}"
        )));
    }
    let dim = branches + 1;
    (0..branches)
        .map(|n| {
            let mut amps = vec![C64::new(0.0, 0.0); dim];
            amps[0] = C64::new(overlap.sqrt(), 0.0);
            amps[n + 1] += C64::new((1.0 - overlap).sqrt(), 0.0);
            StateVector::from_amplitudes(amps)
        })
        .collect()
}

pub fn tripartite_experiment(coefficients: &[f64], env_overlap: f64) -> Result<TripartiteSummary> {
    let n = coefficients.len();
    if n == 0 {
        return Err(Error::BranchCount("no branches".into()));
    }
    let pointer = |k: usize| StateVector::basis(TensorLayout::single(n)?, k);
    let system = (0..n).map(pointer).collect::<Result<Vec<_>>>()?;
    let apparatus = system.clone();
    let environment = uniform_overlap_environment(n, env_overlap)?;
    let coefficients: Vec<C64> = coefficients.iter().map(|&c| C64::new(c, 0.0)).collect();
    let spec = CorrelatedStateSpec::new(coefficients, system, apparatus, environment)?;

    let psi = build_correlated_state(&spec)?;
    let rho = reduce_to_apparatus(&psi)?;
    let via_overlaps = reduced_from_branches(&spec)?;
    let route_residual = rho.matrix().sub(via_overlaps.matrix()).max_abs();

    let mut branch_weights = Vec::with_capacity(n);
    let mut max_offdiagonal: f64 = 0.0;
    let mut predicted: f64 = 0.0;
    for a in 0..n {
        branch_weights.push(branch_element(&rho, &spec, a, a)?.re);
        for b in 0..n {
            if a != b {
                max_offdiagonal = max_offdiagonal.max(branch_element(&rho, &spec, a, b)?.norm());
                predicted = predicted.max(
                    spec.coefficients[a].norm()
                        * spec.coefficients[b].norm()
                        * environment_overlap(&spec, a, b)?.norm(),
                );
            }
        }
    }
    Ok(TripartiteSummary {
        branches: n,
        env_overlap,
        branch_weights,
        max_offdiagonal,
        predicted_offdiagonal: predicted,
        coherence_norm: rho.coherence_norm(),
        entropy_nats: rho.von_neumann_entropy()?,
        purity: rho.purity(),
        route_residual,
    })
}

/// Central qubit with pure-dephasing couplings `g_k` to `N` bath spins.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinBathModel {
    couplings: Vec<f64>,
    weights: (C64, C64),
}

impl SpinBathModel {
    pub fn new(couplings: Vec<f64>, weights: (C64, C64)) -> Result<Self> {
        if couplings.is_empty() {
            return Err(Error::InvalidParameter(
                "bath needs at least one spin".into(),
            ));
        }
        if couplings.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidParameter("couplings must be finite".into()));
        }
        let norm_sqr = weights.0.norm_sqr() + weights.1.norm_sqr();
        if (norm_sqr - 1.0).abs() > SPEC_NORM_TOL {
            return Err(Error::NotNormalized {
                norm: norm_sqr.sqrt(),
            });
        }
        Ok(Self { couplings, weights })
    }

    /// System prepared in `(|0⟩ + |1⟩)/√2`.
    pub fn equal_weights(couplings: Vec<f64>) -> Result<Self> {
        let c = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new(couplings, (c, c))
    }

    pub fn uniform(spins: usize, coupling: f64) -> Result<Self> {
        Self::equal_weights(vec![coupling; spins])
    }

    pub fn bath_size(&self) -> usize {
        self.couplings.len()
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn weights(&self) -> (C64, C64) {
        self.weights
    }

    fn layout(&self) -> Result<TensorLayout> {
        TensorLayout::qubits(self.bath_size() + 1)
    }

    /// Diagonal of `H = σ_z ⊗ Σ_k (g_k/2) σ_z^(k)` in the computational basis,
    /// with `|0⟩` the `+1` eigenstate.
    fn energies(&self) -> Result<Vec<f64>> {
        let layout = self.layout()?;
        let z = |bit: usize| if bit == 0 { 1.0 } else { -1.0 };
        Ok((0..layout.flat_dim())
            .map(|f| {
                let bits = layout.to_multi(f);
                let bath: f64 = self
                    .couplings
                    .iter()
                    .zip(&bits[1..])
                    .map(|(g, &b)| 0.5 * g * z(b))
                    .sum();
                z(bits[0]) * bath
            })
            .collect())
    }

    fn initial_amplitudes(&self) -> Result<Vec<C64>> {
        let layout = self.layout()?;
        let bath_amp = (0.5f64).powf(self.bath_size() as f64 / 2.0);
        let half = layout.flat_dim() / 2;
        Ok((0..layout.flat_dim())
            .map(|f| {
                let c = if f < half {
                    self.weights.0
                } else {
                    self.weights.1
                };
                c * bath_amp
            })
            .collect())
    }

    fn check_dense(&self) -> Result<()> {
        if self.bath_size() > MAX_DENSE_BATH {
            return Err(Error::BathTooLarge {
                spins: self.bath_size(),
                max: MAX_DENSE_BATH,
            });
        }
        Ok(())
    }
}

/// Closed-form coherence `|r(t)| = Π_k |cos(g_k t)|`.
pub fn spin_bath_coherence(model: &SpinBathModel, t: f64) -> f64 {
    model
        .couplings
        .iter()
        .map(|g| (g * t).cos().abs())
        .product()
}

/// Full system+bath state at time `t`, evolved by exact diagonal phases.
pub fn spin_bath_state(model: &SpinBathModel, t: f64) -> Result<StateVector> {
    model.check_dense()?;
    let energies = model.energies()?;
    let amps = model
        .initial_amplitudes()?
        .into_iter()
        .zip(&energies)
        .map(|(a, &e)| a * C64::from_polar(1.0, -e * t))
        .collect();
    StateVector::new(model.layout()?, amps)
}

/// Per-time coherence and entropy of the reduced central qubit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DephasingCurve {
    pub times: Vec<f64>,
    pub coherence: Vec<f64>,
    pub entropy: Vec<f64>,
}

impl DephasingCurve {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `(t, coherence, entropy)` rows.
    pub fn rows(&self) -> Vec<[f64; 3]> {
        self.times
            .iter()
            .zip(&self.coherence)
            .zip(&self.entropy)
            .map(|((&t, &c), &s)| [t, c, s])
            .collect()
    }
}

pub fn spin_bath_evolve(model: &SpinBathModel, times: &[f64]) -> Result<DephasingCurve> {
    spin_bath_evolve_with(model, times, Execution::default())
}

pub fn spin_bath_evolve_with(
    model: &SpinBathModel,
    times: &[f64],
    exec: Execution,
) -> Result<DephasingCurve> {
    model.check_dense()?;
    if let Some(&t) = times.iter().find(|t| t.is_nan() || **t < 0.0) {
        return Err(Error::InvalidParameter(format!("negative time {t}")));
    }
    let energies = model.energies()?;
    let initial = model.initial_amplitudes()?;
    let layout = model.layout()?;
    let points = par::try_map(times, exec, |&t| -> Result<(f64, f64)> {
        let amps = initial
            .iter()
            .zip(&energies)
            .map(|(a, &e)| a * C64::from_polar(1.0, -e * t))
            .collect();
        let psi = StateVector::new(layout.clone(), amps)?;
        let rho = DensityMatrix::reduce_pure(&psi, &[0])?;
        Ok((rho.coherence_norm(), rho.von_neumann_entropy()?))
    })?;
    let (coherence, entropy) = points.into_iter().unzip();
    Ok(DephasingCurve {
        times: times.to_vec(),
        coherence,
        entropy,
    })
}

/// `steps` equally spaced times from 0 to `t_max` inclusive.
pub fn time_grid(t_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be at least 1".into()));
    }
    if !t_max.is_finite() || t_max < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "t_max must be finite and >= 0, got {t_max}"
        )));
    }
    if steps == 1 {
        return Ok(vec![0.0]);
    }
    let last = (steps - 1) as f64;
    Ok((0..steps).map(|k| t_max * k as f64 / last).collect())
}

/// Binary entropy `−p ln p − (1−p) ln(1−p)` in nats.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyCurveReport {
    pub points: usize,
    /// `max_t |S(t) − h((1−|r(t)|)/2)|`.
    pub max_deviation: f64,
    /// Entropy is nonincreasing in coherence across the whole curve.
    pub monotone: bool,
}

impl EntropyCurveReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_deviation <= tol && self.monotone
    }
}

/// Checks an equal-weight dephasing curve against the closed form
/// `S = h((1 − |r|)/2)` and the monotone coherence/entropy relation.
pub fn entropy_curve(curve: &DephasingCurve) -> Result<EntropyCurveReport> {
    let n = curve.times.len();
    if curve.coherence.len() != n || curve.entropy.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: curve.coherence.len().min(curve.entropy.len()),
        });
    }
    let max_deviation = curve
        .coherence
        .iter()
        .zip(&curve.entropy)
        .map(|(&r, &s)| (s - binary_entropy((1.0 - r) / 2.0)).abs())
        .fold(0.0, f64::max);

    let mut pairs: Vec<(f64, f64)> = curve
        .coherence
        .iter()
        .copied()
        .zip(curve.entropy.iter().copied())
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = pairs.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);

    Ok(EntropyCurveReport {
        points: n,
        max_deviation,
        monotone,
    })
}

/// Matrix evolution on a time grid checked against the closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DephasingReport {
    pub couplings: Vec<f64>,
    pub curve: DephasingCurve,
    /// `Π_k |cos(g_k t)|` per time point.
    pub closed_form: Vec<f64>,
    /// `max_t |coherence − closed form|`.
    pub max_coherence_deviation: f64,
    pub entropy: EntropyCurveReport,
}

impl DephasingReport {
    /// `(t, coherence, closed form, entropy)` rows.
    pub fn rows(&self) -> Vec<[f64; 4]> {
        self.curve
            .rows()
            .iter()
            .zip(&self.closed_form)
            .map(|(r, &c)| [r[0], r[1], c, r[2]])
            .collect()
    }
}

pub fn dephasing_experiment(
    model: &SpinBathModel,
    times: &[f64],
    exec: Execution,
) -> Result<DephasingReport> {
    let curve = spin_bath_evolve_with(model, times, exec)?;
    let closed_form: Vec<f64> = times
        .iter()
        .map(|&t| spin_bath_coherence(model, t))
        .collect();
    let max_coherence_deviation = curve
        .coherence
        .iter()
        .zip(&closed_form)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let entropy = entropy_curve(&curve)?;
    Ok(DephasingReport {
        couplings: model.couplings.clone(),
        curve,
        closed_form,
        max_coherence_deviation,
        entropy,
    })
}
