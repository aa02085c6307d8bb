//! Decoherence between macroscopic electric-field configurations.
//!
//! A region of volume `V` carrying a field `E` in one branch and `−E` in the
//! other has interference term
//!
//! ```text
//! ρ_± = exp(2i V A E) · exp(−V e² E² / (512 π m))
//! ```
//!
//! evaluated here in Heaviside–Lorentz natural units (`ħ = c = 1`,
//! `e² = 4πα`, energies in MeV). SI inputs are converted on entry.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// Electron-volts per joule scale: `1 MeV = 1.602176634e-13 J`.
pub const JOULES_PER_MEV: f64 = 1.602176634e-13;
/// Elementary charge in coulombs.
pub const ELEMENTARY_CHARGE_C: f64 = 1.602176634e-19;
/// Critical (Schwinger) field `m² c³ / (e ħ)` in V/m.
pub const SCHWINGER_FIELD_V_PER_M: f64 = 1.323285474948e18;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantsTable {
    /// Electron mass, MeV.
    pub electron_mass: f64,
    pub fine_structure: f64,
    /// `ħc`, MeV·fm.
    pub hbar_c: f64,
    /// `ħ`, MeV·s.
    pub hbar: f64,
    /// Field strength in MeV² per V/m.
    pub mev2_per_volt_per_metre: f64,
}

impl ConstantsTable {
    pub const STANDARD: Self = Self {
        electron_mass: 0.5109989,
        fine_structure: 1.0 / 137.035999,
        hbar_c: 197.3269804,
        hbar: 6.582119569e-22,
        mev2_per_volt_per_metre: 6.516267033975728e-19,
    };

    /// Heaviside–Lorentz coupling `√(4πα)`.
    pub fn charge(&self) -> f64 {
        (4.0 * PI * self.fine_structure).sqrt()
    }

    /// `MeV⁻¹` per metre.
    pub fn inverse_mev_per_metre(&self) -> f64 {
        1e15 / self.hbar_c
    }

    /// `MeV⁻¹` per second.
    pub fn inverse_mev_per_second(&self) -> f64 {
        1.0 / self.hbar
    }

    /// V/m → MeV² by reducing `eE` (a force) to SI base units.
    pub fn field_factor_from_base_units(&self) -> f64 {
        ELEMENTARY_CHARGE_C / JOULES_PER_MEV * self.hbar_c * 1e-15 / self.charge()
    }

    /// V/m → MeV² as the ratio of the critical field in both systems.
    pub fn field_factor_from_critical_field(&self) -> f64 {
        self.electron_mass.powi(2) / self.charge() / SCHWINGER_FIELD_V_PER_M
    }

    /// Natural-unit magnitude per SI unit of `dimension`.
    pub fn natural_per_si(&self, dimension: Dimension) -> f64 {
        match dimension {
            Dimension::Length => self.inverse_mev_per_metre(),
            Dimension::Time => self.inverse_mev_per_second(),
            Dimension::Volume => self.inverse_mev_per_metre().powi(3),
            Dimension::Energy => 1.0 / JOULES_PER_MEV,
            Dimension::ElectricField => self.mev2_per_volt_per_metre,
            Dimension::Dimensionless => 1.0,
        }
    }
}

impl Default for ConstantsTable {
    fn default() -> Self {
        Self::STANDARD
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Length,
    Time,
    Volume,
    Energy,
    ElectricField,
    Dimensionless,
}

impl Dimension {
    /// SI unit and natural unit symbols.
    pub fn units(self) -> (&'static str, &'static str) {
        match self {
            Dimension::Length => ("m", "MeV^-1"),
            Dimension::Time => ("s", "MeV^-1"),
            Dimension::Volume => ("m^3", "MeV^-3"),
            Dimension::Energy => ("J", "MeV"),
            Dimension::ElectricField => ("V/m", "MeV^2"),
            Dimension::Dimensionless => ("1", "1"),
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dimension::Length => "length",
            Dimension::Time => "time",
            Dimension::Volume => "volume",
            Dimension::Energy => "energy",
            Dimension::ElectricField => "electric_field",
            Dimension::Dimensionless => "dimensionless",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitSystem {
    /// Metres, seconds, cubic metres, joules, volts per metre.
    Si,
    /// Powers of MeV.
    Natural,
}

/// Magnitude tagged with dimension and unit system. SI magnitudes use base
/// units; the centimetre helpers convert at the edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalQuantity {
    pub magnitude: f64,
    pub dimension: Dimension,
    pub unit_system: UnitSystem,
}

impl PhysicalQuantity {
    pub fn new(magnitude: f64, dimension: Dimension, unit_system: UnitSystem) -> Self {
        Self {
            magnitude,
            dimension,
            unit_system,
        }
    }

    pub fn si(magnitude: f64, dimension: Dimension) -> Self {
        Self::new(magnitude, dimension, UnitSystem::Si)
    }

    pub fn natural(magnitude: f64, dimension: Dimension) -> Self {
        Self::new(magnitude, dimension, UnitSystem::Natural)
    }

    pub fn centimetres(cm: f64) -> Self {
        Self::si(cm * 1e-2, Dimension::Length)
    }

    pub fn cubic_centimetres(cm3: f64) -> Self {
        Self::si(cm3 * 1e-6, Dimension::Volume)
    }

    pub fn seconds(s: f64) -> Self {
        Self::si(s, Dimension::Time)
    }

    pub fn volts_per_centimetre(v: f64) -> Self {
        Self::si(v * 1e2, Dimension::ElectricField)
    }

    pub fn convert(&self, target: UnitSystem) -> Self {
        self.convert_with(target, &ConstantsTable::STANDARD)
    }

    pub fn convert_with(&self, target: UnitSystem, constants: &ConstantsTable) -> Self {
        let factor = constants.natural_per_si(self.dimension);
        let magnitude = match (self.unit_system, target) {
            (UnitSystem::Si, UnitSystem::Natural) => self.magnitude * factor,
            (UnitSystem::Natural, UnitSystem::Si) => self.magnitude / factor,
            _ => self.magnitude,
        };
        Self::new(magnitude, self.dimension, target)
    }

    pub fn to_natural(&self) -> Self {
        self.convert(UnitSystem::Natural)
    }

    pub fn to_si(&self) -> Self {
        self.convert(UnitSystem::Si)
    }

    /// Natural-unit magnitude after checking the dimension.
    pub fn natural_magnitude(&self, expected: Dimension) -> Result<f64> {
        self.expect(expected)?;
        Ok(self.to_natural().magnitude)
    }

    pub fn in_centimetres(&self) -> Result<f64> {
        self.expect(Dimension::Length)?;
        Ok(self.to_si().magnitude * 1e2)
    }

    pub fn in_seconds(&self) -> Result<f64> {
        self.expect(Dimension::Time)?;
        Ok(self.to_si().magnitude)
    }

    fn expect(&self, expected: Dimension) -> Result<()> {
        if self.dimension != expected {
            return Err(Error::WrongDimension {
                expected: expected.to_string(),
                found: self.dimension.to_string(),
            });
        }
        if !self.magnitude.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "{} magnitude must be finite, got {}",
                self.dimension, self.magnitude
            )));
        }
        Ok(())
    }
}

/// Sign check in the caller's own units, so errors echo the given magnitude.
fn check_volume(volume: &PhysicalQuantity) -> Result<()> {
    if volume.magnitude < 0.0 {
        return Err(Error::NegativeVolume(volume.magnitude));
    }
    Ok(())
}

/// `V e² E² / (512 π m)` in natural units.
pub fn suppression_exponent_natural(volume: f64, field: f64) -> Result<f64> {
    let c = ConstantsTable::STANDARD;
    if !(volume.is_finite() && field.is_finite()) {
        return Err(Error::InvalidParameter(
            "volume and field must be finite".into(),
        ));
    }
    if volume < 0.0 {
        return Err(Error::NegativeVolume(volume));
    }
    Ok(volume * c.charge().powi(2) * field * field / (512.0 * PI * c.electron_mass))
}

/// `exp(−V e² E² / (512 π m))` with `V` in MeV⁻³ and `E` in MeV².
pub fn decoherence_factor_natural(volume: f64, field: f64) -> Result<f64> {
    Ok((-suppression_exponent_natural(volume, field)?).exp())
}

pub fn decoherence_factor(volume: &PhysicalQuantity, field: &PhysicalQuantity) -> Result<f64> {
    check_volume(volume)?;
    decoherence_factor_natural(
        volume.natural_magnitude(Dimension::Volume)?,
        field.natural_magnitude(Dimension::ElectricField)?,
    )
}

/// `e^{2iVAE}` times the suppression factor; `A` in MeV.
pub fn offdiagonal_element_natural(volume: f64, field: f64, potential: f64) -> Result<C64> {
    let magnitude = decoherence_factor_natural(volume, field)?;
    if !potential.is_finite() {
        return Err(Error::InvalidParameter(
            "vector potential must be finite".into(),
        ));
    }
    Ok(C64::from_polar(magnitude, 2.0 * volume * potential * field))
}

pub fn offdiagonal_element(
    volume: &PhysicalQuantity,
    field: &PhysicalQuantity,
    potential: f64,
) -> Result<C64> {
    check_volume(volume)?;
    offdiagonal_element_natural(
        volume.natural_magnitude(Dimension::Volume)?,
        field.natural_magnitude(Dimension::ElectricField)?,
        potential,
    )
}

/// Unit phases of the two field branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPhases {
    /// `e^{+iVAE}`.
    pub plus: C64,
    /// `e^{−iVAE}`.
    pub minus: C64,
}

impl BranchPhases {
    /// `plus · conj(minus) = e^{2iVAE}`.
    pub fn interference(&self) -> C64 {
        self.plus * self.minus.conj()
    }
}

pub fn branch_phases_natural(volume: f64, field: f64, potential: f64) -> BranchPhases {
    let phi = volume * potential * field;
    BranchPhases {
        plus: C64::from_polar(1.0, phi),
        minus: C64::from_polar(1.0, -phi),
    }
}

fn natural_field(field: &PhysicalQuantity) -> Result<f64> {
    let e = field.natural_magnitude(Dimension::ElectricField)?;
    if e == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(e)
}

/// Edge length `L` with `decoherence_factor(L³, E) = e^{−threshold}`:
/// `L = (512 π m · threshold / (e² E²))^{1/3}`, returned in natural units.
pub fn coherence_length(field: &PhysicalQuantity, threshold: f64) -> Result<PhysicalQuantity> {
    let e = natural_field(field)?;
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold exponent must be positive, got {threshold}"
        )));
    }
    let c = ConstantsTable::STANDARD;
    let volume = 512.0 * PI * c.electron_mass * threshold / (c.charge().powi(2) * e * e);
    Ok(PhysicalQuantity::natural(volume.cbrt(), Dimension::Length))
}

/// Time scale `m / (eE)` after which the semiclassical form applies.
pub fn validity_time(field: &PhysicalQuantity) -> Result<PhysicalQuantity> {
    let e = natural_field(field)?.abs();
    let c = ConstantsTable::STANDARD;
    Ok(PhysicalQuantity::natural(
        c.electron_mass / (c.charge() * e),
        Dimension::Time,
    ))
}

/// Localization-rate model for free electrons in thermal radiation:
/// `ℓ(t) = 1/√(Λ t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalModel {
    /// Λ in cm⁻² s⁻¹.
    lambda_cm2s: f64,
    /// Informational label, kelvin.
    temperature_k: f64,
}

impl ThermalModel {
    pub const DEFAULT_LAMBDA_CM2S: f64 = 100.0;
    pub const DEFAULT_TEMPERATURE_K: f64 = 300.0;

    pub fn new(lambda_cm2s: f64, temperature_k: f64) -> Result<Self> {
        if !(lambda_cm2s.is_finite() && lambda_cm2s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "localization rate must be positive, got {lambda_cm2s}"
            )));
        }
        Ok(Self {
            lambda_cm2s,
            temperature_k,
        })
    }

    pub fn with_rate(lambda_cm2s: f64) -> Result<Self> {
        Self::new(lambda_cm2s, Self::DEFAULT_TEMPERATURE_K)
    }

    pub fn lambda_cm2s(&self) -> f64 {
        self.lambda_cm2s
    }

    pub fn temperature_k(&self) -> f64 {
        self.temperature_k
    }
}

impl Default for ThermalModel {
    fn default() -> Self {
        Self {
            lambda_cm2s: Self::DEFAULT_LAMBDA_CM2S,
            temperature_k: Self::DEFAULT_TEMPERATURE_K,
        }
    }
}

/// `1/√(Λ t)` in centimetres for `t` in seconds.
pub fn thermal_coherence_length_cm(time_s: f64, model: &ThermalModel) -> Result<f64> {
    if !(time_s.is_finite() && time_s > 0.0) {
        return Err(Error::NonPositiveTime(time_s));
    }
    Ok(1.0 / (model.lambda_cm2s * time_s).sqrt())
}

pub fn thermal_coherence_length(
    time: &PhysicalQuantity,
    model: &ThermalModel,
) -> Result<PhysicalQuantity> {
    let cm = thermal_coherence_length_cm(time.in_seconds()?, model)?;
    Ok(PhysicalQuantity::centimetres(cm))
}

/// `(E [V/cm], L [cm])` pairs.
pub fn coherence_length_sweep(
    fields_v_per_cm: &[f64],
    threshold: f64,
    exec: Execution,
) -> Result<Vec<(f64, f64)>> {
    par::try_map(fields_v_per_cm, exec, |&e| {
        let l = coherence_length(&PhysicalQuantity::volts_per_centimetre(e), threshold)?;
        Ok((e, l.in_centimetres()?))
    })
}

/// `(t [s], ℓ [cm])` pairs.
pub fn thermal_sweep(
    times_s: &[f64],
    model: &ThermalModel,
    exec: Execution,
) -> Result<Vec<(f64, f64)>> {
    par::try_map(times_s, exec, |&t| {
        Ok((t, thermal_coherence_length_cm(t, model)?))
    })
}

/// `(V [cm³], factor)` pairs at a fixed field.
pub fn decoherence_factor_sweep(
    volumes_cm3: &[f64],
    field_v_per_cm: f64,
    exec: Execution,
) -> Result<Vec<(f64, f64)>> {
    let field = PhysicalQuantity::volts_per_centimetre(field_v_per_cm);
    par::try_map(volumes_cm3, exec, |&v| {
        Ok((
            v,
            decoherence_factor(&PhysicalQuantity::cubic_centimetres(v), &field)?,
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn charge_squared_is_four_pi_alpha() {
        let c = ConstantsTable::STANDARD;
        assert!(rel(c.charge().powi(2), 4.0 * PI * c.fine_structure) < 1e-12);
    }

    #[test]
    fn frozen_field_factor_matches_base_unit_route() {
        let c = ConstantsTable::STANDARD;
        assert!(rel(c.field_factor_from_base_units(), c.mev2_per_volt_per_metre) < 1e-14);
        assert!(
            rel(
                c.field_factor_from_critical_field(),
                c.mev2_per_volt_per_metre
            ) < 1e-3
        );
    }

    #[test]
    fn length_and_time_scales() {
        let cm = PhysicalQuantity::centimetres(1.0).to_natural().magnitude;
        assert!(rel(cm, 5.0677e10) < 1e-3);
        let s = PhysicalQuantity::seconds(1.0).to_natural().magnitude;
        assert!(rel(s, 1.5193e21) < 1e-3);
    }

    #[test]
    fn trivial_factors() {
        let v = PhysicalQuantity::cubic_centimetres(0.0);
        let e = PhysicalQuantity::volts_per_centimetre(1e7);
        assert_eq!(decoherence_factor(&v, &e).unwrap(), 1.0);
        let v = PhysicalQuantity::cubic_centimetres(1.0);
        let zero = PhysicalQuantity::volts_per_centimetre(0.0);
        assert_eq!(decoherence_factor(&v, &zero).unwrap(), 1.0);
        assert!(matches!(
            decoherence_factor(&PhysicalQuantity::cubic_centimetres(-1.0), &e),
            Err(Error::NegativeVolume(_))
        ));
        assert!(matches!(
            decoherence_factor(&e, &e),
            Err(Error::WrongDimension { .. })
        ));
    }

    #[test]
    fn threshold_volume_gives_inverse_e() {
        let c = ConstantsTable::STANDARD;
        let e = 3.7e-6;
        let v = 512.0 * PI * c.electron_mass / (c.charge().powi(2) * e * e);
        let f = decoherence_factor_natural(v, e).unwrap();
        assert!((f - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn offdiagonal_phase() {
        let (v, e) = (2.0e9, 1.5e-6);
        let real = offdiagonal_element_natural(v, e, 0.0).unwrap();
        assert_eq!(real.im, 0.0);
        assert_eq!(real.re, decoherence_factor_natural(v, e).unwrap());
        assert_eq!(
            offdiagonal_element_natural(0.0, e, 3.0).unwrap(),
            C64::new(1.0, 0.0)
        );
        let a = PI / (2.0 * v * e);
        let z = offdiagonal_element_natural(v, e, a).unwrap();
        assert!((z.arg().abs() - PI).abs() < 1e-12);
        assert!(rel(z.norm(), decoherence_factor_natural(v, e).unwrap()) < 1e-12);
        let b = branch_phases_natural(v, e, a);
        assert!((b.interference() - C64::from_polar(1.0, PI)).norm() < 1e-12);
    }

    #[test]
    fn coherence_length_scalings() {
        let e = PhysicalQuantity::volts_per_centimetre(1e7);
        let l1 = coherence_length(&e, 1.0).unwrap().in_centimetres().unwrap();
        let l8 = coherence_length(&e, 8.0).unwrap().in_centimetres().unwrap();
        assert!(rel(l8, 2.0 * l1) < 1e-12);
        let e10 = PhysicalQuantity::volts_per_centimetre(1e8);
        let l10 = coherence_length(&e10, 1.0)
            .unwrap()
            .in_centimetres()
            .unwrap();
        assert!(rel(l1 / l10, 10f64.powf(2.0 / 3.0)) < 1e-12);
        assert!(matches!(
            coherence_length(&PhysicalQuantity::volts_per_centimetre(0.0), 1.0),
            Err(Error::ZeroField)
        ));
        assert!(coherence_length(&e, 0.0).is_err());
    }

    #[test]
    fn validity_time_inverse_law() {
        let t1 = validity_time(&PhysicalQuantity::volts_per_centimetre(1e7)).unwrap();
        let t2 = validity_time(&PhysicalQuantity::volts_per_centimetre(2e7)).unwrap();
        assert!(rel(t1.magnitude, 2.0 * t2.magnitude) < 1e-12);
        let s = t1.in_seconds().unwrap();
        assert!(rel(t1.magnitude * ConstantsTable::STANDARD.hbar, s) < 1e-12);
    }

    #[test]
    fn thermal_examples() {
        let m = ThermalModel::default();
        assert_eq!(thermal_coherence_length_cm(1.0, &m).unwrap(), 0.1);
        assert!(rel(thermal_coherence_length_cm(100.0, &m).unwrap(), 0.01) < 1e-12);
        assert!(rel(thermal_coherence_length_cm(4.0, &m).unwrap(), 0.05) < 1e-12);
        assert!(matches!(
            thermal_coherence_length_cm(0.0, &m),
            Err(Error::NonPositiveTime(_))
        ));
        assert!(ThermalModel::with_rate(-1.0).is_err());
        let q = thermal_coherence_length(&PhysicalQuantity::seconds(1.0), &m).unwrap();
        assert!(rel(q.in_centimetres().unwrap(), 0.1) < 1e-12);
    }

    #[test]
    fn sweeps_agree_across_strategies() {
        let fields: Vec<f64> = (1..=20).map(|k| k as f64 * 1e6).collect();
        let a = coherence_length_sweep(&fields, 1.0, Execution::Sequential).unwrap();
        let b = coherence_length_sweep(&fields, 1.0, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let times = [0.5, 1.0, 2.0];
        let t = thermal_sweep(&times, &ThermalModel::default(), Execution::Parallel).unwrap();
        assert_eq!(t[1], (1.0, 0.1));
        let v = decoherence_factor_sweep(&[0.0, 1e-12], 1e7, Execution::Sequential).unwrap();
        assert_eq!(v[0].1, 1.0);
        assert!(v[1].1 < 1.0);
    }
}
