//! Constitutive laws: the nonlinear flux/transfer maps, their inverses, and
//! the convex potentials they derive from.
//!
//! A volume law maps gradients to fluxes, radially: `h(v) = ψ'(|v|)/|v| · v`
//! where `ψ` is the law's potential profile. An interface law maps the
//! scalar potential jump to a normal flux through an odd nondecreasing map.
//! Both carry their inverse, so the primal solver and the dual-side residual
//! checks share one object.
//!
//! Two families are shipped: the prototype set (sinh-type conduction against
//! a linear law, with an exponential transfer law of Butler-Volmer type) and
//! a polynomial family with `|v|^{p-2} v` growth where the doubling condition
//! holds on both sides of the duality.

use alloc::sync::Arc;

#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float;

use crate::mesh::Region;
use crate::nfunction::{NFunction, NFunctionError};
use crate::vec2::Vec2;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Magnitudes below this are treated as zero when forming radial ratios;
/// keeps subnormal arguments out of `powf`.
const RADIAL_FLOOR: f64 = 1e-150;

#[derive(Clone, Debug, PartialEq)]
pub enum ConstitutiveError {
    /// Law evaluation overflowed (argument magnitude given).
    Overflow { magnitude: f64 },
    NonFiniteInput,
    /// Polynomial family needs an exponent above 1.
    InvalidExponent { p: f64 },
    NFunction(NFunctionError),
}

impl core::fmt::Display for ConstitutiveError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ConstitutiveError::Overflow { magnitude } => {
                write!(f, "law evaluation overflow at magnitude {magnitude}")
            }
            ConstitutiveError::NonFiniteInput => write!(f, "non-finite law input"),
            ConstitutiveError::InvalidExponent { p } => {
                write!(f, "power-law exponent must exceed 1, got {p}")
            }
            ConstitutiveError::NFunction(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ConstitutiveError {}

impl From<NFunctionError> for ConstitutiveError {
    fn from(e: NFunctionError) -> Self {
        ConstitutiveError::NFunction(e)
    }
}

/// Radial gradient-to-flux law on one region.
#[derive(Clone)]
pub struct VolumeLaw {
    pub region: Region,
    potential: NFunction,
    /// `ψ'(t)/t`, with the removable singularity at 0 handled by series.
    forward_ratio: ScalarFn,
    /// `(ψ')⁻¹(s)/s`, same treatment.
    inverse_ratio: ScalarFn,
    /// `ψ''`, for the Newton linearization.
    profile_curvature: ScalarFn,
    /// Coercivity constant in the lower bound `h·v ≥ α(Φ*(h)+Φ(v)) − C`.
    /// Metadata only: shipped laws satisfy the exact Fenchel identity.
    pub alpha: f64,
    pub slack: f64,
}

impl core::fmt::Debug for VolumeLaw {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("VolumeLaw")
            .field("region", &self.region)
            .field("potential", &self.potential.label())
            .finish()
    }
}

/// Scalar jump-to-flux law on the interface.
#[derive(Clone)]
pub struct InterfaceLaw {
    potential: NFunction,
    forward_ratio: ScalarFn,
    inverse_ratio: ScalarFn,
    profile_curvature: ScalarFn,
    pub alpha: f64,
}

impl core::fmt::Debug for InterfaceLaw {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("InterfaceLaw")
            .field("potential", &self.potential.label())
            .finish()
    }
}

impl VolumeLaw {
    /// Flux `h(v)`: the potential's derivative, radially extended.
    pub fn flux(&self, v: Vec2) -> Result<Vec2, ConstitutiveError> {
        if !v.is_finite() {
            return Err(ConstitutiveError::NonFiniteInput);
        }
        let t = v.norm();
        if t < RADIAL_FLOOR {
            return Ok(Vec2::ZERO);
        }
        let out = v * (self.forward_ratio)(t);
        if !out.is_finite() {
            return Err(ConstitutiveError::Overflow { magnitude: t });
        }
        Ok(out)
    }

    /// Inverse flux `f(j) = h⁻¹(j)`.
    pub fn inverse_flux(&self, j: Vec2) -> Result<Vec2, ConstitutiveError> {
        if !j.is_finite() {
            return Err(ConstitutiveError::NonFiniteInput);
        }
        let t = j.norm();
        if t < RADIAL_FLOOR {
            return Ok(Vec2::ZERO);
        }
        let out = j * (self.inverse_ratio)(t);
        if !out.is_finite() {
            return Err(ConstitutiveError::Overflow { magnitude: t });
        }
        Ok(out)
    }

    /// Scalar slope of the potential profile, `ψ'`.
    pub fn scalar_flux(&self, t: f64) -> Result<f64, ConstitutiveError> {
        Ok(self.potential.eval_deriv(t)?)
    }

    /// Scalar inverse slope, `(ψ')⁻¹`; the one-dimensional reduction used by
    /// the slab reference solution.
    pub fn scalar_inverse_flux(&self, s: f64) -> Result<f64, ConstitutiveError> {
        if !s.is_finite() {
            return Err(ConstitutiveError::NonFiniteInput);
        }
        let t = s.abs();
        if t < RADIAL_FLOOR {
            return Ok(0.0);
        }
        let out = s * (self.inverse_ratio)(t);
        if !out.is_finite() {
            return Err(ConstitutiveError::Overflow { magnitude: t });
        }
        Ok(out)
    }

    pub fn potential(&self) -> &NFunction {
        &self.potential
    }

    /// Jacobian of the flux map at `v`: for a radial potential this is
    /// `ψ''(t)·v̂⊗v̂ + ψ'(t)/t·(I − v̂⊗v̂)` with the `v → 0` limit `ψ''(0)·I`.
    pub fn flux_jacobian(&self, v: Vec2) -> Result<[[f64; 2]; 2], ConstitutiveError> {
        if !v.is_finite() {
            return Err(ConstitutiveError::NonFiniteInput);
        }
        let t = v.norm();
        if t < 1e-12 {
            let c = (self.profile_curvature)(0.0);
            if !c.is_finite() {
                return Err(ConstitutiveError::Overflow { magnitude: t });
            }
            return Ok([[c, 0.0], [0.0, c]]);
        }
        let c = (self.profile_curvature)(t);
        let r = (self.forward_ratio)(t);
        if !c.is_finite() || !r.is_finite() {
            return Err(ConstitutiveError::Overflow { magnitude: t });
        }
        let (ux, uy) = (v.x / t, v.y / t);
        let par = c - r;
        Ok([
            [r + par * ux * ux, par * ux * uy],
            [par * ux * uy, r + par * uy * uy],
        ])
    }
}

impl InterfaceLaw {
    /// Transfer flux `b(z)`; odd and nondecreasing in the jump `z`.
    pub fn flux(&self, z: f64) -> Result<f64, ConstitutiveError> {
        if !z.is_finite() {
            return Err(ConstitutiveError::NonFiniteInput);
        }
        let t = z.abs();
        if t < RADIAL_FLOOR {
            return Ok(0.0);
        }
        let out = z * (self.forward_ratio)(t);
        if !out.is_finite() {
            return Err(ConstitutiveError::Overflow { magnitude: t });
        }
        Ok(out)
    }

    /// Inverse transfer `g(w) = b⁻¹(w)`.
    pub fn inverse_flux(&self, w: f64) -> Result<f64, ConstitutiveError> {
        if !w.is_finite() {
            return Err(ConstitutiveError::NonFiniteInput);
        }
        let t = w.abs();
        if t < RADIAL_FLOOR {
            return Ok(0.0);
        }
        let out = w * (self.inverse_ratio)(t);
        if !out.is_finite() {
            return Err(ConstitutiveError::Overflow { magnitude: t });
        }
        Ok(out)
    }

    /// `b'(z)`, for the Newton linearization. Even in `z`.
    pub fn slope(&self, z: f64) -> Result<f64, ConstitutiveError> {
        if !z.is_finite() {
            return Err(ConstitutiveError::NonFiniteInput);
        }
        let out = (self.profile_curvature)(z.abs());
        if !out.is_finite() {
            return Err(ConstitutiveError::Overflow { magnitude: z.abs() });
        }
        Ok(out)
    }

    pub fn potential(&self) -> &NFunction {
        &self.potential
    }
}

/// The laws of one problem: a volume law per region plus the interface law.
#[derive(Clone, Debug)]
pub struct LawSet {
    pub omega1: VolumeLaw,
    pub omega2: VolumeLaw,
    pub interface: InterfaceLaw,
}

impl LawSet {
    /// Prototype electrochemical laws: sinh-type conduction with potential
    /// `cosh(|v|)−1` in region 1, the linear law with potential `|v|²/2` in
    /// region 2, and the exponential transfer law `b(z) = sign(z)(e^|z|−1)`
    /// on the interface.
    pub fn prototype() -> Self {
        let omega1 = VolumeLaw {
            region: Region::Omega1,
            potential: NFunction::cosh_minus_one(),
            forward_ratio: Arc::new(|t: f64| {
                if t < 1e-4 {
                    // sinh(t)/t = 1 + t²/6 + t⁴/120 + O(t⁶)
                    1.0 + t * t / 6.0 + t * t * t * t / 120.0
                } else {
                    t.sinh() / t
                }
            }),
            inverse_ratio: Arc::new(|s: f64| {
                if s < 1e-4 {
                    // asinh(s)/s = 1 − s²/6 + 3s⁴/40 + O(s⁶)
                    1.0 - s * s / 6.0 + 3.0 * s * s * s * s / 40.0
                } else {
                    s.asinh() / s
                }
            }),
            profile_curvature: Arc::new(|t: f64| t.cosh()),
            alpha: 0.5,
            slack: 1.0,
        };
        let interface = InterfaceLaw {
            potential: NFunction::exp_minus_linear(),
            forward_ratio: Arc::new(|t: f64| {
                if t < 1e-4 {
                    // (e^t − 1)/t = 1 + t/2 + t²/6 + O(t³)
                    1.0 + t / 2.0 + t * t / 6.0
                } else {
                    t.exp_m1() / t
                }
            }),
            inverse_ratio: Arc::new(|w: f64| {
                if w < 1e-4 {
                    // ln(1+w)/w = 1 − w/2 + w²/3 + O(w³)
                    1.0 - w / 2.0 + w * w / 3.0
                } else {
                    w.ln_1p() / w
                }
            }),
            profile_curvature: Arc::new(|t: f64| t.exp()),
            alpha: 0.5,
        };
        LawSet { omega1, omega2: Self::linear_volume_law(Region::Omega2), interface }
    }

    /// Polynomial test family: `h(v) = |v|^{p-2} v` in both regions with
    /// potential `|v|^p/p`, and the linear interface law. Doubling holds for
    /// the potentials and their conjugates alike.
    pub fn power(p: f64) -> Result<Self, ConstitutiveError> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(ConstitutiveError::InvalidExponent { p });
        }
        Ok(LawSet {
            omega1: Self::power_volume_law(Region::Omega1, p),
            omega2: Self::power_volume_law(Region::Omega2, p),
            interface: InterfaceLaw {
                potential: NFunction::power(2.0),
                forward_ratio: Arc::new(|_| 1.0),
                inverse_ratio: Arc::new(|_| 1.0),
                profile_curvature: Arc::new(|_| 1.0),
                alpha: 1.0,
            },
        })
    }

    fn linear_volume_law(region: Region) -> VolumeLaw {
        VolumeLaw {
            region,
            potential: NFunction::power(2.0),
            forward_ratio: Arc::new(|_| 1.0),
            inverse_ratio: Arc::new(|_| 1.0),
            profile_curvature: Arc::new(|_| 1.0),
            alpha: 1.0,
            slack: 0.0,
        }
    }

    fn power_volume_law(region: Region, p: f64) -> VolumeLaw {
        let q = p / (p - 1.0);
        VolumeLaw {
            region,
            potential: NFunction::power(p),
            forward_ratio: Arc::new(move |t: f64| t.powf(p - 2.0)),
            inverse_ratio: Arc::new(move |s: f64| s.powf(q - 2.0)),
            profile_curvature: Arc::new(move |t: f64| (p - 1.0) * t.powf(p - 2.0)),
            alpha: 1.0,
            slack: 0.0,
        }
    }

    pub fn volume(&self, region: Region) -> &VolumeLaw {
        match region {
            Region::Omega1 => &self.omega1,
            Region::Omega2 => &self.omega2,
        }
    }
}

/// Worst Fenchel-equality residual `|h(v)·v − ψ(|v|) − ψ*(|h(v)|)|`,
/// normalized by `1 + |h(v)·v|`, over the probe set. Potential-derived laws
/// satisfy the identity exactly, so this doubles as a consistency check
/// between a law and its stored potential.
pub fn check_coercivity_volume(
    law: &VolumeLaw,
    probes: &[Vec2],
) -> Result<f64, ConstitutiveError> {
    let mut worst = 0.0f64;
    for &v in probes {
        let h = law.flux(v)?;
        let pairing = h.dot(v);
        let value = law.potential().eval(v.norm())?;
        let conj = law.potential().conjugate(h.norm())?;
        let residual = (pairing - value - conj).abs() / (1.0 + pairing.abs());
        worst = worst.max(residual);
    }
    Ok(worst)
}

/// Interface-law version of [`check_coercivity_volume`].
pub fn check_coercivity_interface(
    law: &InterfaceLaw,
    probes: &[f64],
) -> Result<f64, ConstitutiveError> {
    let mut worst = 0.0f64;
    for &z in probes {
        let b = law.flux(z)?;
        let pairing = b * z;
        let value = law.potential().eval(z.abs())?;
        let conj = law.potential().conjugate(b.abs())?;
        let residual = (pairing - value - conj).abs() / (1.0 + pairing.abs());
        worst = worst.max(residual);
    }
    Ok(worst)
}

/// Worst slack in the coercivity inequality `h·v ≥ α(Φ*(h)+Φ(v)) − C`;
/// nonpositive values mean the inequality holds on all probes.
pub fn coercivity_slack_volume(
    law: &VolumeLaw,
    probes: &[Vec2],
) -> Result<f64, ConstitutiveError> {
    let mut worst = f64::NEG_INFINITY;
    for &v in probes {
        let h = law.flux(v)?;
        let value = law.potential().eval(v.norm())?;
        let conj = law.potential().conjugate(h.norm())?;
        worst = worst.max(law.alpha * (value + conj) - law.slack - h.dot(v));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn probe_vectors() -> Vec<Vec2> {
        let mut out = Vec::new();
        for &r in &[0.0, 1e-6, 1e-3, 0.3, 1.0, 2.1, 5.0, 13.0, 30.0] {
            for &(cx, cy) in &[(1.0, 0.0), (0.0, -1.0), (0.6, 0.8), (-0.7071, 0.7071)] {
                out.push(Vec2::new(r * cx, r * cy));
            }
        }
        out
    }

    #[test]
    fn prototype_flux_matches_displayed_formulas() {
        let laws = LawSet::prototype();
        let h = laws.omega1.flux(Vec2::new(1.0, 0.0)).unwrap();
        assert!((h.x - 1.0f64.sinh()).abs() < 1e-15);
        assert_eq!(h.y, 0.0);
        let b = laws.interface.flux(1.0).unwrap();
        assert!((b - (1.0f64.exp() - 1.0)).abs() < 1e-15);
        let g = laws.interface.inverse_flux(1.0f64.exp() - 1.0).unwrap();
        assert!((g - 1.0).abs() < 1e-14);
    }

    #[test]
    fn prototype_inverse_roundtrip() {
        let laws = LawSet::prototype();
        let v = Vec2::new(0.3, -2.1);
        let h = laws.omega1.flux(v).unwrap();
        let back = laws.omega1.inverse_flux(h).unwrap();
        assert!((back - v).norm() < 1e-9 * (1.0 + v.norm()));
        let z = -4.2;
        let w = laws.interface.flux(z).unwrap();
        assert!((laws.interface.inverse_flux(w).unwrap() - z).abs() < 1e-9);
    }

    #[test]
    fn roundtrips_hold_out_to_large_magnitudes() {
        let laws = LawSet::prototype();
        // Check h(f(j)) = j out to |j| = sinh(30).
        for &mag in &[1.0, 100.0, 1e6, 30.0f64.sinh()] {
            let j = Vec2::new(mag * 0.6, mag * 0.8);
            let v = laws.omega1.inverse_flux(j).unwrap();
            let back = laws.omega1.flux(v).unwrap();
            assert!(
                (back - j).norm() <= 1e-9 * (1.0 + j.norm()),
                "magnitude {mag}"
            );
        }
    }

    #[test]
    fn power_law_examples() {
        let laws = LawSet::power(3.0).unwrap();
        let h = laws.omega1.flux(Vec2::new(2.0, 0.0)).unwrap();
        assert!((h.x - 4.0).abs() < 1e-14);
        let v = Vec2::new(1.0, 1.0);
        let back = laws.omega1.inverse_flux(laws.omega1.flux(v).unwrap()).unwrap();
        assert!((back - v).norm() < 1e-12);
        // p = 2 is the identity.
        let id = LawSet::power(2.0).unwrap();
        let w = Vec2::new(-0.4, 2.5);
        assert!((id.omega2.flux(w).unwrap() - w).norm() < 1e-15);
    }

    #[test]
    fn power_law_rejects_bad_exponent() {
        assert!(matches!(
            LawSet::power(0.5),
            Err(ConstitutiveError::InvalidExponent { .. })
        ));
        assert!(LawSet::power(1.0).is_err());
    }

    #[test]
    fn fenchel_residual_vanishes_on_prototype_laws() {
        let laws = LawSet::prototype();
        let probes = probe_vectors();
        assert!(check_coercivity_volume(&laws.omega1, &probes).unwrap() < 1e-9);
        assert!(check_coercivity_volume(&laws.omega2, &probes).unwrap() < 1e-9);
        let zs: Vec<f64> = probes.iter().map(|v| v.x).collect();
        assert!(check_coercivity_interface(&laws.interface, &zs).unwrap() < 1e-9);
    }

    #[test]
    fn fenchel_residual_vanishes_on_power_laws() {
        // p = 2 at v = (3,4): the pairing 25 splits as 25/2 + 25/2.
        let laws = LawSet::power(2.0).unwrap();
        let r = check_coercivity_volume(&laws.omega1, &[Vec2::new(3.0, 4.0)]).unwrap();
        assert!(r < 1e-12);
        let laws = LawSet::power(3.0).unwrap();
        assert!(check_coercivity_volume(&laws.omega1, &probe_vectors()).unwrap() < 1e-8);
    }

    #[test]
    fn coercivity_inequality_holds_with_stored_constants() {
        let laws = LawSet::prototype();
        let slack = coercivity_slack_volume(&laws.omega1, &probe_vectors()).unwrap();
        assert!(slack <= 0.0, "worst slack {slack}");
    }

    #[test]
    fn strict_monotonicity_on_distinct_probes() {
        let laws = LawSet::prototype();
        let probes = probe_vectors();
        for (i, &a) in probes.iter().enumerate() {
            for &b in &probes[i + 1..] {
                if (a - b).norm() < 1e-12 {
                    continue;
                }
                let ha = laws.omega1.flux(a).unwrap();
                let hb = laws.omega1.flux(b).unwrap();
                assert!((ha - hb).dot(a - b) > 0.0);
            }
        }
    }

    #[test]
    fn interface_law_is_odd_and_nondecreasing() {
        let laws = LawSet::prototype();
        let mut prev = f64::NEG_INFINITY;
        for k in -40..=40 {
            let z = k as f64 * 0.25;
            let b = laws.interface.flux(z).unwrap();
            assert!((b + laws.interface.flux(-z).unwrap()).abs() < 1e-12);
            assert!(b >= prev);
            prev = b;
        }
    }

    #[test]
    fn potential_difference_quotient_matches_flux() {
        // One-sided difference quotient of the radial potential in direction
        // u matches h(v)·u.
        let laws = LawSet::prototype();
        let v = Vec2::new(0.8, -0.45);
        let u = Vec2::new(0.36, 0.77);
        let eps = 1e-7;
        let pot = |w: Vec2| laws.omega1.potential().eval(w.norm()).unwrap();
        let dq = (pot(v + u * eps) - pot(v)) / eps;
        let exact = laws.omega1.flux(v).unwrap().dot(u);
        assert!((dq - exact).abs() < 1e-5 * (1.0 + exact.abs()));
    }

    #[test]
    fn flux_jacobian_matches_finite_differences() {
        let laws = LawSet::prototype();
        for &v in &[
            Vec2::new(0.9, -0.2),
            Vec2::new(0.0, 0.0),
            Vec2::new(1e-13, 0.0),
            Vec2::new(-2.0, 1.5),
        ] {
            let jac = laws.omega1.flux_jacobian(v).unwrap();
            let eps = 1e-6;
            for (dir, col) in [(Vec2::new(1.0, 0.0), 0), (Vec2::new(0.0, 1.0), 1)] {
                let hp = laws.omega1.flux(v + dir * eps).unwrap();
                let hm = laws.omega1.flux(v - dir * eps).unwrap();
                let fd = (hp - hm) * (0.5 / eps);
                assert!((jac[0][col] - fd.x).abs() < 1e-4 * (1.0 + fd.x.abs()));
                assert!((jac[1][col] - fd.y).abs() < 1e-4 * (1.0 + fd.y.abs()));
            }
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let laws = LawSet::prototype();
        assert_eq!(laws.omega1.flux(Vec2::ZERO).unwrap(), Vec2::ZERO);
        assert_eq!(laws.omega1.inverse_flux(Vec2::ZERO).unwrap(), Vec2::ZERO);
        assert_eq!(laws.interface.flux(0.0).unwrap(), 0.0);
        assert_eq!(laws.interface.inverse_flux(0.0).unwrap(), 0.0);
    }
}
