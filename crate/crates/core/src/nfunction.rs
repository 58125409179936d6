//! Scalar N-function toolkit.
//!
//! An N-function here is an even convex function of one nonnegative variable
//! with `value(0) = 0`, sublinear growth at the origin and superlinear growth
//! at infinity. Radial extension to vectors (`value(|v|)`) turns each one
//! into a convex potential on gradients or jumps; the constitutive laws in
//! this crate are exactly the derivatives of such potentials.
//!
//! The toolkit provides the operations the rest of the crate leans on:
//!
//! * numeric convex conjugation (Legendre transform) with an analytic
//!   override when a closed form is known,
//! * the Young-inequality gap `value(t) + conjugate(s) − s·t`, which is zero
//!   precisely on the graph of the derivative,
//! * finite-grid probes for the doubling (Δ₂) condition and for the
//!   superquadratic growth that implies the conjugate satisfies Δ₂,
//! * Luxemburg norms of sampled fields.
//!
//! The doubling probes are heuristics over a finite grid and are documented
//! as such: a `No` verdict is strong numerical evidence, not a proof.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float;

/// Safe argument ceiling for `exp`-type profiles: `exp` overflows binary64
/// just above 709, and evaluations beyond [`VALUE_OVERFLOW_BOUND`] are
/// flagged as overflow (for `cosh` that triggers near 705). The solver keeps
/// its iterates below this with margin.
pub const OVERFLOW_CLAMP: f64 = 700.0;

/// Profile values above this magnitude are treated as overflow even when
/// still representable; it leaves headroom below `f64::MAX` so downstream
/// products cannot silently turn infinite.
pub const VALUE_OVERFLOW_BOUND: f64 = 1e306;

/// Absolute bisection tolerance on scalar unknowns (Luxemburg λ,
/// slope-matching t).
pub const BISECTION_TOL: f64 = 1e-12;

/// Iteration cap for all bisections in this module.
pub const BISECTION_MAX_ITER: usize = 200;

/// Default large-argument threshold for doubling probes: ratios are sampled
/// for arguments above this value only.
pub const DELTA2_THRESHOLD: f64 = 1.0;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone, Debug, PartialEq)]
pub enum NFunctionError {
    /// Argument exceeds the overflow clamp or the evaluation was non-finite.
    Overflow { argument: f64 },
    /// Negative or NaN argument.
    InvalidArgument { argument: f64 },
    /// The supremum defining the conjugate is not attained below the clamp:
    /// the requested slope exceeds the derivative's range.
    ConjugateDiverges { slope: f64 },
    /// A shape invariant failed during validation.
    InvalidShape { reason: &'static str },
    NonFiniteSample,
    InvalidWeight,
    WeightSumMismatch { sum: f64, expected: f64 },
}

impl core::fmt::Display for NFunctionError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            NFunctionError::Overflow { argument } => {
                write!(f, "evaluation overflow at argument {argument}")
            }
            NFunctionError::InvalidArgument { argument } => {
                write!(f, "invalid argument {argument}")
            }
            NFunctionError::ConjugateDiverges { slope } => {
                write!(f, "conjugate diverges at slope {slope}")
            }
            NFunctionError::InvalidShape { reason } => {
                write!(f, "not a valid N-function: {reason}")
            }
            NFunctionError::NonFiniteSample => write!(f, "non-finite field sample"),
            NFunctionError::InvalidWeight => write!(f, "quadrature weights must be positive"),
            NFunctionError::WeightSumMismatch { sum, expected } => {
                write!(f, "weight sum {sum} does not match measure {expected}")
            }
        }
    }
}

impl core::error::Error for NFunctionError {}

/// A scalar convex N-function with its derivative and an optional closed-form
/// conjugate.
#[derive(Clone)]
pub struct NFunction {
    label: String,
    value: ScalarFn,
    deriv: ScalarFn,
    analytic_conjugate: Option<ScalarFn>,
}

impl core::fmt::Debug for NFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("NFunction")
            .field("label", &self.label)
            .field("analytic_conjugate", &self.analytic_conjugate.is_some())
            .finish()
    }
}

/// Verdict of a finite-grid doubling probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Delta2Verdict {
    Yes,
    No,
    Inconclusive,
}

/// Outcome of [`NFunction::delta2_probe`].
#[derive(Clone, Copy, Debug)]
pub struct Delta2Report {
    pub verdict: Delta2Verdict,
    /// Doubling constant witnessing a `Yes` verdict (largest ratio seen).
    pub witness_c: f64,
    /// Large-argument threshold the grid started from.
    pub witness_k: f64,
    pub max_ratio_seen: f64,
}

/// Outcome of [`NFunction::superquadratic_growth`]: the largest `K` with
/// `2·K·value(t) ≤ value(2t)` on the probed grid, whether `K > 1` holds, and
/// whether the bound is attained with equality at the far end of the grid
/// (pure power laws sit exactly on the boundary).
#[derive(Clone, Copy, Debug)]
pub struct GrowthWitness {
    pub satisfied: bool,
    pub witness_k: f64,
    pub equality: bool,
}

impl NFunction {
    /// Builds and validates an N-function from its value and derivative.
    pub fn new<V, D>(label: &str, value: V, deriv: D) -> Result<Self, NFunctionError>
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let nf = Self::new_unchecked(label, value, deriv);
        nf.validate()?;
        Ok(nf)
    }

    /// Builds without shape validation. Useful for deliberately degenerate
    /// inputs; everything shipped by this crate goes through [`Self::new`]
    /// or is covered by validation tests.
    pub fn new_unchecked<V, D>(label: &str, value: V, deriv: D) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        NFunction {
            label: String::from(label),
            value: Arc::new(value),
            deriv: Arc::new(deriv),
            analytic_conjugate: None,
        }
    }

    /// Attaches a closed-form conjugate used by [`Self::conjugate`] in place
    /// of the numeric path.
    pub fn with_analytic_conjugate<C>(mut self, conjugate: C) -> Self
    where
        C: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.analytic_conjugate = Some(Arc::new(conjugate));
        self
    }

    /// `cosh(t) − 1`, the potential of the sinh-type conduction law.
    pub fn cosh_minus_one() -> Self {
        NFunction {
            label: String::from("cosh-1"),
            value: Arc::new(|t: f64| t.cosh() - 1.0),
            deriv: Arc::new(|t: f64| t.sinh()),
            // s·asinh(s) − sqrt(1+s²) + 1, from matching slopes at t = asinh(s)
            analytic_conjugate: Some(Arc::new(|s: f64| {
                s * s.asinh() - (1.0 + s * s).sqrt() + 1.0
            })),
        }
    }

    /// `exp(t) − t − 1`, the potential of the exponential interface law.
    pub fn exp_minus_linear() -> Self {
        NFunction {
            label: String::from("exp-lin"),
            value: Arc::new(|t: f64| t.exp_m1() - t),
            deriv: Arc::new(|t: f64| t.exp_m1()),
            analytic_conjugate: Some(Arc::new(|s: f64| (1.0 + s) * s.ln_1p() - s)),
        }
    }

    /// `t^p / p` for `p > 1`; conjugate `s^p' / p'` with `1/p + 1/p' = 1`.
    pub fn power(p: f64) -> Self {
        assert!(p > 1.0, "power N-function needs exponent > 1");
        let q = p / (p - 1.0);
        NFunction {
            label: format!("power-{p}"),
            value: Arc::new(move |t: f64| t.powf(p) / p),
            deriv: Arc::new(move |t: f64| t.powf(p - 1.0)),
            analytic_conjugate: Some(Arc::new(move |s: f64| s.powf(q) / q)),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_analytic_conjugate(&self) -> bool {
        self.analytic_conjugate.is_some()
    }

    /// Checked evaluation of the value profile at `t ≥ 0`. Non-finite or
    /// near-`f64::MAX` results fail loudly instead of propagating infinities.
    pub fn eval(&self, t: f64) -> Result<f64, NFunctionError> {
        if !t.is_finite() || t < 0.0 {
            return Err(NFunctionError::InvalidArgument { argument: t });
        }
        let y = (self.value)(t);
        if !y.is_finite() || y.abs() > VALUE_OVERFLOW_BOUND {
            return Err(NFunctionError::Overflow { argument: t });
        }
        Ok(y)
    }

    /// Checked evaluation of the derivative profile at `t ≥ 0`.
    pub fn eval_deriv(&self, t: f64) -> Result<f64, NFunctionError> {
        if !t.is_finite() || t < 0.0 {
            return Err(NFunctionError::InvalidArgument { argument: t });
        }
        let y = (self.deriv)(t);
        if !y.is_finite() || y.abs() > VALUE_OVERFLOW_BOUND {
            return Err(NFunctionError::Overflow { argument: t });
        }
        Ok(y)
    }

    /// Convex conjugate `sup_{t≥0}(s·t − value(t))`, via the analytic form
    /// when present and slope matching otherwise.
    pub fn conjugate(&self, s: f64) -> Result<f64, NFunctionError> {
        if !s.is_finite() || s < 0.0 {
            return Err(NFunctionError::InvalidArgument { argument: s });
        }
        if let Some(c) = &self.analytic_conjugate {
            let y = c(s);
            if !y.is_finite() {
                return Err(NFunctionError::Overflow { argument: s });
            }
            return Ok(y.max(0.0));
        }
        self.conjugate_numeric(s)
    }

    /// Numeric conjugation: the supremum is attained where the derivative
    /// matches the slope `s`, located by safeguarded bisection.
    pub fn conjugate_numeric(&self, s: f64) -> Result<f64, NFunctionError> {
        if !s.is_finite() || s < 0.0 {
            return Err(NFunctionError::InvalidArgument { argument: s });
        }
        let t = self.slope_match(s)?;
        let v = self.eval(t)?;
        Ok((s * t - v).max(0.0))
    }

    /// Solves `deriv(t) = s`. This is the derivative of the conjugate. An
    /// overflowing derivative counts as "above the slope" so the bracket
    /// stays inside the representable range; a derivative that remains below
    /// `s` out to 1e300 means the conjugate supremum diverges.
    pub fn slope_match(&self, s: f64) -> Result<f64, NFunctionError> {
        if !s.is_finite() || s < 0.0 {
            return Err(NFunctionError::InvalidArgument { argument: s });
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        // Below s: Some(false); at/above s or overflowing: Some(true).
        let above = |t: f64| -> Option<bool> {
            match self.eval_deriv(t) {
                Ok(d) => Some(d >= s),
                Err(NFunctionError::Overflow { .. }) => Some(true),
                Err(_) => None,
            }
        };
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        loop {
            match above(hi) {
                Some(true) => break,
                Some(false) => {
                    lo = hi;
                    hi *= 2.0;
                    if hi > 1e300 {
                        return Err(NFunctionError::ConjugateDiverges { slope: s });
                    }
                }
                None => return Err(NFunctionError::InvalidArgument { argument: hi }),
            }
        }
        for _ in 0..BISECTION_MAX_ITER {
            if hi - lo <= BISECTION_TOL * 1.0f64.max(lo) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            match above(mid) {
                Some(true) => hi = mid,
                Some(false) => lo = mid,
                None => return Err(NFunctionError::InvalidArgument { argument: mid }),
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The conjugate as an N-function of its own. Value and derivative are
    /// routed through conjugation and slope matching of `self`; no analytic
    /// conjugate is attached, so conjugating the result exercises the full
    /// numeric path.
    pub fn conjugate_function(&self) -> NFunction {
        let for_value = self.clone();
        let for_deriv = self.clone();
        NFunction {
            label: format!("{}*", self.label),
            value: Arc::new(move |s: f64| match for_value.conjugate(s) {
                Ok(v) => v,
                Err(_) => f64::NAN,
            }),
            deriv: Arc::new(move |s: f64| match for_deriv.slope_match(s) {
                Ok(t) => t,
                Err(_) => f64::NAN,
            }),
            analytic_conjugate: None,
        }
    }

    /// Young-inequality gap `value(t) + conjugate(s) − s·t ≥ 0`, zero exactly
    /// when `s = deriv(t)`.
    pub fn young_gap(&self, t: f64, s: f64) -> Result<f64, NFunctionError> {
        let v = self.eval(t)?;
        let c = self.conjugate(s)?;
        Ok(v + c - s * t)
    }

    /// Samples `value(2t)/value(t)` on a geometric grid above the default
    /// large-argument threshold. See [`Self::delta2_probe_from`].
    pub fn delta2_probe(&self, t_max: f64, ratio_bound: f64) -> Delta2Report {
        self.delta2_probe_from(DELTA2_THRESHOLD, t_max, ratio_bound)
    }

    /// Doubling probe with an explicit threshold. `Yes` means the ratio
    /// stayed below `ratio_bound` on the whole grid; `No` means it exceeded
    /// the bound while still growing at the grid end (or where evaluation
    /// overflowed). Both are finite-grid evidence, not proof.
    pub fn delta2_probe_from(&self, threshold: f64, t_max: f64, ratio_bound: f64) -> Delta2Report {
        assert!(t_max > threshold, "probe range must extend past the threshold");
        assert!(ratio_bound > 2.0, "a doubling bound below 2 is vacuous");
        const POINTS: usize = 64;
        let mut ratios: Vec<f64> = Vec::with_capacity(POINTS);
        let mut truncated = false;
        let mut degenerate = false;
        let step = (t_max / threshold).powf(1.0 / (POINTS as f64 - 1.0));
        let mut t = threshold;
        for _ in 0..POINTS {
            let (v1, v2) = match (self.eval(t), self.eval(2.0 * t)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => {
                    truncated = true;
                    break;
                }
            };
            if v1 <= 0.0 {
                degenerate = true;
                break;
            }
            ratios.push(v2 / v1);
            t *= step;
        }
        let max_ratio = ratios.iter().fold(0.0f64, |m, &r| m.max(r));
        let tail_growing = ratios.len() >= 3 && {
            let tail = &ratios[ratios.len().saturating_sub(5)..];
            tail.windows(2).all(|w| w[1] > w[0])
        };
        let verdict = if degenerate || ratios.is_empty() {
            Delta2Verdict::Inconclusive
        } else if !truncated && max_ratio <= ratio_bound {
            Delta2Verdict::Yes
        } else if max_ratio > ratio_bound && tail_growing {
            Delta2Verdict::No
        } else {
            Delta2Verdict::Inconclusive
        };
        Delta2Report {
            verdict,
            witness_c: max_ratio,
            witness_k: threshold,
            max_ratio_seen: max_ratio,
        }
    }

    /// Searches for `K > 1` with `2·K·value(t) ≤ value(2t)` for all probed
    /// `t ≥ 1`. A strict witness implies the conjugate satisfies the
    /// doubling condition; pure powers attain the bound with equality and
    /// are reported unsatisfied with the boundary witness.
    pub fn superquadratic_growth(&self, t_max: f64) -> GrowthWitness {
        assert!(t_max > 1.0);
        const POINTS: usize = 64;
        let step = t_max.powf(1.0 / (POINTS as f64 - 1.0));
        let mut best_k = f64::INFINITY;
        let mut last_k = f64::NAN;
        let mut t = 1.0f64;
        let mut seen = 0usize;
        for _ in 0..POINTS {
            let (v1, v2) = match (self.eval(t), self.eval(2.0 * t)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => break,
            };
            if v1 <= 0.0 {
                break;
            }
            last_k = v2 / (2.0 * v1);
            best_k = best_k.min(last_k);
            seen += 1;
            t *= step;
        }
        if seen == 0 {
            return GrowthWitness { satisfied: false, witness_k: f64::NAN, equality: false };
        }
        let equality = last_k <= best_k * (1.0 + 1e-9);
        GrowthWitness { satisfied: best_k > 1.0 && !equality, witness_k: best_k, equality }
    }

    /// Luxemburg norm of a sampled field: `inf { λ > 0 : Σ wᵢ·value(|vᵢ|/λ) ≤ 1 }`
    /// by bisection on λ. Samples are `(value, quadrature weight)` pairs whose
    /// weights must sum to `measure_total`.
    pub fn luxemburg_norm(
        &self,
        samples: &[(f64, f64)],
        measure_total: f64,
    ) -> Result<f64, NFunctionError> {
        let mut weight_sum = 0.0f64;
        let mut vmax = 0.0f64;
        for &(v, w) in samples {
            if !v.is_finite() {
                return Err(NFunctionError::NonFiniteSample);
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(NFunctionError::InvalidWeight);
            }
            weight_sum += w;
            vmax = vmax.max(v.abs());
        }
        if (weight_sum - measure_total).abs() > 1e-12 * measure_total.abs().max(1.0) {
            return Err(NFunctionError::WeightSumMismatch {
                sum: weight_sum,
                expected: measure_total,
            });
        }
        if vmax == 0.0 {
            return Ok(0.0);
        }
        let modular = |lambda: f64| -> f64 {
            let mut g = 0.0;
            for &(v, w) in samples {
                let y = (self.value)(v.abs() / lambda);
                if !y.is_finite() {
                    return f64::INFINITY;
                }
                g += w * y;
            }
            g
        };
        let mut hi = vmax;
        let mut guard = 0usize;
        while modular(hi) > 1.0 {
            hi *= 2.0;
            guard += 1;
            if guard > 4000 {
                return Err(NFunctionError::InvalidShape {
                    reason: "modular does not fall below 1; value profile is degenerate",
                });
            }
        }
        let mut lo = 0.5 * hi;
        while modular(lo) <= 1.0 {
            hi = lo;
            lo *= 0.5;
            if lo < f64::MIN_POSITIVE {
                // Modular never exceeds 1: the norm degenerates to 0.
                return Ok(0.0);
            }
        }
        for _ in 0..BISECTION_MAX_ITER {
            if hi - lo <= BISECTION_TOL {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if modular(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    /// Shape validation on sample grids: zero at zero, midpoint convexity,
    /// nondecreasing value and derivative, `deriv(t)·t ≥ value(t)`, and the
    /// sub/superlinearity probes at 1e-6 and 1e6 (an overflow at the upper
    /// probe counts as superlinear).
    pub fn validate(&self) -> Result<(), NFunctionError> {
        let v0 = (self.value)(0.0);
        if !(v0.abs() <= 1e-14) {
            return Err(NFunctionError::InvalidShape { reason: "value(0) != 0" });
        }
        const POINTS: usize = 41;
        let (lo, hi) = (1e-3f64, 1e2f64);
        let step = (hi / lo).powf(1.0 / (POINTS as f64 - 1.0));
        let mut t = lo;
        let mut prev: Option<(f64, f64, f64)> = None;
        for _ in 0..POINTS {
            let v = self.eval(t)?;
            let d = self.eval_deriv(t)?;
            let tol = 1e-10 * (1.0 + v.abs());
            if d * t + tol < v {
                return Err(NFunctionError::InvalidShape {
                    reason: "deriv(t)*t < value(t): derivative inconsistent with convexity",
                });
            }
            if let Some((tp, vp, dp)) = prev {
                if v + tol < vp {
                    return Err(NFunctionError::InvalidShape { reason: "value is decreasing" });
                }
                if d + tol < dp {
                    return Err(NFunctionError::InvalidShape { reason: "derivative is decreasing" });
                }
                let mid = 0.5 * (tp + t);
                let vm = self.eval(mid)?;
                if vm > 0.5 * (vp + v) + 1e-10 * (1.0 + vp.abs() + v.abs()) {
                    return Err(NFunctionError::InvalidShape { reason: "midpoint convexity fails" });
                }
            }
            prev = Some((t, v, d));
            t *= step;
        }
        let slope_at = |t: f64| -> Result<f64, NFunctionError> { Ok(self.eval(t)? / t) };
        let s_small = slope_at(1e-6)?;
        let s_mid = slope_at(1.0)?;
        if !(s_small < s_mid) {
            return Err(NFunctionError::InvalidShape {
                reason: "value(t)/t does not vanish towards 0",
            });
        }
        match self.eval(1e6) {
            Err(_) => {} // grew past the overflow clamp: certainly superlinear
            Ok(v) => {
                if !(v / 1e6 > s_mid) {
                    return Err(NFunctionError::InvalidShape {
                        reason: "value(t)/t does not grow towards infinity",
                    });
                }
            }
        }
        Ok(())
    }
}
