//! Explicit finite-`n` bound expressions from the counting argument, evaluated
//! exactly as rationals where the numbers stay manageable and always as
//! natural logs.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::{BlockKind, GenerateError, PlantedSpec};
use crate::rational::{self, Rational};
use crate::SCHEMA_VERSION;

/// Above this many half-edges the exact rational forms are skipped.
pub const EXACT_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundError {
    #[error("bound needs d^2 <= n, got n={n}, d={d}")]
    PreconditionD2N { n: usize, d: usize },
    #[error(transparent)]
    InfeasibleSpec(#[from] GenerateError),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    FixedD,
    GrowingD,
}

/// A bound as `ln` plus, for small instances, the exact value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub ln: f64,
    #[serde(with = "rational::serde_rational_opt")]
    pub exact: Option<Rational>,
}

impl BoundValue {
    fn from_exact(value: Rational) -> Self {
        Self {
            ln: rational::ln_rational(&value),
            exact: Some(value),
        }
    }
}

fn pow(base: &Rational, exp: usize) -> Rational {
    num_traits::pow(base.clone(), exp)
}

fn big(x: usize) -> BigInt {
    BigInt::from(x)
}

/// `T_c = c · (dn/2) · (d-1)/(d+1)`.
pub fn t_c(n: usize, d: usize, c: &Rational) -> Rational {
    if d == 0 {
        return rational::int(0);
    }
    c * Rational::new(big(d * n * (d - 1)), big(2 * (d + 1)))
}

/// Integer exponent `max(0, ⌈x⌉ - 1)` used for the `(d²/n)` factor.
fn weight_exponent(x: &Rational) -> usize {
    let e = rational::ceil_int(x) - BigInt::one();
    if e.is_negative() {
        0
    } else {
        usize::try_from(e).expect("exponent fits in usize")
    }
}

/// `dn/2`, which is fractional when no d-regular graph on `n` nodes exists.
fn half_edges(n: usize, d: usize) -> f64 {
    (d * n) as f64 / 2.0
}

fn exact_form(n: usize, d: usize) -> bool {
    (d * n).is_multiple_of(2) && d * n <= EXACT_LIMIT
}

fn ln_d2_over_n(n: usize, d: usize) -> f64 {
    2.0 * (d as f64).ln() - (n as f64).ln()
}

/// `(dn)^{dn/2} (d²/n)^{weight}`, the preimage bound for a profile of that weight.
pub fn phi_preimage_bound(n: usize, d: usize, weight: usize) -> BoundValue {
    let half = d * n / 2;
    let ln = half_edges(n, d) * ((d * n) as f64).ln() + weight as f64 * ln_d2_over_n(n, d);
    let exact = exact_form(n, d).then(|| {
        pow(&rational::int((d * n) as i64), half) * pow(&Rational::new(big(d * d), big(n)), weight)
    });
    BoundValue { ln, exact }
}

/// `(dn/2) 2^{dn/2} (dn)^{dn/2} (d²/n)^{e} / (d!)^n` for a weight exponent `e`.
fn counting_bound(n: usize, d: usize, exponent: usize) -> BoundValue {
    let half = d * n / 2;
    let h = half_edges(n, d);
    let ln = h.ln()
        + h * std::f64::consts::LN_2
        + h * ((d * n) as f64).ln()
        + exponent as f64 * ln_d2_over_n(n, d)
        - n as f64 * rational::ln_factorial(d as u64);
    let exact = exact_form(n, d).then(|| {
        let numer = BigInt::from(half)
            * num_traits::pow(BigInt::from(2 * d * n), half)
            * num_traits::pow(big(d * d), exponent);
        let denom = num_traits::pow(big(n), exponent)
            * num_traits::pow(BigInt::from(rational::factorial(d as u64)), n);
        Rational::new(numer, denom)
    });
    BoundValue { ln, exact }
}

fn check_d2n(n: usize, d: usize) -> Result<(), BoundError> {
    if d * d > n {
        return Err(BoundError::PreconditionD2N { n, d });
    }
    if d == 0 {
        return Err(BoundError::InvalidParameters("d must be positive".into()));
    }
    Ok(())
}

/// Upper bound on `|𝒢_{d,c}(n)|` with weight exponent `max(0, ⌈T_c⌉ - 1)`.
pub fn explicit_upper_count(n: usize, d: usize, c: &Rational) -> Result<BoundValue, BoundError> {
    check_d2n(n, d)?;
    Ok(counting_bound(n, d, weight_exponent(&t_c(n, d, c))))
}

/// Upper bound on the graphs with many bad edges: exponent
/// `max(0, ⌈T_c + ε δ d² n / (6d+6)⌉ - 1)`.
pub fn badness_bound(
    n: usize,
    d: usize,
    c: &Rational,
    eps: &Rational,
    delta: &Rational,
) -> Result<BoundValue, BoundError> {
    check_d2n(n, d)?;
    if eps.is_negative() || delta.is_negative() {
        return Err(BoundError::InvalidParameters(
            "eps and delta must be >= 0".into(),
        ));
    }
    let extra = eps * delta * Rational::new(big(d * d * n), big(6 * d + 6));
    Ok(counting_bound(
        n,
        d,
        weight_exponent(&(t_c(n, d, c) + extra)),
    ))
}

/// How the residual count `|𝒢_d(m)|` enters the lower bound.
#[derive(Debug, Clone, PartialEq)]
pub enum Residual {
    /// Exact count, e.g. from the enumerator.
    Exact(BigUint),
    /// `½ d m log(m/(d+1)) - d m` with the unknown `O(1)` dropped.
    Heuristic,
    /// Caller-provided `ln |𝒢_d(m)|`.
    SuppliedLn(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerCount {
    pub b: usize,
    pub m: usize,
    /// `n! / (m! b! ((d+1)!)^b)`.
    pub planted_partitions: BigUint,
    /// `C(b + ⌊m/(d+1)⌋, b)`: the most times one graph is counted.
    pub overcount: BigUint,
    /// `ln` of the family count without the overcount correction.
    pub planted_family_ln: f64,
    pub value: BoundValue,
    /// True when the residual term is the heuristic estimate.
    pub heuristic: bool,
}

/// `ln |𝒢_d(m)|` estimate, `½ d m log(m/(d+1)) - d m` (zero for `m = 0`).
pub fn residual_heuristic_ln(m: usize, d: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let (m, d) = (m as f64, d as f64);
    0.5 * d * m * (m / (d + 1.0)).ln() - d * m
}

/// Lower bound on `|𝒢_{d,c}(n)|` from the clique-planted family.
///
/// A graph whose residual itself contains `K_{d+1}` components is produced by
/// several block choices, at most `C(b + ⌊m/(d+1)⌋, b)` of them, so the family
/// count is divided by that factor.
pub fn lower_count(
    n: usize,
    d: usize,
    c: &Rational,
    residual: &Residual,
) -> Result<LowerCount, BoundError> {
    let spec = PlantedSpec::for_fraction(n, d, c, BlockKind::Clique)?;
    let (b, m) = (spec.b, spec.m);
    let block_fact = rational::factorial(d as u64 + 1);
    let planted_partitions = rational::factorial(n as u64)
        / (rational::factorial(m as u64)
            * rational::factorial(b as u64)
            * num_traits::pow(block_fact, b));
    let overcount = rational::binomial((b + m / (d + 1)) as u64, b as u64);
    let partitions_ln = rational::ln_bigint(&BigInt::from(planted_partitions.clone()));
    let (residual_ln, residual_exact, heuristic) = match residual {
        Residual::Exact(count) => {
            if count.is_zero() {
                return Err(BoundError::InvalidParameters(format!(
                    "residual count for m={m} is zero"
                )));
            }
            (
                rational::ln_bigint(&BigInt::from(count.clone())),
                Some(count.clone()),
                false,
            )
        }
        Residual::Heuristic => (residual_heuristic_ln(m, d), None, true),
        Residual::SuppliedLn(ln) => (*ln, None, false),
    };
    let overcount_ln = rational::ln_bigint(&BigInt::from(overcount.clone()));
    let value = match residual_exact {
        Some(count) => BoundValue::from_exact(Rational::new(
            BigInt::from(&planted_partitions * count),
            BigInt::from(overcount.clone()),
        )),
        None => BoundValue {
            ln: partitions_ln + residual_ln - overcount_ln,
            exact: None,
        },
    };
    Ok(LowerCount {
        b,
        m,
        planted_family_ln: partitions_ln + residual_ln,
        planted_partitions,
        overcount,
        value,
        heuristic,
    })
}

/// Leading constant of `log |𝒢_{d,c}(n)| / ((dn/2) log n)` deficit.
pub fn rate(c: &Rational, d: usize, regime: Regime) -> Rational {
    match regime {
        Regime::FixedD => c * Rational::new(big(d.saturating_sub(1)), big(d + 1)),
        Regime::GrowingD => c.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsDelta {
    pub eps: f64,
    pub delta: f64,
    /// Set when `δ >= 1/16`, outside the range of the pseudo-clique size bound.
    pub warning: bool,
}

/// `δ = (3c)^{1/3} (log d / log(n/d²))^{1/4}`, `ε = δ²`, from the two logs directly.
pub fn eps_delta_from_logs(c: f64, log_d: f64, log_n_over_d2: f64) -> EpsDelta {
    let delta = (3.0 * c).cbrt() * (log_d / log_n_over_d2).powf(0.25);
    EpsDelta {
        eps: delta * delta,
        delta,
        warning: delta >= 1.0 / 16.0,
    }
}

pub fn default_eps_delta(n: usize, d: usize, c: &Rational) -> Result<EpsDelta, BoundError> {
    if d * d >= n {
        return Err(BoundError::PreconditionD2N { n, d });
    }
    if d < 2 {
        return Err(BoundError::InvalidParameters(
            "default eps/delta needs d >= 2".into(),
        ));
    }
    let (nf, df) = (n as f64, d as f64);
    Ok(eps_delta_from_logs(
        rational::to_f64(c),
        df.ln(),
        (nf / (df * df)).ln(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSheet {
    pub schema_version: u32,
    pub n: usize,
    pub d: usize,
    #[serde(with = "rational::serde_rational")]
    pub c: Rational,
    #[serde(with = "rational::serde_rational")]
    pub t_c: Rational,
    /// Weight at which the preimage bound is evaluated, `max(0, ⌈T_c⌉ - 1)`.
    pub preimage_weight: usize,
    pub preimage_bound_log: f64,
    pub upper_count_log: Option<f64>,
    pub lower_count_log: Option<f64>,
    pub lower_is_heuristic: bool,
    /// Exact `|𝒢_{d,c}(n)|` when supplied by the caller.
    pub exact_count: Option<String>,
    pub exact_count_log: Option<f64>,
    #[serde(with = "rational::serde_rational")]
    pub rate_fixed_d: Rational,
    #[serde(with = "rational::serde_rational")]
    pub rate_growing_d: Rational,
    pub notes: Vec<String>,
}

impl BoundSheet {
    pub fn csv_header() -> &'static str {
        "n,d,c,T_c,lower_log,exact_log,upper_log,rate"
    }

    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n,
            self.d,
            rational::to_string(&self.c),
            rational::to_string(&self.t_c),
            opt(self.lower_count_log),
            opt(self.exact_count_log),
            opt(self.upper_count_log),
            rational::to_string(&self.rate_fixed_d),
        )
    }
}

/// Every bound at `(n, d, c)`; parts whose preconditions fail are left empty
/// with a note.
pub fn bound_sheet(
    n: usize,
    d: usize,
    c: &Rational,
    residual: &Residual,
    exact: Option<&BigUint>,
) -> BoundSheet {
    let tc = t_c(n, d, c);
    let preimage_weight = weight_exponent(&tc);
    let mut notes = Vec::new();
    let upper_count_log = match explicit_upper_count(n, d, c) {
        Ok(v) => Some(v.ln),
        Err(e) => {
            notes.push(format!("upper: {e}"));
            None
        }
    };
    let (lower_count_log, lower_is_heuristic) = match lower_count(n, d, c, residual) {
        Ok(v) => (Some(v.value.ln), v.heuristic),
        Err(e) => {
            notes.push(format!("lower: {e}"));
            (None, false)
        }
    };
    if lower_is_heuristic {
        notes.push("lower: residual count is a heuristic estimate".into());
    }
    BoundSheet {
        schema_version: SCHEMA_VERSION,
        n,
        d,
        c: c.clone(),
        t_c: tc,
        preimage_weight,
        preimage_bound_log: phi_preimage_bound(n, d, preimage_weight).ln,
        upper_count_log,
        lower_count_log,
        lower_is_heuristic,
        exact_count: exact.map(|x| x.to_string()),
        exact_count_log: exact
            .filter(|x| !x.is_zero())
            .map(|x| rational::ln_bigint(&BigInt::from(x.clone()))),
        rate_fixed_d: rate(c, d, Regime::FixedD),
        rate_growing_d: rate(c, d, Regime::GrowingD),
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn t_c_values() {
        assert_eq!(t_c(4, 3, &int(1)), int(3));
        assert_eq!(t_c(6, 2, &int(1)), int(2));
        assert_eq!(t_c(10, 1, &ratio(1, 2)), int(0));
        assert!(t_c(30, 5, &int(1)) <= int(75));
    }

    #[test]
    fn preimage_bounds() {
        let b = phi_preimage_bound(4, 3, 3);
        assert_eq!(b.exact.unwrap(), int(34_012_224));
        assert!((b.ln - 34_012_224f64.ln()).abs() < 1e-9);
        assert_eq!(phi_preimage_bound(6, 2, 2).exact.unwrap(), int(1_327_104));
        let zero = phi_preimage_bound(7, 2, 0);
        assert!((zero.ln - 7.0 * 14f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn upper_bounds() {
        let boundary = explicit_upper_count(9, 3, &ratio(1, 2)).unwrap();
        assert!(boundary.ln.is_finite() && boundary.exact.is_none());
        assert_eq!(
            explicit_upper_count(6, 3, &ratio(1, 2)),
            Err(BoundError::PreconditionD2N { n: 6, d: 3 })
        );
        // 6 * 2^6 * 12^6 * (4/6) / 2^6
        let v = explicit_upper_count(6, 2, &int(1)).unwrap();
        assert_eq!(v.exact.clone().unwrap(), int(11_943_936));
        assert!((v.ln - 11_943_936f64.ln()).abs() < 1e-9);
        assert!(v.exact.unwrap() >= int(10));
    }

    #[test]
    fn badness_bounds() {
        let c = ratio(1, 2);
        let upper = explicit_upper_count(9, 3, &c).unwrap();
        assert_eq!(
            badness_bound(9, 3, &c, &int(0), &ratio(1, 10)).unwrap(),
            upper
        );
        assert_eq!(
            badness_bound(9, 3, &c, &ratio(1, 10), &int(0)).unwrap(),
            upper
        );
        let small = badness_bound(9, 3, &c, &ratio(1, 10), &ratio(1, 10)).unwrap();
        assert!(small.ln <= upper.ln);
        let a = badness_bound(100, 3, &c, &ratio(1, 2), &ratio(1, 2)).unwrap();
        let b = badness_bound(100, 3, &c, &int(1), &ratio(1, 2)).unwrap();
        assert!(b.exact.unwrap() < a.exact.unwrap());
    }

    #[test]
    fn lower_counts() {
        let l = lower_count(6, 2, &int(1), &Residual::Exact(BigUint::one())).unwrap();
        assert_eq!((l.b, l.m), (2, 0));
        assert_eq!(l.value.exact.unwrap(), int(10));
        let l = lower_count(9, 2, &int(1), &Residual::Exact(BigUint::one())).unwrap();
        assert_eq!(l.value.exact.unwrap(), int(280));
        let l = lower_count(8, 3, &ratio(1, 2), &Residual::Exact(BigUint::one())).unwrap();
        assert_eq!((l.b, l.m), (1, 4));
        assert_eq!(l.planted_partitions, BigUint::from(70u32));
        assert_eq!(l.overcount, BigUint::from(2u32));
        assert_eq!(l.value.exact.unwrap(), int(35));
        assert!((l.planted_family_ln - 70f64.ln()).abs() < 1e-12);
        let h = lower_count(8, 3, &ratio(1, 2), &Residual::Heuristic).unwrap();
        assert!(h.heuristic);
        assert!(matches!(
            lower_count(4, 2, &ratio(1, 4), &Residual::Heuristic),
            Err(BoundError::InfeasibleSpec(_))
        ));
    }

    #[test]
    fn rates_and_defaults() {
        assert_eq!(rate(&ratio(1, 2), 3, Regime::FixedD), ratio(1, 4));
        assert_eq!(rate(&ratio(3, 7), 9, Regime::GrowingD), ratio(3, 7));
        let r = eps_delta_from_logs(1.0 / 3.0, 1.0, 16.0);
        assert!((r.delta - 0.5).abs() < 1e-12 && (r.eps - 0.25).abs() < 1e-12);
        assert!(r.warning);
        let a = default_eps_delta(10_000, 3, &ratio(1, 10)).unwrap();
        let b = default_eps_delta(10_000, 5, &ratio(1, 10)).unwrap();
        assert!(a.delta < b.delta);
        assert!(default_eps_delta(9, 3, &ratio(1, 10)).is_err());
    }

    #[test]
    fn sheet_rows() {
        let sheet = bound_sheet(
            6,
            2,
            &int(1),
            &Residual::Exact(BigUint::one()),
            Some(&BigUint::from(10u32)),
        );
        assert!(sheet.lower_count_log.unwrap() <= sheet.exact_count_log.unwrap() + 1e-12);
        assert!(sheet.exact_count_log.unwrap() <= sheet.upper_count_log.unwrap());
        assert!(sheet.csv_row().starts_with("6,2,1,2,"));
        let json = serde_json::to_string(&sheet).unwrap();
        let back: BoundSheet = serde_json::from_str(&json).unwrap();
        assert_eq!(back.t_c, sheet.t_c);
        let far = bound_sheet(6, 3, &ratio(1, 2), &Residual::Heuristic, None);
        assert!(far.upper_count_log.is_none() && !far.notes.is_empty());
    }
}
