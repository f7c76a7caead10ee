use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use statrs::function::factorial::ln_factorial;

use super::SuspensionError;
use crate::scheme::CFScheme;

const TAIL: f64 = 1e-15;

/// Entropy in nats of the Poisson law with mean `t`.
///
/// Terms `-p_i ln p_i` are summed until both the current term and a bound
/// on the remaining tail fall below `1e-15`. Past the mode the weights
/// decay at least geometrically with ratio `q = t/(i+1)`, and
/// `-p ln p ≤ (2/e) √p`, so the tail is at most
/// `(2/e) √p_{i+1} / (1 - √q)`.
pub fn poisson_entropy(t: f64) -> Result<f64, SuspensionError> {
    check_domain(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let ln_t = t.ln();
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut ln_p = -t;
    let mut i = 0u64;
    loop {
        let p = ln_p.exp();
        let term = -p * ln_p;
        // Kahan summation
        let y = term - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        let next_ln_p = ln_p + ln_t - ((i + 1) as f64).ln();
        if (i + 1) as f64 > t {
            let q = t / (i + 1) as f64;
            let bound = 2.0 / std::f64::consts::E * (next_ln_p / 2.0).exp() / (1.0 - q.sqrt());
            if term.abs() < TAIL && bound < TAIL {
                return Ok(sum);
            }
        }
        ln_p = next_ln_p;
        i += 1;
    }
}

/// Second evaluation of the Poisson entropy through
/// `t (1 - ln t) + e^{-t} Σ_{k≥2} t^k ln(k!) / k!`.
pub fn poisson_entropy_closed_form(t: f64) -> Result<f64, SuspensionError> {
    check_domain(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let mut series = 0.0;
    let mut k = 2u64;
    loop {
        let lnf = ln_factorial(k);
        let w = (k as f64 * t.ln() - lnf - t).exp();
        let term = w * lnf;
        series += term;
        if k as f64 > 2.0 * t + 2.0 && term < TAIL * 1e-3 {
            break;
        }
        k += 1;
    }
    Ok(t * (1.0 - t.ln()) + series)
}

fn check_domain(t: f64) -> Result<(), SuspensionError> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(SuspensionError::Domain(format!("Poisson parameter must be a finite nonnegative number, got {t}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyPoint {
    pub level: usize,
    #[serde(serialize_with = "ser_ratio")]
    pub mu: BigRational,
    pub f_nats: f64,
}

fn ser_ratio<S: serde::Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// The bound sequence `f(μ([1]_n))` with `μ([1]_n) = 1/(#C_1 ⋯ #C_n)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyCurve {
    pub points: Vec<EntropyPoint>,
    /// The f-values strictly decrease over the checked levels.
    pub decreasing: bool,
}

pub fn entropy_bound_curve(s: &CFScheme) -> Result<EntropyCurve, SuspensionError> {
    if s.depth() < 1 {
        return Err(SuspensionError::Precondition("the entropy curve needs depth at least 1".into()));
    }
    let points: Vec<EntropyPoint> = (1..=s.depth())
        .map(|n| {
            let mu = BigRational::new(BigInt::from(1), s.c_product(n));
            let f_nats = poisson_entropy(mu.to_f64().unwrap_or(0.0))?;
            Ok(EntropyPoint { level: n, mu, f_nats })
        })
        .collect::<Result<_, SuspensionError>>()?;
    let decreasing = points.windows(2).all(|w| w[1].f_nats < w[0].f_nats);
    Ok(EntropyCurve { points, decreasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::GroupDescriptor;
    use crate::scheme::fixtures::s1;
    use crate::scheme::{build_scheme, BuildParams};

    // 50-digit reference sums
    const F_HALF: f64 = 0.927_637_467_495_797_4;
    const F_QUARTER: f64 = 0.617_511_999_842_352_6;

    #[test]
    fn reference_values() {
        assert_eq!(poisson_entropy(0.0).unwrap(), 0.0);
        assert!((poisson_entropy(0.5).unwrap() - F_HALF).abs() < 1e-14);
        assert!((poisson_entropy(0.25).unwrap() - F_QUARTER).abs() < 1e-14);
        assert!(poisson_entropy(1e-6).unwrap() < 2e-5);
        assert!(matches!(poisson_entropy(-1.0), Err(SuspensionError::Domain(_))));
        assert!(poisson_entropy(f64::NAN).is_err());
    }

    #[test]
    fn two_routines_agree() {
        for &t in &[1e-9, 1e-4, 0.1, 0.5, 1.0, 2.5, 10.0, 40.0] {
            let a = poisson_entropy(t).unwrap();
            let b = poisson_entropy_closed_form(t).unwrap();
            assert!((a - b).abs() < 1e-12 * a.max(1.0), "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn small_scheme_curve() {
        let c = entropy_bound_curve(&s1()).unwrap();
        assert_eq!(c.points.len(), 2);
        assert_eq!(c.points[0].mu, BigRational::new(1.into(), 2.into()));
        assert_eq!(c.points[1].mu, BigRational::new(1.into(), 4.into()));
        assert!(c.points[1].f_nats < c.points[0].f_nats);
        assert!(c.decreasing);
        let single = entropy_bound_curve(&s1().truncate(1)).unwrap();
        assert_eq!(single.points.len(), 1);
        assert!(single.decreasing);
    }

    #[test]
    fn factorial_decay() {
        let s = build_scheme(&GroupDescriptor::integers(), 4, &BuildParams::default()).unwrap();
        let c = entropy_bound_curve(&s).unwrap();
        let mut fact = 1u64;
        for p in &c.points {
            fact *= p.level as u64 + 1;
            assert_eq!(p.mu, BigRational::new(1.into(), BigInt::from(fact)));
        }
        assert!(c.decreasing);
        assert!(c.points.last().unwrap().f_nats < 0.05);
    }
}
