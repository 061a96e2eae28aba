//! Binary symmetric channel arithmetic.
//!
//! A BSC with crossover `p` is treated as hard-decision BPSK over AWGN, so
//! `p = Q(sqrt(2 R Eb/N0))` at code rate `R`. The hard-decision Shannon limit
//! for rate `R` is the `Eb/N0` at which the BSC capacity `1 - h2(p)` equals
//! `R`; the gap is measured in dB above it.
//!
//! Everything here is generic over the float type. Tolerances are the
//! requested ones or a few ulps of `T`, whichever is coarser.

use std::fmt::Debug;

use num_traits::{Float, FloatConst};
use serde::{Deserialize, Serialize};

use crate::{Error, Rate, Result};

pub trait Real: Float + FloatConst + Debug + Send + Sync + 'static {}

impl<T> Real for T where T: Float + FloatConst + Debug + Send + Sync + 'static {}

const MAX_BISECTIONS: usize = 400;

#[inline]
fn c<T: Real>(x: f64) -> T {
    T::from(x).expect("constant representable")
}

fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Converts an exact rate to `T`.
pub fn rate_to<T: Real>(rate: Rate) -> T {
    c::<T>(*rate.numer() as f64) / c::<T>(*rate.denom() as f64)
}

/// Binary entropy in bits, with `h2(0) = h2(1) = 0`.
pub fn entropy2<T: Real>(p: T) -> Result<T> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::Domain(format!("entropy2 needs p in [0, 1], got {}", to_f64(p))));
    }
    let term = |x: T| if x > T::zero() { -x * x.log2() } else { T::zero() };
    Ok(term(p) + term(T::one() - p))
}

/// Inverse of [`entropy2`] on `[0, 1/2]`.
pub fn entropy2_inv<T: Real>(h: T) -> Result<T> {
    if !(h >= T::zero() && h <= T::one()) {
        return Err(Error::Domain(format!("entropy2_inv needs h in [0, 1], got {}", to_f64(h))));
    }
    let tol = c::<T>(1e-12).max(T::epsilon() * c(4.0));
    Ok(bisect(T::zero(), c(0.5), tol, |p| {
        entropy2(p).expect("p stays in [0, 1/2]") < h
    }))
}

/// Bisection for a monotone predicate: `below(x)` holds for `x` left of the
/// root and fails right of it.
fn bisect<T: Real>(mut lo: T, mut hi: T, tol: T, below: impl Fn(T) -> bool) -> T {
    let two = c::<T>(2.0);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / two
}

/// Complementary error function.
///
/// Power series for `erf` below 2, continued fraction above.
pub fn erfc<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x < T::zero() {
        return c::<T>(2.0) - erfc(-x);
    }
    if x < c(2.0) {
        T::one() - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

fn erf_series<T: Real>(x: T) -> T {
    // erf x = 2/sqrt(pi) * sum_n (-1)^n x^(2n+1) / (n! (2n+1))
    let x2 = x * x;
    let mut power = x; // (-1)^n x^(2n+1) / n!
    let mut sum = x;
    let mut n = T::zero();
    for _ in 0..200 {
        n = n + T::one();
        power = -power * x2 / n;
        let term = power / (n + n + T::one());
        sum = sum + term;
        if term.abs() <= sum.abs() * T::epsilon() {
            break;
        }
    }
    sum * T::FRAC_2_SQRT_PI()
}

fn erfc_continued_fraction<T: Real>(x: T) -> T {
    // erfc x = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    // evaluated with the modified Lentz algorithm.
    let tiny = T::min_positive_value() / T::epsilon();
    let half = c::<T>(0.5);
    let mut f = x;
    let mut cc = x;
    let mut d = T::zero();
    let mut a = T::zero();
    for _ in 0..1000 {
        a = a + half;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        cc = x + a / cc;
        if cc.abs() < tiny {
            cc = tiny;
        }
        d = T::one() / d;
        let delta = cc * d;
        f = f * delta;
        if (delta - T::one()).abs() <= T::epsilon() {
            break;
        }
    }
    (-x * x).exp() / T::PI().sqrt() / f
}

/// Gaussian tail `Q(z) = P(N(0,1) > z)`.
pub fn q_function<T: Real>(z: T) -> T {
    c::<T>(0.5) * erfc(z / T::SQRT_2())
}

fn db_to_lin<T: Real>(db: T) -> T {
    c::<T>(10.0).powf(db / c(10.0))
}

fn lin_to_db<T: Real>(lin: T) -> T {
    c::<T>(10.0) * lin.log10()
}

/// Crossover probability at linear `Eb/N0` for rate `rate`.
pub fn crossover_at<T: Real>(rate: T, ebn0_lin: T) -> T {
    q_function((c::<T>(2.0) * rate * ebn0_lin).sqrt())
}

/// Largest crossover probability a rate-`rate` code can tolerate,
/// `h2^-1(1 - R)`.
pub fn limit_crossover<T: Real>(rate: T) -> Result<T> {
    check_rate(rate)?;
    entropy2_inv(T::one() - rate)
}

fn check_rate<T: Real>(rate: T) -> Result<()> {
    if rate > T::zero() && rate < T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("rate must lie in (0, 1), got {}", to_f64(rate))))
    }
}

/// Linear `Eb/N0` at which `crossover_at(rate, .)` equals `p`.
fn ebn0_for_crossover<T: Real>(rate: T, p: T) -> T {
    let mut hi = T::one();
    while crossover_at(rate, hi) > p {
        hi = hi * c(2.0);
    }
    let tol = c::<T>(1e-9).min(hi * c(1e-12)).max(hi * T::epsilon() * c(4.0));
    // crossover decreases with Eb/N0.
    bisect(T::zero(), hi, tol, |x| crossover_at(rate, x) > p)
}

/// Hard-decision Shannon limit `Eb/N0` in dB for rate `rate`.
pub fn shannon_limit_ebn0<T: Real>(rate: T) -> Result<T> {
    let p_star = limit_crossover(rate)?;
    Ok(lin_to_db(ebn0_for_crossover(rate, p_star)))
}

/// BSC crossover at `gap_db` above the hard-decision Shannon limit.
pub fn gap_to_crossover<T: Real>(rate: T, gap_db: T) -> Result<T> {
    if !(gap_db >= T::zero()) {
        return Err(Error::Domain(format!("gap must be non-negative, got {} dB", to_f64(gap_db))));
    }
    let limit = shannon_limit_ebn0(rate)?;
    Ok(crossover_at(rate, db_to_lin(limit + gap_db)))
}

/// Gap in dB to the hard-decision Shannon limit for crossover `p`.
///
/// `p` equal to the limit crossover (to within rounding) maps to 0 dB; larger
/// values are an error.
pub fn crossover_to_gap<T: Real>(rate: T, p: T) -> Result<T> {
    let p_star = limit_crossover(rate)?;
    if !(p > T::zero()) {
        return Err(Error::Domain(format!("crossover must be positive, got {}", to_f64(p))));
    }
    if p > p_star * (T::one() + c(1e-9)) {
        return Err(Error::AboveLimit {
            p: to_f64(p),
            limit: to_f64(p_star),
            rate: to_f64(rate),
        });
    }
    if p >= p_star {
        return Ok(T::zero());
    }
    let limit = ebn0_for_crossover(rate, p_star);
    let at_p = ebn0_for_crossover(rate, p);
    Ok(lin_to_db(at_p / limit).max(T::zero()))
}

/// A consistent `(R, gap, p, Eb/N0)` tuple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelPoint<T> {
    pub rate: T,
    pub gap_db: T,
    pub crossover: T,
    pub ebn0_db: T,
}

impl<T: Real> ChannelPoint<T> {
    pub fn from_gap(rate: T, gap_db: T) -> Result<Self> {
        let limit = shannon_limit_ebn0(rate)?;
        Ok(Self {
            rate,
            gap_db,
            crossover: gap_to_crossover(rate, gap_db)?,
            ebn0_db: limit + gap_db,
        })
    }

    pub fn from_crossover(rate: T, crossover: T) -> Result<Self> {
        let gap_db = crossover_to_gap(rate, crossover)?;
        Ok(Self {
            rate,
            gap_db,
            crossover,
            ebn0_db: shannon_limit_ebn0(rate)? + gap_db,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_endpoints() {
        assert_eq!(entropy2(0.5f64).unwrap(), 1.0);
        assert_eq!(entropy2(0.0f64).unwrap(), 0.0);
        assert_eq!(entropy2(1.0f64).unwrap(), 0.0);
        assert!(entropy2(1.5f64).is_err());
        assert!(entropy2(f64::NAN).is_err());
        assert!(entropy2_inv(-0.1f64).is_err());
    }

    #[test]
    fn entropy_round_trip() {
        for p in [0.01f64, 0.1, 0.3] {
            let back = entropy2_inv(entropy2(p).unwrap()).unwrap();
            assert!((back - p).abs() < 1e-9, "{p} -> {back}");
        }
        // h2 is flat to within an ulp of 1 for |p - 1/2| below ~1e-8.
        assert!(entropy2_inv(1.0f64).unwrap() > 0.5 - 1e-7);
    }

    #[test]
    fn limit_crossover_consistency() {
        for r in [0.5f64, 0.8, 0.98] {
            let p = gap_to_crossover(r, 0.0).unwrap();
            let star = entropy2_inv(1.0 - r).unwrap();
            assert!((p - star).abs() / star < 1e-7, "{r}: {p} vs {star}");
        }
    }

    #[test]
    fn limit_rises_with_rate() {
        let mut last = f64::NEG_INFINITY;
        for i in 1..100 {
            let r = i as f64 / 100.0;
            let l = shannon_limit_ebn0(r).unwrap();
            assert!(l > last, "limit not increasing at R = {r}");
            last = l;
        }
    }

    #[test]
    fn above_limit_is_an_error() {
        let star = limit_crossover(0.8f64).unwrap();
        assert!(matches!(crossover_to_gap(0.8, star * 1.01), Err(Error::AboveLimit { .. })));
        assert_eq!(crossover_to_gap(0.8, star).unwrap(), 0.0);
    }

    #[test]
    fn bad_rates() {
        assert!(shannon_limit_ebn0(0.0f64).is_err());
        assert!(shannon_limit_ebn0(1.0f64).is_err());
        assert!(gap_to_crossover(0.5f64, -1.0).is_err());
    }

    #[test]
    fn single_precision_agrees() {
        let p32 = gap_to_crossover(0.8f32, 1.85).unwrap() as f64;
        let p64 = gap_to_crossover(0.8f64, 1.85).unwrap();
        assert!((p32 - p64).abs() / p64 < 1e-4, "{p32} vs {p64}");
    }

    #[test]
    fn erfc_symmetry() {
        for x in [0.1f64, 0.7, 1.9, 2.5] {
            assert!((erfc(-x) + erfc(x) - 2.0).abs() < 1e-15);
        }
        assert_eq!(erfc(0.0f64), 1.0);
    }
}
