//! Exponent functions nu(r) and rho(q) for general dimension d.
//!
//! Both are piecewise with a breakpoint at r = (d+1)/2, resp. q = 2(d+1)/(d-1),
//! and both admit the endpoint infinity as a symbolic value.

use std::fmt;

use num_rational::Ratio;
use num_traits::Num;

use crate::error::{LandauError, Result};

/// Scalars the exponent formulas can be evaluated in: floats or exact rationals.
pub trait ExponentScalar: Clone + Num + PartialOrd + fmt::Debug {
    fn from_int(i: i64) -> Self;
    fn to_f64_lossy(&self) -> f64;
}

impl ExponentScalar for f64 {
    fn from_int(i: i64) -> Self {
        i as f64
    }
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl ExponentScalar for f32 {
    fn from_int(i: i64) -> Self {
        i as f32
    }
    fn to_f64_lossy(&self) -> f64 {
        *self as f64
    }
}

impl ExponentScalar for Ratio<i64> {
    fn from_int(i: i64) -> Self {
        Ratio::from_integer(i)
    }
    fn to_f64_lossy(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// A Lebesgue exponent, finite or infinite.
#[derive(Debug, Clone, PartialEq)]
pub enum Exponent<T> {
    Finite(T),
    Infinity,
}

impl<T: ExponentScalar> Exponent<T> {
    pub fn finite(x: T) -> Self {
        Exponent::Finite(x)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Exponent::Finite(x) => x.to_f64_lossy(),
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

impl Exponent<f64> {
    /// Maps `f64::INFINITY` to the symbolic endpoint.
    pub fn from_f64(x: f64) -> Self {
        if x.is_infinite() && x > 0.0 {
            Exponent::Infinity
        } else {
            Exponent::Finite(x)
        }
    }
}

impl<T: fmt::Display> fmt::Display for Exponent<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(x) => write!(f, "{x}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

fn check_dim(d: u32) -> Result<()> {
    if d < 2 {
        return Err(LandauError::InvalidExponent(format!("dimension d = {d} < 2")));
    }
    Ok(())
}

fn int<T: ExponentScalar>(i: i64) -> T {
    T::from_int(i)
}

/// nu(r): d/(2r) - 1 on [d/2, (d+1)/2], -1/(2r) beyond, 0 at r = infinity.
pub fn nu_exponent<T: ExponentScalar>(d: u32, r: &Exponent<T>) -> Result<T> {
    check_dim(d)?;
    let d = d as i64;
    match r {
        Exponent::Infinity => Ok(T::zero()),
        Exponent::Finite(r) => {
            let half_d = int::<T>(d) / int(2);
            if *r < half_d {
                return Err(LandauError::InvalidExponent(format!(
                    "r = {r:?} below d/2"
                )));
            }
            let brk = int::<T>(d + 1) / int(2);
            if *r <= brk {
                Ok(int::<T>(d) / (int::<T>(2) * r.clone()) - T::one())
            } else {
                Ok(T::zero() - T::one() / (int::<T>(2) * r.clone()))
            }
        }
    }
}

/// rho(q): 1/q - 1/2 on [2, 2(d+1)/(d-1)], (d-2)/2 - d/q beyond, (d-2)/2 at q = infinity.
pub fn rho_exponent<T: ExponentScalar>(d: u32, q: &Exponent<T>) -> Result<T> {
    check_dim(d)?;
    let d = d as i64;
    match q {
        Exponent::Infinity => Ok(int::<T>(d - 2) / int(2)),
        Exponent::Finite(q) => {
            if *q < int::<T>(2) {
                return Err(LandauError::InvalidExponent(format!("q = {q:?} below 2")));
            }
            let brk = int::<T>(2 * (d + 1)) / int(d - 1);
            if *q <= brk {
                Ok(T::one() / q.clone() - T::one() / int(2))
            } else {
                Ok(int::<T>(d - 2) / int(2) - int::<T>(d) / q.clone())
            }
        }
    }
}

/// q = 2r' = 2r/(r-1); r = 1 maps to infinity and r = infinity to 2.
pub fn dual_exponent<T: ExponentScalar>(r: &Exponent<T>) -> Result<Exponent<T>> {
    match r {
        Exponent::Infinity => Ok(Exponent::Finite(int(2))),
        Exponent::Finite(r) => {
            if *r < T::one() {
                return Err(LandauError::InvalidExponent(format!("r = {r:?} below 1")));
            }
            if *r == T::one() {
                return Ok(Exponent::Infinity);
            }
            Ok(Exponent::Finite(
                int::<T>(2) * r.clone() / (r.clone() - T::one()),
            ))
        }
    }
}

/// Float convenience wrappers; `f64::INFINITY` is the symbolic endpoint.
pub fn nu(d: u32, r: f64) -> Result<f64> {
    nu_exponent(d, &Exponent::from_f64(r))
}

pub fn rho(d: u32, q: f64) -> Result<f64> {
    rho_exponent(d, &Exponent::from_f64(q))
}

/// Dimension plus an (r, q) pair, checked for duality when both are present.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentTable<T> {
    pub d: u32,
    pub r: Option<Exponent<T>>,
    pub q: Option<Exponent<T>>,
}

impl<T: ExponentScalar> ExponentTable<T> {
    pub fn new(d: u32, r: Option<Exponent<T>>, q: Option<Exponent<T>>) -> Result<Self> {
        check_dim(d)?;
        if let Some(r) = &r {
            nu_exponent(d, r)?;
        }
        if let Some(q) = &q {
            rho_exponent(d, q)?;
        }
        if let (Some(r), Some(q)) = (&r, &q) {
            if dual_exponent(r)? != *q {
                return Err(LandauError::InvalidExponent(format!(
                    "q = {q:?} is not 2r/(r-1) for r = {r:?}"
                )));
            }
        }
        Ok(Self { d, r, q })
    }

    /// Builds the table from r alone, filling q = 2r'.
    pub fn from_r(d: u32, r: Exponent<T>) -> Result<Self> {
        let q = dual_exponent(&r)?;
        Self::new(d, Some(r), Some(q))
    }

    pub fn nu(&self) -> Option<Result<T>> {
        self.r.as_ref().map(|r| nu_exponent(self.d, r))
    }

    pub fn rho(&self) -> Option<Result<T>> {
        self.q.as_ref().map(|q| rho_exponent(self.d, q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Exponent<Ratio<i64>> {
        Exponent::Finite(Ratio::new(n, d))
    }

    #[test]
    fn nu_values_exact() {
        assert_eq!(nu_exponent(2, &rat(1, 1)).unwrap(), Ratio::from_integer(0));
        assert_eq!(nu_exponent(2, &rat(3, 2)).unwrap(), Ratio::new(-1, 3));
        assert_eq!(
            nu_exponent::<Ratio<i64>>(2, &Exponent::Infinity).unwrap(),
            Ratio::from_integer(0)
        );
        assert!(nu_exponent(2, &rat(1, 2)).is_err());
    }

    #[test]
    fn rho_values_exact() {
        assert_eq!(rho_exponent(2, &rat(2, 1)).unwrap(), Ratio::from_integer(0));
        assert_eq!(rho_exponent(2, &rat(6, 1)).unwrap(), Ratio::new(-1, 3));
        assert_eq!(rho_exponent(3, &rat(4, 1)).unwrap(), Ratio::new(-1, 4));
        assert!(rho_exponent(2, &rat(3, 2)).is_err());
    }

    #[test]
    fn duality_exact_on_listed_exponents() {
        for (n, d) in [(1, 1), (6, 5), (3, 2), (2, 1), (4, 1), (10, 1)] {
            let r = rat(n, d);
            let q = dual_exponent(&r).unwrap();
            assert_eq!(nu_exponent(2, &r).unwrap(), rho_exponent(2, &q).unwrap());
        }
    }

    #[test]
    fn breakpoints_continuous() {
        for d in 2..9i64 {
            let b = Ratio::new(d + 1, 2);
            let left = Ratio::from_integer(d) / (Ratio::from_integer(2) * b) - 1;
            let right = -Ratio::new(1, 1) / (Ratio::from_integer(2) * b);
            assert_eq!(left, right);
            let bq = Ratio::new(2 * (d + 1), d - 1);
            let left = Ratio::from_integer(1) / bq - Ratio::new(1, 2);
            let right = Ratio::new(d - 2, 2) - Ratio::from_integer(d) / bq;
            assert_eq!(left, right);
            // minimum of rho is -1/(d+1), attained at the breakpoint
            assert_eq!(left, Ratio::new(-1, d + 1));
        }
    }

    #[test]
    fn table_rejects_non_dual_pair() {
        assert!(ExponentTable::new(2, Some(rat(3, 2)), Some(rat(4, 1))).is_err());
        let t = ExponentTable::from_r(2, rat(3, 2)).unwrap();
        assert_eq!(t.q, Some(rat(6, 1)));
        assert_eq!(t.nu().unwrap().unwrap(), t.rho().unwrap().unwrap());
    }

    #[test]
    fn float_wrappers_match_exact() {
        assert!((nu(2, 1.5).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(nu(2, f64::INFINITY).unwrap(), 0.0);
        assert_eq!(rho(2, f64::INFINITY).unwrap(), 0.0);
        assert_eq!(rho(3, f64::INFINITY).unwrap(), 0.5);
    }
}
