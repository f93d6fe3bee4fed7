//! Modified Bessel functions of the first kind, orders 0 and 1.
//!
//! Power series up to [`SERIES_LIMIT`], Hankel's asymptotic expansion above.
//! Arguments are restricted to `[0, ARG_MAX]` so that `e^z` stays well inside
//! double precision.

use serde::Serialize;

use crate::{Error, Result};

/// Largest accepted argument.
pub const ARG_MAX: f64 = 500.0;

/// Switch-over point between the power series and the asymptotic expansion.
pub const SERIES_LIMIT: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BesselOrder {
    Zero,
    One,
}

/// A checked evaluation of `I₀` or `I₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesselEval {
    pub argument: f64,
    pub order: BesselOrder,
    pub value: f64,
}

impl BesselEval {
    pub fn new(order: BesselOrder, argument: f64) -> Result<Self> {
        let value = match order {
            BesselOrder::Zero => bessel_i0(argument)?,
            BesselOrder::One => bessel_i1(argument)?,
        };
        Ok(Self { argument, order, value })
    }
}

fn check(z: f64) -> Result<()> {
    if z.is_nan() || !(0.0..=ARG_MAX).contains(&z) {
        return Err(Error::Domain(format!(
            "Bessel argument {z} outside [0, {ARG_MAX}]"
        )));
    }
    Ok(())
}

/// `I₀(z)`.
pub fn bessel_i0(z: f64) -> Result<f64> {
    check(z)?;
    if z <= SERIES_LIMIT {
        Ok(series_i0(z))
    } else {
        Ok(asymptotic(0.0, z))
    }
}

/// `I₁(z)`.
pub fn bessel_i1(z: f64) -> Result<f64> {
    check(z)?;
    if z <= SERIES_LIMIT {
        Ok(0.5 * z * series_i1_core(z))
    } else {
        Ok(asymptotic(1.0, z))
    }
}

/// `I₁(z) / z`, continued by its limit `1/2` at the origin.
///
/// Every explicit kernel in this crate is written in terms of this entire
/// function so that the `√((x+ξ)/(x-ξ))` factors never appear.
pub fn bessel_i1_over_z(z: f64) -> Result<f64> {
    check(z)?;
    if z <= SERIES_LIMIT {
        Ok(0.5 * series_i1_core(z))
    } else {
        Ok(asymptotic(1.0, z) / z)
    }
}

fn series_i0(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term < 1e-16 * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// `Σ (z/2)^{2k} / (k! (k+1)!)`, so that `I₁(z) = (z/2)·core`.
fn series_i1_core(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + 1.0));
        sum += term;
        if term < 1e-16 * sum {
            return sum;
        }
        k += 1.0;
    }
}

fn asymptotic(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut k = 1.0;
    loop {
        let odd = 2.0 * k - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * k * z);
        if next.abs() >= term.abs() || next.abs() < 1e-17 * sum.abs() {
            break;
        }
        term = next;
        sum += term;
        k += 1.0;
    }
    z.exp() / (2.0 * std::f64::consts::PI * z).sqrt() * sum
}
