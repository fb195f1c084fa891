//! Built-in test functions with analytic derivatives.
//!
//! | name         | f(x)                  |
//! |--------------|-----------------------|
//! | `const`      | 1                     |
//! | `linear`     | Σ x_k                 |
//! | `quadratic`  | Σ x_k^2               |
//! | `sin_sum`    | sin(Σ x_k)            |
//! | `exp_neg_sq` | Π exp(-x_k^2)         |
//!
//! The default radius bounds every derivative of order at most `⌊r⌋` on
//! `[-e, e]^d`, where `e` is the requested extent.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::multi_index::{degree, multi_indices};
use crate::taylor::HolderFunction;

pub const NAMES: [&str; 5] = ["const", "linear", "quadratic", "sin_sum", "exp_neg_sq"];

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `d^n/dx^n exp(-x^2) = (-1)^n H_n(x) exp(-x^2)`
fn gauss_deriv(n: usize, x: f64) -> f64 {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * hermite(n, x) * (-x * x).exp()
}

fn gauss_sup(n: usize, extent: f64) -> f64 {
    const STEPS: usize = 20_000;
    (0..=STEPS)
        .map(|i| gauss_deriv(n, -extent + 2.0 * extent * i as f64 / STEPS as f64).abs())
        .fold(0.0, f64::max)
}

/// Registry function with its default radius on `[-1, 1]^d`.
pub fn builtin(name: &str, d: usize, r: f64) -> Result<HolderFunction> {
    builtin_on(name, d, r, 1.0)
}

/// Registry function with its default radius on `[-extent, extent]^d`.
pub fn builtin_on(name: &str, d: usize, r: f64, extent: f64) -> Result<HolderFunction> {
    let n = r.floor() as usize;
    let df = d as f64;
    match name {
        "const" => HolderFunction::new(
            name,
            d,
            r,
            1.0,
            |a: &[usize], _: &[f64]| {
                if degree(a) == 0 {
                    1.0
                } else {
                    0.0
                }
            },
        ),
        "linear" => HolderFunction::new(
            name,
            d,
            r,
            (df * extent).max(1.0),
            |a: &[usize], x: &[f64]| match degree(a) {
                0 => x.iter().sum(),
                1 => 1.0,
                _ => 0.0,
            },
        ),
        "quadratic" => {
            let mut radius = (df * extent * extent).max(2.0 * extent);
            if n >= 2 {
                radius = radius.max(2.0);
            }
            HolderFunction::new(name, d, r, radius, |a: &[usize], x: &[f64]| {
                match degree(a) {
                    0 => x.iter().map(|v| v * v).sum(),
                    1 => {
                        let k = a.iter().position(|&v| v == 1).expect("degree one");
                        2.0 * x[k]
                    }
                    2 if a.contains(&2) => 2.0,
                    _ => 0.0,
                }
            })
        }
        "sin_sum" => HolderFunction::new(name, d, r, 1.0, |a: &[usize], x: &[f64]| {
            (x.iter().sum::<f64>() + degree(a) as f64 * FRAC_PI_2).sin()
        }),
        "exp_neg_sq" => {
            let sups: Vec<f64> = (0..=n).map(|k| gauss_sup(k, extent)).collect();
            let radius = multi_indices(d, n)
                .iter()
                .map(|a| a.iter().map(|&k| sups[k]).product::<f64>())
                .fold(0.0, f64::max)
                * (1.0 + 1e-6);
            HolderFunction::new(name, d, r, radius, |a: &[usize], x: &[f64]| {
                a.iter().zip(x).map(|(&k, &v)| gauss_deriv(k, v)).product()
            })
        }
        _ => Err(Error::UnknownFunction(name.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(0, 0.7), 1.0);
        assert_eq!(hermite(2, 1.0), 2.0);
        assert_eq!(hermite(3, 1.0), -4.0);
    }

    #[test]
    fn default_radii() {
        assert_eq!(builtin("quadratic", 1, 3.0).unwrap().radius(), 2.0);
        assert_eq!(builtin("sin_sum", 2, 2.0).unwrap().radius(), 1.0);
        let e = builtin("exp_neg_sq", 1, 3.0).unwrap();
        assert!((e.radius() - 3.90357).abs() < 1e-3, "{}", e.radius());
        for name in NAMES {
            for d in 1..=2 {
                for r in [2.0, 3.0] {
                    builtin(name, d, r).unwrap().check_radius().unwrap();
                }
            }
        }
        assert!(builtin("nope", 1, 2.0).is_err());
    }

    #[test]
    fn gaussian_derivatives_match_finite_differences() {
        let f = builtin("exp_neg_sq", 2, 3.0).unwrap();
        let x = [0.3, -0.6];
        let h = 1e-5;
        for a in multi_indices(2, 2) {
            let mut b = a.clone();
            b[0] += 1;
            let fd = (f.deriv(&a, &[x[0] + h, x[1]]) - f.deriv(&a, &[x[0] - h, x[1]])) / (2.0 * h);
            assert!((fd - f.deriv(&b, &x)).abs() < 1e-8);
        }
    }
}
