//! Scalar reference computations: Hölder functions, Taylor polynomials, the
//! piecewise Taylor surrogate and the grid-size rule.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::multi_index::{degree, factorial, monomial, multi_factorial, multi_indices};
use crate::partition::PartitionPair;
use crate::sampling::Sampler;

/// `(α, x) -> D^α f(x)`; `α = 0` gives `f` itself.
pub type Derivative = dyn Fn(&[usize], &[f64]) -> f64 + Send + Sync;

/// A function in the Hölder ball of smoothness `r` and radius `R` on
/// `[-1, 1]^d`, given through its partial derivatives up to order `⌊r⌋`.
#[derive(Clone)]
pub struct HolderFunction {
    name: String,
    d: usize,
    r: f64,
    radius: f64,
    deriv: Arc<Derivative>,
}

impl fmt::Debug for HolderFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HolderFunction")
            .field("name", &self.name)
            .field("d", &self.d)
            .field("r", &self.r)
            .field("radius", &self.radius)
            .finish_non_exhaustive()
    }
}

impl HolderFunction {
    pub fn new(
        name: impl Into<String>,
        d: usize,
        r: f64,
        radius: f64,
        deriv: impl Fn(&[usize], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if d == 0 {
            return Err(invalid("d", "must be positive"));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(invalid("r", format!("must be positive, got {r}")));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid("R", format!("must be positive, got {radius}")));
        }
        Ok(HolderFunction {
            name: name.into(),
            d,
            r,
            radius,
            deriv: Arc::new(deriv),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn floor_r(&self) -> usize {
        self.r.floor() as usize
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid("R", format!("must be positive, got {radius}")));
        }
        self.radius = radius;
        Ok(self)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.deriv)(&vec![0; self.d], x)
    }

    pub fn deriv(&self, alpha: &[usize], x: &[f64]) -> f64 {
        (self.deriv)(alpha, x)
    }

    /// `g(u) = f(λ u)`, with `D^α g(u) = λ^|α| D^α f(λ u)` and radius
    /// `R max(1, λ^r)`.
    pub fn rescaled(&self, lambda: f64) -> Result<HolderFunction> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(invalid("scale", format!("must be positive, got {lambda}")));
        }
        let inner = Arc::clone(&self.deriv);
        HolderFunction::new(
            self.name.clone(),
            self.d,
            self.r,
            self.radius * lambda.powf(self.r).max(1.0),
            move |alpha: &[usize], u: &[f64]| {
                let x: Vec<f64> = u.iter().map(|v| v * lambda).collect();
                lambda.powi(degree(alpha) as i32) * inner(alpha, &x)
            },
        )
    }

    /// Largest `|D^α f|` over `|α| <= ⌊r⌋` on a regular grid of `[-1, 1]^d`
    /// with about `budget` nodes.
    pub fn sampled_derivative_bound(&self, budget: usize) -> f64 {
        let per_axis = ((budget as f64).powf(1.0 / self.d as f64).floor() as usize).max(2);
        let alphas = multi_indices(self.d, self.floor_r());
        let total = per_axis.pow(self.d as u32);
        let mut best: f64 = 0.0;
        let mut x = vec![0.0; self.d];
        for n in 0..total {
            let mut rest = n;
            for v in x.iter_mut() {
                *v = -1.0 + 2.0 * (rest % per_axis) as f64 / (per_axis - 1) as f64;
                rest /= per_axis;
            }
            for a in &alphas {
                best = best.max(self.deriv(a, &x).abs());
            }
        }
        best
    }

    /// Rejects a declared radius below the sampled derivative bound.
    pub fn check_radius(&self) -> Result<f64> {
        let measured = self.sampled_derivative_bound(4096);
        if measured > self.radius * (1.0 + 1e-12) {
            return Err(Error::RadiusTooSmall {
                declared: self.radius,
                measured,
            });
        }
        Ok(measured)
    }
}

/// `Σ_{|α| <= ⌊r⌋} D^α f(x0) (x - x0)^α / α!`
pub fn taylor_poly(f: &HolderFunction, x0: &[f64], x: &[f64]) -> f64 {
    let h: Vec<f64> = x.iter().zip(x0).map(|(a, b)| a - b).collect();
    multi_indices(f.d(), f.floor_r())
        .iter()
        .map(|a| f.deriv(a, x0) * monomial(a, &h) / multi_factorial(a))
        .sum()
}

/// Remainder constant `c = 2 d^⌊r⌋ / ⌊r⌋!` in
/// `|f(x) - T_{x0} f(x)| <= c R |x - x0|^r`.
pub fn taylor_constant(r: f64, d: usize) -> f64 {
    let n = r.floor() as usize;
    2.0 * (d as f64).powi(n as i32) / factorial(n)
}

/// Largest `|f(x) - T_{x0} f(x)| / (R |x - x0|^r)` over `pairs` random pairs
/// of `[-1, 1]^d`. Pairs closer than `1e-6` are skipped.
pub fn measure_taylor_constant(f: &HolderFunction, pairs: usize, seed: u64) -> f64 {
    let mut rng = Sampler::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let x0 = rng.point(f.d(), -1.0, 1.0);
        let x = rng.point(f.d(), -1.0, 1.0);
        let dist = x
            .iter()
            .zip(&x0)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        if dist < 1e-6 {
            continue;
        }
        let err = (f.value(&x) - taylor_poly(f, &x0, &x)).abs();
        worst = worst.max(err / (f.radius() * dist.powf(f.r())));
    }
    worst
}

/// Checks `c` against [`measure_taylor_constant`] and returns the measurement.
pub fn validate_taylor_constant(
    f: &HolderFunction,
    c: f64,
    pairs: usize,
    seed: u64,
) -> Result<f64> {
    let measured = measure_taylor_constant(f, pairs, seed);
    if measured > c {
        return Err(Error::TaylorConstant {
            declared: c,
            measured,
        });
    }
    Ok(measured)
}

/// Smallest integer strictly above `(c R d^(r/2) / eps)^(1/(2r))`, at least 2.
pub fn choose_m(eps: f64, r: f64, radius: f64, d: usize, c: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", format!("must lie in (0, 1), got {eps}")));
    }
    if !(r > 0.0 && radius > 0.0 && c > 0.0) || d == 0 {
        return Err(invalid("r, R, c, d", "must be positive"));
    }
    let bound = (c * radius * (d as f64).powf(r / 2.0) / eps).powf(1.0 / (2.0 * r));
    Ok(((bound.floor() as usize) + 1).max(2))
}

/// `c R (2 sqrt(d) / M^2)^r`
pub fn piecewise_error_bound(m: usize, r: f64, radius: f64, c: f64, d: usize) -> f64 {
    c * radius * (2.0 * (d as f64).sqrt() / (m * m) as f64).powf(r)
}

/// The piecewise Taylor surrogate, evaluated through the same selector
/// recursion the network uses: the coarse corner `φ1 = Σ_j B_j 1_{B_j}(x)`,
/// corner derivatives `φ(α,i) = D^α f(φ1 + v_i)`, the fine corner
/// `ψ1 = Σ_i 1_{A_i}(x) (φ1 + v_i)` and `ψ(α) = Σ_i 1_{A_i}(x) φ(α,i)`,
/// combined as `Σ_α ψ(α) (x - ψ1)^α / α!`.
pub fn psi_reference(f: &HolderFunction, pp: &PartitionPair, x: &[f64]) -> Result<f64> {
    if f.d() != pp.d() {
        return Err(Error::DimensionMismatch {
            expected: pp.d(),
            actual: f.d(),
        });
    }
    let d = pp.d();
    let side = pp.coarse_side();
    let fine = pp.fine_side();
    let cubes = pp.coarse_cubes();
    let mut phi1 = vec![0.0; d];
    let mut hits = 0;
    for c in &cubes {
        if c.contains(x) {
            hits += 1;
            for (p, l) in phi1.iter_mut().zip(&c.lower) {
                *p += l;
            }
        }
    }
    if hits != 1 {
        return Err(Error::OutOfDomain { point: x.to_vec() });
    }
    let alphas = multi_indices(d, f.floor_r());
    let mut psi1 = vec![0.0; d];
    let mut psi_alpha = vec![0.0; alphas.len()];
    for (i, v) in pp.offsets().iter().enumerate() {
        let digits = pp.digits(i);
        let corner: Vec<f64> = phi1.iter().zip(v).map(|(p, o)| p + o).collect();
        // A_i: the i-th fine cube of the coarse cube holding x; the top face
        // of the last fine cube is the coarse face
        let inside = (0..d).all(|k| {
            let upper = if digits[k] + 1 == pp.m() {
                phi1[k] + side
            } else {
                corner[k] + fine
            };
            corner[k] <= x[k] && x[k] < upper
        });
        if inside {
            for (p, c) in psi1.iter_mut().zip(&corner) {
                *p += c;
            }
            for (acc, a) in psi_alpha.iter_mut().zip(&alphas) {
                *acc += f.deriv(a, &corner);
            }
        }
    }
    let h: Vec<f64> = x.iter().zip(&psi1).map(|(a, b)| a - b).collect();
    Ok(alphas
        .iter()
        .zip(&psi_alpha)
        .map(|(a, v)| v * monomial(a, &h) / multi_factorial(a))
        .sum())
}
