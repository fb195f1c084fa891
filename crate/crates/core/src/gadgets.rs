//! Small exact building blocks: products, monomials, polynomials, indicators,
//! the bump profile and the square root iteration.

use crate::calculus::{
    concatenate, identity_net, linear_net, parallelize, parallelize_all, projection, sync_depth,
};
use crate::error::{invalid, Result};
use crate::multi_index::{binomial, degree, multi_indices};
use crate::network::{Layer, Network};
use crate::sparse::SparseMatrix;

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(invalid(
            name,
            format!("must be positive and finite, got {v}"),
        ));
    }
    Ok(())
}

/// `(x, y) -> x y`, exact for all reals, one hidden layer of four neurons:
/// `(requ(x+y) + requ(-x-y) - requ(-x+y) - requ(x-y)) / 4`.
pub fn product2() -> Network {
    product_tree(2, &[0, 1]).expect("two factors always form a product tree")
}

/// `x -> x_1 ... x_d`, exact for all reals.
///
/// The factors are padded with ones to the next power of two and multiplied
/// pairwise, giving `ceil(log2 d)` hidden layers of width at most `4 ceil(d/2)`.
pub fn product_d(d: usize) -> Result<Network> {
    if d == 0 {
        return Err(invalid("d", "must be positive"));
    }
    product_tree(d, &(0..d).collect::<Vec<_>>())
}

/// Product of the listed input coordinates via a binary tree of [`product2`]
/// blocks. Missing leaves are the constant one, which costs no input.
pub(crate) fn product_tree(input_dim: usize, factors: &[usize]) -> Result<Network> {
    if factors.is_empty() {
        return Err(invalid("factors", "need at least one factor"));
    }
    let mut net = projection(input_dim, factors)?;
    // true: a value produced by the previous level, false: the constant one
    let mut slots = vec![true; factors.len()];
    slots.resize(factors.len().next_power_of_two(), false);
    while slots.len() > 1 {
        let n_in = slots.iter().filter(|v| **v).count();
        let mut hidden = Vec::new();
        let mut hidden_bias = Vec::new();
        let mut out = Vec::new();
        let mut next = Vec::with_capacity(slots.len() / 2);
        let mut vi = 0;
        let mut neuron = 0;
        for pair in slots.chunks(2) {
            // each of the four neurons is requ(p·x + q·y + bias)
            let (x, y, bias): (Option<usize>, Option<usize>, f64) = match (pair[0], pair[1]) {
                (true, true) => {
                    vi += 2;
                    (Some(vi - 2), Some(vi - 1), 0.0)
                }
                (true, false) | (false, true) => {
                    vi += 1;
                    (Some(vi - 1), None, 1.0)
                }
                (false, false) => {
                    next.push(false);
                    continue;
                }
            };
            let row = next.len();
            for (k, (p, q)) in [(1.0, 1.0), (-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0)]
                .into_iter()
                .enumerate()
            {
                let n = neuron + k;
                if let Some(x) = x {
                    hidden.push((n, x, p));
                }
                match y {
                    Some(y) => {
                        hidden.push((n, y, q));
                        hidden_bias.push(0.0);
                    }
                    None => hidden_bias.push(q * bias),
                }
                out.push((row, n, if k < 2 { 0.25 } else { -0.25 }));
            }
            neuron += 4;
            next.push(true);
        }
        let n_out = next.iter().filter(|v| **v).count();
        let level = Network::new(
            n_in,
            vec![
                Layer::new(
                    SparseMatrix::from_triplets(neuron, n_in, hidden)?,
                    hidden_bias,
                )?,
                Layer::new(
                    SparseMatrix::from_triplets(n_out, neuron, out)?,
                    vec![0.0; n_out],
                )?,
            ],
        )?;
        net = concatenate(&level, &net)?;
        slots = next;
    }
    Ok(net)
}

/// `x_k^(2^j)` with `j >= 1` hidden layers: the first forms
/// `requ(x) + requ(-x)`, every further one squares a non-negative value.
fn power_chain(input_dim: usize, k: usize, j: usize) -> Result<Network> {
    debug_assert!(j >= 1);
    let mut layers = vec![Layer::new(
        SparseMatrix::from_triplets(2, input_dim, vec![(0, k, 1.0), (1, k, -1.0)])?,
        vec![0.0, 0.0],
    )?];
    let mut width = 2;
    for _ in 1..j {
        let w = SparseMatrix::from_triplets(1, width, (0..width).map(|c| (0, c, 1.0)).collect())?;
        layers.push(Layer::new(w, vec![0.0])?);
        width = 1;
    }
    let w = SparseMatrix::from_triplets(1, width, (0..width).map(|c| (0, c, 1.0)).collect())?;
    layers.push(Layer::new(w, vec![0.0])?);
    Network::new(input_dim, layers)
}

/// `(x, y) -> y x^r` on `[-s, s]^(d+1)`, with `d = exponents.len()`.
///
/// Powers `x_k^(2^j)` for the binary digits of `r_k` come from squaring chains,
/// then all factors are multiplied by a [`product_tree`]. An all-zero exponent
/// returns `y` through one identity block.
pub fn monomial_net(exponents: &[usize], s: f64) -> Result<Network> {
    let d = exponents.len();
    if d == 0 {
        return Err(invalid("exponents", "must be non-empty"));
    }
    check_positive("s", s)?;
    let input_dim = d + 1;
    let y = projection(input_dim, &[d])?;
    if exponents.iter().all(|&r| r == 0) {
        return concatenate(&identity_net(s)?, &y);
    }
    let depth = exponents
        .iter()
        .filter(|&&r| r > 0)
        .map(|&r| r.ilog2() as usize)
        .max()
        .unwrap_or(0);
    let mut factors = vec![sync_depth(&y, depth, s)?];
    for (k, &r) in exponents.iter().enumerate() {
        for j in 0..usize::BITS as usize {
            if (r >> j) & 1 == 0 {
                continue;
            }
            let chain = if j == 0 {
                projection(input_dim, &[k])?
            } else {
                power_chain(input_dim, k, j)?
            };
            factors.push(sync_depth(&chain, depth, s.powi(1 << j))?);
        }
    }
    let powers = parallelize_all(&factors)?;
    let tree = product_tree(factors.len(), &(0..factors.len()).collect::<Vec<_>>())?;
    concatenate(&tree, &powers)
}

/// `(x, y) -> Σ_i weights[i] y_i x^(α_i)` where `α_i` runs over the
/// multi-indices of degree at most `n` in graded order.
///
/// Inputs are `d` coordinates followed by one gate per multi-index, all in
/// `[-s, s]`. Monomials with weight zero are left out.
pub fn polynomial_net(d: usize, n: usize, weights: &[f64], s: f64) -> Result<Network> {
    if d == 0 {
        return Err(invalid("d", "must be positive"));
    }
    check_positive("s", s)?;
    let count = binomial(d + n, d);
    if weights.len() != count {
        return Err(invalid(
            "weights",
            format!("expected {count} weights, got {}", weights.len()),
        ));
    }
    let input_dim = d + count;
    let mut parts = Vec::new();
    let mut bounds = Vec::new();
    let mut coeffs = Vec::new();
    for (i, alpha) in multi_indices(d, n).into_iter().enumerate() {
        if weights[i] == 0.0 {
            continue;
        }
        let mut pick: Vec<usize> = (0..d).collect();
        pick.push(d + i);
        parts.push(concatenate(
            &monomial_net(&alpha, s)?,
            &projection(input_dim, &pick)?,
        )?);
        bounds.push(s.powi(degree(&alpha) as i32 + 1));
        coeffs.push(weights[i]);
    }
    if parts.is_empty() {
        return linear_net(input_dim, &[vec![]], vec![0.0]);
    }
    let depth = parts.iter().map(Network::hidden_layers).max().unwrap_or(0);
    let synced = parts
        .iter()
        .zip(&bounds)
        .map(|(p, &b)| sync_depth(p, depth, b))
        .collect::<Result<Vec<_>>>()?;
    let all = parallelize_all(&synced)?;
    let sum = linear_net(
        all.output_dim(),
        &[coeffs.iter().copied().enumerate().collect()],
        vec![0.0],
    )?;
    concatenate(&sum, &all)
}

/// Two hidden layers computing
/// `requ(1 - s^2 Σ_k (requ(-x_k + a_k + 1/s) + requ(x_k - b_k + 1/s)))`
/// where `a_k = lo_k (+ input[corner_k])` and `b_k = hi_k (+ input[corner_k])`.
///
/// With `corner = None` the box is fixed; otherwise its lower corner is read
/// from the input, which is how the approximator looks up fine cubes.
pub(crate) fn box_indicator(
    input_dim: usize,
    x_idx: &[usize],
    corner: Option<&[usize]>,
    lo: &[f64],
    hi: &[f64],
    s: f64,
) -> Result<Network> {
    let d = x_idx.len();
    let inv = 1.0 / s;
    let mut first = Vec::with_capacity(4 * d);
    let mut bias = Vec::with_capacity(2 * d);
    for k in 0..d {
        first.push((2 * k, x_idx[k], -1.0));
        first.push((2 * k + 1, x_idx[k], 1.0));
        if let Some(c) = corner {
            first.push((2 * k, c[k], 1.0));
            first.push((2 * k + 1, c[k], -1.0));
        }
        bias.push(lo[k] + inv);
        bias.push(-hi[k] + inv);
    }
    let s2 = s * s;
    Network::new(
        input_dim,
        vec![
            Layer::new(SparseMatrix::from_triplets(2 * d, input_dim, first)?, bias)?,
            Layer::new(
                SparseMatrix::from_triplets(1, 2 * d, (0..2 * d).map(|c| (0, c, -s2)).collect())?,
                vec![1.0],
            )?,
            Layer::new(SparseMatrix::identity(1), vec![0.0])?,
        ],
    )
}

fn check_box(a: &[f64], b: &[f64], s: f64) -> Result<()> {
    if a.is_empty() || a.len() != b.len() {
        return Err(invalid(
            "a, b",
            format!(
                "corners must be non-empty and of equal length ({} vs {})",
                a.len(),
                b.len()
            ),
        ));
    }
    check_positive("s", s)?;
    for (k, (&lo, &hi)) in a.iter().zip(b).enumerate() {
        if !(lo.is_finite() && hi.is_finite()) || hi - lo < 2.0 / s {
            return Err(invalid(
                "a, b",
                format!("side {k} is [{lo}, {hi}), needs b - a >= 2/s = {}", 2.0 / s),
            ));
        }
    }
    Ok(())
}

/// Indicator of the box `[a, b)`, exact for `x` outside the strips
/// `[a_k, a_k + 1/s)` and `(b_k - 1/s, b_k)`, and in `[0, 1]` everywhere.
pub fn indicator_net(a: &[f64], b: &[f64], s: f64) -> Result<Network> {
    check_box(a, b, s)?;
    let d = a.len();
    box_indicator(d, &(0..d).collect::<Vec<_>>(), None, a, b, s)
}

/// `(x, y) -> y 1_[a,b)(x)` for `|y| <= s`: the indicator multiplied with `y`
/// carried through two identity blocks. Hidden widths are `2d + 2, 3, 4`.
pub fn gated_value_net(a: &[f64], b: &[f64], s: f64) -> Result<Network> {
    check_box(a, b, s)?;
    let d = a.len();
    let ind = box_indicator(d + 1, &(0..d).collect::<Vec<_>>(), None, a, b, s)?;
    let y = sync_depth(&projection(d + 1, &[d])?, 2, s)?;
    concatenate(&product2(), &parallelize(&y, &ind)?)
}

/// The bump profile `G(t) = 2ρ(t) - 4ρ(t - 1/2) + 4ρ(t - 3/2) - 2ρ(t - 2)`
/// with `ρ = requ`. It is supported on `[0, 2]`, peaks with `G(1) = 1`, and
/// `G(t) + G(t - 1) = 1` for `t` in `[1, 2]`.
pub fn bump_profile(t: f64) -> f64 {
    use crate::network::requ;
    2.0 * requ(t) - 4.0 * requ(t - 0.5) + 4.0 * requ(t - 1.5) - 2.0 * requ(t - 2.0)
}

/// One hidden layer of four neurons realizing [`bump_profile`].
pub fn bump_profile_net() -> Network {
    Network::new(
        1,
        vec![
            Layer::from_dense(
                &[vec![1.0], vec![1.0], vec![1.0], vec![1.0]],
                vec![0.0, -0.5, -1.5, -2.0],
                1,
            )
            .expect("fixed shape"),
            Layer::from_dense(&[vec![2.0, -4.0, 4.0, -2.0]], vec![0.0], 4).expect("fixed shape"),
        ],
    )
    .expect("fixed shape")
}

/// Iteration count `ceil(log2(t (ln(1/2) + 3 ln(1/eps)) / eps^2))`, at least 1.
pub fn sqrt_iterations(t: f64, eps: f64) -> Result<usize> {
    check_sqrt_params(t, eps)?;
    let arg = t * (0.5f64.ln() + 3.0 * (1.0 / eps).ln()) / (eps * eps);
    Ok(arg.log2().ceil().max(1.0) as usize)
}

fn check_sqrt_params(t: f64, eps: f64) -> Result<()> {
    if !(t.is_finite() && t >= 1.0) {
        return Err(invalid("t", format!("must be at least 1, got {t}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", format!("must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Square root on `[0, t]` to accuracy `eps`, using [`sqrt_iterations`] steps.
pub fn sqrt_net(t: f64, eps: f64) -> Result<Network> {
    sqrt_net_with_iterations(t, eps, sqrt_iterations(t, eps)?)
}

/// The coupled iteration
/// `s' = s (1 - c/(2t))`, `c' = c^2 (c - 3t) / (4t^2)`
/// started from `s = (x + eps^2)/sqrt(t)`, `c = x + eps^2 - t`, so that
/// `t s^2 = (x + eps^2)(t + c)` throughout and `s -> sqrt(x + eps^2)`.
///
/// Each step costs two hidden layers; the final one only updates `s`, for
/// `2n - 1` hidden layers in total.
pub fn sqrt_net_with_iterations(t: f64, eps: f64, n: usize) -> Result<Network> {
    check_sqrt_params(t, eps)?;
    if n == 0 {
        return Err(invalid("n", "need at least one iteration"));
    }
    let rt = t.sqrt();
    let e2 = eps * eps;
    let init = linear_net(
        1,
        &[vec![(0, 1.0 / rt)], vec![(0, 1.0)]],
        vec![e2 / rt, e2 - t],
    )?;

    // (s, c) -> s (1 - c/(2t))
    let s_step = concatenate(
        &product2(),
        &linear_net(
            2,
            &[vec![(0, 1.0)], vec![(1, -1.0 / (2.0 * t))]],
            vec![0.0, 1.0],
        )?,
    )?;
    // (s, c) -> (c^2, c), then c^2 (c - 3t)/(4t^2)
    let square = Network::new(
        2,
        vec![
            Layer::from_dense(&[vec![0.0, 1.0], vec![0.0, -1.0]], vec![0.0, 0.0], 2)?,
            Layer::from_dense(&[vec![1.0, 1.0]], vec![0.0], 2)?,
        ],
    )?;
    let carry_c = concatenate(&identity_net(t)?, &projection(2, &[1])?)?;
    let c_step = concatenate(
        &product2(),
        &linear_net(
            2,
            &[vec![(0, 1.0)], vec![(1, 1.0 / (4.0 * t * t))]],
            vec![0.0, -3.0 / (4.0 * t)],
        )?,
    )?;
    let c_step = concatenate(&c_step, &parallelize(&square, &carry_c)?)?;
    let step = parallelize(&sync_depth(&s_step, 2, rt + 2.0)?, &c_step)?;

    let mut net = init;
    for _ in 1..n {
        net = concatenate(&step, &net)?;
    }
    concatenate(&s_step, &net)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product2_examples() {
        let p = product2();
        assert_eq!(p.realize(&[3.0, -2.0]).unwrap(), vec![-6.0]);
        assert_eq!(p.realize(&[0.0, 5.0]).unwrap(), vec![0.0]);
        let c = p.complexity();
        assert_eq!((c.hidden_layers, c.max_width), (1, 4));
    }

    #[test]
    fn product_d_examples() {
        let p = product_d(3).unwrap();
        assert!((p.realize(&[1.0, 2.0, 3.0]).unwrap()[0] - 6.0).abs() < 1e-12);
        assert_eq!(p.hidden_layers(), 2);
        let one = product_d(1).unwrap();
        assert_eq!(one.hidden_layers(), 0);
        assert_eq!(one.realize(&[-4.5]).unwrap(), vec![-4.5]);
        assert!(product_d(0).is_err());
    }

    #[test]
    fn monomial_examples() {
        let m = monomial_net(&[2, 1], 2.0).unwrap();
        assert!((m.realize(&[1.5, -1.0, 0.5]).unwrap()[0] + 1.125).abs() < 1e-12);
        let c = monomial_net(&[0, 0], 2.0).unwrap();
        assert!((c.realize(&[1.0, 1.0, 1.7]).unwrap()[0] - 1.7).abs() < 1e-12);
        let odd = monomial_net(&[3], 2.0).unwrap();
        assert!((odd.realize(&[-1.5, 1.0]).unwrap()[0] + 3.375).abs() < 1e-12);
    }

    #[test]
    fn polynomial_examples() {
        // 1 + x1 + x2 + x1^2 + x1 x2 + x2^2 at (0.5, -0.5)
        let p = polynomial_net(2, 2, &[1.0; 6], 2.0).unwrap();
        let mut x = vec![0.5, -0.5];
        x.extend([1.0; 6]);
        assert!((p.realize(&x).unwrap()[0] - 1.25).abs() < 1e-12);
        let z = polynomial_net(2, 2, &[0.0; 6], 2.0).unwrap();
        assert_eq!(z.realize(&x).unwrap(), vec![0.0]);
        assert!(polynomial_net(2, 2, &[1.0; 5], 2.0).is_err());
    }

    #[test]
    fn indicator_examples() {
        let ind = indicator_net(&[0.0], &[1.0], 4.0).unwrap();
        assert_eq!(ind.realize(&[0.5]).unwrap(), vec![1.0]);
        assert_eq!(ind.realize(&[-0.5]).unwrap(), vec![0.0]);
        assert!((ind.realize(&[0.1]).unwrap()[0] - 0.4096).abs() < 1e-12);
        assert!(indicator_net(&[0.0], &[0.1], 4.0).is_err());
        assert!(indicator_net(&[0.0, 0.0], &[1.0], 4.0).is_err());
        assert!(indicator_net(&[0.0], &[1.0], 0.0).is_err());
        assert_eq!(ind.complexity().hidden_layers, 2);
    }

    #[test]
    fn gated_value_examples() {
        let g = gated_value_net(&[0.0], &[1.0], 4.0).unwrap();
        assert!((g.realize(&[0.5, 3.0]).unwrap()[0] - 3.0).abs() < 1e-12);
        assert_eq!(g.realize(&[-0.5, 3.0]).unwrap()[0], 0.0);
        assert_eq!(g.realize(&[0.1, 0.0]).unwrap()[0], 0.0);
        assert_eq!(g.widths(), vec![2, 4, 3, 4, 1]);
    }

    #[test]
    fn bump_profile_values() {
        assert_eq!(bump_profile(1.0), 1.0);
        assert_eq!(bump_profile(0.5), 0.5);
        assert_eq!(bump_profile(0.0), 0.0);
        assert_eq!(bump_profile(2.0), 0.0);
        for i in 0..=100 {
            let t = 1.0 + i as f64 / 100.0;
            assert!((bump_profile(t) + bump_profile(t - 1.0) - 1.0).abs() < 1e-14);
            assert!((bump_profile_net().realize(&[t]).unwrap()[0] - bump_profile(t)).abs() < 1e-14);
        }
    }

    #[test]
    fn sqrt_iteration_counts() {
        assert_eq!(sqrt_iterations(1.0, 0.1).unwrap(), 10);
        assert_eq!(sqrt_iterations(4.0, 0.01).unwrap(), 20);
        assert_eq!(sqrt_iterations(2.0, 0.001).unwrap(), 26);
        assert!(sqrt_iterations(0.5, 0.1).is_err());
        assert!(sqrt_iterations(1.0, 1.5).is_err());
    }

    #[test]
    fn sqrt_examples() {
        let net = sqrt_net(1.0, 0.1).unwrap();
        assert!(net.realize(&[0.0]).unwrap()[0].abs() <= 0.1);
        assert!((net.realize(&[1.0]).unwrap()[0] - 1.0).abs() <= 0.1);
        assert_eq!(net.hidden_layers(), 19);
        let net = sqrt_net(4.0, 0.01).unwrap();
        assert!((net.realize(&[4.0]).unwrap()[0] - 2.0).abs() <= 0.01);
    }
}
