//! Composition rules for networks.
//!
//! Concatenation merges the last affine map of the inner network with the first
//! affine map of the outer one, so no extra layer is spent. Parallelization
//! runs networks of equal depth side by side on a shared input.

use crate::error::{invalid, Error, Result};
use crate::network::{Layer, Network};
use crate::sparse::SparseMatrix;

/// `outer ∘ inner`, with `inner.output_dim() == outer.input_dim()`.
///
/// The hidden layer count of the result is the sum of both hidden layer counts.
pub fn concatenate(outer: &Network, inner: &Network) -> Result<Network> {
    if outer.input_dim() != inner.output_dim() {
        return Err(Error::DimensionMismatch {
            expected: outer.input_dim(),
            actual: inner.output_dim(),
        });
    }
    let inner_layers = inner.layers();
    let outer_layers = outer.layers();
    let (last, head) = inner_layers.split_last().expect("networks are non-empty");
    let (first, tail) = outer_layers.split_first().expect("networks are non-empty");

    let w = first.weights().matmul(last.weights())?;
    let mut b = first.weights().mul_vec(last.bias());
    for (bi, fb) in b.iter_mut().zip(first.bias()) {
        *bi += fb;
    }
    let mut layers = Vec::with_capacity(inner_layers.len() + outer_layers.len() - 1);
    layers.extend(head.iter().cloned());
    layers.push(Layer::new(w, b)?);
    layers.extend(tail.iter().cloned());
    Network::new(inner.input_dim(), layers)
}

/// Runs two networks of equal depth and equal input dimension side by side.
/// The outputs are stacked, `a` first.
pub fn parallelize(a: &Network, b: &Network) -> Result<Network> {
    parallelize_all(&[a.clone(), b.clone()])
}

/// N-ary parallelization. Equivalent to a left fold of [`parallelize`] but
/// built in one pass.
pub fn parallelize_all(nets: &[Network]) -> Result<Network> {
    let first = nets
        .first()
        .ok_or_else(|| invalid("nets", "nothing to parallelize"))?;
    let depth = first.layers().len();
    let d = first.input_dim();
    for n in nets {
        if n.input_dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: n.input_dim(),
            });
        }
        if n.layers().len() != depth {
            return Err(Error::Shape(format!(
                "cannot parallelize networks with {} and {} hidden layers",
                depth - 1,
                n.layers().len() - 1
            )));
        }
    }
    let mut layers = Vec::with_capacity(depth);
    for l in 0..depth {
        let mats: Vec<&SparseMatrix> = nets.iter().map(|n| n.layers()[l].weights()).collect();
        let w = if l == 0 {
            SparseMatrix::vstack(&mats)?
        } else {
            SparseMatrix::block_diag(&mats)
        };
        let b = nets
            .iter()
            .flat_map(|n| n.layers()[l].bias().iter().copied())
            .collect();
        layers.push(Layer::new(w, b)?);
    }
    Network::new(d, layers)
}

fn check_bound(s: f64) -> Result<()> {
    if !(s.is_finite() && s > 0.0) {
        return Err(invalid(
            "s",
            format!("identity bound must be positive, got {s}"),
        ));
    }
    Ok(())
}

/// One hidden layer of two neurons, equal to `t` for `|t| <= s`:
/// `(requ(t + s) - requ(-t + s)) / (4 s)`.
pub fn identity_net(s: f64) -> Result<Network> {
    identity_block_bounds(&[s])
}

/// Coordinatewise [`identity_net`] on `d` inputs, width `2 d`.
pub fn identity_block(d: usize, s: f64) -> Result<Network> {
    if d == 0 {
        return Err(invalid("d", "must be positive"));
    }
    identity_block_bounds(&vec![s; d])
}

/// Coordinatewise identity with a separate bound per coordinate.
pub fn identity_block_bounds(bounds: &[f64]) -> Result<Network> {
    let d = bounds.len();
    if d == 0 {
        return Err(invalid("bounds", "must be non-empty"));
    }
    let mut first = Vec::with_capacity(2 * d);
    let mut second = Vec::with_capacity(2 * d);
    let mut bias = Vec::with_capacity(2 * d);
    for (k, &s) in bounds.iter().enumerate() {
        check_bound(s)?;
        first.push((2 * k, k, 1.0));
        first.push((2 * k + 1, k, -1.0));
        bias.extend([s, s]);
        let w = 1.0 / (4.0 * s);
        second.push((k, 2 * k, w));
        second.push((k, 2 * k + 1, -w));
    }
    Network::new(
        d,
        vec![
            Layer::new(SparseMatrix::from_triplets(2 * d, d, first)?, bias)?,
            Layer::new(SparseMatrix::from_triplets(d, 2 * d, second)?, vec![0.0; d])?,
        ],
    )
}

/// `k` stacked identity blocks; for `k = 0` the affine identity.
pub fn identity_chain(bounds: &[f64], k: usize) -> Result<Network> {
    if bounds.is_empty() {
        return Err(invalid("bounds", "must be non-empty"));
    }
    let mut net = Network::affine(
        SparseMatrix::identity(bounds.len()),
        vec![0.0; bounds.len()],
    )?;
    let block = identity_block_bounds(bounds)?;
    for _ in 0..k {
        net = concatenate(&block, &net)?;
    }
    Ok(net)
}

/// Pads `net` with identity layers so it has exactly `target` hidden layers.
/// Every output is assumed to stay within `[-s, s]`.
pub fn sync_depth(net: &Network, target: usize, s: f64) -> Result<Network> {
    sync_depth_bounds(net, target, &vec![s; net.output_dim()])
}

/// [`sync_depth`] with one bound per output.
pub fn sync_depth_bounds(net: &Network, target: usize, bounds: &[f64]) -> Result<Network> {
    let have = net.hidden_layers();
    if target < have {
        return Err(invalid(
            "target",
            format!("network already has {have} hidden layers, more than {target}"),
        ));
    }
    if bounds.len() != net.output_dim() {
        return Err(Error::DimensionMismatch {
            expected: net.output_dim(),
            actual: bounds.len(),
        });
    }
    if target == have {
        return Ok(net.clone());
    }
    concatenate(&identity_chain(bounds, target - have)?, net)
}

/// Affine map whose output `i` is `Σ rows[i][..].1 * x[rows[i][..].0] + bias[i]`.
pub fn linear_net(input_dim: usize, rows: &[Vec<(usize, f64)>], bias: Vec<f64>) -> Result<Network> {
    let triplets = rows
        .iter()
        .enumerate()
        .flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v)))
        .collect();
    Network::affine(
        SparseMatrix::from_triplets(rows.len(), input_dim, triplets)?,
        bias,
    )
}

/// Affine map selecting the listed coordinates.
pub fn projection(input_dim: usize, indices: &[usize]) -> Result<Network> {
    let rows: Vec<Vec<(usize, f64)>> = indices.iter().map(|&i| vec![(i, 1.0)]).collect();
    linear_net(input_dim, &rows, vec![0.0; indices.len()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_exact_inside_its_bound() {
        let id = identity_net(2.0).unwrap();
        for t in [-2.0, -1.5, 0.0, 0.3, 2.0] {
            assert!((id.realize(&[t]).unwrap()[0] - t).abs() <= 1e-15);
        }
        assert_ne!(id.realize(&[3.0]).unwrap()[0], 3.0);
        assert!(identity_net(0.0).is_err());
        assert!(identity_net(-1.0).is_err());
    }

    #[test]
    fn sync_depth_adds_identity_layers() {
        let id = identity_net(1.0).unwrap();
        let deeper = sync_depth(&id, 4, 1.0).unwrap();
        assert_eq!(deeper.hidden_layers(), 4);
        assert!((deeper.realize(&[0.5]).unwrap()[0] - 0.5).abs() < 1e-15);
        assert!(sync_depth(&deeper, 2, 1.0).is_err());
        assert_eq!(sync_depth(&id, 1, 1.0).unwrap(), id);
    }

    #[test]
    fn parallelize_rejects_depth_mismatch() {
        let a = identity_net(1.0).unwrap();
        let b = sync_depth(&a, 2, 1.0).unwrap();
        assert!(parallelize(&a, &b).is_err());
        let c = identity_block(2, 1.0).unwrap();
        assert!(matches!(
            parallelize(&a, &c),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn concatenate_checks_dimensions() {
        let a = identity_block(2, 1.0).unwrap();
        let b = identity_net(1.0).unwrap();
        assert!(concatenate(&a, &b).is_err());
    }
}
