//! Multi-indices in graded order.
//!
//! Indices of total degree `0, 1, ..., n` follow each other; inside one degree
//! they are sorted lexicographically descending, so for `d = 2, n = 2` the
//! order is `1, x1, x2, x1^2, x1 x2, x2^2`.

pub type MultiIndex = Vec<usize>;

/// All multi-indices of length `d` with total degree at most `n`.
pub fn multi_indices(d: usize, n: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(binomial(d + n, d));
    for k in 0..=n {
        let mut cur = vec![0; d];
        compositions(&mut cur, 0, k, &mut out);
    }
    out
}

fn compositions(cur: &mut Vec<usize>, pos: usize, left: usize, out: &mut Vec<MultiIndex>) {
    if pos + 1 >= cur.len() {
        if let Some(last) = cur.last_mut() {
            *last = left;
        }
        if !cur.is_empty() || left == 0 {
            out.push(cur.clone());
        }
        return;
    }
    for v in (0..=left).rev() {
        cur[pos] = v;
        compositions(cur, pos + 1, left - v, out);
    }
    cur[pos] = 0;
}

pub fn degree(alpha: &[usize]) -> usize {
    alpha.iter().sum()
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `α! = α_1! ... α_d!`
pub fn multi_factorial(alpha: &[usize]) -> f64 {
    alpha.iter().map(|&a| factorial(a)).product()
}

/// `x^α`
pub fn monomial(alpha: &[usize], x: &[f64]) -> f64 {
    alpha
        .iter()
        .zip(x)
        .map(|(&a, &xi)| xi.powi(a as i32))
        .product()
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_order() {
        let m = multi_indices(2, 2);
        assert_eq!(
            m,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
    }

    #[test]
    fn counts_match_binomial() {
        for d in 1..5 {
            for n in 0..5 {
                assert_eq!(multi_indices(d, n).len(), binomial(d + n, d));
            }
        }
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(2, 5), 0);
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(4), 24.0);
        assert_eq!(multi_factorial(&[2, 3]), 12.0);
        assert_eq!(monomial(&[2, 1], &[3.0, -2.0]), -18.0);
    }
}
