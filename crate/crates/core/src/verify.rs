//! Empirical sup-norm check of a network against a reference function.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::network::Network;
use crate::sampling::Sampler;

/// `n` uniform points of `[-a, a)^d`, reproducible from `seed`.
pub fn sample_domain(d: usize, a: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
    Sampler::new(seed).points(n, d, -a, a)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub x: Vec<f64>,
    pub f: f64,
    pub phi: f64,
    pub abs_err: f64,
}

/// Summary written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub points: usize,
    pub max_abs_err: f64,
    pub argmax: Option<Vec<f64>>,
    pub eps: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub d: usize,
    pub rows: Vec<SweepRow>,
}

/// Evaluates `net` and `f` on every point in parallel; rows keep the order of
/// `points`, so the result does not depend on the thread count.
pub fn sweep<F>(net: &Network, f: F, points: &[Vec<f64>]) -> Result<Sweep>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = net.input_dim();
    if net.output_dim() != 1 {
        return Err(invalid("network", "a sweep needs a scalar output"));
    }
    let rows = points
        .par_iter()
        .map(|x| {
            let phi = net.realize_scalar(x)?;
            let fx = f(x);
            if !phi.is_finite() {
                return Err(Error::Shape(format!(
                    "network output is not finite at {x:?}"
                )));
            }
            Ok(SweepRow {
                x: x.clone(),
                f: fx,
                phi,
                abs_err: (phi - fx).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep { d, rows })
}

impl Sweep {
    pub fn max_abs_err(&self) -> f64 {
        self.rows.iter().map(|r| r.abs_err).fold(0.0, f64::max)
    }

    pub fn argmax(&self) -> Option<&SweepRow> {
        self.rows
            .iter()
            .reduce(|a, b| if b.abs_err > a.abs_err { b } else { a })
    }

    pub fn summary(&self, eps: Option<f64>) -> SweepSummary {
        let max = self.max_abs_err();
        SweepSummary {
            points: self.rows.len(),
            max_abs_err: max,
            argmax: self.argmax().map(|r| r.x.clone()),
            eps,
            pass: eps.map(|e| max <= e),
        }
    }

    /// `x_1,...,x_d,f,phi,abs_err` with every value in `{:.16e}`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.d).map(|k| format!("x_{k}")).collect();
        out.push_str(&header.join(","));
        out.push_str(",f,phi,abs_err\n");
        for r in &self.rows {
            for v in r.x.iter().chain([&r.f, &r.phi, &r.abs_err]) {
                out.push_str(&format!("{v:.16e},"));
            }
            out.pop();
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::identity_net;

    #[test]
    fn csv_layout() {
        let net = identity_net(1.0).unwrap();
        let pts = vec![vec![0.5], vec![-0.25]];
        let s = sweep(&net, |x| x[0], &pts).unwrap();
        let csv = s.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x_1,f,phi,abs_err");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("5.0000000000000000e-1,"));
        assert!(s.max_abs_err() < 1e-15);
        let empty = sweep(&net, |x| x[0], &[]).unwrap();
        assert_eq!(empty.to_csv(), "x_1,f,phi,abs_err\n");
        assert_eq!(empty.summary(Some(0.1)).argmax, None);
    }

    #[test]
    fn samples_are_reproducible() {
        assert_eq!(sample_domain(2, 0.5, 10, 7), sample_domain(2, 0.5, 10, 7));
        assert!(sample_domain(2, 0.5, 100, 7)
            .iter()
            .flatten()
            .all(|v| (-0.5..0.5).contains(v)));
    }
}
