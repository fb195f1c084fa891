//! Feed-forward ReQU networks: storage, realization, complexity and JSON IO.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// The squared ReLU, `max(0, x)^2`.
#[inline]
pub fn requ(x: f64) -> f64 {
    if x > 0.0 {
        x * x
    } else {
        0.0
    }
}

/// One affine map `x -> A x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    weights: SparseMatrix,
    bias: Vec<f64>,
}

impl Layer {
    pub fn new(weights: SparseMatrix, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::Shape(format!(
                "bias has {} entries but the weight matrix has {} rows",
                bias.len(),
                weights.rows()
            )));
        }
        if bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::Shape("non-finite bias".into()));
        }
        Ok(Layer { weights, bias })
    }

    pub fn from_dense(weights: &[Vec<f64>], bias: Vec<f64>, cols: usize) -> Result<Self> {
        Layer::new(SparseMatrix::from_dense(weights, cols)?, bias)
    }

    pub fn weights(&self) -> &SparseMatrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }
}

/// A ReQU network: every layer but the last is followed by [`requ`].
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input_dim: usize,
    layers: Vec<Layer>,
}

/// Size measures of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Complexity {
    pub hidden_layers: usize,
    pub max_width: usize,
    pub nonzero_weights: usize,
}

impl Network {
    pub fn new(input_dim: usize, layers: Vec<Layer>) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::Shape("input dimension must be positive".into()));
        }
        if layers.is_empty() {
            return Err(Error::Shape("a network needs at least one layer".into()));
        }
        let mut width = input_dim;
        for (i, layer) in layers.iter().enumerate() {
            if layer.in_dim() != width {
                return Err(Error::Shape(format!(
                    "layer {i} expects {} inputs but receives {width}",
                    layer.in_dim()
                )));
            }
            if layer.out_dim() == 0 {
                return Err(Error::Shape(format!("layer {i} has no neurons")));
            }
            width = layer.out_dim();
        }
        Ok(Network { input_dim, layers })
    }

    /// A network with no hidden layer, realizing `x -> A x + b`.
    pub fn affine(weights: SparseMatrix, bias: Vec<f64>) -> Result<Self> {
        let input_dim = weights.cols();
        Network::new(input_dim, vec![Layer::new(weights, bias)?])
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, Layer::out_dim)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn hidden_layers(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn realize(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: x.len(),
            });
        }
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.weights.affine_into(&cur, &layer.bias, &mut next);
            if i < last {
                for v in next.iter_mut() {
                    *v = requ(*v);
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Convenience for scalar-output networks.
    pub fn realize_scalar(&self, x: &[f64]) -> Result<f64> {
        let out = self.realize(x)?;
        if out.len() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                actual: out.len(),
            });
        }
        Ok(out[0])
    }

    /// Hidden layer count, widest layer (input and output included) and the
    /// number of nonzero weights and biases.
    pub fn complexity(&self) -> Complexity {
        let max_width = self
            .layers
            .iter()
            .map(Layer::out_dim)
            .fold(self.input_dim, usize::max);
        let nonzero_weights = self
            .layers
            .iter()
            .map(|l| l.weights.nnz() + l.bias.iter().filter(|b| **b != 0.0).count())
            .sum();
        Complexity {
            hidden_layers: self.hidden_layers(),
            max_width,
            nonzero_weights,
        }
    }

    /// Widths `N_0, ..., N_L`.
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input_dim)
            .chain(self.layers.iter().map(Layer::out_dim))
            .collect()
    }
}

/// Layers with at most this many matrix entries are written densely.
pub const DENSE_ENTRY_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightFormat {
    Dense,
    Sparse,
    /// Dense for small layers, sparse above [`DENSE_ENTRY_LIMIT`].
    Auto,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    input_dim: usize,
    activation: String,
    layers: Vec<LayerDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sparse_weights: Option<SparseDoc>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SparseDoc {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

const ACTIVATION_TAG: &str = "requ";

impl Network {
    pub fn to_json(&self) -> String {
        self.to_json_with(WeightFormat::Auto)
    }

    pub fn to_json_with(&self, format: WeightFormat) -> String {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let w = &l.weights;
                let dense = match format {
                    WeightFormat::Dense => true,
                    WeightFormat::Sparse => false,
                    WeightFormat::Auto => w.rows() * w.cols() <= DENSE_ENTRY_LIMIT,
                };
                if dense {
                    LayerDoc {
                        weights: Some(w.to_dense()),
                        sparse_weights: None,
                        bias: l.bias.clone(),
                    }
                } else {
                    LayerDoc {
                        weights: None,
                        sparse_weights: Some(SparseDoc {
                            rows: w.rows(),
                            cols: w.cols(),
                            entries: w.triplets().collect(),
                        }),
                        bias: l.bias.clone(),
                    }
                }
            })
            .collect();
        let doc = NetworkDoc {
            input_dim: self.input_dim,
            activation: ACTIVATION_TAG.into(),
            layers,
        };
        serde_json::to_string(&doc).expect("network documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Network> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: NetworkDoc = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        if doc.activation != ACTIVATION_TAG {
            return Err(Error::Parse {
                path: "activation".into(),
                message: format!("unsupported activation `{}`", doc.activation),
            });
        }
        if doc.layers.is_empty() {
            return Err(Error::Parse {
                path: "layers".into(),
                message: "a network needs at least one layer".into(),
            });
        }
        let mut width = doc.input_dim;
        let mut layers = Vec::with_capacity(doc.layers.len());
        for (i, l) in doc.layers.into_iter().enumerate() {
            let parse_err = |field: &str, message: String| Error::Parse {
                path: format!("layers[{i}].{field}"),
                message,
            };
            let weights = match (l.weights, l.sparse_weights) {
                (Some(w), None) => SparseMatrix::from_dense(&w, width)
                    .map_err(|e| parse_err("weights", e.to_string()))?,
                (None, Some(s)) => {
                    if s.cols != width {
                        return Err(parse_err(
                            "sparse_weights",
                            format!("expects {} inputs but receives {width}", s.cols),
                        ));
                    }
                    SparseMatrix::from_triplets(s.rows, s.cols, s.entries)
                        .map_err(|e| parse_err("sparse_weights", e.to_string()))?
                }
                (None, None) => return Err(parse_err("weights", "missing weight matrix".into())),
                (Some(_), Some(_)) => {
                    return Err(parse_err(
                        "weights",
                        "both dense and sparse weights given".into(),
                    ))
                }
            };
            if weights.rows() == 0 {
                return Err(parse_err("weights", "layer has no neurons".into()));
            }
            width = weights.rows();
            layers.push(Layer::new(weights, l.bias).map_err(|e| parse_err("bias", e.to_string()))?);
        }
        Network::new(doc.input_dim, layers).map_err(|e| Error::Parse {
            path: "input_dim".into(),
            message: e.to_string(),
        })
    }
}
