//! The localized Taylor approximator and its assembly into a global network.
//!
//! Every piece reads the input in three stages:
//!
//! 1. coarse indicators `g_j = 1_{B_j}(x)` (two hidden layers),
//! 2. fine indicators `h_i = 1_{A_i}(x)` for the boxes
//!    `A_i = [Φ1 + v_i, Φ1 + v_i + 2/M^2)` whose corner `Φ1 = Σ_j B_j g_j` is
//!    itself a linear function of `g` (two hidden layers),
//! 3. gated products `h_i · value_i(g)` summed over `i` (one hidden layer).
//!
//! All indicators share the fringe width `δ = 1/M^(2r+2)`, so the stages are
//! exact for `x` at distance at least `δ` from every cube face.

use serde::{Deserialize, Serialize};

use crate::calculus::{
    concatenate, linear_net, parallelize, parallelize_all, projection, sync_depth,
};
use crate::error::{invalid, Error, Result};
use crate::gadgets::{
    box_indicator, bump_profile_net, indicator_net, polynomial_net, product2, product_d,
};
use crate::multi_index::{binomial, multi_factorial, multi_indices};
use crate::network::{Complexity, Layer, Network};
use crate::partition::{build_partitions, PartitionPair};
use crate::sparse::SparseMatrix;
use crate::taylor::{choose_m, taylor_constant, validate_taylor_constant, HolderFunction};

/// Parameters shared by the pieces of one build.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproximationSpec {
    pub eps: f64,
    pub c: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub domain_half_width: f64,
}

/// Affine form `Σ terms + constant` over a network input.
#[derive(Debug, Clone, Default)]
struct Form {
    terms: Vec<(usize, f64)>,
    constant: f64,
}

impl Form {
    fn var(i: usize) -> Form {
        Form {
            terms: vec![(i, 1.0)],
            constant: 0.0,
        }
    }
}

fn affine(input_dim: usize, forms: &[Form]) -> Result<Network> {
    let rows: Vec<Vec<(usize, f64)>> = forms.iter().map(|f| f.terms.clone()).collect();
    linear_net(input_dim, &rows, forms.iter().map(|f| f.constant).collect())
}

/// One hidden layer computing `u_p · w_p` for every pair of forms, four
/// neurons per pair as in [`product2`].
fn product_layer(input_dim: usize, pairs: &[(Form, Form)]) -> Result<Network> {
    let mut hidden = Vec::new();
    let mut bias = Vec::with_capacity(4 * pairs.len());
    let mut out = Vec::with_capacity(4 * pairs.len());
    for (p, (u, w)) in pairs.iter().enumerate() {
        for (k, (su, sw)) in [(1.0, 1.0), (-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0)]
            .into_iter()
            .enumerate()
        {
            let n = 4 * p + k;
            hidden.extend(u.terms.iter().map(|&(c, v)| (n, c, su * v)));
            hidden.extend(w.terms.iter().map(|&(c, v)| (n, c, sw * v)));
            bias.push(su * u.constant + sw * w.constant);
            out.push((p, n, if k < 2 { 0.25 } else { -0.25 }));
        }
    }
    let n = 4 * pairs.len();
    Network::new(
        input_dim,
        vec![
            Layer::new(SparseMatrix::from_triplets(n, input_dim, hidden)?, bias)?,
            Layer::new(
                SparseMatrix::from_triplets(pairs.len(), n, out)?,
                vec![0.0; pairs.len()],
            )?,
        ],
    )
}

fn all(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn span(start: usize, len: usize) -> Vec<usize> {
    (start..start + len).collect()
}

/// `x -> x` through `depth` identity blocks with bound 1.
fn carry(input_dim: usize, idx: &[usize], depth: usize) -> Result<Network> {
    sync_depth(&projection(input_dim, idx)?, depth, 1.0)
}

fn sharpness(pp: &PartitionPair, r: f64) -> f64 {
    1.0 / pp.fringe(r)
}

/// Stage 1: `x -> (x, g)`, plus shrunk coarse indicators when `shrink` is set.
fn coarse_stage(pp: &PartitionPair, s: f64, shrink: Option<f64>) -> Result<Network> {
    let d = pp.d();
    let mut parts = vec![carry(d, &all(d), 2)?];
    for c in pp.coarse_cubes() {
        parts.push(indicator_net(&c.lower, &c.upper(), s)?);
    }
    if let Some(delta) = shrink {
        for c in pp.coarse_cubes() {
            let r = c.shrink(delta)?;
            parts.push(indicator_net(&r.lower, &r.upper, s)?);
        }
    }
    parallelize_all(&parts)
}

/// Coordinate `k` of the coarse corner `Φ1 = Σ_j B_j g_j`, with `g` starting
/// at input `g0`, plus `extra`.
fn corner_form(pp: &PartitionPair, g0: usize, k: usize, extra: f64) -> Form {
    Form {
        terms: pp
            .coarse_cubes()
            .iter()
            .enumerate()
            .map(|(j, c)| (g0 + j, c.lower[k]))
            .collect(),
        constant: extra,
    }
}

/// Stage 2: `(x, g, ..) -> h` with `h_i` the indicator of
/// `[Φ1 + v_i + δ, Φ1 + v_i + 2/M^2 - δ)`; `δ = 0` gives the plain fine cubes.
fn fine_indicators(pp: &PartitionPair, s: f64, delta: f64, input_dim: usize) -> Result<Network> {
    let d = pp.d();
    let mut pre: Vec<Form> = (0..d).map(Form::var).collect();
    pre.extend((0..d).map(|k| corner_form(pp, d, k, 0.0)));
    let pre = affine(input_dim, &pre)?;
    let side = pp.fine_side();
    let boxes = pp
        .offsets()
        .iter()
        .map(|v| {
            let lo: Vec<f64> = v.iter().map(|o| o + delta).collect();
            let hi: Vec<f64> = v.iter().map(|o| o + side - delta).collect();
            box_indicator(2 * d, &all(d), Some(&span(d, d)), &lo, &hi, s)
        })
        .collect::<Result<Vec<_>>>()?;
    concatenate(&parallelize_all(&boxes)?, &pre)
}

/// Stages 1 and 2: `x -> (x, h, g)` after four hidden layers.
fn lookup(pp: &PartitionPair, s: f64) -> Result<Network> {
    let d = pp.d();
    let n = pp.count();
    let width = d + n;
    let second = parallelize_all(&[
        carry(width, &all(d), 2)?,
        fine_indicators(pp, s, 0.0, width)?,
        carry(width, &span(d, n), 2)?,
    ])?;
    concatenate(&second, &coarse_stage(pp, s, None)?)
}

/// Stage 3 for the fine corner: `(x, h, g) -> (x, Ψ1)` with
/// `Ψ1 = Σ_i h_i (Φ1 + v_i)`, plus gated `extra` values per `i`.
///
/// Output layout: `x`, `Ψ1`, then `Σ_i h_i extra(i)[q]` for each `q`.
fn gated_stage(
    pp: &PartitionPair,
    extra: &dyn Fn(usize) -> Vec<Form>,
    n_extra: usize,
) -> Result<Network> {
    let d = pp.d();
    let n = pp.count();
    let input_dim = d + 2 * n;
    let g0 = d + n;
    let per = d + n_extra;
    let mut pairs = Vec::with_capacity(n * per);
    for (i, v) in pp.offsets().iter().enumerate() {
        let h = Form::var(d + i);
        for (k, &vk) in v.iter().enumerate() {
            pairs.push((corner_form(pp, g0, k, vk), h.clone()));
        }
        for f in extra(i) {
            pairs.push((f, h.clone()));
        }
    }
    let both = parallelize(
        &carry(input_dim, &all(d), 1)?,
        &product_layer(input_dim, &pairs)?,
    )?;
    let mut readout: Vec<Form> = (0..d).map(Form::var).collect();
    for q in 0..per {
        readout.push(Form {
            terms: (0..n).map(|i| (d + i * per + q, 1.0)).collect(),
            constant: 0.0,
        });
    }
    concatenate(&affine(d + n * per, &readout)?, &both)
}

fn check_inputs(f: &HolderFunction, pp: &PartitionPair, spec: &ApproximationSpec) -> Result<()> {
    if f.d() != pp.d() {
        return Err(Error::DimensionMismatch {
            expected: pp.d(),
            actual: f.d(),
        });
    }
    if spec.m != pp.m() {
        return Err(invalid(
            "M",
            format!(
                "spec has M = {} but the partition uses M = {}",
                spec.m,
                pp.m()
            ),
        ));
    }
    if f.r() < 1.0 {
        return Err(invalid("r", format!("must be at least 1, got {}", f.r())));
    }
    Ok(())
}

/// Interior approximator: the piecewise Taylor polynomial of `f` on the fine
/// cubes of `pp`, exact away from the `δ`-fringes of the cube faces and bounded
/// by `R e^(2d)` on all of `[-1, 1)^d`.
pub fn interior_approximator(
    f: &HolderFunction,
    pp: &PartitionPair,
    spec: &ApproximationSpec,
) -> Result<Network> {
    check_inputs(f, pp, spec)?;
    let d = pp.d();
    let n = pp.count();
    let s = sharpness(pp, f.r());
    let alphas = multi_indices(d, f.floor_r());
    let g0 = d + n;
    // φ(α, i) = Σ_j D^α f(B_j + v_i) g_j
    let derivs = |i: usize| -> Vec<Form> {
        alphas
            .iter()
            .map(|a| Form {
                terms: (0..n)
                    .map(|j| (g0 + j, f.deriv(a, &pp.fine_cube(i, j).lower)))
                    .collect(),
                constant: 0.0,
            })
            .collect()
    };
    let gated = concatenate(&gated_stage(pp, &derivs, alphas.len())?, &lookup(pp, s)?)?;
    // (x, Ψ1, Ψα) -> (x - Ψ1, Ψα)
    let mut readout: Vec<Form> = (0..d)
        .map(|k| Form {
            terms: vec![(k, 1.0), (d + k, -1.0)],
            constant: 0.0,
        })
        .collect();
    readout.extend((0..alphas.len()).map(|q| Form::var(2 * d + q)));
    let zeta = concatenate(&affine(2 * d + alphas.len(), &readout)?, &gated)?;
    let weights: Vec<f64> = alphas.iter().map(|a| 1.0 / multi_factorial(a)).collect();
    let tau = f.radius().max(2.0);
    concatenate(&polynomial_net(d, f.floor_r(), &weights, tau)?, &zeta)
}

/// Which one-dimensional profile the bump uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BumpProfile {
    /// `G(t)`, see [`crate::gadgets::bump_profile`].
    Symmetric,
    /// `2ρ(u+2) - 4ρ(u+3/2) + 4ρ(u+1/2) - 2ρ(u)` with `u = -t/2`. It rises from
    /// 0 at the lower face to 1 at the upper face, so it is no partition of
    /// unity; kept for comparison only.
    Printed,
}

/// The printed profile as a function of `t = M^2 (x - C^L)`.
pub fn printed_bump_profile(t: f64) -> f64 {
    use crate::network::requ;
    let u = -t / 2.0;
    2.0 * requ(u + 2.0) - 4.0 * requ(u + 1.5) + 4.0 * requ(u + 0.5) - 2.0 * requ(u)
}

fn printed_profile_net() -> Result<Network> {
    Network::new(
        1,
        vec![
            Layer::from_dense(
                &[vec![-0.5], vec![-0.5], vec![-0.5], vec![-0.5]],
                vec![2.0, 1.5, 0.5, 0.0],
                1,
            )?,
            Layer::from_dense(&[vec![2.0, -4.0, 4.0, -2.0]], vec![0.0], 4)?,
        ],
    )
}

/// `w(x) = Π_k G(M^2 (x_k - C^L_k))` where `C` is the fine cube holding `x`.
/// Equals 1 at cube centers and 0 on cube faces; the `2^d` shifted grids sum
/// to one on `[-1/2, 1/2]^d`.
pub fn bump_net(pp: &PartitionPair, r: f64) -> Result<Network> {
    bump_net_with(pp, r, BumpProfile::Symmetric)
}

pub fn bump_net_with(pp: &PartitionPair, r: f64, profile: BumpProfile) -> Result<Network> {
    if r < 1.0 {
        return Err(invalid("r", format!("must be at least 1, got {r}")));
    }
    let d = pp.d();
    let s = sharpness(pp, r);
    let corner = concatenate(&gated_stage(pp, &|_| Vec::new(), 0)?, &lookup(pp, s)?)?;
    let m2 = (pp.m() * pp.m()) as f64;
    let t: Vec<Form> = (0..d)
        .map(|k| Form {
            terms: vec![(k, m2), (d + k, -m2)],
            constant: 0.0,
        })
        .collect();
    let t = concatenate(&affine(2 * d, &t)?, &corner)?;
    let unit = match profile {
        BumpProfile::Symmetric => bump_profile_net(),
        BumpProfile::Printed => printed_profile_net()?,
    };
    let factors = (0..d)
        .map(|k| concatenate(&unit, &projection(d, &[k])?))
        .collect::<Result<Vec<_>>>()?;
    let w = concatenate(&parallelize_all(&factors)?, &t)?;
    concatenate(&product_d(d)?, &w)
}

/// 1 on the `δ`-collar `C \ C_δ` of every fine cube and 0 on the `2δ`-shrunk
/// interiors, with `δ = 1/M^(2r+2)`; values in `[0, 1]` everywhere.
pub fn boundary_detector(pp: &PartitionPair, r: f64) -> Result<Network> {
    if r < 1.0 {
        return Err(invalid("r", format!("must be at least 1, got {r}")));
    }
    let d = pp.d();
    let n = pp.count();
    let delta = pp.fringe(r);
    let s = 1.0 / delta;

    // (x, g, φ1) with φ1 = 1 - Σ_j 1_{B_j shrunk}(x)
    let first = coarse_stage(pp, s, Some(delta))?;
    let mut out: Vec<Form> = (0..d + n).map(Form::var).collect();
    out.push(Form {
        terms: (0..n).map(|j| (d + n + j, -1.0)).collect(),
        constant: 1.0,
    });
    let first = concatenate(&affine(d + 2 * n, &out)?, &first)?;

    // (φ2, φ1) with φ2 = 1 - Σ_i 1_{A_i shrunk}(x)
    let width = d + n + 1;
    let second = parallelize(
        &fine_indicators(pp, s, delta, width)?,
        &carry(width, &[d + n], 2)?,
    )?;
    let out = [
        Form {
            terms: (0..n).map(|i| (i, -1.0)).collect(),
            constant: 1.0,
        },
        Form::var(n),
    ];
    let second = concatenate(&affine(n + 1, &out)?, &second)?;

    // 1 - requ(1 - φ2 - φ1)
    let last = Network::new(
        2,
        vec![
            Layer::from_dense(&[vec![-1.0, -1.0]], vec![1.0], 2)?,
            Layer::from_dense(&[vec![-1.0]], vec![1.0], 1)?,
        ],
    )?;
    concatenate(&last, &concatenate(&second, &first)?)
}

/// `R e^(2d)`, the global bound of the interior approximator.
pub fn clip_bound(radius: f64, d: usize) -> f64 {
    radius * (2.0 * d as f64).exp()
}

/// One window of the partition of unity: approximately `w(x) f(x)` on all of
/// `[-1, 1)^d`. The interior approximator is clipped to `±R e^(2d)` and
/// switched off by the boundary detector before it is weighted by the bump.
pub fn windowed_approximator(
    f: &HolderFunction,
    pp: &PartitionPair,
    spec: &ApproximationSpec,
) -> Result<Network> {
    let psi = interior_approximator(f, pp, spec)?;
    let det = boundary_detector(pp, f.r())?;
    let bump = bump_net(pp, f.r())?;
    let b = clip_bound(f.radius(), pp.d());
    let depth = psi.hidden_layers();

    let both = parallelize(&psi, &sync_depth(&det, depth, 1.0)?)?;
    // (Ψ, φ) -> ((requ(Ψ - Bφ + B) - requ(-Ψ - Bφ + B)) / 4B, φ)
    let clip = Network::new(
        2,
        vec![
            Layer::from_dense(
                &[
                    vec![1.0, -b],
                    vec![-1.0, -b],
                    vec![0.0, 1.0],
                    vec![0.0, -1.0],
                ],
                vec![b, b, 1.0, 1.0],
                2,
            )?,
            Layer::from_dense(
                &[
                    vec![1.0 / (4.0 * b), -1.0 / (4.0 * b), 0.0, 0.0],
                    vec![0.0, 0.0, 0.25, -0.25],
                ],
                vec![0.0, 0.0],
                4,
            )?,
        ],
    )?;
    let gate = product_layer(
        2,
        &[(
            Form {
                terms: vec![(1, -1.0)],
                constant: 1.0,
            },
            Form::var(0),
        )],
    )?;
    let gated = concatenate(&gate, &concatenate(&clip, &both)?)?;
    let target = gated.hidden_layers().max(bump.hidden_layers());
    let pair = parallelize(
        &sync_depth(&gated, target, b)?,
        &sync_depth(&bump, target, 1.0)?,
    )?;
    concatenate(&product2(), &pair)
}

/// Depth budget for the full network.
pub fn predicted_depth(d: usize, r: f64) -> usize {
    let n = r.floor() as usize;
    let l = n.max(1).ilog2() as usize;
    l + 2 * ((d + 1 + d * l).ilog2() as usize) + 8
}

/// Width budget for the full network.
pub fn predicted_width(d: usize, r: f64, m: usize) -> usize {
    let n = r.floor() as usize;
    let l = n.max(1).ilog2() as usize;
    let c = binomial(d + n, d);
    let md = m.pow(d as u32);
    let wide = 4.max(2 * d + 1);
    let inner = ((1 + c) * md * wide + 2).max(2 * c * (d + 1 + d * l));
    (1 << d) * (inner + 2 * (md * (2 * d + 1) + 2 * d + 2 * d * md) + 2 + md * wide)
}

/// Depth budget for the interior approximator alone.
pub fn interior_predicted_depth(d: usize, r: f64) -> usize {
    predicted_depth(d, r) - 3
}

/// Width budget for the interior approximator alone.
pub fn interior_predicted_width(d: usize, r: f64, m: usize) -> usize {
    let n = r.floor() as usize;
    let l = n.max(1).ilog2() as usize;
    let c = binomial(d + n, d);
    ((1 + c) * m.pow(d as u32) * 4.max(2 * d + 1) + 2).max(2 * c * (d + 1 + d * l))
}

/// Options for [`full_approximator_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    /// Half-width `a` of the target domain `[-a, a]^d`.
    pub domain_half_width: f64,
    pub m_override: Option<usize>,
    pub c_override: Option<f64>,
    /// Random pairs used to validate the Taylor constant.
    pub validation_pairs: usize,
    pub validation_seed: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            domain_half_width: 0.5,
            m_override: None,
            c_override: None,
            validation_pairs: 10_000,
            validation_seed: 0x5eed,
        }
    }
}

/// Everything recorded about a build, serialized next to the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    #[serde(rename = "fn")]
    pub function: String,
    pub d: usize,
    pub r: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub domain_half_width: f64,
    pub eps: f64,
    pub window_eps: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub c: f64,
    pub measured_c: f64,
    pub construction_radius: f64,
    pub clip_bound: f64,
    #[serde(rename = "predicted_L")]
    pub predicted_depth: usize,
    #[serde(rename = "predicted_N")]
    pub predicted_width: usize,
    pub measured: Complexity,
}

impl BuildReport {
    pub fn within_budget(&self) -> bool {
        self.measured.hidden_layers <= self.predicted_depth
            && self.measured.max_width <= self.predicted_width
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(text: &str) -> Result<BuildReport> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Build {
    pub network: Network,
    pub report: BuildReport,
    pub spec: ApproximationSpec,
}

/// [`full_approximator_with`] on the default domain `[-1/2, 1/2]^d`.
pub fn full_approximator(f: &HolderFunction, eps: f64) -> Result<Build> {
    full_approximator_with(f, eps, &BuildOptions::default())
}

/// Network approximating `f` to `eps` in sup norm on `[-a, a)^d`.
///
/// The input is scaled by `1/(2a)` in the first layer, so the construction
/// itself sees `g(u) = f(2a u)` on `[-1/2, 1/2)^d`. Each of the `2^d` shifted
/// windows gets the budget `eps / 2^d`.
pub fn full_approximator_with(f: &HolderFunction, eps: f64, opts: &BuildOptions) -> Result<Build> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", format!("must lie in (0, 1), got {eps}")));
    }
    if f.r() < 1.0 {
        return Err(invalid("r", format!("must be at least 1, got {}", f.r())));
    }
    let a = opts.domain_half_width;
    if !(a.is_finite() && a > 0.0) {
        return Err(invalid(
            "domain",
            format!("half-width must be positive, got {a}"),
        ));
    }
    let d = f.d();
    let g = f.rescaled(2.0 * a)?;
    g.check_radius()?;
    let c = opts.c_override.unwrap_or_else(|| taylor_constant(f.r(), d));
    if !(c.is_finite() && c > 0.0) {
        return Err(invalid("c", format!("must be positive, got {c}")));
    }
    let measured_c = validate_taylor_constant(&g, c, opts.validation_pairs, opts.validation_seed)?;
    let windows = (1usize << d) as f64;
    let window_eps = eps / windows;
    let m = match opts.m_override {
        Some(m) => m,
        None => choose_m(window_eps, f.r(), g.radius(), d, c)?,
    };
    let spec = ApproximationSpec {
        eps,
        c,
        m,
        domain_half_width: a,
    };

    let parts = (1..=1usize << d)
        .map(|kappa| windowed_approximator(&g, &build_partitions(m, d, kappa)?, &spec))
        .collect::<Result<Vec<_>>>()?;
    let all = parallelize_all(&parts)?;
    let sum = linear_net(
        all.output_dim(),
        &[(0..parts.len()).map(|p| (p, 1.0)).collect()],
        vec![0.0],
    )?;
    let scale: Vec<Vec<(usize, f64)>> = (0..d).map(|k| vec![(k, 1.0 / (2.0 * a))]).collect();
    let network = concatenate(
        &concatenate(&sum, &all)?,
        &linear_net(d, &scale, vec![0.0; d])?,
    )?;

    let report = BuildReport {
        function: f.name().to_string(),
        d,
        r: f.r(),
        radius: f.radius(),
        domain_half_width: a,
        eps,
        window_eps,
        m,
        c,
        measured_c,
        construction_radius: g.radius(),
        clip_bound: clip_bound(g.radius(), d),
        predicted_depth: predicted_depth(d, f.r()),
        predicted_width: predicted_width(d, f.r(), m),
        measured: network.complexity(),
    };
    Ok(Build {
        network,
        report,
        spec,
    })
}
