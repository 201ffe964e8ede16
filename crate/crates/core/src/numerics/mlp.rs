//! Multilayer perceptron: spec, parameters, forward pass with cached
//! activations, and reverse-mode gradients.
//!
//! Hidden layers are leaky-rectified with a configurable negative-side
//! slope; the output layer is one of tanh / sigmoid / linear / softmax.
//! Weights are row-major `(out x in)`; an input batch is `(samples x in)`.
//!
//! Besides the plain backward pass there are two specialized entry points
//! used by the adversarial training loops:
//!
//! - [`mlp_backward_with_taps`] injects additional gradients at hidden
//!   layers' post-activations (feedback losses read the last hidden layer of
//!   the discriminator).
//! - [`mlp_grad_of_input_gradient`] differentiates a directional derivative
//!   of a scalar-output network with respect to the parameters, which is
//!   what the gradient-penalty term of the Wasserstein critic needs.

use super::{Matrix, NumericsError, Result, SeededRng};

/// Output-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Tanh,
    Sigmoid,
    Linear,
    /// Row-wise softmax; gradients use the full Jacobian.
    Softmax,
}

/// Architecture of a dense network.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpSpec {
    /// Layer widths, input first: `[in, hidden..., out]`.
    pub layer_sizes: Vec<usize>,
    /// Negative-side slope of the hidden leaky-ReLU units.
    pub hidden_slope: f64,
    pub output: OutputActivation,
}

impl MlpSpec {
    pub fn new(
        layer_sizes: Vec<usize>,
        hidden_slope: f64,
        output: OutputActivation,
    ) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(NumericsError::Contract(format!(
                "an MLP needs at least input and output sizes, got {:?}",
                layer_sizes
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(NumericsError::Contract(format!(
                "all layer sizes must be >= 1, got {layer_sizes:?}"
            )));
        }
        if !hidden_slope.is_finite() {
            return Err(NumericsError::NonFinite {
                context: "hidden_slope".into(),
            });
        }
        Ok(Self {
            layer_sizes,
            hidden_slope,
            output,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Number of weight layers.
    pub fn n_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    fn is_output_layer(&self, layer: usize) -> bool {
        layer + 1 == self.n_layers()
    }
}

/// One dense layer: weights `(out x in)` plus a bias per output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// Parameters of a whole network. The same shape doubles as a gradient
/// container.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<LayerParams>,
}

/// Gradients share the parameter layout exactly.
pub type MlpGrads = MlpParams;

impl MlpParams {
    /// Randomly initialized parameters: hidden weights `N(0, sqrt(2/fan_in))`,
    /// output weights `N(0, sqrt(1/fan_in))`, biases zero. Draw order is
    /// layer by layer, weights row-major.
    pub fn init(spec: &MlpSpec, rng: &mut SeededRng) -> Self {
        let mut layers = Vec::with_capacity(spec.n_layers());
        for l in 0..spec.n_layers() {
            let fan_in = spec.layer_sizes[l];
            let fan_out = spec.layer_sizes[l + 1];
            let std = if spec.is_output_layer(l) {
                (1.0 / fan_in as f64).sqrt()
            } else {
                (2.0 / fan_in as f64).sqrt()
            };
            let mut weights = Matrix::zeros(fan_out, fan_in);
            for v in weights.data_mut() {
                *v = std * rng.next_gaussian();
            }
            layers.push(LayerParams {
                weights,
                bias: vec![0.0; fan_out],
            });
        }
        Self { layers }
    }

    /// Zero-filled container with the shapes of `spec`.
    pub fn zeros_like(spec: &MlpSpec) -> Self {
        let layers = (0..spec.n_layers())
            .map(|l| LayerParams {
                weights: Matrix::zeros(spec.layer_sizes[l + 1], spec.layer_sizes[l]),
                bias: vec![0.0; spec.layer_sizes[l + 1]],
            })
            .collect();
        Self { layers }
    }

    pub fn matches_spec(&self, spec: &MlpSpec) -> bool {
        self.layers.len() == spec.n_layers()
            && self.layers.iter().enumerate().all(|(l, layer)| {
                layer.weights.rows() == spec.layer_sizes[l + 1]
                    && layer.weights.cols() == spec.layer_sizes[l]
                    && layer.bias.len() == spec.layer_sizes[l + 1]
            })
    }

    pub fn n_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.data().len() + l.bias.len())
            .sum()
    }

    /// Global L2 norm over every weight and bias entry.
    pub fn global_norm(&self) -> f64 {
        let mut sq = 0.0;
        for layer in &self.layers {
            sq += crate::numerics::matrix::dot(layer.weights.data(), layer.weights.data());
            sq += crate::numerics::matrix::dot(&layer.bias, &layer.bias);
        }
        sq.sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for layer in &mut self.layers {
            for v in layer.weights.data_mut() {
                *v *= factor;
            }
            for v in &mut layer.bias {
                *v *= factor;
            }
        }
    }

    /// `self += scale * other`, entry by entry.
    pub fn add_scaled(&mut self, other: &MlpParams, scale: f64) -> Result<()> {
        if self.layers.len() != other.layers.len() {
            return Err(NumericsError::Contract(
                "parameter containers have different layer counts".into(),
            ));
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.add_scaled(&b.weights, scale)?;
            if a.bias.len() != b.bias.len() {
                return Err(NumericsError::Contract("bias length mismatch".into()));
            }
            crate::numerics::matrix::axpy(&mut a.bias, scale, &b.bias);
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.is_finite() && l.bias.iter().all(|v| v.is_finite()))
    }
}

/// Activations recorded by a forward pass, replayed by backward passes.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    input: Matrix,
    /// Pre-activation per layer.
    pre: Vec<Matrix>,
    /// Post-activation per layer.
    post: Vec<Matrix>,
}

impl ForwardCache {
    /// Network output (post-activation of the last layer).
    pub fn output(&self) -> &Matrix {
        self.post.last().expect("cache has at least one layer")
    }

    /// Post-activation of layer `layer` (0-based).
    pub fn hidden(&self, layer: usize) -> &Matrix {
        &self.post[layer]
    }

    pub fn input(&self) -> &Matrix {
        &self.input
    }

    fn check(&self, params: &MlpParams, spec: &MlpSpec) -> Result<()> {
        let n = spec.n_layers();
        if !params.matches_spec(spec) {
            return Err(NumericsError::StaleCache(
                "parameters do not match spec".into(),
            ));
        }
        if self.pre.len() != n || self.post.len() != n {
            return Err(NumericsError::StaleCache(format!(
                "cache has {} layers, network has {n}",
                self.pre.len()
            )));
        }
        if self.input.cols() != spec.input_dim() {
            return Err(NumericsError::StaleCache(format!(
                "cached input width {} does not match input dim {}",
                self.input.cols(),
                spec.input_dim()
            )));
        }
        let batch = self.input.rows();
        for l in 0..n {
            let width = spec.layer_sizes[l + 1];
            for (name, m) in [("pre", &self.pre[l]), ("post", &self.post[l])] {
                if m.rows() != batch || m.cols() != width {
                    return Err(NumericsError::StaleCache(format!(
                        "layer {l} {name} is {}x{}, expected {batch}x{width}",
                        m.rows(),
                        m.cols()
                    )));
                }
            }
        }
        Ok(())
    }
}

fn leaky(pre: f64, slope: f64) -> f64 {
    if pre > 0.0 {
        pre
    } else {
        slope * pre
    }
}

fn leaky_deriv(pre: f64, slope: f64) -> f64 {
    if pre > 0.0 {
        1.0
    } else {
        slope
    }
}

/// Numerically stable logistic function.
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softmax_rows(pre: &Matrix) -> Matrix {
    let mut out = pre.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

fn apply_activation(spec: &MlpSpec, layer: usize, pre: &Matrix) -> Matrix {
    if spec.is_output_layer(layer) {
        match spec.output {
            OutputActivation::Tanh => pre.map(f64::tanh),
            OutputActivation::Sigmoid => pre.map(sigmoid),
            OutputActivation::Linear => pre.clone(),
            OutputActivation::Softmax => softmax_rows(pre),
        }
    } else {
        pre.map(|v| leaky(v, spec.hidden_slope))
    }
}

/// d(post)/d(pre) for elementwise layers, given pre and post activations.
/// Softmax is handled separately in the backward pass.
fn elementwise_deriv(spec: &MlpSpec, layer: usize, pre: f64, post: f64) -> f64 {
    if spec.is_output_layer(layer) {
        match spec.output {
            OutputActivation::Tanh => 1.0 - post * post,
            OutputActivation::Sigmoid => post * (1.0 - post),
            OutputActivation::Linear => 1.0,
            OutputActivation::Softmax => unreachable!("softmax is not elementwise"),
        }
    } else {
        leaky_deriv(pre, spec.hidden_slope)
    }
}

/// Forward pass over a batch. Returns the output and a cache of every
/// layer's pre- and post-activation values for backprop.
pub fn mlp_forward(
    params: &MlpParams,
    spec: &MlpSpec,
    input: &Matrix,
) -> Result<(Matrix, ForwardCache)> {
    if !params.matches_spec(spec) {
        return Err(NumericsError::Contract(
            "parameters do not match spec".into(),
        ));
    }
    if input.cols() != spec.input_dim() {
        return Err(NumericsError::LayerShape {
            layer: 0,
            expected: spec.input_dim(),
            found: input.cols(),
        });
    }

    let n = spec.n_layers();
    let mut pre_cache = Vec::with_capacity(n);
    let mut post_cache = Vec::with_capacity(n);
    let mut current = input.clone();
    for l in 0..n {
        let layer = &params.layers[l];
        let mut pre = current.matmul_bt(&layer.weights)?;
        for r in 0..pre.rows() {
            for (v, &b) in pre.row_mut(r).iter_mut().zip(&layer.bias) {
                *v += b;
            }
        }
        let post = apply_activation(spec, l, &pre);
        pre_cache.push(pre);
        current = post.clone();
        post_cache.push(post);
    }

    Ok((
        current,
        ForwardCache {
            input: input.clone(),
            pre: pre_cache,
            post: post_cache,
        },
    ))
}

/// Convert a gradient w.r.t. a layer's post-activation into one w.r.t. its
/// pre-activation.
fn post_to_pre_grad(spec: &MlpSpec, layer: usize, cache: &ForwardCache, grad: &Matrix) -> Matrix {
    if spec.is_output_layer(layer) && spec.output == OutputActivation::Softmax {
        // Full softmax Jacobian per row: d_pre_i = y_i * (g_i - sum_j g_j y_j).
        let y = &cache.post[layer];
        let mut out = Matrix::zeros(grad.rows(), grad.cols());
        for r in 0..grad.rows() {
            let yr = y.row(r);
            let gr = grad.row(r);
            let dot: f64 = yr.iter().zip(gr).map(|(&a, &b)| a * b).sum();
            for (o, (&yi, &gi)) in out.row_mut(r).iter_mut().zip(yr.iter().zip(gr)) {
                *o = yi * (gi - dot);
            }
        }
        out
    } else {
        let pre = &cache.pre[layer];
        let post = &cache.post[layer];
        let mut out = grad.clone();
        for (i, v) in out.data_mut().iter_mut().enumerate() {
            let r = i / pre.cols();
            let c = i % pre.cols();
            *v *= elementwise_deriv(spec, layer, pre.get(r, c), post.get(r, c));
        }
        out
    }
}

/// Reverse pass from a gradient w.r.t. the network output.
///
/// Returns gradients with the exact shapes of `params` plus the gradient
/// w.r.t. the forward input. Parameter gradients are summed over the batch.
pub fn mlp_backward(
    params: &MlpParams,
    spec: &MlpSpec,
    cache: &ForwardCache,
    output_grad: &Matrix,
) -> Result<(MlpGrads, Matrix)> {
    mlp_backward_with_taps(params, spec, cache, Some(output_grad), &[])
}

/// Reverse pass with extra gradients injected at hidden layers.
///
/// `taps` holds `(layer index, gradient w.r.t. that layer's post-activation)`
/// pairs; they are added to the backpropagated signal as the sweep passes
/// each layer. `output_grad == None` starts the sweep from zeros, which is
/// useful when a loss depends only on hidden activations.
pub fn mlp_backward_with_taps(
    params: &MlpParams,
    spec: &MlpSpec,
    cache: &ForwardCache,
    output_grad: Option<&Matrix>,
    taps: &[(usize, &Matrix)],
) -> Result<(MlpGrads, Matrix)> {
    cache.check(params, spec)?;
    let n = spec.n_layers();
    let batch = cache.input.rows();

    let expect_shape = |name: &str, layer: usize, m: &Matrix| -> Result<()> {
        let width = spec.layer_sizes[layer + 1];
        if m.rows() != batch || m.cols() != width {
            return Err(NumericsError::DimensionMismatch {
                context: format!("{name} at layer {layer}"),
                expected: format!("{batch}x{width}"),
                found: format!("{}x{}", m.rows(), m.cols()),
            });
        }
        Ok(())
    };

    let mut post_grad = match output_grad {
        Some(g) => {
            expect_shape("output_grad", n - 1, g)?;
            g.clone()
        }
        None => Matrix::zeros(batch, spec.output_dim()),
    };
    for &(layer, tap) in taps {
        if layer >= n {
            return Err(NumericsError::Contract(format!(
                "tap layer {layer} out of range for {n} layers"
            )));
        }
        expect_shape("tap", layer, tap)?;
        if layer == n - 1 {
            post_grad.add_scaled(tap, 1.0)?;
        }
    }

    let mut grads = MlpParams::zeros_like(spec);
    for l in (0..n).rev() {
        let pre_grad = post_to_pre_grad(spec, l, cache, &post_grad);
        let layer_input = if l == 0 {
            &cache.input
        } else {
            &cache.post[l - 1]
        };
        grads.layers[l].weights = pre_grad.matmul_at(layer_input)?;
        let bias = &mut grads.layers[l].bias;
        for r in 0..pre_grad.rows() {
            for (b, &g) in bias.iter_mut().zip(pre_grad.row(r)) {
                *b += g;
            }
        }
        post_grad = pre_grad.matmul(&params.layers[l].weights)?;
        if l > 0 {
            for &(layer, tap) in taps {
                if layer == l - 1 {
                    post_grad.add_scaled(tap, 1.0)?;
                }
            }
        }
    }

    Ok((grads, post_grad))
}

fn leaky_second_deriv() -> f64 {
    0.0 // piecewise linear
}

/// Parameter gradient of a directional input derivative.
///
/// For a scalar-output network `f`, computes
/// `∇_θ Σ_s tangentᵀ_s ∇_x f_θ(x_s)` exactly, by reverse-differentiating a
/// forward-tangent (JVP) evaluation. This is the second-order quantity the
/// gradient-penalty term needs: with `tangent` set to the penalty's
/// per-sample cotangent, the result is the penalty's parameter gradient.
///
/// Requires an elementwise output activation (softmax is rejected) and
/// output width 1.
pub fn mlp_grad_of_input_gradient(
    params: &MlpParams,
    spec: &MlpSpec,
    input: &Matrix,
    tangent: &Matrix,
) -> Result<MlpGrads> {
    if spec.output == OutputActivation::Softmax {
        return Err(NumericsError::Contract(
            "input-gradient differentiation does not support softmax output".into(),
        ));
    }
    if spec.output_dim() != 1 {
        return Err(NumericsError::Contract(format!(
            "input-gradient differentiation needs a scalar output, got width {}",
            spec.output_dim()
        )));
    }
    if tangent.rows() != input.rows() || tangent.cols() != input.cols() {
        return Err(NumericsError::DimensionMismatch {
            context: "mlp_grad_of_input_gradient tangent".into(),
            expected: format!("{}x{}", input.rows(), input.cols()),
            found: format!("{}x{}", tangent.rows(), tangent.cols()),
        });
    }

    let n = spec.n_layers();
    let batch = input.rows();

    // Forward with tangents: a = post, t = tangent of post, per layer
    // z_l = a_{l-1} W^T + b      s_l = t_{l-1} W^T
    // a_l = phi(z_l)             t_l = phi'(z_l) .* s_l
    let (_, cache) = mlp_forward(params, spec, input)?;
    let mut s_cache: Vec<Matrix> = Vec::with_capacity(n);
    let mut t_cache: Vec<Matrix> = Vec::with_capacity(n);
    let mut t_prev = tangent.clone();
    for l in 0..n {
        let w = &params.layers[l].weights;
        let s = t_prev.matmul_bt(w)?;
        let mut t = s.clone();
        for (i, v) in t.data_mut().iter_mut().enumerate() {
            let r = i / s.cols();
            let c = i % s.cols();
            *v *= elementwise_deriv(spec, l, cache.pre[l].get(r, c), cache.post[l].get(r, c));
        }
        s_cache.push(s);
        t_prev = t.clone();
        t_cache.push(t);
    }

    // Reverse through the tangent program. Cotangents: t_bar for the tangent
    // stream, a_bar for the activation stream.
    let mut grads = MlpParams::zeros_like(spec);
    let mut t_bar = Matrix::zeros(batch, 1);
    for v in t_bar.data_mut() {
        *v = 1.0; // d/dt_L of sum over samples of the scalar tangent output
    }
    let mut a_bar = Matrix::zeros(batch, 1);

    for l in (0..n).rev() {
        let width = spec.layer_sizes[l + 1];
        let pre = &cache.pre[l];
        let post = &cache.post[l];
        let s = &s_cache[l];

        // t_l = phi'(z_l) .* s_l:
        //   s_bar = phi'(z_l) .* t_bar
        //   z_bar += phi''(z_l) .* s_l .* t_bar
        // a_l = phi(z_l):
        //   z_bar += phi'(z_l) .* a_bar
        let mut s_bar = Matrix::zeros(batch, width);
        let mut z_bar = Matrix::zeros(batch, width);
        for r in 0..batch {
            for c in 0..width {
                let zp = pre.get(r, c);
                let ap = post.get(r, c);
                let d1 = elementwise_deriv(spec, l, zp, ap);
                let d2 = if spec.is_output_layer(l) {
                    match spec.output {
                        OutputActivation::Tanh => -2.0 * ap * (1.0 - ap * ap),
                        OutputActivation::Sigmoid => ap * (1.0 - ap) * (1.0 - 2.0 * ap),
                        OutputActivation::Linear => 0.0,
                        OutputActivation::Softmax => unreachable!(),
                    }
                } else {
                    leaky_second_deriv()
                };
                let tb = t_bar.get(r, c);
                s_bar.set(r, c, d1 * tb);
                z_bar.set(r, c, d2 * s.get(r, c) * tb + d1 * a_bar.get(r, c));
            }
        }

        // z_l = a_{l-1} W^T + b and s_l = t_{l-1} W^T:
        //   W_bar += z_barᵀ a_{l-1} + s_barᵀ t_{l-1}
        //   b_bar += column sums of z_bar
        //   a_bar_{l-1} = z_bar W ; t_bar_{l-1} = s_bar W
        let a_prev = if l == 0 { input } else { &cache.post[l - 1] };
        let t_prev = if l == 0 { tangent } else { &t_cache[l - 1] };
        let mut w_bar = z_bar.matmul_at(a_prev)?;
        w_bar.add_scaled(&s_bar.matmul_at(t_prev)?, 1.0)?;
        grads.layers[l].weights = w_bar;
        for r in 0..batch {
            for (b, &g) in grads.layers[l].bias.iter_mut().zip(z_bar.row(r)) {
                *b += g;
            }
        }

        let w = &params.layers[l].weights;
        a_bar = z_bar.matmul(w)?;
        t_bar = s_bar.matmul(w)?;
    }

    Ok(grads)
}
