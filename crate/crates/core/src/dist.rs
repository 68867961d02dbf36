//! Log-space sampling and density helpers shared by the prior simulators
//! and the Gibbs sampler.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;

/// Every Dirichlet parameter is floored here, in draws and densities alike.
/// This bounds log-weights below by roughly `-4e11` and stops underflow
/// from compounding down a hypernode chain.
pub const MIN_DIRICHLET_PARAM: f64 = 1e-10;

/// `ln MIN_DIRICHLET_PARAM`.
pub const LN_MIN_DIRICHLET_PARAM: f64 = -23.025_850_929_940_457;

/// Smallest weight stored in a simplex vector; keeps every log finite.
pub const MIN_WEIGHT: f64 = 1e-300;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `ln X` for `X ~ Gamma(shape, 1)`.
///
/// Shapes below one use `Gamma(shape) = Gamma(shape + 1) · U^(1/shape)`
/// evaluated in log space, so tiny shapes never underflow to `ln 0`.
pub fn ln_gamma_draw<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0 && shape.is_finite(), "bad gamma shape {shape}");
    if shape >= 1.0 {
        let g: f64 = Gamma::new(shape, 1.0).expect("valid shape").sample(rng);
        g.ln()
    } else {
        let g: f64 = Gamma::new(shape + 1.0, 1.0).expect("valid shape").sample(rng);
        let u: f64 = rng.random::<f64>();
        // random() is in [0, 1); 1 - u is in (0, 1].
        g.ln() + (1.0 - u).ln() / shape
    }
}

/// `ln X` for `X ~ Gamma(exp(ln_shape), 1)`, valid for shapes far below
/// the smallest positive double. The result is never below `-f64::MAX`.
pub fn ln_gamma_draw_ln_shape<R: Rng + ?Sized>(ln_shape: f64, rng: &mut R) -> f64 {
    debug_assert!(ln_shape < f64::INFINITY && !ln_shape.is_nan(), "bad log shape {ln_shape}");
    if ln_shape >= -20.0 {
        return ln_gamma_draw(ln_shape.exp(), rng);
    }
    let g: f64 = Gamma::new(1.0 + ln_shape.exp(), 1.0).expect("valid shape").sample(rng);
    let t = -(1.0 - rng.random::<f64>()).ln();
    if t == 0.0 {
        return g.ln();
    }
    (g.ln() - (t.ln() - ln_shape).exp()).max(-f64::MAX)
}

/// `ln Γ(exp(ln_a))`, accurate when `a` underflows.
pub fn ln_gamma_of_ln(ln_a: f64) -> f64 {
    if ln_a < -30.0 {
        -ln_a - EULER_GAMMA * ln_a.exp()
    } else {
        ln_gamma(ln_a.exp())
    }
}

pub fn softplus(x: f64) -> f64 {
    if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() }
}

/// Normalizes unnormalized log weights to log-probabilities.
pub fn normalize_ln(logs: &mut [f64]) {
    let total = log_sum_exp(logs);
    for l in logs.iter_mut() {
        *l -= total;
    }
}

/// Log-weights of a `Dir(exp(ln_params))` draw, parameters floored at
/// [`MIN_DIRICHLET_PARAM`].
pub fn ln_dirichlet_draw<R: Rng + ?Sized>(ln_params: &[f64], rng: &mut R) -> Vec<f64> {
    let mut logs: Vec<f64> = ln_params
        .iter()
        .map(|&a| ln_gamma_draw_ln_shape(a.max(LN_MIN_DIRICHLET_PARAM), rng))
        .collect();
    normalize_ln(&mut logs);
    logs
}

pub fn gamma_draw<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    ln_gamma_draw(shape, rng).exp()
}

/// Draws from `Dir(params)`; parameters are floored at
/// [`MIN_DIRICHLET_PARAM`] and entries at [`MIN_WEIGHT`].
pub fn dirichlet<R: Rng + ?Sized>(params: &[f64], rng: &mut R) -> Vec<f64> {
    let logs: Vec<f64> = params
        .iter()
        .map(|&a| ln_gamma_draw(a.max(MIN_DIRICHLET_PARAM), rng))
        .collect();
    normalize_logs(&logs)
}

/// Turns unnormalized log weights into a simplex vector.
pub fn normalize_logs(logs: &[f64]) -> Vec<f64> {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logs.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    floor_simplex(&mut w);
    w
}

/// Raises entries below [`MIN_WEIGHT`] and renormalizes.
pub fn floor_simplex(w: &mut [f64]) {
    if w.iter().any(|&x| x < MIN_WEIGHT) {
        for x in w.iter_mut() {
            *x = x.max(MIN_WEIGHT);
        }
        let total: f64 = w.iter().sum();
        for x in w.iter_mut() {
            *x /= total;
        }
    }
}

pub fn log_sum_exp(logs: &[f64]) -> f64 {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + logs.iter().map(|&l| (l - max).exp()).sum::<f64>().ln()
}

/// Samples an index from unnormalized log probabilities. Returns `None` when
/// every entry is `-inf` (or NaN).
pub fn categorical_from_logs<R: Rng + ?Sized>(logs: &[f64], rng: &mut R) -> Option<usize> {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let total: f64 = logs.iter().map(|&l| (l - max).exp()).sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (k, &l) in logs.iter().enumerate() {
        let p = (l - max).exp();
        if p > 0.0 {
            last = k;
            if u < p {
                return Some(k);
            }
            u -= p;
        }
    }
    Some(last)
}

/// Samples an index with probability proportional to `weights`.
pub fn categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (k, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last = k;
            if u < w {
                return k;
            }
            u -= w;
        }
    }
    last
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// `ln B(a) = Σ ln Γ(a_l) − ln Γ(Σ a_l)`.
pub fn ln_multivariate_beta(params: &[f64]) -> f64 {
    let total: f64 = params.iter().sum();
    params.iter().map(|&a| ln_gamma(a)).sum::<f64>() - ln_gamma(total)
}

/// Log density of `Dir(concentration · base)` at `x`, with respect to
/// Lebesgue measure on the first `L − 1` coordinates.
pub fn ln_dirichlet_scaled(x: &[f64], concentration: f64, base: &[f64]) -> f64 {
    let mut acc = ln_gamma(concentration * base.iter().sum::<f64>());
    for (&xl, &bl) in x.iter().zip(base) {
        let a = concentration * bl;
        acc += (a - 1.0) * xl.ln() - ln_gamma(a);
    }
    acc
}

/// `a · ln x` from `ln a` and `ln x ≤ 0`, exact when `a` underflows and
/// `ln x` is correspondingly huge.
pub fn scaled_log(ln_a: f64, ln_x: f64) -> f64 {
    if ln_x < 0.0 { -(ln_a + (-ln_x).ln()).exp() } else { 0.0 }
}

/// Log density of `Dir(concentration · base)` with respect to
/// `Π dx_l / x_l`, at the point with log-coordinates `ln_x` and with the
/// base given in logs. Differs from the Lebesgue density by `Σ ln x_l`.
/// Parameters are floored as in [`ln_dirichlet_draw`].
pub fn ln_dirichlet_log_measure(ln_x: &[f64], concentration: f64, ln_base: &[f64]) -> f64 {
    let ln_c = concentration.ln();
    let mut total = 0.0;
    let mut acc = 0.0;
    for (&lx, &lb) in ln_x.iter().zip(ln_base) {
        let ln_a = (ln_c + lb).max(LN_MIN_DIRICHLET_PARAM);
        total += ln_a.exp();
        acc += scaled_log(ln_a, lx) - ln_gamma_of_ln(ln_a);
    }
    acc + ln_gamma(total)
}

/// Log density of `Dir(params)` at `x`.
pub fn ln_dirichlet(x: &[f64], params: &[f64]) -> f64 {
    let mut acc = -ln_multivariate_beta(params);
    for (&xl, &a) in x.iter().zip(params) {
        acc += (a - 1.0) * xl.ln();
    }
    acc
}

/// Log density of `Gamma(shape, rate 1)` at `x`.
pub fn ln_gamma_density(x: f64, shape: f64) -> f64 {
    (shape - 1.0) * x.ln() - x - ln_gamma(shape)
}
