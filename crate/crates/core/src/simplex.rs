//! Adaptive Metropolis–Hastings on the probability simplex.
//!
//! The state is held as log-probabilities and targets are densities with
//! respect to `Π dx_l / x_l`, under which the move below has unit Jacobian.
//! Each step moves one coordinate on the logit scale and rescales the
//! others so the vector stays on the simplex. Coordinates are visited in a
//! fixed cycle. Step scales follow a Robbins–Monro recursion until frozen.

use rand::Rng;
use thiserror::Error;

use crate::dist::{softplus, standard_normal};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimplexError {
    #[error("adaptation requested after the kernel was frozen")]
    AdaptAfterFreeze,
    #[error("expected {expected} acceptance rates, got {found}")]
    RateLength { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexKernel {
    log_scales: Vec<f64>,
    window_accepted: Vec<u64>,
    window_proposed: Vec<u64>,
    accepted: Vec<u64>,
    proposed: Vec<u64>,
    target_acceptance: f64,
    adaptations: u64,
    frozen: bool,
    cursor: usize,
}

impl SimplexKernel {
    pub fn new(dim: usize, initial_scale: f64, target_acceptance: f64) -> Self {
        debug_assert!(initial_scale > 0.0 && initial_scale.is_finite());
        Self {
            log_scales: vec![initial_scale.ln(); dim],
            window_accepted: vec![0; dim],
            window_proposed: vec![0; dim],
            accepted: vec![0; dim],
            proposed: vec![0; dim],
            target_acceptance,
            adaptations: 0,
            frozen: false,
            cursor: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.log_scales.len()
    }

    pub fn scales(&self) -> Vec<f64> {
        self.log_scales.iter().map(|s| s.exp()).collect()
    }

    pub fn log_scales(&self) -> &[f64] {
        &self.log_scales
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn target_acceptance(&self) -> f64 {
        self.target_acceptance
    }

    /// Accepted / proposed over the kernel's lifetime.
    pub fn acceptance_rate(&self) -> f64 {
        let p: u64 = self.proposed.iter().sum();
        if p == 0 {
            0.0
        } else {
            self.accepted.iter().sum::<u64>() as f64 / p as f64
        }
    }

    pub fn reset_counters(&mut self) {
        self.accepted.iter_mut().for_each(|c| *c = 0);
        self.proposed.iter_mut().for_each(|c| *c = 0);
    }

    /// `(accepted, proposed)` over the kernel's lifetime.
    pub fn counts(&self) -> (u64, u64) {
        (self.accepted.iter().sum(), self.proposed.iter().sum())
    }

    /// One single-coordinate step on the log-probabilities `ln_x`.
    /// `current_log_target` must be the log target at `ln_x`; the value at
    /// the returned state is given back.
    pub fn step<R, F>(
        &mut self,
        ln_x: &mut [f64],
        current_log_target: f64,
        log_target: &mut F,
        rng: &mut R,
    ) -> (bool, f64)
    where
        R: Rng + ?Sized,
        F: FnMut(&[f64]) -> f64,
    {
        let dim = ln_x.len();
        debug_assert_eq!(dim, self.dim());
        if dim < 2 {
            return (false, current_log_target);
        }
        let i = self.cursor;
        self.cursor = (self.cursor + 1) % dim;
        self.proposed[i] += 1;
        self.window_proposed[i] += 1;

        let top = ln_x
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        let ln_rest = top
            + ln_x
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, &v)| (v - top).exp())
                .sum::<f64>()
                .ln();
        let y = ln_x[i] - ln_rest;
        let y_new = y + self.log_scales[i].exp() * standard_normal(rng);
        if !y.is_finite() || !y_new.is_finite() {
            return (false, current_log_target);
        }
        let shift = -softplus(y_new) - ln_rest;
        let mut proposal = ln_x.to_vec();
        for (k, v) in proposal.iter_mut().enumerate() {
            *v = if k == i { -softplus(-y_new) } else { *v + shift };
        }
        let proposed_log_target = log_target(&proposal);
        if !proposed_log_target.is_finite() {
            return (false, current_log_target);
        }
        let log_ratio = proposed_log_target - current_log_target;
        let accept = log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio;
        if accept {
            ln_x.copy_from_slice(&proposal);
            self.accepted[i] += 1;
            self.window_accepted[i] += 1;
            (true, proposed_log_target)
        } else {
            (false, current_log_target)
        }
    }

    /// One step per coordinate. Returns the number of accepted moves.
    pub fn sweep<R, F>(&mut self, ln_x: &mut [f64], mut log_target: F, rng: &mut R) -> usize
    where
        R: Rng + ?Sized,
        F: FnMut(&[f64]) -> f64,
    {
        let mut current = log_target(ln_x);
        let mut accepted = 0;
        for _ in 0..ln_x.len() {
            let (a, lp) = self.step(ln_x, current, &mut log_target, rng);
            current = lp;
            accepted += a as usize;
        }
        accepted
    }

    /// Robbins–Monro update `log σ_i += t^(-0.6) (rate_i − target)`.
    pub fn adapt(&mut self, window_rates: &[f64]) -> Result<(), SimplexError> {
        if self.frozen {
            return Err(SimplexError::AdaptAfterFreeze);
        }
        if window_rates.len() != self.dim() {
            return Err(SimplexError::RateLength {
                expected: self.dim(),
                found: window_rates.len(),
            });
        }
        self.adaptations += 1;
        let gamma = (self.adaptations as f64).powf(-0.6);
        for (s, r) in self.log_scales.iter_mut().zip(window_rates) {
            *s += gamma * (r - self.target_acceptance);
        }
        Ok(())
    }

    /// Adapts from the acceptance counts accumulated since the previous
    /// call, then clears them. Coordinates not proposed are left alone.
    pub fn adapt_from_window(&mut self) -> Result<(), SimplexError> {
        if self.frozen {
            return Err(SimplexError::AdaptAfterFreeze);
        }
        let rates: Vec<f64> = self
            .window_accepted
            .iter()
            .zip(&self.window_proposed)
            .map(|(&a, &p)| if p == 0 { self.target_acceptance } else { a as f64 / p as f64 })
            .collect();
        self.window_accepted.iter_mut().for_each(|c| *c = 0);
        self.window_proposed.iter_mut().for_each(|c| *c = 0);
        self.adapt(&rates)
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }
}
