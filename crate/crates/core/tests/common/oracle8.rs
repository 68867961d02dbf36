//! Hand-transcribed full conditionals for the 8-group experimental DAG,
//! written variable by variable with 1-based names. Used as an oracle for
//! the mechanically assembled targets.
//!
//! Differences from a literal reading of the printed formulas:
//! * the root-weight kernel carries `m + α₁/L − 1`,
//! * the `ν₄` conditional uses `β₈`,
//! * the `α₅..α₇` conditionals use `η` inside the last gamma factor.

#![allow(dead_code)]

use gdp_core::gibbs::ChainState;
use statrs::function::gamma::ln_gamma;

pub struct Oracle8 {
    pub alpha0: f64,
    pub l: usize,
    /// `a[1..=8]`.
    pub a: [f64; 9],
    /// `b[1..=8]`.
    pub b: Vec<Vec<f64>>,
    /// `nu[1..=4]`.
    pub nu: Vec<Vec<f64>>,
    pub eta: Vec<f64>,
    pub m1: Vec<f64>,
}

fn ln_b(v: &[f64]) -> f64 {
    v.iter().map(|&x| ln_gamma(x)).sum::<f64>() - ln_gamma(v.iter().sum())
}

fn scale(c: f64, v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| c * x).collect()
}

impl Oracle8 {
    pub fn from_state(state: &ChainState, alpha0: f64) -> Self {
        let exp = |v: &Vec<f64>| v.iter().map(|x| x.exp()).collect::<Vec<f64>>();
        let l = state.weights.ln_beta[0].len();
        let mut a = [0.0; 9];
        for j in 1..=8 {
            a[j] = state.alphas[j - 1];
        }
        let mut b = vec![Vec::new()];
        b.extend(state.weights.ln_beta.iter().map(exp));
        let h = &state.weights.ln_hidden;
        Self {
            alpha0,
            l,
            a,
            b,
            nu: vec![Vec::new(), exp(&h[4][0]), exp(&h[5][0]), exp(&h[6][0]), exp(&h[7][0])],
            eta: exp(&h[7][1]),
            m1: state.counts[0].iter().map(|&c| c as f64).collect(),
        }
    }

    pub fn beta1(&self, b1: &[f64]) -> f64 {
        let a = &self.a;
        let (a24, a23, a34, a234) = (a[2] + a[4], a[2] + a[3], a[3] + a[4], 2.0 * (a[2] + a[3] + a[4]));
        let mut acc = 0.0;
        for l in 0..self.l {
            let x = b1[l];
            acc += (self.m1[l] + a[1] / self.l as f64 - 1.0) * x.ln();
            let inner = a[2] * self.b[2][l].ln()
                + a[3] * self.b[3][l].ln()
                + a[4] * self.b[4][l].ln()
                + a24 * self.nu[1][l].ln()
                + a23 * self.nu[2][l].ln()
                + a34 * self.nu[3][l].ln()
                + a234 * self.eta[l].ln();
            acc += x * inner;
            acc -= ln_gamma(a24 * x) + ln_gamma(a23 * x) + ln_gamma(a34 * x) + ln_gamma(a234 * x);
            acc -= ln_gamma(a[2] * x) + ln_gamma(a[3] * x) + ln_gamma(a[4] * x);
        }
        acc
    }

    fn nu_small(&self, v: &[f64], child_alpha: f64, child_beta: &[f64], up: f64) -> f64 {
        let mut acc = -ln_b(&scale(child_alpha, v));
        for l in 0..self.l {
            acc += child_alpha * v[l] * child_beta[l].ln() + (up * self.b[1][l] - 1.0) * v[l].ln();
        }
        acc
    }

    pub fn nu1(&self, v: &[f64]) -> f64 {
        self.nu_small(v, self.a[5], &self.b[5], self.a[2] + self.a[4])
    }

    pub fn nu2(&self, v: &[f64]) -> f64 {
        self.nu_small(v, self.a[6], &self.b[6], self.a[2] + self.a[3])
    }

    pub fn nu3(&self, v: &[f64]) -> f64 {
        self.nu_small(v, self.a[7], &self.b[7], self.a[3] + self.a[4])
    }

    pub fn nu4(&self, v: &[f64]) -> f64 {
        let a = &self.a;
        let mut acc = -ln_b(&scale(a[8], v));
        for l in 0..self.l {
            acc += a[8] * v[l] * self.b[8][l].ln() + ((a[5] + a[6] + a[7]) * self.eta[l] - 1.0) * v[l].ln();
        }
        acc
    }

    pub fn eta(&self, v: &[f64]) -> f64 {
        let a = &self.a;
        let c = a[5] + a[6] + a[7];
        let mut acc = -ln_b(&scale(c, v));
        for l in 0..self.l {
            acc += (2.0 * (a[2] + a[3] + a[4]) * self.b[1][l] - 1.0) * v[l].ln() + c * v[l] * self.nu[4][l].ln();
        }
        acc
    }

    pub fn alpha1(&self, x: f64) -> f64 {
        let a = &self.a;
        let lf = self.l as f64;
        let mut acc = -x + (self.alpha0 - 1.0) * x.ln() + x * (a[2].ln() + a[3].ln() + a[4].ln());
        acc -= 3.0 * ln_gamma(x);
        acc -= ln_b(&vec![x / lf; self.l]);
        acc += self.b[1].iter().map(|b| (x / lf) * b.ln()).sum::<f64>();
        acc
    }

    /// Shared form of the `α₂, α₃, α₄` conditionals. `kids` are the two
    /// children, `nus` the two hidden vectors whose prior involves the node,
    /// and `partners` the other layer-1 node in each of those two sums.
    fn alpha_layer1(&self, x: f64, own_beta: usize, kids: [usize; 2], nus: [usize; 2], partners: [usize; 2]) -> f64 {
        let a = &self.a;
        let p0 = x + a[partners[0]];
        let p1 = x + a[partners[1]];
        let triple = 2.0 * (x + a[partners[0]] + a[partners[1]]);
        let mut acc = -x + (a[1] - 1.0) * x.ln() + x * (a[kids[0]].ln() + a[kids[1]].ln());
        for l in 0..self.l {
            let b1 = self.b[1][l];
            acc += x
                * (b1 * self.b[own_beta][l].ln()
                    + b1 * self.nu[nus[0]][l].ln()
                    + b1 * self.nu[nus[1]][l].ln()
                    + 2.0 * b1 * self.eta[l].ln());
        }
        acc += ln_gamma(x) + ln_gamma(triple);
        for l in 0..self.l {
            let b1 = self.b[1][l];
            acc -= ln_gamma(x * b1) + ln_gamma(p0 * b1) + ln_gamma(p1 * b1) + ln_gamma(triple * b1);
        }
        acc
    }

    pub fn alpha2(&self, x: f64) -> f64 {
        // Children 5, 6; ν₁ (with α₄), ν₂ (with α₃).
        self.alpha_layer1(x, 2, [5, 6], [1, 2], [4, 3])
    }

    pub fn alpha3(&self, x: f64) -> f64 {
        // Children 6, 7; ν₂ (with α₂), ν₃ (with α₄).
        self.alpha_layer1(x, 3, [6, 7], [2, 3], [2, 4])
    }

    pub fn alpha4(&self, x: f64) -> f64 {
        // Children 5, 7; ν₁ (with α₂), ν₃ (with α₃).
        self.alpha_layer1(x, 4, [5, 7], [1, 3], [2, 3])
    }

    fn alpha_layer2(&self, x: f64, shape: f64, own_beta: usize, nu: usize, others: [usize; 2]) -> f64 {
        let a = &self.a;
        let c = x + a[others[0]] + a[others[1]];
        let mut acc = -x + (shape - 1.0) * x.ln() + x * a[8].ln();
        for l in 0..self.l {
            acc += x * (self.nu[nu][l] * self.b[own_beta][l].ln() + self.eta[l] * self.nu[4][l].ln());
        }
        acc += ln_gamma(x);
        for l in 0..self.l {
            acc -= ln_gamma(x * self.nu[nu][l]) + ln_gamma(c * self.eta[l]);
        }
        acc
    }

    pub fn alpha5(&self, x: f64) -> f64 {
        self.alpha_layer2(x, self.a[2] + self.a[4], 5, 1, [6, 7])
    }

    pub fn alpha6(&self, x: f64) -> f64 {
        self.alpha_layer2(x, self.a[2] + self.a[3], 6, 2, [5, 7])
    }

    pub fn alpha7(&self, x: f64) -> f64 {
        self.alpha_layer2(x, self.a[3] + self.a[4], 7, 3, [5, 6])
    }

    pub fn alpha8(&self, x: f64) -> f64 {
        let a = &self.a;
        let mut acc = -x + (a[5] + a[6] + a[7] - 1.0) * x.ln();
        for l in 0..self.l {
            acc += x * self.nu[4][l] * self.b[8][l].ln();
        }
        acc += ln_gamma(x);
        for l in 0..self.l {
            acc -= ln_gamma(x * self.nu[4][l]);
        }
        acc
    }

    pub fn alpha(&self, node: usize, x: f64) -> f64 {
        match node {
            1 => self.alpha1(x),
            2 => self.alpha2(x),
            3 => self.alpha3(x),
            4 => self.alpha4(x),
            5 => self.alpha5(x),
            6 => self.alpha6(x),
            7 => self.alpha7(x),
            8 => self.alpha8(x),
            _ => panic!("node {node} out of range"),
        }
    }
}

use gdp_core::dag::{Dag, LayeredDag};
use gdp_core::dist::dirichlet;
use gdp_core::gibbs::{GdpModel, WeightSlot};
use gdp_core::model::{AlphaVector, GroupedDataset, NiwParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Worst scaled discrepancy `|Δmech − Δoracle| / max(1, |Δoracle|)` per
/// target, where `Δ` is a log-density difference between two points.
pub struct OracleComparison {
    pub target: String,
    pub worst: f64,
}

fn random_simplex<R: Rng>(l: usize, rng: &mut R) -> Vec<f64> {
    dirichlet(&vec![1.0; l], rng)
}

fn ln(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.ln()).collect()
}

/// Sampler targets are densities against `Π dx_l / x_l`; the transcription
/// is against Lebesgue measure.
fn lebesgue(target: f64, x: &[f64]) -> f64 {
    target - x.iter().map(|v| v.ln()).sum::<f64>()
}

/// Compares every Metropolis target of the 8-group model with the
/// transcription at `points` random states.
pub fn compare_all(seed: u64, points: usize, truncation: usize) -> Vec<OracleComparison> {
    let alpha0 = 5.0;
    let ldag = LayeredDag::new(Dag::experimental()).unwrap();
    let model = GdpModel::new(ldag, truncation, alpha0, NiwParams::weakly_informative(2)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = GroupedDataset::from_rows(2, (0..8).map(|_| vec![vec![0.0, 0.0]; 3]).collect()).unwrap();
    let names = [
        "root beta", "nu1", "nu2", "nu3", "nu4", "eta", "alpha1", "alpha2", "alpha3", "alpha4", "alpha5",
        "alpha6", "alpha7", "alpha8",
    ];
    let mut worst = vec![0.0f64; names.len()];
    let hidden = [
        WeightSlot::Hidden { node: 4, generation: 1 },
        WeightSlot::Hidden { node: 5, generation: 1 },
        WeightSlot::Hidden { node: 6, generation: 1 },
        WeightSlot::Hidden { node: 7, generation: 1 },
        WeightSlot::Hidden { node: 7, generation: 2 },
    ];
    for _ in 0..points {
        let mut state = model.init_state(&data, &mut rng).unwrap();
        state.alphas = AlphaVector::new((0..8).map(|_| rng.random_range(0.2..6.0)).collect()).unwrap();
        for v in state.weights.ln_beta.iter_mut().chain(state.weights.ln_hidden.iter_mut().flatten()) {
            *v = ln(&random_simplex(truncation, &mut rng));
        }
        state.counts[0] = (0..truncation).map(|_| rng.random_range(0..20)).collect();
        let oracle = Oracle8::from_state(&state, alpha0);
        let mut record = |k: usize, mech: f64, orac: f64| {
            let err = (mech - orac).abs() / orac.abs().max(1.0);
            worst[k] = worst[k].max(if err.is_nan() { f64::INFINITY } else { err });
        };

        let (x, y) = (random_simplex(truncation, &mut rng), random_simplex(truncation, &mut rng));
        record(
            0,
            lebesgue(model.log_target_root_beta(&state, &ln(&x)), &x)
                - lebesgue(model.log_target_root_beta(&state, &ln(&y)), &y),
            oracle.beta1(&x) - oracle.beta1(&y),
        );
        let oracle_hidden: [&dyn Fn(&[f64]) -> f64; 5] = [
            &|v| oracle.nu1(v),
            &|v| oracle.nu2(v),
            &|v| oracle.nu3(v),
            &|v| oracle.nu4(v),
            &|v| oracle.eta(v),
        ];
        for (k, (&slot, f)) in hidden.iter().zip(oracle_hidden.iter()).enumerate() {
            let (x, y) = (random_simplex(truncation, &mut rng), random_simplex(truncation, &mut rng));
            record(
                k + 1,
                lebesgue(model.log_target_hidden(&state, slot, &ln(&x)), &x)
                    - lebesgue(model.log_target_hidden(&state, slot, &ln(&y)), &y),
                f(&x) - f(&y),
            );
        }
        for node in 1..=8 {
            let (x, y) = (rng.random_range(0.1..8.0), rng.random_range(0.1..8.0));
            record(
                5 + node,
                model.log_target_alpha(&state, node - 1, x) - model.log_target_alpha(&state, node - 1, y),
                oracle.alpha(node, x) - oracle.alpha(node, y),
            );
        }
    }
    names
        .iter()
        .zip(worst)
        .map(|(n, w)| OracleComparison {
            target: n.to_string(),
            worst: w,
        })
        .collect()
}
