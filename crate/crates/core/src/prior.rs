//! Forward simulation from the GDP prior: stick-breaking, the truncated
//! finite mixture with hypernode chains, the explicit parent-mixture
//! construction, the family-owned restaurant process, and synthetic data.

use rand::Rng;
use thiserror::Error;

use crate::dag::{DagError, LayeredDag};
use crate::dist::{categorical, dirichlet, ln_dirichlet_draw};
use crate::model::{GaussianComponent, Group, GroupedDataset, ModelError};
use crate::scenario::{ScenarioSpec, WeightSource};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PriorError {
    #[error("node {node}: Dirichlet concentration {value} is not positive and finite")]
    ZeroConcentration { node: usize, value: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Mixture weights for every node of a layered DAG.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    /// `beta[j]`: length-`L` weights of node `j` (the root included).
    pub beta: Vec<Vec<f64>>,
    /// `hidden[j][g - 1]`: hidden weights of node `j` at generation `g`,
    /// `g = 1..layer(j) - 1`. Generation 1 is nearest the node.
    pub hidden: Vec<Vec<Vec<f64>>>,
    /// `parent_mix[j]`: mixing proportions over `parents(j)`; filled only by
    /// the explicit-mixture construction.
    pub parent_mix: Vec<Vec<f64>>,
}

impl WeightSet {
    pub fn truncation(&self) -> usize {
        self.beta.first().map_or(0, Vec::len)
    }

    /// Every stored vector, in a fixed order.
    pub fn vectors(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.beta
            .iter()
            .chain(self.hidden.iter().flatten())
            .chain(self.parent_mix.iter().filter(|p| !p.is_empty()))
    }
}

/// Log-weights with the layout of [`WeightSet`]. Entries far below the
/// smallest positive double stay finite.
#[derive(Debug, Clone, PartialEq)]
pub struct LogWeightSet {
    pub ln_beta: Vec<Vec<f64>>,
    pub ln_hidden: Vec<Vec<Vec<f64>>>,
}

impl LogWeightSet {
    pub fn truncation(&self) -> usize {
        self.ln_beta.first().map_or(0, Vec::len)
    }

    pub fn to_linear(&self) -> WeightSet {
        let exp = |v: &Vec<f64>| v.iter().map(|x| x.exp()).collect::<Vec<f64>>();
        WeightSet {
            beta: self.ln_beta.iter().map(exp).collect(),
            hidden: self.ln_hidden.iter().map(|h| h.iter().map(exp).collect()).collect(),
            parent_mix: vec![Vec::new(); self.ln_beta.len()],
        }
    }
}

fn checked_concentration(node: usize, value: f64) -> Result<f64, PriorError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(PriorError::ZeroConcentration { node, value })
    }
}

fn scaled(c: f64, base: &[f64]) -> Vec<f64> {
    base.iter().map(|b| c * b).collect()
}

/// Truncated stick-breaking weights with `Beta(1, alpha)` fractions; the
/// final fraction is 1.
pub fn stick_break<R: Rng + ?Sized>(alpha: f64, truncation: usize, rng: &mut R) -> Vec<f64> {
    let mut w = Vec::with_capacity(truncation);
    let mut remaining = 1.0;
    for k in 0..truncation {
        let frac = if k + 1 == truncation {
            1.0
        } else {
            // Inverse CDF of Beta(1, alpha).
            let u: f64 = rng.random();
            1.0 - (1.0 - u).powf(1.0 / alpha)
        };
        w.push(remaining * frac);
        remaining *= 1.0 - frac;
    }
    w
}

fn check_inputs(ldag: &LayeredDag, alphas: &[f64], truncation: usize) -> Result<(), PriorError> {
    if alphas.len() != ldag.node_count() {
        return Err(PriorError::InvalidInput(format!(
            "{} concentrations for {} nodes",
            alphas.len(),
            ldag.node_count()
        )));
    }
    if truncation < 1 {
        return Err(PriorError::InvalidInput("truncation must be at least 1".into()));
    }
    Ok(())
}

/// Draws all weights from the truncated GDP: the root from a symmetric
/// Dirichlet, each other node through its hypernode chain.
pub fn sample_finite_gdp<R: Rng + ?Sized>(
    ldag: &LayeredDag,
    alphas: &[f64],
    truncation: usize,
    rng: &mut R,
) -> Result<WeightSet, PriorError> {
    sample_finite_gdp_ln(ldag, alphas, truncation, rng).map(|w| w.to_linear())
}

/// [`sample_finite_gdp`] carried out in log space.
pub fn sample_finite_gdp_ln<R: Rng + ?Sized>(
    ldag: &LayeredDag,
    alphas: &[f64],
    truncation: usize,
    rng: &mut R,
) -> Result<LogWeightSet, PriorError> {
    check_inputs(ldag, alphas, truncation)?;
    let n = ldag.node_count();
    let root = ldag.root();
    let mut ln_beta = vec![Vec::new(); n];
    let mut ln_hidden = vec![Vec::new(); n];
    let a_root = checked_concentration(root, alphas[root])?;
    ln_beta[root] = ln_dirichlet_draw(&vec![(a_root / truncation as f64).ln(); truncation], rng);
    let shifted = |c: f64, base: &[f64]| base.iter().map(|b| c.ln() + b).collect::<Vec<f64>>();
    for &j in ldag.topological_order() {
        if j == root {
            continue;
        }
        let chain = ldag.hypernode_chain(j)?;
        let mut levels = vec![Vec::new(); chain.len()];
        let mut base = ln_beta[root].clone();
        for g in (1..=chain.len()).rev() {
            let c = checked_concentration(j, chain.generation(g).concentration(alphas))?;
            let v = ln_dirichlet_draw(&shifted(c, &base), rng);
            levels[g - 1] = v.clone();
            base = v;
        }
        let a = checked_concentration(j, alphas[j])?;
        ln_beta[j] = ln_dirichlet_draw(&shifted(a, &base), rng);
        ln_hidden[j] = levels;
    }
    Ok(LogWeightSet { ln_beta, ln_hidden })
}

/// The direct construction: each node's base weights are a
/// `Dir(α_parents)`-weighted average of its parents' weights.
pub fn sample_explicit_mixture_gdp<R: Rng + ?Sized>(
    ldag: &LayeredDag,
    alphas: &[f64],
    truncation: usize,
    rng: &mut R,
) -> Result<WeightSet, PriorError> {
    check_inputs(ldag, alphas, truncation)?;
    let n = ldag.node_count();
    let root = ldag.root();
    let mut beta = vec![Vec::new(); n];
    let mut parent_mix = vec![Vec::new(); n];
    let a_root = checked_concentration(root, alphas[root])?;
    beta[root] = dirichlet(&vec![a_root / truncation as f64; truncation], rng);
    for &j in ldag.topological_order() {
        if j == root {
            continue;
        }
        let parents = ldag.parents(j);
        let pi = if parents.len() == 1 {
            vec![1.0]
        } else {
            let params: Vec<f64> = parents.iter().map(|&p| alphas[p]).collect();
            dirichlet(&params, rng)
        };
        let mut base = vec![0.0; truncation];
        for (&p, &w) in parents.iter().zip(&pi) {
            for (b, x) in base.iter_mut().zip(&beta[p]) {
                *b += w * x;
            }
        }
        let a = checked_concentration(j, alphas[j])?;
        beta[j] = dirichlet(&scaled(a, &base), rng);
        parent_mix[j] = pi;
    }
    Ok(WeightSet {
        beta,
        hidden: vec![Vec::new(); n],
        parent_mix,
    })
}

/// One Chinese-restaurant-style table arrangement.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Restaurant {
    pub concentration: f64,
    /// Customers per table.
    pub table_sizes: Vec<usize>,
    /// Dish served at each table.
    pub table_dish: Vec<usize>,
}

impl Restaurant {
    fn with_concentration(concentration: f64) -> Self {
        Self {
            concentration,
            ..Self::default()
        }
    }

    pub fn customers(&self) -> usize {
        self.table_sizes.iter().sum()
    }

    pub fn table_count(&self) -> usize {
        self.table_sizes.len()
    }

    /// Number of tables serving each dish, indexed by dish id.
    pub fn tables_per_dish(&self, dish_count: usize) -> Vec<usize> {
        let mut m = vec![0; dish_count];
        for &d in &self.table_dish {
            m[d] += 1;
        }
        m
    }

    /// An existing table chosen with probability `n_t / (n + c)`, or `None`
    /// (a new table) with probability `c / (n + c)`.
    fn choose<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        let n = self.customers() as f64;
        let mut u = rng.random::<f64>() * (n + self.concentration);
        for (t, &size) in self.table_sizes.iter().enumerate() {
            if u < size as f64 {
                return Some(t);
            }
            u -= size as f64;
        }
        None
    }
}

/// Seating state of the family-owned restaurant process.
#[derive(Debug, Clone, PartialEq)]
pub struct RestaurantState {
    /// One restaurant per node; the root's also seats tables opened upstream.
    pub restaurants: Vec<Restaurant>,
    /// `hyper[j][g - 1]`: the hyper-restaurant of node `j` at generation `g`.
    pub hyper: Vec<Vec<Restaurant>>,
    pub dish_count: usize,
}

#[derive(Clone, Copy)]
enum Slot {
    Own(usize),
    Hyper(usize, usize),
}

impl RestaurantState {
    fn new(ldag: &LayeredDag, alphas: &[f64]) -> Result<Self, PriorError> {
        let n = ldag.node_count();
        let mut restaurants = Vec::with_capacity(n);
        let mut hyper = Vec::with_capacity(n);
        for j in 0..n {
            restaurants.push(Restaurant::with_concentration(checked_concentration(j, alphas[j])?));
            if j == ldag.root() {
                hyper.push(Vec::new());
                continue;
            }
            let chain = ldag.hypernode_chain(j)?;
            let levels = chain
                .levels
                .iter()
                .map(|lvl| checked_concentration(j, lvl.concentration(alphas)).map(Restaurant::with_concentration))
                .collect::<Result<Vec<_>, _>>()?;
            hyper.push(levels);
        }
        Ok(Self {
            restaurants,
            hyper,
            dish_count: 0,
        })
    }

    fn slot(&mut self, s: Slot) -> &mut Restaurant {
        match s {
            Slot::Own(j) => &mut self.restaurants[j],
            Slot::Hyper(j, g) => &mut self.hyper[j][g - 1],
        }
    }

    /// Seats one customer in node `j`'s restaurant and returns its dish.
    fn seat<R: Rng + ?Sized>(&mut self, j: usize, root: usize, rng: &mut R) -> usize {
        let mut path = vec![Slot::Own(j)];
        if j != root {
            path.extend((1..=self.hyper[j].len()).map(|g| Slot::Hyper(j, g)));
            path.push(Slot::Own(root));
        }
        let mut depth = 0;
        let dish = loop {
            if depth == path.len() {
                self.dish_count += 1;
                break self.dish_count - 1;
            }
            let r = self.slot(path[depth]);
            match r.choose(rng) {
                Some(t) => {
                    r.table_sizes[t] += 1;
                    break r.table_dish[t];
                }
                None => depth += 1,
            }
        };
        for &s in &path[..depth] {
            let r = self.slot(s);
            r.table_sizes.push(1);
            r.table_dish.push(dish);
        }
        dish
    }
}

/// Seats `sizes[j]` customers at every node, in topological order, and
/// returns the state and each customer's dish label.
pub fn restaurant_sim<R: Rng + ?Sized>(
    ldag: &LayeredDag,
    alphas: &[f64],
    sizes: &[usize],
    rng: &mut R,
) -> Result<(RestaurantState, Vec<Vec<usize>>), PriorError> {
    if sizes.len() != ldag.node_count() {
        return Err(PriorError::InvalidInput(format!(
            "{} sizes for {} nodes",
            sizes.len(),
            ldag.node_count()
        )));
    }
    check_inputs(ldag, alphas, 1)?;
    let mut state = RestaurantState::new(ldag, alphas)?;
    let mut labels = vec![Vec::new(); ldag.node_count()];
    for &j in ldag.topological_order() {
        labels[j] = (0..sizes[j]).map(|_| state.seat(j, ldag.root(), rng)).collect();
    }
    Ok((state, labels))
}

/// Componentwise Monte Carlo moments of a set of vector draws.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMoments {
    pub n: usize,
    pub mean: Vec<f64>,
    pub mean_se: Vec<f64>,
    /// `E[x²]` per component.
    pub second: Vec<f64>,
    pub second_se: Vec<f64>,
    pub variance: Vec<f64>,
    pub variance_se: Vec<f64>,
}

impl SampleMoments {
    pub fn from_draws(draws: &[Vec<f64>]) -> Self {
        let n = draws.len();
        let k = draws.first().map_or(0, Vec::len);
        let nf = n as f64;
        let mut mean = vec![0.0; k];
        let mut second = vec![0.0; k];
        for d in draws {
            for i in 0..k {
                mean[i] += d[i];
                second[i] += d[i] * d[i];
            }
        }
        for i in 0..k {
            mean[i] /= nf;
            second[i] /= nf;
        }
        let mut c2 = vec![0.0; k];
        let mut c4 = vec![0.0; k];
        let mut sq_var = vec![0.0; k];
        for d in draws {
            for i in 0..k {
                let e = d[i] - mean[i];
                c2[i] += e * e;
                c4[i] += e.powi(4);
                sq_var[i] += (d[i] * d[i] - second[i]).powi(2);
            }
        }
        let variance: Vec<f64> = c2.iter().map(|c| c / nf).collect();
        Self {
            n,
            mean_se: variance.iter().map(|v| (v / nf).sqrt()).collect(),
            second_se: sq_var.iter().map(|s| (s / nf / nf).sqrt()).collect(),
            variance_se: c4
                .iter()
                .zip(&variance)
                .map(|(c, v)| ((c / nf - v * v).max(0.0) / nf).sqrt())
                .collect(),
            mean,
            second,
            variance,
        }
    }

    /// Largest two-sample z-score over first and second moments.
    pub fn max_z_against(&self, other: &SampleMoments) -> f64 {
        let z = |a: f64, b: f64, sa: f64, sb: f64| {
            let se = (sa * sa + sb * sb).sqrt();
            if se == 0.0 {
                if a == b { 0.0 } else { f64::INFINITY }
            } else {
                (a - b).abs() / se
            }
        };
        let mut worst: f64 = 0.0;
        for i in 0..self.mean.len() {
            worst = worst.max(z(self.mean[i], other.mean[i], self.mean_se[i], other.mean_se[i]));
            worst = worst.max(z(self.second[i], other.second[i], self.second_se[i], other.second_se[i]));
        }
        worst
    }
}

/// Empirical versus analytic moments of a Dirichlet mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub target: Vec<f64>,
    pub empirical: SampleMoments,
    pub analytic_mean: Vec<f64>,
    pub analytic_variance: Vec<f64>,
}

impl MomentReport {
    /// Largest |empirical − analytic| / SE over means and variances.
    pub fn max_abs_z(&self) -> f64 {
        let e = &self.empirical;
        let mut worst: f64 = 0.0;
        for i in 0..self.target.len() {
            worst = worst.max((e.mean[i] - self.analytic_mean[i]).abs() / e.mean_se[i]);
            worst = worst.max((e.variance[i] - self.analytic_variance[i]).abs() / e.variance_se[i]);
        }
        worst
    }

    pub fn within(&self, standard_errors: f64) -> bool {
        self.max_abs_z() <= standard_errors
    }
}

/// Analytic mean and variance of `Dir(params)`.
pub fn dirichlet_moments(params: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let total: f64 = params.iter().sum();
    let mean: Vec<f64> = params.iter().map(|a| a / total).collect();
    let var = mean.iter().map(|m| m * (1.0 - m) / (total + 1.0)).collect();
    (mean, var)
}

/// Draws `Σ π_i X_i` with `X_i ~ Dir(α_i)` and `π ~ Dir(α_1·, …, α_L·)`, and
/// compares its moments with `Dir(Σ α_i)`.
pub fn lemma_mixture_oracle<R: Rng + ?Sized>(
    alpha_vectors: &[Vec<f64>],
    n_draws: usize,
    rng: &mut R,
) -> Result<MomentReport, PriorError> {
    let k = alpha_vectors.first().map_or(0, Vec::len);
    if k == 0 || n_draws < 2 {
        return Err(PriorError::InvalidInput("need non-empty vectors and at least 2 draws".into()));
    }
    for a in alpha_vectors {
        if a.len() != k || a.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(PriorError::InvalidInput("vectors must share a length and be positive".into()));
        }
    }
    let totals: Vec<f64> = alpha_vectors.iter().map(|a| a.iter().sum()).collect();
    let draws: Vec<Vec<f64>> = (0..n_draws)
        .map(|_| {
            let pi = if alpha_vectors.len() == 1 {
                vec![1.0]
            } else {
                dirichlet(&totals, rng)
            };
            let mut mix = vec![0.0; k];
            for (a, p) in alpha_vectors.iter().zip(&pi) {
                let x = dirichlet(a, rng);
                for (m, v) in mix.iter_mut().zip(&x) {
                    *m += p * v;
                }
            }
            mix
        })
        .collect();
    let target: Vec<f64> = (0..k).map(|i| alpha_vectors.iter().map(|a| a[i]).sum()).collect();
    let (analytic_mean, analytic_variance) = dirichlet_moments(&target);
    Ok(MomentReport {
        empirical: SampleMoments::from_draws(&draws),
        target,
        analytic_mean,
        analytic_variance,
    })
}

/// Draws labels and observations for every observed node of `ldag`.
pub fn generate_synthetic<R: Rng + ?Sized>(
    ldag: &LayeredDag,
    spec: &ScenarioSpec,
    rng: &mut R,
) -> Result<GroupedDataset, PriorError> {
    let groups = ldag.observed_node_count();
    spec.validate()?;
    if spec.sizes.len() != groups || spec.covariances.len() != groups {
        return Err(ModelError::DimensionMismatch {
            expected: groups,
            found: spec.sizes.len().min(spec.covariances.len()),
        }
        .into());
    }
    let clusters = spec.means.len();
    let weights: Vec<Vec<f64>> = match &spec.weights {
        WeightSource::Fixed(w) => {
            if w.len() != groups {
                return Err(ModelError::DimensionMismatch {
                    expected: groups,
                    found: w.len(),
                }
                .into());
            }
            w.clone()
        }
        WeightSource::Prior { alpha0 } => {
            let alphas = crate::model::sample_alphas(ldag, *alpha0, rng);
            let ws = sample_finite_gdp(ldag, &alphas, clusters, rng)?;
            ws.beta.into_iter().take(groups).collect()
        }
    };
    let mut out = Vec::with_capacity(groups);
    for j in 0..groups {
        let comps = spec
            .means
            .iter()
            .map(|m| GaussianComponent::new(m.clone(), spec.covariances[j].clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let labels: Vec<usize> = (0..spec.sizes[j]).map(|_| categorical(&weights[j], rng)).collect();
        let rows: Vec<Vec<f64>> = labels.iter().map(|&z| comps[z].sample(rng)).collect();
        out.push(Group::new(spec.dim(), &rows, Some(labels))?);
    }
    Ok(GroupedDataset::new(spec.dim(), out)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::Dag;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn on_simplex(v: &[f64]) -> bool {
        (v.iter().sum::<f64>() - 1.0).abs() < 1e-12 && v.iter().all(|&x| (0.0..=1.0).contains(&x))
    }

    #[test]
    fn stick_break_basics() {
        let mut r = rng(1);
        assert_eq!(stick_break(2.0, 1, &mut r), vec![1.0]);
        for (a, l) in [(0.1, 5), (1.0, 20), (30.0, 7)] {
            assert!(on_simplex(&stick_break(a, l, &mut r)));
        }
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| stick_break(1.0, 10, &mut r)[0]).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let se = (1.0f64 / 12.0 / n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn finite_gdp_shapes_and_simplex() {
        let ldag = LayeredDag::new(Dag::experimental()).unwrap();
        let alphas = vec![2.0; 8];
        let ws = sample_finite_gdp(&ldag, &alphas, 6, &mut rng(2)).unwrap();
        for j in 0..8 {
            assert_eq!(ws.hidden[j].len(), ldag.layer(j).saturating_sub(1));
        }
        assert!(ws.vectors().all(|v| on_simplex(v)));
        assert_eq!(ws.truncation(), 6);
    }

    #[test]
    fn finite_gdp_on_fork_is_hdp() {
        let ldag = LayeredDag::new(Dag::fork(3)).unwrap();
        let alphas = [1.0, 2.0, 3.0, 4.0];
        let ws = sample_finite_gdp(&ldag, &alphas, 5, &mut rng(3)).unwrap();
        assert!(ws.hidden.iter().all(Vec::is_empty));
        // Same stream consumed in the same order by the HDP recipe.
        let mut r = rng(3);
        let root = ln_dirichlet_draw(&[0.2f64.ln(); 5], &mut r);
        let exp = |v: &[f64]| v.iter().map(|x| x.exp()).collect::<Vec<_>>();
        assert_eq!(ws.beta[0], exp(&root));
        for j in 1..4 {
            let params: Vec<f64> = root.iter().map(|b| alphas[j].ln() + b).collect();
            assert_eq!(ws.beta[j], exp(&ln_dirichlet_draw(&params, &mut r)));
        }
    }

    #[test]
    fn zero_concentration_is_reported() {
        let ldag = LayeredDag::new(Dag::experimental()).unwrap();
        let mut alphas = vec![1.0; 8];
        alphas[3] = 0.0;
        assert!(matches!(
            sample_finite_gdp(&ldag, &alphas, 4, &mut rng(0)),
            Err(PriorError::ZeroConcentration { node: 3, .. })
        ));
    }

    #[test]
    fn node5_conditional_mean_is_root_weights() {
        let ldag = LayeredDag::new(Dag::experimental()).unwrap();
        let alphas = vec![2.0; 8];
        let mut r = rng(4);
        let root = vec![0.1, 0.2, 0.3, 0.4];
        let n = 100_000;
        let draws: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let chain = ldag.hypernode_chain(4).unwrap();
                let c = chain.generation(1).concentration(&alphas);
                let nu = dirichlet(&scaled(c, &root), &mut r);
                dirichlet(&scaled(alphas[4], &nu), &mut r)
            })
            .collect();
        let m = SampleMoments::from_draws(&draws);
        for l in 0..4 {
            assert!((m.mean[l] - root[l]).abs() < 3.0 * m.mean_se[l]);
        }
    }

    #[test]
    fn explicit_mixture_parent_mix() {
        let ldag = LayeredDag::new(Dag::experimental()).unwrap();
        let alphas = [1.0, 1.5, 2.0, 2.5, 1.0, 1.0, 1.0, 1.0];
        let mut r = rng(6);
        let n = 50_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let ws = sample_explicit_mixture_gdp(&ldag, &alphas, 4, &mut r).unwrap();
            assert_eq!(ws.parent_mix[1], vec![1.0]);
            assert_eq!(ws.parent_mix[4].len(), 2);
            sum += ws.parent_mix[4][0];
        }
        // Node 5's parents are nodes 2 and 4: Beta(1.5, 2.5) has mean 0.375.
        let mean = sum / n as f64;
        let sd = (1.5f64 * 2.5 / (16.0 * 5.0)).sqrt();
        assert!((mean - 0.375).abs() < 3.0 * sd / (n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn restaurant_first_customer_opens_table() {
        let ldag = LayeredDag::new(Dag::new(1, &[]).unwrap()).unwrap();
        for seed in 0..20 {
            let (state, labels) = restaurant_sim(&ldag, &[3.0], &[1], &mut rng(seed)).unwrap();
            assert_eq!(state.restaurants[0].table_sizes, vec![1]);
            assert_eq!(labels[0], vec![0]);
        }
    }

    #[test]
    fn restaurant_counts_are_consistent() {
        let ldag = LayeredDag::new(Dag::experimental()).unwrap();
        let sizes = [10, 20, 5, 0, 7, 9, 3, 12];
        let (state, labels) = restaurant_sim(&ldag, &[1.5; 8], &sizes, &mut rng(8)).unwrap();
        for j in 0..8 {
            assert_eq!(labels[j].len(), sizes[j]);
            assert!(labels[j].iter().all(|&d| d < state.dish_count));
        }
        for j in 1..8 {
            // Every table opened below a level seats one customer one level up.
            let mut below = state.restaurants[j].table_count();
            for h in &state.hyper[j] {
                assert_eq!(h.customers(), below);
                below = h.table_count();
            }
        }
        let upstream: usize = (1..8)
            .map(|j| state.hyper[j].last().map_or(state.restaurants[j].table_count(), Restaurant::table_count))
            .sum();
        assert_eq!(state.restaurants[0].customers(), sizes[0] + upstream);
        // One dish per root table.
        assert_eq!(state.restaurants[0].table_count(), state.dish_count);
        assert!(state.restaurants[0].tables_per_dish(state.dish_count).iter().all(|&m| m == 1));
    }

    #[test]
    fn restaurant_pair_coclustering_matches_crp() {
        let ldag = LayeredDag::new(Dag::new(1, &[]).unwrap()).unwrap();
        let alpha = 1.5;
        let mut r = rng(10);
        let n = 100_000;
        let together = (0..n)
            .filter(|_| {
                let (_, labels) = restaurant_sim(&ldag, &[alpha], &[2], &mut r).unwrap();
                labels[0][0] == labels[0][1]
            })
            .count();
        let p = 1.0 / (1.0 + alpha);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((together as f64 / n as f64 - p).abs() < 3.0 * se);
    }

    #[test]
    fn lemma_oracle_inputs() {
        let mut r = rng(12);
        let single = lemma_mixture_oracle(&[vec![2.0, 5.0, 1.0]], 20_000, &mut r).unwrap();
        assert_eq!(single.target, vec![2.0, 5.0, 1.0]);
        assert!(single.within(4.0));
        let sym = lemma_mixture_oracle(&[vec![1.0, 1.0], vec![1.0, 1.0]], 20_000, &mut r).unwrap();
        assert_eq!(sym.analytic_mean, vec![0.5, 0.5]);
        assert!(lemma_mixture_oracle(&[vec![1.0], vec![1.0, 2.0]], 10, &mut r).is_err());
        assert!(lemma_mixture_oracle(&[vec![0.0, 1.0]], 10, &mut r).is_err());
    }
}
