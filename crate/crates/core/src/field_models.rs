//! Laws of the random external fields, sampled realizations, the empirical
//! free energy `f_n` and its almost-sure limit `f`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ln_cosh, ln_cosh_derivative, quadrature};

const PROB_SUM_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-10;
const QUAD_ABS_TOL: f64 = 1e-12;
const QUAD_MAX_INTERVALS: usize = 4000;
/// Below this `beta * h` the uniform-law derivatives are integrated instead of
/// differenced, since the antiderivative difference cancels.
const UNIFORM_DIFFERENCE_MIN: f64 = 0.05;

/// Default rotation angle, `sqrt(2) - 1`.
pub const DEFAULT_ROTATION_ANGLE: f64 = std::f64::consts::SQRT_2 - 1.0;
const GOLDEN_FRACTION: f64 = 0.618_033_988_749_894_8;

/// Law of the external fields `(h_i)`.
///
/// Construct through the checked constructors or by deserializing; both
/// validate. Values built directly from the variants are validated again when
/// a [`FreeEnergy`] is created from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "repr::FieldModelRepr", into = "repr::FieldModelRepr")]
pub enum FieldModel {
    /// Deterministic field `h` at every site.
    Constant { h: f64 },
    /// I.i.d. fields, `+h` with probability `alpha` and `-h` otherwise.
    Dichotomous { h: f64, alpha: f64 },
    /// I.i.d. fields uniform on `[-h, h]`.
    Uniform { h: f64 },
    /// I.i.d. fields with a finite law.
    FiniteTable { values: Vec<f64>, probs: Vec<f64> },
    /// Stationary irreducible Markov chain on `states`.
    MarkovChain { states: Vec<f64>, transition: Vec<Vec<f64>>, stationary: Vec<f64> },
    /// Fields `h (2 frac(w0 + i angle) - 1)` driven by an irrational rotation.
    Rotation { angle: f64, h: f64 },
}

mod repr {
    use serde::{Deserialize, Serialize};

    fn default_angle() -> f64 {
        super::DEFAULT_ROTATION_ANGLE
    }

    #[derive(Serialize, Deserialize)]
    #[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
    pub enum FieldModelRepr {
        Constant {
            h: f64,
        },
        Dichotomous {
            h: f64,
            alpha: f64,
        },
        Uniform {
            h: f64,
        },
        FiniteTable {
            values: Vec<f64>,
            probs: Vec<f64>,
        },
        MarkovChain {
            states: Vec<f64>,
            transition: Vec<Vec<f64>>,
            stationary: Vec<f64>,
        },
        Rotation {
            #[serde(default = "default_angle", rename = "alpha")]
            angle: f64,
            h: f64,
        },
    }

    impl TryFrom<FieldModelRepr> for super::FieldModel {
        type Error = crate::error::Error;

        fn try_from(r: FieldModelRepr) -> Result<Self, Self::Error> {
            use super::FieldModel as M;
            let model = match r {
                FieldModelRepr::Constant { h } => M::Constant { h },
                FieldModelRepr::Dichotomous { h, alpha } => M::Dichotomous { h, alpha },
                FieldModelRepr::Uniform { h } => M::Uniform { h },
                FieldModelRepr::FiniteTable { values, probs } => M::FiniteTable { values, probs },
                FieldModelRepr::MarkovChain { states, transition, stationary } => {
                    M::MarkovChain { states, transition, stationary }
                }
                FieldModelRepr::Rotation { angle, h } => M::Rotation { angle, h },
            };
            model.validate()?;
            Ok(model)
        }
    }

    impl From<super::FieldModel> for FieldModelRepr {
        fn from(m: super::FieldModel) -> Self {
            use super::FieldModel as M;
            match m {
                M::Constant { h } => FieldModelRepr::Constant { h },
                M::Dichotomous { h, alpha } => FieldModelRepr::Dichotomous { h, alpha },
                M::Uniform { h } => FieldModelRepr::Uniform { h },
                M::FiniteTable { values, probs } => FieldModelRepr::FiniteTable { values, probs },
                M::MarkovChain { states, transition, stationary } => {
                    FieldModelRepr::MarkovChain { states, transition, stationary }
                }
                M::Rotation { angle, h } => FieldModelRepr::Rotation { angle, h },
            }
        }
    }
}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidModel(msg.into()))
}

fn check_probability_vector(name: &str, p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return invalid(format!("{name} is empty"));
    }
    if let Some(bad) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return invalid(format!("{name} has invalid entry {bad}"));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return invalid(format!("{name} sums to {sum}, not 1"));
    }
    Ok(())
}

fn check_finite(name: &str, values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => invalid(format!("{name} has non-finite entry {v}")),
        None => Ok(()),
    }
}

/// Every state reaches every other state along positive transitions.
fn is_irreducible(transition: &[Vec<f64>]) -> bool {
    let n = transition.len();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let p = if forward { transition[i][j] } else { transition[j][i] };
                if p > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

impl FieldModel {
    pub fn constant(h: f64) -> Result<Self> {
        let m = FieldModel::Constant { h };
        m.validate().map(|_| m)
    }

    pub fn dichotomous(h: f64, alpha: f64) -> Result<Self> {
        let m = FieldModel::Dichotomous { h, alpha };
        m.validate().map(|_| m)
    }

    pub fn uniform(h: f64) -> Result<Self> {
        let m = FieldModel::Uniform { h };
        m.validate().map(|_| m)
    }

    pub fn finite_table(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let m = FieldModel::FiniteTable { values, probs };
        m.validate().map(|_| m)
    }

    pub fn markov_chain(states: Vec<f64>, transition: Vec<Vec<f64>>, stationary: Vec<f64>) -> Result<Self> {
        let m = FieldModel::MarkovChain { states, transition, stationary };
        m.validate().map(|_| m)
    }

    pub fn rotation(angle: f64, h: f64) -> Result<Self> {
        let m = FieldModel::Rotation { angle, h };
        m.validate().map(|_| m)
    }

    /// Checks every parameter constraint of the variant.
    pub fn validate(&self) -> Result<()> {
        match self {
            FieldModel::Constant { h } => check_finite("h", &[*h]),
            FieldModel::Dichotomous { h, alpha } => {
                check_finite("dichotomous parameters", &[*h, *alpha])?;
                if *h < 0.0 {
                    return invalid(format!("dichotomous h must be >= 0, got {h}"));
                }
                if !(0.0..=1.0).contains(alpha) {
                    return invalid(format!("dichotomous alpha must lie in [0, 1], got {alpha}"));
                }
                Ok(())
            }
            FieldModel::Uniform { h } => {
                if !(h.is_finite() && *h > 0.0) {
                    return invalid(format!("uniform h must be > 0, got {h}"));
                }
                Ok(())
            }
            FieldModel::FiniteTable { values, probs } => {
                if values.len() != probs.len() {
                    return invalid(format!("{} values but {} probabilities", values.len(), probs.len()));
                }
                check_finite("values", values)?;
                check_probability_vector("probs", probs)
            }
            FieldModel::MarkovChain { states, transition, stationary } => {
                let n = states.len();
                if n == 0 {
                    return invalid("markov chain has no states");
                }
                check_finite("states", states)?;
                if transition.len() != n || stationary.len() != n {
                    return invalid(format!(
                        "markov chain with {n} states needs an {n}x{n} transition matrix and {n} stationary weights"
                    ));
                }
                for (i, row) in transition.iter().enumerate() {
                    if row.len() != n {
                        return invalid(format!("transition row {i} has {} entries, expected {n}", row.len()));
                    }
                    check_probability_vector(&format!("transition row {i}"), row)?;
                }
                check_probability_vector("stationary", stationary)?;
                for j in 0..n {
                    let pj: f64 = (0..n).map(|i| stationary[i] * transition[i][j]).sum();
                    if (pj - stationary[j]).abs() > STATIONARY_TOL {
                        return invalid(format!(
                            "stationary vector is not invariant: (pi P)[{j}] = {pj}, pi[{j}] = {}",
                            stationary[j]
                        ));
                    }
                }
                if !is_irreducible(transition) {
                    return invalid("markov chain is not irreducible");
                }
                Ok(())
            }
            FieldModel::Rotation { angle, h } => {
                if !(angle.is_finite() && *angle > 0.0 && *angle < 1.0) {
                    return invalid(format!("rotation angle must lie in (0, 1), got {angle}"));
                }
                if !(h.is_finite() && *h > 0.0) {
                    return invalid(format!("rotation amplitude must be > 0, got {h}"));
                }
                Ok(())
            }
        }
    }

    /// Marginal (stationary, for Markov chains) law of a single field.
    pub fn marginal(&self) -> Marginal {
        match self {
            FieldModel::Constant { h } => Marginal::Atoms { values: vec![*h], weights: vec![1.0] },
            FieldModel::Dichotomous { h, alpha } => {
                Marginal::Atoms { values: vec![*h, -*h], weights: vec![*alpha, 1.0 - *alpha] }
            }
            FieldModel::FiniteTable { values, probs } => {
                Marginal::Atoms { values: values.clone(), weights: probs.clone() }
            }
            FieldModel::MarkovChain { states, stationary, .. } => {
                Marginal::Atoms { values: states.clone(), weights: stationary.clone() }
            }
            FieldModel::Uniform { h } | FieldModel::Rotation { h, .. } => Marginal::Uniform { half_width: *h },
        }
    }

    /// `E[h]` under the marginal law.
    pub fn mean_field(&self) -> f64 {
        match self.marginal() {
            Marginal::Atoms { values, weights } => values.iter().zip(&weights).map(|(v, w)| v * w).sum(),
            Marginal::Uniform { .. } => 0.0,
        }
    }

    /// Whether the marginal law is invariant under `h -> -h`.
    pub fn is_symmetric(&self) -> bool {
        match self.marginal() {
            Marginal::Uniform { .. } => true,
            Marginal::Atoms { values, weights } => {
                let mass_at = |v: f64| -> f64 {
                    values.iter().zip(&weights).filter(|(u, _)| (**u - v).abs() <= 1e-12).map(|(_, w)| w).sum()
                };
                values.iter().all(|&v| (mass_at(v) - mass_at(-v)).abs() <= PROB_SUM_TOL)
            }
        }
    }

    /// Stable 64-bit FNV-1a hash of the JSON form; identifies the RNG stream.
    pub fn stream_id(&self) -> u64 {
        let json = serde_json::to_string(self).expect("field model serializes");
        json.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
    }
}

/// Single-site law used by the limiting free energy.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    Atoms { values: Vec<f64>, weights: Vec<f64> },
    Uniform { half_width: f64 },
}

/// A sampled field sequence `h_1, ..., h_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRealization {
    pub values: Vec<f64>,
    pub seed: u64,
    pub model: FieldModel,
}

impl FieldRealization {
    /// A realization with explicitly given fields (seed 0, constant-model tag
    /// irrelevant to any computation).
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("realization needs at least one field".into()));
        }
        check_finite("fields", &values).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let model =
            FieldModel::FiniteTable { values: values.clone(), probs: vec![1.0 / values.len() as f64; values.len()] };
        Ok(FieldRealization { values, seed: 0, model })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn rotation_start(seed: u64) -> f64 {
    // frac(seed * phi) == frac(seed * (phi - 1)) for integer seeds
    (seed as f64 * GOLDEN_FRACTION).fract()
}

/// Draws `n` fields from `model`; deterministic in `(model, n, seed)`.
///
/// Markov chains start from their stationary law. Rotations ignore the RNG and
/// iterate the map from `w0 = frac(seed * golden ratio)`.
pub fn sample_fields(model: &FieldModel, n: usize, seed: u64) -> Result<FieldRealization> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size n must be >= 1".into()));
    }
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(model.stream_id());

    let values = match model {
        FieldModel::Constant { h } => vec![*h; n],
        FieldModel::Dichotomous { h, alpha } => {
            (0..n).map(|_| if rng.random::<f64>() < *alpha { *h } else { -*h }).collect()
        }
        FieldModel::Uniform { h } => (0..n).map(|_| *h * (2.0 * rng.random::<f64>() - 1.0)).collect(),
        FieldModel::FiniteTable { values, probs } => {
            let dist = WeightedIndex::new(probs).map_err(|e| Error::InvalidModel(e.to_string()))?;
            (0..n).map(|_| values[dist.sample(&mut rng)]).collect()
        }
        FieldModel::MarkovChain { states, transition, stationary } => {
            let start = WeightedIndex::new(stationary).map_err(|e| Error::InvalidModel(e.to_string()))?;
            let rows = transition
                .iter()
                .map(|row| WeightedIndex::new(row).map_err(|e| Error::InvalidModel(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            let mut state = start.sample(&mut rng);
            let mut out = Vec::with_capacity(n);
            out.push(states[state]);
            for _ in 1..n {
                state = rows[state].sample(&mut rng);
                out.push(states[state]);
            }
            out
        }
        FieldModel::Rotation { angle, h } => {
            let w0 = rotation_start(seed);
            (0..n)
                .map(|i| {
                    let w = (w0 + (i as f64 * angle).fract()).fract();
                    *h * (2.0 * w - 1.0)
                })
                .collect()
        }
    };
    Ok(FieldRealization { values, seed, model: model.clone() })
}

/// Empirical free energy `f_n(x) = (1/n) Σ ln cosh(x + β h_i)`.
pub fn f_n(realization: &FieldRealization, x: f64, beta: f64) -> f64 {
    let sum: f64 = realization.values.iter().map(|&h| ln_cosh(x + beta * h)).sum();
    sum / realization.values.len() as f64
}

/// The limiting free energy `f(x) = E[ln cosh(x + β h)]` of a field law at
/// inverse temperature `β`, with analytic derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeEnergy {
    model: FieldModel,
    beta: f64,
    mean_field: f64,
    marginal: Marginal,
}

impl FreeEnergy {
    pub fn new(model: FieldModel, beta: f64) -> Result<Self> {
        model.validate()?;
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidArgument(format!("beta must be > 0, got {beta}")));
        }
        let mean_field = model.mean_field();
        let marginal = model.marginal();
        Ok(FreeEnergy { model, beta, mean_field, marginal })
    }

    pub fn model(&self) -> &FieldModel {
        &self.model
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `E[h]`.
    pub fn mean_field(&self) -> f64 {
        self.mean_field
    }

    /// `f(x)`.
    pub fn value(&self, x: f64) -> f64 {
        self.derivative_of_order(0, x)
    }

    /// `f'(x) = E[tanh(x + β h)]`.
    pub fn derivative(&self, x: f64) -> f64 {
        self.derivative_of_order(1, x)
    }

    /// `f''(x) = E[sech²(x + β h)]`.
    pub fn second_derivative(&self, x: f64) -> f64 {
        self.derivative_of_order(2, x)
    }

    /// `f^(k)(x)` for `k` in `0..=6`.
    pub fn derivative_of_order(&self, k: usize, x: f64) -> f64 {
        match &self.marginal {
            Marginal::Atoms { values, weights } => values
                .iter()
                .zip(weights)
                .filter(|(_, w)| **w != 0.0)
                .map(|(v, w)| w * ln_cosh_derivative(k, x + self.beta * v))
                .sum(),
            Marginal::Uniform { half_width } => self.uniform_derivative(k, x, *half_width),
        }
    }

    fn uniform_derivative(&self, k: usize, x: f64, h: f64) -> f64 {
        let bh = self.beta * h;
        if k == 0 || bh < UNIFORM_DIFFERENCE_MIN {
            return self.uniform_average(k, x, h);
        }
        let (up, down) = (x + bh, x - bh);
        let scale = 1.0 / (2.0 * bh);
        match k {
            // tanh(a) - tanh(b) = sinh(a - b) sech(a) sech(b), free of cancellation
            2 => scale * (2.0 * bh).sinh() / (up.cosh() * down.cosh()),
            _ => scale * (ln_cosh_derivative(k - 1, up) - ln_cosh_derivative(k - 1, down)),
        }
    }

    /// `(1/(2h)) ∫_{-h}^{h} L_k(x + β u) du` by adaptive quadrature.
    fn uniform_average(&self, k: usize, x: f64, h: f64) -> f64 {
        let beta = self.beta;
        let kink = -x / beta;
        let r = quadrature::integrate(
            |u| ln_cosh_derivative(k, x + beta * u),
            -h,
            h,
            &[kink],
            QUAD_ABS_TOL * h,
            QUAD_MAX_INTERVALS,
        );
        r.value / (2.0 * h)
    }
}

/// Empirical convergence summary of `f_n` toward `f` at a set of `x` values.
pub fn max_deviation(realization: &FieldRealization, fe: &FreeEnergy, xs: &[f64]) -> f64 {
    xs.iter().map(|&x| (f_n(realization, x, fe.beta()) - fe.value(x)).abs()).fold(0.0, f64::max)
}
