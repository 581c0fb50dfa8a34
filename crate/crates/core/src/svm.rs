//! Template-specific one-vs-rest linear SVMs.
//!
//! Each template gets its own classifier trained with the template's
//! encodings as positives against a large negative set. The objective is the
//! class-weighted, L2-regularized squared-hinge loss
//!
//! ```text
//! min_w  ½‖w‖² + λ₊ Σ_{i∈P} max(0, 1 − wᵀx̃ᵢ)² + λ₋ Σ_{j∈N} max(0, 1 + wᵀx̃ⱼ)²
//! λ₊ = C (N₊ + N₋) / (2 N₊),   λ₋ = C (N₊ + N₋) / (2 N₋)
//! ```
//!
//! where `x̃ = [x, 1]` carries the bias as a regularized extra coordinate.
//! It is solved in the dual by coordinate descent: the dual of the L2-loss
//! problem has only the `α ≥ 0` constraint, with an extra `1/(2λᵢ)` on the
//! diagonal of the Gram matrix.
//!
//! Dual coordinate descent does not decrease the primal objective epoch by
//! epoch. Each outer pass therefore ends with an exact line search from the
//! previous primal iterate towards the weights implied by the current dual
//! variables; the accepted iterate is the model that gets returned.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Embedding, MediaEncoding, Template};

/// Value of the constant coordinate appended to every sample.
pub const BIAS_FEATURE: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Trade-off factor C.
    pub c: f64,
    /// Stop once the largest projected-gradient magnitude over an epoch
    /// drops below this.
    pub tolerance: f64,
    /// Maximum number of epochs (full passes over the samples).
    pub max_iterations: usize,
    /// Seed for the per-epoch visiting order.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            c: 10.0,
            tolerance: 1e-4,
            max_iterations: 1000,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("C must be positive, got {}", self.c)));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Config(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-class penalty weights `(λ₊, λ₋)`.
pub fn class_weights(n_pos: usize, n_neg: usize, c: f64) -> Result<(f64, f64)> {
    if n_pos == 0 {
        return Err(Error::EmptyPositives);
    }
    if n_neg == 0 {
        return Err(Error::EmptyNegatives);
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Config(format!("C must be positive, got {c}")));
    }
    let total = (n_pos + n_neg) as f64;
    Ok((
        c * total / (2.0 * n_pos as f64),
        c * total / (2.0 * n_neg as f64),
    ))
}

/// Which side of a comparison a template-specific SVM is trained for.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum NegativeRole {
    VerificationProbe,
    IdentificationProbe,
    GalleryTemplate,
}

/// Collects the negative samples for `target`.
///
/// Probe-side models (verification or identification) use every training
/// encoding. Gallery models additionally use every other gallery template.
/// Any template sharing the target's id is skipped.
pub fn build_negative_set<'a>(
    role: NegativeRole,
    target: &Template,
    training: &'a [Template],
    gallery: &'a [Template],
) -> Result<Vec<&'a MediaEncoding>> {
    let others = |ts: &'a [Template]| {
        ts.iter()
            .filter(move |t| t.template_id() != target.template_id())
            .flat_map(|t| t.encodings())
    };
    let mut negatives: Vec<&MediaEncoding> = Vec::new();
    if role == NegativeRole::GalleryTemplate {
        negatives.extend(others(gallery));
    }
    negatives.extend(others(training));
    if negatives.is_empty() {
        return Err(Error::EmptyNegatives);
    }
    Ok(negatives)
}

/// Positives and negatives for one template SVM, with their class weights.
#[derive(Clone, Debug)]
pub struct TrainingProblem<'a> {
    positives: Vec<&'a MediaEncoding>,
    negatives: Vec<&'a MediaEncoding>,
    lambda_pos: f64,
    lambda_neg: f64,
}

impl<'a> TrainingProblem<'a> {
    pub fn new(
        positives: Vec<&'a MediaEncoding>,
        negatives: Vec<&'a MediaEncoding>,
        c: f64,
    ) -> Result<Self> {
        let (lambda_pos, lambda_neg) = class_weights(positives.len(), negatives.len(), c)?;
        let dim = positives[0].dim();
        if let Some(e) = positives.iter().chain(&negatives).find(|e| e.dim() != dim) {
            return Err(Error::dim("training sample", dim, e.dim()));
        }
        Ok(TrainingProblem {
            positives,
            negatives,
            lambda_pos,
            lambda_neg,
        })
    }

    /// Positives are the target template's encodings.
    pub fn for_template(
        target: &'a Template,
        negatives: Vec<&'a MediaEncoding>,
        c: f64,
    ) -> Result<Self> {
        TrainingProblem::new(target.encodings().iter().collect(), negatives, c)
    }

    pub fn positives(&self) -> &[&'a MediaEncoding] {
        &self.positives
    }

    pub fn negatives(&self) -> &[&'a MediaEncoding] {
        &self.negatives
    }

    pub fn lambda_pos(&self) -> f64 {
        self.lambda_pos
    }

    pub fn lambda_neg(&self) -> f64 {
        self.lambda_neg
    }

    pub fn dim(&self) -> usize {
        self.positives[0].dim()
    }

    /// `(x, y, λ)` for every sample, positives first.
    fn samples(&self) -> impl Iterator<Item = (&[f64], f64, f64)> + '_ {
        let pos = self
            .positives
            .iter()
            .map(move |e| (e.vector().values(), 1.0, self.lambda_pos));
        let neg = self
            .negatives
            .iter()
            .map(move |e| (e.vector().values(), -1.0, self.lambda_neg));
        pos.chain(neg)
    }

    /// Primal objective at the bias-augmented weight vector `w` (length dim + 1).
    pub fn objective(&self, w: &[f64]) -> f64 {
        let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
        let loss: f64 = self
            .samples()
            .map(|(x, y, lambda)| {
                let slack = (1.0 - y * augmented_dot(w, x)).max(0.0);
                lambda * slack * slack
            })
            .sum();
        reg + loss
    }

    /// Gradient of [`objective`](Self::objective) at `w`.
    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut g = w.to_vec();
        for (x, y, lambda) in self.samples() {
            let slack = 1.0 - y * augmented_dot(w, x);
            if slack > 0.0 {
                let coef = -2.0 * lambda * slack * y;
                for (gk, xk) in g[..d].iter_mut().zip(x) {
                    *gk += coef * xk;
                }
                g[d] += coef * BIAS_FEATURE;
            }
        }
        g
    }
}

fn augmented_dot(w: &[f64], x: &[f64]) -> f64 {
    let d = x.len();
    w[..d].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[d] * BIAS_FEATURE
}

/// Linear classifier `x ↦ w·x + b` owned by one template.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    weights: Embedding,
    bias: f64,
    owner_template: String,
}

impl SvmModel {
    pub fn new(weights: Embedding, bias: f64, owner_template: impl Into<String>) -> Result<Self> {
        if !weights.is_finite() || !bias.is_finite() {
            return Err(Error::InvalidInput("model weights must be finite".into()));
        }
        Ok(SvmModel {
            weights,
            bias,
            owner_template: owner_template.into(),
        })
    }

    pub fn weights(&self) -> &Embedding {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn owner_template(&self) -> &str {
        &self.owner_template
    }

    pub fn dim(&self) -> usize {
        self.weights.dim()
    }

    /// The weight vector with the bias appended.
    pub fn augmented(&self) -> Vec<f64> {
        let mut w = self.weights.values().to_vec();
        w.push(self.bias);
        w
    }
}

/// Raw signed margin `w·x + b`.
pub fn decision_value(model: &SvmModel, x: &Embedding) -> Result<f64> {
    if x.dim() != model.dim() {
        return Err(Error::dim(
            format!("decision value for model {}", model.owner_template),
            model.dim(),
            x.dim(),
        ));
    }
    Ok(model.weights.dot_unchecked(x) + model.bias * BIAS_FEATURE)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub model: SvmModel,
    pub termination: Termination,
    pub epochs: usize,
    /// Largest projected-gradient magnitude seen in the final epoch.
    pub violation: f64,
    /// Primal objective after each epoch, when tracing was requested.
    pub objective_trace: Vec<f64>,
}

/// Runs dual coordinate descent and reports how it stopped.
pub fn solve(
    problem: &TrainingProblem<'_>,
    config: &SolverConfig,
    owner_template: &str,
    trace: bool,
) -> Result<SolveOutcome> {
    config.validate()?;
    let d = problem.dim();
    let samples: Vec<(&[f64], f64, f64)> = problem.samples().collect();
    let n = samples.len();

    // Diagonal of the augmented dual Hessian: ‖x̃ᵢ‖² + 1/(2λᵢ).
    let diag: Vec<f64> = samples
        .iter()
        .map(|(x, _, lambda)| {
            x.iter().map(|v| v * v).sum::<f64>() + BIAS_FEATURE * BIAS_FEATURE + 0.5 / lambda
        })
        .collect();

    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; d + 1];
    let mut primal = vec![0.0; d + 1];
    let mut primal_objective = problem.objective(&primal);
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut objective_trace = Vec::new();
    let mut violation = f64::INFINITY;
    let mut epochs = 0;
    let mut termination = Termination::MaxIterations;

    while epochs < config.max_iterations {
        order.shuffle(&mut rng);
        violation = 0.0;
        for &i in &order {
            let (x, y, lambda) = samples[i];
            let g = y * augmented_dot(&w, x) - 1.0 + alpha[i] * 0.5 / lambda;
            let pg = if alpha[i] == 0.0 { g.min(0.0) } else { g };
            violation = violation.max(pg.abs());
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / diag[i]).max(0.0);
                let step = (alpha[i] - old) * y;
                for (wk, xk) in w[..d].iter_mut().zip(x) {
                    *wk += step * xk;
                }
                w[d] += step * BIAS_FEATURE;
            }
        }
        epochs += 1;
        let t = line_search(&samples, &primal, &w);
        if t > 0.0 {
            let candidate: Vec<f64> = primal
                .iter()
                .zip(&w)
                .map(|(p, q)| p + t * (q - p))
                .collect();
            let value = problem.objective(&candidate);
            if value <= primal_objective {
                primal = candidate;
                primal_objective = value;
            }
        }
        if trace {
            objective_trace.push(primal_objective);
        }
        if violation < config.tolerance {
            termination = Termination::Converged;
            break;
        }
    }

    let mut w = primal;
    let bias = w.pop().unwrap_or(0.0);
    let model = SvmModel::new(Embedding::raw(w), bias, owner_template)?;
    Ok(SolveOutcome {
        model,
        termination,
        epochs,
        violation,
        objective_trace,
    })
}

/// Minimizes the primal objective on the segment `from + t·(to − from)`,
/// `t ∈ [0, 1]`. The restriction is a convex piecewise quadratic, so its
/// derivative is monotone and bisection on the sign is exact up to rounding.
fn line_search(samples: &[(&[f64], f64, f64)], from: &[f64], to: &[f64]) -> f64 {
    let dir: Vec<f64> = to.iter().zip(from).map(|(a, b)| a - b).collect();
    let dir_sq: f64 = dir.iter().map(|v| v * v).sum();
    if dir_sq == 0.0 {
        return 0.0;
    }
    let from_dir: f64 = from.iter().zip(&dir).map(|(a, b)| a * b).sum();
    // Per sample: margin at `from`, change of margin along `dir`, weight.
    let margins: Vec<(f64, f64, f64)> = samples
        .iter()
        .map(|&(x, y, lambda)| {
            (
                y * augmented_dot(from, x),
                y * augmented_dot(&dir, x),
                lambda,
            )
        })
        .collect();
    let slope = |t: f64| {
        let loss: f64 = margins
            .iter()
            .map(|&(m, delta, lambda)| {
                let slack = (1.0 - m - t * delta).max(0.0);
                -2.0 * lambda * slack * delta
            })
            .sum();
        from_dir + t * dir_sq + loss
    };
    if slope(1.0) <= 0.0 {
        return 1.0;
    }
    if slope(0.0) >= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Trains one template SVM; fails with [`Error::NonConvergence`] when the
/// epoch budget runs out before the tolerance is met.
pub fn train_template_svm(
    problem: &TrainingProblem<'_>,
    config: &SolverConfig,
    owner_template: &str,
) -> Result<SvmModel> {
    let outcome = solve(problem, config, owner_template, false)?;
    match outcome.termination {
        Termination::Converged => Ok(outcome.model),
        Termination::MaxIterations => Err(Error::NonConvergence {
            iterations: outcome.epochs,
            violation: outcome.violation,
            tolerance: config.tolerance,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EncodingSource;
    use proptest::prelude::*;
    use rand::Rng;

    fn enc(v: &[f64]) -> MediaEncoding {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        MediaEncoding::new(
            EncodingSource::SingleImage {
                media_id: "m".into(),
            },
            Embedding::raw(v.iter().map(|x| x / n).collect()),
        )
        .unwrap()
    }

    fn random_encodings(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<MediaEncoding> {
        (0..n)
            .map(|_| {
                let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                enc(&v)
            })
            .collect()
    }

    fn template(id: &str, n: usize, rng: &mut ChaCha8Rng) -> Template {
        Template::new(id, id, random_encodings(rng, n, 3)).unwrap()
    }

    fn tight() -> SolverConfig {
        SolverConfig {
            c: 1.0,
            tolerance: 1e-10,
            max_iterations: 100_000,
            seed: 7,
        }
    }

    #[test]
    fn class_weight_examples() {
        let (p, n) = class_weights(1, 999, 1.0).unwrap();
        assert_eq!(p, 500.0);
        assert!((n - 0.5005005005005005).abs() < 1e-15);
        for k in [1, 7, 1000] {
            assert_eq!(class_weights(k, k, 3.5).unwrap(), (3.5, 3.5));
        }
        let (p, n) = class_weights(5, 45, 2.0).unwrap();
        assert_eq!(p, 10.0);
        assert!((n - 10.0 / 9.0).abs() < 1e-15);
        assert!(class_weights(0, 3, 1.0).is_err());
        assert!(class_weights(3, 0, 1.0).is_err());
        assert!(class_weights(3, 3, 0.0).is_err());
    }

    #[test]
    fn gallery_negatives_exclude_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let gallery = vec![
            template("g0", 4, &mut rng),
            template("g1", 2, &mut rng),
            template("g2", 5, &mut rng),
        ];
        let training: Vec<Template> = (0..5)
            .map(|i| template(&format!("tr{i}"), 2, &mut rng))
            .collect();
        let negs = build_negative_set(
            NegativeRole::GalleryTemplate,
            &gallery[0],
            &training,
            &gallery,
        )
        .unwrap();
        assert_eq!(negs.len(), 17);
        for role in [
            NegativeRole::GalleryTemplate,
            NegativeRole::IdentificationProbe,
            NegativeRole::VerificationProbe,
        ] {
            for target in &gallery {
                let negs = build_negative_set(role, target, &training, &gallery).unwrap();
                for own in target.encodings() {
                    assert!(!negs.iter().any(|n| std::ptr::eq(*n, own)));
                }
            }
        }
    }

    #[test]
    fn probe_negatives_are_training_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let training: Vec<Template> = (0..25)
            .map(|i| template(&format!("tr{i}"), 4, &mut rng))
            .collect();
        let gallery = vec![template("g0", 3, &mut rng)];
        let probe = template("p", 2, &mut rng);
        for role in [
            NegativeRole::IdentificationProbe,
            NegativeRole::VerificationProbe,
        ] {
            let negs = build_negative_set(role, &probe, &training, &gallery).unwrap();
            assert_eq!(negs.len(), 100);
        }
        assert!(matches!(
            build_negative_set(NegativeRole::VerificationProbe, &probe, &[], &gallery),
            Err(Error::EmptyNegatives)
        ));
    }

    #[test]
    fn separable_pair() {
        let p = enc(&[1.0, 0.0]);
        let n = enc(&[-1.0, 0.0]);
        let problem = TrainingProblem::new(vec![&p], vec![&n], 1.0).unwrap();
        let model = train_template_svm(
            &problem,
            &SolverConfig {
                c: 1.0,
                ..Default::default()
            },
            "t",
        )
        .unwrap();
        assert!(decision_value(&model, p.vector()).unwrap() > 0.0);
        assert!(decision_value(&model, n.vector()).unwrap() < 0.0);
    }

    #[test]
    fn decision_value_examples() {
        let m = SvmModel::new(Embedding::raw(vec![0.0, 0.0]), 0.3, "t").unwrap();
        assert_eq!(
            decision_value(&m, &Embedding::raw(vec![5.0, -2.0])).unwrap(),
            0.3
        );
        let m = SvmModel::new(Embedding::raw(vec![2.0, 0.0]), -1.0, "t").unwrap();
        assert_eq!(
            decision_value(&m, &Embedding::raw(vec![1.0, 0.0])).unwrap(),
            1.0
        );
        assert!(matches!(
            decision_value(&m, &Embedding::raw(vec![1.0])),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn problem_rejects_mixed_dims() {
        let a = enc(&[1.0, 0.0]);
        let b = enc(&[1.0, 0.0, 0.0]);
        assert!(matches!(
            TrainingProblem::new(vec![&a], vec![&b], 1.0),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn reports_nonconvergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pos = random_encodings(&mut rng, 5, 4);
        let neg = random_encodings(&mut rng, 30, 4);
        let problem =
            TrainingProblem::new(pos.iter().collect(), neg.iter().collect(), 10.0).unwrap();
        let config = SolverConfig {
            tolerance: 1e-14,
            max_iterations: 2,
            ..Default::default()
        };
        assert!(matches!(
            train_template_svm(&problem, &config, "t"),
            Err(Error::NonConvergence { iterations: 2, .. })
        ));
        let outcome = solve(&problem, &config, "t", false).unwrap();
        assert_eq!(outcome.termination, Termination::MaxIterations);
    }

    #[test]
    fn deterministic_for_same_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pos = random_encodings(&mut rng, 4, 6);
        let neg = random_encodings(&mut rng, 40, 6);
        let problem =
            TrainingProblem::new(pos.iter().collect(), neg.iter().collect(), 10.0).unwrap();
        let a = train_template_svm(&problem, &SolverConfig::default(), "t").unwrap();
        let b = train_template_svm(&problem, &SolverConfig::default(), "t").unwrap();
        let bits = |m: &SvmModel| {
            m.augmented()
                .iter()
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn duplicated_positives_with_halved_c_keep_boundary() {
        // Each positive listed twice at half the per-sample weight is the
        // same objective, so the re-solved boundary must agree.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let pos = random_encodings(&mut rng, 3, 4);
        let neg = random_encodings(&mut rng, 30, 4);
        let base = TrainingProblem::new(pos.iter().collect(), neg.iter().collect(), 2.0).unwrap();
        let doubled_pos: Vec<&MediaEncoding> = pos.iter().chain(&pos).collect();
        let mut doubled = TrainingProblem::new(doubled_pos, neg.iter().collect(), 1.0).unwrap();
        doubled.lambda_pos = base.lambda_pos / 2.0;
        doubled.lambda_neg = base.lambda_neg;
        let m1 = train_template_svm(&base, &tight(), "a").unwrap();
        let m2 = train_template_svm(&doubled, &tight(), "b").unwrap();
        for _ in 0..50 {
            let x = Embedding::raw((0..4).map(|_| rng.random_range(-1.0..1.0)).collect());
            let d1 = decision_value(&m1, &x).unwrap();
            let d2 = decision_value(&m2, &x).unwrap();
            assert!((d1 - d2).abs() < 1e-3, "{d1} vs {d2}");
        }
    }

    #[test]
    fn objective_decreases_across_epochs() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pos = random_encodings(&mut rng, 1 + seed as usize % 4, 5);
            let neg = random_encodings(&mut rng, 25, 5);
            let problem =
                TrainingProblem::new(pos.iter().collect(), neg.iter().collect(), 10.0).unwrap();
            let outcome = solve(&problem, &tight(), "t", true).unwrap();
            for w in outcome.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-10, "seed {seed}: {} -> {}", w[0], w[1]);
            }
        }
    }

    proptest! {
        #[test]
        fn objective_is_convex(seed in any::<u64>(), theta in 0.01f64..0.99) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pos = random_encodings(&mut rng, 3, 4);
            let neg = random_encodings(&mut rng, 12, 4);
            let problem = TrainingProblem::new(pos.iter().collect(), neg.iter().collect(), 1.0).unwrap();
            let w1: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
            let w2: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
            let mid: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| theta * a + (1.0 - theta) * b).collect();
            let lhs = problem.objective(&mid);
            let rhs = theta * problem.objective(&w1) + (1.0 - theta) * problem.objective(&w2);
            prop_assert!(lhs <= rhs + 1e-9);
        }

        #[test]
        fn negative_order_does_not_move_optimum(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pos = random_encodings(&mut rng, 2, 4);
            let neg = random_encodings(&mut rng, 20, 4);
            let a = TrainingProblem::new(pos.iter().collect(), neg.iter().collect(), 1.0).unwrap();
            let mut shuffled: Vec<&MediaEncoding> = neg.iter().collect();
            shuffled.shuffle(&mut rng);
            let b = TrainingProblem::new(pos.iter().collect(), shuffled, 1.0).unwrap();
            let ma = train_template_svm(&a, &tight(), "t").unwrap();
            let mb = train_template_svm(&b, &tight(), "t").unwrap();
            for i in 0..20 {
                let x = Embedding::raw((0..4).map(|k| ((i * 4 + k) as f64 * 0.37).sin()).collect());
                let da = decision_value(&ma, &x).unwrap();
                let db = decision_value(&mb, &x).unwrap();
                prop_assert!((da - db).abs() <= 1e-6);
            }
        }
    }
}
