//! One-shot similarity between encodings and second-stage fusion of the
//! per-encoding scores of a template pair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Embedding, Template};
use crate::svm::{decision_value, SvmModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionConfig {
    /// Softmax sharpness; 0 gives the plain mean.
    pub beta: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig { beta: 0.0 }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!(
                "beta must be finite and non-negative, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub probe_template: String,
    pub gallery_template: String,
    pub score: f64,
    pub n_component_scores: usize,
}

/// `½·P(q) + ½·Q(p)`: each side's model evaluated on the other side's encoding.
pub fn oss_score(
    model_p: &SvmModel,
    model_q: &SvmModel,
    p: &Embedding,
    q: &Embedding,
) -> Result<f64> {
    Ok(0.5 * decision_value(model_p, q)? + 0.5 * decision_value(model_q, p)?)
}

/// Softmax-weighted average `Σ sᵢ e^{βsᵢ} / Σ e^{βsᵢ}`, computed with the
/// exponent shifted by `max(βsᵢ)`.
pub fn fuse_scores(scores: &[f64], config: &FusionConfig) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    config.validate()?;
    if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite score {bad}")));
    }
    if config.beta == 0.0 {
        return Ok(scores.iter().sum::<f64>() / scores.len() as f64);
    }
    let shift = scores
        .iter()
        .map(|s| config.beta * s)
        .fold(f64::NEG_INFINITY, f64::max);
    let (mut num, mut den) = (0.0, 0.0);
    for &s in scores {
        let w = (config.beta * s - shift).exp();
        num += s * w;
        den += w;
    }
    let (lo, hi) = scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
            (lo.min(s), hi.max(s))
        });
    Ok((num / den).clamp(lo, hi))
}

/// All `N_a × N_b` one-shot similarities of a template pair, row-major over
/// `t_a`'s encodings.
pub fn component_scores(
    t_a: &Template,
    t_b: &Template,
    model_a: &SvmModel,
    model_b: &SvmModel,
) -> Result<Vec<f64>> {
    let mut scores = Vec::with_capacity(t_a.len() * t_b.len());
    for ea in t_a.encodings() {
        for eb in t_b.encodings() {
            scores.push(oss_score(model_a, model_b, ea.vector(), eb.vector())?);
        }
    }
    Ok(scores)
}

pub fn score_template_pair(
    t_a: &Template,
    t_b: &Template,
    model_a: &SvmModel,
    model_b: &SvmModel,
    config: &FusionConfig,
) -> Result<PairScore> {
    let scores = component_scores(t_a, t_b, model_a, model_b)?;
    Ok(PairScore {
        probe_template: t_a.template_id().to_owned(),
        gallery_template: t_b.template_id().to_owned(),
        score: fuse_scores(&scores, config)?,
        n_component_scores: scores.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EncodingSource, MediaEncoding};
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(rng: &mut ChaCha8Rng, dim: usize) -> Embedding {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        Embedding::raw(v.into_iter().map(|x| x / n).collect())
    }

    fn model(rng: &mut ChaCha8Rng, dim: usize, owner: &str) -> SvmModel {
        let w = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        SvmModel::new(Embedding::raw(w), rng.random_range(-1.0..1.0), owner).unwrap()
    }

    fn template(rng: &mut ChaCha8Rng, id: &str, n: usize, dim: usize) -> Template {
        let encs = (0..n)
            .map(|i| {
                MediaEncoding::new(
                    EncodingSource::SingleImage {
                        media_id: format!("{id}-{i}"),
                    },
                    unit(rng, dim),
                )
                .unwrap()
            })
            .collect();
        Template::new(id, id, encs).unwrap()
    }

    #[test]
    fn oss_is_the_half_sum() {
        // P(q) = 0.8, Q(p) = 0.4 with constant models.
        let mp = SvmModel::new(Embedding::raw(vec![0.0, 0.0]), 0.8, "p").unwrap();
        let mq = SvmModel::new(Embedding::raw(vec![0.0, 0.0]), 0.4, "q").unwrap();
        let x = Embedding::raw(vec![1.0, 0.0]);
        assert!((oss_score(&mp, &mq, &x, &x).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn oss_symmetry_and_collapse() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (mp, mq) = (model(&mut rng, 5, "p"), model(&mut rng, 5, "q"));
        let (p, q) = (unit(&mut rng, 5), unit(&mut rng, 5));
        assert_eq!(
            oss_score(&mp, &mq, &p, &q).unwrap(),
            oss_score(&mq, &mp, &q, &p).unwrap()
        );
        let collapsed = oss_score(&mp, &mp, &p, &p).unwrap();
        assert!((collapsed - decision_value(&mp, &p).unwrap()).abs() < 1e-15);
        assert!(oss_score(&mp, &mq, &p, &Embedding::raw(vec![1.0])).is_err());
    }

    #[test]
    fn fuse_examples() {
        let zero = FusionConfig::default();
        assert!((fuse_scores(&[0.2, 0.4], &zero).unwrap() - 0.3).abs() < 1e-15);
        for beta in [0.0, 1.0, 1e3] {
            assert_eq!(
                fuse_scores(&[-4.25], &FusionConfig { beta }).unwrap(),
                -4.25
            );
        }
        let sharp = fuse_scores(&[0.0, 1.0], &FusionConfig { beta: 50.0 }).unwrap();
        // Direct evaluation: e^50 / (1 + e^50).
        let direct = 50f64.exp() / (1.0 + 50f64.exp());
        assert!((sharp - direct).abs() < 1e-15);
        assert!((1.0 - sharp).abs() < 1e-6);
        assert!(matches!(fuse_scores(&[], &zero), Err(Error::EmptyScores)));
        assert!(fuse_scores(&[1.0], &FusionConfig { beta: -1.0 }).is_err());
    }

    #[test]
    fn fuse_survives_large_exponents() {
        let s = fuse_scores(&[800.0, 790.0], &FusionConfig { beta: 10.0 }).unwrap();
        assert!(s.is_finite() && (s - 800.0).abs() < 1e-6);
    }

    #[test]
    fn pair_score_single_and_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ta = template(&mut rng, "a", 1, 4);
        let tb = template(&mut rng, "b", 1, 4);
        let (ma, mb) = (model(&mut rng, 4, "a"), model(&mut rng, 4, "b"));
        let ps = score_template_pair(&ta, &tb, &ma, &mb, &FusionConfig::default()).unwrap();
        let single = oss_score(
            &ma,
            &mb,
            ta.encodings()[0].vector(),
            tb.encodings()[0].vector(),
        )
        .unwrap();
        assert_eq!(ps.score, single);
        assert_eq!(ps.n_component_scores, 1);

        let ta = template(&mut rng, "a", 2, 4);
        let tb = template(&mut rng, "b", 3, 4);
        let ps = score_template_pair(&ta, &tb, &ma, &mb, &FusionConfig::default()).unwrap();
        let mut total = 0.0;
        for i in 0..2 {
            for j in 0..3 {
                let p = ta.encodings()[i].vector().values();
                let q = tb.encodings()[j].vector().values();
                let pq: f64 = ma
                    .weights()
                    .values()
                    .iter()
                    .zip(q)
                    .map(|(w, x)| w * x)
                    .sum::<f64>()
                    + ma.bias();
                let qp: f64 = mb
                    .weights()
                    .values()
                    .iter()
                    .zip(p)
                    .map(|(w, x)| w * x)
                    .sum::<f64>()
                    + mb.bias();
                total += 0.5 * pq + 0.5 * qp;
            }
        }
        assert_eq!(ps.n_component_scores, 6);
        assert!((ps.score - total / 6.0).abs() < 1e-12);

        let swapped = score_template_pair(&tb, &ta, &mb, &ma, &FusionConfig::default()).unwrap();
        assert!((swapped.score - ps.score).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn fuse_zero_beta_is_mean(scores in prop::collection::vec(-50.0f64..50.0, 1..64)) {
            let mean = scores.iter().sum::<f64>() / scores.len() as f64;
            let fused = fuse_scores(&scores, &FusionConfig::default()).unwrap();
            prop_assert!((fused - mean).abs() <= 1e-12 * mean.abs().max(1.0));
        }

        #[test]
        fn fuse_stays_within_range_and_grows_with_beta(
            scores in prop::collection::vec(-5.0f64..5.0, 2..32),
        ) {
            let lo = scores.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut prev = f64::NEG_INFINITY;
            for beta in [0.0, 1.0, 10.0, 100.0] {
                let f = fuse_scores(&scores, &FusionConfig { beta }).unwrap();
                prop_assert!(f >= lo && f <= hi);
                prop_assert!(f >= prev - 1e-12);
                prev = f;
            }
        }

        #[test]
        fn pair_score_permutation_invariant(seed in any::<u64>(), beta in 0.0f64..5.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ta = template(&mut rng, "a", 3, 4);
            let tb = template(&mut rng, "b", 4, 4);
            let (ma, mb) = (model(&mut rng, 4, "a"), model(&mut rng, 4, "b"));
            let config = FusionConfig { beta };
            let base = score_template_pair(&ta, &tb, &ma, &mb, &config).unwrap().score;
            let mut ea = ta.encodings().to_vec();
            let mut eb = tb.encodings().to_vec();
            ea.shuffle(&mut rng);
            eb.shuffle(&mut rng);
            let pa = Template::new("a", "a", ea).unwrap();
            let pb = Template::new("b", "b", eb).unwrap();
            let permuted = score_template_pair(&pa, &pb, &ma, &mb, &config).unwrap().score;
            prop_assert!((base - permuted).abs() <= 1e-12 * base.abs().max(1.0));
        }
    }
}
