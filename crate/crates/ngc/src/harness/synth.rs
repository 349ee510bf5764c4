//! Synthetic classification datasets: block-model graphs with
//! class-conditional features.
//!
//! The homophilous setting the denoising theory assumes is generated
//! directly: a stochastic block model supplies the graph, block membership
//! supplies the labels, and features are drawn per class —
//!
//! * **Gaussian family**: each class gets a unit-norm mean vector, nodes
//!   get `μ_class + σ_feat·ν` with `ν ~ N(0, I)`;
//! * **Bernoulli family** (for flip noise): coordinate `j` "belongs" to one
//!   class, and `P(x_ij = 1)` is `bern_high` on the label's own coordinates
//!   and `bern_low` elsewhere.
//!
//! Splits follow the per-class protocol common for citation benchmarks:
//! `train_per_class` and `val_per_class` nodes are drawn per class
//! (seeded), the rest become test nodes. All draws use named streams of the
//! run's seed, so the graph, the features, and the split are independent of
//! each other and of trial counts elsewhere.

use crate::error::{Error, Result};
use crate::graph::{block_of, Graph, GraphKind};
use crate::matrix::Matrix;
use crate::noise::SplitMasks;
use crate::rng;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Which feature family to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureFamily {
    Gaussian,
    Bernoulli,
}

/// Everything needed to synthesize one dataset.
#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub n: usize,
    pub blocks: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub d: usize,
    pub family: FeatureFamily,
    pub sigma_feat: f64,
    pub bern_high: f64,
    pub bern_low: f64,
    pub train_per_class: usize,
    pub val_per_class: usize,
}

/// A synthesized dataset (clean — noise is injected downstream).
#[derive(Debug, Clone)]
pub struct SynthData {
    pub graph: Graph,
    pub clean: Matrix,
    pub labels: Vec<usize>,
    pub classes: usize,
    pub masks: SplitMasks,
}

/// Generate a dataset for one seed.
pub fn synthesize_dataset(spec: &SynthSpec, seed: u64) -> Result<SynthData> {
    if spec.d < spec.blocks && spec.family == FeatureFamily::Bernoulli {
        return Err(Error::InvalidParameter {
            name: "d",
            reason: format!(
                "Bernoulli features need at least one coordinate per class ({} < {})",
                spec.d, spec.blocks
            ),
        });
    }
    let kind = GraphKind::Sbm { blocks: spec.blocks, p_in: spec.p_in, p_out: spec.p_out };
    let graph = Graph::canonical(kind, spec.n, seed)?;
    let labels: Vec<usize> = (0..spec.n).map(|i| block_of(i, spec.n, spec.blocks)).collect();

    let clean = match spec.family {
        FeatureFamily::Gaussian => {
            let mut mean_rng = rng::stream(seed, "synth.means");
            let mut means = Matrix::from_fn(spec.blocks, spec.d, |_, _| {
                StandardNormal.sample(&mut mean_rng)
            });
            for c in 0..spec.blocks {
                let row = means.row_mut(c);
                let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for v in row {
                        *v /= norm;
                    }
                }
            }
            let mut feat_rng = rng::stream(seed, "synth.features");
            Matrix::from_fn(spec.n, spec.d, |i, j| {
                let noise: f64 = StandardNormal.sample(&mut feat_rng);
                means.get(labels[i], j) + spec.sigma_feat * noise
            })
        }
        FeatureFamily::Bernoulli => {
            let mut feat_rng = rng::stream(seed, "synth.features");
            Matrix::from_fn(spec.n, spec.d, |i, j| {
                let own = block_of(j, spec.d, spec.blocks) == labels[i];
                let p = if own { spec.bern_high } else { spec.bern_low };
                f64::from(feat_rng.random::<f64>() < p)
            })
        }
    };

    let masks = per_class_split(&labels, spec.blocks, spec.train_per_class, spec.val_per_class, seed)?;
    Ok(SynthData { graph, clean, labels, classes: spec.blocks, masks })
}

/// Seeded per-class split: shuffle each class, take `train_per_class` then
/// `val_per_class`, leave the rest as test nodes.
pub fn per_class_split(
    labels: &[usize],
    classes: usize,
    train_per_class: usize,
    val_per_class: usize,
    seed: u64,
) -> Result<SplitMasks> {
    let n = labels.len();
    let mut split_rng = rng::stream(seed, "synth.split");
    let mut train = vec![false; n];
    let mut val = vec![false; n];
    let mut test = vec![false; n];
    for c in 0..classes {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        if members.len() < train_per_class + val_per_class {
            return Err(Error::InvalidParameter {
                name: "train_per_class",
                reason: format!(
                    "class {c} has {} nodes, fewer than train {} + val {}",
                    members.len(),
                    train_per_class,
                    val_per_class
                ),
            });
        }
        members.shuffle(&mut split_rng);
        for (rank, &i) in members.iter().enumerate() {
            if rank < train_per_class {
                train[i] = true;
            } else if rank < train_per_class + val_per_class {
                val[i] = true;
            } else {
                test[i] = true;
            }
        }
    }
    if !test.iter().any(|&t| t) {
        return Err(Error::InvalidParameter {
            name: "train_per_class",
            reason: "split leaves no test nodes".into(),
        });
    }
    Ok(SplitMasks { train, val, test })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(family: FeatureFamily) -> SynthSpec {
        SynthSpec {
            n: 120,
            blocks: 2,
            p_in: 0.2,
            p_out: 0.05,
            d: 10,
            family,
            sigma_feat: 0.5,
            bern_high: 0.7,
            bern_low: 0.1,
            train_per_class: 10,
            val_per_class: 10,
        }
    }

    #[test]
    fn gaussian_dataset_shape_and_determinism() {
        let a = synthesize_dataset(&spec(FeatureFamily::Gaussian), 3).unwrap();
        assert_eq!(a.clean.shape(), (120, 10));
        assert_eq!(a.labels.len(), 120);
        assert_eq!(a.masks.train.iter().filter(|&&m| m).count(), 20);
        assert_eq!(a.masks.val.iter().filter(|&&m| m).count(), 20);
        assert_eq!(a.masks.test.iter().filter(|&&m| m).count(), 80);
        let b = synthesize_dataset(&spec(FeatureFamily::Gaussian), 3).unwrap();
        assert_eq!(a.clean, b.clean);
        assert_eq!(a.masks.train, b.masks.train);
        let c = synthesize_dataset(&spec(FeatureFamily::Gaussian), 4).unwrap();
        assert_ne!(a.clean, c.clean);
    }

    #[test]
    fn class_means_separate_features() {
        // With small within-class noise the class centroids stay far apart
        // relative to sigma_feat.
        let mut s = spec(FeatureFamily::Gaussian);
        s.sigma_feat = 0.1;
        let data = synthesize_dataset(&s, 0).unwrap();
        let mut centroid = vec![vec![0.0; s.d]; 2];
        let mut count = [0usize; 2];
        for i in 0..s.n {
            let c = data.labels[i];
            count[c] += 1;
            for j in 0..s.d {
                centroid[c][j] += data.clean.get(i, j);
            }
        }
        let mut dist_sq = 0.0;
        for j in 0..s.d {
            let diff = centroid[0][j] / count[0] as f64 - centroid[1][j] / count[1] as f64;
            dist_sq += diff * diff;
        }
        // Unit-norm means drawn independently: typical separation around
        // sqrt(2); demand a conservative fraction of it.
        assert!(dist_sq.sqrt() > 0.5, "centroid distance {}", dist_sq.sqrt());
    }

    #[test]
    fn bernoulli_features_are_binary_with_class_structure() {
        let data = synthesize_dataset(&spec(FeatureFamily::Bernoulli), 1).unwrap();
        assert!(data.clean.as_slice().iter().all(|&v| v == 0.0 || v == 1.0));
        // Own-coordinate frequency should be near bern_high, others near
        // bern_low.
        let (mut own_sum, mut own_n, mut other_sum, mut other_n) = (0.0, 0, 0.0, 0);
        for i in 0..120 {
            for j in 0..10 {
                let own = block_of(j, 10, 2) == data.labels[i];
                if own {
                    own_sum += data.clean.get(i, j);
                    own_n += 1;
                } else {
                    other_sum += data.clean.get(i, j);
                    other_n += 1;
                }
            }
        }
        let own_rate = own_sum / own_n as f64;
        let other_rate = other_sum / other_n as f64;
        assert!((own_rate - 0.7).abs() < 0.06, "own rate {own_rate}");
        assert!((other_rate - 0.1).abs() < 0.06, "other rate {other_rate}");
    }

    #[test]
    fn masks_are_disjoint_and_per_class() {
        let data = synthesize_dataset(&spec(FeatureFamily::Gaussian), 9).unwrap();
        data.masks.validate(120).unwrap();
        for c in 0..2 {
            let train_c = (0..120)
                .filter(|&i| data.labels[i] == c && data.masks.train[i])
                .count();
            assert_eq!(train_c, 10);
        }
    }

    #[test]
    fn oversubscribed_split_rejected() {
        let mut s = spec(FeatureFamily::Gaussian);
        s.train_per_class = 100;
        assert!(synthesize_dataset(&s, 0).is_err());
    }
}
