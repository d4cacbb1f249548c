//! Stochastic block model and degree-corrected SBM generators.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, LabelVector};

/// Per-node degree heterogeneity for the DC-SBM.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeCorrection {
    None,
    Beta { a: f64, b: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockModelConfig {
    pub n: usize,
    /// `K×K` symmetric matrix of connection probabilities.
    pub block_probs: Vec<Vec<f64>>,
    /// Relative community sizes; normalised internally.
    pub community_proportions: Vec<f64>,
    pub degree_correction: DegreeCorrection,
}

impl BlockModelConfig {
    /// Two-level block matrix: `intra` on the diagonal, `inter` elsewhere.
    pub fn planted(
        n: usize,
        intra: f64,
        inter: f64,
        proportions: Vec<f64>,
        degree_correction: DegreeCorrection,
    ) -> Self {
        let k = proportions.len();
        let block_probs = (0..k)
            .map(|a| (0..k).map(|b| if a == b { intra } else { inter }).collect())
            .collect();
        Self {
            n,
            block_probs,
            community_proportions: proportions,
            degree_correction,
        }
    }

    pub fn k(&self) -> usize {
        self.community_proportions.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if k == 0 {
            return Err(Error::Config("at least one community is required".into()));
        }
        if self.community_proportions.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::Config("community proportions must be positive".into()));
        }
        if self.block_probs.len() != k || self.block_probs.iter().any(|r| r.len() != k) {
            return Err(Error::Config(format!("block_probs must be {k}x{k}")));
        }
        for a in 0..k {
            for b in 0..k {
                let p = self.block_probs[a][b];
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Config(format!("block probability {p} outside [0, 1]")));
                }
                if p != self.block_probs[b][a] {
                    return Err(Error::Config("block_probs must be symmetric".into()));
                }
            }
        }
        if let DegreeCorrection::Beta { a, b } = self.degree_correction {
            if !(a > 0.0 && b > 0.0) {
                return Err(Error::Config("beta parameters must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn community_sizes(&self) -> Vec<usize> {
        apportion(self.n, &self.community_proportions)
    }

    /// Block labels: the first `n₀` nodes get class 0, and so on.
    pub fn block_labels(&self) -> LabelVector {
        let sizes = self.community_sizes();
        let values = sizes
            .iter()
            .enumerate()
            .flat_map(|(k, &s)| std::iter::repeat_n(k as i32, s))
            .collect();
        LabelVector::new(values, sizes.len()).expect("labels within range")
    }
}

/// Largest-remainder apportionment of `n` items by `weights`; ties go to the
/// lower index.
pub fn apportion(n: usize, weights: &[f64]) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| w / total * n as f64).collect();
    let mut sizes: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        sizes[i] += 1;
    }
    sizes
}

/// Plain SBM: every unordered pair is an independent Bernoulli draw.
pub fn sample_sbm<R: Rng + ?Sized>(cfg: &BlockModelConfig, rng: &mut R) -> Result<(Graph, LabelVector)> {
    cfg.validate()?;
    if cfg.degree_correction != DegreeCorrection::None {
        return Err(Error::Config("sample_sbm requires degree_correction = none".into()));
    }
    let labels = cfg.block_labels();
    let graph = sample_pairs(cfg, &labels, None, rng)?;
    Ok((graph, labels))
}

/// DC-SBM sample together with the drawn degree parameters.
#[derive(Clone, Debug)]
pub struct DcSbmSample {
    pub graph: Graph,
    pub labels: LabelVector,
    pub theta: Vec<f64>,
}

/// DC-SBM with `θᵢ ~ Beta(a, b)` i.i.d. and `P(i~j) = θᵢ θⱼ B(Yᵢ, Yⱼ)`.
pub fn sample_dcsbm<R: Rng + ?Sized>(cfg: &BlockModelConfig, rng: &mut R) -> Result<DcSbmSample> {
    cfg.validate()?;
    let DegreeCorrection::Beta { a, b } = cfg.degree_correction else {
        return Err(Error::Config("sample_dcsbm requires a beta degree correction".into()));
    };
    let beta = Beta::new(a, b).map_err(|e| Error::Config(e.to_string()))?;
    let theta: Vec<f64> = (0..cfg.n).map(|_| beta.sample(rng)).collect();
    sample_dcsbm_with_theta(cfg, theta, rng)
}

/// DC-SBM edge sampling with caller-supplied degree parameters. Draws the same
/// uniforms in the same order as [`sample_sbm`], so `θ ≡ 1` reproduces it.
pub fn sample_dcsbm_with_theta<R: Rng + ?Sized>(
    cfg: &BlockModelConfig,
    theta: Vec<f64>,
    rng: &mut R,
) -> Result<DcSbmSample> {
    cfg.validate()?;
    if theta.len() != cfg.n {
        return Err(Error::LengthMismatch {
            left: theta.len(),
            right: cfg.n,
        });
    }
    if theta.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::Config("degree parameters must lie in [0, 1]".into()));
    }
    let labels = cfg.block_labels();
    let graph = sample_pairs(cfg, &labels, Some(&theta), rng)?;
    Ok(DcSbmSample {
        graph,
        labels,
        theta,
    })
}

/// `P(edge i~j)` under the model.
pub fn edge_probability(cfg: &BlockModelConfig, labels: &LabelVector, theta: Option<&[f64]>, i: usize, j: usize) -> f64 {
    let (yi, yj) = (labels.values()[i] as usize, labels.values()[j] as usize);
    let base = cfg.block_probs[yi][yj];
    match theta {
        Some(t) => t[i] * t[j] * base,
        None => base,
    }
}

fn sample_pairs<R: Rng + ?Sized>(
    cfg: &BlockModelConfig,
    labels: &LabelVector,
    theta: Option<&[f64]>,
    rng: &mut R,
) -> Result<Graph> {
    let n = cfg.n;
    let y: Vec<usize> = labels.values().iter().map(|&v| v as usize).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        let row = &cfg.block_probs[y[i]];
        for j in (i + 1)..n {
            let mut p = row[y[j]];
            if let Some(t) = theta {
                p *= t[i] * t[j];
            }
            debug_assert!((0.0..=1.0).contains(&p));
            let p = p.clamp(0.0, 1.0);
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edge_list(&edges, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn apportion_one_two_three_four() {
        assert_eq!(apportion(2000, &[1.0, 2.0, 3.0, 4.0]), vec![200, 400, 600, 800]);
        assert_eq!(apportion(800, &[1.0, 2.0, 3.0, 4.0]), vec![80, 160, 240, 320]);
        // 10/3 each: remainders tie, lower index wins
        assert_eq!(apportion(10, &[1.0, 1.0, 1.0]), vec![4, 3, 3]);
        assert_eq!(apportion(7, &[1.0, 3.0]).iter().sum::<usize>(), 7);
    }

    #[test]
    fn sbm_disjoint_cliques() {
        let cfg = BlockModelConfig {
            n: 6,
            block_probs: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            community_proportions: vec![1.0, 1.0],
            degree_correction: DegreeCorrection::None,
        };
        let (g, y) = sample_sbm(&cfg, &mut rng_from_seed(1)).unwrap();
        assert_eq!(g.m(), 6);
        assert_eq!(y.values(), &[0, 0, 0, 1, 1, 1]);
        assert!(g.has_edge(0, 2) && !g.has_edge(2, 3));
    }

    #[test]
    fn sbm_all_zero_is_edgeless() {
        let cfg = BlockModelConfig::planted(50, 0.0, 0.0, vec![1.0, 1.0], DegreeCorrection::None);
        let (g, _) = sample_sbm(&cfg, &mut rng_from_seed(3)).unwrap();
        assert_eq!(g.m(), 0);
    }

    #[test]
    fn unit_theta_matches_sbm() {
        let sbm = BlockModelConfig::planted(120, 0.3, 0.05, vec![1.0, 2.0, 3.0], DegreeCorrection::None);
        let mut dc = sbm.clone();
        dc.degree_correction = DegreeCorrection::Beta { a: 1.0, b: 4.0 };
        let (g1, y1) = sample_sbm(&sbm, &mut rng_from_seed(11)).unwrap();
        let s = sample_dcsbm_with_theta(&dc, vec![1.0; 120], &mut rng_from_seed(11)).unwrap();
        assert_eq!(g1, s.graph);
        assert_eq!(y1, s.labels);
    }

    #[test]
    fn zero_theta_isolates_node() {
        let cfg = BlockModelConfig::planted(40, 1.0, 1.0, vec![1.0, 1.0], DegreeCorrection::Beta { a: 1.0, b: 4.0 });
        let mut theta = vec![1.0; 40];
        theta[7] = 0.0;
        let s = sample_dcsbm_with_theta(&cfg, theta, &mut rng_from_seed(5)).unwrap();
        assert_eq!(s.graph.degree(7), 0);
        assert_eq!(s.graph.degree(8), 38);
    }

    #[test]
    fn same_seed_same_graph() {
        let cfg = BlockModelConfig::planted(300, 0.3, 0.1, vec![1.0, 2.0, 3.0, 4.0], DegreeCorrection::Beta { a: 1.0, b: 4.0 });
        let a = sample_dcsbm(&cfg, &mut rng_from_seed(9)).unwrap();
        let b = sample_dcsbm(&cfg, &mut rng_from_seed(9)).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.theta, b.theta);
    }

    #[test]
    fn config_validation() {
        let mut cfg = BlockModelConfig::planted(10, 0.3, 0.1, vec![1.0, 1.0], DegreeCorrection::None);
        cfg.block_probs[0][1] = 0.2;
        assert!(cfg.validate().is_err());
        let cfg = BlockModelConfig::planted(10, 1.3, 0.1, vec![1.0, 1.0], DegreeCorrection::None);
        assert!(cfg.validate().is_err());
        let cfg = BlockModelConfig::planted(10, 0.3, 0.1, vec![1.0, 1.0], DegreeCorrection::Beta { a: 1.0, b: 4.0 });
        assert!(sample_sbm(&cfg, &mut rng_from_seed(0)).is_err());
    }
}
