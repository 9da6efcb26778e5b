use super::{OraclePolicy, Policy, PolicyDescriptor, PolicyError};
use crate::agent::{AgentContext, Command, GroundTruth};
use crate::sim::{bbox_center, from_norm, BboxNorm};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PivotConfig {
    pub n_init: usize,
    pub n_opt: usize,
    pub iters: usize,
    /// Initial Gaussian in raw pixels.
    pub mean: [f64; 2],
    pub std: [f64; 2],
    pub image_size: [u32; 2],
    /// Half-width, in normalized units, of the returned box.
    pub half_box: u32,
}

impl Default for PivotConfig {
    fn default() -> Self {
        Self {
            n_init: 10,
            n_opt: 6,
            iters: 2,
            mean: [256.0, 256.0],
            std: [100.0, 100.0],
            image_size: [512, 512],
            half_box: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotIteration {
    pub samples: Vec<[f64; 2]>,
    pub scores: Vec<f64>,
    /// Indices into `samples`, best first.
    pub kept: Vec<usize>,
    /// Gaussian refitted to `kept`; the final round keeps the previous fit.
    pub mean: [f64; 2],
    pub std: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotResult {
    pub point: [f64; 2],
    pub score: f64,
    pub bbox_norm: BboxNorm,
    /// Round 0 is the initial draw; each later round samples from the fit
    /// of the previous round's kept points.
    pub rounds: Vec<PivotIteration>,
}

fn draw(rng: &mut ChaCha8Rng, mean: [f64; 2], std: [f64; 2], n: usize, size: [u32; 2]) -> Vec<[f64; 2]> {
    let axis = |rng: &mut ChaCha8Rng, k: usize| {
        let v = if std[k] > 0.0 {
            Normal::new(mean[k], std[k]).expect("finite std").sample(rng)
        } else {
            mean[k]
        };
        v.clamp(0.0, size[k] as f64)
    };
    (0..n).map(|_| [axis(rng, 0), axis(rng, 1)]).collect()
}

/// Iterative sample-and-refit search for the best-scoring image point.
/// Ties keep the earlier sample.
pub fn pivot_sample(scorer: &dyn Fn([f64; 2]) -> f64, cfg: &PivotConfig, seed: u64) -> PivotResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut mean, mut std) = (cfg.mean, cfg.std);
    let mut rounds = Vec::with_capacity(cfg.iters + 1);
    let mut best: Option<([f64; 2], f64)> = None;
    for round in 0..=cfg.iters {
        let samples = draw(&mut rng, mean, std, cfg.n_init, cfg.image_size);
        let scores: Vec<f64> = samples.iter().map(|p| scorer(*p)).collect();
        for (p, s) in samples.iter().zip(&scores) {
            if best.is_none_or(|(_, b)| *s > b) {
                best = Some((*p, *s));
            }
        }
        let mut order: Vec<usize> = (0..samples.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        order.truncate(cfg.n_opt.max(1));
        if round < cfg.iters && !order.is_empty() {
            let n = order.len() as f64;
            for k in 0..2 {
                let m = order.iter().map(|&i| samples[i][k]).sum::<f64>() / n;
                let var = order.iter().map(|&i| (samples[i][k] - m).powi(2)).sum::<f64>() / n;
                mean[k] = m;
                std[k] = var.sqrt();
            }
        }
        rounds.push(PivotIteration {
            samples,
            scores,
            kept: order,
            mean,
            std,
        });
    }
    let (point, score) = best.unwrap_or((cfg.mean, f64::NEG_INFINITY));
    let size = cfg.image_size;
    let n = |p: f64, s: u32| ((p * 1000.0 / s as f64).floor() as i64).clamp(0, 1000);
    let (nx, ny) = (n(point[0], size[0]), n(point[1], size[1]));
    let h = cfg.half_box as i64;
    let bbox_norm = [
        (nx - h).max(0) as u32,
        (ny - h).max(0) as u32,
        (nx + h).min(1000) as u32,
        (ny + h).min(1000) as u32,
    ];
    PivotResult {
        point,
        score,
        bbox_norm,
        rounds,
    }
}

/// Oracle decisions with boxes re-grounded by [`pivot_sample`], scored by
/// closeness to the oracle's target pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PivotPolicy {
    pub config: PivotConfig,
    pub seed: u64,
}

impl PivotPolicy {
    pub fn new(config: PivotConfig, seed: u64) -> Self {
        Self { config, seed }
    }
}

impl Policy for PivotPolicy {
    fn decide(&self, ctx: &AgentContext, truth: &GroundTruth) -> Result<String, PolicyError> {
        let mut action = OraclePolicy::default().action(ctx, truth)?;
        if let Some(b) = action.command.bbox() {
            let size = ctx.ego.camera.image_size;
            let (tu, tv) = bbox_center(&from_norm(&b, size));
            let mut cfg = self.config;
            cfg.image_size = size;
            let seed = self.seed ^ (ctx.step as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            let r = pivot_sample(&|p| -(p[0] - tu).hypot(p[1] - tv), &cfg, seed);
            action.command = Command::with_bbox(action.kind(), r.bbox_norm).expect("bbox kind");
        }
        Ok(action.to_json())
    }

    fn descriptor(&self) -> PolicyDescriptor {
        PolicyDescriptor::new("pivot", self)
    }
}
