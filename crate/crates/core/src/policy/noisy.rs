use super::{OraclePolicy, Policy, PolicyDescriptor, PolicyError};
use crate::agent::{ActionKind, AgentContext, Command, GroundTruth};
use crate::sim::BboxNorm;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// The oracle with Gaussian corner noise and random action-kind swaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyOracle {
    pub oracle: OraclePolicy,
    pub sigma_px: f64,
    pub p_wrong: f64,
    pub seed: u64,
}

/// Standard normal draw restricted to `|z| <= 3`.
fn truncated_normal(rng: &mut impl Rng) -> f64 {
    loop {
        let z: f64 = rng.sample(StandardNormal);
        if z.abs() <= 3.0 {
            return z;
        }
    }
}

impl NoisyOracle {
    pub fn new(sigma_px: f64, p_wrong: f64, seed: u64) -> Self {
        Self {
            oracle: OraclePolicy::default(),
            sigma_px,
            p_wrong,
            seed,
        }
    }

    fn rng(&self, digest: &str) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(digest.as_bytes());
        h.update(self.seed.to_le_bytes());
        ChaCha8Rng::from_seed(h.finalize().into())
    }

    fn jitter(&self, b: BboxNorm, size: [u32; 2], rng: &mut ChaCha8Rng) -> BboxNorm {
        let mut out = [0i64; 4];
        for (i, slot) in out.iter_mut().enumerate() {
            let s = size[i % 2] as f64;
            let d = self.sigma_px * truncated_normal(rng) * 1000.0 / s;
            *slot = (b[i] as f64 + d).round().clamp(0.0, 1000.0) as i64;
        }
        let (x1, x2) = (out[0].min(out[2]), out[0].max(out[2]));
        let (y1, y2) = (out[1].min(out[3]), out[1].max(out[3]));
        [x1 as u32, y1 as u32, x2 as u32, y2 as u32]
    }
}

impl Policy for NoisyOracle {
    fn decide(&self, ctx: &AgentContext, truth: &GroundTruth) -> Result<String, PolicyError> {
        let clean = self.oracle.action(ctx, truth)?;
        if self.sigma_px == 0.0 && self.p_wrong == 0.0 {
            return Ok(clean.to_json());
        }
        let mut rng = self.rng(&ctx.digest());
        let mut command = clean.command;
        if rng.random::<f64>() < self.p_wrong {
            let others: Vec<ActionKind> = ActionKind::ALL.into_iter().filter(|k| *k != command.kind()).collect();
            let kind = others[rng.random_range(0..others.len())];
            command = match kind {
                ActionKind::SearchSceneFrame => {
                    Command::SearchSceneFrame(rng.random_range(0..ctx.pose_frames.len().max(1)))
                }
                k => Command::with_bbox(k, command.bbox().unwrap_or([490, 490, 510, 510])).expect("bbox kind"),
            };
        }
        if let Some(b) = command.bbox() {
            if self.sigma_px > 0.0 {
                let jittered = self.jitter(b, ctx.ego.camera.image_size, &mut rng);
                command = Command::with_bbox(command.kind(), jittered).expect("bbox kind");
            }
        }
        let mut action = clean;
        action.command = command;
        Ok(action.to_json())
    }

    fn descriptor(&self) -> PolicyDescriptor {
        PolicyDescriptor::new("noisy", self)
    }
}
