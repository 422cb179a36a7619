use alloc::vec;
use alloc::vec::Vec;

/// Standard deviation floor used when normalising returns.
pub const STD_FLOOR: f64 = 1e-8;

/// `G_t = Σ_{k≥t} γ^{k−t} r_k`.
pub fn discounted_returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut g = 0.0;
    for (o, r) in out.iter_mut().zip(rewards).rev() {
        g = r + gamma * g;
        *o = g;
    }
    out
}

/// Standardises returns pooled over every episode of a batch, using the
/// population standard deviation.
pub fn normalize_returns(batch: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = batch.iter().map(Vec::len).sum::<usize>();
    if n == 0 {
        return batch.to_vec();
    }
    let mean = batch.iter().flatten().sum::<f64>() / n as f64;
    let var = batch.iter().flatten().map(|g| (g - mean) * (g - mean)).sum::<f64>() / n as f64;
    let std = libm::sqrt(var).max(STD_FLOOR);
    batch.iter().map(|ep| ep.iter().map(|g| (g - mean) / std).collect()).collect()
}
